//! Best single path between end nodes and the network's worst-pair utility.

use serde::{Deserialize, Serialize};

use super::coords::Coordinates;
use super::path::{path_utility, Hardware, PathResult};
use crate::error::{Error, Result};

/// Search settings shared by every pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchSettings {
    pub n_samples: usize,
    pub temperature: f64,
    /// Only links of at most this length are used.
    pub edge_cap: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestPath {
    pub best: PathResult,
    /// Path utilities computed during the search.
    pub evaluations: usize,
    /// No path had positive utility; `best` is the direct path.
    pub infeasible: bool,
}

fn usable(coords: &Coordinates, a: usize, b: usize, cap: Option<f64>) -> bool {
    cap.is_none_or(|c| coords.dist(a, b) <= c)
}

fn valid_path(coords: &Coordinates, path: &[usize], s: usize, t: usize, cap: Option<f64>) -> bool {
    if path.len() < 2 || path[0] != s || path[path.len() - 1] != t {
        return false;
    }
    let mut seen = vec![false; coords.n_nodes()];
    for (k, &v) in path.iter().enumerate() {
        if v >= coords.n_nodes() || seen[v] {
            return false;
        }
        if k > 0 && k + 1 < path.len() && coords.is_end_node(v) {
            return false;
        }
        seen[v] = true;
    }
    path.windows(2).all(|w| usable(coords, w[0], w[1], cap))
}

/// Highest-utility simple path from `s` to `t` whose interior nodes are repeaters.
///
/// Depth-first over repeaters in index order. A partial path is scored as if it
/// ended at its last node; since extending a path cannot raise its rate, a
/// partial path scoring no better than the incumbent is dropped. The incumbent
/// starts as `warm_start` when that is still a valid path.
pub fn best_path(
    coords: &Coordinates,
    s: usize,
    t: usize,
    hw: &Hardware,
    warm_start: Option<&[usize]>,
    cfg: &SearchSettings,
) -> Result<BestPath> {
    if s == t || !coords.is_end_node(s) || !coords.is_end_node(t) {
        return Err(Error::domain(format!("{s} and {t} must be distinct end nodes")));
    }
    let eval = |path: &[usize]| path_utility(coords, path, hw, cfg.n_samples, cfg.temperature, cfg.seed);
    let mut evaluations = 0usize;
    let mut best: Option<PathResult> = None;
    if let Some(w) = warm_start.filter(|w| valid_path(coords, w, s, t, cfg.edge_cap)) {
        let r = eval(w)?;
        evaluations += 1;
        best = Some(r);
    }
    let score = |b: &Option<PathResult>| b.as_ref().map_or(f64::NEG_INFINITY, |r| r.annealed_utility);

    let n_end = coords.end_nodes.len();
    let repeaters: Vec<usize> = (n_end..coords.n_nodes()).collect();
    let mut on_path = vec![false; coords.n_nodes()];
    let mut path = vec![s];
    on_path[s] = true;

    // explicit stack of (node, next repeater candidate index)
    let mut stack: Vec<usize> = vec![0];
    let mut tried_direct = vec![false];
    loop {
        let depth = stack.len() - 1;
        let last = path[depth];
        if !tried_direct[depth] {
            tried_direct[depth] = true;
            if usable(coords, last, t, cfg.edge_cap) {
                path.push(t);
                let same_as_warm = warm_start.is_some_and(|w| w == path.as_slice());
                if !same_as_warm {
                    let r = eval(&path)?;
                    evaluations += 1;
                    if r.annealed_utility > score(&best) {
                        best = Some(r);
                    }
                }
                path.pop();
            }
        }
        let mut advanced = false;
        while stack[depth] < repeaters.len() {
            let v = repeaters[stack[depth]];
            stack[depth] += 1;
            if on_path[v] || !usable(coords, last, v, cfg.edge_cap) {
                continue;
            }
            path.push(v);
            let partial = eval(&path)?;
            evaluations += 1;
            if partial.annealed_utility <= score(&best) {
                path.pop();
                continue;
            }
            on_path[v] = true;
            stack.push(0);
            tried_direct.push(false);
            advanced = true;
            break;
        }
        if !advanced {
            if depth == 0 {
                break;
            }
            let v = path.pop().expect("non-empty");
            on_path[v] = false;
            stack.pop();
            tried_direct.pop();
        }
    }

    match best {
        Some(b) if b.annealed_utility > 0.0 => Ok(BestPath {
            best: b,
            evaluations,
            infeasible: false,
        }),
        _ => Ok(BestPath {
            best: PathResult {
                path: vec![s, t],
                skr: 0.0,
                skr_std_error: 0.0,
                mean_t_ent: f64::INFINITY,
                annealed_utility: 0.0,
                underflow: true,
            },
            evaluations,
            infeasible: true,
        }),
    }
}

/// Every simple repeater path from `s` to `t`, in the search's visiting order.
pub fn all_paths(coords: &Coordinates, s: usize, t: usize, edge_cap: Option<f64>) -> Vec<Vec<usize>> {
    fn go(coords: &Coordinates, path: &mut Vec<usize>, t: usize, cap: Option<f64>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().expect("non-empty");
        if usable(coords, last, t, cap) {
            let mut p = path.clone();
            p.push(t);
            out.push(p);
        }
        for v in coords.end_nodes.len()..coords.n_nodes() {
            if !path.contains(&v) && usable(coords, last, v, cap) {
                path.push(v);
                go(coords, path, t, cap, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(coords, &mut vec![s], t, edge_cap, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub pair: (usize, usize),
    pub result: BestPath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkUtility {
    /// Minimum annealed utility over end-node pairs.
    pub utility: f64,
    /// Key rate of the worst pair's best path.
    pub skr_min: f64,
    pub worst: usize,
    pub pairs: Vec<PairResult>,
}

impl NetworkUtility {
    pub fn worst_pair(&self) -> &PairResult {
        &self.pairs[self.worst]
    }
}

/// Unordered end-node pairs in lexicographic order.
pub fn end_pairs(coords: &Coordinates) -> Vec<(usize, usize)> {
    let n = coords.end_nodes.len();
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Best path for every pair; `warm` holds per-pair incumbent paths (same order
/// as [`end_pairs`]) and is updated with the new best paths.
pub fn network_utility(
    coords: &Coordinates,
    hw: &Hardware,
    cfg: &SearchSettings,
    warm: Option<&mut Vec<Vec<usize>>>,
) -> Result<NetworkUtility> {
    let pairs = end_pairs(coords);
    let mut results = Vec::with_capacity(pairs.len());
    let mut warm = warm;
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let ws = warm.as_ref().and_then(|w| w.get(k)).map(|p| p.as_slice());
        let r = best_path(coords, i, j, hw, ws, cfg)?;
        results.push(PairResult { pair: (i, j), result: r });
    }
    if let Some(w) = warm.as_deref_mut() {
        *w = results.iter().map(|r| r.result.best.path.clone()).collect();
    }
    let worst = (0..results.len())
        .min_by(|&a, &b| {
            results[a]
                .result
                .best
                .annealed_utility
                .total_cmp(&results[b].result.best.annealed_utility)
        })
        .expect("at least one pair");
    Ok(NetworkUtility {
        utility: results[worst].result.best.annealed_utility,
        skr_min: results[worst].result.best.skr,
        worst,
        pairs: results,
    })
}

#[cfg(test)]
mod tests {
    use super::super::coords::{square, Point};
    use super::*;

    fn settings() -> SearchSettings {
        SearchSettings {
            n_samples: 200,
            temperature: 0.0,
            edge_cap: None,
            seed: 1,
        }
    }

    #[test]
    fn direct_path_without_repeaters() {
        let c = Coordinates::new(vec![Point::new(0.0, 0.0), Point::new(40.0, 0.0)], vec![]).unwrap();
        let r = best_path(&c, 0, 1, &Hardware::default(), None, &settings()).unwrap();
        assert_eq!(r.best.path, vec![0, 1]);
        assert!(!r.infeasible);
    }

    #[test]
    fn enumeration_order() {
        let c = Coordinates::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], vec![Point::new(0.5, 0.1), Point::new(0.5, -0.1)]).unwrap();
        let paths = all_paths(&c, 0, 1, None);
        assert_eq!(paths, vec![vec![0, 1], vec![0, 2, 1], vec![0, 2, 3, 1], vec![0, 3, 1], vec![0, 3, 2, 1]]);
    }

    #[test]
    fn square_without_repeaters_worst_pair_is_diagonal() {
        let c = Coordinates::new(square(100.0), vec![]).unwrap();
        let u = network_utility(&c, &Hardware::default(), &settings(), None).unwrap();
        let (i, j) = u.worst_pair().pair;
        assert!((i, j) == (0, 2) || (i, j) == (1, 3));
    }

    #[test]
    fn edge_cap_removes_long_links() {
        let c = Coordinates::new(vec![Point::new(0.0, 0.0), Point::new(100.0, 0.0)], vec![Point::new(50.0, 0.0)]).unwrap();
        let cfg = SearchSettings {
            edge_cap: Some(60.0),
            ..settings()
        };
        let r = best_path(&c, 0, 1, &Hardware::default(), None, &cfg).unwrap();
        assert_eq!(r.best.path, vec![0, 2, 1]);
        let cfg = SearchSettings {
            edge_cap: Some(10.0),
            ..settings()
        };
        let r = best_path(&c, 0, 1, &Hardware::default(), None, &cfg).unwrap();
        assert!(r.infeasible);
        assert_eq!(r.best.path, vec![0, 1]);
    }

    #[test]
    fn two_end_nodes_give_single_pair() {
        let c = Coordinates::new(vec![Point::new(0.0, 0.0), Point::new(80.0, 0.0)], vec![Point::new(40.0, 5.0)]).unwrap();
        let u = network_utility(&c, &Hardware::default(), &settings(), None).unwrap();
        assert_eq!(u.pairs.len(), 1);
        assert_eq!(u.utility, u.pairs[0].result.best.annealed_utility);
    }
}
