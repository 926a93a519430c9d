//! Per-sample random streams and the event ledger used to prune perturbations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Key mixed into the master seed for the coupling stream.
const AUX_KEY: u64 = 0x9e37_79b9_7f4a_7c15;

/// Identity of one discrete event (one coupled sampler draw) within a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EventId {
    source: u32,
    index: u32,
}

#[derive(Clone, Copy, Debug)]
struct EventState {
    weight: f64,
    alive: bool,
}

/// Random stream for one Monte Carlo sample.
///
/// Primal draws (the values a plain simulation would see) come from one ChaCha8
/// stream and every coupling draw from a second one, so a differentiated run
/// reproduces the primal run's values bit for bit.
///
/// The source also keeps a ledger of the finite perturbations created while the
/// sample runs. When two different live events meet in a binary operation one of
/// them is kept with probability proportional to its weight, the loser is retired
/// everywhere, and the winner absorbs its weight. Retiring globally is what keeps
/// the estimator unbiased when one event reaches the output along several paths.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    tag: u32,
    primal: ChaCha8Rng,
    aux: ChaCha8Rng,
    events: Vec<EventState>,
}

fn chacha(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        RandomSource {
            seed,
            stream,
            tag: (mix(seed ^ mix(stream.wrapping_add(AUX_KEY))) >> 32) as u32,
            primal: chacha(seed, stream),
            aux: chacha(seed ^ AUX_KEY, stream),
            events: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in `(0, 1]` from the primal stream.
    pub fn uniform(&mut self) -> f64 {
        1.0 - self.primal.gen::<f64>()
    }

    /// Uniform draw in `(0, 1]` from the coupling stream.
    pub(crate) fn aux_uniform(&mut self) -> f64 {
        1.0 - self.aux.gen::<f64>()
    }

    /// Uniform integer in `lo..=hi` from the coupling stream.
    pub(crate) fn aux_range(&mut self, lo: u64, hi: u64) -> u64 {
        self.aux.gen_range(lo..=hi)
    }

    /// Number of trials up to and including the first success on the primal stream.
    pub fn geometric(&mut self, p: f64) -> u64 {
        let u = self.uniform();
        geometric_from_uniform(u, p)
    }

    pub(crate) fn aux_geometric(&mut self, p: f64) -> u64 {
        let u = self.aux_uniform();
        geometric_from_uniform(u, p)
    }

    /// `true` with probability `p`, on the primal stream.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.primal.gen::<f64>() < p
    }

    /// Number of events registered so far in this sample.
    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub(crate) fn register(&mut self, weight: f64) -> EventId {
        let index = self.events.len() as u32;
        self.events.push(EventState { weight, alive: true });
        EventId {
            source: self.tag,
            index,
        }
    }

    fn state(&self, id: EventId) -> Option<&EventState> {
        if id.source == self.tag {
            self.events.get(id.index as usize)
        } else {
            None
        }
    }

    /// Whether `id` belongs to this source.
    pub(crate) fn owns(&self, id: EventId) -> bool {
        self.state(id).is_some()
    }

    pub(crate) fn is_alive(&self, id: EventId) -> bool {
        self.state(id).is_some_and(|s| s.alive)
    }

    pub(crate) fn weight(&self, id: EventId) -> f64 {
        self.state(id).map_or(0.0, |s| s.weight)
    }

    /// Keeps one of two live events; returns `true` when `a` survives.
    pub(crate) fn prune(&mut self, a: EventId, b: EventId) -> bool {
        let wa = self.weight(a);
        let wb = self.weight(b);
        let total = wa + wb;
        let keep_a = total <= 0.0 || self.aux.gen::<f64>() * total < wa;
        let (win, lose) = if keep_a { (a, b) } else { (b, a) };
        self.events[lose.index as usize].alive = false;
        self.events[win.index as usize].weight = total;
        keep_a
    }
}

/// Master seed for an independent sub-experiment `(tag, index)` of a run.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    mix(mix(master ^ mix(tag.wrapping_add(AUX_KEY))) ^ index)
}

/// Inverse-CDF geometric draw on `{1, 2, ...}` from `u` in `(0, 1]`.
pub fn geometric_from_uniform(u: f64, p: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let n = (u.ln() / (-p).ln_1p()).ceil();
    if n < 1.0 {
        1
    } else if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        n as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_repeat() {
        let mut a = RandomSource::new(7, 3);
        let mut b = RandomSource::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RandomSource::new(7, 3);
        let mut b = RandomSource::new(7, 4);
        let xs: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn aux_draws_leave_primal_untouched() {
        let mut a = RandomSource::new(11, 0);
        let mut b = RandomSource::new(11, 0);
        for _ in 0..10 {
            b.aux_uniform();
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn geometric_inverse_cdf() {
        assert_eq!(geometric_from_uniform(1.0, 0.3), 1);
        // P(N > n) = (1-p)^n, so u just below (1-p)^2 lands on 3
        let p: f64 = 0.5;
        assert_eq!(geometric_from_uniform(0.25 - 1e-12, p), 3);
        assert_eq!(geometric_from_uniform(0.25 + 1e-12, p), 2);
        assert_eq!(geometric_from_uniform(0.1, 1.0), 1);
    }

    #[test]
    fn geometric_mean_and_mass() {
        let mut rng = RandomSource::new(1, 0);
        let p = 0.3;
        let n = 200_000;
        let mut ones = 0usize;
        let mut sum = 0.0;
        for _ in 0..n {
            let g = rng.geometric(p);
            sum += g as f64;
            if g == 1 {
                ones += 1;
            }
        }
        let mean = sum / n as f64;
        let sd = ((1.0 - p) / (p * p)).sqrt() / (n as f64).sqrt();
        assert!((mean - 1.0 / p).abs() < 4.0 * sd, "{mean}");
        let frac = ones as f64 / n as f64;
        assert!((frac - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn prune_retires_loser_and_sums_weight() {
        let mut rng = RandomSource::new(0, 0);
        let a = rng.register(1.0);
        let b = rng.register(3.0);
        let keep_a = rng.prune(a, b);
        let (win, lose) = if keep_a { (a, b) } else { (b, a) };
        assert!(rng.is_alive(win));
        assert!(!rng.is_alive(lose));
        assert_eq!(rng.weight(win), 4.0);
    }

    #[test]
    fn foreign_ids_are_not_owned() {
        let mut a = RandomSource::new(0, 0);
        let b = RandomSource::new(0, 1);
        let id = a.register(1.0);
        assert!(a.owns(id));
        assert!(!b.owns(id));
    }
}
