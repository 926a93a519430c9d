//! Differentiation directions and the per-sample parameter set of a chain.

use serde::{Deserialize, Serialize};

use crate::chain_model::{self, ChainSpec, LinkModel};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::stochad::{AdScalar, RandomSource};

/// Tangent vector over the chain's continuous parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    /// Per link, km per unit step.
    pub length: Vec<f64>,
    /// Per link, rate of the link model's tunable parameter (α, fidelity or p).
    pub knob: Vec<f64>,
    /// Per node, seconds per unit step.
    pub coherence_time: Vec<f64>,
}

impl Direction {
    pub fn zero(spec: &ChainSpec) -> Self {
        Direction {
            length: vec![0.0; spec.links.len()],
            knob: vec![0.0; spec.links.len()],
            coherence_time: vec![0.0; spec.nodes.len()],
        }
    }

    fn check(&self, spec: &ChainSpec) -> Result<()> {
        let dims = [
            (self.length.len(), spec.links.len()),
            (self.knob.len(), spec.links.len()),
            (self.coherence_time.len(), spec.nodes.len()),
        ];
        for (got, expected) in dims {
            if got != expected {
                return Err(Error::DimensionMismatch { expected, got });
            }
        }
        Ok(())
    }
}

/// Which derivative of the key rate to take.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parameter {
    /// Tunable parameter of one link (the bright-state parameter for single-click links).
    Knob { link: usize },
    /// The same tunable parameter moved on every link at once.
    UniformKnob,
    CoherenceTime { node: usize },
    Length { link: usize },
    /// Arbitrary tangent, e.g. the length changes induced by moving a repeater.
    Tangent { direction: Direction },
}

impl Parameter {
    pub fn direction(&self, spec: &ChainSpec) -> Result<Direction> {
        let mut d = Direction::zero(spec);
        let bound = |i: usize, n: usize| {
            if i < n {
                Ok(i)
            } else {
                Err(Error::domain(format!("index {i} out of range for {n} entries")))
            }
        };
        match self {
            Parameter::Knob { link } => d.knob[bound(*link, spec.links.len())?] = 1.0,
            Parameter::UniformKnob => d.knob.iter_mut().for_each(|x| *x = 1.0),
            Parameter::CoherenceTime { node } => {
                d.coherence_time[bound(*node, spec.nodes.len())?] = 1.0
            }
            Parameter::Length { link } => d.length[bound(*link, spec.links.len())?] = 1.0,
            Parameter::Tangent { direction } => {
                direction.check(spec)?;
                d = direction.clone();
            }
        }
        Ok(d)
    }
}

/// Physical quantities of one link in the scalar type of the run.
#[derive(Clone, Copy, Debug)]
pub struct LinkQuantities<S> {
    pub success_prob: S,
    pub attempt_duration: S,
    pub werner: S,
}

/// Chain parameters lifted into a scalar type, optionally carrying a tangent.
#[derive(Clone, Debug)]
pub struct ChainParams<S> {
    pub length: Vec<S>,
    pub knob: Vec<S>,
    pub coherence_time: Vec<S>,
    pub models: Vec<LinkModel>,
    pub speed_of_light: f64,
    pub end_node_storage: bool,
}

impl<S: AdScalar> ChainParams<S> {
    pub fn new(spec: &ChainSpec, direction: Option<&Direction>) -> Result<Self> {
        spec.validate()?;
        if let Some(d) = direction {
            d.check(spec)?;
        }
        let lift = |x: f64, dx: Option<f64>| match dx {
            Some(dx) if dx != 0.0 => S::with_tangent(Real::of(x), Real::of(dx)),
            _ => S::constant(Real::of(x)),
        };
        Ok(ChainParams {
            length: spec
                .links
                .iter()
                .enumerate()
                .map(|(i, l)| lift(l.length, direction.map(|d| d.length[i])))
                .collect(),
            knob: spec
                .links
                .iter()
                .enumerate()
                .map(|(i, l)| lift(l.model.knob(), direction.map(|d| d.knob[i])))
                .collect(),
            coherence_time: spec
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| lift(n.coherence_time, direction.map(|d| d.coherence_time[i])))
                .collect(),
            models: spec.links.iter().map(|l| l.model).collect(),
            speed_of_light: spec.speed_of_light,
            end_node_storage: spec.end_node_storage,
        })
    }

    pub fn n_links(&self) -> usize {
        self.models.len()
    }

    pub fn link_quantities(&self, rng: &mut RandomSource) -> Result<Vec<LinkQuantities<S>>> {
        (0..self.n_links())
            .map(|i| {
                let model = &self.models[i];
                Ok(LinkQuantities {
                    success_prob: chain_model::success_probability(model, self.length[i], self.knob[i], rng)?,
                    attempt_duration: chain_model::attempt_duration(self.length[i], self.speed_of_light)?,
                    werner: chain_model::initial_werner(model, self.knob[i])?,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_model::LinkSpec;
    use crate::Triple;

    fn spec() -> ChainSpec {
        let link = LinkSpec {
            length: 65.0,
            model: LinkModel::SingleClick { alpha: 0.05, attenuation_db_km: 0.2 },
        };
        ChainSpec::homogeneous(3, link, 10.0)
    }

    #[test]
    fn directions() {
        let s = spec();
        let d = Parameter::UniformKnob.direction(&s).unwrap();
        assert_eq!(d.knob, vec![1.0; 3]);
        let d = Parameter::CoherenceTime { node: 2 }.direction(&s).unwrap();
        assert_eq!(d.coherence_time, vec![0.0, 0.0, 1.0, 0.0]);
        assert!(Parameter::Length { link: 3 }.direction(&s).is_err());
        let bad = Parameter::Tangent { direction: Direction::default() };
        assert!(matches!(bad.direction(&s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lifted_parameters_carry_tangent() {
        let s = spec();
        let d = Parameter::Knob { link: 1 }.direction(&s).unwrap();
        let p = ChainParams::<Triple>::new(&s, Some(&d)).unwrap();
        assert_eq!(p.knob[0].delta(), 0.0);
        assert_eq!(p.knob[1].delta(), 1.0);
        let mut rng = RandomSource::new(0, 0);
        let q = p.link_quantities(&mut rng).unwrap();
        assert!((q[1].werner.delta() + 0.75).abs() < 1e-15);
        assert_eq!(q[0].werner.delta(), 0.0);
        assert_eq!(rng.event_count(), 0);
    }
}
