//! Stochastic triples: a primal value, an infinitesimal part, and at most one
//! finite jump that happens with infinitesimal probability.

use super::ops::{BinaryFn, UnaryFn};
use super::random::{EventId, RandomSource};
use crate::error::{Error, Result};
use crate::real::Real;

/// A finite jump `jump` carried with weight `weight`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation<F> {
    jump: F,
    weight: F,
    event: Option<EventId>,
}

impl<F: Real> Perturbation<F> {
    pub fn jump(&self) -> F {
        self.jump
    }

    /// Weight as of the last operation that touched this triple. Call
    /// [`RandomSource::resolve`] to refresh it against the sample's ledger.
    pub fn weight(&self) -> F {
        self.weight
    }

    pub fn event(&self) -> Option<EventId> {
        self.event
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StochasticTriple<F> {
    value: F,
    delta: F,
    perturbation: Option<Perturbation<F>>,
}

fn finite<F: Real>(x: F, what: &str) -> Result<F> {
    if x.is_nan() || x.is_infinite() {
        Err(Error::domain(format!("{what} evaluated to {x}")))
    } else {
        Ok(x)
    }
}

impl<F: Real> StochasticTriple<F> {
    /// The differentiation variable at `x`.
    pub fn input(x: F) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFiniteInput(x.as_f64()));
        }
        Ok(Self::new(x, F::one()))
    }

    pub fn constant(x: F) -> Self {
        Self::new(x, F::zero())
    }

    pub fn new(value: F, delta: F) -> Self {
        StochasticTriple {
            value,
            delta,
            perturbation: None,
        }
    }

    /// A triple with a finite perturbation not tied to any sampler draw.
    pub fn with_perturbation(value: F, delta: F, jump: F, weight: F) -> Result<Self> {
        if !(weight >= F::zero()) {
            return Err(Error::invariant(format!("perturbation weight {weight} is negative")));
        }
        Ok(StochasticTriple {
            value,
            delta,
            perturbation: Some(Perturbation {
                jump,
                weight,
                event: None,
            }),
        })
    }

    pub(crate) fn from_event(value: F, delta: F, jump: F, weight: F, event: EventId) -> Self {
        StochasticTriple {
            value,
            delta,
            perturbation: Some(Perturbation {
                jump,
                weight,
                event: Some(event),
            }),
        }
    }

    pub fn value(&self) -> F {
        self.value
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn perturbation(&self) -> Option<Perturbation<F>> {
        self.perturbation
    }

    /// `δ + wΔ`, the per-sample derivative estimate.
    pub fn derivative_estimate(&self) -> F {
        match self.perturbation {
            Some(p) if p.weight > F::zero() => self.delta + p.weight * p.jump,
            _ => self.delta,
        }
    }

    pub fn map<U: UnaryFn<F>>(&self, f: &U) -> Result<Self> {
        let value = finite(f.eval(self.value), "unary map")?;
        let delta = if self.delta == F::zero() {
            F::zero()
        } else {
            self.delta * finite(f.deriv(self.value), "unary derivative")?
        };
        let perturbation = match self.perturbation {
            Some(p) => {
                let moved = finite(f.eval(self.value + p.jump), "unary map at jumped point")?;
                Some(Perturbation {
                    jump: moved - value,
                    ..p
                })
            }
            None => None,
        };
        Ok(StochasticTriple {
            value,
            delta,
            perturbation,
        })
    }

    /// Applies `op`, resolving competing perturbations through `rng`'s ledger.
    pub fn zip<B: BinaryFn<F>>(&self, op: &B, other: &Self, rng: &mut RandomSource) -> Result<Self> {
        let (a, b) = (self.value, other.value);
        let value = finite(op.eval(a, b), "binary map")?;
        let delta = if self.delta == F::zero() && other.delta == F::zero() {
            F::zero()
        } else {
            let (pa, pb) = op.partials(a, b);
            let mut d = F::zero();
            if self.delta != F::zero() {
                d = d + finite(pa, "partial derivative")? * self.delta;
            }
            if other.delta != F::zero() {
                d = d + finite(pb, "partial derivative")? * other.delta;
            }
            d
        };
        let pa = live(self.perturbation, rng);
        let pb = live(other.perturbation, rng);
        let (ja, jb, event) = match (pa, pb) {
            (None, None) => {
                return Ok(StochasticTriple {
                    value,
                    delta,
                    perturbation: None,
                })
            }
            (Some((ja, ea)), None) => (ja, F::zero(), ea),
            (None, Some((jb, eb))) => (F::zero(), jb, eb),
            (Some((ja, ea)), Some((jb, eb))) if ea == eb => (ja, jb, ea),
            (Some((ja, ea)), Some((jb, eb))) => {
                if rng.prune(ea, eb) {
                    (ja, F::zero(), ea)
                } else {
                    (F::zero(), jb, eb)
                }
            }
        };
        let moved = finite(op.eval(a + ja, b + jb), "binary map at jumped point")?;
        let jump = moved - value;
        let perturbation = if jump == F::zero() {
            None
        } else {
            Some(Perturbation {
                jump,
                weight: F::of(rng.weight(event)),
                event: Some(event),
            })
        };
        Ok(StochasticTriple {
            value,
            delta,
            perturbation,
        })
    }
}

/// The live jump and ledger id of a perturbation, registering untracked ones.
fn live<F: Real>(p: Option<Perturbation<F>>, rng: &mut RandomSource) -> Option<(F, EventId)> {
    let p = p?;
    match p.event {
        Some(id) if rng.owns(id) => rng.is_alive(id).then_some((p.jump, id)),
        _ => Some((p.jump, rng.register(p.weight.as_f64()))),
    }
}

impl RandomSource {
    /// Brings a triple's perturbation up to date with this sample's ledger: the
    /// weight is refreshed and perturbations whose event was pruned are dropped.
    pub fn resolve<F: Real>(&self, t: &StochasticTriple<F>) -> StochasticTriple<F> {
        let perturbation = match t.perturbation {
            Some(p) => match p.event {
                Some(id) if self.owns(id) => self.is_alive(id).then(|| Perturbation {
                    weight: F::of(self.weight(id)),
                    ..p
                }),
                _ => Some(p),
            },
            None => None,
        };
        StochasticTriple {
            perturbation,
            ..*t
        }
    }

    /// Whether `t` carries a perturbation that is still live in this sample.
    pub fn has_live_perturbation<F: Real>(&self, t: &StochasticTriple<F>) -> bool {
        match t.perturbation {
            Some(p) => match p.event {
                Some(id) if self.owns(id) => self.is_alive(id),
                _ => true,
            },
            None => false,
        }
    }
}
