//! One scalar interface for plain and differentiated runs.
//!
//! Simulation code written against [`AdScalar`] runs unchanged on `f32`/`f64`
//! (primal only) and on [`StochasticTriple`] (value plus derivative).

use std::fmt::Debug;

use super::ops::{Add, BinaryFn, Div, Exp, Max, Min, Mul, Neg, Scale, Sub, UnaryFn};
use super::random::RandomSource;
use super::samplers::{sample_bernoulli, sample_geometric};
use super::triple::StochasticTriple;
use crate::error::{Error, Result};
use crate::real::Real;

pub trait AdScalar: Copy + Debug + Send + Sync + 'static {
    type Real: Real;

    fn constant(x: Self::Real) -> Self;
    /// An input value moving with rate `dx` along the differentiation direction.
    fn with_tangent(x: Self::Real, dx: Self::Real) -> Self;
    fn value(&self) -> Self::Real;
    /// Per-sample derivative estimate; zero for plain floats.
    fn derivative(&self) -> Self::Real;

    fn map<U: UnaryFn<Self::Real>>(self, f: &U) -> Result<Self>;
    fn zip<B: BinaryFn<Self::Real>>(self, op: &B, other: Self, rng: &mut RandomSource) -> Result<Self>;

    fn geometric(p: Self, rng: &mut RandomSource) -> Result<Self>;
    fn bernoulli(p: Self, rng: &mut RandomSource) -> Result<Self>;

    /// Refreshes any perturbation against the sample's ledger.
    fn resolve(self, rng: &RandomSource) -> Self;

    fn plus(self, other: Self, rng: &mut RandomSource) -> Result<Self> {
        self.zip(&Add, other, rng)
    }
    fn minus(self, other: Self, rng: &mut RandomSource) -> Result<Self> {
        self.zip(&Sub, other, rng)
    }
    fn times(self, other: Self, rng: &mut RandomSource) -> Result<Self> {
        self.zip(&Mul, other, rng)
    }
    fn over(self, other: Self, rng: &mut RandomSource) -> Result<Self> {
        self.zip(&Div, other, rng)
    }
    fn maximum(self, other: Self, rng: &mut RandomSource) -> Result<Self> {
        self.zip(&Max, other, rng)
    }
    fn minimum(self, other: Self, rng: &mut RandomSource) -> Result<Self> {
        self.zip(&Min, other, rng)
    }
    fn exp(self) -> Result<Self> {
        self.map(&Exp)
    }
    fn neg(self) -> Result<Self> {
        self.map(&Neg)
    }
    fn scale(self, c: Self::Real) -> Result<Self> {
        self.map(&Scale(c))
    }
}

fn checked<F: Real>(x: F, what: &str) -> Result<F> {
    if x.is_nan() || x.is_infinite() {
        Err(Error::domain(format!("{what} evaluated to {x}")))
    } else {
        Ok(x)
    }
}

macro_rules! plain_scalar {
    ($t:ty) => {
        impl AdScalar for $t {
            type Real = $t;

            fn constant(x: $t) -> Self {
                x
            }
            fn with_tangent(x: $t, _: $t) -> Self {
                x
            }
            fn value(&self) -> $t {
                *self
            }
            fn derivative(&self) -> $t {
                0.0
            }
            fn map<U: UnaryFn<$t>>(self, f: &U) -> Result<Self> {
                checked(f.eval(self), "unary map")
            }
            fn zip<B: BinaryFn<$t>>(self, op: &B, other: Self, _: &mut RandomSource) -> Result<Self> {
                checked(op.eval(self, other), "binary map")
            }
            fn geometric(p: Self, rng: &mut RandomSource) -> Result<Self> {
                if p > 0.0 && p <= 1.0 {
                    Ok(rng.geometric(p as f64) as $t)
                } else {
                    Err(Error::domain(format!("probability {p} out of range")))
                }
            }
            fn bernoulli(p: Self, rng: &mut RandomSource) -> Result<Self> {
                if p > 0.0 && p < 1.0 {
                    Ok(rng.bernoulli(p as f64) as u8 as $t)
                } else {
                    Err(Error::domain(format!("probability {p} out of range")))
                }
            }
            fn resolve(self, _: &RandomSource) -> Self {
                self
            }
        }
    };
}

plain_scalar!(f32);
plain_scalar!(f64);

impl<F: Real> AdScalar for StochasticTriple<F> {
    type Real = F;

    fn constant(x: F) -> Self {
        StochasticTriple::constant(x)
    }
    fn with_tangent(x: F, dx: F) -> Self {
        StochasticTriple::new(x, dx)
    }
    fn value(&self) -> F {
        StochasticTriple::value(self)
    }
    fn derivative(&self) -> F {
        self.derivative_estimate()
    }
    fn map<U: UnaryFn<F>>(self, f: &U) -> Result<Self> {
        StochasticTriple::map(&self, f)
    }
    fn zip<B: BinaryFn<F>>(self, op: &B, other: Self, rng: &mut RandomSource) -> Result<Self> {
        StochasticTriple::zip(&self, op, &other, rng)
    }
    fn geometric(p: Self, rng: &mut RandomSource) -> Result<Self> {
        sample_geometric(&p, rng)
    }
    fn bernoulli(p: Self, rng: &mut RandomSource) -> Result<Self> {
        sample_bernoulli(&p, rng)
    }
    fn resolve(self, rng: &RandomSource) -> Self {
        rng.resolve(&self)
    }
}
