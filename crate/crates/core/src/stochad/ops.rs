//! Smooth scalar maps with known derivatives.
//!
//! Every map exposes its value and its (partial) derivatives. Triples use the
//! derivative for the infinitesimal part and re-evaluate the map for finite
//! jumps, so maps must be defined on the whole range a jump may reach.

use crate::real::Real;

/// A differentiable map `F -> F`.
pub trait UnaryFn<F> {
    fn eval(&self, x: F) -> F;
    fn deriv(&self, x: F) -> F;
}

/// A differentiable map `F x F -> F`.
pub trait BinaryFn<F> {
    fn eval(&self, a: F, b: F) -> F;
    /// Partial derivatives with respect to `a` and `b`.
    fn partials(&self, a: F, b: F) -> (F, F);
}

/// Unary map built from a pair of closures.
#[derive(Clone, Copy)]
pub struct Smooth<E, D> {
    f: E,
    df: D,
}

/// Wraps `f` with its derivative `df`.
pub fn smooth<F, E, D>(f: E, df: D) -> Smooth<E, D>
where
    E: Fn(F) -> F,
    D: Fn(F) -> F,
{
    Smooth { f, df }
}

impl<F, E, D> UnaryFn<F> for Smooth<E, D>
where
    E: Fn(F) -> F,
    D: Fn(F) -> F,
{
    fn eval(&self, x: F) -> F {
        (self.f)(x)
    }
    fn deriv(&self, x: F) -> F {
        (self.df)(x)
    }
}

/// Binary map built from a value closure and a partials closure.
#[derive(Clone, Copy)]
pub struct Smooth2<E, P> {
    f: E,
    partials: P,
}

pub fn smooth2<F, E, P>(f: E, partials: P) -> Smooth2<E, P>
where
    E: Fn(F, F) -> F,
    P: Fn(F, F) -> (F, F),
{
    Smooth2 { f, partials }
}

impl<F, E, P> BinaryFn<F> for Smooth2<E, P>
where
    E: Fn(F, F) -> F,
    P: Fn(F, F) -> (F, F),
{
    fn eval(&self, a: F, b: F) -> F {
        (self.f)(a, b)
    }
    fn partials(&self, a: F, b: F) -> (F, F) {
        (self.partials)(a, b)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;
#[derive(Clone, Copy, Debug, Default)]
pub struct Neg;
#[derive(Clone, Copy, Debug, Default)]
pub struct Exp;
#[derive(Clone, Copy, Debug, Default)]
pub struct Ln;
#[derive(Clone, Copy, Debug, Default)]
pub struct Sqrt;
#[derive(Clone, Copy, Debug, Default)]
pub struct Square;
#[derive(Clone, Copy, Debug, Default)]
pub struct Recip;

/// `|x|`. The derivative at zero is taken as zero, the symmetric subgradient.
#[derive(Clone, Copy, Debug, Default)]
pub struct Abs;

/// `c * x`.
#[derive(Clone, Copy, Debug)]
pub struct Scale<F>(pub F);

/// `x + c`.
#[derive(Clone, Copy, Debug)]
pub struct Offset<F>(pub F);

/// `base^x` for a constant base.
#[derive(Clone, Copy, Debug)]
pub struct PowBase<F>(pub F);

impl<F: Real> UnaryFn<F> for Identity {
    fn eval(&self, x: F) -> F {
        x
    }
    fn deriv(&self, _: F) -> F {
        F::one()
    }
}

impl<F: Real> UnaryFn<F> for Neg {
    fn eval(&self, x: F) -> F {
        -x
    }
    fn deriv(&self, _: F) -> F {
        -F::one()
    }
}

impl<F: Real> UnaryFn<F> for Exp {
    fn eval(&self, x: F) -> F {
        x.exp()
    }
    fn deriv(&self, x: F) -> F {
        x.exp()
    }
}

impl<F: Real> UnaryFn<F> for Ln {
    fn eval(&self, x: F) -> F {
        x.ln()
    }
    fn deriv(&self, x: F) -> F {
        x.recip()
    }
}

impl<F: Real> UnaryFn<F> for Sqrt {
    fn eval(&self, x: F) -> F {
        x.sqrt()
    }
    fn deriv(&self, x: F) -> F {
        F::of(0.5) / x.sqrt()
    }
}

impl<F: Real> UnaryFn<F> for Square {
    fn eval(&self, x: F) -> F {
        x * x
    }
    fn deriv(&self, x: F) -> F {
        x + x
    }
}

impl<F: Real> UnaryFn<F> for Recip {
    fn eval(&self, x: F) -> F {
        x.recip()
    }
    fn deriv(&self, x: F) -> F {
        -(x * x).recip()
    }
}

impl<F: Real> UnaryFn<F> for Abs {
    fn eval(&self, x: F) -> F {
        x.abs()
    }
    fn deriv(&self, x: F) -> F {
        if x > F::zero() {
            F::one()
        } else if x < F::zero() {
            -F::one()
        } else {
            F::zero()
        }
    }
}

impl<F: Real> UnaryFn<F> for Scale<F> {
    fn eval(&self, x: F) -> F {
        self.0 * x
    }
    fn deriv(&self, _: F) -> F {
        self.0
    }
}

impl<F: Real> UnaryFn<F> for Offset<F> {
    fn eval(&self, x: F) -> F {
        x + self.0
    }
    fn deriv(&self, _: F) -> F {
        F::one()
    }
}

impl<F: Real> UnaryFn<F> for PowBase<F> {
    fn eval(&self, x: F) -> F {
        self.0.powf(x)
    }
    fn deriv(&self, x: F) -> F {
        self.0.powf(x) * self.0.ln()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Add;
#[derive(Clone, Copy, Debug, Default)]
pub struct Sub;
#[derive(Clone, Copy, Debug, Default)]
pub struct Mul;
#[derive(Clone, Copy, Debug, Default)]
pub struct Div;

/// `max(a, b)`; ties split the derivative evenly between the operands.
#[derive(Clone, Copy, Debug, Default)]
pub struct Max;

/// `min(a, b)`; ties split the derivative evenly between the operands.
#[derive(Clone, Copy, Debug, Default)]
pub struct Min;

impl<F: Real> BinaryFn<F> for Add {
    fn eval(&self, a: F, b: F) -> F {
        a + b
    }
    fn partials(&self, _: F, _: F) -> (F, F) {
        (F::one(), F::one())
    }
}

impl<F: Real> BinaryFn<F> for Sub {
    fn eval(&self, a: F, b: F) -> F {
        a - b
    }
    fn partials(&self, _: F, _: F) -> (F, F) {
        (F::one(), -F::one())
    }
}

impl<F: Real> BinaryFn<F> for Mul {
    fn eval(&self, a: F, b: F) -> F {
        a * b
    }
    fn partials(&self, a: F, b: F) -> (F, F) {
        (b, a)
    }
}

impl<F: Real> BinaryFn<F> for Div {
    fn eval(&self, a: F, b: F) -> F {
        a / b
    }
    fn partials(&self, a: F, b: F) -> (F, F) {
        (b.recip(), -a / (b * b))
    }
}

impl<F: Real> BinaryFn<F> for Max {
    fn eval(&self, a: F, b: F) -> F {
        a.max(b)
    }
    fn partials(&self, a: F, b: F) -> (F, F) {
        if a > b {
            (F::one(), F::zero())
        } else if a < b {
            (F::zero(), F::one())
        } else {
            (F::of(0.5), F::of(0.5))
        }
    }
}

impl<F: Real> BinaryFn<F> for Min {
    fn eval(&self, a: F, b: F) -> F {
        a.min(b)
    }
    fn partials(&self, a: F, b: F) -> (F, F) {
        if a < b {
            (F::one(), F::zero())
        } else if a > b {
            (F::zero(), F::one())
        } else {
            (F::of(0.5), F::of(0.5))
        }
    }
}
