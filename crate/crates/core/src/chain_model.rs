//! Static description of a repeater chain and the pointwise physics formulas.
//!
//! Formulas are written against [`AdScalar`] so that lengths, bright-state
//! parameters and coherence times can be differentiated directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::stochad::ops::{Offset, Scale};
use crate::stochad::{AdScalar, RandomSource};

pub const DEFAULT_SPEED_OF_LIGHT: f64 = 200_000.0;

/// Serde adapter for floats that may be infinite; infinities travel as `"inf"`.
pub mod maybe_inf {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    struct V;

    impl<'de> Visitor<'de> for V {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or \"inf\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(V)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    /// Seconds; `inf` disables decoherence.
    #[serde(with = "maybe_inf")]
    pub coherence_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LinkModel {
    /// Heralded links of fixed fidelity; attenuation in dB/km.
    FixedWerner { fidelity: f64, attenuation_db_km: f64 },
    /// Single-click generation with bright-state parameter `alpha`.
    SingleClick { alpha: f64, attenuation_db_km: f64 },
    /// Success probability and Werner parameter given outright.
    Direct { success_prob: f64, werner: f64 },
}

impl LinkModel {
    /// The tunable parameter of the model: fidelity, bright-state parameter or
    /// success probability.
    pub fn knob(&self) -> f64 {
        match *self {
            LinkModel::FixedWerner { fidelity, .. } => fidelity,
            LinkModel::SingleClick { alpha, .. } => alpha,
            LinkModel::Direct { success_prob, .. } => success_prob,
        }
    }

    pub fn with_knob(&self, x: f64) -> LinkModel {
        let mut m = *self;
        match &mut m {
            LinkModel::FixedWerner { fidelity, .. } => *fidelity = x,
            LinkModel::SingleClick { alpha, .. } => *alpha = x,
            LinkModel::Direct { success_prob, .. } => *success_prob = x,
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    /// Kilometres.
    pub length: f64,
    #[serde(flatten)]
    pub model: LinkModel,
}

fn default_c() -> f64 {
    DEFAULT_SPEED_OF_LIGHT
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    /// km/s in fibre.
    #[serde(default = "default_c")]
    pub speed_of_light: f64,
    /// Whether end nodes hold their qubit (and decohere) until delivery.
    #[serde(default = "yes")]
    pub end_node_storage: bool,
}

impl ChainSpec {
    /// A chain of identical links and identical nodes.
    pub fn homogeneous(n_links: usize, link: LinkSpec, coherence_time: f64) -> Self {
        ChainSpec {
            nodes: vec![NodeSpec { coherence_time }; n_links + 1],
            links: vec![link; n_links],
            speed_of_light: DEFAULT_SPEED_OF_LIGHT,
            end_node_storage: true,
        }
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(Error::InvalidChain(format!(
                "a chain needs at least 2 nodes, got {}",
                self.nodes.len()
            )));
        }
        if self.links.len() + 1 != self.nodes.len() {
            return Err(Error::InvalidChain(format!(
                "{} nodes need {} links, got {}",
                self.nodes.len(),
                self.nodes.len() - 1,
                self.links.len()
            )));
        }
        if !(self.speed_of_light > 0.0 && self.speed_of_light.is_finite()) {
            return Err(Error::InvalidChain(format!(
                "speed of light must be positive, got {}",
                self.speed_of_light
            )));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !(n.coherence_time > 0.0) {
                return Err(Error::InvalidChain(format!(
                    "node {i}: coherence time must be positive, got {}",
                    n.coherence_time
                )));
            }
        }
        for (i, l) in self.links.iter().enumerate() {
            l.validate().map_err(|e| Error::InvalidChain(format!("link {i}: {e}")))?;
        }
        Ok(())
    }
}

impl LinkSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::domain(format!("length must be finite and >= 0, got {}", self.length)));
        }
        let bad = |what: &str, v: f64| Err(Error::domain(format!("{what} out of range: {v}")));
        match self.model {
            LinkModel::FixedWerner { fidelity, attenuation_db_km } => {
                if !(0.25..=1.0).contains(&fidelity) {
                    return bad("fidelity", fidelity);
                }
                if !(attenuation_db_km >= 0.0 && attenuation_db_km.is_finite()) {
                    return bad("attenuation", attenuation_db_km);
                }
            }
            LinkModel::SingleClick { alpha, attenuation_db_km } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return bad("bright-state parameter", alpha);
                }
                if !(attenuation_db_km >= 0.0 && attenuation_db_km.is_finite()) {
                    return bad("attenuation", attenuation_db_km);
                }
            }
            LinkModel::Direct { success_prob, werner } => {
                if !(success_prob > 0.0 && success_prob <= 1.0) {
                    return bad("success probability", success_prob);
                }
                if !(0.0..=1.0).contains(&werner) {
                    return bad("Werner parameter", werner);
                }
            }
        }
        self.success_probability().map(|_| ())
    }

    /// Seconds per attempt.
    pub fn attempt_duration(&self, c: f64) -> f64 {
        self.length / c
    }

    pub fn success_probability(&self) -> Result<f64> {
        let mut rng = RandomSource::new(0, 0);
        success_probability(&self.model, self.length, self.model.knob(), &mut rng)
    }

    pub fn initial_werner(&self) -> Result<f64> {
        initial_werner(&self.model, self.model.knob())
    }
}

/// `L / c`.
pub fn attempt_duration<S: AdScalar>(length: S, c: f64) -> Result<S> {
    length.map(&Scale(Real::of(1.0 / c)))
}

/// Fibre transmission `10^(-γL/10)` with `γ` in dB/km.
pub fn transmission<S: AdScalar>(length: S, attenuation_db_km: f64) -> Result<S> {
    let k = -attenuation_db_km * std::f64::consts::LN_10 / 10.0;
    length.scale(Real::of(k))?.exp()
}

/// Success probability of one attempt; `knob` is the model's tunable parameter
/// (see [`LinkModel::knob`]).
pub fn success_probability<S: AdScalar>(
    model: &LinkModel,
    length: S,
    knob: S,
    rng: &mut RandomSource,
) -> Result<S> {
    let p = match *model {
        LinkModel::FixedWerner { attenuation_db_km, .. } => transmission(length, attenuation_db_km)?,
        LinkModel::SingleClick { attenuation_db_km, .. } => {
            let eta = transmission(length, attenuation_db_km)?;
            knob.scale(Real::of(2.0))?.times(eta, rng)?
        }
        LinkModel::Direct { .. } => knob,
    };
    let v = p.value().as_f64();
    if v <= 0.0 {
        return Err(Error::domain(
            "success probability underflows to 0; reduce the link length",
        ));
    }
    if v > 1.0 {
        return Err(Error::domain(format!("success probability {v} exceeds 1")));
    }
    Ok(p)
}

/// Werner parameter of a freshly generated link.
pub fn initial_werner<S: AdScalar>(model: &LinkModel, knob: S) -> Result<S> {
    let w = match *model {
        LinkModel::FixedWerner { .. } => knob.scale(Real::of(4.0 / 3.0))?.map(&Offset(Real::of(-1.0 / 3.0)))?,
        LinkModel::SingleClick { .. } => knob.scale(Real::of(-0.75))?.map(&Offset(Real::of(1.0)))?,
        LinkModel::Direct { werner, .. } => S::constant(Real::of(werner)),
    };
    let v = w.value().as_f64();
    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
        return Err(Error::invariant(format!("initial Werner parameter {v} outside [0, 1]")));
    }
    Ok(w)
}

pub fn fidelity_from_werner(w: f64) -> f64 {
    (1.0 + 3.0 * w) / 4.0
}

pub fn werner_from_fidelity(f: f64) -> f64 {
    (4.0 * f - 1.0) / 3.0
}

/// Depolarizing memory: `w · exp(-t/T)`.
pub fn decohere<S: AdScalar>(w: S, t: S, coherence_time: S, rng: &mut RandomSource) -> Result<S> {
    if t.value().as_f64() < 0.0 {
        return Err(Error::domain(format!(
            "storage time must be non-negative, got {}",
            t.value()
        )));
    }
    if coherence_time.value().as_f64().is_infinite() {
        return Ok(w);
    }
    let decay = t.over(coherence_time, rng)?.neg()?.exp()?;
    w.times(decay, rng)
}

/// Werner parameter after swapping two Werner pairs.
pub fn swap_werner<S: AdScalar>(a: S, b: S, rng: &mut RandomSource) -> Result<S> {
    a.times(b, rng)
}
