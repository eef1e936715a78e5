//! Analytic single-mode states: exact characteristic functions, exact
//! quadrature densities and seeded homodyne samplers.
//!
//! Conventions: `[q, p] = i`, vacuum quadrature variance `1/2`,
//! `D(xi) = exp(i (xi_q p - xi_p q))`, and a coherent state `|beta>` has
//! `<q> = sqrt2 Re beta`, `<p> = sqrt2 Im beta`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasespace::{CharFn, PhasePoint};

/// Grid step of the inverse-CDF tables.
pub const TABLE_STEP: f64 = 1e-3;
/// Half-width of the tabulated domain in units of the widest quadrature spread.
pub const TABLE_SIGMAS: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateModel {
    Vacuum,
    Coherent(C64),
    Fock(u8),
    /// Even cat `(|alpha> + |-alpha>) / sqrt(2 + 2 exp(-2 alpha^2))`.
    Cat(f64),
}

impl StateModel {
    pub fn vacuum() -> Self {
        StateModel::Vacuum
    }

    pub fn coherent(beta: C64) -> Result<Self> {
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::InvalidArgument("coherent amplitude must be finite".into()));
        }
        StateModel::Coherent(beta).checked()
    }

    pub fn fock(k: u8) -> Result<Self> {
        if k > 2 {
            return Err(Error::InvalidArgument(format!(
                "Fock states are supported up to k = 2, got {k}"
            )));
        }
        StateModel::Fock(k).checked()
    }

    pub fn cat(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cat amplitude must be positive, got {alpha}"
            )));
        }
        StateModel::Cat(alpha).checked()
    }

    /// Verifies that the quadrature density integrates to one.
    fn checked(self) -> Result<Self> {
        for theta in [0.0, PI / 2.0] {
            let (lo, hi) = self.domain(theta);
            let n = ((hi - lo) / TABLE_STEP).ceil() as usize;
            let h = (hi - lo) / n as f64;
            let mut mass = 0.0;
            for k in 0..=n {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                mass += w * self.density(theta, lo + k as f64 * h);
            }
            mass *= h;
            if (mass - 1.0).abs() > 1e-9 {
                return Err(Error::Numerical(format!(
                    "density of {self} integrates to {mass} at theta = {theta}"
                )));
            }
        }
        Ok(self)
    }

    pub fn mean_photon_number(&self) -> f64 {
        match *self {
            StateModel::Vacuum => 0.0,
            StateModel::Coherent(b) => b.norm_sqr(),
            StateModel::Fock(k) => k as f64,
            StateModel::Cat(a) => a * a * (a * a).tanh(),
        }
    }

    /// Mean of the quadrature `cos(theta) q + sin(theta) p`.
    pub fn quadrature_mean(&self, theta: f64) -> f64 {
        match *self {
            StateModel::Coherent(b) => SQRT_2 * (theta.cos() * b.re + theta.sin() * b.im),
            _ => 0.0,
        }
    }

    /// True when the Wigner function is non-negative everywhere.
    pub fn has_positive_wigner(&self) -> bool {
        matches!(self, StateModel::Vacuum | StateModel::Coherent(_) | StateModel::Fock(0))
    }

    /// Tabulation domain `mu +- 8 sigma_max` for the quadrature at `theta`.
    fn domain(&self, theta: f64) -> (f64, f64) {
        let mu = self.quadrature_mean(theta);
        let spread = match self {
            StateModel::Coherent(_) => 1.0,
            _ => (2.0 * self.mean_photon_number() + 1.0).sqrt(),
        };
        (mu - TABLE_SIGMAS * spread, mu + TABLE_SIGMAS * spread)
    }

    pub fn chi(&self, xi: [f64; 2]) -> C64 {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        let g = (-r2 / 4.0).exp();
        match *self {
            StateModel::Vacuum => C64::new(g, 0.0),
            StateModel::Coherent(b) => {
                let (q, p) = (SQRT_2 * b.re, SQRT_2 * b.im);
                C64::from_polar(g, xi[0] * p - xi[1] * q)
            }
            StateModel::Fock(k) => {
                let x = r2 / 2.0;
                let lag = match k {
                    0 => 1.0,
                    1 => 1.0 - x,
                    _ => 1.0 - 2.0 * x + x * x / 2.0,
                };
                C64::new(g * lag, 0.0)
            }
            StateModel::Cat(a) => {
                let gamma = C64::new(-xi[0], -xi[1]) / SQRT_2;
                let amps = [C64::new(a, 0.0), C64::new(-a, 0.0)];
                let mut acc = C64::new(0.0, 0.0);
                for &x in &amps {
                    for &y in &amps {
                        acc += coherent_displacement_element(x, gamma, y);
                    }
                }
                acc * cat_norm_sqr(a)
            }
        }
    }

    /// Density of `cos(theta) q + sin(theta) p` at `s`.
    pub fn density(&self, theta: f64, s: f64) -> f64 {
        let gauss = |x: f64| (-x * x).exp() / PI.sqrt();
        match *self {
            StateModel::Vacuum => gauss(s),
            StateModel::Coherent(_) => gauss(s - self.quadrature_mean(theta)),
            StateModel::Fock(0) => gauss(s),
            StateModel::Fock(1) => 2.0 * s * s * gauss(s),
            StateModel::Fock(_) => {
                let h = 2.0 * s * s - 1.0;
                h * h * gauss(s) / 2.0
            }
            StateModel::Cat(a) => {
                let rot = C64::from_polar(a, -theta);
                let amp = coherent_wavefunction(rot, s) + coherent_wavefunction(-rot, s);
                cat_norm_sqr(a) * amp.norm_sqr()
            }
        }
    }
}

/// `<a| D(gamma) |b>` for coherent states in the standard amplitude convention.
fn coherent_displacement_element(a: C64, gamma: C64, b: C64) -> C64 {
    let phase = (gamma * b.conj() - gamma.conj() * b) / 2.0;
    let d = gamma + b;
    (phase - a.norm_sqr() / 2.0 - d.norm_sqr() / 2.0 + a.conj() * d).exp()
}

fn cat_norm_sqr(a: f64) -> f64 {
    1.0 / (2.0 + 2.0 * (-2.0 * a * a).exp())
}

/// Position wavefunction of `|beta>`.
fn coherent_wavefunction(beta: C64, s: f64) -> C64 {
    let e = -s * s / 2.0 + SQRT_2 * beta * s - beta * beta / 2.0 - beta.norm_sqr() / 2.0;
    e.exp() * PI.powf(-0.25)
}

impl CharFn for StateModel {
    fn chi(&self, xi: [f64; 2]) -> Option<C64> {
        Some(StateModel::chi(self, xi))
    }
}

impl fmt::Display for StateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateModel::Vacuum => write!(f, "vacuum"),
            StateModel::Coherent(b) if b.im == 0.0 => write!(f, "coherent({})", b.re),
            StateModel::Coherent(b) => write!(f, "coherent({},{})", b.re, b.im),
            StateModel::Fock(k) => write!(f, "fock({k})"),
            StateModel::Cat(a) => write!(f, "cat({a})"),
        }
    }
}

impl FromStr for StateModel {
    type Err = Error;

    /// Parses `vacuum`, `coherent(re)`, `coherent(re,im)`, `fock(k)`, `cat(alpha)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("unrecognized state descriptor '{s}'"));
        if s == "vacuum" {
            return Ok(StateModel::Vacuum);
        }
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<f64> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name.trim(), args.as_slice()) {
            ("coherent", &[re]) => StateModel::coherent(C64::new(re, 0.0)),
            ("coherent", &[re, im]) => StateModel::coherent(C64::new(re, im)),
            ("fock", &[k]) if k >= 0.0 && k.fract() == 0.0 && k < 256.0 => {
                StateModel::fock(k as u8)
            }
            ("cat", &[a]) => StateModel::cat(a),
            _ => Err(bad()),
        }
    }
}

impl Serialize for StateModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact characteristic function at a single-mode point.
pub fn exact_cf(state: &StateModel, xi: &PhasePoint) -> Result<C64> {
    Ok(state.chi(xi.pair()?))
}

pub fn exact_quadrature_density(state: &StateModel, theta: f64, s: f64) -> f64 {
    state.density(theta, s)
}

/// Quadrature angle for sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Fixed(f64),
    /// Uniform on `[0, pi)`, drawn per sample.
    PhaseRandom,
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Fixed(t) => write!(f, "{t}"),
            Angle::PhaseRandom => write!(f, "phase-random"),
        }
    }
}

impl FromStr for Angle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "phase-random" | "random" => Ok(Angle::PhaseRandom),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Angle::Fixed)
                .ok_or_else(|| Error::InvalidArgument(format!("bad angle '{s}'"))),
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Angle::Fixed(t) => s.serialize_f64(*t),
            Angle::PhaseRandom => s.serialize_str("phase-random"),
        }
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) => Ok(Angle::Fixed(t)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// One homodyne outcome `s` of the quadrature at angle `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSample {
    pub theta: f64,
    pub value: f64,
}

impl QuadratureSample {
    /// Reduces `theta` into `[0, pi)`; a half-turn flips the sign of the outcome.
    pub fn new(theta: f64, value: f64) -> Result<Self> {
        if !(theta.is_finite() && value.is_finite()) {
            return Err(Error::InvalidArgument("sample has non-finite entries".into()));
        }
        let turns = (theta / PI).floor();
        let mut t = theta - turns * PI;
        if t >= PI {
            t -= PI;
        }
        let value = if (turns as i64).rem_euclid(2) == 1 { -value } else { value };
        Ok(Self { theta: t.max(0.0), value })
    }
}

/// Tabulated inverse CDF on a uniform grid with linear interpolation.
struct InverseCdf {
    lo: f64,
    step: f64,
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn new(lo: f64, hi: f64, density: impl Fn(f64) -> f64) -> Self {
        let n = ((hi - lo) / TABLE_STEP).ceil() as usize;
        let step = (hi - lo) / n as f64;
        let mut cdf = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut prev = density(lo);
        cdf.push(0.0);
        for k in 1..=n {
            let cur = density(lo + k as f64 * step);
            acc += 0.5 * (prev + cur) * step;
            cdf.push(acc);
            prev = cur;
        }
        Self { lo, step, cdf }
    }

    fn sample(&self, u: f64) -> f64 {
        let target = u * self.cdf[self.cdf.len() - 1];
        let k = self.cdf.partition_point(|&c| c <= target).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
        self.lo + (k as f64 - 1.0 + frac) * self.step
    }
}

/// Draws `count` i.i.d. homodyne samples.
///
/// Each sample consumes one uniform for the angle (phase-random only) and
/// then one uniform for the outcome, from a ChaCha8 stream seeded by `seed`.
/// Phase-random samples take the local-oscillator phase uniform on a full
/// turn and fold it into `[0, pi)`, so the pooled outcome distribution is that
/// of the phase-averaged state. Phase-random cat samples use exact rejection
/// from the two-Gaussian envelope, since their density changes with the angle.
pub fn sample_quadrature(
    state: &StateModel,
    angle: Angle,
    count: usize,
    seed: u64,
) -> Result<Vec<QuadratureSample>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    match angle {
        Angle::Fixed(theta) => {
            let (lo, hi) = state.domain(theta);
            let table = InverseCdf::new(lo, hi, |s| state.density(theta, s));
            for _ in 0..count {
                out.push(QuadratureSample::new(theta, table.sample(rng.gen()))?);
            }
        }
        Angle::PhaseRandom => match *state {
            StateModel::Cat(a) => {
                for _ in 0..count {
                    let phi = rng.gen::<f64>() * 2.0 * PI;
                    out.push(QuadratureSample::new(phi, cat_rejection(a, phi, &mut rng))?);
                }
            }
            _ => {
                // Angle-independent shape, shifted by the angle-dependent mean.
                let shape = match state {
                    StateModel::Coherent(_) => StateModel::Vacuum,
                    s => *s,
                };
                let (lo, hi) = shape.domain(0.0);
                let table = InverseCdf::new(lo, hi, |s| shape.density(0.0, s));
                for _ in 0..count {
                    let phi = rng.gen::<f64>() * 2.0 * PI;
                    let s = table.sample(rng.gen()) + state.quadrature_mean(phi);
                    out.push(QuadratureSample::new(phi, s)?);
                }
            }
        },
    }
    Ok(out)
}

/// Cat density at angle `theta` is bounded by `4 N^2` times the equal mixture
/// of the two coherent-component Gaussians.
fn cat_rejection(a: f64, theta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let state = StateModel::Cat(a);
    let mu = SQRT_2 * a * theta.cos();
    let bound = 4.0 * cat_norm_sqr(a);
    loop {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let z = standard_normal(rng) / SQRT_2;
        let s = sign * mu + z;
        let g = 0.5 * ((-(s - mu).powi(2)).exp() + (-(s + mu).powi(2)).exp()) / PI.sqrt();
        if rng.gen::<f64>() * bound * g <= state.density(theta, s) {
            return s;
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; 1 - u keeps the logarithm finite.
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}
