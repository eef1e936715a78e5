//! Quadrature samples to characteristic-function estimates with confidence
//! tubes `|chi(xi) - c| <= delta`.
//!
//! Two estimators are provided. The histogram path bins outcomes into cells
//! of width `2h` and pays `|omega| h` for the binning on top of the
//! statistical term `n / sqrt(N)`; the empirical path averages
//! `exp(i omega s)` directly and pays only the statistical term.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::phasespace::PhasePoint;
use crate::sources::{QuadratureSample, StateModel};

/// Fewer samples than this make `n / sqrt(N) >= 1` for `n = 5`, so every
/// constraint would be vacuous.
pub const MIN_SAMPLES: usize = 25;
/// Reduction chunk; partial sums are combined in a fixed order.
const CHUNK: usize = 4096;
/// Upper 1% point of chi-square with 19 degrees of freedom.
const CHI2_19_P01: f64 = 36.191;
const THETA_BINS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureData {
    pub samples: Vec<QuadratureSample>,
    /// Angles were drawn uniformly at random.
    pub phase_random: bool,
}

/// Which samples to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaFilter {
    All,
    /// Samples whose direction is within `tol` of `theta`. Directions are
    /// compared modulo `pi`; outcomes across the wrap are negated.
    Near { theta: f64, tol: f64 },
}

/// Outcomes along one direction (or pooled over all of them).
#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    pub theta: Option<f64>,
    pub values: Vec<f64>,
}

impl QuadratureData {
    pub fn new(samples: Vec<QuadratureSample>, phase_random: bool) -> Self {
        Self {
            samples,
            phase_random,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct angles in ascending order (exact comparison).
    pub fn angles(&self) -> Vec<f64> {
        let mut a: Vec<f64> = self.samples.iter().map(|s| s.theta).collect();
        a.sort_by(f64::total_cmp);
        a.dedup();
        a
    }

    pub fn select(&self, filter: ThetaFilter) -> Result<Slice> {
        let slice = match filter {
            ThetaFilter::All => Slice {
                theta: None,
                values: self.samples.iter().map(|s| s.value).collect(),
            },
            ThetaFilter::Near { theta, tol } => {
                let values = self
                    .samples
                    .iter()
                    .filter_map(|s| {
                        let d = s.theta - theta;
                        let wrapped = d - PI * (d / PI).round();
                        if wrapped.abs() > tol {
                            return None;
                        }
                        let turns = ((d - wrapped) / PI).round() as i64;
                        Some(if turns.rem_euclid(2) == 1 { -s.value } else { s.value })
                    })
                    .collect();
                Slice {
                    theta: Some(theta),
                    values,
                }
            }
        };
        if slice.values.is_empty() {
            return Err(Error::EmptySelection);
        }
        Ok(slice)
    }

    /// Chi-square statistic of the angle histogram against uniform on
    /// `[0, pi)`, with 20 bins.
    pub fn theta_uniformity(&self) -> f64 {
        let mut counts = [0usize; THETA_BINS];
        for s in &self.samples {
            let b = ((s.theta / PI) * THETA_BINS as f64) as usize;
            counts[b.min(THETA_BINS - 1)] += 1;
        }
        let expected = self.samples.len() as f64 / THETA_BINS as f64;
        counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Histogram,
    Empirical,
    Exact,
}

/// Tube `|chi(point) - value| <= radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EstimateRepr", into = "EstimateRepr")]
pub struct CFEstimate {
    pub point: PhasePoint,
    pub value: C64,
    pub radius: f64,
    pub provenance: Provenance,
    /// `None` for exact values.
    pub confidence_sigmas: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct EstimateRepr {
    xi: PhasePoint,
    c_re: f64,
    c_im: f64,
    delta: f64,
    provenance: Provenance,
    n_sigmas: Option<f64>,
}

impl TryFrom<EstimateRepr> for CFEstimate {
    type Error = Error;
    fn try_from(r: EstimateRepr) -> Result<Self> {
        if !(r.delta.is_finite() && r.delta >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad tube radius {}", r.delta)));
        }
        Ok(Self {
            point: r.xi,
            value: C64::new(r.c_re, r.c_im),
            radius: r.delta,
            provenance: r.provenance,
            confidence_sigmas: r.n_sigmas,
        })
    }
}

impl From<CFEstimate> for EstimateRepr {
    fn from(e: CFEstimate) -> Self {
        Self {
            xi: e.point,
            c_re: e.value.re,
            c_im: e.value.im,
            delta: e.radius,
            provenance: e.provenance,
            n_sigmas: e.confidence_sigmas,
        }
    }
}

/// `omega * sigma u` for `u = (cos theta, sin theta)`.
fn slice_point(theta: f64, omega: f64) -> PhasePoint {
    PhasePoint::single(omega * theta.sin(), -omega * theta.cos())
}

/// Normalized histogram with bins of width `2h` centered at `2hj`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub h: f64,
    pub theta: Option<f64>,
    pub sample_count: usize,
    /// `(j, P_j)` in ascending `j`.
    pub bins: Vec<(i64, f64)>,
}

impl Histogram {
    pub fn from_slice(slice: &Slice, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!("bin half-width must be positive, got {h}")));
        }
        if slice.values.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for &s in &slice.values {
            *counts.entry((s / (2.0 * h)).round() as i64).or_default() += 1;
        }
        let n = slice.values.len();
        Ok(Self {
            h,
            theta: slice.theta,
            sample_count: n,
            bins: counts.into_iter().map(|(j, c)| (j, c as f64 / n as f64)).collect(),
        })
    }

    pub fn center(&self, j: i64) -> f64 {
        2.0 * self.h * j as f64
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().map(|b| b.1).sum()
    }

    /// `sum_j P_j exp(i omega s_j)`, exactly 1 at `omega = 0`.
    fn transform(&self, omega: f64) -> C64 {
        if omega == 0.0 {
            return C64::new(1.0, 0.0);
        }
        self.bins
            .iter()
            .map(|&(j, p)| C64::from_polar(p, omega * self.center(j)))
            .sum()
    }

    fn pooled_cos(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 1.0;
        }
        self.bins.iter().map(|&(j, p)| p * (r * self.center(j)).cos()).sum()
    }
}

pub fn build_histogram(data: &QuadratureData, h: f64, filter: ThetaFilter) -> Result<Histogram> {
    Histogram::from_slice(&data.select(filter)?, h)
}

fn statistical_radius(n_sigmas: f64, count: usize) -> f64 {
    n_sigmas / (count as f64).sqrt()
}

/// Histogram estimate with `delta = |omega| h + n / sqrt(N)`.
pub fn cf_from_histogram(hist: &Histogram, omega: f64, n_sigmas: f64) -> CFEstimate {
    let c = if omega < 0.0 {
        hist.transform(-omega).conj()
    } else {
        hist.transform(omega)
    };
    CFEstimate {
        point: slice_point(hist.theta.unwrap_or(0.0), omega),
        value: c,
        radius: omega.abs() * hist.h + statistical_radius(n_sigmas, hist.sample_count),
        provenance: Provenance::Histogram,
        confidence_sigmas: Some(n_sigmas),
    }
}

/// `(1/N) sum exp(i omega s)` by fixed-size chunks, so the result does not
/// depend on the number of threads.
fn empirical_sum(values: &[f64], omega: f64) -> C64 {
    if omega == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let partial: Vec<C64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&s| C64::from_polar(1.0, omega * s)).sum())
        .collect();
    partial.into_iter().sum::<C64>() / values.len() as f64
}

fn empirical_cos(values: &[f64], r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let partial: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|&s| (r * s).cos()).sum())
        .collect();
    partial.into_iter().sum::<f64>() / values.len() as f64
}

/// Empirical estimate with `delta = n / sqrt(N)`.
pub fn cf_empirical(slice: &Slice, omega: f64, n_sigmas: f64) -> Result<CFEstimate> {
    if slice.values.is_empty() {
        return Err(Error::EmptySelection);
    }
    let c = if omega < 0.0 {
        empirical_sum(&slice.values, -omega).conj()
    } else {
        empirical_sum(&slice.values, omega)
    };
    Ok(CFEstimate {
        point: slice_point(slice.theta.unwrap_or(0.0), omega),
        value: c,
        radius: statistical_radius(n_sigmas, slice.values.len()),
        provenance: Provenance::Empirical,
        confidence_sigmas: Some(n_sigmas),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Estimator {
    #[default]
    Empirical,
    Histogram { h: f64 },
}

impl Estimator {
    pub fn bin_half_width(&self) -> Option<f64> {
        match self {
            Estimator::Empirical => None,
            Estimator::Histogram { h } => Some(*h),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Empirical => write!(f, "empirical"),
            Estimator::Histogram { h } => write!(f, "histogram({h})"),
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "empirical" {
            return Ok(Estimator::Empirical);
        }
        s.strip_prefix("histogram(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|h| h.trim().parse::<f64>().ok())
            .filter(|h| h.is_finite() && *h > 0.0)
            .map(|h| Estimator::Histogram { h })
            .ok_or_else(|| Error::InvalidArgument(format!("unrecognized estimator '{s}'")))
    }
}

/// All samples pooled into one distribution, treated as the quadrature
/// distribution of the phase-averaged state along every direction.
///
/// The phase-averaged characteristic function is real, so the estimate at
/// radius `r` is the pooled mean of `cos(r s)`.
#[derive(Clone, Debug)]
pub struct PooledEstimator {
    values: Vec<f64>,
    histogram: Option<Histogram>,
    n_sigmas: f64,
    warning: Option<String>,
}

impl PooledEstimator {
    pub fn new(data: &QuadratureData, estimator: Estimator, n_sigmas: f64) -> Result<Self> {
        check_count(data.len())?;
        check_sigmas(n_sigmas)?;
        let slice = data.select(ThetaFilter::All)?;
        let histogram = match estimator {
            Estimator::Empirical => None,
            Estimator::Histogram { h } => Some(Histogram::from_slice(&slice, h)?),
        };
        let stat = data.theta_uniformity();
        let warning = (stat > CHI2_19_P01).then(|| {
            format!("angle coverage is not uniform (chi-square {stat:.2} > {CHI2_19_P01} at 1%)")
        });
        Ok(Self {
            values: slice.values,
            histogram,
            n_sigmas,
            warning,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.values.len()
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// `(c, delta)` at radius `r`.
    pub fn at(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        let stat = statistical_radius(self.n_sigmas, self.values.len());
        match &self.histogram {
            None => (empirical_cos(&self.values, r), stat),
            Some(h) => (h.pooled_cos(r), r * h.h + stat),
        }
    }

    fn provenance(&self) -> Provenance {
        if self.histogram.is_some() {
            Provenance::Histogram
        } else {
            Provenance::Empirical
        }
    }
}

/// Radial characteristic function table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialCF {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub deltas: Vec<f64>,
    pub sample_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub fn radial_pool(
    data: &QuadratureData,
    radii: &[f64],
    estimator: Estimator,
    n_sigmas: f64,
) -> Result<RadialCF> {
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|r| r.is_nan() || *r < 0.0) {
        return Err(Error::InvalidArgument("radii must be non-negative and increasing".into()));
    }
    let pooled = PooledEstimator::new(data, estimator, n_sigmas)?;
    let (values, deltas) = radii.iter().map(|&r| pooled.at(r)).unzip();
    Ok(RadialCF {
        radii: radii.to_vec(),
        values,
        deltas,
        sample_count: pooled.sample_count(),
        warning: pooled.warning.clone(),
    })
}

fn check_count(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples(n));
    }
    Ok(())
}

fn check_sigmas(n: f64) -> Result<()> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument(format!("n_sigmas must be positive, got {n}")));
    }
    Ok(())
}

/// Where lattice constraints come from.
#[derive(Clone, Debug)]
pub enum ConstraintSource<'a> {
    /// Fixed-angle slices; points off every measured direction are skipped.
    Slices {
        data: &'a QuadratureData,
        estimator: Estimator,
        n_sigmas: f64,
    },
    /// Phase-randomized data pooled over directions; every lattice point.
    Radial {
        data: &'a QuadratureData,
        estimator: Estimator,
        n_sigmas: f64,
    },
    /// Exact values of `state` on the slices at `thetas`, with a fixed radius.
    ExactSlices {
        state: StateModel,
        thetas: Vec<f64>,
        delta: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMeta {
    /// Samples behind each estimate (total for radial data).
    #[serde(rename = "N")]
    pub sample_count: usize,
    pub h: Option<f64>,
    pub n_sigmas: Option<f64>,
    /// `1 - (#points) 2 Q(n)`, clamped at zero; 1 for exact constraints.
    pub confidence_union_bound: f64,
    pub skipped_points: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Tube constraints attached to lattice points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub lattice: Lattice,
    pub constraints: Vec<CFEstimate>,
    pub metadata: ConstraintMeta,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Scales every radius by `factor`.
    pub fn inflate(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.constraints {
            c.radius *= factor;
        }
        out
    }
}

/// Gaussian upper tail `Q(n)`.
pub fn gaussian_tail(n: f64) -> f64 {
    0.5 * libm::erfc(n / std::f64::consts::SQRT_2)
}

fn union_bound(points: usize, n_sigmas: f64) -> f64 {
    (1.0 - points as f64 * 2.0 * gaussian_tail(n_sigmas)).max(0.0)
}

/// Signed position of `xi` along direction `theta`, if it lies on that line.
fn along(theta: f64, xi: [f64; 2], spacing: f64) -> Option<f64> {
    let dir = [theta.sin(), -theta.cos()];
    let cross = xi[0] * dir[1] - xi[1] * dir[0];
    (cross.abs() <= 1e-9 * spacing).then(|| xi[0] * dir[0] + xi[1] * dir[1])
}

/// Maps data onto lattice points.
pub fn lattice_constraints(source: &ConstraintSource<'_>, lattice: &Lattice) -> Result<ConstraintSet> {
    let spacing = lattice.spacing();
    let mut constraints = Vec::new();
    let mut skipped = 0usize;
    let mut warnings = Vec::new();
    let meta = match source {
        ConstraintSource::Slices {
            data,
            estimator,
            n_sigmas,
        } => {
            check_sigmas(*n_sigmas)?;
            let thetas = data.angles();
            let mut slices = Vec::new();
            for &t in &thetas {
                let slice = data.select(ThetaFilter::Near { theta: t, tol: 1e-12 })?;
                check_count(slice.values.len())?;
                let hist = match estimator {
                    Estimator::Histogram { h } => Some(Histogram::from_slice(&slice, *h)?),
                    Estimator::Empirical => None,
                };
                slices.push((t, slice, hist));
            }
            let mut min_count = usize::MAX;
            for (i, j) in lattice.indices() {
                let xi = lattice.coords(i, j);
                let hit = slices
                    .iter()
                    .find_map(|(t, s, h)| along(*t, xi, spacing).map(|w| (*t, s, h, w)));
                let Some((t, slice, hist, omega)) = hit else {
                    skipped += 1;
                    continue;
                };
                min_count = min_count.min(slice.values.len());
                let mut est = match hist {
                    Some(h) => cf_from_histogram(h, omega, *n_sigmas),
                    None => cf_empirical(slice, omega, *n_sigmas)?,
                };
                debug_assert!(along(t, est.point.pair()?, spacing).is_some());
                est.point = PhasePoint::single(xi[0], xi[1]);
                constraints.push(est);
            }
            ConstraintMeta {
                sample_count: min_count,
                h: estimator.bin_half_width(),
                n_sigmas: Some(*n_sigmas),
                confidence_union_bound: union_bound(constraints.len(), *n_sigmas),
                skipped_points: skipped,
                warnings: vec![],
            }
        }
        ConstraintSource::Radial {
            data,
            estimator,
            n_sigmas,
        } => {
            let pooled = PooledEstimator::new(data, *estimator, *n_sigmas)?;
            if let Some(w) = pooled.warning() {
                warnings.push(w.to_string());
            }
            let mut cache: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
            for (i, j) in lattice.indices() {
                let key = (i as i64).pow(2) + (j as i64).pow(2);
                let xi = lattice.coords(i, j);
                let (c, d) = *cache
                    .entry(key)
                    .or_insert_with(|| pooled.at((key as f64).sqrt() * spacing));
                constraints.push(CFEstimate {
                    point: PhasePoint::single(xi[0], xi[1]),
                    value: C64::new(c, 0.0),
                    radius: d,
                    provenance: pooled.provenance(),
                    confidence_sigmas: Some(*n_sigmas),
                });
            }
            ConstraintMeta {
                sample_count: pooled.sample_count(),
                h: estimator.bin_half_width(),
                n_sigmas: Some(*n_sigmas),
                confidence_union_bound: union_bound(constraints.len(), *n_sigmas),
                skipped_points: 0,
                warnings,
            }
        }
        ConstraintSource::ExactSlices {
            state,
            thetas,
            delta,
        } => {
            if !(delta.is_finite() && *delta >= 0.0) {
                return Err(Error::InvalidArgument(format!("bad tube radius {delta}")));
            }
            for (i, j) in lattice.indices() {
                let xi = lattice.coords(i, j);
                if thetas.iter().any(|&t| along(t, xi, spacing).is_some()) {
                    constraints.push(CFEstimate {
                        point: PhasePoint::single(xi[0], xi[1]),
                        value: state.chi(xi),
                        radius: *delta,
                        provenance: Provenance::Exact,
                        confidence_sigmas: None,
                    });
                } else {
                    skipped += 1;
                }
            }
            ConstraintMeta {
                sample_count: 0,
                h: None,
                n_sigmas: None,
                confidence_union_bound: 1.0,
                skipped_points: skipped,
                warnings: vec![],
            }
        }
    };
    Ok(ConstraintSet {
        lattice: lattice.clone(),
        constraints,
        metadata: meta,
    })
}
