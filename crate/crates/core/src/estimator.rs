//! Tail-index estimation from a time series: increments, IQR scaling, tail
//! splitting, distance curves over the exponent, and cutoff sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LevyError, Result};
use crate::measures::{JumpMeasure, LevyMeasure, ParetoQuantile, Side};
use crate::numeric::{linear_grid, log_grid, quantile_type7};
use crate::wasserstein::{empirical_w2_truncated, OrderedSample, PowerLawTable, TruncationLevel, UnitGrid};

/// Rows below this many exceedances are flagged unreliable.
pub const DEFAULT_MIN_POINTS: usize = 30;

/// First differences of a series, possibly divided by a scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSeries {
    pub increments: Vec<f64>,
    /// Divisor applied to the raw increments (1 when unscaled).
    pub iqr: f64,
    pub normalized: bool,
    pub source_length: usize,
}

impl IncrementSeries {
    /// Treats `values` as increments of a series of length `values.len() + 1`.
    pub fn from_increments(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LevyError::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(LevyError::NonFinite { index });
        }
        Ok(Self {
            source_length: values.len() + 1,
            increments: values,
            iqr: 1.0,
            normalized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }
}

/// `y_i - y_{i-1}`; rows are taken as equally spaced.
pub fn extract_increments(series: &[f64]) -> Result<IncrementSeries> {
    if series.len() < 2 {
        return Err(LevyError::SeriesTooShort {
            len: series.len(),
            min: 2,
        });
    }
    if let Some(index) = series.iter().position(|v| !v.is_finite()) {
        return Err(LevyError::NonFinite { index });
    }
    Ok(IncrementSeries {
        increments: series.windows(2).map(|w| w[1] - w[0]).collect(),
        iqr: 1.0,
        normalized: false,
        source_length: series.len(),
    })
}

/// Type-7 interquartile range.
pub fn interquartile_range(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(LevyError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_type7(&sorted, 0.75) - quantile_type7(&sorted, 0.25))
}

/// Divides the increments by their interquartile range.
pub fn nondimensionalize(incr: &IncrementSeries) -> Result<IncrementSeries> {
    let iqr = interquartile_range(&incr.increments)?;
    if !(iqr > 0.0) {
        return Err(LevyError::DegenerateScale);
    }
    // a series already at unit scale is left untouched
    let divisor = if (iqr - 1.0).abs() <= 1e-12 { 1.0 } else { iqr };
    let mut out = scale_by(incr, divisor)?;
    out.normalized = true;
    Ok(out)
}

/// Divides the increments by an externally chosen scale, e.g. the IQR of
/// the raw series rather than of its increments.
pub fn scale_by(incr: &IncrementSeries, divisor: f64) -> Result<IncrementSeries> {
    if !(divisor > 0.0) || !divisor.is_finite() {
        return Err(LevyError::DegenerateScale);
    }
    Ok(IncrementSeries {
        increments: incr.increments.iter().map(|x| x / divisor).collect(),
        iqr: incr.iqr * divisor,
        normalized: false,
        source_length: incr.source_length,
    })
}

/// Exceedances of a cutoff, each side sorted ascending in absolute value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TailSplit {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

impl TailSplit {
    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Positive => &self.positive,
            Side::Negative => &self.negative,
        }
    }

    pub fn count(&self, side: Side) -> usize {
        self.side(side).len()
    }

    /// The side as an ordered sample; empty sides are an error.
    pub fn sample(&self, side: Side) -> Result<OrderedSample> {
        OrderedSample::new(self.side(side).to_vec())
    }
}

/// Positive side `{x : x > ρ}` and negative side `{|x| : x < -ρ}`.
pub fn split_tails(increments: &[f64], rho: f64) -> Result<TailSplit> {
    if !(rho > 0.0) {
        return Err(invalid("rho", format!("cutoff must be > 0, got {rho}")));
    }
    let mut split = TailSplit::default();
    for &x in increments {
        if x > rho {
            split.positive.push(x);
        } else if x < -rho {
            split.negative.push(-x);
        }
    }
    split.positive.sort_by(f64::total_cmp);
    split.negative.sort_by(f64::total_cmp);
    Ok(split)
}

/// Where the candidate power law is anchored when compared at cutoff `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchoring {
    /// Renormalized tail beyond the cutoff itself.
    #[default]
    AtCutoff,
    /// A fixed anchor independent of the cutoff.
    Fixed(f64),
}

impl Anchoring {
    fn anchor(self, rho: f64) -> f64 {
        match self {
            Anchoring::AtCutoff => rho,
            Anchoring::Fixed(a) => a,
        }
    }
}

/// `α ↦ w̃_n(α)` for one cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCurve {
    pub alpha_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub alpha_hat: f64,
    pub argmin_index: usize,
    pub min_value: f64,
    pub rho: f64,
    pub anchor: f64,
    pub s: f64,
    pub n_points: usize,
}

fn validate_alpha_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(LevyError::EmptyGrid("alpha grid"));
    }
    if grid.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(invalid("alpha_grid", "exponents must be finite and > 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("alpha_grid", "grid must be strictly ascending"));
    }
    Ok(())
}

/// Index of the smallest value; the first (smallest-α) wins ties.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = k;
        }
    }
    best
}

/// Distance curve against power laws anchored at the cutoff.
pub fn distance_curve(
    sample: &OrderedSample,
    rho: f64,
    alpha_grid: &[f64],
    s: TruncationLevel,
) -> Result<DistanceCurve> {
    distance_curve_with(sample, rho, alpha_grid, s, Anchoring::AtCutoff)
}

pub fn distance_curve_with(
    sample: &OrderedSample,
    rho: f64,
    alpha_grid: &[f64],
    s: TruncationLevel,
    anchoring: Anchoring,
) -> Result<DistanceCurve> {
    validate_alpha_grid(alpha_grid)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid("rho", format!("cutoff must be finite and > 0, got {rho}")));
    }
    if sample.min() < rho {
        return Err(LevyError::SampleBelowCutoff {
            value: sample.min(),
            rho,
        });
    }
    let anchor = anchoring.anchor(rho);
    let grid = UnitGrid::new(sample.len());
    let values: Vec<f64> = alpha_grid
        .par_iter()
        .map(|&alpha| {
            let reference = ParetoQuantile::new(alpha, anchor)?;
            Ok(PowerLawTable::new(reference, &grid).truncated_distance(sample, s))
        })
        .collect::<Result<_>>()?;
    let k = argmin(&values);
    Ok(DistanceCurve {
        alpha_grid: alpha_grid.to_vec(),
        alpha_hat: alpha_grid[k],
        argmin_index: k,
        min_value: values[k],
        values,
        rho,
        anchor,
        s: s.value(),
        n_points: sample.len(),
    })
}

/// Grid argmin of the curve, smallest `α` on ties.
pub fn min_distance_estimator(curve: &DistanceCurve) -> f64 {
    curve.alpha_grid[argmin(&curve.values)]
}

/// Golden-section search for the minimizer inside the grid cells adjacent
/// to the grid argmin.
pub fn refine_alpha_hat(sample: &OrderedSample, curve: &DistanceCurve, tol: f64) -> Result<f64> {
    let k = argmin(&curve.values);
    let grid = &curve.alpha_grid;
    if grid.len() < 2 {
        return Ok(grid[k]);
    }
    let mut a = grid[k.saturating_sub(1)];
    let mut b = grid[(k + 1).min(grid.len() - 1)];
    let s = TruncationLevel::new(curve.s)?;
    let f = |alpha: f64| -> Result<f64> {
        let reference = ParetoQuantile::new(alpha, curve.anchor)?;
        Ok(empirical_w2_truncated(sample, &reference, s))
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a) > tol.max(1e-12) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    // never report a point worse than the grid minimum
    if f(x)? <= curve.values[k] {
        Ok(x)
    } else {
        Ok(grid[k])
    }
}

/// One row of the locus of minima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusRow {
    pub rho: f64,
    pub alpha_hat: Option<f64>,
    pub min_value: Option<f64>,
    pub n_points: usize,
    pub reliable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalBest {
    pub rho: f64,
    pub alpha: f64,
    pub distance: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub side: Side,
    pub cutoff_grid: Vec<f64>,
    /// `None` where the cutoff leaves no exceedances.
    pub curves: Vec<Option<DistanceCurve>>,
    pub locus: Vec<LocusRow>,
    /// Best reliable row; `None` when no row is reliable.
    pub global_best: Option<GlobalBest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alpha_grid: Vec<f64>,
    pub s: TruncationLevel,
    pub min_points: usize,
    pub anchoring: Anchoring,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha_grid: default_alpha_grid(),
            s: TruncationLevel::default(),
            min_points: DEFAULT_MIN_POINTS,
            anchoring: Anchoring::AtCutoff,
        }
    }
}

/// `0.5, 0.51, …, 8`.
pub fn default_alpha_grid() -> Vec<f64> {
    linear_grid(0.5, 8.0, 0.01).expect("static grid")
}

/// 40 log-spaced cutoffs between the 50% and 99.5% quantiles of `|increments|`.
pub fn default_cutoff_grid(increments: &[f64]) -> Result<Vec<f64>> {
    if increments.is_empty() {
        return Err(LevyError::EmptySample);
    }
    let mut abs: Vec<f64> = increments.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let lo = quantile_type7(&abs, 0.5);
    let hi = quantile_type7(&abs, 0.995);
    if !(lo > 0.0) {
        return Err(LevyError::DegenerateScale);
    }
    log_grid(lo, hi, 40)
}

/// Distance curves over a cutoff grid and the locus of their minima.
pub fn cutoff_sweep(
    increments: &[f64],
    side: Side,
    cutoff_grid: &[f64],
    config: &SweepConfig,
) -> Result<SweepResult> {
    if cutoff_grid.is_empty() {
        return Err(LevyError::EmptyGrid("cutoff grid"));
    }
    if cutoff_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(invalid("cutoff_grid", "cutoffs must be finite and > 0"));
    }
    if cutoff_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("cutoff_grid", "grid must be strictly ascending"));
    }
    validate_alpha_grid(&config.alpha_grid)?;
    if let Some(index) = increments.iter().position(|v| !v.is_finite()) {
        return Err(LevyError::NonFinite { index });
    }
    let mut magnitudes: Vec<f64> = increments
        .iter()
        .filter_map(|&x| match side {
            Side::Positive if x > 0.0 => Some(x),
            Side::Negative if x < 0.0 => Some(-x),
            _ => None,
        })
        .collect();
    magnitudes.sort_by(f64::total_cmp);

    let mut curves = Vec::with_capacity(cutoff_grid.len());
    let mut locus = Vec::with_capacity(cutoff_grid.len());
    for &rho in cutoff_grid {
        let start = magnitudes.partition_point(|&x| x <= rho);
        let exceed = &magnitudes[start..];
        if exceed.is_empty() {
            curves.push(None);
            locus.push(LocusRow {
                rho,
                alpha_hat: None,
                min_value: None,
                n_points: 0,
                reliable: false,
            });
            continue;
        }
        let sample = OrderedSample::new(exceed.to_vec())?;
        let curve = distance_curve_with(&sample, rho, &config.alpha_grid, config.s, config.anchoring)?;
        locus.push(LocusRow {
            rho,
            alpha_hat: Some(curve.alpha_hat),
            min_value: Some(curve.min_value),
            n_points: curve.n_points,
            reliable: curve.n_points >= config.min_points,
        });
        curves.push(Some(curve));
    }
    let mut global_best: Option<GlobalBest> = None;
    for row in locus.iter().filter(|r| r.reliable) {
        let (Some(alpha), Some(distance)) = (row.alpha_hat, row.min_value) else {
            continue;
        };
        if global_best.is_none_or(|b| distance < b.distance) {
            global_best = Some(GlobalBest {
                rho: row.rho,
                alpha,
                distance,
                n_points: row.n_points,
            });
        }
    }
    Ok(SweepResult {
        side,
        cutoff_grid: cutoff_grid.to_vec(),
        curves,
        locus,
        global_best,
    })
}

/// Computable part `(λ* w̃_n)^{1/2}` of the triangle bound between the
/// fitted model and the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelBound {
    pub lambda_star: f64,
    pub w_tilde: f64,
    pub bound: f64,
    pub n_points: usize,
    /// Upper end `α/(α+2)` of the admissible convergence exponents, where known.
    pub rate_exponent: Option<f64>,
}

/// `sample` must be expressed in the coordinates of the reference's
/// normalized tail (absolute values for one-sided power laws).
pub fn model_distance_bound(
    sample: &OrderedSample,
    reference: &JumpMeasure,
    rho_star: f64,
    s: TruncationLevel,
) -> Result<ModelBound> {
    let lambda_star = reference.tail_mass(rho_star)?;
    if !(lambda_star > 0.0) {
        return Err(LevyError::ZeroTailMass { level: rho_star });
    }
    let tail = reference.normalized_tail(rho_star)?;
    let w_tilde = empirical_w2_truncated(sample, &tail, s);
    let alpha = match reference {
        JumpMeasure::PowerLaw(m) => Some(m.alpha),
        JumpMeasure::Stable(m) => Some(m.alpha),
        JumpMeasure::Bounded(m) => Some(m.alpha),
        JumpMeasure::Gaussian(_) => None,
    };
    Ok(ModelBound {
        lambda_star,
        w_tilde,
        bound: (lambda_star * w_tilde).sqrt(),
        n_points: sample.len(),
        rate_exponent: alpha.map(|a| a / (a + 2.0)),
    })
}
