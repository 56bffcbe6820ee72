//! Parametric Lévy tail measures and the normalized tail laws they induce.
//!
//! A Lévy measure `ν` restricted to `{|z| > ρ}` and divided by its mass
//! `λ_ρ = ν(|z| > ρ)` is a probability law, the jump law of the compound
//! Poisson part above `ρ`. Every distance in this crate compares such laws
//! through their quantile functions, so each measure hands out its
//! normalized tail as a [`ReferenceQuantile`].
//!
//! The power-law family is closed under re-anchoring: the tail of
//! `α ρ₀^α z^{-1-α} dz` beyond any `ρ ≥ ρ₀`, renormalized, is again a power
//! law with exponent `α`, now anchored at `ρ`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, LevyError, Result};
use crate::numeric::{power_integral, AdaptiveSimpson};

/// Which half-line a one-sided measure lives on. Negative-side analysis
/// reflects the data to absolute values and reuses the positive machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Positive => f.write_str("positive"),
            Side::Negative => f.write_str("negative"),
        }
    }
}

/// A probability law on the real line described through its quantile function.
///
/// Implementations must return exact partial integrals of the quantile and of
/// its square; those are the coefficients of the order-statistic formulas for
/// the empirical Wasserstein distance.
pub trait ReferenceQuantile: Send + Sync {
    /// Distribution function `F(x)`.
    fn cdf(&self, x: f64) -> f64;

    /// `1 - F(x)`. Override when it can be computed without cancellation.
    fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Quantile `F⁻¹(u)` for `u ∈ [0, 1]`; may be infinite at the endpoints.
    fn quantile(&self, u: f64) -> f64;

    /// `F⁻¹(1 - t)`, accurate for small `t`.
    fn upper_quantile(&self, t: f64) -> f64 {
        self.quantile(1.0 - t)
    }

    /// `∫_a^b F⁻¹(u) du`.
    fn partial_q1(&self, a: f64, b: f64) -> f64;

    /// `∫_a^b F⁻¹(u)² du`; `+inf` when it diverges.
    fn partial_q2(&self, a: f64, b: f64) -> f64;

    fn second_moment_finite(&self) -> bool;
}

/// Partial quantile integrals `(∫_a^b F⁻¹, ∫_a^b (F⁻¹)²)` with the bounds and
/// the second-moment condition checked.
pub fn partial_integrals<R: ReferenceQuantile + ?Sized>(
    reference: &R,
    a: f64,
    b: f64,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(invalid("bounds", format!("need 0 <= a <= b <= 1, got [{a}, {b}]")));
    }
    let q2 = reference.partial_q2(a, b);
    if !q2.is_finite() {
        return Err(LevyError::InfiniteSecondMoment);
    }
    Ok((reference.partial_q1(a, b), q2))
}

// ---------------------------------------------------------------------------
// Quantile laws
// ---------------------------------------------------------------------------

/// Pareto law with `F(x) = 1 - (ρ/x)^α` on `[ρ, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoQuantile {
    pub alpha: f64,
    pub anchor: f64,
}

impl ParetoQuantile {
    pub fn new(alpha: f64, anchor: f64) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("anchor", anchor)?;
        Ok(Self { alpha, anchor })
    }

    /// `∫ F⁻¹` over the `u`-interval whose complement is `[t_lo, t_hi]`
    /// (that is `u ∈ [1 - t_hi, 1 - t_lo]`).
    #[inline]
    pub fn tail_q1(&self, t_lo: f64, t_hi: f64) -> f64 {
        self.anchor * power_integral(t_lo, t_hi, 1.0 / self.alpha)
    }

    #[inline]
    pub fn tail_q2(&self, t_lo: f64, t_hi: f64) -> f64 {
        self.anchor * self.anchor * power_integral(t_lo, t_hi, 2.0 / self.alpha)
    }
}

impl ReferenceQuantile for ParetoQuantile {
    fn cdf(&self, x: f64) -> f64 {
        if x <= self.anchor {
            0.0
        } else {
            -(self.alpha * (self.anchor / x).ln()).exp_m1()
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= self.anchor {
            1.0
        } else {
            (self.anchor / x).powf(self.alpha)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.upper_quantile(1.0 - u)
    }

    fn upper_quantile(&self, t: f64) -> f64 {
        if t <= 0.0 {
            f64::INFINITY
        } else {
            self.anchor * t.powf(-1.0 / self.alpha)
        }
    }

    fn partial_q1(&self, a: f64, b: f64) -> f64 {
        self.tail_q1(1.0 - b, 1.0 - a)
    }

    fn partial_q2(&self, a: f64, b: f64) -> f64 {
        self.tail_q2(1.0 - b, 1.0 - a)
    }

    fn second_moment_finite(&self) -> bool {
        self.alpha > 2.0
    }
}

/// Normalized tail of a two-sided stable measure beyond `ρ`: mass
/// `w₋ = c₋/(c₋+c₊)` on `(-∞, -ρ]` and `w₊` on `[ρ, ∞)`, each a power law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableTailQuantile {
    pub alpha: f64,
    pub rho: f64,
    pub weight_minus: f64,
}

impl StableTailQuantile {
    fn weight_plus(&self) -> f64 {
        1.0 - self.weight_minus
    }

    fn split_integral(&self, a: f64, b: f64, power: f64, sign_neg: f64) -> f64 {
        let split = self.weight_minus;
        let scale = self.rho.powf(power);
        let mut total = 0.0;
        if a < split {
            // F⁻¹(u) = -ρ (u/w₋)^(-1/α)
            let hi = b.min(split);
            total += sign_neg
                * scale
                * split.powf(power / self.alpha)
                * power_integral(a, hi, power / self.alpha);
        }
        if b > split {
            // F⁻¹(u) = ρ ((1-u)/w₊)^(-1/α)
            let lo = a.max(split);
            total += scale
                * self.weight_plus().powf(power / self.alpha)
                * power_integral(1.0 - b, 1.0 - lo, power / self.alpha);
        }
        total
    }
}

impl ReferenceQuantile for StableTailQuantile {
    fn cdf(&self, x: f64) -> f64 {
        if x <= -self.rho {
            self.weight_minus * (self.rho / -x).powf(self.alpha)
        } else if x < self.rho {
            self.weight_minus
        } else {
            1.0 - self.weight_plus() * (self.rho / x).powf(self.alpha)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u < self.weight_minus {
            if u <= 0.0 {
                return f64::NEG_INFINITY;
            }
            -self.rho * (u / self.weight_minus).powf(-1.0 / self.alpha)
        } else {
            self.upper_quantile(1.0 - u)
        }
    }

    fn upper_quantile(&self, t: f64) -> f64 {
        let wp = self.weight_plus();
        if t > wp {
            let u = 1.0 - t;
            if u <= 0.0 {
                return f64::NEG_INFINITY;
            }
            return -self.rho * (u / self.weight_minus).powf(-1.0 / self.alpha);
        }
        if t <= 0.0 {
            return f64::INFINITY;
        }
        self.rho * (t / wp).powf(-1.0 / self.alpha)
    }

    fn partial_q1(&self, a: f64, b: f64) -> f64 {
        self.split_integral(a, b, 1.0, -1.0)
    }

    fn partial_q2(&self, a: f64, b: f64) -> f64 {
        self.split_integral(a, b, 2.0, 1.0)
    }

    fn second_moment_finite(&self) -> bool {
        self.alpha > 2.0
    }
}

/// Law of `|Z|` given `|Z| > ρ` for the measure `|z|^{-1-α} dz` on `0 < |z| < 1`.
///
/// `F⁻¹(u) = (1 + c (1-u))^{-1/α}` with `c = ρ^{-α} - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedPowerQuantile {
    pub alpha: f64,
    pub rho: f64,
}

impl BoundedPowerQuantile {
    fn spread(&self) -> f64 {
        self.rho.powf(-self.alpha) - 1.0
    }

    fn integral(&self, a: f64, b: f64, power: f64) -> f64 {
        let c = self.spread();
        if c <= 0.0 {
            return (b - a) * self.rho.powf(power);
        }
        // v = 1 + c(1-u), dv = -c du
        let v_lo = 1.0 + c * (1.0 - b);
        let v_hi = 1.0 + c * (1.0 - a);
        power_integral(v_lo, v_hi, power / self.alpha) / c
    }
}

impl ReferenceQuantile for BoundedPowerQuantile {
    fn cdf(&self, x: f64) -> f64 {
        if x <= self.rho {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            1.0 - (x.powf(-self.alpha) - 1.0) / self.spread()
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        (1.0 + self.spread() * (1.0 - u)).powf(-1.0 / self.alpha)
    }

    fn upper_quantile(&self, t: f64) -> f64 {
        (1.0 + self.spread() * t).powf(-1.0 / self.alpha)
    }

    fn partial_q1(&self, a: f64, b: f64) -> f64 {
        self.integral(a, b, 1.0)
    }

    fn partial_q2(&self, a: f64, b: f64) -> f64 {
        self.integral(a, b, 2.0)
    }

    fn second_moment_finite(&self) -> bool {
        true
    }
}

/// Signed Gaussian law conditioned on `|Z| > ρ`; halves of mass 1/2 each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTailQuantile {
    pub sigma: f64,
    pub rho: f64,
}

impl GaussianTailQuantile {
    /// One-sided standard-normal tail probability beyond `ρ/σ`.
    fn side_mass(&self) -> f64 {
        normal_sf(self.rho / self.sigma)
    }

    fn numeric(&self, a: f64, b: f64, power: i32) -> f64 {
        if b <= a {
            return 0.0;
        }
        // The quantile has only logarithmic growth at the endpoints; nudge inward.
        let lo = a.max(1e-300);
        let hi = if b >= 1.0 { 1.0 - 1e-16 } else { b };
        AdaptiveSimpson::default()
            .integrate(|u| self.quantile(u).powi(power), lo, hi)
            .unwrap_or(f64::NAN)
    }
}

impl ReferenceQuantile for GaussianTailQuantile {
    fn cdf(&self, x: f64) -> f64 {
        let p = self.side_mass();
        let z = x / self.sigma;
        if x <= -self.rho {
            normal_sf(-z) / (2.0 * p)
        } else if x < self.rho {
            0.5
        } else {
            1.0 - normal_sf(z) / (2.0 * p)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        let p = self.side_mass();
        if u < 0.5 {
            -self.sigma * normal_isf(2.0 * u * p)
        } else {
            self.sigma * normal_isf(2.0 * (1.0 - u) * p)
        }
    }

    fn partial_q1(&self, a: f64, b: f64) -> f64 {
        self.numeric(a, b, 1)
    }

    fn partial_q2(&self, a: f64, b: f64) -> f64 {
        self.numeric(a, b, 2)
    }

    fn second_moment_finite(&self) -> bool {
        true
    }
}

/// Empirical (step) quantile of a finite sorted set: `F⁻¹(u) = x_{⌈nu⌉}`.
/// A single value gives a point mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteQuantile {
    values: Vec<f64>,
}

impl DiscreteQuantile {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LevyError::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(LevyError::NonFinite { index });
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    fn integral(&self, a: f64, b: f64, power: i32) -> f64 {
        let n = self.values.len();
        let nf = n as f64;
        let mut total = 0.0;
        for (i, x) in self.values.iter().enumerate() {
            let lo = (i as f64 / nf).max(a);
            let hi = ((i + 1) as f64 / nf).min(b);
            if hi > lo {
                total += (hi - lo) * x.powi(power);
            }
        }
        total
    }
}

impl ReferenceQuantile for DiscreteQuantile {
    fn cdf(&self, x: f64) -> f64 {
        let count = self.values.partition_point(|v| *v <= x);
        count as f64 / self.values.len() as f64
    }

    fn quantile(&self, u: f64) -> f64 {
        let n = self.values.len();
        let k = (u * n as f64).ceil() as usize;
        self.values[k.clamp(1, n) - 1]
    }

    fn partial_q1(&self, a: f64, b: f64) -> f64 {
        self.integral(a, b, 1)
    }

    fn partial_q2(&self, a: f64, b: f64) -> f64 {
        self.integral(a, b, 2)
    }

    fn second_moment_finite(&self) -> bool {
        true
    }
}

/// Normalized tail law of any supported measure.
#[derive(Debug, Clone, PartialEq)]
pub enum TailQuantile {
    Pareto(ParetoQuantile),
    Stable(StableTailQuantile),
    Bounded(BoundedPowerQuantile),
    Gaussian(GaussianTailQuantile),
}

macro_rules! delegate {
    ($self:ident, $q:ident => $e:expr) => {
        match $self {
            TailQuantile::Pareto($q) => $e,
            TailQuantile::Stable($q) => $e,
            TailQuantile::Bounded($q) => $e,
            TailQuantile::Gaussian($q) => $e,
        }
    };
}

impl ReferenceQuantile for TailQuantile {
    fn cdf(&self, x: f64) -> f64 {
        delegate!(self, q => q.cdf(x))
    }
    fn survival(&self, x: f64) -> f64 {
        delegate!(self, q => q.survival(x))
    }
    fn quantile(&self, u: f64) -> f64 {
        delegate!(self, q => q.quantile(u))
    }
    fn upper_quantile(&self, t: f64) -> f64 {
        delegate!(self, q => q.upper_quantile(t))
    }
    fn partial_q1(&self, a: f64, b: f64) -> f64 {
        delegate!(self, q => q.partial_q1(a, b))
    }
    fn partial_q2(&self, a: f64, b: f64) -> f64 {
        delegate!(self, q => q.partial_q2(a, b))
    }
    fn second_moment_finite(&self) -> bool {
        delegate!(self, q => q.second_moment_finite())
    }
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

/// Common interface of the Lévy measures used here.
pub trait LevyMeasure {
    /// `ν(|z| > r)` (one-sided measures count only their side).
    fn tail_mass(&self, r: f64) -> Result<f64>;

    /// `ν(ℝ)`, possibly infinite.
    fn total_mass(&self) -> f64;

    /// `ρ(λ) = inf{r > 0 : ν(|z| > r) ≤ λ}`.
    fn cutoff_for_intensity(&self, lambda: f64) -> Result<f64>;

    /// Jump law of the compound Poisson part beyond `rho`.
    fn normalized_tail(&self, rho: f64) -> Result<TailQuantile>;

    /// `∫_{|u| ≤ ρ} u² ν(du)`.
    fn small_jump_variance(&self, rho: f64) -> Result<f64>;
}

fn check_level(r: f64) -> Result<()> {
    if r.is_nan() || r <= 0.0 {
        Err(invalid("r", format!("level must be > 0, got {r}")))
    } else {
        Ok(())
    }
}

fn check_intensity(lambda: f64, total: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("intensity must be finite and > 0, got {lambda}")));
    }
    if lambda > total {
        return Err(LevyError::IntensityExceedsMass { lambda, total });
    }
    Ok(())
}

/// One-sided power-law tail `intensity · α ρ₀^α z^{-1-α} dz` on `[ρ₀, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawTail {
    pub alpha: f64,
    pub rho0: f64,
    pub intensity: f64,
    pub side: Side,
}

impl PowerLawTail {
    pub fn new(alpha: f64, rho0: f64) -> Result<Self> {
        Self::with_intensity(alpha, rho0, 1.0, Side::Positive)
    }

    pub fn with_intensity(alpha: f64, rho0: f64, intensity: f64, side: Side) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("rho0", rho0)?;
        require_positive("intensity", intensity)?;
        Ok(Self {
            alpha,
            rho0,
            intensity,
            side,
        })
    }

    pub fn density(&self, z: f64) -> f64 {
        let x = match self.side {
            Side::Positive => z,
            Side::Negative => -z,
        };
        if x < self.rho0 {
            0.0
        } else {
            self.intensity * self.alpha * self.rho0.powf(self.alpha) * x.powf(-1.0 - self.alpha)
        }
    }
}

impl LevyMeasure for PowerLawTail {
    fn tail_mass(&self, r: f64) -> Result<f64> {
        check_level(r)?;
        if r <= self.rho0 {
            Ok(self.intensity)
        } else {
            Ok(self.intensity * (self.rho0 / r).powf(self.alpha))
        }
    }

    fn total_mass(&self) -> f64 {
        self.intensity
    }

    fn cutoff_for_intensity(&self, lambda: f64) -> Result<f64> {
        check_intensity(lambda, self.intensity)?;
        Ok(self.rho0 * (self.intensity / lambda).powf(1.0 / self.alpha))
    }

    /// Re-anchored power law on `[max(rho, ρ₀), ∞)`, in absolute values.
    fn normalized_tail(&self, rho: f64) -> Result<TailQuantile> {
        check_level(rho)?;
        Ok(TailQuantile::Pareto(ParetoQuantile::new(
            self.alpha,
            rho.max(self.rho0),
        )?))
    }

    fn small_jump_variance(&self, rho: f64) -> Result<f64> {
        check_level(rho)?;
        if rho <= self.rho0 {
            return Ok(0.0);
        }
        // intensity α ρ₀^α ∫_{ρ₀}^{ρ} u^{1-α} du
        let scale = self.intensity * self.alpha * self.rho0.powf(self.alpha);
        Ok(scale * power_integral(self.rho0, rho, self.alpha - 1.0))
    }
}

/// Stable Lévy measure `c₋|z|^{-1-α} 1{z<0} + c₊ z^{-1-α} 1{z>0}`, `α ∈ (0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableTailMeasure {
    pub alpha: f64,
    pub c_minus: f64,
    pub c_plus: f64,
}

impl StableTailMeasure {
    pub fn new(alpha: f64, c_minus: f64, c_plus: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(invalid("alpha", format!("stability index must lie in (0, 2), got {alpha}")));
        }
        if !(c_minus >= 0.0 && c_plus >= 0.0 && c_minus + c_plus > 0.0)
            || !(c_minus + c_plus).is_finite()
        {
            return Err(invalid("c", "tail weights must be >= 0 with positive sum"));
        }
        Ok(Self {
            alpha,
            c_minus,
            c_plus,
        })
    }

    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0, 1.0)
    }

    fn weight(&self) -> f64 {
        self.c_minus + self.c_plus
    }
}

impl LevyMeasure for StableTailMeasure {
    fn tail_mass(&self, r: f64) -> Result<f64> {
        check_level(r)?;
        Ok(self.weight() / (self.alpha * r.powf(self.alpha)))
    }

    fn total_mass(&self) -> f64 {
        f64::INFINITY
    }

    fn cutoff_for_intensity(&self, lambda: f64) -> Result<f64> {
        check_intensity(lambda, f64::INFINITY)?;
        Ok((self.weight() / (self.alpha * lambda)).powf(1.0 / self.alpha))
    }

    fn normalized_tail(&self, rho: f64) -> Result<TailQuantile> {
        check_level(rho)?;
        Ok(TailQuantile::Stable(StableTailQuantile {
            alpha: self.alpha,
            rho,
            weight_minus: self.c_minus / self.weight(),
        }))
    }

    fn small_jump_variance(&self, rho: f64) -> Result<f64> {
        check_level(rho)?;
        Ok(self.weight() * rho.powf(2.0 - self.alpha) / (2.0 - self.alpha))
    }
}

/// `|z|^{-1-α} dz` restricted to `0 < |z| < 1`, one- or two-sided.
/// Infinite total mass for every `α > 0`; all jumps bounded by 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedPowerMeasure {
    pub alpha: f64,
    pub two_sided: bool,
}

impl BoundedPowerMeasure {
    pub fn new(alpha: f64, two_sided: bool) -> Result<Self> {
        require_positive("alpha", alpha)?;
        Ok(Self { alpha, two_sided })
    }

    fn sides(&self) -> f64 {
        if self.two_sided {
            2.0
        } else {
            1.0
        }
    }
}

impl LevyMeasure for BoundedPowerMeasure {
    fn tail_mass(&self, r: f64) -> Result<f64> {
        check_level(r)?;
        if r >= 1.0 {
            return Ok(0.0);
        }
        Ok(self.sides() * (r.powf(-self.alpha) - 1.0) / self.alpha)
    }

    fn total_mass(&self) -> f64 {
        f64::INFINITY
    }

    fn cutoff_for_intensity(&self, lambda: f64) -> Result<f64> {
        check_intensity(lambda, f64::INFINITY)?;
        Ok((1.0 + self.alpha * lambda / self.sides()).powf(-1.0 / self.alpha))
    }

    /// Law of the absolute jump size beyond `rho`.
    fn normalized_tail(&self, rho: f64) -> Result<TailQuantile> {
        check_level(rho)?;
        if rho >= 1.0 {
            return Err(LevyError::ZeroTailMass { level: rho });
        }
        Ok(TailQuantile::Bounded(BoundedPowerQuantile {
            alpha: self.alpha,
            rho,
        }))
    }

    fn small_jump_variance(&self, rho: f64) -> Result<f64> {
        check_level(rho)?;
        let r = rho.min(1.0);
        Ok(self.sides() * power_integral(0.0, r, self.alpha - 1.0))
    }
}

/// Finite jump law `intensity · N(0, σ²)`; used to simulate light-tailed jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianJumpLaw {
    pub sigma: f64,
    pub intensity: f64,
}

impl GaussianJumpLaw {
    pub fn new(sigma: f64, intensity: f64) -> Result<Self> {
        require_positive("sigma", sigma)?;
        require_positive("intensity", intensity)?;
        Ok(Self { sigma, intensity })
    }

    pub fn standard() -> Self {
        Self {
            sigma: 1.0,
            intensity: 1.0,
        }
    }
}

impl LevyMeasure for GaussianJumpLaw {
    fn tail_mass(&self, r: f64) -> Result<f64> {
        check_level(r)?;
        Ok(self.intensity * 2.0 * normal_sf(r / self.sigma))
    }

    fn total_mass(&self) -> f64 {
        self.intensity
    }

    fn cutoff_for_intensity(&self, lambda: f64) -> Result<f64> {
        check_intensity(lambda, self.intensity)?;
        if lambda == self.intensity {
            // the infimum over r > 0
            return Ok(0.0);
        }
        Ok(self.sigma * normal_isf(0.5 * lambda / self.intensity))
    }

    fn normalized_tail(&self, rho: f64) -> Result<TailQuantile> {
        if rho.is_nan() || rho < 0.0 {
            return Err(invalid("rho", format!("level must be >= 0, got {rho}")));
        }
        if normal_sf(rho / self.sigma) <= 0.0 {
            return Err(LevyError::ZeroTailMass { level: rho });
        }
        Ok(TailQuantile::Gaussian(GaussianTailQuantile {
            sigma: self.sigma,
            rho,
        }))
    }

    fn small_jump_variance(&self, rho: f64) -> Result<f64> {
        if rho.is_nan() || rho < 0.0 {
            return Err(invalid("rho", format!("level must be >= 0, got {rho}")));
        }
        // E[Z² 1{|Z| ≤ r}] = (2Φ(r) - 1) - 2 r φ(r)
        let r = rho / self.sigma;
        let inner = libm::erf(r * FRAC_1_SQRT_2) - 2.0 * r * normal_pdf(r);
        Ok(self.intensity * self.sigma * self.sigma * inner.max(0.0))
    }
}

/// Any supported jump measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpMeasure {
    PowerLaw(PowerLawTail),
    Stable(StableTailMeasure),
    Bounded(BoundedPowerMeasure),
    Gaussian(GaussianJumpLaw),
}

macro_rules! delegate_measure {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            JumpMeasure::PowerLaw($m) => $e,
            JumpMeasure::Stable($m) => $e,
            JumpMeasure::Bounded($m) => $e,
            JumpMeasure::Gaussian($m) => $e,
        }
    };
}

impl LevyMeasure for JumpMeasure {
    fn tail_mass(&self, r: f64) -> Result<f64> {
        delegate_measure!(self, m => m.tail_mass(r))
    }
    fn total_mass(&self) -> f64 {
        delegate_measure!(self, m => m.total_mass())
    }
    fn cutoff_for_intensity(&self, lambda: f64) -> Result<f64> {
        delegate_measure!(self, m => m.cutoff_for_intensity(lambda))
    }
    fn normalized_tail(&self, rho: f64) -> Result<TailQuantile> {
        delegate_measure!(self, m => m.normalized_tail(rho))
    }
    fn small_jump_variance(&self, rho: f64) -> Result<f64> {
        delegate_measure!(self, m => m.small_jump_variance(rho))
    }
}

impl From<PowerLawTail> for JumpMeasure {
    fn from(m: PowerLawTail) -> Self {
        JumpMeasure::PowerLaw(m)
    }
}

impl From<StableTailMeasure> for JumpMeasure {
    fn from(m: StableTailMeasure) -> Self {
        JumpMeasure::Stable(m)
    }
}

impl From<BoundedPowerMeasure> for JumpMeasure {
    fn from(m: BoundedPowerMeasure) -> Self {
        JumpMeasure::Bounded(m)
    }
}

impl From<GaussianJumpLaw> for JumpMeasure {
    fn from(m: GaussianJumpLaw) -> Self {
        JumpMeasure::Gaussian(m)
    }
}

// ---------------------------------------------------------------------------
// standard normal helpers
// ---------------------------------------------------------------------------

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `P(Z > x)`.
fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Inverse survival function: `x` with `P(Z > x) = p`, `p ∈ (0, 1)`.
/// Acklam's rational approximation polished by two Newton steps.
fn normal_isf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    if p >= 1.0 {
        return f64::NEG_INFINITY;
    }
    // lower-tail quantile of q = 1 - p, computed from p directly
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    // x solves P(Z > x) = p; by symmetry x = -Φ⁻¹(p)
    let mut x = if p < 0.02425 {
        -tail(p)
    } else if p > 1.0 - 0.02425 {
        tail(1.0 - p)
    } else {
        let q = 0.5 - p;
        let r = q * q;
        q * (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5])
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let pdf = normal_pdf(x);
        if pdf <= 0.0 {
            break;
        }
        x += (normal_sf(x) - p) / pdf;
    }
    x
}
