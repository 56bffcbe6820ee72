//! Empirical Wasserstein-2 distances between an ordered sample and a
//! reference law.
//!
//! In one dimension the optimal coupling pairs quantiles, so
//!
//! ```text
//! w_n  = ∫₀¹ |F_n⁻¹(u) - F⁻¹(u)|² du
//! w̃_n = ∫₀¹ (|F_n⁻¹(u) - F⁻¹(u)|² ∧ s) du
//! ```
//!
//! and because `F_n⁻¹` is constant (`= X_{i:n}`) on `((i-1)/n, i/n]` both
//! integrals are quadratic polynomials in the order statistics whose
//! coefficients are partial integrals of `F⁻¹` and `(F⁻¹)²`. With a
//! truncation level the `i`-th cell splits into the part `[ℓ_i, r_i]` where
//! `|X_{i:n} - F⁻¹| ≤ √s` and the rest, which contributes the constant `s`.
//!
//! The truncated integral is only an upper bound for the truncated
//! Wasserstein distance (the quantile coupling is no longer optimal for a
//! capped cost); it is the quantity the estimator minimizes.

use std::sync::Arc;

use crate::error::{invalid, LevyError, Result};
use crate::measures::{ParetoQuantile, ReferenceQuantile};
use crate::numeric::{AdaptiveSimpson, CompensatedSum, LOG_BRANCH_EPS};

/// Sorted sample `X_{1:n} ≤ … ≤ X_{n:n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSample {
    values: Vec<f64>,
}

impl OrderedSample {
    /// Sorts the input; any permutation of the same values yields the same sample.
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Empirical quantile `X_{⌈nu⌉:n}`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.values.len();
        let k = (u * n as f64).ceil() as usize;
        self.values[k.clamp(1, n) - 1]
    }

    /// Every value multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Cap `s` on the squared deviation; `+∞` disables truncation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruncationLevel(f64);

impl TruncationLevel {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_nan() || s <= 0.0 {
            return Err(invalid("s", format!("truncation level must be > 0, got {s}")));
        }
        Ok(Self(s))
    }

    pub const fn infinite() -> Self {
        Self(f64::INFINITY)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl Default for TruncationLevel {
    fn default() -> Self {
        Self(1.0)
    }
}

/// Untruncated `w_n = Σ a_i X² + b_i X + c` with `a_i = 1/n`,
/// `b_i = -2∫_{(i-1)/n}^{i/n} F⁻¹` and `c = ∫₀¹ (F⁻¹)²`.
pub fn empirical_w2_squared<R: ReferenceQuantile + ?Sized>(
    sample: &OrderedSample,
    reference: &R,
) -> Result<f64> {
    if !reference.second_moment_finite() {
        return Err(LevyError::InfiniteSecondMoment);
    }
    let c = reference.partial_q2(0.0, 1.0);
    if !c.is_finite() {
        return Err(LevyError::InfiniteSecondMoment);
    }
    let n = sample.len();
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    for (i, &x) in sample.values().iter().enumerate() {
        let b = -2.0 * reference.partial_q1(i as f64 / nf, (i + 1) as f64 / nf);
        acc.add(x * x / nf);
        acc.add(b * x);
    }
    acc.add(c);
    Ok(acc.value().max(0.0))
}

/// Truncated `w̃_n = Σ A_i X² + B_i X + C_i + D` over the repartition
/// `ℓ_i = ((i-1)/n ∨ F(X_i - √s)) ∧ i/n`, `r_i = (i-1)/n ∨ (F(X_i + √s) ∧ i/n)`.
///
/// Exact for continuous references. Returns `+inf` only for `s = ∞` with a
/// reference lacking a second moment.
pub fn empirical_w2_truncated<R: ReferenceQuantile + ?Sized>(
    sample: &OrderedSample,
    reference: &R,
    s: TruncationLevel,
) -> f64 {
    let n = sample.len();
    let nf = n as f64;
    let s = s.value();
    let root = s.sqrt();
    let mut acc = CompensatedSum::new();
    let mut truncated_width = CompensatedSum::new();
    let mut prev_r = 0.0;
    for (i, &x) in sample.values().iter().enumerate() {
        let lo = i as f64 / nf;
        let hi = (i + 1) as f64 / nf;
        let (l, r) = if s.is_infinite() {
            (lo, hi)
        } else {
            let l = lo.max(reference.cdf(x - root)).min(hi);
            let r = lo.max(reference.cdf(x + root).min(hi));
            (l, r)
        };
        debug_assert!(prev_r <= l + 1e-15 && l <= r, "repartition out of order");
        prev_r = r;
        let width = r - l;
        if width > 0.0 {
            let q1 = reference.partial_q1(l, r);
            let q2 = reference.partial_q2(l, r);
            acc.add(width * x * x);
            acc.add(-2.0 * q1 * x);
            acc.add(q2);
        }
        if s.is_finite() {
            truncated_width.add((hi - lo) - width);
        }
    }
    let value = acc.value();
    if !value.is_finite() {
        return f64::INFINITY;
    }
    if s.is_infinite() {
        return value.max(0.0);
    }
    (value + s * truncated_width.value()).clamp(0.0, s)
}

/// Brute-force midpoint rule for the truncated integral; the independent
/// check on [`empirical_w2_truncated`].
///
/// Every cell `((i-1)/n, i/n]` is a panel boundary, and so is every point where
/// `F⁻¹` crosses `X_i ± √s` (located by bisection on the quantile alone).
/// Pieces get `⌈width · panels⌉` panels (at least 16). Pieces close to an
/// end of `(0, 1)`, where `F⁻¹` may blow up, are graded geometrically toward
/// that end, see [`graded_midpoint`].
pub fn quadrature_w2_truncated<R: ReferenceQuantile + ?Sized>(
    sample: &OrderedSample,
    reference: &R,
    s: TruncationLevel,
    panels: usize,
) -> Result<f64> {
    let n = sample.len();
    if panels < n {
        return Err(invalid("panels", format!("need at least n = {n} panels, got {panels}")));
    }
    const MIN_PANELS: usize = 16;
    let s_val = s.value();
    let root = s_val.sqrt();
    let nf = n as f64;
    let integrand = |x: f64, q: f64| {
        let d = x - q;
        (d * d).min(s_val)
    };
    let mut total = CompensatedSum::new();
    for (i, &x) in sample.values().iter().enumerate() {
        let lo = i as f64 / nf;
        let hi = if i + 1 == n { 1.0 } else { (i + 1) as f64 / nf };
        let mut cuts = vec![lo];
        if s_val.is_finite() {
            for level in [x - root, x + root] {
                if let Some(u) = crossing(reference, level, lo, hi) {
                    cuts.push(u);
                }
            }
        }
        cuts.push(hi);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let base = (((b - a) * panels as f64).ceil() as usize).max(MIN_PANELS);
            // distance variable v to the nearer end of (0, 1)
            if 1.0 - b <= a {
                let g = |t: f64| integrand(x, reference.upper_quantile(t));
                graded_midpoint(&mut total, g, 1.0 - b, b - a, base);
            } else {
                let g = |u: f64| integrand(x, reference.quantile(u));
                graded_midpoint(&mut total, g, a, b - a, base);
            }
        }
    }
    Ok(total.value())
}

/// Panels per dyadic shell of a graded piece.
const SHELL_PANELS: usize = 1024;

/// Midpoint sum of `g` over `v ∈ [e, e + w]`, where `v` is the distance to a
/// possibly singular end. Uniform with `base` panels when the piece is far from
/// the end; otherwise split into shells `[v, 2v]` of [`SHELL_PANELS`] panels each,
/// reaching down to `v = 1e-300` when the piece touches the end.
fn graded_midpoint(total: &mut CompensatedSum, g: impl Fn(f64) -> f64, e: f64, w: f64, base: usize) {
    let mut uniform = |lo: f64, hi: f64, m: usize| {
        let h = (hi - lo) / m as f64;
        for k in 0..m {
            total.add(h * g(lo + (k as f64 + 0.5) * h));
        }
    };
    if e > 0.0 && w <= e / 64.0 {
        uniform(e, e + w, base);
        return;
    }
    if e == 0.0 {
        let mut hi = w;
        while hi > 1e-300 {
            uniform(0.5 * hi, hi, SHELL_PANELS);
            hi *= 0.5;
        }
        return;
    }
    let end = e + w;
    let mut lo = e;
    while lo < end {
        let hi = (2.0 * lo).min(end);
        let share = ((hi - lo) / w * base as f64).ceil() as usize;
        uniform(lo, hi, share.max(SHELL_PANELS));
        lo = hi;
    }
}

/// Interior point of `(lo, hi)` where the non-decreasing quantile crosses `level`.
fn crossing<R: ReferenceQuantile + ?Sized>(reference: &R, level: f64, lo: f64, hi: f64) -> Option<f64> {
    let mid_q = |u: f64| reference.quantile(u);
    let (mut a, mut b) = (lo, hi);
    // needs Q(a) < level < Q(b) strictly inside the cell
    let qa = mid_q(a + (b - a) * 1e-12);
    let qb = mid_q(b - (b - a) * 1e-12);
    if !(qa < level && level < qb) {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if mid_q(m) < level {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// `∫₀¹ (|F₁⁻¹(u) - F₂⁻¹(u)|² ∧ s) du` by adaptive Simpson (absolute
/// tolerance 1e-10, 10⁶ evaluations). An upper bound on the truncated
/// Wasserstein distance between the two laws; exact for `s = ∞`.
pub fn measure_distance_truncated<R1, R2>(ref1: &R1, ref2: &R2, s: TruncationLevel) -> Result<f64>
where
    R1: ReferenceQuantile + ?Sized,
    R2: ReferenceQuantile + ?Sized,
{
    measure_distance_with(ref1, ref2, s, &AdaptiveSimpson::default())
}

pub fn measure_distance_with<R1, R2>(
    ref1: &R1,
    ref2: &R2,
    s: TruncationLevel,
    quadrature: &AdaptiveSimpson,
) -> Result<f64>
where
    R1: ReferenceQuantile + ?Sized,
    R2: ReferenceQuantile + ?Sized,
{
    const EDGE: f64 = 1e-300;
    let s = s.value();
    let cost = |a: f64, b: f64| {
        if a == b {
            return 0.0;
        }
        let d = a - b;
        (d * d).min(s)
    };
    // halves: u ∈ [0, 1/2] directly, u ∈ [1/2, 1] through t = 1 - u
    let half = AdaptiveSimpson {
        abs_tol: 0.5 * quadrature.abs_tol,
        max_evals: quadrature.max_evals / 2,
        ..*quadrature
    };
    let left = half.integrate(
        |u| {
            let u = u.max(EDGE);
            cost(ref1.quantile(u), ref2.quantile(u))
        },
        0.0,
        0.5,
    )?;
    let right = half.integrate(
        |t| {
            let t = t.max(EDGE);
            cost(ref1.upper_quantile(t), ref2.upper_quantile(t))
        },
        0.0,
        0.5,
    )?;
    let value = left + right;
    if !value.is_finite() {
        return Err(LevyError::QuadratureTolerance {
            tolerance: quadrature.abs_tol,
            budget: quadrature.max_evals,
        });
    }
    Ok(value.max(0.0))
}

// ---------------------------------------------------------------------------
// Tabulated power-law kernel
// ---------------------------------------------------------------------------

/// Logarithms of the cell boundaries `t_k = 1 - k/n`, shared by every
/// exponent and anchor evaluated on samples of size `n`.
#[derive(Debug, Clone)]
pub struct UnitGrid {
    n: usize,
    /// `ln t_{i-1}` for cell `i = 1..n` (upper end in `t`)
    ln_upper: Vec<f64>,
    /// `ln(t_i / t_{i-1})`; `-inf` for the last cell
    log_ratio: Vec<f64>,
}

impl UnitGrid {
    pub fn new(n: usize) -> Arc<Self> {
        let nf = n as f64;
        let mut ln_upper = Vec::with_capacity(n);
        let mut log_ratio = Vec::with_capacity(n);
        for i in 0..n {
            let remaining = (n - i) as f64; // n t_{i}
            ln_upper.push((remaining / nf).ln());
            log_ratio.push((-1.0 / remaining).ln_1p());
        }
        Arc::new(Self {
            n,
            ln_upper,
            log_ratio,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Per-cell partial integrals of a Pareto(α, anchor) quantile on the grid
/// `k/n`. Building it costs `O(n)` transcendental evaluations; evaluating a
/// sample against it only touches the cells where truncation is active.
#[derive(Debug, Clone)]
pub struct PowerLawTable {
    reference: ParetoQuantile,
    n: usize,
    /// `F⁻¹(k/n)` for `k = 0..=n`
    knots: Vec<f64>,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

impl PowerLawTable {
    pub fn new(reference: ParetoQuantile, grid: &UnitGrid) -> Self {
        let n = grid.n;
        let rho = reference.anchor;
        let e1 = 1.0 - 1.0 / reference.alpha;
        let e2 = 1.0 - 2.0 / reference.alpha;
        let mut knots = Vec::with_capacity(n + 1);
        let mut q1 = Vec::with_capacity(n);
        let mut q2 = Vec::with_capacity(n);
        for i in 0..n {
            let ln_t = grid.ln_upper[i];
            let t = ((n - i) as f64) / n as f64;
            // t^(1-1/α), and t^(1-2/α) = (t^(1-1/α))² / t
            let p1 = (e1 * ln_t).exp();
            let p2 = p1 * p1 / t;
            knots.push(rho * p1 / t);
            if i + 1 == n {
                q1.push(rho * last_cell(p1, e1));
                q2.push(rho * rho * last_cell(p2, e2));
            } else {
                let lr = grid.log_ratio[i];
                q1.push(rho * cell(p1, lr, e1));
                q2.push(rho * rho * cell(p2, lr, e2));
            }
        }
        knots.push(f64::INFINITY);
        Self {
            reference,
            n,
            knots,
            q1,
            q2,
        }
    }

    pub fn reference(&self) -> ParetoQuantile {
        self.reference
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Same value as [`empirical_w2_truncated`] against the tabulated Pareto law.
    pub fn truncated_distance(&self, sample: &OrderedSample, s: TruncationLevel) -> f64 {
        assert_eq!(sample.len(), self.n, "sample size does not match the table");
        let n = self.n;
        let nf = n as f64;
        let cell_width = 1.0 / nf;
        let s = s.value();
        let root = s.sqrt();
        let reference = &self.reference;
        let mut acc = CompensatedSum::new();
        let mut truncated_width = CompensatedSum::new();
        for (i, &x) in sample.values().iter().enumerate() {
            let q_lo = self.knots[i];
            let q_hi = self.knots[i + 1];
            let below = x - root;
            let above = x + root;
            if below <= q_lo && above >= q_hi {
                // whole cell within √s
                acc.add(x * x * cell_width);
                acc.add(-2.0 * self.q1[i] * x);
                acc.add(self.q2[i]);
                continue;
            }
            if below >= q_hi || above <= q_lo {
                truncated_width.add(cell_width);
                continue;
            }
            // partial cell, in t = 1 - u: t decreases as u increases
            let t_upper = (n - i) as f64 / nf;
            let t_lower = (n - i - 1) as f64 / nf;
            let t_l = if below <= q_lo {
                t_upper
            } else {
                reference.survival(below).clamp(t_lower, t_upper)
            };
            let t_r = if above >= q_hi {
                t_lower
            } else {
                reference.survival(above).clamp(t_lower, t_upper)
            };
            let width = t_l - t_r;
            if width > 0.0 {
                acc.add(width * x * x);
                acc.add(-2.0 * reference.tail_q1(t_r, t_l) * x);
                acc.add(reference.tail_q2(t_r, t_l));
            }
            truncated_width.add(cell_width - width);
        }
        let value = acc.value();
        if !value.is_finite() {
            return f64::INFINITY;
        }
        if s.is_infinite() {
            return value.max(0.0);
        }
        (value + s * truncated_width.value()).clamp(0.0, s)
    }
}

#[inline]
fn cell(upper_pow: f64, log_ratio: f64, q: f64) -> f64 {
    if q.abs() < LOG_BRANCH_EPS {
        -log_ratio
    } else {
        // upper_pow = t_hi^q ; (t_hi^q - t_lo^q)/q
        -upper_pow * (q * log_ratio).exp_m1() / q
    }
}

#[inline]
fn last_cell(upper_pow: f64, q: f64) -> f64 {
    if q > LOG_BRANCH_EPS {
        upper_pow / q
    } else {
        f64::INFINITY
    }
}

/// Truncated distance of a sample to the Pareto law `(alpha, anchor)`.
pub fn power_law_truncated(
    sample: &OrderedSample,
    alpha: f64,
    anchor: f64,
    s: TruncationLevel,
) -> Result<f64> {
    let reference = ParetoQuantile::new(alpha, anchor)?;
    let grid = UnitGrid::new(sample.len());
    Ok(PowerLawTable::new(reference, &grid).truncated_distance(sample, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DiscreteQuantile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pareto_sample(n: usize, alpha: f64, rho: f64, seed: u64) -> OrderedSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..n)
            .map(|_| {
                let u: f64 = 1.0 - rng.random::<f64>();
                rho * u.powf(-1.0 / alpha)
            })
            .collect();
        OrderedSample::new(v).unwrap()
    }

    #[test]
    fn sorting_canonicalizes() {
        let a = OrderedSample::new(vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        let b = OrderedSample::new(vec![2.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values(), &[1.0, 2.0, 2.0, 3.0]);
        assert!(OrderedSample::new(vec![]).is_err());
        assert!(OrderedSample::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn self_reference_has_zero_distance() {
        let sample = pareto_sample(50, 1.5, 0.5, 3);
        let discrete = DiscreteQuantile::new(sample.values().to_vec()).unwrap();
        assert!(empirical_w2_squared(&sample, &discrete).unwrap().abs() < 1e-12);
        for s in [0.01, 1.0, 4.0] {
            let v = empirical_w2_truncated(&sample, &discrete, TruncationLevel::new(s).unwrap());
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn point_masses() {
        let sample = OrderedSample::new(vec![1.5]).unwrap();
        let y = DiscreteQuantile::point_mass(-0.5).unwrap();
        assert!((empirical_w2_squared(&sample, &y).unwrap() - 4.0).abs() < 1e-15);
        let q = quadrature_w2_truncated(&sample, &y, TruncationLevel::infinite(), 10).unwrap();
        assert!((q - 4.0).abs() < 1e-12);
        // truncated at 1: the whole cell is capped
        let t = empirical_w2_truncated(&sample, &y, TruncationLevel::new(1.0).unwrap());
        assert!((t - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncation_to_zero_collapses() {
        let sample = pareto_sample(200, 1.4, 0.5, 11);
        let r = ParetoQuantile::new(1.9, 0.5).unwrap();
        let tiny = TruncationLevel::new(1e-14).unwrap();
        assert!(empirical_w2_truncated(&sample, &r, tiny) <= 1e-14);
        assert!(quadrature_w2_truncated(&sample, &r, tiny, 1000).unwrap() <= 1e-14);
    }

    #[test]
    fn infinite_second_moment_is_a_pole() {
        let sample = pareto_sample(20, 1.4, 0.5, 1);
        let r = ParetoQuantile::new(1.8, 0.5).unwrap();
        assert_eq!(
            empirical_w2_squared(&sample, &r),
            Err(LevyError::InfiniteSecondMoment)
        );
        assert_eq!(
            empirical_w2_truncated(&sample, &r, TruncationLevel::infinite()),
            f64::INFINITY
        );
    }

    #[test]
    fn untruncated_matches_riemann_oracle() {
        // n = 100, α₀ = 3.6, reference re-anchored at the sample's cutoff 0.5
        let sample = pareto_sample(100, 3.6, 0.5, 2024);
        let r = ParetoQuantile::new(3.6, 0.5).unwrap();
        let closed = empirical_w2_squared(&sample, &r).unwrap();
        let oracle = quadrature_w2_truncated(&sample, &r, TruncationLevel::infinite(), 1_000_000).unwrap();
        assert!(((closed - oracle) / oracle).abs() < 1e-6, "{closed} {oracle}");
        let via_truncated = empirical_w2_truncated(&sample, &r, TruncationLevel::infinite());
        assert!(((closed - via_truncated) / closed).abs() < 1e-12);
    }

    #[test]
    fn truncated_matches_riemann_oracle() {
        let sample = pareto_sample(1000, 1.4, 0.5, 77);
        let r = ParetoQuantile::new(1.4, 0.5).unwrap();
        let s = TruncationLevel::new(1.0).unwrap();
        let closed = empirical_w2_truncated(&sample, &r, s);
        let oracle = quadrature_w2_truncated(&sample, &r, s, 1_000_000).unwrap();
        assert!(((closed - oracle) / oracle).abs() < 1e-6, "{closed} {oracle}");
    }

    #[test]
    fn table_kernel_matches_generic_kernel() {
        for (seed, &alpha) in [0.7, 1.0, 1.4, 2.0, 2.5, 4.0].iter().enumerate() {
            let sample = pareto_sample(500, 1.6, 0.5, seed as u64);
            let r = ParetoQuantile::new(alpha, 0.5).unwrap();
            let grid = UnitGrid::new(500);
            let table = PowerLawTable::new(r, &grid);
            for s in [0.25, 1.0, 4.0] {
                let s = TruncationLevel::new(s).unwrap();
                let a = empirical_w2_truncated(&sample, &r, s);
                let b = table.truncated_distance(&sample, s);
                assert!(((a - b) / a).abs() < 1e-11, "α={alpha}: {a} vs {b}");
            }
            if alpha > 2.0 {
                let a = empirical_w2_squared(&sample, &r).unwrap();
                let b = table.truncated_distance(&sample, TruncationLevel::infinite());
                assert!(((a - b) / a).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn value_bounded_by_s_and_monotone_in_s() {
        let sample = pareto_sample(300, 1.2, 0.5, 5);
        let r = ParetoQuantile::new(2.5, 0.5).unwrap();
        let mut last = 0.0;
        for s in [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
            let v = empirical_w2_truncated(&sample, &r, TruncationLevel::new(s).unwrap());
            assert!((0.0..=s).contains(&v));
            assert!(v >= last - 1e-15);
            last = v;
        }
    }

    #[test]
    fn measure_distance_examples() {
        let a = ParetoQuantile::new(1.4, 0.5).unwrap();
        assert_eq!(measure_distance_truncated(&a, &a, TruncationLevel::default()).unwrap(), 0.0);
        let x = DiscreteQuantile::point_mass(2.0).unwrap();
        let y = DiscreteQuantile::point_mass(-1.0).unwrap();
        let d = measure_distance_truncated(&x, &y, TruncationLevel::infinite()).unwrap();
        assert!((d - 9.0).abs() < 1e-12);
    }

    #[test]
    fn measure_distance_matches_dense_riemann_sum() {
        let a = ParetoQuantile::new(1.4, 0.5).unwrap();
        let b = ParetoQuantile::new(1.8, 0.5).unwrap();
        let got = measure_distance_truncated(&a, &b, TruncationLevel::new(1.0).unwrap()).unwrap();
        let m = 10_000_000usize;
        let h = 1.0 / m as f64;
        let oracle: CompensatedSum = (0..m)
            .map(|k| {
                let u = (k as f64 + 0.5) * h;
                let d = a.quantile(u) - b.quantile(u);
                h * (d * d).min(1.0)
            })
            .collect();
        assert!((got - oracle.value()).abs() < 1e-7, "{got} {}", oracle.value());
    }
}
