//! Small numerical building blocks shared by the distance kernels: compensated
//! summation, cancellation-free power integrals and adaptive Simpson quadrature.

use crate::error::{LevyError, Result};

/// Exponents closer than this to a logarithmic singularity use the log antiderivative.
pub const LOG_BRANCH_EPS: f64 = 1e-8;

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `∫_lo^hi t^(-p) dt` for `0 <= lo <= hi`, evaluated without subtracting
/// nearly equal powers. Returns `+inf` when the integral diverges at 0.
pub fn power_integral(lo: f64, hi: f64, p: f64) -> f64 {
    debug_assert!(lo >= 0.0 && hi >= lo, "bad bounds {lo} {hi}");
    if hi <= lo {
        return 0.0;
    }
    let q = 1.0 - p;
    if lo == 0.0 {
        return if q > LOG_BRANCH_EPS {
            hi.powf(q) / q
        } else {
            f64::INFINITY
        };
    }
    // ln(lo / hi), accurate when the bounds are close.
    let log_ratio = (-(hi - lo) / hi).ln_1p();
    power_integral_from_logs(hi.ln(), log_ratio, q)
}

/// Same integral parametrised by `ln hi` and `ln(lo/hi)`, with `q = 1 - p`.
/// Used by the tabulated kernels, where the logarithms are shared across exponents.
#[inline]
pub fn power_integral_from_logs(ln_hi: f64, log_ratio: f64, q: f64) -> f64 {
    if q.abs() < LOG_BRANCH_EPS {
        // ∫ t^-1 = ln(hi/lo)
        -log_ratio
    } else {
        // (hi^q - lo^q)/q = hi^q (1 - (lo/hi)^q)/q
        -(q * ln_hi).exp() * (q * log_ratio).exp_m1() / q
    }
}

/// Adaptive Simpson quadrature with an absolute tolerance and an evaluation budget.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSimpson {
    pub abs_tol: f64,
    pub max_evals: usize,
    pub max_depth: u32,
}

impl Default for AdaptiveSimpson {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_evals: 1_000_000,
            max_depth: 60,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: u32,
}

impl AdaptiveSimpson {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        if b == a {
            return Ok(0.0);
        }
        let width = b - a;
        let fa = f(a);
        let fb = f(b);
        let m = 0.5 * (a + b);
        let fm = f(m);
        let mut evals = 3usize;
        let mut stack = vec![Segment {
            a,
            b,
            fa,
            fm,
            fb,
            whole: width / 6.0 * (fa + 4.0 * fm + fb),
            depth: 0,
        }];
        let mut total = CompensatedSum::new();
        while let Some(seg) = stack.pop() {
            let m = 0.5 * (seg.a + seg.b);
            let lm = 0.5 * (seg.a + m);
            let rm = 0.5 * (m + seg.b);
            let flm = f(lm);
            let frm = f(rm);
            evals += 2;
            let h = seg.b - seg.a;
            let left = h / 12.0 * (seg.fa + 4.0 * flm + seg.fm);
            let right = h / 12.0 * (seg.fm + 4.0 * frm + seg.fb);
            let delta = left + right - seg.whole;
            let tol = self.abs_tol * h / width;
            if !delta.is_finite() {
                return Err(LevyError::QuadratureTolerance {
                    tolerance: self.abs_tol,
                    budget: self.max_evals,
                });
            }
            if delta.abs() <= 15.0 * tol || seg.depth >= self.max_depth || h <= f64::EPSILON * m.abs() {
                total.add(left + right + delta / 15.0);
                continue;
            }
            if evals >= self.max_evals {
                return Err(LevyError::QuadratureTolerance {
                    tolerance: self.abs_tol,
                    budget: self.max_evals,
                });
            }
            stack.push(Segment {
                a: m,
                b: seg.b,
                fa: seg.fm,
                fm: frm,
                fb: seg.fb,
                whole: right,
                depth: seg.depth + 1,
            });
            stack.push(Segment {
                a: seg.a,
                b: m,
                fa: seg.fa,
                fm: flm,
                fb: seg.fm,
                whole: left,
                depth: seg.depth + 1,
            });
        }
        Ok(total.value())
    }
}

/// Type-7 (linear interpolation) sample quantile of already sorted data.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Inclusive arithmetic grid `lo, lo + step, ..., hi` with the count fixed up
/// front so the points do not drift.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(LevyError::InvalidParameter {
            name: "grid",
            reason: format!("need lo <= hi and step > 0, got {lo}:{hi}:{step}"),
        });
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(LevyError::EmptyGrid("log grid with zero points"));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(LevyError::InvalidParameter {
            name: "grid",
            reason: format!("log grid needs 0 < lo <= hi, got {lo}..{hi}"),
        });
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                (l0 + (l1 - l0) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}
