//! Coupling semimetric between Lévy measures and the explicit path-space
//! bound for additive-noise SDEs.
//!
//! For an intensity `λ` each measure is split at its cutoff `ρ(λ)`, where
//! the mass beyond the cutoff equals `λ`. The large jumps then form compound
//! Poisson processes with the same rate, and
//!
//! ```text
//! T̃_λ(ν₁, ν₂) = λ^{1/2} · W̃_{2,s}(ν₁ beyond ρ₁(λ) / λ, ν₂ beyond ρ₂(λ) / λ)
//! ```
//!
//! compares their jump laws. The coupling distance is the supremum over `λ`,
//! approximated here by the maximum over a finite grid.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LevyError, Result};
use crate::measures::{JumpMeasure, LevyMeasure};
use crate::numeric::log_grid;
use crate::wasserstein::{measure_distance_truncated, TruncationLevel};

/// Characteristic triplet `(a, A, ν)` of a one-dimensional Lévy process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    pub drift: f64,
    pub diffusion: f64,
    pub jump: JumpMeasure,
}

impl LevyTriplet {
    pub fn new(drift: f64, diffusion: f64, jump: impl Into<JumpMeasure>) -> Result<Self> {
        if !drift.is_finite() {
            return Err(invalid("drift", format!("must be finite, got {drift}")));
        }
        if !(diffusion >= 0.0) || !diffusion.is_finite() {
            return Err(invalid("diffusion", format!("must be finite and >= 0, got {diffusion}")));
        }
        Ok(Self {
            drift,
            diffusion,
            jump: jump.into(),
        })
    }

    /// Pure-jump triplet `(0, 0, ν)`.
    pub fn pure_jump(jump: impl Into<JumpMeasure>) -> Self {
        Self {
            drift: 0.0,
            diffusion: 0.0,
            jump: jump.into(),
        }
    }
}

/// The seven constants of the path-space bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl BoundConstants {
    /// Closed-form values evaluated in double precision.
    pub fn exact() -> Self {
        let r = 3f64.powf(0.75);
        Self {
            c0: 0.5f64.atan(),
            c1: 4.0 / PI,
            c2: r / 2.0,
            c3: PI + r,
            c4: (PI + r) / 2.0,
            c5: 3f64.powf(1.5),
            c6: (2.0 * PI) * (2.0 * PI),
        }
    }
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self::exact()
    }
}

/// `T̃_λ(ν₁, ν₂)` for truncation level `s`.
pub fn coupling_semimetric(
    nu1: &JumpMeasure,
    nu2: &JumpMeasure,
    lambda: f64,
    s: TruncationLevel,
) -> Result<f64> {
    let rho1 = nu1.cutoff_for_intensity(lambda)?;
    let rho2 = nu2.cutoff_for_intensity(lambda)?;
    let tail1 = nu1.normalized_tail(rho1)?;
    let tail2 = nu2.normalized_tail(rho2)?;
    let w = measure_distance_truncated(&tail1, &tail2, s)?;
    let value = (lambda * w).sqrt();
    // the quadrature may overshoot the cap by its tolerance
    Ok(value.min((lambda * s.value()).sqrt()))
}

/// Default λ grid: 64 log-spaced points over `[1e-2, 1e3]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-2, 1e3, 64).expect("static grid")
}

/// Grid maximum of `T̃_λ`; a lower approximation of the supremum over `λ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingDistance {
    pub value: f64,
    pub argmax_lambda: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub grid_points: usize,
    /// Grid points dropped because they exceed a finite total mass.
    pub skipped: usize,
    pub profile: Vec<(f64, f64)>,
}

/// Maximum of [`coupling_semimetric`] over `lambda_grid`. Points above the
/// smaller total mass are skipped and counted.
pub fn coupling_distance(
    nu1: &JumpMeasure,
    nu2: &JumpMeasure,
    s: TruncationLevel,
    lambda_grid: &[f64],
) -> Result<CouplingDistance> {
    if lambda_grid.is_empty() {
        return Err(LevyError::EmptyGrid("lambda grid"));
    }
    let cap = nu1.total_mass().min(nu2.total_mass());
    let admissible: Vec<f64> = lambda_grid.iter().copied().filter(|&l| l <= cap).collect();
    if admissible.is_empty() {
        return Err(LevyError::IntensityExceedsMass {
            lambda: lambda_grid.iter().copied().fold(f64::INFINITY, f64::min),
            total: cap,
        });
    }
    let values: Vec<f64> = admissible
        .par_iter()
        .map(|&l| coupling_semimetric(nu1, nu2, l, s))
        .collect::<Result<_>>()?;
    let (mut best, mut arg) = (f64::NEG_INFINITY, admissible[0]);
    for (&l, &v) in admissible.iter().zip(&values) {
        if v > best {
            best = v;
            arg = l;
        }
    }
    Ok(CouplingDistance {
        value: best,
        argmax_lambda: arg,
        lambda_min: admissible[0],
        lambda_max: admissible[admissible.len() - 1],
        grid_points: admissible.len(),
        skipped: lambda_grid.len() - admissible.len(),
        profile: admissible.into_iter().zip(values).collect(),
    })
}

/// Ingredients of the bound once `T_λ` and the small-jump variances are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub dx: f64,
    pub da: f64,
    /// `(√A₁ - √A₂)²`
    pub diffusion_gap: f64,
    pub u1: f64,
    pub u2: f64,
    pub t_lambda: f64,
    /// `ν₁(|u| > 1) + ν₂(|u| > 1)`
    pub unit_tail_mass: f64,
    pub lambda: f64,
    pub ell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathBound {
    pub q1: f64,
    pub q2: f64,
    pub bound: f64,
    pub inputs: BoundInputs,
}

/// Assembles `Q¹`, `Q²` and `Q¹ e^{ℓ/C₀} + Q²` from precomputed inputs.
pub fn assemble_bound(inputs: &BoundInputs, c: &BoundConstants) -> PathBound {
    let BoundInputs {
        dx,
        da,
        diffusion_gap,
        u1,
        u2,
        t_lambda: t,
        unit_tail_mass,
        lambda,
        ell,
    } = *inputs;
    let q1 = 2.0 * (dx * dx).min(1.0)
        + c.c1
            * (c.c2 * da.abs()
                + diffusion_gap
                + u1
                + u2
                + c.c3 * t * t
                + c.c4 * unit_tail_mass.min(lambda).sqrt() * t);
    let q2 = c.c1 * (c.c5 * diffusion_gap + c.c6 * (u1 + u2 + t * t)).sqrt();
    PathBound {
        q1,
        q2,
        bound: q1 * (ell / c.c0).exp() + q2,
        inputs: *inputs,
    }
}

/// Path-space bound on `W²_{2,d̃}(Law(X₁), Law(X₂))` for the SDEs driven by
/// the two triplets from `x1` and `x2`, at intensity `lambda` and `s = 1`.
pub fn path_bound(
    triplet1: &LevyTriplet,
    triplet2: &LevyTriplet,
    x1: f64,
    x2: f64,
    ell: f64,
    lambda: f64,
) -> Result<PathBound> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(invalid("ell", format!("Lipschitz constant must be finite and > 0, got {ell}")));
    }
    let t = coupling_semimetric(&triplet1.jump, &triplet2.jump, lambda, TruncationLevel::default())?;
    let rho1 = triplet1.jump.cutoff_for_intensity(lambda)?;
    let rho2 = triplet2.jump.cutoff_for_intensity(lambda)?;
    let gap = triplet1.diffusion.sqrt() - triplet2.diffusion.sqrt();
    let inputs = BoundInputs {
        dx: x1 - x2,
        da: triplet1.drift - triplet2.drift,
        diffusion_gap: gap * gap,
        u1: triplet1.jump.small_jump_variance(rho1)?,
        u2: triplet2.jump.small_jump_variance(rho2)?,
        t_lambda: t,
        unit_tail_mass: triplet1.jump.tail_mass(1.0)? + triplet2.jump.tail_mass(1.0)?,
        lambda,
        ell,
    };
    Ok(assemble_bound(&inputs, &BoundConstants::exact()))
}
