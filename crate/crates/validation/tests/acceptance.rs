//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use levytail::coupling::{
    assemble_bound, coupling_semimetric, path_bound, BoundConstants, BoundInputs, LevyTriplet,
};
use levytail::estimator::{
    cutoff_sweep, default_cutoff_grid, distance_curve, extract_increments, split_tails, SweepConfig,
};
use levytail::measures::{
    BoundedPowerMeasure, JumpMeasure, ParetoQuantile, PowerLawTail, Side, StableTailMeasure,
};
use levytail::numeric::linear_grid;
use levytail::simulate::{
    convergence_experiment, power_law_draws, replication_rng, sample_gaussian_jumps,
    sample_power_law_jumps, ConvergenceReport, SimulationConfig,
};
use levytail::wasserstein::{
    empirical_w2_truncated, quadrature_w2_truncated, OrderedSample, TruncationLevel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one criterion: detail lines and whether every check held.
struct Outcome {
    details: Vec<String>,
    ok: bool,
}

impl Outcome {
    fn new() -> Self {
        Self {
            details: Vec::new(),
            ok: true,
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.ok &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok  " } else { "MISS" }));
    }
}

const ALPHA0S: [f64; 3] = [1.4, 1.8, 3.0];

fn reports() -> &'static Vec<ConvergenceReport> {
    static REPORTS: OnceLock<Vec<ConvergenceReport>> = OnceLock::new();
    REPORTS.get_or_init(|| {
        ALPHA0S
            .iter()
            .map(|&a| convergence_experiment(&SimulationConfig::power_law(a)).expect("experiment"))
            .collect()
    })
}

fn criterion_1() -> Outcome {
    // reference (n, mean α̂, mean ŵ*) per α₀
    let table: [[(usize, f64, f64); 2]; 3] = [
        [(10_000, 1.40, 1.83e-2), (100_000, 1.40, 6.63e-3)],
        [(10_000, 1.81, 1.05e-2), (100_000, 1.80, 3.40e-3)],
        [(10_000, 3.00, 0.48e-2), (100_000, 3.00, 0.16e-2)],
    ];
    let mut out = Outcome::new();
    for (report, rows) in reports().iter().zip(table) {
        for (n, alpha_ref, w_ref) in rows {
            let cell = report.cell(n).expect("cell");
            let da = (cell.mean_alpha_hat - alpha_ref).abs();
            out.check(
                da <= 0.03,
                format!(
                    "α₀={} n={n}: mean α̂ {:.4} vs {alpha_ref} (|Δ|={da:.4}, tol 0.03)",
                    report.alpha0, cell.mean_alpha_hat
                ),
            );
            let rel = (cell.mean_w_star - w_ref) / w_ref;
            out.check(
                rel.abs() <= 0.15,
                format!(
                    "α₀={} n={n}: mean ŵ* {:.4e} vs {w_ref:.2e} (rel {rel:+.3}, tol 0.15)",
                    report.alpha0, cell.mean_w_star
                ),
            );
        }
    }
    out
}

fn criterion_2() -> Outcome {
    let q_table = [[0.37, 0.39, 0.32], [0.34, 0.35, 0.32], [0.35, 0.27, 0.33]];
    let r_table = [[0.31, 0.34, 0.37], [0.28, 0.34, 0.31], [0.37, 0.30, 0.31]];
    let mut out = Outcome::new();
    for (k, report) in reports().iter().enumerate() {
        let tol = if report.alpha0 < 2.5 { 0.08 } else { 0.15 };
        for (j, from_n) in [100usize, 1_000, 10_000].into_iter().enumerate() {
            let i = j + 2;
            let q = report.q(from_n).expect("Q");
            let r = report.r(from_n).expect("R");
            out.check(
                (q - q_table[k][j]).abs() <= tol,
                format!("α₀={} Q_{i},{}: {q:.3} vs reference {} (tol {tol})", report.alpha0, i + 1, q_table[k][j]),
            );
            out.check(
                (r - r_table[k][j]).abs() <= tol,
                format!("α₀={} R_{i},{}: {r:.3} vs reference {} (tol {tol})", report.alpha0, i + 1, r_table[k][j]),
            );
            out.check(
                (q - report.theoretical_rate).abs() <= tol,
                format!(
                    "α₀={} Q_{i},{}: {q:.3} vs 10^(-α₀/(α₀+2)) = {:.3} (tol {tol})",
                    report.alpha0,
                    i + 1,
                    report.theoretical_rate
                ),
            );
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sizes = [10usize, 1_000, 100_000];
    let levels = [0.25, 1.0, 4.0, f64::INFINITY];
    let mut out = Outcome::new();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for case in 0..50 {
        let n = sizes[case % 3];
        let s = levels[case % 4];
        let alpha = if s.is_infinite() {
            rng.random_range(2.2..4.0)
        } else {
            rng.random_range(0.7..4.0)
        };
        let rho = rng.random_range(0.2..2.0);
        let alpha_data = rng.random_range(0.7..4.0);
        let draws = power_law_draws(&mut rng, n, alpha_data, rho);
        let sample = OrderedSample::new(draws).expect("sample");
        let reference = ParetoQuantile::new(alpha, rho).expect("reference");
        let level = if s.is_infinite() {
            TruncationLevel::infinite()
        } else {
            TruncationLevel::new(s).expect("s")
        };
        let closed = empirical_w2_truncated(&sample, &reference, level);
        let oracle = quadrature_w2_truncated(&sample, &reference, level, 1_000_000).expect("oracle");
        let rel = ((closed - oracle) / oracle).abs();
        worst = worst.max(rel);
        if rel > 1e-6 {
            failures += 1;
            out.details.push(format!(
                "MISS case {case}: n={n} α={alpha:.3} ρ={rho:.3} s={s}: {closed:e} vs {oracle:e} (rel {rel:.2e})"
            ));
        }
    }
    out.check(
        failures == 0,
        format!("50 cases, {failures} above 1e-6 relative, worst {worst:.2e}"),
    );
    out
}

fn criterion_4() -> Outcome {
    let alpha_grid = linear_grid(0.5, 8.0, 0.01).expect("grid");
    let mut out = Outcome::new();
    for seed in 0..10u64 {
        // signed power-law jumps accumulated into a series
        let mut rng = replication_rng(40 + seed, 0);
        let magnitudes = power_law_draws(&mut rng, 10_000, 1.6, 0.5);
        let mut series = vec![0.0];
        let mut y = 0.0;
        for m in magnitudes {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            y += sign * m;
            series.push(y);
        }
        let scaled: Vec<f64> = series.iter().map(|v| 2.0 * v).collect();
        let run = |data: &[f64], rho: f64, s: f64| {
            let inc = extract_increments(data).expect("increments");
            let tails = split_tails(&inc.increments, rho).expect("split");
            let sample = tails.sample(Side::Positive).expect("sample");
            distance_curve(&sample, rho, &alpha_grid, TruncationLevel::new(s).expect("s")).expect("curve")
        };
        let base = run(&series, 0.5, 1.0);
        let big = run(&scaled, 1.0, 4.0);
        let worst = base
            .values
            .iter()
            .zip(&big.values)
            .map(|(a, b)| ((b - 4.0 * a) / (4.0 * a)).abs())
            .fold(0.0f64, f64::max);
        out.check(
            base.argmin_index == big.argmin_index && worst <= 1e-10,
            format!(
                "seed {seed}: α̂ {} vs {} (index {} vs {}), worst relative gap {worst:.1e}",
                base.alpha_hat, big.alpha_hat, base.argmin_index, big.argmin_index
            ),
        );
    }
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let data = sample_power_law_jumps(100_000, 1.6, 0.5, 11).expect("sample").raw;
    let cutoffs = linear_grid(0.2, 0.8, 0.05).expect("grid");
    let step = 0.05;
    let sweep = cutoff_sweep(&data, Side::Positive, &cutoffs, &SweepConfig::default()).expect("sweep");
    match sweep.global_best {
        Some(best) => {
            out.check(
                (best.rho - 0.5).abs() <= step + 1e-12,
                format!("power law: ρ* = {:.3} (target 0.5 ± {step})", best.rho),
            );
            out.check(
                (best.alpha - 1.6).abs() <= 0.05 + 1e-12,
                format!("power law: α* = {:.2} (target 1.6 ± 0.05)", best.alpha),
            );
            out.check(best.distance < 1e-2, format!("power law: d* = {:.3e} (< 1e-2)", best.distance));
        }
        None => out.check(false, "power law: no reliable cutoff".into()),
    }

    let gauss = sample_gaussian_jumps(10_000, 1.0, 12).expect("sample").raw;
    let grid = default_cutoff_grid(&gauss).expect("cutoffs");
    let config = SweepConfig {
        alpha_grid: linear_grid(2.0, 14.0, 0.05).expect("grid"),
        ..SweepConfig::default()
    };
    let sweep = cutoff_sweep(&gauss, Side::Positive, &grid, &config).expect("sweep");
    let reliable: Vec<_> = sweep.locus.iter().filter(|r| r.reliable).collect();
    let first = reliable.first().and_then(|r| r.alpha_hat).unwrap_or(f64::NAN);
    let last = reliable.last().and_then(|r| r.alpha_hat).unwrap_or(f64::NAN);
    out.check(
        last - first >= 2.0,
        format!("gaussian: α̂ moves from {first:.2} to {last:.2} across reliable cutoffs (need ≥ 2)"),
    );
    let values: Vec<f64> = reliable.iter().map(|r| r.min_value.unwrap_or(f64::INFINITY)).collect();
    let k = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    let strict_interior = k > 0 && k + 1 < values.len() && values[k] < values[k - 1] && values[k] < values[k + 1];
    out.check(
        !strict_interior,
        format!(
            "gaussian: smallest locus distance {:.3e} at ρ = {:.3} (row {} of {}, {} points){}",
            values.get(k).copied().unwrap_or(f64::NAN),
            reliable.get(k).map(|r| r.rho).unwrap_or(f64::NAN),
            k + 1,
            values.len(),
            reliable.get(k).map(|r| r.n_points).unwrap_or(0),
            if strict_interior { ", a strict interior minimum" } else { "" }
        ),
    );
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let nu: JumpMeasure = PowerLawTail::new(1.6, 0.5).expect("measure").into();
    let t = LevyTriplet::new(0.3, 0.7, nu).expect("triplet");
    let same = path_bound(&t, &t, 0.4, 0.4, 1.0, 1.0).expect("bound");
    out.check(
        same.q1 == 0.0 && same.q2 == 0.0 && same.bound == 0.0,
        format!("identical inputs: Q1={} Q2={} bound={}", same.q1, same.q2, same.bound),
    );

    let c = BoundConstants::exact();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    for _ in 0..100 {
        let base = BoundInputs {
            dx: rng.random_range(-2.0..2.0),
            da: rng.random_range(-2.0..2.0),
            diffusion_gap: rng.random_range(0.0..1.0),
            u1: rng.random_range(0.0..1.0),
            u2: rng.random_range(0.0..1.0),
            t_lambda: rng.random_range(0.0..1.0),
            unit_tail_mass: rng.random_range(0.0..3.0),
            lambda: rng.random_range(0.1..3.0),
            ell: rng.random_range(0.1..2.0),
        };
        let b0 = assemble_bound(&base, &c).bound;
        let h = rng.random_range(0.0..0.5);
        let grow = |x: f64| x.signum() * (x.abs() + h);
        let bumped = [
            BoundInputs { dx: grow(base.dx), ..base },
            BoundInputs { da: grow(base.da), ..base },
            BoundInputs { diffusion_gap: base.diffusion_gap + h, ..base },
            BoundInputs { t_lambda: base.t_lambda + h, ..base },
        ];
        violations += bumped.iter().filter(|b| assemble_bound(b, &c).bound < b0).count();
    }
    out.check(violations == 0, format!("monotonicity: {violations} violations in 100 × 4 perturbations"));

    let t1 = LevyTriplet::pure_jump(StableTailMeasure::symmetric(1.4).expect("measure"));
    let t2 = LevyTriplet::pure_jump(StableTailMeasure::symmetric(1.8).expect("measure"));
    let exact = path_bound(&t1, &t2, 0.0, 0.0, 1.0, 1.0).expect("bound");
    let rounded = BoundConstants {
        c0: 0.46,
        c1: 1.27,
        c2: 1.40,
        c3: 5.42,
        c4: 2.28,
        c5: 5.20,
        c6: 39.48,
    };
    let alt = assemble_bound(&exact.inputs, &rounded);
    let rel = (alt.bound - exact.bound) / exact.bound;
    out.check(
        rel.abs() < 0.01,
        format!(
            "stable 1.4 vs 1.8: bound {:.6} exact vs {:.6} rounded row (rel {rel:+.4}, tol 0.01)",
            exact.bound, alt.bound
        ),
    );
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let a: JumpMeasure = BoundedPowerMeasure::new(1.4, true).expect("measure").into();
    let b: JumpMeasure = BoundedPowerMeasure::new(1.8, true).expect("measure").into();
    let lambdas = [10.0, 100.0, 1000.0];
    let values: Vec<f64> = lambdas
        .iter()
        .map(|&l| coupling_semimetric(&a, &b, l, TruncationLevel::infinite()).expect("semimetric"))
        .collect();
    out.details.push(format!(
        "     λ^(1/2)·W₂ at λ = 10, 100, 1000: {:.4}, {:.4}, {:.4}",
        values[0], values[1], values[2]
    ));
    out.check(
        values.iter().all(|v| v.is_finite()),
        "bounded at every λ".into(),
    );
    out.check(
        values.windows(2).all(|w| w[1] < w[0]),
        "decreasing in λ".into(),
    );
    let slope = (values[2] / values[0]).log10() / 2.0;
    let matches: Vec<String> = [1.4, 1.8]
        .iter()
        .map(|&alpha| {
            let e: f64 = 3.0 * (0.5 - 1.0 / alpha);
            format!("3(1/2-1/{alpha}) = {e:.3} (rel {:+.2})", (slope - e) / e.abs())
        })
        .collect();
    let within = [1.4, 1.8].iter().any(|&alpha: &f64| {
        let e = 3.0 * (0.5 - 1.0 / alpha);
        ((slope - e) / e).abs() <= 0.10
    });
    out.check(within, format!("log-slope {slope:.3} vs {}", matches.join(", ")));
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 mean α̂ and ŵ* at n = 1e4, 1e5", criterion_1),
        ("2 rate quotients Q and R", criterion_2),
        ("3 closed form vs quadrature oracle", criterion_3),
        ("4 scaling property", criterion_4),
        ("5 discrimination of power-law and Gaussian tails", criterion_5),
        ("6 path-space bound properties", criterion_6),
        ("7 λ ≫ 1 behaviour of λ^(1/2)·W₂", criterion_7),
    ];
    let mut all = true;
    let mut lines = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let verdict = if outcome.ok { "PASS" } else { "FAIL" };
        let line = format!("{verdict} criterion {name} ({:.1?})", start.elapsed());
        println!("{line}");
        for d in &outcome.details {
            println!("    {d}");
        }
        all &= outcome.ok;
        lines.push(line);
    }
    println!();
    println!("summary:");
    for line in &lines {
        println!("  {line}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
