use std::path::{Path, PathBuf};

use levytail::coupling::{coupling_distance, default_lambda_grid, path_bound, LevyTriplet};
use levytail::estimator::{
    cutoff_sweep, default_cutoff_grid, distance_curve, extract_increments, interquartile_range,
    model_distance_bound, nondimensionalize, refine_alpha_hat, scale_by, split_tails,
    IncrementSeries, SweepConfig,
};
use levytail::measures::{
    BoundedPowerMeasure, GaussianJumpLaw, JumpMeasure, PowerLawTail, Side, StableTailMeasure,
};
use levytail::simulate::{
    convergence_experiment, render_cpp_path, sample_gaussian_jumps, sample_power_law_jumps,
    ConvergenceReport, JumpDistribution, SimulationConfig,
};
use levytail::wasserstein::TruncationLevel;
use serde::Serialize;

use crate::args::{
    BoundArgs, Command, ConvergenceArgs, CurveArgs, DataArgs, Dist, IqrOf, JumpArg, ReplayArgs,
    SideArg, SimulateArgs, SweepArgs,
};
use crate::error::{CliError, CliResult};
use crate::input::read_column;
use crate::output::{
    fmt_f64, fmt_opt, manifest_name, sha256_file, OutputDigest, OutputSet, RunManifest,
};

/// Files written by one run, manifest last.
#[derive(Debug)]
pub struct RunOutcome {
    pub written: Vec<PathBuf>,
    pub digests: Vec<OutputDigest>,
}

pub fn execute(command: Command) -> CliResult<RunOutcome> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Curve(args) => curve(args),
        Command::Sweep(args) => sweep(args),
        Command::Analyze(args) => analyze(args),
        Command::Convergence(args) => convergence(args),
        Command::Bound(args) => bound(args),
        Command::Replay(args) => replay(args),
    }
}

struct Provenance {
    seed: Option<u64>,
    input: Option<(PathBuf, String)>,
}

fn finish(set: OutputSet, command: &Command, provenance: Provenance) -> CliResult<RunOutcome> {
    let config = serde_json::to_value(command).map_err(|e| CliError::Usage(e.to_string()))?;
    let digests = set.digests();
    let (input, input_sha256) = match provenance.input {
        Some((p, d)) => (Some(p), Some(d)),
        None => (None, None),
    };
    let manifest = RunManifest {
        command: command.name().to_string(),
        config,
        seed: provenance.seed,
        input,
        input_sha256,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        outputs: digests.clone(),
    };
    let written = set.commit(&manifest)?;
    Ok(RunOutcome { written, digests })
}

fn sides(arg: SideArg) -> Vec<Side> {
    match arg {
        SideArg::Pos => vec![Side::Positive],
        SideArg::Neg => vec![Side::Negative],
        SideArg::Both => vec![Side::Positive, Side::Negative],
    }
}

fn side_tag(side: Side) -> &'static str {
    match side {
        Side::Positive => "pos",
        Side::Negative => "neg",
    }
}

fn truncation(s: f64) -> CliResult<TruncationLevel> {
    if s.is_infinite() {
        Ok(TruncationLevel::infinite())
    } else {
        Ok(TruncationLevel::new(s)?)
    }
}

fn simulate(mut args: SimulateArgs) -> CliResult<RunOutcome> {
    let n = usize::try_from(args.n).map_err(|_| CliError::Usage("--n is too large".into()))?;
    let jumps = match args.dist {
        Dist::Powerlaw => {
            if args.sigma.is_some() {
                return Err(CliError::Usage(
                    "--sigma applies only to --dist gaussian".into(),
                ));
            }
            let alpha0 = args
                .alpha0
                .ok_or_else(|| CliError::Usage("--dist powerlaw requires --alpha0".into()))?;
            sample_power_law_jumps(n, alpha0, args.rho0, args.seed)?
        }
        Dist::Gaussian => {
            if args.alpha0.is_some() {
                return Err(CliError::Usage(
                    "--alpha0 applies only to --dist powerlaw".into(),
                ));
            }
            let sigma = *args.sigma.get_or_insert(1.0);
            sample_gaussian_jumps(n, sigma, args.seed)?
        }
    };
    let mut set = OutputSet::new(&args.out_dir)?;
    let mut body = String::with_capacity(24 * n);
    for &x in &jumps.raw {
        body.push_str(&fmt_f64(x));
        body.push('\n');
    }
    set.add_bytes("increments.csv", body.as_bytes())?;
    if let Some(intensity) = args.intensity {
        let path = render_cpp_path(&jumps.raw, intensity, args.seed)?;
        let rows = path
            .arrival_times
            .iter()
            .zip(&path.values)
            .map(|(&t, &y)| vec![fmt_f64(t), fmt_f64(y)]);
        set.add_csv("path.csv", &["time", "value"], rows)?;
    }
    let seed = Some(args.seed);
    finish(
        set,
        &Command::Simulate(args),
        Provenance { seed, input: None },
    )
}

/// Increments ready for tail analysis.
struct Prepared {
    increments: Vec<f64>,
    /// Interquartile range of the chosen source, whether or not it was applied.
    iqr: f64,
    normalized: bool,
    input: (PathBuf, String),
}

fn prepare(data: &mut DataArgs) -> CliResult<Prepared> {
    let path = std::fs::canonicalize(&data.input).map_err(|e| CliError::io(&data.input, e))?;
    data.input = path.clone();
    let digest = sha256_file(&path)?;
    let column = read_column(&path, data.column.as_deref())?;
    if column.missing > 0 {
        eprintln!(
            "warning: dropped {} row(s) with missing values from {}",
            column.missing,
            path.display()
        );
    }
    let series = if data.increments_given {
        IncrementSeries::from_increments(column.values.clone())?
    } else {
        extract_increments(&column.values)?
    };
    let (prepared, iqr) = match data.iqr_of {
        IqrOf::Increments => {
            let iqr = interquartile_range(&series.increments)?;
            let out = if data.no_normalize {
                series
            } else {
                nondimensionalize(&series)?
            };
            (out, iqr)
        }
        IqrOf::Series => {
            let iqr = interquartile_range(&column.values)?;
            let out = if data.no_normalize {
                series
            } else {
                scale_by(&series, iqr)?
            };
            (out, iqr)
        }
    };
    Ok(Prepared {
        increments: prepared.increments,
        iqr,
        normalized: !data.no_normalize,
        input: (path, digest),
    })
}

#[derive(Serialize)]
struct CurveSummary {
    side: Side,
    alpha_hat: f64,
    alpha_refined: Option<f64>,
    min_value: f64,
    n_points: usize,
    n_increments: usize,
    rho: f64,
    s: f64,
    iqr: f64,
    normalized: bool,
}

fn curve(mut args: CurveArgs) -> CliResult<RunOutcome> {
    let prepared = prepare(&mut args.data)?;
    let grid = args.data.alpha_grid.points()?;
    let s = truncation(args.data.s)?;
    let split = split_tails(&prepared.increments, args.rho)?;
    let mut set = OutputSet::new(&args.data.out_dir)?;
    for side in sides(*args.data.side.get_or_insert(SideArg::Pos)) {
        if split.count(side) == 0 {
            return Err(CliError::Analysis(format!(
                "no {side} increments exceed the cutoff {}",
                args.rho
            )));
        }
        let sample = split.sample(side)?;
        let c = distance_curve(&sample, args.rho, &grid, s)?;
        let refined = if args.refine {
            Some(refine_alpha_hat(&sample, &c, 1e-8)?)
        } else {
            None
        };
        let tag = side_tag(side);
        let rows = c
            .alpha_grid
            .iter()
            .zip(&c.values)
            .map(|(&a, &w)| vec![fmt_f64(a), fmt_f64(w)]);
        set.add_csv(&format!("curve_{tag}.csv"), &["alpha", "w_tilde"], rows)?;
        set.add_json(
            &format!("curve_{tag}.json"),
            &CurveSummary {
                side,
                alpha_hat: c.alpha_hat,
                alpha_refined: refined,
                min_value: c.min_value,
                n_points: c.n_points,
                n_increments: prepared.increments.len(),
                rho: c.rho,
                s: c.s,
                iqr: prepared.iqr,
                normalized: prepared.normalized,
            },
        )?;
    }
    let input = Some(prepared.input);
    finish(set, &Command::Curve(args), Provenance { seed: None, input })
}

#[derive(Serialize)]
struct ModelBoundJson {
    intensity: f64,
    lambda_star: f64,
    w_tilde: f64,
    bound: f64,
    rate_exponent: Option<f64>,
}

#[derive(Serialize)]
struct BestJson {
    side: Side,
    rho: Option<f64>,
    alpha: Option<f64>,
    distance: Option<f64>,
    n_points: Option<usize>,
    model_bound: Option<ModelBoundJson>,
    flagged_rows: usize,
    min_points: usize,
    n_increments: usize,
    s: f64,
    iqr: f64,
    normalized: bool,
}

struct SweepRun {
    set: OutputSet,
    prepared: Prepared,
    bests: Vec<BestJson>,
}

fn run_sweep(args: &mut SweepArgs, default_side: SideArg) -> CliResult<SweepRun> {
    let prepared = prepare(&mut args.data)?;
    let cutoffs = match args.rho_grid {
        Some(g) => g.points()?,
        None => default_cutoff_grid(&prepared.increments)?,
    };
    let s = truncation(args.data.s)?;
    let config = SweepConfig {
        alpha_grid: args.data.alpha_grid.points()?,
        s,
        min_points: args.min_points,
        ..SweepConfig::default()
    };
    let n_total = prepared.increments.len();
    let mut set = OutputSet::new(&args.data.out_dir)?;
    let mut bests = Vec::new();
    for side in sides(*args.data.side.get_or_insert(default_side)) {
        let result = cutoff_sweep(&prepared.increments, side, &cutoffs, &config)?;
        let tag = side_tag(side);
        let long = result.curves.iter().flatten().flat_map(|c| {
            c.alpha_grid.iter().zip(&c.values).map(move |(&a, &w)| {
                vec![
                    fmt_f64(c.rho),
                    fmt_f64(a),
                    fmt_f64(w),
                    c.n_points.to_string(),
                ]
            })
        });
        set.add_csv(
            &format!("sweep_{tag}.csv"),
            &["rho", "alpha", "w_tilde", "n_points"],
            long,
        )?;
        let locus = result.locus.iter().map(|r| {
            vec![
                fmt_f64(r.rho),
                fmt_opt(r.alpha_hat),
                fmt_opt(r.min_value),
                r.n_points.to_string(),
                r.reliable.to_string(),
            ]
        });
        set.add_csv(
            &format!("locus_{tag}.csv"),
            &["rho", "alpha_hat", "min_value", "n_points", "reliable"],
            locus,
        )?;
        let flagged = result.locus.iter().filter(|r| !r.reliable).count();
        if flagged > 0 {
            eprintln!(
                "warning: {flagged} of {} {side} cutoff(s) have fewer than {} exceedances",
                cutoffs.len(),
                args.min_points
            );
        }
        let model_bound = match result.global_best {
            Some(best) => {
                let sample = split_tails(&prepared.increments, best.rho)?.sample(side)?;
                let intensity = best.n_points as f64 / n_total as f64;
                let fitted: JumpMeasure =
                    PowerLawTail::with_intensity(best.alpha, best.rho, intensity, side)?.into();
                let mb = model_distance_bound(&sample, &fitted, best.rho, s)?;
                Some(ModelBoundJson {
                    intensity,
                    lambda_star: mb.lambda_star,
                    w_tilde: mb.w_tilde,
                    bound: mb.bound,
                    rate_exponent: mb.rate_exponent,
                })
            }
            None => {
                eprintln!("warning: no reliable {side} cutoff; global best left empty");
                None
            }
        };
        let best = result.global_best;
        let best_json = BestJson {
            side,
            rho: best.map(|b| b.rho),
            alpha: best.map(|b| b.alpha),
            distance: best.map(|b| b.distance),
            n_points: best.map(|b| b.n_points),
            model_bound,
            flagged_rows: flagged,
            min_points: args.min_points,
            n_increments: n_total,
            s: s.value(),
            iqr: prepared.iqr,
            normalized: prepared.normalized,
        };
        set.add_json(&format!("best_{tag}.json"), &best_json)?;
        bests.push(best_json);
    }
    Ok(SweepRun {
        set,
        prepared,
        bests,
    })
}

fn sweep(mut args: SweepArgs) -> CliResult<RunOutcome> {
    let run = run_sweep(&mut args, SideArg::Pos)?;
    let input = Some(run.prepared.input);
    finish(
        run.set,
        &Command::Sweep(args),
        Provenance { seed: None, input },
    )
}

#[derive(Serialize)]
struct AnalysisSide {
    side: Side,
    rho: Option<f64>,
    /// Cutoff expressed in the units of the input increments.
    rho_data_units: Option<f64>,
    alpha: Option<f64>,
    distance: Option<f64>,
    n_points: Option<usize>,
    bound: Option<f64>,
}

#[derive(Serialize)]
struct Analysis {
    sides: Vec<AnalysisSide>,
    n_increments: usize,
    iqr: f64,
    normalized: bool,
    s: f64,
}

fn analyze(mut args: SweepArgs) -> CliResult<RunOutcome> {
    let mut run = run_sweep(&mut args, SideArg::Both)?;
    let unit = if run.prepared.normalized {
        run.prepared.iqr
    } else {
        1.0
    };
    let analysis = Analysis {
        sides: run
            .bests
            .iter()
            .map(|b| AnalysisSide {
                side: b.side,
                rho: b.rho,
                rho_data_units: b.rho.map(|r| r * unit),
                alpha: b.alpha,
                distance: b.distance,
                n_points: b.n_points,
                bound: b.model_bound.as_ref().map(|m| m.bound),
            })
            .collect(),
        n_increments: run.prepared.increments.len(),
        iqr: run.prepared.iqr,
        normalized: run.prepared.normalized,
        s: args.data.s,
    };
    run.set.add_json("analysis.json", &analysis)?;
    let input = Some(run.prepared.input);
    finish(
        run.set,
        &Command::Analyze(args),
        Provenance { seed: None, input },
    )
}

/// `Q_2_3` style labels when sizes are powers of ten, raw sizes otherwise.
fn size_label(n: usize) -> String {
    let mut k = 0;
    let mut p = 1usize;
    while p < n {
        p = p.saturating_mul(10);
        k += 1;
    }
    if p == n {
        k.to_string()
    } else {
        n.to_string()
    }
}

fn convergence(args: ConvergenceArgs) -> CliResult<RunOutcome> {
    if args.alpha0.is_empty() {
        return Err(CliError::Usage("--alpha0 needs at least one value".into()));
    }
    let reports: Vec<ConvergenceReport> = args
        .alpha0
        .iter()
        .map(|&alpha0| {
            let config = SimulationConfig {
                alpha0,
                rho0: args.rho0,
                n_list: args.n_list.clone(),
                m: args.m,
                seed: args.seed,
                distribution: JumpDistribution::PowerLaw,
                s: args.s,
                alpha_half_width: args.alpha_half_width,
                alpha_step: args.alpha_step,
                kappa: None,
            };
            convergence_experiment(&config)
        })
        .collect::<levytail::Result<_>>()?;

    let mut set = OutputSet::new(&args.out_dir)?;
    let mut header1 = vec!["alpha0".to_string(), "statistic".to_string()];
    for n in &args.n_list {
        header1.push(format!("alpha_hat_n{n}"));
        header1.push(format!("w_star_n{n}"));
    }
    let mut rows1 = Vec::new();
    for r in &reports {
        for stat in ["mean", "var"] {
            let mut row = vec![fmt_f64(r.alpha0), stat.to_string()];
            for c in &r.cells {
                let (a, w) = if stat == "mean" {
                    (c.mean_alpha_hat, c.mean_w_star)
                } else {
                    (c.var_alpha_hat, c.var_w_star)
                };
                row.push(fmt_f64(a));
                row.push(fmt_f64(w));
            }
            rows1.push(row);
        }
    }
    let h1: Vec<&str> = header1.iter().map(String::as_str).collect();
    set.add_csv("table1.csv", &h1, rows1)?;

    for (file, letter, pick) in [
        (
            "table2.csv",
            "Q",
            (|r: &ConvergenceReport| &r.q_quotients) as fn(&ConvergenceReport) -> &Vec<_>,
        ),
        ("table3.csv", "R", |r: &ConvergenceReport| &r.r_quotients),
    ] {
        let quotients = pick(&reports[0]);
        let mut header = vec!["alpha0".to_string(), "rate".to_string()];
        header.extend(
            quotients
                .iter()
                .map(|q| format!("{letter}_{}_{}", size_label(q.from_n), size_label(q.to_n))),
        );
        let rows = reports.iter().map(|r| {
            let mut row = vec![fmt_f64(r.alpha0), fmt_f64(r.theoretical_rate)];
            row.extend(pick(r).iter().map(|q| fmt_f64(q.value)));
            row
        });
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        set.add_csv(file, &h, rows)?;
    }

    let replications = reports.iter().flat_map(|r| {
        r.cells.iter().flat_map(move |c| {
            c.alpha_hat
                .iter()
                .zip(&c.w_star)
                .enumerate()
                .map(move |(k, (&a, &w))| {
                    vec![
                        fmt_f64(r.alpha0),
                        c.n.to_string(),
                        k.to_string(),
                        fmt_f64(a),
                        fmt_f64(w),
                    ]
                })
        })
    });
    set.add_csv(
        "replications.csv",
        &["alpha0", "n", "replication", "alpha_hat", "w_star"],
        replications,
    )?;
    set.add_json("convergence.json", &reports)?;
    let seed = Some(args.seed);
    finish(
        set,
        &Command::Convergence(args),
        Provenance { seed, input: None },
    )
}

fn jump_measure(spec: JumpArg) -> CliResult<JumpMeasure> {
    Ok(match spec {
        JumpArg::Stable {
            alpha,
            c_minus,
            c_plus,
        } => StableTailMeasure::new(alpha, c_minus, c_plus)?.into(),
        JumpArg::Powerlaw {
            alpha,
            rho0,
            intensity,
        } => PowerLawTail::with_intensity(alpha, rho0, intensity, Side::Positive)?.into(),
        JumpArg::Bounded { alpha, two_sided } => {
            BoundedPowerMeasure::new(alpha, two_sided)?.into()
        }
        JumpArg::Gaussian { sigma, intensity } => GaussianJumpLaw::new(sigma, intensity)?.into(),
    })
}

#[derive(Serialize)]
struct BoundJson {
    #[serde(rename = "Q1")]
    q1: f64,
    #[serde(rename = "Q2")]
    q2: f64,
    bound: f64,
    constants: levytail::coupling::BoundConstants,
    inputs: levytail::coupling::BoundInputs,
    triplet1: LevyTriplet,
    triplet2: LevyTriplet,
    coupling_distance: Option<levytail::coupling::CouplingDistance>,
}

fn bound(args: BoundArgs) -> CliResult<RunOutcome> {
    let t1 = LevyTriplet::new(args.drift1, args.diffusion1, jump_measure(args.jump1)?)?;
    let t2 = LevyTriplet::new(args.drift2, args.diffusion2, jump_measure(args.jump2)?)?;
    let b = path_bound(&t1, &t2, args.x1, args.x2, args.ell, args.lambda)?;
    let coupling = if args.coupling {
        Some(coupling_distance(
            &t1.jump,
            &t2.jump,
            TruncationLevel::default(),
            &default_lambda_grid(),
        )?)
    } else {
        None
    };
    let mut set = OutputSet::new(&args.out_dir)?;
    set.add_json(
        "bound.json",
        &BoundJson {
            q1: b.q1,
            q2: b.q2,
            bound: b.bound,
            constants: levytail::coupling::BoundConstants::exact(),
            inputs: b.inputs,
            triplet1: t1,
            triplet2: t2,
            coupling_distance: coupling,
        },
    )?;
    finish(
        set,
        &Command::Bound(args),
        Provenance {
            seed: None,
            input: None,
        },
    )
}

fn replay(args: ReplayArgs) -> CliResult<RunOutcome> {
    let text =
        std::fs::read_to_string(&args.manifest).map_err(|e| CliError::io(&args.manifest, e))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::input(&args.manifest, format!("not a run manifest: {e}")))?;
    let mut command: Command = serde_json::from_value(manifest.config.clone())
        .map_err(|e| CliError::input(&args.manifest, format!("unreadable configuration: {e}")))?;
    if manifest.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            manifest.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    if let (Some(input), Some(expected)) = (&manifest.input, &manifest.input_sha256) {
        let actual = sha256_file(input)?;
        if &actual != expected {
            return Err(CliError::input(
                input,
                "input file changed since the recorded run",
            ));
        }
    }
    let out_dir = match args.out_dir {
        Some(d) => d,
        None => manifest_dir(&args.manifest).join("replay"),
    };
    if let Some(dir) = command.out_dir_mut() {
        *dir = out_dir;
    }
    let outcome = execute(command)?;
    let mismatched: Vec<&str> = manifest
        .outputs
        .iter()
        .filter(|o| !outcome.digests.contains(o))
        .map(|o| o.file.as_str())
        .collect();
    if !mismatched.is_empty() || outcome.digests.len() != manifest.outputs.len() {
        return Err(CliError::ReplayMismatch(if mismatched.is_empty() {
            "different set of output files".into()
        } else {
            mismatched.join(", ")
        }));
    }
    eprintln!(
        "replay of {} reproduced {} file(s) bit-identically",
        manifest_name(&manifest.command),
        outcome.digests.len()
    );
    Ok(outcome)
}

fn manifest_dir(manifest: &Path) -> PathBuf {
    manifest
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_labels() {
        assert_eq!(size_label(100), "2");
        assert_eq!(size_label(100_000), "5");
        assert_eq!(size_label(1), "0");
        assert_eq!(size_label(250), "250");
    }
}
