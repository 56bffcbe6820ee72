//! Jump samplers and the Monte Carlo convergence experiment.
//!
//! Every replication owns a ChaCha8 stream selected by its index, so a given
//! replication draws the same jumps whatever `m` is and whichever thread runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, OpenClosed01};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, LevyError, Result};
use crate::numeric::linear_grid;
use crate::measures::ParetoQuantile;
use crate::wasserstein::{OrderedSample, PowerLawTable, TruncationLevel, UnitGrid};

/// Generator for replication `stream` of experiment `seed`.
pub fn replication_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` draws `ρ₀ U^{-1/α₀}` with `U` uniform on `(0, 1]`, in draw order.
pub fn power_law_draws<R: Rng + ?Sized>(rng: &mut R, n: usize, alpha0: f64, rho0: f64) -> Vec<f64> {
    let exponent = -1.0 / alpha0;
    (0..n)
        .map(|_| {
            let u: f64 = OpenClosed01.sample(rng);
            rho0 * u.powf(exponent)
        })
        .collect()
}

/// Draws plus their order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSample {
    pub raw: Vec<f64>,
    pub ordered: OrderedSample,
}

/// i.i.d. power-law jumps on `[ρ₀, ∞)`.
pub fn sample_power_law_jumps(n: usize, alpha0: f64, rho0: f64, seed: u64) -> Result<JumpSample> {
    require_positive("alpha0", alpha0)?;
    require_positive("rho0", rho0)?;
    if n == 0 {
        return Err(LevyError::EmptySample);
    }
    let raw = power_law_draws(&mut replication_rng(seed, 0), n, alpha0, rho0);
    Ok(JumpSample {
        ordered: OrderedSample::new(raw.clone())?,
        raw,
    })
}

/// i.i.d. `N(0, σ²)` jumps.
pub fn sample_gaussian_jumps(n: usize, sigma: f64, seed: u64) -> Result<JumpSample> {
    require_positive("sigma", sigma)?;
    if n == 0 {
        return Err(LevyError::EmptySample);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid("sigma", e.to_string()))?;
    let mut rng = replication_rng(seed, 0);
    let raw: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    Ok(JumpSample {
        ordered: OrderedSample::new(raw.clone())?,
        raw,
    })
}

/// Piecewise-constant compound Poisson path; the first point is `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundPoissonPath {
    pub arrival_times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Exponential waiting times at rate `intensity` and the cumulative sum of `jumps`.
pub fn render_cpp_path(jumps: &[f64], intensity: f64, seed: u64) -> Result<CompoundPoissonPath> {
    require_positive("intensity", intensity)?;
    let waiting = Exp::new(intensity).map_err(|e| invalid("intensity", e.to_string()))?;
    let mut rng = replication_rng(seed, 1);
    let mut arrival_times = Vec::with_capacity(jumps.len() + 1);
    let mut values = Vec::with_capacity(jumps.len() + 1);
    arrival_times.push(0.0);
    values.push(0.0);
    let (mut t, mut y) = (0.0, 0.0);
    for &jump in jumps {
        t += waiting.sample(&mut rng);
        y += jump;
        arrival_times.push(t);
        values.push(y);
    }
    Ok(CompoundPoissonPath { arrival_times, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpDistribution {
    PowerLaw,
    Gaussian { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub alpha0: f64,
    pub rho0: f64,
    pub n_list: Vec<usize>,
    pub m: usize,
    pub seed: u64,
    pub distribution: JumpDistribution,
    /// Truncation level of the distance.
    pub s: f64,
    /// Half-width of the α grid around `α₀`.
    pub alpha_half_width: f64,
    pub alpha_step: f64,
    /// Optional convergence exponent to check against `α₀/(α₀+2)`.
    pub kappa: Option<f64>,
}

impl SimulationConfig {
    pub fn power_law(alpha0: f64) -> Self {
        Self {
            alpha0,
            rho0: 0.5,
            n_list: vec![100, 1_000, 10_000, 100_000],
            m: 100,
            seed: 20_240_601,
            distribution: JumpDistribution::PowerLaw,
            s: 1.0,
            alpha_half_width: 1.0,
            alpha_step: 0.01,
            kappa: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("alpha0", self.alpha0)?;
        require_positive("rho0", self.rho0)?;
        TruncationLevel::new(self.s)?;
        require_positive("alpha_step", self.alpha_step)?;
        if !(self.alpha_half_width >= 0.0) {
            return Err(invalid("alpha_half_width", "must be >= 0"));
        }
        if self.m == 0 {
            return Err(invalid("m", "need at least one replication"));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return Err(invalid("n_list", "need positive sample sizes"));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("n_list", "sample sizes must be strictly ascending"));
        }
        if let Some(kappa) = self.kappa {
            let bound = self.alpha0 / (self.alpha0 + 2.0);
            if !(kappa > 0.0 && kappa < bound) {
                return Err(invalid("kappa", format!("need 0 < kappa < {bound}, got {kappa}")));
            }
        }
        if let JumpDistribution::Gaussian { sigma } = self.distribution {
            require_positive("sigma", sigma)?;
        }
        Ok(())
    }

    /// `[α₀ - w, α₀ + w]` at the configured step, positive points only.
    pub fn alpha_grid(&self) -> Result<Vec<f64>> {
        let grid = linear_grid(
            self.alpha0 - self.alpha_half_width,
            self.alpha0 + self.alpha_half_width,
            self.alpha_step,
        )?;
        let grid: Vec<f64> = grid.into_iter().filter(|&a| a > 1e-12).collect();
        if grid.is_empty() {
            return Err(LevyError::EmptyGrid("alpha grid"));
        }
        Ok(grid)
    }
}

/// Statistics of one `(α₀, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCell {
    pub n: usize,
    pub mean_alpha_hat: f64,
    pub var_alpha_hat: f64,
    pub mean_w_star: f64,
    pub var_w_star: f64,
    pub alpha_hat: Vec<f64>,
    pub w_star: Vec<f64>,
}

/// Ratio between the cells `n` and `10 n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quotient {
    pub from_n: usize,
    pub to_n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub alpha0: f64,
    pub rho0: f64,
    pub s: f64,
    pub m: usize,
    pub seed: u64,
    pub alpha_grid: Vec<f64>,
    pub cells: Vec<ConvergenceCell>,
    /// Consecutive ratios of mean `ŵ*`.
    pub q_quotients: Vec<Quotient>,
    /// Consecutive ratios of the standard deviation of `ŵ*`.
    pub r_quotients: Vec<Quotient>,
    /// `10^{-α₀/(α₀+2)}`
    pub theoretical_rate: f64,
}

impl ConvergenceReport {
    pub fn cell(&self, n: usize) -> Option<&ConvergenceCell> {
        self.cells.iter().find(|c| c.n == n)
    }

    pub fn q(&self, from_n: usize) -> Option<f64> {
        self.q_quotients.iter().find(|q| q.from_n == from_n).map(|q| q.value)
    }

    pub fn r(&self, from_n: usize) -> Option<f64> {
        self.r_quotients.iter().find(|q| q.from_n == from_n).map(|q| q.value)
    }
}

/// Mean and unbiased sample variance.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// For each `n`, `m` replications of `α̂_n` (grid argmin at `ρ = ρ₀`) and
/// `ŵ*_n` (distance at the true `α₀`), aggregated with the rate quotients.
/// The sample of size `n` is the first `n` draws of the replication.
pub fn convergence_experiment(config: &SimulationConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    if config.distribution != JumpDistribution::PowerLaw {
        return Err(LevyError::Unsupported("convergence experiment needs power-law jumps"));
    }
    let alpha_grid = config.alpha_grid()?;
    let s = TruncationLevel::new(config.s)?;
    let n_max = *config.n_list.last().expect("validated");
    let draws: Vec<Vec<f64>> = (0..config.m)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(config.seed, r as u64);
            power_law_draws(&mut rng, n_max, config.alpha0, config.rho0)
        })
        .collect();
    let truth = ParetoQuantile::new(config.alpha0, config.rho0)?;
    let mut cells = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let samples: Vec<OrderedSample> = draws
            .par_iter()
            .map(|d| OrderedSample::new(d[..n].to_vec()))
            .collect::<Result<_>>()?;
        let grid = UnitGrid::new(n);
        // curves[k][r]: distance of replication r at grid point k
        let curves: Vec<Vec<f64>> = alpha_grid
            .par_iter()
            .map(|&alpha| {
                let table = PowerLawTable::new(ParetoQuantile::new(alpha, config.rho0)?, &grid);
                Ok(samples.iter().map(|x| table.truncated_distance(x, s)).collect())
            })
            .collect::<Result<_>>()?;
        let truth_table = PowerLawTable::new(truth, &grid);
        let w_star: Vec<f64> = samples
            .par_iter()
            .map(|x| truth_table.truncated_distance(x, s))
            .collect();
        let alpha_hat: Vec<f64> = (0..config.m)
            .map(|r| {
                let mut best = 0;
                for k in 1..alpha_grid.len() {
                    if curves[k][r] < curves[best][r] {
                        best = k;
                    }
                }
                alpha_grid[best]
            })
            .collect();
        let (mean_alpha_hat, var_alpha_hat) = mean_and_variance(&alpha_hat);
        let (mean_w_star, var_w_star) = mean_and_variance(&w_star);
        cells.push(ConvergenceCell {
            n,
            mean_alpha_hat,
            var_alpha_hat,
            mean_w_star,
            var_w_star,
            alpha_hat,
            w_star,
        });
    }
    let mut q_quotients = Vec::new();
    let mut r_quotients = Vec::new();
    for w in cells.windows(2) {
        if w[1].n != 10 * w[0].n {
            continue;
        }
        q_quotients.push(Quotient {
            from_n: w[0].n,
            to_n: w[1].n,
            value: w[1].mean_w_star / w[0].mean_w_star,
        });
        r_quotients.push(Quotient {
            from_n: w[0].n,
            to_n: w[1].n,
            value: (w[1].var_w_star / w[0].var_w_star).sqrt(),
        });
    }
    Ok(ConvergenceReport {
        alpha0: config.alpha0,
        rho0: config.rho0,
        s: config.s,
        m: config.m,
        seed: config.seed,
        alpha_grid,
        cells,
        q_quotients,
        r_quotients,
        theoretical_rate: 10f64.powf(-config.alpha0 / (config.alpha0 + 2.0)),
    })
}
