//! Estimators over regeneration blocks.
//!
//! The speed is the ratio of block means, the block covariance matrix feeds
//! the derivative-of-speed estimator, and every headline number carries a
//! percentile-bootstrap interval. Two conventions for the off-diagonal entry
//! are reported side by side: `centered` subtracts `speed * duration` from
//! the displacement before taking products, `literal` does not. The
//! derivative headline is the centered one; a finite-difference run with
//! common random numbers serves as its independent cross-check.

use crate::driver::{self, CollectedBlocks, ReplicaPlan};
use crate::error::{Error, Result};
use crate::regen::RegenBlock;
use crate::rng::{Purpose, SeedTree};
use crate::stats::{self, Estimate};
use crate::tree::{self, SimMode};
use crate::walk::{Walker, WeightParts};
use rand::Rng;
use rayon::prelude::*;

pub const MIN_BLOCKS: usize = 100;
pub const DEFAULT_RESAMPLES: u32 = 2000;
pub const CI_LEVEL: f64 = 0.95;

/// Scalar sums over a set of blocks; everything the estimators need.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SuffStats {
    pub n: u64,
    pub sum_dur: f64,
    pub sum_disp: f64,
    pub sum_bsum: f64,
    pub sum_bsum_sq: f64,
    pub sum_b2: f64,
    pub sum_dur2: f64,
    pub sum_disp2: f64,
    pub sum_dur_disp: f64,
    pub sum_disp_bsum: f64,
    pub sum_dur_bsum: f64,
}

impl SuffStats {
    pub fn add(&mut self, b: &RegenBlock) {
        let dur = b.duration as f64;
        let disp = b.displacement as f64;
        self.n += 1;
        self.sum_dur += dur;
        self.sum_disp += disp;
        self.sum_bsum += b.b_sum;
        self.sum_bsum_sq += b.b_sum * b.b_sum;
        self.sum_b2 += b.b2_sum;
        self.sum_dur2 += dur * dur;
        self.sum_disp2 += disp * disp;
        self.sum_dur_disp += dur * disp;
        self.sum_disp_bsum += disp * b.b_sum;
        self.sum_dur_bsum += dur * b.b_sum;
    }

    pub fn from_blocks(blocks: &[RegenBlock]) -> Self {
        let mut s = SuffStats::default();
        for b in blocks {
            s.add(b);
        }
        s
    }

    pub fn merge(&self, other: &SuffStats) -> SuffStats {
        SuffStats {
            n: self.n + other.n,
            sum_dur: self.sum_dur + other.sum_dur,
            sum_disp: self.sum_disp + other.sum_disp,
            sum_bsum: self.sum_bsum + other.sum_bsum,
            sum_bsum_sq: self.sum_bsum_sq + other.sum_bsum_sq,
            sum_b2: self.sum_b2 + other.sum_b2,
            sum_dur2: self.sum_dur2 + other.sum_dur2,
            sum_disp2: self.sum_disp2 + other.sum_disp2,
            sum_dur_disp: self.sum_dur_disp + other.sum_dur_disp,
            sum_disp_bsum: self.sum_disp_bsum + other.sum_disp_bsum,
            sum_dur_bsum: self.sum_dur_bsum + other.sum_dur_bsum,
        }
    }

    pub fn speed(&self) -> f64 {
        self.sum_disp / self.sum_dur
    }

    /// Variance entry of the block vector `(disp - speed * dur)`, normalized
    /// by the mean duration.
    pub fn sigma00_centered(&self, speed: f64) -> f64 {
        (self.sum_disp2 - 2.0 * speed * self.sum_dur_disp + speed * speed * self.sum_dur2)
            / self.sum_dur
    }

    /// Displacement variance about its own mean, normalized by mean duration.
    pub fn sigma00_literal(&self) -> f64 {
        (self.sum_disp2 - self.sum_disp * self.sum_disp / self.n as f64) / self.sum_dur
    }

    pub fn sigma11(&self) -> f64 {
        self.sum_b2 / self.sum_dur
    }

    pub fn sigma01_centered(&self, speed: f64) -> f64 {
        (self.sum_disp_bsum - speed * self.sum_dur_bsum) / self.sum_dur
    }

    pub fn sigma01_literal(&self) -> f64 {
        self.sum_disp_bsum / self.sum_dur
    }

    pub fn bsum_mean(&self) -> f64 {
        self.sum_bsum / self.n as f64
    }

    pub fn bsum_se(&self) -> f64 {
        let n = self.n as f64;
        let m = self.bsum_mean();
        let var = (self.sum_bsum_sq - n * m * m) / (n - 1.0);
        (var / n).sqrt()
    }

    /// The statistics the bootstrap tracks jointly:
    /// `[speed, s00c, s00l, s11, s01c, s01l]`.
    fn vector(&self) -> [f64; 6] {
        let v = self.speed();
        [
            v,
            self.sigma00_centered(v),
            self.sigma00_literal(),
            self.sigma11(),
            self.sigma01_centered(v),
            self.sigma01_literal(),
        ]
    }
}

/// Covariance entries in both conventions, with intervals.
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    pub sigma00_centered: Estimate,
    pub sigma00_literal: Estimate,
    pub sigma11: Estimate,
    pub sigma01_centered: Estimate,
    pub sigma01_literal: Estimate,
}

/// Full per-lambda estimate bundle.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub lambda: f64,
    pub speed: Estimate,
    pub cov: CovarianceReport,
    /// Headline derivative estimate: the centered off-diagonal entry.
    pub derivative: Estimate,
    pub block_count: usize,
    pub total_steps: u64,
    pub bsum_mean: f64,
    pub bsum_se: f64,
    /// Whether lambda sits in the window where the derivative formula is
    /// backed: `(sqrt(lambda_c), mu)`.
    pub in_window: bool,
    pub diagnostics: Vec<(String, f64)>,
}

fn require_blocks(blocks: &[RegenBlock]) -> Result<()> {
    if blocks.len() < MIN_BLOCKS {
        return Err(Error::InsufficientBlocks {
            have: blocks.len(),
            need: MIN_BLOCKS,
        });
    }
    Ok(())
}

/// Joint bootstrap over blocks: one resampling pass yields every statistic.
/// Deterministic given `(seeds, salt)`; parallel over resamples.
fn bootstrap_vectors(
    blocks: &[RegenBlock],
    resamples: u32,
    seeds: &SeedTree,
    salt: u64,
) -> Vec<[f64; 6]> {
    let n = blocks.len();
    (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeds.stream(u64::from(b), Purpose::Bootstrap, salt);
            let mut s = SuffStats::default();
            for _ in 0..n {
                s.add(&blocks[rng.gen_range(0..n)]);
            }
            s.vector()
        })
        .collect()
}

fn component_interval(vectors: &[[f64; 6]], idx: usize, point: f64) -> Estimate {
    let samples: Vec<f64> = vectors.iter().map(|v| v[idx]).collect();
    stats::percentile_interval(samples, point, CI_LEVEL)
}

/// Ratio-of-block-means speed with a percentile bootstrap interval.
pub fn speed_estimate(
    blocks: &[RegenBlock],
    resamples: u32,
    seeds: &SeedTree,
    salt: u64,
) -> Result<Estimate> {
    require_blocks(blocks)?;
    let s = SuffStats::from_blocks(blocks);
    let vectors = bootstrap_vectors(blocks, resamples, seeds, salt);
    Ok(component_interval(&vectors, 0, s.speed()))
}

/// Block covariance matrix in both conventions.
pub fn covariance_matrix(
    blocks: &[RegenBlock],
    speed: f64,
    resamples: u32,
    seeds: &SeedTree,
    salt: u64,
) -> Result<CovarianceReport> {
    require_blocks(blocks)?;
    let s = SuffStats::from_blocks(blocks);
    let vectors = bootstrap_vectors(blocks, resamples, seeds, salt);
    Ok(CovarianceReport {
        sigma00_centered: component_interval(&vectors, 1, s.sigma00_centered(speed)),
        sigma00_literal: component_interval(&vectors, 2, s.sigma00_literal()),
        sigma11: component_interval(&vectors, 3, s.sigma11()),
        sigma01_centered: component_interval(&vectors, 4, s.sigma01_centered(speed)),
        sigma01_literal: component_interval(&vectors, 5, s.sigma01_literal()),
    })
}

/// The derivative estimator: the centered off-diagonal covariance entry.
pub fn derivative_estimate(
    blocks: &[RegenBlock],
    speed: f64,
    resamples: u32,
    seeds: &SeedTree,
    salt: u64,
) -> Result<Estimate> {
    Ok(covariance_matrix(blocks, speed, resamples, seeds, salt)?.sigma01_centered)
}

/// Assembles the full report for one collected run.
pub fn estimate_report(
    mode: &SimMode,
    lambda: f64,
    collected: &CollectedBlocks,
    resamples: u32,
    seeds: &SeedTree,
    salt: u64,
) -> Result<EstimateReport> {
    require_blocks(&collected.blocks)?;
    let s = SuffStats::from_blocks(&collected.blocks);
    let speed = s.speed();
    let vectors = bootstrap_vectors(&collected.blocks, resamples, seeds, salt);
    let cov = CovarianceReport {
        sigma00_centered: component_interval(&vectors, 1, s.sigma00_centered(speed)),
        sigma00_literal: component_interval(&vectors, 2, s.sigma00_literal()),
        sigma11: component_interval(&vectors, 3, s.sigma11()),
        sigma01_centered: component_interval(&vectors, 4, s.sigma01_centered(speed)),
        sigma01_literal: component_interval(&vectors, 5, s.sigma01_literal()),
    };
    let window_lo = mode.lambda_c().sqrt();
    let window_hi = mode.mu();
    let durations: Vec<f64> = collected
        .blocks
        .iter()
        .map(|b| b.duration as f64)
        .collect();
    let diagnostics = vec![
        ("endpoint_speed".to_string(), collected.endpoint_speed()),
        ("sigma11_from_path".to_string(), collected.sigma11_from_path()),
        (
            "duration_lag1_autocorrelation".to_string(),
            stats::lag1_autocorrelation(&durations),
        ),
        (
            "censored_fraction".to_string(),
            collected.censored_tail as f64 / collected.total_steps as f64,
        ),
        (
            "cauchy_schwarz_slack".to_string(),
            s.sigma00_centered(speed) * s.sigma11() - s.sigma01_centered(speed).powi(2),
        ),
    ];
    Ok(EstimateReport {
        lambda,
        speed: component_interval(&vectors, 0, speed),
        derivative: cov.sigma01_centered,
        cov,
        block_count: collected.blocks.len(),
        total_steps: collected.total_steps,
        bsum_mean: s.bsum_mean(),
        bsum_se: s.bsum_se(),
        in_window: lambda > window_lo && lambda < window_hi,
        diagnostics,
    })
}

/// Central finite difference of the speed with common random numbers and a
/// Richardson step-halving check.
#[derive(Debug, Clone)]
pub struct FdEstimate {
    pub h: f64,
    pub fd: Estimate,
    pub fd_half: f64,
    pub richardson: f64,
}

pub fn finite_difference_derivative(
    mode: &SimMode,
    lambda: f64,
    h: f64,
    plan: &ReplicaPlan,
    seeds: &SeedTree,
    resamples: u32,
) -> Result<FdEstimate> {
    if h <= 0.0 {
        return Err(Error::Domain(format!(
            "finite-difference step {h} must be positive"
        )));
    }
    let (lo, hi) = mode.ballistic_window();
    if lambda - h <= lo || lambda + h >= hi {
        return Err(Error::Regime(format!(
            "lambda +- h = {} .. {} leaves the ballistic window ({lo}, {hi})",
            lambda - h,
            lambda + h,
        )));
    }

    // same tree seeds and same walk uniforms at every bias
    let run = |bias: f64| -> Result<Vec<(f64, f64)>> {
        let collected = driver::collect_blocks_coupled(mode, bias, plan, seeds, 0)?;
        Ok(collected
            .replica_ranges
            .iter()
            .map(|&(a, b)| {
                let s = SuffStats::from_blocks(&collected.blocks[a..b]);
                (s.sum_dur, s.sum_disp)
            })
            .collect())
    };
    let plus = run(lambda + h)?;
    let minus = run(lambda - h)?;
    let plus_half = run(lambda + h / 2.0)?;
    let minus_half = run(lambda - h / 2.0)?;

    let pooled_speed = |sums: &[(f64, f64)]| -> f64 {
        let dur: f64 = sums.iter().map(|s| s.0).sum();
        let disp: f64 = sums.iter().map(|s| s.1).sum();
        disp / dur
    };
    let fd_point = (pooled_speed(&plus) - pooled_speed(&minus)) / (2.0 * h);
    let fd_half = (pooled_speed(&plus_half) - pooled_speed(&minus_half)) / h;

    // replica bootstrap, paired across the two biases
    let r = plus.len();
    let samples: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeds.stream(u64::from(b), Purpose::Bootstrap, 7001);
            let mut dur_p = 0.0;
            let mut disp_p = 0.0;
            let mut dur_m = 0.0;
            let mut disp_m = 0.0;
            for _ in 0..r {
                let i = rng.gen_range(0..r);
                dur_p += plus[i].0;
                disp_p += plus[i].1;
                dur_m += minus[i].0;
                disp_m += minus[i].1;
            }
            (disp_p / dur_p - disp_m / dur_m) / (2.0 * h)
        })
        .collect();
    let fd = stats::percentile_interval(samples, fd_point, CI_LEVEL);
    let richardson = (4.0 * fd_half - fd_point) / 3.0;
    Ok(FdEstimate {
        h,
        fd,
        fd_half,
        richardson,
    })
}

/// Bounded functionals of the first n steps, used for change-of-measure
/// checks.
#[derive(Debug, Clone, Copy)]
pub enum Functional {
    /// F = 1: the weight itself must average to one.
    One { horizon: u64 },
    /// Indicator that the depth at `time` is at least `level`.
    DepthAtLeast { time: u64, level: i64 },
    /// The depth at `time`.
    DepthAt { time: u64 },
}

impl Functional {
    pub fn horizon(&self) -> u64 {
        match *self {
            Functional::One { horizon } => horizon,
            Functional::DepthAtLeast { time, .. } | Functional::DepthAt { time } => time,
        }
    }

    fn eval(&self, final_depth: i64) -> f64 {
        match *self {
            Functional::One { .. } => 1.0,
            Functional::DepthAtLeast { level, .. } => f64::from(final_depth >= level),
            Functional::DepthAt { .. } => final_depth as f64,
        }
    }
}

/// The two sides of the change-of-measure identity, on a shared ensemble of
/// fixed trees.
#[derive(Debug, Clone)]
pub struct TransferEstimate {
    /// mean and SE over trees of E_lambda[F * weight].
    pub reweighted: (f64, f64),
    /// mean and SE over trees of E_{lambda+h}[F].
    pub direct: (f64, f64),
    /// SE of the per-tree paired differences.
    pub diff_se: f64,
    /// mean and SE of the weight itself (the F = 1 martingale check).
    pub mean_weight: (f64, f64),
    /// Largest |R_{n,h}| / bound observed; must stay at most 1.
    pub r_bound_ratio: f64,
}

pub fn girsanov_transfer_estimate(
    mode: &SimMode,
    lambda: f64,
    h: f64,
    functional: Functional,
    trees: u64,
    trajectories_per_tree: u64,
    seeds: &SeedTree,
) -> Result<TransferEstimate> {
    let horizon = functional.horizon();
    let per_tree: Vec<Result<(f64, f64, f64, f64)>> = (0..trees)
        .into_par_iter()
        .map(|t| {
            let mut arena = mode.make_arena(seeds, t, 0, false)?;
            let mut rw_sum = 0.0;
            let mut w_sum = 0.0;
            let mut dir_sum = 0.0;
            let mut worst_r = 0.0f64;
            for k in 0..trajectories_per_tree {
                // reweighted side: walk at lambda carrying the weight
                let config = mode.walk_config(lambda)?.with_perturbation(h)?;
                let mut walker = Walker::new(&mut arena, config);
                let mut rng = seeds.stream(t, Purpose::Walk, 2 * k);
                for _ in 0..horizon {
                    walker.step(&mut rng)?;
                }
                let parts = walker.girsanov_weight(h)?;
                let weight = parts.weight();
                let bound = WeightParts::r_bound(lambda, h, horizon);
                worst_r = worst_r.max(parts.r_nh.abs() / bound);
                rw_sum += functional.eval(i64::from(walker.depth())) * weight;
                w_sum += weight;

                // direct side: walk at lambda + h on the same tree
                let config = mode.walk_config(lambda + h)?;
                let mut walker = Walker::new(&mut arena, config);
                let mut rng = seeds.stream(t, Purpose::Walk, 2 * k + 1);
                for _ in 0..horizon {
                    walker.step(&mut rng)?;
                }
                dir_sum += functional.eval(i64::from(walker.depth()));
            }
            let k = trajectories_per_tree as f64;
            Ok((rw_sum / k, dir_sum / k, w_sum / k, worst_r))
        })
        .collect();

    let mut rw = Vec::with_capacity(trees as usize);
    let mut dir = Vec::with_capacity(trees as usize);
    let mut weights = Vec::with_capacity(trees as usize);
    let mut worst_r = 0.0f64;
    for item in per_tree {
        let (a, b, w, r) = item?;
        rw.push(a);
        dir.push(b);
        weights.push(w);
        worst_r = worst_r.max(r);
    }
    let diffs: Vec<f64> = rw.iter().zip(dir.iter()).map(|(a, b)| a - b).collect();
    Ok(TransferEstimate {
        reweighted: (stats::mean(&rw), stats::standard_error(&rw)),
        direct: (stats::mean(&dir), stats::standard_error(&dir)),
        diff_se: stats::standard_error(&diffs),
        mean_weight: (stats::mean(&weights), stats::standard_error(&weights)),
        r_bound_ratio: worst_r,
    })
}

/// Stability heuristics for block-duration moments along a bias grid.
#[derive(Debug, Clone)]
pub struct MomentRow {
    pub lambda: f64,
    pub alpha: f64,
    pub moment: f64,
    /// First-half moment over full-sample moment; far from 1 hints at a
    /// moment that is not settling.
    pub stability_ratio: f64,
    pub max_duration: u64,
    /// Growth exponent of the running max over the last three octaves.
    pub max_growth_exponent: f64,
}

pub fn uniform_moment_diagnostics(
    mode: &SimMode,
    lambda_grid: &[f64],
    alphas: &[f64],
    plan: &ReplicaPlan,
    seeds: &SeedTree,
) -> Result<Vec<MomentRow>> {
    let mut rows = Vec::new();
    for &lambda in lambda_grid {
        let collected = driver::collect_blocks(mode, lambda, plan, seeds)?;
        let durations: Vec<f64> = collected
            .blocks
            .iter()
            .map(|b| b.duration as f64)
            .collect();
        if durations.is_empty() {
            continue;
        }
        let max_duration = collected.blocks.iter().map(|b| b.duration).max().unwrap();
        // running-max growth: compare max over the first quarter to the max
        // over everything
        let quarter = (durations.len() / 4).max(1);
        let max_quarter = durations[..quarter].iter().cloned().fold(0.0, f64::max);
        let max_full = durations.iter().cloned().fold(0.0, f64::max);
        let exponent = if max_quarter > 0.0 && durations.len() >= 8 {
            (max_full / max_quarter).ln() / (durations.len() as f64 / quarter as f64).ln()
        } else {
            0.0
        };
        for &alpha in alphas {
            let full: f64 =
                durations.iter().map(|&d| d.powf(alpha)).sum::<f64>() / durations.len() as f64;
            let half_n = durations.len() / 2;
            let half: f64 =
                durations[..half_n].iter().map(|&d| d.powf(alpha)).sum::<f64>() / half_n as f64;
            rows.push(MomentRow {
                lambda,
                alpha,
                moment: full,
                stability_ratio: half / full,
                max_duration,
                max_growth_exponent: exponent,
            });
        }
    }
    Ok(rows)
}

/// Empirical `E[W_n^m] / lambda_c^n` table for the trap law, plus pair
/// products `E[W_n1 W_n2] / lambda_c^max`.
#[derive(Debug, Clone)]
pub struct TrapMoments {
    /// `(n, m, ratio)` rows.
    pub rows: Vec<(usize, u32, f64)>,
    /// `(n1, n2, ratio)` rows.
    pub pairs: Vec<(usize, usize, f64)>,
}

impl TrapMoments {
    pub fn ratio(&self, n: usize, m: u32) -> Option<f64> {
        self.rows
            .iter()
            .find(|&&(rn, rm, _)| rn == n && rm == m)
            .map(|&(_, _, r)| r)
    }

    pub fn sup_ratio(&self, m: u32) -> f64 {
        self.rows
            .iter()
            .filter(|&&(_, rm, _)| rm == m)
            .map(|&(_, _, r)| r)
            .fold(0.0, f64::max)
    }
}

pub fn trap_moment_diagnostics(
    law: &crate::offspring::OffspringLaw,
    n_max: usize,
    m_max: u32,
    replicas: usize,
    seeds: &SeedTree,
) -> Result<TrapMoments> {
    if law.prob(0) == 0.0 {
        return Err(Error::Domain(
            "p0 = 0: there are no traps to diagnose".into(),
        ));
    }
    let lambda_c = law.lambda_c();
    let mut rng = seeds.stream(0, Purpose::Aux, 17);
    let samples = tree::trap_generation_sizes(law, n_max, replicas, &mut rng);
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for m in 1..=m_max {
            let mut acc = 0.0;
            for r in 0..replicas {
                acc += f64::from(samples.w(r, n)).powi(m as i32);
            }
            let moment = acc / replicas as f64;
            rows.push((n, m, moment / lambda_c.powi(n as i32)));
        }
    }
    let mut pairs = Vec::new();
    for &(n1, n2) in &[(1usize, 3usize), (2, 5), (3, 7), (5, 10)] {
        if n2 > n_max {
            continue;
        }
        let mut acc = 0.0;
        for r in 0..replicas {
            acc += f64::from(samples.w(r, n1)) * f64::from(samples.w(r, n2));
        }
        let moment = acc / replicas as f64;
        pairs.push((n1, n2, moment / lambda_c.powi(n1.max(n2) as i32)));
    }
    Ok(TrapMoments { rows, pairs })
}
