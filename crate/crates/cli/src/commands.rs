//! The experiment commands: thin orchestration of the core driver and
//! estimators, plus CSV/JSON emission.

use crate::config::ExperimentConfig;
use crate::report::{OutputWriter, ReportJson};
use anyhow::Result;
use gwlab_core::driver::{self, ReplicaPlan};
use gwlab_core::estimators::{self, Functional};
use gwlab_core::{conductance, SeedTree};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn plan(config: &ExperimentConfig) -> ReplicaPlan {
    ReplicaPlan::new(config.replicas, config.steps, config.censor_buffer)
        .with_vertex_cap(config.vertex_cap)
}

/// Runs replicas, aggregates blocks, writes `speed_curve.csv` and the JSON
/// summary.
pub fn cmd_speed(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate_lambdas()?;
    let mode = config.sim_mode()?;
    let seeds = SeedTree::new(config.seed);
    let plan = plan(config);

    let mut csv = String::from("lambda,speed,lo,hi,blocks,steps\n");
    let mut block_dumps: Vec<(String, String)> = Vec::new();
    let mut reports = Vec::new();
    driver::with_pool(config.threads, || -> Result<()> {
        for (i, &lambda) in config.lambda_grid.iter().enumerate() {
            let collected = driver::collect_blocks(&mode, lambda, &plan, &seeds)?;
            let report = estimators::estimate_report(
                &mode,
                lambda,
                &collected,
                config.bootstrap,
                &seeds,
                i as u64,
            )?;
            writeln!(
                csv,
                "{lambda},{},{},{},{},{}",
                report.speed.point,
                report.speed.lo,
                report.speed.hi,
                report.block_count,
                report.total_steps
            )?;
            if config.dump_blocks {
                let mut dump = String::from(
                    "replica,index,duration,displacement,b_sum,excursions,trap_time\n",
                );
                for (replica, &(a, b)) in collected.replica_ranges.iter().enumerate() {
                    for block in &collected.blocks[a..b] {
                        writeln!(
                            dump,
                            "{replica},{},{},{},{},{},{}",
                            block.index,
                            block.duration,
                            block.displacement,
                            block.b_sum,
                            block.excursions,
                            block.trap_time
                        )?;
                    }
                }
                let name = if config.lambda_grid.len() == 1 {
                    "blocks.csv".to_string()
                } else {
                    format!("blocks_{i}.csv")
                };
                block_dumps.push((name, dump));
            }
            reports.push(ReportJson::from(&report));
        }
        Ok(())
    })?;

    let mut writer = OutputWriter::new(out_dir)?;
    writer.write("speed_curve.csv", &csv)?;
    for (name, dump) in &block_dumps {
        writer.write(name, dump)?;
    }
    writer.write("summary.json", &serde_json::to_string_pretty(&reports)?)?;
    writer.finish("speed", config)
}

/// Block-covariance derivative next to its finite-difference cross-check.
pub fn cmd_derivative(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate_lambdas()?;
    let mode = config.sim_mode()?;
    let seeds = SeedTree::new(config.seed);
    let plan = plan(config);

    #[derive(Serialize)]
    struct DerivativeJson {
        report: ReportJson,
        fd: crate::report::EstimateJson,
        fd_half: f64,
        richardson: f64,
        matching_variant: String,
    }

    let mut csv = String::from("lambda,exy_centered,exy_lo,exy_hi,exy_literal,fd,fd_lo,fd_hi\n");
    let mut rows = Vec::new();
    driver::with_pool(config.threads, || -> Result<()> {
        for (i, &lambda) in config.lambda_grid.iter().enumerate() {
            let collected = driver::collect_blocks(&mode, lambda, &plan, &seeds)?;
            let report = estimators::estimate_report(
                &mode,
                lambda,
                &collected,
                config.bootstrap,
                &seeds,
                i as u64,
            )?;
            let fd = estimators::finite_difference_derivative(
                &mode,
                lambda,
                config.fd_step,
                &plan,
                &seeds,
                config.bootstrap,
            )?;
            writeln!(
                csv,
                "{lambda},{},{},{},{},{},{},{}",
                report.cov.sigma01_centered.point,
                report.cov.sigma01_centered.lo,
                report.cov.sigma01_centered.hi,
                report.cov.sigma01_literal.point,
                fd.fd.point,
                fd.fd.lo,
                fd.fd.hi
            )?;
            let centered_gap = (report.cov.sigma01_centered.point - fd.fd.point).abs();
            let literal_gap = (report.cov.sigma01_literal.point - fd.fd.point).abs();
            rows.push(DerivativeJson {
                report: ReportJson::from(&report),
                fd: (&fd.fd).into(),
                fd_half: fd.fd_half,
                richardson: fd.richardson,
                matching_variant: if centered_gap <= literal_gap {
                    "centered".to_string()
                } else {
                    "literal".to_string()
                },
            });
        }
        Ok(())
    })?;

    let mut writer = OutputWriter::new(out_dir)?;
    writer.write("derivative.csv", &csv)?;
    writer.write("summary.json", &serde_json::to_string_pretty(&rows)?)?;
    writer.finish("derivative", config)
}

/// Change-of-measure checks: the weight martingale and reweighted-vs-direct
/// functionals on a shared tree ensemble.
pub fn cmd_girsanov(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate_lambdas()?;
    let mode = config.sim_mode()?;
    let seeds = SeedTree::new(config.seed);
    let lambda = config.lambda_grid[0];
    let h = config.girsanov_h;

    let functionals = [
        ("one", Functional::One { horizon: config.horizon }),
        ("depth20_ge_10", Functional::DepthAtLeast { time: 20, level: 10 }),
        ("depth_at_50", Functional::DepthAt { time: 50 }),
    ];

    #[derive(Serialize)]
    struct GirsanovJson {
        functional: String,
        horizon: u64,
        reweighted: f64,
        reweighted_se: f64,
        direct: f64,
        direct_se: f64,
        diff_se: f64,
        mean_weight: f64,
        mean_weight_se: f64,
        r_bound_ratio: f64,
    }

    let mut csv = String::from(
        "functional,horizon,reweighted,rw_se,direct,dir_se,diff_se,mean_weight,weight_se,r_bound_ratio\n",
    );
    let mut rows = Vec::new();
    driver::with_pool(config.threads, || -> Result<()> {
        for (name, functional) in functionals {
            let est = estimators::girsanov_transfer_estimate(
                &mode,
                lambda,
                h,
                functional,
                config.trees,
                config.trajectories,
                &seeds,
            )?;
            writeln!(
                csv,
                "{name},{},{},{},{},{},{},{},{},{}",
                functional.horizon(),
                est.reweighted.0,
                est.reweighted.1,
                est.direct.0,
                est.direct.1,
                est.diff_se,
                est.mean_weight.0,
                est.mean_weight.1,
                est.r_bound_ratio
            )?;
            rows.push(GirsanovJson {
                functional: name.to_string(),
                horizon: functional.horizon(),
                reweighted: est.reweighted.0,
                reweighted_se: est.reweighted.1,
                direct: est.direct.0,
                direct_se: est.direct.1,
                diff_se: est.diff_se,
                mean_weight: est.mean_weight.0,
                mean_weight_se: est.mean_weight.1,
                r_bound_ratio: est.r_bound_ratio,
            });
        }
        Ok(())
    })?;

    let mut writer = OutputWriter::new(out_dir)?;
    writer.write("girsanov.csv", &csv)?;
    writer.write("summary.json", &serde_json::to_string_pretty(&rows)?)?;
    writer.finish("girsanov-check", config)
}

/// Annealed escape probabilities along the bias grid.
pub fn cmd_escape(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mode = config.sim_mode()?;
    let seeds = SeedTree::new(config.seed);

    let mut csv = String::from("lambda,N,escape,lo,hi,gap\n");
    let mut rows = Vec::new();

    #[derive(Serialize)]
    struct EscapeJson {
        lambda: f64,
        n: u32,
        escape: f64,
        lo: f64,
        hi: f64,
        gap: f64,
    }

    driver::with_pool(config.threads, || -> Result<()> {
        for &lambda in &config.lambda_grid {
            let est = conductance::annealed_escape(
                &mode,
                lambda,
                config.trees,
                config.truncation,
                conductance::DEFAULT_GAP_TOL,
                config.vertex_cap,
                &seeds,
            )?;
            writeln!(
                csv,
                "{lambda},{},{},{},{},{}",
                est.n, est.escape, est.lo, est.hi, est.gap
            )?;
            rows.push(EscapeJson {
                lambda,
                n: est.n,
                escape: est.escape,
                lo: est.lo,
                hi: est.hi,
                gap: est.gap,
            });
        }
        Ok(())
    })?;

    let mut writer = OutputWriter::new(out_dir)?;
    writer.write("escape.csv", &csv)?;
    writer.write("summary.json", &serde_json::to_string_pretty(&rows)?)?;
    writer.finish("escape", config)
}

/// Moment stability heuristics for block durations and trap generation sizes.
pub fn cmd_diagnostics(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate_lambdas()?;
    let mode = config.sim_mode()?;
    let seeds = SeedTree::new(config.seed);
    let plan = plan(config);

    let mut moments_csv =
        String::from("lambda,alpha,moment,stability_ratio,max_duration,growth_exponent\n");
    let mut trap_csv = String::from("n,m,ratio\n");
    driver::with_pool(config.threads, || -> Result<()> {
        let rows = estimators::uniform_moment_diagnostics(
            &mode,
            &config.lambda_grid,
            &config.alpha_list,
            &plan,
            &seeds,
        )?;
        for r in rows {
            writeln!(
                moments_csv,
                "{},{},{},{},{},{}",
                r.lambda, r.alpha, r.moment, r.stability_ratio, r.max_duration, r.max_growth_exponent
            )?;
        }
        if let Some(law) = mode.law() {
            if law.prob(0) > 0.0 {
                let trap = estimators::trap_moment_diagnostics(
                    law,
                    config.nmax,
                    config.mmax,
                    config.trap_replicas,
                    &seeds,
                )?;
                for (n, m, ratio) in trap.rows {
                    writeln!(trap_csv, "{n},{m},{ratio}")?;
                }
                for (n1, n2, ratio) in trap.pairs {
                    writeln!(trap_csv, "pair:{n1}-{n2},1,{ratio}")?;
                }
            }
        }
        Ok(())
    })?;

    let mut writer = OutputWriter::new(out_dir)?;
    writer.write("moments.csv", &moments_csv)?;
    writer.write("trap_moments.csv", &trap_csv)?;
    writer.finish("diagnostics", config)
}

/// Parses, validates, and prints the canonical form of the config.
pub fn cmd_validate(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    config.validate_lambdas()?;
    Ok(config.emit())
}
