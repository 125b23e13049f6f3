//! Experiment configuration: a flat, line-oriented `key = value` file with
//! one table syntax for the offspring law, e.g.
//!
//! ```text
//! mode = gw
//! offspring = { 0: 0.2, 2: 0.8 }
//! lambda = 1.0
//! steps = 1000000
//! replicas = 8
//! seed = 42
//! ```
//!
//! Parsing and emission round-trip: `parse(emit(c)) == c`. Every experiment
//! is reproducible from its config file alone.

use anyhow::{anyhow, bail, Context, Result};
use gwlab_core::{OffspringLaw, SimMode};

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Gw,
    Dary,
    HalfLine,
}

impl Mode {
    fn as_str(&self) -> &'static str {
        match self {
            Mode::Gw => "gw",
            Mode::Dary => "d-ary",
            Mode::HalfLine => "half-line",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// `(k, p_k)` pairs in ascending k; gw mode only.
    pub offspring: Vec<(u32, f64)>,
    /// d-ary fan-out.
    pub degree: u32,
    /// Strictly increasing bias grid; a single lambda is a one-point grid.
    pub lambda_grid: Vec<f64>,
    /// Steps per replica.
    pub steps: u64,
    pub replicas: u64,
    pub seed: u64,
    pub censor_buffer: i64,
    pub bootstrap: u32,
    pub fd_step: f64,
    /// Trees per conductance ensemble.
    pub trees: u64,
    /// Starting truncation depth for escape runs.
    pub truncation: u32,
    pub girsanov_h: f64,
    pub horizon: u64,
    /// Trajectories per tree for change-of-measure checks.
    pub trajectories: u64,
    pub alpha_list: Vec<f64>,
    pub nmax: usize,
    pub mmax: u32,
    pub trap_replicas: usize,
    pub threads: usize,
    /// Materialized-vertex guard per replica arena.
    pub vertex_cap: usize,
    /// Also write the raw per-block table.
    pub dump_blocks: bool,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Gw,
            offspring: vec![(0, 0.2), (2, 0.8)],
            degree: 2,
            lambda_grid: vec![1.0],
            steps: 1_000_000,
            replicas: 8,
            seed: 42,
            censor_buffer: 50,
            bootstrap: 2000,
            fd_step: 0.05,
            trees: 200,
            truncation: 8,
            girsanov_h: 0.1,
            horizon: 50,
            trajectories: 2000,
            alpha_list: vec![2.0, 2.5],
            nmax: 25,
            mmax: 4,
            trap_replicas: 1_000_000,
            threads: 0,
            vertex_cap: 100_000_000,
            dump_blocks: false,
            out_dir: "out".to_string(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        let mut saw_lambda = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            let ctx = |what: &str| format!("key `{key}` (line {}): {what}", lineno + 1);
            match key {
                "mode" => {
                    config.mode = match value {
                        "gw" => Mode::Gw,
                        "d-ary" | "dary" => Mode::Dary,
                        "half-line" | "halfline" => Mode::HalfLine,
                        other => bail!(ctx(&format!("unknown mode `{other}`"))),
                    }
                }
                "offspring" => config.offspring = parse_offspring(value).context(ctx(""))?,
                "degree" => config.degree = value.parse().with_context(|| ctx("not an integer"))?,
                "lambda" => {
                    config.lambda_grid =
                        vec![value.parse().with_context(|| ctx("not a number"))?];
                    saw_lambda = true;
                }
                "lambda_grid" => {
                    config.lambda_grid = parse_list(value).with_context(|| ctx(""))?;
                    saw_lambda = true;
                }
                "steps" => config.steps = value.parse().with_context(|| ctx("not an integer"))?,
                "replicas" => {
                    config.replicas = value.parse().with_context(|| ctx("not an integer"))?
                }
                "seed" => config.seed = value.parse().with_context(|| ctx("not an integer"))?,
                "censor_buffer" => {
                    config.censor_buffer = value.parse().with_context(|| ctx("not an integer"))?
                }
                "bootstrap" => {
                    config.bootstrap = value.parse().with_context(|| ctx("not an integer"))?
                }
                "fd_step" => {
                    config.fd_step = value.parse().with_context(|| ctx("not a number"))?
                }
                "trees" => config.trees = value.parse().with_context(|| ctx("not an integer"))?,
                "truncation" => {
                    config.truncation = value.parse().with_context(|| ctx("not an integer"))?
                }
                "girsanov_h" => {
                    config.girsanov_h = value.parse().with_context(|| ctx("not a number"))?
                }
                "horizon" => {
                    config.horizon = value.parse().with_context(|| ctx("not an integer"))?
                }
                "trajectories" => {
                    config.trajectories = value.parse().with_context(|| ctx("not an integer"))?
                }
                "alpha_list" => config.alpha_list = parse_list(value).with_context(|| ctx(""))?,
                "nmax" => config.nmax = value.parse().with_context(|| ctx("not an integer"))?,
                "mmax" => config.mmax = value.parse().with_context(|| ctx("not an integer"))?,
                "trap_replicas" => {
                    config.trap_replicas = value.parse().with_context(|| ctx("not an integer"))?
                }
                "threads" => {
                    config.threads = value.parse().with_context(|| ctx("not an integer"))?
                }
                "vertex_cap" => {
                    config.vertex_cap = value.parse().with_context(|| ctx("not an integer"))?
                }
                "dump_blocks" => {
                    config.dump_blocks = value.parse().with_context(|| ctx("not true/false"))?
                }
                "out_dir" => config.out_dir = value.to_string(),
                other => bail!("unknown key `{other}` (line {})", lineno + 1),
            }
        }
        let _ = saw_lambda;
        config.validate()?;
        Ok(config)
    }

    /// Canonical emission; `parse(emit(c)) == c`.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("mode", self.mode.as_str().to_string());
        push("offspring", emit_offspring(&self.offspring));
        push("degree", self.degree.to_string());
        push(
            "lambda_grid",
            self.lambda_grid
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
        push("steps", self.steps.to_string());
        push("replicas", self.replicas.to_string());
        push("seed", self.seed.to_string());
        push("censor_buffer", self.censor_buffer.to_string());
        push("bootstrap", self.bootstrap.to_string());
        push("fd_step", self.fd_step.to_string());
        push("trees", self.trees.to_string());
        push("truncation", self.truncation.to_string());
        push("girsanov_h", self.girsanov_h.to_string());
        push("horizon", self.horizon.to_string());
        push("trajectories", self.trajectories.to_string());
        push(
            "alpha_list",
            self.alpha_list
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
        push("nmax", self.nmax.to_string());
        push("mmax", self.mmax.to_string());
        push("trap_replicas", self.trap_replicas.to_string());
        push("threads", self.threads.to_string());
        push("vertex_cap", self.vertex_cap.to_string());
        push("dump_blocks", self.dump_blocks.to_string());
        push("out_dir", self.out_dir.clone());
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::Gw {
            // names the offending key through OffspringLaw's message
            OffspringLaw::supercritical(&self.offspring)
                .map_err(|e| anyhow!("key `offspring`: {e}"))?;
        }
        if self.mode == Mode::Dary && self.degree == 0 {
            bail!("key `degree`: must be at least 1");
        }
        if self.lambda_grid.is_empty() {
            bail!("key `lambda`: at least one bias is required");
        }
        if self.lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
            bail!("key `lambda_grid`: grid must be strictly increasing");
        }
        if self.steps < 1_000 {
            bail!("key `steps`: need at least 1000 steps per replica");
        }
        if self.replicas == 0 {
            bail!("key `replicas`: need at least one replica");
        }
        if self.censor_buffer < 0 {
            bail!("key `censor_buffer`: must be non-negative");
        }
        if self.fd_step < 0.0 {
            bail!("key `fd_step`: must be non-negative");
        }
        Ok(())
    }

    /// Tree family this config simulates.
    pub fn sim_mode(&self) -> Result<SimMode> {
        Ok(match self.mode {
            Mode::Gw => SimMode::Gw(
                OffspringLaw::supercritical(&self.offspring)
                    .map_err(|e| anyhow!("key `offspring`: {e}"))?,
            ),
            Mode::Dary => SimMode::Dary(self.degree),
            Mode::HalfLine => SimMode::HalfLine,
        })
    }

    /// Biases outside the transient window fail fast, naming the window.
    pub fn validate_lambdas(&self) -> Result<()> {
        let mode = self.sim_mode()?;
        let mu = mode.mu();
        for &l in &self.lambda_grid {
            if l >= mu {
                let (lo, hi) = mode.ballistic_window();
                bail!(
                    "lambda = {l} is not below mu = {mu}; the ballistic window is ({lo:.6}, {hi:.6})"
                );
            }
        }
        Ok(())
    }
}

fn parse_offspring(value: &str) -> Result<Vec<(u32, f64)>> {
    let inner = value
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| anyhow!("offspring table must look like {{ 0: 0.2, 2: 0.8 }}"))?;
    let mut pairs = Vec::new();
    for item in inner.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (k, p) = item
            .split_once(':')
            .ok_or_else(|| anyhow!("offspring entry `{item}` is not `k: p`"))?;
        let k: u32 = k
            .trim()
            .parse()
            .map_err(|_| anyhow!("offspring key `{}` is not a child count", k.trim()))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| anyhow!("offspring key {k}: probability `{}` is not a number", p.trim()))?;
        pairs.push((k, p));
    }
    if pairs.is_empty() {
        bail!("offspring table is empty");
    }
    pairs.sort_by_key(|&(k, _)| k);
    Ok(pairs)
}

fn emit_offspring(pairs: &[(u32, f64)]) -> String {
    let body = pairs
        .iter()
        .map(|(k, p)| format!("{k}: {p}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!("{{ {body} }}")
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| anyhow!("`{}` is not a number", s.trim()))
        })
        .collect()
}
