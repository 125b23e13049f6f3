//! Escape probabilities through effective conductances.
//!
//! The electric network of the walk puts conductance `lambda^-(k-1)` on the
//! edge whose deeper endpoint sits at depth k, so parent and child edges at
//! any vertex carry the ratio lambda : 1. The recursion below works with the
//! dimensionless ratio `beta(v) = C_eff(v) / c(parent edge of v)`, which obeys
//!
//!   beta(v) = (1/lambda) * sum over children u of beta(u) / (1 + beta(u)),
//!
//! with beta = infinity on the truncation boundary and 0 on dead ends. Betas
//! stay within `[0, max children / lambda]`, so no over- or underflow occurs
//! at any truncation depth, and the probability of hitting depth N before the
//! augmented root is `beta(e) / (1 + beta(e))`. Every operation in the fold
//! is monotone, so truncation monotonicity in N and Rayleigh monotonicity in
//! lambda hold exactly in floating point, not just in the limit.

use crate::error::{Error, Result};
use crate::offspring::OffspringLaw;
use crate::rng::{Purpose, SeedTree};
use crate::stats::{self, Estimate};
use crate::tree::{SimMode, TreeArena, VertexId};
use rand::Rng;
use rayon::prelude::*;

pub const DEFAULT_GAP_TOL: f64 = 1e-3;
pub const MAX_TRUNCATION: u32 = 1 << 14;

/// One annealed escape evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EscapeEstimate {
    pub lambda: f64,
    pub n: u32,
    pub escape: f64,
    pub lo: f64,
    pub hi: f64,
    /// Ensemble-average drop from the previous truncation depth.
    pub gap: f64,
}

fn ratio(beta: f64) -> f64 {
    if beta.is_infinite() {
        1.0
    } else {
        beta / (1.0 + beta)
    }
}

/// Quenched probability of hitting depth `n` before the augmented root, from
/// the true root. Decreases to the escape probability as `n` grows.
pub fn escape_probability_truncated(
    arena: &mut TreeArena,
    lambda: f64,
    n: u32,
) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::Domain(format!("lambda {lambda} must be positive")));
    }
    if let Some(d) = arena.regular_fanout() {
        // regular tree: one beta per depth
        let mut beta = f64::INFINITY;
        for _ in 0..n {
            beta = f64::from(d) / lambda * ratio(beta);
        }
        return Ok(ratio(beta));
    }
    let root = arena.root();
    let beta = beta_subtree(arena, root, n as i32, lambda)?;
    Ok(ratio(beta))
}

/// Post-order fold of the beta recursion below `start`, truncated at absolute
/// depth `boundary`.
fn beta_subtree(
    arena: &mut TreeArena,
    start: VertexId,
    boundary: i32,
    lambda: f64,
) -> Result<f64> {
    enum Frame {
        Enter(VertexId),
        Exit(VertexId),
    }
    let mut betas: Vec<f64> = Vec::new();
    let mut stack = vec![Frame::Enter(start)];
    let store = |betas: &mut Vec<f64>, v: VertexId, value: f64| {
        let idx = v.0 as usize;
        if betas.len() <= idx {
            betas.resize(idx + 1, f64::NAN);
        }
        betas[idx] = value;
    };
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(v) => {
                if arena.depth(v) >= boundary {
                    store(&mut betas, v, f64::INFINITY);
                    continue;
                }
                let kids = arena.children(v)?;
                if kids.is_empty() {
                    store(&mut betas, v, 0.0);
                    continue;
                }
                let kids: Vec<u32> = kids.to_vec();
                stack.push(Frame::Exit(v));
                for c in kids {
                    stack.push(Frame::Enter(VertexId(c)));
                }
            }
            Frame::Exit(v) => {
                let kids: Vec<u32> = arena.children(v)?.to_vec();
                let mut acc = 0.0;
                for c in kids {
                    acc += ratio(betas[c as usize]);
                }
                store(&mut betas, v, acc / lambda);
            }
        }
    }
    Ok(betas[start.0 as usize])
}

/// Escape probabilities along an increasing bias grid on each of `trees`
/// sampled trees; any increase beyond 1e-12 is a violation.
#[derive(Debug, Clone)]
pub struct RayleighCheck {
    /// Per tree, the escape probability at each grid bias.
    pub table: Vec<Vec<f64>>,
    pub violations: usize,
    pub max_violation: f64,
}

pub fn rayleigh_monotonicity_check(
    mode: &SimMode,
    lambda_grid: &[f64],
    trees: u64,
    n: u32,
    seeds: &SeedTree,
) -> Result<RayleighCheck> {
    if lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("lambda grid must be strictly increasing".into()));
    }
    let table: Vec<Result<Vec<f64>>> = (0..trees)
        .into_par_iter()
        .map(|t| {
            let mut arena = mode.make_arena(seeds, t, 0, false)?;
            lambda_grid
                .iter()
                .map(|&l| escape_probability_truncated(&mut arena, l, n))
                .collect()
        })
        .collect();
    let mut out = RayleighCheck {
        table: Vec::with_capacity(trees as usize),
        violations: 0,
        max_violation: 0.0,
    };
    for row in table {
        let row = row?;
        for w in row.windows(2) {
            let rise = w[1] - w[0];
            if rise > 1e-12 {
                out.violations += 1;
                out.max_violation = out.max_violation.max(rise);
            }
        }
        out.table.push(row);
    }
    Ok(out)
}

/// Tree-averaged escape probability with truncation doubling until the
/// ensemble average settles within `tol`.
pub fn annealed_escape(
    mode: &SimMode,
    lambda: f64,
    trees: u64,
    n_start: u32,
    tol: f64,
    vertex_cap: usize,
    seeds: &SeedTree,
) -> Result<EscapeEstimate> {
    // The continuity statement lives on (lambda_c, mu), but the escape
    // probability itself is defined for any positive bias below mu; smaller
    // biases are allowed as diagnostic points.
    if lambda <= 0.0 || lambda >= mode.mu() {
        return Err(Error::Regime(format!(
            "lambda {lambda} outside the transient range (0, {})",
            mode.mu()
        )));
    }
    let mut arenas: Vec<TreeArena> = (0..trees)
        .map(|t| mode.make_arena_with_cap(seeds, t, 0, false, vertex_cap))
        .collect::<Result<_>>()?;
    let mut n = n_start.max(2);
    let mut prev_avg: Option<f64> = None;
    loop {
        let escapes: Vec<f64> = arenas
            .par_iter_mut()
            .map(|a| escape_probability_truncated(a, lambda, n))
            .collect::<Result<_>>()?;
        // a single tree (or a deterministic mode) has no ensemble variance
        let ci = if escapes.len() < 2 {
            stats::Estimate::degenerate(escapes[0])
        } else {
            stats::normal_ci(&escapes, 1.96)
        };
        let gap = prev_avg.map(|p| p - ci.point);
        match gap {
            Some(g) if g.abs() < tol => {
                return Ok(EscapeEstimate {
                    lambda,
                    n,
                    escape: ci.point,
                    lo: ci.lo,
                    hi: ci.hi,
                    gap: g,
                });
            }
            _ => {}
        }
        if n >= MAX_TRUNCATION {
            return Err(Error::Convergence(format!(
                "escape average still moving by {:?} at truncation {n}",
                gap
            )));
        }
        prev_avg = Some(ci.point);
        n *= 2;
    }
}

/// Which escape probability feeds the speed representation: from the root
/// with the absorbing augmented parent attached (the convention that
/// reproduces the d-ary closed form), or the no-return probability at the
/// reflecting root of the bare tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EscapeConvention {
    #[default]
    AugmentedRoot,
    ReflectingRoot,
}

/// Escape probability under the chosen convention. For the reflecting-root
/// variant: the walk at the bare root picks a child uniformly, so the
/// no-return probability is the mean of the children's one-way ratios.
pub fn escape_probability_with_convention(
    arena: &mut TreeArena,
    lambda: f64,
    n: u32,
    convention: EscapeConvention,
) -> Result<f64> {
    match convention {
        EscapeConvention::AugmentedRoot => escape_probability_truncated(arena, lambda, n),
        EscapeConvention::ReflectingRoot => {
            if lambda <= 0.0 {
                return Err(Error::Domain(format!("lambda {lambda} must be positive")));
            }
            if let Some(d) = arena.regular_fanout() {
                let mut beta = f64::INFINITY;
                for _ in 0..n.saturating_sub(1) {
                    beta = f64::from(d) / lambda * ratio(beta);
                }
                return Ok(ratio(beta));
            }
            let root = arena.root();
            let kids: Vec<u32> = arena.children(root)?.to_vec();
            let mut acc = 0.0;
            for c in kids.iter() {
                let beta = beta_subtree(arena, VertexId(*c), n as i32, lambda)?;
                acc += ratio(beta);
            }
            Ok(acc / kids.len() as f64)
        }
    }
}

/// Plug-in speed from the escape-probability representation on leafless
/// trees: ratio of the two population means over `(xi, escape samples)`.
pub fn speed_from_escape(
    mode: &SimMode,
    lambda: f64,
    samples: u64,
    n_trunc: u32,
    seeds: &SeedTree,
    resamples: u32,
) -> Result<Estimate> {
    speed_from_escape_with_convention(
        mode,
        lambda,
        samples,
        n_trunc,
        seeds,
        resamples,
        EscapeConvention::AugmentedRoot,
    )
}

pub fn speed_from_escape_with_convention(
    mode: &SimMode,
    lambda: f64,
    samples: u64,
    n_trunc: u32,
    seeds: &SeedTree,
    resamples: u32,
    convention: EscapeConvention,
) -> Result<Estimate> {
    if lambda <= 0.0 || lambda >= mode.mu() {
        return Err(Error::Regime(format!(
            "lambda {lambda} outside (0, mu = {})",
            mode.mu()
        )));
    }
    if let SimMode::Gw(law) = mode {
        if law.prob(0) > 0.0 {
            return Err(Error::Domain(
                "the escape-representation speed needs a leafless law (p0 = 0)".into(),
            ));
        }
    }
    if matches!(mode, SimMode::HalfLine) {
        return Err(Error::Domain(
            "half-line mode is not a GW law; use d-ary or a leafless law".into(),
        ));
    }

    let terms: Vec<Result<(f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeds.stream(s, Purpose::Aux, 3);
            let xi = match mode {
                SimMode::Gw(law) => law.sample(&mut rng),
                SimMode::Dary(d) => *d,
                SimMode::HalfLine => unreachable!(),
            };
            let mut escapes = Vec::with_capacity(xi as usize + 1);
            for i in 0..=u64::from(xi) {
                let mut arena = mode.make_arena(seeds, s, i + 1, true)?;
                escapes.push(escape_probability_with_convention(
                    &mut arena, lambda, n_trunc, convention,
                )?);
            }
            let sum: f64 = escapes.iter().sum();
            let denom = lambda - 1.0 + sum;
            let p0 = escapes[0];
            let xi = f64::from(xi);
            Ok(((xi - lambda) * p0 / denom, (xi + lambda) * p0 / denom))
        })
        .collect();

    let mut nums = Vec::with_capacity(samples as usize);
    let mut dens = Vec::with_capacity(samples as usize);
    for t in terms {
        let (n, d) = t?;
        nums.push(n);
        dens.push(d);
    }
    let point = stats::mean(&nums) / stats::mean(&dens);
    let n = nums.len();
    let boot: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeds.stream(u64::from(b), Purpose::Bootstrap, 9004);
            let mut sn = 0.0;
            let mut sd = 0.0;
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                sn += nums[i];
                sd += dens[i];
            }
            sn / sd
        })
        .collect();
    Ok(stats::percentile_interval(boot, point, 0.95))
}

/// Explicit speed lower bound for `lambda` in `(1, mu)`.
#[derive(Debug, Clone, Copy)]
pub struct LowerBound {
    pub q_lambda: f64,
    pub bound: f64,
}

/// Solves `f(1 - (1 - q)/lambda) = q` for its smallest non-negative root by
/// monotone fixed-point iteration from 0 and returns
/// `(1 - 1/lambda)^3 (1 - q)^2 / 12`.
pub fn speed_lower_bound(law: &OffspringLaw, lambda: f64) -> Result<LowerBound> {
    if lambda <= 1.0 {
        return Err(Error::Domain(format!(
            "the lower bound needs lambda > 1, got {lambda}"
        )));
    }
    if lambda >= law.mean() {
        return Err(Error::Regime(format!(
            "lambda {lambda} is not below mu {}",
            law.mean()
        )));
    }
    let mut q = 0.0f64;
    for _ in 0..1_000_000 {
        let next = law.pgf(1.0 - (1.0 - q) / lambda)?;
        if (next - q).abs() < 1e-14 {
            q = next;
            break;
        }
        q = next;
    }
    let bound = (1.0 - 1.0 / lambda).powi(3) * (1.0 - q) * (1.0 - q) / 12.0;
    Ok(LowerBound { q_lambda: q, bound })
}
