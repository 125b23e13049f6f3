//! Replica orchestration.
//!
//! Replicas are embarrassingly parallel: each owns its tree, walk and
//! detector, seeded purely by `(seed, replica_index)`. Results are collected
//! in replica order and reduced single-threaded, so every number below is a
//! pure function of the configuration no matter how rayon schedules the work.

use crate::error::{Error, Result};
use crate::regen::{BlockBuilder, BlockSet, EpisodeStop, NbEpisode, RegenBlock};
use crate::rng::{Purpose, SeedTree};
use crate::tree::SimMode;
use crate::walk::Walker;
use rayon::prelude::*;

/// Sizing of a block-collection run.
#[derive(Debug, Clone, Copy)]
pub struct ReplicaPlan {
    pub replicas: u64,
    pub steps_per_replica: u64,
    pub censor_buffer: i64,
    /// Materialized-vertex guard per replica arena.
    pub vertex_cap: usize,
}

impl ReplicaPlan {
    pub fn new(replicas: u64, steps_per_replica: u64, censor_buffer: i64) -> Self {
        ReplicaPlan {
            replicas,
            steps_per_replica,
            censor_buffer,
            vertex_cap: crate::tree::DEFAULT_VERTEX_CAP,
        }
    }

    pub fn with_vertex_cap(mut self, cap: usize) -> Self {
        self.vertex_cap = cap;
        self
    }
}

/// Pooled i.i.d. blocks from a set of replicas, in replica order.
#[derive(Debug, Clone, Default)]
pub struct CollectedBlocks {
    pub blocks: Vec<RegenBlock>,
    /// Index range of each replica's blocks inside `blocks`.
    pub replica_ranges: Vec<(usize, usize)>,
    pub total_steps: u64,
    pub censored_tail: u64,
    /// Endpoint depth d(Z_n) of each replica, for ratio-vs-endpoint checks.
    pub final_depths: Vec<i64>,
    pub block0_durations: Vec<u64>,
    /// Path accumulators pooled over replicas: sum of P_n and of Q_n.
    pub total_pn: f64,
    pub total_qn: f64,
}

impl CollectedBlocks {
    /// Straight endpoint estimate sum d(Z_n) / sum n, ignoring blocks.
    pub fn endpoint_speed(&self) -> f64 {
        let d: i64 = self.final_depths.iter().sum();
        d as f64 / self.total_steps as f64
    }

    /// Path-level estimate of sigma11 via 2 Q_n / n.
    pub fn sigma11_from_path(&self) -> f64 {
        2.0 * self.total_qn / self.total_steps as f64
    }
}

/// Runs `plan.replicas` independent walks at bias `lambda` on fresh trees and
/// pools their regeneration blocks. Walks run on the unaugmented tree (the
/// root reflects by picking a child uniformly).
pub fn collect_blocks(
    mode: &SimMode,
    lambda: f64,
    plan: &ReplicaPlan,
    seeds: &SeedTree,
) -> Result<CollectedBlocks> {
    collect_blocks_coupled(mode, lambda, plan, seeds, 0)
}

/// As [`collect_blocks`], but with an explicit walk-stream episode so that
/// runs at different biases can share both trees and uniforms (common random
/// numbers) or deliberately avoid doing so.
pub fn collect_blocks_coupled(
    mode: &SimMode,
    lambda: f64,
    plan: &ReplicaPlan,
    seeds: &SeedTree,
    walk_episode: u64,
) -> Result<CollectedBlocks> {
    if lambda >= mode.mu() {
        return Err(Error::Regime(format!(
            "lambda {lambda} is not below mu {}; the walk is not ballistic",
            mode.mu()
        )));
    }
    let per_replica: Vec<Result<(BlockSet, i64, f64, f64)>> = (0..plan.replicas)
        .into_par_iter()
        .map(|replica| {
            let mut arena =
                mode.make_arena_with_cap(seeds, replica, 0, false, plan.vertex_cap)?;
            let config = mode.walk_config(lambda)?;
            let mut walker = Walker::new(&mut arena, config);
            let mut rng = seeds.stream(replica, Purpose::Walk, walk_episode);
            let mut builder = BlockBuilder::new();
            for _ in 0..plan.steps_per_replica {
                let out = walker.step(&mut rng)?;
                builder.push(&out);
            }
            let depth = i64::from(walker.depth());
            let (p, q) = (walker.p_n(), walker.q_n());
            Ok((builder.finish(plan.censor_buffer), depth, p, q))
        })
        .collect();

    let mut out = CollectedBlocks::default();
    for item in per_replica {
        let (set, depth, p, q) = item?;
        let start = out.blocks.len();
        out.blocks.extend(set.blocks.iter().copied());
        out.replica_ranges.push((start, out.blocks.len()));
        out.total_steps += set.total_steps;
        out.censored_tail += set.censored_tail;
        out.final_depths.push(depth);
        out.total_pn += p;
        out.total_qn += q;
        if let Some(b0) = set.block0 {
            out.block0_durations.push(b0.duration);
        }
    }
    for (i, b) in out.blocks.iter_mut().enumerate() {
        b.index = i as u32 + 1;
    }
    Ok(out)
}

/// Draws `count` accepted non-backtracking episodes in parallel.
pub fn collect_nb_episodes(
    mode: &SimMode,
    lambda: f64,
    count: u64,
    censor_buffer: i64,
    stop: EpisodeStop,
    seeds: &SeedTree,
    rejection_cap: u64,
) -> Result<Vec<NbEpisode>> {
    (0..count)
        .into_par_iter()
        .map(|replica| {
            crate::regen::sample_nb_episode(
                mode,
                lambda,
                censor_buffer,
                stop,
                seeds,
                replica,
                rejection_cap,
            )
        })
        .collect()
}

/// Endpoint depths d(Z_n) of `runs` independent walks of length `steps`.
pub fn endpoint_depths(
    mode: &SimMode,
    lambda: f64,
    steps: u64,
    runs: u64,
    seeds: &SeedTree,
) -> Result<Vec<i64>> {
    (0..runs)
        .into_par_iter()
        .map(|replica| {
            let mut arena = mode.make_arena(seeds, replica, 0, false)?;
            let config = mode.walk_config(lambda)?;
            let mut walker = Walker::new(&mut arena, config);
            let mut rng = seeds.stream(replica, Purpose::Walk, 0);
            for _ in 0..steps {
                walker.step(&mut rng)?;
            }
            Ok(i64::from(walker.depth()))
        })
        .collect()
}

/// Runs a closure inside a rayon pool of the requested width (0 keeps the
/// global default). Results stay identical either way; only wall time moves.
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("rayon pool")
            .install(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offspring::OffspringLaw;

    #[test]
    fn collection_is_deterministic_and_replica_ordered() {
        let mode = SimMode::Dary(2);
        let plan = ReplicaPlan::new(4, 20_000, 20);
        let seeds = SeedTree::new(99);
        let a = collect_blocks(&mode, 1.0, &plan, &seeds).unwrap();
        let b = collect_blocks(&mode, 1.0, &plan, &seeds).unwrap();
        assert_eq!(a.blocks.len(), b.blocks.len());
        assert_eq!(a.total_steps, b.total_steps);
        for (x, y) in a.blocks.iter().zip(b.blocks.iter()) {
            assert_eq!(x, y);
        }
        // single-threaded rerun gives the same pooled blocks
        let c = with_pool(1, || collect_blocks(&mode, 1.0, &plan, &seeds).unwrap());
        assert_eq!(a.blocks.len(), c.blocks.len());
        for (x, y) in a.blocks.iter().zip(c.blocks.iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn rejects_recurrent_lambda() {
        let law = OffspringLaw::supercritical(&[(0, 0.2), (2, 0.8)]).unwrap();
        let mode = SimMode::Gw(law);
        let plan = ReplicaPlan::new(1, 100, 10);
        let err = collect_blocks(&mode, 2.5, &plan, &SeedTree::new(1)).unwrap_err();
        assert!(matches!(err, Error::Regime(_)));
    }
}
