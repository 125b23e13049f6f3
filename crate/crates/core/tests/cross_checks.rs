//! Cross-module consistency: the conductance recursion against direct
//! simulation, the non-backtracking sampler against the annealed escape
//! probability, the half-line derivative oracle, and laziness transparency
//! of the tree arena.

use gwlab_core::conductance::{self, EscapeConvention};
use gwlab_core::driver::{self, ReplicaPlan};
use gwlab_core::estimators;
use gwlab_core::regen::{self, EpisodeStop};
use gwlab_core::rng::Purpose;
use gwlab_core::tree::VertexKind;
use gwlab_core::walk::Walker;
use gwlab_core::{stats, OffspringLaw, SeedTree, SimMode, TreeArena, VertexId};

fn leafless_law() -> OffspringLaw {
    OffspringLaw::supercritical(&[(1, 0.5), (2, 0.5)]).unwrap()
}

#[test]
fn conductance_matches_simulated_boundary_hitting() {
    // on 20 fixed trees: P(hit depth N before e*) from the recursion vs the
    // Monte Carlo frequency of the same event
    let mode = SimMode::Gw(leafless_law());
    let seeds = SeedTree::new(60);
    let lambda = 0.8;
    let n_boundary = 16i32;
    let walks = 2_000u64;
    let mut pooled_gap_z = Vec::new();
    for t in 0..20u64 {
        let mut arena = mode.make_arena(&seeds, t, 0, true).unwrap();
        let predicted =
            conductance::escape_probability_truncated(&mut arena, lambda, n_boundary as u32)
                .unwrap();
        let mut hits = 0u64;
        for k in 0..walks {
            let config = mode.walk_config(lambda).unwrap();
            let mut walker = Walker::new(&mut arena, config);
            let mut rng = seeds.stream(t, Purpose::Walk, k);
            loop {
                let out = walker.step(&mut rng).unwrap();
                if out.absorbed {
                    break;
                }
                if out.depth >= n_boundary {
                    hits += 1;
                    break;
                }
            }
        }
        let freq = hits as f64 / walks as f64;
        let sigma = (predicted * (1.0 - predicted) / walks as f64).sqrt();
        let z = (freq - predicted) / sigma;
        assert!(
            z.abs() < 4.0,
            "tree {t}: frequency {freq} vs recursion {predicted} (z = {z:.2})"
        );
        pooled_gap_z.push(z);
    }
    // pooled z-scores should also be centered
    let pooled = stats::mean(&pooled_gap_z);
    assert!(pooled.abs() < 1.0, "pooled z {pooled}");
}

#[test]
fn nb_acceptance_matches_annealed_escape() {
    let mode = SimMode::Gw(leafless_law());
    let seeds = SeedTree::new(61);
    let lambda = 0.5;

    let escape = conductance::annealed_escape(
        &mode,
        lambda,
        600,
        8,
        1e-3,
        100_000_000,
        &seeds,
    )
    .unwrap();

    let episodes = driver::collect_nb_episodes(
        &mode,
        lambda,
        3_000,
        30,
        EpisodeStop::FirstConfirmation,
        &seeds,
        regen::DEFAULT_REJECTION_CAP,
    )
    .unwrap();
    let attempts: u64 = episodes.iter().map(|e| e.rejections + 1).sum();
    let rate = episodes.len() as f64 / attempts as f64;
    let rate_se = (rate * (1.0 - rate) / attempts as f64).sqrt();
    let escape_se = (escape.hi - escape.lo) / (2.0 * 1.96);
    let combined = (rate_se.powi(2) + escape_se.powi(2)).sqrt();
    assert!(
        (rate - escape.escape).abs() < 3.0 * combined + escape.gap.abs(),
        "acceptance rate {rate} vs annealed escape {} (combined SE {combined})",
        escape.escape
    );
}

#[test]
fn half_line_fd_oracle() {
    // speed (1-lambda)/(1+lambda) on the half-line: derivative at 0.5 is
    // -2/(1.5)^2 = -8/9; the walk/block plumbing oracle, not the derivative claim
    let mode = SimMode::HalfLine;
    let seeds = SeedTree::new(62);
    let plan = ReplicaPlan::new(8, 125_000, 20);
    let fd = estimators::finite_difference_derivative(&mode, 0.5, 0.05, &plan, &seeds, 200)
        .unwrap();
    let oracle = -8.0 / 9.0;
    // central-difference bias at h = 0.05 is ~1e-3; allow it on top of the CI
    assert!(
        fd.fd.lo - 5e-3 <= oracle && oracle <= fd.fd.hi + 5e-3,
        "fd [{}, {}] vs {oracle}",
        fd.fd.lo,
        fd.fd.hi
    );

    // degenerate step errors out
    assert!(estimators::finite_difference_derivative(&mode, 0.5, 0.0, &plan, &seeds, 10).is_err());
}

#[test]
fn escape_speed_conventions_agree_on_dary() {
    // both escape conventions reproduce the closed form on the d-ary tree
    let mode = SimMode::Dary(2);
    let seeds = SeedTree::new(63);
    for convention in [EscapeConvention::AugmentedRoot, EscapeConvention::ReflectingRoot] {
        let est = conductance::speed_from_escape_with_convention(
            &mode, 1.0, 30, 1024, &seeds, 30, convention,
        )
        .unwrap();
        assert!(
            (est.point - 1.0 / 3.0).abs() < 1e-6,
            "{convention:?}: {}",
            est.point
        );
    }
}

#[test]
fn laziness_transparency() {
    // same tree seed, same walk seed: pre-materializing part of the tree
    // before walking cannot change the trace
    let law = OffspringLaw::supercritical(&[(0, 0.2), (2, 0.8)]).unwrap();
    let seeds = SeedTree::new(64);
    let key = seeds.tree_root_key(5, 0);

    let walk_depths = |arena: &mut TreeArena| -> Vec<i32> {
        let config = SimMode::Gw(law.clone()).walk_config(1.0).unwrap();
        let mut walker = Walker::new(arena, config);
        let mut rng = seeds.stream(5, Purpose::Walk, 0);
        (0..20_000)
            .map(|_| walker.step(&mut rng).unwrap().depth)
            .collect()
    };

    // walk on a fresh arena
    let mut fresh = TreeArena::conditioned(&law, key, false, 10_000_000).unwrap();
    let trace_fresh = walk_depths(&mut fresh);

    // pre-materialize a breadth-first prefix, then walk
    let mut warmed = TreeArena::conditioned(&law, key, false, 10_000_000).unwrap();
    let mut frontier = vec![warmed.root()];
    for _ in 0..8 {
        let mut next = Vec::new();
        for v in frontier {
            if warmed.kind(v) == VertexKind::Trap {
                continue;
            }
            next.extend(
                warmed
                    .children(v)
                    .unwrap()
                    .to_vec()
                    .into_iter()
                    .map(VertexId),
            );
        }
        frontier = next;
    }
    let trace_warmed = walk_depths(&mut warmed);
    assert_eq!(trace_fresh, trace_warmed);
}

#[test]
fn moment_diagnostics_stability_band() {
    // spec example: {0:0.2, 2:0.8} at lambda = 1, alpha = 2: the half-sample
    // stability ratio sits in [0.5, 2]
    let law = OffspringLaw::supercritical(&[(0, 0.2), (2, 0.8)]).unwrap();
    let mode = SimMode::Gw(law);
    let seeds = SeedTree::new(65);
    let plan = ReplicaPlan::new(4, 200_000, 50);
    let rows =
        estimators::uniform_moment_diagnostics(&mode, &[1.0], &[2.0], &plan, &seeds).unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert!(
        row.stability_ratio > 0.5 && row.stability_ratio < 2.0,
        "stability ratio {}",
        row.stability_ratio
    );
    // deterministic trees: tiny stable moments
    let rows = estimators::uniform_moment_diagnostics(
        &SimMode::Dary(2),
        &[1.0],
        &[2.0, 2.5],
        &ReplicaPlan::new(4, 100_000, 20),
        &seeds,
    )
    .unwrap();
    for row in rows {
        assert!(row.stability_ratio > 0.5 && row.stability_ratio < 2.0);
        assert!(row.max_duration < 1_000);
    }
}

#[test]
fn block_duration_autocorrelation_is_flat() {
    // i.i.d. blocks: lag-1 autocorrelation within the 3 sigma band around 0
    let mode = SimMode::Gw(OffspringLaw::supercritical(&[(0, 0.2), (2, 0.8)]).unwrap());
    let seeds = SeedTree::new(66);
    let plan = ReplicaPlan::new(4, 500_000, 50);
    let collected = driver::collect_blocks(&mode, 1.0, &plan, &seeds).unwrap();
    for &(a, b) in &collected.replica_ranges {
        let durations: Vec<f64> = collected.blocks[a..b]
            .iter()
            .map(|blk| blk.duration as f64)
            .collect();
        let rho = stats::lag1_autocorrelation(&durations);
        let band = 3.0 / (durations.len() as f64).sqrt();
        assert!(rho.abs() < band, "lag-1 rho {rho} outside +-{band}");
    }
}
