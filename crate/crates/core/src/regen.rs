//! Regeneration structure of walk paths.
//!
//! A time n is a regeneration time when the depth at n strictly exceeds every
//! earlier depth and every later depth stays above the depth at n-1. The
//! detector below runs in one pass: each fresh depth record opens a candidate
//! and a candidate dies as soon as the walk dips below its level. Candidates
//! whose level is within `censor_buffer` of the final running maximum are
//! censored rather than confirmed, which bounds the false-confirmation
//! probability by the chance of backtracking `censor_buffer` levels.
//!
//! Block statistics are accumulated per candidate segment while stepping, so
//! confirmed blocks come out of the same pass with no retained trace.

use crate::error::{Error, Result};
use crate::rng::{Purpose, SeedTree};
use crate::tree::{SimMode, TreeArena};
use crate::walk::{StepOutcome, StepRecord, WalkConfig, Walker};

pub const DEFAULT_CENSOR_BUFFER: i64 = 50;
pub const DEFAULT_REJECTION_CAP: u64 = 10_000;

/// One i.i.d. regeneration block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegenBlock {
    /// Ordinal among the pooled blocks (1 = the block starting at tau_1).
    pub index: u32,
    pub duration: u64,
    pub displacement: i64,
    /// Sum of B over the block's steps.
    pub b_sum: f64,
    /// Sum of B^2 over the block's steps.
    pub b2_sum: f64,
    /// Number of excursions off the backbone.
    pub excursions: u64,
    /// Steps touching a trap vertex.
    pub trap_time: u64,
}

/// The pre-regeneration piece `[0, tau_1)`; kept separate because its law is
/// not that of the i.i.d. blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockZero {
    pub duration: u64,
    pub displacement: i64,
    pub b_sum: f64,
    pub b2_sum: f64,
    pub excursions: u64,
    pub trap_time: u64,
}

/// Everything one pass over a path yields.
#[derive(Debug, Clone, Default)]
pub struct BlockSet {
    pub block0: Option<BlockZero>,
    pub blocks: Vec<RegenBlock>,
    /// Steps after the last confirmed regeneration (and under censored
    /// candidates).
    pub censored_tail: u64,
    pub total_steps: u64,
    /// Confirmed regeneration times tau_1, tau_2, ...
    pub confirmed_times: Vec<u64>,
    pub confirmed_levels: Vec<i64>,
    pub censored_candidates: usize,
    pub note: Option<String>,
}

impl BlockSet {
    /// Conservation identity: block 0 + blocks + censored tail = total.
    pub fn accounted_steps(&self) -> u64 {
        self.accounted_steps_without_tail() + self.censored_tail
    }

    fn accounted_steps_without_tail(&self) -> u64 {
        self.block0.map_or(0, |b| b.duration)
            + self.blocks.iter().map(|b| b.duration).sum::<u64>()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Segment {
    start_time: u64,
    level: i64,
    b_sum: f64,
    b2_sum: f64,
    excursions: u64,
    trap_time: u64,
}

/// Streaming regeneration detector and block accumulator.
#[derive(Debug, Clone)]
pub struct BlockBuilder {
    time: u64,
    depth: i64,
    max_depth: i64,
    segments: Vec<Segment>,
}

impl BlockBuilder {
    /// Starts at depth 0 (the root).
    pub fn new() -> Self {
        BlockBuilder {
            time: 0,
            depth: 0,
            max_depth: 0,
            segments: vec![Segment::default()],
        }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Level of the earliest surviving candidate, if any.
    pub fn first_candidate_level(&self) -> Option<i64> {
        (self.segments.len() > 1).then(|| self.segments[1].level)
    }

    pub fn max_depth(&self) -> i64 {
        self.max_depth
    }

    /// True once the earliest candidate's level is at least `buffer` below
    /// the running maximum, i.e. the first regeneration is confirmed under
    /// the censoring rule.
    pub fn first_regen_confirmed(&self, buffer: i64) -> bool {
        self.first_candidate_level()
            .is_some_and(|level| level <= self.max_depth - buffer)
    }

    /// Feeds one step of the walk.
    pub fn push(&mut self, out: &StepOutcome) {
        self.push_parts(
            i64::from(out.depth),
            out.b,
            out.entered_trap,
            out.touches_trap,
        )
    }

    /// Depth-only feed for paths without walk bookkeeping.
    pub fn push_depth(&mut self, depth: i64) {
        self.push_parts(depth, 0.0, false, false)
    }

    fn push_parts(&mut self, depth: i64, b: f64, entered_trap: bool, touches_trap: bool) {
        debug_assert_eq!((depth - self.depth).abs(), 1, "non-nearest-neighbour step");
        self.time += 1;
        // the step into time t belongs to the segment that was open at t - 1
        let top = self.segments.last_mut().expect("base segment always there");
        top.b_sum += b;
        top.b2_sum += b * b;
        top.excursions += u64::from(entered_trap);
        top.trap_time += u64::from(touches_trap);
        self.depth = depth;

        if depth > self.max_depth {
            // strict record: a new candidate regeneration at this level
            self.max_depth = depth;
            self.segments.push(Segment {
                start_time: self.time,
                level: depth,
                ..Segment::default()
            });
        } else {
            // kill candidates whose level the walk has now dipped below
            while self.segments.len() > 1 && depth < self.segments.last().unwrap().level {
                let dead = self.segments.pop().unwrap();
                let prev = self.segments.last_mut().unwrap();
                prev.b_sum += dead.b_sum;
                prev.b2_sum += dead.b2_sum;
                prev.excursions += dead.excursions;
                prev.trap_time += dead.trap_time;
            }
        }
    }

    /// Applies the censoring rule and closes the pass.
    pub fn finish(mut self, censor_buffer: i64) -> BlockSet {
        let threshold = self.max_depth - censor_buffer;
        // candidates with level above the threshold are censored; they are a
        // suffix of the stack because levels increase along it
        let mut censored = 0usize;
        while self.segments.len() > 1 && self.segments.last().unwrap().level > threshold {
            self.segments.pop();
            censored += 1;
        }
        // segments now: [base, c_1, ..., c_m] with every c_i confirmed; the
        // block between tau_i and tau_{i+1} is exactly segment c_i, and the
        // last confirmed candidate opens the censored tail
        let segs = std::mem::take(&mut self.segments);
        let total = self.time;

        let mut set = BlockSet {
            total_steps: total,
            censored_candidates: censored,
            ..BlockSet::default()
        };
        if segs.len() > 1 {
            let base = &segs[0];
            set.block0 = Some(BlockZero {
                duration: segs[1].start_time,
                displacement: segs[1].level,
                b_sum: base.b_sum,
                b2_sum: base.b2_sum,
                excursions: base.excursions,
                trap_time: base.trap_time,
            });
            for i in 1..segs.len() {
                set.confirmed_times.push(segs[i].start_time);
                set.confirmed_levels.push(segs[i].level);
                if i + 1 < segs.len() {
                    set.blocks.push(RegenBlock {
                        index: i as u32,
                        duration: segs[i + 1].start_time - segs[i].start_time,
                        displacement: segs[i + 1].level - segs[i].level,
                        b_sum: segs[i].b_sum,
                        b2_sum: segs[i].b2_sum,
                        excursions: segs[i].excursions,
                        trap_time: segs[i].trap_time,
                    });
                }
            }
        }
        set.censored_tail = total - set.accounted_steps_without_tail();
        if set.confirmed_times.len() < 3 {
            set.note = Some(format!(
                "only {} confirmed regeneration times; blocks not usable",
                set.confirmed_times.len()
            ));
        }
        set
    }
}

impl Default for BlockBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Confirmed and censored regeneration times of a depth path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectResult {
    pub confirmed: Vec<u64>,
    pub censored: Vec<u64>,
}

/// Single-pass regeneration detection over an explicit depth sequence
/// (`depths[0]` is the position at time 0).
pub fn detect_regenerations(depths: &[i64], censor_buffer: i64) -> Result<DetectResult> {
    if depths.is_empty() {
        return Ok(DetectResult {
            confirmed: vec![],
            censored: vec![],
        });
    }
    for w in depths.windows(2) {
        if (w[1] - w[0]).abs() != 1 {
            return Err(Error::Domain(format!(
                "depth sequence is not nearest-neighbour at {} -> {}",
                w[0], w[1]
            )));
        }
    }
    let mut max_depth = depths[0];
    // (time, level) candidate stack
    let mut stack: Vec<(u64, i64)> = Vec::new();
    for (t, &d) in depths.iter().enumerate().skip(1) {
        if d > max_depth {
            max_depth = d;
            stack.push((t as u64, d));
        } else {
            while stack.last().is_some_and(|&(_, level)| d < level) {
                stack.pop();
            }
        }
    }
    let threshold = max_depth - censor_buffer;
    let mut confirmed = Vec::new();
    let mut censored = Vec::new();
    for (t, level) in stack {
        if level <= threshold {
            confirmed.push(t);
        } else {
            censored.push(t);
        }
    }
    Ok(DetectResult {
        confirmed,
        censored,
    })
}

/// Offline block extraction from a retained step log and detected times;
/// cross-checks the streaming path on small runs. Returns an empty set with
/// a note when fewer than 3 times are confirmed.
pub fn extract_blocks(
    start_depth: i64,
    records: &[StepRecord],
    detection: &DetectResult,
    lambda: f64,
) -> BlockSet {
    let times = &detection.confirmed;
    let mut set = BlockSet {
        total_steps: records.len() as u64,
        ..BlockSet::default()
    };
    if times.len() < 3 {
        set.note = Some(format!(
            "only {} confirmed regeneration times; blocks not usable",
            times.len()
        ));
        set.censored_tail = set.total_steps;
        return set;
    }

    let depth_at = |t: u64| -> i64 {
        if t == 0 {
            start_depth
        } else {
            i64::from(records[t as usize - 1].depth_after)
        }
    };
    let stats_between = |a: u64, b: u64| -> (f64, f64, u64, u64) {
        let mut b_sum = 0.0;
        let mut b2_sum = 0.0;
        let mut exc = 0u64;
        let mut trap = 0u64;
        for r in &records[a as usize..b as usize] {
            let bv = crate::walk::b_value(r.from_rootless, r.nu_from, lambda, r.mv);
            b_sum += bv;
            b2_sum += bv * bv;
            exc += u64::from(
                r.from_kind == crate::tree::VertexKind::Backbone
                    && r.to_kind == crate::tree::VertexKind::Trap,
            );
            trap += u64::from(
                r.from_kind == crate::tree::VertexKind::Trap
                    || r.to_kind == crate::tree::VertexKind::Trap,
            );
        }
        (b_sum, b2_sum, exc, trap)
    };

    let tau1 = times[0];
    let (b, b2, exc, trap) = stats_between(0, tau1);
    set.block0 = Some(BlockZero {
        duration: tau1,
        displacement: depth_at(tau1) - start_depth,
        b_sum: b,
        b2_sum: b2,
        excursions: exc,
        trap_time: trap,
    });
    for i in 0..times.len() - 1 {
        let (a, bt) = (times[i], times[i + 1]);
        let (b, b2, exc, trap) = stats_between(a, bt);
        set.blocks.push(RegenBlock {
            index: i as u32 + 1,
            duration: bt - a,
            displacement: depth_at(bt) - depth_at(a),
            b_sum: b,
            b2_sum: b2,
            excursions: exc,
            trap_time: trap,
        });
    }
    set.confirmed_times = times.clone();
    set.confirmed_levels = times.iter().map(|&t| depth_at(t)).collect();
    set.censored_tail = set.total_steps - times[times.len() - 1];
    set
}

/// One accepted non-backtracking episode.
#[derive(Debug, Clone)]
pub struct NbEpisode {
    /// First confirmed regeneration time.
    pub tau1: u64,
    /// Depth at tau_1.
    pub depth_tau1: i64,
    /// Rejected episodes before this one was accepted.
    pub rejections: u64,
    /// Blocks of the full horizon run (when `run_to_horizon` was requested).
    pub blocks: Option<BlockSet>,
}

/// How far to run an accepted episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeStop {
    /// Stop as soon as the first regeneration is confirmed.
    FirstConfirmation,
    /// Keep walking to the horizon and return the block decomposition.
    Horizon(u64),
}

/// Samples one episode of the walk conditioned on never returning to the
/// augmented root, by rejection: fresh tree and walk per attempt, discarded
/// whenever the walk is absorbed at `e*` before its first regeneration is
/// confirmed beyond the censor buffer.
pub fn sample_nb_episode(
    mode: &SimMode,
    lambda: f64,
    censor_buffer: i64,
    stop: EpisodeStop,
    seeds: &SeedTree,
    replica: u64,
    rejection_cap: u64,
) -> Result<NbEpisode> {
    if lambda >= mode.mu() {
        return Err(Error::Regime(format!(
            "lambda {lambda} is not below mu {}; the walk is not transient",
            mode.mu()
        )));
    }
    let attempt_horizon = match stop {
        EpisodeStop::FirstConfirmation => u64::MAX,
        EpisodeStop::Horizon(n) => n,
    };
    let mut rejections = 0u64;
    loop {
        if rejections >= rejection_cap {
            return Err(Error::RejectionCap { rejections });
        }
        let episode = rejections;
        let mut arena = mode.make_arena(seeds, replica, episode, true)?;
        let config = mode.walk_config(lambda)?;
        let mut walker = Walker::new(&mut arena, config);
        let mut rng = seeds.stream(replica, Purpose::Walk, episode);
        let mut builder = BlockBuilder::new();
        let mut confirmed = false;
        let mut absorbed_early = false;

        while builder.time() < attempt_horizon {
            let out = walker.step(&mut rng)?;
            if out.absorbed {
                absorbed_early = !confirmed;
                break;
            }
            builder.push(&out);
            if !confirmed && builder.first_regen_confirmed(censor_buffer) {
                confirmed = true;
                if stop == EpisodeStop::FirstConfirmation {
                    break;
                }
            }
        }

        if absorbed_early || !confirmed {
            rejections += 1;
            continue;
        }

        let set = builder.finish(censor_buffer);
        let (tau1, depth_tau1) = match (set.confirmed_times.first(), set.confirmed_levels.first())
        {
            (Some(&t), Some(&l)) => (t, l),
            _ => {
                rejections += 1;
                continue;
            }
        };
        let blocks = matches!(stop, EpisodeStop::Horizon(_)).then_some(set);
        return Ok(NbEpisode {
            tau1,
            depth_tau1,
            rejections,
            blocks,
        });
    }
}

/// Runs a plain walk for `steps` steps on the given arena and returns its
/// block decomposition.
pub fn run_blocks_on(
    arena: &mut TreeArena,
    config: WalkConfig,
    steps: u64,
    censor_buffer: i64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<BlockSet> {
    let mut walker = Walker::new(arena, config);
    let mut builder = BlockBuilder::new();
    for _ in 0..steps {
        let out = walker.step(rng)?;
        builder.push(&out);
        if out.absorbed {
            break;
        }
    }
    Ok(builder.finish(censor_buffer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offspring::OffspringLaw;
    use rand::Rng;

    /// Literal two-condition checker straight from the definition, restricted
    /// to the observed horizon, with the same censoring rule.
    fn brute_force(depths: &[i64], buffer: i64) -> DetectResult {
        let max_depth = *depths.iter().max().unwrap();
        let mut confirmed = Vec::new();
        let mut censored = Vec::new();
        for n in 1..depths.len() {
            let record = depths[..n].iter().all(|&d| d < depths[n]);
            if !record {
                continue;
            }
            let holds = depths[n + 1..].iter().all(|&d| d > depths[n - 1]);
            if !holds {
                continue;
            }
            if depths[n] <= max_depth - buffer {
                confirmed.push(n as u64);
            } else {
                censored.push(n as u64);
            }
        }
        DetectResult {
            confirmed,
            censored,
        }
    }

    #[test]
    fn monotone_path_confirms_everything_below_buffer() {
        let depths: Vec<i64> = (0..=20).collect();
        let got = detect_regenerations(&depths, 5).unwrap();
        assert_eq!(got.confirmed, (1..=15).collect::<Vec<u64>>());
        assert_eq!(got.censored, (16..=20).collect::<Vec<u64>>());
    }

    #[test]
    fn spec_example_path() {
        // depths (0,1,2,1,2,3): candidate at 2 killed by the dip, candidate
        // at 5 censored at the horizon, time 1 confirmed
        let depths = vec![0, 1, 2, 1, 2, 3];
        let got = detect_regenerations(&depths, 1).unwrap();
        assert_eq!(got.confirmed, vec![1]);
        assert_eq!(got.censored, vec![5]);
        assert_eq!(got, brute_force(&depths, 1));
    }

    #[test]
    fn rejects_non_nearest_neighbour() {
        assert!(detect_regenerations(&[0, 2, 3], 0).is_err());
    }

    #[test]
    fn detector_matches_brute_force_on_random_paths() {
        let st = SeedTree::new(31);
        for rep in 0..200 {
            let mut rng = st.stream(rep, Purpose::Aux, 0);
            let p: f64 = 0.5 + 0.2 * rng.gen::<f64>();
            let mut depths = vec![0i64];
            for _ in 0..2_000 {
                let d = *depths.last().unwrap();
                let up = d == 0 || rng.gen::<f64>() < p;
                depths.push(if up { d + 1 } else { d - 1 });
            }
            for buffer in [0, 3, 17] {
                let got = detect_regenerations(&depths, buffer).unwrap();
                let want = brute_force(&depths, buffer);
                assert_eq!(got, want, "rep {rep} buffer {buffer}");
            }
        }
    }

    #[test]
    fn censoring_never_adds_confirmations() {
        let st = SeedTree::new(32);
        for rep in 0..50 {
            let mut rng = st.stream(rep, Purpose::Aux, 0);
            let mut depths = vec![0i64];
            for _ in 0..3_000 {
                let d = *depths.last().unwrap();
                let up = d == 0 || rng.gen::<f64>() < 0.6;
                depths.push(if up { d + 1 } else { d - 1 });
            }
            let mut prev: Option<usize> = None;
            for buffer in [0, 1, 2, 5, 10, 50] {
                let got = detect_regenerations(&depths, buffer).unwrap();
                if let Some(p) = prev {
                    assert!(got.confirmed.len() <= p);
                }
                prev = Some(got.confirmed.len());
            }
        }
    }

    #[test]
    fn builder_blocks_match_detector_and_conserve_time() {
        let law = OffspringLaw::supercritical(&[(0, 0.2), (2, 0.8)]).unwrap();
        let mode = SimMode::Gw(law);
        let st = SeedTree::new(33);
        let mut arena = mode.make_arena(&st, 0, 0, false).unwrap();
        let config = mode.walk_config(1.0).unwrap().with_log();
        let mut walker = Walker::new(&mut arena, config);
        let mut rng = st.stream(0, Purpose::Walk, 0);
        let mut builder = BlockBuilder::new();
        let mut depths = vec![0i64];
        let n = 30_000u64;
        for _ in 0..n {
            let out = walker.step(&mut rng).unwrap();
            builder.push(&out);
            depths.push(i64::from(out.depth));
        }
        let set = builder.finish(DEFAULT_CENSOR_BUFFER);

        // conservation
        assert_eq!(set.accounted_steps(), n);
        assert_eq!(set.total_steps, n);

        // same times as the pure detector
        let det = detect_regenerations(&depths, DEFAULT_CENSOR_BUFFER).unwrap();
        assert_eq!(set.confirmed_times, det.confirmed);
        assert!(set.blocks.len() >= 3, "blocks: {}", set.blocks.len());

        // block invariants
        for b in &set.blocks {
            assert!(b.duration >= 1);
            assert!(b.displacement >= 1);
            assert!(b.displacement <= b.duration as i64);
            assert!(b.trap_time < b.duration);
        }

        // b_sum recomputation from the retained log
        let log = walker.step_log();
        let tau = &set.confirmed_times;
        for (i, b) in set.blocks.iter().enumerate() {
            let (from, to) = (tau[i] as usize, tau[i + 1] as usize);
            let mut s = 0.0;
            for r in &log[from..to] {
                s += crate::walk::b_value(r.from_rootless, r.nu_from, 1.0, r.mv);
            }
            assert!((s - b.b_sum).abs() < 1e-9, "block {i}: {s} vs {}", b.b_sum);
        }
    }

    #[test]
    fn offline_extraction_matches_streaming() {
        let law = OffspringLaw::supercritical(&[(0, 0.2), (2, 0.8)]).unwrap();
        let mode = SimMode::Gw(law);
        let st = SeedTree::new(37);
        let mut arena = mode.make_arena(&st, 2, 0, false).unwrap();
        let lambda = 0.9;
        let config = mode.walk_config(lambda).unwrap().with_log();
        let mut walker = Walker::new(&mut arena, config);
        let mut rng = st.stream(2, Purpose::Walk, 0);
        let mut builder = BlockBuilder::new();
        let mut depths = vec![0i64];
        for _ in 0..20_000 {
            let out = walker.step(&mut rng).unwrap();
            builder.push(&out);
            depths.push(i64::from(out.depth));
        }
        let streaming = builder.finish(30);
        let detection = detect_regenerations(&depths, 30).unwrap();
        let offline = extract_blocks(0, walker.step_log(), &detection, lambda);

        assert_eq!(streaming.confirmed_times, offline.confirmed_times);
        assert_eq!(streaming.confirmed_levels, offline.confirmed_levels);
        assert_eq!(streaming.blocks.len(), offline.blocks.len());
        assert_eq!(streaming.censored_tail, offline.censored_tail);
        for (a, b) in streaming.blocks.iter().zip(offline.blocks.iter()) {
            assert_eq!(a.duration, b.duration);
            assert_eq!(a.displacement, b.displacement);
            assert_eq!(a.excursions, b.excursions);
            assert_eq!(a.trap_time, b.trap_time);
            assert!((a.b_sum - b.b_sum).abs() < 1e-9);
            assert!((a.b2_sum - b.b2_sum).abs() < 1e-9);
        }
        let z0 = streaming.block0.unwrap();
        let o0 = offline.block0.unwrap();
        assert_eq!(z0.duration, o0.duration);
        assert_eq!(z0.displacement, o0.displacement);

        // too few confirmations yields the flagged empty set
        let short = extract_blocks(
            0,
            &walker.step_log()[..3],
            &DetectResult {
                confirmed: vec![1],
                censored: vec![],
            },
            lambda,
        );
        assert!(short.blocks.is_empty());
        assert!(short.note.is_some());
    }

    #[test]
    fn half_line_zero_bias_blocks_are_unit() {
        let mode = SimMode::HalfLine;
        let st = SeedTree::new(34);
        let mut arena = mode.make_arena(&st, 0, 0, false).unwrap();
        let config = WalkConfig::half_line_oracle(0.0).unwrap();
        let mut rng = st.stream(0, Purpose::Walk, 0);
        let set = run_blocks_on(&mut arena, config, 500, 10, &mut rng).unwrap();
        assert!(set.blocks.len() > 400);
        assert!(set
            .blocks
            .iter()
            .all(|b| b.duration == 1 && b.displacement == 1));
    }

    #[test]
    fn nb_rejects_recurrent_regime() {
        let mode = SimMode::Dary(2);
        let st = SeedTree::new(35);
        let err = sample_nb_episode(
            &mode,
            2.5,
            10,
            EpisodeStop::FirstConfirmation,
            &st,
            0,
            100,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Regime(_)));
    }

    #[test]
    fn nb_acceptance_rate_matches_gamblers_ruin() {
        // d-ary d=2, lambda=1: escape probability 1 - lambda/d = 1/2
        let mode = SimMode::Dary(2);
        let st = SeedTree::new(36);
        let mut accepted = 0u64;
        let mut attempts = 0u64;
        let episodes = 4_000u64;
        for replica in 0..episodes {
            let ep = sample_nb_episode(
                &mode,
                1.0,
                20,
                EpisodeStop::FirstConfirmation,
                &st,
                replica,
                DEFAULT_REJECTION_CAP,
            )
            .unwrap();
            accepted += 1;
            attempts += ep.rejections + 1;
        }
        let rate = accepted as f64 / attempts as f64;
        let sigma = (0.5 * 0.5 / attempts as f64).sqrt();
        assert!(
            (rate - 0.5).abs() < 4.0 * sigma,
            "rate {rate}, sigma {sigma}"
        );
    }
}
