//! Lazy rooted trees for the walk to live on.
//!
//! A `TreeArena` materializes vertices only when the walk first asks for
//! their children. Conditioned Galton-Watson trees are grown by survival
//! tagging: a backbone vertex draws its child count from the base law and a
//! survival vector conditioned on at least one success; survivors stay on the
//! backbone, the rest root subcritical traps. Every vertex's randomness is
//! seeded by its path key, so the realized tree is a function of the seed
//! alone no matter in which order the walk touches it.

use crate::error::{Error, Result};
use crate::offspring::OffspringLaw;
use crate::rng::VertexKey;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_VERTEX_CAP: usize = 100_000_000;

/// Handle into a [`TreeArena`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexId(pub u32);

const NO_VERTEX: u32 = u32::MAX;
const UNMATERIALIZED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Backbone,
    Trap,
    AugmentedRoot,
}

#[derive(Debug, Clone)]
struct VertexRecord {
    parent: u32,
    depth: i32,
    first_child: u32,
    child_count: u16,
    kind: VertexKind,
    key: VertexKey,
}

/// How children are generated.
#[derive(Debug, Clone)]
enum TreeMode {
    ConditionedGw {
        law: OffspringLaw,
        trap: OffspringLaw,
        q: f64,
    },
    Dary(u32),
    HalfLine,
}

/// Append-only vertex store. Vertices are materialized at most once; given
/// the same seed and mode, any access order yields the same tree.
#[derive(Debug, Clone)]
pub struct TreeArena {
    mode: TreeMode,
    vertices: Vec<VertexRecord>,
    children: Vec<u32>,
    cap: usize,
    root: VertexId,
    augmented_root: Option<VertexId>,
}

impl TreeArena {
    /// Conditioned-on-survival GW tree. With `augmented` the store carries an
    /// extra parent `e*` above the root, used by non-backtracking episodes.
    pub fn conditioned(
        law: &OffspringLaw,
        root_key: VertexKey,
        augmented: bool,
        cap: usize,
    ) -> Result<Self> {
        if law.mean() <= 1.0 {
            return Err(Error::InvalidLaw(format!(
                "mean {} is not > 1; cannot condition on survival",
                law.mean()
            )));
        }
        let q = law.extinction_probability();
        let mode = TreeMode::ConditionedGw {
            law: law.clone(),
            trap: law.trap_law(),
            q,
        };
        Ok(Self::with_mode(mode, root_key, augmented, cap))
    }

    /// Deterministic d-ary tree (every vertex has exactly `d` children).
    pub fn dary(d: u32, augmented: bool) -> Self {
        assert!(d >= 1, "d-ary tree needs d >= 1");
        Self::with_mode(
            TreeMode::Dary(d),
            VertexKey(0),
            augmented,
            DEFAULT_VERTEX_CAP,
        )
    }

    /// Half-line: one child per vertex.
    pub fn half_line(augmented: bool) -> Self {
        Self::with_mode(
            TreeMode::HalfLine,
            VertexKey(0),
            augmented,
            DEFAULT_VERTEX_CAP,
        )
    }

    fn with_mode(mode: TreeMode, root_key: VertexKey, augmented: bool, cap: usize) -> Self {
        let mut arena = TreeArena {
            mode,
            vertices: Vec::new(),
            children: Vec::new(),
            cap,
            root: VertexId(0),
            augmented_root: None,
        };
        if augmented {
            arena.vertices.push(VertexRecord {
                parent: NO_VERTEX,
                depth: -1,
                first_child: 0,
                child_count: 1,
                kind: VertexKind::AugmentedRoot,
                key: VertexKey(0),
            });
            arena.children.push(1);
            arena.augmented_root = Some(VertexId(0));
            arena.root = VertexId(1);
            arena.vertices.push(VertexRecord {
                parent: 0,
                depth: 0,
                first_child: UNMATERIALIZED,
                child_count: 0,
                kind: VertexKind::Backbone,
                key: root_key,
            });
        } else {
            arena.vertices.push(VertexRecord {
                parent: NO_VERTEX,
                depth: 0,
                first_child: UNMATERIALIZED,
                child_count: 0,
                kind: VertexKind::Backbone,
                key: root_key,
            });
        }
        arena
    }

    /// The true root `e`.
    pub fn root(&self) -> VertexId {
        self.root
    }

    /// The absorbing parent `e*`, when this arena carries one.
    pub fn augmented_root(&self) -> Option<VertexId> {
        self.augmented_root
    }

    /// Constant fan-out of a deterministic mode, None for random trees.
    pub fn regular_fanout(&self) -> Option<u32> {
        match self.mode {
            TreeMode::ConditionedGw { .. } => None,
            TreeMode::Dary(d) => Some(d),
            TreeMode::HalfLine => Some(1),
        }
    }

    pub fn depth(&self, v: VertexId) -> i32 {
        self.vertices[v.0 as usize].depth
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.vertices[v.0 as usize].kind
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        let p = self.vertices[v.0 as usize].parent;
        (p != NO_VERTEX).then_some(VertexId(p))
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Children of `v`, materializing them on first access. Idempotent.
    pub fn children(&mut self, v: VertexId) -> Result<&[u32]> {
        let idx = v.0 as usize;
        if self.vertices[idx].first_child == UNMATERIALIZED {
            self.materialize(v)?;
        }
        let rec = &self.vertices[idx];
        let start = rec.first_child as usize;
        Ok(&self.children[start..start + rec.child_count as usize])
    }

    /// Number of children of `v` (materializes them).
    pub fn num_children(&mut self, v: VertexId) -> Result<u32> {
        Ok(self.children(v)?.len() as u32)
    }

    pub fn child(&mut self, v: VertexId, index: u32) -> Result<VertexId> {
        let kids = self.children(v)?;
        Ok(VertexId(kids[index as usize]))
    }

    fn materialize(&mut self, v: VertexId) -> Result<()> {
        let idx = v.0 as usize;
        let (depth, kind, key) = {
            let rec = &self.vertices[idx];
            (rec.depth, rec.kind, rec.key)
        };
        let kinds: Vec<VertexKind> = match (&self.mode, kind) {
            (_, VertexKind::AugmentedRoot) => unreachable!("e* is materialized at construction"),
            (TreeMode::Dary(d), _) => vec![VertexKind::Backbone; *d as usize],
            (TreeMode::HalfLine, _) => vec![VertexKind::Backbone],
            (TreeMode::ConditionedGw { law, q, .. }, VertexKind::Backbone) => {
                let mut rng = key.rng();
                sample_backbone_children(law, *q, &mut rng)
            }
            (TreeMode::ConditionedGw { trap, .. }, VertexKind::Trap) => {
                let mut rng = key.rng();
                let k = trap.sample(&mut rng);
                vec![VertexKind::Trap; k as usize]
            }
        };
        if self.vertices.len() + kinds.len() > self.cap {
            return Err(Error::MemoryCap { cap: self.cap });
        }
        let start = self.children.len() as u32;
        for (i, child_kind) in kinds.iter().enumerate() {
            let child_id = self.vertices.len() as u32;
            self.children.push(child_id);
            self.vertices.push(VertexRecord {
                parent: v.0,
                depth: depth + 1,
                first_child: UNMATERIALIZED,
                child_count: 0,
                kind: *child_kind,
                key: key.child(i as u32),
            });
        }
        let rec = &mut self.vertices[idx];
        rec.first_child = start;
        rec.child_count = kinds.len() as u16;
        Ok(())
    }

    /// Debug dump, one `id parent depth kind` line per materialized vertex.
    pub fn dump_lines(&self) -> String {
        let mut out = String::new();
        for (i, rec) in self.vertices.iter().enumerate() {
            let parent = if rec.parent == NO_VERTEX {
                "-".to_string()
            } else {
                rec.parent.to_string()
            };
            let kind = match rec.kind {
                VertexKind::Backbone => "backbone",
                VertexKind::Trap => "trap",
                VertexKind::AugmentedRoot => "augmented-root",
            };
            out.push_str(&format!("{i} {parent} {} {kind}\n", rec.depth));
        }
        out
    }
}

/// Child kinds of a backbone vertex: count from the base law, survival
/// vector conditioned on at least one success by rejection. Expected number
/// of redraws is 1/(1 - q^k).
fn sample_backbone_children(law: &OffspringLaw, q: f64, rng: &mut ChaCha8Rng) -> Vec<VertexKind> {
    loop {
        let k = law.sample(rng);
        if k == 0 {
            continue;
        }
        let mut kinds = Vec::with_capacity(k as usize);
        let mut survivors = 0u32;
        for _ in 0..k {
            if rng.gen::<f64>() < 1.0 - q {
                kinds.push(VertexKind::Backbone);
                survivors += 1;
            } else {
                kinds.push(VertexKind::Trap);
            }
        }
        if survivors > 0 {
            return kinds;
        }
    }
}

/// Tree family an experiment runs on.
#[derive(Debug, Clone)]
pub enum SimMode {
    /// Supercritical GW tree conditioned to survive.
    Gw(OffspringLaw),
    /// Deterministic d-ary oracle tree.
    Dary(u32),
    /// Single path; oracle for walk and block plumbing only.
    HalfLine,
}

impl SimMode {
    /// Mean offspring count; the walk is transient for `lambda < mu`.
    pub fn mu(&self) -> f64 {
        match self {
            SimMode::Gw(law) => law.mean(),
            SimMode::Dary(d) => f64::from(*d),
            SimMode::HalfLine => 1.0,
        }
    }

    pub fn lambda_c(&self) -> f64 {
        match self {
            SimMode::Gw(law) => law.lambda_c(),
            SimMode::Dary(d) => {
                if *d == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            SimMode::HalfLine => 1.0,
        }
    }

    pub fn law(&self) -> Option<&OffspringLaw> {
        match self {
            SimMode::Gw(law) => Some(law),
            _ => None,
        }
    }

    /// Bias window in which the walk is ballistic: `(lambda_c, mu)` for GW
    /// trees, `(0, d)` for d-ary, `(0, 1)` for the half-line oracle (whose
    /// degenerate lambda_c plays no role).
    pub fn ballistic_window(&self) -> (f64, f64) {
        match self {
            SimMode::Gw(law) => (law.lambda_c(), law.mean()),
            SimMode::Dary(d) => (0.0, f64::from(*d)),
            SimMode::HalfLine => (0.0, 1.0),
        }
    }

    pub fn has_traps(&self) -> bool {
        matches!(self, SimMode::Gw(law) if law.prob(0) > 0.0)
    }

    /// Constant fan-out when the mode is deterministic.
    pub fn regular_fanout(&self) -> Option<u32> {
        match self {
            SimMode::Gw(_) => None,
            SimMode::Dary(d) => Some(*d),
            SimMode::HalfLine => Some(1),
        }
    }

    pub fn make_arena(
        &self,
        seeds: &crate::rng::SeedTree,
        replica: u64,
        episode: u64,
        augmented: bool,
    ) -> Result<TreeArena> {
        self.make_arena_with_cap(seeds, replica, episode, augmented, DEFAULT_VERTEX_CAP)
    }

    pub fn make_arena_with_cap(
        &self,
        seeds: &crate::rng::SeedTree,
        replica: u64,
        episode: u64,
        augmented: bool,
        cap: usize,
    ) -> Result<TreeArena> {
        match self {
            SimMode::Gw(law) => {
                TreeArena::conditioned(law, seeds.tree_root_key(replica, episode), augmented, cap)
            }
            SimMode::Dary(d) => Ok(TreeArena::dary(*d, augmented)),
            SimMode::HalfLine => Ok(TreeArena::half_line(augmented)),
        }
    }

    /// Walk parameters for this mode; the half-line oracle admits zero bias.
    pub fn walk_config(&self, lambda: f64) -> Result<crate::walk::WalkConfig> {
        match self {
            SimMode::HalfLine => crate::walk::WalkConfig::half_line_oracle(lambda),
            _ => crate::walk::WalkConfig::new(lambda),
        }
    }
}

/// Generation sizes of independent trap (h-law) GW processes, for moment
/// diagnostics. Row r holds W_0..W_n_max of replica r.
pub struct GenSizeSamples {
    pub n_max: usize,
    pub replicas: usize,
    data: Vec<u32>,
}

impl GenSizeSamples {
    pub fn w(&self, replica: usize, n: usize) -> u32 {
        self.data[replica * (self.n_max + 1) + n]
    }
}

pub fn trap_generation_sizes(
    law: &OffspringLaw,
    n_max: usize,
    replicas: usize,
    rng: &mut ChaCha8Rng,
) -> GenSizeSamples {
    // With p0 = 0 the trap law is the flagged point mass at 0 and every
    // generation beyond the root is empty; that degenerate table is still a
    // valid diagnostic output.
    let trap = law.trap_law();
    let mut data = Vec::with_capacity(replicas * (n_max + 1));
    for _ in 0..replicas {
        let mut w = 1u32;
        data.push(w);
        for _ in 0..n_max {
            let mut next = 0u32;
            for _ in 0..w {
                next += trap.sample(rng);
            }
            w = next;
            data.push(w);
        }
    }
    GenSizeSamples {
        n_max,
        replicas,
        data,
    }
}
