//! Sparse collections of dyadic cubes and the operators built on them.
//!
//! A collection is stored as a sorted list of cubes. The nesting structure
//! (nearest strict ancestor inside the collection) is recovered on demand
//! as a [`Forest`]. Measures are counted in grid cells, so the packing and
//! sparseness checks are exact integer comparisons.

mod forms;
mod haar;
mod replay;

pub use forms::{bilinear_form, cz_stopping_collection, joint_stopping_collection, sparse_operator};
pub use haar::{haar_function, haar_transform, sparse_dominate_bilinear, DominationResult, HaarSpec};
pub use replay::{
    band_index, level_class, proof_replay, BinSummary, ClassRecord, ClassRegime, CubeRecord,
    Discard, ProofReplayReport, ReplayFlags, REPLAY_CONSTANT_BOUND,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellSet, DyadicCube};

/// A finite set of dyadic cubes at a fixed resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseCollection {
    resolution: u32,
    cubes: Vec<DyadicCube>,
}

impl SparseCollection {
    pub fn new(resolution: u32, cubes: impl IntoIterator<Item = DyadicCube>) -> Result<Self> {
        let mut cubes: Vec<DyadicCube> = cubes.into_iter().collect();
        for q in &cubes {
            q.check_resolution(resolution)?;
        }
        cubes.sort_unstable();
        cubes.dedup();
        Ok(SparseCollection { resolution, cubes })
    }

    pub fn empty(resolution: u32) -> Self {
        SparseCollection { resolution, cubes: Vec::new() }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn contains(&self, cube: &DyadicCube) -> bool {
        self.cubes.binary_search(cube).is_ok()
    }

    pub fn position(&self, cube: &DyadicCube) -> Option<usize> {
        self.cubes.binary_search(cube).ok()
    }

    /// Union of the member cubes.
    pub fn union_set(&self) -> CellSet {
        let mut set = CellSet::empty(self.resolution);
        for q in &self.cubes {
            for c in q.cells(self.resolution).expect("validated") {
                set.insert(c);
            }
        }
        set
    }

    /// Cells covered by cube `i`.
    fn cells_of(&self, i: usize) -> u64 {
        1u64 << (self.resolution - self.cubes[i].level())
    }

    pub fn forest(&self) -> Forest {
        Forest::build(self)
    }
}

impl AsRef<[DyadicCube]> for SparseCollection {
    fn as_ref(&self) -> &[DyadicCube] {
        &self.cubes
    }
}

/// Nesting structure of a collection: indices refer to `cubes()`.
#[derive(Debug, Clone)]
pub struct Forest {
    /// Nearest strict ancestor inside the collection.
    pub parent: Vec<Option<usize>>,
    /// Maximal members strictly inside each cube.
    pub children: Vec<Vec<usize>>,
    /// Number of strict ancestors inside the collection.
    pub depth: Vec<u32>,
}

impl Forest {
    fn build(s: &SparseCollection) -> Self {
        let m = s.cubes.len();
        let mut parent = vec![None; m];
        let mut children = vec![Vec::new(); m];
        for (i, q) in s.cubes.iter().enumerate() {
            let mut a = q.parent();
            while let Some(anc) = a {
                if let Some(p) = s.position(&anc) {
                    parent[i] = Some(p);
                    children[p].push(i);
                    break;
                }
                a = anc.parent();
            }
        }
        // Cubes are sorted coarse-to-fine, so parents precede children.
        let mut depth = vec![0u32; m];
        for i in 0..m {
            if let Some(p) = parent[i] {
                depth[i] = depth[p] + 1;
            }
        }
        Forest { parent, children, depth }
    }
}

/// Which cubes count toward the packing sum of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CarlesonConvention {
    /// Members strictly inside `Q`.
    #[default]
    Proper,
    /// Members inside `Q`, including `Q`.
    IncludeSelf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub pass: bool,
    pub worst_cube: Option<DyadicCube>,
    /// `max_Q Σ |Q'| / |Q|`, zero for an empty collection.
    pub worst_ratio: f64,
}

/// Packing check `Σ_{Q'∈S, Q'⊊Q} |Q'| ≤ Λ|Q|` for every member `Q`.
pub fn carleson_check(s: &SparseCollection, lambda: f64, convention: CarlesonConvention) -> CarlesonReport {
    let forest = s.forest();
    let m = s.cubes.len();
    let mut below = vec![0u64; m];
    // Fine-to-coarse accumulation of subtree measures.
    let mut subtree: Vec<u64> = (0..m).map(|i| s.cells_of(i)).collect();
    for i in (0..m).rev() {
        if let Some(p) = forest.parent[i] {
            subtree[p] += subtree[i];
            below[p] += subtree[i];
        }
    }
    let mut report = CarlesonReport { pass: true, worst_cube: None, worst_ratio: 0.0 };
    for (i, &b) in below.iter().enumerate() {
        let mut sum = b;
        if convention == CarlesonConvention::IncludeSelf {
            sum += s.cells_of(i);
        }
        let ratio = sum as f64 / s.cells_of(i) as f64;
        if report.worst_cube.is_none() || ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_cube = Some(s.cubes[i]);
        }
    }
    report.pass = report.worst_ratio <= lambda;
    report
}

/// A collection certified ½-sparse, with its sets `E_Q`.
#[derive(Debug, Clone)]
pub struct SparseCertificate {
    collection: SparseCollection,
    forest: Forest,
    /// `|E_Q|` in cells.
    e_cells: Vec<u64>,
}

impl SparseCertificate {
    pub fn collection(&self) -> &SparseCollection {
        &self.collection
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    /// `|E_Q| / |Q|` for member `i`.
    pub fn e_ratio(&self, i: usize) -> f64 {
        self.e_cells[i] as f64 / self.collection.cells_of(i) as f64
    }

    /// `E_Q = Q ∖ ∪{maximal members strictly inside Q}`.
    pub fn e_set(&self, i: usize) -> CellSet {
        let n = self.collection.resolution;
        let mut set = CellSet::from_cube(n, &self.collection.cubes[i]).expect("validated");
        for &c in &self.forest.children[i] {
            for x in self.collection.cubes[c].cells(n).expect("validated") {
                set.remove(x);
            }
        }
        set
    }
}

/// Why a collection is not ½-sparse.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cube {cube} keeps only {ratio} of its measure in E_Q (needs > 1/2)")]
pub struct SparseFailure {
    pub cube: DyadicCube,
    pub ratio: f64,
}

/// Build `E_Q` for every member and certify `|E_Q| > ½|Q|` (strict).
pub fn build_disjoint_eq(s: &SparseCollection) -> std::result::Result<SparseCertificate, SparseFailure> {
    let forest = s.forest();
    let mut e_cells = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        let covered: u64 = forest.children[i].iter().map(|&c| s.cells_of(c)).sum();
        let e = s.cells_of(i) - covered;
        if 2 * e <= s.cells_of(i) {
            return Err(SparseFailure {
                cube: s.cubes[i],
                ratio: e as f64 / s.cells_of(i) as f64,
            });
        }
        e_cells.push(e);
    }
    Ok(SparseCertificate { collection: s.clone(), forest, e_cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongerReport {
    pub pass: bool,
    pub worst_cube: Option<DyadicCube>,
    /// `max_Q |∪_{Q'⊊Q} Q'| / |Q|`.
    pub worst_ratio: f64,
}

/// Stronger sparseness: `|∪_{Q'∈S, Q'⊊Q} Q'| ≤ ¼|Q|` for every member.
pub fn stronger_sparse_check(s: &SparseCollection) -> StrongerReport {
    let forest = s.forest();
    let mut report = StrongerReport { pass: true, worst_cube: None, worst_ratio: 0.0 };
    for i in 0..s.len() {
        let union: u64 = forest.children[i].iter().map(|&c| s.cells_of(c)).sum();
        let ratio = union as f64 / s.cells_of(i) as f64;
        if report.worst_cube.is_none() || ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_cube = Some(s.cubes[i]);
        }
        if 4 * union > s.cells_of(i) {
            report.pass = false;
        }
    }
    report
}

/// Partition by `depth mod 8`, depth counted in strict ancestors inside `S`.
///
/// Requires the Carleson packing `Σ_{Q'⊊Q} |Q'| ≤ 2|Q|`, under which every
/// part satisfies the stronger `¼` condition.
pub fn split_eight(s: &SparseCollection) -> Result<[SparseCollection; 8]> {
    let check = carleson_check(s, 2.0, CarlesonConvention::Proper);
    if !check.pass {
        return Err(Error::Precondition(format!(
            "collection fails the Carleson packing with constant 2 at {} (ratio {})",
            check.worst_cube.expect("non-empty on failure"),
            check.worst_ratio
        )));
    }
    let forest = s.forest();
    let mut parts: [Vec<DyadicCube>; 8] = Default::default();
    for (i, q) in s.cubes.iter().enumerate() {
        parts[(forest.depth[i] % 8) as usize].push(*q);
    }
    Ok(parts.map(|cubes| SparseCollection { resolution: s.resolution, cubes }))
}
