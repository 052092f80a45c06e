//! Dyadic step functions on `[0, 1)`.
//!
//! A [`GridFunction`] at resolution `N` holds one value per cell of width
//! `2^-N`. Sums over dyadic blocks are always taken pairwise (left half plus
//! right half, recursively). That ordering coincides with the bottom-up
//! [`Pyramid`], so a block sum computed directly and the same sum read off
//! a pyramid agree bit for bit. Several exactness contracts downstream
//! (per-cube `ρ` against the whole table, `M^S_α` against `M^D`) rely on it.

use std::fmt;
use std::ops::{Range, RangeInclusive};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest resolution any grid may have. Cell indices are `usize`.
pub const MAX_RESOLUTION: u32 = 30;

/// The dyadic interval `[index·2^-level, (index+1)·2^-level)`.
///
/// Ordered by level first, then index: coarse cubes sort before fine ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    level: u32,
    index: u64,
}

impl DyadicCube {
    pub const ROOT: DyadicCube = DyadicCube { level: 0, index: 0 };

    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level > MAX_RESOLUTION {
            return Err(Error::InvalidArgument(format!(
                "cube level {level} exceeds the maximum resolution {MAX_RESOLUTION}"
            )));
        }
        if index >= 1u64 << level {
            return Err(Error::InvalidCube {
                cube: DyadicCube { level, index },
                reason: format!("index must be below 2^{level}"),
            });
        }
        Ok(DyadicCube { level, index })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Lebesgue measure `2^-level`.
    pub fn measure(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Left endpoint of the interval.
    pub fn left(&self) -> f64 {
        self.index as f64 * self.measure()
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube { level: self.level - 1, index: self.index >> 1 })
    }

    pub fn children(&self) -> [DyadicCube; 2] {
        let level = self.level + 1;
        [
            DyadicCube { level, index: self.index << 1 },
            DyadicCube { level, index: (self.index << 1) | 1 },
        ]
    }

    /// The unique ancestor (or self) at `level`; `None` if `level` is finer.
    pub fn ancestor_at(&self, level: u32) -> Option<DyadicCube> {
        (level <= self.level)
            .then(|| DyadicCube { level, index: self.index >> (self.level - level) })
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.ancestor_at(self.level) == Some(*self)
    }

    /// `other ⊊ self`.
    pub fn strictly_contains(&self, other: &DyadicCube) -> bool {
        other.level > self.level && self.contains(other)
    }

    /// Number of grid cells covered at `resolution`.
    pub fn cell_count(&self, resolution: u32) -> Result<usize> {
        self.check_resolution(resolution)?;
        Ok(1usize << (resolution - self.level))
    }

    /// Cell index range covered at `resolution`.
    pub fn cells(&self, resolution: u32) -> Result<Range<usize>> {
        self.check_resolution(resolution)?;
        let width = 1usize << (resolution - self.level);
        let start = self.index as usize * width;
        Ok(start..start + width)
    }

    /// The cube at `level` containing grid cell `cell`.
    pub fn containing_cell(cell: usize, resolution: u32, level: u32) -> Result<DyadicCube> {
        if level > resolution {
            return Err(Error::InvalidArgument(format!(
                "level {level} is finer than resolution {resolution}"
            )));
        }
        if cell >= 1usize << resolution {
            return Err(Error::InvalidArgument(format!(
                "cell {cell} outside a grid of resolution {resolution}"
            )));
        }
        Ok(DyadicCube { level, index: (cell >> (resolution - level)) as u64 })
    }

    pub(crate) fn check_resolution(&self, resolution: u32) -> Result<()> {
        if self.level > resolution {
            return Err(Error::InvalidCube {
                cube: *self,
                reason: format!("finer than the grid resolution {resolution}"),
            });
        }
        Ok(())
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.level, self.index)
    }
}

/// A step function with `2^N` finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    resolution: u32,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(resolution: u32, values: Vec<f64>) -> Result<Self> {
        if resolution > MAX_RESOLUTION {
            return Err(Error::InvalidGrid(format!(
                "resolution {resolution} exceeds {MAX_RESOLUTION}"
            )));
        }
        let expected = 1usize << resolution;
        if values.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "expected {expected} values for resolution {resolution}, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("cell {i} holds a non-finite value")));
        }
        Ok(GridFunction { resolution, values })
    }

    pub fn constant(resolution: u32, value: f64) -> Result<Self> {
        GridFunction::new(resolution, vec![value; 1usize << resolution.min(MAX_RESOLUTION)])
    }

    pub fn zeros(resolution: u32) -> Result<Self> {
        GridFunction::constant(resolution, 0.0)
    }

    /// Build from a closure over cell indices.
    pub fn from_fn(resolution: u32, f: impl FnMut(usize) -> f64) -> Result<Self> {
        let n = 1usize << resolution.min(MAX_RESOLUTION);
        GridFunction::new(resolution, (0..n).map(f).collect())
    }

    /// Indicator of a cell set.
    pub fn indicator(set: &CellSet) -> Self {
        let values = set.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        GridFunction { resolution: set.resolution, values }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Width `2^-N` of one cell.
    pub fn cell_width(&self) -> f64 {
        (-(self.resolution as f64)).exp2()
    }

    pub fn abs(&self) -> GridFunction {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    /// Apply `op` cellwise. The caller keeps results finite.
    pub fn map(&self, op: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            resolution: self.resolution,
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    /// Cellwise combination of two functions at the same resolution.
    pub fn zip_with(&self, other: &GridFunction, op: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        same_resolution(self.resolution, other.resolution)?;
        Ok(GridFunction {
            resolution: self.resolution,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `∫ |f|` over `[0, 1)`.
    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        pairwise_sum(&abs) * self.cell_width()
    }
}

/// A subset of grid cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSet {
    resolution: u32,
    mask: Vec<bool>,
}

impl CellSet {
    pub fn empty(resolution: u32) -> Self {
        CellSet { resolution, mask: vec![false; 1usize << resolution] }
    }

    pub fn full(resolution: u32) -> Self {
        CellSet { resolution, mask: vec![true; 1usize << resolution] }
    }

    pub fn from_mask(resolution: u32, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != 1usize << resolution {
            return Err(Error::InvalidArgument(format!(
                "mask of length {} does not match resolution {resolution}",
                mask.len()
            )));
        }
        Ok(CellSet { resolution, mask })
    }

    pub fn from_cells(resolution: u32, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = CellSet::empty(resolution);
        for c in cells {
            if c >= set.mask.len() {
                return Err(Error::InvalidArgument(format!(
                    "cell {c} outside a grid of resolution {resolution}"
                )));
            }
            set.mask[c] = true;
        }
        Ok(set)
    }

    pub fn from_cube(resolution: u32, cube: &DyadicCube) -> Result<Self> {
        let mut set = CellSet::empty(resolution);
        for c in cube.cells(resolution)? {
            set.mask[c] = true;
        }
        Ok(set)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.mask.get(cell).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, cell: usize) {
        self.mask[cell] = true;
    }

    pub fn remove(&mut self, cell: usize) {
        self.mask[cell] = false;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Lebesgue measure of the set.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * (-(self.resolution as f64)).exp2()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &CellSet) -> Result<CellSet> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn is_subset(&self, other: &CellSet) -> Result<bool> {
        same_resolution(self.resolution, other.resolution)?;
        Ok(self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b))
    }

    pub fn is_disjoint(&self, other: &CellSet) -> Result<bool> {
        same_resolution(self.resolution, other.resolution)?;
        Ok(self.mask.iter().zip(&other.mask).all(|(&a, &b)| !(a && b)))
    }

    fn combine(&self, other: &CellSet, op: impl Fn(bool, bool) -> bool) -> Result<CellSet> {
        same_resolution(self.resolution, other.resolution)?;
        Ok(CellSet {
            resolution: self.resolution,
            mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| op(a, b)).collect(),
        })
    }
}

pub(crate) fn same_resolution(left: u32, right: u32) -> Result<()> {
    if left != right {
        return Err(Error::ResolutionMismatch { left, right });
    }
    Ok(())
}

/// Recursive halving sum. On power-of-two lengths this matches the
/// summation order of [`Pyramid`] exactly.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Block sums of a grid function at every level.
///
/// `sums[ℓ][j]` is the sum of the cell values under cube `(ℓ, j)`, built
/// bottom-up from pairs of children.
#[derive(Debug, Clone)]
pub struct Pyramid {
    resolution: u32,
    sums: Vec<Vec<f64>>,
}

impl Pyramid {
    /// Pyramid of `|f|`, the convention behind every average `⟨f⟩_Q`.
    pub fn of_abs(f: &GridFunction) -> Self {
        Pyramid::build(f.resolution, f.values.iter().map(|v| v.abs()).collect())
    }

    /// Pyramid of the signed values.
    pub fn of_signed(f: &GridFunction) -> Self {
        Pyramid::build(f.resolution, f.values.clone())
    }

    fn build(resolution: u32, leaves: Vec<f64>) -> Self {
        let mut sums = vec![Vec::new(); resolution as usize + 1];
        sums[resolution as usize] = leaves;
        for level in (0..resolution as usize).rev() {
            let finer = &sums[level + 1];
            let coarse: Vec<f64> = finer.chunks_exact(2).map(|p| p[0] + p[1]).collect();
            sums[level] = coarse;
        }
        Pyramid { resolution, sums }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Block sum under `cube` (no cell-width factor).
    pub fn sum(&self, cube: &DyadicCube) -> f64 {
        self.sums[cube.level as usize][cube.index as usize]
    }

    /// Mean cell value over `cube`.
    pub fn average(&self, cube: &DyadicCube) -> f64 {
        self.average_at(cube.level, cube.index as usize)
    }

    pub(crate) fn average_at(&self, level: u32, index: usize) -> f64 {
        let cells = (1u64 << (self.resolution - level)) as f64;
        self.sums[level as usize][index] / cells
    }

    /// Integral `∫_Q` of the stored values.
    pub fn integral(&self, cube: &DyadicCube) -> f64 {
        self.sum(cube) * (-(self.resolution as f64)).exp2()
    }

    pub(crate) fn level_sums(&self, level: u32) -> &[f64] {
        &self.sums[level as usize]
    }
}

/// `⟨f⟩_Q = |Q|⁻¹ ∫_Q |f|`.
pub fn average(f: &GridFunction, cube: &DyadicCube) -> Result<f64> {
    let cells = cube.cells(f.resolution)?;
    let abs: Vec<f64> = f.values[cells.clone()].iter().map(|v| v.abs()).collect();
    Ok(pairwise_sum(&abs) / cells.len() as f64)
}

/// Signed integral of `f` over the member cells of `set`.
pub fn integral(f: &GridFunction, set: &CellSet) -> Result<f64> {
    same_resolution(f.resolution, set.resolution)?;
    let masked: Vec<f64> =
        f.values.iter().zip(&set.mask).map(|(&v, &m)| if m { v } else { 0.0 }).collect();
    Ok(pairwise_sum(&masked) * f.cell_width())
}

/// `∫ f·g` over `[0, 1)`.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    same_resolution(f.resolution, g.resolution)?;
    let prod: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect();
    Ok(pairwise_sum(&prod) * f.cell_width())
}

pub(crate) fn check_weight_values(w: &GridFunction) -> Result<()> {
    if let Some(i) = w.values.iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidWeight(format!("cell {i} is negative ({})", w.values[i])));
    }
    Ok(())
}

/// `w({x : |g(x)| > λ})`, strict superlevel set.
pub fn superlevel_weight(g: &GridFunction, lambda: f64, w: &GridFunction) -> Result<f64> {
    same_resolution(g.resolution, w.resolution)?;
    check_weight_values(w)?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("level must be non-negative, got {lambda}")));
    }
    let masked: Vec<f64> = g
        .values
        .iter()
        .zip(&w.values)
        .map(|(&gv, &wv)| if gv.abs() > lambda { wv } else { 0.0 })
        .collect();
    Ok(pairwise_sum(&masked) * g.cell_width())
}

/// The weak-L¹(w) norm together with the level that attains it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakNorm {
    /// `sup_λ λ·w({|g| > λ})`.
    pub value: f64,
    /// The value `v` of `|g|` with `value = v·w({|g| ≥ v})`; zero when the norm vanishes.
    pub level: f64,
}

/// `sup_{λ>0} λ·w({|g| > λ})`.
///
/// For a step function the supremum is approached as `λ ↑ v` for one of
/// the values `v` of `|g|`, giving `max_v v·w({|g| ≥ v})`.
pub fn weak_l1_norm(g: &GridFunction, w: &GridFunction) -> Result<f64> {
    weak_l1_norm_detailed(g, w).map(|n| n.value)
}

pub fn weak_l1_norm_detailed(g: &GridFunction, w: &GridFunction) -> Result<WeakNorm> {
    same_resolution(g.resolution, w.resolution)?;
    check_weight_values(w)?;
    let mut cells: Vec<(f64, f64)> =
        g.values.iter().zip(&w.values).map(|(&gv, &wv)| (gv.abs(), wv)).collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));

    let width = g.cell_width();
    let mut best = WeakNorm { value: 0.0, level: 0.0 };
    let mut mass = 0.0;
    let mut i = 0;
    while i < cells.len() {
        let v = cells[i].0;
        if v == 0.0 {
            break;
        }
        while i < cells.len() && cells[i].0 == v {
            mass += cells[i].1;
            i += 1;
        }
        let candidate = v * mass * width;
        if candidate > best.value {
            best = WeakNorm { value: candidate, level: v };
        }
    }
    Ok(best)
}

/// All cubes with level in `levels`, ordered by level then index.
pub fn enumerate_cubes(resolution: u32, levels: RangeInclusive<u32>) -> Result<Vec<DyadicCube>> {
    let (lo, hi) = (*levels.start(), *levels.end());
    if lo > hi || hi > resolution {
        return Err(Error::InvalidArgument(format!(
            "level range {lo}..={hi} invalid for resolution {resolution}"
        )));
    }
    let mut out = Vec::with_capacity((1usize << (hi + 1)) - (1usize << lo));
    for level in lo..=hi {
        for index in 0..1u64 << level {
            out.push(DyadicCube { level, index });
        }
    }
    Ok(out)
}

/// Every cube of levels `0..=resolution`.
pub fn all_cubes(resolution: u32) -> Vec<DyadicCube> {
    enumerate_cubes(resolution, 0..=resolution).expect("full range is valid")
}
