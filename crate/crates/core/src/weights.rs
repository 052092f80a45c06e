//! Weights, dyadic maximal functions and the entropy functional `ρ_w(Q)`.
//!
//! `ρ_w(Q) = w(Q)⁻¹ ∫_Q M^D(w·1_Q)` is computed with the dyadic maximal
//! function. For a cell `x ∈ Q` the localized maximal value is the largest
//! average over the cubes on the ancestor path of `x` between the cell and
//! `Q`. [`rho_all`] sweeps levels from fine to coarse, keeping that running
//! maximum per cell, so the whole table costs `O(n log n)`.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::shifted_log;
use crate::error::{Error, Result};
use crate::grid::{
    check_weight_values, integral, pairwise_sum, CellSet, DyadicCube, GridFunction, Pyramid,
};

/// A non-negative grid function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight(GridFunction);

impl Weight {
    pub fn new(g: GridFunction) -> Result<Self> {
        check_weight_values(&g)?;
        Ok(Weight(g))
    }

    pub fn constant(resolution: u32, c: f64) -> Result<Self> {
        if c < 0.0 {
            return Err(Error::InvalidWeight(format!("constant {c} is negative")));
        }
        Ok(Weight(GridFunction::constant(resolution, c)?))
    }

    pub fn from_values(resolution: u32, values: Vec<f64>) -> Result<Self> {
        Weight::new(GridFunction::new(resolution, values)?)
    }

    pub fn as_grid(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_grid(self) -> GridFunction {
        self.0
    }

    /// `c·w`, `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Weight> {
        Weight::new(self.0.scale(c))
    }

    /// `w(Q) = ∫_Q w`.
    pub fn mass(&self, cube: &DyadicCube) -> Result<f64> {
        let cells = cube.cells(self.resolution())?;
        Ok(pairwise_sum(&self.values()[cells]) * self.cell_width())
    }

    fn require_nonzero(&self) -> Result<()> {
        if self.is_identically_zero() {
            return Err(Error::InvalidWeight("weight vanishes identically".into()));
        }
        Ok(())
    }
}

impl Deref for Weight {
    type Target = GridFunction;

    fn deref(&self) -> &GridFunction {
        &self.0
    }
}

/// Top-down running maximum of averages along every ancestor path,
/// starting at `top` and restricted to its cells.
fn path_maxima(pyr: &Pyramid, top: &DyadicCube) -> Vec<f64> {
    let n = pyr.resolution();
    let mut best = vec![pyr.average(top)];
    for level in top.level() + 1..=n {
        let offset = (top.index() as usize) << (level - top.level());
        best = (0..best.len() * 2)
            .map(|j| best[j >> 1].max(pyr.average_at(level, offset + j)))
            .collect();
    }
    best
}

/// `M^D |f|`: per cell, the largest `⟨f⟩_Q` over dyadic `Q` containing it.
pub fn maximal_abs(f: &GridFunction) -> GridFunction {
    let pyr = Pyramid::of_abs(f);
    let values = path_maxima(&pyr, &DyadicCube::ROOT);
    GridFunction::new(f.resolution(), values).expect("maxima of finite averages are finite")
}

/// `M^D w`.
pub fn dyadic_maximal(w: &Weight) -> GridFunction {
    maximal_abs(w)
}

/// `M^D(w·1_Q)` on the cells of `Q`, in cell order.
pub fn localized_maximal(w: &Weight, cube: &DyadicCube) -> Result<Vec<f64>> {
    cube.check_resolution(w.resolution())?;
    let cells = cube.cells(w.resolution())?;
    let local = GridFunction::new(
        w.resolution() - cube.level(),
        w.values()[cells].to_vec(),
    )?;
    Ok(path_maxima(&Pyramid::of_abs(&local), &DyadicCube::ROOT))
}

/// Value of `ρ_w(Q)`, or `Vacuous` when `w(Q) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rho {
    Value(f64),
    Vacuous,
}

impl Rho {
    /// Numeric value; vacuous cubes count as `ρ = 1`.
    pub fn value(self) -> f64 {
        match self {
            Rho::Value(v) => v,
            Rho::Vacuous => 1.0,
        }
    }

    pub fn is_vacuous(self) -> bool {
        matches!(self, Rho::Vacuous)
    }
}

/// `ρ_w(Q) = w(Q)⁻¹ ∫_Q M^D(w·1_Q)`.
pub fn rho(w: &Weight, cube: &DyadicCube) -> Result<Rho> {
    let cells = cube.cells(w.resolution())?;
    let mass = pairwise_sum(&w.values()[cells]);
    if mass == 0.0 {
        return Ok(Rho::Vacuous);
    }
    let local = localized_maximal(w, cube)?;
    Ok(Rho::Value(pairwise_sum(&local) / mass))
}

/// `ρ_w(Q)` for every cube of levels `0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoTable {
    resolution: u32,
    /// `values[ℓ][j]`; vacuous entries hold 1.
    values: Vec<Vec<f64>>,
    vacuous: Vec<Vec<bool>>,
}

impl RhoTable {
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn get(&self, cube: &DyadicCube) -> Rho {
        let (l, j) = (cube.level() as usize, cube.index() as usize);
        if self.vacuous[l][j] {
            Rho::Vacuous
        } else {
            Rho::Value(self.values[l][j])
        }
    }

    pub(crate) fn value_at(&self, level: u32, index: usize) -> f64 {
        self.values[level as usize][index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicCube, Rho)> + '_ {
        (0..=self.resolution).flat_map(move |l| {
            (0..1u64 << l).map(move |j| {
                let q = DyadicCube::new(l, j).expect("in range");
                (q, self.get(&q))
            })
        })
    }

    /// Largest non-vacuous entry, if any.
    pub fn max_value(&self) -> Option<f64> {
        self.iter().filter_map(|(_, r)| match r {
            Rho::Value(v) => Some(v),
            Rho::Vacuous => None,
        })
        .reduce(f64::max)
    }
}

/// The full [`RhoTable`] in `O(n log n)`.
///
/// Output is bit-identical to calling [`rho`] per cube: maxima are exact,
/// and every block sum uses the same pairwise order.
pub fn rho_all(w: &Weight) -> RhoTable {
    let n = w.resolution();
    let pyr = Pyramid::of_abs(w);
    let mut running: Vec<f64> = w.values().to_vec();
    let mut values = vec![Vec::new(); n as usize + 1];
    let mut vacuous = vec![Vec::new(); n as usize + 1];

    for level in (0..=n).rev() {
        let shift = n - level;
        if level < n {
            running.par_iter_mut().enumerate().for_each(|(x, m)| {
                *m = m.max(pyr.average_at(level, x >> shift));
            });
        }
        let block = 1usize << shift;
        let integrals: Vec<f64> = running.par_chunks(block).map(pairwise_sum).collect();
        let masses = pyr.level_sums(level);
        let (vals, vac): (Vec<f64>, Vec<bool>) = integrals
            .iter()
            .zip(masses)
            .map(|(&m, &mass)| if mass == 0.0 { (1.0, true) } else { (m / mass, false) })
            .unzip();
        values[level as usize] = vals;
        vacuous[level as usize] = vac;
    }
    RhoTable { resolution: n, values, vacuous }
}

/// Discrete `[w]_{A₁} = max_x M^D w(x)/w(x)`.
///
/// Returns `f64::INFINITY` when some cell has `w = 0` but `M^D w > 0`.
pub fn a1_constant(w: &Weight) -> Result<f64> {
    w.require_nonzero()?;
    let m = dyadic_maximal(w);
    let mut worst: f64 = 0.0;
    for (&mv, &wv) in m.values().iter().zip(w.values()) {
        if wv == 0.0 {
            if mv > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        worst = worst.max(mv / wv);
    }
    Ok(worst)
}

/// Wilson `[w]_{A_∞} = max_Q ρ_w(Q)` over non-vacuous cubes.
pub fn ainf_constant(w: &Weight) -> Result<f64> {
    w.require_nonzero()?;
    Ok(rho_all(w).max_value().unwrap_or(1.0))
}

/// `w(E)·log(|Q|/|E|) / (w(Q)·ρ_w(Q))` with the shifted logarithm.
pub fn ainf_lemma_ratio(w: &Weight, cube: &DyadicCube, e: &CellSet) -> Result<f64> {
    let n = w.resolution();
    let q_set = CellSet::from_cube(n, cube)?;
    if e.resolution() != n {
        return Err(Error::ResolutionMismatch { left: n, right: e.resolution() });
    }
    if e.is_empty() {
        return Err(Error::InvalidArgument("subset E is empty".into()));
    }
    if !e.is_subset(&q_set)? {
        return Err(Error::InvalidArgument(format!("subset E is not contained in {cube}")));
    }
    let w_e = integral(w, e)?;
    if w_e == 0.0 {
        return Ok(0.0);
    }
    let w_q = w.mass(cube)?;
    let r = rho(w, cube)?.value();
    let size_ratio = q_set.count() as f64 / e.count() as f64;
    Ok(w_e * shifted_log(size_ratio) / (w_q * r))
}

/// Cell averages of `x^{-s}`, `0 ≤ s < 1`.
pub fn power_weight(s: f64, resolution: u32) -> Result<Weight> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("power exponent must lie in [0, 1), got {s}")));
    }
    if s == 0.0 {
        return Weight::constant(resolution, 1.0);
    }
    let n = resolution as f64;
    let a = 1.0 - s;
    // 2^N·((j+1)^a − j^a)·2^{-N·a}/a
    let scale = (n * s).exp2() / a;
    let values = (0..1usize << resolution)
        .map(|j| {
            let j = j as f64;
            scale * ((j + 1.0).powf(a) - j.powf(a))
        })
        .collect();
    Weight::from_values(resolution, values)
}

/// `(M^D |g|)^s`, an `A₁`-type weight for `0 < s < 1`.
pub fn a1_generator(g: &GridFunction, s: f64) -> Result<Weight> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("exponent must lie in (0, 1), got {s}")));
    }
    if g.is_identically_zero() {
        return Err(Error::InvalidArgument("generator function vanishes identically".into()));
    }
    Weight::new(maximal_abs(g).map(|v| v.powf(s)))
}

/// [`a1_generator`] applied to a seeded heavy-tailed random function.
pub fn a1_generator_seeded(resolution: u32, s: f64, seed: u64) -> Result<Weight> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = GridFunction::from_fn(resolution, |_| {
        let u: f64 = rng.gen_range(1e-3..1.0);
        u.powi(-2) * if rng.gen_bool(0.3) { 1.0 } else { 1e-2 }
    })?;
    a1_generator(&g, s)
}
