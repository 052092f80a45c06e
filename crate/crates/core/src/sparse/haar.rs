use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{inner_product, MAX_RESOLUTION, same_resolution, DyadicCube, GridFunction, Pyramid};

use super::forms::{bilinear_form, joint_stopping_collection};
use super::SparseCollection;

/// Signs `σ_Q ∈ {±1}` on every cube of levels `0..N`, stored heap-ordered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaarSpec {
    resolution: u32,
    signs: Vec<i8>,
}

fn heap_index(cube: &DyadicCube) -> usize {
    (1usize << cube.level()) - 1 + cube.index() as usize
}

impl HaarSpec {
    pub fn constant(resolution: u32, sign: i8) -> Result<Self> {
        check_sign(sign)?;
        check_resolution(resolution)?;
        Ok(HaarSpec { resolution, signs: vec![sign; (1usize << resolution) - 1] })
    }

    pub fn random<R: Rng + ?Sized>(resolution: u32, rng: &mut R) -> Result<Self> {
        check_resolution(resolution)?;
        let signs = (0..(1usize << resolution) - 1).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        Ok(HaarSpec { resolution, signs })
    }

    /// Every cube of level `< N` must be present.
    pub fn from_map(resolution: u32, map: &HashMap<DyadicCube, i8>) -> Result<Self> {
        let mut spec = HaarSpec::constant(resolution, 1)?;
        for level in 0..resolution {
            for j in 0..1u64 << level {
                let q = DyadicCube::new(level, j)?;
                let s = *map
                    .get(&q)
                    .ok_or_else(|| Error::InvalidArgument(format!("no sign for cube {q}")))?;
                check_sign(s)?;
                spec.signs[heap_index(&q)] = s;
            }
        }
        if let Some(extra) = map.keys().find(|q| q.level() >= resolution) {
            return Err(Error::InvalidCube { cube: *extra, reason: "no Haar function at this level".into() });
        }
        Ok(spec)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn sign(&self, cube: &DyadicCube) -> Option<i8> {
        (cube.level() < self.resolution).then(|| self.signs[heap_index(cube)])
    }
}

fn check_resolution(resolution: u32) -> Result<()> {
    if resolution > MAX_RESOLUTION {
        return Err(Error::InvalidGrid(format!("resolution {resolution} exceeds {MAX_RESOLUTION}")));
    }
    Ok(())
}

fn check_sign(s: i8) -> Result<()> {
    if s == 1 || s == -1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sign must be ±1, got {s}")))
    }
}

/// `h_Q = |Q|^{-1/2}(1_{Q_left} − 1_{Q_right})`.
pub fn haar_function(cube: &DyadicCube, resolution: u32) -> Result<GridFunction> {
    if cube.level() >= resolution {
        return Err(Error::InvalidCube {
            cube: *cube,
            reason: format!("needs level < {resolution}"),
        });
    }
    let h = cube.measure().sqrt().recip();
    let [left, right] = cube.children();
    let mut out = GridFunction::zeros(resolution)?.into_values();
    for x in &mut out[left.cells(resolution)?] {
        *x = h;
    }
    for x in &mut out[right.cells(resolution)?] {
        *x = -h;
    }
    GridFunction::new(resolution, out)
}

/// `Tf = Σ_Q σ_Q ⟨f, h_Q⟩ h_Q`.
///
/// On a cell inside child `Q'` of `Q` the `Q` term equals
/// `σ_Q (mean_{Q'} f − mean_Q f)`, so one top-down sweep suffices.
pub fn haar_transform(spec: &HaarSpec, f: &GridFunction) -> Result<GridFunction> {
    same_resolution(spec.resolution, f.resolution())?;
    let n = f.resolution();
    let pyr = Pyramid::of_signed(f);
    let mut acc = vec![0.0f64];
    for level in 1..=n {
        acc = (0..1usize << level)
            .map(|j| {
                let parent = j >> 1;
                let sigma = spec.signs[(1usize << (level - 1)) - 1 + parent] as f64;
                acc[parent] + sigma * (pyr.average_at(level, j) - pyr.average_at(level - 1, parent))
            })
            .collect();
    }
    GridFunction::new(n, acc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominationResult {
    /// One collection: a single dyadic lattice suffices in one dimension.
    pub collections: Vec<SparseCollection>,
    /// `⟨Tf, g⟩`.
    pub pairing: f64,
    /// `Λ_S(f, g)`.
    pub form: f64,
    /// `|⟨Tf, g⟩| / Λ_S(f, g)`; 0 for `0/0`, infinite for `x/0`.
    pub ratio: f64,
}

/// Measure `|⟨Tf, g⟩| / Λ_S(f, g)` for the martingale transform `T`.
///
/// `S` holds the cubes where either `⟨f⟩` or `⟨g⟩` jumps by more than `a`
/// relative to the last selected ancestor.
pub fn sparse_dominate_bilinear(spec: &HaarSpec, f: &GridFunction, g: &GridFunction, a: f64) -> Result<DominationResult> {
    same_resolution(f.resolution(), g.resolution())?;
    if f.is_identically_zero() || g.is_identically_zero() {
        return Err(Error::InvalidArgument("f and g must not vanish identically".into()));
    }
    let s = joint_stopping_collection(&[f, g], &DyadicCube::ROOT, a)?;
    let tf = haar_transform(spec, f)?;
    let pairing = inner_product(&tf, g)?;
    let collections = vec![s];
    let form = bilinear_form(&collections, f, g)?;
    let ratio = if pairing == 0.0 {
        0.0
    } else if form == 0.0 {
        f64::INFINITY
    } else {
        pairing.abs() / form
    };
    Ok(DominationResult { collections, pairing, form, ratio })
}
