//! Step-by-step replay of the main weak-type argument on a concrete instance.
//!
//! Given a certified sparse `S`, a function `f`, a weight `w` and a set `G`,
//! the replay builds `H`, `G' = G ∖ H`, sorts the cubes into ρ-bins `r`,
//! level classes `k` and generations `j`, and measures the constant in each
//! intermediate estimate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bumps::{shifted_log, EpsilonSpec};
use crate::error::{Error, Result};
use crate::grid::{same_resolution, CellSet, DyadicCube, GridFunction, Pyramid};
use crate::weights::{dyadic_maximal, maximal_abs, rho_all, Rho, Weight};

use super::{build_disjoint_eq, SparseCollection};

/// Bound applied to every measured constant.
pub const REPLAY_CONSTANT_BOUND: f64 = 16.0;

/// `r ≥ 0` with `2^r < x ≤ 2^{r+1}`, for `x > 1`.
pub fn band_index(x: f64) -> u32 {
    let mut r = 0u32;
    while x > (2.0f64).powi(r as i32 + 1) {
        r += 1;
    }
    r
}

/// `k ≥ −1` with `v ∈ (4^{-k-1}, 4^{-k}]`, for `0 < v ≤ 4`.
pub fn level_class(v: f64) -> i32 {
    let mut k = -1i32;
    while v <= (4.0f64).powi(-k - 1) {
        k += 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discard {
    /// `⟨f⟩_Q` exceeds the `H` threshold, so `Q ⊆ H`.
    AboveThreshold,
    /// `⟨f⟩_Q = 0`.
    ZeroAverage,
    /// `w(Q) = 0`.
    VacuousWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    pub cube: DyadicCube,
    pub avg_f: f64,
    pub rho: Option<f64>,
    pub r: Option<u32>,
    pub k: Option<i32>,
    pub j: Option<u32>,
    /// `2^r < shifted_log(ρ) ≤ 2·2^r`.
    pub eq1: Option<bool>,
    /// `ε(ρ)/ε(2^{2^r})`, informational.
    pub eps_ratio: Option<f64>,
    /// `w(G' ∩ Q)`.
    pub w_g_prime: f64,
    pub discard: Option<Discard>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassRegime {
    /// `k ≤ 10·2^r`.
    Coarse,
    /// `k > 10·2^r`.
    Far,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub r: u32,
    pub k: i32,
    pub regime: ClassRegime,
    pub cubes: usize,
    pub generations: u32,
    /// `Σ_{Q} ⟨f⟩_Q w(G' ∩ Q)`.
    pub partial_sum: f64,
    /// Coarse: `partial_sum / ∫|f| M^{S_r} w`.
    /// Far: `Σ ⟨f⟩_Q w(G' ∩ (Q ∖ Q_t)) / 2^{-k}`.
    pub constant: f64,
    /// Far only: `max_Q w(Q_t) / (2^{2^r} 2^{-k} w(Q))`.
    pub qt_weight_ratio: Option<f64>,
    /// Far only: every `Q_t` satisfies `|Q_t| ≤ 4^{-t}|Q|`.
    pub qt_measure_ok: Option<bool>,
    /// Far only: every `Q_t` is empty.
    pub qt_all_empty: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub r: u32,
    pub cubes: usize,
    /// `Σ_{Q∈S_r} ⟨f⟩_Q w(G' ∩ Q)`.
    pub sum: f64,
    /// `∫|f| M^{S_r} w`.
    pub majorant_integral: f64,
    /// `sum / (ε(2^{2^r})⁻¹ + 2^{-r})`, informational.
    pub target_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReplayFlags {
    /// `w(H) ≤ ¼ w(G)`.
    pub h_small: bool,
    /// `w(G) ≤ 2 w(G')`.
    pub g_prime_large: bool,
    /// Cubes discarded as above-threshold or vacuous have `w(G' ∩ Q) = 0`.
    pub discards_inert: bool,
    /// Band check on every binned cube.
    pub eq1: bool,
    /// Every class constant within [`REPLAY_CONSTANT_BOUND`].
    pub classes: bool,
}

impl ReplayFlags {
    pub fn all(&self) -> bool {
        self.h_small && self.g_prime_large && self.discards_inert && self.eq1 && self.classes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofReplayReport {
    pub resolution: u32,
    /// `4 / w(G)`.
    pub threshold: f64,
    pub w_g: f64,
    pub w_h: f64,
    pub w_g_prime: f64,
    /// `∫|f| M^D w`, the right side of the `w(H)` estimate up to `w(G)/4`.
    pub f_maximal_integral: f64,
    pub cubes: Vec<CubeRecord>,
    pub classes: Vec<ClassRecord>,
    pub bins: Vec<BinSummary>,
    pub flags: ReplayFlags,
    /// Largest class constant, 0 when there are no classes.
    pub max_constant: f64,
}

impl ProofReplayReport {
    pub fn pass(&self) -> bool {
        self.flags.all()
    }
}

fn mass_in(w: &[f64], set: &[bool], cells: std::ops::Range<usize>) -> f64 {
    let masked: Vec<f64> = cells.map(|x| if set[x] { w[x] } else { 0.0 }).collect();
    crate::grid::pairwise_sum(&masked)
}

/// Replay the argument on `(S, f, w, G)`.
///
/// `f` is used as given; callers normalize `∫|f| M_ε w = 1` beforehand.
/// Requires `0 < w(G)`, `⟨f⟩_{[0,1)} ≤ 4/w(G)` and a certified `S`.
pub fn proof_replay(
    s: &SparseCollection,
    f: &GridFunction,
    w: &Weight,
    g: &CellSet,
    eps: &EpsilonSpec,
) -> Result<ProofReplayReport> {
    let n = f.resolution();
    same_resolution(n, s.resolution())?;
    same_resolution(n, w.resolution())?;
    same_resolution(n, g.resolution())?;
    eps.validate()?;
    let cert = build_disjoint_eq(s).map_err(|e| Error::Precondition(e.to_string()))?;

    let width = w.cell_width();
    let wv = w.values();
    let full = 0..wv.len();
    let w_g = mass_in(wv, g.mask(), full.clone()) * width;
    if !(w_g > 0.0 && w_g.is_finite()) {
        return Err(Error::Precondition(format!("w(G) must be positive and finite, got {w_g}")));
    }
    let threshold = 4.0 / w_g;
    let pf = Pyramid::of_abs(f);
    let root_avg = pf.average(&DyadicCube::ROOT);
    if root_avg > threshold {
        return Err(Error::Precondition(format!(
            "⟨f⟩ over [0,1) is {root_avg}, above the threshold 4/w(G) = {threshold}"
        )));
    }

    // H = {M^D f > 4/w(G)}, the union of the maximal cubes above threshold.
    let mf = maximal_abs(f);
    let h_mask: Vec<bool> = mf.values().iter().map(|&v| v > threshold).collect();
    let gp_mask: Vec<bool> = g.mask().iter().zip(&h_mask).map(|(&a, &b)| a && !b).collect();
    let w_h = mass_in(wv, &h_mask, full.clone()) * width;
    let w_g_prime = mass_in(wv, &gp_mask, full) * width;
    let f_maximal_integral = crate::bumps::pairing_abs(f, &dyadic_maximal(w))?;

    let mut flags = ReplayFlags {
        h_small: 4.0 * w_h <= w_g,
        g_prime_large: w_g <= 2.0 * w_g_prime,
        discards_inert: true,
        eq1: true,
        classes: true,
    };

    let table = rho_all(w);
    let wp = Pyramid::of_abs(w);
    let mut records = Vec::with_capacity(s.len());
    // (r, k) -> member indices into `records`
    let mut class_members: BTreeMap<(u32, i32), Vec<usize>> = BTreeMap::new();
    for q in s.cubes() {
        let cells = q.cells(n)?;
        let avg_f = pf.average(q);
        let w_gp_q = mass_in(wv, &gp_mask, cells) * width;
        let mut rec = CubeRecord {
            cube: *q,
            avg_f,
            rho: None,
            r: None,
            k: None,
            j: None,
            eq1: None,
            eps_ratio: None,
            w_g_prime: w_gp_q,
            discard: None,
        };
        let rho = match table.get(q) {
            Rho::Vacuous => {
                rec.discard = Some(Discard::VacuousWeight);
                None
            }
            Rho::Value(v) => Some(v),
        };
        rec.rho = rho;
        if let Some(rho) = rho {
            if avg_f > threshold {
                rec.discard = Some(Discard::AboveThreshold);
            } else if avg_f == 0.0 {
                rec.discard = Some(Discard::ZeroAverage);
            } else {
                let lg = shifted_log(rho);
                let r = band_index(lg);
                let lo = (2.0f64).powi(r as i32);
                let eq1 = lo < lg && lg <= 2.0 * lo;
                flags.eq1 &= eq1;
                let k = level_class(avg_f * w_g);
                rec.r = Some(r);
                rec.k = Some(k);
                rec.eq1 = Some(eq1);
                rec.eps_ratio = Some(eps.eval(rho) * eps.inverse_at_double_exp(r));
                class_members.entry((r, k)).or_default().push(records.len());
            }
        }
        if matches!(rec.discard, Some(Discard::AboveThreshold | Discard::VacuousWeight)) && w_gp_q != 0.0 {
            flags.discards_inert = false;
        }
        records.push(rec);
    }
    debug_assert_eq!(cert.collection().len(), records.len());

    // Per-bin majorant M^{S_r} w over the binned cubes.
    let mut bins: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (&(r, _), members) in &class_members {
        bins.entry(r).or_default().extend(members);
    }
    let mut bin_integrals: BTreeMap<u32, f64> = BTreeMap::new();
    let mut bin_summaries = Vec::new();
    for (&r, members) in &bins {
        let mut maj = vec![0.0f64; wv.len()];
        for &i in members {
            let q = records[i].cube;
            let avg = wp.average(&q);
            for x in &mut maj[q.cells(n)?] {
                *x = x.max(avg);
            }
        }
        let integral = crate::bumps::pairing_abs(f, &GridFunction::new(n, maj)?)?;
        bin_integrals.insert(r, integral);
        let sum: f64 = members.iter().map(|&i| records[i].avg_f * records[i].w_g_prime).sum();
        let target = eps.inverse_at_double_exp(r) + (-(r as f64)).exp2();
        bin_summaries.push(BinSummary {
            r,
            cubes: members.len(),
            sum,
            majorant_integral: integral,
            target_ratio: sum / target,
        });
    }

    let mut classes = Vec::new();
    for (&(r, k), members) in &class_members {
        let class = SparseCollection::new(n, members.iter().map(|&i| records[i].cube))?;
        let forest = class.forest();
        for &i in members {
            let pos = class.position(&records[i].cube).expect("member");
            records[i].j = Some(forest.depth[pos]);
        }
        let generations = forest.depth.iter().copied().max().map_or(0, |d| d + 1);
        let partial_sum: f64 = members.iter().map(|&i| records[i].avg_f * records[i].w_g_prime).sum();
        let far = (k as i64) > 10 * (1i64 << r.min(40));
        let mut rec = ClassRecord {
            r,
            k,
            regime: if far { ClassRegime::Far } else { ClassRegime::Coarse },
            cubes: members.len(),
            generations,
            partial_sum,
            constant: 0.0,
            qt_weight_ratio: None,
            qt_measure_ok: None,
            qt_all_empty: None,
            pass: true,
        };
        if !far {
            let denom = bin_integrals[&r];
            rec.constant = if partial_sum == 0.0 { 0.0 } else { partial_sum / denom };
        } else {
            // t = 2^k generations below Q; beyond the deepest generation Q_t is empty.
            let t: u64 = if k >= 63 { u64::MAX } else { 1u64 << k };
            let mut qt_ratio = 0.0f64;
            let mut measure_ok = true;
            let mut all_empty = true;
            let mut rest = 0.0;
            let scale = (-(k as f64)).exp2();
            for (pos, q) in class.cubes().iter().enumerate() {
                let j = forest.depth[pos] as u64;
                let target = j.saturating_add(t);
                let mut qt = CellSet::empty(n);
                for (p2, q2) in class.cubes().iter().enumerate() {
                    if forest.depth[p2] as u64 == target && q.strictly_contains(q2) {
                        for x in q2.cells(n)? {
                            qt.insert(x);
                        }
                    }
                }
                let q_cells = q.cells(n)?;
                let qt_cells = qt.count() as u128;
                if qt_cells > 0 {
                    all_empty = false;
                    let fits = t < 64 && (qt_cells << (2 * t)) <= q_cells.len() as u128;
                    measure_ok &= fits;
                    let w_qt = mass_in(wv, qt.mask(), 0..wv.len()) * width;
                    let bound = (2.0f64).powf((2.0f64).powi(r as i32)) * scale * w.mass(q)?;
                    qt_ratio = qt_ratio.max(w_qt / bound);
                }
                let rest_mask: Vec<bool> =
                    gp_mask.iter().zip(qt.mask()).map(|(&a, &b)| a && !b).collect();
                let idx = members[class_member_index(members, &records, q)];
                rest += records[idx].avg_f * mass_in(wv, &rest_mask, q_cells) * width;
            }
            rec.constant = rest / scale;
            rec.qt_weight_ratio = Some(qt_ratio);
            rec.qt_measure_ok = Some(measure_ok);
            rec.qt_all_empty = Some(all_empty);
            rec.pass &= measure_ok;
        }
        rec.pass &= rec.constant <= REPLAY_CONSTANT_BOUND;
        flags.classes &= rec.pass;
        classes.push(rec);
    }

    let max_constant = classes.iter().map(|c| c.constant).fold(0.0, f64::max);
    Ok(ProofReplayReport {
        resolution: n,
        threshold,
        w_g,
        w_h,
        w_g_prime,
        f_maximal_integral,
        cubes: records,
        classes,
        bins: bin_summaries,
        flags,
        max_constant,
    })
}

fn class_member_index(members: &[usize], records: &[CubeRecord], q: &DyadicCube) -> usize {
    members.iter().position(|&i| records[i].cube == *q).expect("class member")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::enumerate_cubes;

    #[test]
    fn band_and_level_edges() {
        assert_eq!(band_index(3f64.log2()), 0);
        assert_eq!(band_index(2.0), 0);
        assert_eq!(band_index(2.0000001), 1);
        assert_eq!(band_index(4.0), 1);
        assert_eq!(band_index(4.5), 2);
        assert_eq!(level_class(4.0), -1);
        assert_eq!(level_class(1.5), -1);
        assert_eq!(level_class(1.0), 0);
        assert_eq!(level_class(0.25), 1);
        assert_eq!(level_class(0.2), 1);
        assert_eq!(level_class(0.0625), 2);
    }

    #[test]
    fn zero_function_is_vacuous() {
        let n = 4;
        let s = SparseCollection::new(n, [DyadicCube::ROOT, DyadicCube::new(2, 1).unwrap()]).unwrap();
        let f = GridFunction::zeros(n).unwrap();
        let w = Weight::constant(n, 1.0).unwrap();
        let g = CellSet::full(n);
        let rep = proof_replay(&s, &f, &w, &g, &EpsilonSpec::LogPow { p: 2.0 }).unwrap();
        assert!(rep.pass());
        assert!(rep.classes.is_empty());
        assert_eq!(rep.w_h, 0.0);
        assert!(rep.cubes.iter().all(|c| c.discard == Some(Discard::ZeroAverage)));
    }

    #[test]
    fn single_root_hand_trace() {
        let n = 3;
        let s = SparseCollection::new(n, [DyadicCube::ROOT]).unwrap();
        let f = GridFunction::constant(n, 1.0).unwrap();
        let w = Weight::constant(n, 1.0).unwrap();
        let rep = proof_replay(&s, &f, &w, &CellSet::full(n), &EpsilonSpec::LogPow { p: 2.0 }).unwrap();
        assert_eq!(rep.w_g, 1.0);
        assert_eq!(rep.threshold, 4.0);
        assert_eq!(rep.w_h, 0.0);
        assert_eq!(rep.w_g_prime, 1.0);
        let c = &rep.cubes[0];
        assert_eq!(c.rho, Some(1.0));
        assert_eq!((c.r, c.k, c.j), (Some(0), Some(0), Some(0)));
        assert_eq!(rep.classes.len(), 1);
        assert_eq!(rep.classes[0].regime, ClassRegime::Coarse);
        assert_eq!(rep.classes[0].constant, 1.0);
        assert!(rep.pass());
    }

    #[test]
    fn every_cube_is_placed_or_discarded() {
        let n = 5;
        let vals: Vec<f64> = (0..32).map(|i| ((i * 7) % 11) as f64).collect();
        let f = GridFunction::new(n, vals.clone()).unwrap();
        let w = Weight::from_values(n, vals.iter().map(|v| v + 0.5).collect()).unwrap();
        let s = crate::sparse::cz_stopping_collection(&f, &DyadicCube::ROOT, 3.0).unwrap();
        let g = CellSet::from_cells(n, 0..20).unwrap();
        let scale = 0.5 / crate::bumps::pairing_abs(&f, &dyadic_maximal(&w)).unwrap();
        let rep = proof_replay(&s, &f.scale(scale), &w, &g, &EpsilonSpec::LogPow { p: 2.0 }).unwrap();
        for c in &rep.cubes {
            assert_ne!(c.discard.is_some(), c.r.is_some() && c.k.is_some() && c.j.is_some());
        }
        assert!(rep.flags.h_small);
        assert!(rep.flags.g_prime_large);
    }

    #[test]
    fn rejects_bad_inputs() {
        let n = 3;
        let w = Weight::constant(n, 1.0).unwrap();
        let f = GridFunction::constant(n, 1.0).unwrap();
        let s = SparseCollection::new(n, [DyadicCube::ROOT]).unwrap();
        let eps = EpsilonSpec::LogPow { p: 2.0 };
        assert!(proof_replay(&s, &f, &w, &CellSet::empty(n), &eps).is_err());
        assert!(proof_replay(&s, &f.scale(100.0), &w, &CellSet::full(n), &eps).is_err());
        let dense = SparseCollection::new(n, enumerate_cubes(n, 0..=1).unwrap()).unwrap();
        assert!(proof_replay(&dense, &f, &w, &CellSet::full(n), &eps).is_err());
    }
}
