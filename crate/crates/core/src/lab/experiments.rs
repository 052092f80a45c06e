use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{random_cube, trial_rng, FunctionFamily, OperatorFamily, TrialConfig, WeightFamily};
use super::report::{median, ExperimentReport, TrialRecord};
use crate::bumps::{
    k_epsilon, m_coeff, m_entropy_all, m_orlicz, pairing_abs, shifted_log, Coefficients, EntropyVariant,
    EpsilonSpec, OrliczSpec, ORLICZ_TOL,
};
use crate::error::{Error, Result};
use crate::grid::{all_cubes, pairwise_sum, weak_l1_norm, CellSet, DyadicCube, GridFunction};
use crate::sparse::{
    carleson_check, cz_stopping_collection, haar_transform, proof_replay, sparse_dominate_bilinear,
    sparse_operator, split_eight, stronger_sparse_check, CarlesonConvention, HaarSpec, SparseCollection,
};
use crate::weights::{a1_constant, ainf_constant, ainf_lemma_ratio, dyadic_maximal, power_weight, Weight};

/// Tolerance and term cap used for `K_ε` in the experiments.
pub const K_EPS_TOL: f64 = 1e-15;
pub const K_EPS_MAX_TERMS: usize = 1_000_000;

/// `‖Tf‖_{L^{1,∞}(w)} / ∫|f|·majorant`.
pub fn weak_type_quotient(tf: &GridFunction, f: &GridFunction, w: &Weight, majorant: &GridFunction) -> Result<f64> {
    if majorant.values().iter().any(|&m| m < 0.0) {
        return Err(Error::InvalidArgument("majorant must be non-negative".into()));
    }
    let denom = pairing_abs(f, majorant)?;
    if !(denom > 0.0) {
        return Err(Error::InvalidArgument("∫|f|·majorant vanishes".into()));
    }
    Ok(weak_l1_norm(tf, w)? / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `λ·w({M^S_α f > λ}) ≤ ∫|f|·M^S_α w`, checked to relative `1e-9`.
pub fn fs_check(cubes: &[DyadicCube], alpha: &Coefficients, f: &GridFunction, w: &Weight, lambda: f64) -> Result<FsOutcome> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    let mf = m_coeff(f, alpha, cubes)?;
    let mw = m_coeff(w, alpha, cubes)?;
    let masked: Vec<f64> = mf
        .values()
        .iter()
        .zip(w.values())
        .map(|(&m, &wv)| if m > lambda { wv } else { 0.0 })
        .collect();
    let lhs = lambda * pairwise_sum(&masked) * w.cell_width();
    let rhs = pairing_abs(f, &mw)?;
    Ok(FsOutcome { lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-9) })
}

fn label(w: &WeightFamily, f: FunctionFamily, o: OperatorFamily) -> String {
    format!("{w}/{f:?}/{o:?}")
}

/// Resolution for a sweep trial: random in `1..=N` unless a fixed raw weight pins it.
fn sweep_resolution(cfg: &TrialConfig, rng: &mut ChaCha8Rng) -> u32 {
    if cfg.resolution == 0 || cfg.weights.iter().any(|w| matches!(w, WeightFamily::Raw { .. })) {
        cfg.resolution
    } else {
        rng.gen_range(1..=cfg.resolution)
    }
}

/// Heavy-tailed non-negative test function with occasional zero cells.
fn heavy_tailed(resolution: u32, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
    Ok(WeightFamily::Random { spread: 3.0 }.draw(resolution, rng)?.into_grid())
}

fn random_signs(f: GridFunction, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
    let v = f.values().iter().map(|&x| if rng.gen_bool(0.5) { x } else { -x }).collect();
    GridFunction::new(f.resolution(), v)
}

/// `Tf` for the chosen operator, plus side measurements.
fn apply_operator(
    op: OperatorFamily,
    f: &GridFunction,
    w: &Weight,
    a: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(GridFunction, BTreeMap<String, f64>)> {
    let mut extras = BTreeMap::new();
    let n = f.resolution();
    match op {
        OperatorFamily::StoppingSparse => {
            let s = cz_stopping_collection(f, &DyadicCube::ROOT, a)?;
            extras.insert("sparse_cubes".into(), s.len() as f64);
            Ok((sparse_operator(&s, f)?, extras))
        }
        OperatorFamily::HaarRandomSigns => {
            let spec = HaarSpec::random(n, rng)?;
            let tf = haar_transform(&spec, f)?;
            if !tf.is_identically_zero() {
                let g = GridFunction::new(
                    n,
                    tf.values().iter().zip(w.values()).map(|(&t, &wv)| t.signum() * wv).collect(),
                )?;
                if !g.is_identically_zero() {
                    let dom = sparse_dominate_bilinear(&spec, f, &g, a)?;
                    extras.insert("domination_ratio".into(), dom.ratio);
                }
            }
            Ok((tf, extras))
        }
    }
}

fn checked_k_eps(eps: &EpsilonSpec) -> Result<f64> {
    let k = k_epsilon(eps, K_EPS_TOL, K_EPS_MAX_TERMS);
    if k.diverged {
        return Err(Error::InvalidArgument(format!(
            "K_ε for {eps} does not converge within {K_EPS_MAX_TERMS} terms"
        )));
    }
    Ok(k.value)
}

fn run_trials<F>(trials: usize, body: F) -> Result<Vec<TrialRecord>>
where
    F: Fn(usize) -> Result<TrialRecord> + Sync + Send,
{
    (0..trials).into_par_iter().map(body).collect()
}

/// Weak-type quotient against `K_ε·∫|f| M_ε w` over the configured families.
pub fn main_theorem_experiment(cfg: &TrialConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let k_eps = checked_k_eps(&cfg.eps)?;
    let n = cfg.resolution;
    let records = run_trials(cfg.trials, |i| {
        let mut rng = trial_rng(cfg.seed, i as u64);
        let (wf, ff, of) = cfg.families(i);
        let w = wf.draw(n, &mut rng)?.scaled(cfg.weight_scale)?;
        let majorant = m_entropy_all(&w, &cfg.eps, EntropyVariant::Log);
        let f = ff.draw(n, &mut rng, &majorant)?;
        let f = f.scale(pairing_abs(&f, &majorant)?.recip());
        let (tf, extras) = apply_operator(of, &f, &w, cfg.a, &mut rng)?;
        let q = weak_type_quotient(&tf, &f, &w, &majorant)?;
        let mut rec = TrialRecord::new(i, label(wf, ff, of), q, q / k_eps);
        rec.s = wf.exponent();
        rec.k_eps = Some(k_eps);
        rec.a1 = Some(a1_constant(&w)?);
        rec.ainf = Some(ainf_constant(&w)?);
        rec.pass = rec.normalized_quotient <= cfg.bound;
        rec.extras = extras;
        Ok(rec)
    })?;
    let mut report = ExperimentReport::new("main_theorem", cfg.seed, cfg, records)?;
    report.summary.insert("k_eps".into(), k_eps);
    report.pass_flags.insert("max_normalized_quotient_within_bound".into(), report.aggregates.max <= cfg.bound);
    Ok(report)
}

/// Power weights: weak-type quotient with majorant `w`, normalized by
/// `[w]_{A₁}·shifted_log([w]_{A_∞})`. `cfg.bound` is the allowed max/median factor.
pub fn corollary_experiment(s_list: &[f64], cfg: &TrialConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if s_list.is_empty() {
        return Err(Error::InvalidArgument("s list is empty".into()));
    }
    if let Some(s) = s_list.iter().find(|s| !(0.0..1.0).contains(*s)) {
        return Err(Error::InvalidArgument(format!("s must lie in [0, 1), got {s}")));
    }
    let n = cfg.resolution;
    let mut records = Vec::new();
    let mut per_s_max = Vec::new();
    let mut summary = BTreeMap::new();
    for (si, &s) in s_list.iter().enumerate() {
        let w = power_weight(s, n)?.scaled(cfg.weight_scale)?;
        let a1 = a1_constant(&w)?;
        let ainf = ainf_constant(&w)?;
        let norm = a1 * shifted_log(ainf);
        let wf = WeightFamily::Power { s };
        let recs = run_trials(cfg.trials, |t| {
            let mut rng = trial_rng(cfg.seed, t as u64);
            let (_, ff, of) = cfg.families(t);
            let f = ff.draw(n, &mut rng, &w)?;
            let f = f.scale(pairing_abs(&f, &w)?.recip());
            let (tf, extras) = apply_operator(of, &f, &w, cfg.a, &mut rng)?;
            let q = weak_type_quotient(&tf, &f, &w, &w)?;
            let mut rec = TrialRecord::new(si * cfg.trials + t, label(&wf, ff, of), q, q / norm);
            rec.s = Some(s);
            rec.a1 = Some(a1);
            rec.ainf = Some(ainf);
            rec.extras = extras;
            Ok(rec)
        })?;
        let m = recs.iter().map(|r| r.normalized_quotient).fold(0.0, f64::max);
        summary.insert(format!("max_normalized[s={s}]"), m);
        summary.insert(format!("a1[s={s}]"), a1);
        summary.insert(format!("ainf[s={s}]"), ainf);
        per_s_max.push(m);
        records.extend(recs);
    }
    let max = per_s_max.iter().copied().fold(0.0, f64::max);
    let med = median(&per_s_max);
    summary.insert("max_over_s".into(), max);
    summary.insert("median_over_s".into(), med);
    summary.insert("max_over_median".into(), max / med);
    let pass = max <= cfg.bound * med;
    for r in &mut records {
        r.pass = pass;
    }
    let mut report = ExperimentReport::new("corollary", cfg.seed, &(cfg, s_list), records)?;
    report.summary = summary;
    report.pass_flags.insert("max_within_factor_of_median".into(), pass);
    Ok(report)
}

/// Random subset `E ⊆ Q`: random cells, a subcube, or the heaviest cells.
fn random_subset(w: &Weight, q: &DyadicCube, rng: &mut ChaCha8Rng) -> Result<CellSet> {
    let n = w.resolution();
    let cells = q.cells(n)?;
    let mut e = CellSet::empty(n);
    match rng.gen_range(0..3) {
        0 => {
            let p = rng.gen_range(0.01..1.0);
            for x in cells.clone() {
                if rng.gen_bool(p) {
                    e.insert(x);
                }
            }
        }
        1 => {
            let depth = rng.gen_range(0..=n - q.level());
            let sub = DyadicCube::new(q.level() + depth, (q.index() << depth) + rng.gen_range(0..1u64 << depth))?;
            for x in sub.cells(n)? {
                e.insert(x);
            }
        }
        _ => {
            let mut order: Vec<usize> = cells.clone().collect();
            order.sort_by(|&a, &b| w.values()[b].total_cmp(&w.values()[a]));
            let m = rng.gen_range(1..=order.len());
            for &x in &order[..m] {
                e.insert(x);
            }
        }
    }
    if e.is_empty() {
        e.insert(cells.start + rng.gen_range(0..cells.len()));
    }
    Ok(e)
}

/// `w(E)·shifted_log(|Q|/|E|)/(w(Q)·ρ_w(Q))` over random `(w, Q, E)`.
pub fn ainf_lemma_sweep(cfg: &TrialConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let records = run_trials(cfg.trials, |i| {
        let mut rng = trial_rng(cfg.seed, i as u64);
        let n = sweep_resolution(cfg, &mut rng);
        let wf = &cfg.weights[i % cfg.weights.len()];
        let w = wf.draw(n, &mut rng)?.scaled(cfg.weight_scale)?;
        let mut q = random_cube(n, &mut rng)?;
        for _ in 0..8 {
            if w.mass(&q)? > 0.0 {
                break;
            }
            q = random_cube(n, &mut rng)?;
        }
        if w.mass(&q)? == 0.0 {
            q = DyadicCube::ROOT;
        }
        let e = random_subset(&w, &q, &mut rng)?;
        let ratio = ainf_lemma_ratio(&w, &q, &e)?;
        let mut rec = TrialRecord::new(i, format!("{wf}/N={n}/Q={q}"), ratio, ratio);
        rec.s = wf.exponent();
        rec.pass = ratio <= cfg.bound;
        rec.extras.insert("e_fraction".into(), e.count() as f64 / q.cell_count(n)? as f64);
        Ok(rec)
    })?;
    let mut report = ExperimentReport::new("ainf_lemma", cfg.seed, cfg, records)?;
    report.pass_flags.insert("max_ratio_within_bound".into(), report.aggregates.max <= cfg.bound);
    Ok(report)
}

/// Cellwise `M_ε w / M_Φ w` (as `quotient`) and `M_ε w / M^D w` (as
/// `normalized_quotient`). Descriptive: no pass flags.
pub fn maximal_comparison(w: &Weight, eps: &EpsilonSpec, phi: &OrliczSpec) -> Result<ExperimentReport> {
    eps.validate()?;
    phi.validate()?;
    if w.is_identically_zero() {
        return Err(Error::InvalidWeight("weight vanishes identically".into()));
    }
    let me = m_entropy_all(w, eps, EntropyVariant::Log);
    let mphi = m_orlicz(w, phi, ORLICZ_TOL)?;
    let md = dyadic_maximal(w);
    let records: Vec<TrialRecord> = (0..w.len())
        .map(|x| {
            let e = me.values()[x];
            TrialRecord::new(x, format!("cell {x}"), e / mphi.values()[x], e / md.values()[x])
        })
        .collect();
    let by_phi: Vec<f64> = records.iter().map(|r| r.quotient).collect();
    let config = serde_json::json!({
        "resolution": w.resolution(),
        "eps": eps,
        "phi": phi,
    });
    let mut report = ExperimentReport::new("maximal_comparison", 0, &config, records)?;
    let a = super::report::Aggregates::of(&by_phi);
    report.summary.insert("eps_over_phi_min".into(), a.min);
    report.summary.insert("eps_over_phi_median".into(), a.median);
    report.summary.insert("eps_over_phi_max".into(), a.max);
    report.summary.insert("eps_over_dyadic_min".into(), report.aggregates.min);
    report.summary.insert("eps_over_dyadic_median".into(), report.aggregates.median);
    report.summary.insert("eps_over_dyadic_max".into(), report.aggregates.max);
    Ok(report)
}

/// Random `(S, α, f, w, λ)`; `quotient` is `lhs/rhs`.
pub fn fs_sweep(cfg: &TrialConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let records = run_trials(cfg.trials, |i| {
        let mut rng = trial_rng(cfg.seed, i as u64);
        let n = sweep_resolution(cfg, &mut rng);
        let wf = &cfg.weights[i % cfg.weights.len()];
        let w = wf.draw(n, &mut rng)?.scaled(cfg.weight_scale)?;
        let p = rng.gen_range(0.05..0.6);
        let mut cubes: Vec<DyadicCube> = all_cubes(n).into_iter().filter(|_| rng.gen_bool(p)).collect();
        if cubes.is_empty() {
            cubes.push(random_cube(n, &mut rng)?);
        }
        let alpha: Coefficients = cubes.iter().map(|q| (*q, rng.gen_range(0.0..3.0))).collect();
        let f = if rng.gen_bool(0.5) {
            heavy_tailed(n, &mut rng)?
        } else {
            let ff = cfg.functions[i % cfg.functions.len()];
            ff.draw(n, &mut rng, &dyadic_maximal(&w))?
        };
        let top = m_coeff(&f, &alpha, &cubes)?.values().iter().copied().fold(0.0, f64::max);
        let lambda = if top > 0.0 {
            // Half the draws sit exactly on an attained value.
            if rng.gen_bool(0.5) { top * rng.gen_range(0.01..1.2) } else { top }
        } else {
            1.0
        };
        let out = fs_check(&cubes, &alpha, &f, &w, lambda)?;
        let ratio = if out.lhs == 0.0 { 0.0 } else { out.lhs / out.rhs };
        let mut rec = TrialRecord::new(i, format!("{wf}/N={n}"), ratio, ratio);
        rec.pass = out.pass;
        rec.extras.insert("lhs".into(), out.lhs);
        rec.extras.insert("rhs".into(), out.rhs);
        rec.extras.insert("lambda".into(), lambda);
        Ok(rec)
    })?;
    let mut report = ExperimentReport::new("fefferman_stein", cfg.seed, cfg, records)?;
    let failures = report.records.iter().filter(|r| !r.pass).count();
    report.summary.insert("failures".into(), failures as f64);
    report.pass_flags.insert("constant_one".into(), failures == 0);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    /// Largest `|∪ strict descendants|/|Q|` over all parts.
    pub worst_ratio: f64,
    pub parts_sparse: bool,
    pub partition: bool,
}

/// Split a collection and check every part plus the partition property.
pub fn check_split(s: &SparseCollection) -> Result<SplitOutcome> {
    let parts = split_eight(s)?;
    let mut worst: f64 = 0.0;
    let mut parts_sparse = true;
    let mut total = 0;
    let mut seen = std::collections::BTreeSet::new();
    for p in &parts {
        let r = stronger_sparse_check(p);
        worst = worst.max(r.worst_ratio);
        parts_sparse &= r.pass;
        total += p.len();
        seen.extend(p.cubes().iter().copied());
    }
    let partition = total == s.len() && seen.len() == s.len() && s.cubes().iter().all(|q| seen.contains(q));
    Ok(SplitOutcome { worst_ratio: worst, parts_sparse, partition })
}

/// Eight-way split of stopping collections, cycling through `a_values`.
pub fn split_sweep(cfg: &TrialConfig, a_values: &[f64]) -> Result<ExperimentReport> {
    cfg.validate()?;
    if a_values.is_empty() {
        return Err(Error::InvalidArgument("no stopping ratios given".into()));
    }
    let records = run_trials(cfg.trials, |i| {
        let mut rng = trial_rng(cfg.seed, i as u64);
        let n = sweep_resolution(cfg, &mut rng);
        let a = a_values[i % a_values.len()];
        let f = heavy_tailed(n, &mut rng)?;
        let s = cz_stopping_collection(&f, &DyadicCube::ROOT, a)?;
        let carleson = carleson_check(&s, 2.0, CarlesonConvention::Proper);
        let out = check_split(&s)?;
        let mut rec = TrialRecord::new(i, format!("N={n}/a={a}"), out.worst_ratio, out.worst_ratio);
        rec.pass = out.parts_sparse && out.partition;
        rec.extras.insert("cubes".into(), s.len() as f64);
        rec.extras.insert("carleson_ratio".into(), carleson.worst_ratio);
        rec.extras.insert("partition".into(), out.partition as u8 as f64);
        Ok(rec)
    })?;
    let mut report = ExperimentReport::new("eight_way_split", cfg.seed, &(cfg, a_values), records)?;
    let all = report.records.iter().all(|r| r.pass);
    report.pass_flags.insert("all_parts_stronger_sparse".into(), all);
    Ok(report)
}

/// `|⟨Tf, g⟩|/Λ_S(f, g)` for random martingale transforms at resolution `N`.
pub fn domination_sweep(cfg: &TrialConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let n = cfg.resolution;
    let records = run_trials(cfg.trials, |i| {
        let mut rng = trial_rng(cfg.seed, i as u64);
        let spec = HaarSpec::random(n, &mut rng)?;
        let one = GridFunction::constant(n, 1.0)?;
        let draw = |rng: &mut ChaCha8Rng, which: usize| -> Result<GridFunction> {
            let g = match which % 3 {
                0 => heavy_tailed(n, rng)?,
                1 => FunctionFamily::HaarPacket.draw(n, rng, &one)?,
                _ => FunctionFamily::RandomNonnegative.draw(n, rng, &one)?,
            };
            let g = random_signs(g, rng)?;
            Ok(if g.is_identically_zero() { one.clone() } else { g })
        };
        let f = draw(&mut rng, i)?;
        let g = draw(&mut rng, i / 3)?;
        let dom = sparse_dominate_bilinear(&spec, &f, &g, cfg.a)?;
        let mut rec = TrialRecord::new(i, format!("N={n}/a={}", cfg.a), dom.ratio, dom.ratio);
        rec.pass = dom.ratio <= cfg.bound;
        rec.extras.insert("pairing".into(), dom.pairing);
        rec.extras.insert("form".into(), dom.form);
        rec.extras.insert("cubes".into(), dom.collections[0].len() as f64);
        Ok(rec)
    })?;
    let mut report = ExperimentReport::new("sparse_domination", cfg.seed, cfg, records)?;
    report.pass_flags.insert("max_ratio_within_bound".into(), report.aggregates.max <= cfg.bound);
    Ok(report)
}

/// One replay instance; `f` is rescaled so that `∫|f| M_ε w = 1`.
pub fn replay_instance(cfg: &TrialConfig, trial: usize) -> Result<(crate::sparse::ProofReplayReport, String)> {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let n = sweep_resolution(cfg, &mut rng);
    let wf = &cfg.weights[trial % cfg.weights.len()];
    let w = wf.draw(n, &mut rng)?.scaled(cfg.weight_scale)?;
    let f = match trial % 3 {
        0 => heavy_tailed(n, &mut rng)?,
        1 => FunctionFamily::RandomNonnegative.draw(n, &mut rng, &w)?,
        _ => FunctionFamily::CellIndicator.draw(n, &mut rng, &w)?,
    };
    let s = cz_stopping_collection(&f, &DyadicCube::ROOT, cfg.a)?;
    let p = rng.gen_range(0.1..1.0);
    let mut g = CellSet::empty(n);
    for x in 0..1usize << n {
        if rng.gen_bool(p) {
            g.insert(x);
        }
    }
    if crate::grid::integral(&w, &g)? == 0.0 {
        g = CellSet::full(n);
    }
    let majorant = m_entropy_all(&w, &cfg.eps, EntropyVariant::Log);
    let f = f.scale(pairing_abs(&f, &majorant)?.recip());
    let report = proof_replay(&s, &f, &w, &g, &cfg.eps)?;
    Ok((report, format!("{wf}/N={n}")))
}

/// Proof replay over random `(S, f, w, G)`; `quotient` is the largest class constant.
pub fn replay_sweep(cfg: &TrialConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let flags: Vec<(TrialRecord, crate::sparse::ReplayFlags)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let (rep, label) = replay_instance(cfg, i)?;
            let mut rec = TrialRecord::new(i, label, rep.max_constant, rep.max_constant);
            rec.pass = rep.pass();
            rec.extras.insert("w_h_over_w_g".into(), rep.w_h / rep.w_g);
            rec.extras.insert("w_g_over_w_g_prime".into(), rep.w_g / rep.w_g_prime);
            rec.extras.insert("f_maximal_integral".into(), rep.f_maximal_integral);
            rec.extras.insert("classes".into(), rep.classes.len() as f64);
            rec.extras.insert("cubes".into(), rep.cubes.len() as f64);
            Ok((rec, rep.flags))
        })
        .collect::<Result<_>>()?;
    let mut all = crate::sparse::ReplayFlags { h_small: true, g_prime_large: true, discards_inert: true, eq1: true, classes: true };
    for (_, f) in &flags {
        all.h_small &= f.h_small;
        all.g_prime_large &= f.g_prime_large;
        all.discards_inert &= f.discards_inert;
        all.eq1 &= f.eq1;
        all.classes &= f.classes;
    }
    let records = flags.into_iter().map(|(r, _)| r).collect();
    let mut report = ExperimentReport::new("proof_replay", cfg.seed, cfg, records)?;
    report.pass_flags.insert("h_small".into(), all.h_small);
    report.pass_flags.insert("g_prime_large".into(), all.g_prime_large);
    report.pass_flags.insert("discards_inert".into(), all.discards_inert);
    report.pass_flags.insert("eq1_bands".into(), all.eq1);
    report.pass_flags.insert("class_constants".into(), all.classes);
    Ok(report)
}
