//! Bump functions, bump norms and bump maximal functions.
//!
//! Logarithms here are shifted: `shifted_log(t) = log₂(2 + t)`, so that
//! `2^{shifted_log t} = 2 + t` and `shifted_log ≥ 1` on `[0, ∞)`.
//!
//! The `ε` and `Φ` catalogs are closed enums so that specs serialize to
//! the flat `name:key=value,...` grammar used on the command line. New
//! members need an `eval`, a parser arm and, for `ε`, a closed form for
//! `ε(2^{2^k})` in [`EpsilonSpec::inverse_at_double_exp`].

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{same_resolution, DyadicCube, GridFunction, Pyramid};
use crate::weights::{maximal_abs, rho, rho_all, Rho, Weight};

/// `log₂(2 + t)`. Negative input yields NaN; see [`checked_shifted_log`].
#[inline]
pub fn shifted_log(t: f64) -> f64 {
    (2.0 + t).log2()
}

pub fn checked_shifted_log(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("shifted log needs t ≥ 0, got {t}")));
    }
    Ok(shifted_log(t))
}

/// Split `name:key=value,...` into the name and its parameters.
/// Bare values (no `=`) are positional and keyed `"0"`, `"1"`, ...
fn parse_named(spec: &str) -> Result<(String, Vec<(String, f64)>)> {
    let bad = |reason: &str| Error::InvalidSpec { spec: spec.to_string(), reason: reason.into() };
    let spec_trim = spec.trim();
    let (name, rest) = match spec_trim.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (spec_trim, ""),
    };
    if name.is_empty() {
        return Err(bad("missing name"));
    }
    let mut params = Vec::new();
    if !rest.is_empty() {
        for (pos, item) in rest.split(',').enumerate() {
            let (key, value) = match item.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v.trim()),
                None => (pos.to_string(), item.trim()),
            };
            let value: f64 = value.parse().map_err(|_| bad(&format!("`{value}` is not a number")))?;
            if !value.is_finite() {
                return Err(bad("parameters must be finite"));
            }
            params.push((key, value));
        }
    }
    Ok((name.to_string(), params))
}

/// Pull one parameter by key or by position 0; reject leftovers.
fn single_param(spec: &str, params: &[(String, f64)], key: &str, default: Option<f64>) -> Result<f64> {
    let bad = |reason: String| Error::InvalidSpec { spec: spec.to_string(), reason };
    match params {
        [] => default.ok_or_else(|| bad(format!("missing parameter `{key}`"))),
        [(k, v)] if k == key || k == "0" => Ok(*v),
        [(k, _)] => Err(bad(format!("unknown parameter `{k}`"))),
        _ => Err(bad("too many parameters".into())),
    }
}

/// The increasing bump `ε: [1, ∞] → [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonSpec {
    /// `ε ≡ c`, `c ≥ 1`.
    Constant { c: f64 },
    /// `ε(t) = shifted_log(t)^p`, `p ≥ 0`.
    LogPow { p: f64 },
    /// `ε(t) = L₂(t)·L₃(t)^{1+δ}` with `L₂ = shifted_log∘shifted_log`,
    /// `L₃ = shifted_log∘L₂`.
    LogLog { delta: f64 },
}

impl EpsilonSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidSpec { spec: self.to_string(), reason: reason.into() };
        match *self {
            EpsilonSpec::Constant { c } if !(c >= 1.0) => Err(bad("constant must be ≥ 1")),
            EpsilonSpec::LogPow { p } if !(p >= 0.0) => Err(bad("power must be ≥ 0")),
            EpsilonSpec::LogLog { delta } if !(delta >= 0.0) => Err(bad("delta must be ≥ 0")),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            EpsilonSpec::Constant { c } => c,
            EpsilonSpec::LogPow { p } => shifted_log(t).powf(p),
            EpsilonSpec::LogLog { delta } => {
                let l2 = shifted_log(shifted_log(t));
                l2 * shifted_log(l2).powf(1.0 + delta)
            }
        }
    }

    /// `ε(2^{2^k})⁻¹` without forming `2^{2^k}`.
    ///
    /// With `u = 2^k` and `c_k = log₂(1 + 2^{1−u}) ∈ (0, 1]`:
    /// `shifted_log(2^u) = u + c_k`, `log₂(u + c_k) = k + log₂(1 + c_k 2^{-k})`
    /// and `shifted_log(u + c_k) = k + log₂(1 + (2 + c_k) 2^{-k})`.
    pub fn inverse_at_double_exp(&self, k: u32) -> f64 {
        let kf = k as f64;
        let u = kf.exp2();
        let c = (1.0 - u).exp2().ln_1p() / LN_2;
        match *self {
            EpsilonSpec::Constant { c } => 1.0 / c,
            EpsilonSpec::LogPow { p } => {
                let log2_l1 = kf + (c * (-kf).exp2()).ln_1p() / LN_2;
                (-p * log2_l1).exp2()
            }
            EpsilonSpec::LogLog { delta } => {
                let l2 = kf + ((2.0 + c) * (-kf).exp2()).ln_1p() / LN_2;
                1.0 / (l2 * shifted_log(l2).powf(1.0 + delta))
            }
        }
    }

    /// `ε(2^k)⁻¹`, the single-exponential terms.
    pub fn inverse_at_single_exp(&self, k: i32) -> f64 {
        1.0 / self.eval((k as f64).exp2())
    }
}

impl fmt::Display for EpsilonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonSpec::Constant { c } => write!(f, "constant:c={c}"),
            EpsilonSpec::LogPow { p } => write!(f, "log_pow:p={p}"),
            EpsilonSpec::LogLog { delta } => write!(f, "loglog:delta={delta}"),
        }
    }
}

impl FromStr for EpsilonSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = parse_named(s)?;
        let spec = match name.as_str() {
            "constant" => EpsilonSpec::Constant { c: single_param(s, &params, "c", Some(1.0))? },
            "log_pow" => EpsilonSpec::LogPow { p: single_param(s, &params, "p", None)? },
            "loglog" => EpsilonSpec::LogLog { delta: single_param(s, &params, "delta", Some(1.0))? },
            other => {
                return Err(Error::InvalidSpec {
                    spec: s.to_string(),
                    reason: format!("unknown bump `{other}` (expected constant, log_pow, loglog)"),
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Which series defines `K_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KEpsilonVariant {
    /// `Σ_{k≥0} ε(2^{2^k})⁻¹`.
    #[default]
    DoubleExponential,
    /// `Σ_{k≥-1} ε(2^k)⁻¹`.
    SingleExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KEpsilonResult {
    pub value: f64,
    pub terms_used: usize,
    /// The series was cut at `max_terms` before a term dropped below `tol`;
    /// `value` is then only a partial sum.
    pub diverged: bool,
}

/// `K_ε = Σ_{k≥0} ε(2^{2^k})⁻¹`, summed until a term falls below `tol`.
pub fn k_epsilon(eps: &EpsilonSpec, tol: f64, max_terms: usize) -> KEpsilonResult {
    k_epsilon_variant(eps, KEpsilonVariant::DoubleExponential, tol, max_terms)
}

pub fn k_epsilon_variant(
    eps: &EpsilonSpec,
    variant: KEpsilonVariant,
    tol: f64,
    max_terms: usize,
) -> KEpsilonResult {
    let term = |i: usize| match variant {
        KEpsilonVariant::DoubleExponential => eps.inverse_at_double_exp(i as u32),
        KEpsilonVariant::SingleExponential => eps.inverse_at_single_exp(i as i32 - 1),
    };
    let mut value = 0.0;
    for i in 0..max_terms {
        let t = term(i);
        value += t;
        if t < tol {
            return KEpsilonResult { value, terms_used: i + 1, diverged: false };
        }
    }
    KEpsilonResult { value, terms_used: max_terms, diverged: true }
}

/// Young-type function `Φ` with `Φ(0) = 0`, increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrliczSpec {
    /// `t^r`.
    Power { r: f64 },
    /// `t·shifted_log(t)^{1+δ}`.
    LLogL { delta: f64 },
    /// `t·L₂(t)·L₃(t)^{1+δ}`, iterated shifted logs.
    Dlr { delta: f64 },
    /// `t·∏ᵢ Lᵢ(t)^{eᵢ}` where `Lᵢ` is the `i`-fold shifted log.
    IteratedLog { exponents: Vec<f64> },
}

impl OrliczSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidSpec { spec: self.to_string(), reason: reason.into() };
        match self {
            OrliczSpec::Power { r } if !(*r > 0.0) => Err(bad("power must be > 0")),
            OrliczSpec::LLogL { delta } | OrliczSpec::Dlr { delta } if !(*delta >= -1.0) => {
                Err(bad("delta must be ≥ -1"))
            }
            OrliczSpec::IteratedLog { exponents } if exponents.iter().any(|e| *e < 0.0) => {
                Err(bad("exponents must be ≥ 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match self {
            OrliczSpec::Power { r } => t.powf(*r),
            OrliczSpec::LLogL { delta } => t * shifted_log(t).powf(1.0 + delta),
            OrliczSpec::Dlr { delta } => {
                let l2 = shifted_log(shifted_log(t));
                t * l2 * shifted_log(l2).powf(1.0 + delta)
            }
            OrliczSpec::IteratedLog { exponents } => {
                let mut l = t;
                let mut out = t;
                for e in exponents {
                    l = shifted_log(l);
                    out *= l.powf(*e);
                }
                out
            }
        }
    }

    /// `Φ = t`, for which the Luxemburg norm is the plain average.
    fn is_identity(&self) -> bool {
        match self {
            OrliczSpec::Power { r } => *r == 1.0,
            OrliczSpec::IteratedLog { exponents } => exponents.iter().all(|&e| e == 0.0),
            _ => false,
        }
    }
}

impl fmt::Display for OrliczSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrliczSpec::Power { r } => write!(f, "power:r={r}"),
            OrliczSpec::LLogL { delta } => write!(f, "llogl:delta={delta}"),
            OrliczSpec::Dlr { delta } => write!(f, "dlr:delta={delta}"),
            OrliczSpec::IteratedLog { exponents } => {
                write!(f, "iterlog:")?;
                for (i, e) in exponents.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "e{}={e}", i + 1)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for OrliczSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = parse_named(s)?;
        let spec = match name.as_str() {
            "power" => OrliczSpec::Power { r: single_param(s, &params, "r", None)? },
            "llogl" => OrliczSpec::LLogL { delta: single_param(s, &params, "delta", Some(1.0))? },
            "dlr" => OrliczSpec::Dlr { delta: single_param(s, &params, "delta", Some(1.0))? },
            "iterlog" => {
                let mut exponents = Vec::with_capacity(params.len());
                for (pos, (key, value)) in params.iter().enumerate() {
                    let expected = format!("e{}", pos + 1);
                    if *key != expected && *key != pos.to_string() {
                        return Err(Error::InvalidSpec {
                            spec: s.to_string(),
                            reason: format!("expected `{expected}`, found `{key}`"),
                        });
                    }
                    exponents.push(*value);
                }
                OrliczSpec::IteratedLog { exponents }
            }
            other => {
                return Err(Error::InvalidSpec {
                    spec: s.to_string(),
                    reason: format!("unknown Young function `{other}` (expected power, llogl, dlr, iterlog)"),
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Which entropy norm: `⟨w⟩ρ ε(ρ)` or `⟨w⟩ shifted_log(ρ) ε(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyVariant {
    Full,
    #[default]
    Log,
}

impl FromStr for EntropyVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(EntropyVariant::Full),
            "log" => Ok(EntropyVariant::Log),
            _ => Err(Error::InvalidSpec { spec: s.into(), reason: "expected `full` or `log`".into() }),
        }
    }
}

/// Entropy bump multiplier applied to `⟨w⟩_Q`.
pub fn entropy_factor(rho: f64, eps: &EpsilonSpec, variant: EntropyVariant) -> f64 {
    match variant {
        EntropyVariant::Full => rho * eps.eval(rho),
        EntropyVariant::Log => shifted_log(rho) * eps.eval(rho),
    }
}

/// `‖w‖_{Q,ρε(ρ)}` or `‖w‖_{Q,(log ρ)ε(ρ)}`; zero on vacuous cubes.
pub fn entropy_norm(
    w: &Weight,
    cube: &DyadicCube,
    eps: &EpsilonSpec,
    variant: EntropyVariant,
) -> Result<f64> {
    match rho(w, cube)? {
        Rho::Vacuous => Ok(0.0),
        Rho::Value(r) => {
            let avg = crate::grid::average(w, cube)?;
            Ok(avg * entropy_factor(r, eps, variant))
        }
    }
}

/// Default Luxemburg tolerance on `|Φ-mean − 1|`.
pub const ORLICZ_TOL: f64 = 1e-10;
const BRACKET_CAP: i32 = 60;
const MAX_BISECTIONS: usize = 400;

/// Luxemburg norm `inf{λ > 0 : |Q|⁻¹ ∫_Q Φ(w/λ) ≤ 1}` by bisection.
///
/// The returned `λ` has `|Φ-mean(λ) − 1| ≤ tol`.
pub fn orlicz_norm(w: &Weight, cube: &DyadicCube, phi: &OrliczSpec, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let cells = cube.cells(w.resolution())?;
    orlicz_norm_of(&w.values()[cells], phi, tol)
}

fn orlicz_norm_of(values: &[f64], phi: &OrliczSpec, tol: f64) -> Result<f64> {
    let n = values.len() as f64;
    let avg = crate::grid::pairwise_sum(values) / n;
    if avg == 0.0 {
        return Ok(0.0);
    }
    if phi.is_identity() {
        return Ok(avg);
    }
    let mean = |lambda: f64| -> f64 {
        let phis: Vec<f64> = values.iter().map(|&v| phi.eval(v / lambda)).collect();
        crate::grid::pairwise_sum(&phis) / n
    };

    let m0 = mean(avg);
    if (m0 - 1.0).abs() <= tol {
        return Ok(avg);
    }
    // Find lo with mean ≥ 1 and hi with mean ≤ 1.
    let (mut lo, mut hi) = (avg, avg);
    let (mut m_lo, mut m_hi) = (m0, m0);
    let mut steps = 0;
    while m_lo < 1.0 {
        steps += 1;
        if steps > BRACKET_CAP {
            return Err(Error::Orlicz("bracket failure below the average".into()));
        }
        lo *= 0.5;
        let m = mean(lo);
        if m < m_lo {
            return Err(Error::Orlicz(format!("{phi} is not increasing: mean grew with λ")));
        }
        m_lo = m;
    }
    steps = 0;
    while m_hi > 1.0 {
        steps += 1;
        if steps > BRACKET_CAP {
            return Err(Error::Orlicz("bracket failure above the average".into()));
        }
        hi *= 2.0;
        let m = mean(hi);
        if m > m_hi {
            return Err(Error::Orlicz(format!("{phi} is not increasing: mean grew with λ")));
        }
        m_hi = m;
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let m = mean(mid);
        if m > m_lo * (1.0 + 1e-12) || m < m_hi * (1.0 - 1e-12) || m.is_nan() {
            return Err(Error::Orlicz(format!("{phi} is not increasing: mean not monotone in λ")));
        }
        if (m - 1.0).abs() <= tol && hi - lo <= tol * mid {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            if (m - 1.0).abs() <= tol {
                return Ok(mid);
            }
            break;
        }
        if m > 1.0 {
            lo = mid;
            m_lo = m;
        } else {
            hi = mid;
            m_hi = m;
        }
    }
    Err(Error::Orlicz(format!("bisection did not reach tolerance {tol}")))
}

/// `M_ε w` over the cubes of the given collections (all cubes: [`m_entropy_all`]).
pub fn m_entropy<C: AsRef<[DyadicCube]>>(
    w: &Weight,
    collections: &[C],
    eps: &EpsilonSpec,
    variant: EntropyVariant,
) -> Result<GridFunction> {
    if collections.is_empty() {
        return Err(Error::InvalidArgument("no cube collections supplied".into()));
    }
    let n = w.resolution();
    let table = rho_all(w);
    let pyr = Pyramid::of_abs(w);
    let mut out = vec![0.0f64; 1usize << n];
    for cube in collections.iter().flat_map(|c| c.as_ref()) {
        let cells = cube.cells(n)?;
        let norm = match table.get(cube) {
            Rho::Vacuous => 0.0,
            Rho::Value(r) => pyr.average(cube) * entropy_factor(r, eps, variant),
        };
        for x in &mut out[cells] {
            *x = x.max(norm);
        }
    }
    GridFunction::new(n, out)
}

/// `M_ε w` over every dyadic cube, by a top-down sweep.
pub fn m_entropy_all(w: &Weight, eps: &EpsilonSpec, variant: EntropyVariant) -> GridFunction {
    let n = w.resolution();
    let table = rho_all(w);
    let pyr = Pyramid::of_abs(w);
    let norm = |level: u32, j: usize| {
        let q = DyadicCube::new(level, j as u64).expect("in range");
        match table.get(&q) {
            Rho::Vacuous => 0.0,
            Rho::Value(_) => pyr.average_at(level, j) * entropy_factor(table.value_at(level, j), eps, variant),
        }
    };
    let mut best = vec![norm(0, 0)];
    for level in 1..=n {
        best = (0..1usize << level).map(|j| best[j >> 1].max(norm(level, j))).collect();
    }
    GridFunction::new(n, best).expect("entropy norms are finite")
}

/// `M_Φ w`: per cell, the largest Luxemburg norm over dyadic cubes containing it.
pub fn m_orlicz(w: &Weight, phi: &OrliczSpec, tol: f64) -> Result<GridFunction> {
    let n = w.resolution();
    let mut best: Vec<f64> = vec![orlicz_norm(w, &DyadicCube::ROOT, phi, tol)?];
    for level in 1..=n {
        let block = 1usize << (n - level);
        let norms = w
            .values()
            .chunks(block)
            .map(|c| orlicz_norm_of(c, phi, tol))
            .collect::<Result<Vec<f64>>>()?;
        best = (0..1usize << level).map(|j| best[j >> 1].max(norms[j])).collect();
    }
    GridFunction::new(n, best)
}

/// Coefficients `α_Q ≥ 0` for [`m_coeff`].
pub type Coefficients = HashMap<DyadicCube, f64>;

/// `M^S_α f = sup_{Q∈S} 1_Q α_Q ⟨f⟩_Q`, zero off `∪S`.
pub fn m_coeff(f: &GridFunction, alpha: &Coefficients, cubes: &[DyadicCube]) -> Result<GridFunction> {
    let n = f.resolution();
    let pyr = Pyramid::of_abs(f);
    let mut out = vec![0.0f64; 1usize << n];
    for cube in cubes {
        let cells = cube.cells(n)?;
        let a = *alpha.get(cube).ok_or(Error::MissingCoefficient(*cube))?;
        if !(a >= 0.0) {
            return Err(Error::InvalidArgument(format!("coefficient for {cube} is negative")));
        }
        let v = a * pyr.average(cube);
        for x in &mut out[cells] {
            *x = x.max(v);
        }
    }
    GridFunction::new(n, out)
}

/// `M^D |f|`, re-exported here beside the other maximal operators.
pub fn dyadic_maximal_abs(f: &GridFunction) -> GridFunction {
    maximal_abs(f)
}

/// `∫ |f|·g` for a non-negative majorant `g`.
pub fn pairing_abs(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    same_resolution(f.resolution(), g.resolution())?;
    crate::grid::inner_product(&f.abs(), g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::all_cubes;
    use crate::weights::dyadic_maximal;

    fn w(n: u32, v: &[f64]) -> Weight {
        Weight::from_values(n, v.to_vec()).unwrap()
    }

    #[test]
    fn shifted_log_examples() {
        assert_eq!(shifted_log(0.0), 1.0);
        assert_eq!(shifted_log(2.0), 2.0);
        assert_eq!(shifted_log(6.0), 3.0);
        assert!(checked_shifted_log(-1.0).is_err());
    }

    #[test]
    fn spec_grammar() {
        assert_eq!("log_pow:2.0".parse::<EpsilonSpec>().unwrap(), EpsilonSpec::LogPow { p: 2.0 });
        assert_eq!("log_pow:p=1".parse::<EpsilonSpec>().unwrap(), EpsilonSpec::LogPow { p: 1.0 });
        assert_eq!("constant".parse::<EpsilonSpec>().unwrap(), EpsilonSpec::Constant { c: 1.0 });
        assert_eq!(
            "loglog:delta=0.5".parse::<EpsilonSpec>().unwrap(),
            EpsilonSpec::LogLog { delta: 0.5 }
        );
        assert!("constant:0.5".parse::<EpsilonSpec>().is_err());
        assert!("log_pow:q=2".parse::<EpsilonSpec>().is_err());
        assert!("nope:1".parse::<EpsilonSpec>().is_err());

        assert_eq!("dlr:delta=1.0".parse::<OrliczSpec>().unwrap(), OrliczSpec::Dlr { delta: 1.0 });
        assert_eq!("power:2".parse::<OrliczSpec>().unwrap(), OrliczSpec::Power { r: 2.0 });
        assert_eq!(
            "iterlog:e1=0,e2=1,e3=2".parse::<OrliczSpec>().unwrap(),
            OrliczSpec::IteratedLog { exponents: vec![0.0, 1.0, 2.0] }
        );
        for s in ["power:r=3", "llogl:delta=0.25", "iterlog:e1=1,e2=2"] {
            let spec: OrliczSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<OrliczSpec>().unwrap(), spec);
        }
        let e: EpsilonSpec = "loglog:delta=2".parse().unwrap();
        assert_eq!(e.to_string().parse::<EpsilonSpec>().unwrap(), e);
    }

    #[test]
    fn double_exp_closed_form_matches_direct_evaluation() {
        let specs = [
            EpsilonSpec::Constant { c: 3.0 },
            EpsilonSpec::LogPow { p: 2.0 },
            EpsilonSpec::LogPow { p: 0.5 },
            EpsilonSpec::LogLog { delta: 1.0 },
        ];
        for spec in specs {
            for k in 0..=9u32 {
                let t = ((1u64 << k) as f64).exp2();
                let direct = 1.0 / spec.eval(t);
                let closed = spec.inverse_at_double_exp(k);
                assert!((direct - closed).abs() <= 1e-13 * direct, "{spec} k={k}");
            }
        }
    }

    #[test]
    fn k_epsilon_examples() {
        let r = k_epsilon(&EpsilonSpec::Constant { c: 1.0 }, 1e-12, 1000);
        assert!(r.diverged);
        assert_eq!(r.terms_used, 1000);

        let sq = k_epsilon(&EpsilonSpec::LogPow { p: 2.0 }, 1e-300, 10_000);
        let lin = k_epsilon(&EpsilonSpec::LogPow { p: 1.0 }, 1e-300, 10_000);
        assert!(!sq.diverged && !lin.diverged);
        assert!(lin.value > sq.value);

        let ll = k_epsilon(&EpsilonSpec::LogLog { delta: 1.0 }, 1e-6, 1_000_000);
        assert!(!ll.diverged);
    }

    #[test]
    fn k_epsilon_terms_nonincreasing() {
        let specs = [
            EpsilonSpec::Constant { c: 2.0 },
            EpsilonSpec::LogPow { p: 2.0 },
            EpsilonSpec::LogPow { p: 1.0 },
            EpsilonSpec::LogLog { delta: 1.0 },
            EpsilonSpec::LogLog { delta: 0.0 },
        ];
        for spec in specs {
            let mut prev = f64::INFINITY;
            for k in 0..3000 {
                let t = spec.inverse_at_double_exp(k);
                assert!(t <= prev, "{spec} increases at k={k}");
                prev = t;
            }
        }
    }

    #[test]
    fn entropy_norm_examples() {
        let one = Weight::constant(3, 1.0).unwrap();
        let c1 = EpsilonSpec::Constant { c: 1.0 };
        for q in all_cubes(3) {
            assert_eq!(entropy_norm(&one, &q, &c1, EntropyVariant::Full).unwrap(), 1.0);
            assert_eq!(entropy_norm(&one, &q, &c1, EntropyVariant::Log).unwrap(), 3f64.log2());
        }
        let p = w(2, &[4.0, 0.0, 0.0, 0.0]);
        assert_eq!(entropy_norm(&p, &DyadicCube::ROOT, &c1, EntropyVariant::Full).unwrap(), 2.0);
        let right = DyadicCube::new(1, 1).unwrap();
        assert_eq!(entropy_norm(&p, &right, &c1, EntropyVariant::Log).unwrap(), 0.0);
    }

    #[test]
    fn orlicz_examples() {
        let v = w(3, &[1.0, 5.0, 0.0, 2.0, 7.0, 0.5, 3.0, 1.0]);
        for q in all_cubes(3) {
            let expect = crate::grid::average(&v, &q).unwrap();
            let got = orlicz_norm(&v, &q, &OrliczSpec::Power { r: 1.0 }, ORLICZ_TOL).unwrap();
            assert!((got - expect).abs() <= 1e-12 * expect);
        }
        let two = w(1, &[2.0, 0.0]);
        let got = orlicz_norm(&two, &DyadicCube::ROOT, &OrliczSpec::Power { r: 2.0 }, ORLICZ_TOL).unwrap();
        assert!((got - 2f64.sqrt()).abs() <= 1e-10);
        let c = Weight::constant(2, 3.5).unwrap();
        for phi in [OrliczSpec::Power { r: 3.0 }, OrliczSpec::Power { r: 1.5 }] {
            let got = orlicz_norm(&c, &DyadicCube::ROOT, &phi, ORLICZ_TOL).unwrap();
            assert!((got - 3.5).abs() < 1e-9, "{phi}: {got}");
        }
        let zero = Weight::constant(2, 0.0).unwrap();
        assert_eq!(orlicz_norm(&zero, &DyadicCube::ROOT, &OrliczSpec::Power { r: 2.0 }, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn m_entropy_examples() {
        let one = Weight::constant(3, 1.0).unwrap();
        let c1 = EpsilonSpec::Constant { c: 1.0 };
        let m = m_entropy_all(&one, &c1, EntropyVariant::Log);
        assert!(m.values().iter().all(|&v| v == 3f64.log2()));

        let v = w(3, &[1.0, 5.0, 0.0, 2.0, 7.0, 0.5, 3.0, 1.0]);
        let eps = EpsilonSpec::LogPow { p: 2.0 };
        let root_only = m_entropy(&v, &[vec![DyadicCube::ROOT]], &eps, EntropyVariant::Log).unwrap();
        let root_norm = entropy_norm(&v, &DyadicCube::ROOT, &eps, EntropyVariant::Log).unwrap();
        assert!(root_only.values().iter().all(|&x| x == root_norm));

        let listed = m_entropy(&v, &[all_cubes(3)], &eps, EntropyVariant::Log).unwrap();
        assert_eq!(listed, m_entropy_all(&v, &eps, EntropyVariant::Log));

        let md = dyadic_maximal(&v);
        for (a, b) in listed.values().iter().zip(md.values()) {
            assert!(*a >= 3f64.log2() * b);
        }
        let empty: Vec<Vec<DyadicCube>> = vec![];
        assert!(m_entropy(&v, &empty, &eps, EntropyVariant::Log).is_err());
    }

    #[test]
    fn m_orlicz_examples() {
        let v = w(3, &[1.0, 5.0, 0.0, 2.0, 7.0, 0.5, 3.0, 1.0]);
        let lin = m_orlicz(&v, &OrliczSpec::Power { r: 1.0 }, ORLICZ_TOL).unwrap();
        assert_eq!(lin, dyadic_maximal(&v));
        let sq = m_orlicz(&v, &OrliczSpec::Power { r: 2.0 }, ORLICZ_TOL).unwrap();
        for (a, b) in sq.values().iter().zip(dyadic_maximal(&v).values()) {
            assert!(*a >= b * (1.0 - 1e-10));
        }
        let one = Weight::constant(3, 1.0).unwrap();
        let m = m_orlicz(&one, &OrliczSpec::Power { r: 4.0 }, ORLICZ_TOL).unwrap();
        assert!(m.values().iter().all(|&x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn m_coeff_examples() {
        let f = GridFunction::new(3, vec![1.0, -5.0, 0.0, 2.0, 7.0, 0.5, -3.0, 1.0]).unwrap();
        let all = all_cubes(3);
        let ones: Coefficients = all.iter().map(|q| (*q, 1.0)).collect();
        assert_eq!(m_coeff(&f, &ones, &all).unwrap(), maximal_abs(&f));

        let one = GridFunction::constant(2, 1.0).unwrap();
        let alpha: Coefficients = [(DyadicCube::ROOT, 3.0)].into_iter().collect();
        let m = m_coeff(&one, &alpha, &[DyadicCube::ROOT]).unwrap();
        assert!(m.values().iter().all(|&x| x == 3.0));

        let half = DyadicCube::new(1, 0).unwrap();
        let f = GridFunction::new(1, vec![1.0, 0.0]).unwrap();
        let alpha: Coefficients = [(DyadicCube::ROOT, 2.0), (half, 1.0)].into_iter().collect();
        let m = m_coeff(&f, &alpha, &[DyadicCube::ROOT, half]).unwrap();
        assert_eq!(m.values(), &[1.0, 1.0]);

        let missing: Coefficients = HashMap::new();
        assert!(matches!(m_coeff(&f, &missing, &[half]), Err(Error::MissingCoefficient(_))));
    }
}
