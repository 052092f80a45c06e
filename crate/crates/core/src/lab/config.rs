use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bumps::{EpsilonSpec, OrliczSpec};
use crate::error::{Error, Result};
use crate::grid::{CellSet, DyadicCube, GridFunction};
use crate::sparse::haar_function;
use crate::weights::{a1_generator_seeded, power_weight, Weight};

/// Resolution cap when `ENDPOINT_LAB_MAX_N` is unset.
pub const DEFAULT_MAX_N: u32 = 18;

/// The cap from `ENDPOINT_LAB_MAX_N`, else [`DEFAULT_MAX_N`].
pub fn max_resolution_from_env() -> Result<u32> {
    match std::env::var("ENDPOINT_LAB_MAX_N") {
        Err(_) => Ok(DEFAULT_MAX_N),
        Ok(v) => v
            .trim()
            .parse::<u32>()
            .ok()
            .filter(|&n| n <= crate::grid::MAX_RESOLUTION)
            .ok_or_else(|| Error::InvalidArgument(format!("ENDPOINT_LAB_MAX_N must be an integer ≤ 30, got `{v}`"))),
    }
}

/// Per-trial generator: stream `trial` of the master seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFamily {
    /// [`power_weight`] with exponent `s`.
    Power { s: f64 },
    /// `(M^D g)^s` for a random heavy-tailed `g`.
    A1Generator { s: f64 },
    /// Independent cells `10^U`, `U` uniform on `[-spread, spread]`, with
    /// occasional zero cells.
    Random { spread: f64 },
    /// A fixed weight.
    Raw { values: Vec<f64> },
}

impl WeightFamily {
    pub fn draw(&self, resolution: u32, rng: &mut ChaCha8Rng) -> Result<Weight> {
        match self {
            WeightFamily::Power { s } => power_weight(*s, resolution),
            WeightFamily::A1Generator { s } => a1_generator_seeded(resolution, *s, rng.gen()),
            WeightFamily::Random { spread } => {
                let zero_p = rng.gen_range(0.0..0.3);
                let values = (0..1usize << resolution)
                    .map(|_| {
                        if rng.gen_bool(zero_p) {
                            0.0
                        } else {
                            10f64.powf(rng.gen_range(-spread..=*spread))
                        }
                    })
                    .collect::<Vec<f64>>();
                let mut w = values;
                if w.iter().all(|&v| v == 0.0) {
                    w[0] = 1.0;
                }
                Weight::from_values(resolution, w)
            }
            WeightFamily::Raw { values } => Weight::from_values(resolution, values.clone()),
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            WeightFamily::Power { s } | WeightFamily::A1Generator { s } => Some(*s),
            _ => None,
        }
    }

    fn validate(&self, resolution: u32) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            WeightFamily::Power { s } | WeightFamily::A1Generator { s } if !(0.0..1.0).contains(s) => {
                bad(format!("weight exponent must lie in [0, 1), got {s}"))
            }
            WeightFamily::Random { spread } if !(spread.is_finite() && *spread >= 0.0) => {
                bad(format!("spread must be finite and ≥ 0, got {spread}"))
            }
            WeightFamily::Raw { values } if values.len() != 1usize << resolution => {
                bad(format!("raw weight has {} cells, resolution {resolution} needs {}", values.len(), 1usize << resolution))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Power { s } => write!(f, "power:{s}"),
            WeightFamily::A1Generator { s } => write!(f, "a1gen:{s}"),
            WeightFamily::Random { spread } => write!(f, "random:{spread}"),
            WeightFamily::Raw { .. } => write!(f, "raw"),
        }
    }
}

impl FromStr for WeightFamily {
    type Err = Error;

    /// `power:<s>`, `a1gen:<s>` or `random:<spread>`.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidSpec { spec: spec.into(), reason: reason.into() };
        let (name, value) = spec.split_once(':').ok_or_else(|| bad("expected `name:value`"))?;
        let v: f64 = value.trim().parse().map_err(|_| bad("value is not a number"))?;
        match name.trim() {
            "power" => Ok(WeightFamily::Power { s: v }),
            "a1gen" => Ok(WeightFamily::A1Generator { s: v }),
            "random" => Ok(WeightFamily::Random { spread: v }),
            _ => Err(bad("unknown weight family")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionFamily {
    /// Indicator of one random cell.
    CellIndicator,
    /// Uniform values on a random dyadic cube, zero elsewhere.
    RandomNonnegative,
    /// A few random Haar functions with random coefficients.
    HaarPacket,
    /// Indicator of the cell where the majorant is smallest.
    Concentrated,
}

impl FunctionFamily {
    pub const ALL: [FunctionFamily; 4] = [
        FunctionFamily::CellIndicator,
        FunctionFamily::RandomNonnegative,
        FunctionFamily::HaarPacket,
        FunctionFamily::Concentrated,
    ];

    pub fn draw(self, resolution: u32, rng: &mut ChaCha8Rng, majorant: &GridFunction) -> Result<GridFunction> {
        let cells = 1usize << resolution;
        match self {
            FunctionFamily::CellIndicator => {
                let c = rng.gen_range(0..cells);
                Ok(GridFunction::indicator(&CellSet::from_cells(resolution, [c])?))
            }
            FunctionFamily::RandomNonnegative => {
                let q = random_cube(resolution, rng)?;
                let range = q.cells(resolution)?;
                let mut v = vec![0.0; cells];
                for x in &mut v[range] {
                    *x = 1.0 - rng.gen::<f64>();
                }
                GridFunction::new(resolution, v)
            }
            FunctionFamily::HaarPacket => {
                if resolution == 0 {
                    return GridFunction::constant(0, 1.0);
                }
                let mut v = vec![0.0; cells];
                for _ in 0..rng.gen_range(1..=4) {
                    let level = rng.gen_range(0..resolution);
                    let q = DyadicCube::new(level, rng.gen_range(0..1u64 << level))?;
                    let c = rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let h = haar_function(&q, resolution)?;
                    for (x, hv) in v.iter_mut().zip(h.values()) {
                        *x += c * hv;
                    }
                }
                let f = GridFunction::new(resolution, v)?;
                if f.is_identically_zero() {
                    GridFunction::constant(resolution, 1.0)
                } else {
                    Ok(f)
                }
            }
            FunctionFamily::Concentrated => {
                let vals = majorant.values();
                let mut best = 0;
                for (i, &m) in vals.iter().enumerate() {
                    if m < vals[best] {
                        best = i;
                    }
                }
                Ok(GridFunction::indicator(&CellSet::from_cells(resolution, [best])?))
            }
        }
    }
}

/// Uniform level, then uniform cube at that level.
pub fn random_cube(resolution: u32, rng: &mut ChaCha8Rng) -> Result<DyadicCube> {
    let level = rng.gen_range(0..=resolution);
    DyadicCube::new(level, rng.gen_range(0..1u64 << level))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorFamily {
    /// Sparse operator over the stopping cubes of `f`.
    StoppingSparse,
    /// Martingale transform with random signs.
    HaarRandomSigns,
}

impl OperatorFamily {
    pub const ALL: [OperatorFamily; 2] = [OperatorFamily::StoppingSparse, OperatorFamily::HaarRandomSigns];
}

/// Everything a seeded experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub resolution: u32,
    pub trials: usize,
    pub seed: u64,
    pub eps: EpsilonSpec,
    pub phi: Option<OrliczSpec>,
    pub weights: Vec<WeightFamily>,
    pub functions: Vec<FunctionFamily>,
    pub operators: Vec<OperatorFamily>,
    /// Stopping ratio.
    pub a: f64,
    /// Pass threshold on the experiment's headline statistic.
    pub bound: f64,
    /// Multiplies every drawn weight.
    pub weight_scale: f64,
    pub max_resolution: u32,
}

impl TrialConfig {
    pub fn new(resolution: u32, trials: usize, seed: u64) -> Self {
        TrialConfig {
            resolution,
            trials,
            seed,
            eps: EpsilonSpec::LogPow { p: 2.0 },
            phi: None,
            weights: vec![
                WeightFamily::Power { s: 0.0 },
                WeightFamily::Power { s: 0.5 },
                WeightFamily::Power { s: 0.9 },
                WeightFamily::Power { s: 0.99 },
                WeightFamily::A1Generator { s: 0.5 },
            ],
            functions: FunctionFamily::ALL.to_vec(),
            operators: OperatorFamily::ALL.to_vec(),
            a: 4.0,
            bound: 64.0,
            weight_scale: 1.0,
            max_resolution: DEFAULT_MAX_N,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.trials == 0 {
            return bad("trial count must be at least 1".into());
        }
        if self.resolution > self.max_resolution {
            return bad(format!("resolution {} exceeds the cap {}", self.resolution, self.max_resolution));
        }
        if self.weights.is_empty() || self.functions.is_empty() || self.operators.is_empty() {
            return bad("weight, function and operator families must be non-empty".into());
        }
        if !(self.a > 2.0 && self.a.is_finite()) {
            return bad(format!("stopping ratio a must be > 2, got {}", self.a));
        }
        if !(self.bound > 0.0) {
            return bad(format!("bound must be positive, got {}", self.bound));
        }
        if !(self.weight_scale > 0.0 && self.weight_scale.is_finite()) {
            return bad(format!("weight scale must be positive, got {}", self.weight_scale));
        }
        self.eps.validate()?;
        if let Some(phi) = &self.phi {
            phi.validate()?;
        }
        for w in &self.weights {
            w.validate(self.resolution)?;
        }
        Ok(())
    }

    /// Families for trial `i`: weight cycles fastest, then function, then operator.
    pub fn families(&self, i: usize) -> (&WeightFamily, FunctionFamily, OperatorFamily) {
        let nw = self.weights.len();
        let nf = self.functions.len();
        let no = self.operators.len();
        (&self.weights[i % nw], self.functions[(i / nw) % nf], self.operators[(i / (nw * nf)) % no])
    }
}
