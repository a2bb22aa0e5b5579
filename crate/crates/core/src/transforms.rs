//! Per-objective value transforms and their aggregation into a scalar utility.
//!
//! Every transform maps zero to zero and is monotone nondecreasing. The
//! loss-averse kinds (SFELLA, ELA, LELA) are concave, so a loss moves the
//! utility further than a gain of the same size. SEBA treats the two
//! objectives differently: linear on performance, a negated square on the
//! (non-positive) alignment measure.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Upper bound on any exponent argument. `exp(700)` is still finite in f64.
pub const EXP_ARG_MAX: f64 = 700.0;

/// Lower bound on the scaled SEBA alignment input, keeps the square finite.
const SEBA_SCALED_MIN: f64 = -1e150;

/// Number of objectives every environment exposes (performance, alignment).
pub const OBJECTIVES: usize = 2;

/// A user-supplied transform that can be registered next to the builtin kinds.
pub trait ValueTransform: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Must satisfy `eval(c, 0.0) == 0.0` and be nondecreasing in `x`.
    fn eval(&self, c: f64, x: f64) -> f64;
}

#[derive(Clone, Debug)]
pub enum TransformKind {
    Linear,
    Sfella,
    Ela,
    Lela,
    SebaPerformance,
    SebaAlignment,
    Custom(Arc<dyn ValueTransform>),
}

impl TransformKind {
    pub const BUILTIN: [TransformKind; 6] = [
        TransformKind::Linear,
        TransformKind::Sfella,
        TransformKind::Ela,
        TransformKind::Lela,
        TransformKind::SebaPerformance,
        TransformKind::SebaAlignment,
    ];

    pub fn name(&self) -> &str {
        match self {
            TransformKind::Linear => "linear",
            TransformKind::Sfella => "sfella",
            TransformKind::Ela => "ela",
            TransformKind::Lela => "lela",
            TransformKind::SebaPerformance => "seba-performance",
            TransformKind::SebaAlignment => "seba-alignment",
            TransformKind::Custom(t) => t.name(),
        }
    }

    /// Evaluates the transform without validating its arguments.
    #[inline]
    pub fn eval(&self, c: f64, x: f64) -> f64 {
        match self {
            TransformKind::Linear | TransformKind::SebaPerformance => c * x,
            TransformKind::Sfella => {
                if x > 0.0 {
                    (c * x).ln_1p()
                } else {
                    loss_exp(c, x)
                }
            }
            TransformKind::Ela => loss_exp(c, x),
            TransformKind::Lela => loss_exp(c, x) + c * x,
            TransformKind::SebaAlignment => {
                if x > 0.0 {
                    0.0
                } else {
                    let y = (c * x).max(SEBA_SCALED_MIN);
                    -(y * y)
                }
            }
            TransformKind::Custom(t) => t.eval(c, x),
        }
    }
}

/// `1 - exp(-c x)` with the exponent clamped to [`EXP_ARG_MAX`].
#[inline]
fn loss_exp(c: f64, x: f64) -> f64 {
    1.0 - (-c * x).min(EXP_ARG_MAX).exp()
}

impl PartialEq for TransformKind {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransformRegistry::builtin().lookup(s)
    }
}

impl Serialize for TransformKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for TransformKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Name-indexed set of transform kinds; starts with the builtins and accepts
/// additional [`ValueTransform`] implementations.
#[derive(Clone, Debug)]
pub struct TransformRegistry {
    kinds: BTreeMap<String, TransformKind>,
}

impl TransformRegistry {
    pub fn builtin() -> Self {
        let kinds = TransformKind::BUILTIN
            .iter()
            .map(|k| (k.name().to_string(), k.clone()))
            .collect();
        TransformRegistry { kinds }
    }

    pub fn register(&mut self, transform: Arc<dyn ValueTransform>) -> Result<()> {
        let name = transform.name().to_string();
        if self.kinds.contains_key(&name) {
            return Err(Error::config(format!("transform '{name}' is already registered")));
        }
        self.kinds.insert(name, TransformKind::Custom(transform));
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<TransformKind> {
        self.kinds.get(name).cloned().ok_or_else(|| {
            Error::config(format!(
                "unknown transform '{name}' (valid: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.kinds.keys().map(String::as_str).collect()
    }
}

/// Evaluates `kind` at `x` with scale `c`, rejecting invalid arguments.
pub fn apply_transform(kind: &TransformKind, c: f64, x: f64) -> Result<f64> {
    validate_scale(c)?;
    if !x.is_finite() {
        return Err(Error::config(format!("transform input must be finite, got {x}")));
    }
    Ok(kind.eval(c, x))
}

fn validate_scale(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("transform scale must be positive and finite, got {c}")))
    }
}

/// Quantizes `x` to the nearest multiple of `g`, ties away from zero.
/// `g == 0` disables quantization.
#[inline]
pub fn granularize(x: f64, g: f64) -> f64 {
    if g == 0.0 {
        x
    } else {
        (x / g).round() * g
    }
}

/// One objective's transform: kind, scale factor and granularity step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub scale: f64,
    #[serde(default)]
    pub granularity: f64,
}

impl TransformSpec {
    pub fn new(kind: TransformKind, scale: f64, granularity: f64) -> Result<Self> {
        let spec = TransformSpec {
            kind,
            scale,
            granularity,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit(kind: TransformKind) -> Self {
        TransformSpec {
            kind,
            scale: 1.0,
            granularity: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_scale(self.scale)?;
        if !(self.granularity.is_finite() && self.granularity >= 0.0) {
            return Err(Error::config(format!(
                "granularity must be nonnegative and finite, got {}",
                self.granularity
            )));
        }
        Ok(())
    }

    /// Granularity first, then the transform.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.kind.eval(self.scale, granularize(x, self.granularity))
    }
}

/// Ordered per-objective transforms; index 0 is performance, 1 is alignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityPolicy {
    specs: Vec<TransformSpec>,
}

impl UtilityPolicy {
    pub fn new(specs: Vec<TransformSpec>) -> Result<Self> {
        if specs.len() != OBJECTIVES {
            return Err(Error::config(format!(
                "utility policy needs {OBJECTIVES} transforms, got {}",
                specs.len()
            )));
        }
        for spec in &specs {
            spec.validate()?;
        }
        Ok(UtilityPolicy { specs })
    }

    /// The same kind on every objective, scale `c`, no granularity.
    pub fn uniform(kind: TransformKind, c: f64) -> Result<Self> {
        Self::new(vec![
            TransformSpec::new(kind.clone(), c, 0.0)?,
            TransformSpec::new(kind, c, 0.0)?,
        ])
    }

    pub fn linear() -> Self {
        UtilityPolicy {
            specs: vec![
                TransformSpec::unit(TransformKind::Linear),
                TransformSpec::unit(TransformKind::Linear),
            ],
        }
    }

    pub fn specs(&self) -> &[TransformSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn set_granularity(&mut self, objective: usize, g: f64) -> Result<()> {
        let spec = self
            .specs
            .get_mut(objective)
            .ok_or_else(|| Error::config(format!("no objective {objective}")))?;
        spec.granularity = g;
        spec.validate()
    }

    /// Hot-path utility of a two-objective value vector.
    #[inline]
    pub fn utility(&self, values: &[f64; OBJECTIVES]) -> f64 {
        self.specs[0].eval(values[0]) + self.specs[1].eval(values[1])
    }
}

/// Sum of per-objective transformed values, granularity applied first.
pub fn aggregate(values: &[f64], policy: &UtilityPolicy) -> Result<f64> {
    if values.len() != policy.len() {
        return Err(Error::config(format!(
            "{} values for a {}-objective policy",
            values.len(),
            policy.len()
        )));
    }
    let mut total = 0.0;
    for (x, spec) in values.iter().zip(policy.specs()) {
        if !x.is_finite() {
            return Err(Error::config(format!("aggregate input must be finite, got {x}")));
        }
        total += spec.eval(*x);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub x: f64,
    pub f: f64,
    pub df_per_unit: f64,
}

/// Samples `kind` on the grid `lo, lo + step, ..., <= hi`. The slope column
/// is a central difference over one grid spacing centred on each point.
pub fn curve_samples(
    kind: &TransformKind,
    c: f64,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Vec<CurveSample>> {
    validate_scale(c)?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::config(format!("curve range needs lo < hi, got {lo}:{hi}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::config(format!("curve step must be positive, got {step}")));
    }
    // Absorb representation error in (hi - lo) / step, e.g. 6 / 0.01.
    let rows = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let half = step / 2.0;
    Ok((0..rows)
        .map(|i| {
            let x = lo + i as f64 * step;
            CurveSample {
                x,
                f: kind.eval(c, x),
                df_per_unit: (kind.eval(c, x + half) - kind.eval(c, x - half)) / step,
            }
        })
        .collect())
}

pub fn write_curve_csv<W: Write>(mut out: W, samples: &[CurveSample]) -> std::io::Result<()> {
    writeln!(out, "x,f,df_per_unit")?;
    for s in samples {
        writeln!(out, "{:.6},{:.6},{:.6}", s.x, s.f, s.df_per_unit)?;
    }
    Ok(())
}
