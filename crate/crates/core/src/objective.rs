//! Objective functions and the built-in benchmark set.
//!
//! Every objective is non-negative and evaluated derivative-free. Builtins:
//!
//! | name             | dim   | minimizer              | min value        |
//! |------------------|-------|------------------------|------------------|
//! | `alpine`         | any   | origin                 | 0                |
//! | `ackley`         | any   | origin                 | 0                |
//! | `rastrigin`      | any   | origin                 | 0                |
//! | `xinsheyang2`    | any   | origin                 | 0                |
//! | `double_well_1d` | 1     | `-1.00125`             | `f(x_star)`      |
//! | `double_well_2d` | 2     | `(-1.00125, 0)`        | `f(x_star)`      |
//!
//! User-supplied objectives are plain callbacks registered by name in an
//! [`ObjectiveRegistry`].

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension used for benchmark functions when none is requested.
pub const DEFAULT_BENCHMARK_DIM: usize = 2;

/// Global minimizer of the double-well toy along its first coordinate.
pub const DOUBLE_WELL_GLOBAL_MIN: f64 = -1.00125;
/// Local (non-global) minimizer of the double-well toy.
pub const DOUBLE_WELL_LOCAL_MIN: f64 = 0.998748;

pub const BENCHMARK_NAMES: [&str; 4] = ["alpine", "ackley", "rastrigin", "xinsheyang2"];
pub const TOY_NAMES: [&str; 2] = ["double_well_1d", "double_well_2d"];

pub type ObjectiveFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Axis-aligned box `[lo_k, hi_k]` per coordinate, used for uniform initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct InitBox {
    bounds: Vec<(f64, f64)>,
}

impl InitBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("init box must have at least one coordinate"));
        }
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::invalid(format!("init box coordinate {k} is not finite")));
            }
            if lo >= hi {
                return Err(Error::invalid(format!(
                    "init box coordinate {k} is degenerate: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// The same interval `[lo, hi]` in every one of `dim` coordinates.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.bounds).all(|(&v, &(lo, hi))| lo <= v && v <= hi)
    }
}

impl TryFrom<Vec<[f64; 2]>> for InitBox {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[lo, hi]| (lo, hi)).collect())
    }
}

impl From<InitBox> for Vec<[f64; 2]> {
    fn from(b: InitBox) -> Self {
        b.bounds.into_iter().map(|(lo, hi)| [lo, hi]).collect()
    }
}

#[derive(Clone)]
enum Kind {
    Alpine,
    Ackley,
    Rastrigin,
    Xinsheyang2,
    DoubleWell1d,
    DoubleWell2d,
    Custom(ObjectiveFn),
}

/// A named objective with its dimension, initialization box and, when known,
/// its global minimizer and minimum value. Immutable once built.
#[derive(Clone)]
pub struct ObjectiveSpec {
    name: String,
    dim: usize,
    init_box: InitBox,
    x_star: Option<Vec<f64>>,
    f_star: Option<f64>,
    kind: Kind,
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("init_box", &self.init_box)
            .field("x_star", &self.x_star)
            .field("f_star", &self.f_star)
            .finish()
    }
}

impl ObjectiveSpec {
    /// Wraps a user callback. `x_star` and `f_star` are optional; when only
    /// `x_star` is given, `f_star` is taken as the callback's value there.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        init_box: InitBox,
        x_star: Option<Vec<f64>>,
        f_star: Option<f64>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let name = name.into();
        if dim == 0 {
            return Err(Error::invalid("objective dimension must be at least 1"));
        }
        if init_box.dim() != dim {
            return Err(Error::invalid(format!(
                "init box has {} coordinates, objective `{name}` has dimension {dim}",
                init_box.dim()
            )));
        }
        if let Some(x) = &x_star {
            if x.len() != dim {
                return Err(Error::invalid("x_star dimension does not match objective"));
            }
        }
        let kind = Kind::Custom(Arc::new(f));
        let f_star = match (&x_star, f_star) {
            (Some(x), None) => Some(eval_kind(&kind, x)),
            (_, fs) => fs,
        };
        Ok(Self { name, dim, init_box, x_star, f_star, kind })
    }

    fn builtin(name: &str, dim: usize) -> Result<Self> {
        let (kind, natural_dim, half_width) = match name {
            "alpine" => (Kind::Alpine, None, 10.0),
            "ackley" => (Kind::Ackley, None, 32.0),
            "rastrigin" => (Kind::Rastrigin, None, 5.12),
            "xinsheyang2" => (Kind::Xinsheyang2, None, 2.0 * PI),
            "double_well_1d" => (Kind::DoubleWell1d, Some(1), 2.0),
            "double_well_2d" => (Kind::DoubleWell2d, Some(2), 2.0),
            _ => return Err(Error::NotFound(name.to_string())),
        };
        if dim == 0 {
            return Err(Error::invalid("objective dimension must be at least 1"));
        }
        if let Some(nd) = natural_dim {
            if nd != dim {
                return Err(Error::invalid(format!(
                    "objective `{name}` is only defined in dimension {nd}, got {dim}"
                )));
            }
        }
        let x_star = match kind {
            Kind::DoubleWell1d => vec![DOUBLE_WELL_GLOBAL_MIN],
            Kind::DoubleWell2d => vec![DOUBLE_WELL_GLOBAL_MIN, 0.0],
            _ => vec![0.0; dim],
        };
        let f_star = match kind {
            Kind::DoubleWell1d | Kind::DoubleWell2d => eval_kind(&kind, &x_star),
            _ => 0.0,
        };
        Ok(Self {
            name: name.to_string(),
            dim,
            init_box: InitBox::cube(-half_width, half_width, dim)?,
            x_star: Some(x_star),
            f_star: Some(f_star),
            kind,
        })
    }

    /// Replaces the initialization box.
    pub fn with_init_box(mut self, init_box: InitBox) -> Result<Self> {
        if init_box.dim() != self.dim {
            return Err(Error::invalid(format!(
                "init box has {} coordinates, objective `{}` has dimension {}",
                init_box.dim(),
                self.name,
                self.dim
            )));
        }
        self.init_box = init_box;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn init_box(&self) -> &InitBox {
        &self.init_box
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    /// Evaluates the objective, checking the dimension of `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "point has dimension {}, objective `{}` expects {}",
                x.len(),
                self.name,
                self.dim
            )));
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation for inner loops. `x.len()` must equal `dim`.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        eval_kind(&self.kind, x)
    }
}

#[inline]
fn eval_kind(kind: &Kind, x: &[f64]) -> f64 {
    match kind {
        Kind::Alpine => x.iter().map(|&xi| (xi * xi.sin() + 0.1 * xi).abs()).sum(),
        Kind::Ackley => {
            let d = x.len() as f64;
            let sq: f64 = x.iter().map(|xi| xi * xi).sum();
            let cos_mean: f64 = x.iter().map(|xi| (2.0 * PI * xi).cos()).sum::<f64>() / d;
            // grouped so both brackets are exactly zero at the origin
            20.0 * (1.0 - (-0.2 * (sq / d).sqrt()).exp()) + (E - cos_mean.exp())
        }
        Kind::Rastrigin => {
            10.0 * x.len() as f64
                + x.iter().map(|&xi| xi * xi - 10.0 * (2.0 * PI * xi).cos()).sum::<f64>()
        }
        Kind::Xinsheyang2 => {
            let abs_sum: f64 = x.iter().map(|xi| xi.abs()).sum();
            let sin_sum: f64 = x.iter().map(|xi| (xi * xi).sin()).sum();
            abs_sum * (-sin_sum).exp()
        }
        Kind::DoubleWell1d => double_well(x[0]),
        Kind::DoubleWell2d => double_well(x[0]) + x[1] * x[1],
        Kind::Custom(f) => f(x),
    }
}

#[inline]
fn double_well(x: f64) -> f64 {
    let a = x * x - 1.0;
    a * a + 0.01 * x + 0.5
}

/// Builtin objectives: the four benchmarks in dimension `dim`, plus the two
/// fixed-dimension double-well toys.
pub fn builtin_objectives(dim: usize) -> Result<Vec<ObjectiveSpec>> {
    let mut out = Vec::with_capacity(6);
    for name in BENCHMARK_NAMES {
        out.push(ObjectiveSpec::builtin(name, dim)?);
    }
    out.push(ObjectiveSpec::builtin("double_well_1d", 1)?);
    out.push(ObjectiveSpec::builtin("double_well_2d", 2)?);
    Ok(out)
}

/// Natural dimension of a builtin toy, `None` for dimension-free benchmarks
/// and for unknown names.
pub fn fixed_dim(name: &str) -> Option<usize> {
    match name {
        "double_well_1d" => Some(1),
        "double_well_2d" => Some(2),
        _ => None,
    }
}

/// Looks up a builtin by name. `dim = None` selects the toy's fixed dimension
/// or [`DEFAULT_BENCHMARK_DIM`] for benchmarks.
pub fn lookup(name: &str, dim: Option<usize>) -> Result<ObjectiveSpec> {
    let dim = dim.or_else(|| fixed_dim(name)).unwrap_or(DEFAULT_BENCHMARK_DIM);
    ObjectiveSpec::builtin(name, dim)
}

/// Builtins plus user-registered callbacks. Registered names shadow builtins.
#[derive(Default, Clone)]
pub struct ObjectiveRegistry {
    custom: BTreeMap<String, ObjectiveSpec>,
}

impl ObjectiveRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, spec: ObjectiveSpec) {
        self.custom.insert(spec.name.clone(), spec);
    }

    pub fn lookup(&self, name: &str, dim: Option<usize>) -> Result<ObjectiveSpec> {
        match self.custom.get(name) {
            Some(spec) => match dim {
                Some(d) if d != spec.dim => Err(Error::invalid(format!(
                    "objective `{name}` is registered with dimension {}, got {d}",
                    spec.dim
                ))),
                _ => Ok(spec.clone()),
            },
            None => lookup(name, dim),
        }
    }

    pub fn names(&self) -> Vec<String> {
        BENCHMARK_NAMES
            .iter()
            .chain(TOY_NAMES.iter())
            .map(|s| s.to_string())
            .chain(self.custom.keys().cloned())
            .collect()
    }
}
