use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::{Point, Vector};

type VectorFn = Arc<dyn Fn(&Point) -> Vector + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// A divergence-free advection field on the unit square.
#[derive(Clone)]
pub enum AdvectionField {
    Constant(Vector),
    /// `β(x) = A x + b`.
    Linear { a: Matrix2<f64>, b: Vector },
    Callable {
        name: String,
        value: VectorFn,
        divergence: ScalarFn,
        /// Bound on `|β|` over the unit square.
        sup_norm: f64,
    },
}

impl fmt::Debug for AdvectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => write!(f, "Constant({}, {})", v.x, v.y),
            Self::Linear { a, b } => f.debug_struct("Linear").field("a", a).field("b", b).finish(),
            Self::Callable { name, sup_norm, .. } => f
                .debug_struct("Callable")
                .field("name", name)
                .field("sup_norm", sup_norm)
                .finish(),
        }
    }
}

impl AdvectionField {
    pub fn zero() -> Self {
        Self::Constant(Vector::zeros())
    }

    pub fn constant(x: f64, y: f64) -> Self {
        Self::Constant(Vector::new(x, y))
    }

    /// `β = (-2π sin(π(x+2y)), π sin(π(x+2y)))`.
    pub fn trigonometric() -> Self {
        Self::Callable {
            name: "trigonometric".into(),
            value: Arc::new(|p: &Point| {
                let s = (PI * (p.x + 2.0 * p.y)).sin();
                Vector::new(-2.0 * PI * s, PI * s)
            }),
            divergence: Arc::new(|p: &Point| {
                let c = (PI * (p.x + 2.0 * p.y)).cos();
                -2.0 * PI * PI * c + 2.0 * PI * PI * c
            }),
            sup_norm: 5f64.sqrt() * PI,
        }
    }

    pub fn eval(&self, p: &Point) -> Vector {
        match self {
            Self::Constant(v) => *v,
            Self::Linear { a, b } => a * p.coords + b,
            Self::Callable { value, .. } => value(p),
        }
    }

    pub fn divergence(&self, p: &Point) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Linear { a, .. } => a.trace(),
            Self::Callable { divergence, .. } => divergence(p),
        }
    }

    /// `‖β‖_∞` over the unit square.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Constant(v) => v.norm(),
            Self::Linear { .. } => [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
                .iter()
                .map(|&(x, y)| self.eval(&Point::new(x, y)).norm())
                .fold(0.0, f64::max),
            Self::Callable { sup_norm, .. } => *sup_norm,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Constant(v) if v.x == 0.0 && v.y == 0.0)
    }

    pub fn name(&self) -> String {
        match self {
            Self::Constant(v) => format!("constant({}, {})", v.x, v.y),
            Self::Linear { .. } => "linear".into(),
            Self::Callable { name, .. } => name.clone(),
        }
    }
}
