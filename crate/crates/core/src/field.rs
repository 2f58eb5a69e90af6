//! Space-time scalar data: initial conditions, boundary values, sources.

use std::fmt;
use std::sync::Arc;

/// A scalar function of position `(x, z)`, time `t` and the state `u`.
pub trait ScalarField: Send + Sync {
    fn eval(&self, x: f64, z: f64, t: f64, u: f64) -> f64;
}

impl<F> ScalarField for F
where
    F: Fn(f64, f64, f64, f64) -> f64 + Send + Sync,
{
    fn eval(&self, x: f64, z: f64, t: f64, u: f64) -> f64 {
        self(x, z, t, u)
    }
}

/// Shared, type-erased field with a printable label.
#[derive(Clone)]
pub struct Field {
    label: String,
    f: Arc<dyn ScalarField>,
}

impl Field {
    pub fn new(label: impl Into<String>, f: impl ScalarField + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_: f64, _: f64, _: f64, _: f64| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, x: f64, z: f64, t: f64, u: f64) -> f64 {
        self.f.eval(x, z, t, u)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.label)
    }
}
