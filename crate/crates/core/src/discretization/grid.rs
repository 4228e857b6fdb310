use crate::error::{BeamError, Result};

/// Uniform grid on `(a, b)` with `n_interior` unknown nodes. The endpoints
/// are not stored: displacement vanishes there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n_interior: usize,
}

impl Grid {
    pub const MIN_NODES: usize = 3;

    pub fn new(a: f64, b: f64, n_interior: usize) -> Result<Self> {
        if n_interior < Self::MIN_NODES {
            return Err(BeamError::InvalidGrid(format!(
                "need at least {} interior nodes, got {n_interior}",
                Self::MIN_NODES
            )));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(BeamError::InvalidGrid(format!("need finite a < b, got a={a} b={b}")));
        }
        Ok(Grid { a, b, n_interior })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn h(&self) -> f64 {
        self.length() / (self.n_interior + 1) as f64
    }

    /// Interior node `i` for `i = 1..=n_interior`.
    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h()
    }

    /// Interior nodes in order.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n_interior).map(move |i| self.node(i))
    }
}
