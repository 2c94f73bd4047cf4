//! Single Chua oscillator: parameters, piecewise-linear nonlinearity and
//! vector field.

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::Matrix;

/// Oscillator constants.
///
/// `a` is the slope of the nonlinearity on `|x| <= 1` and `b` the slope
/// outside; `a < b < 0`, so `|a|` is the global Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    a: f64,
    b: f64,
}

impl ChuaParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, a: f64, b: f64) -> Result<Self> {
        if ![alpha, beta, gamma, a, b].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("all constants must be finite"));
        }
        if alpha <= 0.0 {
            return Err(Error::InvalidParams("alpha must be positive"));
        }
        if beta <= 0.0 {
            return Err(Error::InvalidParams("beta must be positive"));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParams("gamma must be nonnegative"));
        }
        if !(a < b && b < 0.0) {
            return Err(Error::InvalidParams("slopes must satisfy a < b < 0"));
        }
        Ok(ChuaParams {
            alpha,
            beta,
            gamma,
            a,
            b,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Lipschitz constant of [`chua_nonlinearity`], i.e. `|a|`.
    pub fn lipschitz_constant(&self) -> f64 {
        math::abs(self.a)
    }

    /// Decay rate of the `(x2, x3)` subsystem `A0 = [[-1, 1], [-beta, -gamma]]`:
    /// minus the common real part of its eigenvalues (or of the slower one
    /// when both are real).
    pub fn mu0(&self) -> Result<f64> {
        let half_trace = 0.5 * (1.0 + self.gamma);
        let discriminant = half_trace * half_trace - (self.gamma + self.beta);
        let mu = if discriminant > 0.0 {
            half_trace - math::sqrt(discriminant)
        } else {
            half_trace
        };
        if mu > 0.0 {
            Ok(mu)
        } else {
            Err(Error::NonPositiveDecayRate(mu))
        }
    }

    /// The linear block acting on `(x2, x3)`.
    pub fn a0(&self) -> Matrix {
        Matrix::from_rows(&[[-1.0, 1.0], [-self.beta, -self.gamma]])
    }

    /// Linear part of the full vector field.
    pub fn linear_part(&self) -> Matrix {
        Matrix::from_rows(&[
            [-self.alpha, self.alpha, 0.0],
            [1.0, -1.0, 1.0],
            [0.0, -self.beta, -self.gamma],
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeState {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl NodeState {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        NodeState { x1, x2, x3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3)
    }
}

impl From<[f64; 3]> for NodeState {
    fn from([x1, x2, x3]: [f64; 3]) -> Self {
        NodeState { x1, x2, x3 }
    }
}

impl core::ops::Sub for NodeState {
    type Output = NodeState;

    fn sub(self, rhs: NodeState) -> NodeState {
        NodeState::new(self.x1 - rhs.x1, self.x2 - rhs.x2, self.x3 - rhs.x3)
    }
}

/// `f(x) = b x + (a - b)/2 (|x + 1| - |x - 1|)`: slope `a` inside `[-1, 1]`,
/// slope `b` outside, continuous and odd.
pub fn chua_nonlinearity(x: f64, p: &ChuaParams) -> f64 {
    p.b * x + 0.5 * (p.a - p.b) * (math::abs(x + 1.0) - math::abs(x - 1.0))
}

/// Right-hand side of one oscillator driven by input `u` on the first
/// coordinate.
pub fn node_vector_field(s: NodeState, u: f64, p: &ChuaParams) -> NodeState {
    NodeState {
        x1: p.alpha * (-s.x1 + s.x2 - chua_nonlinearity(s.x1, p)) + u,
        x2: s.x1 - s.x2 + s.x3,
        x3: -p.beta * s.x2 - p.gamma * s.x3,
    }
}
