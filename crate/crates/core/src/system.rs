//! Systems of truncated series together with their ambient ball.

use nalgebra::{DMatrix, DVector};

use crate::bergman::BallContext;
use crate::error::{Error, Result};
use crate::matrix::SeriesMatrix;
use crate::series::{Scalar, TruncatedSeries};

/// An ordered list of series sharing one center, living in `B(omega, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticSystem {
    equations: Vec<TruncatedSeries>,
    ball: BallContext,
}

impl AnalyticSystem {
    /// Fails on an empty list, on mixed centers or dimensions, and when the
    /// common center is not inside the open ball.
    pub fn new(equations: Vec<TruncatedSeries>, ball: BallContext) -> Result<Self> {
        let first = equations
            .first()
            .ok_or_else(|| Error::Domain("a system needs at least one equation".into()))?;
        let center = first.center().to_vec();
        for e in &equations {
            if e.dim() != ball.dim() {
                return Err(Error::DimensionMismatch {
                    expected: ball.dim(),
                    found: e.dim(),
                });
            }
            if e.center() != center.as_slice() {
                return Err(Error::CenterMismatch);
            }
        }
        ball.nu(&center)?;
        Ok(AnalyticSystem { equations, ball })
    }

    /// Same ball, new equations.
    pub fn with_equations(&self, equations: Vec<TruncatedSeries>) -> Result<Self> {
        Self::new(equations, self.ball.clone())
    }

    pub fn with_ball(&self, ball: BallContext) -> Result<Self> {
        Self::new(self.equations.clone(), ball)
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn equations(&self) -> &[TruncatedSeries] {
        &self.equations
    }

    pub fn ball(&self) -> &BallContext {
        &self.ball
    }

    pub fn center(&self) -> &[Scalar] {
        self.equations[0].center()
    }

    /// Smallest truncation order among the equations.
    pub fn order(&self) -> usize {
        self.equations
            .iter()
            .map(TruncatedSeries::order)
            .min()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, x: &[Scalar]) -> DVector<Scalar> {
        DVector::from_iterator(self.len(), self.equations.iter().map(|e| e.evaluate(x)))
    }

    /// `s x n` matrix of partial derivatives.
    pub fn jacobian(&self) -> SeriesMatrix {
        let n = self.dim();
        let order = self.order().saturating_sub(1);
        let entries: Vec<_> = self
            .equations
            .iter()
            .flat_map(|e| (0..n).map(move |v| e.derivative(v).truncate(order)))
            .collect();
        SeriesMatrix::new(self.len(), n, self.center().to_vec(), order, entries)
            .expect("derivatives share the system center")
    }

    /// `DF(x)`, differentiating the stored polynomials without truncating them.
    pub fn jacobian_at(&self, x: &[Scalar]) -> DMatrix<Scalar> {
        let n = self.dim();
        DMatrix::from_fn(self.len(), n, |i, j| {
            self.equations[i].derivative(j).evaluate(x)
        })
    }

    pub fn scale(&self, factor: Scalar) -> AnalyticSystem {
        AnalyticSystem {
            equations: self.equations.iter().map(|e| e.scale(factor)).collect(),
            ball: self.ball.clone(),
        }
    }

    pub fn truncate(&self, order: usize) -> AnalyticSystem {
        AnalyticSystem {
            equations: self.equations.iter().map(|e| e.truncate(order)).collect(),
            ball: self.ball.clone(),
        }
    }

    /// Re-expands every equation around `x`, truncated at `order`.
    pub fn recenter(&self, x: &[Scalar], order: usize) -> Result<AnalyticSystem> {
        let equations = self
            .equations
            .iter()
            .map(|e| e.recenter(x, order.min(e.order())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(equations, self.ball.clone())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.equations
            .iter()
            .map(TruncatedSeries::max_abs_coeff)
            .fold(0.0, f64::max)
    }
}
