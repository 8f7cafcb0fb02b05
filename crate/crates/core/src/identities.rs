//! Closed-form identities that rewrite interaction terms, maxima and nested
//! ReLU chains as functions of semi-affine combinations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityKind {
    /// x₁x₂ = ¼(x₁+x₂)² − ¼(x₁−x₂)²
    Product,
    /// max(x₁,x₂) = ½(x₁+x₂) + ½|x₁−x₂|
    Max,
    /// (x₁x₂)² as a combination of four quartic ridge functions.
    ProductSquared,
    /// Nested ReLU chain equals the positive part of the largest prefix sum.
    MaxSum,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 4] = [
        IdentityKind::Product,
        IdentityKind::Max,
        IdentityKind::ProductSquared,
        IdentityKind::MaxSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::Product => "product",
            IdentityKind::Max => "max",
            IdentityKind::ProductSquared => "product_squared",
            IdentityKind::MaxSum => "max_sum",
        }
    }
}

/// Both sides of an identity evaluated at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySides {
    /// Direct evaluation.
    pub lhs: f64,
    /// Semi-affine (ridge function) form.
    pub rhs: f64,
}

impl IdentitySides {
    /// |lhs − rhs| / (1 + |lhs|)
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / (1.0 + self.lhs.abs())
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn verify_identity(kind: IdentityKind, x: &[f64]) -> Result<IdentitySides> {
    let pair = || -> Result<(f64, f64)> {
        match x {
            [a, b] => Ok((*a, *b)),
            _ => Err(Error::shape(format!(
                "{} identity takes 2 inputs, got {}",
                kind.name(),
                x.len()
            ))),
        }
    };
    let sides = match kind {
        IdentityKind::Product => {
            let (a, b) = pair()?;
            IdentitySides {
                lhs: a * b,
                rhs: 0.25 * (a + b).powi(2) - 0.25 * (a - b).powi(2),
            }
        }
        IdentityKind::Max => {
            let (a, b) = pair()?;
            IdentitySides {
                lhs: a.max(b),
                rhs: 0.5 * (a + b) + 0.5 * (a - b).abs(),
            }
        }
        IdentityKind::ProductSquared => {
            let (a, b) = pair()?;
            IdentitySides {
                lhs: (a * b).powi(2),
                rhs: 0.25 * (a + b).powi(4) + 7.0 / 108.0 * (a - b).powi(4)
                    - 1.0 / 54.0 * (a + 2.0 * b).powi(4)
                    - 8.0 / 27.0 * (a + 0.5 * b).powi(4),
            }
        }
        IdentityKind::MaxSum => {
            if x.is_empty() {
                return Err(Error::shape("max_sum identity needs at least one input"));
            }
            // (f_{x1} ∘ … ∘ f_{xk})(0) with f_x(b) = (x + b)⁺, innermost first.
            let lhs = x.iter().rev().fold(0.0, |b, &xi| relu(xi + b));
            let mut prefix = 0.0;
            let mut best = f64::NEG_INFINITY;
            for &xi in x {
                prefix += xi;
                best = best.max(prefix);
            }
            IdentitySides {
                lhs,
                rhs: relu(best),
            }
        }
    };
    Ok(sides)
}
