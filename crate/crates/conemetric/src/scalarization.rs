//! The nonlinear scalarization `xi_e(y) = inf { t : y ∈ t e − P }` for an
//! interior direction `e` (the Gerstewitz/Tammer functional).
//!
//! Two independent routes are provided: `xi` evaluates a closed form per cone
//! family, and `xi_bisect` solves the same infimum by bracketing and
//! bisecting the monotone membership predicate `t ↦ (t e − y) ∈ P`. The
//! predicate is monotone because `(t' − t) e ∈ P` for `t' >= t` and
//! `P + P ⊆ P`, which is what makes the bisection a sound oracle for the
//! closed forms.

use serde::{Deserialize, Serialize};

use crate::cone::{Cone, ConeKind};
use crate::error::{Error, Result};
use crate::vecmath;

pub const DEFAULT_BISECT_TOL: f64 = 1e-10;
pub const DEFAULT_BRACKET_CAP: f64 = 1e12;

/// A cone paired with a fixed strictly interior scalarization direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarizationContext {
    cone: Cone,
    e: Vec<f64>,
    bisect_tol: f64,
    bracket_cap: f64,
}

impl ScalarizationContext {
    /// Pair a cone with a direction `e`; rejects `e` outside the interior
    /// (the scalarization is only defined for interior directions, and we
    /// refuse to guess on the boundary).
    pub fn new(cone: Cone, e: Vec<f64>) -> Result<Self> {
        if !cone.in_interior(&e)? {
            return Err(Error::DirectionNotInterior);
        }
        Ok(Self {
            cone,
            e,
            bisect_tol: DEFAULT_BISECT_TOL,
            bracket_cap: DEFAULT_BRACKET_CAP,
        })
    }

    pub fn with_bisection(mut self, bisect_tol: f64, bracket_cap: f64) -> Result<Self> {
        if !bisect_tol.is_finite() || bisect_tol <= 0.0 {
            return Err(Error::InvalidParameter(
                "bisect_tol must be positive".into(),
            ));
        }
        if !bracket_cap.is_finite() || bracket_cap <= 0.0 {
            return Err(Error::InvalidParameter(
                "bracket_cap must be positive".into(),
            ));
        }
        self.bisect_tol = bisect_tol;
        self.bracket_cap = bracket_cap;
        Ok(self)
    }

    /// Context over the nonnegative orthant with the all-ones direction;
    /// `xi` then reduces to the componentwise maximum (Chebyshev gauge).
    pub fn chebyshev(dim: usize) -> Result<Self> {
        let cone = Cone::orthant(dim)?;
        let e = vec![1.0; dim];
        Self::new(cone, e)
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn direction(&self) -> &[f64] {
        &self.e
    }

    pub fn bisect_tol(&self) -> f64 {
        self.bisect_tol
    }

    /// Closed-form scalarization. Total on R^n for solid cones; the only
    /// failure mode is a dimension mismatch (or, for generic second-order
    /// directions, whatever `xi_bisect` reports).
    ///
    /// Orthant: `max_i y_i / e_i`. Polyhedral `A`: `max_i (A y)_i / (A e)_i`,
    /// well defined because `(A e)_i > 0` for interior `e`. Second-order cone
    /// with the axis direction `e = (0, …, 0, 1)`: `y = (u, t)` gives
    /// `t + ||u||`; any other direction falls back to the bisection oracle.
    pub fn xi(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.cone.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cone.dim(),
                got: y.len(),
            });
        }
        match self.cone.kind() {
            ConeKind::Orthant { .. } => Ok(y
                .iter()
                .zip(&self.e)
                .map(|(yi, ei)| yi / ei)
                .fold(f64::NEG_INFINITY, f64::max)),
            ConeKind::Polyhedral { rows, .. } => Ok(rows
                .iter()
                .map(|r| vecmath::dot(r, y) / vecmath::dot(r, &self.e))
                .fold(f64::NEG_INFINITY, f64::max)),
            ConeKind::SecondOrder { dim } => {
                let axis = self.e[..dim - 1].iter().all(|v| *v == 0.0) && self.e[dim - 1] == 1.0;
                if axis {
                    let (u, t) = y.split_at(dim - 1);
                    Ok(t[0] + vecmath::norm(u))
                } else {
                    self.xi_bisect(y)
                }
            }
        }
    }

    /// Bisection oracle for `xi`: grow a bracket from `t = ±1` by doubling
    /// until the membership predicate flips, then bisect down to
    /// `bisect_tol`. Returns an unbounded-input error when the bracket would
    /// exceed `bracket_cap`.
    pub fn xi_bisect(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.cone.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cone.dim(),
                got: y.len(),
            });
        }
        let above = |t: f64| -> Result<bool> {
            let shifted = vecmath::sub(&vecmath::scale(&self.e, t), y);
            self.cone.contains(&shifted)
        };
        let mut hi = 1.0;
        let mut lo = -1.0;
        if above(hi)? {
            if above(lo)? {
                // xi <= -1: push the bracket down
                hi = lo;
                lo *= 2.0;
                while above(lo)? {
                    hi = lo;
                    lo *= 2.0;
                    if lo < -self.bracket_cap {
                        return Err(Error::UnboundedInput {
                            cap: self.bracket_cap,
                        });
                    }
                }
            }
        } else {
            // xi > 1: push the bracket up
            lo = hi;
            hi *= 2.0;
            while !above(hi)? {
                lo = hi;
                hi *= 2.0;
                if hi > self.bracket_cap {
                    return Err(Error::UnboundedInput {
                        cap: self.bracket_cap,
                    });
                }
            }
        }
        // Invariant: predicate is false at lo, true at hi, so xi ∈ (lo, hi].
        while hi - lo > self.bisect_tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break; // f64 resolution reached
            }
            if above(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
