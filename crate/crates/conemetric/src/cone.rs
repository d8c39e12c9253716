//! Closed convex pointed cones in R^n and the partial order they induce.
//!
//! Three families are supported: the nonnegative orthant, polyhedral cones
//! given by facet normals (`y` is a member iff `A y >= 0` rowwise), and the
//! second-order (Lorentz) cone `{(u, t) : ||u|| <= t}`. Every cone here is
//! closed, pointed and solid; membership and interior tests carry a small
//! configurable slack so boundary arithmetic stays predictable. Normality of
//! the cone plays no computational role and is not modelled.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecmath;

pub const DEFAULT_TOL_MEM: f64 = 1e-12;
pub const DEFAULT_TOL_INT: f64 = 1e-12;

/// Directions drawn when sanity-checking pointedness of polyhedral cones.
const POINTEDNESS_SAMPLES: usize = 10_000;
const CONSTRUCTION_SEED: u64 = 0x0c01_7e5e;

#[derive(Clone, Debug, PartialEq)]
pub enum ConeKind {
    Orthant {
        dim: usize,
    },
    /// Facet-normal rows; `interior` caches one strictly interior direction
    /// found at construction time.
    Polyhedral {
        rows: Vec<Vec<f64>>,
        interior: Vec<f64>,
    },
    SecondOrder {
        dim: usize,
    },
}

/// A closed convex pointed solid cone, plus the membership/interior slacks
/// used by all comparisons. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeRepr", into = "ConeRepr")]
pub struct Cone {
    kind: ConeKind,
    tol_mem: f64,
    tol_int: f64,
}

impl Cone {
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidCone(
                "orthant dimension must be positive".into(),
            ));
        }
        Ok(Self {
            kind: ConeKind::Orthant { dim },
            tol_mem: DEFAULT_TOL_MEM,
            tol_int: DEFAULT_TOL_INT,
        })
    }

    /// Build a polyhedral cone `{y : A y >= 0}` from facet-normal rows.
    ///
    /// Construction rejects cones that are not pointed (the lineality space
    /// `{y : A y = 0}` must be trivial, checked by a rank test plus direction
    /// sampling) or not solid (no direction with `A y > 0` strictly could be
    /// found).
    pub fn polyhedral(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidCone(
                "polyhedral cone needs at least one facet row".into(),
            ));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidCone("facet rows must be non-empty".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::InvalidCone(format!(
                    "facet row {i} has length {}, expected {n}",
                    r.len()
                )));
            }
            if !vecmath::all_finite(r) {
                return Err(Error::InvalidCone(format!(
                    "facet row {i} has non-finite entries"
                )));
            }
            if vecmath::norm(r) == 0.0 {
                return Err(Error::InvalidCone(format!(
                    "facet row {i} is the zero vector"
                )));
            }
        }
        // Pointedness: P ∩ (−P) = {y : A y = 0}, so the cone is pointed
        // exactly when A has full column rank.
        if vecmath::rank(&rows) < n {
            return Err(Error::InvalidCone(
                "cone is not pointed: facet matrix has a nontrivial null space".into(),
            ));
        }
        let interior = find_interior_direction(&rows).ok_or_else(|| {
            Error::InvalidCone("cone is not solid: no strictly interior direction found".into())
        })?;
        let cone = Self {
            kind: ConeKind::Polyhedral { rows, interior },
            tol_mem: DEFAULT_TOL_MEM,
            tol_int: DEFAULT_TOL_INT,
        };
        cone.sampled_pointedness_check()?;
        Ok(cone)
    }

    pub fn second_order(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidCone(
                "second-order cone dimension must be at least 2".into(),
            ));
        }
        Ok(Self {
            kind: ConeKind::SecondOrder { dim },
            tol_mem: DEFAULT_TOL_MEM,
            tol_int: DEFAULT_TOL_INT,
        })
    }

    /// Replace the membership/interior slacks (tests tighten these).
    pub fn with_tolerances(mut self, tol_mem: f64, tol_int: f64) -> Result<Self> {
        if !tol_mem.is_finite() || tol_mem < 0.0 || !tol_int.is_finite() || tol_int < 0.0 {
            return Err(Error::InvalidCone(
                "tolerances must be finite and nonnegative".into(),
            ));
        }
        self.tol_mem = tol_mem;
        self.tol_int = tol_int;
        Ok(self)
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    pub fn tol_mem(&self) -> f64 {
        self.tol_mem
    }

    pub fn tol_int(&self) -> f64 {
        self.tol_int
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            ConeKind::Orthant { dim } | ConeKind::SecondOrder { dim } => *dim,
            ConeKind::Polyhedral { rows, .. } => rows[0].len(),
        }
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Membership oracle: `y ∈ P` up to `tol_mem`.
    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        self.check_dim(y)?;
        Ok(match &self.kind {
            ConeKind::Orthant { .. } => y.iter().all(|v| *v >= -self.tol_mem),
            ConeKind::Polyhedral { rows, .. } => {
                rows.iter().all(|r| vecmath::dot(r, y) >= -self.tol_mem)
            }
            ConeKind::SecondOrder { dim } => {
                let (u, t) = y.split_at(dim - 1);
                vecmath::norm(u) <= t[0] + self.tol_mem
            }
        })
    }

    /// Strict interior test with margin `tol_int`. Boundary points are
    /// members but never interior.
    pub fn in_interior(&self, y: &[f64]) -> Result<bool> {
        self.check_dim(y)?;
        Ok(match &self.kind {
            ConeKind::Orthant { .. } => y.iter().all(|v| *v > self.tol_int),
            ConeKind::Polyhedral { rows, .. } => {
                rows.iter().all(|r| vecmath::dot(r, y) > self.tol_int)
            }
            ConeKind::SecondOrder { dim } => {
                let (u, t) = y.split_at(dim - 1);
                vecmath::norm(u) < t[0] - self.tol_int
            }
        })
    }

    /// Partial order: `x <= y` iff `y - x ∈ P`.
    pub fn leq(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        self.contains(&vecmath::sub(y, x))
    }

    /// Strict order: `x << y` iff `y - x ∈ int P`.
    pub fn ll(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        self.in_interior(&vecmath::sub(y, x))
    }

    /// A canonical strictly interior direction: the all-ones vector for the
    /// orthant, the axis for the second-order cone, the cached direction for
    /// polyhedral cones.
    pub fn interior_direction(&self) -> Vec<f64> {
        match &self.kind {
            ConeKind::Orthant { dim } => vec![1.0; *dim],
            ConeKind::Polyhedral { interior, .. } => interior.clone(),
            ConeKind::SecondOrder { dim } => {
                let mut e = vec![0.0; *dim];
                e[dim - 1] = 1.0;
                e
            }
        }
    }

    /// Draw a random member of the cone (used by the constructor sanity
    /// checks and by sampling-based tests).
    pub fn sample_member<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            ConeKind::Orthant { dim } => (0..*dim).map(|_| rng.random_range(0.0..10.0)).collect(),
            ConeKind::SecondOrder { dim } => {
                let u: Vec<f64> = (0..dim - 1).map(|_| rng.random_range(-5.0..5.0)).collect();
                let t = vecmath::norm(&u) + rng.random_range(0.0..5.0);
                let mut y = u;
                y.push(t);
                y
            }
            ConeKind::Polyhedral { rows, interior } => {
                let n = rows[0].len();
                let t = rng.random_range(0.1..10.0);
                let base = vecmath::scale(interior, t);
                for _ in 0..32 {
                    let jitter: Vec<f64> = (0..n).map(|_| rng.random_range(-0.2..0.2)).collect();
                    let candidate = vecmath::add(&base, &vecmath::scale(&jitter, t));
                    if self.contains(&candidate).unwrap_or(false) {
                        return candidate;
                    }
                }
                base
            }
        }
    }

    /// Heuristic pointedness probe: no sampled unit direction may belong to
    /// the cone together with its negation. The rank test in the constructor
    /// is the effective check; this keeps an independent randomized probe.
    fn sampled_pointedness_check(&self) -> Result<()> {
        let n = self.dim();
        let mut rng = StdRng::seed_from_u64(CONSTRUCTION_SEED);
        for _ in 0..POINTEDNESS_SAMPLES {
            let y = random_unit(&mut rng, n);
            if self.contains(&y)? && self.contains(&vecmath::scale(&y, -1.0))? {
                return Err(Error::InvalidCone(
                    "cone is not pointed: sampled direction lies in P ∩ (−P)".into(),
                ));
            }
        }
        Ok(())
    }
}

fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = vecmath::norm(&y);
        if norm > 1e-3 {
            return vecmath::scale(&y, 1.0 / norm);
        }
    }
}

/// Look for a unit direction with `A y > 0` strictly: least-squares towards
/// `A y = 1`, the sum of unit facet normals, then random sampling.
fn find_interior_direction(rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = rows[0].len();
    let margin_ok = |y: &[f64]| {
        rows.iter()
            .all(|r| vecmath::dot(r, y) > 1e-9 * vecmath::norm(r))
    };
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if let Some(y) = vecmath::least_squares_ones(rows) {
        candidates.push(y);
    }
    let mut row_sum = vec![0.0; n];
    for r in rows {
        let u = vecmath::scale(r, 1.0 / vecmath::norm(r));
        row_sum = vecmath::add(&row_sum, &u);
    }
    candidates.push(row_sum);
    for y in candidates {
        let norm = vecmath::norm(&y);
        if norm > 0.0 {
            let unit = vecmath::scale(&y, 1.0 / norm);
            if margin_ok(&unit) {
                return Some(unit);
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(CONSTRUCTION_SEED);
    (0..POINTEDNESS_SAMPLES)
        .map(|_| random_unit(&mut rng, n))
        .find(|y| margin_ok(y))
}

/// Wire format shared by all JSON files:
/// `{"type":"orthant","dim":2}` | `{"type":"polyhedral","A":[[...],...]}` |
/// `{"type":"second_order","dim":3}`, each with optional `tol_mem`/`tol_int`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ConeRepr {
    Orthant {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_mem: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_int: Option<f64>,
    },
    Polyhedral {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_mem: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_int: Option<f64>,
    },
    SecondOrder {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_mem: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_int: Option<f64>,
    },
}

impl TryFrom<ConeRepr> for Cone {
    type Error = Error;

    fn try_from(repr: ConeRepr) -> Result<Self> {
        let (cone, tol_mem, tol_int) = match repr {
            ConeRepr::Orthant {
                dim,
                tol_mem,
                tol_int,
            } => (Cone::orthant(dim)?, tol_mem, tol_int),
            ConeRepr::Polyhedral {
                a,
                tol_mem,
                tol_int,
            } => (Cone::polyhedral(a)?, tol_mem, tol_int),
            ConeRepr::SecondOrder {
                dim,
                tol_mem,
                tol_int,
            } => (Cone::second_order(dim)?, tol_mem, tol_int),
        };
        cone.with_tolerances(
            tol_mem.unwrap_or(DEFAULT_TOL_MEM),
            tol_int.unwrap_or(DEFAULT_TOL_INT),
        )
    }
}

impl From<Cone> for ConeRepr {
    fn from(cone: Cone) -> Self {
        let tol_mem = (cone.tol_mem != DEFAULT_TOL_MEM).then_some(cone.tol_mem);
        let tol_int = (cone.tol_int != DEFAULT_TOL_INT).then_some(cone.tol_int);
        match cone.kind {
            ConeKind::Orthant { dim } => ConeRepr::Orthant {
                dim,
                tol_mem,
                tol_int,
            },
            ConeKind::Polyhedral { rows, .. } => ConeRepr::Polyhedral {
                a: rows,
                tol_mem,
                tol_int,
            },
            ConeKind::SecondOrder { dim } => ConeRepr::SecondOrder {
                dim,
                tol_mem,
                tol_int,
            },
        }
    }
}
