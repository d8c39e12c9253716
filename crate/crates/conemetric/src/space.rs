//! Finite point sets with cone-valued distance tables, exhaustive validation
//! of the cone-metric axioms (M1–M4) and the rectangular cone-metric axioms
//! (RC1–RC3), and the reduction of vector distances to ordinary scalar
//! distances via `d_p = xi_e ∘ p`.
//!
//! Validation is exhaustive and therefore only offered for finite tables;
//! continuous domains go through the solver with the axioms assumed rather
//! than verified. Completeness of a space is likewise a hypothesis supplied
//! by the caller — it is not decidable from samples.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::scalarization::ScalarizationContext;
use crate::vecmath;

/// Euclidean-norm threshold below which a stored vector counts as the zero
/// distance (exact equality is not available in floating point).
pub const ZERO_TOL: f64 = 1e-12;

/// A finite point set with a symmetric cone-valued distance table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct FiniteConeSpace {
    labels: Vec<String>,
    cone: Cone,
    dist: Vec<Vec<Vec<f64>>>,
}

impl FiniteConeSpace {
    /// Build a space and enforce the structural invariants: an n×n table of
    /// vectors in the cone's ambient space, zero diagonal, symmetric entries.
    pub fn new(labels: Vec<String>, cone: Cone, dist: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let space = Self::new_unchecked(labels, cone, dist)?;
        for i in 0..space.len() {
            if vecmath::norm(&space.dist[i][i]) > ZERO_TOL {
                return Err(Error::MalformedSpace(format!(
                    "diagonal entry ({}, {}) is not the zero vector",
                    space.labels[i], space.labels[i]
                )));
            }
            for j in i + 1..space.len() {
                let gap = vecmath::sub(&space.dist[i][j], &space.dist[j][i]);
                if vecmath::norm(&gap) > ZERO_TOL {
                    return Err(Error::MalformedSpace(format!(
                        "table is not symmetric at ({}, {})",
                        space.labels[i], space.labels[j]
                    )));
                }
            }
        }
        Ok(space)
    }

    /// Shape-checked construction that skips the zero-diagonal and symmetry
    /// enforcement, so validators can be exercised against broken tables.
    pub fn new_unchecked(
        labels: Vec<String>,
        cone: Cone,
        dist: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::MalformedSpace(
                "a space needs at least one point".into(),
            ));
        }
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::MalformedSpace(format!("duplicate label {a:?}")));
                }
            }
        }
        if dist.len() != n {
            return Err(Error::MalformedSpace(format!(
                "distance table has {} rows, expected {n}",
                dist.len()
            )));
        }
        let dim = cone.dim();
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedSpace(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if v.len() != dim {
                    return Err(Error::MalformedSpace(format!(
                        "entry ({i}, {j}) has dimension {}, expected {dim}",
                        v.len()
                    )));
                }
                if !vecmath::all_finite(v) {
                    return Err(Error::MalformedSpace(format!(
                        "entry ({i}, {j}) has non-finite components"
                    )));
                }
            }
        }
        Ok(Self { labels, cone, dist })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn dist(&self, i: usize, j: usize) -> &[f64] {
        &self.dist[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Return a copy with every distance scaled by `lam > 0`.
    pub fn scaled(&self, lam: f64) -> Result<Self> {
        if !lam.is_finite() || lam <= 0.0 {
            return Err(Error::MalformedSpace(
                "scale factor must be positive".into(),
            ));
        }
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|v| vecmath::scale(v, lam)).collect())
            .collect();
        Self::new_unchecked(self.labels.clone(), self.cone.clone(), dist)
    }

    /// Check the cone-metric axioms exhaustively.
    ///
    /// M1 nonnegativity (every entry belongs to the cone), M2 identity of
    /// indiscernibles (zero vector exactly on the diagonal), M3 symmetry,
    /// M4 triangle inequality `p(x,y) <= p(x,z) + p(z,y)` over all triples
    /// with `z` distinct from the endpoints. Every violated tuple becomes a
    /// witness; the reports come back in axiom order M1..M4.
    pub fn validate_cms(&self) -> Vec<AxiomReport> {
        let n = self.len();
        let mut m1 = Vec::new();
        let mut m2 = Vec::new();
        let mut m3 = Vec::new();
        let mut m4 = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = &self.dist[i][j];
                if !self.cone.contains(v).unwrap_or(false) {
                    m1.push(self.witness(&[i, j], v.clone(), vec![]));
                }
                let is_zero = vecmath::norm(v) <= ZERO_TOL;
                if (i == j) != is_zero {
                    m2.push(self.witness(&[i, j], v.clone(), vec![]));
                }
                if i < j {
                    let mirror = &self.dist[j][i];
                    if vecmath::norm(&vecmath::sub(v, mirror)) > ZERO_TOL {
                        m3.push(self.witness(&[i, j], v.clone(), mirror.clone()));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let via = vecmath::add(&self.dist[i][k], &self.dist[k][j]);
                    if !self.cone.leq(&self.dist[i][j], &via).unwrap_or(false) {
                        // Witness tuple order (x, z, y): endpoint, detour
                        // point, endpoint.
                        m4.push(self.witness(&[i, k, j], self.dist[i][j].clone(), via));
                    }
                }
            }
        }
        vec![
            AxiomReport::new(AxiomId::M1, m1),
            AxiomReport::new(AxiomId::M2, m2),
            AxiomReport::new(AxiomId::M3, m3),
            AxiomReport::new(AxiomId::M4, m4),
        ]
    }

    /// Check the rectangular cone-metric axioms exhaustively.
    ///
    /// RC1 nonnegativity plus identity of indiscernibles, RC2 symmetry, and
    /// RC3 the four-point inequality `p(x,z) <= p(x,y) + p(y,w) + p(w,z)`
    /// over all pairwise-distinct quadruples (the two detour points must
    /// differ from each other and from both endpoints). Spaces with fewer
    /// than four points pass RC3 vacuously.
    pub fn validate_rcms(&self) -> Vec<AxiomReport> {
        let n = self.len();
        let mut rc1 = Vec::new();
        let mut rc2 = Vec::new();
        let mut rc3 = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = &self.dist[i][j];
                let member = self.cone.contains(v).unwrap_or(false);
                let is_zero = vecmath::norm(v) <= ZERO_TOL;
                if !member || (i == j) != is_zero {
                    rc1.push(self.witness(&[i, j], v.clone(), vec![]));
                }
                if i < j {
                    let mirror = &self.dist[j][i];
                    if vecmath::norm(&vecmath::sub(v, mirror)) > ZERO_TOL {
                        rc2.push(self.witness(&[i, j], v.clone(), mirror.clone()));
                    }
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        if x == y || z == w || z == x || z == y || w == x || w == y {
                            continue;
                        }
                        let path = vecmath::add(
                            &vecmath::add(&self.dist[x][y], &self.dist[y][w]),
                            &self.dist[w][z],
                        );
                        if !self.cone.leq(&self.dist[x][z], &path).unwrap_or(false) {
                            rc3.push(self.witness(&[x, y, z, w], self.dist[x][z].clone(), path));
                        }
                    }
                }
            }
        }
        vec![
            AxiomReport::new(AxiomId::Rc1, rc1),
            AxiomReport::new(AxiomId::Rc2, rc2),
            AxiomReport::new(AxiomId::Rc3, rc3),
        ]
    }

    /// Reduce the vector table to scalars: entry `(i, j)` becomes
    /// `xi_e(p(i, j))`. The context must be built over this space's cone.
    pub fn reduce(&self, ctx: &ScalarizationContext) -> Result<Vec<Vec<f64>>> {
        if ctx.cone() != &self.cone {
            return Err(Error::ConeMismatch);
        }
        self.dist
            .iter()
            .map(|row| row.iter().map(|v| ctx.xi(v)).collect())
            .collect()
    }

    fn witness(&self, points: &[usize], lhs: Vec<f64>, rhs: Vec<f64>) -> Witness {
        Witness {
            points: points.iter().map(|i| self.labels[*i].clone()).collect(),
            lhs,
            rhs,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    labels: Vec<String>,
    cone: Cone,
    dist: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<SpaceRepr> for FiniteConeSpace {
    type Error = Error;

    fn try_from(repr: SpaceRepr) -> Result<Self> {
        FiniteConeSpace::new(repr.labels, repr.cone, repr.dist)
    }
}

impl From<FiniteConeSpace> for SpaceRepr {
    fn from(space: FiniteConeSpace) -> Self {
        SpaceRepr {
            labels: space.labels,
            cone: space.cone,
            dist: space.dist,
        }
    }
}

/// Reduced scalar table, the JSON payload of the `reduce` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedTable {
    pub labels: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxiomId {
    M1,
    M2,
    M3,
    M4,
    #[serde(rename = "RC1")]
    Rc1,
    #[serde(rename = "RC2")]
    Rc2,
    #[serde(rename = "RC3")]
    Rc3,
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AxiomId::M1 => "M1",
            AxiomId::M2 => "M2",
            AxiomId::M3 => "M3",
            AxiomId::M4 => "M4",
            AxiomId::Rc1 => "RC1",
            AxiomId::Rc2 => "RC2",
            AxiomId::Rc3 => "RC3",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomStatus {
    Pass,
    Fail,
}

/// An offending tuple: the labels involved, the left-hand vector and (where
/// the axiom compares two quantities) the right-hand vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub points: Vec<String>,
    pub lhs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rhs: Vec<f64>,
}

/// Verdict for a single axiom; a failure carries at least one witness and a
/// pass carries none. Witnesses are listed in lexicographic scan order of
/// the point indices, so reports are deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: AxiomId,
    pub status: AxiomStatus,
    pub witnesses: Vec<Witness>,
}

impl AxiomReport {
    fn new(axiom: AxiomId, witnesses: Vec<Witness>) -> Self {
        let status = if witnesses.is_empty() {
            AxiomStatus::Pass
        } else {
            AxiomStatus::Fail
        };
        Self {
            axiom,
            status,
            witnesses,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == AxiomStatus::Pass
    }
}

/// Scalar-table counterpart of `validate_cms`, with an additive slack on the
/// triangle inequality. Point labels in witnesses are the indices.
#[allow(clippy::needless_range_loop)]
pub fn check_scalar_metric(table: &[Vec<f64>], slack: f64) -> Vec<AxiomReport> {
    let n = table.len();
    let idx = |points: &[usize]| points.iter().map(|i| i.to_string()).collect::<Vec<_>>();
    let mut m1 = Vec::new();
    let mut m2 = Vec::new();
    let mut m3 = Vec::new();
    let mut m4 = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = table[i][j];
            if v < -slack {
                m1.push(Witness {
                    points: idx(&[i, j]),
                    lhs: vec![v],
                    rhs: vec![],
                });
            }
            let is_zero = v.abs() <= slack;
            if (i == j) != is_zero {
                m2.push(Witness {
                    points: idx(&[i, j]),
                    lhs: vec![v],
                    rhs: vec![],
                });
            }
            if i < j && (v - table[j][i]).abs() > slack {
                m3.push(Witness {
                    points: idx(&[i, j]),
                    lhs: vec![v],
                    rhs: vec![table[j][i]],
                });
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let via = table[i][k] + table[k][j];
                if v > via + slack {
                    m4.push(Witness {
                        points: idx(&[i, k, j]),
                        lhs: vec![v],
                        rhs: vec![via],
                    });
                }
            }
        }
    }
    vec![
        AxiomReport::new(AxiomId::M1, m1),
        AxiomReport::new(AxiomId::M2, m2),
        AxiomReport::new(AxiomId::M3, m3),
        AxiomReport::new(AxiomId::M4, m4),
    ]
}

/// Scalar-table counterpart of `validate_rcms`.
#[allow(clippy::needless_range_loop)]
pub fn check_scalar_rectangular(table: &[Vec<f64>], slack: f64) -> Vec<AxiomReport> {
    let n = table.len();
    let idx = |points: &[usize]| points.iter().map(|i| i.to_string()).collect::<Vec<_>>();
    let mut rc1 = Vec::new();
    let mut rc2 = Vec::new();
    let mut rc3 = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = table[i][j];
            let is_zero = v.abs() <= slack;
            if v < -slack || (i == j) != is_zero {
                rc1.push(Witness {
                    points: idx(&[i, j]),
                    lhs: vec![v],
                    rhs: vec![],
                });
            }
            if i < j && (v - table[j][i]).abs() > slack {
                rc2.push(Witness {
                    points: idx(&[i, j]),
                    lhs: vec![v],
                    rhs: vec![table[j][i]],
                });
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    if x == y || z == w || z == x || z == y || w == x || w == y {
                        continue;
                    }
                    let path = table[x][y] + table[y][w] + table[w][z];
                    if table[x][z] > path + slack {
                        rc3.push(Witness {
                            points: idx(&[x, y, z, w]),
                            lhs: vec![table[x][z]],
                            rhs: vec![path],
                        });
                    }
                }
            }
        }
    }
    vec![
        AxiomReport::new(AxiomId::Rc1, rc1),
        AxiomReport::new(AxiomId::Rc2, rc2),
        AxiomReport::new(AxiomId::Rc3, rc3),
    ]
}

/// For each position `n` in a trace, the largest reduced distance from
/// `x_n` to any later point: `max_m d_p(x_n, x_{n+m})`.
///
/// Convergence and Cauchy-ness of a cone-valued orbit are equivalent to the
/// same properties of its scalar reduction, so monitoring these scalar tail
/// gaps is a faithful (and computable) translation of the cone-valued
/// quantifiers.
pub fn max_tail_gaps<T>(trace: &[T], dp: impl Fn(&T, &T) -> f64) -> Vec<f64> {
    (0..trace.len())
        .map(|n| {
            (n + 1..trace.len())
                .map(|m| dp(&trace[n], &trace[m]))
                .fold(0.0_f64, f64::max)
        })
        .collect()
}

/// The classical four-point space (after Branciari): the rectangular
/// inequality holds but the triangle inequality fails.
#[cfg(test)]
pub(crate) fn four_point_space_fixture() -> FiniteConeSpace {
    let z = vec![0.0, 0.0];
    let a = vec![3.0, 6.0];
    let b = vec![1.0, 2.0];
    let c = vec![2.0, 4.0];
    FiniteConeSpace::new(
        vec!["1".into(), "2".into(), "3".into(), "4".into()],
        Cone::orthant(2).unwrap(),
        vec![
            vec![z.clone(), a.clone(), b.clone(), c.clone()],
            vec![a.clone(), z.clone(), b.clone(), c.clone()],
            vec![b.clone(), b.clone(), z.clone(), c.clone()],
            vec![c.clone(), c.clone(), c.clone(), z],
        ],
    )
    .unwrap()
}
