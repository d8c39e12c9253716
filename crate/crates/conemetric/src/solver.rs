//! Picard iteration with certified geometric convergence bounds.
//!
//! For a self-map `T` with the Kannan property
//! `d(Tx, Ty) <= beta (d(x, Tx) + d(y, Ty))`, `beta < 1/2`, the orbit's step
//! distances decay like `r^n d(x0, Tx0)` with `r = beta / (1 - beta)`, and
//! every tail gap is bounded by `r^n / (1 - r) * d(x0, Tx0)`. The solver runs
//! the orbit over the scalar reduction `d_p = xi_e ∘ p`, estimates `beta`
//! (exactly on finite spaces; over an endpoint grid plus seeded samples on
//! continuous ones), certifies convergence with the geometric bound, and diagnoses
//! nontrivial cycles: a revisit with a non-vanishing step distance is
//! evidence the Kannan condition does not actually hold, since under the
//! condition any revisit forces a fixed point.
//!
//! The Banach route does the same with `d(Tx, Ty) <= k d(x, y)` and the
//! bound `k^n / (1 - k) * d(x0, Tx0)`.

use std::collections::{BTreeMap, HashMap};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::cone::ConeKind;
use crate::error::{Error, Result};
use crate::scalarization::ScalarizationContext;
use crate::space::FiniteConeSpace;
use crate::vecmath;

/// Reduced-metric threshold under which two iterates count as the same
/// point. Exact label identity is used on finite spaces; this threshold only
/// arbitrates floating-point collapse on continuous domains, and the report
/// flags when it fired.
pub const CYCLE_EPS: f64 = 1e-14;

/// Denominator threshold for the 0/0 pairs skipped during rate estimation.
const RATIO_EPS: f64 = 1e-14;

/// Hard cap on the deterministic sample grid for continuous domains.
const GRID_CAP: usize = 4096;

/// Self-map description as it appears in map files. Programmatic self-maps
/// (arbitrary closures with their own cone metric) enter through
/// [`Problem::callable`] instead, since closures have no wire format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MapSpec {
    /// `targets` sends every point label to its image label.
    FiniteTable { targets: BTreeMap<String, String> },
    /// `x ↦ A x + b` on R^k, with the componentwise absolute difference
    /// into the nonnegative orthant as the cone metric.
    Affine {
        #[serde(rename = "A")]
        matrix: Vec<Vec<f64>>,
        #[serde(rename = "b")]
        offset: Vec<f64>,
    },
}

/// Knobs for the orbit run and the rate estimation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_iter: usize,
    /// Stopping tolerance in reduced-metric units.
    pub tol: f64,
    /// Approximate number of sample pairs for rate estimation on continuous
    /// domains; finite spaces always enumerate all pairs.
    pub beta_samples: usize,
    /// Seed for the randomized portion of the continuous sampling domain
    /// (the box-endpoint grid underneath it is deterministic).
    pub seed: u64,
    /// Run the orbit even when the estimated beta fails the Kannan bound.
    /// The resulting report carries an `unsound` certificate and makes no
    /// convergence guarantee.
    pub allow_unsound: bool,
    /// Sampling box for continuous domains; defaults to `x0 ± 1` per axis.
    pub sample_box: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-10,
            beta_samples: 2000,
            seed: 42,
            allow_unsound: false,
            sample_box: None,
        }
    }
}

/// A point of the solve domain: a label into a finite space or coordinates
/// in R^k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Label(String),
    Coords(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    CycleDetected,
    BudgetExhausted,
    NotKannan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// All pairs enumerated: the rate estimate is exact for the space.
    #[serde(rename = "exact-beta")]
    ExactBeta,
    /// Rate estimated from sampled pairs: a lower bound on the true rate
    /// over continuous domains.
    #[serde(rename = "sampled-beta")]
    SampledBeta,
    /// Run forced past a failed rate precondition; the bound is meaningless.
    #[serde(rename = "unsound")]
    Unsound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Kannan,
    Banach,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub n: usize,
    pub d_step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleInfo {
    pub first_seen: usize,
    pub revisit: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCheck {
    pub second_start: Point,
    #[serde(with = "float_repr")]
    pub distance: f64,
    pub agrees: bool,
}

/// Outcome of a solve: the orbit trace with per-step distances, the rate
/// estimate `beta_hat`, the geometric ratio `r`, and the final certified
/// tail bound `r^n / (1 - r) * d_p(x0, Tx0)`.
///
/// For Banach runs `beta_hat` holds the contraction constant `k` and
/// `r = k`. On sound converged runs `certified_bound <= tol` and
/// `r ∈ [0, 1)`; unsound runs report an infinite bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub outcome: Outcome,
    pub fixed_point: Option<Point>,
    pub iterations: usize,
    #[serde(with = "float_repr")]
    pub beta_hat: f64,
    #[serde(with = "float_repr")]
    pub r: f64,
    #[serde(with = "float_repr")]
    pub certified_bound: f64,
    pub orbit_trace: Vec<TraceEntry>,
    pub certificate: Certificate,
    pub cycle: Option<CycleInfo>,
    pub uniqueness: Option<UniquenessCheck>,
    /// Set when the continuous-domain revisit threshold fired, i.e. two
    /// analytically distinct iterates may have collapsed in floating point.
    pub near_collapse: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Idx(usize),
    Coords(Vec<f64>),
}

type MapFn<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>;
type MetricFn<'a> = Box<dyn Fn(&[f64], &[f64]) -> Vec<f64> + 'a>;

enum Inner<'a> {
    Finite {
        space: &'a FiniteConeSpace,
        reduced: Vec<Vec<f64>>,
        targets: Vec<usize>,
    },
    Continuous {
        dim: usize,
        map: MapFn<'a>,
        metric: MetricFn<'a>,
        ctx: ScalarizationContext,
        metric_scale: f64,
    },
}

/// A solvable fixed-point problem: a self-map together with the scalar
/// reduction of its cone metric.
pub struct Problem<'a> {
    inner: Inner<'a>,
}

impl<'a> Problem<'a> {
    /// Finite-space problem from a map file. The scalarization context must
    /// be built over the space's cone; the vector table is reduced once up
    /// front and all solver distances are lookups into it.
    pub fn finite(
        space: &'a FiniteConeSpace,
        ctx: &ScalarizationContext,
        map: &MapSpec,
    ) -> Result<Self> {
        match map {
            MapSpec::FiniteTable { targets } => {
                let resolved = resolve_targets(targets, space)?;
                Self::finite_with_targets(space, ctx, resolved)
            }
            MapSpec::Affine { .. } => Err(Error::InvalidMap(
                "an affine map does not act on a finite space".into(),
            )),
        }
    }

    pub fn finite_with_targets(
        space: &'a FiniteConeSpace,
        ctx: &ScalarizationContext,
        targets: Vec<usize>,
    ) -> Result<Self> {
        if targets.len() != space.len() {
            return Err(Error::InvalidMap(format!(
                "map table has {} entries for {} points",
                targets.len(),
                space.len()
            )));
        }
        if let Some(bad) = targets.iter().find(|t| **t >= space.len()) {
            return Err(Error::InvalidMap(format!(
                "target index {bad} out of range"
            )));
        }
        let reduced = space.reduce(ctx)?;
        Ok(Self {
            inner: Inner::Finite {
                space,
                reduced,
                targets,
            },
        })
    }

    /// Affine problem `x ↦ A x + b` with the componentwise absolute
    /// difference into the orthant as cone metric.
    pub fn affine(
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
        ctx: ScalarizationContext,
    ) -> Result<Self> {
        let k = matrix.len();
        if k == 0 || matrix.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidMap(
                "affine matrix must be square and non-empty".into(),
            ));
        }
        if offset.len() != k {
            return Err(Error::InvalidMap(format!(
                "offset has dimension {}, expected {k}",
                offset.len()
            )));
        }
        if matrix.iter().any(|row| !vecmath::all_finite(row)) || !vecmath::all_finite(&offset) {
            return Err(Error::InvalidMap(
                "affine map has non-finite entries".into(),
            ));
        }
        if !matches!(ctx.cone().kind(), ConeKind::Orthant { .. }) || ctx.cone().dim() != k {
            return Err(Error::InvalidMap(
                "affine problems use an orthant scalarization context of matching dimension".into(),
            ));
        }
        let map = move |x: &[f64]| -> Vec<f64> {
            let mut y = vecmath::mat_vec(&matrix, x);
            for (yi, bi) in y.iter_mut().zip(&offset) {
                *yi += bi;
            }
            y
        };
        let metric = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(a, b)| (a - b).abs()).collect()
        };
        Ok(Self {
            inner: Inner::Continuous {
                dim: k,
                map: Box::new(map),
                metric: Box::new(metric),
                ctx,
                metric_scale: 1.0,
            },
        })
    }

    /// Affine problem with the all-ones direction, i.e. the Chebyshev
    /// distance as the reduced metric.
    pub fn affine_default(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let k = matrix.len();
        Self::affine(matrix, offset, ScalarizationContext::chebyshev(k.max(1))?)
    }

    /// Library-only route: an arbitrary self-map on R^`dim` with a
    /// user-supplied cone-valued metric reduced through `ctx`.
    pub fn callable(
        dim: usize,
        map: impl Fn(&[f64]) -> Vec<f64> + 'a,
        metric: impl Fn(&[f64], &[f64]) -> Vec<f64> + 'a,
        ctx: ScalarizationContext,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMap(
                "domain dimension must be positive".into(),
            ));
        }
        Ok(Self {
            inner: Inner::Continuous {
                dim,
                map: Box::new(map),
                metric: Box::new(metric),
                ctx,
                metric_scale: 1.0,
            },
        })
    }

    /// Multiply the reduced metric of a continuous problem by `lam > 0`
    /// (unit rescaling; the homogeneity of the scalarization makes this
    /// equivalent to scaling the cone metric itself).
    pub fn with_metric_scale(mut self, lam: f64) -> Result<Self> {
        if !lam.is_finite() || lam <= 0.0 {
            return Err(Error::InvalidMap("metric scale must be positive".into()));
        }
        match &mut self.inner {
            Inner::Continuous { metric_scale, .. } => {
                *metric_scale = lam;
                Ok(self)
            }
            Inner::Finite { .. } => Err(Error::InvalidMap(
                "finite spaces are rescaled through their distance table".into(),
            )),
        }
    }

    pub fn is_finite_space(&self) -> bool {
        matches!(self.inner, Inner::Finite { .. })
    }

    /// The reduced scalar distance table of a finite problem.
    pub fn reduced_table(&self) -> Option<&Vec<Vec<f64>>> {
        match &self.inner {
            Inner::Finite { reduced, .. } => Some(reduced),
            Inner::Continuous { .. } => None,
        }
    }

    /// Reduced distance between two points of the domain.
    pub fn dp(&self, a: &Point, b: &Point) -> Result<f64> {
        let a = self.resolve(a)?;
        let b = self.resolve(b)?;
        self.dp_nodes(&a, &b)
    }

    /// One application of the self-map.
    pub fn apply_map(&self, p: &Point) -> Result<Point> {
        let node = self.resolve(p)?;
        Ok(self.repr(&self.apply(&node, 0)?))
    }

    /// Supremum of `d_p(Tx, Ty) / (d_p(x, Tx) + d_p(y, Ty))` over the pair
    /// domain: all pairs on finite spaces (exact), a deterministic grid over
    /// the sampling box on continuous ones. Pairs where both numerator and
    /// denominator vanish are skipped; a vanishing denominator with a
    /// non-vanishing numerator yields the infinite sentinel.
    pub fn estimate_beta(&self, x0: &Point, cfg: &SolveConfig) -> Result<f64> {
        self.sup_ratio(x0, cfg, SolveMode::Kannan)
    }

    /// Supremum of `d_p(Tx, Ty) / d_p(x, y)` over the same pair domain.
    pub fn estimate_contraction(&self, x0: &Point, cfg: &SolveConfig) -> Result<f64> {
        self.sup_ratio(x0, cfg, SolveMode::Banach)
    }

    /// Run the Kannan-certified Picard orbit from `x0`.
    ///
    /// Outcomes: `converged` once the tail bound and the current step are
    /// both below `tol` (the fixed point and a second-start uniqueness probe
    /// come with it); `cycle_detected` on an exact revisit with a
    /// non-vanishing step; `budget_exhausted` after `max_iter` steps;
    /// `not_kannan` without running when `beta_hat >= 1/2`, unless
    /// `allow_unsound` is set.
    pub fn kannan_solve(&self, x0: &Point, cfg: &SolveConfig) -> Result<SolveReport> {
        check_config(cfg)?;
        let beta = self.estimate_beta(x0, cfg)?;
        let sound = beta < 0.5;
        let r = if beta < 1.0 {
            beta / (1.0 - beta)
        } else {
            f64::INFINITY
        };
        if !sound && !cfg.allow_unsound {
            return Ok(self.precondition_report(SolveMode::Kannan, beta, r));
        }
        let certificate = self.certificate(sound);
        let start = self.resolve(x0)?;
        let mut report =
            self.solve_inner(start, cfg, SolveMode::Kannan, beta, r, sound, certificate)?;
        self.probe_uniqueness(
            &mut report,
            cfg,
            SolveMode::Kannan,
            beta,
            r,
            sound,
            certificate,
        );
        Ok(report)
    }

    /// Banach variant: contraction constant `k` supplied or estimated; the
    /// certificate is the geometric bound `k^n / (1 - k) * d_p(x0, Tx0)`.
    pub fn banach_solve(
        &self,
        x0: &Point,
        cfg: &SolveConfig,
        k: Option<f64>,
    ) -> Result<SolveReport> {
        check_config(cfg)?;
        let k = match k {
            Some(k) if (0.0..1.0).contains(&k) => k,
            Some(k) => return Err(Error::NotContractive { k }),
            None => self.estimate_contraction(x0, cfg)?,
        };
        if k.is_nan() || k >= 1.0 {
            return Err(Error::NotContractive { k });
        }
        let certificate = self.certificate(true);
        let start = self.resolve(x0)?;
        let mut report =
            self.solve_inner(start, cfg, SolveMode::Banach, k, k, true, certificate)?;
        self.probe_uniqueness(&mut report, cfg, SolveMode::Banach, k, k, true, certificate);
        Ok(report)
    }

    fn certificate(&self, sound: bool) -> Certificate {
        if !sound {
            Certificate::Unsound
        } else if self.is_finite_space() {
            Certificate::ExactBeta
        } else {
            Certificate::SampledBeta
        }
    }

    fn precondition_report(&self, mode: SolveMode, beta: f64, r: f64) -> SolveReport {
        SolveReport {
            mode,
            outcome: Outcome::NotKannan,
            fixed_point: None,
            iterations: 0,
            beta_hat: beta,
            r,
            certified_bound: f64::INFINITY,
            orbit_trace: vec![],
            certificate: self.certificate(false),
            cycle: None,
            uniqueness: None,
            near_collapse: false,
        }
    }

    fn resolve(&self, p: &Point) -> Result<Node> {
        match (&self.inner, p) {
            (Inner::Finite { space, .. }, Point::Label(l)) => space
                .index_of(l)
                .map(Node::Idx)
                .ok_or_else(|| Error::BadStart(format!("unknown label {l:?}"))),
            (Inner::Finite { .. }, Point::Coords(_)) => Err(Error::BadStart(
                "finite spaces address points by label".into(),
            )),
            (Inner::Continuous { dim, .. }, Point::Coords(c)) => {
                if c.len() != *dim {
                    return Err(Error::BadStart(format!(
                        "start has dimension {}, expected {dim}",
                        c.len()
                    )));
                }
                Ok(Node::Coords(c.clone()))
            }
            (Inner::Continuous { .. }, Point::Label(l)) => Err(Error::BadStart(format!(
                "continuous domains address points by coordinates, got label {l:?}"
            ))),
        }
    }

    fn repr(&self, node: &Node) -> Point {
        match (&self.inner, node) {
            (Inner::Finite { space, .. }, Node::Idx(i)) => Point::Label(space.labels()[*i].clone()),
            (_, Node::Coords(c)) => Point::Coords(c.clone()),
            (Inner::Continuous { .. }, Node::Idx(_)) => {
                unreachable!("index node in continuous domain")
            }
        }
    }

    fn apply(&self, node: &Node, iteration: usize) -> Result<Node> {
        match (&self.inner, node) {
            (Inner::Finite { targets, .. }, Node::Idx(i)) => Ok(Node::Idx(targets[*i])),
            (Inner::Continuous { map, .. }, Node::Coords(c)) => {
                let image = map(c);
                if !vecmath::all_finite(&image) {
                    return Err(Error::Divergence { iteration });
                }
                Ok(Node::Coords(image))
            }
            _ => unreachable!("node kind matches problem kind by construction"),
        }
    }

    fn dp_coords(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match &self.inner {
            Inner::Continuous {
                metric,
                ctx,
                metric_scale,
                ..
            } => Ok(ctx.xi(&metric(x, y))? * metric_scale),
            Inner::Finite { .. } => unreachable!("coordinate distance on a finite space"),
        }
    }

    fn dp_nodes(&self, a: &Node, b: &Node) -> Result<f64> {
        match (&self.inner, a, b) {
            (Inner::Finite { reduced, .. }, Node::Idx(i), Node::Idx(j)) => Ok(reduced[*i][*j]),
            (Inner::Continuous { .. }, Node::Coords(x), Node::Coords(y)) => self.dp_coords(x, y),
            _ => unreachable!("node kind matches problem kind by construction"),
        }
    }

    fn sample_nodes(&self, x0: &Point, cfg: &SolveConfig) -> Result<Vec<Node>> {
        match &self.inner {
            Inner::Finite { space, .. } => Ok((0..space.len()).map(Node::Idx).collect()),
            Inner::Continuous { dim, .. } => {
                let (lo, hi) = match &cfg.sample_box {
                    Some((lo, hi)) => {
                        if lo.len() != *dim || hi.len() != *dim {
                            return Err(Error::EstimationFailed(
                                "sampling box dimension mismatch".into(),
                            ));
                        }
                        if lo.iter().zip(hi).any(|(a, b)| a > b) {
                            return Err(Error::EstimationFailed("sampling box has lo > hi".into()));
                        }
                        (lo.clone(), hi.clone())
                    }
                    None => {
                        let Node::Coords(c) = self.resolve(x0)? else {
                            unreachable!()
                        };
                        let lo = c.iter().map(|v| v - 1.0).collect::<Vec<_>>();
                        let hi = c.iter().map(|v| v + 1.0).collect::<Vec<_>>();
                        (lo, hi)
                    }
                };
                // Deterministic endpoint grid plus a seeded random fill; the
                // grid pins extremal pairs (such as box corners), the random
                // points probe the interior.
                let mut points = grid(&lo, &hi, cfg.beta_samples);
                let extra = (points.len() / 4).max(1);
                let mut rng = StdRng::seed_from_u64(cfg.seed);
                for _ in 0..extra {
                    let p: Vec<f64> = (0..*dim).map(|d| rng.random_range(lo[d]..=hi[d])).collect();
                    points.push(p);
                }
                Ok(points.into_iter().map(Node::Coords).collect())
            }
        }
    }

    fn sup_ratio(&self, x0: &Point, cfg: &SolveConfig, mode: SolveMode) -> Result<f64> {
        let nodes = self.sample_nodes(x0, cfg)?;
        let images: Vec<Node> = nodes
            .iter()
            .map(|n| self.apply(n, 0))
            .collect::<Result<_>>()?;
        let displacements: Vec<f64> = nodes
            .iter()
            .zip(&images)
            .map(|(x, tx)| self.dp_nodes(x, tx))
            .collect::<Result<_>>()?;
        let mut sup = f64::NEG_INFINITY;
        let mut admissible = 0usize;
        for i in 0..nodes.len() {
            for j in i..nodes.len() {
                let num = self.dp_nodes(&images[i], &images[j])?;
                let den = match mode {
                    SolveMode::Kannan => displacements[i] + displacements[j],
                    SolveMode::Banach => self.dp_nodes(&nodes[i], &nodes[j])?,
                };
                if den < RATIO_EPS {
                    if num >= RATIO_EPS {
                        return Ok(f64::INFINITY);
                    }
                    continue; // 0/0 at fixed points
                }
                admissible += 1;
                sup = sup.max(num / den);
            }
        }
        if admissible == 0 {
            return Err(Error::EstimationFailed(
                "no admissible sample pairs (all denominators vanish)".into(),
            ));
        }
        Ok(sup)
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_inner(
        &self,
        start: Node,
        cfg: &SolveConfig,
        mode: SolveMode,
        beta_hat: f64,
        r: f64,
        sound: bool,
        certificate: Certificate,
    ) -> Result<SolveReport> {
        let bound_at = |n: usize, d0: f64| -> f64 {
            if sound && r < 1.0 {
                r.powi(n as i32) / (1.0 - r) * d0
            } else {
                f64::INFINITY
            }
        };

        let mut cur = start;
        let mut nxt = self.apply(&cur, 0)?;
        let d0 = self.dp_nodes(&cur, &nxt)?;

        let mut seen_finite: HashMap<usize, usize> = HashMap::new();
        let mut seen_coords: Vec<Vec<f64>> = Vec::new();
        match &cur {
            Node::Idx(i) => {
                seen_finite.insert(*i, 0);
            }
            Node::Coords(c) => seen_coords.push(c.clone()),
        }

        let mut trace: Vec<TraceEntry> = Vec::new();
        let mut near_collapse = false;
        let mut cycle = None;
        let mut n = 0usize;
        let (outcome, fixed) = loop {
            let step = self.dp_nodes(&cur, &nxt)?;
            trace.push(TraceEntry { n, d_step: step });
            let done = if sound {
                bound_at(n, d0) <= cfg.tol && step <= cfg.tol
            } else {
                step <= cfg.tol
            };
            if done {
                // A fixed point is a 1-cycle, so a simultaneous revisit
                // resolves to convergence.
                break (Outcome::Converged, Some(cur.clone()));
            }

            let revisit = match &nxt {
                Node::Idx(i) => seen_finite.get(i).copied(),
                Node::Coords(c) => {
                    let mut hit = None;
                    for (m, prev) in seen_coords.iter().enumerate() {
                        if self.dp_coords(prev, c)? <= CYCLE_EPS {
                            hit = Some(m);
                            break;
                        }
                    }
                    if hit.is_some() {
                        near_collapse = true;
                    }
                    hit
                }
            };
            if let Some(first_seen) = revisit {
                let ahead = self.apply(&nxt, n + 1)?;
                if self.dp_nodes(&nxt, &ahead)? > CYCLE_EPS {
                    cycle = Some(CycleInfo {
                        first_seen,
                        revisit: n + 1,
                    });
                    break (Outcome::CycleDetected, None);
                }
                // Stationary revisit: the orbit sits on a fixed point; keep
                // iterating until the certified bound clears the tolerance.
            } else {
                match &nxt {
                    Node::Idx(i) => {
                        seen_finite.insert(*i, n + 1);
                    }
                    Node::Coords(c) => seen_coords.push(c.clone()),
                }
            }

            if n + 1 >= cfg.max_iter {
                break (Outcome::BudgetExhausted, None);
            }
            let after = self.apply(&nxt, n + 1)?;
            cur = nxt;
            nxt = after;
            n += 1;
        };

        Ok(SolveReport {
            mode,
            outcome,
            fixed_point: fixed.map(|node| self.repr(&node)),
            iterations: trace.len(),
            beta_hat,
            r,
            certified_bound: bound_at(n, d0),
            orbit_trace: trace,
            certificate,
            cycle,
            uniqueness: None,
            near_collapse,
        })
    }

    /// Second-start uniqueness probe: re-solve from the sample point
    /// farthest (in `d_p`) from the found fixed point and compare within
    /// `10 * tol`.
    #[allow(clippy::too_many_arguments)]
    fn probe_uniqueness(
        &self,
        report: &mut SolveReport,
        cfg: &SolveConfig,
        mode: SolveMode,
        beta_hat: f64,
        r: f64,
        sound: bool,
        certificate: Certificate,
    ) {
        if report.outcome != Outcome::Converged {
            return;
        }
        let Some(fp) = report.fixed_point.clone() else {
            return;
        };
        let Ok(fp_node) = self.resolve(&fp) else {
            return;
        };
        let Ok(candidates) = self.sample_nodes(&fp, cfg) else {
            return;
        };
        let mut best: Option<(f64, Node)> = None;
        for c in candidates {
            let Ok(d) = self.dp_nodes(&fp_node, &c) else {
                continue;
            };
            if d > CYCLE_EPS && best.as_ref().is_none_or(|(bd, _)| d > *bd) {
                best = Some((d, c));
            }
        }
        let Some((_, second)) = best else { return };
        let second_start = self.repr(&second);
        let (distance, agrees) =
            match self.solve_inner(second, cfg, mode, beta_hat, r, sound, certificate) {
                Ok(second_report) if second_report.outcome == Outcome::Converged => {
                    let other = second_report
                        .fixed_point
                        .expect("converged run has a fixed point");
                    match self.dp(&fp, &other) {
                        Ok(d) => (d, d <= 10.0 * cfg.tol),
                        Err(_) => (f64::INFINITY, false),
                    }
                }
                _ => (f64::INFINITY, false),
            };
        report.uniqueness = Some(UniquenessCheck {
            second_start,
            distance,
            agrees,
        });
    }
}

fn check_config(cfg: &SolveConfig) -> Result<()> {
    if !cfg.tol.is_finite() || cfg.tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Resolve a label → label map file against a space's label set.
pub fn resolve_targets(
    targets: &BTreeMap<String, String>,
    space: &FiniteConeSpace,
) -> Result<Vec<usize>> {
    space
        .labels()
        .iter()
        .map(|label| {
            let to = targets
                .get(label)
                .ok_or_else(|| Error::InvalidMap(format!("no target for point {label:?}")))?;
            space
                .index_of(to)
                .ok_or_else(|| Error::InvalidMap(format!("unknown target label {to:?}")))
        })
        .collect()
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 || lo == hi {
        return vec![lo];
    }
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Deterministic per-axis grid over a box, sized so that the number of
/// unordered point pairs roughly matches the requested sample count.
fn grid(lo: &[f64], hi: &[f64], pair_target: usize) -> Vec<Vec<f64>> {
    let k = lo.len();
    let target_points = (((2 * pair_target.max(1)) as f64).sqrt().floor() as usize).max(2);
    let mut per_axis = (target_points as f64).powf(1.0 / k as f64).ceil() as usize;
    per_axis = per_axis.max(2);
    while per_axis > 2 && per_axis.pow(k as u32) > GRID_CAP {
        per_axis -= 1;
    }
    let axes: Vec<Vec<f64>> = (0..k).map(|d| linspace(lo[d], hi[d], per_axis)).collect();
    let mut points = vec![Vec::with_capacity(k)];
    for axis in &axes {
        let mut extended = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for v in axis {
                let mut q = p.clone();
                q.push(*v);
                extended.push(q);
            }
        }
        points = extended;
    }
    points
}

/// JSON encoding for possibly non-finite floats: numbers stay numbers,
/// infinities and NaN become the strings `"inf"`, `"-inf"`, `"nan"` so that
/// reports round-trip.
pub(crate) mod float_repr {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(D::Error::custom(format!(
                    "expected a number or inf/nan marker, got {other:?}"
                ))),
            },
        }
    }
}
