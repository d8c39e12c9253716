//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`) and enforcing its runtime
//! budget. Expected values come from independent oracles computed inside
//! the tests: brute-force grid maximization, analytic orbits, and the
//! bracket-and-bisect scalarization oracle.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use conemetric::{
    check_scalar_metric, check_scalar_rectangular, max_tail_gaps, AxiomId, Cone, FiniteConeSpace,
    MapSpec, Outcome, Point, Problem, ScalarizationContext, SolveConfig,
};

fn criterion(name: &str, limit: Duration, body: impl FnOnce() + UnwindSafe) {
    let start = Instant::now();
    let result = catch_unwind(body);
    let elapsed = start.elapsed();
    let verdict = if result.is_ok() && elapsed <= limit {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "acceptance {name}: {verdict} ({:.3}s)",
        elapsed.as_secs_f64()
    );
    if let Err(cause) = result {
        resume_unwind(cause);
    }
    assert!(
        elapsed <= limit,
        "{name} exceeded its runtime budget: {elapsed:?} > {limit:?}"
    );
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn load_fixture_space(name: &str) -> FiniteConeSpace {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture readable");
    serde_json::from_str(&text).expect("fixture parses")
}

fn find(reports: &[conemetric::AxiomReport], id: AxiomId) -> &conemetric::AxiomReport {
    reports
        .iter()
        .find(|r| r.axiom == id)
        .expect("axiom present")
}

// ---------------------------------------------------------------------------
// 1. The four-point fixture is rectangular but not a cone metric space, with
//    the exact failing triple.
// ---------------------------------------------------------------------------
#[test]
fn criterion_1_four_point_fixture() {
    criterion("1 four-point fixture", Duration::from_secs(1), || {
        let space = load_fixture_space("branciari_akbar.json");
        let rcms = space.validate_rcms();
        for id in [AxiomId::Rc1, AxiomId::Rc2, AxiomId::Rc3] {
            assert!(find(&rcms, id).passed(), "{id} must pass");
        }
        let cms = space.validate_cms();
        for id in [AxiomId::M1, AxiomId::M2, AxiomId::M3] {
            assert!(find(&cms, id).passed(), "{id} must pass");
        }
        let m4 = find(&cms, AxiomId::M4);
        assert!(!m4.passed(), "the triangle inequality must fail");
        let witness = &m4.witnesses[0];
        assert_eq!(witness.points, vec!["1", "3", "2"]);
        assert_eq!(witness.lhs, vec![3.0, 6.0]);
        assert_eq!(witness.rhs, vec![2.0, 4.0]);
    });
}

// ---------------------------------------------------------------------------
// 2. Scalarization laws over 1000 seeded samples per cone variant, closed
//    form cross-checked against the bisection oracle.
// ---------------------------------------------------------------------------

/// Four random facets in R^3 around a known interior direction, retried
/// until the constructor accepts the cone. Returns the cone and that
/// direction.
fn random_facet_cone(rng: &mut StdRng) -> (Cone, Vec<f64>) {
    loop {
        let u = {
            let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 0.1 {
                continue;
            }
            raw.iter().map(|v| v / norm).collect::<Vec<f64>>()
        };
        let mut rows = Vec::new();
        for _ in 0..4 {
            let mut row: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 0.1 {
                row = u.clone();
            } else {
                row = row.iter().map(|v| v / norm).collect();
            }
            let along: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum();
            if along < 0.3 {
                // push the facet normal towards u until the margin holds
                let shift = 0.3 - along + 0.1;
                row = row.iter().zip(&u).map(|(a, b)| a + shift * b).collect();
            }
            rows.push(row);
        }
        if let Ok(cone) = Cone::polyhedral(rows) {
            if cone.in_interior(&u).unwrap() {
                return (cone, u);
            }
        }
    }
}

fn scalarization_law_suite(ctx: &ScalarizationContext, rng: &mut StdRng, samples: usize) {
    let slack = 1e-8;
    let cone = ctx.cone();
    let e = ctx.direction().to_vec();
    let dim = cone.dim();
    let shifted =
        |t: f64, y: &[f64]| -> Vec<f64> { e.iter().zip(y).map(|(ei, yi)| t * ei - yi).collect() };
    for _ in 0..samples {
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let v = ctx.xi(&y).unwrap();

        // Level-set characterization: xi(y) <= t iff (t e - y) is a member,
        // xi(y) < t iff it is interior; sampled strictly off the boundary at
        // v ± 10·slack.
        let t_hi = v + 10.0 * slack;
        let t_lo = v - 10.0 * slack;
        assert!(cone.contains(&shifted(t_hi, &y)).unwrap());
        assert!(cone.in_interior(&shifted(t_hi, &y)).unwrap());
        assert!(!cone.contains(&shifted(t_lo, &y)).unwrap());
        assert!(!cone.in_interior(&shifted(t_lo, &y)).unwrap());

        // Positive homogeneity.
        let lam: f64 = rng.random_range(0.01..10.0);
        let scaled: Vec<f64> = y.iter().map(|a| a * lam).collect();
        assert!((ctx.xi(&scaled).unwrap() - lam * v).abs() <= slack);

        // Monotonicity with respect to the cone order.
        let member = cone.sample_member(rng);
        let below: Vec<f64> = y.iter().zip(&member).map(|(a, m)| a - m).collect();
        assert!(ctx.xi(&below).unwrap() <= v + slack);

        // Subadditivity.
        let y2: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let sum: Vec<f64> = y.iter().zip(&y2).map(|(a, b)| a + b).collect();
        assert!(ctx.xi(&sum).unwrap() <= v + ctx.xi(&y2).unwrap() + slack);

        // Closed form against the bisection oracle.
        let oracle = ctx.xi_bisect(&y).unwrap();
        assert!((v - oracle).abs() <= slack.max(slack * v.abs()));

        // Normalization along the scalarization direction.
        let t: f64 = rng.random_range(-100.0..100.0);
        let along: Vec<f64> = e.iter().map(|ei| t * ei).collect();
        assert!((ctx.xi(&along).unwrap() - t).abs() <= slack);
    }
}

#[test]
fn criterion_2_scalarization_laws() {
    criterion("2 scalarization laws", Duration::from_secs(10), || {
        let mut rng = StdRng::seed_from_u64(0xa11_5eed);
        for dim in [2usize, 5] {
            let cone = Cone::orthant(dim).unwrap();
            let e: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
            let ctx = ScalarizationContext::new(cone, e).unwrap();
            scalarization_law_suite(&ctx, &mut rng, 1000);
        }
        let (cone, u) = random_facet_cone(&mut rng);
        let ctx = ScalarizationContext::new(cone, u).unwrap();
        scalarization_law_suite(&ctx, &mut rng, 1000);

        let ctx =
            ScalarizationContext::new(Cone::second_order(3).unwrap(), vec![0.0, 0.0, 1.0]).unwrap();
        scalarization_law_suite(&ctx, &mut rng, 1000);
    });
}

// ---------------------------------------------------------------------------
// 3. Reduction preserves structure: rectangular tables stay rectangular and metric
//    tables stay metric after the scalar reduction.
// ---------------------------------------------------------------------------

/// Symmetric zero-diagonal scalar table with off-diagonal entries in
/// `[lo, hi]`; with `hi <= 2 lo` the table is a metric, with `hi <= 3 lo`
/// it is at least rectangular.
#[allow(clippy::needless_range_loop)]
fn random_scalar_table(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(lo..hi);
            table[i][j] = v;
            table[j][i] = v;
        }
    }
    table
}

fn lift_along_ray(table: &[Vec<f64>], ray: &[f64], cone: Cone) -> FiniteConeSpace {
    let n = table.len();
    let dist: Vec<Vec<Vec<f64>>> = table
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| ray.iter().map(|r| r * v).collect())
                .collect()
        })
        .collect();
    let labels = (0..n).map(|i| i.to_string()).collect();
    FiniteConeSpace::new(labels, cone, dist).unwrap()
}

#[test]
fn criterion_3_reduction_preserves_axioms() {
    criterion(
        "3 reduction preserves axioms",
        Duration::from_secs(30),
        || {
            let mut rng = StdRng::seed_from_u64(0x3_1f7);
            let mut saw_non_metric = false;
            for case in 0..100 {
                let n = 5 + case % 4;
                let dim = 2 + case % 2;
                let ray: Vec<f64> = (0..dim).map(|_| rng.random_range(0.3..2.0)).collect();
                let e: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
                let cone = Cone::orthant(dim).unwrap();

                // Rectangular (possibly non-metric) batch: entries in [1, 3].
                let table = random_scalar_table(&mut rng, n, 1.0, 3.0);
                let space = lift_along_ray(&table, &ray, cone.clone());
                assert!(space.validate_rcms().iter().all(|r| r.passed()));
                if !space.validate_cms().iter().all(|r| r.passed()) {
                    saw_non_metric = true;
                }
                let ctx = ScalarizationContext::new(cone.clone(), e.clone()).unwrap();
                let reduced = space.reduce(&ctx).unwrap();
                assert!(
                    check_scalar_rectangular(&reduced, 1e-9)
                        .iter()
                        .all(|r| r.passed()),
                    "reduced table must satisfy the scalar rectangular axioms"
                );

                // Genuine metric batch: entries in [1, 2].
                let table = random_scalar_table(&mut rng, n, 1.0, 2.0);
                let space = lift_along_ray(&table, &ray, cone.clone());
                assert!(space.validate_cms().iter().all(|r| r.passed()));
                let reduced = space.reduce(&ctx).unwrap();
                assert!(
                    check_scalar_metric(&reduced, 1e-9)
                        .iter()
                        .all(|r| r.passed()),
                    "reduced table must satisfy the scalar metric axioms"
                );
            }
            assert!(
                saw_non_metric,
                "the rectangular batch should contain genuinely non-metric tables"
            );
        },
    );
}

// ---------------------------------------------------------------------------
// 4. Certificate domination along the x/5 orbit, with the rate derived by
//    brute force.
// ---------------------------------------------------------------------------

fn fifth_problem() -> Problem<'static> {
    Problem::affine_default(vec![vec![0.2]], vec![0.0]).unwrap()
}

fn unit_box_cfg() -> SolveConfig {
    SolveConfig {
        sample_box: Some((vec![0.0], vec![1.0])),
        ..SolveConfig::default()
    }
}

#[test]
fn criterion_4_kannan_certificate_domination() {
    criterion(
        "4 kannan certificate domination",
        Duration::from_secs(10),
        || {
            let problem = fifth_problem();
            let cfg = unit_box_cfg();
            let x0 = Point::Coords(vec![1.0]);

            // Oracle: brute-force ratio maximization over a 200-point grid.
            let grid: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
            let mut beta_oracle = f64::NEG_INFINITY;
            for (i, &x) in grid.iter().enumerate() {
                for &y in &grid[i..] {
                    let num = (x / 5.0 - y / 5.0).abs();
                    let den = (x - x / 5.0).abs() + (y - y / 5.0).abs();
                    if den < 1e-14 {
                        continue;
                    }
                    beta_oracle = beta_oracle.max(num / den);
                }
            }
            assert!((beta_oracle - 0.25).abs() <= 1e-12);
            let beta = problem.estimate_beta(&x0, &cfg).unwrap();
            assert!((beta - beta_oracle).abs() <= 1e-12);
            let r = 1.0 / 3.0;

            let report = problem.kannan_solve(&x0, &cfg).unwrap();
            assert_eq!(report.outcome, Outcome::Converged);
            assert!((report.r - r).abs() <= 1e-12);
            assert!(report.iterations <= 40);
            let fp = report.fixed_point.as_ref().unwrap();
            match fp {
                Point::Coords(c) => assert!(c[0].abs() <= 1e-9),
                other => panic!("unexpected fixed point {other:?}"),
            }
            // Residual of the certified fixed point.
            let image = problem.apply_map(fp).unwrap();
            assert!(problem.dp(fp, &image).unwrap() <= 2.0 * cfg.tol);

            // Step domination: d(x_n, x_{n+1}) <= r^n d0 (1 + 1e-9); the orbit
            // itself decays like 5^{-n}, the analytic oracle.
            let d0 = report.orbit_trace[0].d_step;
            for entry in &report.orbit_trace {
                let analytic = 0.8 * 0.2_f64.powi(entry.n as i32);
                assert!((entry.d_step - analytic).abs() <= 1e-9 * (1.0 + analytic));
                assert!(entry.d_step <= r.powi(entry.n as i32) * d0 * (1.0 + 1e-9));
            }

            // Tail-gap domination: rebuild the orbit and bound every gap by
            // r^n / (1 - r) * d0.
            let mut points = vec![x0.clone()];
            for _ in 0..report.iterations {
                let next = problem.apply_map(points.last().unwrap()).unwrap();
                points.push(next);
            }
            let gaps = max_tail_gaps(&points, |a, b| problem.dp(a, b).unwrap());
            for (n, gap) in gaps.iter().enumerate() {
                let bound = r.powi(n as i32) / (1.0 - r) * d0 * (1.0 + 1e-9);
                assert!(*gap <= bound, "tail gap {gap} at {n} exceeds {bound}");
            }
        },
    );
}

// ---------------------------------------------------------------------------
// 5. Cycle semantics: a genuine swap cycle is reported and the exhaustive
//    rate estimate certifies the Kannan bound cannot have held.
// ---------------------------------------------------------------------------
#[test]
fn criterion_5_cycle_semantics() {
    criterion("5 cycle semantics", Duration::from_secs(5), || {
        let space = load_fixture_space("two_point.json");
        let ctx = ScalarizationContext::new(space.cone().clone(), vec![1.0, 1.0]).unwrap();
        let map_text = std::fs::read_to_string(fixture("swap_map.json")).unwrap();
        let map: MapSpec = serde_json::from_str(&map_text).unwrap();
        let problem = Problem::finite(&space, &ctx, &map).unwrap();
        let cfg = SolveConfig {
            allow_unsound: true,
            ..SolveConfig::default()
        };
        let x0 = Point::Label("1".into());

        // Exhaustive pair enumeration as the oracle for beta.
        let reduced = problem.reduced_table().unwrap();
        let targets = [1usize, 0];
        let mut beta_oracle = f64::NEG_INFINITY;
        for i in 0..2 {
            for j in i..2 {
                let num = reduced[targets[i]][targets[j]];
                let den = reduced[i][targets[i]] + reduced[j][targets[j]];
                if den < 1e-14 {
                    assert!(num < 1e-14, "sentinel case not expected here");
                    continue;
                }
                beta_oracle = beta_oracle.max(num / den);
            }
        }
        assert_eq!(beta_oracle, 0.5);

        let beta = problem.estimate_beta(&x0, &cfg).unwrap();
        assert!(beta >= 0.5, "a cycling map cannot satisfy the Kannan bound");
        assert_eq!(beta, beta_oracle);

        let report = problem.kannan_solve(&x0, &cfg).unwrap();
        assert_eq!(report.outcome, Outcome::CycleDetected);
        let cycle = report.cycle.unwrap();
        assert_eq!((cycle.first_seen, cycle.revisit), (0, 2));
    });
}

// ---------------------------------------------------------------------------
// 6. Uniqueness: converged solves agree across starts within 10·tol.
// ---------------------------------------------------------------------------
#[test]
fn criterion_6_uniqueness() {
    criterion(
        "6 uniqueness across starts",
        Duration::from_secs(10),
        || {
            let problem = fifth_problem();
            let cfg = unit_box_cfg();
            let first = problem
                .kannan_solve(&Point::Coords(vec![1.0]), &cfg)
                .unwrap();
            assert_eq!(first.outcome, Outcome::Converged);
            let probe = first
                .uniqueness
                .as_ref()
                .expect("converged solve probes uniqueness");
            assert!(probe.agrees && probe.distance <= 10.0 * cfg.tol);

            let second = problem
                .kannan_solve(&Point::Coords(vec![0.37]), &cfg)
                .unwrap();
            assert_eq!(second.outcome, Outcome::Converged);
            let d = problem
                .dp(
                    first.fixed_point.as_ref().unwrap(),
                    second.fixed_point.as_ref().unwrap(),
                )
                .unwrap();
            assert!(d <= 10.0 * cfg.tol);
        },
    );
}

// ---------------------------------------------------------------------------
// 7. Scale invariance: multiplying every distance and the tolerance by
//    lambda changes neither verdicts nor iteration counts.
// ---------------------------------------------------------------------------
#[test]
fn criterion_7_scale_invariance() {
    criterion("7 scale invariance", Duration::from_secs(10), || {
        // Continuous problem via the metric scale.
        let reference = fifth_problem()
            .kannan_solve(&Point::Coords(vec![1.0]), &unit_box_cfg())
            .unwrap();
        for lam in [0.1, 10.0] {
            let problem = fifth_problem().with_metric_scale(lam).unwrap();
            let cfg = SolveConfig {
                tol: 1e-10 * lam,
                ..unit_box_cfg()
            };
            let report = problem
                .kannan_solve(&Point::Coords(vec![1.0]), &cfg)
                .unwrap();
            assert_eq!(report.outcome, reference.outcome);
            assert_eq!(report.iterations, reference.iterations);
            assert!((report.beta_hat - reference.beta_hat).abs() <= 1e-12);
        }

        // Finite space via the distance table, constant map.
        let space = load_fixture_space("branciari_akbar.json");
        let map_text = std::fs::read_to_string(fixture("constant_map.json")).unwrap();
        let map: MapSpec = serde_json::from_str(&map_text).unwrap();
        let ctx = ScalarizationContext::new(space.cone().clone(), vec![1.0, 1.0]).unwrap();
        let problem = Problem::finite(&space, &ctx, &map).unwrap();
        let reference = problem
            .kannan_solve(&Point::Label("1".into()), &SolveConfig::default())
            .unwrap();
        assert_eq!(reference.outcome, Outcome::Converged);
        for lam in [0.1, 10.0] {
            let scaled_space = space.scaled(lam).unwrap();
            let problem = Problem::finite(&scaled_space, &ctx, &map).unwrap();
            let cfg = SolveConfig {
                tol: 1e-10 * lam,
                ..SolveConfig::default()
            };
            let report = problem
                .kannan_solve(&Point::Label("1".into()), &cfg)
                .unwrap();
            assert_eq!(report.outcome, reference.outcome);
            assert_eq!(report.iterations, reference.iterations);
        }

        // Cycle verdicts scale too.
        let two = load_fixture_space("two_point.json");
        let swap_text = std::fs::read_to_string(fixture("swap_map.json")).unwrap();
        let swap: MapSpec = serde_json::from_str(&swap_text).unwrap();
        let ctx2 = ScalarizationContext::new(two.cone().clone(), vec![1.0, 1.0]).unwrap();
        let cfg = SolveConfig {
            allow_unsound: true,
            ..SolveConfig::default()
        };
        let reference = Problem::finite(&two, &ctx2, &swap)
            .unwrap()
            .kannan_solve(&Point::Label("1".into()), &cfg)
            .unwrap();
        assert_eq!(reference.outcome, Outcome::CycleDetected);
        for lam in [0.1, 10.0] {
            let scaled = two.scaled(lam).unwrap();
            let report = Problem::finite(&scaled, &ctx2, &swap)
                .unwrap()
                .kannan_solve(
                    &Point::Label("1".into()),
                    &SolveConfig {
                        tol: 1e-10 * lam,
                        ..cfg.clone()
                    },
                )
                .unwrap();
            assert_eq!(report.outcome, reference.outcome);
            assert_eq!(report.iterations, reference.iterations);
        }
    });
}
