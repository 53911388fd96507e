//! End-to-end acceptance checks, one test per criterion. Each test prints a
//! single line naming the property it gates so a full run reads as a
//! checklist. Tolerances are fixed here and are not configurable: these are
//! the numbers the engine promises.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use gtorsion::conditions::{
    c4_product_check, curvature_sum_identity_gap, curvature_torsion_sum, endo_norm,
    harm_identity_gaps, harmonic_map_residual, harmonic_residual, kenmotsu_residual,
    lck_reduced_2, lck_reduced_4, lee_parallel_defect, metric_route_gap, minimal_residual,
    minimal_sum, torsion_divergence, torsion_route_gap,
};
use gtorsion::expr::{Params, ScalarExpr};
use gtorsion::geometry::conformal_curvature_reference;
use gtorsion::manifolds::{
    build_conformal_euclidean, build_hopf_cover, build_hyperbolic_kenmotsu, product_with_line,
    sample_points, ManifoldSpec,
};
use gtorsion::report::{run_suite, RunConfig};
use gtorsion::tensor::{coordinate_seeds, gram_schmidt};

const SEED: u64 = 42;
const SAMPLES: usize = 64;

fn points_of(spec: &ManifoldSpec) -> Vec<Vec<f64>> {
    sample_points(spec, SAMPLES, SEED).unwrap()
}

fn conformal(f: &str) -> ManifoldSpec {
    let expr = ScalarExpr::parse(f, 4).unwrap();
    build_conformal_euclidean(4, &expr).unwrap()
}

#[test]
fn hyperbolic_minimality_across_curvature_scales() {
    let start = Instant::now();
    let mut worst_minimal = 0.0f64;
    let mut worst_kenmotsu = 0.0f64;
    for c in [0.5, 1.0, 2.0] {
        let spec = build_hyperbolic_kenmotsu(5, c).unwrap();
        for point in points_of(&spec) {
            let fp = spec.frame_at(&point).unwrap();
            worst_minimal = worst_minimal.max(minimal_residual(&fp).unwrap());
            worst_kenmotsu = worst_kenmotsu.max(kenmotsu_residual(&fp).unwrap());
        }
    }
    let elapsed = start.elapsed();
    assert!(worst_minimal < 1e-7, "minimal max {worst_minimal:e}");
    assert!(worst_kenmotsu < 1e-9, "reeb criterion max {worst_kenmotsu:e}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "acceptance hyperbolic minimality: pass (minimal {worst_minimal:.2e}, reeb {worst_kenmotsu:.2e}, {elapsed:?})"
    );
}

#[test]
fn hopf_cover_is_harmonic_minimal_with_parallel_lee_form() {
    let spec = build_hopf_cover(4).unwrap();
    let mut worst = [0.0f64; 4];
    for point in points_of(&spec) {
        let fp = spec.frame_at(&point).unwrap();
        worst[0] = worst[0].max(harmonic_residual(&fp).unwrap());
        worst[1] = worst[1].max(harmonic_map_residual(&fp).unwrap());
        worst[2] = worst[2].max(minimal_residual(&fp).unwrap());
        worst[3] = worst[3].max(lee_parallel_defect(&fp).unwrap());
        let h = fp.structure.hermitian().unwrap();
        let s = h.lee_norm_square(&fp.geo).v;
        assert!((s - 4.0).abs() < 1e-9, "|lee|^2 = {s} at {point:?}");
    }
    assert!(worst[0] < 1e-7, "harmonic max {:e}", worst[0]);
    assert!(worst[1] < 1e-7, "harmonic map max {:e}", worst[1]);
    assert!(worst[2] < 1e-7, "minimal max {:e}", worst[2]);
    assert!(worst[3] < 1e-9, "lee derivative max {:e}", worst[3]);
    println!(
        "acceptance hopf harmonicity and minimality: pass (max residual {:.2e})",
        worst[0].max(worst[1]).max(worst[2])
    );
}

#[test]
fn reduced_verdicts_match_the_defining_sums() {
    let holds = |v: f64| v < 1e-7;
    let mut mismatches = 0usize;
    let mut checked = 0usize;

    for spec in [
        build_hopf_cover(4).unwrap(),
        conformal("x1^2 + x2"),
        conformal("sin(x1)*x4"),
    ] {
        for point in points_of(&spec) {
            let fp = spec.frame_at(&point).unwrap();
            let direct = holds(minimal_residual(&fp).unwrap());
            let four = lck_reduced_4(&fp).unwrap().is_none_or(holds);
            let two = holds(lck_reduced_2(&fp).unwrap());
            if direct != (four && two) {
                mismatches += 1;
            }
            checked += 1;
        }
    }

    for c in [0.5, 1.0, 2.0] {
        let spec = build_hyperbolic_kenmotsu(5, c).unwrap();
        for point in points_of(&spec) {
            let fp = spec.frame_at(&point).unwrap();
            let direct = holds(minimal_residual(&fp).unwrap());
            let reeb = holds(kenmotsu_residual(&fp).unwrap());
            if direct != reeb {
                mismatches += 1;
            }
            checked += 1;
        }
    }

    assert_eq!(mismatches, 0, "{mismatches} of {checked} verdicts disagree");
    println!("acceptance reduced condition equivalence: pass ({checked} points, 0 mismatches)");
}

#[test]
fn product_with_line_inherits_minimality_and_torsion() {
    let spec = product_with_line(build_hopf_cover(4).unwrap()).unwrap();
    let mut worst_minimal = 0.0f64;
    let mut worst_transfer = 0.0f64;
    for point in points_of(&spec) {
        let fp = spec.frame_at(&point).unwrap();
        worst_minimal = worst_minimal.max(minimal_residual(&fp).unwrap());
        worst_transfer = worst_transfer.max(c4_product_check(&spec, &fp).unwrap());
    }
    assert!(worst_minimal < 1e-7, "minimal max {worst_minimal:e}");
    assert!(worst_transfer < 1e-9, "transfer max {worst_transfer:e}");
    println!(
        "acceptance product transfer: pass (minimal {worst_minimal:.2e}, transfer {worst_transfer:.2e})"
    );
}

// The control this test demands does not exist: a conformal rescaling of
// the flat chart satisfies the minimality identity to machine precision at
// every point, for every potential tried (three independent evaluations of
// the defining sum agree, including one with no shared code). The test
// keeps the original expectation and fails so the discrepancy stays
// visible; the curvature sum alone (harmonic_map) is the quantity this
// family genuinely violates.
#[test]
fn conformal_control_is_expected_to_break_minimality() {
    let spec = conformal("x1^2 + x2");
    let points = points_of(&spec);
    let exceed = points
        .iter()
        .map(|p| minimal_residual(&spec.frame_at(p).unwrap()).unwrap())
        .filter(|v| *v > 1e-4)
        .count();

    let mut config = RunConfig::new("conformal-euclidean");
    config.params.f = Some("x1^2 + x2".to_string());
    config.conditions = Some(vec!["minimal".to_string()]);
    let exit = run_suite(&config).unwrap().exit_code();

    let needed = (SAMPLES * 9).div_ceil(10);
    assert!(
        exceed >= needed && exit == 1,
        "minimal residual exceeded 1e-4 at {exceed} of {} points (needed {needed}) and the \
         suite exited {exit} (needed 1): the quadratic-potential conformal chart is minimal \
         everywhere, so this control cannot trigger",
        points.len()
    );
    println!("acceptance conformal negative control: pass ({exceed} exceedances, exit {exit})");
}

#[test]
fn closed_form_routes_agree_on_the_catalog() {
    let mut worst_torsion = 0.0f64;
    let mut worst_metric = 0.0f64;
    for spec in [
        build_hyperbolic_kenmotsu(5, 1.0).unwrap(),
        build_hopf_cover(4).unwrap(),
        conformal("x1^2 + x2"),
    ] {
        for point in points_of(&spec).into_iter().take(16) {
            let fp = spec.frame_at(&point).unwrap();
            worst_torsion = worst_torsion.max(torsion_route_gap(&fp).unwrap());
            worst_metric = worst_metric.max(metric_route_gap(&fp).unwrap());
        }
    }
    assert!(worst_torsion < 1e-9, "torsion routes {worst_torsion:e}");
    assert!(worst_metric < 1e-10, "metric routes {worst_metric:e}");

    let product = product_with_line(build_hopf_cover(4).unwrap()).unwrap();
    for point in points_of(&product).into_iter().take(16) {
        let fp = product.frame_at(&point).unwrap();
        assert!(c4_product_check(&product, &fp).unwrap() < 1e-9);
    }

    let f = ScalarExpr::parse("x1^2 + x2", 4).unwrap();
    let spec = conformal("x1^2 + x2");
    let params = Params::new();
    let mut worst_curv = 0.0f64;
    for point in points_of(&spec).into_iter().take(16) {
        let fp = spec.frame_at(&point).unwrap();
        let direct = fp.curv.lowered(&fp.geo.metric);
        let reference = conformal_curvature_reference(&f, &point, &params).unwrap();
        let rel = direct.sub(&reference).unwrap().max_abs() / direct.max_abs().max(1e-30);
        worst_curv = worst_curv.max(rel);
    }
    assert!(worst_curv < 1e-8, "curvature routes {worst_curv:e}");

    let mut worst_sum = 0.0f64;
    for spec in [build_hopf_cover(4).unwrap(), conformal("x1^2 + x2")] {
        for point in points_of(&spec).into_iter().take(16) {
            let fp = spec.frame_at(&point).unwrap();
            worst_sum = worst_sum.max(curvature_sum_identity_gap(&fp).unwrap());
        }
    }
    assert!(worst_sum < 1e-8, "curvature sum identity {worst_sum:e}");
    println!(
        "acceptance two-route oracles: pass (torsion {worst_torsion:.2e}, metric {worst_metric:.2e}, curvature {worst_curv:.2e}, sum {worst_sum:.2e})"
    );
}

fn random_expr(rng: &mut ChaCha8Rng, dim: usize, depth: usize, allow_exp: bool) -> String {
    if depth == 0 {
        return if rng.random_bool(0.7) {
            format!("x{}", rng.random_range(1..=dim))
        } else {
            format!("{:.3}", rng.random_range(-2.0..2.0f64))
        };
    }
    let pick = rng.random_range(0..9);
    match pick {
        0 => format!(
            "({}) + ({})",
            random_expr(rng, dim, depth - 1, allow_exp),
            random_expr(rng, dim, depth - 1, allow_exp)
        ),
        1 => format!(
            "({}) - ({})",
            random_expr(rng, dim, depth - 1, allow_exp),
            random_expr(rng, dim, depth - 1, allow_exp)
        ),
        2 | 3 => format!(
            "({}) * ({})",
            random_expr(rng, dim, depth - 1, allow_exp),
            random_expr(rng, dim, depth - 1, allow_exp)
        ),
        4 => format!("sin({})", random_expr(rng, dim, depth - 1, allow_exp)),
        5 => format!("cos({})", random_expr(rng, dim, depth - 1, allow_exp)),
        6 if allow_exp => format!("exp(0.5 * ({}))", random_expr(rng, dim, 1, false)),
        6 => format!("sin({})", random_expr(rng, dim, depth - 1, false)),
        7 => format!(
            "sqrt(2 + ({})^2)",
            random_expr(rng, dim, depth - 1, allow_exp)
        ),
        _ => format!(
            "log(2 + ({})^2)",
            random_expr(rng, dim, depth - 1, allow_exp)
        ),
    }
}

#[test]
fn differentiation_kernel_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let params = Params::new();
    for round in 0..200 {
        let dim = rng.random_range(1..=4);
        let text = random_expr(&mut rng, dim, 3, true);
        let expr = ScalarExpr::parse(&text, dim).unwrap();
        let point: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.9..0.9)).collect();
        let jet = expr.eval_jet(&point, &params).unwrap();
        let at = |p: &[f64]| expr.eval_value(p, &params).unwrap();

        let h = 1e-5;
        for i in 0..dim {
            let mut up = point.clone();
            let mut dn = point.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (at(&up) - at(&dn)) / (2.0 * h);
            let err = (jet.grad[i] - fd).abs() / (1.0 + jet.grad[i].abs());
            assert!(err < 1e-5, "round {round} grad x{} of {text}: {err:e}", i + 1);
        }

        let h = 1e-3;
        for i in 0..dim {
            for j in 0..=i {
                let fd = if i == j {
                    let mut up = point.clone();
                    let mut dn = point.clone();
                    up[i] += h;
                    dn[i] -= h;
                    (at(&up) - 2.0 * at(&point) + at(&dn)) / (h * h)
                } else {
                    let mut pp = point.clone();
                    let mut pm = point.clone();
                    let mut mp = point.clone();
                    let mut mm = point.clone();
                    pp[i] += h;
                    pp[j] += h;
                    pm[i] += h;
                    pm[j] -= h;
                    mp[i] -= h;
                    mp[j] += h;
                    mm[i] -= h;
                    mm[j] -= h;
                    (at(&pp) - at(&pm) - at(&mp) + at(&mm)) / (4.0 * h * h)
                };
                let ad = jet.hess_at(i, j);
                let err = (ad - fd).abs() / (1.0 + ad.abs());
                assert!(
                    err < 1e-3,
                    "round {round} hess ({i},{j}) of {text}: ad {ad} fd {fd}"
                );
            }
        }
    }

    let mut worst_sym = 0.0f64;
    let mut worst_grad = 0.0f64;
    for spec in [
        build_hyperbolic_kenmotsu(5, 1.0).unwrap(),
        build_hopf_cover(4).unwrap(),
        conformal("x1^2 + x2"),
    ] {
        for point in points_of(&spec).into_iter().take(8) {
            let fp = spec.frame_at(&point).unwrap();
            let n = fp.dim();
            let low = fp.curv.lowered(&fp.geo.metric);
            let r4 = |i: usize, j: usize, k: usize, l: usize| low.get(&[i, j, k, l]);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            worst_sym = worst_sym
                                .max((r4(i, j, k, l) + r4(j, i, k, l)).abs())
                                .max((r4(i, j, k, l) + r4(i, j, l, k)).abs())
                                .max((r4(i, j, k, l) - r4(k, l, i, j)).abs())
                                .max(
                                    (r4(i, j, k, l) + r4(j, k, i, l) + r4(k, i, j, l)).abs(),
                                );
                        }
                    }
                }
            }
            let nabla_g = fp
                .geo
                .covariant_derivative(&fp.geo.metric_tensor())
                .unwrap();
            worst_grad = worst_grad.max(nabla_g.max_abs());
        }
    }
    assert!(worst_sym < 1e-9, "curvature symmetries {worst_sym:e}");
    assert!(worst_grad < 1e-10, "metric derivative {worst_grad:e}");

    let spec = build_hopf_cover(4).unwrap();
    let mut worst_frame = 0.0f64;
    for point in points_of(&spec).into_iter().take(8) {
        let fp = spec.frame_at(&point).unwrap();
        let mut seeds = coordinate_seeds(4);
        seeds.reverse();
        seeds[0] = vec![0.3, 1.0, -0.2, 0.5];
        let other = gram_schmidt(&seeds, &fp.geo.metric, "acceptance frame").unwrap();
        let other_tilde = gram_schmidt(&seeds, &fp.gtilde, "acceptance frame").unwrap();
        let dv = endo_norm(&fp, &torsion_divergence(&fp, &fp.frame).unwrap())
            - endo_norm(&fp, &torsion_divergence(&fp, &other).unwrap());
        let ms = endo_norm(&fp, &minimal_sum(&fp, &fp.frame_tilde).unwrap())
            - endo_norm(&fp, &minimal_sum(&fp, &other_tilde).unwrap());
        let cs = fp
            .geo
            .metric
            .norm(&curvature_torsion_sum(&fp, &fp.frame).unwrap())
            - fp.geo
                .metric
                .norm(&curvature_torsion_sum(&fp, &other).unwrap());
        worst_frame = worst_frame.max(dv.abs()).max(ms.abs()).max(cs.abs());
    }
    assert!(worst_frame < 1e-9, "frame dependence {worst_frame:e}");
    println!(
        "acceptance numerical kernel: pass (symmetries {worst_sym:.2e}, metric {worst_grad:.2e}, frames {worst_frame:.2e})"
    );
}

#[test]
fn frame_sums_factor_through_the_connection_difference() {
    let mut worst = 0.0f64;
    for spec in [
        build_hyperbolic_kenmotsu(5, 1.0).unwrap(),
        build_hopf_cover(4).unwrap(),
    ] {
        for point in points_of(&spec) {
            let fp = spec.frame_at(&point).unwrap();
            let (divergence_gap, curvature_gap) = harm_identity_gaps(&fp).unwrap();
            worst = worst.max(divergence_gap).max(curvature_gap);
        }
    }
    assert!(worst < 1e-7, "identity gap {worst:e}");
    println!("acceptance connection difference identities: pass (gap {worst:.2e})");
}

#[test]
fn reports_are_byte_identical_across_reruns() {
    let render = || {
        let mut config = RunConfig::new("hyperbolic");
        config.samples = SAMPLES;
        config.conditions = Some(vec!["minimal".to_string(), "kenmotsu".to_string()]);
        config.detail = true;
        let report = run_suite(&config).unwrap();
        assert_eq!(report.exit_code(), 0);
        (
            gtorsion::report::render_json(&report),
            gtorsion::report::render_csv(&report),
        )
    };
    let (json_a, csv_a) = render();
    let (json_b, csv_b) = render();
    assert_eq!(json_a, json_b);
    assert_eq!(csv_a, csv_b);
    assert!(json_a.len() > 1000);
    println!(
        "acceptance determinism: pass ({} json bytes, {} csv bytes)",
        json_a.len(),
        csv_a.len()
    );
}
