#![allow(clippy::needless_range_loop)]

use medoid_lp::certificates::{
    check_all, check_democratic_certificate, check_dual_certificate, check_max_u_certificate, CertificateKind,
    CertificateReport,
};
use medoid_lp::kmedoids::{
    brute_force_kmed, build_linkmed, solve_linkmed, solve_linkmed_with, Clustering, Strategy as Rows,
};
use medoid_lp::lp::{export_lp_text, parse_lp_text, residuals, solve_lp, LinearProgram, Relation, Sense, Status};
use medoid_lp::model::{DissimilarityMatrix, Metric};
use proptest::prelude::*;

fn plane_points(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2), 3..=max)
}

fn instance(max: usize) -> impl Strategy<Value = (DissimilarityMatrix, usize)> {
    (plane_points(max), 1..=3usize).prop_map(|(pts, k)| {
        let k = k.min(pts.len());
        (
            DissimilarityMatrix::from_points(&pts, Metric::SquaredEuclidean).unwrap(),
            k,
        )
    })
}

/// Independent evaluation of a witness: the smallest of the column slacks
/// `u - sum_i max(lambda_i - p_ij, 0)` over non-medoids `j` and the gap slacks
/// `second_i - lambda_i`.
fn oracle_margin(w: &DissimilarityMatrix, c: &Clustering, u: f64, lambda: &[f64]) -> f64 {
    let n = w.n();
    let p = |i: usize, j: usize| w.get(i, j) - w.get(i, c.medoid_of(i));
    let mut m = f64::INFINITY;
    for j in (0..n).filter(|&j| !c.is_medoid(j)) {
        let mut total = 0.0;
        for (i, &l) in lambda.iter().enumerate() {
            let t = l - p(i, j);
            if t > 0.0 {
                total += t;
            }
        }
        m = m.min(u - total);
    }
    for (i, &l) in lambda.iter().enumerate() {
        let gap = c.second_cost(w, i) - w.get(i, c.medoid_of(i));
        m = m.min(gap - l);
    }
    m
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_infinite() && a == b) || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn relaxation_never_exceeds_integer_optimum((w, k) in instance(10)) {
        let rr = solve_linkmed(&w, k).unwrap();
        let ex = brute_force_kmed(&w, k).unwrap();
        prop_assert!(rr.objective <= ex.best_objective + 1e-7);
        if rr.integral {
            prop_assert!(close(rr.objective, ex.best_objective, 1e-7));
            let c = rr.clustering.as_ref().unwrap();
            prop_assert!(ex.optimal_medoid_sets.iter().any(|s| s == c.medoids()));
        }
    }

    #[test]
    fn extracted_assignment_is_nearest((w, k) in instance(10)) {
        let rr = solve_linkmed(&w, k).unwrap();
        if let Some(c) = rr.clustering.as_ref() {
            for i in 0..w.n() {
                let mine = w.get(i, c.medoid_of(i));
                for &m in c.medoids() {
                    let other = w.get(i, m);
                    prop_assert!(mine < other || (mine == other && c.medoid_of(i) <= m));
                }
            }
        }
    }

    #[test]
    fn lazy_rows_reach_the_full_optimum((w, k) in instance(9)) {
        let lazy = solve_linkmed_with(&w, k, Rows::Lazy).unwrap();
        let full = solve_linkmed_with(&w, k, Rows::Full).unwrap();
        prop_assert!(close(lazy.objective, full.objective, 1e-8));
        prop_assert!(lazy.coupling_rows <= full.coupling_rows);
    }

    #[test]
    fn points_on_a_line_give_integral_vertices(
        xs in prop::collection::vec(0.0..10.0f64, 4..=16),
        k in 1..=4usize,
    ) {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let w = DissimilarityMatrix::from_points(&pts, Metric::Euclidean).unwrap();
        prop_assert!(solve_linkmed(&w, k).unwrap().integral);
    }

    #[test]
    fn witnesses_match_the_positive_part_oracle((w, k) in instance(10)) {
        let c = brute_force_kmed(&w, k).unwrap().clustering(&w).unwrap();
        for rep in [check_dual_certificate(&w, &c).unwrap(), check_democratic_certificate(&w, &c).unwrap()] {
            if let Some(wit) = rep.witness.as_ref() {
                let m = oracle_margin(&w, &c, wit.u, &wit.lambda);
                prop_assert!(close(m, rep.margin, 1e-9), "{:?}: {} vs {}", rep.kind, m, rep.margin);
            }
        }
        if k >= 2 {
            let rep = check_max_u_certificate(&w, &c).unwrap();
            if let Some(wit) = rep.witness.as_ref() {
                let n = w.n();
                let p = |i: usize, j: usize| w.get(i, j) - w.get(i, c.medoid_of(i));
                let sizes = c.sizes();
                let mut m = f64::INFINITY;
                for i in 0..n {
                    let gap = c.second_cost(&w, i) - w.get(i, c.medoid_of(i));
                    m = m.min(sizes[i] as f64 * gap - wit.u);
                }
                for j in (0..n).filter(|&j| !c.is_medoid(j)) {
                    let mut s = 0.0;
                    for i in 0..n {
                        if c.medoid_of(i) == c.medoid_of(j) {
                            s += p(i, j);
                        } else if wit.lambda[i] > p(i, j) {
                            s -= wit.lambda[i] - p(i, j);
                        }
                    }
                    m = m.min(s);
                }
                prop_assert!(close(m, rep.margin, 1e-9));
            }
        }
    }

    #[test]
    fn democratic_check_finds_any_positive_u((w, k) in instance(9)) {
        let c = brute_force_kmed(&w, k).unwrap().clustering(&w).unwrap();
        let rep = check_democratic_certificate(&w, &c).unwrap();
        let sizes = c.sizes();
        let top = (0..w.n()).map(|i| w.row(i).iter().cloned().fold(0.0, f64::max)).fold(0.0, f64::max) * w.n() as f64;
        for step in 0..=400 {
            let u = top * step as f64 / 400.0;
            let lambda: Vec<f64> = sizes.iter().map(|&s| u / s as f64).collect();
            if oracle_margin(&w, &c, u, &lambda) > 1e-6 {
                prop_assert!(rep.holds, "u = {} certifies but the check failed (margin {})", u, rep.margin);
                prop_assert!(rep.margin + 1e-9 >= 0.0);
            }
        }
    }

    #[test]
    fn certificates_scale_with_the_weights((w, k) in instance(9), scale in 0.1..10.0f64) {
        let c = brute_force_kmed(&w, k).unwrap().clustering(&w).unwrap();
        let base = check_all(&w, &c).unwrap();
        prop_assume!(base.iter().all(|r| !r.margin.is_finite() || r.margin.abs() > 1e-6));
        let scaled = check_all(&w.scaled(scale), &c).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert_eq!(a.holds, b.holds, "{:?}", a.kind);
            prop_assert!(close(a.margin * scale, b.margin, 1e-6), "{:?}: {} vs {}", a.kind, a.margin * scale, b.margin);
            // Both maximizers can sit on a plateau; only the margin is canonical.
            if !matches!(a.kind, CertificateKind::Prop1 | CertificateKind::Cor2) {
                check_scaled_witness(a, b, scale)?;
            }
        }
    }

    #[test]
    fn implication_chain((w, k) in instance(10)) {
        let ex = brute_force_kmed(&w, k).unwrap();
        let c = ex.clustering(&w).unwrap();
        let r = check_all(&w, &c).unwrap();
        let (p1, c2, c3) = (&r[0], &r[1], &r[2]);
        prop_assert!(!ex.unique || !c3.holds || c2.holds);
        prop_assert!(!c2.holds || p1.holds);
        prop_assert!(p1.margin + 1e-9 >= c2.margin);
        if let Some(c4) = r.get(3) {
            prop_assert!(!c4.holds || p1.holds);
        }
    }

    #[test]
    fn exported_program_parses_back((w, k) in instance(6)) {
        let lp = build_linkmed(&w, k).unwrap();
        let back = parse_lp_text(&export_lp_text(&lp).unwrap()).unwrap();
        prop_assert_eq!(back.num_vars(), lp.num_vars());
        prop_assert_eq!(back.num_constraints(), lp.num_constraints());
        for (a, b) in lp.constraints.iter().zip(&back.constraints) {
            prop_assert_eq!(a.dense(lp.num_vars()), b.dense(lp.num_vars()));
            prop_assert_eq!(a.relation, b.relation);
            prop_assert_eq!(a.rhs, b.rhs);
        }
    }

    #[test]
    fn covering_programs_satisfy_weak_duality(
        cost in prop::collection::vec(0.1..5.0f64, 2..=6),
        rows in prop::collection::vec((prop::collection::vec(0.0..3.0f64, 6), 0.5..4.0f64), 1..=5),
    ) {
        let mut lp = LinearProgram::new(Sense::Minimize);
        for (j, &c) in cost.iter().enumerate() {
            lp.add_var(format!("x{j}"), c, 0.0, f64::INFINITY);
        }
        for (i, (a, b)) in rows.iter().enumerate() {
            let mut coef: Vec<(usize, f64)> = (0..cost.len()).map(|j| (j, a[j])).collect();
            coef[0].1 += 1.0;
            lp.add_constraint(format!("r{i}"), coef, Relation::Ge, *b);
        }
        let s = solve_lp(&lp).unwrap();
        prop_assert_eq!(s.status, Status::Optimal);
        prop_assert!(s.vertex);
        prop_assert!(s.dual_objective(&lp) <= s.objective_value + 1e-7);
        let r = residuals(&lp, &s.x, Some((&s.duals, &s.reduced_costs)));
        prop_assert!(r.primal <= 1e-8 && r.bounds <= 1e-8 && r.complementarity <= 1e-7);
        prop_assert_eq!(solve_lp(&lp).unwrap(), s);
    }
}

fn check_scaled_witness(a: &CertificateReport, b: &CertificateReport, scale: f64) -> Result<(), TestCaseError> {
    match (&a.witness, &b.witness) {
        (Some(x), Some(y)) => {
            prop_assert!(
                close(x.u * scale, y.u, 1e-9),
                "{:?} u {} vs {}",
                a.kind,
                x.u * scale,
                y.u
            );
            for (l, m) in x.lambda.iter().zip(&y.lambda) {
                prop_assert!(close(l * scale, *m, 1e-9));
            }
        }
        (None, None) => {}
        _ => prop_assert!(false, "witness present on one side only"),
    }
    Ok(())
}

#[test]
fn six_points_on_a_line() {
    let pts: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 10.0, 11.0, 12.0].iter().map(|&x| vec![x]).collect();
    let w = DissimilarityMatrix::from_points(&pts, Metric::SquaredEuclidean).unwrap();
    let rr = solve_linkmed(&w, 2).unwrap();
    let ex = brute_force_kmed(&w, 2).unwrap();
    assert_eq!(ex.best_objective, 4.0);
    assert!(rr.integral);
    assert!((rr.objective - 4.0).abs() < 1e-9);
    assert_eq!(rr.clustering.unwrap().medoids(), &[1, 4]);
}
