use medoid_lp::certificates::{check_max_u_certificate, check_threshold_certificate};
use medoid_lp::experiment::{run_experiment, ExperimentConfig};
use medoid_lp::kmedoids::{brute_force_kmed, classify_recovery, solve_linkmed, Clustering, RecoveryLabel};
use medoid_lp::model::{dissimilarities, BallsSpec, Metric, PointSet, RadialLaw};

fn ball_instance(
    spec: &BallsSpec,
    seed: u64,
    trial: u64,
    metric: Metric,
) -> (PointSet, medoid_lp::DissimilarityMatrix) {
    let ps = PointSet::separated_balls(spec, seed, trial).unwrap();
    let w = dissimilarities(&ps, metric).unwrap();
    (ps, w)
}

#[test]
fn wide_separation_always_recovers_balls() {
    let cfg = ExperimentConfig {
        n: vec![20],
        r: vec![5.0],
        trials: 100,
        base_seed: 21,
        ..Default::default()
    };
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res[0].ball, 100);
    assert_eq!(res[0].cor3_holds, 100);
    assert_eq!(res[0].prop1_holds, 100);

    // Independent confirmation of every trial by enumeration.
    let spec = BallsSpec::new(2, 20, 2, 5.0, RadialLaw::UniformBall);
    for t in 0..100 {
        let (ps, w) = ball_instance(&spec, 21, t, Metric::SquaredEuclidean);
        let truth = Clustering::from_labels(&w, &ps.ball_of).unwrap();
        let ex = brute_force_kmed(&w, 2).unwrap();
        assert!(ex.unique);
        assert_eq!(ex.optimal_medoid_sets[0], truth.medoids());
    }
}

#[test]
fn five_points_three_balls_at_two_can_fail() {
    let cfg = ExperimentConfig {
        n: vec![5],
        k: vec![3],
        r: vec![2.0],
        trials: 100,
        base_seed: 5,
        certificates: false,
        ..Default::default()
    };
    let res = run_experiment(&cfg).unwrap();
    assert!(res[0].failed_ball_recoveries() > 0);
}

#[test]
fn ball_recoveries_imply_the_dual_certificate() {
    let cfg = ExperimentConfig {
        n: vec![5, 10],
        k: vec![2, 3],
        r: vec![2.0, 2.6],
        d: vec![2, 3],
        trials: 15,
        base_seed: 8,
        ..Default::default()
    };
    for c in run_experiment(&cfg).unwrap() {
        assert_eq!(c.prop1_misses, 0, "{:?}", c.cell);
        assert_eq!(c.fractional + c.cluster_only + c.ball + c.solver_failures, c.trials);
    }
}

#[test]
fn max_u_certificate_usually_holds_at_three_point_eight() {
    let spec = BallsSpec::new(2, 30, 2, 3.8, RadialLaw::QuadraticCdf);
    let holds = (0..20)
        .filter(|&t| {
            let (ps, w) = ball_instance(&spec, 17, t, Metric::SquaredEuclidean);
            let c = Clustering::from_labels(&w, &ps.ball_of).unwrap();
            check_max_u_certificate(&w, &c).unwrap().holds
        })
        .count();
    assert!(holds > 10, "{holds}/20");
}

#[test]
fn recovery_beyond_thresholding() {
    let spec = BallsSpec::new(2, 20, 2, 3.85, RadialLaw::QuadraticCdf);
    let found = (0..200).any(|t| {
        let (ps, w) = ball_instance(&spec, 3, t, Metric::SquaredEuclidean);
        let c = Clustering::from_labels(&w, &ps.ball_of).unwrap();
        !check_threshold_certificate(&w, &c).unwrap().holds && check_max_u_certificate(&w, &c).unwrap().holds
    });
    assert!(found);
}

#[test]
fn threshold_certificate_past_the_power_bound() {
    // Equal ball sizes: the bound is 2 (1 + 2^(1/p)).
    for (p, r) in [(2.0, 4.9), (4.0, 4.45), (8.0, 4.25)] {
        let bound = 2.0 * (1.0 + 2f64.powf(1.0 / p));
        assert!(r > bound);
        let spec = BallsSpec::new(3, 8, 2, r, RadialLaw::UniformBall);
        for t in 0..10 {
            let (ps, w) = ball_instance(&spec, 40, t, Metric::Power(p));
            let c = Clustering::from_labels(&w, &ps.ball_of).unwrap();
            assert!(check_threshold_certificate(&w, &c).unwrap().holds, "p={p} trial {t}");
            let rr = solve_linkmed(&w, 3).unwrap();
            assert_eq!(
                classify_recovery(&rr, &ps.ball_of).unwrap().label,
                RecoveryLabel::BallRecovery
            );
        }
    }
}

#[test]
fn grid_guard_rejects_large_cells() {
    let cfg = ExperimentConfig {
        n: vec![31],
        k: vec![3],
        trials: 1,
        ..Default::default()
    };
    assert!(run_experiment(&cfg).is_err());
}
