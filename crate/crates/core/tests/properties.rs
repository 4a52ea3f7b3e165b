//! Property-based invariants across modules.

use std::path::Path;

use graph_transport::catalog;
use graph_transport::coefficients::{FieldKind, Profile, VelocityField};
use graph_transport::config::ProblemConfig;
use graph_transport::simulator::{solve, EdgeProfile, SimulationSettings};
use graph_transport::wellposedness::check_semigroup;
use graph_transport::TransportProblem;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0..-0.1f64, 0.1..3.0f64]
}

fn grid_data(ids: &[String], n_s: usize, coeffs: &[f64]) -> Vec<EdgeProfile> {
    ids.iter()
        .enumerate()
        .map(|(j, id)| {
            let c = coeffs[j % coeffs.len()];
            EdgeProfile::sample(id, 1.0, n_s, move |s| c * (1.0 + (7.0 * s + j as f64).sin()))
        })
        .collect()
}

fn roundtrip(p: &TransportProblem) -> TransportProblem {
    let text = ProblemConfig::from_problem(p).to_json();
    ProblemConfig::parse(&text).unwrap().to_problem(Path::new(".")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip_preserves_report(a in nonzero(), d in nonzero(), beta in -2.0..2.0f64, gamma in -2.0..2.0f64, alpha in 0.05..0.95f64) {
        for p in [catalog::loop_graph(a, d, beta, gamma), catalog::pumpkin_weighted(alpha), catalog::star(2, 2, &[a, d, beta, gamma])] {
            let q = roundtrip(&p);
            let r1 = check_semigroup(&p, TOL).unwrap();
            let r2 = check_semigroup(&q, TOL).unwrap();
            prop_assert_eq!(r1.verdict_semigroup, r2.verdict_semigroup);
            prop_assert_eq!(r1.verdict_group, r2.verdict_group);
            prop_assert!((r1.sigma_min - r2.sigma_min).abs() <= 1e-12 * r1.r0_norm.max(1.0));
        }
    }

    #[test]
    fn verdict_invariant_under_boundary_scaling(a in nonzero(), d in nonzero(), beta in -2.0..2.0f64, gamma in -2.0..2.0f64, k in nonzero()) {
        let p = catalog::loop_graph(a, d, beta, gamma);
        let q = p.with_boundary(p.boundary.scaled(k)).unwrap();
        let r1 = check_semigroup(&p, TOL).unwrap();
        let r2 = check_semigroup(&q, TOL).unwrap();
        prop_assert_eq!(r1.verdict_semigroup, r2.verdict_semigroup);
        prop_assert_eq!(r1.verdict_group, r2.verdict_group);
    }

    #[test]
    fn phi_inverse_round_trip(a in nonzero(), b in -0.09..0.09f64, x in 0.0..1.0f64) {
        let f = VelocityField::new(FieldKind::Internal, Profile::Affine { a, b }, None).unwrap();
        let y = f.phi(x).unwrap();
        let back = f.invert_phi(y).unwrap();
        prop_assert!((back - x).abs() <= 1e-9, "x = {x}, back = {back}");
    }

    #[test]
    fn nonnegative_coupling_keeps_data_nonnegative(beta in 0.0..2.0f64, gamma in 0.0..2.0f64, c0 in 0.0..1.0f64, c1 in 0.0..1.0f64) {
        let p = catalog::loop_graph(1.0, 1.0, beta, gamma);
        let n_s = 32;
        let f0 = grid_data(&p.graph.edge_ids(), n_s, &[c0, c1]);
        let traj = solve(&p, &f0, &SimulationSettings::new(2.5, 1.0 / n_s as f64, n_s)).unwrap();
        for frame in &traj.frames {
            for prof in &frame.profiles {
                prop_assert!(prof.values.iter().all(|v| *v >= -1e-14));
            }
        }
    }

    #[test]
    fn boundary_conditions_hold_along_trajectory(a in nonzero(), d in nonzero(), beta in -2.0..2.0f64, gamma in -2.0..2.0f64) {
        let p = catalog::loop_graph(a, d, beta, gamma);
        let n_s = 32;
        let f0 = grid_data(&p.graph.edge_ids(), n_s, &[1.0, -0.5]);
        let traj = solve(&p, &f0, &SimulationSettings::new(2.0, 1.0 / n_s as f64, n_s)).unwrap();
        prop_assert!(traj.max_boundary_residual <= 1e-10, "residual {}", traj.max_boundary_residual);
    }

    #[test]
    fn evolution_has_semigroup_property(alpha in 0.05..0.95f64, k1 in 1usize..40, k2 in 1usize..40) {
        let p = catalog::pumpkin_weighted(alpha);
        let n_s = 16;
        let dt = 1.0 / n_s as f64;
        let f0 = grid_data(&p.graph.edge_ids(), n_s, &[1.0, 0.3, -0.7]);
        let (t1, t2) = (k1 as f64 * dt, k2 as f64 * dt);
        let mut s = SimulationSettings::new(t1 + t2, dt, n_s);
        s.output_every = 1;
        let whole = solve(&p, &f0, &s).unwrap();
        let mut s1 = SimulationSettings::new(t1, dt, n_s);
        s1.output_every = 1;
        let first = solve(&p, &f0, &s1).unwrap();
        let mid = first.frame_at(t1).unwrap().profiles.clone();
        let mut s2 = SimulationSettings::new(t2, dt, n_s);
        s2.output_every = 1;
        let second = solve(&p, &mid, &s2).unwrap();
        let a = &whole.frame_at(t1 + t2).unwrap().profiles;
        let b = &second.frame_at(t2).unwrap().profiles;
        for (x, y) in a.iter().zip(b) {
            for (u, v) in x.values.iter().zip(&y.values) {
                prop_assert!((u - v).abs() <= 1e-12, "{u} vs {v}");
            }
        }
    }

    #[test]
    fn finite_speed_of_propagation(k in 1usize..15) {
        // data supported near s = 1 on e1 has not reached the far end of e3 yet
        let p = catalog::pumpkin_weighted(0.5);
        let n_s = 32;
        let dt = 1.0 / n_s as f64;
        let f0: Vec<EdgeProfile> = p.graph.edge_ids().iter().enumerate()
            .map(|(j, id)| EdgeProfile::sample(id, 1.0, n_s, move |s| if j == 0 { (s - 0.5).max(0.0) } else { 0.0 }))
            .collect();
        let t = k as f64 * dt;
        let traj = solve(&p, &f0, &SimulationSettings::new(t, dt, n_s)).unwrap();
        let frame = traj.frame_at(t).unwrap();
        let e3 = &frame.profiles[2];
        for (s, v) in e3.grid.iter().zip(&e3.values) {
            if *s > t + 1e-12 {
                prop_assert_eq!(*v, 0.0);
            }
        }
    }
}
