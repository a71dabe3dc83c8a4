use nalgebra::Vector3;
use proptest::prelude::*;

use nvmo::bounds::{energy_up, energy_ur, rho_values};
use nvmo::graph::Digraph;
use nvmo::liegroup::{matrix_mean, phi, pose_average, proj_so3, Pose, Rotation};
use nvmo::sim::{presets, run, Simulation};

fn pose_strategy() -> impl Strategy<Value = Pose> {
    (prop::array::uniform3(-2.0..2.0f64), prop::array::uniform3(-1.0..1.0f64)).prop_map(|(p, r)| Pose::from_parts(p, r))
}

/// Connected undirected graph: a random spanning tree plus extra edges.
fn connected_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..=6)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (2..=n).map(|i| 1..i).collect();
            (Just(n), parents, prop::collection::vec((1..=n, 1..=n), 0..6))
        })
        .prop_map(|(n, parents, extra)| {
            let mut edges: Vec<(usize, usize)> = parents.into_iter().enumerate().map(|(k, p)| (p, k + 2)).collect();
            edges.extend(extra.into_iter().filter(|(a, b)| a != b));
            (n, edges)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn adding_an_edge_never_increases_w((n, edges) in connected_graph(), a in 1usize..=6, b in 1usize..=6) {
        prop_assume!(a <= n && b <= n && a != b);
        let before = Digraph::bidirectional(n, edges.clone()).unwrap().compute_w().unwrap().w;
        let mut more = edges;
        more.push((a, b));
        let after = Digraph::bidirectional(n, more).unwrap().compute_w().unwrap().w;
        prop_assert!(after <= before, "{after} > {before}");
    }

    #[test]
    fn witness_loads_sum_to_squared_depths((n, edges) in connected_graph()) {
        let report = Digraph::bidirectional(n, edges).unwrap().compute_w().unwrap();
        let t = &report.witness;
        let total: u64 = t.per_edge_load.values().sum();
        let squares: u64 = t.depths.iter().map(|&d| (d * d) as u64).sum();
        prop_assert_eq!(total, squares);
        prop_assert_eq!(report.w, t.d_tilde);
        prop_assert_eq!(t.tree_edges.len(), n - 1);
    }

    #[test]
    fn energies_are_frame_invariant(
        targets in prop::collection::vec(pose_strategy(), 2..6),
        est in prop::collection::vec(pose_strategy(), 6),
        g0 in pose_strategy(),
    ) {
        let n = targets.len();
        let est = &est[..n];
        let energies = |ts: &[Pose], es: &[Pose]| {
            let g = pose_average(ts).unwrap();
            let ps: Vec<Vector3<f64>> = es.iter().map(|e| e.pos).collect();
            let rs: Vec<Rotation> = es.iter().map(|e| e.rot).collect();
            let (rp, rr) = rho_values(ts, &g);
            [energy_up(&ps, &g.pos), energy_ur(&rs, &g.rot), rp, rr]
        };
        let a = energies(&targets, est);
        let moved_t: Vec<Pose> = targets.iter().map(|t| g0 * *t).collect();
        let moved_e: Vec<Pose> = est.iter().map(|e| g0 * *e).collect();
        let b = energies(&moved_t, &moved_e);
        for k in 0..4 {
            prop_assert!((a[k] - b[k]).abs() <= 1e-12 * (1.0 + a[k].abs()), "{k}: {} vs {}", a[k], b[k]);
        }
    }
}

#[test]
fn energy_descends_outside_unit_level() {
    for k_s in [100.0, 0.1] {
        let sc = presets::reference_static(1.0, k_s);
        let recs = run(&sc, 0).unwrap();
        let slack = 1e-9 * sc.dt;
        for w in recs.windows(2) {
            if w[0].u_p > w[0].rho_p {
                assert!(w[1].u_p <= w[0].u_p + slack, "k_s={k_s} t={}: U_p rose", w[0].t);
            }
            if w[0].u_r > w[0].rho_r {
                assert!(w[1].u_r <= w[0].u_r + slack, "k_s={k_s} t={}: U_R rose", w[0].t);
            }
        }
    }
}

#[test]
fn estimates_end_near_the_average() {
    let c = 0.01;
    for k_s in [100.0, 0.1] {
        let sc = presets::reference_static(1.0, k_s);
        let mut sim = Simulation::new(&sc, 0).unwrap();
        while !sim.is_done() {
            sim.advance().unwrap();
        }
        let rots: Vec<Rotation> = sim.targets_world().iter().map(|g| g.rot).collect();
        let e_star = proj_so3(&matrix_mean(&rots).unwrap()).unwrap();
        let farthest = rots.iter().map(|r| phi(&(e_star.transpose() * *r))).fold(0.0, f64::max);
        for g in sim.estimates_world() {
            let d = phi(&(e_star.transpose() * g.rot));
            assert!(d <= farthest + c, "k_s={k_s}: {d} > {farthest} + {c}");
        }
    }
}

#[test]
fn uncoupled_network_converges_per_camera() {
    let mut sc = presets::reference_static(1.0, 0.0);
    sc.horizon = 25.0;
    let recs = run(&sc, 0).unwrap();
    for e in &recs.last().unwrap().err_cam {
        assert!(*e < 1e-6, "{e}");
    }
}

#[test]
fn moving_run_bound_columns_are_finite() {
    let sc = presets::reference_moving(3.0, 3.0);
    let mut sim = Simulation::new(&sc, 0).unwrap();
    let first = sim.record().unwrap();
    assert!(first.eps_bound_p.is_finite() && first.eps_bound_r.is_finite());
    // below the tracking threshold the columns are NaN
    let sc = presets::reference_moving(0.5, 3.0);
    let mut sim = Simulation::new(&sc, 0).unwrap();
    assert!(sim.record().unwrap().eps_bound_p.is_nan());
}
