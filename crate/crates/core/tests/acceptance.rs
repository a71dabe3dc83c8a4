//! Acceptance criteria. Runs as a plain binary (`harness = false`) so that
//! every criterion prints exactly one PASS/FAIL line, even when it passes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::collections::{BTreeMap, VecDeque};
use std::time::{Duration, Instant};

use nalgebra::{Quaternion, UnitQuaternion, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use nvmo::bounds::{beta_value, mu_value, theorem1_bounds, theorem2_bounds};
use nvmo::camera::{project, reconstruct_error, CameraIntrinsics, FeatureModel};
use nvmo::graph::Digraph;
use nvmo::liegroup::{big_e_r, lambda_min_sym, phi, pose_average, rot_exp, Pose, Rotation};
use nvmo::report::{entered_at, write_metrics_csv};
use nvmo::sim::{presets, run, MetricsRecord, Scenario};

// Tolerances and reference values.
const MEAN_TOL: f64 = 0.005;
const MEAN_POSITION: [f64; 3] = [0.33, 0.36, -2.96];
const MEAN_ROTATION: [f64; 3] = [-0.32, -0.34, -0.34];
const MEAN_RUNTIME: Duration = Duration::from_millis(1);
const BETA: f64 = 0.86;
const BETA_TOL: f64 = 0.01;
const EPS_P: f64 = 0.19;
const EPS_R: f64 = 0.31;
const EPS_TOL: f64 = 0.005;
const STATIC_RUNTIME: Duration = Duration::from_secs(60);
const SINGLE_CAMERA_TOL: f64 = 1e-6;
const SINGLE_CAMERA_HORIZON: f64 = 20.0;
const TRACKING_WINDOW: f64 = 5.0;
const TRACE_SLACK: f64 = 1e-9;
const TRACE_TRIPLES: usize = 10_000;
const QUADRATIC_FACTOR: f64 = 3.0;
const DT_HALVING_TOL: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Runs {
    static_strong: Vec<MetricsRecord>,
    static_strong_time: Duration,
    moving_3: Vec<MetricsRecord>,
    moving_30: Vec<MetricsRecord>,
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation {
    let q = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let uq = UnitQuaternion::from_quaternion(Quaternion::from(q));
    Rotation::from_matrix_unchecked(*uq.to_rotation_matrix().matrix())
}

fn final_window(recs: &[MetricsRecord], width: f64) -> &[MetricsRecord] {
    let t_end = recs.last().unwrap().t;
    let start = recs.partition_point(|r| r.t < t_end - width);
    &recs[start..]
}

fn max_of(recs: &[MetricsRecord], f: impl Fn(&MetricsRecord) -> f64) -> f64 {
    recs.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

fn csv_bytes(recs: &[MetricsRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_metrics_csv(&mut buf, recs).unwrap();
    buf
}

fn c1_position() -> Outcome {
    let g = pose_average(&presets::target_poses()).unwrap();
    let dev = (0..3).map(|k| (g.pos[k] - MEAN_POSITION[k]).abs()).fold(0.0, f64::max);
    outcome(
        dev <= MEAN_TOL,
        format!(
            "p* = [{:.4}, {:.4}, {:.4}], max deviation {dev:.4} (tol {MEAN_TOL})",
            g.pos.x, g.pos.y, g.pos.z
        ),
    )
}

fn c1_rotation() -> Outcome {
    let g = pose_average(&presets::target_poses()).unwrap();
    let r = g.rot.log().unwrap();
    let dev = (0..3).map(|k| (r[k] - MEAN_ROTATION[k]).abs()).fold(0.0, f64::max);
    outcome(
        dev <= MEAN_TOL,
        format!(
            "xi*theta* = [{:.4}, {:.4}, {:.4}], max deviation {dev:.4} (tol {MEAN_TOL})",
            r.x, r.y, r.z
        ),
    )
}

fn c1_runtime() -> Outcome {
    let targets = presets::target_poses();
    let reps = 1000;
    let t0 = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(pose_average(std::hint::black_box(&targets)).unwrap());
    }
    let per = t0.elapsed() / reps;
    outcome(per < MEAN_RUNTIME, format!("{per:?} per call"))
}

fn reference_beta() -> f64 {
    let targets = presets::target_poses();
    let rots: Vec<Rotation> = targets.iter().map(|g| g.rot).collect();
    let g = pose_average(&targets).unwrap();
    beta_value(&rots, &g.rot, 0.0).unwrap()
}

fn c2_beta() -> Outcome {
    let b = reference_beta();
    outcome(
        (b - BETA).abs() <= BETA_TOL,
        format!("beta = {b:.5} (expected {BETA} ± {BETA_TOL})"),
    )
}

fn c3_weak() -> Outcome {
    let b = theorem1_bounds(1.0, 0.1, 1, reference_beta(), 1e-4).unwrap();
    outcome(b == (1.0, 1.0), format!("(eps_p, eps_R) = {b:?}"))
}

fn c3_strong() -> Outcome {
    let (p, r) = theorem1_bounds(1.0, 100.0, 1, reference_beta(), 1e-4).unwrap();
    outcome(
        (p - EPS_P).abs() <= EPS_TOL && (r - EPS_R).abs() <= EPS_TOL,
        format!("(eps_p, eps_R) = ({p:.4}, {r:.4}), expected ({EPS_P}, {EPS_R}) ± {EPS_TOL}"),
    )
}

fn c4_static(runs: &Runs) -> Outcome {
    let recs = &runs.static_strong;
    let horizon = recs.last().unwrap().t;
    let tp = entered_at(recs.iter().map(|r| (r.t, r.u_p, EPS_P * r.rho_p)));
    let tr = entered_at(recs.iter().map(|r| (r.t, r.u_r, EPS_R * r.rho_r)));
    let ok = matches!((tp, tr), (Some(a), Some(b)) if a < horizon && b < horizon)
        && runs.static_strong_time < STATIC_RUNTIME;
    outcome(
        ok,
        format!(
            "U_p <= {EPS_P} rho_p from t={tp:?}, U_R <= {EPS_R} rho_R from t={tr:?}, runtime {:.2?}",
            runs.static_strong_time
        ),
    )
}

fn c5_baseline(runs: &Runs) -> Outcome {
    let recs = run(&presets::reference_static(1.0, 0.1), 0).unwrap();
    let horizon = recs.last().unwrap().t;
    let tp = entered_at(recs.iter().map(|r| (r.t, r.u_p, r.rho_p)));
    let tr = entered_at(recs.iter().map(|r| (r.t, r.u_r, r.rho_r)));
    let (weak, strong) = (recs.last().unwrap(), runs.static_strong.last().unwrap());
    let ok = matches!((tp, tr), (Some(a), Some(b)) if a < horizon && b < horizon)
        && weak.u_p > strong.u_p
        && weak.u_r > strong.u_r;
    outcome(
        ok,
        format!(
            "1-level entered at t={tp:?}/{tr:?}; final U_p {:.3e} vs {:.3e}, U_R {:.3e} vs {:.3e} (k_s = 0.1 vs 100)",
            weak.u_p, strong.u_p, weak.u_r, strong.u_r
        ),
    )
}

fn c6_single_camera() -> Outcome {
    let mut sc = presets::single_camera(1.0);
    sc.horizon = SINGLE_CAMERA_HORIZON;
    let recs = run(&sc, 0).unwrap();
    let hit = recs.iter().find(|r| r.err_cam[0] < SINGLE_CAMERA_TOL).map(|r| r.t);
    outcome(
        hit.is_some(),
        format!(
            "||E_R(g_e)|| < {SINGLE_CAMERA_TOL} first at t={hit:?}, final {:.3e}",
            recs.last().unwrap().err_cam[0]
        ),
    )
}

fn c7_tracking(runs: &Runs) -> Outcome {
    let recs = &runs.moving_3;
    let sc = presets::reference_moving(3.0, 3.0);
    let (w_p, w_r) = sc.velocity_bounds();
    let gamma = max_of(recs, |r| r.gamma);
    let rho_p = max_of(recs, |r| r.rho_p);
    let rho_r = max_of(recs, |r| r.rho_r);
    let (ep, er) = theorem2_bounds(3.0, mu_value(gamma).unwrap(), w_p, w_r, rho_p, rho_r).unwrap();
    let bounded = recs.iter().all(|r| r.u_p.is_finite() && r.u_r.is_finite());
    let win = final_window(recs, TRACKING_WINDOW);
    let (up, ur) = (max_of(win, |r| r.u_p), max_of(win, |r| r.u_r));
    outcome(
        bounded && up <= ep * rho_p && ur <= er * rho_r,
        format!(
            "final {TRACKING_WINDOW} s: max U_p {up:.4} <= {:.4}, max U_R {ur:.4} <= {:.4} (gamma {gamma:.5}, eps' = ({ep:.3}, {er:.3}))",
            ep * rho_p,
            er * rho_r
        ),
    )
}

fn c7_gain(runs: &Runs, label: &str, f: fn(&MetricsRecord) -> f64) -> Outcome {
    let a = max_of(final_window(&runs.moving_3, TRACKING_WINDOW), f);
    let b = max_of(final_window(&runs.moving_30, TRACKING_WINDOW), f);
    outcome(b < a, format!("ultimate max {label}: k_e=30 {b:.4} vs k_e=3 {a:.4}"))
}

fn c8_trace_inequality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..TRACE_TRIPLES {
        let (r1, r2, r3) = (
            random_rotation(&mut rng),
            random_rotation(&mut rng),
            random_rotation(&mut rng),
        );
        let (m1, m2, m3) = (r1.matrix(), r2.matrix(), r3.matrix());
        let lhs = 0.5 * (m1.transpose() * m2 - m1.transpose() * m3 * m2.transpose() * m3).trace();
        let r13 = Rotation::from_matrix_unchecked(m1.transpose() * m3);
        let r12 = Rotation::from_matrix_unchecked(m1.transpose() * m2);
        let r32 = Rotation::from_matrix_unchecked(m3.transpose() * m2);
        let rhs = phi(&r13) - phi(&r12) + lambda_min_sym(r13.matrix()) * phi(&r32);
        worst = worst.min(lhs - rhs);
        violations += usize::from(lhs - rhs < -TRACE_SLACK);
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {TRACE_TRIPLES} triples, min slack {worst:.3e}"),
    )
}

fn c8_invariant_s(runs: &Runs) -> Outcome {
    let worst = runs
        .static_strong
        .iter()
        .map(|r| r.min_eig_s)
        .fold(f64::INFINITY, f64::min);
    outcome(worst > 0.0, format!("min over run of min_eig_S = {worst:.6}"))
}

fn c8_omega_star(runs: &Runs) -> Outcome {
    let n = 5.0;
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for r in &runs.moving_3 {
        let mu = mu_value(r.gamma).unwrap();
        let rhs = mu * mu / n * r.w_r_sq;
        worst = worst.max(r.omega_star_sq / rhs);
        bad += usize::from(!(r.omega_star_sq < rhs));
    }
    outcome(
        bad == 0,
        format!("{bad} violations, max ratio ||w*||^2 / (mu^2/n ||w_R||^2) = {worst:.6}"),
    )
}

fn c8_linearization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(84);
    let model = FeatureModel::default();
    let cam = CameraIntrinsics::new(0.01).unwrap();
    let hs = [1e-2, 1e-3, 1e-4];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..50 {
        let g_bar = Pose::new(
            rot_exp(&Vector3::from_fn(|_, _| rng.random_range(-0.5..0.5))),
            Vector3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-3.5..-2.5),
            ),
        );
        let dir = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let dir_r = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let s = h / (dir.norm_squared() + dir_r.norm_squared()).sqrt();
                let g_e = Pose::new(rot_exp(&(dir_r * s)), dir * s);
                let f = project(&(g_bar * g_e), &model, &cam).unwrap();
                let e = reconstruct_error(&f, &g_bar, &model, &cam).unwrap();
                (e.to_vector() - big_e_r(&g_e).to_vector()).norm()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let ok = lo >= 100.0 / QUADRATIC_FACTOR && hi <= 100.0 * QUADRATIC_FACTOR;
    outcome(
        ok,
        format!("error ratios per decade of h in [{lo:.1}, {hi:.1}] (quadratic: 100, factor {QUADRATIC_FACTOR})"),
    )
}

/// Independent W: filter all (n-1)-edge subsets for spanning trees, root each
/// by BFS, and charge every node's depth to each edge on its root path.
fn w_oracle(n: usize, edges: &[(usize, usize)]) -> u64 {
    if n == 1 {
        return 0;
    }
    let m = edges.len();
    let mut best = u64::MAX;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..m).filter(|k| mask & (1 << k) != 0).map(|k| edges[k]).collect();
        let mut adj = vec![Vec::new(); n + 1];
        for &(a, b) in &chosen {
            adj[a].push(b);
            adj[b].push(a);
        }
        for root in 1..=n {
            let mut parent = vec![0usize; n + 1];
            let mut depth = vec![usize::MAX; n + 1];
            depth[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if depth[v] == usize::MAX {
                        depth[v] = depth[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if depth[1..].contains(&usize::MAX) {
                break; // not spanning; same for every root
            }
            let mut load: BTreeMap<(usize, usize), u64> = BTreeMap::new();
            for i in 1..=n {
                let mut v = i;
                while v != root {
                    let key = (v.min(parent[v]), v.max(parent[v]));
                    *load.entry(key).or_default() += depth[i] as u64;
                    v = parent[v];
                }
            }
            best = best.min(load.values().copied().max().unwrap_or(0));
        }
    }
    best
}

fn c8_graph_constant() -> Outcome {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for n in 1..=5usize {
        let all: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << all.len()) {
            let edges: Vec<(usize, usize)> = (0..all.len())
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| all[k])
                .collect();
            let g = Digraph::bidirectional(n, edges.iter().copied()).unwrap();
            if !g.undirected_connected() {
                continue;
            }
            checked += 1;
            let got = g.compute_w().unwrap().w;
            let want = w_oracle(n, &edges);
            if got != want {
                mismatches.push((n, edges, got, want));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{checked} connected graphs, {} mismatches {:?}",
            mismatches.len(),
            mismatches.first()
        ),
    )
}

fn c9_determinism(runs: &Runs) -> Outcome {
    let again = run(&presets::reference_static(1.0, 100.0), 0).unwrap();
    let other_seed = run(&presets::reference_static(1.0, 100.0), 7).unwrap();
    let a = csv_bytes(&runs.static_strong);
    let ok = a == csv_bytes(&again) && a == csv_bytes(&other_seed);
    outcome(
        ok,
        format!(
            "{} CSV bytes, repeated run and zero-noise seed change identical: {ok}",
            a.len()
        ),
    )
}

fn c9_dt_halving(runs: &Runs) -> Outcome {
    let mut sc: Scenario = presets::reference_static(1.0, 100.0);
    sc.dt /= 2.0;
    let half = run(&sc, 0).unwrap();
    let (a, b) = (runs.static_strong.last().unwrap(), half.last().unwrap());
    let dp = (a.u_p - b.u_p).abs() / a.u_p;
    let dr = (a.u_r - b.u_r).abs() / a.u_r;
    outcome(
        dp < DT_HALVING_TOL && dr < DT_HALVING_TOL,
        format!("relative change of final U_p {dp:.2e}, U_R {dr:.2e} (tol {DT_HALVING_TOL})"),
    )
}

fn main() {
    let t0 = Instant::now();
    let static_strong = run(&presets::reference_static(1.0, 100.0), 0).unwrap();
    let static_strong_time = t0.elapsed();
    let runs = Runs {
        static_strong,
        static_strong_time,
        moving_3: run(&presets::reference_moving(3.0, 3.0), 0).unwrap(),
        moving_30: run(&presets::reference_moving(30.0, 3.0), 0).unwrap(),
    };

    let criteria: Vec<(&str, Check<'_>)> = vec![
        ("1a mean position", Box::new(c1_position)),
        ("1b mean orientation", Box::new(c1_rotation)),
        ("1c mean runtime", Box::new(c1_runtime)),
        ("2 beta", Box::new(c2_beta)),
        ("3a averaging levels, k_s = 0.1", Box::new(c3_weak)),
        ("3b averaging levels, k_s = 100", Box::new(c3_strong)),
        ("4 static cooperative run", Box::new(|| c4_static(&runs))),
        ("5 static weak-coupling baseline", Box::new(|| c5_baseline(&runs))),
        ("6 single-camera convergence", Box::new(c6_single_camera)),
        ("7a tracking within bounds, k_e = 3", Box::new(|| c7_tracking(&runs))),
        ("7b larger gain, U_R", Box::new(|| c7_gain(&runs, "U_R", |r| r.u_r))),
        ("7c larger gain, U_p", Box::new(|| c7_gain(&runs, "U_p", |r| r.u_p))),
        ("8a trace inequality", Box::new(c8_trace_inequality)),
        ("8b invariant set S", Box::new(|| c8_invariant_s(&runs))),
        ("8c average angular velocity bound", Box::new(|| c8_omega_star(&runs))),
        ("8d error reconstruction is second order", Box::new(c8_linearization)),
        ("8e graph constant vs oracle", Box::new(c8_graph_constant)),
        ("9a determinism", Box::new(|| c9_determinism(&runs))),
        ("9b dt halving", Box::new(|| c9_dt_halving(&runs))),
    ];

    let mut failed = Vec::new();
    for (name, check) in &criteria {
        let o = check();
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(*name);
        }
    }
    println!(
        "acceptance: {} passed, {} failed ({:.1?})",
        criteria.len() - failed.len(),
        failed.len(),
        t0.elapsed()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
