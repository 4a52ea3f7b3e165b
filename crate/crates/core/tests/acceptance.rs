//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use graph_transport::catalog;
use graph_transport::coefficients::{normalize, FieldKind, Profile, Similarity, VelocityField};
use graph_transport::graph::{build_graph, GraphSpec, InternalEdge};
use graph_transport::simulator::{oracle_adjacency, solve, EdgeProfile, SimulationSettings};
use graph_transport::spectral::{
    char_det, default_lambda_grid, necessary_condition_scan, spectrum_scan, CharacteristicEvaluator, GrowthVerdict,
    Region, C64,
};
use graph_transport::wellposedness::{
    check_group, check_semigroup, combined_group_det, discretize_rt0, BoundaryData, Verdict,
};
use graph_transport::TransportProblem;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn semigroup(p: &TransportProblem) -> Verdict {
    check_semigroup(p, TOL).unwrap().verdict_semigroup
}

fn group(p: &TransportProblem) -> Verdict {
    check_semigroup(p, TOL).unwrap().verdict_group
}

fn expect_semigroup(name: &str, p: &TransportProblem, yes: bool) -> Check {
    let v = semigroup(p);
    let want = if yes { Verdict::Generator } else { Verdict::NotGenerator };
    ensure(v == want, || format!("{name}: semigroup verdict {v:?}, expected {want:?}"))
}

fn expect_group(name: &str, p: &TransportProblem, yes: bool) -> Check {
    let v = group(p);
    let want = if yes { Verdict::Generator } else { Verdict::NotGenerator };
    ensure(v == want, || format!("{name}: group verdict {v:?}, expected {want:?}"))
}

fn ac1_verdicts() -> Check {
    let m = catalog::mckendrick();
    expect_semigroup("mckendrick", &m, true)?;
    expect_group("mckendrick", &m, false)?;

    // Cycle of two edges: ad != 0 for the semigroup, ad beta gamma != 0 for the group.
    for a in [0.0, 2.0] {
        for d in [0.0, -3.0] {
            for beta in [0.0, 1.5] {
                for gamma in [0.0, 0.5] {
                    let p = catalog::loop_graph(a, d, beta, gamma);
                    let name = format!("loop-graph({a},{d},{beta},{gamma})");
                    expect_semigroup(&name, &p, a * d != 0.0)?;
                    expect_group(&name, &p, a * d * beta * gamma != 0.0)?;
                }
            }
        }
    }

    expect_semigroup("loop", &catalog::loop_two_edges(), true)?;
    expect_semigroup("loop-variable-q", &catalog::loop_variable_q(), false)?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        expect_semigroup("sink", &catalog::sink(v[0], v[1], v[2], v[3]), false)?;
    }
    for (a, d) in [(1.0, 2.0), (0.0, 2.0), (1.0, 0.0), (-0.5, 3.0)] {
        let p = catalog::sink_degenerate(a, d);
        expect_semigroup("sink-degenerate", &p, a * d != 0.0)?;
        expect_group("sink-degenerate", &p, false)?;
    }

    expect_semigroup("pumpkin-kirchhoff", &catalog::pumpkin_kirchhoff(), false)?;
    for alpha in [0.1, 0.5, 0.9] {
        let p = catalog::pumpkin_weighted(alpha);
        expect_semigroup("pumpkin-weighted", &p, true)?;
        expect_group("pumpkin-weighted", &p, false)?;
    }

    for (a, d, lambda, mu) in [
        (1.0, 2.0, 1.0, 1.0),
        (0.0, 2.0, 1.0, 1.0),
        (1.0, 0.0, 1.0, 1.0),
        (1.0, 2.0, 0.0, 1.0),
        (1.0, 2.0, 1.0, 0.0),
        (1.0, 2.0, 0.0, 0.0),
    ] {
        let conds = [a * d != 0.0, a * d * mu != 0.0, a * d * lambda * mu != 0.0];
        for (case, want) in ['a', 'b', 'c'].into_iter().zip(conds) {
            let p = catalog::lasso(case, a, d, 0.7, 1.3, lambda, mu).unwrap();
            expect_semigroup(&format!("lasso-{case}({a},{d},{lambda},{mu})"), &p, want)?;
        }
    }

    for _ in 0..20 {
        let v: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let (alpha, beta, a, b, c, d) = (v[0], v[1], v[2], v[3], v[4], v[5]);
        let det = alpha * d - c * beta;
        expect_semigroup("halfline-interval", &catalog::halfline_interval(alpha, beta, a, b, c, d).unwrap(), det != 0.0)?;
        // (c, d) parallel to (alpha, beta)
        let k = v[2];
        let p = catalog::halfline_interval(alpha, beta, a, b, k * alpha, k * beta).unwrap();
        expect_semigroup("halfline-interval singular", &p, false)?;
    }

    expect_semigroup("five-four", &catalog::five_four(), true)?;
    for seed in 0..20 {
        let mut r = ChaCha8Rng::seed_from_u64(100 + seed);
        let q_out = r.gen_range(1..5);
        let n_in = r.gen_range(1..5);
        let alpha: Vec<f64> = (0..q_out * n_in).map(|_| r.gen_range(-3.0..3.0)).collect();
        expect_semigroup("star", &catalog::star(q_out, n_in, &alpha), true)?;
    }
    Ok(())
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Diagonally dominant, so every convex combination stays invertible.
fn random_corner(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut q = random_matrix(rng, n) * (0.4 / n as f64);
    for i in 0..n {
        q[(i, i)] += if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    q
}

fn compact_problem(internal_signs: &[f64], q0: DMatrix<f64>, q1: DMatrix<f64>, v0: DMatrix<f64>, v1: DMatrix<f64>) -> TransportProblem {
    let m = internal_signs.len();
    let spec = GraphSpec {
        vertices: vec!["v".into()],
        internal_edges: (0..m)
            .map(|j| InternalEdge {
                id: format!("e{j}"),
                endpoint0: "v".into(),
                endpoint1: "v".into(),
            })
            .collect(),
        external_edges: vec![],
        strict: false,
    };
    let g = build_graph(&spec).unwrap();
    let vel = internal_signs
        .iter()
        .map(|&s| VelocityField::constant(FieldKind::Internal, s))
        .collect();
    let q = Similarity::Affine {
        b: &q1 - &q0,
        a: q0,
    };
    let bd = BoundaryData::matrices(DMatrix::zeros(m, 0), v0, v1);
    TransportProblem::new(g, vec![], vel, Similarity::Identity, q, bd, 2.0).unwrap()
}

fn ac2_determinant_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut singular_seen = [0usize; 3];
    for it in 0..1000 {
        let m = rng.gen_range(1..=5);
        let kind = it % 3;
        let signs: Vec<f64> = (0..m)
            .map(|_| if kind == 2 || rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let q0 = random_corner(&mut rng, m);
        let q1 = random_corner(&mut rng, m);
        let mut v0 = random_matrix(&mut rng, m);
        let mut v1 = random_matrix(&mut rng, m);
        let r = rng.gen_range(0..m);
        match kind {
            // a common zero row makes both factors singular
            1 => {
                v0.row_mut(r).fill(0.0);
                v1.row_mut(r).fill(0.0);
            }
            // all velocities positive: only the factor containing V0 is singular
            2 => v0.row_mut(r).fill(0.0),
            _ => {}
        }
        // Oracle: the two block matrices written out from their definition.
        let pp = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m, signs.iter().map(|&s| (s > 0.0) as u8 as f64)));
        let pm = DMatrix::identity(m, m) - &pp;
        let m1 = &v1 * &q1 * &pp - &v0 * &q0 * &pm;
        let m2 = &v1 * &q1 * &pm - &v0 * &q0 * &pp;
        let (d1, d2) = (m1.determinant(), m2.determinant());

        let p = compact_problem(&signs, q0, q1, v0, v1);
        let combined = combined_group_det(&p).map_err(|e| e.to_string())?;
        let scale = (d1 * d2).abs().max(1e-300);
        ensure((combined.abs() - (d1 * d2).abs()).abs() <= 1e-8 * scale.max(1e-8), || {
            format!("instance {it}: |combined| = {combined:e}, |d1 d2| = {:e}", (d1 * d2).abs())
        })?;
        let nz = |x: f64| x.abs() > 1e-10;
        ensure(nz(combined) == (nz(d1) && nz(d2)), || {
            format!("instance {it}: combined {combined:e} vs d1 {d1:e}, d2 {d2:e}")
        })?;
        let (v, _, _) = check_group(&p, TOL).map_err(|e| e.to_string())?;
        ensure((v == Verdict::Generator) == nz(combined), || format!("instance {it}: group verdict {v:?}"))?;
        if !nz(combined) {
            singular_seen[kind] += 1;
        }
    }
    ensure(singular_seen[1] > 100 && singular_seen[2] > 100, || {
        format!("too few singular instances: {singular_seen:?}")
    })
}

fn ac3_normalization() -> Check {
    // Closed-form antiderivatives of 1/lambda.
    let cases: Vec<(Profile, Box<dyn Fn(f64) -> f64>)> = vec![
        (Profile::Constant { value: -2.5 }, Box::new(|x| x / -2.5)),
        (Profile::Affine { a: 1.0, b: 1.0 }, Box::new(|x: f64| (1.0 + x).ln())),
        (Profile::Affine { a: -2.0, b: 1.5 }, Box::new(|x: f64| (1.0 + 1.5 * x / -2.0).ln() / 1.5)),
        (Profile::Exponential { a: 0.5, b: 2.0 }, Box::new(|x: f64| (1.0 - (-2.0 * x).exp()) / (0.5 * 2.0))),
        (Profile::Exponential { a: -1.0, b: -0.7 }, Box::new(|x: f64| (1.0 - (0.7 * x).exp()) / (-1.0 * -0.7))),
    ];
    for (profile, exact) in &cases {
        let f = VelocityField::new(FieldKind::Internal, profile.clone(), None).map_err(|e| e.to_string())?;
        for i in 1..=20 {
            let x = i as f64 / 20.0;
            let q = f.phi_by_quadrature(x).map_err(|e| e.to_string())?;
            let c = f.phi(x).map_err(|e| e.to_string())?;
            let e = exact(x);
            ensure((q - e).abs() <= 1e-10 * e.abs(), || format!("{profile:?} at {x}: quadrature {q} vs {e}"))?;
            ensure((c - e).abs() <= 1e-10 * e.abs(), || format!("{profile:?} at {x}: closed form {c} vs {e}"))?;
        }
    }

    // Round trip of sampled data through the normalized coordinate.
    let n_s = 1024;
    let h = 1.0 / n_s as f64;
    let data = |s: f64| (2.0 * PI * s).sin() + 0.5 * s;
    for profile in [Profile::Affine { a: 1.0, b: 1.0 }, Profile::Exponential { a: -1.0, b: 1.0 }] {
        let field = VelocityField::new(FieldKind::Internal, profile.clone(), None).unwrap();
        let p = compact_with_field(field);
        let np = normalize(&p).map_err(|e| e.to_string())?;
        let values: Vec<f64> = (0..=n_s).map(|i| data(i as f64 * h)).collect();
        let pushed = np.push_forward_internal(0, &values).map_err(|e| e.to_string())?;
        let back = np.pull_back_internal(0, &pushed).map_err(|e| e.to_string())?;
        let err = values.iter().zip(&back).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        // Interpolation error h^2/8 max|g''| for g = data and g = data o phibar^-1,
        // second derivatives by central differences on a fine grid.
        let inv = |x: f64| graph_transport::coefficients::invert_phi(&np.maps, graph_transport::coefficients::EdgeRef::Internal(0), x).unwrap();
        let composed = |x: f64| data(inv(x));
        let second = |g: &dyn Fn(f64) -> f64| {
            let dh = 1e-3;
            (1..1000).fold(0.0f64, |a, i| {
                let x = i as f64 / 1000.0;
                let lo = (x - dh).max(0.0);
                let hi = (x + dh).min(1.0);
                let mid = 0.5 * (lo + hi);
                let hh = 0.5 * (hi - lo);
                a.max(((g(hi) - 2.0 * g(mid) + g(lo)) / (hh * hh)).abs())
            })
        };
        let interp_err = h * h / 8.0 * second(&data).max(second(&composed));
        ensure(err <= 2.0 * interp_err, || {
            format!("{profile:?}: round trip error {err:e} exceeds 2 x {interp_err:e}")
        })?;
    }
    Ok(())
}

fn compact_with_field(field: VelocityField) -> TransportProblem {
    let p = catalog::periodic_edge(1.0);
    let bd = p.boundary.clone();
    TransportProblem::new(p.graph, vec![], vec![field], Similarity::Identity, Similarity::Identity, bd, 2.0).unwrap()
}

fn max_diff(a: &[EdgeProfile], b: &[EdgeProfile]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.values.iter().zip(&y.values).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

fn hat(c: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| (1.0 - (x - c).abs() / w).max(0.0)
}

fn ac4_oracle() -> Check {
    let problems = [("loop-swap", catalog::loop_graph(1.0, 1.0, 1.0, 1.0)), ("pumpkin-weighted", catalog::pumpkin_weighted(0.3))];
    for (name, p) in &problems {
        let ids = p.graph.edge_ids();
        // piecewise linear with breakpoints on the grid
        let n_s = 64;
        let f0: Vec<EdgeProfile> = ids
            .iter()
            .enumerate()
            .map(|(j, id)| {
                let f = hat(0.25 + 0.125 * j as f64, 0.125 + 0.0625 * j as f64);
                EdgeProfile::sample(id, 1.0, n_s, move |s| f(s) + 0.25 * s)
            })
            .collect();
        let traj = solve(p, &f0, &SimulationSettings::new(3.0, 1.0 / n_s as f64, n_s)).map_err(|e| e.to_string())?;
        for t in [1.0, 2.0, 3.0] {
            let frame = traj.frame_at(t).ok_or(format!("{name}: no frame at {t}"))?;
            let exact = oracle_adjacency(p, &f0, t, n_s).map_err(|e| e.to_string())?;
            let d = max_diff(&frame.profiles, &exact);
            ensure(d <= 1e-12, || format!("{name}: piecewise-linear data, t = {t}: difference {d:e}"))?;
        }

        let n_s = 512;
        let f0: Vec<EdgeProfile> = ids
            .iter()
            .enumerate()
            .map(|(j, id)| EdgeProfile::sample(id, 1.0, n_s, move |s| (2.0 * PI * (s + 0.3 * j as f64)).sin()))
            .collect();
        let traj = solve(p, &f0, &SimulationSettings::new(3.0, 1.0 / n_s as f64, n_s)).map_err(|e| e.to_string())?;
        for t in [1.0, 2.0, 3.0] {
            let frame = traj.frame_at(t).ok_or(format!("{name}: no frame at {t}"))?;
            let exact = oracle_adjacency(p, &f0, t, n_s).map_err(|e| e.to_string())?;
            let d = max_diff(&frame.profiles, &exact);
            ensure(d <= 5e-3, || format!("{name}: smooth data, t = {t}: difference {d:e}"))?;
        }
    }
    Ok(())
}

fn ac5_mass() -> Check {
    let n_s = 512;
    let dt = 1.0 / n_s as f64;
    // Smooth data vanishing at both ends, so the initial state satisfies the
    // vertex conditions.
    let p = catalog::pumpkin_weighted(0.3);
    let f0: Vec<EdgeProfile> = p
        .graph
        .edge_ids()
        .iter()
        .enumerate()
        .map(|(j, id)| EdgeProfile::sample(id, 1.0, n_s, move |s| (1.0 + j as f64) * (PI * s).sin().powi(2)))
        .collect();
    let traj = solve(&p, &f0, &SimulationSettings::new(3.0, dt, n_s)).map_err(|e| e.to_string())?;
    let m0 = traj.frames[0].mass;
    let drift = traj.frames.iter().fold(0.0f64, |a, f| a.max((f.mass - m0).abs() / m0));
    ensure(drift <= 1e-8, || format!("pumpkin-weighted: relative mass drift {drift:e}"))?;

    let p = catalog::loop_graph(1.0, 1.0, 0.5, 0.5);
    let f0: Vec<EdgeProfile> = ["e1", "e2"]
        .iter()
        .enumerate()
        .map(|(j, id)| EdgeProfile::sample(id, 1.0, n_s, move |s| (1.0 + j as f64) * (PI * s).sin().powi(2) + s * (1.0 - s)))
        .collect();
    let traj = solve(&p, &f0, &SimulationSettings::new(1.0, dt, n_s)).map_err(|e| e.to_string())?;
    let ratio = traj.frame_at(1.0).unwrap().mass / traj.frames[0].mass;
    ensure((ratio - 0.5).abs() <= 1e-8, || format!("halved loop: mass ratio {ratio}"))
}

fn ac6_rt0() -> Check {
    let mut problems: Vec<(String, TransportProblem)> = catalog::names()
        .iter()
        .map(|n| (n.to_string(), catalog::by_name(n).unwrap()))
        .filter(|(_, p)| !p.boundary.has_kernel() && p.boundary.atoms.is_empty())
        .collect();
    problems.push(("sink-degenerate".into(), catalog::sink_degenerate(1.0, 0.0)));
    problems.push(("loop-graph-singular".into(), catalog::loop_graph(0.0, 1.0, 1.0, 1.0)));
    for (name, p) in &problems {
        let r = discretize_rt0(p, None, 64).map_err(|e| format!("{name}: {e}"))?;
        let generator = semigroup(p) == Verdict::Generator;
        ensure((r.sigma_min > 1e-6) == generator, || {
            format!("{name}: sigma_min(R_t0) = {:e} but semigroup verdict is {generator}", r.sigma_min)
        })?;
    }
    let p = catalog::pumpkin_kirchhoff();
    for n in [16, 32, 64] {
        let s = discretize_rt0(&p, None, n).map_err(|e| e.to_string())?.sigma_min;
        ensure(s <= 1e-8, || format!("pumpkin-kirchhoff n = {n}: sigma_min {s:e}"))?;
    }
    Ok(())
}

fn ac7_spectral() -> Check {
    let ev = CharacteristicEvaluator::new(&catalog::periodic_edge(1.0)).map_err(|e| e.to_string())?;
    let scan = spectrum_scan(&ev, Region { re: (-1.0, 1.0), im: (-8.0, 8.0) }, 81);
    let expected = [-2.0 * PI, 0.0, 2.0 * PI];
    ensure(scan.zeros.len() == expected.len(), || format!("found zeros {:?}", scan.zeros))?;
    for (z, im) in scan.zeros.iter().zip(expected) {
        let d = C64::new(z.re, z.im - im).norm();
        ensure(d <= 1e-6, || format!("zero {:?} misses {im}i by {d:e}", z))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [catalog::periodic_edge(1.0), catalog::pumpkin_weighted(0.3), catalog::loop_graph(2.0, 3.0, 1.0, 0.5), catalog::five_four()] {
        let ev = CharacteristicEvaluator::new(&p).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let z = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-10.0..10.0));
            let res = (char_det(&ev, z.conj()) - char_det(&ev, z).conj()).norm();
            ensure(res <= 1e-12, || format!("Schwarz reflection residual {res:e} at {z}"))?;
        }
    }
    Ok(())
}

fn ac8_necessary() -> Check {
    let p = catalog::pumpkin_kirchhoff();
    let scan = necessary_condition_scan(&p, &default_lambda_grid(), 2.0).map_err(|e| e.to_string())?;
    ensure(scan.verdict == GrowthVerdict::DecaysToZero, || format!("verdict {:?}", scan.verdict))?;
    let cmin = normalize(&p).unwrap().maps.cbar_min();
    let expected = (-cmin).exp();
    let ratio = scan.decay_per_unit.ok_or("no decay ratio")?;
    ensure((ratio / expected - 1.0).abs() <= 0.2, || format!("decay per unit {ratio} vs {expected}"))?;
    ensure(semigroup(&p) == Verdict::NotGenerator, || "scan and check disagree".into())?;
    let w = necessary_condition_scan(&catalog::pumpkin_weighted(0.5), &default_lambda_grid(), 2.0).map_err(|e| e.to_string())?;
    ensure(w.verdict == GrowthVerdict::NotApplicable, || format!("weighted verdict {:?}", w.verdict))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Check, Duration); 8] = [
        ("AC1", "verdict table", ac1_verdicts, Duration::from_secs(1)),
        ("AC2", "determinant identity", ac2_determinant_identity, Duration::from_secs(5)),
        ("AC3", "normalization", ac3_normalization, Duration::from_secs(2)),
        ("AC4", "oracle equivalence", ac4_oracle, Duration::from_secs(10)),
        ("AC5", "mass conservation", ac5_mass, Duration::from_secs(10)),
        ("AC6", "R_t0 vs R0", ac6_rt0, Duration::from_secs(30)),
        ("AC7", "spectral zeros", ac7_spectral, Duration::from_secs(5)),
        ("AC8", "necessary-condition scan", ac8_necessary, Duration::from_secs(2)),
    ];
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let outcome = match result {
            Ok(()) if elapsed <= limit => Ok(()),
            Ok(()) => Err(format!("runtime {elapsed:.2?} exceeds {limit:?}")),
            Err(e) => Err(e),
        };
        match outcome {
            Ok(()) => println!("{id} PASS {name} ({elapsed:.2?}, limit {limit:?})"),
            Err(e) => {
                failed += 1;
                println!("{id} FAIL {name} ({elapsed:.2?}, limit {limit:?}): {e}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
