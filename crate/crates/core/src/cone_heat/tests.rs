use super::*;
use crate::link_spectrum::{eigenvalues, exponents, LinkSpec};

fn hl_table() -> ExponentTable {
    let link = LinkSpec::flat_torus(vec![vec![2.0 / 3.0, -1.0 / 3.0], vec![-1.0 / 3.0, 2.0 / 3.0]]);
    exponents(&eigenvalues(&link, 60.0).unwrap(), 3, (-8.0, 6.0)).unwrap()
}

fn sphere_table() -> ExponentTable {
    exponents(&eigenvalues(&LinkSpec::round_sphere(2), 60.0).unwrap(), 3, (-8.0, 6.0)).unwrap()
}

fn grid(n: usize) -> RadialGrid {
    RadialGrid::new(1.0, n, 2.0).unwrap()
}

fn manufactured(n: usize, dt: f64) -> (CauchyProblem, impl Fn(f64, f64) -> f64) {
    let p = CauchyProblem {
        spec: LaplaceTypeSpec::laplacian(3, 2.0),
        grid: grid(n),
        t_end: 0.5,
        dt,
        forcing: Forcing::Sum {
            terms: vec![Forcing::Power { coef: 1.0, power: 3.0 }, Forcing::TimePower { coef: -10.0, power: 1.0 }],
        },
        outer: Forcing::TimePower { coef: 1.0, power: 3.0 },
        inner: InnerBoundary::Extrapolate,
    };
    (p, |t: f64, r: f64| t * r.powi(3))
}

fn max_error(sol: &ModeSolution, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let mut e: f64 = 0.0;
    for (t, u) in sol.times.iter().zip(&sol.values) {
        for (r, v) in sol.nodes.iter().zip(u) {
            e = e.max((v - exact(*t, *r)).abs());
        }
    }
    e
}

#[test]
fn operator_examples() {
    let g = grid(200);
    let r = g.nodes();
    let op = radial_operator(&LaplaceTypeSpec::laplacian(3, 0.0), &g).unwrap();
    let scale: Vec<f64> = (1..r.len() - 1).map(|j| op.diag[j].abs()).collect();
    let ones = op.apply_interior(&vec![1.0; r.len()]);
    assert!(ones.iter().zip(&scale).all(|(v, s)| v.abs() < 1e-13 * s));

    let op = radial_operator(&LaplaceTypeSpec::laplacian(3, 2.0), &g).unwrap();
    let lin: Vec<f64> = r.to_vec();
    let cub: Vec<f64> = r.iter().map(|x| x.powi(3)).collect();
    // Away from the origin, where the grading leaves h/r = O(1/j).
    for (j, (a, b)) in op.apply_interior(&lin).iter().zip(op.apply_interior(&cub)).enumerate() {
        let x = r[j + 1];
        if x < 1.0 / 16.0 {
            continue;
        }
        assert!(a.abs() < 1e-3 / x, "L r at {x}: {a}");
        assert!((b - 10.0 * x).abs() < 2e-3 * 10.0 * x, "L r^3 at {x}: {b}");
    }
}

#[test]
fn rejects_non_laplace_type() {
    let mut spec = LaplaceTypeSpec::laplacian(3, 0.0);
    spec.delta = 0.0;
    assert!(radial_operator(&spec, &grid(50)).is_err());
    let mut spec = LaplaceTypeSpec::laplacian(3, 0.0);
    spec.drift = PowerProfile { coef: 1.0, power: -1.0 };
    assert!(spec.validate().is_err());
}

#[test]
fn stationarity_second_order() {
    for (m, lambda) in [(3usize, 2.0), (3, 6.0), (3, 8.0), (4, 5.0)] {
        let spec = LaplaceTypeSpec::laplacian(m, lambda);
        let alpha = spec.alpha_plus();
        let err = |n: usize| {
            let g = grid(n);
            let r = g.nodes();
            let u: Vec<f64> = r.iter().map(|x| x.powf(alpha)).collect();
            let op = radial_operator(&spec, &g).unwrap();
            // Relative to the size of each term of L u, which is ~ r^{α−2},
            // on a fixed interior range (the grading makes h/r scale-free at 0).
            op.apply_interior(&u)
                .iter()
                .zip(&r[1..])
                .filter(|(_, x)| **x >= 1.0 / 16.0)
                .map(|(v, x)| v.abs() / x.powf(alpha - 2.0))
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(100), err(200));
        assert!(e1 < 5e-2 && e1 / e2 > 3.5, "lambda = {lambda}: {e1} -> {e2}");
    }
}

#[test]
fn zero_data_zero_solution() {
    let p = CauchyProblem {
        spec: LaplaceTypeSpec::laplacian(3, 2.0),
        grid: grid(50),
        t_end: 0.1,
        dt: 0.01,
        forcing: Forcing::Zero,
        outer: Forcing::Zero,
        inner: InnerBoundary::Extrapolate,
    };
    let sol = solve_mode(&p).unwrap();
    assert_eq!(sol.times.len(), 11);
    assert!(sol.values.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn manufactured_solution_converges() {
    let run = |n: usize, dt: f64| {
        let (p, exact) = manufactured(n, dt);
        max_error(&solve_mode(&p).unwrap(), exact)
    };
    let (e1, e2) = (run(40, 1e-4), run(80, 1e-4));
    assert!(e1 / e2 > 3.4 && e1 / e2 < 4.6, "space: {e1} {e2}");
}

#[test]
fn backward_euler_first_order() {
    // Temporal error against a fine-step run on the same grid.
    let n = 60;
    let reference = solve_mode(&manufactured(n, 0.5 / 4096.0).0).unwrap();
    let err = |dt: f64| {
        let sol = solve_mode(&manufactured(n, dt).0).unwrap();
        let stride = (reference.times.len() - 1) / (sol.times.len() - 1);
        let mut e: f64 = 0.0;
        for (i, u) in sol.values.iter().enumerate() {
            for (a, b) in u.iter().zip(&reference.values[i * stride]) {
                e = e.max((a - b).abs());
            }
        }
        e
    };
    let (e1, e2) = (err(0.5 / 16.0), err(0.5 / 32.0));
    assert!(e1 / e2 > 1.7 && e1 / e2 < 2.3, "time: {e1} {e2}");
}

#[test]
fn comparison_principle() {
    let p = CauchyProblem {
        spec: LaplaceTypeSpec {
            m: 3,
            lambda: 6.0,
            drift: PowerProfile { coef: 0.7, power: 0.0 },
            potential: PowerProfile { coef: -0.5, power: -1.0 },
            delta: 1.0,
        },
        grid: grid(120),
        t_end: 0.5,
        dt: 0.01,
        forcing: Forcing::Power { coef: 1.0, power: 0.3 },
        outer: Forcing::Zero,
        inner: InnerBoundary::Extrapolate,
    };
    let sol = solve_mode(&p).unwrap();
    assert!(sol.values.iter().flatten().all(|v| *v >= 0.0));
    let zero_inner = solve_mode(&CauchyProblem { inner: InnerBoundary::DirichletZero, ..p }).unwrap();
    assert!(zero_inner.values.iter().flatten().all(|v| *v >= 0.0));
}

fn rate_problem(n: usize, spec: LaplaceTypeSpec) -> CauchyProblem {
    CauchyProblem {
        spec,
        grid: grid(n),
        t_end: 0.1,
        dt: 0.001,
        forcing: Forcing::Power { coef: 1.0, power: 0.5 },
        outer: Forcing::Zero,
        inner: InnerBoundary::Extrapolate,
    }
}

#[test]
fn remainder_rate_matches_weight() {
    let table = sphere_table();
    let sol = solve_mode(&rate_problem(400, LaplaceTypeSpec::laplacian(3, 0.0))).unwrap();
    let exp = extract_final(&sol, &table, 2.5, FitWindow::for_radius(1.0)).unwrap();
    let rate = exp.remainder_rate.unwrap();
    assert!((rate - 2.5).abs() < 0.15, "rate {rate}");
    assert!(exp.coefficient(0.0, 0).unwrap().abs() > 1e-3);
    assert!(exp.coefficient(0.0, 1).unwrap().abs() > 1e-3);
    assert!(rate >= 2.5 - 0.15);
}

#[test]
fn coefficients_match_fine_reference() {
    let table = sphere_table();
    let fit = |n: usize| {
        let sol = solve_mode(&rate_problem(n, LaplaceTypeSpec::laplacian(3, 0.0))).unwrap();
        extract_final(&sol, &table, 2.5, FitWindow::for_radius(1.0)).unwrap()
    };
    // Second-order convergence of the fitted coefficients.
    let (a, b, c) = (fit(400), fit(800), fit(1600));
    for k in [0, 1] {
        let [x, y, z] = [&a, &b, &c].map(|e| e.coefficient(0.0, k).unwrap());
        assert!((x - y).abs() > 3.0 * (y - z).abs(), "k = {k}: {x} {y} {z}");
        assert!((y - z).abs() < 1e-2 * z.abs(), "k = {k}: {y} vs {z}");
    }
}

#[test]
fn extraction_examples() {
    let g = grid(400);
    let r = g.nodes();
    let table = sphere_table();
    let w = FitWindow::for_radius(1.0);
    // 3r² on the λ = 6 mode (α = 2).
    let u: Vec<f64> = r.iter().map(|x| 3.0 * x * x).collect();
    let basis = [(2.0, 0)];
    let e = fit_profile(&r, &u, &basis, 2.4, w, 0.0).unwrap();
    assert!((e.coefficient(2.0, 0).unwrap() - 3.0).abs() < 1e-8);
    assert!(e.remainder_sup < 1e-10);
    // r^{2.5} on the λ = 12 mode (α = 3 lies above γ = 2.4): nothing to fit.
    let sol = ModeSolution {
        grid: g.clone(),
        nodes: r.clone(),
        times: vec![0.0, 1.0],
        values: vec![vec![0.0; r.len()], r.iter().map(|x| x.powf(2.5)).collect()],
        lambda: 12.0,
        m: 3,
    };
    let e = extract_final(&sol, &table, 2.4, w).unwrap();
    assert!(e.terms.is_empty());
    assert!((e.remainder_rate.unwrap() - 2.5).abs() < 1e-9);
    // Exceptional weight.
    assert!(matches!(extract_final(&sol, &table, 3.0, w), Err(Error::ExceptionalWeight { .. })));
}

#[test]
fn synthesize_and_recover() {
    let r = grid(400).nodes();
    let basis = [(0.0, 0), (0.0, 1), (0.0, 2)];
    let coef = [1.3, -0.7, 2.1];
    let u: Vec<f64> =
        r.iter().map(|x| basis.iter().zip(&coef).map(|((a, k), c)| c * x.powf(a + 2.0 * *k as f64)).sum()).collect();
    let e = fit_profile(&r, &u, &basis, 4.5, FitWindow { lo: 1.0 / 64.0, hi: 0.5 }, 0.0).unwrap();
    for (t, c) in e.terms.iter().zip(coef) {
        assert!((t.coefficient - c).abs() < 1e-8, "{t:?}");
    }
    let close = [(1.0, 0), (1.03, 0)];
    let e = fit_profile(&r, &r, &close, 2.0, FitWindow::for_radius(1.0), 0.0).unwrap();
    assert!(!e.warnings.is_empty());
}

#[test]
fn perturbation_keeps_leading_exponent() {
    // λ = 2 mode: leading behavior r^{α₊} = r.
    let leading = |spec: LaplaceTypeSpec| {
        let mut p = rate_problem(400, spec);
        p.forcing = Forcing::Power { coef: 1.0, power: 0.0 };
        let sol = solve_mode(&p).unwrap();
        let (radii, sups) = crate::weighted_norms::dyadic_suprema(&sol.nodes, sol.last(), 1.0 / 2048.0, 1.0 / 64.0);
        crate::weighted_norms::decay_rate(&radii, &sups).unwrap().rate
    };
    let pure = leading(LaplaceTypeSpec::laplacian(3, 2.0));
    let perturbed = leading(LaplaceTypeSpec {
        m: 3,
        lambda: 2.0,
        drift: PowerProfile { coef: 0.8, power: -0.5 },
        potential: PowerProfile { coef: -0.6, power: -1.5 },
        delta: 0.5,
    });
    assert!((pure - 1.0).abs() < 0.05, "{pure}");
    assert!((perturbed - pure).abs() < 0.05, "{pure} vs {perturbed}");
}

#[test]
fn extension_support() {
    let terms = [AsymptoticTerm { alpha: 0.0, k: 1, coefficient: 1.0 }];
    let ext = extend_asymptotic(&terms, 0.5).unwrap();
    assert_eq!(ext.eval(0.2), 0.2 * 0.2);
    assert_eq!(ext.eval(0.6), 0.0);
    assert_eq!(extend_asymptotic(&[], 0.5).unwrap().eval(0.1), 0.0);

    // L(χv) − χ·Lv vanishes away from the transition annulus.
    let g = grid(400);
    let r = g.nodes();
    let op = radial_operator(&LaplaceTypeSpec::laplacian(3, 0.0), &g).unwrap();
    let ext_v: Vec<f64> = r.iter().map(|x| ext.eval(*x)).collect();
    let v: Vec<f64> = r.iter().map(|x| x * x).collect();
    let lv = op.apply_interior(&v);
    let l_ext = op.apply_interior(&ext_v);
    let mut inside_annulus = 0.0f64;
    for (j, x) in r[1..r.len() - 1].iter().enumerate() {
        let chi = crate::weighted_norms::smooth_cutoff(x / 0.5);
        let d = l_ext[j] - chi * lv[j];
        // Stencils reaching into the annulus see one node past its edge.
        if *x < 0.25 * 0.97 || *x > 0.5 * 1.03 {
            assert!(d.abs() < 1e-9, "residual {d} at r = {x}");
        } else {
            inside_annulus = inside_annulus.max(d.abs());
        }
    }
    assert!(inside_annulus > 1e-3);
}

#[test]
fn fredholm_examples() {
    let t = hl_table();
    let g = |x: f64| WeightVector::new(vec![x]).unwrap();
    assert_eq!(fredholm_index(std::slice::from_ref(&t), &g(2.1)).unwrap(), -13);
    assert_eq!(fredholm_index(std::slice::from_ref(&t), &g(-0.5)).unwrap(), 0);
    assert!(matches!(fredholm_index(std::slice::from_ref(&t), &g(2.0)), Err(Error::ExceptionalWeight { .. })));
    assert_eq!(fredholm_index_with_asymptotics(std::slice::from_ref(&t), &g(2.1)).unwrap(), 0);
    assert!(matches!(
        fredholm_index_with_asymptotics(std::slice::from_ref(&t), &g(-1.5)),
        Err(Error::WeightOutOfRange { .. })
    ));
    let e = fredholm_index_with_asymptotics(&[t.clone(), t.clone()], &g(3.0).clone());
    assert!(e.is_err());
    let two = WeightVector::new(vec![2.1, 1.0]).unwrap();
    match fredholm_index(&[t.clone(), t], &two) {
        Err(Error::ExceptionalWeight { components }) => assert_eq!(components[0].0, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn modes_solve_in_parallel() {
    let problems: Vec<CauchyProblem> =
        [0.0, 2.0, 6.0].iter().map(|l| rate_problem(60, LaplaceTypeSpec::laplacian(3, *l))).collect();
    let sols = solve_modes(&problems);
    for (p, s) in problems.iter().zip(sols) {
        assert_eq!(s.unwrap(), solve_mode(p).unwrap());
    }
}

#[test]
fn forcing_table_csv() {
    let csv = "t,r,f\n0,0,0\n0,1,1\n1,0,2\n1,1,3\n";
    let table = ForcingTable::from_csv(csv.as_bytes()).unwrap();
    let f = Forcing::Table(table);
    assert!((f.eval(0.5, 0.5) - 1.5).abs() < 1e-15);
    assert!(ForcingTable::from_csv("0,0,1\n1,1,2\n".as_bytes()).is_err());
}
