use neim_core::deim::deim_select;
use neim_core::neim::build_training_grid;
use neim_core::pod::{compute_pod, Truncation};
use neim_core::scalar::norm2;
use neim_core::testbeds::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn exp1_solutions_satisfy_the_discrete_equation() {
    let p = Exp1Problem::standard();
    for mu in p.training_params() {
        let v = p.solve(mu).unwrap();
        assert_eq!((v[0], v[99]), (0.0, 0.0));
        let av = p.grid.apply_operator(&v);
        let f = p.forcing(mu);
        let res: Vec<f64> = (1..99).map(|i| av[i] - f[i]).collect();
        assert!(norm_inf(&res) <= 1e-10, "mu = {mu}");
    }
}

#[test]
fn exp2_solutions_converge_quadratically() {
    let p = Exp2Problem::standard();
    for mu in p.training_params() {
        let rep = p.newton(mu).unwrap();
        assert!(norm_inf(&p.residual(&rep.v, mu)) <= 1e-10);
        assert_eq!((rep.v[0], rep.v[99]), (0.0, 0.0));
        let r: Vec<f64> = rep.residuals.iter().copied().filter(|&x| x > 1e-12).collect();
        let n = r.len();
        assert!(n >= 3, "mu = {mu}: {r:?}");
        let last = r[n - 1] / r[n - 2];
        let prev = r[n - 2] / r[n - 3];
        assert!(last <= prev * prev * 10.0, "mu = {mu}: {r:?}");
    }
}

#[test]
fn exp2_solve_is_deterministic() {
    let p = Exp2Problem::standard();
    let a = p.solve(2.3).unwrap();
    let b = p.solve(2.3).unwrap();
    assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
}

#[test]
fn nonlinearity_derivative_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let x = rng.gen_range(-1.0..1.0);
        let v = rng.gen_range(-1.0..1.0);
        let mu = rng.gen_range(1.0..std::f64::consts::PI);
        let h = 1e-6;
        let fd = (exp2_nonlinearity(x, v + h, mu) - exp2_nonlinearity(x, v - h, mu)) / (2.0 * h);
        let exact = exp2_nonlinearity_dv(x, v, mu);
        assert!((fd - exact).abs() <= 1e-7 * exact.abs().max(1.0));
    }
}

#[test]
fn exp1_training_grid_ignores_the_state() {
    let p = Exp1Problem::new(Grid1D::default(), 7);
    let snaps = p.snapshots().unwrap();
    let basis = compute_pod(&snaps, Truncation::Rank(5)).unwrap();
    let grid = build_training_grid(&snaps, &basis, |v, mu| p.nonlinearity(v, mu[0])).unwrap();
    for j in 0..7 {
        for i in 1..7 {
            assert_eq!(grid.g(i, j), grid.g(0, j));
        }
    }
}

#[test]
fn exp1_deim_interpolates_selected_rows() {
    let p = Exp1Problem::standard();
    let snaps = p.snapshots().unwrap();
    let basis = compute_pod(&snaps, Truncation::Rank(30)).unwrap();
    let nl: Vec<Vec<f64>> = p.training_params().iter().map(|&mu| p.forcing(mu)).collect();
    let deim = deim_select(&nl, 30, &basis).unwrap();
    for f in &nl {
        let res = deim.residual(f).unwrap();
        for &i in deim.indices() {
            assert!(res[i].abs() <= 1e-12);
        }
    }
}

#[test]
fn exact_surrogate_recovers_full_solution() {
    let p = Exp2Problem::standard();
    let snaps = p.snapshots().unwrap();
    let basis = compute_pod(&snaps, Truncation::Rank(8)).unwrap();
    for mu in [1.11, 2.0, 3.05] {
        let sol = rom_solve_exp2(&p, &basis, &snaps, Surrogate::Exact, mu).unwrap();
        let lifted = basis.lift(&sol.reduced).unwrap();
        let full = p.solve(mu).unwrap();
        let projected = basis.lift(&basis.project(&full).unwrap()).unwrap();
        let trunc: Vec<f64> = full.iter().zip(&projected).map(|(a, b)| a - b).collect();
        let err: Vec<f64> = full.iter().zip(&lifted).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) <= 10.0 * norm2(&trunc) + 1e-8, "mu = {mu}");
    }
}

#[test]
fn one_dimensional_reduced_newton() {
    let p = Exp2Problem::standard();
    let snaps = p.snapshots().unwrap();
    let basis = compute_pod(&snaps, Truncation::Rank(1)).unwrap();
    let mu = 1.9;
    let sol = rom_solve_exp2(&p, &basis, &snaps, Surrogate::Exact, mu).unwrap();
    let a = p.reduced_operator(&basis)[(0, 0)];
    let scalar_residual = |t: f64| a * t - p.reduced_nonlinearity(&basis, &[t], mu).unwrap()[0];
    assert!(scalar_residual(sol.reduced[0]).abs() <= 1e-8);
    let mut t = basis.project(&snaps.snapshots()[26]).unwrap()[0];
    for _ in 0..30 {
        let h = 1e-7;
        let d = (scalar_residual(t + h) - scalar_residual(t - h)) / (2.0 * h);
        t -= scalar_residual(t) / d;
    }
    assert!((t - sol.reduced[0]).abs() <= 1e-8 * t.abs().max(1.0));
}

#[test]
fn deim_surrogate_tracks_exact_reduced_solution() {
    let p = Exp2Problem::standard();
    let snaps = p.snapshots().unwrap();
    let basis = compute_pod(&snaps, Truncation::Rank(10)).unwrap();
    let nl: Vec<Vec<f64>> = snaps
        .snapshots()
        .iter()
        .zip(p.training_params())
        .map(|(v, mu)| p.nonlinearity(v, mu))
        .collect();
    let deim = deim_select(&nl, 10, &basis).unwrap();
    let mu = 2.71;
    let a = rom_solve_exp2(&p, &basis, &snaps, Surrogate::Exact, mu).unwrap();
    let b = rom_solve_exp2(&p, &basis, &snaps, Surrogate::Deim(&deim), mu).unwrap();
    let gap: Vec<f64> = a.reduced.iter().zip(&b.reduced).map(|(x, y)| x - y).collect();
    assert!(norm2(&gap) <= 1e-6, "gap {:e}", norm2(&gap));
}

#[test]
fn error_metric_over_test_sweep() {
    let test = parameter_grid(DEFAULT_TEST_COUNT);
    assert_eq!(test.len(), 500);
    let d = avg_abs_error::<(), _, _>(|mu| Ok(vec![mu, 3.0, 4.0]), |mu| Ok(vec![mu, 0.0, 0.0]), &test).unwrap();
    assert!((d - 5.0).abs() < 1e-15);
}
