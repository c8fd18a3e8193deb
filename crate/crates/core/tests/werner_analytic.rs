use kext_core::linalg::{Dense, HermitianOperator};
use kext_core::solver::{lambda_min_alpha, KExtProblem};
use kext_core::states::{werner, BellKind, WernerParams};
use kext_core::werner::{
    alpha_max_k1, beta_coefficients, beta_criterion, beta_criterion_margin, mnp_operator, mnp_threshold_numeric,
    reduced_eigenvalues, reduced_matrix, st_coefficients, st_coefficients_from_traces, MnPTradeoff,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn paulis() -> [Dense<Complex64>; 3] {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        Dense::identity(2),
        Dense::from_vec(2, vec![z, o, o, z]),
        Dense::from_vec(2, vec![z, -i, i, z]),
    ]
}

fn qubit_expansion(v: &[f64; 4]) -> Dense<Complex64> {
    let [id, x, y] = paulis();
    id.scaled(v[0]).add(&x.scaled(v[1])).add(&y.scaled(v[2]))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn trace_formula_reproduces_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let g: f64 = rng.random_range(-1.0..=1.0);
        let a: f64 = rng.random_range(0.0..=1.0);
        let table = st_coefficients(g, a);
        let mirrored = st_coefficients(-g, a);
        for d in [2, 3] {
            let tr = st_coefficients_from_traces(d, g, a).unwrap();
            for i in 0..4 {
                assert!((tr.t[i] - table.t[i]).abs() < 1e-12);
                assert!((tr.t_tilde[i] - table.t_tilde[i]).abs() < 1e-12);
                // orientation of the qubit frame: traces at γ equal the table at −γ
                assert!((tr.s[i] - mirrored.s[i]).abs() < 1e-12, "d={d} s[{i}]");
                assert!((tr.s_tilde[i] - mirrored.s_tilde[i]).abs() < 1e-12);
            }
            assert!((tr.s[0] - table.s[0]).abs() < 1e-12);
            assert!((tr.s_plus - table.s_plus).abs() < 1e-12);
            assert!((tr.t_plus - table.t_plus).abs() < 1e-12);
            assert_eq!(tr.t_minus, 0.0);
            if d >= 3 {
                assert!((tr.s_minus - table.s_minus).abs() < 1e-12);
            }
            let a = sorted(reduced_eigenvalues(&tr).to_vec());
            let b = sorted(reduced_eigenvalues(&table).to_vec());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn reduced_matrix_is_the_pauli_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let co = st_coefficients(rng.random_range(-1.0..=1.0), rng.random_range(0.0..=1.0));
        let x1 = qubit_expansion(&co.s);
        let x2 = qubit_expansion(&co.s_tilde);
        let y1 = qubit_expansion(&co.t);
        let y2 = qubit_expansion(&co.t_tilde);
        let expect = x1.kron(&y1).add(&x2.kron(&y2)).scaled(0.5);
        let m = reduced_matrix(&co).to_complex_matrix();
        assert!(m.max_abs_diff(&expect) < 1e-14);
    }
}

#[test]
fn closed_form_eigenvalues_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let co = st_coefficients(rng.random_range(-1.0..=1.0), rng.random_range(0.0..=1.0));
        let dense = reduced_matrix(&co).eigenvalues().unwrap();
        let closed = sorted(reduced_eigenvalues(&co).to_vec());
        for (x, y) in dense.iter().zip(&closed) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn reduction_sign_matches_dense_probe() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut checked = 0;
    while checked < 50 {
        let g: f64 = rng.random_range(-1.0..=1.0);
        let a: f64 = rng.random_range(0.5..=1.0);
        if (a - alpha_max_k1(g)).abs() < 1e-6 {
            continue;
        }
        let w = werner(WernerParams::from_gamma(3, g).unwrap());
        let p = KExtProblem::new(w, 1, 1).unwrap().with_bell(BellKind::PsiMinus);
        let dense = lambda_min_alpha(&p, a).unwrap();
        let reduced = reduced_eigenvalues(&st_coefficients(g, a))
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(
            dense < 0.0,
            reduced < 0.0,
            "g={g} a={a}: dense {dense}, reduced {reduced}"
        );
        checked += 1;
    }
}

#[test]
fn beta_criterion_matches_dense_z() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut checked = 0;
    while checked < 60 {
        let d = if checked % 2 == 0 { 2 } else { 3 };
        let g: f64 = rng.random_range(-1.0..=1.0);
        let a: f64 = rng.random_range(0.0..=1.0);
        let t = MnPTradeoff::from_fidelities(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        if !t.is_feasible() {
            continue;
        }
        let beta = beta_coefficients(&st_coefficients(g, a), a, &t);
        let w = werner(WernerParams::from_gamma(d, g).unwrap());
        let lmin = mnp_operator(&w, a, &t).unwrap().eig_min().unwrap();
        if beta_criterion_margin(&beta).abs() < 1e-9 || lmin.abs() < 1e-12 {
            continue;
        }
        assert_eq!(beta_criterion(&beta), lmin >= 0.0, "d={d} g={g} a={a} t={t:?}");
        checked += 1;
    }
}

#[test]
fn mnp_threshold_at_antisymmetric_werner() {
    let w = werner(WernerParams::from_gamma(3, -1.0).unwrap());
    assert!(mnp_threshold_numeric(&w, 1e-8).unwrap() >= 1.0 - 1e-6);
}

#[test]
fn mnp_operator_layout() {
    let w = werner(WernerParams::from_gamma(2, 0.2).unwrap());
    let z = mnp_operator(&w, 0.8, &MnPTradeoff::on_ellipse(0.4)).unwrap();
    assert_eq!(z.layout().labels(), vec!["A", "B", "E"]);
    let _: &HermitianOperator = &z;
}
