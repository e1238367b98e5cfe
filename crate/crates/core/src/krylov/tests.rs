use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::assembly::{assemble_global, BoundaryCondition, ProblemSpec};
use crate::linalg::{operator_to_dense, CsrMatrix, Identity};
use crate::mesh::{cell_vertex_graph, q1_dof_map, MarkScheme, Mesh};
use crate::partition::{extend_overlap_elements, partition_geometric};
use crate::schwarz::{assemble_robin_matrices, build_one_level, LocalSource, Variant};

fn diag(v: &[f64]) -> CsrMatrix<f64> {
    let t: Vec<_> = v.iter().enumerate().map(|(i, &x)| (i, i, x)).collect();
    CsrMatrix::from_triplets(v.len(), v.len(), &t).unwrap()
}

fn residual<S: Scalar>(a: &CsrMatrix<S>, x: &[S], b: &[S]) -> f64 {
    let ax = a.spmv(x).unwrap();
    norm2(&b.iter().zip(&ax).map(|(p, q)| *p - *q).collect::<Vec<_>>()) / norm2(b)
}

fn poisson(nx: usize) -> (Mesh, CsrMatrix<f64>, Vec<f64>) {
    let m = Mesh::structured(nx, nx, 1.0, 1.0, &MarkScheme::default()).unwrap();
    let spec = ProblemSpec::poisson(1.0).with_bc("boundary", BoundaryCondition::Dirichlet(0.0));
    let s = assemble_global::<f64>(&m, &q1_dof_map(&m), &spec).unwrap();
    (m, s.a, s.b)
}

fn as_preconditioner(m: &Mesh, a: &CsrMatrix<f64>, px: usize, k: usize) -> crate::schwarz::SchwarzPreconditioner<f64> {
    let p = partition_geometric(m, px, px).unwrap();
    let d = extend_overlap_elements(&p, &cell_vertex_graph(m), k, &q1_dof_map(m), m).unwrap();
    build_one_level(a, &d, Variant::As, LocalSource::Extract).unwrap()
}

#[test]
fn gmres_identity_takes_one_step() {
    let b = [1.0, -2.0, 3.0];
    let (x, st) = gmres(&Identity(3), &b, None, &KrylovOptions::default()).unwrap();
    assert_eq!(st.iterations, 1);
    assert!(st.converged);
    assert_eq!(x, b.to_vec());
    assert_eq!(st.residual_history[0], 1.0);
}

#[test]
fn gmres_two_by_two() {
    let a = diag(&[2.0, 1.0]);
    let (x, st) = gmres(&a, &[2.0, 1.0], None, &KrylovOptions::default()).unwrap();
    assert!(st.iterations <= 2 && st.converged);
    assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
}

#[test]
fn gmres_happy_breakdown_in_invariant_subspace() {
    let a = diag(&[1.0, 2.0, 3.0, 4.0, 5.0]);
    let b = [1.0, 0.0, 0.0, 1.0, 0.0];
    let (x, st) = gmres(&a, &b, None, &KrylovOptions::default()).unwrap();
    assert!(st.converged && st.iterations <= 2);
    assert!(residual(&a, &x, &b) < 1e-14);
}

#[test]
fn gmres_reports_maxit_without_convergence() {
    let a = diag(&(1..=30).map(|i| i as f64).collect::<Vec<_>>());
    let b = vec![1.0; 30];
    let opts = KrylovOptions {
        maxit: 5,
        ..Default::default()
    };
    let (_, st) = gmres(&a, &b, None, &opts).unwrap();
    assert!(!st.converged);
    assert_eq!(st.iterations, 5);
    assert_eq!(st.residual_history.len(), 6);
}

#[test]
fn restarted_gmres_converges() {
    let (_, a, b) = poisson(8);
    let opts = KrylovOptions {
        restart: Some(5),
        ..Default::default()
    };
    let (x, st) = gmres(&a, &b, None, &opts).unwrap();
    assert!(st.converged);
    assert!(residual(&a, &x, &b) <= 1e-8);
}

#[test]
fn explicit_identity_preconditioner_is_bitwise_neutral() {
    let (_, a, b) = poisson(6);
    let (x1, s1) = gmres(&a, &b, None, &KrylovOptions::default()).unwrap();
    let (x2, s2) = gmres(&a, &b, Some(&Identity(a.n_rows())), &KrylovOptions::default()).unwrap();
    assert_eq!(x1, x2);
    assert_eq!(s1.residual_history, s2.residual_history);
}

#[test]
fn complex_gmres_with_oras() {
    let m = Mesh::structured(8, 24, 2.0, 6.0, &MarkScheme::waveguide()).unwrap();
    let spec = ProblemSpec::waveguide();
    let s = assemble_global::<Complex64>(&m, &q1_dof_map(&m), &spec).unwrap();
    let p = partition_geometric(&m, 1, 2).unwrap();
    let d = extend_overlap_elements(&p, &cell_vertex_graph(&m), 1, &q1_dof_map(&m), &m).unwrap();
    let bi = assemble_robin_matrices(&m, &d, &spec, Complex64::new(1.0, 0.0)).unwrap();
    let pc = build_one_level(&s.a, &d, Variant::Oras, LocalSource::Assembled(bi)).unwrap();
    let (x, st) = gmres(&s.a, &s.b, Some(&pc), &KrylovOptions::default()).unwrap();
    assert!(st.converged);
    assert!(residual(&s.a, &x, &s.b) <= 1e-8);
    assert!(st.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
}

#[test]
fn pcg_examples() {
    let (x, st) = pcg(&Identity(4), &[1.0, 2.0, 3.0, 4.0], None, &KrylovOptions::default()).unwrap();
    assert_eq!(st.iterations, 1);
    assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0]);
    assert!((estimate_condition(&st).unwrap() - 1.0).abs() < 1e-14);

    let a = diag(&[1.0, 10.0]);
    let (x, st) = pcg(&a, &[1.0, 1.0], None, &KrylovOptions::default()).unwrap();
    assert!(st.iterations <= 2 && st.converged);
    assert!((x[1] - 0.1).abs() < 1e-12);
    assert!((estimate_condition(&st).unwrap() - 10.0).abs() < 1e-8);
}

#[test]
fn pcg_rejects_indefinite_operators() {
    let a = diag(&[1.0, -1.0]);
    let err = pcg(&a, &[1.0, 1.0], None, &KrylovOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NonPositiveCurvature { .. }));
}

#[test]
fn pcg_kappa_matches_dense_eigenvalues() {
    let (m, a, b) = poisson(8);
    let pc = as_preconditioner(&m, &a, 2, 1);
    let (_, st) = pcg(&a, &b, Some(&pc), &KrylovOptions::default()).unwrap();
    let kappa = estimate_condition(&st).unwrap();

    // Eigenvalues of M^{-1} A via the symmetric form L^T A L, M^{-1} = L L^T.
    let n = a.n_rows();
    let minv = operator_to_dense::<f64>(&pc).unwrap();
    let minv = DMatrix::from_fn(n, n, |i, j| minv[i][j]);
    let ad = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let l = minv.cholesky().unwrap().l();
    let sym = l.transpose() * ad * &l;
    let ev = sym.symmetric_eigenvalues();
    let exact = ev.max() / ev.min();
    assert!((kappa - exact).abs() <= 0.1 * exact, "lanczos {kappa} vs dense {exact}");
}

#[test]
fn kappa_estimate_grows_with_iterations() {
    let (m, a, b) = poisson(12);
    let pc = as_preconditioner(&m, &a, 3, 1);
    let (_, full) = pcg(&a, &b, Some(&pc), &KrylovOptions::default()).unwrap();
    let mut last = 0.0;
    for k in 1..=full.lanczos_diag.len() {
        let opts = KrylovOptions {
            maxit: k,
            ..Default::default()
        };
        let (_, st) = pcg(&a, &b, Some(&pc), &opts).unwrap();
        let kappa = estimate_condition(&st).unwrap();
        assert!(kappa >= last * (1.0 - 1e-10));
        last = kappa;
    }
}

#[test]
fn residual_csv() {
    let (_, st) = gmres(&diag(&[2.0, 1.0]), &[2.0, 1.0], None, &KrylovOptions::default()).unwrap();
    let mut out = Vec::new();
    st.write_residual_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("iteration,relative_residual\n0,1e0\n"));
}

fn spd_matrix(n: usize, seed: &[f64]) -> CsrMatrix<f64> {
    let mut t = Vec::new();
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            if i != j && (i + j) % 3 == 0 {
                let v = seed[(i * n + j) % seed.len()] * 0.5;
                let v = if i < j { v } else { seed[(j * n + i) % seed.len()] * 0.5 };
                t.push((i, j, v));
                row += v.abs();
            }
        }
        t.push((i, i, row + 1.0 + seed[i % seed.len()].abs()));
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn gmres_and_pcg_agree_on_spd(n in 2usize..=20, seed in proptest::collection::vec(-1.0f64..1.0, 8..30)) {
        let a = spd_matrix(n, &seed);
        let b: Vec<f64> = (0..n).map(|i| seed[i % seed.len()] + 0.3).collect();
        let jacobi = diag(&a.diagonal().iter().map(|d| 1.0 / d).collect::<Vec<_>>());
        let (xg, sg) = gmres(&a, &b, Some(&jacobi), &KrylovOptions::default()).unwrap();
        let (xc, sc) = pcg(&a, &b, Some(&jacobi), &KrylovOptions::default()).unwrap();
        prop_assert!(sg.converged && sc.converged);
        prop_assert!(sc.iterations <= sg.iterations + 2);
        let scale = norm2(&xg);
        for (p, q) in xg.iter().zip(&xc) {
            prop_assert!((p - q).abs() <= 1e-8 * scale.max(1.0));
        }
        prop_assert!(sg.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
        prop_assert!(residual(&a, &xg, &b) <= 1e-8);
    }
}
