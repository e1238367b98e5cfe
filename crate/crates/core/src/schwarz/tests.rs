use nalgebra::DMatrix;
use num_complex::Complex64;

use super::*;
use crate::assembly::{assemble_global, BoundaryCondition, ProblemSpec};
use crate::linalg::{operator_to_dense, Identity};
use crate::mesh::{cell_vertex_graph, dual_graph, q1_dof_map, MarkScheme, Mesh};
use crate::partition::{extend_overlap_elements, partition_geometric, partition_graph_greedy, PartitionKind};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn poisson(nx: usize, ny: usize) -> (Mesh, CsrMatrix<f64>) {
    let m = Mesh::structured(nx, ny, 1.0, 1.0, &MarkScheme::default()).unwrap();
    let spec = ProblemSpec::poisson(1.0).with_bc("boundary", BoundaryCondition::Dirichlet(0.0));
    let a = assemble_global::<f64>(&m, &q1_dof_map(&m), &spec).unwrap().a;
    (m, a)
}

fn waveguide(nx: usize, ny: usize) -> (Mesh, CsrMatrix<Complex64>) {
    let m = Mesh::structured(nx, ny, 2.0, 6.0, &MarkScheme::waveguide()).unwrap();
    let a = assemble_global::<Complex64>(&m, &q1_dof_map(&m), &ProblemSpec::waveguide()).unwrap().a;
    (m, a)
}

fn decompose(m: &Mesh, px: usize, py: usize, k: usize) -> OverlappingDecomposition {
    let p = partition_geometric(m, px, py).unwrap();
    extend_overlap_elements(&p, &cell_vertex_graph(m), k, &q1_dof_map(m), m).unwrap()
}

fn to_dmatrix<S: Scalar>(rows: &[Vec<S>]) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j].to_complex())
}

fn dense_of<S: Scalar>(op: &dyn LinearOperator<S>) -> DMatrix<Complex64> {
    to_dmatrix(&operator_to_dense(op).unwrap())
}

/// Literally forms `sum_i P_i D_i L_i^{-1} R~_i` (plus `Phi A_0^{-1} Phi^T`).
fn dense_oracle<S: Scalar>(
    a: &CsrMatrix<S>,
    decomp: &OverlappingDecomposition,
    variant: Variant,
    robin: Option<&[CsrMatrix<S>]>,
    two_level: bool,
) -> DMatrix<Complex64> {
    let n = a.n_rows();
    let ad = to_dmatrix(&a.to_dense());
    let mut count = vec![0usize; n];
    for s in decomp.subdomains() {
        for &d in &s.dofs {
            count[d] += 1;
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (i, s) in decomp.subdomains().iter().enumerate() {
        let (set, local) = if variant.is_optimized() {
            (s.dofs.clone(), to_dmatrix(&robin.unwrap()[i].to_dense()))
        } else {
            let set = s.interior.clone();
            let l = DMatrix::from_fn(set.len(), set.len(), |p, q| ad[(set[p], set[q])]);
            (set, l)
        };
        let mut r = DMatrix::<Complex64>::zeros(set.len(), n);
        for (p, &d) in set.iter().enumerate() {
            if !(variant.is_optimized() && s.interface.contains(&d)) {
                r[(p, d)] = c(1.0);
            }
        }
        let mut pd = DMatrix::<Complex64>::zeros(n, set.len());
        for (p, &d) in set.iter().enumerate() {
            let w = match variant {
                Variant::As | Variant::Oas => 1.0,
                Variant::Ras | Variant::Oras => f64::from(u8::from(decomp.owner()[d] == i)),
                Variant::Sas => 1.0 / count[d] as f64,
            };
            pd[(d, p)] = c(w);
        }
        m += pd * local.try_inverse().unwrap() * r;
    }
    if two_level {
        let nc = decomp.n_subdomains();
        let phi = DMatrix::from_fn(n, nc, |d, p| c(f64::from(u8::from(decomp.owner()[d] == p))));
        let a0 = phi.transpose() * &ad * &phi;
        m += &phi * a0.try_inverse().unwrap() * phi.transpose();
    }
    m
}

fn rel_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn one_level_variants_match_dense_oracle() {
    for (nx, ny, px, py, k) in [(4, 1, 2, 1, 1), (6, 6, 2, 2, 1), (6, 5, 3, 1, 2), (5, 6, 2, 2, 1)] {
        let (m, a) = poisson(nx, ny);
        let d = decompose(&m, px, py, k);
        for variant in [Variant::As, Variant::Sas, Variant::Ras] {
            for two in [false, true] {
                let mut pc = build_one_level(&a, &d, variant, LocalSource::Extract).unwrap();
                if two {
                    pc = build_two_level(pc, &a).unwrap();
                }
                let got = dense_of(&pc);
                let want = dense_oracle(&a, &d, variant, None, two);
                assert!(rel_diff(&got, &want) < 1e-12, "{variant} {nx}x{ny} k={k} two={two}");
            }
        }
    }
}

#[test]
fn optimized_variants_match_dense_oracle() {
    for (nx, ny, px, py, k) in [(4, 6, 1, 2, 1), (6, 6, 2, 2, 1), (4, 6, 2, 2, 0)] {
        let (m, a) = waveguide(nx, ny);
        let d = decompose(&m, px, py, k);
        let b = assemble_robin_matrices::<Complex64>(&m, &d, &ProblemSpec::waveguide(), c(1.0)).unwrap();
        for variant in [Variant::Oas, Variant::Oras] {
            let pc = build_one_level(&a, &d, variant, LocalSource::Assembled(b.clone())).unwrap();
            let want = dense_oracle(&a, &d, variant, Some(&b), false);
            assert!(rel_diff(&dense_of(&pc), &want) < 1e-12, "{variant} {nx}x{ny}");
        }
    }
}

#[test]
fn single_subdomain_as_is_exact() {
    let (m, a) = poisson(5, 4);
    let d = decompose(&m, 1, 1, 1);
    let pc = build_one_level(&a, &d, Variant::As, LocalSource::Extract).unwrap();
    let q = dense_of(&schwarz_operator(&pc, &a).unwrap());
    assert!((q - DMatrix::<Complex64>::identity(a.n_rows(), a.n_rows())).norm() < 1e-12);
}

#[test]
fn ras_of_identity_is_identity() {
    let m = Mesh::structured(4, 1, 4.0, 1.0, &MarkScheme::default()).unwrap();
    let d = decompose(&m, 2, 1, 1);
    let id = CsrMatrix::<f64>::identity(m.n_vertices());
    let pc = build_one_level(&id, &d, Variant::Ras, LocalSource::Extract).unwrap();
    let r: Vec<f64> = (0..m.n_vertices()).map(|i| (i * i) as f64 - 3.5).collect();
    assert_eq!(pc.apply(&r).unwrap(), r);
}

#[test]
fn two_subdomain_strip_local_matrix_is_six_by_six() {
    let (m, a) = poisson(4, 1);
    let d = decompose(&m, 2, 1, 1);
    let locals = local_dirichlet_matrices(&a, &d).unwrap();
    assert_eq!(locals[0].n_rows(), 6);
    // Interior of the first subdomain: columns x = 0, 1, 2 of both rows.
    let idx = [0usize, 1, 2, 5, 6, 7];
    let dense = a.to_dense();
    for (p, &i) in idx.iter().enumerate() {
        for (q, &j) in idx.iter().enumerate() {
            assert_eq!(locals[0].get(p, q), dense[i][j]);
        }
    }
}

#[test]
fn preconditioner_is_linear() {
    let (m, a) = waveguide(4, 6);
    let d = decompose(&m, 2, 2, 1);
    let b = assemble_robin_matrices::<Complex64>(&m, &d, &ProblemSpec::waveguide(), c(1.0)).unwrap();
    let pc = build_two_level(build_one_level(&a, &d, Variant::Oras, LocalSource::Assembled(b)).unwrap(), &a).unwrap();
    let n = a.n_rows();
    let r1: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), (i as f64).cos())).collect();
    let r2: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 / (i + 1) as f64, 0.5)).collect();
    let (al, be) = (Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.7));
    let mix: Vec<Complex64> = r1.iter().zip(&r2).map(|(x, y)| al * x + be * y).collect();
    let z = pc.apply(&mix).unwrap();
    let z1 = pc.apply(&r1).unwrap();
    let z2 = pc.apply(&r2).unwrap();
    let scale = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..n {
        assert!((z[i] - (al * z1[i] + be * z2[i])).norm() <= 1e-14 * scale * 10.0);
    }
}

#[test]
fn as_is_symmetric_ras_is_not() {
    let (m, a) = poisson(6, 6);
    let d = decompose(&m, 2, 1, 1);
    let as_ = dense_of(&build_one_level(&a, &d, Variant::As, LocalSource::Extract).unwrap());
    assert!((&as_ - as_.transpose()).camax() < 1e-12);
    let sym = (&as_ + as_.transpose()).map(|z| z.re * 0.5);
    assert!(sym.symmetric_eigen().eigenvalues.min() > 0.0);
    let ras = dense_of(&build_one_level(&a, &d, Variant::Ras, LocalSource::Extract).unwrap());
    assert!((&ras - ras.transpose()).camax() > 1e-10);
}

#[test]
fn coarse_basis_and_matrix() {
    let (m, a) = poisson(4, 1);
    let d = decompose(&m, 2, 1, 1);
    let pc = build_two_level(build_one_level(&a, &d, Variant::Ras, LocalSource::Extract).unwrap(), &a).unwrap();
    let coarse = pc.coarse().unwrap();
    let phi = coarse.basis();
    let owned: Vec<usize> = d.subdomains().iter().map(|s| s.owned.len()).collect();
    for (p, &count) in owned.iter().enumerate() {
        let col: Vec<f64> = (0..phi.n_rows()).map(|i| phi.get(i, p)).collect();
        assert_eq!(col.iter().filter(|&&v| v == 1.0).count(), count);
        assert!(col.iter().all(|&v| v == 0.0 || v == 1.0));
    }
    let pd = DMatrix::from_fn(phi.n_rows(), 2, |i, j| phi.get(i, j));
    let ad = DMatrix::from_fn(a.n_rows(), a.n_cols(), |i, j| a.get(i, j));
    let a0 = pd.transpose() * ad * &pd;
    for p in 0..2 {
        for q in 0..2 {
            assert!((a0[(p, q)] - coarse.matrix().get(p, q)).abs() < 1e-14);
        }
    }
    assert_eq!(pc.levels(), 2);
}

#[test]
fn single_subdomain_two_level_converges_in_two_steps() {
    // M^{-1} A = I + Phi A_0^{-1} Phi^T A has eigenvalues {1, 2}.
    let (m, a) = poisson(4, 4);
    let d = decompose(&m, 1, 1, 1);
    let pc = build_two_level(build_one_level(&a, &d, Variant::As, LocalSource::Extract).unwrap(), &a).unwrap();
    let q = dense_of(&schwarz_operator(&pc, &a).unwrap());
    let id = DMatrix::<Complex64>::identity(a.n_rows(), a.n_rows());
    let p = (&q - &id) * (&q - &id * c(2.0));
    assert!(p.norm() < 1e-10);
}

#[test]
fn combine_examples() {
    let e1 = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
    let e2 = CsrMatrix::from_triplets(2, 2, &[(1, 1, 1.0)]).unwrap();
    let sum = combine(vec![&e1, &e2], CombineMode::Additive).unwrap();
    assert_eq!(sum.apply(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);

    let q = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)]).unwrap();
    let x = [1.0, -2.0];
    for mode in [CombineMode::Additive, CombineMode::Multiplicative] {
        assert_eq!(combine(vec![&q], mode).unwrap().apply(&x).unwrap(), q.spmv(&x).unwrap());
    }
    let id = Identity(2);
    let all = combine(vec![&q as &dyn LinearOperator<f64>, &id, &q], CombineMode::Multiplicative).unwrap();
    assert_eq!(all.apply(&x).unwrap(), x.to_vec());

    // I - (I - Q2)(I - Q1): Q1 acts first.
    let mult = combine(vec![&e1, &q], CombineMode::Multiplicative).unwrap();
    let dense = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
    let p1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let id2 = DMatrix::<f64>::identity(2, 2);
    let want = &id2 - (&id2 - dense) * (&id2 - p1);
    let got = mult.apply(&x).unwrap();
    let wx = want * nalgebra::DVector::from_row_slice(&x);
    assert_eq!(got, wx.as_slice());
}

#[test]
fn configuration_errors() {
    let (m, a) = poisson(4, 4);
    let d0 = decompose(&m, 2, 2, 0);
    assert!(matches!(build_one_level(&a, &d0, Variant::Ras, LocalSource::Extract), Err(Error::Config(_))));
    assert!(build_one_level(&a, &d0, Variant::As, LocalSource::Extract).is_err());
    assert!(matches!(build_one_level(&a, &d0, Variant::Oas, LocalSource::Extract), Err(Error::Config(_))));

    let p = partition_geometric(&m, 2, 2).unwrap();
    let edge = extend_overlap_elements(&p, &dual_graph(&m), 1, &q1_dof_map(&m), &m).unwrap();
    assert!(matches!(build_one_level(&a, &edge, Variant::As, LocalSource::Extract), Err(Error::Config(_))));
}

#[test]
fn k0_oras_runs_on_the_cut() {
    let (m, a) = waveguide(4, 6);
    let d = decompose(&m, 1, 2, 0);
    let b = assemble_robin_matrices::<Complex64>(&m, &d, &ProblemSpec::waveguide(), c(1.0)).unwrap();
    let pc = build_one_level(&a, &d, Variant::Oras, LocalSource::Assembled(b)).unwrap();
    assert_eq!(pc.report()[0].interface, 3);
}

#[test]
fn singular_local_matrix_names_the_subdomain() {
    let (m, a) = poisson(4, 4);
    let d = decompose(&m, 2, 1, 1);
    let mut b: Vec<CsrMatrix<f64>> = d.subdomains().iter().map(|s| CsrMatrix::identity(s.dofs.len())).collect();
    b[1] = CsrMatrix::zeros(b[1].n_rows(), b[1].n_rows());
    let err = build_one_level(&a, &d, Variant::Oas, LocalSource::Assembled(b)).unwrap_err();
    assert!(matches!(err, Error::SubdomainFactorization { subdomain: 1, .. }));
}

#[test]
fn graph_partitioned_decomposition_works() {
    let (m, a) = poisson(6, 6);
    let p = partition_graph_greedy(&dual_graph(&m), 3, Some(7), PartitionKind::Elements).unwrap();
    let d = extend_overlap_elements(&p, &cell_vertex_graph(&m), 1, &q1_dof_map(&m), &m).unwrap();
    let pc = build_one_level(&a, &d, Variant::Ras, LocalSource::Extract).unwrap();
    let want = dense_oracle(&a, &d, Variant::Ras, None, false);
    assert!(rel_diff(&dense_of(&pc), &want) < 1e-12);
}
