use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use smm_rad2d::fespace::FiniteElementSpace;
use smm_rad2d::linalg::{
    bicgstab, cg, dot, fixed_point, lump, minres, BlockDiagonal, BlockTriangular, CsrMatrix, FixedPointOptions,
    Identity, Jacobi, KrylovOptions, LinearOperator, Preconditioner, SparseLdl, SymGaussSeidel, TripletBuilder,
};
use smm_rad2d::mesh::Mesh;
use smm_rad2d::smm::{Method, MomentSolverOptions, RtSystem, ScalarSystem, SmmContext};
use smm_rad2d::transport::{AngularQuadrature, TransportProblem};
use smm_rad2d::Error;
use std::sync::Arc;

/// Linear congruential stream in `[-1, 1)`.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }
}

fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = Lcg(seed);
    let b = DMatrix::from_fn(n, n, |_, _| r.next());
    &b * b.transpose() + DMatrix::identity(n, n) * n as f64
}

fn to_csr(a: &DMatrix<f64>) -> CsrMatrix {
    let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
    CsrMatrix::from_dense(&rows)
}

fn matvec(a: &dyn LinearOperator, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    a.apply(x, &mut y);
    y
}

fn tight() -> KrylovOptions {
    KrylovOptions {
        rel_tol: 1e-13,
        abs_tol: 0.0,
        max_iter: 10_000,
    }
}

#[test]
fn triplet_examples() {
    let mut t = TripletBuilder::new(1, 1);
    t.add(0, 0, 1.0);
    t.add(0, 0, 2.0);
    assert_eq!(t.build().get(0, 0), 3.0);
    let z = TripletBuilder::new(3, 3).build();
    assert_eq!(z.nnz(), 0);
    assert_eq!(matvec(&z, &[1.0, 2.0, 3.0]), vec![0.0; 3]);
}

#[test]
fn random_triplets_match_dense_matvec() {
    let mut r = Lcg(5);
    let mut dense = DMatrix::<f64>::zeros(5, 5);
    let mut t = TripletBuilder::new(5, 5);
    for _ in 0..40 {
        let i = ((r.next() + 1.0) * 2.5) as usize % 5;
        let j = ((r.next() + 1.0) * 2.5) as usize % 5;
        let v = r.next();
        dense[(i, j)] += v;
        t.add(i, j, v);
    }
    let a = t.build();
    let x = r.vec(5);
    let y: DVector<f64> = &dense * DVector::from_vec(x.clone());
    for (a, b) in matvec(&a, &x).iter().zip(y.iter()) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn krylov_examples() {
    let id = CsrMatrix::identity(4);
    let b = vec![1.0, -2.0, 3.0, 0.5];
    for solver in [cg, minres, bicgstab] {
        let mut x = vec![0.0; 4];
        let s = solver(&id, &b, &mut x, &Identity, &tight()).unwrap();
        assert_eq!(s.iterations, 1);
        assert!(x.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-14));
    }
    let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
    let mut x = vec![0.0; 2];
    cg(&a, &[1.0, 2.0], &mut x, &Identity, &tight()).unwrap();
    assert!((x[0] - 1.0 / 11.0).abs() < 1e-10 && (x[1] - 7.0 / 11.0).abs() < 1e-10);
}

#[test]
fn cg_matches_dense_lu_on_random_spd() {
    let a = random_spd(50, 17);
    let b = Lcg(3).vec(50);
    let exact = a.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
    let csr = to_csr(&a);
    for pre in [
        Box::new(Identity) as Box<dyn Preconditioner>,
        Box::new(Jacobi::new(&csr).unwrap()),
        Box::new(SymGaussSeidel::new(csr.clone()).unwrap()),
        Box::new(SparseLdl::new(&csr).unwrap()),
    ] {
        let mut x = vec![0.0; 50];
        cg(&csr, &b, &mut x, pre.as_ref(), &tight()).unwrap();
        for (u, v) in x.iter().zip(exact.iter()) {
            assert!((u - v).abs() < 1e-8);
        }
    }
}

#[test]
fn minres_and_bicgstab_on_indefinite_system() {
    let spd = random_spd(20, 4);
    let mut a = DMatrix::<f64>::zeros(30, 30);
    a.view_mut((0, 0), (20, 20)).copy_from(&(-&spd));
    let mut r = Lcg(9);
    let c = DMatrix::from_fn(10, 20, |_, _| r.next());
    a.view_mut((20, 0), (10, 20)).copy_from(&c);
    a.view_mut((0, 20), (20, 10)).copy_from(&c.transpose());
    for i in 20..30 {
        a[(i, i)] = 1.0;
    }
    let b = r.vec(30);
    let exact = a.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
    let csr = to_csr(&a);
    let mut x = vec![0.0; 30];
    minres(&csr, &b, &mut x, &Identity, &tight()).unwrap();
    for (u, v) in x.iter().zip(exact.iter()) {
        assert!((u - v).abs() < 1e-8);
    }
    let mut x = vec![0.0; 30];
    bicgstab(&csr, &b, &mut x, &Identity, &tight()).unwrap();
    for (u, v) in x.iter().zip(exact.iter()) {
        assert!((u - v).abs() < 1e-8);
    }
}

#[test]
fn sparse_ldl_solves_indefinite_symmetric() {
    let mut a = random_spd(12, 8);
    for i in 0..4 {
        a[(i, i)] = -a[(i, i)] - 30.0;
    }
    let b = Lcg(1).vec(12);
    let exact = a.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
    let x = SparseLdl::new(&to_csr(&a)).unwrap().solve(&b);
    for (u, v) in x.iter().zip(exact.iter()) {
        assert!((u - v).abs() < 1e-10);
    }
}

#[test]
fn cg_residual_decreases_in_energy_norm() {
    // error energy norm of CG iterates on an assembled diffusion matrix
    let mesh = Arc::new(Mesh::unit_square(4, 1).unwrap());
    let quad = Arc::new(AngularQuadrature::level_symmetric(4).unwrap());
    let problem = smm_rad2d::harness::problems::diffusion_limit(mesh, 1, quad, 0.1).unwrap();
    let ctx = Arc::new(SmmContext::from_problem(&problem));
    let sys = ScalarSystem::new(Method::Ip, ctx, MomentSolverOptions::default()).unwrap();
    let a = &sys.matrix;
    let n = a.nrows();
    let b = Lcg(2).vec(n);
    let mut exact = vec![0.0; n];
    cg(a, &b, &mut exact, &Identity, &tight()).unwrap();
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let mut x = vec![0.0; n];
        let opts = KrylovOptions {
            rel_tol: 0.0,
            abs_tol: 0.0,
            max_iter: k,
        };
        let _ = cg(a, &b, &mut x, &Identity, &opts);
        let e: Vec<f64> = x.iter().zip(&exact).map(|(u, v)| u - v).collect();
        let energy = dot(&e, &matvec(a, &e)).sqrt();
        assert!(energy <= last * (1.0 + 1e-10));
        last = energy;
    }
}

#[test]
fn lump_examples() {
    let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
    assert_eq!(lump(&a).unwrap(), vec![3.0, 4.0]);
    let d = CsrMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 5.0]]);
    assert_eq!(lump(&d).unwrap(), vec![2.0, 5.0]);
    assert!(matches!(
        lump(&CsrMatrix::from_dense(&[vec![1.0, -2.0], vec![-2.0, 1.0]])),
        Err(Error::SingularLump(0))
    ));
}

fn rt_system(n: usize, p: usize) -> RtSystem {
    let mesh = Arc::new(Mesh::unit_square(n, 1).unwrap());
    let quad = Arc::new(AngularQuadrature::level_symmetric(4).unwrap());
    let problem: TransportProblem = smm_rad2d::harness::problems::diffusion_limit(mesh, p, quad, 0.5).unwrap();
    RtSystem::new(
        Arc::new(SmmContext::from_problem(&problem)),
        MomentSolverOptions::default(),
    )
    .unwrap()
}

#[test]
fn lowest_order_rt_mass_lumps_positive() {
    let sys = rt_system(2, 0);
    assert!(lump(&sys.mt).unwrap().iter().all(|&v| v > 0.0));
}

#[test]
fn block_preconditioner_examples() {
    let id = BlockDiagonal {
        split: 2,
        p1: Box::new(Identity),
        p2: Box::new(Identity),
    };
    let r = vec![1.0, 2.0, 3.0];
    let mut z = vec![0.0; 3];
    id.apply(&r, &mut z);
    assert_eq!(z, r);

    let a = to_csr(&random_spd(6, 1));
    let s = to_csr(&random_spd(4, 2));
    let diag = BlockDiagonal {
        split: 6,
        p1: Box::new(SymGaussSeidel::new(a.clone()).unwrap()),
        p2: Box::new(SparseLdl::new(&s).unwrap()),
    };
    assert!(diag.is_symmetric());
    let mut g = Lcg(12);
    let (u, w) = (g.vec(10), g.vec(10));
    let (mut pu, mut pw) = (vec![0.0; 10], vec![0.0; 10]);
    diag.apply(&u, &mut pu);
    diag.apply(&w, &mut pw);
    assert!((dot(&pu, &w) - dot(&u, &pw)).abs() < 1e-12);

    let tri = BlockTriangular {
        split: 6,
        p1: Box::new(Identity),
        c: to_csr(&DMatrix::from_fn(4, 6, |i, j| (i + j) as f64)),
        p2: Box::new(Identity),
    };
    assert!(!tri.is_symmetric());
    let mut x = vec![0.0; 10];
    let big = to_csr(&random_spd(10, 3));
    assert!(matches!(
        minres(&big, &u, &mut x, &tri, &tight()),
        Err(Error::Config(_))
    ));
}

#[test]
fn preconditioned_minres_beats_unpreconditioned_on_rt_system() {
    let sys = rt_system(4, 1);
    let n = sys.scaled.nrows();
    let b = Lcg(4).vec(n);
    let opts = KrylovOptions {
        rel_tol: 1e-10,
        abs_tol: 0.0,
        max_iter: 20_000,
    };
    let nv = sys.vspace.ndofs();
    let pre = BlockDiagonal {
        split: nv,
        p1: Box::new(SymGaussSeidel::new(sys.mt.scale(3.0)).unwrap()),
        p2: Box::new(SparseLdl::new(&sys.approximate_schur()).unwrap()),
    };
    let mut x = vec![0.0; n];
    let with = minres(&sys.scaled, &b, &mut x, &pre, &opts).unwrap();
    let mut x = vec![0.0; n];
    let without = minres(&sys.scaled, &b, &mut x, &Identity, &opts).unwrap();
    assert!(
        without.iterations >= 2 * with.iterations,
        "{} vs {}",
        with.iterations,
        without.iterations
    );
}

#[test]
fn anderson_examples() {
    let opts = FixedPointOptions {
        depth: 0,
        tol: 1e-12,
        max_iter: 200,
    };
    let r = fixed_point(|x| Ok(x.to_vec()), vec![3.0], &opts).unwrap();
    assert_eq!(r.iterations, 1);
    let r = fixed_point(|x| Ok(vec![0.5 * x[0] + 1.0]), vec![0.0], &opts).unwrap();
    assert!((r.x[0] - 2.0).abs() < 1e-11);
    // the step halves each time: about log2(2 / tol) evaluations
    assert!((r.iterations as f64 - (2.0f64 / 1e-12).log2()).abs() <= 2.0);
}

fn contraction(n: usize, rho: f64, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut r = Lcg(seed);
    let q = DMatrix::from_fn(n, n, |_, _| r.next()).qr().q();
    let eig = DVector::from_fn(n, |i, _| rho * (1.0 - 1.5 * i as f64 / n as f64));
    let a = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    (a, DVector::from_vec(r.vec(n)))
}

#[test]
fn anderson_beats_picard_on_affine_contraction() {
    let (a, b) = contraction(10, 0.9, 21);
    let g = |x: &[f64]| Ok((&a * DVector::from_column_slice(x) + &b).iter().copied().collect());
    let run = |depth| {
        fixed_point(
            g,
            vec![0.0; 10],
            &FixedPointOptions {
                depth,
                tol: 1e-10,
                max_iter: 1000,
            },
        )
        .unwrap()
    };
    let picard = run(0);
    let anderson = run(2);
    assert!(picard.converged && anderson.converged);
    assert!(anderson.iterations < picard.iterations);
    let exact = (DMatrix::identity(10, 10) - &a).lu().solve(&b).unwrap();
    for (u, v) in anderson.x.iter().zip(exact.iter()) {
        assert!((u - v).abs() < 1e-8);
    }
}

#[test]
fn unconverged_fixed_point_reports_last_iterate() {
    let r = fixed_point(
        |x| Ok(vec![0.99 * x[0] + 1.0]),
        vec![0.0],
        &FixedPointOptions {
            depth: 0,
            tol: 1e-14,
            max_iter: 5,
        },
    )
    .unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 5);
    assert_eq!(r.history.len(), 5);
}

#[test]
fn dimension_mismatch_rejected() {
    let a = CsrMatrix::identity(3);
    let mut x = vec![0.0; 2];
    assert!(matches!(
        cg(&a, &[1.0, 2.0], &mut x, &Identity, &tight()),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn rt_space_sizes_consistent_with_blocks() {
    let sys = rt_system(3, 1);
    let nv = FiniteElementSpace::rt(sys.sspace.mesh().clone(), 1).unwrap().ndofs();
    assert_eq!(sys.mt.nrows(), nv);
    assert_eq!(sys.d.nrows(), sys.sspace.ndofs());
    assert_eq!(sys.scaled.split(), nv);
}

proptest! {
    #[test]
    fn anderson_depth_zero_is_picard(x0 in -5.0f64..5.0, a in -0.9f64..0.9, c in -3.0f64..3.0) {
        let opts = FixedPointOptions { depth: 0, tol: 1e-9, max_iter: 500 };
        let r = fixed_point(|x| Ok(vec![a * x[0] + c]), vec![x0], &opts).unwrap();
        let mut x = x0;
        for _ in 0..r.iterations {
            x = a * x + c;
        }
        prop_assert_eq!(r.x[0], x);
    }

    #[test]
    fn transpose_and_matmul_agree_with_dense(seed in 0u64..1000, n in 1usize..8, m in 1usize..8) {
        let mut r = Lcg(seed);
        let a = DMatrix::from_fn(n, m, |_, _| if r.next() > 0.3 { r.next() } else { 0.0 });
        let b = DMatrix::from_fn(m, n, |_, _| r.next());
        let ca = to_csr(&a);
        let cb = to_csr(&b);
        let prod = ca.matmul(&cb).to_dense();
        let dense = &a * &b;
        for i in 0..n {
            for j in 0..n {
                prop_assert!((prod[i][j] - dense[(i, j)]).abs() < 1e-13);
            }
        }
        let t = ca.transpose().to_dense();
        for i in 0..m {
            for j in 0..n {
                prop_assert_eq!(t[i][j], a[(j, i)]);
            }
        }
    }
}
