use gapforge::canonical2::*;
use gapforge::generators::*;
use gapforge::scalar::int;
use gapforge::symkernel::psd_status;
use gapforge::{SdpInstance, SymMat, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn form(c: Canonical) -> Box<CanonicalForm> {
    match c {
        Canonical::Form(f) => f,
        Canonical::NoGap(v) => panic!("no gap: {:?} {}", v.reason, v.detail),
        Canonical::Inconclusive { stage, reason } => panic!("inconclusive at {stage}: {reason}"),
    }
}

fn verdict(c: Canonical) -> NoGapVerdict {
    match c {
        Canonical::NoGap(v) => *v,
        Canonical::Form(f) => panic!("unexpected canonical form {:?}", f.sigma),
        Canonical::Inconclusive { reason, .. } => panic!("inconclusive: {reason}"),
    }
}

#[test]
fn small_footnote_values() {
    let f = form(canonicalize(&gen_small(int(1)).unwrap(), &tol()).unwrap());
    assert_eq!((f.p, f.r, f.s), (1, 2, 0));
    assert_eq!(f.lambda, vec![1.0]);
    assert_eq!(f.sigma, vec![1.0]);
    assert_eq!(f.m_block.to_rows(), vec![vec![1.0]]);
    assert_eq!(f.c2prime, 1.0);
    assert!(f.residual <= 1e-12);
    let cert = recognize_pref(&f, &tol()).unwrap();
    assert_eq!((cert.primal, cert.dual), (0.0, Some(1.0)));
}

#[test]
fn normalize_small_is_identity() {
    let inst = gen_small(int(1)).unwrap().to_f64();
    let nb = normalize_b(&inst, &tol()).unwrap();
    assert_eq!(nb.r, 2);
    assert!(nb.ops.is_empty());
    assert_eq!(nb.inst.b(), inst.b());
}

#[test]
fn normalize_recovers_rank_after_mess() {
    for seed in 0..5 {
        let (messy, _) = mess(&gen_small(int(1)).unwrap(), seed, 8, 2).unwrap();
        let nb = normalize_b(&messy.to_f64(), &tol()).unwrap();
        assert_eq!(nb.r, 2, "seed {seed}");
        assert!(nb.residual < 1e-9);
    }
}

#[test]
fn normalize_finds_larger_rank_than_b() {
    // B = diag(1,0,0) but x₁ > 0 gives a rank-two slack
    let a1 = SymMat::diag(&[0.0, -1.0, 0.0]);
    let a2 = SymMat::diag(&[1.0, 0.0, 0.0]);
    let inst = SdpInstance::new(vec![a1, a2], SymMat::diag(&[1.0, 0.0, 0.0]), vec![0.0, 1.0]).unwrap();
    let nb = normalize_b(&inst, &tol()).unwrap();
    assert_eq!(nb.r, 2);
}

#[test]
fn messy_small_recovers_gap() {
    for seed in 0..20u64 {
        let (messy, _) = mess(&gen_small(int(10)).unwrap(), seed, 8, 2).unwrap();
        let f = form(canonicalize(&messy, &tol()).unwrap());
        let cert = recognize_pref(&f, &tol()).unwrap();
        let d = cert.dual.expect("finite dual");
        assert!((d - 10.0).abs() < 1e-6, "seed {seed}: {d}");
        assert!(cert.primal.abs() < 1e-6);
        assert!(f.residual <= 1e-7, "seed {seed}: residual {:e}", f.residual);
    }
}

#[test]
fn single_infinite_m2() {
    let f = form(canonicalize(&gen_single(2, int(10), true).unwrap(), &tol()).unwrap());
    assert_eq!(f.sigma, vec![-1.0]);
    assert_eq!(f.c2prime, 10.0);
    let cert = recognize_pref(&f, &tol()).unwrap();
    assert_eq!(cert.dual, None);
}

#[test]
fn double_m2() {
    let f = form(canonicalize(&gen_double(2).unwrap(), &tol()).unwrap());
    assert_eq!(f.s, 1);
    assert_eq!(f.sigma.len(), 1);
    assert!((f.sigma[0] - 1.0).abs() < 1e-12);
    assert!((f.c2prime - 1.0).abs() < 1e-12);
    let cert = recognize_pref(&f, &tol()).unwrap();
    assert!((cert.dual.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn pref_values() {
    assert_eq!(diagonal_lp_value(&[1.0], 0, 1.0, 1e-9), Some(1.0));
    assert_eq!(diagonal_lp_value(&[-1.0], 0, 10.0, 1e-9), None);
    assert_eq!(diagonal_lp_value(&[1.0], 1, 1.0, 1e-9), Some(1.0));
}

#[test]
fn lp_like_instance_has_no_gap() {
    let a1 = SymMat::diag(&[1.0, 0.0, 0.0]);
    let a2 = SymMat::diag(&[0.0, 1.0, 0.0]);
    let inst = SdpInstance::new(vec![a1, a2], SymMat::diag(&[1.0, 1.0, 0.0]), vec![0.0, 1.0]).unwrap();
    let v = verdict(canonicalize_f64(&inst, &tol(), false).unwrap());
    assert_eq!(v.reason, NoGapReason::MWZeroLpEquality);
}

#[test]
fn positive_definite_b_means_no_gap() {
    let a1 = SymMat::diag(&[1.0, 0.0]);
    let a2 = SymMat::diag(&[0.0, 1.0]);
    let inst = SdpInstance::new(vec![a1, a2], SymMat::identity(2), vec![1.0, 1.0]).unwrap();
    let v = verdict(canonicalize_f64(&inst, &tol(), false).unwrap());
    assert_eq!(v.reason, NoGapReason::PrimalStrictlyFeasible);
}

#[test]
fn witness_small() {
    let inst = gen_small(int(1)).unwrap().to_f64();
    let WitnessSearch::Found(w) = gs_witness(&inst, false, &tol()).unwrap() else {
        panic!("no witness")
    };
    assert!((w.lambda[0] - 1.0).abs() < 1e-12 && w.lambda[1].abs() < 1e-12);
    assert!(w.y0_inner.unwrap() <= 1e-7);
    assert!((w.matrix.frob_norm() - 1.0).abs() < 1e-12);
}

#[test]
fn witness_homogeneous_pencil() {
    let a1 = SymMat::diag(&[1.0, -1.0, 0.0]);
    let a2 = SymMat::diag(&[0.0, 1.0, 0.0]);
    let inst = SdpInstance::new(vec![a1, a2], SymMat::diag(&[1.0, 1.0, 0.0]), vec![0.0, 0.0]).unwrap();
    let WitnessSearch::Found(w) = gs_witness(&inst, true, &tol()).unwrap() else {
        panic!("no witness")
    };
    assert!(psd_status(&w.matrix, &tol()).is_psd());
    assert!(w.matrix.frob_norm() > 0.5);
    // any psd member has a nonnegative first coefficient and λ₂ ≥ λ₁
    assert!(w.lambda[0] >= -1e-12 && w.lambda[1] >= w.lambda[0] - 1e-12);
}

#[test]
fn witness_not_found_for_strictly_feasible_dual() {
    let a1 = SymMat::unit(2, 0, 1);
    let a2 = SymMat::identity(2);
    let inst = SdpInstance::new(vec![a1, a2], SymMat::identity(2), vec![0.0, 2.0]).unwrap();
    assert!(matches!(gs_witness(&inst, false, &tol()).unwrap(), WitnessSearch::NotFound { .. }));
}

#[test]
fn rotate_random_blocks() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for r1 in 1..=4 {
        for r2 in 1..=4 {
            for _ in 0..100 {
                let n = r1 + r2;
                let k = rng.gen_range(0..=r2);
                // integer factors keep the nonzero eigenvalues of the psd block away from zero
                let f: Vec<Vec<f64>> = (0..k)
                    .map(|_| (0..r2).map(|_| rng.gen_range(-2i32..=2) as f64).collect())
                    .collect();
                let g = SymMat::from_upper(n, |i, j| {
                    if i < r1 {
                        rng.gen_range(-3.0..3.0)
                    } else {
                        (0..k).map(|t| f[t][i - r1] * f[t][j - r1]).sum()
                    }
                });
                let rot = lemma_rotate(&g, r1, r2, &tol()).unwrap();
                assert!(rot.residual <= 1e-8, "r1={r1} r2={r2}: {:e}", rot.residual);
                let rank = gapforge::symkernel::rank_psd(&g.submatrix(&(r1..n).collect::<Vec<_>>()), &tol()).unwrap();
                assert_eq!(rot.s, rank);
            }
        }
    }
}

#[test]
fn attainment() {
    let r = attainment_report(&gen_small(int(1)).unwrap(), &tol()).unwrap();
    assert_eq!(r.primal_point, vec![0.0, 0.0]);
    assert!(r.primal_attained && r.dual_attained);
    assert_eq!(r.dual_value, Some(1.0));
    assert!(r.objective_identically_zero);

    let r = attainment_report(&gen_single(2, int(10), true).unwrap(), &tol()).unwrap();
    assert!(!r.dual_feasible);
    assert!(r.primal_attained);
    assert_eq!(r.primal_value, 0.0);
}

#[test]
fn gap_inducing_objective() {
    let small = gen_small(int(1)).unwrap().to_f64();
    let g = exists_gap_inducing_c(small.a_i(0), small.a_i(1), small.b(), &tol()).unwrap();
    assert!(g.exists);
    let c = g.c.unwrap();
    assert!(c[0].abs() < 1e-12 && c[1] > 0.0);

    let diag = exists_gap_inducing_c(
        &SymMat::diag(&[1.0, 0.0, 0.0]),
        &SymMat::diag(&[0.0, 1.0, 0.0]),
        &SymMat::diag(&[1.0, 1.0, 0.0]),
        &tol(),
    )
    .unwrap();
    assert!(!diag.exists);

    let (messy, _) = mess(&gen_small(int(1)).unwrap(), 4, 8, 2).unwrap();
    let m = messy.to_f64();
    let g = exists_gap_inducing_c(m.a_i(0), m.a_i(1), m.b(), &tol()).unwrap();
    assert!(g.exists);
    let c = g.c.unwrap();
    assert!(c[0].abs() < 1e-7 * c[1].abs());
}

#[test]
fn replaying_the_log_reproduces_the_template() {
    let (messy, _) = mess(&gen_double(2).unwrap(), 9, 8, 2).unwrap();
    let f = form(canonicalize(&messy, &tol()).unwrap());
    let replay = messy.to_f64().apply_all(&f.transform_log).unwrap();
    for i in 0..2 {
        assert!(replay.a_i(i).max_abs_diff(f.canonical.a_i(i)) <= f.residual + 1e-15);
    }
    assert!(replay.b().max_abs_diff(f.canonical.b()) <= 1e-7);
    let cert = recognize_pref(&f, &tol()).unwrap();
    assert!((cert.dual.unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn certified_values_agree_with_exact_certifier() {
    use gapforge::facial::certify_gap;
    use gapforge::ExtendedRat;
    for inst in [gen_small(int(3)).unwrap(), gen_single(2, int(10), true).unwrap(), gen_double(2).unwrap()] {
        let exact = certify_gap(&inst).unwrap();
        let f = form(canonicalize(&inst, &tol()).unwrap());
        let cert = recognize_pref(&f, &tol()).unwrap();
        match exact.values().1.unwrap() {
            ExtendedRat::PosInf => assert_eq!(cert.dual, None),
            ExtendedRat::Finite(v) => {
                let v: f64 = gapforge::scalar::Scalar::as_f64(v);
                assert!((cert.dual.unwrap() - v).abs() < 1e-9);
            }
        }
    }
}
