use gapforge::canonical2::{gs_witness, WitnessSearch};
use gapforge::facial::*;
use gapforge::generators::*;
use gapforge::scalar::{int, ExtendedRat};
use gapforge::symkernel::{inertia_by_elimination, psd_status, rank_psd};
use gapforge::{Mat, Rat, ReformOp, SdpInstance, SymMat, Tolerances};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn sym_int(n: usize, bound: i64) -> impl Strategy<Value = SymMat<Rat>> {
    prop::collection::vec(-bound..=bound, n * (n + 1) / 2).prop_map(move |v| {
        let mut it = v.into_iter();
        SymMat::from_upper(n, |_, _| int(it.next().expect("enough entries")))
    })
}

fn sized_sym(max: usize, bound: i64) -> impl Strategy<Value = SymMat<Rat>> {
    (1..=max).prop_flat_map(move |n| sym_int(n, bound))
}

fn gram(f: &Mat<Rat>) -> SymMat<Rat> {
    SymMat::from_upper(f.cols(), |i, j| {
        (0..f.rows()).fold(int(0), |acc, k| acc + &f[(k, i)] * &f[(k, j)])
    })
}

fn family(k: usize, m: usize) -> SdpInstance {
    match k {
        0 => gen_small(int(10)),
        1 => gen_single(m, int(10), false),
        2 => gen_single(m, int(10), true),
        3 => gen_double(m),
        4 => gen_double_flipped(m),
        _ => gen_example51(),
    }
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn asymmetric_rows_are_rejected(n in 2usize..=5, i in 0usize..5, j in 0usize..5, d in 1i64..=3) {
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let mut rows = vec![vec![int(0); n]; n];
        rows[i][j] = int(d);
        prop_assert!(SymMat::from_rows(rows).is_err());
    }

    #[test]
    fn inner_is_symmetric_and_bilinear(
        (a, b, c) in (1usize..=5).prop_flat_map(|n| (sym_int(n, 4), sym_int(n, 4), sym_int(n, 4))),
        alpha in -5i64..=5,
        beta in -5i64..=5,
    ) {
        prop_assert_eq!(a.inner(&b).unwrap(), b.inner(&a).unwrap());
        let lhs = a.scale(&int(alpha)).add_scaled(&int(beta), &c).unwrap().inner(&b).unwrap();
        let rhs = int(alpha) * a.inner(&b).unwrap() + int(beta) * c.inner(&b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn congruence_keeps_inertia(m in sized_sym(6, 3), seed in any::<u64>()) {
        let t = mess_transform(m.order(), seed, 3 * m.order(), 2).unwrap();
        let det = t.t.det().unwrap();
        prop_assert!(det == int(1) || det == int(-1));
        let c = m.congruence(&t.t).unwrap();
        prop_assert_eq!(inertia_by_elimination(&c), inertia_by_elimination(&m));
        prop_assert_eq!(psd_status(&c, &tol()).class(), psd_status(&m, &tol()).class());
    }

    #[test]
    fn schur_complement_decides_psd(
        (g, f, k) in (1usize..=3, 1usize..=3).prop_flat_map(|(lead, k)| {
            let n = lead + k;
            (sym_int(n, 3), prop::collection::vec(-2i64..=2, k * k), Just(k))
        }),
    ) {
        let n = g.order();
        let lead = n - k;
        // trailing block FᵀF + I is positive definite
        let fm = Mat::from_fn(k, k, |i, j| int(f[i * k + j]));
        let g22 = gram(&fm);
        let g = SymMat::from_upper(n, |i, j| {
            if i >= lead {
                let extra = if i == j { int(1) } else { int(0) };
                g22.get(i - lead, j - lead).clone() + extra
            } else {
                g.get(i, j).clone()
            }
        });
        let s = g.schur_complement(k).unwrap();
        prop_assert_eq!(psd_status(&g, &tol()).is_psd(), psd_status(&s, &tol()).is_psd());
    }

    #[test]
    fn exact_and_float_classes_agree(m in sized_sym(6, 4)) {
        let f = m.to_f64();
        let e = gapforge::symkernel::eig_sym(&f, &tol()).unwrap();
        let scale = f.max_abs().max(1.0);
        prop_assume!(e.values.iter().all(|l| l.abs() >= 10.0 * tol().psd * scale || l.abs() <= 1e-12 * scale));
        prop_assert_eq!(psd_status(&m, &tol()).class(), psd_status(&f, &tol()).class());
    }

    #[test]
    fn weak_duality_on_sampled_pairs(
        (a, f, g, x) in (2usize..=4, 1usize..=3).prop_flat_map(|(n, m)| (
            prop::collection::vec(sym_int(n, 2), m),
            prop::collection::vec(-2i64..=2, n * n),
            prop::collection::vec(-2i64..=2, n * n),
            prop::collection::vec(-3i64..=3, m),
        )),
    ) {
        let n = a[0].order();
        let y = gram(&Mat::from_fn(n, n, |i, j| int(f[i * n + j])));
        let z = gram(&Mat::from_fn(n, n, |i, j| int(g[i * n + j])));
        let x: Vec<Rat> = x.into_iter().map(int).collect();
        let c: Vec<Rat> = a.iter().map(|ai| ai.inner(&y).unwrap()).collect();
        let b = a.iter().zip(&x).fold(z, |acc, (ai, xi)| acc.add_scaled(xi, ai).unwrap());
        let inst = match SdpInstance::new(a, b, c) {
            Ok(i) => i,
            Err(_) => return Ok(()),
        };
        prop_assert!(inst.slack_at(&x, &tol()).unwrap().feasible());
        prop_assert!(inst.dual_residual(&y).unwrap().iter().all(|r| *r == int(0)));
        prop_assert!(inst.objective(&x) <= inst.dual_objective(&y).unwrap());
    }

    #[test]
    fn feasibility_survives_swap_combine_congruence(
        k in 0usize..6,
        m in 2usize..=4,
        x in prop::collection::vec(-2i64..=2, 8),
        (i, j, lambda, mu) in (0usize..8, 0usize..8, prop_oneof![-2i64..=-1, 1i64..=2], -2i64..=2),
        seed in any::<u64>(),
    ) {
        let inst = family(k, m);
        let m = inst.m();
        let (i, j) = (i % m, j % m);
        prop_assume!(i != j);
        let x: Vec<Rat> = x.into_iter().take(m).map(int).collect();
        let before = inst.slack_at(&x, &tol()).unwrap().feasible();

        let swapped = inst.apply_reform(&ReformOp::Swap { i, j }).unwrap();
        let mut xs = x.clone();
        xs.swap(i, j);
        prop_assert_eq!(swapped.slack_at(&xs, &tol()).unwrap().feasible(), before);

        // Aᵢ′ = λAᵢ + μA_j, so xᵢ′ = xᵢ/λ and x_j′ = x_j − μxᵢ/λ
        let combined = inst.apply_reform(&ReformOp::Combine { i, lambda: int(lambda), j, mu: int(mu) }).unwrap();
        let mut xc = x.clone();
        xc[i] = &x[i] / int(lambda);
        xc[j] = &x[j] - int(mu) * &x[i] / int(lambda);
        prop_assert_eq!(combined.slack_at(&xc, &tol()).unwrap().feasible(), before);

        let t = mess_transform(inst.n(), seed, 3 * inst.n(), 2).unwrap();
        let congr = inst.apply_reform(&ReformOp::Congruence { t: t.t }).unwrap();
        prop_assert_eq!(congr.slack_at(&x, &tol()).unwrap().feasible(), before);
    }

    #[test]
    fn clean_b_has_maximum_slack_rank(k in 0usize..6, m in 2usize..=5, xs in prop::collection::vec(-2i64..=2, 5)) {
        let inst = family(k, m);
        // the theorem instance carries larger integers
        if k < 5 {
            for a in inst.a().iter().chain([inst.b()]) {
                prop_assert!(a.entries().iter().all(|v| *v >= int(-1) && *v <= int(1)));
            }
        }
        let x: Vec<Rat> = xs.into_iter().take(inst.m()).map(int).collect();
        let s = inst.slack_at(&x, &tol()).unwrap();
        if s.feasible() {
            prop_assert!(rank_psd(&s.z, &tol()).unwrap() <= rank_psd(inst.b(), &tol()).unwrap());
        }
    }

    #[test]
    fn certificates_replay_and_respect_weak_duality(k in 0usize..6, m in 2usize..=6, seed in any::<u64>(), messy in any::<bool>()) {
        let clean = family(k, m);
        let inst = if messy { mess(&clean, seed, 8, 2).unwrap().0 } else { clean.clone() };
        let cert = certify_gap(&inst).unwrap();
        let again = replay(&inst, &cert.trace).expect("trace replays");
        prop_assert_eq!(cert.values(), again.values());
        if let (Some(ExtendedRat::Finite(p)), Some(d)) = cert.values() {
            prop_assert!(ExtendedRat::Finite(p.clone()) <= *d);
        }
        let base = certify_gap(&clean).unwrap();
        prop_assert_eq!(base.values(), cert.values());
    }

    #[test]
    fn face_chains_descend(k in 0usize..6, m in 2usize..=5, hd in any::<bool>()) {
        let inst = family(k, m);
        let which = if hd { Which::HD } else { Which::D };
        let Ok(mc) = minimal_cone(&inst, which) else {
            // the dual of the infinite family is infeasible
            prop_assert!(!hd && k == 2);
            return Ok(());
        };
        for w in mc.chain.windows(2) {
            prop_assert!(w[0].contains_face(&w[1]));
            if mc.sequence.strict {
                prop_assert!(w[1].dim() < w[0].dim());
            }
        }
        prop_assert!(mc.face.contains(&mc.witness));
        prop_assert!(psd_status(&mc.witness, &tol()).is_psd());
        let residual: Vec<Rat> = match which {
            Which::D => inst.dual_residual(&mc.witness).unwrap(),
            Which::HD => inst.hd_constraints().iter().map(|a| a.inner(&mc.witness).unwrap()).collect(),
        };
        prop_assert!(residual.iter().all(|r| *r == int(0)));
    }

    #[test]
    fn witnesses_are_valid(seed in any::<u64>(), homogeneous in any::<bool>()) {
        let inst = mess(&gen_small(int(10)).unwrap(), seed, 6, 2).unwrap().0.to_f64();
        if let WitnessSearch::Found(w) = gs_witness(&inst, homogeneous, &tol()).unwrap() {
            let e = gapforge::symkernel::eig_sym(&w.matrix, &tol()).unwrap();
            prop_assert!(e.min() >= -tol().psd);
            prop_assert!((w.matrix.frob_norm() - 1.0).abs() < 1e-12);
            if let Some(v) = w.y0_inner {
                prop_assert!(v <= tol().zero);
            }
        }
    }
}
