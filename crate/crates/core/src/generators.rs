//! Pathological instance families, the integer messing congruence and the
//! perturbed dual.
//!
//! Matrix indices in the doc comments are one-based to match the usual
//! notation; the code is zero-based.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{int, ExtendedRat, Rat};
use crate::sdpmodel::{Family, InstanceMeta, KnownGap, MessInfo, ReformOp, SdpInstance};
use crate::symkernel::{Mat, SymMat};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub m: usize,
    #[serde(with = "crate::scalar::rat_str")]
    pub scale: Rat,
    pub mess: Option<MessParams>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessParams {
    pub seed: u64,
    pub num_ops: Option<usize>,
    pub entry_bound: i64,
}

impl Default for MessParams {
    fn default() -> Self {
        MessParams {
            seed: 0,
            num_ops: None,
            entry_bound: 2,
        }
    }
}

/// Unimodular integer congruence and how it was built.
#[derive(Clone, Debug, PartialEq)]
pub struct MessTransform {
    pub t: Mat<Rat>,
    pub log: Vec<String>,
    pub seed: u64,
}

/// `E_ij` (zero-based) of order n.
fn e(n: usize, i: usize, j: usize) -> SymMat<Rat> {
    SymMat::unit(n, i, j)
}

fn sum(parts: &[SymMat<Rat>]) -> SymMat<Rat> {
    let mut out = SymMat::zeros(parts[0].order());
    for p in parts {
        out = out.add(p).expect("equal orders");
    }
    out
}

fn finite_gap(dual: Rat) -> KnownGap {
    KnownGap {
        primal: ExtendedRat::Finite(Rat::zero()),
        dual: ExtendedRat::Finite(dual),
    }
}

fn meta(name: String, family: Family, scale: Option<Rat>, gap: KnownGap) -> InstanceMeta {
    InstanceMeta {
        name,
        family: Some(family),
        scale,
        known_gap: Some(gap),
        ..InstanceMeta::default()
    }
}

/// The three-by-three instance with `A₁ = E₁`, `A₂ = E₂ + E₁₃`, `B = diag(1,1,0)`,
/// `c = (0, scale)`. Primal value 0, dual value `scale`.
pub fn gen_small(scale: Rat) -> Result<SdpInstance> {
    let mut inst = gen_single(2, scale.clone(), false)?;
    inst.meta.family = Some(Family::Small);
    inst.meta.name = format!("small_{scale}");
    Ok(inst)
}

/// Single sequence family: `A₁ = E₁`, `Aᵢ = Eᵢ + E_{i−1,n}`, `B = I_m ⊕ 0`,
/// `c = scale·e_m`, `n = m + 1`. The infinite variant uses
/// `A_m = −E_m + E_{m−1,n}` and has an infeasible dual.
pub fn gen_single(m: usize, scale: Rat, infinite: bool) -> Result<SdpInstance> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("single family needs m >= 2, got {m}")));
    }
    if !scale.is_positive() {
        return Err(Error::InvalidArgument("scale must be positive".into()));
    }
    let n = m + 1;
    let last = n - 1;
    let mut a = vec![e(n, 0, 0)];
    for i in 1..m {
        let lead = if infinite && i == m - 1 {
            e(n, i, i).neg()
        } else {
            e(n, i, i)
        };
        a.push(sum(&[lead, e(n, i - 1, last)]));
    }
    let mut bd = vec![int(1); m];
    bd.push(int(0));
    let b = SymMat::diag(&bd);
    let mut c = vec![Rat::zero(); m];
    c[m - 1] = scale.clone();
    let (family, gap, tag) = if infinite {
        (
            Family::SingleInfinite,
            KnownGap {
                primal: ExtendedRat::Finite(Rat::zero()),
                dual: ExtendedRat::PosInf,
            },
            "inf",
        )
    } else {
        (Family::SingleFinite, finite_gap(scale.clone()), "finite")
    };
    let name = format!("gap_single_{tag}_clean_{m}");
    Ok(SdpInstance::new(a, b, c)?.with_meta(meta(name, family, Some(scale), gap)))
}

/// Double sequence family with `n = 2m + 1`, `c = e_m`, gap (0, 1).
pub fn gen_double(m: usize) -> Result<SdpInstance> {
    double(m, false)
}

/// Double family with `+E_{2m}` in the last matrix; its gap is zero.
pub fn gen_double_flipped(m: usize) -> Result<SdpInstance> {
    double(m, true)
}

fn double(m: usize, flipped: bool) -> Result<SdpInstance> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("double family needs m >= 2, got {m}")));
    }
    let n = 2 * m + 1;
    let last = n - 1;
    let mut a = vec![sum(&[e(n, 0, 0), e(n, m, m)])];
    for i in 1..m {
        let second = if i == m - 1 && !flipped {
            e(n, m + i, m + i).neg()
        } else {
            e(n, m + i, m + i)
        };
        a.push(sum(&[
            e(n, i, i),
            second,
            e(n, i - 1, last),
            e(n, m + i - 1, last),
        ]));
    }
    let mut bd = vec![int(1); m + 1];
    bd.resize(n, int(0));
    let b = SymMat::diag(&bd);
    let mut c = vec![Rat::zero(); m];
    c[m - 1] = Rat::one();
    let (family, gap, name) = if flipped {
        (Family::DoubleFlipped, finite_gap(Rat::zero()), format!("double_flipped_{m}"))
    } else {
        (Family::Double, finite_gap(Rat::one()), format!("gap_double_clean_{m}"))
    };
    Ok(SdpInstance::new(a, b, c)?.with_meta(meta(name, family, Some(Rat::one()), gap)))
}

/// The 4×4 instance with objective `13x₁ − 3x₂` whose dual is strictly feasible
/// while the homogeneous dual needs three reduction steps.
pub fn gen_example51() -> Result<SdpInstance> {
    let n = 4;
    let a1 = sum(&[
        e(n, 0, 2).scale(&int(2)),
        e(n, 0, 3).scale(&int(2)),
        e(n, 1, 1),
    ]);
    let a2 = sum(&[e(n, 2, 2), e(n, 1, 3).scale(&int(2))]);
    let b = e(n, 0, 0);
    let y = example51_dual_point();
    let mut m = meta("example51".into(), Family::Example51, None, finite_gap(Rat::zero()));
    m.dual_point = Some(y);
    Ok(SdpInstance::new(vec![a1, a2], b, vec![int(13), int(-3)])?.with_meta(m))
}

/// The strictly feasible dual point published with the 4×4 example.
pub fn example51_dual_point() -> SymMat<Rat> {
    let rows = [[1, 0, 2, 1], [0, 1, 0, -2], [2, 0, 5, 0], [1, -2, 0, 25]];
    SymMat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
        .expect("symmetric literal")
}

pub fn generate(spec: &FamilySpec) -> Result<SdpInstance> {
    let inst = match spec.family {
        Family::Small => gen_small(spec.scale.clone())?,
        Family::SingleFinite => gen_single(spec.m, spec.scale.clone(), false)?,
        Family::SingleInfinite => gen_single(spec.m, spec.scale.clone(), true)?,
        Family::Double => gen_double(spec.m)?,
        Family::DoubleFlipped => gen_double_flipped(spec.m)?,
        Family::Example51 => gen_example51()?,
        Family::Custom => {
            return Err(Error::InvalidArgument("custom instances are loaded, not generated".into()))
        }
    };
    match spec.mess {
        Some(p) => {
            let ops = p.num_ops.unwrap_or(3 * inst.n());
            Ok(mess(&inst, p.seed, ops, p.entry_bound)?.0)
        }
        None => Ok(inst),
    }
}

/// Random unimodular `T` as a product of row additions, swaps and sign flips.
/// Operations that would push an entry of `T` beyond `entry_bound` in absolute
/// value are redrawn, so the bound holds for `T` itself.
pub fn mess_transform(n: usize, seed: u64, num_ops: usize, entry_bound: i64) -> Result<MessTransform> {
    if entry_bound < 1 {
        return Err(Error::InvalidArgument("entry_bound must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut log = Vec::with_capacity(num_ops);
    let mut applied = 0;
    let mut attempts = 0;
    while applied < num_ops && attempts < 50 * num_ops.max(1) {
        attempts += 1;
        let kind = rng.gen_range(0..10);
        if kind < 7 && n > 1 {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let mut k = rng.gen_range(-entry_bound..entry_bound);
            if k >= 0 {
                k += 1;
            }
            let row: Vec<i64> = (0..n).map(|col| t[i][col] + k * t[j][col]).collect();
            if row.iter().any(|v| v.abs() > entry_bound) {
                continue;
            }
            t[i] = row;
            log.push(format!("row{i} += {k}*row{j}"));
        } else if kind < 9 && n > 1 {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            t.swap(i, j);
            log.push(format!("swap row{i} row{j}"));
        } else {
            let i = rng.gen_range(0..n);
            t[i].iter_mut().for_each(|v| *v = -*v);
            log.push(format!("negate row{i}"));
        }
        applied += 1;
    }
    let t = Mat::from_fn(n, n, |i, j| int(t[i][j]));
    let det = t.det()?;
    if det.abs() != Rat::one() {
        return Err(Error::SingularTransform);
    }
    Ok(MessTransform { t, log, seed })
}

/// Congruence by a random unimodular integer matrix. The transform is stored
/// in the instance metadata so it can be undone exactly.
pub fn mess(
    inst: &SdpInstance,
    seed: u64,
    num_ops: usize,
    entry_bound: i64,
) -> Result<(SdpInstance, MessTransform)> {
    let mt = mess_transform(inst.n(), seed, num_ops, entry_bound)?;
    let mut out = inst.apply_reform(&ReformOp::Congruence { t: mt.t.clone() })?;
    out.meta.ops.pop();
    let composed = match &inst.meta.mess {
        Some(prev) => prev.transform.mul(&mt.t)?,
        None => mt.t.clone(),
    };
    out.meta.mess = Some(MessInfo {
        seed,
        num_ops,
        entry_bound,
        transform: composed,
        log: mt.log.clone(),
    });
    out.meta.seed = Some(seed);
    out.meta.name = out.meta.name.replace("_clean_", "_messy_");
    if let Some(y) = &inst.meta.dual_point {
        // Y ↦ T⁻¹ Y T⁻ᵀ keeps Aᵢ•Y invariant
        let tinv = mt.t.inverse()?;
        out.meta.dual_point = Some(y.congruence_unchecked(&tinv.transpose()));
    }
    Ok((out, mt))
}

/// Undo a recorded messing congruence exactly. Returns the instance unchanged
/// when none is recorded.
pub fn unmess(inst: &SdpInstance) -> Result<SdpInstance> {
    let Some(info) = &inst.meta.mess else {
        return Ok(inst.clone());
    };
    let tinv = info.transform.inverse()?;
    let mut out = inst.apply_reform(&ReformOp::Congruence { t: tinv })?;
    out.meta.ops.pop();
    out.meta.mess = None;
    out.meta.name = out.meta.name.replace("_messy_", "_clean_");
    if let Some(y) = &inst.meta.dual_point {
        out.meta.dual_point = Some(y.congruence_unchecked(&info.transform.transpose()));
    }
    Ok(out)
}

/// Folds `Y ← Y + εI` into the right-hand side: `cᵢ′ = cᵢ − ε·tr(Aᵢ)`.
pub fn perturb_dual(inst: &SdpInstance, eps: &Rat) -> Result<SdpInstance> {
    if eps.is_negative() {
        return Err(Error::InvalidArgument("epsilon must be nonnegative".into()));
    }
    let c: Vec<Rat> = inst
        .a()
        .iter()
        .zip(inst.c())
        .map(|(ai, ci)| ci - eps * ai.trace())
        .collect();
    let mut out = inst.with_objective(c)?;
    out.meta = inst.meta.clone();
    out.meta.known_gap = None;
    out.meta.perturb_eps = Some(eps.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn small_matrices() {
        let p = gen_small(int(1)).unwrap();
        assert_eq!(p.a_i(0), &e(3, 0, 0));
        assert_eq!(p.a_i(1), &sum(&[e(3, 1, 1), e(3, 0, 2)]));
        assert_eq!(p.b(), &SymMat::diag(&[int(1), int(1), int(0)]));
        let g = p.meta.known_gap.unwrap();
        assert_eq!(g.dual, ExtendedRat::Finite(int(1)));
    }

    #[test]
    fn single_recursion() {
        for m in 3..8 {
            let big = gen_single(m, int(1), false).unwrap();
            let small = gen_single(m - 1, int(1), false).unwrap();
            let keep: Vec<usize> = (1..=m).collect();
            for i in 1..m {
                assert_eq!(big.a_i(i).submatrix(&keep), *small.a_i(i - 1));
            }
            assert_eq!(big.b().submatrix(&keep), *small.b());
        }
    }

    #[test]
    fn double_m2_entries() {
        let d = gen_double(2).unwrap();
        let a2 = d.a_i(1);
        assert_eq!(a2.get(1, 1), &int(1));
        assert_eq!(a2.get(0, 4), &int(1));
        assert_eq!(a2.get(2, 4), &int(1));
        assert_eq!(a2.get(3, 3), &int(-1));
        assert_eq!(d.n(), 5);
    }

    #[test]
    fn example51_entries() {
        let p = gen_example51().unwrap();
        let a1 = p.a_i(0);
        assert_eq!(a1.get(0, 2), &int(2));
        assert_eq!(a1.get(0, 3), &int(2));
        assert_eq!(a1.get(1, 1), &int(1));
        let y = p.meta.dual_point.clone().unwrap();
        assert_eq!(p.dual_residual(&y).unwrap(), vec![int(0), int(0)]);
    }

    #[test]
    fn mess_round_trip() {
        let p = gen_small(int(10)).unwrap();
        let (q, mt) = mess(&p, 7, 8, 2).unwrap();
        assert_eq!(mt.t.det().unwrap().abs(), Rat::one());
        assert!(!q.same_data(&p) || mt.t == Mat::identity(3));
        let back = unmess(&q).unwrap();
        assert!(back.same_data(&p));
        let (q0, t0) = mess(&p, 7, 0, 2).unwrap();
        assert_eq!(t0.t, Mat::identity(3));
        assert!(q0.same_data(&p));
    }

    #[test]
    fn perturbation() {
        let p = gen_small(int(10)).unwrap();
        let q = perturb_dual(&p, &rat(1, 1_000_000)).unwrap();
        assert_eq!(q.c(), &[rat(-1, 1_000_000), int(10) - rat(1, 1_000_000)]);
        assert!(perturb_dual(&p, &Rat::zero()).unwrap().same_data(&p));
    }
}
