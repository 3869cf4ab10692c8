//! Singularity degrees, sampling checks of the face-uniqueness claims, and the
//! sequence-length bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facial::certify::certify_gap;
use crate::facial::cone::{minimal_cone, MinimalCone, Which};
use crate::facial::face::Face;
use crate::generators::{gen_double, gen_double_flipped, gen_example51, gen_single, gen_small, unmess};
use crate::scalar::{int, ExtendedRat, Rat};
use crate::sdpmodel::{Family, SdpInstance};
use crate::symkernel::{psd_status, Mat, PsdStatus, SymMat};
use crate::tolerances::Tolerances;
use num_traits::{One, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeKind {
    /// value of a theorem for a recognized family, matched by the computed sequence
    Theorem,
    /// upper bound that meets the trivial lower bound
    Exact,
    /// length of the sequence found; the true degree may be smaller
    Upper,
}

#[derive(Clone, Debug)]
pub struct SingularityDegree {
    pub which: Which,
    pub value: usize,
    pub kind: DegreeKind,
    pub cone: MinimalCone,
    pub claim: Option<ClaimReport>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub trials: usize,
    pub passed: usize,
    /// sampled members that were valid strict steps (and matched the reference face)
    pub strict_steps: usize,
    /// sampled members that were not valid strict steps
    pub rejected: usize,
    pub span_size: usize,
    /// psd members found while sampling the whole constraint span
    pub psd_span_members: usize,
    /// exact last-row argument for the single family
    pub symbolic_last_row: Option<bool>,
}

/// The clean family instance this one equals, if any.
pub fn recognize(inst: &SdpInstance) -> Option<Family> {
    let work = unmess(inst).ok()?;
    let fam = work.meta.family?;
    let m = work.m();
    let scale = work.meta.scale.clone().unwrap_or_else(Rat::one);
    let regen = match fam {
        Family::Small => gen_small(scale),
        Family::SingleFinite => gen_single(m, scale, false),
        Family::SingleInfinite => gen_single(m, scale, true),
        Family::Double => gen_double(m),
        Family::DoubleFlipped => gen_double_flipped(m),
        Family::Example51 => gen_example51(),
        Family::Custom => return None,
    }
    .ok()?;
    regen.same_data(&work).then_some(fam)
}

fn theorem_value(fam: Family, which: Which, m: usize) -> Option<usize> {
    match (fam, which) {
        (Family::Small | Family::SingleFinite, Which::D) => Some(m - 1),
        (Family::Double, Which::D) => Some(m - 1),
        (Family::Double, Which::HD) => Some(m),
        (Family::Example51, Which::HD) => Some(3),
        _ => None,
    }
}

pub fn singularity_degree(
    inst: &SdpInstance,
    which: Which,
    claim_trials: usize,
    seed: u64,
) -> Result<SingularityDegree> {
    let cone = minimal_cone(inst, which)?;
    let upper = cone.sequence.len();
    let theorem = recognize(inst).and_then(|f| theorem_value(f, which, inst.m()));
    let (value, kind) = match theorem {
        Some(t) if t == upper => (t, DegreeKind::Theorem),
        Some(t) => {
            return Err(Error::ClaimViolated(format!(
                "computed sequence has length {upper}, expected {t}"
            )))
        }
        None if upper <= 1 => (upper, DegreeKind::Exact),
        None => (upper, DegreeKind::Upper),
    };
    let claim = if claim_trials > 0 && kind == DegreeKind::Theorem {
        Some(claim_check(inst, which, claim_trials, seed)?)
    } else {
        None
    };
    Ok(SingularityDegree {
        which,
        value,
        kind,
        cone,
        claim,
    })
}

/// Basis of the sampling span. For D: combinations `Σ λᵢAᵢ` with `Σ λᵢcᵢ = 0`.
/// For HD: `B` and the constraints used by the reference sequence.
fn span_basis(work: &SdpInstance, which: Which, cone: &MinimalCone) -> Vec<SymMat<Rat>> {
    match which {
        Which::D => {
            let c = Mat::from_rows(vec![work.c().to_vec()]).expect("one row");
            c.kernel()
                .into_iter()
                .map(|lam| {
                    lam.iter()
                        .zip(work.a())
                        .fold(SymMat::zeros(work.n()), |acc, (l, a)| acc.add_scaled(l, a).expect("order"))
                })
                .collect()
        }
        Which::HD => {
            let mut out = vec![work.b().clone()];
            for label in &cone.sequence.labels {
                let name = label.trim_start_matches('-');
                if let Some(i) = name.strip_prefix('A').and_then(|s| s.parse::<usize>().ok()) {
                    out.push(work.a_i(i - 1).clone());
                }
            }
            out
        }
    }
}

fn combo(basis: &[SymMat<Rat>], coef: &[i64], n: usize) -> SymMat<Rat> {
    basis
        .iter()
        .zip(coef)
        .filter(|(_, &k)| k != 0)
        .fold(SymMat::zeros(n), |acc, (b, &k)| acc.add_scaled(&int(k), b).expect("order"))
}

fn nonzero_coef(rng: &mut ChaCha8Rng, len: usize) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..len).map(|_| rng.gen_range(-5..=5)).collect();
        if v.iter().any(|&k| k != 0) {
            return v;
        }
    }
}

#[derive(Default)]
struct TrialOutcome {
    strict: usize,
    rejected: usize,
    counterexample: Option<String>,
}

fn run_trial(
    basis: &[SymMat<Rat>],
    reference: &[SymMat<Rat>],
    faces: &[Face],
    n: usize,
    seed: u64,
) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TrialOutcome::default();
    for (i, y_ref) in reference.iter().enumerate() {
        let face = &faces[i];
        let vanishing: Vec<&SymMat<Rat>> = basis.iter().filter(|b| face.restrict(b).is_zero()).collect();
        let y = match rng.gen_range(0..3) {
            0 => {
                let alpha = int(rng.gen_range(1..=5));
                vanishing.iter().fold(y_ref.scale(&alpha), |acc, z| {
                    acc.add_scaled(&int(rng.gen_range(-5..=5)), z).expect("order")
                })
            }
            1 => combo(basis, &nonzero_coef(&mut rng, basis.len()), n),
            _ => {
                let alpha = int(rng.gen_range(1..=5));
                let j = rng.gen_range(0..basis.len());
                let mut g = rng.gen_range(-5..=4);
                if g >= 0 {
                    g += 1;
                }
                y_ref.scale(&alpha).add_scaled(&int(g), &basis[j]).expect("order")
            }
        };
        let r = face.restrict(&y);
        let st = psd_status(&r, &Tolerances::default());
        if st.is_psd() && st != PsdStatus::Zero {
            out.strict += 1;
            let next = face.intersect_perp(&y).expect("psd restriction");
            if !next.same_as(&faces[i + 1]) {
                out.counterexample = Some(format!(
                    "step {}: member {:?} gives face {next}, expected {}",
                    i + 1,
                    y,
                    faces[i + 1]
                ));
                return out;
            }
        } else {
            out.rejected += 1;
        }
    }
    out
}

/// Sample facial reduction steps inside the relevant span and check that each
/// valid strict step reaches the same face as the reference sequence.
pub fn claim_check(inst: &SdpInstance, which: Which, trials: usize, seed: u64) -> Result<ClaimReport> {
    let cone = minimal_cone(inst, which)?;
    let work = unmess(inst)?;
    let n = work.n();
    let basis = span_basis(&work, which, &cone);
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty sampling span".into()));
    }
    let reference = &cone.sequence.matrices;
    let faces = &cone.chain;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64);
            run_trial(&basis, reference, faces, n, s)
        })
        .collect();
    let mut report = ClaimReport {
        trials,
        span_size: basis.len(),
        ..ClaimReport::default()
    };
    for o in &outcomes {
        if let Some(msg) = &o.counterexample {
            return Err(Error::ClaimViolated(msg.clone()));
        }
        report.passed += 1;
        report.strict_steps += o.strict;
        report.rejected += o.rejected;
    }
    if matches!(recognize(inst), Some(Family::Small | Family::SingleFinite | Family::SingleInfinite)) {
        let (psd_hits, symbolic) = single_family_fact(&work, trials, seed)?;
        report.psd_span_members = psd_hits;
        report.symbolic_last_row = Some(symbolic);
    }
    Ok(report)
}

/// Every psd member of `span{A₁,…,A_m}` of the single family is a multiple of
/// `A₁`. Checked by sampling and by the exact last-row argument: the last
/// diagonal entry of every `Aᵢ` is zero and entry `(j−1, n)` is nonzero only in
/// `A_j`, so psd forces `λ_j = 0` for `j ≥ 2`.
fn single_family_fact(work: &SdpInstance, trials: usize, seed: u64) -> Result<(usize, bool)> {
    let n = work.n();
    let m = work.m();
    let last = n - 1;
    let symbolic = work.a().iter().all(|a| a.get(last, last).is_zero())
        && (1..m).all(|j| {
            (0..m).all(|i| {
                let v = work.a_i(i).get(j - 1, last);
                if i == j {
                    !v.is_zero()
                } else {
                    v.is_zero()
                }
            })
        });
    if !symbolic {
        return Err(Error::ClaimViolated("last-row structure does not hold".into()));
    }
    let hits: Vec<Option<std::result::Result<(), String>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A ^ (t as u64) << 20);
            let mut coef = nonzero_coef(&mut rng, m);
            // half the samples sit near the claimed answer to exercise the psd side
            if rng.gen_bool(0.5) {
                coef.iter_mut().skip(1).for_each(|k| {
                    if rng.gen_bool(0.7) {
                        *k = 0;
                    }
                });
                if coef.iter().all(|&k| k == 0) {
                    coef[0] = 1;
                }
            }
            let y = combo(work.a(), &coef, n);
            let psd = psd_status(&y, &Tolerances::default()).is_psd();
            if !psd {
                return None;
            }
            if coef[1..].iter().any(|&k| k != 0) {
                Some(Err(format!("psd member with coefficients {coef:?}")))
            } else {
                Some(Ok(()))
            }
        })
        .collect();
    let mut count = 0;
    for h in hits.into_iter().flatten() {
        h.map_err(Error::ClaimViolated)?;
        count += 1;
    }
    Ok((count, symbolic))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeBound {
    pub value: usize,
    pub kind: DegreeKind,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictDualCheck {
    pub x_forced_zero: bool,
    pub dual_strictly_feasible: bool,
    pub values_equal_zero: bool,
}

#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub m: usize,
    /// `None` when (D) is infeasible
    pub d: Option<DegreeBound>,
    pub hd: DegreeBound,
    /// conclusions checked when `d(HD) = m + 1` is established
    pub max_degree: Option<StrictDualCheck>,
}

/// `d(D) ≤ m` and `d(HD) ≤ m + 1` for the sequences found. When `d(HD) = m + 1`
/// is established, the only feasible `x` is zero, (D) is strictly feasible and
/// both optimal values are zero.
pub fn bounds_check(inst: &SdpInstance) -> Result<BoundsReport> {
    let m = inst.m();
    let d = match singularity_degree(inst, Which::D, 0, 0) {
        Ok(sd) => Some(DegreeBound {
            value: sd.value,
            kind: sd.kind,
            bound: m,
        }),
        Err(Error::Infeasible(_)) => None,
        Err(e) => return Err(e),
    };
    let sd_hd = singularity_degree(inst, Which::HD, 0, 0)?;
    let hd = DegreeBound {
        value: sd_hd.value,
        kind: sd_hd.kind,
        bound: m + 1,
    };
    if let Some(d) = &d {
        if d.value > m {
            return Err(Error::BoundViolated(format!("d(D) = {} exceeds m = {m}", d.value)));
        }
    }
    if hd.value > m + 1 {
        return Err(Error::BoundViolated(format!("d(HD) = {} exceeds m + 1 = {}", hd.value, m + 1)));
    }
    let max_degree = if hd.value == m + 1 && hd.kind != DegreeKind::Upper {
        let cert = certify_gap(inst)?;
        let zero = ExtendedRat::Finite(Rat::zero());
        let meta_point = unmess(inst)?.meta.dual_point.as_ref().is_some_and(|y| {
            let work = unmess(inst).expect("unmessed above");
            work.dual_residual(y).is_ok_and(|r| r.iter().all(Zero::is_zero))
                && psd_status(y, &Tolerances::default()) == PsdStatus::PositiveDefinite
        });
        let check = StrictDualCheck {
            x_forced_zero: cert.x_forced_zero(),
            dual_strictly_feasible: cert.dual_strict_point.is_some() || meta_point,
            values_equal_zero: cert.primal.exact() == Some(&zero) && cert.dual.exact() == Some(&zero),
        };
        if !(check.x_forced_zero && check.dual_strictly_feasible && check.values_equal_zero) {
            return Err(Error::ClaimViolated(format!(
                "d(HD) = m + 1 but the strict-dual conclusions fail: {check:?}"
            )));
        }
        Some(check)
    } else {
        None
    };
    Ok(BoundsReport { m, d, hd, max_degree })
}
