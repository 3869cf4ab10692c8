//! Float reformulation of two-variable SDPs into the canonical positive-gap
//! shape, with the verdicts that rule a gap out along the way.

mod normalize;
mod rotate;
mod witness;

pub use normalize::{max_rank_point, normalize_b, NormalizedB};
pub use rotate::{lemma_rotate, Rotation};
pub use witness::{gs_witness, least_squares_y0, Witness, WitnessSearch, AMBIGUITY_FACTOR};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ExtendedRat, Rat};
use crate::sdpmodel::{ReformOp, SdpInstance};
use crate::symkernel::{psd_status, Mat, PsdStatus, SymMat};
use crate::tolerances::Tolerances;
use rotate::{block_diag, eigen};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoGapReason {
    /// the maximum-rank slack is positive definite
    PrimalStrictlyFeasible,
    /// every feasible slack is zero
    ZeroRankSlack,
    DualStrictlyFeasible,
    PencilWitnessNotFound,
    /// the trailing block of `A₂′` is indefinite
    SIndefinite,
    /// `W ≠ 0`: dual values approach zero
    WNonzeroGapZero,
    /// `M = 0` and `W = 0`: the reduced problem is a linear program
    MWZeroLpEquality,
    ObjectiveZero,
    /// `s > 0` with `c₂′ < 0`: a dual point of value zero exists
    SlackBlockFeasible,
}

#[derive(Clone, Debug)]
pub struct NoGapVerdict {
    pub reason: NoGapReason,
    pub detail: String,
    /// object justifying the verdict, in the coordinates of `stage_instance`
    pub witness: Option<SymMat<f64>>,
    pub stage_instance: Option<SdpInstance<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub p: usize,
    pub r: usize,
    pub s: usize,
    pub lambda: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `p × (n − r − s)`
    pub m_block: Mat<f64>,
    pub c2prime: f64,
    pub transform_log: Vec<ReformOp<f64>>,
    pub backend: Backend,
    /// largest deviation between the replayed log and the snapped template
    pub residual: f64,
    /// canonical optimal values exceed the original ones by this amount
    pub value_shift: f64,
    /// rows of the canonical constraints in terms of the original ones
    pub row_transform: [[f64; 2]; 2],
    pub x_star: Vec<f64>,
    pub canonical: SdpInstance<f64>,
    pub witness: Witness,
}

#[derive(Clone, Debug)]
pub enum Canonical {
    Form(Box<CanonicalForm>),
    NoGap(Box<NoGapVerdict>),
    Inconclusive { stage: String, reason: String },
}

impl Canonical {
    pub fn form(&self) -> Option<&CanonicalForm> {
        match self {
            Canonical::Form(f) => Some(f),
            _ => None,
        }
    }
}

/// Float version of the terminal diagonal problem's value, `None` for +∞.
pub fn diagonal_lp_value(sigma: &[f64], s: usize, c2prime: f64, zero: f64) -> Option<f64> {
    if c2prime.abs() <= zero {
        return Some(0.0);
    }
    if c2prime > 0.0 {
        let best = sigma.iter().copied().filter(|&v| v > zero).fold(f64::NEG_INFINITY, f64::max);
        return (best > 0.0).then(|| c2prime / best);
    }
    if s > 0 {
        return Some(0.0);
    }
    let best = sigma.iter().copied().filter(|&v| v < -zero).map(f64::abs).fold(0.0, f64::max);
    (best > 0.0).then(|| -c2prime / best)
}

struct Stage {
    cur: SdpInstance<f64>,
    log: Vec<ReformOp<f64>>,
    rows: [[f64; 2]; 2],
}

impl Stage {
    fn apply(&mut self, op: ReformOp<f64>) -> Result<()> {
        self.cur = self.cur.apply_reform(&op)?;
        match &op {
            ReformOp::Swap { .. } => self.rows.swap(0, 1),
            ReformOp::Combine { i, lambda, j, mu } => {
                for k in 0..2 {
                    self.rows[*i][k] = lambda * self.rows[*i][k] + mu * self.rows[*j][k];
                }
            }
            _ => {}
        }
        self.log.push(op);
        Ok(())
    }

    fn negate_second(&mut self) -> Result<()> {
        self.apply(ReformOp::Combine {
            i: 1,
            lambda: -1.0,
            j: 0,
            mu: 0.0,
        })
    }

    fn a2(&self) -> &SymMat<f64> {
        self.cur.a_i(1)
    }
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

fn max_abs(m: &Mat<f64>) -> f64 {
    m.to_rows().iter().flatten().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn no_gap(reason: NoGapReason, detail: impl Into<String>, witness: Option<SymMat<f64>>, at: &SdpInstance<f64>) -> Canonical {
    Canonical::NoGap(Box::new(NoGapVerdict {
        reason,
        detail: detail.into(),
        witness,
        stage_instance: Some(at.clone()),
    }))
}

/// Positive definite `Y′` with `S•Y′ = c` for indefinite `S`.
fn pd_solution(s: &SymMat<f64>, c: f64, tol: &Tolerances) -> Result<SymMat<f64>> {
    let (vals, vecs) = eigen(s, tol)?;
    let k = vals.len();
    let tr = s.trace();
    let (val, col) = if c >= tr { (vals[0], 0) } else { (vals[k - 1], k - 1) };
    let u = vecs.column(col);
    let alpha = (c - tr) / val;
    let outer = SymMat::from_upper(k, |i, j| u[i] * u[j]);
    SymMat::identity(k).add_scaled(&alpha, &outer)
}

/// Try `Y₀ + t·P` with `P` the projection of `I` onto `{Y : Aᵢ•Y = 0}`.
fn strictly_feasible_dual(inst: &SdpInstance<f64>, tol: &Tolerances) -> Option<SymMat<f64>> {
    let y0 = least_squares_y0(inst).ok()?;
    let m = inst.m();
    let gram = Mat::from_fn(m, m, |i, j| inst.a_i(i).inner(inst.a_i(j)).expect("same order"));
    let tr: Vec<f64> = inst.a().iter().map(SymMat::trace).collect();
    let beta = crate::symkernel::solve_affine(&gram, &tr)?.particular;
    let p = inst
        .a()
        .iter()
        .zip(&beta)
        .fold(SymMat::identity(inst.n()), |acc, (a, b)| acc.add_scaled(&-b, a).expect("same order"));
    let mut t = 1e-3;
    for _ in 0..40 {
        let y = y0.add_scaled(&t, &p).expect("same order");
        if psd_status(&y, tol) == PsdStatus::PositiveDefinite {
            return Some(y);
        }
        t *= 2.0;
    }
    None
}

/// Canonicalize an exact instance through the float pipeline.
pub fn canonicalize(inst: &SdpInstance<Rat>, tol: &Tolerances) -> Result<Canonical> {
    canonicalize_f64(&inst.to_f64(), tol, false)
}

/// With `homogeneous`, the objective is ignored and the canonical objective is
/// set to `(0, 1)`; the corresponding original objective is
/// `row_transform⁻¹ (0, 1)`.
pub fn canonicalize_f64(orig: &SdpInstance<f64>, tol: &Tolerances, homogeneous: bool) -> Result<Canonical> {
    if orig.m() != 2 {
        return Err(Error::InvalidArgument(format!("canonicalization needs m = 2, got {}", orig.m())));
    }
    let n = orig.n();
    let base = if homogeneous {
        orig.with_objective(vec![0.0, 0.0])?
    } else {
        orig.clone()
    };
    let cscale = orig.c().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !homogeneous && cscale <= tol.zero {
        return Ok(no_gap(NoGapReason::ObjectiveZero, "c = 0", None, orig));
    }

    let nb = normalize_b(&base, tol)?;
    let r = nb.r;
    if r == n {
        return Ok(no_gap(NoGapReason::PrimalStrictlyFeasible, "maximum-rank slack is positive definite", None, &nb.inst));
    }
    if r == 0 {
        return Ok(no_gap(NoGapReason::ZeroRankSlack, "every feasible slack is zero", None, &nb.inst));
    }
    let mut st = Stage {
        cur: nb.inst.clone(),
        log: nb.ops.clone(),
        rows: [[1.0, 0.0], [0.0, 1.0]],
    };

    let wit = match gs_witness(&st.cur, homogeneous, tol)? {
        WitnessSearch::Found(w) => w,
        WitnessSearch::NotFound { best_min_eig, .. } => {
            let detail = format!("best normalized min eigenvalue {best_min_eig:e}");
            return Ok(match strictly_feasible_dual(&st.cur, tol).filter(|_| !homogeneous) {
                Some(y) => no_gap(NoGapReason::DualStrictlyFeasible, detail, Some(y), &st.cur),
                None => no_gap(NoGapReason::PencilWitnessNotFound, detail, None, &st.cur),
            });
        }
        WitnessSearch::Ambiguous { best_min_eig, .. } => {
            return Ok(Canonical::Inconclusive {
                stage: "witness".into(),
                reason: format!("best normalized min eigenvalue {best_min_eig:e} is within the ambiguity margin"),
            })
        }
    };

    // make the witness the first constraint
    let (l0, l1) = (wit.lambda[0], wit.lambda[1]);
    if l0.abs() >= l1.abs() {
        st.apply(ReformOp::Combine {
            i: 0,
            lambda: l0,
            j: 1,
            mu: l1,
        })?;
    } else {
        st.apply(ReformOp::Combine {
            i: 1,
            lambda: l1,
            j: 0,
            mu: l0,
        })?;
        st.apply(ReformOp::Swap { i: 0, j: 1 })?;
    }

    // the witness lives in the leading r×r block
    let a1 = st.cur.a_i(0).clone();
    let scale1 = a1.max_abs().max(1.0);
    let outside = (0..n)
        .flat_map(|i| (r..n).map(move |j| (i, j)))
        .fold(0.0f64, |acc, (i, j)| acc.max(a1.get(i, j).abs()));
    if outside > tol.zero * scale1 {
        return Ok(Canonical::Inconclusive {
            stage: "witness support".into(),
            reason: format!("witness has entries of size {outside:e} outside the slack range"),
        });
    }
    let (lam_vals, q) = eigen(&a1.submatrix(&range(0, r)), tol)?;
    let lmax = lam_vals[0];
    let p = lam_vals.iter().filter(|&&l| l > tol.rank * lmax.max(1e-300)).count();
    if p == 0 {
        return Ok(Canonical::Inconclusive {
            stage: "witness".into(),
            reason: "witness restricted to the slack range vanishes".into(),
        });
    }
    st.apply(ReformOp::Congruence {
        t: block_diag(&q, &Mat::identity(n - r)),
    })?;
    let lambda: Vec<f64> = lam_vals[..p].to_vec();

    // trailing block of A₂′
    let s_block = st.a2().submatrix(&range(r, n));
    match psd_status(&s_block, tol) {
        PsdStatus::Indefinite => {
            let c2 = st.cur.c()[1];
            let y = pd_solution(&s_block, c2, tol)?;
            return Ok(no_gap(
                NoGapReason::SIndefinite,
                "trailing block of the second constraint is indefinite",
                Some(y),
                &st.cur,
            ));
        }
        PsdStatus::NegativeSemidefinite => st.negate_second()?,
        _ => {}
    }

    let rot = lemma_rotate(&st.a2().submatrix(&range(p, n)), r - p, n - r, tol)?;
    st.apply(ReformOp::Congruence {
        t: block_diag(&Mat::identity(p), &rot.t),
    })?;
    st.negate_second()?;
    let s = rot.s;

    let a2 = st.a2().clone();
    let zt = tol.zero * a2.max_abs().max(1.0);
    let tail = range(r + s, n);
    let w = a2.block(&range(p, r), &tail);
    let m_block = a2.block(&range(0, p), &tail);
    let (w_norm, m_norm) = (max_abs(&w), max_abs(&m_block));
    if w_norm > zt {
        return Ok(no_gap(
            NoGapReason::WNonzeroGapZero,
            format!("W has entries of size {w_norm:e}"),
            None,
            &st.cur,
        ));
    }
    if m_norm <= zt {
        return Ok(no_gap(NoGapReason::MWZeroLpEquality, "M = 0 and W = 0", None, &st.cur));
    }

    let mut c2 = st.cur.c()[1];
    if homogeneous {
        c2 = 1.0;
        // both signs induce a gap; prefer the one with a finite dual value
        let a2 = st.a2();
        let has = |pos: bool| (p..r).any(|i| if pos { *a2.get(i, i) > zt } else { *a2.get(i, i) < -zt });
        if s == 0 && !has(true) && has(false) {
            st.negate_second()?;
        }
    } else {
        if c2.abs() <= tol.zero * cscale.max(1.0) {
            return Ok(no_gap(NoGapReason::ObjectiveZero, "c₂′ = 0 after reformulation", None, &st.cur));
        }
        if c2 < 0.0 && s > 0 {
            let mut y = SymMat::zeros(n);
            for i in r..r + s {
                y.set(i, i, -c2 / s as f64);
            }
            return Ok(no_gap(
                NoGapReason::SlackBlockFeasible,
                "c₂′ < 0 with s > 0 gives a dual point of value zero",
                Some(y),
                &st.cur,
            ));
        }
        if c2 < 0.0 {
            st.negate_second()?;
            c2 = -c2;
        }
    }

    let a2 = st.a2().clone();
    let sigma: Vec<f64> = (p..r).map(|i| *a2.get(i, i)).collect();
    let m_block = a2.block(&range(0, p), &tail);
    let template_a1 = SymMat::diag(&(0..n).map(|i| if i < p { lambda[i] } else { 0.0 }).collect::<Vec<_>>());
    let template_a2 = SymMat::from_upper(n, |i, j| {
        let v = *a2.get(i, j);
        if i < p {
            // free row block except inside the zero tail of the leading rows
            v
        } else if i < r {
            if i == j {
                v
            } else {
                0.0
            }
        } else if i < r + s && i == j {
            -1.0
        } else {
            0.0
        }
    });
    let template_b = SymMat::diag(&(0..n).map(|i| if i < r { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    let canonical = SdpInstance::new(vec![template_a1, template_a2], template_b, vec![0.0, c2])?;

    let replay = base.apply_all(&st.log)?;
    let mut residual = replay
        .b()
        .max_abs_diff(canonical.b())
        .max(replay.a_i(0).max_abs_diff(canonical.a_i(0)))
        .max(replay.a_i(1).max_abs_diff(canonical.a_i(1)));
    if !homogeneous {
        residual = residual
            .max(replay.c()[0].abs())
            .max((replay.c()[1] - c2).abs());
    }

    Ok(Canonical::Form(Box::new(CanonicalForm {
        p,
        r,
        s,
        lambda,
        sigma,
        m_block,
        c2prime: c2,
        transform_log: st.log,
        backend: Backend::Float,
        residual,
        value_shift: nb.value_shift,
        row_transform: st.rows,
        x_star: nb.x_star,
        canonical,
        witness: wit,
    })))
}

/// Values certified by the canonical shape, in the original coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefCertificate {
    pub primal: f64,
    /// `None` means +∞
    pub dual: Option<f64>,
    pub canonical_primal: f64,
    pub canonical_dual: Option<f64>,
}

impl PrefCertificate {
    pub fn dual_extended(&self) -> ExtendedRat {
        match self.dual {
            Some(v) => ExtendedRat::Finite(Rat::from_float(v).unwrap_or_default()),
            None => ExtendedRat::PosInf,
        }
    }
}

pub fn recognize_pref(form: &CanonicalForm, tol: &Tolerances) -> Result<PrefCertificate> {
    let zt = tol.zero;
    let violations = [
        (form.p == 0 || form.p > form.r, "0 < p <= r"),
        (form.r >= form.canonical.n(), "r < n"),
        (form.lambda.iter().any(|&l| l <= 0.0), "Λ positive"),
        (max_abs(&form.m_block) <= zt, "M ≠ 0"),
        (form.c2prime <= 0.0, "c₂′ > 0"),
    ];
    if let Some((_, what)) = violations.iter().find(|(bad, _)| *bad) {
        return Err(Error::ClaimViolated(format!("canonical form fails {what}")));
    }
    let dual = diagonal_lp_value(&form.sigma, form.s, form.c2prime, zt);
    Ok(PrefCertificate {
        primal: -form.value_shift,
        dual: dual.map(|d| d - form.value_shift),
        canonical_primal: 0.0,
        canonical_dual: dual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttainmentReport {
    /// optimal `x` in the original coordinates
    pub primal_point: Vec<f64>,
    pub primal_value: f64,
    pub primal_attained: bool,
    pub dual_feasible: bool,
    pub dual_value: Option<f64>,
    pub dual_attained: bool,
    /// the objective is constant on the feasible set
    pub objective_identically_zero: bool,
}

/// Both problems attain their values when a positive gap is present.
pub fn attainment_report(inst: &SdpInstance<Rat>, tol: &Tolerances) -> Result<AttainmentReport> {
    let form = match canonicalize(inst, tol)? {
        Canonical::Form(f) => f,
        other => {
            return Err(Error::InvalidArgument(format!(
                "no canonical form: {}",
                match other {
                    Canonical::NoGap(v) => format!("{:?}", v.reason),
                    Canonical::Inconclusive { reason, .. } => reason,
                    Canonical::Form(_) => unreachable!(),
                }
            )))
        }
    };
    let cert = recognize_pref(&form, tol)?;
    // x₂′ = 0 is forced by M ≠ 0 and x₁′ does not enter the objective, so the
    // canonical objective vanishes on the feasible set; x′ = 0 maps to x*.
    let x = &form.x_star;
    let slack = inst.to_f64().slack_matrix(x)?;
    let primal_attained = psd_status(&slack, tol).is_psd();
    Ok(AttainmentReport {
        primal_point: x.clone(),
        primal_value: cert.primal,
        primal_attained,
        dual_feasible: cert.dual.is_some(),
        dual_value: cert.dual,
        dual_attained: cert.dual.is_some(),
        objective_identically_zero: form.canonical.c()[0] == 0.0 && max_abs(&form.m_block) > tol.zero,
    })
}

#[derive(Clone, Debug)]
pub struct GapInducing {
    pub exists: bool,
    /// objective giving a positive gap, in the original coordinates
    pub c: Option<Vec<f64>>,
    pub outcome: Canonical,
}

/// Whether some objective gives `A₁, A₂, B` a positive duality gap.
pub fn exists_gap_inducing_c(a1: &SymMat<f64>, a2: &SymMat<f64>, b: &SymMat<f64>, tol: &Tolerances) -> Result<GapInducing> {
    let inst = SdpInstance::new(vec![a1.clone(), a2.clone()], b.clone(), vec![0.0, 0.0])?;
    let outcome = canonicalize_f64(&inst, tol, true)?;
    match &outcome {
        Canonical::Form(f) => {
            let [[a, b], [c, d]] = f.row_transform;
            let det = a * d - b * c;
            // R c = (0, 1)  ⇒  c = R⁻¹ (0, 1)
            let cvec = vec![-b / det, a / det];
            Ok(GapInducing {
                exists: true,
                c: Some(cvec),
                outcome,
            })
        }
        Canonical::NoGap(_) => Ok(GapInducing {
            exists: false,
            c: None,
            outcome,
        }),
        Canonical::Inconclusive { reason, .. } => Err(Error::Unstructured(reason.clone())),
    }
}
