//! Exact structural gap certificates.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::facial::chain::{eliminate, relint_point, replay_steps, Constraint, Elimination, TraceStep};
use crate::facial::face::Face;
use crate::generators::unmess;
use crate::scalar::{ExtendedRat, Rat};
use crate::sdpmodel::SdpInstance;
use crate::symkernel::{eig_sym, psd_status, solve_affine, AffineSolution, Mat, SymMat};
use crate::tolerances::Tolerances;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CertValue {
    Exact { value: ExtendedRat },
    Inconclusive { reason: String },
}

impl CertValue {
    pub fn exact(&self) -> Option<&ExtendedRat> {
        match self {
            CertValue::Exact { value } => Some(value),
            CertValue::Inconclusive { .. } => None,
        }
    }

    fn inconclusive(reason: impl Into<String>) -> Self {
        CertValue::Inconclusive {
            reason: reason.into(),
        }
    }
}

/// `min Σ yᵢ` over the Σ block subject to `Σ σᵢyᵢ − Σ zⱼ = c₂′`, `y, z ≥ 0`,
/// with `s` slack variables `z`. Data of the terminal diagonal problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedDual {
    #[serde(with = "crate::scalar::rat_vec")]
    pub sigma: Vec<Rat>,
    pub s: usize,
    /// zero-cost coordinates with a positive coefficient
    pub u: usize,
    #[serde(with = "crate::scalar::rat_str")]
    pub c2prime: Rat,
    /// added to the value: the objective was shifted by a multiple of the
    /// active constraint to make it a nonnegative diagonal
    #[serde(with = "crate::scalar::rat_str")]
    pub offset: Rat,
}

impl ReducedDual {
    pub fn value(&self) -> ExtendedRat {
        let base = if self.u > 0 && self.c2prime.is_positive() {
            ExtendedRat::Finite(Rat::zero())
        } else {
            solve_diagonal_lp(&self.sigma, self.s, &self.c2prime)
        };
        base.add_rat(&self.offset)
    }
}

#[derive(Clone, Debug)]
pub struct GapCertificate {
    pub primal: CertValue,
    pub dual: CertValue,
    pub trace: Vec<TraceStep>,
    pub reduced_dual: Option<ReducedDual>,
    /// affine set that contains every feasible `x`
    pub primal_equations: Option<AffineSolution<Rat>>,
    /// indices `d` with `Z(d,d) ≡ 0` that forced the equations
    pub primal_zero_diagonal: Vec<usize>,
    pub weakly_infeasible_dual: bool,
    pub dual_strict_point: Option<SymMat<Rat>>,
    pub dual_face: Face,
    /// the instance was certified in unmessed coordinates
    pub unmessed: bool,
}

impl GapCertificate {
    pub fn values(&self) -> (Option<&ExtendedRat>, Option<&ExtendedRat>) {
        (self.primal.exact(), self.dual.exact())
    }

    /// Positive gap established.
    pub fn has_gap(&self) -> Option<bool> {
        match (self.primal.exact(), self.dual.exact()) {
            (Some(p), Some(d)) => Some(p < d),
            _ => None,
        }
    }

    pub fn x_forced_zero(&self) -> bool {
        self.primal_equations
            .as_ref()
            .is_some_and(|s| s.null.is_empty() && s.particular.iter().all(Zero::is_zero))
    }
}

/// Optimal value of the terminal diagonal problem:
/// `c = 0 → 0`; `c > 0 → c / max σ` when some σ is positive, else +∞;
/// `c < 0 → 0` when `s > 0`, else `|c| / max |σ⁻|` over negative σ, else +∞.
pub fn solve_diagonal_lp(sigma: &[Rat], s: usize, c2prime: &Rat) -> ExtendedRat {
    if c2prime.is_zero() {
        return ExtendedRat::Finite(Rat::zero());
    }
    if c2prime.is_positive() {
        return match sigma.iter().filter(|v| v.is_positive()).max() {
            Some(best) => ExtendedRat::Finite(c2prime / best),
            None => ExtendedRat::PosInf,
        };
    }
    if s > 0 {
        return ExtendedRat::Finite(Rat::zero());
    }
    match sigma.iter().filter(|v| v.is_negative()).map(Signed::abs).max() {
        Some(best) => ExtendedRat::Finite(c2prime.abs() / best),
        None => ExtendedRat::PosInf,
    }
}

fn dual_constraints(inst: &SdpInstance) -> Vec<Constraint> {
    inst.a()
        .iter()
        .zip(inst.c())
        .enumerate()
        .map(|(i, (a, c))| Constraint {
            mat: a.clone(),
            rhs: c.clone(),
            label: format!("A{}", i + 1),
        })
        .collect()
}

/// Primal side. Every feasible `x` satisfies `Z(j,d) = 0` for all `j` whenever
/// `Z(d,d)` vanishes identically on the current affine set.
fn primal_side(inst: &SdpInstance) -> (CertValue, Option<AffineSolution<Rat>>, Vec<usize>) {
    let m = inst.m();
    let n = inst.n();
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    let mut sol = AffineSolution {
        particular: vec![Rat::zero(); m],
        null: (0..m)
            .map(|k| (0..m).map(|i| if i == k { Rat::from_integer(1.into()) } else { Rat::zero() }).collect())
            .collect(),
    };
    let mut forced: Vec<usize> = Vec::new();
    loop {
        let mut grew = false;
        for d in 0..n {
            if forced.contains(&d) {
                continue;
            }
            // Z(d,d) at the particular point and along each null direction
            let coef: Vec<Rat> = inst.a().iter().map(|a| a.get(d, d).clone()).collect();
            let at = inst.b().get(d, d).clone() - dot(&coef, &sol.particular);
            let moves = sol.null.iter().any(|v| !dot(&coef, v).is_zero());
            if !at.is_zero() || moves {
                continue;
            }
            forced.push(d);
            grew = true;
            for j in 0..n {
                rows.push(inst.a().iter().map(|a| a.get(j, d).clone()).collect());
                rhs.push(inst.b().get(j, d).clone());
            }
        }
        if !grew {
            break;
        }
        let a = Mat::from_rows(rows.clone()).expect("rectangular");
        match solve_affine(&a, &rhs) {
            Some(s) => sol = s,
            None => {
                return (
                    CertValue::inconclusive("primal infeasible: forced equations are inconsistent"),
                    None,
                    forced,
                )
            }
        }
    }
    let c = inst.c();
    if sol.null.iter().any(|v| !dot(c, v).is_zero()) {
        return (
            CertValue::inconclusive("objective is not constant on the forced affine set"),
            Some(sol),
            forced,
        );
    }
    let value = dot(c, &sol.particular);
    let tol = Tolerances::default();
    let feasible = |x: &[Rat]| {
        inst.slack_matrix(x)
            .map(|z| psd_status(&z, &tol).is_psd())
            .unwrap_or(false)
    };
    if feasible(&sol.particular) {
        return (CertValue::Exact { value: ExtendedRat::Finite(value) }, Some(sol), forced);
    }
    let zero = vec![Rat::zero(); m];
    if contains_point(&sol, &zero) && feasible(&zero) {
        return (CertValue::Exact { value: ExtendedRat::Finite(value) }, Some(sol), forced);
    }
    if let Some(x) = interior_on_affine_set(inst, &sol, &forced) {
        if feasible(&x) {
            return (CertValue::Exact { value: ExtendedRat::Finite(value) }, Some(sol), forced);
        }
    }
    (
        CertValue::inconclusive("no feasible point found on the forced affine set"),
        Some(sol),
        forced,
    )
}

/// `t` with `B − Σ tₖDₖ` positive definite, by Polyak steps on the smallest
/// eigenvalue aimed at the level 1.
fn polyak_ascent(b: &SymMat<f64>, dirs: &[SymMat<f64>]) -> Option<Vec<f64>> {
    const ITERS: usize = 500;
    let tol = Tolerances::default();
    let mut t = vec![0.0; dirs.len()];
    for _ in 0..ITERS {
        let z = dirs.iter().zip(&t).fold(b.clone(), |acc, (d, tk)| acc.add_scaled(&-tk, d).expect("same order"));
        let e = eig_sym(&z, &tol).ok()?;
        let n = z.order();
        let lmin = e.values[n - 1];
        let scale = z.max_abs().max(1.0);
        if lmin > 1e-6 * scale {
            return Some(t);
        }
        let v = e.vectors.column(n - 1);
        let g: Vec<f64> = dirs
            .iter()
            .map(|d| {
                -(0..n)
                    .map(|i| (0..n).map(|j| v[i] * d.get(i, j) * v[j]).sum::<f64>())
                    .sum::<f64>()
            })
            .collect();
        let gg: f64 = g.iter().map(|x| x * x).sum();
        if gg < 1e-24 {
            return None;
        }
        let step = (1.0 - lmin) / gg;
        for (tk, gk) in t.iter_mut().zip(&g) {
            *tk += step * gk;
        }
    }
    None
}

/// Rational point `p + Nt` of the forced affine set whose slack is positive
/// definite off the forced coordinates. `t` comes from a float ascent and is
/// rounded to a few dyadic grids before its exact binary value is tried.
fn interior_on_affine_set(inst: &SdpInstance, sol: &AffineSolution<Rat>, forced: &[usize]) -> Option<Vec<Rat>> {
    if sol.null.is_empty() {
        return None;
    }
    let free: Vec<usize> = (0..inst.n()).filter(|d| !forced.contains(d)).collect();
    if free.is_empty() {
        return None;
    }
    let combo = |w: &[Rat]| {
        inst.a()
            .iter()
            .zip(w)
            .fold(SymMat::zeros(inst.n()), |acc, (a, x)| acc.add_scaled(x, a).expect("same order"))
    };
    let b = inst.b().sub(&combo(&sol.particular)).expect("same order").submatrix(&free).to_f64();
    let dirs: Vec<SymMat<f64>> = sol.null.iter().map(|v| combo(v).submatrix(&free).to_f64()).collect();
    let t = polyak_ascent(&b, &dirs)?;
    let point = |t: &[Rat]| -> Vec<Rat> {
        let mut x = sol.particular.clone();
        for (v, tk) in sol.null.iter().zip(t) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += tk * vi;
            }
        }
        x
    };
    let psd = |x: &[Rat]| {
        inst.slack_matrix(x)
            .map(|z| psd_status(&z, &Tolerances::default()).is_psd())
            .unwrap_or(false)
    };
    for bits in [0, 1, 2, 4, 8, 16, 24] {
        let den = f64::from(1u32 << bits);
        let t: Vec<Rat> = t
            .iter()
            .map(|v| Rat::new(((v * den).round() as i64).into(), (1i64 << bits).into()))
            .collect();
        let x = point(&t);
        if psd(&x) {
            return Some(x);
        }
    }
    let t: Vec<Rat> = t.iter().map(|v| Rat::from_float(*v)).collect::<Option<_>>()?;
    Some(point(&t))
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

fn contains_point(sol: &AffineSolution<Rat>, x: &[Rat]) -> bool {
    let m = x.len();
    if sol.null.is_empty() {
        return sol.particular == x;
    }
    let a = Mat::from_fn(m, sol.null.len(), |i, k| sol.null[k][i].clone());
    let rhs: Vec<Rat> = x.iter().zip(&sol.particular).map(|(a, b)| a - b).collect();
    solve_affine(&a, &rhs).is_some()
}

/// Terminal step on the final face: at most one active constraint, with it and
/// `B` diagonal on the face, is a one-row linear program.
fn terminal(
    inst: &SdpInstance,
    cons: &[Constraint],
    elim: &Elimination,
) -> (CertValue, Option<ReducedDual>) {
    let face = elim.face();
    let used = elim.used();
    let mut bf = face.restrict(inst.b());
    let active: Vec<(SymMat<Rat>, Rat)> = cons
        .iter()
        .enumerate()
        .filter(|(k, _)| !used.contains(k))
        .map(|(_, c)| (face.restrict(&c.mat), c.rhs.clone()))
        .filter(|(r, rhs)| !(r.is_zero() && rhs.is_zero()))
        .collect();
    let tol = Tolerances::default();
    let mut offset = Rat::zero();
    if let [(r, c)] = active.as_slice() {
        if let Some(mu) = objective_shift(&bf, r) {
            bf = bf.add_scaled(&mu, r).expect("same order");
            offset = -(mu * c);
        }
    }
    if !bf.is_diagonal() || bf.diagonal().iter().any(Signed::is_negative) {
        let psd = psd_status(&bf, &tol).is_psd();
        if active.is_empty() && psd {
            return (CertValue::Exact { value: ExtendedRat::Finite(Rat::zero()) }, None);
        }
        return (
            CertValue::inconclusive("objective is not a nonnegative diagonal on the final face"),
            None,
        );
    }
    match active.as_slice() {
        [] => (CertValue::Exact { value: ExtendedRat::Finite(Rat::zero()) }, None),
        [(r, c)] if r.is_diagonal() => {
            let b = bf.diagonal();
            let mut sigma = Vec::new();
            let mut s = 0;
            let mut u = 0;
            for (bd, rd) in b.iter().zip(r.diagonal()) {
                if bd.is_positive() {
                    sigma.push(rd / bd);
                } else if rd.is_negative() {
                    s += 1;
                } else if rd.is_positive() {
                    u += 1;
                }
            }
            let red = ReducedDual {
                sigma,
                s,
                u,
                c2prime: c.clone(),
                offset,
            };
            (CertValue::Exact { value: red.value() }, Some(red))
        }
        _ => (
            CertValue::inconclusive("more than one non-diagonal constraint remains on the final face"),
            None,
        ),
    }
}

/// `μ` with `B + μR` a nonnegative diagonal, preferring `μ = 0` and otherwise
/// the admissible value nearest to it. On the feasible set the objective only
/// moves by the constant `μc`.
fn objective_shift(b: &SymMat<Rat>, r: &SymMat<Rat>) -> Option<Rat> {
    let n = b.order();
    let mut fixed: Option<Rat> = None;
    for i in 0..n {
        for j in i + 1..n {
            let (bij, rij) = (b.get(i, j), r.get(i, j));
            if rij.is_zero() {
                if !bij.is_zero() {
                    return None;
                }
                continue;
            }
            let mu = -(bij / rij);
            match &fixed {
                Some(f) if *f != mu => return None,
                _ => fixed = Some(mu),
            }
        }
    }
    let (mut lo, mut hi): (Option<Rat>, Option<Rat>) = (None, None);
    for d in 0..n {
        let (bd, rd) = (b.get(d, d), r.get(d, d));
        if rd.is_zero() {
            if bd.is_negative() {
                return None;
            }
            continue;
        }
        let bound = -(bd / rd);
        if rd.is_positive() {
            lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
        } else {
            hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
        }
    }
    let admissible = |mu: &Rat| lo.as_ref().is_none_or(|l| l <= mu) && hi.as_ref().is_none_or(|h| mu <= h);
    if let Some(mu) = fixed {
        return admissible(&mu).then_some(mu);
    }
    let zero = Rat::zero();
    if admissible(&zero) {
        return Some(zero);
    }
    let mu = match (&lo, &hi) {
        (Some(l), _) if l.is_positive() => l.clone(),
        (_, Some(h)) => h.clone(),
        _ => return None,
    };
    admissible(&mu).then_some(mu)
}

/// Reduced row echelon form of the rows `(Aᵢ, cᵢ)` over upper-triangle
/// coordinates. Any sequence of swaps and combinations of the constraints
/// leads to the same system.
fn row_reduced_constraints(inst: &SdpInstance) -> Vec<Constraint> {
    let n = inst.n();
    let idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let rows: Vec<Vec<Rat>> = inst
        .a()
        .iter()
        .zip(inst.c())
        .map(|(a, c)| idx.iter().map(|&(i, j)| a.get(i, j).clone()).chain([c.clone()]).collect())
        .collect();
    let mut mat = Mat::from_rows(rows).expect("rectangular");
    let rank = mat.rref().len();
    (0..rank)
        .map(|k| {
            let row = mat.row(k);
            let mut a = SymMat::zeros(n);
            for (e, &(i, j)) in idx.iter().enumerate() {
                a.set(i, j, row[e].clone());
            }
            Constraint {
                mat: a,
                rhs: row[idx.len()].clone(),
                label: format!("R{}", k + 1),
            }
        })
        .collect()
}

/// Certify the optimal values of primal and dual exactly, or report why not.
/// A recorded messing transform is undone first. When the stored constraints
/// do not settle the dual, their row-reduced form is tried.
pub fn certify_gap(inst: &SdpInstance) -> Result<GapCertificate> {
    let unmessed = inst.meta.mess.is_some();
    let work = unmess(inst)?;
    let cons = dual_constraints(&work);
    let elim = eliminate(&cons, work.n());
    let cert = assemble(&work, &cons, elim, unmessed);
    if cert.dual.exact().is_some() {
        return Ok(cert);
    }
    let reduced = row_reduced_constraints(&work);
    let elim = eliminate(&reduced, work.n());
    let alt = assemble(&work, &reduced, elim, unmessed);
    Ok(if alt.dual.exact().is_some() { alt } else { cert })
}

/// Re-run `trace` on `inst` and rebuild the certificate from it.
pub fn replay(inst: &SdpInstance, trace: &[TraceStep]) -> Option<GapCertificate> {
    let unmessed = inst.meta.mess.is_some();
    let work = unmess(inst).ok()?;
    let stored = dual_constraints(&work);
    let matches = |cons: &[Constraint]| {
        trace
            .iter()
            .all(|s| cons.get(s.constraint).is_some_and(|c| c.label == s.label))
    };
    let cons = if matches(&stored) { stored } else { row_reduced_constraints(&work) };
    let elim = replay_steps(&cons, work.n(), trace)?;
    Some(assemble(&work, &cons, elim, unmessed))
}

fn assemble(work: &SdpInstance, cons: &[Constraint], elim: Elimination, unmessed: bool) -> GapCertificate {
    let (primal, equations, zero_diag) = primal_side(work);
    let mut strict_point = None;
    let (mut dual, reduced) = if elim.infeasible {
        (CertValue::Exact { value: ExtendedRat::PosInf }, None)
    } else {
        terminal(work, cons, &elim)
    };
    if matches!(dual, CertValue::Inconclusive { .. }) && elim.steps.is_empty() {
        // Slater point for the dual: no gap, and the dual value equals the primal value
        let pairs: Vec<(SymMat<Rat>, Rat)> = cons.iter().map(|c| (c.mat.clone(), c.rhs.clone())).collect();
        if let Some(y) = relint_point(&Face::full(work.n()), &pairs) {
            dual = match primal.exact() {
                Some(v @ ExtendedRat::Finite(_)) => CertValue::Exact { value: v.clone() },
                _ => CertValue::inconclusive("dual strictly feasible but primal value unknown"),
            };
            strict_point = Some(y);
        }
    }
    let (primal, dual) = match (primal.exact(), dual.exact()) {
        (Some(p), Some(d)) if p > d => (
            CertValue::inconclusive("weak duality check failed"),
            CertValue::inconclusive("weak duality check failed"),
        ),
        _ => (primal, dual),
    };
    let weakly_infeasible_dual = matches!(primal.exact(), Some(ExtendedRat::Finite(_)))
        && matches!(dual.exact(), Some(ExtendedRat::PosInf));
    GapCertificate {
        primal,
        dual,
        trace: elim.steps.clone(),
        reduced_dual: reduced,
        primal_equations: equations,
        primal_zero_diagonal: zero_diag,
        weakly_infeasible_dual,
        dual_strict_point: strict_point,
        dual_face: elim.face().clone(),
        unmessed,
    }
}
