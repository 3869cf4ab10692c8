//! Exact elimination over a list of linear constraints `Mᵢ • Y = rᵢ, Y ⪰ 0`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::facial::face::Face;
use crate::scalar::{int, Rat};
use crate::symkernel::{psd_status, solve_affine, Mat, PsdStatus, SymMat};
use crate::tolerances::Tolerances;

#[derive(Clone, Debug)]
pub struct Constraint {
    pub mat: SymMat<Rat>,
    pub rhs: Rat,
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// psd restriction, zero right-hand side: its support is zeroed
    PsdZeroRhs,
    /// negative semidefinite restriction, zero right-hand side: negated, then zeroed
    NsdZeroRhs,
    /// vanishing restriction with nonzero right-hand side
    ZeroRestrictionNonzeroRhs,
    /// psd restriction with negative right-hand side
    PsdNegativeRhs,
    /// negative semidefinite restriction with positive right-hand side
    NsdPositiveRhs,
}

impl Rule {
    pub fn proves_infeasible(self) -> bool {
        !matches!(self, Rule::PsdZeroRhs | Rule::NsdZeroRhs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub constraint: usize,
    pub label: String,
    /// coordinates removed from the face by this step (axis faces)
    pub zeroed: Vec<usize>,
    pub rule: Rule,
}

#[derive(Clone, Debug)]
pub struct Elimination {
    pub faces: Vec<Face>,
    pub steps: Vec<TraceStep>,
    /// sign-normalized members of the facial reduction sequence
    pub members: Vec<SymMat<Rat>>,
    pub member_labels: Vec<String>,
    /// index of the step that proved infeasibility, if any
    pub infeasible: bool,
}

impl Elimination {
    pub fn face(&self) -> &Face {
        self.faces.last().expect("starts with the full cone")
    }

    pub fn used(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.constraint).collect()
    }
}

/// Classify a constraint against the current face. `None` when no rule applies.
fn applicable(face: &Face, c: &Constraint) -> Option<(Rule, SymMat<Rat>)> {
    let r = face.restrict(&c.mat);
    let st = psd_status(&r, &Tolerances::default());
    let sign = c.rhs.signum();
    match st {
        PsdStatus::Zero => (!c.rhs.is_zero()).then(|| (Rule::ZeroRestrictionNonzeroRhs, c.mat.clone())),
        s if s.is_psd() => {
            if sign.is_zero() {
                Some((Rule::PsdZeroRhs, c.mat.clone()))
            } else if sign.is_negative() {
                Some((Rule::PsdNegativeRhs, c.mat.clone()))
            } else {
                None
            }
        }
        PsdStatus::NegativeSemidefinite => {
            if sign.is_zero() {
                Some((Rule::NsdZeroRhs, c.mat.neg()))
            } else if sign.is_positive() {
                Some((Rule::NsdPositiveRhs, c.mat.clone()))
            } else {
                None
            }
        }
        _ => None,
    }
}

fn zeroed_between(before: &Face, after: &Face) -> Vec<usize> {
    match (before, after) {
        (Face::Axis { zero: a, .. }, Face::Axis { zero: b, .. }) => b.difference(a).copied().collect(),
        _ => Vec::new(),
    }
}

fn apply(state: &mut Elimination, k: usize, c: &Constraint, rule: Rule, member: SymMat<Rat>) {
    let before = state.face().clone();
    if rule.proves_infeasible() {
        state.steps.push(TraceStep {
            constraint: k,
            label: c.label.clone(),
            zeroed: Vec::new(),
            rule,
        });
        state.infeasible = true;
        return;
    }
    let after = before
        .intersect_perp(&member)
        .expect("rule checked the restriction is psd");
    state.steps.push(TraceStep {
        constraint: k,
        label: c.label.clone(),
        zeroed: zeroed_between(&before, &after),
        rule,
    });
    let label = if rule == Rule::NsdZeroRhs {
        format!("-{}", c.label)
    } else {
        c.label.clone()
    };
    state.members.push(member);
    state.member_labels.push(label);
    state.faces.push(after);
}

/// Repeated passes in list order until no rule applies. The rules only get
/// more applicable as the face shrinks, so the final face does not depend on
/// the order of the passes.
pub fn eliminate(cons: &[Constraint], n: usize) -> Elimination {
    let mut state = Elimination {
        faces: vec![Face::full(n)],
        steps: Vec::new(),
        members: Vec::new(),
        member_labels: Vec::new(),
        infeasible: false,
    };
    let mut used = vec![false; cons.len()];
    loop {
        let mut progress = false;
        for (k, c) in cons.iter().enumerate() {
            if used[k] {
                continue;
            }
            if let Some((rule, member)) = applicable(state.face(), c) {
                used[k] = true;
                progress = true;
                apply(&mut state, k, c, rule, member);
                if state.infeasible {
                    return state;
                }
            }
        }
        if !progress {
            return state;
        }
    }
}

/// Re-run a recorded trace, checking that each step's rule holds when applied.
pub fn replay_steps(cons: &[Constraint], n: usize, steps: &[TraceStep]) -> Option<Elimination> {
    let mut state = Elimination {
        faces: vec![Face::full(n)],
        steps: Vec::new(),
        members: Vec::new(),
        member_labels: Vec::new(),
        infeasible: false,
    };
    for s in steps {
        let c = cons.get(s.constraint)?;
        let (rule, member) = applicable(state.face(), c)?;
        if rule != s.rule {
            return None;
        }
        apply(&mut state, s.constraint, c, rule, member);
        if state.steps.last()?.zeroed != s.zeroed {
            return None;
        }
        if state.infeasible {
            break;
        }
    }
    Some(state)
}

/// Search for `Y` in the relative interior of `face` with `Mᵢ•Y = rᵢ`:
/// the minimum-norm solution on the face plus growing multiples of the
/// projection of the identity onto the solution space's direction, scaled up
/// and down by powers of two.
pub fn relint_point(face: &Face, cons: &[(SymMat<Rat>, Rat)]) -> Option<SymMat<Rat>> {
    let r = face.rank();
    if r == 0 {
        let zero = SymMat::<Rat>::zeros(face.order());
        return cons.iter().all(|(_, rhs)| rhs.is_zero()).then_some(zero);
    }
    let restricted: Vec<(SymMat<Rat>, Rat)> = cons
        .iter()
        .map(|(m, rhs)| (face.restrict(m), rhs.clone()))
        .filter(|(m, rhs)| !(m.is_zero() && rhs.is_zero()))
        .collect();
    if restricted.iter().any(|(m, rhs)| m.is_zero() && !rhs.is_zero()) {
        return None;
    }
    let ident = SymMat::<Rat>::identity(r);
    let (w0, p) = if restricted.is_empty() {
        (SymMat::zeros(r), ident)
    } else {
        let k = restricted.len();
        let gram = Mat::from_fn(k, k, |i, j| {
            restricted[i].0.inner(&restricted[j].0).expect("same order")
        });
        let rhs: Vec<Rat> = restricted.iter().map(|(_, v)| v.clone()).collect();
        let alpha = solve_affine(&gram, &rhs)?.particular;
        let tr: Vec<Rat> = restricted.iter().map(|(m, _)| m.trace()).collect();
        let beta = solve_affine(&gram, &tr)?.particular;
        let mut w0 = SymMat::zeros(r);
        let mut p = ident;
        for ((m, _), (a, b)) in restricted.iter().zip(alpha.iter().zip(&beta)) {
            w0 = w0.add_scaled(a, m).expect("same order");
            p = p.add_scaled(&-b.clone(), m).expect("same order");
        }
        (w0, p)
    };
    let two = int(2);
    let mut up = Rat::one();
    let mut down = Rat::one();
    for k in 0..160 {
        let lam = if k % 2 == 0 { &up } else { &down };
        let w = w0.add_scaled(lam, &p).expect("same order");
        if psd_status(&w, &Tolerances::default()) == PsdStatus::PositiveDefinite {
            return Some(face.lift(&w));
        }
        if k % 2 == 0 {
            up *= &two;
        } else {
            down /= &two;
        }
    }
    None
}
