//! The primal `sup cᵀx s.t. Σ xᵢAᵢ ⪯ B`, its dual `inf B•Y s.t. Aᵢ•Y = cᵢ, Y ⪰ 0`,
//! the homogeneous dual, and the gap-preserving reformulation operations.
//!
//! Constraint indices are zero-based throughout.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ExtendedRat, Rat, Scalar};
use crate::symkernel::{psd_status, Mat, PsdStatus, SymMat};
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Small,
    SingleFinite,
    SingleInfinite,
    Double,
    /// double family with the sign of the last `E_{2m}` flipped (zero gap)
    DoubleFlipped,
    Example51,
    Custom,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Small => "small",
            Family::SingleFinite => "single-finite",
            Family::SingleInfinite => "single-inf",
            Family::Double => "double",
            Family::DoubleFlipped => "double-flipped",
            Family::Example51 => "example51",
            Family::Custom => "custom",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Some(match s {
            "small" => Family::Small,
            "single-finite" => Family::SingleFinite,
            "single-inf" | "single-infinite" => Family::SingleInfinite,
            "double" => Family::Double,
            "double-flipped" => Family::DoubleFlipped,
            "example51" => Family::Example51,
            "custom" => Family::Custom,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownGap {
    pub primal: ExtendedRat,
    pub dual: ExtendedRat,
}

/// Record of the congruence used to obscure an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct MessInfo {
    pub seed: u64,
    pub num_ops: usize,
    pub entry_bound: i64,
    pub transform: Mat<Rat>,
    pub log: Vec<String>,
}

/// Advisory metadata. Certifiers never read `known_gap`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InstanceMeta {
    pub name: String,
    pub family: Option<Family>,
    pub scale: Option<Rat>,
    pub seed: Option<u64>,
    pub known_gap: Option<KnownGap>,
    pub assumption11_holds: bool,
    pub ops: Vec<String>,
    pub mess: Option<MessInfo>,
    pub perturb_eps: Option<Rat>,
    /// a known strictly feasible dual point, when the source provides one
    pub dual_point: Option<SymMat<Rat>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpInstance<T: Scalar = Rat> {
    a: Vec<SymMat<T>>,
    b: SymMat<T>,
    c: Vec<T>,
    pub meta: InstanceMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReformOp<T: Scalar = Rat> {
    /// `B ← B + λA_j`
    AddToB { j: usize, lambda: T },
    Swap { i: usize, j: usize },
    /// `(Aᵢ, cᵢ) ← λ(Aᵢ, cᵢ) + μ(A_j, c_j)`
    Combine { i: usize, lambda: T, j: usize, mu: T },
    /// every matrix `M ← TᵀMT`
    Congruence { t: Mat<T> },
}

impl<T: Scalar> fmt::Display for ReformOp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReformOp::AddToB { j, lambda } => write!(f, "add-to-b(j={j}, lambda={lambda})"),
            ReformOp::Swap { i, j } => write!(f, "swap({i}, {j})"),
            ReformOp::Combine { i, lambda, j, mu } => {
                write!(f, "combine(i={i}, lambda={lambda}, j={j}, mu={mu})")
            }
            ReformOp::Congruence { t } => {
                let rows: Vec<String> = t
                    .to_rows()
                    .iter()
                    .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
                    .collect();
                write!(f, "congruence([{}])", rows.join("; "))
            }
        }
    }
}

impl<T: Scalar> ReformOp<T> {
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> ReformOp<U> {
        match self {
            ReformOp::AddToB { j, lambda } => ReformOp::AddToB { j: *j, lambda: f(lambda) },
            ReformOp::Swap { i, j } => ReformOp::Swap { i: *i, j: *j },
            ReformOp::Combine { i, lambda, j, mu } => ReformOp::Combine {
                i: *i,
                lambda: f(lambda),
                j: *j,
                mu: f(mu),
            },
            ReformOp::Congruence { t } => ReformOp::Congruence { t: t.map(f) },
        }
    }
}

#[derive(Clone, Debug)]
pub struct Slack<T: Scalar> {
    pub x: Vec<T>,
    pub z: SymMat<T>,
    pub status: PsdStatus,
}

impl<T: Scalar> Slack<T> {
    pub fn feasible(&self) -> bool {
        self.status.is_psd()
    }
}

impl<T: Scalar> SdpInstance<T> {
    pub fn new(a: Vec<SymMat<T>>, b: SymMat<T>, c: Vec<T>) -> Result<Self> {
        let n = b.order();
        if a.is_empty() {
            return Err(Error::InvalidArgument("at least one constraint matrix is required".into()));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("order {n} is below 2")));
        }
        if c.len() != a.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: c.len(),
            });
        }
        if let Some(bad) = a.iter().find(|ai| ai.order() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.order(),
            });
        }
        let mut inst = SdpInstance {
            a,
            b,
            c,
            meta: InstanceMeta::default(),
        };
        inst.meta.assumption11_holds = inst.normalized_rank(1e-12).is_some();
        Ok(inst)
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = meta;
        self.meta.assumption11_holds = self.normalized_rank(1e-12).is_some();
        self
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.b.order()
    }

    pub fn a(&self) -> &[SymMat<T>] {
        &self.a
    }

    pub fn a_i(&self, i: usize) -> &SymMat<T> {
        &self.a[i]
    }

    pub fn b(&self) -> &SymMat<T> {
        &self.b
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    /// Same matrices, different objective.
    pub fn with_objective(&self, c: Vec<T>) -> Result<Self> {
        if c.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: c.len(),
            });
        }
        let mut out = self.clone();
        out.c = c;
        out.meta.known_gap = None;
        Ok(out)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SdpInstance<U> {
        SdpInstance {
            a: self.a.iter().map(|m| m.map(&f)).collect(),
            b: self.b.map(&f),
            c: self.c.iter().map(&f).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn to_f64(&self) -> SdpInstance<f64> {
        self.map(|x| x.as_f64())
    }

    /// `r` when `B = I_r ⊕ 0` (exactly for rationals, within `tol` for floats).
    pub fn normalized_rank(&self, tol: f64) -> Option<usize> {
        let n = self.n();
        let near = |v: &T, target: f64| {
            if T::EXACT {
                if target == 1.0 {
                    v.is_one()
                } else {
                    v.is_zero()
                }
            } else {
                (v.as_f64() - target).abs() <= tol
            }
        };
        let r = (0..n).take_while(|&i| near(self.b.get(i, i), 1.0)).count();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j && i < r { 1.0 } else { 0.0 };
                if !near(self.b.get(i, j), target) {
                    return None;
                }
            }
        }
        (r < n).then_some(r)
    }

    /// `B − Σ xᵢAᵢ`
    pub fn slack_matrix(&self, x: &[T]) -> Result<SymMat<T>> {
        if x.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: x.len(),
            });
        }
        let mut z = self.b.clone();
        for (xi, ai) in x.iter().zip(&self.a) {
            z = z.add_scaled(&-xi.clone(), ai)?;
        }
        Ok(z)
    }

    pub fn slack_at(&self, x: &[T], tol: &Tolerances) -> Result<Slack<T>> {
        let z = self.slack_matrix(x)?;
        let status = psd_status(&z, tol);
        Ok(Slack {
            x: x.to_vec(),
            z,
            status,
        })
    }

    pub fn objective(&self, x: &[T]) -> T {
        x.iter()
            .zip(&self.c)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    /// `(A₁•Y − c₁, …, A_m•Y − c_m)`
    pub fn dual_residual(&self, y: &SymMat<T>) -> Result<Vec<T>> {
        self.a
            .iter()
            .zip(&self.c)
            .map(|(ai, ci)| Ok(ai.inner(y)? - ci.clone()))
            .collect()
    }

    pub fn dual_objective(&self, y: &SymMat<T>) -> Result<T> {
        self.b.inner(y)
    }

    /// `[A₁, …, A_m, B]`, all with right-hand side zero.
    pub fn hd_constraints(&self) -> Vec<SymMat<T>> {
        let mut out = self.a.clone();
        out.push(self.b.clone());
        out
    }

    pub fn check_op(&self, op: &ReformOp<T>) -> Result<()> {
        let m = self.m();
        let idx = |k: usize| {
            if k < m {
                Ok(())
            } else {
                Err(Error::InvalidReform(format!("index {k} out of range for m = {m}")))
            }
        };
        match op {
            ReformOp::AddToB { j, lambda } => {
                idx(*j)?;
                if lambda.is_zero() {
                    return Err(Error::InvalidReform("lambda must be nonzero".into()));
                }
            }
            ReformOp::Swap { i, j } => {
                idx(*i)?;
                idx(*j)?;
                if i == j {
                    return Err(Error::InvalidReform("swap needs two distinct indices".into()));
                }
            }
            ReformOp::Combine { i, lambda, j, .. } => {
                idx(*i)?;
                idx(*j)?;
                if i == j {
                    return Err(Error::InvalidReform("combine needs two distinct indices".into()));
                }
                if lambda.is_zero() {
                    return Err(Error::InvalidReform("lambda must be nonzero".into()));
                }
            }
            ReformOp::Congruence { t } => {
                if t.rows() != self.n() || !t.is_square() {
                    return Err(Error::InvalidReform(format!(
                        "transform must be {n}x{n}",
                        n = self.n()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Apply one reformulation. `AddToB` shifts both optimal values by `λc_j`,
    /// so a recorded known gap is shifted accordingly.
    pub fn apply_reform(&self, op: &ReformOp<T>) -> Result<Self> {
        self.check_op(op)?;
        let mut out = self.clone();
        match op {
            ReformOp::AddToB { j, lambda } => {
                out.b = self.b.add_scaled(lambda, &self.a[*j])?;
                let shift = (lambda.clone() * self.c[*j].clone()).to_rat();
                out.meta.known_gap = match (&self.meta.known_gap, shift) {
                    (Some(g), Some(s)) => Some(KnownGap {
                        primal: g.primal.add_rat(&s),
                        dual: g.dual.add_rat(&s),
                    }),
                    _ => None,
                };
            }
            ReformOp::Swap { i, j } => {
                out.a.swap(*i, *j);
                out.c.swap(*i, *j);
            }
            ReformOp::Combine { i, lambda, j, mu } => {
                out.a[*i] = self.a[*i].scale(lambda).add_scaled(mu, &self.a[*j])?;
                out.c[*i] = lambda.clone() * self.c[*i].clone() + mu.clone() * self.c[*j].clone();
            }
            ReformOp::Congruence { t } => {
                out.b = self.b.congruence(t)?;
                out.a = self
                    .a
                    .iter()
                    .map(|ai| ai.congruence_unchecked(t))
                    .collect();
            }
        }
        out.meta.ops.push(op.to_string());
        out.meta.assumption11_holds = out.normalized_rank(1e-12).is_some();
        Ok(out)
    }

    pub fn apply_all(&self, ops: &[ReformOp<T>]) -> Result<Self> {
        ops.iter().try_fold(self.clone(), |acc, op| acc.apply_reform(op))
    }
}

impl SdpInstance<Rat> {
    pub fn is_integral(&self) -> bool {
        self.b.is_integral() && self.a.iter().all(SymMat::is_integral)
    }

    /// Same matrices and objective, ignoring metadata.
    pub fn same_data(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.c == other.c
    }
}
