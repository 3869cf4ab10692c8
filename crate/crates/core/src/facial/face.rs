use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Rat;
use crate::symkernel::{psd_status, solve_affine, Mat, PsdStatus, SymMat};
use crate::tolerances::Tolerances;

/// A face `{V W Vᵀ : W ⪰ 0}` of the psd cone of order `n`.
#[derive(Clone, Debug, PartialEq)]
pub enum Face {
    /// `V` selects the coordinates outside `zero`.
    Axis { n: usize, zero: BTreeSet<usize> },
    /// Columns of `basis` (n × r) span the range of the face.
    General { n: usize, basis: Mat<Rat> },
}

impl Face {
    pub fn full(n: usize) -> Self {
        Face::Axis {
            n,
            zero: BTreeSet::new(),
        }
    }

    /// `0_k ⊕ S^{n−k}_+`
    pub fn leading_zero(n: usize, k: usize) -> Self {
        Face::Axis {
            n,
            zero: (0..k).collect(),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Face::Axis { n, .. } | Face::General { n, .. } => *n,
        }
    }

    /// Rank of the matrices in the relative interior.
    pub fn rank(&self) -> usize {
        match self {
            Face::Axis { n, zero } => n - zero.len(),
            Face::General { basis, .. } => basis.cols(),
        }
    }

    /// Dimension as a convex set.
    pub fn dim(&self) -> usize {
        let r = self.rank();
        r * (r + 1) / 2
    }

    /// Indices outside the zero set (axis faces only).
    pub fn active(&self) -> Option<Vec<usize>> {
        match self {
            Face::Axis { n, zero } => Some((0..*n).filter(|i| !zero.contains(i)).collect()),
            Face::General { .. } => None,
        }
    }

    pub fn basis(&self) -> Mat<Rat> {
        match self {
            Face::Axis { n, zero } => {
                let act: Vec<usize> = (0..*n).filter(|i| !zero.contains(i)).collect();
                Mat::from_fn(*n, act.len(), |i, j| {
                    if act[j] == i {
                        Rat::from_integer(1.into())
                    } else {
                        Rat::zero()
                    }
                })
            }
            Face::General { basis, .. } => basis.clone(),
        }
    }

    /// `VᵀMV`. Membership of `M` in the dual cone of the face is psd-ness of
    /// this restriction; membership in the orthogonal complement is its vanishing.
    pub fn restrict(&self, m: &SymMat<Rat>) -> SymMat<Rat> {
        match self {
            Face::Axis { .. } => {
                let act = self.active().expect("axis");
                m.submatrix(&act)
            }
            Face::General { basis, .. } => m.congruence_unchecked(basis),
        }
    }

    /// Lift a matrix on the face coordinates back to order `n`.
    pub fn lift(&self, w: &SymMat<Rat>) -> SymMat<Rat> {
        w.congruence_unchecked(&self.basis().transpose())
    }

    /// `F ∩ y⊥` for `y` in the dual cone of `F`.
    pub fn intersect_perp(&self, y: &SymMat<Rat>) -> Result<Face> {
        let r = self.restrict(y);
        let st = psd_status(&r, &Tolerances::default());
        if !st.is_psd() {
            return Err(Error::NotPsd(format!("restriction to the face is {st:?}")));
        }
        if st == PsdStatus::Zero {
            return Ok(self.clone());
        }
        if r.is_diagonal() {
            if let Face::Axis { n, zero } = self {
                let act = self.active().expect("axis");
                let mut z = zero.clone();
                for (k, &i) in act.iter().enumerate() {
                    if !r.get(k, k).is_zero() {
                        z.insert(i);
                    }
                }
                return Ok(Face::Axis { n: *n, zero: z });
            }
        }
        // range of the new face: V · ker(R)
        let ker = r.to_mat().kernel();
        let v = self.basis();
        let cols: Vec<Vec<Rat>> = ker.iter().map(|k| v.mul_vec(k)).collect();
        let n = self.order();
        let basis = if cols.is_empty() {
            Mat::zeros(n, 0)
        } else {
            Mat::from_columns(&cols)
        };
        Ok(Face::General { n, basis }.normalized())
    }

    /// Rewrite a general face as an axis face when its range is a coordinate subspace.
    pub fn normalized(self) -> Face {
        let Face::General { n, basis } = &self else {
            return self;
        };
        if basis.cols() == 0 {
            return Face::Axis {
                n: *n,
                zero: (0..*n).collect(),
            };
        }
        let mut w = basis.transpose();
        let pivots = w.rref();
        let coordinate = (0..pivots.len()).all(|r| {
            (0..w.cols()).filter(|&c| !w[(r, c)].is_zero()).count() == 1
        });
        if coordinate {
            let zero = (0..*n).filter(|c| !pivots.contains(c)).collect();
            Face::Axis { n: *n, zero }
        } else {
            self
        }
    }

    /// Same face, compared through the column spaces.
    pub fn same_as(&self, other: &Face) -> bool {
        if self.order() != other.order() || self.rank() != other.rank() {
            return false;
        }
        match (self, other) {
            (Face::Axis { zero: a, .. }, Face::Axis { zero: b, .. }) => a == b,
            _ => {
                let a = self.basis();
                let b = other.basis();
                let joined = Mat::from_fn(a.rows(), a.cols() + b.cols(), |i, j| {
                    if j < a.cols() {
                        a[(i, j)].clone()
                    } else {
                        b[(i, j - a.cols())].clone()
                    }
                });
                joined.rank() == a.rank()
            }
        }
    }

    /// Whether `F ⊆ self`.
    pub fn contains_face(&self, f: &Face) -> bool {
        let a = self.basis();
        let b = f.basis();
        let joined = Mat::from_fn(a.rows(), a.cols() + b.cols(), |i, j| {
            if j < a.cols() {
                a[(i, j)].clone()
            } else {
                b[(i, j - a.cols())].clone()
            }
        });
        joined.rank() == a.rank()
    }

    /// `Y` psd with range inside the face.
    pub fn contains(&self, y: &SymMat<Rat>) -> bool {
        if !psd_status(y, &Tolerances::default()).is_psd() {
            return false;
        }
        let v = self.basis();
        let rank_v = v.rank();
        let ym = y.to_mat();
        let joined = Mat::from_fn(v.rows(), v.cols() + ym.cols(), |i, j| {
            if j < v.cols() {
                v[(i, j)].clone()
            } else {
                ym[(i, j - v.cols())].clone()
            }
        });
        joined.rank() == rank_v
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Face::Axis { n, zero } => {
                let k = zero.len();
                if zero.iter().copied().eq(0..k) {
                    if k == 0 {
                        write!(f, "S^{n}_+")
                    } else {
                        write!(f, "0_{k} + S^{}_+", n - k)
                    }
                } else {
                    let z: Vec<String> = zero.iter().map(ToString::to_string).collect();
                    write!(f, "S^{}_+ with zero rows {{{}}}", n - k, z.join(","))
                }
            }
            Face::General { n, basis } => write!(f, "rank-{} face of S^{n}_+", basis.cols()),
        }
    }
}

/// Whether `y` lies in the linear span of `basis` (exact).
pub fn in_span(y: &SymMat<Rat>, basis: &[SymMat<Rat>]) -> bool {
    let n = y.order();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    if basis.is_empty() {
        return y.is_zero();
    }
    let a = Mat::from_fn(pairs.len(), basis.len(), |r, k| {
        let (i, j) = pairs[r];
        basis[k].get(i, j).clone()
    });
    let rhs: Vec<Rat> = pairs.iter().map(|&(i, j)| y.get(i, j).clone()).collect();
    solve_affine(&a, &rhs).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrSequence {
    pub matrices: Vec<SymMat<Rat>>,
    /// names of the constraints the members came from, e.g. "B", "-A3"
    pub labels: Vec<String>,
    pub strict: bool,
    pub regularized: Option<Vec<usize>>,
}

impl FrSequence {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct FaceChain {
    /// `F₀ ⊇ F₁ ⊇ …`, starting from the full cone
    pub faces: Vec<Face>,
    pub sequence: FrSequence,
}

impl FaceChain {
    pub fn terminal(&self) -> &Face {
        self.faces.last().expect("chain starts with the full cone")
    }
}

/// Check a facial reduction sequence step by step. Every member must lie in
/// `span(span_basis)` and restrict to a psd matrix on the current face
/// (nonzero when `require_strict`).
pub fn verify_fr_sequence(
    seq: &[SymMat<Rat>],
    span_basis: &[SymMat<Rat>],
    require_strict: bool,
) -> Result<FaceChain> {
    let n = seq
        .first()
        .map(SymMat::order)
        .or_else(|| span_basis.first().map(SymMat::order))
        .ok_or_else(|| Error::InvalidArgument("empty sequence and span".into()))?;
    let mut faces = vec![Face::full(n)];
    let mut strict = true;
    for (k, y) in seq.iter().enumerate() {
        if !in_span(y, span_basis) {
            return Err(Error::NotInSpan(format!("member {k}")));
        }
        let cur = faces.last().expect("nonempty");
        let r = cur.restrict(y);
        let st = psd_status(&r, &Tolerances::default());
        if !st.is_psd() {
            return Err(Error::InvalidFrStep {
                step: k,
                reason: format!("restriction to the current face is {st:?}"),
            });
        }
        if st == PsdStatus::Zero {
            if require_strict {
                return Err(Error::InvalidFrStep {
                    step: k,
                    reason: "restriction vanishes, step is not strict".into(),
                });
            }
            strict = false;
        }
        let next = cur.intersect_perp(y)?;
        faces.push(next);
    }
    let regularized = is_regularized(seq);
    Ok(FaceChain {
        faces,
        sequence: FrSequence {
            matrices: seq.to_vec(),
            labels: (0..seq.len()).map(|k| format!("y{}", k + 1)).collect(),
            strict,
            regularized,
        },
    })
}

/// Block sizes when every member matches the regularized template: with
/// `offset = r₁ + … + r_{i−1}`, the trailing block of `Yᵢ` from `offset` must
/// equal `I_{rᵢ} ⊕ 0` with `rᵢ ≥ 1`. Entries above or left of it are free.
pub fn is_regularized(seq: &[SymMat<Rat>]) -> Option<Vec<usize>> {
    let mut sizes = Vec::with_capacity(seq.len());
    let mut offset = 0;
    for y in seq {
        let n = y.order();
        if offset >= n {
            return None;
        }
        let one = Rat::from_integer(1.into());
        let r = (offset..n).take_while(|&i| *y.get(i, i) == one).count();
        if r == 0 {
            return None;
        }
        for i in offset..n {
            for j in offset..n {
                let expect_one = i == j && i < offset + r;
                let v = y.get(i, j);
                let ok = if expect_one { *v == one } else { v.is_zero() };
                if !ok {
                    return None;
                }
            }
        }
        sizes.push(r);
        offset += r;
    }
    Some(sizes)
}
