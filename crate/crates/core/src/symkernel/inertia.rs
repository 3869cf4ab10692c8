use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symkernel::eig::eig_sym;
use crate::symkernel::sym::SymMat;
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PsdStatus {
    PositiveDefinite,
    PsdRankDeficient(usize),
    Indefinite,
    NegativeSemidefinite,
    Zero,
}

impl PsdStatus {
    pub fn from_inertia(i: Inertia) -> Self {
        match (i.pos, i.neg, i.zero) {
            (0, 0, _) => PsdStatus::Zero,
            (_, 0, 0) => PsdStatus::PositiveDefinite,
            (p, 0, _) => PsdStatus::PsdRankDeficient(p),
            (0, _, _) => PsdStatus::NegativeSemidefinite,
            _ => PsdStatus::Indefinite,
        }
    }

    pub fn is_psd(self) -> bool {
        matches!(
            self,
            PsdStatus::PositiveDefinite | PsdStatus::PsdRankDeficient(_) | PsdStatus::Zero
        )
    }

    /// Negative semidefinite, including zero.
    pub fn is_nsd(self) -> bool {
        matches!(self, PsdStatus::NegativeSemidefinite | PsdStatus::Zero)
    }

    /// Coarse class used when comparing statuses across congruences.
    pub fn class(self) -> u8 {
        match self {
            PsdStatus::PositiveDefinite => 0,
            PsdStatus::PsdRankDeficient(_) => 1,
            PsdStatus::Indefinite => 2,
            PsdStatus::NegativeSemidefinite => 3,
            PsdStatus::Zero => 4,
        }
    }
}

/// Exact inertia by symmetric elimination. Uses a diagonal pivot when one is
/// nonzero, otherwise a 2×2 block `[[0,a],[a,0]]` (one positive and one
/// negative eigenvalue). Exact only for exact scalars.
pub fn inertia_by_elimination<T: Scalar>(m: &SymMat<T>) -> Inertia {
    let n = m.order();
    let scale = m.entries().iter().fold(0.0f64, |s, x| s.max(x.as_f64().abs()));
    let mut w: Vec<Vec<T>> = m.to_rows();
    let mut active: Vec<usize> = (0..n).collect();
    let mut out = Inertia { pos: 0, neg: 0, zero: 0 };
    loop {
        if active.is_empty() {
            break;
        }
        if let Some(pi) = active.iter().position(|&i| !w[i][i].negligible(scale)) {
            let p = active.remove(pi);
            let d = w[p][p].clone();
            if d.is_positive() {
                out.pos += 1;
            } else {
                out.neg += 1;
            }
            for &j in &active {
                if w[j][p].negligible(scale) {
                    continue;
                }
                let f = w[j][p].clone() / d.clone();
                for &k in &active {
                    let v = f.clone() * w[p][k].clone();
                    w[j][k] = w[j][k].clone() - v;
                }
            }
            continue;
        }
        let pair = active.iter().enumerate().find_map(|(a, &i)| {
            active[a + 1..]
                .iter()
                .find(|&&j| !w[i][j].negligible(scale))
                .map(|&j| (i, j))
        });
        let Some((i, j)) = pair else {
            out.zero += active.len();
            break;
        };
        active.retain(|&k| k != i && k != j);
        out.pos += 1;
        out.neg += 1;
        let a = w[i][j].clone();
        for &k in &active {
            for &l in &active {
                let v = (w[k][i].clone() * w[j][l].clone() + w[k][j].clone() * w[i][l].clone())
                    / a.clone();
                w[k][l] = w[k][l].clone() - v;
            }
        }
    }
    out
}

/// Float inertia from eigenvalues with absolute threshold `tol.psd`.
pub fn inertia_float(m: &SymMat<f64>, tol: &Tolerances) -> Result<Inertia> {
    let e = eig_sym(m, tol)?;
    let mut out = Inertia { pos: 0, neg: 0, zero: 0 };
    for &l in &e.values {
        if l > tol.psd {
            out.pos += 1;
        } else if l < -tol.psd {
            out.neg += 1;
        } else {
            out.zero += 1;
        }
    }
    Ok(out)
}

/// Definiteness class. Exact scalars use elimination, floats use eigenvalues.
pub fn psd_status<T: Scalar>(m: &SymMat<T>, tol: &Tolerances) -> PsdStatus {
    if T::EXACT {
        PsdStatus::from_inertia(inertia_by_elimination(m))
    } else {
        match inertia_float(&m.to_f64(), tol) {
            Ok(i) => PsdStatus::from_inertia(i),
            // eigen failure is vanishingly rare; elimination is a safe fallback
            Err(_) => PsdStatus::from_inertia(inertia_by_elimination(m)),
        }
    }
}

/// Rank of a psd matrix. Float backend counts eigenvalues above
/// `tol.rank · λ_max`.
pub fn rank_psd<T: Scalar>(m: &SymMat<T>, tol: &Tolerances) -> Result<usize> {
    if T::EXACT {
        let i = inertia_by_elimination(m);
        if i.neg > 0 {
            return Err(Error::NotPsd(format!("{} negative eigenvalues", i.neg)));
        }
        return Ok(i.pos);
    }
    let e = eig_sym(&m.to_f64(), tol)?;
    let lmax = e.values.first().copied().unwrap_or(0.0);
    let lmin = e.values.last().copied().unwrap_or(0.0);
    if lmin < -tol.psd.max(tol.rank * lmax.abs()) {
        return Err(Error::NotPsd(format!("min eigenvalue {lmin:e}")));
    }
    if lmax <= tol.psd {
        return Ok(0);
    }
    Ok(e.values.iter().filter(|&&l| l > tol.rank * lmax).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rat};

    fn sym(rows: &[&[i64]]) -> SymMat<Rat> {
        SymMat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn classes() {
        let t = Tolerances::default();
        assert_eq!(psd_status(&SymMat::<Rat>::identity(3), &t), PsdStatus::PositiveDefinite);
        let d = SymMat::diag(&[int(1), int(1), int(0)]);
        assert_eq!(psd_status(&d, &t), PsdStatus::PsdRankDeficient(2));
        assert_eq!(psd_status(&SymMat::<Rat>::zeros(3), &t), PsdStatus::Zero);
        assert_eq!(psd_status(&d.neg(), &t), PsdStatus::NegativeSemidefinite);
        // A₂ of the small instance: E₂ + E₁₃
        let a2 = sym(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]);
        assert_eq!(psd_status(&a2, &t), PsdStatus::Indefinite);
        assert_eq!(psd_status(&a2.to_f64(), &t), PsdStatus::Indefinite);
    }

    #[test]
    fn zero_diagonal_with_offdiagonal_is_indefinite() {
        let m = sym(&[&[1, 0, 0], &[0, 0, 2], &[0, 2, 0]]);
        let i = inertia_by_elimination(&m);
        assert_eq!(i, Inertia { pos: 2, neg: 1, zero: 0 });
    }

    #[test]
    fn ranks() {
        let t = Tolerances::default();
        let d = SymMat::diag(&[int(1), int(1), int(0)]);
        assert_eq!(rank_psd(&d, &t).unwrap(), 2);
        assert_eq!(rank_psd(&d.to_f64(), &t).unwrap(), 2);
        assert_eq!(rank_psd(&SymMat::<Rat>::zeros(3), &t).unwrap(), 0);
        assert!(rank_psd(&d.neg(), &t).is_err());
    }

    #[test]
    fn rank_one_outer_product() {
        let m = sym(&[&[1, 2, 3], &[2, 4, 6], &[3, 6, 9]]);
        assert_eq!(
            inertia_by_elimination(&m),
            Inertia { pos: 1, neg: 0, zero: 2 }
        );
    }
}
