use crate::error::{Error, Result};
use crate::symkernel::{eig_sym, psd_status, Mat, SymMat};
use crate::tolerances::Tolerances;

/// `T` with `TᵀGT = [[Σ, 0, W], [0, I_s, 0], [Wᵀ, 0, 0]]` and
/// `Tᵀ(I_{r1} ⊕ 0)T = I_{r1} ⊕ 0`.
#[derive(Clone, Debug)]
pub struct Rotation {
    pub t: Mat<f64>,
    pub s: usize,
    pub sigma: Vec<f64>,
    /// `r1 × (r2 − s)`
    pub w: Mat<f64>,
    /// largest deviation of either product from its template
    pub residual: f64,
}

/// Eigenvalues, descending, and orthonormal eigenvectors as columns.
/// Empty matrices are allowed.
pub(crate) fn eigen(m: &SymMat<f64>, tol: &Tolerances) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = m.order();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if m.is_diagonal() {
        // keep coordinate vectors (and their signs) when nothing needs rotating
        let d = m.diagonal();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
        let vals = order.iter().map(|&k| d[k]).collect();
        let vecs = Mat::from_fn(n, n, |i, j| if order[j] == i { 1.0 } else { 0.0 });
        return Ok((vals, vecs));
    }
    let e = eig_sym(m, tol)?;
    Ok((e.values, e.vectors))
}

pub(crate) fn block_diag(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let (ra, ca) = (a.rows(), a.cols());
    Mat::from_fn(ra + b.rows(), ca + b.cols(), |i, j| match (i < ra, j < ca) {
        (true, true) => a[(i, j)],
        (false, false) => b[(i - ra, j - ca)],
        _ => 0.0,
    })
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

pub fn lemma_rotate(g: &SymMat<f64>, r1: usize, r2: usize, tol: &Tolerances) -> Result<Rotation> {
    let n = r1 + r2;
    if g.order() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.order(),
        });
    }
    let lead = range(0, r1);
    let trail = range(r1, n);
    let g22 = g.submatrix(&trail);
    if r2 > 0 && !psd_status(&g22, tol).is_psd() {
        return Err(Error::NotPsd("trailing block of the rotated matrix".into()));
    }

    let (_, q1) = eigen(&g.submatrix(&lead), tol)?;
    let (mu, v2) = eigen(&g22, tol)?;
    let mu_max = mu.first().copied().unwrap_or(0.0).max(0.0);
    let s = if mu_max <= tol.psd {
        0
    } else {
        mu.iter().filter(|&&l| l > tol.rank * mu_max).count()
    };
    let q2 = Mat::from_fn(r2, r2, |i, j| if j < s { v2[(i, j)] / mu[j].sqrt() } else { v2[(i, j)] });
    let t1 = block_diag(&q1, &q2);
    let g1 = g.congruence_unchecked(&t1);

    // shear away the coupling V between the leading block and I_s
    let v = g1.block(&lead, &range(r1, r1 + s));
    let t2 = Mat::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if (r1..r1 + s).contains(&i) && j < r1 {
            -v[(j, i - r1)]
        } else {
            0.0
        }
    });
    let g2 = g1.congruence_unchecked(&t2);

    let (sigma, q3) = eigen(&g2.submatrix(&lead), tol)?;
    let t3 = block_diag(&q3, &Mat::identity(r2));
    let t = t1.mul(&t2)?.mul(&t3)?;
    let out = g.congruence_unchecked(&t);
    let w = out.block(&lead, &range(r1 + s, n));

    let mut template = SymMat::<f64>::zeros(n);
    for (i, &x) in sigma.iter().enumerate() {
        template.set(i, i, x);
    }
    for i in r1..r1 + s {
        template.set(i, i, 1.0);
    }
    for i in 0..r1 {
        for j in r1 + s..n {
            template.set(i, j, w[(i, j - r1 - s)]);
        }
    }
    let mut lead_id = SymMat::<f64>::zeros(n);
    for i in 0..r1 {
        lead_id.set(i, i, 1.0);
    }
    let residual = out
        .max_abs_diff(&template)
        .max(lead_id.congruence_unchecked(&t).max_abs_diff(&lead_id));
    Ok(Rotation {
        t,
        s,
        sigma,
        w,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix() {
        let r = lemma_rotate(&SymMat::zeros(3), 2, 1, &Tolerances::default()).unwrap();
        assert_eq!(r.s, 0);
        assert!(r.sigma.iter().all(|&x| x == 0.0));
        assert!(r.residual < 1e-14);
    }

    #[test]
    fn diagonal_with_identity_tail() {
        let g = SymMat::diag(&[3.0, -1.0, 1.0, 1.0]);
        let r = lemma_rotate(&g, 2, 2, &Tolerances::default()).unwrap();
        assert_eq!(r.s, 2);
        let mut sig = r.sigma.clone();
        sig.sort_by(f64::total_cmp);
        assert_eq!(sig, vec![-1.0, 3.0]);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn coupled_block() {
        let g = SymMat::from_rows(vec![
            vec![1.0, 2.0, 0.5],
            vec![2.0, 4.0, 0.0],
            vec![0.5, 0.0, 0.0],
        ])
        .unwrap();
        let r = lemma_rotate(&g, 1, 2, &Tolerances::default()).unwrap();
        assert_eq!(r.s, 1);
        assert!(r.residual < 1e-12);
        assert!((r.sigma[0] - 0.0).abs() < 1e-12);
        assert!((r.w[(0, 0)].abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn indefinite_tail_rejected() {
        let g = SymMat::diag(&[1.0, 1.0, -1.0]);
        assert!(lemma_rotate(&g, 1, 2, &Tolerances::default()).is_err());
    }
}
