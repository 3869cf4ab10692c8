use crate::canonical2::rotate::eigen;
use crate::error::{Error, Result};
use crate::sdpmodel::SdpInstance;
use crate::symkernel::{solve_affine, Mat, SymMat};
use crate::tolerances::Tolerances;

/// how many times `ε_psd` separates "not found" from "ambiguous"
pub const AMBIGUITY_FACTOR: f64 = 1e3;
const GOLDEN_ITERS: usize = 100;

/// Nonzero psd combination `Σ λᵢAᵢ`, scaled to unit Frobenius norm.
#[derive(Clone, Debug)]
pub struct Witness {
    pub lambda: Vec<f64>,
    pub matrix: SymMat<f64>,
    pub min_eig: f64,
    /// `|W • Y₀|` on the inhomogeneous path
    pub y0_inner: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum WitnessSearch {
    Found(Witness),
    /// best normalized `λ_min` is below `−ε_psd·10³`
    NotFound { best_min_eig: f64, lambda: Vec<f64> },
    /// best normalized `λ_min` lies between `−ε_psd·10³` and `−ε_psd`
    Ambiguous { best_min_eig: f64, lambda: Vec<f64> },
}

fn combo(a: &[SymMat<f64>], lam: &[f64]) -> SymMat<f64> {
    a.iter()
        .zip(lam)
        .fold(SymMat::zeros(a[0].order()), |acc, (ai, l)| acc.add_scaled(l, ai).expect("same order"))
}

/// `λ_min(W)/‖W‖` for `W = Σ λᵢAᵢ`; `-inf` when `W` vanishes.
fn score(a: &[SymMat<f64>], lam: &[f64], tol: &Tolerances) -> Result<f64> {
    let w = combo(a, lam);
    let norm = w.frob_norm();
    if norm < 1e-14 {
        return Ok(f64::NEG_INFINITY);
    }
    let (vals, _) = eigen(&w.scale(&(1.0 / norm)), tol)?;
    Ok(*vals.last().expect("order at least one"))
}

/// Least-squares solution of `Aᵢ•Y = cᵢ` of minimum norm.
pub fn least_squares_y0(inst: &SdpInstance<f64>) -> Result<SymMat<f64>> {
    let m = inst.m();
    let gram = Mat::from_fn(m, m, |i, j| inst.a_i(i).inner(inst.a_i(j)).expect("same order"));
    let sol = solve_affine(&gram, inst.c())
        .ok_or_else(|| Error::InvalidArgument("constraint matrices are linearly dependent".into()))?;
    Ok(combo(inst.a(), &sol.particular))
}

fn golden(f: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    for _ in 0..GOLDEN_ITERS {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b)?;
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a)?;
        }
    }
    Ok(if fa > fb { (a, fa) } else { (b, fb) })
}

/// Maximize the score over directions `(cos θ, sin θ)` in a two-dimensional
/// coefficient space spanned by `u` and `v`.
fn pencil(a: &[SymMat<f64>], u: &[f64], v: &[f64], tol: &Tolerances) -> Result<(Vec<f64>, f64)> {
    let dir = |t: f64| -> Vec<f64> { u.iter().zip(v).map(|(x, y)| t.cos() * x + t.sin() * y).collect() };
    let n = tol.angles;
    let step = std::f64::consts::TAU / n as f64;
    let grid: Vec<f64> = (0..n)
        .map(|k| score(a, &dir(k as f64 * step), tol))
        .collect::<Result<_>>()?;

    // psd arcs: take the middle of the longest one, which keeps the witness rank maximal
    let ok: Vec<bool> = grid.iter().map(|&f| f >= -tol.psd).collect();
    if ok.iter().any(|&b| b) && !ok.iter().all(|&b| b) {
        let start = (0..n).find(|&k| !ok[k]).expect("some grid point fails");
        let (mut best_len, mut best_mid, mut run) = (0, 0, 0);
        for off in 1..=n {
            let k = (start + off) % n;
            if ok[k] {
                run += 1;
                if run > best_len {
                    best_len = run;
                    best_mid = (k + n - run / 2) % n;
                }
            } else {
                run = 0;
            }
        }
        if best_len >= 3 {
            let lam = dir(best_mid as f64 * step);
            return Ok((lam, grid[best_mid]));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| grid[j].total_cmp(&grid[i]));
    let f = |t: f64| score(a, &dir(t), tol);
    let mut best = (order[0] as f64 * step, grid[order[0]]);
    for &k in order.iter().take(3) {
        let t = k as f64 * step;
        let (tr, fr) = golden(&f, t - step, t + step)?;
        if fr > best.1 + f64::EPSILON {
            best = (tr, fr);
        }
    }
    Ok((dir(best.0), best.1))
}

fn classify(a: &[SymMat<f64>], lam: Vec<f64>, best: f64, y0: Option<&SymMat<f64>>, tol: &Tolerances) -> WitnessSearch {
    if best >= -tol.psd {
        let w = combo(a, &lam);
        let norm = w.frob_norm();
        let matrix = w.scale(&(1.0 / norm));
        let lambda: Vec<f64> = lam.iter().map(|l| l / norm).collect();
        let y0_inner = y0.map(|y| matrix.inner(y).expect("same order").abs());
        WitnessSearch::Found(Witness {
            lambda,
            matrix,
            min_eig: best,
            y0_inner,
        })
    } else if best < -tol.psd * AMBIGUITY_FACTOR {
        WitnessSearch::NotFound {
            best_min_eig: best,
            lambda: lam,
        }
    } else {
        WitnessSearch::Ambiguous {
            best_min_eig: best,
            lambda: lam,
        }
    }
}

/// Search `span{A₁, A₂}` (homogeneous) or `span{A₁, A₂} ∩ Y₀⊥` for a nonzero
/// psd matrix.
pub fn gs_witness(inst: &SdpInstance<f64>, homogeneous: bool, tol: &Tolerances) -> Result<WitnessSearch> {
    if inst.m() != 2 {
        return Err(Error::InvalidArgument(format!("pencil search needs m = 2, got {}", inst.m())));
    }
    let a = inst.a();
    let (u, v, y0) = if homogeneous {
        (vec![1.0, 0.0], vec![0.0, 1.0], None)
    } else {
        let y0 = least_squares_y0(inst)?;
        // coefficients with Σ λᵢ (Aᵢ•Y₀) = 0
        let g: Vec<f64> = a.iter().map(|ai| ai.inner(&y0).expect("same order")).collect();
        let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if norm <= tol.zero {
            (vec![1.0, 0.0], vec![0.0, 1.0], Some(y0))
        } else {
            let d = vec![g[1] / norm, -g[0] / norm];
            let neg: Vec<f64> = d.iter().map(|x| -x).collect();
            let (fp, fm) = (score(a, &d, tol)?, score(a, &neg, tol)?);
            let (lam, best) = if fp >= fm { (d, fp) } else { (neg, fm) };
            return Ok(classify(a, lam, best, Some(&y0), tol));
        }
    };
    let (lam, best) = pencil(a, &u, &v, tol)?;
    Ok(classify(a, lam, best, y0.as_ref(), tol))
}
