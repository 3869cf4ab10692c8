//! Distance from the dual affine set to the psd cone by alternating
//! projections. Each iteration also tries a damped semismooth Newton step on
//! `½‖min(λ(Y), 0)‖²` over the affine set and keeps whichever candidate is
//! closer, so the trace stays non-increasing.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{int, Scalar};
use crate::sdpmodel::SdpInstance;
use crate::symkernel::Mat;

/// iterates closer than this count as on the cone
pub const PROBE_STOP: f64 = 1e-10;
/// doublings tried when extrapolating the last move
const EXTRAPOLATE: usize = 30;
const MARQUARDT: [f64; 4] = [1e-8, 1e-4, 1e-1, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeTrace {
    /// distance of the affine iterate to the cone, starting with the initial point
    pub distances: Vec<f64>,
    pub newton_steps: usize,
    pub converged: bool,
}

impl ProbeTrace {
    pub fn last(&self) -> f64 {
        *self.distances.last().expect("at least the starting distance")
    }

    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.distances.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

struct Svec {
    n: usize,
    idx: Vec<(usize, usize)>,
}

impl Svec {
    fn new(n: usize) -> Self {
        let idx = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        Svec { n, idx }
    }

    fn dim(&self) -> usize {
        self.idx.len()
    }

    fn pack(&self, m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.idx.iter().map(|&(i, j)| {
                if i == j {
                    m[(i, i)]
                } else {
                    std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)])
                }
            }),
        )
    }

    fn unpack(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (k, &(i, j)) in self.idx.iter().enumerate() {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }
}

struct Affine {
    a: DMatrix<f64>,
    gram_pinv: DMatrix<f64>,
    c: DVector<f64>,
    /// columns spanning the directions of the affine set
    null: DMatrix<f64>,
}

impl Affine {
    fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        let r = &self.a * y - &self.c;
        y - self.a.transpose() * (&self.gram_pinv * r)
    }
}

fn affine(inst: &SdpInstance, sv: &Svec) -> Result<Affine> {
    let f = inst.to_f64();
    let big_n = sv.dim();
    let mut a = DMatrix::zeros(inst.m(), big_n);
    for (i, ai) in f.a().iter().enumerate() {
        a.set_row(i, &sv.pack(&ai.to_nalgebra()).transpose());
    }
    let gram = &a * a.transpose();
    let gram_pinv = gram
        .clone()
        .pseudo_inverse(1e-12 * gram.amax().max(1.0))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    // exact sparse kernel in entry coordinates keeps directions untouched by
    // the constraints as coordinate axes, which the scaled Newton solve needs
    let entry_rows = Mat::from_fn(inst.m(), big_n, |i, k| {
        let (r, c) = sv.idx[k];
        let v = inst.a_i(i).get(r, c).clone();
        if r == c {
            v
        } else {
            v * int(2)
        }
    });
    let cols: Vec<DVector<f64>> = entry_rows
        .kernel()
        .iter()
        .map(|v| {
            DVector::from_iterator(
                big_n,
                v.iter().enumerate().map(|(k, x)| {
                    let (r, c) = sv.idx[k];
                    let x = x.as_f64();
                    if r == c {
                        x
                    } else {
                        x * std::f64::consts::SQRT_2
                    }
                }),
            )
        })
        .collect();
    let null = if cols.is_empty() {
        DMatrix::zeros(big_n, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok(Affine {
        a,
        gram_pinv,
        c: DVector::from_iterator(inst.m(), f.c().iter().copied()),
        null,
    })
}

fn eig(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenNoConvergence)
}

fn dist(sv: &Svec, y: &DVector<f64>) -> Result<f64> {
    let e = eig(&sv.unpack(y))?;
    Ok(e.eigenvalues.iter().map(|&l| l.min(0.0).powi(2)).sum::<f64>().sqrt())
}

fn rebuild(vecs: &DMatrix<f64>, vals: impl Fn(usize) -> f64) -> DMatrix<f64> {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let v = vals(k);
        scaled.column_mut(k).scale_mut(v);
    }
    scaled * vecs.transpose()
}

fn newton_candidate(
    sv: &Svec,
    aff: &Affine,
    y: &DVector<f64>,
    e: &SymmetricEigen<f64, nalgebra::Dyn>,
    beat: f64,
) -> Result<Option<(f64, DVector<f64>)>> {
    let k = aff.null.ncols();
    if k == 0 {
        return Ok(None);
    }
    let w = &e.eigenvalues;
    let v = &e.eigenvectors;
    let n = sv.n;
    let neg: Vec<f64> = w.iter().map(|&l| l.min(0.0)).collect();
    let g_mat = rebuild(v, |i| neg[i]);
    let g = aff.null.transpose() * sv.pack(&g_mat);
    let gamma = DMatrix::from_fn(n, n, |i, j| {
        let d = w[i] - w[j];
        if d.abs() > 1e-14 {
            (neg[i] - neg[j]) / d
        } else if w[i] < 0.0 {
            1.0
        } else {
            0.0
        }
    });
    let mut h = DMatrix::zeros(k, k);
    for col in 0..k {
        let d = sv.unpack(&aff.null.column(col).into_owned());
        let dt = v.transpose() * d * v;
        let hd = v * dt.component_mul(&gamma) * v.transpose();
        h.set_column(col, &(aff.null.transpose() * sv.pack(&hd)));
    }
    // Marquardt damping with Jacobi scaling: curvature along directions in
    // which the iterate diverges is far below that of the others
    let scale: Vec<f64> = (0..k).map(|i| h[(i, i)].max(1e-300).sqrt().recip()).collect();
    let hs = DMatrix::from_fn(k, k, |i, j| h[(i, j)] * scale[i] * scale[j]);
    let gs = DVector::from_fn(k, |i, _| g[i] * scale[i]);
    let mut best: Option<(f64, DVector<f64>)> = None;
    let unscaled = vec![1.0; k];
    // plain Levenberg–Marquardt with μ = ‖g‖², then scaled variants
    let trials = std::iter::once((g.norm_squared(), &h, &g, &unscaled))
        .chain(MARQUARDT.iter().map(|&mu| (mu, &hs, &gs, &scale)));
    for (mu, mat, rhs, sc) in trials {
        let mut m = mat.clone();
        for i in 0..k {
            m[(i, i)] += mu.max(1e-14);
        }
        let Some(ws) = m.lu().solve(&(-rhs)) else {
            continue;
        };
        let dz = DVector::from_fn(k, |i, _| ws[i] * sc[i]);
        let step = &aff.null * dz;
        let mut t = 1.0;
        for _ in 0..30 {
            let cand = y + &step * t;
            let d = dist(sv, &cand)?;
            if d < best.as_ref().map_or(beat, |b| b.0) {
                best = Some((d, cand));
                break;
            }
            t *= 0.5;
        }
    }
    Ok(best)
}

/// Alternating projections between `{Y : Aᵢ•Y = cᵢ}` and the psd cone, with a
/// Newton safeguard. Stops early once the distance drops below `PROBE_STOP`.
pub fn weak_infeasibility_probe(inst: &SdpInstance, max_iters: usize) -> Result<ProbeTrace> {
    let sv = Svec::new(inst.n());
    let aff = affine(inst, &sv)?;
    let mut y = aff.project(&DVector::zeros(sv.dim()));
    let mut d = dist(&sv, &y)?;
    let mut trace = ProbeTrace {
        distances: vec![d],
        newton_steps: 0,
        converged: d < PROBE_STOP,
    };
    let mut last_move: Option<DVector<f64>> = None;
    for _ in 0..max_iters {
        if trace.converged {
            break;
        }
        let e = eig(&sv.unpack(&y))?;
        let x = rebuild(&e.eigenvectors, |i| e.eigenvalues[i].max(0.0));
        let y_ap = aff.project(&sv.pack(&x));
        let d_ap = dist(&sv, &y_ap)?;
        let (mut best_d, mut best_y) = (d_ap, y_ap);
        if let Some((dn, yn)) = newton_candidate(&sv, &aff, &y, &e, best_d)? {
            best_d = dn;
            best_y = yn;
            trace.newton_steps += 1;
        }
        // extrapolate along the previous move while that keeps helping;
        // minimizing sequences of weakly infeasible systems diverge
        if let Some(mv) = &last_move {
            let mut s = 1.0;
            for _ in 0..EXTRAPOLATE {
                let cand = aff.project(&(&y + mv * s));
                let dc = dist(&sv, &cand)?;
                if dc >= best_d {
                    break;
                }
                best_d = dc;
                best_y = cand;
                s *= 2.0;
            }
        }
        // float noise in the projection can nudge the distance up by an ulp
        if best_d > d {
            best_d = d;
            last_move = None;
        } else {
            last_move = Some(&best_y - &y);
            y = best_y;
        }
        d = best_d;
        trace.distances.push(d);
        trace.converged = d < PROBE_STOP;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_single;
    use crate::scalar::int;

    #[test]
    fn weakly_infeasible_small_converges() {
        let inst = gen_single(2, int(10), true).unwrap();
        let t = weak_infeasibility_probe(&inst, 10_000).unwrap();
        assert!(t.last() < 1e-6, "{}", t.last());
        assert!(t.is_non_increasing(0.0));
    }

    #[test]
    fn feasible_dual_hits_zero() {
        let inst = gen_single(3, int(1), false).unwrap();
        let t = weak_infeasibility_probe(&inst, 1000).unwrap();
        assert!(t.converged);
    }
}
