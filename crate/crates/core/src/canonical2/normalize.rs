use crate::canonical2::rotate::eigen;
use crate::error::{Error, Result};
use crate::sdpmodel::{ReformOp, SdpInstance};
use crate::symkernel::{Mat, SymMat};
use crate::tolerances::Tolerances;

const ASCENT_ITERS: usize = 200;
const PROBE_DIRS: usize = 8;
const PROBE_ROUNDS: usize = 10;

#[derive(Clone, Debug)]
pub struct NormalizedB {
    pub inst: SdpInstance<f64>,
    /// point whose slack has maximum rank
    pub x_star: Vec<f64>,
    pub r: usize,
    pub ops: Vec<ReformOp<f64>>,
    /// optimal values of the result exceed the original ones by this amount
    pub value_shift: f64,
    /// deviation of the transformed `B` from `I_r ⊕ 0` before it was snapped
    pub residual: f64,
}

struct SlackInfo {
    lmin: f64,
    vmin: Vec<f64>,
    rank: usize,
}

fn slack_info(inst: &SdpInstance<f64>, x: &[f64], tol: &Tolerances) -> Result<SlackInfo> {
    let z = inst.slack_matrix(x)?;
    let (vals, vecs) = eigen(&z, tol)?;
    let n = vals.len();
    let lmax = vals[0].max(0.0);
    let rank = if lmax <= tol.psd {
        0
    } else {
        vals.iter().filter(|&&l| l > tol.rank * lmax.max(1.0)).count()
    };
    Ok(SlackInfo {
        lmin: vals[n - 1],
        vmin: vecs.column(n - 1),
        rank,
    })
}

fn quad(a: &SymMat<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| v[i] * a.get(i, j) * v[j]).sum::<f64>())
        .sum()
}

fn feasible(info: &SlackInfo, tol: &Tolerances) -> bool {
    info.lmin >= -tol.psd
}

/// Point of the primal feasible set whose slack has maximum rank:
/// subgradient ascent on `λ_min(B − Σ xᵢAᵢ)`, then line probes that move to
/// feasible points of larger slack rank.
pub fn max_rank_point(inst: &SdpInstance<f64>, tol: &Tolerances) -> Result<(Vec<f64>, usize)> {
    let m = inst.m();
    let mut x = vec![0.0; m];
    let mut info = slack_info(inst, &x, tol)?;
    let mut best = (x.clone(), info.lmin);
    for k in 1..=ASCENT_ITERS {
        let g: Vec<f64> = inst.a().iter().map(|a| -quad(a, &info.vmin)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-14 {
            break;
        }
        let step = 1.0 / k as f64;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += step * gi / norm;
        }
        info = slack_info(inst, &x, tol)?;
        // float noise at the boundary must not pull x off the feasible set
        if info.lmin > best.1 + tol.psd {
            best = (x.clone(), info.lmin);
        }
        if info.lmin > tol.psd {
            break;
        }
    }
    let mut x = best.0;
    let mut info = slack_info(inst, &x, tol)?;
    if !feasible(&info, tol) {
        return Err(Error::Infeasible(format!(
            "no feasible primal point found (best min eigenvalue {:e})",
            info.lmin
        )));
    }
    for _ in 0..PROBE_ROUNDS {
        let mut moved = false;
        'dirs: for d in 0..PROBE_DIRS {
            let theta = std::f64::consts::TAU * d as f64 / PROBE_DIRS as f64;
            let dir: Vec<f64> = (0..m)
                .map(|i| match i {
                    0 => theta.cos(),
                    1 => theta.sin(),
                    _ => 0.0,
                })
                .collect();
            let mut t = 1.0;
            for _ in 0..12 {
                let y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                let cand = slack_info(inst, &y, tol)?;
                if feasible(&cand, tol) && cand.rank > info.rank {
                    x = y;
                    info = cand;
                    moved = true;
                    break 'dirs;
                }
                t *= 0.5;
            }
        }
        if !moved {
            break;
        }
    }
    Ok((x, info.rank))
}

/// Reformulate so that `B = I_r ⊕ 0` with `r` the maximum slack rank.
pub fn normalize_b(inst: &SdpInstance<f64>, tol: &Tolerances) -> Result<NormalizedB> {
    let n = inst.n();
    let (x_star, _) = max_rank_point(inst, tol)?;
    let mut ops = Vec::new();
    let mut value_shift = 0.0;
    let mut cur = inst.clone();
    for (j, &xj) in x_star.iter().enumerate() {
        if xj != 0.0 {
            let op = ReformOp::AddToB { j, lambda: -xj };
            cur = cur.apply_reform(&op)?;
            value_shift += -xj * inst.c()[j];
            ops.push(op);
        }
    }
    if let Some(r) = cur.normalized_rank(0.0) {
        return Ok(NormalizedB {
            inst: cur,
            x_star,
            r,
            ops,
            value_shift,
            residual: 0.0,
        });
    }
    let (vals, q) = eigen(cur.b(), tol)?;
    let lmax = vals[0].max(0.0);
    let r = if lmax <= tol.psd {
        0
    } else {
        vals.iter().filter(|&&l| l > tol.rank * lmax.max(1.0)).count()
    };
    let t = Mat::from_fn(n, n, |i, j| if j < r { q[(i, j)] / vals[j].sqrt() } else { q[(i, j)] });
    let op = ReformOp::Congruence { t };
    cur = cur.apply_reform(&op)?;
    ops.push(op);
    let target = SymMat::diag(&(0..n).map(|i| if i < r { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    let residual = cur.b().max_abs_diff(&target);
    let snapped = SdpInstance::new(cur.a().to_vec(), target, cur.c().to_vec())?.with_meta(cur.meta.clone());
    Ok(NormalizedB {
        inst: snapped,
        x_star,
        r,
        ops,
        value_shift,
        residual,
    })
}
