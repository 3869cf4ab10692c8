//! Machine-readable reports built as `serde_json::Value`s.

use serde_json::{json, Value};

use crate::canonical2::{recognize_pref, Canonical, CanonicalForm};
use crate::facial::{BoundsReport, CertValue, Face, GapCertificate, ProbeTrace, SingularityDegree};
use crate::scalar::format_rat;
use crate::symkernel::{Mat, SymMat};
use crate::tolerances::Tolerances;
use crate::Rat;

fn cert_value(v: &CertValue) -> Value {
    match v {
        CertValue::Exact { value } => json!(value.to_string()),
        CertValue::Inconclusive { reason } => json!({"inconclusive": reason}),
    }
}

fn rat_rows(m: &SymMat<Rat>) -> Value {
    json!(m.to_rows().iter().map(|r| r.iter().map(format_rat).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn float_rows(m: &Mat<f64>) -> Value {
    json!(m.to_rows())
}

fn face(f: &Face) -> Value {
    json!({"order": f.order(), "rank": f.rank(), "zero_coordinates": f.active()})
}

pub fn certificate_report(cert: &GapCertificate) -> Value {
    let (p, d) = cert.values();
    let gap = match (p, d) {
        (Some(p), Some(d)) => match (p.as_finite(), d.as_finite()) {
            (Some(p), Some(d)) => json!(format_rat(&(d - p))),
            (Some(_), None) => json!("inf"),
            _ => Value::Null,
        },
        _ => Value::Null,
    };
    json!({
        "values": {"primal": cert_value(&cert.primal), "dual": cert_value(&cert.dual), "gap": gap},
        "has_gap": cert.has_gap(),
        "weakly_infeasible_dual": cert.weakly_infeasible_dual,
        "x_forced_zero": cert.x_forced_zero(),
        "primal_zero_diagonal": cert.primal_zero_diagonal,
        "trace": cert.trace,
        "reduced_dual": cert.reduced_dual,
        "dual_face": face(&cert.dual_face),
        "dual_strict_point": cert.dual_strict_point.as_ref().map(rat_rows),
        "unmessed": cert.unmessed,
    })
}

fn form_report(f: &CanonicalForm, tol: &Tolerances) -> Value {
    let pref = recognize_pref(f, tol);
    let m_norm = f.m_block.to_rows().iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    json!({
        "verdict": "canonical-form",
        "p": f.p,
        "r": f.r,
        "s": f.s,
        "lambda": f.lambda,
        "sigma": f.sigma,
        "m_block": float_rows(&f.m_block),
        "m_norm": m_norm,
        "c2prime": f.c2prime,
        "backend": f.backend,
        "residual": f.residual,
        "residual_ok": f.residual <= tol.zero,
        "value_shift": f.value_shift,
        "row_transform": f.row_transform,
        "x_star": f.x_star,
        "transform_log": f.transform_log.iter().map(|op| op.to_string()).collect::<Vec<_>>(),
        "witness": {"lambda": f.witness.lambda, "min_eig": f.witness.min_eig, "y0_inner": f.witness.y0_inner},
        "certificate": match pref {
            Ok(c) => json!({
                "primal": c.primal,
                "dual": c.dual.map_or(json!("inf"), |v| json!(v)),
                "gap": c.dual.map_or(json!("inf"), |v| json!(v - c.primal)),
            }),
            Err(e) => json!({"error": e.to_string()}),
        },
    })
}

pub fn canonical_report(c: &Canonical, tol: &Tolerances) -> Value {
    match c {
        Canonical::Form(f) => form_report(f, tol),
        Canonical::NoGap(v) => json!({
            "verdict": "no-gap",
            "reason": v.reason,
            "detail": v.detail,
            "witness": v.witness.as_ref().map(|w| float_rows(&w.to_mat())),
        }),
        Canonical::Inconclusive { stage, reason } => json!({
            "verdict": "inconclusive",
            "stage": stage,
            "reason": reason,
        }),
    }
}

pub fn singdeg_report(sd: &SingularityDegree) -> Value {
    json!({
        "which": sd.which.to_string(),
        "value": sd.value,
        "kind": sd.kind,
        "sequence": sd.cone.sequence.labels,
        "strict": sd.cone.sequence.strict,
        "regularized": sd.cone.sequence.regularized.is_some(),
        "chain": sd.cone.chain.iter().map(face).collect::<Vec<_>>(),
        "terminal_face": face(&sd.cone.face),
        "claim": sd.claim,
    })
}

pub fn bounds_report(b: &BoundsReport) -> Value {
    json!({
        "m": b.m,
        "d": b.d,
        "hd": b.hd,
        "max_degree": b.max_degree,
    })
}

pub fn probe_report(t: &ProbeTrace) -> Value {
    json!({
        "iterations": t.distances.len().saturating_sub(1),
        "initial_distance": t.distances.first(),
        "final_distance": t.last(),
        "newton_steps": t.newton_steps,
        "converged": t.converged,
        "non_increasing": t.is_non_increasing(1e-12),
    })
}
