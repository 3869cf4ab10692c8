//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness and exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use gapforge::canonical2::{canonicalize, recognize_pref, Canonical};
use gapforge::facial::*;
use gapforge::generators::*;
use gapforge::io;
use gapforge::scalar::int;
use gapforge::symkernel::{psd_status, PsdStatus};
use gapforge::{ExtendedRat, ReformOp, SdpInstance, Tolerances};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn fin(v: i64) -> ExtendedRat {
    ExtendedRat::Finite(int(v))
}

fn exact_values(cert: &GapCertificate) -> Result<(ExtendedRat, ExtendedRat), String> {
    match cert.values() {
        (Some(p), Some(d)) => Ok((p.clone(), d.clone())),
        _ => Err(format!("inconclusive: {:?} / {:?}", cert.primal, cert.dual)),
    }
}

fn timed<T>(limit: f64, what: &str, f: impl FnOnce() -> T) -> Result<(T, f64), String> {
    let start = Instant::now();
    let out = f();
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < limit, "{what} took {secs:.3} s (limit {limit} s)");
    Ok((out, secs))
}

fn c1() -> Outcome {
    let (res, secs) = timed(0.1, "small certificates", || {
        (
            certify_gap(&gen_small(int(1)).unwrap()).unwrap(),
            certify_gap(&gen_small(int(10)).unwrap()).unwrap(),
        )
    })?;
    ensure!(exact_values(&res.0)? == (fin(0), fin(1)), "scale 1: {:?}", res.0.values());
    ensure!(exact_values(&res.1)? == (fin(0), fin(10)), "scale 10: {:?}", res.1.values());
    Ok(format!("(0, 1) and (0, 10) in {secs:.4} s"))
}

fn c2() -> Outcome {
    let mut worst = 0.0f64;
    for m in 2..=11 {
        let inst = gen_single(m, int(10), false).unwrap();
        let (cert, secs) = timed(1.0, &format!("m = {m}"), || certify_gap(&inst).unwrap())?;
        worst = worst.max(secs);
        ensure!(exact_values(&cert)? == (fin(0), fin(10)), "m = {m}: {:?}", cert.values());
        ensure!(cert.trace.len() == m - 1, "m = {m}: trace length {}", cert.trace.len());
    }
    Ok(format!("m = 2..11 give (0, 10) with m-1 steps, slowest {worst:.4} s"))
}

fn c3() -> Outcome {
    for m in 2..=11 {
        let cert = certify_gap(&gen_single(m, int(10), true).unwrap()).unwrap();
        ensure!(exact_values(&cert)? == (fin(0), ExtendedRat::PosInf), "m = {m}: {:?}", cert.values());
        ensure!(cert.weakly_infeasible_dual, "m = {m}: dual not flagged weakly infeasible");
    }
    let mut worst: f64 = 0.0;
    for m in 2..=6 {
        let t = weak_infeasibility_probe(&gen_single(m, int(10), true).unwrap(), 10_000).unwrap();
        ensure!(t.distances.len() <= 10_001, "m = {m}: too many iterations");
        ensure!(t.is_non_increasing(0.0), "m = {m}: distance trace increases");
        ensure!(t.last() < 1e-6, "m = {m}: probe distance {:e}", t.last());
        worst = worst.max(t.last());
    }
    Ok(format!("(0, +inf) for m = 2..11; probe distance at most {worst:.2e} for m <= 6"))
}

fn c4() -> Outcome {
    for m in 2..=8 {
        let cert = certify_gap(&gen_double(m).unwrap()).unwrap();
        ensure!(exact_values(&cert)? == (fin(0), fin(1)), "m = {m}: {:?}", cert.values());
        let flipped = certify_gap(&gen_double_flipped(m).unwrap()).unwrap();
        let (p, d) = exact_values(&flipped)?;
        ensure!(p == d, "flipped m = {m}: {p:?} vs {d:?}");
    }
    Ok("(0, 1) for m = 2..8; flipped controls have no gap".into())
}

fn c5() -> Outcome {
    for m in 2..=11 {
        let inst = gen_single(m, int(10), false).unwrap();
        let trials = if m < 7 { 1000 } else { 0 };
        let sd = singularity_degree(&inst, Which::D, trials, 1).unwrap();
        ensure!(sd.value == m - 1 && sd.kind == DegreeKind::Theorem, "single m = {m}: {} {:?}", sd.value, sd.kind);
        let labels: Vec<String> = (1..m).map(|i| format!("A{i}")).collect();
        ensure!(sd.cone.sequence.labels == labels, "single m = {m}: sequence {:?}", sd.cone.sequence.labels);
        ensure!(sd.cone.sequence.regularized.is_some(), "single m = {m}: sequence not regularized");
        ensure!(
            sd.cone.face.rank() == 2 && sd.cone.face.active() == Some(vec![m - 1, m]),
            "single m = {m}: terminal face {:?}",
            sd.cone.face
        );
        if trials > 0 {
            let c = sd.claim.as_ref().ok_or("claim check missing")?;
            ensure!(c.passed == 1000, "single m = {m}: claim check {}/{}", c.passed, c.trials);
        }
    }
    for m in 2..=8 {
        let inst = gen_double(m).unwrap();
        let trials = if m <= 3 { 1000 } else { 0 };
        let sd = singularity_degree(&inst, Which::HD, trials, 1).unwrap();
        ensure!(sd.value == m && sd.kind == DegreeKind::Theorem, "double m = {m}: {} {:?}", sd.value, sd.kind);
        let mut labels = vec!["B".to_string()];
        labels.extend((2..m).map(|i| format!("A{i}")));
        labels.push(format!("-A{m}"));
        ensure!(sd.cone.sequence.labels == labels, "double m = {m}: sequence {:?}", sd.cone.sequence.labels);
        ensure!(
            sd.cone.face.rank() == 1 && sd.cone.face.active() == Some(vec![2 * m]),
            "double m = {m}: terminal face {:?}",
            sd.cone.face
        );
        if trials > 0 {
            let c = sd.claim.as_ref().ok_or("claim check missing")?;
            ensure!(c.passed == 1000, "double m = {m}: claim check {}/{}", c.passed, c.trials);
        }
    }
    Ok("d(D) = m-1 for single m = 2..11, d(HD) = m for double m = 2..8, claim checks 1000/1000".into())
}

fn c6() -> Outcome {
    let inst = gen_example51().unwrap();
    let y = example51_dual_point();
    let res = inst.dual_residual(&y).unwrap();
    ensure!(res == vec![int(0), int(0)], "dual residual {res:?}");
    let st = psd_status(&y, &Tolerances::default());
    ensure!(st == PsdStatus::PositiveDefinite, "dual point is {st:?}");
    let cert = certify_gap(&inst).unwrap();
    ensure!(cert.x_forced_zero(), "x is not forced to zero");
    ensure!(exact_values(&cert)? == (fin(0), fin(0)), "values {:?}", cert.values());
    let b = bounds_check(&inst).unwrap();
    ensure!(b.hd.value == 3 && b.hd.value == b.m + 1, "d(HD) = {}", b.hd.value);
    let check = b.max_degree.ok_or("maximum degree conclusions missing")?;
    ensure!(
        check.x_forced_zero && check.dual_strictly_feasible && check.values_equal_zero,
        "conclusions {check:?}"
    );
    Ok("Y feasible and positive definite, x = 0 forced, d(HD) = 3 = m+1, values (0, 0)".into())
}

fn c7() -> Outcome {
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let (messy, _) = mess(&gen_small(int(10)).unwrap(), seed, 8, 2).unwrap();
        let (res, secs) = timed(2.0, &format!("seed {seed}"), || canonicalize(&messy, &tol).unwrap())?;
        worst = worst.max(secs);
        let Canonical::Form(f) = res else {
            return Err(format!("seed {seed}: no canonical form"));
        };
        let cert = recognize_pref(&f, &tol).map_err(|e| e.to_string())?;
        let d = cert.dual.ok_or(format!("seed {seed}: infinite dual"))?;
        ensure!((d - 10.0).abs() <= 1e-6, "seed {seed}: dual value {d}");
        ensure!(f.residual <= 1e-7, "seed {seed}: residual {:e}", f.residual);
    }
    let Canonical::Form(f) = canonicalize(&gen_small(int(10)).unwrap(), &tol).unwrap() else {
        return Err("clean instance gave no canonical form".into());
    };
    ensure!(f.sigma == vec![1.0] && f.s == 0, "clean: sigma {:?}, s {}", f.sigma, f.s);
    Ok(format!("20 seeds within 1e-6 of 10, slowest {worst:.3} s; clean sigma = [1], s = 0"))
}

fn c8() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut insts = vec![gen_small(int(10)).unwrap(), gen_example51().unwrap()];
    for m in 2..=6 {
        insts.push(gen_single(m, int(10), false).unwrap());
        insts.push(gen_single(m, int(10), true).unwrap());
        insts.push(gen_double(m).unwrap());
        insts.push(gen_double_flipped(m).unwrap());
    }
    let mut checked = 0;
    for inst in &insts {
        let base = exact_values(&certify_gap(inst).unwrap())?;
        let m = inst.m();
        for _ in 0..10 {
            let mut cur = inst.clone();
            let mut shift = int(0);
            let mut log = Vec::new();
            for _ in 0..rng.gen_range(1..=5) {
                let i = rng.gen_range(0..m);
                let j = (i + rng.gen_range(1..m)) % m;
                let lam = int([-2, -1, 1, 2][rng.gen_range(0..4)]);
                let op = match rng.gen_range(0..4) {
                    0 => ReformOp::Swap { i, j },
                    1 => ReformOp::Combine { i, lambda: lam, j, mu: int(rng.gen_range(-2..=2)) },
                    2 => {
                        shift += &lam * &cur.c()[j];
                        ReformOp::AddToB { j, lambda: lam }
                    }
                    _ => {
                        cur = mess(&cur, rng.gen(), 6, 2).unwrap().0;
                        log.push("mess".to_string());
                        continue;
                    }
                };
                log.push(op.to_string());
                cur = cur.apply_reform(&op).unwrap();
            }
            let after = exact_values(&certify_gap(&cur).unwrap()).map_err(|e| format!("{}: {log:?}: {e}", inst.meta.name))?;
            let expect = (base.0.add_rat(&shift), base.1.add_rat(&shift));
            ensure!(after == expect, "{} after {log:?}: {after:?} vs {expect:?}", inst.meta.name);
            checked += 1;
        }
    }
    Ok(format!("{checked} reformulated instances keep their certified values"))
}

fn c9() -> Outcome {
    let mut insts: Vec<SdpInstance> = vec![gen_small(int(1)).unwrap(), gen_small(int(10)).unwrap(), gen_example51().unwrap()];
    for m in 2..=11 {
        insts.push(gen_single(m, int(10), false).unwrap());
        insts.push(gen_single(m, int(10), true).unwrap());
    }
    for m in 2..=8 {
        insts.push(gen_double(m).unwrap());
        insts.push(gen_double_flipped(m).unwrap());
    }
    insts.extend(io::library_instances(true).unwrap());
    for inst in &insts {
        let r = bounds_check(inst).map_err(|e| format!("{}: {e}", inst.meta.name))?;
        if let Some(d) = &r.d {
            ensure!(d.value <= d.bound, "{}: d(D) = {} > {}", inst.meta.name, d.value, d.bound);
        }
        ensure!(r.hd.value <= r.hd.bound, "{}: d(HD) = {} > {}", inst.meta.name, r.hd.value, r.hd.bound);
    }
    Ok(format!("{} instances within d(D) <= m and d(HD) <= m+1", insts.len()))
}

fn c10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (manifest, secs) = timed(10.0, "library build", || io::build_library(dir.path(), false).unwrap())?;
    ensure!(manifest.entries.len() == 40, "{} entries", manifest.entries.len());
    for e in &manifest.entries {
        let path = dir.path().join(&e.json);
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let inst = io::from_json_str(&text).map_err(|e| e.to_string())?;
        ensure!(io::to_json_string(&inst) == text, "{}: JSON round trip differs", e.name);
        let t = io::to_sedumi(&inst);
        ensure!(
            t.a.len() == inst.m() && t.a.iter().all(|r| r.len() == inst.n() * inst.n()),
            "{}: SeDuMi A is not m x n^2",
            e.name
        );
        let back = io::import_sedumi(dir.path(), &e.sedumi_stem).map_err(|e| e.to_string())?;
        ensure!(back.same_data(&inst), "{}: SeDuMi reimport differs", e.name);
    }
    Ok(format!("40 instances in {secs:.3} s; JSON and SeDuMi round trips exact"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact gap, small", c1),
        ("single finite family", c2),
        ("single infinite family", c3),
        ("double family", c4),
        ("singularity degrees", c5),
        ("theorem instance", c6),
        ("canonicalizer", c7),
        ("reformulation invariance", c8),
        ("bound suite", c9),
        ("i/o", c10),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
