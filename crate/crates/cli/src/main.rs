//! `gapforge`: generate, certify and canonicalize SDPs with duality gaps.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 inconclusive,
//! 3 invariant or bound violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gapforge::canonical2::{canonicalize, recognize_pref, Canonical};
use gapforge::facial::{bounds_check, certify_gap, claim_check, singularity_degree, weak_infeasibility_probe, Which};
use gapforge::generators::{generate, FamilySpec, MessParams};
use gapforge::io::{self, report};
use gapforge::scalar::parse_rat;
use gapforge::{Error, ExtendedRat, Family, SdpInstance, Tolerances};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "gapforge", version, about = "Semidefinite programs with positive duality gaps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Small,
    SingleFinite,
    SingleInf,
    Double,
    DoubleFlipped,
    Example51,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Small => Family::Small,
            FamilyArg::SingleFinite => Family::SingleFinite,
            FamilyArg::SingleInf => Family::SingleInfinite,
            FamilyArg::Double => Family::Double,
            FamilyArg::DoubleFlipped => Family::DoubleFlipped,
            FamilyArg::Example51 => Family::Example51,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    #[value(name = "D")]
    D,
    #[value(name = "HD")]
    Hd,
}

impl From<WhichArg> for Which {
    fn from(w: WhichArg) -> Self {
        match w {
            WhichArg::D => Which::D,
            WhichArg::Hd => Which::HD,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Sedumi,
    Sdpa,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a family instance as JSON
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// positive rational such as 10 or 7/2
        #[arg(long, default_value = "1")]
        scale: String,
        #[arg(long)]
        mess_seed: Option<u64>,
        /// defaults to 3n
        #[arg(long, requires = "mess_seed")]
        mess_ops: Option<usize>,
        #[arg(long, default_value_t = 2, requires = "mess_seed")]
        mess_bound: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact optimal values of both problems
    Certify {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Reformulate a two-constraint instance into the canonical gap shape
    Canonicalize {
        path: PathBuf,
        #[arg(long)]
        tol_psd: Option<f64>,
        #[arg(long)]
        tol_zero: Option<f64>,
        #[arg(long)]
        angles: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Singularity degree of the dual or homogeneous dual
    Singdeg {
        path: PathBuf,
        #[arg(long, value_enum)]
        which: WhichArg,
        /// also check d(D) <= m and d(HD) <= m + 1
        #[arg(long)]
        bounds: bool,
        #[arg(long)]
        json: bool,
    },
    /// Sample the constraint span and test the first-step claim
    Claimcheck {
        path: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// defaults to HD for the double family and D otherwise
        #[arg(long, value_enum)]
        which: Option<WhichArg>,
        #[arg(long)]
        json: bool,
    },
    /// Distance of the dual affine set to the psd cone
    Probe {
        path: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(long)]
        json: bool,
    },
    /// Write the instance in another format
    Export {
        path: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        /// output directory (SeDuMi) or file; defaults next to the input
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the 40-instance library with a manifest
    Library {
        #[arg(long)]
        out: PathBuf,
        /// also emit double-family instances
        #[arg(long)]
        double: bool,
    },
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Inconclusive,
    Violation,
}

fn exit_for_error(e: &Error) -> u8 {
    match e {
        Error::ClaimViolated(_) | Error::BoundViolated(_) => 3,
        Error::Unstructured(_) => 2,
        _ => 1,
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values are serializable"));
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned())
}

fn run(cmd: Cmd) -> gapforge::Result<Status> {
    match cmd {
        Cmd::Generate {
            family,
            m,
            scale,
            mess_seed,
            mess_ops,
            mess_bound,
            out,
        } => {
            let spec = FamilySpec {
                family: family.into(),
                m,
                scale: parse_rat(&scale)?,
                mess: mess_seed.map(|seed| MessParams {
                    seed,
                    num_ops: mess_ops,
                    entry_bound: mess_bound,
                }),
            };
            let inst = generate(&spec)?;
            io::save(&inst, &out)?;
            println!("wrote {} (m = {}, n = {}) to {}", inst.meta.name, inst.m(), inst.n(), out.display());
            Ok(Status::Ok)
        }
        Cmd::Certify { path, json } => certify(&io::load(&path)?, json),
        Cmd::Canonicalize {
            path,
            tol_psd,
            tol_zero,
            angles,
            json,
        } => {
            let mut tol = Tolerances::from_env()?;
            if let Some(v) = tol_psd {
                tol.psd = v;
            }
            if let Some(v) = tol_zero {
                tol.zero = v;
            }
            if let Some(v) = angles {
                tol.apply_overrides(&format!("angles={v}"))?;
            }
            canonical(&io::load(&path)?, &tol, json)
        }
        Cmd::Singdeg {
            path,
            which,
            bounds,
            json,
        } => {
            let inst = io::load(&path)?;
            let sd = singularity_degree(&inst, which.into(), 0, 0)?;
            let b = if bounds { Some(bounds_check(&inst)?) } else { None };
            if json {
                let mut v = report::singdeg_report(&sd);
                if let Some(b) = &b {
                    v["bounds"] = report::bounds_report(b);
                }
                print_json(&v);
            } else {
                println!("d({}) = {} ({:?})", sd.which, sd.value, sd.kind);
                println!("sequence: {}", sd.cone.sequence.labels.join(", "));
                println!("terminal face rank: {}", sd.cone.face.rank());
                if let Some(b) = &b {
                    if let Some(d) = &b.d {
                        println!("d(D) = {} <= {}", d.value, d.bound);
                    }
                    println!("d(HD) = {} <= {}", b.hd.value, b.hd.bound);
                }
            }
            Ok(Status::Ok)
        }
        Cmd::Claimcheck {
            path,
            trials,
            seed,
            which,
            json,
        } => {
            let inst = io::load(&path)?;
            let which = which.map(Which::from).unwrap_or(match inst.meta.family {
                Some(Family::Double) => Which::HD,
                _ => Which::D,
            });
            let rep = claim_check(&inst, which, trials, seed)?;
            if json {
                print_json(&serde_json::to_value(&rep).expect("report is serializable"));
            } else {
                println!("claim check on {which}: {}/{} trials passed", rep.passed, rep.trials);
                println!("strict steps sampled: {}, rejected: {}", rep.strict_steps, rep.rejected);
            }
            Ok(if rep.passed == rep.trials { Status::Ok } else { Status::Violation })
        }
        Cmd::Probe { path, iters, json } => {
            let trace = weak_infeasibility_probe(&io::load(&path)?, iters)?;
            if json {
                print_json(&report::probe_report(&trace));
            } else {
                println!(
                    "distance {:.3e} -> {:.3e} after {} iterations ({} Newton steps)",
                    trace.distances[0],
                    trace.last(),
                    trace.distances.len() - 1,
                    trace.newton_steps
                );
            }
            Ok(if trace.is_non_increasing(1e-12) { Status::Ok } else { Status::Violation })
        }
        Cmd::Export { path, format, out } => {
            let inst = io::load(&path)?;
            let name = stem(&path);
            let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
            match format {
                Format::Sedumi => {
                    let dir = out.unwrap_or(dir);
                    std::fs::create_dir_all(&dir)?;
                    let files = io::export_sedumi(&inst, &dir, &name)?;
                    println!("wrote {}", files.loader.display());
                }
                Format::Sdpa => {
                    let file = out.unwrap_or_else(|| dir.join(format!("{name}.dat-s")));
                    io::export_sdpa(&inst, &file, &name)?;
                    println!("wrote {}", file.display());
                }
                Format::Json => match out {
                    Some(file) => {
                        io::save(&inst, &file)?;
                        println!("wrote {}", file.display());
                    }
                    None => print!("{}", io::to_json_string(&inst)),
                },
            }
            Ok(Status::Ok)
        }
        Cmd::Library { out, double } => {
            let start = std::time::Instant::now();
            let manifest = io::build_library(&out, double)?;
            println!(
                "wrote {} instances to {} in {:.2} s",
                manifest.entries.len(),
                out.display(),
                start.elapsed().as_secs_f64()
            );
            Ok(Status::Ok)
        }
    }
}

fn certify(inst: &SdpInstance, json: bool) -> gapforge::Result<Status> {
    let cert = certify_gap(inst)?;
    let (p, d) = cert.values();
    let mismatch = match (&inst.meta.known_gap, p, d) {
        (Some(k), Some(p), Some(d)) => k.primal != *p || k.dual != *d,
        _ => false,
    };
    if json {
        let mut v = report::certificate_report(&cert);
        v["matches_known_gap"] = inst.meta.known_gap.as_ref().map(|_| !mismatch).into();
        print_json(&v);
    } else {
        match p {
            Some(v) => println!("primal {v}"),
            None => println!("primal inconclusive"),
        }
        match (p, d) {
            (_, Some(ExtendedRat::PosInf)) => {
                let kind = if cert.weakly_infeasible_dual { "weakly infeasible" } else { "infeasible" };
                println!("dual infeasible ({kind}); gap = +inf");
            }
            (Some(ExtendedRat::Finite(pv)), Some(ExtendedRat::Finite(dv))) => {
                println!("dual {dv}");
                println!("gap {}", dv - pv);
            }
            (_, Some(dv)) => println!("dual {dv}"),
            (_, None) => println!("dual inconclusive"),
        }
        if mismatch {
            println!("certified values disagree with the recorded gap");
        }
    }
    Ok(if mismatch {
        Status::Violation
    } else if p.is_none() || d.is_none() {
        Status::Inconclusive
    } else {
        Status::Ok
    })
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn canonical(inst: &SdpInstance, tol: &Tolerances, json: bool) -> gapforge::Result<Status> {
    let c = canonicalize(inst, tol)?;
    if json {
        print_json(&report::canonical_report(&c, tol));
    }
    Ok(match &c {
        Canonical::Form(f) => {
            let residual_ok = f.residual <= tol.zero;
            let pref = recognize_pref(f, tol);
            if !json {
                let m_norm = f.m_block.to_rows().iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
                println!("p = {}, r = {}, s = {}", f.p, f.r, f.s);
                println!("Lambda = {}", fmt_list(&f.lambda));
                println!("Sigma = {}", fmt_list(&f.sigma));
                println!("M-norm = {m_norm:.6}");
                println!("c2' = {:.6}", f.c2prime);
                match &pref {
                    Ok(cert) => match cert.dual {
                        Some(d) => println!("primal {:.6}, dual {d:.6}, gap {:.6}", cert.primal, d - cert.primal),
                        None => println!("primal {:.6}, dual infeasible; gap = +inf", cert.primal),
                    },
                    Err(e) => println!("shape check failed: {e}"),
                }
                println!("residual {:.3e}{}", f.residual, if residual_ok { "" } else { " (above tolerance)" });
            }
            if pref.is_err() {
                Status::Violation
            } else if residual_ok {
                Status::Ok
            } else {
                Status::Inconclusive
            }
        }
        Canonical::NoGap(v) => {
            if !json {
                println!("no gap: {:?} ({})", v.reason, v.detail);
            }
            Status::Ok
        }
        Canonical::Inconclusive { stage, reason } => {
            if !json {
                println!("inconclusive at {stage}: {reason}");
            }
            Status::Inconclusive
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Inconclusive) => ExitCode::from(2),
        Ok(Status::Violation) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for_error(&e))
        }
    }
}
