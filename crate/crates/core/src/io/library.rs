//! The 40-instance library: single-sequence families with finite and
//! infinite gaps, clean and messy, `m = 2..=11`, objective scale 10.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::generators::{gen_double, gen_single, mess};
use crate::io::{json, sedumi};
use crate::scalar::{int, ExtendedRat};
use crate::sdpmodel::SdpInstance;

pub const LIBRARY_SCALE: i64 = 10;
pub const LIBRARY_M: std::ops::RangeInclusive<usize> = 2..=11;
/// messing parameters of the library; the seed is `m`
pub const LIBRARY_MESS_BOUND: i64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub known_gap: Option<(ExtendedRat, ExtendedRat)>,
    pub mess_seed: Option<u64>,
    pub json: String,
    pub sedumi_stem: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

/// The library instances in manifest order, built in memory.
pub fn library_instances(include_double: bool) -> Result<Vec<SdpInstance>> {
    let mut specs: Vec<(usize, bool, bool, bool)> = Vec::new();
    for infinite in [false, true] {
        for messy in [false, true] {
            for m in LIBRARY_M {
                specs.push((m, infinite, messy, false));
            }
        }
    }
    if include_double {
        for messy in [false, true] {
            for m in 2..=6 {
                specs.push((m, false, messy, true));
            }
        }
    }
    specs
        .par_iter()
        .map(|&(m, infinite, messy, double)| {
            let clean = if double {
                gen_double(m)?
            } else {
                gen_single(m, int(LIBRARY_SCALE), infinite)?
            };
            if messy {
                let ops = 3 * clean.n();
                Ok(mess(&clean, m as u64, ops, LIBRARY_MESS_BOUND)?.0)
            } else {
                Ok(clean)
            }
        })
        .collect()
}

/// Writes `<name>.json` and the SeDuMi text triple for every instance, plus
/// `manifest.json`. Files are written in parallel, one task per instance.
pub fn build_library(out_dir: &Path, include_double: bool) -> Result<Manifest> {
    std::fs::create_dir_all(out_dir)?;
    let instances = library_instances(include_double)?;
    let entries = instances
        .par_iter()
        .map(|inst| {
            let name = inst.meta.name.clone();
            let json_file = format!("{name}.json");
            json::save(inst, out_dir.join(&json_file))?;
            sedumi::export_sedumi(inst, out_dir, &name)?;
            Ok(ManifestEntry {
                family: inst.meta.family.map_or("custom", |f| f.tag()).to_string(),
                m: inst.m(),
                n: inst.n(),
                known_gap: inst.meta.known_gap.as_ref().map(|g| (g.primal.clone(), g.dual.clone())),
                mess_seed: inst.meta.mess.as_ref().map(|mi| mi.seed),
                json: json_file,
                sedumi_stem: name.clone(),
                name,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { entries };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest is serializable") + "\n",
    )?;
    Ok(manifest)
}
