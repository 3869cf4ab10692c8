//! SeDuMi-style plain-text triple `(A, b, c, K)` and SDPA sparse export.
//!
//! In the SeDuMi triple the dual `inf B•Y, Aᵢ•Y = cᵢ` is the standard-form
//! primal: row `i` of `A` is `vec(Aᵢ)`, `b` is the objective of the
//! inequality form and `c = vec(B)`. Vectorization is column-major.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{parse_rat, rat_to_decimal, Rat};
use crate::sdpmodel::SdpInstance;
use crate::symkernel::SymMat;

/// Dense triple in exact arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct SedumiTriple {
    /// `m × n²`, row-major storage
    pub a: Vec<Vec<Rat>>,
    pub b: Vec<Rat>,
    pub c: Vec<Rat>,
    pub k_s: usize,
}

/// Column-major `vec`.
pub fn vec_col_major(m: &SymMat<Rat>) -> Vec<Rat> {
    let n = m.order();
    (0..n * n).map(|k| m.get(k % n, k / n).clone()).collect()
}

fn unvec(v: &[Rat], n: usize, what: &str) -> Result<SymMat<Rat>> {
    let rows = (0..n).map(|i| (0..n).map(|j| v[j * n + i].clone()).collect()).collect();
    SymMat::from_rows_named(rows, what)
}

pub fn to_sedumi(inst: &SdpInstance) -> SedumiTriple {
    SedumiTriple {
        a: inst.a().iter().map(vec_col_major).collect(),
        b: inst.c().to_vec(),
        c: vec_col_major(inst.b()),
        k_s: inst.n(),
    }
}

pub fn from_sedumi(t: &SedumiTriple) -> Result<SdpInstance> {
    let n = t.k_s;
    let n2 = n * n;
    if t.c.len() != n2 {
        return Err(Error::DimensionMismatch {
            expected: n2,
            found: t.c.len(),
        });
    }
    if t.a.len() != t.b.len() {
        return Err(Error::DimensionMismatch {
            expected: t.b.len(),
            found: t.a.len(),
        });
    }
    let a = t
        .a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != n2 {
                return Err(Error::DimensionMismatch {
                    expected: n2,
                    found: row.len(),
                });
            }
            unvec(row, n, &format!("A[{i}]"))
        })
        .collect::<Result<Vec<_>>>()?;
    SdpInstance::new(a, unvec(&t.c, n, "B")?, t.b.clone())
}

/// Paths written by [`export_sedumi`].
#[derive(Clone, Debug)]
pub struct SedumiFiles {
    pub a: PathBuf,
    pub b: PathBuf,
    pub c: PathBuf,
    pub k: PathBuf,
    pub loader: PathBuf,
}

impl SedumiFiles {
    pub fn new(dir: &Path, stem: &str) -> Self {
        SedumiFiles {
            a: dir.join(format!("{stem}_A.txt")),
            b: dir.join(format!("{stem}_b.txt")),
            c: dir.join(format!("{stem}_c.txt")),
            k: dir.join(format!("{stem}_K.txt")),
            loader: dir.join(format!("{stem}_load.m")),
        }
    }
}

fn column(v: &[Rat]) -> Result<String> {
    let mut s = String::new();
    for x in v {
        writeln!(s, "{}", rat_to_decimal(x)?).expect("writing to a string");
    }
    Ok(s)
}

/// Writes `A` as 1-based `row col value` triplets followed by the
/// dimension line `m n² 0`, so `spconvert(load(...))` restores its shape.
pub fn export_sedumi(inst: &SdpInstance, dir: &Path, stem: &str) -> Result<SedumiFiles> {
    let t = to_sedumi(inst);
    let files = SedumiFiles::new(dir, stem);
    let (m, n2) = (t.a.len(), t.k_s * t.k_s);
    let mut a = String::new();
    for (i, row) in t.a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_zero() {
                writeln!(a, "{} {} {}", i + 1, j + 1, rat_to_decimal(x)?).expect("writing to a string");
            }
        }
    }
    writeln!(a, "{m} {n2} 0").expect("writing to a string");
    std::fs::write(&files.a, a)?;
    std::fs::write(&files.b, column(&t.b)?)?;
    std::fs::write(&files.c, column(&t.c)?)?;
    std::fs::write(&files.k, format!("s {}\n", t.k_s))?;
    let name = |p: &PathBuf| p.file_name().expect("file path").to_string_lossy().into_owned();
    let loader = format!(
        "% loads {stem}: [x, y, info] = sedumi(A, b, c, K)\n\
         A = spconvert(load('{}'));\n\
         b = load('{}');\n\
         c = load('{}');\n\
         K = struct('s', {});\n",
        name(&files.a),
        name(&files.b),
        name(&files.c),
        t.k_s
    );
    std::fs::write(&files.loader, loader)?;
    Ok(files)
}

fn parse_lines(text: &str) -> impl Iterator<Item = (usize, &str)> + '_ {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn scalar_at(tok: &str, file: &str, line: usize) -> Result<Rat> {
    parse_rat(tok).map_err(|e| Error::parse(format!("{file}:{line}"), e.to_string()))
}

fn index_at(tok: &str, file: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(format!("{file}:{line}"), format!("expected an index, got {tok:?}")))
}

/// Read back the text triple written by [`export_sedumi`].
pub fn import_sedumi(dir: &Path, stem: &str) -> Result<SdpInstance> {
    let files = SedumiFiles::new(dir, stem);
    let read = |p: &PathBuf| -> Result<(String, String)> {
        Ok((std::fs::read_to_string(p)?, p.display().to_string()))
    };

    let (k_text, k_name) = read(&files.k)?;
    let k_s = parse_lines(&k_text)
        .find_map(|(line, l)| {
            let mut it = l.split_whitespace();
            (it.next() == Some("s")).then(|| it.next().map(|t| index_at(t, &k_name, line)))
        })
        .flatten()
        .ok_or_else(|| Error::parse(&k_name, "missing `s <order>` line"))??;

    let column = |p: &PathBuf| -> Result<Vec<Rat>> {
        let (text, name) = read(p)?;
        parse_lines(&text).map(|(line, l)| scalar_at(l, &name, line)).collect()
    };
    let b = column(&files.b)?;
    let c = column(&files.c)?;

    let (a_text, a_name) = read(&files.a)?;
    let mut triplets = Vec::new();
    for (line, l) in parse_lines(&a_text) {
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(Error::parse(format!("{a_name}:{line}"), "expected `row col value`"));
        }
        triplets.push((
            index_at(tok[0], &a_name, line)?,
            index_at(tok[1], &a_name, line)?,
            scalar_at(tok[2], &a_name, line)?,
            line,
        ));
    }
    // the final line carries the dimensions
    let Some((m, n2)) = triplets.last().map(|t| (t.0, t.1)) else {
        return Err(Error::parse(&a_name, "empty constraint matrix file"));
    };
    if n2 != k_s * k_s {
        return Err(Error::parse(&a_name, format!("A has {n2} columns but K.s = {k_s}")));
    }
    let mut a = vec![vec![Rat::zero(); n2]; m];
    for (r, col, v, line) in triplets {
        if r == 0 || col == 0 || r > m || col > n2 {
            return Err(Error::parse(format!("{a_name}:{line}"), format!("index ({r},{col}) outside {m}×{n2}")));
        }
        a[r - 1][col - 1] += v;
    }
    from_sedumi(&SedumiTriple { a, b, c, k_s })
}

/// SDPA sparse format with one psd block of order `n`.
///
/// SDPA solves `min Σ cᵢyᵢ s.t. Σ Fᵢyᵢ − F₀ ⪰ 0`. With `F₀ = −B`, `Fᵢ = Aᵢ`
/// and `y = −x` this is the inequality form with its objective negated, so
/// reported SDPA optimal values are the negatives of ours.
pub fn to_sdpa(inst: &SdpInstance, name: &str) -> Result<String> {
    let n = inst.n();
    let mut s = String::new();
    writeln!(s, "\"{name}: F0 = -B, Fi = Ai; SDPA values are negated").expect("writing to a string");
    writeln!(s, "{} = mDIM", inst.m()).expect("writing to a string");
    writeln!(s, "1 = nBLOCK").expect("writing to a string");
    writeln!(s, "{n} = bLOCKsTRUCT").expect("writing to a string");
    let c = inst.c().iter().map(rat_to_decimal).collect::<Result<Vec<_>>>()?;
    writeln!(s, "{}", c.join(" ")).expect("writing to a string");
    let neg_b = inst.b().neg();
    for (k, mat) in std::iter::once(&neg_b).chain(inst.a()).enumerate() {
        for i in 0..n {
            for j in i..n {
                let v = mat.get(i, j);
                if !v.is_zero() {
                    writeln!(s, "{k} 1 {} {} {}", i + 1, j + 1, rat_to_decimal(v)?).expect("writing to a string");
                }
            }
        }
    }
    Ok(s)
}

pub fn export_sdpa(inst: &SdpInstance, path: &Path, name: &str) -> Result<()> {
    std::fs::write(path, to_sdpa(inst, name)?)?;
    Ok(())
}
