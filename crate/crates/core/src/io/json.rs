//! Versioned JSON instance files with exact rational scalars.
//!
//! Scalars are written as JSON integers when they fit in an `i64` and as
//! `"p/q"` strings otherwise. Reading accepts integers, `"p"`, `"p/q"` and
//! terminating decimal strings.

use std::path::Path;

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::scalar::{format_rat, parse_rat, ExtendedRat, Rat};
use crate::sdpmodel::{Family, InstanceMeta, KnownGap, MessInfo, SdpInstance};
use crate::symkernel::{Mat, SymMat};

pub const FORMAT_VERSION: u64 = 1;

fn scalar(r: &Rat) -> Value {
    if r.is_integer() {
        if let Some(v) = r.to_integer().to_i64() {
            return json!(v);
        }
    }
    Value::String(format_rat(r))
}

fn rows(rows: Vec<Vec<Rat>>) -> Value {
    Value::Array(rows.iter().map(|r| Value::Array(r.iter().map(scalar).collect())).collect())
}

fn sym(m: &SymMat<Rat>) -> Value {
    rows(m.to_rows())
}

fn meta_value(meta: &InstanceMeta) -> Value {
    let mut out = Map::new();
    if let Some(f) = meta.family {
        out.insert("family".into(), json!(f.tag()));
    }
    if let Some(s) = &meta.scale {
        out.insert("scale".into(), scalar(s));
    }
    if let Some(s) = meta.seed {
        out.insert("seed".into(), json!(s));
    }
    if let Some(g) = &meta.known_gap {
        out.insert("known_gap".into(), json!({"primal": g.primal.to_string(), "dual": g.dual.to_string()}));
    }
    out.insert("assumption11_holds".into(), json!(meta.assumption11_holds));
    if !meta.ops.is_empty() {
        out.insert("ops".into(), json!(meta.ops));
    }
    if let Some(m) = &meta.mess {
        out.insert(
            "mess".into(),
            json!({
                "seed": m.seed,
                "num_ops": m.num_ops,
                "entry_bound": m.entry_bound,
                "transform": rows(m.transform.to_rows()),
                "log": m.log,
            }),
        );
    }
    if let Some(e) = &meta.perturb_eps {
        out.insert("perturb_eps".into(), scalar(e));
    }
    if let Some(y) = &meta.dual_point {
        out.insert("dual_point".into(), sym(y));
    }
    Value::Object(out)
}

/// JSON value of an instance in the version 1 layout.
pub fn instance_to_value(inst: &SdpInstance) -> Value {
    json!({
        "version": FORMAT_VERSION,
        "name": inst.meta.name,
        "m": inst.m(),
        "n": inst.n(),
        "A": Value::Array(inst.a().iter().map(sym).collect()),
        "B": sym(inst.b()),
        "c": Value::Array(inst.c().iter().map(scalar).collect()),
        "meta": meta_value(&inst.meta),
    })
}

pub fn to_json_string(inst: &SdpInstance) -> String {
    serde_json::to_string_pretty(&instance_to_value(inst)).expect("values are always serializable") + "\n"
}

/// Walks a parsed document and reports errors by JSON path.
struct Reader;

impl Reader {
    fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
        obj.get(key)
            .ok_or_else(|| Error::parse(path, format!("missing field {key:?}")))
    }

    fn rat(v: &Value, path: &str) -> Result<Rat> {
        match v {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Rat::from_integer(i.into()))
                } else {
                    parse_rat(&n.to_string()).map_err(|_| Error::parse(path, format!("not an exact number: {n}")))
                }
            }
            Value::String(s) => parse_rat(s).map_err(|_| Error::parse(path, format!("not a rational literal: {s:?}"))),
            other => Err(Error::parse(path, format!("expected a number or \"p/q\" string, got {other}"))),
        }
    }

    fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
        v.as_array().ok_or_else(|| Error::parse(path, "expected an array"))
    }

    fn usize(v: &Value, path: &str) -> Result<usize> {
        v.as_u64()
            .and_then(|x| usize::try_from(x).ok())
            .ok_or_else(|| Error::parse(path, "expected a nonnegative integer"))
    }

    fn rows(v: &Value, path: &str, n: Option<usize>) -> Result<Vec<Vec<Rat>>> {
        let outer = Self::array(v, path)?;
        if let Some(n) = n {
            if outer.len() != n {
                return Err(Error::parse(path, format!("expected {n} rows, found {}", outer.len())));
            }
        }
        outer
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let p = format!("{path}[{i}]");
                let row = Self::array(row, &p)?;
                if let Some(n) = n {
                    if row.len() != n {
                        return Err(Error::parse(&p, format!("expected {n} entries, found {}", row.len())));
                    }
                }
                row.iter()
                    .enumerate()
                    .map(|(j, x)| Self::rat(x, &format!("{p}[{j}]")))
                    .collect()
            })
            .collect()
    }

    fn sym(v: &Value, path: &str, n: usize) -> Result<SymMat<Rat>> {
        let r = Self::rows(v, path, Some(n))?;
        SymMat::from_rows_named(r, path)
    }

    fn mat(v: &Value, path: &str) -> Result<Mat<Rat>> {
        Mat::from_rows(Self::rows(v, path, None)?).map_err(|e| Error::parse(path, e.to_string()))
    }

    fn extended(v: &Value, path: &str) -> Result<ExtendedRat> {
        match v {
            Value::String(s) if s == "inf" => Ok(ExtendedRat::PosInf),
            other => Self::rat(other, path).map(ExtendedRat::Finite),
        }
    }

    fn strings(v: &Value, path: &str) -> Result<Vec<String>> {
        Self::array(v, path)?
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Error::parse(format!("{path}[{i}]"), "expected a string"))
            })
            .collect()
    }

    fn meta(v: &Value, n: usize) -> Result<InstanceMeta> {
        let mut meta = InstanceMeta::default();
        let Some(obj) = v.as_object() else {
            return Err(Error::parse("meta", "expected an object"));
        };
        for (k, val) in obj {
            let p = format!("meta.{k}");
            match k.as_str() {
                "family" => {
                    let tag = val.as_str().ok_or_else(|| Error::parse(&p, "expected a string"))?;
                    meta.family =
                        Some(Family::from_tag(tag).ok_or_else(|| Error::parse(&p, format!("unknown family {tag:?}")))?);
                }
                "scale" => meta.scale = Some(Self::rat(val, &p)?),
                "seed" => meta.seed = Some(val.as_u64().ok_or_else(|| Error::parse(&p, "expected an integer"))?),
                "known_gap" => {
                    meta.known_gap = Some(KnownGap {
                        primal: Self::extended(Self::field(val, "primal", &p)?, &format!("{p}.primal"))?,
                        dual: Self::extended(Self::field(val, "dual", &p)?, &format!("{p}.dual"))?,
                    })
                }
                "assumption11_holds" => {
                    meta.assumption11_holds = val.as_bool().ok_or_else(|| Error::parse(&p, "expected a boolean"))?
                }
                "ops" => meta.ops = Self::strings(val, &p)?,
                "mess" => {
                    let seed = Self::field(val, "seed", &p)?
                        .as_u64()
                        .ok_or_else(|| Error::parse(format!("{p}.seed"), "expected an integer"))?;
                    let entry_bound = Self::field(val, "entry_bound", &p)?
                        .as_i64()
                        .ok_or_else(|| Error::parse(format!("{p}.entry_bound"), "expected an integer"))?;
                    meta.mess = Some(MessInfo {
                        seed,
                        num_ops: Self::usize(Self::field(val, "num_ops", &p)?, &format!("{p}.num_ops"))?,
                        entry_bound,
                        transform: Self::mat(Self::field(val, "transform", &p)?, &format!("{p}.transform"))?,
                        log: match val.get("log") {
                            Some(l) => Self::strings(l, &format!("{p}.log"))?,
                            None => Vec::new(),
                        },
                    });
                }
                "perturb_eps" => meta.perturb_eps = Some(Self::rat(val, &p)?),
                "dual_point" => meta.dual_point = Some(Self::sym(val, &p, n)?),
                _ => return Err(Error::parse(p, "unknown metadata field")),
            }
        }
        Ok(meta)
    }
}

/// Parse a version 1 document. Syntax errors report line and column;
/// structural errors report the JSON path of the offending entry.
pub fn from_json_str(text: &str) -> Result<SdpInstance> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    if !doc.is_object() {
        return Err(Error::parse("document", "expected a JSON object"));
    }
    let version = Reader::field(&doc, "version", "document")?
        .as_u64()
        .ok_or_else(|| Error::parse("version", "expected an integer"))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version(version.min(u32::MAX as u64) as u32));
    }
    let m = Reader::usize(Reader::field(&doc, "m", "document")?, "m")?;
    let n = Reader::usize(Reader::field(&doc, "n", "document")?, "n")?;
    let a_raw = Reader::array(Reader::field(&doc, "A", "document")?, "A")?;
    if a_raw.len() != m {
        return Err(Error::parse("A", format!("expected {m} matrices, found {}", a_raw.len())));
    }
    let a = a_raw
        .iter()
        .enumerate()
        .map(|(k, v)| Reader::sym(v, &format!("A[{k}]"), n))
        .collect::<Result<Vec<_>>>()?;
    let b = Reader::sym(Reader::field(&doc, "B", "document")?, "B", n)?;
    let c_raw = Reader::array(Reader::field(&doc, "c", "document")?, "c")?;
    if c_raw.len() != m {
        return Err(Error::parse("c", format!("expected {m} entries, found {}", c_raw.len())));
    }
    let c = c_raw
        .iter()
        .enumerate()
        .map(|(i, v)| Reader::rat(v, &format!("c[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let mut meta = match doc.get("meta") {
        Some(v) => Reader::meta(v, n)?,
        None => InstanceMeta::default(),
    };
    meta.name = match doc.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::parse("name", "expected a string")),
        None => String::new(),
    };
    Ok(SdpInstance::new(a, b, c)?.with_meta(meta))
}

pub fn save(inst: &SdpInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json_string(inst))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<SdpInstance> {
    from_json_str(&std::fs::read_to_string(path)?)
}
