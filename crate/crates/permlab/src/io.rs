//! Matrix files and certificate streams.
//!
//! A matrix file is `{"rows": n, "cols": m, "entries": [[re, im], ...]}` in
//! row-major order. Components may be JSON numbers or decimal strings; the
//! writer uses strings for integers that do not fit in an `i64`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use permlab_core::search::Certificate;
use permlab_core::{Complex64, ComplexMatrix, ExactMatrix, GaussianInt, Matrix};
use serde_json::{json, Value};

/// Largest magnitude at which every integer is an `f64`.
const F64_EXACT_INT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        source: serde_json::Error,
    },
    #[error("malformed matrix file: {0}")]
    Format(String),
    #[error("entry {index} component {component} is not an integer: {value}")]
    NonInteger {
        index: usize,
        component: &'static str,
        value: String,
    },
    #[error(transparent)]
    Core(#[from] permlab_core::Error),
}

/// How to interpret the numeric components of a matrix file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadMode {
    /// Exact when every component is integer-valued, floating point otherwise.
    Auto,
    Float,
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
enum Component {
    Int(BigInt),
    Real(f64),
}

impl Component {
    fn parse(v: &Value) -> Option<Self> {
        match v {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Some(Component::Int(i.into()))
                } else if let Some(u) = n.as_u64() {
                    Some(Component::Int(u.into()))
                } else {
                    let x = n.as_f64()?;
                    Some(Self::from_f64(x))
                }
            }
            Value::String(s) => {
                let s = s.trim();
                if let Ok(i) = s.parse::<BigInt>() {
                    Some(Component::Int(i))
                } else {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .map(Self::from_f64)
                }
            }
            _ => None,
        }
    }

    fn from_f64(x: f64) -> Self {
        if x.fract() == 0.0 && x.abs() <= F64_EXACT_INT {
            Component::Int(BigInt::from(x as i64))
        } else {
            Component::Real(x)
        }
    }

    fn to_f64(&self) -> f64 {
        match self {
            Component::Int(i) => i.to_f64().unwrap_or(f64::NAN),
            Component::Real(x) => *x,
        }
    }

    fn is_int(&self) -> bool {
        matches!(self, Component::Int(_))
    }
}

fn field_usize(doc: &Value, key: &str) -> Result<usize, IoError> {
    doc.get(key)
        .and_then(Value::as_u64)
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| IoError::Format(format!("missing or invalid \"{key}\"")))
}

/// Parses a matrix document.
pub fn parse_matrix(text: &str, mode: LoadMode) -> Result<Matrix, IoError> {
    let doc: Value = serde_json::from_str(text).map_err(|source| IoError::Json {
        context: "matrix document".into(),
        source,
    })?;
    let rows = field_usize(&doc, "rows")?;
    let cols = field_usize(&doc, "cols")?;
    let raw = doc
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| IoError::Format("missing \"entries\" array".into()))?;

    let mut parts = Vec::with_capacity(raw.len());
    for (index, entry) in raw.iter().enumerate() {
        let pair = entry
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| IoError::Format(format!("entry {index} is not a [re, im] pair")))?;
        let parse = |k: usize| {
            Component::parse(&pair[k]).ok_or_else(|| {
                IoError::Format(format!("entry {index} has a non-numeric component"))
            })
        };
        parts.push((parse(0)?, parse(1)?));
    }

    let all_int = parts.iter().all(|(re, im)| re.is_int() && im.is_int());
    let exact = match mode {
        LoadMode::Float => false,
        LoadMode::Auto => all_int,
        LoadMode::Exact => {
            if let Some((index, (re, im))) = parts
                .iter()
                .enumerate()
                .find(|(_, (re, im))| !(re.is_int() && im.is_int()))
            {
                let (component, value) = if re.is_int() { ("im", im) } else { ("re", re) };
                return Err(IoError::NonInteger {
                    index,
                    component,
                    value: value.to_f64().to_string(),
                });
            }
            true
        }
    };

    if exact {
        let entries = parts
            .into_iter()
            .map(|(re, im)| match (re, im) {
                (Component::Int(re), Component::Int(im)) => GaussianInt::new(re, im),
                _ => unreachable!("checked integral above"),
            })
            .collect();
        Ok(Matrix::Exact(ExactMatrix::new(rows, cols, entries)?))
    } else {
        let entries = parts
            .iter()
            .map(|(re, im)| Complex64::new(re.to_f64(), im.to_f64()))
            .collect();
        Ok(Matrix::Float(ComplexMatrix::new(rows, cols, entries)?))
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_matrix(path: &Path, mode: LoadMode) -> Result<Matrix, IoError> {
    parse_matrix(&read_text(path)?, mode)
}

fn int_json(i: &BigInt) -> Value {
    match i.to_i64() {
        Some(v) => json!(v),
        None => json!(i.to_string()),
    }
}

/// The matrix-file representation of `m`.
pub fn matrix_to_json(m: &Matrix) -> Value {
    let (rows, cols) = m.dims();
    let entries: Vec<Value> = match m {
        Matrix::Float(f) => f.entries().iter().map(|z| json!([z.re, z.im])).collect(),
        Matrix::Exact(e) => e
            .entries()
            .iter()
            .map(|z| json!([int_json(&z.re), int_json(&z.im)]))
            .collect(),
    };
    json!({ "rows": rows, "cols": cols, "entries": entries })
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| IoError::Json {
        context: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<(), IoError> {
    write_json(path, &matrix_to_json(m))
}

/// Appends certificates to a JSON Lines file, creating it if needed.
pub fn append_certificates(path: &Path, certs: &[Certificate]) -> Result<(), IoError> {
    let file_err = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(file_err)?;
    let mut buf = String::new();
    for cert in certs {
        buf.push_str(
            &serde_json::to_string(cert).map_err(|source| IoError::Json {
                context: "certificate".into(),
                source,
            })?,
        );
        buf.push('\n');
    }
    file.write_all(buf.as_bytes()).map_err(file_err)
}

pub fn read_certificates(path: &Path) -> Result<Vec<Certificate>, IoError> {
    let file = File::open(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| IoError::Json {
            context: format!("{}:{}", path.display(), k + 1),
            source,
        })?);
    }
    Ok(out)
}

/// Exact `z` as `{"re": "...", "im": "..."}`.
pub fn gaussian_json(z: &GaussianInt) -> Value {
    json!({ "re": z.re.to_string(), "im": z.im.to_string() })
}
