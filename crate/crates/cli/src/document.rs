//! System and law documents: JSON with exact rational entries.

use std::fmt;
use std::path::Path;

use perdec_core::poly::parse_q;
use perdec_core::{FeedbackLaw, PeriodicSystem, QMat, Q};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A matrix entry: a JSON integer or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry(pub Q);

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct EntryVisitor;

        impl Visitor<'_> for EntryVisitor {
            type Value = Entry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Entry, E> {
                Ok(Entry(Q::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Entry, E> {
                Ok(Entry(Q::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Entry, E> {
                Err(E::custom(format!("{v} is a float; write it as an integer or a \"p/q\" string")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Entry, E> {
                parse_q(v).map(Entry).ok_or_else(|| E::custom(format!("\"{v}\" is not an exact rational")))
            }
        }

        d.deserialize_any(EntryVisitor)
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_q(&self.0, s)
    }
}

/// Integers that fit in `i64` become JSON numbers, everything else a string.
pub fn serialize_q<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
    use num_traits::ToPrimitive;
    match v.is_integer().then(|| v.to_integer().to_i64()).flatten() {
        Some(i) => s.serialize_i64(i),
        None => s.serialize_str(&v.to_string()),
    }
}

pub type RawMatrix = Vec<Vec<Entry>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawDocument {
    #[serde(rename = "F")]
    pub f: Vec<RawMatrix>,
    #[serde(rename = "G")]
    pub g: Vec<RawMatrix>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step10_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub period: usize,
    pub dims: Vec<usize>,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "A")]
    pub a: Vec<RawMatrix>,
    #[serde(rename = "B")]
    pub b: Vec<RawMatrix>,
    #[serde(rename = "C")]
    pub c: Vec<RawMatrix>,
    #[serde(rename = "D")]
    pub d: Vec<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilizing_feedback: Option<LawDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<DocumentOptions>,
}

#[derive(Debug)]
pub enum DocumentError {
    Io(String, std::io::Error),
    /// Malformed JSON or a bad field, with serde's line and column.
    Parse(String),
    /// A dimension rule is violated; the message names the matrix.
    Shape(String),
    /// The core rejected the data.
    System(perdec_core::Error),
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocumentError::Io(path, e) => write!(f, "cannot read {path}: {e}"),
            DocumentError::Parse(msg) => write!(f, "parse error: {msg}"),
            DocumentError::Shape(msg) => write!(f, "shape error: {msg}"),
            DocumentError::System(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DocumentError {}

fn to_qmat(raw: &RawMatrix, name: &str, want: (usize, usize)) -> Result<QMat, DocumentError> {
    let cols = raw.first().map_or(want.1, Vec::len);
    if let Some(i) = raw.iter().position(|r| r.len() != cols) {
        return Err(DocumentError::Shape(format!(
            "{name} row {i} has {} entries, row 0 has {cols}",
            raw[i].len()
        )));
    }
    if (raw.len(), cols) != want {
        return Err(DocumentError::Shape(format!(
            "{name} is {}x{cols}, expected {}x{}",
            raw.len(),
            want.0,
            want.1
        )));
    }
    Ok(QMat::from_rows(raw.iter().map(|r| r.iter().map(|e| e.0.clone()).collect()).collect()))
}

#[cfg(test)]
fn from_qmat(m: &QMat) -> RawMatrix {
    (0..m.rows()).map(|i| m.row(i).into_iter().map(Entry).collect()).collect()
}

fn check_count(name: &str, len: usize, period: usize) -> Result<(), DocumentError> {
    if len != period {
        return Err(DocumentError::Shape(format!("{name} has {len} matrices, period is {period}")));
    }
    Ok(())
}

impl LawDocument {
    /// Checks `F(t)` against `m x n(t)` and `G(t)` against `m x cols`.
    pub fn to_law(&self, dims: &[usize], m: usize, g_cols: Option<usize>) -> Result<FeedbackLaw, DocumentError> {
        let period = dims.len();
        check_count("F", self.f.len(), period)?;
        check_count("G", self.g.len(), period)?;
        let mut law = FeedbackLaw { f: Vec::new(), g: Vec::new() };
        for t in 0..period {
            law.f.push(to_qmat(&self.f[t], &format!("F[{t}]"), (m, dims[t]))?);
            let cols = g_cols.unwrap_or_else(|| self.g[t].first().map_or(0, Vec::len));
            law.g.push(to_qmat(&self.g[t], &format!("G[{t}]"), (m, cols))?);
        }
        Ok(law)
    }
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        serde_json::from_str(text).map_err(|e| DocumentError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, DocumentError> {
        let text = std::fs::read_to_string(path).map_err(|e| DocumentError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn system(&self) -> Result<PeriodicSystem, DocumentError> {
        let t = self.period;
        if t == 0 {
            return Err(DocumentError::Shape("period must be positive".into()));
        }
        check_count("dims", self.dims.len(), t)?;
        for (name, v) in [("A", &self.a), ("B", &self.b), ("C", &self.c), ("D", &self.d)] {
            check_count(name, v.len(), t)?;
        }
        let (n, m, p) = (&self.dims, self.m, self.p);
        let next = |k: usize| n[(k + 1) % t];
        let mut mats = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for k in 0..t {
            mats.0.push(to_qmat(&self.a[k], &format!("A[{k}]"), (next(k), n[k]))?);
            mats.1.push(to_qmat(&self.b[k], &format!("B[{k}]"), (next(k), m))?);
            mats.2.push(to_qmat(&self.c[k], &format!("C[{k}]"), (p, n[k]))?);
            mats.3.push(to_qmat(&self.d[k], &format!("D[{k}]"), (p, m))?);
        }
        PeriodicSystem::new(n.clone(), m, p, mats.0, mats.1, mats.2, mats.3).map_err(DocumentError::System)
    }

    pub fn stabilizing_law(&self) -> Result<Option<FeedbackLaw>, DocumentError> {
        self.stabilizing_feedback.as_ref().map(|l| l.to_law(&self.dims, self.m, Some(self.m))).transpose()
    }

    #[cfg(test)]
    pub fn from_system(sys: &PeriodicSystem) -> Self {
        let t = sys.period() as i64;
        SystemDocument {
            period: sys.period(),
            dims: sys.dims().to_vec(),
            m: sys.inputs(),
            p: sys.outputs(),
            a: (0..t).map(|k| from_qmat(sys.a(k))).collect(),
            b: (0..t).map(|k| from_qmat(sys.b(k))).collect(),
            c: (0..t).map(|k| from_qmat(sys.c(k))).collect(),
            d: (0..t).map(|k| from_qmat(sys.d(k))).collect(),
            stabilizing_feedback: None,
            options: None,
        }
    }
}

/// Reads a law from a law document or from a machine-format decouple report.
pub fn load_law(path: &Path, sys: &PeriodicSystem) -> Result<FeedbackLaw, DocumentError> {
    let text = std::fs::read_to_string(path).map_err(|e| DocumentError::Io(path.display().to_string(), e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| DocumentError::Parse(e.to_string()))?;
    let law_value = match value.get("law") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let doc: LawDocument = serde_json::from_value(law_value).map_err(|e| DocumentError::Parse(e.to_string()))?;
    doc.to_law(sys.dims(), sys.inputs(), None)
}
