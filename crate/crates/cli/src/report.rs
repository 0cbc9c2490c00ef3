//! Report tree rendered either as indented text or as JSON.

use perdec_core::{FeedbackLaw, IntegerList, Poly, QMat, RatFun, RatMat, Q};
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::document::serialize_q;

#[derive(Clone, Debug)]
pub enum Item {
    Bool(bool),
    Int(i64),
    Text(String),
    Rational(Q),
    Poly(Poly),
    Matrix(QMat),
    Transfer(RatMat),
    List(Vec<Item>),
    Map(Report),
}

/// Ordered key/value pairs; order is preserved in both renderings.
#[derive(Clone, Debug, Default)]
pub struct Report(pub Vec<(String, Item)>);

impl Report {
    pub fn new() -> Self {
        Report(Vec::new())
    }

    pub fn put(&mut self, key: &str, item: impl Into<Item>) -> &mut Self {
        self.0.push((key.to_string(), item.into()));
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_map(&mut out, self, 0);
        out
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        write_json(&mut out, &value, 0);
        out.push('\n');
        out
    }
}

impl From<bool> for Item {
    fn from(v: bool) -> Self {
        Item::Bool(v)
    }
}

impl From<usize> for Item {
    fn from(v: usize) -> Self {
        Item::Int(v as i64)
    }
}

impl From<i64> for Item {
    fn from(v: i64) -> Self {
        Item::Int(v)
    }
}

impl From<&str> for Item {
    fn from(v: &str) -> Self {
        Item::Text(v.to_string())
    }
}

impl From<String> for Item {
    fn from(v: String) -> Self {
        Item::Text(v)
    }
}

impl From<Q> for Item {
    fn from(v: Q) -> Self {
        Item::Rational(v)
    }
}

impl From<Poly> for Item {
    fn from(v: Poly) -> Self {
        Item::Poly(v)
    }
}

impl From<QMat> for Item {
    fn from(v: QMat) -> Self {
        Item::Matrix(v)
    }
}

impl From<RatMat> for Item {
    fn from(v: RatMat) -> Self {
        Item::Transfer(v)
    }
}

impl From<Report> for Item {
    fn from(v: Report) -> Self {
        Item::Map(v)
    }
}

impl From<&IntegerList> for Item {
    fn from(v: &IntegerList) -> Self {
        Item::List(v.values().iter().map(|&x| Item::from(x)).collect())
    }
}

impl<T: Into<Item>> From<Vec<T>> for Item {
    fn from(v: Vec<T>) -> Self {
        Item::List(v.into_iter().map(Into::into).collect())
    }
}

/// Lists of integer lists, e.g. one list per time block.
pub fn lists(v: &[IntegerList]) -> Item {
    Item::List(v.iter().map(Item::from).collect())
}

pub fn law(law: &FeedbackLaw) -> Item {
    let mut r = Report::new();
    r.put("F", law.f.clone()).put("G", law.g.clone());
    r.into()
}

struct Coeffs<'a>(&'a Poly);

impl Serialize for Coeffs<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let c = self.0.coeffs();
        let mut seq = s.serialize_seq(Some(c.len()))?;
        for x in c {
            seq.serialize_element(&Exact(x))?;
        }
        seq.end()
    }
}

struct Exact<'a>(&'a Q);

impl Serialize for Exact<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_q(self.0, s)
    }
}

/// `{num, den}` with coefficients in ascending powers of `z`.
struct Fraction<'a>(&'a RatFun);

impl Serialize for Fraction<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("num", &Coeffs(self.0.num()))?;
        map.serialize_entry("den", &Coeffs(self.0.den()))?;
        map.end()
    }
}

impl Serialize for Item {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Item::Bool(v) => s.serialize_bool(*v),
            Item::Int(v) => s.serialize_i64(*v),
            Item::Text(v) => s.serialize_str(v),
            Item::Rational(v) => serialize_q(v, s),
            Item::Poly(p) => Coeffs(p).serialize(s),
            Item::Matrix(m) => {
                let rows: Vec<Vec<Q>> = (0..m.rows()).map(|i| m.row(i)).collect();
                let mut seq = s.serialize_seq(Some(rows.len()))?;
                for row in &rows {
                    seq.serialize_element(&row.iter().map(Exact).collect::<Vec<_>>())?;
                }
                seq.end()
            }
            Item::Transfer(m) => {
                let mut seq = s.serialize_seq(Some(m.rows()))?;
                for i in 0..m.rows() {
                    let row: Vec<_> = (0..m.cols()).map(|j| Fraction(&m[(i, j)])).collect();
                    seq.serialize_element(&row)?;
                }
                seq.end()
            }
            Item::List(v) => v.serialize(s),
            Item::Map(r) => r.serialize(s),
        }
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// Values whose compact form fits in this width stay on one line.
const JSON_WIDTH: usize = 100;

fn write_json(out: &mut String, v: &serde_json::Value, indent: usize) {
    use serde_json::Value;
    let compact = v.to_string();
    if indent + compact.len() <= JSON_WIDTH {
        out.push_str(&compact);
        return;
    }
    let pad = " ".repeat(indent + 2);
    match v {
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write_json(out, x, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&" ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&format!("{pad}{}: ", Value::String(k.clone())));
                write_json(out, x, indent + 2);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&" ".repeat(indent));
            out.push('}');
        }
        _ => out.push_str(&compact),
    }
}

fn inline(item: &Item) -> Option<String> {
    match item {
        Item::Bool(v) => Some(v.to_string()),
        Item::Int(v) => Some(v.to_string()),
        Item::Text(v) => Some(v.clone()),
        Item::Rational(v) => Some(v.to_string()),
        Item::Poly(p) => Some(p.to_string()),
        Item::List(v) => {
            let parts: Option<Vec<String>> = v.iter().map(inline).collect();
            parts.map(|p| format!("({})", p.join(",")))
        }
        _ => None,
    }
}

fn write_block(out: &mut String, block: &str, indent: usize) {
    for line in block.lines() {
        out.push_str(&" ".repeat(indent));
        out.push_str(line);
        out.push('\n');
    }
}

fn write_item(out: &mut String, key: &str, item: &Item, indent: usize) {
    let pad = " ".repeat(indent);
    if let Some(s) = inline(item) {
        out.push_str(&format!("{pad}{key}: {s}\n"));
        return;
    }
    out.push_str(&format!("{pad}{key}:\n"));
    match item {
        Item::Matrix(m) if m.rows() == 0 || m.cols() == 0 => {
            write_block(out, &format!("({}x{} empty)", m.rows(), m.cols()), indent + 2)
        }
        Item::Matrix(m) => write_block(out, &m.to_string(), indent + 2),
        Item::Transfer(m) => write_block(out, &m.to_string(), indent + 2),
        Item::Map(r) => write_map(out, r, indent + 2),
        Item::List(v) => {
            for (i, x) in v.iter().enumerate() {
                write_item(out, &format!("[{i}]"), x, indent + 2);
            }
        }
        _ => unreachable!("scalars are inline"),
    }
}

fn write_map(out: &mut String, r: &Report, indent: usize) {
    for (k, v) in &r.0 {
        write_item(out, k, v, indent);
    }
}
