//! Probabilities as ratios of basic measures over a finite set of elements.
//!
//! A table is written as a delimited block:
//!
//! ```text
//! name    | edge   | value [cents] | fraction_cu [%] nonadditive
//! penny   | smooth | 1             | 2.50
//! nickel  | smooth | 5             | 75.00
//! ```
//!
//! Numeric columns are measures; any other column is an attribute used to
//! select events, as in `edge=smooth`. The measure `count` is always present.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{format_decimal, format_rational, int, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("`{0}` is not additive and cannot serve as a measure")]
    NonAdditive(String),
    #[error("measure `{measure}` is negative on `{element}`")]
    Negative { measure: String, element: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    pub name: String,
    pub unit: String,
    pub values: BTreeMap<String, Rational>,
    /// False for columns such as percentages that do not add over unions.
    pub additive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureTable {
    pub elements: Vec<String>,
    pub measures: Vec<Measure>,
    pub attributes: BTreeMap<String, BTreeMap<String, String>>,
}

/// An event: explicit elements, elements with an attribute value, or everything.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Selector {
    All,
    Elements(Vec<String>),
    Attribute { column: String, value: String },
}

impl Selector {
    /// `edge=smooth`, `{penny, dime}`, `dime` or `*`.
    pub fn parse(src: &str) -> Selector {
        let s = src.trim();
        if s == "*" || s.eq_ignore_ascii_case("omega") {
            return Selector::All;
        }
        if let Some((c, v)) = s.split_once('=') {
            return Selector::Attribute { column: c.trim().to_string(), value: v.trim().to_string() };
        }
        let inner = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')).unwrap_or(s);
        Selector::Elements(inner.split(',').map(|e| e.trim().to_string()).filter(|e| !e.is_empty()).collect())
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::All => write!(f, "*"),
            Selector::Elements(es) if es.len() == 1 => write!(f, "{}", es[0]),
            Selector::Elements(es) => write!(f, "{{{}}}", es.join(", ")),
            Selector::Attribute { column, value } => write!(f, "{column}={value}"),
        }
    }
}

/// `μ(event ∩ given) / μ(given)` with both measures kept, so `0/0` stays visible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasureRatio {
    #[serde(serialize_with = "rat_str")]
    pub numerator: Rational,
    #[serde(serialize_with = "rat_str")]
    pub denominator: Rational,
}

fn rat_str<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

impl MeasureRatio {
    /// `None` for the indefinite `0/0`.
    pub fn value(&self) -> Option<Rational> {
        if self.denominator.is_zero() {
            None
        } else {
            Some(&self.numerator / &self.denominator)
        }
    }

    pub fn is_indefinite(&self) -> bool {
        self.denominator.is_zero()
    }

    /// Numerator and denominator scaled to integers without reducing, e.g. `2268/15438`.
    pub fn raw(&self) -> String {
        let mut scale = int(1);
        let ten = int(10);
        for _ in 0..12 {
            if (&self.numerator * &scale).is_integer() && (&self.denominator * &scale).is_integer() {
                break;
            }
            scale *= &ten;
        }
        let n = &self.numerator * &scale;
        let d = &self.denominator * &scale;
        if n.is_integer() && d.is_integer() {
            format!("{}/{}", n.to_integer(), d.to_integer())
        } else {
            format!("({})/({})", format_rational(&self.numerator), format_rational(&self.denominator))
        }
    }
}

impl fmt::Display for MeasureRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => write!(f, "0/0 (indefinite)"),
            Some(v) => {
                let exact = format_rational(&v);
                let raw = self.raw();
                if raw == exact || v.is_integer() {
                    write!(f, "{exact} ≈ {}", format_decimal(&v, 3))
                } else {
                    write!(f, "{raw} = {exact} ≈ {}", format_decimal(&v, 3))
                }
            }
        }
    }
}

fn parse_header(cell: &str) -> (String, String, bool) {
    let mut rest = cell.trim().to_string();
    let additive = match rest.strip_suffix("nonadditive") {
        Some(r) => {
            rest = r.trim().to_string();
            false
        }
        None => true,
    };
    let (name, unit) = match rest.split_once('[') {
        Some((n, u)) => (n.trim().to_string(), u.trim_end().trim_end_matches(']').trim().to_string()),
        None => (rest.trim().to_string(), String::new()),
    };
    (name, unit, additive)
}

/// Numeric cell, ignoring thousands separators.
fn numeric(cell: &str) -> Option<Rational> {
    parse_rational(&cell.replace(',', ""))
}

impl MeasureTable {
    pub fn parse(text: &str) -> Result<MeasureTable, MeasureError> {
        Self::parse_from(text, 1)
    }

    /// Like [`MeasureTable::parse`], numbering lines from `first_line`.
    pub fn parse_from(text: &str, first_line: usize) -> Result<MeasureTable, MeasureError> {
        let rows: Vec<(usize, Vec<String>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + first_line, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .map(|(i, l)| (i, l.split('|').map(|c| c.trim().to_string()).collect()))
            .collect();
        let Some(((hl, header), body)) = rows.split_first() else {
            return Err(MeasureError::Parse { line: first_line, message: "empty measure table".into() });
        };
        if header.len() < 2 {
            return Err(MeasureError::Parse { line: *hl, message: "need a name column and at least one more".into() });
        }
        let cols: Vec<(String, String, bool)> = header[1..].iter().map(|c| parse_header(c)).collect();
        let mut elements = Vec::new();
        for (line, cells) in body {
            if cells.len() != header.len() {
                return Err(MeasureError::Parse {
                    line: *line,
                    message: format!("expected {} cells, found {}", header.len(), cells.len()),
                });
            }
            if elements.contains(&cells[0]) {
                return Err(MeasureError::Parse { line: *line, message: format!("duplicate element `{}`", cells[0]) });
            }
            elements.push(cells[0].clone());
        }
        let mut measures = vec![Measure {
            name: "count".into(),
            unit: "elements".into(),
            values: elements.iter().map(|e| (e.clone(), int(1))).collect(),
            additive: true,
        }];
        let mut attributes = BTreeMap::new();
        for (j, (name, unit, additive)) in cols.iter().enumerate() {
            if name == "count" {
                return Err(MeasureError::Parse { line: *hl, message: "`count` is built in".into() });
            }
            let cells: Vec<&String> = body.iter().map(|(_, c)| &c[j + 1]).collect();
            let nums: Option<Vec<Rational>> = cells.iter().map(|c| numeric(c)).collect();
            match nums {
                Some(vals) if !body.is_empty() => {
                    for (e, v) in elements.iter().zip(&vals) {
                        if v.is_negative() {
                            return Err(MeasureError::Negative { measure: name.clone(), element: e.clone() });
                        }
                    }
                    measures.push(Measure {
                        name: name.clone(),
                        unit: unit.clone(),
                        values: elements.iter().cloned().zip(vals).collect(),
                        additive: *additive,
                    });
                }
                _ => {
                    let m = elements.iter().cloned().zip(cells.iter().map(|c| c.to_string())).collect();
                    attributes.insert(name.clone(), m);
                }
            }
        }
        Ok(MeasureTable { elements, measures, attributes })
    }

    pub fn measure(&self, name: &str) -> Result<&Measure, MeasureError> {
        self.measures.iter().find(|m| m.name == name).ok_or_else(|| MeasureError::UnknownMeasure(name.to_string()))
    }

    pub fn select(&self, s: &Selector) -> Result<BTreeSet<String>, MeasureError> {
        match s {
            Selector::All => Ok(self.elements.iter().cloned().collect()),
            Selector::Elements(es) => {
                for e in es {
                    if !self.elements.contains(e) {
                        return Err(MeasureError::UnknownElement(e.clone()));
                    }
                }
                Ok(es.iter().cloned().collect())
            }
            Selector::Attribute { column, value } => {
                let col = self.attributes.get(column).ok_or_else(|| MeasureError::UnknownAttribute(column.clone()))?;
                Ok(col.iter().filter(|(_, v)| *v == value).map(|(e, _)| e.clone()).collect())
            }
        }
    }

    /// `μ(set)` as a sum over members.
    pub fn mu(&self, set: &BTreeSet<String>, measure: &str) -> Result<Rational, MeasureError> {
        let m = self.measure(measure)?;
        if !m.additive {
            return Err(MeasureError::NonAdditive(measure.to_string()));
        }
        let mut total = Rational::zero();
        for e in set {
            total += m.values.get(e).ok_or_else(|| MeasureError::UnknownElement(e.clone()))?;
        }
        Ok(total)
    }

    /// Renders the table back to its block form.
    pub fn render(&self) -> String {
        let mut cols: Vec<(String, Vec<String>)> = Vec::new();
        let mut head = vec!["name".to_string()];
        for (name, vals) in &self.attributes {
            head.push(name.clone());
            cols.push((name.clone(), self.elements.iter().map(|e| vals[e].clone()).collect()));
        }
        for m in self.measures.iter().skip(1) {
            let mut h = m.name.clone();
            if !m.unit.is_empty() {
                h.push_str(&format!(" [{}]", m.unit));
            }
            if !m.additive {
                h.push_str(" nonadditive");
            }
            head.push(h);
            cols.push((m.name.clone(), self.elements.iter().map(|e| format_rational(&m.values[e])).collect()));
        }
        let mut out = head.join(" | ");
        out.push('\n');
        for (i, e) in self.elements.iter().enumerate() {
            let mut row = vec![e.clone()];
            row.extend(cols.iter().map(|(_, v)| v[i].clone()));
            out.push_str(&row.join(" | "));
            out.push('\n');
        }
        out
    }
}

/// `μ(event ∩ given) / μ(given)`; `given` defaults to every element.
pub fn measure_probability(
    t: &MeasureTable,
    event: &Selector,
    given: Option<&Selector>,
    measure: &str,
) -> Result<MeasureRatio, MeasureError> {
    let e = t.select(event)?;
    let g = t.select(given.unwrap_or(&Selector::All))?;
    let both: BTreeSet<String> = e.intersection(&g).cloned().collect();
    Ok(MeasureRatio { numerator: t.mu(&both, measure)?, denominator: t.mu(&g, measure)? })
}

/// Material conditional `μ(A ∩ B) = k μ(A)` under one measure.
pub fn conditional_by_measure(
    t: &MeasureTable,
    antecedent: &Selector,
    consequent: &Selector,
    k: &Rational,
    measure: &str,
) -> Result<bool, MeasureError> {
    let a = t.select(antecedent)?;
    let b = t.select(consequent)?;
    let ab: BTreeSet<String> = a.intersection(&b).cloned().collect();
    Ok(t.mu(&ab, measure)? == k * t.mu(&a, measure)?)
}
