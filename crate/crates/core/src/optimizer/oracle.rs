//! Brute-force reference: evaluates the program on a uniform grid.
//!
//! Shares nothing with the solver beyond the input types. Continuous
//! variables take `resolution + 1` evenly spaced values, integer variables
//! every integer in range. Subtrees whose interval enclosure rules out a
//! constraint by more than a small margin are skipped.

use std::collections::BTreeMap;

use super::{Bounds, CanonicalKind, Constraint, Objective, OptError};
use crate::parallel::{self, Execution};
use crate::polynomial::Polynomial;
use crate::rational::to_f64;

pub const MAX_DIMENSION: usize = 6;
const SLACK: f64 = 1e-9;
const PRUNE_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleSet {
    Empty,
    Observed {
        min: f64,
        max: f64,
        argmin: BTreeMap<String, f64>,
        argmax: BTreeMap<String, f64>,
    },
}

impl OracleSet {
    pub fn range(&self) -> Option<(f64, f64)> {
        match self {
            OracleSet::Empty => None,
            OracleSet::Observed { min, max, .. } => Some((*min, *max)),
        }
    }
}

struct FPoly {
    terms: Vec<(Vec<(usize, u32)>, f64)>,
}

impl FPoly {
    fn new(p: &Polynomial, index: &BTreeMap<String, usize>) -> FPoly {
        let terms = p
            .terms()
            .map(|(m, c)| (m.factors().iter().map(|(v, e)| (index[v], *e)).collect(), to_f64(c)))
            .collect();
        FPoly { terms }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(fs, c)| fs.iter().fold(*c, |acc, (i, e)| acc * x[*i].powi(*e as i32)))
            .sum()
    }

    fn enclose(&self, bx: &[(f64, f64)]) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (fs, c) in &self.terms {
            let mut iv = (*c, *c);
            for (i, e) in fs {
                iv = imul(iv, ipow(bx[*i], *e));
            }
            lo += iv.0;
            hi += iv.1;
        }
        (lo, hi)
    }
}

fn imul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let c = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    (c.iter().cloned().fold(f64::INFINITY, f64::min), c.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

fn ipow(a: (f64, f64), e: u32) -> (f64, f64) {
    let mut r = (1.0, 1.0);
    for _ in 0..e {
        r = imul(r, a);
    }
    if e % 2 == 0 && a.0 < 0.0 && a.1 > 0.0 {
        r.0 = 0.0;
    }
    r
}

struct Row {
    g: FPoly,
    kind: CanonicalKind,
}

struct Setup {
    names: Vec<String>,
    axes: Vec<Vec<f64>>,
    rows: Vec<Row>,
    num: FPoly,
    den: Option<FPoly>,
    epsilon: f64,
}

impl Setup {
    fn row_ok(&self, r: &Row, x: &[f64]) -> bool {
        let v = r.g.eval(x);
        match r.kind {
            CanonicalKind::Eq => v.abs() <= SLACK,
            CanonicalKind::Ge => v >= -SLACK,
            CanonicalKind::Gt => v >= self.epsilon - SLACK,
        }
    }

    fn row_possible(&self, r: &Row, bx: &[(f64, f64)]) -> bool {
        let (lo, hi) = r.g.enclose(bx);
        match r.kind {
            CanonicalKind::Eq => lo <= SLACK + PRUNE_MARGIN && hi >= -SLACK - PRUNE_MARGIN,
            CanonicalKind::Ge => hi >= -SLACK - PRUNE_MARGIN,
            CanonicalKind::Gt => hi >= self.epsilon - SLACK - PRUNE_MARGIN,
        }
    }

    fn value(&self, x: &[f64]) -> Option<f64> {
        let f = self.num.eval(x);
        match &self.den {
            None => Some(f),
            Some(h) => {
                let hv = h.eval(x);
                if hv.abs() < 1e-12 {
                    None
                } else {
                    Some(f / hv)
                }
            }
        }
    }
}

#[derive(Clone)]
struct Best {
    min: f64,
    max: f64,
    argmin: Vec<f64>,
    argmax: Vec<f64>,
}

fn merge(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(mut a), Some(b)) => {
            if b.min < a.min {
                a.min = b.min;
                a.argmin = b.argmin;
            }
            if b.max > a.max {
                a.max = b.max;
                a.argmax = b.argmax;
            }
            Some(a)
        }
    }
}

fn walk(s: &Setup, depth: usize, x: &mut Vec<f64>, bx: &mut Vec<(f64, f64)>, best: &mut Option<Best>) {
    if depth == s.axes.len() {
        if !s.rows.iter().all(|r| s.row_ok(r, x)) {
            return;
        }
        if let Some(v) = s.value(x) {
            let here = Best { min: v, max: v, argmin: x.clone(), argmax: x.clone() };
            *best = merge(best.take(), Some(here));
        }
        return;
    }
    let saved = bx[depth];
    for &v in &s.axes[depth] {
        x[depth] = v;
        bx[depth] = (v, v);
        if s.rows.iter().all(|r| s.row_possible(r, bx)) {
            walk(s, depth + 1, x, bx, best);
        }
    }
    bx[depth] = saved;
}

fn axis(lower: f64, upper: f64, integer: bool, resolution: usize) -> Vec<f64> {
    if integer {
        let (a, b) = (lower.ceil() as i64, upper.floor() as i64);
        return (a..=b).map(|k| k as f64).collect();
    }
    if upper <= lower {
        return vec![lower];
    }
    (0..=resolution)
        .map(|k| lower + (upper - lower) * k as f64 / resolution as f64)
        .collect()
}

/// Grid extremes of `objective` under `constraints`, in parallel when enabled.
pub fn grid_oracle(
    objective: &Objective,
    constraints: &[Constraint],
    bounds: &Bounds,
    resolution: usize,
    epsilon: f64,
) -> Result<OracleSet, OptError> {
    grid_oracle_with(objective, constraints, bounds, resolution, epsilon, Execution::default())
}

pub fn grid_oracle_with(
    objective: &Objective,
    constraints: &[Constraint],
    bounds: &Bounds,
    resolution: usize,
    epsilon: f64,
    execution: Execution,
) -> Result<OracleSet, OptError> {
    let mut vars = objective.variables();
    for c in constraints {
        vars.extend(c.variables());
    }
    let names: Vec<String> = vars.into_iter().collect();
    let mut continuous = 0;
    let mut axes = Vec::new();
    for v in &names {
        let b = bounds.get(v).ok_or_else(|| OptError::MissingBounds(v.clone()))?;
        if !b.integer {
            continuous += 1;
        }
        axes.push(axis(to_f64(&b.lower), to_f64(&b.upper), b.integer, resolution.max(1)));
    }
    if continuous > MAX_DIMENSION {
        return Err(OptError::OracleDimension { max: MAX_DIMENSION, got: continuous });
    }
    let index: BTreeMap<String, usize> = names.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let rows = constraints
        .iter()
        .map(|c| {
            let (g, kind) = c.normalized();
            Row { g: FPoly::new(&g, &index), kind }
        })
        .collect();
    let (num, den) = match objective {
        Objective::Polynomial(p) => (FPoly::new(p, &index), None),
        Objective::Fractional(q) => (FPoly::new(&q.numerator, &index), Some(FPoly::new(&q.denominator, &index))),
    };
    let setup = Setup { names, axes, rows, num, den, epsilon };
    let n = setup.axes.len();
    let full: Vec<(f64, f64)> = setup
        .axes
        .iter()
        .map(|a| (a.first().copied().unwrap_or(0.0), a.last().copied().unwrap_or(0.0)))
        .collect();
    let best = if n == 0 {
        let mut best = None;
        walk(&setup, 0, &mut Vec::new(), &mut Vec::new(), &mut best);
        best
    } else {
        let first = setup.axes[0].clone();
        let parts = parallel::map(execution, &first, |&v| {
            let mut x = vec![0.0; n];
            let mut bx = full.clone();
            x[0] = v;
            bx[0] = (v, v);
            let mut best = None;
            if setup.rows.iter().all(|r| setup.row_possible(r, &bx)) {
                walk(&setup, 1, &mut x, &mut bx, &mut best);
            }
            best
        });
        parts.into_iter().fold(None, merge)
    };
    Ok(match best {
        None => OracleSet::Empty,
        Some(b) => {
            let label = |x: &[f64]| setup.names.iter().cloned().zip(x.iter().copied()).collect();
            OracleSet::Observed { min: b.min, max: b.max, argmin: label(&b.argmin), argmax: label(&b.argmax) }
        }
    })
}
