//! Lifting of polynomial programs into linear relaxations over a box.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use super::simplex::{Lp, LpResult, LpRow, RowKind};
use super::{CanonicalKind, Program, SolverConfig};
use crate::polynomial::Polynomial;
use crate::rational::Rational;

pub(crate) type Interval = (Rational, Rational);

/// Polynomial over variable indices.
#[derive(Debug, Clone, Default)]
pub(crate) struct IPoly {
    pub terms: Vec<(Vec<u32>, Rational)>,
}

impl IPoly {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for (exps, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(x[i].clone(), e as usize);
                }
            }
            total += t;
        }
        total
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(exps, c)| {
                let mut t = crate::rational::to_f64(c);
                for (i, &e) in exps.iter().enumerate() {
                    if e > 0 {
                        t *= x[i].powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    pub fn grad_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for (exps, c) in &self.terms {
            let c = crate::rational::to_f64(c);
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut t = c * e as f64 * x[i].powi(e as i32 - 1);
                for (k, &ek) in exps.iter().enumerate() {
                    if k != i && ek > 0 {
                        t *= x[k].powi(ek as i32);
                    }
                }
                g[i] += t;
            }
        }
        g
    }
}

/// A lifted column `w = x_left · column_right`.
#[derive(Debug, Clone)]
pub(crate) struct Lifted {
    pub exps: Vec<u32>,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LinForm {
    pub terms: Vec<(usize, Rational)>,
    pub constant: Rational,
}


#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowRel {
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub names: Vec<String>,
    pub integer: Vec<bool>,
    pub root: Vec<Interval>,
    pub lifted: Vec<Lifted>,
    pub objective: LinForm,
    pub obj_poly: IPoly,
    pub denominator: Option<(LinForm, IPoly)>,
    pub rows: Vec<(LinForm, RowRel)>,
    pub row_polys: Vec<(IPoly, RowRel)>,
}

struct Lifter<'a> {
    n: usize,
    index: &'a HashMap<String, usize>,
    binary: &'a [bool],
    lifted: Vec<Lifted>,
    by_exps: HashMap<Vec<u32>, usize>,
}

impl Lifter<'_> {
    fn exps_of(&self, m: &crate::polynomial::Monomial) -> Vec<u32> {
        let mut e = vec![0u32; self.n];
        for (v, k) in m.factors() {
            let i = self.index[v];
            e[i] = if self.binary[i] { 1 } else { *k };
        }
        e
    }

    /// Column for a monomial of degree at least one.
    fn column(&mut self, exps: &[u32]) -> usize {
        let deg: u32 = exps.iter().sum();
        if deg == 1 {
            return exps.iter().position(|&e| e == 1).expect("degree one");
        }
        if let Some(&k) = self.by_exps.get(exps) {
            return self.n + k;
        }
        let left = exps.iter().position(|&e| e > 0).expect("nonconstant");
        let mut rest = exps.to_vec();
        rest[left] -= 1;
        let right = self.column(&rest);
        let k = self.lifted.len();
        self.lifted.push(Lifted { exps: exps.to_vec(), left, right });
        self.by_exps.insert(exps.to_vec(), k);
        self.n + k
    }

    fn lin(&mut self, p: &Polynomial) -> (LinForm, IPoly) {
        let mut form = LinForm::default();
        let mut ip = IPoly::default();
        let mut acc: HashMap<usize, Rational> = HashMap::new();
        let mut ip_acc: HashMap<Vec<u32>, Rational> = HashMap::new();
        for (m, c) in p.terms() {
            let exps = self.exps_of(m);
            *ip_acc.entry(exps.clone()).or_insert_with(Rational::zero) += c;
            if exps.iter().all(|&e| e == 0) {
                form.constant += c;
            } else {
                let col = self.column(&exps);
                *acc.entry(col).or_insert_with(Rational::zero) += c;
            }
        }
        let mut terms: Vec<(usize, Rational)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by_key(|t| t.0);
        form.terms = terms;
        let mut ip_terms: Vec<(Vec<u32>, Rational)> = ip_acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        ip_terms.sort();
        ip.terms = ip_terms;
        (form, ip)
    }
}

impl Compiled {
    /// Lowers `program` for minimization of `numerator` (over `denominator` when given).
    pub fn new(
        program: &Program,
        numerator: &Polynomial,
        denominator: Option<&Polynomial>,
        config: &SolverConfig,
    ) -> Compiled {
        let names: Vec<String> = program.variables().into_iter().collect();
        let index: HashMap<String, usize> = names.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut integer = Vec::with_capacity(names.len());
        let mut root = Vec::with_capacity(names.len());
        let mut binary = Vec::with_capacity(names.len());
        for v in &names {
            let b = &program.bounds[v];
            let (mut lo, mut hi) = (b.lower.clone(), b.upper.clone());
            if b.integer {
                lo = lo.ceil();
                hi = hi.floor();
            }
            binary.push(b.integer && lo >= Rational::zero() && hi <= Rational::one());
            integer.push(b.integer);
            root.push((lo, hi));
        }
        let mut lifter = Lifter {
            n: names.len(),
            index: &index,
            binary: &binary,
            lifted: Vec::new(),
            by_exps: HashMap::new(),
        };
        let (objective, obj_poly) = lifter.lin(numerator);
        let denominator = denominator.map(|d| lifter.lin(d));
        let mut rows = Vec::new();
        let mut row_polys = Vec::new();
        for c in &program.constraints {
            let (mut g, kind) = c.normalized();
            let rel = match kind {
                CanonicalKind::Eq => RowRel::Eq,
                CanonicalKind::Ge => RowRel::Ge,
                CanonicalKind::Gt => {
                    g = &g - &Polynomial::constant(config.epsilon.clone());
                    RowRel::Ge
                }
            };
            let (form, ip) = lifter.lin(&g);
            rows.push((form, rel));
            row_polys.push((ip, rel));
        }
        let lifted = lifter.lifted;
        Compiled { names, integer, root, lifted, objective, obj_poly, denominator, rows, row_polys }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn ncols(&self) -> usize {
        self.names.len() + self.lifted.len()
    }

    /// Range of every column over the box.
    pub fn column_intervals(&self, bx: &[Interval]) -> Vec<Interval> {
        let mut out: Vec<Interval> = bx.to_vec();
        for l in &self.lifted {
            let a = &out[l.left];
            let iv = if l.right == l.left {
                square(a)
            } else {
                mul(a, &out[l.right])
            };
            out.push(iv);
        }
        out
    }

    /// Value of each lifted monomial at the original coordinates.
    pub fn monomial_value(&self, k: usize, x: &[Rational]) -> Rational {
        let mut v = Rational::one();
        for (i, &e) in self.lifted[k].exps.iter().enumerate() {
            if e > 0 {
                v *= num_traits::pow(x[i].clone(), e as usize);
            }
        }
        v
    }

    fn base_lp(&self, bx: &[Interval]) -> (Lp, Vec<Interval>) {
        let n = self.n();
        let iv = self.column_intervals(bx);
        let mut rows = Vec::new();
        for (form, rel) in &self.rows {
            rows.push(LpRow {
                coeffs: form.terms.clone(),
                kind: if *rel == RowRel::Eq { RowKind::Eq } else { RowKind::Ge },
                rhs: -form.constant.clone(),
            });
        }
        for (k, l) in self.lifted.iter().enumerate() {
            let w = n + k;
            let (la, ua) = &iv[l.left];
            let (lb, ub) = &iv[l.right];
            let (a, b) = (l.left, l.right);
            let mk = |ca: Rational, cb: Rational, kind: RowKind, rhs: Rational| LpRow {
                coeffs: merge(vec![(w, Rational::one()), (a, -ca), (b, -cb)]),
                kind,
                rhs,
            };
            rows.push(mk(lb.clone(), la.clone(), RowKind::Ge, -(la * lb)));
            rows.push(mk(ub.clone(), ua.clone(), RowKind::Ge, -(ua * ub)));
            rows.push(mk(lb.clone(), ua.clone(), RowKind::Le, -(ua * lb)));
            rows.push(mk(ub.clone(), la.clone(), RowKind::Le, -(la * ub)));
        }
        let mut objective = vec![Rational::zero(); self.ncols()];
        for (j, c) in &self.objective.terms {
            objective[*j] += c;
        }
        let lp = Lp {
            lower: iv.iter().map(|i| i.0.clone()).collect(),
            upper: iv.iter().map(|i| i.1.clone()).collect(),
            objective,
            rows,
        };
        (lp, iv)
    }

    /// Lower bound and column values at the relaxation optimum.
    pub fn relax(&self, bx: &[Interval], config: &SolverConfig) -> Option<(Rational, Vec<Rational>)> {
        let (lp, _) = self.base_lp(bx);
        match &self.denominator {
            None => match super::simplex::solve(&lp) {
                LpResult::Optimal { value, x } => Some((value + &self.objective.constant, x)),
                LpResult::Infeasible => None,
            },
            Some((den, _)) => self.charnes_cooper(&lp, den, config),
        }
    }

    /// Scaled program over `(t·v, t)` with `den(v)·t = 1` and `t <= T`.
    fn charnes_cooper(&self, lp: &Lp, den: &LinForm, config: &SolverConfig) -> Option<(Rational, Vec<Rational>)> {
        let nc = lp.lower.len();
        let t = nc;
        let cap = &config.scale_cap;
        let mut rows = Vec::new();
        for r in &lp.rows {
            let mut coeffs = r.coeffs.clone();
            coeffs.push((t, -r.rhs.clone()));
            rows.push(LpRow { coeffs: merge(coeffs), kind: r.kind, rhs: Rational::zero() });
        }
        for j in 0..nc {
            rows.push(LpRow {
                coeffs: vec![(j, Rational::one()), (t, -lp.lower[j].clone())],
                kind: RowKind::Ge,
                rhs: Rational::zero(),
            });
            rows.push(LpRow {
                coeffs: vec![(j, Rational::one()), (t, -lp.upper[j].clone())],
                kind: RowKind::Le,
                rhs: Rational::zero(),
            });
        }
        let mut dcoeffs = den.terms.clone();
        dcoeffs.push((t, den.constant.clone()));
        rows.push(LpRow { coeffs: merge(dcoeffs), kind: RowKind::Eq, rhs: Rational::one() });
        let zero = Rational::zero();
        let mut lower: Vec<Rational> = lp.lower.iter().map(|l| crate::rational::min(&zero, &(l * cap))).collect();
        let mut upper: Vec<Rational> = lp.upper.iter().map(|u| crate::rational::max(&zero, &(u * cap))).collect();
        lower.push(Rational::zero());
        upper.push(cap.clone());
        let mut objective = lp.objective.clone();
        objective.push(self.objective.constant.clone());
        let scaled = Lp { lower, upper, objective, rows };
        match super::simplex::solve(&scaled) {
            LpResult::Optimal { value, x } => {
                let tv = x[t].clone();
                if !tv.is_positive() {
                    return None;
                }
                let cols = x[..nc].iter().map(|v| v / &tv).collect();
                Some((value, cols))
            }
            LpResult::Infeasible => None,
        }
    }
}

fn merge(coeffs: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    let mut out: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
    for (j, c) in coeffs {
        if let Some(e) = out.iter_mut().find(|e| e.0 == j) {
            e.1 += c;
        } else {
            out.push((j, c));
        }
    }
    out.retain(|e| !e.1.is_zero());
    out
}

pub(crate) fn mul(a: &Interval, b: &Interval) -> Interval {
    let cands = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let lo = cands.iter().min().expect("four").clone();
    let hi = cands.iter().max().expect("four").clone();
    (lo, hi)
}

pub(crate) fn square(a: &Interval) -> Interval {
    let (l2, u2) = (&a.0 * &a.0, &a.1 * &a.1);
    let hi = crate::rational::max(&l2, &u2);
    if a.0.is_negative() && a.1.is_positive() {
        (Rational::zero(), hi)
    } else {
        (crate::rational::min(&l2, &u2), hi)
    }
}

pub(crate) fn pow(a: &Interval, e: u32) -> Interval {
    match e {
        0 => (Rational::one(), Rational::one()),
        1 => a.clone(),
        _ if e % 2 == 0 => {
            let s = square(a);
            pow(&s, e / 2)
        }
        _ => {
            let rest = pow(a, e - 1);
            mul(a, &rest)
        }
    }
}
