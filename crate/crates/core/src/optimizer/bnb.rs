//! Best-first spatial branch-and-bound with integer branching.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_traits::{One, Signed, Zero};

use super::interval::tighten;
use super::relax::{Compiled, Interval, RowRel};
use super::repair::project;
use super::{Direction, Objective, OptError, Program, SolveOutcome, SolverConfig, Witness};
use crate::polynomial::Polynomial;
use crate::rational::{approximate, from_f64, to_f64, Rational};

struct Node {
    lb: Option<Rational>,
    id: usize,
    bx: Vec<Interval>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl Ord for Node {
    // BinaryHeap pops the greatest: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        let by_lb = match (&self.lb, &other.lb) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) => b.cmp(a),
        };
        by_lb.then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

enum Run {
    Optimal(Rational, Vec<Rational>),
    Infeasible,
    Unbounded,
}

pub(crate) fn solve(program: &Program, config: &SolverConfig) -> Result<SolveOutcome, OptError> {
    let maximize = program.direction == Direction::Maximize;
    let result = match &program.objective {
        Objective::Polynomial(p) => {
            let f = if maximize { -p } else { p.clone() };
            let c = Compiled::new(program, &f, None, config);
            map_run(&c, run(&c, config)?, maximize)
        }
        Objective::Fractional(q) => {
            let f = if maximize { -&q.numerator } else { q.numerator.clone() };
            let h = q.denominator.clone();
            let mut best: Option<SolveOutcome> = None;
            // Positive and negative denominator regions are solved separately.
            for (num, den) in [(f.clone(), h.clone()), (-&f, -&h)] {
                let c = Compiled::new(program, &num, Some(&den), config);
                if !denominator_can_be_positive(&c, &den) {
                    continue;
                }
                let outcome = map_run(&c, run(&c, config)?, maximize);
                best = Some(match (best, outcome) {
                    (None, o) => o,
                    (Some(SolveOutcome::Unbounded), _) | (_, SolveOutcome::Unbounded) => SolveOutcome::Unbounded,
                    (Some(SolveOutcome::Infeasible), o) => o,
                    (Some(o), SolveOutcome::Infeasible) => o,
                    (Some(a), b) => {
                        let (va, vb) = (a.value().cloned().expect("optimal"), b.value().cloned().expect("optimal"));
                        let a_better = if maximize { va >= vb } else { va <= vb };
                        if a_better {
                            a
                        } else {
                            b
                        }
                    }
                });
            }
            best.unwrap_or(SolveOutcome::Infeasible)
        }
    };
    Ok(result)
}

fn denominator_can_be_positive(c: &Compiled, den: &Polynomial) -> bool {
    let (_, ip) = c.denominator.as_ref().expect("quotient");
    let _ = den;
    let mut hi = Rational::zero();
    for (exps, k) in &ip.terms {
        let mut iv = (k.clone(), k.clone());
        for (i, &e) in exps.iter().enumerate() {
            if e > 0 {
                iv = super::relax::mul(&iv, &super::relax::pow(&c.root[i], e));
            }
        }
        hi += iv.1;
    }
    hi.is_positive()
}

fn map_run(c: &Compiled, r: Run, maximize: bool) -> SolveOutcome {
    match r {
        Run::Infeasible => SolveOutcome::Infeasible,
        Run::Unbounded => SolveOutcome::Unbounded,
        Run::Optimal(value, x) => {
            let witness: Witness = c.names.iter().cloned().zip(x).collect();
            SolveOutcome::Optimal { value: if maximize { -value } else { value }, witness }
        }
    }
}

/// Objective value at an exactly checked candidate, if it is feasible.
fn evaluate(c: &Compiled, x: &[Rational], config: &SolverConfig) -> Option<Rational> {
    let tol = &config.feasibility_tolerance;
    for (i, xi) in x.iter().enumerate() {
        if xi < &(&c.root[i].0 - tol) || xi > &(&c.root[i].1 + tol) {
            return None;
        }
        if c.integer[i] && !xi.is_integer() {
            return None;
        }
    }
    for (poly, rel) in &c.row_polys {
        let g = poly.eval(x);
        let ok = match rel {
            RowRel::Eq => &g.abs() <= tol,
            RowRel::Ge => g >= -tol.clone(),
        };
        if !ok {
            return None;
        }
    }
    let f = c.obj_poly.eval(x);
    match &c.denominator {
        None => Some(f),
        Some((_, h)) => {
            let hv = h.eval(x);
            if hv.is_positive() {
                Some(f / hv)
            } else {
                None
            }
        }
    }
}

fn snap(v: f64) -> Option<Rational> {
    if let Some(r) = approximate(v, 1_000_000) {
        if (to_f64(&r) - v).abs() <= 1e-12 {
            return Some(r);
        }
    }
    from_f64(v)
}

fn candidates(c: &Compiled, cols: &[Rational], bx: &[Interval], config: &SolverConfig) -> Option<(Rational, Vec<Rational>)> {
    let n = c.n();
    let mut x: Vec<Rational> = cols[..n].to_vec();
    for i in 0..n {
        if c.integer[i] {
            x[i] = x[i].round().max(bx[i].0.clone()).min(bx[i].1.clone());
        }
    }
    let mut best: Option<(Rational, Vec<Rational>)> = evaluate(c, &x, config).map(|v| (v, x.clone()));
    let exact_enough = best.is_some();
    if !exact_enough {
        let xf: Vec<f64> = x.iter().map(to_f64).collect();
        let bf: Vec<(f64, f64)> = bx.iter().map(|(a, b)| (to_f64(a), to_f64(b))).collect();
        if let Some(p) = project(c, &xf, &bf) {
            let exact: Option<Vec<Rational>> = p
                .iter()
                .enumerate()
                .map(|(i, v)| if c.integer[i] { Some(x[i].clone()) } else { snap(*v) })
                .collect();
            if let Some(xr) = exact {
                let xr: Vec<Rational> = xr
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| v.max(bx[i].0.clone()).min(bx[i].1.clone()))
                    .collect();
                if let Some(v) = evaluate(c, &xr, config) {
                    best = Some((v, xr));
                }
            }
        }
    }
    best
}

fn branch(c: &Compiled, bx: &[Interval], cols: &[Rational]) -> Vec<Vec<Interval>> {
    let n = c.n();
    let split_int = |i: usize, at: Rational| -> Vec<Vec<Interval>> {
        let f = at.floor();
        let mut left = bx.to_vec();
        let mut right = bx.to_vec();
        left[i].1 = f.clone();
        right[i].0 = f + Rational::one();
        vec![left, right]
    };
    for i in 0..n {
        if c.integer[i] && !cols[i].is_integer() {
            return split_int(i, cols[i].clone());
        }
    }
    let x = &cols[..n];
    let mut best: Option<(Rational, usize)> = None;
    for k in 0..c.lifted.len() {
        let viol = (&cols[n + k] - c.monomial_value(k, x)).abs();
        if viol.is_zero() {
            continue;
        }
        if best.as_ref().map_or(true, |(b, _)| viol > *b) {
            best = Some((viol, k));
        }
    }
    let (_, k) = match best {
        Some(b) => b,
        None => return Vec::new(),
    };
    let mut pick: Option<(Rational, usize)> = None;
    for (i, &e) in c.lifted[k].exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let w = &bx[i].1 - &bx[i].0;
        if w.is_positive() && pick.as_ref().map_or(true, |(pw, _)| w > *pw) {
            pick = Some((w, i));
        }
    }
    let i = match pick {
        Some((_, i)) => i,
        None => return Vec::new(),
    };
    let mid = (&bx[i].0 + &bx[i].1) / Rational::from_integer(2.into());
    if c.integer[i] {
        return split_int(i, mid);
    }
    let mut left = bx.to_vec();
    let mut right = bx.to_vec();
    left[i].1 = mid.clone();
    right[i].0 = mid;
    vec![left, right]
}

fn run(c: &Compiled, config: &SolverConfig) -> Result<Run, OptError> {
    for (lo, hi) in &c.root {
        if lo > hi {
            return Ok(Run::Infeasible);
        }
    }
    let fractional = c.denominator.is_some();
    let unbounded_below = -config.unbounded_threshold.clone();
    let mut heap = BinaryHeap::new();
    heap.push(Node { lb: None, id: 0, bx: c.root.clone() });
    let mut next_id = 1;
    let mut incumbent: Option<(Rational, Vec<Rational>)> = None;
    let mut processed = 0usize;
    while let Some(node) = heap.pop() {
        if let (Some((inc, _)), Some(lb)) = (&incumbent, &node.lb) {
            if lb >= &(inc - &config.gap) {
                break;
            }
        }
        processed += 1;
        if processed > config.max_nodes {
            return Err(OptError::NodeLimit(config.max_nodes));
        }
        let mut bx = node.bx;
        if !tighten(c, &mut bx) {
            continue;
        }
        let (lb, cols) = match c.relax(&bx, config) {
            Some(r) => r,
            None => continue,
        };
        if let Some((inc, _)) = &incumbent {
            if lb >= inc - &config.gap {
                continue;
            }
        }
        if let Some((v, x)) = candidates(c, &cols, &bx, config) {
            if incumbent.as_ref().map_or(true, |(inc, _)| v < *inc) {
                incumbent = Some((v, x));
            }
        }
        if let Some((inc, _)) = &incumbent {
            if fractional && inc < &unbounded_below {
                return Ok(Run::Unbounded);
            }
            if inc - &lb <= config.gap {
                continue;
            }
        }
        for child in branch(c, &bx, &cols) {
            heap.push(Node { lb: Some(lb.clone()), id: next_id, bx: child });
            next_id += 1;
        }
    }
    Ok(match incumbent {
        Some((v, x)) => Run::Optimal(v, x),
        None => Run::Infeasible,
    })
}
