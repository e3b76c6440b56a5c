//! Feasibility-based bound tightening by interval propagation.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::relax::{mul, pow, Compiled, IPoly, Interval, RowRel};
use crate::rational::Rational;

const PASSES: usize = 4;
/// Bounds whose denominators pass this many bits are rounded outward.
const MAX_DENOM_BITS: u64 = 96;

fn term_interval(exps: &[u32], c: &Rational, bx: &[Interval], skip: Option<usize>) -> Interval {
    let mut iv = (c.clone(), c.clone());
    for (i, &e) in exps.iter().enumerate() {
        let e = if Some(i) == skip { e - 1 } else { e };
        if e > 0 {
            iv = mul(&iv, &pow(&bx[i], e));
        }
    }
    iv
}

fn add(a: &Interval, b: &Interval) -> Interval {
    (&a.0 + &b.0, &a.1 + &b.1)
}

/// `{x : x·o ∈ target}` for an `o` range excluding zero; `None` means unbounded.
fn divide(target: (Option<Rational>, Option<Rational>), o: &Interval) -> (Option<Rational>, Option<Rational>) {
    if o.1.is_negative() {
        let neg_t = (target.1.map(|v| -v), target.0.map(|v| -v));
        let neg_o = (-o.1.clone(), -o.0.clone());
        let (lo, hi) = divide(neg_t, &neg_o);
        return (lo, hi);
    }
    // o strictly positive
    let lo = target.0.map(|t| if t.is_negative() { &t / &o.0 } else { &t / &o.1 });
    let hi = target.1.map(|t| if t.is_negative() { &t / &o.1 } else { &t / &o.0 });
    (lo, hi)
}

fn round_down(r: Rational) -> Rational {
    if r.denom().bits() <= MAX_DENOM_BITS {
        return r;
    }
    let scale: BigInt = BigInt::one() << 64usize;
    let scaled = (&r * Rational::from_integer(scale.clone())).floor();
    scaled / Rational::from_integer(scale)
}

fn round_up(r: Rational) -> Rational {
    if r.denom().bits() <= MAX_DENOM_BITS {
        return r;
    }
    let scale: BigInt = BigInt::one() << 64usize;
    let scaled = (&r * Rational::from_integer(scale.clone())).ceil();
    scaled / Rational::from_integer(scale)
}

/// Shrinks `bx` in place; returns false when some row cannot be met.
pub(crate) fn tighten(c: &Compiled, bx: &mut [Interval]) -> bool {
    for _ in 0..PASSES {
        let mut changed = false;
        for (poly, rel) in &c.row_polys {
            match tighten_row(c, poly, *rel, bx) {
                None => return false,
                Some(ch) => changed |= ch,
            }
        }
        if !changed {
            break;
        }
    }
    true
}

fn tighten_row(c: &Compiled, poly: &IPoly, rel: RowRel, bx: &mut [Interval]) -> Option<bool> {
    let terms: Vec<Interval> = poly.terms.iter().map(|(e, k)| term_interval(e, k, bx, None)).collect();
    let zero = (Rational::zero(), Rational::zero());
    let total = terms.iter().fold(zero.clone(), |a, t| add(&a, t));
    match rel {
        RowRel::Eq if total.0.is_positive() || total.1.is_negative() => return None,
        RowRel::Ge if total.1.is_negative() => return None,
        _ => {}
    }
    let mut changed = false;
    for (t, (exps, k)) in poly.terms.iter().enumerate() {
        for i in 0..exps.len() {
            if exps[i] != 1 || bx[i].0 == bx[i].1 {
                continue;
            }
            let rest = terms
                .iter()
                .enumerate()
                .filter(|(s, _)| *s != t)
                .fold(zero.clone(), |a, (_, iv)| add(&a, iv));
            let other = term_interval(exps, k, bx, Some(i));
            if !(other.0.is_positive() || other.1.is_negative()) {
                continue;
            }
            let target = match rel {
                RowRel::Eq => (Some(-rest.1.clone()), Some(-rest.0.clone())),
                RowRel::Ge => (Some(-rest.1.clone()), None),
            };
            let (lo, hi) = divide(target, &other);
            let (mut nlo, mut nhi) = bx[i].clone();
            if let Some(lo) = lo {
                let mut lo = round_down(lo);
                if c.integer[i] {
                    lo = lo.ceil();
                }
                if lo > nlo {
                    nlo = lo;
                }
            }
            if let Some(hi) = hi {
                let mut hi = round_up(hi);
                if c.integer[i] {
                    hi = hi.floor();
                }
                if hi < nhi {
                    nhi = hi;
                }
            }
            if nlo > nhi {
                return None;
            }
            if (nlo.clone(), nhi.clone()) != bx[i] {
                bx[i] = (nlo, nhi);
                changed = true;
            }
        }
    }
    Some(changed)
}
