//! Exact rational primal simplex over box-bounded columns.
//!
//! Every column carries finite bounds, so each program is either infeasible
//! or has an optimal vertex. Inequality rows get bounded slacks; rows that
//! the starting point violates get artificials for phase one. Bland's rule
//! picks entering and leaving columns, which rules out cycling.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub kind: RowKind,
    pub rhs: Rational,
}

/// `min objective · x` subject to rows and `lower <= x <= upper`.
#[derive(Debug, Clone)]
pub struct Lp {
    pub lower: Vec<Rational>,
    pub upper: Vec<Rational>,
    pub objective: Vec<Rational>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
}

struct Tableau {
    /// Row-major `B⁻¹ [A | S | R]`.
    t: Vec<Vec<Rational>>,
    beta: Vec<Rational>,
    basic: Vec<usize>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    lower: Vec<Rational>,
    upper: Vec<Rational>,
}

impl Tableau {
    fn value_of_nonbasic(&self, j: usize) -> &Rational {
        if self.at_upper[j] {
            &self.upper[j]
        } else {
            &self.lower[j]
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.t[r][j].clone();
        if !piv.is_one() {
            let inv = Rational::one() / &piv;
            for v in self.t[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = self.t[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&k| !pivot_row[k].is_zero()).collect();
        for i in 0..self.t.len() {
            if i == r {
                continue;
            }
            let f = self.t[i][j].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.t[i];
            for &k in &nz {
                let delta = &f * &pivot_row[k];
                row[k] -= delta;
            }
        }
        let leaving = self.basic[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basic[r] = j;
    }

    /// Reduced costs `c_j - c_B · column_j`.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for (i, &b) in self.basic.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (k, v) in self.t[i].iter().enumerate() {
                if !v.is_zero() {
                    d[k] -= cb * v;
                }
            }
        }
        d
    }

    /// Runs primal iterations until no improving column remains.
    fn optimize(&mut self, cost: &[Rational]) {
        let mut d = self.reduced_costs(cost);
        let ncols = d.len();
        loop {
            let entering = (0..ncols).find(|&j| {
                !self.is_basic[j]
                    && self.lower[j] < self.upper[j]
                    && ((!self.at_upper[j] && d[j].is_negative()) || (self.at_upper[j] && d[j].is_positive()))
            });
            let j = match entering {
                Some(j) => j,
                None => return,
            };
            let sigma_up = !self.at_upper[j];
            let mut best = &self.upper[j] - &self.lower[j];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.t.len() {
                let alpha = &self.t[i][j];
                if alpha.is_zero() {
                    continue;
                }
                // x_B changes by -alpha per unit increase of x_j.
                let decreasing = alpha.is_positive() == sigma_up;
                let b = self.basic[i];
                let (limit, hits_upper) = if decreasing {
                    ((&self.beta[i] - &self.lower[b]) / alpha.abs(), false)
                } else {
                    ((&self.upper[b] - &self.beta[i]) / alpha.abs(), true)
                };
                let better = match &leave {
                    _ if limit < best => true,
                    Some((r, _)) if limit == best => b < self.basic[*r],
                    _ => false,
                };
                if better {
                    best = limit;
                    leave = Some((i, hits_upper));
                }
            }
            let theta = best;
            let step = if sigma_up { theta.clone() } else { -theta.clone() };
            if !step.is_zero() {
                for i in 0..self.t.len() {
                    let alpha = &self.t[i][j];
                    if !alpha.is_zero() {
                        let delta = alpha * &step;
                        self.beta[i] -= delta;
                    }
                }
            }
            match leave {
                None => {
                    self.at_upper[j] = !self.at_upper[j];
                }
                Some((r, hits_upper)) => {
                    let entering_value = self.value_of_nonbasic(j) + &step;
                    let leaving = self.basic[r];
                    self.pivot(r, j);
                    self.at_upper[leaving] = hits_upper;
                    self.beta[r] = entering_value;
                    let dj = d[j].clone();
                    if !dj.is_zero() {
                        for (k, v) in self.t[r].iter().enumerate() {
                            if !v.is_zero() {
                                d[k] -= &dj * v;
                            }
                        }
                    }
                }
            }
        }
    }
}

pub fn solve(lp: &Lp) -> LpResult {
    let n = lp.lower.len();
    debug_assert_eq!(lp.upper.len(), n);
    for j in 0..n {
        if lp.lower[j] > lp.upper[j] {
            return LpResult::Infeasible;
        }
    }

    // Slack bounds come from the row activity range over the box.
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut slack_of_row: Vec<Option<(usize, Rational)>> = Vec::with_capacity(lp.rows.len());
    for row in &lp.rows {
        let (mut lo, mut hi) = (Rational::zero(), Rational::zero());
        for (j, c) in &row.coeffs {
            if c.is_positive() {
                lo += c * &lp.lower[*j];
                hi += c * &lp.upper[*j];
            } else {
                lo += c * &lp.upper[*j];
                hi += c * &lp.lower[*j];
            }
        }
        match row.kind {
            RowKind::Eq => {
                if row.rhs < lo || row.rhs > hi {
                    return LpResult::Infeasible;
                }
                slack_of_row.push(None);
            }
            RowKind::Ge => {
                // a·x - s = rhs, s in [0, hi - rhs]
                if hi < row.rhs {
                    return LpResult::Infeasible;
                }
                let idx = lower.len();
                lower.push(Rational::zero());
                upper.push(&hi - &row.rhs);
                slack_of_row.push(Some((idx, -Rational::one())));
            }
            RowKind::Le => {
                // a·x + s = rhs, s in [0, rhs - lo]
                if lo > row.rhs {
                    return LpResult::Infeasible;
                }
                let idx = lower.len();
                lower.push(Rational::zero());
                upper.push(&row.rhs - &lo);
                slack_of_row.push(Some((idx, Rational::one())));
            }
        }
    }
    let m = lp.rows.len();
    let n_with_slacks = lower.len();

    // Starting point: every structural column at its lower bound.
    let mut residual = Vec::with_capacity(m);
    for row in &lp.rows {
        let mut r = row.rhs.clone();
        for (j, c) in &row.coeffs {
            r -= c * &lower[*j];
        }
        residual.push(r);
    }

    // Slack-dense rows; a slack starts basic when its row is satisfied.
    let mut artificial_rows = Vec::new();
    let mut basic = vec![usize::MAX; m];
    let mut beta = vec![Rational::zero(); m];
    for i in 0..m {
        if let Some((s, sign)) = &slack_of_row[i] {
            // row: a·x + sign·s = rhs  =>  s = residual / sign
            let value = &residual[i] / sign;
            if !value.is_negative() && value <= upper[*s] {
                basic[i] = *s;
                beta[i] = value;
                continue;
            }
        }
        artificial_rows.push(i);
    }
    let n_total = n_with_slacks + artificial_rows.len();
    for (k, &i) in artificial_rows.iter().enumerate() {
        let a = n_with_slacks + k;
        lower.push(Rational::zero());
        upper.push(residual[i].abs());
        basic[i] = a;
        beta[i] = residual[i].abs();
    }

    let mut t = vec![vec![Rational::zero(); n_total]; m];
    for (i, row) in lp.rows.iter().enumerate() {
        for (j, c) in &row.coeffs {
            t[i][*j] += c.clone();
        }
        if let Some((s, sign)) = &slack_of_row[i] {
            t[i][*s] = sign.clone();
        }
    }
    for (k, &i) in artificial_rows.iter().enumerate() {
        let a = n_with_slacks + k;
        let sign = if residual[i].is_negative() { -Rational::one() } else { Rational::one() };
        t[i][a] = sign;
    }
    // Express every row in terms of its basic column.
    for i in 0..m {
        let b = basic[i];
        let piv = t[i][b].clone();
        if !piv.is_one() {
            let inv = Rational::one() / &piv;
            for v in t[i].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
    }
    let mut is_basic = vec![false; n_total];
    for &b in &basic {
        is_basic[b] = true;
    }
    let mut tab = Tableau {
        t,
        beta,
        basic,
        at_upper: vec![false; n_total],
        is_basic,
        lower,
        upper,
    };

    if !artificial_rows.is_empty() {
        let mut phase1 = vec![Rational::zero(); n_total];
        for c in phase1.iter_mut().skip(n_with_slacks) {
            *c = Rational::one();
        }
        tab.optimize(&phase1);
        let infeasibility: Rational = tab
            .basic
            .iter()
            .zip(&tab.beta)
            .filter(|(b, _)| **b >= n_with_slacks)
            .map(|(_, v)| v.clone())
            .sum();
        let nonbasic_art: Rational = (n_with_slacks..n_total)
            .filter(|&j| !tab.is_basic[j])
            .map(|j| tab.value_of_nonbasic(j).clone())
            .sum();
        if !(infeasibility + nonbasic_art).is_zero() {
            return LpResult::Infeasible;
        }
        for j in n_with_slacks..n_total {
            tab.upper[j] = Rational::zero();
            tab.at_upper[j] = false;
        }
    }

    let mut cost = vec![Rational::zero(); n_total];
    cost[..n].clone_from_slice(&lp.objective);
    tab.optimize(&cost);

    let mut x: Vec<Rational> = (0..n).map(|j| tab.value_of_nonbasic(j).clone()).collect();
    for (i, &b) in tab.basic.iter().enumerate() {
        if b < n {
            x[b] = tab.beta[i].clone();
        }
    }
    let value = x.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
    LpResult::Optimal { value, x }
}
