//! Floating-point projection of a relaxation point onto the constraints.
//!
//! Gauss-Newton steps on the active residuals, clamped to the node box. The
//! result is only a proposal; the caller re-checks it in exact arithmetic.

use nalgebra::{DMatrix, DVector};

use super::relax::{Compiled, RowRel};

const ITERATIONS: usize = 40;
const TARGET: f64 = 1e-13;

pub(crate) fn project(c: &Compiled, start: &[f64], bx: &[(f64, f64)]) -> Option<Vec<f64>> {
    let n = start.len();
    let free: Vec<usize> = (0..n).filter(|&i| !c.integer[i] && bx[i].1 > bx[i].0).collect();
    let mut x = start.to_vec();
    for i in 0..n {
        x[i] = x[i].clamp(bx[i].0, bx[i].1);
    }
    for _ in 0..ITERATIONS {
        let mut res = Vec::new();
        let mut jac: Vec<Vec<f64>> = Vec::new();
        let mut worst: f64 = 0.0;
        for (poly, rel) in &c.row_polys {
            let g = poly.eval_f64(&x);
            let active = match rel {
                RowRel::Eq => true,
                RowRel::Ge => g < 0.0,
            };
            if !active {
                continue;
            }
            worst = worst.max(g.abs());
            let grad = poly.grad_f64(&x);
            res.push(g);
            jac.push(free.iter().map(|&i| grad[i]).collect());
        }
        if worst <= TARGET {
            return Some(x);
        }
        if free.is_empty() {
            return None;
        }
        let m = res.len();
        let j = DMatrix::from_fn(m, free.len(), |r, k| jac[r][k]);
        let r = DVector::from_vec(res);
        let jjt = &j * j.transpose() + DMatrix::identity(m, m) * 1e-14;
        let lambda = jjt.lu().solve(&r)?;
        let dx = j.transpose() * lambda;
        let mut moved = 0.0f64;
        for (k, &i) in free.iter().enumerate() {
            let nx = (x[i] - dx[k]).clamp(bx[i].0, bx[i].1);
            moved = moved.max((nx - x[i]).abs());
            x[i] = nx;
        }
        if moved < 1e-16 {
            return None;
        }
    }
    None
}
