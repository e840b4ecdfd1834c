use super::factor_block;
use crate::assembly::GlobalSystem;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

const RESTART: usize = 50;

/// Restarted GMRES, right-preconditioned by the inverse diagonal blocks.
/// Stops once `‖b − A x‖ ≤ tol ‖b‖`; more than `max_iter` inner iterations
/// is a failure. Returns the solution and the iteration count.
pub fn solve_iterative(
    system: &GlobalSystem,
    tol: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, usize)> {
    let nb = system.block_size;
    let n = system.n_dofs();
    let lus = (0..system.n_elements)
        .map(|e| factor_block(system.block(e, e).expect("diagonal block present"), e))
        .collect::<Result<Vec<_>>>()?;
    let precond = |v: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(n);
        for (e, lu) in lus.iter().enumerate() {
            let y = lu
                .solve(&v.rows(e * nb, nb).into_owned())
                .expect("factor checked");
            out.rows_mut(e * nb, nb).copy_from(&y);
        }
        out
    };
    let bnorm = system.rhs.norm();
    let mut x = DVector::zeros(n);
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let target = tol * bnorm;
    let mut iters = 0;
    loop {
        let r = &system.rhs - system.matvec(&x);
        let beta = r.norm();
        if beta <= target {
            return Ok((x, iters));
        }
        if iters >= max_iter {
            return Err(Error::NoConvergence {
                iterations: iters,
                residual: beta / bnorm,
            });
        }
        let m = RESTART.min(max_iter - iters).max(1);
        let mut v: Vec<DVector<f64>> = vec![r / beta];
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = DVector::<f64>::zeros(m + 1);
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut w = system.matvec(&precond(&v[k]));
            for (i, vi) in v.iter().enumerate() {
                h[(i, k)] = w.dot(vi);
                w -= vi * h[(i, k)];
            }
            h[(k + 1, k)] = w.norm();
            for i in 0..k {
                let t = cs[i] * h[(i, k)] + sn[i] * h[(i + 1, k)];
                h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
                h[(i, k)] = t;
            }
            let den = h[(k, k)].hypot(h[(k + 1, k)]);
            cs[k] = h[(k, k)] / den;
            sn[k] = h[(k + 1, k)] / den;
            h[(k, k)] = den;
            h[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iters += 1;
            k_used = k + 1;
            let hk = w.norm();
            if g[k + 1].abs() <= 0.5 * target || hk == 0.0 {
                break;
            }
            v.push(w / hk);
        }
        // Back substitution on the triangular least-squares system.
        let mut y = DVector::<f64>::zeros(k_used);
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        let mut z = DVector::zeros(n);
        for (i, yi) in y.iter().enumerate() {
            z += &v[i] * *yi;
        }
        x += precond(&z);
    }
}
