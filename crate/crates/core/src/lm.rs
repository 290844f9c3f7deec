//! Small dense Levenberg–Marquardt least-squares solver.
//!
//! Deterministic: forward-difference Jacobian, damped normal equations
//! solved by Gaussian elimination with partial pivoting, box constraints by
//! projection. Problem sizes here are a handful of parameters against a few
//! thousand residuals, so no sparsity or QR machinery is needed.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmConfig {
    pub max_iter: usize,
    /// Relative cost-decrease convergence threshold.
    pub ftol: f64,
    /// Relative step-size convergence threshold.
    pub xtol: f64,
    pub lambda_init: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { max_iter: 200, ftol: 1e-14, xtol: 1e-12, lambda_init: 1e-3, fd_step: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: Vec<f64>,
    /// Final cost ½ Σ r².
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solve A x = b in place (A is n×n row-major). Returns `None` for a
/// numerically singular system.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        // partial pivot
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col * n + c] * x[c];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Minimize ½‖r(x)‖² subject to `lower ≤ x ≤ upper`.
///
/// `residuals` fills `out` with the residual vector at `x`. The residual
/// length must not change between calls.
pub fn levenberg_marquardt<F>(
    mut residuals: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    cfg: &LmConfig,
) -> Result<LmResult>
where
    F: FnMut(&[f64], &mut Vec<f64>),
{
    let np = x0.len();
    assert_eq!(lower.len(), np);
    assert_eq!(upper.len(), np);
    let clamp = |x: &mut [f64]| {
        for i in 0..np {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);

    let mut r = Vec::new();
    residuals(&x, &mut r);
    let nr = r.len();
    if nr < np {
        return Err(Error::Invalid(format!(
            "underdetermined fit: {nr} residuals for {np} parameters"
        )));
    }
    let mut cost = cost_of(&r);
    let mut lambda = cfg.lambda_init;
    let mut jac = vec![0.0; nr * np];
    let mut r_pert = Vec::new();
    let mut converged = false;
    let mut iter = 0;

    while iter < cfg.max_iter {
        iter += 1;
        // forward-difference Jacobian
        for p in 0..np {
            let h = cfg.fd_step * x[p].abs().max(cfg.fd_step);
            let mut xp = x.clone();
            xp[p] = (xp[p] + h).min(upper[p]);
            let h_actual = xp[p] - x[p];
            if h_actual == 0.0 {
                // at the upper bound; step backwards
                xp[p] = (x[p] - h).max(lower[p]);
            }
            let hh = xp[p] - x[p];
            residuals(&xp, &mut r_pert);
            for i in 0..nr {
                jac[i * np + p] = if hh != 0.0 { (r_pert[i] - r[i]) / hh } else { 0.0 };
            }
        }
        // normal equations
        let mut jtj = vec![0.0; np * np];
        let mut jtr = vec![0.0; np];
        for i in 0..nr {
            for p in 0..np {
                let jip = jac[i * np + p];
                jtr[p] += jip * r[i];
                for q in p..np {
                    jtj[p * np + q] += jip * jac[i * np + q];
                }
            }
        }
        for p in 0..np {
            for q in 0..p {
                jtj[p * np + q] = jtj[q * np + p];
            }
        }

        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for p in 0..np {
                a[p * np + p] += lambda * jtj[p * np + p].max(1e-30);
            }
            let b: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(step) = solve_dense(a, b, np) else {
                lambda *= 10.0;
                continue;
            };
            let mut x_new = x.clone();
            for p in 0..np {
                x_new[p] += step[p];
            }
            clamp(&mut x_new);
            residuals(&x_new, &mut r_pert);
            let cost_new = cost_of(&r_pert);
            if cost_new.is_finite() && cost_new < cost {
                let step_norm: f64 = x_new
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let x_norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let rel_decrease = (cost - cost_new) / cost.max(1e-300);
                x = x_new;
                std::mem::swap(&mut r, &mut r_pert);
                cost = cost_new;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel_decrease < cfg.ftol || step_norm <= cfg.xtol * (1.0 + x_norm) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break;
            }
        }
        if converged {
            break;
        }
        if !improved {
            // stuck: treat a stalled search with tiny gradient as converged
            let gnorm: f64 = jtr.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm <= 1e-10 * (1.0 + cost) {
                converged = true;
            }
            break;
        }
    }

    if !converged && iter >= cfg.max_iter {
        return Err(Error::NoConvergence(iter));
    }
    Ok(LmResult { params: x, cost, iterations: iter, converged: true })
}
