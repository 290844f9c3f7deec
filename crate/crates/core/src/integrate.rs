//! Adaptive Dormand–Prince 4(5) integrator for complex matrix-valued ODEs.
//!
//! The integrator advances dense `Array2<Complex64>` states. Step-size
//! control uses the embedded 4th-order solution for the error estimate with
//! a mixed absolute/relative tolerance. Callers drive it through
//! [`Dopri45::advance_to`], which lands exactly on the requested time so
//! output samples need no interpolation.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th order weights (same as the last A row; FSAL scheme).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Embedded 4th order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step relative to the current time scale; going
    /// below this aborts with `StepUnderflow`.
    pub min_step: f64,
    pub max_step: f64,
    pub safety: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            min_step: 1e-14,
            max_step: f64::INFINITY,
            safety: 0.9,
        }
    }
}

pub struct Dopri45<'a> {
    rhs: Box<dyn Fn(f64, &Array2<C64>) -> Array2<C64> + 'a>,
    pub ctrl: StepControl,
    pub t: f64,
    pub y: Array2<C64>,
    h: f64,
    k0: Option<Array2<C64>>,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

impl<'a> Dopri45<'a> {
    pub fn new<F>(rhs: F, t0: f64, y0: Array2<C64>, h0: f64, ctrl: StepControl) -> Self
    where
        F: Fn(f64, &Array2<C64>) -> Array2<C64> + 'a,
    {
        Self {
            rhs: Box::new(rhs),
            ctrl,
            t: t0,
            y: y0,
            h: h0,
            k0: None,
            n_accepted: 0,
            n_rejected: 0,
        }
    }

    /// Weighted RMS error norm of the difference between the two embedded
    /// solutions.
    fn error_norm(&self, y_new: &Array2<C64>, err: &Array2<C64>) -> f64 {
        let mut sum = 0.0;
        let n = err.len() as f64;
        for ((e, y0), y1) in err.iter().zip(self.y.iter()).zip(y_new.iter()) {
            let scale = self.ctrl.atol + self.ctrl.rtol * y0.norm().max(y1.norm());
            let r = e.norm() / scale;
            sum += r * r;
        }
        (sum / n).sqrt()
    }

    /// Take adaptive steps until `t_end` is reached exactly. Invokes
    /// `on_accept` after every accepted step.
    pub fn advance_to<G>(&mut self, t_end: f64, mut on_accept: G) -> Result<()>
    where
        G: FnMut(f64, &Array2<C64>) -> Result<()>,
    {
        if t_end <= self.t {
            return Ok(());
        }
        let mut k: Vec<Array2<C64>> = Vec::with_capacity(7);
        while self.t < t_end {
            // t += (t_end - t) can round to one ulp below t_end, leaving a
            // gap no step can cross; snap instead of underflowing
            if t_end - self.t <= 4.0 * f64::EPSILON * t_end.abs().max(self.t.abs()) {
                self.t = t_end;
                break;
            }
            let h_prop = self.h.min(self.ctrl.max_step);
            let clipped = h_prop > t_end - self.t;
            let mut h = if clipped { t_end - self.t } else { h_prop };
            if !(h > 0.0) || h < self.ctrl.min_step * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            // FSAL: reuse the last stage of the previous accepted step.
            let k0 = match self.k0.take() {
                Some(k0) => k0,
                None => (self.rhs)(self.t, &self.y),
            };
            k.clear();
            k.push(k0);
            for i in 1..7 {
                let mut yi = self.y.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = A[i][j];
                    if a != 0.0 {
                        yi.zip_mut_with(kj, |y, kv| *y += C64::new(h * a, 0.0) * kv);
                    }
                }
                k.push((self.rhs)(self.t + C[i] * h, &yi));
            }
            let mut y5 = self.y.clone();
            let mut err = Array2::<C64>::zeros(self.y.raw_dim());
            for (i, ki) in k.iter().enumerate() {
                if B5[i] != 0.0 {
                    y5.zip_mut_with(ki, |y, kv| *y += C64::new(h * B5[i], 0.0) * kv);
                }
                let d = B5[i] - B4[i];
                if d != 0.0 {
                    err.zip_mut_with(ki, |e, kv| *e += C64::new(h * d, 0.0) * kv);
                }
            }
            let norm = self.error_norm(&y5, &err);
            if norm <= 1.0 {
                self.t += h;
                self.y = y5;
                self.k0 = Some(k.pop().expect("seven stages"));
                self.n_accepted += 1;
                on_accept(self.t, &self.y)?;
                let factor = if norm == 0.0 {
                    5.0
                } else {
                    (self.ctrl.safety * norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a step truncated only to land on t_end says nothing about
                // accuracy; keep the controller's own proposal in that case
                self.h = if clipped { h_prop } else { h * factor };
            } else {
                self.n_rejected += 1;
                self.k0 = Some(k[0].clone());
                let factor = if norm.is_finite() {
                    (self.ctrl.safety * norm.powf(-0.2)).clamp(0.1, 1.0)
                } else {
                    0.1
                };
                h *= factor;
                if h < self.ctrl.min_step * self.t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t: self.t, h });
                }
                self.h = h;
            }
        }
        Ok(())
    }
}
