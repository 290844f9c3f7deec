//! Fourier quadrature for piecewise-uniform time series.
//!
//! Output spectra need fine frequency resolution around the nuclear line
//! together with the broad bandwidth of the femtosecond drive, so instead of
//! one zero-padded FFT over a single uniform grid the transform is evaluated
//! as a trapezoidal quadrature of ∫ f(t) e^{iωt} dt directly on the requested
//! frequency grid. For a signal that has decayed at the end of the window
//! this is the continuum limit of zero padding; the sign convention makes a
//! decaying oscillation e^{−iω₀t−Γt} peak at ω = ω₀.

use num_complex::Complex64 as C64;

/// F(ω_k) = ∫ f(t) e^{iω_k t} dt by the trapezoidal rule on an arbitrary
/// (possibly nonuniform) strictly increasing time grid.
pub fn fourier_quadrature(times: &[f64], values: &[C64], omegas: &[f64]) -> Vec<C64> {
    assert_eq!(times.len(), values.len());
    // trapezoid weights
    let n = times.len();
    let mut weights = vec![0.0; n];
    for i in 0..n - 1 {
        let h = times[i + 1] - times[i];
        weights[i] += 0.5 * h;
        weights[i + 1] += 0.5 * h;
    }
    omegas
        .iter()
        .map(|&w| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                if values[i].norm_sqr() == 0.0 {
                    continue;
                }
                let phase = C64::new(0.0, w * times[i]).exp();
                acc += weights[i] * values[i] * phase;
            }
            acc
        })
        .collect()
}

/// Uniform symmetric frequency grid of `n` points spanning ±`half_span`.
pub fn symmetric_grid(half_span: f64, n: usize) -> Vec<f64> {
    let n = n.max(3) | 1; // odd so zero detuning is a grid point
    (0..n)
        .map(|i| -half_span + 2.0 * half_span * i as f64 / (n - 1) as f64)
        .collect()
}
