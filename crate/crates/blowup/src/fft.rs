//! Thin wrappers around `rustfft` for real-valued grid functions.
//!
//! Fields store their spectral companion as the plain (unnormalized)
//! complex DFT of the sample values; `inverse` divides by `n`.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Unnormalized forward DFT of real samples.
pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(values.len(), FftDirection::Forward).process(&mut buf);
    buf
}

/// Inverse DFT returning the real parts, normalized by `1/n`.
pub fn inverse(spectrum: &[Complex64]) -> Vec<f64> {
    let n = spectrum.len();
    let mut buf = spectrum.to_vec();
    plan(n, FftDirection::Inverse).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Signed integer wavenumber for DFT bin `j` of an `n`-point transform:
/// `0, 1, ..., n/2, -(n/2 - 1), ..., -1`. The Nyquist bin is reported as
/// `n/2`; callers that need conjugate symmetry zero it explicitly.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_recovers_input() {
        let values: Vec<f64> = (0..64).map(|j| (j as f64 * 0.37).sin() + 0.2).collect();
        let back = inverse(&forward(&values));
        for (a, b) in values.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn wavenumber_layout() {
        assert_eq!(wavenumber(0, 8), 0);
        assert_eq!(wavenumber(3, 8), 3);
        assert_eq!(wavenumber(4, 8), 4);
        assert_eq!(wavenumber(5, 8), -3);
        assert_eq!(wavenumber(7, 8), -1);
    }
}
