//! Hilbert transform operators on both domain kinds, plus the weighted
//! bilinear functionals
//!
//! ```text
//!     lhs(f, phi) = integral phi * f * Hf
//!     rhs(f, phi) = (1/2pi) double-integral (phi(x)-phi(y))/(x-y) f(x) f(y)
//! ```
//!
//! (cotangent kernel on the circle). The two sides are computed by
//! independent quadratures and agreeing values are the working check of
//! the kernel identity behind the blow-up estimates.
//!
//! Conventions: on the line `Hf(x) = (1/pi) PV integral f(y)/(x-y) dy`;
//! on a circle of period `P` the kernel is `(1/P) cot(pi (x-y)/P)` and the
//! Fourier symbol is `-i sgn(k)`. The discrete line transform is the
//! alternating trapezoidal rule
//!
//! ```text
//!     Hf(x_i) = (1/pi) * sum_{(j-i) odd} f_j * 2h / (x_i - x_j),
//! ```
//!
//! which is spectrally accurate for smooth decaying data.

use crate::grid::{Field, Grid};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Spectral Hilbert transform on a periodic grid: multiplication of the
/// DFT by `-i sgn(k)` with the Nyquist mode zeroed.
pub fn hilbert_periodic(f: &Field) -> Result<Field> {
    let grid = f.grid();
    if !grid.is_periodic() {
        return Err(Error::PeriodicGridRequired);
    }
    let n = grid.n();
    let spec = f.spectral();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n {
        if j == n / 2 {
            continue;
        }
        let sign = if j < n / 2 { 1.0 } else { -1.0 };
        // -i * sgn(k) * c
        out[j] = Complex64::new(0.0, -sign) * spec[j];
    }
    Ok(Field::from_values(grid, crate::fft::inverse(&out)))
}

/// One output point of the alternating trapezoidal rule. The grid spacing
/// cancels between the `2h` quadrature weight and the `1/((i-j)h)` kernel,
/// so `recip[d + n - 1]` holds the unitless `1/d`. Only source indices in
/// `span` contribute (the data vanish outside it), and only those of
/// parity opposite to `i`.
#[inline]
fn line_point(i: usize, f: &[f64], span: (usize, usize), recip: &[f64], n: usize) -> f64 {
    let (j0, j1) = span;
    let start = if (j0 + i) % 2 == 1 { j0 } else { j0 + 1 };
    let mut sum = 0.0;
    let mut j = start;
    while j <= j1 {
        sum += f[j] * recip[i + n - 1 - j];
        j += 2;
    }
    2.0 * sum / std::f64::consts::PI
}

fn line_tables(f: &[f64], n: usize) -> Option<((usize, usize), Vec<f64>)> {
    let j0 = f.iter().position(|&v| v != 0.0)?;
    let j1 = f.iter().rposition(|&v| v != 0.0)?;
    // recip[d + n - 1] = 1/d for d = i - j in [-(n-1), n-1]
    let mut recip = vec![0.0; 2 * n - 1];
    for (idx, r) in recip.iter_mut().enumerate() {
        let d = idx as i64 - (n as i64 - 1);
        if d != 0 {
            *r = 1.0 / d as f64;
        }
    }
    Some(((j0, j1), recip))
}

/// Alternating trapezoidal Hilbert transform on a line grid, sequential
/// reference path. Bitwise identical to [`hilbert_line`].
pub fn hilbert_line_sequential(f: &Field) -> Result<Field> {
    let grid = f.grid();
    if grid.is_periodic() {
        return Err(Error::LineGridRequired);
    }
    let n = grid.n();
    let Some((span, recip)) = line_tables(f.values(), n) else {
        return Ok(Field::zeros(grid));
    };
    let v = f.values();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        *o = line_point(i, v, span, &recip, n);
    }
    Ok(Field::from_values(grid, out))
}

/// Alternating trapezoidal Hilbert transform on a line grid. Data-parallel
/// over output points when the `parallel` feature is enabled; each output
/// point is an independently ordered sum, so results are bit-identical to
/// the sequential path.
pub fn hilbert_line(f: &Field) -> Result<Field> {
    let grid = f.grid();
    if grid.is_periodic() {
        return Err(Error::LineGridRequired);
    }
    let n = grid.n();
    let Some((span, recip)) = line_tables(f.values(), n) else {
        return Ok(Field::zeros(grid));
    };
    let v = f.values();
    let mut out = vec![0.0; n];
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .enumerate()
        .for_each(|(i, o)| *o = line_point(i, v, span, &recip, n));
    #[cfg(not(feature = "parallel"))]
    for (i, o) in out.iter_mut().enumerate() {
        *o = line_point(i, v, span, &recip, n);
    }
    Ok(Field::from_values(grid, out))
}

/// Hilbert transform by the grid's natural discretization.
pub fn hilbert(f: &Field) -> Result<Field> {
    if f.grid().is_periodic() {
        hilbert_periodic(f)
    } else {
        hilbert_line(f)
    }
}

/// Test weight `phi` entering the bilinear functionals.
#[derive(Clone)]
pub enum TestWeight {
    /// `phi(x) = x - a`.
    ShiftedLinear { a: f64 },
    /// `phi(x) = b - x`.
    ReflectedLinear { b: f64 },
    /// Arbitrary Lipschitz weight; must be periodic when used on a
    /// periodic grid.
    Callable {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz: f64,
        label: String,
    },
}

impl fmt::Debug for TestWeight {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestWeight::ShiftedLinear { a } => write!(fm, "ShiftedLinear(a={a})"),
            TestWeight::ReflectedLinear { b } => write!(fm, "ReflectedLinear(b={b})"),
            TestWeight::Callable { label, lipschitz, .. } => {
                write!(fm, "Callable({label}, L={lipschitz})")
            }
        }
    }
}

impl TestWeight {
    pub fn shifted_linear(a: f64) -> TestWeight {
        TestWeight::ShiftedLinear { a }
    }

    pub fn reflected_linear(b: f64) -> TestWeight {
        TestWeight::ReflectedLinear { b }
    }

    pub fn callable(
        label: impl Into<String>,
        lipschitz: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> TestWeight {
        TestWeight::Callable {
            f: Arc::new(f),
            lipschitz,
            label: label.into(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestWeight::ShiftedLinear { a } => x - a,
            TestWeight::ReflectedLinear { b } => b - x,
            TestWeight::Callable { f, .. } => f(x),
        }
    }

    /// `phi'(x)`: exact for the linear kinds, centered difference for
    /// callables (used only on the diagonal of the double sum).
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            TestWeight::ShiftedLinear { .. } => 1.0,
            TestWeight::ReflectedLinear { .. } => -1.0,
            TestWeight::Callable { f, .. } => {
                let d = 1e-6 * x.abs().max(1.0);
                (f(x + d) - f(x - d)) / (2.0 * d)
            }
        }
    }

    /// Checks `phi(x + P) = phi(x)` at all grid points of a periodic grid.
    fn check_periodicity(&self, grid: &Grid) -> Result<()> {
        let Some(period) = (match grid.kind() {
            crate::grid::GridKind::Periodic { period } => Some(*period),
            _ => None,
        }) else {
            return Ok(());
        };
        let worst = grid
            .points()
            .iter()
            .map(|&x| (self.eval(x + period) - self.eval(x)).abs())
            .fold(0.0_f64, f64::max);
        if worst > 1e-12 {
            return Err(Error::WeightNotPeriodic(worst));
        }
        Ok(())
    }
}

/// `integral phi * f * Hf` by the grid's quadrature, with `H` the grid's
/// Hilbert discretization.
pub fn weighted_bilinear_lhs(f: &Field, weight: &TestWeight) -> Result<f64> {
    weight.check_periodicity(f.grid())?;
    let hf = hilbert(f)?;
    let vals: Vec<f64> = f
        .grid()
        .points()
        .iter()
        .zip(f.values().iter().zip(hf.values()))
        .map(|(&x, (&fv, &hv))| weight.eval(x) * fv * hv)
        .collect();
    Ok(f.grid().integrate(&vals))
}

/// One row of the double-sum quadrature: `sum_j K(x_i, x_j) f_j` with the
/// diagonal replaced by the difference-quotient limit.
#[inline]
fn rhs_row(
    i: usize,
    f: &[f64],
    phi: &[f64],
    kernel_table: &[f64],
    diag: f64,
    n: usize,
) -> f64 {
    let mut sum = 0.0;
    for j in 0..n {
        let k = if i == j {
            diag
        } else {
            (phi[i] - phi[j]) * kernel_table[i + n - 1 - j]
        };
        sum += k * f[j];
    }
    sum
}

struct RhsSetup {
    phi: Vec<f64>,
    /// Translation-invariant kernel factor indexed by `i - j + n - 1`:
    /// `1/(x_i - x_j)` on the line, `cot(pi (x_i - x_j)/P)` on the circle.
    table: Vec<f64>,
    diag: Vec<f64>,
    prefactor: f64,
}

fn rhs_setup(f: &Field, weight: &TestWeight) -> Result<RhsSetup> {
    weight.check_periodicity(f.grid())?;
    let grid = f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let phi: Vec<f64> = grid.points().iter().map(|&x| weight.eval(x)).collect();
    let mut table = vec![0.0; 2 * n - 1];
    let (diag_scale, prefactor) = if grid.is_periodic() {
        let period = grid.extent();
        for (idx, t) in table.iter_mut().enumerate() {
            let d = idx as i64 - (n as i64 - 1);
            if d != 0 {
                let arg = std::f64::consts::PI * d as f64 * h / period;
                *t = arg.cos() / arg.sin();
            }
        }
        // diagonal limit: (phi(x)-phi(y)) cot(pi (x-y)/P) -> phi'(x) P/pi
        (
            period / std::f64::consts::PI,
            h * h / (2.0 * period),
        )
    } else {
        for (idx, t) in table.iter_mut().enumerate() {
            let d = idx as i64 - (n as i64 - 1);
            if d != 0 {
                *t = 1.0 / (d as f64 * h);
            }
        }
        (1.0, h * h / (2.0 * std::f64::consts::PI))
    };
    let diag = grid
        .points()
        .iter()
        .map(|&x| weight.derivative(x) * diag_scale)
        .collect();
    Ok(RhsSetup { phi, table, diag, prefactor })
}

/// Direct double-sum quadrature of the bilinear identity's right-hand
/// side, sequential reference path.
pub fn weighted_bilinear_rhs_sequential(f: &Field, weight: &TestWeight) -> Result<f64> {
    let s = rhs_setup(f, weight)?;
    let n = f.grid().n();
    let v = f.values();
    let mut total = 0.0;
    for i in 0..n {
        total += rhs_row(i, v, &s.phi, &s.table, s.diag[i], n) * v[i];
    }
    Ok(total * s.prefactor)
}

/// Direct double-sum quadrature of the bilinear identity's right-hand
/// side; `O(n^2)` and intended as an oracle, not a production path.
/// Row-parallel with an ordered final reduction, so results match the
/// sequential path bit for bit.
pub fn weighted_bilinear_rhs(f: &Field, weight: &TestWeight) -> Result<f64> {
    let s = rhs_setup(f, weight)?;
    let n = f.grid().n();
    let v = f.values();
    #[cfg(feature = "parallel")]
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| rhs_row(i, v, &s.phi, &s.table, s.diag[i], n))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<f64> = (0..n)
        .map(|i| rhs_row(i, v, &s.phi, &s.table, s.diag[i], n))
        .collect();
    let mut total = 0.0;
    for (i, row) in rows.iter().enumerate() {
        total += row * v[i];
    }
    Ok(total * s.prefactor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridKind;
    use std::f64::consts::PI;

    fn periodic_field(n: usize, f: impl Fn(f64) -> f64) -> Field {
        let g = Grid::periodic(1.0, n).unwrap();
        Field::from_fn(&g, f)
    }

    #[test]
    fn symbol_on_single_modes() {
        let f = periodic_field(128, |x| (2.0 * PI * x).sin());
        let hf = hilbert_periodic(&f).unwrap();
        for (&x, &v) in f.grid().points().iter().zip(hf.values()) {
            assert!((v + (2.0 * PI * x).cos()).abs() < 1e-10);
        }
        let f2 = periodic_field(128, |x| (4.0 * PI * x).cos());
        let hf2 = hilbert_periodic(&f2).unwrap();
        for (&x, &v) in f2.grid().points().iter().zip(hf2.values()) {
            assert!((v - (4.0 * PI * x).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_is_annihilated() {
        let f = periodic_field(64, |_| 2.5);
        let hf = hilbert_periodic(&f).unwrap();
        assert!(hf.values().iter().all(|&v| v == 0.0));
        // exact zeros in spectral space as well
        assert!(hf.spectral().iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn mean_of_transform_vanishes() {
        let f = periodic_field(256, |x| 1.0 / (1.2 + (2.0 * PI * x).cos()));
        let hf = hilbert_periodic(&f).unwrap();
        let mean = hf.values().iter().sum::<f64>() / 256.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn double_transform_negates_mean_zero() {
        let f = periodic_field(256, |x| {
            (2.0 * PI * x).sin() + 0.4 * (6.0 * PI * x).cos() - 0.7 * (4.0 * PI * x).sin()
        });
        let hhf = hilbert_periodic(&hilbert_periodic(&f).unwrap()).unwrap();
        let scale = f.sup_norm();
        for (a, b) in f.values().iter().zip(hhf.values()) {
            assert!((a + b).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn l2_contraction_and_isometry() {
        let g = Grid::periodic(2.0, 512).unwrap();
        let with_mean = Field::from_fn(&g, |x| 0.5 + (PI * x).sin() + 0.3 * (3.0 * PI * x).cos());
        let hf = hilbert_periodic(&with_mean).unwrap();
        assert!(hf.l2_norm() <= with_mean.l2_norm() * (1.0 + 1e-10));
        let mean_zero = Field::from_fn(&g, |x| (PI * x).sin() + 0.3 * (3.0 * PI * x).cos());
        let hmz = hilbert_periodic(&mean_zero).unwrap();
        assert!((hmz.l2_norm() - mean_zero.l2_norm()).abs() < 1e-10 * mean_zero.l2_norm());
    }

    #[test]
    fn skew_symmetry() {
        let g = Grid::periodic(1.0, 512).unwrap();
        let f = Field::from_fn(&g, |x| (2.0 * PI * x).sin() + 0.2 * (8.0 * PI * x).cos());
        let q = Field::from_fn(&g, |x| 0.3 + (4.0 * PI * x).cos() - 0.5 * (6.0 * PI * x).sin());
        let hf = hilbert_periodic(&f).unwrap();
        let hg = hilbert_periodic(&q).unwrap();
        let prod1: Vec<f64> = q.values().iter().zip(hf.values()).map(|(a, b)| a * b).collect();
        let prod2: Vec<f64> = f.values().iter().zip(hg.values()).map(|(a, b)| a * b).collect();
        let i1 = g.integrate(&prod1);
        let i2 = g.integrate(&prod2);
        assert!((i1 + i2).abs() < 1e-9 * i1.abs().max(1e-3));
    }

    #[test]
    fn line_transform_of_zero() {
        let g = Grid::line(0.0, 1.0, (0.4, 0.6), 64).unwrap();
        let hf = hilbert_line(&Field::zeros(&g)).unwrap();
        assert!(hf.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lorentzian_pair() {
        // H[1/(1+x^2)] = x/(1+x^2); wide grid so the truncated tails are
        // below the target accuracy over the central half.
        let l = 400.0;
        let g = Grid::line(-l, l, (-l * 0.99, l * 0.99), 4096).unwrap();
        let f = Field::from_fn(&g, |x| 1.0 / (1.0 + x * x));
        let hf = hilbert_line(&f).unwrap();
        let mut worst = 0.0_f64;
        for (&x, &v) in g.points().iter().zip(hf.values()) {
            if x.abs() <= l / 2.0 {
                worst = worst.max((v - x / (1.0 + x * x)).abs());
            }
        }
        assert!(worst < 1e-6, "sup error {worst:.3e} over the central half");
    }

    #[test]
    fn odd_data_maps_to_even() {
        let g = Grid::line(0.0, 1.0, (0.3, 0.7), 256).unwrap();
        let h = g.spacing();
        let center = 0.5 - h / 2.0; // grid is symmetric about this point
        let f = Field::from_fn(&g, |x| {
            let s = (x - center) / 0.2;
            if s.abs() < 1.0 {
                s * (1.0 - s * s).powi(3)
            } else {
                0.0
            }
        });
        let hf = hilbert_line(&f).unwrap();
        let v = hf.values();
        let n = g.n();
        let scale = hf.sup_norm();
        for i in 0..n {
            assert!((v[i] - v[n - 1 - i]).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let g = Grid::line(-3.0, 3.0, (-1.0, 1.0), 512).unwrap();
        let f = Field::from_fn(&g, |x| if x.abs() < 1.0 { (1.0 - x * x).powi(2) } else { 0.0 });
        let a = hilbert_line(&f).unwrap();
        let b = hilbert_line_sequential(&f).unwrap();
        assert_eq!(a.values(), b.values());
        let w = TestWeight::shifted_linear(-1.0);
        assert_eq!(
            weighted_bilinear_rhs(&f, &w).unwrap().to_bits(),
            weighted_bilinear_rhs_sequential(&f, &w).unwrap().to_bits()
        );
    }

    #[test]
    fn bilinear_zero_and_constant_weight() {
        let g = Grid::periodic(1.0, 256).unwrap();
        let zero = Field::zeros(&g);
        let w = TestWeight::callable("one", 0.0, |_| 1.0);
        assert_eq!(weighted_bilinear_lhs(&zero, &w).unwrap(), 0.0);
        assert_eq!(weighted_bilinear_rhs(&zero, &w).unwrap(), 0.0);
        // integral f Hf = 0 by antisymmetry of the kernel
        let f = Field::from_fn(&g, |x| 1.0 + (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).cos());
        assert!(weighted_bilinear_lhs(&f, &w).unwrap().abs() < 1e-10);
    }

    #[test]
    fn shifted_linear_closed_form() {
        // rhs with phi = x - a reduces to (1/2pi) (integral f)^2
        let g = Grid::line(0.0, 1.0, (0.35, 0.65), 512).unwrap();
        let f = Field::from_fn(&g, |x| {
            let s = (x - 0.5) / 0.15;
            if s.abs() < 1.0 { (1.0 - s * s).powi(2) * (1.5 + x) } else { 0.0 }
        });
        let w = TestWeight::shifted_linear(0.35);
        let rhs = weighted_bilinear_rhs(&f, &w).unwrap();
        let mass = g.integrate(f.values());
        let expect = mass * mass / (2.0 * PI);
        assert!((rhs - expect).abs() < 1e-12 * expect.abs().max(1e-12));
    }

    #[test]
    fn identity_on_periodic_grid() {
        let g = Grid::periodic(1.0, 1024).unwrap();
        let f = Field::from_fn(&g, |x| {
            0.4 + (2.0 * PI * x).sin() - 0.6 * (6.0 * PI * x).cos() + 0.2 * (10.0 * PI * x).sin()
        });
        let w = TestWeight::callable("sin", 2.0 * PI, |x| (2.0 * PI * x).sin());
        let lhs = weighted_bilinear_lhs(&f, &w).unwrap();
        let rhs = weighted_bilinear_rhs(&f, &w).unwrap();
        assert!(
            (lhs - rhs).abs() < 1e-8 * lhs.abs().max(1e-6),
            "lhs {lhs:.12e} rhs {rhs:.12e}"
        );
    }

    #[test]
    fn identity_on_line_grid_cross_check() {
        // u0^2 of the compact bump against phi = x - a: lhs from the
        // alternating rule must match the double-sum oracle.
        let g = Grid::line(0.0, 1.0, (0.45, 0.55), 2048).unwrap();
        let f = Field::from_fn(&g, |x| {
            let s = (x - 0.5) / 0.05;
            if s.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - s * s)).exp().powi(2)
            } else {
                0.0
            }
        });
        let w = TestWeight::shifted_linear(0.45);
        let lhs = weighted_bilinear_lhs(&f, &w).unwrap();
        let rhs = weighted_bilinear_rhs(&f, &w).unwrap();
        assert!(
            (lhs - rhs).abs() < 1e-8 * rhs.abs(),
            "lhs {lhs:.12e} rhs {rhs:.12e}"
        );
    }

    #[test]
    fn nonperiodic_weight_rejected_on_circle() {
        let g = Grid::periodic(1.0, 64).unwrap();
        let f = Field::from_fn(&g, |x| (2.0 * PI * x).sin());
        let w = TestWeight::shifted_linear(0.0); // x - 0 is not 1-periodic
        assert!(matches!(
            weighted_bilinear_lhs(&f, &w),
            Err(Error::WeightNotPeriodic(_))
        ));
        assert!(matches!(f.grid().kind(), GridKind::Periodic { .. }));
    }
}
