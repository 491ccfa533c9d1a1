//! Discrete domains, grid functions, spectral/finite-difference
//! differentiation, and norm records.
//!
//! Two domain kinds are supported: a periodic circle of given period and a
//! truncated line `[x_lo, x_hi)` carrying a marked support interval
//! `[a, b]` for compactly supported data. Both sample on the uniform grid
//! `x_j = x_lo + j*h`, `j = 0..n`, with `h = extent / n` (the right
//! endpoint is not a grid point; for the line kind it is the truncation
//! edge, and all compactly supported data vanish well inside it).

use crate::fft;
use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use std::sync::{Arc, OnceLock};

/// Domain kind of a [`Grid`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum GridKind {
    /// Circle of the given period.
    Periodic { period: f64 },
    /// Truncated line with a marked support interval for `u`.
    Line {
        x_lo: f64,
        x_hi: f64,
        support: (f64, f64),
    },
}

/// Uniform spatial grid.
#[derive(Debug)]
pub struct Grid {
    kind: GridKind,
    n: usize,
    h: f64,
    points: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.n == other.n
    }
}

impl Grid {
    /// Periodic grid with `n` points (power of two, at least 8).
    pub fn periodic(period: f64, n: usize) -> Result<Arc<Grid>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        if !(period > 0.0) {
            return Err(Error::EmptyDomain { lo: 0.0, hi: period });
        }
        let h = period / n as f64;
        let points = (0..n).map(|j| j as f64 * h).collect();
        Ok(Arc::new(Grid {
            kind: GridKind::Periodic { period },
            n,
            h,
            points,
        }))
    }

    /// Line grid on `[x_lo, x_hi)` with marked support `[a, b]` strictly
    /// inside the domain.
    pub fn line(x_lo: f64, x_hi: f64, support: (f64, f64), n: usize) -> Result<Arc<Grid>> {
        if n < 8 {
            return Err(Error::GridTooSmall(n));
        }
        if !(x_hi > x_lo) {
            return Err(Error::EmptyDomain { lo: x_lo, hi: x_hi });
        }
        let (a, b) = support;
        if !(a < b && a > x_lo && b < x_hi) {
            return Err(Error::SupportOutsideDomain { a, b, lo: x_lo, hi: x_hi });
        }
        let h = (x_hi - x_lo) / n as f64;
        let points = (0..n).map(|j| x_lo + j as f64 * h).collect();
        Ok(Arc::new(Grid {
            kind: GridKind::Line { x_lo, x_hi, support },
            n,
            h,
            points,
        }))
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, GridKind::Periodic { .. })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Domain extent (period for circles, `x_hi - x_lo` for lines).
    pub fn extent(&self) -> f64 {
        match self.kind {
            GridKind::Periodic { period } => period,
            GridKind::Line { x_lo, x_hi, .. } => x_hi - x_lo,
        }
    }

    /// Marked support interval for line grids.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self.kind {
            GridKind::Line { support, .. } => Some(support),
            GridKind::Periodic { .. } => None,
        }
    }

    /// Physical wavenumber of DFT bin `j` (periodic grids).
    pub(crate) fn wavenumber_phys(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * fft::wavenumber(j, self.n) as f64 / self.extent()
    }

    /// Quadrature of sampled values: rectangle sum on periodic grids
    /// (the trapezoidal rule on a circle), trapezoidal on line grids.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        match self.kind {
            GridKind::Periodic { .. } => self.h * values.iter().sum::<f64>(),
            GridKind::Line { .. } => {
                let inner: f64 = values[1..self.n - 1].iter().sum();
                self.h * (0.5 * values[0] + inner + 0.5 * values[self.n - 1])
            }
        }
    }
}

/// Real-valued grid function with a lazily computed spectral companion.
///
/// The spectral companion is the plain complex DFT of the values; it is
/// invalidated whenever the values are mutably borrowed.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
    spectral: OnceLock<Vec<Complex64>>,
    /// Interval outside which the field is (numerically) zero.
    support: Option<(f64, f64)>,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.n()],
            spectral: OnceLock::new(),
            support: None,
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Field {
        assert_eq!(values.len(), grid.n(), "value count must match the grid");
        Field {
            grid: Arc::clone(grid),
            values,
            spectral: OnceLock::new(),
            support: None,
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Field {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Field::from_values(grid, values)
    }

    /// Tag the field as compactly supported in `[a, b]`.
    pub fn with_support(mut self, support: (f64, f64)) -> Field {
        self.support = Some(support);
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to the values; drops the cached spectrum.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectral.take();
        &mut self.values
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// DFT of the values, computed on first use.
    pub fn spectral(&self) -> &[Complex64] {
        self.spectral.get_or_init(|| fft::forward(&self.values))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|&v| v * v).collect();
        self.grid.integrate(&sq).max(0.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// True when the values vanish (to `1e-13` of the max) outside the
    /// tagged support interval.
    pub fn respects_support(&self) -> bool {
        let Some((a, b)) = self.support else {
            return true;
        };
        let tol = 1e-13 * self.sup_norm();
        self.grid
            .points()
            .iter()
            .zip(self.values.iter())
            .all(|(&x, &v)| (x >= a && x <= b) || v.abs() <= tol)
    }
}

/// Spectral derivative via multiplication by `i k`; the Nyquist mode is
/// zeroed to keep the result real. Errors on line grids.
pub fn spectral_derivative(f: &Field) -> Result<Field> {
    let grid = f.grid();
    if !grid.is_periodic() {
        return Err(Error::LineGridRequired);
    }
    let n = grid.n();
    let spec = f.spectral();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, (s, o)) in spec.iter().zip(out.iter_mut()).enumerate() {
        if j == n / 2 {
            continue;
        }
        let k = grid.wavenumber_phys(j);
        *o = Complex64::new(0.0, k) * s;
    }
    Ok(Field::from_values(grid, fft::inverse(&out)))
}

/// Spectral second derivative (periodic grids), used by the viscous terms.
pub fn spectral_second_derivative(f: &Field) -> Result<Field> {
    let grid = f.grid();
    if !grid.is_periodic() {
        return Err(Error::LineGridRequired);
    }
    let spec = f.spectral();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.n()];
    for (j, (s, o)) in spec.iter().zip(out.iter_mut()).enumerate() {
        let k = grid.wavenumber_phys(j);
        *o = -k * k * s;
    }
    Ok(Field::from_values(grid, fft::inverse(&out)))
}

/// Fourth-order centered finite differences with one-sided closures,
/// matching the temporal order of the integrator on line grids.
pub fn finite_difference_derivative(f: &Field) -> Field {
    let n = f.grid().n();
    let h = f.grid().spacing();
    let v = f.values();
    let mut out = vec![0.0; n];
    let c = 1.0 / (12.0 * h);
    for i in 2..n - 2 {
        out[i] = c * (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]);
    }
    // one-sided fourth-order stencils at the edges
    out[0] = c * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    out[1] = c * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    out[n - 1] = -c
        * (-25.0 * v[n - 1] + 48.0 * v[n - 2] - 36.0 * v[n - 3] + 16.0 * v[n - 4]
            - 3.0 * v[n - 5]);
    out[n - 2] =
        -c * (-3.0 * v[n - 1] - 10.0 * v[n - 2] + 18.0 * v[n - 3] - 6.0 * v[n - 4] + v[n - 5]);
    Field::from_values(f.grid(), out)
}

/// First derivative by the grid's natural method: spectral on periodic
/// grids, fourth-order finite differences on line grids.
pub fn derivative(f: &Field) -> Field {
    if f.grid().is_periodic() {
        spectral_derivative(f).expect("periodic grid")
    } else {
        finite_difference_derivative(f)
    }
}

/// Solution pair `(u, v)` at time `t`.
#[derive(Debug, Clone)]
pub struct SolutionState {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl SolutionState {
    pub fn new(u: Field, v: Field, t: f64) -> SolutionState {
        assert!(u.grid() == v.grid(), "u and v must share a grid");
        SolutionState { u, v, t }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.t.is_finite()
    }
}

/// Norms of a solution state at one instant, plus the running integral of
/// the regularity-controlling quantity `sup|u| + sup|v|`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormRecord {
    pub t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub l2_u: f64,
    pub l2_v: f64,
    pub h1_u: f64,
    pub h1_v: f64,
    /// `sup|u| + sup|v|`, the integrand of the blow-up criterion.
    pub bkm_integrand: f64,
    /// Trapezoidal-in-time integral of the integrand from the run start.
    pub bkm_integral: f64,
}

impl NormRecord {
    /// Instantaneous norms with the running integral continued from
    /// `prev` (trapezoidal in time); pass `None` at the start of a run.
    pub fn measure(state: &SolutionState, prev: Option<&NormRecord>) -> NormRecord {
        let (h1_u, l2_u) = h1_l2(&state.u);
        let (h1_v, l2_v) = h1_l2(&state.v);
        let sup_u = state.u.sup_norm();
        let sup_v = state.v.sup_norm();
        let bkm_integrand = sup_u + sup_v;
        let bkm_integral = match prev {
            Some(p) => p.bkm_integral + 0.5 * (p.bkm_integrand + bkm_integrand) * (state.t - p.t),
            None => 0.0,
        };
        NormRecord {
            t: state.t,
            sup_u,
            sup_v,
            l2_u,
            l2_v,
            h1_u,
            h1_v,
            bkm_integrand,
            bkm_integral,
        }
    }
}

/// `(H1, L2)` norms of a field. On periodic grids the derivative part is
/// summed in spectral space through Parseval's identity; line grids use
/// the finite-difference derivative and trapezoidal quadrature.
fn h1_l2(f: &Field) -> (f64, f64) {
    let l2 = f.l2_norm();
    let deriv_sq = if f.grid().is_periodic() {
        let grid = f.grid();
        let n = grid.n();
        let spec = f.spectral();
        let mut sum = 0.0;
        for (j, s) in spec.iter().enumerate() {
            if j == n / 2 {
                continue;
            }
            let k = grid.wavenumber_phys(j);
            sum += (k * s.norm()).powi(2);
        }
        sum * grid.spacing() / n as f64
    } else {
        let d = finite_difference_derivative(f);
        let sq: Vec<f64> = d.values().iter().map(|&v| v * v).collect();
        f.grid().integrate(&sq)
    };
    ((l2 * l2 + deriv_sq).sqrt(), l2)
}

/// Convenience wrapper producing a full [`NormRecord`] outside a run.
pub fn norms(state: &SolutionState) -> NormRecord {
    NormRecord::measure(state, None)
}
