//! Discretised cylinders `[−N, N] × S¹`, connection/section pairs in temporal
//! gauge, the covariant derivative, the ∂̄-operator and energies, plus the exact
//! Fourier-mode solutions on Linear targets.
//!
//! Discretisation: `t`-derivatives use fourth-order finite differences (the
//! five-point central stencil in the interior and fourth-order one-sided
//! closures in the two outermost rows at each end); `θ`-derivatives are
//! spectral.  Integrals use the trapezoidal rule in `t` and the rectangle rule
//! in `θ` (exact for band-limited periodic data).
//!
//! A connection `α = a·dθ` is stored by the imaginary part of its coefficient:
//! the grid value `a_r` means `α = i·a_r·dθ`.  With this convention the
//! covariant derivative is `D_t = ∂_tφ`, `D_θ = ∂_θφ + a_r 𝒳(φ)`, and a pair is
//! holomorphic when `D_t = I(φ) D_θ`.

use std::collections::BTreeSet;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{Imag, ImagRational, Q, C64};
use crate::target::{TargetManifold, TargetPoint};

/// Fourth-order one-sided first-derivative weights at a boundary row.
const EDGE: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
/// Fourth-order weights for the row next to the boundary (rows 0..=4).
const NEAR_EDGE: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
/// Five-point central weights for rows i−2..=i+2.
const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];

/// The grid `[−N, N] × S¹` with `n_t` rows in `t` and `n_theta` columns in `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderDomain {
    pub half_length: f64,
    pub n_t: usize,
    pub n_theta: usize,
}

impl CylinderDomain {
    /// Validates `N > 0`, `n_t ≥ 5` (the fourth-order stencils need five rows)
    /// and `n_theta ≥ 8`.
    pub fn new(half_length: f64, n_t: usize, n_theta: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return invalid(format!("half length must be positive, got {half_length}"));
        }
        if n_t < 5 {
            return invalid(format!("n_t must be at least 5, got {n_t}"));
        }
        if n_theta < 8 {
            return invalid(format!("n_theta must be at least 8, got {n_theta}"));
        }
        Ok(CylinderDomain { half_length, n_t, n_theta })
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.half_length / (self.n_t - 1) as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_theta as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dt()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    pub fn len(&self) -> usize {
        self.n_t * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row whose `t` is closest to the given value (clamped to the grid).
    pub fn nearest_row(&self, t: f64) -> usize {
        let x = ((t + self.half_length) / self.dt()).round();
        x.clamp(0.0, (self.n_t - 1) as f64) as usize
    }

    /// Trapezoidal weights in `t`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.n_t];
        w[0] = 0.5 * dt;
        w[self.n_t - 1] = 0.5 * dt;
        w
    }
}

/// Row indices and weights (to be divided by `12Δt`) of the derivative at row `i`.
pub(crate) fn t_stencil(i: usize, n: usize) -> [(usize, f64); 5] {
    let mut out = [(0usize, 0.0); 5];
    if i == 0 || i == 1 {
        let w = if i == 0 { EDGE } else { NEAR_EDGE };
        for k in 0..5 {
            out[k] = (k, w[k]);
        }
    } else if i == n - 1 || i == n - 2 {
        let w = if i == n - 1 { EDGE } else { NEAR_EDGE };
        for k in 0..5 {
            out[k] = (n - 1 - k, -w[k]);
        }
    } else {
        for k in 0..5 {
            out[k] = (i + k - 2, CENTRAL[k]);
        }
    }
    out
}

/// `∂_t` of row-major data with `width` values per row.
pub fn deriv_t(data: &[f64], n_t: usize, width: usize, dt: f64) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    let scale = 1.0 / (12.0 * dt);
    for i in 0..n_t {
        let st = t_stencil(i, n_t);
        let row = &mut out[i * width..(i + 1) * width];
        for &(r, w) in &st {
            if w == 0.0 {
                continue;
            }
            let src = &data[r * width..(r + 1) * width];
            for (o, s) in row.iter_mut().zip(src) {
                *o += w * s;
            }
        }
        for o in row.iter_mut() {
            *o *= scale;
        }
    }
    out
}

/// Cached FFT plans for transforms in `θ`.
#[derive(Clone)]
pub struct ThetaFft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl ThetaFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        ThetaFft { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    /// In-place forward transform normalised so that coefficient `k` is the
    /// Fourier coefficient of `e^{ikθ}`.
    pub fn forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
        let s = 1.0 / self.n as f64;
        for b in buf.iter_mut() {
            *b *= s;
        }
    }

    /// In-place synthesis from Fourier coefficients.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
    }

    /// Signed wave number of FFT slot `j` (the Nyquist slot maps to `n/2`).
    pub fn wave_number(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Symbol of the spectral `∂_θ` in slot `j` (zero at the Nyquist slot).
    pub fn derivative_symbol(&self, j: usize) -> f64 {
        if self.n % 2 == 0 && j == self.n / 2 {
            0.0
        } else {
            self.wave_number(j) as f64
        }
    }
}

/// Spectral `∂_θ` of grid data laid out as `(row, column, component)`.
pub fn deriv_theta(data: &[f64], n_t: usize, n_theta: usize, dim: usize) -> Vec<f64> {
    let fft = ThetaFft::new(n_theta);
    let mut out = vec![0.0; data.len()];
    let mut buf = vec![C64::new(0.0, 0.0); n_theta];
    for i in 0..n_t {
        for c in 0..dim {
            for j in 0..n_theta {
                buf[j] = C64::new(data[(i * n_theta + j) * dim + c], 0.0);
            }
            fft.forward(&mut buf);
            for (j, b) in buf.iter_mut().enumerate() {
                *b *= C64::new(0.0, fft.derivative_symbol(j));
            }
            fft.inverse(&mut buf);
            for j in 0..n_theta {
                out[(i * n_theta + j) * dim + c] = buf[j].re;
            }
        }
    }
    out
}

/// A connection `α = i·a·dθ` (temporal gauge) and a section `φ` on a cylinder grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Pair {
    pub domain: CylinderDomain,
    pub target: TargetManifold,
    /// Imaginary part of the `dθ`-coefficient, indexed `i·n_theta + j`.
    pub a: Vec<f64>,
    /// Point coordinates, indexed `(i·n_theta + j)·dim + c`.
    pub phi: Vec<f64>,
}

impl Pair {
    pub fn new(domain: CylinderDomain, target: TargetManifold, a: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let dim = target.real_dim();
        if a.len() != domain.len() {
            return invalid(format!("connection grid has {} values, expected {}", a.len(), domain.len()));
        }
        if phi.len() != domain.len() * dim {
            return invalid(format!("section grid has {} values, expected {}", phi.len(), domain.len() * dim));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite connection value");
        }
        for p in phi.chunks(dim) {
            target.validate(p)?;
        }
        Ok(Pair { domain, target, a, phi })
    }

    /// The constant section at `point` with constant connection `i·a·dθ`.
    pub fn constant(domain: CylinderDomain, target: TargetManifold, point: &TargetPoint, a: Imag) -> Result<Self> {
        target.validate(&point.0)?;
        let phi = point.0.iter().copied().cycle().take(domain.len() * point.0.len()).collect();
        Pair::new(domain, target, vec![a.im(); domain.len()], phi)
    }

    pub fn dim(&self) -> usize {
        self.target.real_dim()
    }

    pub fn point(&self, i: usize, j: usize) -> &[f64] {
        let d = self.dim();
        let k = (i * self.domain.n_theta + j) * d;
        &self.phi[k..k + d]
    }

    pub fn a_at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.domain.n_theta + j]
    }

    /// `H(φ)` on every grid point.
    pub fn h_grid(&self) -> Vec<f64> {
        self.phi.chunks(self.dim()).map(|p| self.target.h(p)).collect()
    }
}

/// The two components of `d_αφ` on the grid, projected to tangent planes.
#[derive(Clone, Debug)]
pub struct CovariantDerivative {
    pub dim: usize,
    pub d_t: Vec<f64>,
    pub d_theta: Vec<f64>,
}

impl CovariantDerivative {
    pub fn d_t_at(&self, k: usize) -> &[f64] {
        &self.d_t[k * self.dim..(k + 1) * self.dim]
    }

    pub fn d_theta_at(&self, k: usize) -> &[f64] {
        &self.d_theta[k * self.dim..(k + 1) * self.dim]
    }
}

/// Raw partial derivatives `(∂_tφ, ∂_θφ)` projected to tangent planes.
pub fn partial_derivatives(pair: &Pair) -> (Vec<f64>, Vec<f64>) {
    let d = pair.dim();
    let dom = pair.domain;
    let mut pt = deriv_t(&pair.phi, dom.n_t, dom.n_theta * d, dom.dt());
    let mut pth = deriv_theta(&pair.phi, dom.n_t, dom.n_theta, d);
    for k in 0..dom.len() {
        let p = &pair.phi[k * d..(k + 1) * d];
        pair.target.project_tangent_in_place(p, &mut pt[k * d..(k + 1) * d]);
        pair.target.project_tangent_in_place(p, &mut pth[k * d..(k + 1) * d]);
    }
    (pt, pth)
}

/// `D_t = ∂_tφ`, `D_θ = ∂_θφ + a·𝒳(φ)`.
pub fn covariant_derivative(pair: &Pair) -> CovariantDerivative {
    let d = pair.dim();
    let (d_t, mut d_theta) = partial_derivatives(pair);
    let mut xf = vec![0.0; d];
    for k in 0..pair.domain.len() {
        pair.target.field_x_into(&pair.phi[k * d..(k + 1) * d], &mut xf);
        for c in 0..d {
            d_theta[k * d + c] += pair.a[k] * xf[c];
        }
    }
    CovariantDerivative { dim: d, d_t, d_theta }
}

/// Pointwise residual of the holomorphicity equation.
#[derive(Clone, Debug)]
pub struct Residual {
    pub domain: CylinderDomain,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl Residual {
    pub fn norm_at(&self, i: usize, j: usize) -> f64 {
        let k = (i * self.domain.n_theta + j) * self.dim;
        crate::target::norm(&self.values[k..k + self.dim])
    }

    /// Supremum norm over rows `rows`.
    pub fn sup_norm_rows(&self, rows: std::ops::Range<usize>) -> f64 {
        let mut m: f64 = 0.0;
        for i in rows {
            for j in 0..self.domain.n_theta {
                m = m.max(self.norm_at(i, j));
            }
        }
        m
    }

    /// Supremum over the whole grid.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_rows(0..self.domain.n_t)
    }

    /// Supremum over the rows that do not carry boundary data (all but the
    /// first and last).
    pub fn sup_norm_interior(&self) -> f64 {
        self.sup_norm_rows(1..self.domain.n_t - 1)
    }
}

/// `D_t − I(φ) D_θ`, zero exactly when the pair is holomorphic on the grid.
pub fn dbar(pair: &Pair) -> Residual {
    let cd = covariant_derivative(pair);
    let d = pair.dim();
    let mut values = vec![0.0; pair.phi.len()];
    let mut buf = vec![0.0; d];
    for k in 0..pair.domain.len() {
        let p = &pair.phi[k * d..(k + 1) * d];
        pair.target.complex_structure_into(p, cd.d_theta_at(k), &mut buf);
        for c in 0..d {
            values[k * d + c] = cd.d_t[k * d + c] - buf[c];
        }
    }
    Residual { domain: pair.domain, dim: d, values }
}

/// θ-integrated energy density `½∫(|D_t|² + |D_θ|²)dθ` on every row.
pub fn energy_profile(pair: &Pair) -> Vec<f64> {
    let cd = covariant_derivative(pair);
    let dom = pair.domain;
    let d = pair.dim();
    (0..dom.n_t)
        .map(|i| {
            let s: f64 = (0..dom.n_theta)
                .map(|j| {
                    let k = (i * dom.n_theta + j) * d;
                    cd.d_t[k..k + d].iter().chain(&cd.d_theta[k..k + d]).map(|v| v * v).sum::<f64>()
                })
                .sum();
            0.5 * s * dom.dtheta()
        })
        .collect()
}

/// Energy `½∫∫(|D_t|² + |D_θ|²)dt dθ` over rows `i0..=i1` (trapezoidal in `t`).
pub fn energy_rows(pair: &Pair, i0: usize, i1: usize) -> Result<f64> {
    if i1 <= i0 || i1 >= pair.domain.n_t {
        return invalid(format!("empty or out-of-range row interval [{i0}, {i1}]"));
    }
    Ok(integrate_rows(&energy_profile(pair), pair.domain.dt(), i0, i1))
}

/// Energy over the sub-cylinder `[t0, t1] × S¹`, with the endpoints snapped to
/// the nearest grid rows.
pub fn energy(pair: &Pair, t0: f64, t1: f64) -> Result<f64> {
    let (i0, i1) = (pair.domain.nearest_row(t0), pair.domain.nearest_row(t1));
    if i1 <= i0 {
        return invalid(format!("interval [{t0}, {t1}] contains no grid cell"));
    }
    energy_rows(pair, i0, i1)
}

/// Energy over the whole cylinder.
pub fn total_energy(pair: &Pair) -> f64 {
    integrate_rows(&energy_profile(pair), pair.domain.dt(), 0, pair.domain.n_t - 1)
}

/// Trapezoidal integral of a row profile over rows `i0..=i1`.
pub fn integrate_rows(profile: &[f64], dt: f64, i0: usize, i1: usize) -> f64 {
    let inner: f64 = profile[i0 + 1..i1].iter().sum();
    dt * (inner + 0.5 * (profile[i0] + profile[i1]))
}

/// Energies of consecutive unit-length sub-cylinders `[−N+n, −N+n+1] × S¹`.
///
/// Segment boundaries that fall between grid rows are handled by integrating
/// the piecewise-linear interpolant of the row profile; when `1/Δt` is an
/// integer this is exactly the composite trapezoidal rule on each segment.
pub fn segment_energies(pair: &Pair) -> Result<Vec<f64>> {
    let dom = pair.domain;
    let len = 2.0 * dom.half_length;
    if len < 2.0 {
        return invalid(format!("cylinder length {len} is shorter than two unit segments"));
    }
    let profile = energy_profile(pair);
    let dt = dom.dt();
    let count = (len + 1e-9).floor() as usize;
    let last = (dom.n_t - 1) as f64;
    // Integral of the linear interpolant over [x0, x1], both in row units.
    // Each segment is integrated on its own rather than as a difference of
    // cumulative integrals, which would cancel catastrophically when the
    // profile spans many orders of magnitude.
    let piece = |x0: f64, x1: f64| -> f64 {
        let value = |x: f64| {
            let m = (x.floor() as usize).min(dom.n_t - 2);
            let f = x - m as f64;
            profile[m] * (1.0 - f) + profile[m + 1] * f
        };
        let mut total = 0.0;
        let mut x = x0;
        while x < x1 {
            let next = (x.floor() + 1.0).min(x1);
            total += 0.5 * (value(x) + value(next)) * (next - x) * dt;
            x = next;
        }
        total
    };
    Ok((0..count)
        .map(|n| {
            let x0 = (n as f64 / dt).clamp(0.0, last);
            let x1 = ((n as f64 + 1.0) / dt).clamp(0.0, last);
            piece(x0, x1)
        })
        .collect())
}

/// Fourier coefficients `a_{k,j}` for `k ∈ [−K, K]` and coordinates `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpectrum {
    pub k_max: usize,
    pub n_coords: usize,
    coeffs: Vec<C64>,
}

impl ModeSpectrum {
    pub fn zeros(k_max: usize, n_coords: usize) -> Self {
        ModeSpectrum { k_max, n_coords, coeffs: vec![C64::new(0.0, 0.0); (2 * k_max + 1) * n_coords] }
    }

    fn slot(&self, k: i64, j: usize) -> usize {
        assert!(k.unsigned_abs() as usize <= self.k_max && j < self.n_coords, "mode ({k}, {j}) out of range");
        (k + self.k_max as i64) as usize * self.n_coords + j
    }

    pub fn get(&self, k: i64, j: usize) -> C64 {
        self.coeffs[self.slot(k, j)]
    }

    pub fn set(&mut self, k: i64, j: usize, v: C64) {
        let s = self.slot(k, j);
        self.coeffs[s] = v;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, usize, C64)> + '_ {
        let (km, n) = (self.k_max as i64, self.n_coords);
        self.coeffs.iter().enumerate().map(move |(s, &c)| ((s / n) as i64 - km, s % n, c))
    }
}

/// Exact evolution `a_{k,j}(t) = a_{k,j}(0)·e^{(−k + iλw_j)t}` sampled onto the
/// grid, with the flat connection `α = λ·dθ`.
pub fn evolve_modes(spectrum: &ModeSpectrum, lambda: Imag, target: &TargetManifold, domain: CylinderDomain) -> Result<Pair> {
    let weights = match target {
        TargetManifold::Linear { weights } => weights,
        TargetManifold::Sphere => return invalid("mode evolution needs a Linear target"),
    };
    if spectrum.n_coords != weights.len() {
        return Err(Error::Shape { expected: weights.len(), got: spectrum.n_coords });
    }
    if spectrum.k_max + 1 > domain.n_theta / 2 {
        return invalid(format!(
            "mode truncation K = {} exceeds the grid limit n_theta/2 − 1 = {}",
            spectrum.k_max,
            domain.n_theta / 2 - 1
        ));
    }
    let s = lambda.im();
    let d = target.real_dim();
    let mut phi = vec![0.0; domain.len() * d];
    for i in 0..domain.n_t {
        let t = domain.t(i);
        for (k, j, c) in spectrum.modes() {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let amp = c * ((-(k as f64) - s * weights[j] as f64) * t).exp();
            for col in 0..domain.n_theta {
                let v = amp * C64::from_polar(1.0, k as f64 * domain.theta(col));
                let idx = (i * domain.n_theta + col) * d + 2 * j;
                phi[idx] += v.re;
                phi[idx + 1] += v.im;
            }
        }
    }
    Pair::new(domain, target.clone(), vec![s; domain.len()], phi)
}

/// Spectral gap `l_min = min_{k,j} |−k + iλw_j|`.
pub fn l_min(lambda: Imag, weights: &[i64]) -> Result<f64> {
    if weights.is_empty() {
        return invalid("l_min needs at least one weight");
    }
    Ok(weights
        .iter()
        .map(|&w| {
            let x = lambda.im() * w as f64;
            (x - x.floor()).min(x.ceil() - x)
        })
        .fold(f64::INFINITY, f64::min))
}

/// `γ(η) = 1/(e^{η/2} + e^{−η/2})`.
pub fn gamma(eta: f64) -> f64 {
    1.0 / (2.0 * (0.5 * eta).cosh())
}

/// All critical residues `i·m/w` (m ∈ ℤ, w a nonzero weight) in the half-open
/// window `[i·lo, i·hi)`, deduplicated and sorted, in exact arithmetic.
pub fn critical_residues(weights: &[i64], lo: Q, hi: Q) -> Vec<ImagRational> {
    let mut set = BTreeSet::new();
    for &w in weights.iter().filter(|&&w| w != 0) {
        let w = w.abs();
        let start = (lo * w).ceil().to_integer();
        let mut m = start;
        loop {
            let r = Q::new(m, w);
            if r >= hi {
                break;
            }
            set.insert(ImagRational(r));
            m += 1;
        }
    }
    set.into_iter().collect()
}

/// Indices `m` (middle of three consecutive segments) where the three-segment
/// mean-value inequality `f_m ≤ γ(f_{m−1} + f_{m+1})` fails by more than a
/// relative slack of 1e−12.
pub fn mean_value_check(f: &[f64], gamma_value: f64) -> Result<Vec<usize>> {
    if f.len() < 3 {
        return invalid("mean-value check needs at least three segments");
    }
    Ok((1..f.len() - 1)
        .filter(|&m| {
            let slack = 1e-12 * (f[m - 1] + f[m] + f[m + 1]);
            f[m] > gamma_value * (f[m - 1] + f[m + 1]) + slack
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_quartics_exactly() {
        let n = 9;
        let dt = 0.3;
        let f = |t: f64| 1.0 + 2.0 * t - t * t + 0.5 * t.powi(3) - 0.25 * t.powi(4);
        let df = |t: f64| 2.0 - 2.0 * t + 1.5 * t * t - t.powi(3);
        let data: Vec<f64> = (0..n).map(|i| f(i as f64 * dt)).collect();
        let d = deriv_t(&data, n, 1, dt);
        for i in 0..n {
            assert!((d[i] - df(i as f64 * dt)).abs() < 1e-11, "row {i}");
        }
    }

    #[test]
    fn spectral_theta_derivative_is_exact_on_band_limited_data() {
        let n = 16;
        let data: Vec<f64> = (0..n).map(|j| (3.0 * j as f64 * 2.0 * std::f64::consts::PI / n as f64).sin()).collect();
        let d = deriv_theta(&data, 1, n, 1);
        for j in 0..n {
            let th = j as f64 * 2.0 * std::f64::consts::PI / n as f64;
            assert!((d[j] - 3.0 * (3.0 * th).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(0.0), 0.5);
        let e = std::f64::consts::E;
        assert!((gamma(2.0) - 1.0 / (e + 1.0 / e)).abs() < 1e-16);
        assert!((gamma(0.6) - 0.478_31).abs() < 1e-5);
    }

    #[test]
    fn l_min_examples() {
        assert!((l_min(Imag(0.3), &[1, 2]).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(l_min(Imag(0.0), &[1, 5]).unwrap(), 0.0);
        assert_eq!(l_min(Imag(0.5), &[2]).unwrap(), 0.0);
    }

    #[test]
    fn critical_residue_examples() {
        let q = |p, r| Q::new(p, r);
        let got = critical_residues(&[1, 2], q(0, 1), q(1, 1));
        assert_eq!(got, vec![ImagRational::integer(0), ImagRational::new(1, 2).unwrap()]);
        assert_eq!(critical_residues(&[1], q(0, 1), q(1, 1)), vec![ImagRational::integer(0)]);
        let got = critical_residues(&[3], q(0, 1), q(1, 1));
        let want: Vec<_> = [(0, 1), (1, 3), (2, 3)].iter().map(|&(p, r)| ImagRational::new(p, r).unwrap()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn mean_value_examples() {
        assert_eq!(mean_value_check(&[1.0, 1.0, 0.0], 0.4).unwrap(), vec![1]);
        assert!(mean_value_check(&[0.0; 5], 0.4).unwrap().is_empty());
        let r = (-0.6f64).exp();
        let f: Vec<f64> = (0..10).map(|n| r.powi(n)).collect();
        assert!(mean_value_check(&f, gamma(0.6)).unwrap().is_empty());
        assert!(mean_value_check(&[1.0, 2.0], 0.4).is_err());
    }

    #[test]
    fn domain_validation() {
        assert!(CylinderDomain::new(1.0, 4, 8).is_err());
        assert!(CylinderDomain::new(1.0, 5, 4).is_err());
        assert!(CylinderDomain::new(-1.0, 8, 8).is_err());
        let d = CylinderDomain::new(2.0, 5, 8).unwrap();
        assert_eq!(d.dt(), 1.0);
        assert_eq!(d.t(4), 2.0);
    }
}
