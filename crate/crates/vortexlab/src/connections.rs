//! Meromorphic connections on punctured curves.
//!
//! The model curve is the Riemann sphere seen as the plane plus a regular point
//! at infinity.  A connection is `α = Σ_j λ_j dθ_j + Σ_b i·G_b·(1 − e^{−r_b²/s_b²}) dθ_b`
//! where `θ_j` is the angle around the puncture `x_j` with residue `λ_j`, and
//! each "bump" contributes smooth curvature
//! `F = i·G_b·(2/s_b²)·e^{−r_b²/s_b²} dx∧dy` of total `∫F = 2πi·G_b`.
//! The connection extends over infinity exactly when `Σ_j λ_j + iΣ_b G_b ∈ iℤ`.
//!
//! Conventions: the holonomy of a loop is `exp(∮α)`, so a residue `λ` has
//! holonomy `e^{2πλ}`; the degree with respect to trivialisations `τ` is
//! `(i/2π)∫F + iΣ Res(A, x, τ_x)`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cylinder::{deriv_t, deriv_theta, CylinderDomain, Pair};
use crate::error::{invalid, Error, Result};
use crate::scalar::{q_to_f64, Imag, ImagRational, Q, C64};
use crate::vortex::middle_weights;

const CIRCLE_POINTS: usize = 256;
const RICHARDSON_LEVELS: usize = 6;

/// A residue, stored exactly when it is a rational multiple of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residue {
    pub value: Imag,
    pub exact: Option<ImagRational>,
}

impl Residue {
    pub fn rational(r: ImagRational) -> Self {
        Residue { value: r.to_imag(), exact: Some(r) }
    }

    pub fn real(value: Imag) -> Self {
        Residue { value, exact: None }
    }

    /// `e^{2π·Res}`.
    pub fn holonomy(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.value.im())
    }
}

/// `Res(A, x, n·τ) = i·n + Res(A, x, τ)`.
pub fn shift_trivialization(res: Residue, n: i64) -> Residue {
    match res.exact {
        Some(r) => Residue::rational(ImagRational(r.0 + Q::from_integer(n))),
        None => Residue::real(Imag(res.value.im() + n as f64)),
    }
}

/// A puncture with its base residue and the trivialisation index applied to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Puncture {
    pub location: [f64; 2],
    pub residue: Residue,
    /// Shift of the local trivialisation relative to the base one.
    pub trivialization: i64,
}

impl Puncture {
    /// Residue in the current trivialisation.
    pub fn current_residue(&self) -> Residue {
        shift_trivialization(self.residue, self.trivialization)
    }
}

/// A smooth Gaussian curvature bump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    /// Total `∫F = 2πi·G`.
    pub g: f64,
    pub width: f64,
}

/// A meromorphic connection on the plane model of the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeromorphicConnection {
    pub punctures: Vec<Puncture>,
    pub bumps: Vec<Bump>,
}

impl MeromorphicConnection {
    pub fn new(punctures: Vec<Puncture>, bumps: Vec<Bump>) -> Result<Self> {
        for b in &bumps {
            if !(b.width > 0.0 && b.g.is_finite()) {
                return invalid("bump widths must be positive and strengths finite");
            }
        }
        for (i, p) in punctures.iter().enumerate() {
            for q in &punctures[i + 1..] {
                if dist2(p.location, q.location) == 0.0 {
                    return invalid("two punctures share a location");
                }
            }
        }
        Ok(MeromorphicConnection { punctures, bumps })
    }

    /// Curvature density: `F = i·density·dx∧dy`.
    pub fn curvature_density(&self, x: f64, y: f64) -> f64 {
        self.bumps
            .iter()
            .map(|b| {
                let r2 = dist2([x, y], b.center);
                b.g * 2.0 / (b.width * b.width) * (-r2 / (b.width * b.width)).exp()
            })
            .sum()
    }

    /// The connection 1-form `α = i·(A_x dx + A_y dy)`; returns `(A_x, A_y)`.
    pub fn form(&self, x: f64, y: f64) -> (f64, f64) {
        let (mut ax, mut ay) = (0.0, 0.0);
        let mut add_angular = |c: [f64; 2], coef: f64| {
            let (dx, dy) = (x - c[0], y - c[1]);
            let r2 = dx * dx + dy * dy;
            ax += coef * (-dy / r2);
            ay += coef * (dx / r2);
        };
        for p in &self.punctures {
            add_angular(p.location, p.residue.value.im());
        }
        for b in &self.bumps {
            let r2 = dist2([x, y], b.center);
            let s2 = b.width * b.width;
            // (1 − e^{−r²/s²})/r² is smooth at the centre.
            let prof = if r2 < 1e-12 * s2 { 1.0 / s2 } else { -(-r2 / s2).exp_m1() / r2 };
            let (dx, dy) = (x - b.center[0], y - b.center[1]);
            ax += b.g * prof * (-dy);
            ay += b.g * prof * dx;
        }
        (ax, ay)
    }

    /// Distance from puncture `j` to the nearest other puncture.
    fn separation(&self, j: usize) -> f64 {
        self.punctures
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, q)| dist2(q.location, self.punctures[j].location).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// The smallest square `[−L, L]²` outside of which the curvature is below
    /// double precision.
    fn curvature_box(&self) -> f64 {
        self.bumps
            .iter()
            .map(|b| b.center[0].abs().max(b.center[1].abs()) + 7.0 * b.width)
            .fold(1.0, f64::max)
    }

    /// Whether the total residue and curvature allow extension over infinity.
    pub fn regular_at_infinity(&self, tol: f64) -> bool {
        crate::scalar::is_near_integer(self.total_winding(), tol)
    }

    fn total_winding(&self) -> f64 {
        self.punctures.iter().map(|p| p.residue.value.im()).sum::<f64>() + self.bumps.iter().map(|b| b.g).sum::<f64>()
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Holonomy `exp(∮α)` around the circle of radius `radius` centred at puncture
/// `j` (periodic trapezoidal rule, spectrally accurate for smooth data).
pub fn holonomy_circle(conn: &MeromorphicConnection, j: usize, radius: f64) -> Result<C64> {
    let p = conn.punctures.get(j).ok_or_else(|| Error::InvalidInput(format!("no puncture {j}")))?;
    if !(radius > 0.0) || radius >= conn.separation(j) * 0.5 {
        return invalid(format!("radius {radius} leaves the local chart of puncture {j}"));
    }
    Ok(C64::from_polar(1.0, circle_integral(conn, p.location, radius)))
}

/// `∮ A` (the imaginary part of `∮α`) around a circle.
fn circle_integral(conn: &MeromorphicConnection, c: [f64; 2], radius: f64) -> f64 {
    let h = 2.0 * PI / CIRCLE_POINTS as f64;
    (0..CIRCLE_POINTS)
        .map(|k| {
            let (s, co) = (k as f64 * h).sin_cos();
            let (ax, ay) = conn.form(c[0] + radius * co, c[1] + radius * s);
            radius * (-s * ax + co * ay)
        })
        .sum::<f64>()
        * h
}

/// Result of the Richardson extrapolation of circle holonomies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitHolonomy {
    pub holonomy: C64,
    /// Extrapolated `∮A` (phase before exponentiation).
    pub phase: f64,
    /// Size of the last Richardson correction.
    pub estimated_error: f64,
}

/// `lim_{ε→0} Hol(A, γ_ε)` by Richardson extrapolation in `ε²` over the radii
/// `ε₀·2^{−m}`.
pub fn limit_holonomy(conn: &MeromorphicConnection, j: usize) -> Result<LimitHolonomy> {
    let p = conn.punctures.get(j).ok_or_else(|| Error::InvalidInput(format!("no puncture {j}")))?;
    let eps0 = (0.25 * conn.separation(j)).min(0.5);
    let mut table: Vec<Vec<f64>> = Vec::new();
    for m in 0..RICHARDSON_LEVELS {
        let eps = eps0 * 0.5f64.powi(m as i32);
        let mut row = vec![circle_integral(conn, p.location, eps)];
        for k in 1..=m {
            let f = 4f64.powi(k as i32);
            let v = (f * row[k - 1] - table[m - 1][k - 1]) / (f - 1.0);
            row.push(v);
        }
        table.push(row);
    }
    let last = &table[RICHARDSON_LEVELS - 1];
    let prev = &table[RICHARDSON_LEVELS - 2];
    let phase = last[RICHARDSON_LEVELS - 1];
    let err = (phase - prev[RICHARDSON_LEVELS - 2]).abs();
    let first_change = (table[1][1] - table[0][0]).abs();
    if !phase.is_finite() || (err > 1e-6 && err > first_change) {
        return Err(Error::NonConvergence(format!("holonomy sequence is not Cauchy (last correction {err:e})")));
    }
    Ok(LimitHolonomy { holonomy: C64::from_polar(1.0, phase), phase, estimated_error: err })
}

/// Decomposition of the Chern–Weil degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChernWeil {
    /// `(i/2π)∫F` by quadrature.
    pub curvature_term: f64,
    /// `iΣ Res(A, x, τ_x)` (a real number).
    pub residue_term: f64,
    pub degree: f64,
}

impl ChernWeil {
    pub fn integrality_defect(&self) -> f64 {
        (self.degree - self.degree.round()).abs()
    }
}

/// `(i/2π)∫F` by the trapezoidal rule on a square containing the support of the
/// curvature (spectrally accurate for Gaussians).
pub fn curvature_integral(conn: &MeromorphicConnection) -> f64 {
    if conn.bumps.is_empty() {
        return 0.0;
    }
    let l = conn.curvature_box();
    let smin = conn.bumps.iter().map(|b| b.width).fold(f64::INFINITY, f64::min);
    let n = ((2.0 * l) / (smin / 4.0)).ceil() as usize + 1;
    let h = 2.0 * l / (n - 1) as f64;
    let mut sum = 0.0;
    for a in 0..n {
        let x = -l + a as f64 * h;
        let wx = if a == 0 || a == n - 1 { 0.5 } else { 1.0 };
        for b in 0..n {
            let y = -l + b as f64 * h;
            let wy = if b == 0 || b == n - 1 { 0.5 } else { 1.0 };
            sum += wx * wy * conn.curvature_density(x, y);
        }
    }
    // (i/2π)·(i·∫density) = −∫density/2π.
    -sum * h * h / (2.0 * PI)
}

/// `deg P(τ) = (i/2π)∫F + iΣ Res(A, x, τ_x)` with the punctures' current
/// trivialisations.
pub fn chern_weil_degree(conn: &MeromorphicConnection) -> ChernWeil {
    let curvature_term = curvature_integral(conn);
    let residue_term = -conn.punctures.iter().map(|p| p.current_residue().value.im()).sum::<f64>();
    ChernWeil { curvature_term, residue_term, degree: curvature_term + residue_term }
}

/// Orbifold degree `(i/2π)∫_{C∖x} F` in exact arithmetic: the integer degree
/// `deg P(τ)` plus the rational residue bookkeeping `Σ p_j/q_j`, cross-checked
/// against the curvature quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbifoldDegree {
    #[serde(with = "crate::scalar::q_string")]
    pub degree: Q,
    pub bundle_degree: i64,
    pub quadrature: f64,
}

pub fn orbifold_degree(conn: &MeromorphicConnection) -> Result<OrbifoldDegree> {
    let mut sum = Q::from_integer(0);
    for (j, p) in conn.punctures.iter().enumerate() {
        match p.current_residue().exact {
            Some(r) => sum += r.0,
            None => return invalid(format!("puncture {j} has an irrational residue")),
        }
    }
    let cw = chern_weil_degree(conn);
    if cw.integrality_defect() > 1e-6 {
        return Err(Error::Hypothesis(format!("Chern–Weil degree {} is not an integer", cw.degree)));
    }
    let bundle_degree = cw.degree.round() as i64;
    let degree = Q::from_integer(bundle_degree) + sum;
    if (q_to_f64(degree) - cw.curvature_term).abs() > 1e-6 {
        return Err(Error::Hypothesis("orbifold degree disagrees with the curvature quadrature".into()));
    }
    Ok(OrbifoldDegree { degree, bundle_degree, quadrature: cw.curvature_term })
}

/// Random admissible connection: rational residues `p/q` (`q ≤ 6`), Gaussian
/// bumps, and total winding equal to a random integer.
pub fn random_connection(rng: &mut impl Rng, n_punctures: usize, n_bumps: usize) -> MeromorphicConnection {
    assert!(n_bumps >= 1, "the last bump absorbs the winding constraint");
    let mut punctures: Vec<Puncture> = Vec::new();
    while punctures.len() < n_punctures {
        let loc = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        if punctures.iter().any(|p| dist2(p.location, loc) < 0.16) {
            continue;
        }
        let q = rng.gen_range(1..=6);
        let p = rng.gen_range(-2 * q..=2 * q);
        punctures.push(Puncture {
            location: loc,
            residue: Residue::rational(ImagRational::new(p, q).expect("q > 0")),
            trivialization: 0,
        });
    }
    let mut bumps: Vec<Bump> = (0..n_bumps)
        .map(|_| Bump {
            center: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            g: rng.gen_range(-1.5..1.5),
            width: rng.gen_range(0.3..0.8),
        })
        .collect();
    let n: i64 = rng.gen_range(-3..=3);
    let others: f64 = punctures.iter().map(|p| p.residue.value.im()).sum::<f64>()
        + bumps[..n_bumps - 1].iter().map(|b| b.g).sum::<f64>();
    bumps[n_bumps - 1].g = n as f64 - others;
    MeromorphicConnection { punctures, bumps }
}

/// A nodal curve model: connections on each component, and nodes pairing a
/// puncture on one component with a puncture on another.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalConnection {
    pub components: Vec<MeromorphicConnection>,
    /// `((component, puncture), (component, puncture))`.
    pub nodes: Vec<((usize, usize), (usize, usize))>,
}

impl NodalConnection {
    /// Exact residue sums across each node (zero for a connection induced from
    /// a smoothing, with matched trivialisations).
    pub fn node_residue_sums(&self) -> Result<Vec<Q>> {
        self.nodes
            .iter()
            .map(|&((c1, p1), (c2, p2))| {
                let r = |c: usize, p: usize| -> Result<Q> {
                    let punct = self
                        .components
                        .get(c)
                        .and_then(|m| m.punctures.get(p))
                        .ok_or_else(|| Error::InvalidInput(format!("no puncture ({c}, {p})")))?;
                    punct
                        .current_residue()
                        .exact
                        .map(|x| x.0)
                        .ok_or_else(|| Error::InvalidInput("irrational node residue".into()))
                };
                Ok(r(c1, p1)? + r(c2, p2)?)
            })
            .collect()
    }
}

/// Chern–Weil degree of a cylinder pair read as a twice-punctured sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CylinderDegree {
    pub curvature_term: f64,
    pub residue_term: f64,
    pub degree: f64,
}

/// For `α = i·a·dθ` on `[−N, N] × S¹` (orientation `dθ∧dt`), with the residues
/// of the end circles `i·ā(N)` and `−i·ā(−N)`.
pub fn cylinder_degree(pair: &Pair) -> CylinderDegree {
    let dom = pair.domain;
    let nth = dom.n_theta;
    let da = deriv_t(&pair.a, dom.n_t, nth, dom.dt());
    let rows: Vec<f64> = (0..dom.n_t).map(|i| da[i * nth..(i + 1) * nth].iter().sum::<f64>() * dom.dtheta()).collect();
    // (i/2π)∫F with F = −i·∂_t a dθ∧dt.
    let curvature_term = crate::cylinder::integrate_rows(&rows, dom.dt(), 0, dom.n_t - 1) / (2.0 * PI);
    let mean = |i: usize| pair.a[i * nth..(i + 1) * nth].iter().sum::<f64>() / nth as f64;
    // iΣRes = i(i·ā₊ − i·ā₋).
    let residue_term = -(mean(dom.n_t - 1) - mean(0));
    CylinderDegree { curvature_term, residue_term, degree: curvature_term + residue_term }
}

/// Output of [`balanced_temporal_gauge`].
#[derive(Clone, Debug, PartialEq)]
pub struct BalancedGauge {
    /// Temporal-gauge coefficient `a(t, θ)` (imaginary part).
    pub a: Vec<f64>,
    pub lambda: Imag,
    /// Largest excess of `|a − λ|` over the integrated-curvature envelope.
    pub envelope_excess: f64,
}

/// Transforms `α = i(a_t dt + a_θ dθ)` into temporal gauge with `a` constant
/// (equal to `λ`) on the middle circle `t = 0`, and audits
/// `|a(t, θ) − λ| ≤ |∫_0^t |dα(τ, θ)| dτ|`.
pub fn balanced_temporal_gauge(domain: &CylinderDomain, a_t: &[f64], a_theta: &[f64]) -> Result<BalancedGauge> {
    let (n, nth) = (domain.n_t, domain.n_theta);
    if a_t.len() != n * nth || a_theta.len() != n * nth {
        return invalid("connection components must cover the grid");
    }
    // χ with ∂_tχ = −a_t (same fourth-order stencil as every t-derivative) and
    // χ = 0 on the middle circle; then a = a_θ + ∂_θχ.
    let chi = integrate_t_from_middle(domain, &a_t.iter().map(|v| -v).collect::<Vec<_>>())?;
    let dchi = deriv_theta(&chi, n, nth, 1);
    let mut a: Vec<f64> = a_theta.iter().zip(&dchi).map(|(x, y)| x + y).collect();
    let mid: Vec<f64> =
        (0..nth).map(|j| middle_weights(n).iter().map(|&(r, w)| w * a[r * nth + j]).sum::<f64>()).collect();
    let lambda = mid.iter().sum::<f64>() / nth as f64;
    for i in 0..n {
        for j in 0..nth {
            a[i * nth + j] += lambda - mid[j];
        }
    }
    // Envelope: F = ∂_t a_θ − ∂_θ a_t, integrated in |·| from the middle.
    let dt_atheta = deriv_t(a_theta, n, nth, domain.dt());
    let dth_at = deriv_theta(a_t, n, nth, 1);
    let absf: Vec<f64> = dt_atheta.iter().zip(&dth_at).map(|(x, y)| (x - y).abs()).collect();
    let env = cumulative_from_middle(domain, &absf);
    let excess = a.iter().zip(&env).map(|(v, e)| (v - lambda).abs() - e.abs()).fold(f64::NEG_INFINITY, f64::max);
    Ok(BalancedGauge { a, lambda: Imag(lambda), envelope_excess: excess.max(0.0) })
}

/// Solves `∂_t u = g` (fourth-order stencil on rows `0..n−2`) with `u = 0` on
/// the middle circle, column by column.
fn integrate_t_from_middle(domain: &CylinderDomain, g: &[f64]) -> Result<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let (n, nth) = (domain.n_t, domain.n_theta);
    let mut m = DMatrix::<f64>::zeros(n, n);
    let s = 1.0 / (12.0 * domain.dt());
    for i in 0..n - 1 {
        for (r, w) in crate::cylinder::t_stencil(i, n) {
            m[(i, r)] += w * s;
        }
    }
    for (r, w) in middle_weights(n) {
        m[(n - 1, r)] += w;
    }
    let lu = m.lu();
    let mut out = vec![0.0; n * nth];
    let mut rhs = DVector::<f64>::zeros(n);
    for j in 0..nth {
        for i in 0..n - 1 {
            rhs[i] = g[i * nth + j];
        }
        rhs[n - 1] = 0.0;
        let x = lu.solve(&rhs).ok_or_else(|| Error::Degenerate("singular integration matrix".into()))?;
        for i in 0..n {
            out[i * nth + j] = x[i];
        }
    }
    Ok(out)
}

/// Trapezoidal `∫_0^t g dτ` per column, anchored at the middle circle by
/// linear interpolation.
fn cumulative_from_middle(domain: &CylinderDomain, g: &[f64]) -> Vec<f64> {
    let (n, nth) = (domain.n_t, domain.n_theta);
    let dt = domain.dt();
    let mut out = vec![0.0; n * nth];
    for j in 0..nth {
        let col: Vec<f64> = (0..n).map(|i| g[i * nth + j]).collect();
        let mut cum = vec![0.0; n];
        for i in 1..n {
            cum[i] = cum[i - 1] + 0.5 * dt * (col[i] + col[i - 1]);
        }
        // Value of the cumulative integral at t = 0.
        let x = domain.half_length / dt;
        let k = (x.floor() as usize).min(n - 2);
        let fr = x - k as f64;
        let at0 = cum[k] + fr * dt * (col[k] + 0.5 * fr * (col[k + 1] - col[k]));
        for i in 0..n {
            out[i * nth + j] = cum[i] - at0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(res: &[(f64, f64, i64, i64)]) -> MeromorphicConnection {
        let punctures = res
            .iter()
            .map(|&(x, y, p, q)| Puncture {
                location: [x, y],
                residue: Residue::rational(ImagRational::new(p, q).unwrap()),
                trivialization: 0,
            })
            .collect();
        MeromorphicConnection::new(punctures, vec![]).unwrap()
    }

    #[test]
    fn shift_examples() {
        let r = Residue::real(Imag(0.3));
        assert_eq!(shift_trivialization(r, 0).value, Imag(0.3));
        assert!((shift_trivialization(r, 1).value.im() - 1.3).abs() < 1e-15);
        let h = Residue::rational(ImagRational::new(1, 2).unwrap());
        assert_eq!(shift_trivialization(h, -1).exact, Some(ImagRational::new(-1, 2).unwrap()));
    }

    #[test]
    fn flat_holonomy_is_radius_independent() {
        let conn = flat(&[(0.0, 0.0, 3, 10), (1.5, 0.0, -3, 10)]);
        for r in [0.05, 0.2, 0.5] {
            let h = holonomy_circle(&conn, 0, r).unwrap();
            assert!((h - C64::from_polar(1.0, 2.0 * PI * 0.3)).norm() < 1e-12);
        }
        assert!(holonomy_circle(&conn, 0, 1.0).is_err());
    }

    #[test]
    fn limit_holonomy_examples() {
        for (p, q) in [(1, 2), (0, 1), (1, 3)] {
            let conn = flat(&[(0.0, 0.0, p, q), (1.0, 1.0, -p, q)]);
            let lim = limit_holonomy(&conn, 0).unwrap();
            let want = C64::from_polar(1.0, 2.0 * PI * p as f64 / q as f64);
            assert!((lim.holonomy - want).norm() < 1e-12);
        }
    }

    #[test]
    fn chern_weil_examples() {
        let conn = flat(&[(0.0, 0.0, 3, 10), (1.0, 0.0, -3, 10)]);
        assert!(chern_weil_degree(&conn).degree.abs() < 1e-12);
        // Residues λ and −λ + i·2.
        let conn = flat(&[(0.0, 0.0, 3, 10), (1.0, 0.0, 17, 10)]);
        assert!((chern_weil_degree(&conn).degree + 2.0).abs() < 1e-12);
        // Smooth connection with ∫F = −2πi·3.
        let conn = MeromorphicConnection::new(vec![], vec![Bump { center: [0.2, -0.1], g: -3.0, width: 0.5 }]).unwrap();
        assert!((chern_weil_degree(&conn).degree - 3.0).abs() < 1e-9);
    }

    #[test]
    fn orbifold_examples() {
        let conn = flat(&[(0.0, 0.0, 1, 2), (1.0, 0.0, -1, 2)]);
        assert_eq!(orbifold_degree(&conn).unwrap().degree, Q::from_integer(0));
        let mut conn = flat(&[(0.0, 0.0, -1, 2)]);
        conn.bumps.push(Bump { center: [0.5, 0.5], g: -0.5, width: 0.4 });
        let od = orbifold_degree(&conn).unwrap();
        assert_eq!(od.bundle_degree, 1);
        assert_eq!(od.degree, Q::new(1, 2));
        let smooth = MeromorphicConnection::new(vec![], vec![Bump { center: [0.0, 0.0], g: -2.0, width: 0.6 }]).unwrap();
        assert_eq!(orbifold_degree(&smooth).unwrap().degree, Q::from_integer(2));
        let irr = MeromorphicConnection::new(
            vec![Puncture { location: [0.0, 0.0], residue: Residue::real(Imag(0.123)), trivialization: 0 }],
            vec![],
        )
        .unwrap();
        assert!(orbifold_degree(&irr).is_err());
    }
}
