//! Floer cylinders, the coupled holomorphicity + vortex system on cylinders, the
//! Yang–Mills–Higgs functional and its topological identity.
//!
//! In temporal gauge `α = i·a·dθ` and with the orientation `dθ∧dt`, the system
//! solved here is
//!
//! ```text
//!   ∂_tφ = I(φ)(∂_θφ + a·𝒳(φ))          (holomorphicity)
//!   ∂_t a = f(t)·(H(φ) − c_r)             (vortex equation, c = i·c_r)
//! ```
//!
//! This is the sign for which the Yang–Mills–Higgs functional of a solution
//! equals a boundary/topological expression (see [`ymh_identity_check`]).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::Serialize;

use crate::connections;
use crate::cylinder::{
    covariant_derivative, dbar, deriv_t, partial_derivatives, t_stencil, total_energy, CylinderDomain, Pair,
    ThetaFft,
};
use crate::error::{invalid, Error, Result};
use crate::scalar::{Imag, C64};
use crate::target::{norm, HoloChart, TargetManifold, TargetPoint};

/// Largest chart radius (in stereographic/linear chart units) accepted for
/// solver boundary data.
pub const CHART_RADIUS: f64 = 0.5;
const MAX_INNER: usize = 60;

/// A volume density `f(t)` on the cylinder and the bound parameter `η`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeForm {
    /// Density per grid row.
    pub f: Vec<f64>,
    pub eta: f64,
}

impl VolumeForm {
    /// `f(t) = ½·η·e^{|t|−N}`, which is exponentially `η`-bounded.
    pub fn exp_bounded(domain: &CylinderDomain, eta: f64) -> Self {
        let n = domain.half_length;
        VolumeForm { f: (0..domain.n_t).map(|i| 0.5 * eta * (domain.t(i).abs() - n).exp()).collect(), eta }
    }

    /// The flat limit `f ≡ 0` (no vortex coupling).
    pub fn zero(domain: &CylinderDomain) -> Self {
        VolumeForm { f: vec![0.0; domain.n_t], eta: 0.0 }
    }

    pub fn new(f: Vec<f64>, eta: f64) -> Result<Self> {
        if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid("volume density must be finite and nonnegative");
        }
        Ok(VolumeForm { f, eta })
    }

    /// Whether `|f(t)| < η·e^{|t|−N}` on every row.
    pub fn is_exp_bounded(&self, domain: &CylinderDomain) -> bool {
        self.f.len() == domain.n_t
            && (0..domain.n_t).all(|i| self.f[i].abs() < self.eta * (domain.t(i).abs() - domain.half_length).exp())
    }
}

/// Integrates `ψ′ = l·∇H(ψ)` from `ψ(0) = start` with RK4 at step `≤ Δt/4` and
/// samples it onto the grid; the connection is the flat `α = i·l·dθ`.
pub fn floer_cylinder(target: &TargetManifold, l: f64, start: &TargetPoint, domain: CylinderDomain) -> Result<Pair> {
    target.validate(&start.0)?;
    if l == 0.0 || !l.is_finite() {
        return invalid("Floer cylinder needs a finite nonzero speed l");
    }
    if target.is_fixed_point(&start.0, 1e-12) {
        return Err(Error::Degenerate("start is a fixed point: the flow is constant".into()));
    }
    let field = |p: &[f64], out: &mut [f64]| {
        target.grad_h_into(p, out);
        for v in out.iter_mut() {
            *v *= l;
        }
    };
    let times: Vec<f64> = (0..domain.n_t).map(|i| domain.t(i)).collect();
    let path = sample_flow(target, &start.0, &times, domain.dt() / 4.0, field);
    let d = target.real_dim();
    let mut phi = Vec::with_capacity(domain.len() * d);
    for p in &path {
        for _ in 0..domain.n_theta {
            phi.extend_from_slice(p);
        }
    }
    Pair::new(domain, target.clone(), vec![l; domain.len()], phi)
}

/// Integrates `x′ = F(x)` from `x(0) = x0` (RK4, step at most `h`) and returns
/// the state at each requested time (sorted ascending).
pub(crate) fn sample_flow(
    target: &TargetManifold,
    x0: &[f64],
    times: &[f64],
    h: f64,
    field: impl Fn(&[f64], &mut [f64]),
) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); times.len()];
    let split = times.partition_point(|&t| t < 0.0);
    // Forward from 0.
    let mut x = x0.to_vec();
    let mut now = 0.0;
    for k in split..times.len() {
        advance(target, &mut x, times[k] - now, h, &field);
        now = times[k];
        out[k] = x.clone();
    }
    // Backward from 0.
    let mut x = x0.to_vec();
    let mut now = 0.0;
    for k in (0..split).rev() {
        advance(target, &mut x, times[k] - now, h, &field);
        now = times[k];
        out[k] = x.clone();
    }
    out
}

/// RK4 over a signed time span with equal steps of size at most `h`.
pub(crate) fn advance(target: &TargetManifold, x: &mut [f64], span: f64, h: f64, field: &impl Fn(&[f64], &mut [f64])) {
    if span == 0.0 {
        return;
    }
    let steps = (span.abs() / h).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let n = x.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..steps {
        field(x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        field(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        field(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        field(&tmp, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        target.retract_in_place(x);
    }
}

/// Quadrature energy of a Floer cylinder and the closed form `2πl(H₊ − H₋)`
/// evaluated with the end values of `H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FloerEnergy {
    pub quadrature: f64,
    pub closed_form: f64,
}

impl FloerEnergy {
    pub fn relative_gap(&self) -> f64 {
        (self.quadrature - self.closed_form).abs() / self.closed_form.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn floer_energy_identity(pair: &Pair) -> FloerEnergy {
    let dom = pair.domain;
    let l = pair.a.iter().sum::<f64>() / pair.a.len() as f64;
    let h = pair.h_grid();
    let mean_row = |i: usize| h[i * dom.n_theta..(i + 1) * dom.n_theta].iter().sum::<f64>() / dom.n_theta as f64;
    FloerEnergy { quadrature: total_energy(pair), closed_form: 2.0 * PI * l * (mean_row(dom.n_t - 1) - mean_row(0)) }
}

/// H along the θ-averaged path of a pair, with a monotonicity audit.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    /// +1 if `H` is expected to be non-decreasing in `t`, −1 if non-increasing.
    pub direction: i8,
    /// Largest step against the expected direction (0 when monotone).
    pub max_violation: f64,
    pub h_start: f64,
    pub h_end: f64,
}

impl MonotonicityReport {
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// Audits monotonicity of `H(ψ(t))` for a flat holomorphic pair with residue
/// `i·l`: along `ψ′ = l∇H` the Hamiltonian moves in the direction of `sign(l)`.
pub fn h_monotonicity(pair: &Pair) -> MonotonicityReport {
    let dom = pair.domain;
    let l = pair.a.iter().sum::<f64>() / pair.a.len() as f64;
    let dir: i8 = if l >= 0.0 { 1 } else { -1 };
    let h = pair.h_grid();
    let row: Vec<f64> =
        (0..dom.n_t).map(|i| h[i * dom.n_theta..(i + 1) * dom.n_theta].iter().sum::<f64>() / dom.n_theta as f64).collect();
    let max_violation = row.windows(2).map(|w| (-(dir as f64) * (w[1] - w[0])).max(0.0)).fold(0.0, f64::max);
    MonotonicityReport { direction: dir, max_violation, h_start: row[0], h_end: row[dom.n_t - 1] }
}

/// Boundary loops for the coupled solver together with its parameters.
#[derive(Clone, Debug)]
pub struct VortexProblem {
    pub domain: CylinderDomain,
    pub target: TargetManifold,
    pub volume: VolumeForm,
    /// Central constant `c = i·c_r`.
    pub c: Imag,
    /// Residue imposed on the middle circle (balanced temporal gauge).
    pub lambda: Imag,
    /// End loops at `t = −N` and `t = +N` (`n_theta` points each).
    pub left: Vec<TargetPoint>,
    pub right: Vec<TargetPoint>,
    pub tol: f64,
    pub max_outer: usize,
}

impl VortexProblem {
    pub fn new(
        domain: CylinderDomain,
        target: TargetManifold,
        volume: VolumeForm,
        c: Imag,
        lambda: Imag,
        left: Vec<TargetPoint>,
        right: Vec<TargetPoint>,
    ) -> Self {
        VortexProblem { domain, target, volume, c, lambda, left, right, tol: 1e-8, max_outer: 200 }
    }
}

/// Per-iteration diagnostics of [`solve_vortex`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct VortexDiagnostics {
    pub converged: bool,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Sup-norm of the ∂̄ residual on the rows without boundary data.
    pub dbar_residual: f64,
    /// Sup-norm of `∂_t a − f(H − c_r)` on the same rows.
    pub curvature_residual: f64,
    /// `(dbar, curvature)` residuals after every outer iteration.
    pub history: Vec<(f64, f64)>,
    pub fixed_component: String,
}

#[derive(Clone, Debug)]
pub struct VortexSolution {
    pub pair: Pair,
    pub diagnostics: VortexDiagnostics,
}

/// Imposes `a = λ` on the middle circle and integrates the discrete curvature
/// equation (the fourth-order `t`-stencil on rows `0..n−2`) exactly.
struct CurvatureIntegrator {
    lu: LU<f64, Dyn, Dyn>,
    n: usize,
}

impl CurvatureIntegrator {
    fn new(domain: &CylinderDomain) -> Result<Self> {
        let n = domain.n_t;
        let mut m = DMatrix::<f64>::zeros(n, n);
        let s = 1.0 / (12.0 * domain.dt());
        for i in 0..n - 1 {
            for (r, w) in t_stencil(i, n) {
                m[(i, r)] += w * s;
            }
        }
        for (r, w) in middle_weights(n) {
            m[(n - 1, r)] += w;
        }
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::Degenerate("curvature integration matrix is singular".into()));
        }
        Ok(CurvatureIntegrator { lu, n })
    }

    fn solve(&self, pair: &Pair, volume: &VolumeForm, c_r: f64, lambda: f64) -> Vec<f64> {
        let nth = pair.domain.n_theta;
        let d = pair.dim();
        let mut a = vec![0.0; self.n * nth];
        let mut rhs = DVector::<f64>::zeros(self.n);
        for j in 0..nth {
            for i in 0..self.n - 1 {
                let k = i * nth + j;
                rhs[i] = volume.f[i] * (pair.target.h(&pair.phi[k * d..(k + 1) * d]) - c_r);
            }
            rhs[self.n - 1] = lambda;
            let x = self.lu.solve(&rhs).expect("invertible");
            for i in 0..self.n {
                a[i * nth + j] = x[i];
            }
        }
        a
    }
}

/// Interpolation weights for the value at `t = 0` (the middle circle).
pub(crate) fn middle_weights(n: usize) -> Vec<(usize, f64)> {
    if n % 2 == 1 {
        vec![((n - 1) / 2, 1.0)]
    } else {
        let m = n / 2;
        vec![(m - 2, -1.0 / 16.0), (m - 1, 9.0 / 16.0), (m, 9.0 / 16.0), (m + 1, -1.0 / 16.0)]
    }
}

/// Fourier-mode preconditioner: the linearisation of the chart residual at the
/// fixed point with the θ-averaged connection, one real system per
/// `(mode, chart coordinate)`.
///
/// Each mode `(k, q)` of the linear model behaves like `e^{ρt}` with
/// `ρ = −k − λw_q`.  A first-order Cauchy–Riemann system cannot take full
/// Dirichlet data at both ends, so each mode is pinned only at the end it
/// propagates from: modes with `ρ ≤ 0` at `t = −N`, modes with `ρ > 0` at
/// `t = +N`.  The opposite end value of that mode is an unknown, and the
/// equation is enforced on that end row as well.
struct ModePreconditioner {
    lus: Vec<LU<f64, Dyn, Dyn>>,
    /// Per θ-slot and chart coordinate: pinned at the left end?
    pinned_left: Vec<bool>,
    fft: ThetaFft,
    n: usize,
    nth: usize,
    m: usize,
}

impl ModePreconditioner {
    fn new(domain: &CylinderDomain, a_mean: &[f64], weights: &[i64], lambda: f64) -> Result<Self> {
        let n = domain.n_t;
        let nth = domain.n_theta;
        let fft = ThetaFft::new(nth);
        let s = 1.0 / (12.0 * domain.dt());
        let mut lus = Vec::with_capacity(nth * weights.len());
        let mut pinned_left = Vec::with_capacity(nth * weights.len());
        for slot in 0..nth {
            let kappa = fft.derivative_symbol(slot);
            for &w in weights {
                let left = -kappa - lambda * w as f64 <= 0.0;
                // Unknown rows are `off..off + n − 1`.
                let off = usize::from(left);
                let mut m = DMatrix::<f64>::zeros(n - 1, n - 1);
                for r in 0..n - 1 {
                    let g = r + off;
                    for (col, wt) in t_stencil(g, n) {
                        if col >= off && col < off + n - 1 {
                            m[(r, col - off)] += wt * s;
                        }
                    }
                    m[(r, r)] += kappa + a_mean[g] * w as f64;
                }
                let lu = m.lu();
                if !lu.is_invertible() {
                    return Err(Error::Degenerate(format!("mode {slot} linearisation is singular")));
                }
                lus.push(lu);
                pinned_left.push(left);
            }
        }
        Ok(ModePreconditioner { lus, pinned_left, fft, n, nth, m: weights.len() })
    }

    /// Fourier transform in θ of every row (layout `(row, slot, coord)`).
    fn transform(&self, res: &[C64]) -> Vec<C64> {
        let (nth, m) = (self.nth, self.m);
        let mut hat = vec![C64::new(0.0, 0.0); res.len()];
        let mut buf = vec![C64::new(0.0, 0.0); nth];
        for r in 0..self.n {
            for q in 0..m {
                for j in 0..nth {
                    buf[j] = res[(r * nth + j) * m + q];
                }
                self.fft.forward(&mut buf);
                for j in 0..nth {
                    hat[(r * nth + j) * m + q] = buf[j];
                }
            }
        }
        hat
    }

    /// Sup-norm (chart units) of the residual on the two end rows restricted
    /// to the modes that are unknowns there.
    fn free_end_residual(&self, hat: &[C64]) -> f64 {
        let (n, nth, m) = (self.n, self.nth, self.m);
        let mut sup: f64 = 0.0;
        let mut buf = vec![C64::new(0.0, 0.0); nth];
        for (row, free_if_left_pinned) in [(0, false), (n - 1, true)] {
            for q in 0..m {
                for j in 0..nth {
                    let keep = self.pinned_left[j * m + q] == free_if_left_pinned;
                    buf[j] = if keep { hat[(row * nth + j) * m + q] } else { C64::new(0.0, 0.0) };
                }
                self.fft.inverse(&mut buf);
                sup = buf.iter().fold(sup, |s, v| s.max(v.norm()));
            }
        }
        sup
    }

    /// Returns `δ` with `L δ = −R` on every row (zero on pinned end values).
    fn apply(&self, hat: &[C64]) -> Vec<C64> {
        let (n, nth, m) = (self.n, self.nth, self.m);
        let mut sol = vec![C64::new(0.0, 0.0); hat.len()];
        let (mut re, mut im) = (DVector::<f64>::zeros(n - 1), DVector::<f64>::zeros(n - 1));
        for j in 0..nth {
            for q in 0..m {
                let off = usize::from(self.pinned_left[j * m + q]);
                for r in 0..n - 1 {
                    let v = -hat[((r + off) * nth + j) * m + q];
                    re[r] = v.re;
                    im[r] = v.im;
                }
                let lu = &self.lus[j * m + q];
                let xr = lu.solve(&re).expect("invertible");
                let xi = lu.solve(&im).expect("invertible");
                for r in 0..n - 1 {
                    sol[((r + off) * nth + j) * m + q] = C64::new(xr[r], xi[r]);
                }
            }
        }
        let mut buf = vec![C64::new(0.0, 0.0); nth];
        for r in 0..n {
            for q in 0..m {
                for j in 0..nth {
                    buf[j] = sol[(r * nth + j) * m + q];
                }
                self.fft.inverse(&mut buf);
                for j in 0..nth {
                    sol[(r * nth + j) * m + q] = buf[j];
                }
            }
        }
        sol
    }
}

/// Sup-norm of `∂_t a − f(H(φ) − c_r)` over rows `1..n−1` (independent finite
/// differences of `a`).
pub fn curvature_residual(pair: &Pair, volume: &VolumeForm, c: Imag) -> f64 {
    let dom = pair.domain;
    let da = deriv_t(&pair.a, dom.n_t, dom.n_theta, dom.dt());
    let h = pair.h_grid();
    let mut m: f64 = 0.0;
    for i in 1..dom.n_t - 1 {
        for j in 0..dom.n_theta {
            let k = i * dom.n_theta + j;
            m = m.max((da[k] - volume.f[i] * (h[k] - c.im())).abs());
        }
    }
    m
}

/// Solves the coupled system by alternating an exact integration of the
/// curvature equation (given `φ`) with a chord/Newton solve of the ∂̄-equation
/// (given `a`) in a holomorphic chart around the fixed point the boundary data
/// sits near.  The end loops supply, in the chart, the Fourier modes that
/// propagate into the cylinder from each end (see [`ModePreconditioner`]); the
/// remaining end modes are solved for, so the returned end loops agree with the
/// input loops only in their incoming halves.  The ∂̄-equation holds on all
/// interior rows and on the free modes of the end rows; the curvature equation
/// holds on every row but the last.
pub fn solve_vortex(problem: &VortexProblem) -> Result<VortexSolution> {
    let dom = problem.domain;
    let target = &problem.target;
    let (n, nth, d) = (dom.n_t, dom.n_theta, target.real_dim());
    if problem.left.len() != nth || problem.right.len() != nth {
        return invalid(format!("boundary loops must have n_theta = {nth} points"));
    }
    if problem.volume.f.len() != n {
        return invalid(format!("volume density must have n_t = {n} values"));
    }
    if !(problem.tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let (component, _) = target.nearest_fixed_component(&problem.left[0].0);
    let chart = target.chart_at(&component)?;
    let m = chart.dim();
    let mut zeta = vec![C64::new(0.0, 0.0); n * nth * m];
    for (row, loop_) in [(0, &problem.left), (n - 1, &problem.right)] {
        for (j, p) in loop_.iter().enumerate() {
            target.validate(&p.0)?;
            let (comp, _) = target.nearest_fixed_component(&p.0);
            let z = &mut zeta[(row * nth + j) * m..(row * nth + j + 1) * m];
            chart.to_chart(&p.0, z);
            let r = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if comp.label != component.label || r > CHART_RADIUS {
                return Err(Error::Hypothesis(format!(
                    "boundary point {j} of row {row} is outside the contraction basin around {}",
                    component.label
                )));
            }
        }
    }
    let mut pair = Pair { domain: dom, target: target.clone(), a: vec![problem.lambda.im(); n * nth], phi: vec![0.0; n * nth * d] };
    write_phi(&chart, &zeta, &mut pair.phi, m, d);
    let integrator = CurvatureIntegrator::new(&dom)?;
    let c_r = problem.c.im();
    let inner_tol = 0.01 * problem.tol;
    let mut diag = VortexDiagnostics { fixed_component: component.label.clone(), ..Default::default() };
    for outer in 0..problem.max_outer {
        pair.a = integrator.solve(&pair, &problem.volume, c_r, problem.lambda.im());
        let a_mean: Vec<f64> = (0..n).map(|i| pair.a[i * nth..(i + 1) * nth].iter().sum::<f64>() / nth as f64).collect();
        let pre = ModePreconditioner::new(&dom, &a_mean, &chart.weights, problem.lambda.im())?;
        let mut best = f64::INFINITY;
        let mut stalls = 0;
        for _ in 0..MAX_INNER {
            let (res, interior) = chart_residual(&pair, &chart);
            let hat = pre.transform(&res);
            let sup = interior.max(pre.free_end_residual(&hat));
            if sup < inner_tol {
                break;
            }
            if sup > 0.9 * best {
                stalls += 1;
                if stalls >= 4 {
                    break;
                }
            } else {
                stalls = 0;
            }
            best = best.min(sup);
            let delta = pre.apply(&hat);
            for (z, dz) in zeta.iter_mut().zip(&delta) {
                *z += dz;
            }
            write_phi(&chart, &zeta, &mut pair.phi, m, d);
            diag.inner_iterations += 1;
        }
        let rd = dbar(&pair).sup_norm_interior();
        let rc = curvature_residual(&pair, &problem.volume, problem.c);
        diag.history.push((rd, rc));
        diag.outer_iterations = outer + 1;
        diag.dbar_residual = rd;
        diag.curvature_residual = rc;
        if rd < problem.tol && rc < problem.tol {
            diag.converged = true;
            break;
        }
        if !(rd.is_finite() && rc.is_finite()) {
            break;
        }
    }
    Ok(VortexSolution { pair, diagnostics: diag })
}

fn write_phi(chart: &HoloChart, zeta: &[C64], phi: &mut [f64], m: usize, d: usize) {
    for (z, p) in zeta.chunks(m).zip(phi.chunks_mut(d)) {
        chart.from_chart(z, p);
    }
}

/// ∂̄ residual pushed into chart coordinates on every row, and its extrinsic
/// sup-norm over the interior rows.
fn chart_residual(pair: &Pair, chart: &HoloChart) -> (Vec<C64>, f64) {
    let res = dbar(pair);
    let dom = pair.domain;
    let (nth, d, m) = (dom.n_theta, pair.dim(), chart.dim());
    let mut out = vec![C64::new(0.0, 0.0); dom.n_t * nth * m];
    let mut sup: f64 = 0.0;
    for i in 0..dom.n_t {
        for j in 0..nth {
            let k = i * nth + j;
            let v = &res.values[k * d..(k + 1) * d];
            if i > 0 && i + 1 < dom.n_t {
                sup = sup.max(norm(v));
            }
            chart.push_tangent(&pair.phi[k * d..(k + 1) * d], v, &mut out[k * m..(k + 1) * m]);
        }
    }
    (out, sup)
}

/// Boundary loops sampled from the linear model solution around a fixed
/// component: in the holomorphic chart each mode `(k, q)` evolves as
/// `e^{ρt}e^{ikθ}` with `ρ = −k − λw_q`.  Modes decaying in `+t` (`ρ < 0`) are
/// anchored at the left end, growing ones at the right end, neutral ones are
/// constant.  The returned loops are therefore compatible with a genuine
/// solution up to the (small) nonlinear and vortex corrections.
pub fn boundary_from_modes(
    target: &TargetManifold,
    component_label: &str,
    lambda: Imag,
    domain: &CylinderDomain,
    modes: &[(i64, usize, C64)],
) -> Result<(Vec<TargetPoint>, Vec<TargetPoint>)> {
    let comp = target
        .fixed_components()
        .into_iter()
        .find(|c| c.label == component_label)
        .ok_or_else(|| Error::InvalidInput(format!("unknown fixed component '{component_label}'")))?;
    let chart = target.chart_at(&comp)?;
    let m = chart.dim();
    let big_n = domain.half_length;
    let value_at = |t: f64, theta: f64| -> TargetPoint {
        let mut z = vec![C64::new(0.0, 0.0); m];
        for &(k, q, c) in modes {
            let rho = -(k as f64) - lambda.im() * chart.weights[q] as f64;
            let anchor = if rho < 0.0 { -big_n } else if rho > 0.0 { big_n } else { t };
            z[q] += c * (rho * (t - anchor)).exp() * C64::from_polar(1.0, k as f64 * theta);
        }
        let mut p = vec![0.0; target.real_dim()];
        chart.from_chart(&z, &mut p);
        TargetPoint(p)
    };
    let left = (0..domain.n_theta).map(|j| value_at(-big_n, domain.theta(j))).collect();
    let right = (0..domain.n_theta).map(|j| value_at(big_n, domain.theta(j))).collect();
    Ok((left, right))
}

/// The three terms of the Yang–Mills–Higgs functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YmhTerms {
    /// `‖F_A‖²` with the volume pairing `∫∫ (∂_t a)²/f`.
    pub curvature: f64,
    /// `‖d_Aφ‖² = ∫∫ (|D_t|² + |D_θ|²)`.
    pub dirichlet: f64,
    /// `‖μ(φ) − c‖² = ∫∫ f·(H − c_r)²`.
    pub moment: f64,
    pub total: f64,
}

/// Yang–Mills–Higgs functional by quadrature; the curvature is `∂_t a` by
/// finite differences.  Where `f = 0` the curvature must vanish (the flat
/// limit) and contributes nothing.
pub fn ymh(pair: &Pair, volume: &VolumeForm, c: Imag) -> Result<YmhTerms> {
    let dom = pair.domain;
    if volume.f.len() != dom.n_t {
        return invalid("volume density length does not match the grid");
    }
    let da = deriv_t(&pair.a, dom.n_t, dom.n_theta, dom.dt());
    let h = pair.h_grid();
    let mut curv_rows = vec![0.0; dom.n_t];
    let mut mom_rows = vec![0.0; dom.n_t];
    for i in 0..dom.n_t {
        let f = volume.f[i];
        for j in 0..dom.n_theta {
            let k = i * dom.n_theta + j;
            if f > 0.0 {
                curv_rows[i] += da[k] * da[k] / f;
            } else if da[k].abs() > 1e-9 {
                return Err(Error::Degenerate(format!("curvature {} where the volume density vanishes", da[k])));
            }
            mom_rows[i] += f * (h[k] - c.im()).powi(2);
        }
        curv_rows[i] *= dom.dtheta();
        mom_rows[i] *= dom.dtheta();
    }
    let last = dom.n_t - 1;
    let curvature = crate::cylinder::integrate_rows(&curv_rows, dom.dt(), 0, last);
    let moment = crate::cylinder::integrate_rows(&mom_rows, dom.dt(), 0, last);
    let dirichlet = 2.0 * total_energy(pair);
    Ok(YmhTerms { curvature, dirichlet, moment, total: curvature + dirichlet + moment })
}

/// Residue data at the two ends of a cylinder viewed as a twice-punctured
/// sphere: `Res = i·r` and the limit value `H` of the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EndData {
    pub residue_plus: Imag,
    pub h_plus: f64,
    pub residue_minus: Imag,
    pub h_minus: f64,
}

impl EndData {
    /// Residues and limit values read off the end circles: the residue at
    /// `t = +∞` is `i·ā(N)`, at `t = −∞` it is `−i·ā(−N)` (θ-averages).
    pub fn from_pair(pair: &Pair) -> Self {
        let dom = pair.domain;
        let h = pair.h_grid();
        let nth = dom.n_theta;
        let mean = |v: &[f64], i: usize| v[i * nth..(i + 1) * nth].iter().sum::<f64>() / nth as f64;
        let last = dom.n_t - 1;
        EndData {
            residue_plus: Imag(mean(&pair.a, last)),
            h_plus: mean(&h, last),
            residue_minus: Imag(-mean(&pair.a, 0)),
            h_minus: mean(&h, 0),
        }
    }

    /// `Σ_x 2π·Res(x)·μ(φ(x))` (a real number since `Res` and `μ` are imaginary).
    pub fn residue_moment_term(&self) -> f64 {
        -2.0 * PI * (self.residue_plus.im() * self.h_plus + self.residue_minus.im() * self.h_minus)
    }
}

/// Two evaluations of the integral of the pulled-back minimal coupling form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmegaIntegral {
    /// `½‖d_Aφ‖² + ∫∫ H·∂_t a` (+ residue terms): the closed formula, valid for
    /// holomorphic pairs.
    pub formula: f64,
    /// Direct quadrature of `ω(∂_θφ, ∂_tφ) + ∂_t(a·H)` (+ residue terms).
    pub direct: f64,
}

/// Integral of the minimal coupling form `ω − d(α·μ)` pulled back by the pair.
///
/// With `ends = Some(..)` the cylinder is read as a twice-punctured sphere and
/// the residue terms `Σ 2π Res(x) μ(φ(x))` are added to both routes, giving
/// the integral of the extended class.
pub fn integrate_omega_a(pair: &Pair, ends: Option<&EndData>) -> OmegaIntegral {
    let dom = pair.domain;
    let (nth, d) = (dom.n_theta, pair.dim());
    let h = pair.h_grid();
    let da = deriv_t(&pair.a, dom.n_t, nth, dom.dt());
    let ah: Vec<f64> = pair.a.iter().zip(&h).map(|(a, h)| a * h).collect();
    let dah = deriv_t(&ah, dom.n_t, nth, dom.dt());
    let (pt, pth) = partial_derivatives(pair);
    let mut direct_rows = vec![0.0; dom.n_t];
    let mut hda_rows = vec![0.0; dom.n_t];
    for i in 0..dom.n_t {
        for j in 0..nth {
            let k = i * nth + j;
            let p = &pair.phi[k * d..(k + 1) * d];
            direct_rows[i] += pair.target.omega(p, &pth[k * d..(k + 1) * d], &pt[k * d..(k + 1) * d]) + dah[k];
            hda_rows[i] += h[k] * da[k];
        }
        direct_rows[i] *= dom.dtheta();
        hda_rows[i] *= dom.dtheta();
    }
    let last = dom.n_t - 1;
    let extra = ends.map_or(0.0, |e| e.residue_moment_term());
    let direct = crate::cylinder::integrate_rows(&direct_rows, dom.dt(), 0, last) + extra;
    let formula = total_energy(pair) + crate::cylinder::integrate_rows(&hda_rows, dom.dt(), 0, last) + extra;
    OmegaIntegral { formula, direct }
}

/// Both sides of the Yang–Mills–Higgs identity on a capped cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YmhIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// `∫ Φ*[ω(A)]` over the capped cylinder.
    pub omega_integral: f64,
    /// Chern–Weil degree (with residue corrections) of the capped bundle.
    pub degree: f64,
    pub ends: EndData,
    pub terms: YmhTerms,
}

/// Evaluates `YMH_c = 2∫Φ*[ω(A)] + 4πi·c·deg − 4π Σ_x Res(x)(μ(φ(x)) − c)`
/// for a solution of both equations on a cylinder capped at its two ends.
///
/// The closed surface is the cylinder with its ends as punctures; residues and
/// limit values are read off the end circles ([`EndData::from_pair`]).  The
/// right-hand side never uses the curvature or moment-map terms, so agreement
/// with the left-hand side is a genuine check of the identity.
pub fn ymh_identity_check(pair: &Pair, volume: &VolumeForm, c: Imag) -> Result<YmhIdentity> {
    let terms = ymh(pair, volume, c)?;
    let ends = EndData::from_pair(pair);
    let dom = pair.domain;
    let (nth, d) = (dom.n_theta, pair.dim());
    // ∫∫ ω(∂_θφ, ∂_tφ) plus the boundary circles of a·H: the cylinder integral
    // of the minimal coupling form via Stokes.
    let (pt, pth) = partial_derivatives(pair);
    let mut rows = vec![0.0; dom.n_t];
    for i in 0..dom.n_t {
        for j in 0..nth {
            let k = i * nth + j;
            let p = &pair.phi[k * d..(k + 1) * d];
            rows[i] += pair.target.omega(p, &pth[k * d..(k + 1) * d], &pt[k * d..(k + 1) * d]);
        }
        rows[i] *= dom.dtheta();
    }
    let s = crate::cylinder::integrate_rows(&rows, dom.dt(), 0, dom.n_t - 1);
    let h = pair.h_grid();
    let circle = |i: usize| (0..nth).map(|j| pair.a[i * nth + j] * h[i * nth + j]).sum::<f64>() * dom.dtheta();
    let cylinder_part = s + circle(dom.n_t - 1) - circle(0);
    let omega_integral = cylinder_part + ends.residue_moment_term();
    let degree = connections::cylinder_degree(pair).degree;
    let c_r = c.im();
    // 4πi·c·deg with c = i·c_r, and −4πΣ Res(μ − c) = 4πΣ r_x (H_x − c_r).
    let degree_term = -4.0 * PI * c_r * degree;
    let residue_term = 4.0
        * PI
        * (ends.residue_plus.im() * (ends.h_plus - c_r) + ends.residue_minus.im() * (ends.h_minus - c_r));
    let rhs = 2.0 * omega_integral + degree_term + residue_term;
    let lhs = terms.total;
    let gap = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok(YmhIdentity { lhs, rhs, gap, omega_integral, degree, ends, terms })
}

/// The covariant derivative of a pair split into its θ-component, used by
/// examples that need `D_θ` directly.
pub fn d_theta_sup_norm(pair: &Pair) -> f64 {
    let cd = covariant_derivative(pair);
    cd.d_theta.chunks(cd.dim).map(norm).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn middle_weights_reproduce_cubics() {
        for n in [9usize, 10] {
            let dom = CylinderDomain::new(2.0, n, 8).unwrap();
            let f = |t: f64| 0.3 + t - 2.0 * t * t + 0.7 * t.powi(3);
            let v: f64 = middle_weights(n).iter().map(|&(r, w)| w * f(dom.t(r))).sum();
            assert!((v - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn volume_form_bound_flag() {
        let dom = CylinderDomain::new(5.0, 11, 8).unwrap();
        let v = VolumeForm::exp_bounded(&dom, 1e-3);
        assert!(v.is_exp_bounded(&dom));
        let w = VolumeForm::new(vec![1.0; 11], 1e-3).unwrap();
        assert!(!w.is_exp_bounded(&dom));
        assert!(VolumeForm::new(vec![-1.0], 1.0).is_err());
    }
}
