//! Discrete exponential-decay machinery: the recursion lemmas, exponential
//! rate fitting, and the decomposition `φ = e^{−λ_cr θ} exp_ψ(e^{λ_cr θ} φ₀)` of
//! long cylinders into a path `ψ` and a balanced oscillating part `φ₀`.

use rand::Rng;
use serde::Serialize;

use crate::cylinder::{covariant_derivative, deriv_t, CylinderDomain, Pair};
use crate::error::{invalid, Error, Result};
use crate::scalar::{q_to_f64, Imag, ImagRational};
use crate::target::{norm, TargetManifold, TargetPoint};
use crate::vortex::middle_weights;

const SLACK: f64 = 1e-12;

/// `ξ(γ) = (1 + √(1 − 4γ²))/(2γ)`, the root `> 1` of `γ(ξ + 1/ξ) = 1`.
pub fn xi_of_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return invalid(format!("γ = {gamma} must lie in (0, 1/2)"));
    }
    Ok((1.0 + (1.0 - 4.0 * gamma * gamma).sqrt()) / (2.0 * gamma))
}

/// Outcome of a recursion-lemma audit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursionReport {
    /// Whether the hypothesis holds (otherwise the conclusion is not checked).
    pub applicable: bool,
    /// Indices where the hypothesis fails.
    pub hypothesis_violations: Vec<i64>,
    /// Indices where the conclusion fails.
    pub violations: Vec<i64>,
    /// `max_k (x_k − bound_k)`; nonpositive when the conclusion holds.
    pub max_slack: f64,
}

impl RecursionReport {
    pub fn holds(&self) -> bool {
        self.applicable && self.violations.is_empty()
    }
}

/// Checks `x_k ≤ x_0 ξ^{−k} + x_N ξ^{−(N−k)}` for a nonnegative sequence
/// `x_0..x_N` with `x_k ≤ γ(x_{k−1} + x_{k+1})` on the interior.
pub fn recursion_bound_check(x: &[f64], gamma: f64) -> Result<RecursionReport> {
    let xi = xi_of_gamma(gamma)?;
    if x.len() < 2 || x.iter().any(|v| !(*v >= 0.0)) {
        return invalid("sequence needs at least two nonnegative entries");
    }
    let n = x.len() - 1;
    let scale = x.iter().fold(0.0f64, |m, v| m.max(*v));
    let tol = SLACK * (1.0 + scale);
    let hypothesis_violations: Vec<i64> =
        (1..n).filter(|&k| x[k] > gamma * (x[k - 1] + x[k + 1]) + tol).map(|k| k as i64).collect();
    if !hypothesis_violations.is_empty() {
        return Ok(RecursionReport { applicable: false, hypothesis_violations, violations: vec![], max_slack: f64::NAN });
    }
    let mut max_slack = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for k in 0..=n {
        let bound = x[0] * xi.powi(-(k as i32)) + x[n] * xi.powi(-((n - k) as i32));
        let s = x[k] - bound;
        max_slack = max_slack.max(s);
        if s > tol {
            violations.push(k as i64);
        }
    }
    Ok(RecursionReport { applicable: true, hypothesis_violations, violations, max_slack })
}

/// Random sequence satisfying the recursion hypothesis: pick the last two
/// entries and solve `x_{k−1} ≥ x_k/γ − x_{k+1}` backwards with random
/// nonnegative excess (sometimes zero, giving equality); the result is
/// reversed half of the time.
pub fn random_admissible_sequence(rng: &mut impl Rng, n: usize, gamma: f64) -> Vec<f64> {
    let mut x = vec![0.0; n + 1];
    x[n] = rng.gen_range(0.0..1.0);
    if n >= 1 {
        x[n - 1] = rng.gen_range(0.0..1.0);
    }
    for k in (1..n).rev() {
        let floor = (x[k] / gamma - x[k + 1]).max(0.0);
        let excess = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..0.5) * (floor + x[k]) };
        x[k - 1] = floor + excess;
    }
    if rng.gen_bool(0.5) {
        x.reverse();
    }
    x
}

/// Parameters of the perturbed recursion lemma.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbedParams {
    pub gamma: f64,
    pub chi: f64,
    pub k: f64,
    pub eps: f64,
}

/// Outcome of [`perturbed_recursion_bound_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbedReport {
    pub applicable: bool,
    /// `σ = min{χ, ln ξ}`.
    pub sigma: f64,
    /// Violations of `x_j ≤ (10e^{2χ}K/ε + x_{−N+1} + x_{N−1}) e^{−σ(N−1−|j|)}`.
    pub violations: Vec<i64>,
    /// Violations of the same bound with exponent `σ(N − |j|)`; this form can
    /// fail at `j = ±(N−1)` and is reported for information only.
    pub literal_violations: Vec<i64>,
    pub max_ratio: f64,
}

/// Audits the perturbed recursion lemma for `x, z` indexed `−N..=N` (slices
/// of length `2N + 1`): verifies the hypotheses
/// `z_j ≤ K e^{−χ(N−|j|)}` and "if `Σ_{|i−j|≤2} z_i ≤ ε Σ_{|i−j|≤2} x_i` then
/// `x_j ≤ γ(x_{j−1} + x_{j+1})`" and then the conclusion for `|j| ≤ N − 1`.
pub fn perturbed_recursion_bound_check(x: &[f64], z: &[f64], p: PerturbedParams) -> Result<PerturbedReport> {
    let xi = xi_of_gamma(p.gamma)?;
    if x.len() != z.len() || x.len() < 5 || x.len() % 2 == 0 {
        return invalid("x and z must have equal odd length 2N + 1 ≥ 5");
    }
    if x.iter().chain(z).any(|v| !(*v >= 0.0)) || !(p.chi > 0.0 && p.k > 0.0 && p.eps > 0.0) {
        return invalid("sequences must be nonnegative and χ, K, ε positive");
    }
    let n = (x.len() / 2) as i64;
    let at = |v: &[f64], j: i64| v[(j + n) as usize];
    let sigma = p.chi.min(xi.ln());
    let scale = x.iter().chain(z).fold(0.0f64, |m, v| m.max(*v));
    let tol = SLACK * (1.0 + scale);
    let mut applicable = (-n..=n).all(|j| at(z, j) <= p.k * (-p.chi * (n - j.abs()) as f64).exp() + tol);
    for j in -n + 2..=n - 2 {
        let zs: f64 = (j - 2..=j + 2).map(|i| at(z, i)).sum();
        let xs: f64 = (j - 2..=j + 2).map(|i| at(x, i)).sum();
        if zs <= p.eps * xs && at(x, j) > p.gamma * (at(x, j - 1) + at(x, j + 1)) + tol {
            applicable = false;
        }
    }
    let c = 10.0 * (2.0 * p.chi).exp() * p.k / p.eps + at(x, -n + 1) + at(x, n - 1);
    let mut report = PerturbedReport { applicable, sigma, violations: vec![], literal_violations: vec![], max_ratio: 0.0 };
    if !applicable {
        return Ok(report);
    }
    for j in -n + 1..=n - 1 {
        let d = (n - j.abs()) as f64;
        let bound = c * (-sigma * (d - 1.0)).exp();
        let literal = c * (-sigma * d).exp();
        if at(x, j) > bound + tol {
            report.violations.push(j);
        }
        if at(x, j) > literal + tol {
            report.literal_violations.push(j);
        }
        if bound > 0.0 {
            report.max_ratio = report.max_ratio.max(at(x, j) / bound);
        }
    }
    Ok(report)
}

/// Random `(x, z)` satisfying both hypotheses of the perturbed lemma: `z` is a
/// random fraction of its envelope, `x` starts as a recursion-admissible
/// sequence with a few entries raised to the size of the local forcing, and is
/// then repaired (entries lowered) until the conditional hypothesis holds.
pub fn random_perturbed_instance(rng: &mut impl Rng, n: usize, p: PerturbedParams) -> (Vec<f64>, Vec<f64>) {
    let len = 2 * n + 1;
    let ni = n as i64;
    let z: Vec<f64> = (0..len)
        .map(|i| {
            let j = i as i64 - ni;
            p.k * (-p.chi * (ni - j.abs()) as f64).exp() * rng.gen_range(0.0..1.0)
        })
        .collect();
    let mut x = random_admissible_sequence(rng, 2 * n, p.gamma);
    let top = x.iter().fold(0.0f64, |m, v| m.max(*v)).max(1e-300);
    let target = rng.gen_range(0.1..1.0);
    for v in x.iter_mut() {
        *v *= target / top;
    }
    for _ in 0..rng.gen_range(0..=n / 2) {
        let i = rng.gen_range(2..len - 2);
        let zs: f64 = z[i - 2..=i + 2].iter().sum();
        x[i] = x[i].max(zs / p.eps * rng.gen_range(0.2..1.0));
    }
    for _ in 0..10 * len {
        let mut changed = false;
        for i in 2..len - 2 {
            let zs: f64 = z[i - 2..=i + 2].iter().sum();
            let xs: f64 = x[i - 2..=i + 2].iter().sum();
            let cap = p.gamma * (x[i - 1] + x[i + 1]);
            if zs <= p.eps * xs && x[i] > cap {
                x[i] = cap;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (x, z)
}

/// Options for [`center_decomposition`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionOptions {
    /// Smallness threshold for `sup|d_αφ|` and `sup|α − λ_cr dθ|`.
    pub eps: f64,
    pub max_iterations: usize,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions { eps: 0.05, max_iterations: 50 }
    }
}

/// `φ(t, θ) = e^{−λ_cr θ} exp_{ψ(t)}(e^{λ_cr θ} φ₀(t, θ))` with the balancing
/// `∫ e^{λ_cr θ} φ₀ dθ = 0` taken over the `q`-fold cover when `λ_cr = ip/q`.
///
/// `φ₀` is stored in ambient coordinates on the grid of the pair.  For
/// `λ_cr = 0` it is tangent at `ψ(t)`; in general the untwisted vector is
/// tangent at `e^{−λ_cr θ}ψ(t)`, which equals `ψ(t)` whenever `ψ(t)` is fixed by
/// the whole circle.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub domain: CylinderDomain,
    pub psi: Vec<TargetPoint>,
    pub phi0: Vec<f64>,
    pub lambda_cr: ImagRational,
    /// Balanced residue minus `λ_cr`.
    pub lambda: Imag,
    /// `β = a − λ − λ_cr` per grid point.
    pub beta: Vec<f64>,
    /// Largest `|∫ e^{λ_cr θ}φ₀ dθ|/2π` over rows.
    pub balancing_defect: f64,
    /// Largest distance from `ψ(t)` to the fixed set of `e^{2πλ_cr}`.
    pub fixed_set_defect: f64,
}

impl Decomposition {
    /// `sup_θ |φ₀(t, θ)|` per row.
    pub fn phi0_row_sup(&self) -> Vec<f64> {
        let (nth, d) = (self.domain.n_theta, self.phi0.len() / self.domain.len());
        (0..self.domain.n_t)
            .map(|i| (0..nth).map(|j| norm(&self.phi0[(i * nth + j) * d..(i * nth + j + 1) * d])).fold(0.0, f64::max))
            .collect()
    }
}

/// The pair pulled back by the `q`-fold cover `(t, θ) ↦ (qt, qθ)` and gauged by
/// `e^{ipθ}`, where `λ_cr = ip/q`.  The result lives on
/// `[−N/q, N/q] × S¹` with `q·n_θ` columns, so that its column `j` lies over
/// column `j mod n_θ` of the input; its residue is that of the input times `q`
/// minus `p`.
pub fn cover_pair(pair: &Pair, lambda_cr: ImagRational) -> Result<Pair> {
    let (p, q) = (lambda_cr.numer(), lambda_cr.denom() as usize);
    let dom = pair.domain;
    let cover = CylinderDomain::new(dom.half_length / q as f64, dom.n_t, dom.n_theta * q)?;
    let d = pair.dim();
    let mut a = Vec::with_capacity(cover.len());
    let mut phi = Vec::with_capacity(cover.len() * d);
    let mut buf = vec![0.0; d];
    for i in 0..cover.n_t {
        for j in 0..cover.n_theta {
            a.push(q as f64 * pair.a_at(i, j % dom.n_theta) - p as f64);
            pair.target.act_into(p as f64 * cover.theta(j), pair.point(i, j % dom.n_theta), &mut buf);
            phi.extend_from_slice(&buf);
        }
    }
    Pair::new(cover, pair.target.clone(), a, phi)
}

/// Decomposes a pair near a critical residue `λ_cr` (see [`Decomposition`]).
///
/// `ψ(t)` is the mean (Linear) or the Riemannian centre of mass (Sphere) of the
/// row of the covered, gauged pair, found by at most `max_iterations`
/// fixed-point iterations of "average the log-map images".
pub fn center_decomposition(pair: &Pair, lambda_cr: ImagRational, opts: DecompositionOptions) -> Result<Decomposition> {
    let dom = pair.domain;
    let target = &pair.target;
    let lcr = q_to_f64(lambda_cr.0);
    let cd = covariant_derivative(pair);
    let dsup = cd.d_t.chunks(cd.dim).chain(cd.d_theta.chunks(cd.dim)).map(norm).fold(0.0, f64::max);
    let asup = pair.a.iter().map(|a| (a - lcr).abs()).fold(0.0, f64::max);
    if dsup >= opts.eps || asup >= opts.eps {
        return Err(Error::Hypothesis(format!(
            "small-energy hypotheses fail: sup|d_αφ| = {dsup:.3e}, sup|α − λ_cr dθ| = {asup:.3e}, ε = {}",
            opts.eps
        )));
    }
    let cover = cover_pair(pair, lambda_cr)?;
    let (base_psi, v) = decompose_rows(&cover, opts.max_iterations)?;
    let d = pair.dim();
    let nth = dom.n_theta;
    let cn = cover.domain.n_theta;
    let p = lambda_cr.numer() as f64;
    let mut phi0 = vec![0.0; dom.len() * d];
    for i in 0..dom.n_t {
        for j in 0..nth {
            let src = &v[(i * cn + j) * d..(i * cn + j + 1) * d];
            target.act_into(-p * cover.domain.theta(j), src, &mut phi0[(i * nth + j) * d..(i * nth + j + 1) * d]);
        }
    }
    let mut balancing_defect: f64 = 0.0;
    for i in 0..dom.n_t {
        let mut s = vec![0.0; d];
        for j in 0..cn {
            for c in 0..d {
                s[c] += v[(i * cn + j) * d + c];
            }
        }
        balancing_defect = balancing_defect.max(norm(&s) / cn as f64);
    }
    let mut buf = vec![0.0; d];
    let fixed_set_defect = base_psi
        .iter()
        .map(|x| {
            target.act_into(2.0 * std::f64::consts::PI * lcr, &x.0, &mut buf);
            target.dist(&x.0, &buf)
        })
        .fold(0.0, f64::max);
    let mid: f64 = middle_weights(dom.n_t)
        .iter()
        .map(|&(r, w)| w * pair.a[r * nth..(r + 1) * nth].iter().sum::<f64>() / nth as f64)
        .sum();
    let lambda = mid - lcr;
    let beta = pair.a.iter().map(|a| a - mid).collect();
    Ok(Decomposition {
        domain: dom,
        psi: base_psi,
        phi0,
        lambda_cr,
        lambda: Imag(lambda),
        beta,
        balancing_defect,
        fixed_set_defect,
    })
}

/// Row-wise centre and log-map images for a pair with zero critical residue.
fn decompose_rows(pair: &Pair, max_iterations: usize) -> Result<(Vec<TargetPoint>, Vec<f64>)> {
    let dom = pair.domain;
    let target = &pair.target;
    let (nth, d) = (dom.n_theta, pair.dim());
    let mut psi = Vec::with_capacity(dom.n_t);
    let mut v = vec![0.0; dom.len() * d];
    for i in 0..dom.n_t {
        let pts: Vec<&[f64]> = (0..nth).map(|j| pair.point(i, j)).collect();
        let c = center_of_mass(target, &pts, max_iterations)?;
        for (j, p) in pts.iter().enumerate() {
            target.log_into(&c, p, &mut v[(i * nth + j) * d..(i * nth + j + 1) * d]);
        }
        psi.push(TargetPoint(c));
    }
    Ok((psi, v))
}

/// Mean (flat) or Riemannian centre of mass.
pub fn center_of_mass(target: &TargetManifold, pts: &[&[f64]], max_iterations: usize) -> Result<Vec<f64>> {
    let d = target.real_dim();
    let n = pts.len() as f64;
    let mut c = vec![0.0; d];
    for p in pts {
        for k in 0..d {
            c[k] += p[k] / n;
        }
    }
    if let TargetManifold::Linear { .. } = target {
        return Ok(c);
    }
    let diam = pts
        .iter()
        .flat_map(|p| pts.iter().map(move |q| (*p, *q)))
        .map(|(p, q)| target.dist(p, q))
        .fold(0.0, f64::max);
    if diam > std::f64::consts::FRAC_PI_2 {
        return Err(Error::Hypothesis(format!("loop diameter {diam:.3} exceeds half the injectivity radius")));
    }
    target.retract_in_place(&mut c);
    let mut step = vec![0.0; d];
    let mut buf = vec![0.0; d];
    for _ in 0..max_iterations {
        step.iter_mut().for_each(|s| *s = 0.0);
        for p in pts {
            target.log_into(&c, p, &mut buf);
            for k in 0..d {
                step[k] += buf[k] / n;
            }
        }
        let size = norm(&step);
        let mut next = vec![0.0; d];
        target.exp_into(&c, &step, &mut next);
        c = next;
        if size < 1e-15 {
            return Ok(c);
        }
    }
    Err(Error::NonConvergence("centre-of-mass iteration did not converge".into()))
}

/// Reassembles `e^{−λ_cr θ} exp_ψ(e^{λ_cr θ} φ₀)` on the grid.
pub fn recompose(decomp: &Decomposition, target: &TargetManifold) -> Vec<f64> {
    let dom = decomp.domain;
    let (nth, d) = (dom.n_theta, target.real_dim());
    let (p, q) = (decomp.lambda_cr.numer() as f64, decomp.lambda_cr.denom() as f64);
    let mut out = vec![0.0; dom.len() * d];
    let (mut v, mut e) = (vec![0.0; d], vec![0.0; d]);
    for i in 0..dom.n_t {
        for j in 0..nth {
            // Angle on the cover lying over column j.
            let theta = dom.theta(j) / q;
            let k = (i * nth + j) * d;
            target.act_into(p * theta, &decomp.phi0[k..k + d], &mut v);
            target.exp_into(&decomp.psi[i].0, &v, &mut e);
            target.act_into(-p * theta, &e, &mut out[k..k + d]);
        }
    }
    out
}

/// `|ψ′(t) + iλ I(ψ)𝒳(ψ)| = |ψ′ − λ_r ∇H(ψ)|` per row, with `ψ′` by the
/// fourth-order central stencil (one-sided near the ends).
pub fn psi_gradient_residual(decomp: &Decomposition, lambda: Imag, target: &TargetManifold) -> Vec<f64> {
    let dom = decomp.domain;
    let d = target.real_dim();
    let flat: Vec<f64> = decomp.psi.iter().flat_map(|p| p.0.iter().copied()).collect();
    let deriv = deriv_t(&flat, dom.n_t, d, dom.dt());
    let mut g = vec![0.0; d];
    (0..dom.n_t)
        .map(|i| {
            let x = &decomp.psi[i].0;
            target.grad_h_into(x, &mut g);
            let mut r: Vec<f64> = deriv[i * d..(i + 1) * d].iter().zip(&g).map(|(a, b)| a - lambda.im() * b).collect();
            target.project_tangent_in_place(x, &mut r);
            norm(&r)
        })
        .collect()
}

/// Least-squares fit `value ≈ C e^{−σ·distance}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub sigma: f64,
    pub c: f64,
    pub r2: f64,
    pub samples: usize,
}

/// Fits `ln v = ln C − σ d` by least squares over `(d, v)` samples.
pub fn fit_exponential_rate(samples: &[(f64, f64)]) -> Result<RateFit> {
    if samples.len() < 8 {
        return invalid(format!("rate fit needs at least 8 samples, got {}", samples.len()));
    }
    if let Some((_, v)) = samples.iter().find(|(_, v)| !(*v > 0.0)) {
        return invalid(format!("rate fit needs positive values, got {v}"));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, v) in samples {
        let (dx, dy) = (x - mx, v.ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all samples share one abscissa".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok(RateFit { sigma: -slope, c: (my - slope * mx).exp(), r2, samples: samples.len() })
}

/// Which end collars of a cylinder to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Collars {
    Both,
    Left,
    Right,
}

/// Samples `(N − |t|, value)` restricted to rows within `width` of the chosen
/// ends (the abscissa is the distance to the nearest end).
pub fn collar_samples(domain: &CylinderDomain, values: &[f64], width: f64, which: Collars) -> Vec<(f64, f64)> {
    (0..domain.n_t)
        .filter_map(|i| {
            let t = domain.t(i);
            let dist = domain.half_length - t.abs();
            let side_ok = match which {
                Collars::Both => true,
                Collars::Left => t <= 0.0,
                Collars::Right => t >= 0.0,
            };
            (side_ok && dist <= width + 1e-12).then_some((dist, values[i]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xi_examples() {
        assert!((xi_of_gamma(0.4).unwrap() - 2.0).abs() < 1e-14);
        let x = xi_of_gamma(0.1).unwrap();
        assert!((x - 9.898979485566356).abs() < 1e-12);
        assert!((0.1 * (x + 1.0 / x) - 1.0).abs() < 1e-12);
        assert!(xi_of_gamma(0.5 - 1e-12).unwrap() < 1.0 + 1e-5);
        assert!(xi_of_gamma(0.5).is_err());
        assert!(xi_of_gamma(0.0).is_err());
    }

    #[test]
    fn pure_decay_mode_is_tight() {
        let g = 0.4;
        let xi = xi_of_gamma(g).unwrap();
        let x: Vec<f64> = (0..=10).map(|k| xi.powi(-k)).collect();
        let r = recursion_bound_check(&x, g).unwrap();
        assert!(r.holds());
        assert!(r.max_slack.abs() < 1e-6);
        let zero = recursion_bound_check(&[0.0; 6], g).unwrap();
        assert!(zero.holds() && zero.max_slack == 0.0);
        let bad = recursion_bound_check(&[0.0, 1.0, 0.0], g).unwrap();
        assert!(!bad.applicable);
    }

    #[test]
    fn random_sequences_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = random_admissible_sequence(&mut rng, 12, 0.35);
            let r = recursion_bound_check(&x, 0.35).unwrap();
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn rate_fit_exact_and_errors() {
        let s: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 * (-0.7 * i as f64).exp())).collect();
        let f = fit_exponential_rate(&s).unwrap();
        assert!((f.sigma - 0.7).abs() < 1e-10 && (f.c - 2.0).abs() < 1e-10 && (f.r2 - 1.0).abs() < 1e-12);
        assert!(fit_exponential_rate(&s[..5]).is_err());
        let mut z = s.clone();
        z[3].1 = 0.0;
        assert!(fit_exponential_rate(&z).is_err());
    }
}
