//! Concrete Hamiltonian S¹-targets: a weighted complex vector space and the
//! round 2-sphere.
//!
//! Conventions (validated by finite differences in the tests):
//! * the almost complex structure `I` is multiplication by `i` on ℂⁿ and the
//!   rotation `v ↦ p × v` on the tangent plane of the sphere at `p`;
//! * `ω(u, v) = g(Iu, v)` with `g` the Euclidean metric, so `g(u, v) = ω(u, Iv)`;
//! * `𝒳` generates the action, `ι_𝒳 ω = dH` and `∇H = I𝒳`;
//! * Linear: `𝒳(x) = (i w_j x_j)`, `H(x) = −½ Σ w_j |x_j|²`;
//! * Sphere: `𝒳(p) = e_z × p`, `H(p) = z`.
//!
//! Points are stored as flat real coordinate vectors: `(re x₁, im x₁, re x₂, …)`
//! for Linear targets and `(x, y, z)` for the sphere.  Grid code in the other
//! modules works directly on such slices through the `*_into` kernels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Imag, C64};

const SPHERE_NORM_TOL: f64 = 1e-12;
const DIST_S1_SAMPLES: usize = 720;

/// A point of a target, as flat real coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint(pub Vec<f64>);

impl TargetPoint {
    /// Point of ℂⁿ from complex coordinates.
    pub fn complex(z: &[C64]) -> Self {
        TargetPoint(z.iter().flat_map(|c| [c.re, c.im]).collect())
    }

    /// Point of ℝ³ (for the sphere).
    pub fn sphere(x: f64, y: f64, z: f64) -> Self {
        TargetPoint(vec![x, y, z])
    }

    /// Unit vector with polar angle `polar` (from the north pole) and azimuth.
    pub fn sphere_polar(polar: f64, azimuth: f64) -> Self {
        TargetPoint(vec![polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()])
    }

    pub fn north() -> Self {
        TargetPoint::sphere(0.0, 0.0, 1.0)
    }

    pub fn south() -> Self {
        TargetPoint::sphere(0.0, 0.0, -1.0)
    }

    /// Complex view of Linear-target coordinates.
    pub fn as_complex(&self) -> Vec<C64> {
        self.0.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// A tangent vector together with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: TargetPoint,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    pub fn as_complex(&self) -> Vec<C64> {
        self.components.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
    }
}

/// A concrete S¹-Hamiltonian target manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetManifold {
    /// ℂⁿ with the linear action of weights `w`.
    Linear { weights: Vec<i64> },
    /// The unit round sphere rotated about the vertical axis.
    Sphere,
}

/// Description of the fixed set `X^λ = {x | e^{2πλ}·x = x}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedSet {
    /// Every point is fixed.
    All,
    /// Linear targets: the coordinate subspace where the listed coordinates are
    /// free and all others vanish (an empty list means the origin).
    Subspace { free: Vec<usize> },
    /// Sphere: only the two poles are fixed.
    Poles,
}

/// A connected component of the fixed-point set of the whole circle action.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedComponent {
    pub label: String,
    pub point: TargetPoint,
    pub h: f64,
}

/// Which distance a set-valued comparison uses on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Geodesic (great-circle) distance; flat distance on Linear targets.
    #[default]
    Intrinsic,
    /// Euclidean distance of the ambient coordinates.
    Chordal,
}

impl TargetManifold {
    pub fn linear(weights: &[i64]) -> Result<Self> {
        if weights.is_empty() || weights.iter().all(|&w| w == 0) {
            return Err(Error::InvalidInput("Linear target needs at least one nonzero weight".into()));
        }
        Ok(TargetManifold::Linear { weights: weights.to_vec() })
    }

    /// Number of real coordinates of a point.
    pub fn real_dim(&self) -> usize {
        match self {
            TargetManifold::Linear { weights } => 2 * weights.len(),
            TargetManifold::Sphere => 3,
        }
    }

    /// Complex dimension of the manifold.
    pub fn complex_dim(&self) -> usize {
        match self {
            TargetManifold::Linear { weights } => weights.len(),
            TargetManifold::Sphere => 1,
        }
    }

    pub fn weights(&self) -> Option<&[i64]> {
        match self {
            TargetManifold::Linear { weights } => Some(weights),
            TargetManifold::Sphere => None,
        }
    }

    /// Checks shape and (for the sphere) unit norm.
    pub fn validate(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.real_dim() {
            return Err(Error::Shape { expected: self.real_dim(), got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if matches!(self, TargetManifold::Sphere) && (norm(p) - 1.0).abs() > SPHERE_NORM_TOL {
            return Err(Error::InvalidPoint(format!("sphere point has norm {}", norm(p))));
        }
        Ok(())
    }

    fn check_tangent(&self, v: &TangentVector) -> Result<()> {
        self.validate(&v.base.0)?;
        if v.components.len() != self.real_dim() {
            return Err(Error::Shape { expected: self.real_dim(), got: v.components.len() });
        }
        Ok(())
    }

    /// The action of `e^{iθ}` on `x`.
    pub fn act(&self, theta: f64, x: &TargetPoint) -> Result<TargetPoint> {
        self.validate(&x.0)?;
        let mut out = vec![0.0; x.0.len()];
        self.act_into(theta, &x.0, &mut out);
        Ok(TargetPoint(out))
    }

    pub fn act_into(&self, theta: f64, p: &[f64], out: &mut [f64]) {
        match self {
            TargetManifold::Linear { weights } => {
                for (j, &w) in weights.iter().enumerate() {
                    let (s, c) = (w as f64 * theta).sin_cos();
                    let (re, im) = (p[2 * j], p[2 * j + 1]);
                    out[2 * j] = c * re - s * im;
                    out[2 * j + 1] = s * re + c * im;
                }
            }
            TargetManifold::Sphere => {
                let (s, c) = theta.sin_cos();
                out[0] = c * p[0] - s * p[1];
                out[1] = s * p[0] + c * p[1];
                out[2] = p[2];
            }
        }
    }

    /// The infinitesimal generator 𝒳 of the action.
    pub fn field_x(&self, x: &TargetPoint) -> Result<TangentVector> {
        self.validate(&x.0)?;
        let mut out = vec![0.0; x.0.len()];
        self.field_x_into(&x.0, &mut out);
        Ok(TangentVector { base: x.clone(), components: out })
    }

    pub fn field_x_into(&self, p: &[f64], out: &mut [f64]) {
        match self {
            TargetManifold::Linear { weights } => {
                for (j, &w) in weights.iter().enumerate() {
                    let w = w as f64;
                    out[2 * j] = -w * p[2 * j + 1];
                    out[2 * j + 1] = w * p[2 * j];
                }
            }
            TargetManifold::Sphere => {
                out[0] = -p[1];
                out[1] = p[0];
                out[2] = 0.0;
            }
        }
    }

    /// The Hamiltonian `H` with `ι_𝒳 ω = dH` (moment map `μ = iH`).
    pub fn hamiltonian_h(&self, x: &TargetPoint) -> Result<f64> {
        self.validate(&x.0)?;
        Ok(self.h(&x.0))
    }

    pub fn h(&self, p: &[f64]) -> f64 {
        match self {
            TargetManifold::Linear { weights } => {
                -0.5 * weights
                    .iter()
                    .enumerate()
                    .map(|(j, &w)| w as f64 * (p[2 * j].powi(2) + p[2 * j + 1].powi(2)))
                    .sum::<f64>()
            }
            TargetManifold::Sphere => p[2],
        }
    }

    /// Applies the complex structure at `p` to `v`.
    pub fn complex_structure_into(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        match self {
            TargetManifold::Linear { .. } => {
                for j in 0..v.len() / 2 {
                    out[2 * j] = -v[2 * j + 1];
                    out[2 * j + 1] = v[2 * j];
                }
            }
            TargetManifold::Sphere => cross_into(p, v, out),
        }
    }

    /// `∇H = I𝒳`.
    pub fn grad_h(&self, x: &TargetPoint) -> Result<TangentVector> {
        self.validate(&x.0)?;
        let mut out = vec![0.0; x.0.len()];
        self.grad_h_into(&x.0, &mut out);
        Ok(TangentVector { base: x.clone(), components: out })
    }

    pub fn grad_h_into(&self, p: &[f64], out: &mut [f64]) {
        let mut xf = vec![0.0; p.len()];
        self.field_x_into(p, &mut xf);
        self.complex_structure_into(p, &xf, out);
    }

    /// The symplectic form `ω_p(u, v)`.
    pub fn omega(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        match self {
            TargetManifold::Linear { .. } => {
                (0..u.len() / 2).map(|j| u[2 * j] * v[2 * j + 1] - u[2 * j + 1] * v[2 * j]).sum()
            }
            TargetManifold::Sphere => {
                p[0] * (u[1] * v[2] - u[2] * v[1])
                    + p[1] * (u[2] * v[0] - u[0] * v[2])
                    + p[2] * (u[0] * v[1] - u[1] * v[0])
            }
        }
    }

    /// Orthogonal projection of an ambient vector onto `T_pX`.
    pub fn project_tangent_in_place(&self, p: &[f64], v: &mut [f64]) {
        if let TargetManifold::Sphere = self {
            let d = dot(p, v);
            for k in 0..3 {
                v[k] -= d * p[k];
            }
        }
    }

    /// Brings an ambient point back onto the manifold (sphere normalisation).
    pub fn retract_in_place(&self, p: &mut [f64]) {
        if let TargetManifold::Sphere = self {
            let n = norm(p);
            for c in p.iter_mut() {
                *c /= n;
            }
        }
    }

    /// Riemannian exponential map.
    pub fn exp_map(&self, v: &TangentVector) -> Result<TargetPoint> {
        self.check_tangent(v)?;
        if let TargetManifold::Sphere = self {
            let d = dot(&v.base.0, &v.components).abs();
            if d > 1e-10 * (1.0 + v.norm()) {
                return Err(Error::InvalidInput(format!("vector not tangent (p·v = {d:e})")));
            }
        }
        let mut out = vec![0.0; v.components.len()];
        self.exp_into(&v.base.0, &v.components, &mut out);
        Ok(TargetPoint(out))
    }

    pub fn exp_into(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        match self {
            TargetManifold::Linear { .. } => {
                for k in 0..p.len() {
                    out[k] = p[k] + v[k];
                }
            }
            TargetManifold::Sphere => {
                let r = norm(v);
                let (s, c) = r.sin_cos();
                let sinc = if r < 1e-8 { 1.0 - r * r / 6.0 } else { s / r };
                for k in 0..3 {
                    out[k] = c * p[k] + sinc * v[k];
                }
                self.retract_in_place(out);
            }
        }
    }

    /// Inverse of the exponential map (defined away from the cut locus).
    pub fn log_into(&self, p: &[f64], q: &[f64], out: &mut [f64]) {
        match self {
            TargetManifold::Linear { .. } => {
                for k in 0..p.len() {
                    out[k] = q[k] - p[k];
                }
            }
            TargetManifold::Sphere => {
                let c = dot(p, q);
                let mut w = [q[0] - c * p[0], q[1] - c * p[1], q[2] - c * p[2]];
                let s = norm(&w);
                let angle = s.atan2(c);
                let scale = if s < 1e-300 { 0.0 } else { angle / s };
                for k in 0..3 {
                    w[k] *= scale;
                    out[k] = w[k];
                }
            }
        }
    }

    /// Distance between two points in the requested metric.
    pub fn distance(&self, p: &[f64], q: &[f64], metric: Metric) -> f64 {
        match (self, metric) {
            (TargetManifold::Sphere, Metric::Intrinsic) => {
                let mut cr = [0.0; 3];
                cross_into(p, q, &mut cr);
                norm(&cr).atan2(dot(p, q))
            }
            _ => p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(),
        }
    }

    /// The intrinsic Riemannian distance.
    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        self.distance(p, q, Metric::Intrinsic)
    }

    /// `dist_{S¹}(x, y) = inf_θ d(x, θ·y)`: 720 uniform samples refined by a
    /// golden-section search around the best sample.
    pub fn dist_s1(&self, x: &TargetPoint, y: &TargetPoint) -> Result<f64> {
        self.validate(&x.0)?;
        self.validate(&y.0)?;
        Ok(self.dist_s1_raw(&x.0, &y.0))
    }

    pub(crate) fn dist_s1_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut buf = vec![0.0; y.len()];
        let mut f = |theta: f64| {
            self.act_into(theta, y, &mut buf);
            self.dist(x, &buf)
        };
        let h = 2.0 * PI / DIST_S1_SAMPLES as f64;
        let (mut best_theta, mut best) = (0.0, f64::INFINITY);
        for k in 0..DIST_S1_SAMPLES {
            let theta = k as f64 * h;
            let d = f(theta);
            if d < best {
                best = d;
                best_theta = theta;
            }
        }
        let refined = golden_section_min(&mut f, best_theta - h, best_theta + h, 60);
        best.min(refined)
    }

    /// Supremum of pairwise `dist_{S¹}` over a finite set.
    pub fn diam_s1(&self, points: &[TargetPoint]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::InvalidInput("diam_s1 of an empty set".into()));
        }
        let mut d: f64 = 0.0;
        for (i, p) in points.iter().enumerate() {
            self.validate(&p.0)?;
            for q in &points[i + 1..] {
                d = d.max(self.dist_s1_raw(&p.0, &q.0));
            }
        }
        Ok(d)
    }

    /// The fixed set of `e^{2πλ}`.
    pub fn fixed_set_lambda(&self, lambda: Imag) -> FixedSet {
        const TOL: f64 = 1e-12;
        match self {
            TargetManifold::Linear { weights } => {
                let free: Vec<usize> = weights
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| crate::scalar::is_near_integer(w as f64 * lambda.im(), TOL))
                    .map(|(j, _)| j)
                    .collect();
                if free.len() == weights.len() {
                    FixedSet::All
                } else {
                    FixedSet::Subspace { free }
                }
            }
            TargetManifold::Sphere => {
                if crate::scalar::is_near_integer(lambda.im(), TOL) {
                    FixedSet::All
                } else {
                    FixedSet::Poles
                }
            }
        }
    }

    /// Connected components of the fixed set of the circle action, ordered by
    /// decreasing `H`.
    pub fn fixed_components(&self) -> Vec<FixedComponent> {
        match self {
            TargetManifold::Linear { weights } => vec![FixedComponent {
                label: "origin".into(),
                point: TargetPoint(vec![0.0; 2 * weights.len()]),
                h: 0.0,
            }],
            TargetManifold::Sphere => vec![
                FixedComponent { label: "north".into(), point: TargetPoint::north(), h: 1.0 },
                FixedComponent { label: "south".into(), point: TargetPoint::south(), h: -1.0 },
            ],
        }
    }

    /// Whether `p` is fixed by the whole circle (𝒳 vanishes there).
    pub fn is_fixed_point(&self, p: &[f64], tol: f64) -> bool {
        let mut xf = vec![0.0; p.len()];
        self.field_x_into(p, &mut xf);
        norm(&xf) <= tol
    }

    /// Holomorphic, equivariant chart centred at a fixed component: the identity
    /// on ℂⁿ, stereographic coordinates on the sphere.
    pub fn chart_at(&self, component: &FixedComponent) -> Result<HoloChart> {
        match self {
            TargetManifold::Linear { weights } => {
                Ok(HoloChart { kind: ChartKind::Identity, weights: weights.clone() })
            }
            TargetManifold::Sphere => {
                if component.point.0[2] > 0.0 {
                    Ok(HoloChart { kind: ChartKind::StereoNorth, weights: vec![1] })
                } else {
                    Ok(HoloChart { kind: ChartKind::StereoSouth, weights: vec![-1] })
                }
            }
        }
    }

    /// Fixed component nearest to `p`.
    pub fn nearest_fixed_component(&self, p: &[f64]) -> (FixedComponent, f64) {
        self.fixed_components()
            .into_iter()
            .map(|c| {
                let d = self.dist(p, &c.point.0);
                (c, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("every target has a fixed component")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ChartKind {
    Identity,
    StereoNorth,
    StereoSouth,
}

/// Holomorphic chart `ζ` around a fixed point in which the circle acts
/// linearly: `ζ(e^{iθ}x) = e^{iwθ} ζ(x)` coordinatewise, and `dζ ∘ I = i·dζ`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloChart {
    kind: ChartKind,
    /// Weights of the linear action in this chart.
    pub weights: Vec<i64>,
}

impl HoloChart {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn to_chart(&self, p: &[f64], out: &mut [C64]) {
        match self.kind {
            ChartKind::Identity => {
                for j in 0..out.len() {
                    out[j] = C64::new(p[2 * j], p[2 * j + 1]);
                }
            }
            ChartKind::StereoNorth => out[0] = C64::new(p[0], p[1]) / (1.0 + p[2]),
            ChartKind::StereoSouth => out[0] = C64::new(p[0], -p[1]) / (1.0 - p[2]),
        }
    }

    pub fn from_chart(&self, z: &[C64], out: &mut [f64]) {
        match self.kind {
            ChartKind::Identity => {
                for j in 0..z.len() {
                    out[2 * j] = z[j].re;
                    out[2 * j + 1] = z[j].im;
                }
            }
            ChartKind::StereoNorth | ChartKind::StereoSouth => {
                let s = z[0].norm_sqr();
                let d = 1.0 + s;
                let sign = if self.kind == ChartKind::StereoNorth { 1.0 } else { -1.0 };
                out[0] = 2.0 * z[0].re / d;
                out[1] = sign * 2.0 * z[0].im / d;
                out[2] = sign * (1.0 - s) / d;
            }
        }
    }

    /// Differential of the chart at `p` applied to a tangent vector `v`.
    pub fn push_tangent(&self, p: &[f64], v: &[f64], out: &mut [C64]) {
        match self.kind {
            ChartKind::Identity => {
                for j in 0..out.len() {
                    out[j] = C64::new(v[2 * j], v[2 * j + 1]);
                }
            }
            ChartKind::StereoNorth => {
                let d = 1.0 + p[2];
                out[0] = C64::new(v[0], v[1]) / d - C64::new(p[0], p[1]) * (v[2] / (d * d));
            }
            ChartKind::StereoSouth => {
                let d = 1.0 - p[2];
                out[0] = C64::new(v[0], -v[1]) / d + C64::new(p[0], -p[1]) * (v[2] / (d * d));
            }
        }
    }
}

fn golden_section_min(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn cross_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    out[0] = a[1] * b[2] - a[2] * b[1];
    out[1] = a[2] * b[0] - a[0] * b[2];
    out[2] = a[0] * b[1] - a[1] * b[0];
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lin12() -> TargetManifold {
        TargetManifold::linear(&[1, 2]).unwrap()
    }

    #[test]
    fn act_examples() {
        let t = lin12();
        let x = TargetPoint::complex(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert_eq!(t.act(0.0, &x).unwrap(), x);
        let y = t.act(PI, &x).unwrap().as_complex();
        assert_abs_diff_eq!(y[0].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y[0].im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1].im, 0.0, epsilon = 1e-15);
        let s = TargetManifold::Sphere;
        assert_eq!(s.act(PI / 2.0, &TargetPoint::north()).unwrap(), TargetPoint::north());
    }

    #[test]
    fn field_examples() {
        let t = lin12();
        let v = t.field_x(&TargetPoint::complex(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)])).unwrap();
        assert_eq!(v.as_complex(), vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        let v = t.field_x(&TargetPoint::complex(&[C64::new(0.0, 0.0), C64::new(2.0, 0.0)])).unwrap();
        assert_eq!(v.as_complex(), vec![C64::new(0.0, 0.0), C64::new(0.0, 4.0)]);
        let s = TargetManifold::Sphere;
        assert_eq!(s.field_x(&TargetPoint::north()).unwrap().norm(), 0.0);
    }

    #[test]
    fn hamiltonian_examples() {
        let t = lin12();
        let x = TargetPoint::complex(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert_eq!(t.hamiltonian_h(&x).unwrap(), -1.5);
        let s = TargetManifold::Sphere;
        assert_eq!(s.hamiltonian_h(&TargetPoint::north()).unwrap(), 1.0);
        assert_eq!(s.hamiltonian_h(&TargetPoint::south()).unwrap(), -1.0);
    }

    #[test]
    fn grad_examples() {
        let t = TargetManifold::linear(&[1]).unwrap();
        let g = t.grad_h(&TargetPoint::complex(&[C64::new(1.0, 0.0)])).unwrap();
        assert_eq!(g.as_complex(), vec![C64::new(-1.0, 0.0)]);
        let s = TargetManifold::Sphere;
        let g = s.grad_h(&TargetPoint::sphere(1.0, 0.0, 0.0)).unwrap();
        // ∇z on the sphere at an equator point is e_z: unit length, pointing north.
        assert_abs_diff_eq!(g.components[2], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.norm(), 1.0, epsilon = 1e-15);
        assert_eq!(s.grad_h(&TargetPoint::south()).unwrap().norm(), 0.0);
    }

    #[test]
    fn exp_examples() {
        let t = TargetManifold::linear(&[1, 1]).unwrap();
        let x = TargetPoint::complex(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let v = TangentVector { base: x.clone(), components: vec![0.0, 1.0, 1.0, 0.0] };
        assert_eq!(t.exp_map(&v).unwrap().as_complex(), vec![C64::new(1.0, 1.0), C64::new(1.0, 0.0)]);
        let s = TargetManifold::Sphere;
        let v = TangentVector { base: TargetPoint::north(), components: vec![PI, 0.0, 0.0] };
        let q = s.exp_map(&v).unwrap();
        assert_abs_diff_eq!(norm(&q.0), 1.0, epsilon = 1e-15);
        assert!(s.dist(&q.0, &TargetPoint::south().0) < 1e-15);
        let z = TangentVector { base: TargetPoint::north(), components: vec![0.0; 3] };
        assert_eq!(s.exp_map(&z).unwrap(), TargetPoint::north());
    }

    #[test]
    fn dist_s1_examples() {
        let s = TargetManifold::Sphere;
        let p = TargetPoint::sphere_polar(0.7, 0.3);
        assert_eq!(s.dist_s1(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(s.dist_s1(&TargetPoint::north(), &TargetPoint::south()).unwrap(), PI, epsilon = 1e-15);
        let t = TargetManifold::linear(&[1]).unwrap();
        let a = TargetPoint::complex(&[C64::new(1.0, 0.0)]);
        let b = TargetPoint::complex(&[C64::new(0.0, 1.0)]);
        assert!(t.dist_s1(&a, &b).unwrap() < 1e-12);
        assert!(s.diam_s1(&[]).is_err());
    }

    #[test]
    fn fixed_set_examples() {
        let t = lin12();
        assert_eq!(t.fixed_set_lambda(Imag(0.5)), FixedSet::Subspace { free: vec![1] });
        assert_eq!(t.fixed_set_lambda(Imag(0.0)), FixedSet::All);
        assert_eq!(t.fixed_set_lambda(Imag(0.3)), FixedSet::Subspace { free: vec![] });
        assert_eq!(TargetManifold::Sphere.fixed_set_lambda(Imag(0.3)), FixedSet::Poles);
        assert_eq!(TargetManifold::Sphere.fixed_set_lambda(Imag(2.0)), FixedSet::All);
    }

    #[test]
    fn charts_are_inverse_and_equivariant() {
        let s = TargetManifold::Sphere;
        for comp in s.fixed_components() {
            let ch = s.chart_at(&comp).unwrap();
            let p = if comp.h > 0.0 { TargetPoint::sphere_polar(0.4, 1.1) } else { TargetPoint::sphere_polar(2.6, 1.1) };
            let mut z = [C64::new(0.0, 0.0)];
            ch.to_chart(&p.0, &mut z);
            let mut back = [0.0; 3];
            ch.from_chart(&z, &mut back);
            assert!(s.dist(&back, &p.0) < 1e-14);
            let rotated = s.act(0.7, &p).unwrap();
            let mut zr = [C64::new(0.0, 0.0)];
            ch.to_chart(&rotated.0, &mut zr);
            let expected = z[0] * C64::from_polar(1.0, ch.weights[0] as f64 * 0.7);
            assert!((zr[0] - expected).norm() < 1e-14);
            // Holomorphic: dζ(Iv) = i dζ(v).
            let v = [0.3, -0.2, 0.5];
            let mut vt = v;
            s.project_tangent_in_place(&p.0, &mut vt);
            let mut iv = [0.0; 3];
            s.complex_structure_into(&p.0, &vt, &mut iv);
            let (mut a, mut b) = ([C64::new(0.0, 0.0)], [C64::new(0.0, 0.0)]);
            ch.push_tangent(&p.0, &vt, &mut a);
            ch.push_tangent(&p.0, &iv, &mut b);
            assert!((b[0] - C64::i() * a[0]).norm() < 1e-14);
        }
    }
}
