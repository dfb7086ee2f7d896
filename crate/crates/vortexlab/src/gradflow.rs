//! Gradient flows of `H`, chains of gradient segments, the δ-decomposition of
//! approximate gradient lines, the rescaled-limit chain detector, and the
//! Duhamel local model near fixed points.
//!
//! The flow used throughout is the downward gradient flow `x′ = V(x)` with
//! `V = −∇H`; near a fixed component with normal weights `w_j` its
//! linearisation in normal coordinates is `V₀(x) = (w_1x_1, …, w_kx_k)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::C64;
use crate::target::{norm, FixedComponent, Metric, TargetManifold, TargetPoint};
use crate::vortex::advance;

/// Spatial resolution of sampled chain supports.
pub const SUPPORT_RESOLUTION: f64 = 1e-3;

/// `V(x) = −∇H(x)`.
pub fn downward_field(target: &TargetManifold, p: &[f64], out: &mut [f64]) {
    target.grad_h_into(p, out);
    for v in out.iter_mut() {
        *v = -*v;
    }
}

/// Samples of a map `f: [start, start + (n−1)·step] → X` on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Line {
    pub start: f64,
    pub step: f64,
    pub points: Vec<Vec<f64>>,
}

impl Line {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.start, self.time(self.len().saturating_sub(1)))
    }

    /// Index of the sample nearest to time `t` (clamped).
    pub fn index_at(&self, t: f64) -> usize {
        let i = ((t - self.start) / self.step).round();
        (i.max(0.0) as usize).min(self.len() - 1)
    }

    /// Samples with index in `[i0, i1]` thinned to spatial spacing
    /// [`SUPPORT_RESOLUTION`] (both ends kept).
    pub fn support(&self, target: &TargetManifold, i0: usize, i1: usize) -> Vec<Vec<f64>> {
        thin(target, &self.points[i0..=i1])
    }
}

fn thin(target: &TargetManifold, pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (k, p) in pts.iter().enumerate() {
        let keep = match out.last() {
            None => true,
            Some(q) => k + 1 == pts.len() || target.dist(p, q) >= SUPPORT_RESOLUTION,
        };
        if keep {
            out.push(p.clone());
        }
    }
    out
}

fn validate_interval(a: f64, b: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return invalid(format!("step must be positive, got {step}"));
    }
    if !(b >= a) || !a.is_finite() || !b.is_finite() {
        return invalid(format!("invalid interval [{a}, {b}]"));
    }
    Ok(((b - a) / step).round() as usize + 1)
}

/// RK4 integration of `x′ = −∇H(x)` from `x` at time `a` over `[a, b]`,
/// sampled every `step` (the final step is adjusted to end at `b`).
pub fn downward_flow(target: &TargetManifold, x: &TargetPoint, interval: (f64, f64), step: f64) -> Result<Line> {
    target.validate(&x.0)?;
    let (a, b) = interval;
    let n = validate_interval(a, b, step)?;
    let h = if n > 1 { (b - a) / (n - 1) as f64 } else { step };
    let mut p = x.0.clone();
    let mut points = Vec::with_capacity(n);
    points.push(p.clone());
    let field = |q: &[f64], out: &mut [f64]| downward_field(target, q, out);
    for _ in 1..n {
        advance(target, &mut p, h, h, &field);
        points.push(p.clone());
    }
    Ok(Line { start: a, step: h, points })
}

/// Smooth pseudorandom forcing direction with `|w(t)| ≤ 1`.
struct NoiseDirection {
    terms: Vec<(Vec<f64>, f64, f64)>,
}

impl NoiseDirection {
    fn new(seed: u64, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = (0..3)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let s = norm(&v).max(1e-12) * 3.0;
                (v.iter().map(|c| c / s).collect(), rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        NoiseDirection { terms }
    }

    fn eval(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (v, w, ph) in &self.terms {
            let s = (w * t + ph).sin();
            for (o, c) in out.iter_mut().zip(v) {
                *o += s * c;
            }
        }
    }
}

/// Parameters of [`perturbed_line`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbedLine {
    pub interval: (f64, f64),
    pub l: f64,
    pub g: f64,
    pub sigma: f64,
    pub seed: u64,
    pub step: f64,
}

/// Forcing envelope `G e^{−σ d(t, ∂T)}`.
pub fn forcing_envelope(params: &PerturbedLine, t: f64) -> f64 {
    let (a, b) = params.interval;
    params.g * (-params.sigma * (t - a).min(b - t).max(0.0)).exp()
}

/// Integrates `ψ′ = l·V(ψ) + n(t)` with `|n(t)| ≤ G e^{−σ d(t, ∂T)}` (a smooth
/// pseudorandom tangent direction determined by the seed), starting from `x`
/// at `t = 0` (or at the nearest end of `T` if `0 ∉ T`), forwards and
/// backwards with RK4.
pub fn perturbed_line(target: &TargetManifold, x: &TargetPoint, params: PerturbedLine) -> Result<Line> {
    target.validate(&x.0)?;
    if params.l == 0.0 || !params.l.is_finite() || !(params.g >= 0.0) {
        return invalid("perturbed line needs l ≠ 0 and G ≥ 0");
    }
    let (a, b) = params.interval;
    let n = validate_interval(a, b, params.step)?;
    let h = if n > 1 { (b - a) / (n - 1) as f64 } else { params.step };
    let d = target.real_dim();
    let noise = NoiseDirection::new(params.seed, d);
    let rhs = |t: f64, p: &[f64], out: &mut [f64]| {
        downward_field(target, p, out);
        let mut w = vec![0.0; d];
        noise.eval(t, &mut w);
        target.project_tangent_in_place(p, &mut w);
        let scale = forcing_envelope(&params, t) / norm(&w).max(1.0);
        for k in 0..d {
            out[k] = params.l * out[k] + scale * w[k];
        }
    };
    let anchor = ((0.0 - a) / h).round().clamp(0.0, (n - 1) as f64) as usize;
    let mut points = vec![Vec::new(); n];
    points[anchor] = x.0.clone();
    for (range, dir) in [((anchor + 1..n).collect::<Vec<_>>(), 1.0), ((0..anchor).rev().collect(), -1.0)] {
        let mut p = x.0.clone();
        let mut t = a + anchor as f64 * h;
        for i in range {
            rk4_step(target, &mut p, t, dir * h, &rhs);
            t += dir * h;
            points[i] = p.clone();
        }
    }
    Ok(Line { start: a, step: h, points })
}

fn rk4_step(target: &TargetManifold, x: &mut [f64], t: f64, h: f64, f: &impl Fn(f64, &[f64], &mut [f64])) {
    let n = x.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    f(t, x, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4);
    for i in 0..n {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    target.retract_in_place(x);
}

/// `|f′(t) − l·V(f(t))|` per sample (second-order differences).
pub fn line_residual(target: &TargetManifold, line: &Line, l: f64) -> Vec<f64> {
    let n = line.len();
    let d = target.real_dim();
    let h = line.step;
    let p = |i: usize| &line.points[i];
    let mut v = vec![0.0; d];
    (0..n)
        .map(|i| {
            let mut r: Vec<f64> = (0..d)
                .map(|k| {
                    if i == 0 {
                        (-3.0 * p(0)[k] + 4.0 * p(1)[k] - p(2)[k]) / (2.0 * h)
                    } else if i == n - 1 {
                        (3.0 * p(n - 1)[k] - 4.0 * p(n - 2)[k] + p(n - 3)[k]) / (2.0 * h)
                    } else {
                        (p(i + 1)[k] - p(i - 1)[k]) / (2.0 * h)
                    }
                })
                .collect();
            downward_field(target, p(i), &mut v);
            for k in 0..d {
                r[k] -= l * v[k];
            }
            target.project_tangent_in_place(p(i), &mut r);
            norm(&r)
        })
        .collect()
}

/// `S = lT`, `f(s) = ψ(s/l)`; a negative `l` reverses the orientation.
pub fn rescale_line(line: &Line, l: f64) -> Result<Line> {
    if l == 0.0 || !l.is_finite() {
        return invalid("rescaling factor must be finite and nonzero");
    }
    if l > 0.0 {
        Ok(Line { start: l * line.start, step: l * line.step, points: line.points.clone() })
    } else {
        let (_, end) = line.interval();
        Ok(Line { start: l * end, step: -l * line.step, points: line.points.iter().rev().cloned().collect() })
    }
}

/// Two-sided Hausdorff distance between finite point sets (brute force).
pub fn hausdorff<P: AsRef<[f64]>>(target: &TargetManifold, a: &[P], b: &[P], metric: Metric) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return invalid("Hausdorff distance needs nonempty sets");
    }
    let one_sided = |x: &[P], y: &[P]| {
        x.iter()
            .map(|p| y.iter().map(|q| target.distance(p.as_ref(), q.as_ref(), metric)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// Diameter of a finite point set.
pub fn diameter<P: AsRef<[f64]>>(target: &TargetManifold, pts: &[P]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(target.dist(p.as_ref(), q.as_ref()));
        }
    }
    d
}

/// A stretch of time spent near one fixed component.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EInterval {
    pub component: String,
    pub h: f64,
    pub start: f64,
    pub end: f64,
}

/// `S = T^δ ∪ E^δ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineDecomposition {
    pub delta: f64,
    pub e: Vec<EInterval>,
    pub t: Vec<(f64, f64)>,
    /// Whether the components met have strictly decreasing `H` in time order.
    pub h_decreasing: bool,
}

fn min_component_gap(target: &TargetManifold) -> f64 {
    let comps = target.fixed_components();
    let mut gap = f64::INFINITY;
    for (i, a) in comps.iter().enumerate() {
        for b in &comps[i + 1..] {
            gap = gap.min(target.dist(&a.point.0, &b.point.0));
        }
    }
    gap
}

/// Splits the domain of a line into intervals near fixed components and their
/// complement.  For each component `F` met by the line,
/// `E = [first time in F^δ, (first later time outside F^{2δ}) + δ]` (clipped
/// to the domain); `T` is the closure of the complement of the `E`s.
pub fn decompose_line(target: &TargetManifold, line: &Line, delta: f64) -> Result<LineDecomposition> {
    if !(delta > 0.0) {
        return invalid("δ must be positive");
    }
    if 4.0 * delta >= min_component_gap(target) {
        return invalid(format!("δ = {delta} is too large: the 2δ-neighbourhoods of fixed components overlap"));
    }
    if line.len() < 2 {
        return invalid("line needs at least two samples");
    }
    let (a, b) = line.interval();
    let mut es = Vec::new();
    for comp in target.fixed_components() {
        let dist = |i: usize| target.dist(&line.points[i], &comp.point.0);
        let Some(entry) = (0..line.len()).find(|&i| dist(i) <= delta) else { continue };
        let exit = (entry..line.len()).find(|&i| dist(i) > 2.0 * delta);
        let end = exit.map_or(b, |i| (line.time(i) + delta).min(b));
        es.push(EInterval { component: comp.label.clone(), h: comp.h, start: line.time(entry), end });
    }
    es.sort_by(|x, y| x.start.total_cmp(&y.start));
    let mut t = Vec::new();
    let mut cursor = a;
    for e in &es {
        if e.start > cursor {
            t.push((cursor, e.start));
        }
        cursor = cursor.max(e.end);
    }
    if cursor < b {
        t.push((cursor, b));
    }
    let h_decreasing = es.windows(2).all(|w| w[1].h < w[0].h);
    Ok(LineDecomposition { delta, e: es, t, h_decreasing })
}

/// A pointed gradient segment `(x, T)`; `None` ends stand for `∓∞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientSegment {
    pub basepoint: TargetPoint,
    pub start: Option<f64>,
    pub end: Option<f64>,
}

/// A chain of gradient segments, or a single point when degenerate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientChain {
    pub segments: Vec<GradientSegment>,
    pub degenerate: Option<TargetPoint>,
    /// Fixed components at the junctions and ends, in chain order.
    pub components: Vec<String>,
}

/// Limit of the downward flow (`forward`) or upward flow from `x`: the fixed
/// component approached, or `None` if none is reached within the time budget.
pub fn flow_limit(target: &TargetManifold, x: &[f64], forward: bool) -> Option<FixedComponent> {
    if target.is_fixed_point(x, 1e-14) {
        return Some(target.nearest_fixed_component(x).0);
    }
    let field = |q: &[f64], out: &mut [f64]| {
        downward_field(target, q, out);
        if !forward {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    };
    let mut p = x.to_vec();
    for _ in 0..400 {
        advance(target, &mut p, 0.25, 0.01, &field);
        if norm(&p) > 1e6 {
            return None;
        }
        let (c, d) = target.nearest_fixed_component(&p);
        if d < 1e-10 {
            return Some(c);
        }
    }
    None
}

impl GradientChain {
    pub fn degenerate_at(x: TargetPoint) -> Self {
        GradientChain { segments: vec![], degenerate: Some(x), components: vec![] }
    }

    /// Builds a chain of full gradient lines through the given basepoints
    /// (in order) and checks the matching condition at every junction.
    pub fn from_basepoints(target: &TargetManifold, basepoints: Vec<TargetPoint>) -> Result<Self> {
        let mut components: Vec<String> = Vec::new();
        let mut segments = Vec::new();
        for (k, x) in basepoints.into_iter().enumerate() {
            let up = flow_limit(target, &x.0, false).ok_or_else(|| Error::Degenerate("segment has no upper limit".into()))?;
            let down =
                flow_limit(target, &x.0, true).ok_or_else(|| Error::Degenerate("segment has no lower limit".into()))?;
            if k == 0 {
                components.push(up.label.clone());
            } else if components.last() != Some(&up.label) {
                return Err(Error::Hypothesis(format!(
                    "segment {k} starts at {} but the previous one ends at {}",
                    up.label,
                    components.last().map(String::as_str).unwrap_or("?")
                )));
            }
            components.push(down.label.clone());
            segments.push(GradientSegment { basepoint: x, start: None, end: None });
        }
        Ok(GradientChain { segments, degenerate: None, components })
    }

    /// `H` at the chain's components, in order.
    pub fn component_h(&self, target: &TargetManifold) -> Vec<f64> {
        let comps = target.fixed_components();
        self.components.iter().filter_map(|l| comps.iter().find(|c| &c.label == l).map(|c| c.h)).collect()
    }

    /// Sampled support: the closure of every segment's flow line at
    /// [`SUPPORT_RESOLUTION`].
    pub fn support(&self, target: &TargetManifold) -> Vec<Vec<f64>> {
        if let Some(p) = &self.degenerate {
            return vec![p.0.clone()];
        }
        let mut out = Vec::new();
        for s in &self.segments {
            out.extend(flow_closure(target, &s.basepoint.0, s.start, s.end));
        }
        out
    }
}

/// Samples of `ξ_t(x)` for `t` in `[start, end]` (infinite ends run until the
/// flow is within the support resolution of a fixed point, which is appended).
fn flow_closure(target: &TargetManifold, x: &[f64], start: Option<f64>, end: Option<f64>) -> Vec<Vec<f64>> {
    let d = target.real_dim();
    let h = 2e-4;
    let half = |forward: bool, limit: Option<f64>| -> Vec<Vec<f64>> {
        let mut p = x.to_vec();
        let mut pts = vec![p.clone()];
        let mut t = 0.0;
        let mut k1 = vec![0.0; d];
        let field = |q: &[f64], out: &mut [f64]| {
            downward_field(target, q, out);
            if !forward {
                out.iter_mut().for_each(|v| *v = -*v);
            }
        };
        loop {
            if let Some(lim) = limit {
                if t >= lim.abs() {
                    break;
                }
            }
            let (c, dist) = target.nearest_fixed_component(&p);
            if dist < 0.5 * SUPPORT_RESOLUTION {
                pts.push(c.point.0.clone());
                break;
            }
            field(&p, &mut k1);
            let speed = norm(&k1).max(1e-300);
            // Adaptive step: spatial increments well below the resolution.
            let dt = (0.25 * SUPPORT_RESOLUTION / speed).min(0.5).max(h);
            advance(target, &mut p, dt, dt, &field);
            t += dt;
            if norm(&p) > 1e3 || t > 200.0 {
                break;
            }
            if target.dist(&p, pts.last().expect("nonempty")) >= SUPPORT_RESOLUTION {
                pts.push(p.clone());
            }
        }
        pts
    };
    let mut back = half(false, start.map(|s| s.min(0.0)));
    let fwd = half(true, end.map(|e| e.max(0.0)));
    back.reverse();
    back.pop();
    back.extend(fwd);
    back
}

/// Exact meridian of the sphere through azimuth `az`, pole to pole, sampled
/// every `spacing` radians of polar angle.
pub fn exact_meridian(az: f64, spacing: f64) -> Vec<Vec<f64>> {
    let n = (std::f64::consts::PI / spacing).ceil() as usize;
    (0..=n)
        .map(|k| {
            let polar = std::f64::consts::PI * k as f64 / n as f64;
            TargetPoint::sphere_polar(polar, az).0
        })
        .collect()
}

/// Per-(δ, line) diagnostics of [`detect_chain_limit`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectRow {
    pub delta: f64,
    pub line: usize,
    pub n_e: usize,
    pub n_t: usize,
    /// `max_j sup_{t∈T_j} d(ξ_{t−t_j}(f(t_j)), f(t))`.
    pub quasi_gradient: f64,
    /// `max_j D(f(T_j), chain segment ∩ X^δ)`.
    pub hausdorff_to_chain: f64,
    pub e_diameters: Vec<f64>,
    pub e_distances: Vec<f64>,
}

/// Which alternative of the limit theorem the sequence follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LimitBranch {
    /// `diam f_u(S_u) → 0`.
    Collapsing,
    /// Convergence to a chain of gradient segments.
    Chain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainLimitReport {
    pub branch: LimitBranch,
    pub chain: GradientChain,
    /// `diam f_u(S_u)` per line.
    pub diameters: Vec<f64>,
    pub rows: Vec<DefectRow>,
    /// Component counts agree over the trailing lines for every δ and the
    /// defect sequences decrease along them.
    pub converged: bool,
    pub message: String,
}

/// Quasi-gradient defects below this level count as converged (round-off).
pub const QUASI_GRADIENT_FLOOR: f64 = 1e-9;

/// Diameter below which the last line of a shrinking sequence is declared
/// collapsed.
pub const COLLAPSE_DIAMETER: f64 = 0.02;

/// Analyses a sequence of rescaled lines (indexed by increasing `u`) against
/// the conditions defining convergence to a chain, for each `δ` in `deltas`.
///
/// The chain returned is built from the last line at the smallest `δ`: one
/// full gradient line through the midpoint of each `T`-interval.  The
/// convergence report is a finite-sequence statement: component counts agree
/// on the last `⌈n/2⌉` lines (at least two), the quasi-gradient defect
/// decreases along them, and on the last line the Hausdorff and `E`-diameter
/// defects decrease as `δ` decreases.
pub fn detect_chain_limit(target: &TargetManifold, lines: &[Line], deltas: &[f64]) -> Result<ChainLimitReport> {
    if lines.len() < 3 {
        return invalid("chain detection needs at least three lines");
    }
    if deltas.is_empty() {
        return invalid("need at least one δ");
    }
    let supports: Vec<Vec<Vec<f64>>> = lines.iter().map(|l| l.support(target, 0, l.len() - 1)).collect();
    let diameters: Vec<f64> = supports.iter().map(|s| diameter(target, s)).collect();
    let shrinking = diameters.windows(2).all(|w| w[1] <= w[0]);
    if shrinking && *diameters.last().expect("nonempty") < COLLAPSE_DIAMETER {
        let last = lines.last().expect("nonempty");
        let chain = GradientChain::degenerate_at(TargetPoint(last.points[last.len() / 2].clone()));
        return Ok(ChainLimitReport {
            branch: LimitBranch::Collapsing,
            chain,
            diameters,
            rows: vec![],
            converged: true,
            message: "diameters decrease below the collapse threshold".into(),
        });
    }
    let mut smallest: Vec<f64> = deltas.to_vec();
    smallest.sort_by(|a, b| a.total_cmp(b));
    let last = lines.last().expect("nonempty");
    let dec = decompose_line(target, last, smallest[0])?;
    let basepoints: Vec<TargetPoint> = dec
        .t
        .iter()
        .map(|&(a, b)| TargetPoint(last.points[last.index_at(0.5 * (a + b))].clone()))
        .filter(|p| !target.is_fixed_point(&p.0, 1e-12))
        .collect();
    let chain = if basepoints.is_empty() {
        GradientChain::degenerate_at(TargetPoint(last.points[last.len() / 2].clone()))
    } else {
        GradientChain::from_basepoints(target, basepoints)?
    };
    let segment_supports: Vec<Vec<Vec<f64>>> =
        chain.segments.iter().map(|s| flow_closure(target, &s.basepoint.0, None, None)).collect();
    let mut rows = Vec::new();
    for &delta in deltas {
        let outside = |pts: &[Vec<f64>]| -> Vec<Vec<f64>> {
            pts.iter().filter(|p| target.nearest_fixed_component(p).1 > delta).cloned().collect()
        };
        for (u, line) in lines.iter().enumerate() {
            let dec = decompose_line(target, line, delta)?;
            let mut quasi: f64 = 0.0;
            let mut haus: f64 = 0.0;
            for (j, &(a, b)) in dec.t.iter().enumerate() {
                let (i0, i1) = (line.index_at(a), line.index_at(b));
                let im = line.index_at(0.5 * (a + b));
                quasi = quasi.max(quasi_gradient_defect(target, line, i0, im, i1));
                if let Some(seg) = segment_supports.get(j) {
                    let seg_out = outside(seg);
                    let img = outside(&line.support(target, i0, i1));
                    if !seg_out.is_empty() && !img.is_empty() {
                        haus = haus.max(hausdorff(target, &img, &seg_out, Metric::Intrinsic)?);
                    }
                }
            }
            let mut e_diameters = Vec::new();
            let mut e_distances = Vec::new();
            for e in &dec.e {
                let (i0, i1) = (line.index_at(e.start), line.index_at(e.end));
                let pts = line.support(target, i0, i1);
                e_diameters.push(diameter(target, &pts));
                let comp = target.fixed_components().into_iter().find(|c| c.label == e.component).expect("known");
                e_distances.push(pts.iter().map(|p| target.dist(p, &comp.point.0)).fold(f64::INFINITY, f64::min));
            }
            rows.push(DefectRow {
                delta,
                line: u,
                n_e: dec.e.len(),
                n_t: dec.t.len(),
                quasi_gradient: quasi,
                hausdorff_to_chain: haus,
                e_diameters,
                e_distances,
            });
        }
    }
    let tail = ((lines.len() + 1) / 2).max(2);
    let mut converged = true;
    let mut message = String::from("component counts stable, quasi-gradient defects decreasing in u, set defects decreasing in δ");
    for &delta in deltas {
        let rs: Vec<&DefectRow> = rows.iter().filter(|r| r.delta == delta).skip(lines.len() - tail).collect();
        if rs.windows(2).any(|w| w[0].n_e != w[1].n_e || w[0].n_t != w[1].n_t) {
            converged = false;
            message = format!("component counts differ across the last {tail} lines at δ = {delta}");
            break;
        }
        if rs.windows(2).any(|w| w[1].quasi_gradient > w[0].quasi_gradient + QUASI_GRADIENT_FLOOR) {
            converged = false;
            message = format!("quasi-gradient defect does not decrease along the last {tail} lines at δ = {delta}");
            break;
        }
    }
    if converged {
        // The Hausdorff and E-interval defects vanish only in the limit δ → 0.
        let last_rows: Vec<&DefectRow> =
            smallest.iter().rev().filter_map(|d| rows.iter().rev().find(|r| r.delta == *d)).collect();
        let max_e = |r: &DefectRow| r.e_diameters.iter().cloned().fold(0.0, f64::max);
        if last_rows.windows(2).any(|w| {
            w[1].hausdorff_to_chain > w[0].hausdorff_to_chain + 1e-12 || max_e(w[1]) > max_e(w[0]) + 1e-12
        }) {
            converged = false;
            message = "set defects of the last line do not decrease with δ".into();
        }
    }
    Ok(ChainLimitReport { branch: LimitBranch::Chain, chain, diameters, rows, converged, message })
}

/// `sup_{t∈[i0,i1]} d(ξ_{t−t_m}(f(t_m)), f(t))`.
fn quasi_gradient_defect(target: &TargetManifold, line: &Line, i0: usize, im: usize, i1: usize) -> f64 {
    let field = |q: &[f64], out: &mut [f64]| downward_field(target, q, out);
    let h = line.step.min(0.05);
    let mut worst: f64 = 0.0;
    for (range, dir) in [((im + 1..=i1).collect::<Vec<_>>(), 1.0), ((i0..im).rev().collect(), -1.0)] {
        let mut p = line.points[im].clone();
        for i in range {
            advance(target, &mut p, dir * line.step, h, &field);
            worst = worst.max(target.dist(&p, &line.points[i]));
        }
    }
    worst
}

/// Audit of the no-return property: for each fixed component `F`, a violation
/// is a time at which the line re-enters `F^{d}` after having been in `F^{d}`
/// and then outside `F^{2δ}`.
pub fn no_return_violations(target: &TargetManifold, line: &Line, delta: f64, d: f64) -> usize {
    let mut count = 0;
    for comp in target.fixed_components() {
        let (mut inside_seen, mut left) = (false, false);
        for p in &line.points {
            let r = target.dist(p, &comp.point.0);
            if r <= d {
                if left {
                    count += 1;
                    left = false;
                }
                inside_seen = true;
            } else if r > 2.0 * delta && inside_seen {
                left = true;
            }
        }
    }
    count
}

/// `x(t) = e^{tA}x₀ + ∫_0^t e^{(t−s)A} F(s) ds` for `A = diag(w)` acting on
/// complex coordinates, with the forcing sampled at `n` equispaced nodes and
/// the convolution integrated by the trapezoidal rule.
pub fn duhamel_step(weights: &[i64], x0: &[C64], t: f64, forcing: impl Fn(f64) -> Vec<C64>, n: usize) -> Result<TargetPoint> {
    if x0.len() != weights.len() {
        return Err(Error::Shape { expected: weights.len(), got: x0.len() });
    }
    if n < 2 {
        return invalid("Duhamel quadrature needs at least two nodes");
    }
    let m = weights.len();
    let h = t / (n - 1) as f64;
    let mut out: Vec<C64> = (0..m).map(|j| x0[j] * (t * weights[j] as f64).exp()).collect();
    for k in 0..n {
        let s = k as f64 * h;
        let f = forcing(s);
        if f.len() != m {
            return Err(Error::Shape { expected: m, got: f.len() });
        }
        let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
        for j in 0..m {
            out[j] += f[j] * (w * ((t - s) * weights[j] as f64).exp());
        }
    }
    Ok(TargetPoint::complex(&out))
}

/// `|V(x) − V₀(x)|` in geodesic normal coordinates at the nearest fixed point,
/// where `V₀` is the weighted linear field.  On the sphere the normal
/// coordinate of a point at polar distance `r` from a pole is a vector `v` of
/// length `r`, `V(v) = ±sin(r)·v/r` and `V₀(v) = ±v`.
pub fn linearization_error(target: &TargetManifold, x: &TargetPoint) -> Result<f64> {
    target.validate(&x.0)?;
    match target {
        TargetManifold::Linear { weights } => {
            let mut v = vec![0.0; x.0.len()];
            downward_field(target, &x.0, &mut v);
            let v0: Vec<f64> = (0..x.0.len()).map(|k| weights[k / 2] as f64 * x.0[k]).collect();
            Ok(v.iter().zip(&v0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        }
        TargetManifold::Sphere => {
            let (comp, r) = target.nearest_fixed_component(&x.0);
            if r >= std::f64::consts::FRAC_PI_2 {
                return invalid(format!("point is outside the normal chart of {}", comp.label));
            }
            let mut log = vec![0.0; 3];
            target.log_into(&comp.point.0, &x.0, &mut log);
            // Pull V back through d(exp): radial fields keep their direction
            // and have unit-speed radial parametrisation.
            let mut v = vec![0.0; 3];
            downward_field(target, &x.0, &mut v);
            let radial_speed = norm(&v);
            let pulled = if r > 0.0 { radial_speed / r } else { 1.0 };
            Ok((pulled - 1.0).abs() * r)
        }
    }
}

/// Log–log regression of [`linearization_error`] over a radius sweep toward
/// the north pole: returns `(slope, K)` with `K = max error/r²`.
pub fn linearization_sweep(radii: &[f64]) -> Result<(f64, f64)> {
    let s = TargetManifold::Sphere;
    let mut pts = Vec::new();
    let mut k: f64 = 0.0;
    for &r in radii {
        let e = linearization_error(&s, &TargetPoint::sphere_polar(r, 0.3))?;
        if e <= 0.0 {
            return Err(Error::Degenerate(format!("zero linearisation error at r = {r}")));
        }
        k = k.max(e / (r * r));
        pts.push((r.ln(), e.ln()));
    }
    if pts.len() < 2 {
        return invalid("sweep needs at least two radii");
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((sxy / sxx, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_examples() {
        let l = Line { start: 0.0, step: 1.0, points: (0..11).map(|i| vec![i as f64]).collect() };
        assert_eq!(rescale_line(&l, 1.0).unwrap(), l);
        let h = rescale_line(&l, 0.5).unwrap();
        assert_eq!(h.interval(), (0.0, 5.0));
        assert_eq!(h.points[2], l.points[2]);
        let r = rescale_line(&l, -2.0).unwrap();
        assert_eq!(r.interval(), (-20.0, 0.0));
        assert_eq!(r.points[0], vec![10.0]);
        assert!(rescale_line(&l, 0.0).is_err());
    }

    #[test]
    fn hausdorff_poles() {
        let s = TargetManifold::Sphere;
        let n = [TargetPoint::north().0];
        let so = [TargetPoint::south().0];
        assert!((hausdorff(&s, &n, &so, Metric::Chordal).unwrap() - 2.0).abs() < 1e-15);
        assert!((hausdorff(&s, &n, &so, Metric::Intrinsic).unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(hausdorff(&s, &n, &n, Metric::Intrinsic).unwrap(), 0.0);
        let empty: [Vec<f64>; 0] = [];
        assert!(hausdorff(&s, &empty, &n, Metric::Intrinsic).is_err());
    }

    #[test]
    fn duhamel_scalar_examples() {
        let e = duhamel_step(&[1], &[C64::new(1.0, 0.0)], 1.0, |_| vec![C64::new(0.0, 0.0)], 2).unwrap();
        assert!((e.0[0] - std::f64::consts::E).abs() < 1e-14);
        let c = C64::new(0.3, -0.2);
        let x = duhamel_step(&[1], &[C64::new(0.0, 0.0)], 1.0, |_| vec![c], 20001).unwrap();
        let want = c * (std::f64::consts::E - 1.0);
        assert!((x.0[0] - want.re).abs() < 1e-8 && (x.0[1] - want.im).abs() < 1e-8);
    }

    #[test]
    fn linearization_examples() {
        let s = TargetManifold::Sphere;
        assert_eq!(linearization_error(&s, &TargetPoint::north()).unwrap(), 0.0);
        let r = 0.1;
        let e = linearization_error(&s, &TargetPoint::sphere_polar(std::f64::consts::PI - r, 1.0)).unwrap();
        assert!((e - (r - r.sin())).abs() < 1e-12);
        let lin = TargetManifold::linear(&[1, -2]).unwrap();
        assert_eq!(linearization_error(&lin, &TargetPoint(vec![0.3, 0.1, -0.2, 0.5])).unwrap(), 0.0);
        assert!(linearization_error(&s, &TargetPoint::sphere(1.0, 0.0, 0.0)).is_err());
    }
}
