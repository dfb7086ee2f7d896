//! WebAssembly bindings for a static demo page.
//!
//! Every export takes plain numbers or strings and returns a JSON document, so
//! the page needs no generated type glue beyond `wasm-bindgen`'s string
//! passing and the same functions can be exercised natively.  Failures are
//! reported as `{"error": "..."}`.

use std::f64::consts::PI;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use vortexlab::curvegraph::{classify_curve, stabilization_bubbles};
use vortexlab::cylinder::CylinderDomain;
use vortexlab::gradflow::{diameter, exact_meridian, hausdorff, perturbed_line, rescale_line, PerturbedLine};
use vortexlab::io::curve_from_json;
use vortexlab::target::{Metric, TargetManifold, TargetPoint};
use vortexlab::vortex::{floer_cylinder, floer_energy_identity};

/// Largest number of points returned for plotting.
const PLOT_POINTS: usize = 400;

fn respond(result: vortexlab::Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn thin<T: Clone>(v: &[T]) -> Vec<T> {
    let stride = v.len().div_ceil(PLOT_POINTS).max(1);
    let mut out: Vec<T> = v.iter().step_by(stride).cloned().collect();
    if let Some(last) = v.last() {
        if (v.len() - 1) % stride != 0 {
            out.push(last.clone());
        }
    }
    out
}

/// Flat Floer cylinder on the sphere from the equator with residue `i·l`:
/// quadrature and closed-form energies, the exact value `4πl·tanh(lN)`, and
/// the height profile `H(t)`.
#[wasm_bindgen]
pub fn floer_energy(l: f64, half_length: f64, n_t: usize, n_theta: usize) -> String {
    respond((|| {
        let dom = CylinderDomain::new(half_length, n_t, n_theta)?;
        let pair = floer_cylinder(&TargetManifold::Sphere, l, &TargetPoint::sphere(1.0, 0.0, 0.0), dom)?;
        let e = floer_energy_identity(&pair);
        let h = pair.h_grid();
        let profile: Vec<[f64; 2]> = (0..dom.n_t).map(|i| [dom.t(i), h[i * dom.n_theta]]).collect();
        Ok(json!({
            "quadrature": e.quadrature,
            "closed_form": e.closed_form,
            "exact": 4.0 * PI * l * (l * half_length).tanh(),
            "gap": e.relative_gap(),
            "profile": thin(&profile),
        }))
    })())
}

/// Tree/connecting classification of a nodal curve given as JSON (either
/// `{"curve": …}` with a schema version or a bare curve object).
#[wasm_bindgen]
pub fn classify_curve_json(curve_json: &str) -> String {
    respond((|| {
        let curve = curve_from_json(curve_json)?;
        let cl = classify_curve(&curve)?;
        let flags = stabilization_bubbles(&curve)?;
        Ok(json!({
            "kinds": cl.graph.kinds,
            "edges": cl.graph.edges,
            "classes": cl.classes,
            "depths": cl.depths,
            "chains": cl.chains,
            "unstable_principal": cl.unstable_principal,
            "stabilization_bubbles": flags,
        }))
    })())
}

/// A rescaled, slightly perturbed gradient line through the equator with
/// parameter `u` (life span `u²`, forcing `g_scale/u²`), its Hausdorff distance
/// to the meridian from pole to pole, and its `(x, z)` trace.
#[wasm_bindgen]
pub fn meridian_hausdorff(u: f64, g_scale: f64, seed: u32) -> String {
    respond((|| {
        if !(u >= 1.0 && u <= 60.0) {
            return Err(vortexlab::Error::InvalidInput(format!("u must lie in [1, 60], got {u}")));
        }
        let sphere = TargetManifold::Sphere;
        let half = 0.5 * u * u;
        let p = PerturbedLine {
            interval: (-half, half),
            l: 1.0 / u,
            g: g_scale / (u * u),
            sigma: 1.0,
            seed: seed as u64,
            step: 0.05,
        };
        let line = rescale_line(&perturbed_line(&sphere, &TargetPoint::sphere(1.0, 0.0, 0.0), p)?, p.l)?;
        let support = line.support(&sphere, 0, line.len() - 1);
        let d = hausdorff(&sphere, &support, &exact_meridian(0.0, 1e-3), Metric::Intrinsic)?;
        let trace: Vec<[f64; 2]> = line.points.iter().map(|q| [q[0], q[2]]).collect();
        Ok(json!({
            "hausdorff": d,
            "diameter": diameter(&sphere, &support),
            "samples": line.len(),
            "trace": thin(&trace),
        }))
    })())
}
