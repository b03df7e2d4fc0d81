//! Single-copy and ensemble-averaged fidelities, the weighted objective and
//! its stationarity residual.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bloch::StateAngles;
use crate::channel::{affine_extract, affine_from_angles, AffineMap, CopyLabel};
use crate::cloner::ParamSet;
use crate::ensembles::{quadrature_nodes, EnsembleMoments, EnsembleSpec};
use crate::error::{Error, Result};
use crate::quadrature::CompensatedSum;

/// Central finite-difference step for gradients with respect to `ω`.
pub const FD_STEP: f64 = 1e-6;

/// Distance from a box face within which a parameter counts as on the face.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub p: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub objective: f64,
}

pub fn single_copy_fidelity(map: &AffineMap, angles: StateAngles) -> f64 {
    let n = angles.bloch_vector();
    let overlap = map.eta_x * n.x * n.x + map.eta_y * n.y * n.y + map.eta_z * n.z * n.z + map.delta_z * n.z;
    0.5 * (1.0 + overlap)
}

pub fn average_fidelity(map: &AffineMap, m: &EnsembleMoments) -> f64 {
    let overlap = map.eta_x * m.nx2_bar + map.eta_y * m.ny2_bar + map.eta_z * m.nz2_bar + map.delta_z * m.nz_bar;
    0.5 * (1.0 + overlap)
}

/// Average fidelity by direct integration of the simulated copy map over the
/// ensemble's quadrature nodes. Nodes are evaluated in parallel and summed in
/// a fixed order.
pub fn average_fidelity_oracle(
    omega: &ParamSet,
    spec: &EnsembleSpec,
    copy: CopyLabel,
    resolution: usize,
) -> Result<f64> {
    let map = affine_extract(omega, copy)?;
    let nodes = quadrature_nodes(spec, resolution)?;
    let terms: Vec<f64> = nodes
        .par_iter()
        .map(|(a, w)| w * single_copy_fidelity(&map, *a))
        .collect();
    Ok(terms.into_iter().collect::<CompensatedSum>().value())
}

pub(crate) fn check_weight(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("copy weight p = {p} outside [0, 1]")));
    }
    Ok(())
}

pub(crate) fn objective_raw(p: f64, a: &[f64; 6], m: &EnsembleMoments) -> f64 {
    let fa = average_fidelity(&affine_from_angles(a, CopyLabel::A), m);
    let fb = average_fidelity(&affine_from_angles(a, CopyLabel::B), m);
    p * fa + (1.0 - p) * fb
}

/// `p F̄^A + (1 − p) F̄^B` from the closed-form copy maps.
pub fn objective(p: f64, omega: &ParamSet, m: &EnsembleMoments) -> Result<FidelityReport> {
    check_weight(p)?;
    let a = omega.to_array();
    let f_a = average_fidelity(&affine_from_angles(&a, CopyLabel::A), m);
    let f_b = average_fidelity(&affine_from_angles(&a, CopyLabel::B), m);
    Ok(FidelityReport {
        p,
        f_a,
        f_b,
        objective: p * f_a + (1.0 - p) * f_b,
    })
}

/// Central-difference gradient of the objective; may probe just outside the box.
pub fn objective_gradient(p: f64, omega: &ParamSet, m: &EnsembleMoments) -> [f64; 6] {
    gradient_raw(p, &omega.to_array(), m)
}

pub(crate) fn gradient_raw(p: f64, a: &[f64; 6], m: &EnsembleMoments) -> [f64; 6] {
    let mut g = [0.0; 6];
    for (i, gi) in g.iter_mut().enumerate() {
        let mut hi = *a;
        let mut lo = *a;
        hi[i] += FD_STEP;
        lo[i] -= FD_STEP;
        *gi = (objective_raw(p, &hi, m) - objective_raw(p, &lo, m)) / (2.0 * FD_STEP);
    }
    g
}

/// Drops gradient components that point out of the box at active faces.
pub fn project_gradient(a: &[f64; 6], g: &[f64; 6]) -> [f64; 6] {
    let mut out = *g;
    for i in 0..6 {
        if a[i] <= BOUNDARY_TOL {
            out[i] = out[i].max(0.0);
        } else if a[i] >= PI - BOUNDARY_TOL {
            out[i] = out[i].min(0.0);
        }
    }
    out
}

/// Norm of the projected gradient restricted to the given components
/// (indices into `(α, α̃, β, β̃, γ, γ̃)`).
pub fn stationarity_residual_in(
    p: f64,
    omega: &ParamSet,
    m: &EnsembleMoments,
    components: &[usize],
) -> f64 {
    let a = omega.to_array();
    let g = project_gradient(&a, &gradient_raw(p, &a, m));
    components.iter().map(|&i| g[i] * g[i]).sum::<f64>().sqrt()
}

/// Norm of the projected objective gradient over all six parameters.
pub fn stationarity_residual(p: f64, omega: &ParamSet, m: &EnsembleMoments) -> f64 {
    stationarity_residual_in(p, omega, m, &[0, 1, 2, 3, 4, 5])
}
