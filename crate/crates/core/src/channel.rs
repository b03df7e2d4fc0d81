//! Reduced copy states, their affine Bloch maps, and the Kraus families that
//! realise them.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::bloch::{
    bloch_from_density, density_from_bloch, identity, pauli_x, pauli_y, pauli_z, BlochVector,
    DensityMatrix, Mat2, ALGEBRAIC_TOL,
};
use crate::cloner::{evolve, ParamSet, ThreeQubitDensity};
use crate::error::{Error, Result};

/// Off-diagonal response above which extraction reports an error.
pub const OFF_DIAGONAL_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CopyLabel {
    A,
    B,
}

impl CopyLabel {
    pub const BOTH: [CopyLabel; 2] = [CopyLabel::A, CopyLabel::B];
}

/// `r → (η_x r_x, η_y r_y, η_z r_z + δ_z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub eta_x: f64,
    pub eta_y: f64,
    pub eta_z: f64,
    pub delta_z: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        eta_x: 1.0,
        eta_y: 1.0,
        eta_z: 1.0,
        delta_z: 0.0,
    };

    pub fn new(eta_x: f64, eta_y: f64, eta_z: f64, delta_z: f64) -> Self {
        Self {
            eta_x,
            eta_y,
            eta_z,
            delta_z,
        }
    }

    pub fn apply(&self, r: BlochVector) -> BlochVector {
        BlochVector::new(self.eta_x * r.x, self.eta_y * r.y, self.eta_z * r.z + self.delta_z)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.eta_x, self.eta_y, self.eta_z, self.delta_z]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Unrestricted affine action `r → M r + t` of a qubit channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralAffine {
    pub matrix: Matrix3<f64>,
    pub shift: Vector3<f64>,
}

impl GeneralAffine {
    /// Largest entry outside the diagonal of `M` and the z component of `t`.
    pub fn off_diagonal(&self) -> f64 {
        let mut m = self.shift.x.abs().max(self.shift.y.abs());
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    m = m.max(self.matrix[(i, j)].abs());
                }
            }
        }
        m
    }

    pub fn diagonal_part(&self) -> AffineMap {
        AffineMap::new(self.matrix[(0, 0)], self.matrix[(1, 1)], self.matrix[(2, 2)], self.shift.z)
    }
}

/// Partial trace onto one copy: over B, C for copy A and over A, C for copy B.
pub fn reduce(state: &ThreeQubitDensity, copy: CopyLabel) -> DensityMatrix {
    let m = state.matrix();
    let index = |keep: usize, other: usize, c: usize| match copy {
        CopyLabel::A => 4 * keep + 2 * other + c,
        CopyLabel::B => 4 * other + 2 * keep + c,
    };
    let mut out = Mat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for other in 0..2 {
                for c in 0..2 {
                    acc += m[(index(i, other, c), index(j, other, c))];
                }
            }
            out[(i, j)] = acc;
        }
    }
    DensityMatrix::from_matrix_unchecked(out)
}

/// Exact copy map for parameters that need not lie in `[0, π]`; copy B uses
/// `γ → π − γ`, `γ̃ → π − γ̃`.
pub(crate) fn affine_from_angles(a: &[f64; 6], copy: CopyLabel) -> AffineMap {
    let [alpha, alpha_t, beta, beta_t, gamma, gamma_t] = *a;
    let (gamma, gamma_t) = match copy {
        CopyLabel::A => (gamma, gamma_t),
        CopyLabel::B => (PI - gamma, PI - gamma_t),
    };
    // product-to-sum forms of cos(α/2) sin(α̃/2), cos(β/2) cos(γ̃/2) ± ..., cos²(α/2)
    let sum = ((alpha + alpha_t) / 2.0).sin();
    let diff = ((alpha - alpha_t) / 2.0).sin();
    let w1 = 0.5 * (sum - diff);
    let w2 = 0.5 * (sum + diff);
    let eta_x = w1 * ((beta - gamma_t) / 2.0).cos() + w2 * ((beta_t - gamma) / 2.0).cos();
    let eta_y = w1 * ((beta + gamma_t) / 2.0).cos() + w2 * ((beta_t + gamma) / 2.0).cos();
    let (ca2, sa2) = (0.5 * (1.0 + alpha.cos()), 0.5 * (1.0 - alpha.cos()));
    let (cat2, sat2) = (0.5 * (1.0 + alpha_t.cos()), 0.5 * (1.0 - alpha_t.cos()));
    let up = ca2 * beta.cos() + sa2 * gamma.cos();
    let down = cat2 * beta_t.cos() + sat2 * gamma_t.cos();
    AffineMap::new(eta_x, eta_y, 0.5 * (up + down), 0.5 * (up - down))
}

pub fn affine_closed_form(omega: &ParamSet, copy: CopyLabel) -> AffineMap {
    affine_from_angles(&omega.to_array(), copy)
}

fn copy_output(omega: &ParamSet, copy: CopyLabel, r: BlochVector) -> Vector3<f64> {
    let rho = density_from_bloch(r).expect("probe lies in the Bloch ball");
    let out = bloch_from_density(&reduce(&evolve(omega, &rho), copy));
    Vector3::new(out.x, out.y, out.z)
}

/// Full affine action of one copy, reconstructed from the probes `±z`, `+x`,
/// `+y` and checked against the centre of the ball.
pub fn affine_extract_general(omega: &ParamSet, copy: CopyLabel) -> (GeneralAffine, f64) {
    let probe = |x, y, z| copy_output(omega, copy, BlochVector::new(x, y, z));
    let up = probe(0.0, 0.0, 1.0);
    let down = probe(0.0, 0.0, -1.0);
    let plus_x = probe(1.0, 0.0, 0.0);
    let plus_y = probe(0.0, 1.0, 0.0);
    let centre = probe(0.0, 0.0, 0.0);
    let shift = (up + down) * 0.5;
    let matrix = Matrix3::from_columns(&[plus_x - shift, plus_y - shift, (up - down) * 0.5]);
    let redundancy = (centre - shift).amax();
    (GeneralAffine { matrix, shift }, redundancy)
}

/// Diagonal copy map read off from simulated probes, together with the
/// largest off-diagonal response (including the centre-probe redundancy).
pub fn affine_extract_report(omega: &ParamSet, copy: CopyLabel) -> (AffineMap, f64) {
    let (general, redundancy) = affine_extract_general(omega, copy);
    (general.diagonal_part(), general.off_diagonal().max(redundancy))
}

pub fn affine_extract(omega: &ParamSet, copy: CopyLabel) -> Result<AffineMap> {
    let (map, off) = affine_extract_report(omega, copy);
    if off > OFF_DIAGONAL_LIMIT {
        return Err(Error::OffDiagonalResponse(off));
    }
    Ok(map)
}

/// Operator-sum elements with `Σ E†E = I` to within `1e-12`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    elements: Vec<Mat2>,
}

impl KrausSet {
    pub fn new(elements: Vec<Mat2>) -> Result<Self> {
        let dev = completeness_deviation(&elements);
        if !(dev <= ALGEBRAIC_TOL) {
            return Err(Error::IncompleteKraus(dev));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[Mat2] {
        &self.elements
    }

    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.elements)
    }
}

fn completeness_deviation(elements: &[Mat2]) -> f64 {
    let sum = elements.iter().fold(Mat2::zeros(), |acc, e| acc + e.adjoint() * e);
    (sum - identity()).iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn kraus_apply(k: &KrausSet, rho: &DensityMatrix) -> DensityMatrix {
    let m = rho.matrix();
    let out = k
        .elements
        .iter()
        .fold(Mat2::zeros(), |acc, e| acc + e * m * e.adjoint());
    DensityMatrix::from_matrix_unchecked(out)
}

fn real(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
    Mat2::new(
        Complex64::new(a, 0.0),
        Complex64::new(b, 0.0),
        Complex64::new(c, 0.0),
        Complex64::new(d, 0.0),
    )
}

/// Amplitude damping towards `|↑⟩` with damping angle `γ^k`.
pub fn kraus_ad(gamma_k: f64) -> KrausSet {
    let (s, c) = (gamma_k / 2.0).sin_cos();
    KrausSet::new(vec![real(1.0, 0.0, 0.0, c), real(0.0, s, 0.0, 0.0)]).expect("complete by construction")
}

/// Generalized amplitude damping: weight `cos²(α/2)` towards `|↑⟩`,
/// `sin²(α/2)` towards `|↓⟩`.
pub fn kraus_gad(alpha: f64, gamma_k: f64) -> KrausSet {
    let (s, c) = (gamma_k / 2.0).sin_cos();
    let (sa, ca) = (alpha / 2.0).sin_cos();
    KrausSet::new(vec![
        real(1.0, 0.0, 0.0, c) * Complex64::new(ca, 0.0),
        real(0.0, s, 0.0, 0.0) * Complex64::new(ca, 0.0),
        real(c, 0.0, 0.0, 1.0) * Complex64::new(sa, 0.0),
        real(0.0, 0.0, s, 0.0) * Complex64::new(sa, 0.0),
    ])
    .expect("complete by construction")
}

/// Coefficients `(a, b)` of the symmetric Pauli channel for angle `α`.
pub fn symmetric_pauli_coefficients(alpha: f64) -> (f64, f64) {
    let (s, c) = (alpha / 2.0).sin_cos();
    (0.5 * s, FRAC_1_SQRT_2 * (c - FRAC_1_SQRT_2 * s))
}

/// Symmetric Pauli channel `{√(1−2a²−b²) I, a σ_x, a σ_y, b σ_z}`. The sign of
/// `b` is kept; only the identity weight is constrained.
pub fn kraus_sp(alpha: f64) -> Result<KrausSet> {
    let (a, b) = symmetric_pauli_coefficients(alpha);
    let radicand = 1.0 - 2.0 * a * a - b * b;
    if !(radicand >= -ALGEBRAIC_TOL) {
        return Err(Error::domain(format!(
            "symmetric Pauli identity weight 1 - 2a^2 - b^2 = {radicand} is negative"
        )));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    KrausSet::new(vec![
        identity() * c(radicand.max(0.0).sqrt()),
        pauli_x() * c(a),
        pauli_y() * c(a),
        pauli_z() * c(b),
    ])
}

/// Deformed amplitude damping with deformation angle `β`.
pub fn kraus_dad(beta: f64) -> KrausSet {
    let (s, c) = (beta / 2.0).sin_cos();
    KrausSet::new(vec![
        real(0.0, FRAC_1_SQRT_2, s, 0.0),
        real(c, 0.0, 0.0, FRAC_1_SQRT_2),
    ])
    .expect("complete by construction")
}

/// Depolarizing channel `r → η r`, `η ∈ [−1/3, 1]`.
pub fn kraus_depolarizing(eta: f64) -> Result<KrausSet> {
    if !(-1.0 / 3.0 - ALGEBRAIC_TOL..=1.0 + ALGEBRAIC_TOL).contains(&eta) {
        return Err(Error::domain(format!("depolarizing shrink factor {eta} outside [-1/3, 1]")));
    }
    let w0 = ((1.0 + 3.0 * eta) / 4.0).max(0.0).sqrt();
    let w = ((1.0 - eta) / 4.0).max(0.0).sqrt();
    let c = |x: f64| Complex64::new(x, 0.0);
    KrausSet::new(vec![
        identity() * c(w0),
        pauli_x() * c(w),
        pauli_y() * c(w),
        pauli_z() * c(w),
    ])
}

/// Affine action of a Kraus set from the centre and the three axis probes,
/// without assuming any structure.
pub fn affine_from_kraus(k: &KrausSet) -> GeneralAffine {
    let probe = |x, y, z| {
        let rho = density_from_bloch(BlochVector::new(x, y, z)).expect("probe lies in the Bloch ball");
        let r = bloch_from_density(&kraus_apply(k, &rho));
        Vector3::new(r.x, r.y, r.z)
    };
    let shift = probe(0.0, 0.0, 0.0);
    let matrix = Matrix3::from_columns(&[
        probe(1.0, 0.0, 0.0) - shift,
        probe(0.0, 1.0, 0.0) - shift,
        probe(0.0, 0.0, 1.0) - shift,
    ]);
    GeneralAffine { matrix, shift }
}
