//! Single-qubit state algebra: density matrices, Bloch vectors and the
//! ensemble-adapted Pauli frame.
//!
//! Conventions used throughout the crate:
//!
//! * Basis vectors are `|↑⟩ = (1, 0)` and `|↓⟩ = (0, 1)`.
//! * Pauli matrices are the standard ones, `σ_y = [[0, -i], [i, 0]]`.
//! * A pure state with polar angle `θ` and azimuth `φ` has amplitudes
//!   `(cos θ/2, e^{+iφ} sin θ/2)`, so its Bloch vector is exactly
//!   `(sin θ cos φ, sin θ sin φ, cos θ)`. Writing the `|↓⟩` amplitude with
//!   `e^{-iφ}` instead negates `n_y`; every fidelity in this crate depends on
//!   `n_y` only through `n_y²`, so none of the results change.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance applied when validating caller-supplied data.
pub const VALIDATION_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, ONE)
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// `[σ_x, σ_y, σ_z]` in the computational basis.
pub fn paulis() -> [Mat2; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.x, s * self.y, s * self.z)
    }

    pub fn add(self, other: Self) -> Self {
        Self::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.scale(-1.0))
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        let d = self.sub(other);
        d.x.abs().max(d.y.abs()).max(d.z.abs())
    }
}

/// Polar and azimuthal angle of a pure state on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateAngles {
    pub theta: f64,
    pub phi: f64,
}

impl StateAngles {
    /// Validates `θ ∈ [0, π]` and wraps `φ` into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::domain("state angles must be finite"));
        }
        if !(-VALIDATION_TOL..=PI + VALIDATION_TOL).contains(&theta) {
            return Err(Error::domain(format!("theta = {theta} outside [0, pi]")));
        }
        Ok(Self {
            theta: theta.clamp(0.0, PI),
            phi: wrap_phase(phi),
        })
    }

    /// Direction angles of a nonzero Bloch vector. The zero vector maps to the
    /// north pole.
    pub fn from_bloch(r: BlochVector) -> Self {
        let n = r.norm();
        if n == 0.0 {
            return Self { theta: 0.0, phi: 0.0 };
        }
        Self {
            theta: (r.z / n).clamp(-1.0, 1.0).acos(),
            phi: wrap_phase(r.y.atan2(r.x)),
        }
    }

    /// Unit Bloch vector `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn bloch_vector(self) -> BlochVector {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        BlochVector::new(st * cp, st * sp, ct)
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Amplitudes `(cos θ/2, e^{iφ} sin θ/2)` of the pure state with the given angles.
pub fn state_vector(angles: StateAngles) -> [Complex64; 2] {
    let (s, c) = (angles.theta / 2.0).sin_cos();
    [Complex64::new(c, 0.0), Complex64::from_polar(s, angles.phi)]
}

/// A 2×2 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn new(m: Mat2) -> Result<Self> {
        let herm = (m[(0, 1)] - m[(1, 0)].conj())
            .norm()
            .max(m[(0, 0)].im.abs())
            .max(m[(1, 1)].im.abs());
        if herm > VALIDATION_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = m[(0, 0)].re + m[(1, 1)].re;
        if (tr - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let rho = Self(m);
        let [lo, _] = rho.eigenvalues();
        if lo < -VALIDATION_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(m: Mat2) -> Self {
        Self(m)
    }

    pub fn pure(psi: [Complex64; 2]) -> Self {
        Self(Mat2::new(
            psi[0] * psi[0].conj(),
            psi[0] * psi[1].conj(),
            psi[1] * psi[0].conj(),
            psi[1] * psi[1].conj(),
        ))
    }

    pub fn from_angles(angles: StateAngles) -> Self {
        Self::pure(state_vector(angles))
    }

    pub fn maximally_mixed() -> Self {
        Self(identity() * Complex64::new(0.5, 0.0))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = self.0[(0, 1)];
        let disc = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
        [(a + d - disc) / 2.0, (a + d + disc) / 2.0]
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap_with(&self, psi: [Complex64; 2]) -> f64 {
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += psi[i].conj() * self.0[(i, j)] * psi[j];
            }
        }
        acc.re
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// `ρ = (I + r·σ)/2`.
pub fn density_from_bloch(r: BlochVector) -> Result<DensityMatrix> {
    let n = r.norm();
    if !n.is_finite() || n > 1.0 + VALIDATION_TOL {
        return Err(Error::UnphysicalBloch(n));
    }
    let half = 0.5;
    Ok(DensityMatrix(Mat2::new(
        Complex64::new(half * (1.0 + r.z), 0.0),
        Complex64::new(half * r.x, -half * r.y),
        Complex64::new(half * r.x, half * r.y),
        Complex64::new(half * (1.0 - r.z), 0.0),
    )))
}

/// `r_i = Tr(σ_i ρ)`.
pub fn bloch_from_density(rho: &DensityMatrix) -> BlochVector {
    let [x, y, z] = paulis().map(|s| (s * rho.matrix()).trace().re);
    BlochVector::new(x, y, z)
}

/// An orthonormal basis `{|↑⟩, |↓⟩}` (given in computational coordinates)
/// together with the Pauli operators it defines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliFrame {
    pub basis_up: [Complex64; 2],
    pub basis_down: [Complex64; 2],
    /// Length of the ensemble's mean Bloch vector; `ρ_S = (I + λσ_z)/2`.
    pub lambda: f64,
    /// Set when `ρ_S = I/2`, in which case every frame diagonalises it and the
    /// computational frame is returned.
    pub degenerate: bool,
}

impl PauliFrame {
    pub fn computational() -> Self {
        Self {
            basis_up: [ONE, ZERO],
            basis_down: [ZERO, ONE],
            lambda: 0.0,
            degenerate: false,
        }
    }

    fn outer(a: [Complex64; 2], b: [Complex64; 2]) -> Mat2 {
        Mat2::new(
            a[0] * b[0].conj(),
            a[0] * b[1].conj(),
            a[1] * b[0].conj(),
            a[1] * b[1].conj(),
        )
    }

    /// Frame Pauli operators `[σ'_x, σ'_y, σ'_z]` in computational coordinates.
    pub fn paulis(&self) -> [Mat2; 3] {
        let (u, d) = (self.basis_up, self.basis_down);
        let ud = Self::outer(u, d);
        let du = Self::outer(d, u);
        [
            ud + du,
            ud * (-I) + du * I,
            Self::outer(u, u) - Self::outer(d, d),
        ]
    }

    /// Bloch coordinates of `rho` with respect to this frame.
    pub fn coordinates(&self, rho: &DensityMatrix) -> BlochVector {
        let [x, y, z] = self.paulis().map(|s| (s * rho.matrix()).trace().re);
        BlochVector::new(x, y, z)
    }

    fn change_of_basis(&self) -> Mat2 {
        Mat2::new(
            self.basis_up[0],
            self.basis_down[0],
            self.basis_up[1],
            self.basis_down[1],
        )
    }

    /// Matrix of `rho` in this frame's basis, `W† ρ W`.
    pub fn to_frame(&self, rho: &DensityMatrix) -> DensityMatrix {
        let w = self.change_of_basis();
        DensityMatrix(w.adjoint() * rho.matrix() * w)
    }

    /// Inverse of [`PauliFrame::to_frame`].
    pub fn from_frame(&self, rho: &DensityMatrix) -> DensityMatrix {
        let w = self.change_of_basis();
        DensityMatrix(w * rho.matrix() * w.adjoint())
    }
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0usize;
    for w in weights {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::domain(format!("ensemble weight {w} must be positive")));
        }
        total += w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::domain("ensemble is empty"));
    }
    if (total - 1.0).abs() > VALIDATION_TOL {
        return Err(Error::domain(format!("ensemble weights sum to {total}, not 1")));
    }
    Ok(())
}

pub(crate) fn validate_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    check_weights(weights)
}

/// Frame in which the ensemble density `ρ_S = Σ w ρ` is diagonal with the
/// larger eigenvalue on `|↑⟩`.
///
/// The remaining freedom (a rotation about the new z axis, i.e. the phase of
/// `basis_down`) is fixed so that the transverse second-moment tensor is
/// diagonal with `n̄_x² ≥ n̄_y²`. `basis_up` has its largest-magnitude
/// component real and positive.
pub fn canonical_frame(states: &[(DensityMatrix, f64)]) -> Result<PauliFrame> {
    check_weights(states.iter().map(|s| s.1))?;

    let mean = states.iter().fold(BlochVector::zero(), |acc, (rho, w)| {
        acc.add(bloch_from_density(rho).scale(*w))
    });
    let lambda = mean.norm();
    if lambda <= ALGEBRAIC_TOL {
        return Ok(PauliFrame {
            lambda,
            degenerate: true,
            ..PauliFrame::computational()
        });
    }

    let dir = StateAngles::from_bloch(mean);
    let mut up = state_vector(dir);
    let k = if up[1].norm() > up[0].norm() { 1 } else { 0 };
    let fix = up[k].conj() / up[k].norm();
    up = [up[0] * fix, up[1] * fix];
    let down0 = [-up[1].conj(), up[0].conj()];

    let base = PauliFrame {
        basis_up: up,
        basis_down: down0,
        lambda,
        degenerate: false,
    };

    let (mut mxx, mut myy, mut mxy) = (0.0, 0.0, 0.0);
    for (rho, w) in states {
        let r = base.coordinates(rho);
        mxx += w * r.x * r.x;
        myy += w * r.y * r.y;
        mxy += w * r.x * r.y;
    }
    let anisotropy = ((mxx - myy).powi(2) + 4.0 * mxy * mxy).sqrt();
    if anisotropy <= ALGEBRAIC_TOL {
        return Ok(base);
    }
    // d -> e^{iχ} d rotates the frame x axis to cos χ x̂₀ + sin χ ŷ₀.
    let chi = 0.5 * (2.0 * mxy).atan2(mxx - myy);
    let phase = Complex64::from_polar(1.0, chi);
    Ok(PauliFrame {
        basis_down: [down0[0] * phase, down0[1] * phase],
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn density_from_bloch_examples() {
        let mixed = density_from_bloch(BlochVector::zero()).unwrap();
        assert!(mixed.max_abs_diff(&DensityMatrix::maximally_mixed()) < 1e-15);

        let north = density_from_bloch(BlochVector::new(0.0, 0.0, 1.0)).unwrap();
        let expected = Mat2::new(c(1.0, 0.0), ZERO, ZERO, ZERO);
        assert!((north.matrix() - expected).norm() < 1e-15);

        // (I + σ_x)/2 expanded by hand
        let plus_x = density_from_bloch(BlochVector::new(1.0, 0.0, 0.0)).unwrap();
        let expected = Mat2::new(c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0));
        assert!((plus_x.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn density_from_bloch_rejects_long_vectors() {
        assert!(matches!(
            density_from_bloch(BlochVector::new(0.0, 0.8, 0.8)),
            Err(Error::UnphysicalBloch(_))
        ));
        assert!(density_from_bloch(BlochVector::new(0.0, 0.0, 1.0 + 1e-10)).is_ok());
    }

    #[test]
    fn bloch_from_density_examples() {
        let r = bloch_from_density(&DensityMatrix::maximally_mixed());
        assert!(r.max_abs_diff(BlochVector::zero()) < 1e-15);

        let south = DensityMatrix::new(Mat2::new(ZERO, ZERO, ZERO, ONE)).unwrap();
        assert!(bloch_from_density(&south).max_abs_diff(BlochVector::new(0.0, 0.0, -1.0)) < 1e-15);

        // Tr(σ_y ρ) = 1 for ρ = (I + σ_y)/2
        let plus_y =
            DensityMatrix::new(Mat2::new(c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0)))
                .unwrap();
        assert!(bloch_from_density(&plus_y).max_abs_diff(BlochVector::new(0.0, 1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn density_validation() {
        let not_herm = Mat2::new(c(0.5, 0.0), c(0.3, 0.0), c(0.1, 0.0), c(0.5, 0.0));
        assert!(DensityMatrix::new(not_herm).is_err());
        let bad_trace = Mat2::new(c(0.7, 0.0), ZERO, ZERO, c(0.7, 0.0));
        assert!(DensityMatrix::new(bad_trace).is_err());
        let not_psd = Mat2::new(c(1.2, 0.0), ZERO, ZERO, c(-0.2, 0.0));
        assert!(DensityMatrix::new(not_psd).is_err());
    }

    #[test]
    fn state_vector_examples() {
        let north = state_vector(StateAngles::new(0.0, 0.0).unwrap());
        assert_abs_diff_eq!(north[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(north[1].norm(), 0.0, epsilon = 1e-15);

        let plus_x = state_vector(StateAngles::new(PI / 2.0, 0.0).unwrap());
        assert_abs_diff_eq!(plus_x[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(plus_x[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);

        let angles = StateAngles::new(PI / 2.0, PI / 2.0).unwrap();
        let plus_y = state_vector(angles);
        assert_abs_diff_eq!(plus_y[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(plus_y[1].im, FRAC_1_SQRT_2, epsilon = 1e-15);
        let r = bloch_from_density(&DensityMatrix::pure(plus_y));
        assert!(r.max_abs_diff(BlochVector::new(0.0, 1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn state_angles_validation() {
        assert!(StateAngles::new(-0.1, 0.0).is_err());
        assert!(StateAngles::new(3.2, 0.0).is_err());
        let a = StateAngles::new(1.0, -PI / 2.0).unwrap();
        assert_abs_diff_eq!(a.phi, 1.5 * PI, epsilon = 1e-15);
    }

    #[test]
    fn canonical_frame_single_north_state() {
        let up = DensityMatrix::from_angles(StateAngles::new(0.0, 0.0).unwrap());
        let frame = canonical_frame(&[(up, 1.0)]).unwrap();
        assert!(!frame.degenerate);
        assert_abs_diff_eq!(frame.lambda, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(frame.basis_up[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(frame.basis_up[1].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(frame.basis_down[1].norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn canonical_frame_two_states_bisects() {
        // Overlap 1/2 means the Bloch vectors are 2π/3 apart.
        let a = StateAngles::new(0.7, 0.3).unwrap();
        let r1 = a.bloch_vector();
        let axis = BlochVector::new(-r1.y, r1.x, 0.0).scale(1.0 / r1.x.hypot(r1.y));
        let r2 = rotate(r1, axis, 2.0 * PI / 3.0);
        let states = [
            (density_from_bloch(r1).unwrap(), 0.5),
            (density_from_bloch(r2).unwrap(), 0.5),
        ];
        let frame = canonical_frame(&states).unwrap();
        let c1 = frame.coordinates(&states[0].0);
        let c2 = frame.coordinates(&states[1].0);
        assert_abs_diff_eq!(0.5 * (c1.x + c2.x), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(0.5 * (c1.y + c2.y), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c1.z, c2.z, epsilon = 1e-12);
        assert_abs_diff_eq!(c1.z, 0.5, epsilon = 1e-12);
        // principal transverse axis is x
        assert_abs_diff_eq!(c1.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c1.x.abs(), 3f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn canonical_frame_equatorial_is_degenerate() {
        let states: Vec<_> = (0..8)
            .map(|j| {
                let a = StateAngles::new(PI / 2.0, j as f64 * PI / 4.0).unwrap();
                (DensityMatrix::from_angles(a), 0.125)
            })
            .collect();
        let frame = canonical_frame(&states).unwrap();
        assert!(frame.degenerate);
        assert_eq!(frame.basis_up, PauliFrame::computational().basis_up);
    }

    #[test]
    fn canonical_frame_rejects_bad_weights() {
        let up = DensityMatrix::from_angles(StateAngles::new(0.0, 0.0).unwrap());
        assert!(canonical_frame(&[(up, 0.5)]).is_err());
        assert!(canonical_frame(&[(up, 1.5), (up, -0.5)]).is_err());
        assert!(canonical_frame(&[]).is_err());
    }

    fn rotate(v: BlochVector, k: BlochVector, angle: f64) -> BlochVector {
        // Rodrigues
        let (s, c) = angle.sin_cos();
        let kxv = BlochVector::new(k.y * v.z - k.z * v.y, k.z * v.x - k.x * v.z, k.x * v.y - k.y * v.x);
        v.scale(c).add(kxv.scale(s)).add(k.scale(k.dot(v) * (1.0 - c)))
    }

    fn ball_vector() -> impl Strategy<Value = BlochVector> {
        (0.0..=1.0f64, 0.0..=PI, 0.0..TAU).prop_map(|(r, t, p)| {
            StateAngles { theta: t, phi: p }.bloch_vector().scale(r)
        })
    }

    fn ensemble() -> impl Strategy<Value = Vec<(DensityMatrix, f64)>> {
        prop::collection::vec((ball_vector(), 0.05..1.0f64), 1..6).prop_map(|items| {
            let total: f64 = items.iter().map(|i| i.1).sum();
            items
                .into_iter()
                .map(|(r, w)| (density_from_bloch(r).unwrap(), w / total))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn bloch_density_round_trip(r in ball_vector()) {
            let rho = density_from_bloch(r).unwrap();
            prop_assert!(DensityMatrix::new(*rho.matrix()).is_ok());
            prop_assert!(bloch_from_density(&rho).max_abs_diff(r) <= 1e-12);
        }

        #[test]
        fn pure_states_have_unit_bloch_vectors(t in 0.0..=PI, p in 0.0..TAU) {
            let a = StateAngles::new(t, p).unwrap();
            prop_assert!((a.bloch_vector().norm() - 1.0).abs() <= 1e-12);
            let rho = DensityMatrix::from_angles(a);
            let direct = density_from_bloch(a.bloch_vector()).unwrap();
            prop_assert!(rho.max_abs_diff(&direct) <= 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn canonical_frame_centres_ensemble(states in ensemble()) {
            let frame = canonical_frame(&states).unwrap();
            let u = frame.basis_up;
            let d = frame.basis_down;
            let inner = u[0].conj() * d[0] + u[1].conj() * d[1];
            prop_assert!(inner.norm() <= 1e-12);

            let mut mean = BlochVector::zero();
            let mut rho_s = Mat2::zeros();
            for (rho, w) in &states {
                mean = mean.add(frame.coordinates(rho).scale(*w));
                rho_s += rho.matrix() * Complex64::new(*w, 0.0);
            }
            if !frame.degenerate {
                prop_assert!(mean.x.abs() <= 1e-10 && mean.y.abs() <= 1e-10);
                prop_assert!((mean.z - frame.lambda).abs() <= 1e-10);
                let in_frame = frame.to_frame(&DensityMatrix::from_matrix_unchecked(rho_s));
                prop_assert!(in_frame.matrix()[(0, 1)].norm() <= 1e-12);
                prop_assert!(in_frame.matrix()[(0, 0)].re >= in_frame.matrix()[(1, 1)].re - 1e-12);
            }
        }

        #[test]
        fn frame_paulis_obey_algebra(states in ensemble()) {
            let frame = canonical_frame(&states).unwrap();
            let s = frame.paulis();
            let id = identity();
            // σ_i σ_j = δ_ij I + i ε_ijk σ_k
            for i in 0..3 {
                for j in 0..3 {
                    let mut expected = if i == j { id } else { Mat2::zeros() };
                    for (k, sk) in s.iter().enumerate() {
                        let eps = levi_civita(i, j, k);
                        if eps != 0.0 {
                            expected += sk * Complex64::new(0.0, eps);
                        }
                    }
                    let diff = (s[i] * s[j] - expected).norm();
                    prop_assert!(diff <= 1e-12, "i={i} j={j} diff={diff}");
                }
            }
        }
    }

    fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
        match (i, j, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    }
}
