//! The six-angle cloning isometry and its action on input qubits.
//!
//! The output space is A ⊗ B ⊗ C (copy A, copy B, ancilla C) with `|↑⟩ = 0`,
//! `|↓⟩ = 1` and basis index `4a + 2b + c`. The blank copy and ancilla are
//! implicit, so the machine is a 2 → 8 isometry rather than an 8 × 8 unitary.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bloch::{bloch_from_density, state_vector, DensityMatrix, StateAngles, ALGEBRAIC_TOL};
use crate::error::{Error, Result};

pub type Vec8 = SVector<Complex64, 8>;
pub type Mat8 = SMatrix<Complex64, 8, 8>;

/// Tolerance on positivity of three-qubit states.
pub const STATE_TOL: f64 = 1e-10;

/// Machine parameters `ω = (α, α̃, β, β̃, γ, γ̃)`, each in `[0, π]`.
///
/// The optimizer searches exactly this box; the half-angle structure of the
/// isometry makes it cover every distinct sign pattern of the copy maps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub beta: f64,
    pub beta_tilde: f64,
    pub gamma: f64,
    pub gamma_tilde: f64,
}

impl ParamSet {
    pub fn new(
        alpha: f64,
        alpha_tilde: f64,
        beta: f64,
        beta_tilde: f64,
        gamma: f64,
        gamma_tilde: f64,
    ) -> Result<Self> {
        Self::from_array([alpha, alpha_tilde, beta, beta_tilde, gamma, gamma_tilde])
    }

    /// Components in the order `(α, α̃, β, β̃, γ, γ̃)`. Values within
    /// `1e-12` outside the box are clamped onto it.
    pub fn from_array(a: [f64; 6]) -> Result<Self> {
        for (v, name) in a.iter().zip(Self::NAMES) {
            if !v.is_finite() || *v < -ALGEBRAIC_TOL || *v > PI + ALGEBRAIC_TOL {
                return Err(Error::domain(format!("{name} = {v} outside [0, pi]")));
            }
        }
        Ok(Self::from_array_unchecked(a.map(|v| v.clamp(0.0, PI))))
    }

    pub(crate) fn from_array_unchecked(a: [f64; 6]) -> Self {
        Self {
            alpha: a[0],
            alpha_tilde: a[1],
            beta: a[2],
            beta_tilde: a[3],
            gamma: a[4],
            gamma_tilde: a[5],
        }
    }

    pub const NAMES: [&'static str; 6] = ["alpha", "alpha_tilde", "beta", "beta_tilde", "gamma", "gamma_tilde"];

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.alpha,
            self.alpha_tilde,
            self.beta,
            self.beta_tilde,
            self.gamma,
            self.gamma_tilde,
        ]
    }

    /// The machine conjugated by a bit flip on every qubit. Swaps each
    /// parameter with its tilde partner; the copy maps keep `η` and change
    /// the sign of `δ_z`.
    pub fn mirrored(&self) -> Self {
        Self {
            alpha: self.alpha_tilde,
            alpha_tilde: self.alpha,
            beta: self.beta_tilde,
            beta_tilde: self.beta,
            gamma: self.gamma_tilde,
            gamma_tilde: self.gamma,
        }
    }
}

/// Images of `|↑⟩` and `|↓⟩` in A ⊗ B ⊗ C.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    pub col_up: Vec8,
    pub col_down: Vec8,
}

impl Isometry {
    /// The 8 × 2 matrix with columns `U|↑⟩`, `U|↓⟩`.
    pub fn matrix(&self) -> SMatrix<Complex64, 8, 2> {
        SMatrix::<Complex64, 8, 2>::from_columns(&[self.col_up, self.col_down])
    }

    /// `U|ψ⟩` for input amplitudes `ψ`.
    pub fn apply(&self, psi: [Complex64; 2]) -> Vec8 {
        self.col_up * psi[0] + self.col_down * psi[1]
    }
}

const fn idx(a: usize, b: usize, c: usize) -> usize {
    4 * a + 2 * b + c
}

pub fn build_isometry(omega: &ParamSet) -> Isometry {
    let half = |x: f64| (x / 2.0).sin_cos();
    let (sa, ca) = half(omega.alpha);
    let (sat, cat) = half(omega.alpha_tilde);
    let (sb, cb) = half(omega.beta);
    let (sbt, cbt) = half(omega.beta_tilde);
    let (sg, cg) = half(omega.gamma);
    let (sgt, cgt) = half(omega.gamma_tilde);
    let re = |x: f64| Complex64::new(x, 0.0);

    let mut up = Vec8::zeros();
    // cos(α/2)|u+⟩|↑⟩ + sin(α/2)|v+⟩|↓⟩
    up[idx(0, 0, 0)] = re(ca * cb);
    up[idx(1, 1, 0)] = re(ca * sb);
    up[idx(0, 1, 1)] = re(sa * cg);
    up[idx(1, 0, 1)] = re(sa * sg);

    let mut down = Vec8::zeros();
    // cos(α̃/2)|u−⟩|↓⟩ + sin(α̃/2)|v−⟩|↑⟩
    down[idx(0, 0, 1)] = re(cat * sbt);
    down[idx(1, 1, 1)] = re(cat * cbt);
    down[idx(0, 1, 0)] = re(sat * sgt);
    down[idx(1, 0, 0)] = re(sat * cgt);

    Isometry {
        col_up: up,
        col_down: down,
    }
}

/// Hermitian, unit-trace, positive semidefinite 8 × 8 matrix on A ⊗ B ⊗ C.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeQubitDensity(Mat8);

impl ThreeQubitDensity {
    pub fn new(m: Mat8) -> Result<Self> {
        let herm = (m - m.adjoint()).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let lo = h.symmetric_eigenvalues().min();
        if lo < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(Self(m))
    }

    /// `|v⟩⟨v|` for a unit vector `v`.
    pub fn pure(v: &Vec8) -> Self {
        Self(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Mat8 {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Output of the machine on a (possibly mixed) input qubit.
///
/// The input is split as `(1+r)/2 |ψ⟩⟨ψ| + (1−r)/2 |ψ⊥⟩⟨ψ⊥|` along its Bloch
/// direction and each pure component is pushed through the isometry.
pub fn evolve(omega: &ParamSet, input: &DensityMatrix) -> ThreeQubitDensity {
    let u = build_isometry(omega);
    let r = bloch_from_density(input);
    let len = r.norm();
    let (psi, psi_perp) = if len <= ALGEBRAIC_TOL {
        (
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        )
    } else {
        let psi = state_vector(StateAngles::from_bloch(r));
        (psi, [-psi[1].conj(), psi[0].conj()])
    };
    let len = len.min(1.0);
    let v = u.apply(psi);
    let w = u.apply(psi_perp);
    let hi = Complex64::new((1.0 + len) / 2.0, 0.0);
    let lo = Complex64::new((1.0 - len) / 2.0, 0.0);
    ThreeQubitDensity(v * v.adjoint() * hi + w * w.adjoint() * lo)
}
