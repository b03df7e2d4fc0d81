//! Input ensembles and the four moments that fix every average fidelity.
//!
//! All moments are expressed in the ensemble's canonical frame (see
//! [`canonical_frame`]), where `n̄_x = n̄_y = 0` and `n̄_z ≥ 0`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::bloch::{
    canonical_frame, validate_weights, BlochVector, DensityMatrix,
    StateAngles, ALGEBRAIC_TOL, VALIDATION_TOL,
};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, CompensatedSum};

pub const MIN_RESOLUTION: usize = 16;

/// Tolerance for the moment sum rule `n̄_x² + n̄_y² + n̄_z² = 1`.
pub const SUM_RULE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub enum EnsembleSpec {
    /// Polar angle fixed at `θ̃`, azimuth uniform.
    FixedTheta { theta_tilde: f64 },
    /// Equator of the Bloch sphere, azimuth uniform.
    Equatorial,
    /// Uniform distribution over the whole sphere.
    UniformSphere,
    /// Polar angle `θ̃` or `π - θ̃` with equal probability, azimuth uniform.
    MirrorPhaseCovariant { theta_tilde: f64 },
    /// Two pure states with amplitude overlap `⟨ψ₁|ψ₂⟩ = overlap`; `ψ₁` has
    /// probability `weight`.
    TwoState { overlap: f64, weight: f64 },
    /// Finite list of states (in any frame) with probabilities.
    Discrete { states: Vec<(StateAngles, f64)> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMoments {
    pub nz_bar: f64,
    pub nx2_bar: f64,
    pub ny2_bar: f64,
    pub nz2_bar: f64,
}

impl EnsembleMoments {
    pub fn new(nz_bar: f64, nx2_bar: f64, ny2_bar: f64, nz2_bar: f64) -> Result<Self> {
        let m = Self {
            nz_bar,
            nx2_bar,
            ny2_bar,
            nz2_bar,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.nz_bar, self.nx2_bar, self.ny2_bar, self.nz2_bar];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("moments must be finite"));
        }
        if self.nz_bar.abs() > 1.0 + VALIDATION_TOL {
            return Err(Error::domain(format!("nz_bar = {} outside [-1, 1]", self.nz_bar)));
        }
        for v in &all[1..] {
            if !(-VALIDATION_TOL..=1.0 + VALIDATION_TOL).contains(v) {
                return Err(Error::domain(format!("second moment {v} outside [0, 1]")));
            }
        }
        let s = self.sum_rule_residual();
        if s.abs() > SUM_RULE_TOL {
            return Err(Error::domain(format!("moment sum rule violated by {s:e}")));
        }
        if self.nz_bar * self.nz_bar > self.nz2_bar + VALIDATION_TOL {
            return Err(Error::domain("nz_bar^2 exceeds nz2_bar"));
        }
        Ok(())
    }

    pub fn sum_rule_residual(&self) -> f64 {
        self.nx2_bar + self.ny2_bar + self.nz2_bar - 1.0
    }

    pub fn uniform_sphere() -> Self {
        let third = 1.0 / 3.0;
        Self {
            nz_bar: 0.0,
            nx2_bar: third,
            ny2_bar: third,
            nz2_bar: third,
        }
    }

    pub fn equatorial() -> Self {
        Self {
            nz_bar: 0.0,
            nx2_bar: 0.5,
            ny2_bar: 0.5,
            nz2_bar: 0.0,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.nz_bar - other.nz_bar,
            self.nx2_bar - other.nx2_bar,
            self.ny2_bar - other.ny2_bar,
            self.nz2_bar - other.nz2_bar,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.nz_bar, self.nx2_bar, self.ny2_bar, self.nz2_bar]
    }
}

fn check_theta_tilde(theta_tilde: f64) -> Result<()> {
    if !(-ALGEBRAIC_TOL..=FRAC_PI_2 + ALGEBRAIC_TOL).contains(&theta_tilde) {
        return Err(Error::domain(format!(
            "theta_tilde = {theta_tilde} outside [0, pi/2]; reflect the ensemble first"
        )));
    }
    Ok(())
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::FixedTheta { theta_tilde } | Self::MirrorPhaseCovariant { theta_tilde } => {
                check_theta_tilde(*theta_tilde)
            }
            Self::Equatorial | Self::UniformSphere => Ok(()),
            Self::TwoState { overlap, weight } => {
                if !(0.0..1.0).contains(overlap) {
                    return Err(Error::domain(format!("overlap = {overlap} outside [0, 1)")));
                }
                if !(0.0..=1.0).contains(weight) {
                    return Err(Error::domain(format!("weight = {weight} outside [0, 1]")));
                }
                Ok(())
            }
            Self::Discrete { states } => validate_weights(states.iter().map(|s| s.1)),
        }
    }

    /// Maps `θ̃ ∈ (π/2, π]` onto `π - θ̃`. The returned flag is set when the
    /// fixed-polar-angle ensemble was reflected through the equator, i.e. when
    /// `|↑⟩` and `|↓⟩` were relabelled and a machine designed for the
    /// returned spec must be mirrored back (see `ParamSet::mirrored`). The
    /// mirror phase-covariant ensemble is invariant under the reflection.
    pub fn reflected(&self) -> (Self, bool) {
        match self {
            Self::FixedTheta { theta_tilde } if *theta_tilde > FRAC_PI_2 => (
                Self::FixedTheta {
                    theta_tilde: PI - theta_tilde,
                },
                true,
            ),
            Self::MirrorPhaseCovariant { theta_tilde } if *theta_tilde > FRAC_PI_2 => (
                Self::MirrorPhaseCovariant {
                    theta_tilde: PI - theta_tilde,
                },
                false,
            ),
            other => (other.clone(), false),
        }
    }
}

/// Bloch vectors (canonical frame) and probabilities of a finite ensemble.
fn canonical_support(spec: &EnsembleSpec) -> Result<Vec<(BlochVector, f64)>> {
    let raw: Vec<(DensityMatrix, f64)> = match spec {
        EnsembleSpec::TwoState { overlap, weight } => {
            // ψ₁ = |↑⟩; ψ₂ at polar angle 2 arccos(s) so that ⟨ψ₁|ψ₂⟩ = s.
            let first = StateAngles::new(0.0, 0.0)?;
            let second = StateAngles::new(2.0 * overlap.acos(), 0.0)?;
            let mut v = Vec::with_capacity(2);
            if *weight > 0.0 {
                v.push((DensityMatrix::from_angles(first), *weight));
            }
            if *weight < 1.0 {
                v.push((DensityMatrix::from_angles(second), 1.0 - weight));
            }
            v
        }
        EnsembleSpec::Discrete { states } => states
            .iter()
            .map(|(a, w)| (DensityMatrix::from_angles(*a), *w))
            .collect(),
        _ => unreachable!("continuous ensemble has no finite support"),
    };
    let frame = canonical_frame(&raw)?;
    Ok(raw
        .iter()
        .map(|(rho, w)| (frame.coordinates(rho), *w))
        .collect())
}

/// Bloch vectors `r₁, r₂` of a two-state ensemble in its canonical frame:
/// both in the x–z plane, `r₁` with non-negative x component.
pub fn two_state_vectors(overlap: f64, weight: f64) -> Result<[BlochVector; 2]> {
    EnsembleSpec::TwoState { overlap, weight }.validate()?;
    let s2 = overlap * overlap;
    let sin2 = 1.0 - s2;
    let tilt = 2.0 * weight - 1.0;
    let len = (tilt * tilt * sin2 + s2).sqrt();
    if len <= ALGEBRAIC_TOL {
        // orthogonal pair with zero mean: the frame is the computational one,
        // in which the pair sits on the z axis
        return Ok([BlochVector::new(0.0, 0.0, 1.0), BlochVector::new(0.0, 0.0, -1.0)]);
    }
    // components along the mean direction, then the transverse remainder
    let z1 = (tilt * sin2 + s2) / len;
    let z2 = (-tilt * sin2 + s2) / len;
    let x1 = (1.0 - z1 * z1).max(0.0).sqrt();
    let x2 = -(1.0 - z2 * z2).max(0.0).sqrt();
    Ok([BlochVector::new(x1, 0.0, z1), BlochVector::new(x2, 0.0, z2)])
}

/// Exact moments of each ensemble family.
pub fn moments_closed_form(spec: &EnsembleSpec) -> Result<EnsembleMoments> {
    spec.validate()?;
    let m = match spec {
        EnsembleSpec::FixedTheta { theta_tilde } => {
            let (s, c) = theta_tilde.sin_cos();
            EnsembleMoments {
                nz_bar: c,
                nx2_bar: 0.5 * s * s,
                ny2_bar: 0.5 * s * s,
                nz2_bar: c * c,
            }
        }
        EnsembleSpec::Equatorial => EnsembleMoments::equatorial(),
        EnsembleSpec::UniformSphere => EnsembleMoments::uniform_sphere(),
        EnsembleSpec::MirrorPhaseCovariant { theta_tilde } => {
            let (s, c) = theta_tilde.sin_cos();
            EnsembleMoments {
                nz_bar: 0.0,
                nx2_bar: 0.5 * s * s,
                ny2_bar: 0.5 * s * s,
                nz2_bar: c * c,
            }
        }
        EnsembleSpec::TwoState { overlap, weight } => {
            let [r1, r2] = two_state_vectors(*overlap, *weight)?;
            let (k, q) = (*weight, 1.0 - weight);
            let nz2 = k * r1.z * r1.z + q * r2.z * r2.z;
            EnsembleMoments {
                nz_bar: k * r1.z + q * r2.z,
                nx2_bar: 1.0 - nz2,
                ny2_bar: 0.0,
                nz2_bar: nz2,
            }
        }
        EnsembleSpec::Discrete { .. } => moments_of(&support_nodes(spec)?),
    };
    Ok(m)
}

fn support_nodes(spec: &EnsembleSpec) -> Result<Vec<(StateAngles, f64)>> {
    Ok(canonical_support(spec)?
        .into_iter()
        .map(|(r, w)| (StateAngles::from_bloch(r), w))
        .collect())
}

/// Weighted integration nodes over the ensemble in its canonical frame:
/// Gauss–Legendre in `cos θ` for the uniform sphere, an `resolution`-point
/// trapezoid rule in `φ` for every continuous family, and the exact support
/// for finite ensembles.
pub fn quadrature_nodes(spec: &EnsembleSpec, resolution: usize) -> Result<Vec<(StateAngles, f64)>> {
    spec.validate()?;
    if resolution < MIN_RESOLUTION {
        return Err(Error::domain(format!(
            "quadrature resolution {resolution} below minimum {MIN_RESOLUTION}"
        )));
    }
    let n = resolution;
    let ring = |theta: f64, weight: f64| {
        (0..n).map(move |j| {
            (
                StateAngles {
                    theta,
                    phi: TAU * j as f64 / n as f64,
                },
                weight / n as f64,
            )
        })
    };
    let nodes = match spec {
        EnsembleSpec::FixedTheta { theta_tilde } => ring(*theta_tilde, 1.0).collect(),
        EnsembleSpec::Equatorial => ring(FRAC_PI_2, 1.0).collect(),
        EnsembleSpec::MirrorPhaseCovariant { theta_tilde } => ring(*theta_tilde, 0.5)
            .chain(ring(PI - theta_tilde, 0.5))
            .collect(),
        EnsembleSpec::UniformSphere => gauss_legendre(n)
            .into_iter()
            .flat_map(|(x, w)| ring(x.acos(), 0.5 * w))
            .collect(),
        EnsembleSpec::TwoState { .. } | EnsembleSpec::Discrete { .. } => support_nodes(spec)?,
    };
    Ok(nodes)
}

fn moments_of(nodes: &[(StateAngles, f64)]) -> EnsembleMoments {
    let mut nz = CompensatedSum::default();
    let mut nx2 = CompensatedSum::default();
    let mut ny2 = CompensatedSum::default();
    let mut nz2 = CompensatedSum::default();
    for (a, w) in nodes {
        let n = a.bloch_vector();
        nz.add(w * n.z);
        nx2.add(w * n.x * n.x);
        ny2.add(w * n.y * n.y);
        nz2.add(w * n.z * n.z);
    }
    EnsembleMoments {
        nz_bar: nz.value(),
        nx2_bar: nx2.value(),
        ny2_bar: ny2.value(),
        nz2_bar: nz2.value(),
    }
}

/// Moments by numerical integration over [`quadrature_nodes`].
pub fn moments_quadrature(spec: &EnsembleSpec, resolution: usize) -> Result<EnsembleMoments> {
    Ok(moments_of(&quadrature_nodes(spec, resolution)?))
}

/// Deterministic pseudo-random draws from the ensemble, in its canonical frame.
pub fn sample(spec: &EnsembleSpec, count: usize, seed: u64) -> Result<Vec<StateAngles>> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = match spec {
        EnsembleSpec::FixedTheta { theta_tilde } => (0..count)
            .map(|_| StateAngles {
                theta: *theta_tilde,
                phi: rng.gen_range(0.0..TAU),
            })
            .collect(),
        EnsembleSpec::Equatorial => (0..count)
            .map(|_| StateAngles {
                theta: FRAC_PI_2,
                phi: rng.gen_range(0.0..TAU),
            })
            .collect(),
        EnsembleSpec::UniformSphere => (0..count)
            .map(|_| {
                let z: f64 = rng.gen_range(-1.0..=1.0);
                StateAngles {
                    theta: z.acos(),
                    phi: rng.gen_range(0.0..TAU),
                }
            })
            .collect(),
        EnsembleSpec::MirrorPhaseCovariant { theta_tilde } => (0..count)
            .map(|_| {
                let theta = if rng.gen_bool(0.5) {
                    *theta_tilde
                } else {
                    PI - theta_tilde
                };
                StateAngles {
                    theta,
                    phi: rng.gen_range(0.0..TAU),
                }
            })
            .collect(),
        EnsembleSpec::TwoState { .. } | EnsembleSpec::Discrete { .. } => {
            let support = support_nodes(spec)?;
            let index = WeightedIndex::new(support.iter().map(|s| s.1))
                .map_err(|e| Error::domain(e.to_string()))?;
            (0..count).map(|_| support[index.sample(&mut rng)].0).collect()
        }
    };
    Ok(out)
}

/// Canonical JSON layout of an [`EnsembleSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    overlap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<Vec<StateJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    theta: f64,
    phi: f64,
    w: f64,
}

impl TryFrom<SpecJson> for EnsembleSpec {
    type Error = Error;

    fn try_from(j: SpecJson) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Spec(format!("variant {} requires `{name}`", j.variant)))
        };
        let spec = match j.variant.as_str() {
            "FixedTheta" => Self::FixedTheta {
                theta_tilde: need(j.theta_tilde, "theta_tilde")?,
            },
            "Equatorial" => Self::Equatorial,
            "UniformSphere" => Self::UniformSphere,
            "MirrorPhaseCovariant" => Self::MirrorPhaseCovariant {
                theta_tilde: need(j.theta_tilde, "theta_tilde")?,
            },
            "TwoState" => Self::TwoState {
                overlap: need(j.overlap, "overlap")?,
                weight: j.weight.unwrap_or(0.5),
            },
            "Discrete" => {
                let states = j
                    .states
                    .as_ref()
                    .ok_or_else(|| Error::Spec("variant Discrete requires `states`".into()))?
                    .iter()
                    .map(|s| Ok((StateAngles::new(s.theta, s.phi)?, s.w)))
                    .collect::<Result<Vec<_>>>()?;
                Self::Discrete { states }
            }
            other => return Err(Error::Spec(format!("unknown variant `{other}`"))),
        };
        Ok(spec)
    }
}

impl From<EnsembleSpec> for SpecJson {
    fn from(spec: EnsembleSpec) -> Self {
        let mut j = SpecJson {
            variant: String::new(),
            theta_tilde: None,
            overlap: None,
            weight: None,
            states: None,
        };
        j.variant = match spec {
            EnsembleSpec::FixedTheta { theta_tilde } => {
                j.theta_tilde = Some(theta_tilde);
                "FixedTheta"
            }
            EnsembleSpec::Equatorial => "Equatorial",
            EnsembleSpec::UniformSphere => "UniformSphere",
            EnsembleSpec::MirrorPhaseCovariant { theta_tilde } => {
                j.theta_tilde = Some(theta_tilde);
                "MirrorPhaseCovariant"
            }
            EnsembleSpec::TwoState { overlap, weight } => {
                j.overlap = Some(overlap);
                j.weight = Some(weight);
                "TwoState"
            }
            EnsembleSpec::Discrete { states } => {
                j.states = Some(
                    states
                        .into_iter()
                        .map(|(a, w)| StateJson {
                            theta: a.theta,
                            phi: a.phi,
                            w,
                        })
                        .collect(),
                );
                "Discrete"
            }
        }
        .to_string();
        j
    }
}

/// Parses the canonical JSON encoding.
pub fn spec_from_json(text: &str) -> Result<EnsembleSpec> {
    serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
}
