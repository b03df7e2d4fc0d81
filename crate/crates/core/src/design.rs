//! Closed-form optimal machines for the standard ensembles.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;

use crate::bloch::ALGEBRAIC_TOL;
use crate::channel::{
    affine_closed_form, kraus_ad, kraus_dad, kraus_depolarizing, kraus_gad, kraus_sp, AffineMap,
    CopyLabel, KrausSet,
};
use crate::cloner::ParamSet;
use crate::ensembles::{moments_closed_form, two_state_vectors, EnsembleMoments, EnsembleSpec};
use crate::error::{Error, Result};
use crate::fidelity::{average_fidelity, check_weight, objective_raw, stationarity_residual};
use crate::optimize::{optimize_numeric, SearchBudget, SearchSummary};

/// Tolerance used when classifying maps and checking moment symmetries.
pub const CLASSIFY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum DesignCase {
    FixedTheta { theta_tilde: f64, p: f64 },
    PhaseCovariant { p: f64 },
    Universal { p: f64 },
    CenteredSymmetric { moments: EnsembleMoments },
    MirrorPC { theta_tilde: f64 },
    TwoState { s: f64 },
    TwoStateWeighted { k: f64 },
    GenericNumeric { moments: EnsembleMoments, p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelId {
    AD,
    GAD,
    Depolarizing,
    SymmetricPauli,
    DAD,
    Generic,
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::AD => "AD",
            Self::GAD => "GAD",
            Self::Depolarizing => "Depolarizing",
            Self::SymmetricPauli => "SymmetricPauli",
            Self::DAD => "DAD",
            Self::Generic => "Generic",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub case: DesignCase,
    /// Weight of copy A in the objective.
    pub p: f64,
    pub moments: EnsembleMoments,
    pub omega: ParamSet,
    pub map_a: AffineMap,
    pub map_b: AffineMap,
    pub f_a: f64,
    pub f_b: f64,
    pub objective: f64,
    /// Projected stationarity residual of the objective at `omega`.
    pub residual: f64,
    pub channel_id: ChannelId,
    /// Fidelities of the individual states of a two-state ensemble.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_state: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSummary>,
}

impl DesignResult {
    /// Kraus elements of the named channel realising the map of `copy`.
    pub fn kraus(&self, copy: CopyLabel) -> Option<KrausSet> {
        let w = &self.omega;
        let flip = |g: f64| match copy {
            CopyLabel::A => g,
            CopyLabel::B => PI - g,
        };
        let map = match copy {
            CopyLabel::A => self.map_a,
            CopyLabel::B => self.map_b,
        };
        match self.channel_id {
            ChannelId::AD => Some(kraus_ad(flip(w.gamma_tilde))),
            ChannelId::GAD => Some(kraus_gad(w.alpha, flip(w.gamma))),
            ChannelId::Depolarizing => kraus_depolarizing(map.eta_x).ok(),
            ChannelId::SymmetricPauli => kraus_sp(w.alpha).ok(),
            ChannelId::DAD => Some(kraus_dad(w.beta)),
            ChannelId::Generic => None,
        }
    }
}

pub(crate) fn finish(
    case: DesignCase,
    moments: EnsembleMoments,
    p: f64,
    omega: ParamSet,
    channel_id: ChannelId,
) -> DesignResult {
    let map_a = affine_closed_form(&omega, CopyLabel::A);
    let map_b = affine_closed_form(&omega, CopyLabel::B);
    let f_a = average_fidelity(&map_a, &moments);
    let f_b = average_fidelity(&map_b, &moments);
    DesignResult {
        case,
        p,
        moments,
        omega,
        map_a,
        map_b,
        f_a,
        f_b,
        objective: p * f_a + (1.0 - p) * f_b,
        residual: stationarity_residual(p, &omega, &moments),
        channel_id,
        per_state: None,
        search: None,
    }
}

fn check_theta_tilde(theta_tilde: f64) -> Result<()> {
    EnsembleSpec::FixedTheta { theta_tilde }.validate()
}

/// Maximizer of a function on `[lo, hi]`: dense scan, then golden-section
/// refinement of the best bracket to `tol`.
fn maximize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    const GRID: usize = 1024;
    let at = |i: usize| lo + (hi - lo) * i as f64 / GRID as f64;
    let best = (0..=GRID)
        .map(|i| (i, f(at(i))))
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
        .0;
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(GRID)));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [at(best), mid]
        .into_iter()
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap()
}

/// `d/dγ̃` of the objective along `ω = (0, π, 0, 0, 0, γ̃)`.
fn fixed_theta_slope(p: f64, g: f64, m: &EnsembleMoments) -> f64 {
    let perp = m.nx2_bar + m.ny2_bar;
    let (sh, ch) = (g / 2.0).sin_cos();
    let shared = 0.5 * g.sin() * (m.nz_bar - m.nz2_bar);
    let da = 0.5 * (-0.5 * sh * perp + shared);
    let db = 0.5 * (0.5 * ch * perp - shared);
    p * da + (1.0 - p) * db
}

/// Bisection on a decreasing slope within `±width` of `x`, clipped to
/// `[0, π]`. Returns `x` unchanged when the slope does not change sign there.
fn polish_on_slope(slope: impl Fn(f64) -> f64, x: f64, width: f64) -> f64 {
    let (mut lo, mut hi) = ((x - width).max(0.0), (x + width).min(PI));
    if !(slope(lo) > 0.0 && slope(hi) < 0.0) {
        return x;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ensemble at fixed polar angle `θ̃ ∈ [0, π/2]`: `ω = (0, π, 0, 0, 0, γ̃)`
/// with `γ̃` maximizing the objective (exactly `π/2` at `p = ½`). Each copy
/// is an amplitude-damping channel.
pub fn design_fixed_theta(theta_tilde: f64, p: f64) -> Result<DesignResult> {
    check_theta_tilde(theta_tilde)?;
    check_weight(p)?;
    let moments = moments_closed_form(&EnsembleSpec::FixedTheta { theta_tilde })?;
    let machine = |g: f64| [0.0, PI, 0.0, 0.0, 0.0, g];
    let gamma_tilde = if p == 0.5 {
        FRAC_PI_2
    } else {
        let g = maximize_1d(|g| objective_raw(p, &machine(g), &moments), 0.0, PI, 1e-10);
        polish_on_slope(|g| fixed_theta_slope(p, g, &moments), g, 1e-6)
    };
    let omega = ParamSet::from_array(machine(gamma_tilde))?;
    Ok(finish(
        DesignCase::FixedTheta { theta_tilde, p },
        moments,
        p,
        omega,
        ChannelId::AD,
    ))
}

/// Any polar angle in `[0, π]`: angles past the equator are reflected, and
/// the machine for the reflected ensemble is mirrored back.
pub fn design_fixed_theta_any(theta: f64, p: f64) -> Result<DesignResult> {
    let (spec, flipped) = EnsembleSpec::FixedTheta { theta_tilde: theta }.reflected();
    let EnsembleSpec::FixedTheta { theta_tilde } = spec else {
        unreachable!()
    };
    let base = design_fixed_theta(theta_tilde, p)?;
    if !flipped {
        return Ok(base);
    }
    let moments = EnsembleMoments {
        nz_bar: theta.cos(),
        ..base.moments
    };
    Ok(finish(
        DesignCase::FixedTheta {
            theta_tilde: theta,
            p,
        },
        moments,
        p,
        base.omega.mirrored(),
        ChannelId::AD,
    ))
}

/// `γ = γ̃ = 2 atan2(1 − p, p)` so that `cos(γ/2) = p/√(p² + (1 − p)²)`.
fn weight_angle(p: f64) -> f64 {
    2.0 * (1.0 - p).atan2(p)
}

/// Equatorial ensemble: `α = α̃ = π/2`, `β = β̃ = 0`, `γ = γ̃` from `p`.
/// The free `α` is fixed at `π/2`, which centres both copies.
pub fn design_phase_covariant(p: f64) -> Result<DesignResult> {
    check_weight(p)?;
    let g = weight_angle(p);
    let omega = ParamSet::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, g, g)?;
    Ok(finish(
        DesignCase::PhaseCovariant { p },
        EnsembleMoments::equatorial(),
        p,
        omega,
        ChannelId::GAD,
    ))
}

/// Uniform ensemble: `α = α̃` with `cos(α/2) = 1/√(2(1 − p + p²))`,
/// `β = β̃ = 0`, `γ = γ̃ = 2 atan2(1 − p, p)`. Copy A shrinks by
/// `p/(1 − p + p²)`, copy B by `(1 − p)/(1 − p + p²)`.
///
/// The objective is evaluated at the same `p`; the machine is stationary for
/// that weight only at `p ∈ {0, ½, 1}` (see [`universal_stationary_weight`]).
pub fn design_universal(p: f64) -> Result<DesignResult> {
    check_weight(p)?;
    let alpha = 2.0 * (1.0 - 2.0 * p + 2.0 * p * p).sqrt().atan();
    let g = weight_angle(p);
    let omega = ParamSet::new(alpha, alpha, 0.0, 0.0, g, g)?;
    Ok(finish(
        DesignCase::Universal { p },
        EnsembleMoments::uniform_sphere(),
        p,
        omega,
        ChannelId::Depolarizing,
    ))
}

/// Weight `q(2 − q)/(1 + 2q − 2q²)` at which the universal machine with
/// parameter `q` maximizes the objective.
pub fn universal_stationary_weight(q: f64) -> f64 {
    q * (2.0 - q) / (1.0 + 2.0 * q - 2.0 * q * q)
}

/// Inverse of [`universal_stationary_weight`] on `[0, 1]`.
pub fn universal_parameter_for_weight(p: f64) -> f64 {
    p / ((1.0 - p) + (1.0 - 3.0 * p + 3.0 * p * p).sqrt())
}

fn check_centered_symmetric(m: &EnsembleMoments) -> Result<()> {
    m.validate()?;
    if (m.nx2_bar - m.ny2_bar).abs() > CLASSIFY_TOL || m.nz_bar.abs() > CLASSIFY_TOL {
        return Err(Error::domain(
            "centered symmetric design needs nx2_bar = ny2_bar and nz_bar = 0",
        ));
    }
    Ok(())
}

/// Symmetric machine for centred, phase-symmetric moments:
/// `ω = (α, α, 0, 0, π/2, π/2)` with `tan α = √2 (1 − n̄_z²)/n̄_z²`.
pub fn design_centered_symmetric(moments: &EnsembleMoments) -> Result<DesignResult> {
    check_centered_symmetric(moments)?;
    let nz2 = moments.nz2_bar;
    let alpha = (SQRT_2 * (1.0 - nz2)).atan2(nz2);
    let omega = ParamSet::new(alpha, alpha, 0.0, 0.0, FRAC_PI_2, FRAC_PI_2)?;
    Ok(finish(
        DesignCase::CenteredSymmetric { moments: *moments },
        *moments,
        0.5,
        omega,
        ChannelId::SymmetricPauli,
    ))
}

pub fn design_mirror_pc(theta_tilde: f64) -> Result<DesignResult> {
    let (spec, _) = EnsembleSpec::MirrorPhaseCovariant { theta_tilde }.reflected();
    let moments = moments_closed_form(&spec)?;
    let mut r = design_centered_symmetric(&moments)?;
    r.case = DesignCase::MirrorPC { theta_tilde };
    Ok(r)
}

/// Symmetric machine for moments with `n̄_y² = 0`:
/// `ω = (0, π, β, 0, π/2, π/2)` where `sin(π/4 − β/2)` is the positive root
/// `2X/(n̄_x² + √(n̄_x⁴ + 8X²))`, `X = n̄_z² + n̄_z`. Falls back to the
/// numerical optimizer when the root is undefined.
pub fn design_phase_dependent(moments: &EnsembleMoments, case: DesignCase) -> Result<DesignResult> {
    moments.validate()?;
    if moments.ny2_bar.abs() > CLASSIFY_TOL {
        return Err(Error::domain("phase-dependent design needs ny2_bar = 0"));
    }
    let x = moments.nz2_bar + moments.nz_bar;
    let nx2 = moments.nx2_bar;
    let denom = nx2 + (nx2 * nx2 + 8.0 * x * x).sqrt();
    if denom <= ALGEBRAIC_TOL {
        let mut r = optimize_numeric(moments, 0.5, &SearchBudget::default())?;
        r.case = case;
        return Ok(r);
    }
    let root = 2.0 * x / denom;
    let beta = FRAC_PI_2 - 2.0 * root.asin();
    let omega = ParamSet::new(0.0, PI, beta, 0.0, FRAC_PI_2, FRAC_PI_2)?;
    Ok(finish(case, *moments, 0.5, omega, ChannelId::DAD))
}

fn per_state(result: &mut DesignResult, overlap: f64, weight: f64) -> Result<()> {
    let states = two_state_vectors(overlap, weight)?;
    let map = result.map_a;
    result.per_state = Some(states.iter().map(|n| 0.5 * (1.0 + n.dot(map.apply(*n)))).collect());
    Ok(())
}

/// Two equiprobable states with overlap `s ∈ (0, 1)`.
pub fn design_two_state(s: f64) -> Result<DesignResult> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!("overlap s = {s} outside (0, 1)")));
    }
    two_state(s, 0.5, DesignCase::TwoState { s })
}

/// Two states with overlap `½`, the first with probability `k ∈ [0, ½]`.
pub fn design_two_state_weighted(k: f64) -> Result<DesignResult> {
    if !(0.0..=0.5).contains(&k) {
        return Err(Error::domain(format!("weight k = {k} outside [0, 1/2]")));
    }
    two_state(0.5, k, DesignCase::TwoStateWeighted { k })
}

/// Two states with any overlap in `[0, 1)` and weight in `[0, 1]`.
pub fn design_two_state_general(overlap: f64, weight: f64) -> Result<DesignResult> {
    two_state(overlap, weight, DesignCase::TwoState { s: overlap })
}

fn two_state(overlap: f64, weight: f64, case: DesignCase) -> Result<DesignResult> {
    let moments = moments_closed_form(&EnsembleSpec::TwoState { overlap, weight })?;
    let mut r = design_phase_dependent(&moments, case)?;
    per_state(&mut r, overlap, weight)?;
    Ok(r)
}

/// Optimal machine for the design case.
pub fn design(case: &DesignCase) -> Result<DesignResult> {
    match case {
        DesignCase::FixedTheta { theta_tilde, p } => design_fixed_theta(*theta_tilde, *p),
        DesignCase::PhaseCovariant { p } => design_phase_covariant(*p),
        DesignCase::Universal { p } => design_universal(*p),
        DesignCase::CenteredSymmetric { moments } => design_centered_symmetric(moments),
        DesignCase::MirrorPC { theta_tilde } => design_mirror_pc(*theta_tilde),
        DesignCase::TwoState { s } => design_two_state(*s),
        DesignCase::TwoStateWeighted { k } => design_two_state_weighted(*k),
        DesignCase::GenericNumeric { moments, p } => optimize_numeric(moments, *p, &SearchBudget::default()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub phase_independent: bool,
    pub centered: bool,
}

/// Phase independence (`η_x = η_y`) and centring (`δ_z = 0`) of a machine,
/// judged on both copies.
pub fn classify(map_a: &AffineMap, map_b: &AffineMap) -> Classification {
    let pi = |m: &AffineMap| (m.eta_x - m.eta_y).abs() <= CLASSIFY_TOL;
    let c = |m: &AffineMap| m.delta_z.abs() <= CLASSIFY_TOL;
    Classification {
        phase_independent: pi(map_a) && pi(map_b),
        centered: c(map_a) && c(map_b),
    }
}

/// `√((1 − F^A)(1 − F^B)) − [½ − (1 − F^A) − (1 − F^B)]`; zero on the
/// universal no-cloning frontier.
///
/// Evaluated as `(e_A e_B − s²)/(√(e_A e_B) + s)` with `s = ½ − e_A − e_B`
/// when `s > 0`, which avoids the square root's amplification of rounding
/// when one copy is perfect.
pub fn no_cloning_residual(f_a: f64, f_b: f64) -> f64 {
    let (ea, eb) = (1.0 - f_a, 1.0 - f_b);
    let prod = (ea * eb).max(0.0);
    let s = 0.5 - ea - eb;
    if s > 0.0 {
        (prod - s * s) / (prod.sqrt() + s)
    } else {
        prod.sqrt() - s
    }
}
