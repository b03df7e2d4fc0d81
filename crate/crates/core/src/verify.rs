//! Self-check suites: closed-form fidelities against their formulas, channel
//! equivalences, extraction and integration oracles, and optimizer agreement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};

use crate::channel::{
    affine_closed_form, affine_extract_general, affine_from_kraus, kraus_ad, kraus_dad, kraus_gad,
    kraus_sp, AffineMap, CopyLabel, KrausSet,
};
use crate::cloner::ParamSet;
use crate::design::{
    design_centered_symmetric, design_fixed_theta, design_mirror_pc, design_phase_covariant,
    design_two_state, design_two_state_weighted, design_universal, no_cloning_residual,
    universal_stationary_weight, DesignResult,
};
use crate::ensembles::{moments_closed_form, EnsembleMoments, EnsembleSpec};
use crate::fidelity::{average_fidelity, average_fidelity_oracle, stationarity_residual_in};
use crate::optimize::{optimize_numeric, SearchBudget};
use crate::Result;

const SEED: u64 = 0x0c1a_55e5_7a11_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Reduced sample counts, no optimizer runs beyond a few points.
    Quick,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Largest deviation seen.
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    fn new(name: &str, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            passed: worst <= tolerance,
            worst,
            tolerance,
        }
    }
}

fn p_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn theta_grid() -> Vec<f64> {
    (0..=4).map(|i| i as f64 * FRAC_PI_8).collect()
}

fn random_omegas(count: usize, stream: u64) -> Vec<ParamSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rng.set_stream(stream);
    (0..count)
        .map(|_| ParamSet::from_array(std::array::from_fn(|_| rng.gen_range(0.0..=PI))).expect("inside the box"))
        .collect()
}

/// Larger of the two, with NaN winning so that it fails the check.
fn worse(a: f64, b: f64) -> f64 {
    if b.is_nan() || b > a {
        b
    } else {
        a
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, worse)
}

fn canonical_specs() -> Vec<EnsembleSpec> {
    vec![
        EnsembleSpec::UniformSphere,
        EnsembleSpec::Equatorial,
        EnsembleSpec::FixedTheta { theta_tilde: 0.7 },
        EnsembleSpec::MirrorPhaseCovariant { theta_tilde: 1.1 },
        EnsembleSpec::TwoState { overlap: 0.5, weight: 0.5 },
        EnsembleSpec::TwoState { overlap: 0.5, weight: 0.2 },
    ]
}

fn universal_symmetric() -> Result<CheckOutcome> {
    let a = design_universal(0.5)?;
    let b = design_centered_symmetric(&EnsembleMoments::uniform_sphere())?;
    let worst = max_of([a.f_a, a.f_b, b.f_a, b.f_b].map(|f| (f - 5.0 / 6.0).abs()));
    Ok(CheckOutcome::new("universal symmetric fidelity 5/6", worst, 1e-9))
}

fn universal_frontier() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for p in p_grid() {
        let r = design_universal(p)?;
        let d = 1.0 - p + p * p;
        worst = max_of([
            worst,
            (r.f_a - 0.5 * (1.0 + p / d)).abs(),
            (r.f_b - 0.5 * (1.0 + (1.0 - p) / d)).abs(),
            no_cloning_residual(r.f_a, r.f_b).abs(),
        ]);
    }
    Ok(CheckOutcome::new("universal asymmetric frontier", worst, 1e-9))
}

fn phase_covariant() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for p in p_grid() {
        let r = design_phase_covariant(p)?;
        let norm = (p * p + (1.0 - p) * (1.0 - p)).sqrt();
        worst = max_of([
            worst,
            (r.f_a - 0.5 * (1.0 + p / norm)).abs(),
            (r.f_b - 0.5 * (1.0 + (1.0 - p) / norm)).abs(),
        ]);
    }
    Ok(CheckOutcome::new("phase-covariant trade-off", worst, 1e-9))
}

fn fixed_theta() -> Result<Vec<CheckOutcome>> {
    let mut worst: f64 = 0.0;
    for t in theta_grid() {
        let r = design_fixed_theta(t, 0.5)?;
        let (s, c) = t.sin_cos();
        let f = 0.5 * (1.0 + SQRT_2 / 2.0 * s * s + 0.5 * (c * c + c));
        worst = max_of([worst, (r.f_a - f).abs(), (r.f_b - f).abs()]);
    }
    let eq = design_fixed_theta(FRAC_PI_2, 0.5)?;
    let pc = design_phase_covariant(0.5)?;
    let gap = max_of([(eq.f_a - pc.f_a).abs(), (eq.f_b - pc.f_b).abs()]);
    Ok(vec![
        CheckOutcome::new("fixed polar angle symmetric", worst, 1e-9),
        CheckOutcome::new("fixed polar angle at equator equals phase-covariant", gap, 1e-12),
    ])
}

fn two_state() -> Result<Vec<CheckOutcome>> {
    let r = design_two_state(0.5)?;
    let r3 = 3f64.sqrt();
    let f = 0.5 * (1.0 + 9.0 * r3 / 16.0);
    let map = AffineMap::new(r3 / 2.0, 0.5, r3 / 4.0, r3 / 4.0);
    let worst = max_of([(r.f_a - f).abs(), (r.f_b - f).abs(), r.map_a.max_abs_diff(&map)]);
    let per = design_two_state_weighted(1e-6)?.per_state.unwrap_or_default();
    let limit = match per[..] {
        [f1, f2] => max_of([(f1 - (7.0 + 3.0 * SQRT_2) / 16.0).abs(), (f2 - 1.0).abs()]),
        _ => f64::INFINITY,
    };
    Ok(vec![
        CheckOutcome::new("two-state cloning", worst, 1e-9),
        CheckOutcome::new("weighted two-state small-weight limit", limit, 1e-4),
    ])
}

fn mirror_pc() -> Result<CheckOutcome> {
    let t = (1.0 / 3f64.sqrt()).acos();
    let r = design_mirror_pc(t)?;
    let third = 2.0 / 3.0;
    let mut worst = max_of([
        r.map_a.max_abs_diff(&AffineMap::new(third, third, third, 0.0)),
        (r.f_a - 5.0 / 6.0).abs(),
    ]);
    for t in theta_grid() {
        let r = design_mirror_pc(t)?;
        let (s, c) = t.sin_cos();
        let f = 0.5 + 0.25 * (c * c + (c.powi(4) + 2.0 * s.powi(4)).sqrt());
        worst = max_of([worst, (r.f_a - f).abs(), (r.f_b - f).abs()]);
    }
    Ok(CheckOutcome::new("mirror phase-covariant", worst, 1e-9))
}

fn extraction(count: usize) -> Vec<CheckOutcome> {
    let mut diff: f64 = 0.0;
    let mut off: f64 = 0.0;
    for omega in random_omegas(count, 1) {
        for copy in CopyLabel::BOTH {
            let (g, _) = affine_extract_general(&omega, copy);
            diff = worse(diff, g.diagonal_part().max_abs_diff(&affine_closed_form(&omega, copy)));
            off = worse(off, g.off_diagonal());
        }
    }
    vec![
        CheckOutcome::new("extracted map equals closed form", diff, 1e-12),
        CheckOutcome::new("extracted map has no off-diagonal response", off, 1e-10),
    ]
}

fn kraus_deviation(k: &KrausSet, map: &AffineMap) -> f64 {
    let g = affine_from_kraus(k);
    max_of([k.completeness_deviation(), g.off_diagonal(), g.diagonal_part().max_abs_diff(map)])
}

fn channels() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for i in 0..=16 {
        let x = PI * i as f64 / 16.0;
        let (s, c) = (x / 2.0).sin_cos();
        worst = worse(worst, kraus_deviation(&kraus_ad(x), &AffineMap::new(c, c, c * c, s * s)));
        for alpha in [0.0, 0.9, FRAC_PI_2, 2.5, PI] {
            let map = AffineMap::new(c, c, c * c, alpha.cos() * s * s);
            worst = worse(worst, kraus_deviation(&kraus_gad(alpha, x), &map));
        }
        let perp = SQRT_2 / 2.0 * x.sin();
        let sp = AffineMap::new(perp, perp, 0.5 * (1.0 + x.cos()), 0.0);
        worst = worse(worst, kraus_deviation(&kraus_sp(x)?, &sp));
        let dad = AffineMap::new(
            (FRAC_PI_4 - x / 2.0).cos(),
            (FRAC_PI_4 + x / 2.0).cos(),
            0.5 * x.cos(),
            0.5 * x.cos(),
        );
        worst = worse(worst, kraus_deviation(&kraus_dad(x), &dad));
    }
    let (dad, ad) = (kraus_dad(0.0), kraus_ad(FRAC_PI_2));
    for (d, a) in dad.elements().iter().zip(ad.elements().iter().rev()) {
        worst = worse(worst, (d - a).camax());
    }
    Ok(CheckOutcome::new("named channels reproduce their maps", worst, 1e-12))
}

fn quadrature_oracle(count: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let omegas = random_omegas(count, 2);
    for spec in canonical_specs() {
        let m = moments_closed_form(&spec)?;
        for omega in &omegas {
            for copy in CopyLabel::BOTH {
                let direct = average_fidelity_oracle(omega, &spec, copy, 64)?;
                let formula = average_fidelity(&affine_closed_form(omega, copy), &m);
                worst = worse(worst, (direct - formula).abs());
            }
        }
    }
    Ok(CheckOutcome::new("quadrature oracle equals moment formula", worst, 1e-9))
}

fn reductions(count: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let specs = canonical_specs();
    for (i, w) in random_omegas(count, 3).into_iter().enumerate() {
        let m = moments_closed_form(&specs[i % specs.len()])?;
        let sym = ParamSet::new(w.alpha, w.alpha_tilde, w.beta, w.beta_tilde, FRAC_PI_2, FRAC_PI_2)?;
        worst = worse(worst, stationarity_residual_in(0.5, &sym, &m, &[4, 5]));

        let half = 0.5 * (1.0 - m.nz2_bar);
        let balanced = EnsembleMoments::new(m.nz_bar, half, half, m.nz2_bar)?;
        let flat = ParamSet::new(w.alpha, w.alpha_tilde, 0.0, 0.0, w.gamma, w.gamma_tilde)?;
        let p = (i as f64 + 0.5) / count as f64;
        worst = worse(worst, stationarity_residual_in(p, &flat, &balanced, &[2, 3]));
    }
    Ok(CheckOutcome::new("symmetric and phase-independent reductions", worst, 1e-8))
}

fn closed_form_designs(suite: Suite) -> Result<Vec<DesignResult>> {
    let ps = match suite {
        Suite::Quick => vec![0.0, 0.3, 0.5, 1.0],
        Suite::Full => p_grid(),
    };
    let mut out = Vec::new();
    for &p in &ps {
        out.push(design_phase_covariant(p)?);
        for t in theta_grid() {
            out.push(design_fixed_theta(t, p)?);
        }
    }
    for t in theta_grid() {
        out.push(design_mirror_pc(t)?);
    }
    out.push(design_two_state(0.5)?);
    out.push(design_two_state_weighted(1e-6)?);
    Ok(out)
}

fn stationarity(suite: Suite) -> Result<CheckOutcome> {
    let mut designs = closed_form_designs(suite)?;
    designs.extend([0.0, 0.5, 1.0].map(design_universal).into_iter().collect::<Result<Vec<_>>>()?);
    let worst = max_of(designs.iter().map(|r| r.residual));
    Ok(CheckOutcome::new("closed-form designs are stationary", worst, 1e-6))
}

/// Optimizer against the closed forms. The universal machine is compared at
/// the weight for which it is stationary.
fn rediscovery(suite: Suite) -> Result<CheckOutcome> {
    let budget = SearchBudget::default();
    let mut worst: f64 = 0.0;
    for r in closed_form_designs(suite)? {
        let n = optimize_numeric(&r.moments, r.p, &budget)?;
        worst = worse(worst, (n.objective - r.objective).abs());
    }
    let qs = match suite {
        Suite::Quick => vec![0.3],
        Suite::Full => p_grid(),
    };
    for q in qs {
        let r = design_universal(q)?;
        let w = universal_stationary_weight(q);
        let closed = w * r.f_a + (1.0 - w) * r.f_b;
        let n = optimize_numeric(&r.moments, w, &budget)?;
        worst = worse(worst, (n.objective - closed).abs());
    }
    Ok(CheckOutcome::new("optimizer rediscovers closed forms", worst, 1e-6))
}

/// Runs every check of the suite in a fixed order.
pub fn run(suite: Suite) -> Result<Vec<CheckOutcome>> {
    let (samples, oracle_samples) = match suite {
        Suite::Quick => (100, 10),
        Suite::Full => (1000, 100),
    };
    let mut out = vec![
        universal_symmetric()?,
        universal_frontier()?,
        phase_covariant()?,
        mirror_pc()?,
    ];
    out.extend(fixed_theta()?);
    out.extend(two_state()?);
    out.extend(extraction(samples));
    out.push(channels()?);
    out.push(quadrature_oracle(oracle_samples)?);
    out.push(reductions(samples.min(100))?);
    out.push(stationarity(suite)?);
    out.push(rediscovery(suite)?);
    Ok(out)
}
