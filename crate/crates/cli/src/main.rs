//! `qcm`: design, simulate and verify optimal 1→2 qubit cloning machines.
//!
//! Exit codes: 0 success, 2 usage error, 3 domain error (including optimizer
//! non-convergence), 4 verification failure.

mod record;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

use qcm_core::bloch::{bloch_from_density, state_vector, DensityMatrix, StateAngles};
use qcm_core::channel::{affine_closed_form, reduce, AffineMap, CopyLabel};
use qcm_core::cloner::{evolve, ParamSet};
use qcm_core::design::{
    design_centered_symmetric, design_fixed_theta_any, design_mirror_pc, design_phase_covariant,
    design_two_state, design_two_state_general, design_two_state_weighted, design_universal,
    DesignResult,
};
use qcm_core::ensembles::{
    moments_closed_form, moments_quadrature, spec_from_json, EnsembleMoments, EnsembleSpec,
};
use qcm_core::optimize::{optimize_numeric, SearchBudget};
use qcm_core::verify::{self, Suite};

use record::{OutputRecord, CSV_HEADER};

#[derive(Parser)]
#[command(name = "qcm", version, about = "Optimal asymmetric 1->2 qubit cloning machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Read every angle argument in degrees instead of radians.
    #[arg(long, global = true)]
    degrees: bool,

    /// Seed for the numerical optimizer.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseName {
    Universal,
    PhaseCovariant,
    FixedTheta,
    Centered,
    MirrorPc,
    TwoState,
    Generic,
}

#[derive(Args)]
struct CaseArgs {
    #[arg(long, value_enum)]
    case: CaseName,

    /// Weight of copy A in the objective.
    #[arg(long)]
    p: Option<f64>,

    /// Polar angle of the fixed-angle and mirror ensembles.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,

    /// Overlap of the two-state ensemble.
    #[arg(long)]
    overlap: Option<f64>,

    /// Probability of the first state of the two-state ensemble.
    #[arg(long)]
    weight: Option<f64>,

    /// Ensemble description in JSON (centered and generic cases).
    #[arg(long)]
    ensemble: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal machine for one case.
    Design(CaseArgs),
    /// Clone one pure state with the machine `ω`.
    Simulate {
        /// α, α̃, β, β̃, γ, γ̃
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        omega: Vec<f64>,
        /// θ, φ
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        state: Vec<f64>,
    },
    /// Trade-off curve over p = 0, 1/n, ..., 1.
    Sweep {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long = "p-grid", default_value_t = 10)]
        p_grid: usize,
    },
    /// Run the self-check suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteName::Quick)]
        suite: SuiteName,
    },
    /// Closed-form and quadrature moments of an ensemble.
    Moments {
        #[arg(long)]
        ensemble: PathBuf,
        /// Quadrature resolution.
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteName {
    Quick,
    Full,
}

enum Failure {
    Usage(String),
    Domain(String),
    Verification,
}

impl From<qcm_core::Error> for Failure {
    fn from(e: qcm_core::Error) -> Self {
        match e {
            qcm_core::Error::Spec(_) => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Context {
    format: Format,
    degrees: bool,
    seed: Option<u64>,
}

impl Context {
    fn angle(&self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }

    fn budget(&self) -> SearchBudget {
        self.seed.map_or_else(SearchBudget::default, SearchBudget::with_seed)
    }
}

fn read_spec(path: &PathBuf) -> Outcome<EnsembleSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(spec_from_json(&text)?)
}

fn require<T>(value: Option<T>, flag: &str, case: &str) -> Outcome<T> {
    value.ok_or_else(|| Failure::Usage(format!("--case {case} requires --{flag}")))
}

fn design_case(ctx: &Context, a: &CaseArgs, p_override: Option<f64>) -> Outcome<DesignResult> {
    let p = p_override.or(a.p).unwrap_or(0.5);
    let r = match a.case {
        CaseName::Universal => design_universal(p)?,
        CaseName::PhaseCovariant => design_phase_covariant(p)?,
        CaseName::FixedTheta => {
            let theta = ctx.angle(require(a.theta, "theta", "fixed-theta")?);
            design_fixed_theta_any(theta, p)?
        }
        CaseName::Centered => {
            let m = match &a.ensemble {
                Some(path) => moments_closed_form(&read_spec(path)?)?,
                None => EnsembleMoments::uniform_sphere(),
            };
            design_centered_symmetric(&m)?
        }
        CaseName::MirrorPc => design_mirror_pc(ctx.angle(require(a.theta, "theta", "mirror-pc")?))?,
        CaseName::TwoState => {
            let s = a.overlap.unwrap_or(0.5);
            let k = a.weight.unwrap_or(0.5);
            if k == 0.5 {
                design_two_state(s)?
            } else if s == 0.5 && k < 0.5 {
                design_two_state_weighted(k)?
            } else {
                design_two_state_general(s, k)?
            }
        }
        CaseName::Generic => {
            let path = require(a.ensemble.as_ref(), "ensemble", "generic")?;
            let m = moments_closed_form(&read_spec(path)?)?;
            optimize_numeric(&m, p, &ctx.budget())?
        }
    };
    Ok(r)
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("plain data serializes"));
}

fn cmd_design(ctx: &Context, a: &CaseArgs) -> Outcome<()> {
    let rec = OutputRecord::from(&design_case(ctx, a, None)?);
    match ctx.format {
        Format::Json => print_json(&rec),
        Format::Csv => println!("{CSV_HEADER}\n{}", rec.csv_row()),
        Format::Text => print!("{}", rec.text()),
    }
    Ok(())
}

#[derive(Serialize)]
struct CopyOutput {
    copy: &'static str,
    bloch: [f64; 3],
    fidelity: f64,
    map: AffineMap,
}

#[derive(Serialize)]
struct SimulationRecord {
    omega: [f64; 6],
    theta: f64,
    phi: f64,
    input: [f64; 3],
    copies: Vec<CopyOutput>,
}

fn cmd_simulate(ctx: &Context, omega: &[f64], state: &[f64]) -> Outcome<()> {
    if omega.len() != 6 || state.len() != 2 {
        return Err(Failure::Usage("--omega takes 6 comma-separated angles and --state takes 2".into()));
    }
    let w: [f64; 6] = std::array::from_fn(|i| ctx.angle(omega[i]));
    let omega = ParamSet::from_array(w)?;
    let angles = StateAngles::new(ctx.angle(state[0]), ctx.angle(state[1]))?;
    let three = evolve(&omega, &DensityMatrix::from_angles(angles));
    let copies = CopyLabel::BOTH
        .iter()
        .map(|&copy| {
            let rho = reduce(&three, copy);
            CopyOutput {
                copy: if copy == CopyLabel::A { "A" } else { "B" },
                bloch: bloch_from_density(&rho).to_array(),
                fidelity: rho.overlap_with(state_vector(angles)),
                map: affine_closed_form(&omega, copy),
            }
        })
        .collect();
    let rec = SimulationRecord {
        omega: omega.to_array(),
        theta: angles.theta,
        phi: angles.phi,
        input: angles.bloch_vector().to_array(),
        copies,
    };
    match ctx.format {
        Format::Json => print_json(&rec),
        Format::Csv => {
            println!("copy,r_x,r_y,r_z,fidelity");
            for c in &rec.copies {
                println!("{},{:?},{:?},{:?},{:?}", c.copy, c.bloch[0], c.bloch[1], c.bloch[2], c.fidelity);
            }
        }
        Format::Text => {
            println!("input      ({}, {}, {})", rec.input[0], rec.input[1], rec.input[2]);
            for c in &rec.copies {
                println!(
                    "copy {}     ({}, {}, {})  fidelity {}",
                    c.copy, c.bloch[0], c.bloch[1], c.bloch[2], c.fidelity
                );
            }
        }
    }
    Ok(())
}

fn cmd_sweep(ctx: &Context, a: &CaseArgs, n: usize) -> Outcome<()> {
    if n == 0 {
        return Err(Failure::Usage("--p-grid must be at least 1".into()));
    }
    if !matches!(
        a.case,
        CaseName::Universal | CaseName::PhaseCovariant | CaseName::FixedTheta | CaseName::Generic
    ) {
        return Err(Failure::Usage(
            "sweep supports universal, phase-covariant, fixed-theta and generic".into(),
        ));
    }
    let records = (0..=n)
        .map(|i| design_case(ctx, a, Some(i as f64 / n as f64)).map(|r| OutputRecord::from(&r)))
        .collect::<Outcome<Vec<_>>>()?;
    match ctx.format {
        Format::Json => print_json(&records),
        Format::Csv => {
            println!("{CSV_HEADER}");
            for r in &records {
                println!("{}", r.csv_row());
            }
        }
        Format::Text => {
            println!("{:>6}  {:>20}  {:>20}  {:>10}", "p", "F_A", "F_B", "residual");
            for r in &records {
                println!("{:>6.3}  {:>20.16}  {:>20.16}  {:>10.2e}", r.p, r.f_a, r.f_b, r.residual);
            }
        }
    }
    Ok(())
}

fn cmd_verify(ctx: &Context, suite: SuiteName) -> Outcome<()> {
    let suite = match suite {
        SuiteName::Quick => Suite::Quick,
        SuiteName::Full => Suite::Full,
    };
    let checks = verify::run(suite)?;
    match ctx.format {
        Format::Json => print_json(&checks),
        Format::Csv => {
            println!("name,passed,worst,tolerance");
            for c in &checks {
                println!("{},{},{:?},{:?}", c.name, c.passed, c.worst, c.tolerance);
            }
        }
        Format::Text => {
            for c in &checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                println!("{verdict}  {:<52} {:>10.3e}  (tol {:.0e})", c.name, c.worst, c.tolerance);
            }
        }
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[derive(Serialize)]
struct MomentsRecord {
    closed_form: EnsembleMoments,
    quadrature: EnsembleMoments,
    resolution: usize,
    max_abs_diff: f64,
}

fn cmd_moments(ctx: &Context, path: &PathBuf, resolution: usize) -> Outcome<()> {
    let spec = read_spec(path)?;
    let closed_form = moments_closed_form(&spec)?;
    let quadrature = moments_quadrature(&spec, resolution)?;
    let rec = MomentsRecord {
        closed_form,
        quadrature,
        resolution,
        max_abs_diff: closed_form.max_abs_diff(&quadrature),
    };
    let names = ["nz_bar", "nx2_bar", "ny2_bar", "nz2_bar"];
    match ctx.format {
        Format::Json => print_json(&rec),
        Format::Csv => {
            println!("source,{}", names.join(","));
            for (label, m) in [("closed_form", closed_form), ("quadrature", quadrature)] {
                let v = m.to_array();
                println!("{label},{:?},{:?},{:?},{:?}", v[0], v[1], v[2], v[3]);
            }
        }
        Format::Text => {
            println!("{:<8}  {:>22}  {:>22}", "moment", "closed form", "quadrature");
            for (i, n) in names.iter().enumerate() {
                println!("{n:<8}  {:>22}  {:>22}", closed_form.to_array()[i], quadrature.to_array()[i]);
            }
            println!("max |diff| {:e} at resolution {resolution}", rec.max_abs_diff);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Context {
        format: cli.format,
        degrees: cli.degrees,
        seed: cli.seed,
    };
    let outcome = match &cli.command {
        Command::Design(a) => cmd_design(&ctx, a),
        Command::Simulate { omega, state } => cmd_simulate(&ctx, omega, state),
        Command::Sweep { case, p_grid } => cmd_sweep(&ctx, case, *p_grid),
        Command::Verify { suite } => cmd_verify(&ctx, *suite),
        Command::Moments { ensemble, resolution } => cmd_moments(&ctx, ensemble, *resolution),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(4)
        }
    }
}
