use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chfif::document::{model_error, parse_problem, ProblemDocument};
use chfif::output;
use chfif::render::{render_svg, RenderSettings};
use chfif::verify::{verify, Budgets, ProjectionBudget, VerifyError};
use chfif_core::attractor::{
    chaos_game, iterate_to_tolerance, AttractorError, MapSelection, PointSet3, StepOptions,
    DEFAULT_MAX_POINTS, DEFAULT_SNAP_FRACTION,
};
use chfif_core::evaluator::{
    knot_error, solve_fixed_point, EvalError, FixedPointReport, DEFAULT_GRID_DENSITY,
};
use chfif_core::model::{check_horizontal_contraction, HorizontalScope};
use chfif_core::solver::SolveMethod;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "chfif",
    version,
    about = "Graph-directed hidden-variable fractal interpolation"
)]
struct Cli {
    /// Seed for the chaos game.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output format. Samples and clouds are always CSV.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write the full coefficient table as CSV to this file.
    #[arg(long, global = true)]
    emit_coeffs: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Deterministic,
    Chaos,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Selection {
    Uniform,
    ProportionalToA,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Grid points per subinterval.
    #[arg(long, default_value_t = DEFAULT_GRID_DENSITY)]
    grid_density: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem file and summarise the graph.
    Validate {
        file: PathBuf,
        /// Require every subinterval to be shorter than every vertex interval,
        /// not only the one it is mapped from.
        #[arg(long)]
        all_pairs: bool,
    },
    /// Print the map coefficients.
    Solve {
        file: PathBuf,
        /// Solve each map's linear system directly instead of the closed form.
        #[arg(long)]
        oracle: bool,
    },
    /// Sample the interpolating functions; CSV rows `vertex,x,f1,f2`.
    Eval {
        file: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Approximate the attractors; CSV rows `vertex,x,y,z`.
    Attractor {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Deterministic)]
        mode: Mode,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 60)]
        max_iters: usize,
        #[arg(long, default_value_t = 1_000_000)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        burn_in: usize,
        /// Snapping cell as a fraction of each axis extent; 0 disables snapping.
        #[arg(long, default_value_t = DEFAULT_SNAP_FRACTION)]
        snap: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
        max_points: usize,
        #[arg(long, value_enum, default_value_t = Selection::Uniform)]
        selection: Selection,
    },
    /// Run every check and print the report. Exits 1 if any check fails.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
        /// Skip the attractor and projection checks.
        #[arg(long)]
        no_projection: bool,
        #[arg(long, default_value_t = 1e-3)]
        attractor_tol: f64,
        /// Grid points per subinterval for the projection comparison.
        #[arg(long, default_value_t = 1 << 18)]
        projection_density: usize,
    },
    /// Draw the functions, knots and optionally a chaos-game cloud as SVG.
    Render {
        file: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
        /// Overlay a chaos-game cloud with this many steps.
        #[arg(long)]
        cloud_steps: Option<usize>,
        /// Also draw the hidden-variable component.
        #[arg(long)]
        f2: bool,
    },
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn load(path: &Path) -> Result<ProblemDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn eval_summary(report: &FixedPointReport, errors: &[(f64, f64)]) -> String {
    let mut s = format!(
        "iterations {}\nfinal change {:.4e}\nempirical ratio {}\na-priori factor {:.6}\nconservative factor {:.6}\n",
        report.iterations,
        report.final_change(),
        report.empirical_ratio().map_or("-".into(), |r| format!("{r:.6}")),
        report.apriori_delta,
        report.conservative_factor,
    );
    for (v, (e1, e2)) in errors.iter().enumerate() {
        s.push_str(&format!(
            "vertex {} knot error f1 {e1:.3e} f2 {e2:.3e}\n",
            v + 1
        ));
    }
    s
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let file = match &cli.command {
        Command::Validate { file, .. }
        | Command::Solve { file, .. }
        | Command::Eval { file, .. }
        | Command::Attractor { file, .. }
        | Command::Verify { file, .. }
        | Command::Render { file, .. } => file,
    };
    let doc = load(file)?;
    let lenient = matches!(cli.command, Command::Verify { .. });
    let method = match cli.command {
        Command::Solve { oracle: true, .. } => SolveMethod::LinearOracle,
        _ => SolveMethod::ClosedForm,
    };
    let system = if lenient {
        doc.build_system_unchecked(method)?
    } else {
        doc.build_system(method)?
    };
    if let Some(path) = &cli.emit_coeffs {
        fs::write(path, output::coefficients_csv(&system))
            .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }

    match &cli.command {
        Command::Validate { all_pairs, .. } => {
            let scope = if *all_pairs {
                HorizontalScope::AllPairs
            } else {
                HorizontalScope::UsedEdges
            };
            let report = check_horizontal_contraction(system.datasets(), system.graph(), scope)
                .map_err(|e| Failure(format!("{}: {}", file.display(), model_error(&e))))?;
            let mut s = format!(
                "vertices {}\nmaps {}\n",
                system.vertex_count(),
                system.map_count()
            );
            for (r, row) in system.graph().edge_counts().iter().enumerate() {
                let row: Vec<String> = row.iter().map(usize::to_string).collect();
                s.push_str(&format!("K[{}] = [{}]\n", r + 1, row.join(", ")));
            }
            s.push_str(&format!(
                "max horizontal ratio {:.6}\njoin-up residual {:.3e}\na-priori factor {:.6}\nconservative factor {:.6}\nok\n",
                report.max_ratio(),
                system.join_up_residual(),
                system.apriori_delta(),
                system.conservative_factor()
            ));
            emit(&cli.out, &s)?;
            Ok(true)
        }
        Command::Solve { .. } => {
            let text = match cli.format {
                Format::Csv => output::coefficients_csv(&system),
                Format::Json => {
                    let rows: Vec<_> = system
                        .all_maps()
                        .map(|m| {
                            serde_json::json!({
                                "vertex": m.target + 1,
                                "map": m.subinterval + 1,
                                "source": m.source + 1,
                                "coefficients": m.coeffs.to_array(),
                                "alpha": m.scaling.alpha,
                                "beta": m.scaling.beta,
                                "gamma": m.scaling.gamma,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&rows)? + "\n"
                }
                Format::Text => output::coefficients_text(&system),
            };
            emit(&cli.out, &text)?;
            Ok(true)
        }
        Command::Eval { eval, .. } => {
            match solve_fixed_point(&system, eval.grid_density, eval.tol, eval.max_iters) {
                Ok(fp) => {
                    let errors: Vec<_> = fp
                        .functions
                        .iter()
                        .map(|f| knot_error(&system, f))
                        .collect();
                    emit(&cli.out, &output::samples_csv(&fp.functions))?;
                    eprint!("{}", eval_summary(&fp.report, &errors));
                    Ok(true)
                }
                Err(EvalError::NoConvergence { report }) => {
                    eprint!("{}", eval_summary(&report, &[]));
                    Err(Failure(format!(
                        "no convergence after {} iterations",
                        report.iterations
                    )))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Attractor {
            mode,
            tol,
            max_iters,
            steps,
            burn_in,
            snap,
            max_points,
            selection,
            ..
        } => {
            let sets: Vec<PointSet3> = match mode {
                Mode::Chaos => {
                    if steps <= burn_in {
                        return Err(Failure("--steps must exceed --burn-in".into()));
                    }
                    let selection = match selection {
                        Selection::Uniform => MapSelection::Uniform,
                        Selection::ProportionalToA => MapSelection::ProportionalToA,
                    };
                    chaos_game(&system, *steps, cli.seed, *burn_in, selection)
                }
                Mode::Deterministic => {
                    let options = StepOptions {
                        snap: (*snap > 0.0).then_some(*snap),
                        max_points: *max_points,
                    };
                    match iterate_to_tolerance(
                        &system,
                        PointSet3::knots(&system),
                        *tol,
                        *max_iters,
                        &options,
                    ) {
                        Ok((sets, trace)) => {
                            for (k, d) in trace.distances.iter().enumerate() {
                                eprintln!("iteration {} distance {d:.4e}", k + 1);
                            }
                            if let Some(r) = trace.estimated_ratio() {
                                eprintln!("estimated ratio {r:.4}");
                            }
                            sets
                        }
                        Err(AttractorError::NoConvergence { trace }) => {
                            for (k, d) in trace.distances.iter().enumerate() {
                                eprintln!("iteration {} distance {d:.4e}", k + 1);
                            }
                            return Err(Failure(format!(
                                "no convergence after {} iterations",
                                trace.distances.len()
                            )));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            };
            emit(&cli.out, &output::cloud_csv(&sets))?;
            Ok(true)
        }
        Command::Verify {
            eval,
            no_projection,
            attractor_tol,
            projection_density,
            ..
        } => {
            let budgets = Budgets {
                grid_density: eval.grid_density,
                tol: eval.tol,
                max_iters: eval.max_iters,
                projection: (!no_projection).then(|| ProjectionBudget {
                    attractor_tol: *attractor_tol,
                    grid_density: *projection_density,
                    ..ProjectionBudget::default()
                }),
                ..Budgets::default()
            };
            let (report, note) = match verify(&system, &budgets) {
                Ok(r) => (r, None),
                Err(VerifyError::NoConvergence { stage, report }) => (
                    *report,
                    Some(format!("{stage:?} did not converge within budget")),
                ),
                Err(e) => return Err(e.into()),
            };
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                _ => report.to_string(),
            };
            emit(&cli.out, &text)?;
            if let Some(n) = &note {
                eprintln!("{n}");
            }
            Ok(note.is_none() && report.passed())
        }
        Command::Render {
            eval,
            cloud_steps,
            f2,
            ..
        } => {
            let fp = match solve_fixed_point(&system, eval.grid_density, eval.tol, eval.max_iters) {
                Ok(fp) => fp,
                Err(EvalError::NoConvergence { report }) => {
                    return Err(Failure(format!(
                        "no convergence after {} iterations",
                        report.iterations
                    )))
                }
                Err(e) => return Err(e.into()),
            };
            let mut settings = doc.render.clone().unwrap_or_else(RenderSettings::default);
            settings.show_f2 |= *f2;
            let clouds = cloud_steps
                .map(|steps| chaos_game(&system, steps.max(2), cli.seed, 1, MapSelection::Uniform));
            if clouds.is_none() {
                settings.show_cloud = false;
            }
            let svg = render_svg(&system, Some(&fp.functions), clouds.as_deref(), &settings)?;
            emit(&cli.out, &svg)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
