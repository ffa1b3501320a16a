//! `maxlab`: scenario runner for the maximum-principle verification lab.
//!
//! Every subcommand runs standalone on built-in models, prints (or writes) a
//! deterministic JSON document and exits nonzero only on conclusion failures
//! (exit 1) or usage/config errors (exit 2).

mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use maxlab_core::curvature::{
    self, conformal_transform_check, curvature as curvature_bundle, metrics,
    product_norm_decomposition, schur_residual, weyl_norm_sq, weyl_trace_residual, MetricField,
};
use maxlab_core::lorgraph::{
    self, admissible_set, chart_mean_curvature_operator, geometry_report, graph_geometry, Fiber,
    GraphSurface, MetricChart,
};
use maxlab_core::maxlab::{
    contradiction_report, derive_constants, scenarios, GridFunction,
};
use maxlab_core::modelspace::{
    busemann::{BusemannEvaluator, BusemannKind},
    geodesic_sphere, splitting::splitting_map, splitting_map_check, ModelLine, ModelSpacetime,
    SplittingOptions,
};
use maxlab_core::quasilinear::{
    certify_ellipticity, coefficient_bounds_check, flat_mean_curvature, laplacian,
    linearization_coefficients, operator_from_table, AdmissibleRegion, Jet2, QuasiLinearOperator,
};
use maxlab_core::symkernel::SymMatrix;
use maxlab_core::{Verdict, VerificationReport};

use config::ConfigMap;

#[derive(Parser)]
#[command(name = "maxlab")]
#[command(about = "Numerical checks for elliptic maximum principles and Lorentzian graph geometry")]
#[command(version)]
struct Cli {
    /// Structured config file supplying defaults for the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the JSON document here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed (the MAXLAB_SEED environment variable takes precedence)
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Dump the derived-constant ledger
    Constants {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        ce: Option<f64>,
        #[arg(long)]
        cs: Option<f64>,
        #[arg(long)]
        r0: Option<f64>,
        /// additionally evaluate the delta-bar margin at this exponent
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Certify uniform ellipticity and sweep the linearized coefficient bounds
    VerifyOperator {
        /// laplacian | flat-mean-curvature | chart-mean-curvature | table
        #[arg(long)]
        operator: Option<String>,
        /// chart for chart-mean-curvature: minkowski | strip-flat | strip-hyperbolic
        #[arg(long)]
        chart: Option<String>,
        /// chart dimension (graph domain)
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        bound: Option<f64>,
        /// candidate ellipticity constant; measured when omitted
        #[arg(long)]
        ce: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// jet pairs for the coefficient-bounds sweep
        #[arg(long)]
        pairs: Option<usize>,
        /// coefficient table file for the table operator
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Run the contradiction pipeline on a named instance
    MaxPrinciple {
        /// plane-vs-hyperboloid | fabricated-gap | identical
        #[arg(long)]
        instance: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        h0: Option<f64>,
    },
    /// Pointwise geometry of a spacelike graph
    GraphGeometry {
        /// minkowski | strip-flat | strip-hyperbolic
        #[arg(long)]
        chart: Option<String>,
        /// hyperboloid | lower-hyperboloid | slice | grid
        #[arg(long)]
        surface: Option<String>,
        /// grid CSV for the grid surface
        #[arg(long)]
        grid: Option<PathBuf>,
        /// chart point, comma separated
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Busemann functions of a model line over a parameter grid
    Busemann {
        /// strip-flat | strip-hyperbolic | minkowski
        #[arg(long)]
        model: Option<String>,
        /// fiber point of the vertical line, comma separated
        #[arg(long, allow_hyphen_values = true)]
        line: Option<String>,
        #[arg(long)]
        grid_nx: Option<usize>,
        #[arg(long)]
        grid_nt: Option<usize>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        /// write the (point, b_r schedule, extrapolated b) table here
        #[arg(long)]
        table_out: Option<PathBuf>,
    },
    /// Geodesic distance spheres and their mean curvature at base
    Spheres {
        /// strip-hyperbolic | strip-flat | minkowski
        #[arg(long)]
        model: Option<String>,
        /// comma-separated radii
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        h_fd: Option<f64>,
    },
    /// Normal-exponential splitting map pullback check
    Splitting {
        /// strip-flat | strip-hyperbolic
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        /// dump the normal geodesic through this fiber point as CSV
        #[arg(long, allow_hyphen_values = true)]
        dump_geodesic: Option<String>,
        #[arg(long)]
        dump_out: Option<PathBuf>,
    },
    /// Riemann/Ricci/scalar/Weyl bundle at a point
    Curvature {
        /// minkowski | strip-flat | strip-hyperbolic | product-flat |
        /// product-hyperbolic | product-perturbed | hyperbolic-ball | flat | two-sphere
        #[arg(long)]
        metric: Option<String>,
        /// fiber or chart dimension where the metric family needs one
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(long)]
        h_fd: Option<f64>,
        /// also compute the Schur residual (Riemannian metrics, dim >= 3)
        #[arg(long)]
        schur: bool,
    },
    /// Weyl norm, conformal transformation law and the product decomposition
    Weyl {
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        /// decomposition coefficient on the Ricci terms
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// decomposition coefficient on the metric-wedge term
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        h_fd: Option<f64>,
    },
    /// Dispatch on the `scenario` key of the config file
    Run,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => match ConfigMap::load(path) {
            Ok(cfg) => cfg,
            Err(message) => {
                eprintln!("error: {message}");
                return ExitCode::from(2);
            }
        },
        None => ConfigMap::default(),
    };

    // seed precedence: environment, flag, config, default
    let seed = match std::env::var("MAXLAB_SEED") {
        Ok(text) => match text.parse::<u64>() {
            Ok(seed) => seed,
            Err(e) => {
                eprintln!("error: MAXLAB_SEED is not a valid seed: {e}");
                return ExitCode::from(2);
            }
        },
        Err(_) => match cli.seed {
            Some(seed) => seed,
            None => match cfg.parse_scoped::<u64>("", "seed") {
                Ok(found) => found.unwrap_or(0),
                Err(message) => {
                    eprintln!("error: {message}");
                    return ExitCode::from(2);
                }
            },
        },
    };

    let command = match resolve_run(&cli.command, &cfg) {
        Ok(command) => command,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };

    match execute(&command, &cfg, seed) {
        Ok((name, payload, reports)) => {
            let doc = json!({
                "schema": "maxlab/run/v1",
                "command": name,
                "seed": seed,
                "payload": payload,
                "reports": reports,
            });
            let text = serde_json::to_string_pretty(&doc).expect("serializable document");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, text + "\n") {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                println!("{text}");
            }
            let blocking = reports
                .iter()
                .any(|r| r.verdict == Verdict::ConclusionFailure);
            if blocking {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// `run` reads the scenario name from the config and re-dispatches.
fn resolve_run(command: &Command, cfg: &ConfigMap) -> Result<Command, String> {
    let Command::Run = command else {
        return Ok(command.clone());
    };
    let scenario = cfg
        .raw("scenario")
        .ok_or("run requires a `scenario` key in the config file")?;
    match scenario {
        "constants" => Ok(Command::Constants {
            m: None,
            ce: None,
            cs: None,
            r0: None,
            alpha: None,
        }),
        "verify-operator" => Ok(Command::VerifyOperator {
            operator: None,
            chart: None,
            m: None,
            rho: None,
            bound: None,
            ce: None,
            samples: None,
            pairs: None,
            table: None,
        }),
        "max-principle" => Ok(Command::MaxPrinciple {
            instance: None,
            h0: None,
        }),
        "graph-geometry" => Ok(Command::GraphGeometry {
            chart: None,
            surface: None,
            grid: None,
            at: None,
        }),
        "busemann" => Ok(Command::Busemann {
            model: None,
            line: None,
            grid_nx: None,
            grid_nt: None,
            x_max: None,
            t_max: None,
            table_out: None,
        }),
        "spheres" => Ok(Command::Spheres {
            model: None,
            radii: None,
            h_fd: None,
        }),
        "splitting" => Ok(Command::Splitting {
            model: None,
            nx: None,
            nt: None,
            x_max: None,
            t_max: None,
            dump_geodesic: None,
            dump_out: None,
        }),
        "curvature" => Ok(Command::Curvature {
            metric: None,
            dim: None,
            at: None,
            h_fd: None,
            schur: false,
        }),
        "weyl" => Ok(Command::Weyl {
            metric: None,
            dim: None,
            at: None,
            lambda: None,
            a: None,
            b: None,
            h_fd: None,
        }),
        other => Err(format!("unknown scenario {other:?}")),
    }
}

type Outcome = (String, serde_json::Value, Vec<VerificationReport>);

fn execute(command: &Command, cfg: &ConfigMap, seed: u64) -> Result<Outcome, String> {
    match command {
        Command::Constants { m, ce, cs, r0, alpha } => run_constants(cfg, *m, *ce, *cs, *r0, *alpha),
        Command::VerifyOperator {
            operator,
            chart,
            m,
            rho,
            bound,
            ce,
            samples,
            pairs,
            table,
        } => run_verify_operator(
            cfg, seed, operator, chart, *m, *rho, *bound, *ce, *samples, *pairs, table,
        ),
        Command::MaxPrinciple { instance, h0 } => run_max_principle(cfg, seed, instance, *h0),
        Command::GraphGeometry {
            chart,
            surface,
            grid,
            at,
        } => run_graph_geometry(cfg, chart, surface, grid, at),
        Command::Busemann {
            model,
            line,
            grid_nx,
            grid_nt,
            x_max,
            t_max,
            table_out,
        } => run_busemann(cfg, model, line, *grid_nx, *grid_nt, *x_max, *t_max, table_out),
        Command::Spheres { model, radii, h_fd } => run_spheres(cfg, model, radii, *h_fd),
        Command::Splitting {
            model,
            nx,
            nt,
            x_max,
            t_max,
            dump_geodesic,
            dump_out,
        } => run_splitting(cfg, model, *nx, *nt, *x_max, *t_max, dump_geodesic, dump_out),
        Command::Curvature {
            metric,
            dim,
            at,
            h_fd,
            schur,
        } => run_curvature(cfg, seed, metric, *dim, at, *h_fd, *schur),
        Command::Weyl {
            metric,
            dim,
            at,
            lambda,
            a,
            b,
            h_fd,
        } => run_weyl(cfg, metric, *dim, at, *lambda, *a, *b, *h_fd),
        Command::Run => unreachable!("resolved before execution"),
    }
}

fn pick<T: std::str::FromStr + Clone>(
    flag: Option<T>,
    cfg: &ConfigMap,
    section: &str,
    key: &str,
    default: T,
) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    if let Some(value) = flag {
        return Ok(value);
    }
    Ok(cfg.parse_scoped::<T>(section, key)?.unwrap_or(default))
}

fn pick_string(
    flag: &Option<String>,
    cfg: &ConfigMap,
    section: &str,
    key: &str,
    default: &str,
) -> String {
    flag.clone()
        .or_else(|| cfg.scoped(section, key).map(str::to_string))
        .unwrap_or_else(|| default.to_string())
}

fn parse_point(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad coordinate {tok:?}: {e}"))
        })
        .collect()
}

fn run_constants(
    cfg: &ConfigMap,
    m: Option<usize>,
    ce: Option<f64>,
    cs: Option<f64>,
    r0: Option<f64>,
    alpha: Option<f64>,
) -> Result<Outcome, String> {
    let m = pick(m, cfg, "constants", "m", 2)?;
    let ce = pick(ce, cfg, "constants", "ce", 1.0)?;
    let cs = pick(cs, cfg, "constants", "cs", 0.0)?;
    let r0 = pick(r0, cfg, "constants", "r0", 1.0 / 3.0)?;
    let alpha = match alpha {
        Some(alpha) => Some(alpha),
        None => cfg.parse_scoped::<f64>("constants", "alpha")?,
    };
    let ledger = derive_constants(m, ce, cs, r0).map_err(|e| e.to_string())?;
    let mut payload = serde_json::to_value(ledger).expect("serializable ledger");
    if let Some(alpha) = alpha {
        payload["delta_bar_at_alpha"] = json!({
            "alpha": alpha,
            "delta_bar": ledger.delta_bar_at(alpha),
        });
    }
    Ok(("constants".into(), payload, Vec::new()))
}

fn named_chart(name: &str, m: usize) -> Result<MetricChart, String> {
    match name {
        "minkowski" => Ok(lorgraph::minkowski(m + 1)),
        "strip-flat" => Ok(lorgraph::warped_strip(Fiber::Flat(m))),
        "strip-hyperbolic" => Ok(lorgraph::warped_strip(Fiber::HyperbolicBall(m))),
        other => Err(format!("unknown chart {other:?}")),
    }
}

fn named_model(name: &str, fiber_dim: usize) -> Result<ModelSpacetime, String> {
    match name {
        "minkowski" => Ok(ModelSpacetime::minkowski(fiber_dim + 1)),
        "strip-flat" => Ok(ModelSpacetime::strip(Fiber::Flat(fiber_dim))),
        "strip-hyperbolic" => Ok(ModelSpacetime::strip(Fiber::HyperbolicBall(fiber_dim))),
        other => Err(format!("unknown model {other:?}")),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_verify_operator(
    cfg: &ConfigMap,
    seed: u64,
    operator: &Option<String>,
    chart: &Option<String>,
    m: Option<usize>,
    rho: Option<f64>,
    bound: Option<f64>,
    ce: Option<f64>,
    samples: Option<usize>,
    pairs: Option<usize>,
    table: &Option<PathBuf>,
) -> Result<Outcome, String> {
    let section = "verify-operator";
    let operator_name = pick_string(operator, cfg, section, "operator", "flat-mean-curvature");
    let m = pick(m, cfg, section, "m", 2)?;
    let rho = pick(rho, cfg, section, "rho", 0.5)?;
    let bound = pick(bound, cfg, section, "bound", 2.0)?;
    let samples = pick(samples, cfg, section, "samples", 400)?;
    let pairs = pick(pairs, cfg, section, "pairs", 100)?;
    let ce = match ce {
        Some(value) => Some(value),
        None => cfg.parse_scoped::<f64>(section, "ce")?,
    };

    let chart_box = vec![(-1.0, 1.0); m];
    let op: QuasiLinearOperator = match operator_name.as_str() {
        "laplacian" => laplacian(m),
        "flat-mean-curvature" => flat_mean_curvature(m),
        "chart-mean-curvature" => {
            let chart_name = pick_string(chart, cfg, section, "chart", "minkowski");
            let chart = named_chart(&chart_name, m)?;
            chart_mean_curvature_operator(&chart)
        }
        "table" => {
            let path = table
                .clone()
                .or_else(|| cfg.scoped(section, "table").map(PathBuf::from))
                .ok_or("table operator needs --table FILE")?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read table {}: {e}", path.display()))?;
            operator_from_table(&text).map_err(|e| e.to_string())?
        }
        other => return Err(format!("unknown operator {other:?}")),
    };

    // region: gradient-bounded jets for the curvature-type operators, a free
    // box for the linear ones
    let needs_spacelike = matches!(
        operator_name.as_str(),
        "flat-mean-curvature" | "chart-mean-curvature"
    );
    let region: AdmissibleRegion = if needs_spacelike {
        let chart_name = pick_string(chart, cfg, section, "chart", "minkowski");
        let chart = named_chart(&chart_name, m)?;
        admissible_set(&chart, rho, bound, chart_box.clone())
    } else {
        let b = bound;
        admissible_box(m, b)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    while points.len() < samples {
        let x: Vec<f64> = chart_box
            .iter()
            .map(|&(lo, hi)| rand::Rng::gen_range(&mut rng, lo..=hi))
            .collect();
        if let Some((r, p)) = region.sample_fiber(&x, &mut rng) {
            points.push((x, r, p));
        }
    }

    // measure first when no candidate was given
    let candidate = match ce {
        Some(value) => value,
        None => {
            let measured = certify_ellipticity(&op, points.clone(), f64::INFINITY)
                .map_err(|e| e.to_string())?;
            measured
                .worst_ratio
                .max(measured.worst_derivative_bound)
                .max(1.0)
                * (1.0 + 1e-9)
        }
    };
    let mut reports = Vec::new();
    let certificate = match certify_ellipticity(&op, points.clone(), candidate) {
        Ok(cert) => {
            reports.push(
                VerificationReport::pass("quasilinear/ellipticity-certificate")
                    .with_residual("c_e", cert.c_e)
                    .with_residual("worst_ratio", cert.worst_ratio)
                    .with_residual("worst_derivative_bound", cert.worst_derivative_bound)
                    .with_params(json!({ "samples": cert.samples_checked }))
                    .with_seed(seed),
            );
            Some(cert)
        }
        Err(err) => {
            reports.push(
                VerificationReport::new(
                    "quasilinear/ellipticity-certificate",
                    Verdict::HypothesisFailure,
                )
                .with_witness(json!({ "error": err.to_string() }))
                .with_seed(seed),
            );
            None
        }
    };

    // coefficient-bounds sweep over random admissible jet pairs
    if let Some(cert) = &certificate {
        let mut worst_bc = 0.0f64;
        let mut failures = 0usize;
        let mut done = 0usize;
        let mut attempts = 0usize;
        while done < pairs && attempts < pairs * 50 {
            attempts += 1;
            let x: Vec<f64> = chart_box
                .iter()
                .map(|&(lo, hi)| rand::Rng::gen_range(&mut rng, lo..=hi))
                .collect();
            let Some((r0v, p0)) = region.sample_fiber(&x, &mut rng) else {
                continue;
            };
            let Some((r1v, p1)) = region.sample_fiber(&x, &mut rng) else {
                continue;
            };
            let hess0 = SymMatrix::from_fn(m, |_, _| rand::Rng::gen_range(&mut rng, -1.0..1.0));
            let hess1 = SymMatrix::from_fn(m, |_, _| rand::Rng::gen_range(&mut rng, -1.0..1.0));
            let jet0 = Jet2::new(x.clone(), r0v, p0, hess0).expect("consistent dims");
            let jet1 = Jet2::new(x.clone(), r1v, p1, hess1).expect("consistent dims");
            let Ok(coeffs) = linearization_coefficients(&op, &jet0, &jet1, 16) else {
                continue;
            };
            let report = coefficient_bounds_check(&coeffs, cert.c_e, &jet0.hess, &jet1.hess, 1e-9);
            worst_bc = worst_bc.max(report.residuals["worst_bc"]);
            if !report.passed() {
                failures += 1;
            }
            done += 1;
        }
        let verdict = if failures == 0 {
            Verdict::Pass
        } else {
            Verdict::ConclusionFailure
        };
        reports.push(
            VerificationReport::new("quasilinear/coefficient-bounds-sweep", verdict)
                .with_residual("pairs", done as f64)
                .with_residual("failures", failures as f64)
                .with_residual("worst_bc", worst_bc)
                .with_seed(seed),
        );
    }

    let payload = json!({
        "operator": operator_name,
        "m": m,
        "rho": rho,
        "bound": bound,
        "certificate": certificate.map(|c| json!({
            "c_e": c.c_e,
            "samples_checked": c.samples_checked,
            "worst_ratio": c.worst_ratio,
            "worst_derivative_bound": c.worst_derivative_bound,
        })),
    });
    Ok(("verify-operator".into(), payload, reports))
}

fn admissible_box(m: usize, bound: f64) -> AdmissibleRegion {
    use maxlab_core::quasilinear::{FiberBounds, MembershipFn};
    let member: MembershipFn = Arc::new(move |_x, r, p| {
        r.abs() < bound && p.iter().all(|v| v.abs() < bound)
    });
    AdmissibleRegion::new(
        m,
        member,
        FiberBounds {
            r_range: (-bound, bound),
            p_box: vec![(-bound, bound); m],
        },
        true,
    )
}

fn run_max_principle(
    cfg: &ConfigMap,
    seed: u64,
    instance: &Option<String>,
    h0: Option<f64>,
) -> Result<Outcome, String> {
    let section = "max-principle";
    let name = pick_string(instance, cfg, section, "instance", "plane-vs-hyperboloid");
    let h0 = pick(h0, cfg, section, "h0", 0.0)?;
    let instance = match name.as_str() {
        "plane-vs-hyperboloid" => scenarios::plane_vs_hyperboloid_instance(h0, seed),
        "fabricated-gap" => scenarios::fabricated_gap_instance(seed),
        "identical" => scenarios::identical_instance(seed),
        other => return Err(format!("unknown instance {other:?}")),
    };
    let report = contradiction_report(&instance);
    let payload = json!({ "instance": name, "h0": h0, "verdict": report.verdict.to_string() });
    Ok(("max-principle".into(), payload, vec![report]))
}

fn named_surface(
    name: &str,
    grid: &Option<PathBuf>,
) -> Result<GraphSurface, String> {
    match name {
        "hyperboloid" | "lower-hyperboloid" => {
            let sign = if name == "hyperboloid" { 1.0 } else { -1.0 };
            Ok(GraphSurface::analytic(
                move |x: &[f64]| {
                    let s = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
                    if sign > 0.0 {
                        s
                    } else {
                        1.0 - s
                    }
                },
                move |x: &[f64]| {
                    let s = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
                    x.iter().map(|v| sign * v / s).collect()
                },
                move |x: &[f64]| {
                    let s = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
                    SymMatrix::from_fn(x.len(), |i, j| {
                        let kron = if i == j { 1.0 } else { 0.0 };
                        sign * (kron / s - x[i] * x[j] / (s * s * s))
                    })
                },
            ))
        }
        "slice" => Ok(GraphSurface::analytic(
            |_| 0.0,
            |x| vec![0.0; x.len()],
            |x| SymMatrix::zeros(x.len()),
        )),
        "grid" => {
            let path = grid.clone().ok_or("grid surface needs --grid FILE")?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read grid {}: {e}", path.display()))?;
            let grid = GridFunction::from_csv(&text).map_err(|e| e.to_string())?;
            Ok(GraphSurface::from_grid(grid))
        }
        other => Err(format!("unknown surface {other:?}")),
    }
}

fn run_graph_geometry(
    cfg: &ConfigMap,
    chart: &Option<String>,
    surface: &Option<String>,
    grid: &Option<PathBuf>,
    at: &Option<String>,
) -> Result<Outcome, String> {
    let section = "graph-geometry";
    let chart_name = pick_string(chart, cfg, section, "chart", "minkowski");
    let surface_name = pick_string(surface, cfg, section, "surface", "hyperboloid");
    let at_text = pick_string(at, cfg, section, "at", "0.2,0.1");
    let x = parse_point(&at_text)?;
    let m = x.len();
    let chart = named_chart(&chart_name, m)?;
    let grid = grid
        .clone()
        .or_else(|| cfg.scoped(section, "grid").map(PathBuf::from));
    let surface = named_surface(&surface_name, &grid)?;

    let geometry = graph_geometry(&chart, &surface, &x).map_err(|e| e.to_string())?;
    let (a, b) = lorgraph::mean_curvature_coefficients(&chart, &surface, &x)
        .map_err(|e| e.to_string())?;
    let jet = surface.jet(&x).map_err(|e| e.to_string())?;
    let assembled = a.trace_product(&jet.hess).expect("dims agree") + b;
    let residual = (assembled - geometry.mean_curvature).abs();
    let verdict = if residual < 1e-8 {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    let report = VerificationReport::new("lorgraph/coefficient-consistency", verdict)
        .with_residual("assembly_residual", residual)
        .with_params(json!({ "chart": chart_name, "surface": surface_name, "at": x }));

    let payload = json!({
        "chart": chart_name,
        "surface": surface_name,
        "at": x,
        "geometry": geometry_report(&geometry),
        "coefficients": { "a": a.rows(), "b": b },
    });
    Ok(("graph-geometry".into(), payload, vec![report]))
}

#[allow(clippy::too_many_arguments)]
fn run_busemann(
    cfg: &ConfigMap,
    model: &Option<String>,
    line: &Option<String>,
    grid_nx: Option<usize>,
    grid_nt: Option<usize>,
    x_max: Option<f64>,
    t_max: Option<f64>,
    table_out: &Option<PathBuf>,
) -> Result<Outcome, String> {
    let section = "busemann";
    let model_name = pick_string(model, cfg, section, "model", "strip-flat");
    let line_text = pick_string(line, cfg, section, "line", "0.0");
    let fiber_point = parse_point(&line_text)?;
    let model = named_model(&model_name, fiber_point.len())?;
    let nx = pick(grid_nx, cfg, section, "grid-nx", 20)?;
    let nt = pick(grid_nt, cfg, section, "grid-nt", 20)?;
    let x_max = pick(x_max, cfg, section, "x-max", 0.9)?;
    let t_max = pick(t_max, cfg, section, "t-max", 0.9 * std::f64::consts::FRAC_PI_2)?;

    // parameter grid along the first fiber axis and time
    let mut points = Vec::with_capacity(nx * nt);
    for i in 0..nx {
        for j in 0..nt {
            let mut p = fiber_point.clone();
            p[0] += -x_max + 2.0 * x_max * (i as f64) / (nx.max(2) as f64 - 1.0);
            p.push(-t_max + 2.0 * t_max * (j as f64) / (nt.max(2) as f64 - 1.0));
            points.push(p);
        }
    }

    let line = ModelLine::vertical(fiber_point.clone());
    let plus = BusemannEvaluator::new(model, line.clone(), BusemannKind::Future);
    let minus = BusemannEvaluator::new(model, line.clone(), BusemannKind::Past);

    let mut worst_bt = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut table = String::new();
    for point in &points {
        let sample = plus.evaluate(point).map_err(|e| e.to_string())?;
        let b_minus = minus.evaluate(point).map_err(|e| e.to_string())?.value;
        let t = *point.last().expect("points carry a time coordinate");
        worst_bt = worst_bt.max((sample.value - t).abs());
        worst_sum = worst_sum.max((sample.value + b_minus).abs());
        if table_out.is_some() {
            let coords: Vec<String> = point.iter().map(|v| format!("{v:?}")).collect();
            let partial: Vec<String> = sample
                .partial
                .iter()
                .map(|(_, b)| format!("{b:?}"))
                .collect();
            table.push_str(&format!(
                "{},{},{:?},{:?}\n",
                coords.join(","),
                partial.join(","),
                sample.value,
                t,
            ));
        }
    }
    if let Some(path) = table_out {
        std::fs::write(path, table).map_err(|e| format!("cannot write table: {e}"))?;
    }

    let suite = maxlab_core::modelspace::busemann_inequality_suite(&model, &line, &points, 1e-3)
        .map_err(|e| e.to_string())?;
    let is_strip = matches!(model, ModelSpacetime::WarpedStrip { .. });
    let bt_verdict = if !is_strip || (worst_bt < 1e-3 && worst_sum < 2e-3) {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    let bt_report = VerificationReport::new("modelspace/busemann-splitting-values", bt_verdict)
        .with_residual("worst_b_plus_minus_t", worst_bt)
        .with_residual("worst_sum", worst_sum)
        .with_params(json!({ "model": model_name, "grid": [nx, nt] }));

    let payload = json!({
        "model": model_name,
        "line": fiber_point,
        "grid": [nx, nt],
        "worst_b_plus_minus_t": worst_bt,
        "worst_sum": worst_sum,
    });
    Ok(("busemann".into(), payload, vec![bt_report, suite]))
}

fn run_spheres(
    cfg: &ConfigMap,
    model: &Option<String>,
    radii: &Option<String>,
    h_fd: Option<f64>,
) -> Result<Outcome, String> {
    let section = "spheres";
    let model_name = pick_string(model, cfg, section, "model", "strip-hyperbolic");
    let fiber_dim = match model_name.as_str() {
        "strip-flat" => 1,
        _ => 2,
    };
    let model = named_model(&model_name, fiber_dim)?;
    let radii_text = pick_string(
        radii,
        cfg,
        section,
        "radii",
        "0.5235987755982988,0.7853981633974483,1.0471975511965976",
    );
    let radii = parse_point(&radii_text)?;
    let h_fd = pick(h_fd, cfg, section, "h-fd", 2e-3)?;

    let base = vec![0.0; model.dim() - 1]
        .into_iter()
        .chain([0.0])
        .collect::<Vec<f64>>();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut bound_ok = true;
    for &r in &radii {
        let sphere = geodesic_sphere(&model, &base, r, h_fd).map_err(|e| e.to_string())?;
        let h = sphere.geometry.mean_curvature;
        let expected = match model {
            ModelSpacetime::Minkowski { .. } => -1.0 / r,
            ModelSpacetime::WarpedStrip { .. } => -1.0 / r.tan(),
        };
        worst = worst.max((h - expected).abs());
        if matches!(model, ModelSpacetime::WarpedStrip { .. }) && h < -1.0 / r.tan() - 1e-6 {
            bound_ok = false;
        }
        rows.push(json!({ "r": r, "mean_curvature": h, "expected": expected }));
    }
    let verdict = if worst < 1e-4 && bound_ok {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    let report = VerificationReport::new("modelspace/geodesic-spheres", verdict)
        .with_residual("worst_deviation", worst)
        .with_witness(json!({ "comparison_bound_respected": bound_ok }))
        .with_params(json!({ "model": model_name, "radii": radii, "h_fd": h_fd }));
    let payload = json!({ "model": model_name, "spheres": rows });
    Ok(("spheres".into(), payload, vec![report]))
}

#[allow(clippy::too_many_arguments)]
fn run_splitting(
    cfg: &ConfigMap,
    model: &Option<String>,
    nx: Option<usize>,
    nt: Option<usize>,
    x_max: Option<f64>,
    t_max: Option<f64>,
    dump_geodesic: &Option<String>,
    dump_out: &Option<PathBuf>,
) -> Result<Outcome, String> {
    let section = "splitting";
    let model_name = pick_string(model, cfg, section, "model", "strip-flat");
    let fiber_dim = match model_name.as_str() {
        "strip-hyperbolic" => 2,
        _ => 1,
    };
    let model = named_model(&model_name, fiber_dim)?;
    let nx = pick(nx, cfg, section, "nx", 5)?;
    let nt = pick(nt, cfg, section, "nt", 5)?;
    let x_max = pick(x_max, cfg, section, "x-max", 0.6)?;
    let t_max = pick(t_max, cfg, section, "t-max", 1.0)?;

    let mut fiber_points = Vec::new();
    for i in 0..nx {
        let s = -x_max + 2.0 * x_max * (i as f64) / (nx.max(2) as f64 - 1.0);
        fiber_points.push(vec![s; fiber_dim]);
    }
    let times: Vec<f64> = (0..nt)
        .map(|j| -t_max + 2.0 * t_max * (j as f64) / (nt.max(2) as f64 - 1.0))
        .collect();

    let options = SplittingOptions::default();
    let report = splitting_map_check(&model, &fiber_points, &times, &options)
        .map_err(|e| e.to_string())?;

    if let Some(dump) = dump_geodesic {
        let x = parse_point(dump)?;
        let path = dump_out
            .clone()
            .or_else(|| cfg.scoped(section, "dump-out").map(PathBuf::from))
            .ok_or("geodesic dump needs --dump-out FILE")?;
        let mut csv = String::from("s");
        for k in 0..model.dim() {
            csv.push_str(&format!(",x{k}"));
        }
        csv.push('\n');
        let steps = 40;
        for k in 0..=steps {
            let s = -t_max + 2.0 * t_max * (k as f64) / steps as f64;
            let point = splitting_map(&model, &x, s, options.ode_step)
                .map_err(|e| e.to_string())?;
            let coords: Vec<String> = point.iter().map(|v| format!("{v:?}")).collect();
            csv.push_str(&format!("{s:?},{}\n", coords.join(",")));
        }
        std::fs::write(&path, csv).map_err(|e| format!("cannot write dump: {e}"))?;
    }

    let payload = json!({
        "model": model_name,
        "grid": [nx, nt],
        "worst_component_residual": report.residuals["worst_component_residual"],
    });
    Ok(("splitting".into(), payload, vec![report]))
}

fn named_metric(name: &str, dim: usize, seed: u64) -> Result<MetricField, String> {
    match name {
        "minkowski" => Ok(metrics::minkowski_field(dim.max(2))),
        "strip-flat" => Ok(metrics::strip_field(Fiber::Flat(dim.max(1)))),
        "strip-hyperbolic" => Ok(metrics::strip_field(Fiber::HyperbolicBall(dim.max(2)))),
        "product-flat" => Ok(metrics::product_with_time(Fiber::Flat(dim.max(2)))),
        "product-hyperbolic" => Ok(metrics::product_with_time(Fiber::HyperbolicBall(dim.max(2)))),
        "product-perturbed" => Ok(metrics::perturbed_product(dim.max(3), 1e-2, seed)),
        "hyperbolic-ball" => Ok(metrics::fiber_field(Fiber::HyperbolicBall(dim.max(2)))),
        "flat" => Ok(metrics::fiber_field(Fiber::Flat(dim.max(2)))),
        "two-sphere" => Ok(metrics::two_sphere()),
        other => Err(format!("unknown metric {other:?}")),
    }
}

fn default_point(n: usize) -> Vec<f64> {
    (0..n).map(|k| 0.1 + 0.05 * k as f64).collect()
}

fn tensor4_json(t: &curvature::Tensor4) -> serde_json::Value {
    let n = t.dim();
    let nested: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    (0..n)
                        .map(|c| (0..n).map(|d| t.get(a, b, c, d)).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    json!({ "indices": ["a", "b", "c", "d"], "variance": "covariant", "components": nested })
}

fn run_curvature(
    cfg: &ConfigMap,
    seed: u64,
    metric: &Option<String>,
    dim: Option<usize>,
    at: &Option<String>,
    h_fd: Option<f64>,
    schur: bool,
) -> Result<Outcome, String> {
    let section = "curvature";
    let metric_name = pick_string(metric, cfg, section, "metric", "strip-hyperbolic");
    let dim = pick(dim, cfg, section, "dim", 3)?;
    let h_fd = pick(h_fd, cfg, section, "h-fd", 1e-3)?;
    let schur = schur || cfg.scoped(section, "schur") == Some("true");
    let metric = named_metric(&metric_name, dim, seed)?;
    let at_text = at
        .clone()
        .or_else(|| cfg.scoped(section, "at").map(str::to_string));
    let x = match at_text {
        Some(text) => parse_point(&text)?,
        None => default_point(metric.dim()),
    };
    if x.len() != metric.dim() {
        return Err(format!(
            "point has {} coordinates, metric {metric_name:?} needs {}",
            x.len(),
            metric.dim()
        ));
    }

    let bundle = curvature_bundle(&metric, &x, h_fd).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    let mut invariants = VerificationReport::pass("curvature/bundle-invariants")
        .with_residual("symmetry_residual", bundle.symmetry_residual)
        .with_params(json!({ "metric": metric_name, "at": x, "h_fd": h_fd }));
    if metric.dim() >= 4 {
        let trace = weyl_trace_residual(&bundle, &metric, &x).map_err(|e| e.to_string())?;
        invariants = invariants.with_residual("weyl_trace_residual", trace);
        let norm = weyl_norm_sq(&bundle, &metric, &x).map_err(|e| e.to_string())?;
        invariants = invariants.with_residual("weyl_norm_sq", norm);
    }
    reports.push(invariants);

    if schur {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let result =
            schur_residual(&metric, &x, h_fd, 60, &mut rng).map_err(|e| e.to_string())?;
        reports.push(
            VerificationReport::pass("curvature/schur-residual")
                .with_residual("residual", result.residual)
                .with_residual("mean_sectional", result.mean)
                .with_params(json!({ "planes": result.planes }))
                .with_seed(seed),
        );
    }

    let payload = json!({
        "metric": metric_name,
        "at": x,
        "riemann": tensor4_json(&bundle.riemann),
        "ricci": bundle.ricci.rows(),
        "scalar": bundle.scalar,
        "weyl": tensor4_json(&bundle.weyl),
    });
    Ok(("curvature".into(), payload, reports))
}

#[allow(clippy::too_many_arguments)]
fn run_weyl(
    cfg: &ConfigMap,
    metric: &Option<String>,
    dim: Option<usize>,
    at: &Option<String>,
    lambda: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    h_fd: Option<f64>,
) -> Result<Outcome, String> {
    let section = "weyl";
    let metric_name = pick_string(metric, cfg, section, "metric", "product-perturbed");
    let dim = pick(dim, cfg, section, "dim", 3)?;
    let h_fd = pick(h_fd, cfg, section, "h-fd", 1e-3)?;
    let lambda_value = pick(lambda, cfg, section, "lambda", 2.0)?;
    let metric = named_metric(&metric_name, dim, 0)?;
    let n = metric.dim();
    if n < 4 {
        return Err(format!("weyl checks need dimension >= 4, metric has {n}"));
    }
    let nf = n as f64;
    let a = pick(a, cfg, section, "a", -1.0 / (nf - 2.0))?;
    let b = pick(b, cfg, section, "b", 1.0 / ((nf - 1.0) * (nf - 2.0)))?;
    let at_text = at
        .clone()
        .or_else(|| cfg.scoped(section, "at").map(str::to_string));
    let x = match at_text {
        Some(text) => parse_point(&text)?,
        None => default_point(n),
    };

    let bundle = curvature_bundle(&metric, &x, h_fd).map_err(|e| e.to_string())?;
    let norm = weyl_norm_sq(&bundle, &metric, &x).map_err(|e| e.to_string())?;

    let lam: curvature::ScalarFieldFn = Arc::new(move |_| lambda_value);
    let conformal =
        conformal_transform_check(&metric, lam, &x, h_fd, 1e-8).map_err(|e| e.to_string())?;

    let mut reports = vec![conformal];
    if metric_name.starts_with("product") {
        let decomposition = product_norm_decomposition(&metric, &x, a, b, h_fd, 1e-8)
            .map_err(|e| e.to_string())?;
        reports.push(decomposition);
    }

    let payload = json!({
        "metric": metric_name,
        "at": x,
        "weyl_norm_sq": norm,
        "lambda": lambda_value,
        "a": a,
        "b": b,
    });
    Ok(("weyl".into(), payload, reports))
}
