//! `delay-h2`: synthesize decentralized H2 controllers under delayed
//! information sharing, sweep sharing horizons, and check solver
//! invariants on a given plant/pattern instance.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use delay_h2::fixtures::SweepFamily;
use delay_h2::pattern::is_quadratically_invariant;
use delay_h2::riccati::{control_dare, estimation_dare};
use delay_h2::spectral::{build_factors, q_delayed, t_coefficients};
use delay_h2::statespace::{add, evalz, fir_to_ss, h2_norm, markov, series, FirTransfer};
use delay_h2::synthesis::{
    assemble_qp, closed_loop_with_feedback, hj_coefficients, plant_block_delays,
    recover_feedback, stationarity_residual, synthesize, DEFAULT_SEED,
};
use delay_h2::{fir_truncated_optimum, InformationPattern, Matrix, OracleConfig, Plant};
use delay_h2_cli::io::{resolve_pattern, PlantFile};
use delay_h2_cli::report::{ControllerReport, OracleReport, RunReport};
use delay_h2_cli::CliError;
use num_complex::Complex;

#[derive(Parser)]
#[command(
    name = "delay-h2",
    about = "H2 model matching with delayed information sharing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PlantPatternArgs {
    /// Plant JSON file (keys A, B1, B2, C1, C2, D12, D21).
    #[arg(long)]
    plant: PathBuf,
    /// Pattern JSON file, or a named family: chain, pure-delay, n-step,
    /// di, tri, low (names other than chain need --n).
    #[arg(long)]
    pattern: String,
    /// Sharing horizon for named pattern families.
    #[arg(long, alias = "N")]
    n: Option<usize>,
    /// Seed for randomized stationarity probing.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and emit a deterministic JSON report.
    Synthesize {
        #[command(flatten)]
        common: PlantPatternArgs,
        /// Run the FIR oracle; value is the FIR length (for example 60 or
        /// M=60).
        #[arg(long, num_args = 0..=1, default_missing_value = "60")]
        oracle: Option<String>,
        /// Cost horizon for the oracle (default max(200, M + 10 n)).
        #[arg(long)]
        oracle_horizon: Option<usize>,
        /// Write the report to this file as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include Q*'s realization and V*'s coefficients in the report.
        #[arg(long)]
        emit_controller: bool,
    },
    /// Synthesize across a range of sharing horizons and emit CSV.
    Sweep {
        /// Plant JSON file.
        #[arg(long)]
        plant: PathBuf,
        /// Sparsity family: tri, di, low, pure-delay, or all.
        #[arg(long, default_value = "all")]
        family: String,
        /// Inclusive horizon range, e.g. 1..8.
        #[arg(long, default_value = "1..8")]
        n_range: String,
        /// Write the CSV to this file as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant diagnostics and exit nonzero on failure.
    Check {
        #[command(flatten)]
        common: PlantPatternArgs,
        /// Scale factor applied to every check threshold.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        /// Add a feasible perturbation of this magnitude to Q* before the
        /// stationarity check (forces a failure; for exercising the gate).
        #[arg(long)]
        perturb_q: Option<f64>,
        /// Also check oracle agreement with this FIR length.
        #[arg(long, num_args = 0..=1, default_missing_value = "60")]
        oracle: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synthesize { common, oracle, oracle_horizon, out, emit_controller } => {
            cmd_synthesize(common, oracle, oracle_horizon, out, emit_controller)
        }
        Command::Sweep { plant, family, n_range, out } => cmd_sweep(plant, family, n_range, out),
        Command::Check { common, tol, perturb_q, oracle } => {
            cmd_check(common, tol, perturb_q, oracle)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code)
        }
    }
}

fn parse_fir_length(spec: &str) -> Result<usize, CliError> {
    let trimmed = spec.strip_prefix("M=").unwrap_or(spec);
    trimmed
        .parse()
        .map_err(|_| CliError::validation(format!("cannot parse oracle FIR length '{spec}'")))
}

fn load_instance(common: &PlantPatternArgs) -> Result<(Plant, InformationPattern), CliError> {
    let plant = PlantFile::load(&common.plant)?.to_plant()?;
    let pattern = resolve_pattern(&common.pattern, common.n, &plant)?;
    Ok((plant, pattern))
}

fn oracle_config(
    spec: &Option<String>,
    horizon: Option<usize>,
    plant: &Plant,
) -> Result<Option<OracleConfig>, CliError> {
    let Some(spec) = spec else { return Ok(None) };
    let fir_length = parse_fir_length(spec)?;
    let cost_horizon = horizon.unwrap_or_else(|| 200.max(fir_length + 10 * plant.n()));
    Ok(Some(OracleConfig { fir_length, cost_horizon }))
}

fn cmd_synthesize(
    common: PlantPatternArgs,
    oracle: Option<String>,
    oracle_horizon: Option<usize>,
    out: Option<PathBuf>,
    emit_controller: bool,
) -> Result<(), CliError> {
    let start = Instant::now();
    let (plant, pattern) = load_instance(&common)?;
    let oracle_cfg = oracle_config(&oracle, oracle_horizon, &plant)?;

    let result = synthesize(&plant, &pattern)?;
    let delays = plant_block_delays(&plant, &pattern);
    let qi = is_quadratically_invariant(&pattern, &delays);
    if !qi {
        eprintln!(
            "warning: pattern is not quadratically invariant for this plant; \
             the recovered feedback law may violate the delay constraint"
        );
    }
    let residual = stationarity_residual(&plant, &result.q_star, &pattern, 100, common.seed)?;
    let oracle_report = match &oracle_cfg {
        Some(cfg) => {
            let sol = fir_truncated_optimum(&plant, &pattern, cfg)?;
            Some(OracleReport {
                norm: sol.norm,
                fir_length: cfg.fir_length,
                cost_horizon: cfg.cost_horizon,
            })
        }
        None => None,
    };

    let (n, m1, p2, q1, q2, radius) = RunReport::plant_digest(&plant);
    let (u_blocks, y_blocks, free_entries) = RunReport::summarize_pattern(&pattern);
    let report = RunReport {
        plant_n: n,
        plant_m1: m1,
        plant_p2: p2,
        plant_q1: q1,
        plant_q2: q2,
        spectral_radius: radius,
        pattern_n: pattern.horizon(),
        u_blocks,
        y_blocks,
        free_entries,
        quadratically_invariant: qi,
        norm_centralized: result.norm_centralized,
        norm_delayed: result.norm_delayed,
        norm_decentralized: result.norm_decentralized,
        oracle: oracle_report,
        decomposition_value: result.decomposition_value,
        stationarity_residual: residual,
        seed: common.seed,
        controller: emit_controller.then(|| ControllerReport {
            q_star: result.q_star.clone(),
            v_star: result.v_star.clone(),
        }),
    };
    let text = report.to_json();
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(&path, &text)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    }
    eprintln!("timing: {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn parse_n_range(spec: &str) -> Result<(usize, usize), CliError> {
    let parsed = spec.split_once("..").and_then(|(a, b)| {
        let lo = a.trim().parse::<usize>().ok()?;
        let hi = b.trim().parse::<usize>().ok()?;
        Some((lo, hi))
    });
    match parsed {
        Some((lo, hi)) if lo >= 1 && lo <= hi => Ok((lo, hi)),
        _ => Err(CliError::validation(format!(
            "cannot parse horizon range '{spec}' (expected e.g. 1..8)"
        ))),
    }
}

fn cmd_sweep(
    plant_path: PathBuf,
    family: String,
    n_range: String,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let plant = PlantFile::load(&plant_path)?.to_plant()?;
    if plant.p2() != 2 || plant.q2() != 2 {
        return Err(CliError::validation(format!(
            "sweep families are two-player; plant has p2 = {}, q2 = {}",
            plant.p2(),
            plant.q2()
        )));
    }
    let families: Vec<SweepFamily> = if family == "all" {
        SweepFamily::ALL.to_vec()
    } else {
        vec![SweepFamily::parse(&family).ok_or_else(|| {
            CliError::validation(format!(
                "unknown family '{family}' (expected tri, di, low, pure-delay or all)"
            ))
        })?]
    };
    let (n_lo, n_hi) = parse_n_range(&n_range)?;

    let jobs: Vec<(SweepFamily, usize)> = families
        .iter()
        .flat_map(|&fam| (n_lo..=n_hi).map(move |n| (fam, n)))
        .collect();
    // points run concurrently; rows are assembled in job order regardless
    let mut norms: Vec<Result<f64, CliError>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(fam, n)| {
                let plant = &plant;
                scope.spawn(move || {
                    let pattern = delay_h2::fixtures::sweep_pattern(fam, n);
                    synthesize(plant, &pattern)
                        .map(|r| r.norm_decentralized)
                        .map_err(CliError::from)
                })
            })
            .collect();
        for handle in handles {
            norms.push(handle.join().expect("sweep worker panicked"));
        }
    });

    let mut csv = String::from("family,N,norm\n");
    for (&(fam, n), norm) in jobs.iter().zip(norms) {
        let norm = norm?;
        csv.push_str(&format!("{},{},{:.11e}\n", fam.name(), n, norm));
    }
    print!("{csv}");
    if let Some(path) = out {
        std::fs::write(&path, &csv)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

struct CheckList {
    scale: f64,
    failures: Vec<String>,
}

impl CheckList {
    fn new(scale: f64) -> Self {
        Self { scale, failures: Vec::new() }
    }

    fn run(&mut self, name: &str, value: f64, threshold: f64) {
        let threshold = threshold * self.scale;
        if value <= threshold {
            println!("PASS {name}: {value:.3e} (tol {threshold:.1e})");
        } else {
            println!("FAIL {name}: {value:.3e} (tol {threshold:.1e})");
            self.failures.push(name.to_string());
        }
    }
}

fn cmd_check(
    common: PlantPatternArgs,
    tol: f64,
    perturb_q: Option<f64>,
    oracle: Option<String>,
) -> Result<(), CliError> {
    let (plant, pattern) = load_instance(&common)?;
    let oracle_cfg = oracle_config(&oracle, None, &plant)?;
    let n = pattern.horizon();
    let mut checks = CheckList::new(tol);

    let cs = control_dare(&plant)?;
    let es = estimation_dare(&plant)?;
    checks.run("control-riccati-residual", cs.residual(&plant), 1e-9 * (1.0 + cs.x.norm()));
    checks.run(
        "estimation-riccati-residual",
        es.residual(&plant),
        1e-9 * (1.0 + es.y.norm()),
    );
    let dual = control_dare(&plant.dual())?;
    checks.run(
        "riccati-duality",
        (&es.y - &dual.x).amax().max((es.l.transpose() - &dual.k).amax()),
        1e-9,
    );

    let fs = build_factors(&plant, &cs, &es)?;
    let p12 = plant.p12();
    let p21 = plant.p21();
    let mut left: f64 = 0.0;
    let mut right: f64 = 0.0;
    for k in 0..64 {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / 64.0;
        let z = Complex::from_polar(1.0, theta);
        let p = evalz(&p12, z)?;
        let w = evalz(&fs.w_l_inv, z)?;
        left = left.max((p.adjoint() * &p - w.adjoint() * &w).norm());
        let p = evalz(&p21, z)?;
        let w = evalz(&fs.w_r_inv, z)?;
        right = right.max((&p * p.adjoint() - &w * w.adjoint()).norm());
    }
    checks.run("left-factorization", left, 1e-8);
    checks.run("right-factorization", right, 1e-8);
    let mut inverse_residual: f64 = 0.0;
    for (w, wi) in [(&fs.w_l, &fs.w_l_inv), (&fs.w_r, &fs.w_r_inv)] {
        let prod = series(w, wi)?;
        let mk = markov(&prod, 20);
        let eye = Matrix::identity(mk[0].nrows(), mk[0].ncols());
        inverse_residual = inverse_residual.max((&mk[0] - eye).norm());
        for m in &mk[1..] {
            inverse_residual = inverse_residual.max(m.norm());
        }
    }
    checks.run("factor-inverse-identity", inverse_residual, 1e-9);

    let q_n = q_delayed(&fs, n)?;
    let support: f64 =
        markov(&q_n, n + 1).iter().take(n + 1).map(|m| m.norm()).fold(0.0, f64::max);
    checks.run("delayed-parameter-support", support, 1e-10);

    let result = synthesize(&plant, &pattern)?;
    checks.run(
        "sandwich-ordering",
        (result.norm_centralized - result.norm_decentralized)
            .max(result.norm_decentralized - result.norm_delayed)
            .max(0.0),
        1e-9,
    );
    checks.run(
        "cost-decomposition",
        (result.norm_decentralized.powi(2)
            - result.norm_delayed.powi(2)
            - result.decomposition_value)
            .abs(),
        1e-8,
    );

    let mk = markov(&result.q_star, n + 1);
    let mut infeasibility: f64 = 0.0;
    for lag in 1..=n {
        let complement =
            Matrix::from_element(plant.p2(), plant.q2(), 1.0) - pattern.scalar_mask(lag);
        infeasibility = infeasibility.max(mk[lag].component_mul(&complement).norm());
    }
    checks.run("parameter-feasibility", infeasibility, 1e-9);
    let tail_violation: f64 = markov(&result.u_star, n + 1)
        .iter()
        .take(n + 1)
        .map(|m| m.norm())
        .fold(0.0, f64::max);
    checks.run("correction-support", tail_violation, 1e-9);

    let (hc, jc) = hj_coefficients(&plant, &cs, &es, n);
    let tc = t_coefficients(&fs, n);
    let qp = assemble_qp(&pattern, &hc, &jc, &tc)?;
    if qp.dim() > 0 {
        let v = delay_h2::numerics::solve_spd(&qp.hessian, &(-&qp.linear_term))?;
        checks.run("qp-optimality", (&qp.hessian * &v + &qp.linear_term).norm(), 1e-9);
    } else {
        checks.run("qp-optimality", 0.0, 1e-9);
    }

    let q_checked = match perturb_q {
        Some(eps) => {
            // deterministic feasible perturbation: masked ones over the
            // horizon plus one dense tail lag
            let mut coeffs: Vec<Matrix> = (1..=n).map(|lag| pattern.scalar_mask(lag)).collect();
            coeffs.push(Matrix::from_element(plant.p2(), plant.q2(), 1.0));
            let fir = FirTransfer::new(coeffs).map_err(CliError::from)?;
            let scaled = fir.scale(eps / fir.norm_sq().sqrt());
            add(&result.q_star, &fir_to_ss(&scaled)).map_err(CliError::from)?
        }
        None => result.q_star.clone(),
    };
    let residual = stationarity_residual(&plant, &q_checked, &pattern, 100, common.seed)?;
    checks.run("stationarity", residual, 1e-7);

    let delays = plant_block_delays(&plant, &pattern);
    let qi = is_quadratically_invariant(&pattern, &delays);
    println!("INFO quadratically-invariant: {qi}");
    if qi {
        let k = recover_feedback(&result.q_star, &plant)?;
        let cl = closed_loop_with_feedback(&plant, &k)?;
        checks.run(
            "feedback-equivalence",
            (h2_norm(&cl)? - result.norm_decentralized).abs(),
            1e-8,
        );
    } else {
        println!(
            "INFO feedback-equivalence skipped: recovered law may violate the delay constraint"
        );
    }

    if let Some(cfg) = oracle_cfg {
        let sol = fir_truncated_optimum(&plant, &pattern, &cfg)?;
        checks.run("oracle-agreement", (sol.norm - result.norm_decentralized).abs(), 1e-3);
    }

    if checks.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::check_failed(format!("checks failed: {}", checks.failures.join(", "))))
    }
}
