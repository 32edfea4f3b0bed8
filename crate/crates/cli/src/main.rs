//! `ssqw`: command-line front end for the split-step walk toolkit.
//!
//! Reports go to stdout as JSON. Data files (samples, states, series, tables)
//! are written to `--out DIR` in the format chosen by `--format`. Failures
//! print one line `error: CODE: message` on stderr and exit with 1 (domain
//! or precondition) or 2 (malformed configuration).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ssqw_core::dynamics::{evolve, EvolveOptions, InitialState, Probe};
use ssqw_core::io;
use ssqw_core::params::{validate_parameters, ValidationReport};
use ssqw_core::resonance::{default_deltas, resonance_report, Edge, ThresholdPoint};
use ssqw_core::spectral::{
    admissible_samples, build_eigenvector, eigen_residual, eval_f, find_f_zeros, spectral_report, unitary_eigenvalues,
    FMethod,
};
use ssqw_core::verify::{run_criterion, summary_line, CRITERIA};
use ssqw_core::{
    CoinParameters, Error, QuadratureSpec, ReferenceSet, StrongShiftParameters, ValidationMode, VectorState,
    WalkOperator, WindowSpec,
};

#[derive(Parser)]
#[command(name = "ssqw", version, about = "Two-dimensional split-step quantum walks with a one-defect coin")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the parameter constraints and report which regime applies.
    Validate {
        #[command(flatten)]
        params: ParamsArg,
        /// Constraints to check.
        #[arg(long, value_enum, default_value_t = Mode::StrongShift)]
        mode: Mode,
    },
    /// Zeros of f, lifted eigenvalues and their residuals; optional f samples.
    Spectrum {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 2001, value_parser = clap::value_parser!(u32).range(2..))]
        grid: u32,
        #[command(flatten)]
        quad: QuadArg,
        /// Number of λ samples in the f-samples file.
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
        samples: u32,
        /// Smallest window half-width used for eigen-residuals.
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(2..))]
        min_half_width: u32,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Build the eigenvector for one zero of f and report its residual.
    Eigvec {
        #[command(flatten)]
        params: ParamsArg,
        /// Index of the zero (ascending order).
        #[arg(long, default_value_t = 0)]
        zero: usize,
        /// Use the conjugate eigenvalue e^{-i arccos λ}.
        #[arg(long)]
        conjugate: bool,
        #[command(flatten)]
        window: WindowArg,
        #[command(flatten)]
        quad: QuadArg,
        /// Scale the written state to unit norm.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Threshold generalized eigenfunctions, norm growth and the ε table.
    Resonance {
        #[command(flatten)]
        params: ParamsArg,
        /// Window half-widths for the growth table.
        #[arg(long, value_delimiter = ',', default_values_t = [32u32, 64, 128])]
        windows: Vec<u32>,
        /// Approach distances δ for the ε table.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Half-width of the written generalized-eigenfunction slices.
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(2..))]
        half_width: u32,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Evolve an initial state and record probe probabilities every step.
    Evolve {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        steps: u32,
        /// Window half-width; defaults to steps + 1 (ignored for file states).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        half_width: Option<u32>,
        /// `point:X1,X2,C` (C in 1..4), `eigvec:I[:conj]`, `gef:plus|minus[:conj]` or `file:PATH`.
        #[arg(long, default_value = "point:0,0,1")]
        init: String,
        /// Probed site `X1,X2`; repeatable.
        #[arg(long = "probe")]
        probes: Vec<String>,
        /// Probed region `X1a,X1b,...:R` meaning those columns with |x2| ≤ R; repeatable.
        #[arg(long = "region")]
        regions: Vec<String>,
        /// Initial mass allowed within reach of the window edge.
        #[arg(long, default_value_t = 0.0)]
        edge_mass_tol: f64,
        #[command(flatten)]
        quad: QuadArg,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Run the acceptance suite; exit 0 iff every selected criterion passes.
    Verify {
        /// `all` or a comma-separated list of criterion numbers.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Args)]
struct ParamsArg {
    /// Reference set name (pset_a, pset_b, pset_c) or path to a TOML parameter file.
    #[arg(long)]
    params: String,
}

#[derive(Args)]
struct QuadArg {
    /// Quadrature nodes M.
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u32).range(16..))]
    nodes: u32,
}

#[derive(Args)]
struct WindowArg {
    #[arg(long, default_value_t = 96, value_parser = clap::value_parser!(u32).range(2..))]
    half_width: u32,
    #[arg(long, default_value_t = 1)]
    margin: u32,
}

#[derive(Args)]
struct OutputArg {
    /// Directory for data files; nothing but the report is produced without it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    General,
    StrongShift,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Failure carrying its exit status.
struct Failure {
    code: &'static str,
    message: String,
    status: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.code(),
            message: e.to_string(),
            status: if e.is_config_error() { 2 } else { 1 },
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure { code: "E_CONFIG", message: message.into(), status: 2 }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.code, f.message.replace('\n', " "));
            ExitCode::from(f.status)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("SSQW_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| config_error(format!("SSQW_THREADS must be a nonnegative integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| config_error(e.to_string()))
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Validate { params, mode } => validate(&params, mode),
        Command::Spectrum { params, grid, quad, samples, min_half_width, output } => {
            spectrum(&params, grid as usize, &quad, samples as usize, min_half_width as usize, &output)
        }
        Command::Eigvec { params, zero, conjugate, window, quad, normalize, output } => {
            eigvec(&params, zero, conjugate, &window, &quad, normalize, &output)
        }
        Command::Resonance { params, windows, deltas, half_width, output } => {
            resonance(&params, &windows, deltas, half_width as usize, &output)
        }
        Command::Evolve { params, steps, half_width, init, probes, regions, edge_mass_tol, quad, output } => {
            let spec = EvolveSpec { steps: steps as usize, half_width, init, probes, regions, edge_mass_tol };
            evolve_cmd(&params, spec, &quad, &output)
        }
        Command::Verify { suite } => verify(&suite),
    }
}

fn load_params(arg: &ParamsArg) -> CliResult<CoinParameters> {
    if let Some(set) = ReferenceSet::from_name(&arg.params) {
        return Ok(set.params());
    }
    let text = fs::read_to_string(&arg.params).map_err(|e| Failure {
        code: "E_IO",
        message: format!("{:?} is neither a reference set nor a readable file: {e}", arg.params),
        status: 2,
    })?;
    Ok(io::parse_params_toml(&text)?)
}

fn load_strong(arg: &ParamsArg) -> CliResult<StrongShiftParameters> {
    Ok(load_params(arg)?.strong_shift()?)
}

fn quadrature(arg: &QuadArg) -> CliResult<QuadratureSpec> {
    Ok(QuadratureSpec::new(arg.nodes as usize)?)
}

fn print_report<T: Serialize>(report: &T) -> CliResult<()> {
    print!("{}", io::to_json_string(report)?);
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(Error::from)?;
    fs::write(dir.join(name), contents).map_err(Error::from)?;
    Ok(())
}

fn write_table(output: &OutputArg, stem: &str, header: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
    let Some(dir) = &output.out else { return Ok(()) };
    let body = match output.format {
        Format::Csv => io::table_to_csv(header, rows),
        Format::Json => io::to_json_string(&io::table_to_json(header, rows))?,
    };
    write_file(dir, &format!("{stem}.{}", output.format.ext()), &body)
}

fn write_state(output: &OutputArg, stem: &str, state: &VectorState) -> CliResult<()> {
    let Some(dir) = &output.out else { return Ok(()) };
    let body = match output.format {
        Format::Csv => io::state_to_csv(state),
        Format::Json => io::to_json_string(&io::state_to_json(state))?,
    };
    write_file(dir, &format!("{stem}.{}", output.format.ext()), &body)
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    passed: bool,
    #[serde(flatten)]
    report: &'a ValidationReport,
}

fn validate(arg: &ParamsArg, mode: Mode) -> CliResult<()> {
    let params = load_params(arg)?;
    let mode = match mode {
        Mode::General => ValidationMode::General,
        Mode::StrongShift => ValidationMode::StrongShift,
    };
    let report = validate_parameters(&params, mode);
    print_report(&ValidateOutput { passed: report.passed(), report: &report })?;
    if report.passed() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(report.violations.clone()).into())
    }
}

fn spectrum(
    arg: &ParamsArg,
    grid: usize,
    quad: &QuadArg,
    samples: usize,
    min_half_width: usize,
    output: &OutputArg,
) -> CliResult<()> {
    let params = load_strong(arg)?;
    let quad = quadrature(quad)?;
    let report = spectral_report(&params, grid, &quad, min_half_width)?;
    if output.out.is_some() {
        let mut lambdas = admissible_samples(&params, samples);
        lambdas.sort_by(f64::total_cmp);
        let rows = lambdas
            .iter()
            .map(|&l| {
                Ok(vec![
                    l,
                    eval_f(l, &params, FMethod::Closed, &quad)?,
                    eval_f(l, &params, FMethod::Quad1d, &quad)?,
                ])
            })
            .collect::<Result<Vec<_>, Error>>()?;
        write_table(output, "f_samples", &["lambda", "f_closed", "f_quad1d"], &rows)?;
    }
    print_report(&report)
}

#[derive(Serialize)]
struct EigvecOutput {
    lambda: f64,
    mu: [f64; 2],
    half_width: usize,
    margin: usize,
    residual: f64,
    l2_norm: f64,
    normalized: bool,
}

fn eigvec(
    arg: &ParamsArg,
    zero: usize,
    conjugate: bool,
    window: &WindowArg,
    quad: &QuadArg,
    normalize: bool,
    output: &OutputArg,
) -> CliResult<()> {
    let params = load_strong(arg)?;
    let quad = quadrature(quad)?;
    let window = WindowSpec::new(window.half_width as usize, window.margin as usize)?;
    let zeros = find_f_zeros(&params, ssqw_core::spectral::DEFAULT_GRID);
    let lambda = *zeros.get(zero).ok_or_else(|| {
        Failure::from(Error::Precondition(format!("f has {} zeros, index {zero} requested", zeros.len())))
    })?;
    let (mu, mu_bar) = unitary_eigenvalues(lambda)?;
    let mu = if conjugate { mu_bar } else { mu };
    let mut state = build_eigenvector(mu, &params, window, &quad)?;
    let l2_norm = state.norms().l2;
    if normalize {
        state.normalize()?;
    }
    let op = WalkOperator::from_strong_shift(&params);
    let report = EigvecOutput {
        lambda,
        mu: [mu.re, mu.im],
        half_width: window.half_width(),
        margin: window.margin(),
        residual: eigen_residual(&op, &state, mu),
        l2_norm,
        normalized: normalize,
    };
    write_state(output, "eigvec", &state)?;
    print_report(&report)
}

fn resonance(
    arg: &ParamsArg,
    windows: &[u32],
    deltas: Option<Vec<f64>>,
    half_width: usize,
    output: &OutputArg,
) -> CliResult<()> {
    let params = load_strong(arg)?;
    let deltas = deltas.unwrap_or_else(default_deltas);
    if let Some(bad) = deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(config_error(format!("delta {bad} must lie in (0, 1)")));
    }
    if let Some(bad) = windows.iter().find(|n| **n < 2) {
        return Err(config_error(format!("window half-width {bad} must be at least 2")));
    }
    let windows: Vec<usize> = windows.iter().map(|&n| n as usize).collect();
    let report = resonance_report(&params, &windows, &deltas)?;
    if output.out.is_some() {
        let window = WindowSpec::new(half_width, 1)?;
        for point in ThresholdPoint::ALL {
            let gef = ssqw_core::resonance::build_generalized_eigenfunction(point, &params, window)?;
            let stem = format!("gef_{}{}", edge_name(point.edge), if point.conjugate { "_conj" } else { "" });
            write_state(output, &stem, &gef.state)?;
        }
        for (edge, rows) in [(Edge::Plus, &report.epsilon_plus), (Edge::Minus, &report.epsilon_minus)] {
            let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.delta, r.lambda, r.epsilon, r.gap]).collect();
            write_table(output, &format!("epsilon_{}", edge_name(edge)), &["delta", "lambda", "epsilon", "gap"], &table)?;
        }
    }
    print_report(&report)
}

fn edge_name(edge: Edge) -> &'static str {
    match edge {
        Edge::Plus => "plus",
        Edge::Minus => "minus",
    }
}

struct EvolveSpec {
    steps: usize,
    half_width: Option<u32>,
    init: String,
    probes: Vec<String>,
    regions: Vec<String>,
    edge_mass_tol: f64,
}

enum Init {
    Built(InitialState),
    File(PathBuf),
}

fn parse_ints(text: &str, what: &str) -> CliResult<Vec<i64>> {
    text.split(',')
        .map(|s| s.trim().parse::<i64>().map_err(|_| config_error(format!("bad {what} {text:?}"))))
        .collect()
}

fn parse_site(text: &str) -> CliResult<(i64, i64)> {
    match parse_ints(text, "site")?.as_slice() {
        [x1, x2] => Ok((*x1, *x2)),
        _ => Err(config_error(format!("site must be X1,X2, got {text:?}"))),
    }
}

fn parse_init(text: &str) -> CliResult<Init> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let bad = || config_error(format!("unrecognized initial state {text:?}"));
    match kind {
        "point" => match parse_ints(rest, "point mass")?.as_slice() {
            [x1, x2, c] if (1..=4).contains(c) => Ok(Init::Built(InitialState::PointMass {
                site: (*x1, *x2),
                component: (*c - 1) as usize,
            })),
            _ => Err(bad()),
        },
        "eigvec" => {
            let (index, conj) = rest.split_once(':').unwrap_or((rest, ""));
            let zero = index.parse().map_err(|_| bad())?;
            match conj {
                "" => Ok(Init::Built(InitialState::Eigenvector { zero, conjugate: false })),
                "conj" => Ok(Init::Built(InitialState::Eigenvector { zero, conjugate: true })),
                _ => Err(bad()),
            }
        }
        "gef" => {
            let (edge, conj) = rest.split_once(':').unwrap_or((rest, ""));
            let edge = match edge {
                "plus" => Edge::Plus,
                "minus" => Edge::Minus,
                _ => return Err(bad()),
            };
            let conjugate = match conj {
                "" => false,
                "conj" => true,
                _ => return Err(bad()),
            };
            Ok(Init::Built(InitialState::Generalized { point: ThresholdPoint { edge, conjugate } }))
        }
        "file" if !rest.is_empty() => Ok(Init::File(PathBuf::from(rest))),
        _ => Err(bad()),
    }
}

fn parse_region(text: &str) -> CliResult<Probe> {
    let (cols, reach) = text
        .split_once(':')
        .ok_or_else(|| config_error(format!("region must be X1a,X1b,...:R, got {text:?}")))?;
    let columns = parse_ints(cols, "region columns")?;
    let reach: i64 = reach
        .trim()
        .parse()
        .ok()
        .filter(|r| *r >= 0)
        .ok_or_else(|| config_error(format!("bad region reach in {text:?}")))?;
    let label = format!(
        "R[{};{}]",
        columns.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
        reach
    );
    Ok(Probe::columns(label, &columns, reach))
}

#[derive(Serialize)]
struct EvolveOutput {
    steps: usize,
    half_width: usize,
    probes: Vec<String>,
    second_half_average: Vec<f64>,
    final_probability: Vec<f64>,
    max_total_deviation: f64,
}

fn evolve_cmd(arg: &ParamsArg, spec: EvolveSpec, quad: &QuadArg, output: &OutputArg) -> CliResult<()> {
    if !(spec.edge_mass_tol >= 0.0 && spec.edge_mass_tol.is_finite()) {
        return Err(config_error("edge-mass-tol must be a finite nonnegative number"));
    }
    let params = load_strong(arg)?;
    let quad = quadrature(quad)?;
    let initial = match parse_init(&spec.init)? {
        Init::File(path) => {
            let text = fs::read_to_string(&path).map_err(Error::from)?;
            io::state_from_csv(&text)?
        }
        Init::Built(init) => {
            let n = spec.half_width.map_or(spec.steps + 1, |n| n as usize);
            init.build(&params, WindowSpec::new(n, 0)?, &quad)?
        }
    };
    let mut probes = spec.probes.iter().map(|p| parse_site(p).map(Probe::site)).collect::<CliResult<Vec<_>>>()?;
    for r in &spec.regions {
        probes.push(parse_region(r)?);
    }
    let op = WalkOperator::from_strong_shift(&params);
    let run = evolve(&op, &initial, spec.steps, &probes, EvolveOptions { edge_mass_tol: spec.edge_mass_tol })?;
    if let Some(dir) = &output.out {
        let body = match output.format {
            Format::Csv => io::time_series_to_csv(&run),
            Format::Json => {
                let mut header = vec!["t".to_string()];
                header.extend(run.labels.iter().cloned());
                let rows: Vec<Vec<f64>> = run
                    .series
                    .iter()
                    .enumerate()
                    .map(|(t, r)| std::iter::once(t as f64).chain(r.iter().copied()).collect())
                    .collect();
                let refs: Vec<&str> = header.iter().map(String::as_str).collect();
                io::to_json_string(&io::table_to_json(&refs, &rows))?
            }
        };
        write_file(dir, &format!("series.{}", output.format.ext()), &body)?;
    }
    print_report(&EvolveOutput {
        steps: run.steps,
        half_width: initial.window().half_width(),
        probes: run.labels.clone(),
        second_half_average: run.second_half_average(),
        final_probability: run.series.last().cloned().unwrap_or_default(),
        max_total_deviation: run.max_total_deviation(),
    })
}

fn verify(suite: &str) -> CliResult<()> {
    let ids: Vec<u8> = if suite == "all" {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        suite
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u8>()
                    .ok()
                    .filter(|id| CRITERIA.iter().any(|c| c.0 == *id))
                    .ok_or_else(|| config_error(format!("unknown criterion {s:?}")))
            })
            .collect::<CliResult<_>>()?
    };
    let mut failed = Vec::new();
    for id in ids {
        let result = run_criterion(id).expect("id checked against CRITERIA");
        println!("{}", summary_line(&result));
        if !result.passed {
            failed.push(id.to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: "E_VERIFY", message: format!("criteria {} failed", failed.join(",")), status: 1 })
    }
}
