//! `levy-besov`: sample Lévy white noise, analyse its wavelet coefficients
//! and run the Besov-regularity experiments.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 format or I/O error,
//! 4 numerical non-convergence.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levy_besov::idlaw::IndexConvention;
use levy_besov::phase::RegionKind;
use levy_besov::sampler::GridSpec;
use levy_besov::Error;

use config::*;

#[derive(Debug)]
pub struct CliError {
    pub(crate) code: u8,
    message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Format(_) | Error::Io(_) => 3,
            Error::NonConvergence { .. } | Error::Divergent(_) => 4,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "levy-besov", version, about = "Besov regularity of Lévy white noise")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "LEVY_BESOV_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML configuration; flags override its keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a noise field on a dyadic grid and write it as LWNF.
    Sample {
        #[command(flatten)]
        config: ConfigArg,
        /// Family name or inline TOML table.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long = "J")]
        j: Option<u32>,
        #[arg(long = "L")]
        l: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write the compound-Poisson point cloud as CSV.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        jump_threshold: Option<f64>,
    },
    /// Wavelet-analyse a field and report its Besov norm.
    Analyze {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long)]
        basis: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Per-level CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write the coefficient pyramid.
        #[arg(long)]
        pyramid: Option<PathBuf>,
    },
    /// Estimate the Blumenthal–Getoor indices of a model.
    Indices {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        decades: Option<usize>,
        #[arg(long)]
        samples_per_decade: Option<usize>,
        #[arg(long)]
        p_resolution: Option<f64>,
        #[arg(long, value_parser = parse_convention)]
        convention: Option<IndexConvention>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fractional moments of a pairing with a test function.
    Moments {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_parser = parse_method)]
        method: Option<MomentMethodChoice>,
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Predicted and empirical phase diagram.
    Phase {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated, `inf` allowed.
        #[arg(long)]
        p_grid: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        tau_grid: Option<String>,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<RegionKind>,
        /// Known `beta0,beta_inf`.
        #[arg(long)]
        indices: Option<String>,
        #[arg(long)]
        ensemble: Option<usize>,
        #[arg(long = "J")]
        j: Option<u32>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long = "L")]
        l: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Boundary polyline for plotting.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run quick numerical self-checks.
    Selftest,
}

fn parse_convention(s: &str) -> Result<IndexConvention, String> {
    match s {
        "symmetric-part" => Ok(IndexConvention::SymmetricPart),
        "modulus" => Ok(IndexConvention::Modulus),
        _ => Err("expected symmetric-part or modulus".into()),
    }
}

fn parse_method(s: &str) -> Result<MomentMethodChoice, String> {
    match s {
        "cf" => Ok(MomentMethodChoice::Cf),
        "mc" => Ok(MomentMethodChoice::Mc),
        "both" => Ok(MomentMethodChoice::Both),
        _ => Err("expected cf, mc or both".into()),
    }
}

fn parse_kind(s: &str) -> Result<RegionKind, String> {
    match s {
        "weighted" => Ok(RegionKind::Weighted),
        "local" => Ok(RegionKind::Local),
        "sobolev" => Ok(RegionKind::Sobolev),
        "holder" => Ok(RegionKind::Holder),
        _ => Err("expected weighted, local, sobolev or holder".into()),
    }
}

fn parse_ext(s: Option<String>) -> Result<Option<f64>, CliError> {
    s.map(|v| parse_list(&v).and_then(|l| l.first().copied().ok_or_else(|| CliError::config("empty number"))))
        .transpose()
}

fn model_flag(s: Option<String>) -> Result<Option<levy_besov::idlaw::LevyModel>, CliError> {
    s.as_deref().map(parse_model).transpose()
}

/// Merge `d`, `J`, `L` flags into an optional grid.
fn grid_flags(grid: &mut Option<GridSpec>, d: Option<usize>, j: Option<u32>, l: Option<f64>) -> Result<(), CliError> {
    if d.is_none() && j.is_none() && l.is_none() {
        return Ok(());
    }
    let base = grid.unwrap_or(GridSpec::new(1, 8, 0.5)?);
    *grid = Some(GridSpec::new(
        d.unwrap_or(base.d),
        j.unwrap_or(base.j),
        l.unwrap_or(base.half_width),
    )?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Sample { config, model, d, j, l, seed, output, points, jump_threshold } => {
            let mut cfg: SampleConfig = load(config.config.as_deref())?;
            merge(&mut cfg.model, model_flag(model)?);
            grid_flags(&mut cfg.grid, d, j, l)?;
            merge(&mut cfg.seed, seed);
            merge(&mut cfg.output, output);
            merge(&mut cfg.points, points);
            merge(&mut cfg.jump_threshold, jump_threshold);
            commands::sample(cfg)?;
        }
        Command::Analyze { config, input, basis, levels, p, q, tau, mu, output, csv, pyramid } => {
            let mut cfg: AnalyzeConfig = load(config.config.as_deref())?;
            merge(&mut cfg.input, input);
            merge(&mut cfg.basis, basis);
            merge(&mut cfg.levels, levels);
            merge(&mut cfg.p, parse_ext(p)?);
            merge(&mut cfg.q, parse_ext(q)?);
            merge(&mut cfg.tau, tau);
            merge(&mut cfg.mu, mu);
            merge(&mut cfg.output, output);
            merge(&mut cfg.csv, csv);
            merge(&mut cfg.pyramid, pyramid);
            commands::analyze_cmd(cfg)?;
        }
        Command::Indices { config, model, decades, samples_per_decade, p_resolution, convention, output } => {
            let mut cfg: IndicesConfig = load(config.config.as_deref())?;
            merge(&mut cfg.model, model_flag(model)?);
            merge(&mut cfg.decades, decades);
            merge(&mut cfg.samples_per_decade, samples_per_decade);
            merge(&mut cfg.p_resolution, p_resolution);
            merge(&mut cfg.convention, convention);
            merge(&mut cfg.output, output);
            commands::indices(cfg)?;
        }
        Command::Moments { config, model, p, method, draws, seed, output } => {
            let mut cfg: MomentsConfig = load(config.config.as_deref())?;
            merge(&mut cfg.model, model_flag(model)?);
            merge(&mut cfg.p, p);
            merge(&mut cfg.method, method);
            merge(&mut cfg.draws, draws);
            merge(&mut cfg.seed, seed);
            merge(&mut cfg.output, output);
            commands::moments(cfg)?;
        }
        Command::Phase {
            config, model, d, p_grid, tau_grid, kind, indices, ensemble, j, levels, l, seed, output, csv, plot,
        } => {
            let mut cfg: PhaseConfig = load(config.config.as_deref())?;
            merge(&mut cfg.model, model_flag(model)?);
            merge(&mut cfg.d, d);
            merge(&mut cfg.p_grid, p_grid.as_deref().map(parse_list).transpose()?);
            merge(&mut cfg.tau_grid, tau_grid.as_deref().map(parse_list).transpose()?);
            merge(&mut cfg.kind, kind);
            if let Some(s) = indices {
                match parse_list(&s)?.as_slice() {
                    [a, b] => cfg.indices = Some([*a, *b]),
                    _ => return Err(CliError::config("indices must be `beta0,beta_inf`")),
                }
            }
            let mut settings = cfg.settings.clone().unwrap_or_default();
            settings.ensemble = ensemble.unwrap_or(settings.ensemble);
            settings.resolution = j.unwrap_or(settings.resolution);
            settings.levels = levels.unwrap_or(settings.levels);
            settings.half_width = l.unwrap_or(settings.half_width);
            settings.seed = seed.unwrap_or(settings.seed);
            cfg.settings = Some(settings);
            merge(&mut cfg.output, output);
            merge(&mut cfg.csv, csv);
            merge(&mut cfg.plot, plot);
            commands::phase(cfg)?;
        }
        Command::Selftest => return commands::selftest(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_exit_codes() {
        let code = |e: Error| CliError::from(e).code;
        assert_eq!(code(Error::Format("bad magic".into())), 3);
        assert_eq!(code(Error::Divergent("mu p <= d".into())), 4);
        assert_eq!(
            code(Error::NonConvergence { context: "fit".into(), partial: 0.0, error: 1.0 }),
            4
        );
        assert_eq!(code(Error::NotTempered), 2);
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
