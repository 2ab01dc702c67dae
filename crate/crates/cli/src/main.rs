use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use artery1d::driver::{convergence_study, l1_error, run};
use artery1d::io::{config_to_toml, load_config, scenario_to_config, write_error_report, write_oracle_csv, write_snapshot_csv};
use artery1d::{presets, Field, FluxKind, FrictionTreatment, Scenario, SchemeOrder, SlopeKind, SourceTreatment};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Finite-volume blood flow in a single elastic vessel.
#[derive(Debug, Parser)]
#[command(name = "artery1d", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write a CSV per snapshot.
    Run(ScenarioArgs),
    /// Grid-refinement study against the scenario's reference solution.
    Study {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Cell counts, e.g. 50,100,200,400,800. Defaults to J, 2J, 4J, 8J.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
        /// Field compared with the reference.
        #[arg(long, default_value = "q")]
        field: Field,
    },
    /// Dump the reference solution at the snapshot times.
    Oracle {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Sample points; defaults to the cell centres.
        #[arg(long)]
        points: Option<usize>,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SlopeArg {
    Muscl,
    Eno,
    Enom,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// TOML scenario file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario (see `artery1d presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Number of cells J.
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    flux: Option<FluxKind>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: Option<u8>,
    #[arg(long, value_enum)]
    slope: Option<SlopeArg>,
    /// none, si (semi-implicit) or at (apparent topography).
    #[arg(long)]
    friction: Option<FrictionTreatment>,
    /// naive or hydrostatic.
    #[arg(long)]
    source: Option<SourceTreatment>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<(Scenario, PathBuf)> {
        let (mut sc, config_out) = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let cfg = load_config(path).with_context(|| format!("loading {}", path.display()))?;
                (cfg.scenario, cfg.output_dir)
            }
            (None, Some(name)) => (presets::preset(name)?, None),
            (None, None) => bail!("give --config <file> or --preset <name>"),
        };
        if let Some(j) = self.cells {
            sc.n_cells = j;
        }
        if let Some(f) = self.flux {
            sc.scheme.flux = f;
        }
        if let Some(f) = self.friction {
            sc.scheme.friction = f;
        }
        if let Some(s) = self.source {
            sc.scheme.source = s;
        }
        if self.cfl.is_some() {
            sc.scheme.cfl = self.cfl;
        }
        let slope = self.slope.map(|s| match s {
            SlopeArg::Muscl => SlopeKind::Muscl,
            SlopeArg::Eno => SlopeKind::eno(),
            SlopeArg::Enom => SlopeKind::eno_mod(),
        });
        sc.scheme.order = match (self.order, slope, sc.scheme.order) {
            (Some(1), Some(_), _) => bail!("--slope needs --order 2"),
            (Some(1), None, _) => SchemeOrder::First,
            (_, Some(k), _) => SchemeOrder::Second(k),
            (Some(_), None, SchemeOrder::Second(k)) => SchemeOrder::Second(k),
            (Some(_), None, SchemeOrder::First) => SchemeOrder::Second(SlopeKind::Muscl),
            (None, None, current) => current,
        };
        sc.validate()?;
        let out = self
            .out
            .clone()
            .or(config_out)
            .unwrap_or_else(|| PathBuf::from("out").join(&sc.name));
        Ok((sc, out))
    }
}

fn write_resolved_config(sc: &Scenario, out: &Path) -> Result<()> {
    // tables loaded from memory cannot be written back; skip quietly
    if let Ok(cfg) = scenario_to_config(sc, None) {
        let path = out.join("scenario.toml");
        fs::write(&path, config_to_toml(&cfg)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_run(args: &ScenarioArgs) -> Result<()> {
    let (sc, out) = args.load()?;
    let result = run(&sc)?;
    let files = write_snapshot_csv(&result, &out)?;
    write_resolved_config(&sc, &out)?;
    println!("{}: J = {}, {}, flux {}, {} steps", sc.name, sc.n_cells, sc.scheme.order, sc.scheme.flux, result.steps.len());
    println!("max |u| = {:.6e} m/s, relative volume drift = {:.3e}", result.max_velocity, result.volume_drift());
    if result.supercritical_boundary_steps > 0 {
        println!("warning: {} steps with a non-subcritical boundary state", result.supercritical_boundary_steps);
    }
    if let Some(oracle) = sc.oracle()? {
        for field in [Field::Area, Field::Discharge, Field::Radius] {
            let e = l1_error(&result, &oracle, field, sc.t_end)?;
            println!("L1({}) at t = {} s: {e:.6e} ({})", field.name(), sc.t_end, oracle.comparison().label());
        }
    }
    println!("wrote {} snapshot files to {}", files.len(), out.display());
    Ok(())
}

fn cmd_study(args: &ScenarioArgs, levels: &[usize], field: Field) -> Result<()> {
    let (sc, out) = args.load()?;
    let levels = if levels.is_empty() {
        (0..4).map(|k| sc.n_cells << k).collect()
    } else {
        levels.to_vec()
    };
    let study = convergence_study(&sc, &levels, field)?;
    println!("{}: L1({}) at t = {} s ({})", sc.name, field.name(), sc.t_end, study.comparison.label());
    println!("{:>8}  {:>14}", "J", "L1 error");
    for (j, e) in &study.rows {
        println!("{j:>8}  {e:>14.6e}");
    }
    println!("Regression y={:.3}x{:+.2}", study.slope, study.intercept);
    let path = out.join("errors.csv");
    write_error_report(&study, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_oracle(args: &ScenarioArgs, points: Option<usize>) -> Result<()> {
    let (sc, out) = args.load()?;
    let Some(oracle) = sc.oracle()? else {
        bail!("scenario `{}` has no reference solution", sc.name);
    };
    let grid = sc.grid()?;
    let xs: Vec<f64> = match points {
        Some(0) => bail!("--points must be positive"),
        Some(1) => vec![grid.x_left + 0.5 * grid.length()],
        Some(n) => (0..n).map(|i| grid.x_left + grid.length() * i as f64 / (n - 1) as f64).collect(),
        None => grid.centers().collect(),
    };
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("oracle.csv");
    write_oracle_csv(&oracle, &sc.model()?, &xs, &sc.snapshot_times(), &path)?;
    println!("wrote {} ({} reference)", path.display(), oracle.name());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Study { scenario, levels, field } => cmd_study(&scenario, &levels, field),
        Command::Oracle { scenario, points } => cmd_oracle(&scenario, points),
        Command::Presets => {
            for name in presets::NAMES {
                let sc = presets::preset(name)?;
                println!("{name:<16} J = {:<5} L = {} m, t_end = {} s, {}", sc.n_cells, sc.length, sc.t_end, sc.scheme.order);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
