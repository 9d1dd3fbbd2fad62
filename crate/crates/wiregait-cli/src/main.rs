//! Command-line front end wiring the configuration file to the library and
//! emitting CSV/JSON/SVG artifacts.
//!
//! Exit codes are a total function of the failure class: 0 success,
//! 1 config/parse error, 2 no feasible design, 3 gait-plan invariant
//! violation, 4 chain joint-limit violation.

// `!(a > b)` is used so NaN flags fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wiregait::chain::{
    crossover_bend, efficiency_comparison, transmission_efficiency, ChainConfiguration,
    EfficiencyModel,
};
use wiregait::config::{parse_chain_configurations, ProjectConfig};
use wiregait::error::Error;
use wiregait::export;
use wiregait::gait::build_gait_plan;
use wiregait::optimize::{optimize, DesignProblem};
use wiregait::pipeline::emit_commands;

#[derive(Parser)]
#[command(
    name = "wiregait",
    version,
    about = "Remote wire-driven quadruped toolbox"
)]
struct Cli {
    /// Project configuration file (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized stage; fixed seed, identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also emit SVG plots.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Search for coupling design parameters and write a solution report.
    Optimize,
    /// Build the trot plan and write its tables (and motor commands).
    PlanGait {
        /// Run the command pipeline on the plan's wire series.
        #[arg(long)]
        emit_commands: bool,
    },
    /// Evaluate chain path length, tip pose and efficiency per configuration.
    SimulateChain {
        /// JSON file with an array of per-joint half-angle arrays.
        #[arg(long)]
        configurations: PathBuf,
    },
    /// Sweep the efficiency bands over a bend range.
    EfficiencyCompare {
        #[arg(long, default_value_t = 0.0)]
        bend_min: f64,
        #[arg(long, default_value_t = 4.0 * std::f64::consts::PI)]
        bend_max: f64,
        #[arg(long, default_value_t = 80)]
        samples: usize,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } => 1,
        Error::NoFeasiblePoint { .. } => 2,
        Error::UnreachableTarget { .. }
        | Error::UnreachableTrajectory { .. }
        | Error::PlanInvariant { .. }
        | Error::SingularJacobian { .. }
        | Error::EmptySeries
        | Error::NonMonotoneTime { .. } => 3,
        Error::ChainJointLimit { .. } => 4,
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ProjectConfig, Error> {
    match path {
        None => Ok(ProjectConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            ProjectConfig::from_toml_str(&text)
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Error::Config(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(&cli.config)?;
    match &cli.command {
        Command::Optimize => {
            let geom = cfg.leg_geometry()?;
            let params = cfg.gait_parameters();
            let mut problem = DesignProblem::from_gait(&geom, &params, cfg.elbow_branch())?;
            problem.norm_lower = cfg.optimization.norm_lower;
            problem.entry_upper = cfg.optimization.entry_upper;
            problem.tolerance = cfg.optimization.tolerance;
            let solution = optimize(&problem, &cfg.optimize_options(cli.seed))?;
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("solution.json"));
            write(
                &out,
                &export::solution_report_json(&problem, &solution, cli.seed),
            )?;
            println!(
                "feasible solution: objective {:.6} mm^2 over {} starts -> {}",
                solution.objective,
                solution.starts_used,
                out.display()
            );
            Ok(())
        }
        Command::PlanGait {
            emit_commands: with_commands,
        } => {
            let geom = cfg.leg_geometry()?;
            let params = cfg.gait_parameters();
            let limits = cfg.plan_limits()?;
            let (front, back) = if cfg.tendon.optimize {
                let problem = DesignProblem::from_gait(&geom, &params, cfg.elbow_branch())?;
                let solution = optimize(&problem, &cfg.optimize_options(cli.seed))?;
                (solution.front, solution.back)
            } else {
                cfg.tendon_pair()?
            };
            let plan = build_gait_plan(&geom, &params, &front, &back, cfg.elbow_branch(), &limits)?;

            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            match cli.format {
                Format::Csv => write(&dir.join("plan.csv"), &export::plan_csv(&plan))?,
                Format::Json => write(&dir.join("plan.json"), &export::plan_json(&plan))?,
            }
            if cli.plot {
                write(&dir.join("traces.svg"), &export::foot_traces_svg(&plan))?;
            }
            if *with_commands {
                let pipeline_cfg = cfg.pipeline_config()?;
                // close the cycle so the command file loops cleanly
                let mut rows = plan.wire_rows();
                rows.push(rows[0]);
                let series = emit_commands(&rows, &pipeline_cfg)?;
                series.verify(&pipeline_cfg)?;
                write(&dir.join("commands.csv"), &export::commands_csv(&series))?;
                println!(
                    "commands: {} samples over {:.3} s at {} Hz",
                    series.samples.len(),
                    series.duration,
                    series.control_rate
                );
            }
            println!(
                "plan: {} samples, wire seam gap {:.3} mm, joint seam gap {:.4} rad -> {}",
                plan.samples(),
                plan.closure.wire_seam,
                plan.closure.joint_seam,
                dir.display()
            );
            Ok(())
        }
        Command::SimulateChain { configurations } => {
            let spec = cfg.chain_spec()?;
            let bands = cfg.efficiency_bands()?;
            let text = fs::read_to_string(configurations)
                .map_err(|e| Error::Config(format!("{}: {e}", configurations.display())))?;
            let configs = parse_chain_configurations(&text)?;
            let chain_eff = [
                transmission_efficiency(
                    &EfficiencyModel::DecoupledChain {
                        per_pulley_efficiency: bands.per_pulley_range[0],
                        pulley_count: spec.pulley_count(),
                    },
                    0.0,
                ),
                transmission_efficiency(
                    &EfficiencyModel::DecoupledChain {
                        per_pulley_efficiency: bands.per_pulley_range[1],
                        pulley_count: spec.pulley_count(),
                    },
                    0.0,
                ),
            ];
            let mut rows = Vec::with_capacity(configs.len());
            let mut first_error: Option<Error> = None;
            for (index, config) in configs.iter().enumerate() {
                match evaluate_chain_row(&spec, config, &bands.mu_range, chain_eff, index) {
                    Ok(row) => rows.push(row),
                    Err(e) => {
                        rows.push(export::ChainRow {
                            index,
                            status: format!("error: {e}"),
                            path_length: None,
                            cumulative_bend: None,
                            tip: None,
                            chain_efficiency: chain_eff,
                            tsm_efficiency: None,
                        });
                        first_error.get_or_insert(e);
                    }
                }
            }
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("chain.csv"));
            write(&out, &export::chain_csv(&rows))?;
            println!("{} configurations -> {}", rows.len(), out.display());
            match first_error {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::EfficiencyCompare {
            bend_min,
            bend_max,
            samples,
        } => {
            if !(bend_max > bend_min) || *samples < 2 {
                return Err(Error::Config(
                    "need bend_max > bend_min and at least 2 samples".into(),
                ));
            }
            let bands = cfg.efficiency_bands()?;
            let bends: Vec<f64> = (0..*samples)
                .map(|i| bend_min + (bend_max - bend_min) * i as f64 / (*samples - 1) as f64)
                .collect();
            let rows = efficiency_comparison(&bends, &bands);
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("efficiency.csv"));
            write(&out, &export::efficiency_csv(&rows))?;
            if cli.plot {
                write(&out.with_extension("svg"), &export::efficiency_svg(&rows))?;
            }
            println!(
                "chain band [{:.4}, {:.4}] constant; sheath falls below it past {:.3} rad -> {}",
                rows[0].chain_min,
                rows[0].chain_max,
                crossover_bend(&bands),
                out.display()
            );
            Ok(())
        }
    }
}

fn evaluate_chain_row(
    spec: &wiregait::chain::ChainSpec,
    config: &ChainConfiguration,
    mu_range: &[f64; 2],
    chain_eff: [f64; 2],
    index: usize,
) -> Result<export::ChainRow, Error> {
    let length = wiregait::chain::wire_path_length(spec, config)?;
    let poses = wiregait::chain::chain_forward_kinematics(spec, config)?;
    let bend = config.cumulative_bend();
    let tsm = [
        transmission_efficiency(&EfficiencyModel::Tsm { mu: mu_range[1] }, bend),
        transmission_efficiency(&EfficiencyModel::Tsm { mu: mu_range[0] }, bend),
    ];
    Ok(export::ChainRow {
        index,
        status: "ok".into(),
        path_length: Some(length),
        cumulative_bend: Some(bend),
        tip: Some(export::tip_pose_row(poses.last().unwrap())),
        chain_efficiency: chain_eff,
        tsm_efficiency: Some(tsm),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
