//! `symctl`: checks approximate simulation relations, composes and lifts
//! finite systems, and synthesizes and simulates output-feedback
//! controllers.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use symctl_core::checker::Kind;
use symctl_core::{AcParams, Dec};

use symctl::commands::*;
use symctl::error;
use symctl::formats::{parse_dec, parse_params, MetricArg};

#[derive(Parser)]
#[command(name = "symctl", version, about = "Approximate simulation checks and controller synthesis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Case,
}

#[derive(Clone, Copy, ValueEnum)]
enum PartArg {
    Plant,
    Cabs,
    Oabs,
    Spec,
    Relations,
}

#[derive(clap::Args)]
struct Check {
    /// Check the built-in example instead of files.
    #[arg(long, value_enum, conflicts_with_all = ["left", "right", "relation"])]
    builtin: Option<Builtin>,
    #[arg(long)]
    left: Option<PathBuf>,
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(long)]
    relation: Option<PathBuf>,
    #[arg(long, value_parser = parse_dec)]
    kappa: Option<Dec>,
    #[arg(long, value_parser = parse_dec)]
    beta: Option<Dec>,
    #[arg(long, value_parser = parse_dec)]
    lambda: Option<Dec>,
    /// `zero` or a metric file.
    #[arg(long)]
    metric: Option<MetricArg>,
}

impl Check {
    fn args(self) -> CheckArgs {
        CheckArgs {
            builtin: self.builtin.is_some(),
            left: self.left,
            right: self.right,
            relation: self.relation,
            kappa: self.kappa,
            beta: self.beta,
            lambda: self.lambda,
            metric: self.metric,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check an approximate simulation relation.
    CheckSr(Check),
    /// Check an approximate alternating simulation relation.
    CheckAsr(Check),
    /// Build the relation-restricted product of two systems.
    Compose {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        relation: PathBuf,
        /// `kappa,beta,lambda`.
        #[arg(long, value_parser = parse_params)]
        params: AcParams,
        #[arg(long, default_value = "zero")]
        metric: MetricArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the output observer of a plant.
    Observer {
        /// `builtin:case` or a plant file.
        #[arg(long)]
        plant: String,
        #[arg(long)]
        oabs: Option<PathBuf>,
        #[arg(long)]
        relation: Option<PathBuf>,
        #[arg(long, value_parser = parse_params)]
        params: Option<AcParams>,
        #[arg(long)]
        metric: Option<MetricArg>,
        /// Extra refinement of the bound levels.
        #[arg(long, default_value_t = 0)]
        depth: usize,
        #[arg(long, default_value_t = MAX_STATES)]
        max_states: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift a system to sets of states.
    Lift {
        #[arg(long)]
        system: PathBuf,
        /// Keep only the largest successor set per input.
        #[arg(long)]
        maximal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the side conditions and synthesize a controller bundle.
    Synth {
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        cabs: Option<PathBuf>,
        #[arg(long)]
        oabs: Option<PathBuf>,
        #[arg(long)]
        plant: Option<PathBuf>,
        /// Control abstraction to plant.
        #[arg(long)]
        rel_c: Option<PathBuf>,
        /// Specification to control abstraction, exact.
        #[arg(long)]
        rel_chat: Option<PathBuf>,
        /// Plant to observation abstraction.
        #[arg(long)]
        rel_o: Option<PathBuf>,
        #[arg(long, value_parser = parse_params)]
        params_c: Option<AcParams>,
        #[arg(long, value_parser = parse_params)]
        params_o: Option<AcParams>,
        #[arg(long)]
        metric_c: Option<MetricArg>,
        #[arg(long)]
        metric_o: Option<MetricArg>,
        /// Composite input metric; derived when absent.
        #[arg(long)]
        dbar: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        depth: usize,
        #[arg(long, default_value_t = MAX_STATES)]
        max_states: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a controller bundle in closed loop and write a CSV trace.
    Simulate {
        #[arg(long)]
        controller: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, conflicts_with = "dropouts")]
        seed: Option<u64>,
        /// Dropout schedule, one `<input lost> <measurement lost>` pair per line.
        #[arg(long)]
        dropouts: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a part of the built-in example in the file formats.
    Export {
        #[arg(long, value_enum)]
        builtin: Builtin,
        #[arg(long, value_enum)]
        part: PartArg,
        /// Plant exploration depth.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the built-in example end to end and report.
    Repro {
        #[arg(long, default_value = "repro-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        depth: usize,
        #[arg(long, default_value_t = MAX_STATES)]
        max_states: usize,
    },
}

fn dispatch(cmd: Cmd) -> error::Result<bool> {
    match cmd {
        Cmd::CheckSr(c) => check(Kind::Simulation, &c.args()),
        Cmd::CheckAsr(c) => check(Kind::Alternating, &c.args()),
        Cmd::Compose {
            left,
            right,
            relation,
            params,
            metric,
            out,
        } => compose_cmd(&ComposeArgs {
            left,
            right,
            relation,
            params,
            metric,
            out,
        }),
        Cmd::Observer {
            plant,
            oabs,
            relation,
            params,
            metric,
            depth,
            max_states,
            out,
        } => observer_cmd(&ObserverArgs {
            plant,
            oabs,
            relation,
            params,
            metric,
            depth,
            max_states,
            out,
        }),
        Cmd::Lift { system, maximal, out } => lift_cmd(&system, maximal, out.as_deref()),
        Cmd::Synth {
            builtin,
            spec,
            cabs,
            oabs,
            plant,
            rel_c,
            rel_chat,
            rel_o,
            params_c,
            params_o,
            metric_c,
            metric_o,
            dbar,
            depth,
            max_states,
            out,
        } => synth_cmd(&SynthArgs {
            builtin: builtin.is_some(),
            spec,
            cabs,
            oabs,
            plant,
            rel_c,
            rel_chat,
            rel_o,
            params_c,
            params_o,
            metric_c,
            metric_o,
            dbar,
            depth,
            max_states,
            out,
        }),
        Cmd::Simulate {
            controller,
            steps,
            seed,
            dropouts,
            out,
        } => simulate_cmd(&SimulateArgs {
            controller,
            steps,
            seed,
            dropouts,
            out,
        }),
        Cmd::Export {
            builtin: Builtin::Case,
            part,
            depth,
            out,
        } => {
            let part = match part {
                PartArg::Plant => Part::Plant,
                PartArg::Cabs => Part::Cabs,
                PartArg::Oabs => Part::Oabs,
                PartArg::Spec => Part::Spec,
                PartArg::Relations => Part::Relations,
            };
            export_cmd(part, depth, out.as_deref())
        }
        Cmd::Repro {
            out,
            seed,
            steps,
            depth,
            max_states,
        } => repro_cmd(&ReproArgs {
            out,
            seed,
            steps,
            depth,
            max_states,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
