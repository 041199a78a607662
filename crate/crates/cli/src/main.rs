use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use tesslab_cli::cellsfile::write_atomic;
use tesslab_cli::commands;
use tesslab_cli::config::{parse_window, ModelChoice, RunConfig};
use tesslab_core::{DirectionLaw, RectWindow};

#[derive(Parser)]
#[command(
    name = "tesslab",
    version,
    about = "Poisson line and STIT tessellation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// plt, stit or both
    #[arg(long, default_value = "both")]
    model: ModelChoice,
    /// Edge length density L_A (γ for PLT, t for STIT)
    #[arg(long, default_value_t = 1.0)]
    la: f64,
    /// isotropic or atoms:phi1:w1,phi2:w2,...
    #[arg(long, default_value = "isotropic")]
    law: DirectionLaw,
    /// lo hi (a square) or x0 y0 x1 y1
    #[arg(long, num_args = 2..=4, allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; defaults to all cores
    #[arg(long, env = "TESSLAB_THREADS")]
    threads: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn config(
        self,
        window: [f64; 2],
        reps: usize,
        sub_window: Option<RectWindow>,
    ) -> Result<RunConfig> {
        let window = match &self.window {
            Some(v) => parse_window(v)?,
            None => RectWindow::square(window[0], window[1])?,
        };
        let cfg = RunConfig {
            model: self.model,
            la: self.la,
            law: self.law,
            window,
            sub_window,
            reps: self.reps.unwrap_or(reps),
            seed: self.seed,
            threads: self.threads,
            out: self.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate realizations and write one cells file each
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Neighbourhood table with minus sampling (table2.csv, identities.csv)
    NeighborStats {
        #[command(flatten)]
        common: Common,
        /// Cells files to analyse instead of simulating
        #[arg(long, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// K, pair- and mark-correlation curves of the cell centres
    SecondOrder {
        #[command(flatten)]
        common: Common,
        /// Centres are taken from this sub-window
        #[arg(long, num_args = 2..=4, allow_negative_numbers = true)]
        sub_window: Option<Vec<f64>>,
        /// `csr` replaces the tessellations by Poisson patterns
        #[arg(long, value_parser = ["csr"])]
        selftest: Option<String>,
        #[arg(long, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// Closed-form neighbourhood sums of the isotropic Poisson line tessellation
    Table1 {
        #[arg(long, default_value_t = 1.0)]
        la: f64,
        /// Also write table1.csv here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fast invariant suite
    Selfcheck {
        /// Override the vertex merging tolerance
        #[arg(long)]
        eps_point: Option<f64>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { common } => {
            let cfg = common.config([-100.0, 100.0], 1, None)?;
            for p in commands::cmd_simulate(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::NeighborStats { common, input } => {
            let cfg = common.config([-100.0, 100.0], 42, None)?;
            commands::cmd_neighbor_stats(&cfg, &input)?;
        }
        Command::SecondOrder {
            common,
            sub_window,
            selftest,
            input,
        } => {
            // the CSR self-test has no centres and so no sub-window
            let sub = match (&sub_window, &selftest) {
                (Some(v), _) => Some(parse_window(v)?),
                (None, Some(_)) => None,
                (None, None) => Some(RectWindow::square(-30.0, 30.0)?),
            };
            let cfg = common.config([-50.0, 50.0], 100, sub)?;
            for p in commands::cmd_second_order(&cfg, selftest.is_some(), &input)? {
                println!("{}", p.display());
            }
        }
        Command::Table1 { la, out } => {
            print!("{}", commands::table1_text(la)?);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                write_atomic(
                    &dir.join("table1.csv"),
                    commands::table1_csv(la)?.as_bytes(),
                )?;
            }
        }
        Command::Selfcheck { eps_point } => commands::cmd_selfcheck(eps_point)?,
    }
    Ok(())
}
