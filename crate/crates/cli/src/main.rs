use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mhd_invariants_cli::{convergence, run, verify};

#[derive(Parser)]
#[command(name = "mhd-invariants", version, about = "Ideal MHD runs with conservation-law residual reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its reports
    Run {
        #[arg(long)]
        config: PathBuf,
        /// overrides output.dir
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario at successive resolutions and report observed orders
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite and print a pass/fail table
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("MHD_INVARIANTS_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("MHD_INVARIANTS_THREADS must be a positive integer (got `{v}`)"))?;
        if n == 0 {
            anyhow::bail!("MHD_INVARIANTS_THREADS must be a positive integer (got 0)");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Run { config, out } => {
            let rec = run::run(&config, out)?;
            for sr in &rec.reports {
                let r = &sr.report;
                println!(
                    "t={:<8.4} {:<10} {:<18} L2={:.3e} Linf={:.3e}",
                    r.t,
                    r.name,
                    [&r.variant, &r.side].into_iter().flatten().cloned().collect::<Vec<_>>().join("/"),
                    r.norms.l2,
                    r.norms.linf
                );
            }
            for (name, n) in &rec.exact_errors {
                println!("exact-solution error {name}: L2={:.3e} Linf={:.3e}", n.l2, n.linf);
            }
            eprintln!("wall time {:.2} s", rec.provenance.wall_time);
            Ok(true)
        }
        Command::Convergence { config, levels, out } => {
            let table = convergence::convergence(&config, levels, out.as_deref())?;
            print!("{}", table.render());
            Ok(table.passed())
        }
        Command::Verify { config, out } => {
            let summary = verify::verify(config.as_deref(), out.as_deref())?;
            print!("{}", summary.render());
            Ok(summary.passed())
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
