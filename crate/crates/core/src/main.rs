use clap::{Parser, Subcommand};
use femtet::config::RunConfig;
use femtet::driver;
use femtet::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "femtet",
    version,
    about = "P1..P4 tetrahedral FEM solver for diffusion-advection-reaction problems on GMSH meshes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured problem and write the requested outputs.
    Solve {
        config: PathBuf,
        /// Log solver iterations and pipeline stages to stderr.
        #[arg(long)]
        verbose: bool,
        /// Dump the combined system matrix in 1-based coordinate format.
        #[arg(long)]
        dump_matrices: Option<PathBuf>,
    },
    /// Report mesh counts, volume, groups and element quality.
    Inspect {
        mesh: PathBuf,
        #[arg(long)]
        degree: usize,
    },
    /// Solve, then sample the solution at points from a CSV file.
    Probe {
        config: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Solve on a ladder of meshes and print the error/rate table.
    Convergence {
        config: PathBuf,
        #[arg(long, num_args = 1..)]
        meshes: Vec<PathBuf>,
    },
}

fn run(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Solve {
            config,
            verbose,
            dump_matrices,
        } => {
            let cfg = RunConfig::load(&config)?;
            let report = driver::run_solve(&cfg, verbose, dump_matrices.as_deref())?;
            println!(
                "solved: {} nodes, {} tets, {} iterations, residual {:.3e}",
                report.mesh_nodes,
                report.mesh_tets,
                report.final_solution.iterations,
                report.final_solution.residual
            );
            if !report.snapshots.is_empty() {
                println!("snapshots: {}", report.snapshots.len());
            }
            for path in &report.vtk_files {
                println!("wrote {}", path.display());
            }
            if let Some((l2, h1)) = report.errors {
                println!("L2 error {l2:e}");
                println!("H1 seminorm error {h1:e}");
            }
            if let Some(csv) = &report.probe_csv {
                print!("{csv}");
            }
            Ok(())
        }
        Cmd::Inspect { mesh, degree } => {
            let report = driver::run_inspect(&mesh, degree)?;
            print!("{report}");
            Ok(())
        }
        Cmd::Probe { config, points } => {
            let cfg = RunConfig::load(&config)?;
            let csv = driver::run_probe(&cfg, &points)?;
            print!("{csv}");
            Ok(())
        }
        Cmd::Convergence { config, meshes } => {
            if meshes.is_empty() {
                return Err(Error::Config(
                    "convergence requires at least one mesh".into(),
                ));
            }
            let cfg = RunConfig::load(&config)?;
            let csv = driver::run_convergence(&cfg, &meshes)?;
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("FEMTET_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
