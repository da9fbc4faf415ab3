use clap::{Parser, Subcommand};
use fissure_core::assembly::{apply_bc, assemble_eps, DiscreteSystem};
use fissure_core::config::SweepConfig;
use fissure_core::geometry::{validate_medium, MediumSpec};
use fissure_core::mesh::build_mesh;
use fissure_core::residuals::{conservation_residual, interface_residuals};
use fissure_core::solution::SolutionField;
use fissure_core::solver::{relative_residual, solve_saddle};
use fissure_core::sweep::{check_data_on_mesh, config_mesh, emit_report, format_summary, read_report, run_sweep, solve_limit};
use fissure_core::mesh::MixedMesh;
use fissure_core::data::ProblemData;
use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Darcy flow in fissured media: ε-problems, the thin-fissure limit and ε-sweeps.
#[derive(Parser)]
#[command(name = "fissure", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a geometry file.
    Validate { geometry: PathBuf },
    /// Mesh a geometry and print statistics.
    Mesh {
        geometry: PathBuf,
        #[arg(long)]
        h: f64,
        /// Write the mesh in text form.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the scaled problem for one ε on the configured mesh.
    SolveEps {
        config: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Solve the collapsed problem on the configured mesh.
    SolveLimit { config: PathBuf },
    /// Run the ε-sweep and write the report into the configured output directory.
    Sweep { config: PathBuf },
    /// Summarize a report directory.
    Report { dir: PathBuf },
}

type Result<T> = std::result::Result<T, Box<dyn Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Validate { geometry } => {
            let m = validate_medium(&MediumSpec::from_file(&geometry)?)?;
            println!("ok: {} fissure(s), {} block(s), base ({}, {})", m.n_fissures(), m.n_blocks(), m.x_lo(), m.x_hi());
            for j in 0..m.n_blocks() {
                println!("  block {j}: area {:.6}", m.block_area(j));
            }
            for i in 1..=m.n_fissures() {
                let f = m.fissure(i);
                println!(
                    "  fissure {i}: height {}, strip area {:.6}, max |slope| {:.4}",
                    f.height,
                    m.strip_area(i),
                    f.curve.max_abs_slope()
                );
            }
        }
        Command::Mesh { geometry, h, out } => {
            let m = validate_medium(&MediumSpec::from_file(&geometry)?)?;
            let mesh = build_mesh(&m, h)?;
            println!(
                "vertices {}, cells {}, facets {}, min angle {:.2} deg",
                mesh.vertices.len(),
                mesh.cells.len(),
                mesh.facets.len(),
                mesh.min_angle_deg()
            );
            if let Some(path) = out {
                std::fs::write(&path, mesh.to_text()).map_err(|e| format!("{}: {e}", path.display()))?;
                println!("wrote {}", path.display());
            }
        }
        Command::SolveEps { config, eps } => {
            let (cfg, mesh, data) = load(&config)?;
            let system = assemble_eps(&mesh, &data, eps)?;
            let (system, bc) = apply_bc(system, &mesh, &data)?;
            let sol = solve_saddle(&system, cfg.tol)?;
            println!(
                "eps {eps}: {} unknowns, {} drained facets, lateral walls free: {}",
                system.n_total(),
                bc.drained_facets,
                bc.lateral_walls_free
            );
            print_solution(&mesh, &data, &system, &sol)?;
            let (t, n) = sol.strip_tangential_normal_l2(&mesh);
            println!("  strip tangential {t:.6e}, normal {n:.6e}, eta {:.6e}", sol.eta_l2(&mesh));
        }
        Command::SolveLimit { config } => {
            let (cfg, mesh, data) = load(&config)?;
            let (system, sol) = solve_limit(&mesh, &data, cfg.tol)?;
            println!("limit: {} unknowns", system.n_total());
            print_solution(&mesh, &data, &system, &sol)?;
            let norms = sol.manifold_norms(&mesh);
            println!("  manifold |u_tau| {:.6e}, |p2| {:.6e}", norms.velocity, norms.pressure);
        }
        Command::Sweep { config } => {
            let cfg = SweepConfig::from_file(&config)?;
            let report = run_sweep(&cfg)?;
            let dir = cfg.output_dir();
            emit_report(&report, &dir)?;
            print!("{}", format_summary(&report.rows));
            println!("limit beta_h {:.4e}; wrote {}", report.limit_beta_h, dir.join("sweep.csv").display());
            if !report.all_ok() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Report { dir } => {
            let rows = read_report(&dir)?;
            print!("{}", format_summary(&rows));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load(config: &std::path::Path) -> Result<(SweepConfig, MixedMesh, ProblemData)> {
    let cfg = SweepConfig::from_file(config)?;
    let data = cfg.problem_data()?;
    let mesh = config_mesh(&cfg)?;
    check_data_on_mesh(&mesh, &data)?;
    Ok((cfg, mesh, data))
}

fn print_solution(mesh: &MixedMesh, data: &ProblemData, system: &DiscreteSystem, sol: &SolutionField) -> Result<()> {
    let cons = conservation_residual(sol, system, mesh).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let iface = interface_residuals(sol, system, mesh, data)?;
    println!("  relative residual {:.3e}", relative_residual(system, sol));
    println!("  rock |u| {:.6e}, |p| {:.6e}", sol.rock_velocity_l2(mesh), sol.rock_pressure_l2(mesh));
    println!("  fissure |u| {:.6e}, |p| {:.6e}", sol.fissure_velocity_l2(mesh), sol.fissure_pressure_l2(mesh));
    println!(
        "  max conservation residual {cons:.3e}, interface stress {:.3e}, interface flux {:.3e}",
        iface.max_stress(),
        iface.max_flux()
    );
    Ok(())
}
