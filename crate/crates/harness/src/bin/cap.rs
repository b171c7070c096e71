use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capacity_core::radial::{hyperbolicity_indicator, potential_energy, warped_ball_capacity, warped_potential};
use capacity_core::report::Verdict;
use capacity_core::solver::{solve_annulus, Mode, SolveOptions};
use capacity_harness::curvature::{area, curvature_summary, volume};
use capacity_harness::descriptor::{parse_body, parse_model};
use capacity_harness::export::export_potential;
use capacity_harness::report::format_number;
use capacity_harness::run::LAMBDA_SAMPLES;
use capacity_harness::{emit_csv, run_scenario, run_suite, HarnessError, Overrides, Report, Scenario, WORKERS_ENV};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cap", version, about = "Capacity bounds for convex bodies and warped models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Grid spacing (coarse level of the extrapolation)
    #[arg(long, global = true)]
    h: Option<f64>,
    /// First outer radius of the exhaustion
    #[arg(long, global = true)]
    outer: Option<f64>,
    /// Ratio between successive outer radii
    #[arg(long, global = true)]
    growth: Option<f64>,
    /// Linear solver tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Concurrent scenarios in a suite
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Write the reports as CSV
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Seed for randomized suites
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving one text report per scenario
    #[arg(long, global = true, default_value = "cap-reports")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file
    Run { file: PathBuf },
    /// Run every *.toml scenario in a directory
    Suite { dir: PathBuf },
    /// Capacity of the model ball {t <= t0} relative to {t < t1}
    Radial {
        model: PathBuf,
        #[arg(long)]
        t0: f64,
        /// Omit for the capacity in the whole model
        #[arg(long)]
        t1: Option<f64>,
    },
    /// Geometric summary of a body
    Body {
        body: PathBuf,
        /// Area, volume, curvature extrema and the λ-convexity check
        #[arg(long)]
        info: bool,
    },
    /// Solve one annulus problem and dump the potential
    Export {
        body: PathBuf,
        /// Output prefix; writes <prefix>.bin and <prefix>.txt
        #[arg(long)]
        prefix: PathBuf,
        /// auto, full3d or axisym
        #[arg(long, default_value = "auto")]
        mode: String,
    },
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides { h: self.h, outer: self.outer, growth: self.growth, tol: self.tol, seed: self.seed }
    }
}

fn persist(out: &Path, reports: &[Report], csv: Option<&Path>) -> Result<(), HarnessError> {
    fs::create_dir_all(out)?;
    for r in reports {
        let name: String = r.id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' }).collect();
        fs::write(out.join(format!("{name}.txt")), r.render())?;
    }
    if let Some(path) = csv {
        emit_csv(reports, fs::File::create(path)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, HarnessError> {
    let f = &cli.flags;
    match &cli.command {
        Command::Run { file } => {
            let mut s = Scenario::load(file)?;
            s.apply(&f.overrides())?;
            let r = run_scenario(&s)?;
            print!("{}", r.render());
            persist(&f.out, std::slice::from_ref(&r), f.csv.as_deref())?;
            Ok(if r.verdict == Verdict::Fails { 1 } else { 0 })
        }
        Command::Suite { dir } => {
            let workers = f.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let summary = run_suite(dir, workers, &f.overrides())?;
            print!("{}", summary.table());
            persist(&f.out, &summary.reports, f.csv.as_deref())?;
            Ok(summary.exit_code() as u8)
        }
        Command::Radial { model, t0, t1 } => {
            let (_, m) = parse_model(&fs::read_to_string(model)?)?;
            let t1 = t1.unwrap_or(f64::INFINITY);
            let cap = warped_ball_capacity(&m, *t0, t1)?;
            println!("model:        {}", m.describe());
            println!("hyperbolic:   {}", hyperbolicity_indicator(&m)?);
            println!("capacity:     {}", format_number(cap));
            if let Ok(p) = warped_potential(&m, *t0, t1) {
                println!("energy:       {}", format_number(potential_energy(&m, &p, *t0, t1)));
            }
            if *t0 > 0.0 {
                let h0 = m.sphere_mean_curvature(*t0)?;
                let bound = (m.n() as f64 - 1.0) * h0 * m.sphere_area(*t0);
                println!("H0 = g'/g:    {}", format_number(h0));
                println!("(n-1)H0|S|:   {}", format_number(bound));
            }
            Ok(0)
        }
        Command::Body { body, info } => {
            let b = parse_body(&fs::read_to_string(body)?)?;
            println!("body:         {}", b.describe());
            println!("smooth:       {}", b.is_smooth());
            println!("bounding r:   {}", format_number(b.bounding_radius()));
            if *info {
                let a = area(&b);
                let v = volume(&b);
                println!("area:         {} +- {} ({})", format_number(a.value), format_number(a.uncertainty), a.provenance);
                println!("volume:       {} +- {} ({})", format_number(v.value), format_number(v.uncertainty), v.provenance);
                match curvature_summary(&b) {
                    Ok(c) => {
                        println!("kappa_min:    {} +- {}", format_number(c.kappa_min.value), format_number(c.kappa_min.uncertainty));
                        println!("kappa_max:    {} +- {}", format_number(c.kappa_max.value), format_number(c.kappa_max.uncertainty));
                        println!("H_max:        {} +- {}", format_number(c.h_max.value), format_number(c.h_max.uncertainty));
                        if let Some(i) = &c.mean_curvature_integral {
                            println!("int H dA:     {} +- {}", format_number(i.value), format_number(i.uncertainty));
                        }
                        println!("ridge points: {} of {}", c.ridge_samples, c.samples);
                        let lambda = c.kappa_min.value - c.kappa_min.uncertainty;
                        if lambda > 0.0 {
                            let l = b.lambda_convexity_check(lambda, LAMBDA_SAMPLES)?;
                            println!(
                                "lambda-check: lambda = {} {} (worst margin {})",
                                format_number(lambda),
                                if l.holds { "passes" } else { "fails" },
                                format_number(l.worst_margin)
                            );
                        }
                    }
                    Err(e) => println!("curvature:    {e}"),
                }
            }
            Ok(0)
        }
        Command::Export { body, prefix, mode } => {
            let b = parse_body(&fs::read_to_string(body)?)?;
            let mode = Mode::parse(mode).ok_or_else(|| HarnessError::Invalid(format!("unknown mode `{mode}`")))?;
            let h = f.h.unwrap_or(0.02 * b.bounding_radius());
            let outer = f.outer.unwrap_or(2.0 * b.bounding_radius() + 8.0 * h);
            let mut opts = SolveOptions { mode, ..SolveOptions::default() };
            if let Some(t) = f.tol {
                opts.tol = t;
            }
            let u = solve_annulus(&b, outer, h, opts)?;
            let (bin, header) = export_potential(&u, prefix)?;
            println!("wrote {} and {}", bin.display(), header.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
