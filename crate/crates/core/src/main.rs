use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use flatline::characters::Character;
use flatline::cli_reports::{render, run_suite, Format, GridSpec, SweepConfig, CHECKS};
use flatline::deligne_pairing::{intersection_log, PairingSymbol};
use flatline::elliptic_kernel::{Divisor, Torus};
use flatline::flat_bundles::{build_section, Recipe};
use flatline::torsion_quillen::{quillen_log_virtual, torsion_spectral, torsion_theta};
use flatline::{Error, Result};

#[derive(Parser)]
#[command(name = "flatline", version, about = "Identity checks for logarithms of flat line bundles on tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Modular parameter as `re,im`.
    #[arg(long, default_value = "0.1,1.1", value_parser = parse_complex)]
    tau: Complex64,
    /// Grid as `nodes` or `nodes,radius`.
    #[arg(long, default_value = "5")]
    grid: String,
    /// Tolerance overrides as `check=value`, repeatable.
    #[arg(long = "tol")]
    tol: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeded instances for instance-based checks.
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run identity-defect suites; exit code 0 iff every check passes.
    Verify {
        /// Checks to run (default: all).
        checks: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// T(χ) by both routes and the Quillen logarithm.
    Torsion {
        /// Multipliers as `a_re,a_im,b_re,b_im`.
        #[arg(long, value_parser = parse_pair)]
        chi: (Complex64, Complex64),
        #[arg(long, default_value = "0.1,1.1", value_parser = parse_complex)]
        tau: Complex64,
    },
    /// LOG_int of ⟨ℓ, m⟩ for sections with divisors (P + r) − (r).
    Pairing {
        #[arg(long, value_parser = parse_pair)]
        left: (Complex64, Complex64),
        #[arg(long, value_parser = parse_pair)]
        right: (Complex64, Complex64),
        #[arg(long, value_enum, default_value = "general")]
        left_recipe: RecipeArg,
        #[arg(long, value_enum, default_value = "general")]
        right_recipe: RecipeArg,
        #[arg(long, default_value = "0.1,1.1", value_parser = parse_complex)]
        tau: Complex64,
    },
    /// deg♯ of a line read from a JSON file.
    Degree { input: PathBuf },
    /// One check over the grid, as CSV by default.
    Sweep {
        #[arg(long, default_value = "holomorphy_q")]
        check: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum RecipeArg {
    Real,
    Unitary,
    Mixed,
    General,
}

impl From<RecipeArg> for Recipe {
    fn from(r: RecipeArg) -> Self {
        match r {
            RecipeArg::Real => Recipe::Real,
            RecipeArg::Unitary => Recipe::Unitary,
            RecipeArg::Mixed => Recipe::Mixed,
            RecipeArg::General => Recipe::General,
        }
    }
}

fn parse_floats(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let v = parse_floats(s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}

fn parse_pair(s: &str) -> std::result::Result<(Complex64, Complex64), String> {
    let v = parse_floats(s, 4)?;
    Ok((Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])))
}

fn config(common: &Common, suite: Vec<String>) -> Result<SweepConfig> {
    let g: Vec<&str> = common.grid.split(',').collect();
    let nodes = g[0].trim().parse().map_err(|_| Error::Usage(format!("bad --grid `{}`", common.grid)))?;
    let mut grid = GridSpec { nodes, ..GridSpec::default() };
    if let Some(r) = g.get(1) {
        grid.radius = r.trim().parse().map_err(|_| Error::Usage(format!("bad --grid `{}`", common.grid)))?;
    }
    let mut tolerances = std::collections::BTreeMap::new();
    for t in &common.tol {
        let (k, v) = t.split_once('=').ok_or_else(|| Error::Usage(format!("--tol expects check=value, got `{t}`")))?;
        let v: f64 = v.parse().map_err(|_| Error::Usage(format!("bad tolerance `{v}`")))?;
        tolerances.insert(k.to_string(), v);
    }
    Ok(SweepConfig {
        tau: common.tau,
        grid,
        suite,
        tolerances,
        seed: common.seed,
        instances: common.instances,
    })
}

fn write_out(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: serde_json::Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(&v).expect("JSON values serialize"))
}

fn section_at(chi: &Character, t: &Torus, r: Complex64) -> Result<flatline::flat_bundles::EquivariantSection> {
    let p = t.reduce_to_tile(flatline::characters::class_point(chi, t)).0;
    build_section(chi, &Divisor::new(vec![(p + r, 1), (r, -1)], t)?, t)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Verify { checks, common } => {
            let suite = if checks.is_empty() { CHECKS.iter().map(|s| s.to_string()).collect() } else { checks };
            let started = Instant::now();
            let report = run_suite(&config(&common, suite)?, common.workers)?;
            eprintln!("wall time: {:.3} s", started.elapsed().as_secs_f64());
            write_out(&render(&report, common.format)?, &common.out)?;
            Ok(report.exit_code())
        }
        Command::Sweep { check, mut common } => {
            if !std::env::args().any(|a| a == "--format") {
                common.format = Format::Csv;
            }
            let started = Instant::now();
            let report = run_suite(&config(&common, vec![check])?, common.workers)?;
            eprintln!("wall time: {:.3} s", started.elapsed().as_secs_f64());
            write_out(&render(&report, common.format)?, &common.out)?;
            Ok(report.exit_code())
        }
        Command::Torsion { chi, tau } => {
            let t = Torus::new(tau)?;
            let chi = Character::from_multipliers(chi.0, chi.1)?;
            let s = torsion_spectral(&chi, &t)?;
            let h = torsion_theta(&chi, &t)?;
            let q = quillen_log_virtual(&chi, &t)?;
            print!(
                "{}",
                pretty(json!({
                    "schema": flatline::cli_reports::SCHEMA,
                    "spectral": s,
                    "theta": h,
                    "relative_difference": (s.value - h.value).norm() / h.value.norm(),
                    "quillen_log_virtual": [q.rep().re, q.rep().im],
                }))
            );
            Ok(0)
        }
        Command::Pairing { left, right, left_recipe, right_recipe, tau } => {
            let t = Torus::new(tau)?;
            let cl = Character::from_multipliers(left.0, left.1)?;
            let cm = Character::from_multipliers(right.0, right.1)?;
            let l = section_at(&cl, &t, t.from_coords(0.11, 0.13))?;
            let m = section_at(&cm, &t, t.from_coords(0.57, 0.52))?;
            let sym = PairingSymbol::from_recipes(l, m, left_recipe.into(), right_recipe.into())?;
            let v = intersection_log(&sym, &cl)?;
            print!(
                "{}",
                pretty(json!({
                    "schema": flatline::cli_reports::SCHEMA,
                    "left_divisor": sym.left.divisor(),
                    "right_divisor": sym.right.divisor(),
                    "log_int": [v.rep().re, v.rep().im],
                }))
            );
            Ok(0)
        }
        Command::Degree { input } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let data: flatline::arith_degree::DegreeInput =
                serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let d = data.evaluate()?;
            print!(
                "{}",
                pretty(json!({
                    "schema": flatline::cli_reports::SCHEMA,
                    "deg_sharp": [d.rep().re, d.rep().im],
                    "modulus": d.modulus(),
                }))
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
