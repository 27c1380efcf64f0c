//! Check suites over character grids and seeded instances, and their
//! JSON/CSV reports.
//!
//! A check runs either at the nodes of a grid in lift space, where χ(w) has
//! lifts (α + w·dα, β + w·dβ), or at `instances` seeded random instances.
//! Each unit of work draws from its own ChaCha8 stream keyed by (seed,
//! index), and results are collected in index order, so reports do not
//! depend on the worker count.

pub mod instances;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith_degree::{deg_sharp, deg_sharp_default};
use crate::characters::Character;
use crate::circle_values::{CircleValue, Modulus};
use crate::deligne_pairing::{
    branch_shift_defect, closed_form_log, intersection_log, refined_pl_defect, symmetry_defect, weil_defect,
    HolomorphicFamily, PairRecipe,
};
use crate::elliptic_kernel::Torus;
use crate::error::{Error, Result};
use crate::flat_bundles::Recipe;
use crate::torsion_quillen::{arg_arr_defect, deligne_defect_at, quillen_log_virtual, torsion_spectral, torsion_theta};

use instances::{
    instance_rng, pair_instance, random_character, random_rational_generator, random_rational_line, random_section,
    random_shift, refined_pl_instance, weil_instance, CharacterKind,
};

pub const SCHEMA: &str = "flatline/1";

/// Check names in report order.
pub const CHECKS: &[&str] = &[
    "weil",
    "refined_pl",
    "symmetry",
    "branch_shift",
    "closed_form",
    "torsion_routes",
    "unitary_reality",
    "holomorphy_int",
    "holomorphy_q",
    "deligne_defect",
    "deligne_unitary",
    "arg_arr",
    "degree",
];

/// Holomorphy checks pass when the residual shrinks at least this much as
/// the step halves.
pub const CR_RATIO: f64 = 3.5;

/// First finite-difference step of the holomorphy checks.
pub const CR_STEP: f64 = 0.02;

fn default_tolerance(check: &str) -> f64 {
    match check {
        "weil" => 1e-9,
        "torsion_routes" => 1e-8,
        "unitary_reality" => 1e-10,
        "degree" => 1e-12,
        _ => 1e-6,
    }
}

fn grid_based(check: &str) -> bool {
    !matches!(check, "weil" | "closed_form" | "unitary_reality" | "deligne_unitary" | "degree")
}

fn needs_two_nodes(check: &str) -> bool {
    matches!(check, "holomorphy_int" | "holomorphy_q" | "deligne_defect")
}

/// Nodes w = radius·(x + iy) with x, y on a uniform grid of [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub d_alpha: Complex64,
    pub d_beta: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            alpha: Complex64::new(0.35, 1.3),
            beta: Complex64::new(-0.25, 0.7),
            d_alpha: Complex64::new(1.0, 0.0),
            d_beta: Complex64::new(0.5, 0.0),
            radius: 0.25,
            nodes: 5,
        }
    }
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.nodes * self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    /// Row-major node k.
    pub fn node(&self, k: usize) -> Complex64 {
        let coord = |j: usize| {
            if self.nodes < 2 {
                0.0
            } else {
                2.0 * j as f64 / (self.nodes - 1) as f64 - 1.0
            }
        };
        Complex64::new(coord(k % self.nodes), coord(k / self.nodes)) * self.radius
    }

    pub fn character(&self, w: Complex64) -> Character {
        Character::from_lifts(self.alpha + self.d_alpha * w, self.beta + self.d_beta * w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub tau: Complex64,
    pub grid: GridSpec,
    pub suite: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    /// Number of seeded instances for instance-based checks.
    pub instances: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            tau: Complex64::new(0.1, 1.1),
            grid: GridSpec::default(),
            suite: Vec::new(),
            tolerances: BTreeMap::new(),
            seed: 0,
            instances: 20,
        }
    }
}

impl SweepConfig {
    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances.get(check).copied().unwrap_or_else(|| default_tolerance(check))
    }

    pub fn validate(&self) -> Result<()> {
        Torus::new(self.tau)?;
        for check in &self.suite {
            if !CHECKS.contains(&check.as_str()) {
                return Err(Error::UnknownCheck(check.clone()));
            }
            if needs_two_nodes(check) && self.grid.nodes < 2 {
                return Err(Error::Usage(format!(
                    "`{check}` needs at least 2 grid nodes per axis for CR/constancy checks"
                )));
            }
        }
        if let Some(k) = self.tolerances.keys().find(|k| !CHECKS.contains(&k.as_str())) {
            return Err(Error::UnknownCheck(k.clone()));
        }
        Ok(())
    }

    fn units(&self, check: &str) -> usize {
        if grid_based(check) {
            self.grid.len()
        } else {
            self.instances
        }
    }
}

/// One (node, check) result. Errors are recorded, not propagated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check: String,
    pub index: usize,
    pub node: [f64; 2],
    pub defect: [f64; 2],
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub tolerance: f64,
    pub units: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub max_defect: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub config: SweepConfig,
    pub records: Vec<Record>,
    pub summaries: Vec<CheckSummary>,
    pub all_pass: bool,
}

impl Report {
    pub fn empty(config: SweepConfig) -> Self {
        Report {
            schema: SCHEMA.into(),
            config,
            records: Vec::new(),
            summaries: Vec::new(),
            all_pass: true,
        }
    }

    /// 0 iff every check passed.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            0
        } else {
            1
        }
    }
}

/// (f_x + i·f_y)/2 by central differences; zero up to O(h²) for holomorphic
/// f. Values are unwrapped modulo 2πi against f(w).
pub fn cauchy_riemann_residual(f: &dyn Fn(Complex64) -> Result<Complex64>, w: Complex64, h: f64) -> Result<Complex64> {
    let centre = f(w)?;
    let at = |dw: Complex64| -> Result<Complex64> { Ok(CircleValue::new(f(w + dw)?, Modulus::TwoPiI).lift_near(centre)) };
    let hx = Complex64::new(h, 0.0);
    let hy = Complex64::new(0.0, h);
    let fx = (at(hx)? - at(-hx)?) / (2.0 * h);
    let fy = (at(hy)? - at(-hy)?) / (2.0 * h);
    Ok((fx + Complex64::new(0.0, 1.0) * fy) * 0.5)
}

/// Residuals at h and h/2.
fn cr_pair(f: &dyn Fn(Complex64) -> Result<Complex64>, w: Complex64) -> Result<(f64, f64)> {
    Ok((
        cauchy_riemann_residual(f, w, CR_STEP)?.norm(),
        cauchy_riemann_residual(f, w, CR_STEP / 2.0)?.norm(),
    ))
}

/// Defect and pass flag of one unit; `node` is the grid point or the
/// instance index on the real axis.
fn run_unit(config: &SweepConfig, check: &str, index: usize) -> (Complex64, Result<(Complex64, bool)>) {
    let grid = &config.grid;
    let node = if grid_based(check) {
        grid.node(index)
    } else {
        Complex64::new(index as f64, 0.0)
    };
    let tol = config.tolerance(check);
    let result = (|| -> Result<(Complex64, bool)> {
        let t = Torus::new(config.tau)?;
        let mut rng = instance_rng(config.seed, index as u64);
        let chi = grid.character(node);
        let small = |d: CircleValue| Ok((d.rep(), d.abs() < tol));
        match check {
            "weil" => {
                let (f, g) = weil_instance(&mut rng)?;
                small(weil_defect(&f, &g)?)
            }
            "refined_pl" => {
                let (m, shift, vartheta) = refined_pl_instance(&mut rng, &chi, &t)?;
                small(refined_pl_defect(&m, shift, &vartheta)?)
            }
            "symmetry" => {
                let sym = pair_instance(&mut rng, &chi, &t, CharacterKind::General, (Recipe::General, Recipe::General))?;
                small(symmetry_defect(&sym)?)
            }
            "branch_shift" => {
                let sym = pair_instance(&mut rng, &chi, &t, CharacterKind::General, (Recipe::General, Recipe::General))?;
                small(branch_shift_defect(&sym, &chi, random_shift(&mut rng))?)
            }
            "closed_form" => {
                let (kl, km, recipes, pair) = match index % 3 {
                    0 => (CharacterKind::Unitary, CharacterKind::Unitary, (Recipe::Unitary, Recipe::Unitary), PairRecipe::Unitary),
                    1 => (CharacterKind::Real, CharacterKind::Real, (Recipe::Real, Recipe::Real), PairRecipe::Real),
                    _ => (CharacterKind::Real, CharacterKind::Unitary, (Recipe::Real, Recipe::Unitary), PairRecipe::Mixed),
                };
                let chi_l = random_character(&mut rng, kl, &t);
                let sym = pair_instance(&mut rng, &chi_l, &t, km, recipes)?;
                let general = intersection_log(&sym, &chi_l)?;
                small(general.sub(&closed_form_log(&sym, pair)?)?)
            }
            "torsion_routes" => {
                let s = torsion_spectral(&chi, &t)?.value;
                let h = torsion_theta(&chi, &t)?.value;
                let rel = (s - h) / h.norm();
                Ok((rel, rel.norm() < tol))
            }
            "unitary_reality" => {
                let u = random_character(&mut rng, CharacterKind::Unitary, &t);
                let v = torsion_spectral(&u, &t)?;
                let im = Complex64::new(0.0, v.log_value.im);
                Ok((im, im.norm() < tol && v.value.re > 0.0))
            }
            "holomorphy_int" => {
                let chi_m = random_character(&mut rng, CharacterKind::General, &t);
                let right = random_section(&mut rng, &chi_m, &t, &[])?;
                let anchor = t.from_coords(0.37, 0.61);
                let family = HolomorphicFamily::new(t, anchor, right, Recipe::General)?;
                let f = |w: Complex64| family.log_int(&grid.character(w));
                let (r1, r2) = cr_pair(&f, node)?;
                Ok((Complex64::new(r2, 0.0), r1 >= CR_RATIO * r2))
            }
            "holomorphy_q" => {
                let f = |w: Complex64| Ok(quillen_log_virtual(&grid.character(w), &t)?.rep());
                let (r1, r2) = cr_pair(&f, node)?;
                Ok((Complex64::new(r2, 0.0), r1 >= CR_RATIO * r2))
            }
            "deligne_defect" => small(deligne_defect_at(&chi, &t)?),
            "deligne_unitary" => {
                let u = random_character(&mut rng, CharacterKind::Unitary, &t);
                small(deligne_defect_at(&u, &t)?)
            }
            "arg_arr" => {
                let twist = (rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2));
                let r = arg_arr_defect(&chi, twist, &t)?;
                Ok((Complex64::new(r.defect, 0.0), r.defect.abs() < tol))
            }
            "degree" => {
                let line = random_rational_line(&mut rng);
                let base = deg_sharp_default(&line)?;
                let (l, lc) = (random_rational_generator(&mut rng), random_rational_generator(&mut rng));
                small(deg_sharp(&line, (&l, &lc))?.sub(&base)?)
            }
            other => Err(Error::UnknownCheck(other.into())),
        }
    })();
    (node, result)
}

/// Runs every check of the suite. `workers` sets the pool size (None: all
/// cores); the report is identical for every choice.
pub fn run_suite(config: &SweepConfig, workers: Option<usize>) -> Result<Report> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Usage(format!("worker pool: {e}")))?;
    let suite: Vec<&str> = CHECKS.iter().copied().filter(|c| config.suite.iter().any(|s| s == c)).collect();
    let units: Vec<(&str, usize)> = suite
        .iter()
        .flat_map(|&c| (0..config.units(c)).map(move |k| (c, k)))
        .collect();
    let records: Vec<Record> = pool.install(|| {
        units
            .par_iter()
            .map(|&(check, index)| {
                let (node, result) = run_unit(config, check, index);
                let (defect, pass, error) = match result {
                    Ok((d, p)) => (d, p, None),
                    Err(e) => (Complex64::new(f64::NAN, f64::NAN), false, Some(e.to_string())),
                };
                Record {
                    check: check.into(),
                    index,
                    node: [node.re, node.im],
                    defect: [defect.re, defect.im],
                    pass,
                    error,
                }
            })
            .collect()
    });
    let summaries: Vec<CheckSummary> = suite
        .iter()
        .map(|&check| summarize(check, config.tolerance(check), &records))
        .collect();
    let all_pass = summaries.iter().all(|s| s.pass);
    Ok(Report {
        schema: SCHEMA.into(),
        config: config.clone(),
        records,
        summaries,
        all_pass,
    })
}

fn summarize(check: &str, tolerance: f64, records: &[Record]) -> CheckSummary {
    let mine: Vec<&Record> = records.iter().filter(|r| r.check == check).collect();
    let errors = mine.iter().filter(|r| r.error.is_some()).count();
    let passed = mine.iter().filter(|r| r.pass).count();
    let max_defect = mine
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| r.defect[0].hypot(r.defect[1]))
        .fold(0.0, f64::max);
    CheckSummary {
        check: check.into(),
        tolerance,
        units: mine.len(),
        passed,
        failed: mine.len() - passed,
        errors,
        max_defect,
        pass: passed == mine.len(),
    }
}

/// Output format of [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

pub const CSV_HEADER: &str = "node_re,node_im,check,defect_re,defect_im,pass";

/// The report as text: nested JSON, or one CSV row per (node, check).
pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for r in &report.records {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.node[0], r.node[1], r.check, r.defect[0], r.defect[1], r.pass
                );
            }
            Ok(s)
        }
    }
}

/// Writes [`render`] output to `path`.
pub fn emit(report: &Report, format: Format, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, render(report, format)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Largest |defect| per check, read back from CSV text.
pub fn csv_max_defects(csv: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let mut lines = csv.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Io("missing CSV header".into()));
    }
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Io(format!("malformed row `{line}`")));
        }
        let parse = |x: &str| x.parse::<f64>().map_err(|e| Error::Io(e.to_string()));
        let (re, im) = (parse(f[3])?, parse(f[4])?);
        let e = out.entry(f[2].to_string()).or_insert(0.0f64);
        if re.is_finite() && im.is_finite() {
            *e = e.max(re.hypot(im));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(suite: &[&str]) -> SweepConfig {
        SweepConfig {
            suite: suite.iter().map(|s| s.to_string()).collect(),
            instances: 6,
            grid: GridSpec {
                nodes: 2,
                ..GridSpec::default()
            },
            ..SweepConfig::default()
        }
    }

    #[test]
    fn unknown_check_and_single_node_are_rejected() {
        assert!(matches!(run_suite(&config(&["nope"]), Some(1)), Err(Error::UnknownCheck(_))));
        let mut c = config(&["deligne_defect"]);
        c.grid.nodes = 1;
        assert!(matches!(run_suite(&c, Some(1)), Err(Error::Usage(_))));
    }

    #[test]
    fn empty_report_renders_header_only() {
        let r = Report::empty(SweepConfig::default());
        assert_eq!(render(&r, Format::Csv).unwrap(), format!("{CSV_HEADER}\n"));
        assert!(render(&r, Format::Json).unwrap().contains("\"schema\": \"flatline/1\""));
    }

    #[test]
    fn quick_suite_passes_and_is_deterministic() {
        let c = config(&["weil", "degree", "symmetry", "torsion_routes"]);
        let a = run_suite(&c, Some(1)).unwrap();
        let b = run_suite(&c, Some(3)).unwrap();
        assert!(a.all_pass, "{:#?}", a.summaries);
        assert_eq!(render(&a, Format::Json).unwrap(), render(&b, Format::Json).unwrap());
        let csv = render(&a, Format::Csv).unwrap();
        let maxima = csv_max_defects(&csv).unwrap();
        for s in &a.summaries {
            assert_eq!(maxima[&s.check], s.max_defect);
        }
        let back: Report = serde_json::from_str(&render(&a, Format::Json).unwrap()).unwrap();
        assert_eq!(back.summaries, a.summaries);
    }

    #[test]
    fn cr_residual_is_second_order_for_holomorphic_maps() {
        let f = |w: Complex64| Ok(w.exp() * w);
        let w = Complex64::new(0.3, -0.2);
        let (r1, r2) = cr_pair(&f, w).unwrap();
        assert!(r1 / r2 > 3.9 && r1 / r2 < 4.1);
        let g = |w: Complex64| Ok(Complex64::new(w.norm_sqr(), 0.0));
        assert!(cauchy_riemann_residual(&g, w, 1e-3).unwrap().norm() > 0.1);
    }
}
