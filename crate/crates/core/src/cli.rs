//! Command-line front end: config parsing, the staged pipeline run, CSV
//! tables and the diagnostics report.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::factorization::{build_factors, factorization_residual, kernel_identity_residual, upper_points};
use crate::numerics::linalg::Vec2;
use crate::numerics::quad::QuadratureConfig;
use crate::oracle_normal::{build_oracle, oracle_compare, solve_diagonal};
use crate::problem::{boundary_residual, build_problem, reflection_coefficients, Boundary, Gammas, Impedances, RawProblem, ReflectionSet, Wavenumber, WedgeProblem};
use crate::rhp_solver::{rhp_report, solve_coupled, RhpSide, SolverConfig};
use crate::spectra::{
    diffraction_table, go_constants, go_table, go_table_residual, identity_residuals, path_pole_clearance, residue_constants, AxisQuadrature, DiffractionSample, PhiSource,
    ResidueConstants, Spectra,
};
use crate::spectral_matrix::{build_structural, real_grid, StructuralData};
use crate::surface::{build_surface, closure_report, jacobi_inversion, Seeds, SurfaceConfig};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Full,
    IdentitiesOnly,
    Oracle,
    IndexOnly,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Mode as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Parser)]
#[command(name = "wedge-diffraction", about = "Diffraction by an anisotropic impedance right-angled concave wedge at skew incidence")]
pub struct Args {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// `re,im`
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub seed_rho0: Option<C>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub seed_sigma0: Option<C>,
    /// `NAME=VALUE`, repeatable.
    #[arg(long, value_parser = parse_override)]
    pub tol_override: Vec<(String, f64)>,
}

pub fn parse_complex(s: &str) -> std::result::Result<C, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected re,im, got {s:?}"))?;
    let re = a.trim().parse::<f64>().map_err(|e| format!("{a:?}: {e}"))?;
    let im = b.trim().parse::<f64>().map_err(|e| format!("{b:?}: {e}"))?;
    Ok(C::new(re, im))
}

fn parse_override(s: &str) -> std::result::Result<(String, f64), String> {
    let (n, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"))?;
    if !(v >= 0.0) {
        return Err(format!("tolerance for {n} must be non-negative"));
    }
    Ok((n.trim().to_string(), v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl ThetaGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n).map(|j| self.start + (self.stop - self.start) * j as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub csv: PathBuf,
    pub diagnostics: PathBuf,
    pub reflections: PathBuf,
    pub plot: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: RawProblem,
    pub numerics: QuadratureConfig,
    pub eps_samples: usize,
    pub theta_grid: ThetaGrid,
    pub outputs: Outputs,
    pub seeds: Seeds,
    pub sample_shift: C,
    pub mode: Mode,
    /// Known index of the problem, checked when present.
    pub expected_kappa0: Option<i32>,
}

/// Flat view of a TOML document: `a.b.c -> value`.
struct Flat {
    map: BTreeMap<String, toml::Value>,
    used: std::cell::RefCell<Vec<String>>,
    errors: std::cell::RefCell<Vec<String>>,
}

impl Flat {
    fn new(text: &str) -> std::result::Result<Flat, Vec<String>> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| vec![format!("config syntax: {}", e.message())])?;
        let mut map = BTreeMap::new();
        fn walk(prefix: &str, t: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                match v {
                    toml::Value::Table(sub) => walk(&key, sub, out),
                    _ => {
                        out.insert(key, v.clone());
                    }
                }
            }
        }
        walk("", &table, &mut map);
        Ok(Flat { map, used: Default::default(), errors: Default::default() })
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key) || self.map.keys().any(|k| k.starts_with(&format!("{key}.")))
    }

    fn get(&self, key: &str) -> Option<&toml::Value> {
        self.used.borrow_mut().push(key.to_string());
        self.map.get(key)
    }

    fn err(&self, msg: String) {
        self.errors.borrow_mut().push(msg);
    }

    fn f64_opt(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            toml::Value::Float(v) => Some(*v),
            toml::Value::Integer(v) => Some(*v as f64),
            v => {
                self.err(format!("{key}: expected a number, got {v}"));
                None
            }
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> f64 {
        self.f64_opt(key).unwrap_or(default)
    }

    fn f64_req(&self, key: &str) -> f64 {
        self.f64_opt(key).unwrap_or_else(|| {
            if !self.map.contains_key(key) {
                self.err(format!("{key}: missing"));
            }
            f64::NAN
        })
    }

    fn int_opt(&self, key: &str) -> Option<i64> {
        match self.get(key)? {
            toml::Value::Integer(v) => Some(*v),
            v => {
                self.err(format!("{key}: expected an integer, got {v}"));
                None
            }
        }
    }

    fn str_opt(&self, key: &str) -> Option<String> {
        match self.get(key)? {
            toml::Value::String(s) => Some(s.clone()),
            v => {
                self.err(format!("{key}: expected a string, got {v}"));
                None
            }
        }
    }

    fn complex_req(&self, key: &str) -> C {
        C::new(self.f64_req(&format!("{key}.re")), self.f64_req(&format!("{key}.im")))
    }

    fn complex_opt(&self, key: &str) -> Option<C> {
        if !self.has(key) {
            return None;
        }
        Some(self.complex_req(key))
    }

    fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.map.keys().filter(|k| !used.contains(k)).cloned().collect()
    }
}

/// Parse a config document. Every problem is reported, not just the first.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, Vec<String>> {
    let f = Flat::new(text)?;
    let wavenumber = match (f.has("problem.k0"), f.has("problem.k")) {
        (true, false) => Wavenumber::K0(f.complex_req("problem.k0")),
        (false, true) => Wavenumber::K(f.complex_req("problem.k")),
        _ => {
            f.err("exactly one of problem.k0, problem.k is required".into());
            Wavenumber::K0(C::new(f64::NAN, 0.0))
        }
    };
    let boundary = if f.has("problem.gamma") {
        Boundary::Gammas(Gammas {
            g1p: f.complex_req("problem.gamma.g1p"),
            g4p: f.complex_req("problem.gamma.g4p"),
            g1m: f.complex_req("problem.gamma.g1m"),
            g4m: f.complex_req("problem.gamma.g4m"),
        })
    } else if f.has("problem.impedance") {
        Boundary::Impedances(Impedances {
            eta_rr_p: f.complex_req("problem.impedance.eta_rr_p"),
            eta_zz_p: f.complex_req("problem.impedance.eta_zz_p"),
            eta_rr_m: f.complex_req("problem.impedance.eta_rr_m"),
            eta_zz_m: f.complex_req("problem.impedance.eta_zz_m"),
        })
    } else {
        f.err("one of problem.gamma.*, problem.impedance.* is required".into());
        Boundary::Gammas(Gammas { g1p: C::default(), g4p: C::default(), g1m: C::default(), g4m: C::default() })
    };
    let problem =
        RawProblem { wavenumber, beta: f.f64_req("problem.beta"), theta0: f.f64_req("problem.theta0"), boundary, i1: f.complex_req("problem.i1"), i2: f.complex_req("problem.i2") };
    let d = QuadratureConfig::default();
    let numerics = QuadratureConfig {
        rel_tol: f.f64_or("numerics.rel_tol", d.rel_tol),
        abs_tol: f.f64_or("numerics.abs_tol", d.abs_tol),
        truncation_radius: f.f64_or("numerics.truncation_radius", d.truncation_radius),
        max_subdivisions: f.int_opt("numerics.max_subdivisions").map(|v| v.max(1) as usize).unwrap_or(d.max_subdivisions),
    };
    if !(numerics.rel_tol > 0.0 && numerics.abs_tol > 0.0 && numerics.truncation_radius > 0.0) {
        f.err("numerics tolerances and truncation radius must be positive".into());
    }
    let eps_samples = f.int_opt("numerics.eps_samples").unwrap_or(SurfaceConfig::default().eps_samples as i64);
    if eps_samples < 16 {
        f.err("numerics.eps_samples must be at least 16".into());
    }
    let count = f.int_opt("theta_grid.count").unwrap_or(0);
    let theta_grid = ThetaGrid { start: f.f64_req("theta_grid.start"), stop: f.f64_req("theta_grid.stop"), count: count.max(0) as usize };
    for (k, v) in [("theta_grid.start", theta_grid.start), ("theta_grid.stop", theta_grid.stop)] {
        if !(v > 0.0 && v < FRAC_PI_2) {
            f.err(format!("{k} = {v} must lie in (0, pi/2)"));
        }
    }
    if count < 2 {
        f.err(format!("theta_grid.count = {count} must be at least 2"));
    }
    let path = |k: &str, d: &str| PathBuf::from(f.str_opt(k).unwrap_or_else(|| d.to_string()));
    let outputs = Outputs {
        csv: path("outputs.csv", "diffraction.csv"),
        diagnostics: path("outputs.diagnostics", "diagnostics.txt"),
        reflections: path("outputs.reflections", "reflections.csv"),
        plot: path("outputs.plot", "plot.csv"),
    };
    let seeds =
        Seeds { rho0: f.complex_opt("seeds.rho0"), sigma0: f.complex_opt("seeds.sigma0"), seed: f.int_opt("seeds.seed").map(|v| v as u64).unwrap_or(Seeds::default().seed) };
    let sample_shift = f.complex_opt("solver.sample_shift").unwrap_or_default();
    let mode = match f.str_opt("mode") {
        None => Mode::Full,
        Some(s) => s.parse().unwrap_or_else(|e| {
            f.err(format!("mode: {e}"));
            Mode::Full
        }),
    };
    let expected_kappa0 = f.int_opt("expected.kappa0").map(|v| v as i32);
    for k in f.unused() {
        f.err(format!("{k}: unknown key"));
    }
    let errors = f.errors.into_inner();
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(RunConfig { problem, numerics, eps_samples: eps_samples as usize, theta_grid, outputs, seeds, sample_shift, mode, expected_kappa0 })
}

/// Every check the run can record: name, module tag, default tolerance.
pub const CHECKS: &[(&str, &str, f64)] = &[
    ("problem.boundary_conditions", "problem", 1e-10),
    ("structural.identities", "spectral_matrix", 1e-9),
    ("structural.identities_swapped", "spectral_matrix", 1e-9),
    ("spectra.go_identities", "spectra", 1e-6),
    ("spectra.go_table", "spectra", 1e-10),
    ("surface.index", "surface", 1e-3),
    ("surface.expected_index", "config", 0.0),
    ("surface.index_swapped", "surface", 1e-3),
    ("surface.closure", "surface", 1e-6),
    ("surface.closure_swapped", "surface", 1e-6),
    ("surface.integer_defect", "surface", 1e-6),
    ("surface.integer_defect_swapped", "surface", 1e-6),
    ("surface.loop_formulas", "surface", 1e-6),
    ("surface.loop_formulas_swapped", "surface", 1e-6),
    ("surface.loop_contours", "surface", 1e-6),
    ("surface.loop_contours_swapped", "surface", 1e-6),
    ("factorization.splitting", "factorization", 1e-6),
    ("factorization.splitting_swapped", "factorization", 1e-6),
    ("factorization.kernel", "factorization", 1e-7),
    ("factorization.kernel_swapped", "factorization", 1e-7),
    ("rhp.nullity", "rhp_solver", 0.0),
    ("rhp.nullity_swapped", "rhp_solver", 0.0),
    ("rhp.compat_nullity", "rhp_solver", 0.0),
    ("rhp.boundary", "rhp_solver", 1e-6),
    ("rhp.symmetry", "rhp_solver", 1e-9),
    ("rhp.decay", "rhp_solver", 1e-2),
    ("rhp.residue", "rhp_solver", 1e-6),
    ("rhp.compatibility", "rhp_solver", 1e-6),
    ("spectra.residue_theta0", "spectra", 1e-6),
    ("spectra.f_residues", "spectra", 1e-6),
    ("spectra.strip_overlap", "spectra", 1e-6),
    ("spectra.functional_equations", "spectra", 1e-6),
    ("spectra.diffraction_routes", "spectra", 1e-6),
    ("spectra.axis_tail", "spectra", 1e-8),
    // inverse clearance in units of 1/|k0|
    ("spectra.pole_proximity", "spectra", 20.0),
    ("spectra.diffraction_finite", "spectra", 0.0),
    ("diagonal.compat_nullity", "oracle_normal", 0.0),
    ("oracle.phi", "oracle_normal", 1e-8),
    ("oracle.phi_hat", "oracle_normal", 1e-8),
    ("oracle.amplitudes", "oracle_normal", 1e-8),
    ("oracle.residue_constants", "oracle_normal", 1e-8),
    ("oracle.mu", "oracle_normal", 1e-8),
    ("oracle.reflections", "oracle_normal", 1e-10),
    ("oracle.diffraction", "oracle_normal", 1e-8),
    ("oracle.diffraction_vanishes", "oracle_normal", 1e-8),
    ("oracle.boundary", "oracle_normal", 1e-12),
    ("oracle.identities", "oracle_normal", 1e-12),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub tag: &'static str,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub checks: Vec<Check>,
    overrides: BTreeMap<String, f64>,
    /// Stage failures, reported on stderr.
    pub errors: Vec<String>,
}

impl Diagnostics {
    pub fn new(overrides: &[(String, f64)]) -> std::result::Result<Self, Vec<String>> {
        let bad: Vec<String> = overrides.iter().filter(|(n, _)| !CHECKS.iter().any(|c| c.0 == n)).map(|(n, _)| format!("--tol-override: unknown check {n}")).collect();
        if !bad.is_empty() {
            return Err(bad);
        }
        Ok(Diagnostics { overrides: overrides.iter().cloned().collect(), ..Default::default() })
    }

    pub fn record(&mut self, name: &str, residual: f64) {
        let &(n, tag, tol) = CHECKS.iter().find(|c| c.0 == name).expect("check is registered");
        let tol = self.overrides.get(n).copied().unwrap_or(tol);
        let pass = residual.is_finite() && residual <= tol;
        self.checks.push(Check { name: n.to_string(), tag, residual, tol, pass });
    }

    /// A stage failed before its check could be measured.
    pub fn record_error(&mut self, name: &str, e: &Error) {
        self.errors.push(format!("{name}: {e}"));
        self.record(name, f64::NAN);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut s = String::from("NAME | REF | RESIDUAL | TOL | PASS/FAIL\n");
        for c in &self.checks {
            let _ = writeln!(s, "{} | {} | {:.3e} | {:e} | {}", c.name, c.tag, c.residual, c.tol, if c.pass { "PASS" } else { "FAIL" });
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ =
            writeln!(s, "SUMMARY | {} checks | {} passed | {} failed | {}", self.checks.len(), passed, self.checks.len() - passed, if self.all_pass() { "PASS" } else { "FAIL" });
        s
    }
}

/// What a run produced, before it is written out.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub diagnostics: Diagnostics,
    pub table: Vec<DiffractionSample>,
    pub reflections: Option<ReflectionSet>,
    /// Text for stdout.
    pub report: String,
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig { surface: SurfaceConfig { quad: cfg.numerics, eps_samples: cfg.eps_samples }, seeds: cfg.seeds, sample_shift: cfg.sample_shift, ..SolverConfig::default() }
}

fn identities_stage(d: &mut Diagnostics, p: &WedgeProblem, refl: &ReflectionSet) -> Option<(StructuralData, ResidueConstants)> {
    d.record("problem.boundary_conditions", boundary_residual(p, refl, 50, 7));
    let normal = p.is_normal_incidence();
    let mut out = None;
    for (q, name) in [(*p, "structural.identities"), (p.hat(), "structural.identities_swapped")] {
        let st = match build_structural(&q) {
            Ok(st) => st,
            Err(e) => {
                d.record_error(name, &e);
                continue;
            }
        };
        // the eigen-splitting is degenerate at normal incidence
        if !normal {
            match st.identity_report(&real_grid(st.k0, 100, 5.0)) {
                Ok(r) => d.record(name, r.worst()),
                Err(e) => d.record_error(name, &e),
            }
        }
        if out.is_none() && name == "structural.identities" {
            match residue_constants(p, &st, go_constants(p, refl)) {
                Ok(rc) => {
                    d.record("spectra.go_identities", max(identity_residuals(p, refl, &rc)));
                    d.record("spectra.go_table", go_table_residual(&go_table(p, &rc), refl));
                    out = Some((st, rc));
                }
                Err(e) => d.record_error("spectra.go_identities", &e),
            }
        }
    }
    out
}

/// Index, inversion and factors of one of the two problems.
fn side_stage(d: &mut Diagnostics, out: &mut String, q: &WedgeProblem, swapped: bool, expected: Option<i32>, scfg: &SolverConfig, factors: bool) -> Option<RhpSide> {
    let sfx = if swapped { "_swapped" } else { "" };
    let n = |base: &str| format!("{base}{sfx}");
    let st = match build_structural(q) {
        Ok(s) => s,
        Err(e) => {
            d.record_error(&n("surface.index"), &e);
            return None;
        }
    };
    let surf = match build_surface(&st, &scfg.surface) {
        Ok(s) => s,
        Err(e) => {
            d.record_error(&n("surface.index"), &e);
            return None;
        }
    };
    let _ = writeln!(out, "{}: case {} kappa0 {:+} winding {:.9}", if swapped { "swapped" } else { "problem" }, st.case_tag.label(), surf.kappa0, surf.winding);
    d.record(&n("surface.index"), (surf.winding - surf.kappa0 as f64).abs());
    if let (Some(k), false) = (expected, swapped) {
        d.record("surface.expected_index", (surf.kappa0 - k).abs() as f64);
    }
    if !factors {
        return None;
    }
    let jac = match jacobi_inversion(&surf, &[q.eta0, -q.eta0, q.eta_hat0], &scfg.seeds) {
        Ok(j) => j,
        Err(e) => {
            d.record_error(&n("surface.closure"), &e);
            return None;
        }
    };
    match closure_report(&surf, &jac) {
        Ok(r) => {
            d.record(&n("surface.closure"), r.closure);
            d.record(&n("surface.integer_defect"), r.integer_defect);
            d.record(&n("surface.loop_formulas"), r.loop_a_formula.max(r.loop_b_formula));
            d.record(&n("surface.loop_contours"), r.loop_a_contour.max(r.loop_b_direction));
        }
        Err(e) => d.record_error(&n("surface.closure"), &e),
    }
    let fac = match build_factors(&surf, &jac) {
        Ok(f) => f,
        Err(e) => {
            d.record_error(&n("factorization.splitting"), &e);
            return None;
        }
    };
    let k = st.k0.norm();
    let grid: Vec<f64> = (0..40).map(|i| k * (-5.0 + 10.0 * (i as f64 + 0.5) / 40.0)).collect();
    match factorization_residual(&fac, &grid) {
        Ok(r) => d.record(&n("factorization.splitting"), r.gamma),
        Err(e) => d.record_error(&n("factorization.splitting"), &e),
    }
    match kernel_identity_residual(&fac, &upper_points(&fac, 10, 1)) {
        Ok(r) => d.record(&n("factorization.kernel"), r),
        Err(e) => d.record_error(&n("factorization.kernel"), &e),
    }
    match RhpSide::from_factors(q, fac, scfg) {
        Ok(side) => {
            d.record(&n("rhp.nullity"), (side.nullity() as f64 - side.expected_nullity() as f64).abs());
            Some(side)
        }
        Err(e) => {
            d.record_error(&n("rhp.nullity"), &e);
            None
        }
    }
}

fn spectra_stage<P: PhiSource>(d: &mut Diagnostics, phi: &P, p: &WedgeProblem, st: &StructuralData, rc: &ResidueConstants, thetas: &[f64]) -> Option<Vec<DiffractionSample>> {
    let sp = match Spectra::new(phi, p, st, *rc, AxisQuadrature::default()) {
        Ok(s) => s,
        Err(e) => {
            d.record_error("spectra.axis_tail", &e);
            return None;
        }
    };
    d.record("spectra.pole_proximity", 1.0 / path_pole_clearance(st));
    match sp.residue_at_theta0() {
        Ok(r) => {
            let s = (p.i1.norm()).max(p.i2.norm()).max(1e-300);
            d.record("spectra.residue_theta0", (r[0] - p.i1).norm().max((r[1] - p.i2).norm()) / s);
        }
        Err(e) => d.record_error("spectra.residue_theta0", &e),
    }
    match sp.f_residue_residual() {
        Ok(r) => d.record("spectra.f_residues", r),
        Err(e) => d.record_error("spectra.f_residues", &e),
    }
    let probe: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|t| t * FRAC_PI_2).collect();
    match sp.strip_report(&probe) {
        Ok(r) => {
            d.record("spectra.strip_overlap", max(r.overlap));
            d.record("spectra.functional_equations", r.functional);
            d.record("spectra.diffraction_routes", r.d_routes);
            d.record("spectra.axis_tail", r.tail);
        }
        Err(e) => d.record_error("spectra.strip_overlap", &e),
    }
    match diffraction_table(&sp, thetas) {
        Ok(t) => {
            let bad = t.iter().filter(|s| !s.flagged && !(s.d[0].is_finite() && s.d[1].is_finite())).count();
            d.record("spectra.diffraction_finite", bad as f64);
            Some(t)
        }
        Err(e) => {
            d.record_error("spectra.diffraction_finite", &e);
            None
        }
    }
}

fn oracle_stage(d: &mut Diagnostics, p: &WedgeProblem, refl: &ReflectionSet, cfg: &RunConfig, thetas: &[f64]) -> Option<Vec<DiffractionSample>> {
    let oracle = match build_oracle(p) {
        Ok(o) => o,
        Err(e) => {
            d.record_error("oracle.phi", &e);
            return None;
        }
    };
    let sol = match solve_diagonal(p, refl, cfg.sample_shift) {
        Ok(s) => s,
        Err(e) => {
            d.record_error("diagonal.compat_nullity", &e);
            return None;
        }
    };
    d.record("diagonal.compat_nullity", (sol.nullities().2 as f64 - 2.0).abs());
    let (st, rc) = match build_structural(p).and_then(|st| residue_constants(p, &st, go_constants(p, refl)).map(|rc| (st, rc))) {
        Ok(v) => v,
        Err(e) => {
            d.record_error("oracle.residue_constants", &e);
            return None;
        }
    };
    let table = spectra_stage(d, &sol, p, &st, &rc, thetas)?;
    let so = match Spectra::new(&oracle, p, &st, rc, AxisQuadrature::default()) {
        Ok(s) => s,
        Err(e) => {
            d.record_error("oracle.diffraction", &e);
            return Some(table);
        }
    };
    let mut dp: Vec<Vec2> = Vec::new();
    let mut dn: Vec<Vec2> = Vec::new();
    for s in table.iter().filter(|s| !s.flagged) {
        match so.diffraction(s.theta) {
            Ok(v) => {
                dp.push(s.d);
                dn.push(v);
            }
            Err(e) => {
                d.record_error("oracle.diffraction", &e);
                return Some(table);
            }
        }
    }
    let r = oracle_compare(&oracle, &sol, &rc, refl, &dp, &dn);
    d.record("oracle.phi", r.phi);
    d.record("oracle.phi_hat", r.phi_hat);
    d.record("oracle.amplitudes", r.amplitudes);
    d.record("oracle.residue_constants", r.lambda_m);
    d.record("oracle.mu", r.mu);
    d.record("oracle.reflections", r.reflections);
    d.record("oracle.diffraction", r.diffraction);
    d.record("oracle.diffraction_vanishes", r.diffraction_magnitude);
    d.record("oracle.boundary", r.oracle_boundary);
    d.record("oracle.identities", r.oracle_identities);
    Some(table)
}

/// Run the pipeline for a validated config. Stage failures are recorded as
/// failing checks; only an invalid problem is an error.
pub fn execute(cfg: &RunConfig, overrides: &[(String, f64)]) -> std::result::Result<RunOutput, Vec<String>> {
    let mut d = Diagnostics::new(overrides)?;
    let p = build_problem(&cfg.problem).map_err(|e| match e {
        Error::Validation(v) => v,
        e => vec![e.to_string()],
    })?;
    if cfg.mode == Mode::Oracle && !p.is_normal_incidence() {
        return Err(vec![format!("mode oracle requires problem.beta = pi/2, got {}", p.beta)]);
    }
    let mut out = RunOutput::default();
    let scfg = solver_config(cfg);
    let thetas = cfg.theta_grid.points();
    let refl = match reflection_coefficients(&p) {
        Ok(r) => Some(r),
        Err(e) => {
            d.record_error("problem.boundary_conditions", &e);
            None
        }
    };
    match cfg.mode {
        Mode::IndexOnly => {
            side_stage(&mut d, &mut out.report, &p, false, cfg.expected_kappa0, &scfg, false);
        }
        Mode::IdentitiesOnly => {
            if let Some(r) = &refl {
                identities_stage(&mut d, &p, r);
            }
        }
        Mode::Oracle => {
            if let Some(r) = &refl {
                identities_stage(&mut d, &p, r);
                out.table = oracle_stage(&mut d, &p, r, cfg, &thetas).unwrap_or_default();
            }
        }
        Mode::Full => {
            let Some(r) = &refl else {
                out.diagnostics = d;
                return Ok(out);
            };
            let ids = identities_stage(&mut d, &p, r);
            if p.is_normal_incidence() {
                let _ = writeln!(out.report, "normal incidence: diagonal solution");
                out.table = oracle_stage(&mut d, &p, r, cfg, &thetas).unwrap_or_default();
            } else {
                let r1 = side_stage(&mut d, &mut out.report, &p, false, cfg.expected_kappa0, &scfg, true);
                let r2 = side_stage(&mut d, &mut out.report, &p.hat(), true, None, &scfg, true);
                if let (Some(r1), Some(r2), Some((st, rc))) = (r1, r2, ids) {
                    match solve_coupled(r1, r2, r, &scfg) {
                        Ok(sol) => {
                            d.record("rhp.compat_nullity", (sol.compat_nullity as f64 - 2.0).abs());
                            let k = p.k0.norm();
                            let grid: Vec<f64> = (0..40).map(|j| k * (-5.0 + 10.0 * (j as f64 + 0.5) / 40.0)).collect();
                            match rhp_report(&sol, &grid, 5) {
                                Ok(rep) => {
                                    d.record("rhp.boundary", rep.boundary.max(rep.boundary_hat));
                                    d.record("rhp.symmetry", rep.symmetry);
                                    d.record("rhp.decay", rep.decay);
                                    d.record("rhp.residue", rep.residue.max(rep.residue_pair));
                                    d.record("rhp.compatibility", rep.held_out);
                                }
                                Err(e) => d.record_error("rhp.boundary", &e),
                            }
                            out.table = spectra_stage(&mut d, &sol, &p, &st, &rc, &thetas).unwrap_or_default();
                        }
                        Err(e) => d.record_error("rhp.compat_nullity", &e),
                    }
                }
            }
        }
    }
    out.reflections = refl;
    out.diagnostics = d;
    Ok(out)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn diffraction_csv(table: &[DiffractionSample]) -> String {
    let mut s = String::from("theta,re_D1,im_D1,re_D2,im_D2,flag\n");
    for r in table {
        let _ = writeln!(s, "{},{},{},{},{},{}", num(r.theta), num(r.d[0].re), num(r.d[0].im), num(r.d[1].re), num(r.d[1].im), r.flagged as u8);
    }
    s
}

pub fn plot_csv(table: &[DiffractionSample]) -> String {
    let mut s = String::from("theta,|D1|,argD1,|D2|,argD2\n");
    for r in table {
        let _ = writeln!(s, "{},{},{},{},{}", num(r.theta), num(r.d[0].norm()), num(r.d[0].arg()), num(r.d[1].norm()), num(r.d[1].arg()));
    }
    s
}

pub fn reflection_csv(r: &ReflectionSet) -> String {
    let mut s = String::from("name,component,re,im\n");
    let rows = [("r+", r.r1p, r.r2p), ("r-", r.r1m, r.r2m), ("R+", r.R1p, r.R2p), ("R-", r.R1m, r.R2m)];
    for (n, a, b) in rows {
        for (j, v) in [(1, a), (2, b)] {
            let _ = writeln!(s, "{n},{j},{},{}", num(v.re), num(v.im));
        }
    }
    s
}

fn write(dir: &Path, name: &Path, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// Full command: returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let fail = |msgs: Vec<String>| {
        for m in msgs {
            eprintln!("error: {m}");
        }
        2
    };
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(vec![format!("{}: {e}", args.config.display())]),
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(m) => return fail(m),
    };
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(v) = args.seed_rho0 {
        cfg.seeds.rho0 = Some(v);
    }
    if let Some(v) = args.seed_sigma0 {
        cfg.seeds.sigma0 = Some(v);
    }
    let out = match execute(&cfg, &args.tol_override) {
        Ok(o) => o,
        Err(m) => return fail(m),
    };
    let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let written = (|| -> Result<()> {
        fs::create_dir_all(&dir)?;
        write(&dir, &cfg.outputs.diagnostics, &out.diagnostics.render())?;
        if let Some(r) = &out.reflections {
            if cfg.mode != Mode::IndexOnly {
                write(&dir, &cfg.outputs.reflections, &reflection_csv(r))?;
            }
        }
        if matches!(cfg.mode, Mode::Full | Mode::Oracle) {
            write(&dir, &cfg.outputs.csv, &diffraction_csv(&out.table))?;
            write(&dir, &cfg.outputs.plot, &plot_csv(&out.table))?;
        }
        Ok(())
    })();
    if let Err(e) = written {
        return fail(vec![e.to_string()]);
    }
    print!("{}", out.report);
    print!("{}", out.diagnostics.render());
    for e in &out.diagnostics.errors {
        eprintln!("stage failed: {e}");
    }
    if out.diagnostics.all_pass() {
        0
    } else {
        3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
mode = "identities-only"
problem.k0 = { re = 1.0, im = 0.1 }
problem.beta = 0.7853981633974483
problem.theta0 = 1.0471975511965976
problem.gamma.g1p = { re = 1.0, im = -1.0 }
problem.gamma.g4p = { re = 1.0, im = 2.0 }
problem.gamma.g1m = { re = 1.0, im = -2.0 }
problem.gamma.g4m = { re = 1.0, im = -3.0 }
problem.i1 = { re = 1.0, im = 0.0 }
problem.i2 = { re = 0.3, im = 0.0 }
theta_grid.start = 0.1
theta_grid.stop = 1.4
theta_grid.count = 5
"#;

    #[test]
    fn parses_dotted_config() {
        let c = parse_config(BASE).unwrap();
        assert_eq!(c.mode, Mode::IdentitiesOnly);
        assert_eq!(c.theta_grid.points().len(), 5);
        assert_eq!(c.outputs.csv, PathBuf::from("diffraction.csv"));
    }

    #[test]
    fn reports_every_config_error() {
        let text = BASE.replace("theta_grid.count = 5", "theta_grid.count = 1\nbogus.key = 3").replace("theta_grid.stop = 1.4", "theta_grid.stop = 1.8");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.len(), 3, "{e:?}");
    }

    #[test]
    fn unknown_override_is_rejected() {
        assert!(Diagnostics::new(&[("nope".into(), 1.0)]).is_err());
    }

    #[test]
    fn identities_only_passes() {
        let c = parse_config(BASE).unwrap();
        let out = execute(&c, &[]).unwrap();
        assert!(out.diagnostics.all_pass(), "{}", out.diagnostics.render());
        assert!(out.diagnostics.render().lines().last().unwrap().starts_with("SUMMARY"));
    }

    #[test]
    fn complex_flag_parsing() {
        assert_eq!(parse_complex("0.5,-1.25").unwrap(), C::new(0.5, -1.25));
        assert!(parse_complex("0.5").is_err());
    }
}
