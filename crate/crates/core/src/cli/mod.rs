//! The `metivier` command-line front end.
//!
//! Every flag mirrors a key of the JSON config file given by `--config`;
//! flags override the file. Each command prints a JSON report on stdout,
//! writes the same report to `<output>/report.json` and a short summary to
//! stderr. Exit codes: 0 ok, 1 usage or validation error, 2 mathematical
//! precondition failure, 3 identity verification failure.

pub mod verify;

use crate::error::{Error, Result};
use crate::fields::io::{read_field, write_field, Encoding};
use crate::fields::{sample, GridSpec, PolarGrid, SampledField};
use crate::group_algebra::{lambda_prime_of, symplectic_spectrum, v_lambda, MetivierStructure};
use crate::injectivity::{
    one_radius_counterexample, reconstruct_from_means, rules_for, measure_mean, two_radii_check, MeanData, RadialMeasure,
    RadiiBounds, DegreeRecovery,
};
use crate::special::theta_k;
use crate::C64;
use clap::{Args, Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Verify,
    Reconstruct,
    Radii,
    Counterexample,
}

/// Options shared by the flag parser and the config file.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[arg(skip)]
    pub command: Option<Command>,
    /// Built-in structure name or path to a structure JSON file.
    #[arg(long)]
    pub structure: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub lambda_prime: Option<Vec<f64>>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Radial node counts, one per coordinate.
    #[arg(long, value_delimiter = ',')]
    pub radial: Option<Vec<usize>>,
    /// Angular sample counts (powers of two), one per coordinate.
    #[arg(long, value_delimiter = ',')]
    pub angular: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Field file, `builtin:gaussian` or `builtin:theta:<k>`.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub test_points: Option<usize>,
    /// `binary` or `base64` for written field files.
    #[arg(long, value_parser = parse_encoding)]
    pub encoding: Option<Encoding>,
}

fn parse_encoding(s: &str) -> std::result::Result<Encoding, String> {
    match s {
        "binary" => Ok(Encoding::Binary),
        "base64" => Ok(Encoding::Base64),
        _ => Err(format!("unknown encoding {s}")),
    }
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => { $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )* };
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(mut self, flags: &RunConfig) -> Self {
        overlay!(
            self, flags, command, structure, lambda, lambda_prime, r_max, radial, angular, radii, weights, k_max, n_max,
            tolerance, output, seed, input, l, n, test_points, encoding
        );
        self
    }

    fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("output"))
    }

    fn grid(&self, n: usize) -> Result<PolarGrid> {
        if self.r_max.is_none() && self.radial.is_none() && self.angular.is_none() {
            return PolarGrid::default_for(n);
        }
        let def = PolarGrid::default_for(n)?.spec();
        let spread = |v: &Option<Vec<usize>>, d: Vec<usize>| match v {
            Some(v) if v.len() == 1 => vec![v[0]; n],
            Some(v) => v.clone(),
            None => d,
        };
        PolarGrid::from_spec(&GridSpec {
            r_max: self.r_max.unwrap_or(def.r_max),
            radial: spread(&self.radial, def.radial),
            angular: spread(&self.angular, def.angular),
        })
    }

    fn lambda_prime(&self, n: usize) -> Vec<f64> {
        self.lambda_prime.clone().unwrap_or_else(|| vec![1.0; n])
    }
}

#[derive(Debug, Parser)]
#[command(name = "metivier", version, about = "Twisted spherical means and injectivity checks on Métivier groups")]
struct Cli {
    /// Command to run; may instead be given as `command` in the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: RunConfig,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SingularPencil { .. }
        | Error::NonConvergence(_)
        | Error::OutOfDomain { .. }
        | Error::TruncationDominates { .. }
        | Error::NotHomogeneous { .. }
        | Error::GridTooCoarse { .. }
        | Error::NoUsableRadius
        | Error::InadmissibleRadii { .. } => 2,
        _ => 1,
    }
}

/// Outcome of a command: the JSON report, a one-line summary and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub summary: String,
    pub code: i32,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let config = match load_config(cli.config.as_deref(), cli.command, &cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match run(&config) {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.report).expect("report serializes");
            println!("{text}");
            let dir = config.output_dir();
            if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(dir.join("report.json"), format!("{text}\n"))) {
                eprintln!("error: cannot write report: {e}");
                return 1;
            }
            eprintln!("{}", out.summary);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("METIVIER_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn load_config(path: Option<&Path>, command: Option<Command>, flags: &RunConfig) -> Result<RunConfig> {
    let base = match path {
        Some(p) => RunConfig::from_json_str(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    let mut config = base.overlay(flags);
    if command.is_some() {
        config.command = command;
    }
    Ok(config)
}

/// Runs the configured command.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    match config.command {
        Some(Command::Spectrum) => cmd_spectrum(config),
        Some(Command::Verify) => cmd_verify(config),
        Some(Command::Reconstruct) => cmd_reconstruct(config),
        Some(Command::Radii) => cmd_radii(config),
        Some(Command::Counterexample) => cmd_counterexample(config),
        None => Err(Error::InvalidArgument("no command given".into())),
    }
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<Outcome> {
    let name = config.structure.clone().unwrap_or_else(|| "heisenberg:1".into());
    let s = MetivierStructure::from_ref(&name)?;
    let lambda = match &config.lambda {
        Some(l) => l.clone(),
        None => {
            let mut l = vec![0.0; s.m];
            l[0] = 1.0;
            l
        }
    };
    let spec = symplectic_spectrum(&s, &lambda)?;
    let v = v_lambda(&s, &lambda)?;
    let orth = spec.orthogonality_residual();
    let inter = spec.intertwining_residual(&v);
    let report = json!({
        "command": "spectrum",
        "structure": name,
        "n": s.n,
        "m": s.m,
        "lambda": lambda,
        "mu": spec.mu,
        "lambda_prime": lambda_prime_of(&spec),
        "a_lambda": matrix_rows(&spec.a_mat),
        "orthogonality_residual": orth,
        "intertwining_residual": inter,
    });
    let summary = format!("spectrum: mu = {:?}, residuals {orth:.2e} / {inter:.2e}", spec.mu);
    Ok(Outcome { report, summary, code: 0 })
}

pub fn cmd_verify(config: &RunConfig) -> Result<Outcome> {
    let mut plan = verify::VerifyPlan::default_plan()?;
    plan.grid = config.grid(1)?;
    if let Some(k) = config.k_max {
        plan.k_max = k;
    }
    if let Some(r) = &config.radii {
        plan.radii = r.clone();
    }
    plan.tolerance = config.tolerance;
    if let Some(s) = config.seed {
        plan.seed = s;
    }
    if let Some(t) = config.test_points {
        plan.test_points = t;
    }
    let suites = verify::run_all(&plan)?;
    let failed: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
    let mut summary = String::new();
    for s in &suites {
        summary.push_str(&format!(
            "{:<28} {}  max error {:.3e} (tolerance {:.1e})\n",
            s.name,
            if s.passed { "pass" } else { "FAIL" },
            s.max_error,
            s.tolerance
        ));
    }
    if failed.is_empty() {
        summary.push_str("all identities verified");
    } else {
        summary.push_str(&format!("failed: {}", failed.join(", ")));
    }
    let report = json!({
        "command": "verify",
        "seed": plan.seed,
        "k_max": plan.k_max,
        "radii": plan.radii,
        "grid": plan.grid.spec(),
        "suites": suites,
        "all_passed": failed.is_empty(),
    });
    Ok(Outcome {
        report,
        summary,
        code: if failed.is_empty() { 0 } else { 3 },
    })
}

fn load_input(config: &RunConfig) -> Result<SampledField> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("reconstruct needs --input".into()))?;
    if let Some(rest) = input.strip_prefix("builtin:") {
        let n = config.n.unwrap_or(1);
        let grid = config.grid(n)?;
        let lp = config.lambda_prime(n);
        if rest == "gaussian" {
            return sample(|z| C64::new((-z.iter().map(|w| w.norm_sqr()).sum::<f64>()).exp(), 0.0), &grid);
        }
        if let Some(k) = rest.strip_prefix("theta:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad degree in {input}")))?;
            return crate::fields::try_sample(|z| Ok(C64::new(theta_k(k, &lp, z)?, 0.0)), &grid);
        }
        return Err(Error::InvalidArgument(format!("unknown built-in field {input}")));
    }
    read_field(input)?.into_sampled()
}

#[derive(Serialize)]
struct DegreeRow<'a> {
    #[serde(flatten)]
    inner: &'a DegreeRecovery,
}

pub fn cmd_reconstruct(config: &RunConfig) -> Result<Outcome> {
    let f = load_input(config)?;
    let n = f.n();
    let lp = config.lambda_prime(n);
    let radii = config.radii.clone().unwrap_or_else(|| vec![1.0]);
    let weights = match &config.weights {
        Some(w) if w.len() != radii.len() => {
            return Err(Error::DimensionMismatch(format!("{} weights for {} radii", w.len(), radii.len())))
        }
        Some(w) => w.clone(),
        None => vec![1.0 / radii.len() as f64; radii.len()],
    };
    let mu = RadialMeasure::new(radii.into_iter().zip(weights).collect())?;
    let k_max = config.k_max.unwrap_or(25);
    let order = if n == 1 { 64 } else { 24 };
    let mean = measure_mean(&f, &mu, &lp, &rules_for(&mu, n, order)?)?;
    let rec = reconstruct_from_means(MeanData::Measure(&mu, &mean), &lp, k_max)?;
    let error = rec.field.relative_l2_error(&f)?;
    let dir = config.output_dir();
    std::fs::create_dir_all(&dir)?;
    write_field(&rec.field, dir.join("reconstruction.field"), config.encoding.unwrap_or_default())?;
    let degrees: Vec<DegreeRow> = rec.degrees.iter().map(|d| DegreeRow { inner: d }).collect();
    let report = json!({
        "command": "reconstruct",
        "input": config.input,
        "lambda_prime": lp,
        "measure": mu,
        "k_max": k_max,
        "relative_l2_error": error,
        "unrecoverable": rec.unrecoverable,
        "degrees": degrees,
        "field_file": "reconstruction.field",
    });
    let summary = format!(
        "reconstruct: relative L2 error {error:.3e}, unrecoverable degrees {:?}",
        rec.unrecoverable
    );
    Ok(Outcome { report, summary, code: 0 })
}

pub fn cmd_radii(config: &RunConfig) -> Result<Outcome> {
    let radii = config
        .radii
        .clone()
        .ok_or_else(|| Error::InvalidArgument("radii needs --radii r1,r2".into()))?;
    if radii.len() != 2 {
        return Err(Error::InvalidArgument(format!("expected two radii, got {}", radii.len())));
    }
    let n = config.n.unwrap_or_else(|| config.lambda_prime.as_ref().map_or(1, |l| l.len()));
    let lp = config.lambda_prime(n);
    let defaults = RadiiBounds::default();
    let bounds = RadiiBounds {
        k_max: config.k_max.unwrap_or(defaults.k_max),
        n_max: config.n_max.unwrap_or(defaults.n_max),
        tol: config.tolerance.unwrap_or(defaults.tol),
    };
    let verdict = two_radii_check(radii[0], radii[1], n, &lp, bounds)?;
    let dir = config.output_dir();
    std::fs::create_dir_all(&dir)?;
    verdict.write_csv(std::fs::File::create(dir.join("radii.csv"))?)?;
    let summary = format!(
        "radii ({}, {}): {} ({} Laguerre, {} Bessel conflicts)",
        radii[0],
        radii[1],
        if verdict.admissible_within_bounds { "admissible within bounds" } else { "inadmissible" },
        verdict.laguerre_conflicts.len(),
        verdict.bessel_conflicts.len()
    );
    let mut report = serde_json::to_value(&verdict)?;
    report["command"] = json!("radii");
    report["csv_file"] = json!("radii.csv");
    Ok(Outcome { report, summary, code: 0 })
}

pub fn cmd_counterexample(config: &RunConfig) -> Result<Outcome> {
    let l = config
        .l
        .ok_or_else(|| Error::InvalidArgument("counterexample needs --l".into()))?;
    let n = config.n.unwrap_or_else(|| config.lambda_prime.as_ref().map_or(1, |v| v.len()));
    let lp = config.lambda_prime(n);
    let grid = config.grid(n)?;
    let ce = one_radius_counterexample(l, &lp, &grid)?;
    let dir = config.output_dir();
    std::fs::create_dir_all(&dir)?;
    write_field(&ce.field, dir.join("counterexample.field"), config.encoding.unwrap_or_default())?;
    let report = json!({
        "command": "counterexample",
        "l": l,
        "lambda_prime": lp,
        "radius": ce.radius,
        "radii": ce.radii,
        "residual": ce.residual,
        "field_file": "counterexample.field",
    });
    let summary = format!("counterexample: theta_{l} annihilated at r = {:.12}, residual {:.3e}", ce.radius, ce.residual);
    Ok(Outcome { report, summary, code: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> RunConfig {
        RunConfig {
            command: Some(command),
            output: Some(tempfile::tempdir().unwrap().keep()),
            ..Default::default()
        }
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_json_str(r#"{"command":"radii","radii":[1,2],"k_max":10,"seed":5}"#).unwrap();
        let flags = RunConfig {
            k_max: Some(12),
            ..Default::default()
        };
        let c = file.overlay(&flags);
        assert_eq!(c.k_max, Some(12));
        assert_eq!(c.seed, Some(5));
        assert_eq!(c.command, Some(Command::Radii));
        assert!(RunConfig::from_json_str(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let mut c = cfg(Command::Spectrum);
        c.structure = Some("heisenberg".into());
        c.lambda = Some(vec![1.0]);
        let out = run(&c).unwrap();
        assert_eq!(out.report["mu"], json!([1.0]));

        c.structure = Some("quaternionic".into());
        c.lambda = Some(vec![0.0, 0.0, 2.0]);
        let out = run(&c).unwrap();
        let mu: Vec<f64> = serde_json::from_value(out.report["mu"].clone()).unwrap();
        assert!(mu.iter().all(|m| (m - 2.0).abs() < 1e-10));

        c.structure = Some("product-counterexample".into());
        c.lambda = Some(vec![1.0, 0.0]);
        assert_eq!(exit_code(&run(&c).unwrap_err()), 2);
    }

    #[test]
    fn radii_examples() {
        let mut c = cfg(Command::Radii);
        c.radii = Some(vec![1.0, 2.0]);
        let out = run(&c).unwrap();
        assert_eq!(out.report["admissible_within_bounds"], json!(true));
        c.radii = Some(vec![2.404825557695773, 5.520078110286311]);
        let out = run(&c).unwrap();
        assert_eq!(out.report["admissible_within_bounds"], json!(false));
        c.radii = Some(vec![1.0, 0.0]);
        assert_eq!(exit_code(&run(&c).unwrap_err()), 1);
    }

    #[test]
    fn counterexample_examples() {
        let mut c = cfg(Command::Counterexample);
        c.l = Some(1);
        c.radial = Some(vec![64]);
        c.angular = Some(vec![128]);
        let out = run(&c).unwrap();
        assert!(out.report["residual"].as_f64().unwrap() < 1e-8);
        c.l = Some(0);
        assert_eq!(exit_code(&run(&c).unwrap_err()), 1);
        c.l = Some(3);
        c.lambda_prime = Some(vec![2.0]);
        let out = run(&c).unwrap();
        let radii: Vec<f64> = serde_json::from_value(out.report["radii"].clone()).unwrap();
        let zeros = crate::special::laguerre_zeros(3, 0).unwrap().zeros;
        for (r, x) in radii.iter().zip(zeros) {
            assert!((r - x.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let mut c = cfg(Command::Reconstruct);
        c.input = Some("builtin:gaussian".into());
        c.radial = Some(vec![64]);
        c.angular = Some(vec![128]);
        let out = run(&c).unwrap();
        assert!(out.report["relative_l2_error"].as_f64().unwrap() < 1e-3);
        assert_eq!(out.report["unrecoverable"], json!([]));

        c.radii = Some(vec![std::f64::consts::SQRT_2]);
        let out = run(&c).unwrap();
        assert_eq!(out.report["unrecoverable"], json!([1]));

        c.input = Some("/nonexistent/field.bin".into());
        assert_eq!(exit_code(&run(&c).unwrap_err()), 1);
    }

    #[test]
    fn verify_rejects_large_degree_and_reports_failures() {
        let mut c = cfg(Command::Verify);
        c.k_max = Some(41);
        assert_eq!(exit_code(&run(&c).unwrap_err()), 1);
    }

    #[test]
    fn parse_errors_exit_one() {
        assert_eq!(main_with_args(["metivier", "frobnicate"]), 1);
        assert_eq!(main_with_args(["metivier", "--help"]), 0);
    }
}
