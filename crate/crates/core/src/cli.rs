//! `hessrad` command line: thresholds, existence verdicts, solutions, traces and
//! the verification suite.
//!
//! Exit status: 0 success, 2 nonexistence from `solve`, 3 invalid input,
//! 4 numerical failure (including failed `verify` checks).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::asymptotics::{classify_existence, mu, threshold, Tolerances, EPS_LADDER};
use crate::error::{Error, Result};
use crate::format::{csv_row, json_line, json_num, json_opt};
use crate::operator::{Family, OperatorSpec};
use crate::profile::GProfile;
use crate::solution::{
    assemble_solution, log_grid, residual_report, Format, DEFAULT_POINTS, DEFAULT_R_OUT,
};
use crate::trajectory::shoot;
use crate::verify::{default_operators, render_table, run_suite};

pub const CONFIG_ENV: &str = "HESSRAD_CONFIG";
pub const EXIT_OK: u8 = 0;
pub const EXIT_NONEXISTENCE: u8 = 2;
pub const EXIT_PARAMETER: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

const DEFAULT_BAND: f64 = 1e-9;
const DEFAULT_GRID: usize = 64;

#[derive(Debug, Parser)]
#[command(
    name = "hessrad",
    version,
    about = "Radial solutions of f(λ(D²u)) = 1 outside the unit ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print c* with f(c*, …, c*) = 1.
    Cstar,
    /// Tabulate the profile g and g′ as CSV.
    Gprofile,
    /// Trace W(r) = u′/r for --alpha as CSV.
    Trace,
    /// μ(α) = ∫₁^∞ s (W − c*) ds for --alpha.
    Mu,
    /// Threshold c₀ for boundary value --b.
    Threshold,
    /// Decide whether a solution with asymptotic constant --c exists.
    Classify,
    /// Classify, then assemble and check the solution.
    Solve,
    /// Run the oracle suite.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    SigmaK,
    HessianQuotient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Every option, shared by all subcommands; each one can also come from the
/// config file under the same name.
#[derive(Debug, Default, clap::Args)]
struct Opts {
    #[arg(long, global = true, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    l: Option<usize>,
    /// ODE tolerance [1e-13, 1e-6].
    #[arg(long = "ode-tol", visible_alias = "tol", global = true)]
    ode_tol: Option<f64>,
    /// Quadrature tolerance [1e-13, 1e-4].
    #[arg(long = "quad-tol", global = true)]
    quad_tol: Option<f64>,
    /// Root-finding tolerance [1e-13, 1e-4].
    #[arg(long = "root-tol", global = true)]
    root_tol: Option<f64>,
    /// Tolerance on c − c₀ in the existence test.
    #[arg(long, global = true)]
    band: Option<f64>,
    /// Grid points for solutions and traces.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Outer radius of the solution grid.
    #[arg(long = "r-out", global = true)]
    r_out: Option<f64>,
    /// Outer radius of traces.
    #[arg(long, global = true)]
    rmax: Option<f64>,
    /// Rows of the g profile table.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Write the main result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Operators for verify, e.g. `3:2,3:3,4:3:1` (three numbers: Hessian quotient).
    #[arg(long, global = true)]
    set: Option<String>,
    /// Run verify checks in parallel.
    #[arg(long, global = true)]
    parallel: bool,
    /// key=value file with defaults for any option; also taken from $HESSRAD_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Options after merging flags, config file and defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub family: Family,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub tol: Tolerances,
    pub band: f64,
    pub points: usize,
    pub r_out: f64,
    pub rmax: f64,
    pub grid: usize,
    pub alpha: Option<f64>,
    pub b: f64,
    pub c: Option<f64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub set: Option<String>,
    pub parallel: bool,
}

const CONFIG_KEYS: [&str; 19] = [
    "family", "n", "k", "l", "ode_tol", "quad_tol", "root_tol", "band", "points", "r_out", "rmax",
    "grid", "alpha", "b", "c", "format", "output", "set", "parallel",
];

/// Parse a flat `key = value` file; `#` starts a comment, `-` and `_` in keys are
/// interchangeable, and `tol` means `ode_tol`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parameter(format!("config line {}: expected key=value", i + 1))
        })?;
        let mut key = key.trim().replace('-', "_");
        if key == "tol" {
            key = "ode_tol".into();
        }
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Parameter(format!(
                "config line {}: unknown key `{key}`",
                i + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    file.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Parameter(format!("config value `{v}` for `{key}` is invalid")))
        })
        .transpose()
}

impl RunConfig {
    fn resolve(opts: Opts, file: &BTreeMap<String, String>) -> Result<Self> {
        let family = match opts.family {
            Some(FamilyArg::SigmaK) => Family::SigmaK,
            Some(FamilyArg::HessianQuotient) => Family::HessianQuotient,
            None => match file.get("family").map(String::as_str) {
                None | Some("sigma-k") => Family::SigmaK,
                Some("hessian-quotient") => Family::HessianQuotient,
                Some(other) => return Err(Error::Parameter(format!("unknown family `{other}`"))),
            },
        };
        let format = match opts.format {
            Some(FormatArg::Csv) => Some(Format::Csv),
            Some(FormatArg::Json) => Some(Format::Json),
            None => match file.get("format").map(String::as_str) {
                None => None,
                Some("csv") => Some(Format::Csv),
                Some("json") => Some(Format::Json),
                Some(other) => return Err(Error::Parameter(format!("unknown format `{other}`"))),
            },
        };
        let defaults = Tolerances::default();
        let tol = Tolerances {
            ode_tol: pick(opts.ode_tol, file, "ode_tol")?.unwrap_or(defaults.ode_tol),
            quad_tol: pick(opts.quad_tol, file, "quad_tol")?.unwrap_or(defaults.quad_tol),
            root_tol: pick(opts.root_tol, file, "root_tol")?.unwrap_or(defaults.root_tol),
        };
        tol.validate()?;
        let cfg = Self {
            family,
            n: pick(opts.n, file, "n")?,
            k: pick(opts.k, file, "k")?,
            l: pick(opts.l, file, "l")?,
            tol,
            band: pick(opts.band, file, "band")?.unwrap_or(DEFAULT_BAND),
            points: pick(opts.points, file, "points")?.unwrap_or(DEFAULT_POINTS),
            r_out: pick(opts.r_out, file, "r_out")?.unwrap_or(DEFAULT_R_OUT),
            rmax: pick(opts.rmax, file, "rmax")?.unwrap_or(DEFAULT_R_OUT),
            grid: pick(opts.grid, file, "grid")?.unwrap_or(DEFAULT_GRID),
            alpha: pick(opts.alpha, file, "alpha")?,
            b: pick(opts.b, file, "b")?.unwrap_or(0.0),
            c: pick(opts.c, file, "c")?,
            format,
            output: opts.output.or(from_file(file, "output")?),
            set: opts.set.or(from_file(file, "set")?),
            parallel: opts.parallel || from_file(file, "parallel")?.unwrap_or(false),
        };
        if !(cfg.band >= 0.0) || !cfg.b.is_finite() {
            return Err(Error::Parameter(format!(
                "band = {}, b = {}",
                cfg.band, cfg.b
            )));
        }
        Ok(cfg)
    }

    pub fn operator(&self) -> Result<OperatorSpec> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::Parameter(format!("--{name} is required")))
        };
        let n = need(self.n, "n")?;
        let k = need(self.k, "k")?;
        let l = match self.family {
            Family::SigmaK => self.l.unwrap_or(0),
            Family::HessianQuotient => need(self.l, "l")?,
        };
        OperatorSpec::new(self.family, n, k, l)
    }

    fn require(&self, v: Option<f64>, name: &str) -> Result<f64> {
        v.ok_or_else(|| Error::Parameter(format!("--{name} is required")))
    }
}

fn pick<T: FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => from_file(file, key),
    }
}

/// Parse `3:2,3:3,4:3:1`.
pub fn parse_set(text: &str) -> Result<Vec<OperatorSpec>> {
    text.split(',')
        .map(|item| {
            let nums: Vec<usize> = item
                .trim()
                .split(':')
                .map(|x| x.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parameter(format!("bad operator `{item}` in --set")))?;
            match nums[..] {
                [n, k] => OperatorSpec::sigma_k(n, k),
                [n, k, l] => OperatorSpec::hessian_quotient(n, k, l),
                _ => Err(Error::Parameter(format!("bad operator `{item}` in --set"))),
            }
        })
        .collect()
}

/// Run the command line `args` (program name first). Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARAMETER,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_PARAMETER
            }
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<BTreeMap<String, String>> {
    let env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    match path.map(Path::to_path_buf).or(env) {
        Some(p) => {
            let text = fs::read_to_string(&p).map_err(|e| {
                Error::Parameter(format!("cannot read config {}: {e}", p.display()))
            })?;
            parse_config(&text)
        }
        None => Ok(BTreeMap::new()),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let file = load_config(cli.opts.config.as_deref())?;
    let cfg = RunConfig::resolve(cli.opts, &file)?;
    match cli.command {
        Command::Verify => return verify(&cfg, out),
        Command::Cstar => {
            let op = cfg.operator()?;
            let mut m = Map::new();
            m.insert("c_star".into(), json_num(op.c_star()));
            emit(&cfg, out, &(json_line(&Value::Object(m)) + "\n"))?;
            return Ok(EXIT_OK);
        }
        _ => {}
    }
    let op = cfg.operator()?;
    let profile = GProfile::build(op, cfg.grid.max(crate::profile::MIN_GRID))?;
    match cli.command {
        Command::Gprofile => {
            let mut text = String::from("gamma,g,gprime\n");
            for row in profile.table() {
                text.push_str(&csv_row(&[row.gamma, row.g, row.gprime]));
                text.push('\n');
            }
            emit(&cfg, out, &text)?;
        }
        Command::Trace => {
            let alpha = cfg.require(cfg.alpha, "alpha")?;
            if !(cfg.rmax > 1.0) || cfg.points < 2 {
                return Err(Error::Parameter("need --rmax > 1 and --points ≥ 2".into()));
            }
            let tr = shoot(&profile, alpha, &cfg.tol.trajectory())?;
            let mut text = String::from("r,W\n");
            for r in log_grid(cfg.rmax, cfg.points) {
                text.push_str(&csv_row(&[r, tr.w_at(r)]));
                text.push('\n');
            }
            emit(&cfg, out, &text)?;
        }
        Command::Mu => {
            let alpha = cfg.require(cfg.alpha, "alpha")?;
            let value = mu(&profile, alpha, &cfg.tol)?;
            let mut m = Map::new();
            m.insert("alpha".into(), json_num(alpha));
            m.insert("mu".into(), json_num(value));
            emit(&cfg, out, &(json_line(&Value::Object(m)) + "\n"))?;
        }
        Command::Threshold => {
            let thr = threshold(&profile, &cfg.tol)?;
            let mut diag = Map::new();
            diag.insert(
                "tail_fraction_of_mu".into(),
                json_num(thr.tail_fraction_of_mu),
            );
            diag.insert(
                "extrapolation_spread".into(),
                json_num(thr.extrapolation_spread),
            );
            diag.insert(
                "alpha_min_is_gamma0".into(),
                Value::Bool(thr.alpha_min_is_gamma0),
            );
            let mut m = Map::new();
            m.insert("gamma0".into(), json_num(thr.gamma0));
            m.insert("alpha_min".into(), json_num(thr.alpha_min));
            m.insert("mu_min".into(), json_num(thr.mu_min));
            m.insert("b".into(), json_num(cfg.b));
            m.insert("c0".into(), json_num(thr.c0(cfg.b)));
            m.insert("diagnostics".into(), Value::Object(diag));
            emit(&cfg, out, &(json_line(&Value::Object(m)) + "\n"))?;
        }
        Command::Classify | Command::Solve => {
            let c = cfg.require(cfg.c, "c")?;
            let thr = threshold(&profile, &cfg.tol)?;
            let verdict = classify_existence(&profile, &thr, cfg.b, c, cfg.band, &cfg.tol)?;
            let mut m = Map::new();
            m.insert("c".into(), json_num(c));
            m.insert("c0".into(), json_num(verdict.c0));
            m.insert("exists".into(), Value::Bool(verdict.exists));
            m.insert("alpha".into(), json_opt(verdict.alpha));
            m.insert("margin".into(), json_num(verdict.margin));
            let line = json_line(&Value::Object(m)) + "\n";
            if matches!(cli.command, Command::Classify) {
                emit(&cfg, out, &line)?;
                return Ok(EXIT_OK);
            }
            let Some(alpha) = verdict.alpha else {
                write!(out, "{line}")?;
                writeln!(err, "no solution: c = {c} is below c0 = {}", verdict.c0)?;
                return Ok(EXIT_NONEXISTENCE);
            };
            // c = c₀ can put α_min on the floor itself; use the innermost ladder point
            let alpha = if alpha <= profile.floor() {
                let nudged = thr.alpha_min + EPS_LADDER[2] * profile.c_star().max(1.0);
                writeln!(
                    err,
                    "note: c is at the threshold; assembling at alpha = {nudged}"
                )?;
                nudged
            } else {
                alpha
            };
            let sol = assemble_solution(&profile, alpha, cfg.b, cfg.r_out, cfg.points, &cfg.tol)?;
            let report = json_line(&residual_report(&sol).to_json()) + "\n";
            let body = sol.render(cfg.format.unwrap_or(Format::Csv));
            match &cfg.output {
                Some(path) => {
                    fs::write(path, body)?;
                    write!(out, "{report}")?;
                }
                None => {
                    write!(out, "{body}")?;
                    write!(err, "{report}")?;
                }
            }
        }
        Command::Cstar | Command::Verify => unreachable!("handled above"),
    }
    Ok(EXIT_OK)
}

fn verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8> {
    let ops = match (&cfg.set, cfg.n) {
        (Some(set), _) => parse_set(set)?,
        (None, Some(_)) => vec![cfg.operator()?],
        (None, None) => default_operators(),
    };
    let results = run_suite(&ops, &cfg.tol, cfg.parallel)?;
    emit(cfg, out, &render_table(&results))?;
    Ok(if results.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}

fn emit(cfg: &RunConfig, out: &mut dyn Write, text: &str) -> Result<()> {
    match &cfg.output {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
