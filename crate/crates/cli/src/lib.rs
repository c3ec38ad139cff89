//! Command-line front end: validate channel specs, report the twelve rates,
//! sweep channel families and print compensation plans.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 invalid channel,
//! 3 internal assertion.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use axcomp::channel::UNITAL_TOL;
use axcomp::optimize::AccurateSetting;
use axcomp::rates::{
    bb84_g1, bb84_g2, bb84_j1, bb84_j2, six_state_f1, six_state_f2, Warning,
};
use axcomp::{
    family, full_report, validate_unital_cp, QubitChannel, RateKind, RateReport, SearchConfig,
    UnitalChannel,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod output;
pub mod spec;

use output::{fmt_f64, num, ChannelDoc, ConfigDoc, Num, PauliDoc, PlanDoc, RateDoc, ReportDocument};
use spec::{parse_channel, resolve_family, set_param, FamilySpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Channel(axcomp::Error),
    #[error("{0}")]
    Internal(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl From<axcomp::Error> for CliError {
    fn from(e: axcomp::Error) -> Self {
        use axcomp::Error as E;
        match e {
            E::AssertionFailure(m) => CliError::Internal(m),
            E::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Channel(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Channel(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "axcomp", version, about = "Key rates and axis compensation for unital qubit channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
pub struct SearchArgs {
    /// Euler-grid points per angle for the conventional one-side searches.
    #[arg(long, default_value_t = 24)]
    pub opt_grid: usize,
    /// Seed for the random restarts of the searches.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, CliError> {
        let cfg = SearchConfig {
            coarse_grid: self.opt_grid,
            seed: self.seed,
            ..SearchConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Stokes parameters, unitality and CP verdict of a channel spec.
    Validate {
        /// Channel-spec JSON file, or `-` for standard input.
        spec: PathBuf,
        #[arg(long, default_value_t = UNITAL_TOL)]
        unital_tol: f64,
    },
    /// Compute all twelve optimized rates with their compensation plans.
    Report {
        /// Channel-spec JSON file, or `-` for standard input.
        spec: PathBuf,
        #[arg(long, default_value_t = UNITAL_TOL)]
        unital_tol: f64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Tabulate raw rates along one parameter of a channel family as CSV.
    Sweep {
        /// identity, depolarizing, phase_flip, bit_flip or rotated_pauli.
        #[arg(long)]
        family: String,
        /// Parameter to vary; `name.k` addresses entry k of an array parameter.
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of evenly spaced points, endpoints included.
        #[arg(long)]
        steps: usize,
        /// JSON object with the remaining family parameters.
        #[arg(long)]
        params: Option<String>,
        /// Comma-separated subset of rate columns.
        #[arg(long, value_delimiter = ',')]
        settings: Option<Vec<String>>,
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Print the optimal compensation for one setting and the compensated channel.
    Compensate {
        /// Channel-spec JSON file, or `-` for standard input.
        spec: PathBuf,
        /// One of f1, f2, g1, g2, j1, j2.
        #[arg(long)]
        setting: String,
        #[arg(long, default_value_t = UNITAL_TOL)]
        unital_tol: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Validate { spec, unital_tol } => cmd_validate(spec, *unital_tol, out),
        Command::Report {
            spec,
            unital_tol,
            search,
            format,
        } => cmd_report(spec, *unital_tol, &search.config()?, *format, out),
        Command::Sweep {
            family,
            param,
            from,
            to,
            steps,
            params,
            settings,
            out: path,
            search,
        } => {
            let sweep = Sweep {
                family: family.clone(),
                param: param.clone(),
                from: *from,
                to: *to,
                steps: *steps,
                params: params.clone(),
                settings: settings.clone(),
            };
            let cfg = search.config()?;
            match path {
                Some(p) => {
                    let mut buf = Vec::new();
                    cmd_sweep(&sweep, &cfg, &mut buf)?;
                    fs::write(p, buf)?;
                    Ok(0)
                }
                None => cmd_sweep(&sweep, &cfg, out),
            }
        }
        Command::Compensate {
            spec,
            setting,
            unital_tol,
        } => cmd_compensate(spec, setting, *unital_tol, out),
    }
}

fn read_spec(path: &Path) -> Result<QubitChannel, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?
    };
    parse_channel(&text)
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct WeightDoc {
    component: &'static str,
    value: Num,
}

#[derive(Serialize)]
struct ValidateDoc {
    valid: bool,
    channel: ChannelDoc,
    unital: bool,
    t_norm: Num,
    completely_positive: Option<bool>,
    pauli: Option<PauliDoc>,
    min_weight: Option<WeightDoc>,
    error: Option<String>,
}

/// Exit 0 for a completely positive unital channel, 2 otherwise.
pub fn cmd_validate(spec: &Path, unital_tol: f64, out: &mut dyn Write) -> Result<i32, CliError> {
    let c = read_spec(spec)?;
    let t_norm = c.vector().norm();
    let unital = t_norm <= unital_tol;
    let (valid, error) = match validate_unital_cp(&c, unital_tol) {
        Ok(_) => (true, None),
        Err(e) => (false, Some(e.to_string())),
    };
    // Bell weights of the signed-SVD core; they decide CP only when t = 0.
    let pauli = unital.then(|| {
        let svd = axcomp::signed_svd3(c.matrix());
        axcomp::PauliDistribution::from_diagonal(&svd.e)
    });
    let doc = ValidateDoc {
        valid,
        channel: ChannelDoc::new(&c),
        unital,
        t_norm: num(t_norm),
        completely_positive: pauli.map(|q| q.min().1 >= -axcomp::channel::CP_TOL),
        pauli: pauli.as_ref().map(PauliDoc::new),
        min_weight: pauli.map(|q| {
            let (component, value) = q.min();
            WeightDoc {
                component,
                value: num(value),
            }
        }),
        error,
    };
    write_json(&doc, out)?;
    Ok(if valid { 0 } else { 2 })
}

fn config_doc(unital_tol: f64, cfg: &SearchConfig) -> ConfigDoc {
    ConfigDoc {
        unital_tol: num(unital_tol),
        opt_grid: cfg.coarse_grid,
        refine_iters: cfg.refine_iters,
        tol: num(cfg.tol),
        seed: cfg.seed,
    }
}

fn csv_header(kinds: &[RateKind]) -> String {
    kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
}

fn csv_values(r: &RateReport, kinds: &[RateKind]) -> String {
    kinds
        .iter()
        .map(|&k| fmt_f64(r.get(k).value.raw))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn report_for(c: &QubitChannel, unital_tol: f64, cfg: &SearchConfig) -> Result<RateReport, CliError> {
    let u = UnitalChannel::with_tolerance(*c, unital_tol)?;
    Ok(full_report(&u, cfg)?)
}

/// Full report as JSON, or as a one-row CSV of raw rates.
pub fn cmd_report(
    spec: &Path,
    unital_tol: f64,
    cfg: &SearchConfig,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let c = read_spec(spec)?;
    let report = report_for(&c, unital_tol, cfg)?;
    match format {
        Format::Json => {
            write_json(&ReportDocument::new(&c, config_doc(unital_tol, cfg), &report), out)?
        }
        Format::Csv => {
            writeln!(out, "{}", csv_header(&RateKind::ALL))?;
            writeln!(out, "{}", csv_values(&report, &RateKind::ALL))?;
        }
    }
    Ok(0)
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub family: String,
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub params: Option<String>,
    pub settings: Option<Vec<String>>,
}

impl Sweep {
    fn kinds(&self) -> Result<Vec<RateKind>, CliError> {
        match &self.settings {
            None => Ok(RateKind::ALL.to_vec()),
            Some(list) => {
                let mut kinds = Vec::new();
                for s in list {
                    let k = RateKind::parse(s.trim())
                        .ok_or_else(|| CliError::Usage(format!("unknown rate column {s:?}")))?;
                    if !kinds.contains(&k) {
                        kinds.push(k);
                    }
                }
                if kinds.is_empty() {
                    return Err(CliError::Usage("--settings selects no columns".into()));
                }
                Ok(kinds)
            }
        }
    }

    /// Parameter value of row `i`, evenly spaced with both ends included.
    pub fn value(&self, i: usize) -> f64 {
        if self.steps == 1 {
            self.from
        } else {
            self.from + (self.to - self.from) * i as f64 / (self.steps - 1) as f64
        }
    }
}

/// CSV of raw rates, one row per parameter value.
pub fn cmd_sweep(sweep: &Sweep, cfg: &SearchConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    if sweep.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !(sweep.from.is_finite() && sweep.to.is_finite()) {
        return Err(CliError::Usage("--from and --to must be finite".into()));
    }
    let kinds = sweep.kinds()?;
    let params = match &sweep.params {
        None => serde_json::Map::new(),
        Some(text) => serde_json::from_str(text)
            .map_err(|e| CliError::Parse(format!("--params must be a JSON object: {e}")))?,
    };
    let base = FamilySpec {
        name: sweep.family.clone(),
        params,
    };
    // Buffered so that a failure at any row leaves no partial table behind.
    let mut table = format!("param,{}\n", csv_header(&kinds));
    for i in 0..sweep.steps {
        let x = sweep.value(i);
        let mut spec = base.clone();
        set_param(&mut spec, &sweep.param, x)?;
        let c = family(&resolve_family(&spec)?)?;
        let report = report_for(&c, UNITAL_TOL, cfg)?;
        table.push_str(&format!("{},{}\n", fmt_f64(x), csv_values(&report, &kinds)));
    }
    out.write_all(table.as_bytes())?;
    Ok(0)
}

#[derive(Serialize)]
struct CompensateDoc {
    setting: &'static str,
    rate: RateDoc,
    plan: PlanDoc,
    compensated: ChannelDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_star: Option<Vec<Num>>,
    warnings: Vec<String>,
}

/// Optimal plan for one setting. BB84 settings accept contractions that are
/// not completely positive and flag them with a warning.
pub fn cmd_compensate(
    spec: &Path,
    setting: &str,
    unital_tol: f64,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let setting = AccurateSetting::parse(setting).ok_or_else(|| {
        CliError::Usage(format!("unknown setting {setting:?}, expected f1, f2, g1, g2, j1 or j2"))
    })?;
    let c = read_spec(spec)?;
    let u = match setting {
        AccurateSetting::F1 | AccurateSetting::F2 => UnitalChannel::with_tolerance(c, unital_tol)?,
        _ => UnitalChannel::contraction_with_tolerance(c, unital_tol)?,
    };
    let mut warnings = Vec::new();
    if !u.is_cp() {
        let (component, value) = u.pauli().min();
        warnings.push(Warning::NotCompletelyPositive { component, value });
    }
    let mut s_star = None;
    let (value, plan) = match setting {
        AccurateSetting::F1 => six_state_f1(&u)?,
        AccurateSetting::F2 => six_state_f2(&u)?,
        AccurateSetting::G1 => bb84_g1(&u),
        AccurateSetting::G2 => bb84_g2(&u),
        AccurateSetting::J1 => {
            let (v, p, s, degenerate) = bb84_j1(&u);
            if degenerate {
                warnings.push(Warning::DegenerateColumns("j1"));
            }
            s_star = Some(output::vec3(&s));
            (v, p)
        }
        AccurateSetting::J2 => bb84_j2(&u),
    };
    let doc = CompensateDoc {
        setting: setting.name(),
        rate: RateDoc::new(&value),
        plan: PlanDoc::new(&plan),
        compensated: ChannelDoc::new(&plan.apply(u.channel())),
        s_star,
        warnings: warnings.iter().map(|w| w.to_string()).collect(),
    };
    write_json(&doc, out)?;
    Ok(0)
}
