//! Batch front end. [`run`] parses arguments, merges an optional flat JSON
//! config (flags win over the file, the file over built-in defaults), runs
//! one subcommand and returns the process exit code:
//! 0 success, 1 verification failure, 2 invalid input, 3 numerical failure.
//! Every failure writes one JSON line `{"code", "kind", "message"}` to the
//! error stream.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::classical::{
    classify_orbit, fall_time, far_field_state, impact_parameter_for_angle, integrate_orbit, orbit_rho,
    scattering_angle_3d, scattering_angle_planar, scattering_deflection, ClassicalError, IncomingRay, OrbitKind,
    PlanarState, PotentialSpec,
};
use crate::grid::{fmt17, GridError, GridSpec};
use crate::quantum_cyl::{field_grid_cyl, phase_shift, CylError, CylMode};
use crate::quantum_par::{field_grid_par, ParError, ParMode};
use crate::specfun::SpecfunError;
use crate::verify::{self, BatteryConfig, VerifyError};

pub const THREADS_ENV: &str = "RHO2LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum System {
    Cyl,
    Par,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Battery {
    Standard,
    Quick,
}

#[derive(Debug, Parser)]
#[command(name = "rho2lab", version, about = "Inverse-square cylindrical potential: orbits, scattering, wavefunction grids, verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of tabular outputs.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write a gnuplot script next to the CSV files.
    #[arg(long)]
    plot: bool,
    /// Flat JSON object of defaults; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate and classify a planar orbit.
    Orbit(OrbitArgs),
    /// Tables of classical deflections and quantum phase shifts.
    Scatter(ScatterArgs),
    /// Sample a separated wavefunction on a lattice.
    Field(FieldArgs),
    /// Run the finite-difference verification battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct OrbitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    rhodot0: Option<f64>,
    /// In-plane energy; used to build the start state when `--rho0` is absent.
    #[arg(long = "Eprime")]
    e_prime: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct ScatterArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long = "Eprime")]
    e_prime: Option<f64>,
    #[arg(long = "b-min")]
    b_min: Option<f64>,
    #[arg(long = "b-max")]
    b_max: Option<f64>,
    #[arg(long = "b-count")]
    b_count: Option<usize>,
    /// Impact parameter of the axial-velocity sweep.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long = "zdot-max")]
    zdot_max: Option<f64>,
    #[arg(long = "zdot-count")]
    zdot_count: Option<usize>,
    /// Comma-separated scaled strengths for the phase-shift table.
    #[arg(long = "K-values")]
    k_values: Option<String>,
    #[arg(long = "m-max")]
    m_max: Option<i32>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct FieldArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    system: Option<System>,
    #[arg(long)]
    m: Option<i32>,
    #[arg(long = "E")]
    e: Option<f64>,
    #[arg(long = "K")]
    big_k: Option<f64>,
    /// Axial wavenumber (cylindrical).
    #[arg(long)]
    k: Option<f64>,
    /// Separation constant (parabolic).
    #[arg(long = "C")]
    c: Option<f64>,
    /// Translation along z (parabolic).
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long = "rho-min")]
    rho_min: Option<f64>,
    #[arg(long = "rho-max")]
    rho_max: Option<f64>,
    #[arg(long = "z-min")]
    z_min: Option<f64>,
    #[arg(long = "z-max")]
    z_max: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "n-phi")]
    n_phi: Option<usize>,
    /// Add eta and xi columns.
    #[arg(long = "eta-xi")]
    eta_xi: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    battery: Option<Battery>,
    /// Number of lattice spacings (0.1, 0.05, 0.025, ...).
    #[arg(long)]
    steps: Option<usize>,
    /// Multiply E in every residual check (negative control).
    #[arg(long = "corrupt-energy")]
    corrupt_energy: Option<f64>,
}

/// Failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        CliError { code: 2, message: msg.into() }
    }

    fn numeric(msg: impl Into<String>) -> Self {
        CliError { code: 3, message: msg.into() }
    }

    fn kind(&self) -> &'static str {
        match self.code {
            1 => "verification_failed",
            2 => "invalid_input",
            _ => "numerical_failure",
        }
    }

    fn to_json_line(&self) -> String {
        json!({ "code": self.code, "kind": self.kind(), "message": self.message.replace('\n', " ") }).to_string()
    }
}

impl From<SpecfunError> for CliError {
    fn from(e: SpecfunError) -> Self {
        match e {
            SpecfunError::Convergence { .. } | SpecfunError::NonFinite(_) => CliError::numeric(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<ClassicalError> for CliError {
    fn from(e: ClassicalError) -> Self {
        match e {
            ClassicalError::Domain(_) | ClassicalError::Step(_) => CliError::numeric(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<CylError> for CliError {
    fn from(e: CylError) -> Self {
        match e {
            CylError::Special(s) => s.into(),
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<ParError> for CliError {
    fn from(e: ParError) -> Self {
        match e {
            ParError::Special(s) => s.into(),
            ParError::Quadrature(q) => CliError::numeric(q.to_string()),
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Cyl(c) => c.into(),
            VerifyError::Par(p) => p.into(),
            VerifyError::Special(s) => s.into(),
            VerifyError::Fit(m) => CliError::numeric(m),
            other => CliError::input(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::input(format!("{}: {e}", path.display()))
}

/// Flat key/value defaults read from `--config`.
#[derive(Debug, Default)]
struct Config(Map<String, Value>);

impl Config {
    fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let Value::Object(map) = v else {
            return Err(CliError::input(format!("{}: config must be a JSON object", path.display())));
        };
        for (key, val) in &map {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::input(format!("unknown config key '{key}'")));
            }
            if val.is_object() || val.is_array() {
                return Err(CliError::input(format!("config key '{key}' must be a plain value")));
            }
        }
        Ok(Config(map))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| CliError::input(format!("config key '{key}' must be a number"))),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.as_i64().map(Some).ok_or_else(|| CliError::input(format!("config key '{key}' must be an integer"))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(_) => Err(CliError::input(format!("config key '{key}' must be a string"))),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.0.get(key) {
            None => Ok(false),
            Some(v) => v.as_bool().ok_or_else(|| CliError::input(format!("config key '{key}' must be true or false"))),
        }
    }
}

fn pick_f64(flag: Option<f64>, cfg: &Config, key: &str) -> Result<Option<f64>, CliError> {
    let v = match flag {
        Some(v) => Some(v),
        None => cfg.f64(key)?,
    };
    if let Some(x) = v {
        if !x.is_finite() {
            return Err(CliError::input(format!("--{key} = {x} is not finite")));
        }
    }
    Ok(v)
}

fn pick_usize(flag: Option<usize>, cfg: &Config, key: &str) -> Result<Option<usize>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => match cfg.int(key)? {
            None => Ok(None),
            Some(v) => usize::try_from(v).map(Some).map_err(|_| CliError::input(format!("--{key} = {v} must be >= 0"))),
        },
    }
}

fn pick_i32(flag: Option<i32>, cfg: &Config, key: &str) -> Result<Option<i32>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => match cfg.int(key)? {
            None => Ok(None),
            Some(v) => i32::try_from(v).map(Some).map_err(|_| CliError::input(format!("--{key} = {v} is out of range"))),
        },
    }
}

fn pick_enum<T: ValueEnum>(flag: Option<T>, cfg: &Config, key: &str) -> Result<Option<T>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => match cfg.string(key)? {
            None => Ok(None),
            Some(s) => T::from_str(&s, true).map(Some).map_err(|_| CliError::input(format!("--{key}: invalid value '{s}'"))),
        },
    }
}

const COMMON_KEYS: [&str; 3] = ["out", "format", "plot"];

/// Settings shared by every subcommand after merging.
struct Output {
    dir: PathBuf,
    format: Format,
    plot: bool,
}

impl Output {
    fn resolve(c: &Common, cfg: &Config) -> Result<Self, CliError> {
        let dir = match &c.out {
            Some(p) => p.clone(),
            None => cfg.string("out")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
        };
        let format = pick_enum(c.format, cfg, "format")?.unwrap_or(Format::Csv);
        let plot = c.plot || cfg.flag("plot")?;
        if plot && format == Format::Json {
            return Err(CliError::input("--plot needs --format csv"));
        }
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Output { dir, format, plot })
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(io_err(&path))?;
        Ok(path)
    }

    /// Write `table` as `stem.csv` or `stem.json`.
    fn table(&self, stem: &str, table: &Table) -> Result<PathBuf, CliError> {
        match self.format {
            Format::Csv => self.write(&format!("{stem}.csv"), table.to_csv().as_bytes()),
            Format::Json => self.write(&format!("{stem}.json"), table.to_json().as_bytes()),
        }
    }
}

/// Numeric table with named columns; CSV cells use 17 significant digits.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), json!(v))).collect()))
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).unwrap_or_default();
        s.push('\n');
        s
    }
}

fn json_file(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s.into_bytes()
}

/// Entry point shared by the binary and the tests. `args` includes the
/// program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let _ = writeln!(err, "{}", CliError::input(first).to_json_line());
            return 2;
        }
    };
    let result = with_thread_cap(|| dispatch(cli)).and_then(|(paths, fail)| {
        for p in paths {
            let _ = writeln!(out, "{}", p.display());
        }
        fail.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json_line());
            e.code
        }
    }
}

fn with_thread_cap<R: Send>(f: impl FnOnce() -> Result<R, CliError> + Send) -> Result<R, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => f(),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::input(format!("{THREADS_ENV} = '{v}' must be a positive integer")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::input(format!("thread pool: {e}")))?;
            pool.install(f)
        }
    }
}

/// Runs one subcommand; returns the files written and the outcome.
fn dispatch(cli: Cli) -> Result<(Vec<PathBuf>, Option<CliError>), CliError> {
    Ok(match cli.cmd {
        Command::Orbit(a) => (cmd_orbit(&a)?, None),
        Command::Scatter(a) => (cmd_scatter(&a)?, None),
        Command::Field(a) => (cmd_field(&a)?, None),
        Command::Verify(a) => {
            let (paths, failed, total) = cmd_verify(&a)?;
            let fail = (failed > 0)
                .then(|| CliError { code: 1, message: format!("{failed} of {total} verification cases failed") });
            (paths, fail)
        }
    })
}

fn keys(extra: &[&'static str]) -> Vec<&'static str> {
    COMMON_KEYS.iter().chain(extra).copied().collect()
}

/// First positive root of `ρ²(t) = ρ₀² + 2ρ₀ρ̇₀ t + (2ℰ'/M) t²`.
fn rho_sq_root(rho0: f64, rhodot0: f64, e_prime: f64, mass: f64, target_sq: f64) -> Option<f64> {
    let a = 2.0 * e_prime / mass;
    let b = 2.0 * rho0 * rhodot0;
    let c = rho0 * rho0 - target_sq;
    if a == 0.0 {
        let t = -c / b;
        return (b != 0.0 && t > 0.0).then_some(t);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots.sort_by(|x, y| x.total_cmp(y));
    roots.into_iter().find(|t| *t > 0.0)
}

fn cmd_orbit(a: &OrbitArgs) -> Result<Vec<PathBuf>, CliError> {
    let cfg = Config::load(a.common.config.as_deref(), &keys(&["kappa", "mass", "L", "rho0", "rhodot0", "Eprime", "t-end", "dt"]))?;
    let outp = Output::resolve(&a.common, &cfg)?;
    let kappa = pick_f64(a.kappa, &cfg, "kappa")?.ok_or_else(|| CliError::input("--kappa is required"))?;
    let mass = pick_f64(a.mass, &cfg, "mass")?.unwrap_or(1.0);
    let l = pick_f64(a.l, &cfg, "L")?.ok_or_else(|| CliError::input("--L is required"))?;
    let spec = PotentialSpec::new(kappa, mass)?;
    let rho0 = pick_f64(a.rho0, &cfg, "rho0")?;
    let e_req = pick_f64(a.e_prime, &cfg, "Eprime")?;
    let lam = spec.effective_strength(l);
    // start state: explicit, else far inbound for scattering, else a turning point
    let (state, far_start) = match (rho0, e_req) {
        (Some(r), _) => (PlanarState::new(r, pick_f64(a.rhodot0, &cfg, "rhodot0")?.unwrap_or(0.0), l)?, false),
        (None, Some(e)) if e > 0.0 && lam > 0.0 => {
            let turn = (lam / e).sqrt();
            (far_field_state(&spec, e, l, 1e3 * turn)?, true)
        }
        (None, Some(e)) if e > 0.0 => (far_field_state(&spec, e, l, 10.0)?, true),
        (None, Some(e)) if e < 0.0 && lam < 0.0 => (PlanarState::new((lam / e).sqrt(), 0.0, l)?, false),
        (None, Some(e)) => {
            return Err(CliError::input(format!("Eprime = {e} with kappa + L^2/2M = {lam}: no start state, give --rho0")))
        }
        (None, None) => return Err(CliError::input("give --rho0 (and --rhodot0) or --Eprime")),
    };
    let e_prime = state.e_prime(&spec);
    let orbit = classify_orbit(&spec, &state)?;
    let capture_root = if lam < 0.0 || (lam == 0.0 && state.rho_dot < 0.0) {
        rho_sq_root(state.rho, state.rho_dot, e_prime, mass, 0.0)
    } else {
        None
    };
    let t_end = match pick_f64(a.t_end, &cfg, "t-end")? {
        Some(t) => t,
        None => match capture_root {
            // within the circle tolerance the capture root is spurious
            Some(t) if orbit.kind != OrbitKind::Circle => 1.05 * t,
            None if e_prime > 0.0 && orbit.kind != OrbitKind::Circle => {
                let target = if state.rho_dot < 0.0 { state.rho } else { 10.0 * state.rho };
                rho_sq_root(state.rho, state.rho_dot, e_prime, mass, target * target)
                    .filter(|t| *t > 0.0)
                    .unwrap_or(10.0)
            }
            _ => {
                if l != 0.0 {
                    10.0 * 2.0 * PI * mass * state.rho * state.rho / l.abs()
                } else {
                    10.0
                }
            }
        },
    };
    if !(t_end > 0.0) {
        return Err(CliError::input(format!("t-end = {t_end} must be positive")));
    }
    let dt = pick_f64(a.dt, &cfg, "dt")?.unwrap_or(t_end / 2000.0);
    let traj = integrate_orbit(&spec, &state, t_end, dt)?;

    let mut tt = Table::new(vec!["t", "rho", "phi", "z", "rho_dot", "e_prime", "L"]);
    for s in &traj.samples {
        tt.rows.push(vec![s.t, s.state.rho, s.state.phi, s.state.z, s.state.rho_dot, s.e_prime, s.state.l]);
    }
    let mut curve = Table::new(vec!["phi", "rho"]);
    let (p0, p1) = (traj.samples[0].state.phi, traj.last().state.phi);
    if orbit.kind != OrbitKind::Radial && p1 != p0 {
        let n = 400;
        for i in 0..=n {
            let phi = p0 + (p1 - p0) * i as f64 / n as f64;
            if let Ok(r) = orbit_rho(&orbit, phi) {
                curve.rows.push(vec![phi, r]);
            }
        }
    }
    let mut summary = json!({
        "kind": orbit.kind,
        "g": orbit.g,
        "amplitude": orbit.amplitude,
        "phase": orbit.phase,
        "exponent": orbit.exponent,
        "e_prime": e_prime,
        "L": l,
        "kappa": kappa,
        "mass": mass,
        "t_end": t_end,
        "dt": dt,
    });
    if matches!(orbit.kind, OrbitKind::ScatterSecant | OrbitKind::FreeLine) {
        summary["phi_scat"] = json!(scattering_angle_planar(&spec, l)?);
        if far_start {
            summary["phi_scat_integrated"] = json!(scattering_deflection(&spec, &traj));
        }
    }
    if let Some(cap) = traj.capture {
        summary["t_capture_integrated"] = json!(cap.t);
        let closed = if state.rho_dot <= 0.0 { fall_time(&spec, &state).ok() } else { capture_root };
        if let Some(tf) = closed {
            summary["t_f"] = json!(tf);
            summary["t_f_rel_diff"] = json!((cap.t - tf).abs() / tf);
        }
    }
    let mut paths = vec![outp.table("orbit_trajectory", &tt)?, outp.table("orbit_curve", &curve)?];
    paths.push(outp.write("orbit_summary.json", &json_file(&summary))?);
    if outp.plot {
        let script = "set datafile separator ','\nset key autotitle columnhead\nset size ratio -1\n\
            set xlabel 'x'\nset ylabel 'y'\n\
            plot 'orbit_trajectory.csv' using ($2*cos($3)):($2*sin($3)) with lines title 'integrated', \\\n     \
            'orbit_curve.csv' using ($2*cos($1)):($2*sin($1)) with points pt 7 ps 0.4 title 'closed form'\npause -1\n";
        paths.push(outp.write("orbit_plot.gp", script.as_bytes())?);
    }
    Ok(paths)
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::input(format!("bad number '{p}' in list"))))
        .collect()
}

fn cmd_scatter(a: &ScatterArgs) -> Result<Vec<PathBuf>, CliError> {
    let cfg = Config::load(
        a.common.config.as_deref(),
        &keys(&["kappa", "mass", "Eprime", "b-min", "b-max", "b-count", "b", "zdot-max", "zdot-count", "K-values", "m-max"]),
    )?;
    let outp = Output::resolve(&a.common, &cfg)?;
    let kappa = pick_f64(a.kappa, &cfg, "kappa")?.unwrap_or(1.0);
    let mass = pick_f64(a.mass, &cfg, "mass")?.unwrap_or(1.0);
    let spec = PotentialSpec::new(kappa, mass)?;
    let e_prime = pick_f64(a.e_prime, &cfg, "Eprime")?.unwrap_or(1.0);
    let b_min = pick_f64(a.b_min, &cfg, "b-min")?.unwrap_or(0.1);
    let b_max = pick_f64(a.b_max, &cfg, "b-max")?.unwrap_or(5.0);
    let b_count = pick_usize(a.b_count, &cfg, "b-count")?.unwrap_or(50);
    let b_fixed = pick_f64(a.b, &cfg, "b")?.unwrap_or(1.0);
    let zdot_max = pick_f64(a.zdot_max, &cfg, "zdot-max")?.unwrap_or(10.0);
    let zdot_count = pick_usize(a.zdot_count, &cfg, "zdot-count")?.unwrap_or(21);
    let k_values = match &a.k_values {
        Some(s) => parse_list(s)?,
        None => match cfg.string("K-values")? {
            Some(s) => parse_list(&s)?,
            None => vec![0.0, 1.0, 5.0],
        },
    };
    let m_max = pick_i32(a.m_max, &cfg, "m-max")?.unwrap_or(5);
    if !(e_prime > 0.0) {
        return Err(CliError::input(format!("Eprime = {e_prime} must be positive for scattering")));
    }
    if !(b_min > 0.0 && b_max > b_min) || b_count < 2 || zdot_count < 2 || !(zdot_max >= 0.0) || m_max < 0 {
        return Err(CliError::input("sweep ranges must be increasing with at least two points"));
    }
    if k_values.iter().any(|k| !(*k >= 0.0) || !k.is_finite()) {
        return Err(CliError::input("K values must be finite and >= 0"));
    }

    let mut planar = Table::new(vec!["b", "L", "phi_scat"]);
    for i in 0..b_count {
        let b = b_min + (b_max - b_min) * i as f64 / (b_count - 1) as f64;
        let ray = IncomingRay::from_impact(&spec, e_prime, 0.0, b)?;
        // capture rows (attractive, small b) have no deflection
        if let Ok(phi) = scattering_angle_planar(&spec, ray.l) {
            planar.rows.push(vec![b, ray.l, phi]);
        }
    }
    let mut axial = Table::new(vec!["z_dot", "theta_scat"]);
    for i in 0..zdot_count {
        let zd = zdot_max * i as f64 / (zdot_count - 1) as f64;
        let ray = IncomingRay::from_impact(&spec, e_prime, zd, b_fixed)?;
        axial.rows.push(vec![zd, scattering_angle_3d(&ray, &spec)?]);
    }
    let mut shifts = Table::new(vec!["K", "m", "delta"]);
    for &k in &k_values {
        for m in 0..=m_max {
            shifts.rows.push(vec![k, m as f64, phase_shift(m, k)]);
        }
    }
    let mut paths = vec![
        outp.table("scatter_planar", &planar)?,
        outp.table("scatter_axial", &axial)?,
        outp.table("phase_shifts", &shifts)?,
    ];
    if kappa > 0.0 {
        // closed-form inversion as a cross-check column set
        let mut inv = Table::new(vec!["phi", "b"]);
        for i in 1..20 {
            let phi = PI * i as f64 / 20.0;
            if let Ok(b) = impact_parameter_for_angle(&spec, e_prime, phi) {
                inv.rows.push(vec![phi, b]);
            }
        }
        paths.push(outp.table("scatter_inverse", &inv)?);
    }
    if outp.plot {
        let script = "set datafile separator ','\nset key autotitle columnhead\nset multiplot layout 1,2\n\
            set xlabel 'b'\nset ylabel 'phi_scat'\nplot 'scatter_planar.csv' using 1:3 with linespoints\n\
            set xlabel 'z_dot'\nset ylabel 'theta_scat'\nplot 'scatter_axial.csv' using 1:2 with linespoints\n\
            unset multiplot\npause -1\n";
        paths.push(outp.write("scatter_plot.gp", script.as_bytes())?);
    }
    Ok(paths)
}

fn cmd_field(a: &FieldArgs) -> Result<Vec<PathBuf>, CliError> {
    let cfg = Config::load(
        a.common.config.as_deref(),
        &keys(&[
            "system", "m", "E", "K", "k", "C", "shift", "rho-min", "rho-max", "z-min", "z-max", "h", "n-phi", "eta-xi",
        ]),
    )?;
    let outp = Output::resolve(&a.common, &cfg)?;
    let system = pick_enum(a.system, &cfg, "system")?.unwrap_or(System::Cyl);
    let m = pick_i32(a.m, &cfg, "m")?.unwrap_or(0);
    let e = pick_f64(a.e, &cfg, "E")?.unwrap_or(1.0);
    let big_k = pick_f64(a.big_k, &cfg, "K")?.unwrap_or(1.0);
    let rho = (pick_f64(a.rho_min, &cfg, "rho-min")?.unwrap_or(0.5), pick_f64(a.rho_max, &cfg, "rho-max")?.unwrap_or(12.0));
    let z = (pick_f64(a.z_min, &cfg, "z-min")?.unwrap_or(-6.0), pick_f64(a.z_max, &cfg, "z-max")?.unwrap_or(6.0));
    let h = pick_f64(a.h, &cfg, "h")?.unwrap_or(0.1);
    let n_phi = pick_usize(a.n_phi, &cfg, "n-phi")?.unwrap_or(32);
    let eta_xi = a.eta_xi || cfg.flag("eta-xi")?;
    let grid = GridSpec::with_step(rho, z, h, n_phi)?;
    let (field, stem) = match system {
        System::Cyl => {
            let k = pick_f64(a.k, &cfg, "k")?.unwrap_or(0.0);
            (field_grid_cyl(&CylMode::new(m, k, e, big_k)?, &grid)?, "field_cyl")
        }
        System::Par => {
            let c = pick_f64(a.c, &cfg, "C")?.unwrap_or(0.0);
            let shift = pick_f64(a.shift, &cfg, "shift")?.unwrap_or(0.0);
            (field_grid_par(&ParMode::new(m, e, big_k, c)?, &grid, shift)?, "field_par")
        }
    };
    let (csv, sidecar) = field.write_files(&outp.dir, stem, eta_xi)?;
    let mut paths = vec![csv, sidecar];
    if outp.plot {
        let script = format!(
            "set datafile separator ','\nset view map\nset xlabel 'rho'\nset ylabel 'z'\n\
             set title '|psi|^2 at phi = 0'\n\
             splot '{stem}.csv' every ::1 using ($2 == 0 ? $1 : 1/0):3:($4**2 + $5**2) with points pt 5 ps 0.5 palette notitle\n\
             pause -1\n"
        );
        paths.push(outp.write(&format!("{stem}_plot.gp"), script.as_bytes())?);
    }
    Ok(paths)
}

fn cmd_verify(a: &VerifyArgs) -> Result<(Vec<PathBuf>, usize, usize), CliError> {
    let cfg = Config::load(a.common.config.as_deref(), &keys(&["battery", "steps", "corrupt-energy"]))?;
    let outp = Output::resolve(&a.common, &cfg)?;
    let battery = pick_enum(a.battery, &cfg, "battery")?.unwrap_or(Battery::Standard);
    let mut bc = match battery {
        Battery::Standard => BatteryConfig::standard(),
        Battery::Quick => BatteryConfig::quick(),
    };
    let steps = pick_usize(a.steps, &cfg, "steps")?.unwrap_or(2);
    if !(1..=4).contains(&steps) {
        return Err(CliError::input(format!("--steps = {steps} must be between 1 and 4")));
    }
    bc.steps = (0..steps).map(|i| 0.1 / f64::from(1u32 << i)).collect();
    let corrupt = pick_f64(a.corrupt_energy, &cfg, "corrupt-energy")?.unwrap_or(1.0);
    if !(corrupt > 0.0) {
        return Err(CliError::input(format!("--corrupt-energy = {corrupt} must be positive")));
    }
    bc.corrupt_energy = corrupt;
    let records = verify::run_battery(&bc);
    let failed = records.iter().filter(|r| !r.passed).count();
    let (jsonl, csv) = verify::write_battery(&records, &outp.dir)?;
    let mut paths = vec![jsonl];
    match outp.format {
        Format::Csv => paths.push(csv),
        Format::Json => {
            std::fs::remove_file(&csv).map_err(io_err(&csv))?;
            let summary: Vec<Value> = records
                .iter()
                .map(|r| json!({ "label": r.label, "kind": r.kind, "passed": r.passed, "order": r.order, "metric": r.metric }))
                .collect();
            paths.push(outp.write("battery_summary.json", &json_file(&Value::Array(summary)))?);
        }
    }
    if outp.plot {
        let script = "set datafile separator ','\nset logscale y\nset xlabel 'case'\nset ylabel 'metric'\n\
            plot 'battery_summary.csv' every ::1 using 0:6 with points pt 7 notitle\npause -1\n";
        paths.push(outp.write("battery_plot.gp", script.as_bytes())?);
    }
    Ok((paths, failed, records.len()))
}
