//! TOML run configuration with a strict schema.
//!
//! ```toml
//! mode = "solve"            # generate | solve | sweep | rates (optional)
//! workers = 4               # optional
//!
//! [instance]                # synthetic academic instance ...
//! m = 50
//! sigma = 0.05
//! seed = 1
//! segments = [[10, 20, 1.0], [42, 43, 1.5]]   # optional custom phantom
//! # ... or external JSRB files (u and c_true stored as column matrices):
//! # s_mod = "s_mod.jsrb", s_calib = "s_calib.jsrb", q = "q.jsrb", u = "u.jsrb"
//! # s_true = "s_true.jsrb", c_true = "c_true.jsrb"
//!
//! [params]                  # solve
//! alpha = 1.53e-5
//! lambda = 4.88e-4
//! gamma = 0.25
//! mu = 1.0
//!
//! [grid]                    # sweep
//! gamma = [1.0, 0.25]
//! mu = [1.0]
//! alpha = [1e-4]
//! lambda = [1e-3]
//! methods = ["joint", "c_with_Seps"]
//!
//! [schedule]
//! preset = "academic"       # or "mpi"; explicit keys override it
//! relaxation_tau = 1.0
//!
//! [solve]
//! method = "joint"
//!
//! [rates]
//! sigma0 = 0.08
//! levels = 5
//!
//! [output]
//! dir = "out"
//! plots = true
//! ```
//!
//! Every violation is collected before failing. Relative file paths are
//! resolved against the directory of the configuration file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{KaczmarzSchedule, RegParams};
use crate::sweep::{GridSpec, Method, RateConfig};
use crate::testbed::{PhantomKind, PhantomSpec, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Generate,
    Solve,
    Sweep,
    Rates,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Generate => "generate",
            Mode::Solve => "solve",
            Mode::Sweep => "sweep",
            Mode::Rates => "rates",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Mode::Generate, Mode::Solve, Mode::Sweep, Mode::Rates]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Synthetic {
        m: usize,
        sigma: f64,
        seed: u64,
        phantom: PhantomSpec,
    },
    Files {
        s_mod: PathBuf,
        s_calib: PathBuf,
        q: PathBuf,
        u: PathBuf,
        s_true: Option<PathBuf>,
        c_true: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub workers: Option<usize>,
    pub instance: Option<InstanceSource>,
    pub params: Option<RegParams>,
    pub grid: Option<GridSpec>,
    pub schedule: KaczmarzSchedule,
    pub method: Method,
    pub rates: RateConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            workers: None,
            instance: None,
            params: None,
            grid: None,
            schedule: KaczmarzSchedule::ACADEMIC,
            method: Method::Joint,
            rates: RateConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    /// Sections a mode cannot run without.
    pub fn missing_for(&self, mode: Mode) -> Vec<String> {
        let mut missing = Vec::new();
        let needs_instance = matches!(mode, Mode::Generate | Mode::Solve | Mode::Sweep);
        if needs_instance && self.instance.is_none() {
            missing.push(format!("missing section [instance] (required by {mode})"));
        }
        if mode == Mode::Generate {
            if let Some(InstanceSource::Files { .. }) = self.instance {
                missing.push("generate requires a synthetic [instance]".into());
            }
        }
        if mode == Mode::Solve && self.params.is_none() {
            missing.push("missing section [params] (required by solve)".into());
        }
        if mode == Mode::Sweep {
            if self.grid.is_none() {
                missing.push("missing section [grid] (required by sweep)".into());
            }
            if let Some(InstanceSource::Files { c_true: None, .. }) = self.instance {
                missing.push("sweep needs instance.s_true and instance.c_true".into());
            }
        }
        missing
    }
}

const TOP_KEYS: &[&str] = &[
    "mode", "workers", "instance", "params", "grid", "schedule", "solve", "rates", "output",
];
const SYNTHETIC_KEYS: &[&str] = &["m", "sigma", "seed", "phantom", "segments"];
const FILE_KEYS: &[&str] = &["s_mod", "s_calib", "q", "u", "s_true", "c_true"];
const PARAM_KEYS: &[&str] = &["alpha", "lambda", "gamma", "mu"];
const GRID_KEYS: &[&str] = &["gamma", "mu", "alpha", "lambda", "methods"];
const SCHEDULE_KEYS: &[&str] = &[
    "preset",
    "outer_iterations",
    "c_sweeps_per_outer",
    "s_sweeps_per_outer",
    "relaxation_tau",
    "stop_rel_change",
];
const RATES_KEYS: &[&str] = &[
    "m",
    "sigma0",
    "levels",
    "seed",
    "alpha_scale",
    "gamma",
    "mu_ratio",
    "lambda_ratio",
];

/// Collects violations while reading typed values out of TOML tables.
struct Checker {
    errors: Vec<String>,
}

fn key_path(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

impl Checker {
    fn unknown_keys(&mut self, table: &Table, section: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.errors
                    .push(format!("unknown key \"{}\"", key_path(section, key)));
            }
        }
    }

    fn missing(&mut self, section: &str, key: &str) {
        self.errors
            .push(format!("missing required key \"{}\"", key_path(section, key)));
    }

    fn type_error(&mut self, section: &str, key: &str, expected: &str) {
        self.errors.push(format!(
            "\"{}\" must be {expected}",
            key_path(section, key)
        ));
    }

    fn table<'t>(&mut self, table: &'t Table, key: &str) -> Option<&'t Table> {
        match table.get(key)? {
            Value::Table(t) => Some(t),
            _ => {
                self.type_error("", key, "a table");
                None
            }
        }
    }

    fn float(&mut self, table: &Table, section: &str, key: &str) -> Option<f64> {
        match table.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.type_error(section, key, "a number");
                None
            }
        }
    }

    fn nonneg(&mut self, table: &Table, section: &str, key: &str) -> Option<f64> {
        let x = self.float(table, section, key)?;
        if x.is_finite() && x >= 0.0 {
            Some(x)
        } else {
            self.errors
                .push(format!("{} = {x} must be finite and >= 0", key_path(section, key)));
            None
        }
    }

    fn positive(&mut self, table: &Table, section: &str, key: &str) -> Option<f64> {
        let x = self.float(table, section, key)?;
        if x.is_finite() && x > 0.0 {
            Some(x)
        } else {
            self.errors
                .push(format!("{} = {x} must be finite and > 0", key_path(section, key)));
            None
        }
    }

    fn uint(&mut self, table: &Table, section: &str, key: &str) -> Option<u64> {
        match table.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                self.type_error(section, key, "a non-negative integer");
                None
            }
        }
    }

    fn string<'t>(&mut self, table: &'t Table, section: &str, key: &str) -> Option<&'t str> {
        match table.get(key)? {
            Value::String(s) => Some(s),
            _ => {
                self.type_error(section, key, "a string");
                None
            }
        }
    }

    fn boolean(&mut self, table: &Table, section: &str, key: &str) -> Option<bool> {
        match table.get(key)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.type_error(section, key, "a boolean");
                None
            }
        }
    }

    fn float_list(&mut self, table: &Table, section: &str, key: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = table.get(key)? else {
            self.type_error(section, key, "an array of numbers");
            return None;
        };
        let values: Option<Vec<f64>> = items
            .iter()
            .map(|v| match v {
                Value::Float(x) => Some(*x),
                Value::Integer(i) => Some(*i as f64),
                _ => None,
            })
            .collect();
        if values.is_none() {
            self.type_error(section, key, "an array of numbers");
        }
        values
    }

    fn path(&mut self, table: &Table, section: &str, key: &str, base: &Path) -> Option<PathBuf> {
        let raw = self.string(table, section, key)?;
        let path = base.join(raw);
        if !path.is_file() {
            self.errors.push(format!(
                "{} = {raw:?}: file not found ({})",
                key_path(section, key),
                path.display()
            ));
        }
        Some(path)
    }
}

fn parse_instance(ck: &mut Checker, t: &Table, base: &Path) -> Option<InstanceSource> {
    let s = "instance";
    let from_files = FILE_KEYS.iter().any(|k| t.contains_key(*k));
    if from_files {
        ck.unknown_keys(t, s, FILE_KEYS);
        let mut req = |key: &str| {
            if !t.contains_key(key) {
                ck.missing(s, key);
                return None;
            }
            ck.path(t, s, key, base)
        };
        let (s_mod, s_calib, q, u) = (req("s_mod"), req("s_calib"), req("q"), req("u"));
        let s_true = t.contains_key("s_true").then(|| ck.path(t, s, "s_true", base)).flatten();
        let c_true = t.contains_key("c_true").then(|| ck.path(t, s, "c_true", base)).flatten();
        if t.contains_key("s_true") != t.contains_key("c_true") {
            ck.errors
                .push("instance.s_true and instance.c_true must be given together".into());
        }
        return Some(InstanceSource::Files {
            s_mod: s_mod?,
            s_calib: s_calib?,
            q: q?,
            u: u?,
            s_true,
            c_true,
        });
    }

    ck.unknown_keys(t, s, SYNTHETIC_KEYS);
    for key in ["m", "sigma", "seed"] {
        if !t.contains_key(key) {
            ck.missing(s, key);
        }
    }
    let m = ck.uint(t, s, "m").map(|m| m as usize);
    if let Some(m) = m {
        if m < 8 || m % 2 != 0 {
            ck.errors.push(format!("instance.m = {m} must be even and >= 8"));
        }
    }
    let sigma = ck.nonneg(t, s, "sigma");
    let seed = ck.uint(t, s, "seed");
    if let Some(name) = ck.string(t, s, "phantom") {
        if name != "two_blocks_and_spike" {
            ck.errors.push(format!(
                "instance.phantom = {name:?}: only \"two_blocks_and_spike\" is built in; use segments"
            ));
        }
        if t.contains_key("segments") {
            ck.errors.push("instance.phantom and instance.segments are exclusive".into());
        }
    }
    let segments = match t.get("segments") {
        None => None,
        Some(Value::Array(items)) => {
            let parsed: Option<Vec<Segment>> = items
                .iter()
                .map(|item| {
                    let Value::Array(triple) = item else { return None };
                    match triple.as_slice() {
                        [Value::Integer(a), Value::Integer(b), h] if *a >= 0 && *b >= 0 => {
                            let height = match h {
                                Value::Float(x) => *x,
                                Value::Integer(i) => *i as f64,
                                _ => return None,
                            };
                            Some(Segment {
                                start: *a as usize,
                                end: *b as usize,
                                height,
                            })
                        }
                        _ => None,
                    }
                })
                .collect();
            if parsed.is_none() {
                ck.type_error(s, "segments", "an array of [start, end, height]");
            }
            parsed
        }
        Some(_) => {
            ck.type_error(s, "segments", "an array of [start, end, height]");
            None
        }
    };
    let m = m?;
    let phantom = match segments {
        Some(segs) => PhantomSpec::custom(m, segs),
        None => PhantomSpec {
            kind: PhantomKind::TwoBlocksAndSpike,
            m,
        },
    };
    Some(InstanceSource::Synthetic {
        m,
        sigma: sigma?,
        seed: seed?,
        phantom,
    })
}

fn parse_params(ck: &mut Checker, t: &Table) -> Option<RegParams> {
    let s = "params";
    ck.unknown_keys(t, s, PARAM_KEYS);
    let mut vals = [0.0; 4];
    let mut ok = true;
    for (slot, key) in vals.iter_mut().zip(PARAM_KEYS) {
        if !t.contains_key(*key) {
            ck.missing(s, key);
            ok = false;
        } else if let Some(v) = ck.nonneg(t, s, key) {
            *slot = v;
        } else {
            ok = false;
        }
    }
    let [alpha, lambda, gamma, mu] = vals;
    ok.then(|| RegParams::new(alpha, lambda, gamma, mu).ok()).flatten()
}

fn parse_grid(ck: &mut Checker, t: &Table) -> Option<GridSpec> {
    let s = "grid";
    ck.unknown_keys(t, s, GRID_KEYS);
    let mut list = |key: &str| {
        if !t.contains_key(key) {
            ck.missing(s, key);
            return None;
        }
        ck.float_list(t, s, key)
    };
    let (gamma, mu, alpha, lambda) = (list("gamma"), list("mu"), list("alpha"), list("lambda"));
    let methods = match t.get("methods") {
        None => Some(Method::ALL.to_vec()),
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for item in items {
                match item.as_str().map(str::parse::<Method>) {
                    Some(Ok(m)) => out.push(m),
                    _ => ck.errors.push(format!(
                        "grid.methods: unknown method {item}; expected one of {}",
                        Method::ALL.map(|m| m.as_str()).join(", ")
                    )),
                }
            }
            Some(out)
        }
        Some(_) => {
            ck.type_error(s, "methods", "an array of method names");
            None
        }
    };
    let grid = GridSpec {
        gamma: gamma?,
        mu: mu?,
        alpha: alpha?,
        lambda: lambda?,
        methods: methods?,
    };
    match grid.validate() {
        Ok(()) => Some(grid),
        Err(Error::Config(problems)) => {
            ck.errors.extend(problems.into_iter().map(|p| format!("grid: {p}")));
            None
        }
        Err(e) => {
            ck.errors.push(e.to_string());
            None
        }
    }
}

fn parse_schedule(ck: &mut Checker, t: &Table) -> KaczmarzSchedule {
    let s = "schedule";
    ck.unknown_keys(t, s, SCHEDULE_KEYS);
    let mut sched = match ck.string(t, s, "preset") {
        None | Some("academic") => KaczmarzSchedule::ACADEMIC,
        Some("mpi") => KaczmarzSchedule::MPI,
        Some(other) => {
            ck.errors.push(format!(
                "schedule.preset = {other:?}: expected \"academic\" or \"mpi\""
            ));
            KaczmarzSchedule::ACADEMIC
        }
    };
    if let Some(n) = ck.uint(t, s, "outer_iterations") {
        sched.outer_iterations = n as usize;
    }
    if let Some(n) = ck.uint(t, s, "c_sweeps_per_outer") {
        sched.c_sweeps_per_outer = n as usize;
    }
    if let Some(n) = ck.uint(t, s, "s_sweeps_per_outer") {
        sched.s_sweeps_per_outer = n as usize;
    }
    if let Some(tau) = ck.float(t, s, "relaxation_tau") {
        if tau > 0.0 && tau < 2.0 {
            sched.relaxation_tau = tau;
        } else {
            ck.errors.push(format!("relaxation_tau outside (0,2): {tau}"));
        }
    }
    if t.contains_key("stop_rel_change") {
        sched.stop_rel_change = ck.positive(t, s, "stop_rel_change");
    }
    sched
}

fn parse_rates(ck: &mut Checker, t: &Table, schedule: KaczmarzSchedule) -> RateConfig {
    let s = "rates";
    ck.unknown_keys(t, s, RATES_KEYS);
    let mut r = RateConfig {
        schedule,
        ..RateConfig::default()
    };
    if let Some(m) = ck.uint(t, s, "m") {
        r.m = m as usize;
    }
    if let Some(x) = ck.positive(t, s, "sigma0") {
        r.sigma0 = x;
    }
    if let Some(n) = ck.uint(t, s, "levels") {
        if n < 2 {
            ck.errors.push(format!("rates.levels = {n} must be >= 2"));
        }
        r.levels = n as usize;
    }
    if let Some(n) = ck.uint(t, s, "seed") {
        r.seed = n;
    }
    if let Some(x) = ck.positive(t, s, "alpha_scale") {
        r.alpha_scale = x;
    }
    if let Some(x) = ck.nonneg(t, s, "gamma") {
        r.gamma = x;
    }
    if let Some(x) = ck.nonneg(t, s, "mu_ratio") {
        r.mu_ratio = x;
    }
    if let Some(x) = ck.nonneg(t, s, "lambda_ratio") {
        r.lambda_ratio = x;
    }
    r
}

/// Parses configuration text; relative paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let mut ck = Checker { errors: Vec::new() };
    ck.unknown_keys(&root, "", TOP_KEYS);
    let mut cfg = RunConfig::default();

    cfg.mode = ck.string(&root, "", "mode").and_then(|m| match m.parse() {
        Ok(mode) => Some(mode),
        Err(_) => {
            ck.errors.push(format!(
                "mode = {m:?}: expected generate, solve, sweep or rates"
            ));
            None
        }
    });
    if let Some(w) = ck.uint(&root, "", "workers") {
        if w == 0 {
            ck.errors.push("workers must be >= 1".into());
        }
        cfg.workers = Some(w as usize);
    }
    if let Some(t) = ck.table(&root, "instance") {
        cfg.instance = parse_instance(&mut ck, t, base);
    }
    if let Some(t) = ck.table(&root, "params") {
        cfg.params = parse_params(&mut ck, t);
    }
    if let Some(t) = ck.table(&root, "grid") {
        cfg.grid = parse_grid(&mut ck, t);
    }
    if let Some(t) = ck.table(&root, "schedule") {
        cfg.schedule = parse_schedule(&mut ck, t);
    }
    if let Some(t) = ck.table(&root, "solve") {
        ck.unknown_keys(t, "solve", &["method"]);
        if let Some(name) = ck.string(t, "solve", "method") {
            match name.parse() {
                Ok(m) => cfg.method = m,
                Err(e) => ck.errors.push(format!("solve.method: {e}")),
            }
        }
    }
    cfg.rates = match ck.table(&root, "rates") {
        Some(t) => parse_rates(&mut ck, t, cfg.schedule),
        None => RateConfig {
            schedule: cfg.schedule,
            ..RateConfig::default()
        },
    };
    if let Some(t) = ck.table(&root, "output") {
        ck.unknown_keys(t, "output", &["dir", "plots"]);
        if let Some(dir) = ck.string(t, "output", "dir") {
            cfg.output.dir = base.join(dir);
        }
        if let Some(p) = ck.boolean(t, "output", "plots") {
            cfg.output.plots = p;
        }
    }

    // only report missing sections when the rest parsed cleanly
    if ck.errors.is_empty() {
        if let Some(mode) = cfg.mode {
            ck.errors.extend(cfg.missing_for(mode));
        }
    }
    if ck.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(ck.errors))
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}
