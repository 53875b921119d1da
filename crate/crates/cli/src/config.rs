//! Flat `section.key = value` configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mond_equilibria::eos::{AnsatzModel, CutoffConvention, FluidEos, PhiTable};
use mond_equilibria::interp::InterpolationModel;
use mond_equilibria::solver::SolveConfig;

use crate::CliError;

/// Every key the parser accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "interp.family",
    "interp.alpha",
    "interp.table_path",
    "ansatz.kind",
    "ansatz.k",
    "ansatz.l",
    "ansatz.kappa",
    "ansatz.phi_table_path",
    "ansatz.eos",
    "ansatz.eos_n",
    "ansatz.eos_K",
    "ansatz.cutoff",
    "solve.y0",
    "solve.rel_tol",
    "solve.abs_tol",
    "solve.r_max",
    "solve.event_tol",
    "solve.series_eps",
    "solve.grid_density",
    "solve.max_steps",
    "output.dir",
    "output.profile_format",
    "output.summary_format",
    "output.tail_factor",
    "output.resample",
    "output.mass_unit_kg",
    "sweep.max_runs",
    "sweep.workers",
];

/// Raw key/value pairs plus the directory relative paths resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    pub values: BTreeMap<String, String>,
    pub base_dir: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        let mut errors = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {}: expected `key = value`, got `{line}`", n + 1));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                errors.push(format!("line {}: unknown key `{key}`", n + 1));
            } else if values.insert(key.to_string(), value.to_string()).is_some() {
                errors.push(format!("line {}: duplicate key `{key}`", n + 1));
            }
        }
        if errors.is_empty() {
            Ok(Self {
                values,
                base_dir: base_dir.to_path_buf(),
            })
        } else {
            Err(CliError::Config(errors))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterpSpec {
    Newtonian,
    Simple { alpha: f64 },
    Standard,
    Table { path: PathBuf, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnsatzSpec {
    Polytrope { k: f64, l: f64 },
    PhiTable { path: PathBuf, kappa: f64, l: f64 },
    Maxwellian,
    Fluid { n: f64, k: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Vacuum tail written past `R`, in units of `R`.
    pub tail_factor: f64,
    /// Number of rows in the optional uniform resample (0 disables it).
    pub resample: usize,
    pub mass_unit_kg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub interp: InterpSpec,
    pub ansatz: AnsatzSpec,
    pub cutoff: CutoffConvention,
    pub solve: SolveConfig,
    pub output: OutputSpec,
    pub max_runs: usize,
    pub workers: usize,
}

/// Collects typed values and every validation error in one pass.
struct Reader<'a> {
    raw: &'a RawConfig,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn required(&mut self, key: &str) -> Option<&str> {
        let v = self.raw.get(key);
        if v.is_none() {
            self.errors.push(format!("missing required key `{key}`"));
        }
        v
    }

    fn number(&mut self, key: &str, value: Option<&str>) -> Option<f64> {
        let value = value?;
        match value.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.errors.push(format!("`{key}`: expected a finite number, got `{value}`"));
                None
            }
        }
    }

    fn required_number(&mut self, key: &str) -> Option<f64> {
        let v = self.required(key).map(str::to_string);
        self.number(key, v.as_deref())
    }

    fn optional_number(&mut self, key: &str, default: f64) -> f64 {
        let v = self.raw.get(key).map(str::to_string);
        match v {
            Some(v) => self.number(key, Some(&v)).unwrap_or(default),
            None => default,
        }
    }

    fn optional_count(&mut self, key: &str, default: usize) -> usize {
        match self.raw.get(key) {
            Some(v) => v.parse::<usize>().unwrap_or_else(|_| {
                self.errors.push(format!("`{key}`: expected a non-negative integer, got `{v}`"));
                default
            }),
            None => default,
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(msg());
        }
    }

    fn check_exponents(&mut self, k_key: &str, k: Option<f64>, l: Option<f64>) {
        if let Some(k) = k {
            self.check(k > -1.0, || format!("`{k_key}` must exceed -1, got {k}"));
        }
        if let Some(l) = l {
            self.check(l > -0.5, || format!("`ansatz.l` must exceed -1/2, got {l}"));
        }
    }

    fn existing_path(&mut self, key: &str) -> Option<PathBuf> {
        let p = self.raw.resolve(self.required(key)?);
        if !p.is_file() {
            self.errors.push(format!("`{key}`: file {} does not exist", p.display()));
        }
        Some(p)
    }
}

impl RunConfig {
    /// Validates every key before any computation; all problems are
    /// reported together.
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let mut r = Reader {
            raw,
            errors: Vec::new(),
        };
        let interp = match r.required("interp.family").map(str::to_string).as_deref() {
            Some("newtonian") => Some(InterpSpec::Newtonian),
            Some("standard") => Some(InterpSpec::Standard),
            Some("simple") => r.required_number("interp.alpha").map(|alpha| InterpSpec::Simple { alpha }),
            Some("table") => {
                let path = r.existing_path("interp.table_path");
                let alpha = r.required_number("interp.alpha");
                path.zip(alpha).map(|(path, alpha)| InterpSpec::Table { path, alpha })
            }
            Some(other) => {
                r.errors.push(format!(
                    "`interp.family`: expected newtonian, simple, standard or table, got `{other}`"
                ));
                None
            }
            None => None,
        };
        if let Some(InterpSpec::Simple { alpha } | InterpSpec::Table { alpha, .. }) = &interp {
            let alpha = *alpha;
            r.check((0.0..=1.0).contains(&alpha), || format!("`interp.alpha` must lie in [0, 1], got {alpha}"));
        }

        let ansatz = match r.required("ansatz.kind").map(str::to_string).as_deref() {
            Some("polytrope") => {
                let k = r.required_number("ansatz.k");
                let l = r.required_number("ansatz.l");
                r.check_exponents("ansatz.k", k, l);
                k.zip(l).map(|(k, l)| AnsatzSpec::Polytrope { k, l })
            }
            Some("phi-table") => {
                let path = r.existing_path("ansatz.phi_table_path");
                let kappa = r.required_number("ansatz.kappa");
                let l = r.required_number("ansatz.l");
                r.check_exponents("ansatz.kappa", kappa, l);
                match (path, kappa, l) {
                    (Some(path), Some(kappa), Some(l)) => Some(AnsatzSpec::PhiTable { path, kappa, l }),
                    _ => None,
                }
            }
            Some("maxwellian") => Some(AnsatzSpec::Maxwellian),
            Some("fluid") => {
                match r.required("ansatz.eos").map(str::to_string).as_deref() {
                    Some("polytropic-fluid") | None => {}
                    Some(other) => r
                        .errors
                        .push(format!("`ansatz.eos`: expected polytropic-fluid, got `{other}`")),
                }
                let n = r.required_number("ansatz.eos_n");
                let k = r.required_number("ansatz.eos_K");
                n.zip(k).map(|(n, k)| AnsatzSpec::Fluid { n, k })
            }
            Some(other) => {
                r.errors.push(format!(
                    "`ansatz.kind`: expected polytrope, phi-table, maxwellian or fluid, got `{other}`"
                ));
                None
            }
            None => None,
        };
        if let Some(AnsatzSpec::Fluid { n, k }) = &ansatz {
            let (n, k) = (*n, *k);
            r.check(n > 0.0, || format!("`ansatz.eos_n` must be positive, got {n}"));
            r.check(k > 0.0, || format!("`ansatz.eos_K` must be positive, got {k}"));
        }
        let cutoff = match raw.get("ansatz.cutoff") {
            None => CutoffConvention::E0Zero,
            Some(s) => CutoffConvention::parse(s).unwrap_or_else(|| {
                r.errors
                    .push(format!("`ansatz.cutoff`: expected e0-zero or e0-at-infinity, got `{s}`"));
                CutoffConvention::E0Zero
            }),
        };
        let alpha = match &interp {
            Some(InterpSpec::Newtonian) => Some(0.0),
            Some(InterpSpec::Standard) => Some(1.0),
            Some(InterpSpec::Simple { alpha } | InterpSpec::Table { alpha, .. }) => Some(*alpha),
            None => None,
        };
        if cutoff == CutoffConvention::E0AtInfinity && alpha == Some(1.0) {
            r.errors.push(
                "`ansatz.cutoff = e0-at-infinity` is not available for alpha = 1: y_\u{221e} = -\u{221e} in genuine MOND"
                    .into(),
            );
        }
        if cutoff == CutoffConvention::E0AtInfinity && ansatz == Some(AnsatzSpec::Maxwellian) {
            r.errors
                .push("`ansatz.cutoff = e0-at-infinity` needs a compactly supported ansatz, not a Maxwellian".into());
        }

        let d = SolveConfig::default();
        let solve = SolveConfig {
            y0: r.optional_number("solve.y0", d.y0),
            rel_tol: r.optional_number("solve.rel_tol", d.rel_tol),
            abs_tol: r.optional_number("solve.abs_tol", d.abs_tol),
            r_max: r.optional_number("solve.r_max", d.r_max),
            event_tol: r.optional_number("solve.event_tol", d.event_tol),
            series_eps: r.optional_number("solve.series_eps", d.series_eps),
            grid_density: r.optional_number("solve.grid_density", d.grid_density),
            max_steps: r.optional_count("solve.max_steps", d.max_steps),
            ..d
        };
        if let Err(e) = solve.validate() {
            r.errors.push(e.to_string());
        }

        for (key, want) in [("output.profile_format", "csv"), ("output.summary_format", "json")] {
            if let Some(v) = raw.get(key) {
                r.check(v == want, || format!("`{key}`: only `{want}` is supported, got `{v}`"));
            }
        }
        let dir = raw.resolve(raw.get("output.dir").unwrap_or("out"));
        let tail_factor = r.optional_number("output.tail_factor", 1e6);
        r.check(tail_factor >= 1.0, || format!("`output.tail_factor` must be >= 1, got {tail_factor}"));
        let resample = r.optional_count("output.resample", 0);
        let mass_unit_kg = raw
            .get("output.mass_unit_kg")
            .map(str::to_string)
            .and_then(|v| r.number("output.mass_unit_kg", Some(&v)));
        if let Some(m) = mass_unit_kg {
            r.check(m > 0.0, || format!("`output.mass_unit_kg` must be positive, got {m}"));
        }
        let max_runs = r.optional_count("sweep.max_runs", 10_000);
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let workers = r.optional_count("sweep.workers", default_workers);
        r.check(workers > 0, || "`sweep.workers` must be positive".into());

        match (interp, ansatz, r.errors.is_empty()) {
            (Some(interp), Some(ansatz), true) => Ok(RunConfig {
                interp,
                ansatz,
                cutoff,
                solve,
                output: OutputSpec {
                    dir,
                    tail_factor,
                    resample,
                    mass_unit_kg,
                },
                max_runs,
                workers,
            }),
            _ => Err(CliError::Config(r.errors)),
        }
    }

    pub fn build_interp(&self) -> Result<InterpolationModel, CliError> {
        let m = match &self.interp {
            InterpSpec::Newtonian => Ok(InterpolationModel::newtonian()),
            InterpSpec::Simple { alpha } => InterpolationModel::simple(*alpha),
            InterpSpec::Standard => Ok(InterpolationModel::standard()),
            InterpSpec::Table { path, alpha } => InterpolationModel::load_table(path, *alpha),
        };
        m.map_err(|e| CliError::Config(vec![format!("interpolating function: {e}")]))
    }

    pub fn build_ansatz(&self) -> Result<AnsatzModel, CliError> {
        let a = match &self.ansatz {
            AnsatzSpec::Polytrope { k, l } => AnsatzModel::polytrope(*k, *l),
            AnsatzSpec::PhiTable { path, kappa, l } => {
                PhiTable::load(path, *kappa).and_then(|t| AnsatzModel::phi_table(t, *l))
            }
            AnsatzSpec::Maxwellian => Ok(AnsatzModel::maxwellian()),
            AnsatzSpec::Fluid { n, k } => FluidEos::polytropic(*n, *k).map(AnsatzModel::fluid),
        };
        a.map(|a| a.with_convention(self.cutoff))
            .map_err(|e| CliError::Config(vec![format!("ansatz: {e}")]))
    }
}

/// Models shared by every run of one configuration.
pub struct Models {
    pub interp: Arc<InterpolationModel>,
    pub ansatz: AnsatzModel,
}

impl Models {
    pub fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(Self {
            interp: Arc::new(cfg.build_interp()?),
            ansatz: cfg.build_ansatz()?,
        })
    }
}
