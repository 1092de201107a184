use super::HarnessError;
use crate::dynamics::{FeedbackKind, InitialData};
use crate::geometry::PatchSelection;
use crate::mesh::{generate_icosphere, generate_torus, load_mesh, MeshError, MeshFormat};
use crate::{SurfaceMesh, Vec3};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use toml::{Table, Value};

/// Where the surface comes from: a mesh file or `icosphere:R:S` / `torus:R:r:NU:NV`.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Icosphere { radius: f64, subdivisions: u32 },
    Torus { big_r: f64, r: f64, nu: usize, nv: usize },
}

impl MeshSource {
    pub fn load(&self) -> Result<SurfaceMesh, MeshError> {
        match self {
            Self::File(p) => {
                let format = MeshFormat::from_path(p).ok_or_else(|| {
                    MeshError::InvalidParameter(format!("cannot infer mesh format of {}", p.display()))
                })?;
                load_mesh(p, format)
            }
            Self::Icosphere { radius, subdivisions } => generate_icosphere(Vec3::zeros(), *radius, *subdivisions),
            Self::Torus { big_r, r, nu, nv } => generate_torus(Vec3::zeros(), *big_r, *r, *nu, *nv),
        }
    }
}

impl FromStr for MeshSource {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || HarnessError::Config(format!("bad generator spec '{s}'"));
        match parts[0] {
            "icosphere" if parts.len() == 3 => Ok(Self::Icosphere {
                radius: parts[1].parse().map_err(|_| bad())?,
                subdivisions: parts[2].parse().map_err(|_| bad())?,
            }),
            "torus" if parts.len() == 5 => Ok(Self::Torus {
                big_r: parts[1].parse().map_err(|_| bad())?,
                r: parts[2].parse().map_err(|_| bad())?,
                nu: parts[3].parse().map_err(|_| bad())?,
                nv: parts[4].parse().map_err(|_| bad())?,
            }),
            "icosphere" | "torus" => Err(bad()),
            _ => Ok(Self::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for MeshSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::File(p) => write!(f, "{}", p.display()),
            Self::Icosphere { radius, subdivisions } => write!(f, "icosphere:{radius:?}:{subdivisions}"),
            Self::Torus { big_r, r, nu, nv } => write!(f, "torus:{big_r:?}:{r:?}:{nu}:{nv}"),
        }
    }
}

/// Initial data as configured; the random variant takes its seed from `run.seed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialSpec {
    Mode { index: usize, amplitude: f64 },
    Random { amplitude: f64 },
}

impl InitialSpec {
    pub fn resolve(&self, seed: u64) -> InitialData {
        match *self {
            Self::Mode { index, amplitude } => InitialData::Mode { index, amplitude },
            Self::Random { amplitude } => InitialData::Random { seed, amplitude },
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mesh: MeshSource,
    pub x0: Vec3,
    pub patches: PatchSelection,
    pub eps_umb: f64,
    pub tol_h: Option<f64>,
    pub waive_admissibility: bool,
    pub eps_tube: f64,
    pub a0: f64,
    pub a_max: f64,
    pub feedback: FeedbackKind,
    pub initial: InitialSpec,
    /// `None`: half the shortest edge.
    pub dt: Option<f64>,
    pub t_max: f64,
    pub sample_stride: usize,
    /// `None`: `4/√λ₁`.
    pub t0: Option<f64>,
    pub output: PathBuf,
    pub seed: u64,
    pub snapshots: bool,
    pub multiplier: bool,
}

fn get<'a>(t: &'a Table, key: &str) -> Option<&'a Value> {
    let mut cur = t;
    let parts: Vec<&str> = key.split('.').collect();
    for p in &parts[..parts.len() - 1] {
        cur = cur.get(*p)?.as_table()?;
    }
    cur.get(parts[parts.len() - 1])
}

fn set(t: &mut Table, key: &str, value: Value) -> Result<(), HarnessError> {
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = t;
    for p in &parts[..parts.len() - 1] {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("'{p}' in '{key}' is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn float(t: &Table, key: &str) -> Result<Option<f64>, HarnessError> {
    match get(t, key) {
        None => Ok(None),
        Some(Value::Float(x)) => Ok(Some(*x)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(v) => Err(HarnessError::Config(format!("'{key}' must be a number, got {v}"))),
    }
}

fn req_float(t: &Table, key: &str) -> Result<f64, HarnessError> {
    float(t, key)?.ok_or_else(|| HarnessError::Config(format!("missing key '{key}'")))
}

fn int(t: &Table, key: &str) -> Result<Option<i64>, HarnessError> {
    match get(t, key) {
        None => Ok(None),
        Some(Value::Integer(i)) => Ok(Some(*i)),
        Some(v) => Err(HarnessError::Config(format!("'{key}' must be an integer, got {v}"))),
    }
}

fn string<'a>(t: &'a Table, key: &str) -> Result<Option<&'a str>, HarnessError> {
    match get(t, key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(v) => Err(HarnessError::Config(format!("'{key}' must be a string, got {v}"))),
    }
}

fn boolean(t: &Table, key: &str) -> Result<Option<bool>, HarnessError> {
    match get(t, key) {
        None => Ok(None),
        Some(Value::Boolean(b)) => Ok(Some(*b)),
        Some(v) => Err(HarnessError::Config(format!("'{key}' must be true/false, got {v}"))),
    }
}

fn nonneg_usize(t: &Table, key: &str) -> Result<Option<usize>, HarnessError> {
    int(t, key)?
        .map(|i| usize::try_from(i).map_err(|_| HarnessError::Config(format!("'{key}' must be ≥ 0"))))
        .transpose()
}

/// Known keys; anything else in a config file is rejected.
const KEYS: &[&str] = &[
    "mesh.source",
    "observer.x0",
    "patches.selection",
    "patches.seeds",
    "patches.eps_umb",
    "damping.a0",
    "damping.a_max",
    "damping.eps_tube",
    "damping.tol_h",
    "damping.waive_admissibility",
    "feedback.law",
    "initial.kind",
    "initial.index",
    "initial.amplitude",
    "time.dt",
    "time.t_max",
    "time.sample_stride",
    "time.t0",
    "run.seed",
    "run.output",
    "diagnostics.snapshots",
    "diagnostics.multiplier",
];

fn check_keys(t: &Table, prefix: &str) -> Result<(), HarnessError> {
    for (k, v) in t {
        let full = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(sub) => check_keys(sub, &full)?,
            _ if KEYS.contains(&full.as_str()) => {}
            _ => return Err(HarnessError::Config(format!("unknown key '{full}'"))),
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses TOML text, applies `key=value` overrides (dotted keys, TOML values; bare words
    /// are taken as strings) and validates.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        apply_overrides(&mut table, overrides)?;
        Self::from_table(&table)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&text, overrides)
    }

    pub fn from_table(t: &Table) -> Result<Self, HarnessError> {
        check_keys(t, "")?;
        let mesh: MeshSource = string(t, "mesh.source")?
            .ok_or_else(|| HarnessError::Config("missing key 'mesh.source'".into()))?
            .parse()?;
        let x0 = match get(t, "observer.x0") {
            None => Vec3::zeros(),
            Some(Value::Array(a)) if a.len() == 3 => {
                let mut x = [0.0; 3];
                for (i, v) in a.iter().enumerate() {
                    x[i] = match v {
                        Value::Float(f) => *f,
                        Value::Integer(k) => *k as f64,
                        _ => return Err(HarnessError::Config("'observer.x0' must hold numbers".into())),
                    };
                }
                Vec3::new(x[0], x[1], x[2])
            }
            Some(v) => return Err(HarnessError::Config(format!("'observer.x0' must be [x, y, z], got {v}"))),
        };
        let seeds: Vec<usize> = match get(t, "patches.seeds") {
            None => Vec::new(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_integer()
                        .and_then(|i| usize::try_from(i).ok())
                        .ok_or_else(|| HarnessError::Config("'patches.seeds' must hold vertex ids".into()))
                })
                .collect::<Result<_, _>>()?,
            Some(v) => return Err(HarnessError::Config(format!("'patches.seeds' must be an array, got {v}"))),
        };
        let patches = match string(t, "patches.selection")?.unwrap_or("none") {
            "none" => PatchSelection::None,
            "all" => PatchSelection::AllOfM0,
            "seeds" => PatchSelection::ComponentsContaining(seeds),
            other => return Err(HarnessError::Config(format!("unknown patches.selection '{other}'"))),
        };
        let feedback: FeedbackKind = string(t, "feedback.law")?
            .unwrap_or("linear:1.0")
            .parse()
            .map_err(|e| HarnessError::Config(format!("{e}")))?;
        let amplitude = float(t, "initial.amplitude")?.unwrap_or(1.0);
        let initial = match string(t, "initial.kind")?.unwrap_or("random") {
            "mode" => InitialSpec::Mode {
                index: nonneg_usize(t, "initial.index")?.unwrap_or(1),
                amplitude,
            },
            "random" => InitialSpec::Random { amplitude },
            other => return Err(HarnessError::Config(format!("unknown initial.kind '{other}'"))),
        };
        let seed = int(t, "run.seed")?
            .ok_or_else(|| HarnessError::Config("missing key 'run.seed' (a seed is mandatory)".into()))?;
        let a0 = req_float(t, "damping.a0")?;
        let cfg = Self {
            mesh,
            x0,
            patches,
            eps_umb: float(t, "patches.eps_umb")?.unwrap_or(0.1),
            tol_h: float(t, "damping.tol_h")?,
            waive_admissibility: boolean(t, "damping.waive_admissibility")?.unwrap_or(false),
            eps_tube: float(t, "damping.eps_tube")?.unwrap_or(0.3),
            a0,
            a_max: float(t, "damping.a_max")?.unwrap_or(a0),
            feedback,
            initial,
            dt: float(t, "time.dt")?,
            t_max: req_float(t, "time.t_max")?,
            sample_stride: nonneg_usize(t, "time.sample_stride")?.unwrap_or(1),
            t0: float(t, "time.t0")?,
            output: PathBuf::from(string(t, "run.output")?.unwrap_or("run")),
            seed: u64::try_from(seed).map_err(|_| HarnessError::Config("'run.seed' must be ≥ 0".into()))?,
            snapshots: boolean(t, "diagnostics.snapshots")?.unwrap_or(false),
            multiplier: boolean(t, "diagnostics.multiplier")?.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        let scalars = [
            ("patches.eps_umb", self.eps_umb),
            ("damping.eps_tube", self.eps_tube),
            ("damping.a0", self.a0),
            ("damping.a_max", self.a_max),
            ("time.t_max", self.t_max),
        ];
        for (k, v) in scalars {
            if !v.is_finite() {
                return bad(format!("'{k}' must be finite"));
            }
        }
        if !self.x0.iter().all(|x| x.is_finite()) {
            return bad("'observer.x0' must be finite".into());
        }
        if !(self.a0 > 0.0) {
            return bad(format!("damping.a0 must be > 0, got {}", self.a0));
        }
        if !(self.a_max >= self.a0) {
            return bad(format!("damping.a_max must be ≥ a0, got {}", self.a_max));
        }
        if !(self.eps_tube > 0.0) {
            return bad(format!("damping.eps_tube must be > 0, got {}", self.eps_tube));
        }
        if !(self.t_max > 0.0) {
            return bad(format!("time.t_max must be > 0, got {}", self.t_max));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad(format!("time.dt must be > 0, got {dt}"));
            }
        }
        if let Some(t0) = self.t0 {
            if !(t0 > 0.0) || !t0.is_finite() {
                return bad(format!("time.t0 must be > 0, got {t0}"));
            }
        }
        if let Some(tol) = self.tol_h {
            if !(tol >= 0.0) || !tol.is_finite() {
                return bad(format!("damping.tol_h must be ≥ 0, got {tol}"));
            }
        }
        if self.sample_stride == 0 {
            return bad("time.sample_stride must be ≥ 1".into());
        }
        if self.multiplier && !self.snapshots {
            return bad("diagnostics.multiplier needs diagnostics.snapshots = true".into());
        }
        Ok(())
    }

    /// The fully resolved configuration as a TOML table (optional keys only when set).
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        let f = Value::Float;
        let put = |t: &mut Table, k: &str, v: Value| set(t, k, v).expect("fresh table");
        put(&mut t, "mesh.source", Value::String(self.mesh.to_string()));
        put(
            &mut t,
            "observer.x0",
            Value::Array(self.x0.iter().map(|x| f(*x)).collect()),
        );
        let (sel, seeds) = match &self.patches {
            PatchSelection::None => ("none", None),
            PatchSelection::AllOfM0 => ("all", None),
            PatchSelection::ComponentsContaining(s) => ("seeds", Some(s)),
        };
        put(&mut t, "patches.selection", Value::String(sel.into()));
        if let Some(s) = seeds {
            put(
                &mut t,
                "patches.seeds",
                Value::Array(s.iter().map(|&v| Value::Integer(v as i64)).collect()),
            );
        }
        put(&mut t, "patches.eps_umb", f(self.eps_umb));
        put(&mut t, "damping.a0", f(self.a0));
        put(&mut t, "damping.a_max", f(self.a_max));
        put(&mut t, "damping.eps_tube", f(self.eps_tube));
        if let Some(tol) = self.tol_h {
            put(&mut t, "damping.tol_h", f(tol));
        }
        put(&mut t, "damping.waive_admissibility", Value::Boolean(self.waive_admissibility));
        put(&mut t, "feedback.law", Value::String(self.feedback.to_string()));
        match self.initial {
            InitialSpec::Mode { index, amplitude } => {
                put(&mut t, "initial.kind", Value::String("mode".into()));
                put(&mut t, "initial.index", Value::Integer(index as i64));
                put(&mut t, "initial.amplitude", f(amplitude));
            }
            InitialSpec::Random { amplitude } => {
                put(&mut t, "initial.kind", Value::String("random".into()));
                put(&mut t, "initial.amplitude", f(amplitude));
            }
        }
        if let Some(dt) = self.dt {
            put(&mut t, "time.dt", f(dt));
        }
        put(&mut t, "time.t_max", f(self.t_max));
        put(&mut t, "time.sample_stride", Value::Integer(self.sample_stride as i64));
        if let Some(t0) = self.t0 {
            put(&mut t, "time.t0", f(t0));
        }
        put(&mut t, "run.seed", Value::Integer(self.seed as i64));
        put(&mut t, "run.output", Value::String(self.output.display().to_string()));
        put(&mut t, "diagnostics.snapshots", Value::Boolean(self.snapshots));
        put(&mut t, "diagnostics.multiplier", Value::Boolean(self.multiplier));
        t
    }

    pub fn to_toml(&self) -> String {
        self.to_table().to_string()
    }
}

/// Applies `key=value` overrides to a parsed table.
pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> Result<(), HarnessError> {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("override '{o}' is not key=value")))?;
        let (k, v) = (k.trim(), v.trim());
        let value = v
            .parse::<Value>()
            .unwrap_or_else(|_| Value::String(v.to_string()));
        set(table, k, value)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[mesh]
source = "icosphere:1:2"
[damping]
a0 = 1.0
[time]
t_max = 2.0
[run]
seed = 7
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL, &[]).unwrap();
        assert_eq!(c.mesh, MeshSource::Icosphere { radius: 1.0, subdivisions: 2 });
        assert_eq!(c.a_max, 1.0);
        assert_eq!(c.patches, PatchSelection::None);
        assert_eq!(c.feedback, FeedbackKind::Linear { slope: 1.0 });
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn round_trip_through_text() {
        let c = ExperimentConfig::from_toml(MINIMAL, &["time.dt=0.01".into(), "feedback.law=power:3".into()]).unwrap();
        let again = ExperimentConfig::from_toml(&c.to_toml(), &[]).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.dt, Some(0.01));
        assert_eq!(again.feedback, FeedbackKind::Power { exponent: 3.0 });
    }

    #[test]
    fn invariants_are_enforced() {
        for o in ["damping.a0=0", "damping.a0=-1", "time.t_max=0", "damping.a_max=0.5", "time.sample_stride=0"] {
            assert!(ExperimentConfig::from_toml(MINIMAL, &[o.into()]).is_err(), "{o}");
        }
        let no_seed = MINIMAL.replace("seed = 7", "");
        assert!(ExperimentConfig::from_toml(&no_seed, &[]).is_err());
        assert!(ExperimentConfig::from_toml(MINIMAL, &["bogus.key=1".into()]).is_err());
    }

    #[test]
    fn generator_specs() {
        assert_eq!(
            "torus:2:1:16:8".parse::<MeshSource>().unwrap(),
            MeshSource::Torus { big_r: 2.0, r: 1.0, nu: 16, nv: 8 }
        );
        assert!("icosphere:1".parse::<MeshSource>().is_err());
        assert_eq!("a.off".parse::<MeshSource>().unwrap(), MeshSource::File("a.off".into()));
    }
}
