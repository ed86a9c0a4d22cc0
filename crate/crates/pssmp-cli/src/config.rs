use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::{json, Value};

use pssmp::gallery::{self, GalleryEntry};
use pssmp::levy::json::{spec_from_str, spec_to_json};
use pssmp::path::SimConfig;
use pssmp::LevySpec;

/// Parameters of the gallery constructors; unset ones take the gallery defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct GalleryParams {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Beta-factor index of the drift-exp-jump example.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "c-plus")]
    pub c_plus: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Spec JSON file.
    #[arg(long, conflicts_with = "gallery", required_unless_present = "gallery")]
    pub spec: Option<PathBuf>,
    /// Gallery example by name or letter.
    #[arg(long)]
    pub gallery: Option<String>,
    #[command(flatten)]
    pub params: GalleryParams,
    /// Comma-separated time grid.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; outputs do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory for manifest.json, data.csv and report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance override KEY=VAL (repeatable).
    #[arg(long = "tol", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Error in the user's input; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Named tolerances with documented defaults, overridden by `--tol`.
#[derive(Debug, Clone)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    pub fn resolve(defaults: &[(&str, f64)], overrides: &[(String, f64)]) -> Result<Self> {
        let mut map: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in overrides {
            match map.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    let known: Vec<&str> = defaults.iter().map(|d| d.0).collect();
                    return usage(format!("unknown tolerance {k:?}; this command accepts {}", known.join(", ")));
                }
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, key: &str) -> f64 {
        self.0[key]
    }

    pub fn count(&self, key: &str) -> usize {
        self.get(key).max(0.0) as usize
    }

    pub fn to_json(&self) -> Value {
        json!(self.0)
    }
}

pub enum Source {
    Gallery(Box<GalleryEntry>),
    File { path: PathBuf },
}

/// Fully resolved experiment: spec, grid, sizes, seed and tolerances.
pub struct Experiment {
    pub command: &'static str,
    pub source: Source,
    pub spec: LevySpec<f64>,
    pub t: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub tol: Tolerances,
    /// Command-specific options, recorded in the config.
    pub extra: Value,
}

impl Experiment {
    pub fn new(command: &'static str, c: &Common, tol_defaults: &[(&str, f64)], extra: Value) -> Result<Self> {
        if c.n < 100 {
            return usage(format!("--n must be at least 100, got {}", c.n));
        }
        if c.threads == Some(0) {
            return usage("--threads must be positive");
        }
        if let Some(bad) = c.t.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return usage(format!("time grid values must be finite and >= 0, got {bad}"));
        }
        let (source, spec) = match (&c.spec, &c.gallery) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let spec = spec_from_str::<f64>(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
                (Source::File { path: path.clone() }, spec)
            }
            (None, Some(name)) => {
                let e = build_gallery(name, &c.params)?;
                let spec = e.spec.clone();
                (Source::Gallery(Box::new(e)), spec)
            }
            (None, None) => return usage("one of --spec or --gallery is required"),
        };
        Ok(Self {
            command,
            source,
            spec,
            t: c.t.clone(),
            n: c.n,
            seed: c.seed,
            threads: c.threads,
            out: c.out.clone(),
            tol: Tolerances::resolve(tol_defaults, &c.tol)?,
            extra,
        })
    }

    pub fn gallery(&self) -> Option<&GalleryEntry> {
        match &self.source {
            Source::Gallery(e) => Some(e),
            Source::File { .. } => None,
        }
    }

    pub fn sim(&self) -> SimConfig<f64> {
        SimConfig::with_seed(self.seed)
    }

    pub fn require_t(&self) -> Result<&[f64]> {
        if self.t.is_empty() {
            return usage(format!("{} needs a time grid (--t)", self.command));
        }
        Ok(&self.t)
    }

    pub fn to_json(&self) -> Result<Value> {
        let source = match &self.source {
            Source::Gallery(e) => json!({ "gallery": e.name, "params": e.params }),
            Source::File { path } => json!({ "spec_file": path.display().to_string() }),
        };
        Ok(json!({
            "command": self.command,
            "source": source,
            "spec": spec_to_json(&self.spec)?,
            "t": self.t,
            "n": self.n,
            "seed": self.seed,
            "threads": self.threads,
            "tolerances": self.tol.to_json(),
            "options": self.extra,
        }))
    }
}

/// Builds a gallery example, rejecting parameters the example does not take.
pub fn build_gallery(name: &str, p: &GalleryParams) -> Result<GalleryEntry> {
    let canonical = match name {
        "a" => "killed-stable-sub",
        "b" => "drift-exp-jump",
        "c" => "brownian-drift",
        "d" => "stable-csbp",
        "e" => "stable-killed",
        "f" => "rational",
        other => other,
    };
    let given: Vec<(&str, Option<f64>)> = vec![
        ("alpha", p.alpha),
        ("sigma", p.sigma),
        ("b", p.b),
        ("c", p.c),
        ("q", p.q),
        ("rho", p.rho),
        ("gamma", p.gamma),
        ("delta", p.delta),
        ("c-plus", p.c_plus),
        ("d", p.d),
        ("mass", p.mass),
        ("rate", p.rate),
    ];
    let accepted: &[&str] = match canonical {
        "killed-stable-sub" => &["alpha"],
        "drift-exp-jump" => &["c", "q", "rho", "alpha", "gamma"],
        "killed-drift" => &["c", "q", "alpha", "gamma"],
        "brownian-drift" => &["sigma", "b", "alpha"],
        "stable-csbp" => &["alpha", "c-plus"],
        "stable-killed" => &["alpha", "rho"],
        "rational" => &["delta", "b"],
        "finite-drift-free" => &["mass", "rate", "q"],
        "stable-sub-drift" => &["d", "alpha", "q"],
        _ => {
            let names: Vec<&str> = gallery::gallery()?.iter().map(|e| e.name).collect();
            return usage(format!("unknown gallery example {name:?}; known: {}", names.join(", ")));
        }
    };
    for (k, v) in &given {
        if v.is_some() && !accepted.contains(k) {
            return usage(format!("--{k} does not apply to {canonical} (takes {})", accepted.join(", ")));
        }
    }
    let entry = match canonical {
        "killed-stable-sub" => gallery::killed_stable_sub(p.alpha.unwrap_or(0.5)),
        "drift-exp-jump" => gallery::drift_exp_jump(p.c.unwrap_or(1.0), p.q.unwrap_or(1.0), p.rho.unwrap_or(1.0), p.alpha.unwrap_or(1.0), p.gamma),
        "killed-drift" => gallery::drift_exp_jump(p.c.unwrap_or(1.0), p.q.unwrap_or(1.0), 0.0, p.alpha.unwrap_or(1.0), Some(p.gamma.unwrap_or(1.0))),
        "brownian-drift" => gallery::brownian_drift(p.sigma.unwrap_or(1.0), p.b.unwrap_or(1.0), p.alpha.unwrap_or(1.0)),
        "stable-csbp" => gallery::stable_csbp(p.alpha.unwrap_or(1.5), p.c_plus.unwrap_or(1.0)),
        "stable-killed" => gallery::stable_killed(p.alpha.unwrap_or(1.0), p.rho.unwrap_or(0.5)),
        "rational" => gallery::rational(p.delta.unwrap_or(3.0), p.b.unwrap_or(4.0)),
        "finite-drift-free" => gallery::finite_drift_free(p.mass.unwrap_or(1.0), p.rate.unwrap_or(1.0), p.q.unwrap_or(0.5)),
        _ => gallery::stable_sub_drift(p.d.unwrap_or(1.0), p.alpha.unwrap_or(0.5), p.q.unwrap_or(0.5)),
    };
    entry.map_err(|e| UsageError(e.to_string()).into())
}
