//! JSON form of [`LevySpec`].
//!
//! ```json
//! { "drift": -1.0, "sigma": 0.0, "killing": 0.5, "alpha": 1.0,
//!   "jumps_pos": null,
//!   "jumps_neg": { "kind": "stable", "c": 0.56, "alpha": 0.5 } }
//! ```
//! Measure kinds: `stable {c, alpha}`, `exp {mass, rate}`, `lamperti_stable {c, alpha, shape?}`,
//! `finite {atoms: [[size, rate], ...]}`, `tail_grid {x: [...], tail: [...]}`,
//! `scaled {factor, inner}` (image under x ↦ factor·x).

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::levy::measure::{LampertiShape, LevyMeasure, TailSource};
use crate::levy::spec::LevySpec;
use crate::real::Real;

fn num(obj: &Map<String, Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match obj.get(key) {
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| Error::Schema(format!("'{key}' is not a number"))),
        Some(Value::Null) | None => default.ok_or_else(|| Error::Schema(format!("missing field '{key}'"))),
        Some(_) => Err(Error::Schema(format!("'{key}' must be a number"))),
    }
}

fn num_array(obj: &Map<String, Value>, key: &str) -> Result<Vec<f64>> {
    let arr = obj.get(key).and_then(Value::as_array).ok_or_else(|| Error::Schema(format!("'{key}' must be an array")))?;
    arr.iter().map(|v| v.as_f64().ok_or_else(|| Error::Schema(format!("'{key}' must hold numbers")))).collect()
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Schema(format!("unknown field '{k}' in {what}")));
        }
    }
    Ok(())
}

/// Parses a measure object; `negative` picks the default Lamperti shape.
pub fn measure_from_json<F: Real>(v: &Value, negative: bool) -> Result<LevyMeasure<F>> {
    let obj = v.as_object().ok_or_else(|| Error::Schema("measure must be an object".into()))?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Schema("measure needs a string 'kind'".into()))?;
    let f = F::lit;
    let m = match kind {
        "stable" => {
            check_keys(obj, &["kind", "c", "alpha"], "stable measure")?;
            LevyMeasure::stable(f(num(obj, "c", None)?), f(num(obj, "alpha", None)?))?
        }
        "exp" => {
            check_keys(obj, &["kind", "mass", "rate"], "exp measure")?;
            LevyMeasure::exp(f(num(obj, "mass", None)?), f(num(obj, "rate", None)?))?
        }
        "lamperti_stable" => {
            check_keys(obj, &["kind", "c", "alpha", "shape"], "lamperti_stable measure")?;
            let shape = match obj.get("shape").and_then(Value::as_str) {
                None => {
                    if negative {
                        LampertiShape::Down
                    } else {
                        LampertiShape::Up
                    }
                }
                Some("up") => LampertiShape::Up,
                Some("down") => LampertiShape::Down,
                Some(s) => return Err(Error::Schema(format!("unknown lamperti shape '{s}'"))),
            };
            LevyMeasure::lamperti(f(num(obj, "c", None)?), f(num(obj, "alpha", None)?), shape)?
        }
        "finite" => {
            check_keys(obj, &["kind", "atoms"], "finite measure")?;
            let arr = obj.get("atoms").and_then(Value::as_array).ok_or_else(|| Error::Schema("'atoms' must be an array".into()))?;
            let mut atoms = Vec::with_capacity(arr.len());
            for a in arr {
                let pair = a.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::Schema("atoms are [size, rate] pairs".into()))?;
                let s = pair[0].as_f64().ok_or_else(|| Error::Schema("atom size must be a number".into()))?;
                let r = pair[1].as_f64().ok_or_else(|| Error::Schema("atom rate must be a number".into()))?;
                atoms.push((f(s), f(r)));
            }
            LevyMeasure::finite(atoms)?
        }
        "tail_grid" => {
            check_keys(obj, &["kind", "x", "tail"], "tail_grid measure")?;
            let x = num_array(obj, "x")?.into_iter().map(f).collect();
            let t = num_array(obj, "tail")?.into_iter().map(f).collect();
            LevyMeasure::tail_grid(x, t)?
        }
        "scaled" => {
            check_keys(obj, &["kind", "factor", "inner"], "scaled measure")?;
            let inner = obj.get("inner").ok_or_else(|| Error::Schema("missing field 'inner'".into()))?;
            let factor = num(obj, "factor", None)?;
            if !(factor > 0.0) {
                return Err(Error::Schema(format!("scale factor must be > 0, got {factor}")));
            }
            measure_from_json::<F>(inner, negative)?.scaled(f(factor))
        }
        other => return Err(Error::Schema(format!("unknown measure kind '{other}'"))),
    };
    Ok(m)
}

pub fn measure_to_json<F: Real>(m: &LevyMeasure<F>) -> Result<Value> {
    let g = |x: F| x.to_f64x();
    Ok(match m {
        LevyMeasure::Stable { c, alpha } => json!({"kind": "stable", "c": g(*c), "alpha": g(*alpha)}),
        LevyMeasure::Exp { mass, rate } => json!({"kind": "exp", "mass": g(*mass), "rate": g(*rate)}),
        LevyMeasure::LampertiStable { c, alpha, shape } => json!({
            "kind": "lamperti_stable", "c": g(*c), "alpha": g(*alpha),
            "shape": match shape { LampertiShape::Up => "up", LampertiShape::Down => "down" },
        }),
        LevyMeasure::Finite { atoms } => {
            json!({"kind": "finite", "atoms": atoms.iter().map(|&(s, r)| vec![g(s), g(r)]).collect::<Vec<_>>()})
        }
        LevyMeasure::General { source: TailSource::Grid { x, tail }, .. } => json!({
            "kind": "tail_grid",
            "x": x.iter().map(|&v| g(v)).collect::<Vec<_>>(),
            "tail": tail.iter().map(|&v| g(v)).collect::<Vec<_>>(),
        }),
        LevyMeasure::Scaled { inner, factor } => json!({"kind": "scaled", "factor": g(*factor), "inner": measure_to_json(inner)?}),
        _ => return Err(Error::Schema(format!("measure {m:?} has no JSON form"))),
    })
}

/// Parses a spec and applies its `alpha` rescaling.
pub fn spec_from_json<F: Real>(v: &Value) -> Result<LevySpec<F>> {
    let obj = v.as_object().ok_or_else(|| Error::Schema("spec must be a JSON object".into()))?;
    check_keys(obj, &["drift", "sigma", "killing", "jumps_pos", "jumps_neg", "alpha"], "spec")?;
    let side = |key: &str, negative: bool| -> Result<Option<LevyMeasure<F>>> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(m) => measure_from_json(m, negative).map(Some),
        }
    };
    let spec = LevySpec::new(
        F::lit(num(obj, "drift", Some(0.0))?),
        F::lit(num(obj, "sigma", Some(0.0))?),
        side("jumps_pos", false)?,
        side("jumps_neg", true)?,
        F::lit(num(obj, "killing", Some(0.0))?),
    )?;
    spec.rescale_alpha(F::lit(num(obj, "alpha", Some(1.0))?))
}

pub fn spec_from_str<F: Real>(s: &str) -> Result<LevySpec<F>> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
    spec_from_json(&v)
}

/// Serializes an α = 1 spec.
pub fn spec_to_json<F: Real>(s: &LevySpec<F>) -> Result<Value> {
    let side = |m: &Option<LevyMeasure<F>>| -> Result<Value> {
        match m {
            None => Ok(Value::Null),
            Some(m) => measure_to_json(m),
        }
    };
    Ok(json!({
        "drift": s.drift.to_f64x(),
        "sigma": s.sigma.to_f64x(),
        "killing": s.killing.to_f64x(),
        "jumps_pos": side(&s.jumps_pos)?,
        "jumps_neg": side(&s.jumps_neg)?,
        "alpha": 1.0,
    }))
}
