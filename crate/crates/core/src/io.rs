//! JSON forms of the library's inputs and outputs.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formula::infinite::RescaledParams;
use crate::graphs::{self, SignString};
use crate::hamiltonians::{EdgeCoeffs, HamiltonianSpec, PresetKind};
use crate::simulator::{AnsatzSpec, ParamSchedule};

#[derive(Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum AnsatzJson {
    Simplified { signs: Vec<i8> },
    General { n: Vec<[f64; 3]>, m: Vec<[f64; 3]> },
}

/// `{"variant":"simplified","signs":[...]}` or `{"variant":"general","n":[...],"m":[...]}`.
pub fn ansatz_from_value(value: Value) -> Result<AnsatzSpec> {
    match serde_json::from_value(value)? {
        AnsatzJson::Simplified { signs } => Ok(AnsatzSpec::Simplified(SignString::new(signs)?)),
        AnsatzJson::General { n, m } => AnsatzSpec::general(n, m),
    }
}

pub fn ansatz_to_value(spec: &AnsatzSpec) -> Value {
    match spec {
        AnsatzSpec::Simplified(s) => json!({ "variant": "simplified", "signs": s.as_slice() }),
        AnsatzSpec::General { axes, initial } => json!({ "variant": "general", "n": axes, "m": initial }),
    }
}

/// Sign strings are accepted as a bare array, as `{"signs": …}` or as an
/// ansatz document.
pub fn signs_from_value(value: Value) -> Result<SignString> {
    if value.get("variant").is_some() {
        return match ansatz_from_value(value)? {
            AnsatzSpec::Simplified(s) => Ok(s),
            AnsatzSpec::General { .. } => Err(Error::InvalidInput("expected a sign string".into())),
        };
    }
    if value.is_array() {
        return SignString::new(serde_json::from_value(value)?);
    }
    Ok(serde_json::from_value(value)?)
}

/// `[c_I, c_XX, c_YY, c_ZZ]` or an object with those fields.
pub fn coeffs_from_value(value: Value) -> Result<EdgeCoeffs> {
    if let Ok([c_i, c_xx, c_yy, c_zz]) = serde_json::from_value::<[f64; 4]>(value.clone()) {
        return Ok(EdgeCoeffs { c_i, c_xx, c_yy, c_zz });
    }
    Ok(serde_json::from_value(value)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    kind: String,
    graph: Value,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    h: Option<f64>,
    /// Custom kind: one coefficient set for all edges or one per edge.
    #[serde(default)]
    coeffs: Option<Value>,
    /// Custom kind: one field value for all vertices or one per vertex.
    #[serde(default)]
    field: Option<Value>,
}

/// `{"kind", "graph", "delta"?, "h"?}`; `kind = "custom"` takes `coeffs`
/// (a single set or one per edge) and an optional `field`.
pub fn spec_from_value(value: Value) -> Result<HamiltonianSpec> {
    let raw: SpecJson = serde_json::from_value(value)?;
    let graph = graphs::json::from_value(raw.graph)?;
    if raw.kind != "custom" {
        if raw.coeffs.is_some() || raw.field.is_some() {
            return Err(Error::InvalidInput(format!(
                "`coeffs` and `field` are only read for kind \"custom\", not {:?}",
                raw.kind
            )));
        }
        return HamiltonianSpec::preset(raw.kind.parse::<PresetKind>()?, graph, raw.delta, raw.h);
    }
    let Some(coeffs) = raw.coeffs else {
        return Err(Error::InvalidInput("custom kind needs `coeffs`".into()));
    };
    let field = match raw.field {
        None => vec![0.0; graph.n_vertices()],
        Some(Value::Array(a)) => a
            .into_iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| Error::InvalidInput("field entries must be numbers".into()))
            })
            .collect::<Result<_>>()?,
        Some(x) => vec![
            x.as_f64()
                .ok_or_else(|| Error::InvalidInput("field must be a number or array".into()))?;
            graph.n_vertices()
        ],
    };
    let per_edge = matches!(&coeffs, Value::Array(a) if a.first().is_some_and(|x| !x.is_number()));
    let edge_coeffs = if per_edge {
        let Value::Array(a) = coeffs else { unreachable!() };
        a.into_iter().map(coeffs_from_value).collect::<Result<Vec<_>>>()?
    } else {
        let c = coeffs_from_value(coeffs)?;
        let scaled = HamiltonianSpec::uniform(graph.clone(), c, 0.0)?;
        scaled.edge_coeffs().to_vec()
    };
    HamiltonianSpec::new(graph, edge_coeffs, field)
}

pub fn spec_to_value(spec: &HamiltonianSpec) -> Value {
    let coeffs: Vec<[f64; 4]> = spec
        .edge_coeffs()
        .iter()
        .map(|c| [c.c_i, c.c_xx, c.c_yy, c.c_zz])
        .collect();
    json!({
        "kind": "custom",
        "graph": graphs::json::to_value(spec.graph()),
        "coeffs": coeffs,
        "field": spec.field(),
    })
}

pub fn params_from_value(value: Value) -> Result<ParamSchedule> {
    let p: ParamSchedule = serde_json::from_value(value)?;
    p.validate()?;
    Ok(p)
}

pub fn params_to_value(params: &ParamSchedule) -> Value {
    serde_json::to_value(params).expect("plain numeric fields serialize")
}

#[derive(Deserialize)]
struct RescaledJson {
    alpha_tilde: Vec<f64>,
    beta: Vec<i64>,
    delta: Vec<f64>,
}

/// `{"alpha_tilde", "beta", "delta"}` with `beta` in integer quarter turns.
pub fn rescaled_from_value(value: Value) -> Result<RescaledParams> {
    let raw: RescaledJson = serde_json::from_value(value)?;
    Ok(RescaledParams::from_quarter_turns(
        raw.alpha_tilde,
        &raw.beta,
        raw.delta,
    ))
}

/// Inverse of [`rescaled_from_value`]; `beta` entries must be multiples of `π/4`.
pub fn rescaled_to_value(params: &RescaledParams) -> Result<Value> {
    let quarters = params
        .beta
        .iter()
        .map(|b| {
            let q = (b / std::f64::consts::FRAC_PI_4).round();
            if (q * std::f64::consts::FRAC_PI_4 - b).abs() > 1e-9 {
                Err(Error::InvalidInput(format!("beta {b} is not a multiple of π/4")))
            } else {
                Ok(q as i64)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "alpha_tilde": params.alpha_tilde, "beta": quarters, "delta": params.delta }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::InteractionGraph;

    #[test]
    fn ansatz_round_trip() {
        let a = AnsatzSpec::Simplified(SignString::alternating(4));
        assert_eq!(ansatz_from_value(ansatz_to_value(&a)).unwrap(), a);
        let g = AnsatzSpec::general(vec![[0.0, 0.0, 1.0]; 2], vec![[1.0, 0.0, 0.0]; 2]).unwrap();
        assert_eq!(ansatz_from_value(ansatz_to_value(&g)).unwrap(), g);
        assert!(
            ansatz_from_value(json!({"variant": "general", "n": [[1.0, 1.0, 0.0]], "m": [[1.0, 0.0, 0.0]]})).is_err()
        );
    }

    #[test]
    fn spec_presets_and_custom() {
        let g = graphs::json::to_value(&InteractionGraph::ring(4).unwrap());
        let s = spec_from_value(json!({"kind": "qmc", "graph": g})).unwrap();
        assert_eq!(s, HamiltonianSpec::qmc(InteractionGraph::ring(4).unwrap()));
        let x = spec_from_value(json!({"kind": "xxz", "graph": g, "delta": 0.5, "h": 0.5})).unwrap();
        assert_eq!(x.field(), &[0.5; 4]);
        assert!(spec_from_value(json!({"kind": "xxz", "graph": g})).is_err());
        let c = spec_from_value(json!({"kind": "custom", "graph": g, "coeffs": [0.5, -0.5, -0.5, -0.5]})).unwrap();
        assert_eq!(c, s);
        assert_eq!(spec_from_value(spec_to_value(&x)).unwrap(), x);
    }

    #[test]
    fn rescaled_round_trip() {
        let r = RescaledParams::from_quarter_turns(vec![0.5], &[1], vec![0.3]);
        let v = rescaled_to_value(&r).unwrap();
        assert_eq!(v["beta"], json!([1]));
        assert_eq!(rescaled_from_value(v).unwrap(), r);
    }
}
