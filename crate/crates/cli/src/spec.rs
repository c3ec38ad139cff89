//! Channel-spec documents.
//!
//! Exactly one of three keys:
//!
//! ```json
//! {"stokes": {"R": [[1,0,0],[0,1,0],[0,0,1]], "t": [0,0,0]}}
//! {"biases": {"pairs": [{"a": "z", "b": "z", "q0": 1.0, "q1": 1.0}, ...]}}
//! {"family": {"name": "depolarizing", "params": {"qber": 0.05}}}
//! ```

use std::collections::BTreeSet;

use axcomp::{family, stokes_from_biases, Axis, BiasTable, Family, Mat3, QubitChannel, Vec3};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    stokes: Option<StokesSpec>,
    biases: Option<BiasSpec>,
    family: Option<FamilySpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StokesSpec {
    #[serde(rename = "R")]
    r: [[f64; 3]; 3],
    #[serde(default)]
    t: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BiasSpec {
    pairs: Vec<BiasPair>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BiasPair {
    a: String,
    b: String,
    q0: f64,
    q1: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

fn axis(s: &str) -> Result<Axis, CliError> {
    Axis::parse(s).ok_or_else(|| CliError::Parse(format!("unknown axis {s:?}, expected z, x or y")))
}

/// Parses a channel-spec document and resolves it to Stokes form.
pub fn parse_channel(text: &str) -> Result<QubitChannel, CliError> {
    let doc: Document =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("channel spec: {e}")))?;
    match (doc.stokes, doc.biases, doc.family) {
        (Some(s), None, None) => {
            let r = Mat3::from_fn(|i, j| s.r[i][j]);
            Ok(QubitChannel::new(r, Vec3::from(s.t))?)
        }
        (None, Some(b), None) => {
            let mut table = BiasTable::new();
            let mut seen = BTreeSet::new();
            for p in &b.pairs {
                let (a, bb) = (axis(&p.a)?, axis(&p.b)?);
                if !seen.insert((a, bb)) {
                    return Err(CliError::Parse(format!("bias pair ({a}, {bb}) given twice")));
                }
                table.set(a, bb, p.q0, p.q1)?;
            }
            Ok(stokes_from_biases(&table)?)
        }
        (None, None, Some(f)) => Ok(family(&resolve_family(&f)?)?),
        _ => Err(CliError::Parse(
            "channel spec needs exactly one of \"stokes\", \"biases\", \"family\"".into(),
        )),
    }
}

fn number(params: &Map<String, Value>, key: &str) -> Result<f64, CliError> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| CliError::Parse(format!("family parameter {key:?} must be a number")))
}

fn array<const N: usize>(params: &Map<String, Value>, key: &str) -> Result<[f64; N], CliError> {
    let err = || CliError::Parse(format!("family parameter {key:?} must be an array of {N} numbers"));
    let items = params.get(key).and_then(Value::as_array).ok_or_else(err)?;
    if items.len() != N {
        return Err(err());
    }
    let mut out = [0.0; N];
    for (o, v) in out.iter_mut().zip(items) {
        *o = v.as_f64().ok_or_else(err)?;
    }
    Ok(out)
}

fn only_keys(params: &Map<String, Value>, allowed: &[&str]) -> Result<(), CliError> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(CliError::Parse(format!(
                "unknown family parameter {k:?}, expected one of {allowed:?}"
            )));
        }
    }
    Ok(())
}

/// Maps a named family and its parameter object onto [`Family`].
pub fn resolve_family(f: &FamilySpec) -> Result<Family, CliError> {
    let p = &f.params;
    match f.name.as_str() {
        "identity" => {
            only_keys(p, &[])?;
            Ok(Family::Identity)
        }
        "depolarizing" => {
            only_keys(p, &["qber"])?;
            Ok(Family::Depolarizing {
                qber: number(p, "qber")?,
            })
        }
        "phase_flip" => {
            only_keys(p, &["p"])?;
            Ok(Family::PhaseFlip { p: number(p, "p")? })
        }
        "bit_flip" => {
            only_keys(p, &["p"])?;
            Ok(Family::BitFlip { p: number(p, "p")? })
        }
        "rotated_pauli" => {
            only_keys(p, &["q", "alice", "bob"])?;
            Ok(Family::RotatedPauli {
                q: array(p, "q")?,
                alice: array(p, "alice").or_else(|_| default_angles(p, "alice"))?,
                bob: array(p, "bob").or_else(|_| default_angles(p, "bob"))?,
            })
        }
        other => Err(CliError::Parse(format!(
            "unknown family {other:?}, expected identity, depolarizing, phase_flip, bit_flip or rotated_pauli"
        ))),
    }
}

fn default_angles(p: &Map<String, Value>, key: &str) -> Result<[f64; 3], CliError> {
    if p.contains_key(key) {
        array(p, key)
    } else {
        Ok([0.0; 3])
    }
}

/// Sets a scalar parameter; for `rotated_pauli`, keys such as `q.1` or
/// `alice.0` address one array entry. Absent angle arrays start at zero.
pub fn set_param(f: &mut FamilySpec, key: &str, value: f64) -> Result<(), CliError> {
    let num = serde_json::Number::from_f64(value)
        .ok_or_else(|| CliError::Usage(format!("parameter value {value} is not finite")))?;
    match key.split_once('.') {
        None => {
            f.params.insert(key.to_string(), Value::Number(num));
        }
        Some((name, index)) => {
            let index: usize = index
                .parse()
                .map_err(|_| CliError::Usage(format!("bad parameter index in {key:?}")))?;
            if matches!(name, "alice" | "bob") && !f.params.contains_key(name) {
                f.params.insert(name.to_string(), serde_json::json!([0.0, 0.0, 0.0]));
            }
            let entry = f
                .params
                .get_mut(name)
                .and_then(Value::as_array_mut)
                .ok_or_else(|| CliError::Usage(format!("parameter {name:?} is not an array")))?;
            let slot = entry
                .get_mut(index)
                .ok_or_else(|| CliError::Usage(format!("index {index} out of range for {name:?}")))?;
            *slot = Value::Number(num);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stokes_document() {
        let c = parse_channel(r#"{"stokes": {"R": [[0.9,0,0],[0,0.8,0],[0,0,0.7]], "t": [0,0,0]}}"#)
            .unwrap();
        assert_eq!(c.gamma(), Vec3::new(0.9, 0.8, 0.7));
        let no_t = parse_channel(r#"{"stokes": {"R": [[1,0,0],[0,1,0],[0,0,1]]}}"#).unwrap();
        assert_eq!(no_t, QubitChannel::identity());
    }

    #[test]
    fn bias_document() {
        let mut pairs = Vec::new();
        for a in ["z", "x", "y"] {
            for b in ["z", "x", "y"] {
                let v = if a == b { 0.9 } else { 0.0 };
                pairs.push(format!(r#"{{"a":"{a}","b":"{b}","q0":{v},"q1":{v}}}"#));
            }
        }
        let text = format!(r#"{{"biases": {{"pairs": [{}]}}}}"#, pairs.join(","));
        let c = parse_channel(&text).unwrap();
        assert!((c.matrix() - Mat3::identity() * 0.9).amax() < 1e-15);

        let missing = r#"{"biases": {"pairs": [{"a":"z","b":"z","q0":1,"q1":1}]}}"#;
        assert!(matches!(parse_channel(missing), Err(CliError::Channel(_))));
    }

    #[test]
    fn family_document() {
        let c = parse_channel(r#"{"family": {"name": "depolarizing", "params": {"qber": 0.05}}}"#)
            .unwrap();
        assert!((c.gamma() - Vec3::repeat(0.9)).amax() < 1e-15);
        let id = parse_channel(r#"{"family": {"name": "identity"}}"#).unwrap();
        assert_eq!(id, QubitChannel::identity());
        assert!(matches!(
            parse_channel(r#"{"family": {"name": "depolarizing", "params": {"p": 0.05}}}"#),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(
            parse_channel(r#"{"family": {"name": "depolarizing", "params": {"qber": 0.9}}}"#),
            Err(CliError::Channel(_))
        ));
    }

    #[test]
    fn malformed_documents() {
        for text in [
            "",
            "{}",
            "[1,2]",
            r#"{"stokes": {"R": [[1,0],[0,1]]}}"#,
            r#"{"stokes": {"R": [[1,0,0],[0,1,0],[0,0,1]]}, "family": {"name": "identity"}}"#,
            r#"{"kraus": []}"#,
        ] {
            assert!(matches!(parse_channel(text), Err(CliError::Parse(_))), "{text}");
        }
    }

    #[test]
    fn indexed_parameters() {
        let mut f = FamilySpec {
            name: "rotated_pauli".into(),
            params: serde_json::from_str(r#"{"q": [1, 0, 0, 0], "alice": [0, 0, 0]}"#).unwrap(),
        };
        set_param(&mut f, "alice.1", 0.5).unwrap();
        assert_eq!(f.params["alice"][1].as_f64(), Some(0.5));
        assert!(set_param(&mut f, "alice.7", 0.5).is_err());
        set_param(&mut f, "bob.2", -0.25).unwrap();
        assert_eq!(f.params["bob"], serde_json::json!([0.0, 0.0, -0.25]));
        assert!(set_param(&mut f, "x.0", 0.5).is_err());
    }
}
