//! JSON file formats.
//!
//! Instance: `{"vectors":[[xn,xd,yn,yd],...],"cone_t":[tn,td]}` (`cone_t` may be null).
//! Witness: `{"bins":[[[xn,xd,yn,yd],...],...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Packing, Vec2};
use crate::rational::{from_pair, to_pair, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub vectors: Vec<Vec2>,
    pub cone_t: Option<Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    vectors: Vec<[i64; 4]>,
    #[serde(default)]
    cone_t: Option<[i64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessFile {
    bins: Vec<Vec<[i64; 4]>>,
}

fn encode(v: &Vec2) -> Result<[i64; 4]> {
    let [xn, xd] = to_pair(&v.x())?;
    let [yn, yd] = to_pair(&v.y())?;
    Ok([xn, xd, yn, yd])
}

fn decode(q: [i64; 4]) -> Result<Vec2> {
    let x = from_pair([q[0], q[1]])?;
    let y = from_pair([q[2], q[3]])?;
    Vec2::new(x, y).map_err(|e| Error::Parse(e.to_string()))
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let file = InstanceFile {
        vectors: inst.vectors.iter().map(encode).collect::<Result<_>>()?,
        cone_t: inst.cone_t.as_ref().map(to_pair).transpose()?,
    };
    Ok(serde_json::to_string(&file)?)
}

/// Parses and validates an instance. Vectors outside `[0,1]²` and vectors
/// outside a declared cone are parse errors.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let vectors = file
        .vectors
        .into_iter()
        .map(decode)
        .collect::<Result<Vec<_>>>()?;
    let cone_t = file.cone_t.map(from_pair).transpose()?;
    if let Some(t) = cone_t {
        let cone = crate::model::ConeParams::new(t).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(v) = vectors.iter().find(|v| !cone.contains(v)) {
            return Err(Error::Parse(format!("{v} lies outside the declared cone")));
        }
    }
    Ok(Instance { vectors, cone_t })
}

pub fn witness_to_json(packing: &Packing) -> Result<String> {
    let file = WitnessFile {
        bins: packing
            .bins
            .iter()
            .map(|b| b.contents().iter().map(encode).collect::<Result<_>>())
            .collect::<Result<_>>()?,
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn witness_from_json(text: &str) -> Result<Packing> {
    let file: WitnessFile = serde_json::from_str(text)?;
    let groups = file
        .bins
        .into_iter()
        .map(|b| b.into_iter().map(decode).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Packing::from_groups(groups))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn instance_round_trip() {
        let inst = Instance {
            vectors: vec![Vec2::from_ratios(1, 2, 1, 4), Vec2::zero()],
            cone_t: None,
        };
        let text = instance_to_json(&inst).unwrap();
        assert_eq!(text, r#"{"vectors":[[1,2,1,4],[0,1,0,1]],"cone_t":null}"#);
        assert_eq!(instance_from_json(&text).unwrap(), inst);
    }

    #[test]
    fn cone_is_checked() {
        let ok = r#"{"vectors":[[1,2,1,2]],"cone_t":[1,2]}"#;
        assert_eq!(instance_from_json(ok).unwrap().cone_t, Some(ratio(1, 2)));
        let bad = r#"{"vectors":[[1,1,1,10]],"cone_t":[1,2]}"#;
        assert!(matches!(instance_from_json(bad), Err(Error::Parse(_))));
    }

    #[test]
    fn malformed_inputs() {
        for text in [
            "{",
            r#"{"vectors":[[1,2,3]]}"#,
            r#"{"vectors":[[1,0,1,2]]}"#,
            r#"{"vectors":[[3,2,1,2]]}"#,
            r#"{"vectors":[],"extra":1}"#,
        ] {
            assert!(
                matches!(instance_from_json(text), Err(Error::Parse(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn witness_round_trip() {
        let p = Packing::from_groups(vec![vec![Vec2::from_ratios(1, 3, 0, 1)], vec![]]);
        let text = witness_to_json(&p).unwrap();
        assert_eq!(text, r#"{"bins":[[[1,3,0,1]],[]]}"#);
        let back = witness_from_json(&text).unwrap();
        assert_eq!(back.bins.len(), 2);
        assert_eq!(back.bins[0].contents(), p.bins[0].contents());
    }
}
