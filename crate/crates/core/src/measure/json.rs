use super::{Atom, Cap, CapProfile, Measure};
use crate::error::{Error, Result};
use crate::geometry::{Disk, Point2};
use crate::grid::{GridField, GridSpec};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapDoc {
    pub c: [f64; 2],
    pub r: f64,
    pub mass: f64,
    #[serde(default)]
    pub plateau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    #[serde(rename = "L")]
    pub half_extent: f64,
    pub n: usize,
    /// Little-endian f64 samples, base64.
    pub data: String,
}

/// On-disk form of a [`Measure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<Vec<CapDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDoc>,
}

pub fn encode_samples(data: &[f64]) -> String {
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

pub fn decode_samples(text: &str) -> Result<Vec<f64>> {
    let bytes = STANDARD.decode(text).map_err(|e| Error::Serde(e.to_string()))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Serde("sample payload is not a whole number of f64".into()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

impl From<&Measure> for MeasureDoc {
    fn from(m: &Measure) -> Self {
        match m {
            Measure::Atomic(a) => MeasureDoc {
                variant: "atomic".into(),
                atoms: Some(a.iter().map(|x| [x.at.x, x.at.y, x.weight]).collect()),
                caps: None,
                grid: None,
            },
            Measure::CapSum(c) => MeasureDoc {
                variant: "caps".into(),
                atoms: None,
                caps: Some(
                    c.iter()
                        .map(|x| CapDoc {
                            c: [x.support.center.x, x.support.center.y],
                            r: x.support.radius,
                            mass: x.mass,
                            plateau: x.profile.plateau,
                        })
                        .collect(),
                ),
                grid: None,
            },
            Measure::Gridded(f) => MeasureDoc {
                variant: "grid".into(),
                atoms: None,
                caps: None,
                grid: Some(GridDoc {
                    half_extent: f.spec.half_extent,
                    n: f.spec.n,
                    data: encode_samples(&f.data),
                }),
            },
        }
    }
}

impl TryFrom<MeasureDoc> for Measure {
    type Error = Error;

    fn try_from(d: MeasureDoc) -> Result<Measure> {
        let m = match d.variant.as_str() {
            "atomic" => {
                let atoms = d.atoms.ok_or_else(|| Error::Serde("atomic measure without atoms".into()))?;
                Measure::Atomic(atoms.iter().map(|a| Atom { at: Point2::new(a[0], a[1]), weight: a[2] }).collect())
            }
            "caps" => {
                let caps = d.caps.ok_or_else(|| Error::Serde("cap measure without caps".into()))?;
                Measure::CapSum(
                    caps.iter()
                        .map(|c| Cap {
                            support: Disk::new(Point2::new(c.c[0], c.c[1]), c.r),
                            mass: c.mass,
                            profile: CapProfile { plateau: c.plateau },
                        })
                        .collect(),
                )
            }
            "grid" => {
                let g = d.grid.ok_or_else(|| Error::Serde("grid measure without grid".into()))?;
                let spec = GridSpec::new(g.half_extent, g.n)?;
                Measure::Gridded(GridField::from_data(spec, 1, decode_samples(&g.data)?)?)
            }
            other => return Err(Error::Serde(format!("unknown measure variant {other:?}"))),
        };
        m.validate()?;
        Ok(m)
    }
}

impl Measure {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&MeasureDoc::from(self)).expect("measure documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Measure> {
        let doc: MeasureDoc = serde_json::from_str(text)?;
        Measure::try_from(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_roundtrip_and_shape() {
        let m = Measure::atoms(&[(Point2::new(0.5, -1.0), 0.25)]);
        let j = m.to_json();
        assert_eq!(j, r#"{"variant":"atomic","atoms":[[0.5,-1.0,0.25]]}"#);
        assert_eq!(Measure::from_json(&j).unwrap(), m);
    }

    #[test]
    fn grid_roundtrip_is_bit_exact() {
        let spec = GridSpec::new(1.0, 8).unwrap();
        let f = GridField::from_fn(spec, |p| (p.x * 3.1).sin().abs() + p.y * p.y);
        let m = Measure::Gridded(f);
        assert_eq!(Measure::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn caps_roundtrip() {
        let m = Measure::CapSum(vec![Cap::new(Disk::new(Point2::new(1.0, 2.0), 0.5), 3.0)]);
        assert_eq!(Measure::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn bad_payloads_rejected() {
        assert!(Measure::from_json(r#"{"variant":"blob"}"#).is_err());
        assert!(Measure::from_json(r#"{"variant":"grid","grid":{"L":1.0,"n":8,"data":"AAA="}}"#).is_err());
    }
}
