//! JSON documents `{"kind": ..., "dim": ..., "params": ...}` for cones.
//! Matrices are written as row-major arrays of rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use super::{ConeDescriptor, ConeKind, ConePair, NonObliqueCertificate};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    kind: ConeKind,
    dim: usize,
    #[serde(default)]
    params: Value,
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|v| json!(v)).collect()))
            .collect(),
    )
}

fn rows_to_matrix(v: &Value, field: &str, ncols_hint: Option<usize>) -> Result<DMatrix<f64>> {
    let bad = || Error::InvalidCone(format!("params.{field}: expected an array of numeric rows"));
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone()).map_err(|_| bad())?;
    let ncols = rows.first().map(|r| r.len()).or(ncols_hint).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidCone(format!("params.{field}: ragged rows")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn param<'a>(params: &'a Value, field: &str) -> Result<&'a Value> {
    params
        .get(field)
        .ok_or_else(|| Error::InvalidCone(format!("params.{field}: missing")))
}

fn expect_keys(params: &Value, allowed: &[&str]) -> Result<()> {
    match params {
        Value::Null => Ok(()),
        Value::Object(map) => {
            if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(Error::InvalidCone(format!("params.{k}: unknown key")));
            }
            Ok(())
        }
        _ => Err(Error::InvalidCone("params: expected an object".into())),
    }
}

impl ConeDescriptor {
    /// The JSON document for this cone.
    pub fn to_document(&self) -> Value {
        let params = match self {
            Self::Orthant { .. } | Self::Monotone { .. } => Value::Object(Map::new()),
            Self::Circular { alpha, .. } => json!({ "alpha": alpha }),
            Self::Subspace { basis, .. } => json!({ "basis": matrix_to_rows(basis) }),
            Self::Ray { direction } => json!({ "direction": direction }),
            Self::Generator { generators } => json!({ "generators": matrix_to_rows(generators) }),
            Self::Halfspace { constraints } => {
                json!({ "constraints": matrix_to_rows(constraints) })
            }
            Self::Product { components } => {
                json!({ "components": components.iter().map(|c| c.to_document()).collect::<Vec<_>>() })
            }
            Self::Induced(pair) => json!({
                "inner": pair.inner.to_document(),
                "outer": pair.outer.to_document(),
                "certificate": pair.certificate,
            }),
        };
        json!({ "kind": self.kind(), "dim": self.dim(), "params": params })
    }

    /// Parse and validate a JSON cone document.
    pub fn from_document(doc: &Value) -> Result<Self> {
        let wire: Wire = serde_json::from_value(doc.clone())
            .map_err(|e| Error::InvalidCone(format!("cone document: {e}")))?;
        let p = &wire.params;
        let dim = wire.dim;
        let cone = match wire.kind {
            ConeKind::Orthant => {
                expect_keys(p, &[])?;
                Self::Orthant { dim }
            }
            ConeKind::Monotone => {
                expect_keys(p, &[])?;
                Self::Monotone { dim }
            }
            ConeKind::Circular => {
                expect_keys(p, &["alpha"])?;
                let alpha = param(p, "alpha")?
                    .as_f64()
                    .ok_or_else(|| Error::InvalidCone("params.alpha: expected a number".into()))?;
                Self::Circular { dim, alpha }
            }
            ConeKind::Subspace => {
                expect_keys(p, &["basis"])?;
                let basis = rows_to_matrix(param(p, "basis")?, "basis", None)?;
                if basis.nrows() == 0 {
                    Self::Subspace {
                        dim,
                        basis: DMatrix::zeros(dim, 0),
                    }
                } else {
                    Self::Subspace { dim, basis }
                }
            }
            ConeKind::Ray => {
                expect_keys(p, &["direction"])?;
                let direction: Vec<f64> = serde_json::from_value(param(p, "direction")?.clone())
                    .map_err(|_| Error::InvalidCone("params.direction: expected numbers".into()))?;
                Self::Ray { direction }
            }
            ConeKind::GeneratorCone => {
                expect_keys(p, &["generators"])?;
                Self::Generator {
                    generators: rows_to_matrix(param(p, "generators")?, "generators", None)?,
                }
            }
            ConeKind::HalfspaceCone => {
                expect_keys(p, &["constraints"])?;
                Self::Halfspace {
                    constraints: rows_to_matrix(
                        param(p, "constraints")?,
                        "constraints",
                        Some(dim),
                    )?,
                }
            }
            ConeKind::Product => {
                expect_keys(p, &["components"])?;
                let comps = param(p, "components")?.as_array().ok_or_else(|| {
                    Error::InvalidCone("params.components: expected an array".into())
                })?;
                Self::Product {
                    components: comps
                        .iter()
                        .map(Self::from_document)
                        .collect::<Result<_>>()?,
                }
            }
            ConeKind::Induced => {
                expect_keys(p, &["inner", "outer", "certificate"])?;
                let inner = Self::from_document(param(p, "inner")?)?;
                let outer = Self::from_document(param(p, "outer")?)?;
                let certificate = match p.get("certificate") {
                    Some(c) => serde_json::from_value::<NonObliqueCertificate>(c.clone())
                        .map_err(|e| Error::InvalidCone(format!("params.certificate: {e}")))?,
                    None => NonObliqueCertificate::Unchecked,
                };
                Self::Induced(Box::new(ConePair {
                    inner,
                    outer,
                    certificate,
                }))
            }
        };
        cone.validate()?;
        if cone.dim() != dim {
            return Err(Error::InvalidCone(format!(
                "dim: document says {dim} but parameters give {}",
                cone.dim()
            )));
        }
        Ok(cone)
    }
}

impl Serialize for ConeDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConeDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_document(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(c: &ConeDescriptor) {
        let text = serde_json::to_string(c).unwrap();
        let back: ConeDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(&back, c, "{text}");
    }

    #[test]
    fn roundtrips_every_kind() {
        roundtrip(&ConeDescriptor::orthant(3).unwrap());
        roundtrip(&ConeDescriptor::monotone(4).unwrap());
        roundtrip(&ConeDescriptor::circular(3, 0.5).unwrap());
        roundtrip(&ConeDescriptor::zero(3).unwrap());
        roundtrip(&ConeDescriptor::whole_space(2).unwrap());
        roundtrip(&ConeDescriptor::ray(vec![1.0, 2.0]).unwrap());
        roundtrip(
            &ConeDescriptor::generator(DMatrix::from_row_slice(2, 3, &[1., 0., 1., 0., 1., 1.]))
                .unwrap(),
        );
        roundtrip(&ConeDescriptor::halfspace(ConeDescriptor::monotone_constraints(4)).unwrap());
        roundtrip(
            &ConeDescriptor::product(vec![
                ConeDescriptor::circular(3, 0.5).unwrap(),
                ConeDescriptor::whole_space(1).unwrap(),
            ])
            .unwrap(),
        );
        roundtrip(&ConeDescriptor::induced(ConePair::constants_vs_monotone(5).unwrap()).unwrap());
    }

    #[test]
    fn parses_handwritten_document() {
        let c: ConeDescriptor = serde_json::from_str(
            r#"{"kind":"generator-cone","dim":2,"params":{"generators":[[1,1],[0,1]]}}"#,
        )
        .unwrap();
        assert_eq!(c.project(&[-1.0, 2.0]).unwrap().len(), 2);
        let m: ConeDescriptor = serde_json::from_str(r#"{"kind":"monotone","dim":3}"#).unwrap();
        assert_eq!(m, ConeDescriptor::Monotone { dim: 3 });
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let bad = [
            r#"{"kind":"orthant","dim":0}"#,
            r#"{"kind":"circular","dim":3,"params":{}}"#,
            r#"{"kind":"circular","dim":3,"params":{"alpha":0.5,"beta":1}}"#,
            r#"{"kind":"ray","dim":3,"params":{"direction":[1,0]}}"#,
            r#"{"kind":"subspace","dim":2,"params":{"basis":[[1],[1]]}}"#,
            r#"{"kind":"banana","dim":2}"#,
            r#"{"kind":"orthant","dim":2,"extra":1}"#,
        ];
        for text in bad {
            assert!(
                serde_json::from_str::<ConeDescriptor>(text).is_err(),
                "{text}"
            );
        }
    }
}
