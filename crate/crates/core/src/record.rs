//! Serializable forms of complex values and identity instances.
//!
//! Complex numbers are written as `{"re": …, "im": …}`. An
//! [`InstanceRecord`] carries every parameter of an instance so that it can
//! be replayed standalone; converting back re-checks the constraints.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::identities::{Extent, IdentityError, IdentityId, IdentityInstance, Param};
use crate::kernels::VariableVector;
use crate::theta::{Nome, Scalar, TruncationPolicy};

/// Accepts `0.2`, `{"re": 0.2, "im": 0.1}` or `"0.2+0.1i"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexInput")]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexInput {
    Real(f64),
    Pair { re: f64, im: f64 },
    Text(String),
}

impl TryFrom<ComplexInput> for ComplexRecord {
    type Error = String;

    fn try_from(c: ComplexInput) -> Result<Self, String> {
        let z = match c {
            ComplexInput::Real(re) => Scalar::new(re, 0.0),
            ComplexInput::Pair { re, im } => Scalar::new(re, im),
            ComplexInput::Text(s) => parse_complex(&s)?,
        };
        Ok(z.into())
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Result<Scalar, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    t.replace('j', "i")
        .parse::<Scalar>()
        .map_err(|_| format!("cannot parse `{s}` as a complex number"))
}

impl From<Scalar> for ComplexRecord {
    fn from(z: Scalar) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexRecord> for Scalar {
    fn from(c: ComplexRecord) -> Self {
        Scalar::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomeRecord {
    pub p: ComplexRecord,
    pub q: ComplexRecord,
    pub truncation: TruncationPolicy,
}

impl From<&Nome> for NomeRecord {
    fn from(n: &Nome) -> Self {
        Self {
            p: n.p.into(),
            q: n.q.into(),
            truncation: n.truncation,
        }
    }
}

impl TryFrom<&NomeRecord> for Nome {
    type Error = IdentityError;

    fn try_from(r: &NomeRecord) -> Result<Self, Self::Error> {
        Ok(Nome::with_truncation(r.p.into(), r.q.into(), r.truncation)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: IdentityId,
    pub extent: Extent,
    pub params: BTreeMap<Param, ComplexRecord>,
    pub z: Vec<ComplexRecord>,
    pub nome: NomeRecord,
    pub z_product: ComplexRecord,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<ComplexRecord>,
}

impl From<&IdentityInstance> for InstanceRecord {
    fn from(inst: &IdentityInstance) -> Self {
        Self {
            id: inst.id,
            extent: inst.extent.clone(),
            params: inst.params.iter().map(|(&k, &v)| (k, v.into())).collect(),
            z: inst.z.entries().iter().map(|&z| z.into()).collect(),
            nome: (&inst.nome).into(),
            z_product: inst.z_product.into(),
            lambda: inst.lambda.map(Into::into),
        }
    }
}

impl TryFrom<&InstanceRecord> for IdentityInstance {
    type Error = IdentityError;

    /// Rebuilds the instance; `z_product` and `lambda` are recomputed.
    fn try_from(r: &InstanceRecord) -> Result<Self, Self::Error> {
        let params = r.params.iter().map(|(&k, &v)| (k, v.into())).collect();
        let z = VariableVector::new(r.z.iter().map(|&c| c.into()).collect())?;
        IdentityInstance::from_parts(r.id, params, z, r.extent.clone(), (&r.nome).try_into()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_inputs() {
        for (text, want) in [
            ("0.2", Scalar::new(0.2, 0.0)),
            (r#"{"re": 0.1, "im": -0.3}"#, Scalar::new(0.1, -0.3)),
            (r#""0.1+0.05i""#, Scalar::new(0.1, 0.05)),
            (r#""0.1 - 0.05j""#, Scalar::new(0.1, -0.05)),
        ] {
            let c: ComplexRecord = serde_json::from_str(text).unwrap();
            assert_eq!(Scalar::from(c), want, "{text}");
        }
        assert!(serde_json::from_str::<ComplexRecord>(r#""abc""#).is_err());
    }
}
