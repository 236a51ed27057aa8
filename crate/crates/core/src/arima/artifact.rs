//! JSON persistence for fitted models.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

use super::model::{ArimaFit, ArimaSpec};

impl ArimaFit {
    /// Serializes the fit. Key order is fixed so artifacts are
    /// byte-stable for identical fits.
    pub fn to_artifact(&self) -> Value {
        let mut beta = Map::new();
        for (name, value) in &self.beta {
            beta.insert(name.clone(), json!(value));
        }
        let mut root = Map::new();
        root.insert(
            "spec".into(),
            json!({
                "p": self.spec.p,
                "d": self.spec.d,
                "q": self.spec.q,
                "P": self.spec.seasonal_p,
                "D": self.spec.seasonal_d,
                "Q": self.spec.seasonal_q,
                "s": self.spec.period,
            }),
        );
        root.insert("beta".into(), Value::Object(beta));
        root.insert("ar".into(), json!(self.ar));
        root.insert("ma".into(), json!(self.ma));
        root.insert("sar".into(), json!(self.seasonal_ar));
        root.insert("sma".into(), json!(self.seasonal_ma));
        root.insert("mean".into(), json!(self.mean));
        root.insert("sigma2".into(), json!(self.sigma2));
        root.insert("loglik".into(), json!(self.loglik));
        root.insert("aicc".into(), json!(self.aicc));
        root.insert("n_obs".into(), json!(self.n_obs));
        root.insert("n_eff".into(), json!(self.n_eff));
        Value::Object(root)
    }

    pub fn from_artifact(v: &Value) -> Result<ArimaFit> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Artifact("model artifact must be an object".into()))?;
        let field = |name: &str| -> Result<&Value> {
            obj.get(name)
                .ok_or_else(|| Error::Artifact(format!("missing field {name}")))
        };
        let number = |v: &Value, name: &str| -> Result<f64> {
            v.as_f64()
                .ok_or_else(|| Error::Artifact(format!("field {name} must be a number")))
        };
        let count = |v: &Value, name: &str| -> Result<usize> {
            v.as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| Error::Artifact(format!("field {name} must be a count")))
        };
        let vector = |v: &Value, name: &str| -> Result<Vec<f64>> {
            v.as_array()
                .ok_or_else(|| Error::Artifact(format!("field {name} must be an array")))?
                .iter()
                .map(|x| number(x, name))
                .collect()
        };

        let spec_value = field("spec")?;
        let spec_obj = spec_value
            .as_object()
            .ok_or_else(|| Error::Artifact("spec must be an object".into()))?;
        let order = |name: &str| -> Result<usize> {
            count(
                spec_obj
                    .get(name)
                    .ok_or_else(|| Error::Artifact(format!("spec missing {name}")))?,
                name,
            )
        };
        let spec = ArimaSpec::new(
            order("p")?,
            order("d")?,
            order("q")?,
            order("P")?,
            order("D")?,
            order("Q")?,
            order("s")?,
        );

        let beta_obj = field("beta")?
            .as_object()
            .ok_or_else(|| Error::Artifact("beta must be an object".into()))?;
        let mut beta = Vec::with_capacity(beta_obj.len());
        for (name, value) in beta_obj {
            beta.push((name.clone(), number(value, name)?));
        }

        let mean = match field("mean")? {
            Value::Null => None,
            v => Some(number(v, "mean")?),
        };

        Ok(ArimaFit {
            spec,
            ar: vector(field("ar")?, "ar")?,
            ma: vector(field("ma")?, "ma")?,
            seasonal_ar: vector(field("sar")?, "sar")?,
            seasonal_ma: vector(field("sma")?, "sma")?,
            beta,
            mean,
            sigma2: number(field("sigma2")?, "sigma2")?,
            loglik: number(field("loglik")?, "loglik")?,
            aicc: number(field("aicc")?, "aicc")?,
            n_obs: count(field("n_obs")?, "n_obs")?,
            n_eff: count(field("n_eff")?, "n_eff")?,
        })
    }
}
