//! JSON documents for fitted models and synthetic ground truth.
//!
//! Every document carries `schema_version`; it is checked before the rest of
//! the document is decoded so that a newer file gets a version error rather
//! than a confusing field error. Reals are written in shortest round-trip
//! form, which reproduces each `f64` bit for bit.

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::baselines::BaselineModel;
use crate::error::{Error, Result};
use crate::experiments::synthetic::{Planted, SyntheticSpec};
use crate::landmark::{LandmarkModel, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelDocument {
    Landmark(LandmarkModel),
    Baseline(BaselineModel),
}

impl ModelDocument {
    pub fn predict(&self, x: &crate::Matrix) -> Result<crate::Matrix> {
        match self {
            ModelDocument::Landmark(m) => m.predict(x),
            ModelDocument::Baseline(m) => m.predict(x),
        }
    }

    pub fn n_inputs(&self) -> usize {
        match self {
            ModelDocument::Landmark(m) => m.n_inputs(),
            ModelDocument::Baseline(m) => m.head.n_inputs(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ModelDocument::Landmark(m) => {
                let k = m.a_hat.rows();
                let bad = |what: &str| Err(Error::MalformedDocument(what.to_string()));
                if m.a_hat.cols() != k || m.y_means.len() != k {
                    return bad("a_hat must be k x k with k output means");
                }
                if m.landmarks.is_empty()
                    || m.landmarks.windows(2).any(|w| w[0] >= w[1])
                    || m.landmarks[m.landmarks.len() - 1] >= k
                {
                    return bad("landmarks must be ascending indices below k");
                }
                if m.stage2.n_outputs() != m.landmarks.len() {
                    return bad("stage2 must have one output per landmark");
                }
                if let Some(cols) = &m.input_columns {
                    if cols.len() != m.stage2.n_inputs() || cols.iter().any(|c| *c >= k) {
                        return bad("input_columns must index the stage2 inputs within k");
                    }
                }
                Ok(())
            }
            ModelDocument::Baseline(m) => {
                if m.x_means.len() != m.head.n_inputs() || m.y_means.len() != m.head.n_outputs() {
                    return Err(Error::MalformedDocument(
                        "centering means do not match the coefficients".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Truth behind a `synth` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedDocument {
    pub schema_version: u32,
    pub spec: SyntheticSpec,
    pub planted: Planted,
}

impl PlantedDocument {
    pub fn new(spec: SyntheticSpec, planted: Planted) -> Self {
        PlantedDocument {
            schema_version: SCHEMA_VERSION,
            spec,
            planted,
        }
    }
}

fn to_text<T: Serialize>(value: &T) -> Result<String> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn from_text<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    let found = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::MalformedDocument("missing schema_version".into()))?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(Error::UnsupportedVersion {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            supported: SCHEMA_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| Error::MalformedDocument(e.to_string()))
}

pub fn save_model(model: &ModelDocument) -> Result<String> {
    to_text(model)
}

pub fn load_model(text: &str) -> Result<ModelDocument> {
    let model: ModelDocument = from_text(text)?;
    model.validate()?;
    Ok(model)
}

pub fn save_planted(doc: &PlantedDocument) -> Result<String> {
    to_text(doc)
}

pub fn load_planted(text: &str) -> Result<PlantedDocument> {
    from_text(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::fit_one_vs_all;
    use crate::experiments::synthetic::gen_synthetic_regression;
    use crate::landmark::{fit, FitOptions};

    fn landmark_doc() -> ModelDocument {
        let data = gen_synthetic_regression(&SyntheticSpec::new(10, 4, 2, 40, 5, 1)).unwrap();
        let model = fit(&data.train, &FitOptions::new(1.0, 0.1, 0.5)).unwrap();
        ModelDocument::Landmark(model)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let doc = landmark_doc();
        let text = save_model(&doc).unwrap();
        assert_eq!(load_model(&text).unwrap(), doc);
        // Equality on f64 already implies bit equality for finite values
        // except for signed zeros; check those explicitly.
        if let (ModelDocument::Landmark(a), ModelDocument::Landmark(b)) =
            (&doc, &load_model(&text).unwrap())
        {
            let bits =
                |m: &crate::Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.a_hat), bits(&b.a_hat));
        }
        assert!(text.contains("\"model\": \"landmark\""));
    }

    #[test]
    fn baseline_round_trip() {
        let data = gen_synthetic_regression(&SyntheticSpec::new(6, 3, 2, 20, 5, 2)).unwrap();
        let doc = ModelDocument::Baseline(fit_one_vs_all(&data.train, 1.0).unwrap());
        assert_eq!(load_model(&save_model(&doc).unwrap()).unwrap(), doc);
    }

    #[test]
    fn truncated_document_is_malformed() {
        let text = save_model(&landmark_doc()).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(load_model(cut), Err(Error::MalformedDocument(_))));
    }

    #[test]
    fn newer_version_is_unsupported() {
        let text = save_model(&landmark_doc()).unwrap();
        let bumped = text.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            load_model(&bumped),
            Err(Error::UnsupportedVersion {
                found: 2,
                supported: 1
            })
        ));
    }

    #[test]
    fn inconsistent_landmarks_rejected() {
        let text = save_model(&landmark_doc()).unwrap();
        let mut value: Value = serde_json::from_str(&text).unwrap();
        value["landmarks"] = serde_json::json!([99]);
        assert!(matches!(
            load_model(&value.to_string()),
            Err(Error::MalformedDocument(_))
        ));
    }

    #[test]
    fn planted_round_trip() {
        let spec = SyntheticSpec::new(8, 3, 2, 10, 5, 3);
        let data = gen_synthetic_regression(&spec).unwrap();
        let doc = PlantedDocument::new(spec, data.planted);
        assert_eq!(load_planted(&save_planted(&doc).unwrap()).unwrap(), doc);
    }
}
