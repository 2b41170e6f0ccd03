//! Versioned JSON documents for trained base models and fitted exposure
//! models.
//!
//! A base-model document stores the model kind, its hyperparameters and the
//! fitted parameters; the train split is not embedded, so loading needs the
//! same train data the model was fitted on.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, SocialGraph};
use crate::error::{Error, Result};
use crate::fairness::ExposureModel;
use crate::recommenders::{BaseModel, Fitted, ModelKind, ModelParams};

pub const FORMAT: &str = "fairpoi-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub format: String,
    pub version: u32,
    /// Hash of the configuration the model was produced under, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub model: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseModelBody {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub fitted: Fitted,
}

impl<T> Document<T> {
    pub fn new(model: T, config_hash: Option<String>) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            config_hash,
            model,
        }
    }

    fn check(&self) -> Result<()> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Config(format!(
                "unsupported model document {} v{} (expected {FORMAT} v{VERSION})",
                self.format, self.version
            )));
        }
        Ok(())
    }
}

pub fn base_model_document(m: &BaseModel, config_hash: Option<String>) -> Document<BaseModelBody> {
    Document::new(
        BaseModelBody {
            kind: m.kind(),
            params: m.params().clone(),
            fitted: m.fitted().clone(),
        },
        config_hash,
    )
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Document<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: Document<T> = serde_json::from_str(&text)?;
    doc.check()?;
    Ok(doc)
}

pub fn save_base_model(path: &Path, m: &BaseModel, config_hash: Option<String>) -> Result<()> {
    write_json(path, &base_model_document(m, config_hash))
}

/// Rebuilds a saved model against its train split. Returns the model and
/// the stored configuration hash.
pub fn load_base_model(
    path: &Path,
    train: &Dataset,
    social: &SocialGraph,
) -> Result<(BaseModel, Option<String>)> {
    let doc: Document<BaseModelBody> = read_json(path)?;
    let b = doc.model;
    let m = BaseModel::from_parts(b.kind, b.params, b.fitted, train, social)?;
    Ok((m, doc.config_hash))
}

pub fn save_exposure_model(
    path: &Path,
    m: &ExposureModel,
    config_hash: Option<String>,
) -> Result<()> {
    write_json(path, &Document::new(m.clone(), config_hash))
}

pub fn load_exposure_model(path: &Path) -> Result<(ExposureModel, Option<String>)> {
    let doc: Document<ExposureModel> = read_json(path)?;
    Ok((doc.model, doc.config_hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{chronological_split, generate_synthetic, SplitFractions, SyntheticConfig};
    use crate::fairness::{
        build_popularity_histogram, fit_exposure, ExposureFamily, DEFAULT_RIDGE_LAMBDA,
    };
    use crate::recommenders::train;

    fn train_split() -> Dataset {
        let cfg = SyntheticConfig {
            n_users: 20,
            n_pois: 30,
            min_poi_checkins: 3,
            mean_checkins_per_user: 15.0,
            social_edge_probability: 0.2,
            ..Default::default()
        };
        chronological_split(
            &generate_synthetic(&cfg).unwrap(),
            SplitFractions::default(),
        )
        .unwrap()
        .train
    }

    #[test]
    fn base_models_round_trip_exactly() {
        let d = train_split();
        let dir = tempfile::tempdir().unwrap();
        for kind in ModelKind::ALL {
            let m = train(kind, &d, &d.social, &ModelParams::default()).unwrap();
            let path = dir.path().join(format!("{kind}.json"));
            save_base_model(&path, &m, Some("abc".into())).unwrap();
            let (back, hash) = load_base_model(&path, &d, &d.social).unwrap();
            assert_eq!(hash.as_deref(), Some("abc"));
            assert_eq!(back.fitted(), m.fitted());
            assert_eq!(back.params(), m.params());
            for u in d.users.iter().take(5) {
                assert_eq!(
                    back.score_candidates(u).unwrap(),
                    m.score_candidates(u).unwrap()
                );
            }
        }
    }

    #[test]
    fn exposure_models_round_trip_bit_for_bit() {
        let d = train_split();
        let h = build_popularity_histogram(&d);
        let dir = tempfile::tempdir().unwrap();
        for family in ExposureFamily::ALL {
            let m = fit_exposure(family, &h, DEFAULT_RIDGE_LAMBDA).unwrap();
            let path = dir.path().join(format!("{family}.json"));
            save_exposure_model(&path, &m, None).unwrap();
            let (back, hash) = load_exposure_model(&path).unwrap();
            assert_eq!(hash, None);
            assert_eq!(back, m);
        }
    }

    #[test]
    fn wrong_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(
            &path,
            r#"{"format":"fairpoi-model","version":2,"model":{"params":{"family":"linear","intercept":1.0,"slope":-0.1},"score_ceiling":1.0,"x_min":1}}"#,
        )
        .unwrap();
        assert!(matches!(load_exposure_model(&path), Err(Error::Config(_))));
    }
}
