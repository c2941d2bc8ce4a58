//! Dataset manifests: a JSON list of items, each either a graph file path
//! (relative paths resolve against the manifest's directory) or an inline
//! model config, optionally tagged with a regression time.

use crate::files::parse_graph;
use anyhow::{bail, Context, Result};
use graph_frechet::{Graph, ModelConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestItem {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub items: Vec<ManifestItem>,
}

impl DatasetManifest {
    pub fn from_models(models: impl IntoIterator<Item = ModelConfig>) -> Self {
        DatasetManifest {
            items: models
                .into_iter()
                .map(|m| ManifestItem {
                    t: None,
                    path: None,
                    model: Some(m),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let manifest: DatasetManifest =
            serde_json::from_str(&text).with_context(|| format!("bad manifest {}", path.display()))?;
        if manifest.items.is_empty() {
            bail!("manifest {} lists no items", path.display());
        }
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    /// Realises every item. `base` anchors relative graph paths; graphs from
    /// model configs are sampled with their embedded seeds (overridden by
    /// `seed_override` plus the item index when given).
    pub fn realise(&self, base: &Path, seed_override: Option<u64>) -> Result<Vec<(Option<f64>, Graph)>> {
        self.items
            .iter()
            .enumerate()
            .map(|(idx, item)| {
                let graph = match (&item.path, &item.model) {
                    (Some(rel), None) => {
                        let p = base.join(rel);
                        parse_graph(&p)?
                    }
                    (None, Some(model)) => {
                        let model = match seed_override {
                            Some(s) => model.clone().with_seed(s.wrapping_add(idx as u64)),
                            None => model.clone(),
                        };
                        model.sample()?
                    }
                    _ => bail!("manifest item {idx} must set exactly one of `path` or `model`"),
                };
                Ok((item.t, graph))
            })
            .collect()
    }

    /// Graphs only, checking a uniform vertex count.
    pub fn realise_graphs(&self, base: &Path, seed_override: Option<u64>) -> Result<Vec<Graph>> {
        let items = self.realise(base, seed_override)?;
        let graphs: Vec<Graph> = items.into_iter().map(|(_, g)| g).collect();
        let n = graphs[0].n();
        for g in &graphs {
            if g.n() != n {
                bail!("dataset mixes graph sizes {} and {}", n, g.n());
            }
        }
        Ok(graphs)
    }

    /// Time-tagged samples for regression; every item needs a `t`.
    pub fn realise_timed(
        &self,
        base: &Path,
        seed_override: Option<u64>,
    ) -> Result<Vec<(f64, Graph)>> {
        let items = self.realise(base, seed_override)?;
        items
            .into_iter()
            .enumerate()
            .map(|(idx, (t, g))| match t {
                Some(t) => Ok((t, g)),
                None => bail!("manifest item {idx} lacks a regression time `t`"),
            })
            .collect()
    }
}
