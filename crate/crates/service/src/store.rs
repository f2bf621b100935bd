use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use mcaw_core::dataset::CategoricalDataset;
use mcaw_core::mca::McaModel;
use mcaw_core::pipeline::AnalysisOptions;
use mcaw_core::schema::RawTable;

#[derive(Debug)]
pub struct DatasetEntry {
    pub raw: RawTable,
    pub options: AnalysisOptions,
    pub dataset: CategoricalDataset,
    pub summary_json: String,
}

#[derive(Debug)]
pub struct ModelEntry {
    pub dataset_id: String,
    pub options: AnalysisOptions,
    /// The coded dataset the model was fitted on (after filters).
    pub dataset: CategoricalDataset,
    pub model: McaModel,
    pub report_json: String,
}

/// Insert-only maps. Entries are shared behind `Arc` and never mutated.
#[derive(Debug, Default)]
pub struct Store {
    datasets: RwLock<HashMap<String, Arc<DatasetEntry>>>,
    models: RwLock<HashMap<String, Arc<ModelEntry>>>,
    snapshot_dir: Option<PathBuf>,
}

fn new_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl Store {
    pub fn new(snapshot_dir: Option<PathBuf>) -> Self {
        Self {
            snapshot_dir,
            ..Self::default()
        }
    }

    fn snapshot(&self, kind: &str, id: &str, json: &str) {
        let Some(dir) = &self.snapshot_dir else {
            return;
        };
        let dir = dir.join(kind);
        let res = std::fs::create_dir_all(&dir)
            .and_then(|_| std::fs::write(dir.join(format!("{id}.json")), json));
        if let Err(e) = res {
            tracing::warn!(%id, error = %e, "snapshot write failed");
        }
    }

    pub fn insert_dataset(&self, entry: DatasetEntry) -> String {
        let id = new_id();
        self.snapshot("datasets", &id, &entry.summary_json);
        self.datasets
            .write()
            .expect("store lock")
            .insert(id.clone(), Arc::new(entry));
        id
    }

    pub fn insert_model(&self, entry: ModelEntry) -> String {
        let id = new_id();
        self.snapshot("models", &id, &entry.report_json);
        self.models
            .write()
            .expect("store lock")
            .insert(id.clone(), Arc::new(entry));
        id
    }

    pub fn dataset(&self, id: &str) -> Option<Arc<DatasetEntry>> {
        self.datasets.read().expect("store lock").get(id).cloned()
    }

    pub fn model(&self, id: &str) -> Option<Arc<ModelEntry>> {
        self.models.read().expect("store lock").get(id).cloned()
    }
}
