//! In-memory dataset store with an optional CSV snapshot directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use chronoquery_core::{load_dataset_file, to_wide_csv, Dataset, IngestError, IngestOptions};

#[derive(Debug, Default)]
pub struct Registry {
    datasets: RwLock<BTreeMap<String, Arc<Dataset>>>,
    next_id: AtomicU64,
    snapshot_dir: Option<PathBuf>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates a registry persisting uploads under `dir` and loads every
    /// `*.csv` snapshot already there.
    pub fn with_snapshot_dir(dir: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| IngestError::Io {
            path: dir.clone(),
            source,
        })?;
        let registry = Self {
            snapshot_dir: Some(dir.clone()),
            ..Self::default()
        };
        let entries = std::fs::read_dir(&dir).map_err(|source| IngestError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        for path in paths {
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let options = IngestOptions::default().with_categories(true).with_id(id);
            let (dataset, _) = load_dataset_file(&path, &options)?;
            registry.insert_with_id(dataset);
        }
        Ok(registry)
    }

    pub fn snapshot_dir(&self) -> Option<&Path> {
        self.snapshot_dir.as_deref()
    }

    fn fresh_id(&self, taken: &BTreeMap<String, Arc<Dataset>>, name: Option<&str>) -> String {
        if let Some(name) = name.map(sanitize).filter(|n| !n.is_empty()) {
            return std::iter::once(name.clone())
                .chain((2..).map(|n| format!("{name}-{n}")))
                .find(|id| !taken.contains_key(id))
                .expect("unbounded range");
        }
        loop {
            let n = self.next_id.fetch_add(1, Ordering::Relaxed) + 1;
            let id = format!("ds-{n}");
            if !taken.contains_key(&id) {
                return id;
            }
        }
    }

    /// Stores a dataset under a fresh id and returns that id.
    pub fn insert(&self, dataset: Dataset) -> Result<String, IngestError> {
        self.insert_named(dataset, None)
    }

    /// Like [`Registry::insert`], deriving the id from `name` when given.
    /// Names are reduced to `[A-Za-z0-9_-]` and suffixed on collision.
    pub fn insert_named(
        &self,
        dataset: Dataset,
        name: Option<&str>,
    ) -> Result<String, IngestError> {
        let mut map = self.datasets.write().expect("registry lock poisoned");
        let id = self.fresh_id(&map, name);
        let dataset = dataset.with_id(id.clone());
        if let Some(dir) = &self.snapshot_dir {
            let path = dir.join(format!("{id}.csv"));
            std::fs::write(&path, to_wide_csv(&dataset, true))
                .map_err(|source| IngestError::Io { path, source })?;
        }
        map.insert(id.clone(), Arc::new(dataset));
        Ok(id)
    }

    fn insert_with_id(&self, dataset: Dataset) {
        let id = dataset.id().to_string();
        self.datasets
            .write()
            .expect("registry lock poisoned")
            .insert(id, Arc::new(dataset));
    }

    pub fn get(&self, id: &str) -> Option<Arc<Dataset>> {
        self.read().get(id).cloned()
    }

    pub fn list(&self) -> Vec<Arc<Dataset>> {
        self.read().values().cloned().collect()
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, BTreeMap<String, Arc<Dataset>>> {
        self.datasets.read().expect("registry lock poisoned")
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_'))
        .collect()
}
