//! Historical cost extrema used for min-max normalization, persisted per case.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ParamsError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub min_cost: f64,
    pub max_cost: f64,
}

impl Extrema {
    pub fn seeded(raw: f64) -> Extrema {
        Extrema { min_cost: raw, max_cost: raw }
    }

    pub fn observe(&mut self, raw: f64) {
        if raw < self.min_cost {
            self.min_cost = raw;
        }
        if raw > self.max_cost {
            self.max_cost = raw;
        }
    }

    /// `(raw - min) / (max - min)` clamped to `[0, 1]`; 0.5 when min == max.
    pub fn scale(&self, raw: f64) -> f64 {
        let span = self.max_cost - self.min_cost;
        if span <= 0.0 {
            return 0.5;
        }
        ((raw - self.min_cost) / span).clamp(0.0, 1.0)
    }
}

/// Extrema for every metric key of one case.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseExtrema(pub BTreeMap<String, Extrema>);

impl CaseExtrema {
    pub fn observe(&mut self, key: &str, raw: f64) {
        match self.0.get_mut(key) {
            Some(e) => e.observe(raw),
            None => {
                self.0.insert(key.to_string(), Extrema::seeded(raw));
            }
        }
    }

    pub fn scale(&self, key: &str, raw: f64) -> f64 {
        self.0.get(key).map_or(0.5, |e| e.scale(raw))
    }

    pub fn merge(&mut self, other: &CaseExtrema) {
        for (key, e) in &other.0 {
            self.observe(key, e.min_cost);
            self.observe(key, e.max_cost);
        }
    }
}

/// `{case_id: {metric_key: {min_cost, max_cost}}}`
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamsStore {
    cases: BTreeMap<String, CaseExtrema>,
}

impl ParamsStore {
    pub fn new() -> ParamsStore {
        ParamsStore::default()
    }

    /// Loads a params file; a missing file yields an empty store.
    pub fn load(path: &Path) -> Result<ParamsStore, ParamsError> {
        match fs::read_to_string(path) {
            Ok(text) => Ok(serde_json::from_str(&text)?),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(ParamsStore::new()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ParamsError> {
        self.save_with(path, |_| Ok(()))
    }

    /// Writes to a sibling temp file, runs `before_rename` on it, then renames
    /// over `path`. If the hook fails the original file is left untouched.
    pub fn save_with(&self, path: &Path, before_rename: impl FnOnce(&Path) -> io::Result<()>) -> Result<(), ParamsError> {
        let text = serde_json::to_string_pretty(self)?;
        let tmp = temp_path(path);
        let result = (|| {
            let mut file = File::create(&tmp)?;
            file.write_all(text.as_bytes())?;
            file.write_all(b"\n")?;
            file.sync_all()?;
            before_rename(&tmp)?;
            fs::rename(&tmp, path)
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        Ok(result?)
    }

    pub fn case(&self, case_id: &str) -> CaseExtrema {
        self.cases.get(case_id).cloned().unwrap_or_default()
    }

    pub fn get(&self, case_id: &str, key: &str) -> Option<Extrema> {
        self.cases.get(case_id)?.0.get(key).copied()
    }

    pub fn observe(&mut self, case_id: &str, key: &str, raw: f64) {
        self.cases.entry(case_id.to_string()).or_default().observe(key, raw);
    }

    pub fn merge(&mut self, case_id: &str, update: &CaseExtrema) {
        self.cases.entry(case_id.to_string()).or_default().merge(update);
    }

    /// Records `raw` and returns it scaled by the (possibly widened) extrema.
    pub fn normalize(&mut self, case_id: &str, key: &str, raw: f64) -> f64 {
        self.observe(case_id, key, raw);
        self.case_ref(case_id).scale(key, raw)
    }

    fn case_ref(&self, case_id: &str) -> &CaseExtrema {
        &self.cases[case_id]
    }

    pub fn case_ids(&self) -> impl Iterator<Item = &str> {
        self.cases.keys().map(String::as_str)
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "params.json".into());
    path.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}
