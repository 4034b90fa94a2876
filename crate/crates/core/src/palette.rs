//! Seed palettes for population initialization.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::Color;
use crate::error::PaletteError;

const BUNDLED: &str = include_str!("../assets/palettes.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub name: String,
    pub colors: Vec<Color>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaletteLibrary {
    pub palettes: Vec<Palette>,
}

impl PaletteLibrary {
    /// The categorical palettes shipped with the crate.
    pub fn bundled() -> PaletteLibrary {
        PaletteLibrary::from_json(BUNDLED).expect("bundled palettes are valid")
    }

    pub fn from_json(text: &str) -> Result<PaletteLibrary, PaletteError> {
        let lib: PaletteLibrary = serde_json::from_str(text)?;
        if lib.palettes.is_empty() {
            return Err(PaletteError::Empty);
        }
        if let Some(p) = lib.palettes.iter().find(|p| p.colors.is_empty()) {
            return Err(PaletteError::EmptyPalette(p.name.clone()));
        }
        Ok(lib)
    }

    pub fn load(path: &Path) -> Result<PaletteLibrary, PaletteError> {
        PaletteLibrary::from_json(&fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.palettes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.palettes.is_empty()
    }

    pub fn largest(&self) -> &Palette {
        self.palettes.iter().max_by_key(|p| p.colors.len()).expect("library is non-empty")
    }

    pub fn get(&self, name: &str) -> Option<&Palette> {
        self.palettes.iter().find(|p| p.name == name)
    }
}
