//! Loading generating models from disk.
//!
//! Files ending in `.nor` use the noisy-OR format; anything else is read as
//! a CPT network spec.

use std::path::Path;

use arcconf_core::evalharness::Truth;
use arcconf_core::synth::{parse_network_spec, parse_noisyor_spec, CptNetwork, NoisyOrNetwork};

use crate::error::{Error, Result};

fn with_path(path: &Path, e: arcconf_core::Error) -> Error {
    match e {
        arcconf_core::Error::SpecParse { line, message } => Error::parse(path, line, message),
        other => other.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_network_spec(path: &Path) -> Result<CptNetwork> {
    parse_network_spec(&read(path)?).map_err(|e| with_path(path, e))
}

pub fn load_noisyor_spec(path: &Path) -> Result<NoisyOrNetwork> {
    parse_noisyor_spec(&read(path)?).map_err(|e| with_path(path, e))
}

pub fn is_noisyor_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "nor")
}

pub fn load_truth(path: &Path) -> Result<Truth> {
    if is_noisyor_path(path) {
        load_noisyor_spec(path).map(Truth::NoisyOr)
    } else {
        load_network_spec(path).map(Truth::Cpt)
    }
}
