//! On-disk formats for states and settings.
//!
//! Both are JSON documents. Floats are written in shortest round-trip
//! decimal form, so read-back reproduces the original 64-bit values
//! exactly.
//!
//! State file: `{"d": 2, "n_sites": 2, "amplitudes": [[re, im], ...]}`
//! with amplitudes in flat index order (site 1 most significant digit).
//!
//! Settings file: `{"d": 2, "n_sites": 1, "pairs": [{"a0": [[re, im] x d^2],
//! "a1": [...]}]}` with each matrix flattened row major.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::observable::{DichotomicPair, MeasurementSettings, ObservableMatrix};
use super::state::PureState;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct StateFile {
    d: usize,
    n_sites: usize,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SettingsFile {
    d: usize,
    n_sites: usize,
    pairs: Vec<PairFile>,
}

#[derive(Serialize, Deserialize)]
struct PairFile {
    a0: Vec<[f64; 2]>,
    a1: Vec<[f64; 2]>,
}

pub fn write_state(path: &Path, state: &PureState) -> Result<()> {
    let doc = StateFile {
        d: state.d(),
        n_sites: state.n_sites(),
        amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
    };
    write_json(path, &doc)
}

pub fn read_state(path: &Path) -> Result<PureState> {
    let doc: StateFile = read_json(path)?;
    let amplitudes = doc
        .amplitudes
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    PureState::new(doc.d, doc.n_sites, amplitudes)
}

pub fn write_settings(path: &Path, settings: &MeasurementSettings) -> Result<()> {
    let flatten = |m: &ObservableMatrix| -> Vec<[f64; 2]> {
        let d = m.d();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let e = m.entries()[(i, j)];
                out.push([e.re, e.im]);
            }
        }
        out
    };
    let doc = SettingsFile {
        d: settings.d(),
        n_sites: settings.n_sites(),
        pairs: settings
            .pairs()
            .iter()
            .map(|p| PairFile {
                a0: flatten(p.a0()),
                a1: flatten(p.a1()),
            })
            .collect(),
    };
    write_json(path, &doc)
}

pub fn read_settings(path: &Path) -> Result<MeasurementSettings> {
    let doc: SettingsFile = read_json(path)?;
    let unflatten = |flat: &[[f64; 2]]| -> Result<ObservableMatrix> {
        if flat.len() != doc.d * doc.d {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "matrix has {} entries, expected {} for d={}",
                    flat.len(),
                    doc.d * doc.d,
                    doc.d
                ),
            });
        }
        let m = DMatrix::from_fn(doc.d, doc.d, |i, j| {
            let [re, im] = flat[i * doc.d + j];
            Complex64::new(re, im)
        });
        ObservableMatrix::new(m)
    };
    if doc.pairs.len() != doc.n_sites {
        return Err(Error::ShapeMismatch {
            context: format!(
                "settings file declares {} sites but holds {} pairs",
                doc.n_sites,
                doc.pairs.len()
            ),
        });
    }
    let pairs = doc
        .pairs
        .iter()
        .map(|p| DichotomicPair::new(unflatten(&p.a0)?, unflatten(&p.a1)?))
        .collect::<Result<Vec<_>>>()?;
    MeasurementSettings::new(pairs)
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|source| Error::Format {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Format {
        path: path.to_path_buf(),
        source,
    })
}
