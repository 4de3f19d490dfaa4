//! JSON model files.
//!
//! A single network:
//!
//! ```json
//! {"format_version":1,"mode":"binary","dimensions":2,"cells":1,
//!  "alphas":[0.3],"centers":[[0.0,0.0]],"betas":[[0.0,0.0,0.0]]}
//! ```
//!
//! A one-vs-rest bundle wraps one such object per class:
//! `{"format_version":1,"classes":[0,1,...],"models":[...]}`.
//!
//! Numbers are written in shortest round-trip form, so reading a file back
//! reproduces every parameter bit for bit.

use std::fs;
use std::path::Path;

use cellnet_core::{CellularNetwork, Error as CoreError, Mode, OvrModel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct NetworkFile {
    format_version: u64,
    mode: Mode,
    dimensions: usize,
    cells: usize,
    alphas: Vec<f64>,
    centers: Vec<Vec<f64>>,
    betas: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct OvrFile<'a> {
    format_version: u64,
    classes: &'a [u32],
    models: Vec<NetworkFile>,
}

/// Any model a file can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Single(CellularNetwork),
    Ovr(OvrModel),
}

impl Model {
    pub fn dimensions(&self) -> usize {
        match self {
            Model::Single(n) => n.dimensions(),
            Model::Ovr(m) => m.dimensions(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        match self {
            Model::Single(n) => n.parameter_count(),
            Model::Ovr(m) => m.parameter_count(),
        }
    }
}

fn to_file(net: &CellularNetwork) -> NetworkFile {
    let d = net.dimensions();
    NetworkFile {
        format_version: FORMAT_VERSION,
        mode: net.mode(),
        dimensions: d,
        cells: net.cells(),
        alphas: net.alphas().to_vec(),
        centers: net.centers().chunks(d).map(<[f64]>::to_vec).collect(),
        betas: net.betas().chunks(d + 1).map(<[f64]>::to_vec).collect(),
    }
}

fn rows(field: &str, rows: Vec<Vec<f64>>, count: usize, width: usize) -> Result<Vec<f64>> {
    if rows.len() != count {
        return Err(Error::format(
            field,
            format!("shape mismatch: {} rows for {count} cells", rows.len()),
        ));
    }
    let mut flat = Vec::with_capacity(count * width);
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != width {
            return Err(Error::format(
                field,
                format!("shape mismatch: row {i} has {} values, expected {width}", row.len()),
            ));
        }
        flat.extend(row);
    }
    Ok(flat)
}

fn from_file(f: NetworkFile) -> Result<CellularNetwork> {
    check_version(f.format_version)?;
    if f.dimensions == 0 {
        return Err(Error::format("dimensions", "must be positive"));
    }
    if f.alphas.len() != f.cells {
        return Err(Error::format(
            "alphas",
            format!("shape mismatch: {} values for {} cells", f.alphas.len(), f.cells),
        ));
    }
    let centers = rows("centers", f.centers, f.cells, f.dimensions)?;
    let betas = rows("betas", f.betas, f.cells, f.dimensions + 1)?;
    CellularNetwork::new(f.mode, f.dimensions, centers, betas, f.alphas).map_err(|e| match e {
        CoreError::InvalidModel { field, reason } => Error::format(field, reason),
        other => other.into(),
    })
}

fn check_version(v: u64) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::format(
            "format_version",
            format!("unsupported version {v}, expected {FORMAT_VERSION}"),
        ));
    }
    Ok(())
}

fn json_error(e: serde_json::Error) -> Error {
    // serde messages name the offending field, e.g. "missing field `betas`"
    let msg = e.to_string();
    let field = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("field"))
        .unwrap_or("document")
        .to_string();
    Error::format(field, msg)
}

pub fn network_to_json(net: &CellularNetwork) -> String {
    serde_json::to_string(&to_file(net)).expect("network serializes")
}

pub fn ovr_to_json(model: &OvrModel) -> String {
    serde_json::to_string(&OvrFile {
        format_version: FORMAT_VERSION,
        classes: model.classes(),
        models: model.networks().iter().map(to_file).collect(),
    })
    .expect("bundle serializes")
}

pub fn model_to_json(model: &Model) -> String {
    match model {
        Model::Single(n) => network_to_json(n),
        Model::Ovr(m) => ovr_to_json(m),
    }
}

pub fn network_from_json(text: &str) -> Result<CellularNetwork> {
    match model_from_json(text)? {
        Model::Single(n) => Ok(n),
        Model::Ovr(_) => Err(Error::format("models", "expected a single network, found a bundle")),
    }
}

/// Parses either a single network or a one-vs-rest bundle.
pub fn model_from_json(text: &str) -> Result<Model> {
    let value: Value = serde_json::from_str(text).map_err(json_error)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::format("document", "expected a JSON object"))?;
    let version = obj
        .get("format_version")
        .ok_or_else(|| Error::format("format_version", "missing"))?
        .as_u64()
        .ok_or_else(|| Error::format("format_version", "expected a non-negative integer"))?;
    check_version(version)?;
    if obj.contains_key("models") {
        #[derive(Deserialize)]
        struct Bundle {
            classes: Vec<u32>,
            models: Vec<NetworkFile>,
        }
        let b: Bundle = serde_json::from_value(value).map_err(json_error)?;
        let nets = b
            .models
            .into_iter()
            .map(from_file)
            .collect::<Result<Vec<_>>>()?;
        let model = OvrModel::new(b.classes, nets).map_err(|e| match e {
            CoreError::InvalidModel { field, reason } => Error::format(field, reason),
            CoreError::NotClassifier => Error::format("mode", "bundle networks must be binary"),
            other => other.into(),
        })?;
        Ok(Model::Ovr(model))
    } else {
        let f: NetworkFile = serde_json::from_value(value).map_err(json_error)?;
        Ok(Model::Single(from_file(f)?))
    }
}

pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    let mut text = model_to_json(model);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> CellularNetwork {
        CellularNetwork::new(
            Mode::Binary,
            2,
            vec![0.1, 0.2, -1.0, 3.0],
            vec![0.5, -0.25, 1.0 / 3.0, 1e-300, 2.0, 7.0],
            vec![0.3, 1.4],
        )
        .unwrap()
    }

    #[test]
    fn field_layout() {
        let v: Value = serde_json::from_str(&network_to_json(&net())).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["mode"], "binary");
        assert_eq!(v["dimensions"], 2);
        assert_eq!(v["cells"], 2);
        assert_eq!(v["centers"][1][1], 3.0);
        assert_eq!(v["betas"][0].as_array().unwrap().len(), 3);
    }

    #[test]
    fn zero_alpha_rejected() {
        let text = r#"{"format_version":1,"mode":"regression","dimensions":1,"cells":1,
            "alphas":[0.0],"centers":[[0.0]],"betas":[[0.0,0.0]]}"#;
        let err = network_from_json(text).unwrap_err();
        assert!(matches!(&err, Error::Format { field, .. } if field == "alphas"));
        assert!(err.to_string().contains("alpha must be positive"), "{err}");
    }

    #[test]
    fn extra_beta_row_rejected() {
        let text = r#"{"format_version":1,"mode":"regression","dimensions":1,"cells":2,
            "alphas":[0.3,0.3],"centers":[[0.0],[1.0]],"betas":[[0,0],[0,0],[0,0]]}"#;
        let err = network_from_json(text).unwrap_err();
        assert!(matches!(&err, Error::Format { field, reason } if field == "betas" && reason.contains("shape")));
    }

    #[test]
    fn unknown_version_rejected() {
        let text = network_to_json(&net()).replace("\"format_version\":1", "\"format_version\":2");
        let err = network_from_json(&text).unwrap_err();
        assert!(matches!(&err, Error::Format { field, .. } if field == "format_version"));
    }

    #[test]
    fn missing_field_named() {
        let err = network_from_json(r#"{"format_version":1,"mode":"binary","dimensions":1,"cells":1}"#)
            .unwrap_err();
        assert!(matches!(&err, Error::Format { field, .. } if field == "alphas"), "{err}");
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(network_from_json("{\"format_version\":"), Err(Error::Format { .. })));
    }

    #[test]
    fn bundle_round_trip() {
        let m = OvrModel::new(vec![0, 1], vec![net(), net()]).unwrap();
        let back = model_from_json(&ovr_to_json(&m)).unwrap();
        assert_eq!(back, Model::Ovr(m));
    }
}
