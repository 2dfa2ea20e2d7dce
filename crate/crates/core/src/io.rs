//! Reading and writing instance and solution files.

use crate::error::IoError;
use crate::model::Instance;
use crate::solution::SolutionFile;
use std::path::Path;

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Deserialize JSON, reporting the path of the offending field.
fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        IoError::Parse {
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok(value)
}

/// Parse and validate an instance from JSON text.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let inst: Instance = from_json(text)?;
    inst.validate()?;
    Ok(inst)
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(inst).expect("instances serialize")
}

/// Reader for one instance file format.
pub trait InstanceFormat {
    /// Whether this format handles the file.
    fn accepts(&self, path: &Path) -> bool;
    fn parse(&self, text: &str) -> Result<Instance, IoError>;
}

/// The documented JSON format.
pub struct JsonFormat;

impl InstanceFormat for JsonFormat {
    fn accepts(&self, path: &Path) -> bool {
        path.extension().is_none_or(|e| e == "json")
    }

    fn parse(&self, text: &str) -> Result<Instance, IoError> {
        parse_instance(text)
    }
}

/// Load an instance with the first format accepting the path.
pub fn load_instance_with(
    path: &Path,
    formats: &[&dyn InstanceFormat],
) -> Result<Instance, IoError> {
    let text = read(path)?;
    let format = formats
        .iter()
        .find(|f| f.accepts(path))
        .ok_or_else(|| IoError::Schema {
            field: "path".into(),
            reason: format!("no reader for {}", path.display()),
        })?;
    format.parse(&text)
}

pub fn load_instance(path: &Path) -> Result<Instance, IoError> {
    load_instance_with(path, &[&JsonFormat])
}

pub fn save_instance(path: &Path, inst: &Instance) -> Result<(), IoError> {
    write(path, &instance_to_json(inst))
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, IoError> {
    from_json(text)
}

pub fn solution_to_json(sol: &SolutionFile) -> String {
    serde_json::to_string_pretty(sol).expect("solutions serialize")
}

pub fn load_solution(path: &Path) -> Result<SolutionFile, IoError> {
    parse_solution(&read(path)?)
}

pub fn save_solution(path: &Path, sol: &SolutionFile) -> Result<(), IoError> {
    write(path, &solution_to_json(sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{generate, GeneratorConfig};

    #[test]
    fn instance_round_trip() {
        for seed in 0..5 {
            let mut cfg = GeneratorConfig::small(6, seed);
            cfg.nonlinear = seed % 2 == 0;
            let inst = generate(&cfg);
            let back = parse_instance(&instance_to_json(&inst)).unwrap();
            assert_eq!(back, inst);
        }
    }

    #[test]
    fn matrix_dimension_mismatch_names_the_matrix() {
        let mut inst = generate(&GeneratorConfig::small(3, 1));
        let mut rows = inst.travel_cost.to_rows();
        rows.pop();
        for r in rows.iter_mut() {
            r.pop();
        }
        inst.travel_cost = crate::model::Matrix::from_rows(rows).unwrap();
        let err = parse_instance(&instance_to_json(&inst)).unwrap_err();
        assert!(err.to_string().contains("travel_cost"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_instance("{\n  \"horizon_end\": ,\n}") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
