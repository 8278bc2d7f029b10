use std::fs;
use std::path::Path;

use kron_defect::haar::haar_factors;
use kron_defect::{ComplexMatrix, FactorList, TolPolicy};
use serde::Deserialize;

use crate::args::InputArgs;
use crate::error::{CliError, Result};

#[derive(Deserialize)]
#[serde(untagged)]
enum FactorFile {
    Many(Vec<ComplexMatrix>),
    One(ComplexMatrix),
}

/// Reads a JSON array of matrices, or a single matrix, as an ordered factor
/// list. Every factor must be square and unitary.
pub fn parse_factor_file(path: &Path) -> Result<FactorList> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let parsed: FactorFile = serde_json::from_str(&text).map_err(|_| {
        CliError::Input(format!(
            "{}: expected a matrix {{\"rows\",\"cols\",\"data\"}} or an array of them",
            path.display()
        ))
    })?;
    let factors = match parsed {
        FactorFile::Many(fs) => fs,
        FactorFile::One(m) => vec![m],
    };
    Ok(FactorList::new(factors)?)
}

pub fn load_factors(input: &InputArgs) -> Result<FactorList> {
    match (&input.factors, &input.sizes) {
        (Some(path), _) => parse_factor_file(path),
        (None, Some(sizes)) if input.haar => Ok(haar_factors(&sizes.0, input.seed)?),
        (None, Some(_)) => Err(CliError::Input(
            "--sizes needs --haar to synthesize factors".into(),
        )),
        (None, None) => Err(CliError::Input(
            "give --factors PATH or --sizes LIST --haar".into(),
        )),
    }
}

pub fn tolerance(tol: Option<f64>) -> Result<TolPolicy> {
    match tol {
        None => Ok(TolPolicy::Automatic),
        Some(t) if t.is_finite() && t > 0.0 => Ok(TolPolicy::Explicit(t)),
        Some(t) => Err(CliError::Input(format!(
            "--tol must be positive and finite, got {t}"
        ))),
    }
}
