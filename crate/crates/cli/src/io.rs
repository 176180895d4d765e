//! Plant and pattern file formats.
//!
//! Plants are JSON objects with keys "A", "B1", "B2", "C1", "C2", "D12",
//! "D21", each a row-major array of arrays of numbers. Patterns carry "N",
//! "u_blocks", "y_blocks" and either explicit per-lag 0/1 block "masks" or
//! a block "delays" matrix from which the masks are derived.

use std::path::Path;

use serde::{Deserialize, Serialize};

use delay_h2::pattern::{from_delay_matrix, BlockMask};
use delay_h2::{BlockPartition, InformationPattern, Matrix, Plant};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct PlantFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B1")]
    pub b1: Vec<Vec<f64>>,
    #[serde(rename = "B2")]
    pub b2: Vec<Vec<f64>>,
    #[serde(rename = "C1")]
    pub c1: Vec<Vec<f64>>,
    #[serde(rename = "C2")]
    pub c2: Vec<Vec<f64>>,
    #[serde(rename = "D12")]
    pub d12: Vec<Vec<f64>>,
    #[serde(rename = "D21")]
    pub d21: Vec<Vec<f64>>,
}

fn to_matrix(rows: &[Vec<f64>], name: &str) -> Result<Matrix, CliError> {
    if rows.is_empty() {
        return Err(CliError::validation(format!("matrix {name} is empty")));
    }
    let cols = rows[0].len();
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::validation(format!("matrix {name} is not rectangular")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), cols, &flat))
}

fn from_matrix(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

impl PlantFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("cannot parse {}: {e}", path.display())))
    }

    pub fn to_plant(&self) -> Result<Plant, CliError> {
        Plant::new(
            to_matrix(&self.a, "A")?,
            to_matrix(&self.b1, "B1")?,
            to_matrix(&self.b2, "B2")?,
            to_matrix(&self.c1, "C1")?,
            to_matrix(&self.c2, "C2")?,
            to_matrix(&self.d12, "D12")?,
            to_matrix(&self.d21, "D21")?,
        )
        .map_err(CliError::from)
    }

    pub fn from_plant(plant: &Plant) -> Self {
        Self {
            a: from_matrix(plant.a()),
            b1: from_matrix(plant.b1()),
            b2: from_matrix(plant.b2()),
            c1: from_matrix(plant.c1()),
            c2: from_matrix(plant.c2()),
            d12: from_matrix(plant.d12()),
            d21: from_matrix(plant.d21()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PatternFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub u_blocks: Vec<usize>,
    pub y_blocks: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masks: Option<Vec<Vec<Vec<u8>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delays: Option<Vec<Vec<usize>>>,
}

impl PatternFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("cannot parse {}: {e}", path.display())))
    }

    pub fn to_pattern(&self) -> Result<InformationPattern, CliError> {
        let u = BlockPartition::new(self.u_blocks.clone())?;
        let y = BlockPartition::new(self.y_blocks.clone())?;
        match (&self.masks, &self.delays) {
            (Some(masks), None) => {
                if masks.len() != self.n {
                    return Err(CliError::validation(format!(
                        "pattern declares N = {} but provides {} masks",
                        self.n,
                        masks.len()
                    )));
                }
                let block_masks: Vec<BlockMask> = masks
                    .iter()
                    .map(|m| m.iter().map(|row| row.iter().map(|&v| v != 0).collect()).collect())
                    .collect();
                InformationPattern::new(u, y, block_masks).map_err(CliError::from)
            }
            (None, Some(delays)) => {
                from_delay_matrix(delays, u, y, self.n).map_err(CliError::from)
            }
            (Some(_), Some(_)) => Err(CliError::validation(
                "pattern file must provide either masks or delays, not both".to_string(),
            )),
            (None, None) => Err(CliError::validation(
                "pattern file must provide masks or delays".to_string(),
            )),
        }
    }

    pub fn from_pattern(pattern: &InformationPattern) -> Self {
        let masks = pattern
            .masks()
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| row.iter().map(|&v| u8::from(v)).collect())
                    .collect()
            })
            .collect();
        Self {
            n: pattern.horizon(),
            u_blocks: pattern.u_blocks().sizes().to_vec(),
            y_blocks: pattern.y_blocks().sizes().to_vec(),
            masks: Some(masks),
            delays: None,
        }
    }
}

/// Resolve `--pattern`: a path to a JSON file, or a named family built
/// against the plant's channel dimensions (`chain`, `pure-delay`, `n-step`,
/// `tri`, `di`, `low`; all but `chain` need `--n`).
pub fn resolve_pattern(
    spec: &str,
    n_flag: Option<usize>,
    plant: &Plant,
) -> Result<InformationPattern, CliError> {
    let unit = |count: usize| BlockPartition::new(vec![1; count]).map_err(CliError::from);
    let need_n = || {
        n_flag.ok_or_else(|| {
            CliError::validation(format!("pattern '{spec}' needs --n <horizon>"))
        })
    };
    match spec {
        "chain" => {
            if plant.p2() != 3 || plant.q2() != 3 {
                return Err(CliError::validation(format!(
                    "chain pattern needs p2 = q2 = 3, plant has p2 = {}, q2 = {}",
                    plant.p2(),
                    plant.q2()
                )));
            }
            delay_h2::pattern::chain_pattern(unit(3)?, unit(3)?).map_err(CliError::from)
        }
        "pure-delay" => {
            let n = need_n()?;
            delay_h2::pattern::pure_delay_pattern(unit(plant.p2())?, unit(plant.q2())?, n)
                .map_err(CliError::from)
        }
        "n-step" | "di" => {
            let n = need_n()?;
            delay_h2::pattern::n_step_pattern(unit(plant.p2())?, unit(plant.q2())?, n)
                .map_err(CliError::from)
        }
        "tri" | "low" => {
            let n = need_n()?;
            if plant.p2() != 2 || plant.q2() != 2 {
                return Err(CliError::validation(format!(
                    "pattern '{spec}' is a two-player family; plant has p2 = {}, q2 = {}",
                    plant.p2(),
                    plant.q2()
                )));
            }
            let family = delay_h2::fixtures::SweepFamily::parse(spec).expect("matched above");
            Ok(delay_h2::fixtures::sweep_pattern(family, n))
        }
        path => {
            let file = PatternFile::load(Path::new(path))?;
            let pattern = file.to_pattern()?;
            if let Some(n) = n_flag {
                if n != pattern.horizon() {
                    return Err(CliError::validation(format!(
                        "--n {} conflicts with pattern horizon {}",
                        n,
                        pattern.horizon()
                    )));
                }
            }
            Ok(pattern)
        }
    }
}
