//! One JSON object per line dataset files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CrystalStructure, Frac, Lattice};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    /// Rows are lattice vectors (Å).
    pub lattice: [[f64; 3]; 3],
    pub frac_coords: Vec<Frac>,
    pub atomic_numbers: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_per_atom: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl DatasetRecord {
    pub fn from_structure(s: &CrystalStructure) -> Self {
        Self {
            lattice: s.lattice().rows(),
            frac_coords: s.frac_coords().to_vec(),
            atomic_numbers: s.atomic_numbers().to_vec(),
            energy_per_atom: None,
            id: None,
        }
    }

    pub fn to_structure(&self) -> Result<CrystalStructure> {
        if let Some(e) = self.energy_per_atom {
            if !e.is_finite() {
                return Err(Error::InvalidInput("energy_per_atom must be finite".into()));
            }
        }
        CrystalStructure::new(Lattice::from_matrix(self.lattice)?, self.frac_coords.clone(), self.atomic_numbers.clone())
    }
}

/// Reads and validates every record. Blank lines are skipped.
pub fn read_jsonl(path: &Path) -> Result<Vec<DatasetRecord>> {
    let file = File::open(path)?;
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord = serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?;
        rec.to_structure().map_err(|e| parse_err(i + 1, e.to_string()))?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(parse_err(0, "file contains no records".into()));
    }
    Ok(out)
}

/// Reads records and converts them to structures.
pub fn read_structures(path: &Path) -> Result<Vec<CrystalStructure>> {
    read_jsonl(path)?.iter().map(DatasetRecord::to_structure).collect()
}

pub fn write_jsonl(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::InvalidInput(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_structures(path: &Path, structures: &[CrystalStructure]) -> Result<()> {
    let records: Vec<_> = structures.iter().map(DatasetRecord::from_structure).collect();
    write_jsonl(path, &records)
}
