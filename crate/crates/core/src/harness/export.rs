//! Report and surface files. Output depends only on the inputs, so repeated runs
//! give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::blending::BlendedSurface;
use crate::certification::CertReport;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Json,
    Csv,
}

impl ExportFormat {
    fn extension(self) -> &'static str {
        match self {
            ExportFormat::Json => "json",
            ExportFormat::Csv => "csv",
        }
    }
}

/// Writes `report.<ext>` and one `h_k<k>.<ext>` per surface into `dir`. Surface CSV
/// files hold the values of `h_k`, one row per lattice node.
pub fn export(report: &CertReport, surfaces: &[BlendedSurface], format: ExportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let ext = format.extension();
    let mut written = Vec::with_capacity(surfaces.len() + 1);
    let path = dir.join(format!("report.{ext}"));
    let text = match format {
        ExportFormat::Json => report.to_json()?,
        ExportFormat::Csv => report.to_csv(),
    };
    fs::write(&path, text)?;
    written.push(path);
    for h in surfaces {
        let path = dir.join(format!("h_k{}.{ext}", h.k));
        let text = match format {
            ExportFormat::Json => h.to_json()?,
            ExportFormat::Csv => format!("# schema_version={}\n{}", crate::certification::report::SCHEMA_VERSION, h.csv_table(0)),
        };
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
