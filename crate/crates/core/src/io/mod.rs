//! Text formats: comma-separated datasets and TOML analysis reports.

mod dataset_file;
mod report;

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use dataset_file::{dataset_from_str, dataset_to_string, read_dataset, write_dataset};
pub use report::{
    digest_matches, read_report, report_from_str, report_to_string, write_report, AllanSection,
    ArwSection, BiasStabilitySection, Provenance, RegressionSection, Report, ScaleFactorSection,
};

pub const FORMAT_VERSION: &str = "sagnac-lab/1";

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn unreadable_path_names_itself() {
        let err = file_digest("/nonexistent/dir/data.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/data.csv"));
    }
}
