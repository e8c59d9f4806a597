//! Spectral line tables for the line-by-line gaseous attenuation model.
//!
//! Text format: one line per spectral line, the centre frequency in GHz
//! followed by six shape/strength coefficients, whitespace separated.
//! Lines starting with `#` are comments. A `sha256sum`-style manifest pins
//! the exact bytes of each bundled table.

use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

const OXYGEN_TXT: &str = include_str!("../../data/p676_oxygen.txt");
const WATER_TXT: &str = include_str!("../../data/p676_water_vapour.txt");
const MANIFEST: &str = include_str!("../../data/p676.sha256");

pub const OXYGEN_FILE: &str = "p676_oxygen.txt";
pub const WATER_FILE: &str = "p676_water_vapour.txt";

pub const OXYGEN_LINE_COUNT: usize = 44;
pub const WATER_LINE_COUNT: usize = 35;

/// One absorption line: centre frequency (GHz) and the six tabulated
/// coefficients in the units of the recommendation tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub frequency_ghz: f64,
    pub coeffs: [f64; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLineTable {
    pub oxygen: Vec<SpectralLine>,
    pub water_vapour: Vec<SpectralLine>,
}

impl SpectralLineTable {
    /// Tables compiled into the crate, checksummed against the bundled
    /// manifest.
    pub fn bundled() -> Result<Self> {
        Self::from_sources(OXYGEN_TXT, WATER_TXT, MANIFEST)
    }

    /// Parses both tables and verifies them against a manifest of
    /// `<sha256-hex>  <file name>` lines.
    pub fn from_sources(oxygen: &str, water_vapour: &str, manifest: &str) -> Result<Self> {
        verify_checksum(oxygen.as_bytes(), manifest_digest(manifest, OXYGEN_FILE)?)?;
        verify_checksum(
            water_vapour.as_bytes(),
            manifest_digest(manifest, WATER_FILE)?,
        )?;
        let oxygen = parse_lines(oxygen)?;
        let water_vapour = parse_lines(water_vapour)?;
        if oxygen.len() != OXYGEN_LINE_COUNT || water_vapour.len() != WATER_LINE_COUNT {
            return Err(Error::LineTableParse {
                line: 0,
                reason: "unexpected number of spectral lines",
            });
        }
        Ok(SpectralLineTable {
            oxygen,
            water_vapour,
        })
    }
}

/// Hex SHA-256 of a byte string, as written into the manifest.
pub fn sha256_hex(bytes: &[u8]) -> alloc::string::String {
    let digest = Sha256::digest(bytes);
    let mut out = [0u8; 64];
    hex::encode_to_slice(digest, &mut out).expect("64-byte buffer");
    alloc::string::String::from_utf8(out.to_vec()).expect("hex is ascii")
}

fn manifest_digest<'a>(manifest: &'a str, file: &str) -> Result<&'a str> {
    manifest
        .lines()
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            Some((it.next()?, it.next()?))
        })
        .find(|(_, name)| name.trim_start_matches('*') == file)
        .map(|(digest, _)| digest)
        .ok_or(Error::ChecksumMismatch)
}

fn verify_checksum(bytes: &[u8], expected_hex: &str) -> Result<()> {
    let mut expected = [0u8; 32];
    hex::decode_to_slice(expected_hex, &mut expected).map_err(|_| Error::ChecksumMismatch)?;
    if Sha256::digest(bytes).as_slice() != expected {
        return Err(Error::ChecksumMismatch);
    }
    Ok(())
}

/// Parses a line table without checksum verification. Centre frequencies
/// must be strictly increasing.
pub fn parse_lines(text: &str) -> Result<Vec<SpectralLine>> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut values = [0.0f64; 7];
        let mut fields = trimmed.split_whitespace();
        for v in values.iter_mut() {
            let field = fields.next().ok_or(Error::LineTableParse {
                line: line_no,
                reason: "expected 7 columns",
            })?;
            *v = field.parse().map_err(|_| Error::LineTableParse {
                line: line_no,
                reason: "invalid number",
            })?;
        }
        if fields.next().is_some() {
            return Err(Error::LineTableParse {
                line: line_no,
                reason: "expected 7 columns",
            });
        }
        let line = SpectralLine {
            frequency_ghz: values[0],
            coeffs: [
                values[1], values[2], values[3], values[4], values[5], values[6],
            ],
        };
        if let Some(prev) = lines.last() {
            let prev: &SpectralLine = prev;
            if !(line.frequency_ghz > prev.frequency_ghz) {
                return Err(Error::LineTableParse {
                    line: line_no,
                    reason: "centre frequencies must be strictly increasing",
                });
            }
        }
        lines.push(line);
    }
    Ok(lines)
}
