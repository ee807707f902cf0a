//! Minimal PGM codec: reads P2 (ASCII) and P5 (binary) with maxval up to
//! 255, writes P5.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, SpcaError};

#[derive(Debug, Clone, PartialEq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    /// Pixels rescaled to [0, 1] by dividing by the file's maxval,
    /// row-major.
    pub pixels: Vec<f64>,
}

/// Reads a P2 or P5 PGM file.
pub fn read_pgm(path: &Path) -> Result<PgmImage> {
    let bytes = fs::read(path).map_err(|e| SpcaError::io(path.display().to_string(), e))?;
    parse_pgm(&bytes).map_err(|msg| SpcaError::parse(path.display().to_string(), msg))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<PgmImage, String> {
    let mut cursor = 0usize;
    let magic = next_token(bytes, &mut cursor).ok_or("missing magic number")?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(format!("unsupported magic number {other:?}")),
    };
    let width: usize = next_token(bytes, &mut cursor)
        .ok_or("missing width")?
        .parse()
        .map_err(|_| "invalid width")?;
    let height: usize = next_token(bytes, &mut cursor)
        .ok_or("missing height")?
        .parse()
        .map_err(|_| "invalid height")?;
    let maxval: u32 = next_token(bytes, &mut cursor)
        .ok_or("missing maxval")?
        .parse()
        .map_err(|_| "invalid maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("maxval must be in [1, 255], got {maxval}"));
    }
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    let npix = width * height;
    let mut pixels = Vec::with_capacity(npix);
    if binary {
        // exactly one whitespace byte separates the header from raster data
        if cursor + npix > bytes.len() {
            return Err(format!(
                "raster truncated: expected {npix} bytes, found {}",
                bytes.len().saturating_sub(cursor)
            ));
        }
        for &b in &bytes[cursor..cursor + npix] {
            pixels.push(b as f64 / maxval as f64);
        }
    } else {
        for _ in 0..npix {
            let tok = next_token(bytes, &mut cursor).ok_or("raster truncated")?;
            let v: u32 = tok.parse().map_err(|_| format!("invalid pixel {tok:?}"))?;
            if v > maxval {
                return Err(format!("pixel {v} exceeds maxval {maxval}"));
            }
            pixels.push(v as f64 / maxval as f64);
        }
    }
    Ok(PgmImage {
        width,
        height,
        pixels,
    })
}

/// Next whitespace-delimited token, skipping `#` comments.
fn next_token(bytes: &[u8], cursor: &mut usize) -> Option<String> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    if *cursor >= bytes.len() {
        return None;
    }
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    let tok = String::from_utf8_lossy(&bytes[start..*cursor]).into_owned();
    // consume the single delimiter after the token (matters before P5 raster)
    if *cursor < bytes.len() {
        *cursor += 1;
    }
    Some(tok)
}

/// Writes a flattened vector as a P5 PGM, linearly mapping its value
/// range [min, max] to [0, 255]. Constant vectors map to mid-gray 128.
pub fn save_pgm(values: &[f64], height: usize, width: usize, path: &Path) -> Result<()> {
    if values.len() != height * width {
        return Err(SpcaError::DimensionMismatch(format!(
            "vector of length {} cannot be written as {height}x{width}",
            values.len()
        )));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let bytes: Vec<u8> = values
        .iter()
        .map(|&v| {
            if range <= 0.0 {
                128u8
            } else {
                (((v - min) / range * 255.0).round() as i64).clamp(0, 255) as u8
            }
        })
        .collect();
    let mut file =
        fs::File::create(path).map_err(|e| SpcaError::io(path.display().to_string(), e))?;
    write!(file, "P5\n{width} {height}\n255\n")
        .and_then(|_| file.write_all(&bytes))
        .map_err(|e| SpcaError::io(path.display().to_string(), e))
}

/// Writes a [0, 1]-valued vector as a P5 PGM without range rescaling:
/// each value maps to round(v·255), clamped. Use this when the pixel
/// values themselves must survive (corrupted-dataset export); `save_pgm`
/// rescales and is meant for eigenfaces and reconstructions.
pub fn save_pgm_unit(values: &[f64], height: usize, width: usize, path: &Path) -> Result<()> {
    if values.len() != height * width {
        return Err(SpcaError::DimensionMismatch(format!(
            "vector of length {} cannot be written as {height}x{width}",
            values.len()
        )));
    }
    let bytes: Vec<u8> = values
        .iter()
        .map(|&v| ((v * 255.0).round() as i64).clamp(0, 255) as u8)
        .collect();
    let mut file =
        fs::File::create(path).map_err(|e| SpcaError::io(path.display().to_string(), e))?;
    write!(file, "P5\n{width} {height}\n255\n")
        .and_then(|_| file.write_all(&bytes))
        .map_err(|e| SpcaError::io(path.display().to_string(), e))
}
