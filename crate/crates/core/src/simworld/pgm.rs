//! Binary PGM (P5) environment loader.

use std::path::Path;

use super::OccupancyGrid;
use crate::error::{Error, Result};

/// Loads an 8-bit binary PGM image as an occupancy grid: pixel < 128 is
/// occupied, >= 128 is free. The border is forced occupied afterwards.
pub fn load_environment(path: impl AsRef<Path>) -> Result<OccupancyGrid> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| Error::io(shown.clone(), e))?;
    let (width, height, maxval, payload_at) = parse_header(&bytes, &shown)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(
            &shown,
            format!("maxval {maxval} unsupported (need 1..=255)"),
        ));
    }
    let need = width * height;
    let payload = &bytes[payload_at..];
    if payload.len() < need {
        return Err(Error::format(
            &shown,
            format!("truncated payload: need {need} bytes, have {}", payload.len()),
        ));
    }
    let cells: Vec<bool> = payload[..need].iter().map(|&p| p < 128).collect();
    let grid = OccupancyGrid::from_cells(width, height, cells)?;
    if grid.free_cells().is_empty() {
        return Err(Error::config(format!(
            "environment {shown} has no free space after thresholding"
        )));
    }
    Ok(grid)
}

/// Parses the P5 header: magic, three decimal tokens (width, height, maxval)
/// separated by whitespace or `#` comments, then exactly one whitespace byte
/// before the payload.
fn parse_header(bytes: &[u8], path: &str) -> Result<(usize, usize, usize, usize)> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(Error::format(path, "missing P5 magic"));
    }
    let mut pos = 2;
    let mut tokens = [0usize; 3];
    for token in &mut tokens {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(Error::format(path, "header ended early")),
            }
        }
        let start = pos;
        while let Some(b) = bytes.get(pos) {
            if b.is_ascii_digit() {
                pos += 1;
            } else {
                break;
            }
        }
        if start == pos {
            return Err(Error::format(path, "expected decimal header field"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits are utf8");
        *token = text
            .parse()
            .map_err(|_| Error::format(path, format!("header field '{text}' out of range")))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(path, "expected single whitespace after maxval")),
    }
    Ok((tokens[0], tokens[1], tokens[2], pos))
}
