//! CSV exchange format for sampled responses.
//!
//! Layout: leading comment lines carry the metadata, then a header row and
//! one row per grid point with real/imaginary pairs for each matrix entry.
//!
//! ```text
//! # domain: dq
//! # frame: local:n1
//! # kind: impedance
//! freq_hz,re11,im11,re12,im12,re21,im21,re22,im22
//! 1,0.25,0.0021,...
//! ```
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! parse/write cycle is byte-stable and loses no precision.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Domain, Frame, FrequencyGrid, FrequencyResponse, Kind, Mat2};
use crate::error::CoreError;
use crate::Result;

pub const CSV_HEADER: &str = "freq_hz,re11,im11,re12,im12,re21,im21,re22,im22";

/// Writes a response in the impedance CSV format.
pub fn write_csv(resp: &FrequencyResponse, out: &mut impl Write) -> Result<()> {
    writeln!(out, "# domain: {}", resp.domain())?;
    writeln!(out, "# frame: {}", resp.frame())?;
    writeln!(out, "# kind: {}", resp.kind())?;
    writeln!(out, "{CSV_HEADER}")?;
    for (f, m) in resp.iter() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            f, m.m11.re, m.m11.im, m.m12.re, m.m12.im, m.m21.re, m.m21.im, m.m22.re, m.m22.im
        )?;
    }
    Ok(())
}

pub fn write_csv_file(resp: &FrequencyResponse, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(resp, &mut w)
}

/// Parses a response from the impedance CSV format.
pub fn read_csv(input: impl BufRead) -> Result<FrequencyResponse> {
    let mut domain = None;
    let mut frame = None;
    let mut kind = None;
    let mut header_seen = false;
    let mut freqs = Vec::new();
    let mut values = Vec::new();

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            parse_metadata(meta.trim(), lineno, &mut domain, &mut frame, &mut kind)?;
            continue;
        }
        if !header_seen {
            if line != CSV_HEADER {
                return Err(CoreError::CsvParse {
                    line: lineno,
                    msg: format!("expected header `{CSV_HEADER}`, got `{line}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(CoreError::CsvParse {
                line: lineno,
                msg: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let mut nums = [0.0f64; 9];
        for (i, field) in fields.iter().enumerate() {
            nums[i] = field.trim().parse().map_err(|e| CoreError::CsvParse {
                line: lineno,
                msg: format!("field {i}: {e}"),
            })?;
        }
        freqs.push(nums[0]);
        values.push(Mat2::new(
            Complex64::new(nums[1], nums[2]),
            Complex64::new(nums[3], nums[4]),
            Complex64::new(nums[5], nums[6]),
            Complex64::new(nums[7], nums[8]),
        ));
    }

    let domain = domain.ok_or(CoreError::CsvParse {
        line: 0,
        msg: "missing `# domain:` metadata".into(),
    })?;
    let frame = frame.ok_or(CoreError::CsvParse {
        line: 0,
        msg: "missing `# frame:` metadata".into(),
    })?;
    let kind = kind.ok_or(CoreError::CsvParse {
        line: 0,
        msg: "missing `# kind:` metadata".into(),
    })?;
    let grid = FrequencyGrid::new(freqs)?;
    FrequencyResponse::new(grid, values, domain, frame, kind)
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<FrequencyResponse> {
    read_csv(BufReader::new(File::open(path)?))
}

fn parse_metadata(
    meta: &str,
    lineno: usize,
    domain: &mut Option<Domain>,
    frame: &mut Option<Frame>,
    kind: &mut Option<Kind>,
) -> Result<()> {
    let Some((key, value)) = meta.split_once(':') else {
        // Free-form comment; ignore.
        return Ok(());
    };
    let value = value.trim();
    match key.trim() {
        "domain" => {
            *domain = Some(match value {
                "dq" => Domain::Dq,
                "pn" => Domain::Pn,
                other => {
                    return Err(CoreError::CsvParse {
                        line: lineno,
                        msg: format!("unknown domain `{other}`"),
                    })
                }
            });
        }
        "frame" => {
            *frame = Some(if value == "global" {
                Frame::Global
            } else if let Some(id) = value.strip_prefix("local:") {
                Frame::Local(id.to_string())
            } else {
                return Err(CoreError::CsvParse {
                    line: lineno,
                    msg: format!("unknown frame `{value}`"),
                });
            });
        }
        "kind" => {
            *kind = Some(match value {
                "impedance" => Kind::Impedance,
                "admittance" => Kind::Admittance,
                "loopgain" => Kind::LoopGain,
                other => {
                    return Err(CoreError::CsvParse {
                        line: lineno,
                        msg: format!("unknown kind `{other}`"),
                    })
                }
            });
        }
        // Unrecognized metadata keys are tolerated on read.
        _ => {}
    }
    Ok(())
}
