//! Slice CSV: a `# key = value` comment block, then `a,b,w` rows.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::reconstruct::{PQPDSlice, PlaneSpec};
use crate::stokes::DeltaKernel;

pub const SLICE_HEADER: &str = "a,b,w";

/// Writes `slice`; `meta` lines follow the plane and kernel lines.
pub fn write_slice_csv<W: Write>(slice: &PQPDSlice, meta: &[(String, String)], mut out: W) -> Result<()> {
    writeln!(out, "# plane = {}", slice.plane)?;
    writeln!(out, "# epsilon = {}", slice.kernel.epsilon())?;
    writeln!(out, "# cutoff_sigmas = {}", slice.kernel.cutoff_sigmas())?;
    for (k, v) in meta {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "{SLICE_HEADER}")?;
    for (a, b, _, w) in slice.cells() {
        writeln!(out, "{},{},{w:e}", fixed(a), fixed(b))?;
    }
    out.flush()?;
    Ok(())
}

fn fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Reads a slice written by [`write_slice_csv`]. Returns the slice and every
/// header pair in file order.
pub fn read_slice_csv<R: BufRead>(reader: R) -> Result<(PQPDSlice, Vec<(String, String)>)> {
    let mut meta = Vec::new();
    let mut plane: Option<PlaneSpec> = None;
    let mut epsilon: Option<f64> = None;
    let mut cutoff = DeltaKernel::DEFAULT_CUTOFF_SIGMAS;
    let mut values = Vec::new();
    let mut header_seen = false;
    let parse_err = |line: usize, column: usize, message: String| Error::Parse { line, column, message };

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix('#') {
            let Some((k, v)) = rest.split_once('=') else {
                continue;
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            match k.as_str() {
                "plane" => plane = Some(v.parse()?),
                "epsilon" => {
                    epsilon = Some(v.parse().map_err(|_| parse_err(lineno, 1, format!("bad epsilon '{v}'")))?)
                }
                "cutoff_sigmas" => {
                    cutoff = v.parse().map_err(|_| parse_err(lineno, 1, format!("bad cutoff_sigmas '{v}'")))?
                }
                _ => {}
            }
            meta.push((k, v));
            continue;
        }
        if !header_seen {
            if text != SLICE_HEADER {
                return Err(parse_err(lineno, 1, format!("expected header '{SLICE_HEADER}'")));
            }
            header_seen = true;
            continue;
        }
        let plane = plane
            .as_ref()
            .ok_or_else(|| parse_err(lineno, 1, "data before '# plane = ...'".into()))?;
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno, fields.len().min(3) + 1, "expected 3 columns".into()));
        }
        let mut nums = [0.0; 3];
        for (c, f) in fields.iter().enumerate() {
            nums[c] = f
                .trim()
                .parse()
                .map_err(|_| parse_err(lineno, c + 1, format!("'{f}' is not a number")))?;
        }
        let k = values.len();
        let nb = plane.n_b();
        let (a, b) = (plane.a_value(k / nb), plane.b_value(k % nb));
        if k >= plane.n_a() * nb || (nums[0] - a).abs() > 1e-6 || (nums[1] - b).abs() > 1e-6 {
            return Err(Error::ShapeMismatch(format!(
                "line {lineno}: ({}, {}) is not cell {k} of '{plane}'",
                nums[0], nums[1]
            )));
        }
        values.push(nums[2]);
    }
    let plane = plane.ok_or_else(|| parse_err(1, 1, "missing '# plane = ...'".into()))?;
    let epsilon = epsilon.ok_or_else(|| parse_err(1, 1, "missing '# epsilon = ...'".into()))?;
    if values.len() != plane.n_a() * plane.n_b() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows for a {}x{} plane",
            values.len(),
            plane.n_a(),
            plane.n_b()
        )));
    }
    let kernel = DeltaKernel::with_cutoff(epsilon, cutoff)?;
    Ok((PQPDSlice { plane, values, kernel }, meta))
}
