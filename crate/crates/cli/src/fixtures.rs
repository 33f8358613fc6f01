//! Loaders for the measured-data fixture CSVs under `data/`.
//!
//! Two schemas exist (documented in `data/README.md`): density matrices
//! (four lines per matrix, real/imaginary column pairs) and correlation
//! coefficients (`basis_a,basis_b,e_value,e_uncertainty`). Parse errors
//! carry the file path and 1-based line number.

use std::path::Path;

use anyhow::{anyhow, Context};
use biphoton::inequalities::CorrelationEstimate;
use biphoton::quantum::DensityMatrix;

const MATRIX_HEADER: &str = "label,row,re_hh,im_hh,re_hv,im_hv,re_vh,im_vh,re_vv,im_vv";
const CORRELATION_HEADER: &str = "basis_a,basis_b,e_value,e_uncertainty";

/// Non-comment, non-blank lines with their 1-based line numbers; verifies
/// the first such line is the expected header and returns the rest.
fn data_lines<'t>(
    path: &Path,
    text: &'t str,
    header: &str,
) -> anyhow::Result<Vec<(usize, &'t str)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, first)) if first == header => {}
        Some((n, first)) => {
            return Err(anyhow!(
                "{}:{n}: expected header {header:?}, found {first:?}",
                path.display()
            ))
        }
        None => return Err(anyhow!("{}: no header line", path.display())),
    }
    Ok(lines.collect())
}

fn parse_f64(path: &Path, line: usize, field: &str, raw: &str) -> anyhow::Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|e| anyhow!("{}:{line}: bad {field} {raw:?}: {e}", path.display()))
}

/// Load labeled density matrices. Consecutive lines sharing a label form
/// one matrix; labels appear in file order. Tabulated entries are rounded,
/// so matrices go through the lenient tabulated-input constructor.
pub fn load_density_matrices(path: &Path) -> anyhow::Result<Vec<(String, DensityMatrix)>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let lines = data_lines(path, &text, MATRIX_HEADER)?;

    const ROWS: [&str; 4] = ["HH", "HV", "VH", "VV"];
    // Label, real parts, imaginary parts, rows seen so far.
    type PartialMatrix = (String, [[f64; 4]; 4], [[f64; 4]; 4], usize);
    let mut out: Vec<(String, DensityMatrix)> = Vec::new();
    let mut current: Option<PartialMatrix> = None;

    let finish = |cur: Option<PartialMatrix>,
                  out: &mut Vec<(String, DensityMatrix)>|
     -> anyhow::Result<()> {
        if let Some((label, re, im, seen)) = cur {
            if seen != 4 {
                return Err(anyhow!(
                    "{}: matrix {label:?} has {seen} rows, expected 4",
                    path.display()
                ));
            }
            let dm = DensityMatrix::from_tabulated(&re, &im)
                .map_err(|e| anyhow!("{}: matrix {label:?}: {e}", path.display()))?;
            out.push((label, dm));
        }
        Ok(())
    };

    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(anyhow!(
                "{}:{n}: expected 10 fields, found {}",
                path.display(),
                fields.len()
            ));
        }
        let label = fields[0].trim().to_string();
        let row = fields[1].trim();

        let starts_new = match &current {
            None => true,
            Some((cur_label, ..)) => *cur_label != label,
        };
        if starts_new {
            finish(current.take(), &mut out)?;
            if out.iter().any(|(l, _)| *l == label) {
                return Err(anyhow!(
                    "{}:{n}: label {label:?} appears in two separate blocks",
                    path.display()
                ));
            }
            current = Some((label.clone(), [[0.0; 4]; 4], [[0.0; 4]; 4], 0));
        }

        let (_, re, im, seen) = current.as_mut().expect("block in progress");
        let row_idx = ROWS
            .iter()
            .position(|r| *r == row)
            .ok_or_else(|| anyhow!("{}:{n}: unknown row {row:?}", path.display()))?;
        if *seen != row_idx {
            return Err(anyhow!(
                "{}:{n}: row {row} out of order (expected {})",
                path.display(),
                ROWS[*seen]
            ));
        }
        for col in 0..4 {
            re[row_idx][col] = parse_f64(path, n, "re", fields[2 + 2 * col])?;
            im[row_idx][col] = parse_f64(path, n, "im", fields[3 + 2 * col])?;
        }
        *seen += 1;
    }
    finish(current.take(), &mut out)?;
    if out.is_empty() {
        return Err(anyhow!("{}: no matrices", path.display()));
    }
    Ok(out)
}

/// Load correlation coefficients in file order.
pub fn load_correlations(path: &Path) -> anyhow::Result<Vec<CorrelationEstimate>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let lines = data_lines(path, &text, CORRELATION_HEADER)?;
    let mut out = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(anyhow!(
                "{}:{n}: expected 4 fields, found {}",
                path.display(),
                fields.len()
            ));
        }
        let value = parse_f64(path, n, "e_value", fields[2])?;
        let uncertainty = parse_f64(path, n, "e_uncertainty", fields[3])?;
        if value.abs() > 1.0 {
            return Err(anyhow!(
                "{}:{n}: correlation {value} outside [-1, 1]",
                path.display()
            ));
        }
        if uncertainty < 0.0 {
            return Err(anyhow!(
                "{}:{n}: negative uncertainty {uncertainty}",
                path.display()
            ));
        }
        out.push(CorrelationEstimate::new(
            value,
            uncertainty,
            fields[0].trim(),
            fields[1].trim(),
        ));
    }
    if out.is_empty() {
        return Err(anyhow!("{}: no correlations", path.display()));
    }
    Ok(out)
}
