//! CSV and JSON emission/parsing at full double precision.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), which
//! round-trips any f64 exactly; the readers parse with correctly-rounded
//! conversion, so write-then-read is bit-identical. JSON goes through a
//! formatter with the same rule (non-finite values become `null`, per JSON).

use crate::closed_form::SweepPoint;
use crate::dirichlet::{ClassEntry, ClassMix};
use crate::error::{Error, Result};
use crate::log_grid::{ConvergenceTrace, GridDistribution};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::Parse(format!("line {line_no}: not a number: {field:?}"))
    })
}

fn expect_header(line: Option<std::io::Result<String>>, want: &str) -> Result<()> {
    match line {
        Some(Ok(l)) if l.trim_end() == want => Ok(()),
        Some(Ok(l)) => Err(Error::Parse(format!(
            "expected header {want:?}, found {:?}",
            l.trim_end()
        ))),
        Some(Err(e)) => Err(e.into()),
        None => Err(Error::Parse(format!("empty input, expected header {want:?}"))),
    }
}

/// Grid as `x,f` rows, one per cell.
pub fn write_grid_csv<W: Write>(w: &mut W, g: &GridDistribution) -> Result<()> {
    writeln!(w, "x,f")?;
    for i in 0..g.len() {
        writeln!(w, "{:.16e},{:.16e}", g.x_at(i), g.values[i])?;
    }
    Ok(())
}

/// Parse `x,f` rows back into coordinate pairs.
pub fn read_grid_csv<R: BufRead>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut lines = r.lines();
    expect_header(lines.next(), "x,f")?;
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 2;
        let mut fields = line.split(',');
        let (x, f) = match (fields.next(), fields.next(), fields.next()) {
            (Some(x), Some(f), None) => (x, f),
            _ => {
                return Err(Error::Parse(format!(
                    "line {line_no}: expected 2 fields: {line:?}"
                )))
            }
        };
        rows.push((parse_f64(x, line_no)?, parse_f64(f, line_no)?));
    }
    Ok(rows)
}

/// Samples as a single `wealth` column.
pub fn write_samples_csv<W: Write>(w: &mut W, samples: &[f64]) -> Result<()> {
    writeln!(w, "wealth")?;
    for s in samples {
        writeln!(w, "{s:.16e}")?;
    }
    Ok(())
}

pub fn read_samples_csv<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut lines = r.lines();
    expect_header(lines.next(), "wealth")?;
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        samples.push(parse_f64(line, idx + 2)?);
    }
    Ok(samples)
}

/// Convergence trace as `step,distance,ratio` rows; the ratio cell is empty
/// where undefined (step 0, or after the distance hit exact zero).
pub fn write_steps_csv<W: Write>(w: &mut W, trace: &ConvergenceTrace) -> Result<()> {
    writeln!(w, "step,distance,ratio")?;
    for (i, d) in trace.distances.iter().enumerate() {
        if i > 0 && trace.distances[i - 1] > 0.0 {
            let ratio = d / trace.distances[i - 1];
            writeln!(w, "{i},{d:.16e},{ratio:.16e}")?;
        } else {
            writeln!(w, "{i},{d:.16e},")?;
        }
    }
    Ok(())
}

pub fn read_steps_csv<R: BufRead>(r: R) -> Result<Vec<(usize, f64, Option<f64>)>> {
    let mut lines = r.lines();
    expect_header(lines.next(), "step,distance,ratio")?;
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "line {line_no}: expected 3 fields: {line:?}"
            )));
        }
        let step = fields[0].trim().parse::<usize>().map_err(|_| {
            Error::Parse(format!("line {line_no}: bad step index: {:?}", fields[0]))
        })?;
        let distance = parse_f64(fields[1], line_no)?;
        let ratio = if fields[2].trim().is_empty() {
            None
        } else {
            Some(parse_f64(fields[2], line_no)?)
        };
        rows.push((step, distance, ratio));
    }
    Ok(rows)
}

/// Sweep table as `value,alpha` rows.
pub fn write_sweep_csv<W: Write>(w: &mut W, points: &[SweepPoint]) -> Result<()> {
    writeln!(w, "value,alpha")?;
    for p in points {
        writeln!(w, "{:.16e},{:.16e}", p.value, p.alpha)?;
    }
    Ok(())
}

pub fn read_sweep_csv<R: BufRead>(r: R) -> Result<Vec<SweepPoint>> {
    let mut lines = r.lines();
    expect_header(lines.next(), "value,alpha")?;
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 2;
        let mut fields = line.split(',');
        match (fields.next(), fields.next(), fields.next()) {
            (Some(v), Some(a), None) => rows.push(SweepPoint {
                value: parse_f64(v, line_no)?,
                alpha: parse_f64(a, line_no)?,
            }),
            _ => {
                return Err(Error::Parse(format!(
                    "line {line_no}: expected 2 fields: {line:?}"
                )))
            }
        }
    }
    Ok(rows)
}

/// JSON formatter that writes every finite float with 17 significant digits.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to JSON with exact float round-tripping.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("JSON serialization failed: {e}")))?;
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}

pub fn from_json_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("bad JSON: {e}")))
}

/// On-disk description of a class mix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixConfig {
    pub kappa: f64,
    pub classes: Vec<ClassEntry>,
}

/// Load and validate a mix config file.
pub fn load_mix_config(path: &Path) -> Result<ClassMix> {
    let text = std::fs::read_to_string(path)?;
    let config: MixConfig = from_json_str(&text)?;
    ClassMix::new(config.classes, config.kappa)
}
