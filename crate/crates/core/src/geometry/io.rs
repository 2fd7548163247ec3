//! Point-pattern CSV files.
//!
//! ```text
//! # window: xmin xmax ymin ymax
//! x,y
//! 0.25,1.5
//! ```
//!
//! One-dimensional patterns use `# window: xmin xmax` and a single `x` column.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use super::{GeometryError, Point, PointConfig, Window};

#[derive(Debug, Error)]
pub enum PatternIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing `# window:` metadata line")]
    MissingWindow,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub fn write_pattern<W: Write>(mut out: W, config: &PointConfig) -> io::Result<()> {
    let w = config.window();
    let (lo, hi) = (w.lower(), w.upper());
    if w.dim() == 2 {
        writeln!(out, "# window: {} {} {} {}", lo[0], hi[0], lo[1], hi[1])?;
        writeln!(out, "x,y")?;
        for p in config.points() {
            writeln!(out, "{},{}", p[0], p[1])?;
        }
    } else {
        writeln!(out, "# window: {} {}", lo[0], hi[0])?;
        writeln!(out, "x")?;
        for p in config.points() {
            writeln!(out, "{}", p[0])?;
        }
    }
    Ok(())
}

pub fn read_pattern<R: BufRead>(input: R) -> Result<PointConfig, PatternIoError> {
    let mut window: Option<Window> = None;
    let mut header_seen = false;
    let mut points: Vec<Point> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(meta) = t.strip_prefix('#') {
            if let Some(rest) = meta.trim().strip_prefix("window:") {
                let nums = parse_floats(rest.split_whitespace(), lineno)?;
                window = Some(match nums.len() {
                    2 => Window::interval(nums[0], nums[1])?,
                    4 => Window::rect(nums[0], nums[1], nums[2], nums[3])?,
                    n => {
                        return Err(PatternIoError::Parse {
                            line: lineno,
                            msg: format!("window needs 2 or 4 numbers, got {n}"),
                        })
                    }
                });
            }
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = t.split(',').map(str::trim).collect();
            if cols != ["x", "y"] && cols != ["x"] {
                return Err(PatternIoError::Parse {
                    line: lineno,
                    msg: format!("expected header `x,y` or `x`, got `{t}`"),
                });
            }
            header_seen = true;
            continue;
        }
        let nums = parse_floats(t.split(','), lineno)?;
        let p = match nums.len() {
            1 => [nums[0], 0.0],
            2 => [nums[0], nums[1]],
            n => {
                return Err(PatternIoError::Parse {
                    line: lineno,
                    msg: format!("expected 1 or 2 coordinates, got {n}"),
                })
            }
        };
        points.push(p);
    }
    let window = window.ok_or(PatternIoError::MissingWindow)?;
    Ok(PointConfig::new(window, points)?)
}

fn parse_floats<'a>(
    parts: impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<Vec<f64>, PatternIoError> {
    parts
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| PatternIoError::Parse {
                line,
                msg: format!("bad number `{s}`: {e}"),
            })
        })
        .collect()
}

pub fn save_pattern(path: impl AsRef<Path>, config: &PointConfig) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_pattern(&mut out, config)?;
    out.flush()
}

pub fn load_pattern(path: impl AsRef<Path>) -> Result<PointConfig, PatternIoError> {
    read_pattern(BufReader::new(File::open(path)?))
}
