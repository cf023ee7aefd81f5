//! Newline-delimited snapshot trace format, used for golden-trace
//! regression tests.
//!
//! ```text
//! n=<N>
//! t=<T>
//! i j
//! ...
//! ```

use std::io::{self, BufRead, Write};

use super::Snapshot;

/// Writes a header line and one `t=` block per snapshot.
pub fn write_trace<'a, W: Write>(
    w: &mut W,
    n: usize,
    snapshots: impl IntoIterator<Item = &'a Snapshot>,
) -> io::Result<()> {
    writeln!(w, "n={n}")?;
    for (t, snap) in snapshots.into_iter().enumerate() {
        writeln!(w, "t={t}")?;
        for (i, j) in snap.edge_list() {
            writeln!(w, "{i} {j}")?;
        }
    }
    Ok(())
}

/// Edge lists per step, as parsed back from a trace.
pub type TraceSteps = Vec<Vec<(u32, u32)>>;

/// Parses a trace back into per-step edge lists.
pub fn read_trace<R: BufRead>(r: R) -> io::Result<(usize, TraceSteps)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "empty trace"))??;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "bad trace header"))?;
    let mut steps: Vec<Vec<(u32, u32)>> = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if line.starts_with("t=") {
            steps.push(Vec::new());
            continue;
        }
        let mut parts = line.split_whitespace();
        let (i, j) = (
            parts.next().and_then(|s| s.parse::<u32>().ok()),
            parts.next().and_then(|s| s.parse::<u32>().ok()),
        );
        match (i, j, steps.last_mut()) {
            (Some(i), Some(j), Some(step)) => step.push((i, j)),
            _ => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("bad trace line: {line}"),
                ))
            }
        }
    }
    Ok((n, steps))
}
