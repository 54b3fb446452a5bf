//! Plain-text field export.
//!
//! ```text
//! # neckstress-field-v1
//! # label <name> order <1|2> nodes <n>
//! # node x y u1 u2
//! 0 -2.5e0 0e0 1e-3 0e0
//! ```
//!
//! One whitespace-separated row per node; floats use shortest round-trip form.

use std::fmt::Write as _;

use super::field::DisplacementField;
use crate::error::{Error, Result};

pub const FIELD_HEADER: &str = "# neckstress-field-v1";

pub fn write_field(field: &DisplacementField) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{FIELD_HEADER}");
    let _ = writeln!(
        s,
        "# label {} order {} nodes {}",
        field.label,
        field.space.order.degree(),
        field.values.len()
    );
    let _ = writeln!(s, "# node x y u1 u2");
    for (i, (p, u)) in field.space.points.iter().zip(&field.values).enumerate() {
        let _ = writeln!(s, "{i} {:e} {:e} {:e} {:e}", p[0], p[1], u[0], u[1]);
    }
    s
}

/// Parsed rows of an exported field: (x, y, u1, u2) per node.
pub fn read_field_rows(text: &str) -> Result<Vec<[f64; 4]>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == FIELD_HEADER => {}
        _ => {
            return Err(Error::MeshParse {
                line: 1,
                reason: format!("expected '{FIELD_HEADER}'"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let bad = |reason: String| Error::MeshParse {
            line: i + 1,
            reason,
        };
        if cols.len() != 5 {
            return Err(bad(format!("expected 5 columns, found {}", cols.len())));
        }
        let id: usize = cols[0].parse().map_err(|_| bad("bad node id".into()))?;
        if id != rows.len() {
            return Err(bad(format!("node ids must be consecutive, found {id}")));
        }
        let mut r = [0.0; 4];
        for (k, c) in cols[1..].iter().enumerate() {
            r[k] = c.parse().map_err(|_| bad(format!("bad number '{c}'")))?;
        }
        rows.push(r);
    }
    Ok(rows)
}
