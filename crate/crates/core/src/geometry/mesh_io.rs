//! Plain-text mesh exchange.
//!
//! ```text
//! # neckstress-mesh-v1
//! profile <Flat|Power> <dim> <epsilon> <kappa0> <m> <r0> <r_neck> <outer_radius>
//! report <min_layers> <max_layers> <min_quality> <block_half_width> <n_columns>
//! nodes <N>
//! <id> <x1> <x2>            (N lines)
//! cells <M>
//! <id> <n0> <n1> <n2>       (M lines, counter-clockwise)
//! edges <E>
//! <n0> <n1> <top|bottom|outer>
//! ```
//!
//! Floats are written in shortest round-trip form, so export → import is lossless.

use std::fmt::Write as _;

use super::{make_profile, BoundaryEdge, BoundaryTag, GradingReport, Mesh, ProfileKind};
use crate::error::{Error, Result};

pub const MESH_HEADER: &str = "# neckstress-mesh-v1";

pub fn write_mesh(mesh: &Mesh) -> String {
    let p = &mesh.profile;
    let r = &mesh.report;
    let mut s = String::new();
    let kind = match p.kind {
        ProfileKind::Flat => "Flat",
        ProfileKind::Power => "Power",
    };
    writeln!(s, "{MESH_HEADER}").unwrap();
    writeln!(
        s,
        "profile {kind} {} {:e} {:e} {:e} {:e} {:e} {:e}",
        p.dim, p.epsilon, p.kappa0, p.m, p.r0, p.r_neck, p.outer_radius
    )
    .unwrap();
    writeln!(
        s,
        "report {} {} {:e} {:e} {}",
        r.min_layers, r.max_layers, r.min_quality, r.block_half_width, r.n_columns
    )
    .unwrap();
    writeln!(s, "nodes {}", mesh.nodes.len()).unwrap();
    for (i, n) in mesh.nodes.iter().enumerate() {
        writeln!(s, "{i} {:e} {:e}", n[0], n[1]).unwrap();
    }
    writeln!(s, "cells {}", mesh.cells.len()).unwrap();
    for (i, c) in mesh.cells.iter().enumerate() {
        writeln!(s, "{i} {} {} {}", c[0], c[1], c[2]).unwrap();
    }
    writeln!(s, "edges {}", mesh.boundary_edges.len()).unwrap();
    for e in &mesh.boundary_edges {
        writeln!(s, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.name()).unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(t.split_whitespace().collect());
        }
        Err(Error::MeshParse {
            line: self.line + 1,
            reason: "unexpected end of input".into(),
        })
    }

    fn err<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(Error::MeshParse {
            line: self.line,
            reason: reason.into(),
        })
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse()
            .or_else(|_| self.err(format!("cannot parse '{s}'")))
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let f = self.next_fields()?;
        if f.len() != 2 || f[0] != name {
            return self.err(format!("expected '{name} <count>'"));
        }
        self.parse(f[1])
    }
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut first = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if first.next() != Some(MESH_HEADER) {
        return Err(Error::MeshParse {
            line: 1,
            reason: format!("missing '{MESH_HEADER}' header"),
        });
    }
    let mut it = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let f = it.next_fields()?;
    if f.len() != 9 || f[0] != "profile" {
        return it.err("expected profile line");
    }
    let kind = match f[1] {
        "Flat" => ProfileKind::Flat,
        "Power" => ProfileKind::Power,
        other => return it.err(format!("unknown profile kind '{other}'")),
    };
    let nums: Vec<f64> = f[3..].iter().map(|s| it.parse(s)).collect::<Result<_>>()?;
    let profile = make_profile(
        kind,
        it.parse(f[2])?,
        nums[0],
        nums[1],
        nums[2],
        nums[3],
        nums[4],
        nums[5],
    )?;
    let f = it.next_fields()?;
    if f.len() != 6 || f[0] != "report" {
        return it.err("expected report line");
    }
    let report = GradingReport {
        min_layers: it.parse(f[1])?,
        max_layers: it.parse(f[2])?,
        min_quality: it.parse(f[3])?,
        block_half_width: it.parse(f[4])?,
        n_columns: it.parse(f[5])?,
    };
    let n = it.section("nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let f = it.next_fields()?;
        if f.len() != 3 || it.parse::<usize>(f[0])? != i {
            return it.err(format!("expected node {i}"));
        }
        nodes.push([it.parse(f[1])?, it.parse(f[2])?]);
    }
    let m = it.section("cells")?;
    let mut cells = Vec::with_capacity(m);
    for i in 0..m {
        let f = it.next_fields()?;
        if f.len() != 4 || it.parse::<usize>(f[0])? != i {
            return it.err(format!("expected cell {i}"));
        }
        cells.push([it.parse(f[1])?, it.parse(f[2])?, it.parse(f[3])?]);
    }
    let e = it.section("edges")?;
    let mut boundary_edges = Vec::with_capacity(e);
    for _ in 0..e {
        let f = it.next_fields()?;
        if f.len() != 3 {
            return it.err("expected '<n0> <n1> <tag>'");
        }
        let Some(tag) = BoundaryTag::from_name(f[2]) else {
            return it.err(format!("unknown tag '{}'", f[2]));
        };
        boundary_edges.push(BoundaryEdge {
            nodes: [it.parse(f[0])?, it.parse(f[1])?],
            tag,
        });
    }
    let mesh = Mesh {
        profile,
        nodes,
        cells,
        boundary_edges,
        report,
    };
    mesh.validate()?;
    Ok(mesh)
}
