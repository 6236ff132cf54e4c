//! Plot-ready text outputs and the artifact manifest.
//!
//! Grids are written with one row per transverse index `j` and one column
//! per angular index `i`, matching the cell numbering `j * ntheta + i`.

use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::catalog::{RadialEigenvalue, SpectrumEntry};
use crate::error::{Error, Result};
use crate::catalog::PI2;
use crate::discretization::Grid;
use crate::nodal::{neighbor_graph, NeighborGraph};
use crate::partition::{HistoryEntry, Init, PartitionState};

/// Comma-separated grid, row `j`, column `i`.
pub fn grid_csv<T: Display>(ntheta: usize, nt: usize, values: &[T]) -> Result<String> {
    if values.len() != ntheta * nt {
        return Err(Error::invalid(format!(
            "{} values for a {ntheta}x{nt} grid",
            values.len()
        )));
    }
    let mut out = String::with_capacity(values.len() * 8);
    for row in values.chunks(ntheta) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("writing to a string");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Plain graymap of a label field, one evenly spaced shade per label.
pub fn labels_pgm(ntheta: usize, nt: usize, labels: &[u32]) -> Result<String> {
    if labels.len() != ntheta * nt {
        return Err(Error::invalid("label field does not match the grid"));
    }
    let k = labels.iter().max().map_or(1, |&m| m + 1);
    let shade = |l: u32| if k == 1 { 255 } else { l * 255 / (k - 1) };
    let mut out = format!("P2\n{ntheta} {nt}\n255\n");
    for row in labels.chunks(ntheta) {
        let line: Vec<String> = row.iter().map(|&l| shade(l).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Strip spectrum with one line per distinct eigenvalue. `index` is the
/// one-based position of the first eigenvalue of the entry when counted
/// with multiplicity; `m` and `n` are the lowest mode indices realizing it.
pub fn spectrum_csv(entries: &[SpectrumEntry]) -> String {
    let mut out = String::from("index,value_over_pi2,value,m,n,multiplicity,deck_class\n");
    let mut index = 1;
    for e in entries {
        let r = e.value_over_pi2;
        writeln!(
            out,
            "{index},{}/{},{:.12e},{},{},{},{}",
            r.numer(),
            r.denom(),
            e.value(),
            e.m(),
            e.n(),
            e.multiplicity,
            e.deck_class.as_str()
        )
        .expect("writing to a string");
        index += e.multiplicity as usize;
    }
    out
}

pub fn radial_csv(values: &[RadialEigenvalue]) -> String {
    let mut out = String::from("index,value,angular_mode,radial_index\n");
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{},{:.12e},{},{}", i + 1, v.value, v.angular_mode, v.radial_index)
            .expect("writing to a string");
    }
    out
}

/// Numerical eigenvalues, one per line, with residuals.
pub fn eigenvalues_csv(values: &[f64], residuals: &[f64]) -> String {
    let mut out = String::from("index,value,value_over_pi2,residual\n");
    for (i, (v, r)) in values.iter().zip(residuals).enumerate() {
        writeln!(out, "{},{v:.12e},{:.12e},{r:.3e}", i + 1, v / crate::catalog::PI2)
            .expect("writing to a string");
    }
    out
}

pub fn history_csv(history: &[HistoryEntry]) -> String {
    let mut out = String::from("sweep,lambda,moved\n");
    for h in history {
        writeln!(out, "{},{:.12e},{}", h.sweep, h.lambda, h.moved).expect("writing to a string");
    }
    out
}

/// `a b faces` per edge, after a `# vertices k` header.
pub fn edge_list(graph: &NeighborGraph) -> String {
    let mut out = format!("# vertices {}\n", graph.vertices);
    for e in &graph.edges {
        writeln!(out, "{} {} {}", e.a, e.b, e.faces).expect("writing to a string");
    }
    out
}

#[derive(Serialize)]
struct StateSummary<'a> {
    k: usize,
    lambda: f64,
    lambda_over_pi2: f64,
    energies: &'a [f64],
    init: Init,
    run: usize,
    sweeps: usize,
}

/// Labels (CSV and graymap), sweep history, neighbour graph and a JSON
/// summary of a partition, each file name starting with `prefix`.
pub fn write_partition(a: &mut Artifacts, prefix: &str, state: &PartitionState, grid: &Grid) -> Result<()> {
    a.write(&format!("{prefix}labels.csv"), grid_csv(grid.ntheta, grid.nt, &state.labels)?)?;
    a.write(&format!("{prefix}labels.pgm"), labels_pgm(grid.ntheta, grid.nt, &state.labels)?)?;
    a.write(&format!("{prefix}history.csv"), history_csv(&state.history))?;
    a.write(&format!("{prefix}graph.txt"), edge_list(&neighbor_graph(&state.labels, grid)?))?;
    a.write_json(
        &format!("{prefix}state.json"),
        &StateSummary {
            k: state.k,
            lambda: state.lambda,
            lambda_over_pi2: state.lambda / PI2,
            energies: &state.energies,
            init: state.init,
            run: state.run,
            sweeps: state.history.len(),
        },
    )?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").expect("writing to a string");
        s
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Writes files under one directory and records their checksums.
#[derive(Debug)]
pub struct Artifacts {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

pub const MANIFEST: &str = "manifest.json";

impl Artifacts {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Artifacts {
            root,
            entries: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let bytes = contents.as_ref();
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::invalid(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    /// Writes `manifest.json`, sorted by path, and returns its location.
    pub fn finish(mut self) -> Result<PathBuf> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let path = self.root.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&self.entries)
            .map_err(|e| Error::invalid(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{cylinder_spectrum, BcPair, Rational};

    #[test]
    fn grid_layout_is_row_per_transverse_index() {
        let csv = grid_csv(3, 2, &[0, 1, 2, 10, 11, 12]).unwrap();
        assert_eq!(csv, "0,1,2\n10,11,12\n");
        assert!(grid_csv(3, 2, &[0]).is_err());
    }

    #[test]
    fn graymap_has_one_shade_per_label() {
        let labels: Vec<u32> = (0..12).map(|c| (c % 6 / 2) as u32).collect();
        let pgm = labels_pgm(6, 2, &labels).unwrap();
        assert!(pgm.starts_with("P2\n6 2\n255\n"));
        let shades: std::collections::BTreeSet<&str> = pgm.lines().skip(3).flat_map(|l| l.split(' ')).collect();
        assert_eq!(shades.into_iter().collect::<Vec<_>>(), vec!["0", "127", "255"]);
    }

    #[test]
    fn spectrum_schema() {
        let s = cylinder_spectrum(Rational::new(3, 10), 2, BcPair::NN, 7).unwrap();
        let csv = spectrum_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,value_over_pi2,value,m,n,multiplicity,deck_class");
        assert!(lines[1].starts_with("1,0/1,"));
        assert!(lines[2].starts_with("2,1/1,") && lines[2].ends_with(",1,0,2,antisymmetric"));
        assert!(lines[4].starts_with("6,9/1,") && lines[4].ends_with(",3,0,2,antisymmetric"));
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_every_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new(dir.path().join("out")).unwrap();
        a.write("b.csv", "x\n").unwrap();
        a.write("sub/a.txt", "y\n").unwrap();
        a.write("b.csv", "z\n").unwrap();
        let path = a.finish().unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 2);
        assert_eq!(arr[0]["path"], "b.csv");
        assert_eq!(arr[0]["sha256"], sha256_hex(b"z\n"));
        assert_eq!(arr[1]["path"], "sub/a.txt");
    }
}
