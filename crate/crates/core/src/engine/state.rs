//! Grid-valued fields and their text snapshots.
//!
//! Snapshot format (one header line, then one row per node):
//!
//! ```text
//! # multifield-state v1 model=M1 nodes=32 extents=6.283185307179586 faces=periodic ambient=3 time=0
//! 0 X0 X1 X2 x0 x1 x2 p0 p1 p2 nu_1..nu_n mu_1..mu_n
//! ```
//!
//! Values are written with full round-trip precision and separated by
//! single spaces.

use std::fmt::Write as _;
use std::path::Path;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::tensor::Vec3;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub x: Vec<Vec3<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub time: f64,
}

/// Configuration plus canonical momenta per node.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalState {
    pub x: Vec<Vec3<f64>>,
    pub p: Vec<Vec3<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    pub time: f64,
}

impl CanonicalState {
    /// Undeformed state at rest with a uniform order parameter.
    pub fn rest(grid: &Grid, nu: &[f64]) -> Self {
        let n = grid.len();
        Self {
            x: (0..n).map(|i| grid.reference(i)).collect(),
            p: vec![[0.0; 3]; n],
            nu: vec![nu.to_vec(); n],
            mu: vec![vec![0.0; nu.len()]; n],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn fields(&self) -> FieldState {
        FieldState {
            x: self.x.clone(),
            nu: self.nu.clone(),
            time: self.time,
        }
    }

    /// Largest absolute difference over all entries.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.len() {
            for k in 0..3 {
                m = m.max((self.x[i][k] - other.x[i][k]).abs());
                m = m.max((self.p[i][k] - other.p[i][k]).abs());
            }
            for a in 0..self.nu[i].len() {
                m = m.max((self.nu[i][a] - other.nu[i][a]).abs());
                m = m.max((self.mu[i][a] - other.mu[i][a]).abs());
            }
        }
        m
    }

    pub fn to_snapshot(&self, model: &str, grid: &Grid) -> String {
        let n = self.nu.first().map_or(0, Vec::len);
        let mut out = format!(
            "# multifield-state v1 model={model} {grid} ambient={n} time={:?}\n",
            self.time
        );
        for i in 0..self.len() {
            let x_ref = grid.reference(i);
            let _ = write!(out, "{i}");
            let values = x_ref
                .iter()
                .chain(&self.x[i])
                .chain(&self.p[i])
                .chain(&self.nu[i])
                .chain(&self.mu[i]);
            for v in values {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_snapshot(&self, path: &Path, model: &str, grid: &Grid) -> Result<()> {
        std::fs::write(path, self.to_snapshot(model, grid)).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// A parsed snapshot.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub model: String,
    pub grid: Grid,
    pub state: CanonicalState,
}

impl Snapshot {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))?;
        let body = header
            .strip_prefix("# multifield-state v1")
            .ok_or_else(|| Error::Parse("missing `# multifield-state v1` header".into()))?;
        let tokens: Vec<(&str, &str)> = body.split_whitespace().filter_map(|t| t.split_once('=')).collect();
        let get = |key: &str| {
            tokens
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Parse(format!("header lacks `{key}=`")))
        };
        let model = get("model")?.to_string();
        let ambient: usize = get("ambient")?
            .parse()
            .map_err(|e| Error::Parse(format!("ambient: {e}")))?;
        let time: f64 = get("time")?.parse().map_err(|e| Error::Parse(format!("time: {e}")))?;
        let grid = Grid::from_tokens(tokens.iter().copied())?;

        let mut state = CanonicalState {
            x: Vec::new(),
            p: Vec::new(),
            nu: Vec::new(),
            mu: Vec::new(),
            time,
        };
        let width = 10 + 2 * ambient;
        for (row, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
            if vals.len() != width {
                return Err(Error::Parse(format!(
                    "row {row}: expected {width} columns, found {}",
                    vals.len()
                )));
            }
            if vals[0] as usize != row {
                return Err(Error::Parse(format!("row {row}: node index {} out of order", vals[0])));
            }
            state.x.push([vals[4], vals[5], vals[6]]);
            state.p.push([vals[7], vals[8], vals[9]]);
            state.nu.push(vals[10..10 + ambient].to_vec());
            state.mu.push(vals[10 + ambient..].to_vec());
        }
        if state.len() != grid.len() {
            return Err(Error::Parse(format!(
                "snapshot has {} rows but the grid has {} nodes",
                state.len(),
                grid.len()
            )));
        }
        Ok(Snapshot { model, grid, state })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::grid::{AxisBoundary, FaceTag};

    #[test]
    fn snapshot_round_trips_exactly() {
        let g = Grid::new(&[1.0, 2.0], &[4, 3], &[AxisBoundary::Periodic, AxisBoundary::bounded(FaceTag::Natural)]).unwrap();
        let mut s = CanonicalState::rest(&g, &[0.0, 0.6, 0.8]);
        for i in 0..s.len() {
            s.x[i][0] += 0.1 / (i as f64 + 3.0);
            s.p[i] = [1.0 / 3.0, -(i as f64), 1e-17];
            s.mu[i][2] = std::f64::consts::PI * i as f64;
        }
        s.time = 0.125;
        let snap = Snapshot::parse(&s.to_snapshot("M2-director", &g)).unwrap();
        assert_eq!(snap.model, "M2-director");
        assert_eq!(snap.grid, g);
        assert_eq!(snap.state, s);
    }

    #[test]
    fn malformed_snapshot_is_a_parse_error() {
        assert!(matches!(Snapshot::parse(""), Err(Error::Parse(_))));
        assert!(Snapshot::parse("# multifield nodes=3\n1 2 3\n").is_err());
    }
}
