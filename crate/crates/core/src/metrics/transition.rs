use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::oracle::ModeKind;
use crate::{Error, Result};

/// Counts of consecutive mode pairs, normalized over all pairs (self-pairs
/// included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub modes: Vec<ModeKind>,
    pub counts: Vec<Vec<u64>>,
    pub probabilities: Vec<Vec<f64>>,
}

/// Matrix over the modes that occur in `traces`, in `ModeKind::ALL` order.
pub fn transition_matrix(traces: &[Vec<ModeKind>]) -> Result<TransitionMatrix> {
    let modes: Vec<ModeKind> = ModeKind::ALL
        .into_iter()
        .filter(|m| traces.iter().any(|t| t.contains(m)))
        .collect();
    transition_matrix_over(&modes, traces)
}

/// Matrix over an explicit, ordered mode list.
pub fn transition_matrix_over(modes: &[ModeKind], traces: &[Vec<ModeKind>]) -> Result<TransitionMatrix> {
    if traces.is_empty() {
        return Err(Error::InvalidArgument("no mode traces given".into()));
    }
    let idx = |m: ModeKind| {
        modes
            .iter()
            .position(|x| *x == m)
            .ok_or_else(|| Error::InvalidArgument(format!("mode {m} not in matrix")))
    };
    let n = modes.len();
    let mut counts = vec![vec![0u64; n]; n];
    for trace in traces {
        for w in trace.windows(2) {
            counts[idx(w[0])?][idx(w[1])?] += 1;
        }
    }
    TransitionMatrix::from_counts(modes.to_vec(), counts)
}

impl TransitionMatrix {
    pub fn from_counts(modes: Vec<ModeKind>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::InvalidArgument(
                "traces contain no consecutive mode pairs".into(),
            ));
        }
        let probabilities = counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / total as f64).collect())
            .collect();
        Ok(Self {
            modes,
            counts,
            probabilities,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn index(&self, m: ModeKind) -> Option<usize> {
        self.modes.iter().position(|x| *x == m)
    }

    /// Global probability of the pair `(from, to)`; 0 for absent modes.
    pub fn probability(&self, from: ModeKind, to: ModeKind) -> f64 {
        match (self.index(from), self.index(to)) {
            (Some(i), Some(j)) => self.probabilities[i][j],
            _ => 0.0,
        }
    }

    pub fn self_mass(&self) -> f64 {
        (0..self.modes.len()).map(|i| self.probabilities[i][i]).sum()
    }

    /// P(to | from): each row divided by its own count. Rows without
    /// samples are all zero.
    pub fn row_conditional(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let s: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if s == 0 { 0.0 } else { c as f64 / s as f64 })
                    .collect()
            })
            .collect()
    }

    fn csv_of(&self, values: &[Vec<f64>], corner: &str) -> String {
        let mut s = String::from(corner);
        for m in &self.modes {
            s.push(',');
            s.push_str(m.name());
        }
        s.push('\n');
        for (m, row) in self.modes.iter().zip(values) {
            s.push_str(m.name());
            for v in row {
                s.push_str(&format!(",{v:.6}"));
            }
            s.push('\n');
        }
        s
    }

    /// Globally normalized probabilities; rows are `from`, columns `to`.
    pub fn to_csv(&self) -> String {
        self.csv_of(&self.probabilities, "from\\to")
    }

    /// Diagnostic row-conditional view, labeled as such in its corner cell.
    pub fn row_conditional_csv(&self) -> String {
        self.csv_of(&self.row_conditional(), "row_conditional from\\to")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Parse the output of [`TransitionMatrix::to_csv`] (probabilities only;
    /// counts are not recoverable and are left empty).
    pub fn read_probabilities_csv(path: &Path) -> Result<(Vec<ModeKind>, Vec<Vec<f64>>)> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let err = |line: usize, msg: String| Error::Trace {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let modes = header
            .split(',')
            .skip(1)
            .map(|n| ModeKind::from_name(n.trim()).ok_or_else(|| err(1, format!("unknown mode {n:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != modes.len() + 1 {
                return Err(err(k + 2, format!("expected {} cells", modes.len() + 1)));
            }
            let row = cells[1..]
                .iter()
                .map(|c| c.trim().parse::<f64>().map_err(|_| err(k + 2, format!("bad number {c:?}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.len() != modes.len() {
            return Err(err(rows.len() + 1, "matrix is not square".into()));
        }
        Ok((modes, rows))
    }
}
