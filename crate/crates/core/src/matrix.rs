//! Compressed sparse row storage shared by count and weighted matrices.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TRIPLET_MAGIC: &str = "%commentrel-triplet v1";

/// Row-major sparse matrix. Column indices within a row are strictly increasing
/// and only non-zero values are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CsrMatrix {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from per-row `(column, value)` lists. Entries are sorted,
    /// duplicate columns summed, and zeros dropped.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let n_rows = rows.len();
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if c >= cols {
                    return Err(Error::ColumnOutOfRange { column: c, cols });
                }
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        let mut m = CsrMatrix {
            rows: n_rows,
            cols,
            indptr,
            indices,
            values,
        };
        m.prune_zeros();
        Ok(m)
    }

    pub fn from_dense(dense: &[Vec<f64>], cols: usize) -> Result<Self> {
        let rows = dense
            .iter()
            .map(|r| {
                if r.len() != cols {
                    return Err(Error::DimensionMismatch {
                        expected: cols,
                        actual: r.len(),
                    });
                }
                Ok(r.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        CsrMatrix::from_rows(cols, rows)
    }

    fn prune_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut indptr = vec![0];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != 0.0 {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr.push(indices.len());
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, vals) = self.row(r);
        idx.binary_search(&c).map(|k| vals[k]).unwrap_or(0.0)
    }

    /// Iterates stored `(row, column, value)` triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (idx, vals) = self.row(r);
            idx.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn row_dot(&self, r: usize, dense: &[f64]) -> f64 {
        let (idx, vals) = self.row(r);
        idx.iter().zip(vals).map(|(&c, &v)| v * dense[c]).sum()
    }

    pub fn row_norm(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    /// Applies `f(column, value)` to every stored entry, dropping results that
    /// come out exactly zero.
    pub fn map_values(&self, f: impl Fn(usize, f64) -> f64) -> CsrMatrix {
        let mut m = self.clone();
        for (c, v) in m.indices.iter().zip(m.values.iter_mut()) {
            *v = f(*c, *v);
        }
        m.prune_zeros();
        m
    }

    /// Scales every non-empty row to unit Euclidean norm.
    pub fn l2_normalize_rows(&mut self) {
        for r in 0..self.rows {
            let norm = self.row_norm(r);
            if norm > 0.0 {
                for v in &mut self.values[self.indptr[r]..self.indptr[r + 1]] {
                    *v /= norm;
                }
            }
        }
    }

    /// Sub-matrix of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> CsrMatrix {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &r in rows {
            let (idx, vals) = self.row(r);
            indices.extend_from_slice(idx);
            values.extend_from_slice(vals);
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows: rows.len(),
            cols: self.cols,
            indptr,
            indices,
            values,
        }
    }

    /// Restricts to `columns`; output column `k` is input column `columns[k]`.
    pub fn select_columns(&self, columns: &[usize]) -> Result<CsrMatrix> {
        let mut remap = vec![usize::MAX; self.cols];
        for (new, &old) in columns.iter().enumerate() {
            if old >= self.cols {
                return Err(Error::ColumnOutOfRange {
                    column: old,
                    cols: self.cols,
                });
            }
            remap[old] = new;
        }
        let rows = (0..self.rows)
            .map(|r| {
                let (idx, vals) = self.row(r);
                idx.iter()
                    .zip(vals)
                    .filter(|(&c, _)| remap[c] != usize::MAX)
                    .map(|(&c, &v)| (remap[c], v))
                    .collect()
            })
            .collect();
        CsrMatrix::from_rows(columns.len(), rows)
    }

    /// Per-column `(sum of values, number of non-zero rows)`.
    pub fn column_totals(&self) -> Vec<(f64, usize)> {
        let mut out = vec![(0.0, 0); self.cols];
        for (_, c, v) in self.triplets() {
            out[c].0 += v;
            out[c].1 += 1;
        }
        out
    }

    /// Column-major copy: for every column, its `(row, value)` entries by row.
    pub fn to_columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for (r, c, v) in self.triplets() {
            cols[c].push((r, v));
        }
        cols
    }

    /// Writes the text triplet format: a magic line, `rows cols nnz`, then one
    /// `row col value` line per stored entry.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRIPLET_MAGIC}")?;
        writeln!(w, "{} {} {}", self.rows, self.cols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {v:?}")?;
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(r: R) -> Result<CsrMatrix> {
        let bad = |msg: &str| Error::MalformedCsv(format!("triplet file: {msg}"));
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| bad("unexpected end of file"))?
                .map_err(|e| Error::io("<triplets>", e))
        };
        if next()?.trim() != TRIPLET_MAGIC {
            return Err(bad("missing header"));
        }
        let dims: Vec<usize> = next()?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad dimensions")))
            .collect::<Result<_>>()?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(bad("expected `rows cols nnz`"));
        };
        let mut per_row = vec![Vec::new(); rows];
        for _ in 0..nnz {
            let line = next()?;
            let mut it = line.split_whitespace();
            let (Some(r), Some(c), Some(v), None) = (it.next(), it.next(), it.next(), it.next()) else {
                return Err(bad("expected `row col value`"));
            };
            let r: usize = r.parse().map_err(|_| bad("bad row"))?;
            let c: usize = c.parse().map_err(|_| bad("bad column"))?;
            let v: f64 = v.parse().map_err(|_| bad("bad value"))?;
            if r >= rows {
                return Err(bad("row out of range"));
            }
            per_row[r].push((c, v));
        }
        CsrMatrix::from_rows(cols, per_row)
    }
}
