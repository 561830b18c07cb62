use crate::{Error, Result};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Anything that can be applied to a vector.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.nrows && c < self.ncols);
        self.entries.push((r, c, v));
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; self.nrows + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.add(i, i, 1.0);
        }
        b.build()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut b = TripletBuilder::new(rows.len(), ncols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::new(self.ncols, self.nrows);
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                b.add(j, i, x);
            }
        }
        b.build()
    }

    pub fn scale(&self, a: f64) -> CsrMatrix {
        let mut m = self.clone();
        for v in &mut m.vals {
            *v *= a;
        }
        m
    }

    /// `A + a * B`
    pub fn add_scaled(&self, a: f64, other: &CsrMatrix) -> CsrMatrix {
        let mut b = TripletBuilder::new(self.nrows, self.ncols);
        for (m, s) in [(self, 1.0), (other, a)] {
            for i in 0..m.nrows {
                let (c, v) = m.row(i);
                for (&j, &x) in c.iter().zip(v) {
                    b.add(i, j, s * x);
                }
            }
        }
        b.build()
    }

    /// Sparse product `A * B`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        let mut b = TripletBuilder::new(self.nrows, other.ncols);
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&k, &a) in c.iter().zip(v) {
                let (c2, v2) = other.row(k);
                for (&j, &bv) in c2.iter().zip(v2) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * bv;
                }
            }
            for &j in &touched {
                b.add(i, j, acc[j]);
            }
            touched.clear();
        }
        b.build()
    }

    /// `A * diag(d)`
    pub fn scale_columns(&self, d: &[f64]) -> CsrMatrix {
        let mut m = self.clone();
        for (c, v) in m.cols.iter().zip(m.vals.iter_mut()) {
            *v *= d[*c];
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                row[j] = x;
            }
        }
        d
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let d = self.add_scaled(-1.0, &t);
        d.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Text export, one `row col value` line per stored entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "% {} {} {}", self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                let _ = writeln!(s, "{i} {j} {x:.17e}");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, head) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty matrix file".into(),
        })?;
        let dims: Vec<usize> = head
            .trim_start_matches('%')
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e: std::num::ParseIntError| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?;
        if dims.len() != 3 {
            return Err(Error::Parse {
                line: 1,
                message: "header needs rows, cols and nnz".into(),
            });
        }
        let mut b = TripletBuilder::new(dims[0], dims[1]);
        for (i, l) in lines {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.is_empty() {
                continue;
            }
            let perr = |m: String| Error::Parse {
                line: i + 1,
                message: m,
            };
            if t.len() != 3 {
                return Err(perr("expected 'row col value'".into()));
            }
            let r: usize = t[0].parse().map_err(|e: std::num::ParseIntError| perr(e.to_string()))?;
            let c: usize = t[1].parse().map_err(|e: std::num::ParseIntError| perr(e.to_string()))?;
            let v: f64 = t[2]
                .parse()
                .map_err(|e: std::num::ParseFloatError| perr(e.to_string()))?;
            if r >= dims[0] || c >= dims[1] {
                return Err(perr(format!("entry ({r}, {c}) out of range")));
            }
            b.add(r, c, v);
        }
        Ok(b.build())
    }
}

impl LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let kernel = |(i, yi): (usize, &mut f64)| {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        };
        if self.nnz() > 200_000 {
            y.par_iter_mut().enumerate().for_each(kernel);
        } else {
            y.iter_mut().enumerate().for_each(kernel);
        }
    }
}

/// 2x2 block operator `[[A, B], [C, D]]`.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub c: CsrMatrix,
    pub d: CsrMatrix,
}

impl BlockOperator {
    pub fn split(&self) -> usize {
        self.a.nrows
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let n1 = self.a.nrows;
        let n = n1 + self.d.nrows;
        let mut t = TripletBuilder::new(n, n);
        for (m, ro, co) in [(&self.a, 0, 0), (&self.b, 0, n1), (&self.c, n1, 0), (&self.d, n1, n1)] {
            for i in 0..m.nrows {
                let (c, v) = m.row(i);
                for (&j, &x) in c.iter().zip(v) {
                    t.add(i + ro, j + co, x);
                }
            }
        }
        t.build()
    }
}

impl LinearOperator for BlockOperator {
    fn nrows(&self) -> usize {
        self.a.nrows + self.c.nrows
    }

    fn ncols(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n1 = self.a.nrows;
        let (x1, x2) = x.split_at(n1);
        let (y1, y2) = y.split_at_mut(n1);
        let mut t1 = vec![0.0; y1.len()];
        let mut t2 = vec![0.0; y2.len()];
        self.a.apply(x1, y1);
        self.b.apply(x2, &mut t1);
        self.c.apply(x1, y2);
        self.d.apply(x2, &mut t2);
        for (a, b) in y1.iter_mut().zip(&t1) {
            *a += b;
        }
        for (a, b) in y2.iter_mut().zip(&t2) {
            *a += b;
        }
    }
}
