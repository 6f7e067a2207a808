use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A finite set of assignments over named columns.
///
/// Columns are kept in ascending name order and rows are sorted
/// lexicographically without duplicates, so joins can merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRelation {
    vars: Vec<String>,
    data: Vec<u32>,
    rows: usize,
}

impl SparseRelation {
    /// The arity-0 relation holding the empty tuple (`truth = true`) or
    /// nothing.
    pub fn boolean(truth: bool) -> Self {
        SparseRelation { vars: Vec::new(), data: Vec::new(), rows: usize::from(truth) }
    }

    pub fn empty(vars: Vec<String>) -> Self {
        let mut vars = vars;
        vars.sort();
        vars.dedup();
        SparseRelation { vars, data: Vec::new(), rows: 0 }
    }

    /// Builds a relation from rows laid out in the column order of `vars`.
    pub fn from_rows(vars: Vec<String>, data: Vec<u32>) -> Self {
        let arity = vars.len();
        if arity == 0 {
            let rows = usize::from(!data.is_empty());
            return SparseRelation { vars, data: Vec::new(), rows };
        }
        debug_assert_eq!(data.len() % arity, 0);
        let mut order: Vec<usize> = (0..arity).collect();
        order.sort_by(|&a, &b| vars[a].cmp(&vars[b]));
        let sorted_vars: Vec<String> = order.iter().map(|&i| vars[i].clone()).collect();
        debug_assert!(sorted_vars.windows(2).all(|w| w[0] != w[1]), "duplicate columns");
        let identity = order.iter().enumerate().all(|(i, &j)| i == j);
        let permuted = if identity {
            data
        } else {
            let mut out = Vec::with_capacity(data.len());
            for row in data.chunks_exact(arity) {
                out.extend(order.iter().map(|&i| row[i]));
            }
            out
        };
        let mut rel = SparseRelation { vars: sorted_vars, data: permuted, rows: 0 };
        rel.normalize();
        rel
    }

    fn normalize(&mut self) {
        let arity = self.vars.len();
        let data = std::mem::take(&mut self.data);
        self.data = sort_rows(data, arity, true);
        self.rows = self.data.len() / arity;
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    /// Sentence-level truth of an arity-0 relation.
    pub fn truth(&self) -> bool {
        self.rows > 0
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        let arity = self.arity();
        let n = self.rows;
        // Arity 0 has at most one (empty) row.
        (0..n).map(move |i| {
            if arity == 0 {
                &[][..]
            } else {
                &self.data[i * arity..(i + 1) * arity]
            }
        })
    }

    pub fn column(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    pub fn contains(&self, row: &[u32]) -> bool {
        if self.arity() == 0 {
            return self.rows > 0;
        }
        let arity = self.arity();
        let (mut lo, mut hi) = (0usize, self.rows);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.data[mid * arity..(mid + 1) * arity].cmp(row) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return true,
            }
        }
        false
    }

    /// Rows re-laid in the column order `cols` (indices into `self.vars`),
    /// sorted.
    fn reorder(&self, cols: &[usize]) -> Vec<u32> {
        let arity = self.arity();
        let k = cols.len();
        let mut out = Vec::with_capacity(self.rows * k);
        for row in self.data.chunks_exact(arity.max(1)).take(self.rows) {
            out.extend(cols.iter().map(|&c| row[c]));
        }
        if k > 0 {
            return sort_rows(out, k, false);
        }
        out
    }

    /// Drops the named columns.
    pub fn project_away(&self, drop: &[&str]) -> SparseRelation {
        let keep: Vec<usize> = (0..self.arity())
            .filter(|&i| !drop.contains(&self.vars[i].as_str()))
            .collect();
        let vars: Vec<String> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        if vars.is_empty() {
            return SparseRelation::boolean(self.rows > 0);
        }
        SparseRelation::from_rows(vars, self.reorder(&keep))
    }

    /// The same tuples under new column names.
    pub fn renamed(&self, rename: impl Fn(&str) -> String) -> SparseRelation {
        if self.vars.is_empty() {
            return self.clone();
        }
        let vars = self.vars.iter().map(|v| rename(v)).collect();
        SparseRelation::from_rows(vars, self.data.clone())
    }

    /// Number of rows per assignment of the other columns, i.e. witness
    /// counts for `var`. Groups come out sorted.
    pub fn group_counts(&self, var: &str) -> Groups {
        let Some(vcol) = self.column(var) else {
            return Groups { rest: self.vars.clone(), keys: self.data.clone(), counts: vec![1; self.rows] };
        };
        let rest: Vec<usize> = (0..self.arity()).filter(|&i| i != vcol).collect();
        let mut cols = rest.clone();
        cols.push(vcol);
        let data = self.reorder(&cols);
        let k = cols.len();
        let w = k - 1;
        let mut keys: Vec<u32> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for row in data.chunks_exact(k) {
            let key = &row[..w];
            let same = !counts.is_empty() && &keys[keys.len() - w..] == key;
            if same {
                *counts.last_mut().expect("nonempty") += 1;
            } else {
                keys.extend_from_slice(key);
                counts.push(1);
            }
        }
        let vars = rest.iter().map(|&i| self.vars[i].clone()).collect();
        Groups { rest: vars, keys, counts }
    }

    /// Natural join by sort-merge on the shared columns.
    pub fn join(&self, other: &SparseRelation, budget: usize) -> Result<SparseRelation> {
        let shared: Vec<String> = self.vars.iter().filter(|v| other.vars.contains(v)).cloned().collect();
        let a_only: Vec<usize> = (0..self.arity()).filter(|&i| !shared.contains(&self.vars[i])).collect();
        let b_only: Vec<usize> = (0..other.arity()).filter(|&i| !shared.contains(&other.vars[i])).collect();
        let a_key: Vec<usize> = shared.iter().map(|v| self.column(v).expect("shared")).collect();
        let b_key: Vec<usize> = shared.iter().map(|v| other.column(v).expect("shared")).collect();
        let s = shared.len();
        let a_cols: Vec<usize> = a_key.iter().chain(&a_only).copied().collect();
        let b_cols: Vec<usize> = b_key.iter().chain(&b_only).copied().collect();
        let a = self.reorder(&a_cols);
        let b = other.reorder(&b_cols);
        let (ka, kb) = (a_cols.len(), b_cols.len());
        let a_rows: Vec<&[u32]> = if ka == 0 { vec![&[][..]; self.rows] } else { a.chunks_exact(ka).collect() };
        let b_rows: Vec<&[u32]> = if kb == 0 { vec![&[][..]; other.rows] } else { b.chunks_exact(kb).collect() };

        let mut out_vars: Vec<String> = shared.clone();
        out_vars.extend(a_only.iter().map(|&i| self.vars[i].clone()));
        out_vars.extend(b_only.iter().map(|&i| other.vars[i].clone()));
        let width = out_vars.len();
        let mut out: Vec<u32> = Vec::new();
        let mut produced = 0usize;
        let (mut i, mut j) = (0, 0);
        while i < a_rows.len() && j < b_rows.len() {
            match a_rows[i][..s].cmp(&b_rows[j][..s]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    let key = &a_rows[i][..s];
                    let i_end = i + a_rows[i..].iter().take_while(|r| &r[..s] == key).count();
                    let j_end = j + b_rows[j..].iter().take_while(|r| &r[..s] == key).count();
                    produced += (i_end - i) * (j_end - j);
                    if produced > budget {
                        return Err(Error::ResourceLimit(format!(
                            "join result exceeds {budget} tuples"
                        )));
                    }
                    for ra in &a_rows[i..i_end] {
                        for rb in &b_rows[j..j_end] {
                            out.extend_from_slice(ra);
                            out.extend_from_slice(&rb[s..]);
                        }
                    }
                    i = i_end;
                    j = j_end;
                }
            }
        }
        if width == 0 {
            return Ok(SparseRelation::boolean(produced > 0));
        }
        Ok(SparseRelation::from_rows(out_vars, out))
    }

    /// Keeps the rows whose restriction to `other`'s columns is (or, with
    /// `anti`, is not) in `other`. Requires `other.vars ⊆ self.vars`.
    pub fn semijoin(&self, other: &SparseRelation, anti: bool) -> SparseRelation {
        let key: Vec<usize> = other
            .vars
            .iter()
            .map(|v| self.column(v).expect("semijoin columns must be a subset"))
            .collect();
        let mut out = Vec::new();
        let mut kept = 0;
        let mut probe = Vec::with_capacity(key.len());
        for row in self.rows() {
            probe.clear();
            probe.extend(key.iter().map(|&c| row[c]));
            if other.contains(&probe) != anti {
                out.extend_from_slice(row);
                kept += 1;
            }
        }
        SparseRelation { vars: self.vars.clone(), data: out, rows: kept }
    }

    /// Union of two relations over the same columns.
    pub fn union(&self, other: &SparseRelation) -> SparseRelation {
        debug_assert_eq!(self.vars, other.vars);
        if self.arity() == 0 {
            return SparseRelation::boolean(self.truth() || other.truth());
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        SparseRelation::from_rows(self.vars.clone(), data)
    }

    /// All tuples over `0..m` for these columns that are not in `self`.
    pub fn complement(&self, m: u64, budget: usize) -> Result<SparseRelation> {
        let arity = self.arity();
        if arity == 0 {
            return Ok(SparseRelation::boolean(!self.truth()));
        }
        let total = (m as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
        let size = total.saturating_sub(self.rows as u128);
        if size > budget as u128 {
            return Err(Error::ResourceLimit(format!(
                "complement over {} column(s) in Z_{m} would hold {size} tuples (budget {budget})",
                arity
            )));
        }
        let mut out = Vec::with_capacity(size as usize * arity);
        let mut tuple = vec![0u32; arity];
        let mut existing = self.rows().peekable();
        if m > 0 {
            loop {
                while existing.peek().is_some_and(|r| *r < tuple.as_slice()) {
                    existing.next();
                }
                if existing.peek() != Some(&tuple.as_slice()) {
                    out.extend_from_slice(&tuple);
                }
                // Odometer increment, last column fastest: lexicographic order.
                let mut k = arity;
                loop {
                    if k == 0 {
                        return Ok(SparseRelation { vars: self.vars.clone(), rows: out.len() / arity, data: out });
                    }
                    k -= 1;
                    tuple[k] += 1;
                    if (tuple[k] as u64) < m {
                        break;
                    }
                    tuple[k] = 0;
                }
            }
        }
        Ok(SparseRelation { vars: self.vars.clone(), data: out, rows: 0 })
    }

    /// CSV with a header row of column names.
    pub fn to_csv(&self) -> String {
        let mut s = self.vars.join(",");
        s.push('\n');
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// Per-group counts over the `rest` columns, keys stored flat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Groups {
    pub rest: Vec<String>,
    pub keys: Vec<u32>,
    pub counts: Vec<u64>,
}

impl Groups {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], u64)> + '_ {
        let w = self.rest.len();
        (0..self.counts.len()).map(move |i| (&self.keys[i * w..(i + 1) * w], self.counts[i]))
    }
}

fn is_sorted_rows(data: &[u32], arity: usize, strict: bool) -> bool {
    let mut rows = data.chunks_exact(arity);
    let Some(mut prev) = rows.next() else { return true };
    for row in rows {
        if row < prev || (strict && row == prev) {
            return false;
        }
        prev = row;
    }
    true
}

/// Sorts flat rows lexicographically, optionally dropping duplicates.
/// Narrow rows are packed into integers so the sort runs on scalars.
fn sort_rows(data: Vec<u32>, arity: usize, dedup: bool) -> Vec<u32> {
    if is_sorted_rows(&data, arity, dedup) {
        return data;
    }
    let max = data.iter().copied().max().unwrap_or(0) as u64;
    let bits = 64 - max.leading_zeros();
    if arity as u32 * bits <= 64 {
        let shift = bits.max(1);
        let mut keys: Vec<u64> = data
            .chunks_exact(arity)
            .map(|r| r.iter().fold(0u64, |acc, &v| (acc << shift) | v as u64))
            .collect();
        keys.sort_unstable();
        if dedup {
            keys.dedup();
        }
        let mask = (1u64 << shift) - 1;
        let mut out = Vec::with_capacity(keys.len() * arity);
        for key in keys {
            for i in (0..arity).rev() {
                out.push(((key >> (shift * i as u32)) & mask) as u32);
            }
        }
        return out;
    }
    let mut rows: Vec<&[u32]> = data.chunks_exact(arity).collect();
    rows.sort_unstable();
    if dedup {
        rows.dedup();
    }
    rows.concat()
}
