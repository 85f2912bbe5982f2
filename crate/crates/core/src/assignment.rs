//! Label-to-prototype assignment: momentum-averaged class representatives and
//! the linear assignment between them and the fixed prototypes.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::hypersphere::{PrototypeMatrix, INPUT_UNIT_TOLERANCE};
use crate::linalg::{dot, norm, normalize_in_place, seeded_rng};
use crate::textio;

/// Bijection from class labels to prototype indices; entry `j` is `A(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssignmentMapping(Vec<usize>);

impl AssignmentMapping {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let c = mapping.len();
        let mut seen = vec![false; c];
        for &k in &mapping {
            if k >= c {
                return Err(Error::IndexOutOfRange { index: k, count: c });
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::NotAPermutation(k));
            }
        }
        Ok(Self(mapping))
    }

    pub fn identity(count: usize) -> Self {
        Self((0..count).collect())
    }

    /// Uniformly random permutation from a seeded generator.
    pub fn random(count: usize, seed: u64) -> Self {
        let mut m: Vec<usize> = (0..count).collect();
        m.shuffle(&mut seeded_rng(seed));
        Self(m)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Prototype index assigned to `label`.
    pub fn prototype_of(&self, label: usize) -> usize {
        self.0[label]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Inverse map: prototype index to label.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.0.len()];
        for (label, &proto) in self.0.iter().enumerate() {
            inv[proto] = label;
        }
        inv
    }

    pub fn summary(&self) -> PermutationSummary {
        let n = self.0.len();
        let mut visited = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut k = start;
            while !visited[k] {
                visited[k] = true;
                k = self.0[k];
                len += 1;
            }
            cycles.push(len);
        }
        let fixed_points = cycles.iter().filter(|&&l| l == 1).count();
        let mut cycle_lengths: Vec<usize> = cycles.into_iter().filter(|&l| l > 1).collect();
        cycle_lengths.sort_unstable_by(|a, b| b.cmp(a));
        PermutationSummary { count: n, fixed_points, cycle_lengths }
    }
}

/// Cycle structure of a permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSummary {
    pub count: usize,
    pub fixed_points: usize,
    /// Lengths of the non-trivial cycles, longest first.
    pub cycle_lengths: Vec<usize>,
}

impl fmt::Display for PermutationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "classes      {}", self.count)?;
        writeln!(f, "fixed points {}", self.fixed_points)?;
        let lens: Vec<String> = self.cycle_lengths.iter().map(usize::to_string).collect();
        write!(f, "cycles       {}", if lens.is_empty() { "none".to_string() } else { lens.join(" ") })
    }
}

/// Per-class running feature directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRepresentatives {
    dim: usize,
    count: usize,
    data: Vec<f64>,
    seen: Vec<bool>,
}

impl ClassRepresentatives {
    pub fn new(dim: usize, count: usize) -> Self {
        Self { dim, count, data: vec![0.0; dim * count], seen: vec![false; count] }
    }

    /// Representatives taken directly from unit columns (all marked seen).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dim = columns.first().map_or(0, Vec::len);
        let mut q = Self::new(dim, columns.len());
        for (j, col) in columns.iter().enumerate() {
            q.update(j, col, 0.0)?;
        }
        Ok(q)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn column(&self, label: usize) -> &[f64] {
        &self.data[label * self.dim..(label + 1) * self.dim]
    }

    pub fn is_seen(&self, label: usize) -> bool {
        self.seen[label]
    }

    pub fn all_seen(&self) -> bool {
        self.seen.iter().all(|&s| s)
    }

    /// Momentum update `z̄ ← α z̄ + (1 − α) z`, renormalized to unit length.
    /// The first observation of a class sets `z̄ = z`.
    pub fn update(&mut self, label: usize, z: &[f64], alpha: f64) -> Result<()> {
        if label >= self.count {
            return Err(Error::IndexOutOfRange { index: label, count: self.count });
        }
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: z.len() });
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("momentum must be in [0, 1], got {alpha}")));
        }
        let n = norm(z);
        if (n - 1.0).abs() > INPUT_UNIT_TOLERANCE {
            return Err(Error::NotUnitNorm { column: label, norm: n });
        }
        let (dim, seen) = (self.dim, self.seen[label]);
        let col = &mut self.data[label * dim..(label + 1) * dim];
        if !seen {
            col.copy_from_slice(z);
            normalize_in_place(col);
            self.seen[label] = true;
            return Ok(());
        }
        let blended: Vec<f64> = col.iter().zip(z).map(|(q, x)| alpha * q + (1.0 - alpha) * x).collect();
        if norm(&blended) < 1e-12 {
            return Err(Error::DegenerateUpdate(label));
        }
        col.copy_from_slice(&blended);
        normalize_in_place(col);
        Ok(())
    }
}

/// Square cost matrix, row-major: `entry(j, k)` is the cost of giving label
/// `j` prototype `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: entries.len() });
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: bad.len() });
        }
        Self::new(n, rows.concat())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    /// Total cost of an assignment, summed in label order.
    pub fn total(&self, a: &AssignmentMapping) -> f64 {
        (0..self.n).map(|j| self.entry(j, a.prototype_of(j))).sum()
    }
}

/// Negative similarities `−z̄_j · w_k` between representatives and prototypes.
pub fn build_cost_matrix(q: &ClassRepresentatives, w: &PrototypeMatrix) -> Result<CostMatrix> {
    if q.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), actual: q.dim() });
    }
    if q.count() != w.count() {
        return Err(Error::ClassCountMismatch { dataset: q.count(), prototypes: w.count() });
    }
    if let Some(j) = (0..q.count()).find(|&j| !q.is_seen(j)) {
        return Err(Error::UnseenClass(j));
    }
    let c = q.count();
    let mut entries = Vec::with_capacity(c * c);
    for j in 0..c {
        let zj = q.column(j);
        entries.extend(w.columns().map(|wk| -dot(zj, wk)));
    }
    CostMatrix::new(c, entries)
}

const NONE: usize = usize::MAX;

/// Minimum-cost perfect matching of a square cost matrix.
///
/// Shortest augmenting paths with dual potentials, O(n³). Among all optimal
/// assignments the lexicographically smallest mapping is returned.
pub fn hungarian_solve(cost: &CostMatrix) -> Result<AssignmentMapping> {
    let n = cost.size();
    for (idx, x) in cost.entries.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFiniteCost { row: idx / n, col: idx % n });
        }
    }
    if n == 0 {
        return Ok(AssignmentMapping(Vec::new()));
    }
    let (mut col4row, u, v) = shortest_augmenting_path(cost);
    lexicographic_minimum(cost, &mut col4row, &u, &v);
    Ok(AssignmentMapping(col4row))
}

fn shortest_augmenting_path(cost: &CostMatrix) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.size();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut col4row = vec![NONE; n];
    let mut row4col = vec![NONE; n];
    let mut shortest = vec![f64::INFINITY; n];
    let mut path = vec![NONE; n];
    let mut visited_rows = vec![false; n];
    let mut visited_cols = vec![false; n];
    let mut remaining = vec![0usize; n];

    for cur_row in 0..n {
        shortest.fill(f64::INFINITY);
        path.fill(NONE);
        visited_rows.fill(false);
        visited_cols.fill(false);
        for (k, r) in remaining.iter_mut().enumerate() {
            *r = n - k - 1;
        }
        let mut num_remaining = n;
        let mut min_val = 0.0;
        let mut i = cur_row;
        let sink = loop {
            visited_rows[i] = true;
            let mut lowest = f64::INFINITY;
            let mut index = NONE;
            let row = cost.row(i);
            for (it, &j) in remaining[..num_remaining].iter().enumerate() {
                let r = min_val + row[j] - u[i] - v[j];
                if r < shortest[j] {
                    path[j] = i;
                    shortest[j] = r;
                }
                if shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == NONE) {
                    lowest = shortest[j];
                    index = it;
                }
            }
            min_val = lowest;
            let j = remaining[index];
            visited_cols[j] = true;
            num_remaining -= 1;
            remaining[index] = remaining[num_remaining];
            if row4col[j] == NONE {
                break j;
            }
            i = row4col[j];
        };

        u[cur_row] += min_val;
        for r in 0..n {
            if visited_rows[r] && r != cur_row {
                u[r] += min_val - shortest[col4row[r]];
            }
        }
        for c in 0..n {
            if visited_cols[c] {
                v[c] -= min_val - shortest[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            std::mem::swap(&mut col4row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }
    (col4row, u, v)
}

/// Rewrites an optimal matching into the lexicographically smallest optimal
/// one. Optimal matchings are exactly the perfect matchings on edges with
/// zero reduced cost under the final duals; rows are fixed in order, each to
/// the smallest tight column that still admits a completion.
fn lexicographic_minimum(cost: &CostMatrix, col4row: &mut [usize], u: &[f64], v: &[f64]) {
    let n = cost.size();
    let scale = cost.entries.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let tight = |i: usize, j: usize| cost.entry(i, j) - u[i] - v[j] <= tol;

    let mut row4col = vec![0usize; n];
    for (i, &j) in col4row.iter().enumerate() {
        row4col[j] = i;
    }
    let mut col_fixed = vec![false; n];
    let mut parent_row = vec![NONE; n];
    let mut queue = Vec::with_capacity(n);

    for i in 0..n {
        let target = col4row[i];
        for k in 0..target {
            if col_fixed[k] || !tight(i, k) {
                continue;
            }
            // Search an alternating path from the row holding `k` to `target`
            // through unfixed rows (all > i) and tight edges.
            parent_row.fill(NONE);
            queue.clear();
            queue.push(row4col[k]);
            let mut head = 0;
            let mut found = false;
            while head < queue.len() && !found {
                let r = queue[head];
                head += 1;
                for c in 0..n {
                    if col_fixed[c] || c == k || parent_row[c] != NONE || c == col4row[r] || !tight(r, c) {
                        continue;
                    }
                    parent_row[c] = r;
                    if c == target {
                        found = true;
                        break;
                    }
                    queue.push(row4col[c]);
                }
            }
            if !found {
                continue;
            }
            // Each row along the path takes the column that led to it.
            let mut c = target;
            loop {
                let r = parent_row[c];
                let prev = col4row[r];
                col4row[r] = c;
                row4col[c] = r;
                if prev == k {
                    break;
                }
                c = prev;
            }
            col4row[i] = k;
            row4col[k] = i;
            break;
        }
        col_fixed[col4row[i]] = true;
    }
}

/// Assignment maximizing total representative-prototype similarity.
pub fn reassign(q: &ClassRepresentatives, w: &PrototypeMatrix) -> Result<AssignmentMapping> {
    hungarian_solve(&build_cost_matrix(q, w)?)
}

/// Fraction of labels whose prototype differs between two mappings.
pub fn assignment_churn(prev: &AssignmentMapping, next: &AssignmentMapping) -> Result<f64> {
    if prev.len() != next.len() {
        return Err(Error::DimensionMismatch { expected: prev.len(), actual: next.len() });
    }
    if prev.is_empty() {
        return Ok(0.0);
    }
    let changed = prev.0.iter().zip(&next.0).filter(|(a, b)| a != b).count();
    Ok(changed as f64 / prev.len() as f64)
}

pub fn format_assignment(a: &AssignmentMapping) -> String {
    let body: Vec<String> = a.0.iter().map(usize::to_string).collect();
    format!("# protosphere-assignment v1 c={}\n{}\n", a.len(), body.join(" "))
}

pub fn save_assignment(path: &Path, a: &AssignmentMapping) -> Result<()> {
    textio::write_string(path, &format_assignment(a))
}

pub fn load_assignment(path: &Path) -> Result<AssignmentMapping> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    let fields = textio::parse_header(path, lines.next(), "protosphere-assignment")?;
    let c: usize = textio::header_field(path, &fields, "c")?;
    let mut values = Vec::with_capacity(c);
    for (k, line) in lines.enumerate() {
        for tok in line.split_whitespace() {
            let v = tok.parse::<usize>().map_err(|_| Error::Parse {
                path: path.into(),
                line: k + 2,
                reason: format!("invalid prototype index `{tok}`"),
            })?;
            values.push(v);
        }
    }
    if values.len() != c {
        return Err(Error::MalformedHeader {
            path: path.into(),
            reason: format!("header declares c={c} but file has {} entries", values.len()),
        });
    }
    AssignmentMapping::new(values)
}
