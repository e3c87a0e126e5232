//! Classical and weighted majorization.
//!
//! `y ≺ x` (x majorizes y) when, after sorting both in decreasing order, every
//! prefix sum of `y` is at most the matching prefix sum of `x`, with equal
//! totals. Equivalently `y = xAᵀ` for a doubly stochastic `A`.
//!
//! The weighted relation `(y, b) ≺ (x, a)` asks for a row-stochastic `m×l`
//! matrix `A` with `a = bA` and `y = xAᵀ`.

use std::io::Read;

use serde::Serialize;

use crate::convexity::Interval;
use crate::error::{Error, Result};

/// Tolerance on row/column sums of a stochastic matrix.
pub const SUM_TOL: f64 = 1e-12;
/// Entries above this negative threshold are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StochasticKind {
    Row,
    Column,
    Doubly,
}

/// A nonnegative `rows × cols` matrix whose rows and/or columns sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticMatrix {
    kind: StochasticKind,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<f64>>,
}

fn max_sum_defect(sums: impl Iterator<Item = f64>) -> f64 {
    sums.map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
}

impl StochasticMatrix {
    /// Validates `entries` against `kind`.
    pub fn new(entries: Vec<Vec<f64>>, kind: StochasticKind) -> Result<Self> {
        let mut m = Self::ingest(entries)?;
        let (row_defect, col_defect) = (m.row_defect(), m.column_defect());
        let ok = match kind {
            StochasticKind::Row => row_defect <= SUM_TOL,
            StochasticKind::Column => col_defect <= SUM_TOL,
            StochasticKind::Doubly => row_defect <= SUM_TOL && col_defect <= SUM_TOL,
        };
        if !ok {
            return Err(Error::InvalidMatrix(format!(
                "not {kind:?}-stochastic (row defect {row_defect:e}, column defect {col_defect:e})"
            )));
        }
        m.kind = kind;
        Ok(m)
    }

    /// Picks the strongest kind the entries satisfy: doubly, then row, then column.
    pub fn infer(entries: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self::ingest(entries)?;
        let rows_ok = m.row_defect() <= SUM_TOL;
        let cols_ok = m.column_defect() <= SUM_TOL;
        let kind = match (rows_ok, cols_ok) {
            (true, true) => StochasticKind::Doubly,
            (true, false) => StochasticKind::Row,
            (false, true) => StochasticKind::Column,
            (false, false) => {
                return Err(Error::InvalidMatrix(
                    "neither rows nor columns sum to 1".into(),
                ))
            }
        };
        Ok(Self { kind, ..m })
    }

    fn ingest(mut entries: Vec<Vec<f64>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("matrix is empty".into()));
        }
        for (i, row) in entries.iter_mut().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (j, v) in row.iter_mut().enumerate() {
                if !v.is_finite() || *v < -CLAMP_TOL {
                    return Err(Error::InvalidMatrix(format!("entry ({i}, {j}) = {v}")));
                }
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Ok(Self {
            kind: StochasticKind::Row,
            rows,
            cols,
            entries,
        })
    }

    /// Parses a row-major JSON array of arrays and infers its kind.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let entries: Vec<Vec<f64>> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidMatrix(format!("bad JSON matrix: {e}")))?;
        Self::infer(entries)
    }

    /// Parses headerless CSV, one matrix row per line, and infers its kind.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record =
                record.map_err(|e| Error::InvalidMatrix(format!("line {}: {e}", line + 1)))?;
            let row = record
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|_| {
                        Error::InvalidMatrix(format!("line {}: `{field}` is not a number", line + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            entries.push(row);
        }
        Self::infer(entries)
    }

    pub fn identity(size: usize) -> Self {
        let entries = (0..size)
            .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            kind: StochasticKind::Doubly,
            rows: size,
            cols: size,
            entries,
        }
    }

    pub fn kind(&self) -> StochasticKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn is_row_stochastic(&self) -> bool {
        matches!(self.kind, StochasticKind::Row | StochasticKind::Doubly)
    }

    pub fn is_column_stochastic(&self) -> bool {
        matches!(self.kind, StochasticKind::Column | StochasticKind::Doubly)
    }

    /// Largest `|row sum - 1|`.
    pub fn row_defect(&self) -> f64 {
        max_sum_defect(self.entries.iter().map(|r| r.iter().sum()))
    }

    /// Largest `|column sum - 1|`.
    pub fn column_defect(&self) -> f64 {
        max_sum_defect((0..self.cols).map(|j| self.entries.iter().map(|r| r[j]).sum()))
    }

    /// `xAᵀ`, i.e. `yᵢ = Σⱼ aᵢⱼ xⱼ`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against a {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, x)| a * x).sum())
            .collect())
    }

    /// `bA`, i.e. `aⱼ = Σᵢ bᵢ aᵢⱼ`.
    pub fn left_apply(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "weights of length {} against a {}x{} matrix",
                b.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.cols)
            .map(|j| self.entries.iter().zip(b).map(|(row, b)| b * row[j]).sum())
            .collect())
    }

    /// Same matrix with its columns reordered: column `k` of the result is
    /// column `order[k]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.cols {
            return Err(Error::DimensionMismatch("column permutation length".into()));
        }
        let entries = self
            .entries
            .iter()
            .map(|row| order.iter().map(|&j| row[j]).collect())
            .collect();
        Ok(Self {
            entries,
            ..self.clone()
        })
    }
}

/// Points paired with nonnegative weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedVector {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedVector {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: weights.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::InvalidParameter("weighted vector is empty".into()));
        }
        if let Some(&p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite point {p}")));
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(Error::InvalidWeight { index, value });
        }
        Ok(Self { points, weights })
    }

    /// Equal weights `1/len`.
    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self::new(points, weights)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ wᵢ xᵢ`.
    pub fn weighted_sum(&self) -> f64 {
        self.iter().map(|(x, w)| w * x).sum()
    }

    /// `Σ wᵢ g(xᵢ)`.
    pub fn weighted_sum_of(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * g(x)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn check_within(&self, interval: Interval) -> Result<()> {
        self.points.iter().try_for_each(|&p| interval.check(p))
    }

    /// Reorders points and weights jointly.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            points: order.iter().map(|&i| self.points[i]).collect(),
            weights: order.iter().map(|&i| self.weights[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Holds,
    Fails,
}

/// Result of a majorization test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationCert {
    pub relation: Relation,
    /// First violated prefix length (1-based); `m` when only the totals differ.
    pub witness_k: Option<usize>,
    pub matrix: Option<StochasticMatrix>,
}

impl MajorizationCert {
    pub fn holds(&self) -> bool {
        self.relation == Relation::Holds
    }
}

fn sorted_decreasing(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Tests `y ≺ x` with absolute slack `tol` on the prefix sums.
pub fn majorizes(x: &[f64], y: &[f64], tol: f64) -> Result<MajorizationCert> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("majorization needs m >= 1".into()));
    }
    let (xs, ys) = (sorted_decreasing(x), sorted_decreasing(y));
    let m = xs.len();
    let (mut px, mut py) = (0.0, 0.0);
    let mut witness_k = None;
    for k in 0..m {
        px += xs[k];
        py += ys[k];
        let violated = if k + 1 < m {
            py > px + tol
        } else {
            (py - px).abs() > tol
        };
        if violated {
            witness_k = Some(k + 1);
            break;
        }
    }
    Ok(MajorizationCert {
        relation: if witness_k.is_none() {
            Relation::Holds
        } else {
            Relation::Fails
        },
        witness_k,
        matrix: None,
    })
}

/// Indices that sort `v` in decreasing order, ties kept in index order.
fn decreasing_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].total_cmp(&v[i]).then(i.cmp(&j)));
    idx
}

/// Builds a doubly stochastic `A` with `y = xAᵀ` from at most `m-1`
/// T-transforms (each a convex combination of the identity and a
/// transposition), conjugated by the sorting permutations of `x` and `y`.
pub fn construct_doubly_stochastic(x: &[f64], y: &[f64], tol: f64) -> Result<StochasticMatrix> {
    let cert = majorizes(x, y, tol)?;
    if let Some(witness_k) = cert.witness_k {
        return Err(Error::NotMajorized { witness_k });
    }
    let m = x.len();
    let px = decreasing_order(x);
    let py = decreasing_order(y);
    let target: Vec<f64> = py.iter().map(|&i| y[i]).collect();
    let mut z: Vec<f64> = px.iter().map(|&i| x[i]).collect();

    // `t` maps sorted x to the current z (z = t · xs).
    let mut t: Vec<Vec<f64>> = StochasticMatrix::identity(m).entries;
    let scale = z.iter().chain(&target).fold(1.0_f64, |s, v| s.max(v.abs()));
    let eps = tol.max(f64::EPSILON * scale * m as f64);

    for _ in 0..m {
        let Some(j) = (0..m).rev().find(|&i| z[i] - target[i] > eps) else {
            break;
        };
        let Some(k) = (j + 1..m).find(|&i| target[i] - z[i] > eps) else {
            break;
        };
        let excess = z[j] - target[j];
        let deficit = target[k] - z[k];
        let delta = excess.min(deficit);
        let keep = 1.0 - delta / (z[j] - z[k]);
        let (row_j, row_k) = (t[j].clone(), t[k].clone());
        for c in 0..m {
            t[j][c] = keep * row_j[c] + (1.0 - keep) * row_k[c];
            t[k][c] = keep * row_k[c] + (1.0 - keep) * row_j[c];
        }
        let (zj, zk) = (z[j], z[k]);
        z[j] = keep * zj + (1.0 - keep) * zk;
        z[k] = keep * zk + (1.0 - keep) * zj;
        if excess <= deficit {
            z[j] = target[j];
        } else {
            z[k] = target[k];
        }
    }

    // y[py[r]] = Σ_c t[r][c] x[px[c]]
    let mut entries = vec![vec![0.0; m]; m];
    for r in 0..m {
        for c in 0..m {
            entries[py[r]][px[c]] = t[r][c].clamp(0.0, 1.0);
        }
    }
    let matrix = StochasticMatrix::new(entries, StochasticKind::Doubly)?;
    let residual = max_abs_diff(&matrix.apply(x)?, y);
    if residual > 1e-10_f64.max(tol) {
        return Err(Error::InvalidMatrix(format!(
            "constructed matrix misses y by {residual:e}"
        )));
    }
    Ok(matrix)
}

/// [`majorizes`], with the realizing matrix attached when the relation holds.
pub fn majorization_certificate(x: &[f64], y: &[f64], tol: f64) -> Result<MajorizationCert> {
    let mut cert = majorizes(x, y, tol)?;
    if cert.holds() {
        cert.matrix = Some(construct_doubly_stochastic(x, y, tol)?);
    }
    Ok(cert)
}

pub(crate) fn max_abs_diff(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Residuals of the weighted-majorization conditions `a = bA`, `y = xAᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedCheck {
    pub passed: bool,
    pub weight_residual: f64,
    pub point_residual: f64,
    pub tolerance: f64,
}

/// Checks `(y, b) ≺ (x, a)` through the given row-stochastic `A`.
pub fn verify_weighted_majorization(
    x: &WeightedVector,
    y: &WeightedVector,
    matrix: &StochasticMatrix,
    tol: f64,
) -> Result<WeightedCheck> {
    if matrix.rows() != y.len() || matrix.cols() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but x has {} points and y has {}",
            matrix.rows(),
            matrix.cols(),
            x.len(),
            y.len()
        )));
    }
    if !matrix.is_row_stochastic() {
        return Err(Error::InvalidMatrix("A must be row stochastic".into()));
    }
    let weight_residual = max_abs_diff(&matrix.left_apply(y.weights())?, x.weights());
    let point_residual = max_abs_diff(&matrix.apply(x.points())?, y.points());
    Ok(WeightedCheck {
        passed: weight_residual <= tol && point_residual <= tol,
        weight_residual,
        point_residual,
        tolerance: tol,
    })
}

/// `y = xAᵀ` and `a = bA`.
pub fn generate_weighted_pair(
    x: &[f64],
    b: &[f64],
    matrix: &StochasticMatrix,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !matrix.is_row_stochastic() {
        return Err(Error::InvalidMatrix("A must be row stochastic".into()));
    }
    Ok((matrix.apply(x)?, matrix.left_apply(b)?))
}

/// Default tolerance for [`WeightedPair::verified`].
pub const PAIR_TOL: f64 = 1e-10;

/// A source `(x, a)` and target `(y, b)` in weighted majorization.
///
/// Construct through [`WeightedPair::verified`] or [`WeightedPair::generate`];
/// [`WeightedPair::assume`] skips the check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPair {
    source: WeightedVector,
    target: WeightedVector,
    matrix: Option<StochasticMatrix>,
    check: Option<WeightedCheck>,
}

impl WeightedPair {
    pub fn verified(
        source: WeightedVector,
        target: WeightedVector,
        matrix: StochasticMatrix,
        tol: f64,
    ) -> Result<Self> {
        let check = verify_weighted_majorization(&source, &target, &matrix, tol)?;
        if !check.passed {
            return Err(Error::MajorizationNotVerified {
                weight_residual: check.weight_residual,
                point_residual: check.point_residual,
            });
        }
        Ok(Self {
            source,
            target,
            matrix: Some(matrix),
            check: Some(check),
        })
    }

    /// Builds `(y, a)` from `x`, `b`, and `A`.
    pub fn generate(x: Vec<f64>, b: Vec<f64>, matrix: StochasticMatrix) -> Result<Self> {
        let (y, a) = generate_weighted_pair(&x, &b, &matrix)?;
        let source = WeightedVector::new(x, a)?;
        let target = WeightedVector::new(y, b)?;
        Self::verified(source, target, matrix, 1e-12)
    }

    /// Caller vouches for the relation; no matrix is checked.
    pub fn assume(source: WeightedVector, target: WeightedVector) -> Self {
        Self {
            source,
            target,
            matrix: None,
            check: None,
        }
    }

    pub fn source(&self) -> &WeightedVector {
        &self.source
    }

    pub fn target(&self) -> &WeightedVector {
        &self.target
    }

    pub fn matrix(&self) -> Option<&StochasticMatrix> {
        self.matrix.as_ref()
    }

    pub fn check(&self) -> Option<&WeightedCheck> {
        self.check.as_ref()
    }

    pub fn is_verified(&self) -> bool {
        self.check.is_some()
    }

    /// Smallest interval containing every point of both vectors.
    pub fn hull(&self) -> Result<Interval> {
        let all = self.source.points().iter().chain(self.target.points());
        let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    /// Reorders the source jointly with the columns of `A`.
    pub fn permute_source(&self, order: &[usize]) -> Result<Self> {
        Ok(Self {
            source: self.source.permuted(order),
            target: self.target.clone(),
            matrix: self
                .matrix
                .as_ref()
                .map(|m| m.permute_columns(order))
                .transpose()?,
            check: self.check,
        })
    }
}
