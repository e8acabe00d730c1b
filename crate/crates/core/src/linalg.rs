//! Dense complex linear algebra on finite operator truncations.
//!
//! Singular values and eigenvalues are delegated to LAPACK through
//! `ndarray-linalg`. Before the nonsymmetric eigensolve, rows and columns that
//! are decoupled from the rest of the matrix are peeled off by symmetric
//! permutation (the isolation step of LAPACK's `gebal`), which makes triangular
//! and block-triangular models exact and keeps large structured models cheap.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::{Eig, EigVals, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

/// How an operator model was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Diagonal,
    RandomSvd,
    Sum,
    WeakPerturbation,
    DiskRestriction,
    Nystrom1d,
    /// Built directly from caller-supplied entries.
    Explicit,
}

/// A finite square truncation of a compact operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorModel {
    entries: Array2<C64>,
    label: String,
    construction: Construction,
}

impl OperatorModel {
    /// Wraps `entries`, rejecting non-square, empty or non-finite matrices.
    pub fn new(entries: Array2<C64>, label: impl Into<String>, construction: Construction) -> Result<Self> {
        validate_entries(entries.view())?;
        Ok(Self { entries, label: label.into(), construction })
    }

    /// Real-valued convenience constructor.
    pub fn from_real(entries: Array2<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(entries.mapv(|x| C64::new(x, 0.0)), label, Construction::Explicit)
    }

    pub fn diagonal(values: &[f64], label: impl Into<String>) -> Result<Self> {
        let n = values.len();
        let mut m = Array2::zeros((n, n));
        for (i, &v) in values.iter().enumerate() {
            m[[i, i]] = C64::new(v, 0.0);
        }
        Self::new(m, label, Construction::Diagonal)
    }

    pub fn zeros(dim: usize, label: impl Into<String>) -> Result<Self> {
        Self::new(Array2::zeros((dim, dim)), label, Construction::Explicit)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn with_construction(mut self, construction: Construction) -> Self {
        self.construction = construction;
        self
    }

    /// Conjugate transpose A*.
    pub fn adjoint(&self) -> Self {
        Self {
            entries: conj_transpose(&self.entries),
            label: format!("{}*", self.label),
            construction: self.construction,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[[i, j]] == C64::new(0.0, 0.0)))
    }

    /// Largest entrywise modulus of A − A*.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[[i, j]] - self.entries[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn validate_entries(m: ArrayView2<C64>) -> Result<()> {
    let (r, c) = m.dim();
    if r != c {
        return Err(LabError::InvalidOperator(format!("matrix is {r}x{c}, expected square")));
    }
    if r == 0 {
        return Err(LabError::InvalidOperator("dimension must be at least 1".into()));
    }
    if let Some(((i, j), _)) = m.indexed_iter().find(|(_, z)| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(LabError::InvalidOperator(format!("non-finite entry at ({i}, {j})")));
    }
    Ok(())
}

pub(crate) fn conj_transpose(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Singular values s_1 ≥ s_2 ≥ … ≥ 0 of an operator truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SNumbers(Vec<f64>);

impl SNumbers {
    /// Accepts any nonnegative finite values; sorts them nonincreasing.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(LabError::InvalidParameter(format!("s-number {v} is negative or non-finite")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based access, s_n.
    pub fn s(&self, n: usize) -> f64 {
        self.0[n - 1]
    }

    pub fn largest(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    /// Returns c·s.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_unsorted(self.0.iter().map(|v| v * c).collect())
    }
}

/// T = T_R + i·T_J with both components Hermitian.
#[derive(Debug, Clone)]
pub struct HermitianSplit {
    pub real_part: OperatorModel,
    pub imag_part: OperatorModel,
}

impl HermitianSplit {
    /// T_R + i·T_J.
    pub fn recombine(&self) -> Array2<C64> {
        let i = C64::new(0.0, 1.0);
        self.real_part.entries() + &self.imag_part.entries().mapv(|z| z * i)
    }
}

/// Singular values of `a`, sorted nonincreasing.
pub fn s_numbers(a: &OperatorModel) -> Result<SNumbers> {
    if a.is_diagonal() {
        let d = a.entries().diag().iter().map(|z| z.norm()).collect();
        return SNumbers::from_unsorted(d);
    }
    let (_, s, _) = a.entries().svd(false, false)?;
    SNumbers::from_unsorted(s.to_vec())
}

/// Splits the index set into eigenvalues isolated by symmetric permutation and
/// the remaining coupled core.
///
/// An index whose row (or column) has no nonzero off-diagonal entry inside the
/// active submatrix contributes its diagonal entry as an exact eigenvalue and is
/// removed; removal can uncover further isolated indices. Runs in O(N²).
fn isolate(a: &Array2<C64>) -> (Vec<C64>, Vec<usize>) {
    let n = a.nrows();
    let zero = C64::new(0.0, 0.0);
    let mut row_nnz = vec![0usize; n];
    let mut col_nnz = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && a[[i, j]] != zero {
                row_nnz[i] += 1;
                col_nnz[j] += 1;
            }
        }
    }
    let mut active = vec![true; n];
    let mut stack: Vec<usize> = (0..n).filter(|&k| row_nnz[k] == 0 || col_nnz[k] == 0).collect();
    let mut isolated = Vec::new();
    while let Some(k) = stack.pop() {
        if !active[k] {
            continue;
        }
        active[k] = false;
        isolated.push(a[[k, k]]);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            if a[[i, k]] != zero {
                row_nnz[i] -= 1;
                if row_nnz[i] == 0 {
                    stack.push(i);
                }
            }
            if a[[k, i]] != zero {
                col_nnz[i] -= 1;
                if col_nnz[i] == 0 {
                    stack.push(i);
                }
            }
        }
    }
    let core = (0..n).filter(|&k| active[k]).collect();
    (isolated, core)
}

/// All N eigenvalues with multiplicity, in no particular order.
pub fn eigenvalues(a: &OperatorModel) -> Result<Vec<C64>> {
    let (mut values, core) = isolate(a.entries());
    if !core.is_empty() {
        let m = core.len();
        let sub = Array2::from_shape_fn((m, m), |(i, j)| a.entries()[[core[i], core[j]]]);
        let ev: Array1<C64> = sub.eigvals()?;
        values.extend(ev.iter().copied());
    }
    Ok(values)
}

/// Eigenvalues with right eigenvectors (columns), from a full dense solve.
pub fn eigen_pairs(a: &OperatorModel) -> Result<(Vec<C64>, Array2<C64>)> {
    let (vals, vecs) = a.entries().eig()?;
    Ok((vals.to_vec(), vecs))
}

/// max |λ| over the spectrum.
pub fn spectral_radius(a: &OperatorModel) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// (Σ s_j^p)^(1/p) over the truncation.
pub fn schatten_norm(a: &OperatorModel, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(LabError::InvalidParameter(format!("Schatten exponent p = {p} must be positive")));
    }
    Ok(schatten_of(&s_numbers(a)?, p))
}

/// Schatten p-norm of a given s-number sequence.
pub fn schatten_of(s: &SNumbers, p: f64) -> f64 {
    let top = s.largest();
    if top == 0.0 {
        return 0.0;
    }
    // scale by s_1 so large p does not overflow
    let sum: f64 = s.values().iter().map(|v| (v / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}

/// T_R = (T+T*)/2, T_J = (T−T*)/(2i).
pub fn hermitian_split(t: &OperatorModel) -> Result<HermitianSplit> {
    let m = t.entries();
    let adj = conj_transpose(m);
    let n = t.dim();
    let mut re = Array2::zeros((n, n));
    let mut im = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            re[[i, j]] = (m[[i, j]] + adj[[i, j]]) * 0.5;
            // (z − w)/(2i) = −i(z − w)/2
            im[[i, j]] = (m[[i, j]] - adj[[i, j]]) * C64::new(0.0, -0.5);
        }
    }
    Ok(HermitianSplit {
        real_part: OperatorModel::new(re, format!("Re({})", t.label()), Construction::Explicit)?,
        imag_part: OperatorModel::new(im, format!("Im({})", t.label()), Construction::Explicit)?,
    })
}

/// Eigenvalue of largest modulus; ties broken toward larger real part, then imaginary part.
pub fn leading_eigenvalue(values: &[C64]) -> C64 {
    values
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im)))
        .unwrap_or(C64::new(0.0, 0.0))
}

/// The `k` eigenvalues of largest modulus, descending.
pub fn top_eigenvalues(values: &[C64], k: usize) -> Vec<C64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im)));
    v.truncate(k);
    v
}

/// Largest distance in a greedy nearest-neighbour matching between two
/// eigenvalue multisets of equal size; `None` when the sizes differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    // match large eigenvalues first; they are the best conditioned
    order.sort_by(|&i, &j| a[j].norm().total_cmp(&a[i].norm()));
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for i in order {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (j, w) in b.iter().enumerate() {
            if !used[j] {
                let d = (a[i] - w).norm();
                if d < best_d {
                    best_d = d;
                    best = Some(j);
                }
            }
        }
        if let Some(j) = best {
            used[j] = true;
            worst = worst.max(best_d);
        }
    }
    Some(worst)
}
