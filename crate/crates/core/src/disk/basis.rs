//! Truncated Fourier–Bessel eigenbasis of the Dirichlet Laplacian on the unit disk.
//!
//! Orthonormal modes are e_{n,k} = J_|n|(j_{|n|,k} r) e^{inφ} / (√π |J_{|n|+1}(j_{|n|,k})|)
//! with eigenvalues j_{|n|,k}².

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::bessel::{bessel_zeros, pair};
use crate::error::{LabError, Result};
use crate::linalg::{Construction, OperatorModel, C64};
use crate::par;

/// Fourier–Bessel mode label (n, k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiskModeIndex {
    pub n: i32,
    pub k: u32,
}

impl DiskModeIndex {
    pub fn new(n: i32, k: u32) -> Self {
        assert!(k >= 1, "radial index starts at 1");
        Self { n, k }
    }
}

/// Harmonic mode r^|n| e^{inφ}, an element of the kernel of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HarmonicModeIndex(pub i32);

impl HarmonicModeIndex {
    /// L₂(disk) norm of r^|n| e^{inφ}: √(π/(|n|+1)).
    pub fn norm(&self) -> f64 {
        (std::f64::consts::PI / (self.0.unsigned_abs() as f64 + 1.0)).sqrt()
    }
}

/// Bessel zeros j_{n,k} for n ≤ n_max, k ≤ k_max.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZeroTable {
    entries: BTreeMap<(u32, u32), f64>,
}

/// Relative agreement required when spot-checking a cached table.
const CACHE_SPOT_TOL: f64 = 1e-10;

impl ZeroTable {
    pub fn compute(n_max: u32, k_max: u32) -> Result<Self> {
        let orders: Vec<u32> = (0..=n_max).collect();
        let rows = par::map(&orders, |&n| bessel_zeros(n, k_max));
        let mut entries = BTreeMap::new();
        for (n, row) in orders.into_iter().zip(rows) {
            for (k, z) in row?.into_iter().enumerate() {
                entries.insert((n, k as u32 + 1), z);
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, n: u32, k: u32) -> Option<f64> {
        self.entries.get(&(n, k)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn covers(&self, n_max: u32, k_max: u32) -> bool {
        (0..=n_max).all(|n| self.entries.contains_key(&(n, k_max)) && self.entries.contains_key(&(n, 1)))
    }

    /// Text table, one `n k value` triple per line, 17 significant digits so that
    /// values read back bit-identical.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (&(n, k), v) in &self.entries {
            let _ = writeln!(out, "{n} {k} {v:.16e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || LabError::InvalidParameter(format!("zero cache line {}: {line:?}", lineno + 1));
            let mut it = line.split_whitespace();
            let n: u32 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let k: u32 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let v: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() || k == 0 || !v.is_finite() {
                return Err(bad());
            }
            entries.insert((n, k), v);
        }
        Ok(Self { entries })
    }

    /// Recomputes the first, middle and last entries and compares.
    pub fn spot_check(&self) -> bool {
        if self.entries.is_empty() {
            return false;
        }
        let keys: Vec<_> = self.entries.keys().copied().collect();
        [0, keys.len() / 2, keys.len() - 1].iter().all(|&i| {
            let (n, k) = keys[i];
            match super::bessel::bessel_zero(n, k) {
                Ok(z) => (z - self.entries[&(n, k)]).abs() <= CACHE_SPOT_TOL * z.max(1.0),
                Err(_) => false,
            }
        })
    }

    /// Loads `path` when it exists, passes the spot check and covers the
    /// request; otherwise computes the table and tries to write it back.
    /// The cache never changes results, only timing.
    pub fn load_or_compute(path: &Path, n_max: u32, k_max: u32) -> Result<Self> {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Ok(table) = Self::parse(&text) {
                if table.covers(n_max, k_max) && table.spot_check() {
                    return Ok(table);
                }
            }
        }
        let table = Self::compute(n_max, k_max)?;
        let _ = std::fs::write(path, table.to_text());
        Ok(table)
    }
}

/// Modes with |n| ≤ n_max, 1 ≤ k ≤ k_max, sorted by eigenvalue ascending.
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    n_max: u32,
    k_max: u32,
    modes: Vec<DiskModeIndex>,
    zeros: Vec<f64>,
    /// J_{|n|+1}(j_{|n|,k}) for each mode.
    next_order: Vec<f64>,
    index: HashMap<DiskModeIndex, usize>,
}

impl TruncatedBasis {
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[DiskModeIndex] {
        &self.modes
    }

    /// λ_{n,k} = j_{|n|,k}² in basis order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.zeros.iter().map(|j| j * j).collect()
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn index_of(&self, mode: DiskModeIndex) -> Option<usize> {
        self.index.get(&mode).copied()
    }
}

pub fn build_basis(n_max: u32, k_max: u32) -> Result<TruncatedBasis> {
    basis_from_table(&ZeroTable::compute(n_max, k_max)?, n_max, k_max)
}

/// Like [`build_basis`], reading and refreshing an on-disk zero cache.
pub fn build_basis_cached(n_max: u32, k_max: u32, cache: Option<&Path>) -> Result<TruncatedBasis> {
    match cache {
        Some(p) => basis_from_table(&ZeroTable::load_or_compute(p, n_max, k_max)?, n_max, k_max),
        None => build_basis(n_max, k_max),
    }
}

pub fn basis_from_table(table: &ZeroTable, n_max: u32, k_max: u32) -> Result<TruncatedBasis> {
    if k_max == 0 {
        return Err(LabError::InvalidParameter("k_max must be at least 1".into()));
    }
    let mut raw: Vec<(f64, DiskModeIndex)> = Vec::with_capacity(((2 * n_max + 1) * k_max) as usize);
    for n in 0..=n_max {
        for k in 1..=k_max {
            let z = table.get(n, k).ok_or_else(|| LabError::OutOfBasis(format!("zero table lacks j_({n},{k})")))?;
            raw.push((z, DiskModeIndex::new(n as i32, k)));
            if n > 0 {
                raw.push((z, DiskModeIndex::new(-(n as i32), k)));
            }
        }
    }
    raw.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.n.unsigned_abs().cmp(&b.1.n.unsigned_abs()))
            .then(a.1.n.cmp(&b.1.n))
            .then(a.1.k.cmp(&b.1.k))
    });
    let zeros: Vec<f64> = raw.iter().map(|r| r.0).collect();
    let modes: Vec<DiskModeIndex> = raw.iter().map(|r| r.1).collect();
    let next_order = par::map(&raw, |(z, m)| pair(m.n.unsigned_abs(), *z).1);
    let index = modes.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    Ok(TruncatedBasis { n_max, k_max, modes, zeros, next_order, index })
}

/// L_D⁻¹ in the basis: diag(1/λ_{n,k}).
pub fn inverse_dirichlet(basis: &TruncatedBasis) -> Result<OperatorModel> {
    let inv: Vec<f64> = basis.zeros.iter().map(|j| 1.0 / (j * j)).collect();
    Ok(OperatorModel::diagonal(&inv, format!("L_D^-1[{}x{}]", basis.n_max, basis.k_max))?
        .with_construction(Construction::Diagonal))
}

/// Coefficients ⟨h_n, e_{m,k}⟩ of the normalized harmonic mode h_n against
/// every basis mode.
///
/// Only modes with m = n contribute; with ∫₀¹ r^{|n|+1} J_|n|(j r) dr = J_{|n|+1}(j)/j
/// the coefficient is 2√(|n|+1)·sign(J_{|n|+1}(j))/j.
pub fn harmonic_inner_products(basis: &TruncatedBasis, mode: HarmonicModeIndex) -> Result<Vec<f64>> {
    if mode.0.unsigned_abs() > basis.n_max {
        return Err(LabError::OutOfBasis(format!("harmonic order {} exceeds n_max = {}", mode.0, basis.n_max)));
    }
    let scale = 2.0 * (mode.0.unsigned_abs() as f64 + 1.0).sqrt();
    Ok(basis
        .modes
        .iter()
        .zip(&basis.zeros)
        .zip(&basis.next_order)
        .map(|((m, j), jn1)| if m.n == mode.0 { scale * jn1.signum() / j } else { 0.0 })
        .collect())
}

/// One term s·(·, Q)F of a finite Schmidt expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtTerm {
    pub s: f64,
    /// Coordinates of Q over `SchmidtSpec::source_modes`.
    pub q: Vec<C64>,
    /// Coordinates of F over the normalized harmonic modes `SchmidtSpec::image_modes`.
    pub f: Vec<C64>,
}

/// Finite-rank K = Σ s_j (·, Q_j) F_j with range in the harmonic kernel.
///
/// Q_j are expressed over a fixed list of Fourier–Bessel modes, so the same
/// spec assembles consistently into every basis that contains those modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpec {
    pub source_modes: Vec<DiskModeIndex>,
    pub image_modes: Vec<HarmonicModeIndex>,
    pub terms: Vec<SchmidtTerm>,
}

/// Orthonormality tolerance enforced at assembly.
pub const SCHMIDT_ORTHONORMAL_TOL: f64 = 1e-8;

fn gram_defect(vectors: &[&[C64]]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate() {
            let ip: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((ip - target).norm());
        }
    }
    worst
}

impl SchmidtSpec {
    pub fn empty() -> Self {
        Self { source_modes: Vec::new(), image_modes: Vec::new(), terms: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// Checks shapes, s_j ≥ 0 nonincreasing, and orthonormality of {Q_j}, {F_j}.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidSchmidtSpec(m));
        for (j, t) in self.terms.iter().enumerate() {
            if t.q.len() != self.source_modes.len() {
                return Err(LabError::DimMismatch { left: t.q.len(), right: self.source_modes.len() });
            }
            if t.f.len() != self.image_modes.len() {
                return Err(LabError::DimMismatch { left: t.f.len(), right: self.image_modes.len() });
            }
            if !(t.s >= 0.0) || !t.s.is_finite() {
                return bad(format!("s_{} = {} is not a nonnegative number", j + 1, t.s));
            }
            if j > 0 && t.s > self.terms[j - 1].s {
                return bad(format!("s_{} exceeds s_{}", j + 1, j));
            }
        }
        let q: Vec<&[C64]> = self.terms.iter().map(|t| t.q.as_slice()).collect();
        let f: Vec<&[C64]> = self.terms.iter().map(|t| t.f.as_slice()).collect();
        let (dq, df) = (gram_defect(&q), gram_defect(&f));
        if dq > tol {
            return bad(format!("Q system deviates from orthonormal by {dq:e}"));
        }
        if df > tol {
            return bad(format!("F system deviates from orthonormal by {df:e}"));
        }
        Ok(())
    }

    /// Random spec with Haar-orthonormal Q and F systems over the given modes.
    pub fn random(
        s_values: &[f64],
        source_modes: Vec<DiskModeIndex>,
        image_modes: Vec<HarmonicModeIndex>,
        seed: u64,
    ) -> Result<Self> {
        use rand::SeedableRng;
        let rank = s_values.len();
        if rank > source_modes.len() || rank > image_modes.len() {
            return Err(LabError::InvalidSchmidtSpec(format!(
                "rank {rank} exceeds {} source / {} image modes",
                source_modes.len(),
                image_modes.len()
            )));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let uq = crate::gallery::haar_unitary(&mut rng, source_modes.len())?;
        let uf = crate::gallery::haar_unitary(&mut rng, image_modes.len())?;
        let terms = s_values
            .iter()
            .enumerate()
            .map(|(j, &s)| SchmidtTerm { s, q: uq.column(j).to_vec(), f: uf.column(j).to_vec() })
            .collect();
        Ok(Self { source_modes, image_modes, terms })
    }
}

/// Matrix of K = Σ s_j F_j Q_j* in basis coordinates.
pub fn schmidt_operator(basis: &TruncatedBasis, spec: &SchmidtSpec) -> Result<Array2<C64>> {
    spec.validate(SCHMIDT_ORTHONORMAL_TOL)?;
    let dim = basis.dim();
    let mut src = Vec::with_capacity(spec.source_modes.len());
    for m in &spec.source_modes {
        src.push(basis.index_of(*m).ok_or_else(|| {
            LabError::OutOfBasis(format!(
                "source mode ({}, {}) not in the {}x{} basis",
                m.n, m.k, basis.n_max, basis.k_max
            ))
        })?);
    }
    let harmonics: Vec<Vec<f64>> =
        spec.image_modes.iter().map(|h| harmonic_inner_products(basis, *h)).collect::<Result<_>>()?;
    let mut k = Array2::<C64>::zeros((dim, dim));
    for t in &spec.terms {
        let mut image = vec![C64::new(0.0, 0.0); dim];
        for (coef, h) in t.f.iter().zip(&harmonics) {
            for (slot, hv) in image.iter_mut().zip(h) {
                *slot += coef * hv;
            }
        }
        for (qi, &col) in t.q.iter().zip(&src) {
            let w = qi.conj() * t.s;
            for (row, fv) in image.iter().enumerate() {
                k[[row, col]] += fv * w;
            }
        }
    }
    Ok(k)
}

/// L_K⁻¹ = L_D⁻¹ + K in basis coordinates.
pub fn assemble_restriction(basis: &TruncatedBasis, spec: &SchmidtSpec) -> Result<OperatorModel> {
    let mut m = schmidt_operator(basis, spec)?;
    for (i, j) in basis.zeros.iter().enumerate() {
        m[[i, i]] += C64::new(1.0 / (j * j), 0.0);
    }
    OperatorModel::new(
        m,
        format!("L_K^-1[{}x{}, rank {}]", basis.n_max, basis.k_max, spec.rank()),
        Construction::DiskRestriction,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::bessel::bessel_j;
    use crate::linalg::s_numbers;

    #[test]
    fn single_family_basis() {
        let b = build_basis(0, 1).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.modes()[0], DiskModeIndex::new(0, 1));
        assert!((b.eigenvalues()[0] - 5.783185962947).abs() < 1e-10);
    }

    #[test]
    fn counts_and_order() {
        for (n, k) in [(0, 5), (3, 4), (6, 10)] {
            let b = build_basis(n, k).unwrap();
            assert_eq!(b.dim(), ((2 * n + 1) * k) as usize);
            let ev = b.eigenvalues();
            assert!(ev.windows(2).all(|w| w[0] <= w[1]));
            assert!(ev.iter().all(|v| v.is_finite() && *v > 0.0));
        }
        assert!(build_basis(2, 0).is_err());
    }

    #[test]
    fn inverse_dirichlet_is_positive_diagonal() {
        let b = build_basis(4, 4).unwrap();
        let d = inverse_dirichlet(&b).unwrap();
        assert!(d.is_diagonal());
        assert_eq!(d.entries(), d.adjoint().entries());
        assert!(d.entries().diag().iter().all(|z| z.re > 0.0 && z.im == 0.0));
        let s1 = s_numbers(&d).unwrap().largest();
        assert!((s1 - 1.0 / 2.404825557695773f64.powi(2)).abs() < 1e-12);
        assert!((s1 - 0.172915).abs() < 1e-6);
    }

    #[test]
    fn harmonic_coefficients_selection_and_parseval() {
        let b = build_basis(3, 200).unwrap();
        for n in -3..=3 {
            let c = harmonic_inner_products(&b, HarmonicModeIndex(n)).unwrap();
            for (m, v) in b.modes().iter().zip(&c) {
                if m.n != n {
                    assert_eq!(*v, 0.0);
                }
            }
            let total: f64 = c.iter().map(|v| v * v).sum();
            // Σ 1/j_{n,k}² = 1/(4(n+1)), tail after K terms ~ 1/(π²K)
            assert!(total <= 1.0 && total > 1.0 - 0.01, "n={n} total={total}");
        }
        let small = build_basis(3, 20).unwrap();
        let t_small: f64 = harmonic_inner_products(&small, HarmonicModeIndex(1)).unwrap().iter().map(|v| v * v).sum();
        let t_big: f64 = harmonic_inner_products(&b, HarmonicModeIndex(1)).unwrap().iter().map(|v| v * v).sum();
        assert!(t_small < t_big);
        assert!(matches!(harmonic_inner_products(&small, HarmonicModeIndex(4)), Err(LabError::OutOfBasis(_))));
    }

    /// Adaptive Simpson quadrature, used only as an oracle.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
    }

    #[test]
    fn harmonic_coefficients_match_quadrature() {
        let b = build_basis(2, 6).unwrap();
        for n in 0..=2i32 {
            let c = harmonic_inner_products(&b, HarmonicModeIndex(n)).unwrap();
            for (i, m) in b.modes().iter().enumerate() {
                if m.n != n {
                    continue;
                }
                let j = b.zeros()[i];
                let nu = n as u32;
                let radial = simpson(&|r| r.powi(n + 1) * bessel_j(nu, j * r).unwrap(), 0.0, 1.0, 1e-13);
                // ⟨h, e⟩ = 2π·radial / (‖r^n e^{inφ}‖ · √π |J_{n+1}(j)|)
                let norm_e = std::f64::consts::PI.sqrt() * bessel_j(nu + 1, j).unwrap().abs();
                let oracle = 2.0 * std::f64::consts::PI * radial / (HarmonicModeIndex(n).norm() * norm_e);
                assert!((c[i] - oracle).abs() < 1e-8, "n={n} k={} {} vs {}", m.k, c[i], oracle);
            }
        }
    }

    fn low_modes(nmax: i32, kmax: u32) -> Vec<DiskModeIndex> {
        (-nmax..=nmax).flat_map(|n| (1..=kmax).map(move |k| DiskModeIndex::new(n, k))).collect()
    }

    #[test]
    fn trivial_restrictions_equal_inverse_dirichlet() {
        let b = build_basis(3, 5).unwrap();
        let d = inverse_dirichlet(&b).unwrap();
        let empty = assemble_restriction(&b, &SchmidtSpec::empty()).unwrap();
        assert_eq!(empty.entries(), d.entries());
        assert_eq!(empty.construction(), Construction::DiskRestriction);
        let zero_s = SchmidtSpec::random(&[0.0], low_modes(1, 2), vec![HarmonicModeIndex(0)], 1).unwrap();
        assert_eq!(assemble_restriction(&b, &zero_s).unwrap().entries(), d.entries());
    }

    #[test]
    fn perturbation_has_rank_j_and_harmonic_range() {
        let b = build_basis(4, 8).unwrap();
        let harmonics: Vec<HarmonicModeIndex> = (-2..=2).map(HarmonicModeIndex).collect();
        let spec = SchmidtSpec::random(&[0.05, 0.03, 0.01], low_modes(2, 3), harmonics.clone(), 11).unwrap();
        let l = assemble_restriction(&b, &spec).unwrap();
        let diff = l.entries() - inverse_dirichlet(&b).unwrap().entries();
        let diff = OperatorModel::new(diff, "K", Construction::Explicit).unwrap();
        let s = s_numbers(&diff).unwrap();
        let rank = s.values().iter().filter(|v| **v > 1e-10).count();
        assert_eq!(rank, 3);

        // every column of K lies in the span of the expanded harmonic modes
        let basis_vecs: Vec<Vec<f64>> = harmonics.iter().map(|h| harmonic_inner_products(&b, *h).unwrap()).collect();
        for col in 0..b.dim() {
            let c: Vec<C64> = diff.entries().column(col).to_vec();
            let mut residual = c.clone();
            // expanded harmonics have disjoint supports, so projection is per vector
            for h in &basis_vecs {
                let hh: f64 = h.iter().map(|v| v * v).sum();
                let coef: C64 = h.iter().zip(&c).map(|(a, z)| z * a).sum::<C64>() / hh;
                for (r, a) in residual.iter_mut().zip(h) {
                    *r -= coef * a;
                }
            }
            let rn = residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(rn < 1e-10);
        }
    }

    #[test]
    fn restriction_errors() {
        let b = build_basis(2, 3).unwrap();
        let out = SchmidtSpec::random(&[0.1], vec![DiskModeIndex::new(0, 9)], vec![HarmonicModeIndex(0)], 2).unwrap();
        assert!(matches!(assemble_restriction(&b, &out), Err(LabError::OutOfBasis(_))));
        let far = SchmidtSpec::random(&[0.1], low_modes(1, 1), vec![HarmonicModeIndex(5)], 2).unwrap();
        assert!(matches!(assemble_restriction(&b, &far), Err(LabError::OutOfBasis(_))));
        let mut skew =
            SchmidtSpec::random(&[0.1, 0.05], low_modes(1, 2), (-1..=1).map(HarmonicModeIndex).collect(), 3).unwrap();
        skew.terms[1].q = skew.terms[0].q.clone();
        assert!(matches!(assemble_restriction(&b, &skew), Err(LabError::InvalidSchmidtSpec(_))));
        let mut short = SchmidtSpec::random(&[0.1], low_modes(1, 2), vec![HarmonicModeIndex(0)], 3).unwrap();
        short.terms[0].q.pop();
        assert!(matches!(assemble_restriction(&b, &short), Err(LabError::DimMismatch { .. })));
        let mut rising =
            SchmidtSpec::random(&[0.1, 0.05], low_modes(1, 2), (-1..=1).map(HarmonicModeIndex).collect(), 3).unwrap();
        rising.terms[1].s = 0.2;
        assert!(matches!(assemble_restriction(&b, &rising), Err(LabError::InvalidSchmidtSpec(_))));
    }

    #[test]
    fn zero_cache_round_trip_and_spot_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.txt");
        let t = ZeroTable::load_or_compute(&path, 3, 4).unwrap();
        assert!(path.exists());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 16);
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("0 1 2.40482555769577"), "{first}");
        // cached values read back bit-identical
        assert_eq!(ZeroTable::parse(&text).unwrap(), t);
        // a corrupted cache fails the spot check and is recomputed
        let value = first.split(' ').nth(2).unwrap();
        std::fs::write(&path, text.replace(value, "2.5e0")).unwrap();
        assert!(!ZeroTable::parse(&std::fs::read_to_string(&path).unwrap()).unwrap().spot_check());
        let fixed = build_basis_cached(3, 4, Some(&path)).unwrap();
        assert!((fixed.zeros()[0] - 2.404825557695773).abs() < 1e-12);
        assert!(ZeroTable::parse("0 1").is_err());
    }
}
