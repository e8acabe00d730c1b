//! Volterra verdicts: persistence of nonzero eigenvalues under refinement, the
//! one-dimensional Volterra counterexample, and the divergence obstruction for
//! Volterra restrictions of the disk Laplacian.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::asymptotics::fit_line;
use crate::error::{LabError, Result};
use crate::linalg::{eigenvalues, leading_eigenvalue, multiset_distance, Construction, OperatorModel, C64};
use crate::par;
use crate::quadrature::gauss_legendre_unit;

/// Largest relative change of the leading eigenvalue modulus between the last
/// two refinements for a verdict to count as persistent.
pub const PERSISTENCE_DRIFT: f64 = 0.10;
/// Default persistence floor as a fraction of the leading profile coefficient.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.05;

/// Spectral data of one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub dim: usize,
    pub spectral_radius: f64,
    pub leading: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraVerdict {
    pub refinements: Vec<Refinement>,
    pub persistent_nonzero: bool,
    pub delta: f64,
}

impl VolterraVerdict {
    /// Relative change of |leading eigenvalue| across the last two levels.
    pub fn final_drift(&self) -> f64 {
        let n = self.refinements.len();
        if n < 2 {
            return 0.0;
        }
        let a = self.refinements[n - 2].leading.norm();
        let b = self.refinements[n - 1].leading.norm();
        let scale = a.max(b);
        if scale == 0.0 {
            0.0
        } else {
            (a - b).abs() / scale
        }
    }

    /// Applies the persistence rule to refinements ordered by increasing dimension.
    pub fn from_refinements(refinements: Vec<Refinement>, delta: f64) -> Self {
        let mut v = Self { refinements, persistent_nonzero: false, delta };
        let floor_ok = v.refinements.iter().all(|r| r.spectral_radius >= delta);
        v.persistent_nonzero = floor_ok && v.final_drift() < PERSISTENCE_DRIFT;
        v
    }
}

/// A built operator together with its full spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumSample {
    pub operator: OperatorModel,
    pub eigenvalues: Vec<C64>,
}

impl SpectrumSample {
    pub fn compute(operator: OperatorModel) -> Result<Self> {
        let dim = operator.dim();
        let eigenvalues = eigenvalues(&operator).map_err(|e| LabError::AtDimension { dim, source: Box::new(e) })?;
        Ok(Self { operator, eigenvalues })
    }

    pub fn refinement(&self) -> Refinement {
        let leading = leading_eigenvalue(&self.eigenvalues);
        Refinement { dim: self.operator.dim(), spectral_radius: leading.norm(), leading }
    }
}

/// Builds the family at each level, solves for the spectrum and applies the
/// persistence rule. Levels are processed in parallel; results keep level order.
pub fn verdict_over_levels<L, F>(levels: &[L], builder: F, delta: f64) -> Result<(VolterraVerdict, Vec<SpectrumSample>)>
where
    L: Sync,
    F: Fn(&L) -> Result<OperatorModel> + Sync + Send,
{
    if levels.len() < 3 {
        return Err(LabError::InvalidParameter(format!("need at least 3 refinement levels, got {}", levels.len())));
    }
    if !(delta > 0.0) {
        return Err(LabError::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let samples: Vec<SpectrumSample> =
        par::map(levels, |l| SpectrumSample::compute(builder(l)?)).into_iter().collect::<Result<_>>()?;
    if samples.windows(2).any(|w| w[1].operator.dim() <= w[0].operator.dim()) {
        return Err(LabError::InvalidParameter("refinement dimensions must increase strictly".into()));
    }
    let refinements = samples.iter().map(SpectrumSample::refinement).collect();
    Ok((VolterraVerdict::from_refinements(refinements, delta), samples))
}

/// Verdict for a family indexed by matrix dimension.
pub fn nonvolterra_verdict<F>(builder: F, dims: &[usize], delta: f64) -> Result<VolterraVerdict>
where
    F: Fn(usize) -> Result<OperatorModel> + Sync + Send,
{
    if dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidParameter("dims must increase strictly".into()));
    }
    Ok(verdict_over_levels(dims, |&n| builder(n), delta)?.0)
}

/// Verdict recomputed from already-solved samples of the adjoint family.
pub fn adjoint_verdict(samples: &[SpectrumSample], delta: f64) -> Result<(VolterraVerdict, f64)> {
    let mut worst = 0.0_f64;
    let mut refinements = Vec::with_capacity(samples.len());
    for s in samples {
        let adj = SpectrumSample::compute(s.operator.adjoint())?;
        worst = worst.max(adjoint_mismatch(&s.eigenvalues, &adj.eigenvalues)?);
        refinements.push(adj.refinement());
    }
    Ok((VolterraVerdict::from_refinements(refinements, delta), worst))
}

/// Matching distance between conj(σ(A)) and σ(A*).
pub fn adjoint_mismatch(spectrum: &[C64], adjoint_spectrum: &[C64]) -> Result<f64> {
    let conj: Vec<C64> = spectrum.iter().map(|z| z.conj()).collect();
    multiset_distance(&conj, adjoint_spectrum)
        .ok_or(LabError::DimMismatch { left: spectrum.len(), right: adjoint_spectrum.len() })
}

/// Nyström matrix of (Vf)(r) = ∫₀^r ln(t/r) f(t) t dt on L₂(r; 0, 1).
///
/// Gauss–Legendre nodes r_i with weights w_i on (0, 1); coordinates are scaled
/// by √(r_i w_i) so the matrix acts in an orthonormal frame. The kernel is kept
/// only for t_j < r_i, which makes the matrix strictly lower triangular.
pub fn one_d_volterra_matrix(n: usize) -> Result<OperatorModel> {
    if n < 8 {
        return Err(LabError::InvalidParameter(format!("quadrature size {n} must be at least 8")));
    }
    let (r, w) = gauss_legendre_unit(n)?;
    let scale: Vec<f64> = r.iter().zip(&w).map(|(ri, wi)| (ri * wi).sqrt()).collect();
    let m = Array2::from_shape_fn((n, n), |(i, j)| {
        if j < i {
            C64::new(scale[i] * (r[j] / r[i]).ln() * scale[j], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    OperatorModel::new(m, format!("V1d[{n}]"), Construction::Nystrom1d)
}

/// Quadrature nodes and frame scales √(r_i w_i) used by [`one_d_volterra_matrix`].
pub fn one_d_frame(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (r, w) = gauss_legendre_unit(n)?;
    let scale = r.iter().zip(&w).map(|(ri, wi)| (ri * wi).sqrt()).collect();
    Ok((r, scale))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::InvalidParameter(format!("cutoff eps = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// I_n(ε): squared right-hand side of the angular-order-n criterion row,
/// integrated against t dt over (ε, 1).
///
/// I_0(ε) = ∫ (ln t)² t dt and I_n(ε) = ∫ ((t^n − t^(−n))/(2n))² t dt, both in
/// closed form.
pub fn criterion_integral(n: u32, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if n == 0 {
        // antiderivative t²/2·ln²t − t²/2·ln t + t²/4
        let l = eps.ln();
        let at_eps = eps * eps * (0.5 * l * l - 0.5 * l + 0.25);
        return Ok(0.25 - at_eps);
    }
    let nf = n as f64;
    // (t^{2n+1} − 2t + t^{1−2n}) / (4n²)
    let high = (1.0 - eps.powf(2.0 * nf + 2.0)) / (2.0 * nf + 2.0);
    let middle = 1.0 - eps * eps;
    let low = if n == 1 { -eps.ln() } else { (eps.powf(2.0 - 2.0 * nf) - 1.0) / (2.0 * nf - 2.0) };
    Ok((high - middle + low) / (4.0 * nf * nf))
}

/// Leading coefficient of I_n(ε) as ε → 0: 1/4 against ln(1/ε) for n = 1,
/// 1/(4n²(2n−2)) against ε^(2−2n) for n ≥ 2.
pub fn criterion_leading_coefficient(n: u32) -> Option<f64> {
    match n {
        0 => None,
        1 => Some(0.25),
        _ => {
            let nf = n as f64;
            Some(1.0 / (4.0 * nf * nf * (2.0 * nf - 2.0)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GrowthModel {
    /// I_n(ε) settles to a finite limit.
    Convergent,
    /// I_n(ε) ≈ c·ln(1/ε) + const.
    Logarithmic,
    /// I_n(ε) ≈ c·ε^(−exponent) + const.
    Power { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub n: u32,
    pub epsilons: Vec<f64>,
    pub integrals: Vec<f64>,
    pub model: GrowthModel,
    /// Fitted growth coefficient c (divergent rows).
    pub divergence_rate: Option<f64>,
    /// Finite limit (convergent rows).
    pub limit: Option<f64>,
    /// RMS fit residual relative to the mean integral.
    pub relative_residual: f64,
    pub divergent: bool,
}

/// Minimum number of cutoffs in a divergence study.
pub const MIN_CUTOFFS: usize = 3;
/// Relative fit residual accepted for a divergence law.
pub const GROWTH_FIT_TOL: f64 = 0.05;
/// Relative last increment below which I_0 counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;

/// Tabulates I_n over decreasing cutoffs and classifies the growth.
pub fn criterion_divergence_report(n: u32, eps_list: &[f64]) -> Result<CriterionReport> {
    if eps_list.len() < MIN_CUTOFFS {
        return Err(LabError::InvalidParameter(format!("need at least {MIN_CUTOFFS} cutoffs, got {}", eps_list.len())));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::InvalidParameter("cutoffs must decrease strictly".into()));
    }
    let integrals: Vec<f64> = eps_list.iter().map(|&e| criterion_integral(n, e)).collect::<Result<_>>()?;
    let mean = integrals.iter().sum::<f64>() / integrals.len() as f64;
    let last = integrals[integrals.len() - 1];
    let prev = integrals[integrals.len() - 2];

    let report = |model, rate, limit, rel, divergent| CriterionReport {
        n,
        epsilons: eps_list.to_vec(),
        integrals: integrals.clone(),
        model,
        divergence_rate: rate,
        limit,
        relative_residual: rel,
        divergent,
    };

    if n == 0 {
        let converged = (last - prev).abs() <= CONVERGENCE_TOL * last.abs();
        return Ok(report(GrowthModel::Convergent, None, converged.then_some(last), 0.0, !converged));
    }
    let (x, model): (Vec<f64>, GrowthModel) = if n == 1 {
        (eps_list.iter().map(|e| -e.ln()).collect(), GrowthModel::Logarithmic)
    } else {
        let p = 2.0 * n as f64 - 2.0;
        (eps_list.iter().map(|e| e.powf(-p)).collect(), GrowthModel::Power { exponent: p })
    };
    let fit = fit_line(&x, &integrals);
    let rel = fit.rms / mean.abs();
    let divergent = fit.slope > 0.0 && rel < GROWTH_FIT_TOL;
    Ok(report(model, Some(fit.slope), None, rel, divergent))
}

/// ω(t) = (1 − t^(−2n))/(2n), the solution of ω′ + (2n/t)ω = 1/t, ω(1) = 0.
pub fn omega(n: u32, t: f64) -> f64 {
    let nf = n as f64;
    (1.0 - t.powf(-2.0 * nf)) / (2.0 * nf)
}

/// ω′(t) = t^(−2n−1).
pub fn omega_derivative(n: u32, t: f64) -> f64 {
    t.powf(-2.0 * n as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaCheck {
    /// max over samples of |ω′ + (2n/t)ω − 1/t| / (|ω′| + |2nω/t| + |1/t|).
    pub max_residual: f64,
    pub boundary_value: f64,
}

/// Substitutes ω into its Cauchy problem at each sample.
///
/// The terms grow like t^(−2n−1), so the residual is reported relative to the
/// sum of term magnitudes; in absolute terms it would only measure rounding of
/// numbers as large as 1e63.
pub fn omega_check(n: u32, t_samples: &[f64]) -> Result<OmegaCheck> {
    if n == 0 {
        return Err(LabError::InvalidParameter("angular order must be positive".into()));
    }
    let mut worst = 0.0_f64;
    for &t in t_samples {
        if !(t > 0.0 && t <= 1.0) {
            return Err(LabError::InvalidParameter(format!("sample t = {t} outside (0, 1]")));
        }
        let d = omega_derivative(n, t);
        let coupling = 2.0 * n as f64 / t * omega(n, t);
        let source = 1.0 / t;
        let scale = d.abs() + coupling.abs() + source.abs();
        worst = worst.max((d + coupling - source).abs() / scale);
    }
    Ok(OmegaCheck { max_residual: worst, boundary_value: omega(n, 1.0) })
}

/// Compares the printed seeds ω₁ = −(1−t²)/(2t²) and ω₂ = −(1−t⁴)/(4t⁴) with
/// the closed form; differences are relative to max(1, |ω|).
pub fn initial_omega_check(t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(LabError::InvalidParameter(format!("t = {t} outside (0, 1]")));
    }
    let t2 = t * t;
    let t4 = t2 * t2;
    let printed1 = -(1.0 - t2) / (2.0 * t2);
    let printed2 = -(1.0 - t4) / (4.0 * t4);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    Ok((rel(printed1, omega(1, t)), rel(printed2, omega(2, t))))
}

/// `count` log-spaced samples in [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}
