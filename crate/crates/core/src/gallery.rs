//! Finite models of the perturbed sums A = C + T and weak perturbations H(I + S).

use ndarray::Array2;
use ndarray_linalg::{EigValsh, QR, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{conj_transpose, s_numbers, Construction, OperatorModel, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// a·n^(−α)
    PowerLaw,
    /// a·(ln(n+1))^β
    LogPower,
}

/// Prescribed s-number law for a gallery operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub a: f64,
    pub exponent: f64,
}

impl ProfileSpec {
    pub fn power_law(a: f64, alpha: f64) -> Self {
        Self { kind: ProfileKind::PowerLaw, a, exponent: alpha }
    }

    pub fn log_power(a: f64, beta: f64) -> Self {
        Self { kind: ProfileKind::LogPower, a, exponent: beta }
    }

    /// s_1, …, s_N in index order.
    ///
    /// A zero coefficient is accepted and yields the zero sequence.
    pub fn values(&self, dim: usize) -> Result<Vec<f64>> {
        if !(self.a >= 0.0) || !self.a.is_finite() || !self.exponent.is_finite() {
            return Err(LabError::InvalidProfile(format!("a = {}, exponent = {}", self.a, self.exponent)));
        }
        let v: Vec<f64> = (1..=dim)
            .map(|n| {
                let n = n as f64;
                match self.kind {
                    ProfileKind::PowerLaw => self.a * n.powf(-self.exponent),
                    ProfileKind::LogPower => self.a * (n + 1.0).ln().powf(self.exponent),
                }
            })
            .collect();
        if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(LabError::InvalidProfile(format!("profile produced entry {x}")));
        }
        Ok(v)
    }
}

/// Seed for reproducible random constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GallerySeed(pub u64);

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(LabError::InvalidParameter(format!("dimension {dim} must be at least 2")));
    }
    Ok(())
}

/// Nonnegative diagonal C with s-numbers given by `profile`.
pub fn make_nonnegative_c(profile: &ProfileSpec, dim: usize) -> Result<OperatorModel> {
    check_dim(dim)?;
    let v = profile.values(dim)?;
    OperatorModel::diagonal(&v, format!("C[{:?} a={} e={}]", profile.kind, profile.a, profile.exponent))
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, dim: usize) -> Array2<C64> {
    Array2::from_shape_fn((dim, dim), |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with the phases of R's diagonal absorbed into Q.
pub fn haar_unitary(rng: &mut ChaCha8Rng, dim: usize) -> Result<Array2<C64>> {
    let g = gaussian_matrix(rng, dim);
    let (mut q, r) = g.qr()?;
    for j in 0..dim {
        let d = r[[j, j]];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(j).mapv_inplace(|z| z * phase);
    }
    Ok(q)
}

/// U·diag(d)·W* for complex U, W.
fn scaled_product(u: &Array2<C64>, d: &[f64], w: &Array2<C64>) -> Array2<C64> {
    let mut ud = u.clone();
    for (j, &dj) in d.iter().enumerate() {
        ud.column_mut(j).mapv_inplace(|z| z * dj);
    }
    ud.dot(&conj_transpose(w))
}

/// Random perturbation T.
///
/// Without `hermitian_j`, T = U·diag(profile)·V* with independent Haar U, V,
/// so s_numbers(T) equals the profile. With `hermitian_j`, T = T_R + i·T_J where
/// T_R and T_J are independent random Hermitian matrices whose eigenvalue
/// magnitudes follow `profile` and `hermitian_j` (random signs); the s-numbers
/// of T are then whatever results.
pub fn make_random_t(
    profile: &ProfileSpec,
    dim: usize,
    seed: GallerySeed,
    hermitian_j: Option<&ProfileSpec>,
) -> Result<OperatorModel> {
    check_dim(dim)?;
    let s = profile.values(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    let entries = match hermitian_j {
        None => {
            let u = haar_unitary(&mut rng, dim)?;
            let v = haar_unitary(&mut rng, dim)?;
            scaled_product(&u, &s, &v)
        }
        Some(jp) => {
            let sj = jp.values(dim)?;
            let signed = |vals: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
                vals.iter().map(|v| if rng.random::<bool>() { *v } else { -*v }).collect()
            };
            let ur = haar_unitary(&mut rng, dim)?;
            let dr = signed(&s, &mut rng);
            let uj = haar_unitary(&mut rng, dim)?;
            let dj = signed(&sj, &mut rng);
            let tr = hermitize(scaled_product(&ur, &dr, &ur));
            let tj = hermitize(scaled_product(&uj, &dj, &uj));
            tr + &tj.mapv(|z| z * C64::new(0.0, 1.0))
        }
    };
    Ok(OperatorModel::new(entries, format!("T[seed={}]", seed.0), Construction::RandomSvd)?)
}

/// (M + M*)/2, removing rounding asymmetry.
fn hermitize(m: Array2<C64>) -> Array2<C64> {
    let adj = conj_transpose(&m);
    (m + adj).mapv(|z| z * 0.5)
}

/// A = C + T.
pub fn assemble_sum(c: &OperatorModel, t: &OperatorModel) -> Result<OperatorModel> {
    if c.dim() != t.dim() {
        return Err(LabError::DimMismatch { left: c.dim(), right: t.dim() });
    }
    OperatorModel::new(c.entries() + t.entries(), format!("{} + {}", c.label(), t.label()), Construction::Sum)
}

/// Tolerance for the Hermitian-PSD test on H.
const PSD_TOL: f64 = 1e-10;
/// Smallest admissible singular value of I + S.
const INVERTIBLE_TOL: f64 = 1e-10;

/// H·(I + S) for Hermitian PSD H and boundedly invertible I + S.
pub fn make_weak_perturbation(h: &OperatorModel, s: &OperatorModel) -> Result<OperatorModel> {
    if h.dim() != s.dim() {
        return Err(LabError::DimMismatch { left: h.dim(), right: s.dim() });
    }
    let defect = h.hermitian_defect();
    if defect > PSD_TOL {
        return Err(LabError::InvalidH(format!("Hermitian defect {defect:e}")));
    }
    let lowest = h.entries().eigvalsh(UPLO::Lower)?.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest < -PSD_TOL {
        return Err(LabError::InvalidH(format!("negative eigenvalue {lowest:e}")));
    }
    let n = h.dim();
    let i_plus_s = Array2::<C64>::eye(n) + s.entries();
    let ips = OperatorModel::new(i_plus_s, "I+S", Construction::Explicit)?;
    let smallest = s_numbers(&ips)?.values().last().copied().unwrap_or(0.0);
    if smallest <= INVERTIBLE_TOL {
        return Err(LabError::SingularPerturbation(smallest));
    }
    OperatorModel::new(
        h.entries().dot(ips.entries()),
        format!("{}(I + {})", h.label(), s.label()),
        Construction::WeakPerturbation,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, hermitian_split};
    use ndarray::array;

    #[test]
    fn nonnegative_c_power_and_log() {
        let c = make_nonnegative_c(&ProfileSpec::power_law(1.0, 1.0), 4).unwrap();
        let d: Vec<f64> = c.entries().diag().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert_eq!(c.construction(), Construction::Diagonal);
        assert_eq!(c.hermitian_defect(), 0.0);

        let p = ProfileSpec::log_power(1.0, -1.0);
        let c = make_nonnegative_c(&p, 3).unwrap();
        let d: Vec<f64> = c.entries().diag().iter().map(|z| z.re).collect();
        let want = [1.0 / 2f64.ln(), 1.0 / 3f64.ln(), 1.0 / 4f64.ln()];
        for (x, y) in d.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(s_numbers(&c).unwrap().values(), p.values(3).unwrap().as_slice());
    }

    #[test]
    fn invalid_profiles() {
        assert!(matches!(make_nonnegative_c(&ProfileSpec::power_law(-1.0, 1.0), 4), Err(LabError::InvalidProfile(_))));
        assert!(matches!(
            make_nonnegative_c(&ProfileSpec::power_law(f64::NAN, 1.0), 4),
            Err(LabError::InvalidProfile(_))
        ));
        assert!(make_nonnegative_c(&ProfileSpec::power_law(1.0, 1.0), 1).is_err());
    }

    #[test]
    fn random_t_has_prescribed_s_numbers() {
        let p = ProfileSpec::power_law(1.0, 0.75);
        let t = make_random_t(&p, 40, GallerySeed(7), None).unwrap();
        let s = s_numbers(&t).unwrap();
        for (x, y) in s.values().iter().zip(p.values(40).unwrap()) {
            assert!((x - y).abs() < 1e-10);
        }
        let again = make_random_t(&p, 40, GallerySeed(7), None).unwrap();
        assert_eq!(t.entries(), again.entries());
        let other = make_random_t(&p, 40, GallerySeed(8), None).unwrap();
        assert_ne!(t.entries(), other.entries());
    }

    #[test]
    fn hermitian_component_control() {
        let p = ProfileSpec::power_law(1.0, 1.0);
        let zero = ProfileSpec::power_law(0.0, 1.0);
        let t = make_random_t(&p, 24, GallerySeed(3), Some(&zero)).unwrap();
        assert!(t.hermitian_defect() < 1e-12);

        let pj = ProfileSpec::power_law(0.5, 2.0);
        let t = make_random_t(&p, 24, GallerySeed(3), Some(&pj)).unwrap();
        let split = hermitian_split(&t).unwrap();
        let sr = s_numbers(&split.real_part).unwrap();
        let sj = s_numbers(&split.imag_part).unwrap();
        for (x, y) in sr.values().iter().zip(p.values(24).unwrap()) {
            assert!((x - y).abs() < 1e-10);
        }
        for (x, y) in sj.values().iter().zip(pj.values(24).unwrap()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn sums() {
        let c = make_nonnegative_c(&ProfileSpec::power_law(1.0, 1.0), 6).unwrap();
        let z = OperatorModel::zeros(6, "0").unwrap();
        assert_eq!(assemble_sum(&c, &z).unwrap().entries(), c.entries());
        let t = make_random_t(&ProfileSpec::power_law(1.0, 2.0), 6, GallerySeed(1), None).unwrap();
        let a = assemble_sum(&c, &t).unwrap();
        assert_eq!(a.construction(), Construction::Sum);
        let lhs = a.adjoint();
        let rhs = c.adjoint().entries() + t.adjoint().entries();
        assert!((lhs.entries() - &rhs).iter().all(|z| z.norm() <= 1e-15));
        let small = OperatorModel::zeros(5, "0").unwrap();
        assert_eq!(assemble_sum(&c, &small), Err(LabError::DimMismatch { left: 6, right: 5 }));
    }

    #[test]
    fn weak_perturbation_cases() {
        let h = OperatorModel::diagonal(&[1.0, 0.5], "H").unwrap();
        let zero = OperatorModel::zeros(2, "0").unwrap();
        assert_eq!(make_weak_perturbation(&h, &zero).unwrap().entries(), h.entries());

        let s = OperatorModel::from_real(array![[0.0, 0.0], [1.0, 0.0]], "S").unwrap();
        let w = make_weak_perturbation(&h, &s).unwrap();
        let want = array![[1.0, 0.0], [0.5, 0.5]].mapv(|x| C64::new(x, 0.0));
        assert_eq!(w.entries(), &want);
        let mut ev: Vec<f64> = eigenvalues(&w).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, vec![0.5, 1.0]);

        let minus_i = OperatorModel::from_real(array![[-1.0, 0.0], [0.0, 0.0]], "S").unwrap();
        assert!(matches!(make_weak_perturbation(&h, &minus_i), Err(LabError::SingularPerturbation(_))));
        let indefinite = OperatorModel::diagonal(&[1.0, -0.5], "H").unwrap();
        assert!(matches!(make_weak_perturbation(&indefinite, &zero), Err(LabError::InvalidH(_))));
        let nonherm = OperatorModel::from_real(array![[1.0, 1.0], [0.0, 1.0]], "H").unwrap();
        assert!(matches!(make_weak_perturbation(&nonherm, &zero), Err(LabError::InvalidH(_))));
    }

    #[test]
    fn weak_perturbation_of_nonsingular_h_has_no_zero_eigenvalue() {
        for seed in 0..4 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 12;
            let u = haar_unitary(&mut rng, n).unwrap();
            let d: Vec<f64> = (1..=n).map(|k| 1.0 / k as f64).collect();
            let h = hermitize(scaled_product(&u, &d, &u));
            let h = OperatorModel::new(h, "H", Construction::Explicit).unwrap();
            let g = gaussian_matrix(&mut rng, n);
            let gn = OperatorModel::new(g.clone(), "G", Construction::Explicit).unwrap();
            let scale = 0.09 / s_numbers(&gn).unwrap().largest();
            let s = OperatorModel::new(g.mapv(|z| z * scale), "S", Construction::Explicit).unwrap();
            let w = make_weak_perturbation(&h, &s).unwrap();
            // det(H)·det(I+S) ≠ 0, and |det(I+S)| ≥ (1 − ‖S‖)^n
            let det_h: f64 = d.iter().product();
            let prod: C64 = eigenvalues(&w).unwrap().iter().product();
            assert!(prod.norm() >= det_h * 0.91f64.powi(n as i32) * (1.0 - 1e-8));
            assert!(eigenvalues(&w).unwrap().iter().all(|z| z.norm() > 0.0));
        }
    }
}
