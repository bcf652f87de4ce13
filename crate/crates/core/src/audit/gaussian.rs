use nalgebra::{DMatrix, DVector};

use super::bound_rows;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigs, IndexSet, DEFAULT_EIG_TOL};
use crate::transform::SecuredScheme;

/// `λ_min(Y_k Y_kᵀ)` at or below this fraction of its trace counts as zero.
const SINGULAR_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Nats.
    pub bound: f64,
    pub m_k: f64,
    pub lambda_max_x: Option<f64>,
    pub lambda_min_y: Option<f64>,
    pub rows: IndexSet,
}

struct Blocks {
    rows: IndexSet,
    /// `E(rows, :)`.
    x: DMatrix<f64>,
    /// `C(rows, :)`.
    y: DMatrix<f64>,
    /// `f_k`.
    f: DVector<f64>,
}

fn blocks(ss: &SecuredScheme, user: usize) -> Result<Blocks> {
    let s = ss.base();
    if !s.field().is_real() {
        return Err(Error::InvalidArgument("Gaussian leakage needs a real scheme".into()));
    }
    if user >= s.k() {
        return Err(Error::InvalidArgument(format!("user {} out of range 1..={}", user + 1, s.k())));
    }
    let rows = bound_rows(ss, user);
    let x = s.e().select_rows(&rows)?.to_dmatrix()?;
    let y = ss.c().select_rows(&rows)?.to_dmatrix()?;
    let f = s.f().to_dmatrix()?.row(user).transpose();
    Ok(Blocks { rows, x, y, f })
}

fn check_sigmas(sigma_w: f64, sigma_c: f64) -> Result<()> {
    if !(sigma_w >= 0.0 && sigma_w.is_finite()) || !(sigma_c > 0.0 && sigma_c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need σ_w ≥ 0 and σ_c > 0, got σ_w = {sigma_w}, σ_c = {sigma_c}"
        )));
    }
    Ok(())
}

/// Extreme eigenvalues and `M_k`; errors when `Y_k Y_kᵀ` is singular.
fn snr(user: usize, b: &Blocks) -> Result<(f64, f64, f64)> {
    let xx = &b.x * b.x.transpose();
    let yy = &b.y * b.y.transpose();
    let lx = sym_eigs(&xx, DEFAULT_EIG_TOL)?;
    let ly = sym_eigs(&yy, DEFAULT_EIG_TOL)?;
    let lmax = *lx.last().expect("nonempty");
    let lmin = ly[0];
    if lmin <= SINGULAR_REL_TOL * yy.trace().max(1.0) {
        return Err(Error::UnboundedLeakage {
            user: user + 1,
            lambda_min: lmin,
        });
    }
    Ok((lmax, lmin, lmax / lmin))
}

/// `((w_H − 1)/2)·ln(1 + M_k σ_w²/σ_c²)` with `M_k = λ_max(X_k X_kᵀ)/λ_min(Y_k Y_kᵀ)`.
pub fn leakage_bound_real(ss: &SecuredScheme, user: usize, sigma_w: f64, sigma_c: f64) -> Result<BoundReport> {
    check_sigmas(sigma_w, sigma_c)?;
    let b = blocks(ss, user)?;
    let m = b.rows.len();
    if m == 0 {
        return Ok(BoundReport {
            bound: 0.0,
            m_k: 0.0,
            lambda_max_x: None,
            lambda_min_y: None,
            rows: b.rows,
        });
    }
    let (lmax, lmin, m_k) = snr(user, &b)?;
    let ratio = sigma_w * sigma_w / (sigma_c * sigma_c);
    Ok(BoundReport {
        bound: m as f64 / 2.0 * (m_k * ratio).ln_1p(),
        m_k,
        lambda_max_x: Some(lmax),
        lambda_min_y: Some(lmin),
        rows: b.rows,
    })
}

fn log_det_spd(m: &DMatrix<f64>, user: usize, what: &str) -> Result<f64> {
    let chol = m.clone().cholesky().ok_or_else(|| Error::SingularCovariance {
        user: user + 1,
        detail: format!("{what} is not positive definite"),
    })?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Exact `I(W; 𝒜_k | ⟨f_k, w⟩)` in nats for `W ~ N(0, σ_w² I)`, `C ~ N(0, σ_c² I)`.
///
/// With `A′` the responses in [`bound_rows`] and `s = ⟨f_k, w⟩`, this is
/// `½ ln det Cov(A′ | s) − ½ ln det(σ_c² Y_k Y_kᵀ)`, the conditional covariance
/// taken as a Schur complement.
pub fn exact_leakage_gaussian(ss: &SecuredScheme, user: usize, sigma_w: f64, sigma_c: f64) -> Result<f64> {
    check_sigmas(sigma_w, sigma_c)?;
    let b = blocks(ss, user)?;
    if b.rows.is_empty() {
        return Ok(0.0);
    }
    snr(user, &b)?;
    let (vw, vc) = (sigma_w * sigma_w, sigma_c * sigma_c);
    let noise = (&b.y * b.y.transpose()) * vc;
    let mut cov = (&b.x * b.x.transpose()) * vw + &noise;
    let ff = b.f.norm_squared();
    if vw > 0.0 && ff > 0.0 {
        let cross = (&b.x * &b.f) * vw;
        cov -= &cross * cross.transpose() / (vw * ff);
    }
    let cov = (&cov + cov.transpose()) * 0.5;
    let mi = 0.5 * (log_det_spd(&cov, user, "Cov(A′ | ⟨f_k, w⟩)")? - log_det_spd(&noise, user, "σ_c² Y_k Y_kᵀ")?);
    Ok(mi.max(0.0))
}

/// Smallest σ_c whose bound is at most `eps` nats:
/// `σ_c² = M_k σ_w² / (exp(2ε/(w_H − 1)) − 1)`.
pub fn epsilon_to_sigma(ss: &SecuredScheme, user: usize, sigma_w: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
    }
    check_sigmas(sigma_w, 1.0)?;
    let b = blocks(ss, user)?;
    let m = b.rows.len();
    if m == 0 {
        return Err(Error::InvalidArgument(format!(
            "user {} hears a single server and never leaks; no σ_c to choose",
            user + 1
        )));
    }
    let (_, _, m_k) = snr(user, &b)?;
    Ok((m_k * sigma_w * sigma_w / (2.0 * eps / m as f64).exp_m1()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::fixtures::reference;
    use crate::linalg::Matrix;
    use crate::scheme::Scheme;
    use crate::transform::secure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn reference_secured() -> SecuredScheme {
        SecuredScheme::with_randomness(reference::scheme(), reference::printed_randomness()).unwrap()
    }

    /// Generalized-eigenvalue form: with `Y Yᵀ = L Lᵀ` and `P` the projector
    /// orthogonal to `f`, the leakage is `½ Σ ln(1 + μ_i)` over the eigenvalues
    /// of `(σ_w²/σ_c²) L⁻¹ X P Xᵀ L⁻ᵀ`.
    fn oracle(ss: &SecuredScheme, user: usize, sw: f64, sc: f64) -> f64 {
        let b = blocks(ss, user).unwrap();
        if b.rows.is_empty() {
            return 0.0;
        }
        let l = b.f.len();
        let p = DMatrix::identity(l, l) - &b.f * b.f.transpose() / b.f.norm_squared();
        let chol = (&b.y * b.y.transpose()).cholesky().unwrap();
        let linv = chol.l().try_inverse().unwrap();
        let g = &linv * &b.x * p * b.x.transpose() * linv.transpose() * (sw * sw / (sc * sc));
        let g = (&g + g.transpose()) * 0.5;
        sym_eigs(&g, 1e-12).unwrap().iter().map(|mu| 0.5 * mu.max(0.0).ln_1p()).sum()
    }

    #[test]
    fn example_eigenvalues() {
        let r = leakage_bound_real(&reference_secured(), 0, 1.0, 1.0).unwrap();
        assert!((r.lambda_max_x.unwrap() - (25.0 + 205f64.sqrt()) / 2.0).abs() < 1e-9);
        assert!((r.lambda_min_y.unwrap() - (52.0 - 2560f64.sqrt())).abs() < 1e-9);
        assert!((r.bound - (1.0 + r.m_k).ln()).abs() < 1e-12);
        assert_eq!(r.rows, IndexSet::new(vec![1, 2]).unwrap());
    }

    #[test]
    fn matches_oracle_on_example() {
        for ss in [reference_secured(), secure(&reference::scheme()).unwrap()] {
            for u in 0..4 {
                for (sw, sc) in [(1.0, 1.0), (0.3, 2.0), (2.5, 0.7)] {
                    let a = exact_leakage_gaussian(&ss, u, sw, sc).unwrap();
                    let o = oracle(&ss, u, sw, sc);
                    assert!((a - o).abs() < 1e-9, "user {u}: {a} vs {o}");
                }
            }
        }
    }

    #[test]
    fn limits() {
        let ss = reference_secured();
        let big = exact_leakage_gaussian(&ss, 0, 1.0, 1e6).unwrap();
        assert!(big < 1e-9);
        assert!(leakage_bound_real(&ss, 0, 1.0, 1e6).unwrap().bound < 1e-9);
        assert_eq!(exact_leakage_gaussian(&ss, 0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn single_server_user_has_zero_bound() {
        let f = FieldSpec::Real;
        let d = Matrix::from_ints(f, &[[1, 0, 0], [0, 1, 1]]).unwrap();
        let e = Matrix::from_ints(f, &[[1, 0], [0, 1], [0, 0]]).unwrap();
        let s = Scheme::new(d.matmul(&e).unwrap(), d, e).unwrap();
        let ss = secure(&s).unwrap();
        let r = leakage_bound_real(&ss, 0, 1.0, 1.0).unwrap();
        assert_eq!(r.bound, 0.0);
        assert_eq!(exact_leakage_gaussian(&ss, 0, 1.0, 1.0).unwrap(), 0.0);
        assert!(epsilon_to_sigma(&ss, 0, 1.0, 0.1).is_err());
    }

    #[test]
    fn zero_randomness_is_unbounded() {
        let ss = SecuredScheme::with_randomness(reference::scheme(), Matrix::zeros(FieldSpec::Real, 6, 2)).unwrap();
        assert!(matches!(
            leakage_bound_real(&ss, 0, 1.0, 1.0),
            Err(Error::UnboundedLeakage { user: 1, .. })
        ));
        assert!(exact_leakage_gaussian(&ss, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_inverts_bound() {
        let ss = reference_secured();
        for eps in [1e-3, 0.01, 0.5, 3.0] {
            let sc = epsilon_to_sigma(&ss, 0, 1.0, eps).unwrap();
            let b = leakage_bound_real(&ss, 0, 1.0, sc).unwrap().bound;
            assert!((b - eps).abs() < 1e-9);
        }
        let m = leakage_bound_real(&ss, 0, 1.0, 1.0).unwrap().m_k;
        let sc = epsilon_to_sigma(&ss, 0, 1.0, 0.01).unwrap();
        assert!((sc * sc - m / 0.01f64.exp_m1()).abs() < 1e-6);
        assert!(epsilon_to_sigma(&ss, 0, 1.0, 1e3).unwrap() < 1e-100);
    }

    #[test]
    fn monotone_in_sigma_c() {
        let ss = reference_secured();
        for u in 0..4 {
            let mut prev = (f64::INFINITY, f64::INFINITY);
            for sc in [0.1, 0.5, 1.0, 3.0, 10.0, 100.0] {
                let e = exact_leakage_gaussian(&ss, u, 1.0, sc).unwrap();
                let b = leakage_bound_real(&ss, u, 1.0, sc).unwrap().bound;
                assert!(e <= prev.0 + 1e-12 && b <= prev.1 + 1e-12);
                assert!(e <= b + 1e-9);
                prev = (e, b);
            }
        }
    }

    /// Plug-in estimate from sampled covariances: `½ ln det Cov(A′|s) − ½ ln det Cov(A′|W)`,
    /// each conditional covariance by least-squares regression on the samples.
    #[test]
    fn sampled_covariance_agrees() {
        let ss = reference_secured();
        let b = blocks(&ss, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = 200_000;
        let (l, x, m) = (b.x.ncols(), b.y.ncols(), b.rows.len());
        let mut zz = DMatrix::<f64>::zeros(m + l + 1, m + l + 1);
        for _ in 0..samples {
            let w = DVector::from_fn(l, |_, _| StandardNormal.sample(&mut rng));
            let c = DVector::from_fn(x, |_, _| StandardNormal.sample(&mut rng));
            let a = &b.x * &w + &b.y * &c;
            let s = b.f.dot(&w);
            let mut z = DVector::zeros(m + l + 1);
            z.rows_mut(0, m).copy_from(&a);
            z.rows_mut(m, l).copy_from(&w);
            z[m + l] = s;
            zz += &z * z.transpose();
        }
        zz /= samples as f64;
        let cond = |given: &[usize]| {
            let aa = zz.view((0, 0), (m, m)).into_owned();
            let ag = DMatrix::from_fn(m, given.len(), |i, j| zz[(i, given[j])]);
            let gg = DMatrix::from_fn(given.len(), given.len(), |i, j| zz[(given[i], given[j])]);
            let c = aa - &ag * gg.try_inverse().unwrap() * ag.transpose();
            c.determinant().ln()
        };
        let given_w: Vec<usize> = (m..m + l).collect();
        let est = 0.5 * (cond(&[m + l]) - cond(&given_w));
        let exact = exact_leakage_gaussian(&ss, 0, 1.0, 1.0).unwrap();
        assert!((est - exact).abs() < 0.03, "{est} vs {exact}");
    }
}
