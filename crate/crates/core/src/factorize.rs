//! Closed-form factorizations that satisfy the reduced-rank condition by
//! construction, plus structural checks on user-supplied decoders.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{IndexSet, Matrix};
use crate::scheme::Scheme;
use crate::secrecy;

/// `D = [I_K | P]` and `E = [F − P·E_bot; E_bot]`; `E_bot` defaults to zero.
pub fn systematic_factorize(f: &Matrix, p: &Matrix, e_bot: Option<&Matrix>) -> Result<Scheme> {
    let field = f.field();
    let (k, l) = (f.rows(), f.cols());
    if p.rows() != k {
        return Err(Error::Structure(format!("P has {} rows, expected K = {k}", p.rows())));
    }
    let parity = p.cols();
    let e_bot = match e_bot {
        Some(m) if (m.rows(), m.cols()) != (parity, l) => {
            return Err(Error::Structure(format!(
                "E_bot must be {parity}×{l}, got {}×{}",
                m.rows(),
                m.cols()
            )))
        }
        Some(m) => m.clone(),
        None => Matrix::zeros(field, parity, l),
    };
    let d = Matrix::identity(field, k).hcat(p)?;
    let e_top = f.sub(&p.matmul(&e_bot)?)?;
    Scheme::new(f.clone(), d, e_top.vcat(&e_bot)?)
}

/// `C = [−P; I_{N−K}]`, whose columns span `Null([I_K | P])`.
pub fn systematic_randomness(p: &Matrix) -> Matrix {
    p.neg()
        .vcat(&Matrix::identity(p.field(), p.cols()))
        .expect("column counts agree")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclicCheck {
    pub is_circulant: bool,
    /// Right rotation taking each row to the next.
    pub shift: Option<usize>,
    pub theorem1_ok: bool,
}

fn rotate_right<T: Clone>(row: &[T], s: usize) -> Vec<T> {
    let n = row.len();
    (0..n).map(|j| row[(j + n - s % n) % n].clone()).collect()
}

/// Detects whether each row of `D` is the previous one rotated right by a
/// common shift, and checks the reduced-rank condition by direct rank.
pub fn check_cyclic(d: &Matrix) -> CyclicCheck {
    let n = d.cols();
    let shift = if d.rows() <= 1 || n == 0 {
        None
    } else {
        (1..=n).find(|&s| (1..d.rows()).all(|r| d.row(r) == rotate_right(d.row(r - 1), s).as_slice()))
    };
    let is_circulant = d.rows() == 1 || shift.is_some();
    let required = d.rows().saturating_sub(1);
    let theorem1_ok = (0..d.rows()).all(|k| {
        d.delete_cols(&d.row_support(k))
            .map(|m| m.rank() >= required)
            .unwrap_or(false)
    });
    CyclicCheck {
        is_circulant,
        shift,
        theorem1_ok,
    }
}

/// `D` whose first row is `generator` and whose later rows are successive
/// right rotations by `shift`.
pub fn circulant(generator: &Matrix, k: usize, shift: usize) -> Result<Matrix> {
    if generator.rows() != 1 {
        return Err(Error::Structure("generator must be a single row".into()));
    }
    let mut rows = vec![generator.row(0).to_vec()];
    for r in 1..k {
        rows.push(rotate_right(&rows[r - 1], shift));
    }
    Matrix::from_rows(generator.field(), rows, generator.cols())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityVariant {
    /// `D = I_K`, `E = F`, one server per user.
    Assigned,
    /// `D = F`, `E = I_L`, one server per message.
    Decentralized,
}

pub fn identity_scheme(f: &Matrix, variant: IdentityVariant) -> Result<Scheme> {
    let field = f.field();
    match variant {
        IdentityVariant::Assigned => Scheme::new(f.clone(), Matrix::identity(field, f.rows()), f.clone()),
        IdentityVariant::Decentralized => {
            let rank = f.rank();
            if rank < f.rows() {
                return Err(Error::RankDeficientDecoder { rank, k: f.rows() });
            }
            Scheme::new(f.clone(), f.clone(), Matrix::identity(field, f.cols()))
        }
    }
}

/// Rewrites a scheme into systematic form `D' = [I_K | P]`.
///
/// With `T` the row reduction taking `D` to its RREF and `Π` the server
/// permutation putting pivot columns first, `D' = T·D·Π`. Users then request
/// `F' = T·F`, and `E' = Πᵀ·E` (servers keep their tasks) satisfies
/// `D'·E' = F'`. Returns the scheme and, per new server position, the original
/// server index.
pub fn systematize(s: &Scheme) -> Result<(Scheme, Vec<usize>)> {
    let k = s.k();
    let (aug, pivots) = s.d().hcat(&Matrix::identity(s.field(), k))?.rref();
    let pivots: Vec<usize> = pivots.into_iter().filter(|&c| c < s.n()).collect();
    debug_assert_eq!(pivots.len(), k);
    let order: Vec<usize> = pivots
        .iter()
        .copied()
        .chain((0..s.n()).filter(|c| !pivots.contains(c)))
        .collect();
    let t = aug.select_cols(&(s.n()..s.n() + k).collect())?;
    let reduced = aug.select_cols(&IndexSet::range(s.n()))?;
    let p = reorder_cols(&reduced, &order[k..])?;
    let e_bot = reorder_rows(s.e(), &order[k..])?;
    let scheme = systematic_factorize(&t.matmul(s.f())?, &p, Some(&e_bot))?;
    debug_assert_eq!(scheme.e(), &reorder_rows(s.e(), &order)?);
    Ok((scheme, order))
}

fn reorder_cols(m: &Matrix, order: &[usize]) -> Result<Matrix> {
    Ok(reorder_rows(&m.transpose(), order)?.transpose())
}

fn reorder_rows(m: &Matrix, order: &[usize]) -> Result<Matrix> {
    let rows = order.iter().map(|&r| m.row(r).to_vec()).collect();
    Matrix::from_rows(m.field(), rows, m.cols())
}

/// Per user, whether the reduced-rank condition holds (convenience wrapper
/// used by the factorization CLI).
pub fn theorem1_all(s: &Scheme) -> bool {
    secrecy::check_theorem1(s).iter().all(|v| v.ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::fixtures::reference;
    use crate::transform::{secure, SecuredScheme};

    #[test]
    fn systematic_closed_form_null_space() {
        let f = FieldSpec::Real;
        let p = Matrix::from_ints(f, &[[1, 2], [0, -1], [3, 1]]).unwrap();
        let req = Matrix::from_ints(f, &[[1, 0, 2, 1], [0, 1, 1, 1], [2, 2, 0, 1]]).unwrap();
        let s = systematic_factorize(&req, &p, None).unwrap();
        let c = systematic_randomness(&p);
        assert!(s.d().matmul(&c).unwrap().is_zero());
        assert_eq!(s.e().select_rows(&IndexSet::range(3)).unwrap(), req);
        assert!(theorem1_all(&s));
        assert!(secure(&s).unwrap().c().same_column_span(&c).unwrap());
    }

    #[test]
    fn systematic_with_custom_bottom() {
        let f = FieldSpec::prime(7).unwrap();
        let p = Matrix::from_ints(f, &[[1], [1]]).unwrap();
        let req = Matrix::from_ints(f, &[[1, 2, 3], [4, 5, 6]]).unwrap();
        let bot = Matrix::from_ints(f, &[[1, 0, 1]]).unwrap();
        let s = systematic_factorize(&req, &p, Some(&bot)).unwrap();
        assert_eq!(s.d().matmul(s.e()).unwrap(), req);
        assert!(systematic_factorize(&req, &p, Some(&req)).is_err());
    }

    #[test]
    fn zero_parity_gives_one_server_per_user() {
        let f = FieldSpec::Real;
        let req = Matrix::from_ints(f, &[[1, 1], [0, 1]]).unwrap();
        let s = systematic_factorize(&req, &Matrix::zeros(f, 2, 1), None).unwrap();
        assert!((0..2).all(|k| s.access_weight(k) == 1));
    }

    #[test]
    fn circulant_detection() {
        let f = FieldSpec::Real;
        let g = Matrix::from_ints(f, &[[1, 1, 0, 0, 0]]).unwrap();
        let d = circulant(&g, 3, 1).unwrap();
        let c = check_cyclic(&d);
        assert!(c.is_circulant && c.theorem1_ok);
        assert_eq!(c.shift, Some(1));
        for k in 0..3 {
            assert_eq!(d.delete_cols(&d.row_support(k)).unwrap().rank(), 2);
        }

        assert!(!check_cyclic(reference::scheme().d()).is_circulant);

        let id = check_cyclic(&Matrix::identity(f, 4));
        assert!(id.is_circulant && id.theorem1_ok);
        assert_eq!(id.shift, Some(1));
    }

    #[test]
    fn identity_variants() {
        let f = FieldSpec::Real;
        let req = Matrix::from_ints(f, &[[1, 0, 2, 1], [0, 1, 1, 1], [1, 1, 1, 1]]).unwrap();
        let a = identity_scheme(&req, IdentityVariant::Assigned).unwrap();
        assert!(theorem1_all(&a));
        assert_eq!(a.costs().gamma, num::BigRational::new(3.into(), 3.into()));

        let d = identity_scheme(&req, IdentityVariant::Decentralized).unwrap();
        assert_eq!(d.n(), 4);
        assert!(!secrecy::check_theorem2(&d).ok);

        let low = Matrix::from_ints(f, &[[1, 1], [2, 2]]).unwrap();
        assert!(identity_scheme(&low, IdentityVariant::Decentralized).is_err());

        let single = Matrix::from_ints(f, &[[3, 1, 4]]).unwrap();
        let s = identity_scheme(&single, IdentityVariant::Decentralized).unwrap();
        assert!(secrecy::full_report(&s, None).all_pass());
    }

    #[test]
    fn systematize_example() {
        let s = reference::scheme();
        let (sys, order) = systematize(&s).unwrap();
        assert_eq!(order.len(), 6);
        let k = s.k();
        assert_eq!(
            sys.d().select_cols(&IndexSet::range(k)).unwrap(),
            Matrix::identity(FieldSpec::Real, k)
        );
        assert_eq!(sys.d().matmul(sys.e()).unwrap(), *sys.f());
        assert_eq!(sys.f().rank(), s.f().rank());
        let permuted: Vec<Vec<_>> = order.iter().map(|&n| s.e().row(n).to_vec()).collect();
        assert_eq!(*sys.e(), Matrix::from_rows(FieldSpec::Real, permuted, 5).unwrap());
        assert_eq!(sys.costs().gamma, s.costs().gamma);
        let ss = secure(&sys).unwrap();
        let p = sys.d().select_cols(&(k..6).collect()).unwrap();
        assert!(ss.c().same_column_span(&systematic_randomness(&p)).unwrap());
        assert!(SecuredScheme::with_randomness(sys.clone(), systematic_randomness(&p)).is_ok());
    }
}
