//! Leakage measurement.
//!
//! Over GF(p) the conditional mutual information `I(W; 𝒜_k | ⟨f_k, w⟩)` is
//! computed exactly by enumerating every message and randomness vector. Over the
//! reals messages and randomness are Gaussian, so the same quantity has a closed
//! form, alongside the upper bound `((w_H − 1)/2)·ln(1 + M_k σ_w²/σ_c²)`.

mod exact;
mod gaussian;

use serde::Serialize;

pub use exact::{exact_leakage_gf, GfLeakage, ENUMERATION_LIMIT};
pub use gaussian::{epsilon_to_sigma, exact_leakage_gaussian, leakage_bound_real, BoundReport};

use crate::error::Result;
use crate::linalg::IndexSet;
use crate::report::one_based_set;
use crate::transform::SecuredScheme;

/// Greedy left-to-right maximal independent subset of the rows of
/// `C(Sup(d_k), :)`, as server indices.
pub fn select_sk(ss: &SecuredScheme, user: usize) -> IndexSet {
    let mut chosen = Vec::new();
    let mut rank = 0;
    for n in ss.base().support(user).iter() {
        chosen.push(n);
        let trial = IndexSet::from_sorted_unchecked(chosen.clone());
        let r = ss.c().select_rows(&trial).expect("support within N").rank();
        if r > rank {
            rank = r;
        } else {
            chosen.pop();
        }
    }
    IndexSet::from_sorted_unchecked(chosen)
}

/// Responses entering the Gaussian expressions: `Sup(d_k)` minus its lowest
/// index, whose response is fixed by the others and the decoded value.
pub fn bound_rows(ss: &SecuredScheme, user: usize) -> IndexSet {
    let sup = ss.base().support(user);
    match sup.first() {
        Some(first) => sup.without(first),
        None => sup,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Bits,
    Nats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserLeakage {
    /// One-based.
    pub user: usize,
    pub w_h: usize,
    #[serde(serialize_with = "one_based_set")]
    pub s_k: IndexSet,
    /// Responses used for `X_k` and `Y_k`.
    #[serde(serialize_with = "one_based_set")]
    pub rows: IndexSet,
    pub exact_leakage: Option<f64>,
    /// GF only: the rational mutual information is exactly zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_zero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(rename = "M_k", skip_serializing_if = "Option::is_none")]
    pub m_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min_y: Option<f64>,
    /// Randomness deviation meeting a requested ε.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_c: Option<f64>,
}

impl UserLeakage {
    fn new(ss: &SecuredScheme, user: usize) -> Self {
        UserLeakage {
            user: user + 1,
            w_h: ss.base().access_weight(user),
            s_k: select_sk(ss, user),
            rows: bound_rows(ss, user),
            exact_leakage: None,
            exact_zero: None,
            bound: None,
            m_k: None,
            lambda_max_x: None,
            lambda_min_y: None,
            sigma_c: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub unit: Unit,
    pub per_user: Vec<UserLeakage>,
}

/// Exhaustive audit of the given (zero-based) users.
pub fn gf_report(ss: &SecuredScheme, users: &[usize]) -> Result<LeakageReport> {
    let per_user = users
        .iter()
        .map(|&u| {
            let g = exact_leakage_gf(ss, u)?;
            let mut r = UserLeakage::new(ss, u);
            r.exact_leakage = Some(g.bits);
            r.exact_zero = Some(g.exact_zero);
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok(LeakageReport {
        unit: Unit::Bits,
        per_user,
    })
}

/// Bound, eigen diagnostics and, when `exact` is set, the closed-form leakage
/// for the given users.
pub fn gaussian_report(
    ss: &SecuredScheme,
    users: &[usize],
    sigma_w: f64,
    sigma_c: f64,
    exact: bool,
) -> Result<LeakageReport> {
    let per_user = users
        .iter()
        .map(|&u| {
            let b = leakage_bound_real(ss, u, sigma_w, sigma_c)?;
            let mut r = UserLeakage::new(ss, u);
            r.bound = Some(b.bound);
            r.m_k = Some(b.m_k);
            r.lambda_max_x = b.lambda_max_x;
            r.lambda_min_y = b.lambda_min_y;
            if exact {
                r.exact_leakage = Some(exact_leakage_gaussian(ss, u, sigma_w, sigma_c)?);
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok(LeakageReport {
        unit: Unit::Nats,
        per_user,
    })
}

/// Per-user σ_c meeting `eps` nats; users with `w_H = 1` leak nothing and get `None`.
pub fn epsilon_report(ss: &SecuredScheme, users: &[usize], sigma_w: f64, eps: f64) -> Result<LeakageReport> {
    let per_user = users
        .iter()
        .map(|&u| {
            let mut r = UserLeakage::new(ss, u);
            if r.w_h >= 2 {
                let sigma_c = epsilon_to_sigma(ss, u, sigma_w, eps)?;
                let b = leakage_bound_real(ss, u, sigma_w, sigma_c)?;
                r.sigma_c = Some(sigma_c);
                r.bound = Some(b.bound);
                r.m_k = Some(b.m_k);
                r.lambda_max_x = b.lambda_max_x;
                r.lambda_min_y = b.lambda_min_y;
            } else {
                r.bound = Some(0.0);
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok(LeakageReport {
        unit: Unit::Nats,
        per_user,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::fixtures::reference;
    use crate::linalg::Matrix;

    fn reference_secured() -> SecuredScheme {
        SecuredScheme::with_randomness(reference::scheme(), reference::printed_randomness()).unwrap()
    }

    #[test]
    fn greedy_sk_on_printed_basis() {
        let ss = reference_secured();
        assert_eq!(select_sk(&ss, 0), IndexSet::new(vec![0, 1]).unwrap());
        assert_eq!(select_sk(&ss, 2).len(), 1);
    }

    #[test]
    fn sk_empty_for_zero_randomness() {
        let ss = SecuredScheme::with_randomness(reference::scheme(), Matrix::zeros(FieldSpec::Real, 6, 2)).unwrap();
        assert!(select_sk(&ss, 0).is_empty());
    }

    #[test]
    fn bound_rows_drop_first() {
        let ss = reference_secured();
        assert_eq!(bound_rows(&ss, 0), IndexSet::new(vec![1, 2]).unwrap());
    }

    #[test]
    fn report_json_is_one_based() {
        let ss = reference_secured();
        let r = gaussian_report(&ss, &[0], 1.0, 1.0, true).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["unit"], "nats");
        assert_eq!(v["per_user"][0]["rows"], serde_json::json!([2, 3]));
        assert_eq!(v["per_user"][0]["s_k"], serde_json::json!([1, 2]));
    }
}
