//! Decidable secrecy criteria: the reduced-rank condition on `D`, the rank
//! equality on `C(Sup(d_k), :)`, the per-user access bound and the global
//! communication-cost bound.

use num::{BigRational, One};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::ratio_string;
use crate::scheme::Scheme;
use crate::transform::SecuredScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReducedRank {
    pub ok: bool,
    pub dred_rank: usize,
}

/// Per user: rank of `D` with the columns `Sup(d_k)` deleted, against `K − 1`.
pub fn check_theorem1(s: &Scheme) -> Vec<ReducedRank> {
    let required = s.k() - 1;
    (0..s.k())
        .into_par_iter()
        .map(|u| {
            let dred = s.d().delete_cols(&s.support(u)).expect("support within N");
            let dred_rank = dred.rank();
            ReducedRank {
                ok: dred_rank >= required,
                dred_rank,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma1Status {
    Met,
    /// Two or more randomness-free directions: the user learns more than its request.
    RankTooLow,
    /// Cannot happen when `D·C = 0`; signals an internal inconsistency.
    RankTooHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lemma1Verdict {
    pub ok: bool,
    pub rank: usize,
    pub required: usize,
    pub status: Lemma1Status,
}

/// Per user: `rank(C(Sup(d_k), :))` against `w_H(d_k) − 1`, as an equality.
pub fn check_lemma1(ss: &SecuredScheme) -> Vec<Lemma1Verdict> {
    let s = ss.base();
    (0..s.k())
        .into_par_iter()
        .map(|u| {
            let sup = s.support(u);
            let rank = ss.c().select_rows(&sup).expect("support within N").rank();
            let required = sup.len() - 1;
            let status = match rank.cmp(&required) {
                std::cmp::Ordering::Equal => Lemma1Status::Met,
                std::cmp::Ordering::Less => Lemma1Status::RankTooLow,
                std::cmp::Ordering::Greater => Lemma1Status::RankTooHigh,
            };
            Lemma1Verdict {
                ok: status == Lemma1Status::Met,
                rank,
                required,
                status,
            }
        })
        .collect()
}

/// Per user: `w_H(d_k) ≤ N − K + 1`.
pub fn check_corollary1(s: &Scheme) -> Vec<bool> {
    let bound = s.n() - s.k() + 1;
    (0..s.k()).map(|u| s.access_weight(u) <= bound).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostBound {
    pub ok: bool,
    #[serde(serialize_with = "ratio_string")]
    pub delta: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub delta_bound: BigRational,
}

/// `δ ≤ 1 − (K − 1)/N`, compared exactly.
pub fn check_theorem2(s: &Scheme) -> CostBound {
    let delta = s.costs().delta;
    let delta_bound = BigRational::one() - BigRational::new((s.k() - 1).into(), s.n().into());
    CostBound {
        ok: delta <= delta_bound,
        delta,
        delta_bound,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserSecrecy {
    /// One-based.
    pub user: usize,
    pub w_h: usize,
    pub theorem1_ok: bool,
    pub dred_rank: usize,
    pub corollary1_ok: bool,
    /// Absent when no randomness coefficients are given.
    pub lemma1: Option<Lemma1Verdict>,
    /// Whether `E(Sup(d_k), :)` has full row rank.
    pub nondegenerate: bool,
}

impl UserSecrecy {
    pub fn passes(&self) -> bool {
        self.theorem1_ok && self.corollary1_ok && self.lemma1.is_none_or(|l| l.ok)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecrecyReport {
    pub per_user: Vec<UserSecrecy>,
    pub global: CostBound,
}

impl SecrecyReport {
    /// Every applicable check, including the global cost bound.
    pub fn all_pass(&self) -> bool {
        self.global.ok && self.per_user.iter().all(UserSecrecy::passes)
    }
}

/// Aggregates every check. `ss`, when given, must wrap `s`.
pub fn full_report(s: &Scheme, ss: Option<&SecuredScheme>) -> SecrecyReport {
    let t1 = check_theorem1(s);
    let c1 = check_corollary1(s);
    let l1 = ss.map(check_lemma1);
    let nondeg = s.nondegeneracy();
    let per_user = (0..s.k())
        .map(|u| UserSecrecy {
            user: u + 1,
            w_h: s.access_weight(u),
            theorem1_ok: t1[u].ok,
            dred_rank: t1[u].dred_rank,
            corollary1_ok: c1[u],
            lemma1: l1.as_ref().map(|v| v[u]),
            nondegenerate: nondeg[u],
        })
        .collect();
    SecrecyReport {
        per_user,
        global: check_theorem2(s),
    }
}
