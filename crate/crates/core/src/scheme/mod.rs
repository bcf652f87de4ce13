//! The `(N, K, L)` system model: request matrix `F`, decoding matrix `D`,
//! encoding matrix `E` with `F = D·E`, and the cost metrics δ and γ.

mod io;

use num::BigRational;
use serde::Serialize;

pub use io::{load_scheme_file, parse_matrix_json, Entry, LoadedScheme, RequestsDocument, SchemeDocument};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::linalg::{IndexSet, Matrix};
use crate::report::{one_based_sets, ratio_string};

/// A validated multi-user linearly separable computing scheme.
///
/// Invariants: `N ≥ K`, `L ≥ K`, `D·E = F` exactly and `rank(D) = K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    f: Matrix,
    d: Matrix,
    e: Matrix,
}

impl Scheme {
    pub fn new(f: Matrix, d: Matrix, e: Matrix) -> Result<Self> {
        let field = f.field();
        for m in [&d, &e] {
            if m.field() != field {
                return Err(Error::FieldMismatch {
                    left: field,
                    right: m.field(),
                });
            }
        }
        let (k, l) = (f.rows(), f.cols());
        let n = d.cols();
        if d.rows() != k {
            return Err(Error::Structure(format!(
                "D has {} rows but F has K = {k}",
                d.rows()
            )));
        }
        if e.rows() != n || e.cols() != l {
            return Err(Error::Structure(format!(
                "E must be N×L = {n}×{l}, got {}×{}",
                e.rows(),
                e.cols()
            )));
        }
        if k == 0 {
            return Err(Error::DimensionViolation("K must be at least 1".into()));
        }
        if n < k {
            return Err(Error::DimensionViolation(format!("N = {n} < K = {k}")));
        }
        if l < k {
            return Err(Error::DimensionViolation(format!("L = {l} < K = {k}")));
        }
        let product = d.matmul(&e)?;
        if let Some((row, col)) = first_difference(&product, &f) {
            return Err(Error::InconsistentFactorization { row: row + 1, col: col + 1 });
        }
        let rank = d.rank();
        if rank < k {
            return Err(Error::RankDeficientDecoder { rank, k });
        }
        Ok(Scheme { f, d, e })
    }

    pub fn field(&self) -> FieldSpec {
        self.f.field()
    }

    /// Number of servers.
    pub fn n(&self) -> usize {
        self.d.cols()
    }

    /// Number of users.
    pub fn k(&self) -> usize {
        self.f.rows()
    }

    /// Number of messages.
    pub fn l(&self) -> usize {
        self.f.cols()
    }

    pub fn f(&self) -> &Matrix {
        &self.f
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn e(&self) -> &Matrix {
        &self.e
    }

    /// `Sup(d_k)`: the servers user `k` listens to.
    pub fn support(&self, user: usize) -> IndexSet {
        self.d.row_support(user)
    }

    /// `w_H(d_k)`.
    pub fn access_weight(&self, user: usize) -> usize {
        self.support(user).len()
    }

    pub fn schedule(&self) -> BroadcastSchedule {
        BroadcastSchedule {
            tau: (0..self.n()).map(|n| self.d.col_support(n)).collect(),
            sup_d: (0..self.k()).map(|k| self.support(k)).collect(),
        }
    }

    pub fn costs(&self) -> CostReport {
        let (k, n) = (self.k(), self.n());
        let per_user_access: Vec<usize> = (0..k).map(|u| self.access_weight(u)).collect();
        let per_message_replication: Vec<usize> =
            (0..self.l()).map(|l| self.e.col_support(l).len()).collect();
        let accesses: usize = per_user_access.iter().sum();
        let max_replication = per_message_replication.iter().copied().max().unwrap_or(0);
        CostReport {
            delta: BigRational::new(accesses.into(), (k * n).into()),
            gamma: BigRational::new(max_replication.into(), n.into()),
            per_user_access,
            per_message_replication,
        }
    }

    /// Per user, whether `E(Sup(d_k), :)` has full row rank `w_H(d_k)`.
    pub fn nondegeneracy(&self) -> Vec<bool> {
        (0..self.k())
            .map(|u| {
                let sup = self.support(u);
                self.e.select_rows(&sup).expect("support within N").rank() == sup.len()
            })
            .collect()
    }

    /// The same matrices read in another field, revalidated there. Used to
    /// audit an integer scheme over GF(p).
    pub fn reinterpret(&self, field: FieldSpec) -> Result<Scheme> {
        Scheme::new(self.f.convert(field)?, self.d.convert(field)?, self.e.convert(field)?)
    }

    pub fn to_document(&self) -> SchemeDocument {
        SchemeDocument::from_parts(self, None)
    }
}

pub(crate) fn first_difference(a: &Matrix, b: &Matrix) -> Option<(usize, usize)> {
    (0..a.rows())
        .flat_map(|r| (0..a.cols()).map(move |c| (r, c)))
        .find(|&(r, c)| a.get(r, c) != b.get(r, c))
}

/// Who hears whom. `tau[n]` lists the users served by server `n`;
/// `sup_d[k]` the servers heard by user `k`. Serialized one-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BroadcastSchedule {
    #[serde(serialize_with = "one_based_sets")]
    pub tau: Vec<IndexSet>,
    #[serde(serialize_with = "one_based_sets")]
    pub sup_d: Vec<IndexSet>,
}

/// Communication cost δ and computation cost γ, as exact fractions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    #[serde(serialize_with = "ratio_string")]
    pub delta: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub gamma: BigRational,
    pub per_user_access: Vec<usize>,
    pub per_message_replication: Vec<usize>,
}
