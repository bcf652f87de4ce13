//! Securing a scheme: append a basis of `Null(D)` to `E` as coefficients of
//! shared randomness, so that every legitimate decode cancels it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{IndexSet, Matrix};
use crate::report::one_based_set;
use crate::scheme::{first_difference, Scheme, SchemeDocument};
use crate::secrecy;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// `N = K`: `Null(D)` is trivial and nothing can be injected.
    NoRandomnessCapacity,
    /// `E(Sup(d_k), :)` is rank deficient for these (one-based) users; the rank
    /// condition holds but the full-rank assumption behind it does not.
    DegenerateEncoding { users: Vec<usize> },
}

/// A scheme together with randomness coefficients `C` (`N × x`) with `D·C = 0`.
/// The augmented encoding matrix is `Ẽ = [E | C]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecuredScheme {
    base: Scheme,
    c: Matrix,
    e_aug: Matrix,
    warnings: Vec<Warning>,
}

impl SecuredScheme {
    /// Pairs a scheme with caller-supplied randomness coefficients. Any `C` whose
    /// columns lie in `Null(D)` is accepted, including ones too weak for secrecy;
    /// the secrecy checks decide that.
    pub fn with_randomness(base: Scheme, c: Matrix) -> Result<Self> {
        if c.rows() != base.n() {
            return Err(Error::Structure(format!(
                "C has {} rows, expected N = {}",
                c.rows(),
                base.n()
            )));
        }
        let dc = base.d().matmul(&c)?;
        if let Some((row, col)) = first_difference(&dc, &Matrix::zeros(c.field(), dc.rows(), dc.cols())) {
            return Err(Error::RandomnessNotInNullSpace { row: row + 1, col: col + 1 });
        }
        // D·C = 0 with rank(D) = K bounds rank(C) by N − K.
        assert!(c.rank() <= base.n() - base.k(), "rank(C) exceeds N − K");
        let e_aug = base.e().hcat(&c)?;
        let degenerate: Vec<usize> = base
            .nondegeneracy()
            .iter()
            .enumerate()
            .filter(|(_, ok)| !**ok)
            .map(|(k, _)| k + 1)
            .collect();
        let mut warnings = Vec::new();
        if base.n() == base.k() {
            warnings.push(Warning::NoRandomnessCapacity);
        }
        if !degenerate.is_empty() {
            warnings.push(Warning::DegenerateEncoding { users: degenerate });
        }
        Ok(SecuredScheme {
            base,
            c,
            e_aug,
            warnings,
        })
    }

    pub fn base(&self) -> &Scheme {
        &self.base
    }

    /// Randomness coefficients, `N × x`.
    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// `Ẽ = [E | C]`, `N × (L + x)`.
    pub fn e_aug(&self) -> &Matrix {
        &self.e_aug
    }

    /// Number of common-randomness symbols.
    pub fn x(&self) -> usize {
        self.c.cols()
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn to_document(&self) -> SchemeDocument {
        SchemeDocument::from_parts(&self.base, Some(&self.c))
    }
}

/// Rejects schemes failing the reduced-rank condition, then uses the canonical
/// RREF basis of `Null(D)` as `C` (so `x = N − K`).
pub fn secure(s: &Scheme) -> Result<SecuredScheme> {
    let required = s.k() - 1;
    if let Some((user, v)) = secrecy::check_theorem1(s)
        .into_iter()
        .enumerate()
        .find(|(_, v)| !v.ok)
    {
        return Err(Error::InsecureFactorization {
            user: user + 1,
            rank: v.dred_rank,
            required,
        });
    }
    let c = s.d().null_space_basis();
    debug_assert_eq!(c.cols(), s.n() - s.k());
    SecuredScheme::with_randomness(s.clone(), c)
}

/// What server `n` needs in order to compute its augmented response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ServerTask {
    /// One-based server index.
    pub server: usize,
    #[serde(serialize_with = "one_based_set")]
    pub messages: IndexSet,
    #[serde(serialize_with = "one_based_set")]
    pub randomness: IndexSet,
}

pub fn augmented_tasks(ss: &SecuredScheme) -> Vec<ServerTask> {
    let l = ss.base.l();
    (0..ss.base.n())
        .map(|n| {
            let sup = ss.e_aug.row_support(n);
            ServerTask {
                server: n + 1,
                messages: sup.iter().filter(|&i| i < l).collect(),
                randomness: sup.iter().filter(|&i| i >= l).map(|i| i - l).collect(),
            }
        })
        .collect()
}
