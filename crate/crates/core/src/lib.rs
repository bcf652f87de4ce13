//! Secure multi-user linearly separable distributed computing.
//!
//! A scheme factorizes a request matrix `F` (K users × L messages) as `D·E`:
//! server `n` broadcasts `A_n = e_nᵀ w` and user `k` decodes `d_kᵀ A = f_kᵀ w`.
//! This crate checks when such a scheme can be made information-theoretically
//! secret, secures it by injecting common randomness along `Null(D)`, simulates
//! the protocol and audits leakage exactly (finite fields) or via closed-form
//! Gaussian expressions (reals).

pub mod audit;
pub mod error;
pub mod factorize;
pub mod field;
pub mod fixtures;
pub mod linalg;
pub mod report;
pub mod scheme;
pub mod secrecy;
pub mod simulate;
pub mod transform;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec};
pub use linalg::{IndexSet, Matrix};
pub use scheme::{CostReport, LoadedScheme, Scheme, SchemeDocument};
pub use secrecy::{full_report, SecrecyReport};
pub use transform::{secure, SecuredScheme};
