use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{IndexSet, Matrix};
use crate::transform::SecuredScheme;

/// Largest number of `(w, c)` states the exhaustive audit will visit.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

/// Tables with at most this many cells are dense arrays; larger ones are hashed.
const DENSE_CELLS: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfLeakage {
    pub bits: f64,
    /// Whether `P(𝒜_k | w) = P(𝒜_k | ⟨f_k, w⟩)` holds for every `w`, checked in
    /// integers. Equivalent to the rational mutual information being zero.
    pub exact_zero: bool,
    pub states: u128,
}

/// Occurrence counts of integer values `v`, for evaluating `Σ v·ln v`
/// deterministically regardless of how the enumeration was split.
type ValueHistogram = BTreeMap<u64, u64>;

fn merge(mut a: ValueHistogram, b: ValueHistogram) -> ValueHistogram {
    for (v, n) in b {
        *a.entry(v).or_insert(0) += n;
    }
    a
}

fn xlogx_sum(h: &ValueHistogram) -> f64 {
    h.iter()
        .filter(|(&v, _)| v > 1)
        .map(|(&v, &n)| n as f64 * v as f64 * (v as f64).ln())
        .sum()
}

/// Counts indexed by a state key below `size`.
enum Counts {
    Dense(Vec<u64>),
    Sparse(HashMap<u64, u64>),
}

impl Counts {
    fn new(size: u128) -> Self {
        if size <= DENSE_CELLS {
            Counts::Dense(vec![0; size as usize])
        } else {
            Counts::Sparse(HashMap::new())
        }
    }

    fn add(&mut self, key: u64, n: u64) {
        match self {
            Counts::Dense(v) => v[key as usize] += n,
            Counts::Sparse(m) => *m.entry(key).or_insert(0) += n,
        }
    }

    fn get(&self, key: u64) -> u64 {
        match self {
            Counts::Dense(v) => v[key as usize],
            Counts::Sparse(m) => m.get(&key).copied().unwrap_or(0),
        }
    }

    fn merge(mut self, other: Counts) -> Counts {
        match other {
            Counts::Dense(v) => v.into_iter().enumerate().filter(|(_, n)| *n > 0).for_each(|(k, n)| self.add(k as u64, n)),
            Counts::Sparse(m) => m.into_iter().for_each(|(k, n)| self.add(k, n)),
        }
        self
    }

    fn histogram(&self) -> ValueHistogram {
        let mut h = ValueHistogram::new();
        let mut put = |n: u64| {
            if n > 0 {
                *h.entry(n).or_insert(0) += 1;
            }
        };
        match self {
            Counts::Dense(v) => v.iter().copied().for_each(&mut put),
            Counts::Sparse(m) => m.values().copied().for_each(&mut put),
        }
        h
    }
}

/// The linear map from `(w, c)` to the responses a user hears, restricted to a
/// maximal independent set of those responses (the rest are functions of them).
struct UserMap {
    p: u64,
    l: usize,
    /// Rows over `w`, one per kept response.
    xw: Vec<Vec<u64>>,
    /// Every `Y·c`, indexed by the base-p encoding of `c`.
    yc: Vec<Vec<u64>>,
    f: Vec<u64>,
}

impl UserMap {
    fn new(ss: &SecuredScheme, user: usize, p: u64) -> Result<Self> {
        let s = ss.base();
        let sup = s.support(user);
        let rows = ss.e_aug().select_rows(&sup)?;
        let kept = independent_rows(&rows);
        let kept = rows.select_rows(&kept)?.to_residues()?;
        let (l, x) = (s.l(), ss.x());
        let xw: Vec<Vec<u64>> = kept.iter().map(|r| r[..l].to_vec()).collect();
        let y: Vec<Vec<u64>> = kept.iter().map(|r| r[l..].to_vec()).collect();
        let yc = (0..p.pow(x as u32))
            .map(|ci| {
                let c = digits(ci, p, x);
                y.iter().map(|row| dot(row, &c, p)).collect()
            })
            .collect();
        let f = s.f().select_rows(&IndexSet::from_sorted_unchecked(vec![user]))?.to_residues()?.remove(0);
        Ok(UserMap { p, l, xw, yc, f })
    }

    fn key_space(&self) -> u128 {
        (self.p as u128).pow(self.xw.len() as u32)
    }

    /// Calls `visit(key)` for the response of every `c` given `w`, and returns `⟨f, w⟩`.
    fn for_each_response(&self, wi: u64, mut visit: impl FnMut(u64)) -> u64 {
        let p = self.p;
        let w = digits(wi, p, self.l);
        let base: Vec<u64> = self.xw.iter().map(|row| dot(row, &w, p)).collect();
        for yc in &self.yc {
            let key = base
                .iter()
                .zip(yc)
                .rev()
                .fold(0u64, |acc, (&a, &b)| acc * p + (a + b) % p);
            visit(key);
        }
        dot(&self.f, &w, p)
    }
}

fn independent_rows(m: &Matrix) -> IndexSet {
    let mut chosen = Vec::new();
    let mut rank = 0;
    for r in 0..m.rows() {
        chosen.push(r);
        let rr = m.select_rows(&IndexSet::from_sorted_unchecked(chosen.clone())).expect("in range").rank();
        if rr > rank {
            rank = rr;
        } else {
            chosen.pop();
        }
    }
    IndexSet::from_sorted_unchecked(chosen)
}

fn digits(mut v: u64, p: u64, len: usize) -> Vec<u64> {
    (0..len)
        .map(|_| {
            let d = v % p;
            v /= p;
            d
        })
        .collect()
}

fn dot(a: &[u64], b: &[u64], p: u64) -> u64 {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| (acc + x * y) % p)
}

/// Exact `I(W; 𝒜_k | ⟨f_k, w⟩)` in bits by enumerating all `p^(L + x)`
/// equally likely `(w, c)`. `user` is zero-based.
pub fn exact_leakage_gf(ss: &SecuredScheme, user: usize) -> Result<GfLeakage> {
    let s = ss.base();
    let p = s
        .field()
        .modulus()
        .ok_or_else(|| Error::InvalidArgument("exhaustive audit needs a prime field".into()))?;
    if user >= s.k() {
        return Err(Error::InvalidArgument(format!("user {} out of range 1..={}", user + 1, s.k())));
    }
    let (l, x) = (s.l(), ss.x());
    let states = (p as u128)
        .checked_pow((l + x) as u32)
        .filter(|&t| t <= ENUMERATION_LIMIT)
        .ok_or(Error::EnumerationInfeasible {
            states: (p as u128).checked_pow((l + x) as u32).unwrap_or(u128::MAX),
            limit: ENUMERATION_LIMIT,
        })?;
    let map = UserMap::new(ss, user, p)?;
    let keys = map.key_space();
    let w_count = p.pow(l as u32);
    let per_w = p.pow(x as u32);

    // Pass 1: n(s, a) over all states.
    let joint_size = keys * p as u128;
    let n_sa = (0..w_count as usize)
        .into_par_iter()
        .with_min_len(1024)
        .fold(
            || Counts::new(joint_size),
            |mut acc, wi| {
                let mut local = Vec::with_capacity(per_w as usize);
                let s = map.for_each_response(wi as u64, |k| local.push(k));
                let off = s * keys as u64;
                local.into_iter().for_each(|k| acc.add(off + k, 1));
                acc
            },
        )
        .reduce(|| Counts::new(joint_size), Counts::merge);
    let mut n_s = vec![0u64; p as usize];
    match &n_sa {
        Counts::Dense(v) => v.iter().enumerate().for_each(|(i, &n)| n_s[i / keys as usize] += n),
        Counts::Sparse(m) => m.iter().for_each(|(&k, &n)| n_s[(k / keys as u64) as usize] += n),
    }

    // Pass 2: n(w, a) per w, checked against n(s, a).
    let (h_wa, exact_zero) = (0..w_count as usize)
        .into_par_iter()
        .with_min_len(1024)
        .fold(
            || (ValueHistogram::new(), true),
            |(mut hist, mut zero), wi| {
                let mut local: HashMap<u64, u64> = HashMap::new();
                let s = map.for_each_response(wi as u64, |k| *local.entry(k).or_insert(0) += 1);
                let off = s * keys as u64;
                for (&k, &n) in &local {
                    *hist.entry(n).or_insert(0) += 1;
                    if zero && n as u128 * n_s[s as usize] as u128 != per_w as u128 * n_sa.get(off + k) as u128 {
                        zero = false;
                    }
                }
                (hist, zero)
            },
        )
        .reduce(|| (ValueHistogram::new(), true), |a, b| (merge(a.0, b.0), a.1 && b.1));

    if exact_zero {
        return Ok(GfLeakage {
            bits: 0.0,
            exact_zero,
            states,
        });
    }
    let mut h_s = ValueHistogram::new();
    n_s.iter().filter(|&&n| n > 0).for_each(|&n| *h_s.entry(n).or_insert(0) += 1);
    let t = states as f64;
    let nats = (xlogx_sum(&h_s) - xlogx_sum(&n_sa.histogram()) + xlogx_sum(&h_wa)) / t - x as f64 * (p as f64).ln();
    Ok(GfLeakage {
        bits: (nats / std::f64::consts::LN_2).max(0.0),
        exact_zero,
        states,
    })
}
