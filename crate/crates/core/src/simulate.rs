//! End-to-end protocol runs: sample messages and randomness, let every server
//! broadcast its single response, and decode at each user from the responses
//! it hears.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{add_mod, mul_mod, FieldSpec};
use crate::linalg::{IndexSet, Matrix};
use crate::transform::SecuredScheme;

/// Default correctness tolerance over the reals, relative to `1 + |expected|`.
pub const DEFAULT_TOL: f64 = 1e-6;

/// A field value produced by a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Symbol {
    Gf(u64),
    Real(f64),
}

impl std::fmt::Display for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Symbol::Gf(v) => write!(f, "{v}"),
            Symbol::Real(v) => write!(f, "{v:e}"),
        }
    }
}

#[derive(Debug, Clone)]
enum Coeffs {
    Gf { p: u64, f: Vec<Vec<u64>>, d: Vec<Vec<u64>>, e_aug: Vec<Vec<u64>> },
    Real { f: Vec<Vec<f64>>, d: Vec<Vec<f64>>, e_aug: Vec<Vec<f64>> },
}

fn residues(m: &Matrix) -> Vec<Vec<u64>> {
    m.to_residues().expect("prime field")
}

fn floats(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(|x| x.to_f64()).collect()).collect()
}

/// The matrices a run uses, detached from the validated scheme so that tests
/// can corrupt them.
#[derive(Debug, Clone)]
pub struct Protocol {
    coeffs: Coeffs,
    supports: Vec<IndexSet>,
    l: usize,
    x: usize,
}

impl Protocol {
    pub fn new(ss: &SecuredScheme) -> Self {
        let s = ss.base();
        let coeffs = match s.field() {
            FieldSpec::Prime(p) => Coeffs::Gf {
                p: p.get(),
                f: residues(s.f()),
                d: residues(s.d()),
                e_aug: residues(ss.e_aug()),
            },
            FieldSpec::Real => Coeffs::Real {
                f: floats(s.f()),
                d: floats(s.d()),
                e_aug: floats(ss.e_aug()),
            },
        };
        Protocol {
            coeffs,
            supports: (0..s.k()).map(|k| s.support(k)).collect(),
            l: s.l(),
            x: ss.x(),
        }
    }

    pub fn users(&self) -> usize {
        self.supports.len()
    }

    /// Overwrites one entry of `Ẽ` with an integer read in the protocol's field.
    pub fn corrupt_task(&mut self, server: usize, col: usize, value: i64) {
        match &mut self.coeffs {
            Coeffs::Gf { p, e_aug, .. } => e_aug[server][col] = value.rem_euclid(*p as i64) as u64,
            Coeffs::Real { e_aug, .. } => e_aug[server][col] = value as f64,
        }
    }

    /// Responses and per-user decodes for a fixed augmented message vector
    /// `w̃ = [w; c]`.
    pub fn evaluate(&self, w_aug: &[Symbol]) -> Result<Evaluation> {
        if w_aug.len() != self.l + self.x {
            return Err(Error::InvalidArgument(format!(
                "augmented message vector has length {}, expected {}",
                w_aug.len(),
                self.l + self.x
            )));
        }
        match &self.coeffs {
            Coeffs::Gf { p, f, d, e_aug } => {
                let p = *p;
                let v: Vec<u64> = w_aug
                    .iter()
                    .map(|s| match s {
                        Symbol::Gf(a) if *a < p => Ok(*a),
                        other => Err(Error::InvalidArgument(format!("{other} is not an element of GF({p})"))),
                    })
                    .collect::<Result<_>>()?;
                let dot = |row: &[u64], v: &[u64]| row.iter().zip(v).fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b, p), p));
                let responses: Vec<u64> = e_aug.iter().map(|row| dot(row, &v)).collect();
                let users = (0..self.users())
                    .map(|k| {
                        let heard = self.mask(k, &responses, 0);
                        (Symbol::Gf(dot(&f[k], &v[..self.l])), Symbol::Gf(dot(&d[k], &heard)))
                    })
                    .collect();
                Ok(Evaluation {
                    responses: responses.into_iter().map(Symbol::Gf).collect(),
                    users,
                })
            }
            Coeffs::Real { f, d, e_aug } => {
                let v: Vec<f64> = w_aug
                    .iter()
                    .map(|s| match s {
                        Symbol::Real(a) => Ok(*a),
                        Symbol::Gf(a) => Err(Error::InvalidArgument(format!("{a} is not a real sample"))),
                    })
                    .collect::<Result<_>>()?;
                let dot = |row: &[f64], v: &[f64]| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
                let responses: Vec<f64> = e_aug.iter().map(|row| dot(row, &v)).collect();
                let users = (0..self.users())
                    .map(|k| {
                        let heard = self.mask(k, &responses, 0.0);
                        (Symbol::Real(dot(&f[k], &v[..self.l])), Symbol::Real(dot(&d[k], &heard)))
                    })
                    .collect();
                Ok(Evaluation {
                    responses: responses.into_iter().map(Symbol::Real).collect(),
                    users,
                })
            }
        }
    }

    /// Responses with everything outside `Sup(d_k)` replaced by `zero`.
    fn mask<T: Copy>(&self, user: usize, responses: &[T], zero: T) -> Vec<T> {
        let sup = &self.supports[user];
        responses
            .iter()
            .enumerate()
            .map(|(n, &a)| if sup.contains(n) { a } else { zero })
            .collect()
    }

    fn sample(&self, rng: &mut ChaCha8Rng, params: &SimParams) -> Vec<Symbol> {
        match &self.coeffs {
            Coeffs::Gf { p, .. } => (0..self.l + self.x).map(|_| Symbol::Gf(rng.gen_range(0..*p))).collect(),
            Coeffs::Real { .. } => (0..self.l + self.x)
                .map(|i| {
                    let sigma = if i < self.l { params.sigma_w } else { params.sigma_c };
                    Symbol::Real(sigma * standard_normal(rng))
                })
                .collect(),
        }
    }
}

/// Box–Muller transform of two uniforms; the second variate is discarded so
/// each draw consumes a fixed amount of the stream.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub responses: Vec<Symbol>,
    /// Per user: (expected `⟨f_k, w⟩`, recovered `d_kᵀ A`).
    pub users: Vec<(Symbol, Symbol)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimParams {
    pub seed: u64,
    pub sigma_w: f64,
    pub sigma_c: f64,
    pub tol: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            seed: 0,
            sigma_w: 1.0,
            sigma_c: 1.0,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserResult {
    /// One-based.
    pub user: usize,
    pub expected: Symbol,
    pub recovered: Symbol,
    pub matched: bool,
    /// `|recovered − expected|`; zero over GF(p) when matched.
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub trial: u64,
    pub users: Vec<UserResult>,
}

impl TrialOutcome {
    pub fn all_match(&self) -> bool {
        self.users.iter().all(|u| u.matched)
    }
}

/// Trial `t` draws from stream `t` of the generator seeded with `seed`, so
/// results do not depend on scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn judge(user: usize, expected: Symbol, recovered: Symbol, tol: f64) -> UserResult {
    let (matched, abs_error) = match (expected, recovered) {
        (Symbol::Real(e), Symbol::Real(r)) => {
            let err = (r - e).abs();
            (err <= tol * (1.0 + e.abs()), err)
        }
        (e, r) => (e == r, if e == r { 0.0 } else { 1.0 }),
    };
    UserResult {
        user: user + 1,
        expected,
        recovered,
        matched,
        abs_error,
    }
}

pub fn run_trial_indexed(p: &Protocol, params: &SimParams, trial: u64) -> TrialOutcome {
    let mut rng = trial_rng(params.seed, trial);
    let w_aug = p.sample(&mut rng, params);
    let eval = p.evaluate(&w_aug).expect("sampled vector has the right shape");
    TrialOutcome {
        seed: params.seed,
        trial,
        users: eval
            .users
            .into_iter()
            .enumerate()
            .map(|(k, (e, r))| judge(k, e, r, params.tol))
            .collect(),
    }
}

/// A single trial of a secured scheme.
pub fn run_trial(ss: &SecuredScheme, params: &SimParams) -> TrialOutcome {
    run_trial_indexed(&Protocol::new(ss), params, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub trials: u64,
    pub seed: u64,
    pub per_user_success_rate: Vec<f64>,
    pub success_rate: f64,
    pub per_user_max_abs_error: Vec<f64>,
    pub max_abs_error: f64,
    /// `σ_c/σ_w`; float cancellation error grows with it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_ratio: Option<f64>,
}

/// Runs `trials` independent trials in parallel. Outcomes are returned in
/// trial order when `keep` is set.
pub fn run_batch(p: &Protocol, params: &SimParams, trials: u64, keep: bool) -> Result<(BatchReport, Vec<TrialOutcome>)> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if matches!(p.coeffs, Coeffs::Real { .. })
        && !(params.sigma_w > 0.0 && params.sigma_c > 0.0 && params.sigma_w.is_finite() && params.sigma_c.is_finite())
    {
        return Err(Error::InvalidArgument("σ_w and σ_c must be positive and finite".into()));
    }
    let k = p.users();
    let outcomes: Vec<TrialOutcome> = (0..trials).into_par_iter().map(|t| run_trial_indexed(p, params, t)).collect();
    let mut hits = vec![0u64; k];
    let mut max_err = vec![0.0f64; k];
    for o in &outcomes {
        for (i, u) in o.users.iter().enumerate() {
            hits[i] += u.matched as u64;
            max_err[i] = max_err[i].max(u.abs_error);
        }
    }
    let report = BatchReport {
        trials,
        seed: params.seed,
        per_user_success_rate: hits.iter().map(|&h| h as f64 / trials as f64).collect(),
        success_rate: hits.iter().sum::<u64>() as f64 / (trials * k as u64) as f64,
        max_abs_error: max_err.iter().copied().fold(0.0, f64::max),
        per_user_max_abs_error: max_err,
        sigma_ratio: matches!(p.coeffs, Coeffs::Real { .. }).then(|| params.sigma_c / params.sigma_w),
    };
    Ok((report, if keep { outcomes } else { Vec::new() }))
}

/// Per-trial CSV: `trial,user,expected,recovered,match`.
pub fn write_csv<W: Write>(outcomes: &[TrialOutcome], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "user", "expected", "recovered", "match"])
        .map_err(|e| Error::Io(e.into()))?;
    for o in outcomes {
        for u in &o.users {
            w.write_record([
                o.trial.to_string(),
                u.user.to_string(),
                u.expected.to_string(),
                u.recovered.to_string(),
                u.matched.to_string(),
            ])
            .map_err(|e| Error::Io(e.into()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::reference;
    use crate::transform::secure;

    fn gf11() -> SecuredScheme {
        secure(&reference::scheme_in(FieldSpec::prime(11).unwrap())).unwrap()
    }

    #[test]
    fn gf11_batch_always_decodes() {
        let p = Protocol::new(&gf11());
        let params = SimParams { seed: 3, ..Default::default() };
        let (r, _) = run_batch(&p, &params, 1000, false).unwrap();
        assert_eq!(r.success_rate, 1.0);
        assert!(r.per_user_success_rate.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn real_large_randomness_decodes() {
        let ss = secure(&reference::scheme()).unwrap();
        let params = SimParams {
            seed: 11,
            sigma_w: 1.0,
            sigma_c: 1e6,
            tol: 1e-6,
        };
        let (r, _) = run_batch(&Protocol::new(&ss), &params, 500, false).unwrap();
        assert_eq!(r.success_rate, 1.0, "max error {}", r.max_abs_error);
        assert_eq!(r.sigma_ratio, Some(1e6));
    }

    #[test]
    fn zero_inputs_give_zero_outputs() {
        let p = Protocol::new(&gf11());
        let eval = p.evaluate(&[Symbol::Gf(0); 7]).unwrap();
        assert!(eval.responses.iter().all(|&a| a == Symbol::Gf(0)));
        assert!(eval.users.iter().all(|&(e, r)| e == Symbol::Gf(0) && r == Symbol::Gf(0)));
    }

    #[test]
    fn corrupted_task_breaks_affected_users() {
        let mut p = Protocol::new(&gf11());
        p.corrupt_task(4, 1, 5); // server 5 feeds users 3 and 4 only
        let (r, _) = run_batch(&p, &SimParams::default(), 200, false).unwrap();
        assert_eq!(r.per_user_success_rate[0], 1.0);
        assert_eq!(r.per_user_success_rate[1], 1.0);
        assert!(r.per_user_success_rate[2] < 1.0);
        assert!(r.per_user_success_rate[3] < 1.0);
    }

    #[test]
    fn single_trial_and_determinism() {
        let ss = gf11();
        let params = SimParams { seed: 42, ..Default::default() };
        let a = run_trial(&ss, &params);
        assert_eq!(a, run_trial(&ss, &params));
        assert!(a.all_match());
        let (r, outs) = run_batch(&Protocol::new(&ss), &params, 1, true).unwrap();
        assert_eq!(r.trials, 1);
        assert_eq!(outs, vec![a]);
    }

    #[test]
    fn batches_are_reproducible() {
        let ss = secure(&reference::scheme()).unwrap();
        let p = Protocol::new(&ss);
        let params = SimParams { seed: 9, sigma_c: 50.0, ..Default::default() };
        let (_, a) = run_batch(&p, &params, 64, true).unwrap();
        let (_, b) = run_batch(&p, &params, 64, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decoding_ignores_unheard_responses() {
        let ss = gf11();
        let p = Protocol::new(&ss);
        let mut rng = trial_rng(5, 0);
        let w = p.sample(&mut rng, &SimParams::default());
        let full = p.evaluate(&w).unwrap();
        let Coeffs::Gf { p: q, d, .. } = &p.coeffs else { unreachable!() };
        for (k, (_, rec)) in full.users.iter().enumerate() {
            let unmasked = full
                .responses
                .iter()
                .zip(&d[k])
                .fold(0, |acc, (a, &c)| match a {
                    Symbol::Gf(a) => add_mod(acc, mul_mod(*a, c, *q), *q),
                    Symbol::Real(_) => unreachable!(),
                });
            assert_eq!(*rec, Symbol::Gf(unmasked));
        }
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut rng = trial_rng(1, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| standard_normal(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.02 && (var - 1.0).abs() < 0.02);
    }

    #[test]
    fn csv_layout() {
        let ss = gf11();
        let (_, outs) = run_batch(&Protocol::new(&ss), &SimParams::default(), 2, true).unwrap();
        let mut buf = Vec::new();
        write_csv(&outs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "trial,user,expected,recovered,match");
        assert_eq!(lines.len(), 1 + 2 * 4);
        assert!(lines[1].starts_with("0,1,"));
    }
}
