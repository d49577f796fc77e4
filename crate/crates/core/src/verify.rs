//! Seeded experiment harness for operator-norm inequalities on random
//! matrices, and a hill-climbing search for the commutator square-root
//! constant.
//!
//! Every sample draws from its own ChaCha stream whose seed is derived from
//! the master seed and the sample index, so results do not depend on how
//! rayon schedules the work, and any single sample can be replayed from its
//! recorded seed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::approx::{model, ModelKind};
use crate::error::{Error, Result};
use crate::matcalc::{hermitian_calculus, matrix_exp, max_eigenvalue, min_eigenvalue, op_norm, real_part, ScalarFn};
use crate::ncpoly::VarKind;
use crate::relations::{parse_relations, residual, RelationSystem};
use crate::scalar::{cplx, Complex};
use crate::{Assignment64, Matrix64, Policy64};

/// Denominators `|ab - ba|` below this are skipped in ratio searches.
pub const COMMUTATOR_SKIP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    /// Complex Ginibre entries with variance `1/dim`.
    General,
    /// `(g + g*)/2`
    Hermitian,
    /// `c* c`
    Positive,
    /// `g / |g|`
    Contraction,
    /// Q factor of a Ginibre matrix with the phase ambiguity removed.
    Unitary,
    /// `(x, x + c* c)` with `x = d* d`.
    OrderPair,
}

impl EnsembleKind {
    pub fn for_var(kind: VarKind) -> Self {
        match kind {
            VarKind::General => EnsembleKind::General,
            VarKind::Hermitian => EnsembleKind::Hermitian,
            VarKind::Positive => EnsembleKind::Positive,
            VarKind::Unitary => EnsembleKind::Unitary,
            VarKind::Contraction => EnsembleKind::Contraction,
        }
    }
}

/// A reproducible family of random samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ensemble {
    pub kind: EnsembleKind,
    /// Sample `i` has dimension `dims[i % dims.len()]`.
    pub dims: Vec<usize>,
    pub seed: u64,
    pub count: usize,
}

impl Ensemble {
    pub fn new(kind: EnsembleKind, dim: usize, seed: u64, count: usize) -> Result<Self> {
        Self::with_dims(kind, vec![dim], seed, count)
    }

    pub fn with_dims(kind: EnsembleKind, dims: Vec<usize>, seed: u64, count: usize) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidArgument("ensemble dimensions must be positive".into()));
        }
        if count == 0 {
            return Err(Error::InvalidArgument("ensemble count must be positive".into()));
        }
        Ok(Ensemble { kind, dims, seed, count })
    }

    pub fn dim_of(&self, index: usize) -> usize {
        self.dims[index % self.dims.len()]
    }

    pub fn sample_seed(&self, index: usize) -> u64 {
        sample_seed(self.seed, index as u64)
    }

    /// The matrices of sample `index` (two for order pairs, one otherwise).
    pub fn sample(&self, index: usize) -> Vec<Matrix64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.sample_seed(index));
        draw(self.kind, self.dim_of(index), &mut rng)
    }

    fn require(&self, kind: EnsembleKind, what: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!("{what} needs a {kind:?} ensemble, got {:?}", self.kind)));
        }
        Ok(())
    }

    fn params(&self) -> BTreeMap<String, Value> {
        BTreeMap::from([
            ("kind".to_string(), json!(self.kind)),
            ("dims".to_string(), json!(self.dims)),
            ("seed".to_string(), json!(self.seed)),
            ("count".to_string(), json!(self.count)),
        ])
    }
}

/// SplitMix64 of `master + (index + 1) * golden`; a counter-based seed derivation.
pub fn sample_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn ginibre<R: Rng>(dim: usize, rng: &mut R) -> Matrix64 {
    let s = (2.0 * dim as f64).sqrt().recip();
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re = normal(rng);
        let im = normal(rng);
        entries.push(cplx(re * s, im * s));
    }
    Matrix64::from_fn(dim, |i, j| entries[i * dim + j])
}

fn gram(c: &Matrix64) -> Matrix64 {
    real_part(&(&c.adjoint() * c))
}

fn normalized(m: Matrix64) -> Matrix64 {
    let n = op_norm(&m);
    if n > 0.0 {
        m.scale_real(n.recip())
    } else {
        m
    }
}

fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> Matrix64 {
    let qr = ginibre(dim, rng).into_dmatrix().qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<Complex<f64>> = (0..dim)
        .map(|i| {
            let d = r[(i, i)];
            let n = d.norm();
            if n > 0.0 {
                d / n
            } else {
                cplx(1.0, 0.0)
            }
        })
        .collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases));
    Matrix64::from_dmatrix(q * d).expect("finite unitary")
}

/// One sample of the given kind.
pub fn draw<R: Rng>(kind: EnsembleKind, dim: usize, rng: &mut R) -> Vec<Matrix64> {
    match kind {
        EnsembleKind::General => vec![ginibre(dim, rng)],
        EnsembleKind::Hermitian => vec![real_part(&ginibre(dim, rng))],
        EnsembleKind::Positive => vec![gram(&ginibre(dim, rng))],
        EnsembleKind::Contraction => vec![normalized(ginibre(dim, rng))],
        EnsembleKind::Unitary => vec![haar_unitary(dim, rng)],
        EnsembleKind::OrderPair => {
            let x = gram(&ginibre(dim, rng));
            let y = real_part(&(&x + &gram(&ginibre(dim, rng))));
            vec![x, y]
        }
    }
}

fn draw_one<R: Rng>(kind: EnsembleKind, dim: usize, rng: &mut R) -> Matrix64 {
    draw(kind, dim, rng).swap_remove(0)
}

fn max_f(a: f64, b: f64) -> f64 {
    if b > a {
        b
    } else {
        a
    }
}

/// Outcome of one experiment, serialized as one JSON line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub params: BTreeMap<String, Value>,
    /// Samples tested (skipped samples excluded).
    pub samples: usize,
    pub skipped: usize,
    /// Largest signed violation; positive means the inequality failed by that much.
    pub max_violation: f64,
    pub threshold: f64,
    /// True when the experiment is expected to exhibit a violation.
    pub expect_violation: bool,
    pub passed: bool,
    pub worst_index: Option<usize>,
    pub worst_seed: Option<u64>,
    /// Wall time; left empty unless a caller measures it, so reports stay reproducible.
    pub runtime_ms: Option<f64>,
    pub stats: BTreeMap<String, f64>,
}

impl ExperimentReport {
    fn judge(&mut self) {
        let found = self.max_violation > self.threshold;
        self.passed = found == self.expect_violation;
    }

    /// Marks the experiment as a counterexample screen: it passes only if a violation is found.
    pub fn expecting_violation(mut self) -> Self {
        self.expect_violation = true;
        self.judge();
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

struct Tally {
    samples: usize,
    skipped: usize,
    worst: Option<(f64, usize, u64)>,
}

impl Tally {
    /// Reduces per-sample violations in index order; ties keep the earliest sample.
    fn of(results: &[(usize, u64, Option<f64>)]) -> Self {
        let mut t = Tally { samples: 0, skipped: 0, worst: None };
        for &(i, seed, v) in results {
            match v {
                None => t.skipped += 1,
                Some(v) => {
                    t.samples += 1;
                    if t.worst.is_none_or(|(w, _, _)| v > w) {
                        t.worst = Some((v, i, seed));
                    }
                }
            }
        }
        t
    }

    fn report(self, id: &str, params: BTreeMap<String, Value>, threshold: f64) -> ExperimentReport {
        let mut r = ExperimentReport {
            id: id.to_string(),
            params,
            samples: self.samples,
            skipped: self.skipped,
            max_violation: self.worst.map_or(f64::NEG_INFINITY, |w| w.0),
            threshold,
            expect_violation: false,
            passed: false,
            worst_index: self.worst.map(|w| w.1),
            worst_seed: self.worst.map(|w| w.2),
            runtime_ms: None,
            stats: BTreeMap::new(),
        };
        r.judge();
        r
    }
}

fn run_samples<F>(e: &Ensemble, f: F) -> Result<Vec<(usize, u64, Option<f64>)>>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Option<f64>> + Sync,
{
    (0..e.count)
        .into_par_iter()
        .map(|i| {
            let seed = e.sample_seed(i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((i, seed, f(e.dim_of(i), &mut rng)?))
        })
        .collect()
}

/// `(|e^a| - |e^{Re a}|) / max(1, |a|)`.
pub fn exp_norm_gap(a: &Matrix64, pol: &Policy64) -> Result<f64> {
    let lhs = op_norm(&matrix_exp(a));
    let rhs = max_eigenvalue(&real_part(a), pol)?.exp();
    Ok((lhs - rhs) / max_f(1.0, op_norm(a)))
}

/// `|e^a| <= |e^{Re a}|` over a general ensemble; threshold `tol_eq`.
pub fn exp_norm_experiment(e: &Ensemble, pol: &Policy64) -> Result<ExperimentReport> {
    e.require(EnsembleKind::General, "expnorm")?;
    let results = run_samples(e, |dim, rng| Ok(Some(exp_norm_gap(&ginibre(dim, rng), pol)?)))?;
    Ok(Tally::of(&results).report("expnorm", e.params(), pol.tol_eq))
}

/// `|a^v x b^(1-v) + a^(1-v) x b^v| - |a x + x b|`, unscaled.
pub fn heinz_gap(a: &Matrix64, b: &Matrix64, x: &Matrix64, nu: f64, pol: &Policy64) -> Result<f64> {
    let p = |m: &Matrix64, t: f64| hermitian_calculus(&ScalarFn::Power(t), m, pol);
    let lhs = &(&(&p(a, nu)? * x) * &p(b, 1.0 - nu)?) + &(&(&p(a, 1.0 - nu)? * x) * &p(b, nu)?);
    let rhs = &(a * x) + &(x * b);
    Ok(op_norm(&lhs) - op_norm(&rhs))
}

/// The grid `0, 0.1, ..., 1`.
pub fn default_nu_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// Heinz-type mean inequality over positive `a, b` and general `x`;
/// threshold `10 tol_eq`.
pub fn heinz_experiment(e: &Ensemble, nus: &[f64], pol: &Policy64) -> Result<ExperimentReport> {
    e.require(EnsembleKind::Positive, "heinz")?;
    if nus.is_empty() || nus.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument("nu grid must be a nonempty subset of [0, 1]".into()));
    }
    let endpoint_gap = std::sync::Mutex::new(0.0f64);
    let results = run_samples(e, |dim, rng| {
        let a = draw_one(EnsembleKind::Positive, dim, rng);
        let b = draw_one(EnsembleKind::Positive, dim, rng);
        let x = ginibre(dim, rng);
        let scale = [&a, &b, &x].iter().map(|m| op_norm(m)).fold(1.0, max_f);
        let mut worst = f64::NEG_INFINITY;
        for &nu in nus {
            let g = heinz_gap(&a, &b, &x, nu, pol)?;
            if nu == 0.0 || nu == 1.0 {
                let mut eg = endpoint_gap.lock().unwrap();
                *eg = max_f(*eg, g.abs());
            }
            worst = max_f(worst, g / scale);
        }
        Ok(Some(worst))
    })?;
    let mut params = e.params();
    params.insert("nu".into(), json!(nus));
    let mut r = Tally::of(&results).report("heinz", params, 10.0 * pol.tol_eq);
    r.stats.insert("endpoint_gap".into(), endpoint_gap.into_inner().unwrap());
    Ok(r)
}

/// Test function for the monotonicity experiment: `t -> t^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFn(pub f64);

impl PowerFn {
    /// Powers in `(0, 1]` are operator monotone; `2` is the standard non-example.
    pub fn is_operator_monotone(self) -> bool {
        self.0 > 0.0 && self.0 <= 1.0
    }
}

/// `-min eig(f(y) - f(x)) / max(1, |x|, |y|)`.
pub fn monotone_gap(f: PowerFn, x: &Matrix64, y: &Matrix64, pol: &Policy64) -> Result<f64> {
    let fx = hermitian_calculus(&ScalarFn::Power(f.0), x, pol)?;
    let fy = hermitian_calculus(&ScalarFn::Power(f.0), y, pol)?;
    let scale = max_f(1.0, max_f(op_norm(x), op_norm(y)));
    Ok(-min_eigenvalue(&real_part(&(&fy - &fx)), pol)? / scale)
}

/// Tests `x <= y => f(x) <= f(y)` over order pairs; threshold `10 tol_psd`.
/// For `f` not operator monotone the experiment passes only if it finds a violation.
pub fn monotone_experiment(f: PowerFn, e: &Ensemble, pol: &Policy64) -> Result<ExperimentReport> {
    e.require(EnsembleKind::OrderPair, "monotone")?;
    if !(f.is_operator_monotone() || f.0 == 2.0) {
        return Err(Error::InvalidArgument(format!("power {} must lie in (0, 1] or equal 2", f.0)));
    }
    let results = run_samples(e, |dim, rng| {
        let pair = draw(EnsembleKind::OrderPair, dim, rng);
        Ok(Some(monotone_gap(f, &pair[0], &pair[1], pol)?))
    })?;
    let mut params = e.params();
    params.insert("power".into(), json!(f.0));
    let r = Tally::of(&results).report("monotone", params, 10.0 * pol.tol_psd);
    Ok(if f.is_operator_monotone() { r } else { r.expecting_violation() })
}

/// Samples every declared variable from the ensemble of its kind and checks
/// the stated relations; the violation of a sample is the largest negative
/// margin. Threshold 0: margins already include the tolerance slack.
pub fn positivity_transfer_check(
    system: &RelationSystem<f64>,
    dims: &[usize],
    count: usize,
    seed: u64,
    pol: &Policy64,
) -> Result<ExperimentReport> {
    if system.stated.is_empty() {
        return Err(Error::EmptyList);
    }
    let e = Ensemble::with_dims(EnsembleKind::General, dims.to_vec(), seed, count)?;
    let min_eig = std::sync::Mutex::new(f64::INFINITY);
    let results = run_samples(&e, |dim, rng| {
        let mut a = Assignment64::new(dim);
        for v in system.vars.iter() {
            a.insert(v.name.clone(), draw_one(EnsembleKind::for_var(v.kind), dim, rng))?;
        }
        let mut worst = f64::NEG_INFINITY;
        for r in &system.stated {
            let verdict = residual(r, &a, pol)?;
            worst = max_f(worst, -verdict.margin);
            if let crate::relations::Relation::PolyPositive(p) = r {
                let l = min_eigenvalue(&real_part(&p.evaluate(&a, pol)?), pol)?;
                let mut m = min_eig.lock().unwrap();
                *m = m.min(l);
            }
        }
        Ok(Some(worst))
    })?;
    let mut params = BTreeMap::from([
        ("dims".to_string(), json!(dims)),
        ("seed".to_string(), json!(seed)),
        ("count".to_string(), json!(count)),
    ]);
    params.insert("relations".into(), json!(system.to_string()));
    let mut r = Tally::of(&results).report("positivity", params, 0.0);
    let m = min_eig.into_inner().unwrap();
    if m.is_finite() {
        r.stats.insert("min_eigenvalue".into(), m);
    }
    Ok(r)
}

/// `(clock, shiftmod)` as the variables `u`, `v`.
pub fn clock_shift_pair(dim: usize) -> Result<Assignment64> {
    Assignment64::from_pairs([("u", model(ModelKind::Clock, dim)?), ("v", model(ModelKind::ShiftMod, dim)?)])
}

/// Relation file of the soft torus with commutator bound `eps`.
pub fn soft_torus_source(eps: f64) -> String {
    format!("var u unitary;\nvar v unitary;\nrel norm(u v - v u) <= {eps:e};\n")
}

pub fn soft_torus(eps: f64) -> Result<RelationSystem<f64>> {
    Ok(parse_relations(&soft_torus_source(eps))?)
}

/// `2 sin(pi / n)`, the commutator norm of the `n`-dimensional clock and shift.
pub fn soft_torus_epsilon(n: usize) -> f64 {
    2.0 * (PI / n as f64).sin()
}

/// Checks the clock/shift pair against its soft-torus relations with
/// `eps = 2 sin(pi/n) + offset` for every listed `n`.
pub fn soft_torus_experiment(dims: &[usize], offset: f64, pol: &Policy64) -> Result<ExperimentReport> {
    let mut results = Vec::with_capacity(dims.len());
    for (i, &n) in dims.iter().enumerate() {
        let sys = soft_torus(soft_torus_epsilon(n) + offset)?;
        let rep = crate::relations::check_all(&sys.relations(), &clock_shift_pair(n)?, pol)?;
        results.push((i, n as u64, Some(-rep.verdict.margin)));
    }
    let params = BTreeMap::from([("dims".to_string(), json!(dims)), ("offset".to_string(), json!(offset))]);
    Ok(Tally::of(&results).report("softtorus", params, 0.0))
}

/// `|a b^(1/2) - b^(1/2) a| / |ab - ba|^(1/2)`, or `None` when `|ab - ba|`
/// is below [`COMMUTATOR_SKIP`].
pub fn commutator_ratio(a: &Matrix64, b: &Matrix64, pol: &Policy64) -> Result<Option<f64>> {
    let root = hermitian_calculus(&ScalarFn::Power(0.5), b, pol)?;
    Ok(ratio_with_root(a, b, &root))
}

fn ratio_with_root(a: &Matrix64, b: &Matrix64, root: &Matrix64) -> Option<f64> {
    let den = op_norm(&a.commutator(b));
    if den < COMMUTATOR_SKIP {
        return None;
    }
    Some(op_norm(&a.commutator(root)) / den.sqrt())
}

/// The ratio with `a` rescaled to norm one: `rho(a, b) / |a|^(1/2)`. This is
/// the supremum of the ratio over contractions on the ray through `a`.
fn contraction_ratio(a: &Matrix64, b: &Matrix64, root: &Matrix64) -> Option<f64> {
    let n = op_norm(a);
    if n == 0.0 {
        return None;
    }
    ratio_with_root(a, b, root).map(|r| r / n.sqrt())
}

/// The real 2x2 search lattice: entries of `a` in `{-1, -1/2, 0, 1/2, 1}`
/// (not all zero) and `s = [[s1, s2], [s2, s3]]` with `s1, s3` in
/// `{1/2, 1, 3/2}`, `s2` in `{-1/2, -1/4, 0, 1/4, 1/2}` and smallest
/// eigenvalue at least `1/4`; `b = s^2`.
pub mod lattice {
    use super::*;

    pub const A_VALUES: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
    pub const DIAG_VALUES: [f64; 3] = [0.5, 1.0, 1.5];
    pub const OFF_VALUES: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.5];
    pub const MIN_EIGENVALUE: f64 = 0.25;
    const RADIX: [usize; 7] = [5, 5, 5, 5, 3, 5, 3];

    pub type Point = [usize; 7];

    pub fn s_matrix(p: &Point) -> [f64; 3] {
        [DIAG_VALUES[p[4]], OFF_VALUES[p[5]], DIAG_VALUES[p[6]]]
    }

    pub fn a_entries(p: &Point) -> [f64; 4] {
        [A_VALUES[p[0]], A_VALUES[p[1]], A_VALUES[p[2]], A_VALUES[p[3]]]
    }

    pub fn is_valid(p: &Point) -> bool {
        let [s1, s2, s3] = s_matrix(p);
        let lmin = (s1 + s3) / 2.0 - ((s1 - s3).powi(2) / 4.0 + s2 * s2).sqrt();
        a_entries(p).iter().any(|&v| v != 0.0) && lmin >= MIN_EIGENVALUE
    }

    /// All valid points in mixed-radix order.
    pub fn points() -> Vec<Point> {
        let total: usize = RADIX.iter().product();
        (0..total)
            .map(|mut k| {
                let mut p = [0; 7];
                for i in (0..7).rev() {
                    p[i] = k % RADIX[i];
                    k /= RADIX[i];
                }
                p
            })
            .filter(is_valid)
            .collect()
    }

    /// Valid points one lattice step away in one coordinate.
    pub fn neighbors(p: &Point) -> Vec<Point> {
        let mut out = Vec::new();
        for i in 0..7 {
            if p[i] > 0 {
                let mut q = *p;
                q[i] -= 1;
                out.push(q);
            }
            if p[i] + 1 < RADIX[i] {
                let mut q = *p;
                q[i] += 1;
                out.push(q);
            }
        }
        out.retain(is_valid);
        out
    }

    pub fn matrices(p: &Point) -> (Matrix64, Matrix64) {
        let [a0, a1, a2, a3] = a_entries(p);
        let [s1, s2, s3] = s_matrix(p);
        let a = Matrix64::from_real_rows(&[&[a0, a1], &[a2, a3]]).expect("2x2");
        let s = Matrix64::from_real_rows(&[&[s1, s2], &[s2, s3]]).expect("2x2");
        (a, s)
    }

    /// Normalized ratio at `p`, using `s` itself as the square root of `b = s^2`.
    pub fn ratio(p: &Point) -> Option<f64> {
        let (a, s) = matrices(p);
        contraction_ratio(&a, &(&s * &s), &s)
    }
}

/// Where the commutator search looks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchDomain {
    /// Exhaustible 2x2 real lattice; see [`lattice`].
    Lattice,
    /// Complex matrices; restart `r` uses dimension `dims[r % dims.len()]`.
    Continuous { dims: Vec<usize>, steps_per_restart: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub report: ExperimentReport,
    pub max_ratio: Option<f64>,
    /// Running maximum after each evaluation (lattice) or restart (continuous).
    pub running_max: Vec<f64>,
    /// Matrices attaining `max_ratio`, `a` rescaled to norm one.
    pub witness: Option<(Matrix64, Matrix64)>,
}

/// Result of one continuous hill climb.
#[derive(Clone, Debug, PartialEq)]
pub struct Restart {
    pub seed: u64,
    pub dim: usize,
    pub evaluations: usize,
    pub skipped: usize,
    pub best: Option<(f64, Matrix64, Matrix64)>,
}

/// Maximizes the normalized commutator ratio over `a` (rescaled to norm one)
/// and `b = c* c` (rescaled to norm one).
///
/// Lattice mode visits the lattice from a seeded permutation of restarts,
/// climbing to the best unvisited neighbor while it improves; every point is
/// evaluated at most once, so a budget at least the lattice size makes the
/// search exhaustive. Continuous mode runs independent seeded restarts of
/// coordinate-wise Gaussian perturbation hill climbing.
pub fn commutator_sqrt_search(domain: &SearchDomain, budget: usize, seed: u64, pol: &Policy64) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::InvalidArgument("search budget must be positive".into()));
    }
    match domain {
        SearchDomain::Lattice => Ok(lattice_search(budget, seed)),
        SearchDomain::Continuous { dims, steps_per_restart } => {
            continuous_search(dims, (*steps_per_restart).max(1), budget, seed, pol)
        }
    }
}

fn lattice_search(budget: usize, seed: u64) -> SearchOutcome {
    let points = lattice::points();
    let index: BTreeMap<lattice::Point, usize> = points.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut visited = vec![false; points.len()];
    let mut evals = 0usize;
    let mut skipped = 0usize;
    let mut best: Option<(f64, usize, usize)> = None;
    let mut running = Vec::new();
    let mut eval = |i: usize, visited: &mut Vec<bool>, evals: &mut usize| -> Option<f64> {
        visited[i] = true;
        *evals += 1;
        let r = lattice::ratio(&points[i]);
        match r {
            None => skipped += 1,
            Some(v) if best.is_none_or(|b| v > b.0) => best = Some((v, i, *evals - 1)),
            _ => {}
        }
        running.push(best.map_or(f64::NEG_INFINITY, |b| b.0));
        r
    };
    let mut cursor = 0;
    'restarts: while evals < budget {
        while cursor < order.len() && visited[order[cursor]] {
            cursor += 1;
        }
        let Some(&start) = order.get(cursor) else { break };
        let mut cur = start;
        let mut cur_val = eval(cur, &mut visited, &mut evals).unwrap_or(f64::NEG_INFINITY);
        loop {
            let mut step: Option<(f64, usize)> = None;
            for q in lattice::neighbors(&points[cur]) {
                let j = index[&q];
                if visited[j] {
                    continue;
                }
                if evals >= budget {
                    break 'restarts;
                }
                if let Some(v) = eval(j, &mut visited, &mut evals) {
                    if step.is_none_or(|s| v > s.0) {
                        step = Some((v, j));
                    }
                }
            }
            match step {
                Some((v, j)) if v > cur_val => {
                    cur = j;
                    cur_val = v;
                }
                _ => break,
            }
        }
    }
    let params = BTreeMap::from([
        ("mode".to_string(), json!("lattice")),
        ("budget".to_string(), json!(budget)),
        ("seed".to_string(), json!(seed)),
        ("lattice_size".to_string(), json!(points.len())),
    ]);
    let mut report = ExperimentReport {
        id: "commutator".into(),
        params,
        samples: evals - skipped,
        skipped,
        max_violation: best.map_or(f64::NEG_INFINITY, |b| b.0 - 1.0),
        threshold: 0.0,
        expect_violation: false,
        passed: false,
        worst_index: best.map(|b| b.2),
        worst_seed: best.map(|_| seed),
        runtime_ms: None,
        stats: BTreeMap::new(),
    };
    report.judge();
    if let Some(b) = best {
        report.stats.insert("max_ratio".into(), b.0);
    }
    let witness = best.map(|b| {
        let (a, s) = lattice::matrices(&points[b.1]);
        (a.scale_real(op_norm(&a).recip()), &s * &s)
    });
    SearchOutcome { report, max_ratio: best.map(|b| b.0), running_max: running, witness }
}

fn ratio_of(a: &Matrix64, c: &Matrix64, pol: &Policy64) -> Result<Option<(f64, Matrix64, Matrix64)>> {
    let b = normalized(gram(c));
    let root = hermitian_calculus(&ScalarFn::Power(0.5), &b, pol)?;
    let a = normalized(a.clone());
    Ok(contraction_ratio(&a, &b, &root).map(|r| (r, a, b)))
}

fn perturb(m: &Matrix64, k: usize, delta: f64) -> Matrix64 {
    let n = m.dim();
    let (idx, imag) = (k / 2, k % 2 == 1);
    let mut d = m.clone().into_dmatrix();
    let z = &mut d[(idx / n, idx % n)];
    if imag {
        z.im += delta;
    } else {
        z.re += delta;
    }
    Matrix64::from_dmatrix(d).expect("finite perturbation")
}

/// One continuous hill climb, replayable from its seed alone.
pub fn replay_restart(seed: u64, dim: usize, evaluations: usize, pol: &Policy64) -> Result<Restart> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = normalized(ginibre(dim, &mut rng));
    let mut c = ginibre(dim, &mut rng);
    let mut skipped = 0;
    let mut best = ratio_of(&a, &c, pol)?;
    if best.is_none() {
        skipped += 1;
    }
    let coords = 2 * dim * dim;
    let mut step = 0.3;
    for _ in 1..evaluations {
        let k = rng.random_range(0..2 * coords);
        let delta = step * normal(&mut rng);
        let (na, nc) = if k < coords { (perturb(&a, k, delta), c.clone()) } else { (a.clone(), perturb(&c, k - coords, delta)) };
        match ratio_of(&na, &nc, pol)? {
            None => skipped += 1,
            Some(cand) if best.as_ref().is_none_or(|b| cand.0 > b.0) => {
                best = Some(cand);
                a = normalized(na);
                c = nc;
                step = (step * 1.5).min(1.0);
            }
            Some(_) => step = (step * 0.8).max(1e-4),
        }
    }
    Ok(Restart { seed, dim, evaluations: evaluations.max(1), skipped, best })
}

fn continuous_search(dims: &[usize], steps: usize, budget: usize, seed: u64, pol: &Policy64) -> Result<SearchOutcome> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidArgument("search dimensions must be positive".into()));
    }
    let restarts = budget.div_ceil(steps);
    let runs: Vec<Restart> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let evals = if r + 1 == restarts { budget - steps * r } else { steps };
            replay_restart(sample_seed(seed, r as u64), dims[r % dims.len()], evals, pol)
        })
        .collect::<Result<_>>()?;
    let mut running = Vec::with_capacity(runs.len());
    let mut best: Option<(f64, usize)> = None;
    let (mut evals, mut skipped) = (0, 0);
    for (i, run) in runs.iter().enumerate() {
        evals += run.evaluations;
        skipped += run.skipped;
        if let Some((v, _, _)) = &run.best {
            if best.is_none_or(|b| *v > b.0) {
                best = Some((*v, i));
            }
        }
        running.push(best.map_or(f64::NEG_INFINITY, |b| b.0));
    }
    let params = BTreeMap::from([
        ("mode".to_string(), json!("continuous")),
        ("dims".to_string(), json!(dims)),
        ("budget".to_string(), json!(budget)),
        ("steps_per_restart".to_string(), json!(steps)),
        ("seed".to_string(), json!(seed)),
    ]);
    let mut report = ExperimentReport {
        id: "commutator".into(),
        params,
        samples: evals - skipped,
        skipped,
        max_violation: best.map_or(f64::NEG_INFINITY, |b| b.0 - 1.0),
        threshold: 0.0,
        expect_violation: false,
        passed: false,
        worst_index: best.map(|b| b.1),
        worst_seed: best.map(|b| runs[b.1].seed),
        runtime_ms: None,
        stats: BTreeMap::new(),
    };
    report.judge();
    if let Some(b) = best {
        report.stats.insert("max_ratio".into(), b.0);
    }
    let witness = best.and_then(|b| runs[b.1].best.as_ref().map(|(_, a, bb)| (a.clone(), bb.clone())));
    Ok(SearchOutcome { report, max_ratio: best.map(|b| b.0), running_max: running, witness })
}

/// Default seed of the reproduction suite.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// The full experiment suite at its default sizes.
pub fn reproduce_suite(seed: u64, pol: &Policy64) -> Result<Vec<ExperimentReport>> {
    let mut out = Vec::new();
    out.push(exp_norm_experiment(&Ensemble::new(EnsembleKind::General, 6, seed, 1000)?, pol)?);
    out.push(heinz_experiment(
        &Ensemble::with_dims(EnsembleKind::Positive, vec![3, 4, 5, 6], seed, 500)?,
        &default_nu_grid(),
        pol,
    )?);
    let lattice_size = lattice::points().len();
    out.push(commutator_sqrt_search(&SearchDomain::Lattice, lattice_size, seed, pol)?.report);
    let continuous = SearchDomain::Continuous { dims: vec![2, 3, 4, 5, 6], steps_per_restart: 200 };
    out.push(commutator_sqrt_search(&continuous, 100_000, seed, pol)?.report);
    let pairs = Ensemble::new(EnsembleKind::OrderPair, 4, seed, 1000)?;
    out.push(monotone_experiment(PowerFn(0.5), &pairs, pol)?);
    out.push(monotone_experiment(PowerFn(2.0), &pairs, pol)?);
    let dims: Vec<usize> = (2..=8).collect();
    let congruence = parse_relations("var x positive; var y; rel y* x y >= 0;")?;
    out.push(positivity_transfer_check(&congruence, &dims, 300, seed, pol)?);
    let fractional = parse_relations("var x positive; var y hermitian; rel x^(1/3) y x^(2/3) >= 0;")?;
    out.push(positivity_transfer_check(&fractional, &dims, 300, seed, pol)?.expecting_violation());
    out.push(soft_torus_experiment(&[2, 4, 8, 16], 1e-10, pol)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> Policy64 {
        Policy64::default()
    }

    #[test]
    fn seeds_are_counter_based() {
        let e = Ensemble::new(EnsembleKind::General, 3, 5, 10).unwrap();
        assert_eq!(e.sample(7), e.sample(7));
        assert_ne!(e.sample(6), e.sample(7));
        let mut rng = ChaCha8Rng::seed_from_u64(e.sample_seed(7));
        assert_eq!(draw(EnsembleKind::General, 3, &mut rng), e.sample(7));
        assert!(Ensemble::new(EnsembleKind::General, 0, 1, 1).is_err());
        assert!(Ensemble::new(EnsembleKind::General, 1, 1, 0).is_err());
    }

    #[test]
    fn ensemble_kinds_have_their_properties() {
        let p = pol();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = draw_one(EnsembleKind::Unitary, 5, &mut rng);
        assert!(crate::matcalc::unitary_defect(&u) < 1e-12);
        let c = draw_one(EnsembleKind::Contraction, 5, &mut rng);
        assert!((op_norm(&c) - 1.0).abs() < 1e-12);
        let pos = draw_one(EnsembleKind::Positive, 5, &mut rng);
        assert!(min_eigenvalue(&pos, &p).unwrap() > -1e-12);
        let pair = draw(EnsembleKind::OrderPair, 5, &mut rng);
        assert!(min_eigenvalue(&(&pair[1] - &pair[0]), &p).unwrap() > -1e-12);
    }

    #[test]
    fn exp_norm_examples() {
        let d = Matrix64::from_diagonal(&[cplx(0.5, 1.0), cplx(-1.0, 0.2), cplx(0.1, 0.0)]);
        assert!(exp_norm_gap(&d, &pol()).unwrap().abs() < 1e-12);
        for k in 0..=40 {
            let t = k as f64 * 0.25;
            let a = Matrix64::from_real_rows(&[&[0.0, t], &[0.0, 0.0]]).unwrap();
            let lhs = (t + (t * t + 4.0).sqrt()) / 2.0;
            assert!((op_norm(&matrix_exp(&a)) - lhs).abs() < 1e-12 * lhs.max(1.0));
            assert!(lhs <= (t / 2.0).exp() + 1e-12);
            assert!(exp_norm_gap(&a, &pol()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn heinz_endpoints_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = draw_one(EnsembleKind::Positive, 4, &mut rng);
        let b = draw_one(EnsembleKind::Positive, 4, &mut rng);
        let x = ginibre(4, &mut rng);
        assert_eq!(heinz_gap(&a, &b, &x, 0.0, &pol()).unwrap(), 0.0);
        assert_eq!(heinz_gap(&a, &b, &x, 1.0, &pol()).unwrap(), 0.0);
        let i = Matrix64::identity(4);
        assert!(heinz_gap(&i, &i, &x, 0.5, &pol()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn monotone_square_counterexample() {
        let x = Matrix64::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let y = Matrix64::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(min_eigenvalue(&(&y - &x), &pol()).unwrap() >= 0.0);
        let gap = monotone_gap(PowerFn(2.0), &x, &y, &pol()).unwrap();
        let scale = op_norm(&y);
        // y^2 - x^2 = [[3, 1], [1, 0]] has eigenvalue (3 - sqrt 13) / 2
        assert!((gap * scale - (13f64.sqrt() - 3.0) / 2.0).abs() < 1e-12);
        assert!(monotone_gap(PowerFn(1.0), &x, &y, &pol()).unwrap() <= 0.0);
    }

    #[test]
    fn small_experiments_pass() {
        let p = pol();
        let e = Ensemble::new(EnsembleKind::General, 4, 3, 50).unwrap();
        let r = exp_norm_experiment(&e, &p).unwrap();
        assert!(r.passed && r.samples == 50);
        assert_eq!(r, exp_norm_experiment(&e, &p).unwrap());
        let pairs = Ensemble::new(EnsembleKind::OrderPair, 3, 3, 200).unwrap();
        assert!(monotone_experiment(PowerFn(0.5), &pairs, &p).unwrap().passed);
        let sq = monotone_experiment(PowerFn(2.0), &pairs, &p).unwrap();
        assert!(sq.expect_violation && sq.passed && sq.max_violation > 0.0);
        assert!(monotone_experiment(PowerFn(3.0), &pairs, &p).is_err());
        assert!(exp_norm_experiment(&pairs, &p).is_err());
    }

    #[test]
    fn positivity_screens() {
        let p = pol();
        let dims: Vec<usize> = (2..=5).collect();
        let ok: RelationSystem<f64> = parse_relations("var x positive; rel x >= 0;").unwrap();
        assert!(positivity_transfer_check(&ok, &dims, 40, 1, &p).unwrap().passed);
        let cong: RelationSystem<f64> = parse_relations("var x positive; var y; rel y* x y >= 0;").unwrap();
        assert!(positivity_transfer_check(&cong, &dims, 40, 1, &p).unwrap().passed);
        let frac: RelationSystem<f64> =
            parse_relations("var x positive; var y hermitian; rel x^(1/3) y x^(2/3) >= 0;").unwrap();
        let r = positivity_transfer_check(&frac, &dims, 40, 1, &p).unwrap();
        assert!(!r.passed && r.max_violation > 0.0);
    }

    #[test]
    fn clock_shift_examples() {
        for (n, want) in [(2, 2.0), (4, 2f64.sqrt())] {
            let a = clock_shift_pair(n).unwrap();
            let c = op_norm(&a.get("u").unwrap().commutator(a.get("v").unwrap()));
            assert!((c - want).abs() < 1e-12);
            assert!((soft_torus_epsilon(n) - want).abs() < 1e-15);
        }
        assert!(soft_torus_experiment(&[2, 4, 8], 1e-10, &pol()).unwrap().passed);
        assert!(!soft_torus_experiment(&[8], -1e-3, &pol()).unwrap().passed);
    }

    #[test]
    fn commutator_ratio_skips_and_scales() {
        let p = pol();
        let a = Matrix64::from_real_rows(&[&[0.5, 0.0], &[0.0, -0.2]]).unwrap();
        let b = Matrix64::from_real_diagonal(&[1.0, 2.0]);
        assert_eq!(commutator_ratio(&a, &b, &p).unwrap(), None);
        assert_eq!(commutator_ratio(&b, &b, &p).unwrap(), None);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = draw_one(EnsembleKind::Contraction, 4, &mut rng);
        let b = draw_one(EnsembleKind::Positive, 4, &mut rng);
        let r = commutator_ratio(&a, &b, &p).unwrap().unwrap();
        for s in [1e-3, 0.5, 7.0, 1e3] {
            let rs = commutator_ratio(&a, &b.scale_real(s), &p).unwrap().unwrap();
            assert!((rs - r).abs() < 1e-10 * r);
        }
    }

    #[test]
    fn lattice_shape() {
        let pts = lattice::points();
        assert_eq!(pts.len(), 24336);
        assert!(pts.iter().all(lattice::is_valid));
    }

    #[test]
    fn lattice_search_small_budget_is_deterministic() {
        let p = pol();
        let a = commutator_sqrt_search(&SearchDomain::Lattice, 500, 4, &p).unwrap();
        let b = commutator_sqrt_search(&SearchDomain::Lattice, 500, 4, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.running_max.len(), 500);
        assert!(a.running_max.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn continuous_search_replays() {
        let p = pol();
        let dom = SearchDomain::Continuous { dims: vec![2, 3], steps_per_restart: 30 };
        let out = commutator_sqrt_search(&dom, 200, 8, &p).unwrap();
        assert_eq!(out.report.samples + out.report.skipped, 200);
        assert_eq!(out.running_max.len(), 7);
        assert!(out.running_max.windows(2).all(|w| w[1] >= w[0]));
        let i = out.report.worst_index.unwrap();
        let seed = out.report.worst_seed.unwrap();
        let replay = replay_restart(seed, [2, 3][i % 2], 30, &p).unwrap();
        assert_eq!(replay.best.unwrap().0, out.max_ratio.unwrap());
        assert_eq!(out, commutator_sqrt_search(&dom, 200, 8, &p).unwrap());
    }
}
