//! Finite-rank approximation procedures: Löwner compression and the
//! quasi-central cutoff with homogeneous rescaling, a `*`-strong probe metric,
//! and a small zoo of truncated model operators.

use std::fmt;
use std::io;
use std::str::FromStr;

use nalgebra::DVector;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::matcalc::{compress, op_norm, Matrix, TolerancePolicy};
use crate::ncpoly::NcPolynomial;
use crate::relations::{residual, Relation};
use crate::scalar::{cplx, creal, Complex, Real};

/// Shape of the cutoff operator `u_k` used at each rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cutoff {
    /// Orthogonal projection onto the first `k` basis vectors.
    Sharp,
    /// Diagonal ramp: 1 on the first `k` coordinates, then decreasing linearly
    /// to 0 across the next `width` coordinates.
    Ramp(usize),
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Sharp => f.write_str("sharp"),
            Cutoff::Ramp(w) => write!(f, "ramp:{w}"),
        }
    }
}

impl FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "sharp" {
            return Ok(Cutoff::Sharp);
        }
        let w = s
            .strip_prefix("ramp:")
            .and_then(|w| w.parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidSchedule(format!("unknown cutoff `{s}` (expected sharp or ramp:W)")))?;
        if w == 0 {
            return Err(Error::InvalidSchedule("ramp width must be at least 1".into()));
        }
        Ok(Cutoff::Ramp(w))
    }
}

/// Strictly increasing truncation ranks plus a cutoff shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressionSchedule {
    ranks: Vec<usize>,
    cutoff: Cutoff,
}

impl CompressionSchedule {
    pub fn new(ranks: Vec<usize>, cutoff: Cutoff) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::InvalidSchedule("empty schedule".into()));
        }
        if ranks[0] == 0 {
            return Err(Error::InvalidSchedule("ranks must be positive".into()));
        }
        if ranks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule("ranks must be strictly increasing".into()));
        }
        if cutoff == Cutoff::Ramp(0) {
            return Err(Error::InvalidSchedule("ramp width must be at least 1".into()));
        }
        Ok(CompressionSchedule { ranks, cutoff })
    }

    /// Parses `"r1,r2,..."`.
    pub fn parse(ranks: &str, cutoff: Cutoff) -> Result<Self> {
        let ranks = ranks
            .split(',')
            .map(|r| r.trim().parse::<usize>().map_err(|_| Error::InvalidSchedule(format!("invalid rank `{r}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ranks, cutoff)
    }

    /// Every rank from `1` to `dim`.
    pub fn full(dim: usize, cutoff: Cutoff) -> Result<Self> {
        Self::new((1..=dim).collect(), cutoff)
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self.ranks.last() {
            Some(&r) if r > dim => Err(Error::RankOutOfRange { rank: r, dim }),
            _ => Ok(()),
        }
    }
}

/// The diagonal cutoff operator of rank `rank` in dimension `dim`.
pub fn cutoff_matrix<T: Real>(dim: usize, rank: usize, cutoff: Cutoff) -> Result<Matrix<T>> {
    if rank == 0 || rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    let diag: Vec<T> = (0..dim)
        .map(|j| match cutoff {
            _ if j < rank => T::one(),
            Cutoff::Sharp => T::zero(),
            Cutoff::Ramp(w) => {
                let step = j - rank + 1;
                if step > w {
                    T::zero()
                } else {
                    T::lit((w + 1 - step) as f64 / (w + 1) as f64)
                }
            }
        })
        .collect();
    Ok(Matrix::from_real_diagonal(&diag))
}

/// Compresses every variable by the projection onto the first `rank` basis vectors.
pub fn loewner_step<T: Real>(a: &Assignment<T>, rank: usize) -> Result<Assignment<T>> {
    a.try_map(|x| compress(x, rank))
}

/// One rank of an approximation run.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxStep<T: Real> {
    pub rank: usize,
    /// Rescaling factor applied after the cutoff (1 for plain compression).
    pub alpha: T,
    /// `max_j |[u_k, x_j]|`.
    pub quasicentrality_defect: T,
    pub assignment: Assignment<T>,
}

fn qc_defect<T: Real>(u: &Matrix<T>, a: &Assignment<T>) -> T {
    a.matrices().map(|x| op_norm(&u.commutator(x))).fold(T::zero(), |m, d| if d > m { d } else { m })
}

/// `u x u` for every variable at every rank of the schedule, without rescaling.
pub fn compression_schedule<T: Real>(a: &Assignment<T>, schedule: &CompressionSchedule) -> Result<Vec<ApproxStep<T>>> {
    schedule.check_dim(a.dim())?;
    schedule
        .ranks
        .par_iter()
        .map(|&rank| {
            let u = cutoff_matrix(a.dim(), rank, schedule.cutoff)?;
            let assignment = match schedule.cutoff {
                Cutoff::Sharp => loewner_step(a, rank)?,
                Cutoff::Ramp(_) => a.map(|x| &(&u * x) * &u),
            };
            Ok(ApproxStep { rank, alpha: T::one(), quasicentrality_defect: qc_defect(&u, a), assignment })
        })
        .collect()
}

struct Homogeneous<'a, T: Real> {
    poly: &'a NcPolynomial<T>,
    degree: f64,
    target: T,
}

/// Cutoff `x_k = u_k x u_k` followed by the homogeneous rescaling
/// `y_k = alpha_k x_k`, with
/// `alpha_k = min_s min(1, (|p_s(x)| / |p_s(x_k)|)^(1/d_s))`.
///
/// Every relation must be a norm bound `|p_s| <= eps_s` with `p_s`
/// homogeneous and `eps_s > 0`. When `p_s(x) = 0` the bound `eps_s` itself
/// is used as the target, so `alpha_k` stays positive.
pub fn quasicentral_approximation<T: Real>(
    a: &Assignment<T>,
    relations: &[Relation<T>],
    schedule: &CompressionSchedule,
    pol: &TolerancePolicy<T>,
) -> Result<Vec<ApproxStep<T>>> {
    schedule.check_dim(a.dim())?;
    let hom = relations
        .iter()
        .map(|r| {
            let Relation::NormBound { poly, bound, .. } = r else {
                return Err(Error::InvalidArgument(format!("`{r}` is not a norm bound")));
            };
            if !(*bound > T::zero()) {
                return Err(Error::InvalidArgument(format!("`{r}` needs a positive bound")));
            }
            let degree = poly.homogeneity()?.ok_or_else(|| Error::NotHomogeneous(poly.to_string()))?;
            let n = op_norm(&poly.evaluate(a, pol)?);
            let target = if n > T::zero() { n } else { *bound };
            Ok(Homogeneous { poly, degree: rational_to_f64(degree), target })
        })
        .collect::<Result<Vec<_>>>()?;
    schedule
        .ranks
        .par_iter()
        .map(|&rank| {
            let u = cutoff_matrix(a.dim(), rank, schedule.cutoff)?;
            let xk = a.map(|x| &(&u * x) * &u);
            let mut alpha = T::one();
            for h in &hom {
                let nk = op_norm(&h.poly.evaluate(&xk, pol)?);
                if nk > h.target {
                    let s = (h.target / nk).powf(T::lit(1.0 / h.degree));
                    if s < alpha {
                        alpha = s;
                    }
                }
            }
            Ok(ApproxStep {
                rank,
                alpha,
                quasicentrality_defect: qc_defect(&u, a),
                assignment: xk.scale_real(alpha),
            })
        })
        .collect()
}

fn rational_to_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Finite set of unit test vectors for the `*`-strong metric.
#[derive(Clone, Debug, PartialEq)]
pub struct StarStrongProbe<T: Real> {
    vectors: Vec<DVector<Complex<T>>>,
}

impl<T: Real> StarStrongProbe<T> {
    pub fn new(vectors: Vec<DVector<Complex<T>>>) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptyList)?;
        let dim = first.len();
        let tol = T::lit(1e-12).max(T::lit(16.0) * T::machine_eps());
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            let n = v.norm();
            if (n - T::one()).abs() > tol {
                return Err(Error::InvalidArgument(format!("probe vector has norm {n}")));
            }
        }
        Ok(StarStrongProbe { vectors })
    }

    /// Standard basis vectors `e_i` for the listed indices.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let vectors = indices
            .iter()
            .map(|&i| {
                if i >= dim {
                    return Err(Error::InvalidArgument(format!("basis index {i} outside dimension {dim}")));
                }
                let mut v = DVector::zeros(dim);
                v[i] = creal(T::one());
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    /// `count` seeded random unit vectors supported in the first `support` coordinates.
    pub fn random_leading(dim: usize, support: usize, count: usize, seed: u64) -> Result<Self> {
        if support == 0 || support > dim {
            return Err(Error::InvalidArgument(format!("support {support} outside 1..={dim}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors = (0..count)
            .map(|_| {
                let mut v: DVector<Complex<T>> = DVector::zeros(dim);
                for i in 0..support {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    v[i] = cplx(T::lit(re), T::lit(im));
                }
                let n = v.norm();
                v.unscale(n)
            })
            .collect();
        Self::new(vectors)
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[DVector<Complex<T>>] {
        &self.vectors
    }
}

/// `max_{x, xi} max(|(a(x) - b(x)) xi|, |(a(x) - b(x))* xi|)`.
pub fn star_strong_residual<T: Real>(a: &Assignment<T>, b: &Assignment<T>, probe: &StarStrongProbe<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if probe.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: probe.dim() });
    }
    if !a.names().eq(b.names()) {
        return Err(Error::VariableSetMismatch);
    }
    let mut worst = T::zero();
    for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
        let d = (x - y).into_dmatrix();
        let dstar = d.adjoint();
        for v in probe.vectors() {
            for n in [(&d * v).norm(), (&dstar * v).norm()] {
                if n > worst {
                    worst = n;
                }
            }
        }
    }
    Ok(worst)
}

/// Diagonal sequences `diag(s_0, s_1, ...)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalRule {
    /// `1 / (j + 1)`
    Harmonic,
    /// `(-1)^j`
    Alternating,
}

/// Multiplication by `f(t)` on `L^2[0, 1]`, sampled at van der Corput points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleRule {
    /// `f(t) = t`
    Identity,
    /// `f(t) = exp(2 pi i t)`
    Circle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// `S e_j = e_{j+1}`, truncated (not unitary).
    UnilateralShift,
    Diagonal(DiagonalRule),
    Multiplication(SampleRule),
    /// `diag(1, w, ..., w^(n-1))`, `w = exp(2 pi i / n)`.
    Clock,
    /// Cyclic shift `V e_j = e_{j-1 mod n}`, so that `V C = w C V`.
    ShiftMod,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::UnilateralShift => "shift",
            ModelKind::Diagonal(DiagonalRule::Harmonic) => "diagonal:harmonic",
            ModelKind::Diagonal(DiagonalRule::Alternating) => "diagonal:alternating",
            ModelKind::Multiplication(SampleRule::Identity) => "multiplication:identity",
            ModelKind::Multiplication(SampleRule::Circle) => "multiplication:circle",
            ModelKind::Clock => "clock",
            ModelKind::ShiftMod => "shiftmod",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "shift" | "unilateral_shift" => ModelKind::UnilateralShift,
            "diagonal" | "diagonal:harmonic" => ModelKind::Diagonal(DiagonalRule::Harmonic),
            "diagonal:alternating" => ModelKind::Diagonal(DiagonalRule::Alternating),
            "multiplication" | "multiplication:identity" => ModelKind::Multiplication(SampleRule::Identity),
            "multiplication:circle" => ModelKind::Multiplication(SampleRule::Circle),
            "clock" => ModelKind::Clock,
            "shiftmod" => ModelKind::ShiftMod,
            _ => return Err(Error::UnknownModel(s.to_string())),
        })
    }
}

/// Base-2 van der Corput point `j`: prefixes of the sequence are nested.
fn van_der_corput(mut j: usize) -> f64 {
    let mut t = 0.0;
    let mut denom = 1.0;
    while j > 0 {
        denom *= 2.0;
        t += (j & 1) as f64 / denom;
        j >>= 1;
    }
    t
}

fn phase<T: Real>(t: f64) -> Complex<T> {
    let th = std::f64::consts::TAU * t;
    cplx(T::lit(th.cos()), T::lit(th.sin()))
}

/// The `dim`-dimensional truncation of a model operator.
pub fn model<T: Real>(kind: ModelKind, dim: usize) -> Result<Matrix<T>> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("model dimension {dim} must be at least 2")));
    }
    let one = creal(T::one());
    let zero = creal(T::zero());
    Ok(match kind {
        ModelKind::UnilateralShift => Matrix::from_fn(dim, |i, j| if i == j + 1 { one } else { zero }),
        ModelKind::ShiftMod => Matrix::from_fn(dim, |i, j| if (i + 1) % dim == j { one } else { zero }),
        ModelKind::Clock => {
            Matrix::from_diagonal(&(0..dim).map(|j| phase(j as f64 / dim as f64)).collect::<Vec<_>>())
        }
        ModelKind::Diagonal(rule) => Matrix::from_real_diagonal(
            &(0..dim)
                .map(|j| match rule {
                    DiagonalRule::Harmonic => T::lit(1.0 / (j + 1) as f64),
                    DiagonalRule::Alternating => T::lit(if j % 2 == 0 { 1.0 } else { -1.0 }),
                })
                .collect::<Vec<_>>(),
        ),
        ModelKind::Multiplication(rule) => Matrix::from_diagonal(
            &(0..dim)
                .map(|j| {
                    let t = van_der_corput(j);
                    match rule {
                        SampleRule::Identity => creal(T::lit(t)),
                        SampleRule::Circle => phase(t),
                    }
                })
                .collect::<Vec<_>>(),
        ),
    })
}

/// One line of a residual curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub rank: usize,
    pub id: String,
    pub residual: f64,
    pub alpha: f64,
    pub quasicentrality_defect: f64,
}

/// Residual of every relation at every step, in schedule order.
pub fn residual_curve<T: Real>(
    steps: &[ApproxStep<T>],
    relations: &[Relation<T>],
    pol: &TolerancePolicy<T>,
) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::with_capacity(steps.len() * relations.len());
    for s in steps {
        for r in relations {
            let v = residual(r, &s.assignment, pol)?;
            rows.push(CurveRow {
                rank: s.rank,
                id: r.to_string(),
                residual: v.residual.as_f64(),
                alpha: s.alpha.as_f64(),
                quasicentrality_defect: s.quasicentrality_defect.as_f64(),
            });
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with a header line.
pub fn write_curve_csv<W: io::Write>(rows: &[CurveRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcalc::min_eigenvalue;
    use crate::ncpoly::{parse_poly, VarKind, VarSet};

    type M = Matrix<f64>;

    #[test]
    fn schedule_validation() {
        assert!(CompressionSchedule::new(vec![], Cutoff::Sharp).is_err());
        assert!(CompressionSchedule::new(vec![0, 1], Cutoff::Sharp).is_err());
        assert!(CompressionSchedule::new(vec![2, 2], Cutoff::Sharp).is_err());
        assert!(CompressionSchedule::new(vec![1, 2], Cutoff::Ramp(0)).is_err());
        let s = CompressionSchedule::parse("4, 8,16", "ramp:3".parse().unwrap()).unwrap();
        assert_eq!(s.ranks(), &[4, 8, 16]);
        assert_eq!(s.cutoff(), Cutoff::Ramp(3));
        assert!("ramp:x".parse::<Cutoff>().is_err());
        assert_eq!(Cutoff::Ramp(3).to_string().parse::<Cutoff>().unwrap(), Cutoff::Ramp(3));
        let a = Assignment::from_pairs([("x", M::identity(4))]).unwrap();
        assert_eq!(
            compression_schedule(&a, &s).unwrap_err(),
            Error::RankOutOfRange { rank: 16, dim: 4 }
        );
    }

    #[test]
    fn ramp_cutoff_values() {
        let u: M = cutoff_matrix(6, 2, Cutoff::Ramp(3)).unwrap();
        let d: Vec<f64> = (0..6).map(|i| u.get(i, i).re).collect();
        assert_eq!(d, vec![1.0, 1.0, 0.75, 0.5, 0.25, 0.0]);
        assert_eq!(cutoff_matrix::<f64>(5, 5, Cutoff::Ramp(2)).unwrap(), M::identity(5));
        assert!(cutoff_matrix::<f64>(5, 6, Cutoff::Sharp).is_err());
    }

    #[test]
    fn loewner_full_rank_is_identity() {
        let x = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let a = Assignment::from_pairs([("x", x)]).unwrap();
        assert_eq!(loewner_step(&a, 2).unwrap(), a);
        assert!(loewner_step(&a, 3).is_err());
    }

    #[test]
    fn loewner_keeps_order() {
        let d = M::from_real_rows(&[&[1.0, 2.0, 0.0], &[0.5, -1.0, 1.0], &[0.0, 1.0, 2.0]]).unwrap();
        let c = M::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 3.0], &[2.0, 0.0, 1.0]]).unwrap();
        let x = &d.adjoint() * &d;
        let y = &x + &(&c.adjoint() * &c);
        let a = Assignment::from_pairs([("x", x), ("y", y)]).unwrap();
        let pol = TolerancePolicy::default();
        for k in 1..=3 {
            let b = loewner_step(&a, k).unwrap();
            let gap = b.get("y").unwrap() - b.get("x").unwrap();
            assert!(min_eigenvalue(&gap, &pol).unwrap() > -1e-12);
            assert!(min_eigenvalue(b.get("x").unwrap(), &pol).unwrap() > -1e-12);
        }
    }

    #[test]
    fn shift_probe_examples() {
        let s: M = model(ModelKind::UnilateralShift, 8).unwrap();
        let a = Assignment::from_pairs([("x", s)]).unwrap();
        let b = loewner_step(&a, 7).unwrap();
        let first = StarStrongProbe::basis(8, &[0]).unwrap();
        let last = StarStrongProbe::basis(8, &[7]).unwrap();
        assert_eq!(star_strong_residual(&a, &a, &first).unwrap(), 0.0);
        assert_eq!(star_strong_residual(&b, &a, &first).unwrap(), 0.0);
        assert!(star_strong_residual(&b, &a, &last).unwrap() > 0.5);
    }

    #[test]
    fn probe_validation() {
        let bad = DVector::from_element(3, creal(1.0));
        assert!(StarStrongProbe::<f64>::new(vec![bad]).is_err());
        assert!(StarStrongProbe::<f64>::new(vec![]).is_err());
        let p = StarStrongProbe::<f64>::random_leading(32, 16, 8, 3).unwrap();
        for v in p.vectors() {
            assert!(v.iter().skip(16).all(|z| *z == creal(0.0)));
        }
        assert_eq!(p, StarStrongProbe::random_leading(32, 16, 8, 3).unwrap());
    }

    #[test]
    fn compression_convergence_on_models() {
        let kinds = [
            ModelKind::UnilateralShift,
            ModelKind::Diagonal(DiagonalRule::Harmonic),
            ModelKind::Diagonal(DiagonalRule::Alternating),
            ModelKind::Multiplication(SampleRule::Identity),
            ModelKind::Multiplication(SampleRule::Circle),
        ];
        let probe = StarStrongProbe::<f64>::random_leading(40, 16, 8, 11).unwrap();
        for kind in kinds {
            let a = Assignment::from_pairs([("x", model(kind, 40).unwrap())]).unwrap();
            let mut prev = f64::INFINITY;
            for n in 1..=40 {
                let r = star_strong_residual(&loewner_step(&a, n).unwrap(), &a, &probe).unwrap();
                assert!(r <= prev + 1e-15, "{kind} rank {n}");
                if n >= 17 {
                    assert_eq!(r, 0.0, "{kind} rank {n}");
                }
                prev = r;
            }
        }
    }

    #[test]
    fn models() {
        assert_eq!(
            model::<f64>(ModelKind::UnilateralShift, 2).unwrap(),
            M::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap()
        );
        for n in [2, 3, 8] {
            let c: M = model(ModelKind::Clock, n).unwrap();
            let v: M = model(ModelKind::ShiftMod, n).unwrap();
            let w = phase::<f64>(1.0 / n as f64);
            assert!((&(&v * &c) - &(&c * &v).scale(w)).frobenius_norm() < 1e-12);
            let comm = op_norm(&c.commutator(&v));
            assert!((comm - 2.0 * (std::f64::consts::PI / n as f64).sin()).abs() < 1e-12);
        }
        assert!(model::<f64>(ModelKind::Clock, 1).is_err());
        assert_eq!("bogus".parse::<ModelKind>(), Err(Error::UnknownModel("bogus".into())));
        for k in ["shift", "diagonal:alternating", "multiplication:circle", "clock", "shiftmod"] {
            assert_eq!(k.parse::<ModelKind>().unwrap().to_string(), k);
        }
        // nested truncations agree on leading blocks
        let big: M = model(ModelKind::Multiplication(SampleRule::Identity), 16).unwrap();
        let small: M = model(ModelKind::Multiplication(SampleRule::Identity), 8).unwrap();
        for i in 0..8 {
            assert_eq!(big.get(i, i), small.get(i, i));
        }
    }

    #[test]
    fn commuting_diagonal_pair_keeps_alpha_one() {
        let vars = VarSet::of(&[("x", VarKind::Hermitian), ("y", VarKind::Hermitian)]);
        let p = parse_poly("x y - y x", &vars).unwrap();
        let rel = Relation::norm_bound(p, 0.1, false).unwrap();
        let x = M::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = M::from_real_diagonal(&[0.5, -1.0, 0.0, 2.0, 1.0]);
        let a = Assignment::from_pairs([("x", x), ("y", y)]).unwrap();
        let s = CompressionSchedule::new(vec![1, 2, 3, 5], Cutoff::Ramp(2)).unwrap();
        for step in quasicentral_approximation(&a, &[rel], &s, &TolerancePolicy::default()).unwrap() {
            assert_eq!(step.alpha, 1.0);
            assert!(step.quasicentrality_defect < 1e-15);
        }
    }

    #[test]
    fn quasicentral_rescaling_bounds() {
        let vars = VarSet::of(&[("x", VarKind::General)]);
        let p = parse_poly("x* x - x x*", &vars).unwrap();
        let rel = Relation::norm_bound(p.clone(), 1.0, false).unwrap();
        let a = Assignment::from_pairs([("x", model::<f64>(ModelKind::UnilateralShift, 32).unwrap())]).unwrap();
        let pol = TolerancePolicy::default();
        let target = op_norm(&p.evaluate(&a, &pol).unwrap());
        let s = CompressionSchedule::new(vec![4, 8, 16, 24, 32], Cutoff::Ramp(4)).unwrap();
        let steps = quasicentral_approximation(&a, &[rel.clone()], &s, &pol).unwrap();
        for st in &steps {
            assert!(st.alpha > 0.0 && st.alpha <= 1.0);
            let n = op_norm(&p.evaluate(&st.assignment, &pol).unwrap());
            assert!(n <= target.max(1.0) + 1e-10);
            assert!(op_norm(st.assignment.get("x").unwrap()) <= 1.0 + 1e-12);
        }
        assert_eq!(steps.last().unwrap().alpha, 1.0);
        let rows = residual_curve(&steps, &[rel], &pol).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("rank,id,residual,alpha,quasicentrality_defect\n"));
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn quasicentral_rejects_bad_relations() {
        let vars = VarSet::of(&[("x", VarKind::Hermitian)]);
        let a = Assignment::from_pairs([("x", M::identity(3))]).unwrap();
        let s = CompressionSchedule::new(vec![3], Cutoff::Sharp).unwrap();
        let pol = TolerancePolicy::default();
        let mixed = Relation::norm_bound(parse_poly("x + x x", &vars).unwrap(), 1.0, false).unwrap();
        assert!(matches!(
            quasicentral_approximation(&a, &[mixed], &s, &pol),
            Err(Error::NotHomogeneous(_))
        ));
        let other = Relation::SelfAdjoint("x".into());
        assert!(quasicentral_approximation(&a, &[other], &s, &pol).is_err());
    }
}
