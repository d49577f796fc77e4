//! Dense complex matrices and the functional calculus needed to check
//! relations: operator norm, Hermitian eigendecomposition, matrix
//! exponential, positivity, direct sums, compressions and 2x2 blocks.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{creal, Complex, Real};

/// Square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T: Real>(DMatrix<Complex<T>>);

impl<T: Real> Matrix<T> {
    /// Wraps a nalgebra matrix, rejecting non-square or non-finite input.
    pub fn from_dmatrix(m: DMatrix<Complex<T>>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Matrix(m))
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Real-entried matrix from row-major `f64` data, converted to `T`.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| creal(T::lit(x))).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        Matrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Matrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Matrix(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let n = diag.len();
        Matrix(DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { Complex::new(T::zero(), T::zero()) }))
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d: Vec<_> = diag.iter().map(|&x| creal(x)).collect();
        Self::from_diagonal(&d)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex<T>> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex<T>> {
        self.0
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Matrix(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Matrix(self.0.map(|z| z * s))
    }

    pub fn scale_real(&self, s: T) -> Self {
        Matrix(self.0.map(|z| z * s))
    }

    pub fn frobenius_norm(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, z| acc + z.modulus_squared()).sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> T {
        self.0
            .column_iter()
            .map(|c| c.iter().fold(T::zero(), |acc, z| acc + z.modulus()))
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }

    /// `self * other - other * self`
    pub fn commutator(&self, other: &Self) -> Self {
        Matrix(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// `u * self * u^*`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Matrix(&u.0 * &self.0 * u.0.adjoint())
    }

    /// Nonnegative integer power by repeated squaring.
    pub fn powi(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim());
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }

    pub fn map_entries(&self, f: impl FnMut(Complex<T>) -> Complex<T>) -> Self {
        Matrix(self.0.map(f))
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        Matrix(&self.0 + &rhs.0)
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        Matrix(&self.0 - &rhs.0)
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        Matrix(&self.0 * &rhs.0)
    }
}

impl<T: Real> Add for Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Matrix<T>) -> Matrix<T> {
        Matrix(self.0 + rhs.0)
    }
}

impl<T: Real> Sub for Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Matrix<T>) -> Matrix<T> {
        Matrix(self.0 - rhs.0)
    }
}

impl<T: Real> Mul for Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Matrix<T>) -> Matrix<T> {
        Matrix(self.0 * rhs.0)
    }
}

impl<T: Real> AddAssign<&Matrix<T>> for Matrix<T> {
    fn add_assign(&mut self, rhs: &Matrix<T>) {
        self.0 += &rhs.0;
    }
}

impl<T: Real> Neg for Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        Matrix(-self.0)
    }
}

/// How the reference scale of a tolerance comparison is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScaleRule<T> {
    /// `max(1, largest operator norm among the inputs)`.
    Auto,
    /// A fixed reference scale shared by every comparison.
    Fixed(T),
}

/// Relative tolerances turning exact relations into numerical tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TolerancePolicy<T> {
    pub tol_eq: T,
    pub tol_psd: T,
    pub scale: ScaleRule<T>,
}

pub const DEFAULT_TOL_EQ: f64 = 1e-9;
pub const DEFAULT_TOL_PSD: f64 = 1e-9;

impl<T: Real> Default for TolerancePolicy<T> {
    fn default() -> Self {
        TolerancePolicy { tol_eq: T::lit(DEFAULT_TOL_EQ), tol_psd: T::lit(DEFAULT_TOL_PSD), scale: ScaleRule::Auto }
    }
}

impl<T: Real> TolerancePolicy<T> {
    pub fn new(tol_eq: T, tol_psd: T) -> Result<Self> {
        for t in [tol_eq, tol_psd] {
            if !(t > T::zero() && t <= T::lit(1e-2)) {
                return Err(Error::InvalidTolerance(t.as_f64()));
            }
        }
        Ok(TolerancePolicy { tol_eq, tol_psd, scale: ScaleRule::Auto })
    }

    pub fn with_fixed_scale(mut self, scale: T) -> Self {
        self.scale = ScaleRule::Fixed(scale);
        self
    }

    /// Reference scale for a comparison involving `inputs`.
    pub fn scale_of<'a>(&self, inputs: impl IntoIterator<Item = &'a Matrix<T>>) -> T {
        match self.scale {
            ScaleRule::Fixed(s) => s,
            ScaleRule::Auto => inputs.into_iter().map(op_norm).fold(T::one(), |m, x| if x > m { x } else { m }),
        }
    }
}

/// Largest singular value.
pub fn op_norm<T: Real>(a: &Matrix<T>) -> T {
    if a.is_zero() {
        return T::zero();
    }
    a.0.singular_values().iter().fold(T::zero(), |m, &x| if x > m { x } else { m })
}

/// Number of singular values of the `dim x cols` matrix above `threshold`.
pub(crate) fn numerical_rank<T: Real>(m: &DMatrix<Complex<T>>, threshold: T) -> usize {
    if m.iter().all(|z| z.re == T::zero() && z.im == T::zero()) {
        return 0;
    }
    m.singular_values().iter().filter(|&&s| s > threshold).count()
}

/// `|a - a*|` in operator norm, short-circuiting through the Frobenius bound.
pub fn hermitian_defect<T: Real>(a: &Matrix<T>, allowed: T) -> T {
    let d = Matrix(&a.0 - a.0.adjoint());
    let fro = d.frobenius_norm();
    if fro <= allowed {
        fro
    } else {
        op_norm(&d)
    }
}

fn ensure_hermitian<T: Real>(a: &Matrix<T>, pol: &TolerancePolicy<T>, scale: T) -> Result<Matrix<T>> {
    let allowed = pol.tol_eq * scale;
    let defect = hermitian_defect(a, allowed);
    if defect > allowed {
        return Err(Error::NotHermitian { defect: defect.as_f64(), allowed: allowed.as_f64() });
    }
    Ok(real_part(a))
}

/// Hermitian part `(a + a*)/2`, exactly Hermitian entrywise.
pub fn real_part<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.dim();
    let half = T::lit(0.5);
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = creal(a.0[(i, i)].re);
        for j in (i + 1)..n {
            let avg = (a.0[(i, j)] + a.0[(j, i)].conj()) * half;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    Matrix(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors, column `k` belonging to `values[k]`.
    pub vectors: DMatrix<Complex<T>>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V diag(f(values)) V*`
    pub fn apply(&self, mut f: impl FnMut(T) -> T) -> Matrix<T> {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            let fk = f(self.values[k]);
            col.iter_mut().for_each(|z| *z = *z * fk);
        }
        Matrix(scaled * self.vectors.adjoint())
    }
}

/// Eigendecomposition after the Hermitian check and symmetrization.
pub fn eigh<T: Real>(a: &Matrix<T>, pol: &TolerancePolicy<T>) -> Result<HermitianEigen<T>> {
    let scale = pol.scale_of([a]);
    let h = ensure_hermitian(a, pol, scale)?;
    Ok(sorted_eigen(h))
}

fn sorted_eigen<T: Real>(h: Matrix<T>) -> HermitianEigen<T> {
    let n = h.dim();
    let eig = h.0.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

fn hermitian_eigenvalues<T: Real>(a: &Matrix<T>, pol: &TolerancePolicy<T>) -> Result<Vec<T>> {
    let scale = pol.scale_of([a]);
    let h = ensure_hermitian(a, pol, scale)?;
    let mut v: Vec<T> = h.0.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(v)
}

/// Smallest eigenvalue of a Hermitian (within tolerance) matrix.
pub fn min_eigenvalue<T: Real>(a: &Matrix<T>, pol: &TolerancePolicy<T>) -> Result<T> {
    Ok(hermitian_eigenvalues(a, pol)?[0])
}

/// Largest eigenvalue of a Hermitian (within tolerance) matrix.
pub fn max_eigenvalue<T: Real>(a: &Matrix<T>, pol: &TolerancePolicy<T>) -> Result<T> {
    Ok(*hermitian_eigenvalues(a, pol)?.last().expect("nonempty"))
}

/// `a >= 0` up to `-tol_psd * scale`.
pub fn is_positive<T: Real>(a: &Matrix<T>, pol: &TolerancePolicy<T>) -> Result<bool> {
    let scale = pol.scale_of([a]);
    Ok(min_eigenvalue(a, pol)? >= -pol.tol_psd * scale)
}

/// Scalar function applied through the Hermitian functional calculus.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFn<T> {
    /// `t -> t^p` for `p >= 0`. Non-integer `p` needs a positive argument.
    Power(T),
    Exp,
    /// Natural logarithm; needs a strictly positive spectrum.
    Log,
    /// Piecewise-linear interpolation through `(x, y)` knots with strictly
    /// increasing `x`.
    Table(Vec<(T, T)>),
}

fn integer_exponent<T: Real>(p: T) -> Option<u64> {
    if p.fract() == T::zero() && p <= T::lit(u32::MAX as f64) {
        p.to_u64()
    } else {
        None
    }
}

fn interpolate<T: Real>(knots: &[(T, T)], x: T, slack: T) -> Result<T> {
    let (x0, y0) = knots[0];
    let (xn, yn) = knots[knots.len() - 1];
    if x < x0 - slack || x > xn + slack {
        return Err(Error::InvalidArgument(format!("eigenvalue {x:e} outside the table range [{x0:e}, {xn:e}]")));
    }
    if x <= x0 {
        return Ok(y0);
    }
    if x >= xn {
        return Ok(yn);
    }
    let k = knots.partition_point(|&(kx, _)| kx <= x);
    let (xa, ya) = knots[k - 1];
    let (xb, yb) = knots[k];
    Ok(ya + (yb - ya) * (x - xa) / (xb - xa))
}

/// `f(a)` for Hermitian `a`, computed in an orthonormal eigenbasis of the
/// symmetrized input.
pub fn hermitian_calculus<T: Real>(f: &ScalarFn<T>, a: &Matrix<T>, pol: &TolerancePolicy<T>) -> Result<Matrix<T>> {
    let scale = pol.scale_of([a]);
    let h = ensure_hermitian(a, pol, scale)?;
    let floor = -pol.tol_psd * scale;
    match f {
        ScalarFn::Power(p) => {
            let p = *p;
            if !(p >= T::zero()) {
                return Err(Error::InvalidArgument(format!("power exponent {p:e} must be nonnegative")));
            }
            if let Some(n) = integer_exponent(p) {
                return Ok(if n == 1 { h } else { h.powi(n) });
            }
            let eig = sorted_eigen(h);
            if eig.values[0] < floor {
                return Err(Error::NegativeSpectrum { eigenvalue: eig.values[0].as_f64(), allowed: floor.as_f64() });
            }
            Ok(eig.apply(|l| if l > T::zero() { l.powf(p) } else { T::zero() }))
        }
        ScalarFn::Exp => Ok(sorted_eigen(h).apply(|l| l.exp())),
        ScalarFn::Log => {
            let eig = sorted_eigen(h);
            if eig.values[0] <= T::zero() {
                return Err(Error::NegativeSpectrum { eigenvalue: eig.values[0].as_f64(), allowed: 0.0 });
            }
            Ok(eig.apply(|l| l.ln()))
        }
        ScalarFn::Table(knots) => {
            if knots.len() < 2 || knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                return Err(Error::InvalidArgument("table needs at least two strictly increasing knots".into()));
            }
            let eig = sorted_eigen(h);
            let slack = pol.tol_eq * scale;
            let values: Vec<T> = eig.values.iter().map(|&l| interpolate(knots, l, slack)).collect::<Result<_>>()?;
            let mut k = 0;
            Ok(eig.apply(|_| {
                k += 1;
                values[k - 1]
            }))
        }
    }
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn matrix_exp<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.dim();
    let norm = a.one_norm();
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > T::lit(0.5) {
        scaled_norm *= T::lit(0.5);
        squarings += 1;
    }
    let b = a.scale_real(T::lit(0.5).powi(squarings as i32));
    let eps = T::machine_eps();
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=40 {
        term = (&term * &b).scale_real(T::one() / T::lit(k as f64));
        if term.is_zero() {
            break;
        }
        sum += &term;
        if term.one_norm() <= eps * sum.one_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Block-diagonal matrix with the given blocks.
pub fn direct_sum<T: Real>(blocks: &[Matrix<T>]) -> Result<Matrix<T>> {
    if blocks.is_empty() {
        return Err(Error::EmptyList);
    }
    let n: usize = blocks.iter().map(Matrix::dim).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let d = b.dim();
        out.view_mut((off, off), (d, d)).copy_from(&b.0);
        off += d;
    }
    Ok(Matrix(out))
}

/// `p a p` for the projection `p` onto the first `rank` basis vectors,
/// kept at the ambient dimension.
pub fn compress<T: Real>(a: &Matrix<T>, rank: usize) -> Result<Matrix<T>> {
    let n = a.dim();
    if rank == 0 || rank > n {
        return Err(Error::RankOutOfRange { rank, dim: n });
    }
    let zero = Complex::new(T::zero(), T::zero());
    Ok(Matrix(DMatrix::from_fn(n, n, |i, j| if i < rank && j < rank { a.0[(i, j)] } else { zero })))
}

/// The block matrix `[[y, xstar], [x, z]]`.
pub fn block2<T: Real>(y: &Matrix<T>, xstar: &Matrix<T>, x: &Matrix<T>, z: &Matrix<T>) -> Result<Matrix<T>> {
    let d = y.dim();
    for m in [xstar, x, z] {
        if m.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
        }
    }
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    out.view_mut((0, 0), (d, d)).copy_from(&y.0);
    out.view_mut((0, d), (d, d)).copy_from(&xstar.0);
    out.view_mut((d, 0), (d, d)).copy_from(&x.0);
    out.view_mut((d, d), (d, d)).copy_from(&z.0);
    Ok(Matrix(out))
}

/// `max(|u*u - 1|, |uu* - 1|)`
pub fn unitary_defect<T: Real>(u: &Matrix<T>) -> T {
    let id = Matrix::identity(u.dim());
    let a = op_norm(&(&(&u.adjoint() * u) - &id));
    let b = op_norm(&(&(u * &u.adjoint()) - &id));
    if a > b {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    type M = Matrix<f64>;

    fn pol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    fn close(a: &M, b: &M, tol: f64) -> bool {
        op_norm(&(a - b)) <= tol
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&M::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()) - 2.0).abs() < 1e-14);
        assert!((op_norm(&M::identity(7)) - 1.0).abs() < 1e-14);
        assert!((op_norm(&M::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap()) - 2.0).abs() < 1e-14);
        assert_eq!(op_norm(&M::zeros(3)), 0.0);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(M::from_real_rows(&[&[f64::NAN]]), Err(Error::NonFinite));
        assert!(matches!(M::from_real_rows(&[&[1.0, 2.0]]), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn square_root_squares_back() {
        let a = M::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let r = hermitian_calculus(&ScalarFn::Power(0.5), &a, &pol()).unwrap();
        assert!(close(&(&r * &r), &a, 1e-10));
    }

    #[test]
    fn exp_of_diagonal() {
        let a = M::from_real_diagonal(&[0.0, 2f64.ln()]);
        let e = hermitian_calculus(&ScalarFn::Exp, &a, &pol()).unwrap();
        assert!(close(&e, &M::from_real_diagonal(&[1.0, 2.0]), 1e-14));
    }

    #[test]
    fn fractional_power_of_negative_is_error() {
        let a = M::from_real_rows(&[&[-0.5]]).unwrap();
        assert!(matches!(hermitian_calculus(&ScalarFn::Power(0.5), &a, &pol()), Err(Error::NegativeSpectrum { .. })));
        assert!(matches!(hermitian_calculus(&ScalarFn::Log, &a, &pol()), Err(Error::NegativeSpectrum { .. })));
    }

    #[test]
    fn small_negative_eigenvalues_are_clamped() {
        let a = M::from_real_diagonal(&[-1e-12, 4.0]);
        let r = hermitian_calculus(&ScalarFn::Power(0.5), &a, &pol()).unwrap();
        assert!(close(&r, &M::from_real_diagonal(&[0.0, 2.0]), 1e-14));
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(min_eigenvalue(&a, &pol()), Err(Error::NotHermitian { .. })));
        assert!(matches!(hermitian_calculus(&ScalarFn::Exp, &a, &pol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn table_function_interpolates() {
        let a = M::from_real_diagonal(&[0.5, 1.5]);
        let f = ScalarFn::Table(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)]);
        let r = hermitian_calculus(&f, &a, &pol()).unwrap();
        assert!(close(&r, &M::from_real_diagonal(&[1.0, 2.0]), 1e-14));
        let out = M::from_real_diagonal(&[3.0]);
        assert!(hermitian_calculus(&f, &out, &pol()).is_err());
    }

    #[test]
    fn exp_of_nilpotent_is_exact() {
        let a = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(matrix_exp(&a), M::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap());
        assert_eq!(matrix_exp(&M::zeros(4)), M::identity(4));
    }

    #[test]
    fn exp_of_diag_signs() {
        let e = matrix_exp(&M::from_real_diagonal(&[1.0, -1.0]));
        let want = M::from_real_diagonal(&[std::f64::consts::E, 1.0 / std::f64::consts::E]);
        assert!(close(&e, &want, 1e-14));
    }

    #[test]
    fn real_part_examples() {
        let a = M::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(real_part(&a), M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap());
        let skew = M::from_rows(&[vec![cplx(0.0, 1.0), cplx(1.0, 0.0)], vec![cplx(-1.0, 0.0), cplx(0.0, -3.0)]]).unwrap();
        assert!(real_part(&skew).is_zero());
        let h = M::from_rows(&[vec![cplx(1.0, 0.0), cplx(2.0, 1.0)], vec![cplx(2.0, -1.0), cplx(0.0, 0.0)]]).unwrap();
        assert_eq!(real_part(&h), h);
    }

    #[test]
    fn min_eigenvalue_examples() {
        let a = M::from_real_rows(&[&[3.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!((min_eigenvalue(&a, &pol()).unwrap() - (3.0 - 13f64.sqrt()) / 2.0).abs() < 1e-14);
        assert_eq!(min_eigenvalue(&M::from_real_diagonal(&[0.0, 5.0]), &pol()).unwrap(), 0.0);
        let ones = M::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(min_eigenvalue(&ones, &pol()).unwrap().abs() < 1e-15);
        assert!(is_positive(&ones, &pol()).unwrap());
    }

    #[test]
    fn direct_sum_examples() {
        let s = direct_sum(&[M::from_real_rows(&[&[1.0]]).unwrap(), M::from_real_rows(&[&[2.0]]).unwrap()]).unwrap();
        assert_eq!(s, M::from_real_diagonal(&[1.0, 2.0]));
        let one = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(direct_sum(std::slice::from_ref(&one)).unwrap(), one);
        assert_eq!(direct_sum::<f64>(&[]), Err(Error::EmptyList));
    }

    #[test]
    fn compress_examples() {
        let a = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(compress(&a, 1).unwrap(), M::from_real_diagonal(&[1.0, 0.0]));
        assert_eq!(compress(&a, 2).unwrap(), a);
        assert_eq!(compress(&a, 3), Err(Error::RankOutOfRange { rank: 3, dim: 2 }));
        assert_eq!(compress(&a, 0), Err(Error::RankOutOfRange { rank: 0, dim: 2 }));
    }

    #[test]
    fn block2_examples() {
        let id = M::identity(3);
        let b = block2(&id, &id, &id, &id).unwrap();
        assert_eq!(b.dim(), 6);
        assert!(min_eigenvalue(&b, &pol()).unwrap().abs() < 1e-14);
        let z = M::zeros(2);
        assert!(block2(&z, &z, &z, &z).unwrap().is_zero());
        assert!(matches!(block2(&z, &z, &id, &z), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn tolerance_policy_bounds() {
        assert!(TolerancePolicy::new(1e-9, 1e-9).is_ok());
        assert!(TolerancePolicy::new(0.0, 1e-9).is_err());
        assert!(TolerancePolicy::new(1e-9, 0.1).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let r = hermitian_calculus(&ScalarFn::Power(0.5f32), &a, &TolerancePolicy::default()).unwrap();
        assert!(op_norm(&(&(&r * &r) - &a)) < 1e-5);
        assert!((op_norm(&Matrix::<f32>::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()) - 2.0).abs() < 1e-6);
    }
}
