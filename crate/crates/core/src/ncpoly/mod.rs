//! Noncommutative *-polynomials with zero constant term.
//!
//! A polynomial is a combination of words; each factor of a word is a
//! variable, possibly adjointed, raised to a positive rational power.
//! Non-integer powers are only allowed on hermitian or positive variables
//! and are evaluated through the Hermitian functional calculus.
//!
//! Polynomials are kept in canonical form: factors of self-adjoint
//! variables drop their adjoint flag, adjacent compatible factors merge,
//! and monomials are sorted by `(degree, word)` with numerically zero
//! coefficients removed.

mod parse;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::ComplexField;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::assignment::Assignment;
use crate::error::{Error, ParseErrorKind, Result};
use crate::matcalc::{hermitian_calculus, Matrix, ScalarFn, TolerancePolicy};
use crate::scalar::{Complex, Real};

pub use parse::parse_poly;
pub(crate) use parse::{ExprParser, Lexer, Tok, KEYWORDS};

/// Coefficients below this modulus are dropped after combination.
pub const COEFF_EPS: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    General,
    Hermitian,
    Positive,
    Unitary,
    Contraction,
}

impl VarKind {
    /// Hermitian and positive variables are their own adjoints.
    pub fn is_self_adjoint(self) -> bool {
        matches!(self, VarKind::Hermitian | VarKind::Positive)
    }

    pub fn keyword(self) -> Option<&'static str> {
        match self {
            VarKind::General => None,
            VarKind::Hermitian => Some("hermitian"),
            VarKind::Positive => Some("positive"),
            VarKind::Unitary => Some("unitary"),
            VarKind::Contraction => Some("contraction"),
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "hermitian" => VarKind::Hermitian,
            "positive" => VarKind::Positive,
            "unitary" => VarKind::Unitary,
            "contraction" => VarKind::Contraction,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

/// Ordered set of declared variables with unique names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarSet {
    vars: Vec<Variable>,
}

impl VarSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from `(name, kind)` pairs; panics on duplicates.
    pub fn of(decls: &[(&str, VarKind)]) -> Arc<Self> {
        let mut s = VarSet::new();
        for &(n, k) in decls {
            s.declare(n, k).expect("distinct variable names");
        }
        Arc::new(s)
    }

    pub fn declare(&mut self, name: &str, kind: VarKind) -> std::result::Result<(), ParseErrorKind> {
        if self.get(name).is_some() {
            return Err(ParseErrorKind::DuplicateVariable(name.to_string()));
        }
        self.vars.push(Variable { name: name.to_string(), kind });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Variable> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn kind(&self, name: &str) -> Option<VarKind> {
        self.get(name).map(|v| v.kind)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Variable> {
        self.vars.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|v| v.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

/// One factor of a word: `var`, adjointed when `star`, raised to `exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub var: String,
    pub star: bool,
    pub exp: Rational64,
}

impl Factor {
    pub fn new(var: impl Into<String>) -> Self {
        Factor { var: var.into(), star: false, exp: Rational64::one() }
    }

    pub fn adjointed(mut self) -> Self {
        self.star = !self.star;
        self
    }

    pub fn pow(mut self, exp: Rational64) -> Self {
        self.exp *= exp;
        self
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.var)?;
        if self.star {
            f.write_str("*")?;
        }
        if self.exp.is_integer() {
            if !self.exp.is_one() {
                write!(f, "^{}", self.exp.numer())?;
            }
        } else {
            write!(f, "^({}/{})", self.exp.numer(), self.exp.denom())?;
        }
        Ok(())
    }
}

pub type Word = Vec<Factor>;

pub fn word_degree(word: &[Factor]) -> Rational64 {
    word.iter().fold(Rational64::zero(), |acc, f| acc + f.exp)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial<T: Real> {
    pub coeff: Complex<T>,
    pub word: Word,
}

impl<T: Real> Monomial<T> {
    pub fn degree(&self) -> Rational64 {
        word_degree(&self.word)
    }
}

/// Canonical NC *-polynomial over a shared variable set.
#[derive(Clone, Debug)]
pub struct NcPolynomial<T: Real> {
    vars: Arc<VarSet>,
    terms: Vec<Monomial<T>>,
}

impl<T: Real> PartialEq for NcPolynomial<T> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars) && self.terms == other.terms
    }
}

fn can_merge(kind: VarKind, a: &Factor, b: &Factor) -> bool {
    a.var == b.var && a.star == b.star && (kind.is_self_adjoint() || (a.exp.is_integer() && b.exp.is_integer()))
}

fn canonical_word(vars: &VarSet, word: Word) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for mut f in word {
        let kind = vars.kind(&f.var).unwrap_or(VarKind::General);
        if kind.is_self_adjoint() {
            f.star = false;
        }
        match out.last_mut() {
            Some(last) if can_merge(kind, last, &f) => last.exp += f.exp,
            _ => out.push(f),
        }
    }
    out
}

fn word_order(a: &Word, b: &Word) -> Ordering {
    word_degree(a).cmp(&word_degree(b)).then_with(|| a.cmp(b))
}

impl<T: Real> NcPolynomial<T> {
    pub fn zero(vars: Arc<VarSet>) -> Self {
        NcPolynomial { vars, terms: Vec::new() }
    }

    /// Single variable with coefficient one.
    pub fn var(vars: Arc<VarSet>, name: &str) -> Result<Self> {
        Self::from_terms(vars, vec![(Complex::new(T::one(), T::zero()), vec![Factor::new(name)])])
    }

    /// Validates and canonicalizes a list of `(coefficient, word)` pairs.
    pub fn from_terms(vars: Arc<VarSet>, terms: Vec<(Complex<T>, Word)>) -> Result<Self> {
        for (_, w) in &terms {
            if w.is_empty() {
                return Err(Error::InvalidArgument("constant term present".into()));
            }
            for f in w {
                let kind = vars.kind(&f.var).ok_or_else(|| Error::Unassigned(f.var.clone()))?;
                if f.exp <= Rational64::zero() {
                    return Err(Error::InvalidArgument(format!("exponent {} must be positive", f.exp)));
                }
                if !f.exp.is_integer() && !kind.is_self_adjoint() {
                    return Err(Error::InvalidArgument(format!("fractional power on variable `{}`", f.var)));
                }
            }
        }
        Ok(Self::canonical(vars, terms))
    }

    fn canonical(vars: Arc<VarSet>, terms: Vec<(Complex<T>, Word)>) -> Self {
        let mut items: Vec<(Complex<T>, Word)> =
            terms.into_iter().map(|(c, w)| (c, canonical_word(&vars, w))).collect();
        items.sort_by(|a, b| word_order(&a.1, &b.1));
        let mut merged: Vec<Monomial<T>> = Vec::with_capacity(items.len());
        for (c, w) in items {
            match merged.last_mut() {
                Some(m) if m.word == w => m.coeff += c,
                _ => merged.push(Monomial { coeff: c, word: w }),
            }
        }
        let eps = T::lit(COEFF_EPS);
        merged.retain(|m| m.coeff.modulus() >= eps);
        NcPolynomial { vars, terms: merged }
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Variables occurring in the polynomial, in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for f in self.terms.iter().flat_map(|m| &m.word) {
            if !out.contains(&f.var.as_str()) {
                out.push(&f.var);
            }
        }
        out
    }

    fn same_vars(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::VariableSetMismatch)
        }
    }

    fn pairs(&self) -> impl Iterator<Item = (Complex<T>, Word)> + '_ {
        self.terms.iter().map(|m| (m.coeff, m.word.clone()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_vars(other)?;
        Ok(Self::canonical(self.vars.clone(), self.pairs().chain(other.pairs()).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::canonical(self.vars.clone(), self.pairs().map(|(c, w)| (c * s, w)).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_vars(other)?;
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut w = a.word.clone();
                w.extend(b.word.iter().cloned());
                out.push((a.coeff * b.coeff, w));
            }
        }
        Ok(Self::canonical(self.vars.clone(), out))
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("zeroth power is a constant".into()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Formal adjoint: words reversed, factors adjointed, coefficients conjugated.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|m| (m.coeff.conj(), m.word.iter().rev().cloned().map(Factor::adjointed).collect()))
            .collect();
        Self::canonical(self.vars.clone(), terms)
    }

    /// Common total degree of all monomials, if there is one.
    pub fn homogeneity(&self) -> Result<Option<Rational64>> {
        let first = self.terms.first().ok_or(Error::ZeroPolynomial)?.degree();
        Ok(self.terms.iter().all(|m| m.degree() == first).then_some(first))
    }

    /// True when the polynomial equals its formal adjoint.
    pub fn is_formally_self_adjoint(&self) -> bool {
        self.adjoint().terms.iter().zip(&self.terms).all(|(a, b)| {
            a.word == b.word && (a.coeff - b.coeff).modulus() < T::lit(COEFF_EPS)
        }) && self.adjoint().terms.len() == self.terms.len()
    }

    /// Matrix value at an assignment.
    pub fn evaluate(&self, a: &Assignment<T>, pol: &TolerancePolicy<T>) -> Result<Matrix<T>> {
        let dim = a.dim();
        let mut cache: HashMap<&Factor, Matrix<T>> = HashMap::new();
        let mut acc = Matrix::zeros(dim);
        for m in &self.terms {
            let mut prod: Option<Matrix<T>> = None;
            for f in &m.word {
                if !cache.contains_key(f) {
                    let v = eval_factor(f, a, pol)?;
                    cache.insert(f, v);
                }
                let v = &cache[f];
                prod = Some(match prod {
                    None => v.clone(),
                    Some(p) => &p * v,
                });
            }
            acc += &prod.expect("nonempty word").scale(m.coeff);
        }
        Ok(acc)
    }
}

fn eval_factor<T: Real>(f: &Factor, a: &Assignment<T>, pol: &TolerancePolicy<T>) -> Result<Matrix<T>> {
    let base = a.get(&f.var)?;
    let base = if f.star { base.adjoint() } else { base.clone() };
    if f.exp.is_integer() {
        Ok(base.powi(*f.exp.numer() as u64))
    } else {
        let t = T::lit(*f.exp.numer() as f64) / T::lit(*f.exp.denom() as f64);
        hermitian_calculus(&ScalarFn::Power(t), &base, pol)
    }
}

/// `(negative, body)` for a coefficient; `body` is `None` for unit modulus reals.
fn coeff_parts<T: Real>(c: Complex<T>) -> (bool, Option<String>) {
    let zero = T::zero();
    if c.im == zero {
        let neg = c.re < zero;
        let mag = c.re.abs();
        (neg, (mag != T::one()).then(|| format!("{mag}")))
    } else if c.re == zero {
        (c.im < zero, Some(format!("{}i", c.im.abs())))
    } else {
        let sign = if c.im < zero { '-' } else { '+' };
        (false, Some(format!("({}{}{}i)", c.re, sign, c.im.abs())))
    }
}

impl<T: Real> fmt::Display for NcPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, m) in self.terms.iter().enumerate() {
            let (neg, body) = coeff_parts(m.coeff);
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if let Some(b) = body {
                write!(f, "{b} ")?;
            }
            for (i, fac) in m.word.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{fac}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcalc::op_norm;
    use crate::scalar::cplx;

    type P = NcPolynomial<f64>;
    type M = Matrix<f64>;

    fn herm_x() -> Arc<VarSet> {
        VarSet::of(&[("x", VarKind::Hermitian)])
    }

    fn pol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    #[test]
    fn normality_relation_parses() {
        let vars = VarSet::of(&[("x", VarKind::General)]);
        let p: P = parse_poly("x* x - x x*", &vars).unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.to_string(), "-x x* + x* x");
        // postfix `*` binds to the preceding factor, so this is x* x - (x*)^2
        let q: P = parse_poly("x*x - x*x*", &vars).unwrap();
        assert_eq!(q.to_string(), "x* x - x*^2");
    }

    #[test]
    fn idempotent_relation_degrees() {
        let p: P = parse_poly("x^2 - x", &herm_x()).unwrap();
        let degs: Vec<_> = p.terms().iter().map(|m| m.degree()).collect();
        assert_eq!(degs, vec![Rational64::from(1), Rational64::from(2)]);
        assert_eq!(p.homogeneity().unwrap(), None);
    }

    #[test]
    fn adjacent_factors_merge() {
        let p: P = parse_poly("x x", &herm_x()).unwrap();
        assert_eq!(p.to_string(), "x^2");
        let vars = VarSet::of(&[("x", VarKind::General)]);
        let q: P = parse_poly("x x x*", &vars).unwrap();
        assert_eq!(q.to_string(), "x^2 x*");
    }

    #[test]
    fn homogeneity_examples() {
        let vars = VarSet::of(&[("x", VarKind::Positive), ("y", VarKind::Hermitian)]);
        let p: P = parse_poly("x y + y x", &vars).unwrap();
        assert_eq!(p.homogeneity().unwrap(), Some(Rational64::from(2)));
        let q: P = parse_poly("x^(1/3) y x^(2/3)", &vars).unwrap();
        assert_eq!(q.homogeneity().unwrap(), Some(Rational64::from(2)));
        assert_eq!(P::zero(vars).homogeneity(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn adjoint_examples() {
        let vars = VarSet::of(&[("x", VarKind::General), ("y", VarKind::General)]);
        let p: P = parse_poly("x y", &vars).unwrap();
        assert_eq!(p.adjoint().to_string(), "y* x*");
        let q: P = parse_poly("x^2 - x", &herm_x()).unwrap();
        assert_eq!(q.adjoint(), q);
        let r: P = parse_poly("1i x", &vars).unwrap();
        assert_eq!(r.adjoint().to_string(), "-1i x*");
        assert_eq!(r.adjoint().adjoint(), r);
    }

    #[test]
    fn evaluate_commutator() {
        let vars = VarSet::of(&[("x", VarKind::General), ("y", VarKind::General)]);
        let p: P = parse_poly("x y - y x", &vars).unwrap();
        let a = Assignment::from_pairs([
            ("x", M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()),
            ("y", M::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap()),
        ])
        .unwrap();
        assert_eq!(p.evaluate(&a, &pol()).unwrap(), M::from_real_rows(&[&[0.0, -1.0], &[0.0, 0.0]]).unwrap());
    }

    #[test]
    fn evaluate_scalar_and_sqrt() {
        let p: P = parse_poly("x^2 - x", &herm_x()).unwrap();
        let a = Assignment::from_pairs([("x", M::from_real_rows(&[&[0.5]]).unwrap())]).unwrap();
        assert_eq!(p.evaluate(&a, &pol()).unwrap(), M::from_real_rows(&[&[-0.25]]).unwrap());

        let vars = VarSet::of(&[("x", VarKind::Positive)]);
        let q: P = parse_poly("x^(1/2)", &vars).unwrap();
        let a = Assignment::from_pairs([("x", M::from_real_diagonal(&[4.0, 9.0]))]).unwrap();
        let v = q.evaluate(&a, &pol()).unwrap();
        assert!(op_norm(&(&v - &M::from_real_diagonal(&[2.0, 3.0]))) < 1e-14);
    }

    #[test]
    fn evaluate_errors() {
        let vars = VarSet::of(&[("x", VarKind::Positive), ("y", VarKind::General)]);
        let q: P = parse_poly("x^(1/2) y", &vars).unwrap();
        let a = Assignment::from_pairs([("x", M::from_real_diagonal(&[1.0, 9.0]))]).unwrap();
        assert_eq!(q.evaluate(&a, &pol()), Err(Error::Unassigned("y".into())));
        let mut a2 = Assignment::from_pairs([("x", M::from_real_diagonal(&[-1.0, 9.0]))]).unwrap();
        a2.insert("y", M::identity(2)).unwrap();
        assert!(matches!(q.evaluate(&a2, &pol()), Err(Error::NegativeSpectrum { .. })));
        assert!(matches!(a2.insert("z", M::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_assignment_evaluates_to_zero() {
        let vars = VarSet::of(&[("x", VarKind::Positive), ("y", VarKind::General)]);
        let p: P = parse_poly("x^(1/2) y - 2 y* y + (1-2i) x", &vars).unwrap();
        let a = Assignment::zero(vars.names(), 3);
        assert!(p.evaluate(&a, &pol()).unwrap().is_zero());
    }

    #[test]
    fn coefficient_printing() {
        let vars = VarSet::of(&[("x", VarKind::General)]);
        let p: P = P::from_terms(vars.clone(), vec![(cplx(-1.5, 2.0), vec![Factor::new("x")])]).unwrap();
        assert_eq!(p.to_string(), "(-1.5+2i) x");
        assert_eq!(parse_poly::<f64>(&p.to_string(), &vars).unwrap(), p);
        let tiny: P = parse_poly("1e-15 x", &vars).unwrap();
        assert!(tiny.is_zero());
        assert_eq!(tiny.to_string(), "0");
    }

    #[test]
    fn arithmetic() {
        let vars = VarSet::of(&[("x", VarKind::General), ("y", VarKind::General)]);
        let x = P::var(vars.clone(), "x").unwrap();
        let y = P::var(vars.clone(), "y").unwrap();
        let c = x.mul(&y).unwrap().sub(&y.mul(&x).unwrap()).unwrap();
        assert_eq!(c, parse_poly("x y - y x", &vars).unwrap());
        assert!(c.sub(&c).unwrap().is_zero());
        assert_eq!(x.add(&y).unwrap().pow(2).unwrap(), parse_poly("(x + y)^2", &vars).unwrap());
        let other = VarSet::of(&[("z", VarKind::General)]);
        assert_eq!(x.add(&P::var(other, "z").unwrap()), Err(Error::VariableSetMismatch));
    }

    #[test]
    fn from_terms_validation() {
        let vars = VarSet::of(&[("x", VarKind::General)]);
        let half = Rational64::new(1, 2);
        assert!(P::from_terms(vars.clone(), vec![(cplx(1.0, 0.0), vec![Factor::new("x").pow(half)])]).is_err());
        assert!(P::from_terms(vars.clone(), vec![(cplx(1.0, 0.0), vec![])]).is_err());
        assert!(P::from_terms(vars, vec![(cplx(1.0, 0.0), vec![Factor::new("q")])]).is_err());
    }
}
