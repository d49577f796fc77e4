//! Relations on matrix assignments and their residual-quantified checks.
//!
//! Every check produces a signed `margin`: nonnegative means satisfied.
//! Non-strict relations get a slack of `tol * scale`; strict norm bounds get
//! none and additionally need a strictly positive margin.

mod dsl;
mod matfile;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::matcalc::{
    block2, hermitian_defect, max_eigenvalue, numerical_rank, op_norm, real_part, unitary_defect, Matrix,
    TolerancePolicy,
};
use crate::ncpoly::{NcPolynomial, VarKind, VarSet};
use crate::scalar::{Complex, Real};

pub use dsl::{parse_relations, RelationSystem};
pub use matfile::{format_assignment, parse_assignment};

#[derive(Clone, Debug, PartialEq)]
pub enum Relation<T: Real> {
    /// `p = 0`
    PolyZero(NcPolynomial<T>),
    /// `p >= 0`
    PolyPositive(NcPolynomial<T>),
    /// `|p| <= bound`, or `|p| < bound` when `strict`.
    NormBound { poly: NcPolynomial<T>, bound: T, strict: bool },
    /// `p <= q`
    OperatorOrder(NcPolynomial<T>, NcPolynomial<T>),
    SelfAdjoint(String),
    Positive(String),
    /// `0 <= x <= 1`
    Range01(String),
    Unitary(String),
    Contraction(String),
    /// `[[y, x*], [x, z]] >= 0`
    BlockPositive { y: NcPolynomial<T>, x: NcPolynomial<T>, z: NcPolynomial<T> },
    /// `Re x <= beta`
    RealPartBound { var: String, beta: T },
    /// `|exp(Re x)| <= beta`, `beta >= 1`.
    ExpRealNormBound { var: String, beta: T },
}

impl<T: Real> Relation<T> {
    pub fn norm_bound(poly: NcPolynomial<T>, bound: T, strict: bool) -> Result<Self> {
        if !(bound >= T::zero()) || (strict && bound == T::zero()) {
            return Err(Error::InvalidArgument(format!("norm bound {bound} must be positive")));
        }
        Ok(Relation::NormBound { poly, bound, strict })
    }

    pub fn real_part_bound(var: impl Into<String>, beta: T) -> Result<Self> {
        if !(beta >= T::zero()) {
            return Err(Error::InvalidArgument(format!("real part bound {beta} must be nonnegative")));
        }
        Ok(Relation::RealPartBound { var: var.into(), beta })
    }

    pub fn exp_real_norm_bound(var: impl Into<String>, beta: T) -> Result<Self> {
        if !(beta >= T::one()) {
            return Err(Error::InvalidArgument(format!("exponential bound {beta} must be at least 1")));
        }
        Ok(Relation::ExpRealNormBound { var: var.into(), beta })
    }

    /// Side relation implied by a variable kind, if any.
    pub fn for_kind(name: &str, kind: VarKind) -> Option<Self> {
        let n = name.to_string();
        match kind {
            VarKind::General => None,
            VarKind::Hermitian => Some(Relation::SelfAdjoint(n)),
            VarKind::Positive => Some(Relation::Positive(n)),
            VarKind::Unitary => Some(Relation::Unitary(n)),
            VarKind::Contraction => Some(Relation::Contraction(n)),
        }
    }

    /// Names of the variables the relation reads.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |p: &NcPolynomial<T>| {
            for v in p.variables() {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        };
        match self {
            Relation::PolyZero(p) | Relation::PolyPositive(p) | Relation::NormBound { poly: p, .. } => push(p),
            Relation::OperatorOrder(p, q) => {
                push(p);
                push(q);
            }
            Relation::BlockPositive { y, x, z } => {
                push(y);
                push(x);
                push(z);
            }
            Relation::SelfAdjoint(v)
            | Relation::Positive(v)
            | Relation::Range01(v)
            | Relation::Unitary(v)
            | Relation::Contraction(v)
            | Relation::RealPartBound { var: v, .. }
            | Relation::ExpRealNormBound { var: v, .. } => out.push(v.clone()),
        }
        out
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Relation::NormBound { strict: true, .. })
    }
}

impl<T: Real> fmt::Display for Relation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::PolyZero(p) => write!(f, "{p} = 0"),
            Relation::PolyPositive(p) => write!(f, "{p} >= 0"),
            Relation::NormBound { poly, bound, strict } => {
                write!(f, "norm({poly}) {} {bound}", if *strict { "<" } else { "<=" })
            }
            Relation::OperatorOrder(p, q) => write!(f, "{p} <= {q}"),
            Relation::SelfAdjoint(v) => write!(f, "hermitian({v})"),
            Relation::Positive(v) => write!(f, "positive({v})"),
            Relation::Range01(v) => write!(f, "range01({v})"),
            Relation::Unitary(v) => write!(f, "unitary({v})"),
            Relation::Contraction(v) => write!(f, "contraction({v})"),
            Relation::BlockPositive { y, x, z } => write!(f, "blockpos({y}, {x}, {z})"),
            Relation::RealPartBound { var, beta } => write!(f, "re({var}) <= {beta}"),
            Relation::ExpRealNormBound { var, beta } => write!(f, "normexp_re({var}) <= {beta}"),
        }
    }
}

/// Outcome of checking one relation (or a conjunction) on an assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<T> {
    /// `margin >= 0`, except for strict norm bounds which need `margin > 0`.
    pub satisfied: bool,
    /// `max(0, -margin)`
    pub residual: T,
    pub margin: T,
    pub detail: String,
}

impl<T: Real> Verdict<T> {
    fn from_margin(margin: T, strict: bool, detail: String) -> Self {
        let satisfied = if strict { margin > T::zero() } else { margin >= T::zero() };
        let residual = if margin < T::zero() { -margin } else { T::zero() };
        Verdict { satisfied, residual, margin, detail }
    }
}

fn min<T: Real>(a: T, b: T) -> T {
    if a < b {
        a
    } else {
        b
    }
}

/// Margin of `m >= 0`; a Hermitian defect beyond tolerance caps the margin.
fn psd_margin<T: Real>(m: &Matrix<T>, pol: &TolerancePolicy<T>, scale: T) -> (T, String) {
    let allowed = pol.tol_eq * scale;
    let defect = hermitian_defect(m, allowed);
    let h = real_part(m);
    let lmin = h.as_dmatrix().clone().symmetric_eigenvalues().iter().fold(T::max_value().unwrap(), |a, &b| min(a, b));
    let psd = lmin + pol.tol_psd * scale;
    if defect > allowed {
        (min(psd, allowed - defect), format!("not hermitian: |p - p*| = {defect:e}; min eigenvalue {lmin:e}"))
    } else {
        (psd, format!("min eigenvalue {lmin:e}"))
    }
}

/// Residual-quantified check of a single relation.
pub fn residual<T: Real>(r: &Relation<T>, a: &Assignment<T>, pol: &TolerancePolicy<T>) -> Result<Verdict<T>> {
    let names = r.variables();
    let inputs: Vec<&Matrix<T>> = names.iter().map(|n| a.get(n)).collect::<Result<_>>()?;
    let scale = pol.scale_of(inputs.iter().copied());
    let eq_slack = pol.tol_eq * scale;
    let psd_slack = pol.tol_psd * scale;
    let (margin, detail) = match r {
        Relation::PolyZero(p) => {
            let n = op_norm(&p.evaluate(a, pol)?);
            (eq_slack - n, format!("norm {n:e}"))
        }
        Relation::PolyPositive(p) => psd_margin(&p.evaluate(a, pol)?, pol, scale),
        Relation::NormBound { poly, bound, strict } => {
            let n = op_norm(&poly.evaluate(a, pol)?);
            let slack = if *strict { T::zero() } else { eq_slack };
            (*bound - n + slack, format!("norm {n:e} against bound {bound}"))
        }
        Relation::OperatorOrder(p, q) => {
            let pv = p.evaluate(a, pol)?;
            let qv = q.evaluate(a, pol)?;
            let (mut margin, detail) = psd_margin(&(&qv - &pv), pol, scale);
            for side in [&pv, &qv] {
                let d = hermitian_defect(side, eq_slack);
                if d > eq_slack {
                    margin = min(margin, eq_slack - d);
                }
            }
            (margin, detail)
        }
        Relation::SelfAdjoint(v) => {
            let x = a.get(v)?;
            let d = op_norm(&(x - &x.adjoint()));
            (eq_slack - d, format!("|x - x*| = {d:e}"))
        }
        Relation::Positive(v) => psd_margin(a.get(v)?, pol, scale),
        Relation::Range01(v) => {
            let x = a.get(v)?;
            let (lo, dlo) = psd_margin(x, pol, scale);
            let (hi, dhi) = psd_margin(&(&Matrix::identity(x.dim()) - x), pol, scale);
            (min(lo, hi), format!("{dlo}; 1 - x: {dhi}"))
        }
        Relation::Unitary(v) => {
            let d = unitary_defect(a.get(v)?);
            (eq_slack - d, format!("unitarity defect {d:e}"))
        }
        Relation::Contraction(v) => {
            let n = op_norm(a.get(v)?);
            (T::one() - n + eq_slack, format!("norm {n:e}"))
        }
        Relation::BlockPositive { y, x, z } => {
            let xv = x.evaluate(a, pol)?;
            let b = block2(&y.evaluate(a, pol)?, &xv.adjoint(), &xv, &z.evaluate(a, pol)?)?;
            psd_margin(&b, pol, scale)
        }
        Relation::RealPartBound { var, beta } => {
            let lmax = max_eigenvalue(&real_part(a.get(var)?), pol)?;
            (*beta - lmax + psd_slack, format!("max eigenvalue of Re x {lmax:e}"))
        }
        Relation::ExpRealNormBound { var, beta } => {
            // |exp(h)| = exp(max eigenvalue of h) for Hermitian h
            let lmax = max_eigenvalue(&real_part(a.get(var)?), pol)?;
            let n = lmax.exp();
            (*beta - n + eq_slack, format!("|exp(Re x)| = {n:e}"))
        }
    };
    Ok(Verdict::from_margin(margin, r.is_strict(), format!("{r}: {detail}")))
}

/// Conjunction of checks with the per-relation verdicts.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport<T> {
    pub verdict: Verdict<T>,
    pub members: Vec<Verdict<T>>,
}

/// Checks every relation; the aggregate residual is the largest member residual.
pub fn check_all<T: Real>(rs: &[Relation<T>], a: &Assignment<T>, pol: &TolerancePolicy<T>) -> Result<CheckReport<T>> {
    let members: Vec<Verdict<T>> = rs.par_iter().map(|r| residual(r, a, pol)).collect::<Result<_>>()?;
    let mut margin = T::max_value().unwrap();
    let mut residual_max = T::zero();
    let mut satisfied = true;
    for v in &members {
        margin = min(margin, v.margin);
        if v.residual > residual_max {
            residual_max = v.residual;
        }
        satisfied &= v.satisfied;
    }
    if members.is_empty() {
        margin = T::zero();
    }
    let failing = members.iter().filter(|v| !v.satisfied).count();
    let verdict = Verdict {
        satisfied,
        residual: residual_max,
        margin,
        detail: format!("{} relations, {} violated", members.len(), failing),
    };
    Ok(CheckReport { verdict, members })
}

/// Variable-wise direct sum of representations.
pub fn product_rep<T: Real>(parts: &[Assignment<T>]) -> Result<Assignment<T>> {
    Assignment::direct_sum(parts)
}

/// Dimension of the span of the ranges of all assigned matrices and their adjoints.
pub fn essential_dim<T: Real>(a: &Assignment<T>, pol: &TolerancePolicy<T>) -> usize {
    let d = a.dim();
    let k = a.len();
    if k == 0 {
        return 0;
    }
    let mut stacked: DMatrix<Complex<T>> = DMatrix::zeros(d, 2 * k * d);
    for (i, m) in a.matrices().enumerate() {
        stacked.view_mut((0, 2 * i * d), (d, d)).copy_from(m.as_dmatrix());
        stacked.view_mut((0, (2 * i + 1) * d), (d, d)).copy_from(&m.as_dmatrix().adjoint());
    }
    let scale = pol.scale_of(a.matrices());
    numerical_rank(&stacked, pol.tol_eq * scale)
}

/// Side relations implied by the kinds in `vars`, in declaration order.
pub fn side_relations<T: Real>(vars: &Arc<VarSet>) -> Vec<Relation<T>> {
    vars.iter().filter_map(|v| Relation::for_kind(&v.name, v.kind)).collect()
}
