//! Relation files.
//!
//! ```text
//! file := (decl ';')* (rel ';')*
//! decl := 'var' IDENT kind?
//! kind := 'hermitian' | 'positive' | 'unitary' | 'contraction'
//! rel  := 'rel' ( expr '=' expr | expr '>=' expr | expr '<=' expr
//!               | 'norm(' expr ')' ('<=' | '<') number
//!               | 'blockpos(' expr ',' expr ',' expr ')'
//!               | 're(' IDENT ')' '<=' number
//!               | 'normexp_re(' IDENT ')' '<=' number
//!               | KIND '(' IDENT ')' | 'range01(' IDENT ')' )
//! ```
//!
//! The trailing `;` of the last statement is optional and `#` starts a
//! line comment. Printing emits one statement per line and is a fixed point
//! of parse-then-print.

use std::fmt;
use std::sync::Arc;

use crate::error::{ParseError, ParseErrorKind};
use crate::ncpoly::{ExprParser, Lexer, NcPolynomial, Tok, VarKind, VarSet, KEYWORDS};
use crate::scalar::Real;

use super::{side_relations, Relation};

/// Declared variables, their implied side relations, and the stated relations.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationSystem<T: Real> {
    pub vars: Arc<VarSet>,
    /// Relations implied by variable kinds.
    pub side: Vec<Relation<T>>,
    /// Relations written in the file.
    pub stated: Vec<Relation<T>>,
}

impl<T: Real> RelationSystem<T> {
    pub fn new(vars: Arc<VarSet>, stated: Vec<Relation<T>>) -> Self {
        let side = side_relations(&vars);
        RelationSystem { vars, side, stated }
    }

    /// Side relations followed by stated relations.
    pub fn relations(&self) -> Vec<Relation<T>> {
        self.side.iter().chain(&self.stated).cloned().collect()
    }
}

impl<T: Real> fmt::Display for RelationSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.vars.iter() {
            match v.kind.keyword() {
                Some(k) => writeln!(f, "var {} {k};", v.name)?,
                None => writeln!(f, "var {};", v.name)?,
            }
        }
        for r in &self.stated {
            writeln!(f, "rel {r};")?;
        }
        Ok(())
    }
}

struct FileParser<'a> {
    p: ExprParser<'a>,
}

impl<'a> FileParser<'a> {
    fn keyword_is(&self, kw: &str) -> bool {
        matches!(self.p.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        let at = self.p.offset();
        match self.p.peek().clone() {
            Tok::Ident(s) => {
                self.p.bump();
                Ok((s, at))
            }
            _ => Err(self.p.syntax("expected an identifier")),
        }
    }

    fn declared(&mut self, vars: &VarSet) -> Result<String, ParseError> {
        let (name, at) = self.ident()?;
        if vars.get(&name).is_none() {
            return Err(self.p.err_at(at, ParseErrorKind::UndeclaredVariable(name)));
        }
        Ok(name)
    }

    fn number<T: Real>(&mut self) -> Result<(T, usize), ParseError> {
        let at = self.p.offset();
        let neg = if *self.p.peek() == Tok::Minus {
            self.p.bump();
            true
        } else {
            false
        };
        match self.p.peek().clone() {
            Tok::Num(s) => {
                let v: T = self.p.number(&s)?;
                self.p.bump();
                Ok((if neg { -v } else { v }, at))
            }
            _ => Err(self.p.syntax("expected a number")),
        }
    }

    fn end_statement(&mut self) -> Result<bool, ParseError> {
        match self.p.peek() {
            Tok::Semi => {
                self.p.bump();
                Ok(true)
            }
            Tok::Eof => Ok(false),
            _ => Err(self.p.syntax("expected `;`")),
        }
    }

    fn decl(&mut self, vars: &mut VarSet) -> Result<(), ParseError> {
        self.p.bump();
        let (name, at) = self.ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(self.p.err_at(at, ParseErrorKind::Syntax(format!("`{name}` is a reserved word"))));
        }
        let kind = match self.p.peek().clone() {
            Tok::Ident(k) => {
                let kind = VarKind::from_keyword(&k)
                    .ok_or_else(|| self.p.syntax(format!("unknown variable kind `{k}`")))?;
                self.p.bump();
                kind
            }
            _ => VarKind::General,
        };
        vars.declare(&name, kind).map_err(|k| self.p.err_at(at, k))
    }

    fn type_err(&self, at: usize, msg: impl Into<String>) -> ParseError {
        self.p.err_at(at, ParseErrorKind::Type(msg.into()))
    }

    /// Rejects order relations on expressions that are formally skew-adjoint.
    fn check_orderable<T: Real>(&self, p: &NcPolynomial<T>, at: usize) -> Result<(), ParseError> {
        let skew = !p.is_zero() && p.add(&p.adjoint()).map(|s| s.is_zero()).unwrap_or(false);
        if skew {
            return Err(self.type_err(at, format!("order relation on non-hermitian expression `{p}`")));
        }
        Ok(())
    }

    fn var_form(&mut self, vars: &VarSet) -> Result<String, ParseError> {
        self.p.bump();
        self.p.expect(Tok::LParen, "`(`")?;
        let v = self.declared(vars)?;
        self.p.expect(Tok::RParen, "`)`")?;
        Ok(v)
    }

    fn rel<T: Real>(&mut self, vars: &Arc<VarSet>) -> Result<Relation<T>, ParseError> {
        self.p.bump();
        let at = self.p.offset();
        let next_is_paren = *self.p.peek_at(1) == Tok::LParen;
        let head = match self.p.peek() {
            Tok::Ident(s) if next_is_paren => Some(s.clone()),
            _ => None,
        };
        match head.as_deref() {
            Some("norm") => {
                self.p.bump();
                self.p.bump();
                let poly = self.p.expr(vars)?;
                self.p.expect(Tok::RParen, "`)`")?;
                let strict = match self.p.peek() {
                    Tok::Le => false,
                    Tok::Lt => true,
                    _ => return Err(self.p.syntax("expected `<=` or `<`")),
                };
                self.p.bump();
                let (bound, nat) = self.number::<T>()?;
                Relation::norm_bound(poly, bound, strict).map_err(|e| self.type_err(nat, e.to_string()))
            }
            Some("blockpos") => {
                self.p.bump();
                self.p.bump();
                let y = self.p.expr(vars)?;
                self.p.expect(Tok::Comma, "`,`")?;
                let x = self.p.expr(vars)?;
                self.p.expect(Tok::Comma, "`,`")?;
                let z = self.p.expr(vars)?;
                self.p.expect(Tok::RParen, "`)`")?;
                self.check_orderable(&y, at)?;
                self.check_orderable(&z, at)?;
                Ok(Relation::BlockPositive { y, x, z })
            }
            Some(kw @ ("re" | "normexp_re")) => {
                let kw = kw.to_string();
                let v = self.var_form(vars)?;
                self.p.expect(Tok::Le, "`<=`")?;
                let (beta, nat) = self.number::<T>()?;
                let r = if kw == "re" {
                    Relation::real_part_bound(v, beta)
                } else {
                    Relation::exp_real_norm_bound(v, beta)
                };
                r.map_err(|e| self.type_err(nat, e.to_string()))
            }
            Some(kw @ ("hermitian" | "positive" | "unitary" | "contraction" | "range01")) => {
                let kw = kw.to_string();
                let v = self.var_form(vars)?;
                Ok(match kw.as_str() {
                    "hermitian" => Relation::SelfAdjoint(v),
                    "positive" => Relation::Positive(v),
                    "unitary" => Relation::Unitary(v),
                    "contraction" => Relation::Contraction(v),
                    _ => Relation::Range01(v),
                })
            }
            _ => {
                let lhs: NcPolynomial<T> = self.p.expr(vars)?;
                let op = self.p.peek().clone();
                let op_at = self.p.offset();
                match op {
                    Tok::Eq | Tok::Ge | Tok::Le => {
                        self.p.bump();
                    }
                    _ => return Err(self.p.syntax("expected `=`, `>=` or `<=`")),
                }
                let rhs: NcPolynomial<T> = self.p.expr(vars)?;
                let diff = || lhs.sub(&rhs).expect("shared variable set");
                match op {
                    Tok::Eq => Ok(Relation::PolyZero(diff())),
                    Tok::Ge => {
                        let p = diff();
                        self.check_orderable(&p, op_at)?;
                        Ok(Relation::PolyPositive(p))
                    }
                    _ => {
                        self.check_orderable(&lhs, at)?;
                        self.check_orderable(&rhs, op_at)?;
                        Ok(Relation::OperatorOrder(lhs, rhs))
                    }
                }
            }
        }
    }
}

/// Parses a relation file into its variables and relations.
pub fn parse_relations<T: Real>(text: &str) -> Result<RelationSystem<T>, ParseError> {
    let toks = Lexer::tokenize(text)?;
    let mut fp = FileParser { p: ExprParser::new(text, &toks) };
    let mut vars = VarSet::new();
    let mut more = true;
    while more && fp.keyword_is("var") {
        fp.decl(&mut vars)?;
        more = fp.end_statement()?;
    }
    let vars = Arc::new(vars);
    let mut stated = Vec::new();
    while more && fp.keyword_is("rel") {
        stated.push(fp.rel::<T>(&vars)?);
        more = fp.end_statement()?;
    }
    if *fp.p.peek() != Tok::Eof {
        let msg = if fp.keyword_is("var") { "declarations must precede relations" } else { "expected `var` or `rel`" };
        return Err(fp.p.syntax(msg));
    }
    Ok(RelationSystem::new(vars, stated))
}
