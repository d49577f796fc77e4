//! Tokenizer and recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr     := ('+'|'-')? term (('+'|'-') term)*
//! term     := scalar? factor+
//! factor   := IDENT postfix* | '(' expr ')' postfix*
//! postfix  := '*' | '^' rational
//! scalar   := decimal | decimal 'i' | '(' decimal ('+'|'-') decimal 'i' ')'
//! rational := integer | '(' integer '/' integer ')'
//! ```
//!
//! Juxtaposition is multiplication; a postfix `*` is the adjoint. A lone
//! `0` is accepted as the zero polynomial.

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Zero;

use super::{Factor, NcPolynomial, VarKind, VarSet};
use crate::error::{ParseError, ParseErrorKind};
use crate::scalar::{Complex, Real};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Decimal literal, kept as source text.
    Num(String),
    /// Decimal literal immediately followed by `i`.
    Imag(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Le,
    Lt,
    Ge,
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

pub(crate) struct Lexer;

impl Lexer {
    pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
        let bytes = src.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        let is_ident = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if c == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            let tok = if c.is_ascii_alphabetic() || c == b'_' {
                while i < bytes.len() && is_ident(bytes[i]) {
                    i += 1;
                }
                Tok::Ident(src[start..i].to_string())
            } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = src[start..i].to_string();
                if i < bytes.len() && bytes[i] == b'i' && !bytes.get(i + 1).is_some_and(|&b| is_ident(b)) {
                    i += 1;
                    Tok::Imag(text)
                } else if i < bytes.len() && is_ident(bytes[i]) {
                    return Err(ParseError::new(src, i, ParseErrorKind::Syntax("malformed number".into())));
                } else {
                    Tok::Num(text)
                }
            } else {
                let two = bytes.get(i + 1).copied();
                i += 1;
                match (c, two) {
                    (b'<', Some(b'=')) => {
                        i += 1;
                        Tok::Le
                    }
                    (b'>', Some(b'=')) => {
                        i += 1;
                        Tok::Ge
                    }
                    (b'<', _) => Tok::Lt,
                    (b'+', _) => Tok::Plus,
                    (b'-', _) => Tok::Minus,
                    (b'*', _) => Tok::Star,
                    (b'^', _) => Tok::Caret,
                    (b'/', _) => Tok::Slash,
                    (b'(', _) => Tok::LParen,
                    (b')', _) => Tok::RParen,
                    (b',', _) => Tok::Comma,
                    (b';', _) => Tok::Semi,
                    (b'=', _) => Tok::Eq,
                    _ => {
                        let ch = src[start..].chars().next().unwrap_or('?');
                        return Err(ParseError::new(
                            src,
                            start,
                            ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
                        ));
                    }
                }
            };
            out.push(Token { tok, offset: start });
        }
        out.push(Token { tok: Tok::Eof, offset: src.len() });
        Ok(out)
    }
}

/// Words reserved by the relation language; not usable as variable names.
pub(crate) const KEYWORDS: &[&str] =
    &["var", "rel", "norm", "blockpos", "re", "normexp_re", "hermitian", "positive", "unitary", "contraction", "range01"];

pub(crate) struct ExprParser<'a> {
    pub src: &'a str,
    pub toks: &'a [Token],
    pub pos: usize,
}

enum Atom<T: Real> {
    Var(Factor),
    Poly(NcPolynomial<T>),
}

impl<'a> ExprParser<'a> {
    pub fn new(src: &'a str, toks: &'a [Token]) -> Self {
        ExprParser { src, toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    pub fn bump(&mut self) -> &Tok {
        let t = &self.toks[self.pos].tok;
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError::new(self.src, self.offset(), kind)
    }

    pub fn err_at(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError::new(self.src, offset, kind)
    }

    pub fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::Syntax(msg.into()))
    }

    pub fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}")))
        }
    }

    pub fn number<T: Real>(&self, text: &str) -> Result<T, ParseError> {
        text.parse::<T>().map_err(|_| self.syntax(format!("invalid number `{text}`")))
    }

    /// `expr`, stopping before any token that cannot continue it.
    pub fn expr<T: Real>(&mut self, vars: &Arc<VarSet>) -> Result<NcPolynomial<T>, ParseError> {
        let mut acc = NcPolynomial::zero(vars.clone());
        let mut sign = T::one();
        match self.peek() {
            Tok::Plus => {
                self.bump();
            }
            Tok::Minus => {
                self.bump();
                sign = -T::one();
            }
            _ => {}
        }
        loop {
            let t = self.term(vars)?;
            let t = t.scale(Complex::new(sign, T::zero()));
            acc = acc.add(&t).expect("shared variable set");
            match self.peek() {
                Tok::Plus => sign = T::one(),
                Tok::Minus => sign = -T::one(),
                _ => return Ok(acc),
            }
            self.bump();
        }
    }

    /// Complex scalar of the form `( d (+|-) d i )`, if one starts here.
    fn paren_scalar<T: Real>(&mut self) -> Result<Option<Complex<T>>, ParseError> {
        let mut k = 1;
        let mut re_neg = false;
        match self.peek_at(k) {
            Tok::Minus => {
                re_neg = true;
                k += 1;
            }
            Tok::Plus => k += 1,
            _ => {}
        }
        let re_text = match self.peek_at(k) {
            Tok::Num(s) => s.clone(),
            _ => return Ok(None),
        };
        let im_neg = match self.peek_at(k + 1) {
            Tok::Plus => false,
            Tok::Minus => true,
            _ => return Ok(None),
        };
        let im_text = match self.peek_at(k + 2) {
            Tok::Imag(s) => s.clone(),
            _ => return Ok(None),
        };
        if *self.peek_at(k + 3) != Tok::RParen {
            return Ok(None);
        }
        let mut re: T = self.number(&re_text)?;
        let mut im: T = self.number(&im_text)?;
        if re_neg {
            re = -re;
        }
        if im_neg {
            im = -im;
        }
        for _ in 0..(k + 4) {
            self.bump();
        }
        Ok(Some(Complex::new(re, im)))
    }

    fn term<T: Real>(&mut self, vars: &Arc<VarSet>) -> Result<NcPolynomial<T>, ParseError> {
        let start = self.offset();
        let scalar: Option<Complex<T>> = match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                Some(Complex::new(self.number(&s)?, T::zero()))
            }
            Tok::Imag(s) => {
                self.bump();
                Some(Complex::new(T::zero(), self.number(&s)?))
            }
            Tok::LParen => self.paren_scalar()?,
            _ => None,
        };
        let mut prod: Option<NcPolynomial<T>> = None;
        while matches!(self.peek(), Tok::Ident(_) | Tok::LParen) {
            if let Tok::Ident(name) = self.peek() {
                if KEYWORDS.contains(&name.as_str()) {
                    break;
                }
            }
            let f = self.factor(vars)?;
            prod = Some(match prod {
                None => f,
                Some(p) => p.mul(&f).expect("shared variable set"),
            });
        }
        match (scalar, prod) {
            (Some(c), Some(p)) => Ok(p.scale(c)),
            (None, Some(p)) => Ok(p),
            (Some(c), None) if c.re == T::zero() && c.im == T::zero() => Ok(NcPolynomial::zero(vars.clone())),
            (Some(_), None) => Err(self.err_at(start, ParseErrorKind::ConstantTerm)),
            (None, None) => Err(self.syntax("expected a term")),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        match self.peek().clone() {
            Tok::Num(s) => {
                let v = s.parse::<i64>().map_err(|_| self.syntax(format!("expected an integer, found `{s}`")))?;
                self.bump();
                Ok(v)
            }
            _ => Err(self.syntax("expected an integer")),
        }
    }

    fn rational(&mut self) -> Result<Rational64, ParseError> {
        let at = self.offset();
        let r = if *self.peek() == Tok::LParen {
            self.bump();
            let p = self.integer()?;
            self.expect(Tok::Slash, "`/`")?;
            let q = self.integer()?;
            self.expect(Tok::RParen, "`)`")?;
            if q == 0 {
                return Err(self.err_at(at, ParseErrorKind::Syntax("zero denominator".into())));
            }
            Rational64::new(p, q)
        } else {
            Rational64::from(self.integer()?)
        };
        if r <= Rational64::zero() {
            return Err(self.err_at(at, ParseErrorKind::Syntax("exponent must be positive".into())));
        }
        Ok(r)
    }

    fn factor<T: Real>(&mut self, vars: &Arc<VarSet>) -> Result<NcPolynomial<T>, ParseError> {
        let mut atom: Atom<T> = match self.peek().clone() {
            Tok::Ident(name) => {
                if vars.get(&name).is_none() {
                    return Err(self.err(ParseErrorKind::UndeclaredVariable(name)));
                }
                self.bump();
                Atom::Var(Factor::new(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(vars)?;
                self.expect(Tok::RParen, "`)`")?;
                Atom::Poly(inner)
            }
            _ => return Err(self.syntax("expected a variable or `(`")),
        };
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    atom = match atom {
                        Atom::Var(f) => Atom::Var(f.adjointed()),
                        Atom::Poly(p) => Atom::Poly(p.adjoint()),
                    };
                }
                Tok::Caret => {
                    self.bump();
                    let r_at = self.offset();
                    let r = self.rational()?;
                    atom = match atom {
                        Atom::Var(f) => {
                            let kind = vars.kind(&f.var).unwrap_or(VarKind::General);
                            let combined = f.exp * r;
                            let fractional = !r.is_integer() || !combined.is_integer();
                            if fractional && !kind.is_self_adjoint() {
                                return Err(self.err_at(r_at, ParseErrorKind::FractionalPowerOnGeneral(f.var)));
                            }
                            Atom::Var(f.pow(r))
                        }
                        Atom::Poly(p) => {
                            if !r.is_integer() {
                                return Err(self.err_at(r_at, ParseErrorKind::FractionalPowerOfCompound));
                            }
                            let n = u32::try_from(*r.numer())
                                .map_err(|_| self.err_at(r_at, ParseErrorKind::Syntax("exponent too large".into())))?;
                            Atom::Poly(if p.is_zero() { p } else { p.pow(n).expect("positive power") })
                        }
                    };
                }
                _ => break,
            }
        }
        Ok(match atom {
            Atom::Var(f) => {
                let c = Complex::new(T::one(), T::zero());
                NcPolynomial::canonical(vars.clone(), vec![(c, vec![f])])
            }
            Atom::Poly(p) => p,
        })
    }
}

/// Parses a polynomial expression over the declared variables.
pub fn parse_poly<T: Real>(text: &str, vars: &Arc<VarSet>) -> Result<NcPolynomial<T>, ParseError> {
    let toks = Lexer::tokenize(text)?;
    let mut p = ExprParser::new(text, &toks);
    let poly = p.expr(vars)?;
    if *p.peek() != Tok::Eof {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(poly)
}
