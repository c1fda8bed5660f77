//! Recursive-descent parsing of terms and S-terms.

use num_rational::BigRational;

use super::lexer::{lex, Tok, Token, KEYWORDS};
use crate::calculus::{Action, Calculus, Term, Var};
use crate::error::{ParseError, Result, SourceSpan};
use crate::fragments::{LoopGuard, LoopVar, StarExp};
use crate::kernel::{OpSyntax, STerm, Theory};
use crate::weight::parse_rational;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(src: &str, offset: usize) -> Result<Parser, ParseError> {
        let mut toks = lex(src)?;
        for t in &mut toks {
            t.span = SourceSpan::new(t.span.start + offset, t.span.end + offset);
        }
        Ok(Parser { toks, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(msg, self.span())
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<SourceSpan, ParseError> {
        if self.at_sym(s) {
            Ok(self.bump().span)
        } else {
            Err(self.error(format!(
                "expected `{s}`, found {}",
                Self::describe(self.peek())
            )))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok((s, self.bump().span)),
            other => Err(self.error(format!("expected {what}, found {}", Self::describe(&other)))),
        }
    }

    pub fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            other => Err(self.error(format!(
                "unexpected {} after the end of the expression",
                Self::describe(other)
            ))),
        }
    }

    pub fn rational(&mut self) -> Result<BigRational, ParseError> {
        let start = self.span();
        let Tok::Num(n) = self.peek().clone() else {
            return Err(self.error("expected a rational weight"));
        };
        self.bump();
        let mut text = n;
        let mut span = start;
        if self.eat_sym("/") {
            let Tok::Num(d) = self.peek().clone() else {
                return Err(self.error("expected a denominator"));
            };
            span = span.join(self.bump().span);
            text = format!("{text}/{d}");
        }
        parse_rational(&text).map_err(|e| ParseError::new(e.to_string(), span))
    }

    /// A binary operation symbol, if one starts here.
    pub fn binop(&mut self) -> Result<Option<(OpSyntax, SourceSpan)>, ParseError> {
        let start = self.span();
        if self.eat_sym("?") {
            self.expect_sym("{")?;
            let mut names = Vec::new();
            if !self.at_sym("}") {
                loop {
                    names.push(self.expect_ident("an atom")?.0);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            let end = self.expect_sym("}")?;
            return Ok(Some((OpSyntax::Guard(names), start.join(end))));
        }
        if self.at_sym("+") {
            self.bump();
            if self.eat_sym("[") {
                let r = self.rational()?;
                let end = self.expect_sym("]")?;
                return Ok(Some((OpSyntax::Mix(r), start.join(end))));
            }
            return Ok(Some((OpSyntax::Join, start)));
        }
        Ok(None)
    }

    pub fn op<T: Theory>(
        &self,
        theory: &T,
        syntax: &OpSyntax,
        span: SourceSpan,
    ) -> Result<T::Op, ParseError> {
        theory
            .op_from_syntax(syntax)
            .and_then(|o| theory.validate_op(&o).map(|_| o))
            .map_err(|e| ParseError::new(e.to_string(), span))
    }

    pub fn term<T: Theory>(&mut self, calc: &Calculus<T>) -> Result<Term<T::Op>, ParseError> {
        let lhs = self.unary(calc)?;
        match self.binop()? {
            None => Ok(lhs),
            Some((syn, span)) => {
                let op = self.op(&calc.theory, &syn, span)?;
                let rhs = self.term(calc)?;
                Ok(Term::Op(op, vec![lhs, rhs]))
            }
        }
    }

    fn unary<T: Theory>(&mut self, calc: &Calculus<T>) -> Result<Term<T::Op>, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) if n == "0" => {
                self.bump();
                Ok(Term::Zero)
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term(calc)?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(kw) if kw == "beta" || kw == "mu" => {
                self.bump();
                let (v, _) = self.expect_ident("a bound variable")?;
                self.expect_sym(".")?;
                let body = Box::new(self.term(calc)?);
                Ok(if kw == "mu" {
                    Term::Mu(Var::new(v), body)
                } else {
                    Term::Beta(Var::new(v), body)
                })
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let span = self.bump().span;
                if self.at_sym(".") {
                    self.bump();
                    let a = Action::new(&name);
                    calc.actions
                        .check(&a)
                        .map_err(|e| ParseError::new(e.to_string(), span))?;
                    let body = self.unary(calc)?;
                    Ok(Term::Prefix(a, Box::new(body)))
                } else {
                    Ok(Term::Ret(Var::new(name)))
                }
            }
            other => Err(self.error(format!("expected a term, found {}", Self::describe(&other)))),
        }
    }

    /// S-terms over named generators.
    pub fn sterm<T: Theory>(&mut self, theory: &T) -> Result<STerm<T::Op, String>, ParseError> {
        let lhs = match self.peek().clone() {
            Tok::Num(n) if n == "0" => {
                self.bump();
                STerm::Zero
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.sterm(theory)?;
                self.expect_sym(")")?;
                t
            }
            Tok::Ident(_) => STerm::Gen(self.expect_ident("a generator")?.0),
            other => {
                return Err(self.error(format!(
                    "expected an operation term, found {}",
                    Self::describe(&other)
                )))
            }
        };
        match self.binop()? {
            None => Ok(lhs),
            Some((syn, span)) => {
                let op = self.op(theory, &syn, span)?;
                Ok(STerm::Op(op, vec![lhs, self.sterm(theory)?]))
            }
        }
    }
    /// Star-layer expressions: choice binds loosest, then `;`, then loops.
    pub fn star<T: Theory>(&mut self, calc: &Calculus<T>) -> Result<StarExp<T::Op>, ParseError> {
        let lhs = self.seq(calc)?;
        match self.binop()? {
            None => Ok(lhs),
            Some((syn, span)) => {
                let op = self.op(&calc.theory, &syn, span)?;
                let rhs = self.star(calc)?;
                Ok(StarExp::op(op, lhs, rhs))
            }
        }
    }

    fn seq<T: Theory>(&mut self, calc: &Calculus<T>) -> Result<StarExp<T::Op>, ParseError> {
        let mut e = self.postfix(calc)?;
        while self.eat_sym(";") {
            e = StarExp::seq(e, self.postfix(calc)?);
        }
        Ok(e)
    }

    fn postfix<T: Theory>(&mut self, calc: &Calculus<T>) -> Result<StarExp<T::Op>, ParseError> {
        let mut e = self.star_atom(calc)?;
        while self.eat_sym("*") {
            self.expect_sym("{")?;
            let guard = match self.binop()? {
                Some((syn, span)) => LoopGuard::Op(self.op(&calc.theory, &syn, span)?),
                None => {
                    let start = self.span();
                    let p = self.sterm(&calc.theory)?;
                    let span = start.join(self.span());
                    let mut bad = None;
                    let p = p.map_gens(&mut |g: &String| match g.as_str() {
                        "x" => LoopVar::X,
                        "y" => LoopVar::Y,
                        _ => {
                            bad.get_or_insert_with(|| g.clone());
                            LoopVar::X
                        }
                    });
                    if let Some(g) = bad {
                        return Err(ParseError::new(
                            format!("loop payloads may only mention `x` and `y`, found `{g}`"),
                            span,
                        ));
                    }
                    LoopGuard::Poly(p)
                }
            };
            self.expect_sym("}")?;
            e = StarExp::Loop(Box::new(e), guard);
        }
        Ok(e)
    }

    fn star_atom<T: Theory>(&mut self, calc: &Calculus<T>) -> Result<StarExp<T::Op>, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) if n == "0" => {
                self.bump();
                Ok(StarExp::Zero)
            }
            Tok::Num(n) if n == "1" => {
                self.bump();
                Ok(StarExp::One)
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.star(calc)?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(kw) if kw == "ret" => {
                self.bump();
                let (v, _) = self.expect_ident("a return constant")?;
                Ok(StarExp::Const(Var::new(v)))
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let span = self.bump().span;
                let a = Action::new(&name);
                calc.actions
                    .check(&a)
                    .map_err(|e| ParseError::new(e.to_string(), span))?;
                Ok(StarExp::Act(a))
            }
            other => Err(self.error(format!(
                "expected an expression, found {}",
                Self::describe(&other)
            ))),
        }
    }
}

pub fn parse_term<T: Theory>(calc: &Calculus<T>, text: &str) -> Result<Term<T::Op>> {
    let mut p = Parser::new(text, 0)?;
    let t = p.term(calc)?;
    p.finish()?;
    Ok(t)
}

pub fn parse_sterm<T: Theory>(theory: &T, text: &str) -> Result<STerm<T::Op, String>> {
    let mut p = Parser::new(text, 0)?;
    let t = p.sterm(theory)?;
    p.finish()?;
    Ok(t)
}

pub fn parse_star<T: Theory>(calc: &Calculus<T>, text: &str) -> Result<StarExp<T::Op>> {
    let mut p = Parser::new(text, 0)?;
    let e = p.star(calc)?;
    p.finish()?;
    Ok(e)
}
