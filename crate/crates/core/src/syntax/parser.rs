//! Recursive-descent parser for the surface language.

use std::fmt;

use super::ast::*;
use super::lexer::{tokenize, Keyword, LexError, Token, TokenKind};
use crate::ops::PrimOp;
use crate::sens::{GradualSens, Sens};

#[derive(Clone, PartialEq, Debug)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {}, found {}", one, self.found),
            many => write!(f, "expected one of {}, found {}", many.join(", "), self.found),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum SyntaxError {
    Lex(LexError),
    Parse(ParseError),
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Lex(e) => e.span,
            SyntaxError::Parse(e) => e.span,
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntaxError::Lex(e) => write!(f, "{}", e),
            SyntaxError::Parse(e) => write!(f, "{}", e),
        }
    }
}

impl From<LexError> for SyntaxError {
    fn from(e: LexError) -> Self {
        SyntaxError::Lex(e)
    }
}

impl From<ParseError> for SyntaxError {
    fn from(e: ParseError) -> Self {
        SyntaxError::Parse(e)
    }
}

type PResult<T> = Result<T, ParseError>;

pub fn parse_program(src: &str) -> Result<Program, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    Ok(p.program()?)
}

pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr()?;
    p.expect(TokenKind::Eof, "end of input")?;
    Ok(e)
}

pub fn parse_type(src: &str) -> Result<TyExpr, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let t = p.ty()?;
    p.expect(TokenKind::Eof, "end of input")?;
    Ok(t)
}

pub fn parse_effect(src: &str) -> Result<EffExpr, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.effect(&[TokenKind::Eof])?;
    p.expect(TokenKind::Eof, "end of input")?;
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

fn describe(kind: TokenKind) -> &'static str {
    match kind {
        TokenKind::Number(_) => "a number",
        TokenKind::Interval(..) => "an interval",
        TokenKind::Ident => "an identifier",
        TokenKind::Keyword(_) => "a keyword",
        TokenKind::LParen => "`(`",
        TokenKind::RParen => "`)`",
        TokenKind::LBracket => "`[`",
        TokenKind::RBracket => "`]`",
        TokenKind::LBrace => "`{`",
        TokenKind::RBrace => "`}`",
        TokenKind::Lt => "`<`",
        TokenKind::Gt => "`>`",
        TokenKind::Le => "`<=`",
        TokenKind::Ge => "`>=`",
        TokenKind::EqEq => "`==`",
        TokenKind::Ne => "`!=`",
        TokenKind::Eq => "`=`",
        TokenKind::Comma => "`,`",
        TokenKind::Semi => "`;`",
        TokenKind::Colon => "`:`",
        TokenKind::ColonColon => "`::`",
        TokenKind::Dot => "`.`",
        TokenKind::FatArrow => "`=>`",
        TokenKind::Arrow => "`->`",
        TokenKind::Plus => "`+`",
        TokenKind::Minus => "`-`",
        TokenKind::Star => "`*`",
        TokenKind::Slash => "`/`",
        TokenKind::AndAnd => "`&&`",
        TokenKind::OrOr => "`||`",
        TokenKind::Bang => "`!`",
        TokenKind::Question => "`?`",
        TokenKind::Pipe => "`|`",
        TokenKind::Lambda => "`Λ`",
        TokenKind::EmptySet => "`∅`",
        TokenKind::Eof => "end of input",
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Token {
        self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> Token {
        self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        self.peek().kind == TokenKind::Keyword(kw)
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        let found = match t.kind {
            TokenKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", t.lexeme(self.src)),
        };
        Err(ParseError { span: t.span, expected: expected.iter().map(|s| s.to_string()).collect(), found })
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Token> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            self.error(&[what])
        }
    }

    fn expect_tok(&mut self, kind: TokenKind) -> PResult<Token> {
        self.expect(kind, describe(kind))
    }

    fn expect_kw(&mut self, kw: Keyword, what: &str) -> PResult<Token> {
        self.expect(TokenKind::Keyword(kw), what)
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        let t = self.peek();
        if t.kind == TokenKind::Ident {
            self.bump();
            Ok((t.lexeme(self.src).to_string(), t.span))
        } else {
            self.error(&["an identifier"])
        }
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    // ---- program and statements -------------------------------------------

    fn program(&mut self) -> PResult<Program> {
        let mut items = Vec::new();
        while !self.at(TokenKind::Eof) {
            if self.eat(TokenKind::Semi) {
                continue;
            }
            let stmt = self.stmt()?;
            let needs_semi = matches!(stmt, Stmt::Expr(_));
            items.push(stmt);
            if needs_semi && !self.eat(TokenKind::Semi) && !self.at(TokenKind::Eof) {
                return self.error(&["`;`", "end of input"]);
            }
        }
        Ok(Program { items })
    }

    /// A `let`, `def` or expression; `let` and `def` consume their `;`.
    fn stmt(&mut self) -> PResult<Stmt> {
        if self.at_kw(Keyword::Let) {
            let start = self.bump().span;
            let res = self.eat(TokenKind::Keyword(Keyword::Res));
            let (name, _) = self.ident()?;
            let ty = if self.eat(TokenKind::Colon) { Some(self.ty()?) } else { None };
            self.expect(TokenKind::Eq, "`=`")?;
            let value = self.expr()?;
            self.expect(TokenKind::Semi, "`;`")?;
            Ok(Stmt::Let { name, res, ty, value, span: start.to(self.prev_span()) })
        } else if self.at_kw(Keyword::Def) {
            Ok(Stmt::Def(self.def()?))
        } else {
            Ok(Stmt::Expr(self.expr()?))
        }
    }

    fn def(&mut self) -> PResult<Def> {
        let start = self.expect_kw(Keyword::Def, "`def`")?.span;
        let (name, _) = self.ident()?;
        let mut tparams = Vec::new();
        if self.eat(TokenKind::Lt) {
            loop {
                tparams.push(self.ident()?.0);
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
            self.expect(TokenKind::Gt, "`>`")?;
        }
        let mut rparams = Vec::new();
        if self.eat(TokenKind::LBracket) {
            loop {
                rparams.push(self.ident()?.0);
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
            self.expect(TokenKind::RBracket, "`]`")?;
        }
        self.expect_tok(TokenKind::LParen)?;
        let params = self.params()?;
        let ret = if self.eat(TokenKind::Colon) { Some(self.ty()?) } else { None };
        self.expect(TokenKind::Eq, "`=`")?;
        let body = self.expr()?;
        self.expect(TokenKind::Semi, "`;`")?;
        Ok(Def { name, tparams, rparams, params, ret, body, span: start.to(self.prev_span()) })
    }

    /// Parameters after `(`, through the closing `)`; trailing commas allowed.
    fn params(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        while !self.at(TokenKind::RParen) {
            let start = self.peek().span;
            let res = self.eat(TokenKind::Keyword(Keyword::Res));
            let (name, _) = self.ident()?;
            self.expect(TokenKind::Colon, "`:`")?;
            let ty = self.ty()?;
            params.push(Param { name, res, ty, span: start.to(self.prev_span()) });
            if !self.eat(TokenKind::Comma) {
                break;
            }
        }
        self.expect_tok(TokenKind::RParen)?;
        Ok(params)
    }

    // ---- types ------------------------------------------------------------

    pub fn ty(&mut self) -> PResult<TyExpr> {
        let start = self.peek().span;
        if self.eat(TokenKind::Keyword(Keyword::Forall)) {
            let (r, _) = self.ident()?;
            self.expect_tok(TokenKind::Dot)?;
            let body = self.ty()?;
            return Ok(TyExpr::new(TyKind::Forall(r, Box::new(body)), start.to(self.prev_span())));
        }
        if self.eat(TokenKind::Keyword(Keyword::Mu)) {
            let (a, _) = self.ident()?;
            self.expect_tok(TokenKind::Dot)?;
            let body = self.ty()?;
            return Ok(TyExpr::new(TyKind::Rec(a, Box::new(body)), start.to(self.prev_span())));
        }
        let lhs = self.sum_ty()?;
        if self.eat(TokenKind::Arrow) {
            let rhs = self.ty()?;
            let span = lhs.span.to(rhs.span);
            return Ok(TyExpr::new(TyKind::Arrow(Box::new(lhs), Box::new(rhs)), span));
        }
        Ok(lhs)
    }

    fn sum_ty(&mut self) -> PResult<TyExpr> {
        let mut lhs = self.prod_ty()?;
        while self.eat(TokenKind::Plus) {
            let rhs = self.prod_ty()?;
            let span = lhs.span.to(rhs.span);
            lhs = TyExpr::new(TyKind::Sum(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn prod_ty(&mut self) -> PResult<TyExpr> {
        let mut lhs = self.atom_ty()?;
        while self.eat(TokenKind::Star) {
            let rhs = self.atom_ty()?;
            let span = lhs.span.to(rhs.span);
            lhs = TyExpr::new(TyKind::Prod(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn atom_ty(&mut self) -> PResult<TyExpr> {
        let start = self.peek().span;
        let mut t = if self.eat(TokenKind::LParen) {
            let inner = self.ty()?;
            self.expect_tok(TokenKind::RParen)?;
            inner
        } else if self.at(TokenKind::Ident) {
            let (name, span) = self.ident()?;
            let kind = match name.as_str() {
                "Number" => TyKind::Number,
                "Boolean" => TyKind::Boolean,
                "Unit" => TyKind::Unit,
                "List" => {
                    self.expect(TokenKind::Lt, "`<`")?;
                    let elem = self.ty()?;
                    self.expect(TokenKind::Gt, "`>`")?;
                    TyKind::List(Box::new(elem))
                }
                _ => TyKind::Named(name),
            };
            TyExpr::new(kind, span)
        } else {
            return self.error(&["a type"]);
        };
        while self.at(TokenKind::LBracket) {
            self.bump();
            let eff = self.effect(&[TokenKind::RBracket])?;
            self.expect_tok(TokenKind::RBracket)?;
            t.eff.extend(eff);
        }
        t.span = start.to(self.prev_span());
        Ok(t)
    }

    /// An effect polynomial, terminated by one of `stop`.
    fn effect(&mut self, stop: &[TokenKind]) -> PResult<EffExpr> {
        let mut terms = Vec::new();
        if self.eat(TokenKind::EmptySet) || stop.contains(&self.peek().kind) {
            return Ok(terms);
        }
        loop {
            let start = self.peek().span;
            let coef = self.coefficient()?;
            let (res, _) = self.ident()?;
            if !coef.is_zero() {
                terms.push(EffTerm { coef, res, span: start.to(self.prev_span()) });
            }
            if !self.eat(TokenKind::Plus) {
                break;
            }
        }
        Ok(terms)
    }

    fn coefficient(&mut self) -> PResult<GradualSens> {
        let t = self.peek();
        let exact = |v: f64| GradualSens::exact(Sens::new(v).expect("lexer yields non-negative numbers"));
        match t.kind {
            TokenKind::Number(v) => {
                self.bump();
                Ok(exact(v))
            }
            TokenKind::Interval(lo, hi) => {
                self.bump();
                Ok(GradualSens::from_f64(lo, hi).expect("lexer checks interval order"))
            }
            TokenKind::Question => {
                self.bump();
                Ok(GradualSens::UNKNOWN)
            }
            TokenKind::Ident if t.lexeme(self.src) == "inf" && self.peek_at(1).kind == TokenKind::Ident => {
                self.bump();
                Ok(exact(f64::INFINITY))
            }
            TokenKind::LBracket => {
                self.bump();
                let lo = self.bound()?;
                self.expect_tok(TokenKind::Comma)?;
                let hi = self.bound()?;
                self.expect_tok(TokenKind::RBracket)?;
                match GradualSens::from_f64(lo, hi) {
                    Some(g) => Ok(g),
                    None => Err(ParseError {
                        span: t.span.to(self.prev_span()),
                        expected: vec!["a non-empty interval".into()],
                        found: format!("[{}, {}]", lo, hi),
                    }),
                }
            }
            TokenKind::Ident => Ok(GradualSens::exact(Sens::ONE)),
            _ => self.error(&["a sensitivity", "a resource"]),
        }
    }

    fn bound(&mut self) -> PResult<f64> {
        let t = self.peek();
        match t.kind {
            TokenKind::Number(v) => {
                self.bump();
                Ok(v)
            }
            TokenKind::Ident if t.lexeme(self.src) == "inf" => {
                self.bump();
                Ok(f64::INFINITY)
            }
            _ => self.error(&["a number", "`inf`"]),
        }
    }

    // ---- expressions ------------------------------------------------------

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.binary(1)?;
        while self.eat(TokenKind::ColonColon) {
            let t = self.ty()?;
            let span = e.span.to(t.span);
            e = Expr::new(ExprKind::Ascr(Box::new(e), t), span);
        }
        Ok(e)
    }

    fn binop(&self) -> Option<PrimOp> {
        Some(match self.peek().kind {
            TokenKind::OrOr => PrimOp::Or,
            TokenKind::AndAnd => PrimOp::And,
            TokenKind::Lt => PrimOp::Lt,
            TokenKind::Le => PrimOp::Le,
            TokenKind::Gt => PrimOp::Gt,
            TokenKind::Ge => PrimOp::Ge,
            TokenKind::EqEq => PrimOp::Eq,
            TokenKind::Ne => PrimOp::Ne,
            TokenKind::Plus => PrimOp::Add,
            TokenKind::Minus => PrimOp::Sub,
            TokenKind::Star => PrimOp::Mul,
            TokenKind::Slash => PrimOp::Div,
            _ => return None,
        })
    }

    /// Precedence climbing over left-associative binary operators.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::Op(op, vec![lhs, rhs]), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        if self.eat(TokenKind::Minus) {
            let e = self.unary()?;
            if let ExprKind::Num(v) = e.kind {
                return Ok(Expr::new(ExprKind::Num(-v), start.to(e.span)));
            }
            let span = start.to(e.span);
            return Ok(Expr::new(ExprKind::Op(PrimOp::Neg, vec![e]), span));
        }
        if self.eat(TokenKind::Bang) {
            let e = self.unary()?;
            let span = start.to(e.span);
            return Ok(Expr::new(ExprKind::Op(PrimOp::Not, vec![e]), span));
        }
        self.postfix()
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        while !self.at(TokenKind::RParen) {
            args.push(self.expr()?);
            if !self.eat(TokenKind::Comma) {
                break;
            }
        }
        self.expect_tok(TokenKind::RParen)?;
        Ok(args)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat(TokenKind::LParen) {
                let args = self.args()?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(ExprKind::Call(Box::new(e), args), span);
            } else if self.at(TokenKind::LBracket) {
                self.bump();
                let eff = self.effect(&[TokenKind::RBracket])?;
                self.expect_tok(TokenKind::RBracket)?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(ExprKind::ResApp(Box::new(e), eff), span);
            } else if self.at(TokenKind::Dot) && self.peek_at(1).kind == TokenKind::Ident {
                self.bump();
                let (method, mspan) = self.ident()?;
                self.expect_tok(TokenKind::LParen)?;
                let mut args = self.args()?;
                let span = e.span.to(self.prev_span());
                let recv = Box::new(e);
                e = match (method.as_str(), args.len()) {
                    ("get", 1) => Expr::new(ExprKind::Get(recv, Box::new(args.remove(0))), span),
                    ("length", 0) => Expr::new(ExprKind::Length(recv), span),
                    ("indexOf", 1) => Expr::new(ExprKind::IndexOf(recv, Box::new(args.remove(0))), span),
                    _ => {
                        return Err(ParseError {
                            span: mspan,
                            expected: vec!["`get(i)`, `length()` or `indexOf(f)`".into()],
                            found: format!("`{}` with {} argument(s)", method, args.len()),
                        })
                    }
                };
            } else {
                return Ok(e);
            }
        }
    }

    /// Tries `< types > (` after an identifier; restores the position on failure.
    fn try_template_args(&mut self) -> Option<Vec<TyExpr>> {
        let save = self.pos;
        let attempt = (|| -> PResult<Vec<TyExpr>> {
            self.expect_tok(TokenKind::Lt)?;
            let mut tys = vec![self.ty()?];
            while self.eat(TokenKind::Comma) {
                tys.push(self.ty()?);
            }
            self.expect_tok(TokenKind::Gt)?;
            if !self.at(TokenKind::LParen) {
                return self.error(&["`(`"]);
            }
            Ok(tys)
        })();
        match attempt {
            Ok(tys) => Some(tys),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    fn paren1(&mut self) -> PResult<Expr> {
        self.expect_tok(TokenKind::LParen)?;
        let e = self.expr()?;
        self.expect_tok(TokenKind::RParen)?;
        Ok(e)
    }

    fn angle_ty(&mut self) -> PResult<TyExpr> {
        self.expect_tok(TokenKind::Lt)?;
        let t = self.ty()?;
        self.expect_tok(TokenKind::Gt)?;
        Ok(t)
    }

    fn block(&mut self) -> PResult<Expr> {
        let start = self.expect_tok(TokenKind::LBrace)?.span;
        let mut stmts = Vec::new();
        let mut tail = None;
        while !self.at(TokenKind::RBrace) {
            if self.eat(TokenKind::Semi) {
                continue;
            }
            match self.stmt()? {
                Stmt::Expr(e) => {
                    if self.eat(TokenKind::Semi) {
                        if self.at(TokenKind::RBrace) {
                            tail = Some(Box::new(e));
                        } else {
                            stmts.push(Stmt::Expr(e));
                        }
                    } else if self.at(TokenKind::RBrace) {
                        tail = Some(Box::new(e));
                    } else {
                        return self.error(&["`;`", "`}`"]);
                    }
                }
                s => stmts.push(s),
            }
        }
        self.expect_tok(TokenKind::RBrace)?;
        Ok(Expr::new(ExprKind::Block(stmts, tail), start.to(self.prev_span())))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        let start = t.span;
        let done = |p: &Self, kind: ExprKind| Ok(Expr::new(kind, start.to(p.prev_span())));
        match t.kind {
            TokenKind::Number(v) => {
                self.bump();
                done(self, ExprKind::Num(v))
            }
            TokenKind::LBrace => self.block(),
            TokenKind::LParen => {
                self.bump();
                if self.eat(TokenKind::RParen) {
                    return done(self, ExprKind::Unit);
                }
                let a = self.expr()?;
                if self.eat(TokenKind::Comma) {
                    let b = self.expr()?;
                    self.expect_tok(TokenKind::RParen)?;
                    return done(self, ExprKind::Pair(Box::new(a), Box::new(b)));
                }
                self.expect_tok(TokenKind::RParen)?;
                Ok(Expr::new(a.kind, start.to(self.prev_span())))
            }
            TokenKind::Lambda => {
                self.bump();
                let (r, _) = self.ident()?;
                self.expect_tok(TokenKind::Dot)?;
                let body = self.expr()?;
                done(self, ExprKind::ResLam(r, Box::new(body)))
            }
            TokenKind::Ident => {
                let (name, _) = self.ident()?;
                match name.as_str() {
                    "List" => {
                        let ann = if self.at(TokenKind::Lt) { Some(self.angle_ty()?) } else { None };
                        self.expect_tok(TokenKind::LParen)?;
                        let elems = self.args()?;
                        return done(self, ExprKind::List(ann, elems));
                    }
                    "get" | "length" | "indexOf" if self.at(TokenKind::LParen) => {
                        self.bump();
                        let mut args = self.args()?;
                        let kind = match (name.as_str(), args.len()) {
                            ("get", 2) => {
                                let i = args.pop().unwrap();
                                ExprKind::Get(Box::new(args.pop().unwrap()), Box::new(i))
                            }
                            ("length", 1) => ExprKind::Length(Box::new(args.pop().unwrap())),
                            ("indexOf", 2) => {
                                let f = args.pop().unwrap();
                                ExprKind::IndexOf(Box::new(args.pop().unwrap()), Box::new(f))
                            }
                            _ => {
                                return Err(ParseError {
                                    span: start,
                                    expected: vec![format!("the arity of `{}`", name)],
                                    found: format!("{} argument(s)", args.len()),
                                })
                            }
                        };
                        return done(self, kind);
                    }
                    _ => {}
                }
                if self.at(TokenKind::Lt) {
                    if let Some(tys) = self.try_template_args() {
                        return done(self, ExprKind::Template(name, tys));
                    }
                }
                done(self, ExprKind::Var(name))
            }
            TokenKind::Keyword(kw) => match kw {
                Keyword::True | Keyword::False => {
                    self.bump();
                    done(self, ExprKind::Bool(kw == Keyword::True))
                }
                Keyword::Fn => {
                    self.bump();
                    self.expect_tok(TokenKind::LParen)?;
                    let params = self.params()?;
                    self.expect(TokenKind::FatArrow, "`=>`")?;
                    let body = self.expr()?;
                    done(self, ExprKind::Lam(params, Box::new(body)))
                }
                Keyword::If => {
                    self.bump();
                    let c = self.expr()?;
                    self.expect_kw(Keyword::Then, "`then`")?;
                    let a = self.expr()?;
                    self.expect_kw(Keyword::Else, "`else`")?;
                    let b = self.expr()?;
                    done(self, ExprKind::If(Box::new(c), Box::new(a), Box::new(b)))
                }
                Keyword::Try => {
                    self.bump();
                    let body = self.block()?;
                    self.expect_kw(Keyword::Catch, "`catch`")?;
                    let handler = self.block()?;
                    done(self, ExprKind::Try(Box::new(body), Box::new(handler)))
                }
                Keyword::Case => {
                    self.bump();
                    let scrut = self.expr()?;
                    self.expect_kw(Keyword::Of, "`of`")?;
                    self.expect_tok(TokenKind::LBrace)?;
                    self.eat(TokenKind::Pipe);
                    self.expect_kw(Keyword::Inl, "`inl`")?;
                    let (x, _) = self.ident()?;
                    self.expect(TokenKind::FatArrow, "`=>`")?;
                    let l = self.expr()?;
                    self.expect_tok(TokenKind::Pipe)?;
                    self.expect_kw(Keyword::Inr, "`inr`")?;
                    let (y, _) = self.ident()?;
                    self.expect(TokenKind::FatArrow, "`=>`")?;
                    let r = self.expr()?;
                    self.expect_tok(TokenKind::RBrace)?;
                    done(self, ExprKind::Case { scrut: Box::new(scrut), left: (x, Box::new(l)), right: (y, Box::new(r)) })
                }
                Keyword::Inl | Keyword::Inr => {
                    self.bump();
                    let other = self.angle_ty()?;
                    let e = self.paren1()?;
                    let kind = if kw == Keyword::Inl {
                        ExprKind::Inl(other, Box::new(e))
                    } else {
                        ExprKind::Inr(other, Box::new(e))
                    };
                    done(self, kind)
                }
                Keyword::Fold => {
                    self.bump();
                    let t = self.angle_ty()?;
                    let e = self.paren1()?;
                    done(self, ExprKind::Fold(t, Box::new(e)))
                }
                Keyword::Unfold | Keyword::Fst | Keyword::Snd => {
                    self.bump();
                    let e = Box::new(self.paren1()?);
                    let kind = match kw {
                        Keyword::Unfold => ExprKind::Unfold(e),
                        Keyword::Fst => ExprKind::Fst(e),
                        _ => ExprKind::Snd(e),
                    };
                    done(self, kind)
                }
                Keyword::Fix => {
                    self.bump();
                    self.expect_tok(TokenKind::LParen)?;
                    let (f, _) = self.ident()?;
                    self.expect(TokenKind::Colon, "`:`")?;
                    let t = self.ty()?;
                    self.expect_tok(TokenKind::RParen)?;
                    self.expect(TokenKind::FatArrow, "`=>`")?;
                    let body = self.expr()?;
                    done(self, ExprKind::Fix(f, t, Box::new(body)))
                }
                Keyword::Laplace => {
                    self.bump();
                    self.expect_tok(TokenKind::LParen)?;
                    let start_args = self.peek().span;
                    let mut args = self.args()?;
                    if args.len() != 3 {
                        return Err(ParseError {
                            span: start_args,
                            expected: vec!["3 arguments to `laplace`".into()],
                            found: format!("{}", args.len()),
                        });
                    }
                    let eps = args.pop().unwrap();
                    let s = args.pop().unwrap();
                    let v = args.pop().unwrap();
                    done(self, ExprKind::Laplace(Box::new(v), Box::new(s), Box::new(eps)))
                }
                _ => self.error(&["an expression"]),
            },
            _ => self.error(&["an expression"]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("1 + 2 * 3 < 4 && true || false :: Boolean").unwrap();
        let ExprKind::Ascr(inner, _) = e.kind else { panic!() };
        let ExprKind::Op(PrimOp::Or, _) = inner.kind else { panic!() };
    }

    #[test]
    fn template_call_vs_comparison() {
        let e = parse_expr("GLM<Number>(db, f, eps / 4)").unwrap();
        assert!(matches!(e.kind, ExprKind::Call(ref f, _) if matches!(f.kind, ExprKind::Template(..))));
        let e = parse_expr("a < b").unwrap();
        assert!(matches!(e.kind, ExprKind::Op(PrimOp::Lt, _)));
    }

    #[test]
    fn incomplete_input() {
        assert!(parse_expr("1 + ").is_err());
    }

    #[test]
    fn types_and_effects() {
        let t = parse_type("List<T[1db] -> Number[?db]>").unwrap();
        assert!(matches!(t.kind, TyKind::List(_)));
        let t = parse_type("(Number -> Number)[2x + [0,3]y]").unwrap();
        assert_eq!(t.eff.len(), 2);
        assert!(matches!(t.kind, TyKind::Arrow(..)));
        let t = parse_type("Number[0r]").unwrap();
        assert!(t.eff.is_empty());
        let t = parse_type("Number[inf r]").unwrap();
        assert!(t.eff[0].coef.lo().is_inf());
    }

    #[test]
    fn blocks_take_trailing_expression() {
        let e = parse_expr("{ let a = 1; a + 1; }").unwrap();
        let ExprKind::Block(stmts, tail) = e.kind else { panic!() };
        assert_eq!(stmts.len(), 1);
        assert!(tail.is_some());
    }
}
