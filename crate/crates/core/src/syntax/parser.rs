//! Recursive descent parser.
//!
//! Precedence, loosest first: `⇔` (left), `⇒` (right), `∨`, `∧`, comparisons
//! (non-associative), `+ -`, `⋅ / %`, prefix `¬ -`, postfix (call, index,
//! projection, `with`). Quantifiers, `choose`, `let`, `letpar` and `if` are
//! prefix forms whose body extends as far right as possible.

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, LexError, Token, TokenKind};
use super::span::Span;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("parse error at {span}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Lex(e) => e.span(),
            SyntaxError::Parse(e) => e.span,
        }
    }
}

type PResult<T> = Result<T, ParseError>;

/// Tokenizes and parses a complete specification.
pub fn parse_spec(source: &str) -> Result<Spec, SyntaxError> {
    let tokens = tokenize(source)?;
    let end = source.chars().count();
    Ok(Parser::new(&tokens, end).spec()?)
}

/// Parses a standalone expression (the whole input must be consumed).
pub fn parse_expr(source: &str) -> Result<Expr, SyntaxError> {
    let tokens = tokenize(source)?;
    let end = source.chars().count();
    let mut p = Parser::new(&tokens, end);
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses a standalone command (an optional trailing `;` is accepted).
pub fn parse_command(source: &str) -> Result<Command, SyntaxError> {
    let tokens = tokenize(source)?;
    let end = source.chars().count();
    let mut p = Parser::new(&tokens, end);
    let c = p.command()?;
    p.eat(TokenKind::Semi);
    p.expect_end()?;
    Ok(c)
}

/// Parses an already tokenized specification.
pub fn parse(tokens: &[Token]) -> Result<Spec, ParseError> {
    let end = tokens.last().map_or(0, |t| t.span.end);
    Parser::new(tokens, end).spec()
}

pub struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    end: usize,
}

impl<'t> Parser<'t> {
    pub fn new(tokens: &'t [Token], end: usize) -> Self {
        Parser {
            tokens,
            pos: 0,
            end,
        }
    }

    fn peek(&self) -> Option<TokenKind> {
        self.tokens.get(self.pos).map(|t| t.kind)
    }

    fn peek_at(&self, k: usize) -> Option<TokenKind> {
        self.tokens.get(self.pos + k).map(|t| t.kind)
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn here(&self) -> Span {
        match self.tokens.get(self.pos) {
            Some(t) => t.span,
            None => Span::new(self.end, self.end),
        }
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.pos - 1].span.end
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.here(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: match self.tokens.get(self.pos) {
                Some(t) => format!("'{}'", t.lexeme),
                None => "end of input".to_string(),
            },
        }
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.at(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            Err(self.error(&[kind.symbol()]))
        }
    }

    fn expect_end(&self) -> PResult<()> {
        if self.pos < self.tokens.len() {
            Err(self.error(&["end of input"]))
        } else {
            Ok(())
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        let t = self.expect(TokenKind::Ident)?;
        Ok(Ident {
            name: t.lexeme.clone(),
            span: t.span,
        })
    }

    pub fn spec(&mut self) -> PResult<Spec> {
        let mut decls = Vec::new();
        while self.pos < self.tokens.len() {
            decls.push(self.decl()?);
        }
        Ok(Spec { decls })
    }

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.here().start;
        let kind = match self.peek() {
            Some(TokenKind::Val) => {
                self.bump();
                let name = self.ident()?;
                let ty = if self.eat(TokenKind::Colon) {
                    Some(self.type_expr()?)
                } else {
                    None
                };
                let value = if self.eat(TokenKind::Eq) {
                    Some(self.expr()?)
                } else {
                    None
                };
                if ty.is_none() && value.is_none() {
                    return Err(self.error(&[":", "="]));
                }
                self.expect(TokenKind::Semi)?;
                DeclKind::Val { name, ty, value }
            }
            Some(TokenKind::Type) => {
                self.bump();
                let name = self.ident()?;
                self.expect(TokenKind::Eq)?;
                let ty = self.type_expr()?;
                self.expect(TokenKind::Semi)?;
                DeclKind::Type { name, ty }
            }
            Some(TokenKind::Pred) | Some(TokenKind::Theorem) => {
                let is_pred = self.bump().kind == TokenKind::Pred;
                let name = self.ident()?;
                let params = self.params()?;
                let requires = self.clauses(TokenKind::Requires)?;
                self.expect(TokenKind::Iff)?;
                let body = self.expr()?;
                self.expect(TokenKind::Semi)?;
                if is_pred {
                    DeclKind::Pred {
                        name,
                        params,
                        requires,
                        body,
                    }
                } else {
                    DeclKind::Theorem {
                        name,
                        params,
                        requires,
                        body,
                    }
                }
            }
            Some(TokenKind::Fun) => {
                self.bump();
                let name = self.ident()?;
                let params = self.params()?;
                self.expect(TokenKind::Colon)?;
                let result = self.type_expr()?;
                let requires = self.clauses(TokenKind::Requires)?;
                self.expect(TokenKind::Eq)?;
                let body = self.expr()?;
                self.expect(TokenKind::Semi)?;
                DeclKind::Fun {
                    name,
                    params,
                    result,
                    requires,
                    body,
                }
            }
            Some(TokenKind::Proc) => {
                self.bump();
                let name = self.ident()?;
                let params = self.params()?;
                self.expect(TokenKind::Colon)?;
                let result = self.type_expr()?;
                let mut requires = Vec::new();
                let mut ensures = Vec::new();
                loop {
                    if self.eat(TokenKind::Requires) {
                        requires.push(self.expr()?);
                    } else if self.eat(TokenKind::Ensures) {
                        ensures.push(self.expr()?);
                    } else {
                        break;
                    }
                    self.expect(TokenKind::Semi)?;
                }
                self.expect(TokenKind::LBrace)?;
                let mut body = Vec::new();
                while !self.at(TokenKind::Return) {
                    if self.peek().is_none() || self.at(TokenKind::RBrace) {
                        return Err(self.error(&["return"]));
                    }
                    body.push(self.command()?);
                    self.eat(TokenKind::Semi);
                }
                self.bump();
                let ret = self.expr()?;
                self.expect(TokenKind::Semi)?;
                self.expect(TokenKind::RBrace)?;
                self.eat(TokenKind::Semi);
                DeclKind::Proc {
                    name,
                    params,
                    result,
                    requires,
                    ensures,
                    body,
                    ret,
                }
            }
            _ => {
                return Err(self.error(&["val", "type", "pred", "fun", "theorem", "proc"]));
            }
        };
        Ok(Decl {
            kind,
            span: Span::new(start, self.prev_end()),
        })
    }

    fn clauses(&mut self, kw: TokenKind) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        while self.eat(kw) {
            out.push(self.expr()?);
            self.expect(TokenKind::Semi)?;
        }
        Ok(out)
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        if !self.eat(TokenKind::LParen) {
            return Ok(params);
        }
        if self.eat(TokenKind::RParen) {
            return Ok(params);
        }
        loop {
            let name = self.ident()?;
            self.expect(TokenKind::Colon)?;
            let ty = self.type_expr()?;
            params.push(Param { name, ty });
            if self.eat(TokenKind::Comma) {
                continue;
            }
            self.expect(TokenKind::RParen)?;
            return Ok(params);
        }
    }

    pub fn type_expr(&mut self) -> PResult<TypeExpr> {
        let start = self.here().start;
        let kind = match self.peek() {
            Some(TokenKind::Ident) => TypeExprKind::Named(self.bump().lexeme.clone()),
            Some(TokenKind::BoolKw) => {
                self.bump();
                TypeExprKind::Bool
            }
            Some(TokenKind::Nat) => {
                self.bump();
                if self.eat(TokenKind::LBracket) {
                    let hi = self.expr()?;
                    self.expect(TokenKind::RBracket)?;
                    TypeExprKind::NatUpTo(Box::new(hi))
                } else {
                    TypeExprKind::Nat
                }
            }
            Some(TokenKind::IntKw) => {
                self.bump();
                if self.eat(TokenKind::LBracket) {
                    let lo = self.expr()?;
                    self.expect(TokenKind::Comma)?;
                    let hi = self.expr()?;
                    self.expect(TokenKind::RBracket)?;
                    TypeExprKind::Range(Box::new(lo), Box::new(hi))
                } else {
                    TypeExprKind::Int
                }
            }
            Some(TokenKind::ArrayKw) => {
                self.bump();
                self.expect(TokenKind::LBracket)?;
                let len = self.expr()?;
                self.expect(TokenKind::Comma)?;
                let elem = self.type_expr()?;
                self.expect(TokenKind::RBracket)?;
                TypeExprKind::Array(Box::new(len), Box::new(elem))
            }
            Some(TokenKind::SetKw) => {
                self.bump();
                self.expect(TokenKind::LBracket)?;
                let elem = self.type_expr()?;
                self.expect(TokenKind::RBracket)?;
                TypeExprKind::Set(Box::new(elem))
            }
            Some(TokenKind::TupleKw) => {
                self.bump();
                self.expect(TokenKind::LBracket)?;
                let mut items = vec![self.type_expr()?];
                while self.eat(TokenKind::Comma) {
                    items.push(self.type_expr()?);
                }
                self.expect(TokenKind::RBracket)?;
                TypeExprKind::Tuple(items)
            }
            _ => return Err(self.error(&["type"])),
        };
        Ok(TypeExpr {
            kind,
            span: Span::new(start, self.prev_end()),
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.implies()?;
        while self.eat(TokenKind::Iff) {
            let rhs = self.implies()?;
            lhs = bin(BinOp::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if self.eat(TokenKind::Implies) {
            let rhs = self.implies()?;
            return Ok(bin(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        while self.eat(TokenKind::Or) {
            let rhs = self.and()?;
            lhs = bin(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.comparison()?;
        while self.eat(TokenKind::And) {
            let rhs = self.comparison()?;
            lhs = bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Some(TokenKind::Eq) => BinOp::Eq,
            Some(TokenKind::Neq) => BinOp::Neq,
            Some(TokenKind::Lt) => BinOp::Lt,
            Some(TokenKind::Le) => BinOp::Le,
            Some(TokenKind::Gt) => BinOp::Gt,
            Some(TokenKind::Ge) => BinOp::Ge,
            Some(TokenKind::Member) => BinOp::Member,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.additive()?;
        Ok(bin(op, lhs, rhs))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = bin(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Times) => BinOp::Mul,
                Some(TokenKind::Div) => BinOp::Div,
                Some(TokenKind::Mod) => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.here().start;
        let op = match self.peek() {
            Some(TokenKind::Not) => UnOp::Not,
            Some(TokenKind::Minus) => UnOp::Neg,
            _ => return self.postfix(),
        };
        self.bump();
        let operand = self.unary()?;
        let span = Span::new(start, operand.span.end);
        Ok(Expr {
            kind: ExprKind::Unary(op, Box::new(operand)),
            span,
        })
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Some(TokenKind::LBracket) => {
                    self.bump();
                    let index = self.expr()?;
                    self.expect(TokenKind::RBracket)?;
                    let span = Span::new(e.span.start, self.prev_end());
                    e = Expr {
                        kind: ExprKind::Index {
                            base: Box::new(e),
                            index: Box::new(index),
                        },
                        span,
                    };
                }
                Some(TokenKind::Dot) if self.peek_at(1) == Some(TokenKind::Int) => {
                    self.bump();
                    let tok = self.bump();
                    let index: usize = tok.lexeme.parse().map_err(|_| ParseError {
                        span: tok.span,
                        expected: vec!["tuple component index".into()],
                        found: tok.lexeme.clone(),
                    })?;
                    if index == 0 {
                        return Err(ParseError {
                            span: tok.span,
                            expected: vec!["component index ≥ 1".into()],
                            found: "0".into(),
                        });
                    }
                    let span = Span::new(e.span.start, self.prev_end());
                    e = Expr {
                        kind: ExprKind::Proj {
                            base: Box::new(e),
                            index,
                        },
                        span,
                    };
                }
                Some(TokenKind::With) => {
                    self.bump();
                    self.expect(TokenKind::LBracket)?;
                    let index = self.expr()?;
                    self.expect(TokenKind::RBracket)?;
                    self.expect(TokenKind::Eq)?;
                    let value = self.unary()?;
                    let span = Span::new(e.span.start, value.span.end);
                    e = Expr {
                        kind: ExprKind::With {
                            base: Box::new(e),
                            index: Box::new(index),
                            value: Box::new(value),
                        },
                        span,
                    };
                }
                _ => return Ok(e),
            }
        }
    }

    fn expr_list(&mut self, close: TokenKind) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        if self.eat(close) {
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.eat(TokenKind::Comma) {
                continue;
            }
            self.expect(close)?;
            return Ok(items);
        }
    }

    fn binder(&mut self) -> PResult<Binder> {
        let name = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let ty = self.type_expr()?;
        Ok(Binder { name, ty })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.here().start;
        let Some(kind) = self.peek() else {
            return Err(self.error(&["expression"]));
        };
        let kind = match kind {
            TokenKind::Int => {
                let tok = self.bump();
                ExprKind::Int(tok.lexeme.parse().expect("lexer validated integer"))
            }
            TokenKind::True => {
                self.bump();
                ExprKind::Bool(true)
            }
            TokenKind::False => {
                self.bump();
                ExprKind::Bool(false)
            }
            TokenKind::Ident => {
                let name = self.ident()?;
                if self.eat(TokenKind::LParen) {
                    let args = self.expr_list(TokenKind::RParen)?;
                    ExprKind::Call { name, args }
                } else {
                    ExprKind::Var(name.name)
                }
            }
            TokenKind::LParen => {
                self.bump();
                let mut inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                inner.span = Span::new(start, self.prev_end());
                return Ok(inner);
            }
            TokenKind::LBrace => {
                self.bump();
                let items = self.expr_list(TokenKind::RBrace)?;
                if items.is_empty() {
                    return Err(ParseError {
                        span: Span::new(start, self.prev_end()),
                        expected: vec!["set element (write ∅[T] for the empty set)".into()],
                        found: "'}'".into(),
                    });
                }
                ExprKind::SetLit(items)
            }
            TokenKind::LAngle => {
                self.bump();
                let items = self.expr_list(TokenKind::RAngle)?;
                if items.is_empty() {
                    return Err(self.error(&["tuple component"]));
                }
                ExprKind::TupleLit(items)
            }
            TokenKind::EmptySet => {
                self.bump();
                self.expect(TokenKind::LBracket)?;
                let ty = self.type_expr()?;
                self.expect(TokenKind::RBracket)?;
                ExprKind::EmptySet(ty)
            }
            TokenKind::ArrayKw => {
                let ty = self.type_expr()?;
                self.expect(TokenKind::LParen)?;
                let value = self.expr()?;
                self.expect(TokenKind::RParen)?;
                ExprKind::ArrayInit {
                    ty,
                    value: Box::new(value),
                }
            }
            TokenKind::Forall | TokenKind::Exists => {
                let quantifier = if self.bump().kind == TokenKind::Forall {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                let mut binders = vec![self.binder()?];
                while self.eat(TokenKind::Comma) {
                    binders.push(self.binder()?);
                }
                self.expect(TokenKind::Dot)?;
                let body = self.expr()?;
                ExprKind::Quant {
                    quantifier,
                    binders,
                    body: Box::new(body),
                }
            }
            TokenKind::Choose => {
                self.bump();
                let binder = self.binder()?;
                if !self.eat(TokenKind::With) && !self.eat(TokenKind::Dot) {
                    return Err(self.error(&["with", "."]));
                }
                let cond = self.expr()?;
                ExprKind::Choose {
                    binder,
                    cond: Box::new(cond),
                }
            }
            TokenKind::Let | TokenKind::LetPar => {
                let parallel = self.bump().kind == TokenKind::LetPar;
                let mut bindings = Vec::new();
                loop {
                    let name = self.ident()?;
                    self.expect(TokenKind::Eq)?;
                    let value = self.expr()?;
                    bindings.push(Binding { name, value });
                    if !self.eat(TokenKind::Comma) {
                        break;
                    }
                }
                self.expect(TokenKind::In)?;
                let body = self.expr()?;
                ExprKind::Let {
                    parallel,
                    bindings,
                    body: Box::new(body),
                }
            }
            TokenKind::If => {
                self.bump();
                let cond = self.expr()?;
                self.expect(TokenKind::Then)?;
                let then = self.expr()?;
                self.expect(TokenKind::Else)?;
                let els = self.expr()?;
                ExprKind::If {
                    cond: Box::new(cond),
                    then: Box::new(then),
                    els: Box::new(els),
                }
            }
            _ => return Err(self.error(&["expression"])),
        };
        Ok(Expr {
            kind,
            span: Span::new(start, self.prev_end()),
        })
    }

    fn annotations(&mut self) -> PResult<LoopAnnotations> {
        let mut ann = LoopAnnotations::default();
        loop {
            if self.eat(TokenKind::Invariant) {
                ann.invariants.push(self.expr()?);
            } else if self.at(TokenKind::Decreases) {
                if ann.decreases.is_some() {
                    return Err(ParseError {
                        span: self.here(),
                        expected: vec!["at most one decreases clause".into()],
                        found: "'decreases'".into(),
                    });
                }
                self.bump();
                ann.decreases = Some(self.expr()?);
            } else {
                return Ok(ann);
            }
            self.expect(TokenKind::Semi)?;
        }
    }

    pub fn command(&mut self) -> PResult<Command> {
        let start = self.here().start;
        let Some(kind) = self.peek() else {
            return Err(self.error(&["command"]));
        };
        let kind = match kind {
            TokenKind::Var => {
                self.bump();
                let name = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let ty = self.type_expr()?;
                if !self.eat(TokenKind::Assign) && !self.eat(TokenKind::Eq) {
                    return Err(self.error(&["≔"]));
                }
                let init = self.expr()?;
                CommandKind::Var { name, ty, init }
            }
            TokenKind::Ident => {
                let name = self.ident()?;
                if self.eat(TokenKind::LParen) {
                    let args = self.expr_list(TokenKind::RParen)?;
                    CommandKind::Call { name, args }
                } else {
                    let mut indices = Vec::new();
                    while self.eat(TokenKind::LBracket) {
                        indices.push(self.expr()?);
                        self.expect(TokenKind::RBracket)?;
                    }
                    self.expect(TokenKind::Assign)?;
                    let value = self.expr()?;
                    CommandKind::Assign {
                        target: LValue { name, indices },
                        value,
                    }
                }
            }
            TokenKind::If => {
                self.bump();
                let cond = self.expr()?;
                self.expect(TokenKind::Then)?;
                let then = Box::new(self.command()?);
                let els = if self.eat(TokenKind::Else) {
                    Some(Box::new(self.command()?))
                } else {
                    None
                };
                CommandKind::If { cond, then, els }
            }
            TokenKind::While => {
                self.bump();
                let cond = self.expr()?;
                self.expect(TokenKind::Do)?;
                let ann = self.annotations()?;
                let body = Box::new(self.command()?);
                CommandKind::While { cond, ann, body }
            }
            TokenKind::For => {
                self.bump();
                let init = self.command()?;
                if !matches!(
                    init.kind,
                    CommandKind::Var { .. } | CommandKind::Assign { .. }
                ) {
                    return Err(ParseError {
                        span: init.span,
                        expected: vec!["variable declaration or assignment".into()],
                        found: "command".into(),
                    });
                }
                self.expect(TokenKind::Semi)?;
                let cond = self.expr()?;
                self.expect(TokenKind::Semi)?;
                let update = self.command()?;
                self.expect(TokenKind::Do)?;
                let ann = self.annotations()?;
                let body = Box::new(self.command()?);
                CommandKind::For {
                    init: Box::new(init),
                    cond,
                    update: Box::new(update),
                    ann,
                    body,
                }
            }
            TokenKind::LBrace => {
                self.bump();
                let mut items = Vec::new();
                while !self.eat(TokenKind::RBrace) {
                    if self.peek().is_none() {
                        return Err(self.error(&["}"]));
                    }
                    items.push(self.command()?);
                    self.eat(TokenKind::Semi);
                }
                if items.len() == 1 {
                    return Ok(items.pop().unwrap());
                }
                CommandKind::Seq(items)
            }
            TokenKind::Assert => {
                self.bump();
                CommandKind::Assert(self.expr()?)
            }
            _ => return Err(self.error(&["command"])),
        };
        Ok(Command {
            kind,
            span: Span::new(start, self.prev_end()),
        })
    }
}

fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
    let span = l.span.join(r.span);
    Expr {
        kind: ExprKind::Binary(op, Box::new(l), Box::new(r)),
        span,
    }
}
