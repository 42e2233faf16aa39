//! Recursive-descent parser producing an [`Ast`] whose spans index the
//! original text.

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::source::SourceModule;
use crate::{Error, Result};

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Parses a whole module. The returned tree's root is a `Module` node that
/// spans the entire text.
pub fn parse_module(source: &SourceModule) -> Result<Ast> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        source,
        src: source.text(),
        tokens,
        pos: 0,
        prev_end: 0,
        nodes: Vec::new(),
    };
    let root = parser.file()?;
    Ok(Ast::from_parts(parser.nodes, root))
}

struct Parser<'a> {
    source: &'a SourceModule,
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    prev_end: usize,
    nodes: Vec<Node>,
}

impl<'a> Parser<'a> {
    // ---- token helpers ---------------------------------------------------

    fn peek(&self) -> Token {
        self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> Token {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        self.tokens[i]
    }

    fn tok_text(&self, tok: Token) -> &'a str {
        &self.src[tok.start..tok.end]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos];
        if tok.kind != TokenKind::EndMarker {
            self.pos += 1;
        }
        if !matches!(tok.kind, TokenKind::Indent | TokenKind::Dedent | TokenKind::Newline) {
            self.prev_end = tok.end;
        }
        tok
    }

    fn at_op(&self, op: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Op && self.tok_text(t) == op
    }

    fn at_kw(&self, kw: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Name && self.tok_text(t) == kw
    }

    fn at_kw_at(&self, ahead: usize, kw: &str) -> bool {
        let t = self.peek_at(ahead);
        t.kind == TokenKind::Name && self.tok_text(t) == kw
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<Token> {
        if self.at_op(op) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected '{op}'")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Token> {
        if self.at_kw(kw) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected '{kw}'")))
        }
    }

    fn expect_name(&mut self) -> Result<String> {
        let t = self.peek();
        if t.kind == TokenKind::Name && !is_keyword(self.tok_text(t)) {
            self.bump();
            Ok(self.tok_text(t).to_string())
        } else {
            Err(self.error_here("expected a name"))
        }
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> Error {
        let (line, col) = self.source.line_col(offset);
        Error::Syntax {
            path: self.source.path().to_path_buf(),
            line,
            col,
            message: message.into(),
        }
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let t = self.peek();
        let message = message.into();
        let found = match t.kind {
            TokenKind::Newline => "end of line".to_string(),
            TokenKind::Indent => "indent".to_string(),
            TokenKind::Dedent => "dedent".to_string(),
            TokenKind::EndMarker => "end of file".to_string(),
            _ => format!("'{}'", self.tok_text(t)),
        };
        self.error_at(t.start, format!("{message}, found {found}"))
    }

    fn can_start_expr(&self) -> bool {
        let t = self.peek();
        match t.kind {
            TokenKind::Number | TokenKind::String => true,
            TokenKind::Name => {
                let w = self.tok_text(t);
                !is_keyword(w) || matches!(w, "True" | "False" | "None" | "not" | "lambda" | "await")
            }
            TokenKind::Op => matches!(
                self.tok_text(t),
                "(" | "[" | "{" | "-" | "+" | "~" | "*" | "..."
            ),
            _ => false,
        }
    }

    // ---- node construction ----------------------------------------------

    fn add(&mut self, kind: NodeKind, start: usize, end: usize, children: Vec<NodeId>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let (line, col) = self.source.line_col(start);
        for &c in &children {
            self.nodes[c.index()].parent = Some(id);
        }
        self.nodes.push(Node {
            id,
            kind,
            span: Span { start, end, line, col },
            children,
            parent: None,
        });
        id
    }

    fn span_of(&self, id: NodeId) -> Span {
        self.nodes[id.index()].span
    }

    fn set_ctx(&mut self, id: NodeId, new_ctx: ExprContext) -> Result<()> {
        let span = self.span_of(id);
        let recurse = match &mut self.nodes[id.index()].kind {
            NodeKind::Name { ctx, .. }
            | NodeKind::Attribute { ctx, .. }
            | NodeKind::Subscript { ctx } => {
                *ctx = new_ctx;
                false
            }
            NodeKind::Starred { ctx } | NodeKind::Tuple { ctx, .. } | NodeKind::List { ctx } => {
                *ctx = new_ctx;
                true
            }
            other => {
                let what = other.label();
                return Err(self.error_at(span.start, format!("cannot assign to {what}")));
            }
        };
        if recurse {
            for c in self.nodes[id.index()].children.clone() {
                self.set_ctx(c, new_ctx)?;
            }
        }
        Ok(())
    }

    // ---- statements ------------------------------------------------------

    fn file(&mut self) -> Result<NodeId> {
        let mut stmts = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::EndMarker => break,
                TokenKind::Newline => {
                    self.bump();
                }
                TokenKind::Indent => return Err(self.error_here("unexpected indent")),
                _ => stmts.extend(self.statement()?),
            }
        }
        Ok(self.add(NodeKind::Module, 0, self.src.len(), stmts))
    }

    fn statement(&mut self) -> Result<Vec<NodeId>> {
        let t = self.peek();
        if t.kind == TokenKind::Op && self.tok_text(t) == "@" {
            return Ok(vec![self.decorated()?]);
        }
        if t.kind == TokenKind::Name {
            let stmt = match self.tok_text(t) {
                "if" => Some(self.if_stmt(false)?),
                "while" => Some(self.while_stmt()?),
                "for" => Some(self.for_stmt(t.start, false)?),
                "try" => Some(self.try_stmt()?),
                "with" => Some(self.with_stmt(t.start, false)?),
                "def" => Some(self.funcdef(t.start, Vec::new(), false)?),
                "class" => Some(self.classdef(t.start, Vec::new())?),
                "async" => Some(self.async_stmt(t.start, Vec::new())?),
                _ => None,
            };
            if let Some(s) = stmt {
                return Ok(vec![s]);
            }
        }
        self.simple_stmts()
    }

    fn simple_stmts(&mut self) -> Result<Vec<NodeId>> {
        let mut out = vec![self.simple_stmt()?];
        while self.eat_op(";") {
            if self.peek().kind == TokenKind::Newline {
                break;
            }
            out.push(self.simple_stmt()?);
        }
        if self.peek().kind != TokenKind::Newline {
            return Err(self.error_here("invalid syntax"));
        }
        self.bump();
        Ok(out)
    }

    fn block(&mut self) -> Result<NodeId> {
        let stmts = if self.peek().kind == TokenKind::Newline {
            self.bump();
            if self.peek().kind != TokenKind::Indent {
                return Err(self.error_here("expected an indented block"));
            }
            self.bump();
            let mut stmts = Vec::new();
            while self.peek().kind != TokenKind::Dedent {
                if self.peek().kind == TokenKind::EndMarker {
                    break;
                }
                if self.peek().kind == TokenKind::Indent {
                    return Err(self.error_here("unexpected indent"));
                }
                stmts.extend(self.statement()?);
            }
            self.bump();
            stmts
        } else {
            self.simple_stmts()?
        };
        let start = self.span_of(stmts[0]).start;
        let end = self.span_of(*stmts.last().unwrap()).end;
        Ok(self.add(NodeKind::Block, start, end, stmts))
    }

    fn decorated(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        let mut decorators = Vec::new();
        while self.at_op("@") {
            let at = self.bump().start;
            let expr = self.named_expr()?;
            let end = self.prev_end;
            if self.peek().kind != TokenKind::Newline {
                return Err(self.error_here("expected newline after decorator"));
            }
            self.bump();
            decorators.push(self.add(NodeKind::Decorator, at, end, vec![expr]));
        }
        if self.at_kw("def") {
            self.funcdef(start, decorators, false)
        } else if self.at_kw("class") {
            self.classdef(start, decorators)
        } else if self.at_kw("async") {
            self.async_stmt(start, decorators)
        } else {
            Err(self.error_here("expected 'def' or 'class' after decorator"))
        }
    }

    fn async_stmt(&mut self, start: usize, decorators: Vec<NodeId>) -> Result<NodeId> {
        self.expect_kw("async")?;
        if self.at_kw("def") {
            self.funcdef(start, decorators, true)
        } else if decorators.is_empty() && self.at_kw("for") {
            self.for_stmt(start, true)
        } else if decorators.is_empty() && self.at_kw("with") {
            self.with_stmt(start, true)
        } else {
            Err(self.error_here("invalid syntax after 'async'"))
        }
    }

    fn funcdef(&mut self, start: usize, mut children: Vec<NodeId>, is_async: bool) -> Result<NodeId> {
        self.expect_kw("def")?;
        let name = self.expect_name()?;
        let open = self.expect_op("(")?;
        let params = self.parameters(")", true, open.start)?;
        self.expect_op(")")?;
        children.push(params);
        if self.eat_op("->") {
            children.push(self.test()?);
        }
        self.expect_op(":")?;
        let body = self.block()?;
        children.push(body);
        let end = self.span_of(body).end;
        Ok(self.add(NodeKind::FunctionDef { name, is_async }, start, end, children))
    }

    fn parameters(&mut self, close: &str, annotations: bool, start: usize) -> Result<NodeId> {
        let mut params = Vec::new();
        let mut after_star = false;
        loop {
            if self.at_op(close) {
                break;
            }
            let pstart = self.peek().start;
            let (name, kind) = if self.eat_op("/") {
                ("/".to_string(), ParamKind::Marker)
            } else if self.eat_op("**") {
                (self.expect_name()?, ParamKind::VarKeywords)
            } else if self.eat_op("*") {
                after_star = true;
                if self.peek().kind == TokenKind::Name && !is_keyword(self.tok_text(self.peek())) {
                    (self.expect_name()?, ParamKind::VarArgs)
                } else {
                    ("*".to_string(), ParamKind::Marker)
                }
            } else {
                let kind = if after_star { ParamKind::KwOnly } else { ParamKind::Positional };
                (self.expect_name()?, kind)
            };
            let mut children = Vec::new();
            let mut has_annotation = false;
            let mut has_default = false;
            if kind != ParamKind::Marker {
                if annotations && self.eat_op(":") {
                    children.push(self.test()?);
                    has_annotation = true;
                }
                if matches!(kind, ParamKind::Positional | ParamKind::KwOnly) && self.eat_op("=") {
                    children.push(self.test()?);
                    has_default = true;
                }
            }
            let end = self.prev_end;
            params.push(self.add(
                NodeKind::Param { name, kind, has_annotation, has_default },
                pstart,
                end,
                children,
            ));
            if !self.eat_op(",") {
                break;
            }
        }
        let end = if params.is_empty() { start } else { self.prev_end };
        let start = params.first().map(|&p| self.span_of(p).start).unwrap_or(start);
        Ok(self.add(NodeKind::Parameters, start, end.max(start), params))
    }

    fn classdef(&mut self, start: usize, mut children: Vec<NodeId>) -> Result<NodeId> {
        self.expect_kw("class")?;
        let name = self.expect_name()?;
        if self.eat_op("(") {
            children.extend(self.arguments()?);
            self.expect_op(")")?;
        }
        self.expect_op(":")?;
        let body = self.block()?;
        children.push(body);
        let end = self.span_of(body).end;
        Ok(self.add(NodeKind::ClassDef { name }, start, end, children))
    }

    fn if_stmt(&mut self, is_elif: bool) -> Result<NodeId> {
        let start = self.bump().start;
        let cond = self.named_expr()?;
        self.expect_op(":")?;
        let body = self.block()?;
        let mut children = vec![cond, body];
        if self.at_kw("elif") {
            children.push(self.if_stmt(true)?);
        } else if self.eat_kw("else") {
            self.expect_op(":")?;
            children.push(self.block()?);
        }
        let end = self.span_of(*children.last().unwrap()).end;
        Ok(self.add(NodeKind::If { is_elif }, start, end, children))
    }

    fn while_stmt(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        let cond = self.named_expr()?;
        self.expect_op(":")?;
        let mut children = vec![cond, self.block()?];
        if self.eat_kw("else") {
            self.expect_op(":")?;
            children.push(self.block()?);
        }
        let end = self.span_of(*children.last().unwrap()).end;
        Ok(self.add(NodeKind::While, start, end, children))
    }

    fn for_stmt(&mut self, start: usize, is_async: bool) -> Result<NodeId> {
        self.expect_kw("for")?;
        let target = self.target_list()?;
        self.set_ctx(target, ExprContext::Store)?;
        self.expect_kw("in")?;
        let iter = self.star_expressions()?;
        self.expect_op(":")?;
        let mut children = vec![target, iter, self.block()?];
        if self.eat_kw("else") {
            self.expect_op(":")?;
            children.push(self.block()?);
        }
        let end = self.span_of(*children.last().unwrap()).end;
        Ok(self.add(NodeKind::For { is_async }, start, end, children))
    }

    fn try_stmt(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        self.expect_op(":")?;
        let mut children = vec![self.block()?];
        let mut handlers = 0;
        while self.at_kw("except") {
            let hstart = self.bump().start;
            self.eat_op("*");
            let mut hchildren = Vec::new();
            let mut name = None;
            if !self.at_op(":") {
                hchildren.push(self.test()?);
                if self.eat_kw("as") {
                    name = Some(self.expect_name()?);
                }
            }
            self.expect_op(":")?;
            let body = self.block()?;
            hchildren.push(body);
            let end = self.span_of(body).end;
            children.push(self.add(NodeKind::ExceptHandler { name }, hstart, end, hchildren));
            handlers += 1;
        }
        let mut has_else = false;
        if handlers > 0 && self.eat_kw("else") {
            self.expect_op(":")?;
            children.push(self.block()?);
            has_else = true;
        }
        let mut has_finally = false;
        if self.eat_kw("finally") {
            self.expect_op(":")?;
            children.push(self.block()?);
            has_finally = true;
        }
        if handlers == 0 && !has_finally {
            return Err(self.error_here("expected 'except' or 'finally' block"));
        }
        let end = self.span_of(*children.last().unwrap()).end;
        Ok(self.add(NodeKind::Try { has_else, has_finally }, start, end, children))
    }

    fn with_stmt(&mut self, start: usize, is_async: bool) -> Result<NodeId> {
        self.expect_kw("with")?;
        let mut children = Vec::new();
        loop {
            let istart = self.peek().start;
            let ctx = self.test()?;
            let mut ichildren = vec![ctx];
            let has_target = self.eat_kw("as");
            if has_target {
                let target = self.target_list()?;
                self.set_ctx(target, ExprContext::Store)?;
                ichildren.push(target);
            }
            let end = self.prev_end;
            children.push(self.add(NodeKind::WithItem { has_target }, istart, end, ichildren));
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(":")?;
        let body = self.block()?;
        children.push(body);
        let end = self.span_of(body).end;
        Ok(self.add(NodeKind::With { is_async }, start, end, children))
    }

    fn simple_stmt(&mut self) -> Result<NodeId> {
        let t = self.peek();
        let start = t.start;
        if t.kind == TokenKind::Name {
            match self.tok_text(t) {
                "pass" | "break" | "continue" => {
                    let kind = match self.tok_text(t) {
                        "pass" => NodeKind::Pass,
                        "break" => NodeKind::Break,
                        _ => NodeKind::Continue,
                    };
                    self.bump();
                    return Ok(self.add(kind, start, t.end, vec![]));
                }
                "return" => {
                    self.bump();
                    let children = if self.can_start_expr() {
                        vec![self.star_expressions()?]
                    } else {
                        vec![]
                    };
                    return Ok(self.add(NodeKind::Return, start, self.prev_end, children));
                }
                "raise" => {
                    self.bump();
                    let mut children = Vec::new();
                    if self.can_start_expr() {
                        children.push(self.test()?);
                        if self.eat_kw("from") {
                            children.push(self.test()?);
                        }
                    }
                    return Ok(self.add(NodeKind::Raise, start, self.prev_end, children));
                }
                "global" | "nonlocal" => {
                    let is_global = self.tok_text(t) == "global";
                    self.bump();
                    let mut names = vec![self.expect_name()?];
                    while self.eat_op(",") {
                        names.push(self.expect_name()?);
                    }
                    let kind = if is_global {
                        NodeKind::Global { names }
                    } else {
                        NodeKind::Nonlocal { names }
                    };
                    return Ok(self.add(kind, start, self.prev_end, vec![]));
                }
                "del" => {
                    self.bump();
                    let target = self.target_list()?;
                    self.set_ctx(target, ExprContext::Del)?;
                    return Ok(self.add(NodeKind::Del, start, self.prev_end, vec![target]));
                }
                "assert" => {
                    self.bump();
                    let mut children = vec![self.test()?];
                    if self.eat_op(",") {
                        children.push(self.test()?);
                    }
                    return Ok(self.add(NodeKind::Assert, start, self.prev_end, children));
                }
                "import" => return self.import_stmt(),
                "from" => return self.import_from(),
                _ => {}
            }
        }
        self.expr_stmt()
    }

    fn dotted_name(&mut self) -> Result<String> {
        let mut name = self.expect_name()?;
        while self.eat_op(".") {
            name.push('.');
            name.push_str(&self.expect_name()?);
        }
        Ok(name)
    }

    fn import_stmt(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        let mut aliases = Vec::new();
        loop {
            let astart = self.peek().start;
            let name = self.dotted_name()?;
            let asname = if self.eat_kw("as") { Some(self.expect_name()?) } else { None };
            aliases.push(self.add(NodeKind::Alias { name, asname }, astart, self.prev_end, vec![]));
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(self.add(NodeKind::Import, start, self.prev_end, aliases))
    }

    fn import_from(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        let mut level = 0;
        loop {
            if self.eat_op(".") {
                level += 1;
            } else if self.eat_op("...") {
                level += 3;
            } else {
                break;
            }
        }
        let module = if self.at_kw("import") { String::new() } else { self.dotted_name()? };
        self.expect_kw("import")?;
        let mut aliases = Vec::new();
        if self.at_op("*") {
            let t = self.bump();
            aliases.push(self.add(NodeKind::Alias { name: "*".into(), asname: None }, t.start, t.end, vec![]));
        } else {
            let paren = self.eat_op("(");
            loop {
                if paren && self.at_op(")") {
                    break;
                }
                let astart = self.peek().start;
                let name = self.expect_name()?;
                let asname = if self.eat_kw("as") { Some(self.expect_name()?) } else { None };
                aliases.push(self.add(NodeKind::Alias { name, asname }, astart, self.prev_end, vec![]));
                if !self.eat_op(",") {
                    break;
                }
            }
            if paren {
                self.expect_op(")")?;
            }
        }
        Ok(self.add(NodeKind::ImportFrom { module, level }, start, self.prev_end, aliases))
    }

    fn expr_stmt(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        let first = self.star_expressions_or_yield()?;
        if self.at_op("=") {
            let mut parts = vec![first];
            while self.eat_op("=") {
                parts.push(self.star_expressions_or_yield()?);
            }
            let value_count = parts.len() - 1;
            for &target in &parts[..value_count] {
                self.set_ctx(target, ExprContext::Store)?;
            }
            return Ok(self.add(NodeKind::Assign, start, self.prev_end, parts));
        }
        let t = self.peek();
        if t.kind == TokenKind::Op {
            let text = self.tok_text(t);
            if text.len() >= 2 && text.ends_with('=') && !matches!(text, "==" | "<=" | ">=" | "!=") {
                if let Some(op) = BinOpKind::from_symbol(&text[..text.len() - 1]) {
                    self.bump();
                    self.set_ctx(first, ExprContext::Store)?;
                    let value = self.star_expressions_or_yield()?;
                    return Ok(self.add(NodeKind::AugAssign { op }, start, self.prev_end, vec![first, value]));
                }
            }
            if text == ":" {
                self.bump();
                self.set_ctx(first, ExprContext::Store)?;
                let mut children = vec![first, self.test()?];
                if self.eat_op("=") {
                    children.push(self.star_expressions_or_yield()?);
                }
                return Ok(self.add(NodeKind::AnnAssign, start, self.prev_end, children));
            }
        }
        Ok(self.add(NodeKind::ExprStmt, start, self.prev_end, vec![first]))
    }

    // ---- expressions -----------------------------------------------------

    fn star_expressions_or_yield(&mut self) -> Result<NodeId> {
        if self.at_kw("yield") {
            self.yield_expr()
        } else {
            self.star_expressions()
        }
    }

    fn yield_expr(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        if self.eat_kw("from") {
            let v = self.test()?;
            return Ok(self.add(NodeKind::YieldFrom, start, self.prev_end, vec![v]));
        }
        let children = if self.can_start_expr() { vec![self.star_expressions()?] } else { vec![] };
        Ok(self.add(NodeKind::Yield, start, self.prev_end, children))
    }

    /// Comma-separated expressions; more than one (or a trailing comma)
    /// becomes an unparenthesized tuple.
    fn star_expressions(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        let first = self.star_named_expr()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if !self.can_start_expr() {
                break;
            }
            items.push(self.star_named_expr()?);
        }
        Ok(self.add(
            NodeKind::Tuple { ctx: ExprContext::Load, parenthesized: false },
            start,
            self.prev_end,
            items,
        ))
    }

    fn star_named_expr(&mut self) -> Result<NodeId> {
        if self.at_op("*") {
            let start = self.bump().start;
            let v = self.bitor()?;
            return Ok(self.add(NodeKind::Starred { ctx: ExprContext::Load }, start, self.prev_end, vec![v]));
        }
        self.named_expr()
    }

    /// Assignment targets of `for`, `with ... as`, comprehensions and `del`.
    fn target_list(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        let first = self.target_item()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if !self.can_start_expr() {
                break;
            }
            items.push(self.target_item()?);
        }
        Ok(self.add(
            NodeKind::Tuple { ctx: ExprContext::Load, parenthesized: false },
            start,
            self.prev_end,
            items,
        ))
    }

    fn target_item(&mut self) -> Result<NodeId> {
        if self.at_op("*") {
            let start = self.bump().start;
            let v = self.bitor()?;
            return Ok(self.add(NodeKind::Starred { ctx: ExprContext::Load }, start, self.prev_end, vec![v]));
        }
        self.bitor()
    }

    fn named_expr(&mut self) -> Result<NodeId> {
        let t = self.peek();
        if t.kind == TokenKind::Name
            && !is_keyword(self.tok_text(t))
            && self.peek_at(1).kind == TokenKind::Op
            && self.tok_text(self.peek_at(1)) == ":="
        {
            self.bump();
            let target = self.add(
                NodeKind::Name { id: self.tok_text(t).to_string(), ctx: ExprContext::Store },
                t.start,
                t.end,
                vec![],
            );
            self.bump();
            let value = self.test()?;
            return Ok(self.add(NodeKind::NamedExpr, t.start, self.prev_end, vec![target, value]));
        }
        self.test()
    }

    fn test(&mut self) -> Result<NodeId> {
        if self.at_kw("lambda") {
            return self.lambda();
        }
        let start = self.peek().start;
        let body = self.or_test()?;
        if self.at_kw("if") {
            self.bump();
            let cond = self.or_test()?;
            self.expect_kw("else")?;
            let orelse = self.test()?;
            return Ok(self.add(NodeKind::IfExp, start, self.prev_end, vec![body, cond, orelse]));
        }
        Ok(body)
    }

    fn lambda(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        let at = self.peek().start;
        let params = self.parameters(":", false, at)?;
        self.expect_op(":")?;
        let body = self.test()?;
        Ok(self.add(NodeKind::Lambda, start, self.prev_end, vec![params, body]))
    }

    fn or_test(&mut self) -> Result<NodeId> {
        self.bool_chain("or", BoolOpKind::Or)
    }

    fn bool_chain(&mut self, kw: &str, op: BoolOpKind) -> Result<NodeId> {
        let start = self.peek().start;
        let first = if op == BoolOpKind::Or { self.bool_chain("and", BoolOpKind::And)? } else { self.not_test()? };
        if !self.at_kw(kw) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw(kw) {
            values.push(if op == BoolOpKind::Or {
                self.bool_chain("and", BoolOpKind::And)?
            } else {
                self.not_test()?
            });
        }
        Ok(self.add(NodeKind::BoolOp { op }, start, self.prev_end, values))
    }

    fn not_test(&mut self) -> Result<NodeId> {
        if self.at_kw("not") {
            let start = self.bump().start;
            let v = self.not_test()?;
            return Ok(self.add(NodeKind::UnaryOp { op: UnaryOpKind::Not }, start, self.prev_end, vec![v]));
        }
        self.comparison()
    }

    fn comparison_op(&mut self) -> Option<CmpOp> {
        let t = self.peek();
        let text = self.tok_text(t);
        let op = match (t.kind, text) {
            (TokenKind::Op, "<") => CmpOp::Lt,
            (TokenKind::Op, ">") => CmpOp::Gt,
            (TokenKind::Op, "==") => CmpOp::Eq,
            (TokenKind::Op, "!=") => CmpOp::NotEq,
            (TokenKind::Op, "<=") => CmpOp::LtE,
            (TokenKind::Op, ">=") => CmpOp::GtE,
            (TokenKind::Name, "in") => CmpOp::In,
            (TokenKind::Name, "not") if self.at_kw_at(1, "in") => {
                self.bump();
                CmpOp::NotIn
            }
            (TokenKind::Name, "is") => {
                if self.at_kw_at(1, "not") {
                    self.bump();
                    CmpOp::IsNot
                } else {
                    CmpOp::Is
                }
            }
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn comparison(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        let left = self.bitor()?;
        let mut ops = Vec::new();
        let mut operands = vec![left];
        while let Some(op) = self.comparison_op() {
            ops.push(op);
            operands.push(self.bitor()?);
        }
        if ops.is_empty() {
            return Ok(left);
        }
        Ok(self.add(NodeKind::Compare { ops }, start, self.prev_end, operands))
    }

    fn binary_level(&mut self, level: usize) -> Result<NodeId> {
        const LEVELS: &[&[&str]] = &[
            &["|"],
            &["^"],
            &["&"],
            &["<<", ">>"],
            &["+", "-"],
            &["*", "/", "//", "%", "@"],
        ];
        if level == LEVELS.len() {
            return self.factor();
        }
        let start = self.peek().start;
        let mut left = self.binary_level(level + 1)?;
        loop {
            let t = self.peek();
            if t.kind != TokenKind::Op || !LEVELS[level].contains(&self.tok_text(t)) {
                break;
            }
            let op = BinOpKind::from_symbol(self.tok_text(t)).unwrap();
            self.bump();
            let right = self.binary_level(level + 1)?;
            left = self.add(NodeKind::BinOp { op }, start, self.prev_end, vec![left, right]);
        }
        Ok(left)
    }

    fn bitor(&mut self) -> Result<NodeId> {
        self.binary_level(0)
    }

    fn factor(&mut self) -> Result<NodeId> {
        let t = self.peek();
        if t.kind == TokenKind::Op {
            let op = match self.tok_text(t) {
                "-" => Some(UnaryOpKind::Neg),
                "+" => Some(UnaryOpKind::Pos),
                "~" => Some(UnaryOpKind::Invert),
                _ => None,
            };
            if let Some(op) = op {
                self.bump();
                let v = self.factor()?;
                return Ok(self.add(NodeKind::UnaryOp { op }, t.start, self.prev_end, vec![v]));
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        let base = if self.at_kw("await") {
            self.bump();
            let v = self.primary()?;
            self.add(NodeKind::Await, start, self.prev_end, vec![v])
        } else {
            self.primary()?
        };
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(self.add(NodeKind::BinOp { op: BinOpKind::Pow }, start, self.prev_end, vec![base, exp]));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        let mut node = self.atom()?;
        loop {
            if self.eat_op(".") {
                let attr = self.expect_name()?;
                node = self.add(NodeKind::Attribute { attr, ctx: ExprContext::Load }, start, self.prev_end, vec![node]);
            } else if self.eat_op("(") {
                let mut children = vec![node];
                children.extend(self.arguments()?);
                self.expect_op(")")?;
                node = self.add(NodeKind::Call, start, self.prev_end, children);
            } else if self.at_op("[") {
                self.bump();
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                node = self.add(NodeKind::Subscript { ctx: ExprContext::Load }, start, self.prev_end, vec![node, index]);
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn arguments(&mut self) -> Result<Vec<NodeId>> {
        let mut args = Vec::new();
        while !self.at_op(")") {
            let start = self.peek().start;
            let arg = if self.eat_op("*") {
                let v = self.test()?;
                self.add(NodeKind::Starred { ctx: ExprContext::Load }, start, self.prev_end, vec![v])
            } else if self.eat_op("**") {
                let v = self.test()?;
                self.add(NodeKind::Keyword { arg: None }, start, self.prev_end, vec![v])
            } else if self.peek().kind == TokenKind::Name
                && self.peek_at(1).kind == TokenKind::Op
                && self.tok_text(self.peek_at(1)) == "="
            {
                let name = self.expect_name()?;
                self.bump();
                let v = self.test()?;
                self.add(NodeKind::Keyword { arg: Some(name) }, start, self.prev_end, vec![v])
            } else {
                let e = self.named_expr()?;
                if self.at_kw("for") || (self.at_kw("async") && self.at_kw_at(1, "for")) {
                    let mut children = vec![e];
                    children.extend(self.comprehension_clauses()?);
                    self.add(NodeKind::GeneratorExp, start, self.prev_end, children)
                } else {
                    e
                }
            };
            args.push(arg);
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(args)
    }

    fn subscript_list(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        let first = self.slice_item()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.slice_item()?);
        }
        Ok(self.add(NodeKind::Tuple { ctx: ExprContext::Load, parenthesized: false }, start, self.prev_end, items))
    }

    fn slice_item(&mut self) -> Result<NodeId> {
        let start = self.peek().start;
        if self.at_op("*") {
            return self.star_named_expr();
        }
        let mut children = Vec::new();
        let mut has_lower = false;
        if !self.at_op(":") {
            let lower = self.named_expr()?;
            if !self.at_op(":") {
                return Ok(lower);
            }
            children.push(lower);
            has_lower = true;
        }
        self.expect_op(":")?;
        let mut has_upper = false;
        let mut has_step = false;
        if !self.at_op(":") && !self.at_op(",") && !self.at_op("]") {
            children.push(self.test()?);
            has_upper = true;
        }
        if self.eat_op(":") && !self.at_op(",") && !self.at_op("]") {
            children.push(self.test()?);
            has_step = true;
        }
        Ok(self.add(NodeKind::Slice { has_lower, has_upper, has_step }, start, self.prev_end, children))
    }

    fn comprehension_clauses(&mut self) -> Result<Vec<NodeId>> {
        let mut clauses = Vec::new();
        loop {
            let start = self.peek().start;
            let is_async = if self.at_kw("async") && self.at_kw_at(1, "for") {
                self.bump();
                true
            } else if self.at_kw("for") {
                false
            } else {
                break;
            };
            self.expect_kw("for")?;
            let target = self.target_list()?;
            self.set_ctx(target, ExprContext::Store)?;
            self.expect_kw("in")?;
            let mut children = vec![target, self.or_test()?];
            while self.eat_kw("if") {
                children.push(self.or_test()?);
            }
            clauses.push(self.add(NodeKind::Comprehension { is_async }, start, self.prev_end, children));
        }
        Ok(clauses)
    }

    fn at_comprehension(&self) -> bool {
        self.at_kw("for") || (self.at_kw("async") && self.at_kw_at(1, "for"))
    }

    fn atom(&mut self) -> Result<NodeId> {
        let t = self.peek();
        match t.kind {
            TokenKind::Name => {
                let word = self.tok_text(t);
                let lit = match word {
                    "True" => Some(LitKind::True),
                    "False" => Some(LitKind::False),
                    "None" => Some(LitKind::None),
                    _ => None,
                };
                if let Some(kind) = lit {
                    self.bump();
                    return Ok(self.add(NodeKind::Literal { kind }, t.start, t.end, vec![]));
                }
                if is_keyword(word) {
                    return Err(self.error_here("invalid syntax"));
                }
                self.bump();
                Ok(self.add(NodeKind::Name { id: word.to_string(), ctx: ExprContext::Load }, t.start, t.end, vec![]))
            }
            TokenKind::Number => {
                self.bump();
                let text = self.tok_text(t).to_ascii_lowercase();
                let kind = if text.ends_with('j') {
                    LitKind::Complex
                } else if !text.starts_with("0x")
                    && (text.contains('.') || text.contains('e'))
                {
                    LitKind::Float
                } else {
                    LitKind::Int
                };
                Ok(self.add(NodeKind::Literal { kind }, t.start, t.end, vec![]))
            }
            TokenKind::String => {
                let mut kind = LitKind::Str;
                while self.peek().kind == TokenKind::String {
                    let s = self.bump();
                    let prefix: String = self
                        .tok_text(s)
                        .chars()
                        .take_while(|c| c.is_ascii_alphabetic())
                        .collect::<String>()
                        .to_ascii_lowercase();
                    if prefix.contains('f') {
                        kind = LitKind::FString;
                    } else if prefix.contains('b') && kind == LitKind::Str {
                        kind = LitKind::Bytes;
                    }
                }
                Ok(self.add(NodeKind::Literal { kind }, t.start, self.prev_end, vec![]))
            }
            TokenKind::Op => match self.tok_text(t) {
                "..." => {
                    self.bump();
                    Ok(self.add(NodeKind::Literal { kind: LitKind::Ellipsis }, t.start, t.end, vec![]))
                }
                "(" => self.paren_atom(),
                "[" => self.list_atom(),
                "{" => self.brace_atom(),
                _ => Err(self.error_here("invalid syntax")),
            },
            _ => Err(self.error_here("invalid syntax")),
        }
    }

    fn paren_atom(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        if self.at_op(")") {
            let end = self.bump().end;
            return Ok(self.add(NodeKind::Tuple { ctx: ExprContext::Load, parenthesized: true }, start, end, vec![]));
        }
        if self.at_kw("yield") {
            let y = self.yield_expr()?;
            self.expect_op(")")?;
            return Ok(y);
        }
        let first = self.star_named_expr()?;
        if self.at_comprehension() {
            let mut children = vec![first];
            children.extend(self.comprehension_clauses()?);
            let end = self.expect_op(")")?.end;
            return Ok(self.add(NodeKind::GeneratorExp, start, end, children));
        }
        if !self.at_op(",") {
            self.expect_op(")")?;
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op(")") {
                break;
            }
            items.push(self.star_named_expr()?);
        }
        let end = self.expect_op(")")?.end;
        Ok(self.add(NodeKind::Tuple { ctx: ExprContext::Load, parenthesized: true }, start, end, items))
    }

    fn list_atom(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        let mut items = Vec::new();
        if !self.at_op("]") {
            let first = self.star_named_expr()?;
            if self.at_comprehension() {
                let mut children = vec![first];
                children.extend(self.comprehension_clauses()?);
                let end = self.expect_op("]")?.end;
                return Ok(self.add(NodeKind::ListComp, start, end, children));
            }
            items.push(first);
            while self.eat_op(",") {
                if self.at_op("]") {
                    break;
                }
                items.push(self.star_named_expr()?);
            }
        }
        let end = self.expect_op("]")?.end;
        Ok(self.add(NodeKind::List { ctx: ExprContext::Load }, start, end, items))
    }

    fn dict_entry(&mut self) -> Result<Vec<NodeId>> {
        if self.at_op("**") {
            let start = self.bump().start;
            let v = self.bitor()?;
            return Ok(vec![self.add(NodeKind::DictUnpack, start, self.prev_end, vec![v])]);
        }
        let key = self.test()?;
        self.expect_op(":")?;
        Ok(vec![key, self.test()?])
    }

    fn brace_atom(&mut self) -> Result<NodeId> {
        let start = self.bump().start;
        if self.at_op("}") {
            let end = self.bump().end;
            return Ok(self.add(NodeKind::Dict, start, end, vec![]));
        }
        let is_dict = if self.at_op("**") {
            true
        } else {
            let first = self.star_named_expr()?;
            if self.eat_op(":") {
                let value = self.test()?;
                if self.at_comprehension() {
                    let mut children = vec![first, value];
                    children.extend(self.comprehension_clauses()?);
                    let end = self.expect_op("}")?.end;
                    return Ok(self.add(NodeKind::DictComp, start, end, children));
                }
                let mut entries = vec![first, value];
                while self.eat_op(",") {
                    if self.at_op("}") {
                        break;
                    }
                    entries.extend(self.dict_entry()?);
                }
                let end = self.expect_op("}")?.end;
                return Ok(self.add(NodeKind::Dict, start, end, entries));
            }
            if self.at_comprehension() {
                let mut children = vec![first];
                children.extend(self.comprehension_clauses()?);
                let end = self.expect_op("}")?.end;
                return Ok(self.add(NodeKind::SetComp, start, end, children));
            }
            let mut items = vec![first];
            while self.eat_op(",") {
                if self.at_op("}") {
                    break;
                }
                items.push(self.star_named_expr()?);
            }
            let end = self.expect_op("}")?.end;
            return Ok(self.add(NodeKind::Set, start, end, items));
        };
        debug_assert!(is_dict);
        let mut entries = self.dict_entry()?;
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            entries.extend(self.dict_entry()?);
        }
        let end = self.expect_op("}")?.end;
        Ok(self.add(NodeKind::Dict, start, end, entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> (SourceModule, Ast) {
        let src = SourceModule::new("t.py", text);
        let ast = parse_module(&src).unwrap_or_else(|e| panic!("{e}"));
        (src, ast)
    }

    const BRANCHY: &str = "import torch\n\n@torch.compile()\ndef f(x, y):\n    x_1 = x*2\n    y_1 = y*2\n    if x.sum() > 10: # <-- graph-break here\n        z = x_1 + y_1\n    else:\n        z = x_1 * y_1\n    return torch.relu(z)\n";

    #[test]
    fn figure_two_shape() {
        let (src, ast) = parse(BRANCHY);
        let root = ast.root();
        let stmts = ast.statements(root);
        assert_eq!(stmts.len(), 2);
        let f = stmts[1];
        assert!(matches!(ast.kind(f), NodeKind::FunctionDef { name, .. } if name == "f"));
        assert_eq!(ast.decorators(f).len(), 1);
        let body = ast.body(f).unwrap();
        let if_stmt = ast.statements(body)[2];
        assert!(matches!(ast.kind(if_stmt), NodeKind::If { is_elif: false }));
        let cond = ast.condition(if_stmt).unwrap();
        assert!(matches!(ast.kind(cond), NodeKind::Compare { ops } if ops == &[CmpOp::Gt]));
        let call = ast.child(cond, 0);
        assert_eq!(ast.kind(call), &NodeKind::Call);
        let callee = ast.callee(call);
        assert!(matches!(ast.kind(callee), NodeKind::Attribute { attr, .. } if attr == "sum"));
        assert_eq!(ast.name_id(ast.child(callee, 0)), Some("x"));
        assert_eq!(ast.text(cond, src.text()), "x.sum() > 10");
        assert_eq!(
            ast.text(if_stmt, src.text()),
            "if x.sum() > 10: # <-- graph-break here\n        z = x_1 + y_1\n    else:\n        z = x_1 * y_1"
        );
    }

    #[test]
    fn empty_module_has_no_children() {
        let (_, ast) = parse("");
        assert!(ast.children(ast.root()).is_empty());
        let (_, ast) = parse("\n# just a comment\n\n");
        assert!(ast.children(ast.root()).is_empty());
    }

    #[test]
    fn unbalanced_parentheses_report_line() {
        let src = SourceModule::new("bad.py", "def f(x):\n    y = torch.relu((x)\n    return y\n");
        match parse_module(&src) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn elif_is_nested_if() {
        let (_, ast) = parse("if a:\n    x = 1\nelif b:\n    x = 2\nelse:\n    x = 3\n");
        let outer = ast.statements(ast.root())[0];
        let inner = ast.orelse(outer).unwrap();
        assert!(matches!(ast.kind(inner), NodeKind::If { is_elif: true }));
        assert_eq!(ast.kind(ast.orelse(inner).unwrap()), &NodeKind::Block);
    }

    #[test]
    fn assignment_forms() {
        let (_, ast) = parse("a = b = 1\nc += 2\nd: int = 3\ne, *f = g\nh[0].i = j\n");
        let kinds: Vec<_> = ast.statements(ast.root()).iter().map(|&s| ast.kind(s).label()).collect();
        assert_eq!(kinds, ["assign", "augassign", "annassign", "assign", "assign"]);
        let multi = ast.statements(ast.root())[0];
        assert_eq!(ast.children(multi).len(), 3);
    }

    #[test]
    fn broad_syntax_subset_parses() {
        let text = r#"
from __future__ import annotations
import logging, torch.nn as nn
from .mod import (a as b, c,)
logger = logging.getLogger(__name__)

class M(nn.Module, metaclass=Meta):
    """doc"""
    def __init__(self, *args, k: int = 2, **kw) -> None:
        super().__init__()
        self.proj = nn.Linear(4, 4)

    async def run(self, x, /, y=None, *, z):
        async with ctx() as (p, q):
            pass
        data = [i ** 2 for i in range(10) if i % 2]
        table = {k: v for k, v in zip(a, b)}
        s = {1, 2, *rest}
        d = {**base, 'x': 1}
        g = sum(t for t in data)
        f = lambda u, w=1: u + w
        y = x[1:, ::2, ...] if x is not None else -x
        while (n := len(data)) > 3:
            data.pop()
        for i, (j, k) in enumerate(pairs):
            continue
        else:
            pass
        try:
            risky()
        except (ValueError, KeyError) as err:
            raise RuntimeError("bad") from err
        else:
            ok = not flag and other or fallback
        finally:
            del ok
        assert x, f"{x!r} message"
        global G
        return await x, b'bytes' "implicit" 'concat'
"#;
        let (_, ast) = parse(text);
        assert!(ast.len() > 100);
    }

    #[test]
    fn single_line_compound_bodies() {
        let (src, ast) = parse("def f(c, a, b):\n    if c: return a\n    return b\n");
        let f = ast.statements(ast.root())[0];
        let body = ast.body(f).unwrap();
        let if_stmt = ast.statements(body)[0];
        assert_eq!(ast.text(if_stmt, src.text()), "if c: return a");
    }

    #[test]
    fn semicolon_separated_statements() {
        let (_, ast) = parse("a = 1; b = 2;\n");
        assert_eq!(ast.statements(ast.root()).len(), 2);
    }

    #[test]
    fn cannot_assign_to_call() {
        let src = SourceModule::new("bad.py", "f() = 3\n");
        assert!(matches!(parse_module(&src), Err(Error::Syntax { line: 1, .. })));
    }

    #[test]
    fn parenthesized_operand_spans_include_parens() {
        let (src, ast) = parse("y = (a + b).relu() * (c)\n");
        let assign = ast.statements(ast.root())[0];
        let value = ast.child(assign, 1);
        assert_eq!(ast.text(value, src.text()), "(a + b).relu() * (c)");
        let call = ast.child(value, 0);
        assert_eq!(ast.text(call, src.text()), "(a + b).relu()");
    }
}
