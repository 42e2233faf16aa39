//! Indentation-aware tokenizer for the supported Python subset.

use super::source::SourceModule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Name,
    Number,
    String,
    Op,
    Newline,
    Indent,
    Dedent,
    EndMarker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", ">>", "<<", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "=",
];

const STRING_PREFIXES: &[&str] = &["r", "u", "b", "f", "br", "rb", "fr", "rf"];

struct Lexer<'a> {
    source: &'a SourceModule,
    bytes: &'a [u8],
    pos: usize,
    tokens: Vec<Token>,
    indents: Vec<usize>,
    brackets: Vec<(u8, usize)>,
    at_line_start: bool,
}

/// Splits a module into tokens. Comments, blank lines and explicit line
/// continuations produce no tokens; everything else maps to a byte range.
pub fn tokenize(source: &SourceModule) -> Result<Vec<Token>> {
    let mut lexer = Lexer {
        source,
        bytes: source.text().as_bytes(),
        pos: 0,
        tokens: Vec::new(),
        indents: vec![0],
        brackets: Vec::new(),
        at_line_start: true,
    };
    lexer.run()?;
    Ok(lexer.tokens)
}

impl<'a> Lexer<'a> {
    fn error(&self, offset: usize, message: impl Into<String>) -> Error {
        let (line, col) = self.source.line_col(offset);
        Error::Syntax {
            path: self.source.path().to_path_buf(),
            line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize, end: usize) {
        self.tokens.push(Token { kind, start, end });
    }

    fn run(&mut self) -> Result<()> {
        loop {
            if self.at_line_start && self.brackets.is_empty() {
                if !self.handle_indentation()? {
                    break;
                }
            }
            let Some(c) = self.peek(0) else { break };
            match c {
                b' ' | b'\t' | b'\x0c' => self.pos += 1,
                b'#' => self.skip_comment(),
                b'\\' => {
                    let next = self.peek(1);
                    if next == Some(b'\n') {
                        self.pos += 2;
                    } else if next == Some(b'\r') {
                        self.pos += if self.peek(2) == Some(b'\n') { 3 } else { 2 };
                    } else {
                        return Err(self.error(self.pos, "unexpected character after line continuation"));
                    }
                }
                b'\n' | b'\r' => {
                    let start = self.pos;
                    self.pos += if c == b'\r' && self.peek(1) == Some(b'\n') { 2 } else { 1 };
                    if self.brackets.is_empty() {
                        self.push(TokenKind::Newline, start, self.pos);
                        self.at_line_start = true;
                    }
                }
                b'"' | b'\'' => self.lex_string(self.pos)?,
                b'0'..=b'9' => self.lex_number(),
                b'.' if matches!(self.peek(1), Some(b'0'..=b'9')) => self.lex_number(),
                c if is_ident_start(c) => self.lex_name()?,
                _ => self.lex_operator()?,
            }
        }
        self.finish()
    }

    /// Measures indentation at the start of a logical line. Returns false at
    /// end of input.
    fn handle_indentation(&mut self) -> Result<bool> {
        loop {
            let line_start = self.pos;
            let mut width = 0usize;
            while let Some(c) = self.peek(0) {
                match c {
                    b' ' => width += 1,
                    b'\t' => width = (width / 8 + 1) * 8,
                    b'\x0c' => width = 0,
                    _ => break,
                }
                self.pos += 1;
            }
            match self.peek(0) {
                None => return Ok(false),
                Some(b'#') => {
                    self.skip_comment();
                    self.skip_newline();
                }
                Some(b'\n') | Some(b'\r') => self.skip_newline(),
                Some(b'\\') if matches!(self.peek(1), Some(b'\n') | Some(b'\r')) => {
                    // A continuation on an otherwise blank line joins with the next one.
                    self.pos += 1;
                    self.skip_newline();
                }
                Some(_) => {
                    let top = *self.indents.last().unwrap();
                    if width > top {
                        self.indents.push(width);
                        self.push(TokenKind::Indent, line_start, self.pos);
                    } else {
                        while width < *self.indents.last().unwrap() {
                            self.indents.pop();
                            self.push(TokenKind::Dedent, self.pos, self.pos);
                        }
                        if width != *self.indents.last().unwrap() {
                            return Err(self.error(
                                self.pos,
                                "unindent does not match any outer indentation level",
                            ));
                        }
                    }
                    self.at_line_start = false;
                    return Ok(true);
                }
            }
        }
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek(0) {
            if c == b'\n' || c == b'\r' {
                break;
            }
            self.pos += 1;
        }
    }

    fn skip_newline(&mut self) {
        match self.peek(0) {
            Some(b'\r') => {
                self.pos += 1;
                if self.peek(0) == Some(b'\n') {
                    self.pos += 1;
                }
            }
            Some(b'\n') => self.pos += 1,
            _ => {}
        }
    }

    fn lex_name(&mut self) -> Result<()> {
        let start = self.pos;
        while let Some(c) = self.peek(0) {
            if is_ident_continue(c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let word = &self.source.text()[start..self.pos];
        if matches!(self.peek(0), Some(b'"') | Some(b'\''))
            && STRING_PREFIXES.contains(&word.to_ascii_lowercase().as_str())
        {
            return self.lex_string(start);
        }
        self.push(TokenKind::Name, start, self.pos);
        Ok(())
    }

    /// `start` points at the prefix (if any); `self.pos` at the opening quote.
    fn lex_string(&mut self, start: usize) -> Result<()> {
        let quote = self.peek(0).unwrap();
        let triple = self.peek(1) == Some(quote) && self.peek(2) == Some(quote);
        self.pos += if triple { 3 } else { 1 };
        loop {
            let Some(c) = self.peek(0) else {
                return Err(self.error(start, "unterminated string literal"));
            };
            match c {
                b'\\' => {
                    self.pos += 1;
                    if self.peek(0) == Some(b'\r') && self.peek(1) == Some(b'\n') {
                        self.pos += 2;
                    } else if self.peek(0).is_some() {
                        self.pos += 1;
                    }
                }
                b'\n' | b'\r' if !triple => {
                    return Err(self.error(start, "unterminated string literal"));
                }
                c if c == quote => {
                    if !triple {
                        self.pos += 1;
                        break;
                    }
                    if self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
                        self.pos += 3;
                        break;
                    }
                    self.pos += 1;
                }
                _ => self.pos += 1,
            }
        }
        self.push(TokenKind::String, start, self.pos);
        Ok(())
    }

    fn lex_number(&mut self) {
        let start = self.pos;
        let radix_prefix = self.peek(0) == Some(b'0')
            && matches!(self.peek(1), Some(b'x' | b'X' | b'o' | b'O' | b'b' | b'B'));
        if radix_prefix {
            self.pos += 2;
            while matches!(self.peek(0), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += 1;
            }
        } else {
            self.eat_digits();
            if self.peek(0) == Some(b'.') {
                self.pos += 1;
                self.eat_digits();
            }
            if matches!(self.peek(0), Some(b'e' | b'E')) {
                let sign = usize::from(matches!(self.peek(1), Some(b'+' | b'-')));
                if matches!(self.peek(1 + sign), Some(b'0'..=b'9')) {
                    self.pos += 1 + sign;
                    self.eat_digits();
                }
            }
            if matches!(self.peek(0), Some(b'j' | b'J')) {
                self.pos += 1;
            }
        }
        self.push(TokenKind::Number, start, self.pos);
    }

    fn eat_digits(&mut self) {
        while matches!(self.peek(0), Some(c) if c.is_ascii_digit() || c == b'_') {
            self.pos += 1;
        }
    }

    fn lex_operator(&mut self) -> Result<()> {
        let rest = &self.bytes[self.pos..];
        let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(op.as_bytes())) else {
            let ch = self.source.text()[self.pos..].chars().next().unwrap();
            return Err(self.error(self.pos, format!("invalid character {ch:?}")));
        };
        let start = self.pos;
        let b = op.as_bytes()[0];
        match b {
            b'(' | b'[' | b'{' => self.brackets.push((b, start)),
            b')' | b']' | b'}' => {
                let open = match b {
                    b')' => b'(',
                    b']' => b'[',
                    _ => b'{',
                };
                match self.brackets.pop() {
                    None => return Err(self.error(start, format!("unmatched '{}'", b as char))),
                    Some((o, _)) if o != open => {
                        return Err(self.error(
                            start,
                            format!(
                                "closing parenthesis '{}' does not match opening parenthesis '{}'",
                                b as char, o as char
                            ),
                        ))
                    }
                    Some(_) => {}
                }
            }
            _ => {}
        }
        self.pos += op.len();
        self.push(TokenKind::Op, start, self.pos);
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        if let Some(&(open, at)) = self.brackets.first() {
            return Err(self.error(at, format!("'{}' was never closed", open as char)));
        }
        let end = self.bytes.len();
        if matches!(
            self.tokens.last(),
            Some(t) if !matches!(t.kind, TokenKind::Newline | TokenKind::Dedent | TokenKind::Indent)
        ) {
            self.push(TokenKind::Newline, end, end);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(TokenKind::Dedent, end, end);
        }
        self.push(TokenKind::EndMarker, end, end);
        Ok(())
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_' || c >= 0x80
}

fn is_ident_continue(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c >= 0x80
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<(TokenKind, String)> {
        let src = SourceModule::new("t.py", text);
        tokenize(&src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text(text).to_string()))
            .collect()
    }

    #[test]
    fn indentation_produces_indent_and_dedent() {
        let toks = kinds("if a:\n    b = 1\nc\n");
        let ks: Vec<_> = toks.iter().map(|t| t.0).collect();
        use TokenKind::*;
        assert_eq!(
            ks,
            vec![Name, Name, Op, Newline, Indent, Name, Op, Number, Newline, Dedent, Name, Newline, EndMarker]
        );
    }

    #[test]
    fn brackets_join_lines_and_comments_vanish() {
        let toks = kinds("x = (1,\n     2)  # trailing\n");
        assert!(toks.iter().filter(|t| t.0 == TokenKind::Newline).count() == 1);
        assert!(!toks.iter().any(|t| t.1.contains('#')));
    }

    #[test]
    fn strings_with_prefixes_and_triple_quotes() {
        let toks = kinds("s = f'{x}' + rb\"\\\"\" + '''a\nb'''\n");
        let strings: Vec<_> = toks.iter().filter(|t| t.0 == TokenKind::String).map(|t| t.1.clone()).collect();
        assert_eq!(strings, vec!["f'{x}'", "rb\"\\\"\"", "'''a\nb'''"]);
    }

    #[test]
    fn numbers() {
        let toks = kinds("a = 1_000 + 0x1F + 1.5e-3 + .5 + 2j\n");
        let nums: Vec<_> = toks.iter().filter(|t| t.0 == TokenKind::Number).map(|t| t.1.clone()).collect();
        assert_eq!(nums, vec!["1_000", "0x1F", "1.5e-3", ".5", "2j"]);
    }

    #[test]
    fn unclosed_paren_reports_its_line() {
        let src = SourceModule::new("bad.py", "a = 1\nb = f(1,\n")
            ;
        match tokenize(&src) {
            Err(Error::Syntax { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("never closed"));
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn stray_closer_is_an_error() {
        let src = SourceModule::new("bad.py", "a = 1)\n");
        assert!(matches!(tokenize(&src), Err(Error::Syntax { line: 1, .. })));
    }

    #[test]
    fn bad_dedent_is_an_error() {
        let src = SourceModule::new("bad.py", "if a:\n    b\n  c\n");
        assert!(matches!(tokenize(&src), Err(Error::Syntax { line: 3, .. })));
    }
}
