//! Tokenizer for the `.egsat` surface syntax.
//!
//! Keywords are contextual: the lexer only distinguishes words, strings and
//! punctuation, all carrying 1-based line/column spans. `//` comments run
//! to end of line. CRLF input is accepted.

use crate::diag::Diagnostic;
use crate::model::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Bare word: keyword, identifier or integer, classified by the parser.
    Word(String),
    /// Double-quoted string, escapes already resolved.
    Str(String),
    LBrace,
    RBrace,
    Colon,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) => format!("`{w}`"),
            TokenKind::Str(_) => "string".to_string(),
            TokenKind::LBrace => "`{`".to_string(),
            TokenKind::RBrace => "`}`".to_string(),
            TokenKind::Colon => "`:`".to_string(),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

pub struct Lexer<'a> {
    file: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

impl<'a> Lexer<'a> {
    pub fn new(file: &'a str, source: &str) -> Self {
        Lexer {
            file,
            chars: source.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    /// Tokenizes the whole input. Lexical errors become P001 diagnostics;
    /// the offending character is skipped and lexing continues.
    pub fn tokenize(mut self) -> (Vec<Token>, Vec<Diagnostic>) {
        let mut tokens = Vec::new();
        let mut diags = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col) = (self.line, self.col);
            match self.peek() {
                None => {
                    tokens.push(self.token(TokenKind::Eof, line, col, line, col));
                    break;
                }
                Some('{') => {
                    self.bump();
                    tokens.push(self.token(TokenKind::LBrace, line, col, line, col));
                }
                Some('}') => {
                    self.bump();
                    tokens.push(self.token(TokenKind::RBrace, line, col, line, col));
                }
                Some(':') => {
                    self.bump();
                    tokens.push(self.token(TokenKind::Colon, line, col, line, col));
                }
                Some('"') => match self.lex_string() {
                    Ok(s) => {
                        let (el, ec) = (self.line, self.col.saturating_sub(1).max(1));
                        tokens.push(self.token(TokenKind::Str(s), line, col, el, ec));
                    }
                    Err(d) => diags.push(d),
                },
                Some(c) if is_word_char(c) => {
                    let mut w = String::new();
                    while let Some(c) = self.peek() {
                        if is_word_char(c) {
                            w.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let ec = col + w.chars().count() as u32 - 1;
                    tokens.push(self.token(TokenKind::Word(w), line, col, line, ec));
                }
                Some(c) => {
                    self.bump();
                    diags.push(
                        Diagnostic::error("P001", format!("unexpected character `{c}`"))
                            .with_span(Some(SourceSpan::new(self.file, line, col, line, col))),
                    );
                }
            }
        }
        (tokens, diags)
    }

    fn lex_string(&mut self) -> Result<String, Diagnostic> {
        let (line, col) = (self.line, self.col);
        self.bump(); // opening quote
        let mut s = String::new();
        loop {
            match self.peek() {
                None => {
                    return Err(Diagnostic::error("P001", "unterminated string").with_span(Some(
                        SourceSpan::new(self.file, line, col, self.line, self.col.max(1)),
                    )));
                }
                Some('"') => {
                    self.bump();
                    return Ok(s);
                }
                Some('\\') => {
                    self.bump();
                    match self.peek() {
                        Some('"') => {
                            s.push('"');
                            self.bump();
                        }
                        Some('\\') => {
                            s.push('\\');
                            self.bump();
                        }
                        other => {
                            let bad = other.map(|c| c.to_string()).unwrap_or_default();
                            return Err(Diagnostic::error(
                                "P001",
                                format!("invalid escape `\\{bad}` in string"),
                            )
                            .with_span(Some(SourceSpan::new(
                                self.file, self.line, self.col.saturating_sub(1).max(1), self.line, self.col,
                            ))));
                        }
                    }
                }
                Some('\n') => {
                    return Err(Diagnostic::error("P001", "unterminated string").with_span(Some(
                        SourceSpan::new(self.file, line, col, self.line, self.col),
                    )));
                }
                Some(c) => {
                    s.push(c);
                    self.bump();
                }
            }
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn token(&self, kind: TokenKind, sl: u32, sc: u32, el: u32, ec: u32) -> Token {
        Token {
            kind,
            span: SourceSpan::new(self.file, sl, sc, el, ec),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += 1;
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }
}
