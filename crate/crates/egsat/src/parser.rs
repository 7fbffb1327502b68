//! Recursive-descent parser for `.egsat` sources.
//!
//! The grammar mirrors the goal hierarchy: an emotional goal's body holds
//! at most one `how and|or { ... }` block whose items become its
//! decomposition children; a functional goal's body holds quality goals or
//! `ref`s to them, which become quality attachments. `ref` points at a
//! previously declared goal, so shared sub-graphs stay expressible.
//!
//! Parsing is recoverable: a malformed item is reported and skipped, and
//! sibling items are still parsed.

use std::collections::HashMap;

use crate::diag::{has_errors, Diagnostic};
use crate::lexer::{Lexer, Token, TokenKind};
use crate::model::{
    build_model, AttachmentDriver, Combinator, Decomposition, Goal, GoalId, GoalKind, GoalModel,
    QualityAttachment, SourceSpan,
};

#[derive(Debug)]
pub struct ParseResult {
    /// Present exactly when no error diagnostic was produced.
    pub model: Option<GoalModel>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse(source: &str) -> ParseResult {
    parse_named("<input>", source)
}

pub fn parse_named(file: &str, source: &str) -> ParseResult {
    let (tokens, mut diags) = Lexer::new(file, source).tokenize();
    let mut parser = Parser {
        file,
        tokens,
        pos: 0,
        diags: Vec::new(),
        goals: Vec::new(),
        decompositions: Vec::new(),
        attachments: Vec::new(),
        declared: HashMap::new(),
        used_ids: HashMap::new(),
    };
    let name = parser.parse_model();
    diags.append(&mut parser.diags);

    if has_errors(&diags) {
        return ParseResult { model: None, diagnostics: diags };
    }
    match build_model(name, parser.goals, parser.decompositions, parser.attachments) {
        Ok(model) => ParseResult { model: Some(model), diagnostics: diags },
        Err(mut build_diags) => {
            diags.append(&mut build_diags);
            ParseResult { model: None, diagnostics: diags }
        }
    }
}

struct Parser<'a> {
    file: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    goals: Vec<Goal>,
    decompositions: Vec<Decomposition>,
    attachments: Vec<QualityAttachment>,
    declared: HashMap<GoalId, GoalKind>,
    /// Auto-id collision registry: slug -> next suffix to try.
    used_ids: HashMap<String, u32>,
}

#[derive(Clone, Copy, PartialEq)]
enum ItemCtx {
    TopLevel,
    How,
    FunctionalBody,
}

impl<'a> Parser<'a> {
    fn parse_model(&mut self) -> String {
        if !self.eat_word("model") {
            self.err_expected("`model`");
            return String::new();
        }
        let name = match self.expect_string("model name") {
            Some(n) => n,
            None => return String::new(),
        };
        if !self.expect(TokenKind::LBrace, "`{`") {
            return name;
        }
        self.parse_items_until_rbrace(ItemCtx::TopLevel);
        if !matches!(self.peek().kind, TokenKind::Eof) {
            self.err_expected("end of input");
        }
        name
    }

    /// Parses items until the closing `}` (consumed) or end of input.
    /// Returns the goal ids contributed by the items, in order.
    fn parse_items_until_rbrace(&mut self, ctx: ItemCtx) -> Vec<GoalId> {
        let mut ids = Vec::new();
        loop {
            match &self.peek().kind {
                TokenKind::RBrace => {
                    self.bump();
                    return ids;
                }
                TokenKind::Eof => {
                    self.err_expected("`}`");
                    return ids;
                }
                _ => {
                    if let Some(id) = self.parse_item(ctx) {
                        ids.push(id);
                    }
                }
            }
        }
    }

    fn parse_item(&mut self, ctx: ItemCtx) -> Option<GoalId> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Word(w) => match w.as_str() {
                "ref" => {
                    self.bump();
                    self.parse_ref(ctx)
                }
                "emotional" => self.parse_goal(GoalKind::Emotional, ctx),
                "functional" => self.parse_goal(GoalKind::Functional, ctx),
                "quality" => self.parse_goal(GoalKind::Quality, ctx),
                _ => {
                    self.err_expected("`emotional`, `functional`, `quality` or `ref`");
                    self.recover_item();
                    None
                }
            },
            _ => {
                self.err_expected("`emotional`, `functional`, `quality` or `ref`");
                self.recover_item();
                None
            }
        }
    }

    fn parse_ref(&mut self, ctx: ItemCtx) -> Option<GoalId> {
        let tok = self.peek().clone();
        let word = match &tok.kind {
            TokenKind::Word(w) => w.clone(),
            _ => {
                self.err_expected("goal id after `ref`");
                self.recover_item();
                return None;
            }
        };
        self.bump();
        let id = GoalId::new(&word).expect("word tokens are valid ids");
        if !self.declared.contains_key(&id) {
            self.diags.push(
                Diagnostic::error("E009", format!("`ref {id}` points at an undeclared goal"))
                    .with_span(Some(tok.span))
                    .with_related(vec![id]),
            );
            return None;
        }
        // A top-level ref introduces no edge; it is legal but inert.
        if ctx == ItemCtx::TopLevel {
            return None;
        }
        Some(id)
    }

    fn parse_goal(&mut self, kind: GoalKind, ctx: ItemCtx) -> Option<GoalId> {
        let kw_tok = self.peek().clone();
        self.bump();
        let name = match self.expect_string("goal name") {
            Some(n) => n,
            None => {
                self.recover_item();
                return None;
            }
        };
        let name_end = self.tokens[self.pos - 1].span.clone();
        let span = SourceSpan::new(
            self.file,
            kw_tok.span.start_line,
            kw_tok.span.start_col,
            name_end.end_line,
            name_end.end_col,
        );

        if ctx == ItemCtx::FunctionalBody && kind != GoalKind::Quality {
            self.diags.push(
                Diagnostic::error(
                    "P002",
                    format!("only quality goals may nest in a functional goal body, found {kind} goal"),
                )
                .with_span(Some(span.clone())),
            );
        }

        let mut explicit_id: Option<GoalId> = None;
        let mut driver: Option<AttachmentDriver> = None;
        let mut frequency: Option<u32> = None;
        let mut note: Option<String> = None;

        while let Some(attr) = self.peek_attr_keyword() {
            let attr_tok = self.peek().clone();
            self.bump(); // keyword
            self.bump(); // colon
            match attr.as_str() {
                "id" => match &self.peek().kind {
                    TokenKind::Word(w) => {
                        explicit_id = GoalId::new(w.clone());
                        self.bump();
                    }
                    _ => {
                        self.err_expected("identifier after `id:`");
                        self.recover_item();
                        return None;
                    }
                },
                "driver" => match &self.peek().kind.clone() {
                    TokenKind::Word(w) => {
                        let tok_span = self.peek().span.clone();
                        self.bump();
                        match AttachmentDriver::from_surface_name(w) {
                            Some(d) => driver = Some(d),
                            None => self.diags.push(
                                Diagnostic::error("P003", format!("unknown driver name `{w}`"))
                                    .with_span(Some(tok_span)),
                            ),
                        }
                    }
                    _ => {
                        self.err_expected("driver name after `driver:`");
                        self.recover_item();
                        return None;
                    }
                },
                "freq" => match &self.peek().kind.clone() {
                    TokenKind::Word(w) => {
                        let tok_span = self.peek().span.clone();
                        self.bump();
                        match w.parse::<u32>() {
                            Ok(n) => frequency = Some(n),
                            Err(_) => self.diags.push(
                                Diagnostic::error("P002", format!("`freq:` takes a non-negative integer, found `{w}`"))
                                    .with_span(Some(tok_span)),
                            ),
                        }
                    }
                    _ => {
                        self.err_expected("integer after `freq:`");
                        self.recover_item();
                        return None;
                    }
                },
                "note" => match &self.peek().kind.clone() {
                    TokenKind::Str(s) => {
                        note = Some(s.clone());
                        self.bump();
                    }
                    _ => {
                        self.err_expected("string after `note:`");
                        self.recover_item();
                        return None;
                    }
                },
                _ => unreachable!(),
            }
            if kind != GoalKind::Emotional && matches!(attr.as_str(), "driver" | "freq") {
                self.diags.push(
                    Diagnostic::error(
                        "P002",
                        format!("`{attr}:` applies to emotional goals only, not {kind} goals"),
                    )
                    .with_span(Some(attr_tok.span)),
                );
            }
        }

        let id = match explicit_id {
            Some(id) => {
                if self.declared.contains_key(&id) {
                    self.diags.push(
                        Diagnostic::error("E008", format!("duplicate goal id `{id}`"))
                            .with_span(Some(span.clone()))
                            .with_related(vec![id.clone()]),
                    );
                    self.skip_body_if_present();
                    return None;
                }
                self.reserve_slug(id.as_str());
                id
            }
            None => self.auto_id(&name),
        };

        let mut goal = Goal::new(id.clone(), kind, name);
        goal.driver = driver.filter(|_| kind == GoalKind::Emotional);
        goal.frequency = frequency.filter(|_| kind == GoalKind::Emotional);
        goal.note = note;
        goal.span = Some(span);
        self.goals.push(goal);
        // Declared before the body parses, so a `ref` back to this goal
        // resolves (the resulting cycle is rejected at build time).
        self.declared.insert(id.clone(), kind);

        if matches!(self.peek().kind, TokenKind::LBrace) {
            self.parse_body(&id, kind);
        }
        Some(id)
    }

    fn parse_body(&mut self, parent: &GoalId, kind: GoalKind) {
        self.bump(); // `{`
        let mut have_how = false;
        loop {
            let tok = self.peek().clone();
            match &tok.kind {
                TokenKind::RBrace => {
                    self.bump();
                    return;
                }
                TokenKind::Eof => {
                    self.err_expected("`}`");
                    return;
                }
                TokenKind::Word(w) if w == "how" => {
                    if kind != GoalKind::Emotional {
                        self.diags.push(
                            Diagnostic::error(
                                "P002",
                                format!("{kind} goals take no `how` block"),
                            )
                            .with_span(Some(tok.span.clone())),
                        );
                        self.bump();
                        self.recover_item();
                        continue;
                    }
                    if have_how {
                        self.diags.push(
                            Diagnostic::error("P002", "at most one `how` block per goal")
                                .with_span(Some(tok.span.clone())),
                        );
                        self.bump();
                        self.recover_item();
                        continue;
                    }
                    have_how = true;
                    self.bump();
                    self.parse_how(parent, &tok);
                }
                _ => match kind {
                    GoalKind::Emotional => {
                        self.err_expected("`how` block or `}`");
                        self.recover_item();
                    }
                    GoalKind::Functional => {
                        if let Some(child) = self.parse_item(ItemCtx::FunctionalBody) {
                            self.attachments.push(QualityAttachment {
                                functional: parent.clone(),
                                quality: child,
                            });
                        }
                    }
                    GoalKind::Quality => {
                        self.diags.push(
                            Diagnostic::error("P002", "quality goals take no body items")
                                .with_span(Some(tok.span.clone())),
                        );
                        self.recover_item();
                    }
                },
            }
        }
    }

    fn parse_how(&mut self, parent: &GoalId, how_tok: &Token) {
        let combinator = if self.eat_word("and") {
            Combinator::And
        } else if self.eat_word("or") {
            Combinator::Or
        } else {
            Combinator::And // unspecified combinator defaults to AND
        };
        if !self.expect(TokenKind::LBrace, "`{`") {
            self.recover_item();
            return;
        }
        let children = self.parse_items_until_rbrace(ItemCtx::How);
        if children.is_empty() {
            self.diags.push(
                Diagnostic::error("P002", "`how` block must list at least one sub-goal")
                    .with_span(Some(how_tok.span.clone())),
            );
            return;
        }
        self.decompositions.push(Decomposition {
            parent: parent.clone(),
            combinator,
            children,
        });
    }

    fn auto_id(&mut self, name: &str) -> GoalId {
        let mut slug = String::new();
        let mut pending_dash = false;
        for c in name.chars() {
            if c.is_ascii_alphanumeric() {
                if pending_dash && !slug.is_empty() {
                    slug.push('-');
                }
                pending_dash = false;
                slug.push(c.to_ascii_lowercase());
            } else {
                pending_dash = true;
            }
        }
        if slug.is_empty() {
            slug = "goal".to_string();
        }
        loop {
            let n = self.used_ids.entry(slug.clone()).or_insert(1);
            let candidate = if *n == 1 { slug.clone() } else { format!("{slug}-{n}") };
            *n += 1;
            let id = GoalId::new(candidate).expect("slug is a valid id");
            if !self.declared.contains_key(&id) {
                return id;
            }
        }
    }

    fn reserve_slug(&mut self, id: &str) {
        self.used_ids.entry(id.to_string()).or_insert(2);
    }

    /// Skips a balanced `{ ... }` if one follows, for use after a goal
    /// header was rejected.
    fn skip_body_if_present(&mut self) {
        if matches!(self.peek().kind, TokenKind::LBrace) {
            self.bump();
            let mut depth = 1usize;
            loop {
                match self.peek().kind {
                    TokenKind::LBrace => depth += 1,
                    TokenKind::RBrace => {
                        depth -= 1;
                        if depth == 0 {
                            self.bump();
                            return;
                        }
                    }
                    TokenKind::Eof => return,
                    _ => {}
                }
                self.bump();
            }
        }
    }

    /// Skips tokens until the next plausible sibling item or the enclosing
    /// `}`; nested braces are consumed in balance.
    fn recover_item(&mut self) {
        let mut depth = 0usize;
        loop {
            match &self.peek().kind {
                TokenKind::Eof => return,
                TokenKind::RBrace => {
                    if depth == 0 {
                        return; // leave for the caller
                    }
                    depth -= 1;
                    self.bump();
                }
                TokenKind::LBrace => {
                    depth += 1;
                    self.bump();
                }
                TokenKind::Word(w)
                    if depth == 0
                        && matches!(w.as_str(), "emotional" | "functional" | "quality" | "ref" | "how") =>
                {
                    return;
                }
                _ => self.bump(),
            }
        }
    }

    fn peek_attr_keyword(&self) -> Option<String> {
        if let TokenKind::Word(w) = &self.peek().kind {
            if matches!(w.as_str(), "id" | "driver" | "freq" | "note")
                && matches!(self.tokens.get(self.pos + 1).map(|t| &t.kind), Some(TokenKind::Colon))
            {
                return Some(w.clone());
            }
        }
        None
    }

    fn expect_string(&mut self, what: &str) -> Option<String> {
        match &self.peek().kind.clone() {
            TokenKind::Str(s) => {
                self.bump();
                Some(s.clone())
            }
            _ => {
                self.err_expected(&format!("{what} (quoted string)"));
                None
            }
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> bool {
        if self.peek().kind == kind {
            self.bump();
            true
        } else {
            self.err_expected(what);
            false
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if let TokenKind::Word(w) = &self.peek().kind {
            if w == word {
                self.bump();
                return true;
            }
        }
        false
    }

    fn err_expected(&mut self, what: &str) {
        let tok = self.peek().clone();
        self.diags.push(
            Diagnostic::error("P002", format!("expected {what}, found {}", tok.describe()))
                .with_span(Some(tok.span)),
        );
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) {
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
    }
}
