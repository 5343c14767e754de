//! Text syntax for programs, fact files, and queries.
//!
//! Programs are written one clause per line-ish, `%` starts a line comment:
//!
//! ```text
//! p(X,Y) :- e(X,Y).
//! p(X,Z) :- e(X,Y), p(Y,Z).
//! e(1,2).
//! ```
//!
//! Identifiers starting with an uppercase letter or underscore are
//! variables; lowercase identifiers and bare integers are constants.
//! Queries end in `?` instead of `.`, e.g. `p(1,X)?`.
//!
//! Predicate names may contain `.`-separated segments so that transformed
//! programs (which use complement predicates like `n.p`) re-parse; terms may
//! not. Bulk facts live in per-predicate `.facts` files, one tab-separated
//! tuple per line, with the file stem naming the predicate.

use crate::ast::{Atom, Fact, Literal, Program, Query, Rule, Term};
use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Start/end positions of a token or clause, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

impl SourceSpan {
    fn point(line: u32, column: u32) -> Self {
        SourceSpan {
            line,
            column,
            end_line: line,
            end_column: column,
        }
    }

    fn to(self, other: SourceSpan) -> Self {
        SourceSpan {
            line: self.line,
            column: self.column,
            end_line: other.end_line,
            end_column: other.end_column,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(span: SourceSpan, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        span,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Name(String),
    Var(String),
    Number(String),
    Not,
    If,
    Comma,
    LParen,
    RParen,
    Dot,
    Question,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Name(n) | Token::Var(n) | Token::Number(n) => format!("`{n}`"),
            Token::Not => "`not`".into(),
            Token::If => "`:-`".into(),
            Token::Comma => "`,`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Dot => "`.`".into(),
            Token::Question => "`?`".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<(Token, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let start = SourceSpan::point(self.line, self.column);
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '%' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                continue;
            }
            let token = match c {
                ',' => {
                    self.bump();
                    Token::Comma
                }
                '(' => {
                    self.bump();
                    Token::LParen
                }
                ')' => {
                    self.bump();
                    Token::RParen
                }
                '?' => {
                    self.bump();
                    Token::Question
                }
                ':' => {
                    self.bump();
                    if self.chars.peek() == Some(&'-') {
                        self.bump();
                        Token::If
                    } else {
                        return err(start, "expected `:-`");
                    }
                }
                '.' => {
                    self.bump();
                    Token::Dot
                }
                c if c.is_ascii_digit() => {
                    let mut text = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_digit() {
                            text.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if self.chars.peek().is_some_and(|&c| is_ident_char(c)) {
                        return err(start, format!("malformed number starting with `{text}`"));
                    }
                    Token::Number(text)
                }
                c if is_ident_char(c) => {
                    let lowercase = c.is_ascii_lowercase();
                    let mut text = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if is_ident_char(c) {
                            text.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    // A dot immediately followed by a lowercase segment is
                    // part of the name (complement predicates like `n.p`);
                    // any other dot is the clause terminator.
                    if lowercase {
                        loop {
                            let mut lookahead = self.chars.clone();
                            if lookahead.next() == Some('.')
                                && lookahead.peek().is_some_and(|c| c.is_ascii_lowercase())
                            {
                                text.push('.');
                                self.bump();
                                while let Some(&c) = self.chars.peek() {
                                    if is_ident_char(c) {
                                        text.push(c);
                                        self.bump();
                                    } else {
                                        break;
                                    }
                                }
                            } else {
                                break;
                            }
                        }
                    }
                    if text == "not" {
                        Token::Not
                    } else if lowercase {
                        Token::Name(text)
                    } else {
                        Token::Var(text)
                    }
                }
                other => return err(start, format!("unexpected character `{other}`")),
            };
            let end = SourceSpan::point(self.line, self.column.saturating_sub(1));
            out.push((token, start.to(end)));
        }
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<(Token, SourceSpan)>,
    pos: usize,
    /// Arity of each predicate with the span of its first use.
    arities: HashMap<String, (usize, SourceSpan)>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: Lexer::new(text).tokenize()?,
            pos: 0,
            arities: HashMap::new(),
        })
    }

    fn eof_span(&self) -> SourceSpan {
        self.tokens
            .last()
            .map(|(_, s)| *s)
            .unwrap_or(SourceSpan::point(1, 1))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<(Token, SourceSpan)> {
        let item = self.tokens.get(self.pos).cloned();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn expect(&mut self, want: Token) -> Result<SourceSpan, ParseError> {
        match self.next() {
            Some((tok, span)) if tok == want => Ok(span),
            Some((tok, span)) => err(
                span,
                format!("expected {}, found {}", want.describe(), tok.describe()),
            ),
            None => err(
                self.eof_span(),
                format!("expected {}, found end of input", want.describe()),
            ),
        }
    }

    fn check_arity(&mut self, atom: &Atom, span: SourceSpan) -> Result<(), ParseError> {
        match self.arities.get(&atom.predicate) {
            Some(&(arity, first)) if arity != atom.arity() => err(
                span,
                format!(
                    "arity mismatch for predicate `{}`: {} arguments here, {} at {}",
                    atom.predicate,
                    atom.arity(),
                    arity,
                    first
                ),
            ),
            Some(_) => Ok(()),
            None => {
                self.arities
                    .insert(atom.predicate.clone(), (atom.arity(), span));
                Ok(())
            }
        }
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.next() {
            Some((Token::Name(n), span)) => {
                if n.contains('.') {
                    err(span, format!("constant `{n}` may not contain `.`"))
                } else {
                    Ok(Term::Constant(n))
                }
            }
            Some((Token::Number(n), _)) => Ok(Term::Constant(n)),
            Some((Token::Var(n), _)) => Ok(Term::Variable(n)),
            Some((tok, span)) => err(
                span,
                format!("expected a constant or variable, found {}", tok.describe()),
            ),
            None => err(self.eof_span(), "expected a term, found end of input"),
        }
    }

    fn parse_atom(&mut self) -> Result<(Atom, SourceSpan), ParseError> {
        let (predicate, start) = match self.next() {
            Some((Token::Name(n), span)) => (n, span),
            Some((Token::Var(n), span)) => {
                return err(
                    span,
                    format!("predicate `{n}` must start with a lowercase letter"),
                )
            }
            Some((tok, span)) => {
                return err(span, format!("expected a predicate, found {}", tok.describe()))
            }
            None => return err(self.eof_span(), "expected a predicate, found end of input"),
        };
        let mut args = Vec::new();
        let mut end = start;
        if self.peek() == Some(&Token::LParen) {
            self.next();
            args.push(self.parse_term()?);
            while self.peek() == Some(&Token::Comma) {
                self.next();
                args.push(self.parse_term()?);
            }
            end = self.expect(Token::RParen)?;
        }
        let atom = Atom::new(predicate, args);
        let span = start.to(end);
        self.check_arity(&atom, span)?;
        Ok((atom, span))
    }

    fn parse_literal(&mut self) -> Result<Literal, ParseError> {
        let negated = if self.peek() == Some(&Token::Not) {
            self.next();
            true
        } else {
            false
        };
        let (atom, _) = self.parse_atom()?;
        Ok(Literal { atom, negated })
    }

    fn parse_clause(&mut self, program: &mut Program) -> Result<(), ParseError> {
        if let Some((Token::Not, span)) = self.tokens.get(self.pos).cloned() {
            return err(span, "a conclusion may not be negated");
        }
        let (conclusion, concl_span) = self.parse_atom()?;
        match self.next() {
            Some((Token::Dot, _)) => {
                if !conclusion.is_ground() {
                    return err(concl_span, format!("fact contains a variable: {conclusion}"));
                }
                let fact = Fact::new(conclusion).expect("checked ground");
                if !program.facts.contains(&fact) {
                    program.facts.push(fact);
                }
                Ok(())
            }
            Some((Token::If, _)) => {
                let mut hypotheses = vec![self.parse_literal()?];
                while self.peek() == Some(&Token::Comma) {
                    self.next();
                    hypotheses.push(self.parse_literal()?);
                }
                let end = self.expect(Token::Dot)?;
                let rule = Rule::new(conclusion, hypotheses);
                let hyp_vars: std::collections::BTreeSet<&str> = rule
                    .hypotheses
                    .iter()
                    .flat_map(|h| h.atom.variables())
                    .collect();
                for v in rule.conclusion.variables() {
                    if !hyp_vars.contains(v) {
                        return err(
                            concl_span.to(end),
                            format!("conclusion variable `{v}` does not occur in any hypothesis"),
                        );
                    }
                }
                program.rules.push(rule);
                Ok(())
            }
            Some((tok, span)) => err(
                span,
                format!("expected `.` or `:-` after atom, found {}", tok.describe()),
            ),
            None => err(self.eof_span(), "expected `.` or `:-`, found end of input"),
        }
    }
}

/// Parse a program: rules and inline facts in any order. Hypothesis and rule
/// order are preserved exactly; duplicate facts collapse to their first
/// occurrence.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut parser = Parser::new(text)?;
    let mut program = Program::default();
    while parser.peek().is_some() {
        parser.parse_clause(&mut program)?;
    }
    Ok(program)
}

/// Parse a query of the form `p(1,X)?`.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut parser = Parser::new(text)?;
    let (atom, _) = parser.parse_atom()?;
    parser.expect(Token::Question)?;
    if let Some((tok, span)) = parser.next() {
        return err(span, format!("unexpected {} after query", tok.describe()));
    }
    Ok(Query::new(atom))
}

/// Deterministic rendering: rules in order, then facts in order, one clause
/// per line. Reparsing yields a structurally identical program.
pub fn render_program(program: &Program) -> String {
    let mut out = String::new();
    for rule in &program.rules {
        out.push_str(&rule.to_string());
        out.push('\n');
    }
    for fact in &program.facts {
        out.push_str(&fact.to_string());
        out.push_str(".\n");
    }
    out
}

fn valid_constant(cell: &str) -> bool {
    !cell.is_empty()
        && (cell.chars().all(|c| c.is_ascii_digit())
            || (cell.chars().next().is_some_and(|c| c.is_ascii_lowercase())
                && cell.chars().all(is_ident_char)))
}

/// Parse the body of a `.facts` file: one tuple per line, tab-separated
/// constants. Every line must have the same width.
pub fn parse_facts_text(predicate: &str, text: &str) -> Result<Vec<Fact>, ParseError> {
    let mut facts = Vec::new();
    let mut arity: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let span = SourceSpan::point(i as u32 + 1, 1);
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
        for cell in &cells {
            if !valid_constant(cell) {
                return err(span, format!("invalid constant `{cell}`"));
            }
        }
        match arity {
            None => arity = Some(cells.len()),
            Some(a) if a != cells.len() => {
                return err(
                    span,
                    format!("expected {} columns, found {}", a, cells.len()),
                )
            }
            Some(_) => {}
        }
        facts.push(Fact::from_values(predicate, cells));
    }
    Ok(facts)
}

/// Error loading `.facts` files from a directory.
#[derive(Debug)]
pub enum FactFileError {
    Io { path: PathBuf, error: std::io::Error },
    Parse { path: PathBuf, error: ParseError },
}

impl fmt::Display for FactFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactFileError::Io { path, error } => write!(f, "{}: {error}", path.display()),
            FactFileError::Parse { path, error } => write!(f, "{}: {error}", path.display()),
        }
    }
}

impl std::error::Error for FactFileError {}

/// Load every `<predicate>.facts` file in `dir`, in filename order.
pub fn load_facts_dir(dir: &Path) -> Result<Vec<Fact>, FactFileError> {
    let entries = std::fs::read_dir(dir).map_err(|error| FactFileError::Io {
        path: dir.to_owned(),
        error,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "facts"))
        .collect();
    paths.sort();
    let mut facts = Vec::new();
    for path in paths {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned();
        let text = std::fs::read_to_string(&path).map_err(|error| FactFileError::Io {
            path: path.clone(),
            error,
        })?;
        facts.extend(
            parse_facts_text(&stem, &text)
                .map_err(|error| FactFileError::Parse { path, error })?,
        );
    }
    Ok(facts)
}
