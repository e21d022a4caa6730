use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{is_action_name, is_variable_name, Action, Equation, RecSpec, Term};

/// A parsed document: declared alphabet plus named specs, terms and
/// equations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub alphabet: BTreeSet<Action>,
    pub specs: BTreeMap<String, RecSpec>,
    pub terms: BTreeMap<String, Term>,
    pub equations: BTreeMap<String, Equation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared action `{0}`")]
    UndeclaredAction(String),
    #[error("binder `{0}` is not a variable of its specification")]
    BinderNotInSpec(String),
    #[error("variable `{0}` is bound twice in one specification")]
    DuplicateBinding(String),
    #[error("`{0}` is declared twice")]
    DuplicateName(String),
    #[error("`{0}` is not a valid action name (actions start with a lowercase letter)")]
    InvalidActionName(String),
    #[error("`{0}` is not a variable (variables start with an uppercase letter or `_`)")]
    ExpectedVariable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &str = ";,=+.()<>|{}:";
const KEYWORDS: [&str; 5] = ["actions", "term", "spec", "eq", "delta"];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
        } else if c.is_whitespace() {
            chars.next();
            column += 1;
        } else if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
        } else if SYMBOLS.contains(c) {
            chars.next();
            column += 1;
            out.push(Token { tok: Tok::Sym(c), line: l, column: col });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    name.push(c);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(name), line: l, column: col });
        } else {
            return Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
            });
        }
    }
    out.push(Token { tok: Tok::Eof, line, column });
    Ok(out)
}

/// Parses a document in the `actions` / `term` / `spec` / `eq` grammar.
///
/// Actions may be used before their declaration: all `actions` declarations
/// are collected first.
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        alphabet: declared_actions(&tokens)?,
        tokens,
        pos: 0,
    };
    parser.document()
}

/// Parses a single term against the given alphabet.
pub fn parse_term(text: &str, alphabet: &BTreeSet<Action>) -> Result<Term, ParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
        alphabet: alphabet.clone(),
    };
    let t = parser.term()?;
    parser.expect_eof()?;
    Ok(t)
}

// Pre-scan for `actions a, b;` declarations at statement starts.
fn declared_actions(tokens: &[Token]) -> Result<BTreeSet<Action>, ParseError> {
    let mut alphabet = BTreeSet::new();
    let mut at_start = true;
    let mut i = 0;
    while i < tokens.len() {
        match &tokens[i].tok {
            Tok::Ident(kw) if at_start && kw == "actions" => {
                i += 1;
                while let Some(Token { tok: Tok::Ident(name), line, column }) = tokens.get(i) {
                    if !is_action_name(name) || KEYWORDS.contains(&name.as_str()) {
                        return Err(ParseError {
                            line: *line,
                            column: *column,
                            kind: ParseErrorKind::InvalidActionName(name.clone()),
                        });
                    }
                    alphabet.insert(Action::new(name.as_str()));
                    i += 1;
                    if tokens.get(i).map(|t| &t.tok) == Some(&Tok::Sym(',')) {
                        i += 1;
                    } else {
                        break;
                    }
                }
                at_start = false;
            }
            Tok::Sym(';') => {
                at_start = true;
                i += 1;
            }
            _ => {
                at_start = false;
                i += 1;
            }
        }
    }
    Ok(alphabet)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    alphabet: BTreeSet<Action>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, tok: &Token, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: tok.line,
            column: tok.column,
            kind,
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let tok = self.peek();
        self.error_at(tok, ParseErrorKind::Syntax(format!("expected {what}, found {}", tok.tok)))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        match &self.peek().tok {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let name = name.clone();
                Ok((name, self.bump()))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn variable(&mut self) -> Result<String, ParseError> {
        let (name, tok) = self.ident("a variable")?;
        if is_variable_name(&name) {
            Ok(name)
        } else {
            Err(self.error_at(&tok, ParseErrorKind::ExpectedVariable(name)))
        }
    }

    fn document(&mut self) -> Result<Document, ParseError> {
        let mut doc = Document {
            alphabet: self.alphabet.clone(),
            ..Document::default()
        };
        while self.peek().tok != Tok::Eof {
            let kw = match &self.peek().tok {
                Tok::Ident(kw) => kw.clone(),
                _ => return Err(self.unexpected("a declaration")),
            };
            match kw.as_str() {
                "actions" => {
                    // already collected by the pre-scan
                    self.bump();
                    self.ident("an action name")?;
                    while self.eat(',') {
                        self.ident("an action name")?;
                    }
                }
                "term" => {
                    self.bump();
                    let (name, tok) = self.ident("a term name")?;
                    self.expect('=')?;
                    let t = self.term()?;
                    if doc.terms.insert(name.clone(), t).is_some() {
                        return Err(self.error_at(&tok, ParseErrorKind::DuplicateName(name)));
                    }
                }
                "spec" => {
                    self.bump();
                    let (name, tok) = self.ident("a spec name")?;
                    self.expect('{')?;
                    let spec = self.bindings('}')?;
                    if doc.specs.insert(name.clone(), spec).is_some() {
                        return Err(self.error_at(&tok, ParseErrorKind::DuplicateName(name)));
                    }
                }
                "eq" => {
                    self.bump();
                    let (name, tok) = self.ident("an equation name")?;
                    self.expect(':')?;
                    let lhs = self.term()?;
                    self.expect('=')?;
                    let rhs = self.term()?;
                    if doc.equations.insert(name.clone(), Equation { lhs, rhs }).is_some() {
                        return Err(self.error_at(&tok, ParseErrorKind::DuplicateName(name)));
                    }
                }
                _ => return Err(self.unexpected("`actions`, `term`, `spec` or `eq`")),
            }
            self.expect(';')?;
        }
        Ok(doc)
    }

    // `X = t, Y = u` up to the closing delimiter; a trailing comma is allowed.
    fn bindings(&mut self, close: char) -> Result<RecSpec, ParseError> {
        let mut bindings = BTreeMap::new();
        loop {
            let start = self.peek().clone();
            let x = self.variable()?;
            self.expect('=')?;
            let body = self.term()?;
            if bindings.insert(x.clone(), body).is_some() {
                return Err(self.error_at(&start, ParseErrorKind::DuplicateBinding(x)));
            }
            if self.eat(close) {
                break;
            }
            self.expect(',')?;
            if self.eat(close) {
                break;
            }
        }
        Ok(RecSpec { bindings })
    }

    pub(super) fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.product()?;
        while self.eat('+') {
            t = Term::sum(t, self.product()?);
        }
        Ok(t)
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while self.eat('.') {
            t = Term::seq(t, self.atom()?);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let tok = self.peek().clone();
        match &tok.tok {
            Tok::Sym('(') => {
                self.bump();
                let t = self.term()?;
                self.expect(')')?;
                Ok(t)
            }
            Tok::Sym('<') => {
                self.bump();
                let binder_tok = self.peek().clone();
                let x = self.variable()?;
                self.expect('|')?;
                let spec = self.bindings('>')?;
                if !spec.contains(&x) {
                    return Err(self.error_at(&binder_tok, ParseErrorKind::BinderNotInSpec(x)));
                }
                Ok(Term::Rec(x, spec))
            }
            Tok::Ident(name) if name == "delta" => {
                self.bump();
                Ok(Term::Deadlock)
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let name = name.clone();
                self.bump();
                if is_variable_name(&name) {
                    Ok(Term::Var(name))
                } else if self.alphabet.contains(&Action::new(name.as_str())) {
                    Ok(Term::Act(Action::new(name)))
                } else {
                    Err(self.error_at(&tok, ParseErrorKind::UndeclaredAction(name)))
                }
            }
            _ => Err(self.unexpected("a term")),
        }
    }
}
