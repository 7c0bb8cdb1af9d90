//! arXiv search-query grammar.
//!
//! ```text
//! query   := or
//! or      := and ("OR" and)*
//! and     := unary (("AND" | "ANDNOT") unary)*
//! unary   := "(" or ")" | field ":" (atom | "(" or ")") | atom
//! atom    := word | "\"" phrase "\""
//! field   := "ti" | "abs" | "all"
//! ```
//!
//! Operators are upper case and left-associative; `OR` binds loosest. Explicit
//! parentheses are kept in the tree so the canonical form round-trips.

use std::fmt;

use super::SearchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Title,
    Abstract,
    All,
}

impl Field {
    pub fn prefix(self) -> &'static str {
        match self {
            Field::Title => "ti",
            Field::Abstract => "abs",
            Field::All => "all",
        }
    }

    fn parse(s: &str) -> Option<Field> {
        match s {
            "ti" => Some(Field::Title),
            "abs" => Some(Field::Abstract),
            "all" => Some(Field::All),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    AndNot,
}

impl BoolOp {
    fn keyword(self) -> &'static str {
        match self {
            BoolOp::And => "AND",
            BoolOp::Or => "OR",
            BoolOp::AndNot => "ANDNOT",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BoolOp::Or => 1,
            BoolOp::And | BoolOp::AndNot => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryNode {
    Term { field: Option<Field>, text: String, quoted: bool },
    FieldGroup { field: Field, inner: Box<QueryNode> },
    Group(Box<QueryNode>),
    Binary { op: BoolOp, lhs: Box<QueryNode>, rhs: Box<QueryNode> },
}

impl QueryNode {
    pub fn term(field: Field, text: &str) -> Self {
        QueryNode::Term { field: Some(field), text: text.to_string(), quoted: true }
    }

    pub fn binary(op: BoolOp, lhs: QueryNode, rhs: QueryNode) -> Self {
        QueryNode::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    /// Every term in left-to-right order.
    pub fn terms(&self) -> Vec<(&str, Option<Field>)> {
        let mut out = Vec::new();
        self.collect_terms(None, &mut out);
        out
    }

    fn collect_terms<'a>(&'a self, outer: Option<Field>, out: &mut Vec<(&'a str, Option<Field>)>) {
        match self {
            QueryNode::Term { field, text, .. } => out.push((text, field.or(outer))),
            QueryNode::FieldGroup { field, inner } => inner.collect_terms(Some(*field), out),
            QueryNode::Group(inner) => inner.collect_terms(outer, out),
            QueryNode::Binary { lhs, rhs, .. } => {
                lhs.collect_terms(outer, out);
                rhs.collect_terms(outer, out);
            }
        }
    }
}

impl fmt::Display for QueryNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryNode::Term { field, text, quoted } => {
                if let Some(fl) = field {
                    write!(f, "{}:", fl.prefix())?;
                }
                if *quoted {
                    write!(f, "\"{text}\"")
                } else {
                    f.write_str(text)
                }
            }
            QueryNode::FieldGroup { field, inner } => write!(f, "{}:({inner})", field.prefix()),
            QueryNode::Group(inner) => write!(f, "({inner})"),
            QueryNode::Binary { op, lhs, rhs } => {
                // hand-built trees may need parentheses the parser would have kept
                let wrap = |n: &QueryNode, right: bool| match n {
                    QueryNode::Binary { op: inner, .. } => {
                        inner.precedence() < op.precedence() || (right && inner.precedence() == op.precedence())
                    }
                    _ => false,
                };
                if wrap(lhs, false) {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.keyword())?;
                if wrap(rhs, true) {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Op(BoolOp),
    Field(Field),
    Word(String),
    Phrase(String),
}

fn malformed(position: usize, reason: impl Into<String>) -> SearchError {
    SearchError::MalformedQuery { position, reason: reason.into() }
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, SearchError> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push((pos, Tok::Open));
            }
            ')' => {
                chars.next();
                out.push((pos, Tok::Close));
            }
            '"' => {
                chars.next();
                let mut text = String::new();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == '"' {
                        closed = true;
                        break;
                    }
                    text.push(c);
                }
                if !closed {
                    return Err(malformed(pos, "unbalanced quote"));
                }
                let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
                if text.is_empty() {
                    return Err(malformed(pos, "empty phrase"));
                }
                out.push((pos, Tok::Phrase(text)));
            }
            _ => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"') {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                if let Some((name, rest)) = word.split_once(':') {
                    if !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphabetic()) {
                        let field = Field::parse(name).ok_or_else(|| malformed(pos, format!("unknown field {name:?}")))?;
                        out.push((pos, Tok::Field(field)));
                        if !rest.is_empty() {
                            out.push((pos + name.len() + 1, Tok::Word(rest.to_string())));
                        }
                        continue;
                    }
                }
                let tok = match word.as_str() {
                    "AND" => Tok::Op(BoolOp::And),
                    "OR" => Tok::Op(BoolOp::Or),
                    "ANDNOT" => Tok::Op(BoolOp::AndNot),
                    _ => Tok::Word(word),
                };
                out.push((pos, tok));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn or(&mut self) -> Result<QueryNode, SearchError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Op(BoolOp::Or)) {
            self.i += 1;
            let rhs = self.and()?;
            lhs = QueryNode::binary(BoolOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<QueryNode, SearchError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ (BoolOp::And | BoolOp::AndNot))) = self.peek() {
            let op = *op;
            self.i += 1;
            let rhs = self.unary()?;
            lhs = QueryNode::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn group(&mut self) -> Result<QueryNode, SearchError> {
        let open = self.pos();
        self.i += 1;
        let inner = self.or()?;
        match self.peek() {
            Some(Tok::Close) => {
                self.i += 1;
                Ok(inner)
            }
            _ => Err(malformed(open, "unbalanced parenthesis")),
        }
    }

    fn unary(&mut self) -> Result<QueryNode, SearchError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Open) => Ok(QueryNode::Group(Box::new(self.group()?))),
            Some(Tok::Field(field)) => {
                self.i += 1;
                match self.peek().cloned() {
                    Some(Tok::Open) => Ok(QueryNode::FieldGroup { field, inner: Box::new(self.group()?) }),
                    Some(Tok::Word(w)) => {
                        self.i += 1;
                        Ok(QueryNode::Term { field: Some(field), text: w, quoted: false })
                    }
                    Some(Tok::Phrase(p)) => {
                        self.i += 1;
                        Ok(QueryNode::Term { field: Some(field), text: p, quoted: true })
                    }
                    _ => Err(malformed(self.pos(), format!("expected a term after {}:", field.prefix()))),
                }
            }
            Some(Tok::Word(w)) => {
                self.i += 1;
                Ok(QueryNode::Term { field: None, text: w, quoted: false })
            }
            Some(Tok::Phrase(p)) => {
                self.i += 1;
                Ok(QueryNode::Term { field: None, text: p, quoted: true })
            }
            Some(Tok::Op(op)) => Err(malformed(pos, format!("unexpected operator {}", op.keyword()))),
            Some(Tok::Close) => Err(malformed(pos, "unbalanced parenthesis")),
            None => Err(malformed(pos, "unexpected end of query")),
        }
    }
}

/// Parses a query into its tree. `to_string()` on the result gives the
/// canonical form.
pub fn parse_arxiv_query(input: &str) -> Result<QueryNode, SearchError> {
    let toks = lex(input)?;
    if toks.is_empty() {
        return Err(malformed(0, "empty query"));
    }
    let mut p = Parser { toks, i: 0, end: input.len() };
    let node = p.or()?;
    if p.i < p.toks.len() {
        let reason = match p.peek() {
            Some(Tok::Close) => "unbalanced parenthesis",
            _ => "missing operator between terms",
        };
        return Err(malformed(p.pos(), reason));
    }
    Ok(node)
}
