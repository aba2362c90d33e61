//! Line-oriented text formats for knowledge bases and finite interpretations.
//!
//! Knowledge base:
//!
//! ```text
//! abox:
//!   (a : A) = 0.5
//!   ((a, b) : R) >= 1/2
//! tbox:
//!   Top sub exists R . Top
//!   (Inn sub Hotel) >= 0.5
//!   A == forall R . A and forall R . A
//! ```
//!
//! Interpretation:
//!
//! ```text
//! domain: e1 e2
//! individuals:
//!   a = e1
//! concept A:
//!   default = 0
//!   e1 = 1/2
//! role R:
//!   (e1, e2) = 1
//! ```
//!
//! `#` starts a comment. Degrees are `p/q` or decimals and are always exact.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::degrees::{Degree, DegreeError};
use crate::semantics::FiniteInterpretation;
use crate::syntax::{expand_shorthands, Axiom, Concept, KnowledgeBase, Relation, Statement, TboxAxiom};

const MAX_NESTING: usize = 256;
const KEYWORDS: [&str; 8] = ["Top", "Bot", "not", "and", "or", "forall", "exists", "sub"];

/// 1-based position of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("invalid character `{0}`")]
    InvalidCharacter(char),
    #[error("unexpected `{0}`")]
    UnexpectedToken(String),
    #[error("unexpected end of line")]
    UnexpectedEnd,
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error("role upper bounds not in the language: only ((a, b) : R) >= d is allowed")]
    RoleUpperBound,
    #[error("inclusions only take lower bounds: (C sub D) >= d")]
    InclusionUpperBound,
    #[error("statement outside of a section")]
    OutsideSection,
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("`{0}` is a keyword and cannot be used as a name")]
    KeywordAsName(String),
    #[error("nesting deeper than {MAX_NESTING}")]
    TooDeep,
    #[error("domain must be nonempty")]
    EmptyDomain,
    #[error("duplicate domain element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("domain declared twice")]
    DuplicateDomain,
    #[error("`{0}` is assigned twice")]
    DuplicateEntry(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Number(String),
    LParen,
    RParen,
    Colon,
    Comma,
    Dot,
    Geq,
    Leq,
    Eq,
    EqEq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(s) | Tok::Number(s) => f.write_str(s),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Colon => f.write_str(":"),
            Tok::Comma => f.write_str(","),
            Tok::Dot => f.write_str("."),
            Tok::Geq => f.write_str(">="),
            Tok::Leq => f.write_str("<="),
            Tok::Eq => f.write_str("="),
            Tok::EqEq => f.write_str("=="),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn err(span: SourceSpan, kind: ParseErrorKind) -> ParseError {
    ParseError { span, kind, expected: vec![] }
}

fn lex_line(line_no: usize, line: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let span = |len: usize| SourceSpan { line: line_no, column: start + 1, length: len };
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            Tok::Name(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/') {
                i += 1;
            }
            Tok::Number(chars[start..i].iter().collect())
        } else {
            let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let (tok, len) = match (c, two.as_str()) {
                (_, ">=") => (Tok::Geq, 2),
                (_, "<=") => (Tok::Leq, 2),
                (_, "==") => (Tok::EqEq, 2),
                ('=', _) => (Tok::Eq, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (':', _) => (Tok::Colon, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                _ => return Err(err(span(1), ParseErrorKind::InvalidCharacter(c))),
            };
            i += len;
            tok
        };
        out.push(Token { tok, span: span(i - start) });
    }
    Ok(out)
}

/// Cursor over the tokens of one line.
struct Cursor<'t> {
    toks: &'t [Token],
    pos: usize,
    line: usize,
    line_len: usize,
}

impl<'t> Cursor<'t> {
    fn new(toks: &'t [Token], line: usize, line_len: usize) -> Self {
        Cursor { toks, pos: 0, line, line_len }
    }

    fn peek(&self) -> Option<&'t Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn span(&self) -> SourceSpan {
        match self.toks.get(self.pos) {
            Some(t) => t.span,
            None => SourceSpan { line: self.line, column: self.line_len + 1, length: 0 },
        }
    }

    fn fail(&self, expected: &[&str]) -> ParseError {
        let kind = match self.peek() {
            Some(t) => ParseErrorKind::UnexpectedToken(t.to_string()),
            None => ParseErrorKind::UnexpectedEnd,
        };
        ParseError { span: self.span(), kind, expected: expected.iter().map(|s| s.to_string()).collect() }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(&[&format!("`{tok}`")]))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Name(n)) if n == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Name(n)) if KEYWORDS.contains(&n.as_str()) => {
                Err(err(self.span(), ParseErrorKind::KeywordAsName(n.clone())))
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(n.clone())
            }
            _ => Err(self.fail(&[what])),
        }
    }

    fn degree(&mut self) -> Result<Degree, ParseError> {
        match self.peek() {
            Some(Tok::Number(text)) => {
                let span = self.span();
                let d = text.parse::<Degree>().map_err(|e| err(span, e.into()))?;
                self.pos += 1;
                Ok(d)
            }
            _ => Err(self.fail(&["degree"])),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.fail(&["end of line"]))
        }
    }

    // concept := and ("or" concept)?
    fn concept(&mut self, depth: usize) -> Result<Concept, ParseError> {
        let left = self.conjunction(depth)?;
        if self.eat_keyword("or") {
            let right = self.concept(depth + 1)?;
            return Ok(Concept::or(left, right));
        }
        Ok(left)
    }

    // and := unary ("and" and)?
    fn conjunction(&mut self, depth: usize) -> Result<Concept, ParseError> {
        let left = self.unary(depth)?;
        if self.eat_keyword("and") {
            let right = self.conjunction(depth + 1)?;
            return Ok(Concept::and(left, right));
        }
        Ok(left)
    }

    fn unary(&mut self, depth: usize) -> Result<Concept, ParseError> {
        if depth > MAX_NESTING {
            return Err(err(self.span(), ParseErrorKind::TooDeep));
        }
        match self.peek() {
            Some(Tok::Name(n)) => match n.as_str() {
                "Top" => {
                    self.pos += 1;
                    Ok(Concept::Top)
                }
                "Bot" => {
                    self.pos += 1;
                    Ok(Concept::Bottom)
                }
                "not" => {
                    self.pos += 1;
                    Ok(Concept::not(self.unary(depth + 1)?))
                }
                "forall" | "exists" => {
                    let universal = n == "forall";
                    self.pos += 1;
                    let role = self.name("role name")?;
                    self.expect(Tok::Dot)?;
                    let body = self.unary(depth + 1)?;
                    Ok(if universal { Concept::forall(role, body) } else { Concept::exists(role, body) })
                }
                _ => Ok(Concept::Atomic(self.name("concept")?)),
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let c = self.concept(depth + 1)?;
                self.expect(Tok::RParen)?;
                Ok(c)
            }
            _ => Err(self.fail(&["concept"])),
        }
    }
}

/// Splits text into non-empty token lines.
fn token_lines(text: &str) -> Result<Vec<(usize, usize, Vec<Token>)>, ParseError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let toks = lex_line(idx + 1, line)?;
        if !toks.is_empty() {
            out.push((idx + 1, line.chars().count(), toks));
        }
    }
    Ok(out)
}

fn section_header(toks: &[Token]) -> Option<Vec<&str>> {
    let (last, init) = toks.split_last()?;
    if last.tok != Tok::Colon || init.is_empty() {
        return None;
    }
    init.iter()
        .map(|t| match &t.tok {
            Tok::Name(n) => Some(n.as_str()),
            _ => None,
        })
        .collect()
}

/// Parses a single concept expression.
pub fn parse_concept(text: &str) -> Result<Concept, ParseError> {
    let toks = lex_line(1, text)?;
    let mut cur = Cursor::new(&toks, 1, text.chars().count());
    let c = cur.concept(0)?;
    cur.finish()?;
    Ok(c)
}

fn relation(cur: &mut Cursor) -> Result<Option<Relation>, ParseError> {
    let rel = match cur.peek() {
        Some(Tok::Geq) => Relation::Geq,
        Some(Tok::Leq) => Relation::Leq,
        Some(Tok::Eq) => Relation::Eq,
        None => return Ok(None),
        _ => return Err(cur.fail(&["`>=`", "`<=`", "`=`", "end of line"])),
    };
    cur.pos += 1;
    Ok(Some(rel))
}

fn parse_assertion(cur: &mut Cursor) -> Result<Statement, ParseError> {
    cur.expect(Tok::LParen)?;
    if cur.peek() == Some(&Tok::LParen) {
        cur.pos += 1;
        let subject = cur.name("individual")?;
        cur.expect(Tok::Comma)?;
        let object = cur.name("individual")?;
        cur.expect(Tok::RParen)?;
        cur.expect(Tok::Colon)?;
        let role = cur.name("role name")?;
        cur.expect(Tok::RParen)?;
        let span = cur.span();
        let degree = match relation(cur)? {
            None => Degree::one(),
            Some(Relation::Geq) => cur.degree()?,
            Some(_) => return Err(err(span, ParseErrorKind::RoleUpperBound)),
        };
        cur.finish()?;
        return Ok(Statement::RoleAssertion { subject, object, role, degree });
    }
    let individual = cur.name("individual")?;
    cur.expect(Tok::Colon)?;
    let concept = cur.concept(0)?;
    cur.expect(Tok::RParen)?;
    let (relation, degree) = match relation(cur)? {
        None => (Relation::Geq, Degree::one()),
        Some(rel) => (rel, cur.degree()?),
    };
    cur.finish()?;
    Ok(Statement::Assertion { individual, concept, relation, degree })
}

fn top_level_position(toks: &[Token], pred: impl Fn(&Tok) -> bool) -> Option<usize> {
    let mut depth = 0usize;
    for (i, t) in toks.iter().enumerate() {
        match &t.tok {
            Tok::LParen => depth += 1,
            Tok::RParen => depth = depth.saturating_sub(1),
            tok if depth == 0 && pred(tok) => return Some(i),
            _ => {}
        }
    }
    None
}

fn is_sub(t: &Tok) -> bool {
    matches!(t, Tok::Name(n) if n == "sub")
}

fn parse_tbox_line(toks: &[Token], line: usize, len: usize) -> Result<Statement, ParseError> {
    let whole = |slice: &[Token]| -> Result<Concept, ParseError> {
        let mut cur = Cursor::new(slice, line, len);
        let c = cur.concept(0)?;
        cur.finish()?;
        Ok(c)
    };
    if let Some(k) = top_level_position(toks, |t| is_sub(t) || *t == Tok::EqEq) {
        if k == 0 {
            return Err(Cursor::new(toks, line, len).fail(&["concept"]));
        }
        let left = whole(&toks[..k])?;
        let right_toks = &toks[k + 1..];
        if right_toks.is_empty() {
            let cur = Cursor { toks, pos: toks.len(), line, line_len: len };
            return Err(cur.fail(&["concept"]));
        }
        let right = whole(right_toks)?;
        return Ok(match toks[k].tok {
            Tok::EqEq => Statement::Equivalence { left, right },
            _ => Statement::Inclusion { sub: left, sup: right, degree: Degree::one() },
        });
    }
    // (C sub D) [>= d]
    let mut cur = Cursor::new(toks, line, len);
    cur.expect(Tok::LParen)?;
    let sub = cur.concept(0)?;
    if !cur.eat_keyword("sub") {
        return Err(cur.fail(&["`sub`", "`==`"]));
    }
    let sup = cur.concept(0)?;
    cur.expect(Tok::RParen)?;
    let span = cur.span();
    let degree = match relation(&mut cur)? {
        None => Degree::one(),
        Some(Relation::Geq) => cur.degree()?,
        Some(_) => return Err(err(span, ParseErrorKind::InclusionUpperBound)),
    };
    cur.finish()?;
    Ok(Statement::Inclusion { sub, sup, degree })
}

/// Parses the surface statements of a knowledge base file.
pub fn parse_statements(text: &str) -> Result<Vec<Statement>, ParseError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Abox,
        Tbox,
    }
    let mut section = Section::None;
    let mut out = Vec::new();
    for (line, len, toks) in token_lines(text)? {
        if let Some(words) = section_header(&toks) {
            section = match words.as_slice() {
                ["abox"] => Section::Abox,
                ["tbox"] => Section::Tbox,
                _ => {
                    return Err(err(toks[0].span, ParseErrorKind::UnknownSection(words.join(" "))));
                }
            };
            continue;
        }
        match section {
            Section::None => return Err(err(toks[0].span, ParseErrorKind::OutsideSection)),
            Section::Abox => out.push(parse_assertion(&mut Cursor::new(&toks, line, len))?),
            Section::Tbox => out.push(parse_tbox_line(&toks, line, len)?),
        }
    }
    Ok(out)
}

/// Parses a knowledge base and expands the abbreviations.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseError> {
    Ok(expand_shorthands(parse_statements(text)?))
}

pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::from("abox:\n");
    for ax in &kb.abox {
        let line = match ax {
            Axiom::ConceptGeq { individual, concept, degree } => {
                format!("({individual} : {}) >= {degree}", concept.to_ascii())
            }
            Axiom::ConceptLeq { individual, concept, degree } => {
                format!("({individual} : {}) <= {degree}", concept.to_ascii())
            }
            Axiom::RoleGeq { subject, object, role, degree } => {
                format!("(({subject}, {object}) : {role}) >= {degree}")
            }
            Axiom::GciGeq { .. } => unreachable!("GCI in ABox"),
        };
        out.push_str("  ");
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("tbox:\n");
    for ax in &kb.tbox {
        let line = match ax {
            TboxAxiom::Inclusion { sub, sup, degree } => {
                format!("({} sub {}) >= {degree}", sub.to_ascii(), sup.to_ascii())
            }
            TboxAxiom::Equivalence { left, right } => {
                format!("{} == {}", left.to_ascii(), right.to_ascii())
            }
        };
        out.push_str("  ");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn parse_interpretation(text: &str) -> Result<FiniteInterpretation, ParseError> {
    enum Section {
        None,
        Domain,
        Individuals,
        Concept(String),
        Role(String),
    }
    struct Map {
        default: Option<Degree>,
        entries: BTreeMap<usize, Degree>,
    }
    let mut section = Section::None;
    let mut domain: Vec<String> = Vec::new();
    let mut domain_span: Option<SourceSpan> = None;
    let mut individuals: BTreeMap<String, usize> = BTreeMap::new();
    let mut concepts: BTreeMap<String, Map> = BTreeMap::new();
    let mut roles: BTreeMap<String, Map> = BTreeMap::new();
    let n_of = |domain: &Vec<String>| domain.len();

    for (line, len, toks) in token_lines(text)? {
        let element = |cur: &mut Cursor, domain: &Vec<String>| -> Result<usize, ParseError> {
            let span = cur.span();
            let name = cur.name("element")?;
            domain
                .iter()
                .position(|e| *e == name)
                .ok_or_else(|| err(span, ParseErrorKind::UnknownElement(name)))
        };
        let header = section_header(&toks);
        // `domain: a b c` carries its elements on the header line.
        let domain_inline = matches!(toks.first(), Some(Token { tok: Tok::Name(n), .. }) if n == "domain")
            && toks.get(1).map(|t| &t.tok) == Some(&Tok::Colon);
        if domain_inline {
            if domain_span.is_some() {
                return Err(err(toks[0].span, ParseErrorKind::DuplicateDomain));
            }
            domain_span = Some(toks[0].span);
            section = Section::Domain;
            let mut cur = Cursor::new(&toks[2..], line, len);
            parse_domain_names(&mut cur, &mut domain)?;
            continue;
        }
        if let Some(words) = header {
            section = match words.as_slice() {
                ["individuals"] => Section::Individuals,
                ["concept", name] | ["role", name] => {
                    if KEYWORDS.contains(name) {
                        return Err(err(toks[1].span, ParseErrorKind::KeywordAsName(name.to_string())));
                    }
                    let (map, name) = if words[0] == "concept" {
                        (&mut concepts, name.to_string())
                    } else {
                        (&mut roles, name.to_string())
                    };
                    if map.contains_key(&name) {
                        return Err(err(toks[1].span, ParseErrorKind::DuplicateEntry(name)));
                    }
                    map.insert(name.clone(), Map { default: None, entries: BTreeMap::new() });
                    if words[0] == "concept" {
                        Section::Concept(name)
                    } else {
                        Section::Role(name)
                    }
                }
                _ => return Err(err(toks[0].span, ParseErrorKind::UnknownSection(words.join(" ")))),
            };
            continue;
        }
        let mut cur = Cursor::new(&toks, line, len);
        match &section {
            Section::None => return Err(err(toks[0].span, ParseErrorKind::OutsideSection)),
            Section::Domain => parse_domain_names(&mut cur, &mut domain)?,
            Section::Individuals => {
                let span = cur.span();
                let ind = cur.name("individual")?;
                cur.expect(Tok::Eq)?;
                let x = element(&mut cur, &domain)?;
                cur.finish()?;
                if individuals.insert(ind.clone(), x).is_some() {
                    return Err(err(span, ParseErrorKind::DuplicateEntry(ind)));
                }
            }
            Section::Concept(name) | Section::Role(name) => {
                let is_role = matches!(section, Section::Role(_));
                let span = cur.span();
                let map = if is_role { roles.get_mut(name) } else { concepts.get_mut(name) }.expect("declared");
                if cur.eat_keyword("default") {
                    cur.expect(Tok::Eq)?;
                    let d = cur.degree()?;
                    cur.finish()?;
                    if map.default.replace(d).is_some() {
                        return Err(err(span, ParseErrorKind::DuplicateEntry("default".into())));
                    }
                    continue;
                }
                let (key, label) = if is_role {
                    cur.expect(Tok::LParen)?;
                    let x = element(&mut cur, &domain)?;
                    cur.expect(Tok::Comma)?;
                    let y = element(&mut cur, &domain)?;
                    cur.expect(Tok::RParen)?;
                    (x * n_of(&domain) + y, format!("({}, {})", domain[x], domain[y]))
                } else {
                    let x = element(&mut cur, &domain)?;
                    (x, domain[x].clone())
                };
                cur.expect(Tok::Eq)?;
                let d = cur.degree()?;
                cur.finish()?;
                if map.entries.insert(key, d).is_some() {
                    return Err(err(span, ParseErrorKind::DuplicateEntry(label)));
                }
            }
        }
    }

    let empty_span = domain_span.unwrap_or(SourceSpan { line: 1, column: 1, length: 0 });
    let mut interp = FiniteInterpretation::new(domain.clone())
        .map_err(|_| err(empty_span, ParseErrorKind::EmptyDomain))?;
    for (ind, x) in individuals {
        interp.assign(ind, x);
    }
    for (name, map) in concepts {
        let values = interp.declare_concept(name, map.default.unwrap_or_else(Degree::zero));
        for (k, d) in map.entries {
            values[k] = d;
        }
    }
    for (name, map) in roles {
        let values = interp.declare_role(name, map.default.unwrap_or_else(Degree::zero));
        for (k, d) in map.entries {
            values[k] = d;
        }
    }
    Ok(interp)
}

fn parse_domain_names(cur: &mut Cursor, domain: &mut Vec<String>) -> Result<(), ParseError> {
    while !cur.at_end() {
        let span = cur.span();
        let name = cur.name("element")?;
        if domain.contains(&name) {
            return Err(err(span, ParseErrorKind::DuplicateElement(name)));
        }
        domain.push(name);
        if cur.peek() == Some(&Tok::Comma) {
            cur.pos += 1;
        }
    }
    Ok(())
}

/// Canonical form: maps in name order, nonzero entries in domain order.
pub fn serialize_interpretation(i: &FiniteInterpretation) -> String {
    let mut out = format!("domain: {}\n", i.domain().join(" "));
    out.push_str("individuals:\n");
    for (ind, x) in i.individuals() {
        out.push_str(&format!("  {ind} = {}\n", i.element_name(*x)));
    }
    for (name, values) in i.concept_maps() {
        out.push_str(&format!("concept {name}:\n"));
        for (x, d) in values.iter().enumerate().filter(|(_, d)| !d.is_zero()) {
            out.push_str(&format!("  {} = {d}\n", i.element_name(x)));
        }
    }
    let n = i.size();
    for (name, values) in i.role_maps() {
        out.push_str(&format!("role {name}:\n"));
        for (k, d) in values.iter().enumerate().filter(|(_, d)| !d.is_zero()) {
            out.push_str(&format!("  ({}, {}) = {d}\n", i.element_name(k / n), i.element_name(k % n)));
        }
    }
    out
}
