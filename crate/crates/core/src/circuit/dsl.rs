//! Line-oriented circuit description language.
//!
//! ```text
//! particle q
//! source q -> s
//! beamsplitter bs1 in s (transmit v, reflect w)
//! mirror m1 v -> v2 phase off
//! mirror m2 w -> w2 phase off
//! beamsplitter bs2 in v2 (transmit d, reflect c) in w2 (transmit c, reflect d)
//! detector C in c
//! detector D in d
//! interact x a b p_ann 1/2 -> gamma
//! blocker B in w
//! ```
//!
//! `#` starts a comment. A `source` line declares its particle implicitly
//! when no `particle` line names it.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::{CircuitGraph, Component, SplitterPort};
use crate::exact::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(char),
    UnknownDirective(String),
    DuplicateProducer(String),
    /// The directive's token sequence does not match its grammar.
    Arity { directive: String, expected: &'static str },
    BadRational(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {}", describe(.kind))]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Lexical(c) => format!("unexpected character {c:?}"),
        ParseErrorKind::UnknownDirective(d) => format!("unknown directive '{d}'"),
        ParseErrorKind::DuplicateProducer(p) => format!("duplicate producer for path '{p}'"),
        ParseErrorKind::Arity { directive, expected } => format!("malformed '{directive}', expected: {expected}"),
        ParseErrorKind::BadRational(t) => format!("'{t}' is not a rational (p/q or integer)"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Arrow,
    Open,
    Close,
    Comma,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '_' | '\'' | '/')
}

fn lex(line: &str) -> Result<Vec<Token>, char> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            ',' => {
                chars.next();
                tokens.push(Token::Comma);
            }
            c if is_word_char(c) => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_word_char(c) {
                        break;
                    }
                    chars.next();
                    if c == '-' && chars.peek() == Some(&'>') {
                        chars.next();
                        if !word.is_empty() {
                            tokens.push(Token::Word(std::mem::take(&mut word)));
                        }
                        tokens.push(Token::Arrow);
                        break;
                    }
                    word.push(c);
                }
                if !word.is_empty() {
                    tokens.push(Token::Word(word));
                }
            }
            other => return Err(other),
        }
    }
    Ok(tokens)
}

/// Cursor over one line's tokens.
struct Line<'a> {
    tokens: &'a [Token],
    pos: usize,
    directive: &'a str,
    expected: &'static str,
    number: usize,
}

impl<'a> Line<'a> {
    fn fail(&self) -> ParseError {
        ParseError {
            line: self.number,
            kind: ParseErrorKind::Arity { directive: self.directive.to_string(), expected: self.expected },
        }
    }

    fn word(&mut self) -> Result<String, ParseError> {
        match self.tokens.get(self.pos) {
            Some(Token::Word(w)) => {
                self.pos += 1;
                Ok(w.clone())
            }
            _ => Err(self.fail()),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.tokens.get(self.pos) {
            Some(Token::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.fail()),
        }
    }

    fn punct(&mut self, t: Token) -> Result<(), ParseError> {
        if self.tokens.get(self.pos) == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail())
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.tokens.len()
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.fail())
        }
    }

    fn port(&mut self) -> Result<SplitterPort, ParseError> {
        self.keyword("in")?;
        let input = self.word()?;
        self.punct(Token::Open)?;
        self.keyword("transmit")?;
        let transmit = self.word()?;
        self.punct(Token::Comma)?;
        self.keyword("reflect")?;
        let reflect = self.word()?;
        self.punct(Token::Close)?;
        Ok(SplitterPort { input, transmit, reflect })
    }
}

fn parse_rational(text: &str, line: usize) -> Result<Rational, ParseError> {
    let bad = || ParseError { line, kind: ParseErrorKind::BadRational(text.to_string()) };
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let n: num_bigint::BigInt = n.parse().map_err(|_| bad())?;
    let d: num_bigint::BigInt = d.parse().map_err(|_| bad())?;
    if d == 0.into() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Parses circuit text. Structural checks beyond producer uniqueness are
/// left to [`CircuitGraph::validate`].
pub fn parse(text: &str) -> Result<CircuitGraph, ParseError> {
    let mut particles: Vec<String> = Vec::new();
    let mut components = Vec::new();
    let mut produced: BTreeSet<String> = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let tokens = lex(raw).map_err(|c| ParseError { line: number, kind: ParseErrorKind::Lexical(c) })?;
        let Some(first) = tokens.first() else { continue };
        let Token::Word(directive) = first else {
            return Err(ParseError { line: number, kind: ParseErrorKind::UnknownDirective(format!("{first:?}")) });
        };
        let expected = match directive.as_str() {
            "particle" => "particle NAME",
            "source" => "source PARTICLE -> PATH",
            "beamsplitter" => "beamsplitter NAME in PATH (transmit PATH, reflect PATH) [in PATH (transmit PATH, reflect PATH)]",
            "mirror" => "mirror NAME PATH -> PATH [phase on|off]",
            "interact" => "interact NAME PATH PATH p_ann RATIONAL -> ABSORBER",
            "detector" => "detector NAME in PATH",
            "blocker" => "blocker NAME in PATH",
            other => {
                return Err(ParseError { line: number, kind: ParseErrorKind::UnknownDirective(other.to_string()) })
            }
        };
        let mut line = Line { tokens: &tokens[1..], pos: 0, directive, expected, number };

        let component = match directive.as_str() {
            "particle" => {
                let name = line.word()?;
                line.finish()?;
                if !particles.contains(&name) {
                    particles.push(name);
                }
                continue;
            }
            "source" => {
                let particle = line.word()?;
                line.punct(Token::Arrow)?;
                let out = line.word()?;
                line.finish()?;
                if !particles.contains(&particle) {
                    particles.push(particle.clone());
                }
                Component::Source { particle, out }
            }
            "beamsplitter" => {
                let name = line.word()?;
                let mut ports = vec![line.port()?];
                if !line.at_end() {
                    ports.push(line.port()?);
                }
                line.finish()?;
                Component::BeamSplitter { name, ports }
            }
            "mirror" => {
                let name = line.word()?;
                let input = line.word()?;
                line.punct(Token::Arrow)?;
                let output = line.word()?;
                let mut phase = true;
                if !line.at_end() {
                    line.keyword("phase")?;
                    phase = match line.word()?.as_str() {
                        "on" => true,
                        "off" => false,
                        _ => return Err(line.fail()),
                    };
                }
                line.finish()?;
                Component::Mirror { name, input, output, phase }
            }
            "interact" => {
                let name = line.word()?;
                let path_a = line.word()?;
                let path_b = line.word()?;
                line.keyword("p_ann")?;
                let p_ann = parse_rational(&line.word()?, number)?;
                line.punct(Token::Arrow)?;
                let absorber = line.word()?;
                line.finish()?;
                Component::Interaction { name, path_a, path_b, p_ann, absorber }
            }
            "detector" | "blocker" => {
                let name = line.word()?;
                line.keyword("in")?;
                let input = line.word()?;
                line.finish()?;
                if directive == "detector" {
                    Component::Detector { name, input }
                } else {
                    Component::Blocker { name, input }
                }
            }
            _ => unreachable!("directive checked above"),
        };

        for out in component.outputs() {
            if !produced.insert(out.to_string()) {
                return Err(ParseError { line: number, kind: ParseErrorKind::DuplicateProducer(out.to_string()) });
            }
        }
        components.push(component);
    }
    Ok(CircuitGraph { particles, components })
}

/// Renders a graph back to DSL text; `parse(&render(g)) == g` for any graph
/// whose names are valid tokens.
pub fn render(g: &CircuitGraph) -> String {
    let mut out = String::new();
    for p in &g.particles {
        let _ = writeln!(out, "particle {p}");
    }
    for c in &g.components {
        let _ = match c {
            Component::Source { particle, out: path } => writeln!(out, "source {particle} -> {path}"),
            Component::BeamSplitter { name, ports } => {
                let ports: Vec<String> = ports
                    .iter()
                    .map(|p| format!("in {} (transmit {}, reflect {})", p.input, p.transmit, p.reflect))
                    .collect();
                writeln!(out, "beamsplitter {name} {}", ports.join(" "))
            }
            Component::Mirror { name, input, output, phase } => {
                writeln!(out, "mirror {name} {input} -> {output} phase {}", if *phase { "on" } else { "off" })
            }
            Component::Interaction { name, path_a, path_b, p_ann, absorber } => {
                writeln!(out, "interact {name} {path_a} {path_b} p_ann {p_ann} -> {absorber}")
            }
            Component::Detector { name, input } => writeln!(out, "detector {name} in {input}"),
            Component::Blocker { name, input } => writeln!(out, "blocker {name} in {input}"),
        };
    }
    out
}
