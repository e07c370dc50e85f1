//! Text format for pulse programs.
//!
//! ```text
//! program  := stmt*
//! stmt     := pulse | bb1 | delay | repeat | acquire
//! pulse    := "pulse" "theta=" angle "phase=" angle
//! bb1      := "bb1" "theta=" angle
//! delay    := "delay" number            (seconds)
//! repeat   := "repeat" integer "{" stmt* "}"
//! acquire  := "acquire"
//! angle    := number ("pi" | "deg" | "rad")
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Keywords and units
//! are case-insensitive; [`format_program`] prints them lowercase with
//! two-space indentation inside `repeat` blocks. `bb1` expands to its four
//! pulses at parse time.

use std::fmt;

use thiserror::Error;

use super::{bb1_sequence, Pulse, PulseProgram, SequenceElement};
use crate::angle::{format_angle, parse_number, split_number, AngleUnit};

/// Maximum `repeat` nesting depth accepted by the parser.
pub const MAX_NESTING: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { expected: String, found: String },
    UnexpectedEof { expected: String },
    UnknownKeyword(String),
    MissingAngleUnit,
    UnknownUnit(String),
    InvalidNumber(String),
    NestingTooDeep,
    InvalidValue(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match self {
            UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            UnexpectedToken { expected, found } => write!(f, "expected {expected}, found {found}"),
            UnexpectedEof { expected } => write!(f, "unexpected end of input, expected {expected}"),
            UnknownKeyword(k) => write!(f, "unknown keyword `{k}`"),
            MissingAngleUnit => write!(f, "angle unit required (pi, deg or rad)"),
            UnknownUnit(u) => write!(f, "unknown unit `{u}`"),
            InvalidNumber(n) => write!(f, "invalid number `{n}`"),
            NestingTooDeep => write!(f, "repeat nesting deeper than {MAX_NESTING}"),
            InvalidValue(msg) => write!(f, "{msg}"),
        }
    }
}

/// A located diagnostic. Lines and columns are 1-based; columns count chars.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number { text: String, unit: String },
    Eq,
    LBrace,
    RBrace,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Number { text, unit } => write!(f, "`{text}{unit}`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (line_idx, raw) in text.lines().enumerate() {
        let line = line_idx + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |tok, out: &mut Vec<Spanned>| out.push(Spanned { tok, line, column });
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                '=' => {
                    push(Tok::Eq, &mut out);
                    i += 1;
                }
                '{' => {
                    push(Tok::LBrace, &mut out);
                    i += 1;
                }
                '}' => {
                    push(Tok::RBrace, &mut out);
                    i += 1;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    push(Tok::Word(chars[start..i].iter().collect()), &mut out);
                }
                c if c.is_ascii_digit() || c == '.' || c == '+' || c == '-' => {
                    let rest: String = chars[i..].iter().collect();
                    let (num, tail) = split_number(&rest);
                    let unit: String = tail
                        .chars()
                        .take_while(|ch| ch.is_ascii_alphabetic())
                        .collect();
                    if num.is_empty() || num == "+" || num == "-" {
                        return Err(ParseError {
                            line,
                            column,
                            kind: ParseErrorKind::UnexpectedChar(c),
                        });
                    }
                    i += num.chars().count() + unit.chars().count();
                    push(
                        Tok::Number {
                            text: num.to_string(),
                            unit,
                        },
                        &mut out,
                    );
                }
                other => {
                    return Err(ParseError {
                        line,
                        column,
                        kind: ParseErrorKind::UnexpectedChar(other),
                    })
                }
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn err_at(&self, at: &Spanned, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: at.line,
            column: at.column,
            kind,
        }
    }

    fn eof(&self, expected: &str) -> ParseError {
        ParseError {
            line: self.end.0,
            column: self.end.1,
            kind: ParseErrorKind::UnexpectedEof {
                expected: expected.to_string(),
            },
        }
    }

    fn next(&mut self, expected: &str) -> Result<Spanned, ParseError> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| self.eof(expected))?;
        self.pos += 1;
        Ok(t)
    }

    fn unexpected(&self, t: &Spanned, expected: &str) -> ParseError {
        self.err_at(
            t,
            ParseErrorKind::UnexpectedToken {
                expected: expected.to_string(),
                found: t.tok.to_string(),
            },
        )
    }

    fn number(&self, t: &Spanned, text: &str) -> Result<f64, ParseError> {
        parse_number(text).map_err(|_| self.err_at(t, ParseErrorKind::InvalidNumber(text.to_string())))
    }

    fn angle(&mut self) -> Result<f64, ParseError> {
        let t = self.next("angle")?;
        let Tok::Number { text, unit } = &t.tok else {
            return Err(self.unexpected(&t, "angle"));
        };
        let value = self.number(&t, text)?;
        if unit.is_empty() {
            if value == 0.0 {
                return Ok(0.0);
            }
            return Err(self.err_at(&t, ParseErrorKind::MissingAngleUnit));
        }
        let unit: AngleUnit = unit
            .parse()
            .map_err(|_| self.err_at(&t, ParseErrorKind::UnknownUnit(unit.clone())))?;
        Ok(unit.to_radians(value))
    }

    /// `name=angle`, returning the angle and the location of `name`.
    fn param(&mut self, name: &str) -> Result<(f64, Spanned), ParseError> {
        let expected = format!("`{name}=`");
        let t = self.next(&expected)?;
        match &t.tok {
            Tok::Word(w) if w.eq_ignore_ascii_case(name) => {}
            _ => return Err(self.unexpected(&t, &expected)),
        }
        let eq = self.next("`=`")?;
        if eq.tok != Tok::Eq {
            return Err(self.unexpected(&eq, "`=`"));
        }
        Ok((self.angle()?, t))
    }

    fn pulse(&mut self, at: &Spanned, theta: f64, phi: f64) -> Result<Pulse, ParseError> {
        Pulse::new(theta, phi).map_err(|e| self.err_at(at, ParseErrorKind::InvalidValue(e.to_string())))
    }

    fn block(&mut self, depth: usize) -> Result<Vec<SequenceElement>, ParseError> {
        let mut out = Vec::new();
        loop {
            let Some(t) = self.toks.get(self.pos).cloned() else {
                if depth > 0 {
                    return Err(self.eof("`}`"));
                }
                return Ok(out);
            };
            if t.tok == Tok::RBrace {
                if depth == 0 {
                    return Err(self.unexpected(&t, "statement"));
                }
                self.pos += 1;
                return Ok(out);
            }
            self.pos += 1;
            let Tok::Word(word) = &t.tok else {
                return Err(self.unexpected(&t, "statement"));
            };
            match word.to_ascii_lowercase().as_str() {
                "pulse" => {
                    let (theta, at) = self.param("theta")?;
                    let (phi, _) = self.param("phase")?;
                    out.push(self.pulse(&at, theta, phi)?.into());
                }
                "bb1" => {
                    let (theta, at) = self.param("theta")?;
                    let pulses = bb1_sequence(theta)
                        .map_err(|e| self.err_at(&at, ParseErrorKind::InvalidValue(e.to_string())))?;
                    out.extend(pulses.map(SequenceElement::from));
                }
                "delay" => {
                    let n = self.next("delay in seconds")?;
                    let Tok::Number { text, unit } = &n.tok else {
                        return Err(self.unexpected(&n, "delay in seconds"));
                    };
                    if !unit.is_empty() {
                        return Err(self.err_at(&n, ParseErrorKind::UnknownUnit(unit.clone())));
                    }
                    let tau = self.number(&n, text)?;
                    let el = SequenceElement::delay(tau)
                        .map_err(|e| self.err_at(&n, ParseErrorKind::InvalidValue(e.to_string())))?;
                    out.push(el);
                }
                "repeat" => {
                    if depth + 1 > MAX_NESTING {
                        return Err(self.err_at(&t, ParseErrorKind::NestingTooDeep));
                    }
                    let n = self.next("repeat count")?;
                    let Tok::Number { text, unit } = &n.tok else {
                        return Err(self.unexpected(&n, "repeat count"));
                    };
                    if !unit.is_empty() {
                        return Err(self.err_at(&n, ParseErrorKind::UnknownUnit(unit.clone())));
                    }
                    let count: u32 = text.parse().map_err(|_| {
                        self.err_at(
                            &n,
                            ParseErrorKind::InvalidValue(format!("repeat count `{text}` is not a positive integer")),
                        )
                    })?;
                    let lb = self.next("`{`")?;
                    if lb.tok != Tok::LBrace {
                        return Err(self.unexpected(&lb, "`{`"));
                    }
                    let body = self.block(depth + 1)?;
                    let el = SequenceElement::repeat(count, body)
                        .map_err(|e| self.err_at(&n, ParseErrorKind::InvalidValue(e.to_string())))?;
                    out.push(el);
                }
                "acquire" => out.push(SequenceElement::Acquire),
                _ => return Err(self.err_at(&t, ParseErrorKind::UnknownKeyword(word.clone()))),
            }
        }
    }
}

/// Parses program text. The returned program has an empty name.
pub fn parse_program(text: &str) -> Result<PulseProgram, ParseError> {
    let toks = lex(text)?;
    let line_count = text.lines().count().max(1);
    let last_len = text.lines().last().map(|l| l.chars().count()).unwrap_or(0);
    let mut p = Parser {
        toks,
        pos: 0,
        end: (line_count, last_len + 1),
    };
    let elements = p.block(0)?;
    Ok(PulseProgram::new("", elements))
}

/// Canonical text for a program; [`parse_program`] reproduces the elements exactly.
pub fn format_program(program: &PulseProgram) -> String {
    fn write(elements: &[SequenceElement], depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        for e in elements {
            out.push_str(&pad);
            match e {
                SequenceElement::Pulse(p) => {
                    out.push_str(&format!(
                        "pulse theta={} phase={}\n",
                        format_angle(p.theta()),
                        format_angle(p.phi())
                    ));
                }
                SequenceElement::Delay { tau } => out.push_str(&format!("delay {tau}\n")),
                SequenceElement::Repeat { count, body } => {
                    out.push_str(&format!("repeat {count} {{\n"));
                    write(body, depth + 1, out);
                    out.push_str(&pad);
                    out.push_str("}\n");
                }
                SequenceElement::Acquire => out.push_str("acquire\n"),
            }
        }
    }
    let mut out = String::new();
    write(&program.elements, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn kind(text: &str) -> ParseErrorKind {
        parse_program(text).unwrap_err().kind
    }

    #[test]
    fn single_pulse() {
        let p = parse_program("pulse theta=1pi phase=0").unwrap();
        assert_eq!(p.elements, vec![Pulse::new(PI, 0.0).unwrap().into()]);
    }

    #[test]
    fn bb1_expands() {
        let p = parse_program("bb1 theta=1pi").unwrap();
        let expected: Vec<SequenceElement> = bb1_sequence(PI).unwrap().map(Into::into).to_vec();
        assert_eq!(p.elements, expected);
    }

    #[test]
    fn repeat_block() {
        let p = parse_program("repeat 2 { delay 1e-6 pulse theta=0.5pi phase=90deg }").unwrap();
        let expected = SequenceElement::repeat(
            2,
            vec![
                SequenceElement::delay(1e-6).unwrap(),
                Pulse::new(PI / 2.0, PI / 2.0).unwrap().into(),
            ],
        )
        .unwrap();
        assert_eq!(p.elements, vec![expected]);
    }

    #[test]
    fn unit_required() {
        let err = parse_program("pulse theta=1 phase=0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingAngleUnit);
        assert_eq!((err.line, err.column), (1, 13));
    }

    #[test]
    fn canonical_lowercase() {
        let p = parse_program("PULSE Theta=1PI Phase=0.5Pi\nAcquire").unwrap();
        assert_eq!(format_program(&p), "pulse theta=1pi phase=0.5pi\nacquire\n");
    }

    #[test]
    fn nested_indentation() {
        let p = parse_program("repeat 2 { repeat 3 { acquire } delay 0.5 }").unwrap();
        assert_eq!(
            format_program(&p),
            "repeat 2 {\n  repeat 3 {\n    acquire\n  }\n  delay 0.5\n}\n"
        );
    }

    #[test]
    fn comments_and_whitespace() {
        let p = parse_program("# header\n  pulse theta = 90deg   phase=0 # trailing\n\n").unwrap();
        assert_eq!(p.elements.len(), 1);
    }

    #[test]
    fn examples_round_trip() {
        for text in [
            "pulse theta=1pi phase=0",
            "bb1 theta=1pi",
            "repeat 2 { delay 1e-6 pulse theta=0.5pi phase=90deg }",
            "bb1 theta=0.608pi acquire",
        ] {
            let p = parse_program(text).unwrap();
            assert_eq!(parse_program(&format_program(&p)).unwrap(), p, "{text}");
        }
    }

    #[test]
    fn located_errors() {
        let cases: &[(&str, (usize, usize))] = &[
            ("pulse theta=1pi\nfoo", (2, 1)),
            ("pulse theta=1pi phase=0\n  pulse phase=0", (2, 9)),
            ("repeat 2 {\n acquire", (2, 9)),
            ("}", (1, 1)),
            ("delay 1s", (1, 7)),
            ("pulse theta=1turn phase=0", (1, 13)),
            ("acquire @", (1, 9)),
            ("repeat 0 { }", (1, 8)),
            ("repeat 1.5 { }", (1, 8)),
            ("bb1 theta=5pi", (1, 5)),
            ("pulse theta=-1pi phase=0", (1, 7)),
            ("delay -1", (1, 7)),
            ("pulse theta=1..2pi phase=0", (1, 13)),
        ];
        for (text, loc) in cases {
            let err = parse_program(text).unwrap_err();
            assert_eq!((err.line, err.column), *loc, "{text}: {err}");
        }
        assert_eq!(kind("foo"), ParseErrorKind::UnknownKeyword("foo".into()));
        assert!(matches!(kind("repeat 2 {"), ParseErrorKind::UnexpectedEof { .. }));
        assert!(matches!(kind("pulse theta=1pi phase=0 }"), ParseErrorKind::UnexpectedToken { .. }));
        assert!(matches!(kind("acquire @"), ParseErrorKind::UnexpectedChar('@')));
        assert!(matches!(kind("pulse theta=1..2pi phase=0"), ParseErrorKind::InvalidNumber(_)));
    }

    #[test]
    fn nesting_guard() {
        let ok = format!("{}acquire{}", "repeat 1 { ".repeat(MAX_NESTING), " }".repeat(MAX_NESTING));
        assert_eq!(parse_program(&ok).unwrap().depth(), MAX_NESTING);
        let deep = format!("{}acquire{}", "repeat 1 { ".repeat(MAX_NESTING + 1), " }".repeat(MAX_NESTING + 1));
        assert_eq!(kind(&deep), ParseErrorKind::NestingTooDeep);
    }

    #[test]
    fn empty_program() {
        assert!(parse_program("").unwrap().elements.is_empty());
        assert!(parse_program("# nothing\n").unwrap().elements.is_empty());
        assert_eq!(format_program(&PulseProgram::default()), "");
    }
}
