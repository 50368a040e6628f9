//! Edinburgh-style surface syntax.
//!
//! ```text
//! program   ::= item*
//! item      ::= ":-" directive "." | clause
//! directive ::= "mode" pred [ "(" flag ("," flag)* ")" ]
//!             | "level" pred "(" coeff ("," coeff)* ")" [ "+" int ]
//! flag      ::= in | out                      (case-insensitive)
//! coeff     ::= int | "_"                     ("_" exactly at output positions)
//! clause    ::= literal [ (":-" | "<-") literal ("," literal)* ] "."
//! literal   ::= term [ ("<" | ">" | "=<" | "<=" | "\=") term ]
//! term      ::= Var | "_" | int | name [ "(" term ("," term)* ")" ]
//!             | "[" "]" | "[" term ("," term)* [ "|" term ] "]"
//! ```
//!
//! `%` starts a line comment. Whitespace is insignificant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{Term, Var, VarGen, VarNames};

use super::{is_builtin, Atom, Clause, LevelDecl, Mode, ModeFlag, ModedProgram, Pred, Query};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: String },
    UnexpectedEof { expected: String },
    IntegerOverflow,
    UnknownDirective(String),
    BadModeFlag(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::UnexpectedEof { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            ParseErrorKind::IntegerOverflow => f.write_str("integer literal out of range"),
            ParseErrorKind::UnknownDirective(d) => write!(f, "unknown directive {d:?}"),
            ParseErrorKind::BadModeFlag(s) => write!(f, "mode flag must be in or out, found {s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("duplicate mode declaration for {0}")]
    DuplicateMode(Pred),
    #[error("mode for {0} has {1} positions")]
    ModeArity(Pred, usize),
    #[error("builtin {0} must be declared all-In")]
    BuiltinMode(Pred),
    #[error("builtin {0} cannot be redefined")]
    BuiltinRedefined(Pred),
    #[error("{0} is used but neither defined, declared nor builtin")]
    Undefined(Pred),
    #[error("{name} used with arity {found}, expected {expected}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("level annotation for {pred}: {reason}")]
    Level { pred: Pred, reason: String },
    #[error("variable {0} cannot be used as an atom")]
    VariableAtom(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(String),
    Name(String),
    Int(i64),
    Op(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Bar,
    Comma,
    Plus,
    Neck,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Var(s) | Tok::Name(s) | Tok::Op(s) => write!(f, "{s:?}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBrack => f.write_str("'['"),
            Tok::RBrack => f.write_str("']'"),
            Tok::Bar => f.write_str("'|'"),
            Tok::Comma => f.write_str("','"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Neck => f.write_str("':-'"),
            Tok::End => f.write_str("'.'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |kind, line, column| ParseError { kind, line, column };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: tl,
                column: tc,
            });
            *i += len;
            *col += len;
        };
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '[' => push(Tok::LBrack, 1, &mut i, &mut col),
            ']' => push(Tok::RBrack, 1, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '.' => push(Tok::End, 1, &mut i, &mut col),
            ':' if next == Some('-') => push(Tok::Neck, 2, &mut i, &mut col),
            '<' if next == Some('-') => push(Tok::Neck, 2, &mut i, &mut col),
            '<' if next == Some('=') => push(Tok::Op("<=".into()), 2, &mut i, &mut col),
            '<' => push(Tok::Op("<".into()), 1, &mut i, &mut col),
            '>' => push(Tok::Op(">".into()), 1, &mut i, &mut col),
            '=' if next == Some('<') => push(Tok::Op("=<".into()), 2, &mut i, &mut col),
            '\\' if next == Some('=') => push(Tok::Op("\\=".into()), 2, &mut i, &mut col),
            c if c.is_ascii_digit() || (c == '-' && next.is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                let n: i64 = text
                    .parse()
                    .map_err(|_| err(ParseErrorKind::IntegerOverflow, tl, tc))?;
                push(Tok::Int(n), j - start, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                let tok = if c.is_uppercase() || c == '_' {
                    Tok::Var(text)
                } else {
                    Tok::Name(text)
                };
                push(tok, j - start, &mut i, &mut col);
            }
            c => return Err(err(ParseErrorKind::UnexpectedChar(c), tl, tc)),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof_line: usize,
    eof_column: usize,
    gen: VarGen,
    names: VarNames,
    scope: BTreeMap<String, Var>,
}

impl Parser {
    fn new(src: &str, first_var: u32) -> Result<Self, ParseError> {
        let toks = lex(src)?;
        let eof_line = src.lines().count().max(1);
        let eof_column = src.lines().last().map_or(1, |l| l.chars().count() + 1);
        Ok(Parser {
            toks,
            pos: 0,
            eof_line,
            eof_column,
            gen: VarGen::starting_at(first_var),
            names: VarNames::new(),
            scope: BTreeMap::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn at_eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn error_here(&self, expected: &str) -> ParseError {
        match self.toks.get(self.pos) {
            Some(s) => ParseError {
                kind: ParseErrorKind::UnexpectedToken {
                    found: s.tok.to_string(),
                    expected: expected.to_string(),
                },
                line: s.line,
                column: s.column,
            },
            None => ParseError {
                kind: ParseErrorKind::UnexpectedEof {
                    expected: expected.to_string(),
                },
                line: self.eof_line,
                column: self.eof_column,
            },
        }
    }

    fn next(&mut self, expected: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some(s) => {
                self.pos += 1;
                Ok(s.tok.clone())
            }
            None => Err(self.error_here(expected)),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn variable(&mut self, name: &str) -> Var {
        if name == "_" {
            return self.gen.fresh();
        }
        if let Some(v) = self.scope.get(name) {
            return *v;
        }
        let v = self.gen.fresh();
        self.scope.insert(name.to_string(), v);
        self.names.insert(v, Arc::from(name));
        v
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.next("a term")? {
            Tok::Var(name) => Ok(Term::Var(self.variable(&name))),
            Tok::Int(n) => Ok(Term::Int(n)),
            Tok::Name(name) => {
                if self.eat(&Tok::LParen) {
                    let args = self.term_list(Tok::RParen)?;
                    Ok(Term::app(&name, args))
                } else {
                    Ok(Term::constant(&name))
                }
            }
            Tok::LBrack => {
                if self.eat(&Tok::RBrack) {
                    return Ok(Term::nil());
                }
                let mut items = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.term()?);
                }
                let tail = if self.eat(&Tok::Bar) {
                    self.term()?
                } else {
                    Term::nil()
                };
                self.expect(Tok::RBrack, "']'")?;
                Ok(Term::list_with_tail(items, tail))
            }
            _ => {
                self.pos -= 1;
                Err(self.error_here("a term"))
            }
        }
    }

    fn term_list(&mut self, close: Tok) -> Result<Vec<Term>, ParseError> {
        let mut args = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            args.push(self.term()?);
        }
        self.expect(close, "')' or ','")?;
        Ok(args)
    }

    fn literal(&mut self) -> Result<Atom, ProgramError> {
        let start = self.pos;
        let lhs = self.term()?;
        if let Some(Tok::Op(op)) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            return Ok(Atom::new(&op, vec![lhs, rhs]));
        }
        match lhs {
            Term::App(name, args) => Ok(Atom { pred: name, args }),
            Term::Var(_) => match &self.toks[start].tok {
                Tok::Var(n) => Err(ProgramError::VariableAtom(n.clone())),
                _ => unreachable!(),
            },
            Term::Int(_) => {
                self.pos = start;
                Err(self.error_here("an atom").into())
            }
        }
    }

    fn pred_name(&mut self) -> Result<String, ParseError> {
        match self.next("a predicate name")? {
            Tok::Name(n) | Tok::Op(n) => Ok(n),
            _ => {
                self.pos -= 1;
                Err(self.error_here("a predicate name"))
            }
        }
    }

    fn mode_decl(&mut self) -> Result<(Pred, Mode), ParseError> {
        let name = self.pred_name()?;
        let mut flags = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                let (line, column) = self
                    .toks
                    .get(self.pos)
                    .map_or((self.eof_line, self.eof_column), |s| (s.line, s.column));
                let flag = match self.next("in or out")? {
                    Tok::Name(s) | Tok::Var(s) if s.eq_ignore_ascii_case("in") => ModeFlag::In,
                    Tok::Name(s) | Tok::Var(s) if s.eq_ignore_ascii_case("out") => ModeFlag::Out,
                    other => {
                        return Err(ParseError {
                            kind: ParseErrorKind::BadModeFlag(other.to_string()),
                            line,
                            column,
                        })
                    }
                };
                flags.push(flag);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "')' or ','")?;
        }
        Ok((Pred::new(&name, flags.len()), Mode(flags)))
    }

    fn level_decl(&mut self) -> Result<LevelDecl, ParseError> {
        let name = self.pred_name()?;
        let mut coefficients = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                match self.next("a coefficient or '_'")? {
                    Tok::Int(n) if n >= 0 => coefficients.push(Some(n as u64)),
                    Tok::Var(s) if s == "_" => coefficients.push(None),
                    _ => {
                        self.pos -= 1;
                        return Err(self.error_here("a non-negative coefficient or '_'"));
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "')' or ','")?;
        }
        let constant = if self.eat(&Tok::Plus) {
            match self.next("a non-negative constant")? {
                Tok::Int(n) if n >= 0 => n as u64,
                _ => {
                    self.pos -= 1;
                    return Err(self.error_here("a non-negative constant"));
                }
            }
        } else {
            0
        };
        Ok(LevelDecl {
            pred: Pred::new(&name, coefficients.len()),
            coefficients,
            constant,
        })
    }
}

/// Parses a program text into a moded program.
pub fn parse_program(src: &str) -> Result<ModedProgram, ProgramError> {
    let mut p = Parser::new(src, 0)?;
    let mut clauses = Vec::new();
    let mut modes: BTreeMap<Pred, Mode> = BTreeMap::new();
    let mut levels = Vec::new();
    while !p.at_eof() {
        if p.eat(&Tok::Neck) {
            let (line, column) = (p.toks[p.pos - 1].line, p.toks[p.pos - 1].column);
            match p.next("a directive")? {
                Tok::Name(d) if d == "mode" => {
                    let (pred, mode) = p.mode_decl()?;
                    if modes.insert(pred.clone(), mode).is_some() {
                        return Err(ProgramError::DuplicateMode(pred));
                    }
                }
                Tok::Name(d) if d == "level" => levels.push(p.level_decl()?),
                other => {
                    return Err(ParseError {
                        kind: ParseErrorKind::UnknownDirective(other.to_string()),
                        line,
                        column,
                    }
                    .into())
                }
            }
            p.expect(Tok::End, "'.'")?;
            continue;
        }
        p.scope.clear();
        let head = p.literal()?;
        let mut body = Vec::new();
        if p.eat(&Tok::Neck) {
            body.push(p.literal()?);
            while p.eat(&Tok::Comma) {
                body.push(p.literal()?);
            }
        }
        p.expect(Tok::End, "'.', ',' or ':-'")?;
        clauses.push(Clause::new(head, body));
    }

    check_arities(&clauses, &modes)?;
    let mut program = ModedProgram::new(clauses, modes)?;
    program.names = p.names;
    for l in &levels {
        let mode = program.mode(&l.pred).ok_or_else(|| ProgramError::Level {
            pred: l.pred.clone(),
            reason: "no such predicate".into(),
        })?;
        for (i, c) in l.coefficients.iter().enumerate() {
            match (mode.is_input(i), c) {
                (true, None) => {
                    return Err(ProgramError::Level {
                        pred: l.pred.clone(),
                        reason: format!("position {} is an input and needs a coefficient", i + 1),
                    })
                }
                (false, Some(_)) => {
                    return Err(ProgramError::Level {
                        pred: l.pred.clone(),
                        reason: format!("position {} is an output and must be '_'", i + 1),
                    })
                }
                _ => {}
            }
        }
    }
    let mut seen = BTreeSet::new();
    for l in &levels {
        if !seen.insert(l.pred.clone()) {
            return Err(ProgramError::Level {
                pred: l.pred.clone(),
                reason: "declared twice".into(),
            });
        }
    }
    program.levels = levels;
    Ok(program)
}

fn check_arities(clauses: &[Clause], modes: &BTreeMap<Pred, Mode>) -> Result<(), ProgramError> {
    let mut known: BTreeMap<String, usize> = BTreeMap::new();
    for p in modes.keys() {
        known.insert(p.name.to_string(), p.arity);
    }
    for c in clauses {
        known
            .entry(c.head.pred.to_string())
            .or_insert(c.head.args.len());
    }
    for c in clauses {
        for a in std::iter::once(&c.head).chain(&c.body) {
            if is_builtin(&a.key()) {
                continue;
            }
            if let Some(&expected) = known.get(&*a.pred) {
                if expected != a.args.len() {
                    return Err(ProgramError::Arity {
                        name: a.pred.to_string(),
                        expected,
                        found: a.args.len(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Parses a comma-separated query (optionally ending in `.`). Empty text is □.
pub fn parse_query(src: &str, program: &ModedProgram) -> Result<(Query, VarNames), ProgramError> {
    let mut p = Parser::new(src, 0)?;
    let mut atoms = Vec::new();
    if !p.at_eof() && p.peek() != Some(&Tok::End) {
        atoms.push(p.literal()?);
        while p.eat(&Tok::Comma) {
            atoms.push(p.literal()?);
        }
    }
    p.eat(&Tok::End);
    if !p.at_eof() {
        return Err(p.error_here("',' or end of query").into());
    }
    for a in &atoms {
        let key = a.key();
        if program.mode(&key).is_some() {
            continue;
        }
        let other = program
            .modes()
            .keys()
            .find(|k| *k.name == *a.pred)
            .map(|k| k.arity)
            .or_else(|| {
                super::BUILTINS
                    .iter()
                    .find(|(n, _)| *n == &*a.pred)
                    .map(|(_, ar)| *ar)
            });
        return Err(match other {
            Some(expected) => ProgramError::Arity {
                name: a.pred.to_string(),
                expected,
                found: a.args.len(),
            },
            None => ProgramError::Undefined(key),
        });
    }
    Ok((Query::new(atoms), p.names))
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPEND: &str = "
        % concatenation
        :- mode app(in,in,out).
        app([],Ys,Ys).
        app([H|Xs],Ys,[H|Zs]) :- app(Xs,Ys,Zs).
    ";

    #[test]
    fn parses_append() {
        let p = parse_program(APPEND).unwrap();
        assert_eq!(p.clauses.len(), 2);
        assert_eq!(p.modes().len(), 1);
        assert!(p.warnings.is_empty());
        assert_eq!(
            p.clauses[1].display(&p.names).to_string(),
            "app([H|Xs],Ys,[H|Zs]) :- app(Xs,Ys,Zs)."
        );
    }

    #[test]
    fn positioned_syntax_error() {
        let e = parse_program("p(X) :- q(X").unwrap_err();
        match e {
            ProgramError::Parse(pe) => {
                assert_eq!(pe.line, 1);
                assert!(matches!(pe.kind, ParseErrorKind::UnexpectedEof { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
        let e = parse_program("p(a).\np(X) :- q(X] .").unwrap_err();
        match e {
            ProgramError::Parse(pe) => assert_eq!((pe.line, pe.column), (2, 12)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_mode() {
        let src = ":- mode app(in,in,out).\n:- mode app(in,in,out).\napp([],Y,Y).";
        assert_eq!(
            parse_program(src).unwrap_err(),
            ProgramError::DuplicateMode(Pred::new("app", 3))
        );
    }

    #[test]
    fn queries() {
        let p = parse_program(APPEND).unwrap();
        let (q, names) = parse_query("app(Xs,[5,6],Ys), app([1,2],[3,4],Xs)", &p).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(
            q.display(&names).to_string(),
            "app(Xs,[5,6],Ys), app([1,2],[3,4],Xs)"
        );
        assert_eq!(q.atoms[0].args[0], q.atoms[1].args[2]);
        let (empty, _) = parse_query("", &p).unwrap();
        assert!(empty.is_empty());
        assert!(matches!(
            parse_query("app(X)", &p).unwrap_err(),
            ProgramError::Arity {
                expected: 3,
                found: 1,
                ..
            }
        ));
    }

    #[test]
    fn builtins_and_operators() {
        let src = "
            :- mode part(in,in,out,out).
            part(X,[],[],[]).
            part(X,[Y|Xs],[Y|Ls],Bs) :- X > Y, part(X,Xs,Ls,Bs).
            part(X,[Y|Xs],Ls,[Y|Bs]) :- X <= Y, part(X,Xs,Ls,Bs).
            f(X) :- X \\= [], constant(X), X =< 3, -2 < X.
        ";
        let p = parse_program(src).unwrap();
        assert_eq!(&*p.clauses[1].body[0].pred, ">");
        assert_eq!(&*p.clauses[2].body[0].pred, "<=");
        assert_eq!(p.clauses[3].body[3].args[0], Term::Int(-2));
        assert_eq!(
            p.clauses[3].display(&p.names).to_string(),
            "f(X) :- X \\= [], constant(X), X =< 3, -2 < X."
        );
    }

    #[test]
    fn builtin_mode_declarations() {
        let ok = ":- mode constant(in).\n:- mode \\=(in,in).\np(X) :- constant(X).";
        assert!(parse_program(ok).is_ok());
        let bad = ":- mode constant(out).\np(X) :- constant(X).";
        assert!(matches!(
            parse_program(bad).unwrap_err(),
            ProgramError::BuiltinMode(_)
        ));
    }

    #[test]
    fn level_annotations() {
        let src = format!("{APPEND}\n:- level app(1,0,_) + 2.");
        let p = parse_program(&src).unwrap();
        assert_eq!(p.levels[0].coefficients, vec![Some(1), Some(0), None]);
        assert_eq!(p.levels[0].constant, 2);
        let bad = format!("{APPEND}\n:- level app(1,_,_).");
        assert!(matches!(
            parse_program(&bad).unwrap_err(),
            ProgramError::Level { .. }
        ));
        let bad = format!("{APPEND}\n:- level app(1,0,1).");
        assert!(matches!(
            parse_program(&bad).unwrap_err(),
            ProgramError::Level { .. }
        ));
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let p = parse_program(":- mode p(in,in). p(_,_).").unwrap();
        let c = &p.clauses[0];
        assert_ne!(c.head.args[0], c.head.args[1]);
    }

    #[test]
    fn arity_mismatch_in_program() {
        let e = parse_program(":- mode app(in,in,out).\np(X) :- app(X).").unwrap_err();
        assert!(matches!(e, ProgramError::Arity { .. }));
    }
}
