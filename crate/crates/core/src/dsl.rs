//! The construction language: parsing, validation, desugaring and printing.
//!
//! Surface syntax, one statement per line or `;`-separated:
//!
//! ```text
//! // concept: eq_triangle
//! l1 = line(p1(), p2())
//! c1* = circle(p1, p2)
//! p3 = point(c1, c2)
//! ```
//!
//! `name*` hides an object from the rendering. `p()` / `p(o1)` / `p(o1, o2)`
//! inside an object call defines a fresh point constrained to zero, one or two
//! earlier objects; a bare `p` reuses an earlier point. Repeating the inline
//! form with the same constraint list is also a reuse.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Line,
    Circle,
}

impl ObjectKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ObjectKind::Line => "line",
            ObjectKind::Circle => "circle",
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Definition of a fresh point and the objects it must lie on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointDecl {
    pub name: String,
    pub constraints: Vec<String>,
}

/// A line (begin, end) or a circle (center, edge point).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectDecl {
    pub name: String,
    pub kind: ObjectKind,
    pub visible: bool,
    pub begin: String,
    pub end: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stmt", rename_all = "lowercase")]
pub enum Statement {
    Point(PointDecl),
    Object(ObjectDecl),
}

/// A validated, desugared program: every fresh point is an explicit
/// [`Statement::Point`] placed before its first use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptProgram {
    pub name: String,
    pub statements: Vec<Statement>,
}

impl ConceptProgram {
    pub fn points(&self) -> impl Iterator<Item = &PointDecl> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Point(p) => Some(p),
            Statement::Object(_) => None,
        })
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectDecl> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Object(o) => Some(o),
            Statement::Point(_) => None,
        })
    }

    pub fn point(&self, name: &str) -> Option<&PointDecl> {
        self.points().find(|p| p.name == name)
    }

    pub fn visible_count(&self) -> usize {
        self.objects().filter(|o| o.visible).count()
    }

    /// Same statements, names, kinds, visibility and point wiring; only the
    /// constraint lists may differ.
    pub fn same_skeleton(&self, other: &ConceptProgram) -> bool {
        self.statements.len() == other.statements.len()
            && self
                .statements
                .iter()
                .zip(&other.statements)
                .all(|pair| match pair {
                    (Statement::Point(a), Statement::Point(b)) => a.name == b.name,
                    (Statement::Object(a), Statement::Object(b)) => a == b,
                    _ => false,
                })
    }

    pub fn constraint_signature(&self) -> ConstraintSignature {
        ConstraintSignature {
            points: self
                .points()
                .map(|p| (p.name.clone(), p.constraints.clone()))
                .collect(),
        }
    }

    pub fn pretty_print(&self) -> String {
        pretty_print(self)
    }
}

/// Per-point constraint lists, in definition order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSignature {
    pub points: Vec<(String, Vec<String>)>,
}

impl ConstraintSignature {
    pub fn count(&self, point: &str) -> Option<usize> {
        self.points
            .iter()
            .find(|(n, _)| n == point)
            .map(|(_, c)| c.len())
    }

    pub fn counts(&self) -> Vec<(&str, usize)> {
        self.points
            .iter()
            .map(|(n, c)| (n.as_str(), c.len()))
            .collect()
    }

    /// Number of `target` constraints missing here. Points absent here count
    /// all their constraints as removed.
    pub fn removed_relative_to(&self, target: &ConstraintSignature) -> usize {
        target
            .points
            .iter()
            .map(
                |(name, wanted)| match self.points.iter().find(|(n, _)| n == name) {
                    Some((_, have)) => wanted.iter().filter(|c| !have.contains(c)).count(),
                    None => wanted.len(),
                },
            )
            .sum()
    }

    /// Constraints present here that `target` does not have.
    pub fn added_relative_to(&self, target: &ConstraintSignature) -> usize {
        target.removed_relative_to(self)
    }
}

pub fn constraint_signature(program: &ConceptProgram) -> ConstraintSignature {
    program.constraint_signature()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Syntax,
    UndefinedName,
    DuplicateDefinition,
    Arity,
    UnknownObjectKind,
    ConstraintNotObject,
    RepeatedConstraint,
    ExpectedPoint,
    NoVisibleObject,
    UnusedPoint,
}

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub position: Position,
    pub kind: DiagnosticKind,
    pub severity: Severity,
    pub message: String,
}

impl ParseDiagnostic {
    fn error(position: Position, kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Self {
            position,
            kind,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(position: Position, kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Self {
            position,
            kind,
            severity: Severity::Warning,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {}: {}",
            self.position.line, self.position.column, sev, self.message
        )
    }
}

/// Name used when the source carries no `concept:` header.
pub const DEFAULT_NAME: &str = "concept";

/// Parses and validates a program. Warnings are dropped; use
/// [`parse_with_warnings`] to keep them.
pub fn parse(source: &str) -> Result<ConceptProgram, Vec<ParseDiagnostic>> {
    parse_with_warnings(source).map(|(program, _)| program)
}

/// Parses a program, returning non-fatal diagnostics alongside it. On failure
/// the list holds every diagnostic (errors and warnings).
pub fn parse_with_warnings(
    source: &str,
) -> Result<(ConceptProgram, Vec<ParseDiagnostic>), Vec<ParseDiagnostic>> {
    let name = header_name(source).unwrap_or_else(|| DEFAULT_NAME.to_string());
    let tokens = match lex(source) {
        Ok(tokens) => tokens,
        Err(diag) => return Err(vec![diag]),
    };
    let raw = RawParser {
        tokens: &tokens,
        pos: 0,
        diagnostics: Vec::new(),
    }
    .parse_all();
    let (statements, mut diagnostics) = raw;
    let program = Validator::default().run(name, statements, &mut diagnostics);
    if diagnostics.iter().any(ParseDiagnostic::is_error) {
        Err(diagnostics)
    } else {
        Ok((program, diagnostics))
    }
}

/// Reads the `concept: <name>` header from the first line, with or without a
/// leading `//`.
fn header_name(source: &str) -> Option<String> {
    let first = source.lines().next()?.trim();
    let body = first.strip_prefix("//").map(str::trim).unwrap_or(first);
    let name = body.strip_prefix("concept:")?.trim();
    is_identifier(name).then(|| name.to_string())
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Eq,
    Star,
    LParen,
    RParen,
    Comma,
    Sep,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Position,
}

fn lex(source: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut tokens = Vec::new();
    for (line_idx, line) in source.lines().enumerate() {
        if line_idx == 0 && line.trim().starts_with("concept:") {
            continue;
        }
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let pos = Position {
                line: line_idx + 1,
                column: i + 1,
            };
            let c = chars[i];
            let tok = match c {
                ' ' | '\t' | '\r' => {
                    i += 1;
                    continue;
                }
                '/' if chars.get(i + 1) == Some(&'/') => break,
                '=' => Tok::Eq,
                '*' => Tok::Star,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ';' => Tok::Sep,
                c if c.is_ascii_alphabetic() => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    tokens.push(Token {
                        tok: Tok::Ident(chars[start..i].iter().collect()),
                        pos,
                    });
                    continue;
                }
                other => {
                    return Err(ParseDiagnostic::error(
                        pos,
                        DiagnosticKind::Syntax,
                        format!("unexpected character `{other}`"),
                    ))
                }
            };
            tokens.push(Token { tok, pos });
            i += 1;
        }
        tokens.push(Token {
            tok: Tok::Sep,
            pos: Position {
                line: line_idx + 1,
                column: chars.len() + 1,
            },
        });
    }
    Ok(tokens)
}

#[derive(Debug, Clone)]
struct Spanned {
    name: String,
    pos: Position,
}

#[derive(Debug)]
enum RawArg {
    Bare(Spanned),
    Inline {
        name: Spanned,
        constraints: Vec<Spanned>,
    },
}

#[derive(Debug)]
enum RawStatement {
    Object {
        name: Spanned,
        visible: bool,
        kind: ObjectKind,
        args: Vec<RawArg>,
        call_pos: Position,
    },
    Point {
        name: Spanned,
        constraints: Vec<Spanned>,
    },
}

struct RawParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    diagnostics: Vec<ParseDiagnostic>,
}

type ParseStep<T> = Result<T, ParseDiagnostic>;

impl RawParser<'_> {
    fn parse_all(mut self) -> (Vec<RawStatement>, Vec<ParseDiagnostic>) {
        let mut out = Vec::new();
        while self.pos < self.tokens.len() {
            if self.peek() == Some(&Tok::Sep) {
                self.pos += 1;
                continue;
            }
            match self.statement() {
                Ok(stmt) => out.push(stmt),
                Err(diag) => {
                    self.diagnostics.push(diag);
                    while self.pos < self.tokens.len() && self.peek() != Some(&Tok::Sep) {
                        self.pos += 1;
                    }
                }
            }
        }
        (out, self.diagnostics)
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> Position {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.pos)
            .unwrap_or_default()
    }

    fn expect(&mut self, want: Tok, what: &str) -> ParseStep<Position> {
        let pos = self.here();
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(pos)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ParseDiagnostic {
        let found = match self.peek() {
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Sep) | None => "end of statement".to_string(),
            Some(tok) => format!("`{}`", tok_text(tok)),
        };
        ParseDiagnostic::error(
            self.here(),
            DiagnosticKind::Syntax,
            format!("expected {what}, found {found}"),
        )
    }

    fn ident(&mut self, what: &str) -> ParseStep<Spanned> {
        let pos = self.here();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let name = s.clone();
                self.pos += 1;
                if !is_identifier(&name) {
                    return Err(ParseDiagnostic::error(
                        pos,
                        DiagnosticKind::Syntax,
                        format!(
                            "invalid name `{name}`: names are lowercase letters, digits and `_`"
                        ),
                    ));
                }
                Ok(Spanned { name, pos })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn statement(&mut self) -> ParseStep<RawStatement> {
        let name = self.ident("a name")?;
        let star_pos = self.here();
        let hidden = if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            true
        } else {
            false
        };
        self.expect(Tok::Eq, "`=`")?;
        let call_pos = self.here();
        let keyword = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(self.unexpected("`line`, `circle` or `point`")),
        };
        self.pos += 1;
        let kind = match keyword.as_str() {
            "line" | "Line" => Some(ObjectKind::Line),
            "circle" | "Circle" => Some(ObjectKind::Circle),
            "point" | "Point" => None,
            other => {
                return Err(ParseDiagnostic::error(
                    call_pos,
                    DiagnosticKind::UnknownObjectKind,
                    format!("unknown object kind `{other}` (expected `line`, `circle` or `point`)"),
                ))
            }
        };
        self.expect(Tok::LParen, "`(`")?;
        let stmt = match kind {
            Some(kind) => {
                let args = self.list(|p| p.point_arg())?;
                RawStatement::Object {
                    name,
                    visible: !hidden,
                    kind,
                    args,
                    call_pos,
                }
            }
            None => {
                if hidden {
                    return Err(ParseDiagnostic::error(
                        star_pos,
                        DiagnosticKind::Syntax,
                        "points cannot be marked invisible",
                    ));
                }
                let constraints = self.list(|p| p.ident("an object name"))?;
                RawStatement::Point { name, constraints }
            }
        };
        match self.peek() {
            None | Some(Tok::Sep) => Ok(stmt),
            _ => Err(self.unexpected("end of statement")),
        }
    }

    /// Comma-separated items up to and including the closing `)`.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> ParseStep<T>) -> ParseStep<Vec<T>> {
        let mut items = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(item(self)?);
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(items);
                }
                _ => return Err(self.unexpected("`,` or `)`")),
            }
        }
    }

    fn point_arg(&mut self) -> ParseStep<RawArg> {
        let name = self.ident("a point")?;
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let constraints = self.list(|p| p.ident("an object name"))?;
            Ok(RawArg::Inline { name, constraints })
        } else {
            Ok(RawArg::Bare(name))
        }
    }
}

fn tok_text(tok: &Tok) -> &str {
    match tok {
        Tok::Ident(s) => s,
        Tok::Eq => "=",
        Tok::Star => "*",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Comma => ",",
        Tok::Sep => ";",
    }
}

#[derive(Debug, Clone)]
enum Binding {
    Point {
        constraints: Vec<String>,
        pos: Position,
        used: bool,
    },
    Object {
        pos: Position,
    },
}

#[derive(Default)]
struct Validator {
    env: HashMap<String, Binding>,
    statements: Vec<Statement>,
}

impl Validator {
    fn run(
        mut self,
        name: String,
        raw: Vec<RawStatement>,
        diags: &mut Vec<ParseDiagnostic>,
    ) -> ConceptProgram {
        let mut first_pos = None;
        for stmt in raw {
            match stmt {
                RawStatement::Point { name, constraints } => {
                    first_pos.get_or_insert(name.pos);
                    self.define_point(&name, &constraints, diags);
                }
                RawStatement::Object {
                    name,
                    visible,
                    kind,
                    args,
                    call_pos,
                } => {
                    first_pos.get_or_insert(name.pos);
                    self.object(name, visible, kind, args, call_pos, diags);
                }
            }
        }
        let program = ConceptProgram {
            name,
            statements: self.statements,
        };
        if program.visible_count() == 0 && !diags.iter().any(ParseDiagnostic::is_error) {
            diags.push(ParseDiagnostic::error(
                first_pos.unwrap_or(Position { line: 1, column: 1 }),
                DiagnosticKind::NoVisibleObject,
                "program has no visible object; the rendering would be empty",
            ));
        }
        let mut unused: Vec<_> = self
            .env
            .iter()
            .filter_map(|(n, b)| match b {
                Binding::Point {
                    used: false, pos, ..
                } => Some((*pos, n.clone())),
                _ => None,
            })
            .collect();
        unused.sort();
        for (pos, n) in unused {
            diags.push(ParseDiagnostic::warning(
                pos,
                DiagnosticKind::UnusedPoint,
                format!("point `{n}` is never used by an object"),
            ));
        }
        program
    }

    fn object(
        &mut self,
        name: Spanned,
        visible: bool,
        kind: ObjectKind,
        args: Vec<RawArg>,
        call_pos: Position,
        diags: &mut Vec<ParseDiagnostic>,
    ) {
        let errors_before = diags.len();
        if args.len() != 2 {
            diags.push(ParseDiagnostic::error(
                call_pos,
                DiagnosticKind::Arity,
                format!("`{kind}` takes exactly 2 points, got {}", args.len()),
            ));
            return;
        }
        let mut ends = Vec::with_capacity(2);
        for arg in &args {
            match arg {
                RawArg::Bare(p) => {
                    self.use_point(p, diags);
                    ends.push(p.name.clone());
                }
                RawArg::Inline {
                    name: p,
                    constraints,
                } => {
                    match self.env.get(&p.name) {
                        Some(Binding::Point {
                            constraints: existing,
                            ..
                        }) => {
                            let same = existing.len() == constraints.len()
                                && existing.iter().zip(constraints).all(|(a, b)| *a == b.name);
                            if same {
                                self.use_point(p, diags);
                            } else {
                                diags.push(ParseDiagnostic::error(
                                    p.pos,
                                    DiagnosticKind::DuplicateDefinition,
                                    format!(
                                        "point `{}` is already defined with different constraints",
                                        p.name
                                    ),
                                ));
                            }
                        }
                        _ => {
                            if self.define_point(p, constraints, diags) {
                                self.use_point(p, diags);
                            }
                        }
                    }
                    ends.push(p.name.clone());
                }
            }
        }
        if self.env.contains_key(&name.name) {
            diags.push(self.duplicate(&name));
            return;
        }
        self.env
            .insert(name.name.clone(), Binding::Object { pos: name.pos });
        if diags[errors_before..].iter().any(ParseDiagnostic::is_error) {
            return;
        }
        self.statements.push(Statement::Object(ObjectDecl {
            name: name.name,
            kind,
            visible,
            begin: ends[0].clone(),
            end: ends[1].clone(),
        }));
    }

    fn duplicate(&self, name: &Spanned) -> ParseDiagnostic {
        let earlier = match self.env.get(&name.name) {
            Some(Binding::Point { pos, .. }) | Some(Binding::Object { pos }) => *pos,
            None => name.pos,
        };
        ParseDiagnostic::error(
            name.pos,
            DiagnosticKind::DuplicateDefinition,
            format!(
                "`{}` is already defined at {}:{}",
                name.name, earlier.line, earlier.column
            ),
        )
    }

    fn use_point(&mut self, p: &Spanned, diags: &mut Vec<ParseDiagnostic>) {
        match self.env.get_mut(&p.name) {
            Some(Binding::Point { used, .. }) => *used = true,
            Some(Binding::Object { .. }) => diags.push(ParseDiagnostic::error(
                p.pos,
                DiagnosticKind::ExpectedPoint,
                format!("`{}` is an object, expected a point", p.name),
            )),
            None => diags.push(ParseDiagnostic::error(
                p.pos,
                DiagnosticKind::UndefinedName,
                format!("point `{}` is used before it is defined", p.name),
            )),
        }
    }

    /// Returns whether the point was added.
    fn define_point(
        &mut self,
        p: &Spanned,
        constraints: &[Spanned],
        diags: &mut Vec<ParseDiagnostic>,
    ) -> bool {
        let before = diags.len();
        if self.env.contains_key(&p.name) {
            diags.push(self.duplicate(p));
            return false;
        }
        if constraints.len() > 2 {
            diags.push(ParseDiagnostic::error(
                p.pos,
                DiagnosticKind::Arity,
                format!(
                    "point `{}` has {} constraints; at most 2 are allowed",
                    p.name,
                    constraints.len()
                ),
            ));
        }
        for (i, c) in constraints.iter().enumerate() {
            match self.env.get(&c.name) {
                None => diags.push(ParseDiagnostic::error(
                    c.pos,
                    DiagnosticKind::UndefinedName,
                    format!("object `{}` is used before it is defined", c.name),
                )),
                Some(Binding::Point { .. }) => diags.push(ParseDiagnostic::error(
                    c.pos,
                    DiagnosticKind::ConstraintNotObject,
                    format!(
                        "constraint `{}` names a point; constraints must name objects",
                        c.name
                    ),
                )),
                Some(Binding::Object { .. }) => {}
            }
            if constraints[..i].iter().any(|e| e.name == c.name) {
                diags.push(ParseDiagnostic::error(
                    c.pos,
                    DiagnosticKind::RepeatedConstraint,
                    format!("point `{}` is constrained twice by `{}`", p.name, c.name),
                ));
            }
        }
        if diags.len() > before {
            return false;
        }
        let names: Vec<String> = constraints.iter().map(|c| c.name.clone()).collect();
        self.env.insert(
            p.name.clone(),
            Binding::Point {
                constraints: names.clone(),
                pos: p.pos,
                used: false,
            },
        );
        self.statements.push(Statement::Point(PointDecl {
            name: p.name.clone(),
            constraints: names,
        }));
        true
    }
}

/// Canonical text: `// concept:` header, inline shorthand for fresh points
/// at their first use, bare names for reuse, standalone `point(...)`
/// statements only where the shorthand cannot express the order.
pub fn pretty_print(program: &ConceptProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "// concept: {}", program.name);
    let mut pending: Vec<&PointDecl> = Vec::new();
    for stmt in &program.statements {
        match stmt {
            Statement::Point(p) => pending.push(p),
            Statement::Object(o) => {
                let mut uses = vec![o.begin.as_str()];
                if o.end != o.begin {
                    uses.push(o.end.as_str());
                }
                let fresh: Vec<&str> = uses
                    .iter()
                    .copied()
                    .filter(|u| pending.iter().any(|p| p.name == *u))
                    .collect();
                let inline = pending.len() == fresh.len()
                    && pending.iter().zip(&fresh).all(|(p, u)| p.name == *u);
                if !inline {
                    for p in pending.drain(..) {
                        write_point_statement(&mut out, p);
                    }
                }
                let mut printed: Vec<&str> = Vec::new();
                let mut arg = |name: &str| -> String {
                    match pending.iter().find(|p| p.name == name) {
                        Some(p) if !printed.contains(&name) => {
                            printed.push(p.name.as_str());
                            format!("{}({})", p.name, p.constraints.join(", "))
                        }
                        _ => name.to_string(),
                    }
                };
                let begin = arg(&o.begin);
                let end = arg(&o.end);
                let star = if o.visible { "" } else { "*" };
                let _ = writeln!(out, "{}{} = {}({}, {})", o.name, star, o.kind, begin, end);
                pending.clear();
            }
        }
    }
    for p in pending {
        write_point_statement(&mut out, p);
    }
    out
}

fn write_point_statement(out: &mut String, p: &PointDecl) {
    let _ = writeln!(out, "{} = point({})", p.name, p.constraints.join(", "));
}
