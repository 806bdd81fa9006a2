//! Textual DSL for transition system specifications and equations.
//!
//! ```text
//! tss Choice {
//!   labels: a, b;
//!   op zero/0;
//!   op plus/2;
//!   rule "plus_l" forall l: x -l-> x' |- plus(x, y) -l-> x';
//!   rule "plus_r" forall l: y -l-> y' |- plus(x, y) -l-> y';
//! }
//! tss ChoiceWithA extends Choice {
//!   labels: a;
//!   op a/0;
//!   rule "a": |- a -a-> zero;
//! }
//! eq "comm": plus(x, y) = plus(y, x) @Choice;
//! ```
//!
//! Identifiers declared as operators in the relevant signature are operators;
//! every other identifier in term position is a variable. A `forall l` rule
//! is expanded into one rule per label (of the TSS, or of the listed set).

mod lexer;
mod parser;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::term::{Equation, Label, Signature};
use crate::tss::{Rule, Tss};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("lexical error: {0}")]
    Lexical(String),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("operator `{op}` expects {expected} argument(s), got {found}")]
    ArityMismatch { op: String, expected: usize, found: usize },
    #[error("undeclared operator `{0}`")]
    UndeclaredOperator(String),
    #[error("undeclared label `{0}`")]
    UndeclaredLabel(String),
    #[error("undeclared base TSS `{0}`")]
    UndeclaredBase(String),
    #[error("operator `{op}` redeclared with arity {second} (previously {first})")]
    ConflictingArity { op: String, first: usize, second: usize },
    #[error("TSS `{0}` declared twice")]
    DuplicateTss(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
}

/// One `tss` block: only what it declares itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TssDecl {
    pub name: String,
    pub extends: Option<String>,
    pub labels: Vec<Label>,
    pub ops: Vec<(String, usize)>,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EqDecl {
    #[serde(flatten)]
    pub equation: Equation,
    pub tss: Option<String>,
}

/// A parsed document. Equality ignores source spans.
#[derive(Debug, Clone, Default)]
pub struct SpecDocument {
    pub tss_decls: Vec<TssDecl>,
    pub equations: Vec<EqDecl>,
    /// Keys are `tss:<name>`, `rule:<tss>/<rule>` and `eq:<index>`.
    pub source_spans: BTreeMap<String, Span>,
    systems: BTreeMap<String, Arc<Tss>>,
}

impl PartialEq for SpecDocument {
    fn eq(&self, other: &Self) -> bool {
        self.tss_decls == other.tss_decls && self.equations == other.equations
    }
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<SpecDocument, ParseError> {
        let mut doc = SpecDocument::default();
        doc.parse_more(text)?;
        Ok(doc)
    }

    /// Appends the declarations of `text`; earlier declarations are visible to it.
    /// On error the document is left unchanged.
    pub fn parse_more(&mut self, text: &str) -> Result<(), ParseError> {
        let mut next = self.clone();
        parser::Parser::new(text, &mut next)?.document()?;
        *self = next;
        Ok(())
    }

    pub fn tss(&self, name: &str) -> Option<&Arc<Tss>> {
        self.systems.get(name)
    }

    pub fn tss_names(&self) -> impl Iterator<Item = &str> {
        self.tss_decls.iter().map(|d| d.name.as_str())
    }

    /// Union of every declared signature; the first declaration of a name wins.
    pub fn combined_signature(&self) -> Signature {
        let mut sig = Signature::new();
        for t in self.systems.values() {
            for (op, arity) in t.signature().ops() {
                if !sig.contains(op) {
                    let _ = sig.declare(op, arity);
                }
            }
        }
        sig
    }

    /// Canonical pretty-printed form; `parse(print(d)) == d`.
    pub fn print(&self) -> String {
        let mut out = String::from("# opensos specification\n");
        for d in &self.tss_decls {
            out.push('\n');
            match &d.extends {
                Some(b) => writeln!(out, "tss {} extends {} {{", d.name, b),
                None => writeln!(out, "tss {} {{", d.name),
            }
            .unwrap();
            let labels: Vec<&str> = d.labels.iter().map(Label::as_str).collect();
            if labels.is_empty() {
                out.push_str("  labels: ;\n");
            } else {
                writeln!(out, "  labels: {};", labels.join(", ")).unwrap();
            }
            for (op, arity) in &d.ops {
                writeln!(out, "  op {op}/{arity};").unwrap();
            }
            for r in &d.rules {
                writeln!(out, "  rule {}: {};", quote(&r.name), r.body()).unwrap();
            }
            out.push_str("}\n");
        }
        if !self.equations.is_empty() {
            out.push('\n');
        }
        for e in &self.equations {
            let name = e.equation.name.as_deref().unwrap_or("");
            write!(out, "eq {}: {} = {}", quote(name), e.equation.lhs, e.equation.rhs).unwrap();
            if let Some(t) = &e.tss {
                write!(out, " @{t}").unwrap();
            }
            out.push_str(";\n");
        }
        out
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

struct RuleJson<'a>(&'a Rule);

impl Serialize for RuleJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = self.0;
        let mut st = s.serialize_struct("Rule", 3)?;
        st.serialize_field("name", &r.name)?;
        let prems: Vec<String> = r.premises.iter().map(|p| p.to_string()).collect();
        st.serialize_field("premises", &prems)?;
        st.serialize_field("conclusion", &r.conclusion.to_string())?;
        st.end()
    }
}

struct OpsJson<'a>(&'a [(String, usize)]);

impl Serialize for OpsJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (op, a) in self.0 {
            m.serialize_entry(op, a)?;
        }
        m.end()
    }
}

impl Serialize for TssDecl {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TssDecl", 5)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("extends", &self.extends)?;
        st.serialize_field("labels", &self.labels)?;
        st.serialize_field("ops", &OpsJson(&self.ops))?;
        let rules: Vec<RuleJson<'_>> = self.rules.iter().map(RuleJson).collect();
        st.serialize_field("rules", &rules)?;
        st.end()
    }
}

impl Serialize for SpecDocument {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SpecDocument", 2)?;
        st.serialize_field("tss", &self.tss_decls)?;
        st.serialize_field("eqs", &self.equations)?;
        st.end()
    }
}

/// Parses a single term against a signature (used for command-line terms).
pub fn parse_term(text: &str, sig: &Signature) -> Result<crate::term::Term, ParseError> {
    parser::parse_standalone_term(text, sig)
}
