use std::collections::BTreeSet;
use std::sync::Arc;

use super::lexer::{lex, Tok};
use super::{EqDecl, ParseError, ParseErrorKind, Span, SpecDocument, TssDecl};
use crate::term::{name, Equation, Label, Signature, Term};
use crate::tss::{Layer, Rule, Transition, Tss, TssError};

/// A term before identifiers are classified as operators or variables.
#[derive(Debug, Clone)]
struct RawTerm {
    ident: String,
    args: Option<Vec<RawTerm>>,
    span: Span,
}

#[derive(Debug, Clone)]
struct RawTrans {
    source: RawTerm,
    label: (String, Span),
    target: RawTerm,
}

struct RawRule {
    name: String,
    span: Span,
    forall: Option<(String, Option<Vec<(String, Span)>>)>,
    premises: Vec<RawTrans>,
    conclusion: RawTrans,
}

pub(crate) struct Parser<'d> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    doc: &'d mut SpecDocument,
}

fn err(kind: ParseErrorKind, span: Span) -> ParseError {
    ParseError { kind, span }
}

impl<'d> Parser<'d> {
    pub(crate) fn new(text: &str, doc: &'d mut SpecDocument) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0, doc })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn advance(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        err(
            ParseErrorKind::Unexpected { expected: expected.into(), found: self.peek().describe() },
            self.span(),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.advance().1;
                Ok((s, sp))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Span, ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.advance().1),
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    /// Rule and equation names: a string or a bare identifier.
    fn decl_name(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Str(s) => Ok((s, self.advance().1)),
            Tok::Ident(s) => Ok((s, self.advance().1)),
            _ => Err(self.unexpected("name")),
        }
    }

    pub(crate) fn document(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Tok::Eof => return Ok(()),
                Tok::Ident(s) if s == "tss" => self.tss_decl()?,
                Tok::Ident(s) if s == "eq" => self.eq_decl()?,
                _ => return Err(self.unexpected("`tss` or `eq`")),
            }
        }
    }

    fn tss_decl(&mut self) -> Result<(), ParseError> {
        let start = self.keyword("tss")?;
        let (tname, tspan) = self.ident()?;
        if self.doc.systems.contains_key(&tname) {
            return Err(err(ParseErrorKind::DuplicateTss(tname), tspan));
        }
        let extends = if self.at_keyword("extends") {
            self.advance();
            let (b, bspan) = self.ident()?;
            if !self.doc.systems.contains_key(&b) {
                return Err(err(ParseErrorKind::UndeclaredBase(b), bspan));
            }
            Some(b)
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        self.keyword("labels")?;
        self.expect(Tok::Colon)?;
        let mut labels = Vec::new();
        if let Tok::Ident(_) = self.peek() {
            labels.push(Label::new(&self.ident()?.0));
            while *self.peek() == Tok::Comma {
                self.advance();
                labels.push(Label::new(&self.ident()?.0));
            }
        }
        self.expect(Tok::Semi)?;

        let base = extends.as_ref().map(|b| self.doc.systems[b].clone());
        let mut sig = base.as_ref().map(|b| b.signature().clone()).unwrap_or_default();
        let mut all_labels: BTreeSet<Label> =
            base.as_ref().map(|b| b.labels().clone()).unwrap_or_default();
        all_labels.extend(labels.iter().cloned());

        let mut ops: Vec<(String, usize)> = Vec::new();
        let mut own_sig = Signature::new();
        let mut raw_rules = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::Ident(s) if s == "op" => {
                    self.advance();
                    let (op, ospan) = self.ident()?;
                    self.expect(Tok::Slash)?;
                    let arity = match self.advance() {
                        (Tok::Nat(n), _) => n,
                        (t, sp) => {
                            return Err(err(
                                ParseErrorKind::Unexpected {
                                    expected: "arity".into(),
                                    found: t.describe(),
                                },
                                sp,
                            ))
                        }
                    };
                    self.expect(Tok::Semi)?;
                    if let Some(first) = sig.arity(&op) {
                        if first != arity {
                            return Err(err(
                                ParseErrorKind::ConflictingArity { op, first, second: arity },
                                ospan,
                            ));
                        }
                    }
                    sig.declare(&op, arity).expect("checked above");
                    own_sig.declare(&op, arity).expect("checked above");
                    if !ops.iter().any(|(o, _)| *o == op) {
                        ops.push((op, arity));
                    }
                }
                Tok::Ident(s) if s == "rule" => raw_rules.push(self.raw_rule()?),
                _ => return Err(self.unexpected("`op`, `rule` or `}`")),
            }
        }

        let mut rules = Vec::new();
        for rr in raw_rules {
            self.doc.source_spans.insert(format!("rule:{tname}/{}", rr.name), rr.span);
            rules.extend(expand_rule(&rr, &sig, &all_labels)?);
        }
        let layer = Layer { signature: own_sig, labels: labels.iter().cloned().collect(), rules: rules.clone() };
        let tss = match base {
            Some(b) => Tss::extend(&tname, b, layer),
            None => Tss::new(&tname, layer),
        }
        .map_err(|e| tss_error(e, tspan))?;
        self.doc.source_spans.insert(format!("tss:{tname}"), start);
        self.doc.systems.insert(tname.clone(), Arc::new(tss));
        self.doc.tss_decls.push(TssDecl { name: tname, extends, labels, ops, rules });
        Ok(())
    }

    fn raw_rule(&mut self) -> Result<RawRule, ParseError> {
        let span = self.keyword("rule")?;
        let (rname, _) = self.decl_name()?;
        let forall = if self.at_keyword("forall") {
            self.advance();
            let (var, _) = self.ident()?;
            let range = if self.at_keyword("in") {
                self.advance();
                self.expect(Tok::LBrace)?;
                let mut ls = vec![self.ident()?];
                while *self.peek() == Tok::Comma {
                    self.advance();
                    ls.push(self.ident()?);
                }
                self.expect(Tok::RBrace)?;
                Some(ls)
            } else {
                None
            };
            Some((var, range))
        } else {
            None
        };
        self.expect(Tok::Colon)?;
        let mut premises = Vec::new();
        if *self.peek() != Tok::Turnstile {
            premises.push(self.raw_trans()?);
            while *self.peek() == Tok::Comma {
                self.advance();
                premises.push(self.raw_trans()?);
            }
        }
        self.expect(Tok::Turnstile)?;
        let conclusion = self.raw_trans()?;
        self.expect(Tok::Semi)?;
        Ok(RawRule { name: rname, span, forall, premises, conclusion })
    }

    fn raw_trans(&mut self) -> Result<RawTrans, ParseError> {
        let source = self.raw_term()?;
        self.expect(Tok::Dash)?;
        let label = self.ident()?;
        self.expect(Tok::Arrow)?;
        let target = self.raw_term()?;
        Ok(RawTrans { source, label, target })
    }

    fn raw_term(&mut self) -> Result<RawTerm, ParseError> {
        let (ident, span) = self.ident()?;
        if *self.peek() != Tok::LParen {
            return Ok(RawTerm { ident, args: None, span });
        }
        self.advance();
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.raw_term()?);
            while *self.peek() == Tok::Comma {
                self.advance();
                args.push(self.raw_term()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(RawTerm { ident, args: Some(args), span })
    }

    fn eq_decl(&mut self) -> Result<(), ParseError> {
        let span = self.keyword("eq")?;
        let (ename, _) = self.decl_name()?;
        self.expect(Tok::Colon)?;
        let lhs = self.raw_term()?;
        self.expect(Tok::Eq)?;
        let rhs = self.raw_term()?;
        let pinned = if *self.peek() == Tok::At {
            self.advance();
            let (t, tspan) = self.ident()?;
            if !self.doc.systems.contains_key(&t) {
                return Err(err(ParseErrorKind::UndeclaredBase(t), tspan));
            }
            Some(t)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        let sig = match &pinned {
            Some(t) => self.doc.systems[t].signature().clone(),
            None => self.doc.combined_signature(),
        };
        let equation = Equation {
            name: if ename.is_empty() { None } else { Some(ename) },
            lhs: resolve(&lhs, &sig)?,
            rhs: resolve(&rhs, &sig)?,
        };
        self.doc.source_spans.insert(format!("eq:{}", self.doc.equations.len()), span);
        self.doc.equations.push(EqDecl { equation, tss: pinned });
        Ok(())
    }
}

fn tss_error(e: TssError, span: Span) -> ParseError {
    let kind = match e {
        TssError::UndeclaredLabel { label, .. } => ParseErrorKind::UndeclaredLabel(label),
        other => ParseErrorKind::Invalid(other.to_string()),
    };
    err(kind, span)
}

fn resolve(raw: &RawTerm, sig: &Signature) -> Result<Term, ParseError> {
    match (&raw.args, sig.arity(&raw.ident)) {
        (None, None) => Ok(Term::Var(name(&raw.ident))),
        (Some(_), None) => Err(err(ParseErrorKind::UndeclaredOperator(raw.ident.clone()), raw.span)),
        (args, Some(arity)) => {
            let args = args.as_deref().unwrap_or(&[]);
            if args.len() != arity {
                return Err(err(
                    ParseErrorKind::ArityMismatch { op: raw.ident.clone(), expected: arity, found: args.len() },
                    raw.span,
                ));
            }
            let args = args.iter().map(|a| resolve(a, sig)).collect::<Result<_, _>>()?;
            Ok(Term::App(name(&raw.ident), args))
        }
    }
}

fn expand_rule(rr: &RawRule, sig: &Signature, labels: &BTreeSet<Label>) -> Result<Vec<Rule>, ParseError> {
    let resolve_trans = |t: &RawTrans, meta: Option<(&str, &str)>| -> Result<Transition, ParseError> {
        let label = match meta {
            Some((var, l)) if t.label.0 == var => l.to_string(),
            _ => t.label.0.clone(),
        };
        let label = Label::new(&label);
        if !labels.contains(&label) {
            return Err(err(ParseErrorKind::UndeclaredLabel(label.to_string()), t.label.1));
        }
        Ok(Transition::new(resolve(&t.source, sig)?, label, resolve(&t.target, sig)?))
    };
    let build = |meta: Option<(&str, &str)>, name: String| -> Result<Rule, ParseError> {
        let premises = rr.premises.iter().map(|p| resolve_trans(p, meta)).collect::<Result<_, _>>()?;
        Ok(Rule { name, premises, conclusion: resolve_trans(&rr.conclusion, meta)? })
    };
    match &rr.forall {
        None => Ok(vec![build(None, rr.name.clone())?]),
        Some((var, range)) => {
            let range: Vec<String> = match range {
                Some(ls) => {
                    for (l, sp) in ls {
                        if !labels.contains(&Label::new(l)) {
                            return Err(err(ParseErrorKind::UndeclaredLabel(l.clone()), *sp));
                        }
                    }
                    ls.iter().map(|(l, _)| l.clone()).collect()
                }
                None => labels.iter().map(|l| l.to_string()).collect(),
            };
            range
                .iter()
                .map(|l| build(Some((var, l)), format!("{}[{}]", rr.name, l)))
                .collect()
        }
    }
}

pub(crate) fn parse_standalone_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut scratch = SpecDocument::default();
    let mut p = Parser::new(text, &mut scratch)?;
    let raw = p.raw_term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of term"));
    }
    resolve(&raw, sig)
}
