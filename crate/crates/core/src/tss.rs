//! Transition system specifications: signature, labels and deduction rules,
//! optionally layered on top of a base specification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::term::{Label, Name, Signature, Term, TermError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Transition {
    pub source: Term,
    pub label: Label,
    pub target: Term,
}

impl Transition {
    pub fn new(source: Term, label: Label, target: Term) -> Self {
        Transition { source, label, target }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.source, self.label, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub name: String,
    pub premises: Vec<Transition>,
    pub conclusion: Transition,
}

impl Rule {
    pub fn new(name: &str, premises: Vec<Transition>, conclusion: Transition) -> Self {
        Rule { name: name.to_string(), premises, conclusion }
    }

    /// Head operator of the conclusion source, if it is an application.
    pub fn defines(&self) -> Option<&Name> {
        self.conclusion.source.head()
    }

    /// Renders `premises |- conclusion` in the DSL's transition syntax.
    pub fn body(&self) -> String {
        let prems: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
        if prems.is_empty() {
            format!("|- {}", self.conclusion)
        } else {
            format!("{} |- {}", prems.join(", "), self.conclusion)
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.body())
    }
}

/// The material contributed by one declaration: its own operators, labels and rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layer {
    pub signature: Signature,
    pub labels: BTreeSet<Label>,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TssError {
    #[error("rule `{rule}`: {source}")]
    Term {
        rule: String,
        #[source]
        source: TermError,
    },
    #[error("rule `{rule}` uses undeclared label `{label}`")]
    UndeclaredLabel { rule: String, label: String },
    #[error("signature conflict: {0}")]
    Signature(TermError),
}

/// A TSS `(Σ, L, D)`. When `base` is present the cumulative components are
/// the unions of the base's and this layer's.
#[derive(Debug, Clone)]
pub struct Tss {
    name: String,
    own: Layer,
    base: Option<Arc<Tss>>,
    signature: Signature,
    labels: BTreeSet<Label>,
    rules: Vec<Rule>,
    by_op: BTreeMap<Name, Vec<usize>>,
}

impl Tss {
    pub fn new(name: &str, layer: Layer) -> Result<Tss, TssError> {
        Self::build(name, None, layer)
    }

    pub fn extend(name: &str, base: Arc<Tss>, layer: Layer) -> Result<Tss, TssError> {
        Self::build(name, Some(base), layer)
    }

    fn build(name: &str, base: Option<Arc<Tss>>, own: Layer) -> Result<Tss, TssError> {
        let (mut signature, mut labels, mut rules) = match &base {
            Some(b) => (b.signature.clone(), b.labels.clone(), b.rules.clone()),
            None => (Signature::new(), BTreeSet::new(), Vec::new()),
        };
        signature = signature.union(&own.signature).map_err(TssError::Signature)?;
        labels.extend(own.labels.iter().cloned());
        for rule in &own.rules {
            check_rule(rule, &signature, &labels)?;
        }
        rules.extend(own.rules.iter().cloned());
        let mut by_op: BTreeMap<Name, Vec<usize>> = BTreeMap::new();
        for (i, r) in rules.iter().enumerate() {
            if let Some(op) = r.defines() {
                by_op.entry(op.clone()).or_default().push(i);
            }
        }
        Ok(Tss { name: name.to_string(), own, base, signature, labels, rules, by_op })
    }

    /// `T0 ∪ T1` where `T1` is given by its own layer.
    pub fn union(name: &str, t0: &Arc<Tss>, t1: &Tss) -> Result<Tss, TssError> {
        Self::extend(name, t0.clone(), t1.own.clone())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> Option<&Arc<Tss>> {
        self.base.as_ref()
    }

    pub fn own(&self) -> &Layer {
        &self.own
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rules_for<'a>(&'a self, op: &str) -> impl Iterator<Item = &'a Rule> + 'a {
        self.by_op
            .get(op)
            .into_iter()
            .flat_map(move |ix| ix.iter().map(move |&i| &self.rules[i]))
    }
}

fn check_rule(rule: &Rule, sig: &Signature, labels: &BTreeSet<Label>) -> Result<(), TssError> {
    for tr in rule.premises.iter().chain(std::iter::once(&rule.conclusion)) {
        for t in [&tr.source, &tr.target] {
            sig.check(t).map_err(|source| TssError::Term { rule: rule.name.clone(), source })?;
        }
        if !labels.contains(&tr.label) {
            return Err(TssError::UndeclaredLabel {
                rule: rule.name.clone(),
                label: tr.label.to_string(),
            });
        }
    }
    Ok(())
}
