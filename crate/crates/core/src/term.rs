//! Signatures, open terms, substitutions and equations.
//!
//! Terms are plain immutable trees. Variables and operator applications are
//! distinguished structurally; the concrete syntax decides which identifiers
//! are operators by looking them up in the ambient [`Signature`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Interned-ish identifier used for variables and operators.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("operator `{op}` expects {expected} argument(s), got {found}")]
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("operator `{op}` declared with arity {first} and again with arity {second}")]
    ConflictingArity {
        op: String,
        first: usize,
        second: usize,
    },
}

/// A transition label.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Name);

impl Label {
    pub fn new(s: &str) -> Self {
        Label(name(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Operator names with fixed arities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    ops: BTreeMap<Name, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ops<'a>(ops: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self, TermError> {
        let mut sig = Signature::new();
        for (op, arity) in ops {
            sig.declare(op, arity)?;
        }
        Ok(sig)
    }

    /// Adds an operator. Re-declaring with the same arity is a no-op.
    pub fn declare(&mut self, op: &str, arity: usize) -> Result<(), TermError> {
        match self.ops.get(op) {
            Some(&a) if a != arity => Err(TermError::ConflictingArity {
                op: op.to_string(),
                first: a,
                second: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.ops.insert(name(op), arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, op: &str) -> Option<usize> {
        self.ops.get(op).copied()
    }

    pub fn contains(&self, op: &str) -> bool {
        self.ops.contains_key(op)
    }

    pub fn ops(&self) -> impl Iterator<Item = (&Name, usize)> {
        self.ops.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn has_constants(&self) -> bool {
        self.ops.values().any(|&a| a == 0)
    }

    /// Union of two signatures; fails if a shared operator disagrees on arity.
    pub fn union(&self, other: &Signature) -> Result<Signature, TermError> {
        let mut out = self.clone();
        for (op, arity) in other.ops() {
            out.declare(op, arity)?;
        }
        Ok(out)
    }

    pub fn check(&self, t: &Term) -> Result<(), TermError> {
        match t {
            Term::Var(_) => Ok(()),
            Term::App(op, args) => {
                let expected = self
                    .arity(op)
                    .ok_or_else(|| TermError::UnknownOperator(op.to_string()))?;
                if expected != args.len() {
                    return Err(TermError::ArityMismatch {
                        op: op.to_string(),
                        expected,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.check(a))
            }
        }
    }
}

/// An open term: a variable or an operator applied to arguments.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    App(Name, Vec<Term>),
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(name(x))
    }

    pub fn constant(op: &str) -> Term {
        Term::App(name(op), Vec::new())
    }

    pub fn app(op: &str, args: Vec<Term>) -> Term {
        Term::App(name(op), args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(x) => Some(x),
            Term::App(..) => None,
        }
    }

    pub fn head(&self) -> Option<&Name> {
        match self {
            Term::App(op, _) => Some(op),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Variables in order of first (leftmost, depth-first) occurrence.
    pub fn vars_in_order(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.push_vars_in_order(&mut out);
        out
    }

    pub(crate) fn push_vars_in_order(&self, out: &mut Vec<Name>) {
        match self {
            Term::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.push_vars_in_order(out)),
        }
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_closed),
        }
    }

    /// Number of operator nodes; variables cost nothing.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// True iff no variable occurs twice.
    pub fn is_linear(&self) -> bool {
        fn walk(t: &Term, seen: &mut BTreeSet<Name>) -> bool {
            match t {
                Term::Var(x) => seen.insert(x.clone()),
                Term::App(_, args) => args.iter().all(|a| walk(a, seen)),
            }
        }
        walk(self, &mut BTreeSet::new())
    }

    pub fn apply(&self, sigma: &Substitution) -> Term {
        match self {
            Term::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| a.apply(sigma)).collect()),
        }
    }

    /// Renames variables; unmapped variables are kept.
    pub fn rename(&self, map: &BTreeMap<Name, Name>) -> Term {
        match self {
            Term::Var(x) => Term::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }

    /// All subterm positions in pre-order. A position is the path of argument indices.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(path.clone());
            for (i, a) in t.args().iter().enumerate() {
                path.push(i);
                walk(a, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn at(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args().get(i)?.at(rest),
        }
    }

    pub fn replace_at(&self, pos: &[usize], new: Term) -> Term {
        match (pos.split_first(), self) {
            (None, _) => new,
            (Some((&i, rest)), Term::App(op, args)) => {
                let mut args = args.clone();
                args[i] = args[i].replace_at(rest, new);
                Term::App(op.clone(), args)
            }
            (Some(_), Term::Var(_)) => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(op, args) if args.is_empty() => f.write_str(op),
            Term::App(op, args) => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Finite map from variables to terms, applied homomorphically.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    map: BTreeMap<Name, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: Name, t: Term) {
        self.map.insert(x, t);
    }

    pub fn with(mut self, x: &str, t: Term) -> Self {
        self.insert(name(x), t);
        self
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.map.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// `self.then(other)` behaves like applying `self` first, then `other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut map: BTreeMap<Name, Term> =
            self.map.iter().map(|(k, v)| (k.clone(), v.apply(other))).collect();
        for (k, v) in &other.map {
            map.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Substitution { map }
    }

    pub fn is_closing_for(&self, t: &Term) -> bool {
        t.apply(self).is_closed()
    }
}

impl FromIterator<(Name, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Name, Term)>>(iter: I) -> Self {
        Substitution { map: iter.into_iter().collect() }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} := {t}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Substitution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.map.iter().map(|(k, v)| (&**k, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub name: Option<String>,
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Equation { name: None, lhs, rhs }
    }

    pub fn named(name: &str, lhs: Term, rhs: Term) -> Self {
        Equation { name: Some(name.to_string()), lhs, rhs }
    }

    /// Neither side is a bare variable.
    pub fn is_proper(&self) -> bool {
        !self.lhs.is_var() && !self.rhs.is_var()
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.to_string())
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Renames variables to `v0, v1, ...` by first occurrence.
pub fn canonical_rename(t: &Term) -> (Term, BTreeMap<Name, Name>) {
    let map: BTreeMap<Name, Name> = t
        .vars_in_order()
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, name(&format!("v{i}"))))
        .collect();
    (t.rename(&map), map)
}

/// Terms over `sig` with variables drawn from `vars`, grouped by exact size.
///
/// Size counts operator nodes, so variables live at size 0 and constants at
/// size 1. Within a size the order is: operator name, then the split of the
/// remaining size among arguments (lexicographic), then arguments
/// lexicographically.
pub struct TermEnumerator<'a> {
    sig: &'a Signature,
    by_size: Vec<Vec<Term>>,
}

impl<'a> TermEnumerator<'a> {
    pub fn new(sig: &'a Signature, vars: &[Name]) -> Self {
        let level0 = vars.iter().map(|x| Term::Var(x.clone())).collect();
        TermEnumerator { sig, by_size: vec![level0] }
    }

    pub fn of_size(&mut self, n: usize) -> &[Term] {
        while self.by_size.len() <= n {
            let k = self.by_size.len();
            let level = self.build(k);
            self.by_size.push(level);
        }
        &self.by_size[n]
    }

    pub fn up_to(&mut self, max_size: usize) -> Vec<Term> {
        (0..=max_size).flat_map(|n| self.of_size(n).to_vec()).collect()
    }

    fn build(&self, n: usize) -> Vec<Term> {
        let mut out = Vec::new();
        for (op, arity) in self.sig.ops() {
            if arity == 0 {
                if n == 1 {
                    out.push(Term::App(op.clone(), Vec::new()));
                }
                continue;
            }
            for split in compositions(n - 1, arity) {
                let pools: Vec<&Vec<Term>> = split.iter().map(|&s| &self.by_size[s]).collect();
                if pools.iter().any(|p| p.is_empty()) {
                    continue;
                }
                for args in product(&pools) {
                    out.push(Term::App(op.clone(), args));
                }
            }
        }
        out
    }
}

/// Ordered ways of writing `total` as a sum of `parts` non-negative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Cartesian product; the first pool varies slowest.
pub(crate) fn product<T: Clone>(pools: &[&Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for pool in pools {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for prefix in &out {
            for item in pool.iter() {
                let mut v = prefix.clone();
                v.push(item.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Every closed term of size `1..=max_size`, size-lexicographic, without repeats.
pub fn enumerate_closed_terms(sig: &Signature, max_size: usize) -> Vec<Term> {
    let mut e = TermEnumerator::new(sig, &[]);
    e.up_to(max_size)
}

/// Every term over `sig` and `vars` with at most `max_size` operator nodes.
pub fn enumerate_terms(sig: &Signature, vars: &[Name], max_size: usize) -> Vec<Term> {
    let mut e = TermEnumerator::new(sig, vars);
    e.up_to(max_size)
}
