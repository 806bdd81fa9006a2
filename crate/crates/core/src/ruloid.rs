//! Provable ruloids of open terms and the induced transition relation on
//! closed terms.
//!
//! A *most general* ruloid of `t` has pairwise distinct hypothesis targets
//! that are fresh for `t`; every other provable ruloid is an instance. Fresh
//! targets are named `h0, h1, ...` after sorting hypotheses by (position of
//! the source variable in `t`, label, first occurrence of the target in the
//! conclusion target), so the set returned for a term is canonical.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::gsos::{destructure, FormatError, FormatReport, GsosRule};
use crate::term::{name, product, Label, Name, Substitution, Term};
use crate::tss::Tss;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypothesis {
    pub source: Name,
    pub label: Label,
    pub target: Name,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.source, self.label, self.target)
    }
}

impl Serialize for Hypothesis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Ruloid {
    pub hypotheses: Vec<Hypothesis>,
    pub source: Term,
    pub label: Label,
    pub target: Term,
}

impl Ruloid {
    pub fn hypothesis_targets(&self) -> impl Iterator<Item = &Name> {
        self.hypotheses.iter().map(|h| &h.target)
    }

    /// Renames hypothesis targets (and their occurrences in the target).
    pub fn rename_targets(&self, map: &BTreeMap<Name, Name>) -> Ruloid {
        Ruloid {
            hypotheses: self
                .hypotheses
                .iter()
                .map(|h| Hypothesis {
                    source: h.source.clone(),
                    label: h.label.clone(),
                    target: map.get(&h.target).cloned().unwrap_or_else(|| h.target.clone()),
                })
                .collect(),
            source: self.source.clone(),
            label: self.label.clone(),
            target: self.target.rename(map),
        }
    }
}

impl fmt::Display for Ruloid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hyps: Vec<String> = self.hypotheses.iter().map(|h| h.to_string()).collect();
        if !hyps.is_empty() {
            write!(f, "{} ", hyps.join(", "))?;
        }
        write!(f, "|- {} -{}-> {}", self.source, self.label, self.target)
    }
}

/// A finite fragment of the LTS reachable from a closed term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<Term>,
    pub edges: Vec<(usize, Label, usize)>,
    /// False when the state cap stopped the exploration.
    pub complete: bool,
}

impl Lts {
    pub fn index_of(&self, t: &Term) -> Option<usize> {
        self.states.iter().position(|s| s == t)
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = (&Label, usize)> {
        self.edges.iter().filter(move |e| e.0 == i).map(|e| (&e.1, e.2))
    }
}

impl Serialize for Lts {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Lts", 3)?;
        st.serialize_field("states", &self.states)?;
        let edges: Vec<(String, &str, String)> = self
            .edges
            .iter()
            .map(|(a, l, b)| (self.states[*a].to_string(), l.as_str(), self.states[*b].to_string()))
            .collect();
        st.serialize_field("transitions", &edges)?;
        st.serialize_field("complete", &self.complete)?;
        st.end()
    }
}

type Moves = Arc<Vec<(Label, Term)>>;

/// A positive GSOS TSS together with caches for its transition relation and
/// most-general ruloids.
pub struct Semantics {
    tss: Arc<Tss>,
    rules: BTreeMap<Name, Vec<GsosRule>>,
    labels: Vec<Label>,
    moves: RwLock<HashMap<Term, Moves>>,
    ruloids: RwLock<HashMap<Term, Arc<Vec<Ruloid>>>>,
}

impl fmt::Debug for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Semantics").field("tss", &self.tss.name()).finish()
    }
}

/// Intermediate ruloid whose fresh targets carry `#k` names.
#[derive(Clone)]
struct Raw {
    hyps: Vec<Hypothesis>,
    label: Label,
    target: Term,
}

impl Semantics {
    pub fn new(tss: Arc<Tss>) -> Result<Semantics, FormatError> {
        let mut rules: BTreeMap<Name, Vec<GsosRule>> = BTreeMap::new();
        let mut violations = Vec::new();
        for r in tss.rules() {
            match destructure(r) {
                Ok(g) => rules.entry(g.op.clone()).or_default().push(g),
                Err(v) => violations.extend(v),
            }
        }
        if !violations.is_empty() {
            return Err(FormatError(FormatReport { violations }));
        }
        let labels = tss.labels().iter().cloned().collect();
        Ok(Semantics {
            tss,
            rules,
            labels,
            moves: RwLock::default(),
            ruloids: RwLock::default(),
        })
    }

    pub fn tss(&self) -> &Arc<Tss> {
        &self.tss
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn rules_for(&self, op: &str) -> &[GsosRule] {
        self.rules.get(op).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Outgoing transitions of a closed term, sorted and without duplicates.
    pub fn transitions(&self, p: &Term) -> Moves {
        debug_assert!(p.is_closed(), "transitions of open term {p}");
        if let Some(m) = self.moves.read().unwrap().get(p) {
            return m.clone();
        }
        let mut out = BTreeSet::new();
        if let Term::App(op, args) = p {
            for r in self.rules_for(op) {
                let pools: Vec<Vec<Term>> = r
                    .premises
                    .iter()
                    .map(|pr| {
                        self.transitions(&args[pr.index])
                            .iter()
                            .filter(|(l, _)| *l == pr.label)
                            .map(|(_, q)| q.clone())
                            .collect()
                    })
                    .collect();
                let refs: Vec<&Vec<Term>> = pools.iter().collect();
                for choice in product(&refs) {
                    let mut sigma: Substitution =
                        r.args.iter().cloned().zip(args.iter().cloned()).collect();
                    for (pr, q) in r.premises.iter().zip(choice) {
                        sigma.insert(pr.target.clone(), q);
                    }
                    out.insert((r.label.clone(), r.target.apply(&sigma)));
                }
            }
        }
        let m: Moves = Arc::new(out.into_iter().collect());
        self.moves.write().unwrap().insert(p.clone(), m.clone());
        m
    }

    pub fn initial_actions(&self, p: &Term) -> BTreeSet<Label> {
        self.transitions(p).iter().map(|(l, _)| l.clone()).collect()
    }

    /// Breadth-first exploration from `p`, expanding at most `state_cap` states.
    pub fn explore(&self, p: &Term, state_cap: usize) -> Lts {
        let mut index: HashMap<Term, usize> = HashMap::new();
        let mut states = vec![p.clone()];
        index.insert(p.clone(), 0);
        let mut edges = Vec::new();
        let mut complete = true;
        let mut next = 0;
        while next < states.len() {
            let s = states[next].clone();
            for (l, q) in self.transitions(&s).iter() {
                let j = match index.get(q) {
                    Some(&j) => j,
                    None if states.len() < state_cap => {
                        states.push(q.clone());
                        index.insert(q.clone(), states.len() - 1);
                        states.len() - 1
                    }
                    None => {
                        complete = false;
                        continue;
                    }
                };
                edges.push((next, l.clone(), j));
            }
            next += 1;
        }
        Lts { states, edges, complete }
    }

    /// Most-general ruloids with targets named `#0, #1, ...` (cached).
    pub(crate) fn ruloids_raw(&self, t: &Term) -> Arc<Vec<Ruloid>> {
        if let Some(r) = self.ruloids.read().unwrap().get(t) {
            return r.clone();
        }
        let mut counter = 0;
        let order = t.vars_in_order();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for raw in self.generate(t, None, &mut counter) {
            let r = canonicalize(raw, t, &order);
            if seen.insert(r.clone()) {
                out.push(r);
            }
        }
        let out = Arc::new(out);
        self.ruloids.write().unwrap().insert(t.clone(), out.clone());
        out
    }

    /// Most-general ruloids of `t`; targets avoid the variables of `t`.
    pub fn ruloids(&self, t: &Term) -> Vec<Ruloid> {
        self.ruloids_avoiding(t, &BTreeSet::new())
    }

    /// Most-general ruloids of `t` whose targets also avoid `avoid`.
    pub fn ruloids_avoiding(&self, t: &Term, avoid: &BTreeSet<Name>) -> Vec<Ruloid> {
        let mut taken = t.vars();
        taken.extend(avoid.iter().cloned());
        self.ruloids_raw(t)
            .iter()
            .map(|r| {
                let mut map = BTreeMap::new();
                let mut k = 0;
                for h in r.hypothesis_targets() {
                    let fresh = loop {
                        let cand = name(&format!("h{k}"));
                        k += 1;
                        if !taken.contains(&cand) {
                            break cand;
                        }
                    };
                    map.insert(h.clone(), fresh);
                }
                r.rename_targets(&map)
            })
            .collect()
    }

    fn generate(&self, t: &Term, want: Option<&Label>, counter: &mut usize) -> Vec<Raw> {
        let keep = |l: &Label| want.is_none_or(|w| w == l);
        match t {
            Term::Var(x) => self
                .labels
                .iter()
                .filter(|l| keep(l))
                .map(|l| {
                    let h = name(&format!("#{counter}"));
                    *counter += 1;
                    Raw {
                        hyps: vec![Hypothesis { source: x.clone(), label: l.clone(), target: h.clone() }],
                        label: l.clone(),
                        target: Term::Var(h),
                    }
                })
                .collect(),
            _ if t.is_closed() => self
                .transitions(t)
                .iter()
                .filter(|(l, _)| keep(l))
                .map(|(l, q)| Raw { hyps: Vec::new(), label: l.clone(), target: q.clone() })
                .collect(),
            Term::App(op, args) => {
                let mut out = Vec::new();
                for r in self.rules_for(op).iter().filter(|r| keep(&r.label)) {
                    let pools: Vec<Vec<Raw>> = r
                        .premises
                        .iter()
                        .map(|pr| self.generate(&args[pr.index], Some(&pr.label), counter))
                        .collect();
                    let refs: Vec<&Vec<Raw>> = pools.iter().collect();
                    for choice in product(&refs) {
                        let mut sigma: Substitution =
                            r.args.iter().cloned().zip(args.iter().cloned()).collect();
                        let mut hyps = Vec::new();
                        for (pr, sub) in r.premises.iter().zip(choice) {
                            sigma.insert(pr.target.clone(), sub.target);
                            hyps.extend(sub.hyps);
                        }
                        out.push(Raw { hyps, label: r.label.clone(), target: r.target.apply(&sigma) });
                    }
                }
                out
            }
        }
    }

    /// Applies a ruloid to a closing substitution of its source, choosing the
    /// first transition for each hypothesis. `None` if some hypothesis has no
    /// matching transition.
    pub fn instantiate_ruloid(&self, r: &Ruloid, sigma: &Substitution) -> Option<(Label, Term)> {
        let mut s = sigma.clone();
        for h in &r.hypotheses {
            let p = s.get(&h.source)?.clone();
            let (_, q) = self.transitions(&p).iter().find(|(l, _)| *l == h.label)?.clone();
            s.insert(h.target.clone(), q);
        }
        Some((r.label.clone(), r.target.apply(&s)))
    }

    /// Every transition obtainable from the ruloid under `sigma`.
    pub fn instantiate_all(&self, r: &Ruloid, sigma: &Substitution) -> BTreeSet<(Label, Term)> {
        let pools: Vec<Vec<Term>> = r
            .hypotheses
            .iter()
            .map(|h| match sigma.get(&h.source) {
                Some(p) => self
                    .transitions(p)
                    .iter()
                    .filter(|(l, _)| *l == h.label)
                    .map(|(_, q)| q.clone())
                    .collect(),
                None => Vec::new(),
            })
            .collect();
        let refs: Vec<&Vec<Term>> = pools.iter().collect();
        product(&refs)
            .into_iter()
            .map(|choice| {
                let mut s = sigma.clone();
                for (h, q) in r.hypotheses.iter().zip(choice) {
                    s.insert(h.target.clone(), q);
                }
                (r.label.clone(), r.target.apply(&s))
            })
            .collect()
    }
}

/// Sorts hypotheses canonically and renames their targets to `#0, #1, ...`.
fn canonicalize(raw: Raw, source: &Term, order: &[Name]) -> Ruloid {
    let occurrence = raw.target.vars_in_order();
    let key = |h: &Hypothesis| {
        (
            order.iter().position(|x| *x == h.source).unwrap_or(usize::MAX),
            h.label.clone(),
            occurrence.iter().position(|x| *x == h.target).unwrap_or(usize::MAX),
        )
    };
    let mut hyps = raw.hyps;
    hyps.sort_by_key(|h| key(h));
    let map: BTreeMap<Name, Name> =
        hyps.iter().enumerate().map(|(i, h)| (h.target.clone(), name(&format!("#{i}")))).collect();
    Ruloid { hypotheses: hyps, source: source.clone(), label: raw.label, target: raw.target }.rename_targets(&map)
}
