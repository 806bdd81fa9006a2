use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use super::{Bounds, Certificate, InconclusiveReason, Verdict, Witness};
use crate::ruloid::{Lts, Semantics};
use crate::term::{Label, Term};

/// Hennessy-Milner formulas, used as distinguishing witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Hml {
    True,
    Diamond(Label, Box<Hml>),
    Not(Box<Hml>),
    And(Vec<Hml>),
}

impl Hml {
    fn conj(mut parts: Vec<Hml>) -> Hml {
        match parts.len() {
            0 => Hml::True,
            1 => parts.pop().unwrap(),
            _ => Hml::And(parts),
        }
    }

    /// Labels along the leftmost chain of diamonds.
    pub fn trace(&self) -> Vec<String> {
        match self {
            Hml::True => Vec::new(),
            Hml::Diamond(l, inner) => {
                let mut out = vec![l.to_string()];
                out.extend(inner.trace());
                out
            }
            Hml::Not(inner) => inner.trace(),
            Hml::And(parts) => parts.first().map(Hml::trace).unwrap_or_default(),
        }
    }
}

impl fmt::Display for Hml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hml::True => f.write_str("tt"),
            Hml::Diamond(l, inner) => write!(f, "<{l}>{inner}"),
            Hml::Not(inner) => write!(f, "!{inner}"),
            Hml::And(parts) => {
                let shown: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "({})", shown.join(" & "))
            }
        }
    }
}

impl Serialize for Hml {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Model checks `phi` on the closed process `p`.
pub fn satisfies(sem: &Semantics, p: &Term, phi: &Hml) -> bool {
    match phi {
        Hml::True => true,
        Hml::Diamond(l, inner) => sem.transitions(p).iter().any(|(m, q)| m == l && satisfies(sem, q, inner)),
        Hml::Not(inner) => !satisfies(sem, p, inner),
        Hml::And(parts) => parts.iter().all(|x| satisfies(sem, p, x)),
    }
}

/// Shallowest formula of modal depth at most `depth` that `p` satisfies and
/// `q` does not, found directly on the transition relation.
pub fn distinguishing_formula(sem: &Semantics, p: &Term, q: &Term, depth: usize) -> Option<Hml> {
    let mut memo = HashMap::new();
    (1..=depth).find_map(|k| dist(sem, p, q, k, &mut memo))
}

type Memo = HashMap<(Term, Term, usize), Option<Hml>>;

fn dist(sem: &Semantics, p: &Term, q: &Term, k: usize, memo: &mut Memo) -> Option<Hml> {
    if k == 0 || p == q {
        return None;
    }
    let key = (p.clone(), q.clone(), k);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let result = one_side(sem, p, q, k, memo)
        .or_else(|| one_side(sem, q, p, k, memo).map(|phi| Hml::Not(Box::new(phi))));
    memo.insert(key, result.clone());
    result
}

/// A move of `p` that no equally labelled move of `q` can follow for `k - 1` steps.
fn one_side(sem: &Semantics, p: &Term, q: &Term, k: usize, memo: &mut Memo) -> Option<Hml> {
    let qs = sem.transitions(q);
    'moves: for (l, p2) in sem.transitions(p).iter() {
        let mut parts = Vec::new();
        for (m, q2) in qs.iter() {
            if m != l {
                continue;
            }
            match dist(sem, p2, q2, k - 1, memo) {
                Some(phi) => parts.push(phi),
                None => continue 'moves,
            }
        }
        return Some(Hml::Diamond(l.clone(), Box::new(Hml::conj(parts))));
    }
    None
}

/// Class ids per refinement round over the given LTS.
fn refine(states: usize, succ: &[Vec<(Label, usize)>]) -> Vec<Vec<usize>> {
    let mut rounds = vec![vec![0usize; states]];
    loop {
        let cur = rounds.last().unwrap();
        let mut ids: BTreeMap<(usize, BTreeSet<(Label, usize)>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..states)
            .map(|s| {
                let sig = (cur[s], succ[s].iter().map(|(l, j)| (l.clone(), cur[*j])).collect());
                let n = ids.len();
                *ids.entry(sig).or_insert(n)
            })
            .collect();
        let before = cur.iter().collect::<BTreeSet<_>>().len();
        let stable = ids.len() == before;
        rounds.push(next);
        if stable {
            return rounds;
        }
    }
}

fn split_formula(i: usize, j: usize, rounds: &[Vec<usize>], succ: &[Vec<(Label, usize)>]) -> Hml {
    let k = (1..rounds.len()).find(|&k| rounds[k][i] != rounds[k][j]).expect("states are separated");
    let prev = &rounds[k - 1];
    let side = |a: usize, b: usize| -> Option<Hml> {
        for (l, a2) in &succ[a] {
            let matched = succ[b].iter().any(|(m, b2)| m == l && prev[*b2] == prev[*a2]);
            if !matched {
                let parts = succ[b]
                    .iter()
                    .filter(|(m, _)| m == l)
                    .map(|(_, b2)| split_formula(*a2, *b2, rounds, succ))
                    .collect();
                return Some(Hml::Diamond(l.clone(), Box::new(Hml::conj(parts))));
            }
        }
        None
    };
    side(i, j)
        .or_else(|| side(j, i).map(|phi| Hml::Not(Box::new(phi))))
        .expect("a separating move exists")
}

fn merged(lp: &Lts, lq: &Lts) -> (Vec<Term>, Vec<Vec<(Label, usize)>>, usize) {
    let mut states = lp.states.clone();
    let mut index: HashMap<Term, usize> = states.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let mut remap = Vec::with_capacity(lq.states.len());
    for t in &lq.states {
        let i = *index.entry(t.clone()).or_insert_with(|| {
            states.push(t.clone());
            states.len() - 1
        });
        remap.push(i);
    }
    let mut succ = vec![BTreeSet::new(); states.len()];
    for (a, l, b) in &lp.edges {
        succ[*a].insert((l.clone(), *b));
    }
    for (a, l, b) in &lq.edges {
        succ[remap[*a]].insert((l.clone(), remap[*b]));
    }
    let succ = succ.into_iter().map(|s| s.into_iter().collect()).collect();
    (states, succ, remap[0])
}

/// Strong bisimilarity of closed terms. Exact when both reachable LTSs fit in
/// `state_cap`; otherwise only a distinguishing formula up to `depth` can be
/// found, and its absence is inconclusive.
pub fn strong_bisim(p: &Term, q: &Term, sem: &Semantics, bounds: &Bounds) -> Verdict {
    let lp = sem.explore(p, bounds.state_cap);
    let lq = sem.explore(q, bounds.state_cap);
    if lp.complete && lq.complete {
        let (states, succ, qi) = merged(&lp, &lq);
        let rounds = refine(states.len(), &succ);
        let last = rounds.last().unwrap();
        if last[0] == last[qi] {
            let mut classes: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
            for (i, t) in states.iter().enumerate() {
                classes.entry(last[i]).or_default().push(t.clone());
            }
            return Verdict::Holds { certificate: Certificate::Partition { classes: classes.into_values().collect() } };
        }
        let formula = split_formula(0, qi, &rounds, &succ);
        let trace = formula.trace();
        return Verdict::Fails {
            witness: Witness::Distinguishing { left: p.clone(), right: q.clone(), formula, trace },
        };
    }
    match distinguishing_formula(sem, p, q, bounds.depth) {
        Some(formula) => {
            let trace = formula.trace();
            Verdict::Fails { witness: Witness::Distinguishing { left: p.clone(), right: q.clone(), formula, trace } }
        }
        None => Verdict::Inconclusive {
            bound: format!("reachable states exceed {}; compared up to depth {}", bounds.state_cap, bounds.depth),
            reason: InconclusiveReason::DepthReached { depth: bounds.depth },
        },
    }
}
