//! The transfer game behind fh- and hp-bisimilarity.
//!
//! A state is a pair of open terms, plus (for hp) the hypotheses accumulated
//! so far. For each side, every provable ruloid of that side is an
//! obligation. Provable ruloids are covered exactly by taking each
//! most-general ruloid and every way of identifying its hypothesis targets
//! with each other, with fresh variables, or with variables already present
//! in the state (never with the hypothesis' own source). Weakening the
//! obligation with extra hypotheses never helps the challenger: the
//! responder can weaken its own ruloid by the same set, and hp is monotone in
//! the hypothesis set.
//!
//! A response is a most-general ruloid of the other side with the same label
//! whose hypotheses map, by source and label, into the obligation's
//! hypotheses; the response's targets take the matched targets. The state is
//! good iff every obligation has a response leading to a good state; the
//! checker computes the greatest such set over the explored states, treating
//! unexplored states as good, so a bad root is a definitive failure.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use super::{Certificate, InconclusiveReason, Notion, Verdict, Witness};
use crate::ruloid::{Hypothesis, Ruloid, Semantics};
use crate::term::{name, product, Label, Name, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameConfig {
    /// Accumulate hypotheses along a play (hp) instead of requiring the
    /// response to use exactly the challenge's hypotheses (fh).
    pub accumulate: bool,
    /// Every related pair must be proper.
    pub proper: bool,
}

impl GameConfig {
    pub const FH: GameConfig = GameConfig { accumulate: false, proper: false };
    pub const HP: GameConfig = GameConfig { accumulate: true, proper: false };
    pub const PFH: GameConfig = GameConfig { accumulate: false, proper: true };
    pub const PHP: GameConfig = GameConfig { accumulate: true, proper: true };

    pub fn notion(self) -> Notion {
        match (self.accumulate, self.proper) {
            (false, false) => Notion::Fh,
            (true, false) => Notion::Hp,
            (false, true) => Notion::Pfh,
            (true, true) => Notion::Php,
        }
    }
}

/// Both terms are non-variables, or they are the same variable.
pub fn is_proper(s: &Term, t: &Term) -> bool {
    match (s, t) {
        (Term::Var(x), Term::Var(y)) => x == y,
        (Term::Var(_), _) | (_, Term::Var(_)) => false,
        _ => true,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GameState {
    pub s: Term,
    pub t: Term,
    pub gamma: Vec<Hypothesis>,
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~ {}", self.s, self.t)?;
        if !self.gamma.is_empty() {
            let hyps: Vec<String> = self.gamma.iter().map(|h| h.to_string()).collect();
            write!(f, " under {{{}}}", hyps.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for GameState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl GameState {
    pub fn new(s: Term, t: Term, gamma: impl IntoIterator<Item = Hypothesis>) -> GameState {
        let gamma: BTreeSet<Hypothesis> = gamma.into_iter().collect();
        GameState { s, t, gamma: gamma.into_iter().collect() }
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut v = self.s.vars();
        self.t.collect_vars(&mut v);
        for h in &self.gamma {
            v.insert(h.source.clone());
            v.insert(h.target.clone());
        }
        v
    }

    /// Representative of the state up to variable renaming and swapping the
    /// two sides. Hypotheses mentioning neither side's variables are dropped.
    pub fn canonical(&self) -> GameState {
        let live = {
            let mut v = self.s.vars();
            self.t.collect_vars(&mut v);
            v
        };
        let gamma: BTreeSet<Hypothesis> = self
            .gamma
            .iter()
            .filter(|h| live.contains(&h.source) || live.contains(&h.target))
            .cloned()
            .collect();
        let a = canonical_oriented(&self.s, &self.t, &gamma);
        let b = canonical_oriented(&self.t, &self.s, &gamma);
        a.min(b)
    }
}

fn canonical_oriented(s: &Term, t: &Term, gamma: &BTreeSet<Hypothesis>) -> GameState {
    let mut order = s.vars_in_order();
    t.push_vars_in_order(&mut order);
    let mut map: BTreeMap<Name, Name> = BTreeMap::new();
    for x in order {
        let n = name(&format!("v{}", map.len()));
        map.insert(x, n);
    }
    let mut rest: BTreeSet<Name> = BTreeSet::new();
    for h in gamma {
        for x in [&h.source, &h.target] {
            if !map.contains_key(x) {
                rest.insert(x.clone());
            }
        }
    }
    let mut incident: HashMap<&Name, Vec<(bool, &Label, &Name)>> = HashMap::new();
    for h in gamma {
        incident.entry(&h.source).or_default().push((true, &h.label, &h.target));
        incident.entry(&h.target).or_default().push((false, &h.label, &h.source));
    }
    // Name the remaining variables by how they connect to already named ones.
    while !rest.is_empty() {
        let signature = |x: &Name| {
            let mut sig: Vec<(bool, &Label, Option<&Name>)> =
                incident.get(x).map_or(&[][..], Vec::as_slice).iter().map(|&(out, l, y)| (out, l, map.get(y))).collect();
            sig.sort();
            sig
        };
        let next = rest.iter().min_by_key(|x| (signature(x), (*x).clone())).unwrap().clone();
        rest.remove(&next);
        let n = name(&format!("v{}", map.len()));
        map.insert(next, n);
    }
    let rename = |x: &Name| map[x].clone();
    GameState::new(
        s.rename(&map),
        t.rename(&map),
        gamma.iter().map(|h| Hypothesis { source: rename(&h.source), label: h.label.clone(), target: rename(&h.target) }),
    )
}

/// One instantiated challenge and the responses available to it.
#[derive(Debug, Clone)]
struct Obligation {
    side: Side,
    hyps: BTreeSet<Hypothesis>,
    source: Term,
    label: Label,
    target: Term,
    responses: Vec<Response>,
}

#[derive(Debug, Clone)]
struct Response {
    hyps: Vec<Hypothesis>,
    target: Term,
    successor: GameState,
}

fn show_ruloid(hyps: &[Hypothesis], source: &Term, label: &Label, target: &Term) -> String {
    let r = Ruloid { hypotheses: hyps.to_vec(), source: source.clone(), label: label.clone(), target: target.clone() };
    r.to_string()
}

/// Every way to send the hypothesis targets of `r` to variables: targets are
/// grouped into blocks, each block going to a distinct fresh variable or to
/// a distinct variable of `vars` that is not the source of any hypothesis in
/// the block.
fn target_maps(r: &Ruloid, vars: &BTreeSet<Name>) -> Vec<BTreeMap<Name, Name>> {
    let targets: Vec<&Hypothesis> = r.hypotheses.iter().collect();
    let mut out = Vec::new();
    let mut blocks_of = vec![0usize; targets.len()];
    partitions(0, 0, &mut blocks_of, &mut |assign, nblocks| {
        let mut fresh = Vec::new();
        let mut k = 0;
        while fresh.len() < nblocks {
            let cand = name(&format!("h{k}"));
            k += 1;
            if !vars.contains(&cand) {
                fresh.push(cand);
            }
        }
        let options: Vec<Vec<Name>> = (0..nblocks)
            .map(|b| {
                let mut opts = vec![fresh[b].clone()];
                opts.extend(
                    vars.iter()
                        .filter(|v| (0..targets.len()).all(|i| assign[i] != b || targets[i].source != **v))
                        .cloned(),
                );
                opts
            })
            .collect();
        let refs: Vec<&Vec<Name>> = options.iter().collect();
        for choice in product(&refs) {
            let existing: Vec<&Name> = choice.iter().filter(|c| vars.contains(*c)).collect();
            if existing.iter().collect::<BTreeSet<_>>().len() != existing.len() {
                continue;
            }
            out.push(targets.iter().zip(assign).map(|(h, &b)| (h.target.clone(), choice[b].clone())).collect());
        }
    });
    out
}

/// Restricted-growth enumeration of set partitions.
fn partitions(i: usize, used: usize, assign: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], usize)) {
    if i == assign.len() {
        f(assign, used);
        return;
    }
    for b in 0..=used {
        assign[i] = b;
        partitions(i + 1, used.max(b + 1), assign, f);
    }
}

fn obligations(sem: &Semantics, cfg: GameConfig, st: &GameState) -> Vec<Obligation> {
    let vars = st.vars();
    let gamma: BTreeSet<Hypothesis> = st.gamma.iter().cloned().collect();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for side in [Side::Left, Side::Right] {
        let (a, b) = match side {
            Side::Left => (&st.s, &st.t),
            Side::Right => (&st.t, &st.s),
        };
        let responders = sem.ruloids_raw(b);
        for r in sem.ruloids_raw(a).iter() {
            for map in target_maps(r, &vars) {
                let inst = r.rename_targets(&map);
                let mut hyps: BTreeSet<Hypothesis> = inst.hypotheses.iter().cloned().collect();
                if cfg.accumulate {
                    // Γ is fixed within a state, so deduplicate before adding it.
                    hyps.retain(|h| !gamma.contains(h));
                }
                if !seen.insert((side, inst.label.clone(), inst.target.clone(), hyps.clone())) {
                    continue;
                }
                if cfg.accumulate {
                    hyps.extend(gamma.iter().cloned());
                }
                let mut responses = Vec::new();
                let mut succ_seen = BTreeSet::new();
                for q in responders.iter().filter(|q| q.label == inst.label) {
                    // A hypothesis whose target the response never uses only
                    // needs some match; which one cannot change the successor.
                    let used = q.target.vars();
                    let pools: Vec<Vec<&Hypothesis>> = q
                        .hypotheses
                        .iter()
                        .map(|qh| {
                            let matches = hyps.iter().filter(|g| g.source == qh.source && g.label == qh.label);
                            if used.contains(&qh.target) {
                                matches.collect()
                            } else {
                                matches.take(1).collect()
                            }
                        })
                        .collect();
                    let refs: Vec<&Vec<&Hypothesis>> = pools.iter().collect();
                    for choice in product(&refs) {
                        let m: BTreeMap<Name, Name> =
                            q.hypotheses.iter().zip(&choice).map(|(qh, g)| (qh.target.clone(), g.target.clone())).collect();
                        let target = q.target.rename(&m);
                        let (s2, t2) = match side {
                            Side::Left => (inst.target.clone(), target.clone()),
                            Side::Right => (target.clone(), inst.target.clone()),
                        };
                        let carried = if cfg.accumulate { hyps.clone() } else { BTreeSet::new() };
                        let successor = GameState::new(s2, t2, carried);
                        if succ_seen.insert(successor.clone()) {
                            responses.push(Response { hyps: choice.into_iter().cloned().collect(), target, successor });
                        }
                    }
                }
                out.push(Obligation {
                    side,
                    hyps,
                    source: a.clone(),
                    label: inst.label.clone(),
                    target: inst.target.clone(),
                    responses,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Good,
    Bad,
    State(usize),
}

fn classify(cfg: GameConfig, st: &GameState, index: &HashMap<GameState, usize>) -> Result<Node, GameState> {
    if st.s == st.t {
        return Ok(Node::Good);
    }
    if cfg.proper && !is_proper(&st.s, &st.t) {
        return Ok(Node::Bad);
    }
    let c = st.canonical();
    match index.get(&c) {
        Some(&i) => Ok(Node::State(i)),
        None => Err(c),
    }
}

/// A challenge of the root pair that has no surviving response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unmatched {
    pub pair: GameState,
    pub side: Side,
    pub ruloid: String,
    pub candidates: Vec<Candidate>,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub ruloid: String,
    pub successor: GameState,
    pub reason: String,
}

/// Plays the game from `(s, t)` with no hypotheses, exploring at most
/// `pair_cap` states.
pub fn play(sem: &Semantics, s: &Term, t: &Term, cfg: GameConfig, pair_cap: usize) -> Verdict {
    let notion = cfg.notion();
    if cfg.proper && !is_proper(s, t) {
        return Verdict::Fails { witness: Witness::ImproperPair { left: s.clone(), right: t.clone() } };
    }
    let root = GameState::new(s.clone(), t.clone(), []);
    if s == t {
        return Verdict::Holds { certificate: Certificate::Relation { notion, states: vec![root] } };
    }
    let mut arena = Arena { sem, cfg, states: vec![root.canonical()], index: HashMap::new(), edges: vec![None], expanded: 0 };
    arena.index.insert(arena.states[0].clone(), 0);
    let cap = pair_cap.max(1);
    let mut bad = vec![false];

    // Coinductive depth-first search: states on the stack or already shown
    // good in this round are assumed good. Discovering a new bad state
    // invalidates those assumptions, so the search restarts; `bad` only ever
    // grows and every member is definitively not related.
    loop {
        let mut found_bad = false;
        let mut optimistic = false;
        let mut visit: Vec<Visit> = vec![Visit::New; arena.states.len()];
        let mut stack: Vec<Frame> = vec![Frame { id: 0, ob: 0, resp: 0 }];
        visit[0] = Visit::OnStack;
        arena.expand(0);
        bad.resize(arena.states.len(), false);
        visit.resize(arena.states.len(), Visit::New);
        let mut ret: Option<bool> = None;
        while let Some(frame) = stack.last_mut() {
            match ret.take() {
                Some(true) => {
                    frame.ob += 1;
                    frame.resp = 0;
                }
                Some(false) => frame.resp += 1,
                None => {}
            }
            let id = frame.id;
            let mut push = None;
            let mut failed = false;
            {
                let rows = arena.edges[id].as_ref().expect("expanded");
                'obligations: while frame.ob < rows.len() {
                    let row = &rows[frame.ob];
                    while frame.resp < row.len() {
                        match row[frame.resp] {
                            Node::Good => break,
                            Node::Bad => frame.resp += 1,
                            Node::State(j) if bad[j] => frame.resp += 1,
                            Node::State(j) => match visit.get(j).copied().unwrap_or(Visit::New) {
                                Visit::OnStack | Visit::Good => break,
                                Visit::New if arena.edges[j].is_none() && arena.expanded() >= cap => {
                                    optimistic = true;
                                    break;
                                }
                                Visit::New => {
                                    push = Some(j);
                                    break 'obligations;
                                }
                            },
                        }
                    }
                    if frame.resp == row.len() {
                        failed = true;
                        break;
                    }
                    frame.ob += 1;
                    frame.resp = 0;
                }
            }
            if let Some(j) = push {
                arena.expand(j);
                if visit.len() < arena.states.len() {
                    visit.resize(arena.states.len(), Visit::New);
                }
                bad.resize(arena.states.len(), false);
                visit[j] = Visit::OnStack;
                stack.push(Frame { id: j, ob: 0, resp: 0 });
                continue;
            }
            stack.pop();
            if failed {
                bad[id] = true;
                found_bad = true;
                visit[id] = Visit::New;
                ret = Some(false);
            } else {
                visit[id] = Visit::Good;
                ret = Some(true);
            }
            if bad[0] {
                break;
            }
        }
        bad.resize(arena.states.len(), false);
        if bad[0] {
            let good: Vec<bool> = bad.iter().map(|b| !b).collect();
            return Verdict::Fails {
                witness: Witness::Unmatched(Box::new(witness(sem, cfg, &root, &arena.index, &good))),
            };
        }
        if found_bad {
            continue;
        }
        if optimistic {
            let explored = arena.expanded();
            return Verdict::Inconclusive {
                bound: format!("{notion} game explored {explored} state(s), cap {pair_cap}"),
                reason: InconclusiveReason::CapReached { explored, cap: pair_cap },
            };
        }
        let states = arena
            .states
            .iter()
            .zip(&visit)
            .filter(|(_, v)| **v == Visit::Good)
            .map(|(s, _)| s.clone())
            .collect();
        return Verdict::Holds { certificate: Certificate::Relation { notion, states } };
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Visit {
    New,
    OnStack,
    Good,
}

struct Frame {
    id: usize,
    ob: usize,
    resp: usize,
}

/// Explored game states and, once expanded, their obligations as rows of
/// classified responses.
struct Arena<'a> {
    sem: &'a Semantics,
    cfg: GameConfig,
    states: Vec<GameState>,
    index: HashMap<GameState, usize>,
    edges: Vec<Option<Vec<Vec<Node>>>>,
    expanded: usize,
}

impl Arena<'_> {
    fn expanded(&self) -> usize {
        self.expanded
    }

    fn expand(&mut self, i: usize) {
        if self.edges[i].is_some() {
            return;
        }
        self.expanded += 1;
        let obs = obligations(self.sem, self.cfg, &self.states[i]);
        let mut rows = Vec::with_capacity(obs.len());
        for ob in obs {
            let mut row: Vec<(Node, usize)> = ob
                .responses
                .iter()
                .map(|r| {
                    let weight = r.successor.gamma.len() * 64 + r.successor.s.size() + r.successor.t.size();
                    let node = match classify(self.cfg, &r.successor, &self.index) {
                        Ok(n) => n,
                        Err(c) => {
                            let j = self.states.len();
                            self.states.push(c.clone());
                            self.index.insert(c, j);
                            self.edges.push(None);
                            Node::State(j)
                        }
                    };
                    (node, weight)
                })
                .collect();
            // Cheap responses first: identical pairs, then small successors.
            row.sort_by_key(|(n, w)| (!matches!(n, Node::Good), *w));
            rows.push(row.into_iter().map(|(n, _)| n).collect());
        }
        self.edges[i] = Some(rows);
    }
}

fn witness(
    sem: &Semantics,
    cfg: GameConfig,
    root: &GameState,
    index: &HashMap<GameState, usize>,
    good: &[bool],
) -> Unmatched {
    for ob in obligations(sem, cfg, root) {
        let verdicts: Vec<(Response, Option<&str>)> = ob
            .responses
            .into_iter()
            .map(|r| {
                let why = match classify(cfg, &r.successor, index) {
                    Ok(Node::Good) => None,
                    Ok(Node::Bad) => Some("improper pair"),
                    Ok(Node::State(j)) if good[j] => None,
                    _ => Some("successor pair is not related"),
                };
                (r, why)
            })
            .collect();
        if verdicts.iter().any(|(_, why)| why.is_none()) {
            continue;
        }
        let hyps: Vec<Hypothesis> = ob.hyps.iter().cloned().collect();
        let ruloid = show_ruloid(&hyps, &ob.source, &ob.label, &ob.target);
        let (other, _) = match ob.side {
            Side::Left => (&root.t, &root.s),
            Side::Right => (&root.s, &root.t),
        };
        let explanation = if verdicts.is_empty() {
            format!("no provable ruloid of `{other}` with these hypotheses has label `{}`", ob.label)
        } else {
            format!("every response of `{other}` leads to a pair outside the relation")
        };
        let candidates = verdicts
            .into_iter()
            .map(|(r, why)| Candidate {
                ruloid: show_ruloid(&r.hyps, other, &ob.label, &r.target),
                successor: r.successor,
                reason: why.unwrap_or_default().to_string(),
            })
            .collect();
        return Unmatched { pair: root.clone(), side: ob.side, ruloid, candidates, explanation };
    }
    unreachable!("a bad root has an unmatched obligation")
}

pub fn fh_bisim(s: &Term, t: &Term, sem: &Semantics, pair_cap: usize) -> Verdict {
    play(sem, s, t, GameConfig::FH, pair_cap)
}

pub fn hp_bisim(s: &Term, t: &Term, sem: &Semantics, pair_cap: usize) -> Verdict {
    play(sem, s, t, GameConfig::HP, pair_cap)
}

pub fn pfh_bisim(s: &Term, t: &Term, sem: &Semantics, pair_cap: usize) -> Verdict {
    play(sem, s, t, GameConfig::PFH, pair_cap)
}

pub fn php_bisim(s: &Term, t: &Term, sem: &Semantics, pair_cap: usize) -> Verdict {
    play(sem, s, t, GameConfig::PHP, pair_cap)
}
