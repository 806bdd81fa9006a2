//! Equational theories over a TSS: bounded equational proof search,
//! per-axiom soundness sweeps and the preservation advisor, which decides
//! whether the soundness of axioms survives a disjoint extension.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::bisim::{check, Bounds, Notion, Verdict, Witness};
use crate::gsos::{
    adds_labels, robust_equation_criteria, robust_extension_criteria, validate_disjoint_extension, ExtensionCriteria,
    FormatError, GuardError,
};
use crate::ruloid::Semantics;
use crate::term::{enumerate_terms, Equation, Name, Signature, Substitution, Term, TermError};
use crate::tss::{Tss, TssError};

/// Axiom-wise evidence only lifts to the generated congruence if the notion
/// is a congruence for the TSS; that property is assumed, not checked.
pub const CONGRUENCE_CAVEAT: &str = "soundness is checked axiom by axiom; lifting it to every equation \
derivable from the axioms assumes the equivalence is a congruence for the specification";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofStep {
    pub axiom: String,
    /// `true` when the axiom was applied right-to-left.
    pub reversed: bool,
    pub position: Vec<usize>,
    pub substitution: Substitution,
    pub result: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ProofResult {
    Proved { start: Term, steps: Vec<ProofStep> },
    UnknownAtBound { depth: usize, explored: usize },
}

impl ProofResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, ProofResult::Proved { .. })
    }
}

/// Syntactic matching of `pattern` against `t`, extending `sigma`.
pub fn match_term(pattern: &Term, t: &Term, sigma: &mut BTreeMap<Name, Term>) -> bool {
    match pattern {
        Term::Var(x) => match sigma.get(x) {
            Some(bound) => bound == t,
            None => {
                sigma.insert(x.clone(), t.clone());
                true
            }
        },
        Term::App(f, ps) => match t {
            Term::App(g, ts) if f == g && ps.len() == ts.len() => {
                ps.iter().zip(ts).all(|(p, u)| match_term(p, u, sigma))
            }
            _ => false,
        },
    }
}

struct Rewriter<'a> {
    axioms: &'a [Equation],
    pool: Vec<Term>,
    max_size: usize,
}

impl Rewriter<'_> {
    /// One-step rewrites of `t` in either direction, at every position.
    fn steps(&self, t: &Term) -> Vec<ProofStep> {
        let mut out = Vec::new();
        for pos in t.positions() {
            let sub = t.at(&pos).expect("valid position");
            for ax in self.axioms {
                for reversed in [false, true] {
                    let (from, to) = if reversed { (&ax.rhs, &ax.lhs) } else { (&ax.lhs, &ax.rhs) };
                    let mut sigma = BTreeMap::new();
                    if !match_term(from, sub, &mut sigma) {
                        continue;
                    }
                    let free: Vec<Name> = to.vars().into_iter().filter(|x| !sigma.contains_key(x)).collect();
                    let mut fills: Vec<Vec<Term>> = vec![Vec::new()];
                    for _ in &free {
                        fills = fills
                            .into_iter()
                            .flat_map(|f| {
                                self.pool.iter().map(move |p| {
                                    let mut g = f.clone();
                                    g.push(p.clone());
                                    g
                                })
                            })
                            .collect();
                    }
                    for fill in fills {
                        let mut s: Substitution = sigma.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                        for (x, v) in free.iter().zip(fill) {
                            s.insert(x.clone(), v);
                        }
                        let result = t.replace_at(&pos, to.apply(&s));
                        if result.size() > self.max_size || result == *t {
                            continue;
                        }
                        out.push(ProofStep {
                            axiom: ax.label(),
                            reversed,
                            position: pos.clone(),
                            substitution: s,
                            result,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Bounded bidirectional search for an equational derivation of `goal` from
/// `axioms` (used in both directions, at any position, under any
/// substitution). Variables of an axiom side that the match does not bind
/// are filled with terms of at most `inst_size` operators over the goal's
/// variables. `depth` bounds the total number of rewrite steps.
pub fn prove(axioms: &[Equation], goal: &Equation, sig: &Signature, depth: usize, inst_size: usize) -> ProofResult {
    if goal.lhs == goal.rhs {
        return ProofResult::Proved { start: goal.lhs.clone(), steps: Vec::new() };
    }
    let mut goal_vars: Vec<Name> = goal.lhs.vars_in_order();
    goal.rhs.push_vars_in_order(&mut goal_vars);
    let needs_pool = axioms.iter().any(|a| a.lhs.vars() != a.rhs.vars());
    let pool = if needs_pool { enumerate_terms(sig, &goal_vars, inst_size) } else { Vec::new() };
    let rw = Rewriter { axioms, pool, max_size: goal.lhs.size().max(goal.rhs.size()) + inst_size };

    // parent links: term -> (previous term, step that produced this term)
    type Parents = HashMap<Term, Option<(Term, ProofStep)>>;
    let mut from_l: Parents = HashMap::from([(goal.lhs.clone(), None)]);
    let mut from_r: Parents = HashMap::from([(goal.rhs.clone(), None)]);
    let mut frontier_l = VecDeque::from([goal.lhs.clone()]);
    let mut frontier_r = VecDeque::from([goal.rhs.clone()]);

    let meet = |m: &Term, from_l: &Parents, from_r: &Parents| -> ProofResult {
        let mut left = Vec::new();
        let mut cur = m.clone();
        while let Some(Some((prev, step))) = from_l.get(&cur) {
            left.push(step.clone());
            cur = prev.clone();
        }
        left.reverse();
        let mut cur = m.clone();
        while let Some(Some((prev, step))) = from_r.get(&cur) {
            // the step rewrote `prev` into `cur`; replay it backwards
            left.push(ProofStep { reversed: !step.reversed, result: prev.clone(), ..step.clone() });
            cur = prev.clone();
        }
        ProofResult::Proved { start: goal.lhs.clone(), steps: left }
    };

    for level in 0..depth {
        let left_turn = level % 2 == 0;
        let (frontier, mine, other) = if left_turn {
            (&mut frontier_l, &mut from_l, &from_r)
        } else {
            (&mut frontier_r, &mut from_r, &from_l)
        };
        let mut next = VecDeque::new();
        let mut hit = None;
        'layer: for t in frontier.drain(..) {
            for step in rw.steps(&t) {
                if mine.contains_key(&step.result) {
                    continue;
                }
                let r = step.result.clone();
                mine.insert(r.clone(), Some((t.clone(), step)));
                if other.contains_key(&r) {
                    hit = Some(r);
                    break 'layer;
                }
                next.push_back(r);
            }
        }
        if let Some(m) = hit {
            return meet(&m, &from_l, &from_r);
        }
        *frontier = next;
        if frontier_l.is_empty() && frontier_r.is_empty() {
            break;
        }
    }
    ProofResult::UnknownAtBound { depth, explored: from_l.len() + from_r.len() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomVerdict {
    pub axiom: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub notion: Notion,
    pub axioms: Vec<AxiomVerdict>,
    pub caveat: &'static str,
}

impl SweepReport {
    pub fn any_fails(&self) -> bool {
        self.axioms.iter().any(|a| a.verdict.fails())
    }
}

/// Runs the checker for `notion` on every axiom.
pub fn soundness_sweep(axioms: &[Equation], sem: &Semantics, notion: Notion, bounds: &Bounds) -> SweepReport {
    SweepReport {
        notion,
        axioms: axioms
            .iter()
            .map(|e| AxiomVerdict { axiom: e.label(), verdict: check(notion, &e.lhs, &e.rhs, sem, bounds) })
            .collect(),
        caveat: CONGRUENCE_CAVEAT,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// The extension's conclusion labels are never tested by the base (ci).
    RobustExtension,
    /// The extension adds no labels (fh, hp).
    NoNewLabels,
    /// The pair is proper fh- or hp-bisimilar on the base (any notion).
    ProperBisimilarity,
    /// The axiom's open arguments sit at non-evolving positions over an
    /// initially fertile base (ci).
    NonEvolving,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conjunct {
    pub name: &'static str,
    pub satisfied: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremCheck {
    pub theorem: Theorem,
    /// Whether the theorem speaks about the requested notion at all.
    pub relevant: bool,
    pub conjuncts: Vec<Conjunct>,
    pub applies: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classification {
    GuaranteedPreserved { theorem: Theorem },
    EmpiricallyPreservedAtBound,
    Broken { witness: Witness },
    /// The axiom already fails on the base, so there is nothing to preserve.
    UnsoundOnBase { witness: Witness },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub base_evidence: Verdict,
    pub theorems: Vec<TheoremCheck>,
    pub classification: Classification,
    pub extension_evidence: Verdict,
    /// A guaranteed preservation refuted by the extension check. Never
    /// expected; it would mean a theorem check is wrong.
    pub contradiction: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreservationReport {
    pub base: String,
    pub extension: String,
    pub notion: Notion,
    pub adds_labels: bool,
    pub extension_criteria: ExtensionCriteria,
    pub axioms: Vec<AxiomReport>,
    pub caveat: &'static str,
}

#[derive(Debug, Error)]
pub enum AdvisorError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Tss(#[from] TssError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error("`{extension}` is not a disjoint extension of `{base}`: {rules}")]
    NotDisjoint { base: String, extension: String, rules: String },
}

fn conj(name: &'static str, satisfied: bool, detail: impl Into<String>) -> Conjunct {
    Conjunct { name, satisfied, detail: detail.into() }
}

fn theorem(theorem: Theorem, relevant: bool, conjuncts: Vec<Conjunct>) -> TheoremCheck {
    let applies = relevant && conjuncts.iter().all(|c| c.satisfied);
    TheoremCheck { theorem, relevant, conjuncts, applies }
}

/// Classifies every axiom of `axioms` (sound or not on `base`) with respect
/// to the disjoint extension `base ∪ delta`, then re-checks it on the
/// extension. Theorems are tried in the order robust-extension,
/// no-new-labels, proper-bisimilarity, non-evolving; the first that applies
/// wins.
pub fn preservation_advisor(
    axioms: &[Equation],
    base: &Arc<Tss>,
    delta: &Tss,
    notion: Notion,
    bounds: &Bounds,
    override_guard: bool,
) -> Result<PreservationReport, AdvisorError> {
    let disjoint = validate_disjoint_extension(base, delta)?;
    if let crate::gsos::Disjointness::NotDisjoint { offending } = &disjoint {
        return Err(AdvisorError::NotDisjoint {
            base: base.name().to_string(),
            extension: delta.name().to_string(),
            rules: offending.iter().map(|o| o.rule.clone()).collect::<Vec<_>>().join(", "),
        });
    }
    let union = Arc::new(Tss::union(&format!("{}+{}", base.name(), delta.name()), base, delta)?);
    let sem0 = Semantics::new(base.clone())?;
    let sem1 = Semantics::new(union)?;
    let criteria = robust_extension_criteria(base, delta, axioms)?;
    let new_labels = adds_labels(base, delta);

    let mut reports = Vec::new();
    for ax in axioms {
        let base_evidence = check(notion, &ax.lhs, &ax.rhs, &sem0, bounds);
        let mut theorems = Vec::new();

        theorems.push(theorem(
            Theorem::RobustExtension,
            notion == Notion::Ci,
            vec![
                conj("disjoint extension", criteria.disjoint.is_disjoint(), ""),
                conj("base is positive GSOS", criteria.base_format.is_ok(), ""),
                conj(
                    "every axiom is proper",
                    criteria.improper_equations.is_empty(),
                    criteria.improper_equations.join(", "),
                ),
                conj(
                    "extension concludes no label the base tests",
                    criteria.overlap.is_empty(),
                    criteria.overlap.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "),
                ),
            ],
        ));

        theorems.push(theorem(
            Theorem::NoNewLabels,
            matches!(notion, Notion::Fh | Notion::Hp | Notion::Pfh | Notion::Php),
            vec![
                conj("disjoint extension", true, ""),
                conj("no labels added", !new_labels, ""),
                conj("bisimilar on the base", base_evidence.holds(), base_evidence.summary()),
            ],
        ));

        let proper_variants: &[Notion] = match notion {
            Notion::Fh | Notion::Pfh => &[Notion::Pfh],
            Notion::Hp | Notion::Php => &[Notion::Php],
            Notion::Ci | Notion::Strong => &[Notion::Pfh, Notion::Php],
        };
        let mut proper_detail = Vec::new();
        let mut proper_holds = false;
        for &pn in proper_variants {
            let v = if pn == notion { base_evidence.clone() } else { check(pn, &ax.lhs, &ax.rhs, &sem0, bounds) };
            proper_detail.push(format!("{pn}: {}", v.summary()));
            if v.holds() {
                proper_holds = true;
                break;
            }
        }
        theorems.push(theorem(
            Theorem::ProperBisimilarity,
            true,
            vec![
                conj("disjoint extension", true, ""),
                conj("proper bisimilar on the base", proper_holds, proper_detail.join("; ")),
            ],
        ));

        let relevant = notion == Notion::Ci;
        let conjuncts = if relevant {
            let c = robust_equation_criteria(ax, &sem0, bounds.term_size.max(1) + 2, override_guard)?;
            vec![
                conj("base initially fertile", c.fertile, if c.fertile { "" } else { "not established at bound" }),
                conj("both sides linear", c.lhs_linear && c.rhs_linear, ""),
                conj(
                    "open arguments at non-evolving positions",
                    c.open_terms_at_non_evolving_indices,
                    c.evolving_open_arguments.join("; "),
                ),
            ]
        } else {
            Vec::new()
        };
        theorems.push(theorem(Theorem::NonEvolving, relevant, conjuncts));

        let extension_evidence = check(notion, &ax.lhs, &ax.rhs, &sem1, bounds);
        let guaranteed = theorems.iter().find(|t| t.applies).map(|t| t.theorem);
        let classification = match (&base_evidence, guaranteed) {
            (Verdict::Fails { witness }, _) => Classification::UnsoundOnBase { witness: witness.clone() },
            (_, Some(theorem)) => Classification::GuaranteedPreserved { theorem },
            _ => match &extension_evidence {
                Verdict::Fails { witness } => Classification::Broken { witness: witness.clone() },
                _ => Classification::EmpiricallyPreservedAtBound,
            },
        };
        let contradiction =
            matches!(classification, Classification::GuaranteedPreserved { .. }) && extension_evidence.fails();
        reports.push(AxiomReport {
            axiom: ax.label(),
            base_evidence,
            theorems,
            classification,
            extension_evidence,
            contradiction,
        });
    }
    Ok(PreservationReport {
        base: base.name().to_string(),
        extension: delta.name().to_string(),
        notion,
        adds_labels: new_labels,
        extension_criteria: criteria,
        axioms: reports,
        caveat: CONGRUENCE_CAVEAT,
    })
}
