//! Syntactic analyses over a TSS: positive GSOS conformance, disjoint
//! extensions, label accounting, non-evolving argument positions, initial
//! fertility and the two sufficient criteria for robustness of
//! ci-bisimilarity under disjoint extensions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::ruloid::Semantics;
use crate::term::{enumerate_closed_terms, Equation, Label, Name, Term, TermError};
use crate::tss::{Rule, Tss};

/// Largest label set for which all `2^|L|` subsets are searched unless overridden.
pub const FERTILITY_LABEL_GUARD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    ConclusionSourceNotApplication,
    ConclusionArgumentNotVariable,
    RepeatedSourceVariable,
    PremiseSourceNotArgument,
    PremiseTargetNotVariable,
    RepeatedPremiseTarget,
    TargetVariableEscape,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::ConclusionSourceNotApplication => "conclusion source must be an operator application",
            ViolationKind::ConclusionArgumentNotVariable => "conclusion source arguments must be variables",
            ViolationKind::RepeatedSourceVariable => "repeated source variable",
            ViolationKind::PremiseSourceNotArgument => "premise source must be an argument variable",
            ViolationKind::PremiseTargetNotVariable => "premise target must be a variable",
            ViolationKind::RepeatedPremiseTarget => "premise targets must be fresh and pairwise distinct",
            ViolationKind::TargetVariableEscape => "conclusion target uses a variable not bound by the rule",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    pub kind: ViolationKind,
    pub explanation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FormatReport {
    pub violations: Vec<Violation>,
}

impl FormatReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not in positive GSOS format: {}", .0.violations.iter().map(|v| format!("rule `{}`: {}", v.rule, v.kind)).collect::<Vec<_>>().join("; "))]
pub struct FormatError(pub FormatReport);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GsosPremise {
    pub index: usize,
    pub label: Label,
    pub target: Name,
}

/// A rule destructured as `{x_i -a_ij-> y_ij} / f(x_1..x_n) -a-> t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GsosRule {
    pub name: String,
    pub op: Name,
    pub args: Vec<Name>,
    pub premises: Vec<GsosPremise>,
    pub label: Label,
    pub target: Term,
}

impl GsosRule {
    pub fn rebuild(&self) -> Rule {
        use crate::tss::Transition;
        let source = Term::App(self.op.clone(), self.args.iter().map(|x| Term::Var(x.clone())).collect());
        let premises = self
            .premises
            .iter()
            .map(|p| {
                Transition::new(Term::Var(self.args[p.index].clone()), p.label.clone(), Term::Var(p.target.clone()))
            })
            .collect();
        Rule::new(&self.name, premises, Transition::new(source, self.label.clone(), self.target.clone()))
    }

    /// Indices whose argument variable and premise targets are absent from the target.
    pub fn non_evolving(&self) -> BTreeSet<usize> {
        let tv = self.target.vars();
        (0..self.args.len())
            .filter(|&i| {
                !tv.contains(&self.args[i])
                    && self.premises.iter().filter(|p| p.index == i).all(|p| !tv.contains(&p.target))
            })
            .collect()
    }
}

fn violation(rule: &Rule, kind: ViolationKind, explanation: String) -> Violation {
    Violation { rule: rule.name.clone(), kind, explanation }
}

/// Destructures a rule into positive GSOS shape, or lists every violated clause.
pub fn destructure(rule: &Rule) -> Result<GsosRule, Vec<Violation>> {
    let mut out = Vec::new();
    let concl = &rule.conclusion;
    let Term::App(op, src_args) = &concl.source else {
        return Err(vec![violation(
            rule,
            ViolationKind::ConclusionSourceNotApplication,
            format!("conclusion source `{}` is a variable", concl.source),
        )]);
    };
    let mut args = Vec::new();
    let mut seen = BTreeSet::new();
    for a in src_args {
        match a {
            Term::Var(x) => {
                if !seen.insert(x.clone()) {
                    out.push(violation(
                        rule,
                        ViolationKind::RepeatedSourceVariable,
                        format!("variable `{x}` occurs more than once in `{}`", concl.source),
                    ));
                }
                args.push(x.clone());
            }
            other => out.push(violation(
                rule,
                ViolationKind::ConclusionArgumentNotVariable,
                format!("argument `{other}` of `{}` is not a variable", concl.source),
            )),
        }
    }
    let mut premises = Vec::new();
    for p in &rule.premises {
        let index = match &p.source {
            Term::Var(x) => args.iter().position(|a| a == x),
            _ => None,
        };
        let Some(index) = index else {
            out.push(violation(
                rule,
                ViolationKind::PremiseSourceNotArgument,
                format!("premise `{p}` does not test an argument variable of `{}`", concl.source),
            ));
            continue;
        };
        let Term::Var(y) = &p.target else {
            out.push(violation(
                rule,
                ViolationKind::PremiseTargetNotVariable,
                format!("premise `{p}` has a non-variable target"),
            ));
            continue;
        };
        if !seen.insert(y.clone()) {
            out.push(violation(
                rule,
                ViolationKind::RepeatedPremiseTarget,
                format!("premise target `{y}` is not fresh"),
            ));
        }
        premises.push(GsosPremise { index, label: p.label.clone(), target: y.clone() });
    }
    for x in concl.target.vars() {
        if !seen.contains(&x) {
            out.push(violation(
                rule,
                ViolationKind::TargetVariableEscape,
                format!("`{x}` in target `{}` is neither an argument nor a premise target", concl.target),
            ));
        }
    }
    if out.is_empty() {
        Ok(GsosRule {
            name: rule.name.clone(),
            op: op.clone(),
            args,
            premises,
            label: concl.label.clone(),
            target: concl.target.clone(),
        })
    } else {
        Err(out)
    }
}

pub fn validate_positive_gsos(t: &Tss) -> FormatReport {
    FormatReport {
        violations: t.rules().iter().filter_map(|r| destructure(r).err()).flatten().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Disjointness {
    Disjoint,
    NotDisjoint { offending: Vec<OffendingRule> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OffendingRule {
    pub rule: String,
    pub defines: Option<String>,
    pub reason: String,
}

impl Disjointness {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, Disjointness::Disjoint)
    }
}

/// Every rule contributed by `delta` must define an operator that `delta`
/// introduces and `t0` lacks.
pub fn validate_disjoint_extension(t0: &Tss, delta: &Tss) -> Result<Disjointness, TermError> {
    let own = delta.own();
    t0.signature().union(&own.signature)?;
    let offending: Vec<OffendingRule> = own
        .rules
        .iter()
        .filter_map(|r| {
            let head = r.defines();
            let fresh = head.is_some_and(|f| own.signature.contains(f) && !t0.signature().contains(f));
            (!fresh).then(|| OffendingRule {
                rule: r.name.clone(),
                defines: head.map(|h| h.to_string()),
                reason: match head {
                    Some(f) => format!("`{f}`-defining rule for an operator of the base"),
                    None => "conclusion source is not an operator application".into(),
                },
            })
        })
        .collect();
    Ok(if offending.is_empty() { Disjointness::Disjoint } else { Disjointness::NotDisjoint { offending } })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LabelUsage {
    pub premise_labels: BTreeSet<Label>,
    pub conclusion_labels: BTreeSet<Label>,
}

fn usage<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> LabelUsage {
    let mut u = LabelUsage::default();
    for r in rules {
        u.premise_labels.extend(r.premises.iter().map(|p| p.label.clone()));
        u.conclusion_labels.insert(r.conclusion.label.clone());
    }
    u
}

/// Labels used by the rules this TSS declares itself (not its base's).
pub fn label_usage(t: &Tss) -> LabelUsage {
    usage(&t.own().rules)
}

/// Labels used by every rule of the TSS, base layers included.
pub fn label_usage_all(t: &Tss) -> LabelUsage {
    usage(t.rules())
}

/// True iff `delta` declares a label that `t0` lacks.
pub fn adds_labels(t0: &Tss, delta: &Tss) -> bool {
    !delta.own().labels.is_subset(t0.labels())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NonEvolvingTable {
    pub indices: BTreeMap<String, BTreeSet<usize>>,
}

impl NonEvolvingTable {
    pub fn is_non_evolving(&self, op: &str, index: usize) -> bool {
        self.indices.get(op).is_some_and(|s| s.contains(&index))
    }
}

/// Per operator, the indices that are non-evolving for every defining rule.
/// Operators without rules get all their indices.
pub fn non_evolving_indices(sem: &Semantics) -> NonEvolvingTable {
    let mut indices = BTreeMap::new();
    for (op, arity) in sem.tss().signature().ops() {
        let mut set: BTreeSet<usize> = (0..arity).collect();
        for r in sem.rules_for(op) {
            let ne = r.non_evolving();
            set.retain(|i| ne.contains(i));
        }
        indices.insert(op.to_string(), set);
    }
    NonEvolvingTable { indices }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardError {
    #[error("{labels} labels exceed the fertility guard of {guard}; pass the override to search anyway")]
    TooManyLabels { labels: usize, guard: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum FertilityResult {
    Fertile {
        witnesses: Vec<FertilityWitness>,
    },
    UnknownAtBound {
        missing: Vec<BTreeSet<Label>>,
        witnesses: Vec<FertilityWitness>,
        bound: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FertilityWitness {
    pub actions: BTreeSet<Label>,
    pub process: Term,
}

impl FertilityResult {
    pub fn is_fertile(&self) -> bool {
        matches!(self, FertilityResult::Fertile { .. })
    }
}

fn subsets(labels: &[Label]) -> Vec<BTreeSet<Label>> {
    (0u64..(1u64 << labels.len()))
        .map(|m| labels.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, l)| l.clone()).collect())
        .collect()
}

/// Searches closed terms up to `size_bound` for a process realizing each subset
/// of labels as its initial actions. Never reports infertility.
pub fn initial_fertility(
    sem: &Semantics,
    size_bound: usize,
    override_guard: bool,
) -> Result<FertilityResult, GuardError> {
    let labels: Vec<Label> = sem.tss().labels().iter().cloned().collect();
    if labels.len() > FERTILITY_LABEL_GUARD && !override_guard {
        return Err(GuardError::TooManyLabels { labels: labels.len(), guard: FERTILITY_LABEL_GUARD });
    }
    let wanted = subsets(&labels);
    let mut found: BTreeMap<BTreeSet<Label>, Term> = BTreeMap::new();
    for p in enumerate_closed_terms(sem.tss().signature(), size_bound) {
        let init = sem.initial_actions(&p);
        found.entry(init).or_insert(p);
        if found.len() == wanted.len() {
            break;
        }
    }
    let witnesses: Vec<FertilityWitness> = wanted
        .iter()
        .filter_map(|s| found.get(s).map(|p| FertilityWitness { actions: s.clone(), process: p.clone() }))
        .collect();
    let missing: Vec<BTreeSet<Label>> = wanted.into_iter().filter(|s| !found.contains_key(s)).collect();
    Ok(if missing.is_empty() {
        FertilityResult::Fertile { witnesses }
    } else {
        FertilityResult::UnknownAtBound { missing, witnesses, bound: size_bound }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationCriteria {
    pub equation: String,
    pub fertility: FertilityResult,
    pub fertile: bool,
    pub lhs_linear: bool,
    pub rhs_linear: bool,
    pub lhs_is_variable: bool,
    pub rhs_is_variable: bool,
    /// Open argument occurrences sitting at evolving indices.
    pub evolving_open_arguments: Vec<String>,
    pub open_terms_at_non_evolving_indices: bool,
    /// Closed arguments at evolving indices; permitted, listed for review.
    pub closed_arguments_at_evolving_indices: Vec<String>,
    pub criteria_met: bool,
}

fn scan_positions(t: &Term, table: &NonEvolvingTable, open_bad: &mut Vec<String>, closed_note: &mut Vec<String>) {
    if let Term::App(op, args) = t {
        for (i, u) in args.iter().enumerate() {
            if !table.is_non_evolving(op, i) {
                let msg = format!("`{u}` at evolving index {i} of `{op}`");
                if u.is_closed() {
                    closed_note.push(msg);
                } else {
                    open_bad.push(msg);
                }
            }
            scan_positions(u, table, open_bad, closed_note);
        }
    }
}

/// Side conditions under which a ci-sound equation stays sound under every
/// disjoint extension. Soundness itself is not checked here.
pub fn robust_equation_criteria(
    eq: &Equation,
    sem: &Semantics,
    size_bound: usize,
    override_guard: bool,
) -> Result<EquationCriteria, GuardError> {
    let fertility = initial_fertility(sem, size_bound, override_guard)?;
    let table = non_evolving_indices(sem);
    let mut open_bad = Vec::new();
    let mut closed_note = Vec::new();
    for side in [&eq.lhs, &eq.rhs] {
        scan_positions(side, &table, &mut open_bad, &mut closed_note);
    }
    let fertile = fertility.is_fertile();
    let (lhs_linear, rhs_linear) = (eq.lhs.is_linear(), eq.rhs.is_linear());
    let (lhs_is_variable, rhs_is_variable) = (eq.lhs.is_var(), eq.rhs.is_var());
    let positions_ok = open_bad.is_empty() && !lhs_is_variable && !rhs_is_variable;
    Ok(EquationCriteria {
        equation: eq.to_string(),
        fertility,
        fertile,
        lhs_linear,
        rhs_linear,
        lhs_is_variable,
        rhs_is_variable,
        evolving_open_arguments: open_bad,
        open_terms_at_non_evolving_indices: positions_ok,
        closed_arguments_at_evolving_indices: closed_note,
        criteria_met: fertile && lhs_linear && rhs_linear && positions_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionCriteria {
    pub disjoint: Disjointness,
    pub base_format: FormatReport,
    pub improper_equations: Vec<String>,
    pub base_premise_labels: BTreeSet<Label>,
    pub extension_conclusion_labels: BTreeSet<Label>,
    pub overlap: BTreeSet<Label>,
    pub robust: bool,
}

/// Labels concluded by the extension's rules must never be tested by a
/// premise of the base, every equation must be proper, and the extension
/// must be disjoint over a positive GSOS base.
pub fn robust_extension_criteria(
    t0: &Tss,
    delta: &Tss,
    eqs: &[Equation],
) -> Result<ExtensionCriteria, TermError> {
    let disjoint = validate_disjoint_extension(t0, delta)?;
    let base_format = validate_positive_gsos(t0);
    let improper_equations: Vec<String> = eqs.iter().filter(|e| !e.is_proper()).map(|e| e.label()).collect();
    let base_premise_labels = label_usage_all(t0).premise_labels;
    let extension_conclusion_labels = label_usage(delta).conclusion_labels;
    let overlap: BTreeSet<Label> =
        base_premise_labels.intersection(&extension_conclusion_labels).cloned().collect();
    let robust = disjoint.is_disjoint() && base_format.is_ok() && improper_equations.is_empty() && overlap.is_empty();
    Ok(ExtensionCriteria {
        disjoint,
        base_format,
        improper_equations,
        base_premise_labels,
        extension_conclusion_labels,
        overlap,
        robust,
    })
}

/// Convenience used by callers holding a base and its delta by name.
pub fn union_of(t0: &Arc<Tss>, delta: &Tss) -> Result<Tss, crate::tss::TssError> {
    Tss::union(&format!("{}+{}", t0.name(), delta.name()), t0, delta)
}

#[cfg(test)]
mod tests;
