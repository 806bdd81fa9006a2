use std::sync::Arc;

use super::*;
use crate::ruloid::{Hypothesis, Semantics};
use crate::syntax::{parse_term, SpecDocument};
use crate::term::{name, Label};

const SPECS: &str = r#"
tss Plus2 {
  labels: a;
  op plus/2;
  rule "l": x -a-> x' |- plus(x, y) -a-> x';
  rule "r": y -a-> y' |- plus(x, y) -a-> y';
}
tss F {
  labels: a;
  op f/1;
  rule "f": x -a-> x' |- f(x) -a-> x';
}
tss Fb extends F {
  labels: b;
  op b/0;
  rule "b": |- b -b-> b;
}
tss Dup {
  labels: a;
  op plus/2;
  rule "l": x -a-> x' |- plus(x, y) -a-> plus(x', x');
  rule "r": y -a-> y' |- plus(x, y) -a-> y';
}
tss Dupb extends Dup {
  labels: b;
  op b/0;
  rule "b": |- b -b-> b;
}
tss Choice {
  labels: a, b;
  op zero/0; op plus/2;
  rule "l" forall l: x -l-> x' |- plus(x, y) -l-> x';
  rule "r" forall l: y -l-> y' |- plus(x, y) -l-> y';
}
tss ChoiceA extends Choice {
  labels: a;
  op a/0;
  rule "a": |- a -a-> zero;
}
tss Omega {
  labels: a, b;
  op aw/0; op f/1;
  rule "aw": |- aw -a-> aw;
  rule "f" forall l: x -l-> x' |- f(x) -l-> x';
}
tss OmegaA extends Omega {
  labels: a;
  op a/0; op zero/0;
  rule "a": |- a -a-> zero;
}
tss Ccs {
  labels: a, b;
  op zero/0; op pre_a/1; op pre_b/1; op plus/2;
  rule "pa": |- pre_a(x) -a-> x;
  rule "pb": |- pre_b(x) -b-> x;
  rule "l" forall l: x -l-> x' |- plus(x, y) -l-> x';
  rule "r" forall l: y -l-> y' |- plus(x, y) -l-> y';
}
"#;

fn load(name: &str) -> Semantics {
    let doc = SpecDocument::parse(SPECS).unwrap();
    Semantics::new(Arc::clone(doc.tss(name).unwrap())).unwrap()
}

fn term(sem: &Semantics, text: &str) -> Term {
    parse_term(text, sem.tss().signature()).unwrap()
}

fn states(v: &Verdict) -> Vec<GameState> {
    match v {
        Verdict::Holds { certificate: Certificate::Relation { states, .. } } => states.clone(),
        other => panic!("expected a relation, got {other:?}"),
    }
}

#[test]
fn strong_examples() {
    let sem = load("Ccs");
    let b = Bounds::default();
    let v = strong_bisim(&term(&sem, "plus(zero, pre_a(zero))"), &term(&sem, "pre_a(zero)"), &sem, &b);
    assert!(v.holds(), "{v:?}");
    let (p, q) = (term(&sem, "pre_a(zero)"), term(&sem, "zero"));
    match strong_bisim(&p, &q, &sem, &b) {
        Verdict::Fails { witness: Witness::Distinguishing { formula, trace, .. } } => {
            assert_eq!(formula.to_string(), "<a>tt");
            assert_eq!(trace, ["a"]);
            assert!(satisfies(&sem, &p, &formula) && !satisfies(&sem, &q, &formula));
        }
        other => panic!("{other:?}"),
    }
    let sem = load("ChoiceA");
    let v = strong_bisim(&term(&sem, "plus(a, zero)"), &term(&sem, "zero"), &sem, &b);
    assert!(v.fails());
}

#[test]
fn distinguishing_formulas_are_checked_semantically() {
    let sem = load("Ccs");
    let b = Bounds::default();
    let p = term(&sem, "pre_a(plus(pre_a(zero), pre_b(zero)))");
    let q = term(&sem, "plus(pre_a(pre_a(zero)), pre_a(pre_b(zero)))");
    match strong_bisim(&p, &q, &sem, &b) {
        Verdict::Fails { witness: Witness::Distinguishing { formula, .. } } => {
            assert!(satisfies(&sem, &p, &formula));
            assert!(!satisfies(&sem, &q, &formula));
        }
        other => panic!("{other:?}"),
    }
    let phi = distinguishing_formula(&sem, &q, &p, 5).unwrap();
    assert!(satisfies(&sem, &q, &phi) && !satisfies(&sem, &p, &phi));
}

#[test]
fn capped_strong_bisim_degrades_to_depth_bound() {
    let sem = load("Omega");
    let b = Bounds { state_cap: 1, depth: 3, ..Bounds::default() };
    let v = strong_bisim(&term(&sem, "f(aw)"), &term(&sem, "aw"), &sem, &b);
    assert!(v.is_inconclusive(), "{v:?}");
    let v = strong_bisim(&term(&sem, "f(aw)"), &term(&sem, "aw"), &sem, &Bounds::default());
    assert!(v.holds());
}

#[test]
fn ci_choice_with_and_without_a() {
    let b = Bounds::default();
    let sem = load("Choice");
    let v = ci_bisim(&term(&sem, "plus(x, y)"), &term(&sem, "zero"), &sem, &b);
    assert!(matches!(v, Verdict::Inconclusive { reason: InconclusiveReason::NoCounterexampleUpTo { .. }, .. }), "{v:?}");

    let sem = load("ChoiceA");
    let (s, t) = (term(&sem, "plus(x, y)"), term(&sem, "zero"));
    match ci_bisim(&s, &t, &sem, &b) {
        Verdict::Fails { witness: Witness::ClosingSubstitution { substitution, .. } } => {
            assert!(strong_bisim(&s.apply(&substitution), &t.apply(&substitution), &sem, &b).fails());
        }
        other => panic!("{other:?}"),
    }
    let sigma = Substitution::new().with("x", Term::constant("a")).with("y", Term::constant("zero"));
    assert!(strong_bisim(&s.apply(&sigma), &t.apply(&sigma), &sem, &b).fails());
}

#[test]
fn ci_omega() {
    let b = Bounds::default();
    let sem = load("Omega");
    assert!(!ci_bisim(&term(&sem, "f(x)"), &term(&sem, "aw"), &sem, &b).fails());
    let sem = load("OmegaA");
    match ci_bisim(&term(&sem, "f(x)"), &term(&sem, "aw"), &sem, &b) {
        Verdict::Fails { witness: Witness::ClosingSubstitution { substitution, .. } } => {
            assert_eq!(substitution.get("x"), Some(&Term::constant("a")));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn ci_is_vacuous_without_constants() {
    let sem = load("F");
    let v = ci_bisim(&term(&sem, "f(x)"), &term(&sem, "x"), &sem, &Bounds::default());
    assert!(v.is_vacuous());
}

#[test]
fn fh_associativity_certificate() {
    let sem = load("Plus2");
    let (s, t) = (term(&sem, "plus(x, plus(y, z))"), term(&sem, "plus(plus(x, y), z)"));
    let v = fh_bisim(&s, &t, &sem, 1000);
    let root = GameState::new(s, t, []).canonical();
    assert!(states(&v).contains(&root));
}

#[test]
fn fh_f_x_against_x() {
    let (f, x) = (Term::app("f", vec![Term::var("x")]), Term::var("x"));
    let sem = load("F");
    assert!(fh_bisim(&f, &x, &sem, 100).holds());
    assert!(hp_bisim(&f, &x, &sem, 100).holds());
    let sem = load("Fb");
    match fh_bisim(&f, &x, &sem, 100) {
        Verdict::Fails { witness: Witness::Unmatched(u) } => {
            assert_eq!(u.side, Side::Right);
            assert_eq!(u.ruloid, "x -b-> h0 |- x -b-> h0");
            assert!(u.candidates.is_empty());
        }
        other => panic!("{other:?}"),
    }
    assert!(hp_bisim(&f, &x, &sem, 100).fails());
}

#[test]
fn hp_commutativity_with_duplicating_rule() {
    let (s, t) = (
        Term::app("plus", vec![Term::var("x"), Term::var("y")]),
        Term::app("plus", vec![Term::var("y"), Term::var("x")]),
    );
    let sem = load("Dup");
    let v = hp_bisim(&s, &t, &sem, 1000);
    let expected = GameState::new(
        Term::app("plus", vec![Term::var("x'"), Term::var("x'")]),
        Term::var("x'"),
        [Hypothesis { source: name("x"), label: Label::new("a"), target: name("x'") }],
    )
    .canonical();
    assert!(states(&v).contains(&expected), "{v:?}");
    assert!(fh_bisim(&s, &t, &sem, 1000).holds());
    assert!(php_bisim(&s, &t, &sem, 1000).fails());
    assert!(pfh_bisim(&s, &t, &sem, 1000).fails());
    let sem = load("Dupb");
    assert!(hp_bisim(&s, &t, &sem, 1000).fails());
    assert!(fh_bisim(&s, &t, &sem, 1000).fails());
}

#[test]
fn proper_variants() {
    let sem = load("F");
    let (f, x) = (Term::app("f", vec![Term::var("x")]), Term::var("x"));
    assert!(matches!(pfh_bisim(&f, &x, &sem, 10), Verdict::Fails { witness: Witness::ImproperPair { .. } }));
    assert!(pfh_bisim(&x, &x, &sem, 10).holds());
    assert!(php_bisim(&x, &x, &sem, 10).holds());
    let sem = load("Plus2");
    let (s, t) = (term(&sem, "plus(x, plus(y, z))"), term(&sem, "plus(plus(x, y), z)"));
    assert!(pfh_bisim(&s, &t, &sem, 1000).holds());
}

#[test]
fn closed_terms_agree_with_strong() {
    let sem = load("Ccs");
    let b = Bounds::default();
    let terms = crate::term::enumerate_closed_terms(sem.tss().signature(), 3);
    for p in &terms {
        for q in &terms {
            let strong = strong_bisim(p, q, &sem, &b).holds();
            assert_eq!(fh_bisim(p, q, &sem, 1000).holds(), strong, "{p} {q}");
            assert_eq!(hp_bisim(p, q, &sem, 1000).holds(), strong, "{p} {q}");
        }
    }
}

#[test]
fn pair_cap_gives_inconclusive() {
    let sem = load("Dup");
    let (s, t) = (term(&sem, "plus(x, y)"), term(&sem, "plus(y, x)"));
    let v = hp_bisim(&s, &t, &sem, 1);
    assert!(matches!(v, Verdict::Inconclusive { reason: InconclusiveReason::CapReached { .. }, .. }), "{v:?}");
}

#[test]
fn bounds_overrides() {
    let mut b = Bounds::default();
    b.apply_overrides("term_size=2, pair-cap=7").unwrap();
    assert_eq!((b.term_size, b.pair_cap), (2, 7));
    assert!(b.apply_overrides("nope=1").is_err());
    assert!(b.apply_overrides("depth").is_err());
    assert_eq!("php".parse::<Notion>().unwrap(), Notion::Php);
}

