use super::*;
use crate::syntax::SpecDocument;

const SPEC: &str = r#"
tss Choice {
  labels: a, b;
  op zero/0; op pre_a/1; op pre_b/1; op plus/2;
  rule "pre_a": |- pre_a(x) -a-> x;
  rule "pre_b": |- pre_b(x) -b-> x;
  rule "plus_l" forall l: x -l-> x' |- plus(x, y) -l-> x';
  rule "plus_r" forall l: y -l-> y' |- plus(x, y) -l-> y';
}
tss WithA extends Choice {
  labels: a;
  op a/0;
  rule "a": |- a -a-> zero;
}
tss Meddle extends Choice {
  labels: a;
  op c/0;
  rule "c": |- c -a-> zero;
  rule "extra": |- pre_b(x) -a-> x;
}
tss Left {
  labels: a;
  op zero/0; op left/2; op idle/1;
  rule "left": x -a-> x' |- left(x, y) -a-> x';
}
"#;

fn doc() -> SpecDocument {
    SpecDocument::parse(SPEC).unwrap()
}

fn kinds(body: &str) -> Vec<ViolationKind> {
    let text = format!("tss T {{ labels: a; op f/2; op g/1; rule r: {body}; }}");
    let doc = SpecDocument::parse(&text).unwrap();
    validate_positive_gsos(doc.tss("T").unwrap()).violations.into_iter().map(|v| v.kind).collect()
}

#[test]
fn each_format_clause_is_reported() {
    use ViolationKind::*;
    assert_eq!(kinds("|- f(x, x) -a-> x"), [RepeatedSourceVariable]);
    assert_eq!(kinds("|- f(g(x), y) -a-> y"), [ConclusionArgumentNotVariable]);
    assert_eq!(kinds("|- x -a-> x"), [ConclusionSourceNotApplication]);
    assert_eq!(kinds("g(x) -a-> y |- f(x, z) -a-> z"), [PremiseSourceNotArgument]);
    assert_eq!(kinds("x -a-> g(y) |- f(x, z) -a-> y"), [PremiseTargetNotVariable, TargetVariableEscape]);
    assert_eq!(kinds("x -a-> z |- f(x, z) -a-> z"), [RepeatedPremiseTarget]);
    assert_eq!(kinds("|- f(x, y) -a-> w"), [TargetVariableEscape]);
    assert!(kinds("x -a-> x', x -a-> x'' |- f(x, y) -a-> f(x', x'')").is_empty());
}

#[test]
fn destructure_round_trips() {
    let d = doc();
    for r in d.tss("Choice").unwrap().rules() {
        assert_eq!(&destructure(r).unwrap().rebuild(), r);
    }
}

#[test]
fn disjointness() {
    let d = doc();
    let base = d.tss("Choice").unwrap();
    assert!(validate_disjoint_extension(base, d.tss("WithA").unwrap()).unwrap().is_disjoint());
    match validate_disjoint_extension(base, d.tss("Meddle").unwrap()).unwrap() {
        Disjointness::NotDisjoint { offending } => {
            assert_eq!(offending.len(), 1);
            assert_eq!(offending[0].rule, "extra");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn arity_clash_is_an_error() {
    let d = SpecDocument::parse("tss A { labels: a; op f/1; } tss B { labels: a; op f/2; }").unwrap();
    assert!(validate_disjoint_extension(d.tss("A").unwrap(), d.tss("B").unwrap()).is_err());
}

#[test]
fn labels_added_and_used() {
    let d = doc();
    let base = d.tss("Choice").unwrap();
    assert!(!adds_labels(base, d.tss("WithA").unwrap()));
    assert!(adds_labels(d.tss("Left").unwrap(), base));
    let u = label_usage(d.tss("WithA").unwrap());
    assert!(u.premise_labels.is_empty());
    assert_eq!(u.conclusion_labels.len(), 1);
    assert_eq!(label_usage_all(d.tss("WithA").unwrap()).premise_labels.len(), 2);
}

#[test]
fn non_evolving_table() {
    let d = doc();
    let sem = Semantics::new(d.tss("Left").unwrap().clone()).unwrap();
    let table = non_evolving_indices(&sem);
    assert!(!table.is_non_evolving("left", 0));
    assert!(table.is_non_evolving("left", 1));
    assert!(table.is_non_evolving("idle", 0));
    let sem = Semantics::new(d.tss("Choice").unwrap().clone()).unwrap();
    let table = non_evolving_indices(&sem);
    assert!(!table.is_non_evolving("plus", 0) && !table.is_non_evolving("plus", 1));
    assert!(!table.is_non_evolving("pre_a", 0));
}

#[test]
fn fertility_depends_on_the_bound() {
    let d = doc();
    let sem = Semantics::new(d.tss("Choice").unwrap().clone()).unwrap();
    match initial_fertility(&sem, 3, false).unwrap() {
        FertilityResult::UnknownAtBound { missing, .. } => assert_eq!(missing.len(), 1),
        other => panic!("{other:?}"),
    }
    assert!(initial_fertility(&sem, 5, false).unwrap().is_fertile());
}

#[test]
fn empty_label_set_needs_one_closed_term() {
    let d = SpecDocument::parse("tss E { labels: ; op nil/0; }").unwrap();
    let sem = Semantics::new(d.tss("E").unwrap().clone()).unwrap();
    assert!(initial_fertility(&sem, 1, false).unwrap().is_fertile());
    let d = SpecDocument::parse("tss N { labels: ; op f/1; }").unwrap();
    let sem = Semantics::new(d.tss("N").unwrap().clone()).unwrap();
    assert!(!initial_fertility(&sem, 3, false).unwrap().is_fertile());
}

#[test]
fn label_guard() {
    let labels: Vec<String> = (0..17).map(|i| format!("l{i}")).collect();
    let text = format!("tss G {{ labels: {}; op nil/0; }}", labels.join(", "));
    let d = SpecDocument::parse(&text).unwrap();
    let sem = Semantics::new(d.tss("G").unwrap().clone()).unwrap();
    assert!(matches!(initial_fertility(&sem, 1, false), Err(GuardError::TooManyLabels { labels: 17, .. })));
}

#[test]
fn equation_criteria_flag_evolving_positions() {
    let d = doc();
    let sem = Semantics::new(d.tss("Choice").unwrap().clone()).unwrap();
    let comm = Equation::new(
        Term::app("plus", vec![Term::var("x"), Term::var("y")]),
        Term::app("plus", vec![Term::var("y"), Term::var("x")]),
    );
    let c = robust_equation_criteria(&comm, &sem, 5, false).unwrap();
    assert!(c.fertile && c.lhs_linear && c.rhs_linear);
    assert_eq!(c.evolving_open_arguments.len(), 4);
    assert!(!c.criteria_met);

    let d = SpecDocument::parse(
        "tss L { labels: a; op nil/0; op stop/0; op left/2; rule l: x -a-> x' |- left(x, y) -a-> x';
                 rule n: |- nil -a-> nil; }",
    )
    .unwrap();
    let sem = Semantics::new(d.tss("L").unwrap().clone()).unwrap();
    let eq = Equation::new(
        Term::app("left", vec![Term::constant("nil"), Term::var("y")]),
        Term::app("left", vec![Term::constant("nil"), Term::var("z")]),
    );
    let c = robust_equation_criteria(&eq, &sem, 2, false).unwrap();
    assert!(c.criteria_met, "{c:?}");
    assert_eq!(c.closed_arguments_at_evolving_indices.len(), 2);
}

#[test]
fn extension_criteria() {
    let d = doc();
    let base = d.tss("Choice").unwrap();
    let c = robust_extension_criteria(base, d.tss("WithA").unwrap(), &[]).unwrap();
    assert!(!c.robust);
    assert_eq!(c.overlap.len(), 1);

    let d2 = SpecDocument::parse(
        "tss P { labels: a, b; op nil/0; op pre_a/1; rule p: |- pre_a(x) -a-> x; }
         tss Q extends P { labels: b; op k/0; rule k: |- k -b-> nil; }",
    )
    .unwrap();
    let pre = Term::app("pre_a", vec![Term::var("x")]);
    let eq = Equation::new(pre.clone(), pre);
    let c = robust_extension_criteria(d2.tss("P").unwrap(), d2.tss("Q").unwrap(), &[eq]).unwrap();
    assert!(c.robust, "{c:?}");
    let bad = Equation::new(Term::var("x"), Term::constant("nil"));
    let c = robust_extension_criteria(d2.tss("P").unwrap(), d2.tss("Q").unwrap(), &[bad]).unwrap();
    assert!(!c.robust && c.improper_equations.len() == 1);
}
