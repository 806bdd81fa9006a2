//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p opensos-cli --test acceptance -- --nocapture` to
//! see the report.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use opensos::bisim::{strong_bisim, Certificate, GameState, InconclusiveReason, Witness};
use opensos::equations::soundness_sweep;
use opensos::gsos::{initial_fertility, robust_extension_criteria, FertilityResult};
use opensos::term::{enumerate_closed_terms, enumerate_terms, name};
use opensos::{
    check, parse_term, Bounds, Equation, Hypothesis, Label, Notion, Semantics, SpecDocument, Substitution, Term, Tss,
    Verdict,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus() -> SpecDocument {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "sos"))
        .collect();
    files.sort();
    let mut doc = SpecDocument::default();
    for f in files {
        doc.parse_more(&std::fs::read_to_string(&f).unwrap()).unwrap();
    }
    doc
}

struct Ctx {
    doc: SpecDocument,
}

impl Ctx {
    fn tss(&self, n: &str) -> Arc<Tss> {
        self.doc.tss(n).unwrap_or_else(|| panic!("no TSS {n}")).clone()
    }
    fn sem(&self, n: &str) -> Semantics {
        Semantics::new(self.tss(n)).unwrap()
    }
    fn eqs(&self, n: &str) -> Vec<Equation> {
        self.doc.equations.iter().filter(|d| d.tss.as_deref() == Some(n)).map(|d| d.equation.clone()).collect()
    }
    fn eq(&self, label: &str) -> Equation {
        self.doc.equations.iter().find(|d| d.equation.label() == label).unwrap().equation.clone()
    }
}

fn term(sem: &Semantics, text: &str) -> Term {
    parse_term(text, sem.tss().signature()).unwrap()
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// A `Fails` ci witness must re-verify: the substitution produces the
/// reported closed pair, and strong bisimilarity separates it.
fn revalidate_ci_witness(v: &Verdict, eq: &Equation, sem: &Semantics) -> Result<Substitution, String> {
    match v {
        Verdict::Fails { witness: Witness::ClosingSubstitution { substitution, left, right, .. } } => {
            ensure(eq.lhs.apply(substitution) == *left && eq.rhs.apply(substitution) == *right, "witness pair mismatch")?;
            ensure(strong_bisim(left, right, sem, &Bounds::default()).fails(), "witness does not re-verify")?;
            Ok(substitution.clone())
        }
        other => Err(format!("expected a ci counterexample, got {}", other.summary())),
    }
}

fn relation_states(v: &Verdict) -> Result<Vec<GameState>, String> {
    match v {
        Verdict::Holds { certificate: Certificate::Relation { states, .. } } => Ok(states.clone()),
        other => Err(format!("expected a relation certificate, got {}", other.summary())),
    }
}

fn criterion_1(c: &Ctx) -> Check {
    let sem = c.sem("Ccs1");
    let moves = sem.transitions(&term(&sem, "plus(zero, pre_a(zero))"));
    ensure(moves.contains(&(Label::new("a"), term(&sem, "zero"))), "0 + a.0 lacks its a-move")?;
    ensure(sem.transitions(&term(&sem, "zero")).is_empty(), "0 moves")?;
    let axioms = c.eqs("Ccs1");
    ensure(axioms.len() == 4, "expected four axioms")?;
    let b3 = Bounds { term_size: 3, ..Bounds::default() };
    let base = soundness_sweep(&axioms, &sem, Notion::Ci, &b3);
    ensure(!base.any_fails(), "an axiom fails on the base")?;
    let full = c.sem("Ccs1Full");
    let mut broken = Vec::new();
    for ax in &axioms {
        let v = check(Notion::Ci, &ax.lhs, &ax.rhs, &full, &b3);
        match ax.label().as_str() {
            "idem" | "unit" => {
                let s = revalidate_ci_witness(&v, ax, &full)?;
                broken.push(format!("{} via {s}", ax.label()));
            }
            _ => ensure(!v.fails(), format!("{} fails after the extension", ax.label()))?,
        }
    }
    Ok(format!("4 axioms unrefuted on base; extension breaks {}", broken.join(", ")))
}

fn criterion_2(c: &Ctx) -> Check {
    let sem = c.sem("PlusTwo");
    let (s, t) = (term(&sem, "plus(x, plus(y, z))"), term(&sem, "plus(plus(x, y), z)"));
    let v = check(Notion::Fh, &s, &t, &sem, &Bounds::default());
    let states = relation_states(&v)?;
    // the listed relation: the pair, its mirror image and the identity
    let listed = GameState::new(s.clone(), t.clone(), []).canonical();
    let mirrored = GameState::new(t, s, []).canonical();
    ensure(states.contains(&listed) && states.contains(&mirrored), "listed pair missing from the certificate")?;
    let extra: Vec<String> = states.iter().filter(|st| **st != listed && st.s != st.t).map(|st| st.to_string()).collect();
    ensure(extra.is_empty(), format!("certificate has unlisted pairs: {extra:?}"))?;
    Ok(format!("certificate = {{{listed}}} plus implicit identity and symmetry"))
}

fn criterion_3(c: &Ctx) -> Check {
    let (f, x) = (Term::app("f", vec![Term::var("x")]), Term::var("x"));
    let b = Bounds::default();
    let base = c.sem("F");
    ensure(check(Notion::Fh, &f, &x, &base, &b).holds(), "fh does not hold on the base")?;
    ensure(check(Notion::Hp, &f, &x, &base, &b).holds(), "hp does not hold on the base")?;
    let ext = c.sem("FWithB");
    match check(Notion::Fh, &f, &x, &ext, &b) {
        Verdict::Fails { witness: Witness::Unmatched(u) } => {
            ensure(u.ruloid == "x -b-> h0 |- x -b-> h0", format!("unexpected witness ruloid {}", u.ruloid))?
        }
        other => return Err(format!("fh on the extension: {}", other.summary())),
    }
    ensure(check(Notion::Hp, &f, &x, &ext, &b).fails(), "hp does not fail on the extension")?;
    match check(Notion::Pfh, &f, &x, &base, &b) {
        Verdict::Fails { witness: Witness::ImproperPair { left, right } } => {
            ensure(left == f && right == x, "wrong improper pair")?
        }
        other => return Err(format!("pfh on the base: {}", other.summary())),
    }
    Ok("fh/hp hold, then fail with {x -b-> h0} |- x -b-> h0; pfh improper (f(x), x)".into())
}

fn criterion_4(c: &Ctx) -> Check {
    let sem = c.sem("Dup");
    let (s, t) = (term(&sem, "plus(x, y)"), term(&sem, "plus(y, x)"));
    let b = Bounds::default();
    let states = relation_states(&check(Notion::Hp, &s, &t, &sem, &b))?;
    let forced = GameState::new(
        Term::app("plus", vec![Term::var("x'"), Term::var("x'")]),
        Term::var("x'"),
        [Hypothesis { source: name("x"), label: Label::new("a"), target: name("x'") }],
    )
    .canonical();
    ensure(states.contains(&forced), "state (x'+x', x') under {x -a-> x'} missing")?;
    ensure(check(Notion::Hp, &s, &t, &c.sem("DupWithB"), &b).fails(), "hp does not fail after the b-extension")?;
    ensure(check(Notion::Php, &s, &t, &sem, &b).fails(), "php does not fail on the base")?;
    Ok(format!("hp certificate contains {forced}; fails after extension; php fails"))
}

fn criterion_5(c: &Ctx) -> Check {
    let eq = c.eq("dead");
    let base = c.sem("Choice");
    let b4 = Bounds { term_size: 4, ..Bounds::default() };
    let v = check(Notion::Ci, &eq.lhs, &eq.rhs, &base, &b4);
    ensure(
        matches!(v, Verdict::Inconclusive { reason: InconclusiveReason::NoCounterexampleUpTo { .. }, .. }),
        format!("base: {}", v.summary()),
    )?;
    let ext = c.sem("ChoiceWithA");
    let v = check(Notion::Ci, &eq.lhs, &eq.rhs, &ext, &Bounds::default());
    let sigma = revalidate_ci_witness(&v, &eq, &ext)?;
    // the counterexample named in the literature is also a valid one
    let named = Substitution::new().with("x", Term::constant("a")).with("y", Term::constant("zero"));
    ensure(
        strong_bisim(&eq.lhs.apply(&named), &eq.rhs.apply(&named), &ext, &Bounds::default()).fails(),
        "{x := a, y := zero} is not a counterexample",
    )?;
    Ok(format!("no counterexample at size <= 4 on base; extension witness {sigma} re-verified"))
}

fn criterion_6(c: &Ctx) -> Check {
    let eq = c.eq("loop");
    let base = c.sem("Omega");
    let b = Bounds::default();
    ensure(!check(Notion::Ci, &eq.lhs, &eq.rhs, &base, &b).fails(), "fails on the base")?;
    let ext = c.sem("OmegaWithA");
    let sigma = revalidate_ci_witness(&check(Notion::Ci, &eq.lhs, &eq.rhs, &ext, &b), &eq, &ext)?;
    for bound in 1..=6 {
        match initial_fertility(&base, bound, false).map_err(|e| e.to_string())? {
            FertilityResult::UnknownAtBound { missing, .. } => {
                ensure(missing.contains(&BTreeSet::new()), format!("empty set realized at bound {bound}"))?
            }
            FertilityResult::Fertile { .. } => return Err(format!("fertile at bound {bound}")),
        }
    }
    Ok(format!("base unrefuted; extension witness {sigma}; {{}} unrealized at bounds 1..=6"))
}

fn criterion_7(c: &Ctx) -> Check {
    let robust = |base: &str, ext: &str| {
        robust_extension_criteria(&c.tss(base), &c.tss(ext), &c.eqs(base)).map(|r| (r.robust, r.overlap)).unwrap()
    };
    ensure(robust("Prefix", "PrefixChoice").0, "prefix + choice not robust")?;
    ensure(robust("Restrict", "RestrictPar").0, "restriction + parallel not robust")?;
    let (r5, overlap) = robust("Choice", "ChoiceWithA");
    ensure(!r5 && overlap == BTreeSet::from([Label::new("a")]), "choice + a should overlap on {a}")?;
    let b3 = Bounds { term_size: 3, ..Bounds::default() };
    let mut vacuous = true;
    for n in ["Restrict", "RestrictPar"] {
        let r = soundness_sweep(&c.eqs(n), &c.sem(n), Notion::Ci, &b3);
        ensure(r.axioms.len() == 6 && !r.any_fails(), format!("restriction axioms refuted on {n}"))?;
        vacuous &= r.axioms.iter().all(|a| a.verdict.is_vacuous());
    }
    Ok(format!(
        "robust, robust, not robust (overlap {{a}}); restriction axioms unrefuted before and after{}",
        if vacuous { " (vacuously: no constants)" } else { "" }
    ))
}

// ---------------------------------------------------------------------------
// random positive GSOS specifications

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    /// Rule target that never duplicates a variable and uses at most one of
    /// each argument and its derivative, so terms grow at most additively
    /// along a computation.
    fn target(&mut self, slots: &[Vec<String>], ops: &[(String, usize)]) -> String {
        let mut pool: Vec<String> = slots.iter().map(|s| s.choose(&mut self.rng).unwrap().clone()).collect();
        pool.shuffle(&mut self.rng);
        let constants: Vec<&String> = ops.iter().filter(|o| o.1 == 0).map(|o| &o.0).collect();
        let (op, arity) = ops.choose(&mut self.rng).unwrap().clone();
        if arity == 0 || self.rng.gen_bool(0.4) {
            return match pool.first() {
                Some(v) if self.rng.gen_bool(0.7) => v.clone(),
                _ => constants.choose(&mut self.rng).map(|c| c.to_string()).unwrap_or_else(|| pool[0].clone()),
            };
        }
        let args: Vec<String> = (0..arity)
            .map(|_| match pool.pop() {
                Some(v) if self.rng.gen_bool(0.8) => v,
                other => {
                    if let Some(v) = other {
                        pool.push(v);
                    }
                    constants.choose(&mut self.rng).map(|c| c.to_string()).unwrap_or_else(|| "c0".into())
                }
            })
            .collect();
        format!("{op}({})", args.join(", "))
    }

    fn rules(&mut self, defined: &[(String, usize)], sig: &[(String, usize)], premise_labels: &[String], conclusion_labels: &[String]) -> String {
        let mut out = String::new();
        for (op, arity) in defined {
            for r in 0..self.rng.gen_range(0..=2) {
                let args: Vec<String> = (0..*arity).map(|i| format!("x{i}")).collect();
                let mut slots: Vec<Vec<String>> = Vec::new();
                let mut premises = Vec::new();
                for a in &args {
                    let mut slot = vec![a.clone()];
                    if self.rng.gen_bool(0.5) {
                        let y = format!("{a}'").replace('x', "y");
                        premises.push(format!("{a} -{}-> {y}", premise_labels.choose(&mut self.rng).unwrap()));
                        slot.push(y);
                    }
                    slots.push(slot);
                }
                let src = if args.is_empty() { op.clone() } else { format!("{op}({})", args.join(", ")) };
                let target = self.target(&slots, sig);
                let label = conclusion_labels.choose(&mut self.rng).unwrap();
                out.push_str(&format!("  rule \"{op}_{r}\": {} |- {src} -{label}-> {target};\n", premises.join(", ")));
            }
        }
        out
    }

    /// A base TSS `G` and a disjoint extension `GE`, optionally adding a label.
    fn spec(&mut self, add_label: bool) -> String {
        let labels: Vec<String> = (0..self.rng.gen_range(1..=2)).map(|i| format!("l{i}")).collect();
        let mut ops = vec![("c0".to_string(), 0)];
        for i in 1..self.rng.gen_range(1..=3) {
            ops.push((format!("o{i}"), self.rng.gen_range(0..=2)));
        }
        let mut text = format!("tss G {{\n  labels: {};\n", labels.join(", "));
        for (o, a) in &ops {
            text.push_str(&format!("  op {o}/{a};\n"));
        }
        text.push_str(&self.rules(&ops, &ops, &labels, &labels));
        text.push_str("}\n");
        let mut all_labels = labels.clone();
        if add_label {
            all_labels.push("n0".into());
        }
        let new_ops: Vec<(String, usize)> = (0..self.rng.gen_range(1..=2)).map(|i| (format!("e{i}"), self.rng.gen_range(0..=2))).collect();
        let mut sig = ops.clone();
        sig.extend(new_ops.iter().cloned());
        text.push_str(&format!("tss GE extends G {{\n  labels: {};\n", all_labels.join(", ")));
        for (o, a) in &new_ops {
            text.push_str(&format!("  op {o}/{a};\n"));
        }
        text.push_str(&self.rules(&new_ops, &sig, &all_labels, &all_labels));
        text.push_str("}\n");
        text
    }

    /// A random pair of open terms; often a rearrangement of the same term.
    fn pair(&mut self, pool: &[Term]) -> (Term, Term) {
        let s = pool.choose(&mut self.rng).unwrap().clone();
        let t = match self.rng.gen_range(0..4) {
            0 | 1 => pool.choose(&mut self.rng).unwrap().clone(),
            2 => swap_args(&s),
            _ => s.apply(&Substitution::new().with("x", Term::var("y")).with("y", Term::var("x"))),
        };
        (s, t)
    }
}

fn swap_args(t: &Term) -> Term {
    match t {
        Term::App(f, args) if args.len() == 2 => Term::App(f.clone(), vec![swap_args(&args[1]), swap_args(&args[0])]),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(swap_args).collect()),
        v => v.clone(),
    }
}

const CASES: u64 = 200;

fn small() -> Bounds {
    Bounds { term_size: 2, depth: 6, state_cap: 100, pair_cap: 40 }
}

struct Generated {
    base: Semantics,
    ext: Semantics,
    open: Vec<Term>,
    closed: Vec<Term>,
}

fn generate(seed: u64, add_label: bool) -> (Gen, Generated) {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed) };
    let text = g.spec(add_label);
    let doc = SpecDocument::parse(&text).unwrap_or_else(|e| panic!("generated spec does not parse: {e}\n{text}"));
    let t0 = doc.tss("G").unwrap().clone();
    let t1 = doc.tss("GE").unwrap().clone();
    let open = enumerate_terms(t0.signature(), &[name("x"), name("y")], 3);
    let closed = enumerate_closed_terms(t0.signature(), 3);
    let base = Semantics::new(t0).unwrap_or_else(|e| panic!("generated spec is not positive GSOS: {e:?}\n{text}"));
    let ext = Semantics::new(t1).unwrap();
    (g, Generated { base, ext, open, closed })
}

fn criterion_8(_: &Ctx) -> Check {
    let b = small();
    let mut violations = Vec::new();
    let (mut fh_holds, mut closed_agree, mut kept_nl, mut kept_proper, mut probes) = (0, 0, 0, 0, 0);
    for case in 0..CASES {
        // (a) hierarchy on open terms
        let (mut g, gen) = generate(case, false);
        let (s, t) = g.pair(&gen.open);
        let fh = check(Notion::Fh, &s, &t, &gen.base, &b);
        let hp = check(Notion::Hp, &s, &t, &gen.base, &b);
        let ci = check(Notion::Ci, &s, &t, &gen.base, &b);
        fh_holds += fh.holds() as usize;
        if fh.holds() && hp.fails() {
            violations.push(format!("(a) seed {case}: fh holds, hp fails for {s} ~ {t}"));
        }
        if (fh.holds() || hp.holds()) && ci.fails() {
            violations.push(format!("(a) seed {case}: fh/hp holds, ci fails for {s} ~ {t}"));
        }

        // (b) closed-term coincidence
        if !gen.closed.is_empty() {
            let p = gen.closed.choose(&mut g.rng).unwrap().clone();
            let q = gen.closed.choose(&mut g.rng).unwrap().clone();
            let verdicts: Vec<Verdict> = [Notion::Strong, Notion::Ci, Notion::Fh, Notion::Hp]
                .iter()
                .map(|&n| check(n, &p, &q, &gen.base, &b))
                .collect();
            let definitive: BTreeSet<bool> = verdicts.iter().filter(|v| !v.is_inconclusive()).map(Verdict::holds).collect();
            if definitive.len() > 1 {
                violations.push(format!("(b) seed {case}: notions disagree on {p} ~ {q}"));
            } else {
                closed_agree += 1;
            }
        }

        // (c) no-new-label extensions keep fh/hp
        for (n, v) in [(Notion::Fh, &fh), (Notion::Hp, &hp)] {
            if v.holds() {
                kept_nl += 1;
                if check(n, &s, &t, &gen.ext, &b).fails() {
                    violations.push(format!("(c) seed {case}: {n} {s} ~ {t} broken by a no-new-label extension"));
                }
            }
        }

        // (e) conservativity: old closed terms keep exactly their transitions
        for p in &gen.closed {
            probes += 1;
            if gen.base.transitions(p) != gen.ext.transitions(p) {
                violations.push(format!("(e) seed {case}: transitions of {p} changed"));
            }
        }

        // (d) proper variants survive label-adding extensions
        let (mut g, gen) = generate(case + 10_000, true);
        let (s, t) = g.pair(&gen.open);
        for n in [Notion::Pfh, Notion::Php] {
            if check(n, &s, &t, &gen.base, &b).holds() {
                kept_proper += 1;
                if check(n, &s, &t, &gen.ext, &b).fails() {
                    violations.push(format!("(d) seed {case}: {n} {s} ~ {t} broken by an extension"));
                }
            }
        }
        for p in &gen.closed {
            probes += 1;
            if gen.base.transitions(p) != gen.ext.transitions(p) {
                violations.push(format!("(e) seed {}: transitions of {p} changed", case + 10_000));
            }
        }
    }
    if !violations.is_empty() {
        return Err(format!("{} violation(s): {}", violations.len(), violations.join("; ")));
    }
    Ok(format!(
        "{CASES} cases per suite: (a) {fh_holds} fh-holds pairs, (b) {closed_agree} closed pairs agree, \
         (c) {kept_nl} fh/hp holds preserved, (d) {kept_proper} pfh/php holds preserved, (e) {probes} conservativity probes"
    ))
}

// ---------------------------------------------------------------------------

/// Transitions of a closed term by naive proof search over the raw rules;
/// shares no code with the ruloid engine.
fn oracle(tss: &Tss, p: &Term) -> BTreeSet<(Label, Term)> {
    fn bind(pattern: &Term, t: &Term, s: &mut Substitution) -> bool {
        match (pattern, t) {
            (Term::Var(x), _) => match s.get(x) {
                Some(b) => b == t,
                None => {
                    s.insert(x.clone(), t.clone());
                    true
                }
            },
            (Term::App(f, ps), Term::App(g, ts)) => {
                f == g && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, u)| bind(p, u, s))
            }
            _ => false,
        }
    }
    let mut out = BTreeSet::new();
    for rule in tss.rules() {
        let mut s = Substitution::new();
        if !bind(&rule.conclusion.source, p, &mut s) {
            continue;
        }
        let mut partial = vec![s];
        for prem in &rule.premises {
            partial = partial
                .iter()
                .flat_map(|s| {
                    oracle(tss, &prem.source.apply(s))
                        .into_iter()
                        .filter(|(l, _)| *l == prem.label)
                        .filter_map(|(_, q)| {
                            let mut s2 = s.clone();
                            bind(&prem.target, &q, &mut s2).then_some(s2)
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        for s in partial {
            out.insert((rule.conclusion.label.clone(), rule.conclusion.target.apply(&s)));
        }
    }
    out
}

fn criterion_9(c: &Ctx) -> Check {
    let (mut systems, mut checks) = (0, 0);
    for n in c.doc.tss_names() {
        let Ok(sem) = Semantics::new(c.tss(n)) else { continue };
        systems += 1;
        let tss = sem.tss().clone();
        let open = enumerate_terms(tss.signature(), &[name("x"), name("y")], 3);
        let images = enumerate_closed_terms(tss.signature(), 2);
        for t in &open {
            let ruloids = sem.ruloids(t);
            let vars = t.vars_in_order();
            for a in &images {
                for b in &images {
                    let mut sigma = Substitution::new();
                    for (v, img) in vars.iter().zip([a, b]) {
                        sigma.insert(v.clone(), img.clone());
                    }
                    if vars.len() < 2 && b != &images[0] {
                        continue;
                    }
                    let via: BTreeSet<(Label, Term)> = ruloids.iter().flat_map(|r| sem.instantiate_all(r, &sigma)).collect();
                    let direct = oracle(&tss, &t.apply(&sigma));
                    checks += 1;
                    ensure(via == direct, format!("{n}: {t} under {sigma}: ruloids give {via:?}, rules give {direct:?}"))?;
                }
            }
        }
    }
    Ok(format!("{checks} (term, substitution) instances across {systems} positive GSOS systems agree exactly"))
}

fn corpus_json() -> (i32, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let dir = corpus_dir().to_string_lossy().into_owned();
    let code = opensos_cli::run(["opensos", "corpus", dir.as_str(), "--json"], &mut out, &mut err);
    (code, out)
}

fn criterion_10(_: &Ctx) -> Check {
    let (c1, a) = corpus_json();
    let (c2, b) = corpus_json();
    ensure(c1 == 0 && c2 == 0, format!("corpus exit codes {c1}, {c2}"))?;
    ensure(a == b, "corpus JSON reports differ between runs")?;
    Ok(format!("two corpus runs produced identical {}-byte JSON reports", a.len()))
}

#[test]
fn acceptance() {
    let ctx = Ctx { doc: corpus() };
    let criteria: [(&str, fn(&Ctx) -> Check); 10] = [
        ("CCS fragment axioms and their failure under new labels", criterion_1),
        ("fh certificate for associativity of choice", criterion_2),
        ("f(x) = x under fh, hp and pfh", criterion_3),
        ("commutativity of duplicating choice under hp and php", criterion_4),
        ("x + y = zero under ci before and after a moving constant", criterion_5),
        ("f(x) = aw under ci and initial fertility", criterion_6),
        ("robust extensions and restriction axioms", criterion_7),
        ("randomized preservation and coincidence properties", criterion_8),
        ("ruloid instantiation equals direct semantics", criterion_9),
        ("deterministic corpus reports", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (title, f)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| f(&ctx))).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2}: PASS  {title} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2}: FAIL  {title} ({secs:.1}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
