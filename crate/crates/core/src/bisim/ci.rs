use super::{strong_bisim, Bounds, Certificate, InconclusiveReason, Verdict, Witness};
use crate::ruloid::Semantics;
use crate::term::{enumerate_closed_terms, Substitution, Term};

/// Closed-instance bisimilarity, semi-decided by trying every closing
/// substitution into closed terms of size at most `bounds.term_size`.
///
/// Substitutions are tried in odometer order with the first variable (by
/// occurrence in `s`, then `t`) changing fastest, so the reported
/// counterexample is reproducible.
pub fn ci_bisim(s: &Term, t: &Term, sem: &Semantics, bounds: &Bounds) -> Verdict {
    let mut vars = s.vars_in_order();
    t.push_vars_in_order(&mut vars);
    if vars.is_empty() {
        return strong_bisim(s, t, sem, bounds);
    }
    let sig = sem.tss().signature();
    if !sig.has_constants() {
        return Verdict::Holds {
            certificate: Certificate::Vacuous {
                reason: "the signature has no constants, so no closing substitution exists".into(),
            },
        };
    }
    let pool = enumerate_closed_terms(sig, bounds.term_size);
    let bound = format!("closing substitutions into closed terms of size <= {}", bounds.term_size);
    let mut checked = 0;
    let mut undecided = 0;
    if !pool.is_empty() {
        let mut digits = vec![0usize; vars.len()];
        loop {
            let sigma: Substitution =
                vars.iter().cloned().zip(digits.iter().map(|&d| pool[d].clone())).collect();
            let (p, q) = (s.apply(&sigma), t.apply(&sigma));
            checked += 1;
            match strong_bisim(&p, &q, sem, bounds) {
                Verdict::Fails { witness } => {
                    return Verdict::Fails {
                        witness: Witness::ClosingSubstitution {
                            substitution: sigma,
                            left: p,
                            right: q,
                            inner: Box::new(witness),
                        },
                    }
                }
                Verdict::Inconclusive { .. } => undecided += 1,
                Verdict::Holds { .. } => {}
            }
            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] < pool.len() {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
    }
    Verdict::Inconclusive {
        bound,
        reason: InconclusiveReason::NoCounterexampleUpTo { term_size: bounds.term_size, substitutions: checked, undecided },
    }
}
