//! Behavioural equivalences: strong bisimilarity on closed terms and the
//! closed-instance, formal-hypothesis and hypothesis-preserving notions on
//! open terms (plus the proper variants of the latter two).
//!
//! Every checker answers with a three-valued [`Verdict`]: a definitive
//! `Holds` carrying a certificate, a definitive `Fails` carrying a witness,
//! or `Inconclusive` when a bound was hit first.

mod ci;
mod game;
mod strong;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::ruloid::Semantics;
use crate::term::{Substitution, Term};

pub use ci::ci_bisim;
pub use game::{fh_bisim, hp_bisim, pfh_bisim, php_bisim, play, Candidate, GameConfig, GameState, Side, Unmatched};
pub use strong::{distinguishing_formula, satisfies, strong_bisim, Hml};

/// Exploration limits shared by all checkers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    /// Largest closed term (in operator nodes) substituted by the ci checker.
    pub term_size: usize,
    /// Depth of stratified bisimilarity when an LTS is too large to explore.
    pub depth: usize,
    /// Largest LTS fragment explored per process.
    pub state_cap: usize,
    /// Largest number of open-term game states explored.
    pub pair_cap: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { term_size: 3, depth: 12, state_cap: 10_000, pair_cap: 5_000 }
    }
}

impl Bounds {
    /// Applies overrides written as `key=value` pairs separated by commas,
    /// e.g. `term_size=2,pair_cap=100`.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<(), String> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| format!("expected key=value, got `{item}`"))?;
            let n: usize = v.trim().parse().map_err(|_| format!("`{v}` is not a non-negative integer"))?;
            match k.trim().replace('-', "_").as_str() {
                "term_size" => self.term_size = n,
                "depth" => self.depth = n,
                "state_cap" => self.state_cap = n.max(1),
                "pair_cap" => self.pair_cap = n.max(1),
                other => return Err(format!("unknown bound `{other}`")),
            }
        }
        Ok(())
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "term_size={}, depth={}, state_cap={}, pair_cap={}",
            self.term_size, self.depth, self.state_cap, self.pair_cap
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Notion {
    Strong,
    Ci,
    Fh,
    Hp,
    Pfh,
    Php,
}

impl Notion {
    pub const ALL: [Notion; 6] = [Notion::Strong, Notion::Ci, Notion::Fh, Notion::Hp, Notion::Pfh, Notion::Php];

    pub fn as_str(self) -> &'static str {
        match self {
            Notion::Strong => "strong",
            Notion::Ci => "ci",
            Notion::Fh => "fh",
            Notion::Hp => "hp",
            Notion::Pfh => "pfh",
            Notion::Php => "php",
        }
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Notion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Notion::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| format!("unknown notion `{s}` (expected strong, ci, fh, hp, pfh or php)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Bisimulation classes of the explored states (closed terms).
    Partition { classes: Vec<Vec<Term>> },
    /// Open-term relation closed under the transfer condition. Pairs `(u, u)`
    /// and the symmetric counterparts are implicit.
    Relation { notion: Notion, states: Vec<GameState> },
    /// The signature has no constants, so there are no closing substitutions.
    Vacuous { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// A modal formula satisfied by `left` but not by `right`.
    Distinguishing { left: Term, right: Term, formula: Hml, trace: Vec<String> },
    ClosingSubstitution { substitution: Substitution, left: Term, right: Term, inner: Box<Witness> },
    Unmatched(Box<Unmatched>),
    ImproperPair { left: Term, right: Term },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InconclusiveReason {
    NoCounterexampleUpTo { term_size: usize, substitutions: usize, undecided: usize },
    CapReached { explored: usize, cap: usize },
    DepthReached { depth: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Holds { certificate: Certificate },
    Fails { witness: Witness },
    Inconclusive { bound: String, reason: InconclusiveReason },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }

    pub fn is_vacuous(&self) -> bool {
        matches!(self, Verdict::Holds { certificate: Certificate::Vacuous { .. } })
    }

    /// Holds, or no counterexample found within the bound.
    pub fn not_refuted(&self) -> bool {
        !self.fails()
    }

    pub fn summary(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "holds",
            Verdict::Fails { .. } => "fails",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Runs the checker for `notion`. Strong bisimilarity requires closed terms;
/// on open terms it is answered as ci-bisimilarity.
pub fn check(notion: Notion, s: &Term, t: &Term, sem: &Semantics, bounds: &Bounds) -> Verdict {
    match notion {
        Notion::Strong if s.is_closed() && t.is_closed() => strong_bisim(s, t, sem, bounds),
        Notion::Strong | Notion::Ci => ci_bisim(s, t, sem, bounds),
        Notion::Fh => fh_bisim(s, t, sem, bounds.pair_cap),
        Notion::Hp => hp_bisim(s, t, sem, bounds.pair_cap),
        Notion::Pfh => pfh_bisim(s, t, sem, bounds.pair_cap),
        Notion::Php => php_bisim(s, t, sem, bounds.pair_cap),
    }
}

#[cfg(test)]
mod tests;
