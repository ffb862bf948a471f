//! Formula syntax shared by all three quantified announcement languages.
//!
//! The abstract syntax keeps only the primitive basis: atoms, `true`,
//! negation, conjunction, individual knowledge, common knowledge, public
//! announcement, and the three quantifiers. Duals, disjunction, implication
//! and `false` are derived forms that the parser and the constructors below
//! expand immediately, so structural equality is meaningful everywhere.

mod parse;

pub use parse::{parse, ParseError, ParseErrorKind};

use std::collections::BTreeSet;
use std::fmt;

use crate::kripke::{AgentId, PropId};

pub type AgentSet = BTreeSet<AgentId>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// Propositional atom.
    Atom(PropId),
    /// The verum constant. `false` is represented as `~true`.
    Top,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// Individual knowledge, `K a phi`.
    Know(AgentId, Box<Formula>),
    /// Common knowledge among a (possibly empty) group, `C {..} phi`.
    Common(AgentSet, Box<Formula>),
    /// Public announcement, `[ann psi] phi`.
    Announce(Box<Formula>, Box<Formula>),
    /// Arbitrary-announcement quantifier, `[!] phi`.
    ApalBox(Box<Formula>),
    /// Group-announcement quantifier, `[grp {..}] phi`.
    GalBox(AgentSet, Box<Formula>),
    /// Coalition-announcement quantifier, `[coa {..}] phi`.
    CalBox(AgentSet, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(PropId::new(name))
    }

    pub fn top() -> Formula {
        Formula::Top
    }

    pub fn bottom() -> Formula {
        Formula::Top.not()
    }

    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        self.not().and(other.not()).not()
    }

    pub fn implies(self, other: Formula) -> Formula {
        self.and(other.not()).not()
    }

    pub fn know(agent: impl Into<AgentId>, body: Formula) -> Formula {
        Formula::Know(agent.into(), Box::new(body))
    }

    /// `<a> phi` as `~K a ~phi`.
    pub fn know_dia(agent: impl Into<AgentId>, body: Formula) -> Formula {
        Formula::know(agent, body.not()).not()
    }

    pub fn common(group: AgentSet, body: Formula) -> Formula {
        Formula::Common(group, Box::new(body))
    }

    pub fn common_dia(group: AgentSet, body: Formula) -> Formula {
        Formula::common(group, body.not()).not()
    }

    pub fn announce(ann: Formula, body: Formula) -> Formula {
        Formula::Announce(Box::new(ann), Box::new(body))
    }

    pub fn announce_dia(ann: Formula, body: Formula) -> Formula {
        Formula::announce(ann, body.not()).not()
    }

    pub fn apal_box(body: Formula) -> Formula {
        Formula::ApalBox(Box::new(body))
    }

    pub fn apal_dia(body: Formula) -> Formula {
        Formula::apal_box(body.not()).not()
    }

    pub fn gal_box(group: AgentSet, body: Formula) -> Formula {
        Formula::GalBox(group, Box::new(body))
    }

    pub fn gal_dia(group: AgentSet, body: Formula) -> Formula {
        Formula::gal_box(group, body.not()).not()
    }

    pub fn cal_box(group: AgentSet, body: Formula) -> Formula {
        Formula::CalBox(group, Box::new(body))
    }

    pub fn cal_dia(group: AgentSet, body: Formula) -> Formula {
        Formula::cal_box(group, body.not()).not()
    }

    /// Right-folded conjunction; the empty conjunction is `true`.
    pub fn big_and(mut conjuncts: Vec<Formula>) -> Formula {
        match conjuncts.len() {
            0 => Formula::Top,
            _ => {
                let mut acc = conjuncts.pop().unwrap();
                while let Some(f) = conjuncts.pop() {
                    acc = f.and(acc);
                }
                acc
            }
        }
    }

    /// Right-folded disjunction; the empty disjunction is `~true`.
    pub fn big_or(mut disjuncts: Vec<Formula>) -> Formula {
        match disjuncts.len() {
            0 => Formula::bottom(),
            _ => {
                let mut acc = disjuncts.pop().unwrap();
                while let Some(f) = disjuncts.pop() {
                    acc = f.or(acc);
                }
                acc
            }
        }
    }

    /// Maximum nesting of knowledge, common-knowledge, announcement and
    /// quantifier operators. Boolean connectives are transparent.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Know(_, f) | Formula::Common(_, f) => 1 + f.modal_depth(),
            Formula::Announce(a, b) => 1 + a.modal_depth().max(b.modal_depth()),
            Formula::ApalBox(f) | Formula::GalBox(_, f) | Formula::CalBox(_, f) => {
                1 + f.modal_depth()
            }
        }
    }

    /// All propositions occurring in the formula.
    pub fn props(&self) -> BTreeSet<PropId> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, &mut BTreeSet::new());
        out
    }

    /// All agents occurring in the formula.
    pub fn agents(&self) -> BTreeSet<AgentId> {
        let mut out = BTreeSet::new();
        self.collect(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect(&self, props: &mut BTreeSet<PropId>, agents: &mut BTreeSet<AgentId>) {
        match self {
            Formula::Atom(p) => {
                props.insert(p.clone());
            }
            Formula::Top => {}
            Formula::Not(f) | Formula::ApalBox(f) => f.collect(props, agents),
            Formula::And(a, b) | Formula::Announce(a, b) => {
                a.collect(props, agents);
                b.collect(props, agents);
            }
            Formula::Know(a, f) => {
                agents.insert(a.clone());
                f.collect(props, agents);
            }
            Formula::Common(g, f) | Formula::GalBox(g, f) | Formula::CalBox(g, f) => {
                agents.extend(g.iter().cloned());
                f.collect(props, agents);
            }
        }
    }

    pub fn fragment(&self) -> Fragment {
        let mut feats = Features::default();
        self.features(&mut feats);
        feats.fragment()
    }

    fn features(&self, feats: &mut Features) {
        match self {
            Formula::Atom(_) | Formula::Top => {}
            Formula::Not(f) => f.features(feats),
            Formula::And(a, b) => {
                a.features(feats);
                b.features(feats);
            }
            Formula::Know(_, f) => f.features(feats),
            Formula::Common(_, f) => {
                feats.common = true;
                f.features(feats);
            }
            Formula::Announce(a, b) => {
                feats.announce = true;
                a.features(feats);
                b.features(feats);
            }
            Formula::ApalBox(f) => {
                feats.apal = true;
                f.features(feats);
            }
            Formula::GalBox(_, f) => {
                feats.gal = true;
                f.features(feats);
            }
            Formula::CalBox(_, f) => {
                feats.cal = true;
                f.features(feats);
            }
        }
    }
}

#[derive(Default)]
struct Features {
    common: bool,
    announce: bool,
    apal: bool,
    gal: bool,
    cal: bool,
}

impl Features {
    fn fragment(&self) -> Fragment {
        let quantifiers = self.apal as u8 + self.gal as u8 + self.cal as u8;
        if quantifiers > 1 {
            Fragment::Mixed
        } else if self.apal {
            Fragment::Apalc
        } else if self.gal {
            Fragment::Galc
        } else if self.cal {
            Fragment::Calc
        } else {
            match (self.common, self.announce) {
                (true, true) => Fragment::Palc,
                (true, false) => Fragment::Elc,
                (false, true) => Fragment::Pal,
                (false, false) => Fragment::El,
            }
        }
    }
}

/// The least language fragment containing a formula, following the inclusion
/// chain EL < {ELC, PAL} < PALC < {APALC, GALC, CALC}. `Mixed` marks formulas
/// that combine quantifiers of different kinds and so belong to none of the
/// three languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fragment {
    El,
    Elc,
    Pal,
    Palc,
    Apalc,
    Galc,
    Calc,
    Mixed,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Fragment::El => "EL",
            Fragment::Elc => "ELC",
            Fragment::Pal => "PAL",
            Fragment::Palc => "PALC",
            Fragment::Apalc => "APALC",
            Fragment::Galc => "GALC",
            Fragment::Calc => "CALC",
            Fragment::Mixed => "MIXED",
        };
        f.write_str(s)
    }
}

fn write_agents(f: &mut fmt::Formatter<'_>, agents: &AgentSet) -> fmt::Result {
    write!(f, "{{")?;
    for (i, a) in agents.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{a}")?;
    }
    write!(f, "}}")
}

/// Fully parenthesized concrete syntax; `parse(print(f))` is structurally
/// equal to `f`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Top => write!(f, "true"),
            Formula::Not(x) => write!(f, "~{x}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Know(a, x) => write!(f, "K {a} {x}"),
            Formula::Common(g, x) => {
                write!(f, "C ")?;
                write_agents(f, g)?;
                write!(f, " {x}")
            }
            Formula::Announce(psi, x) => write!(f, "[ann {psi}] {x}"),
            Formula::ApalBox(x) => write!(f, "[!] {x}"),
            Formula::GalBox(g, x) => {
                write!(f, "[grp ")?;
                write_agents(f, g)?;
                write!(f, "] {x}")
            }
            Formula::CalBox(g, x) => {
                write!(f, "[coa ")?;
                write_agents(f, g)?;
                write!(f, "] {x}")
            }
        }
    }
}

pub fn agent_set<I: IntoIterator<Item = S>, S: Into<AgentId>>(agents: I) -> AgentSet {
    agents.into_iter().map(Into::into).collect()
}
