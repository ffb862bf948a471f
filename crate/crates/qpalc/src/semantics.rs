//! The model checker.
//!
//! Truth is evaluated over views `(base model, live mask)` so announcement
//! updates never copy the model in inner loops. Quantifiers range over the
//! anchored, block-closed (and per-agent closed, for group announcements)
//! subsets provided by the `bisim` module.
//!
//! For a quantifier whose body mentions only atoms, booleans and individual
//! knowledge, truth at the anchor depends only on the announcement's
//! intersection with the states the body can reach, so the enumeration is
//! projected onto that region. Two announcements with the same projection
//! restrict every reachable class identically, hence give the same verdict;
//! conversely every projection is realized by the union of the contributing
//! blocks. This keeps the candidate count proportional to the body's reach
//! rather than the whole model, which on grid fixtures is the difference
//! between 2^19 and 2^44 candidates.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::bisim::{
    characteristic_formula, compute_partition, BisimError, BisimPartition, ClosureConstraint,
    DefinableSets, DEFAULT_BUDGET,
};
use crate::formula::Formula;
use crate::kripke::{Model, ModelError, StateSet};

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("update is vacuous: the formula holds nowhere")]
    EmptyUpdate,
    #[error(transparent)]
    Bisim(#[from] BisimError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which quantifier produced a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantifierKind {
    Apal,
    Gal,
    Cal,
}

impl fmt::Display for QuantifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantifierKind::Apal => write!(f, "[!]"),
            QuantifierKind::Gal => write!(f, "[grp]"),
            QuantifierKind::Cal => write!(f, "[coa]"),
        }
    }
}

/// A counterexample announcement found under a universal quantifier: the
/// subset it denotes, a synthesized formula whose extension in the model
/// where the quantifier was evaluated (`scope`) is exactly that subset, and
/// the verdict of the quantified body after announcing it.
#[derive(Debug, Clone)]
pub struct Witness {
    pub operator: QuantifierKind,
    pub subset: Vec<String>,
    pub formula: Formula,
    pub verdict: bool,
    pub scope: Vec<String>,
}

/// Evaluation context: one model, an enumeration budget, and the machinery
/// caches. Contexts are confined to a single thread; the model itself may be
/// shared freely.
pub struct CheckContext {
    model: Model,
    budget: u64,
}

impl CheckContext {
    pub fn new(model: Model) -> Self {
        Self::with_budget(model, DEFAULT_BUDGET)
    }

    pub fn with_budget(model: Model, budget: u64) -> Self {
        CheckContext { model, budget }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Truth of `f` at `state`.
    pub fn check(&self, state: &str, f: &Formula) -> Result<bool, CheckError> {
        let s = self.state_ix(state)?;
        let mut eval = Eval::new(&self.model, self.budget, false)?;
        let node = eval.arena.root(f, &self.model)?;
        let full = StateSet::full(self.model.n_states());
        eval.eval(&full, node, s)
    }

    /// Truth of `f` at `state`, together with the quantifier witnesses met on
    /// the way: every failed universal quantifier reports the counterexample
    /// announcement it found.
    pub fn explain(&self, state: &str, f: &Formula) -> Result<(bool, Vec<Witness>), CheckError> {
        let s = self.state_ix(state)?;
        let mut eval = Eval::new(&self.model, self.budget, true)?;
        let node = eval.arena.root(f, &self.model)?;
        let full = StateSet::full(self.model.n_states());
        let verdict = eval.eval(&full, node, s)?;
        Ok((verdict, eval.witnesses))
    }

    /// The set of states where `f` holds.
    pub fn extension(&self, f: &Formula) -> Result<StateSet, CheckError> {
        let mut eval = Eval::new(&self.model, self.budget, false)?;
        let node = eval.arena.root(f, &self.model)?;
        let full = StateSet::full(self.model.n_states());
        let mut out = StateSet::empty(self.model.n_states());
        for s in 0..self.model.n_states() as u32 {
            if eval.eval(&full, node, s)? {
                out.insert(s);
            }
        }
        Ok(out)
    }

    /// Public announcement of `f`: the context over the restriction to `f`'s
    /// extension. Fails if `f` holds nowhere.
    pub fn update(&self, f: &Formula) -> Result<CheckContext, CheckError> {
        let ext = self.extension(f)?;
        if ext.is_empty() {
            return Err(CheckError::EmptyUpdate);
        }
        Ok(CheckContext::with_budget(
            self.model.restrict(&ext)?,
            self.budget,
        ))
    }

    /// Checks that a witness re-verifies: announcing its formula in the model
    /// it was found in reproduces exactly its subset.
    pub fn verify_witness(&self, w: &Witness) -> Result<bool, CheckError> {
        let scope_model = if w.scope.len() == self.model.n_states() {
            self.model.clone()
        } else {
            let mut keep = StateSet::empty(self.model.n_states());
            for name in &w.scope {
                keep.insert(self.state_ix(name)?);
            }
            self.model.restrict(&keep)?
        };
        let sub = CheckContext::with_budget(scope_model, self.budget);
        let ext = sub.extension(&w.formula)?;
        let got: Vec<String> = ext
            .iter()
            .map(|s| sub.model.state_name(s).to_owned())
            .collect();
        Ok(got == w.subset)
    }

    fn state_ix(&self, state: &str) -> Result<u32, CheckError> {
        self.model
            .state_ix(state)
            .ok_or_else(|| CheckError::UnknownState(state.to_owned()))
    }
}

/// Formula compiled against a model: props and agents resolved to indices.
struct Arena {
    nodes: Vec<Node>,
    /// Nodes whose subtree uses only atoms, booleans and `K`; quantifier
    /// bodies with this property admit region projection.
    localizable: Vec<bool>,
    /// Nodes whose subtree is purely propositional. Their truth is fixed by
    /// the valuation, independent of any announcement, so region growth can
    /// prune conjunction branches they guard.
    propositional: Vec<bool>,
}

enum Node {
    Atom(usize),
    Top,
    Not(usize),
    And(usize, usize),
    Know(usize, usize),
    Common(Vec<usize>, usize),
    Announce(usize, usize),
    Apal(usize),
    Gal(Vec<usize>, usize),
    Cal(Vec<usize>, Vec<usize>, usize),
}

impl Arena {
    fn new() -> Self {
        Arena {
            nodes: Vec::new(),
            localizable: Vec::new(),
            propositional: Vec::new(),
        }
    }

    fn root(&mut self, f: &Formula, model: &Model) -> Result<usize, CheckError> {
        let agents = |group: &BTreeSet<crate::kripke::AgentId>| -> Result<Vec<usize>, CheckError> {
            group
                .iter()
                .map(|a| {
                    model
                        .agent_ix(a)
                        .ok_or_else(|| CheckError::UnknownAgent(a.to_string()))
                })
                .collect()
        };
        let node = match f {
            Formula::Atom(p) => {
                let pi = model
                    .prop_ix(p)
                    .ok_or_else(|| CheckError::UnknownProp(p.to_string()))?;
                Node::Atom(pi)
            }
            Formula::Top => Node::Top,
            Formula::Not(x) => Node::Not(self.root(x, model)?),
            Formula::And(a, b) => Node::And(self.root(a, model)?, self.root(b, model)?),
            Formula::Know(a, x) => {
                let ai = model
                    .agent_ix(a)
                    .ok_or_else(|| CheckError::UnknownAgent(a.to_string()))?;
                Node::Know(ai, self.root(x, model)?)
            }
            Formula::Common(g, x) => Node::Common(agents(g)?, self.root(x, model)?),
            Formula::Announce(psi, x) => {
                Node::Announce(self.root(psi, model)?, self.root(x, model)?)
            }
            Formula::ApalBox(x) => Node::Apal(self.root(x, model)?),
            Formula::GalBox(g, x) => Node::Gal(agents(g)?, self.root(x, model)?),
            Formula::CalBox(g, x) => {
                let coalition = agents(g)?;
                let anti: Vec<usize> = (0..model.agents().len())
                    .filter(|ai| !coalition.contains(ai))
                    .collect();
                Node::Cal(coalition, anti, self.root(x, model)?)
            }
        };
        let local = match &node {
            Node::Atom(_) | Node::Top => true,
            Node::Not(x) | Node::Know(_, x) => self.localizable[*x],
            Node::And(a, b) => self.localizable[*a] && self.localizable[*b],
            _ => false,
        };
        let prop = match &node {
            Node::Atom(_) | Node::Top => true,
            Node::Not(x) => self.propositional[*x],
            Node::And(a, b) => self.propositional[*a] && self.propositional[*b],
            _ => false,
        };
        self.nodes.push(node);
        self.localizable.push(local);
        self.propositional.push(prop);
        Ok(self.nodes.len() - 1)
    }
}

/// A restricted model cached together with its coarsest partition and the
/// index maps between its states and the base model's.
struct Sub {
    model: Model,
    partition: BisimPartition,
    old_of_new: Vec<u32>,
    new_of_old: Vec<u32>,
}

impl Sub {
    fn to_base(&self, set: &StateSet, base_n: usize) -> StateSet {
        StateSet::from_indices(base_n, set.iter().map(|i| self.old_of_new[i as usize]))
    }
}

struct Eval<'m> {
    base: &'m Model,
    budget: u64,
    arena: Arena,
    subs: HashMap<StateSet, Rc<Sub>>,
    memo: HashMap<(StateSet, usize, u32), bool>,
    witnessing: bool,
    witnesses: Vec<Witness>,
}

impl<'m> Eval<'m> {
    fn new(base: &'m Model, budget: u64, witnessing: bool) -> Result<Self, CheckError> {
        Ok(Eval {
            base,
            budget,
            arena: Arena::new(),
            subs: HashMap::new(),
            memo: HashMap::new(),
            witnessing,
            witnesses: Vec::new(),
        })
    }

    fn eval(&mut self, mask: &StateSet, node: usize, s: u32) -> Result<bool, CheckError> {
        debug_assert!(mask.contains(s));
        match &self.arena.nodes[node] {
            Node::Atom(p) => Ok(self.base.prop_extension(*p).contains(s)),
            Node::Top => Ok(true),
            Node::Not(x) => {
                let x = *x;
                Ok(!self.eval(mask, x, s)?)
            }
            Node::And(a, b) => {
                let (a, b) = (*a, *b);
                Ok(self.eval(mask, a, s)? && self.eval(mask, b, s)?)
            }
            Node::Know(ai, x) => {
                let (ai, x) = (*ai, *x);
                let class = self.base.partition(ai).class_of(s).to_vec();
                for t in class {
                    if mask.contains(t) && !self.eval(mask, x, t)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Node::Common(g, x) => {
                let (g, x) = (g.clone(), *x);
                let key = (mask.clone(), node, s);
                if let Some(&v) = self.memo.get(&key) {
                    return Ok(v);
                }
                let closure = self.base.group_closure_masked(&g, s, mask);
                let mut verdict = true;
                for t in closure.iter() {
                    if !self.eval(mask, x, t)? {
                        verdict = false;
                        break;
                    }
                }
                self.memo.insert(key, verdict);
                Ok(verdict)
            }
            Node::Announce(psi, x) => {
                let (psi, x) = (*psi, *x);
                let key = (mask.clone(), node, s);
                if let Some(&v) = self.memo.get(&key) {
                    return Ok(v);
                }
                let verdict = if !self.eval(mask, psi, s)? {
                    true
                } else {
                    let ext = self.extension_in(mask, psi)?;
                    self.eval(&ext, x, s)?
                };
                self.memo.insert(key, verdict);
                Ok(verdict)
            }
            Node::Apal(x) => {
                let x = *x;
                let key = (mask.clone(), node, s);
                if let Some(&v) = self.memo.get(&key) {
                    return Ok(v);
                }
                let verdict = self.eval_apal(mask, x, s)?;
                self.memo.insert(key, verdict);
                Ok(verdict)
            }
            Node::Gal(g, x) => {
                let (g, x) = (g.clone(), *x);
                let key = (mask.clone(), node, s);
                if let Some(&v) = self.memo.get(&key) {
                    return Ok(v);
                }
                let verdict = if g.is_empty() {
                    // The empty group can only announce the tautology.
                    self.eval(mask, x, s)?
                } else {
                    self.eval_gal(mask, &g, x, s)?
                };
                self.memo.insert(key, verdict);
                Ok(verdict)
            }
            Node::Cal(g, anti, x) => {
                let (g, anti, x) = (g.clone(), anti.clone(), *x);
                let key = (mask.clone(), node, s);
                if let Some(&v) = self.memo.get(&key) {
                    return Ok(v);
                }
                let verdict = self.eval_cal(mask, &g, &anti, x, s)?;
                self.memo.insert(key, verdict);
                Ok(verdict)
            }
        }
    }

    fn extension_in(&mut self, mask: &StateSet, node: usize) -> Result<StateSet, CheckError> {
        let mut ext = StateSet::empty(self.base.n_states());
        for t in mask.iter() {
            if self.eval(mask, node, t)? {
                ext.insert(t);
            }
        }
        Ok(ext)
    }

    fn sub_for(&mut self, mask: &StateSet) -> Result<Rc<Sub>, CheckError> {
        if let Some(sub) = self.subs.get(mask) {
            return Ok(sub.clone());
        }
        let model = self.base.restrict(mask)?;
        let partition = compute_partition(&model);
        let old_of_new: Vec<u32> = mask.iter().collect();
        let mut new_of_old = vec![u32::MAX; self.base.n_states()];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old as usize] = new as u32;
        }
        let sub = Rc::new(Sub {
            model,
            partition,
            old_of_new,
            new_of_old,
        });
        self.subs.insert(mask.clone(), sub.clone());
        Ok(sub)
    }

    /// Region of the restricted model that a localizable body can reach from
    /// `s`, or `None` when the body is not localizable.
    ///
    /// The growth is guard-aware: atoms do not depend on the announcement, so
    /// a conjunction branch guarded by a propositional formula that is false
    /// at the current state is never evaluated and contributes nothing.
    fn region_for(&self, sub: &Sub, body: usize, s_sub: u32) -> Option<StateSet> {
        if !self.arena.localizable[body] {
            return None;
        }
        let n = sub.model.n_states();
        let mut out = StateSet::empty(n);
        let mut visited = HashSet::new();
        self.grow_region(sub, body, s_sub, &mut visited, &mut out);
        Some(out)
    }

    /// Truth of a purely propositional node at a state, independent of masks.
    fn prop_eval(&self, sub: &Sub, node: usize, t: u32) -> bool {
        match &self.arena.nodes[node] {
            Node::Atom(p) => {
                let base = sub.old_of_new[t as usize];
                self.base.prop_extension(*p).contains(base)
            }
            Node::Top => true,
            Node::Not(x) => !self.prop_eval(sub, *x, t),
            Node::And(a, b) => self.prop_eval(sub, *a, t) && self.prop_eval(sub, *b, t),
            _ => unreachable!("prop_eval only applies to propositional nodes"),
        }
    }

    fn grow_region(
        &self,
        sub: &Sub,
        node: usize,
        t: u32,
        visited: &mut HashSet<(usize, u32)>,
        out: &mut StateSet,
    ) {
        if !visited.insert((node, t)) {
            return;
        }
        out.insert(t);
        match &self.arena.nodes[node] {
            Node::Atom(_) | Node::Top => {}
            Node::Not(x) => self.grow_region(sub, *x, t, visited, out),
            Node::And(a, b) => {
                let (a, b) = (*a, *b);
                if self.arena.propositional[a] {
                    // A false propositional guard short-circuits the branch.
                    if self.prop_eval(sub, a, t) {
                        self.grow_region(sub, b, t, visited, out);
                    }
                } else {
                    self.grow_region(sub, a, t, visited, out);
                    if !self.arena.propositional[b] {
                        self.grow_region(sub, b, t, visited, out);
                    }
                }
            }
            Node::Know(ai, x) => {
                for &u in sub.model.partition(*ai).class_of(t) {
                    out.insert(u);
                    self.grow_region(sub, *x, u, visited, out);
                }
            }
            _ => unreachable!("region projection only applies to localizable bodies"),
        }
    }

    fn record_witness(
        &mut self,
        kind: QuantifierKind,
        sub: &Sub,
        formula: Formula,
        subset_sub: &StateSet,
        verdict: bool,
    ) {
        let subset = subset_sub
            .iter()
            .map(|i| sub.model.state_name(i).to_owned())
            .collect();
        let scope = sub.model.state_names().to_vec();
        self.witnesses.push(Witness {
            operator: kind,
            subset,
            formula,
            verdict,
            scope,
        });
    }

    fn eval_apal(&mut self, mask: &StateSet, body: usize, s: u32) -> Result<bool, CheckError> {
        let sub = self.sub_for(mask)?;
        let s_sub = sub.new_of_old[s as usize];
        let region = self.region_for(&sub, body, s_sub);
        let sets = DefinableSets::new(
            &sub.model,
            &sub.partition,
            &[],
            s_sub,
            region.as_ref(),
            self.budget,
        )?;
        for i in 0..sets.len() {
            let trace = sub.to_base(&sets.trace(i), self.base.n_states());
            if !self.eval(&trace, body, s)? {
                if self.witnessing {
                    let announced = sets.global(i);
                    let formula = characteristic_formula(
                        &sub.model,
                        &sub.partition,
                        &announced,
                        &ClosureConstraint::none(),
                    )?;
                    self.record_witness(QuantifierKind::Apal, &sub, formula, &announced, false);
                }
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All distinct intersections of anchored per-agent announcement choices,
    /// in canonical order, with the chosen per-agent sets kept for witness
    /// synthesis.
    fn family_intersections(
        &mut self,
        sub: &Sub,
        group: &[usize],
        s_sub: u32,
        region: Option<&StateSet>,
    ) -> Result<Vec<(StateSet, Vec<StateSet>)>, CheckError> {
        let enums: Vec<DefinableSets> = group
            .iter()
            .map(|&ai| {
                DefinableSets::new(&sub.model, &sub.partition, &[ai], s_sub, region, self.budget)
            })
            .collect::<Result<_, _>>()?;
        let mut total: u128 = 1;
        for e in &enums {
            total = total.saturating_mul(e.len() as u128);
        }
        if total > self.budget as u128 {
            return Err(CheckError::Bisim(BisimError::BudgetExceeded {
                needed: total,
                budget: self.budget,
            }));
        }
        let mut out = Vec::new();
        let mut seen: HashSet<StateSet> = HashSet::new();
        let mut odometer = vec![0u64; enums.len()];
        loop {
            let mut inter = enums[0].trace(odometer[0]);
            for (e, &i) in enums.iter().zip(&odometer).skip(1) {
                inter.intersect_with(&e.trace(i));
            }
            if seen.insert(inter.clone()) {
                let globals = enums
                    .iter()
                    .zip(&odometer)
                    .map(|(e, &i)| e.global(i))
                    .collect();
                out.push((inter, globals));
            }
            // Odometer over the per-agent enumerations, last agent fastest.
            let mut pos = enums.len();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                odometer[pos] += 1;
                if odometer[pos] < enums[pos].len() {
                    break;
                }
                odometer[pos] = 0;
            }
        }
    }

    fn gal_witness_formula(
        &self,
        sub: &Sub,
        group: &[usize],
        globals: &[StateSet],
    ) -> Result<Formula, CheckError> {
        let conj = group
            .iter()
            .zip(globals)
            .map(|(&ai, u)| {
                let agent = sub.model.agents()[ai].clone();
                characteristic_formula(
                    &sub.model,
                    &sub.partition,
                    u,
                    &ClosureConstraint { agents: [agent].into() },
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Formula::big_and(conj))
    }

    fn eval_gal(
        &mut self,
        mask: &StateSet,
        group: &[usize],
        body: usize,
        s: u32,
    ) -> Result<bool, CheckError> {
        let sub = self.sub_for(mask)?;
        let s_sub = sub.new_of_old[s as usize];
        let region = self.region_for(&sub, body, s_sub);
        let families = self.family_intersections(&sub, group, s_sub, region.as_ref())?;
        for (inter, globals) in families {
            let trace = sub.to_base(&inter, self.base.n_states());
            if !self.eval(&trace, body, s)? {
                if self.witnessing {
                    let formula = self.gal_witness_formula(&sub, group, &globals)?;
                    let mut announced = globals[0].clone();
                    for g in &globals[1..] {
                        announced.intersect_with(g);
                    }
                    self.record_witness(QuantifierKind::Gal, &sub, formula, &announced, false);
                }
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn eval_cal(
        &mut self,
        mask: &StateSet,
        group: &[usize],
        anti: &[usize],
        body: usize,
        s: u32,
    ) -> Result<bool, CheckError> {
        let sub = self.sub_for(mask)?;
        let s_sub = sub.new_of_old[s as usize];
        let region = self.region_for(&sub, body, s_sub);
        let full_sub = StateSet::full(sub.model.n_states());
        let coalition_moves = if group.is_empty() {
            vec![(full_sub.clone(), Vec::new())]
        } else {
            self.family_intersections(&sub, group, s_sub, region.as_ref())?
        };
        let counter_moves: Vec<StateSet> = if anti.is_empty() {
            vec![full_sub]
        } else {
            self.family_intersections(&sub, anti, s_sub, region.as_ref())?
                .into_iter()
                .map(|(inter, _)| inter)
                .collect()
        };
        'coalition: for (u, globals) in coalition_moves {
            for v in &counter_moves {
                let mut inter = u.clone();
                inter.intersect_with(v);
                let trace = sub.to_base(&inter, self.base.n_states());
                if self.eval(&trace, body, s)? {
                    continue 'coalition;
                }
            }
            if self.witnessing {
                let formula = if group.is_empty() {
                    Formula::Top
                } else {
                    self.gal_witness_formula(&sub, group, &globals)?
                };
                let announced = if globals.is_empty() {
                    StateSet::full(sub.model.n_states())
                } else {
                    let mut a = globals[0].clone();
                    for g in &globals[1..] {
                        a.intersect_with(g);
                    }
                    a
                };
                self.record_witness(QuantifierKind::Cal, &sub, formula, &announced, false);
            }
            return Ok(false);
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::kripke::ModelBuilder;

    fn two_state() -> CheckContext {
        CheckContext::new(
            ModelBuilder::new()
                .states(["s0", "s1"])
                .agents(["a"])
                .blocks("a", vec![vec!["s0", "s1"]])
                .prop("p", vec!["s0"])
                .designated("s0")
                .build()
                .unwrap(),
        )
    }

    #[test]
    fn knowledge_basics() {
        let ctx = two_state();
        assert!(!ctx.check("s0", &parse("K a p").unwrap()).unwrap());
        assert!(ctx.check("s0", &parse("~K a ~p").unwrap()).unwrap());
    }

    #[test]
    fn announcement_of_p_teaches_a() {
        let ctx = two_state();
        assert!(ctx.check("s0", &parse("<ann p> K a p").unwrap()).unwrap());
    }

    #[test]
    fn apal_diamond_vs_box() {
        let ctx = two_state();
        assert!(ctx.check("s0", &parse("<!> K a p").unwrap()).unwrap());
        assert!(!ctx.check("s1", &parse("<!> K a p").unwrap()).unwrap());
        assert!(!ctx.check("s0", &parse("[!] K a p").unwrap()).unwrap());
    }

    #[test]
    fn announcement_vacuity() {
        let ctx = two_state();
        // psi fails at s1, so the announcement there is vacuously true.
        assert!(ctx.check("s1", &parse("[ann p] K a p").unwrap()).unwrap());
    }

    #[test]
    fn extension_basics() {
        let ctx = two_state();
        assert_eq!(ctx.extension(&parse("true").unwrap()).unwrap().len(), 2);
        let p = ctx.extension(&parse("p").unwrap()).unwrap();
        assert_eq!(p.iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn update_basics() {
        let ctx = two_state();
        let same = ctx.update(&parse("true").unwrap()).unwrap();
        assert_eq!(same.model(), ctx.model());
        let smaller = ctx.update(&parse("p").unwrap()).unwrap();
        assert_eq!(smaller.model().n_states(), 1);
        assert!(matches!(
            ctx.update(&parse("(p & ~p)").unwrap()),
            Err(CheckError::EmptyUpdate)
        ));
    }

    #[test]
    fn common_knowledge_closure() {
        // s0 -a- s1 -b- s2; p everywhere except s2.
        let ctx = CheckContext::new(
            ModelBuilder::new()
                .states(["s0", "s1", "s2"])
                .agents(["a", "b"])
                .blocks("a", vec![vec!["s0", "s1"], vec!["s2"]])
                .blocks("b", vec![vec!["s0"], vec!["s1", "s2"]])
                .prop("p", vec!["s0", "s1"])
                .build()
                .unwrap(),
        );
        assert!(ctx.check("s0", &parse("K a p").unwrap()).unwrap());
        assert!(!ctx.check("s0", &parse("C {a,b} p").unwrap()).unwrap());
        assert!(ctx.check("s0", &parse("C {a} p").unwrap()).unwrap());
        // The empty group's common knowledge is plain truth.
        assert!(!ctx.check("s2", &parse("C {} p").unwrap()).unwrap());
        assert!(ctx.check("s0", &parse("C {} p").unwrap()).unwrap());
    }

    #[test]
    fn empty_group_quantifiers() {
        let ctx = two_state();
        // [grp {}] quantifies over the single announcement `true`.
        assert!(!ctx.check("s0", &parse("[grp {}] K a p").unwrap()).unwrap());
        assert!(ctx.check("s0", &parse("[grp {}] ~K a p").unwrap()).unwrap());
    }

    #[test]
    fn gal_can_reach_what_apal_can_here() {
        let ctx = two_state();
        // Agent a knows nothing distinguishing s0/s1, so can only announce
        // block-closed a-closed sets: the full set. K a p stays unknowable.
        assert!(!ctx.check("s0", &parse("<grp {a}> K a p").unwrap()).unwrap());
        // With a second agent who can see the split:
        let ctx = CheckContext::new(
            ModelBuilder::new()
                .states(["s0", "s1"])
                .agents(["a", "b"])
                .blocks("a", vec![vec!["s0", "s1"]])
                .blocks("b", vec![vec!["s0"], vec!["s1"]])
                .prop("p", vec!["s0"])
                .build()
                .unwrap(),
        );
        assert!(ctx.check("s0", &parse("<grp {b}> K a p").unwrap()).unwrap());
        assert!(!ctx.check("s0", &parse("<grp {a}> K a p").unwrap()).unwrap());
    }

    #[test]
    fn explain_reports_failed_universal() {
        let ctx = two_state();
        let (verdict, witnesses) = ctx.explain("s0", &parse("<!> K a p").unwrap()).unwrap();
        assert!(verdict);
        assert_eq!(witnesses.len(), 1);
        let w = &witnesses[0];
        assert_eq!(w.operator, QuantifierKind::Apal);
        assert_eq!(w.subset, vec!["s0".to_owned()]);
        assert!(ctx.verify_witness(w).unwrap());
    }

    #[test]
    fn explain_vacuous_universal_is_empty() {
        let ctx = two_state();
        let (verdict, witnesses) = ctx.explain("s0", &parse("[!] true").unwrap()).unwrap();
        assert!(verdict);
        assert!(witnesses.is_empty());
    }

    #[test]
    fn unknown_identifiers_error() {
        let ctx = two_state();
        assert!(matches!(
            ctx.check("s0", &parse("zz").unwrap()),
            Err(CheckError::UnknownProp(_))
        ));
        assert!(matches!(
            ctx.check("s0", &parse("K zz p").unwrap()),
            Err(CheckError::UnknownAgent(_))
        ));
        assert!(matches!(
            ctx.check("zz", &parse("p").unwrap()),
            Err(CheckError::UnknownState(_))
        ));
    }
}
