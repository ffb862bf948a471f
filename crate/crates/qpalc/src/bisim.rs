//! Coarsest bisimulation machinery.
//!
//! On a finite S5 model, the extension of any announcement is a union of
//! coarsest-bisimulation blocks containing the evaluation state, and
//! conversely every such union is the extension of some quantifier-free
//! formula. This module computes the coarsest partition, enumerates the
//! definable subsets (optionally restricted to a region of interest and/or
//! closed under selected agents' relations, as group announcements require),
//! and synthesizes a quantifier-free formula with a prescribed extension.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::formula::Formula;
use crate::kripke::{AgentId, Model, StateSet};

/// Default cap on candidate unions per enumeration.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum BisimError {
    #[error("enumeration budget exceeded: {needed} candidate unions, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("subset is not a union of bisimulation blocks")]
    NotBlockClosed,
    #[error("subset is not closed under agent `{0}`")]
    NotAgentClosed(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("anchor state is outside the subset")]
    AnchorOutside,
}

/// Closure requirement on announcement extensions: the subset must be closed
/// under every listed agent's relation. Group announcements carry one such
/// constraint per announcing agent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClosureConstraint {
    pub agents: BTreeSet<AgentId>,
}

impl ClosureConstraint {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn of<I: IntoIterator<Item = S>, S: Into<AgentId>>(agents: I) -> Self {
        ClosureConstraint {
            agents: agents.into_iter().map(Into::into).collect(),
        }
    }
}

/// Coarsest bisimulation partition of a model's states, with the refinement
/// history needed for formula synthesis.
#[derive(Debug, Clone)]
pub struct BisimPartition {
    blocks: Vec<Vec<u32>>,
    block_of: Vec<u32>,
    /// `history[r][s]` is the block index of `s` after `r` refinement rounds;
    /// round 0 is the valuation partition, the last round is `block_of`.
    history: Vec<Vec<u32>>,
}

impl BisimPartition {
    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn block_index(&self, s: u32) -> u32 {
        self.block_of[s as usize]
    }

    pub fn block_set(&self, b: usize, n: usize) -> StateSet {
        StateSet::from_indices(n, self.blocks[b].iter().copied())
    }

    pub fn rounds(&self) -> usize {
        self.history.len() - 1
    }

    /// True when `u` is a union of blocks.
    pub fn is_block_closed(&self, u: &StateSet) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&s| u.contains(s)) || b.iter().all(|&s| !u.contains(s)))
    }
}

fn renumber(sigs: Vec<Vec<u64>>) -> (Vec<u32>, usize) {
    // Deterministic block ids: first occurrence in state order, which is the
    // block's least member.
    let n = sigs.len();
    let mut id_of_sig: HashMap<Vec<u64>, u32> = HashMap::new();
    let mut block_of = vec![0u32; n];
    for (s, sig) in sigs.into_iter().enumerate() {
        let next = id_of_sig.len() as u32;
        let id = *id_of_sig.entry(sig).or_insert(next);
        block_of[s] = id;
    }
    (block_of, id_of_sig.len())
}

/// Coarsest partition refining the valuation partition and stable under every
/// agent relation, by signature refinement.
pub fn compute_partition(model: &Model) -> BisimPartition {
    let n = model.n_states();
    // Round 0: group by valuation signature.
    let sig0: Vec<Vec<u64>> = (0..n as u32)
        .map(|s| {
            (0..model.props().len())
                .map(|p| model.prop_extension(p).contains(s) as u64)
                .collect()
        })
        .collect();
    let (mut block_of, mut count) = renumber(sig0);
    let mut history = vec![block_of.clone()];
    loop {
        let sig: Vec<Vec<u64>> = (0..n as u32)
            .map(|s| {
                let mut parts = vec![block_of[s as usize] as u64];
                for ai in 0..model.agents().len() {
                    let mut met: Vec<u64> = model
                        .partition(ai)
                        .class_of(s)
                        .iter()
                        .map(|&t| block_of[t as usize] as u64)
                        .collect();
                    met.sort_unstable();
                    met.dedup();
                    parts.push(u64::MAX); // agent separator
                    parts.extend(met);
                }
                parts
            })
            .collect();
        let (next, next_count) = renumber(sig);
        if next_count == count {
            break;
        }
        block_of = next;
        count = next_count;
        history.push(block_of.clone());
    }
    let mut blocks = vec![Vec::new(); count];
    for s in 0..n as u32 {
        blocks[block_of[s as usize] as usize].push(s);
    }
    BisimPartition {
        blocks,
        block_of,
        history,
    }
}

/// Units of choice for announcement enumeration: the blocks of the coarsest
/// partition, merged through the constrained agents' classes, projected onto
/// an optional region of interest.
///
/// Candidate announcements are exactly the unions of units that include the
/// anchor's unit; `trace(i)` gives the i-th union in canonical order and
/// `global(i)` the corresponding unprojected (block- and constraint-closed)
/// subset of the full model, which is the canonical announcement extension
/// realizing that trace.
#[derive(Debug)]
pub struct DefinableSets {
    proj: Vec<StateSet>,
    glob: Vec<StateSet>,
    anchor_unit: usize,
    n_traces: u64,
    n: usize,
}

impl DefinableSets {
    pub fn new(
        model: &Model,
        partition: &BisimPartition,
        constraint_agents: &[usize],
        anchor: u32,
        region: Option<&StateSet>,
        budget: u64,
    ) -> Result<DefinableSets, BisimError> {
        let n = model.n_states();
        // Merge blocks connected through constrained agents' classes.
        let n_blocks = partition.blocks.len();
        let mut parent: Vec<u32> = (0..n_blocks as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for &ai in constraint_agents {
            for class in model.partition(ai).blocks() {
                let first = find(&mut parent, partition.block_of[class[0] as usize]);
                for &s in &class[1..] {
                    let b = find(&mut parent, partition.block_of[s as usize]);
                    if b != first {
                        let lo = first.min(b);
                        parent[first.max(b) as usize] = lo;
                    }
                }
            }
        }
        let mut super_of_block: HashMap<u32, usize> = HashMap::new();
        let mut supers: Vec<StateSet> = Vec::new();
        for b in 0..n_blocks as u32 {
            let root = find(&mut parent, b);
            let si = *super_of_block.entry(root).or_insert_with(|| {
                supers.push(StateSet::empty(n));
                supers.len() - 1
            });
            for &s in &partition.blocks[b as usize] {
                supers[si].insert(s);
            }
        }
        // Sort by least member for a canonical unit order.
        supers.sort_by_key(|u| u.iter().next().unwrap());
        // Project onto the region; drop units that vanish.
        let mut proj = Vec::new();
        let mut glob = Vec::new();
        for u in supers {
            let p = match region {
                Some(r) => {
                    let mut p = u.clone();
                    p.intersect_with(r);
                    p
                }
                None => u.clone(),
            };
            if !p.is_empty() {
                proj.push(p);
                glob.push(u);
            }
        }
        let anchor_unit = glob
            .iter()
            .position(|u| u.contains(anchor))
            .expect("anchor is a model state, so it lies in some unit");
        let free = (proj.len() - 1) as u32;
        if free >= 63 {
            return Err(BisimError::BudgetExceeded {
                needed: 2u128.pow(free.min(127)),
                budget,
            });
        }
        let n_traces = 1u64 << free;
        if n_traces > budget {
            return Err(BisimError::BudgetExceeded {
                needed: n_traces as u128,
                budget,
            });
        }
        Ok(DefinableSets {
            proj,
            glob,
            anchor_unit,
            n_traces,
            n,
        })
    }

    pub fn len(&self) -> u64 {
        self.n_traces
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn assemble(&self, i: u64, units: &[StateSet]) -> StateSet {
        let mut out = units[self.anchor_unit].clone();
        let mut bit = 0;
        for (ui, u) in units.iter().enumerate() {
            if ui == self.anchor_unit {
                continue;
            }
            if i >> bit & 1 == 1 {
                out.union_with(u);
            }
            bit += 1;
        }
        out
    }

    /// The i-th candidate, projected onto the region.
    pub fn trace(&self, i: u64) -> StateSet {
        self.assemble(i, &self.proj)
    }

    /// The canonical full-model announcement extension realizing `trace(i)`.
    pub fn global(&self, i: u64) -> StateSet {
        self.assemble(i, &self.glob)
    }

    pub fn n_states(&self) -> usize {
        self.n
    }
}

/// Enumerates the anchored announcement extensions of a model: subsets that
/// are unions of bisimulation blocks, closed under every constraint agent's
/// relation, and contain the anchor. Each subset appears exactly once, in
/// canonical order, and the full state set is always among them.
pub fn enumerate_definable<'a>(
    model: &'a Model,
    partition: &BisimPartition,
    constraint: &ClosureConstraint,
    anchor: &str,
    budget: u64,
) -> Result<impl Iterator<Item = StateSet> + 'a, BisimError> {
    let anchor = model
        .state_ix(anchor)
        .ok_or_else(|| BisimError::UnknownState(anchor.to_owned()))?;
    let agent_ixs = constraint
        .agents
        .iter()
        .map(|a| {
            model
                .agent_ix(a)
                .ok_or_else(|| BisimError::UnknownAgent(a.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sets = DefinableSets::new(model, partition, &agent_ixs, anchor, None, budget)?;
    Ok((0..sets.len()).map(move |i| sets.trace(i)))
}

/// Synthesizes a quantifier-free formula whose extension in `model` is
/// exactly `u`. With an empty constraint the result is a plain knowledge
/// formula; for a constraint `{i, ...}` it is a conjunction of `K i ...`
/// formulas, one per agent, as group announcements require. `u` must be a
/// union of partition blocks and closed under each constraint agent.
pub fn characteristic_formula(
    model: &Model,
    partition: &BisimPartition,
    u: &StateSet,
    constraint: &ClosureConstraint,
) -> Result<Formula, BisimError> {
    if !partition.is_block_closed(u) {
        return Err(BisimError::NotBlockClosed);
    }
    for a in &constraint.agents {
        let ai = model
            .agent_ix(a)
            .ok_or_else(|| BisimError::UnknownAgent(a.to_string()))?;
        for class in model.partition(ai).blocks() {
            let inside = class.iter().filter(|&&s| u.contains(s)).count();
            if inside != 0 && inside != class.len() {
                return Err(BisimError::NotAgentClosed(a.to_string()));
            }
        }
    }
    let el = if u.len() == model.n_states() {
        Formula::Top
    } else {
        let mut synth = CharSynth {
            model,
            partition,
            memo: HashMap::new(),
        };
        let members: Vec<usize> = partition
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| u.contains(b[0]))
            .map(|(i, _)| i)
            .collect();
        Formula::big_or(members.iter().map(|&b| synth.block_formula(b)).collect())
    };
    if constraint.agents.is_empty() {
        Ok(el)
    } else {
        Ok(Formula::big_and(
            constraint
                .agents
                .iter()
                .map(|a| Formula::know(a.clone(), el.clone()))
                .collect(),
        ))
    }
}

struct CharSynth<'m> {
    model: &'m Model,
    partition: &'m BisimPartition,
    memo: HashMap<(usize, u32, u32), Formula>,
}

impl CharSynth<'_> {
    /// Conjunction of literals fixing the valuation of `s`'s block.
    fn atom_conj(&self, s: u32) -> Formula {
        let lits = (0..self.model.props().len())
            .map(|p| {
                let atom = Formula::Atom(self.model.props()[p].clone());
                if self.model.prop_extension(p).contains(s) {
                    atom
                } else {
                    atom.not()
                }
            })
            .collect();
        Formula::big_and(lits)
    }

    fn same_atoms(&self, s: u32, t: u32) -> bool {
        self.partition.history[0][s as usize] == self.partition.history[0][t as usize]
    }

    /// First refinement round at which `s` and `t` land in different blocks.
    fn split_round(&self, s: u32, t: u32) -> Option<usize> {
        self.partition
            .history
            .iter()
            .position(|h| h[s as usize] != h[t as usize])
    }

    /// Formula true on `s`'s block and false on `t`'s block at their split
    /// round (hence on the finer final blocks too).
    fn distinguish(&mut self, s: u32, t: u32) -> Formula {
        let r = self
            .split_round(s, t)
            .expect("states in different blocks split at some round");
        let key = (
            r,
            self.partition.history[r][s as usize],
            self.partition.history[r][t as usize],
        );
        if let Some(f) = self.memo.get(&key) {
            return f.clone();
        }
        let f = if r == 0 {
            // Split by valuation: some atom differs.
            let p = (0..self.model.props().len())
                .find(|&p| {
                    self.model.prop_extension(p).contains(s)
                        != self.model.prop_extension(p).contains(t)
                })
                .expect("round-0 split means some atom differs");
            let atom = Formula::Atom(self.model.props()[p].clone());
            if self.model.prop_extension(p).contains(s) {
                atom
            } else {
                atom.not()
            }
        } else {
            self.distinguish_by_step(s, t, r)
        };
        self.memo.insert(key, f.clone());
        f
    }

    fn met_blocks(&self, s: u32, ai: usize, round: usize) -> Vec<u32> {
        let mut met: Vec<u32> = self
            .model
            .partition(ai)
            .class_of(s)
            .iter()
            .map(|&x| self.partition.history[round][x as usize])
            .collect();
        met.sort_unstable();
        met.dedup();
        met
    }

    fn rep_of(&self, round: usize, block: u32) -> u32 {
        self.partition.history[round]
            .iter()
            .position(|&b| b == block)
            .unwrap() as u32
    }

    fn distinguish_by_step(&mut self, s: u32, t: u32, r: usize) -> Formula {
        for ai in 0..self.model.agents().len() {
            let met_s = self.met_blocks(s, ai, r - 1);
            let met_t = self.met_blocks(t, ai, r - 1);
            if met_s == met_t {
                continue;
            }
            // Prefer a block seen from s but not from t; otherwise negate.
            let (positive, witness, other_side) = match met_s.iter().find(|c| !met_t.contains(c)) {
                Some(&c) => (true, c, &met_t),
                None => {
                    let c = *met_t.iter().find(|c| !met_s.contains(c)).unwrap();
                    (false, c, &met_s)
                }
            };
            let c_rep = self.rep_of(r - 1, witness);
            let mut conj = vec![self.atom_conj(c_rep)];
            for &other in other_side.iter() {
                if other == witness {
                    continue;
                }
                let o_rep = self.rep_of(r - 1, other);
                if self.same_atoms(c_rep, o_rep) {
                    conj.push(self.distinguish(c_rep, o_rep));
                }
            }
            let psi = Formula::big_and(conj);
            let agent = self.model.agents()[ai].clone();
            let dia = Formula::know_dia(agent, psi);
            return if positive { dia } else { dia.not() };
        }
        unreachable!("a split round is witnessed by some agent's signature");
    }

    /// Formula whose extension is exactly the final block `b`.
    fn block_formula(&mut self, b: usize) -> Formula {
        let rep = self.partition.blocks[b][0];
        let mut conj = vec![self.atom_conj(rep)];
        for (ob, other) in self.partition.blocks.iter().enumerate() {
            if ob != b && self.same_atoms(rep, other[0]) {
                conj.push(self.distinguish(rep, other[0]));
            }
        }
        Formula::big_and(conj)
    }
}

/// Quotient of a model by its coarsest bisimulation. Block representatives
/// (least members) name the quotient states; relations are transported and
/// re-closed, which changes nothing for genuine bisimulation partitions.
pub fn quotient(model: &Model, partition: &BisimPartition) -> Model {
    use crate::kripke::{ModelBuilder, RelationSpec};
    let rep_name = |b: u32| model.state_name(partition.blocks[b as usize][0]).to_owned();
    let mut builder = ModelBuilder::new()
        .states(partition.blocks.iter().map(|b| model.state_name(b[0]).to_owned()))
        .agents(model.agents().iter().map(|a| a.as_str().to_owned()));
    for (ai, agent) in model.agents().iter().enumerate() {
        let mut pairs = Vec::new();
        for class in model.partition(ai).blocks() {
            let first = partition.block_of[class[0] as usize];
            for &t in &class[1..] {
                pairs.push((rep_name(first), rep_name(partition.block_of[t as usize])));
            }
        }
        builder = builder.relation(agent.as_str(), RelationSpec::Pairs(pairs));
    }
    for (pi, prop) in model.props().iter().enumerate() {
        let members: Vec<String> = partition
            .blocks
            .iter()
            .filter(|b| model.prop_extension(pi).contains(b[0]))
            .map(|b| model.state_name(b[0]).to_owned())
            .collect();
        builder = builder.prop_states(prop.as_str(), members);
    }
    if let Some(d) = model.designated() {
        builder = builder.designated(rep_name(partition.block_of[d as usize]));
    }
    builder.build().expect("quotient of a valid model is valid")
}
