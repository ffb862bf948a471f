//! Finite multi-agent S5 Kripke models.
//!
//! Agent relations are stored as partitions of the state space (one block per
//! equivalence class), so the S5 requirement holds by construction. An import
//! path accepts raw pair lists and closes them into a partition instead of
//! rejecting anything. States, agents and propositions are kept in a canonical
//! lexicographic order, which makes every downstream operation deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Agent name: a non-empty token of letters, digits and underscores.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

/// Proposition name: a non-empty token of letters, digits and underscores.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropId(String);

fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !s.chars().next().unwrap().is_ascii_digit()
}

impl AgentId {
    pub fn new(name: impl Into<String>) -> Self {
        AgentId(name.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PropId {
    pub fn new(name: impl Into<String>) -> Self {
        PropId(name.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for PropId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId::new(s)
    }
}

impl From<&str> for PropId {
    fn from(s: &str) -> Self {
        PropId::new(s)
    }
}

/// A subset of a model's states, stored as a bitset over canonical state
/// indices. Iteration is always in ascending index order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    words: Vec<u64>,
    n: usize,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet {
            words: vec![0; n.div_ceil(64)],
            n,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i as u32);
        }
        s
    }

    pub fn from_indices(n: usize, ixs: impl IntoIterator<Item = u32>) -> Self {
        let mut s = Self::empty(n);
        for i in ixs {
            s.insert(i);
        }
        s
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, i: u32) {
        debug_assert!((i as usize) < self.n);
        self.words[i as usize / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: u32) {
        self.words[i as usize / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: u32) -> bool {
        (i as usize) < self.n && self.words[i as usize / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &StateSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros();
                    bits &= bits - 1;
                    Some(w as u32 * 64 + b)
                }
            })
        })
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// One agent's equivalence relation as a partition into blocks. Blocks are
/// sorted by least member, members ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<u32>>,
    block_of: Vec<u32>,
}

impl Partition {
    /// Builds a partition from blocks, canonicalizing the order. The blocks
    /// must be disjoint, non-empty, and cover `0..n`.
    pub fn from_blocks(n: usize, mut blocks: Vec<Vec<u32>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
            b.dedup();
        }
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![0; n];
        for (bi, b) in blocks.iter().enumerate() {
            for &s in b {
                block_of[s as usize] = bi as u32;
            }
        }
        Partition { blocks, block_of }
    }

    /// Identity partition: every state in its own block.
    pub fn identity(n: usize) -> Self {
        Partition {
            blocks: (0..n as u32).map(|i| vec![i]).collect(),
            block_of: (0..n as u32).collect(),
        }
    }

    /// Equivalence closure of a pair list, as a partition.
    pub fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for &(a, b) in pairs {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi as usize] = lo;
            }
        }
        let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for s in 0..n as u32 {
            groups.entry(find(&mut parent, s)).or_default().push(s);
        }
        Self::from_blocks(n, groups.into_values().collect())
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn class_of(&self, s: u32) -> &[u32] {
        &self.blocks[self.block_of[s as usize] as usize]
    }

    pub fn block_index(&self, s: u32) -> u32 {
        self.block_of[s as usize]
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("restriction to the empty set (the announced formula holds nowhere)")]
    EmptyRestriction,
    #[error("restriction set contains indices outside the model")]
    BadRestriction,
    #[error("model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// One invariant violation found by validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoStates,
    DuplicateState(String),
    DuplicateAgent(String),
    BadAgentToken(String),
    BadPropToken(String),
    EmptyBlock { agent: String },
    OverlappingBlocks { agent: String, state: String },
    UncoveredState { agent: String, state: String },
    UnknownStateInRelation { agent: String, state: String },
    UnknownStateInValuation { prop: String, state: String },
    UnknownAgentInRelations(String),
    UnknownDesignated(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "model has no states"),
            Violation::DuplicateState(s) => write!(f, "duplicate state `{s}`"),
            Violation::DuplicateAgent(a) => write!(f, "duplicate agent `{a}`"),
            Violation::BadAgentToken(a) => write!(f, "agent name `{a}` is not a valid token"),
            Violation::BadPropToken(p) => write!(f, "proposition name `{p}` is not a valid token"),
            Violation::EmptyBlock { agent } => write!(f, "agent `{agent}` has an empty block"),
            Violation::OverlappingBlocks { agent, state } => {
                write!(f, "agent `{agent}`: state `{state}` occurs in two blocks")
            }
            Violation::UncoveredState { agent, state } => {
                write!(f, "agent `{agent}`: state `{state}` is not covered by any block")
            }
            Violation::UnknownStateInRelation { agent, state } => {
                write!(f, "agent `{agent}`: relation mentions unknown state `{state}`")
            }
            Violation::UnknownStateInValuation { prop, state } => {
                write!(f, "proposition `{prop}`: valuation mentions unknown state `{state}`")
            }
            Violation::UnknownAgentInRelations(a) => {
                write!(f, "relations mention unknown agent `{a}`")
            }
            Violation::UnknownDesignated(s) => write!(f, "designated state `{s}` is not declared"),
        }
    }
}

/// Outcome of validating a model description. Carries every violation found
/// rather than stopping at the first.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

/// Relation input for one agent: either explicit partition blocks or a pair
/// list to be closed into an equivalence relation.
#[derive(Debug, Clone)]
pub enum RelationSpec {
    Blocks(Vec<Vec<String>>),
    Pairs(Vec<(String, String)>),
}

/// Raw model description, as found in files or assembled by hand. `build`
/// validates it and produces an immutable [`Model`].
#[derive(Debug, Clone, Default)]
pub struct ModelBuilder {
    states: Vec<String>,
    agents: Vec<String>,
    relations: BTreeMap<String, RelationSpec>,
    valuation: BTreeMap<String, Vec<String>>,
    designated: Option<String>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn states<I: IntoIterator<Item = S>, S: Into<String>>(mut self, it: I) -> Self {
        self.states.extend(it.into_iter().map(Into::into));
        self
    }

    pub fn agents<I: IntoIterator<Item = S>, S: Into<String>>(mut self, it: I) -> Self {
        self.agents.extend(it.into_iter().map(Into::into));
        self
    }

    pub fn blocks<S: Into<String>>(mut self, agent: S, blocks: Vec<Vec<&str>>) -> Self {
        self.relations.insert(
            agent.into(),
            RelationSpec::Blocks(
                blocks
                    .into_iter()
                    .map(|b| b.into_iter().map(str::to_owned).collect())
                    .collect(),
            ),
        );
        self
    }

    pub fn relation<S: Into<String>>(mut self, agent: S, spec: RelationSpec) -> Self {
        self.relations.insert(agent.into(), spec);
        self
    }

    pub fn pairs<S: Into<String>>(mut self, agent: S, pairs: Vec<(&str, &str)>) -> Self {
        self.relations.insert(
            agent.into(),
            RelationSpec::Pairs(
                pairs
                    .into_iter()
                    .map(|(a, b)| (a.to_owned(), b.to_owned()))
                    .collect(),
            ),
        );
        self
    }

    pub fn prop<S: Into<String>>(mut self, prop: S, states: Vec<&str>) -> Self {
        self.valuation
            .insert(prop.into(), states.into_iter().map(str::to_owned).collect());
        self
    }

    pub fn prop_states<S: Into<String>>(mut self, prop: S, states: Vec<String>) -> Self {
        self.valuation.insert(prop.into(), states);
        self
    }

    pub fn designated<S: Into<String>>(mut self, state: S) -> Self {
        self.designated = Some(state.into());
        self
    }

    /// Checks every model invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.states.is_empty() {
            report.violations.push(Violation::NoStates);
        }
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s) {
                report.violations.push(Violation::DuplicateState(s.clone()));
            }
        }
        let state_set: BTreeSet<&String> = self.states.iter().collect();
        let mut seen_agents = BTreeSet::new();
        for a in &self.agents {
            if !is_token(a) {
                report.violations.push(Violation::BadAgentToken(a.clone()));
            }
            if !seen_agents.insert(a) {
                report.violations.push(Violation::DuplicateAgent(a.clone()));
            }
        }
        let agent_set: BTreeSet<&String> = self.agents.iter().collect();
        for (agent, spec) in &self.relations {
            if !agent_set.contains(agent) {
                report
                    .violations
                    .push(Violation::UnknownAgentInRelations(agent.clone()));
                continue;
            }
            match spec {
                RelationSpec::Blocks(blocks) => {
                    let mut covered: BTreeSet<&String> = BTreeSet::new();
                    for block in blocks {
                        if block.is_empty() {
                            report
                                .violations
                                .push(Violation::EmptyBlock { agent: agent.clone() });
                        }
                        for s in block {
                            if !state_set.contains(s) {
                                report.violations.push(Violation::UnknownStateInRelation {
                                    agent: agent.clone(),
                                    state: s.clone(),
                                });
                            } else if !covered.insert(s) {
                                report.violations.push(Violation::OverlappingBlocks {
                                    agent: agent.clone(),
                                    state: s.clone(),
                                });
                            }
                        }
                    }
                    for s in &self.states {
                        if !covered.contains(s) {
                            report.violations.push(Violation::UncoveredState {
                                agent: agent.clone(),
                                state: s.clone(),
                            });
                        }
                    }
                }
                // Pair lists are closed into an equivalence relation, so the
                // only thing that can go wrong is an unknown state.
                RelationSpec::Pairs(pairs) => {
                    for (a, b) in pairs {
                        for s in [a, b] {
                            if !state_set.contains(s) {
                                report.violations.push(Violation::UnknownStateInRelation {
                                    agent: agent.clone(),
                                    state: s.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        for (prop, states) in &self.valuation {
            if !is_token(prop) {
                report.violations.push(Violation::BadPropToken(prop.clone()));
            }
            for s in states {
                if !state_set.contains(s) {
                    report.violations.push(Violation::UnknownStateInValuation {
                        prop: prop.clone(),
                        state: s.clone(),
                    });
                }
            }
        }
        if let Some(d) = &self.designated {
            if !state_set.contains(d) {
                report.violations.push(Violation::UnknownDesignated(d.clone()));
            }
        }
        report
    }

    pub fn build(self) -> Result<Model, ModelError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        let mut states = self.states;
        states.sort();
        let mut agents = self.agents;
        agents.sort();
        let ix_of = |name: &str| states.binary_search_by(|s| s.as_str().cmp(name)).unwrap() as u32;
        let n = states.len();
        let relations = agents
            .iter()
            .map(|agent| match self.relations.get(agent) {
                None => Partition::identity(n),
                Some(RelationSpec::Blocks(blocks)) => Partition::from_blocks(
                    n,
                    blocks
                        .iter()
                        .map(|b| b.iter().map(|s| ix_of(s)).collect())
                        .collect(),
                ),
                Some(RelationSpec::Pairs(pairs)) => Partition::from_pairs(
                    n,
                    &pairs
                        .iter()
                        .map(|(a, b)| (ix_of(a), ix_of(b)))
                        .collect::<Vec<_>>(),
                ),
            })
            .collect();
        let mut props = Vec::new();
        let mut valuation = Vec::new();
        for (prop, members) in &self.valuation {
            props.push(PropId::new(prop.clone()));
            valuation.push(StateSet::from_indices(n, members.iter().map(|s| ix_of(s))));
        }
        let designated = self.designated.as_deref().map(ix_of);
        Ok(Model {
            states,
            agents: agents.into_iter().map(AgentId).collect(),
            relations,
            props,
            valuation,
            designated,
        })
    }
}

/// An immutable finite S5 model with optional designated state. All
/// operations are pure; values can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    states: Vec<String>,
    agents: Vec<AgentId>,
    relations: Vec<Partition>,
    props: Vec<PropId>,
    valuation: Vec<StateSet>,
    designated: Option<u32>,
}

impl Model {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, ix: u32) -> &str {
        &self.states[ix as usize]
    }

    pub fn state_ix(&self, name: &str) -> Option<u32> {
        self.states
            .binary_search_by(|s| s.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn agent_ix(&self, agent: &AgentId) -> Option<usize> {
        self.agents.binary_search(agent).ok()
    }

    pub fn props(&self) -> &[PropId] {
        &self.props
    }

    pub fn prop_ix(&self, prop: &PropId) -> Option<usize> {
        self.props.binary_search(prop).ok()
    }

    pub fn prop_extension(&self, prop_ix: usize) -> &StateSet {
        &self.valuation[prop_ix]
    }

    pub fn partition(&self, agent_ix: usize) -> &Partition {
        &self.relations[agent_ix]
    }

    pub fn designated(&self) -> Option<u32> {
        self.designated
    }

    /// The block of agent `a`'s partition containing `s`.
    pub fn agent_class(&self, a: &AgentId, s: &str) -> Result<StateSet, ModelError> {
        let ai = self
            .agent_ix(a)
            .ok_or_else(|| ModelError::UnknownAgent(a.to_string()))?;
        let si = self
            .state_ix(s)
            .ok_or_else(|| ModelError::UnknownState(s.to_string()))?;
        Ok(StateSet::from_indices(
            self.n_states(),
            self.relations[ai].class_of(si).iter().copied(),
        ))
    }

    /// States reachable from `s` through blocks of agents in `group`: the
    /// reflexive transitive closure of the union of their relations. The
    /// empty group yields `{s}`.
    pub fn group_closure(&self, group: &BTreeSet<AgentId>, s: &str) -> Result<StateSet, ModelError> {
        let si = self
            .state_ix(s)
            .ok_or_else(|| ModelError::UnknownState(s.to_string()))?;
        let agent_ixs = group
            .iter()
            .map(|a| {
                self.agent_ix(a)
                    .ok_or_else(|| ModelError::UnknownAgent(a.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.group_closure_ix(&agent_ixs, si))
    }

    pub(crate) fn group_closure_ix(&self, agent_ixs: &[usize], s: u32) -> StateSet {
        let mut seen = StateSet::empty(self.n_states());
        seen.insert(s);
        let mut frontier = vec![s];
        while let Some(t) = frontier.pop() {
            for &ai in agent_ixs {
                for &u in self.relations[ai].class_of(t) {
                    if !seen.contains(u) {
                        seen.insert(u);
                        frontier.push(u);
                    }
                }
            }
        }
        seen
    }

    /// Group closure within a live mask: only states in `mask` are traversed.
    pub(crate) fn group_closure_masked(&self, agent_ixs: &[usize], s: u32, mask: &StateSet) -> StateSet {
        let mut seen = StateSet::empty(self.n_states());
        seen.insert(s);
        let mut frontier = vec![s];
        while let Some(t) = frontier.pop() {
            for &ai in agent_ixs {
                for &u in self.relations[ai].class_of(t) {
                    if mask.contains(u) && !seen.contains(u) {
                        seen.insert(u);
                        frontier.push(u);
                    }
                }
            }
        }
        seen
    }

    /// Restriction of the model to `keep`: blocks and valuations are
    /// intersected, empty blocks dropped, the designated state preserved only
    /// if it survives.
    pub fn restrict(&self, keep: &StateSet) -> Result<Model, ModelError> {
        if keep.universe_size() != self.n_states() {
            return Err(ModelError::BadRestriction);
        }
        if keep.is_empty() {
            return Err(ModelError::EmptyRestriction);
        }
        let old_of_new: Vec<u32> = keep.iter().collect();
        let mut new_of_old = vec![u32::MAX; self.n_states()];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old as usize] = new as u32;
        }
        let n = old_of_new.len();
        let states = old_of_new
            .iter()
            .map(|&o| self.states[o as usize].clone())
            .collect();
        let relations = self
            .relations
            .iter()
            .map(|p| {
                let blocks = p
                    .blocks()
                    .iter()
                    .filter_map(|b| {
                        let nb: Vec<u32> = b
                            .iter()
                            .filter(|&&s| keep.contains(s))
                            .map(|&s| new_of_old[s as usize])
                            .collect();
                        (!nb.is_empty()).then_some(nb)
                    })
                    .collect();
                Partition::from_blocks(n, blocks)
            })
            .collect();
        let valuation = self
            .valuation
            .iter()
            .map(|v| StateSet::from_indices(n, v.iter().filter(|&s| keep.contains(s)).map(|s| new_of_old[s as usize])))
            .collect();
        Ok(Model {
            states,
            agents: self.agents.clone(),
            relations,
            props: self.props.clone(),
            valuation,
            designated: self
                .designated
                .filter(|&d| keep.contains(d))
                .map(|d| new_of_old[d as usize]),
        })
    }

    /// Re-checks the invariants on an already-built model.
    pub fn validate(&self) -> ValidationReport {
        self.to_builder().validate()
    }

    fn to_builder(&self) -> ModelBuilder {
        let mut b = ModelBuilder::new()
            .states(self.states.iter().cloned())
            .agents(self.agents.iter().map(|a| a.as_str().to_owned()));
        for (ai, agent) in self.agents.iter().enumerate() {
            b = b.relation(
                agent.as_str(),
                RelationSpec::Blocks(
                    self.relations[ai]
                        .blocks()
                        .iter()
                        .map(|blk| blk.iter().map(|&s| self.states[s as usize].clone()).collect())
                        .collect(),
                ),
            );
        }
        for (pi, prop) in self.props.iter().enumerate() {
            b.valuation.insert(
                prop.as_str().to_owned(),
                self.valuation[pi]
                    .iter()
                    .map(|s| self.states[s as usize].clone())
                    .collect(),
            );
        }
        if let Some(d) = self.designated {
            b = b.designated(self.states[d as usize].clone());
        }
        b
    }

    pub fn from_json_str(json: &str) -> Result<Model, ModelError> {
        let file: ModelFile = serde_json::from_str(json)?;
        file.into_builder().build()
    }

    pub fn to_json_string(&self) -> String {
        let file = ModelFile {
            agents: self.agents.iter().map(|a| a.as_str().to_owned()).collect(),
            states: self.states.clone(),
            relations: self
                .agents
                .iter()
                .enumerate()
                .map(|(ai, a)| {
                    (
                        a.as_str().to_owned(),
                        self.relations[ai]
                            .blocks()
                            .iter()
                            .map(|b| b.iter().map(|&s| self.states[s as usize].clone()).collect())
                            .collect(),
                    )
                })
                .collect(),
            valuation: self
                .props
                .iter()
                .enumerate()
                .map(|(pi, p)| {
                    (
                        p.as_str().to_owned(),
                        self.valuation[pi]
                            .iter()
                            .map(|s| self.states[s as usize].clone())
                            .collect(),
                    )
                })
                .collect(),
            designated: self.designated.map(|d| self.states[d as usize].clone()),
        };
        serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
    }
}

/// On-disk model format. Relation entries whose inner arrays all have length
/// two are read as pair lists and closed; anything else is read as partition
/// blocks.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    agents: Vec<String>,
    states: Vec<String>,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    valuation: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    designated: Option<String>,
}

impl ModelFile {
    fn into_builder(self) -> ModelBuilder {
        let mut b = ModelBuilder::new().states(self.states).agents(self.agents);
        for (agent, rows) in self.relations {
            let spec = if !rows.is_empty() && rows.iter().all(|r| r.len() == 2) {
                RelationSpec::Pairs(rows.into_iter().map(|mut r| {
                    let b = r.pop().unwrap();
                    let a = r.pop().unwrap();
                    (a, b)
                }).collect())
            } else {
                RelationSpec::Blocks(rows)
            };
            b = b.relation(agent, spec);
        }
        b.valuation = self.valuation;
        if let Some(d) = self.designated {
            b = b.designated(d);
        }
        b
    }
}
