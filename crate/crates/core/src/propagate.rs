//! Offer-wave propagation: a single forward pass over the components in
//! dependency order, evolving the joint state from the source kets to a
//! superposition over absorber outcomes.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::amplitude::{Amplitude, Weight};
use crate::circuit::{CircuitGraph, Component, Violation};
use crate::state::{ModeMap, PairMap, Slot, State, StateError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropagateError {
    #[error("circuit is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("cycle detected at component '{0}'")]
    Cycle(String),
    #[error("unknown cut '{name}' (available: {available})")]
    UnknownCut { name: String, available: String },
    #[error("p_ann = {p_ann} at '{component}' needs square roots outside the {engine} amplitude ring; use the float engine")]
    InexactPAnn { component: String, p_ann: String, engine: &'static str },
    #[error("total weight drifted from 1 after '{component}': {weight}")]
    NormDrift { component: String, weight: String },
    #[error("final state still holds an unabsorbed term {0}")]
    Unabsorbed(String),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Components in execution order plus named cut points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    /// Component indices into the graph, dependency-respecting.
    pub order: Vec<usize>,
    /// Cut name → number of scheduled components applied at that point.
    pub cuts: BTreeMap<String, usize>,
}

impl Schedule {
    pub fn cut_names(&self) -> Vec<&str> {
        let mut named: Vec<(&usize, &String)> = self.cuts.iter().map(|(k, v)| (v, k)).collect();
        named.sort();
        named.into_iter().map(|(_, k)| k.as_str()).collect()
    }
}

pub const CUT_SOURCES: &str = "sources";
pub const CUT_FINAL: &str = "final";
pub const CUT_FIRST_SPLITTERS: &str = "after_first_splitters";
pub const CUT_FIRST_SPLITTER: &str = "after_first_splitter";

/// Deterministic topological order (ties broken by declaration order) and
/// the cut table.
pub fn schedule(g: &CircuitGraph) -> Result<Schedule, PropagateError> {
    let order = g.topological_order().map_err(|idx| PropagateError::Cycle(g.components[idx].name()))?;

    let mut cuts = BTreeMap::new();
    cuts.insert(CUT_SOURCES.to_string(), 0);
    for (step, &idx) in order.iter().enumerate() {
        cuts.insert(format!("after_{}", g.components[idx].name()), step + 1);
    }
    cuts.insert(CUT_FINAL.to_string(), order.len());

    // A first splitter has no splitter upstream of it.
    let first = first_splitters(g);
    if let Some(last) = order.iter().rposition(|idx| first.contains(idx)) {
        cuts.insert(CUT_FIRST_SPLITTERS.to_string(), last + 1);
        cuts.insert(CUT_FIRST_SPLITTER.to_string(), last + 1);
    }
    Ok(Schedule { order, cuts })
}

fn first_splitters(g: &CircuitGraph) -> Vec<usize> {
    let paths = g.paths();
    let is_splitter = |i: usize| matches!(g.components[i], Component::BeamSplitter { .. });
    let mut out = Vec::new();
    for (idx, _) in g.components.iter().enumerate().filter(|(i, _)| is_splitter(*i)) {
        // Walk producers backwards; any splitter on the way disqualifies.
        let mut stack = vec![idx];
        let mut seen = vec![false; g.components.len()];
        let mut upstream_splitter = false;
        while let Some(c) = stack.pop() {
            for input in g.components[c].inputs() {
                for &p in paths.get(input).map(|l| l.producers.as_slice()).unwrap_or(&[]) {
                    if is_splitter(p) {
                        upstream_splitter = true;
                    }
                    if !seen[p] {
                        seen[p] = true;
                        stack.push(p);
                    }
                }
            }
        }
        if !upstream_splitter {
            out.push(idx);
        }
    }
    out
}

/// The fully propagated state: every slot absorbed, total weight one.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalState<A: Amplitude> {
    pub state: State<A>,
}

/// Walks the schedule, calling `visit(step_name, state)` after the source
/// kets are prepared and after every component.
pub fn evolve<A: Amplitude>(
    g: &CircuitGraph,
    mut visit: impl FnMut(&str, &State<A>),
) -> Result<State<A>, PropagateError> {
    let violations = g.validate();
    if !violations.is_empty() {
        return Err(PropagateError::Invalid(violations));
    }
    let sched = schedule(g)?;
    let (owner, _) = g.path_particles();

    let mut state = initial_state::<A>(g)?;
    visit(CUT_SOURCES, &state);
    for &idx in &sched.order {
        let c = &g.components[idx];
        state = apply_component(&state, c, &owner)?;
        let w = state.total_weight();
        if !w.is_unit() {
            return Err(PropagateError::NormDrift { component: c.name(), weight: w.text() });
        }
        visit(&c.name(), &state);
    }
    Ok(state)
}

/// Product of one unit ket per particle, in particle order.
fn initial_state<A: Amplitude>(g: &CircuitGraph) -> Result<State<A>, PropagateError> {
    let mut state = State::<A>::from_terms(vec![], [(crate::state::BasisLabel(vec![]), A::one())]);
    for particle in &g.particles {
        let out = g.components.iter().find_map(|c| match c {
            Component::Source { particle: p, out } if p == particle => Some(out.clone()),
            _ => None,
        });
        let out = out.expect("validated circuits have a source per particle");
        state = state.tensor(&State::ket(particle.clone(), out))?;
    }
    Ok(state)
}

fn particle_of<A: Amplitude>(
    state: &State<A>,
    owner: &BTreeMap<String, String>,
    path: &str,
) -> Result<usize, PropagateError> {
    owner
        .get(path)
        .and_then(|p| state.particle_index(p))
        .ok_or_else(|| PropagateError::Invalid(vec![Violation::UnproducedPath { path: path.into(), component: "?".into() }]))
}

fn apply_component<A: Amplitude>(
    state: &State<A>,
    c: &Component,
    owner: &BTreeMap<String, String>,
) -> Result<State<A>, PropagateError> {
    let single = |input: &str, images: Vec<(Slot, A)>| -> Result<State<A>, PropagateError> {
        let particle = particle_of(state, owner, input)?;
        let map = ModeMap::with_identity_default().with(input, images);
        Ok(state.apply_mode_map(particle, &map)?)
    };
    match c {
        Component::Source { .. } => Ok(state.clone()),
        Component::BeamSplitter { ports, .. } => {
            let particle = particle_of(state, owner, &ports[0].input)?;
            let t = A::frac_1_sqrt2();
            let r = A::i().mul(&t);
            let mut map = ModeMap::with_identity_default();
            for p in ports {
                map.insert(p.input.clone(), vec![(Slot::mode(&p.transmit), t.clone()), (Slot::mode(&p.reflect), r.clone())]);
            }
            Ok(state.apply_mode_map(particle, &map)?)
        }
        Component::Mirror { input, output, phase, .. } => {
            let factor = if *phase { A::i() } else { A::one() };
            single(input, vec![(Slot::mode(output), factor)])
        }
        Component::Detector { name, input } | Component::Blocker { name, input } => {
            single(input, vec![(Slot::absorbed(name), A::one())])
        }
        Component::Interaction { name, path_a, path_b, p_ann, absorber } => {
            let pa = particle_of(state, owner, path_a)?;
            let pb = particle_of(state, owner, path_b)?;
            let map = PairMap::<A>::annihilation(path_a, path_b, absorber, p_ann).ok_or_else(|| {
                PropagateError::InexactPAnn { component: name.clone(), p_ann: p_ann.to_string(), engine: A::ENGINE }
            })?;
            Ok(state.apply_pair_map(pa, pb, &map)?)
        }
    }
}

/// Propagates every offer wave to its absorbers.
pub fn propagate<A: Amplitude>(g: &CircuitGraph) -> Result<FinalState<A>, PropagateError> {
    let state = evolve::<A>(g, |_, _| {})?;
    if let Some((label, _)) = state.terms().find(|(l, _)| !l.is_absorbed()) {
        return Err(PropagateError::Unabsorbed(label.to_string()));
    }
    Ok(FinalState { state })
}

/// The joint state at a named cut of the schedule.
pub fn state_at_cut<A: Amplitude>(g: &CircuitGraph, cut: &str) -> Result<State<A>, PropagateError> {
    let sched = schedule(g)?;
    let Some(&steps) = sched.cuts.get(cut) else {
        return Err(PropagateError::UnknownCut { name: cut.to_string(), available: sched.cut_names().join(", ") });
    };
    let mut snapshots = Vec::with_capacity(sched.order.len() + 1);
    evolve::<A>(g, |_, s| snapshots.push(s.clone()))?;
    Ok(snapshots.swap_remove(steps))
}

/// States at every named cut in schedule order, as `(cut, state)` pairs.
/// Per-component cuts are omitted; use [`evolve`] for those.
pub fn named_cuts<A: Amplitude>(g: &CircuitGraph) -> Result<Vec<(String, State<A>)>, PropagateError> {
    let sched = schedule(g)?;
    let mut snapshots = Vec::with_capacity(sched.order.len() + 1);
    evolve::<A>(g, |_, s| snapshots.push(s.clone()))?;
    let mut out = Vec::new();
    for name in [CUT_SOURCES, CUT_FIRST_SPLITTERS, CUT_FINAL] {
        if let Some(&steps) = sched.cuts.get(name) {
            out.push((name.to_string(), snapshots[steps].clone()));
        }
    }
    Ok(out)
}
