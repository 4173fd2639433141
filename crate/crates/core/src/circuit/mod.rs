//! Interferometer networks: components, path bookkeeping and validation.

mod builtin;
mod dsl;
mod random;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact::Rational;

pub use builtin::{builtin, builtin_text, BUILTIN_NAMES};
pub use dsl::{parse, render, ParseError, ParseErrorKind};
pub use random::random_circuit;

/// A splitter input together with where its transmitted and reflected
/// components go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitterPort {
    pub input: String,
    pub transmit: String,
    pub reflect: String,
}

impl SplitterPort {
    pub fn new(input: &str, transmit: &str, reflect: &str) -> Self {
        SplitterPort { input: input.into(), transmit: transmit.into(), reflect: reflect.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Component {
    Source { particle: String, out: String },
    /// 50/50 splitter: transmit amplitude 1/√2, reflect amplitude i/√2.
    BeamSplitter { name: String, ports: Vec<SplitterPort> },
    /// Redirects a path; multiplies by `i` when `phase` is on.
    Mirror { name: String, input: String, output: String, phase: bool },
    /// Overlap region of two particles' paths. The pair `|a,b⟩` annihilates
    /// into `absorber` with probability `p_ann`; survivors stay on their
    /// paths.
    Interaction { name: String, path_a: String, path_b: String, p_ann: Rational, absorber: String },
    Detector { name: String, input: String },
    Blocker { name: String, input: String },
}

impl Component {
    /// Display name; sources are named after their particle.
    pub fn name(&self) -> String {
        match self {
            Component::Source { particle, .. } => format!("source_{particle}"),
            Component::BeamSplitter { name, .. }
            | Component::Mirror { name, .. }
            | Component::Interaction { name, .. }
            | Component::Detector { name, .. }
            | Component::Blocker { name, .. } => name.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Component::Source { .. } => "Source",
            Component::BeamSplitter { .. } => "BeamSplitter",
            Component::Mirror { .. } => "Mirror",
            Component::Interaction { .. } => "Interaction",
            Component::Detector { .. } => "Detector",
            Component::Blocker { .. } => "Blocker",
        }
    }

    /// Paths this component consumes.
    pub fn inputs(&self) -> Vec<&str> {
        match self {
            Component::Source { .. } | Component::Interaction { .. } => vec![],
            Component::BeamSplitter { ports, .. } => ports.iter().map(|p| p.input.as_str()).collect(),
            Component::Mirror { input, .. } | Component::Detector { input, .. } | Component::Blocker { input, .. } => {
                vec![input]
            }
        }
    }

    /// Paths this component produces.
    pub fn outputs(&self) -> Vec<&str> {
        match self {
            Component::Source { out, .. } => vec![out],
            Component::BeamSplitter { ports, .. } => {
                let mut outs: Vec<&str> = Vec::new();
                for p in ports {
                    for path in [p.transmit.as_str(), p.reflect.as_str()] {
                        if !outs.contains(&path) {
                            outs.push(path);
                        }
                    }
                }
                outs
            }
            Component::Mirror { output, .. } => vec![output],
            _ => vec![],
        }
    }

    /// Paths the component acts on without consuming them.
    pub fn touches(&self) -> Vec<&str> {
        match self {
            Component::Interaction { path_a, path_b, .. } => vec![path_a, path_b],
            _ => vec![],
        }
    }
}

/// Producers and consumers recorded for one path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathLinks {
    pub producers: Vec<usize>,
    pub consumers: Vec<usize>,
    pub touched_by: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateName { name: String },
    UnknownParticle { particle: String },
    MissingSource { particle: String },
    DuplicateSource { particle: String },
    DuplicateProducer { path: String },
    DuplicateConsumer { path: String },
    UnproducedPath { path: String, component: String },
    UnterminatedPath { path: String },
    SplitterOutputs { component: String, reason: String },
    MixedParticles { component: String },
    SameParticleInteraction { component: String },
    PAnnOutOfRange { component: String, p_ann: String },
    Cycle { component: String },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::DuplicateName { .. } => "DuplicateName",
            Violation::UnknownParticle { .. } => "UnknownParticle",
            Violation::MissingSource { .. } => "MissingSource",
            Violation::DuplicateSource { .. } => "DuplicateSource",
            Violation::DuplicateProducer { .. } => "DuplicateProducer",
            Violation::DuplicateConsumer { .. } => "DuplicateConsumer",
            Violation::UnproducedPath { .. } => "UnproducedPath",
            Violation::UnterminatedPath { .. } => "UnterminatedPath",
            Violation::SplitterOutputs { .. } => "SplitterOutputs",
            Violation::MixedParticles { .. } => "MixedParticles",
            Violation::SameParticleInteraction { .. } => "SameParticleInteraction",
            Violation::PAnnOutOfRange { .. } => "PAnnOutOfRange",
            Violation::Cycle { .. } => "Cycle",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.kind())?;
        match self {
            Violation::DuplicateName { name } => write!(f, "component name '{name}' is used more than once"),
            Violation::UnknownParticle { particle } => write!(f, "source for undeclared particle '{particle}'"),
            Violation::MissingSource { particle } => write!(f, "particle '{particle}' has no source"),
            Violation::DuplicateSource { particle } => write!(f, "particle '{particle}' has more than one source"),
            Violation::DuplicateProducer { path } => write!(f, "path '{path}' has more than one producer"),
            Violation::DuplicateConsumer { path } => write!(f, "path '{path}' has more than one consumer"),
            Violation::UnproducedPath { path, component } => {
                write!(f, "path '{path}' used by '{component}' is never produced")
            }
            Violation::UnterminatedPath { path } => write!(f, "path '{path}' is never absorbed"),
            Violation::SplitterOutputs { component, reason } => write!(f, "splitter '{component}': {reason}"),
            Violation::MixedParticles { component } => {
                write!(f, "'{component}' receives paths of different particles")
            }
            Violation::SameParticleInteraction { component } => {
                write!(f, "interaction '{component}' joins two paths of the same particle")
            }
            Violation::PAnnOutOfRange { component, p_ann } => {
                write!(f, "interaction '{component}' has p_ann {p_ann} outside [0,1]")
            }
            Violation::Cycle { component } => write!(f, "component '{component}' lies on a cycle"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown built-in circuit '{0}' (expected one of: hardy, mzi_open, mzi_blocked, photon_pair)")]
pub struct UnknownBuiltin(pub String);

/// A network of optical components over a fixed, ordered set of particles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitGraph {
    pub particles: Vec<String>,
    pub components: Vec<Component>,
}

impl CircuitGraph {
    pub fn new(particles: Vec<String>, components: Vec<Component>) -> Self {
        CircuitGraph { particles, components }
    }

    pub fn paths(&self) -> BTreeMap<String, PathLinks> {
        let mut paths: BTreeMap<String, PathLinks> = BTreeMap::new();
        for (idx, c) in self.components.iter().enumerate() {
            for p in c.outputs() {
                paths.entry(p.to_string()).or_default().producers.push(idx);
            }
            for p in c.inputs() {
                paths.entry(p.to_string()).or_default().consumers.push(idx);
            }
            for p in c.touches() {
                paths.entry(p.to_string()).or_default().touched_by.push(idx);
            }
        }
        paths
    }

    /// Returns a copy with every interaction region's `p_ann` replaced.
    pub fn with_p_ann(&self, p_ann: &Rational) -> CircuitGraph {
        let mut g = self.clone();
        for c in &mut g.components {
            if let Component::Interaction { p_ann: p, .. } = c {
                *p = p_ann.clone();
            }
        }
        g
    }

    pub fn has_interaction(&self) -> bool {
        self.components.iter().any(|c| matches!(c, Component::Interaction { .. }))
    }

    /// Component indices each component must wait for.
    pub fn dependencies(&self) -> Vec<BTreeSet<usize>> {
        let paths = self.paths();
        let mut deps = vec![BTreeSet::new(); self.components.len()];
        for (idx, c) in self.components.iter().enumerate() {
            for p in c.inputs().into_iter().chain(c.touches()) {
                if let Some(links) = paths.get(p) {
                    deps[idx].extend(links.producers.iter().copied().filter(|&j| j != idx));
                }
            }
        }
        // Whoever consumes a touched path runs after the toucher.
        for links in paths.values() {
            for &t in &links.touched_by {
                for &c in &links.consumers {
                    deps[c].insert(t);
                }
            }
        }
        deps
    }

    /// Kahn's algorithm, always taking the earliest-declared ready
    /// component. On a cycle, returns the earliest component left over.
    pub fn topological_order(&self) -> Result<Vec<usize>, usize> {
        let deps = self.dependencies();
        let n = self.components.len();
        let mut remaining: Vec<usize> = deps.iter().map(BTreeSet::len).collect();
        let mut dependents = vec![Vec::new(); n];
        for (idx, ds) in deps.iter().enumerate() {
            for &d in ds {
                dependents[d].push(idx);
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| remaining[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(next) = ready.pop_first() {
            order.push(next);
            for &d in &dependents[next] {
                remaining[d] -= 1;
                if remaining[d] == 0 {
                    ready.insert(d);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).find(|&i| remaining[i] > 0).unwrap_or(0))
        }
    }

    /// Which particle travels each path, found by walking forward from the
    /// sources. Components fed by several particles are reported.
    pub fn path_particles(&self) -> (BTreeMap<String, String>, Vec<Violation>) {
        let mut owner: BTreeMap<String, String> = BTreeMap::new();
        let mut violations = Vec::new();
        for c in &self.components {
            if let Component::Source { particle, out } = c {
                owner.entry(out.clone()).or_insert_with(|| particle.clone());
            }
        }
        // Propagate ownership to a fixed point; bounded by the component count.
        let mut mixed: BTreeSet<usize> = BTreeSet::new();
        for _ in 0..=self.components.len() {
            let mut changed = false;
            for (idx, c) in self.components.iter().enumerate() {
                let owners: BTreeSet<String> = c.inputs().iter().filter_map(|p| owner.get(*p).cloned()).collect();
                if owners.len() > 1 {
                    mixed.insert(idx);
                    continue;
                }
                if let Some(o) = owners.into_iter().next() {
                    for out in c.outputs() {
                        if !owner.contains_key(out) {
                            owner.insert(out.to_string(), o.clone());
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for idx in mixed {
            violations.push(Violation::MixedParticles { component: self.components[idx].name() });
        }
        (owner, violations)
    }

    /// Every violated structural invariant; empty iff the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut names = BTreeSet::new();
        for c in &self.components {
            if !matches!(c, Component::Source { .. }) && !names.insert(c.name()) {
                out.push(Violation::DuplicateName { name: c.name() });
            }
        }

        let mut sources: BTreeMap<&str, usize> = BTreeMap::new();
        for c in &self.components {
            if let Component::Source { particle, .. } = c {
                if !self.particles.contains(particle) {
                    out.push(Violation::UnknownParticle { particle: particle.clone() });
                }
                *sources.entry(particle).or_default() += 1;
            }
        }
        for p in &self.particles {
            match sources.get(p.as_str()) {
                None => out.push(Violation::MissingSource { particle: p.clone() }),
                Some(&n) if n > 1 => out.push(Violation::DuplicateSource { particle: p.clone() }),
                _ => {}
            }
        }

        let paths = self.paths();
        for (path, links) in &paths {
            if links.producers.len() > 1 {
                out.push(Violation::DuplicateProducer { path: path.clone() });
            }
            if links.consumers.len() > 1 {
                out.push(Violation::DuplicateConsumer { path: path.clone() });
            }
            if links.producers.is_empty() {
                let user = links.consumers.first().or(links.touched_by.first()).copied().unwrap_or(0);
                out.push(Violation::UnproducedPath { path: path.clone(), component: self.components[user].name() });
            } else if links.consumers.is_empty() {
                out.push(Violation::UnterminatedPath { path: path.clone() });
            }
        }

        for c in &self.components {
            if let Component::BeamSplitter { name, ports } = c {
                if let Some(reason) = splitter_problem(ports) {
                    out.push(Violation::SplitterOutputs { component: name.clone(), reason });
                }
            }
        }

        let (owner, mixed) = self.path_particles();
        out.extend(mixed);
        for c in &self.components {
            if let Component::Interaction { name, path_a, path_b, p_ann, .. } = c {
                let same_path = path_a == path_b;
                let same_owner = matches!((owner.get(path_a), owner.get(path_b)), (Some(a), Some(b)) if a == b);
                if same_path || same_owner {
                    out.push(Violation::SameParticleInteraction { component: name.clone() });
                }
                if *p_ann < Rational::zero() || *p_ann > Rational::one() {
                    out.push(Violation::PAnnOutOfRange { component: name.clone(), p_ann: p_ann.to_string() });
                }
            }
        }

        if let Err(idx) = self.topological_order() {
            out.push(Violation::Cycle { component: self.components[idx].name() });
        }
        out
    }
}

fn splitter_problem(ports: &[SplitterPort]) -> Option<String> {
    match ports {
        [p] if p.transmit == p.reflect => Some("transmit and reflect outputs coincide".into()),
        [_] => None,
        [a, b] => {
            if a.transmit == a.reflect || b.transmit == b.reflect {
                Some("transmit and reflect outputs coincide".into())
            } else if a.input == b.input {
                Some("both ports read the same input".into())
            } else if b.transmit != a.reflect || b.reflect != a.transmit {
                Some("second port must transmit into the first port's reflect path and reflect into its transmit path".into())
            } else {
                None
            }
        }
        _ => Some(format!("expected 1 or 2 ports, found {}", ports.len())),
    }
}
