//! Sparse multi-particle superpositions.
//!
//! A [`State`] maps joint basis labels (one slot per particle) to amplitudes.
//! Slots hold either the path a particle currently occupies, the absorber
//! that took it, or a joint-absorption label shared by an annihilated pair.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::amplitude::{Amplitude, Weight};
use crate::exact::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("particle '{0}' appears in both factors of a tensor product")]
    Composition(String),
    #[error("mode map for particle '{particle}' has no entry for mode '{mode}'")]
    IncompleteMap { particle: String, mode: String },
    #[error("particle index {index} out of range for a {arity}-particle state")]
    ParticleIndex { index: usize, arity: usize },
    #[error("malformed pair fragment: {0}")]
    MalformedFragment(String),
}

/// What one particle slot of a basis label holds.
///
/// The variant order fixes the outcome order used everywhere else: joint
/// absorptions sort first, then single absorptions, then live modes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    /// Consumed together with a partner particle by the named absorber.
    Joint(String),
    /// Absorbed by a detector or blocker.
    Absorbed(String),
    /// Still propagating along the named path.
    Mode(String),
}

impl Slot {
    pub fn mode(name: impl Into<String>) -> Self {
        Slot::Mode(name.into())
    }

    pub fn absorbed(name: impl Into<String>) -> Self {
        Slot::Absorbed(name.into())
    }

    pub fn is_mode(&self) -> bool {
        matches!(self, Slot::Mode(_))
    }
}

/// One slot per particle, in the experiment's particle order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel(pub Vec<Slot>);

impl BasisLabel {
    pub fn new(slots: Vec<Slot>) -> Self {
        BasisLabel(slots)
    }

    /// Label built from path names, e.g. `BasisLabel::modes(&["v+", "w-"])`.
    pub fn modes(names: &[&str]) -> Self {
        BasisLabel(names.iter().map(|n| Slot::mode(*n)).collect())
    }

    /// Label built from absorber names, e.g. `BasisLabel::absorbed(&["D+", "D-"])`.
    pub fn absorbed(names: &[&str]) -> Self {
        BasisLabel(names.iter().map(|n| Slot::absorbed(*n)).collect())
    }

    pub fn slots(&self) -> &[Slot] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// True when no slot is still propagating.
    pub fn is_absorbed(&self) -> bool {
        !self.0.iter().any(Slot::is_mode)
    }
}

impl fmt::Display for BasisLabel {
    /// `(D+,D-)`, `(C)`, or `ANN@gamma` when a single joint absorption
    /// covers every slot. A joint label is printed once per absorbed pair.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        let mut joint_seen: Vec<&str> = Vec::new();
        for slot in &self.0 {
            match slot {
                Slot::Joint(name) => {
                    if let Some(pos) = joint_seen.iter().position(|n| *n == name) {
                        // Second slot of the pair: skip, and forget it so a later
                        // pair with the same absorber prints again.
                        joint_seen.remove(pos);
                    } else {
                        joint_seen.push(name);
                        parts.push(format!("ANN@{name}"));
                    }
                }
                Slot::Absorbed(name) | Slot::Mode(name) => parts.push(name.clone()),
            }
        }
        if parts.len() == 1 && self.0.iter().all(|s| matches!(s, Slot::Joint(_))) {
            f.write_str(&parts[0])
        } else {
            write!(f, "({})", parts.join(","))
        }
    }
}

/// Linear action on one particle's slot: each mode maps to a list of
/// `(slot, amplitude)` images. Absorbed and joint slots are left alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMap<A> {
    entries: BTreeMap<String, Vec<(Slot, A)>>,
    identity_default: bool,
}

impl<A: Amplitude> ModeMap<A> {
    /// A map that rejects modes without an entry.
    pub fn strict() -> Self {
        ModeMap { entries: BTreeMap::new(), identity_default: false }
    }

    /// A map that passes modes without an entry through unchanged.
    pub fn with_identity_default() -> Self {
        ModeMap { entries: BTreeMap::new(), identity_default: true }
    }

    pub fn insert(&mut self, mode: impl Into<String>, images: Vec<(Slot, A)>) -> &mut Self {
        self.entries.insert(mode.into(), images);
        self
    }

    pub fn with(mut self, mode: impl Into<String>, images: Vec<(Slot, A)>) -> Self {
        self.insert(mode, images);
        self
    }

    fn images(&self, mode: &str) -> Option<Vec<(Slot, A)>> {
        match self.entries.get(mode) {
            Some(images) => Some(images.clone()),
            None if self.identity_default => Some(vec![(Slot::mode(mode), A::one())]),
            None => None,
        }
    }
}

type PairImages<A> = Vec<((Slot, Slot), A)>;

/// Linear action on a pair of slots. Only terms where both slots are live
/// modes and the mode pair has an entry are transformed; everything else
/// passes through.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMap<A> {
    entries: BTreeMap<(String, String), PairImages<A>>,
}

impl<A: Amplitude> PairMap<A> {
    pub fn new() -> Self {
        PairMap { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, modes: (String, String), images: Vec<((Slot, Slot), A)>) -> &mut Self {
        self.entries.insert(modes, images);
        self
    }

    /// `|a,b⟩ → √p |ANN@absorber⟩ + √(1−p) |a,b⟩`. Returns `None` when the
    /// square roots are not representable in the amplitude type.
    pub fn annihilation(path_a: &str, path_b: &str, absorber: &str, p_ann: &Rational) -> Option<Self> {
        let keep = Rational::from_integer(1.into()) - p_ann;
        let annihilate = A::sqrt_rational(p_ann)?;
        let survive = A::sqrt_rational(&keep)?;
        let joint = Slot::Joint(absorber.to_string());
        let mut map = PairMap::new();
        map.insert(
            (path_a.to_string(), path_b.to_string()),
            vec![
                ((joint.clone(), joint), annihilate),
                ((Slot::mode(path_a), Slot::mode(path_b)), survive),
            ],
        );
        Some(map)
    }
}

impl<A: Amplitude> Default for PairMap<A> {
    fn default() -> Self {
        PairMap::new()
    }
}

/// A finite superposition over joint basis labels. Zero amplitudes are
/// never stored.
#[derive(Clone, PartialEq)]
pub struct State<A> {
    particles: Vec<String>,
    terms: BTreeMap<BasisLabel, A>,
}

impl<A: Amplitude> State<A> {
    /// The state with no terms.
    pub fn empty(particles: Vec<String>) -> Self {
        State { particles, terms: BTreeMap::new() }
    }

    /// A single-particle unit ket `|mode⟩`.
    pub fn ket(particle: impl Into<String>, mode: impl Into<String>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(BasisLabel(vec![Slot::Mode(mode.into())]), A::one());
        State { particles: vec![particle.into()], terms }
    }

    /// Builds a state from `(label, amplitude)` pairs, summing repeats and
    /// dropping zeros.
    pub fn from_terms(particles: Vec<String>, terms: impl IntoIterator<Item = (BasisLabel, A)>) -> Self {
        let mut s = State::empty(particles);
        for (label, amp) in terms {
            debug_assert_eq!(label.arity(), s.particles.len());
            s.accumulate(label, amp);
        }
        s
    }

    fn accumulate(&mut self, label: BasisLabel, amp: A) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(label) {
            Entry::Vacant(v) => {
                if !amp.is_zero() {
                    v.insert(amp);
                }
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().add(&amp);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn particles(&self) -> &[String] {
        &self.particles
    }

    pub fn arity(&self) -> usize {
        self.particles.len()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in label order.
    pub fn terms(&self) -> impl Iterator<Item = (&BasisLabel, &A)> {
        self.terms.iter()
    }

    pub fn particle_index(&self, name: &str) -> Option<usize> {
        self.particles.iter().position(|p| p == name)
    }

    /// Amplitude at `label`, or exact zero when absent.
    pub fn amplitude_of(&self, label: &BasisLabel) -> A {
        self.terms.get(label).cloned().unwrap_or_else(A::zero)
    }

    /// `Σ |α|²` over all terms.
    pub fn total_weight(&self) -> A::Weight {
        self.terms.values().fold(<A::Weight as Weight>::zero(), |acc, a| acc.add(&a.norm_sqr()))
    }

    pub fn scale(&self, factor: &A) -> Self {
        State::from_terms(self.particles.clone(), self.terms.iter().map(|(l, a)| (l.clone(), a.mul(factor))))
    }

    /// `self ⊗ other`, with `other`'s particles appended after `self`'s.
    pub fn tensor(&self, other: &State<A>) -> Result<State<A>, StateError> {
        if let Some(p) = self.particles.iter().find(|p| other.particles.contains(p)) {
            return Err(StateError::Composition(p.clone()));
        }
        let mut particles = self.particles.clone();
        particles.extend(other.particles.iter().cloned());
        let mut out = State::empty(particles);
        for (la, aa) in &self.terms {
            for (lb, ab) in &other.terms {
                let mut slots = la.0.clone();
                slots.extend(lb.0.iter().cloned());
                out.accumulate(BasisLabel(slots), aa.mul(ab));
            }
        }
        Ok(out)
    }

    fn check_index(&self, index: usize) -> Result<(), StateError> {
        if index < self.arity() {
            Ok(())
        } else {
            Err(StateError::ParticleIndex { index, arity: self.arity() })
        }
    }

    /// Applies `map` linearly to the slot of `particle`.
    pub fn apply_mode_map(&self, particle: usize, map: &ModeMap<A>) -> Result<State<A>, StateError> {
        self.check_index(particle)?;
        let mut out = State::empty(self.particles.clone());
        for (label, amp) in &self.terms {
            let Slot::Mode(mode) = &label.0[particle] else {
                out.accumulate(label.clone(), amp.clone());
                continue;
            };
            let images = map.images(mode).ok_or_else(|| StateError::IncompleteMap {
                particle: self.particles[particle].clone(),
                mode: mode.clone(),
            })?;
            for (slot, coeff) in images {
                let mut slots = label.0.clone();
                slots[particle] = slot;
                out.accumulate(BasisLabel(slots), amp.mul(&coeff));
            }
        }
        Ok(out)
    }

    /// Applies `map` linearly to the slot pair `(p1, p2)`; pairs without an
    /// entry are left unchanged.
    pub fn apply_pair_map(&self, p1: usize, p2: usize, map: &PairMap<A>) -> Result<State<A>, StateError> {
        self.check_index(p1)?;
        self.check_index(p2)?;
        if p1 == p2 {
            return Err(StateError::MalformedFragment(format!("pair map applied twice to particle index {p1}")));
        }
        for images in map.entries.values() {
            for ((a, b), _) in images {
                match (a, b) {
                    (Slot::Joint(x), Slot::Joint(y)) if x != y => {
                        return Err(StateError::MalformedFragment(format!("joint labels differ: {x} vs {y}")))
                    }
                    (Slot::Joint(_), Slot::Joint(_)) => {}
                    (Slot::Joint(x), _) | (_, Slot::Joint(x)) => {
                        return Err(StateError::MalformedFragment(format!("joint label {x} covers only one slot")))
                    }
                    _ => {}
                }
            }
        }
        let mut out = State::empty(self.particles.clone());
        for (label, amp) in &self.terms {
            let images = match (&label.0[p1], &label.0[p2]) {
                (Slot::Mode(a), Slot::Mode(b)) => map.entries.get(&(a.clone(), b.clone())),
                _ => None,
            };
            match images {
                None => out.accumulate(label.clone(), amp.clone()),
                Some(images) => {
                    for ((s1, s2), coeff) in images {
                        let mut slots = label.0.clone();
                        slots[p1] = s1.clone();
                        slots[p2] = s2.clone();
                        out.accumulate(BasisLabel(slots), amp.mul(coeff));
                    }
                }
            }
        }
        Ok(out)
    }

    /// True when every slot of every term is absorbed.
    pub fn is_fully_absorbed(&self) -> bool {
        self.terms.keys().all(BasisLabel::is_absorbed)
    }

    /// Re-expresses the amplitudes in another engine.
    pub fn map_amplitudes<B: Amplitude>(&self, f: impl Fn(&A) -> B) -> State<B> {
        State::from_terms(self.particles.clone(), self.terms.iter().map(|(l, a)| (l.clone(), f(a))))
    }
}

impl<A: Amplitude> fmt::Display for State<A> {
    /// Terms in label order, e.g. `(1/2)|v+,v-⟩ + ((1/2)i)|v+,w-⟩`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(label, amp)| {
                let inner = label.to_string();
                let inner = inner.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(&inner);
                format!("({})|{}⟩", amp.text(), inner)
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl<A: Amplitude> fmt::Debug for State<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State[{}] {}", self.particles.join(","), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ExactAmp, ExactReal};

    type S = State<ExactAmp>;

    fn h() -> ExactAmp {
        ExactAmp::frac_1_sqrt2()
    }

    fn ih() -> ExactAmp {
        ExactAmp::i() * h()
    }

    /// (1/√2)[|v⟩ + i|w⟩] for one particle.
    fn first_split(particle: &str, v: &str, w: &str) -> S {
        let map = ModeMap::strict().with("s", vec![(Slot::mode(v), h()), (Slot::mode(w), ih())]);
        S::ket(particle, "s").apply_mode_map(0, &map).unwrap()
    }

    fn second_split_map() -> ModeMap<ExactAmp> {
        ModeMap::strict()
            .with("v", vec![(Slot::mode("d"), h()), (Slot::mode("c"), ih())])
            .with("w", vec![(Slot::mode("c"), h()), (Slot::mode("d"), ih())])
    }

    #[test]
    fn tensor_reproduces_joint_state() {
        let a = first_split("e+", "v+", "w+");
        let b = first_split("e-", "v-", "w-");
        let joint = a.tensor(&b).unwrap();
        let half = ExactAmp::ratio(1, 2);
        let i_half = ExactAmp::i() * half.clone();
        assert_eq!(joint.len(), 4);
        assert_eq!(joint.amplitude_of(&BasisLabel::modes(&["v+", "v-"])), half);
        assert_eq!(joint.amplitude_of(&BasisLabel::modes(&["v+", "w-"])), i_half);
        assert_eq!(joint.amplitude_of(&BasisLabel::modes(&["w+", "v-"])), i_half);
        assert_eq!(joint.amplitude_of(&BasisLabel::modes(&["w+", "w-"])), ExactAmp::ratio(-1, 2));
        assert_eq!(joint.total_weight(), ExactReal::one());
    }

    #[test]
    fn tensor_of_unit_kets() {
        let xy = S::ket("a", "x").tensor(&S::ket("b", "y")).unwrap();
        assert_eq!(xy.len(), 1);
        assert_eq!(xy.amplitude_of(&BasisLabel::modes(&["x", "y"])), ExactAmp::one());
    }

    #[test]
    fn tensor_weights_multiply() {
        let a = S::from_terms(
            vec!["a".into()],
            [(BasisLabel::modes(&["x"]), ExactAmp::ratio(1, 2)), (BasisLabel::modes(&["y"]), ExactAmp::ratio(1, 3))],
        );
        let b = S::from_terms(
            vec!["b".into()],
            [(BasisLabel::modes(&["p"]), ExactAmp::ratio(2, 1)), (BasisLabel::modes(&["q"]), ih())],
        );
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.len(), 4);
        let expected = &a.total_weight() * &b.total_weight();
        assert_eq!(ab.total_weight(), expected);
    }

    #[test]
    fn tensor_rejects_shared_particles() {
        let err = S::ket("a", "x").tensor(&S::ket("a", "y")).unwrap_err();
        assert_eq!(err, StateError::Composition("a".into()));
    }

    #[test]
    fn first_splitter_then_second() {
        let s = first_split("q", "v", "w");
        assert_eq!(s.amplitude_of(&BasisLabel::modes(&["v"])), h());
        assert_eq!(s.amplitude_of(&BasisLabel::modes(&["w"])), ih());
        let out = s.apply_mode_map(0, &second_split_map()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.amplitude_of(&BasisLabel::modes(&["c"])), ExactAmp::i());
    }

    #[test]
    fn identity_map_is_noop() {
        let s = first_split("q", "v", "w");
        assert_eq!(s.apply_mode_map(0, &ModeMap::with_identity_default()).unwrap(), s);
    }

    #[test]
    fn incomplete_map_is_an_error() {
        let s = first_split("q", "v", "w");
        let map = ModeMap::strict().with("v", vec![(Slot::mode("d"), ExactAmp::one())]);
        let err = s.apply_mode_map(0, &map).unwrap_err();
        assert_eq!(err, StateError::IncompleteMap { particle: "q".into(), mode: "w".into() });
    }

    fn split_pair() -> S {
        first_split("e+", "v+", "w+").tensor(&first_split("e-", "v-", "w-")).unwrap()
    }

    #[test]
    fn annihilation_with_certainty() {
        let map = PairMap::annihilation("w+", "w-", "gamma", &rat(1, 1)).unwrap();
        let out = split_pair().apply_pair_map(0, 1, &map).unwrap();
        let ann = BasisLabel(vec![Slot::Joint("gamma".into()), Slot::Joint("gamma".into())]);
        assert_eq!(out.amplitude_of(&ann), ExactAmp::ratio(-1, 2));
        assert!(out.amplitude_of(&BasisLabel::modes(&["w+", "w-"])).is_zero());
        assert_eq!(out.amplitude_of(&BasisLabel::modes(&["v+", "v-"])), ExactAmp::ratio(1, 2));
        assert_eq!(out.len(), 4);
        assert_eq!(ann.to_string(), "ANN@gamma");
    }

    #[test]
    fn annihilation_disabled_is_identity() {
        let map = PairMap::annihilation("w+", "w-", "gamma", &rat(0, 1)).unwrap();
        assert_eq!(split_pair().apply_pair_map(0, 1, &map).unwrap(), split_pair());
    }

    #[test]
    fn half_annihilation_preserves_norm() {
        // -1/2 |w+,w-> becomes -(1/(2√2)) ANN - (1/(2√2)) |w+,w->; both parts
        // carry weight 1/8 and the total stays 1.
        let map = PairMap::annihilation("w+", "w-", "gamma", &rat(1, 2)).unwrap();
        let out = split_pair().apply_pair_map(0, 1, &map).unwrap();
        let ann = BasisLabel(vec![Slot::Joint("gamma".into()), Slot::Joint("gamma".into())]);
        let expected = ExactAmp::ratio(-1, 2) * h();
        assert_eq!(out.amplitude_of(&ann), expected);
        assert_eq!(out.amplitude_of(&BasisLabel::modes(&["w+", "w-"])), expected);
        assert_eq!(out.amplitude_of(&ann).norm_sqr(), ExactReal::ratio(1, 8));
        assert_eq!(out.total_weight(), ExactReal::one());
    }

    #[test]
    fn malformed_fragment_rejected() {
        let mut map = PairMap::<ExactAmp>::new();
        map.insert(
            ("w+".into(), "w-".into()),
            vec![((Slot::Joint("g".into()), Slot::mode("w-")), ExactAmp::one())],
        );
        assert!(matches!(split_pair().apply_pair_map(0, 1, &map), Err(StateError::MalformedFragment(_))));
    }

    #[test]
    fn amplitude_of_absent_label_is_zero() {
        assert!(split_pair().amplitude_of(&BasisLabel::modes(&["c+", "c-"])).is_zero());
    }

    #[test]
    fn total_weight_of_empty_state() {
        assert_eq!(S::empty(vec![]).total_weight(), ExactReal::zero());
    }

    #[test]
    fn display_sorted_exact() {
        let s = first_split("q", "v", "w");
        assert_eq!(s.to_string(), "(1/sqrt2)|v⟩ + ((1/sqrt2)i)|w⟩");
    }

    #[test]
    fn outcome_order_puts_joint_first() {
        let ann = BasisLabel(vec![Slot::Joint("g".into()), Slot::Joint("g".into())]);
        let cc = BasisLabel::absorbed(&["C+", "C-"]);
        let dd = BasisLabel::absorbed(&["D+", "D-"]);
        assert!(ann < cc && cc < dd);
        assert_eq!(cc.to_string(), "(C+,C-)");
        assert_eq!(BasisLabel::absorbed(&["C"]).to_string(), "(C)");
    }
}
