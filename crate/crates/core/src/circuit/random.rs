//! Seeded generator of valid random networks, used for fuzzing the
//! propagation invariants.
//!
//! Construction runs in phases so the result is acyclic by construction:
//! per-particle splitters and mirrors, then interaction regions on the open
//! paths, then more per-particle components, and finally a detector on
//! every path still open.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CircuitGraph, Component, SplitterPort};
use crate::exact::rat;

/// Annihilation probabilities whose square roots (and complements') lie in
/// Q(√2).
const EXACT_P_ANN: [(i64, i64); 5] = [(0, 1), (1, 1), (1, 2), (1, 9), (8, 9)];

struct Builder {
    rng: ChaCha8Rng,
    components: Vec<Component>,
    next_path: usize,
    next_name: usize,
}

impl Builder {
    fn below(&mut self, n: usize) -> usize {
        (self.rng.next_u64() % n as u64) as usize
    }

    fn path(&mut self) -> String {
        self.next_path += 1;
        format!("p{}", self.next_path)
    }

    fn name(&mut self, prefix: &str) -> String {
        self.next_name += 1;
        format!("{prefix}{}", self.next_name)
    }

    fn take(&mut self, open: &mut Vec<String>) -> String {
        let idx = self.below(open.len());
        open.swap_remove(idx)
    }

    /// One random per-particle step on `open`.
    fn step(&mut self, open: &mut Vec<String>) {
        match self.below(6) {
            0 | 1 => {
                let input = self.take(open);
                let (t, r) = (self.path(), self.path());
                let name = self.name("bs");
                self.components.push(Component::BeamSplitter {
                    name,
                    ports: vec![SplitterPort { input, transmit: t.clone(), reflect: r.clone() }],
                });
                open.extend([t, r]);
            }
            2 | 3 if open.len() >= 2 => {
                let a = self.take(open);
                let b = self.take(open);
                let (t, r) = (self.path(), self.path());
                let name = self.name("bs");
                self.components.push(Component::BeamSplitter {
                    name,
                    ports: vec![
                        SplitterPort { input: a, transmit: t.clone(), reflect: r.clone() },
                        SplitterPort { input: b, transmit: r.clone(), reflect: t.clone() },
                    ],
                });
                open.extend([t, r]);
            }
            4 if open.len() >= 2 => {
                let input = self.take(open);
                let name = self.name("blk");
                self.components.push(Component::Blocker { name, input });
            }
            _ => {
                let input = self.take(open);
                let output = self.path();
                let phase = self.below(2) == 1;
                let name = self.name("m");
                self.components.push(Component::Mirror { name, input, output: output.clone(), phase });
                open.push(output);
            }
        }
    }
}

/// A random valid circuit with one to three particles.
pub fn random_circuit(seed: u64) -> CircuitGraph {
    let mut b = Builder { rng: ChaCha8Rng::seed_from_u64(seed), components: Vec::new(), next_path: 0, next_name: 0 };
    let n_particles = 1 + b.below(3);
    let particles: Vec<String> = (0..n_particles).map(|i| format!("q{i}")).collect();

    let mut open: Vec<Vec<String>> = Vec::new();
    for p in &particles {
        let out = b.path();
        b.components.push(Component::Source { particle: p.clone(), out: out.clone() });
        open.push(vec![out]);
    }
    for paths in open.iter_mut() {
        for _ in 0..b.below(5) {
            b.step(paths);
        }
    }

    // At most one region per particle pair, each path touched at most once.
    let mut touched: Vec<String> = Vec::new();
    for i in 0..n_particles {
        for j in i + 1..n_particles {
            if b.below(3) == 0 {
                continue;
            }
            let fresh = |paths: &[String], touched: &[String]| -> Vec<String> {
                paths.iter().filter(|p| !touched.contains(p)).cloned().collect()
            };
            let (ci, cj) = (fresh(&open[i], &touched), fresh(&open[j], &touched));
            if ci.is_empty() || cj.is_empty() {
                continue;
            }
            let path_a = ci[b.below(ci.len())].clone();
            let path_b = cj[b.below(cj.len())].clone();
            let (n, d) = EXACT_P_ANN[b.below(EXACT_P_ANN.len())];
            let name = b.name("x");
            let absorber = b.name("g");
            touched.extend([path_a.clone(), path_b.clone()]);
            b.components.push(Component::Interaction { name, path_a, path_b, p_ann: rat(n, d), absorber });
        }
    }

    for paths in open.iter_mut() {
        for _ in 0..b.below(4) {
            b.step(paths);
        }
    }
    for paths in open {
        for input in paths {
            let name = b.name("D");
            b.components.push(Component::Detector { name, input });
        }
    }
    CircuitGraph::new(particles, b.components)
}
