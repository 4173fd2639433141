//! The stock scenarios, written in the circuit DSL.
//!
//! Mirrors are declared `phase off` so the arm amplitudes are exactly the
//! splitter factors: with phase on, both arms of each interferometer pick up
//! the same extra factor and only a global phase changes.

use super::{parse, CircuitGraph, UnknownBuiltin};

pub const BUILTIN_NAMES: [&str; 4] = ["hardy", "mzi_open", "mzi_blocked", "photon_pair"];

const MZI_OPEN: &str = "\
# Balanced Mach-Zehnder interferometer: every quantum exits toward C.
particle q
source q -> s
beamsplitter bs1 in s (transmit v, reflect w)
mirror m_v v -> v' phase off
mirror m_w w -> w' phase off
beamsplitter bs2 in v' (transmit d, reflect c) in w' (transmit c, reflect d)
detector C in c
detector D in d
";

const MZI_BLOCKED: &str = "\
# The same interferometer with an absorber in arm w; D can now fire.
particle q
source q -> s
beamsplitter bs1 in s (transmit v, reflect w)
mirror m_v v -> v' phase off
blocker blocked in w
beamsplitter bs2 in v' (transmit d, reflect c)
detector C in c
detector D in d
";

/// Two interferometers whose `w` arms overlap in an annihilation region.
fn overlapping_pair(plus: &str, minus: &str, p_ann: &str) -> String {
    format!(
        "\
# Overlapping interferometers for particles {plus} and {minus}.
particle {plus}
particle {minus}
source {plus} -> s+
source {minus} -> s-
beamsplitter bs1+ in s+ (transmit v+, reflect w+)
beamsplitter bs1- in s- (transmit v-, reflect w-)
interact overlap w+ w- p_ann {p_ann} -> gamma
mirror m_v+ v+ -> v+' phase off
mirror m_w+ w+ -> w+' phase off
mirror m_v- v- -> v-' phase off
mirror m_w- w- -> w-' phase off
beamsplitter bs2+ in v+' (transmit d+, reflect c+) in w+' (transmit c+, reflect d+)
beamsplitter bs2- in v-' (transmit d-, reflect c-) in w-' (transmit c-, reflect d-)
detector C+ in c+
detector D+ in d+
detector C- in c-
detector D- in d-
"
    )
}

/// DSL source of a built-in scenario.
pub fn builtin_text(name: &str) -> Result<String, UnknownBuiltin> {
    match name {
        "hardy" => Ok(overlapping_pair("e+", "e-", "1")),
        "photon_pair" => Ok(overlapping_pair("ph+", "ph-", "0")),
        "mzi_open" => Ok(MZI_OPEN.to_string()),
        "mzi_blocked" => Ok(MZI_BLOCKED.to_string()),
        other => Err(UnknownBuiltin(other.to_string())),
    }
}

pub fn builtin(name: &str) -> Result<CircuitGraph, UnknownBuiltin> {
    let text = builtin_text(name)?;
    Ok(parse(&text).expect("built-in circuits parse"))
}
