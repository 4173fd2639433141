//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::{Complex, Complex64};
use num_rational::Rational64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tisim::amplitude::Amplitude;
use tisim::circuit::{builtin, parse, random_circuit, render, BUILTIN_NAMES};
use tisim::propagate::{evolve, propagate, state_at_cut};
use tisim::state::{BasisLabel, Slot};
use tisim::transact::build_mixture;
use tisim::{ExactAmp, ExactReal, TransactionSet};
use tisim_cli::{Report, Trace};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn cli(args: &str) -> Result<(String, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_tisim"))
        .args(args.split_whitespace())
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(format!("`tisim {args}` exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok((String::from_utf8(out.stdout).map_err(|e| e.to_string())?, elapsed))
}

fn report(args: &str) -> Result<(Report, Duration), String> {
    let (text, t) = cli(&format!("{args} --format json"))?;
    Ok((serde_json::from_str(&text).map_err(|e| e.to_string())?, t))
}

fn row_weight<'a>(r: &'a Report, label: &str) -> Result<&'a str, String> {
    r.outcomes
        .iter()
        .find(|o| o.label == label)
        .map(|o| o.weight_exact.as_str())
        .ok_or_else(|| format!("no row {label}"))
}

fn mixture(name: &str) -> Result<TransactionSet<ExactAmp>, String> {
    let g = builtin(name).map_err(|e| e.to_string())?;
    build_mixture(&propagate::<ExactAmp>(&g).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn weight(ts: &TransactionSet<ExactAmp>, label: &BasisLabel) -> ExactReal {
    ts.get(label).map_or_else(ExactReal::zero, |t| t.weight.clone())
}

fn ann() -> BasisLabel {
    BasisLabel::new(vec![Slot::Joint("gamma".into()), Slot::Joint("gamma".into())])
}

fn pair(a: &str, b: &str) -> BasisLabel {
    BasisLabel::absorbed(&[a, b])
}

// Gaussian-rational oracle over the two-particle (v,w) ⊗ (v,w) basis.

type G = Complex<Rational64>;

fn g(re: (i64, i64), im: (i64, i64)) -> G {
    Complex::new(Rational64::new(re.0, re.1), Rational64::new(im.0, im.1))
}

/// Second splitter scaled by √2, rows (c, d), columns (v, w).
fn second_splitter() -> [[G; 2]; 2] {
    [[g((0, 1), (1, 1)), g((1, 1), (0, 1))], [g((1, 1), (0, 1)), g((0, 1), (1, 1))]]
}

/// Contribution of basis term `k` with coefficient `coef` to outcome (a, b).
fn contribution(coef: G, k: usize, a: usize, b: usize) -> G {
    let m = second_splitter();
    m[a][k / 2] * m[b][k % 2] * coef * g((1, 2), (0, 1))
}

/// Outcome amplitudes when the |w+,w-⟩ term annihilates.
fn oracle() -> ([[G; 2]; 2], G) {
    let psi = [g((1, 2), (0, 1)), g((0, 1), (1, 2)), g((0, 1), (1, 2)), g((-1, 2), (0, 1))];
    let mut out = [[g((0, 1), (0, 1)); 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            for (k, coef) in psi.iter().enumerate().take(3) {
                *cell += contribution(*coef, k, a, b);
            }
        }
    }
    (out, psi[3])
}

fn exact(z: G) -> ExactAmp {
    ExactAmp::new(ExactReal::ratio(*z.re.numer(), *z.re.denom()), ExactReal::ratio(*z.im.numer(), *z.im.denom()))
}

fn criterion_1() -> Check {
    let (r, _) = report("exact --builtin hardy")?;
    ensure(row_weight(&r, "(D+,D-)")? == "1/16", "CLI (D+,D-) weight is not 1/16")?;
    ensure(weight(&mixture("hardy")?, &pair("D+", "D-")) == ExactReal::ratio(1, 16), "exact weight differs")?;
    Ok("(D+,D-) weight = 1/16".into())
}

fn criterion_2() -> Check {
    let (r, _) = report("exact --builtin hardy")?;
    ensure(row_weight(&r, "ANN@gamma")? == "1/4", "CLI ANN weight is not 1/4")?;
    ensure(weight(&mixture("hardy")?, &ann()) == ExactReal::ratio(1, 4), "exact weight differs")?;
    Ok("ANN weight = 1/4".into())
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let ts = mixture("hardy")?;
    let expected = [
        (ann(), ExactReal::ratio(1, 4)),
        (pair("C+", "C-"), ExactReal::ratio(9, 16)),
        (pair("C+", "D-"), ExactReal::ratio(1, 16)),
        (pair("D+", "C-"), ExactReal::ratio(1, 16)),
        (pair("D+", "D-"), ExactReal::ratio(1, 16)),
    ];
    ensure(ts.len() == expected.len(), format!("{} outcomes", ts.len()))?;
    for (label, w) in &expected {
        ensure(&weight(&ts, label) == w, format!("{label}: {}", weight(&ts, label)))?;
    }
    let total = ts.transactions().iter().fold(ExactReal::zero(), |acc, t| &acc + &t.weight);
    ensure(total == ExactReal::one(), format!("sum {total}"))?;

    let (amps, ann_amp) = oracle();
    let names = ["C", "D"];
    for (a, row) in amps.iter().enumerate() {
        for (b, amp) in row.iter().enumerate() {
            let label = pair(&format!("{}+", names[a]), &format!("{}-", names[b]));
            let t = ts.get(&label).ok_or_else(|| format!("missing {label}"))?;
            ensure(t.ow_amp == exact(*amp), format!("{label}: engine {} vs oracle {}", t.ow_amp, exact(*amp)))?;
        }
    }
    ensure(ts.get(&ann()).map(|t| t.ow_amp.clone()) == Some(exact(ann_amp)), "ANN amplitude differs from oracle")?;

    let (_, cli_time) = report("exact --builtin hardy")?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("five weights exact, sum 1, oracle agrees ({:.0?} engine+oracle, {cli_time:.0?} CLI)", elapsed))
}

fn criterion_4() -> Check {
    let (text, _) = cli("trace --builtin hardy --format json")?;
    let t: Trace = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let dd = t.transactions.iter().find(|r| r.label == "(D+,D-)").ok_or("no (D+,D-) row")?;
    ensure(dd.ow == ExactAmp::ratio(-1, 4).to_string(), format!("ow {}", dd.ow))?;
    let cut = t.cuts.iter().find(|c| c.name == "after_first_splitters").ok_or("no after_first_splitters cut")?;
    let half = ExactAmp::ratio(1, 2);
    let i_half = &ExactAmp::i() * &half;
    let want = [
        ("|v+,v-⟩", half.clone()),
        ("|v+,w-⟩", i_half.clone()),
        ("|w+,v-⟩", i_half),
        ("|w+,w-⟩", -half),
    ];
    ensure(cut.terms.len() == 4, format!("{} terms", cut.terms.len()))?;
    for ((ket, amp), term) in want.iter().zip(&cut.terms) {
        ensure(term.ket == *ket && term.amplitude == amp.to_string(), format!("{} {}", term.ket, term.amplitude))?;
    }
    let s = state_at_cut::<ExactAmp>(&builtin("hardy").unwrap(), "after_first_splitters").map_err(|e| e.to_string())?;
    for ((ket, amp), (label, a)) in want.iter().zip(s.terms()) {
        ensure(a == amp, format!("{ket}: {a} at {label}"))?;
    }
    Ok("(D+,D-) ow = -1/4; cut = 1/2, i/2, i/2, -1/2".into())
}

fn criterion_5() -> Check {
    let f = propagate::<ExactAmp>(&builtin("mzi_open").unwrap()).map_err(|e| e.to_string())?;
    ensure(f.state.amplitude_of(&BasisLabel::absorbed(&["C"])) == ExactAmp::i(), "C amplitude is not i")?;
    ensure(f.state.amplitude_of(&BasisLabel::absorbed(&["D"])).norm_sqr().is_zero(), "D weight nonzero")?;
    Ok("amplitude i at C, D weight 0".into())
}

fn criterion_6() -> Check {
    let photon = builtin("photon_pair").unwrap();
    let f = propagate::<ExactAmp>(&photon).map_err(|e| e.to_string())?;
    ensure(f.state.amplitude_of(&pair("C+", "C-")) == ExactAmp::ratio(-1, 1), "(C+,C-) amplitude is not -1")?;
    ensure(f.state.amplitude_of(&pair("D+", "D-")).is_zero(), "(D+,D-) amplitude nonzero")?;
    // Each of the four split terms reaches (D+,D-); their sum must vanish.
    let cut = state_at_cut::<ExactAmp>(&photon, "after_first_splitters").map_err(|e| e.to_string())?;
    let coefs: Vec<ExactAmp> = cut.terms().map(|(_, a)| a.clone()).collect();
    ensure(coefs.len() == 4, "cut does not have four terms")?;
    let mut sum = ExactAmp::zero();
    let mut parts = Vec::new();
    for (k, c) in coefs.iter().enumerate() {
        let term = &exact(contribution(g((1, 1), (0, 1)), k, 1, 1)) * c;
        ensure(!term.is_zero(), format!("term {k} contributes nothing"))?;
        parts.push(term.to_string());
        sum = &sum + &term;
    }
    ensure(sum.is_zero(), format!("contributions sum to {sum}"))?;
    Ok(format!("(C+,C-) = -1; (D+,D-) contributions {} cancel", parts.join(", ")))
}

fn criterion_7() -> Check {
    let (r, _) = report("exact --builtin mzi_blocked")?;
    for (label, w) in [("(blocked)", "1/2"), ("(C)", "1/4"), ("(D)", "1/4")] {
        ensure(row_weight(&r, label)? == w, format!("{label} weight {}", row_weight(&r, label)?))?;
    }
    let ts = mixture("mzi_blocked")?;
    ensure(weight(&ts, &BasisLabel::absorbed(&["blocked"])) == ExactReal::ratio(1, 2), "blocked weight")?;
    ensure(weight(&ts, &BasisLabel::absorbed(&["D"])) == ExactReal::ratio(1, 4), "D weight")?;
    ensure(weight(&mixture("mzi_open")?, &BasisLabel::absorbed(&["D"])).is_zero(), "unblocked D weight nonzero")?;
    Ok("blocked 1/2, C 1/4, D 1/4; unblocked D 0".into())
}

fn criterion_8() -> Check {
    let args = "run --builtin hardy --trials 1000000 --seed 42";
    let (first, t1) = report(args)?;
    ensure(t1 < Duration::from_secs(60), format!("took {t1:?}"))?;
    let mut worst: f64 = 0.0;
    for o in &first.outcomes {
        let z = o.z.ok_or("missing z")?;
        ensure(z.abs() < 5.0, format!("{} z = {z}", o.label))?;
        worst = worst.max(z.abs());
    }
    let dd = first.outcomes.iter().find(|o| o.label == "(D+,D-)").and_then(|o| o.freq).ok_or("no (D+,D-)")?;
    ensure((dd - 0.0625).abs() <= 0.0012, format!("(D+,D-) freq {dd}"))?;
    let (second, _) = report(args)?;
    let counts = |r: &Report| r.outcomes.iter().map(|o| (o.label.clone(), o.count)).collect::<Vec<_>>();
    ensure(counts(&first) == counts(&second), "rerun counts differ")?;
    Ok(format!("{t1:.2?}, max |z| = {worst:.3}, (D+,D-) freq {dd}, rerun identical"))
}

fn random_amp(rng: &mut ChaCha8Rng) -> ExactAmp {
    let mut r = || {
        let n = (rng.next_u64() % 81) as i64 - 40;
        let d = (rng.next_u64() % 24) as i64 + 1;
        (n, d)
    };
    let mut real = || {
        let (a, b) = r();
        let (c, d) = r();
        &ExactReal::ratio(a, b) + &ExactReal::sqrt2_times(c, d)
    };
    ExactAmp::new(real(), real())
}

fn criterion_9() -> Check {
    // (a)
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 0..10_000 {
        let (x, y, z) = (random_amp(&mut rng), random_amp(&mut rng), random_amp(&mut rng));
        let ok = &x + &y == &y + &x
            && &x * &y == &y * &x
            && &(&x * &y) * &z == &x * &(&y * &z)
            && &(&x + &y) + &z == &x + &(&y + &z)
            && &x * &(&y + &z) == &(&x * &y) + &(&x * &z)
            && (&x * &y).norm_sqr() == &x.norm_sqr() * &y.norm_sqr()
            && x.conj().conj() == x;
        ensure(ok, format!("(a) operand set {n}: {x}, {y}, {z}"))?;
    }
    // (b)
    let graphs: Vec<(String, tisim::CircuitGraph)> = BUILTIN_NAMES
        .iter()
        .map(|n| (n.to_string(), builtin(n).unwrap()))
        .chain((0..100).map(|s| (format!("random {s}"), random_circuit(s))))
        .collect();
    for (name, gr) in &graphs {
        let mut bad = None;
        evolve::<ExactAmp>(gr, |step, s| {
            if s.total_weight() != ExactReal::one() && bad.is_none() {
                bad = Some(step.to_string());
            }
        })
        .map_err(|e| format!("(b) {name}: {e}"))?;
        ensure(bad.is_none(), format!("(b) {name} after {bad:?}"))?;
    }
    // (c)
    for name in BUILTIN_NAMES {
        let gr = builtin(name).unwrap();
        let e = propagate::<ExactAmp>(&gr).map_err(|e| e.to_string())?;
        let f = propagate::<Complex64>(&gr).map_err(|e| e.to_string())?;
        ensure(e.state.len() == f.state.len(), format!("(c) {name} term counts differ"))?;
        for (label, a) in e.state.terms() {
            let d = (a.to_complex() - f.state.amplitude_of(label)).norm();
            ensure(d < 1e-12, format!("(c) {name} {label}: {d}"))?;
        }
    }
    // (d)
    let t = ExactAmp::frac_1_sqrt2();
    let r = &ExactAmp::i() * &t;
    let u = [[t.clone(), r.clone()], [r, t]];
    for i in 0..2 {
        for j in 0..2 {
            let entry = (0..2).fold(ExactAmp::zero(), |acc, k| &acc + &(&u[k][i].conj() * &u[k][j]));
            let want = if i == j { ExactAmp::one() } else { ExactAmp::zero() };
            ensure(entry == want, format!("(d) U†U[{i}][{j}] = {entry}"))?;
        }
    }
    // (e)
    for (name, gr) in &graphs {
        ensure(parse(&render(gr)).as_ref() == Ok(gr), format!("(e) {name} does not round-trip"))?;
    }
    Ok(format!("(a) 10^4 operand sets, (b)+(e) {} circuits, (c) 4 built-ins, (d) exact", graphs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("Hardy headline weight", criterion_1),
        ("annihilation weight", criterion_2),
        ("full Hardy distribution", criterion_3),
        ("amplitude-level trace", criterion_4),
        ("unobstructed MZI", criterion_5),
        ("photon variant", criterion_6),
        ("blocked MZI", criterion_7),
        ("Monte Carlo soundness", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
