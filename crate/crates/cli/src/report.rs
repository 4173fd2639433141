//! Report model and its table, JSON and CSV renderings.

use serde::{Deserialize, Serialize};

/// Outcome report shared by `exact` and `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub circuit: String,
    pub engine: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    pub outcomes: Vec<OutcomeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub label: String,
    pub weight_exact: String,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

/// Transaction trace: per-outcome amplitudes plus the state at each cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub circuit: String,
    pub engine: String,
    pub transactions: Vec<TraceRow>,
    pub cuts: Vec<Cut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub label: String,
    pub ow: String,
    pub cw: String,
    pub weight_exact: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub name: String,
    pub terms: Vec<CutTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutTerm {
    pub ket: String,
    pub amplitude: String,
}

/// Left-aligned columns separated by two spaces.
fn columns(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

impl Report {
    pub fn table(&self) -> String {
        let mut out = format!("circuit: {}  engine: {}\n", self.circuit, self.engine);
        if let (Some(trials), Some(seed)) = (self.trials, self.seed) {
            out += &format!("trials: {trials}  seed: {seed}  rng: {}\n", self.rng.as_deref().unwrap_or("-"));
        }
        let sampled = self.trials.is_some();
        let header: &[&str] =
            if sampled { &["outcome", "weight_exact", "weight", "count", "freq", "z"] } else { &["outcome", "weight_exact", "weight"] };
        let rows: Vec<Vec<String>> = self
            .outcomes
            .iter()
            .map(|r| {
                let mut row = vec![r.label.clone(), r.weight_exact.clone(), format!("{:.6}", r.weight)];
                if sampled {
                    row.push(r.count.map_or_else(String::new, |c| c.to_string()));
                    row.push(r.freq.map_or_else(String::new, |f| format!("{f:.6}")));
                    row.push(r.z.map_or_else(String::new, |z| format!("{z:+.3}")));
                }
                row
            })
            .collect();
        out + &columns(header, &rows)
    }

    pub fn json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self).map(|s| s + "\n")
    }

    pub fn csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["label", "weight_exact", "weight", "count", "freq", "z"])?;
        for r in &self.outcomes {
            let opt = |v: Option<String>| v.unwrap_or_default();
            w.write_record([
                r.label.clone(),
                r.weight_exact.clone(),
                r.weight.to_string(),
                opt(r.count.map(|c| c.to_string())),
                opt(r.freq.map(|f| f.to_string())),
                opt(r.z.map(|z| z.to_string())),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

impl Trace {
    pub fn table(&self) -> String {
        let mut out = format!("circuit: {}  engine: {}\n", self.circuit, self.engine);
        let rows: Vec<Vec<String>> = self
            .transactions
            .iter()
            .map(|t| vec![t.label.clone(), t.ow.clone(), t.cw.clone(), t.weight_exact.clone()])
            .collect();
        out += &columns(&["outcome", "ow", "cw", "weight"], &rows);
        for cut in &self.cuts {
            out += &format!("\ncut {}:\n", cut.name);
            let rows: Vec<Vec<String>> =
                cut.terms.iter().map(|t| vec![String::new(), t.ket.clone(), t.amplitude.clone()]).collect();
            // The header row is blank; drop it.
            let body = columns(&["", "", ""], &rows);
            out += body.split_once('\n').map_or("", |(_, rest)| rest);
        }
        out
    }

    pub fn json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self).map(|s| s + "\n")
    }

    pub fn csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &self.transactions {
            w.serialize(t)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
