//! Trial summaries and the validated marginals built from them.
//!
//! A trial reports a binary treatment `W` and the shared binary outcome `Z`.
//! Counts are ingested as a 2x2 table indexed `[w][z]`; everything downstream
//! works with the plug-in probabilities and treats them as exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when validating probabilities.
pub const PROB_TOL: f64 = 1e-12;

/// Input encoding of a trial summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialFormat {
    Json,
    Csv,
}

/// 2x2 contingency table of a single trial, `n[w][z]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountTable {
    n: [[u64; 2]; 2],
}

impl CountTable {
    pub fn new(n: [[u64; 2]; 2]) -> Result<Self> {
        for (arm, row) in n.iter().enumerate() {
            if row[0] + row[1] == 0 {
                return Err(Error::EmptyTreatmentArm { arm: arm as u8 });
            }
        }
        Ok(Self { n })
    }

    /// Builds a table from signed counts, rejecting negative cells.
    pub fn from_signed(n: [[i64; 2]; 2]) -> Result<Self> {
        let mut out = [[0u64; 2]; 2];
        for w in 0..2 {
            for z in 0..2 {
                let v = n[w][z];
                if v < 0 {
                    return Err(Error::NegativeCount {
                        cell: format!("n{w}{z}"),
                        value: v,
                    });
                }
                out[w][z] = v as u64;
            }
        }
        Self::new(out)
    }

    pub fn get(&self, w: usize, z: usize) -> u64 {
        self.n[w][z]
    }

    pub fn counts(&self) -> [[u64; 2]; 2] {
        self.n
    }

    pub fn arm_total(&self, w: usize) -> u64 {
        self.n[w][0] + self.n[w][1]
    }

    pub fn total(&self) -> u64 {
        self.arm_total(0) + self.arm_total(1)
    }

    /// JSON encoding in the `n00..n11` layout; names are optional metadata.
    pub fn to_json(&self, treatment: &str, outcome: &str) -> String {
        let doc = TrialSummaryDoc {
            treatment: Some(treatment.to_string()),
            outcome: Some(outcome.to_string()),
            n00: self.n[0][0] as i64,
            n01: self.n[0][1] as i64,
            n10: self.n[1][0] as i64,
            n11: self.n[1][1] as i64,
        };
        serde_json::to_string(&doc).expect("plain struct serializes")
    }

    /// CSV encoding: header `w,z,count` followed by four rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("w,z,count\n");
        for w in 0..2 {
            for z in 0..2 {
                s.push_str(&format!("{w},{z},{}\n", self.n[w][z]));
            }
        }
        s
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrialSummaryDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    treatment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcome: Option<String>,
    n00: i64,
    n01: i64,
    n10: i64,
    n11: i64,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    w: i64,
    z: i64,
    count: i64,
}

/// Decodes a trial summary from its JSON or CSV encoding.
pub fn parse_trial_summary(payload: &[u8], format: TrialFormat) -> Result<CountTable> {
    match format {
        TrialFormat::Json => {
            let doc: TrialSummaryDoc =
                serde_json::from_slice(payload).map_err(|e| Error::Malformed(e.to_string()))?;
            CountTable::from_signed([[doc.n00, doc.n01], [doc.n10, doc.n11]])
        }
        TrialFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(payload);
            let headers = reader
                .headers()
                .map_err(|e| Error::Malformed(e.to_string()))?
                .clone();
            if headers.iter().collect::<Vec<_>>() != ["w", "z", "count"] {
                return Err(Error::Malformed(format!(
                    "expected header \"w,z,count\", found {:?}",
                    headers.iter().collect::<Vec<_>>().join(",")
                )));
            }
            let mut cells: [[Option<i64>; 2]; 2] = [[None; 2]; 2];
            for row in reader.deserialize::<CsvRow>() {
                let row = row.map_err(|e| Error::Malformed(e.to_string()))?;
                if !(0..=1).contains(&row.w) || !(0..=1).contains(&row.z) {
                    return Err(Error::Malformed(format!(
                        "cell index ({}, {}) is not binary",
                        row.w, row.z
                    )));
                }
                let slot = &mut cells[row.w as usize][row.z as usize];
                if slot.is_some() {
                    return Err(Error::Malformed(format!(
                        "duplicate cell ({}, {})",
                        row.w, row.z
                    )));
                }
                *slot = Some(row.count);
            }
            let mut n = [[0i64; 2]; 2];
            for w in 0..2 {
                for z in 0..2 {
                    n[w][z] = cells[w][z]
                        .ok_or_else(|| Error::Malformed(format!("missing cell ({w}, {z})")))?;
                }
            }
            CountTable::from_signed(n)
        }
    }
}

/// Joint law of one binary treatment `W` and the binary outcome `Z`, stored as
/// `P(Z=0 | W=0)`, `P(Z=0 | W=1)` and `P(W=0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryMarginal {
    p_z0_w0: f64,
    p_z0_w1: f64,
    p_w0: f64,
}

impl BinaryMarginal {
    pub fn new(p_z0_w0: f64, p_z0_w1: f64, p_w0: f64) -> Result<Self> {
        let m = Self {
            p_z0_w0,
            p_z0_w1,
            p_w0,
        };
        validate_marginal(&m)?;
        Ok(Self {
            p_z0_w0: p_z0_w0.clamp(0.0, 1.0),
            p_z0_w1: p_z0_w1.clamp(0.0, 1.0),
            p_w0,
        })
    }

    /// `P(Z=0 | W=0)`, written p00 throughout.
    pub fn p00(&self) -> f64 {
        self.p_z0_w0
    }

    /// `P(Z=0 | W=1)`, written p01 throughout.
    pub fn p01(&self) -> f64 {
        self.p_z0_w1
    }

    pub fn p_w0(&self) -> f64 {
        self.p_w0
    }

    pub fn p_w1(&self) -> f64 {
        1.0 - self.p_w0
    }

    /// Outcome marginal `P(Z=0)`.
    pub fn p_z0(&self) -> f64 {
        self.p_w0 * self.p_z0_w0 + (1.0 - self.p_w0) * self.p_z0_w1
    }

    /// Joint table `P(W=w, Z=z)` indexed `[w][z]`.
    pub fn joint(&self) -> [[f64; 2]; 2] {
        let p_w1 = self.p_w1();
        [
            [self.p_w0 * self.p_z0_w0, self.p_w0 * (1.0 - self.p_z0_w0)],
            [p_w1 * self.p_z0_w1, p_w1 * (1.0 - self.p_z0_w1)],
        ]
    }
}

/// Checks every `BinaryMarginal` invariant.
pub fn validate_marginal(m: &BinaryMarginal) -> Result<()> {
    for (field, value) in [
        ("p_z0_w0", m.p_z0_w0),
        ("p_z0_w1", m.p_z0_w1),
        ("p_w0", m.p_w0),
    ] {
        if !value.is_finite() || !(-PROB_TOL..=1.0 + PROB_TOL).contains(&value) {
            return Err(Error::OutOfRange { field, value });
        }
    }
    if m.p_w0 <= PROB_TOL || m.p_w0 >= 1.0 - PROB_TOL {
        return Err(Error::DegenerateTreatmentMarginal(m.p_w0));
    }
    Ok(())
}

/// Maximum-likelihood plug-in marginal.
pub fn marginal_from_counts(t: &CountTable) -> BinaryMarginal {
    let arm0 = t.arm_total(0) as f64;
    let arm1 = t.arm_total(1) as f64;
    BinaryMarginal {
        p_z0_w0: t.get(0, 0) as f64 / arm0,
        p_z0_w1: t.get(1, 0) as f64 / arm1,
        p_w0: arm0 / (arm0 + arm1),
    }
}

/// Trivariate distribution `P(X=x, Y=y, Z=z)` indexed `[x][y][z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrivariateTable {
    p: [[[f64; 2]; 2]; 2],
}

impl TrivariateTable {
    pub fn new(p: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        let mut sum = 0.0;
        for v in p.iter().flatten().flatten() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidTable(format!("entry {v} is negative")));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidTable(format!("entries sum to {sum}")));
        }
        Ok(Self { p })
    }

    /// Parses `{"p": [[[p000,p001],[p010,p011]],[[p100,p101],[p110,p111]]]}`.
    pub fn from_json(payload: &[u8]) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            p: [[[f64; 2]; 2]; 2],
        }
        let doc: Doc =
            serde_json::from_slice(payload).map_err(|e| Error::InvalidTable(e.to_string()))?;
        Self::new(doc.p)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.p[x][y][z]
    }

    pub fn cells(&self) -> [[[f64; 2]; 2]; 2] {
        self.p
    }
}
