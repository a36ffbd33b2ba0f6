//! Entropy reports: per-depth rows, headline estimate, provenance, and the
//! CSV/JSON emission used by the batch front end.

use serde::{Deserialize, Serialize};

use crate::search::TraceEntry;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub k: usize,
    /// Entropy of the depth-k refinement.
    pub h: f64,
    /// Increment `H(k) - H(k-1)`; at k = 0 the increment from the empty
    /// (zero-entropy) refinement.
    pub dh: f64,
    /// `H(k) / (k + 1)`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    /// Which pipeline produced the report.
    pub pipeline: String,
    /// Short description of the system.
    pub system: String,
    /// Description of the argmax partition/family/measure when a search ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmax: Option<String>,
    /// Echo of the search spec, including the RNG algorithm name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<crate::search::SearchSpec>,
    /// Per-candidate (id, score) trace of the search.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
    /// Conventions the numbers depend on (iteration direction, headline rule).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conventions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub rows: Vec<EntropyRow>,
    /// The last increment: the conditional-entropy extrapolation of the
    /// invariant. This is the headline value.
    pub headline: f64,
    /// The unnormalized entropy at the deepest refinement, reported alongside
    /// the increment because the two readings differ for positive-entropy
    /// systems.
    pub raw_limit: f64,
    /// Set when a complexity budget cut the sequence short of `k_max`.
    pub truncated: bool,
    pub provenance: Provenance,
    pub wall_time_ms: f64,
    pub tool_version: String,
}

impl EntropyReport {
    /// Builds rows, increments, rates and the headline from a raw entropy
    /// sequence `H(0..=k)`.
    pub fn from_sequence(hs: &[f64], provenance: Provenance, truncated: bool) -> Self {
        let mut rows = Vec::with_capacity(hs.len());
        let mut prev = 0.0;
        for (k, &h) in hs.iter().enumerate() {
            rows.push(EntropyRow {
                k,
                h,
                dh: h - prev,
                rate: h / (k + 1) as f64,
            });
            prev = h;
        }
        let headline = rows.last().map(|r| r.dh).unwrap_or(0.0);
        let raw_limit = rows.last().map(|r| r.h).unwrap_or(0.0);
        Self {
            rows,
            headline,
            raw_limit,
            truncated,
            provenance,
            wall_time_ms: 0.0,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn k_max(&self) -> usize {
        self.rows.last().map(|r| r.k).unwrap_or(0)
    }

    /// CSV rendering with fixed columns and fixed float formatting
    /// (12 significant digits), bit-stable across repeated runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,H,dH,rate\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.k,
                format_sig12(row.h),
                format_sig12(row.dh),
                format_sig12(row.rate)
            ));
        }
        out
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Plain-text table for stdout.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>4}  {:>18}  {:>18}  {:>18}\n",
            "k", "H", "dH", "rate"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:>4}  {:>18.12}  {:>18.12}  {:>18.12}\n",
                row.k, row.h, row.dh, row.rate
            ));
        }
        out.push_str(&format!(
            "headline (increment estimate): {:.12}\n",
            self.headline
        ));
        out.push_str(&format!("raw limit at k_max:            {:.12}\n", self.raw_limit));
        if self.truncated {
            out.push_str("WARNING: sequence truncated by complexity budget\n");
        }
        out
    }
}

/// 12 significant digits, scientific notation, '.' decimal separator.
/// Negative zero is normalized so that equal values format identically.
pub fn format_sig12(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.11e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_headline() {
        let r = EntropyReport::from_sequence(&[0.7, 1.4, 2.0], Provenance::default(), false);
        assert_eq!(r.rows.len(), 3);
        assert!((r.rows[1].dh - 0.7).abs() < 1e-15);
        assert!((r.headline - 0.6).abs() < 1e-15);
        assert!((r.raw_limit - 2.0).abs() < 1e-15);
        assert!((r.rows[2].rate - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn csv_shape_and_stability() {
        let r = EntropyReport::from_sequence(&[0.5, 1.0], Provenance::default(), false);
        let csv = r.to_csv();
        assert!(csv.starts_with("k,H,dH,rate\n"));
        assert_eq!(csv, r.to_csv());
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn json_round_trip_exact() {
        let mut r = EntropyReport::from_sequence(
            &[std::f64::consts::LN_2, 2.0 * std::f64::consts::LN_2],
            Provenance {
                pipeline: "classical".into(),
                system: "test".into(),
                ..Default::default()
            },
            false,
        );
        r.wall_time_ms = 12.25;
        let json = r.to_json_pretty();
        let back: EntropyReport = serde_json::from_str(&json).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn format_sig12_is_stable() {
        assert_eq!(format_sig12(0.0), "0.00000000000e0");
        assert_eq!(format_sig12(-0.0), "0.00000000000e0");
        assert_eq!(
            format_sig12(std::f64::consts::LN_2),
            format_sig12(std::f64::consts::LN_2)
        );
    }
}
