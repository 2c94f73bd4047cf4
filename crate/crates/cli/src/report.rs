use std::fmt::Write as _;

use chua_sync_core::Certificate;
use serde::Serialize;

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    pub verdict: String,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSummary>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    pub hurwitz: bool,
    pub spectral_abscissa: f64,
    pub min_real_part: f64,
    /// Rightmost eigenvalue as `[re, im]`.
    pub worst_eigenvalue: [f64; 2],
    pub pivot: Option<usize>,
    pub dimension: usize,
    pub margin: f64,
    pub k1: f64,
    pub k2: f64,
}

impl CertificateSummary {
    pub fn new(c: &Certificate, k1: f64, k2: f64) -> Self {
        let w = c.worst_eigenvalue();
        CertificateSummary {
            hurwitz: c.hurwitz,
            spectral_abscissa: c.spectral_abscissa,
            min_real_part: c.min_real_part,
            worst_eigenvalue: [w.re, w.im],
            pivot: c.pivot,
            dimension: c.m.rows(),
            margin: c.margin_tolerance,
            k1,
            k2,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ThresholdSummary {
    pub mu0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_node: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scanned: Option<GainSummary>,
    /// The search ran and found no certified gain up to `k_max`.
    pub scan_exhausted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GainSummary {
    pub gain: f64,
    pub pivot: usize,
    pub resolution: f64,
    pub verified_at_gain: bool,
    pub verified_below: bool,
    pub non_monotone: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub pivot: usize,
    pub samples: usize,
    pub initial_max_error: f64,
    pub final_max_error: f64,
    /// `None` when the fit window is degenerate (e.g. errors at round-off).
    pub fitted_decay_rate: Option<f64>,
    pub fit_window: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingSummary {
    pub name: String,
    pub k1: f64,
    pub k2: f64,
    pub sector_verified: bool,
    pub sector_worst_violation: f64,
    pub sector_samples: usize,
    pub violating_input: Option<f64>,
    pub lemma_residual: f64,
    pub lemma_verified: bool,
    pub lemma_pairs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub parameter: String,
    pub samples: usize,
    pub certified: usize,
    /// Smallest certified sample value, if any.
    pub first_certified: Option<f64>,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "none".to_string(), ToString::to_string)
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k}: {v}");
        };
        line("command", self.command.clone());
        for w in &self.warnings {
            line("warning", w.clone());
        }
        if let Some(c) = &self.certificate {
            line("pivot", opt(&c.pivot));
            line("sector", format!("k1 = {}, k2 = {}", c.k1, c.k2));
            line("matrix dimension", c.dimension.to_string());
            line("spectral abscissa", format!("{:.6}", c.spectral_abscissa));
            line("min real part", format!("{:.6}", c.min_real_part));
            line(
                "rightmost eigenvalue",
                format!(
                    "{:.6} {:+.6}i",
                    c.worst_eigenvalue[0], c.worst_eigenvalue[1]
                ),
            );
            line("hurwitz", c.hurwitz.to_string());
        }
        if let Some(t) = &self.thresholds {
            line("mu0", format!("{:.6}", t.mu0));
            if let Some(k) = t.two_node {
                line("two-node threshold", format!("{k:.3}"));
            }
            if let Some(g) = &t.scanned {
                line(
                    "scanned minimal gain",
                    format!(
                        "{:.6} (pivot {}, resolution {})",
                        g.gain, g.pivot, g.resolution
                    ),
                );
                line("verified at gain", g.verified_at_gain.to_string());
                line("verified below gain", g.verified_below.to_string());
                line("non-monotone", g.non_monotone.to_string());
            }
            if t.scan_exhausted {
                line("scanned minimal gain", "none up to k_max".to_string());
            }
        }
        if let Some(sim) = &self.simulation {
            line("dt", sim.dt.to_string());
            line("t_end", sim.t_end.to_string());
            line("seed", sim.seed.to_string());
            line(
                "initial max error",
                format!("{:.6e}", sim.initial_max_error),
            );
            line("final max error", format!("{:.6e}", sim.final_max_error));
            line(
                "fitted decay rate",
                sim.fitted_decay_rate
                    .map_or("undefined".to_string(), |r| format!("{r:.6}")),
            );
        }
        if let Some(c) = &self.coupling {
            line(
                "coupling",
                format!("{} (k1 = {}, k2 = {})", c.name, c.k1, c.k2),
            );
            line("sector verified", c.sector_verified.to_string());
            line(
                "sector worst violation",
                format!("{:.3e}", c.sector_worst_violation),
            );
            line("violating input", opt(&c.violating_input));
            line("lemma residual", format!("{:.3e}", c.lemma_residual));
            line("lemma verified", c.lemma_verified.to_string());
        }
        if let Some(sc) = &self.scan {
            line("scan parameter", sc.parameter.clone());
            line("scan samples", sc.samples.to_string());
            line("certified samples", sc.certified.to_string());
            line("first certified", opt(&sc.first_certified));
        }
        for f in &self.files {
            line("wrote", f.clone());
        }
        if let Some(e) = &self.error {
            line("error", e.clone());
        }
        line("verdict", self.verdict.clone());
        s
    }
}
