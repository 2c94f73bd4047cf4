use std::path::Path;

use chua_sync_core::certificate::{self, best_pivot, certify, min_linear_gain, two_node_threshold};
use chua_sync_core::coupling::{self, check_lemma1, verify_sector};
use chua_sync_core::simulate::{error_series, fit_decay_rate, simulate_network};
use chua_sync_core::{Certificate, Error as CoreError, GainSearch};
use rayon::prelude::*;

use crate::config::{ScanParameter, Scenario};
use crate::error::{exit, CliError, CliResult};
use crate::output::{self, ScanRow};
use crate::report::{
    CertificateSummary, CouplingSummary, GainSummary, RunReport, ScanSummary, SimulationSummary,
    ThresholdSummary,
};

pub struct OutputOptions<'a> {
    pub dir: &'a Path,
    pub svg: bool,
}

fn certificate_for(s: &Scenario, k1: f64, k2: f64) -> CliResult<Certificate> {
    let margin = s.tolerances.margin;
    Ok(match s.pivot {
        Some(pivot) => certify(&s.params, &s.topology, pivot, k1, k2, margin)?,
        None => best_pivot(&s.params, &s.topology, k1, k2, margin)?,
    })
}

fn finish(report: &mut RunReport, ok: bool, yes: &str, no: &str) {
    report.exit_code = if ok { exit::SUCCESS } else { exit::UNCERTIFIED };
    report.verdict = if ok { yes } else { no }.to_string();
}

pub fn check(s: &Scenario) -> CliResult<RunReport> {
    let mut report = RunReport::new("check");
    report.warnings = s.warnings.clone();
    let (k1, k2) = (s.coupling.k1(), s.coupling.k2());
    let cert = certificate_for(s, k1, k2)?;
    report.certificate = Some(CertificateSummary::new(&cert, k1, k2));
    finish(&mut report, cert.hurwitz, "certified", "not certified");
    Ok(report)
}

pub fn simulate(s: &Scenario, out: &OutputOptions) -> CliResult<RunReport> {
    let mut report = RunReport::new("simulate");
    report.warnings = s.warnings.clone();
    let settings = s.sim_settings()?;
    let pivot = s.pivot.unwrap_or(0);
    let traj = simulate_network(
        &s.params,
        &s.topology,
        &s.coupling,
        &settings.initial,
        settings.dt,
        settings.t_end,
        settings.sample_every,
    )?;
    let es = if s.topology.len() > 1 {
        Some(error_series(&traj, pivot)?)
    } else {
        None
    };

    output::ensure_dir(out.dir)?;
    let mut files = Vec::new();
    let path = out.dir.join("trajectory.csv");
    output::write_trajectory(&path, &traj)?;
    files.push(path);
    if let Some(es) = &es {
        let path = out.dir.join("errors.csv");
        output::write_errors(&path, es)?;
        files.push(path);
        if out.svg {
            let path = out.dir.join("errors.svg");
            output::write_text(&path, &output::error_svg(es))?;
            files.push(path);
        }
    }

    let (initial_max_error, final_max_error, fitted_decay_rate) = match &es {
        Some(es) => {
            let rate = match fit_decay_rate(es, settings.fit_window) {
                Ok(r) => Some(r),
                Err(CoreError::DegenerateWindow) => None,
                Err(e) => return Err(e.into()),
            };
            (es.max_norm_at(0), es.final_max_norm(), rate)
        }
        None => (0.0, 0.0, None),
    };
    report.simulation = Some(SimulationSummary {
        dt: settings.dt,
        t_end: settings.t_end,
        seed: settings.seed,
        pivot,
        samples: traj.len(),
        initial_max_error,
        final_max_error,
        fitted_decay_rate,
        fit_window: [settings.fit_window.0, settings.fit_window.1],
    });
    report.verdict = "completed".to_string();
    write_report(&mut report, out.dir, files)?;
    Ok(report)
}

pub fn threshold(s: &Scenario) -> CliResult<RunReport> {
    let mut report = RunReport::new("threshold");
    report.warnings = s.warnings.clone();
    let n = s.topology.len();
    if n < 2 {
        return Err(CliError::validation(format!(
            "threshold needs at least 2 nodes, got {n}"
        )));
    }
    let mut summary = ThresholdSummary {
        mu0: s.params.mu0()?,
        ..Default::default()
    };
    if n == 2 {
        summary.two_node = Some(two_node_threshold(&s.params)?);
    }
    if n > 2 || s.threshold.scan {
        let pivots: Vec<usize> = match s.pivot {
            Some(p) => vec![p],
            None => (0..n).collect(),
        };
        let cfg = &s.threshold;
        let searches = pivots
            .par_iter()
            .map(|&p| {
                min_linear_gain(
                    &s.params,
                    &s.topology,
                    p,
                    cfg.k_max,
                    cfg.resolution,
                    s.tolerances.margin,
                )
                .map(|r| r.map(|g| (p, g)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let best: Option<(usize, GainSearch)> =
            searches
                .into_iter()
                .flatten()
                .reduce(|a, b| if b.1.gain < a.1.gain { b } else { a });
        match best {
            Some((pivot, g)) => {
                summary.scanned = Some(GainSummary {
                    gain: g.gain,
                    pivot,
                    resolution: cfg.resolution,
                    verified_at_gain: g.verified_at_gain,
                    verified_below: g.verified_below,
                    non_monotone: g.non_monotone,
                    evaluations: g.evaluations,
                })
            }
            None => summary.scan_exhausted = true,
        }
    }
    let ok = summary.two_node.is_some() || summary.scanned.is_some();
    report.thresholds = Some(summary);
    finish(&mut report, ok, "threshold found", "no certified gain");
    Ok(report)
}

pub fn verify_coupling(s: &Scenario) -> CliResult<RunReport> {
    let mut report = RunReport::new("verify-coupling");
    let t = &s.tolerances;
    let c = &s.coupling;
    let sector = verify_sector(c, t.sector_range, t.sector_samples, t.sector_tolerance)?;
    let lemma = check_lemma1(c, t.lemma_pairs, t.sector_range)?;
    let lemma_verified = lemma <= t.lemma_tolerance;
    report.coupling = Some(CouplingSummary {
        name: c.name().to_string(),
        k1: c.k1(),
        k2: c.k2(),
        sector_verified: sector.verified,
        sector_worst_violation: sector.worst_violation,
        sector_samples: sector.samples_tested,
        violating_input: sector.violating_input,
        lemma_residual: lemma,
        lemma_verified,
        lemma_pairs: t.lemma_pairs,
    });
    finish(
        &mut report,
        sector.verified && lemma_verified,
        "verified",
        "not verified",
    );
    Ok(report)
}

/// Sample values of a scan, `from, from + step, ...` up to `to` inclusive.
fn scan_values(from: f64, to: f64, step: Option<f64>) -> CliResult<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && from <= to) {
        return Err(CliError::validation("scan range must satisfy from <= to"));
    }
    if from == to {
        return Ok(vec![from]);
    }
    let step = step.ok_or_else(|| CliError::validation("scan.step is required for a range"))?;
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::validation("scan.step must be positive"));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(CliError::validation("scan has more than 10^6 samples"));
    }
    Ok((0..count).map(|i| from + i as f64 * step).collect())
}

pub fn scan(s: &Scenario, out: &OutputOptions) -> CliResult<RunReport> {
    let mut report = RunReport::new("scan");
    report.warnings = s.warnings.clone();
    let cfg = s
        .scan
        .as_ref()
        .ok_or_else(|| CliError::validation("config has no scan section"))?;
    let margin = s.tolerances.margin;
    let n = s.topology.len();

    let rows: Vec<ScanRow> = match cfg.parameter {
        ScanParameter::K => {
            let from = cfg
                .from
                .ok_or_else(|| CliError::validation("scan.from is required"))?;
            let values = scan_values(from, cfg.to.unwrap_or(from), cfg.step)?;
            // first built-in parameter is the gain (or slope) being scanned
            let base = s.coupling.parameters();
            let key = base[0].0;
            values
                .par_iter()
                .map(|&k| {
                    let params: Vec<(&str, f64)> = base
                        .iter()
                        .map(|&(name, v)| (name, if name == key { k } else { v }))
                        .collect();
                    let c = coupling::builtin(s.coupling.name(), &params)?;
                    let cert = certificate_for(s, c.k1(), c.k2())?;
                    Ok(ScanRow {
                        value: k,
                        pivot: cert.pivot.unwrap_or(0),
                        k1: c.k1(),
                        k2: c.k2(),
                        spectral_abscissa: cert.spectral_abscissa,
                        hurwitz: cert.hurwitz,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?
        }
        ScanParameter::Pivot => {
            let from = cfg.from.unwrap_or(0.0);
            let to = cfg.to.unwrap_or((n.max(1) - 1) as f64);
            let values = scan_values(from, to, cfg.step.or(Some(1.0)))?;
            let (k1, k2) = (s.coupling.k1(), s.coupling.k2());
            values
                .par_iter()
                .map(|&v| {
                    if v.fract() != 0.0 || v < 0.0 || v as usize >= n {
                        return Err(CliError::validation(format!(
                            "pivot {v} is not a node index"
                        )));
                    }
                    let pivot = v as usize;
                    let cert = certificate::certify(&s.params, &s.topology, pivot, k1, k2, margin)?;
                    Ok(ScanRow {
                        value: v,
                        pivot,
                        k1,
                        k2,
                        spectral_abscissa: cert.spectral_abscissa,
                        hurwitz: cert.hurwitz,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?
        }
    };

    let parameter = match cfg.parameter {
        ScanParameter::K => "k",
        ScanParameter::Pivot => "pivot",
    };
    output::ensure_dir(out.dir)?;
    let path = out.dir.join("scan.csv");
    output::write_scan(&path, parameter, &rows)?;
    report.scan = Some(ScanSummary {
        parameter: parameter.to_string(),
        samples: rows.len(),
        certified: rows.iter().filter(|r| r.hurwitz).count(),
        first_certified: rows.iter().find(|r| r.hurwitz).map(|r| r.value),
    });
    report.verdict = "completed".to_string();
    write_report(&mut report, out.dir, vec![path])?;
    Ok(report)
}

/// Records `files` plus `report.json` in the manifest and writes the report.
fn write_report(
    report: &mut RunReport,
    dir: &Path,
    files: Vec<std::path::PathBuf>,
) -> CliResult<()> {
    let path = dir.join("report.json");
    report.files = files
        .iter()
        .chain([&path])
        .map(|p| p.display().to_string())
        .collect();
    output::write_text(&path, &report.to_json())
}
