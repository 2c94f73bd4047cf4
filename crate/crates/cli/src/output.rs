//! CSV and SVG writers. Every real is printed with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chua_sync_core::{ErrorSeries, Trajectory};

use crate::error::{CliError, CliResult};

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// `t,node,x1,x2,x3`, one row per sample and node.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "node", "x1", "x2", "x3"])?;
    for (k, &t) in traj.times.iter().enumerate() {
        for i in 0..traj.node_count() {
            let s = traj.node(k, i);
            w.write_record([real(t), i.to_string(), real(s.x1), real(s.x2), real(s.x3)])?;
        }
    }
    w.flush().map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// `t,node,norm` with the original node index of each non-pivot node.
pub fn write_errors(path: &Path, es: &ErrorSeries) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "node", "norm"])?;
    for (k, &t) in es.times.iter().enumerate() {
        for (&node, &norm) in es.nodes.iter().zip(es.norms_at(k)) {
            w.write_record([real(t), node.to_string(), real(norm)])?;
        }
    }
    w.flush().map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub value: f64,
    pub pivot: usize,
    pub k1: f64,
    pub k2: f64,
    pub spectral_abscissa: f64,
    pub hurwitz: bool,
}

pub fn write_scan(path: &Path, parameter: &str, rows: &[ScanRow]) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record([
        parameter,
        "pivot",
        "k1",
        "k2",
        "spectral_abscissa",
        "hurwitz",
    ])?;
    for r in rows {
        w.write_record([
            real(r.value),
            r.pivot.to_string(),
            real(r.k1),
            real(r.k2),
            real(r.spectral_abscissa),
            r.hurwitz.to_string(),
        ])?;
    }
    w.flush().map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Line plot of `log10` error norms against time, one polyline per node.
pub fn error_svg(es: &ErrorSeries) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let floor = 1e-16;
    let t_max = es
        .times
        .last()
        .copied()
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    let logs = |k: usize| es.norms_at(k).iter().map(move |n| n.max(floor).log10());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..es.len() {
        for v in logs(k) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if hi.is_nan() || hi <= lo {
        lo -= 1.0;
        hi += 1.0;
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    let x = |t: f64| PAD + (W - 2.0 * PAD) * t / t_max;
    let y = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let mut e = lo;
    while e <= hi {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">1e{e}</text>"#,
            PAD - 4.0,
            y(e) + 4.0
        );
        e += ((hi - lo) / 8.0).ceil().max(1.0);
    }
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}">0</text>"#, H - PAD + 14.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">t = {t_max}</text>"#,
        W - PAD,
        H - PAD + 14.0
    );
    let stride = (es.len() / 2000).max(1);
    for col in 0..es.nodes.len() {
        let hue = (col * 360) / es.nodes.len().max(1);
        let _ = write!(
            s,
            r#"<polyline fill="none" stroke="hsl({hue},70%,40%)" stroke-width="1" points=""#
        );
        for k in (0..es.len()).step_by(stride) {
            let v = es.norms_at(k)[col].max(floor).log10();
            let _ = write!(s, "{:.2},{:.2} ", x(es.times[k]), y(v));
        }
        let _ = writeln!(s, r#""/>"#);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(real(-21.3), "-2.1300000000000001e1");
        assert_eq!(real(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn svg_has_one_polyline_per_node() {
        let es =
            ErrorSeries::from_norms(vec![0.0, 1.0], vec![1, 2], vec![1.0, 0.5, 0.1, 0.05]).unwrap();
        let svg = error_svg(&es);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
}
