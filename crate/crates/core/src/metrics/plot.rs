use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::oracle::ModeKind;
use crate::world::{format_sig, read_trajectory_csv, TrajectoryRow, TRAJECTORY_HEADER};
use crate::{Error, Result};

/// Columns of a trajectory CSV that can be plotted.
pub const PLOTTABLE: [&str; 14] = [
    "px", "py", "heading", "vx", "vy", "omega", "ox", "oy", "ovx", "ovy", "fx", "fy", "tau", "contact",
];

fn column(row: &TrajectoryRow, name: &str) -> Option<f64> {
    Some(match name {
        "px" => row.p[0],
        "py" => row.p[1],
        "heading" => row.heading,
        "vx" => row.v[0],
        "vy" => row.v[1],
        "omega" => row.omega,
        "ox" => row.object_p[0],
        "oy" => row.object_p[1],
        "ovx" => row.object_v[0],
        "ovy" => row.object_v[1],
        "fx" => row.wrench[0],
        "fy" => row.wrench[1],
        "tau" => row.wrench[2],
        "contact" => f64::from(u8::from(row.contact)),
        _ => return None,
    })
}

/// A maximal run of one mode, covering `[t_start, t_end]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeBand {
    pub mode: ModeKind,
    pub t_start: f64,
    pub t_end: f64,
}

/// Partition `[t_0, t_last]` into bands of constant mode. A band ends where
/// the next one begins; the last ends at the final sample.
pub fn mode_bands(rows: &[TrajectoryRow]) -> Vec<ModeBand> {
    let mut bands: Vec<ModeBand> = Vec::new();
    for r in rows {
        match bands.last_mut() {
            Some(b) if b.mode == r.mode => b.t_end = r.t,
            Some(b) => {
                b.t_end = r.t;
                bands.push(ModeBand {
                    mode: r.mode,
                    t_start: r.t,
                    t_end: r.t,
                });
            }
            None => bands.push(ModeBand {
                mode: r.mode,
                t_start: r.t,
                t_end: r.t,
            }),
        }
    }
    bands
}

fn mode_color(m: ModeKind) -> &'static str {
    match m {
        ModeKind::Reach => "#cfe8cf",
        ModeKind::Manipulate => "#cfdcf0",
        ModeKind::Detach => "#f3e1c4",
        ModeKind::Avoid => "#f2cccc",
    }
}

/// Validate a selector against the plottable columns.
pub fn check_selector(vars: &[String]) -> Result<()> {
    let list = PLOTTABLE.join(", ");
    if vars.is_empty() {
        return Err(Error::Usage(format!("no variables selected; available columns: {list}")));
    }
    if let Some(bad) = vars.iter().find(|v| !PLOTTABLE.contains(&v.as_str())) {
        return Err(Error::Usage(format!("unknown variable {bad:?}; available columns: {list}")));
    }
    Ok(())
}

/// Stacked line plots, one panel per variable, over mode-colored bands.
pub fn traces_svg(rows: &[TrajectoryRow], vars: &[String]) -> Result<String> {
    check_selector(vars)?;
    let (w, panel_h, left, right, top, gap) = (720.0, 160.0, 70.0, 20.0, 30.0, 40.0);
    let height = top + vars.len() as f64 * (panel_h + gap);
    let t0 = rows.first().map_or(0.0, |r| r.t);
    let t1 = rows.last().map_or(1.0, |r| r.t).max(t0 + 1e-9);
    let sx = |t: f64| left + (t - t0) / (t1 - t0) * (w - left - right);
    let bands = mode_bands(rows);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let mut legend_x = left;
    for m in ModeKind::ALL {
        if bands.iter().any(|b| b.mode == m) {
            let _ = writeln!(
                s,
                r#"<rect x="{legend_x}" y="8" width="12" height="12" fill="{}"/><text x="{}" y="18">{}</text>"#,
                mode_color(m),
                legend_x + 16.0,
                m.name()
            );
            legend_x += 100.0;
        }
    }
    for (k, var) in vars.iter().enumerate() {
        let y0 = top + k as f64 * (panel_h + gap);
        let vals: Vec<f64> = rows.iter().filter_map(|r| column(r, var)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let sy = |v: f64| y0 + panel_h - (v - lo) / (hi - lo) * panel_h;
        for b in &bands {
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{y0:.2}" width="{:.2}" height="{panel_h}" fill="{}"/>"#,
                sx(b.t_start),
                (sx(b.t_end) - sx(b.t_start)).max(0.0),
                mode_color(b.mode)
            );
        }
        let _ = writeln!(
            s,
            r##"<rect x="{left}" y="{y0:.2}" width="{:.2}" height="{panel_h}" fill="none" stroke="#444"/>"##,
            w - left - right
        );
        let pts: Vec<String> = rows
            .iter()
            .zip(&vals)
            .map(|(r, v)| format!("{:.2},{:.2}", sx(r.t), sy(*v)))
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="#1f3b73" stroke-width="1.5" points="{}"/>"##,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="8" y="{:.2}">{var}</text><text x="{}" y="{:.2}" text-anchor="end">{}</text><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            y0 + panel_h / 2.0,
            left - 4.0,
            y0 + 10.0,
            format_sig(hi, 3),
            left - 4.0,
            y0 + panel_h,
            format_sig(lo, 3)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t [s]</text>"#,
        (left + w - right) / 2.0,
        height - 8.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// CSV with `t`, `mode` and the selected columns, one row per sample.
pub fn traces_csv(rows: &[TrajectoryRow], vars: &[String]) -> Result<String> {
    check_selector(vars)?;
    let mut s = String::from("t,mode");
    for v in vars {
        s.push(',');
        s.push_str(v);
    }
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{}", format_sig(r.t, 9), r.mode.name()));
        for v in vars {
            s.push(',');
            s.push_str(&format_sig(column(r, v).expect("checked selector"), 9));
        }
        s.push('\n');
    }
    Ok(s)
}

/// For each trajectory CSV, write `<stem>.svg` and `<stem>_selected.csv`
/// into `out_dir`. Returns the written paths.
pub fn emit_traces(inputs: &[PathBuf], vars: &[String], out_dir: &Path) -> Result<Vec<PathBuf>> {
    check_selector(vars)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for input in inputs {
        let rows = read_trajectory_csv(input)?;
        let stem = input
            .file_stem()
            .map_or_else(|| "trace".to_string(), |s| s.to_string_lossy().into_owned());
        let svg = out_dir.join(format!("{stem}.svg"));
        fs::write(&svg, traces_svg(&rows, vars)?).map_err(|e| Error::io(&svg, e))?;
        let csv = out_dir.join(format!("{stem}_selected.csv"));
        fs::write(&csv, traces_csv(&rows, vars)?).map_err(|e| Error::io(&csv, e))?;
        written.push(svg);
        written.push(csv);
    }
    Ok(written)
}

/// Heatmap of a probability matrix with the value printed in each cell.
pub fn heatmap_svg(modes: &[ModeKind], probabilities: &[Vec<f64>]) -> String {
    let n = modes.len();
    let cell = 90.0;
    let (left, top) = (100.0, 40.0);
    let size = left + cell * n as f64 + 20.0;
    let max = probabilities
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" font-family="sans-serif" font-size="12">"#,
        top + cell * n as f64 + 30.0
    );
    let _ = writeln!(s, r#"<text x="{left}" y="16">rows: from, columns: to</text>"#);
    for (j, m) in modes.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            left + cell * (j as f64 + 0.5),
            top - 6.0,
            m.name()
        );
    }
    for (i, (m, row)) in modes.iter().zip(probabilities).enumerate() {
        let y = top + cell * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + cell / 2.0,
            m.name()
        );
        for (j, p) in row.iter().enumerate() {
            // sqrt scaling keeps small off-diagonal entries visible
            let a = (p / max).sqrt();
            let shade = (255.0 * (1.0 - a)).round() as u8;
            let x = left + cell * j as f64;
            let text = if a > 0.6 { "#fff" } else { "#000" };
            let _ = writeln!(
                s,
                r##"<rect x="{x:.1}" y="{y:.1}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#666"/><text x="{:.1}" y="{:.1}" text-anchor="middle" fill="{text}">{p:.6}</text>"##,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Columns of a trajectory CSV, for error messages.
pub fn trajectory_columns() -> String {
    TRAJECTORY_HEADER.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Vec<TrajectoryRow> {
        (0..n)
            .map(|k| TrajectoryRow {
                step: k,
                t: k as f64 * 0.05,
                mode: if k < 30 {
                    ModeKind::Reach
                } else if k < 70 {
                    ModeKind::Manipulate
                } else {
                    ModeKind::Detach
                },
                p: [k as f64 * 0.01, 0.0],
                heading: 0.0,
                v: [0.2, 0.0],
                omega: 0.0,
                object_p: [1.0, 0.0],
                object_v: [0.0; 2],
                wrench: [1.0, 0.0, 0.0],
                contact: k % 2 == 0,
            })
            .collect()
    }

    #[test]
    fn bands_partition_the_interval() {
        let r = rows(100);
        let b = mode_bands(&r);
        assert_eq!(b.len(), 3);
        assert_eq!(b[0].t_start, r[0].t);
        assert_eq!(b.last().unwrap().t_end, r[99].t);
        for w in b.windows(2) {
            assert_eq!(w[0].t_end, w[1].t_start);
        }
    }

    #[test]
    fn csv_keeps_rows_and_selector_errors() {
        let r = rows(100);
        let vars = vec!["px".to_string(), "vx".to_string()];
        let csv = traces_csv(&r, &vars).unwrap();
        assert_eq!(csv.lines().count(), 101);
        let svg = traces_svg(&r, &vars).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        let e = traces_svg(&r, &[]).unwrap_err().to_string();
        assert!(e.contains("px"), "{e}");
        assert!(traces_csv(&r, &["nope".to_string()]).is_err());
    }

    #[test]
    fn heatmap_has_cells() {
        let svg = heatmap_svg(
            &[ModeKind::Reach, ModeKind::Manipulate],
            &[vec![0.5, 0.1], vec![0.0, 0.4]],
        );
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains("0.100000"));
    }
}
