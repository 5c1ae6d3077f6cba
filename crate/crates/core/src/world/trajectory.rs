use std::io::Write;
use std::path::Path;

use crate::oracle::ModeKind;
use crate::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 17] = [
    "step", "t", "mode", "px", "py", "heading", "vx", "vy", "omega", "ox", "oy", "ovx", "ovy",
    "fx", "fy", "tau", "contact",
];

/// One per-step trajectory sample. For reach-avoid the object columns hold
/// the obstacle.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    pub mode: ModeKind,
    pub p: [f64; 2],
    pub heading: f64,
    pub v: [f64; 2],
    pub omega: f64,
    pub object_p: [f64; 2],
    pub object_v: [f64; 2],
    pub wrench: [f64; 3],
    pub contact: bool,
}

/// `%.{digits}g`-style formatting: `digits` significant digits, trailing
/// zeros trimmed, scientific notation for very large or small magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl TrajectoryRow {
    fn fields(&self) -> Vec<String> {
        let g = |x: f64| format_sig(x, 9);
        vec![
            self.step.to_string(),
            g(self.t),
            self.mode.name().to_string(),
            g(self.p[0]),
            g(self.p[1]),
            g(self.heading),
            g(self.v[0]),
            g(self.v[1]),
            g(self.omega),
            g(self.object_p[0]),
            g(self.object_p[1]),
            g(self.object_v[0]),
            g(self.object_v[1]),
            g(self.wrench[0]),
            g(self.wrench[1]),
            g(self.wrench[2]),
            u8::from(self.contact).to_string(),
        ]
    }
}

pub fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut out = TRAJECTORY_HEADER.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.fields().join(","));
        out.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, msg: String| Error::Trace {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    if header != TRAJECTORY_HEADER.join(",") {
        return Err(err(1, format!("unexpected header `{header}`")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let lineno = i + 2;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != TRAJECTORY_HEADER.len() {
                return Err(err(lineno, format!("expected 17 columns, got {}", cols.len())));
            }
            let num = |j: usize| -> Result<f64> {
                cols[j].parse::<f64>().map_err(|_| {
                    err(lineno, format!("column `{}`: bad number `{}`", TRAJECTORY_HEADER[j], cols[j]))
                })
            };
            let mode = ModeKind::from_name(cols[2])
                .ok_or_else(|| err(lineno, format!("unknown mode `{}`", cols[2])))?;
            Ok(TrajectoryRow {
                step: cols[0]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad step `{}`", cols[0])))?,
                t: num(1)?,
                mode,
                p: [num(3)?, num(4)?],
                heading: num(5)?,
                v: [num(6)?, num(7)?],
                omega: num(8)?,
                object_p: [num(9)?, num(10)?],
                object_v: [num(11)?, num(12)?],
                wrench: [num(13)?, num(14)?, num(15)?],
                contact: num(16)? != 0.0,
            })
        })
        .collect()
}
