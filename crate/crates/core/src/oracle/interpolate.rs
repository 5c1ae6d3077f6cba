use crate::{unit, Error, Result, Vec2};

/// Number of reference samples in a horizon of `horizon` seconds at step `dt`.
pub fn horizon_steps(horizon: f64, dt: f64) -> usize {
    (horizon / dt).round() as usize
}

/// Straight-line waypoints from `current` toward `target` at constant `speed`,
/// saturating at the target.
///
/// Returns `H = round(horizon / dt)` waypoints; waypoint `k` (1-based) lies
/// `min(k·speed·dt, ‖target − current‖)` along the segment.
pub fn interpolate(
    current: Vec2,
    target: Vec2,
    speed: f64,
    dt: f64,
    horizon: f64,
) -> Result<Vec<Vec2>> {
    if !(current.iter().chain(target.iter()).all(|x| x.is_finite())
        && speed.is_finite()
        && dt.is_finite()
        && horizon.is_finite())
    {
        return Err(Error::InvalidArgument(
            "interpolate: non-finite input".into(),
        ));
    }
    if speed <= 0.0 || dt <= 0.0 || horizon < dt {
        return Err(Error::InvalidArgument(format!(
            "interpolate: need speed > 0, dt > 0, horizon >= dt (got {speed}, {dt}, {horizon})"
        )));
    }
    let mut pts = path(current, target, speed, dt, horizon_steps(horizon, dt));
    pts.remove(0);
    Ok(pts)
}

/// `steps + 1` points starting at `current` (index 0) and moving toward
/// `target` by `speed·dt` per step.
pub(crate) fn path(current: Vec2, target: Vec2, speed: f64, dt: f64, steps: usize) -> Vec<Vec2> {
    let delta = target - current;
    let dist = delta.norm();
    let Some(dir) = unit(delta) else {
        return vec![target; steps + 1];
    };
    (0..=steps)
        .map(|k| {
            let s = (k as f64 * speed * dt).min(dist);
            if s >= dist {
                target
            } else {
                current + dir * s
            }
        })
        .collect()
}

/// Move `from` toward `to` by at most `max_step`.
pub(crate) fn step_toward(from: Vec2, to: Vec2, max_step: f64) -> Vec2 {
    let d = to - from;
    let n = d.norm();
    if n <= max_step {
        to
    } else {
        from + d * (max_step / n)
    }
}
