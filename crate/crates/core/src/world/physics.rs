use log::warn;
use std::sync::atomic::{AtomicU64, Ordering};

static DEEP_PENETRATIONS: AtomicU64 = AtomicU64::new(0);

use super::{Geometry, ObjectBody, ObjectKind, PlanarWorldState, RobotBody, TaskSpec};
use crate::oracle::ModeKind;
use crate::{unit, wrap_angle, Error, Result, Vec2};

/// Quadratic drag coefficient of the ball, N·s²/m².
pub const BALL_DRAG_COEFFICIENT: f64 = 0.5;

/// Quadratic drag on the ball: magnitude 0.5‖v‖², opposing `v`.
pub fn drag_force(v: Vec2) -> Vec2 {
    match unit(v) {
        Some(u) => -u * (BALL_DRAG_COEFFICIENT * v.norm_squared()),
        None => Vec2::zeros(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ContactResult {
    pub contact: bool,
    /// Normal impulse magnitude applied, N·s.
    pub normal_impulse: f64,
    /// Whether positions were moved out of penetration.
    pub projected: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub contact: bool,
    /// The clamped wrench that was applied.
    pub wrench: [f64; 3],
    pub diverged: bool,
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Velocity of the point at lever `r` on a body spinning at `omega`.
fn spin(omega: f64, r: Vec2) -> Vec2 {
    Vec2::new(-omega * r.y, omega * r.x)
}

fn rotate(v: Vec2, a: f64) -> Vec2 {
    let (s, c) = a.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Contact normal (robot → object), penetration depth and contact point.
fn contact_geometry(robot: &RobotBody, object: &ObjectBody) -> Option<(Vec2, f64, Vec2)> {
    match object.geometry {
        Geometry::Disc { radius } => {
            let d = object.p - robot.p;
            let dist = d.norm();
            let pen = robot.radius + radius - dist;
            if pen <= 0.0 {
                return None;
            }
            let n = unit(d).unwrap_or_else(|| robot.heading_vec());
            Some((n, pen, object.p - n * radius))
        }
        Geometry::Rect { half_extents: h } => {
            // Work in the box frame.
            let local = rotate(robot.p - object.p, -object.theta);
            let clamped = Vec2::new(local.x.clamp(-h.x, h.x), local.y.clamp(-h.y, h.y));
            let (n_local, pen, point_local) = if clamped == local {
                // Robot centre inside the box: push out along the shallowest face.
                let gap_x = h.x - local.x.abs();
                let gap_y = h.y - local.y.abs();
                if gap_x < gap_y {
                    let s = if local.x >= 0.0 { 1.0 } else { -1.0 };
                    (Vec2::new(s, 0.0), robot.radius + gap_x, Vec2::new(s * h.x, local.y))
                } else {
                    let s = if local.y >= 0.0 { 1.0 } else { -1.0 };
                    (Vec2::new(0.0, s), robot.radius + gap_y, Vec2::new(local.x, s * h.y))
                }
            } else {
                let diff = local - clamped;
                let dist = diff.norm();
                if dist >= robot.radius {
                    return None;
                }
                (diff / dist, robot.radius - dist, clamped)
            };
            // n_local points box → robot; flip for robot → object.
            let n = -rotate(n_local, object.theta);
            Some((n, pen, object.p + rotate(point_local, object.theta)))
        }
    }
}

/// Resolve robot–object contact in place.
///
/// Penetrating bodies are projected apart along the normal, split by inverse
/// mass. If they approach along the normal, an impulse
/// `j = −(1+e)(v_rel·n) / w` is exchanged, with `w` the effective inverse
/// mass; boxes additionally receive a Coulomb tangential impulse bounded by
/// `μ·j`.
pub fn resolve_contact(robot: &mut RobotBody, object: &mut ObjectBody) -> ContactResult {
    let Some((n, pen, point)) = contact_geometry(robot, object) else {
        return ContactResult::default();
    };
    let limit = 0.5 * robot.radius.min(object.min_extent());
    if pen > limit {
        // Rate-limited: early training can hit this thousands of times.
        let n = DEEP_PENETRATIONS.fetch_add(1, Ordering::Relaxed) + 1;
        if n.is_power_of_two() {
            warn!("deep robot-object penetration {pen:.4} m (threshold {limit:.4} m, {n} so far)");
        }
    }

    let inv_r = 1.0 / robot.mass;
    let inv_o = 1.0 / object.mass;
    let rotational = object.kind == ObjectKind::Box;
    let lever = point - object.p;
    let inertia = object.inertia;

    robot.p -= n * (pen * inv_r / (inv_r + inv_o));
    object.p += n * (pen * inv_o / (inv_r + inv_o));

    let rel_vel = |robot: &RobotBody, object: &ObjectBody| {
        let point_v = if rotational { object.v + spin(object.omega, lever) } else { object.v };
        point_v - robot.v
    };
    let inv_mass_along = |dir: Vec2| {
        let ang = if rotational { cross(lever, dir).powi(2) / inertia } else { 0.0 };
        inv_r + inv_o + ang
    };
    let apply = |robot: &mut RobotBody, object: &mut ObjectBody, impulse: Vec2| {
        robot.v -= impulse * inv_r;
        object.v += impulse * inv_o;
        if rotational {
            object.omega += cross(lever, impulse) / inertia;
        }
    };

    let vn = rel_vel(robot, object).dot(&n);
    let mut j = 0.0;
    if vn < 0.0 {
        j = -(1.0 + object.restitution) * vn / inv_mass_along(n);
        apply(robot, object, n * j);

        if object.friction_mu > 0.0 {
            let vr = rel_vel(robot, object);
            if let Some(t) = unit(vr - n * vr.dot(&n)) {
                let bound = object.friction_mu * j;
                let jt = (-vr.dot(&t) / inv_mass_along(t)).clamp(-bound, bound);
                apply(robot, object, t * jt);
            }
        }
    }
    ContactResult {
        contact: true,
        normal_impulse: j,
        projected: true,
    }
}

/// Reduce `v` by `dv` in magnitude without reversing it.
fn decelerate(v: Vec2, dv: f64) -> Vec2 {
    let s = v.norm();
    if s <= dv {
        Vec2::zeros()
    } else {
        v * ((s - dv) / s)
    }
}

impl PlanarWorldState {
    /// Advance one control step with semi-implicit Euler.
    ///
    /// `action` is the commanded wrench (force x, force y, torque); it is
    /// clamped to the spec's limits. Contacts made while `active_mode` is
    /// manipulate are counted.
    pub fn step(
        &mut self,
        action: [f64; 3],
        spec: &TaskSpec,
        active_mode: ModeKind,
    ) -> Result<StepInfo> {
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFiniteAction(action));
        }
        let dt = spec.dt;
        let body = &spec.body;
        let limits = body.wrench_limits();
        let wrench = [
            action[0].clamp(-limits[0], limits[0]),
            action[1].clamp(-limits[1], limits[1]),
            action[2].clamp(-limits[2], limits[2]),
        ];

        let r = &mut self.robot;
        r.v += Vec2::new(wrench[0], wrench[1]) * (dt / r.mass);
        r.omega += wrench[2] * dt / r.inertia;
        r.p += r.v * dt;
        r.heading = wrap_angle(r.heading + r.omega * dt);
        r.u_prev = wrench;

        let mut contact = false;
        if let Some(o) = self.object.as_mut() {
            match o.kind {
                ObjectKind::Ball => {
                    let dragged = o.v + drag_force(o.v) * (dt / o.mass);
                    // Drag alone never reverses the ball.
                    o.v = if dragged.dot(&o.v) <= 0.0 { Vec2::zeros() } else { dragged };
                    o.v = decelerate(o.v, body.ball_rolling_resistance * body.gravity * dt);
                }
                ObjectKind::Box => {
                    let mu_g = body.box_ground_friction * body.gravity;
                    o.v = decelerate(o.v, mu_g * dt);
                    let h = body.box_half_extents;
                    let arm = (h.x + h.y) / 3.0;
                    let alpha = mu_g * o.mass * arm / o.inertia;
                    o.omega = if o.omega.abs() <= alpha * dt {
                        0.0
                    } else {
                        o.omega - alpha * dt * o.omega.signum()
                    };
                    o.theta = wrap_angle(o.theta + o.omega * dt);
                }
            }
            o.p += o.v * dt;
            contact = resolve_contact(&mut self.robot, o).contact;
        }

        if contact && active_mode == ModeKind::Manipulate {
            self.contact_count += 1;
        }
        self.step_index += 1;
        self.t = self.step_index as f64 * dt;

        let bound = 10.0 * spec.arena_half_extents.max();
        let mut coords = vec![self.robot.p.x, self.robot.p.y, self.robot.heading];
        if let Some(o) = &self.object {
            coords.extend([o.p.x, o.p.y]);
        }
        let sane = |x: &f64| x.is_finite() && x.abs() <= bound;
        let velocities_finite = self.robot.v.iter().all(|x| x.is_finite())
            && self.object.is_none_or(|o| o.v.iter().all(|x| x.is_finite()));
        if !coords.iter().all(sane) || !velocities_finite {
            self.diverged = true;
        }
        Ok(StepInfo {
            contact,
            wrench,
            diverged: self.diverged,
        })
    }
}
