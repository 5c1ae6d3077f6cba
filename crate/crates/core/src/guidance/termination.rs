use serde::{Deserialize, Serialize};

use crate::oracle::ReferenceState;
use crate::world::PlanarWorldState;
use crate::{Error, Result};

/// Coordinates monitored by the reference-deviation bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCoordinate {
    RobotX,
    RobotY,
    ObjectX,
    ObjectY,
}

impl BoundCoordinate {
    pub const ALL: [BoundCoordinate; 4] = [
        BoundCoordinate::RobotX,
        BoundCoordinate::RobotY,
        BoundCoordinate::ObjectX,
        BoundCoordinate::ObjectY,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            BoundCoordinate::RobotX => "robot_x",
            BoundCoordinate::RobotY => "robot_y",
            BoundCoordinate::ObjectX => "object_x",
            BoundCoordinate::ObjectY => "object_y",
        }
    }
}

/// Per-coordinate deviation bounds: terminate when
/// `weight_i · |x_i − x_ref_i| > rho_i`. A zero weight disables a
/// coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationBounds {
    pub rho: [f64; 4],
    pub weights: [f64; 4],
}

impl Default for DeviationBounds {
    fn default() -> Self {
        Self {
            rho: [0.4; 4],
            weights: [1.0; 4],
        }
    }
}

impl DeviationBounds {
    pub fn validate(&self) -> Result<()> {
        if self.rho.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Config("termination bounds must be positive".into()));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config("termination weights must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    Continue,
    Terminate {
        coordinate: BoundCoordinate,
        deviation: f64,
    },
}

impl Termination {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Termination::Terminate { .. })
    }
}

/// Check the state against its aligned reference. Object coordinates are
/// skipped when the world has no object; nothing is checked outside
/// training mode.
pub fn check_termination(
    world: &PlanarWorldState,
    reference: &ReferenceState,
    bounds: &DeviationBounds,
    training_mode: bool,
) -> Termination {
    if !training_mode {
        return Termination::Continue;
    }
    let dr = world.robot.p - reference.p_robot;
    let mut devs = vec![(BoundCoordinate::RobotX, dr.x), (BoundCoordinate::RobotY, dr.y)];
    if let Some(o) = &world.object {
        let d = o.p - reference.p_object;
        devs.push((BoundCoordinate::ObjectX, d.x));
        devs.push((BoundCoordinate::ObjectY, d.y));
    }
    for (coordinate, d) in devs {
        let i = coordinate as usize;
        let deviation = bounds.weights[i] * d.abs();
        // NaN deviations terminate as well.
        if !(deviation <= bounds.rho[i]) {
            return Termination::Terminate {
                coordinate,
                deviation,
            };
        }
    }
    Termination::Continue
}
