//! Navigation-variable path encoding.
//!
//! A path is an articulated chain: each segment is described relative to the
//! frame attached at the end of the previous one by a length `r`, a climb
//! `theta`, and a turn `psi`. The frame at waypoint `j` has +x along the
//! incoming segment, +y to the left and +z up (before any accumulated climb).
//! Going from waypoint `j` to `j + 1` rotates `psi` about z, pitches up by
//! `theta` about the new y axis, then translates `r` along x:
//!
//! ```text
//! T(j -> j+1) = Rz(psi) * Ry(-theta) * Mx(r)
//! ```
//!
//! `Ry(-theta)` rather than `Ry(theta)`: in a right-handed z-up frame a
//! positive rotation about +y tips +x downward, and `theta` here is a climb.
//!
//! Decoded paths are `[start] ++ n chain endpoints ++ [goal]`. The final
//! segment into the goal is not controlled by the chain, so its joint is
//! reported separately by [`validate_kinematics`].

use std::ops::Mul;

use thiserror::Error;

use crate::geometry::Vec3;
use crate::objectives::CartesianPath;
use crate::scenario::{KinematicLimits, Scenario};

#[derive(Debug, Error, PartialEq)]
pub enum NavError {
    #[error("waypoint #{0} coincides with the next one")]
    CoincidentWaypoints(usize),
    #[error("expected a multiple of 3 values, got {0}")]
    BadLength(usize),
}

/// 4x4 homogeneous transform, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform(pub [[f64; 4]; 4]);

impl Transform {
    pub const IDENTITY: Transform = Transform([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    pub fn rot_z(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Transform([[c, -s, 0.0, 0.0], [s, c, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    }

    pub fn rot_y(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Transform([[c, 0.0, s, 0.0], [0.0, 1.0, 0.0, 0.0], [-s, 0.0, c, 0.0], [0.0, 0.0, 0.0, 1.0]])
    }

    pub fn translate(v: Vec3) -> Self {
        let mut t = Self::IDENTITY;
        t.0[0][3] = v.x;
        t.0[1][3] = v.y;
        t.0[2][3] = v.z;
        t
    }

    pub fn trans_x(r: f64) -> Self {
        Self::translate(Vec3::new(r, 0.0, 0.0))
    }

    pub fn origin(&self) -> Vec3 {
        Vec3::new(self.0[0][3], self.0[1][3], self.0[2][3])
    }

    pub fn set_origin(&mut self, p: Vec3) {
        self.0[0][3] = p.x;
        self.0[1][3] = p.y;
        self.0[2][3] = p.z;
    }

    pub fn rotation(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [[m[0][0], m[0][1], m[0][2]], [m[1][0], m[1][1], m[1][2]], [m[2][0], m[2][1], m[2][2]]]
    }

    /// Frame x axis in the parent frame.
    pub fn x_axis(&self) -> Vec3 {
        Vec3::new(self.0[0][0], self.0[1][0], self.0[2][0])
    }

    /// Express a parent-frame vector in this frame's axes.
    pub fn to_local(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z,
        )
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z + m[0][3],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z + m[1][3],
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z + m[2][3],
        )
    }

    /// Largest entry of `R^T R - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.rotation();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn rotation_determinant(&self) -> f64 {
        let r = self.rotation();
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }
}

impl Mul for Transform {
    type Output = Transform;

    fn mul(self, rhs: Transform) -> Transform {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Transform(out)
    }
}

/// Frame change across one segment: `Rz(psi) * Ry(-theta) * Mx(r)`, in closed form.
pub fn segment_transform(r: f64, theta: f64, psi: f64) -> Transform {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    Transform([
        [cp * ct, -sp, -cp * st, r * cp * ct],
        [sp * ct, cp, -sp * st, r * sp * ct],
        [st, 0.0, ct, r * st],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Start frame: at `start`, level, facing the horizontal bearing of `goal`
/// (world +x if the goal is straight above or below).
pub fn initial_pose(start: Vec3, goal: Vec3) -> Transform {
    let d = goal - start;
    let heading = if d.horizontal_norm() > 0.0 { d.y.atan2(d.x) } else { 0.0 };
    let mut t = Transform::rot_z(heading);
    t.set_origin(start);
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavTriplet {
    pub r: f64,
    pub theta: f64,
    pub psi: f64,
}

impl NavTriplet {
    pub fn new(r: f64, theta: f64, psi: f64) -> Self {
        Self { r, theta, psi }
    }
}

/// Box constraints on navigation variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavBounds {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_max: f64,
    pub psi_max: f64,
}

impl NavBounds {
    pub fn for_scenario(s: &Scenario) -> Self {
        Self {
            r_min: s.r_min,
            r_max: s.r_max_cap(),
            theta_max: s.limits.theta_max,
            psi_max: s.limits.psi_max,
        }
    }

    /// Per-dimension `(lower, upper)` for a flattened path of `n` triplets.
    pub fn flat(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let lo = [self.r_min, -self.theta_max, -self.psi_max];
        let hi = [self.r_max, self.theta_max, self.psi_max];
        (lo.repeat(n), hi.repeat(n))
    }

    pub fn contains(&self, t: &NavTriplet) -> bool {
        (self.r_min..=self.r_max).contains(&t.r)
            && t.theta.abs() <= self.theta_max
            && t.psi.abs() <= self.psi_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavPath {
    pub triplets: Vec<NavTriplet>,
}

impl NavPath {
    pub fn new(triplets: Vec<NavTriplet>) -> Self {
        Self { triplets }
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    /// `[r1, theta1, psi1, r2, ...]`
    pub fn to_flat(&self) -> Vec<f64> {
        self.triplets.iter().flat_map(|t| [t.r, t.theta, t.psi]).collect()
    }

    pub fn from_flat(values: &[f64]) -> Result<Self, NavError> {
        if values.len() % 3 != 0 {
            return Err(NavError::BadLength(values.len()));
        }
        Ok(Self::new(values.chunks_exact(3).map(|c| NavTriplet::new(c[0], c[1], c[2])).collect()))
    }

    pub fn within(&self, bounds: &NavBounds) -> bool {
        self.triplets.iter().all(|t| bounds.contains(t))
    }
}

/// Chain endpoints of `nav` starting from `pose` (the pose itself excluded).
pub fn chain_points(nav: &NavPath, pose: Transform) -> Vec<Vec3> {
    let mut frame = pose;
    nav.triplets
        .iter()
        .map(|t| {
            frame = frame * segment_transform(t.r, t.theta, t.psi);
            frame.origin()
        })
        .collect()
}

pub fn decode_between(nav: &NavPath, start: Vec3, goal: Vec3) -> CartesianPath {
    let mut points = Vec::with_capacity(nav.len() + 2);
    points.push(start);
    points.extend(chain_points(nav, initial_pose(start, goal)));
    points.push(goal);
    CartesianPath::new(points).expect("decoded path has start, goal, and at least one node")
}

pub fn decode(nav: &NavPath, scenario: &Scenario) -> CartesianPath {
    decode_between(nav, scenario.start, scenario.goal)
}

/// Navigation variables of every segment of `path`, including the final one,
/// measured from the initial pose toward the path's last point.
pub fn recover_nav(path: &CartesianPath) -> Result<NavPath, NavError> {
    let w = path.waypoints();
    let mut frame = initial_pose(w[0], w[w.len() - 1]);
    let mut triplets = Vec::with_capacity(w.len() - 1);
    for (i, pair) in w.windows(2).enumerate() {
        let local = frame.to_local(pair[1] - pair[0]);
        let r = local.norm();
        if r == 0.0 {
            return Err(NavError::CoincidentWaypoints(i));
        }
        let planar = local.horizontal_norm();
        let theta = local.z.atan2(planar);
        let psi = if planar > 0.0 { local.y.atan2(local.x) } else { 0.0 };
        frame = frame * segment_transform(r, theta, psi);
        frame.set_origin(pair[1]);
        triplets.push(NavTriplet::new(r, theta, psi));
    }
    Ok(NavPath::new(triplets))
}

/// Slack on the angle comparisons to absorb round-off at the limits.
const ANGLE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCheck {
    /// Index of the waypoint at which the joint sits.
    pub waypoint: usize,
    pub delta_climb: f64,
    pub delta_turn: f64,
    pub within_limits: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicReport {
    /// Joints whose outgoing segment is not the last one.
    pub joints: Vec<JointCheck>,
    /// Joint leading into the final segment (the goal attachment for decoded paths).
    pub final_joint: JointCheck,
    pub overall_pass: bool,
}

impl KinematicReport {
    /// True when every joint except the final one is within limits.
    pub fn chain_pass(&self) -> bool {
        self.joints.iter().all(|j| j.within_limits)
    }
}

pub fn validate_kinematics(path: &CartesianPath, limits: &KinematicLimits) -> Result<KinematicReport, NavError> {
    let nav = recover_nav(path)?;
    let mut checks: Vec<JointCheck> = nav
        .triplets
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, t)| JointCheck {
            waypoint: i,
            delta_climb: t.theta,
            delta_turn: t.psi,
            within_limits: t.theta.abs() <= limits.theta_max + ANGLE_SLACK
                && t.psi.abs() <= limits.psi_max + ANGLE_SLACK,
        })
        .collect();
    let final_joint = checks.pop().expect("paths have at least one interior joint");
    let overall_pass = final_joint.within_limits && checks.iter().all(|j| j.within_limits);
    Ok(KinematicReport { joints: checks, final_joint, overall_pass })
}
