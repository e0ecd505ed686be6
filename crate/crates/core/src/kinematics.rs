//! Modified-DH serial chains: forward kinematics, position Jacobian, and
//! manipulability.
//!
//! Every link transform is `Rot_x(alpha_prev) * Trans_x(a_prev) * Rot_z(theta)
//! * Trans_z(d)` (proximal/Craig convention), with `theta = theta_offset +
//! q[joint_binding]` for actuated rows and `theta = theta_offset` for constant
//! rows. All joints are revolute; angles are radians, lengths are normalized
//! hand-length units.

use nalgebra::{Matrix3, Matrix3xX, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::workspace::JointGrid;

/// Upper bound on actuated joints per chain (the catalog maximum is 6).
pub const MAX_JOINTS: usize = 8;

/// One row of a modified-DH table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub alpha_prev: f64,
    pub a_prev: f64,
    pub d: f64,
    pub theta_offset: f64,
    /// Index into the chain's joint vector; `None` for constant-theta rows.
    pub joint_binding: Option<usize>,
}

impl DhRow {
    pub fn fixed(alpha_prev: f64, a_prev: f64, d: f64, theta_offset: f64) -> Self {
        Self {
            alpha_prev,
            a_prev,
            d,
            theta_offset,
            joint_binding: None,
        }
    }

    pub fn actuated(alpha_prev: f64, a_prev: f64, d: f64, theta_offset: f64, joint: usize) -> Self {
        Self {
            alpha_prev,
            a_prev,
            d,
            theta_offset,
            joint_binding: Some(joint),
        }
    }

    fn validate(&self, row: usize) -> Result<()> {
        let finite = self.alpha_prev.is_finite()
            && self.a_prev.is_finite()
            && self.d.is_finite()
            && self.theta_offset.is_finite();
        if !finite {
            return Err(Error::MalformedChain(format!(
                "row {row} has a non-finite field"
            )));
        }
        Ok(())
    }
}

/// A rigid transform: orthonormal rotation plus translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.translation + self.rotation * other.translation,
        }
    }
}

/// A serial chain of DH rows with actuated-joint bindings and joint limits.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain {
    rows: Vec<DhRow>,
    joint_limits: Vec<(f64, f64)>,
}

impl KinematicChain {
    /// Builds a chain, checking that every joint index `0..n` is bound by
    /// exactly one row and that limits are ordered.
    pub fn new(rows: Vec<DhRow>, joint_limits: Vec<(f64, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::MalformedChain("chain has no rows".into()));
        }
        let n = joint_limits.len();
        if n > MAX_JOINTS {
            return Err(Error::MalformedChain(format!(
                "chain has {n} joints, maximum supported is {MAX_JOINTS}"
            )));
        }
        let mut bound = vec![0usize; n];
        for (i, row) in rows.iter().enumerate() {
            row.validate(i)?;
            if let Some(j) = row.joint_binding {
                if j >= n {
                    return Err(Error::BadJointBinding {
                        row: i,
                        joint: j,
                        joint_count: n,
                    });
                }
                bound[j] += 1;
            }
        }
        if let Some(j) = bound.iter().position(|&c| c != 1) {
            return Err(Error::MalformedChain(format!(
                "joint {j} is bound by {} rows, expected exactly 1",
                bound[j]
            )));
        }
        for (j, &(lo, hi)) in joint_limits.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::MalformedChain(format!(
                    "joint {j} has invalid limits [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { rows, joint_limits })
    }

    pub fn rows(&self) -> &[DhRow] {
        &self.rows
    }

    pub fn joint_count(&self) -> usize {
        self.joint_limits.len()
    }

    pub fn joint_limits(&self) -> &[(f64, f64)] {
        &self.joint_limits
    }

    fn check_limits(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.joint_count() {
            return Err(Error::DimensionMismatch(format!(
                "joint vector has {} entries, chain has {} joints",
                q.len(),
                self.joint_count()
            )));
        }
        const EPS: f64 = 1e-9;
        for (j, (&v, &(lo, hi))) in q.iter().zip(&self.joint_limits).enumerate() {
            if v < lo - EPS || v > hi + EPS {
                return Err(Error::JointLimit {
                    joint: j,
                    value: v,
                    min: lo,
                    max: hi,
                });
            }
        }
        Ok(())
    }
}

/// The transform contributed by a single DH row.
pub fn dh_transform(row: &DhRow, q: &[f64]) -> Result<Pose> {
    row.validate(0)?;
    let theta = match row.joint_binding {
        Some(j) => {
            let v = q.get(j).ok_or(Error::BadJointBinding {
                row: 0,
                joint: j,
                joint_count: q.len(),
            })?;
            row.theta_offset + v
        }
        None => row.theta_offset,
    };
    Ok(row_pose(row, theta))
}

/// Closed form of Rot_x(alpha) * Trans_x(a) * Rot_z(theta) * Trans_z(d).
fn row_pose(row: &DhRow, theta: f64) -> Pose {
    let (sa, ca) = row.alpha_prev.sin_cos();
    let (st, ct) = theta.sin_cos();
    let rotation = Matrix3::new(
        ct,
        -st,
        0.0, //
        st * ca,
        ct * ca,
        -sa, //
        st * sa,
        ct * sa,
        ca,
    );
    let translation = Vector3::new(row.a_prev, -sa * row.d, ca * row.d);
    Pose {
        rotation,
        translation,
    }
}

/// World-frame axis and origin of each actuated joint, plus the fingertip.
struct ChainFrames {
    fingertip: Vector3<f64>,
    axes: [Vector3<f64>; MAX_JOINTS],
    origins: [Vector3<f64>; MAX_JOINTS],
    joint_count: usize,
}

fn chain_frames(chain: &KinematicChain, q: &[f64]) -> ChainFrames {
    let mut rot = Matrix3::identity();
    let mut pos = Vector3::zeros();
    let mut axes = [Vector3::zeros(); MAX_JOINTS];
    let mut origins = [Vector3::zeros(); MAX_JOINTS];
    for row in &chain.rows {
        // Rot_x(alpha), Trans_x(a): x is unchanged by Rot_x, so the
        // translation is just `a` along the current x axis.
        let (sa, ca) = row.alpha_prev.sin_cos();
        pos += rot * Vector3::new(row.a_prev, 0.0, 0.0);
        let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, ca, -sa, 0.0, sa, ca);
        rot *= rx;
        let theta = match row.joint_binding {
            Some(j) => {
                // The joint axis is the local z before Rot_z is applied.
                axes[j] = rot.column(2).into();
                origins[j] = pos;
                row.theta_offset + q[j]
            }
            None => row.theta_offset,
        };
        let (st, ct) = theta.sin_cos();
        let rz = Matrix3::new(ct, -st, 0.0, st, ct, 0.0, 0.0, 0.0, 1.0);
        rot *= rz;
        pos += rot * Vector3::new(0.0, 0.0, row.d);
    }
    ChainFrames {
        fingertip: pos,
        axes,
        origins,
        joint_count: chain.joint_count(),
    }
}

/// Fingertip position with joint limits checked (strict mode).
pub fn forward_kinematics(chain: &KinematicChain, q: &[f64]) -> Result<Vector3<f64>> {
    chain.check_limits(q)?;
    Ok(chain_frames(chain, q).fingertip)
}

/// Fingertip position without limit checks, for grids built in-limit by
/// construction.
pub fn forward_kinematics_unchecked(chain: &KinematicChain, q: &[f64]) -> Vector3<f64> {
    debug_assert_eq!(q.len(), chain.joint_count());
    chain_frames(chain, q).fingertip
}

/// Full base-to-fingertip pose (composition of every row).
pub fn fingertip_pose(chain: &KinematicChain, q: &[f64]) -> Result<Pose> {
    chain.check_limits(q)?;
    let mut pose = Pose::identity();
    for row in &chain.rows {
        pose = pose.compose(&dh_transform(row, q)?);
    }
    Ok(pose)
}

/// 3 x n position Jacobian, column k = z_k x (p_e - p_k).
pub fn position_jacobian(chain: &KinematicChain, q: &[f64]) -> Result<Matrix3xX<f64>> {
    if q.len() != chain.joint_count() {
        return Err(Error::DimensionMismatch(format!(
            "joint vector has {} entries, chain has {} joints",
            q.len(),
            chain.joint_count()
        )));
    }
    let frames = chain_frames(chain, q);
    let mut jac = Matrix3xX::zeros(frames.joint_count);
    for k in 0..frames.joint_count {
        let col = frames.axes[k].cross(&(frames.fingertip - frames.origins[k]));
        jac.set_column(k, &col);
    }
    Ok(jac)
}

/// Window of negative det(JJ^T) values attributed to round-off.
const DET_CLAMP: f64 = 1e-12;

fn manipulability_from_frames(frames: &ChainFrames) -> Result<f64> {
    let n = frames.joint_count;
    // G = J J^T accumulated column by column, no allocation.
    let mut g = Matrix3::<f64>::zeros();
    for k in 0..n {
        let col = frames.axes[k].cross(&(frames.fingertip - frames.origins[k]));
        g += col * col.transpose();
    }
    let det = g.determinant();
    if det < -DET_CLAMP {
        return Err(Error::Numerical(format!(
            "det(JJ^T) = {det} below the round-off clamp window"
        )));
    }
    Ok(det.max(0.0).sqrt())
}

/// Manipulability w(q) = sqrt(det(J J^T)).
pub fn manipulability(chain: &KinematicChain, q: &[f64]) -> Result<f64> {
    if chain.joint_count() < 3 {
        return Err(Error::UnsupportedChain {
            needed: 3,
            actual: chain.joint_count(),
        });
    }
    if q.len() != chain.joint_count() {
        return Err(Error::DimensionMismatch(format!(
            "joint vector has {} entries, chain has {} joints",
            q.len(),
            chain.joint_count()
        )));
    }
    manipulability_from_frames(&chain_frames(chain, q))
}

/// Mean manipulability over every configuration of `grid`.
///
/// Chunks may be evaluated in parallel but partial sums are combined in fixed
/// chunk order, so the result is independent of thread count.
pub fn global_manipulability(chain: &KinematicChain, grid: &JointGrid) -> Result<f64> {
    if grid.joint_count() != chain.joint_count() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} axes, chain has {} joints",
            grid.joint_count(),
            chain.joint_count()
        )));
    }
    if chain.joint_count() < 3 {
        return Err(Error::UnsupportedChain {
            needed: 3,
            actual: chain.joint_count(),
        });
    }
    let total = grid.len();
    if total == 0 {
        return Err(Error::InvalidInput("empty joint grid".into()));
    }
    const CHUNK: usize = 8192;
    let n_chunks = total.div_ceil(CHUNK);
    let partials: Vec<Result<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut q = vec![0.0; chain.joint_count()];
            let mut sum = 0.0;
            for idx in c * CHUNK..(total.min((c + 1) * CHUNK)) {
                grid.config_at(idx, &mut q);
                sum += manipulability_from_frames(&chain_frames(chain, &q))?;
            }
            Ok(sum)
        })
        .collect();
    let mut sum = 0.0;
    for p in partials {
        sum += p?;
    }
    Ok(sum / total as f64)
}
