//! Scale normalization for rigs and joint sequences.
//!
//! Rigs are scaled so their rest pose has unit maximum extent. Sequences have
//! the per-frame root position removed and are then scaled uniformly into
//! `[−1, 1]³` using one bounding box over all frames and valid joints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skeleton::{end_site_positions, rest_pose_positions, JointTrajectory, Pose, Skeleton};
use crate::Vec3;

/// Extents at or below this are degenerate.
const MIN_EXTENT: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizeError {
    #[error("bounding box has zero extent")]
    Degenerate,
    #[error("root joint is masked out; its translation is unknown")]
    MaskedRoot,
    #[error("{got} root positions given for {expected} frames")]
    RootCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        Some(it.fold(Aabb { min: first, max: first }, |b, p| Aabb { min: b.min.inf(p), max: b.max.sup(p) }))
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn max_extent(&self) -> f64 {
        self.extent().max()
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }
}

/// Uniform map `x ↦ (x − center)·scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub center: [f64; 3],
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        Self { center: [0.0; 3], scale: 1.0 }
    }

    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p - self.center()) * self.scale
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        p / self.scale + self.center()
    }
}

/// Scales the rig so the bounding box of its rest pose (joints and end sites)
/// has unit maximum extent. The transform has zero center: offsets carry no
/// absolute position.
pub fn rest_normalize(skeleton: &Skeleton) -> Result<(Skeleton, NormalizationTransform), NormalizeError> {
    let mut points = rest_pose_positions(skeleton);
    let rest = Pose::identity(skeleton.joint_count());
    points.extend(end_site_positions(skeleton, &rest).expect("identity pose matches the skeleton"));
    let aabb = Aabb::from_points(&points).ok_or(NormalizeError::Degenerate)?;
    let extent = aabb.max_extent();
    if !(extent > MIN_EXTENT) {
        return Err(NormalizeError::Degenerate);
    }
    let scale = 1.0 / extent;
    Ok((skeleton.scaled(scale), NormalizationTransform { center: [0.0; 3], scale }))
}

/// Subtracts joint 0's position from every joint, frame by frame. Joint 0 is
/// the root in parent-first order. Returns the extracted root positions.
pub fn remove_global_translation(trajectory: &JointTrajectory) -> Result<(JointTrajectory, Vec<Vec3>), NormalizeError> {
    if !trajectory.mask()[0] {
        return Err(NormalizeError::MaskedRoot);
    }
    let roots: Vec<Vec3> = trajectory.positions().iter().map(|row| row[0]).collect();
    Ok((trajectory.map_positions(|t, _, p| p - roots[t]), roots))
}

pub fn reattach_global_translation(trajectory: &JointTrajectory, roots: &[Vec3]) -> Result<JointTrajectory, NormalizeError> {
    if roots.len() != trajectory.frame_count() {
        return Err(NormalizeError::RootCount { expected: trajectory.frame_count(), got: roots.len() });
    }
    Ok(trajectory.map_positions(|t, _, p| p + roots[t]))
}

/// Bounding box of every valid joint across all frames.
pub fn sequence_aabb(trajectory: &JointTrajectory) -> Option<Aabb> {
    let mask = trajectory.mask();
    Aabb::from_points(
        trajectory.positions().iter().flat_map(|row| row.iter().zip(mask).filter(|(_, &m)| m).map(|(p, _)| p)),
    )
}

/// Centers the sequence's bounding box and scales its longest side to 2.
pub fn sequence_normalize(trajectory: &JointTrajectory) -> Result<(JointTrajectory, NormalizationTransform), NormalizeError> {
    let aabb = sequence_aabb(trajectory).ok_or(NormalizeError::Degenerate)?;
    let extent = aabb.max_extent();
    if !(extent > MIN_EXTENT) {
        return Err(NormalizeError::Degenerate);
    }
    let c = aabb.center();
    let transform = NormalizationTransform { center: [c.x, c.y, c.z], scale: 2.0 / extent };
    Ok((apply_transform(trajectory, &transform), transform))
}

pub fn apply_transform(trajectory: &JointTrajectory, transform: &NormalizationTransform) -> JointTrajectory {
    trajectory.map_positions(|_, _, p| transform.apply(p))
}

pub fn denormalize(trajectory: &JointTrajectory, transform: &NormalizationTransform) -> JointTrajectory {
    trajectory.map_positions(|_, _, p| transform.invert(p))
}

/// Output of the full sequence pipeline, with what is needed to undo it.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSequence {
    pub trajectory: JointTrajectory,
    pub roots: Vec<Vec3>,
    pub transform: NormalizationTransform,
}

/// Translation removal followed by sequence scaling.
pub fn normalize_sequence(trajectory: &JointTrajectory) -> Result<NormalizedSequence, NormalizeError> {
    let (centered, roots) = remove_global_translation(trajectory)?;
    let (scaled, transform) = sequence_normalize(&centered)?;
    Ok(NormalizedSequence { trajectory: scaled, roots, transform })
}
