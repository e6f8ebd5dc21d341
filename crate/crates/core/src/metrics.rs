//! Evaluation metrics: MPJPE, MPJVE, the masked L1 position objective, and the
//! CD-Skeleton point-to-bone Chamfer distance.
//!
//! Reductions run sequentially in frame then joint order so results are
//! bit-reproducible.

use serde::Serialize;
use thiserror::Error;

use crate::skeleton::{fk_sequence, validate_skeleton, AnimationClip, JointTrajectory, Skeleton, SkeletonError};
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("shape mismatch: {pred_frames}x{pred_joints} vs {gt_frames}x{gt_joints}")]
    ShapeMismatch { pred_frames: usize, pred_joints: usize, gt_frames: usize, gt_joints: usize },
    #[error("validity masks differ")]
    MaskMismatch,
    #[error("frame counts differ: {0} vs {1}")]
    FrameCountMismatch(usize, usize),
    #[error("skeleton has no bone segments to measure against")]
    NoSegments,
    #[error("no valid joints to average over")]
    NoValidJoints,
    #[error("parents and positions differ in length ({parents} vs {positions})")]
    ParentCount { parents: usize, positions: usize },
    #[error("invalid hierarchy: {0}")]
    Hierarchy(#[from] SkeletonError),
}

fn check_shapes(pred: &JointTrajectory, gt: &JointTrajectory) -> Result<(), MetricError> {
    if pred.frame_count() != gt.frame_count() || pred.joint_count() != gt.joint_count() {
        return Err(MetricError::ShapeMismatch {
            pred_frames: pred.frame_count(),
            pred_joints: pred.joint_count(),
            gt_frames: gt.frame_count(),
            gt_joints: gt.joint_count(),
        });
    }
    if pred.mask() != gt.mask() {
        return Err(MetricError::MaskMismatch);
    }
    Ok(())
}

/// Mean Euclidean joint error over all frames and valid joints.
pub fn mpjpe(pred: &JointTrajectory, gt: &JointTrajectory) -> Result<f64, MetricError> {
    check_shapes(pred, gt)?;
    let mask = gt.mask();
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p_row, g_row) in pred.positions().iter().zip(gt.positions()) {
        for j in 0..mask.len() {
            if mask[j] {
                sum += (p_row[j] - g_row[j]).norm();
                count += 1;
            }
        }
    }
    Ok(sum / count as f64)
}

/// Mean Euclidean error of per-joint velocities `(x[t+1] − x[t])·fps`.
/// A single frame has no velocity and scores 0.
pub fn mpjve(pred: &JointTrajectory, gt: &JointTrajectory) -> Result<f64, MetricError> {
    check_shapes(pred, gt)?;
    let t_count = gt.frame_count();
    if t_count < 2 {
        return Ok(0.0);
    }
    let mask = gt.mask();
    let (fp, fg) = (pred.fps(), gt.fps());
    let (p, g) = (pred.positions(), gt.positions());
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in 0..t_count - 1 {
        for j in 0..mask.len() {
            if mask[j] {
                let vp = (p[t + 1][j] - p[t][j]) * fp;
                let vg = (g[t + 1][j] - g[t][j]) * fg;
                sum += (vp - vg).norm();
                count += 1;
            }
        }
    }
    Ok(sum / count as f64)
}

/// `Σ_t Σ_j m_j ‖x̂ − x‖₁ / Σ_t Σ_j m_j`, the padded-rig position objective.
pub fn masked_l1_loss(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>], mask: &[bool]) -> Result<f64, MetricError> {
    let shape_err = || MetricError::ShapeMismatch {
        pred_frames: pred.len(),
        pred_joints: pred.first().map_or(0, Vec::len),
        gt_frames: gt.len(),
        gt_joints: gt.first().map_or(0, Vec::len),
    };
    if pred.len() != gt.len() {
        return Err(shape_err());
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p_row, g_row) in pred.iter().zip(gt) {
        if p_row.len() != mask.len() || g_row.len() != mask.len() {
            return Err(shape_err());
        }
        for j in 0..mask.len() {
            if mask[j] {
                sum += (p_row[j] - g_row[j]).abs().sum();
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(MetricError::NoValidJoints);
    }
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentProjection {
    pub distance: f64,
    /// Segment parameter after clipping to `[0, 1]`.
    pub t: f64,
    pub closest: Vec3,
}

/// Distance from `p` to the segment `b1–b2`; a zero-length segment is the point `b1`.
pub fn point_to_segment_distance(p: &Vec3, b1: &Vec3, b2: &Vec3) -> SegmentProjection {
    let d = b2 - b1;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 { ((p - b1).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let closest = b1 + d * t;
    SegmentProjection { distance: (p - closest).norm(), t, closest }
}

/// Joint positions plus a parent array, as compared by CD-Skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonInstance {
    positions: Vec<Vec3>,
    parents: Vec<i64>,
    valid: Vec<bool>,
}

impl SkeletonInstance {
    pub fn new(positions: Vec<Vec3>, parents: Vec<i64>) -> Result<Self, MetricError> {
        let valid = vec![true; positions.len()];
        Self::with_mask(positions, parents, valid)
    }

    /// Invalid joints are skipped as query points and as segment endpoints.
    pub fn with_mask(positions: Vec<Vec3>, parents: Vec<i64>, valid: Vec<bool>) -> Result<Self, MetricError> {
        if parents.len() != positions.len() || valid.len() != positions.len() {
            return Err(MetricError::ParentCount { parents: parents.len(), positions: positions.len() });
        }
        let names = (0..parents.len()).map(|i| i.to_string()).collect();
        validate_skeleton(names, &parents, vec![Vec3::zeros(); parents.len()])?;
        for (j, p) in positions.iter().enumerate() {
            if valid[j] && !p.iter().all(|c| c.is_finite()) {
                return Err(SkeletonError::NonFinitePosition { frame: 0, joint: j }.into());
            }
        }
        Ok(Self { positions, parents, valid })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn parents(&self) -> &[i64] {
        &self.parents
    }

    /// `(x_i, x_parent(i))` for every non-root joint with both ends valid.
    pub fn segments(&self) -> Vec<(Vec3, Vec3)> {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| {
                let p = usize::try_from(p).ok()?;
                (self.valid[i] && self.valid[p]).then(|| (self.positions[i], self.positions[p]))
            })
            .collect()
    }

    /// Same instance with every position mapped through `f`.
    pub fn map_positions(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        Self { positions: self.positions.iter().map(f).collect(), parents: self.parents.clone(), valid: self.valid.clone() }
    }
}

/// Mean over valid joints of `a` of the distance to the nearest bone of `b`.
pub fn cd_skeleton_directed(a: &SkeletonInstance, b: &SkeletonInstance) -> Result<f64, MetricError> {
    let segments = b.segments();
    if segments.is_empty() {
        return Err(MetricError::NoSegments);
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, _) in a.positions.iter().zip(&a.valid).filter(|(_, &v)| v) {
        let nearest = segments
            .iter()
            .map(|(b1, b2)| point_to_segment_distance(p, b1, b2).distance)
            .fold(f64::INFINITY, f64::min);
        sum += nearest;
        count += 1;
    }
    if count == 0 {
        return Err(MetricError::NoValidJoints);
    }
    Ok(sum / count as f64)
}

/// Symmetric CD-Skeleton, `½(D(A→B) + D(B→A))`.
pub fn cd_skeleton(a: &SkeletonInstance, b: &SkeletonInstance) -> Result<f64, MetricError> {
    let ab = cd_skeleton_directed(a, b)?;
    let ba = cd_skeleton_directed(b, a)?;
    Ok(0.5 * (ab + ba))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceScore {
    pub per_frame: Vec<f64>,
    pub mean: f64,
}

/// Per-frame CD-Skeleton between two trajectories and its unweighted mean.
pub fn cd_skeleton_sequence(
    pred: &JointTrajectory,
    pred_parents: &[i64],
    gt: &JointTrajectory,
    gt_parents: &[i64],
) -> Result<SequenceScore, MetricError> {
    if pred.frame_count() != gt.frame_count() {
        return Err(MetricError::FrameCountMismatch(pred.frame_count(), gt.frame_count()));
    }
    let mut per_frame = Vec::with_capacity(gt.frame_count());
    for t in 0..gt.frame_count() {
        let a = SkeletonInstance::with_mask(pred.frame(t).to_vec(), pred_parents.to_vec(), pred.mask().to_vec())?;
        let b = SkeletonInstance::with_mask(gt.frame(t).to_vec(), gt_parents.to_vec(), gt.mask().to_vec())?;
        per_frame.push(cd_skeleton(&a, &b)?);
    }
    Ok(SequenceScore { mean: mean(&per_frame), per_frame })
}

/// CD-Skeleton of an animated rig (through forward kinematics) against a trajectory.
pub fn cd_skeleton_clip(
    skeleton: &Skeleton,
    clip: &AnimationClip,
    gt: &JointTrajectory,
    gt_parents: &[i64],
) -> Result<SequenceScore, MetricError> {
    let pred = fk_sequence(skeleton, clip)?;
    cd_skeleton_sequence(&pred, &skeleton.parent_indices(), gt, gt_parents)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
