//! Closed-form per-frame initialization.
//!
//! Joints are visited parent-first. Each joint's local rotation aligns its
//! rest-space child offsets with the observed child directions, expressed in
//! the world frame accumulated from the joints already solved. One usable child
//! means a direct vector alignment; several mean an orthogonal Procrustes fit.

use crate::rotation::{orthogonal_procrustes, rotation_between_vectors, Rotation3};
use crate::skeleton::{Pose, Skeleton};
use crate::Vec3;

/// Observed bones shorter than this carry no direction.
const MIN_OBSERVED_LENGTH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricInit {
    pub pose: Pose,
    /// Joints with children where no usable direction existed; they kept the
    /// fallback rotation (identity without one).
    pub degenerate: Vec<usize>,
}

pub fn geometric_init_frame(skeleton: &Skeleton, target: &[Vec3], mask: &[bool]) -> Pose {
    geometric_init_with_fallback(skeleton, target, mask, None).pose
}

/// Like [`geometric_init_frame`] but reports degenerate joints and, for those,
/// keeps the rotation from `fallback` (typically the previous frame's solution).
pub fn geometric_init_with_fallback(
    skeleton: &Skeleton,
    target: &[Vec3],
    mask: &[bool],
    fallback: Option<&Pose>,
) -> GeometricInit {
    let n = skeleton.joint_count();
    let mut globals: Vec<Rotation3> = Vec::with_capacity(n);
    let mut rotations = Vec::with_capacity(n);
    let mut degenerate = Vec::new();

    for j in 0..n {
        let parent_global = skeleton.parent(j).map_or_else(Rotation3::identity, |p| globals[p]);
        let to_parent_frame = parent_global.transpose();

        let mut rest_dirs = Vec::new();
        let mut obs_dirs = Vec::new();
        let mut has_bone_children = false;
        for &c in skeleton.children(j) {
            if skeleton.is_zero_length(c) {
                continue;
            }
            has_bone_children = true;
            if !(mask[j] && mask[c]) {
                continue;
            }
            let observed = target[c] - target[j];
            let len = observed.norm();
            if !(len > MIN_OBSERVED_LENGTH) {
                continue;
            }
            rest_dirs.push(skeleton.offset(c).normalize());
            obs_dirs.push(to_parent_frame.apply(&(observed / len)));
        }

        let local = match rest_dirs.len() {
            0 => {
                if has_bone_children {
                    degenerate.push(j);
                    fallback.map_or_else(Rotation3::identity, |f| Rotation3::from_axis_angle(&f.rotations[j]))
                } else {
                    Rotation3::identity()
                }
            }
            1 => rotation_between_vectors(&rest_dirs[0], &obs_dirs[0]).unwrap_or_default(),
            _ => match orthogonal_procrustes(&rest_dirs, &obs_dirs, None) {
                Ok(fit) if !fit.degenerate => fit.rotation,
                _ => {
                    degenerate.push(j);
                    fallback.map_or_else(Rotation3::identity, |f| Rotation3::from_axis_angle(&f.rotations[j]))
                }
            },
        };
        globals.push(parent_global * local);
        rotations.push(local.to_axis_angle());
    }

    let root = 0;
    let root_translation = if mask[root] {
        target[root]
    } else {
        fallback.map_or_else(Vec3::zeros, |f| f.root_translation)
    };
    GeometricInit { pose: Pose::new(rotations, root_translation), degenerate }
}
