//! Fitting objective `L_pos + λ_prior·L_prior + λ_twist·L_twist` and its
//! analytic gradient through forward kinematics.

use serde::Serialize;

use crate::ik::FitConfig;
use crate::rotation::left_jacobian;
use crate::skeleton::{fk_state, Pose, Skeleton};
use crate::Vec3;

/// Value of each term of the objective at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LossTerms {
    pub total: f64,
    pub pos: f64,
    pub prior: f64,
    pub twist: f64,
}

/// Gradient of the total objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub rotations: Vec<Vec3>,
    /// Present only when the root translation is a free parameter.
    pub root_translation: Option<Vec3>,
}

impl LossGradient {
    /// Rotation components joint by joint, then the root translation if present.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.rotations.iter().flat_map(|g| g.iter().copied()).collect();
        if let Some(r) = &self.root_translation {
            out.extend(r.iter());
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.to_flat().iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// One frame's fitting problem: rig, targets, mask, and the prior anchor.
pub struct FitProblem<'a> {
    skeleton: &'a Skeleton,
    target: &'a [Vec3],
    mask: &'a [bool],
    geo: &'a [Vec3],
    config: &'a FitConfig,
    bone_dirs: Vec<Option<Vec3>>,
    valid: usize,
}

impl<'a> FitProblem<'a> {
    pub fn new(
        skeleton: &'a Skeleton,
        target: &'a [Vec3],
        mask: &'a [bool],
        geo: &'a [Vec3],
        config: &'a FitConfig,
    ) -> Self {
        let n = skeleton.joint_count();
        assert_eq!(target.len(), n, "target size must match the skeleton");
        assert_eq!(mask.len(), n, "mask size must match the skeleton");
        assert_eq!(geo.len(), n, "prior anchor size must match the skeleton");
        let bone_dirs = (0..n).map(|j| skeleton.bone_direction(j)).collect();
        let valid = mask.iter().filter(|&&m| m).count();
        Self { skeleton, target, mask, geo, config, bone_dirs, valid }
    }

    pub fn config(&self) -> &FitConfig {
        self.config
    }

    pub fn loss(&self, pose: &Pose) -> LossTerms {
        let n = self.skeleton.joint_count() as f64;
        let fk = fk_state(self.skeleton, &pose.rotations, &pose.root_translation);
        let mut pos = 0.0;
        for j in 0..self.target.len() {
            if self.mask[j] {
                pos += (fk.positions[j] - self.target[j]).norm_squared();
            }
        }
        pos /= self.valid.max(1) as f64;
        let mut prior = 0.0;
        let mut twist = 0.0;
        for (j, theta) in pose.rotations.iter().enumerate() {
            prior += (theta - self.geo[j]).norm_squared();
            if let Some(u) = &self.bone_dirs[j] {
                twist += theta.dot(u).powi(2);
            }
        }
        prior /= n;
        twist /= n;
        LossTerms {
            total: pos + self.config.lambda_prior * prior + self.config.lambda_twist * twist,
            pos,
            prior,
            twist,
        }
    }

    /// Reverse pass over the tree: the position term's gradient for joint `j`
    /// is `(2/N_valid)·W_jᵀ Σ_{k below j} (P_k − P_j) × r_k`, where
    /// `W_j = G_parent(j)·J(θ_j)` maps parameter changes to world angular rates.
    pub fn gradient(&self, pose: &Pose) -> LossGradient {
        let skel = self.skeleton;
        let n = skel.joint_count();
        let fk = fk_state(skel, &pose.rotations, &pose.root_translation);
        let scale_pos = 2.0 / self.valid.max(1) as f64;
        let scale_reg = 2.0 / n as f64;

        let mut moment = vec![Vec3::zeros(); n];
        let mut residual = vec![Vec3::zeros(); n];
        for j in 0..n {
            if self.mask[j] {
                let r = fk.positions[j] - self.target[j];
                residual[j] = r;
                moment[j] = fk.positions[j].cross(&r);
            }
        }
        for j in (1..n).rev() {
            if let Some(p) = skel.parent(j) {
                let (m, r) = (moment[j], residual[j]);
                moment[p] += m;
                residual[p] += r;
            }
        }

        let mut rotations = Vec::with_capacity(n);
        for j in 0..n {
            let theta = &pose.rotations[j];
            let torque = moment[j] - fk.positions[j].cross(&residual[j]);
            let jac = left_jacobian(theta);
            let world = match skel.parent(j) {
                Some(p) => fk.globals[p].matrix() * jac,
                None => jac,
            };
            let mut g = world.transpose() * torque * scale_pos;
            g += (theta - self.geo[j]) * (scale_reg * self.config.lambda_prior);
            if let Some(u) = &self.bone_dirs[j] {
                g += u * (scale_reg * self.config.lambda_twist * theta.dot(u));
            }
            rotations.push(g);
        }

        let root = skel.parents().iter().position(Option::is_none).unwrap_or(0);
        let root_translation = self.config.fit_root_translation.then(|| residual[root] * scale_pos);
        LossGradient { rotations, root_translation }
    }
}

/// Objective terms for axis-angle parameters `theta` (root translation taken from `pose`).
pub fn fit_loss(
    skeleton: &Skeleton,
    pose: &Pose,
    target: &[Vec3],
    geo: &[Vec3],
    mask: &[bool],
    config: &FitConfig,
) -> LossTerms {
    FitProblem::new(skeleton, target, mask, geo, config).loss(pose)
}

pub fn fit_loss_gradient(
    skeleton: &Skeleton,
    pose: &Pose,
    target: &[Vec3],
    geo: &[Vec3],
    mask: &[bool],
    config: &FitConfig,
) -> LossGradient {
    FitProblem::new(skeleton, target, mask, geo, config).gradient(pose)
}
