//! Two-stage inverse kinematics: closed-form geometric initialization per
//! frame, then gradient refinement of the axis-angle parameters under
//! position, prior and twist terms, warm-started from the previous frame.

mod init;
mod loss;
mod refine;

use serde::Serialize;
use thiserror::Error;

pub use init::{geometric_init_frame, geometric_init_with_fallback, GeometricInit};
pub use loss::{fit_loss, fit_loss_gradient, FitProblem, LossGradient, LossTerms};
pub use refine::{FrameFitResult, StopReason};

use crate::skeleton::{AnimationClip, JointTrajectory, Pose, Skeleton, SkeletonError};
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("trajectory has {got} joints, skeleton has {expected}")]
    JointCountMismatch { expected: usize, got: usize },
    #[error("invalid fit configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
}

/// Solver weights and stopping rules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig {
    pub lambda_prior: f64,
    pub lambda_twist: f64,
    pub max_iters: usize,
    /// Stop once the gradient's largest component falls below this.
    pub grad_tol: f64,
    pub step_init: f64,
    /// Optimize the root translation instead of reading it from the root target.
    pub fit_root_translation: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda_prior: 1e-3,
            lambda_twist: 1e-2,
            max_iters: 200,
            grad_tol: 1e-6,
            step_init: 1e-1,
            fit_root_translation: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        let bad = |m: &str| Err(FitError::BadConfig(m.to_string()));
        if !(self.lambda_prior >= 0.0 && self.lambda_prior.is_finite()) {
            return bad("lambda_prior must be a nonnegative number");
        }
        if !(self.lambda_twist >= 0.0 && self.lambda_twist.is_finite()) {
            return bad("lambda_twist must be a nonnegative number");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad("step_init must be positive");
        }
        Ok(())
    }
}

/// Refines one frame from `start`, with the prior anchored at `geo`.
pub fn refine_frame(
    skeleton: &Skeleton,
    target: &[Vec3],
    start: &Pose,
    geo: &Pose,
    mask: &[bool],
    config: &FitConfig,
) -> FrameFitResult {
    let problem = FitProblem::new(skeleton, target, mask, &geo.rotations, config);
    refine::refine(&problem, start.clone(), geo.clone())
}

/// Per-frame record of what the fit did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub frame: usize,
    pub loss: LossTerms,
    pub iterations: usize,
    pub stop: StopReason,
    /// Joints whose closed-form rotation had no usable child direction.
    pub degenerate_joints: Vec<usize>,
    /// The warm-started solution scored worse than the closed-form estimate and
    /// was replaced by a refinement started from that estimate.
    pub restarted_from_init: bool,
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

/// Fits a whole trajectory frame by frame.
///
/// Frame 0 starts from its own closed-form estimate; later frames start from
/// the previous solution, with the prior still anchored at their own estimate.
/// A warm-started result that ends above the closed-form estimate's loss is
/// discarded in favour of refining from that estimate.
pub fn fit_sequence(
    skeleton: &Skeleton,
    trajectory: &JointTrajectory,
    config: &FitConfig,
) -> Result<(AnimationClip, Vec<FitDiagnostics>), FitError> {
    config.validate()?;
    let n = skeleton.joint_count();
    if trajectory.joint_count() != n {
        return Err(FitError::JointCountMismatch { expected: n, got: trajectory.joint_count() });
    }
    let mask = trajectory.mask();
    let mut frames = Vec::with_capacity(trajectory.frame_count());
    let mut diagnostics = Vec::with_capacity(trajectory.frame_count());
    let mut previous: Option<Pose> = None;

    for t in 0..trajectory.frame_count() {
        let target = trajectory.frame(t);
        let init = geometric_init_with_fallback(skeleton, target, mask, previous.as_ref());
        let geo = init.pose;
        let start = match &previous {
            None => geo.clone(),
            Some(prev) => {
                let mut warm = prev.clone();
                if !config.fit_root_translation || mask[0] {
                    warm.root_translation = geo.root_translation;
                }
                warm
            }
        };

        let problem = FitProblem::new(skeleton, target, mask, &geo.rotations, config);
        let mut result = refine::refine(&problem, start, geo.clone());
        let mut restarted = false;
        let mut history = std::mem::take(&mut result.loss_history);
        if previous.is_some() {
            let geo_loss = problem.loss(&geo).total;
            if result.final_loss.total > geo_loss {
                let mut fresh = refine::refine(&problem, geo.clone(), geo.clone());
                fresh.iterations_used += result.iterations_used;
                history = std::mem::take(&mut fresh.loss_history);
                result = fresh;
                restarted = true;
            }
        }

        diagnostics.push(FitDiagnostics {
            frame: t,
            loss: result.final_loss,
            iterations: result.iterations_used,
            stop: result.stop,
            degenerate_joints: init.degenerate,
            restarted_from_init: restarted,
            loss_history: history,
        });
        frames.push(result.pose.clone());
        previous = Some(result.pose);
    }

    let frames = frames.iter().map(Pose::canonicalized).collect();
    let clip = AnimationClip::new(frames, trajectory.fps())?;
    Ok((clip, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{fk_sequence, forward_kinematics, validate_skeleton};

    fn skel() -> Skeleton {
        let names = (0..4).map(|i| format!("j{i}")).collect();
        validate_skeleton(
            names,
            &[-1, 0, 1, 1],
            vec![Vec3::zeros(), Vec3::new(0.0, 0.4, 0.0), Vec3::new(0.3, 0.2, 0.0), Vec3::new(-0.2, 0.3, 0.1)],
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        assert!(FitConfig { max_iters: 0, ..Default::default() }.validate().is_err());
        assert!(FitConfig { lambda_twist: -1.0, ..Default::default() }.validate().is_err());
        assert!(FitConfig { grad_tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(FitConfig { step_init: f64::NAN, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn already_optimal_start_is_returned() {
        let s = skel();
        let pose = Pose::new(vec![Vec3::new(0.1, 0.2, 0.0), Vec3::new(0.3, 0.0, 0.2), Vec3::zeros(), Vec3::zeros()], Vec3::zeros());
        let target = forward_kinematics(&s, &pose).unwrap();
        let cfg = FitConfig { lambda_twist: 0.0, ..Default::default() };
        let r = refine_frame(&s, &target, &pose, &pose, &[true; 4], &cfg);
        assert!(r.iterations_used <= 1);
        assert_eq!(r.pose, pose);
        assert_eq!(r.stop, StopReason::GradientTolerance);
    }

    #[test]
    fn mismatched_trajectory_is_rejected() {
        let s = skel();
        let traj = JointTrajectory::all_valid(vec![vec![Vec3::zeros(); 3]], 30.0).unwrap();
        assert_eq!(
            fit_sequence(&s, &traj, &FitConfig::default()).unwrap_err(),
            FitError::JointCountMismatch { expected: 4, got: 3 }
        );
    }

    #[test]
    fn static_trajectory_gives_identical_frames() {
        let s = skel();
        let pose = Pose::new(vec![Vec3::new(0.2, -0.3, 0.5), Vec3::new(0.0, 0.6, 0.1), Vec3::zeros(), Vec3::zeros()], Vec3::zeros());
        let clip = AnimationClip::new(vec![pose; 6], 30.0).unwrap();
        let traj = fk_sequence(&s, &clip).unwrap();
        let (fit, diag) = fit_sequence(&s, &traj, &FitConfig::default()).unwrap();
        assert_eq!(diag.len(), 6);
        for t in 1..6 {
            for j in 0..4 {
                assert!((fit.frames()[t].rotations[j] - fit.frames()[t - 1].rotations[j]).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn single_frame_is_init_plus_one_refine() {
        let s = skel();
        let pose = Pose::new(vec![Vec3::new(0.4, 0.1, -0.2), Vec3::new(0.2, 0.2, 0.2), Vec3::zeros(), Vec3::zeros()], Vec3::new(1.0, 0.0, 0.0));
        let target = forward_kinematics(&s, &pose).unwrap();
        let traj = JointTrajectory::all_valid(vec![target.clone()], 30.0).unwrap();
        let cfg = FitConfig::default();
        let (fit, _) = fit_sequence(&s, &traj, &cfg).unwrap();
        let geo = geometric_init_frame(&s, &target, &[true; 4]);
        let direct = refine_frame(&s, &target, &geo, &geo, &[true; 4], &cfg);
        assert_eq!(fit.frames()[0], direct.pose.canonicalized());
    }
}
