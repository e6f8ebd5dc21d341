//! First-order refinement with backtracking step control.

use serde::Serialize;

use crate::ik::loss::{FitProblem, LossGradient, LossTerms};
use crate::skeleton::Pose;

/// Steps below this count as underflow.
const MIN_STEP: f64 = 1e-14;
/// Bounds on the trial step proposed from curvature.
const MAX_STEP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFitResult {
    pub pose: Pose,
    pub final_loss: LossTerms,
    pub iterations_used: usize,
    /// The closed-form estimate the prior term is anchored to.
    pub init_pose: Pose,
    /// Total loss at the starting point followed by every accepted iterate.
    pub loss_history: Vec<f64>,
    pub stop: StopReason,
}

/// Descends from `start`, accepting a step only when it lowers the total loss.
///
/// Each iteration proposes a step length from the last accepted move
/// (`sᵀs / sᵀy`, falling back to the previous length when curvature is not
/// positive) and halves it until the loss decreases. Returns the best point seen.
pub(crate) fn refine(problem: &FitProblem<'_>, start: Pose, init_pose: Pose) -> FrameFitResult {
    let config = problem.config();
    let fit_root = config.fit_root_translation;
    let mut pose = start;
    let mut loss = problem.loss(&pose);
    let mut history = vec![loss.total];
    let mut grad = problem.gradient(&pose);
    let mut step = config.step_init;
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;

    while iterations < config.max_iters {
        if grad.max_abs() < config.grad_tol {
            stop = StopReason::GradientTolerance;
            break;
        }
        iterations += 1;

        let mut trial_step = step;
        let accepted = loop {
            if trial_step < MIN_STEP {
                break None;
            }
            let mut candidate = pose.clone();
            for (theta, g) in candidate.rotations.iter_mut().zip(&grad.rotations) {
                *theta -= g * trial_step;
            }
            if let (true, Some(g)) = (fit_root, &grad.root_translation) {
                candidate.root_translation -= g * trial_step;
            }
            let candidate_loss = problem.loss(&candidate);
            if candidate_loss.total < loss.total {
                break Some((candidate, candidate_loss));
            }
            trial_step *= 0.5;
        };
        let Some((next, next_loss)) = accepted else {
            stop = StopReason::StepUnderflow;
            break;
        };

        let next_grad = problem.gradient(&next);
        let (s, y) = flat_difference(&pose, &next, &grad, &next_grad, fit_root);
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        step = if sy > 0.0 { (ss / sy).clamp(MIN_STEP, MAX_STEP) } else { trial_step * 2.0 };

        pose = next;
        loss = next_loss;
        grad = next_grad;
        history.push(loss.total);
    }

    FrameFitResult { pose, final_loss: loss, iterations_used: iterations, init_pose, loss_history: history, stop }
}

fn flat_difference(
    a: &Pose,
    b: &Pose,
    ga: &LossGradient,
    gb: &LossGradient,
    fit_root: bool,
) -> (Vec<f64>, Vec<f64>) {
    let mut s = Vec::with_capacity(3 * a.rotations.len() + 3);
    let mut y = Vec::with_capacity(s.capacity());
    for j in 0..a.rotations.len() {
        s.extend((b.rotations[j] - a.rotations[j]).iter());
        y.extend((gb.rotations[j] - ga.rotations[j]).iter());
    }
    if let (true, Some(x), Some(z)) = (fit_root, &ga.root_translation, &gb.root_translation) {
        s.extend((b.root_translation - a.root_translation).iter());
        y.extend((z - x).iter());
    }
    (s, y)
}
