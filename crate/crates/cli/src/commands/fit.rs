use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use log::{info, warn};
use serde::Serialize;

use rigfit_core::ik::StopReason;
use rigfit_core::{fit_sequence, fk_sequence, mpjpe, parse_bvh, write_bvh, FitConfig, JointTrajectory, Skeleton};

use crate::failure::{invalid, Classify, CmdResult};
use crate::inputs::{read_bvh, read_text, read_trajectory, write_json, write_text};

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Rig whose hierarchy, offsets and channel layout the output uses.
    #[arg(long)]
    pub rig: PathBuf,
    /// Trajectory JSON to fit.
    #[arg(long)]
    pub traj: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-frame loss report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// JSON object mapping trajectory joint names to rig joint names.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = FitConfig::default().lambda_prior)]
    pub lambda_prior: f64,
    #[arg(long, default_value_t = FitConfig::default().lambda_twist)]
    pub lambda_twist: f64,
    #[arg(long, default_value_t = FitConfig::default().max_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = FitConfig::default().grad_tol)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = FitConfig::default().step_init)]
    pub step_init: f64,
    #[arg(long)]
    pub fit_root_translation: bool,
}

impl FitArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            lambda_prior: self.lambda_prior,
            lambda_twist: self.lambda_twist,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            step_init: self.step_init,
            fit_root_translation: self.fit_root_translation,
        }
    }
}

#[derive(Serialize)]
struct FrameReport {
    frame: usize,
    loss_total: f64,
    loss_pos: f64,
    loss_prior: f64,
    loss_twist: f64,
    iters: usize,
    stop: StopReason,
    degenerate_joints: Vec<usize>,
    restarted_from_init: bool,
}

#[derive(Serialize)]
struct FitReport {
    v: u32,
    config: FitConfig,
    frames: Vec<FrameReport>,
    mpjpe_fk: f64,
}

/// Reorders trajectory joints into rig order. Every rig joint must be matched.
fn match_joints(
    skeleton: &Skeleton,
    names: &[String],
    trajectory: &JointTrajectory,
    map: &BTreeMap<String, String>,
) -> CmdResult<JointTrajectory> {
    let mut source = vec![None; skeleton.joint_count()];
    for (k, name) in names.iter().enumerate() {
        let target = map.get(name).unwrap_or(name);
        match skeleton.index_of(target) {
            Some(j) if source[j].is_none() => source[j] = Some(k),
            Some(_) => return Err(invalid(format!("rig joint `{target}` is matched more than once"))),
            None => warn!("trajectory joint `{name}` has no rig joint and is ignored"),
        }
    }
    let unmatched: Vec<&str> = (0..skeleton.joint_count()).filter(|&j| source[j].is_none()).map(|j| skeleton.name(j)).collect();
    if !unmatched.is_empty() {
        return Err(invalid(format!("rig joints missing from the trajectory: {}", unmatched.join(", "))));
    }
    let source: Vec<usize> = source.into_iter().flatten().collect();
    let positions = trajectory.positions().iter().map(|row| source.iter().map(|&k| row[k]).collect()).collect();
    let mask = source.iter().map(|&k| trajectory.mask()[k]).collect();
    JointTrajectory::new(positions, mask, trajectory.fps()).or_invalid("trajectory does not fit the rig")
}

pub fn run(args: &FitArgs) -> CmdResult {
    let config = args.config();
    config.validate().or_invalid("invalid fit settings")?;
    let rig = read_bvh(&args.rig)?;
    let file = read_trajectory(&args.traj)?;
    let map: BTreeMap<String, String> = match &args.map {
        Some(path) => serde_json::from_str(&read_text(path)?).or_invalid(format!("{} is not a name map", path.display()))?,
        None => BTreeMap::new(),
    };
    let raw = file.to_trajectory().or_invalid("invalid trajectory")?;
    let skeleton = rig.skeleton();
    let trajectory = match_joints(skeleton, &file.joint_names, &raw, &map)?;
    info!("fitting {} frames onto {} joints", trajectory.frame_count(), skeleton.joint_count());

    let (clip, diagnostics) = fit_sequence(skeleton, &trajectory, &config).or_invalid("fit failed")?;
    let doc = rig.with_clip(clip).or_internal("fitted clip does not fit the rig layout")?;
    let text = write_bvh(&doc).or_internal("cannot serialize BVH")?;
    write_text(&args.out, &text)?;

    // measure what was written, after rounding to file precision
    let written = parse_bvh(&text).or_internal("written BVH does not parse")?;
    let fk = fk_sequence(written.skeleton(), written.clip()).or_internal("forward kinematics failed")?;
    let fk = fk.with_mask(trajectory.mask().to_vec()).or_internal("mask mismatch")?;
    let mpjpe_fk = mpjpe(&fk, &trajectory).or_internal("cannot measure fit")?;
    info!("mpjpe of written clip: {mpjpe_fk:.6e}");

    if let Some(path) = &args.report {
        let frames = diagnostics
            .into_iter()
            .map(|d| FrameReport {
                frame: d.frame,
                loss_total: d.loss.total,
                loss_pos: d.loss.pos,
                loss_prior: d.loss.prior,
                loss_twist: d.loss.twist,
                iters: d.iterations,
                stop: d.stop,
                degenerate_joints: d.degenerate_joints,
                restarted_from_init: d.restarted_from_init,
            })
            .collect();
        write_json(path, &FitReport { v: 1, config, frames, mpjpe_fk })?;
    }
    Ok(())
}
