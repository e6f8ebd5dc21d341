use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use rigfit_core::metrics::cd_skeleton_sequence;
use rigfit_core::normalize::normalize_sequence;
use rigfit_core::{mpjpe, mpjve, JointTrajectory};

use crate::failure::{invalid, Classify, CmdResult};
use crate::inputs::{read_motion, Motion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Mpjpe,
    Mpjve,
    Cds,
    All,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Prediction, BVH (animated through forward kinematics) or trajectory JSON.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground truth, BVH or trajectory JSON.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::All)]
    pub metric: Metric,
    /// Remove root translation and scale each input into [-1, 1]³ first.
    #[arg(long)]
    pub normalize: bool,
}

fn normalized(motion: Motion) -> CmdResult<Motion> {
    let n = normalize_sequence(&motion.trajectory).or_invalid("cannot normalize input")?;
    Ok(Motion { trajectory: n.trajectory, ..motion })
}

/// `pred` reordered to `gt`'s joint names, both restricted to joints valid in each.
fn corresponding(pred: &Motion, gt: &Motion) -> CmdResult<(JointTrajectory, JointTrajectory)> {
    let index: BTreeMap<&str, usize> = pred.names.iter().enumerate().map(|(k, n)| (n.as_str(), k)).collect();
    let missing: Vec<&str> = gt.names.iter().map(String::as_str).filter(|n| !index.contains_key(n)).collect();
    if !missing.is_empty() || pred.names.len() != gt.names.len() {
        let extra: Vec<&str> = pred.names.iter().map(String::as_str).filter(|n| !gt.names.iter().any(|g| g == n)).collect();
        return Err(invalid(format!(
            "joint names differ (missing from prediction: [{}], not in ground truth: [{}])",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    let order: Vec<usize> = gt.names.iter().map(|n| index[n.as_str()]).collect();
    let (p, g) = (&pred.trajectory, &gt.trajectory);
    if p.frame_count() != g.frame_count() {
        return Err(invalid(format!("frame counts differ: {} vs {}", p.frame_count(), g.frame_count())));
    }
    let mask: Vec<bool> = order.iter().enumerate().map(|(j, &k)| g.mask()[j] && p.mask()[k]).collect();
    let positions = p.positions().iter().map(|row| order.iter().map(|&k| row[k]).collect()).collect();
    let pred = JointTrajectory::new(positions, mask.clone(), p.fps()).or_invalid("no joint is valid in both inputs")?;
    let gt = g.clone().with_mask(mask).or_invalid("no joint is valid in both inputs")?;
    Ok((pred, gt))
}

fn parents_of<'a>(motion: &'a Motion, other: &'a Motion) -> CmdResult<&'a [i64]> {
    if let Some(p) = &motion.parents {
        return Ok(p);
    }
    match &other.parents {
        Some(p) if motion.names == other.names => Ok(p),
        _ => Err(invalid("CD-Skeleton needs a hierarchy: add `parents` to the trajectory file")),
    }
}

pub fn run(args: &EvalArgs) -> CmdResult {
    let mut pred = read_motion(&args.pred)?;
    let mut gt = read_motion(&args.gt)?;
    if args.normalize {
        pred = normalized(pred)?;
        gt = normalized(gt)?;
    }

    let wants = |m: Metric| args.metric == m || args.metric == Metric::All;
    let mut report = serde_json::Map::new();
    report.insert("space".into(), if args.normalize { "normalized" } else { "input" }.into());
    if wants(Metric::Mpjpe) || wants(Metric::Mpjve) {
        let (p, g) = corresponding(&pred, &gt)?;
        if wants(Metric::Mpjpe) {
            report.insert("mpjpe".into(), mpjpe(&p, &g).or_invalid("cannot compute MPJPE")?.into());
        }
        if wants(Metric::Mpjve) {
            report.insert("mpjve".into(), mpjve(&p, &g).or_invalid("cannot compute MPJVE")?.into());
        }
    }
    if wants(Metric::Cds) {
        let pp = parents_of(&pred, &gt)?;
        let gp = parents_of(&gt, &pred)?;
        let score = cd_skeleton_sequence(&pred.trajectory, pp, &gt.trajectory, gp).or_invalid("cannot compute CD-Skeleton")?;
        report.insert("cds".into(), score.mean.into());
    }
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(report)).or_internal("cannot serialize report")?;
    println!("{text}");
    Ok(())
}
