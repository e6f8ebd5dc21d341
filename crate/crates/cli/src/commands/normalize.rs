use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use rigfit_core::normalize::{denormalize, reattach_global_translation, remove_global_translation, sequence_normalize};
use rigfit_core::{NormalizationTransform, TrajectoryFile, Vec3};

use crate::failure::{invalid, Classify, CmdResult};
use crate::inputs::{read_text, read_trajectory, write_json};

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to store the transform (read from here with --invert). Printed to
    /// stdout when omitted.
    #[arg(long)]
    pub transform: Option<PathBuf>,
    /// Subtract the root position per frame before scaling.
    #[arg(long)]
    pub remove_translation: bool,
    /// Undo a previous normalization using --transform.
    #[arg(long, conflicts_with = "remove_translation")]
    pub invert: bool,
}

/// Saved inverse of a normalization run.
#[derive(Debug, Serialize, Deserialize)]
pub struct TransformFile {
    pub v: u32,
    pub center: [f64; 3],
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<[f64; 3]>>,
}

pub fn run(args: &NormalizeArgs) -> CmdResult {
    let file = read_trajectory(&args.input)?;
    let trajectory = file.to_trajectory().or_invalid("invalid trajectory")?;

    if args.invert {
        let path = args.transform.as_ref().ok_or_else(|| invalid("--invert needs --transform"))?;
        let t: TransformFile = serde_json::from_str(&read_text(path)?).or_invalid(format!("{} is not a transform file", path.display()))?;
        if t.v != 1 || !(t.scale > 0.0 && t.scale.is_finite()) {
            return Err(invalid(format!("{} is not a usable transform", path.display())));
        }
        let mut out = denormalize(&trajectory, &NormalizationTransform { center: t.center, scale: t.scale });
        if let Some(roots) = &t.roots {
            let roots: Vec<Vec3> = roots.iter().map(|r| Vec3::from(*r)).collect();
            out = reattach_global_translation(&out, &roots).or_invalid("transform does not match the trajectory")?;
        }
        let result = TrajectoryFile::from_trajectory(&out, file.joint_names, file.parents);
        return write_json(&args.out, &result);
    }

    let (centered, roots) = if args.remove_translation {
        let (t, roots) = remove_global_translation(&trajectory).or_invalid("cannot remove translation")?;
        (t, Some(roots))
    } else {
        (trajectory, None)
    };
    let (normalized, transform) = sequence_normalize(&centered).or_invalid("cannot normalize trajectory")?;
    let saved = TransformFile {
        v: 1,
        center: transform.center,
        scale: transform.scale,
        roots: roots.map(|r| r.iter().map(|p| [p.x, p.y, p.z]).collect()),
    };
    write_json(&args.out, &TrajectoryFile::from_trajectory(&normalized, file.joint_names, file.parents))?;
    match &args.transform {
        Some(path) => write_json(path, &saved),
        None => {
            println!("{}", serde_json::to_string_pretty(&saved).or_internal("cannot serialize transform")?);
            Ok(())
        }
    }
}
