use std::path::{Path, PathBuf};

use clap::Args;

use rigfit_core::normalize::rest_normalize;
use rigfit_core::synth::{seeded_clip, MotionParams};
use rigfit_core::{fk_sequence, parse_bvh, write_bvh, TrajectoryFile};

use crate::failure::{invalid, Classify, CmdResult};
use crate::inputs::{read_bvh, write_json, write_text};

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub rig: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub frames: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix: writes `<out>.bvh` and `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-axis rotation amplitude in radians.
    #[arg(long, default_value_t = MotionParams::default().amplitude)]
    pub amplitude: f64,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

pub fn run(args: &SynthArgs) -> CmdResult {
    if args.frames == 0 {
        return Err(invalid("--frames must be at least 1"));
    }
    if !(args.amplitude >= 0.0 && args.amplitude.is_finite()) {
        return Err(invalid("--amplitude must be a nonnegative number"));
    }
    let rig = read_bvh(&args.rig)?;
    let skeleton = rig.skeleton();
    let has_root_position = rig.channels(0).iter().any(|c| c.position_axis().is_some());
    // root sway at a tenth of the rig's size, when the rig can carry it
    let translation_amplitude = match (has_root_position, rest_normalize(skeleton)) {
        (true, Ok((_, t))) => 0.1 / t.scale,
        _ => 0.0,
    };
    let params = MotionParams {
        frames: args.frames,
        fps: 1.0 / rig.frame_time(),
        amplitude: args.amplitude,
        translation_amplitude,
        ..MotionParams::default()
    };
    let clip = seeded_clip(skeleton, &params, args.seed);
    let doc = rig.with_clip(clip).or_internal("clip does not fit the rig layout")?;
    let text = write_bvh(&doc).or_internal("cannot serialize BVH")?;

    // positions come from the clip as written, so both files agree exactly
    let written = parse_bvh(&text).or_internal("written BVH does not parse")?;
    let trajectory = fk_sequence(written.skeleton(), written.clip()).or_internal("forward kinematics failed")?;
    let file = TrajectoryFile::from_trajectory(&trajectory, skeleton.names().to_vec(), Some(skeleton.parent_indices()));

    write_text(&with_suffix(&args.out, ".bvh"), &text)?;
    write_json(&with_suffix(&args.out, ".json"), &file)
}
