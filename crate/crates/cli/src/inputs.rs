//! Loading and saving the file types the commands share.

use std::fs;
use std::path::Path;

use rigfit_core::trajectory_file::TrajectoryFileError;
use rigfit_core::{fk_sequence, parse_bvh, BvhDocument, JointTrajectory, TrajectoryFile};

use crate::failure::{Classify, CmdResult, Failure, Kind};

pub fn read_text(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path).or_io(format!("cannot read {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).or_io(format!("cannot write {}", path.display()))
}

pub fn read_bvh(path: &Path) -> CmdResult<BvhDocument> {
    let text = read_text(path)?;
    parse_bvh(&text).or_invalid(format!("{} is not a valid BVH file", path.display()))
}

pub fn read_trajectory(path: &Path) -> CmdResult<TrajectoryFile> {
    let text = read_text(path)?;
    TrajectoryFile::from_json(&text).map_err(|e| {
        let kind = if matches!(e, TrajectoryFileError::Io(_)) { Kind::Io } else { Kind::Validation };
        Failure { kind, error: anyhow::Error::new(e).context(format!("{} is not a valid trajectory file", path.display())) }
    })
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).or_internal("cannot serialize JSON")?;
    text.push('\n');
    write_text(path, &text)
}

/// Joint positions from either a BVH clip (through forward kinematics) or a
/// trajectory file, with names and parents when known.
pub struct Motion {
    pub names: Vec<String>,
    pub parents: Option<Vec<i64>>,
    pub trajectory: JointTrajectory,
}

pub fn read_motion(path: &Path) -> CmdResult<Motion> {
    let is_bvh = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("bvh"));
    if is_bvh {
        let doc = read_bvh(path)?;
        let trajectory = fk_sequence(doc.skeleton(), doc.clip()).or_internal("forward kinematics failed")?;
        let skel = doc.skeleton();
        Ok(Motion { names: skel.names().to_vec(), parents: Some(skel.parent_indices()), trajectory })
    } else {
        let file = read_trajectory(path)?;
        let trajectory = file.to_trajectory().or_invalid(format!("{} is not a valid trajectory file", path.display()))?;
        Ok(Motion { names: file.joint_names, parents: file.parents, trajectory })
    }
}
