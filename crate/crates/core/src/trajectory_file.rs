//! JSON container for joint trajectories.
//!
//! ```json
//! {"v": 1, "fps": 30.0, "joint_names": ["hips", "spine"],
//!  "mask": [true, true], "parents": [-1, 0],
//!  "frames": [[[0, 0, 0], [0, 1, 0]]]}
//! ```
//!
//! `mask` defaults to all valid. `parents` is optional and only used by
//! metrics that need bones.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skeleton::{JointTrajectory, SkeletonError};
use crate::Vec3;

pub const TRAJECTORY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TrajectoryFileError {
    #[error("unsupported trajectory file version {0}")]
    Version(u32),
    #[error("{names} joint names for {joints} joints")]
    NameCount { names: usize, joints: usize },
    #[error("{parents} parents for {joints} joints")]
    ParentCount { parents: usize, joints: usize },
    #[error("frame {frame} has {got} joints, expected {expected}")]
    RaggedFrame { frame: usize, got: usize, expected: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Trajectory(#[from] SkeletonError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub v: u32,
    pub fps: f64,
    pub joint_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parents: Option<Vec<i64>>,
    pub frames: Vec<Vec<[f64; 3]>>,
}

impl TrajectoryFile {
    pub fn from_trajectory(trajectory: &JointTrajectory, joint_names: Vec<String>, parents: Option<Vec<i64>>) -> Self {
        let mask = trajectory.mask();
        Self {
            v: TRAJECTORY_VERSION,
            fps: trajectory.fps(),
            joint_names,
            mask: if mask.iter().all(|&m| m) { None } else { Some(mask.to_vec()) },
            parents,
            frames: trajectory.positions().iter().map(|row| row.iter().map(|p| [p.x, p.y, p.z]).collect()).collect(),
        }
    }

    pub fn to_trajectory(&self) -> Result<JointTrajectory, TrajectoryFileError> {
        if self.v != TRAJECTORY_VERSION {
            return Err(TrajectoryFileError::Version(self.v));
        }
        let joints = self.joint_names.len();
        for (frame, row) in self.frames.iter().enumerate() {
            if row.len() != joints {
                return Err(TrajectoryFileError::RaggedFrame { frame, got: row.len(), expected: joints });
            }
        }
        if let Some(p) = &self.parents {
            if p.len() != joints {
                return Err(TrajectoryFileError::ParentCount { parents: p.len(), joints });
            }
        }
        if self.frames.is_empty() && joints == 0 {
            return Err(TrajectoryFileError::NameCount { names: 0, joints: 0 });
        }
        let positions = self.frames.iter().map(|row| row.iter().map(|p| Vec3::from(*p)).collect()).collect();
        let mask = self.mask.clone().unwrap_or_else(|| vec![true; joints]);
        Ok(JointTrajectory::new(positions, mask, self.fps)?)
    }

    pub fn from_json(text: &str) -> Result<Self, TrajectoryFileError> {
        let file: Self = serde_json::from_str(text)?;
        file.to_trajectory()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory files serialize")
    }

    pub fn read(path: &Path) -> Result<Self, TrajectoryFileError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = JointTrajectory::new(vec![vec![Vec3::zeros(), Vec3::new(0.5, 1.0, -2.0)]], vec![true, false], 24.0).unwrap();
        let f = TrajectoryFile::from_trajectory(&t, vec!["a".into(), "b".into()], Some(vec![-1, 0]));
        let back = TrajectoryFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_trajectory().unwrap(), t);
    }

    #[test]
    fn mask_defaults_to_all_valid() {
        let f = TrajectoryFile::from_json(r#"{"v":1,"fps":30,"joint_names":["a"],"frames":[[[1,2,3]]]}"#).unwrap();
        assert_eq!(f.to_trajectory().unwrap().mask(), &[true]);
    }

    #[test]
    fn rejects_bad_files() {
        let bad = [
            r#"{"v":2,"fps":30,"joint_names":["a"],"frames":[[[1,2,3]]]}"#,
            r#"{"v":1,"fps":30,"joint_names":["a","b"],"frames":[[[1,2,3]]]}"#,
            r#"{"v":1,"fps":30,"joint_names":["a"],"parents":[-1,0],"frames":[[[1,2,3]]]}"#,
            r#"{"v":1,"fps":30,"joint_names":["a"],"frames":[]}"#,
            r#"{"v":1,"fps":0,"joint_names":["a"],"frames":[[[1,2,3]]]}"#,
            r#"{"v":1,"fps":30,"joint_names":["a"],"frames":[[[1,2]]]}"#,
        ];
        for text in bad {
            assert!(TrajectoryFile::from_json(text).is_err(), "{text}");
        }
    }
}
