//! Rotation recovery for arbitrary rigs.
//!
//! Converts per-frame 3D joint trajectories into local joint rotations with a
//! two-stage inverse kinematics fit (closed-form geometric initialization, then
//! regularized gradient refinement warm-started across frames), and measures
//! animations with MPJPE, MPJVE and the point-to-bone CD-Skeleton distance.

pub mod bvh;
pub mod ik;
pub mod metrics;
pub mod normalize;
pub mod rotation;
pub mod skeleton;
pub mod synth;
pub mod trajectory_file;

pub type Vec3 = nalgebra::Vector3<f64>;

pub use bvh::{parse_bvh, write_bvh, BvhDocument, BvhError, Channel};
pub use ik::{fit_sequence, FitConfig, FitDiagnostics, FrameFitResult};
pub use metrics::{cd_skeleton, mpjpe, mpjve, MetricError, SkeletonInstance};
pub use normalize::{NormalizationTransform, NormalizeError};
pub use rotation::{EulerOrder, Rotation3, RotationError};
pub use skeleton::{
    fk_sequence, forward_kinematics, validate_skeleton, AnimationClip, EndSite, JointTrajectory, Pose, Skeleton,
    SkeletonError,
};
pub use trajectory_file::TrajectoryFile;
