//! Kinematic-tree data model and forward kinematics.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::rotation::{axis_angle_to_matrix, Rotation3};
use crate::Vec3;

/// Offsets shorter than this are treated as zero-length bones.
pub const ZERO_LENGTH_EPS: f64 = 1e-12;

/// One structural problem found while validating a rig.
#[derive(Debug, Clone, PartialEq)]
pub enum SkeletonIssue {
    LengthMismatch { names: usize, parents: usize, offsets: usize },
    Empty,
    NoRoot,
    MultipleRoots(Vec<usize>),
    ParentOutOfRange { joint: usize, parent: i64 },
    /// Joints (original indices) that are not reachable from the root.
    Cycle(Vec<usize>),
    NonFiniteOffset(usize),
    DuplicateName(String),
}

impl fmt::Display for SkeletonIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkeletonIssue::LengthMismatch { names, parents, offsets } => {
                write!(f, "input lengths differ: {names} names, {parents} parents, {offsets} offsets")
            }
            SkeletonIssue::Empty => write!(f, "skeleton has no joints"),
            SkeletonIssue::NoRoot => write!(f, "no joint has parent -1"),
            SkeletonIssue::MultipleRoots(r) => write!(f, "multiple roots at indices {r:?}"),
            SkeletonIssue::ParentOutOfRange { joint, parent } => {
                write!(f, "joint {joint} has out-of-range parent {parent}")
            }
            SkeletonIssue::Cycle(j) => write!(f, "cycle detected through joints {j:?}"),
            SkeletonIssue::NonFiniteOffset(j) => write!(f, "joint {j} has a non-finite offset"),
            SkeletonIssue::DuplicateName(n) => write!(f, "duplicate joint name `{n}`"),
        }
    }
}

/// Every issue found in one validation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonReport(pub Vec<SkeletonIssue>);

impl fmt::Display for SkeletonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkeletonError {
    #[error("invalid skeleton: {0}")]
    Invalid(SkeletonReport),
    #[error("pose has {got} rotations, skeleton has {expected} joints")]
    JointCountMismatch { expected: usize, got: usize },
    #[error("frame {frame} has {got} joints, expected {expected}")]
    FrameMismatch { frame: usize, expected: usize, got: usize },
    #[error("sequence needs at least one frame")]
    NoFrames,
    #[error("frame rate must be positive and finite, got {0}")]
    BadFps(f64),
    #[error("mask must have one entry per joint ({expected}), got {got}")]
    MaskLength { expected: usize, got: usize },
    #[error("mask has no valid joints")]
    EmptyMask,
    #[error("non-finite position at frame {frame}, joint {joint}")]
    NonFinitePosition { frame: usize, joint: usize },
    #[error("non-finite rotation at joint {0}")]
    NonFiniteRotation(usize),
}

/// Offset of a BVH `End Site`, attached to a leaf joint. Carries no channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndSite {
    pub joint: usize,
    pub offset: Vec3,
}

/// A rig in parent-before-child order.
///
/// The root's offset is kept as rig metadata (BVH writes it back) but does not
/// enter forward kinematics; the root is placed at the pose's root translation.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    names: Vec<String>,
    parents: Vec<Option<usize>>,
    offsets: Vec<Vec3>,
    children: Vec<Vec<usize>>,
    original_index: Vec<usize>,
    end_sites: Vec<EndSite>,
}

/// Builds a [`Skeleton`] from raw lists, reordering joints parent-first.
///
/// Children keep their relative input order, so input that is already a
/// depth-first listing (as in BVH) is left unchanged. Every violated invariant
/// is collected into the returned report.
pub fn validate_skeleton(
    names: Vec<String>,
    parents: &[i64],
    offsets: Vec<Vec3>,
) -> Result<Skeleton, SkeletonError> {
    let n = names.len();
    let invalid = |issues| Err(SkeletonError::Invalid(SkeletonReport(issues)));
    if parents.len() != n || offsets.len() != n {
        return invalid(vec![SkeletonIssue::LengthMismatch {
            names: n,
            parents: parents.len(),
            offsets: offsets.len(),
        }]);
    }
    if n == 0 {
        return invalid(vec![SkeletonIssue::Empty]);
    }

    let mut issues = Vec::new();
    let roots: Vec<usize> = (0..n).filter(|&i| parents[i] == -1).collect();
    match roots.len() {
        0 => issues.push(SkeletonIssue::NoRoot),
        1 => {}
        _ => issues.push(SkeletonIssue::MultipleRoots(roots.clone())),
    }
    for (i, &p) in parents.iter().enumerate() {
        if p != -1 && (p < 0 || p as usize >= n) {
            issues.push(SkeletonIssue::ParentOutOfRange { joint: i, parent: p });
        }
    }
    for (i, o) in offsets.iter().enumerate() {
        if !(o.x.is_finite() && o.y.is_finite() && o.z.is_finite()) {
            issues.push(SkeletonIssue::NonFiniteOffset(i));
        }
    }
    let mut seen = HashSet::new();
    for name in &names {
        if !seen.insert(name.as_str()) {
            issues.push(SkeletonIssue::DuplicateName(name.clone()));
        }
    }

    let mut raw_children = vec![Vec::new(); n];
    for (i, &p) in parents.iter().enumerate() {
        if p >= 0 && (p as usize) < n {
            raw_children[p as usize].push(i);
        }
    }

    // depth-first from every root; whatever stays unvisited hangs off a cycle
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for &root in &roots {
        let mut stack = vec![root];
        while let Some(j) = stack.pop() {
            if visited[j] {
                continue;
            }
            visited[j] = true;
            order.push(j);
            stack.extend(raw_children[j].iter().rev().copied());
        }
    }
    let unreachable: Vec<usize> = (0..n).filter(|&i| !visited[i]).collect();
    if !unreachable.is_empty() && !issues.iter().any(|i| matches!(i, SkeletonIssue::ParentOutOfRange { .. })) {
        issues.push(SkeletonIssue::Cycle(unreachable));
    }
    if !issues.is_empty() {
        return invalid(issues);
    }

    let mut new_index = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let parents_new: Vec<Option<usize>> =
        order.iter().map(|&old| usize::try_from(parents[old]).ok().map(|p| new_index[p])).collect();
    let mut children = vec![Vec::new(); n];
    for (i, p) in parents_new.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(i);
        }
    }
    let mut names = names;
    let names_new = order.iter().map(|&old| std::mem::take(&mut names[old])).collect();
    let offsets_new = order.iter().map(|&old| offsets[old]).collect();

    Ok(Skeleton {
        names: names_new,
        parents: parents_new,
        offsets: offsets_new,
        children,
        original_index: order,
        end_sites: Vec::new(),
    })
}

impl Skeleton {
    /// Attaches end-site metadata. Joint indices refer to canonical order.
    pub fn with_end_sites(mut self, end_sites: Vec<EndSite>) -> Self {
        self.end_sites = end_sites;
        self
    }

    pub fn joint_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, joint: usize) -> &str {
        &self.names[joint]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn parent(&self, joint: usize) -> Option<usize> {
        self.parents[joint]
    }

    /// Parent indices with −1 marking the root.
    pub fn parent_indices(&self) -> Vec<i64> {
        self.parents.iter().map(|p| p.map_or(-1, |p| p as i64)).collect()
    }

    pub fn children(&self, joint: usize) -> &[usize] {
        &self.children[joint]
    }

    pub fn offsets(&self) -> &[Vec3] {
        &self.offsets
    }

    pub fn offset(&self, joint: usize) -> Vec3 {
        self.offsets[joint]
    }

    /// Index the joint had in the input passed to [`validate_skeleton`].
    pub fn original_index(&self, joint: usize) -> usize {
        self.original_index[joint]
    }

    pub fn end_sites(&self) -> &[EndSite] {
        &self.end_sites
    }

    /// True for non-root joints whose offset is (numerically) zero.
    pub fn is_zero_length(&self, joint: usize) -> bool {
        self.parents[joint].is_some() && self.offsets[joint].norm() < ZERO_LENGTH_EPS
    }

    pub fn zero_length_joints(&self) -> Vec<usize> {
        (0..self.joint_count()).filter(|&j| self.is_zero_length(j)).collect()
    }

    /// Unit bone direction `o_i/‖o_i‖` for non-root, non-zero-length joints.
    pub fn bone_direction(&self, joint: usize) -> Option<Vec3> {
        if self.parents[joint].is_none() || self.is_zero_length(joint) {
            return None;
        }
        Some(self.offsets[joint].normalize())
    }

    /// Same rig with every offset (end sites included) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Skeleton {
        let mut out = self.clone();
        for o in &mut out.offsets {
            *o *= factor;
        }
        for e in &mut out.end_sites {
            e.offset *= factor;
        }
        out
    }
}

/// Local rotations of one frame as axis-angle vectors, plus the root placement.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub rotations: Vec<Vec3>,
    pub root_translation: Vec3,
}

impl Pose {
    pub fn identity(joint_count: usize) -> Self {
        Self { rotations: vec![Vec3::zeros(); joint_count], root_translation: Vec3::zeros() }
    }

    pub fn new(rotations: Vec<Vec3>, root_translation: Vec3) -> Self {
        Self { rotations, root_translation }
    }

    pub fn joint_count(&self) -> usize {
        self.rotations.len()
    }

    /// Same pose with every rotation vector wrapped to norm ≤ π.
    pub fn canonicalized(&self) -> Pose {
        Pose {
            rotations: self.rotations.iter().map(crate::rotation::canonicalize).collect(),
            root_translation: self.root_translation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnimationClip {
    frames: Vec<Pose>,
    fps: f64,
}

impl AnimationClip {
    pub fn new(frames: Vec<Pose>, fps: f64) -> Result<Self, SkeletonError> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(SkeletonError::BadFps(fps));
        }
        let first = frames.first().ok_or(SkeletonError::NoFrames)?;
        let n = first.joint_count();
        for (t, f) in frames.iter().enumerate() {
            if f.joint_count() != n {
                return Err(SkeletonError::FrameMismatch { frame: t, expected: n, got: f.joint_count() });
            }
            if let Some(j) = f.rotations.iter().position(|r| !r.iter().all(|c| c.is_finite())) {
                return Err(SkeletonError::NonFiniteRotation(j));
            }
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[Pose] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn joint_count(&self) -> usize {
        self.frames[0].joint_count()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }
}

/// Per-frame joint positions with a per-joint validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    positions: Vec<Vec<Vec3>>,
    mask: Vec<bool>,
    fps: f64,
}

impl JointTrajectory {
    pub fn new(positions: Vec<Vec<Vec3>>, mask: Vec<bool>, fps: f64) -> Result<Self, SkeletonError> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(SkeletonError::BadFps(fps));
        }
        let n = positions.first().ok_or(SkeletonError::NoFrames)?.len();
        if mask.len() != n {
            return Err(SkeletonError::MaskLength { expected: n, got: mask.len() });
        }
        if !mask.iter().any(|&m| m) {
            return Err(SkeletonError::EmptyMask);
        }
        for (t, row) in positions.iter().enumerate() {
            if row.len() != n {
                return Err(SkeletonError::FrameMismatch { frame: t, expected: n, got: row.len() });
            }
            for (j, p) in row.iter().enumerate() {
                if mask[j] && !p.iter().all(|c| c.is_finite()) {
                    return Err(SkeletonError::NonFinitePosition { frame: t, joint: j });
                }
            }
        }
        Ok(Self { positions, mask, fps })
    }

    /// Trajectory with every joint valid.
    pub fn all_valid(positions: Vec<Vec<Vec3>>, fps: f64) -> Result<Self, SkeletonError> {
        let n = positions.first().map_or(0, Vec::len);
        Self::new(positions, vec![true; n], fps)
    }

    pub fn positions(&self) -> &[Vec<Vec3>] {
        &self.positions
    }

    pub fn frame(&self, t: usize) -> &[Vec3] {
        &self.positions[t]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frame_count(&self) -> usize {
        self.positions.len()
    }

    pub fn joint_count(&self) -> usize {
        self.mask.len()
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Applies `f` to every position, keeping mask and frame rate.
    pub fn map_positions(&self, mut f: impl FnMut(usize, usize, &Vec3) -> Vec3) -> JointTrajectory {
        let positions = self
            .positions
            .iter()
            .enumerate()
            .map(|(t, row)| row.iter().enumerate().map(|(j, p)| f(t, j, p)).collect())
            .collect();
        JointTrajectory { positions, mask: self.mask.clone(), fps: self.fps }
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self, SkeletonError> {
        if mask.len() != self.mask.len() {
            return Err(SkeletonError::MaskLength { expected: self.mask.len(), got: mask.len() });
        }
        self.mask = mask;
        Self::new(self.positions, self.mask, self.fps)
    }
}

/// Positions and accumulated world rotations for one frame.
pub(crate) struct FkState {
    pub positions: Vec<Vec3>,
    pub globals: Vec<Rotation3>,
}

pub(crate) fn fk_state(skeleton: &Skeleton, rotations: &[Vec3], root_translation: &Vec3) -> FkState {
    let n = skeleton.joint_count();
    let mut positions = Vec::with_capacity(n);
    let mut globals: Vec<Rotation3> = Vec::with_capacity(n);
    for j in 0..n {
        let local = axis_angle_to_matrix(&rotations[j]);
        match skeleton.parents[j] {
            None => {
                positions.push(*root_translation);
                globals.push(local);
            }
            Some(p) => {
                positions.push(positions[p] + globals[p].apply(&skeleton.offsets[j]));
                globals.push(globals[p] * local);
            }
        }
    }
    FkState { positions, globals }
}

/// World-space joint positions of one pose.
pub fn forward_kinematics(skeleton: &Skeleton, pose: &Pose) -> Result<Vec<Vec3>, SkeletonError> {
    if pose.joint_count() != skeleton.joint_count() {
        return Err(SkeletonError::JointCountMismatch { expected: skeleton.joint_count(), got: pose.joint_count() });
    }
    Ok(fk_state(skeleton, &pose.rotations, &pose.root_translation).positions)
}

/// Forward kinematics applied frame by frame; the result has every joint valid.
pub fn fk_sequence(skeleton: &Skeleton, clip: &AnimationClip) -> Result<JointTrajectory, SkeletonError> {
    let mut rows = Vec::with_capacity(clip.frame_count());
    for (t, pose) in clip.frames().iter().enumerate() {
        if pose.joint_count() != skeleton.joint_count() {
            return Err(SkeletonError::FrameMismatch {
                frame: t,
                expected: skeleton.joint_count(),
                got: pose.joint_count(),
            });
        }
        rows.push(fk_state(skeleton, &pose.rotations, &pose.root_translation).positions);
    }
    JointTrajectory::all_valid(rows, clip.fps())
}

pub fn rest_pose_positions(skeleton: &Skeleton) -> Vec<Vec3> {
    let n = skeleton.joint_count();
    fk_state(skeleton, &vec![Vec3::zeros(); n], &Vec3::zeros()).positions
}

/// World positions of the end sites given the joint positions and rotations of a pose.
pub fn end_site_positions(skeleton: &Skeleton, pose: &Pose) -> Result<Vec<Vec3>, SkeletonError> {
    if pose.joint_count() != skeleton.joint_count() {
        return Err(SkeletonError::JointCountMismatch { expected: skeleton.joint_count(), got: pose.joint_count() });
    }
    let state = fk_state(skeleton, &pose.rotations, &pose.root_translation);
    Ok(skeleton
        .end_sites
        .iter()
        .map(|e| state.positions[e.joint] + state.globals[e.joint].apply(&e.offset))
        .collect())
}

/// `(parent position, child position)` for every non-root joint.
pub fn bone_segments(skeleton: &Skeleton, positions: &[Vec3]) -> Vec<(Vec3, Vec3)> {
    skeleton
        .parents
        .iter()
        .enumerate()
        .filter_map(|(j, p)| p.map(|p| (positions[p], positions[j])))
        .collect()
}
