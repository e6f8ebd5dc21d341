//! Seeded random rigs and smooth motion, for tests, benches and the `synth`
//! command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::skeleton::{validate_skeleton, AnimationClip, EndSite, Pose, Skeleton};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonParams {
    pub joint_count: usize,
    pub max_children: usize,
    pub min_bone: f64,
    pub max_bone: f64,
    /// Chance that a non-root joint gets a zero-length offset.
    pub zero_length_chance: f64,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        Self { joint_count: 10, max_children: 4, min_bone: 0.5, max_bone: 1.5, zero_length_chance: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionParams {
    pub frames: usize,
    pub fps: f64,
    /// Per-axis sinusoid amplitude, radians.
    pub amplitude: f64,
    /// Angular frequency bound, radians per frame.
    pub max_frequency: f64,
    /// Spread of the constant rotation offset around which joints oscillate.
    pub base_spread: f64,
    /// Root sway amplitude in rig units; zero keeps the root at the origin.
    pub translation_amplitude: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        Self { frames: 30, fps: 30.0, amplitude: 0.5, max_frequency: 0.2, base_spread: 0.8, translation_amplitude: 0.0 }
    }
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random tree with `joint_count` joints, each parent capped at `max_children`
/// children. Leaves get an end site so the rig has a visible tip.
pub fn random_skeleton<R: Rng + ?Sized>(rng: &mut R, params: &SkeletonParams) -> Skeleton {
    let n = params.joint_count.max(1);
    let cap = params.max_children.max(1);
    let mut parents = vec![-1i64];
    let mut child_count = vec![0usize; n];
    for j in 1..n {
        let open: Vec<usize> = (0..j).filter(|&p| child_count[p] < cap).collect();
        let p = open[rng.gen_range(0..open.len())];
        child_count[p] += 1;
        parents.push(p as i64);
    }
    let offsets = (0..n)
        .map(|j| {
            if j == 0 || rng.gen_bool(params.zero_length_chance.clamp(0.0, 1.0)) {
                Vec3::zeros()
            } else {
                unit_vector(rng) * rng.gen_range(params.min_bone..=params.max_bone)
            }
        })
        .collect();
    let names = (0..n).map(|j| format!("joint{j}")).collect();
    let skeleton = validate_skeleton(names, &parents, offsets).expect("generated parents form a tree");
    let end_sites = (0..n)
        .filter(|&j| child_count[j] == 0)
        .map(|j| EndSite { joint: j, offset: unit_vector(rng) * params.min_bone })
        .collect();
    skeleton.with_end_sites(end_sites)
}

/// Smooth motion: each joint and axis is a constant plus one sinusoid.
/// Per-frame change of any component is at most `amplitude·max_frequency`.
pub fn smooth_clip<R: Rng + ?Sized>(rng: &mut R, skeleton: &Skeleton, params: &MotionParams) -> AnimationClip {
    let n = skeleton.joint_count();
    let wave = |rng: &mut R, amp: f64| {
        let a = rng.gen_range(0.0..=amp);
        let w = rng.gen_range(0.0..=params.max_frequency);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        move |t: f64| a * (w * t + phase).sin()
    };
    let mut joints = Vec::with_capacity(n);
    for _ in 0..n {
        let base = unit_vector(rng) * rng.gen_range(0.0..=params.base_spread);
        let waves = [wave(rng, params.amplitude), wave(rng, params.amplitude), wave(rng, params.amplitude)];
        joints.push((base, waves));
    }
    let root = [0; 3].map(|_| wave(rng, params.translation_amplitude));

    let frames = (0..params.frames.max(1))
        .map(|t| {
            let t = t as f64;
            let rotations = joints.iter().map(|(base, w)| base + Vec3::new(w[0](t), w[1](t), w[2](t))).collect();
            Pose::new(rotations, Vec3::new(root[0](t), root[1](t), root[2](t)))
        })
        .collect();
    AnimationClip::new(frames, params.fps).expect("frames share one joint count")
}

/// [`smooth_clip`] driven by a ChaCha8 stream seeded with `seed`, so the same
/// seed gives the same clip on every platform.
pub fn seeded_clip(skeleton: &Skeleton, params: &MotionParams, seed: u64) -> AnimationClip {
    smooth_clip(&mut ChaCha8Rng::seed_from_u64(seed), skeleton, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skeleton_respects_branching_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..40 {
            let s = random_skeleton(&mut rng, &SkeletonParams { joint_count: n, max_children: 2, ..Default::default() });
            assert_eq!(s.joint_count(), n);
            assert!((0..n).all(|j| s.children(j).len() <= 2));
            assert!((1..n).all(|j| !s.is_zero_length(j)));
        }
    }

    #[test]
    fn same_seed_same_output() {
        let make = || {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let s = random_skeleton(&mut rng, &SkeletonParams::default());
            let c = smooth_clip(&mut rng, &s, &MotionParams::default());
            (s, c)
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn motion_is_smooth() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_skeleton(&mut rng, &SkeletonParams::default());
        let p = MotionParams { frames: 100, ..Default::default() };
        let clip = smooth_clip(&mut rng, &s, &p);
        assert_eq!(clip.frame_count(), 100);
        for w in clip.frames().windows(2) {
            for (a, b) in w[0].rotations.iter().zip(&w[1].rotations) {
                assert!((a - b).amax() <= p.amplitude * p.max_frequency + 1e-12);
            }
            assert_eq!(w[1].root_translation, Vec3::zeros());
        }
    }
}
