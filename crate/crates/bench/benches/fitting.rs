use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rigfit_core::ik::{geometric_init_frame, refine_frame, FitConfig};
use rigfit_core::metrics::cd_skeleton_sequence;
use rigfit_core::normalize::rest_normalize;
use rigfit_core::synth::{random_skeleton, smooth_clip, MotionParams, SkeletonParams};
use rigfit_core::*;

fn scene(joints: usize, frames: usize) -> (Skeleton, AnimationClip, JointTrajectory) {
    let mut rng = ChaCha8Rng::seed_from_u64(joints as u64);
    let raw = random_skeleton(&mut rng, &SkeletonParams { joint_count: joints, max_children: 3, ..Default::default() });
    let (skel, _) = rest_normalize(&raw).unwrap();
    let clip = smooth_clip(&mut rng, &skel, &MotionParams { frames, ..Default::default() });
    let traj = fk_sequence(&skel, &clip).unwrap();
    (skel, clip, traj)
}

fn kinematics(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_kinematics");
    for joints in [10, 30, 100] {
        let (skel, clip, _) = scene(joints, 1);
        let pose = &clip.frames()[0];
        group.bench_with_input(BenchmarkId::from_parameter(joints), &joints, |b, _| b.iter(|| forward_kinematics(&skel, pose).unwrap()));
    }
    group.finish();
}

fn fitting(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_frame");
    let config = FitConfig::default();
    for joints in [10, 30] {
        let (skel, _, traj) = scene(joints, 1);
        let mask = traj.mask();
        group.bench_with_input(BenchmarkId::new("init", joints), &joints, |b, _| b.iter(|| geometric_init_frame(&skel, traj.frame(0), mask)));
        let geo = geometric_init_frame(&skel, traj.frame(0), mask);
        group.bench_with_input(BenchmarkId::new("refine", joints), &joints, |b, _| {
            b.iter(|| refine_frame(&skel, traj.frame(0), &geo, &geo, mask, &config))
        });
    }
    group.sample_size(10);
    let (skel, _, traj) = scene(24, 30);
    group.bench_function("sequence_24x30", |b| b.iter(|| fit_sequence(&skel, &traj, &config).unwrap()));
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let (skel, _, gt) = scene(30, 30);
    let pred = gt.map_positions(|t, j, p| p + Vec3::new(0.01 * t as f64, 0.0, 0.02 * j as f64));
    let parents = skel.parent_indices();
    c.bench_function("cd_skeleton_30x30", |b| b.iter(|| cd_skeleton_sequence(&pred, &parents, &gt, &parents).unwrap()));
    c.bench_function("mpjpe_30x30", |b| b.iter(|| mpjpe(&pred, &gt).unwrap()));
}

fn bvh(c: &mut Criterion) {
    let (skel, clip, _) = scene(30, 120);
    let text = write_bvh(&BvhDocument::from_clip(skel, clip).unwrap()).unwrap();
    c.bench_function("bvh_parse_30x120", |b| b.iter(|| parse_bvh(&text).unwrap()));
    let doc = parse_bvh(&text).unwrap();
    c.bench_function("bvh_write_30x120", |b| b.iter(|| write_bvh(&doc).unwrap()));
}

criterion_group!(benches, kinematics, fitting, metrics, bvh);
criterion_main!(benches);
