use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rigfit_core::ik::{fit_loss, fit_loss_gradient, FitConfig};
use rigfit_core::skeleton::bone_segments;
use rigfit_core::synth::{random_skeleton, SkeletonParams};
use rigfit_core::*;

fn vec3() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn rig(seed: u64, n: usize) -> Skeleton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_skeleton(&mut rng, &SkeletonParams { joint_count: n, max_children: 3, zero_length_chance: 0.1, ..Default::default() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fk_keeps_bone_lengths(seed in any::<u64>(), n in 1usize..20, angles in prop::collection::vec(vec3(), 20), root in vec3()) {
        let skel = rig(seed, n);
        let pose = Pose::new(angles[..n].to_vec(), root);
        let p = forward_kinematics(&skel, &pose).unwrap();
        prop_assert!((p[0] - root).norm() < 1e-12);
        for j in 1..n {
            let parent = skel.parent(j).unwrap();
            let length = (p[j] - p[parent]).norm();
            prop_assert!((length - skel.offset(j).norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn tree_has_one_segment_per_bone(seed in any::<u64>(), n in 1usize..30) {
        let skel = rig(seed, n);
        let rest = forward_kinematics(&skel, &Pose::identity(n)).unwrap();
        prop_assert_eq!(bone_segments(&skel, &rest).len(), n - 1);
    }

    #[test]
    fn gradient_matches_differences(seed in any::<u64>(), n in 1usize..8, angles in prop::collection::vec(vec3(), 16), fit_root in any::<bool>()) {
        let skel = rig(seed, n);
        let pose = Pose::new(angles[..n].to_vec(), angles[8]);
        let geo = angles[8..8 + n].to_vec();
        let target: Vec<Vec3> = angles.iter().rev().take(n).map(|v| v * 1.5).collect();
        let mask = vec![true; n];
        let config = FitConfig { lambda_prior: 0.1, lambda_twist: 0.05, fit_root_translation: fit_root, ..Default::default() };
        let analytic = fit_loss_gradient(&skel, &pose, &target, &geo, &mask, &config).to_flat();
        let h = 1e-6;
        for (k, &g) in analytic.iter().enumerate() {
            let nudge = |d: f64| {
                let mut p = pose.clone();
                if k < 3 * n { p.rotations[k / 3][k % 3] += d } else { p.root_translation[k - 3 * n] += d }
                fit_loss(&skel, &p, &target, &geo, &mask, &config).total
            };
            let numeric = (nudge(h) - nudge(-h)) / (2.0 * h);
            prop_assert!((g - numeric).abs() <= 1e-5 * (1.0 + numeric.abs()), "param {k}: {g} vs {numeric}");
        }
    }
}

#[test]
fn root_translation_not_fitted_has_no_gradient_entries() {
    let skel = rig(3, 4);
    let pose = Pose::identity(4);
    let target = vec![Vec3::x(); 4];
    let config = FitConfig::default();
    let g = fit_loss_gradient(&skel, &pose, &target, &pose.rotations, &[true; 4], &config);
    assert_eq!(g.to_flat().len(), 12);
    assert!(g.root_translation.is_none());
}
