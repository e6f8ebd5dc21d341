use std::path::{Path, PathBuf};

use proptest::prelude::*;

use rigfit_core::*;

fn corpus() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bvh");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

#[test]
fn every_fixture_round_trips() {
    for path in corpus() {
        let name = path.display();
        let doc = parse_bvh(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = write_bvh(&doc).unwrap();
        let again = parse_bvh(&text).unwrap();
        assert_eq!(again.skeleton().names(), doc.skeleton().names(), "{name}");
        assert_eq!(again.channel_layout(), doc.channel_layout(), "{name}");
        for (a, b) in doc.clip().frames().iter().zip(again.clip().frames()) {
            for (ra, rb) in a.rotations.iter().zip(&b.rotations) {
                let deg = Rotation3::from_axis_angle(ra).angle_to(&Rotation3::from_axis_angle(rb)).to_degrees();
                assert!(deg < 1e-4, "{name}: {deg}°");
            }
            assert!((a.root_translation - b.root_translation).amax() < 1e-4, "{name}");
        }
        assert_eq!(write_bvh(&again).unwrap(), text, "{name} is not byte-stable");
    }
}

#[test]
fn positions_survive_the_round_trip() {
    for path in corpus() {
        let doc = parse_bvh(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let again = parse_bvh(&write_bvh(&doc).unwrap()).unwrap();
        let a = fk_sequence(doc.skeleton(), doc.clip()).unwrap();
        let b = fk_sequence(again.skeleton(), again.clip()).unwrap();
        assert!(mpjpe(&a, &b).unwrap() < 1e-4, "{}", path.display());
    }
}

#[test]
fn corpus_covers_the_layouts() {
    let docs: Vec<BvhDocument> = corpus().iter().map(|p| parse_bvh(&std::fs::read_to_string(p).unwrap()).unwrap()).collect();
    let mut orders: Vec<String> = docs
        .iter()
        .flat_map(|d| (0..d.skeleton().joint_count()).filter_map(|j| d.euler_order(j).map(|o| o.to_string())).collect::<Vec<_>>())
        .collect();
    orders.sort();
    orders.dedup();
    assert_eq!(orders.len(), 6);
    assert!(docs.iter().any(|d| d.channels(0).len() == 6));
    assert!(docs.iter().any(|d| d.channels(0).len() == 3));
    assert!(docs.iter().any(|d| !d.skeleton().zero_length_joints().is_empty()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn garbage_never_panics(text in "[A-Za-z{}0-9 .:\\-\n\t]{0,400}") {
        let _ = parse_bvh(&text);
    }

    #[test]
    fn truncated_fixture_never_panics(cut in 0usize..4000) {
        let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bvh/humanoid.bvh")).unwrap();
        let end = text.char_indices().map(|(k, _)| k).take_while(|&k| k <= cut).last().unwrap_or(0);
        let _ = parse_bvh(&text[..end]);
    }
}
