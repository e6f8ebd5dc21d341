use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use rigfit_core::BvhDocument;

use crate::failure::CmdResult;
use crate::inputs::read_bvh;

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub rig: PathBuf,
}

fn vec3(v: &rigfit_core::Vec3) -> String {
    format!("({:.6}, {:.6}, {:.6})", v.x, v.y, v.z)
}

pub fn render(doc: &BvhDocument) -> String {
    let skel = doc.skeleton();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "joints: {}  end sites: {}  frames: {}  frame time: {:.7}",
        skel.joint_count(),
        skel.end_sites().len(),
        doc.clip().frame_count(),
        doc.frame_time()
    );
    let mut stack = vec![(0usize, 0usize)];
    while let Some((j, depth)) = stack.pop() {
        let pad = "  ".repeat(depth);
        let parent = skel.parent(j).map_or("-".to_string(), |p| skel.name(p).to_string());
        let channels: Vec<&str> = doc.channels(j).iter().map(|c| c.name()).collect();
        let order = doc.euler_order(j).map_or("-".to_string(), |o| o.to_string());
        let _ = writeln!(
            out,
            "{pad}[{j}] {}  parent: {parent}  offset: {}  length: {:.6}  order: {order}  channels: {}",
            skel.name(j),
            vec3(&skel.offset(j)),
            skel.offset(j).norm(),
            if channels.is_empty() { "-".to_string() } else { channels.join(" ") }
        );
        for site in skel.end_sites().iter().filter(|e| e.joint == j) {
            let _ = writeln!(out, "{pad}  end site  offset: {}  length: {:.6}", vec3(&site.offset), site.offset.norm());
        }
        for &c in skel.children(j).iter().rev() {
            stack.push((c, depth + 1));
        }
    }
    out
}

pub fn run(args: &InspectArgs) -> CmdResult {
    let doc = read_bvh(&args.rig)?;
    print!("{}", render(&doc));
    Ok(())
}
