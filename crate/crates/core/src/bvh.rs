//! BVH (Biovision Hierarchy) reader and writer.
//!
//! Angles are degrees in the file and radians in memory. Each joint keeps the
//! channel list it was declared with, so per-joint Euler orders survive a
//! round trip. `End Site` blocks become [`EndSite`] metadata on the skeleton.
//!
//! Position channels on the root drive [`Pose::root_translation`]. Position
//! channels on other joints are accepted, but their values are ignored on
//! read and written back as the joint's offset.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::rotation::{euler_to_matrix, matrix_to_euler, Axis, EulerOrder, Rotation3};
use crate::skeleton::{validate_skeleton, AnimationClip, EndSite, Pose, Skeleton, SkeletonError};
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BvhError {
    #[error("{line}:{col}: unexpected `{found}`, expected {expected}")]
    UnexpectedToken { line: usize, col: usize, found: String, expected: String },
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEof(String),
    #[error("{line}:{col}: unknown channel `{name}`")]
    UnknownChannel { line: usize, col: usize, name: String },
    #[error("{line}:{col}: invalid number `{text}`")]
    NonNumeric { line: usize, col: usize, text: String },
    #[error("{line}:{col}: CHANNELS declares {declared} channels but lists {listed}")]
    ChannelCount { line: usize, col: usize, declared: usize, listed: usize },
    #[error("{line}:{col}: joint `{joint}` has an unsupported channel layout: {reason}")]
    ChannelLayout { line: usize, col: usize, joint: String, reason: String },
    #[error("line {line}: motion row has {got} values, expected {expected}")]
    RowArity { line: usize, got: usize, expected: usize },
    #[error("motion section has {got} rows but declares {expected} frames")]
    FrameCount { expected: usize, got: usize },
    #[error("missing MOTION section")]
    MissingMotion,
    #[error("frame time must be positive, got {0}")]
    BadFrameTime(f64),
    #[error("document mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Xposition,
    Yposition,
    Zposition,
    Xrotation,
    Yrotation,
    Zrotation,
}

impl Channel {
    pub fn parse(name: &str) -> Option<Channel> {
        Some(match name {
            "Xposition" => Channel::Xposition,
            "Yposition" => Channel::Yposition,
            "Zposition" => Channel::Zposition,
            "Xrotation" => Channel::Xrotation,
            "Yrotation" => Channel::Yrotation,
            "Zrotation" => Channel::Zrotation,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Xposition => "Xposition",
            Channel::Yposition => "Yposition",
            Channel::Zposition => "Zposition",
            Channel::Xrotation => "Xrotation",
            Channel::Yrotation => "Yrotation",
            Channel::Zrotation => "Zrotation",
        }
    }

    pub fn position_axis(self) -> Option<usize> {
        match self {
            Channel::Xposition => Some(0),
            Channel::Yposition => Some(1),
            Channel::Zposition => Some(2),
            _ => None,
        }
    }

    pub fn rotation_axis(self) -> Option<Axis> {
        match self {
            Channel::Xrotation => Some(Axis::X),
            Channel::Yrotation => Some(Axis::Y),
            Channel::Zrotation => Some(Axis::Z),
            _ => None,
        }
    }

    fn rotation(axis: Axis) -> Channel {
        match axis {
            Axis::X => Channel::Xrotation,
            Axis::Y => Channel::Yrotation,
            Axis::Z => Channel::Zrotation,
        }
    }

    /// Rotation channels of `order`, in declaration order.
    pub fn rotations_for(order: EulerOrder) -> [Channel; 3] {
        order.axes().map(Channel::rotation)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Euler order implied by a joint's rotation channels, `None` when it has none.
fn rotation_order(channels: &[Channel]) -> Result<Option<EulerOrder>, String> {
    let axes: Vec<Axis> = channels.iter().filter_map(|c| c.rotation_axis()).collect();
    match axes.len() {
        0 => Ok(None),
        3 => EulerOrder::from_axes([axes[0], axes[1], axes[2]])
            .map(Some)
            .ok_or_else(|| "rotation channels repeat an axis".to_string()),
        n => Err(format!("{n} rotation channels (expected 0 or 3)")),
    }
}

fn check_layout(channels: &[Channel], is_root: bool) -> Result<Option<EulerOrder>, String> {
    let order = rotation_order(channels)?;
    let mut seen_pos = [false; 3];
    for c in channels {
        if let Some(a) = c.position_axis() {
            if std::mem::replace(&mut seen_pos[a], true) {
                return Err("position channels repeat an axis".into());
            }
        }
    }
    let _ = is_root;
    Ok(order)
}

/// A parsed or assembled BVH file.
#[derive(Debug, Clone, PartialEq)]
pub struct BvhDocument {
    skeleton: Skeleton,
    channels: Vec<Vec<Channel>>,
    clip: AnimationClip,
    frame_time: f64,
}

impl BvhDocument {
    pub fn new(
        skeleton: Skeleton,
        channels: Vec<Vec<Channel>>,
        clip: AnimationClip,
        frame_time: f64,
    ) -> Result<Self, BvhError> {
        if !(frame_time > 0.0 && frame_time.is_finite()) {
            return Err(BvhError::BadFrameTime(frame_time));
        }
        let n = skeleton.joint_count();
        if channels.len() != n {
            return Err(BvhError::Mismatch(format!("{} channel lists for {n} joints", channels.len())));
        }
        if clip.joint_count() != n {
            return Err(BvhError::Mismatch(format!("clip has {} joints, skeleton has {n}", clip.joint_count())));
        }
        for (j, ch) in channels.iter().enumerate() {
            check_layout(ch, j == 0).map_err(|reason| BvhError::ChannelLayout {
                line: 0,
                col: 0,
                joint: skeleton.name(j).to_string(),
                reason,
            })?;
        }
        Ok(Self { skeleton, channels, clip, frame_time })
    }

    /// Default layout for a new clip: `ZXY` rotations everywhere, plus root
    /// position channels when any frame moves the root.
    pub fn from_clip(skeleton: Skeleton, clip: AnimationClip) -> Result<Self, BvhError> {
        let translated = clip.frames().iter().any(|f| f.root_translation != Vec3::zeros());
        let rot = Channel::rotations_for(EulerOrder::default()).to_vec();
        let channels = (0..skeleton.joint_count())
            .map(|j| {
                if j == 0 && translated {
                    [vec![Channel::Xposition, Channel::Yposition, Channel::Zposition], rot.clone()].concat()
                } else {
                    rot.clone()
                }
            })
            .collect();
        let frame_time = 1.0 / clip.fps();
        Self::new(skeleton, channels, clip, frame_time)
    }

    /// Same rig and channel layout carrying a different clip. Joints whose
    /// layout cannot express the clip gain the channels they need.
    pub fn with_clip(&self, clip: AnimationClip) -> Result<Self, BvhError> {
        let mut channels = self.channels.clone();
        for (j, ch) in channels.iter_mut().enumerate() {
            let rotated = clip.frames().iter().any(|f| f.rotations[j].norm() > 1e-12);
            if rotated && !ch.iter().any(|c| c.rotation_axis().is_some()) {
                ch.extend(Channel::rotations_for(EulerOrder::default()));
            }
        }
        let root_needs = [0, 1, 2].map(|a| clip.frames().iter().any(|f| f.root_translation[a] != 0.0));
        let root = &mut channels[0];
        let has = [Channel::Xposition, Channel::Yposition, Channel::Zposition].map(|c| root.contains(&c));
        if (0..3).any(|a| root_needs[a] && !has[a]) {
            root.retain(|c| c.position_axis().is_none());
            root.splice(0..0, [Channel::Xposition, Channel::Yposition, Channel::Zposition]);
        }
        Self::new(self.skeleton.clone(), channels, clip.clone(), 1.0 / clip.fps())
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn clip(&self) -> &AnimationClip {
        &self.clip
    }

    pub fn frame_time(&self) -> f64 {
        self.frame_time
    }

    pub fn channel_layout(&self) -> &[Vec<Channel>] {
        &self.channels
    }

    pub fn channels(&self, joint: usize) -> &[Channel] {
        &self.channels[joint]
    }

    pub fn euler_order(&self, joint: usize) -> Option<EulerOrder> {
        rotation_order(&self.channels[joint]).ok().flatten()
    }

    pub fn end_sites(&self) -> &[EndSite] {
        self.skeleton.end_sites()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokenize_line<'a>(line_no: usize, line: &'a str, out: &mut Vec<Token<'a>>) {
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        let brace = ch == '{' || ch == '}';
        if ch.is_whitespace() || brace {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..i], line: line_no, col: s + 1 });
            }
            if brace {
                out.push(Token { text: &line[i..i + 1], line: line_no, col: i + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], line: line_no, col: s + 1 });
    }
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    names: Vec<String>,
    parents: Vec<i64>,
    offsets: Vec<Vec3>,
    channels: Vec<Vec<Channel>>,
    end_sites: Vec<EndSite>,
}

impl<'a> Parser<'a> {
    fn next(&mut self, expected: &str) -> Result<&Token<'a>, BvhError> {
        let t = self.tokens.get(self.pos).ok_or_else(|| BvhError::UnexpectedEof(expected.to_string()))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn expect(&mut self, keyword: &str) -> Result<(), BvhError> {
        let t = self.next(&format!("`{keyword}`"))?;
        if t.text != keyword {
            return Err(unexpected(t, &format!("`{keyword}`")));
        }
        Ok(())
    }

    fn number(&mut self, what: &str) -> Result<f64, BvhError> {
        let t = self.next(what)?;
        parse_number(t.text, t.line, t.col)
    }

    fn vec3(&mut self) -> Result<Vec3, BvhError> {
        Ok(Vec3::new(self.number("offset x")?, self.number("offset y")?, self.number("offset z")?))
    }

    fn joint(&mut self, parent: i64) -> Result<(), BvhError> {
        let name_tok = self.next("joint name")?;
        let name = name_tok.text.to_string();
        self.expect("{")?;
        self.expect("OFFSET")?;
        let offset = self.vec3()?;

        let index = self.names.len();
        self.names.push(name.clone());
        self.parents.push(parent);
        self.offsets.push(offset);
        self.channels.push(Vec::new());

        if self.peek().map(|t| t.text) == Some("CHANNELS") {
            let kw = self.next("CHANNELS")?;
            let (line, col) = (kw.line, kw.col);
            let count_tok = self.next("channel count")?;
            let declared: usize = count_tok.text.parse().map_err(|_| BvhError::NonNumeric {
                line: count_tok.line,
                col: count_tok.col,
                text: count_tok.text.to_string(),
            })?;
            let mut list = Vec::with_capacity(declared.min(6));
            for listed in 0..declared {
                let Some(t) = self.peek() else {
                    return Err(BvhError::UnexpectedEof("channel name".into()));
                };
                match Channel::parse(t.text) {
                    Some(c) => {
                        list.push(c);
                        self.pos += 1;
                    }
                    None if matches!(t.text, "JOINT" | "End" | "}") => {
                        return Err(BvhError::ChannelCount { line, col, declared, listed });
                    }
                    None => {
                        return Err(BvhError::UnknownChannel { line: t.line, col: t.col, name: t.text.to_string() })
                    }
                }
            }
            if let Some(t) = self.peek() {
                if Channel::parse(t.text).is_some() {
                    let extra = self.tokens[self.pos..].iter().take_while(|t| Channel::parse(t.text).is_some()).count();
                    return Err(BvhError::ChannelCount { line, col, declared, listed: declared + extra });
                }
            }
            check_layout(&list, parent < 0).map_err(|reason| BvhError::ChannelLayout {
                line,
                col,
                joint: name.clone(),
                reason,
            })?;
            self.channels[index] = list;
        }

        loop {
            let t = self.next("`JOINT`, `End Site` or `}`")?;
            match t.text {
                "}" => return Ok(()),
                "JOINT" => self.joint(index as i64)?,
                "End" => {
                    self.expect("Site")?;
                    self.expect("{")?;
                    self.expect("OFFSET")?;
                    let offset = self.vec3()?;
                    self.expect("}")?;
                    self.end_sites.push(EndSite { joint: index, offset });
                }
                _ => return Err(unexpected(t, "`JOINT`, `End Site` or `}`")),
            }
        }
    }
}

fn unexpected(t: &Token<'_>, expected: &str) -> BvhError {
    BvhError::UnexpectedToken { line: t.line, col: t.col, found: t.text.to_string(), expected: expected.to_string() }
}

fn parse_number(text: &str, line: usize, col: usize) -> Result<f64, BvhError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(BvhError::NonNumeric { line, col, text: text.to_string() }),
    }
}

/// Parses BVH text. Line and column numbers in errors are 1-based.
pub fn parse_bvh(text: &str) -> Result<BvhDocument, BvhError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut tokens = Vec::new();
    let mut motion_line = None;
    for (i, line) in lines.iter().enumerate() {
        let before = tokens.len();
        tokenize_line(i + 1, line, &mut tokens);
        if tokens[before..].first().map(|t| t.text) == Some("MOTION") {
            tokens.truncate(before + 1);
            motion_line = Some(i);
            break;
        }
    }

    let mut p = Parser {
        tokens,
        pos: 0,
        names: Vec::new(),
        parents: Vec::new(),
        offsets: Vec::new(),
        channels: Vec::new(),
        end_sites: Vec::new(),
    };
    p.expect("HIERARCHY")?;
    p.expect("ROOT")?;
    p.joint(-1)?;
    match p.next("`MOTION`") {
        Ok(t) if t.text == "MOTION" => {}
        Ok(t) if motion_line.is_some() => return Err(unexpected(t, "`MOTION`")),
        _ => return Err(BvhError::MissingMotion),
    }
    let motion_line = motion_line.ok_or(BvhError::MissingMotion)?;

    // header: `Frames: n` then `Frame Time: t`, then one row per line
    let mut header = Vec::new();
    let mut row_start = lines.len();
    for (i, line) in lines.iter().enumerate().skip(motion_line + 1) {
        tokenize_line(i + 1, line, &mut header);
        if header.len() >= 5 {
            row_start = i + 1;
            break;
        }
    }
    let mut h = Parser { tokens: header, pos: 0, ..p };
    let frames_tok = h.next("`Frames:`")?;
    let declared_frames = match frames_tok.text {
        "Frames:" => {
            let t = h.next("frame count")?;
            t.text.parse::<usize>().map_err(|_| BvhError::NonNumeric { line: t.line, col: t.col, text: t.text.into() })?
        }
        _ => return Err(unexpected(frames_tok, "`Frames:`")),
    };
    h.expect("Frame")?;
    h.expect("Time:")?;
    let frame_time = h.number("frame time")?;
    if h.pos != h.tokens.len() {
        let t = &h.tokens[h.pos];
        return Err(unexpected(t, "end of motion header"));
    }
    if !(frame_time > 0.0) {
        return Err(BvhError::BadFrameTime(frame_time));
    }

    let Parser { names, parents, offsets, channels, end_sites, .. } = h;
    let expected = channels.iter().map(Vec::len).sum::<usize>();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(declared_frames);
    for (i, line) in lines.iter().enumerate().skip(row_start) {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(expected);
        let mut col = 0;
        for field in line.split_whitespace() {
            col = line[col..].find(field).map_or(col, |k| col + k);
            row.push(parse_number(field, i + 1, col + 1)?);
            col += field.len();
        }
        if row.len() != expected {
            return Err(BvhError::RowArity { line: i + 1, got: row.len(), expected });
        }
        rows.push(row);
    }
    if rows.len() != declared_frames {
        return Err(BvhError::FrameCount { expected: declared_frames, got: rows.len() });
    }

    let skeleton = validate_skeleton(names, &parents, offsets)?.with_end_sites(end_sites);
    let frames = rows.iter().map(|row| decode_row(row, &channels)).collect();
    let clip = AnimationClip::new(frames, 1.0 / frame_time)?;
    BvhDocument::new(skeleton, channels, clip, frame_time)
}

fn decode_row(row: &[f64], channels: &[Vec<Channel>]) -> Pose {
    let mut rotations = Vec::with_capacity(channels.len());
    let mut root_translation = Vec3::zeros();
    let mut k = 0;
    for (j, list) in channels.iter().enumerate() {
        let mut r = Rotation3::identity();
        for c in list {
            let v = row[k];
            k += 1;
            if let Some(axis) = c.rotation_axis() {
                let rad = v.to_radians();
                r = r * match axis {
                    Axis::X => Rotation3::about_x(rad),
                    Axis::Y => Rotation3::about_y(rad),
                    Axis::Z => Rotation3::about_z(rad),
                };
            } else if let (0, Some(a)) = (j, c.position_axis()) {
                root_translation[a] = v;
            }
        }
        rotations.push(r.to_axis_angle());
    }
    Pose::new(rotations, root_translation)
}

fn fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Serializes a document: two-space indentation, uppercase keywords, six
/// decimals for offsets and motion values, LF line endings.
pub fn write_bvh(doc: &BvhDocument) -> Result<String, BvhError> {
    let skel = &doc.skeleton;
    let n = skel.joint_count();
    if doc.clip.joint_count() != n {
        return Err(BvhError::Mismatch(format!("clip has {} joints, skeleton has {n}", doc.clip.joint_count())));
    }
    let orders: Vec<Option<EulerOrder>> = (0..n).map(|j| doc.euler_order(j)).collect();
    for (j, order) in orders.iter().enumerate() {
        if order.is_none() && doc.clip.frames().iter().any(|f| f.rotations[j].norm() > 1e-9) {
            return Err(BvhError::Mismatch(format!("joint `{}` has no rotation channels but the clip rotates it", skel.name(j))));
        }
    }

    let mut out = String::from("HIERARCHY\n");
    write_joint(doc, 0, 0, &mut out);
    out.push_str("MOTION\n");
    let _ = writeln!(out, "Frames: {}", doc.clip.frame_count());
    let _ = writeln!(out, "Frame Time: {:.7}", doc.frame_time);

    let mut fields = Vec::with_capacity(doc.channel_count());
    for pose in doc.clip.frames() {
        fields.clear();
        for j in 0..n {
            let angles = orders[j].map(|o| matrix_to_euler(&Rotation3::from_axis_angle(&pose.rotations[j]), o));
            let mut rot_k = 0;
            for c in &doc.channels[j] {
                let v = if let Some(a) = c.position_axis() {
                    if j == 0 {
                        pose.root_translation[a]
                    } else {
                        skel.offset(j)[a]
                    }
                } else {
                    let v = angles.map_or(0.0, |a| a[rot_k].to_degrees());
                    rot_k += 1;
                    v
                };
                fields.push(fixed(v));
            }
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    Ok(out)
}

fn write_joint(doc: &BvhDocument, j: usize, depth: usize, out: &mut String) {
    let skel = &doc.skeleton;
    let pad = "  ".repeat(depth);
    let keyword = if depth == 0 { "ROOT" } else { "JOINT" };
    let o = skel.offset(j);
    let _ = writeln!(out, "{pad}{keyword} {}", skel.name(j));
    let _ = writeln!(out, "{pad}{{");
    let _ = writeln!(out, "{pad}  OFFSET {} {} {}", fixed(o.x), fixed(o.y), fixed(o.z));
    let ch = &doc.channels[j];
    if !ch.is_empty() {
        let names: Vec<&str> = ch.iter().map(|c| c.name()).collect();
        let _ = writeln!(out, "{pad}  CHANNELS {} {}", ch.len(), names.join(" "));
    }
    for &c in skel.children(j) {
        write_joint(doc, c, depth + 1, out);
    }
    for site in skel.end_sites().iter().filter(|e| e.joint == j) {
        let e = site.offset;
        let _ = writeln!(out, "{pad}  End Site");
        let _ = writeln!(out, "{pad}  {{");
        let _ = writeln!(out, "{pad}    OFFSET {} {} {}", fixed(e.x), fixed(e.y), fixed(e.z));
        let _ = writeln!(out, "{pad}  }}");
    }
    let _ = writeln!(out, "{pad}}}");
}

/// Converts Euler angles in degrees to an axis-angle vector.
pub fn euler_degrees_to_axis_angle(degrees: [f64; 3], order: EulerOrder) -> Vec3 {
    euler_to_matrix(degrees.map(f64::to_radians), order).to_axis_angle()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MINIMAL: &str = "\
HIERARCHY
ROOT Hips
{
  OFFSET 0.0 0.0 0.0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Chest
  {
    OFFSET 0.0 5.5 0.25
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0.0 3.0 0.0
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.0333333
1.0 2.0 3.0 0.0 0.0 0.0 90.0 0.0 0.0
0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0
";

    #[test]
    fn parses_minimal_fixture() {
        let doc = parse_bvh(MINIMAL).unwrap();
        let s = doc.skeleton();
        assert_eq!(s.joint_count(), 2);
        assert_eq!(s.names(), &["Hips", "Chest"]);
        assert_eq!(s.offset(1), Vec3::new(0.0, 5.5, 0.25));
        assert_eq!(doc.end_sites(), &[EndSite { joint: 1, offset: Vec3::new(0.0, 3.0, 0.0) }]);
        assert_eq!(doc.clip().frame_count(), 2);
        assert_eq!(doc.euler_order(1), Some(EulerOrder::Zxy));
        let f0 = &doc.clip().frames()[0];
        assert_eq!(f0.root_translation, Vec3::new(1.0, 2.0, 3.0));
        assert_relative_eq!(f0.rotations[1], Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2), epsilon = 1e-12);
        assert_eq!(doc.clip().frames()[1], Pose::identity(2));
        assert_relative_eq!(doc.clip().fps(), 1.0 / 0.0333333, epsilon = 1e-9);
    }

    #[test]
    fn row_arity_error_names_line() {
        let bad = MINIMAL.replace("0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0\n", "0.0 0.0 0.0 0.0\n");
        assert_eq!(parse_bvh(&bad).unwrap_err(), BvhError::RowArity { line: 20, got: 4, expected: 9 });
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse_bvh(&MINIMAL.replace("MOTION\n", "")).unwrap_err(), BvhError::MissingMotion);
        let end = MINIMAL.find("MOTION").unwrap();
        assert_eq!(parse_bvh(&MINIMAL[..end]).unwrap_err(), BvhError::MissingMotion);
        assert!(matches!(
            parse_bvh(&MINIMAL.replace("Xrotation Yrotation\n    End", "Xrotation Wrotation\n    End")),
            Err(BvhError::UnknownChannel { line: 9, .. })
        ));
        assert!(matches!(
            parse_bvh(&MINIMAL.replace("OFFSET 0.0 5.5", "OFFSET 0.0 abc")),
            Err(BvhError::NonNumeric { line: 8, col: 16, .. })
        ));
        assert!(matches!(parse_bvh(&MINIMAL.replace("1.0 2.0", "1.0 x2")), Err(BvhError::NonNumeric { line: 19, col: 5, .. })));
        assert!(matches!(
            parse_bvh(&MINIMAL.replace("CHANNELS 3", "CHANNELS 4")),
            Err(BvhError::ChannelCount { declared: 4, listed: 3, .. })
        ));
        assert!(matches!(
            parse_bvh(&MINIMAL.replace("CHANNELS 3", "CHANNELS 2")),
            Err(BvhError::ChannelCount { declared: 2, listed: 3, .. })
        ));
        assert!(matches!(parse_bvh(&MINIMAL.replace("Frames: 2", "Frames: 3")), Err(BvhError::FrameCount { expected: 3, got: 2 })));
        assert!(matches!(parse_bvh(&MINIMAL.replace("JOINT Chest", "JOIN Chest")), Err(BvhError::UnexpectedToken { line: 6, .. })));
        assert!(matches!(parse_bvh(&MINIMAL.replace("0.0333333", "0")), Err(BvhError::BadFrameTime(_))));
        assert!(matches!(
            parse_bvh(&MINIMAL.replace("Zrotation Xrotation Yrotation\n    End", "Zrotation Xrotation Zrotation\n    End")),
            Err(BvhError::ChannelLayout { .. })
        ));
        assert!(matches!(parse_bvh(""), Err(BvhError::UnexpectedEof(_))));
    }

    #[test]
    fn all_zero_rows_are_identity() {
        let doc = parse_bvh(&MINIMAL.replace("1.0 2.0 3.0 0.0 0.0 0.0 90.0", "0.0 0.0 0.0 0.0 0.0 0.0 0.0")).unwrap();
        assert!(doc.clip().frames().iter().all(|f| *f == Pose::identity(2)));
    }

    #[test]
    fn write_is_canonical_and_reparses() {
        let doc = parse_bvh(MINIMAL).unwrap();
        let text = write_bvh(&doc).unwrap();
        assert!(text.starts_with("HIERARCHY\nROOT Hips\n{\n  OFFSET 0.000000 0.000000 0.000000\n"));
        assert!(text.contains("  JOINT Chest\n  {\n    OFFSET 0.000000 5.500000 0.250000\n"));
        assert!(text.contains("Frame Time: 0.0333333\n"));
        assert!(!text.contains('\r'));
        let again = parse_bvh(&text).unwrap();
        assert_eq!(write_bvh(&again).unwrap(), text);
        for (a, b) in doc.clip().frames().iter().zip(again.clip().frames()) {
            for (ra, rb) in a.rotations.iter().zip(&b.rotations) {
                assert!(Rotation3::from_axis_angle(ra).angle_to(&Rotation3::from_axis_angle(rb)).to_degrees() < 1e-4);
            }
            assert_relative_eq!(a.root_translation, b.root_translation, epsilon = 1e-5);
        }
    }

    #[test]
    fn new_clip_layout() {
        let doc = parse_bvh(MINIMAL).unwrap();
        let skel = doc.skeleton().clone();
        let rest = AnimationClip::new(vec![Pose::identity(2)], 30.0).unwrap();
        let d = BvhDocument::from_clip(skel.clone(), rest).unwrap();
        assert_eq!(d.channels(0).len(), 3);
        let text = write_bvh(&d).unwrap();
        assert!(text.contains("Frames: 1\n"));
        assert_eq!(parse_bvh(&text).unwrap().clip().frame_count(), 1);

        let mut moved = Pose::identity(2);
        moved.root_translation = Vec3::new(0.0, 1.0, 0.0);
        let clip = AnimationClip::new(vec![moved], 30.0).unwrap();
        let d = BvhDocument::from_clip(skel, clip).unwrap();
        assert_eq!(d.channels(0).len(), 6);
        assert_eq!(d.channels(1).len(), 3);
        assert!(write_bvh(&d).unwrap().contains("CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation"));
    }

    #[test]
    fn with_clip_adds_missing_channels() {
        let text = MINIMAL
            .replace("CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation", "CHANNELS 3 Zrotation Xrotation Yrotation")
            .replace("    CHANNELS 3 Zrotation Xrotation Yrotation\n", "")
            .replace("1.0 2.0 3.0 0.0 0.0 0.0 90.0 0.0 0.0", "0.0 0.0 0.0")
            .replace("0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0", "0.0 0.0 0.0");
        let doc = parse_bvh(&text).unwrap();
        assert!(doc.channels(1).is_empty());
        let mut pose = Pose::identity(2);
        pose.rotations[1] = Vec3::new(0.0, 0.3, 0.0);
        pose.root_translation = Vec3::new(0.0, 0.0, 1.0);
        let clip = AnimationClip::new(vec![pose], 24.0).unwrap();
        let bad = BvhDocument::new(doc.skeleton().clone(), doc.channel_layout().to_vec(), clip.clone(), 1.0 / 24.0).unwrap();
        assert!(matches!(write_bvh(&bad), Err(BvhError::Mismatch(_))));
        let upgraded = doc.with_clip(clip).unwrap();
        assert_eq!(upgraded.channels(0).len(), 6);
        assert_eq!(upgraded.channels(1).len(), 3);
        assert!(write_bvh(&upgraded).is_ok());
    }

    #[test]
    fn negative_zero_is_printed_as_zero() {
        assert_eq!(fixed(-0.0), "0.000000");
        assert_eq!(fixed(-1e-9), "0.000000");
        assert_eq!(fixed(-1.5), "-1.500000");
    }
}
