//! Rotation representations and the closed-form alignment solvers used by
//! geometric initialization.
//!
//! Axis-angle vectors are the storage format for poses; [`Rotation3`] is the
//! working format for composition. All conversions are pure and allocation-free.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::Vec3;

/// Tolerance under which an input direction is treated as zero length.
pub const DEGENERATE_EPS: f64 = 1e-9;

/// Orthonormality tolerance used when accepting an arbitrary matrix as a rotation.
const ORTHO_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotationError {
    #[error("vector is too short to define a direction (norm {0:e})")]
    DegenerateVector(f64),
    #[error("matrix is not a proper rotation (orthonormality error {ortho:e}, det {det})")]
    NotARotation { ortho: f64, det: f64 },
    #[error("direction lists differ in length ({rest} rest vs {obs} observed)")]
    LengthMismatch { rest: usize, obs: usize },
    #[error("no direction pairs given")]
    Empty,
    #[error("unknown rotation order `{0}`")]
    UnknownOrder(String),
}

/// A proper rotation matrix (orthonormal, det +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Default for Rotation3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix after checking orthonormality and orientation.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, RotationError> {
        let ortho = (m.transpose() * m - Matrix3::identity()).abs().max();
        let det = m.determinant();
        if !ortho.is_finite() || ortho > ORTHO_TOL || (det - 1.0).abs() > ORTHO_TOL {
            return Err(RotationError::NotARotation { ortho, det });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix3<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self(self.0 * rhs.0)
    }

    pub fn from_axis_angle(theta: &Vec3) -> Self {
        axis_angle_to_matrix(theta)
    }

    pub fn to_axis_angle(&self) -> Vec3 {
        log_unchecked(&self.0)
    }

    /// Geodesic angle between two rotations, in radians.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let rel = self.0.transpose() * other.0;
        let c = ((rel.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let s = 0.5 * vee_skew(&rel).norm();
        s.atan2(c)
    }

    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    fn about_axis_index(axis: usize, angle: f64) -> Self {
        match axis {
            0 => Self::about_x(angle),
            1 => Self::about_y(angle),
            _ => Self::about_z(angle),
        }
    }
}

impl std::ops::Mul for Rotation3 {
    type Output = Rotation3;

    fn mul(self, rhs: Rotation3) -> Rotation3 {
        self.compose(&rhs)
    }
}

impl std::ops::Mul<Vec3> for &Rotation3 {
    type Output = Vec3;

    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

pub(crate) fn skew(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Returns `v` such that `m - mᵀ = 2 [v]ₓ`.
fn vee_skew(m: &Matrix3<f64>) -> Vec3 {
    Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]) * 0.5
}

/// Rodrigues formula. Small angles use the Taylor expansion of the coefficients.
pub fn axis_angle_to_matrix(theta: &Vec3) -> Rotation3 {
    let a2 = theta.norm_squared();
    let a = a2.sqrt();
    let (sinc, cosc) = if a < 1e-8 {
        (1.0 - a2 / 6.0, 0.5 - a2 / 24.0)
    } else {
        (a.sin() / a, (1.0 - a.cos()) / a2)
    };
    let k = skew(theta);
    Rotation3(Matrix3::identity() + k * sinc + k * k * cosc)
}

/// Inverse of [`axis_angle_to_matrix`], returning the canonical vector with
/// norm in `[0, π]`.
pub fn matrix_to_axis_angle(r: &Rotation3) -> Result<Vec3, RotationError> {
    let checked = Rotation3::from_matrix(r.0)?;
    Ok(log_unchecked(&checked.0))
}

fn log_unchecked(m: &Matrix3<f64>) -> Vec3 {
    let v = vee_skew(m);
    let s = v.norm();
    let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = s.atan2(c);
    if angle < 1e-12 {
        return Vec3::zeros();
    }
    if angle < 0.75 * PI {
        let factor = if angle < 1e-6 { 1.0 + angle * angle / 6.0 } else { angle / s };
        return canonicalize(&(v * factor));
    }
    // Near π the skew part vanishes; recover the axis from the symmetric part
    // (R + Rᵀ)/2 = cos·I + (1 - cos)·aaᵀ using its dominant diagonal column.
    let sym = (m + m.transpose()) * 0.5;
    let outer = (sym - Matrix3::identity() * c) / (1.0 - c);
    let mut k = 0;
    for i in 1..3 {
        if outer[(i, i)] > outer[(k, k)] {
            k = i;
        }
    }
    let mut axis: Vec3 = outer.column(k).into_owned();
    axis /= axis.norm();
    if s > 1e-12 {
        if axis.dot(&v) < 0.0 {
            axis = -axis;
        }
    } else {
        axis = positive_tie_break(axis);
    }
    canonicalize(&(axis * angle))
}

fn positive_tie_break(axis: Vec3) -> Vec3 {
    for i in 0..3 {
        if axis[i].abs() > 1e-12 {
            return if axis[i] < 0.0 { -axis } else { axis };
        }
    }
    axis
}

/// Wraps an axis-angle vector so its norm lies in `[0, π]`, flipping the axis
/// when needed. Angles below 1e-12 collapse to zero; an angle of exactly π
/// takes the axis whose first nonzero component is positive.
pub fn canonicalize(theta: &Vec3) -> Vec3 {
    let a = theta.norm();
    if !(a >= 1e-12) {
        return Vec3::zeros();
    }
    let axis = theta / a;
    let mut wrapped = a.rem_euclid(2.0 * PI);
    let mut axis = axis;
    if wrapped > PI {
        wrapped = 2.0 * PI - wrapped;
        axis = -axis;
    }
    if wrapped < 1e-12 {
        return Vec3::zeros();
    }
    if (wrapped - PI).abs() < 1e-12 {
        return positive_tie_break(axis) * PI;
    }
    axis * wrapped
}

/// A unit vector perpendicular to `v`, built by crossing with the basis vector
/// of least absolute component (first such index on ties).
pub fn perpendicular(v: &Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if v[i].abs() < v[k].abs() {
            k = i;
        }
    }
    let mut e = Vec3::zeros();
    e[k] = 1.0;
    v.cross(&e).normalize()
}

/// Minimal-angle rotation taking the direction of `a` onto the direction of `b`.
pub fn rotation_between_vectors(a: &Vec3, b: &Vec3) -> Result<Rotation3, RotationError> {
    let na = a.norm();
    let nb = b.norm();
    if !(na > DEGENERATE_EPS) {
        return Err(RotationError::DegenerateVector(na));
    }
    if !(nb > DEGENERATE_EPS) {
        return Err(RotationError::DegenerateVector(nb));
    }
    let ua = a / na;
    let ub = b / nb;
    let cross = ua.cross(&ub);
    let sin = cross.norm();
    let cos = ua.dot(&ub);
    if sin < 1e-12 {
        if cos > 0.0 {
            return Ok(Rotation3::identity());
        }
        return Ok(axis_angle_to_matrix(&(perpendicular(&ua) * PI)));
    }
    let angle = sin.atan2(cos);
    Ok(axis_angle_to_matrix(&(cross * (angle / sin))))
}

/// Outcome of [`orthogonal_procrustes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcrustesFit {
    pub rotation: Rotation3,
    /// Set when the weighted cross-covariance vanished and identity was returned.
    pub degenerate: bool,
}

/// Best rotation `R` minimizing `Σ w_k ‖R·rest_k − obs_k‖²` over SO(3).
///
/// Directions are expected to be normalized by the caller. A single pair falls
/// back to [`rotation_between_vectors`]. `weights` defaults to uniform.
pub fn orthogonal_procrustes(
    rest_dirs: &[Vec3],
    obs_dirs: &[Vec3],
    weights: Option<&[f64]>,
) -> Result<ProcrustesFit, RotationError> {
    if rest_dirs.len() != obs_dirs.len() {
        return Err(RotationError::LengthMismatch { rest: rest_dirs.len(), obs: obs_dirs.len() });
    }
    if rest_dirs.is_empty() {
        return Err(RotationError::Empty);
    }
    if let Some(w) = weights {
        if w.len() != rest_dirs.len() {
            return Err(RotationError::LengthMismatch { rest: rest_dirs.len(), obs: w.len() });
        }
    }
    if rest_dirs.len() == 1 {
        return Ok(match rotation_between_vectors(&rest_dirs[0], &obs_dirs[0]) {
            Ok(rotation) => ProcrustesFit { rotation, degenerate: false },
            Err(_) => ProcrustesFit { rotation: Rotation3::identity(), degenerate: true },
        });
    }

    let mut cov = Matrix3::zeros();
    for (k, (r, o)) in rest_dirs.iter().zip(obs_dirs).enumerate() {
        let w = weights.map_or(1.0, |w| w[k]);
        cov += o * r.transpose() * w;
    }
    if cov.abs().max() < 1e-15 {
        return Ok(ProcrustesFit { rotation: Rotation3::identity(), degenerate: true });
    }

    let svd = cov.svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        // singular values come sorted descending; flip the weakest direction
        d[(2, 2)] = -1.0;
    }
    Ok(ProcrustesFit { rotation: Rotation3(u * d * v_t), degenerate: false })
}

/// Axis letter of a rotation channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// Intrinsic Tait-Bryan order. `Zxy` means `R = Rz(a)·Rx(b)·Ry(c)`, the
/// matrix a BVH joint with `Zrotation Xrotation Yrotation` channels denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EulerOrder {
    Xyz,
    Xzy,
    Yxz,
    Yzx,
    #[default]
    Zxy,
    Zyx,
}

impl EulerOrder {
    pub const ALL: [EulerOrder; 6] = [
        EulerOrder::Xyz,
        EulerOrder::Xzy,
        EulerOrder::Yxz,
        EulerOrder::Yzx,
        EulerOrder::Zxy,
        EulerOrder::Zyx,
    ];

    pub fn axes(self) -> [Axis; 3] {
        use Axis::*;
        match self {
            EulerOrder::Xyz => [X, Y, Z],
            EulerOrder::Xzy => [X, Z, Y],
            EulerOrder::Yxz => [Y, X, Z],
            EulerOrder::Yzx => [Y, Z, X],
            EulerOrder::Zxy => [Z, X, Y],
            EulerOrder::Zyx => [Z, Y, X],
        }
    }

    pub fn from_axes(axes: [Axis; 3]) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.axes() == axes)
    }

    fn is_cyclic(self) -> bool {
        matches!(self, EulerOrder::Xyz | EulerOrder::Yzx | EulerOrder::Zxy)
    }
}

impl fmt::Display for EulerOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.axes() {
            write!(f, "{}", a.letter())?;
        }
        Ok(())
    }
}

impl FromStr for EulerOrder {
    type Err = RotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|o| o.to_string() == upper)
            .ok_or_else(|| RotationError::UnknownOrder(s.to_string()))
    }
}

/// Composes three angles (radians) in the given intrinsic order.
pub fn euler_to_matrix(angles: [f64; 3], order: EulerOrder) -> Rotation3 {
    let [i, j, k] = order.axes().map(Axis::index);
    Rotation3::about_axis_index(i, angles[0])
        * Rotation3::about_axis_index(j, angles[1])
        * Rotation3::about_axis_index(k, angles[2])
}

/// Decomposes a rotation into angles (radians) for the given intrinsic order.
///
/// The middle angle lies in `[−π/2, π/2]`, the outer two in `(−π, π]`. At
/// gimbal lock (|cos b| below 1e-12) the last angle is pinned to zero and the
/// whole residual rotation is assigned to the first.
pub fn matrix_to_euler(r: &Rotation3, order: EulerOrder) -> [f64; 3] {
    let m = r.matrix();
    let [i, j, k] = order.axes().map(Axis::index);
    let s = if order.is_cyclic() { 1.0 } else { -1.0 };
    let sin_b = (s * m[(i, k)]).clamp(-1.0, 1.0);
    let b = sin_b.asin();
    if 1.0 - sin_b.abs() < 1e-12 {
        let a = (s * m[(k, j)]).atan2(m[(j, j)]);
        return [a, b, 0.0];
    }
    let a = (-s * m[(j, k)]).atan2(m[(k, k)]);
    let c = (-s * m[(i, j)]).atan2(m[(i, i)]);
    [a, b, c]
}

/// Left Jacobian of the exponential map: `d exp(θ) = [J(θ)·dθ]ₓ exp(θ)`.
pub(crate) fn left_jacobian(theta: &Vec3) -> Matrix3<f64> {
    let a2 = theta.norm_squared();
    let a = a2.sqrt();
    let k = skew(theta);
    let (c1, c2) = if a < 1e-5 {
        (0.5 - a2 / 24.0, 1.0 / 6.0 - a2 / 120.0)
    } else {
        ((1.0 - a.cos()) / a2, (a - a.sin()) / (a2 * a))
    };
    Matrix3::identity() + k * c1 + k * k * c2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const FRAC_PI_2: f64 = PI / 2.0;

    fn assert_rotation(r: &Rotation3) {
        let m = r.matrix();
        assert!((m.transpose() * m - Matrix3::identity()).abs().max() < 1e-9);
        assert!((m.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_vector_is_identity() {
        assert_eq!(axis_angle_to_matrix(&Vec3::zeros()).into_matrix(), Matrix3::identity());
    }

    #[test]
    fn quarter_turn_about_x_maps_z_to_minus_y() {
        let r = axis_angle_to_matrix(&Vec3::new(FRAC_PI_2, 0.0, 0.0));
        assert_relative_eq!(r.apply(&Vec3::z()), Vec3::new(0.0, -1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn log_of_identity_and_quarter_z() {
        assert_eq!(matrix_to_axis_angle(&Rotation3::identity()).unwrap(), Vec3::zeros());
        let theta = matrix_to_axis_angle(&Rotation3::about_z(FRAC_PI_2)).unwrap();
        assert_relative_eq!(theta, Vec3::new(0.0, 0.0, FRAC_PI_2), epsilon = 1e-15);
    }

    #[test]
    fn half_turn_about_x_has_norm_pi() {
        let theta = matrix_to_axis_angle(&Rotation3::about_x(PI)).unwrap();
        assert_relative_eq!(theta.norm(), PI, epsilon = 1e-12);
        assert_relative_eq!(theta.normalize().x.abs(), 1.0, epsilon = 1e-12);
        // tie-break: exact half turns get the positive axis
        assert!(theta.x > 0.0);
    }

    #[test]
    fn log_rejects_non_rotations() {
        let scaled = Rotation3(Matrix3::identity() * 2.0);
        assert!(matches!(matrix_to_axis_angle(&scaled), Err(RotationError::NotARotation { .. })));
        let reflection = Rotation3(Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0)));
        assert!(matrix_to_axis_angle(&reflection).is_err());
    }

    #[test]
    fn canonicalize_wraps_long_vectors() {
        let t = canonicalize(&Vec3::new(0.0, 0.0, 1.5 * PI));
        assert_relative_eq!(t, Vec3::new(0.0, 0.0, -0.5 * PI), epsilon = 1e-12);
        assert_eq!(canonicalize(&Vec3::new(1e-13, 0.0, 0.0)), Vec3::zeros());
        assert_eq!(canonicalize(&Vec3::new(0.0, 2.0 * PI, 0.0)), Vec3::zeros());
    }

    #[test]
    fn align_equal_vectors_is_identity() {
        let v = Vec3::new(0.3, -1.0, 2.0);
        let r = rotation_between_vectors(&v, &(v * 3.0)).unwrap();
        assert_eq!(r, Rotation3::identity());
    }

    #[test]
    fn align_x_to_y_is_quarter_turn_about_z() {
        let r = rotation_between_vectors(&Vec3::x(), &Vec3::y()).unwrap();
        assert_relative_eq!(*r.matrix(), *Rotation3::about_z(FRAC_PI_2).matrix(), epsilon = 1e-15);
    }

    #[test]
    fn align_antiparallel_uses_deterministic_axis() {
        let r = rotation_between_vectors(&Vec3::x(), &(-Vec3::x())).unwrap();
        assert_rotation(&r);
        assert_relative_eq!(r.apply(&Vec3::x()), -Vec3::x(), epsilon = 1e-12);
        // least |component| of x is y (first tie) -> axis x × y = z
        assert_relative_eq!(r.to_axis_angle(), Vec3::new(0.0, 0.0, PI), epsilon = 1e-12);
    }

    #[test]
    fn align_rejects_zero_vectors() {
        assert!(matches!(
            rotation_between_vectors(&Vec3::zeros(), &Vec3::x()),
            Err(RotationError::DegenerateVector(_))
        ));
        assert!(rotation_between_vectors(&Vec3::x(), &Vec3::new(1e-12, 0.0, 0.0)).is_err());
    }

    #[test]
    fn procrustes_identity_and_quarter_turn() {
        let rest = [Vec3::x(), Vec3::y()];
        let fit = orthogonal_procrustes(&rest, &rest, None).unwrap();
        assert_relative_eq!(*fit.rotation.matrix(), Matrix3::identity(), epsilon = 1e-12);

        let obs = [Vec3::y(), -Vec3::x()];
        let fit = orthogonal_procrustes(&rest, &obs, None).unwrap();
        assert_relative_eq!(*fit.rotation.matrix(), *Rotation3::about_z(FRAC_PI_2).matrix(), epsilon = 1e-12);
        assert!(!fit.degenerate);
    }

    #[test]
    fn procrustes_single_pair_matches_vector_alignment() {
        let a = Vec3::new(1.0, 2.0, 0.5).normalize();
        let b = Vec3::new(-0.3, 0.1, 1.0).normalize();
        let fit = orthogonal_procrustes(&[a], &[b], None).unwrap();
        let direct = rotation_between_vectors(&a, &b).unwrap();
        assert_eq!(fit.rotation, direct);
    }

    #[test]
    fn procrustes_zero_covariance_is_flagged() {
        let rest = [Vec3::x(), -Vec3::x()];
        let obs = [Vec3::y(), Vec3::y()];
        let fit = orthogonal_procrustes(&rest, &obs, None).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.rotation, Rotation3::identity());
    }

    #[test]
    fn procrustes_input_errors() {
        assert_eq!(orthogonal_procrustes(&[], &[], None), Err(RotationError::Empty));
        assert!(matches!(
            orthogonal_procrustes(&[Vec3::x()], &[], None),
            Err(RotationError::LengthMismatch { .. })
        ));
        assert!(orthogonal_procrustes(&[Vec3::x(), Vec3::y()], &[Vec3::x(), Vec3::y()], Some(&[1.0])).is_err());
    }

    #[test]
    fn euler_zero_and_single_axis() {
        for order in EulerOrder::ALL {
            assert_eq!(euler_to_matrix([0.0; 3], order).into_matrix(), Matrix3::identity());
        }
        let r = euler_to_matrix([FRAC_PI_2, 0.0, 0.0], EulerOrder::Zxy);
        assert_relative_eq!(*r.matrix(), *Rotation3::about_z(FRAC_PI_2).matrix(), epsilon = 1e-15);
    }

    #[test]
    fn euler_gimbal_lock_round_trips_the_matrix() {
        for order in EulerOrder::ALL {
            let r = euler_to_matrix([0.4, FRAC_PI_2, -0.7], order);
            let angles = matrix_to_euler(&r, order);
            assert_eq!(angles[2], 0.0, "{order}");
            let back = euler_to_matrix(angles, order);
            assert_relative_eq!(*back.matrix(), *r.matrix(), epsilon = 1e-9);
        }
    }

    #[test]
    fn euler_order_parses_and_prints() {
        for order in EulerOrder::ALL {
            assert_eq!(order.to_string().parse::<EulerOrder>().unwrap(), order);
        }
        assert!("XXY".parse::<EulerOrder>().is_err());
    }

    fn vec3_strategy(bound: f64) -> impl Strategy<Value = Vec3> {
        prop::array::uniform3(-bound..bound).prop_map(Vec3::from)
    }

    proptest! {
        #[test]
        fn exp_is_a_rotation(theta in vec3_strategy(10.0)) {
            assert_rotation(&axis_angle_to_matrix(&theta));
        }

        #[test]
        fn exp_log_round_trip(dir in vec3_strategy(1.0), angle in 1e-6..(PI - 1e-6)) {
            prop_assume!(dir.norm() > 1e-3);
            let theta = dir.normalize() * angle;
            let back = matrix_to_axis_angle(&axis_angle_to_matrix(&theta)).unwrap();
            prop_assert!((back - theta).norm() < 1e-9, "{theta} -> {back}");
        }

        #[test]
        fn log_exp_round_trip_near_pi(dir in vec3_strategy(1.0), gap in 0.0..1e-3) {
            prop_assume!(dir.norm() > 1e-3);
            let r = axis_angle_to_matrix(&(dir.normalize() * (PI - gap)));
            let back = axis_angle_to_matrix(&matrix_to_axis_angle(&r).unwrap());
            prop_assert!((back.matrix() - r.matrix()).abs().max() < 1e-9);
        }

        #[test]
        fn alignment_maps_direction(a in vec3_strategy(5.0), b in vec3_strategy(5.0)) {
            prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
            let r = rotation_between_vectors(&a, &b).unwrap();
            assert_rotation(&r);
            prop_assert!((r.apply(&a.normalize()) - b.normalize()).norm() < 1e-9);
            prop_assert!(r.to_axis_angle().norm() <= PI + 1e-12);
        }

        #[test]
        fn euler_round_trip(a in -3.0..3.0f64, b in -1.5..1.5f64, c in -3.0..3.0f64, o in 0usize..6) {
            let order = EulerOrder::ALL[o];
            let back = matrix_to_euler(&euler_to_matrix([a, b, c], order), order);
            prop_assert!((back[0] - a).abs() < 1e-9 && (back[1] - b).abs() < 1e-9 && (back[2] - c).abs() < 1e-9,
                "{order}: {:?} -> {:?}", [a, b, c], back);
        }

        #[test]
        fn left_jacobian_matches_finite_differences(theta in vec3_strategy(2.5), m in 0usize..3) {
            let h = 1e-6;
            let mut tp = theta;
            tp[m] += h;
            let mut tm = theta;
            tm[m] -= h;
            let d = (axis_angle_to_matrix(&tp).into_matrix() - axis_angle_to_matrix(&tm).into_matrix()) / (2.0 * h);
            let omega = d * axis_angle_to_matrix(&theta).into_matrix().transpose();
            let analytic = left_jacobian(&theta).column(m).into_owned();
            prop_assert!((vee_skew(&omega) - analytic).norm() < 1e-7);
        }
    }
}
