//! Planar transmit arrays and element radiation patterns.

use std::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Result};

/// A point or direction in 3-D space, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector along `self`, or `None` for a zero or non-finite vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n.is_finite() && n > 0.0).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Isotropic,
    CosinePower,
}

/// Power radiation pattern of a single element.
///
/// `CosinePower` patterns radiate only into the front hemisphere with
/// `G(θ) = G₀·cos^q θ` and `q = G₀/2 − 1`, so the pattern integrates to 4π
/// over the hemisphere for any boresight gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementPattern {
    kind: PatternKind,
    boresight_gain: f64,
    exponent: f64,
}

impl ElementPattern {
    pub const ISOTROPIC: ElementPattern = ElementPattern {
        kind: PatternKind::Isotropic,
        boresight_gain: 1.0,
        exponent: 0.0,
    };

    /// Normalized cosine-power pattern with the given linear boresight gain.
    pub fn cosine_power(boresight_gain: f64) -> Result<Self> {
        if !(boresight_gain.is_finite() && boresight_gain >= 1.0) {
            return Err(Error::invalid(
                "boresight_gain",
                format!("{boresight_gain} must be a finite linear gain >= 1"),
            ));
        }
        Ok(Self {
            kind: PatternKind::CosinePower,
            boresight_gain,
            exponent: boresight_gain / 2.0 - 1.0,
        })
    }

    /// Cosine-power pattern from a boresight gain in dBi.
    pub fn cosine_power_db(gain_db: f64) -> Result<Self> {
        Self::cosine_power(crate::db_to_linear(gain_db))
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn boresight_gain(&self) -> f64 {
        self.boresight_gain
    }

    /// Exponent `q` of the power pattern `cos^q θ`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Linear power gain in a direction making angle θ with boresight.
    pub fn gain(&self, direction_cosine: f64) -> f64 {
        match self.kind {
            PatternKind::Isotropic => 1.0,
            PatternKind::CosinePower => {
                if direction_cosine > 0.0 {
                    self.boresight_gain * direction_cosine.min(1.0).powf(self.exponent)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Free function form of [`ElementPattern::gain`].
pub fn element_gain(pattern: &ElementPattern, direction_cosine: f64) -> f64 {
    pattern.gain(direction_cosine)
}

/// A radiating (or reflecting) element: position, boresight and pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub position: Vec3,
    pub normal: Vec3,
    pub pattern: ElementPattern,
}

impl Element {
    /// Creates an element; the normal is normalized.
    pub fn new(position: Vec3, normal: Vec3, pattern: ElementPattern) -> Result<Self> {
        let normal = unit_normal(normal)?;
        if !position.is_finite() {
            return Err(Error::invalid("position", "non-finite coordinates"));
        }
        Ok(Self {
            position,
            normal,
            pattern,
        })
    }

    /// Gain towards `point`, using the angle between the normal and the
    /// direction from the element to the point.
    pub fn gain_towards(&self, point: Vec3) -> f64 {
        match self.pattern.kind {
            PatternKind::Isotropic => 1.0,
            PatternKind::CosinePower => {
                let d = point - self.position;
                let r = d.norm();
                if r == 0.0 {
                    return 0.0;
                }
                self.pattern.gain(d.dot(self.normal) / r)
            }
        }
    }
}

fn unit_normal(normal: Vec3) -> Result<Vec3> {
    normal
        .normalized()
        .ok_or_else(|| Error::invalid("normal", "must be a finite non-zero vector"))
}

/// Uniform rectangular array of identical elements in a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub elements: Vec<Element>,
    pub edge_length: f64,
    pub rows: usize,
    pub cols: usize,
    pub center: Vec3,
    pub normal: Vec3,
    /// Pitch between neighbouring rows and neighbouring columns.
    pub pitch: (f64, f64),
}

impl ArrayGeometry {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Row pitch (equal to the column pitch for square arrays); zero for a
    /// single row.
    pub fn spacing(&self) -> f64 {
        if self.rows > 1 {
            self.pitch.0
        } else {
            self.pitch.1
        }
    }

    pub fn pattern(&self) -> ElementPattern {
        self.elements[0].pattern
    }
}

/// In-plane orthonormal basis `(u, v)` for a plane with the given unit
/// normal. For `+z` this is `(x, y)`.
pub fn plane_basis(normal: Vec3) -> (Vec3, Vec3) {
    let helper = if normal.y.abs() < 0.9 { Vec3::Y } else { Vec3::X };
    let u = helper.cross(normal).normalized().expect("helper not parallel");
    let v = normal.cross(u);
    (u, v)
}

/// Builds a `rows × cols` grid spanning `edge_length` in both directions,
/// centered at `center`, with all elements facing `normal`.
pub fn make_planar_array(
    rows: usize,
    cols: usize,
    edge_length: f64,
    center: Vec3,
    normal: Vec3,
    pattern: ElementPattern,
) -> Result<ArrayGeometry> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("rows/cols", "array needs at least one element"));
    }
    if (rows > 1 || cols > 1) && !(edge_length.is_finite() && edge_length > 0.0) {
        return Err(Error::invalid(
            "edge_length",
            format!("{edge_length} must be positive"),
        ));
    }
    let normal = unit_normal(normal)?;
    let (u, v) = plane_basis(normal);
    let pitch = |n: usize| if n > 1 { edge_length / (n - 1) as f64 } else { 0.0 };
    let (row_pitch, col_pitch) = (pitch(rows), pitch(cols));

    let mut elements = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let dv = (i as f64 - (rows - 1) as f64 / 2.0) * row_pitch;
        for j in 0..cols {
            let du = (j as f64 - (cols - 1) as f64 / 2.0) * col_pitch;
            elements.push(Element {
                position: center + u * du + v * dv,
                normal,
                pattern,
            });
        }
    }
    Ok(ArrayGeometry {
        elements,
        edge_length: if rows > 1 || cols > 1 { edge_length } else { 0.0 },
        rows,
        cols,
        center,
        normal,
        pitch: (row_pitch, col_pitch),
    })
}

/// Near/far-field threshold distance `L²/λ`.
pub fn fraunhofer_threshold(edge_length: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::invalid("wavelength", "must be positive"));
    }
    Ok(edge_length * edge_length / wavelength)
}

/// Edge length `√(d′λ)` whose near/far-field threshold equals `d_prime`.
pub fn edge_length_for_threshold(d_prime: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::invalid("wavelength", "must be positive"));
    }
    if !(d_prime >= 0.0) {
        return Err(Error::invalid("d_prime", format!("{d_prime} must be >= 0")));
    }
    Ok((d_prime * wavelength).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const LAMBDA_3GHZ: f64 = 0.099_930_819_333;

    #[test]
    fn ten_by_ten_array_spacing() {
        let l = edge_length_for_threshold(15.0, LAMBDA_3GHZ).unwrap();
        assert_relative_eq!(l, 1.224_321, max_relative = 1e-5);
        let pattern = ElementPattern::cosine_power_db(13.0).unwrap();
        let a = make_planar_array(10, 10, l, Vec3::ZERO, Vec3::Z, pattern).unwrap();
        assert_eq!(a.len(), 100);
        assert_relative_eq!(a.spacing(), 0.136_036, max_relative = 1e-5);
    }

    #[test]
    fn single_element_sits_at_center() {
        let c = Vec3::new(1.0, 2.0, 3.0);
        let a = make_planar_array(1, 1, 0.0, c, Vec3::Z, ElementPattern::ISOTROPIC).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.elements[0].position, c);
    }

    #[test]
    fn two_by_two_corners() {
        let a = make_planar_array(2, 2, 1.0, Vec3::ZERO, Vec3::Z, ElementPattern::ISOTROPIC)
            .unwrap();
        let mut mean = Vec3::ZERO;
        for e in &a.elements {
            assert_relative_eq!(e.position.x.abs(), 0.5);
            assert_relative_eq!(e.position.y.abs(), 0.5);
            assert_eq!(e.position.z, 0.0);
            mean = mean + e.position * 0.25;
        }
        assert!(mean.norm() < 1e-15);
    }

    #[test]
    fn normal_is_normalized() {
        let a = make_planar_array(
            3,
            3,
            1.0,
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, 5.0),
            ElementPattern::ISOTROPIC,
        )
        .unwrap();
        assert_relative_eq!(a.normal.norm(), 1.0);
    }

    #[test]
    fn rejects_bad_edge_length() {
        assert!(make_planar_array(3, 3, 0.0, Vec3::ZERO, Vec3::Z, ElementPattern::ISOTROPIC)
            .is_err());
        assert!(make_planar_array(3, 3, -1.0, Vec3::ZERO, Vec3::Z, ElementPattern::ISOTROPIC)
            .is_err());
        assert!(make_planar_array(3, 3, 1.0, Vec3::ZERO, Vec3::ZERO, ElementPattern::ISOTROPIC)
            .is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_relative_eq!(
            fraunhofer_threshold(1.2243, 0.09993).unwrap(),
            15.0,
            max_relative = 1e-4
        );
        assert_eq!(fraunhofer_threshold(0.0, 0.3).unwrap(), 0.0);
        assert_relative_eq!(fraunhofer_threshold(0.45, 0.1).unwrap(), 2.025, max_relative = 1e-12);
        assert_relative_eq!(edge_length_for_threshold(2.025, 0.1).unwrap(), 0.45, max_relative = 1e-12);
        assert_eq!(edge_length_for_threshold(0.0, 0.1).unwrap(), 0.0);
        assert!(fraunhofer_threshold(1.0, 0.0).is_err());
        assert!(edge_length_for_threshold(-1.0, 0.1).is_err());
    }

    #[test]
    fn pattern_values() {
        let p = ElementPattern::cosine_power_db(13.0).unwrap();
        assert_relative_eq!(p.gain(1.0), 19.952_623, max_relative = 1e-6);
        assert_eq!(p.gain(0.0), 0.0);
        assert_eq!(p.gain(-0.5), 0.0);
        assert_eq!(ElementPattern::ISOTROPIC.gain(-0.3), 1.0);
        assert!(ElementPattern::cosine_power(0.5).is_err());
    }

    #[test]
    fn grid_symmetry() {
        for (r, c) in [(1, 4), (3, 3), (4, 5), (10, 10)] {
            let a = make_planar_array(r, c, 0.7, Vec3::ZERO, Vec3::new(1.0, 1.0, 0.0),
                ElementPattern::ISOTROPIC).unwrap();
            for e in &a.elements {
                let mirrored = -e.position;
                assert!(a.elements.iter().any(|o| o.position.distance(mirrored) < 1e-12));
            }
        }
    }
}
