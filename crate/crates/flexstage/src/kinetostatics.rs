//! Frames, wrenches, and section properties underlying all stiffness models.
//!
//! Conventions (fixed project-wide):
//! - A wrench packs force then moment: `(Fx, Fy, Fz, Mx, My, Mz)`.
//! - `wrench_transform(from, to)` produces the 6×6 map `J` with
//!   `M_to = R·M_from + r × (R·F_from)`, where `r` locates the source origin
//!   relative to the target origin.
//! - All quantities are SI (m, N, Pa); unit conversion happens at the CLI
//!   boundary only.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use std::fmt;

/// Orthonormality/determinant tolerance for rotation matrices.
pub const ROTATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum KinetostaticsError {
    /// A dimension or elastic constant violated its sign constraint.
    NonPositive { name: &'static str, value: f64 },
    /// Section interpolation requires `t <= b`.
    ThicknessExceedsWidth { t: f64, b: f64 },
    /// Rotation matrix failed the orthonormality / right-handedness check.
    NonOrthonormalRotation { defect: f64 },
    /// A wrench or vector contained NaN/Inf.
    NonFinite { name: &'static str },
    /// Shear factor must be at least 1 (energy-consistent correction).
    ShearFactorBelowOne { value: f64 },
    /// Density cannot be negative.
    NegativeDensity { value: f64 },
}

impl fmt::Display for KinetostaticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositive { name, value } => {
                write!(f, "{name} must be positive, got {value}")
            }
            Self::ThicknessExceedsWidth { t, b } => {
                write!(f, "thickness {t} exceeds width {b}; the torsion interpolation needs t <= b")
            }
            Self::NonOrthonormalRotation { defect } => {
                write!(f, "rotation matrix is not orthonormal/right-handed (defect {defect:.3e})")
            }
            Self::NonFinite { name } => write!(f, "{name} contains non-finite components"),
            Self::ShearFactorBelowOne { value } => {
                write!(f, "shear factor must be >= 1, got {value}")
            }
            Self::NegativeDensity { value } => write!(f, "density must be >= 0, got {value}"),
        }
    }
}

impl std::error::Error for KinetostaticsError {}

/// Linear-elastic isotropic material with a shear correction factor.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Material {
    /// Young's modulus E (Pa).
    pub youngs_modulus: f64,
    /// Shear modulus G (Pa).
    pub shear_modulus: f64,
    /// Shear correction factor α (1.2 for rectangular sections).
    pub shear_factor: f64,
    /// Density ρ (kg/m³), used only for mass estimates.
    pub density: f64,
}

impl Material {
    pub fn new(
        youngs_modulus: f64,
        shear_modulus: f64,
        shear_factor: f64,
        density: f64,
    ) -> Result<Self, KinetostaticsError> {
        if !(youngs_modulus > 0.0) {
            return Err(KinetostaticsError::NonPositive { name: "youngs_modulus", value: youngs_modulus });
        }
        if !(shear_modulus > 0.0) {
            return Err(KinetostaticsError::NonPositive { name: "shear_modulus", value: shear_modulus });
        }
        if !(shear_factor >= 1.0) {
            return Err(KinetostaticsError::ShearFactorBelowOne { value: shear_factor });
        }
        if !(density >= 0.0) {
            return Err(KinetostaticsError::NegativeDensity { value: density });
        }
        Ok(Self { youngs_modulus, shear_modulus, shear_factor, density })
    }

    /// Al-7075 constants used throughout the default configuration:
    /// E = 71 GPa, G = 26.7 GPa, α = 1.2, ρ = 2810 kg/m³.
    pub fn aluminum_7075() -> Self {
        Self {
            youngs_modulus: 71.0e9,
            shear_modulus: 26.7e9,
            shear_factor: 1.2,
            density: 2810.0,
        }
    }
}

/// Rectangular cross-section with derived area and second moments.
///
/// The local beam frame puts the thickness `t` along the local y axis (the
/// compliant bending direction) and the width `b` along local z, so
/// `I_z = b·t³/12` governs in-plane (motional) bending and `I_y = t·b³/12`
/// the out-of-plane (lateral) bending. The torsion constant uses the
/// rectangular-section interpolation
/// `I_p = t³·b·(1/3 − 0.21·t/b + 0.0175·t⁵/b⁵)` valid for `t <= b`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CrossSection {
    pub thickness: f64,
    pub width: f64,
    pub area: f64,
    pub i_y: f64,
    pub i_z: f64,
    pub i_p: f64,
}

/// Derive section properties from thickness `t` and width `b` (meters).
pub fn section_properties(t: f64, b: f64) -> Result<CrossSection, KinetostaticsError> {
    if !(t > 0.0) {
        return Err(KinetostaticsError::NonPositive { name: "thickness", value: t });
    }
    if !(b > 0.0) {
        return Err(KinetostaticsError::NonPositive { name: "width", value: b });
    }
    if t > b {
        return Err(KinetostaticsError::ThicknessExceedsWidth { t, b });
    }
    let ratio = t / b;
    let i_p = t.powi(3) * b * (1.0 / 3.0 - 0.21 * ratio + 0.0175 * ratio.powi(5));
    Ok(CrossSection {
        thickness: t,
        width: b,
        area: t * b,
        i_y: t * b.powi(3) / 12.0,
        i_z: b * t.powi(3) / 12.0,
        i_p,
    })
}

/// Skew-symmetric operator: `skew(v)·u == v × u`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// A rigid frame: rotation and origin expressed in a common parent frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialFrame {
    rotation: Matrix3<f64>,
    origin: Vector3<f64>,
}

impl SpatialFrame {
    pub fn new(rotation: Matrix3<f64>, origin: Vector3<f64>) -> Result<Self, KinetostaticsError> {
        if !rotation.iter().all(|x| x.is_finite()) || !origin.iter().all(|x| x.is_finite()) {
            return Err(KinetostaticsError::NonFinite { name: "frame" });
        }
        let defect = (rotation.transpose() * rotation - Matrix3::identity()).norm();
        let det_defect = (rotation.determinant() - 1.0).abs();
        if defect > ROTATION_TOL || det_defect > ROTATION_TOL {
            return Err(KinetostaticsError::NonOrthonormalRotation { defect: defect.max(det_defect) });
        }
        Ok(Self { rotation, origin })
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), origin: Vector3::zeros() }
    }

    /// Identity orientation at the given origin.
    pub fn at(origin: Vector3<f64>) -> Self {
        Self { rotation: Matrix3::identity(), origin }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn origin(&self) -> &Vector3<f64> {
        &self.origin
    }

    /// Mirror the frame through the x = 0 plane. The rotation is conjugated
    /// by the reflection so the result is again right-handed.
    pub fn mirrored_x(&self) -> Self {
        let m = Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0));
        Self { rotation: m * self.rotation * m, origin: m * self.origin }
    }
}

/// Force-moment pair acting at a frame origin, packed `(F; M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench(pub Vector6<f64>);

impl Wrench {
    pub fn new(force: Vector3<f64>, moment: Vector3<f64>) -> Result<Self, KinetostaticsError> {
        let w = Vector6::new(force.x, force.y, force.z, moment.x, moment.y, moment.z);
        if !w.iter().all(|x| x.is_finite()) {
            return Err(KinetostaticsError::NonFinite { name: "wrench" });
        }
        Ok(Self(w))
    }

    pub fn zero() -> Self {
        Self(Vector6::zeros())
    }

    pub fn from_vector(v: Vector6<f64>) -> Result<Self, KinetostaticsError> {
        if !v.iter().all(|x| x.is_finite()) {
            return Err(KinetostaticsError::NonFinite { name: "wrench" });
        }
        Ok(Self(v))
    }

    pub fn force(&self) -> Vector3<f64> {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn moment(&self) -> Vector3<f64> {
        Vector3::new(self.0[3], self.0[4], self.0[5])
    }
}

/// 6×6 force transformation taking a wrench expressed at `from` to the
/// statically equivalent wrench expressed at `to`.
///
/// Block form `[[R, 0], [s(r)·R, R]]` with `R` the relative rotation and
/// `r` the location of `from`'s origin relative to `to`'s origin in `to`
/// coordinates. Satisfies the composition law `J(a→c) = J(b→c)·J(a→b)`.
pub fn wrench_transform(from: &SpatialFrame, to: &SpatialFrame) -> Matrix6<f64> {
    let r_rel = to.rotation.transpose() * from.rotation;
    let r_vec = to.rotation.transpose() * (from.origin - to.origin);
    let mut j = Matrix6::zeros();
    let sr = skew(&r_vec) * r_rel;
    for i in 0..3 {
        for k in 0..3 {
            j[(i, k)] = r_rel[(i, k)];
            j[(i + 3, k + 3)] = r_rel[(i, k)];
            j[(i + 3, k)] = sr[(i, k)];
        }
    }
    j
}

/// Transform a wrench from one frame to another (both in a common parent).
pub fn transform_wrench(w: &Wrench, from: &SpatialFrame, to: &SpatialFrame) -> Wrench {
    Wrench(wrench_transform(from, to) * w.0)
}
