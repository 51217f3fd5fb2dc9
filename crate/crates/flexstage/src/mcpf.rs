//! Half-MCPF skeleton construction, strain-energy assembly, redundant
//! reaction resolution, and motional/lateral stiffness extraction.
//!
//! An MCPF (multi-layer compound parallelogram flexure) acts as a long-stroke
//! prismatic joint. Its half-unit skeleton is modeled as two mirror-image
//! fold-back chains of `layer_count` compliant beams each, hanging between
//! ground clamps (points A, B) and a rigid shuttle that carries the load
//! point P. The chain-to-shuttle junctions are the interface points C, D.
//!
//! Geometry conventions: the skeleton lies in the global XY plane; beams run
//! along ±X, the motional drive acts along +Y, the lateral drive along −Z
//! (out of plane). Each beam's local frame has x along the beam axis, y along
//! the thickness (motional bending via `I_z`), z along the width (lateral
//! bending via `I_y`). The load point P carries a rotated frame whose local z
//! is the motion direction, so the motional drive is `F_Pz` and the lateral
//! drive `F_Py` in P's own frame.
//!
//! The redundant interface wrenches are found by minimizing the complementary
//! strain energy subject to shuttle equilibrium (a KKT system), which is the
//! matrix form of Castigliano compatibility: stationarity of U in every
//! redundant reaction component.

use crate::kinetostatics::{
    section_properties, skew, wrench_transform, CrossSection, KinetostaticsError, Material,
    SpatialFrame, Wrench,
};
use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};
use std::fmt;

/// MCPF family labels used across the stage model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// XY guider.
    Xg,
    /// XY decoupler.
    Xd,
    /// Z guider.
    Zg,
    /// Z decoupler.
    Zd,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Xg, Family::Xd, Family::Zg, Family::Zd];

    pub fn label(&self) -> &'static str {
        match self {
            Family::Xg => "xg",
            Family::Xd => "xd",
            Family::Zg => "zg",
            Family::Zd => "zd",
        }
    }

    pub fn from_label(s: &str) -> Option<Family> {
        match s {
            "xg" => Some(Family::Xg),
            "xd" => Some(Family::Xd),
            "zg" => Some(Family::Zg),
            "zd" => Some(Family::Zd),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum McpfError {
    Kinetostatics(KinetostaticsError),
    /// l must be at least 10·t for the slender-beam model to hold.
    NotSlender { length: f64, thickness: f64 },
    ZeroLayers,
    NonPositive { name: &'static str, value: f64 },
    /// The compatibility system is singular or near-singular.
    SingularCompatibility { condition: f64 },
    /// Load referenced a label that is not a skeleton point.
    UnknownPoint { label: String },
    /// Section coordinate outside [0, beam length].
    SectionOutOfRange { x: f64, length: f64 },
    BeamIndexOutOfRange { index: usize },
}

impl fmt::Display for McpfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kinetostatics(e) => write!(f, "{e}"),
            Self::NotSlender { length, thickness } => write!(
                f,
                "beam length {length} must be at least 10x thickness {thickness}"
            ),
            Self::ZeroLayers => write!(f, "layer_count must be at least 1"),
            Self::NonPositive { name, value } => write!(f, "{name} must be positive, got {value}"),
            Self::SingularCompatibility { condition } => {
                write!(f, "compatibility system is singular (condition {condition:.3e}); skeleton is ill-posed")
            }
            Self::UnknownPoint { label } => write!(f, "load at unknown point '{label}'"),
            Self::SectionOutOfRange { x, length } => {
                write!(f, "section coordinate {x} outside [0, {length}]")
            }
            Self::BeamIndexOutOfRange { index } => write!(f, "beam index {index} out of range"),
        }
    }
}

impl std::error::Error for McpfError {}

impl From<KinetostaticsError> for McpfError {
    fn from(e: KinetostaticsError) -> Self {
        Self::Kinetostatics(e)
    }
}

/// Geometry of one MCPF unit. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McpfParams {
    /// Compliant beam thickness t (thin, motional-bending direction).
    pub beam_thickness: f64,
    /// Compliant beam length l.
    pub beam_length: f64,
    /// Compliant beam width b (out-of-plane).
    pub beam_width: f64,
    /// Number of beam layers per chain (stroke multiplier).
    pub layer_count: u32,
    /// Rigid connector span between layers; also the shuttle arm half-span.
    pub rigid_link_span: f64,
}

impl McpfParams {
    /// Params with the default three layers and a connector span of l/10.
    pub fn new(t: f64, l: f64, b: f64) -> Result<Self, McpfError> {
        Self::with_layers(t, l, b, 3, l / 10.0)
    }

    pub fn with_layers(
        t: f64,
        l: f64,
        b: f64,
        layer_count: u32,
        rigid_link_span: f64,
    ) -> Result<Self, McpfError> {
        let p = Self {
            beam_thickness: t,
            beam_length: l,
            beam_width: b,
            layer_count,
            rigid_link_span,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), McpfError> {
        section_properties(self.beam_thickness, self.beam_width)?;
        if !(self.beam_length > 0.0) {
            return Err(McpfError::NonPositive { name: "beam_length", value: self.beam_length });
        }
        if self.layer_count == 0 {
            return Err(McpfError::ZeroLayers);
        }
        if !(self.rigid_link_span > 0.0) {
            return Err(McpfError::NonPositive {
                name: "rigid_link_span",
                value: self.rigid_link_span,
            });
        }
        if self.beam_length < 10.0 * self.beam_thickness {
            return Err(McpfError::NotSlender {
                length: self.beam_length,
                thickness: self.beam_thickness,
            });
        }
        Ok(())
    }

    /// True when l < 20·t, where geometric nonlinearity (not modeled) starts
    /// to matter.
    pub fn slenderness_warning(&self) -> bool {
        self.beam_length < 20.0 * self.beam_thickness
    }

    pub fn section(&self) -> Result<CrossSection, McpfError> {
        Ok(section_properties(self.beam_thickness, self.beam_width)?)
    }
}

/// Named skeleton points: drive point P, clamps A/B, shuttle interfaces C/D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointId {
    P,
    A,
    B,
    C,
    D,
}

impl PointId {
    pub fn from_label(s: &str) -> Result<PointId, McpfError> {
        match s {
            "P" | "p" => Ok(PointId::P),
            "A" | "a" => Ok(PointId::A),
            "B" | "b" => Ok(PointId::B),
            "C" | "c" => Ok(PointId::C),
            "D" | "d" => Ok(PointId::D),
            other => Err(McpfError::UnknownPoint { label: other.to_string() }),
        }
    }
}

/// One compliant beam segment with its local frame at the root end.
#[derive(Debug, Clone)]
pub struct BeamSegment {
    /// Local frame: origin at the root-side end, x along the beam axis.
    pub frame: SpatialFrame,
    pub length: f64,
    pub section: CrossSection,
    /// Which chain the segment belongs to (0 = left, 1 = right).
    pub chain: usize,
    /// Position along the chain, 0 = at the clamp.
    pub level: usize,
}

impl BeamSegment {
    pub fn start(&self) -> Vector3<f64> {
        *self.frame.origin()
    }

    pub fn end(&self) -> Vector3<f64> {
        self.frame.origin() + self.frame.rotation() * Vector3::new(self.length, 0.0, 0.0)
    }
}

/// Energy-free rigid connector, kept for inspection and FE meshing.
#[derive(Debug, Clone, Copy)]
pub struct RigidLink {
    pub from: Vector3<f64>,
    pub to: Vector3<f64>,
}

/// Serial fold-back chain: beam indices from the clamp toward the shuttle.
#[derive(Debug, Clone)]
pub struct Chain {
    pub beams: Vec<usize>,
    pub clamp: PointId,
    pub interface: PointId,
}

/// Load pattern of one stiffness case.
///
/// Motional: drive `F_Pz` at P; reactions `(F_kx, F_ky, M_kz)` at A–D.
/// Lateral: drive `F_Py` at P; reactions `(F_kz, M_kx, M_ky)` at A–D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadCaseKind {
    Motional,
    Lateral,
}

impl LoadCaseKind {
    /// Wrench component indices active in the reaction pattern (and in the
    /// equilibrium projection). Ordering (Fx,Fy,Fz,Mx,My,Mz).
    pub fn pattern_indices(&self) -> [usize; 3] {
        match self {
            // In-plane set for the planar skeleton.
            LoadCaseKind::Motional => [0, 1, 5],
            // Out-of-plane set.
            LoadCaseKind::Lateral => [2, 3, 4],
        }
    }

    /// Unit drive wrench at P expressed in the global frame.
    pub fn drive_wrench_global(&self) -> Vector6<f64> {
        match self {
            // F_Pz in P's frame = +Y globally.
            LoadCaseKind::Motional => Vector6::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0),
            // F_Py in P's frame = -Z globally.
            LoadCaseKind::Lateral => Vector6::new(0.0, 0.0, -1.0, 0.0, 0.0, 0.0),
        }
    }
}

/// Skeleton representation of half an MCPF.
#[derive(Debug, Clone)]
pub struct HalfMcpfSkeleton {
    pub params: McpfParams,
    pub beams: Vec<BeamSegment>,
    pub links: Vec<RigidLink>,
    chains: [Chain; 2],
    points: [(PointId, SpatialFrame); 5],
}

impl HalfMcpfSkeleton {
    pub fn point_frame(&self, id: PointId) -> &SpatialFrame {
        &self.points.iter().find(|(p, _)| *p == id).expect("all points present").1
    }

    pub fn chains(&self) -> &[Chain; 2] {
        &self.chains
    }

    /// The four clamped/interface reaction points.
    pub fn reaction_points(&self) -> [PointId; 4] {
        [PointId::A, PointId::B, PointId::C, PointId::D]
    }

    /// Geometric mirror through the x = 0 plane (exchanges the chains).
    pub fn mirrored_x(&self) -> Self {
        let mirror_beam = |b: &BeamSegment| BeamSegment {
            frame: b.frame.mirrored_x(),
            length: b.length,
            section: b.section,
            chain: 1 - b.chain,
            level: b.level,
        };
        let flip = Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0));
        HalfMcpfSkeleton {
            params: self.params,
            beams: self.beams.iter().map(mirror_beam).collect(),
            links: self
                .links
                .iter()
                .map(|l| RigidLink { from: flip * l.from, to: flip * l.to })
                .collect(),
            chains: [self.chains[1].clone(), self.chains[0].clone()],
            points: {
                let mut pts = self.points;
                for (_, f) in pts.iter_mut() {
                    *f = f.mirrored_x();
                }
                pts
            },
        }
    }
}

/// Build the half-MCPF skeleton of one unit.
///
/// Produces `2·layer_count` compliant segments: two mirror-image fold-back
/// chains, each descending by `rigid_link_span` per layer, clamped at A/B and
/// joined to the shuttle (interfaces C/D) whose center carries P.
pub fn build_half_skeleton(params: &McpfParams) -> Result<HalfMcpfSkeleton, McpfError> {
    params.validate()?;
    let n = params.layer_count as usize;
    let l = params.beam_length;
    let a = params.rigid_link_span;
    let pitch = params.rigid_link_span;
    let section = params.section()?;

    let x_inner = a;
    let x_outer = a + l;
    let y_level = |j: usize| -(j as f64) * pitch;
    let y_shuttle = y_level(n - 1);

    // Local frame pointing from the root end toward the tip end of a beam.
    let beam_frame = |root: Vector3<f64>, tip: Vector3<f64>| -> SpatialFrame {
        let dir = (tip - root) / l;
        let rot = if dir.x > 0.0 {
            Matrix3::identity()
        } else {
            Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, -1.0))
        };
        SpatialFrame::new(rot, root).expect("axis-aligned frame")
    };

    let mut beams = Vec::with_capacity(2 * n);
    let mut links = Vec::new();
    let mut chains = [
        Chain { beams: Vec::new(), clamp: PointId::A, interface: PointId::C },
        Chain { beams: Vec::new(), clamp: PointId::B, interface: PointId::D },
    ];
    let mut clamp_pos = [Vector3::zeros(); 2];

    for (side, sign) in [(0usize, -1.0f64), (1usize, 1.0f64)] {
        for j in 0..n {
            // The tip-side end alternates: inner for the last beam, then
            // folding back outward each level up.
            let tip_inner = (n - 1 - j) % 2 == 0;
            let (x_tip, x_root) =
                if tip_inner { (x_inner, x_outer) } else { (x_outer, x_inner) };
            let root = Vector3::new(sign * x_root, y_level(j), 0.0);
            let tip = Vector3::new(sign * x_tip, y_level(j), 0.0);
            let idx = beams.len();
            beams.push(BeamSegment {
                frame: beam_frame(root, tip),
                length: l,
                section,
                chain: side,
                level: j,
            });
            chains[side].beams.push(idx);
            if j == 0 {
                clamp_pos[side] = root;
            } else {
                // Vertical connector from the previous beam's tip down to
                // this beam's root (same x by construction).
                let prev_tip = Vector3::new(sign * x_root, y_level(j - 1), 0.0);
                links.push(RigidLink { from: prev_tip, to: root });
            }
        }
        // Shuttle arm from the chain tip to the symmetry axis.
        links.push(RigidLink {
            from: Vector3::new(sign * x_inner, y_shuttle, 0.0),
            to: Vector3::new(0.0, y_shuttle, 0.0),
        });
    }

    // P's frame: local z along the motion direction (+Y), local y out of
    // plane (-Z), local x along the beams.
    let p_rot = Matrix3::from_columns(&[
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 0.0, -1.0),
        Vector3::new(0.0, 1.0, 0.0),
    ]);
    let points = [
        (PointId::P, SpatialFrame::new(p_rot, Vector3::new(0.0, y_shuttle, 0.0))?),
        (PointId::A, SpatialFrame::at(clamp_pos[0])),
        (PointId::B, SpatialFrame::at(clamp_pos[1])),
        (PointId::C, SpatialFrame::at(Vector3::new(-x_inner, y_shuttle, 0.0))),
        (PointId::D, SpatialFrame::at(Vector3::new(x_inner, y_shuttle, 0.0))),
    ];

    Ok(HalfMcpfSkeleton { params: *params, beams, links, chains, points })
}

/// Diagonal of the per-section compliance weights, ordered like the internal
/// force components `(N, V_y, V_z, T, M_y, M_z)`.
fn compliance_diagonal(section: &CrossSection, material: &Material) -> Vector6<f64> {
    let e = material.youngs_modulus;
    let g = material.shear_modulus;
    let alpha = material.shear_factor;
    Vector6::new(
        1.0 / (e * section.area),
        alpha / (g * section.area),
        alpha / (g * section.area),
        1.0 / (g * section.i_p),
        1.0 / (e * section.i_y),
        1.0 / (e * section.i_z),
    )
}

/// Closed-form ∫₀ˡ T(x)ᵀ D T(x) dx for one beam and a unit wrench basis at
/// `load`: the beam's 6×6 flexibility contribution referred to the load point.
fn beam_flexibility(beam: &BeamSegment, load: &SpatialFrame, material: &Material) -> Matrix6<f64> {
    let r = beam.frame.rotation();
    let rt = r.transpose();
    let r0 = rt * (load.origin() - beam.start());
    let d = compliance_diagonal(&beam.section, material);

    let mut t0 = Matrix6::zeros();
    let mut t1 = Matrix6::zeros();
    let s0 = skew(&r0) * rt;
    let e1 = Vector3::new(1.0, 0.0, 0.0);
    let s1 = -skew(&e1) * rt;
    for i in 0..3 {
        for k in 0..3 {
            t0[(i, k)] = rt[(i, k)];
            t0[(i + 3, k + 3)] = rt[(i, k)];
            t0[(i + 3, k)] = s0[(i, k)];
            t1[(i + 3, k)] = s1[(i, k)];
        }
    }
    let dm = Matrix6::from_diagonal(&d);
    let l = beam.length;
    let a00 = t0.transpose() * dm * t0;
    let a01 = t0.transpose() * dm * t1;
    let a11 = t1.transpose() * dm * t1;
    a00 * l + (a01 + a01.transpose()) * (l * l / 2.0) + a11 * (l * l * l / 3.0)
}

/// Quadratic strain-energy form `U(q) = ½ qᵀ Q q` over the stacked interface
/// reaction components of a load case, plus the shuttle equilibrium rows.
#[derive(Debug, Clone)]
pub struct StrainEnergyForm {
    pub case: LoadCaseKind,
    /// 6×6: unknowns are `[pattern(C); pattern(D)]`.
    pub q_matrix: Matrix6<f64>,
    /// 3×6 equilibrium projection: `G q = rhs_unit · F_P`.
    pub g_matrix: DMatrix<f64>,
    pub rhs_unit: Vector3<f64>,
    /// Full 6×6 per-chain flexibilities referred to the interfaces, kept for
    /// reaction recovery and diagnostics.
    pub chain_flex: [Matrix6<f64>; 2],
}

/// Assemble the strain-energy quadratic form for one load case.
///
/// Segment integrals are evaluated in closed form (the integrand is a
/// polynomial of degree ≤ 2 in the axial coordinate under constant section).
pub fn strain_energy_form(
    skeleton: &HalfMcpfSkeleton,
    case: LoadCaseKind,
    material: &Material,
) -> Result<StrainEnergyForm, McpfError> {
    let section = skeleton.beams[0].section;
    if !(section.area > 0.0 && section.i_p > 0.0 && section.i_y > 0.0 && section.i_z > 0.0) {
        return Err(McpfError::NonPositive { name: "section property", value: 0.0 });
    }

    let mut chain_flex = [Matrix6::zeros(), Matrix6::zeros()];
    for (side, chain) in skeleton.chains.iter().enumerate() {
        let iface = skeleton.point_frame(chain.interface);
        for &bi in &chain.beams {
            chain_flex[side] += beam_flexibility(&skeleton.beams[bi], iface, material);
        }
    }

    let idx = case.pattern_indices();
    let mut q = Matrix6::zeros();
    for side in 0..2 {
        for (i, &qi) in idx.iter().enumerate() {
            for (k, &qk) in idx.iter().enumerate() {
                q[(3 * side + i, 3 * side + k)] = chain_flex[side][(qi, qk)];
            }
        }
    }

    // Shuttle equilibrium at the global origin: J_P w_P = J_C w_C + J_D w_D.
    let origin = SpatialFrame::identity();
    let j_c = wrench_transform(skeleton.point_frame(PointId::C), &origin);
    let j_d = wrench_transform(skeleton.point_frame(PointId::D), &origin);
    let j_p = wrench_transform(skeleton.point_frame(PointId::P), &origin);
    let drive = j_p * case.drive_wrench_global();

    let mut g = DMatrix::zeros(3, 6);
    let mut rhs = Vector3::zeros();
    for (row, &ri) in idx.iter().enumerate() {
        for (col, &ci) in idx.iter().enumerate() {
            g[(row, col)] = j_c[(ri, ci)];
            g[(row, col + 3)] = j_d[(ri, ci)];
        }
        rhs[row] = drive[ri];
    }

    Ok(StrainEnergyForm { case, q_matrix: q, g_matrix: g, rhs_unit: rhs, chain_flex })
}

/// Solved reaction state for one load case and drive magnitude.
#[derive(Debug, Clone)]
pub struct ReactionSolution {
    pub case: LoadCaseKind,
    pub drive: f64,
    /// Full reaction wrenches at A, B, C, D (global component ordering).
    pub reactions: Vec<(PointId, Wrench)>,
    pub strain_energy: f64,
    /// Drive-point stiffness of the half-unit (N/m).
    pub stiffness_half: f64,
    /// Relative norm of the reduced energy gradient at the solution.
    pub stationarity_residual: f64,
    /// Condition number of the compatibility system.
    pub condition_number: f64,
}

const SINGULAR_CONDITION_LIMIT: f64 = 1e14;

/// Resolve the redundant interface reactions by energy stationarity and
/// extract the half-unit stiffness `k = F²/(2·U_min)`.
pub fn solve_reactions(
    skeleton: &HalfMcpfSkeleton,
    form: &StrainEnergyForm,
    drive_magnitude: f64,
) -> Result<ReactionSolution, McpfError> {
    // Condition of the reduced compatibility system (ZᵀQZ on the equilibrium
    // null space), reported on failure per the ill-posed skeleton contract.
    let z = null_space(&form.g_matrix);
    let reduced = z.transpose() * dmatrix_from6(&form.q_matrix) * &z;
    let cond = condition_number(&reduced);
    if !cond.is_finite() || cond > SINGULAR_CONDITION_LIMIT {
        return Err(McpfError::SingularCompatibility { condition: cond });
    }

    if drive_magnitude == 0.0 {
        // Reactions are linear in the drive; the zero-drive state is exactly
        // zero while stiffness stays the unit-drive value.
        let unit = solve_reactions(skeleton, form, 1.0)?;
        return Ok(ReactionSolution {
            drive: 0.0,
            strain_energy: 0.0,
            reactions: unit.reactions.iter().map(|(p, _)| (*p, Wrench::zero())).collect(),
            ..unit
        });
    }

    // Bordered KKT system: minimize ½qᵀQq subject to Gq = rhs·F.
    let mut kkt = DMatrix::zeros(9, 9);
    for i in 0..6 {
        for k in 0..6 {
            kkt[(i, k)] = form.q_matrix[(i, k)];
        }
    }
    for r in 0..3 {
        for c in 0..6 {
            kkt[(6 + r, c)] = form.g_matrix[(r, c)];
            kkt[(c, 6 + r)] = form.g_matrix[(r, c)];
        }
    }
    let mut rhs = DVector::zeros(9);
    for r in 0..3 {
        rhs[6 + r] = form.rhs_unit[r] * drive_magnitude;
    }

    let lu = kkt.lu();
    let sol = lu.solve(&rhs).ok_or(McpfError::SingularCompatibility { condition: cond })?;
    let q = sol.rows(0, 6).into_owned();

    let qv = Vector6::from_iterator(q.iter().copied());
    let energy = 0.5 * (qv.transpose() * form.q_matrix * qv)[(0, 0)];

    // Reduced gradient of U at the solution (Castigliano stationarity).
    let grad = dmatrix_from6(&form.q_matrix) * DVector::from_iterator(6, q.iter().copied());
    let reduced_grad = z.transpose() * &grad;
    let scale = grad.norm().max(1e-300);
    let stationarity = reduced_grad.norm() / scale;

    // Recover full reaction wrenches.
    let idx = form.case.pattern_indices();
    let mut w_c = Vector6::zeros();
    let mut w_d = Vector6::zeros();
    for (i, &pi) in idx.iter().enumerate() {
        w_c[pi] = q[i];
        w_d[pi] = q[3 + i];
    }
    let j_ca =
        wrench_transform(skeleton.point_frame(PointId::C), skeleton.point_frame(PointId::A));
    let j_db =
        wrench_transform(skeleton.point_frame(PointId::D), skeleton.point_frame(PointId::B));
    let w_a = -(j_ca * w_c);
    let w_b = -(j_db * w_d);

    Ok(ReactionSolution {
        case: form.case,
        drive: drive_magnitude,
        reactions: vec![
            (PointId::A, Wrench(w_a)),
            (PointId::B, Wrench(w_b)),
            (PointId::C, Wrench(w_c)),
            (PointId::D, Wrench(w_d)),
        ],
        strain_energy: energy,
        stiffness_half: drive_magnitude * drive_magnitude / (2.0 * energy),
        stationarity_residual: stationarity,
        condition_number: cond,
    })
}

fn dmatrix_from6(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |i, j| m[(i, j)])
}

fn null_space(g: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = g.clone().svd(true, true);
    let v_t = svd.v_t.expect("svd with v");
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > 1e-12 * svd.singular_values[0].max(1e-300))
        .count();
    let n = g.ncols();
    let mut z = DMatrix::zeros(n, n - rank);
    for (col, row) in (rank..n).enumerate() {
        for i in 0..n {
            z[(i, col)] = v_t[(row, i)];
        }
    }
    z
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Independent second route for the drive-point compliance: particular
/// equilibrium solution plus null-space reduction, displacement from the
/// envelope-theorem partial `∂U/∂F_P` at fixed redundants.
pub fn stiffness_via_envelope(
    form: &StrainEnergyForm,
    drive_magnitude: f64,
) -> Result<f64, McpfError> {
    let g = &form.g_matrix;
    let rhs = DVector::from_iterator(3, form.rhs_unit.iter().map(|v| v * drive_magnitude));
    let svd = g.clone().svd(true, true);
    let q_part = svd
        .solve(&rhs, 1e-14)
        .map_err(|_| McpfError::SingularCompatibility { condition: f64::INFINITY })?;
    let z = null_space(g);
    let qm = dmatrix_from6(&form.q_matrix);
    let zqz = z.transpose() * &qm * &z;
    let zq = z.transpose() * &qm * &q_part;
    let y = zqz
        .lu()
        .solve(&(-zq))
        .ok_or(McpfError::SingularCompatibility { condition: f64::INFINITY })?;
    let q_star = &q_part + &z * y;
    // δ_P = (dq_part/dF)ᵀ · ∇U(q*) with the redundants held stationary.
    let delta = (q_part.transpose() * &qm * &q_star)[(0, 0)] / drive_magnitude;
    Ok(drive_magnitude / delta)
}

/// Full-unit motional stiffness (two mirrored halves in parallel).
pub fn motional_stiffness(params: &McpfParams, material: &Material) -> Result<f64, McpfError> {
    let skeleton = build_half_skeleton(params)?;
    let form = strain_energy_form(&skeleton, LoadCaseKind::Motional, material)?;
    Ok(2.0 * solve_reactions(&skeleton, &form, 1.0)?.stiffness_half)
}

/// Full-unit lateral stiffness (two mirrored halves in parallel).
pub fn lateral_stiffness(params: &McpfParams, material: &Material) -> Result<f64, McpfError> {
    let skeleton = build_half_skeleton(params)?;
    let form = strain_energy_form(&skeleton, LoadCaseKind::Lateral, material)?;
    Ok(2.0 * solve_reactions(&skeleton, &form, 1.0)?.stiffness_half)
}

/// Lateral-to-motional stiffness ratio η.
pub fn stiffness_ratio(params: &McpfParams, material: &Material) -> Result<f64, McpfError> {
    let report = stiffness_report(params, material, None)?;
    Ok(report.eta)
}

/// Combined stiffness report for one MCPF unit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StiffnessReport {
    /// Family label, when evaluated for a stage family.
    pub family: Option<String>,
    /// Full-unit motional stiffness (N/m).
    pub k_motional: f64,
    /// Full-unit lateral stiffness (N/m).
    pub k_lateral: f64,
    /// η = k_lateral / k_motional.
    pub eta: f64,
    pub slenderness_warning: bool,
    /// Reaction wrenches at A–D under unit motional drive, (F;M) components.
    pub motional_reactions: Vec<(String, [f64; 6])>,
    /// Reaction wrenches at A–D under unit lateral drive.
    pub lateral_reactions: Vec<(String, [f64; 6])>,
}

pub fn stiffness_report(
    params: &McpfParams,
    material: &Material,
    family: Option<Family>,
) -> Result<StiffnessReport, McpfError> {
    let skeleton = build_half_skeleton(params)?;
    let motional = solve_reactions(
        &skeleton,
        &strain_energy_form(&skeleton, LoadCaseKind::Motional, material)?,
        1.0,
    )?;
    let lateral = solve_reactions(
        &skeleton,
        &strain_energy_form(&skeleton, LoadCaseKind::Lateral, material)?,
        1.0,
    )?;
    let k_m = 2.0 * motional.stiffness_half;
    let k_l = 2.0 * lateral.stiffness_half;
    let dump = |sol: &ReactionSolution| {
        sol.reactions
            .iter()
            .map(|(p, w)| (format!("{p:?}"), [w.0[0], w.0[1], w.0[2], w.0[3], w.0[4], w.0[5]]))
            .collect()
    };
    Ok(StiffnessReport {
        family: family.map(|f| f.label().to_string()),
        k_motional: k_m,
        k_lateral: k_l,
        eta: k_l / k_m,
        slenderness_warning: params.slenderness_warning(),
        motional_reactions: dump(&motional),
        lateral_reactions: dump(&lateral),
    })
}

// ---------------------------------------------------------------------------
// Internal force map (general sectioning utility)
// ---------------------------------------------------------------------------

/// Per-segment internal wrench functions `t_i(x_i)` for a given set of point
/// loads: the resultant of every load on the far-from-clamp side of the
/// section, transformed into the section frame.
pub struct InternalForceMap<'a> {
    skeleton: &'a HalfMcpfSkeleton,
    loads: Vec<(PointId, Wrench)>,
}

pub fn internal_force_map<'a>(
    skeleton: &'a HalfMcpfSkeleton,
    loads: &[(PointId, Wrench)],
) -> InternalForceMap<'a> {
    InternalForceMap { skeleton, loads: loads.to_vec() }
}

impl InternalForceMap<'_> {
    /// Points on the free (shuttle) side of any section of `beam`.
    fn outboard(&self, beam: &BeamSegment) -> [PointId; 4] {
        if beam.chain == 0 {
            [PointId::C, PointId::P, PointId::D, PointId::B]
        } else {
            [PointId::D, PointId::P, PointId::C, PointId::A]
        }
    }

    /// Internal wrench of segment `beam_index` at axial coordinate `x` from
    /// the root end, expressed in the section frame.
    pub fn force_at(&self, beam_index: usize, x: f64) -> Result<Wrench, McpfError> {
        let beam = self
            .skeleton
            .beams
            .get(beam_index)
            .ok_or(McpfError::BeamIndexOutOfRange { index: beam_index })?;
        if !(0.0..=beam.length).contains(&x) {
            return Err(McpfError::SectionOutOfRange { x, length: beam.length });
        }
        let section_frame = SpatialFrame::new(
            *beam.frame.rotation(),
            beam.start() + beam.frame.rotation() * Vector3::new(x, 0.0, 0.0),
        )?;
        let outboard = self.outboard(beam);
        let mut total = Vector6::zeros();
        for (point, w) in &self.loads {
            if outboard.contains(point) {
                total += wrench_transform(self.skeleton.point_frame(*point), &section_frame) * w.0;
            }
        }
        Ok(Wrench(total))
    }
}

/// Sum all loads as a wrench at the global origin (equilibrium check).
pub fn total_wrench_at_origin(
    skeleton: &HalfMcpfSkeleton,
    loads: &[(PointId, Wrench)],
) -> Vector6<f64> {
    let origin = SpatialFrame::identity();
    loads
        .iter()
        .map(|(p, w)| wrench_transform(skeleton.point_frame(*p), &origin) * w.0)
        .sum()
}

// ---------------------------------------------------------------------------
// Parameter sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepGrid {
    /// Thickness values (m).
    pub thickness: Vec<f64>,
    /// Length values (m).
    pub length: Vec<f64>,
    /// Width values (m).
    pub width: Vec<f64>,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub l: f64,
    pub b: f64,
    pub k_motional: f64,
    pub k_lateral: f64,
    pub eta: f64,
}

/// Evaluate the stiffness model over a (t, l, b) grid. The connector span
/// scales with l keeping the template's span/length ratio, so grid points are
/// geometrically similar. Rows are emitted in deterministic t-major order.
pub fn parameter_sweep(
    grid: &SweepGrid,
    template: &McpfParams,
    material: &Material,
) -> Result<Vec<SweepRow>, McpfError> {
    let span_ratio = template.rigid_link_span / template.beam_length;
    let mut rows = Vec::with_capacity(grid.thickness.len() * grid.length.len() * grid.width.len());
    for &t in &grid.thickness {
        for &l in &grid.length {
            for &b in &grid.width {
                let params =
                    McpfParams::with_layers(t, l, b, template.layer_count, span_ratio * l)?;
                let report = stiffness_report(&params, material, None)?;
                rows.push(SweepRow {
                    t,
                    l,
                    b,
                    k_motional: report.k_motional,
                    k_lateral: report.k_lateral,
                    eta: report.eta,
                });
            }
        }
    }
    Ok(rows)
}

/// Indices of the cabinet-projection surface subset: the union of the three
/// max-index faces of the grid. For a 3×3×3 grid this is the 19-point set
/// (inclusion–exclusion: 3·9 − 3·3 + 1).
pub fn cabinet_subset(grid: &SweepGrid) -> Vec<(usize, usize, usize)> {
    let (nt, nl, nb) = (grid.thickness.len(), grid.length.len(), grid.width.len());
    let mut out = Vec::new();
    for i in 0..nt {
        for j in 0..nl {
            for k in 0..nb {
                if i == nt - 1 || j == nl - 1 || k == nb - 1 {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

/// Qualitative monotonicity flags over a sweep.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SweepSummary {
    pub k_motional_increasing_in_t: bool,
    pub k_motional_decreasing_in_l: bool,
    pub eta_increasing_in_b: bool,
}

pub fn sweep_summary(rows: &[SweepRow], grid: &SweepGrid) -> SweepSummary {
    let (nt, nl, nb) = (grid.thickness.len(), grid.length.len(), grid.width.len());
    let at = |i: usize, j: usize, k: usize| &rows[(i * nl + j) * nb + k];
    let mut inc_t = true;
    let mut dec_l = true;
    let mut inc_b = true;
    for i in 0..nt {
        for j in 0..nl {
            for k in 0..nb {
                if i + 1 < nt && at(i + 1, j, k).k_motional <= at(i, j, k).k_motional {
                    inc_t = false;
                }
                if j + 1 < nl && at(i, j + 1, k).k_motional >= at(i, j, k).k_motional {
                    dec_l = false;
                }
                if k + 1 < nb && at(i, j, k + 1).eta <= at(i, j, k).eta {
                    inc_b = false;
                }
            }
        }
    }
    SweepSummary {
        k_motional_increasing_in_t: inc_t,
        k_motional_decreasing_in_l: dec_l,
        eta_increasing_in_b: inc_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MM: f64 = 1e-3;

    fn al() -> Material {
        Material::aluminum_7075()
    }

    fn default_params() -> McpfParams {
        McpfParams::new(0.4 * MM, 30.5 * MM, 12.0 * MM).unwrap()
    }

    #[test]
    fn default_build_has_six_segments_four_reaction_points() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        assert_eq!(sk.beams.len(), 6);
        assert_eq!(sk.reaction_points().len(), 4);
        // P on the symmetry axis.
        assert_eq!(sk.point_frame(PointId::P).origin().x, 0.0);
    }

    #[test]
    fn single_layer_is_a_simple_parallelogram_half() {
        let params = McpfParams::with_layers(0.4 * MM, 30.5 * MM, 12.0 * MM, 1, 3.0 * MM).unwrap();
        let sk = build_half_skeleton(&params).unwrap();
        assert_eq!(sk.beams.len(), 2);
    }

    #[test]
    fn mirrored_skeleton_reflects_origins_exactly() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        let mirrored = sk.mirrored_x();
        for (b, m) in sk.beams.iter().zip(mirrored.beams.iter()) {
            assert_eq!(b.start().x, -m.start().x);
            assert_eq!(b.start().y, m.start().y);
        }
        assert_eq!(
            sk.point_frame(PointId::A).origin().x,
            -mirrored.point_frame(PointId::A).origin().x
        );
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(McpfParams::new(0.0, 1.0, 1.0).is_err());
        assert!(McpfParams::with_layers(1.0 * MM, 30.0 * MM, 10.0 * MM, 0, 1.0 * MM).is_err());
        // l < 10 t
        assert!(McpfParams::new(2.0 * MM, 15.0 * MM, 10.0 * MM).is_err());
        // warning band
        let p = McpfParams::new(2.0 * MM, 30.0 * MM, 10.0 * MM).unwrap();
        assert!(p.slenderness_warning());
        let p = McpfParams::new(0.4 * MM, 30.0 * MM, 10.0 * MM).unwrap();
        assert!(!p.slenderness_warning());
    }

    #[test]
    fn zero_loads_give_zero_internal_forces() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        let map = internal_force_map(&sk, &[]);
        for i in 0..sk.beams.len() {
            let w = map.force_at(i, sk.beams[i].length / 2.0).unwrap();
            assert_eq!(w.0, Vector6::zeros());
        }
    }

    #[test]
    fn unit_drive_with_zero_reactions_matches_hand_statics() {
        // Single cantilever check: with no reactions, every section of a
        // chain carries the transformed drive wrench alone.
        let params = McpfParams::with_layers(0.4 * MM, 30.0 * MM, 12.0 * MM, 1, 3.0 * MM).unwrap();
        let sk = build_half_skeleton(&params).unwrap();
        let drive = Wrench::new(Vector3::new(0.0, 1.0, 0.0), Vector3::zeros()).unwrap();
        let map = internal_force_map(&sk, &[(PointId::P, drive)]);

        // Left beam: root at outer (-a-l, 0), tip inner; frame x̂ = +X.
        let beam = &sk.beams[0];
        assert_eq!(beam.chain, 0);
        let x = 10.0 * MM;
        let w = map.force_at(0, x).unwrap();
        // Section at global (-a-l+x, 0): force +Y transforms to local +y
        // shear; moment about z = lever arm from P.
        let section_x = beam.start().x + x;
        let lever = 0.0 - section_x; // r = P - section
        assert_relative_eq!(w.0[1], 1.0, max_relative = 1e-14);
        assert_relative_eq!(w.0[5], lever, max_relative = 1e-12);
        assert!(w.0[0].abs() < 1e-15);
    }

    #[test]
    fn solved_reactions_balance_drive() {
        let params = default_params();
        let sk = build_half_skeleton(&params).unwrap();
        let form = strain_energy_form(&sk, LoadCaseKind::Motional, &al()).unwrap();
        let sol = solve_reactions(&sk, &form, 2.5).unwrap();
        // External balance: drive at P plus clamp reactions at A and B.
        let drive_local = Wrench(LoadCaseKind::Motional.drive_wrench_global() * 2.5);
        // Drive expressed in P's local frame: global +Y is local +z.
        let p_local = Wrench(
            wrench_transform(&SpatialFrame::identity(), sk.point_frame(PointId::P))
                * drive_local.0,
        );
        let mut loads = vec![(PointId::P, p_local)];
        for (p, w) in &sol.reactions {
            if matches!(p, PointId::A | PointId::B) {
                loads.push((*p, *w));
            }
        }
        let total = total_wrench_at_origin(&sk, &loads);
        assert!(total.norm() < 1e-9 * 2.5, "unbalanced: {total:?}");
    }

    #[test]
    fn reactions_scale_linearly_and_vanish_at_zero_drive() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        let form = strain_energy_form(&sk, LoadCaseKind::Motional, &al()).unwrap();
        let s1 = solve_reactions(&sk, &form, 1.0).unwrap();
        let s2 = solve_reactions(&sk, &form, 10.0).unwrap();
        for ((_, w1), (_, w2)) in s1.reactions.iter().zip(s2.reactions.iter()) {
            for c in 0..6 {
                assert_relative_eq!(w2.0[c], 10.0 * w1.0[c], max_relative = 1e-10, epsilon = 1e-12);
            }
        }
        let s0 = solve_reactions(&sk, &form, 0.0).unwrap();
        for (_, w) in &s0.reactions {
            assert_eq!(w.0, Vector6::zeros());
        }
        assert_eq!(s0.strain_energy, 0.0);
    }

    #[test]
    fn mirror_paired_reactions() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        let form = strain_energy_form(&sk, LoadCaseKind::Motional, &al()).unwrap();
        let sol = solve_reactions(&sk, &form, 1.0).unwrap();
        let get = |p: PointId| sol.reactions.iter().find(|(q, _)| *q == p).unwrap().1;
        let (wc, wd) = (get(PointId::C), get(PointId::D));
        // Mirror image: transverse (x) force flips, motional (y) force and
        // in-plane moment flip sign with the lever arm.
        assert_relative_eq!(wc.0[0], -wd.0[0], max_relative = 1e-9, epsilon = 1e-12);
        assert_relative_eq!(wc.0[1], wd.0[1], max_relative = 1e-9, epsilon = 1e-12);
        assert_relative_eq!(wc.0[5], -wd.0[5], max_relative = 1e-9, epsilon = 1e-12);
        let (wa, wb) = (get(PointId::A), get(PointId::B));
        assert_relative_eq!(wa.0[0], -wb.0[0], max_relative = 1e-9, epsilon = 1e-12);
        assert_relative_eq!(wa.0[1], wb.0[1], max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn stationarity_residual_is_tiny() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        for case in [LoadCaseKind::Motional, LoadCaseKind::Lateral] {
            let form = strain_energy_form(&sk, case, &al()).unwrap();
            let sol = solve_reactions(&sk, &form, 1.0).unwrap();
            assert!(sol.stationarity_residual < 1e-9, "{case:?}: {}", sol.stationarity_residual);
        }
    }

    /// Closed-form oracle for the single-layer unit (hand-derived before the
    /// build): each chain is one fixed-guided beam carrying half the drive,
    /// k_half = [l³/(24EI_z) + αl/(2GA)]⁻¹.
    #[test]
    fn single_layer_matches_fixed_guided_closed_form() {
        let t = 0.4 * MM;
        let l = 30.0 * MM;
        let b = 12.0 * MM;
        let params = McpfParams::with_layers(t, l, b, 1, 2.0 * MM).unwrap();
        let m = al();
        let s = section_properties(t, b).unwrap();
        let expected_half = 1.0
            / (l.powi(3) / (24.0 * m.youngs_modulus * s.i_z)
                + m.shear_factor * l / (2.0 * m.shear_modulus * s.area));
        let sk = build_half_skeleton(&params).unwrap();
        let form = strain_energy_form(&sk, LoadCaseKind::Motional, &m).unwrap();
        let sol = solve_reactions(&sk, &form, 1.0).unwrap();
        assert_relative_eq!(sol.stiffness_half, expected_half, max_relative = 1e-9);
    }

    /// N-layer generalization of the same oracle: serial fold-back chains
    /// give k_half = [N·l³/(24EI_z) + N·αl/(2GA)]⁻¹ for the motional case.
    #[test]
    fn multi_layer_matches_serial_chain_closed_form() {
        let t = 0.35 * MM;
        let l = 25.0 * MM;
        let b = 9.0 * MM;
        let m = al();
        let s = section_properties(t, b).unwrap();
        for n in [2u32, 3, 4, 8] {
            let params = McpfParams::with_layers(t, l, b, n, 2.5 * MM).unwrap();
            let expected_half = 1.0
                / (n as f64
                    * (l.powi(3) / (24.0 * m.youngs_modulus * s.i_z)
                        + m.shear_factor * l / (2.0 * m.shear_modulus * s.area)));
            let k = motional_stiffness(&params, &m).unwrap() / 2.0;
            assert_relative_eq!(k, expected_half, max_relative = 1e-9);
        }
    }

    #[test]
    fn strain_energy_halves_when_moduli_double() {
        let params = default_params();
        let m1 = al();
        let m2 = Material::new(
            2.0 * m1.youngs_modulus,
            2.0 * m1.shear_modulus,
            m1.shear_factor,
            m1.density,
        )
        .unwrap();
        let sk = build_half_skeleton(&params).unwrap();
        for case in [LoadCaseKind::Motional, LoadCaseKind::Lateral] {
            let u1 = solve_reactions(&sk, &strain_energy_form(&sk, case, &m1).unwrap(), 1.0)
                .unwrap()
                .strain_energy;
            let u2 = solve_reactions(&sk, &strain_energy_form(&sk, case, &m2).unwrap(), 1.0)
                .unwrap()
                .strain_energy;
            assert_relative_eq!(u2, u1 / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn stiffness_scales_with_moduli() {
        let params = default_params();
        let m1 = al();
        let scale = 1.7;
        let m2 = Material::new(
            scale * m1.youngs_modulus,
            scale * m1.shear_modulus,
            m1.shear_factor,
            m1.density,
        )
        .unwrap();
        assert_relative_eq!(
            motional_stiffness(&params, &m2).unwrap(),
            scale * motional_stiffness(&params, &m1).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            lateral_stiffness(&params, &m2).unwrap(),
            scale * lateral_stiffness(&params, &m1).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn drive_magnitude_invariance() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        for case in [LoadCaseKind::Motional, LoadCaseKind::Lateral] {
            let form = strain_energy_form(&sk, case, &al()).unwrap();
            let k1 = solve_reactions(&sk, &form, 1.0).unwrap().stiffness_half;
            let k100 = solve_reactions(&sk, &form, 100.0).unwrap().stiffness_half;
            assert_relative_eq!(k1, k100, max_relative = 1e-12);
        }
    }

    #[test]
    fn energy_route_and_envelope_route_agree() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        for case in [LoadCaseKind::Motional, LoadCaseKind::Lateral] {
            let form = strain_energy_form(&sk, case, &al()).unwrap();
            let k_energy = solve_reactions(&sk, &form, 1.0).unwrap().stiffness_half;
            let k_envelope = stiffness_via_envelope(&form, 1.0).unwrap();
            assert_relative_eq!(k_energy, k_envelope, max_relative = 1e-9);
        }
    }

    #[test]
    fn mirrored_skeleton_same_stiffness() {
        let sk = build_half_skeleton(&default_params()).unwrap();
        let mirrored = sk.mirrored_x();
        for case in [LoadCaseKind::Motional, LoadCaseKind::Lateral] {
            let k = solve_reactions(&sk, &strain_energy_form(&sk, case, &al()).unwrap(), 1.0)
                .unwrap()
                .stiffness_half;
            let km = solve_reactions(
                &mirrored,
                &strain_energy_form(&mirrored, case, &al()).unwrap(),
                1.0,
            )
            .unwrap()
            .stiffness_half;
            assert_relative_eq!(k, km, max_relative = 1e-12);
        }
    }

    #[test]
    fn ratio_is_definitional() {
        let params = default_params();
        let m = al();
        let eta = stiffness_ratio(&params, &m).unwrap();
        let direct =
            lateral_stiffness(&params, &m).unwrap() / motional_stiffness(&params, &m).unwrap();
        assert_relative_eq!(eta, direct, max_relative = 1e-12);
    }

    #[test]
    fn energy_form_matches_numeric_quadrature() {
        // Integrate the chain energy numerically from the internal-force map
        // and compare with the assembled quadratic form.
        let sk = build_half_skeleton(&default_params()).unwrap();
        let m = al();
        let form = strain_energy_form(&sk, LoadCaseKind::Motional, &m).unwrap();
        let sol = solve_reactions(&sk, &form, 1.0).unwrap();
        let get = |p: PointId| sol.reactions.iter().find(|(q, _)| *q == p).unwrap().1;

        let mut u_num = 0.0;
        for (side, iface) in [(0usize, PointId::C), (1usize, PointId::D)] {
            let map = internal_force_map(&sk, &[(iface, get(iface))]);
            for &bi in &sk.chains[side].beams {
                let beam = &sk.beams[bi];
                let d = compliance_diagonal(&beam.section, &m);
                // 5-point Gauss-Legendre on [0, l]; exact for the quadratic
                // integrand with margin.
                let half = beam.length / 2.0;
                const GP: [(f64, f64); 5] = [
                    (0.0, 0.5688888888888889),
                    (0.5384693101056831, 0.47862867049936647),
                    (-0.5384693101056831, 0.47862867049936647),
                    (0.906179845938664, 0.23692688505618908),
                    (-0.906179845938664, 0.23692688505618908),
                ];
                for (xi, w) in GP {
                    let x = half + half * xi;
                    let t = map.force_at(bi, x).unwrap().0;
                    let mut dens = 0.0;
                    for c in 0..6 {
                        dens += 0.5 * d[c] * t[c] * t[c];
                    }
                    u_num += w * half * dens;
                }
            }
        }
        assert_relative_eq!(u_num, sol.strain_energy, max_relative = 1e-10);
    }

    #[test]
    fn sweep_counts_and_cabinet_subset() {
        let grid = SweepGrid {
            thickness: vec![0.3 * MM, 0.35 * MM, 0.4 * MM],
            length: vec![25.0 * MM, 32.0 * MM, 40.0 * MM],
            width: vec![6.0 * MM, 9.0 * MM, 12.0 * MM],
        };
        let template = default_params();
        let rows = parameter_sweep(&grid, &template, &al()).unwrap();
        assert_eq!(rows.len(), 27);
        assert_eq!(cabinet_subset(&grid).len(), 19);

        let single = SweepGrid {
            thickness: vec![0.4 * MM],
            length: vec![30.5 * MM],
            width: vec![12.0 * MM],
        };
        let rows1 = parameter_sweep(&single, &template, &al()).unwrap();
        assert_eq!(rows1.len(), 1);
        let direct = stiffness_report(&template, &al(), None).unwrap();
        assert_relative_eq!(rows1[0].k_motional, direct.k_motional, max_relative = 1e-12);

        let summary = sweep_summary(&rows, &grid);
        assert!(summary.k_motional_increasing_in_t);
        assert!(summary.k_motional_decreasing_in_l);
        assert!(summary.eta_increasing_in_b);
    }

    #[test]
    fn point_label_parse() {
        assert!(PointId::from_label("A").is_ok());
        assert!(matches!(PointId::from_label("Q"), Err(McpfError::UnknownPoint { .. })));
    }
}
