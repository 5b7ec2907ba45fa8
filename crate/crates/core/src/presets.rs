//! Parameterized beam configurations for the four superlattice families:
//! hexagonal double wells, isolated squares, isolated triangles, and
//! isolated hexagons. Each preset emits the beam groups, the superlattice
//! unit cell, labeled anchor positions for its sites, and a suggested
//! adjacency radius for the bond analysis.

use nalgebra::Vector3;
use serde::Serialize;

use crate::angular::HalfInt;
use crate::atoms::{classify_detuning, AtomSpecies, Detuning, HyperfineState};
use crate::error::{Error, Result};
use crate::fields::{Beam, BeamGroup};
use crate::lattice::UnitCell;
use crate::shift::{spherical_coefficients, ShiftMode};

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Everything needed to evaluate and analyze a preset landscape.
#[derive(Debug, Clone)]
pub struct PresetOutput {
    pub groups: Vec<BeamGroup>,
    pub cell: UnitCell,
    /// Expected site positions, labeled A, B, C, ... for the family.
    pub anchors: Vec<(String, Vector3<f64>)>,
    /// Pair-search radius for [`crate::lattice::bond_barriers`].
    pub adjacency_radius: f64,
    pub state: HyperfineState,
}

/// Polarization scheme of one beam set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PolScheme {
    InPlane,
    OutOfPlane,
}

fn rot2(v: Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    Vector3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

fn rot90(v: Vector3<f64>) -> Vector3<f64> {
    Vector3::new(-v.y, v.x, v.z)
}

/// Beam directions of a symmetric three-beam set: the first along +y, the
/// others rotated by -120 and +120 degrees.
fn three_beam_directions() -> [Vector3<f64>; 3] {
    let d1 = Vector3::new(0.0, 1.0, 0.0);
    [d1, rot2(d1, -TAU / 3.0), rot2(d1, TAU / 3.0)]
}

/// Real-space primitive vectors dual to the reciprocal pair (b1, b2):
/// b_i . B_j = 2 pi delta_ij.
fn dual_basis(b1: Vector3<f64>, b2: Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let cross = b1.x * b2.y - b1.y * b2.x;
    (
        Vector3::new(b2.y, -b2.x, 0.0) * (TAU / cross),
        Vector3::new(-b1.y, b1.x, 0.0) * (TAU / cross),
    )
}

/// Primitive vectors of the interference lattice of a symmetric three-beam
/// set with wave number `k` and directions `dirs`.
fn interference_basis(k: f64, dirs: &[Vector3<f64>; 3]) -> (Vector3<f64>, Vector3<f64>) {
    let b12 = (dirs[0] - dirs[1]) * k;
    let b23 = (dirs[1] - dirs[2]) * k;
    dual_basis(b12, b23)
}

fn require_m_f_zero(state: &HyperfineState, family: &str) -> Result<()> {
    if state.m_f != HalfInt::ZERO {
        return Err(Error::InvalidInput(format!(
            "the {family} scheme is defined for m_F = 0 states, got m_F = {}",
            state.m_f
        )));
    }
    Ok(())
}

fn require_detuning(
    species: &AtomSpecies,
    omega: f64,
    want: Detuning,
    what: &str,
) -> Result<()> {
    let got = classify_detuning(species, omega);
    if got != want {
        return Err(Error::Config(format!(
            "{what} must be {want:?}-detuned for this configuration, \
             but classifies as {got:?}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Hexagonal double well
// ---------------------------------------------------------------------------

/// Parameters of the hexagonal double-well family: six beams of one
/// frequency, three polarized in-plane (phases theta_i, intensity i1) and
/// three out-of-plane (phases phi_i = 0 reference, intensity i2). The
/// tuning knobs are the relative phases delta_phi_i = theta_i - phi_i.
#[derive(Debug, Clone, Serialize)]
pub struct HexDoubleWellParams {
    pub wavelength_nm: f64,
    /// In-plane set intensity per beam [W/m^2].
    pub i1: f64,
    /// Out-of-plane set intensity per beam [W/m^2].
    pub i2: f64,
    pub delta_phi: [f64; 3],
    pub f: HalfInt,
    pub m_f: HalfInt,
}

impl Default for HexDoubleWellParams {
    fn default() -> Self {
        // The in-plane set must dominate for the six-site honeycomb basis to
        // survive; i1/i2 = 12 keeps the paired sites well separated.
        HexDoubleWellParams {
            wavelength_nm: 1064.0,
            i1: 12.0e6,
            i2: 1.0e6,
            delta_phi: [PI, 0.0, 0.0],
            f: HalfInt::from_int(1),
            m_f: HalfInt::ZERO,
        }
    }
}

/// Six-beam hexagonal double-well configuration.
pub fn hexagonal_double_well(
    species: &AtomSpecies,
    params: &HexDoubleWellParams,
) -> Result<PresetOutput> {
    let state = species.ground_state(params.f, params.m_f)?;
    require_m_f_zero(&state, "hexagonal double-well")?;

    let omega = crate::atoms::omega_from_wavelength_nm(params.wavelength_nm);
    let k = omega / crate::constants::C;
    let dirs = three_beam_directions();
    let theta = params.delta_phi; // out-of-plane phases are the zero reference

    let mut beams = Vec::with_capacity(6);
    for (i, dir) in dirs.iter().enumerate() {
        let in_plane_pol = Vector3::z().cross(dir);
        beams.push(Beam::linear(*dir, in_plane_pol, theta[i], params.i1)?);
    }
    for dir in &dirs {
        beams.push(Beam::linear(*dir, Vector3::z(), 0.0, params.i2)?);
    }
    let group = BeamGroup::new(omega, beams)?;

    let (b1, b2) = interference_basis(k, &dirs);
    // sqrt(3) x sqrt(3) supercell: one honeycomb hexagon (six sites).
    let a1 = b1 + b2;
    let a2 = b2 * 2.0 - b1;

    let (anchors, ring_center) = hex_dw_anchors(b1, b2, &theta)?;
    let bond = (b1.norm() / 3.0_f64.sqrt()) * 1.0; // honeycomb bond length
    let origin = ring_center - (a1 + a2) * 0.5;
    let cell = UnitCell::new(a1, a2, origin)?;

    Ok(PresetOutput {
        groups: vec![group],
        cell,
        anchors,
        adjacency_radius: 4.0 / 3.0 * bond,
        state,
    })
}

/// Anchor ring of the in-plane honeycomb lattice for phases `theta`,
/// labeled so that F-A is a paired edge (its midpoint coincides with an
/// out-of-plane intensity maximum). Returns (labels, ring center).
fn hex_dw_anchors(
    b1: Vector3<f64>,
    b2: Vector3<f64>,
    theta: &[f64; 3],
) -> Result<(Vec<(String, Vector3<f64>)>, Vector3<f64>)> {
    let theta12 = theta[0] - theta[1];
    let theta23 = theta[1] - theta[2];
    // Honeycomb maxima of the in-plane pattern in reciprocal phase
    // coordinates (u, v) = (b1.R, b2.R):
    let pos = |u: f64, v: f64| (b1 * u + b2 * v) / TAU;
    let s_plus = pos(TAU / 3.0 - theta12, TAU / 3.0 - theta23);
    let s_minus = pos(-TAU / 3.0 - theta12, -TAU / 3.0 - theta23);

    // Pick the image of s_minus adjacent to s_plus so that the bond between
    // them straddles an out-of-plane maximum (a lattice point of (b1, b2)).
    // Near (but not exactly at) a pairing phase the midpoint only comes
    // close to a lattice point, so select by proximity.
    let lattice = UnitCell::new(b1, b2, Vector3::zeros())?;
    let ell = b1.norm() / 3.0_f64.sqrt();
    let off_lattice = |p: &Vector3<f64>| {
        let (u, v) = lattice.fractional(p);
        (b1 * (u - u.round()) + b2 * (v - v.round())).norm()
    };
    let mut best: Option<(Vector3<f64>, f64)> = None;
    for n1 in -2..=2 {
        for n2 in -2..=2 {
            let cand = s_minus + b1 * n1 as f64 + b2 * n2 as f64;
            let mid = (s_plus + cand) * 0.5;
            if off_lattice(&mid) > 0.35 * ell {
                continue;
            }
            let d = (cand - s_plus).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((cand, d));
            }
        }
    }
    let (s_minus_adj, _) = best.ok_or_else(|| {
        Error::Config("no paired honeycomb bond found; phase configuration degenerate".into())
    })?;

    let mid = (s_plus + s_minus_adj) * 0.5;
    let bond = s_plus - s_minus_adj;
    let center = mid + rot90(bond) * (3.0_f64.sqrt() / 2.0);

    // Ring vertices: the six honeycomb sites around `center`.
    let spoke = s_plus - center;
    let mut ring: Vec<Vector3<f64>> = (0..6).map(|n| center + rot2(spoke, n as f64 * TAU / 6.0)).collect();
    ring.sort_by(|p, q| {
        let ap = (p.y - center.y).atan2(p.x - center.x);
        let aq = (q.y - center.y).atan2(q.x - center.x);
        ap.total_cmp(&aq)
    });

    // Paired edges: midpoint near the out-of-plane maximum lattice.
    let paired: Vec<usize> = (0..6)
        .filter(|&i| {
            let m = (ring[i] + ring[(i + 1) % 6]) * 0.5;
            off_lattice(&m) < 0.35 * ell
        })
        .collect();
    if paired.is_empty() {
        return Err(Error::Config(
            "anchor ring has no paired edge; phase configuration degenerate".into(),
        ));
    }
    // The topmost paired edge is F-A.
    let top = *paired
        .iter()
        .max_by(|&&i, &&j| {
            let mi = (ring[i] + ring[(i + 1) % 6]) * 0.5 - center;
            let mj = (ring[j] + ring[(j + 1) % 6]) * 0.5 - center;
            mi.y.total_cmp(&mj.y).then(mi.x.total_cmp(&mj.x))
        })
        .unwrap();

    let labels = ["A", "B", "C", "D", "E", "F"];
    let anchors = (0..6)
        .map(|n| {
            (
                labels[n].to_string(),
                ring[(top + 1 + n) % 6],
            )
        })
        .collect();
    Ok((anchors, center))
}

// ---------------------------------------------------------------------------
// Isolated square
// ---------------------------------------------------------------------------

/// Parameters of the isolated-square family: two retro-reflected standing
/// waves per frequency (omega red, 2*omega blue), all in-plane polarized.
/// theta_i and phi_i shift the omega and 2*omega standing-wave patterns;
/// d1 and d2 are the mirror distances (common to both colors per axis).
#[derive(Debug, Clone, Serialize)]
pub struct SquareParams {
    pub wavelength_nm: f64,
    /// Base-frequency intensity per beam [W/m^2].
    pub i_base: f64,
    /// Doubled-frequency intensity per beam [W/m^2].
    pub i_doubled: f64,
    pub theta: [f64; 2],
    pub phi: [f64; 2],
    /// Mirror distances [m].
    pub d: [f64; 2],
    pub f: HalfInt,
    pub m_f: HalfInt,
}

impl Default for SquareParams {
    fn default() -> Self {
        SquareParams {
            wavelength_nm: 1064.0,
            i_base: 1.0e7,
            i_doubled: 4.0e7,
            theta: [0.0, 0.0],
            phi: [0.0, 0.0],
            d: [0.0, 0.0],
            f: HalfInt::from_int(1),
            m_f: HalfInt::ZERO,
        }
    }
}

/// Eight-beam isolated-square configuration (omega + 2 omega standing waves
/// along x and y).
pub fn isolated_square(species: &AtomSpecies, params: &SquareParams) -> Result<PresetOutput> {
    let state = species.ground_state(params.f, params.m_f)?;
    require_m_f_zero(&state, "isolated-square")?;

    let omega = crate::atoms::omega_from_wavelength_nm(params.wavelength_nm);
    let omega2 = 2.0 * omega;
    require_detuning(species, omega, Detuning::Red, "the base frequency")?;
    require_detuning(species, omega2, Detuning::Blue, "the doubled frequency")?;

    let k = omega / crate::constants::C;
    let lambda = params.wavelength_nm * 1e-9;
    let [theta1, theta2] = params.theta;
    let [phi1, phi2] = params.phi;
    let [d1, d2] = params.d;

    let x = Vector3::x();
    let y = Vector3::y();
    // Standing wave cos(k x + (a+ - a-)/2): incoming beam carries the
    // pattern phase, the retro beam the mirror path. The split below makes
    // theta_i = phi_i align the two colors while d_i translates both.
    let base = BeamGroup::new(
        omega,
        vec![
            Beam::linear(x, y, theta1, params.i_base)?,
            Beam::linear(-x, y, 2.0 * k * d1, params.i_base)?,
            Beam::linear(y, x, theta2, params.i_base)?,
            Beam::linear(-y, x, 2.0 * k * d2, params.i_base)?,
        ],
    )?;
    let doubled = BeamGroup::new(
        omega2,
        vec![
            Beam::linear(x, y, phi1, params.i_doubled)?,
            Beam::linear(-x, y, 4.0 * k * d1 - phi1, params.i_doubled)?,
            Beam::linear(y, x, phi2, params.i_doubled)?,
            Beam::linear(-y, x, 4.0 * k * d2 - phi2, params.i_doubled)?,
        ],
    )?;

    // Pattern centers (maxima of the respective standing waves).
    let xc = d1 - theta1 / (2.0 * k);
    let yc = d2 - theta2 / (2.0 * k);

    // Half-diagonal of the site plaquette: cos(2 k s) = A/(4 B) with A and B
    // the per-axis depth amplitudes of the two colors.
    let c_base = spherical_coefficients(species, &state, omega, ShiftMode::E2)?;
    let c_doubled = spherical_coefficients(species, &state, omega2, ShiftMode::E2)?;
    let amp_base = -2.0 * params.i_base * (c_base[0] + c_base[2]);
    let amp_doubled = 2.0 * params.i_doubled * (c_doubled[0] + c_doubled[2]);
    if !(amp_base > 0.0) || !(amp_doubled > 0.0) {
        return Err(Error::Config(
            "square preset requires an attractive base and repulsive doubled lattice".into(),
        ));
    }
    let ratio = amp_base / (4.0 * amp_doubled);
    if ratio >= 1.0 {
        return Err(Error::Config(format!(
            "base lattice too strong for an isolated-square structure \
             (depth ratio {ratio:.3} >= 1); lower i_base or raise i_doubled"
        )));
    }
    let s = ratio.acos() / (2.0 * k);

    // The base standing wave has intensity period lambda/2 per axis; the
    // doubled one lambda/4. The superlattice cell is lambda/2 square.
    let side = lambda / 2.0;
    let cell = UnitCell::new(
        Vector3::new(side, 0.0, 0.0),
        Vector3::new(0.0, side, 0.0),
        Vector3::new(xc - side / 2.0, yc - side / 2.0, 0.0),
    )?;
    let anchors = vec![
        ("A".to_string(), Vector3::new(xc - s, yc - s, 0.0)),
        ("B".to_string(), Vector3::new(xc + s, yc - s, 0.0)),
        ("C".to_string(), Vector3::new(xc + s, yc + s, 0.0)),
        ("D".to_string(), Vector3::new(xc - s, yc + s, 0.0)),
    ];
    // Cover both the plaquette edges and the inter-plaquette bonds; the
    // betweenness filter in the bond search prunes blocked diagonals.
    let adjacency_radius = 1.05 * (side - 2.0 * s);

    Ok(PresetOutput {
        groups: vec![base, doubled],
        cell,
        anchors,
        adjacency_radius,
        state,
    })
}

// ---------------------------------------------------------------------------
// Isolated triangular
// ---------------------------------------------------------------------------

/// Parameters of the isolated-triangular family: a three-beam set at the
/// base frequency and a second set at sqrt(3) times the base frequency,
/// rotated 30 degrees. delta_phi_i offsets the base-set phases theta_i from
/// the frozen primed-set phases (the overlap solution).
#[derive(Debug, Clone, Serialize)]
pub struct TriangularParams {
    pub wavelength_nm: f64,
    /// Base-set intensity per beam [W/m^2].
    pub i_base: f64,
    /// Primed-set intensity per beam [W/m^2].
    pub i_prime: f64,
    pub delta_phi: [f64; 3],
    /// Polarization of (base set, primed set).
    pub pol: [PolScheme; 2],
    pub f: HalfInt,
    pub m_f: HalfInt,
}

impl Default for TriangularParams {
    fn default() -> Self {
        TriangularParams {
            wavelength_nm: 1064.0,
            i_base: 1.0e7,
            i_prime: 2.5e7,
            delta_phi: [0.0, 0.0, 0.0],
            pol: [PolScheme::OutOfPlane, PolScheme::InPlane],
            f: HalfInt::from_int(1),
            m_f: HalfInt::ZERO,
        }
    }
}

fn validate_set_legality(
    species: &AtomSpecies,
    state: &HyperfineState,
    omega: f64,
    pol: PolScheme,
    what: &str,
) -> Result<()> {
    let detuning = classify_detuning(species, omega);
    if state.m_f == HalfInt::ZERO {
        let legal = matches!(
            (pol, detuning),
            (PolScheme::OutOfPlane, Detuning::Red) | (PolScheme::InPlane, Detuning::Blue)
        );
        if !legal {
            return Err(Error::Config(format!(
                "{what}: for m_F = 0 a set must be out-of-plane polarized and \
                 red detuned or in-plane polarized and blue detuned \
                 (got {pol:?}, {detuning:?})"
            )));
        }
    } else if detuning != Detuning::Red {
        return Err(Error::Config(format!(
            "{what}: for m_F = +-1 both sets must be red detuned (got {detuning:?})"
        )));
    }
    Ok(())
}

fn three_beam_set(
    omega: f64,
    dirs: &[Vector3<f64>; 3],
    phases: &[f64; 3],
    pol: PolScheme,
    intensity: f64,
) -> Result<BeamGroup> {
    let mut beams = Vec::with_capacity(3);
    for (i, dir) in dirs.iter().enumerate() {
        let beam = match pol {
            PolScheme::OutOfPlane => Beam::linear(*dir, Vector3::z(), phases[i], intensity)?,
            PolScheme::InPlane => {
                Beam::linear(*dir, Vector3::z().cross(dir), phases[i], intensity)?
            }
        };
        beams.push(beam);
    }
    BeamGroup::new(omega, beams)
}

/// Two three-beam sets at omega and sqrt(3) omega forming isolated
/// triangular plaquettes.
pub fn isolated_triangular(
    species: &AtomSpecies,
    params: &TriangularParams,
) -> Result<PresetOutput> {
    let state = species.ground_state(params.f, params.m_f)?;
    let omega = crate::atoms::omega_from_wavelength_nm(params.wavelength_nm);
    let omega_p = 3.0_f64.sqrt() * omega;
    validate_set_legality(species, &state, omega, params.pol[0], "base set")?;
    validate_set_legality(species, &state, omega_p, params.pol[1], "primed set")?;

    let k = omega / crate::constants::C;
    let dirs = three_beam_directions();
    let dirs_p = [
        rot2(dirs[0], TAU / 12.0),
        rot2(dirs[1], TAU / 12.0),
        rot2(dirs[2], TAU / 12.0),
    ];
    let k_p = k * 3.0_f64.sqrt();

    // Base-set wells sit on the (B1, B2) lattice (zero-phase pattern maxima
    // at the origin); primed wells on the fine (f1, f2) lattice shifted so
    // that a base well is centered in a primed-well triangle with one site
    // toward -y.
    let (a1, a2) = interference_basis(k, &dirs);
    let (f1, f2) = interference_basis(k_p, &dirs_p);
    let centroid = (f1 + f2) / 3.0;
    let shift = if centroid.y < 0.0 { centroid } else { -centroid };

    // Shifting the primed pattern by `shift` means adding phases
    // -k'_i . shift to its beams.
    let phases_p = [
        -(dirs_p[0] * k_p).dot(&shift),
        -(dirs_p[1] * k_p).dot(&shift),
        -(dirs_p[2] * k_p).dot(&shift),
    ];

    let base = three_beam_set(omega, &dirs, &params.delta_phi, params.pol[0], params.i_base)?;
    let primed = three_beam_set(omega_p, &dirs_p, &phases_p, params.pol[1], params.i_prime)?;

    // The three primed wells nearest the origin.
    let mut sites: Vec<Vector3<f64>> = Vec::new();
    for n1 in -2..=2 {
        for n2 in -2..=2 {
            let p = shift + f1 * n1 as f64 + f2 * n2 as f64;
            sites.push(p);
        }
    }
    sites.sort_by(|p, q| p.norm().total_cmp(&q.norm()));
    sites.truncate(3);
    // A is the site closest to the -y axis; B, C follow counterclockwise.
    let angle_from_south = |p: &Vector3<f64>| {
        let a = p.y.atan2(p.x).to_degrees();
        (a + 90.0).rem_euclid(360.0)
    };
    sites.sort_by(|p, q| angle_from_south(p).total_cmp(&angle_from_south(q)));
    let anchors = vec![
        ("A".to_string(), sites[0]),
        ("B".to_string(), sites[1]),
        ("C".to_string(), sites[2]),
    ];

    // Sites sit on the primed-well lattice (spacing |f1|); the red
    // attraction pulls plaquettes together, so pad the radius to keep the
    // stretched inter-plaquette bonds.
    let cell = UnitCell::new(a1, a2, -(a1 + a2) * 0.5)?;
    Ok(PresetOutput {
        groups: vec![base, primed],
        cell,
        anchors,
        adjacency_radius: 1.3 * f1.norm(),
        state,
    })
}

// ---------------------------------------------------------------------------
// Isolated hexagonal
// ---------------------------------------------------------------------------

/// Parameters of the isolated-hexagonal family: a red base set and a blue
/// primed set at sqrt(3) times the base frequency, perpendicular to the
/// base set; all beams out-of-plane polarized for m_F = 0.
#[derive(Debug, Clone, Serialize)]
pub struct HexagonalParams {
    pub wavelength_nm: f64,
    pub i_base: f64,
    pub i_prime: f64,
    /// Extra phase offsets applied to the primed set (default zero realizes
    /// the maximum-on-minimum overlap).
    pub delta_phi: [f64; 3],
    pub pol: [PolScheme; 2],
    pub f: HalfInt,
    pub m_f: HalfInt,
}

impl Default for HexagonalParams {
    fn default() -> Self {
        HexagonalParams {
            wavelength_nm: 1064.0,
            i_base: 1.0e7,
            i_prime: 2.0e7,
            delta_phi: [0.0, 0.0, 0.0],
            pol: [PolScheme::OutOfPlane, PolScheme::OutOfPlane],
            f: HalfInt::from_int(1),
            m_f: HalfInt::ZERO,
        }
    }
}

/// Two perpendicular three-beam sets forming isolated hexagonal rings.
pub fn isolated_hexagonal(
    species: &AtomSpecies,
    params: &HexagonalParams,
) -> Result<PresetOutput> {
    let state = species.ground_state(params.f, params.m_f)?;
    let omega = crate::atoms::omega_from_wavelength_nm(params.wavelength_nm);
    let omega_p = 3.0_f64.sqrt() * omega;

    if state.m_f == HalfInt::ZERO {
        if params.pol != [PolScheme::OutOfPlane, PolScheme::OutOfPlane] {
            return Err(Error::Config(
                "isolated-hexagonal m_F = 0 scheme requires all beams \
                 out-of-plane polarized"
                    .into(),
            ));
        }
    }
    require_detuning(species, omega, Detuning::Red, "the base set")?;
    require_detuning(species, omega_p, Detuning::Blue, "the primed set")?;

    let k = omega / crate::constants::C;
    let dirs = three_beam_directions();
    // Perpendicular primed set.
    let dirs_p = [
        rot2(dirs[0], TAU / 4.0),
        rot2(dirs[1], TAU / 4.0),
        rot2(dirs[2], TAU / 4.0),
    ];
    let k_p = k * 3.0_f64.sqrt();

    let base = three_beam_set(omega, &dirs, &[0.0; 3], params.pol[0], params.i_base)?;
    let primed = three_beam_set(
        omega_p,
        &dirs_p,
        &params.delta_phi,
        params.pol[1],
        params.i_prime,
    )?;

    let (a1, a2) = interference_basis(k, &dirs);
    let (f1, f2) = interference_basis(k_p, &dirs_p);

    // Ring sites: the six fine-lattice hole positions around the origin.
    let holes = [
        (f1 + f2) / 3.0,
        -(f1 + f2) / 3.0,
        (f1 * 2.0 - f2) / 3.0,
        -(f1 * 2.0 - f2) / 3.0,
        (f2 * 2.0 - f1) / 3.0,
        -(f2 * 2.0 - f1) / 3.0,
    ];
    let mut ring: Vec<Vector3<f64>> = holes.to_vec();
    ring.sort_by(|p, q| {
        p.y.atan2(p.x)
            .rem_euclid(TAU)
            .total_cmp(&q.y.atan2(q.x).rem_euclid(TAU))
    });
    let labels = ["A", "B", "C", "D", "E", "F"];
    let anchors: Vec<(String, Vector3<f64>)> = ring
        .into_iter()
        .enumerate()
        .map(|(n, p)| (labels[n].to_string(), p))
        .collect();

    // Sites are the holes of the primed-well lattice (honeycomb spacing
    // |f1|/sqrt(3)). Rings contract under the red modulation, stretching
    // the outward bonds; the betweenness filter prunes the in-ring
    // second-neighbor chords that fall inside this radius.
    let site_spacing = f1.norm() / 3.0_f64.sqrt();
    let cell = UnitCell::new(a1, a2, -(a1 + a2) * 0.5)?;
    Ok(PresetOutput {
        groups: vec![base, primed],
        cell,
        anchors,
        adjacency_radius: 1.5 * site_spacing,
        state,
    })
}

// ---------------------------------------------------------------------------
// Named preset registry (CLI surface)
// ---------------------------------------------------------------------------

/// A named preset with overridable parameters.
#[derive(Debug, Clone, Serialize)]
pub enum Preset {
    HexDoubleWell(HexDoubleWellParams),
    Square(SquareParams),
    Triangular(TriangularParams),
    Hexagonal(HexagonalParams),
}

impl Preset {
    pub fn by_name(name: &str) -> Result<Preset> {
        match name {
            "hex_double_well" => Ok(Preset::HexDoubleWell(Default::default())),
            "isolated_square" => Ok(Preset::Square(Default::default())),
            "isolated_triangular" => Ok(Preset::Triangular(Default::default())),
            "isolated_hexagonal" => Ok(Preset::Hexagonal(Default::default())),
            other => Err(Error::Config(format!(
                "unknown preset '{other}'; available: hex_double_well, \
                 isolated_square, isolated_triangular, isolated_hexagonal"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::HexDoubleWell(_) => "hex_double_well",
            Preset::Square(_) => "isolated_square",
            Preset::Triangular(_) => "isolated_triangular",
            Preset::Hexagonal(_) => "isolated_hexagonal",
        }
    }

    /// Set the hyperfine state the preset is built for.
    pub fn set_state(&mut self, f: HalfInt, m_f: HalfInt) {
        match self {
            Preset::HexDoubleWell(p) => {
                p.f = f;
                p.m_f = m_f;
            }
            Preset::Square(p) => {
                p.f = f;
                p.m_f = m_f;
            }
            Preset::Triangular(p) => {
                p.f = f;
                p.m_f = m_f;
            }
            Preset::Hexagonal(p) => {
                p.f = f;
                p.m_f = m_f;
            }
        }
    }

    /// Set a named scalar knob (phases in rad, intensities in W/m^2,
    /// distances in m, wavelengths in nm).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let unknown = |family: &str, key: &str, knobs: &str| {
            Err(Error::Config(format!(
                "unknown knob '{key}' for {family}; available: {knobs}"
            )))
        };
        match self {
            Preset::HexDoubleWell(p) => match key {
                "dphi1" => p.delta_phi[0] = value,
                "dphi2" => p.delta_phi[1] = value,
                "dphi3" => p.delta_phi[2] = value,
                "i1" => p.i1 = value,
                "i2" => p.i2 = value,
                "wavelength_nm" => p.wavelength_nm = value,
                _ => {
                    return unknown(
                        self.name(),
                        key,
                        "dphi1, dphi2, dphi3, i1, i2, wavelength_nm",
                    )
                }
            },
            Preset::Square(p) => match key {
                "theta1" => p.theta[0] = value,
                "theta2" => p.theta[1] = value,
                "phi1" => p.phi[0] = value,
                "phi2" => p.phi[1] = value,
                "d1" => p.d[0] = value,
                "d2" => p.d[1] = value,
                "i_base" => p.i_base = value,
                "i_doubled" => p.i_doubled = value,
                "wavelength_nm" => p.wavelength_nm = value,
                _ => {
                    return unknown(
                        self.name(),
                        key,
                        "theta1, theta2, phi1, phi2, d1, d2, i_base, i_doubled, wavelength_nm",
                    )
                }
            },
            Preset::Triangular(p) => match key {
                "dphi1" => p.delta_phi[0] = value,
                "dphi2" => p.delta_phi[1] = value,
                "dphi3" => p.delta_phi[2] = value,
                "i_base" => p.i_base = value,
                "i_prime" => p.i_prime = value,
                "wavelength_nm" => p.wavelength_nm = value,
                _ => {
                    return unknown(
                        self.name(),
                        key,
                        "dphi1, dphi2, dphi3, i_base, i_prime, wavelength_nm",
                    )
                }
            },
            Preset::Hexagonal(p) => match key {
                "dphi1" => p.delta_phi[0] = value,
                "dphi2" => p.delta_phi[1] = value,
                "dphi3" => p.delta_phi[2] = value,
                "i_base" => p.i_base = value,
                "i_prime" => p.i_prime = value,
                "wavelength_nm" => p.wavelength_nm = value,
                _ => {
                    return unknown(
                        self.name(),
                        key,
                        "dphi1, dphi2, dphi3, i_base, i_prime, wavelength_nm",
                    )
                }
            },
        }
        Ok(())
    }

    pub fn build(&self, species: &AtomSpecies) -> Result<PresetOutput> {
        match self {
            Preset::HexDoubleWell(p) => hexagonal_double_well(species, p),
            Preset::Square(p) => isolated_square(species, p),
            Preset::Triangular(p) => isolated_triangular(species, p),
            Preset::Hexagonal(p) => isolated_hexagonal(species, p),
        }
    }
}
