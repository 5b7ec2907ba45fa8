//! Laser-beam configurations and evaluation of the complex field vector
//! K(R) and its spherical components.
//!
//! Each beam contributes sqrt(I) eps_hat exp(i(k.R + phase)); beams within
//! one group share an optical frequency and interfere, while groups of
//! different frequency only add in the potential.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};

const TRANSVERSALITY_TOL: f64 = 1e-10;

/// A plane-wave beam: unit propagation direction, complex unit transverse
/// polarization, phase [rad], intensity [W/m^2].
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    direction: Vector3<f64>,
    polarization: Vector3<Complex64>,
    pub phase: f64,
    pub intensity: f64,
}

impl Beam {
    /// Build a beam, normalizing the direction and polarization and checking
    /// transversality (|eps* . k_hat| < 1e-10).
    pub fn new(
        direction: Vector3<f64>,
        polarization: Vector3<Complex64>,
        phase: f64,
        intensity: f64,
    ) -> Result<Beam> {
        let dir_norm = direction.norm();
        if !dir_norm.is_finite() || dir_norm == 0.0 {
            return Err(Error::Validation(
                "beam direction must be a nonzero finite vector".into(),
            ));
        }
        let direction = direction / dir_norm;
        let pol_norm = polarization.norm();
        if !pol_norm.is_finite() || pol_norm == 0.0 {
            return Err(Error::Validation(
                "beam polarization must be a nonzero finite vector".into(),
            ));
        }
        let polarization = polarization / Complex64::new(pol_norm, 0.0);
        let dir_c = direction.map(|x| Complex64::new(x, 0.0));
        let overlap = polarization.dotc(&dir_c).norm();
        if overlap >= TRANSVERSALITY_TOL {
            return Err(Error::Validation(format!(
                "polarization is not transverse to the propagation direction \
                 (|eps* . k_hat| = {overlap:.3e})"
            )));
        }
        if !(intensity >= 0.0) {
            return Err(Error::Validation(format!(
                "beam intensity must be >= 0, got {intensity}"
            )));
        }
        Ok(Beam {
            direction,
            polarization,
            phase,
            intensity,
        })
    }

    /// Beam with a real linear polarization vector.
    pub fn linear(
        direction: Vector3<f64>,
        polarization: Vector3<f64>,
        phase: f64,
        intensity: f64,
    ) -> Result<Beam> {
        Beam::new(
            direction,
            polarization.map(|x| Complex64::new(x, 0.0)),
            phase,
            intensity,
        )
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }

    pub fn polarization(&self) -> Vector3<Complex64> {
        self.polarization
    }
}

/// Beams sharing one optical angular frequency [rad/s].
#[derive(Debug, Clone, PartialEq)]
pub struct BeamGroup {
    pub omega: f64,
    pub beams: Vec<Beam>,
}

impl BeamGroup {
    pub fn new(omega: f64, beams: Vec<Beam>) -> Result<BeamGroup> {
        if !(omega > 0.0) {
            return Err(Error::Validation(format!(
                "group frequency must be > 0, got {omega}"
            )));
        }
        if beams.is_empty() {
            return Err(Error::Validation("a beam group needs at least one beam".into()));
        }
        Ok(BeamGroup { omega, beams })
    }

    /// Wave number |k| = omega/c shared by all beams of the group.
    pub fn wave_number(&self) -> f64 {
        self.omega / C
    }
}

/// Spherical (p = +1, 0, -1) components of a complex field vector at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalField {
    pub plus: Complex64,
    pub zero: Complex64,
    pub minus: Complex64,
}

impl SphericalField {
    /// |K_p|^2 for p in {-1, 0, +1}.
    pub fn intensity(&self, p: i8) -> f64 {
        match p {
            1 => self.plus.norm_sqr(),
            0 => self.zero.norm_sqr(),
            -1 => self.minus.norm_sqr(),
            _ => panic!("spherical index must be -1, 0, or +1"),
        }
    }

    pub fn total_intensity(&self) -> f64 {
        self.plus.norm_sqr() + self.zero.norm_sqr() + self.minus.norm_sqr()
    }
}

/// Evaluate K(R) = sum_i sqrt(I_i) eps_i exp(i(k_i.R + phase_i)) for one
/// frequency group. Units: sqrt(W/m^2).
pub fn eval_field(group: &BeamGroup, r: &Vector3<f64>) -> Vector3<Complex64> {
    let k = group.wave_number();
    let mut field = Vector3::from_element(Complex64::new(0.0, 0.0));
    for beam in &group.beams {
        let phase = k * beam.direction.dot(r) + beam.phase;
        let amp = Complex64::from_polar(beam.intensity.sqrt(), phase);
        field += beam.polarization.map(|e| e * amp);
    }
    field
}

/// Spherical tensor components with the quantization axis along lab z:
/// K_{+1} = -(K_x + i K_y)/sqrt(2), K_0 = K_z, K_{-1} = (K_x - i K_y)/sqrt(2).
pub fn spherical_components(k: &Vector3<Complex64>) -> SphericalField {
    let i = Complex64::new(0.0, 1.0);
    let sqrt2 = std::f64::consts::SQRT_2;
    SphericalField {
        plus: -(k.x + i * k.y) / sqrt2,
        zero: k.z,
        minus: (k.x - i * k.y) / sqrt2,
    }
}

// ---------------------------------------------------------------------------
// Beam-configuration files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BeamConfigFile {
    groups: Vec<GroupSpec>,
}

#[derive(Serialize, Deserialize)]
struct GroupSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    wavelength_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_rad_s: Option<f64>,
    beams: Vec<BeamSpec>,
}

#[derive(Serialize, Deserialize)]
struct BeamSpec {
    direction: [f64; 3],
    pol_re: [f64; 3],
    pol_im: [f64; 3],
    phase_rad: f64,
    #[serde(rename = "intensity_W_m2")]
    intensity_w_m2: f64,
}

/// Load a beam-configuration file, normalizing directions/polarizations and
/// validating the invariants.
pub fn load_beam_groups(path: impl AsRef<Path>) -> Result<Vec<BeamGroup>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        source_name: path.display().to_string(),
        detail: e.to_string(),
    })?;
    beam_groups_from_json(&text, &path.display().to_string())
}

pub fn beam_groups_from_json(text: &str, source_name: &str) -> Result<Vec<BeamGroup>> {
    let file: BeamConfigFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        detail: format!("line {}, column {}: {e}", e.line(), e.column()),
    })?;
    let mut groups = Vec::with_capacity(file.groups.len());
    for (gi, spec) in file.groups.iter().enumerate() {
        let omega = match (spec.omega_rad_s, spec.wavelength_nm) {
            (Some(omega), None) => omega,
            (None, Some(lambda)) => 2.0 * std::f64::consts::PI * C / (lambda * 1e-9),
            _ => {
                return Err(Error::Config(format!(
                    "{source_name}: group {gi} must declare exactly one of \
                     wavelength_nm or omega_rad_s"
                )))
            }
        };
        let mut beams = Vec::with_capacity(spec.beams.len());
        for b in &spec.beams {
            let pol = Vector3::new(
                Complex64::new(b.pol_re[0], b.pol_im[0]),
                Complex64::new(b.pol_re[1], b.pol_im[1]),
                Complex64::new(b.pol_re[2], b.pol_im[2]),
            );
            beams.push(Beam::new(
                Vector3::from(b.direction),
                pol,
                b.phase_rad,
                b.intensity_w_m2,
            )?);
        }
        groups.push(BeamGroup::new(omega, beams)?);
    }
    Ok(groups)
}

/// Serialize groups into the beam-configuration JSON schema.
pub fn beam_groups_to_json(groups: &[BeamGroup]) -> String {
    let file = BeamConfigFile {
        groups: groups
            .iter()
            .map(|g| GroupSpec {
                wavelength_nm: None,
                omega_rad_s: Some(g.omega),
                beams: g
                    .beams
                    .iter()
                    .map(|b| BeamSpec {
                        direction: b.direction.into(),
                        pol_re: b.polarization.map(|c| c.re).into(),
                        pol_im: b.polarization.map(|c| c.im).into(),
                        phase_rad: b.phase,
                        intensity_w_m2: b.intensity,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("beam config serialization cannot fail")
}
