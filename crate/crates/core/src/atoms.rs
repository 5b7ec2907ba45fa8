//! Atomic-structure data model: fine-structure lines, hyperfine corrections,
//! transition frequencies, channel enumeration, and detuning classification.
//!
//! Species data lives in a versioned JSON file (see [`AtomSpecies::load`]);
//! one rubidium-87 file is bundled with the crate.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::angular::{triangle_ok, wigner3j, wigner6j, HalfInt};
use crate::constants::{C, H};
use crate::error::{Error, Result};

/// A hyperfine level |n I J F m_F> of the ground manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperfineState {
    pub n: u32,
    pub term: String,
    pub nuclear_spin: HalfInt,
    pub j: HalfInt,
    pub f: HalfInt,
    pub m_f: HalfInt,
}

/// Magnetic-dipole (A) and electric-quadrupole (B) hyperfine constants,
/// stored as energies [J].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineManifold {
    pub a_hfs: f64,
    pub b_hfs: f64,
}

/// One fine-structure transition line out of the ground level.
#[derive(Debug, Clone, PartialEq)]
pub struct FineLine {
    pub term: String,
    pub j_upper: HalfInt,
    /// Einstein A coefficient of the line [1/s].
    pub einstein_a: f64,
    /// Fine-structure transition angular frequency [rad/s].
    pub omega_j: f64,
    pub hyperfine: HyperfineManifold,
}

/// A fully validated atomic species.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpecies {
    pub name: String,
    /// Atomic mass [kg].
    pub mass: f64,
    pub nuclear_spin: HalfInt,
    pub ground_term: String,
    pub ground_j: HalfInt,
    pub ground_hyperfine: HyperfineManifold,
    pub lines: Vec<FineLine>,
}

/// One (line, F_upper, polarization) coupling of a ground hyperfine state,
/// carrying everything the light-shift kernel needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionChannel {
    pub line_index: usize,
    pub line_term: String,
    pub j_upper: HalfInt,
    pub f_upper: HalfInt,
    pub m_upper: HalfInt,
    /// Spherical polarization index p of the field component driving this
    /// channel (-1, 0, +1).
    pub polarization: i8,
    /// Hyperfine-resolved transition angular frequency [rad/s].
    pub omega_f: f64,
    /// Fine-structure transition angular frequency [rad/s].
    pub omega_j: f64,
    pub einstein_a: f64,
    /// (2F_j+1)(2F_i+1)(2J_j+1) {6j}^2 (3j)^2, dimensionless and >= 0.
    pub weight: f64,
}

/// Sign of the detuning of a laser relative to all lines of a species.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detuning {
    /// Below every transition line.
    Red,
    /// Above every transition line.
    Blue,
    /// Between lines.
    Intermediate,
}

// ---------------------------------------------------------------------------
// Species file schema
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesFile {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    provenance: Option<String>,
    mass_kg: f64,
    #[serde(rename = "I_times2")]
    i_times2: i32,
    ground: LevelSpec,
    lines: Vec<LineSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelSpec {
    term: String,
    #[serde(rename = "J_times2")]
    j_times2: i32,
    hyperfine: HyperfineSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineSpec {
    term: String,
    #[serde(rename = "J_times2")]
    j_times2: i32,
    #[serde(rename = "A_J_per_s")]
    a_j_per_s: f64,
    wavelength_vacuum_nm: f64,
    hyperfine: HyperfineSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperfineSpec {
    #[serde(rename = "A_hfs_MHz")]
    a_hfs_mhz: f64,
    #[serde(rename = "B_hfs_MHz")]
    b_hfs_mhz: f64,
}

impl HyperfineSpec {
    fn to_energies(&self) -> HyperfineManifold {
        HyperfineManifold {
            a_hfs: H * self.a_hfs_mhz * 1e6,
            b_hfs: H * self.b_hfs_mhz * 1e6,
        }
    }
}

const RB87_JSON: &str = include_str!("../data/rb87.json");

impl AtomSpecies {
    /// Load and validate a species file.
    pub fn load(path: impl AsRef<Path>) -> Result<AtomSpecies> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    /// Parse a species description from JSON text. `source_name` is used in
    /// diagnostics only.
    pub fn from_json_str(text: &str, source_name: &str) -> Result<AtomSpecies> {
        let file: SpeciesFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            detail: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        file.validate(source_name)
    }

    /// The bundled rubidium-87 species.
    pub fn rubidium87() -> AtomSpecies {
        Self::from_json_str(RB87_JSON, "bundled rb87.json")
            .expect("bundled rb87.json must validate")
    }

    /// Build a ground-manifold state |F, m_F>, enforcing the hyperfine
    /// triangle and projection invariants.
    pub fn ground_state(&self, f: HalfInt, m_f: HalfInt) -> Result<HyperfineState> {
        let i = self.nuclear_spin;
        let j = self.ground_j;
        if !triangle_ok(i, j, f) {
            return Err(Error::Validation(format!(
                "F = {f} is outside |I-J|..I+J for I = {i}, J = {j}"
            )));
        }
        if !f.admits_projection(m_f) {
            return Err(Error::Validation(format!(
                "m_F = {m_f} is not a valid projection of F = {f}"
            )));
        }
        Ok(HyperfineState {
            n: leading_integer(&self.ground_term),
            term: self.ground_term.clone(),
            nuclear_spin: i,
            j,
            f,
            m_f,
        })
    }
}

fn leading_integer(term: &str) -> u32 {
    let digits: String = term.chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse().unwrap_or(0)
}

impl SpeciesFile {
    fn validate(self, source_name: &str) -> Result<AtomSpecies> {
        let fail = |msg: String| Error::Validation(format!("{source_name}: {msg}"));

        if self.mass_kg <= 0.0 {
            return Err(fail(format!("mass_kg must be > 0, got {}", self.mass_kg)));
        }
        if self.i_times2 < 0 {
            return Err(fail(format!("I_times2 must be >= 0, got {}", self.i_times2)));
        }
        if self.lines.is_empty() {
            return Err(fail("species must declare at least one line".into()));
        }

        let nuclear_spin = HalfInt::from_twice(self.i_times2);

        let mut terms: Vec<&str> = self.lines.iter().map(|l| l.term.as_str()).collect();
        terms.push(&self.ground.term);
        terms.sort_unstable();
        if terms.windows(2).any(|w| w[0] == w[1]) {
            return Err(fail("term tags must be unique".into()));
        }

        let check_hyperfine = |term: &str, j2: i32, hf: &HyperfineSpec| -> Result<()> {
            // The quadrupole term is undefined for I <= 1/2 or J <= 1/2.
            if (j2 <= 1 || self.i_times2 <= 1) && hf.b_hfs_mhz != 0.0 {
                return Err(fail(format!(
                    "level {term}: B_hfs must be 0 for J <= 1/2 or I <= 1/2"
                )));
            }
            Ok(())
        };

        check_hyperfine(&self.ground.term, self.ground.j_times2, &self.ground.hyperfine)?;

        let mut lines = Vec::with_capacity(self.lines.len());
        for line in &self.lines {
            if line.a_j_per_s <= 0.0 {
                return Err(fail(format!(
                    "line {}: A_J_per_s must be > 0, got {}",
                    line.term, line.a_j_per_s
                )));
            }
            if line.wavelength_vacuum_nm <= 0.0 {
                return Err(fail(format!(
                    "line {}: wavelength_vacuum_nm must be > 0",
                    line.term
                )));
            }
            check_hyperfine(&line.term, line.j_times2, &line.hyperfine)?;
            let omega_j = 2.0 * std::f64::consts::PI * C / (line.wavelength_vacuum_nm * 1e-9);
            lines.push(FineLine {
                term: line.term.clone(),
                j_upper: HalfInt::from_twice(line.j_times2),
                einstein_a: line.a_j_per_s,
                omega_j,
                hyperfine: line.hyperfine.to_energies(),
            });
        }

        Ok(AtomSpecies {
            name: self.name,
            mass: self.mass_kg,
            nuclear_spin,
            ground_term: self.ground.term.clone(),
            ground_j: HalfInt::from_twice(self.ground.j_times2),
            ground_hyperfine: self.ground.hyperfine.to_energies(),
            lines,
        })
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Hyperfine energy correction of level (I, J, F) [J]:
///
///   dE = (A/2) K + B [3K(K+1)/2 - 2 I(I+1) J(J+1)] / [2I(2I-1) 2J(2J-1)]
///
/// with K = F(F+1) - I(I+1) - J(J+1). The quadrupole term is omitted for
/// I <= 1/2 or J <= 1/2 where it is undefined.
pub fn hyperfine_correction(
    manifold: &HyperfineManifold,
    i: HalfInt,
    j: HalfInt,
    f: HalfInt,
) -> Result<f64> {
    if !triangle_ok(i, j, f) {
        return Err(Error::InvalidInput(format!(
            "(I, J, F) = ({i}, {j}, {f}) violates the triangle rule"
        )));
    }
    let iv = i.to_f64();
    let jv = j.to_f64();
    let fv = f.to_f64();
    let k = fv * (fv + 1.0) - iv * (iv + 1.0) - jv * (jv + 1.0);
    let mut energy = 0.5 * manifold.a_hfs * k;
    if i.twice() > 1 && j.twice() > 1 {
        let num = 1.5 * k * (k + 1.0) - 2.0 * iv * (iv + 1.0) * jv * (jv + 1.0);
        let den = 2.0 * iv * (2.0 * iv - 1.0) * 2.0 * jv * (2.0 * jv - 1.0);
        energy += manifold.b_hfs * num / den;
    }
    Ok(energy)
}

/// Enumerate every transition channel (line, F_upper, p) with nonvanishing
/// angular weight for `state`.
///
/// The channel frequency is omega_F = omega_J + (dE_hfs(upper, F_j) -
/// dE_hfs(ground, F_i))/hbar and the weight carries the degeneracy factors
/// and squared 6j/3j symbols of the coupling.
pub fn enumerate_channels(
    species: &AtomSpecies,
    state: &HyperfineState,
) -> Result<Vec<TransitionChannel>> {
    if state.term != species.ground_term {
        return Err(Error::InvalidInput(format!(
            "state belongs to level {}, expected the ground level {}",
            state.term, species.ground_term
        )));
    }
    let i = species.nuclear_spin;
    let j_i = species.ground_j;
    let f_i = state.f;
    let m_i = state.m_f;
    let one = HalfInt::ONE;

    let ground_shift = hyperfine_correction(&species.ground_hyperfine, i, j_i, f_i)?;
    let hbar = crate::constants::HBAR;

    let mut channels = Vec::new();
    for (line_index, line) in species.lines.iter().enumerate() {
        let j_j = line.j_upper;
        let mut f_j = (i - j_j).abs();
        while f_j.twice() <= (i + j_j).twice() {
            if triangle_ok(f_j, one, f_i) {
                let upper_shift = hyperfine_correction(&line.hyperfine, i, j_j, f_j)?;
                let omega_f = line.omega_j + (upper_shift - ground_shift) / hbar;
                let six_j = wigner6j(j_i, j_j, one, f_j, f_i, i)?;
                for p in [-1i8, 0, 1] {
                    // 3j column sum: M_Fj + p - m_Fi = 0.
                    let m_j = m_i - HalfInt::from_int(p as i32);
                    if !f_j.admits_projection(m_j) {
                        continue;
                    }
                    let three_j =
                        wigner3j(f_j, one, f_i, m_j, HalfInt::from_int(p as i32), -m_i)?;
                    let weight = f_j.multiplicity()
                        * f_i.multiplicity()
                        * j_j.multiplicity()
                        * six_j.powi(2)
                        * three_j.powi(2);
                    if weight > 0.0 {
                        channels.push(TransitionChannel {
                            line_index,
                            line_term: line.term.clone(),
                            j_upper: j_j,
                            f_upper: f_j,
                            m_upper: m_j,
                            polarization: p,
                            omega_f,
                            omega_j: line.omega_j,
                            einstein_a: line.einstein_a,
                            weight,
                        });
                    }
                }
            }
            f_j = f_j + one;
        }
    }
    Ok(channels)
}

/// Classify a laser angular frequency against all lines of the species:
/// `Red` below every line, `Blue` above every line, `Intermediate` otherwise.
pub fn classify_detuning(species: &AtomSpecies, omega: f64) -> Detuning {
    let min = species
        .lines
        .iter()
        .map(|l| l.omega_j)
        .fold(f64::INFINITY, f64::min);
    let max = species
        .lines
        .iter()
        .map(|l| l.omega_j)
        .fold(f64::NEG_INFINITY, f64::max);
    if omega < min {
        Detuning::Red
    } else if omega > max {
        Detuning::Blue
    } else {
        Detuning::Intermediate
    }
}

/// Angular frequency of light with the given vacuum wavelength [nm].
pub fn omega_from_wavelength_nm(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / (wavelength_nm * 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rb() -> AtomSpecies {
        AtomSpecies::rubidium87()
    }

    #[test]
    fn bundled_rb87_loads_with_expected_structure() {
        let s = rb();
        assert_eq!(s.name, "Rb87");
        assert_eq!(s.nuclear_spin, HalfInt::from_twice(3));
        assert_eq!(s.lines.len(), 2);
        assert_eq!(s.ground_j, HalfInt::from_twice(1));
        // D2 frequency above D1.
        let d1 = &s.lines[0];
        let d2 = &s.lines[1];
        assert!(d2.omega_j > d1.omega_j);
        assert_eq!(d1.j_upper, HalfInt::from_twice(1));
        assert_eq!(d2.j_upper, HalfInt::from_twice(3));
    }

    #[test]
    fn missing_field_is_a_parse_error() {
        let bad = r#"{"name":"X","mass_kg":1e-25,"I_times2":3,
            "ground":{"term":"g","J_times2":1,"hyperfine":{"A_hfs_MHz":1.0,"B_hfs_MHz":0.0}},
            "lines":[{"term":"e","J_times2":1,
                "wavelength_vacuum_nm":780.0,
                "hyperfine":{"A_hfs_MHz":1.0,"B_hfs_MHz":0.0}}]}"#;
        match AtomSpecies::from_json_str(bad, "test") {
            Err(Error::Parse { .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn quadrupole_on_j_half_level_is_a_validation_error() {
        let bad = r#"{"name":"X","mass_kg":1e-25,"I_times2":3,
            "ground":{"term":"g","J_times2":1,"hyperfine":{"A_hfs_MHz":1.0,"B_hfs_MHz":0.5}},
            "lines":[{"term":"e","J_times2":1,"A_J_per_s":1e7,
                "wavelength_vacuum_nm":780.0,
                "hyperfine":{"A_hfs_MHz":1.0,"B_hfs_MHz":0.0}}]}"#;
        match AtomSpecies::from_json_str(bad, "test") {
            Err(Error::Validation(_)) => {}
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn ground_state_invariants() {
        let s = rb();
        assert!(s.ground_state(HalfInt::from_int(1), HalfInt::ZERO).is_ok());
        assert!(s.ground_state(HalfInt::from_int(2), HalfInt::from_int(-2)).is_ok());
        // F = 3 outside |I-J|..I+J = 1..2
        assert!(s.ground_state(HalfInt::from_int(3), HalfInt::ZERO).is_err());
        // |m_F| > F
        assert!(s.ground_state(HalfInt::from_int(1), HalfInt::from_int(2)).is_err());
    }

    #[test]
    fn ground_splitting_is_twice_a_hfs() {
        // K(F=2) - K(F=1) = 4 and the B term is absent for J = 1/2.
        let s = rb();
        let i = s.nuclear_spin;
        let j = s.ground_j;
        let e1 = hyperfine_correction(&s.ground_hyperfine, i, j, HalfInt::from_int(1)).unwrap();
        let e2 = hyperfine_correction(&s.ground_hyperfine, i, j, HalfInt::from_int(2)).unwrap();
        let diff = e2 - e1;
        assert!((diff - 2.0 * s.ground_hyperfine.a_hfs).abs() < 1e-12 * diff.abs());
        // 6.834... GHz in frequency units.
        assert!((diff / H / 1e9 - 6.834682610904290).abs() < 1e-9);
    }

    #[test]
    fn extreme_f_difference_without_quadrupole() {
        // With B = 0: dE(F=I+J) - dE(F=|I-J|) = A (K_max - K_min)/2.
        let m = HyperfineManifold {
            a_hfs: 2.0e-25,
            b_hfs: 0.0,
        };
        let i = HalfInt::from_twice(5);
        let j = HalfInt::from_twice(3);
        let f_max = i + j;
        let f_min = (i - j).abs();
        let k = |f: HalfInt| {
            f.to_f64() * (f.to_f64() + 1.0)
                - i.to_f64() * (i.to_f64() + 1.0)
                - j.to_f64() * (j.to_f64() + 1.0)
        };
        let got = hyperfine_correction(&m, i, j, f_max).unwrap()
            - hyperfine_correction(&m, i, j, f_min).unwrap();
        let want = m.a_hfs * (k(f_max) - k(f_min)) / 2.0;
        assert!((got - want).abs() <= 1e-15 * want.abs());
    }

    #[test]
    fn p32_manifold_spacings_match_hand_evaluation() {
        // Hand evaluation of the K/B formula with the bundled constants:
        //   E(1)-E(0) = A - B, E(2)-E(1) = 2A - B, E(3)-E(2) = 3A + B.
        let s = rb();
        let d2 = &s.lines[1];
        let i = s.nuclear_spin;
        let j = d2.j_upper;
        let e: Vec<f64> = (0..=3)
            .map(|f| hyperfine_correction(&d2.hyperfine, i, j, HalfInt::from_int(f)).unwrap())
            .collect();
        let a = d2.hyperfine.a_hfs;
        let b = d2.hyperfine.b_hfs;
        let expected = [a - b, 2.0 * a - b, 3.0 * a + b];
        for (n, want) in expected.iter().enumerate() {
            let got = e[n + 1] - e[n];
            assert!(
                (got - want).abs() < 1e-12 * want.abs(),
                "spacing {n}: {got} vs {want}"
            );
        }
        // In MHz, from the bundled constants: 72.222, 156.9405, 266.652.
        assert!((((e[1] - e[0]) / H) / 1e6 - 72.2220).abs() < 1e-3);
        assert!((((e[2] - e[1]) / H) / 1e6 - 156.9405).abs() < 1e-3);
        assert!((((e[3] - e[2]) / H) / 1e6 - 266.6520).abs() < 1e-3);
    }

    #[test]
    fn hyperfine_correction_rejects_triangle_violation() {
        let s = rb();
        assert!(hyperfine_correction(
            &s.ground_hyperfine,
            s.nuclear_spin,
            s.ground_j,
            HalfInt::from_int(5)
        )
        .is_err());
    }

    #[test]
    fn channels_for_f1_m0_cover_expected_upper_levels() {
        let s = rb();
        let state = s.ground_state(HalfInt::from_int(1), HalfInt::ZERO).unwrap();
        let channels = enumerate_channels(&s, &state).unwrap();
        // D1 (J'=1/2): F_j in {1, 2}; D2 (J'=3/2): F_j in {0, 1, 2} (F_j = 3
        // is cut by the |dF| <= 1 triangle).
        let mut d1: Vec<i32> = channels
            .iter()
            .filter(|c| c.line_index == 0)
            .map(|c| c.f_upper.twice())
            .collect();
        d1.sort_unstable();
        d1.dedup();
        assert_eq!(d1, vec![2, 4]);
        let mut d2: Vec<i32> = channels
            .iter()
            .filter(|c| c.line_index == 1)
            .map(|c| c.f_upper.twice())
            .collect();
        d2.sort_unstable();
        d2.dedup();
        assert_eq!(d2, vec![0, 2, 4]);
        assert!(channels.iter().all(|c| c.weight > 0.0));
        // Projection rule: M_Fj = m_Fi - p, |M_Fj| <= F_j always.
        assert!(channels
            .iter()
            .all(|c| c.m_upper.twice().abs() <= c.f_upper.twice()));
    }

    #[test]
    fn sigma_weight_mirror_symmetry() {
        let s = rb();
        let plus = s.ground_state(HalfInt::from_int(1), HalfInt::from_int(1)).unwrap();
        let minus = s
            .ground_state(HalfInt::from_int(1), HalfInt::from_int(-1))
            .unwrap();
        let ch_plus = enumerate_channels(&s, &plus).unwrap();
        let ch_minus = enumerate_channels(&s, &minus).unwrap();
        for cp in &ch_plus {
            let mirrored = ch_minus
                .iter()
                .find(|cm| {
                    cm.line_index == cp.line_index
                        && cm.f_upper == cp.f_upper
                        && cm.polarization == -cp.polarization
                })
                .expect("mirror channel must exist");
            assert!(
                (cp.weight - mirrored.weight).abs() <= 1e-14 * cp.weight,
                "sigma mirror symmetry broken for {cp:?}"
            );
        }
    }

    #[test]
    fn detuning_classification_for_common_wavelengths() {
        let s = rb();
        assert_eq!(
            classify_detuning(&s, omega_from_wavelength_nm(1064.0)),
            Detuning::Red
        );
        assert_eq!(
            classify_detuning(&s, omega_from_wavelength_nm(532.0)),
            Detuning::Blue
        );
        assert_eq!(
            classify_detuning(&s, omega_from_wavelength_nm(787.0)),
            Detuning::Intermediate
        );
    }
}
