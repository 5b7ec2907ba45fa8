//! The light-shift kernel: hyperfine-resolved ac Stark shift of a ground
//! state under a set of beam groups, with the full hyperfine-denominator
//! form and the simplified fine-structure-denominator form.
//!
//! For one frequency group the potential is
//!
//!   U(R) = sum_ch -3 pi c^2 A_J (2F_j+1)(2F_i+1)(2J_j+1) w_F
//!            / (w_J^3 (w_F^2 - w^2)) {6j}^2 (3j)^2 |K_p(R)|^2
//!
//! with w_F -> w_J in `ShiftMode::E2`; groups of different frequency add.
//! Per-beam sqrt(intensity) amplitudes are folded into K, so U comes out in
//! Joules.

use nalgebra::Vector3;

use crate::atoms::{enumerate_channels, AtomSpecies, HyperfineState, TransitionChannel};
use crate::constants::{C, HBAR};
use crate::error::{Error, Result};
use crate::fields::{eval_field, spherical_components, BeamGroup};

/// Which transition frequency enters the denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    /// Hyperfine-resolved denominators (w_F): resolves F-dependent shifts.
    E2PlusEpsilon,
    /// Fine-structure denominators (w_J): standard second-order result.
    E2,
}

/// Default near-resonance guard: reject configurations with any channel
/// closer than 10 GHz to the laser.
pub const DEFAULT_GUARD_HZ: f64 = 10.0e9;

/// Contribution of a single channel to the potential at one point [J].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelContribution {
    pub line_term: String,
    pub f_upper: crate::angular::HalfInt,
    pub polarization: i8,
    pub value: f64,
}

/// Potential at a point, optionally with the per-channel breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    /// Total light shift [J].
    pub value: f64,
    pub breakdown: Option<Vec<ChannelContribution>>,
}

struct PreparedChannel {
    channel: TransitionChannel,
    /// Multiplies |K_p(R)|^2 to give this channel's energy [J per (W/m^2)].
    coefficient: f64,
}

struct PreparedGroup {
    group: BeamGroup,
    channels: Vec<PreparedChannel>,
    /// Channel coefficients collapsed per spherical component (p = -1, 0, +1).
    coefficient_by_p: [f64; 3],
}

/// A compiled (species, state, beams, mode) combination ready for fast
/// pointwise evaluation. Construction enumerates the channels, verifies the
/// near-resonance guard, and collapses per-channel coefficients.
pub struct ShiftEvaluator {
    groups: Vec<PreparedGroup>,
}

impl ShiftEvaluator {
    pub fn new(
        species: &AtomSpecies,
        state: &HyperfineState,
        groups: &[BeamGroup],
        mode: ShiftMode,
    ) -> Result<ShiftEvaluator> {
        Self::with_guard(species, state, groups, mode, DEFAULT_GUARD_HZ)
    }

    /// As [`ShiftEvaluator::new`] with an explicit near-resonance guard [Hz].
    pub fn with_guard(
        species: &AtomSpecies,
        state: &HyperfineState,
        groups: &[BeamGroup],
        mode: ShiftMode,
        guard_hz: f64,
    ) -> Result<ShiftEvaluator> {
        let channels = enumerate_channels(species, state)?;
        let guard = 2.0 * std::f64::consts::PI * guard_hz;
        let mut prepared = Vec::with_capacity(groups.len());
        for group in groups {
            let omega = group.omega;
            let mut prepared_channels = Vec::with_capacity(channels.len());
            let mut coefficient_by_p = [0.0_f64; 3];
            for channel in &channels {
                if (channel.omega_f - omega).abs() < guard {
                    return Err(Error::NearResonance {
                        omega_laser: omega,
                        omega_transition: channel.omega_f,
                        channel: format!(
                            "{} F'={} p={}",
                            channel.line_term, channel.f_upper, channel.polarization
                        ),
                    });
                }
                let omega_eff = match mode {
                    ShiftMode::E2PlusEpsilon => channel.omega_f,
                    ShiftMode::E2 => channel.omega_j,
                };
                let denominator = channel.omega_j.powi(3) * (omega_eff.powi(2) - omega.powi(2));
                let coefficient = -3.0 * std::f64::consts::PI * C.powi(2) * channel.einstein_a
                    * channel.weight
                    * omega_eff
                    / denominator;
                coefficient_by_p[(channel.polarization + 1) as usize] += coefficient;
                prepared_channels.push(PreparedChannel {
                    channel: channel.clone(),
                    coefficient,
                });
            }
            prepared.push(PreparedGroup {
                group: group.clone(),
                channels: prepared_channels,
                coefficient_by_p,
            });
        }
        Ok(ShiftEvaluator { groups: prepared })
    }

    /// Total potential at a point [J].
    pub fn potential(&self, r: &Vector3<f64>) -> f64 {
        let mut u = 0.0;
        for group in &self.groups {
            let field = spherical_components(&eval_field(&group.group, r));
            u += group.coefficient_by_p[0] * field.intensity(-1)
                + group.coefficient_by_p[1] * field.intensity(0)
                + group.coefficient_by_p[2] * field.intensity(1);
        }
        u
    }

    /// Potential with the per-channel breakdown retained.
    pub fn sample(&self, r: &Vector3<f64>) -> PotentialSample {
        let mut entries = Vec::new();
        let mut total = 0.0;
        for group in &self.groups {
            let field = spherical_components(&eval_field(&group.group, r));
            for pc in &group.channels {
                let value = pc.coefficient * field.intensity(pc.channel.polarization);
                total += value;
                entries.push(ChannelContribution {
                    line_term: pc.channel.line_term.clone(),
                    f_upper: pc.channel.f_upper,
                    polarization: pc.channel.polarization,
                    value,
                });
            }
        }
        PotentialSample {
            value: total,
            breakdown: Some(entries),
        }
    }
}

/// One-shot evaluation of the light shift at a point, with breakdown.
pub fn light_shift(
    species: &AtomSpecies,
    state: &HyperfineState,
    groups: &[BeamGroup],
    mode: ShiftMode,
    r: &Vector3<f64>,
) -> Result<PotentialSample> {
    Ok(ShiftEvaluator::new(species, state, groups, mode)?.sample(r))
}

/// Pointwise difference U_{state_a} - U_{state_b} of two ground states under
/// the same beams.
pub struct PotentialDifference {
    a: ShiftEvaluator,
    b: ShiftEvaluator,
}

impl PotentialDifference {
    pub fn new(
        species: &AtomSpecies,
        state_a: &HyperfineState,
        state_b: &HyperfineState,
        groups: &[BeamGroup],
        mode: ShiftMode,
    ) -> Result<PotentialDifference> {
        Ok(PotentialDifference {
            a: ShiftEvaluator::new(species, state_a, groups, mode)?,
            b: ShiftEvaluator::new(species, state_b, groups, mode)?,
        })
    }

    pub fn difference(&self, r: &Vector3<f64>) -> f64 {
        self.a.potential(r) - self.b.potential(r)
    }
}

/// Recoil energy hbar^2 k^2 / (2 m) for light of angular frequency `omega`.
pub fn recoil_energy(mass: f64, omega: f64) -> f64 {
    let k = omega / C;
    (HBAR * k).powi(2) / (2.0 * mass)
}

/// Channel coefficients collapsed per spherical component for light of
/// frequency `omega`: the potential of a field with components K_p is
/// `sum_p coeff[p+1] |K_p|^2` [J per W/m^2].
pub fn spherical_coefficients(
    species: &AtomSpecies,
    state: &HyperfineState,
    omega: f64,
    mode: ShiftMode,
) -> Result<[f64; 3]> {
    let probe = BeamGroup::new(
        omega,
        vec![crate::fields::Beam::linear(
            Vector3::x(),
            Vector3::z(),
            0.0,
            0.0,
        )?],
    )?;
    let eval = ShiftEvaluator::new(species, state, &[probe], mode)?;
    Ok(eval.groups[0].coefficient_by_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::HalfInt;
    use crate::atoms::omega_from_wavelength_nm;
    use crate::fields::Beam;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn rb() -> AtomSpecies {
        AtomSpecies::rubidium87()
    }

    fn f1m0(species: &AtomSpecies) -> HyperfineState {
        species.ground_state(HalfInt::from_int(1), HalfInt::ZERO).unwrap()
    }

    fn standing_wave_z_pol(wavelength_nm: f64, intensity: f64) -> BeamGroup {
        let b1 = Beam::linear(Vector3::x(), Vector3::z(), 0.0, intensity).unwrap();
        let b2 = Beam::linear(-Vector3::x(), Vector3::z(), 0.0, intensity).unwrap();
        BeamGroup::new(omega_from_wavelength_nm(wavelength_nm), vec![b1, b2]).unwrap()
    }

    #[test]
    fn zero_intensity_gives_exactly_zero() {
        let species = rb();
        let state = f1m0(&species);
        let group = standing_wave_z_pol(1064.0, 0.0);
        let eval =
            ShiftEvaluator::new(&species, &state, &[group], ShiftMode::E2PlusEpsilon).unwrap();
        for r in [Vector3::zeros(), Vector3::new(1e-7, -3e-7, 0.0)] {
            assert_eq!(eval.potential(&r), 0.0);
        }
    }

    #[test]
    fn single_red_beam_is_a_uniform_negative_shift() {
        let species = rb();
        let state = f1m0(&species);
        let beam = Beam::linear(Vector3::x(), Vector3::z(), 0.4, 1.0e7).unwrap();
        let group = BeamGroup::new(omega_from_wavelength_nm(1064.0), vec![beam]).unwrap();
        let eval =
            ShiftEvaluator::new(&species, &state, &[group], ShiftMode::E2PlusEpsilon).unwrap();
        let u0 = eval.potential(&Vector3::zeros());
        assert!(u0 < 0.0, "red-detuned traveling wave must be attractive");
        for r in [Vector3::new(2e-7, 1e-7, 0.0), Vector3::new(-5e-7, 3e-8, 1e-7)] {
            assert_relative_eq!(eval.potential(&r), u0, max_relative = 1e-12);
        }
        // Magnitude sanity: ~1e-28 J scale for 1 kW/cm^2 at 1064 nm.
        assert!(u0.abs() > 1e-30 && u0.abs() < 1e-25, "u0 = {u0:.3e}");
    }

    #[test]
    fn red_is_attractive_blue_is_repulsive_everywhere() {
        let species = rb();
        let state = f1m0(&species);
        for (wavelength, expect_negative) in [(1064.0, true), (532.0, false)] {
            let group = standing_wave_z_pol(wavelength, 1.0e7);
            let eval = ShiftEvaluator::new(&species, &state, &[group], ShiftMode::E2).unwrap();
            let k = omega_from_wavelength_nm(wavelength) / C;
            for n in 0..40 {
                let x = 0.025 * n as f64 * 2.0 * std::f64::consts::PI / k;
                let u = eval.potential(&Vector3::new(x, 0.0, 0.0));
                if expect_negative {
                    assert!(u <= 0.0, "red U({x}) = {u} > 0");
                } else {
                    assert!(u >= 0.0, "blue U({x}) = {u} < 0");
                }
            }
        }
    }

    #[test]
    fn breakdown_sums_to_total() {
        let species = rb();
        let state = f1m0(&species);
        let group = standing_wave_z_pol(1064.0, 2.0e7);
        let sample = light_shift(
            &species,
            &state,
            &[group],
            ShiftMode::E2PlusEpsilon,
            &Vector3::new(3.1e-8, 0.0, 0.0),
        )
        .unwrap();
        let sum: f64 = sample.breakdown.as_ref().unwrap().iter().map(|c| c.value).sum();
        assert_relative_eq!(sum, sample.value, max_relative = 1e-12);
    }

    #[test]
    fn group_additivity() {
        let species = rb();
        let state = f1m0(&species);
        let g1 = standing_wave_z_pol(1064.0, 1.0e7);
        let g2 = standing_wave_z_pol(532.0, 0.5e7);
        let both = ShiftEvaluator::new(
            &species,
            &state,
            &[g1.clone(), g2.clone()],
            ShiftMode::E2PlusEpsilon,
        )
        .unwrap();
        let only1 =
            ShiftEvaluator::new(&species, &state, &[g1], ShiftMode::E2PlusEpsilon).unwrap();
        let only2 =
            ShiftEvaluator::new(&species, &state, &[g2], ShiftMode::E2PlusEpsilon).unwrap();
        for n in 0..20 {
            let r = Vector3::new(1.3e-8 * n as f64, -0.7e-8 * n as f64, 0.0);
            let u = both.potential(&r);
            assert_relative_eq!(
                u,
                only1.potential(&r) + only2.potential(&r),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn disjoint_spherical_components_add_without_interference() {
        // One same-frequency set purely out-of-plane (K_0 only), another
        // purely in-plane (K_+- only): the union's potential is the sum.
        let species = rb();
        let state = f1m0(&species);
        let omega = omega_from_wavelength_nm(1064.0);
        let out_of_plane: Vec<Beam> = (0..3)
            .map(|n| {
                let a = 2.0 * std::f64::consts::PI * n as f64 / 3.0;
                Beam::linear(Vector3::new(a.cos(), a.sin(), 0.0), Vector3::z(), 0.1 * n as f64, 1e7)
                    .unwrap()
            })
            .collect();
        let in_plane: Vec<Beam> = (0..3)
            .map(|n| {
                let a = 2.0 * std::f64::consts::PI * n as f64 / 3.0;
                let dir = Vector3::new(a.cos(), a.sin(), 0.0);
                let pol = Vector3::z().cross(&dir);
                Beam::linear(dir, pol, -0.2 * n as f64, 2e7).unwrap()
            })
            .collect();
        let mut union = out_of_plane.clone();
        union.extend(in_plane.clone());

        let eval_union = ShiftEvaluator::new(
            &species,
            &state,
            &[BeamGroup::new(omega, union).unwrap()],
            ShiftMode::E2PlusEpsilon,
        )
        .unwrap();
        let eval_out = ShiftEvaluator::new(
            &species,
            &state,
            &[BeamGroup::new(omega, out_of_plane).unwrap()],
            ShiftMode::E2PlusEpsilon,
        )
        .unwrap();
        let eval_in = ShiftEvaluator::new(
            &species,
            &state,
            &[BeamGroup::new(omega, in_plane).unwrap()],
            ShiftMode::E2PlusEpsilon,
        )
        .unwrap();
        for n in 0..25 {
            let r = Vector3::new(2.1e-8 * n as f64, 3.7e-8 * (n % 7) as f64, 0.0);
            assert_relative_eq!(
                eval_union.potential(&r),
                eval_out.potential(&r) + eval_in.potential(&r),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn sigma_mirror_symmetry() {
        // U(m_F = +1) in a sigma+ beam equals U(m_F = -1) in the mirrored
        // sigma- beam.
        let species = rb();
        let plus = species
            .ground_state(HalfInt::from_int(1), HalfInt::from_int(1))
            .unwrap();
        let minus = species
            .ground_state(HalfInt::from_int(1), HalfInt::from_int(-1))
            .unwrap();
        let omega = omega_from_wavelength_nm(1064.0);
        let sq = std::f64::consts::SQRT_2;
        let pol_plus = Vector3::new(
            Complex64::new(1.0 / sq, 0.0),
            Complex64::new(0.0, 1.0 / sq),
            Complex64::new(0.0, 0.0),
        );
        let pol_minus = Vector3::new(
            Complex64::new(1.0 / sq, 0.0),
            Complex64::new(0.0, -1.0 / sq),
            Complex64::new(0.0, 0.0),
        );
        let g_plus = BeamGroup::new(
            omega,
            vec![Beam::new(Vector3::z(), pol_plus, 0.0, 1e7).unwrap()],
        )
        .unwrap();
        let g_minus = BeamGroup::new(
            omega,
            vec![Beam::new(Vector3::z(), pol_minus, 0.0, 1e7).unwrap()],
        )
        .unwrap();
        let r = Vector3::zeros();
        let u1 = ShiftEvaluator::new(&species, &plus, &[g_plus], ShiftMode::E2PlusEpsilon)
            .unwrap()
            .potential(&r);
        let u2 = ShiftEvaluator::new(&species, &minus, &[g_minus], ShiftMode::E2PlusEpsilon)
            .unwrap()
            .potential(&r);
        assert_relative_eq!(u1, u2, max_relative = 1e-12);
    }

    #[test]
    fn e2_mode_is_f_independent_for_pi_light() {
        let species = rb();
        let f1 = f1m0(&species);
        let f2 = species.ground_state(HalfInt::from_int(2), HalfInt::ZERO).unwrap();
        let f2m1 = species
            .ground_state(HalfInt::from_int(2), HalfInt::from_int(1))
            .unwrap();
        let group = standing_wave_z_pol(1064.0, 1.0e7);
        let diff = PotentialDifference::new(&species, &f1, &f2, &[group.clone()], ShiftMode::E2)
            .unwrap();
        let e1 = ShiftEvaluator::new(&species, &f2, &[group.clone()], ShiftMode::E2).unwrap();
        let e2 = ShiftEvaluator::new(&species, &f2m1, &[group], ShiftMode::E2).unwrap();
        let k = omega_from_wavelength_nm(1064.0) / C;
        for n in 0..10 {
            let r = Vector3::new(0.05 * n as f64 / k, 0.0, 0.0);
            let u = e1.potential(&r);
            assert!(diff.difference(&r).abs() <= 1e-12 * u.abs());
            assert!((e1.potential(&r) - e2.potential(&r)).abs() <= 1e-12 * u.abs());
        }
    }

    #[test]
    fn e2_plus_epsilon_resolves_the_hyperfine_difference() {
        let species = rb();
        let f1 = f1m0(&species);
        let f2 = species.ground_state(HalfInt::from_int(2), HalfInt::ZERO).unwrap();
        let group = standing_wave_z_pol(1064.0, 1.0e7);
        let omega = group.omega;
        let diff =
            PotentialDifference::new(&species, &f1, &f2, &[group.clone()], ShiftMode::E2PlusEpsilon)
                .unwrap();
        let eval =
            ShiftEvaluator::new(&species, &f1, &[group], ShiftMode::E2PlusEpsilon).unwrap();
        // Antinode of the standing wave at the origin.
        let r = Vector3::zeros();
        let d = diff.difference(&r).abs();
        let u = eval.potential(&r).abs();
        assert!(d > 0.0);
        // Order-of-magnitude estimate: |dU| ~ |U| * dE_hfs / (hbar * detuning).
        let splitting = 2.0 * species.ground_hyperfine.a_hfs / HBAR;
        let detuning = species
            .lines
            .iter()
            .map(|l| (l.omega_j - omega).abs())
            .fold(f64::INFINITY, f64::min);
        let estimate = u * splitting / detuning;
        assert!(
            d > estimate / 10.0 && d < estimate * 10.0,
            "difference {d:.3e} outside factor-10 window around {estimate:.3e}"
        );
    }

    #[test]
    fn identical_states_difference_is_exactly_zero() {
        let species = rb();
        let state = f1m0(&species);
        let group = standing_wave_z_pol(1064.0, 1.0e7);
        let diff =
            PotentialDifference::new(&species, &state, &state, &[group], ShiftMode::E2PlusEpsilon)
                .unwrap();
        assert_eq!(diff.difference(&Vector3::new(1e-8, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn near_resonance_guard_rejects_close_lasers() {
        let species = rb();
        let state = f1m0(&species);
        let group = standing_wave_z_pol(780.241, 1.0e7);
        match ShiftEvaluator::new(&species, &state, &[group], ShiftMode::E2PlusEpsilon) {
            Err(Error::NearResonance { .. }) => {}
            other => panic!("expected near-resonance error, got {:?}", other.is_ok()),
        }
    }
}
