//! Physical constants (CODATA 2018). Single source of truth for all modules.

/// Speed of light in vacuum [m/s] (exact).
pub const C: f64 = 299_792_458.0;

/// Planck constant [J s] (exact).
pub const H: f64 = 6.626_070_15e-34;

/// Reduced Planck constant h/2π [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity [F/m].
pub const EPSILON_0: f64 = 8.854_187_8128e-12;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_consistent_with_h() {
        assert!((HBAR - H / (2.0 * std::f64::consts::PI)).abs() / HBAR < 1e-9);
    }
}
