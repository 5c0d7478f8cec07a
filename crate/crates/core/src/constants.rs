//! Physical constants, CODATA 2018 exact or recommended values (SI).

/// Reduced Planck constant ħ (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity ε₀ (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Mass of a ⁸⁷Rb atom (kg).
pub const RB87_MASS: f64 = 1.443_16e-25;

/// ⁸⁷Rb D2-line transition dipole matrix element (C·m).
pub const RB87_D2_DIPOLE: f64 = 3.584e-29;
