//! CODATA 2018/2022 exact or recommended SI values.

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Vacuum electric permittivity, F/m (CODATA 2022).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_818_8e-12;

/// Surface-code per-step threshold error rate used as the default budget.
pub const SURFACE_CODE_THRESHOLD: f64 = 0.0057;
