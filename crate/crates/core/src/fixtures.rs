//! Bundled example models.

/// Automatic gauge control system: three transactions, twelve actions.
pub const AGC: &str = include_str!("../../../fixtures/agc.rts");

/// The same system with the eccentricity job `A12` raised to 60 ticks.
pub const AGC_A12_60: &str = include_str!("../../../fixtures/agc_a12_60.rts");
