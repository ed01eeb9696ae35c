//! Exact frequency- and time-resolved photon correlations of resonance
//! fluorescence, computed by coupling weak, lossy sensor modes to a driven
//! two-level emitter and reading normalized correlators of their populations.

pub mod io;
pub mod liouville;
pub mod mollow;
pub mod numerics;
pub mod sensing;
pub mod sweep;
