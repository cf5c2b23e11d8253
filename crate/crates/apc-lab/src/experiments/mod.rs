//! Sweeps that turn the limit statements into measured exponents and trends.

mod adiabatic;
mod fit;
mod mollifier;
mod report;
mod setup;
mod static_decay;

pub use adiabatic::{
    adiabatic_gapless_check, decay_halftime, epsilon_scaling_sweep, pair_creation_sweep, EpsilonSweep, GaplessRow, PairRow,
    PairSweepOptions,
};
pub use fit::{fit_loglog, ScalingFit, MIN_FIT_POINTS};
pub use mollifier::{mollifier_decay_check, MollifierCheck};
pub use report::{Fingerprint, SweepReport, SCHEMA_VERSION};
pub use setup::Lab;
pub use static_decay::{static_decay_exponent, StaticDecay};
