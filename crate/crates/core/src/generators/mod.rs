//! Seeded synthetic systems with known dependency structure.

mod ar;
mod logistic;
mod sde;

pub use ar::{draw_ar_coefficients, gen_ar, simulate_ar, ArCoefficients, ArConfig, AR_DIVERGENCE_LIMIT};
pub use logistic::{gen_logistic, LogisticConfig};
pub use sde::{gen_sde, SdeConfig, SdeSeries};
