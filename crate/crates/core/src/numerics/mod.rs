//! Numerical side: period matrices, the isogeny A -> B, certified theta sums, the maps
//! phi_L and phi_{M^2}, and the checks that tie them to the exact modules.

pub mod checks;
pub mod config;
pub mod lattice;
pub mod projective;
pub mod sections;
pub mod theta;

pub use config::PeriodMatrixConfig;
pub use lattice::{build_isogeny, smith_normal_form, IsogenyModel};
pub use projective::ProjectivePoint;
pub use sections::{eval_sections, SectionEvaluator};
pub use theta::{theta_char, ThetaValue};
