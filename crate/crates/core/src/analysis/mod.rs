//! Inverse problems: curve fits and the two branching-ratio extractions.

pub mod densities;
pub mod echo;
pub mod fit;
pub mod lifetime;
pub mod nutation;

pub use densities::{extract_r_from_densities, extract_rho, Measured};
pub use echo::{solve_r_from_echo, synthetic_echo_dataset, EchoDataset, EchoSample, EchoSolution, Interpolation};
pub use fit::{fit_curve, CurveModel, FitFlag, FitResult};
pub use lifetime::fit_exponential;
pub use nutation::fit_nutation;
