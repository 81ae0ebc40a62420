//! Free-probability engine: Cauchy transforms, Stieltjes inversion,
//! semicircular flow and free convolution powers via subordination, free
//! entropy, conjugate variables, free Fisher information, a random-matrix
//! Monte Carlo oracle and the semicircularity equality-case test.

mod cauchy;
mod conjugate;
mod entropy;
mod rm;
pub(crate) mod subordination;

pub use cauchy::{cauchy, density_from_cauchy, CauchyEvaluator, GridCauchy};
pub use conjugate::{
    conjugate, free_fisher, semicircularity_test, ConjugateVariable, SemicircularityReport,
};
pub(crate) use entropy::band_table;
pub use entropy::{chi_via_flow, free_entropy, log_energy};
pub use rm::{rm_oracle, EmpiricalSpectrum};
pub use subordination::{free_convolve, free_power, semicircular_flow};
