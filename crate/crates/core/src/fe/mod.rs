//! Fractional expansions in `n^{-1/q}` and saddle-point asymptotics for
//! `exp(P(z))`.

mod fit;
mod poly;
pub mod powser;
mod saddle;
mod series;

pub use fit::{coeff_growth_check, fe_fit, geometric_grid, FitReport};
pub use poly::PolyDescriptor;
pub use saddle::{lagrange_rho, log_factorial, muller_leading_check, rn_solve, saddle_coefficients, LagrangeRho};
pub use series::{binom_ratio, fe_product, fe_reciprocal, fe_shift, fe_sum, FracSeries, Scalar};
