//! Exact symbolic arithmetic: multivariate rational polynomials, truncated
//! power series, and polynomials in path minima integrated over the unit box.

mod minexpr;
mod poly;
mod series;

pub use minexpr::{integrate_min_expression, LinkMask, MinExpression, MinMonomial};
pub use poly::RationalPolynomial;
pub use series::{exp_series, log_series, Coefficient, FormalSeries};
