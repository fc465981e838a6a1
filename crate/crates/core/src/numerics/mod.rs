//! Numerical kernels: root finding, 2-D Newton continuation, adaptive
//! quadrature, finite differences, splines, and tridiagonal solves.

mod diff;
mod newton;
mod quad;
mod real;
mod roots;
mod spline;
mod tridiag;

pub use diff::finite_diff;
pub use newton::{condition_number, continuation2d, jacobian, newton2d, newton_solve, Vec2, MAX_CONDITION};
pub use quad::{adaptive_quad, QuadConfig, Quadrature, SingularEndpoint};
pub use real::{DoubleDouble, Real};
pub use roots::{all_roots, bracket_root, bracket_root_geometric, refine_bracket, RootConfig};
pub use spline::CubicSpline;
pub use tridiag::solve_tridiagonal;
