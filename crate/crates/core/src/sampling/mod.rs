//! Metric lattices, Plancherel-Polya constants, positive cubature and
//! Bernstein inequality checks.

mod bernstein;
mod cubature;
mod io;
mod lattice;
mod neighbors;
mod pp;

pub use bernstein::{bernstein_ratio, BernsteinReport};
pub use cubature::{cubature_weights, nnls, CubatureRule, CubatureSolver, EXACTNESS_TOL};
pub use io::{point_columns, read_points_csv, write_points_csv};
pub use lattice::{build_lattice, build_lattice_with_pool, Lattice, LatticeCertificates, MAX_POOL};
pub use pp::{coupling, coupling_warning, pp_constants, PpConstants, PpMethod};
