//! Laplace-Beltrami eigenpairs on subdomains of a rectangle, the unit
//! sphere and flat tori.
//!
//! A domain `Omega` is embedded in a host `S` whose Laplacian eigenbasis is
//! known in closed form. The Dirichlet condition on `Omega` is relaxed to a
//! finite potential `V0` on `S \ Omega`, and the resulting Schrodinger
//! operator is projected onto the lowest `N` host eigenfunctions:
//!
//! ```text
//! H_nm = lambda_n delta_nm + V0 * integral_{S \ Omega} phi_n phi_m
//! ```
//!
//! ```no_run
//! use lbexp::{assembly, eigensolve, geometry, region};
//!
//! let domain = region::builtin_domain("l_shape", &Default::default()).unwrap();
//! let spec = geometry::enumerate_basis(&domain.geometry, 225).unwrap();
//! let grid = geometry::quadrature(&domain.geometry, geometry::default_resolution(&spec)).unwrap();
//! let h = assembly::assemble(&spec, &domain.region, assembly::DEFAULT_V0, &grid).unwrap();
//! let sol = eigensolve::eigendecompose(&h, 6).unwrap();
//! println!("{:?}", sol.eigenvalues());
//! ```

pub mod assembly;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod par;
pub mod reference;
pub mod region;
pub mod stats;

pub use error::{Error, Result};
pub use par::Execution;
