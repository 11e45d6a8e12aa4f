//! Order-2 Rényi mutual information of a free massless scalar field between
//! planar regions, computed as a thermal Casimir free energy in one higher
//! dimension.
//!
//! Two independent routes are provided:
//!
//! * [`disk_multipole`] and [`halfspace`]: the Tr-log formula
//!   `I2 = -1/2 sum_{D,N} log det(I - C_A G C_B G)` in a partial-wave basis
//!   (oblate spheroidal harmonics for disks, imaginary-angle plane waves for
//!   half-spaces).
//! * [`worldline`]: a Monte Carlo sum over closed Brownian loops that
//!   intersect the regions.

pub mod acceptance;
pub mod disk_multipole;
pub mod error;
pub mod halfspace;
pub mod linalg;
pub mod quadrature;
pub mod specfun;
pub mod worldline;

pub use disk_multipole::{BoundaryCondition, CapacitanceMatrix, DiskPairGeometry, TranslationMatrix, TwoDiskRenyi};
pub use error::{Error, Result};
pub use halfspace::{DiskHalfSpaceGeometry, HalfSpacePairGeometry, QuadratureSpec};
pub use specfun::MultipoleIndex;
pub use worldline::{MCEstimate, PlanarRegion, SamplingParams, WorldlineLoop};

/// Library version embedded into run records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
