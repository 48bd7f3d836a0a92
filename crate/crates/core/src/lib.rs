//! Random spherical obstacles in the unit ball.
//!
//! Sampling of Poisson obstacle fields, Newtonian capacity estimates,
//! analytic avoidability criteria and walk-on-spheres escape probabilities.

pub mod capacity;
pub mod criteria;
pub mod error;
pub mod exterior;
pub mod geometry;
pub mod index;
pub mod lattice;
pub mod process;
pub mod profile;
pub mod quadrature;
pub mod rng;
pub mod whitney;
pub mod wos;

pub use error::{Error, Result};
pub use geometry::{AxisCube, Ball, BoundaryPoint, Point};
pub use index::ObstacleIndex;
pub use lattice::{check_regular, regular_lattice, Lattice, RegularityReport};
pub use process::{build_archipelago, mean_measure, sample_realization, Archipelago, PoissonSampler, Realization};
pub use profile::{validate_profiles, ExteriorProfile, IntensityProfile, RadiusProfile};
pub use whitney::{whitney_decompose, WhitneyCube, WhitneyDecomposition};
