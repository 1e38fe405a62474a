//! Dislocation networks: closed oriented polyline loops with lattice Burgers
//! vectors, their mass and mass ratio, pushforward, remeshing and spanning
//! surfaces.

pub mod io;
pub mod lattice;
pub mod mass_ratio;
pub mod network;
pub mod remesh;
pub mod surface;

pub use io::{network_from_json, network_to_json, read_network, write_network, NETWORK_FORMAT};
pub use lattice::{BurgersVector, Lattice};
pub use mass_ratio::{mass_ratio, MassRatioEstimate};
pub use network::{regular_polygon, DislocationNetwork, Loop, NodeTangent};
pub use remesh::{remesh, RemeshReport};
pub use surface::{make_cone_surface, make_planar_surface, SpanningSurface, Triangle, TriangleRule};
