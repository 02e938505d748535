//! Point configurations, windows, configuration distances and Delaunay features.

pub mod assignment;
mod config;
mod delaunay;
mod distance;

pub use config::{PointConfig, PointId, Window};
pub use delaunay::{delaunay, max_cell_area, triangulate, Tessellation};
pub use distance::{cardinality_distance, hausdorff, max_nn_distance, optimal_matching};

