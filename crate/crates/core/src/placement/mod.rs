//! Repeater placement in the plane.

pub mod coords;
pub mod network;
pub mod path;
pub mod placer;
pub mod scaling;

pub use coords::{square, Coordinates, Point};
pub use network::{all_paths, best_path, end_pairs, network_utility, BestPath, NetworkUtility, SearchSettings};
pub use path::{chain_for_path, path_gradient, path_utility, Hardware, PathGradient, PathResult};
pub use placer::{final_evaluation, place_repeaters, utility_gradient, PlacementConfig, PlacementResult};
pub use scaling::{analyze_scaling, ScalingFit};
