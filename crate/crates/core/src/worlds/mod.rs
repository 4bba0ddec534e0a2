//! Navigation worlds: mazes, random geometric graphs, expert labels and archives.

mod dataset;
mod graph;
mod grid;
mod labels;

pub use dataset::{
    generate_dataset, sample_seed, sidecar_path, ArchiveMeta, Dataset, Split, WorldParams, ARCHIVE_VERSION,
};
pub use graph::{generate_graph_world, GeometricGraph, GraphWorldParams, NODE_FEATURES};
pub use grid::{discretize_graph_to_grid, generate_maze, grid_to_graph, GridWorld, WALL_REMOVAL};
pub use labels::{action_discretize, dijkstra_labels, shortest_paths, Action, NavSample, ShortestPaths};
