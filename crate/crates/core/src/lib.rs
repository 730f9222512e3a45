//! Connected dominating set packings and partitions of k-vertex-connected
//! graphs, vertex connectivity under random vertex sampling, and a
//! store-and-forward broadcast simulator over CDS backbones.

pub mod broadcast;
pub mod connector;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod generators;
pub mod graph;
pub mod greedy;
pub mod packing;
pub mod partition;
pub mod paths;
pub mod unionfind;
pub mod verify;
pub mod virtual_graph;

pub use broadcast::{extract_packing, simulate_broadcast, Message, ScheduleLog, ThroughputReport};
pub use error::{Error, Result};
pub use experiments::{run_experiment, Config, ExperimentOutput};
pub use flow::{min_vertex_cut, vertex_connectivity};
pub use graph::{Graph, NodeSet};
pub use packing::{build_packing, BuildParams, CdsPacking, ClassAssignment, FallbackPolicy};
pub use partition::build_partition;
pub use verify::verify_packing;
pub use virtual_graph::{LayerConfig, VirtualNode};
