pub mod budget;
pub mod error;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod snake;
pub mod solvers;
pub mod adversary;
pub mod harness;
pub mod verify;

pub use budget::Budget;
pub use error::{Error, Result};
pub use graph::{Graph, GraphKind, Vertex};
pub use oracle::{Instance, InstanceFile, InstanceMeta, QueryOracle};
pub use snake::{Snake, SnakeFile};
