//! Flow graphs over ordered semirings, composable flow interfaces, good
//! conditions for heap-shaped data structures, and a ghost-instrumented
//! heap model.

pub mod algebra;

pub use algebra::*;
pub mod graph;

pub use graph::{
    capacity, fg_compose, fg_decompose, flow, inflow_equiv, outflow, project_inflow, Capacity, ComposeError, FlowGraph,
    GraphError, Inflow, InflowedGraph, NodeId,
};
pub mod interface;

pub use interface::{
    contextual_extension, good_denotation_check, int_compose, interface_eq, interface_of, satisfies, DenotationReport,
    FlowInterface, FlowMap, NodeViolation,
};
pub mod conditions;

pub use conditions::{builtin_condition, check_global, edgeset_report, ConditionKind, GlobalInvariant, GoodCondition};
pub mod heap;

pub use heap::{
    abstract_region, eval_dirty, eval_gr, ghost_mark, ghost_sync, ghost_unmark, state_compose, Addr, Heap, HeapValue,
    Record, State,
};
