//! Random schedule matrices and the meeting graphs they induce.
//!
//! Every node draws its own wake-up row independently: `k = ⌈C·L^α⌉`
//! positions uniform in `0..L`, with replacement. Rows start at adversarial
//! offsets of at most `d`. Two nodes *meet* at a global column where both are
//! awake; in exclusive mode a column counts only when exactly two nodes are
//! awake there. The resulting [`CommGraph`] records the earliest witness
//! column per edge.

mod graph;
mod matrix;

pub use graph::{
    bfs_tree, build_comm_graph, build_comm_graph_repeated, detect_meetings, detect_meetings_repeated,
    forms_edges, graph_stats, BfsTree, CommGraph, GraphStats, Meeting,
};
pub use matrix::{
    concat_in_time, density_for, gen_matrix, gen_offsets, gen_row, repeat_in_time, MatrixError,
    OffsetPattern, ScheduleMatrix, MAX_ROWS,
};
