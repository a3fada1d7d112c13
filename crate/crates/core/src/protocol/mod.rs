//! The multi-processor synchronization protocol.
//!
//! Every node draws a long random wake-up row made of independent blocks
//! ([`build_pipeline_matrix`]). One period of these rows is repeated `D`
//! times. Whenever nodes meet they exchange the largest ID they know and
//! that node's clock, and each node adopts any larger pair it hears. At the
//! end every node sets its own clock to the believed root clock.
//!
//! [`estimate_n`] wraps the pipeline for nodes that know `d` but not `n`,
//! halving a guess of `n` until a node's group is as large as the guess.

mod estimate;
mod params;
mod pipeline;
mod sync;

pub use estimate::{estimate_n, EpochRecord, EstimateError, EstimateResult};
pub use params::{
    assign_ids, build_block_matrix, build_hat_matrix, build_pipeline_matrix, default_rounds,
    PipelineParams,
};
pub use pipeline::{
    fit_scaling, measure_radio_cost, run_pipeline, summarize_cost, CostSummary, PipelineResult,
    ScalingFit,
};
pub use sync::{init_states, run_sync, schedule_for_graph, NodeState, SyncOptions, SyncOutcome};
