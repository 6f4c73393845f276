//! Identifiability of static nonlinear networks on directed acyclic graphs.
//!
//! The crate answers three questions about a network of nodes coupled by
//! static polynomial edge functions, exactly and symbolically:
//!
//! - what does measuring a node reveal? (`response`: canonical multivariate
//!   response polynomials, plus a cheap numeric evaluator)
//! - which nodes must be measured for the edges to be identifiable, and is
//!   that set sufficient? (`identify::measurement_plan`)
//! - how are the edge functions actually recovered from sink measurements?
//!   (`identify::identify_network`: delay-2 slices read off incoming edges,
//!   argument-shift extraction peels virtual measurements upstream)
//!
//! Where identification genuinely fails, `counterexamples` constructs and
//! verifies explicit witness pairs: distinct networks that produce identical
//! measured responses. All arithmetic is exact rational; equality of
//! canonical forms is the only oracle.

pub mod counterexamples;
pub mod generate;
pub mod graph;
pub mod identify;
pub mod laws;
pub mod netfile;
pub mod poly;
pub mod rat;
pub mod response;
pub mod simulate;

pub use graph::{Edge, Graph, GraphError, NodeId};
pub use poly::{
    interpolate, recover_shift, recover_shift_up_to_constant, Classification, FunctionClass,
    InterpError, Poly, PolyError, ShiftError,
};
pub use rat::{format_rat, parse_rat, rat, ratio, Rat};
pub use response::{
    build_response, build_response_with_cap, eval_network_response, responses_equal,
    verify_edge_slice_shape, Assignment, DelayedInput, MPoly, Monomial, ResponseError,
    DEFAULT_TERM_CAP,
};
pub use simulate::{
    consistency_check, consistency_check_with_cap, run, Network, NetworkError, SimError,
    Trajectory,
};
