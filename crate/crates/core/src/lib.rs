pub mod bisim;
pub mod channel;
pub mod compose;
pub mod flownet;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod relations;
pub mod sched;

pub use model::{Cpa, Distribution, Rational, StateId, Transition};
