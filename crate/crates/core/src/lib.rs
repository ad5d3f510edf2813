//! Frank-Wolfe boosting over l1-constrained ensembles of decision stumps.
//!
//! The crate provides the loss functions, weak learners and ensemble type
//! shared by all solvers, the Frank-Wolfe boosting solvers themselves
//! ([`fwboost`], [`adaboost_fw`]), the gradient boosting baselines they are
//! compared against ([`baselines`]) and the bound computations in
//! [`analysis`].

pub mod adaboost_fw;
pub mod analysis;
pub mod baselines;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod fwboost;
pub mod hypothesis;
pub mod learners;
pub mod losses;
pub mod report;
pub mod rng;
pub mod step;

pub use adaboost_fw::{run_adaboost_fw, AdaBoostFw, DistributionWeights};
pub use analysis::{RademacherEstimate, SigmaMode};
pub use baselines::{run_gradient_boosting, BaselineConfig};
pub use dataset::{Dataset, Task};
pub use ensemble::{Atom, AwayOutcome, Ensemble, PredictionVector, Update};
pub use error::{Error, Result};
pub use fwboost::{
    run_awaystep, run_fwboost, run_fwboost_c, run_fwboost_r, FwConfig, LinearOracle,
};
pub use hypothesis::{Hypothesis, Polarity};
pub use losses::{LossKind, LossModel};
pub use report::{FitReport, IterationRecord, StepKind, TerminationReason};
pub use step::StepPolicy;
