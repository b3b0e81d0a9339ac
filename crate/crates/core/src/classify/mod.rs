//! Topic classification from genotype values.
//!
//! Each user gets a one-dimensional linear-discriminant classifier per metric
//! (Gaussian class conditionals with a pooled variance). A hashtag is then
//! classified by the product of the posteriors of every user who used it,
//! validated by withholding one hashtag at a time.

mod consensus;
mod local;
mod logistic;
mod validation;

pub use consensus::{nb_consensus, ConsensusResult};
pub use local::{train_local, ClassStats, LocalClassifier, VARIANCE_FLOOR};
pub use logistic::{fit_logistic, LogisticFit};
pub use validation::{
    accuracy_curve, class_separation, curve_means, leave_one_out, random_baseline, CurvePoint, ErrorTable, Folds,
    LooOptions, LooReport, Prediction, TopicError,
};
