//! Summary-statistic privacy: quantization mechanisms that hide a distributional secret,
//! their privacy and distortion analysis, and grid synthesis of optimal mechanisms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod mechanisms;
pub mod model;
pub mod optimizer;
pub mod specialfn;

pub use analysis::{AnalysisConfig, AnalyticPrivacy, BoundReport, GammaMethod, McEstimate, PrivacyKind, TradeoffPoint};
pub use error::{Error, Result};
pub use mechanisms::{BaselineMechanism, MechanismConfig, MechanismKind, ParamMechanism, QuantizationMechanism};
pub use model::{
    Dataset, Family, FamilyParams, Interval, LipschitzDescriptor, LipschitzParam, Prior, SecretSpec,
};
pub use optimizer::{Bin, BinTable, GridPrior, GridProblem};
pub use specialfn::Branch;
