//! Multi-group proportional representation (MPR).
//!
//! MPR is the largest gap `|E_G[c] − E_R[c]|` between a generated and a
//! reference population over a class of functions `c` of intersectional
//! attribute vectors. The crate covers encoding ([`attributes`]), the
//! function classes and their witnesses ([`function_classes`]), exact
//! computation ([`mpr`]), uncertainty and bounds ([`stats`]) and buffered
//! fine-tuning of a categorical generator ([`optimizer`]).

pub mod attributes;
pub mod error;
pub mod function_classes;
pub mod mpr;
pub mod optimizer;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use attributes::{
    load_proportions, load_samples, load_schema, Attribute, AttributeSchema, CategoricalRecord,
    JointDistribution, ReferenceSpec, SampleSet,
};
pub use error::{MprError, Result};
pub use function_classes::{
    range_constant, FunctionClassSpec, Indicator, LinearWitness, RangeConstant, TreeWitness,
    Witness,
};
pub use mpr::{mpr, mpr_exact, mpr_explicit, mpr_linear, mpr_tree, MprEstimate};
pub use stats::{BootstrapConfig, BootstrapResult, TestResult};
