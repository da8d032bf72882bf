//! Maximal correlation, the Kolmogorov dependence index and the m-dependence
//! scale for finite joint distributions, Gaussian vectors and binned samples.
//!
//! Everything is computed from the spectrum of the conditional-expectation
//! operator φ ↦ E{φ(X)|Y}; see [`spectral`].

pub mod ace;
pub mod error;
pub mod estimate;
pub mod gaussian;
pub mod io;
pub mod joint;
pub mod sample;
pub mod spectral;
pub mod structure;

mod bvn;

pub use error::{Error, Result};
pub use joint::{
    augment_with_independent, coarsen_y, conditional_matrix, make_joint, marginals,
    DiscreteJoint, FunctionTable, Side,
};
pub use sample::{Column, SampleTable};
pub use spectral::{
    dependence_scale, gram_det_oracle, kolmogorov_index, m_dependence_order,
    maximal_correlation, normalized_matrix, singular_spectrum, DependenceProfile,
    SingularSpectrum, TransformPair,
};
