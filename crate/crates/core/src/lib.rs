//! Constructive coarse geometry on finite spaces.
//!
//! Builders produce cover witnesses, annulus refinements, product covers,
//! decomposition chains and embedding bounds; verifiers check every claim
//! with exact rational arithmetic. Strict inequalities stay strict: two sets
//! at distance exactly `R` are not `R`-disjoint.
//!
//! The runnable programs under `examples/` walk through each capability.

pub mod cli;
pub mod doubling;
pub mod embed;
pub mod error;
pub mod family;
pub mod gen;
pub mod io;
pub mod metric;
pub mod rational;
pub mod product;
pub mod report;
pub mod restricted;
pub mod sfdc;
pub mod tree;
pub mod union_find;

pub use error::{Error, Result};
pub use family::{
    is_r_disjoint, mesh, verify_cover_witness, AsdimWitness, CoverWitness, MeshBound, PointSet, SubsetFamily,
};
pub use metric::{diameter, set_distance, Edge, Metric, MetricSpace};
pub use rational::Rational;
pub use report::{VerificationReport, Violation, ViolationKind};
pub use tree::{annulus_points, gromov_product, refine_annuli, tree_asdim1_witness, Annulus, RootedTree};
pub use doubling::{check_hpc_witness, is_lsd_subset, is_uniformly_lsd, is_weakly_uniformly_lsd, DoublingParams, HpcReading, RGrid};
pub use embed::{
    append_embedding, empirical_envelope, inequality_chain, pullback_witness, rho_minus_min, rho_plus_bound, BlockPartition,
    DistortionEnvelope, EmbeddingSpec, FactorEmbedding,
};
pub use product::{
    combine_product_covers, ExtendedSchedule, Reindex, RestrictedPoint, RestrictedProduct, RestrictedSample, SupProduct,
};
pub use restricted::{restricted_tree_cover, TreeProductSchedule};
pub use sfdc::{asdim_to_sfdc_chain, hpc_to_sfdc_chain, verify_sfdc_chain, DecompositionChain};
