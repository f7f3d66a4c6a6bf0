//! Persistence diagrams compared through complex coefficient vectors.
//!
//! A diagram's proper points are sent to the complex plane by one of three
//! maps ([`Transform::R`], [`Transform::S`], [`Transform::T`]), read as the
//! roots of a monic polynomial, and summarized by the first `k` elementary
//! symmetric values of those roots. Coefficient vectors are compared with
//! three cheap metrics; the exact bottleneck distance is available for
//! re-ranking a shortlist.
//!
//! Modules follow the pipeline:
//!
//! * [`mesh`] builds 0th persistence diagrams from triangle meshes.
//! * [`diagram`] stores and (de)serializes diagrams.
//! * [`transforms`] and [`viete`] turn diagrams into coefficient vectors.
//! * [`metrics`] holds the coefficient distances and the bottleneck distance.
//! * [`retrieval`] computes distance matrices, precision/recall tables and
//!   the two-stage prefilter/rerank query.

pub mod diagram;
pub mod error;
pub mod mesh;
pub mod metrics;
pub mod retrieval;
pub mod transforms;
mod union_find;
pub mod viete;

pub use diagram::{PersistenceDiagram, PersistencePoint};
pub use error::{Error, Result};
pub use mesh::{FilterKind, MeshFrame, Skeleton, TriangleMesh, VertexFunction};
pub use metrics::{bottleneck, bottleneck_bruteforce, coeff_distance, CoeffMetric, MetricKind};
pub use retrieval::{DistanceMatrix, EmbeddingIndex, LabeledDatabase, PrTable, SynthConfig};
pub use transforms::{ComplexRoot, ComplexRootList, Transform};
pub use viete::{default_k, elementary_symmetric, embed, pad_roots, CoefficientVector};

pub use num_complex::Complex64;
