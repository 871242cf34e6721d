pub mod error;
pub mod generators;
pub mod ingest;
pub mod mapping;
pub mod measures;
pub mod pipeline;
pub mod qp;
pub mod rng;
pub mod simplex;
pub mod spa;
pub mod types;
