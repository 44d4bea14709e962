//! HTTP JSON service over the chronoquery engine.
//!
//! Endpoints:
//!
//! | method | path                         |                                   |
//! |--------|------------------------------|-----------------------------------|
//! | GET    | `/health`                    | liveness                          |
//! | GET    | `/datasets`                  | list registered datasets          |
//! | POST   | `/datasets`                  | upload wide CSV, returns 201      |
//! | GET    | `/datasets/{id}`             | metadata, no values               |
//! | GET    | `/datasets/{id}/series`      | raw values, `?cases=a,b`          |
//! | POST   | `/datasets/{id}/query`       | run the full query pipeline       |
//!
//! Queries are stateless: every request carries the complete query and the
//! response depends on nothing but the request and the dataset.

pub mod api;
pub mod error;
pub mod pipeline;
pub mod registry;
pub mod server;

pub use api::{QueryRequest, QueryResponse};
pub use error::ApiError;
pub use pipeline::run_query;
pub use registry::Registry;
pub use server::{router, router_with_limit, serve, with_static_dir, DEFAULT_BODY_LIMIT};

/// Environment variable naming the snapshot directory.
pub const SNAPSHOT_DIR_ENV: &str = "CHRONOQUERY_SNAPSHOT_DIR";
/// Environment variable naming the listen address.
pub const LISTEN_ADDR_ENV: &str = "CHRONOQUERY_ADDR";
