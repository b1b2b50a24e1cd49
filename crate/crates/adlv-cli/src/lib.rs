//! IO companion for the core crate: serialization documents, polygon
//! rendering, and the oracle runner behind the `adlv` binary.

pub mod doc;
pub mod oracle;
pub mod polygon;
pub mod report;
