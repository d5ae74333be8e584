//! Modes of a monitored system as faces of a simplicial complex.
//!
//! Live state is classified through a partition of unity into a point of the
//! complex's standard realisation, belief about that state is summarised by a
//! generalised belief function and its visualisation point, and mode changes
//! are driven by barycentric threshold zones and hysteresis stable domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`simplicial`]: abstract complexes, faces and barycentric points.
//! * [`belief`]: belief/plausibility functions and the visualisation map.
//! * [`cover`]: state spaces, covers, nerves and partitions of unity.
//! * [`engine`]: the mode machine, trajectories and explanation records.
//! * [`scenarios`]: offender monitoring, hospital triage and the judicial fold.
//! * [`dsl`]: the `.mode` text format and its canonical JSON twin.
//! * [`render`]: deterministic SVG output.
//! * [`tracegen`]: seeded synthetic oracle traces.

pub mod belief;
pub mod cover;
pub mod dsl;
pub mod engine;
pub mod numeric;
pub mod par;
pub mod render;
pub mod scenarios;
pub mod simplicial;
pub mod tracegen;

pub use simplicial::{AbstractComplex, Face, SimplexPoint, VertexId};
