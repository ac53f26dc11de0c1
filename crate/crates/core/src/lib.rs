//! Crashed-vehicle rate benchmarking toolkit.
//!
//! The crate is organized as a pipeline over immutable value types:
//!
//! 1. [`ingest`] parses heterogeneous source files (fleet incident reports,
//!    state crash extracts, mileage tables, cell-level mileage) into canonical
//!    [`model::CrashRecord`]s and [`model::ExposureTable`]s via declarative
//!    mapping configs.
//! 2. [`classify`] assigns each record a crash-type group, its outcome
//!    levels, and (where kinematics are present) a pre-crash movement
//!    category.
//! 3. [`benchmark`] turns classified human corpora plus exposure tables into
//!    adjusted benchmark rates: passenger-share mileage adjustment,
//!    underreporting correction, cell-level dynamic reweighting, and
//!    mileage-blended multi-location rates.
//! 4. [`stats`] performs exact interval estimation for the ratio of two
//!    Poisson rates and derives comparison quantities.
//! 5. [`report`] emits comparison tables, event-count tables, and the
//!    adjustment sensitivity grid as CSV and markdown.
//! 6. [`simulate`] generates seeded synthetic corpora with known ground
//!    truth for calibration checks of the statistical machinery.
//!
//! All domain types are immutable value objects and safe to share across
//! threads. File formats are documented in `docs/data_dictionary.md`.

pub mod benchmark;
pub mod classify;
pub mod ingest;
pub mod model;
pub mod report;
pub mod simulate;
pub mod stats;
