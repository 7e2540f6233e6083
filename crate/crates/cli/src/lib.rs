//! Harness around the liabilities protocol: transcript container, workload
//! simulation, replay verification, adversarial scenarios and benchmarks.
//!
//! Everything here is monomorphic over the default BN254 backend; the
//! library crate stays generic.

pub mod bench;
pub mod scenario;
pub mod sim;
pub mod transcript;
pub mod verify;

/// The concrete curve the harness drives.
pub type Curve = ppol_core::curve::DefaultCurve;
/// Scalar field of [`Curve`].
pub type Fr = ppol_core::curve::Scalar<Curve>;
/// Reference string over [`Curve`].
pub type Srs = ppol_core::srs::StructuredReferenceString<Curve>;
