//! Tight upper bound `4λ₁` on the maximal quantum value of the three-qubit
//! Svetlichny operator, with an independent see-saw oracle, tightness
//! certificates, noisy GHZ-class families and GME-concurrence lower bounds.

pub mod cli;
pub mod correlation;
pub mod eigen;
pub mod error;
pub mod families;
pub mod optimizer;
pub mod qcore;
pub mod svetlichny;

pub use correlation::{
    correlation_tensor, local_rotate, singular_spectrum, unfold, CorrelationMatrix, CorrelationTensor,
    SingularSpectrum,
};
pub use error::{Error, Result, ValidationFailure, Violation};
pub use families::{
    analytic_singular_values, gme_lower_bound, ghz_class_state, realize, scan, violation_threshold,
    FamilyKind, FamilySpec, GhzClassParams, GmeReport, ScanFamily, ScanRow, Threshold, ThresholdReport,
};
pub use optimizer::{maximize, random_settings, seesaw_step, OptimizationResult, OptimizerConfig};
pub use qcore::{
    expectation, kron3, observable, pauli, pure_to_density, validate_density, ComplexMatrix, DensityMatrix,
    PureState, UnitVector3,
};
pub use svetlichny::{
    bilinear_value, build_operator, principal_angle, quantum_bound, svetlichny_value, tightness_certificate,
    BoundReport, Certificate, Classification, MeasurementSettings,
};
