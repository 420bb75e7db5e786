//! Experiment driver: random ensembles, convergence-order studies and the
//! worked-example regression.

pub mod compare;
pub mod convergence;
pub mod ensemble;
pub mod worked_example;

pub use compare::align_columns;
pub use convergence::{
    convergence_study, eigenvalue_error, eigenvector_error, fit_power_law, fit_samples, instance_errors,
    ConvergenceReport, PowerLawFit, Sample,
};
pub use ensemble::{default_t_grid, generate_instance, EnsembleConfig, Instance, Predictor};
pub use worked_example::{worked_example_regression, ExampleReport};
