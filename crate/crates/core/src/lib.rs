pub mod diagnostics;
pub mod emden_fowler;
pub mod error;
pub mod experiments;
pub mod field;
pub mod io_persist;
pub mod linear_wave;
pub mod nonlinear_wave;
pub mod numerics;
pub mod ode;
