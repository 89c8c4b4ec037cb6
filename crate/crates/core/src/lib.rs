//! Bound states of spiked harmonic and anharmonic oscillators,
//! `-R'' + (l(l+1)/r^2 + V(r)) R = E R` with `V` singular faster than
//! `r^-2` at the origin and confining at infinity.
//!
//! The radial equation is mapped to `-z^2 w'' + g(z) w = 0`.  Floquet
//! solutions around the origin are connected to the recessive formal
//! solutions at both irregular singular points; eigenvalues are the zeros of
//! the resulting determinant.

pub mod banded;
pub mod config;
pub mod connection;
pub mod error;
pub mod floquet;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod roots;
pub mod settings;
pub mod special;
pub mod spectrum;
pub mod tables;
pub mod thome;
pub mod wavefunction;

pub use connection::{connection_matrix, ConnectionMatrix, ExtractionCertificate};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use floquet::{circuit_matrix, floquet_pair, initial_indices, refine_floquet, CircuitMatrix, FloquetPair, FloquetSolution, IndexPair, Regime};
pub use model::{canonicalize, parse_rational, CanonicalEquation, CanonicalForm, PotentialSpec, Rational, Term};
pub use settings::{Normalization, SolverSettings};
pub use spectrum::{physical_coefficients, quantization_residual, EigenResult, EnergyPoint, Problem};
pub use thome::{formal_wronskian_infinity, formal_wronskian_origin, thome_infinity, thome_origin, FormalWronskian, ThomeInfinity, ThomeOrigin};
pub use config::{load_problem, parse_problem, ProblemConfig};
