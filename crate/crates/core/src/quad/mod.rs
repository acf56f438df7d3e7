//! Singular and improper quadrature plus the integral existence criteria.

pub mod criteria;
pub mod engine;

pub use criteria::{
    classify_existence, divergence_certificate_boundary, integrate_singular, integrate_tail, integrate_tail_monotone,
    iterated_integral_check, BoundaryCertificate, ConditionReport, ExistencePrediction, Method, MonotoneMinorant,
    Regime,
};
pub use engine::{gk21, gk_adaptive, improper_log, Adaptive, Improper, QuadOptions, Status};
