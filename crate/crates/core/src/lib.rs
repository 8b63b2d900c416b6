//! Simulation and verification tools for a two-species Lotka-Volterra
//! competition system in a heterogeneous habitat, where one species diffuses
//! and the other stays put:
//!
//! ```text
//! u_t = d Δu + u (a(x) - u - v)
//! v_t = ε Δv + v (a(x) - u - v)      (ε = 0: v does not move)
//! ```
//!
//! with zero-flux boundaries. The crate provides a profile language for
//! `a`, `u0`, `v0` ([`envdsl`]), grids and quadrature ([`grid`]), the
//! discrete Laplacian and its solves ([`linops`]), a splitting time stepper
//! with an exact reaction update plus a Duhamel fixed-point oracle
//! ([`stepper`]), logistic steady states and their cascade ([`steady`]),
//! Lyapunov and floor diagnostics ([`diagnostics`]), and a scenario runner
//! ([`runner`]).

pub mod diagnostics;
pub mod envdsl;
pub mod grid;
pub mod linops;
pub mod runner;
pub mod steady;
pub mod stepper;
