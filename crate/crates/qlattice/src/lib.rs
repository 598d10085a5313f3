//! Numerical q-classical orthogonal polynomials on q-quadratic lattices.
//!
//! The crate evaluates the Askey-Wilson, q-Racah, q-Meixner, and
//! Al-Salam & Carlitz I/II families together with the difference-calculus
//! machinery around them (divided differences, forward means, Pearson
//! weights, Rodrigues-type operators), and machine-verifies the identities
//! tying those pieces together: Pearson equations, second-order difference
//! equations, three-term recurrences, structure relations, and discrete and
//! continuous orthogonality, each as a falsifiable residual check at desk
//! scale.

pub mod error;
pub mod families;
pub mod interp;
pub mod lattice;
pub mod linalg;
pub mod poch;
pub mod report;
pub mod rodrigues;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use families::{
    al_salam_carlitz_1, al_salam_carlitz_2, askey_wilson, q_meixner, q_racah, CoeffTriple,
    FamilyName, FamilySpec, Support,
};
pub use lattice::{
    alpha_q, delta_chain, delta_div, mean_op, nabla_chain, nabla_div, q_number, rel_residual,
    GridWindow, Lattice, QParam,
};
pub use poch::{q_pochhammer, q_pochhammer_complex, q_pochhammer_infinite, q_pochhammer_multi};
pub use report::{CheckReport, CxPair};
pub use series::{eval_terminating, eval_truncated, SeriesSpec};
