//! Exact combinatorics and bookkeeping for building compact Spin(7)
//! manifolds out of Calabi-Yau 4-orbifolds in weighted projective space.
//!
//! The modules run bottom up: [`wps`] knows the ambient spaces, [`variety`]
//! the Fermat towers inside them, [`euler`] their Euler characteristics,
//! [`involution`] the antiholomorphic maps, [`ledger`] the Betti numbers
//! through every surgery, and [`shell`] parses and runs scenario files.
//! [`cayley`] is the flat exterior algebra on R^8 used for the group checks.

pub mod cayley;
pub mod coeff;
pub mod euler;
pub mod involution;
pub mod ledger;
pub mod shell;
pub mod variety;
pub mod wps;
