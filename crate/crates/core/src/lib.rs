//! Heights, twisted adelic heights, Euclidean lattice theta and zeta functions,
//! Arakelov L-series, Hirzebruch surface fibrations and Tamagawa numbers over Q.

pub mod arakelov;
pub mod counts;
pub mod error;
pub mod fibration;
pub mod heights;
pub mod lattice;
pub mod linalg;
pub mod magnitude;
pub mod places;
pub mod quad;
pub mod selftest;
pub mod special;
pub mod sum;
pub mod tamagawa;
pub mod twist;

pub use counts::{AsymptoticFit, CountTable, FitModel};
pub use error::{Error, Result};
pub use fibration::{FibrationLineClass, FnPoint};
pub use heights::{ArchKind, MetrizedLineBundle, ProjPoint, Section};
pub use lattice::{HermitianLattice, SeriesValue};
pub use linalg::RatMatrix;
pub use magnitude::Magnitude;
pub use num_complex::Complex64;
pub use places::{abs_v, euler_phi, parse_rat, product_formula_check, Place, Prime, Rat};
pub use tamagawa::{TamagawaReport, TamagawaSpec, Variety};
pub use twist::AdelicGroupElement;
