//! Shared fixtures for the benchmarks.

use heightzeta_core::{HermitianLattice, Rat, RatMatrix};

/// A fixed rank-`d` lattice with Gram `I + ½(J − I)`: positive definite
/// and not diagonal.
pub fn skewed_lattice(d: usize) -> HermitianLattice {
    let rows = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        Rat::from_integer(1.into())
                    } else {
                        Rat::new(1.into(), 2.into())
                    }
                })
                .collect()
        })
        .collect();
    HermitianLattice::from_rational(RatMatrix::from_rows(rows).expect("square")).expect("positive definite")
}
