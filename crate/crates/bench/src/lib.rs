//! Fixtures shared by the criterion benches.

use pdcoeff_core::{Complex64, ComplexRootList, PersistenceDiagram};

/// Small deterministic LCG so fixtures do not depend on an RNG crate version.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Self(
            seed.wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407),
        )
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// `n` distinct proper points in the unit square.
pub fn random_diagram(n: usize, seed: u64) -> PersistenceDiagram {
    let mut rng = Lcg::new(seed);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let b = rng.next_f64() * 0.9;
            (b, b + 1e-3 + rng.next_f64() * (1.0 - b))
        })
        .collect();
    PersistenceDiagram::from_pairs(pairs).expect("valid points")
}

/// `n` nonzero roots of modulus below √2.
pub fn random_roots(n: usize, seed: u64) -> ComplexRootList {
    let mut rng = Lcg::new(seed);
    ComplexRootList::from_values(
        (0..n).map(|_| Complex64::new(rng.next_f64() + 0.01, rng.next_f64() + 0.01)),
    )
}
