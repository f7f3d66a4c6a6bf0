//! Zero padding and elementary symmetric values of root lists.
//!
//! For roots `z_1 … z_M` the monic polynomial is
//! `Π (t − z_i) = t^M − c_1 t^{M−1} + c_2 t^{M−2} − …`, and `c_j` is the
//! sum of all products of `j` distinct roots. Only the `c_j` are stored, so
//! signs never appear.

use num_complex::Complex64;

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::transforms::{transform_diagram, ComplexRoot, ComplexRootList, Transform};

/// `c_1 … c_k` of a root list padded to `width`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    coefficients: Vec<Complex64>,
    width: usize,
}

impl CoefficientVector {
    pub fn new(coefficients: Vec<Complex64>, width: usize) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() > width {
            return Err(Error::KOutOfRange {
                k: coefficients.len(),
                width,
            });
        }
        Ok(Self {
            coefficients,
            width,
        })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn k(&self) -> usize {
        self.coefficients.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Keeps the first `k` coefficients.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::KOutOfRange { k, width: self.k() });
        }
        Ok(Self {
            coefficients: self.coefficients[..k].to_vec(),
            width: self.width,
        })
    }
}

/// `⌊√M⌋`, at least 1.
pub fn default_k(width: usize) -> usize {
    width.isqrt().max(1)
}

/// Appends the root 0 with multiplicity `target − width`.
pub fn pad_roots(roots: &ComplexRootList, target: usize) -> Result<ComplexRootList> {
    let width = roots.width();
    if target < width {
        return Err(Error::PaddingTooSmall { width, target });
    }
    if target == width {
        return Ok(roots.clone());
    }
    let extra = u32::try_from(target - width)
        .map_err(|_| Error::InvalidArgument(format!("padding width {target} too large")))?;
    let mut all = roots.roots().to_vec();
    all.push(ComplexRoot {
        value: Complex64::new(0.0, 0.0),
        multiplicity: extra,
    });
    Ok(ComplexRootList::new(all))
}

/// First `k` elementary symmetric values, one root (copy) at a time:
/// `c_j ← c_j + z · c_{j−1}` for `j` descending. Zero roots leave every
/// `c_j` unchanged and are skipped. Cost is `O(k · M)`.
pub fn elementary_symmetric(roots: &ComplexRootList, k: usize) -> Result<CoefficientVector> {
    let width = roots.width();
    if k == 0 || k > width {
        return Err(Error::KOutOfRange { k, width });
    }
    // acc[j] holds c_j; acc[0] = 1.
    let mut acc = vec![Complex64::new(0.0, 0.0); k + 1];
    acc[0] = Complex64::new(1.0, 0.0);
    let mut seen = 0usize;
    for root in roots.roots() {
        let z = root.value;
        if z.re == 0.0 && z.im == 0.0 {
            seen += root.multiplicity as usize;
            continue;
        }
        for _ in 0..root.multiplicity {
            seen += 1;
            for j in (1..=k.min(seen)).rev() {
                let prev = acc[j - 1];
                acc[j] += z * prev;
            }
        }
    }
    acc.remove(0);
    if let Some(bad) = acc.iter().position(|c| !c.is_finite()) {
        return Err(Error::CoefficientOverflow { index: bad + 1 });
    }
    CoefficientVector::new(acc, width)
}

/// Transform, pad to `width` and extract `c_1 … c_k`.
pub fn embed(
    d: &PersistenceDiagram,
    kind: Transform,
    width: usize,
    k: usize,
) -> Result<CoefficientVector> {
    let roots = transform_diagram(d, kind)?;
    let padded = pad_roots(&roots, width)?;
    elementary_symmetric(&padded, k)
}
