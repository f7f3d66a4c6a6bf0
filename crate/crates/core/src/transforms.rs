//! Maps from the closed half-plane `u <= v` to the complex plane.
//!
//! With `α = √(u² + v²)`:
//!
//! * `R(u, v) = u + iv`
//! * `S(u, v) = (v − u) / (α√2) · (u + iv)`, and `S(0, 0) = 0`
//! * `T(u, v) = (v − u) / 2 · (cos α − sin α + i(cos α + sin α))`
//!
//! `S` and `T` send the whole diagonal to the origin, and both have modulus
//! `(v − u) / √2`, so short-lived points land close to zero.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    R,
    S,
    T,
}

impl Transform {
    pub const ALL: [Transform; 3] = [Transform::R, Transform::S, Transform::T];

    pub fn apply(self, u: f64, v: f64) -> Result<Complex64> {
        if !u.is_finite() {
            return Err(Error::NonFinite(u));
        }
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
        Ok(match self {
            Transform::R => Complex64::new(u, v),
            Transform::S => {
                if u == 0.0 && v == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let alpha = (u * u + v * v).sqrt();
                    let scale = (v - u) / (alpha * SQRT_2);
                    Complex64::new(scale * u, scale * v)
                }
            }
            Transform::T => {
                let alpha = (u * u + v * v).sqrt();
                let half = (v - u) / 2.0;
                let (sin, cos) = alpha.sin_cos();
                Complex64::new(half * (cos - sin), half * (cos + sin))
            }
        })
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::R => "R",
            Transform::S => "S",
            Transform::T => "T",
        })
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" => Ok(Transform::R),
            "S" | "s" => Ok(Transform::S),
            "T" | "t" => Ok(Transform::T),
            other => Err(Error::InvalidArgument(format!(
                "unknown transform {other:?}, expected R, S or T"
            ))),
        }
    }
}

pub fn transform_r(u: f64, v: f64) -> Result<Complex64> {
    Transform::R.apply(u, v)
}

pub fn transform_s(u: f64, v: f64) -> Result<Complex64> {
    Transform::S.apply(u, v)
}

pub fn transform_t(u: f64, v: f64) -> Result<Complex64> {
    Transform::T.apply(u, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRoot {
    pub value: Complex64,
    pub multiplicity: u32,
}

/// Roots with multiplicities. `width` is the total multiplicity, padding
/// zeros included.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexRootList {
    roots: Vec<ComplexRoot>,
    width: usize,
}

fn is_zero(z: Complex64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

impl ComplexRootList {
    /// Merges exactly coincident values (summing multiplicities) and orders
    /// roots by real then imaginary part. Zero-multiplicity entries are
    /// dropped.
    pub fn new(roots: Vec<ComplexRoot>) -> Self {
        let mut roots: Vec<ComplexRoot> =
            roots.into_iter().filter(|r| r.multiplicity > 0).collect();
        roots.sort_by(|a, b| {
            a.value
                .re
                .total_cmp(&b.value.re)
                .then(a.value.im.total_cmp(&b.value.im))
        });
        let mut merged: Vec<ComplexRoot> = Vec::with_capacity(roots.len());
        for r in roots {
            match merged.last_mut() {
                Some(last) if last.value == r.value => last.multiplicity += r.multiplicity,
                // -0.0 and +0.0 sort apart under total_cmp; fold them together.
                _ if is_zero(r.value) => match merged.iter_mut().find(|m| is_zero(m.value)) {
                    Some(zero) => zero.multiplicity += r.multiplicity,
                    None => merged.push(r),
                },
                _ => merged.push(r),
            }
        }
        let width = merged.iter().map(|r| r.multiplicity as usize).sum();
        Self {
            roots: merged,
            width,
        }
    }

    /// Unit-multiplicity roots.
    pub fn from_values<I: IntoIterator<Item = Complex64>>(values: I) -> Self {
        Self::new(
            values
                .into_iter()
                .map(|value| ComplexRoot {
                    value,
                    multiplicity: 1,
                })
                .collect(),
        )
    }

    pub fn roots(&self) -> &[ComplexRoot] {
        &self.roots
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0
    }

    /// Each root repeated by its multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity as usize))
    }
}

/// Image of the diagram's proper points; the width equals the diagram's
/// total multiplicity.
pub fn transform_diagram(d: &PersistenceDiagram, kind: Transform) -> Result<ComplexRootList> {
    let roots = d
        .points()
        .iter()
        .map(|p| {
            Ok(ComplexRoot {
                value: kind.apply(p.birth, p.death)?,
                multiplicity: p.multiplicity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexRootList::new(roots))
}
