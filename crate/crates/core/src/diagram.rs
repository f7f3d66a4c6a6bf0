//! Ordinary persistence diagrams: multisets of proper points `(birth, death)`
//! with `birth < death`. Points at infinity are not stored; only their count
//! is kept in [`PersistenceDiagram::essential_count`].
//!
//! The text format is a headerless CSV of `birth,death[,multiplicity]` rows.
//! Lines starting with `#` are comments, except the directive
//! `# essential_count: N` which restores the essential count. Rows whose
//! death is `inf` are counted as essential and otherwise dropped.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};

const ESSENTIAL_DIRECTIVE: &str = "essential_count:";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub birth: f64,
    pub death: f64,
    pub multiplicity: u32,
}

impl PersistencePoint {
    pub fn new(birth: f64, death: f64, multiplicity: u32) -> Result<Self> {
        validate_proper(birth, death)?;
        if multiplicity == 0 {
            return Err(Error::InvalidPoint {
                birth,
                death,
                reason: "multiplicity must be at least 1",
            });
        }
        Ok(Self {
            birth,
            death,
            multiplicity,
        })
    }

    /// Lifespan `death - birth`.
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

fn validate_proper(birth: f64, death: f64) -> Result<()> {
    if !birth.is_finite() {
        return Err(Error::NonFinite(birth));
    }
    if !death.is_finite() {
        return Err(Error::NonFinite(death));
    }
    if birth >= death {
        return Err(Error::InvalidPoint {
            birth,
            death,
            reason: "birth must be strictly smaller than death",
        });
    }
    Ok(())
}

fn cmp_coords(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
}

/// A validated diagram. Points are kept sorted by `(birth, death)` and
/// coincident points are merged, so two diagrams holding the same multiset
/// compare equal regardless of construction order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    points: Vec<PersistencePoint>,
    essential_count: usize,
}

impl PersistenceDiagram {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a diagram from `(birth, death, multiplicity)` triples, merging
    /// triples with equal coordinates.
    pub fn from_triples<I>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64, u32)>,
    {
        let points = triples
            .into_iter()
            .map(|(b, d, m)| PersistencePoint::new(b, d, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_points(points))
    }

    /// Builds a diagram of unit-multiplicity points.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        Self::from_triples(pairs.into_iter().map(|(b, d)| (b, d, 1)))
    }

    pub(crate) fn from_points(mut points: Vec<PersistencePoint>) -> Self {
        points.sort_by(|a, b| cmp_coords((a.birth, a.death), (b.birth, b.death)));
        let mut merged: Vec<PersistencePoint> = Vec::with_capacity(points.len());
        for p in points {
            match merged.last_mut() {
                Some(last) if last.birth == p.birth && last.death == p.death => {
                    last.multiplicity += p.multiplicity;
                }
                _ => merged.push(p),
            }
        }
        Self {
            points: merged,
            essential_count: 0,
        }
    }

    pub fn with_essential_count(mut self, count: usize) -> Self {
        self.essential_count = count;
        self
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    pub fn essential_count(&self) -> usize {
        self.essential_count
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of proper points counted with multiplicity.
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity as usize).sum()
    }

    /// Proper points expanded to unit copies, in storage order.
    pub fn expanded(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n((p.birth, p.death), p.multiplicity as usize))
    }

    /// Multiset union; essential counts add up.
    pub fn union(&self, other: &Self) -> Self {
        let points = self.points.iter().chain(&other.points).copied().collect();
        Self::from_points(points).with_essential_count(self.essential_count + other.essential_count)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut essential = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(count) = comment.trim().strip_prefix(ESSENTIAL_DIRECTIVE) {
                    essential += count.trim().parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        reason: format!("bad essential count {:?}", count.trim()),
                    })?;
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected 2 or 3 fields, got {}", fields.len()),
                });
            }
            let parse_f = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    reason: format!("not a number: {s:?}"),
                })
            };
            let birth = parse_f(fields[0])?;
            let death = parse_f(fields[1])?;
            let multiplicity = match fields.get(2) {
                Some(s) => s.parse::<u32>().map_err(|_| Error::Parse {
                    line: line_no,
                    reason: format!("bad multiplicity {s:?}"),
                })?,
                None => 1,
            };
            let located = |e: Error| Error::Parse {
                line: line_no,
                reason: e.to_string(),
            };
            if multiplicity == 0 {
                return Err(located(Error::InvalidPoint {
                    birth,
                    death,
                    reason: "multiplicity must be at least 1",
                }));
            }
            if death == f64::INFINITY && birth.is_finite() {
                essential += multiplicity as usize;
                continue;
            }
            points.push(PersistencePoint::new(birth, death, multiplicity).map_err(located)?);
        }
        Ok(Self::from_points(points).with_essential_count(essential))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::from("# birth,death,multiplicity\n");
        if self.essential_count > 0 {
            let _ = writeln!(out, "# {ESSENTIAL_DIRECTIVE} {}", self.essential_count);
        }
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.birth, p.death, p.multiplicity);
        }
        out
    }
}

impl std::str::FromStr for PersistenceDiagram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
