//! Database-level work: embedding indexes, distance matrices,
//! precision/recall evaluation and two-stage (prefilter, then bottleneck)
//! queries.
//!
//! # Precision/recall protocol
//!
//! Every item is used as a query against all other items (leave-query-out).
//! Candidates are ranked by ascending distance, ties by ascending id. For a
//! query with `R_q` relevant items (same class, query excluded), precision is
//! measured at each relevant hit, interpolated as the maximum precision at
//! any recall `>=` the level, sampled on `{1/R, …, 1}` with `R = max R_q`,
//! and averaged over queries.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::metrics::{bottleneck, coeff_distance, CoeffMetric, MetricKind};
use crate::transforms::Transform;
use crate::viete::{default_k, embed, CoefficientVector};

pub const INDEX_VERSION_LINE: &str = "# pdcoeff-index v1";

fn validate_id(id: &str) -> Result<()> {
    if id.is_empty() || id.trim() != id || id.contains([',', '\n', '\r']) || id.starts_with('#') {
        return Err(Error::InvalidId(id.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub id: String,
    pub label: String,
    pub diagram: PersistenceDiagram,
}

/// Labeled diagrams with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDatabase {
    entries: Vec<Entry>,
}

impl LabeledDatabase {
    pub fn new(entries: Vec<Entry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            validate_id(&e.id)?;
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.entries
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// Largest total multiplicity in the database; the common padding width.
    pub fn max_width(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.diagram.total_multiplicity())
            .max()
            .unwrap_or(0)
    }

    /// Embeds every diagram at the database width. `k` defaults to `⌊√M⌋`.
    pub fn embed(&self, transform: Transform, k: Option<usize>) -> Result<EmbeddingIndex> {
        let width = self.max_width();
        if width == 0 {
            return Err(Error::InvalidArgument(
                "every diagram is empty; nothing to embed".into(),
            ));
        }
        let k = k.unwrap_or_else(|| default_k(width));
        let vectors = self
            .entries
            .par_iter()
            .map(|e| embed(&e.diagram, transform, width, k))
            .collect::<Result<Vec<_>>>()?;
        let entries = self
            .entries
            .iter()
            .map(|e| e.id.clone())
            .zip(vectors)
            .collect();
        EmbeddingIndex::new(transform, width, k, entries)
    }

    pub fn bottleneck_matrix(&self) -> DistanceMatrix {
        DistanceMatrix::from_fn(self.ids(), |i, j| {
            Ok(bottleneck(
                &self.entries[i].diagram,
                &self.entries[j].diagram,
            ))
        })
        .expect("bottleneck is infallible")
    }

    /// Pairwise distances. Coefficient metrics embed on the fly with
    /// `transform` and `k` (default `⌊√M⌋`); both are ignored for the
    /// bottleneck distance.
    pub fn distance_matrix(
        &self,
        metric: MetricKind,
        transform: Transform,
        k: Option<usize>,
    ) -> Result<DistanceMatrix> {
        match metric {
            MetricKind::Bottleneck => Ok(self.bottleneck_matrix()),
            MetricKind::Coeff(m) => self.embed(transform, k)?.distance_matrix(m),
        }
    }
}

/// Coefficient vectors of a whole database, sharing one transform, padding
/// width `M` and `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingIndex {
    transform: Transform,
    width: usize,
    k: usize,
    entries: Vec<(String, CoefficientVector)>,
}

impl EmbeddingIndex {
    pub fn new(
        transform: Transform,
        width: usize,
        k: usize,
        entries: Vec<(String, CoefficientVector)>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for (id, v) in &entries {
            validate_id(id)?;
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
            if v.k() != k || v.width() != width {
                return Err(Error::Index(format!(
                    "entry {id:?} has M = {}, k = {}; index expects M = {width}, k = {k}",
                    v.width(),
                    v.k()
                )));
            }
        }
        Ok(Self {
            transform,
            width,
            k,
            entries,
        })
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[(String, CoefficientVector)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|(id, _)| id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&CoefficientVector> {
        self.entries.iter().find(|(i, _)| i == id).map(|(_, v)| v)
    }

    pub fn distance_matrix(&self, metric: CoeffMetric) -> Result<DistanceMatrix> {
        DistanceMatrix::from_fn(self.ids(), |i, j| {
            coeff_distance(&self.entries[i].1, &self.entries[j].1, metric)
        })
    }

    /// CSV with a version line, a header line and one row per model:
    /// `id,transform,M,k,re_1,im_1,…,re_k,im_k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{INDEX_VERSION_LINE}");
        let _ = write!(out, "id,transform,M,k");
        for j in 1..=self.k {
            let _ = write!(out, ",re{j},im{j}");
        }
        out.push('\n');
        for (id, v) in &self.entries {
            let _ = write!(out, "{id},{},{},{}", self.transform, self.width, self.k);
            for c in v.coefficients() {
                let _ = write!(out, ",{},{}", c.re, c.im);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, l)) if l == INDEX_VERSION_LINE => {}
            Some((_, l)) if l.starts_with("# pdcoeff-index") => {
                return Err(Error::Index(format!("unsupported index version: {l:?}")));
            }
            _ => return Err(Error::Index("missing index version line".into())),
        }
        match lines.next() {
            Some((_, l)) if l.starts_with("id,transform,M,k") => {}
            _ => return Err(Error::Index("missing index header".into())),
        }

        let mut shape: Option<(Transform, usize, usize)> = None;
        let mut entries = Vec::new();
        for (line, l) in lines {
            let bad = |reason: String| Error::Parse { line, reason };
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() < 4 {
                return Err(bad("expected id,transform,M,k,…".into()));
            }
            let transform: Transform = fields[1].parse().map_err(|e: Error| bad(e.to_string()))?;
            let width: usize = fields[2]
                .parse()
                .map_err(|_| bad(format!("bad M {:?}", fields[2])))?;
            let k: usize = fields[3]
                .parse()
                .map_err(|_| bad(format!("bad k {:?}", fields[3])))?;
            match shape {
                None => shape = Some((transform, width, k)),
                Some(s) if s != (transform, width, k) => {
                    return Err(bad(format!(
                        "mixed index rows: ({transform}, M = {width}, k = {k}) after ({}, M = {}, k = {})",
                        s.0, s.1, s.2
                    )));
                }
                Some(_) => {}
            }
            if fields.len() != 4 + 2 * k {
                return Err(bad(format!(
                    "expected {} coefficient fields, got {}",
                    2 * k,
                    fields.len() - 4
                )));
            }
            let nums = fields[4..]
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| bad(format!("bad number {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let coeffs = nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let vector = CoefficientVector::new(coeffs, width).map_err(|e| bad(e.to_string()))?;
            entries.push((fields[0].to_string(), vector));
        }
        let (transform, width, k) = shape.unwrap_or((Transform::R, 0, 0));
        Self::new(transform, width, k, entries)
    }
}

/// Symmetric, zero-diagonal matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Fills the upper triangle `j > i` in parallel and mirrors it.
    pub fn from_fn<F>(ids: Vec<String>, dist: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let n = ids.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let cells = pairs
            .par_iter()
            .map(|&(i, j)| dist(i, j))
            .collect::<Result<Vec<f64>>>()?;
        let mut values = vec![0.0; n * n];
        for (&(i, j), d) in pairs.iter().zip(cells) {
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
        Ok(Self { ids, values })
    }

    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!("matrix must be {n}×{n}")));
        }
        for (i, row) in rows.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 || d != rows[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i}, {j}) is negative, non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(Self {
            ids,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Other items ordered by ascending distance from `query`, ties by id.
    pub fn ranking(&self, query: usize) -> Vec<usize> {
        let row = self.row(query);
        let mut order: Vec<usize> = (0..self.len()).filter(|&j| j != query).collect();
        order.sort_by(|&a, &b| by_distance_then_id(row[a], &self.ids[a], row[b], &self.ids[b]));
        order
    }

    /// Header row of ids, then one row of values per item.
    pub fn to_csv(&self) -> String {
        let mut out = self.ids.join(",");
        out.push('\n');
        for i in 0..self.len() {
            let row: Vec<String> = self.row(i).iter().map(f64::to_string).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let ids: Vec<String> = match lines.next() {
            Some((_, l)) => l.trim().split(',').map(|s| s.trim().to_string()).collect(),
            None => return Self::from_rows(vec![], vec![]),
        };
        let rows = lines
            .map(|(i, l)| {
                l.trim()
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| Error::Parse {
                            line: i + 1,
                            reason: format!("bad number {s:?}"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(ids, rows)
    }
}

fn by_distance_then_id(da: f64, ia: &str, db: f64, ib: &str) -> Ordering {
    da.total_cmp(&db).then_with(|| ia.cmp(ib))
}

/// Mean interpolated precision per recall level.
#[derive(Debug, Clone, PartialEq)]
pub struct PrTable {
    pub rows: Vec<(f64, f64)>,
}

impl PrTable {
    pub fn mean_precision(&self) -> f64 {
        self.rows.iter().map(|r| r.1).sum::<f64>() / self.rows.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("recall,precision\n");
        for (r, p) in &self.rows {
            let _ = writeln!(out, "{r},{p}");
        }
        out
    }
}

/// Precision/recall table of a distance matrix under the leave-query-out
/// interpolated protocol described in the module docs.
pub fn pr_curve(matrix: &DistanceMatrix, labels: &[String]) -> Result<PrTable> {
    let n = matrix.len();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: labels.len(),
        });
    }
    let mut class_sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *class_sizes.entry(l.as_str()).or_default() += 1;
    }
    if class_sizes.len() < 2 {
        return Err(Error::TooFewClasses(class_sizes.len()));
    }
    if let Some((class, _)) = class_sizes.iter().find(|(_, &s)| s < 2) {
        return Err(Error::SingletonClass(class.to_string()));
    }
    let levels = class_sizes.values().max().copied().unwrap_or(0) - 1;

    let per_query: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|q| {
            let relevant = class_sizes[labels[q].as_str()] - 1;
            // Precision at the i-th relevant hit.
            let mut precision = Vec::with_capacity(relevant);
            for (rank, j) in matrix.ranking(q).into_iter().enumerate() {
                if labels[j] == labels[q] {
                    precision.push((precision.len() + 1) as f64 / (rank + 1) as f64);
                }
            }
            // best[i] = max precision over hits i.. (recall >= (i+1)/R_q).
            let mut best = precision;
            for i in (0..best.len().saturating_sub(1)).rev() {
                best[i] = best[i].max(best[i + 1]);
            }
            // Level l/R is reached by the first hit i with i/R_q >= l/R,
            // compared in integers to avoid rounding at the boundary.
            (1..=levels)
                .map(|l| {
                    let i = (1..=relevant)
                        .find(|&i| i * levels >= l * relevant)
                        .unwrap_or(relevant);
                    best[i - 1]
                })
                .collect()
        })
        .collect();

    let rows = (1..=levels)
        .map(|l| {
            let mean = per_query.iter().map(|p| p[l - 1]).sum::<f64>() / n as f64;
            (l as f64 / levels as f64, mean)
        })
        .collect();
    Ok(PrTable { rows })
}

/// Where a ranked item's position was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Rerank,
    Prefilter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedItem {
    pub id: String,
    pub stage: Stage,
    /// Bottleneck distance for reranked items, coefficient distance otherwise.
    pub distance: f64,
}

/// Ranks all other items by coefficient distance, re-ranks the first
/// `candidates` by bottleneck distance, and appends the rest in prefilter
/// order. Ties are broken by id in both stages.
pub fn two_stage_query(
    query: &str,
    db: &LabeledDatabase,
    index: &EmbeddingIndex,
    metric: CoeffMetric,
    candidates: usize,
) -> Result<Vec<RankedItem>> {
    let qi = db.position(query)?;
    let qv = index
        .get(query)
        .ok_or_else(|| Error::MissingEmbedding(query.to_string()))?;
    let n = db.len();
    if candidates == 0 || candidates > n.saturating_sub(1) {
        return Err(Error::InvalidArgument(format!(
            "candidates must be in 1..={}, got {candidates}",
            n.saturating_sub(1)
        )));
    }
    let mut scored = db
        .entries()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != qi)
        .map(|(i, e)| {
            let v = index
                .get(&e.id)
                .ok_or_else(|| Error::MissingEmbedding(e.id.clone()))?;
            Ok((i, coeff_distance(qv, v, metric)?))
        })
        .collect::<Result<Vec<(usize, f64)>>>()?;
    let entries = db.entries();
    scored.sort_by(|a, b| by_distance_then_id(a.1, &entries[a.0].id, b.1, &entries[b.0].id));

    let tail = scored.split_off(candidates);
    let query_diagram = &entries[qi].diagram;
    let mut head: Vec<(usize, f64)> = scored
        .par_iter()
        .map(|&(i, _)| (i, bottleneck(query_diagram, &entries[i].diagram)))
        .collect();
    head.sort_by(|a, b| by_distance_then_id(a.1, &entries[a.0].id, b.1, &entries[b.0].id));

    let item = |stage: Stage| {
        move |(i, distance): (usize, f64)| RankedItem {
            id: entries[i].id.clone(),
            stage,
            distance,
        }
    };
    Ok(head
        .into_iter()
        .map(item(Stage::Rerank))
        .chain(tail.into_iter().map(item(Stage::Prefilter)))
        .collect())
}

/// Bottleneck ranking of all other items, ties by id.
pub fn bottleneck_ranking(query: &str, db: &LabeledDatabase) -> Result<Vec<(String, f64)>> {
    let qi = db.position(query)?;
    let entries = db.entries();
    let mut scored: Vec<(usize, f64)> = (0..db.len())
        .into_par_iter()
        .filter(|&i| i != qi)
        .map(|i| (i, bottleneck(&entries[qi].diagram, &entries[i].diagram)))
        .collect();
    scored.sort_by(|a, b| by_distance_then_id(a.1, &entries[a.0].id, b.1, &entries[b.0].id));
    Ok(scored
        .into_iter()
        .map(|(i, d)| (entries[i].id.clone(), d))
        .collect())
}

pub fn parse_labels(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line == "id,class") {
            continue;
        }
        let (id, class) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: i + 1,
            reason: "expected id,class".into(),
        })?;
        let (id, class) = (id.trim(), class.trim());
        validate_id(id)?;
        if class.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                reason: "empty class".into(),
            });
        }
        if map.insert(id.to_string(), class.to_string()).is_some() {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(map)
}

pub fn labels_to_csv<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(labels: I) -> String {
    let mut out = String::from("id,class\n");
    for (id, class) in labels {
        let _ = writeln!(out, "{id},{class}");
    }
    out
}

/// Synthetic labeled database: one random base diagram per class, then per
/// element every base point is jittered by uniform noise in `[−δ, δ]²` and
/// `noise_points` extra points are scattered in a band of width `band`
/// above the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    pub base_points: usize,
    pub jitter: f64,
    pub noise_points: usize,
    pub band: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: 3,
            per_class: 5,
            base_points: 6,
            jitter: 0.02,
            noise_points: 4,
            band: 0.05,
            seed: 0,
        }
    }
}

/// Smallest lifespan kept when clamping jittered points above the diagonal.
const MIN_LIFESPAN: f64 = 1e-6;

impl SynthConfig {
    pub fn generate(&self) -> Result<LabeledDatabase> {
        if self.classes == 0 || self.per_class == 0 {
            return Err(Error::InvalidArgument(
                "classes and per-class must be positive".into(),
            ));
        }
        if !(self.jitter >= 0.0 && self.band > 0.0) {
            return Err(Error::InvalidArgument(
                "jitter must be >= 0 and band > 0".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let width = (self.classes * self.per_class).to_string().len();
        let mut entries = Vec::with_capacity(self.classes * self.per_class);
        for c in 0..self.classes {
            let base: Vec<(f64, f64)> = (0..self.base_points)
                .map(|_| {
                    let b = rng.gen_range(0.0..0.7);
                    let d = rng.gen_range(b + 0.1..=1.0);
                    (b, d)
                })
                .collect();
            for e in 0..self.per_class {
                let mut points: Vec<(f64, f64)> = base
                    .iter()
                    .map(|&(b, d)| {
                        let b = b + rng.gen_range(-1.0..=1.0) * self.jitter;
                        let d = d + rng.gen_range(-1.0..=1.0) * self.jitter;
                        (b, d.max(b + MIN_LIFESPAN))
                    })
                    .collect();
                for _ in 0..self.noise_points {
                    let b = rng.gen_range(0.0..1.0);
                    let l = rng.gen_range(MIN_LIFESPAN..self.band);
                    points.push((b, b + l));
                }
                let index = c * self.per_class + e;
                entries.push(Entry {
                    id: format!("m{index:0width$}"),
                    label: format!("c{c}"),
                    diagram: PersistenceDiagram::from_pairs(points)?,
                });
            }
        }
        LabeledDatabase::new(entries)
    }
}
