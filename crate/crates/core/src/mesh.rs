//! Triangle meshes, the line/plane filtering functions and 0th persistence of
//! the lower-star filtration.
//!
//! A mesh is summarized by its center of mass `B` (vertex mean) and the axis
//!
//! ```text
//! w = Σ (v_i − B) ‖v_i − B‖ / Σ ‖v_i − B‖²
//! ```
//!
//! The two filtering functions measure the distance of each vertex from the
//! line through `B` along `w` ([`FilterKind::Line`]) or from the plane
//! through `B` orthogonal to `w` ([`FilterKind::Plane`]); both are min-max
//! rescaled to `[0, 1]` per model.
//!
//! Degree-0 persistence only depends on the 1-skeleton, so the persistence
//! routines take a [`Skeleton`] (vertex count plus edge list). Meshes convert
//! with [`TriangleMesh::skeleton`].

use std::collections::{BTreeSet, VecDeque};
use std::str::FromStr;

use crate::diagram::{PersistenceDiagram, PersistencePoint};
use crate::error::{Error, Result};
use crate::union_find::DisjointSet;

pub type Point3 = [f64; 3];

/// Tolerance below which the raw axis `w` is treated as zero.
pub const AXIS_TOLERANCE: f64 = 1e-9;

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidMesh("mesh has no vertices".into()));
        }
        if let Some(c) = vertices.iter().flatten().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(*c));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&i) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {i}, only {} vertices",
                    vertices.len()
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} is degenerate: {tri:?}"
                )));
            }
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Parses an ASCII OFF file. Faces must be triangles; trailing per-face
    /// color fields are ignored.
    pub fn parse_off(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let truncated = || Error::InvalidMesh("truncated OFF file".into());
        let (header_line, header) = lines.next().ok_or_else(truncated)?;
        let mut header_tokens = header.split_whitespace();
        if header_tokens.next() != Some("OFF") {
            return Err(Error::Parse {
                line: header_line,
                reason: "missing OFF header".into(),
            });
        }
        // Counts may share the header line ("OFF 8 12 0").
        let rest: Vec<&str> = header_tokens.collect();
        let (counts_line, counts): (usize, Vec<&str>) = if rest.is_empty() {
            let (n, l) = lines.next().ok_or_else(truncated)?;
            (n, l.split_whitespace().collect())
        } else {
            (header_line, rest)
        };
        if counts.len() < 2 {
            return Err(Error::Parse {
                line: counts_line,
                reason: "expected vertex and face counts".into(),
            });
        }
        let parse_count = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: counts_line,
                reason: format!("bad count {s:?}"),
            })
        };
        let n_vertices = parse_count(counts[0])?;
        let n_faces = parse_count(counts[1])?;

        let mut vertices = Vec::with_capacity(n_vertices);
        for _ in 0..n_vertices {
            let (line, l) = lines.next().ok_or_else(truncated)?;
            let coords = l
                .split_whitespace()
                .take(3)
                .map(|s| {
                    s.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        reason: format!("bad coordinate {s:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if coords.len() != 3 {
                return Err(Error::Parse {
                    line,
                    reason: "vertex needs three coordinates".into(),
                });
            }
            vertices.push([coords[0], coords[1], coords[2]]);
        }

        let mut triangles = Vec::with_capacity(n_faces);
        for _ in 0..n_faces {
            let (line, l) = lines.next().ok_or_else(truncated)?;
            let tokens: Vec<&str> = l.split_whitespace().collect();
            let bad = |reason: String| Error::Parse { line, reason };
            let arity = tokens
                .first()
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| bad("bad face line".into()))?;
            if arity != 3 {
                return Err(bad(format!(
                    "face with {arity} vertices; only triangles are supported"
                )));
            }
            if tokens.len() < 4 {
                return Err(bad("face line is missing indices".into()));
            }
            let mut tri = [0usize; 3];
            for (slot, s) in tri.iter_mut().zip(&tokens[1..4]) {
                *slot = s.parse().map_err(|_| bad(format!("bad index {s:?}")))?;
            }
            triangles.push(tri);
        }
        Self::new(vertices, triangles)
    }

    /// Unweighted mean of the vertex positions.
    pub fn center_of_mass(&self) -> Point3 {
        let n = self.vertices.len() as f64;
        let mut acc = [0.0; 3];
        for v in &self.vertices {
            for (a, c) in acc.iter_mut().zip(v) {
                *a += c;
            }
        }
        acc.map(|a| a / n)
    }

    /// Raw axis `w` about `center` together with its unit-length version.
    pub fn axis_vector(&self, center: Point3) -> Result<(Point3, Point3)> {
        let mut numerator = [0.0; 3];
        let mut denominator = 0.0;
        for v in &self.vertices {
            let d = sub(*v, center);
            let r = norm(d);
            for (n, c) in numerator.iter_mut().zip(d) {
                *n += c * r;
            }
            denominator += r * r;
        }
        if denominator == 0.0 {
            return Err(Error::ZeroSpread);
        }
        let w = numerator.map(|n| n / denominator);
        let len = norm(w);
        if len < AXIS_TOLERANCE {
            return Err(Error::DegenerateAxis {
                norm: len,
                tolerance: AXIS_TOLERANCE,
            });
        }
        Ok((w, w.map(|c| c / len)))
    }

    /// Translates `center` to the origin and scales so the farthest vertex
    /// lies on the unit sphere.
    pub fn normalized(&self, center: Point3) -> Result<Self> {
        let radius = self
            .vertices
            .iter()
            .map(|v| norm(sub(*v, center)))
            .fold(0.0, f64::max);
        if radius == 0.0 {
            return Err(Error::ZeroSpread);
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| sub(*v, center).map(|c| c / radius))
            .collect();
        Ok(Self {
            vertices,
            triangles: self.triangles.clone(),
        })
    }

    /// Distinct undirected edges of the triangles.
    pub fn skeleton(&self) -> Skeleton {
        let mut edges = BTreeSet::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        Skeleton {
            vertex_count: self.vertices.len(),
            edges: edges.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }

    /// Raw (unnormalized) distances of each vertex from the line through
    /// `frame.center` along `frame.axis`.
    pub fn line_distances(&self, frame: &MeshFrame) -> Vec<f64> {
        self.vertices
            .iter()
            .map(|v| norm(cross(sub(*v, frame.center), frame.axis)))
            .collect()
    }

    /// Raw distances of each vertex from the plane through `frame.center`
    /// orthogonal to `frame.axis`.
    pub fn plane_distances(&self, frame: &MeshFrame) -> Vec<f64> {
        self.vertices
            .iter()
            .map(|v| dot(sub(*v, frame.center), frame.axis).abs())
            .collect()
    }

    pub fn filter(&self, frame: &MeshFrame, kind: FilterKind) -> VertexFunction {
        let raw = match kind {
            FilterKind::Line => self.line_distances(frame),
            FilterKind::Plane => self.plane_distances(frame),
        };
        VertexFunction::min_max_normalized(raw)
    }

    /// Full pipeline: center, normalize to the unit sphere, compute the axis,
    /// filter, and extract the 0th persistence diagram.
    pub fn persistence_diagram(&self, kind: FilterKind) -> Result<PersistenceDiagram> {
        let normalized = self.normalized(self.center_of_mass())?;
        let frame = MeshFrame::from_mesh(&normalized)?;
        let f = normalized.filter(&frame, kind);
        zero_persistence(&normalized.skeleton(), &f)
    }
}

impl FromStr for TriangleMesh {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_off(s)
    }
}

/// Center and unit axis used by the filtering functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshFrame {
    pub center: Point3,
    pub axis: Point3,
}

impl MeshFrame {
    pub fn new(center: Point3, axis: Point3) -> Result<Self> {
        let len = norm(axis);
        if !len.is_finite() || len < AXIS_TOLERANCE {
            return Err(Error::DegenerateAxis {
                norm: len,
                tolerance: AXIS_TOLERANCE,
            });
        }
        Ok(Self {
            center,
            axis: axis.map(|c| c / len),
        })
    }

    pub fn from_mesh(mesh: &TriangleMesh) -> Result<Self> {
        let center = mesh.center_of_mass();
        let (_, axis) = mesh.axis_vector(center)?;
        Ok(Self { center, axis })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Line,
    Plane,
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Self::Line),
            "plane" => Ok(Self::Plane),
            other => Err(Error::InvalidArgument(format!(
                "unknown filter {other:?}, expected line or plane"
            ))),
        }
    }
}

/// One finite value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        Ok(Self { values })
    }

    /// Rescales to `[0, 1]`. A constant input has no meaningful rescaling
    /// and becomes all zeros.
    pub fn min_max_normalized(raw: Vec<f64>) -> Self {
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let values = if raw.is_empty() || span <= 0.0 || !span.is_finite() {
            if !raw.is_empty() {
                log::warn!("constant filtering function; using all zeros");
            }
            vec![0.0; raw.len()]
        } else {
            raw.iter()
                .map(|v| ((v - lo) / span).clamp(0.0, 1.0))
                .collect()
        };
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted distinct values.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// A quarter of the smallest gap between distinct values, or `None` when
    /// the function takes a single value.
    pub fn default_eps(&self) -> Option<f64> {
        self.distinct_values()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(None, |acc: Option<f64>, g| {
                Some(acc.map_or(g, |a| a.min(g)))
            })
            .map(|g| g / 4.0)
    }
}

/// Vertex count and undirected edges; all that degree-0 persistence needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    vertex_count: usize,
    edges: Vec<[usize; 2]>,
}

impl Skeleton {
    pub fn new(vertex_count: usize, edges: Vec<[usize; 2]>) -> Result<Self> {
        for e in &edges {
            if e[0] >= vertex_count || e[1] >= vertex_count || e[0] == e[1] {
                return Err(Error::InvalidMesh(format!("bad edge {e:?}")));
            }
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    /// `0 – 1 – … – (n−1)`.
    pub fn path(n: usize) -> Self {
        Self {
            vertex_count: n,
            edges: (1..n).map(|i| [i - 1, i]).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &[a, b] in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    fn check(&self, f: &VertexFunction) -> Result<()> {
        if f.len() != self.vertex_count {
            return Err(Error::FunctionLength {
                values: f.len(),
                vertices: self.vertex_count,
            });
        }
        Ok(())
    }
}

/// Raw output of the union-find sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerStarPairs {
    /// Number of vertices that started a new component (no earlier neighbor).
    pub births: usize,
    /// `(birth, death)` of every merge, including zero-length ones.
    pub pairs: Vec<(f64, f64)>,
    /// Birth values of the components that never die.
    pub essential: Vec<f64>,
}

/// Sweeps vertices in `(value, index)` order, merging neighboring
/// components with the elder rule. On equal birth values the component whose
/// minimum vertex has the smaller index survives.
pub fn lower_star_pairs(skeleton: &Skeleton, f: &VertexFunction) -> Result<LowerStarPairs> {
    skeleton.check(f)?;
    let n = skeleton.vertex_count;
    let values = f.values();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut rank = vec![0usize; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }

    let adj = skeleton.adjacency();
    let mut sets = DisjointSet::new(n);
    // Rank of the oldest vertex of each root's component.
    let mut oldest = rank.clone();
    let mut births = 0;
    let mut pairs = Vec::new();

    for &v in &order {
        let mut roots: Vec<usize> = adj[v]
            .iter()
            .filter(|&&u| rank[u] < rank[v])
            .map(|&u| sets.find(u))
            .collect();
        roots.sort_by_key(|&r| oldest[r]);
        roots.dedup();
        let Some((&elder, younger)) = roots.split_first() else {
            births += 1;
            continue;
        };
        let mut root = sets.union(elder, v).expect("v is not yet attached");
        oldest[root] = oldest[elder];
        for &y in younger {
            let birth_rank = oldest[sets.find(y)];
            let survivor = oldest[root];
            root = sets.union(root, y).expect("roots are distinct");
            oldest[root] = survivor;
            pairs.push((values[order[birth_rank]], values[v]));
        }
    }

    let mut essential: Vec<usize> = (0..n)
        .filter(|&v| sets.find(v) == v)
        .map(|r| oldest[r])
        .collect();
    essential.sort_unstable();
    Ok(LowerStarPairs {
        births,
        pairs,
        essential: essential.into_iter().map(|r| values[order[r]]).collect(),
    })
}

/// Ordinary 0th persistence diagram of the lower-star filtration. Zero-length
/// pairs are discarded; never-dying components go to the essential count.
pub fn zero_persistence(skeleton: &Skeleton, f: &VertexFunction) -> Result<PersistenceDiagram> {
    let sweep = lower_star_pairs(skeleton, f)?;
    let points = sweep
        .pairs
        .iter()
        .filter(|(b, d)| b < d)
        .map(|&(birth, death)| PersistencePoint {
            birth,
            death,
            multiplicity: 1,
        })
        .collect();
    Ok(PersistenceDiagram::from_points(points).with_essential_count(sweep.essential.len()))
}

/// Component labels of the subgraph induced by vertices with value `<= level`
/// (`None` for vertices above the level). Breadth-first search, independent
/// of the union-find sweep.
fn sublevel_components(adj: &[Vec<usize>], values: &[f64], level: f64) -> Vec<Option<usize>> {
    let mut label = vec![None; values.len()];
    let mut next = 0;
    for start in 0..values.len() {
        if values[start] > level || label[start].is_some() {
            continue;
        }
        label[start] = Some(next);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if values[y] <= level && label[y].is_none() {
                    label[y] = Some(next);
                    queue.push_back(y);
                }
            }
        }
        next += 1;
    }
    label
}

/// Rank of `H_0(X_u) → H_0(X_v)`: components of the sublevel set at `u`
/// that stay distinct in the sublevel set at `v`.
pub fn beta0(skeleton: &Skeleton, f: &VertexFunction, u: f64, v: f64) -> Result<usize> {
    skeleton.check(f)?;
    if u > v {
        return Err(Error::LevelOrder { u, v });
    }
    let adj = skeleton.adjacency();
    let values = f.values();
    let at_v = sublevel_components(&adj, values, v);
    let images: BTreeSet<usize> = values
        .iter()
        .zip(&at_v)
        .filter(|(&x, _)| x <= u)
        .filter_map(|(_, l)| *l)
        .collect();
    Ok(images.len())
}

/// Multiplicity of `(u, v)` from the four-term alternating sum of `beta0`
/// ranks at `u ± eps`, `v ± eps`.
pub fn multiplicity0(
    skeleton: &Skeleton,
    f: &VertexFunction,
    u: f64,
    v: f64,
    eps: f64,
) -> Result<i64> {
    if u.is_nan() || v.is_nan() || u >= v {
        return Err(Error::InvalidPoint {
            birth: u,
            death: v,
            reason: "multiplicity is defined above the diagonal only",
        });
    }
    if eps.is_nan() || eps <= 0.0 || 2.0 * eps >= v - u {
        return Err(Error::EpsilonTooLarge { u, v, eps });
    }
    let isolates = |level: f64| {
        f.values()
            .iter()
            .all(|&x| x == level || (x - level).abs() > eps)
    };
    if !isolates(u) || !isolates(v) {
        return Err(Error::EpsilonTooLarge { u, v, eps });
    }
    let b = |a: f64, c: f64| beta0(skeleton, f, a, c).map(|r| r as i64);
    Ok(b(u + eps, v - eps)? - b(u - eps, v - eps)? - b(u + eps, v + eps)? + b(u - eps, v + eps)?)
}
