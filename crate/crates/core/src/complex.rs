//! Cell complex recovery: 0-plates, 1-plates and the per-plate neighbour
//! relation, for face-to-face (PLT) and non face-to-face (STIT) inputs alike.
//!
//! Vertices are the deduplicated corners of all cells. A corner of one cell
//! lying inside a side of another (a T-junction) subdivides that side, so
//! each cell boundary becomes a cycle of vertex ids and a 1-plate is an
//! unordered pair of consecutive ids. Matching plates by id pairs needs no
//! angle comparisons at all.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point2, RectWindow, Segment, EPS_POINT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Two corners closer than this are the same vertex; a vertex this close
    /// to a side lies on it.
    pub eps_point: f64,
    /// Perpendicular offset below which two incident edges count as collinear.
    pub eps_collinear: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_point: EPS_POINT,
            eps_collinear: 1e-8,
        }
    }
}

/// A 1-plate with its end vertex ids and incident cells (one or two).
#[derive(Debug, Clone, PartialEq)]
pub struct Plate {
    pub segment: Segment,
    pub ends: (usize, usize),
    pub cells: Vec<usize>,
}

impl Plate {
    #[inline]
    pub fn is_interior(&self) -> bool {
        self.cells.len() == 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellTopology {
    pub id: usize,
    /// Polygon corners.
    pub corners: usize,
    /// Vertices on the boundary, corners and hanging vertices alike.
    pub n0: usize,
    /// 1-plates on the boundary.
    pub n1: usize,
    /// One per shared interior 1-plate.
    pub neighbor_plate_count: usize,
    pub neighbor_distinct_count: usize,
    pub touches_boundary: bool,
}

#[derive(Debug, Clone)]
pub struct TessellationComplex {
    window: RectWindow,
    cells: Vec<ConvexPolygon>,
    vertices: Vec<Point2>,
    vertex_on_boundary: Vec<bool>,
    edges: Vec<Plate>,
    /// Per cell: `(neighbour cell, shared plate)`.
    adjacency: Vec<Vec<(usize, usize)>>,
    /// Per cell: boundary vertex ids in CCW order.
    boundary: Vec<Vec<usize>>,
    touches_boundary: Vec<bool>,
    tol: Tolerances,
}

/// Uniform bucket grid over the window for vertex lookups.
struct VertexGrid {
    x0: f64,
    y0: f64,
    size: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl VertexGrid {
    fn new(window: &RectWindow, n_cells: usize) -> Self {
        let mut size = (window.area() / n_cells.max(1) as f64).sqrt();
        let limit = 2048.0;
        size = size
            .max(window.width() / limit)
            .max(window.height() / limit);
        let nx = (window.width() / size).ceil().max(1.0) as usize;
        let ny = (window.height() / size).ceil().max(1.0) as usize;
        VertexGrid {
            x0: window.x0,
            y0: window.y0,
            size,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        }
    }

    fn coord(&self, v: f64, origin: f64, n: usize) -> usize {
        let k = ((v - origin) / self.size).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(n - 1)
        }
    }

    fn insert(&mut self, p: Point2, id: usize) {
        let (i, j) = (
            self.coord(p.x, self.x0, self.nx),
            self.coord(p.y, self.y0, self.ny),
        );
        self.buckets[j * self.nx + i].push(id);
    }

    /// Ids in all buckets overlapping the box.
    fn visit(&self, lo: Point2, hi: Point2, mut f: impl FnMut(usize)) {
        let (i0, i1) = (
            self.coord(lo.x, self.x0, self.nx),
            self.coord(hi.x, self.x0, self.nx),
        );
        let (j0, j1) = (
            self.coord(lo.y, self.y0, self.ny),
            self.coord(hi.y, self.y0, self.ny),
        );
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &id in &self.buckets[j * self.nx + i] {
                    f(id);
                }
            }
        }
    }
}

/// Builds the complex with default tolerances.
pub fn build_complex(
    cells: Vec<ConvexPolygon>,
    window: &RectWindow,
) -> Result<TessellationComplex> {
    build_complex_with(cells, window, Tolerances::default())
}

pub fn build_complex_with(
    cells: Vec<ConvexPolygon>,
    window: &RectWindow,
    tol: Tolerances,
) -> Result<TessellationComplex> {
    let eps = tol.eps_point;
    let mut grid = VertexGrid::new(window, cells.len());
    let mut vertices: Vec<Point2> = Vec::new();

    let mut corner_ids: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
    for cell in &cells {
        let mut ids = Vec::with_capacity(cell.len());
        for &c in cell.vertices() {
            let probe = Point2::new(eps, eps);
            let mut found = None;
            grid.visit(c - probe, c + probe, |id| {
                if found.is_none() && vertices[id].dist(c) <= eps {
                    found = Some(id);
                }
            });
            let id = found.unwrap_or_else(|| {
                vertices.push(c);
                grid.insert(c, vertices.len() - 1);
                vertices.len() - 1
            });
            ids.push(id);
        }
        corner_ids.push(ids);
    }

    // subdivide each side at the vertices lying on it
    let mut boundary: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
    let mut hanging: Vec<(f64, usize)> = Vec::new();
    for ids in &corner_ids {
        let mut cycle = Vec::with_capacity(ids.len() + 2);
        for k in 0..ids.len() {
            let (ia, ib) = (ids[k], ids[(k + 1) % ids.len()]);
            let (a, b) = (vertices[ia], vertices[ib]);
            cycle.push(ia);
            let len = a.dist(b);
            let u = (b - a) * (1.0 / len);
            let pad = Point2::new(eps, eps);
            let lo = Point2::new(a.x.min(b.x), a.y.min(b.y)) - pad;
            let hi = Point2::new(a.x.max(b.x), a.y.max(b.y)) + pad;
            hanging.clear();
            grid.visit(lo, hi, |id| {
                if id == ia || id == ib {
                    return;
                }
                let w = vertices[id] - a;
                let t = w.dot(u);
                if t > eps && t < len - eps && u.cross(w).abs() <= eps {
                    hanging.push((t, id));
                }
            });
            hanging.sort_by(|x, y| x.0.total_cmp(&y.0));
            cycle.extend(hanging.iter().map(|h| h.1));
        }
        boundary.push(cycle);
    }

    let mut edges: Vec<Plate> = Vec::new();
    let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
    for (cell, cycle) in boundary.iter().enumerate() {
        for k in 0..cycle.len() {
            let (u, v) = (cycle[k], cycle[(k + 1) % cycle.len()]);
            let key = (u.min(v), u.max(v));
            let idx = *edge_index.entry(key).or_insert_with(|| {
                edges.push(Plate {
                    segment: Segment {
                        a: vertices[key.0],
                        b: vertices[key.1],
                    },
                    ends: key,
                    cells: Vec::with_capacity(2),
                });
                edges.len() - 1
            });
            edges[idx].cells.push(cell);
        }
    }

    let vertex_on_boundary: Vec<bool> = vertices
        .iter()
        .map(|&v| window.on_boundary(v, eps))
        .collect();
    let mut adjacency = vec![Vec::new(); cells.len()];
    for (idx, plate) in edges.iter().enumerate() {
        match plate.cells.as_slice() {
            [c] => {
                let seg = &plate.segment;
                if !(window.on_boundary(seg.a, eps)
                    && window.on_boundary(seg.b, eps)
                    && window.on_boundary(seg.midpoint(), eps))
                {
                    return Err(Error::InconsistentComplex(format!(
                        "interior plate {:?}-{:?} has only cell {c}",
                        seg.a, seg.b
                    )));
                }
            }
            [c, d] if c != d => {
                adjacency[*c].push((*d, idx));
                adjacency[*d].push((*c, idx));
            }
            other => {
                return Err(Error::InconsistentComplex(format!(
                    "plate {:?}-{:?} has incident cells {other:?}",
                    plate.segment.a, plate.segment.b
                )));
            }
        }
    }

    let touches_boundary = corner_ids
        .iter()
        .map(|ids| ids.iter().any(|&i| vertex_on_boundary[i]))
        .collect();

    Ok(TessellationComplex {
        window: *window,
        cells,
        vertices,
        vertex_on_boundary,
        edges,
        adjacency,
        boundary,
        touches_boundary,
        tol,
    })
}

impl TessellationComplex {
    pub fn window(&self) -> &RectWindow {
        &self.window
    }

    pub fn cells(&self) -> &[ConvexPolygon] {
        &self.cells
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Plate] {
        &self.edges
    }

    pub fn adjacency(&self, cell: usize) -> &[(usize, usize)] {
        &self.adjacency[cell]
    }

    /// Boundary vertex ids of a cell, CCW.
    pub fn boundary(&self, cell: usize) -> &[usize] {
        &self.boundary[cell]
    }

    pub fn vertex_on_boundary(&self, v: usize) -> bool {
        self.vertex_on_boundary[v]
    }

    pub fn touches_boundary(&self, cell: usize) -> bool {
        self.touches_boundary[cell]
    }

    pub fn cell_topology(&self, id: usize) -> Result<CellTopology> {
        let cell = self.cells.get(id).ok_or(Error::UnknownCell(id))?;
        let adj = &self.adjacency[id];
        let mut distinct: Vec<usize> = adj.iter().map(|a| a.0).collect();
        distinct.sort_unstable();
        distinct.dedup();
        Ok(CellTopology {
            id,
            corners: cell.len(),
            n0: self.boundary[id].len(),
            n1: self.boundary[id].len(),
            neighbor_plate_count: adj.len(),
            neighbor_distinct_count: distinct.len(),
            touches_boundary: self.touches_boundary[id],
        })
    }

    /// Histogram of edge degrees of vertices off the window boundary.
    pub fn vertex_degrees(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for ((deg, _), n) in self.vertex_structure() {
            *hist.entry(deg).or_insert(0) += n;
        }
        hist
    }

    /// Counts of interior vertices keyed by `(degree, collinear edge pairs)`.
    pub fn vertex_structure(&self) -> BTreeMap<(usize, usize), usize> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (idx, e) in self.edges.iter().enumerate() {
            incident[e.ends.0].push(idx);
            incident[e.ends.1].push(idx);
        }
        let mut out = BTreeMap::new();
        for (v, edges) in incident.iter().enumerate() {
            if self.vertex_on_boundary[v] {
                continue;
            }
            let origin = self.vertices[v];
            let dirs: Vec<Point2> = edges
                .iter()
                .map(|&e| {
                    let (a, b) = self.edges[e].ends;
                    let other = if a == v { b } else { a };
                    self.vertices[other] - origin
                })
                .collect();
            let mut pairs = 0;
            for i in 0..dirs.len() {
                for j in (i + 1)..dirs.len() {
                    let (d1, d2) = (dirs[i], dirs[j]);
                    let offset = d1.cross(d2).abs() / d1.norm().max(d2.norm());
                    if d1.dot(d2) < 0.0 && offset <= self.tol.eps_collinear {
                        pairs += 1;
                    }
                }
            }
            *out.entry((dirs.len(), pairs)).or_insert(0) += 1;
        }
        out
    }

    /// Total interior edge length per unit window area.
    pub fn edge_length_density(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .filter(|e| e.is_interior())
            .map(|e| e.segment.length())
            .sum();
        total / self.window.area()
    }

    /// `(vertices, edges, cells)` not on the window boundary.
    ///
    /// Every cell is counted. With boundary vertices and edges excluded,
    /// `V - E + F = 1` holds for any tiling of the window.
    pub fn interior_counts(&self) -> (usize, usize, usize) {
        let v = self.vertex_on_boundary.iter().filter(|b| !**b).count();
        let e = self.edges.iter().filter(|e| e.is_interior()).count();
        (v, e, self.cells.len())
    }

    /// Interior plate counts divided by the window area.
    pub fn plate_intensities(&self) -> (f64, f64, f64) {
        let (v, e, f) = self.interior_counts();
        let a = self.window.area();
        (v as f64 / a, e as f64 / a, f as f64 / a)
    }
}
