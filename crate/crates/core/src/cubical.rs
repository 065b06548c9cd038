//! Filtered cubical complexes generated by black pixels, plus an independent
//! Betti-number oracle.
//!
//! Each pixel with a finite entry time contributes its closed unit square.
//! Lattice cells are indexed canonically on a `(width + 1) x (height + 1)`
//! vertex lattice:
//!
//! * vertex `(x, y)` -> `y * (width + 1) + x`
//! * horizontal edge from `(x, y)` to `(x + 1, y)` -> `y * width + x`
//! * vertical edge from `(x, y)` to `(x, y + 1)` -> `width * (height + 1) + y * (width + 1) + x`
//! * square with top-left corner `(x, y)` (pixel `(x, y)`) -> `y * width + x`
//!
//! Cells are ordered by `(value, dimension, canonical index)`.

use std::fmt::Write as _;

use petgraph::unionfind::UnionFind;

use crate::filtration::EntryTimeGrid;
use crate::image::{BinaryImage, Raster};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub dim: u8,
    pub value: u32,
    /// Canonical lattice index within its dimension.
    pub index: usize,
    /// Positions (in filtration order) of the codimension-one faces, ascending.
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilteredCubicalComplex {
    cells: Vec<Cell>,
}

struct Lattice {
    w: usize,
    h: usize,
}

impl Lattice {
    fn vertex(&self, x: usize, y: usize) -> usize {
        y * (self.w + 1) + x
    }
    fn h_edge(&self, x: usize, y: usize) -> usize {
        y * self.w + x
    }
    fn v_edge(&self, x: usize, y: usize) -> usize {
        self.w * (self.h + 1) + y * (self.w + 1) + x
    }
    fn vertex_count(&self) -> usize {
        (self.w + 1) * (self.h + 1)
    }
    fn edge_count(&self) -> usize {
        self.w * (self.h + 1) + (self.w + 1) * self.h
    }
    /// Edge endpoints as vertex indices.
    fn edge_vertices(&self, e: usize) -> [usize; 2] {
        let split = self.w * (self.h + 1);
        if e < split {
            let (x, y) = (e % self.w, e / self.w);
            [self.vertex(x, y), self.vertex(x + 1, y)]
        } else {
            let r = e - split;
            let (x, y) = (r % (self.w + 1), r / (self.w + 1));
            [self.vertex(x, y), self.vertex(x, y + 1)]
        }
    }
    fn square_edges(&self, x: usize, y: usize) -> [usize; 4] {
        [self.h_edge(x, y), self.h_edge(x, y + 1), self.v_edge(x, y), self.v_edge(x + 1, y)]
    }
}

fn lower(slot: &mut Option<u32>, v: u32) {
    *slot = Some(slot.map_or(v, |s| s.min(v)));
}

impl FilteredCubicalComplex {
    /// Squares at pixel entry times; edges and vertices at the minimum over
    /// incident squares, since a closed square brings its whole boundary.
    pub fn build(grid: &EntryTimeGrid) -> Self {
        let lat = Lattice { w: grid.width(), h: grid.height() };
        let mut vertex_vals: Vec<Option<u32>> = vec![None; lat.vertex_count()];
        let mut edge_vals: Vec<Option<u32>> = vec![None; lat.edge_count()];
        for y in 0..lat.h {
            for x in 0..lat.w {
                let Some(v) = grid.get(x, y) else { continue };
                for e in lat.square_edges(x, y) {
                    lower(&mut edge_vals[e], v);
                }
                for (vx, vy) in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
                    lower(&mut vertex_vals[lat.vertex(vx, vy)], v);
                }
            }
        }

        let mut keys: Vec<(u32, u8, usize)> = Vec::new();
        keys.extend(vertex_vals.iter().enumerate().filter_map(|(i, v)| v.map(|v| (v, 0, i))));
        keys.extend(edge_vals.iter().enumerate().filter_map(|(i, v)| v.map(|v| (v, 1, i))));
        keys.extend(grid.times().iter().enumerate().filter_map(|(i, v)| v.map(|v| (v, 2, i))));
        keys.sort_unstable();

        let mut vertex_pos = vec![usize::MAX; lat.vertex_count()];
        let mut edge_pos = vec![usize::MAX; lat.edge_count()];
        let mut cells = Vec::with_capacity(keys.len());
        for (pos, &(value, dim, index)) in keys.iter().enumerate() {
            let boundary = match dim {
                0 => {
                    vertex_pos[index] = pos;
                    Vec::new()
                }
                1 => {
                    edge_pos[index] = pos;
                    let mut b: Vec<usize> = lat.edge_vertices(index).iter().map(|&v| vertex_pos[v]).collect();
                    b.sort_unstable();
                    b
                }
                _ => {
                    let (x, y) = (index % lat.w, index / lat.w);
                    let mut b: Vec<usize> = lat.square_edges(x, y).iter().map(|&e| edge_pos[e]).collect();
                    b.sort_unstable();
                    b
                }
            };
            debug_assert!(boundary.iter().all(|&p| p < pos));
            cells.push(Cell { dim, value, index, boundary });
        }
        FilteredCubicalComplex { cells }
    }

    /// Assembles a complex from explicit cells. No validation happens here;
    /// persistence computation rejects cells that break the ordering rules.
    pub fn from_cells(cells: Vec<Cell>) -> Self {
        FilteredCubicalComplex { cells }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `[vertices, edges, squares]`
    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for cell in &self.cells {
            c[cell.dim as usize] += 1;
        }
        c
    }

    pub fn euler_characteristic(&self) -> i64 {
        let [v, e, f] = self.counts();
        v as i64 - e as i64 + f as i64
    }

    /// One line per cell in filtration order: `dim value boundary-positions`.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            let _ = write!(out, "{} {}", c.dim, c.value);
            for b in &c.boundary {
                let _ = write!(out, " {b}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn build_complex(grid: &EntryTimeGrid) -> FilteredCubicalComplex {
    FilteredCubicalComplex::build(grid)
}

/// `(β0, β1)` of the union of closed black squares, computed without any
/// matrix reduction: β0 by union-find over lattice vertices joined by edges
/// of the complex, β1 from the Euler characteristic (β2 is 0 in the plane).
pub fn betti_oracle(b: &BinaryImage) -> (usize, usize) {
    let (w, h) = (b.width(), b.height());
    let vid = |x: usize, y: usize| y * (w + 1) + x;
    let mut present_vertex = vec![false; (w + 1) * (h + 1)];
    let mut h_edges = vec![false; w * (h + 1)];
    let mut v_edges = vec![false; (w + 1) * h];
    let mut squares = 0usize;
    for y in 0..h {
        for x in 0..w {
            if !b.is_black(x, y) {
                continue;
            }
            squares += 1;
            h_edges[y * w + x] = true;
            h_edges[(y + 1) * w + x] = true;
            v_edges[y * (w + 1) + x] = true;
            v_edges[y * (w + 1) + x + 1] = true;
            for (vx, vy) in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
                present_vertex[vid(vx, vy)] = true;
            }
        }
    }
    let mut uf = UnionFind::<usize>::new(present_vertex.len());
    let mut edges = 0usize;
    for (i, _) in h_edges.iter().enumerate().filter(|(_, &p)| p) {
        let (x, y) = (i % w, i / w);
        uf.union(vid(x, y), vid(x + 1, y));
        edges += 1;
    }
    for (i, _) in v_edges.iter().enumerate().filter(|(_, &p)| p) {
        let (x, y) = (i % (w + 1), i / (w + 1));
        uf.union(vid(x, y), vid(x, y + 1));
        edges += 1;
    }
    let vertices = present_vertex.iter().filter(|&&p| p).count();
    let beta0 = (0..present_vertex.len())
        .filter(|&v| present_vertex[v] && uf.find(v) == v)
        .count();
    let euler = vertices as i64 - edges as i64 + squares as i64;
    let beta1 = beta0 as i64 - euler;
    debug_assert!(beta1 >= 0);
    (beta0, beta1 as usize)
}
