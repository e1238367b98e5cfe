//! Structured quadrilateral meshes of rectangles, their dual and node graphs,
//! Q1 degree-of-freedom maps and per-subdomain local meshes.

mod graph;
mod local;

use std::fmt::Write as _;
use std::io::Write;

pub use graph::{cell_vertex_graph, dual_graph, node_graph, Graph};
pub use local::{build_local_mesh, EdgeKind, LocalEdge, LocalMesh};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Sides of the rectangle `(0, lx) x (0, ly)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// `y = 0`
    Bottom,
    /// `x = lx`
    Right,
    /// `y = ly`
    Top,
    /// `x = 0`
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    fn index(self) -> usize {
        self as usize
    }
}

/// Index into a mesh's table of boundary mark names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarkId(pub u8);

/// Boundary label for each side of the rectangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkScheme {
    pub bottom: String,
    pub right: String,
    pub top: String,
    pub left: String,
}

impl MarkScheme {
    pub fn uniform(name: &str) -> Self {
        Self {
            bottom: name.into(),
            right: name.into(),
            top: name.into(),
            left: name.into(),
        }
    }

    /// `incident` on `y = 0` and `absorbing` on the other three sides.
    pub fn waveguide() -> Self {
        Self {
            bottom: "incident".into(),
            right: "absorbing".into(),
            top: "absorbing".into(),
            left: "absorbing".into(),
        }
    }

    pub fn name(&self, side: Side) -> &str {
        match side {
            Side::Bottom => &self.bottom,
            Side::Right => &self.right,
            Side::Top => &self.top,
            Side::Left => &self.left,
        }
    }
}

impl Default for MarkScheme {
    fn default() -> Self {
        Self::uniform("boundary")
    }
}

/// An edge of the global boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub cell: usize,
    /// Local edge of `cell`: 0 bottom, 1 right, 2 top, 3 left.
    pub local_edge: usize,
    pub vertices: [usize; 2],
    pub side: Side,
    pub mark: MarkId,
}

/// Structured `nx x ny` quadrilateral mesh of `(0, lx) x (0, ly)`.
///
/// Vertices are numbered lexicographically with `x` fastest; cell `(cx, cy)`
/// has index `cy * nx + cx` and counterclockwise vertices starting at its
/// lower-left corner.
#[derive(Debug, Clone)]
pub struct Mesh {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    vertices: Vec<Point>,
    cells: Vec<[usize; 4]>,
    mark_names: Vec<String>,
    side_marks: [MarkId; 4],
    boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    pub fn structured(nx: usize, ny: usize, lx: f64, ly: f64, marks: &MarkScheme) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Mesh(format!("element counts must be positive, got {nx}x{ny}")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::Mesh(format!("extents must be positive, got {lx}x{ly}")));
        }
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for iy in 0..=ny {
            for ix in 0..=nx {
                let x = if ix == nx { lx } else { ix as f64 * hx };
                let y = if iy == ny { ly } else { iy as f64 * hy };
                vertices.push([x, y]);
            }
        }
        let v = |ix: usize, iy: usize| iy * (nx + 1) + ix;
        let mut cells = Vec::with_capacity(nx * ny);
        for cy in 0..ny {
            for cx in 0..nx {
                cells.push([v(cx, cy), v(cx + 1, cy), v(cx + 1, cy + 1), v(cx, cy + 1)]);
            }
        }

        let mut mark_names: Vec<String> = Vec::new();
        let mut side_marks = [MarkId(0); 4];
        for side in Side::ALL {
            let name = marks.name(side);
            let id = match mark_names.iter().position(|m| m == name) {
                Some(p) => p,
                None => {
                    mark_names.push(name.to_string());
                    mark_names.len() - 1
                }
            };
            side_marks[side.index()] = MarkId(id as u8);
        }

        let mut mesh = Self {
            nx,
            ny,
            lx,
            ly,
            vertices,
            cells,
            mark_names,
            side_marks,
            boundary_edges: Vec::new(),
        };
        let mut edges = Vec::with_capacity(2 * (nx + ny));
        for cx in 0..nx {
            edges.push(mesh.boundary_edge(mesh.cell_index(cx, 0), 0, Side::Bottom));
        }
        for cy in 0..ny {
            edges.push(mesh.boundary_edge(mesh.cell_index(nx - 1, cy), 1, Side::Right));
        }
        for cx in (0..nx).rev() {
            edges.push(mesh.boundary_edge(mesh.cell_index(cx, ny - 1), 2, Side::Top));
        }
        for cy in (0..ny).rev() {
            edges.push(mesh.boundary_edge(mesh.cell_index(0, cy), 3, Side::Left));
        }
        mesh.boundary_edges = edges;
        Ok(mesh)
    }

    fn boundary_edge(&self, cell: usize, local_edge: usize, side: Side) -> BoundaryEdge {
        BoundaryEdge {
            cell,
            local_edge,
            vertices: self.cell_edge_vertices(cell, local_edge),
            side,
            mark: self.side_marks[side.index()],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Mesh parameter `h = max(hx, hy)`.
    pub fn h(&self) -> f64 {
        self.hx().max(self.hy())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 4]] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn mark_names(&self) -> &[String] {
        &self.mark_names
    }

    pub fn mark_id(&self, name: &str) -> Option<MarkId> {
        self.mark_names.iter().position(|m| m == name).map(|p| MarkId(p as u8))
    }

    pub fn mark_name(&self, id: MarkId) -> &str {
        &self.mark_names[id.0 as usize]
    }

    pub fn side_mark(&self, side: Side) -> MarkId {
        self.side_marks[side.index()]
    }

    pub fn cell_index(&self, cx: usize, cy: usize) -> usize {
        cy * self.nx + cx
    }

    /// `(cx, cy)` of a cell.
    pub fn cell_position(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    pub fn centroid(&self, cell: usize) -> Point {
        let (cx, cy) = self.cell_position(cell);
        [(cx as f64 + 0.5) * self.hx(), (cy as f64 + 0.5) * self.hy()]
    }

    /// Vertices of local edge `e` (0 bottom, 1 right, 2 top, 3 left), in
    /// counterclockwise order.
    pub fn cell_edge_vertices(&self, cell: usize, e: usize) -> [usize; 2] {
        let c = self.cells[cell];
        [c[e], c[(e + 1) % 4]]
    }

    /// Cell across local edge `e`, if any.
    pub fn cell_neighbor(&self, cell: usize, e: usize) -> Option<usize> {
        let (cx, cy) = self.cell_position(cell);
        match e {
            0 => (cy > 0).then(|| self.cell_index(cx, cy - 1)),
            1 => (cx + 1 < self.nx).then(|| self.cell_index(cx + 1, cy)),
            2 => (cy + 1 < self.ny).then(|| self.cell_index(cx, cy + 1)),
            3 => (cx > 0).then(|| self.cell_index(cx - 1, cy)),
            _ => None,
        }
    }

    /// Global boundary mark of local edge `e` of `cell`, if that edge lies on
    /// the boundary of the rectangle.
    pub fn edge_mark(&self, cell: usize, e: usize) -> Option<MarkId> {
        if self.cell_neighbor(cell, e).is_some() {
            return None;
        }
        let side = match e {
            0 => Side::Bottom,
            1 => Side::Right,
            2 => Side::Top,
            _ => Side::Left,
        };
        Some(self.side_marks[side.index()])
    }

    pub fn vertex_on_boundary(&self, v: usize) -> bool {
        let (ix, iy) = (v % (self.nx + 1), v / (self.nx + 1));
        ix == 0 || iy == 0 || ix == self.nx || iy == self.ny
    }

    /// Bitmask per vertex of the marks of boundary edges touching it.
    pub fn vertex_marks(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.n_vertices()];
        for e in &self.boundary_edges {
            for &v in &e.vertices {
                m[v] |= 1 << e.mark.0;
            }
        }
        m
    }

    /// Plain-text export: vertex list, cell list and marked boundary edges.
    pub fn write_ascii<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "# structured quad mesh {}x{} on (0,{})x(0,{})", self.nx, self.ny, self.lx, self.ly).unwrap();
        writeln!(s, "vertices {}", self.n_vertices()).unwrap();
        for p in &self.vertices {
            writeln!(s, "{} {}", p[0], p[1]).unwrap();
        }
        writeln!(s, "cells {}", self.n_cells()).unwrap();
        for c in &self.cells {
            writeln!(s, "{} {} {} {}", c[0], c[1], c[2], c[3]).unwrap();
        }
        writeln!(s, "boundary_edges {}", self.boundary_edges.len()).unwrap();
        for e in &self.boundary_edges {
            writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], self.mark_name(e.mark)).unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

/// Convenience constructor mirroring [`Mesh::structured`].
pub fn structured_quad_mesh(nx: usize, ny: usize, lx: f64, ly: f64, marks: &MarkScheme) -> Result<Mesh> {
    Mesh::structured(nx, ny, lx, ly, marks)
}

/// Q1 degrees of freedom: one per mesh vertex.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub cell_dofs: Vec<[usize; 4]>,
    pub n_dofs: usize,
    pub dof_coords: Vec<Point>,
}

pub fn q1_dof_map(mesh: &Mesh) -> DofMap {
    DofMap {
        cell_dofs: mesh.cells.clone(),
        n_dofs: mesh.n_vertices(),
        dof_coords: mesh.vertices.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(nx: usize, ny: usize, lx: f64, ly: f64) -> Mesh {
        Mesh::structured(nx, ny, lx, ly, &MarkScheme::default()).unwrap()
    }

    #[test]
    fn single_cell() {
        let m = unit(1, 1, 1.0, 1.0);
        assert_eq!((m.n_vertices(), m.n_cells()), (4, 1));
        assert_eq!(m.cells()[0], [0, 1, 3, 2]);
        assert_eq!(q1_dof_map(&m).n_dofs, 4);
    }

    #[test]
    fn two_cells_share_an_edge() {
        let m = unit(2, 1, 2.0, 1.0);
        assert_eq!((m.n_vertices(), m.n_cells()), (6, 2));
        let a: std::collections::BTreeSet<_> = m.cells()[0].into_iter().collect();
        let b: std::collections::BTreeSet<_> = m.cells()[1].into_iter().collect();
        assert_eq!(a.intersection(&b).count(), 2);
        assert_eq!(q1_dof_map(&m).n_dofs, 6);
    }

    #[test]
    fn eight_by_eight() {
        let m = unit(8, 8, 1.0, 1.0);
        assert_eq!(m.h(), 0.125);
        assert_eq!(m.n_vertices(), 81);
        assert_eq!(q1_dof_map(&m).n_dofs, 81);
    }

    #[test]
    fn invalid_dimensions_are_rejected() {
        assert!(Mesh::structured(0, 1, 1.0, 1.0, &MarkScheme::default()).is_err());
        assert!(Mesh::structured(1, 1, 0.0, 1.0, &MarkScheme::default()).is_err());
        assert!(Mesh::structured(1, 1, 1.0, -2.0, &MarkScheme::default()).is_err());
    }

    #[test]
    fn cells_are_counterclockwise_rectangles() {
        let m = unit(3, 2, 1.5, 1.0);
        for c in m.cells() {
            let p: Vec<Point> = c.iter().map(|&v| m.vertices()[v]).collect();
            assert!((p[1][0] - p[0][0] - 0.5).abs() < 1e-15 && p[1][1] == p[0][1]);
            assert!(p[2][0] == p[1][0] && (p[2][1] - p[1][1] - 0.5).abs() < 1e-15);
            assert!(p[3][1] == p[2][1] && p[3][0] == p[0][0]);
        }
    }

    #[test]
    fn boundary_edges_carry_side_marks() {
        let m = Mesh::structured(3, 2, 1.0, 1.0, &MarkScheme::waveguide()).unwrap();
        assert_eq!(m.boundary_edges().len(), 10);
        let inc = m.mark_id("incident").unwrap();
        assert_eq!(m.boundary_edges().iter().filter(|e| e.mark == inc).count(), 3);
        assert_eq!(m.mark_names().len(), 2);
    }

    #[test]
    fn ascii_export_lists_everything() {
        let m = unit(2, 1, 1.0, 1.0);
        let mut buf = Vec::new();
        m.write_ascii(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("vertices 6\n") && s.contains("cells 2\n") && s.contains("boundary_edges 6\n"));
    }
}
