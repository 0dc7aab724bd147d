//! Uniform triangulation of a triangle with `N` subdivisions per side.
//!
//! Vertex `(i, j)` with `i + j <= N` sits at `p1 + (i/N)(p2 - p1) + (j/N)(p3 - p1)` and
//! is numbered lexicographically, `j` outer and `i` inner. Every element is either a
//! `1/N`-scaled translate of the parent ("up") or its point reflection ("down").

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, Triangle, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Up,
    Down,
}

#[derive(Debug, Clone)]
pub struct Edge {
    /// Endpoints with `vertices[0] < vertices[1]`.
    pub vertices: [usize; 2],
    /// Global unit normal: the direction from the lower to the higher vertex index
    /// rotated by -90 degrees.
    pub normal: Vector,
    pub midpoint: Point,
    pub length: f64,
    /// Adjacent elements; one entry for boundary edges.
    pub elements: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.elements.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct Element {
    /// Counterclockwise vertex indices.
    pub vertices: [usize; 3],
    /// `edges[k]` is the edge opposite local vertex `k`.
    pub edges: [usize; 3],
    /// `+1.0` when the global normal of `edges[k]` points out of this element.
    pub edge_signs: [f64; 3],
    pub orientation: Orientation,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    parent: Triangle,
    subdivisions: usize,
    vertices: Vec<Point>,
    edges: Vec<Edge>,
    elements: Vec<Element>,
}

impl Mesh {
    pub fn parent(&self) -> &Triangle {
        &self.parent
    }

    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element_triangle(&self, e: usize) -> Triangle {
        let [a, b, c] = self.elements[e].vertices;
        Triangle::new(self.vertices[a], self.vertices[b], self.vertices[c])
            .expect("mesh elements are nondegenerate")
    }

    /// Index of lattice vertex `(i, j)`.
    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        lattice_index(self.subdivisions, i, j)
    }

    /// Lattice coordinates `(i, j)` of every vertex, in index order.
    pub fn lattice_coordinates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.subdivisions;
        (0..=n).flat_map(move |j| (0..=n - j).map(move |i| (i, j)))
    }

    /// Mesh vertices at the parent corners `p1`, `p2`, `p3`.
    pub fn corner_vertex_indices(&self) -> [usize; 3] {
        let n = self.subdivisions;
        [self.vertex_index(0, 0), self.vertex_index(n, 0), self.vertex_index(0, n)]
    }

    /// Writes `vertices.csv` and `elements.csv` into `dir`.
    pub fn write_csv(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut v = std::io::BufWriter::new(std::fs::File::create(dir.join("vertices.csv"))?);
        writeln!(v, "index,x,y")?;
        for (k, p) in self.vertices.iter().enumerate() {
            writeln!(v, "{k},{},{}", p.x, p.y)?;
        }
        let mut e = std::io::BufWriter::new(std::fs::File::create(dir.join("elements.csv"))?);
        writeln!(e, "index,v0,v1,v2,e0,e1,e2,orientation")?;
        for (k, el) in self.elements.iter().enumerate() {
            let [a, b, c] = el.vertices;
            let [x, y, z] = el.edges;
            let o = match el.orientation {
                Orientation::Up => "up",
                Orientation::Down => "down",
            };
            writeln!(e, "{k},{a},{b},{c},{x},{y},{z},{o}")?;
        }
        Ok(())
    }
}

fn lattice_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i + j <= n);
    j * (n + 1) - j * j.saturating_sub(1) / 2 + i
}

pub fn uniform_mesh(tri: &Triangle, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("mesh needs at least one subdivision".into()));
    }
    let [p1, p2, p3] = *tri.vertices();
    let step_i = (p2 - p1) / n as f64;
    let step_j = (p3 - p1) / n as f64;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for j in 0..=n {
        for i in 0..=n - j {
            vertices.push(p1 + step_i * i as f64 + step_j * j as f64);
        }
    }
    // Pin the corners exactly.
    vertices[lattice_index(n, n, 0)] = p2;
    vertices[lattice_index(n, 0, n)] = p3;

    let mut elements = Vec::with_capacity(n * n);
    let mut edges: Vec<Edge> = Vec::with_capacity(3 * n * (n + 1) / 2);
    let mut edge_lookup: HashMap<(usize, usize), usize> = HashMap::new();

    let mut push_element = |verts: [usize; 3], orientation: Orientation, edges: &mut Vec<Edge>| {
        let index = elements.len();
        let mut ids = [0; 3];
        let mut signs = [0.0; 3];
        for k in 0..3 {
            let a = verts[(k + 1) % 3];
            let b = verts[(k + 2) % 3];
            let key = (a.min(b), a.max(b));
            let id = *edge_lookup.entry(key).or_insert_with(|| {
                let (pa, pb) = (vertices[key.0], vertices[key.1]);
                let t = pb - pa;
                let length = t.norm();
                edges.push(Edge {
                    vertices: [key.0, key.1],
                    normal: Vector::new(t.y, -t.x) / length,
                    midpoint: Point::from((pa.coords + pb.coords) / 2.0),
                    length,
                    elements: Vec::with_capacity(2),
                });
                edges.len() - 1
            });
            edges[id].elements.push(index);
            ids[k] = id;
            // Traversing a -> b counterclockwise, the outward normal is the tangent
            // rotated by -90 degrees, i.e. the global normal iff a < b.
            signs[k] = if a < b { 1.0 } else { -1.0 };
        }
        elements.push(Element { vertices: verts, edges: ids, edge_signs: signs, orientation });
    };

    for j in 0..n {
        for i in 0..n - j {
            let up = [lattice_index(n, i, j), lattice_index(n, i + 1, j), lattice_index(n, i, j + 1)];
            push_element(up, Orientation::Up, &mut edges);
            if i + j + 2 <= n {
                let down = [
                    lattice_index(n, i + 1, j + 1),
                    lattice_index(n, i, j + 1),
                    lattice_index(n, i + 1, j),
                ];
                push_element(down, Orientation::Down, &mut edges);
            }
        }
    }

    Ok(Mesh { parent: tri.clone(), subdivisions: n, vertices, edges, elements })
}
