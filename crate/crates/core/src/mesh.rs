//! Uniform Cartesian meshes with edge-collocated vector components.
//!
//! Zones are indexed by their lower vertex. An edge along axis `a` is named by
//! its start vertex, so `EdgeId { axis: 0, index: [i, j] }` runs from vertex
//! `(i, j)` to `(i + 1, j)`.

use crate::error::{Error, Result};

/// Treatment of the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    /// Ghost values are filled from an exact solution.
    DirichletExact,
}

/// A uniform Cartesian mesh in `D` dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec<const D: usize> {
    pub dims: [usize; D],
    pub spacing: [f64; D],
    pub origin: [f64; D],
    pub boundary: Boundary,
}

pub type Mesh2 = MeshSpec<2>;
pub type Mesh3 = MeshSpec<3>;

/// An edge, identified by its axis and start vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeId<const D: usize> {
    pub axis: usize,
    pub index: [usize; D],
}

impl<const D: usize> MeshSpec<D> {
    pub fn new(dims: [usize; D], spacing: [f64; D], origin: [f64; D], boundary: Boundary) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidMesh(format!("zero-sized dimension in {dims:?}")));
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidMesh(format!("non-positive spacing {spacing:?}")));
        }
        Ok(Self { dims, spacing, origin, boundary })
    }

    /// Mesh with `n` zones per direction on `[lo, hi]^D`.
    pub fn cube(n: usize, lo: f64, hi: f64, boundary: Boundary) -> Result<Self> {
        let h = (hi - lo) / n as f64;
        Self::new([n; D], [h; D], [lo; D], boundary)
    }

    pub fn zone_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Number of distinct vertex positions along `axis`.
    pub fn vertex_count(&self, axis: usize) -> usize {
        match self.boundary {
            Boundary::Periodic => self.dims[axis],
            Boundary::DirichletExact => self.dims[axis] + 1,
        }
    }

    /// Shape of the array holding edges along `axis`.
    pub fn edge_shape(&self, axis: usize) -> [usize; D] {
        let mut s = [0; D];
        for d in 0..D {
            s[d] = if d == axis { self.dims[d] } else { self.vertex_count(d) };
        }
        s
    }

    /// Number of edges along `axis`.
    pub fn edge_count(&self, axis: usize) -> usize {
        self.edge_shape(axis).iter().product()
    }

    fn check_zone(&self, zone: [usize; D]) -> Result<()> {
        if zone.iter().zip(&self.dims).any(|(&i, &n)| i >= n) {
            return Err(Error::OutOfMesh {
                index: zone.iter().map(|&i| i as isize).collect(),
                dims: self.dims.to_vec(),
            });
        }
        Ok(())
    }

    /// Edge whose start vertex is `zone + offset`, wrapped on periodic meshes.
    fn edge(&self, axis: usize, zone: [usize; D], offset: [usize; D]) -> EdgeId<D> {
        let mut index = [0; D];
        for d in 0..D {
            let v = zone[d] + offset[d];
            index[d] = match self.boundary {
                Boundary::Periodic => v % self.dims[d],
                Boundary::DirichletExact => v,
            };
        }
        EdgeId { axis, index }
    }

    /// Center of a zone in physical coordinates.
    pub fn zone_center(&self, zone: [usize; D]) -> [f64; D] {
        let mut c = [0.0; D];
        for d in 0..D {
            c[d] = self.origin[d] + (zone[d] as f64 + 0.5) * self.spacing[d];
        }
        c
    }

    /// Reference coordinates in `[-1/2, 1/2]^D` of a physical point inside a
    /// zone.
    pub fn ref_coords(&self, zone: [usize; D], point: [f64; D]) -> Result<[f64; D]> {
        self.check_zone(zone)?;
        let c = self.zone_center(zone);
        let mut xi = [0.0; D];
        for d in 0..D {
            xi[d] = (point[d] - c[d]) / self.spacing[d];
            if xi[d].abs() > 0.5 + 1e-12 {
                return Err(Error::OutOfZone { coord: xi[d] });
            }
        }
        Ok(xi)
    }
}

impl Mesh2 {
    /// The four edges of a zone, ordered (x-bottom, x-top, y-left, y-right),
    /// i.e. `V_x^1, V_x^2, V_y^1, V_y^2`.
    pub fn zone_edges(&self, zone: [usize; 2]) -> Result<[EdgeId<2>; 4]> {
        self.check_zone(zone)?;
        Ok([
            self.edge(0, zone, [0, 0]),
            self.edge(0, zone, [0, 1]),
            self.edge(1, zone, [0, 0]),
            self.edge(1, zone, [1, 0]),
        ])
    }
}

impl Mesh3 {
    /// The twelve edges of a zone: `V_x^1..4, V_y^1..4, V_z^1..4`.
    ///
    /// Edges along axis `a` are labeled by the corner they occupy in the two
    /// cyclically following axes `(b, c)`: 1 = (-,-), 2 = (+,-), 3 = (-,+),
    /// 4 = (+,+). So x-edges are placed in (y, z), y-edges in (z, x) and
    /// z-edges in (x, y).
    pub fn zone_edges(&self, zone: [usize; 3]) -> Result<[EdgeId<3>; 12]> {
        self.check_zone(zone)?;
        let mut out = [EdgeId { axis: 0, index: [0; 3] }; 12];
        for a in 0..3 {
            let b = (a + 1) % 3;
            let c = (a + 2) % 3;
            for (l, (ob, oc)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                let mut off = [0; 3];
                off[b] = ob;
                off[c] = oc;
                out[4 * a + l] = self.edge(a, zone, off);
            }
        }
        Ok(out)
    }
}

/// Row-major linear index into an array of the given shape.
#[inline]
pub fn linear_index<const D: usize>(shape: [usize; D], index: [usize; D]) -> usize {
    let mut k = 0;
    for d in 0..D {
        k = k * shape[d] + index[d];
    }
    k
}
