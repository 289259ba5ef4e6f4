//! Cell-centred discretization of a box `Omega` plus its collar, the shell of
//! width one horizon that carries the Dirichlet data.

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{cells_per_horizon, Stencil};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("BadSpacing: {0}")]
    BadSpacing(String),
    #[error("unsupported dimension {0} (only 1 and 2)")]
    UnsupportedDimension(usize),
    #[error("NonFiniteValue: {value} at node {node}")]
    NonFiniteValue { node: usize, value: f64 },
    #[error("field has {got} values, grid has {expected} nodes")]
    SizeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interior,
    Collar,
}

/// Location handed to field samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodePoint {
    /// Lattice cell index; the cell centre is `(index + 1/2) h`.
    pub index: [i64; 2],
    pub x: [f64; 2],
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainGrid {
    dim: usize,
    extent: [f64; 2],
    h: f64,
    horizon_cells: i64,
    cells: [i64; 2],
    n_interior: usize,
    /// Lattice index per node: interior nodes first, then collar.
    nodes: Vec<[i64; 2]>,
    /// Node id per lattice cell of the padded box, `u32::MAX` when absent.
    lookup: Vec<u32>,
    lookup_dims: [i64; 2],
}

const ABSENT: u32 = u32::MAX;

impl DomainGrid {
    /// `extent` lists `L_1[, L_2]`; `Omega = (0, L_1) x (0, L_2)`.
    pub fn build(extent: &[f64], h: f64) -> Result<Self, GridError> {
        let dim = extent.len();
        if dim != 1 && dim != 2 {
            return Err(GridError::UnsupportedDimension(dim));
        }
        let r = cells_per_horizon(h).map_err(|e| GridError::BadSpacing(e.to_string()))? as i64;
        let mut cells = [1i64; 2];
        let mut ext = [0.0; 2];
        for (axis, &len) in extent.iter().enumerate() {
            let ratio = len / h;
            let n = ratio.round();
            if !(len.is_finite() && len > 0.0) || n < 1.0 || (ratio - n).abs() > 1e-9 * n {
                return Err(GridError::BadSpacing(format!(
                    "extent {len} along axis {axis} is not a multiple of h = {h}"
                )));
            }
            cells[axis] = n as i64;
            ext[axis] = len;
        }

        let pad = |axis: usize| if axis < dim { r } else { 0 };
        let lookup_dims = [cells[0] + 2 * pad(0), cells[1] + 2 * pad(1)];
        let mut grid = DomainGrid {
            dim,
            extent: ext,
            h,
            horizon_cells: r,
            cells,
            n_interior: 0,
            nodes: Vec::new(),
            lookup: vec![ABSENT; (lookup_dims[0] * lookup_dims[1]) as usize],
            lookup_dims,
        };

        for i2 in 0..cells[1] {
            for i1 in 0..cells[0] {
                grid.push_node([i1, i2]);
            }
        }
        grid.n_interior = grid.nodes.len();
        for i2 in -pad(1)..cells[1] + pad(1) {
            for i1 in -pad(0)..cells[0] + pad(0) {
                let idx = [i1, i2];
                if !grid.is_interior_index(idx) && grid.collar_distance_ok(idx) {
                    grid.push_node(idx);
                }
            }
        }
        Ok(grid)
    }

    fn push_node(&mut self, idx: [i64; 2]) {
        let slot = self.slot(idx).expect("node inside padded box");
        self.lookup[slot] = self.nodes.len() as u32;
        self.nodes.push(idx);
    }

    fn slot(&self, idx: [i64; 2]) -> Option<usize> {
        let pad1 = if self.dim == 2 { self.horizon_cells } else { 0 };
        let a = idx[0] + self.horizon_cells;
        let b = idx[1] + pad1;
        if a < 0 || b < 0 || a >= self.lookup_dims[0] || b >= self.lookup_dims[1] {
            None
        } else {
            Some((b * self.lookup_dims[0] + a) as usize)
        }
    }

    fn is_interior_index(&self, idx: [i64; 2]) -> bool {
        (0..self.dim).all(|a| idx[a] >= 0 && idx[a] < self.cells[a])
    }

    /// Distance from the cell centre to `Omega` is below one horizon,
    /// compared exactly in half-cell units.
    fn collar_distance_ok(&self, idx: [i64; 2]) -> bool {
        let mut q2 = 0i64;
        for a in 0..self.dim {
            let q = if idx[a] < 0 {
                -2 * idx[a] - 1
            } else if idx[a] >= self.cells[a] {
                2 * (idx[a] - self.cells[a]) + 1
            } else {
                0
            };
            q2 += q * q;
        }
        q2 < 4 * self.horizon_cells * self.horizon_cells
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn horizon_cells(&self) -> i64 {
        self.horizon_cells
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_collar(&self) -> usize {
        self.nodes.len() - self.n_interior
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn region(&self, node: usize) -> Region {
        if node < self.n_interior {
            Region::Interior
        } else {
            Region::Collar
        }
    }

    pub fn lattice_index(&self, node: usize) -> [i64; 2] {
        self.nodes[node]
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        let idx = self.nodes[node];
        let mut x = [0.0; 2];
        for a in 0..self.dim {
            x[a] = (idx[a] as f64 + 0.5) * self.h;
        }
        x
    }

    pub fn point(&self, node: usize) -> NodePoint {
        NodePoint {
            index: self.nodes[node],
            x: self.coords(node),
            region: self.region(node),
        }
    }

    pub fn node_at(&self, idx: [i64; 2]) -> Option<usize> {
        if self.dim == 1 && idx[1] != 0 {
            return None;
        }
        let slot = self.slot(idx)?;
        match self.lookup[slot] {
            ABSENT => None,
            id => Some(id as usize),
        }
    }

    /// Node reached from `node` by stencil offset `d`, if represented.
    pub fn neighbor(&self, node: usize, d: [i64; 2]) -> Option<usize> {
        let idx = self.nodes[node];
        self.node_at([idx[0] + d[0], idx[1] + d[1]])
    }

    /// Flat `n_interior x stencil.len()` table of neighbour node ids. Fails if
    /// any interior node would read outside interior and collar.
    pub fn neighbor_table(&self, stencil: &Stencil) -> Result<Vec<u32>, GridError> {
        if stencil.dim != self.dim || (stencil.h - self.h).abs() > 1e-12 * self.h {
            return Err(GridError::BadSpacing(format!(
                "stencil (dim {}, h {}) does not match grid (dim {}, h {})",
                stencil.dim, stencil.h, self.dim, self.h
            )));
        }
        let mut table = Vec::with_capacity(self.n_interior * stencil.len());
        for node in 0..self.n_interior {
            for &d in &stencil.offsets {
                let nb = self.neighbor(node, d).ok_or_else(|| {
                    GridError::BadSpacing(format!("stencil offset {d:?} leaves the collar"))
                })?;
                table.push(nb as u32);
            }
        }
        Ok(table)
    }
}

/// Values on interior nodes followed by collar nodes, in grid node order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    n_interior: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn from_parts(interior: Vec<f64>, collar: &[f64]) -> Self {
        let n_interior = interior.len();
        let mut values = interior;
        values.extend_from_slice(collar);
        Field { n_interior, values }
    }

    pub fn from_values(n_interior: usize, values: Vec<f64>) -> Self {
        assert!(n_interior <= values.len());
        Field { n_interior, values }
    }

    pub fn constant(grid: &DomainGrid, c: f64) -> Self {
        Field {
            n_interior: grid.n_interior(),
            values: vec![c; grid.n_nodes()],
        }
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior(&self) -> &[f64] {
        &self.values[..self.n_interior]
    }

    pub fn interior_mut(&mut self) -> &mut [f64] {
        &mut self.values[..self.n_interior]
    }

    pub fn collar(&self) -> &[f64] {
        &self.values[self.n_interior..]
    }

    /// Mutable collar access, for fault injection and for building data.
    /// Solvers never call this.
    pub fn collar_mut(&mut self) -> &mut [f64] {
        &mut self.values[self.n_interior..]
    }

    /// `ess sup |u|` over all represented nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn check_finite(&self) -> Result<(), GridError> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(GridError::NonFiniteValue {
                node,
                value: self.values[node],
            }),
            None => Ok(()),
        }
    }

    pub fn check_matches(&self, grid: &DomainGrid) -> Result<(), GridError> {
        if self.values.len() != grid.n_nodes() || self.n_interior != grid.n_interior() {
            return Err(GridError::SizeMismatch {
                expected: grid.n_nodes(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Interior values from `u0`, collar values from `psi`. If `u0` disagrees with
/// `psi` on the collar a warning is logged and `psi` is used.
pub fn make_field<U, P>(grid: &DomainGrid, mut u0: U, mut psi: P) -> Result<Field, GridError>
where
    U: FnMut(&NodePoint) -> f64,
    P: FnMut(&NodePoint) -> f64,
{
    let mut values = Vec::with_capacity(grid.n_nodes());
    let mut mismatches = 0usize;
    for node in 0..grid.n_nodes() {
        let p = grid.point(node);
        let v = match p.region {
            Region::Interior => u0(&p),
            Region::Collar => {
                let boundary = psi(&p);
                let initial = u0(&p);
                if initial.to_bits() != boundary.to_bits() {
                    mismatches += 1;
                }
                boundary
            }
        };
        if !v.is_finite() {
            return Err(GridError::NonFiniteValue { node, value: v });
        }
        values.push(v);
    }
    if mismatches > 0 {
        warn!("initial data disagrees with psi on {mismatches} collar nodes; using psi");
    }
    Ok(Field {
        n_interior: grid.n_interior(),
        values,
    })
}

/// Extrema of one field. `U_*` are over `Omega`, `psi_*` over the collar,
/// `u_*` over both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremaRecord {
    pub t: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    #[serde(rename = "U_plus")]
    pub big_u_plus: f64,
    #[serde(rename = "U_minus")]
    pub big_u_minus: f64,
    pub psi_plus: f64,
    pub psi_minus: f64,
    pub u_inf: f64,
}

pub fn extrema(field: &Field, t: f64) -> ExtremaRecord {
    let (big_u_minus, big_u_plus) = min_max(field.interior());
    let (psi_minus, psi_plus) = min_max(field.collar());
    let u_plus = big_u_plus.max(psi_plus);
    let u_minus = big_u_minus.min(psi_minus);
    ExtremaRecord {
        t,
        u_plus,
        u_minus,
        big_u_plus,
        big_u_minus,
        psi_plus,
        psi_minus,
        u_inf: u_plus.abs().max(u_minus.abs()),
    }
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
