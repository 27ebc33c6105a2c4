//! Finite-volume discretization of the free region on a uniform grid.
//!
//! Nodes sit at (x_i, y_j) = (-L + i hx, j hy). Each free grid cell
//! contributes edge stiffness hy/(2 hx) to its two horizontal node pairs,
//! hx/(2 hy) to its two vertical pairs, and lumped volume hx hy / 4 to each
//! of its corners. Obstruction midlines are realized by duplicating the
//! nodes on those rows for |x_i| <= a into a lower and an upper copy, so the
//! field may jump across the barrier; cells below such a row reference the
//! lower copy, cells above the upper copy. Thick obstacles additionally mark
//! every cell whose center falls inside the obstruction as solid (excluded),
//! eliminating nodes that end up with no adjacent free cell. The truncated
//! ends x = +-L always carry Dirichlet conditions; the walls y = 0, 2N are
//! Neumann (free) or Dirichlet (eliminated) per the waveguide.

use crate::error::{Error, Result};
use crate::geometry::{Variant, WallBc, WaveguideSpec};

use super::eigen::BandMatrix;

/// Uniform grid parameters: steps hx, hy and truncation half-length L.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub hx: f64,
    pub hy: f64,
    pub l: f64,
}

impl GridSpec {
    pub fn new(hx: f64, hy: f64, l: f64) -> Self {
        GridSpec { hx, hy, l }
    }

    /// The step-doubled companion grid (same truncation length), used for
    /// eigenvalue error estimates.
    pub fn coarsened(&self) -> GridSpec {
        GridSpec {
            hx: 2.0 * self.hx,
            hy: 2.0 * self.hy,
            l: self.l,
        }
    }
}

/// Integer grid layout derived from a validated `GridSpec`.
#[derive(Clone, Debug)]
pub struct GridDims {
    pub hx: f64,
    pub hy: f64,
    pub l: f64,
    /// Number of cross-channel periods (strip height 2N).
    pub n: usize,
    pub bc: WallBc,
    /// Cell counts: columns (2L/hx) and rows (2N/hy).
    pub mx: usize,
    pub my: usize,
    /// Node column of x = 0 and column offset of x = a.
    pub ic: usize,
    pub ia: usize,
    /// Node rows per y-distance 2 (one period).
    pub rows_per_two: usize,
    /// Node rows that carry duplicated unknowns for |x| <= a.
    pub slit_rows: Vec<usize>,
}

impl GridDims {
    pub fn x_of(&self, i: usize) -> f64 {
        i as f64 * self.hx - self.l
    }

    pub fn y_of(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }
}

fn int_ratio(value: f64, what: &str) -> Result<usize> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::GridMisaligned(format!(
            "{what} must be positive and finite (got {value})"
        )));
    }
    let r = value.round();
    if r < 1.0 || (value - r).abs() > 1e-9 * value.max(1.0) {
        return Err(Error::GridMisaligned(format!(
            "{what} must be an integer (got {value})"
        )));
    }
    Ok(r as usize)
}

/// Validate a grid against strip height 2N (and, when an obstructed
/// waveguide is given, against its obstacle layout) and derive the integer
/// dimensions. `obstruction = None` describes the unobstructed strip.
pub(crate) fn grid_dims(
    n: usize,
    bc: WallBc,
    grid: &GridSpec,
    obstruction: Option<&WaveguideSpec>,
) -> Result<GridDims> {
    if n < 1 {
        return Err(Error::InvalidParams("need at least one period".into()));
    }
    for (v, name) in [(grid.hx, "hx"), (grid.hy, "hy"), (grid.l, "L")] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::GridMisaligned(format!(
                "{name} must be positive and finite (got {v})"
            )));
        }
    }
    let rows_per_two = int_ratio(2.0 / grid.hy, "2/hy")?;
    let il = int_ratio(grid.l / grid.hx, "L/hx")?;
    let mx = 2 * il;
    let my = n * rows_per_two;
    let ic = il;

    let (ia, slit_rows) = match obstruction {
        None => (0, Vec::new()),
        Some(spec) => {
            debug_assert_eq!(spec.n, n);
            if grid.l <= spec.a {
                return Err(Error::GridMisaligned(format!(
                    "truncation half-length L = {} must exceed the obstacle \
                     half-width a = {}",
                    grid.l, spec.a
                )));
            }
            let ia = int_ratio(spec.a / grid.hx, "a/hx")?;
            let slit_rows = match spec.variant {
                Variant::CenteredObstacles => {
                    // Midlines y = 2m - 1 must land on node rows.
                    let k1 = int_ratio(1.0 / grid.hy, "1/hy")?;
                    (1..=n).map(|m| (2 * m - 1) * k1).collect()
                }
                Variant::MidlineSegments => {
                    // Segment lines y = 2m, m = 1..N-1, always on node rows.
                    (1..n).map(|m| m * rows_per_two).collect()
                }
            };
            (ia, slit_rows)
        }
    };

    Ok(GridDims {
        hx: grid.hx,
        hy: grid.hy,
        l: grid.l,
        n,
        bc,
        mx,
        my,
        ic,
        ia,
        rows_per_two,
        slit_rows,
    })
}

/// Resolution of a grid node to unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeState {
    /// No degree of freedom (Dirichlet boundary or obstruction interior).
    Eliminated,
    /// One unknown shared by both sides of the node.
    Single(u32),
    /// Duplicated node on an obstruction midline: distinct values below and
    /// above the barrier.
    Split { lower: u32, upper: u32 },
    /// Midline node whose upper side is buried in the obstruction.
    LowerOnly(u32),
    /// Midline node whose lower side is buried in the obstruction.
    UpperOnly(u32),
}

/// Node-to-unknown mapping for one assembled grid.
#[derive(Clone, Debug)]
pub struct NodeMap {
    pub dims: GridDims,
    states: Vec<NodeState>,
    /// Unknown id -> (node column, node row, side); side is 1 only for the
    /// upper copy of a duplicated node.
    nodes: Vec<(u32, u32, u8)>,
}

impl NodeMap {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.dims.my + 1) + j
    }

    pub fn state(&self, i: usize, j: usize) -> NodeState {
        self.states[self.idx(i, j)]
    }

    pub fn n_unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_of(&self, id: usize) -> (usize, usize, u8) {
        let (i, j, s) = self.nodes[id];
        (i as usize, j as usize, s)
    }

    /// Read a nodal value out of an unknown vector, asking for the upper or
    /// lower side of duplicated nodes. Eliminated sides read as 0 (the
    /// Dirichlet principal value).
    pub fn sample(&self, values: &[f64], i: usize, j: usize, upper: bool) -> f64 {
        match self.state(i, j) {
            NodeState::Eliminated => 0.0,
            NodeState::Single(id) => values[id as usize],
            NodeState::Split { lower, upper: up } => {
                values[if upper { up } else { lower } as usize]
            }
            NodeState::LowerOnly(id) => {
                if upper {
                    0.0
                } else {
                    values[id as usize]
                }
            }
            NodeState::UpperOnly(id) => {
                if upper {
                    values[id as usize]
                } else {
                    0.0
                }
            }
        }
    }

    /// Unknown id for a cell corner. `cell_above` says the referencing cell
    /// lies above the node's row (so a duplicated node resolves to its upper
    /// copy). `None` means the corner is Dirichlet-eliminated.
    fn corner(&self, i: usize, j: usize, cell_above: bool) -> Option<u32> {
        match self.state(i, j) {
            NodeState::Eliminated => None,
            NodeState::Single(id) => Some(id),
            NodeState::Split { lower, upper } => Some(if cell_above { upper } else { lower }),
            NodeState::LowerOnly(id) => {
                debug_assert!(!cell_above, "free cell above a buried midline side");
                if cell_above {
                    None
                } else {
                    Some(id)
                }
            }
            NodeState::UpperOnly(id) => {
                debug_assert!(cell_above, "free cell below a buried midline side");
                if cell_above {
                    Some(id)
                } else {
                    None
                }
            }
        }
    }
}

/// Assembled generalized eigenproblem K u = mu M u in its symmetrized form
/// A = D^{-1/2} K D^{-1/2} (w = D^{1/2} u), with D the lumped volumes.
pub struct DiscreteOperator {
    a_hat: BandMatrix,
    vol: Vec<f64>,
    sqrt_vol: Vec<f64>,
    pub map: NodeMap,
}

impl DiscreteOperator {
    pub fn n_unknowns(&self) -> usize {
        self.vol.len()
    }

    pub fn a_hat(&self) -> &BandMatrix {
        &self.a_hat
    }

    pub fn vol(&self) -> &[f64] {
        &self.vol
    }

    pub fn dims(&self) -> &GridDims {
        &self.map.dims
    }

    /// Physical nodal values u from the symmetrized vector w.
    pub fn u_from_w(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .zip(&self.sqrt_vol)
            .map(|(wi, s)| wi / s)
            .collect()
    }

    /// Symmetrized vector w from physical nodal values u.
    pub fn w_from_u(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.sqrt_vol)
            .map(|(ui, s)| ui * s)
            .collect()
    }
}

/// Discretize an obstructed waveguide.
pub fn assemble(spec: &WaveguideSpec, grid: &GridSpec) -> Result<DiscreteOperator> {
    assemble_impl(spec.n, spec.wall_bc, grid, Some(spec))
}

/// Discretize the unobstructed reference strip of the same height and walls
/// (sanity baseline: it must retain no below-threshold modes).
pub fn assemble_unobstructed(n: usize, bc: WallBc, grid: &GridSpec) -> Result<DiscreteOperator> {
    assemble_impl(n, bc, grid, None)
}

fn assemble_impl(
    n: usize,
    bc: WallBc,
    grid: &GridSpec,
    obstruction: Option<&WaveguideSpec>,
) -> Result<DiscreteOperator> {
    let dims = grid_dims(n, bc, grid, obstruction)?;
    let (mx, my) = (dims.mx, dims.my);

    // Free-cell mask, ci * my + cj. Solid cells exist only for thick
    // centered obstacles: the cell center must fall inside the obstruction.
    let mut free = vec![true; mx * my];
    if let Some(spec) = obstruction {
        if spec.variant == Variant::CenteredObstacles {
            let k1 = dims.rows_per_two / 2;
            for ci in 0..mx {
                let xc = (ci as f64 + 0.5 - dims.ic as f64) * dims.hx;
                if xc.abs() >= spec.a {
                    continue;
                }
                let g = spec.g(xc);
                if g <= 0.0 {
                    continue;
                }
                for cj in 0..my {
                    let band = cj / dims.rows_per_two;
                    let center = ((2 * band + 1) * k1) as f64;
                    let dy = (cj as f64 + 0.5 - center) * dims.hy;
                    if dy.abs() <= g {
                        free[ci * my + cj] = false;
                    }
                }
            }
        }
    }
    let cell_free = |ci: i64, cj: i64| -> bool {
        ci >= 0 && cj >= 0 && (ci as usize) < mx && (cj as usize) < my
            && free[ci as usize * my + cj as usize]
    };

    // Slit-row lookup.
    let mut slit_mask = vec![false; my + 1];
    for &r in &dims.slit_rows {
        slit_mask[r] = true;
    }

    // Node states, i outer / j inner, lower copy before upper.
    let mut states = vec![NodeState::Eliminated; (mx + 1) * (my + 1)];
    let mut nodes: Vec<(u32, u32, u8)> = Vec::new();
    for i in 0..=mx {
        for j in 0..=my {
            if i == 0 || i == mx {
                continue; // truncation boundary is always Dirichlet
            }
            if bc == WallBc::Dirichlet && (j == 0 || j == my) {
                continue;
            }
            let ii = i as i64;
            let jj = j as i64;
            let below = cell_free(ii - 1, jj - 1) || cell_free(ii, jj - 1);
            let above = cell_free(ii - 1, jj) || cell_free(ii, jj);
            let on_slit =
                slit_mask[j] && (ii - dims.ic as i64).unsigned_abs() as usize <= dims.ia;
            let state = if on_slit {
                match (below, above) {
                    (true, true) => {
                        let lower = nodes.len() as u32;
                        nodes.push((i as u32, j as u32, 0));
                        let upper = nodes.len() as u32;
                        nodes.push((i as u32, j as u32, 1));
                        NodeState::Split { lower, upper }
                    }
                    (true, false) => {
                        let id = nodes.len() as u32;
                        nodes.push((i as u32, j as u32, 0));
                        NodeState::LowerOnly(id)
                    }
                    (false, true) => {
                        let id = nodes.len() as u32;
                        nodes.push((i as u32, j as u32, 1));
                        NodeState::UpperOnly(id)
                    }
                    (false, false) => NodeState::Eliminated,
                }
            } else if below || above {
                let id = nodes.len() as u32;
                nodes.push((i as u32, j as u32, 0));
                NodeState::Single(id)
            } else {
                NodeState::Eliminated
            };
            states[i * (my + 1) + j] = state;
        }
    }

    let map = NodeMap {
        dims,
        states,
        nodes,
    };
    let dims = &map.dims;
    let n_unknowns = map.n_unknowns();
    if n_unknowns == 0 {
        return Err(Error::GridMisaligned(
            "grid leaves no interior unknowns; refine the steps or enlarge L".into(),
        ));
    }

    // Pass 1 over free cells: lumped volumes and the coupling bandwidth.
    let quarter = 0.25 * dims.hx * dims.hy;
    let mut vol = vec![0.0; n_unknowns];
    let mut bw = 0usize;
    let mut corner_ids = [None::<u32>; 4];
    for ci in 0..mx {
        for cj in 0..my {
            if !free[ci * my + cj] {
                continue;
            }
            corner_ids[0] = map.corner(ci, cj, true); // SW: cell above the row
            corner_ids[1] = map.corner(ci + 1, cj, true); // SE
            corner_ids[2] = map.corner(ci, cj + 1, false); // NW: cell below
            corner_ids[3] = map.corner(ci + 1, cj + 1, false); // NE
            let mut lo = u32::MAX;
            let mut hi = 0u32;
            for id in corner_ids.iter().flatten() {
                vol[*id as usize] += quarter;
                lo = lo.min(*id);
                hi = hi.max(*id);
            }
            if hi >= lo {
                bw = bw.max((hi - lo) as usize);
            }
        }
    }
    debug_assert!(vol.iter().all(|&v| v > 0.0));

    // Pass 2: stiffness. Edges with one Dirichlet end keep the full weight
    // on the surviving diagonal.
    let mut k = BandMatrix::new(n_unknowns, bw);
    let wh = dims.hy / (2.0 * dims.hx);
    let wv = dims.hx / (2.0 * dims.hy);
    let add_edge = |k: &mut BandMatrix, p: Option<u32>, q: Option<u32>, w: f64| match (p, q) {
        (Some(p), Some(q)) => {
            let (p, q) = (p as usize, q as usize);
            k.add(p, p, w);
            k.add(q, q, w);
            k.add(p, q, -w);
        }
        (Some(p), None) | (None, Some(p)) => k.add(p as usize, p as usize, w),
        (None, None) => {}
    };
    for ci in 0..mx {
        for cj in 0..my {
            if !free[ci * my + cj] {
                continue;
            }
            let sw = map.corner(ci, cj, true);
            let se = map.corner(ci + 1, cj, true);
            let nw = map.corner(ci, cj + 1, false);
            let ne = map.corner(ci + 1, cj + 1, false);
            add_edge(&mut k, sw, se, wh);
            add_edge(&mut k, nw, ne, wh);
            add_edge(&mut k, sw, nw, wv);
            add_edge(&mut k, se, ne, wv);
        }
    }

    let sqrt_vol: Vec<f64> = vol.iter().map(|v| v.sqrt()).collect();
    let inv_sqrt: Vec<f64> = sqrt_vol.iter().map(|s| 1.0 / s).collect();
    let mut a_hat = k;
    a_hat.scale_sym(&inv_sqrt);

    Ok(DiscreteOperator {
        a_hat,
        vol,
        sqrt_vol,
        map,
    })
}
