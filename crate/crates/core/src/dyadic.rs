//! Dyadic grids on the cube `Q = [-L/2, L/2]^d`, dyadic approximation of a
//! measure and the plans routing mass through successive cube centers.
//!
//! Level `k` splits `Q` into `2^{kd}` cubes indexed row-major over their
//! integer coordinates (first coordinate most significant). The cube with
//! integer coordinates `(i_1, …, i_d)` at level `k` has children
//! `(2i_1 + b_1, …, 2i_d + b_d)` at level `k + 1`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::measure::{Atom, AtomicMeasure, LebesgueSpec, Measure};
use crate::network::{norm, BranchId, BranchSpec, MultiplicityProfile, Network, Point, TOL};

/// Largest number of cells enumerated densely for a Lebesgue measure.
const MAX_DENSE_CELLS: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicGrid {
    d: usize,
    edge: f64,
    n: u32,
}

impl DyadicGrid {
    pub fn new(d: usize, edge: f64, n: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("grid dimension must be >= 1"));
        }
        if !(edge.is_finite() && edge > 0.0) {
            return Err(Error::domain(format!("grid edge must be > 0, got {edge}")));
        }
        if n == 0 {
            return Err(Error::domain("grid level must be >= 1"));
        }
        if d as u64 * n as u64 > 62 {
            return Err(Error::domain(format!(
                "2^(n·d) cells with n = {n}, d = {d} overflow"
            )));
        }
        Ok(DyadicGrid { d, edge, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    /// The same cube at another level.
    pub fn with_level(&self, n: u32) -> Result<Self> {
        Self::new(self.d, self.edge, n)
    }

    /// `|P_k| = 2^{kd}`.
    pub fn num_centers(&self, k: u32) -> u64 {
        1u64 << (k as u64 * self.d as u64)
    }

    /// Length of a branch from a level-`(k-1)` center to a level-`k` center.
    pub fn branch_length(&self, k: u32) -> f64 {
        (self.d as f64).sqrt() * self.edge / 2f64.powi(k as i32 + 1)
    }

    pub fn coords(&self, k: u32, idx: u64) -> Vec<u64> {
        let mask = (1u64 << k) - 1;
        (0..self.d)
            .map(|j| (idx >> (k as usize * (self.d - 1 - j))) & mask)
            .collect()
    }

    pub fn index(&self, k: u32, coords: &[u64]) -> u64 {
        coords.iter().fold(0u64, |acc, &c| (acc << k) | c)
    }

    pub fn center(&self, k: u32, idx: u64) -> Point {
        let scale = 2f64.powi(k as i32);
        self.coords(k, idx)
            .into_iter()
            .map(|i| self.edge * ((i as f64 + 0.5) / scale - 0.5))
            .collect()
    }

    /// Index at level `k - 1` of the cube containing cube `idx` of level `k`.
    pub fn parent(&self, k: u32, idx: u64) -> u64 {
        let c: Vec<u64> = self.coords(k, idx).into_iter().map(|i| i >> 1).collect();
        self.index(k - 1, &c)
    }

    /// The level-`n` cube a point is assigned to: among the closed cubes
    /// containing it, the one of lowest index.
    pub fn cell_of(&self, x: &[f64]) -> Result<u64> {
        if x.len() != self.d {
            return Err(Error::domain(format!(
                "point of dimension {} in a {}-dimensional grid",
                x.len(),
                self.d
            )));
        }
        let cells = 1u64 << self.n;
        let h = self.edge / cells as f64;
        let mut coords = Vec::with_capacity(self.d);
        for &xi in x {
            if !(xi.abs() <= self.edge / 2.0 + TOL) {
                return Err(Error::domain(format!(
                    "point {x:?} lies outside the cube of edge {}",
                    self.edge
                )));
            }
            let t = (xi + self.edge / 2.0) / h;
            let c = (t.ceil() - 1.0).clamp(0.0, (cells - 1) as f64);
            coords.push(c as u64);
        }
        Ok(self.index(self.n, &coords))
    }
}

/// Level-`n` masses by cell index; only positive masses are kept.
fn cell_masses(mu: &Measure, grid: &DyadicGrid) -> Result<BTreeMap<u64, f64>> {
    if mu.dim() != grid.d {
        return Err(Error::domain(format!(
            "measure of dimension {} on a {}-dimensional grid",
            mu.dim(),
            grid.d
        )));
    }
    let mut out = BTreeMap::new();
    match mu {
        Measure::Atomic(a) => {
            for atom in a.atoms() {
                *out.entry(grid.cell_of(&atom.point)?).or_insert(0.0) += atom.mass;
            }
        }
        Measure::Lebesgue(l) => lebesgue_cells(l, grid, &mut out)?,
    }
    Ok(out)
}

fn lebesgue_cells(l: &LebesgueSpec, grid: &DyadicGrid, out: &mut BTreeMap<u64, f64>) -> Result<()> {
    l.check()?;
    if l.edge > grid.edge + TOL {
        return Err(Error::domain(format!(
            "Lebesgue cube of edge {} exceeds the grid cube of edge {}",
            l.edge, grid.edge
        )));
    }
    if grid.num_centers(grid.n) > MAX_DENSE_CELLS {
        return Err(Error::domain("too many cells for a Lebesgue measure"));
    }
    let cells = 1u64 << grid.n;
    let h = grid.edge / cells as f64;
    // fraction of the support's extent covered by each one-dimensional cell
    let frac: Vec<f64> = (0..cells)
        .map(|i| {
            let lo = -grid.edge / 2.0 + i as f64 * h;
            let overlap = (lo + h).min(l.edge / 2.0) - lo.max(-l.edge / 2.0);
            overlap.max(0.0) / l.edge
        })
        .collect();
    for idx in 0..grid.num_centers(grid.n) {
        let w: f64 = grid
            .coords(grid.n, idx)
            .into_iter()
            .map(|c| frac[c as usize])
            .product();
        if w > 0.0 {
            out.insert(idx, l.mass * w);
        }
    }
    Ok(())
}

/// `μ_n = Σ μ(Q̂_i) δ_{x_i}` over the level-`n` centers `x_i`, where points on
/// shared faces belong to the lowest-indexed cube.
pub fn approximate_measure(mu: &Measure, grid: &DyadicGrid) -> Result<AtomicMeasure> {
    let masses = cell_masses(mu, grid)?;
    AtomicMeasure::new(
        masses
            .into_iter()
            .map(|(idx, mass)| Atom {
                point: grid.center(grid.n, idx),
                mass,
            })
            .collect(),
    )
}

/// Maps atoms sitting on level-`n` centers back to their cell indices.
fn support_cells(mu_n: &AtomicMeasure, grid: &DyadicGrid) -> Result<BTreeMap<u64, f64>> {
    let mut out = BTreeMap::new();
    for atom in mu_n.atoms() {
        let idx = grid.cell_of(&atom.point)?;
        let c = grid.center(grid.n, idx);
        if c.iter().zip(&atom.point).any(|(a, b)| (a - b).abs() > TOL) {
            return Err(Error::domain(format!(
                "atom at {:?} is not a level-{} center",
                atom.point, grid.n
            )));
        }
        *out.entry(idx).or_insert(0.0) += atom.mass;
    }
    Ok(out)
}

/// Accumulated masses for levels `1..=n` (entry `k - 1` holds level `k`).
fn level_masses(grid: &DyadicGrid, leaf: BTreeMap<u64, f64>) -> Vec<BTreeMap<u64, f64>> {
    let n = grid.n as usize;
    let mut levels = vec![BTreeMap::new(); n];
    levels[n - 1] = leaf;
    for k in (2..=grid.n).rev() {
        let mut up = BTreeMap::new();
        for (&idx, &m) in &levels[k as usize - 1] {
            *up.entry(grid.parent(k, idx)).or_insert(0.0) += m;
        }
        levels[k as usize - 2] = up;
    }
    levels
}

#[derive(Debug, Clone)]
pub struct DyadicPlan {
    pub network: Network,
    /// Level `k` of each branch (the level of the center at its tip), aligned
    /// with `network.branches()`.
    pub levels: Vec<u32>,
}

/// The dyadic plan: every level-`k` center with positive mass below it is
/// joined to its level-`(k-1)` parent center (the origin for `k = 1`).
pub fn build_dyadic_plan(mu_n: &AtomicMeasure, grid: &DyadicGrid) -> Result<DyadicPlan> {
    let levels = level_masses(grid, support_cells(mu_n, grid)?);
    let total: usize = levels.iter().map(BTreeMap::len).sum();
    let mut specs = Vec::with_capacity(total);
    let mut branch_levels = Vec::with_capacity(total);
    let mut ids_above: BTreeMap<u64, BranchId> = BTreeMap::new();
    for k in 1..=grid.n {
        let mut ids = BTreeMap::new();
        for (&idx, &m) in &levels[k as usize - 1] {
            let id = BranchId(specs.len() as u64 + 1);
            let parent = (k > 1).then(|| ids_above[&grid.parent(k, idx)]);
            specs.push(BranchSpec {
                id,
                parent,
                end: grid.center(k, idx),
                multiplicity: MultiplicityProfile::constant(m)?,
            });
            branch_levels.push(k);
            ids.insert(idx, id);
        }
        ids_above = ids;
    }
    Ok(DyadicPlan {
        network: Network::new(vec![0.0; grid.d], specs)?,
        levels: branch_levels,
    })
}

/// Dyadic plan of a measure at the grid's level.
pub fn dyadic_plan_for(mu: &Measure, grid: &DyadicGrid) -> Result<DyadicPlan> {
    build_dyadic_plan(&approximate_measure(mu, grid)?, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    /// From a level-`(k-1)` center to a level-`k` center.
    Dyadic,
    /// Straight from the origin to a center whose accumulated mass reached `z0`.
    Shortcut,
    /// Straight from the origin to a level-`n0` center, carrying what is left.
    Terminal,
}

#[derive(Debug, Clone)]
pub struct HybridPlan {
    pub network: Network,
    /// Aligned with `network.branches()`.
    pub kinds: Vec<BranchKind>,
    /// Level of the center at each branch's tip.
    pub levels: Vec<u32>,
    pub n0: u32,
    pub z0: f64,
}

impl HybridPlan {
    pub fn shortcuts(&self) -> Vec<BranchId> {
        self.ids_of(BranchKind::Shortcut)
    }

    pub fn terminals(&self) -> Vec<BranchId> {
        self.ids_of(BranchKind::Terminal)
    }

    pub fn shortcut_count(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| **k == BranchKind::Shortcut)
            .count()
    }

    fn ids_of(&self, kind: BranchKind) -> Vec<BranchId> {
        self.network
            .branches()
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == kind)
            .map(|(b, _)| b.id)
            .collect()
    }
}

/// Power-law parameters of a flux usable for the hybrid construction.
fn hybrid_params(f: &FluxFunction, d: usize) -> Result<(f64, f64)> {
    let (c, beta) = f
        .power_params()
        .ok_or_else(|| Error::domain("the hybrid construction needs a power-law flux"))?;
    let floor = 1.0 - 1.0 / d as f64;
    if !(beta > floor) {
        return Err(Error::Regime(format!(
            "hybrid construction needs beta > 1 - 1/d = {floor}, got {beta}"
        )));
    }
    Ok((c, beta))
}

/// Smallest level `n0 ≥ 1` with
/// `c(1-β)√d L / (2^{n0}(1 - 2^{-(1-d(1-β))})) < z0^{1-β}`.
pub fn hybrid_min_level(grid: &DyadicGrid, f: &FluxFunction, z0: f64) -> Result<u32> {
    if !(z0.is_finite() && z0 > 0.0) {
        return Err(Error::domain(format!("z0 must be > 0, got {z0}")));
    }
    let (c, beta) = hybrid_params(f, grid.d)?;
    let d = grid.d as f64;
    let gap = 1.0 - d * (1.0 - beta);
    let k = c * (1.0 - beta) * d.sqrt() * grid.edge / (1.0 - 2f64.powf(-gap));
    let target = z0.powf(1.0 - beta);
    (1..=1100u32)
        .find(|&n| k / 2f64.powi(n as i32) < target)
        .ok_or_else(|| Error::domain(format!("no admissible level for z0 = {z0}")))
}

/// Hybrid plan: sweeping from `P_n` up to `P_{n0}`, a center whose
/// accumulated mass reaches `z0` is joined straight to the origin; otherwise
/// the mass moves one level up along a dyadic branch. Whatever reaches
/// `P_{n0}` goes straight to the origin.
pub fn build_hybrid_plan(
    mu_n: &AtomicMeasure,
    grid: &DyadicGrid,
    f: &FluxFunction,
    z0: f64,
) -> Result<HybridPlan> {
    let n0 = hybrid_min_level(grid, f, z0)?;
    if grid.n < n0 {
        return Err(Error::LevelTooCoarse {
            n: grid.n,
            required: n0,
        });
    }
    // accumulated mass and kind of the branch ending at each center, levels n0..=n
    let span = (grid.n - n0 + 1) as usize;
    let mut acc: Vec<BTreeMap<u64, f64>> = vec![BTreeMap::new(); span];
    let mut kinds: Vec<BTreeMap<u64, BranchKind>> = vec![BTreeMap::new(); span];
    acc[span - 1] = support_cells(mu_n, grid)?;
    for k in (n0..=grid.n).rev() {
        let slot = (k - n0) as usize;
        let level = std::mem::take(&mut acc[slot]);
        let mut up = BTreeMap::new();
        for (&idx, &m) in &level {
            let kind = if k == n0 {
                BranchKind::Terminal
            } else if m >= z0 {
                BranchKind::Shortcut
            } else {
                *up.entry(grid.parent(k, idx)).or_insert(0.0) += m;
                BranchKind::Dyadic
            };
            kinds[slot].insert(idx, kind);
        }
        acc[slot] = level;
        if k > n0 {
            let below = &mut acc[slot - 1];
            for (idx, m) in up {
                *below.entry(idx).or_insert(0.0) += m;
            }
        }
    }

    let mut specs = Vec::new();
    let mut out_kinds = Vec::new();
    let mut out_levels = Vec::new();
    let mut ids_above: BTreeMap<u64, BranchId> = BTreeMap::new();
    for k in n0..=grid.n {
        let slot = (k - n0) as usize;
        let mut ids = BTreeMap::new();
        for (&idx, &kind) in &kinds[slot] {
            let id = BranchId(specs.len() as u64 + 1);
            let parent = match kind {
                BranchKind::Dyadic => Some(ids_above[&grid.parent(k, idx)]),
                _ => None,
            };
            specs.push(BranchSpec {
                id,
                parent,
                end: grid.center(k, idx),
                multiplicity: MultiplicityProfile::constant(acc[slot][&idx])?,
            });
            out_kinds.push(kind);
            out_levels.push(k);
            ids.insert(idx, id);
        }
        ids_above = ids;
    }
    Ok(HybridPlan {
        network: Network::new(vec![0.0; grid.d], specs)?,
        kinds: out_kinds,
        levels: out_levels,
        n0,
        z0,
    })
}

/// Largest distance from the origin to a point of the cube, `√d L / 2`.
pub fn cube_radius(grid: &DyadicGrid) -> f64 {
    norm(&vec![grid.edge / 2.0; grid.d])
}
