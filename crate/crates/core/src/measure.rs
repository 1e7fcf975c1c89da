//! Target measures: finite sums of point masses, plus the uniform (Lebesgue)
//! measure on a cube centered at the origin.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{norm, Point, TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub mass: f64,
}

/// `Σ m_i δ_{x_i}` with positive masses and pairwise distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    total_mass: f64,
}

impl AtomicMeasure {
    /// Builds the measure, merging atoms at identical points (first
    /// occurrence keeps its position in the list).
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let dim = match atoms.first() {
            Some(a) => a.point.len(),
            None => return Err(Error::domain("atomic measure needs at least one atom")),
        };
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut slot: HashMap<Vec<u64>, usize> = HashMap::with_capacity(atoms.len());
        for atom in atoms {
            if atom.point.len() != dim || dim == 0 {
                return Err(Error::domain("atoms must share a positive dimension"));
            }
            if !(atom.mass.is_finite() && atom.mass > 0.0) {
                return Err(Error::domain(format!(
                    "atom mass must be positive, got {}",
                    atom.mass
                )));
            }
            if atom.point.iter().any(|x| !x.is_finite()) {
                return Err(Error::domain("atom coordinates must be finite"));
            }
            // +0.0 and -0.0 are the same point
            let key: Vec<u64> = atom.point.iter().map(|x| (x + 0.0).to_bits()).collect();
            match slot.get(&key) {
                Some(&i) => merged[i].mass += atom.mass,
                None => {
                    slot.insert(key, merged.len());
                    merged.push(atom);
                }
            }
        }
        let total_mass = merged.iter().map(|a| a.mass).sum();
        Ok(AtomicMeasure {
            atoms: merged,
            total_mass,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].point.len()
    }

    /// Mass outside the open ball `B(0, r)`, i.e. of atoms with `|x| ≥ r`.
    pub fn mass_outside_ball(&self, r: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| norm(&a.point) >= r)
            .map(|a| a.mass)
            .sum()
    }

    /// `∫ φ dμ`.
    pub fn integrate(&self, phi: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.mass * phi(&a.point)).sum()
    }

    /// Whether all atoms lie in the closed cube of the given edge centered at
    /// the origin.
    pub fn inside_cube(&self, edge: f64) -> bool {
        self.atoms
            .iter()
            .all(|a| a.point.iter().all(|x| x.abs() <= edge / 2.0 + TOL))
    }
}

/// Uniform measure of total mass `mass` on the cube `[-edge/2, edge/2]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LebesgueSpec {
    pub dim: usize,
    pub edge: f64,
    pub mass: f64,
}

impl LebesgueSpec {
    pub fn new(dim: usize, edge: f64, mass: f64) -> Result<Self> {
        let s = LebesgueSpec { dim, edge, mass };
        s.check()?;
        Ok(s)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::domain("Lebesgue measure needs dim >= 1"));
        }
        if !(self.edge.is_finite() && self.edge > 0.0) {
            return Err(Error::domain("Lebesgue measure needs edge > 0"));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::domain("Lebesgue measure needs mass > 0"));
        }
        Ok(())
    }

    /// `∫ |x|² dμ = M·d·L²/12`.
    pub fn second_moment(&self) -> f64 {
        self.mass * self.dim as f64 * self.edge * self.edge / 12.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Atomic(AtomicMeasure),
    Lebesgue(LebesgueSpec),
}

impl Measure {
    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Atomic(m) => m.total_mass(),
            Measure::Lebesgue(l) => l.mass,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Atomic(m) => m.dim(),
            Measure::Lebesgue(l) => l.dim,
        }
    }
}
