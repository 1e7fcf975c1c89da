//! JSON forms of networks, measures and generator specs. Output objects have
//! sorted keys, and floats are written in shortest round-trip form, so
//! emitting a parsed document reproduces it byte for byte.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::measure::{Atom, AtomicMeasure, LebesgueSpec, Measure};
use crate::network::{BranchId, BranchSpec, MultiplicityProfile, Network, Piece, Point};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchRecord {
    pub id: BranchId,
    pub parent: Option<BranchId>,
    pub end: Point,
    pub multiplicity: Vec<Piece>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub root: Point,
    pub branches: Vec<BranchRecord>,
}

impl NetworkRecord {
    pub fn from_network(net: &Network) -> Self {
        NetworkRecord {
            root: net.root().to_vec(),
            branches: net
                .branches()
                .iter()
                .map(|b| BranchRecord {
                    id: b.id,
                    parent: b.parent,
                    end: b.end.clone(),
                    multiplicity: b.multiplicity.pieces().to_vec(),
                })
                .collect(),
        }
    }

    /// Assembles and validates.
    pub fn into_network(self) -> Result<Network> {
        let specs = self
            .branches
            .into_iter()
            .map(|b| {
                let multiplicity = MultiplicityProfile::new(b.multiplicity)
                    .map_err(|e| Error::at_branch(b.id, e))?;
                Ok(BranchSpec {
                    id: b.id,
                    parent: b.parent,
                    end: b.end,
                    multiplicity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(self.root, specs)
    }
}

/// Serializes any value with sorted object keys.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // round-tripping through Value sorts the keys (serde_json maps are ordered)
    let v: Value = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)?)
}

pub fn network_to_json(net: &Network) -> Result<String> {
    to_sorted_json(&NetworkRecord::from_network(net))
}

pub fn network_from_json(s: &str) -> Result<Network> {
    let rec: NetworkRecord = serde_json::from_str(s)?;
    rec.into_network()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureRecord {
    Atomic { atoms: Vec<Atom> },
    Lebesgue { lebesgue: LebesgueSpec },
}

impl MeasureRecord {
    pub fn into_measure(self) -> Result<Measure> {
        match self {
            MeasureRecord::Atomic { atoms } => Ok(Measure::Atomic(AtomicMeasure::new(atoms)?)),
            MeasureRecord::Lebesgue { lebesgue } => {
                lebesgue.check()?;
                Ok(Measure::Lebesgue(lebesgue))
            }
        }
    }

    pub fn from_measure(mu: &Measure) -> Self {
        match mu {
            Measure::Atomic(a) => MeasureRecord::Atomic {
                atoms: a.atoms().to_vec(),
            },
            Measure::Lebesgue(l) => MeasureRecord::Lebesgue { lebesgue: *l },
        }
    }
}

pub fn measure_from_json(s: &str) -> Result<Measure> {
    let rec: MeasureRecord = serde_json::from_str(s)?;
    rec.into_measure()
}

pub fn measure_to_json(mu: &Measure) -> Result<String> {
    to_sorted_json(&MeasureRecord::from_measure(mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawRecord {
    pub c: f64,
    pub beta: f64,
}

/// `{"measure": ..., "d", "L", "n", "f": {"c", "beta"}, "z0"}`; a present
/// `z0` asks for the hybrid plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub measure: MeasureRecord,
    pub d: usize,
    #[serde(rename = "L")]
    pub edge: f64,
    pub n: u32,
    pub f: PowerLawRecord,
    #[serde(default)]
    pub z0: Option<f64>,
}

pub fn generator_from_json(s: &str) -> Result<GeneratorSpec> {
    Ok(serde_json::from_str(s)?)
}
