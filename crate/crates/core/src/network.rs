//! Finite branched networks: straight branches oriented from the root toward
//! the tips, each carrying a nonincreasing step multiplicity.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for masses and coordinates.
pub const TOL: f64 = 1e-12;

pub type Point = Vec<f64>;

pub fn distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn same_point(p: &[f64], q: &[f64]) -> bool {
    p.len() == q.len() && p.iter().zip(q).all(|(x, y)| (x - y).abs() <= TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchId(pub u64);

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One constant piece of a multiplicity profile. `from` is measured from the
/// base of the branch; the piece holds on `(from, next.from]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(rename = "from_s")]
    pub from: f64,
    pub value: f64,
}

/// Left-continuous, nonincreasing step function on a branch, in coordinates
/// local to the branch (`0` at the base).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityProfile {
    pieces: Vec<Piece>,
}

impl MultiplicityProfile {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        let Some(first) = pieces.first_mut() else {
            return Err(Error::domain(
                "multiplicity profile needs at least one piece",
            ));
        };
        if first.from.abs() > TOL {
            return Err(Error::domain(format!(
                "first multiplicity piece must start at 0, got {}",
                first.from
            )));
        }
        first.from = 0.0;
        for p in &pieces {
            if !(p.from.is_finite() && p.value.is_finite()) {
                return Err(Error::domain("multiplicity pieces must be finite"));
            }
            if p.value < 0.0 {
                return Err(Error::domain(format!("negative multiplicity {}", p.value)));
            }
        }
        for w in pieces.windows(2) {
            if w[1].from <= w[0].from {
                return Err(Error::domain(format!(
                    "multiplicity breakpoints must increase: {} then {}",
                    w[0].from, w[1].from
                )));
            }
            if w[1].value > w[0].value + TOL {
                return Err(Error::domain(format!(
                    "multiplicity must be nonincreasing: {} then {}",
                    w[0].value, w[1].value
                )));
            }
        }
        Ok(MultiplicityProfile { pieces })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![Piece { from: 0.0, value }])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `m(σ)` with the left-continuous convention; `σ ≤ 0` gives the right
    /// limit at the base.
    pub fn value_at(&self, sigma: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p.from < sigma);
        self.pieces[k.saturating_sub(1)].value
    }

    /// `m(0^+)`.
    pub fn at_base(&self) -> f64 {
        self.pieces[0].value
    }

    /// `m(ℓ)`, the value at the tip.
    pub fn at_tip(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].value
    }

    /// Constant pieces clipped to `[0, length]`, as `(lo, hi, value)`.
    pub fn intervals(&self, length: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.pieces.len();
        (0..n).filter_map(move |k| {
            let lo = self.pieces[k].from;
            let hi = if k + 1 < n {
                self.pieces[k + 1].from.min(length)
            } else {
                length
            };
            (hi > lo).then_some((lo, hi, self.pieces[k].value))
        })
    }

    /// Restriction to `[lo, hi]`, re-based so that `lo` maps to `0`.
    pub fn restrict(&self, lo: f64, hi: f64) -> MultiplicityProfile {
        let mut pieces = vec![Piece {
            from: 0.0,
            value: self.value_at(lo + TOL),
        }];
        for p in &self.pieces {
            if p.from > lo + TOL && p.from < hi - TOL {
                pieces.push(Piece {
                    from: p.from - lo,
                    value: p.value,
                });
            }
        }
        MultiplicityProfile { pieces }
    }
}

/// A straight branch. `a` and `b` are arc-length positions measured from the
/// root along the path through the branch's ancestors, so `b - a` is the
/// branch length.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: BranchId,
    pub parent: Option<BranchId>,
    pub start: Point,
    pub end: Point,
    pub a: f64,
    pub b: f64,
    pub multiplicity: MultiplicityProfile,
}

impl Branch {
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Multiplicity at absolute arc length `s`.
    pub fn multiplicity_at(&self, s: f64) -> f64 {
        self.multiplicity.value_at(s - self.a)
    }
}

/// Input record for network assembly; the start point and arc-length range
/// are derived from the parent chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSpec {
    pub id: BranchId,
    pub parent: Option<BranchId>,
    pub end: Point,
    pub multiplicity: MultiplicityProfile,
}

#[derive(Debug, Clone)]
pub struct Network {
    root: Point,
    branches: Vec<Branch>,
    index: HashMap<BranchId, usize>,
    children: Vec<Vec<usize>>,
    root_children: Vec<usize>,
}

impl Network {
    /// Builds the structure without checking network invariants; see
    /// [`validate_network`]. Fails only on duplicate ids, unknown parents or
    /// mixed dimensions.
    pub fn assemble(root: Point, specs: Vec<BranchSpec>) -> Result<Network> {
        let dim = root.len();
        if dim == 0 {
            return Err(Error::domain("root point has dimension 0"));
        }
        let mut index = HashMap::with_capacity(specs.len());
        for (i, s) in specs.iter().enumerate() {
            if s.end.len() != dim {
                return Err(Error::domain(format!(
                    "branch {} has dimension {}, root has {dim}",
                    s.id,
                    s.end.len()
                )));
            }
            if index.insert(s.id, i).is_some() {
                return Err(Error::domain(format!("duplicate branch id {}", s.id)));
            }
        }
        let mut children = vec![Vec::new(); specs.len()];
        let mut root_children = Vec::new();
        let mut parent_idx = Vec::with_capacity(specs.len());
        for (i, s) in specs.iter().enumerate() {
            match s.parent {
                None => {
                    root_children.push(i);
                    parent_idx.push(None);
                }
                Some(p) => {
                    let &pi = index.get(&p).ok_or_else(|| {
                        Error::domain(format!("branch {} has unknown parent {p}", s.id))
                    })?;
                    children[pi].push(i);
                    parent_idx.push(Some(pi));
                }
            }
        }

        let starts: Vec<Point> = parent_idx
            .iter()
            .map(|p| match p {
                None => root.clone(),
                Some(pi) => specs[*pi].end.clone(),
            })
            .collect();
        let lengths: Vec<f64> = specs
            .iter()
            .zip(&starts)
            .map(|(s, st)| distance(st, &s.end))
            .collect();

        // Arc-length offsets follow the parent chain; branches on a cycle are
        // never reached and keep a = 0.
        let mut a = vec![0.0; specs.len()];
        let mut queue: VecDeque<usize> = root_children.iter().copied().collect();
        while let Some(i) = queue.pop_front() {
            for &j in &children[i] {
                a[j] = a[i] + lengths[i];
                queue.push_back(j);
            }
        }

        let branches = specs
            .into_iter()
            .zip(starts)
            .enumerate()
            .map(|(i, (s, start))| Branch {
                id: s.id,
                parent: s.parent,
                start,
                end: s.end,
                a: a[i],
                b: a[i] + lengths[i],
                multiplicity: s.multiplicity,
            })
            .collect();

        Ok(Network {
            root,
            branches,
            index,
            children,
            root_children,
        })
    }

    /// Assembles and rejects any network with invariant violations.
    pub fn new(root: Point, specs: Vec<BranchSpec>) -> Result<Network> {
        let net = Self::assemble(root, specs)?;
        let violations = validate_network(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::Validation(violations))
        }
    }

    pub fn root(&self) -> &[f64] {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.root.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn index_of(&self, id: BranchId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn branch(&self, id: BranchId) -> Option<&Branch> {
        self.index_of(id).map(|i| &self.branches[i])
    }

    /// Indices of the branches leaving the tip of branch `i` (the set O(i)).
    pub fn children_of(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn root_children(&self) -> &[usize] {
        &self.root_children
    }

    /// Parent index of branch `i`.
    pub fn parent_of(&self, i: usize) -> Option<usize> {
        self.branches[i].parent.and_then(|p| self.index_of(p))
    }

    pub fn total_length(&self) -> f64 {
        self.branches.iter().map(Branch::length).sum()
    }

    /// Breadth-first order from the root; shorter than `len()` iff some
    /// branches sit on a cycle.
    fn reachable_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.branches.len());
        let mut queue: VecDeque<usize> = self.root_children.iter().copied().collect();
        let mut seen = vec![false; self.branches.len()];
        while let Some(i) = queue.pop_front() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            order.push(i);
            queue.extend(self.children[i].iter().copied());
        }
        order
    }

    /// Topological layers as branch indices; see [`topo_layers`].
    pub fn layer_indices(&self) -> Result<Vec<Vec<usize>>> {
        let order = self.reachable_order();
        if order.len() < self.branches.len() {
            let mut seen = vec![false; self.branches.len()];
            for &i in &order {
                seen[i] = true;
            }
            let cyclic = (0..self.branches.len())
                .filter(|&i| !seen[i])
                .map(|i| self.branches[i].id)
                .collect();
            return Err(Error::Topology(cyclic));
        }
        let mut height = vec![0usize; self.branches.len()];
        for &i in order.iter().rev() {
            height[i] = 1 + self.children[i]
                .iter()
                .map(|&j| height[j])
                .max()
                .unwrap_or(0);
        }
        let depth = height.iter().copied().max().unwrap_or(0);
        let mut layers = vec![Vec::new(); depth];
        for (i, &h) in height.iter().enumerate() {
            layers[h - 1].push(i);
        }
        Ok(layers)
    }
}

/// Partitions the branches into layers `I_1, I_2, …`: `I_1` holds the
/// branches without children, and a branch joins the first layer after all
/// of its children have been placed.
pub fn topo_layers(net: &Network) -> Result<Vec<Vec<BranchId>>> {
    Ok(net
        .layer_indices()?
        .into_iter()
        .map(|layer| layer.into_iter().map(|i| net.branches[i].id).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    ZeroLength,
    LengthMismatch,
    ProfileOutOfRange,
    DetachedStart,
    Cycle,
    FluxConsistency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub branch: BranchId,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "branch {}: {:?}: {}",
            self.branch, self.rule, self.detail
        )
    }
}

/// Lists every violated network invariant. Empty iff the network is valid.
pub fn validate_network(net: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |branch, rule, detail: String| {
        out.push(Violation {
            branch,
            rule,
            detail,
        })
    };

    for (i, br) in net.branches.iter().enumerate() {
        let geometric = distance(&br.start, &br.end);
        let len = br.length();
        if !(len > TOL) {
            push(br.id, Rule::ZeroLength, format!("length {len}"));
        } else if (len - geometric).abs() > TOL * geometric.max(1.0) {
            push(
                br.id,
                Rule::LengthMismatch,
                format!("b - a = {len} but |end - start| = {geometric}"),
            );
        }
        let last = br
            .multiplicity
            .pieces()
            .last()
            .map(|p| p.from)
            .unwrap_or(0.0);
        if last > 0.0 && last >= len {
            push(
                br.id,
                Rule::ProfileOutOfRange,
                format!("breakpoint {last} at or beyond branch length {len}"),
            );
        }
        let anchor = match net.parent_of(i) {
            None => net.root(),
            Some(p) => &net.branches[p].end[..],
        };
        if !same_point(anchor, &br.start) {
            push(
                br.id,
                Rule::DetachedStart,
                "start does not match parent tip".into(),
            );
        }
        let kids = net.children_of(i);
        if !kids.is_empty() {
            let tip = br.multiplicity.at_tip();
            let outflow: f64 = kids
                .iter()
                .map(|&j| net.branches[j].multiplicity.at_base())
                .sum();
            if outflow > tip + TOL {
                push(
                    br.id,
                    Rule::FluxConsistency,
                    format!("children carry {outflow} but the tip carries {tip}"),
                );
            }
        }
    }

    if let Err(Error::Topology(ids)) = net.layer_indices() {
        for id in ids {
            push(id, Rule::Cycle, "not reachable from the root".into());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: u64, parent: Option<u64>, end: &[f64], m: f64) -> BranchSpec {
        BranchSpec {
            id: BranchId(id),
            parent: parent.map(BranchId),
            end: end.to_vec(),
            multiplicity: MultiplicityProfile::constant(m).unwrap(),
        }
    }

    /// Five branches: O(1) = {2, 3}, O(3) = {4, 5}.
    pub(crate) fn five_branch_tree() -> Network {
        Network::new(
            vec![0.0, 0.0],
            vec![
                spec(1, None, &[0.0, 1.0], 3.0),
                spec(2, Some(1), &[-1.0, 2.0], 1.0),
                spec(3, Some(1), &[1.0, 2.0], 2.0),
                spec(4, Some(3), &[0.5, 3.0], 1.0),
                spec(5, Some(3), &[2.0, 3.0], 1.0),
            ],
        )
        .unwrap()
    }

    fn ids(v: &[u64]) -> Vec<BranchId> {
        v.iter().map(|&i| BranchId(i)).collect()
    }

    #[test]
    fn layers_of_five_branch_tree() {
        let net = five_branch_tree();
        let layers = topo_layers(&net).unwrap();
        assert_eq!(layers, vec![ids(&[2, 4, 5]), ids(&[3]), ids(&[1])]);
    }

    #[test]
    fn layers_of_leaf_and_chain() {
        let single = Network::new(vec![0.0], vec![spec(1, None, &[1.0], 1.0)]).unwrap();
        assert_eq!(topo_layers(&single).unwrap(), vec![ids(&[1])]);

        let chain = Network::new(
            vec![0.0],
            vec![
                spec(1, None, &[1.0], 1.0),
                spec(2, Some(1), &[2.0], 1.0),
                spec(3, Some(2), &[3.0], 1.0),
            ],
        )
        .unwrap();
        assert_eq!(
            topo_layers(&chain).unwrap(),
            vec![ids(&[3]), ids(&[2]), ids(&[1])]
        );
        let b3 = chain.branch(BranchId(3)).unwrap();
        assert_eq!((b3.a, b3.b), (2.0, 3.0));
    }

    #[test]
    fn cycle_is_a_topology_error() {
        let net = Network::assemble(
            vec![0.0],
            vec![
                spec(1, None, &[1.0], 1.0),
                spec(2, Some(3), &[2.0], 1.0),
                spec(3, Some(2), &[3.0], 1.0),
            ],
        )
        .unwrap();
        match topo_layers(&net) {
            Err(Error::Topology(c)) => assert_eq!(c, ids(&[2, 3])),
            other => panic!("expected topology error, got {other:?}"),
        }
        let v = validate_network(&net);
        assert_eq!(v.iter().filter(|x| x.rule == Rule::Cycle).count(), 2);
    }

    #[test]
    fn valid_tree_has_no_violations() {
        assert!(validate_network(&five_branch_tree()).is_empty());
    }

    #[test]
    fn flux_excess_is_reported() {
        let net = Network::assemble(
            vec![0.0, 0.0],
            vec![
                spec(1, None, &[0.0, 1.0], 1.0),
                spec(2, Some(1), &[1.0, 1.0], 0.6),
                spec(3, Some(1), &[-1.0, 1.0], 0.6),
            ],
        )
        .unwrap();
        let v = validate_network(&net);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::FluxConsistency);
        assert_eq!(v[0].branch, BranchId(1));
    }

    #[test]
    fn zero_length_is_reported() {
        let net = Network::assemble(
            vec![0.0, 0.0],
            vec![
                spec(1, None, &[0.0, 1.0], 1.0),
                spec(2, Some(1), &[0.0, 1.0], 1.0),
            ],
        )
        .unwrap();
        let v = validate_network(&net);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].branch, v[0].rule), (BranchId(2), Rule::ZeroLength));
    }

    #[test]
    fn assembly_rejects_bad_ids() {
        let dup = Network::assemble(
            vec![0.0],
            vec![spec(1, None, &[1.0], 1.0), spec(1, None, &[-1.0], 1.0)],
        );
        assert!(dup.is_err());
        let orphan = Network::assemble(vec![0.0], vec![spec(1, Some(9), &[1.0], 1.0)]);
        assert!(orphan.is_err());
        let mixed = Network::assemble(vec![0.0], vec![spec(1, None, &[1.0, 0.0], 1.0)]);
        assert!(mixed.is_err());
    }

    #[test]
    fn profile_rules() {
        let p = |v: &[(f64, f64)]| {
            MultiplicityProfile::new(
                v.iter()
                    .map(|&(from, value)| Piece { from, value })
                    .collect(),
            )
        };
        assert!(p(&[]).is_err());
        assert!(p(&[(0.1, 1.0)]).is_err());
        assert!(p(&[(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(p(&[(0.0, 1.0), (0.0, 0.5)]).is_err());
        assert!(p(&[(0.0, -1.0)]).is_err());

        let m = p(&[(0.0, 3.0), (0.5, 2.0), (1.0, 1.0)]).unwrap();
        assert_eq!(m.value_at(0.0), 3.0);
        assert_eq!(m.value_at(0.5), 3.0);
        assert_eq!(m.value_at(0.5000001), 2.0);
        assert_eq!(m.value_at(1.0), 2.0);
        assert_eq!(m.value_at(1.5), 1.0);
        assert_eq!(m.at_tip(), 1.0);

        let r = m.restrict(0.25, 1.25);
        assert_eq!(
            r.pieces(),
            &[
                Piece {
                    from: 0.0,
                    value: 3.0
                },
                Piece {
                    from: 0.25,
                    value: 2.0
                },
                Piece {
                    from: 0.75,
                    value: 1.0
                },
            ]
        );
        let iv: Vec<_> = m.intervals(1.2).collect();
        assert_eq!(iv, vec![(0.0, 0.5, 3.0), (0.5, 1.0, 2.0), (1.0, 1.2, 1.0)]);
    }
}
