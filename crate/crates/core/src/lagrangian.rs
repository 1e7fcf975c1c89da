//! Finite Lagrangian plans: groups of particles of positive mass, each moving
//! along a polyline from the origin. Two groups are in the same state at
//! arc length `s` iff their paths agree on `[0, s]`.
//!
//! From a plan we build the maximal ε-good paths, split them into elementary
//! branches and solve the weights on the resulting network, which gives the
//! weights `W^ε(θ, s)` on the ε-truncated plan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::network::{
    distance, same_point, BranchId, BranchSpec, MultiplicityProfile, Network, Piece, Point, TOL,
};
use crate::solver::{compute_weights_indexed, WeightProfile};

/// Arc-length parameterized polyline. Consecutive collinear segments are
/// merged on construction so that geometric prefixes can be compared vertex
/// by vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
    cum: Vec<f64>,
}

fn direction(p: &[f64], q: &[f64]) -> Point {
    let len = distance(p, q);
    p.iter().zip(q).map(|(a, b)| (b - a) / len).collect()
}

fn same_direction(u: &[f64], v: &[f64]) -> bool {
    u.iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-12)
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::domain("path needs at least one vertex"));
        };
        let dim = first.len();
        if dim == 0 || vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::domain(
                "path vertices must share a positive dimension",
            ));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("path coordinates must be finite"));
        }
        for w in vertices.windows(2) {
            if same_point(&w[0], &w[1]) {
                return Err(Error::domain("consecutive path vertices must be distinct"));
            }
        }
        let mut kept: Vec<Point> = vec![vertices[0].clone()];
        for k in 1..vertices.len() {
            let n = kept.len();
            if n >= 2 {
                let d0 = direction(&kept[n - 2], &kept[n - 1]);
                let d1 = direction(&kept[n - 1], &vertices[k]);
                if same_direction(&d0, &d1) {
                    kept[n - 1] = vertices[k].clone();
                    continue;
                }
            }
            kept.push(vertices[k].clone());
        }
        Ok(Self::from_canonical(kept))
    }

    fn from_canonical(vertices: Vec<Point>) -> Self {
        let mut cum = Vec::with_capacity(vertices.len());
        cum.push(0.0);
        for w in vertices.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + distance(&w[0], &w[1]));
        }
        Polyline { vertices, cum }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Arc length at each vertex.
    pub fn arc_lengths(&self) -> &[f64] {
        &self.cum
    }

    pub fn length(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Point at arc length `s` (clamped to `[0, length]`). Vertices are
    /// returned exactly.
    pub fn point_at(&self, s: f64) -> Point {
        if self.vertices.len() == 1 || s <= 0.0 {
            return self.vertices[0].clone();
        }
        let k = self.cum.partition_point(|&c| c < s - TOL);
        if k >= self.cum.len() {
            return self.vertices[self.vertices.len() - 1].clone();
        }
        if (self.cum[k] - s).abs() <= TOL {
            return self.vertices[k].clone();
        }
        let (p, q) = (&self.vertices[k - 1], &self.vertices[k]);
        let t = (s - self.cum[k - 1]) / (self.cum[k] - self.cum[k - 1]);
        p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
    }

    /// The restriction to `[0, s]`.
    pub fn prefix(&self, s: f64) -> Polyline {
        if s >= self.length() - TOL {
            return self.clone();
        }
        let k = self.cum.partition_point(|&c| c < s - TOL);
        let mut vertices = self.vertices[..k].to_vec();
        vertices.push(self.point_at(s));
        if vertices.len() >= 2 && same_point(&vertices[k - 1], &vertices[k]) {
            vertices.pop();
        }
        Self::from_canonical(vertices)
    }

    /// Largest `t` with both paths agreeing on `[0, t]`.
    pub fn common_prefix_len(&self, other: &Polyline) -> f64 {
        if !same_point(&self.vertices[0], &other.vertices[0]) {
            return 0.0;
        }
        let mut cum = 0.0;
        let mut k = 0;
        loop {
            if k + 1 >= self.vertices.len() || k + 1 >= other.vertices.len() {
                return cum;
            }
            if same_point(&self.vertices[k + 1], &other.vertices[k + 1]) {
                cum = self.cum[k + 1];
                k += 1;
                continue;
            }
            let u = direction(&self.vertices[k], &self.vertices[k + 1]);
            let v = direction(&other.vertices[k], &other.vertices[k + 1]);
            if same_direction(&u, &v) {
                let a = self.cum[k + 1] - self.cum[k];
                let b = other.cum[k + 1] - other.cum[k];
                return cum + a.min(b);
            }
            return cum;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleGroup {
    pub mass: f64,
    pub path: Polyline,
}

impl ParticleGroup {
    /// The stopping value `τ(θ)`.
    pub fn tau(&self) -> f64 {
        self.path.length()
    }
}

/// Serialized form of a plan: `{"groups": [{"mass": m, "path": [[x, ...], ...]}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanRecord {
    pub groups: Vec<GroupRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupRecord {
    pub mass: f64,
    pub path: Vec<Point>,
}

/// A finite plan. Stores the pairwise common-prefix lengths.
#[derive(Debug, Clone)]
pub struct ParticlePlan {
    groups: Vec<ParticleGroup>,
    total_mass: f64,
    cpl: Vec<Vec<f64>>,
}

impl ParticlePlan {
    pub fn new(groups: Vec<ParticleGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::domain("plan needs at least one group"));
        }
        let dim = groups[0].path.dim();
        for g in &groups {
            if !(g.mass.is_finite() && g.mass > 0.0) {
                return Err(Error::domain(format!(
                    "group mass must be positive, got {}",
                    g.mass
                )));
            }
            if g.path.dim() != dim {
                return Err(Error::domain("group paths must share a dimension"));
            }
            if g.path.vertices()[0].iter().any(|x| x.abs() > TOL) {
                return Err(Error::domain("every path must start at the origin"));
            }
        }
        let total_mass = groups.iter().map(|g| g.mass).sum();
        let n = groups.len();
        let mut cpl = vec![vec![0.0; n]; n];
        for i in 0..n {
            cpl[i][i] = groups[i].tau();
            for j in 0..i {
                let c = groups[i].path.common_prefix_len(&groups[j].path);
                cpl[i][j] = c;
                cpl[j][i] = c;
            }
        }
        let plan = ParticlePlan {
            groups,
            total_mass,
            cpl,
        };
        for g in 0..n {
            plan.check_positive(g)?;
        }
        Ok(plan)
    }

    pub fn from_record(rec: &PlanRecord) -> Result<Self> {
        let groups = rec
            .groups
            .iter()
            .map(|g| {
                Ok(ParticleGroup {
                    mass: g.mass,
                    path: Polyline::new(g.path.clone())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(groups)
    }

    pub fn to_record(&self) -> PlanRecord {
        PlanRecord {
            groups: self
                .groups
                .iter()
                .map(|g| GroupRecord {
                    mass: g.mass,
                    path: g.path.vertices().to_vec(),
                })
                .collect(),
        }
    }

    pub fn groups(&self) -> &[ParticleGroup] {
        &self.groups
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn dim(&self) -> usize {
        self.groups[0].path.dim()
    }

    /// Length of the common prefix of groups `g` and `h`.
    pub fn common_prefix(&self, g: usize, h: usize) -> f64 {
        self.cpl[g][h]
    }

    fn mult(&self, g: usize, s: f64) -> f64 {
        self.cpl[g]
            .iter()
            .zip(&self.groups)
            .filter(|(c, _)| **c >= s - TOL)
            .map(|(_, h)| h.mass)
            .sum()
    }

    fn check_positive(&self, g: usize) -> Result<()> {
        let tau = self.groups[g].tau();
        let value = self.mult(g, tau);
        if value > 0.0 {
            Ok(())
        } else {
            Err(Error::ZeroMultiplicity {
                group: g,
                s: tau,
                value,
            })
        }
    }

    /// `m(θ, s)`: the mass of all groups whose path agrees with group `g`'s
    /// on `[0, s]`.
    pub fn multiplicity(&self, g: usize, s: f64) -> Result<f64> {
        let group = self
            .groups
            .get(g)
            .ok_or_else(|| Error::domain(format!("no group {g}")))?;
        if !(s >= 0.0 && s <= group.tau() + TOL) {
            return Err(Error::domain(format!(
                "s = {s} outside [0, {}] for group {g}",
                group.tau()
            )));
        }
        Ok(self.mult(g, s))
    }

    /// `m(θ, ·)` on `[0, len]` as a step profile.
    fn profile(&self, g: usize, len: f64) -> MultiplicityProfile {
        let mut cuts: Vec<f64> = self.cpl[g]
            .iter()
            .copied()
            .filter(|&c| c > TOL && c < len - TOL)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= TOL);
        let mut pieces = Vec::with_capacity(cuts.len() + 1);
        let mut from = 0.0;
        for &c in cuts.iter().chain(std::iter::once(&len)) {
            pieces.push(Piece {
                from,
                value: self.mult(g, c),
            });
            from = c;
        }
        MultiplicityProfile::new(pieces).expect("multiplicity is nonincreasing along a path")
    }

    /// `τ_ε(θ) = max{s : m(θ, s) ≥ ε}` for group `g`.
    pub fn tau_eps(&self, g: usize, eps: f64) -> f64 {
        let mut by_len: Vec<(f64, f64)> = self.cpl[g]
            .iter()
            .zip(&self.groups)
            .map(|(&c, h)| (c, h.mass))
            .collect();
        by_len.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut acc = 0.0;
        let mut k = 0;
        while k < by_len.len() {
            let c = by_len[k].0;
            while k < by_len.len() && by_len[k].0 >= c - TOL {
                acc += by_len[k].1;
                k += 1;
            }
            if acc >= eps {
                return c;
            }
        }
        0.0
    }

    fn check_eps(&self, eps: f64) -> Result<()> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("eps must be > 0, got {eps}")));
        }
        if eps > self.total_mass * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "eps = {eps} exceeds the total mass {}",
                self.total_mass
            )));
        }
        Ok(())
    }
}

/// A maximal ε-good path, represented by the lowest-indexed group that
/// follows it, with its multiplicity profile `ĥm(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalPath {
    pub group: usize,
    pub path: Polyline,
    pub profile: MultiplicityProfile,
}

impl MaximalPath {
    pub fn length(&self) -> f64 {
        self.path.length()
    }
}

/// Maximal elements, in the prefix order, among the ε-good paths, ordered
/// by representative group. Groups truncated to length zero contribute none.
pub fn epsilon_good_maximal_paths(plan: &ParticlePlan, eps: f64) -> Result<Vec<MaximalPath>> {
    plan.check_eps(eps)?;
    let n = plan.groups.len();
    let tau: Vec<f64> = (0..n).map(|g| plan.tau_eps(g, eps)).collect();
    let mut out = Vec::new();
    'groups: for g in 0..n {
        if tau[g] <= TOL {
            continue;
        }
        for h in 0..n {
            if h == g || plan.cpl[g][h] < tau[g] - TOL {
                continue;
            }
            // g's truncation is a prefix of h's; drop it if strictly shorter
            // or equal with a lower representative
            if tau[h] > tau[g] + TOL || (tau[h] >= tau[g] - TOL && h < g) {
                continue 'groups;
            }
        }
        out.push(MaximalPath {
            group: g,
            path: plan.groups[g].path.prefix(tau[g]),
            profile: plan.profile(g, tau[g]),
        });
    }
    Ok(out)
}

/// One branch of a path cover, at path positions `(from, to]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverSegment {
    pub branch: usize,
    pub from: f64,
    pub to: f64,
}

/// Elementary branches of a family of paths, with the branches covering each
/// path in order.
#[derive(Debug, Clone)]
pub struct PathSplit {
    pub network: Network,
    pub covers: Vec<Vec<CoverSegment>>,
}

/// Bifurcation times `τ_ij` of a family of paths.
pub fn bifurcation_times(paths: &[MaximalPath]) -> Vec<Vec<f64>> {
    let n = paths.len();
    let mut tau = vec![vec![0.0; n]; n];
    for i in 0..n {
        tau[i][i] = paths[i].length();
        for j in 0..i {
            let t = paths[i].path.common_prefix_len(&paths[j].path);
            tau[i][j] = t;
            tau[j][i] = t;
        }
    }
    tau
}

/// Splits the paths at their bifurcation times, keeps each shared piece once
/// (on the lowest-indexed path through it) and subdivides pieces at polyline
/// corners so every branch is straight.
pub fn split_paths(paths: &[MaximalPath]) -> Result<PathSplit> {
    let Some(first) = paths.first() else {
        return Err(Error::domain("no paths to split"));
    };
    let dim = first.path.dim();
    let n = paths.len();
    let tau = bifurcation_times(paths);
    for j in 0..n {
        for i in 0..j {
            let (li, lj) = (paths[i].length(), paths[j].length());
            if tau[i][j] >= li.min(lj) - TOL {
                if (li - lj).abs() <= TOL {
                    return Err(Error::DuplicatePath(i, j));
                }
                return Err(Error::domain(format!(
                    "path {} is a prefix of path {}",
                    if li < lj { i } else { j },
                    if li < lj { j } else { i }
                )));
            }
        }
    }

    let owner = |j: usize, t: f64| (0..n).find(|&i| tau[i][j] >= t - TOL).unwrap();
    let mut specs: Vec<BranchSpec> = Vec::new();
    // kept branches of each path as (from, to, branch index)
    let mut own: Vec<Vec<CoverSegment>> = vec![Vec::new(); n];
    let mut covers: Vec<Vec<CoverSegment>> = vec![Vec::new(); n];

    for j in 0..n {
        let len = paths[j].length();
        let mut cuts: Vec<f64> = (0..n)
            .filter(|&i| i != j)
            .map(|i| tau[i][j])
            .filter(|&t| t > TOL && t < len - TOL)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= TOL);
        cuts.push(len);

        let mut lo = 0.0;
        for &hi in &cuts {
            let o = owner(j, hi);
            if o == j {
                let parent = if lo <= TOL {
                    None
                } else {
                    let p = owner(j, lo);
                    let seg = own[p]
                        .iter()
                        .find(|s| (s.to - lo).abs() <= TOL)
                        .ok_or_else(|| {
                            Error::Consistency(format!("no branch of path {p} ends at {lo}"))
                        })?;
                    Some(seg.branch)
                };
                let corners = paths[j]
                    .path
                    .arc_lengths()
                    .iter()
                    .copied()
                    .filter(|&c| c > lo + TOL && c < hi - TOL);
                let mut parent = parent;
                let mut from = lo;
                for to in corners.chain(std::iter::once(hi)) {
                    let idx = specs.len();
                    specs.push(BranchSpec {
                        id: BranchId(idx as u64 + 1),
                        parent: parent.map(|p: usize| BranchId(p as u64 + 1)),
                        end: paths[j].path.point_at(to),
                        multiplicity: paths[j].profile.restrict(from, to),
                    });
                    own[j].push(CoverSegment {
                        branch: idx,
                        from,
                        to,
                    });
                    parent = Some(idx);
                    from = to;
                }
            }
            let segs: Vec<CoverSegment> = own[o]
                .iter()
                .copied()
                .filter(|s| s.from >= lo - TOL && s.to <= hi + TOL)
                .collect();
            covers[j].extend(segs);
            lo = hi;
        }
    }

    let network = Network::new(vec![0.0; dim], specs)?;
    Ok(PathSplit { network, covers })
}

/// The elementary-branch network of a family of maximal paths.
pub fn path_split(paths: &[MaximalPath]) -> Result<Network> {
    Ok(split_paths(paths)?.network)
}

/// Weights on the ε-truncation of a plan.
#[derive(Debug, Clone)]
pub struct TruncationWeights {
    pub eps: f64,
    pub paths: Vec<MaximalPath>,
    pub split: PathSplit,
    pub weights: Vec<WeightProfile>,
    tau_eps: Vec<f64>,
    path_of_group: Vec<Option<usize>>,
    tau: Vec<f64>,
}

impl TruncationWeights {
    pub fn network(&self) -> &Network {
        &self.split.network
    }

    /// `τ_ε` of a group.
    pub fn tau_eps(&self, g: usize) -> f64 {
        self.tau_eps[g]
    }

    /// Maximal path followed by group `g` up to `τ_ε`, if it has one.
    pub fn path_of_group(&self, g: usize) -> Option<usize> {
        self.path_of_group[g]
    }

    /// `W^ε(θ, s)`; zero beyond `τ_ε(θ)`.
    pub fn weight(&self, g: usize, s: f64) -> Result<f64> {
        let tau = *self
            .tau
            .get(g)
            .ok_or_else(|| Error::domain(format!("no group {g}")))?;
        if !(s >= 0.0 && s <= tau + TOL) {
            return Err(Error::domain(format!(
                "s = {s} outside [0, {tau}] for group {g}"
            )));
        }
        let Some(p) = self.path_of_group[g] else {
            return Ok(0.0);
        };
        if s > self.tau_eps[g] + TOL {
            return Ok(0.0);
        }
        let cover = &self.split.covers[p];
        let k = cover
            .iter()
            .position(|c| c.to >= s - TOL)
            .unwrap_or(cover.len() - 1);
        let seg = cover[k];
        Ok(self.weights[seg.branch].eval(s - seg.from))
    }

    /// `∫_0^{upto} W^α / m` along path `p`, with `m` the branch multiplicity.
    fn path_integral(&self, p: usize, upto: f64, alpha: f64) -> f64 {
        let mut total = 0.0;
        for seg in &self.split.covers[p] {
            let hi = seg.to.min(upto);
            if hi <= seg.from {
                break;
            }
            let w = &self.weights[seg.branch];
            let br = &self.split.network.branches()[seg.branch];
            for (lo_l, hi_l, m) in br.multiplicity.intervals(hi - seg.from) {
                total += w.integral_pow_range(alpha, lo_l, hi_l) / m;
            }
        }
        total
    }
}

pub fn truncation_weights(
    plan: &ParticlePlan,
    eps: f64,
    f: &FluxFunction,
) -> Result<TruncationWeights> {
    let paths = epsilon_good_maximal_paths(plan, eps)?;
    let n = plan.groups.len();
    let tau_eps: Vec<f64> = (0..n).map(|g| plan.tau_eps(g, eps)).collect();
    let path_of_group: Vec<Option<usize>> = (0..n)
        .map(|g| {
            if tau_eps[g] <= TOL {
                return None;
            }
            paths
                .iter()
                .position(|mp| plan.cpl[g][mp.group] >= tau_eps[g] - TOL)
        })
        .collect();
    let (split, weights) = if paths.is_empty() {
        let network = Network::new(vec![0.0; plan.dim()], vec![])?;
        (
            PathSplit {
                network,
                covers: vec![],
            },
            vec![],
        )
    } else {
        let split = split_paths(&paths)?;
        let weights = compute_weights_indexed(&split.network, f)?;
        (split, weights)
    };
    Ok(TruncationWeights {
        eps,
        paths,
        split,
        weights,
        tau_eps,
        path_of_group,
        tau: plan.groups.iter().map(ParticleGroup::tau).collect(),
    })
}

/// `∫_0^M ∫_0^{τ(θ)} W(θ,t)^α / m(θ,t) dt dθ`, with `W` the stabilized
/// truncation weight (ε equal to the smallest group mass, at which no
/// truncation occurs).
pub fn plan_cost(plan: &ParticlePlan, f: &FluxFunction, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    for g in 0..plan.groups.len() {
        plan.check_positive(g)?;
    }
    let eps = plan
        .groups
        .iter()
        .map(|g| g.mass)
        .fold(f64::INFINITY, f64::min);
    let tw = truncation_weights(plan, eps, f)?;
    let mut total = 0.0;
    for (g, group) in plan.groups.iter().enumerate() {
        if let Some(p) = tw.path_of_group[g] {
            total += group.mass * tw.path_integral(p, group.tau(), alpha);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{compute_weights, network_cost};
    use approx::assert_relative_eq;

    fn group(mass: f64, path: &[&[f64]]) -> ParticleGroup {
        ParticleGroup {
            mass,
            path: Polyline::new(path.iter().map(|p| p.to_vec()).collect()).unwrap(),
        }
    }

    fn fork() -> ParticlePlan {
        ParticlePlan::new(vec![
            group(0.3, &[&[0.0, 0.0], &[0.0, 1.0], &[-1.0, 2.0]]),
            group(0.7, &[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 2.0]]),
        ])
        .unwrap()
    }

    /// Three maximal paths forking twice: five elementary branches.
    pub(crate) fn double_fork() -> ParticlePlan {
        ParticlePlan::new(vec![
            group(1.0, &[&[0.0, 0.0], &[0.0, 1.0], &[-1.0, 2.0]]),
            group(1.0, &[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 2.0], &[0.5, 3.0]]),
            group(1.0, &[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 2.0], &[2.0, 3.0]]),
        ])
        .unwrap()
    }

    #[test]
    fn polyline_merges_collinear() {
        let p = Polyline::new(vec![
            vec![0.0, 0.0],
            vec![0.5, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(p.length(), 2.0);
        assert_eq!(p.point_at(1.5), vec![1.0, 0.5]);
        assert_eq!(
            p.prefix(0.25).vertices(),
            &[vec![0.0, 0.0], vec![0.25, 0.0]]
        );
        assert!(Polyline::new(vec![vec![0.0], vec![0.0]]).is_err());
    }

    #[test]
    fn common_prefix_inside_segment() {
        let a = Polyline::new(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let b = Polyline::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let c = Polyline::new(vec![vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(a.common_prefix_len(&b), 1.0);
        assert_eq!(b.common_prefix_len(&a), 1.0);
        assert_eq!(a.common_prefix_len(&c), 0.0);
        assert_eq!(a.common_prefix_len(&a), 2.0);
    }

    #[test]
    fn multiplicity_of_fork() {
        let plan = fork();
        assert_relative_eq!(plan.multiplicity(0, 0.5).unwrap(), 1.0);
        assert_relative_eq!(plan.multiplicity(0, 1.5).unwrap(), 0.3);
        assert_relative_eq!(plan.multiplicity(1, 1.5).unwrap(), 0.7);
        assert!(plan.multiplicity(0, 5.0).is_err());
    }

    #[test]
    fn fork_at_half_threshold() {
        let plan = fork();
        let paths = epsilon_good_maximal_paths(&plan, 0.5).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].group, 1);
        assert_relative_eq!(paths[0].length(), 1.0 + 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(plan.tau_eps(0, 0.5), 1.0);
        assert!(epsilon_good_maximal_paths(&plan, 0.0).is_err());

        let f = FluxFunction::power_law(1.0, 0.5).unwrap();
        let tw = truncation_weights(&plan, 0.5, &f).unwrap();
        assert_eq!(tw.weight(0, 1.2).unwrap(), 0.0);
        assert!(tw.weight(0, 0.5).unwrap() > 1.0);
    }

    #[test]
    fn double_fork_splits_into_five() {
        let plan = double_fork();
        let paths = epsilon_good_maximal_paths(&plan, 0.5).unwrap();
        assert_eq!(paths.len(), 3);
        let net = path_split(&paths).unwrap();
        assert_eq!(net.len(), 5);
        let f = FluxFunction::power_law(1.0, 0.5).unwrap();
        let w = compute_weights(&net, &f).unwrap();
        let direct = network_cost(&net, &w, 0.7).unwrap();
        let cost = plan_cost(&plan, &f, 0.7).unwrap();
        assert_relative_eq!(cost, direct, max_relative = 1e-10);
    }

    #[test]
    fn split_edge_cases() {
        let single = ParticlePlan::new(vec![group(1.0, &[&[0.0], &[1.0]])]).unwrap();
        let p = epsilon_good_maximal_paths(&single, 0.5).unwrap();
        assert_eq!(path_split(&p).unwrap().len(), 1);

        let at_origin = ParticlePlan::new(vec![
            group(1.0, &[&[0.0, 0.0], &[1.0, 0.0]]),
            group(1.0, &[&[0.0, 0.0], &[0.0, 1.0]]),
        ])
        .unwrap();
        let p = epsilon_good_maximal_paths(&at_origin, 0.5).unwrap();
        assert_eq!(path_split(&p).unwrap().len(), 2);

        let dup = vec![p[0].clone(), p[0].clone()];
        assert!(matches!(split_paths(&dup), Err(Error::DuplicatePath(0, 1))));
    }

    #[test]
    fn unit_path_cost() {
        let plan = ParticlePlan::new(vec![group(1.0, &[&[0.0], &[1.0]])]).unwrap();
        let f = FluxFunction::power_law(1.0, 0.5).unwrap();
        let cost = plan_cost(&plan, &f, 1.0).unwrap();
        assert_relative_eq!(cost, (1.5f64.powi(3) - 1.0) / 1.5, max_relative = 1e-14);
    }

    #[test]
    fn rejects_detached_paths() {
        let g = group(1.0, &[&[1.0], &[2.0]]);
        assert!(ParticlePlan::new(vec![g]).is_err());
    }
}
