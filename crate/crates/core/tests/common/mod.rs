//! Random fixtures shared by the integration tests.
#![allow(dead_code)]

use irrigation::lagrangian::{ParticleGroup, ParticlePlan, Polyline};
use irrigation::{BranchId, BranchSpec, MultiplicityProfile, Network, Piece};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// A random valid tree with `branches` straight branches of length in
/// `len_range`. Multiplicities are step profiles with up to three pieces that
/// dominate the outflow at every tip.
pub fn random_network(
    rng: &mut impl Rng,
    branches: usize,
    dim: usize,
    len_range: (f64, f64),
) -> Network {
    let mut parent: Vec<Option<usize>> = Vec::with_capacity(branches);
    let mut ends: Vec<Vec<f64>> = Vec::with_capacity(branches);
    let mut lengths = Vec::with_capacity(branches);
    let root = vec![0.0; dim];
    for i in 0..branches {
        let p = if i == 0 || rng.gen_bool(0.15) {
            None
        } else {
            Some(rng.gen_range(0..i))
        };
        let start = p.map(|j| ends[j].clone()).unwrap_or_else(|| root.clone());
        let len = rng.gen_range(len_range.0..len_range.1);
        let dir = random_direction(rng, dim);
        ends.push(start.iter().zip(&dir).map(|(s, d)| s + len * d).collect());
        parent.push(p);
        lengths.push(len);
    }
    let mut base = vec![0.0; branches];
    let mut profiles = vec![None; branches];
    for i in (0..branches).rev() {
        let outflow: f64 = (0..branches)
            .filter(|&j| parent[j] == Some(i))
            .map(|j| base[j])
            .sum();
        let deposit = if outflow == 0.0 {
            rng.gen_range(0.1..1.0)
        } else if rng.gen_bool(0.5) {
            0.0
        } else {
            rng.gen_range(0.0..0.5)
        };
        let pieces_n = rng.gen_range(1..=3);
        let mut cuts: Vec<f64> = (1..pieces_n)
            .map(|_| rng.gen_range(0.05..0.95) * lengths[i])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut value = outflow + deposit;
        let mut pieces = Vec::new();
        for &c in cuts.iter().rev() {
            pieces.push(Piece { from: c, value });
            value += rng.gen_range(0.0..0.7);
        }
        pieces.push(Piece { from: 0.0, value });
        pieces.reverse();
        base[i] = value;
        profiles[i] = Some(MultiplicityProfile::new(pieces).unwrap());
    }
    let specs = (0..branches)
        .map(|i| BranchSpec {
            id: BranchId(i as u64 + 1),
            parent: parent[i].map(|p| BranchId(p as u64 + 1)),
            end: ends[i].clone(),
            multiplicity: profiles[i].take().unwrap(),
        })
        .collect();
    Network::new(root, specs).unwrap()
}

/// A random finite plan: groups follow root-to-node paths of a random tree of
/// vertices grown from the origin.
pub fn random_plan(rng: &mut impl Rng, nodes: usize, groups: usize, dim: usize) -> ParticlePlan {
    let mut points = vec![vec![0.0; dim]];
    let mut up: Vec<Option<usize>> = vec![None];
    for _ in 1..nodes {
        let p = rng.gen_range(0..points.len());
        let len = rng.gen_range(0.2..1.0);
        let dir = random_direction(rng, dim);
        let q = points[p]
            .iter()
            .zip(&dir)
            .map(|(a, d)| a + len * d)
            .collect();
        points.push(q);
        up.push(Some(p));
    }
    let groups = (0..groups)
        .map(|_| {
            let mut node = rng.gen_range(1..points.len());
            let mut path = vec![points[node].clone()];
            while let Some(p) = up[node] {
                path.push(points[p].clone());
                node = p;
            }
            path.reverse();
            ParticleGroup {
                mass: rng.gen_range(0.05..1.0),
                path: Polyline::new(path).unwrap(),
            }
        })
        .collect();
    ParticlePlan::new(groups).unwrap()
}

fn group(mass: f64, path: &[&[f64]]) -> ParticleGroup {
    ParticleGroup {
        mass,
        path: Polyline::new(path.iter().map(|p| p.to_vec()).collect()).unwrap(),
    }
}

/// Three maximal paths from the origin: a common trunk that forks in two,
/// one side forking again. Splits into five elementary branches.
pub fn three_path_plan() -> ParticlePlan {
    ParticlePlan::new(vec![
        group(1.0, &[&[0.0, 0.0], &[0.0, 1.0], &[-1.0, 2.0]]),
        group(1.0, &[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 2.0], &[0.5, 3.0]]),
        group(1.0, &[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 2.0], &[2.0, 3.0]]),
    ])
    .unwrap()
}

/// Two groups of masses 0.3 and 0.7 sharing the unit trunk, then diverging.
pub fn fork_plan() -> ParticlePlan {
    ParticlePlan::new(vec![
        group(0.3, &[&[0.0, 0.0], &[0.0, 1.0], &[-1.0, 2.0]]),
        group(0.7, &[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 2.0]]),
    ])
    .unwrap()
}

/// Direct Gilbert cost `Σ_i Σ_pieces m^α · length` from the branch data.
pub fn gilbert_cost(net: &Network, alpha: f64) -> f64 {
    let mut total = 0.0;
    for b in net.branches() {
        let len = b.length();
        let p = b.multiplicity.pieces();
        for k in 0..p.len() {
            let hi = if k + 1 < p.len() { p[k + 1].from } else { len };
            total += p[k].value.powf(alpha) * (hi - p[k].from);
        }
    }
    total
}

/// Independent fixed-step RK4 solution of `dW/dτ = c·W^β` on every branch,
/// sampled at the given local positions (one list per branch). Steps never
/// exceed `h`.
pub fn rk4_oracle(net: &Network, c: f64, beta: f64, h: f64, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = net.len();
    let f = |w: f64| c * w.max(0.0).powf(beta);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut stack: Vec<usize> = net.root_children().to_vec();
    while let Some(i) = stack.pop() {
        order.push(i);
        stack.extend_from_slice(net.children_of(i));
    }
    let mut at_base = vec![0.0; n];
    let mut out = vec![Vec::new(); n];
    for &i in order.iter().rev() {
        let b = &net.branches()[i];
        let len = b.length();
        let load: f64 = net
            .children_of(i)
            .iter()
            .map(|&j| at_base[j] - net.branches()[j].multiplicity.pieces()[0].value)
            .sum();
        let pieces = b.multiplicity.pieces();
        // sample requests sorted from the tip downward
        let mut req: Vec<(f64, usize)> = samples[i].iter().copied().zip(0..).collect();
        req.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut vals = vec![0.0; req.len()];
        let mut r = 0;
        let mut w = pieces[pieces.len() - 1].value + load;
        for k in (0..pieces.len()).rev() {
            let lo = pieces[k].from;
            let hi = if k + 1 < pieces.len() {
                pieces[k + 1].from
            } else {
                len
            };
            // integrate from hi down to lo, stopping at requested samples
            let mut pos = hi;
            while r < req.len() && req[r].0 >= hi {
                vals[req[r].1] = w;
                r += 1;
            }
            let mut targets: Vec<f64> = Vec::new();
            while r < req.len() && req[r].0 > lo {
                targets.push(req[r].0);
                r += 1;
            }
            targets.push(lo);
            let first = r - (targets.len() - 1);
            for (t_idx, &target) in targets.iter().enumerate() {
                let span = pos - target;
                let steps = ((span / h).ceil() as usize).max(1);
                let dt = span / steps as f64;
                for _ in 0..steps {
                    let k1 = f(w);
                    let k2 = f(w + 0.5 * dt * k1);
                    let k3 = f(w + 0.5 * dt * k2);
                    let k4 = f(w + dt * k3);
                    w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
                pos = target;
                if t_idx + 1 < targets.len() {
                    vals[req[first + t_idx].1] = w;
                }
            }
            if k > 0 {
                w += pieces[k - 1].value - pieces[k].value;
            }
        }
        at_base[i] = w;
        out[i] = vals;
    }
    out
}
