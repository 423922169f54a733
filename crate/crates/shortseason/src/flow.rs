//! Minimum-cost selection of remaining games subject to per-team home and
//! away targets — a transportation problem on the game multigraph.
//!
//! Each remaining game is a unit-capacity edge from its host's home-slot
//! supply (`home_target` units) to its guest's away-slot demand
//! (`away_target` units). The constraint matrix is totally unimodular, so
//! minimizing any linear cost over the fractional relaxation has an integral
//! optimum; this module finds one by successive shortest augmenting paths
//! under node potentials. Linearized objective costs can be negative, so
//! potentials are initialized with a Bellman-Ford pass and Dijkstra runs on
//! reduced costs afterwards; each Dijkstra stops as soon as the sink
//! settles, with potentials updated by `min(dist, dist_sink)`, which keeps
//! every reduced cost non-negative.
//!
//! Frank-Wolfe re-solves this subproblem hundreds of times with fresh costs
//! on a fixed instance, so the graph, its adjacency structure, and all
//! working buffers live in a reusable [`TransportationSolver`]; a solve only
//! rewrites costs and resets capacities. The solver is deterministic: edges
//! are scanned in game order, heap ties break on node index, and
//! relaxations accept strict improvements only.

use crate::error::{Error, Result};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Heap entry ordered by distance, then node index.
#[derive(PartialEq)]
struct Item(f64, usize);
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Item {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| self.1.cmp(&other.1))
    }
}

/// A transportation instance with reusable buffers: build once, solve for
/// as many cost vectors as needed.
///
/// Twin-edge layout: edge `e` and `e ^ 1` are a forward and backward pair;
/// capacity moves between them as flow augments. Edges are numbered supply
/// edges first (two per team), then game edges (two per game, in game
/// order), then drain edges (two per team).
///
/// Work scales with the units shipped, so when the targets ask for most of
/// the slate (a shortened season keeps the bulk of its games) the solver
/// ships the complement instead: rejecting `degree - target` games at cost
/// `-c` is the same problem under `x = 1 - y` and moves far fewer units.
pub(crate) struct TransportationSolver {
    n_teams: usize,
    n_games: usize,
    n_nodes: usize,
    s: usize,
    t: usize,
    supply: u64,
    /// Solving for the rejected games rather than the kept ones.
    complemented: bool,
    /// Original instance, kept verbatim for diagnostics.
    games: Vec<(usize, usize)>,
    home_targets: Vec<u32>,
    away_targets: Vec<u32>,
    /// Targets the internal graph actually ships (complement or original).
    graph_home: Vec<u32>,
    graph_away: Vec<u32>,
    edge_to: Vec<usize>,
    edge_cost: Vec<f64>,
    edge_cap: Vec<u32>,
    cap_init: Vec<u32>,
    // Compressed adjacency: edge ids leaving node `u` are
    // `adj_edge[adj_off[u]..adj_off[u + 1]]`, in edge-id order.
    adj_off: Vec<usize>,
    adj_edge: Vec<usize>,
    // Scratch reused across solves.
    potential: Vec<f64>,
    dist: Vec<f64>,
    parent: Vec<Option<usize>>,
    heap: BinaryHeap<Reverse<Item>>,
}

impl TransportationSolver {
    /// Builds the graph for a fixed set of games and targets. Fails with
    /// [`Error::Dimension`] on mismatched lengths, [`Error::Config`] on
    /// out-of-range team indices, and [`Error::Infeasible`] when total home
    /// and away targets disagree.
    pub(crate) fn new(
        n_teams: usize,
        games: &[(usize, usize)],
        home_targets: &[u32],
        away_targets: &[u32],
    ) -> Result<Self> {
        if home_targets.len() != n_teams || away_targets.len() != n_teams {
            return Err(Error::Dimension {
                expected: n_teams,
                got: home_targets.len().min(away_targets.len()),
            });
        }
        let supply: u64 = home_targets.iter().map(|&t| u64::from(t)).sum();
        let demand: u64 = away_targets.iter().map(|&t| u64::from(t)).sum();
        if supply != demand {
            return Err(Error::Infeasible(format!(
                "total home targets {supply} != total away targets {demand}"
            )));
        }

        let mut home_degree = vec![0u32; n_teams];
        let mut away_degree = vec![0u32; n_teams];
        for (g, &(h, a)) in games.iter().enumerate() {
            if h >= n_teams || a >= n_teams {
                return Err(Error::Config(format!(
                    "game {g} references team index out of range"
                )));
            }
            home_degree[h] += 1;
            away_degree[a] += 1;
        }

        // Complement when it ships strictly fewer units. A target over a
        // team's degree has no complement; that instance is infeasible
        // anyway, and the primal run produces the honest report.
        let complement_supply = games.len() as u64 - supply.min(games.len() as u64);
        let complement_targets = || -> Option<(Vec<u32>, Vec<u32>)> {
            let home: Vec<u32> = home_degree
                .iter()
                .zip(home_targets)
                .map(|(&d, &t)| d.checked_sub(t))
                .collect::<Option<_>>()?;
            let away: Vec<u32> = away_degree
                .iter()
                .zip(away_targets)
                .map(|(&d, &t)| d.checked_sub(t))
                .collect::<Option<_>>()?;
            Some((home, away))
        };
        let (complemented, graph_home, graph_away) =
            match (complement_supply < supply).then(complement_targets).flatten() {
                Some((home, away)) => (true, home, away),
                None => (false, home_targets.to_vec(), away_targets.to_vec()),
            };

        // Node layout: home slots, then away slots, then source and sink.
        let home = |i: usize| i;
        let away = |j: usize| n_teams + j;
        let s = 2 * n_teams;
        let t = 2 * n_teams + 1;
        let n_nodes = 2 * n_teams + 2;
        let n_edges = 2 * (2 * n_teams + games.len());

        let mut edge_to = Vec::with_capacity(n_edges);
        let mut cap_init = Vec::with_capacity(n_edges);
        let mut degrees = vec![0usize; n_nodes];
        let mut add = |from: usize, to: usize, cap: u32, degrees: &mut [usize]| {
            edge_to.push(to);
            cap_init.push(cap);
            edge_to.push(from);
            cap_init.push(0);
            degrees[from] += 1;
            degrees[to] += 1;
        };
        for i in 0..n_teams {
            add(s, home(i), graph_home[i], &mut degrees);
        }
        for &(h, a) in games {
            add(home(h), away(a), 1, &mut degrees);
        }
        for j in 0..n_teams {
            add(away(j), t, graph_away[j], &mut degrees);
        }

        let mut adj_off = vec![0usize; n_nodes + 1];
        for u in 0..n_nodes {
            adj_off[u + 1] = adj_off[u] + degrees[u];
        }
        let mut fill = adj_off.clone();
        let mut adj_edge = vec![0usize; n_edges];
        for e in 0..edge_to.len() {
            // Edge e leaves the node its twin points back to.
            let from = edge_to[e ^ 1];
            adj_edge[fill[from]] = e;
            fill[from] += 1;
        }

        let supply = if complemented { complement_supply } else { supply };
        Ok(TransportationSolver {
            n_teams,
            n_games: games.len(),
            n_nodes,
            s,
            t,
            supply,
            complemented,
            games: games.to_vec(),
            home_targets: home_targets.to_vec(),
            away_targets: away_targets.to_vec(),
            graph_home,
            graph_away,
            edge_to,
            edge_cost: vec![0.0; n_edges],
            edge_cap: vec![0; n_edges],
            cap_init,
            adj_off,
            adj_edge,
            potential: vec![0.0; n_nodes],
            dist: vec![0.0; n_nodes],
            parent: vec![None; n_nodes],
            heap: BinaryHeap::new(),
        })
    }

    /// Forward edge id of game `g`.
    fn game_edge(&self, g: usize) -> usize {
        2 * (self.n_teams + g)
    }

    /// Selects games minimizing `sum_g costs[g] * x_g` over all selections
    /// that meet every team's home and away targets exactly. Returns the
    /// 0/1 selection in game order, or [`Error::Infeasible`] — naming the
    /// teams whose targets cannot be met — when no selection exists.
    pub(crate) fn solve(&mut self, costs: &[f64]) -> Result<Vec<bool>> {
        if costs.len() != self.n_games {
            return Err(Error::Dimension {
                expected: self.n_games,
                got: costs.len(),
            });
        }
        let sign = if self.complemented { -1.0 } else { 1.0 };
        for (g, &c) in costs.iter().enumerate() {
            let e = self.game_edge(g);
            self.edge_cost[e] = sign * c;
            self.edge_cost[e ^ 1] = -sign * c;
        }
        self.edge_cap.copy_from_slice(&self.cap_init);

        // Bellman-Ford warm start for the potentials: costs may be negative
        // before the first augmentation.
        self.bellman_ford();

        let mut shipped = 0u64;
        while shipped < self.supply {
            self.dijkstra_to_sink();
            let reach = self.dist[self.t];
            if reach.is_infinite() {
                return Err(self.infeasibility_report());
            }
            for (p, &d) in self.potential.iter_mut().zip(&self.dist) {
                *p += d.min(reach);
            }
            // Bottleneck along the augmenting path (1 through any game
            // edge).
            let mut bottleneck = u32::MAX;
            let mut v = self.t;
            while let Some(e) = self.parent[v] {
                bottleneck = bottleneck.min(self.edge_cap[e]);
                v = self.edge_to[e ^ 1];
            }
            let mut v = self.t;
            while let Some(e) = self.parent[v] {
                self.edge_cap[e] -= bottleneck;
                self.edge_cap[e ^ 1] += bottleneck;
                v = self.edge_to[e ^ 1];
            }
            shipped += u64::from(bottleneck);
        }

        Ok((0..self.n_games)
            .map(|g| (self.edge_cap[self.game_edge(g) ^ 1] == 1) != self.complemented)
            .collect())
    }

    /// Shortest distances from the source by cost over residual edges,
    /// written into the potentials; tolerant of negative costs. The graph
    /// is layered (S -> home -> away -> T), so a handful of passes settle
    /// it.
    fn bellman_ford(&mut self) {
        let dist = &mut self.potential;
        dist.fill(f64::INFINITY);
        dist[self.s] = 0.0;
        for _ in 0..self.n_nodes {
            let mut changed = false;
            for u in 0..self.n_nodes {
                if !dist[u].is_finite() {
                    continue;
                }
                for &e in &self.adj_edge[self.adj_off[u]..self.adj_off[u + 1]] {
                    let to = self.edge_to[e];
                    if self.edge_cap[e] > 0 && dist[u] + self.edge_cost[e] < dist[to] - 1e-15 {
                        dist[to] = dist[u] + self.edge_cost[e];
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // Unreachable nodes get a harmless finite potential.
        for d in dist.iter_mut() {
            if !d.is_finite() {
                *d = 0.0;
            }
        }
    }

    /// Dijkstra over reduced costs, stopping once the sink settles; its
    /// distance bounds every unsettled node's, so the `min(dist, sink)`
    /// potential update stays valid.
    fn dijkstra_to_sink(&mut self) {
        self.dist.fill(f64::INFINITY);
        self.parent.fill(None);
        self.dist[self.s] = 0.0;
        self.heap.clear();
        self.heap.push(Reverse(Item(0.0, self.s)));
        while let Some(Reverse(Item(d, u))) = self.heap.pop() {
            if d > self.dist[u] {
                continue;
            }
            if u == self.t {
                break;
            }
            for &e in &self.adj_edge[self.adj_off[u]..self.adj_off[u + 1]] {
                if self.edge_cap[e] == 0 {
                    continue;
                }
                let to = self.edge_to[e];
                // Reduced costs are non-negative up to rounding noise; clamp
                // the noise so the heap ordering stays consistent.
                let rc = (self.edge_cost[e] + self.potential[u] - self.potential[to]).max(0.0);
                let nd = d + rc;
                if nd < self.dist[to] {
                    self.dist[to] = nd;
                    self.parent[to] = Some(e);
                    self.heap.push(Reverse(Item(nd, to)));
                }
            }
        }
    }

    /// Names the teams whose targets cannot be met once augmentation
    /// stalls. A complemented graph's leftovers describe the rejection
    /// problem, so the report comes from a primal rerun instead (this path
    /// is terminal; the instance is already known infeasible).
    fn infeasibility_report(&self) -> Error {
        if self.complemented {
            let mut primal = TransportationSolver {
                complemented: false,
                supply: self.home_targets.iter().map(|&t| u64::from(t)).sum(),
                graph_home: self.home_targets.clone(),
                graph_away: self.away_targets.clone(),
                games: self.games.clone(),
                home_targets: self.home_targets.clone(),
                away_targets: self.away_targets.clone(),
                n_teams: self.n_teams,
                n_games: self.n_games,
                n_nodes: self.n_nodes,
                s: self.s,
                t: self.t,
                edge_to: self.edge_to.clone(),
                edge_cost: vec![0.0; self.edge_cost.len()],
                edge_cap: vec![0; self.edge_cap.len()],
                cap_init: self.primal_caps(),
                adj_off: self.adj_off.clone(),
                adj_edge: self.adj_edge.clone(),
                potential: vec![0.0; self.n_nodes],
                dist: vec![0.0; self.n_nodes],
                parent: vec![None; self.n_nodes],
                heap: BinaryHeap::new(),
            };
            return match primal.solve(&vec![0.0; self.n_games]) {
                Err(err) => err,
                Ok(_) => Error::Infeasible(
                    "targets cannot be met: complement formulation stalled".into(),
                ),
            };
        }
        let mut homes = Vec::new();
        for i in 0..self.n_teams {
            // S -> home(i) is edge 2i; leftover capacity means unmet supply.
            let left = self.edge_cap[2 * i];
            if left > 0 {
                homes.push(format!(
                    "team {i} short {left} of {} home selections",
                    self.home_targets[i]
                ));
            }
        }
        let mut aways = Vec::new();
        for j in 0..self.n_teams {
            let e = self.edge_cap.len() - 2 * (self.n_teams - j);
            let left = self.edge_cap[e];
            if left > 0 {
                aways.push(format!(
                    "team {j} short {left} of {} away selections",
                    self.away_targets[j]
                ));
            }
        }
        Error::Infeasible(format!(
            "targets cannot be met: {}",
            homes
                .into_iter()
                .chain(aways)
                .collect::<Vec<_>>()
                .join("; ")
        ))
    }

    /// Initial capacities for the primal (uncomplemented) graph.
    fn primal_caps(&self) -> Vec<u32> {
        let mut caps = self.cap_init.clone();
        for i in 0..self.n_teams {
            caps[2 * i] = self.home_targets[i];
        }
        for j in 0..self.n_teams {
            let e = caps.len() - 2 * (self.n_teams - j);
            caps[e] = self.away_targets[j];
        }
        caps
    }
}

/// One-shot convenience wrapper around [`TransportationSolver`].
pub fn min_cost_selection(
    n_teams: usize,
    games: &[(usize, usize)],
    home_targets: &[u32],
    away_targets: &[u32],
    costs: &[f64],
) -> Result<Vec<bool>> {
    TransportationSolver::new(n_teams, games, home_targets, away_targets)?.solve(costs)
}
