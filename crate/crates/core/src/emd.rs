//! Exact solver for the balanced transportation problem.
//!
//! The solver is a primal network simplex specialised to the complete
//! bipartite source/sink graph. A basis is a spanning tree of `m + n - 1`
//! cells, started by the least-cost rule; node potentials give reduced
//! costs `c_ij - u_i - v_j` and the entering cell is chosen by block
//! pricing. Transportation problems are
//! highly degenerate, so supplies and demands are perturbed symbolically
//! (`a_i + ε`, last demand `b_n + m·ε`): every basic flow is carried as a
//! pair `(value, k)` meaning `value + k·ε`, and ratio tests compare pairs
//! lexicographically. No perturbed basis is degenerate, which rules out
//! cycling; dropping the ε parts yields an optimal plan for the original
//! data.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Absolute tolerance for supply/demand balance and plan feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Supplies or demands below this are removed before solving.
pub const MASS_EPSILON: f64 = 1e-12;

/// A balanced transportation problem: ship `supply` to `demand` at minimum
/// total `cost`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportProblem {
    supply: Vec<f64>,
    demand: Vec<f64>,
    cost: Array2<f64>,
}

impl TransportProblem {
    pub fn new(supply: Vec<f64>, demand: Vec<f64>, cost: Array2<f64>) -> Result<Self> {
        if supply.is_empty() || demand.is_empty() {
            return Err(Error::EmptyInput("transport problem needs sources and sinks"));
        }
        let (rows, cols) = cost.dim();
        if rows != supply.len() {
            return Err(Error::DimensionMismatch {
                expected: supply.len(),
                found: rows,
            });
        }
        if cols != demand.len() {
            return Err(Error::DimensionMismatch {
                expected: demand.len(),
                found: cols,
            });
        }
        for (index, &value) in supply.iter().chain(&demand).enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidMass { index, value });
            }
        }
        for ((row, col), &value) in cost.indexed_iter() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidCost { row, col, value });
            }
        }
        let s: f64 = supply.iter().sum();
        let d: f64 = demand.iter().sum();
        if (s - d).abs() > FEASIBILITY_TOL {
            return Err(Error::InfeasibleProblem { supply: s, demand: d });
        }
        Ok(TransportProblem { supply, demand, cost })
    }

    pub fn supply(&self) -> &[f64] {
        &self.supply
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn cost(&self) -> &Array2<f64> {
        &self.cost
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.supply.len(), self.demand.len())
    }
}

/// An optimal flow for a [`TransportProblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `m × n` nonnegative flows.
    pub flow: Array2<f64>,
    /// Total work `Σ f_ij · c_ij`.
    pub objective: f64,
    /// `objective / Σ f_ij`.
    pub normalized_cost: f64,
    /// Source rows removed as numerically empty before solving.
    pub dropped_sources: Vec<usize>,
    /// Sink columns removed as numerically empty before solving.
    pub dropped_sinks: Vec<usize>,
    pub pivots: usize,
}

impl TransportPlan {
    pub fn total_flow(&self) -> f64 {
        self.flow.sum()
    }
}

/// Earth Mover's Distance of a plan: total work over total flow.
pub fn emd_value(plan: &TransportPlan) -> Result<f64> {
    let total = plan.total_flow();
    if total <= 0.0 {
        return Err(Error::DegeneratePlan);
    }
    Ok(plan.objective / total)
}

/// Residual report from [`validate_plan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanCheck {
    pub max_row_residual: f64,
    pub max_col_residual: f64,
    pub min_flow: f64,
    pub feasible: bool,
}

/// Checks a flow matrix against a problem's marginals.
pub fn validate_plan(flow: &Array2<f64>, problem: &TransportProblem) -> Result<PlanCheck> {
    let (m, n) = problem.shape();
    let (rows, cols) = flow.dim();
    if rows != m {
        return Err(Error::DimensionMismatch { expected: m, found: rows });
    }
    if cols != n {
        return Err(Error::DimensionMismatch { expected: n, found: cols });
    }
    let max_row_residual = flow
        .rows()
        .into_iter()
        .zip(&problem.supply)
        .map(|(r, s)| (r.sum() - s).abs())
        .fold(0.0, f64::max);
    let max_col_residual = flow
        .columns()
        .into_iter()
        .zip(&problem.demand)
        .map(|(c, d)| (c.sum() - d).abs())
        .fold(0.0, f64::max);
    let min_flow = flow.iter().copied().fold(f64::INFINITY, f64::min);
    let feasible = max_row_residual <= FEASIBILITY_TOL
        && max_col_residual <= FEASIBILITY_TOL
        && min_flow >= -FEASIBILITY_TOL;
    Ok(PlanCheck {
        max_row_residual,
        max_col_residual,
        min_flow,
        feasible,
    })
}

/// Solves the transportation problem exactly.
pub fn solve_transport(problem: &TransportProblem) -> Result<TransportPlan> {
    let (m, n) = problem.shape();
    let (rows, dropped_sources) = partition_mass(&problem.supply);
    let (cols, dropped_sinks) = partition_mass(&problem.demand);
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptyInput("all supply or demand is numerically zero"));
    }

    let supply: Vec<f64> = rows.iter().map(|&i| problem.supply[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| problem.demand[j]).collect();
    let mut cost = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        for &j in &cols {
            cost.push(problem.cost[[i, j]]);
        }
    }

    let mut simplex = Simplex::new(&supply, &demand, cost);
    let pivots = simplex.run()?;

    let mut flow = Array2::<f64>::zeros((m, n));
    let mut objective = 0.0;
    for arc in &simplex.arcs {
        let f = arc.flow.value.max(0.0);
        let (i, j) = (rows[arc.row], cols[arc.col]);
        flow[[i, j]] = f;
        objective += f * problem.cost[[i, j]];
    }
    let total = flow.sum();
    let normalized_cost = if total > 0.0 { objective / total } else { 0.0 };
    Ok(TransportPlan {
        flow,
        objective,
        normalized_cost,
        dropped_sources,
        dropped_sinks,
        pivots,
    })
}

fn partition_mass(mass: &[f64]) -> (Vec<usize>, Vec<usize>) {
    (0..mass.len()).partition(|&i| mass[i] >= MASS_EPSILON)
}

/// `value + eps·ε` for an infinitesimal ε > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Mass {
    value: f64,
    eps: i64,
}

impl Mass {
    fn add(self, o: Mass) -> Mass {
        Mass {
            value: self.value + o.value,
            eps: self.eps + o.eps,
        }
    }

    fn sub(self, o: Mass) -> Mass {
        Mass {
            value: self.value - o.value,
            eps: self.eps - o.eps,
        }
    }

    /// Lexicographic comparison; real parts closer than `tol` count as equal.
    fn cmp(self, o: Mass, tol: f64) -> std::cmp::Ordering {
        let d = self.value - o.value;
        if d.abs() > tol {
            d.partial_cmp(&0.0).unwrap()
        } else {
            self.eps.cmp(&o.eps)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BasicArc {
    row: usize,
    col: usize,
    flow: Mass,
}

const NO_PARENT: usize = usize::MAX;

struct Simplex {
    m: usize,
    n: usize,
    cost: Vec<f64>,
    arcs: Vec<BasicArc>,
    /// Basic arc indices incident to each node. Sources are nodes `0..m`,
    /// sinks are `m..m + n`.
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    mass_tol: f64,
    price_tol: f64,
    block: usize,
    cursor: usize,
}

impl Simplex {
    fn new(supply: &[f64], demand: &[f64], cost: Vec<f64>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let total: f64 = supply.iter().sum();
        let max_cost = cost.iter().copied().fold(0.0, f64::max);
        let cells = m * n;
        let mut s = Simplex {
            m,
            n,
            cost,
            arcs: Vec::with_capacity(m + n - 1),
            adj: vec![Vec::new(); m + n],
            parent: vec![NO_PARENT; m + n],
            parent_arc: vec![NO_PARENT; m + n],
            depth: vec![0; m + n],
            potential: vec![0.0; m + n],
            mass_tol: 1e-13 * total.max(1.0),
            price_tol: 1e-12 * max_cost.max(1.0),
            block: ((cells as f64).sqrt().ceil() as usize).max(1),
            cursor: 0,
        };
        s.least_cost_start(supply, demand);
        s.hang(0, NO_PARENT, NO_PARENT);
        s
    }

    #[inline]
    fn arc_cost(&self, row: usize, col: usize) -> f64 {
        self.cost[row * self.n + col]
    }

    /// Initial basis by the least-cost rule: visit cells by ascending cost
    /// (ties by row, then column) and ship as much as the perturbed
    /// marginals allow. Each allocation exhausts exactly one row or column
    /// except the last, so the `m + n - 1` cells form a spanning tree.
    fn least_cost_start(&mut self, supply: &[f64], demand: &[f64]) {
        let (m, n) = (self.m, self.n);
        let mut rs: Vec<Mass> = supply.iter().map(|&value| Mass { value, eps: 1 }).collect();
        let mut rd: Vec<Mass> = demand.iter().map(|&value| Mass { value, eps: 0 }).collect();
        rd[n - 1].eps = m as i64;
        let mut row_open = vec![true; m];
        let mut col_open = vec![true; n];
        let mut order: Vec<u32> = (0..(m * n) as u32).collect();
        order.sort_unstable_by(|&a, &b| self.cost[a as usize].total_cmp(&self.cost[b as usize]).then(a.cmp(&b)));
        let target = m + n - 1;
        for k in order {
            let (i, j) = (k as usize / n, k as usize % n);
            if !(row_open[i] && col_open[j]) {
                continue;
            }
            if self.arcs.len() + 1 == target {
                self.push_arc(i, j, rs[i]);
                break;
            }
            if rs[i].cmp(rd[j], self.mass_tol) == std::cmp::Ordering::Less {
                self.push_arc(i, j, rs[i]);
                rd[j] = rd[j].sub(rs[i]);
                row_open[i] = false;
            } else {
                self.push_arc(i, j, rd[j]);
                rs[i] = rs[i].sub(rd[j]);
                col_open[j] = false;
            }
        }
    }

    fn push_arc(&mut self, row: usize, col: usize, flow: Mass) {
        let idx = self.arcs.len();
        self.arcs.push(BasicArc { row, col, flow });
        self.adj[row].push(idx);
        self.adj[self.m + col].push(idx);
    }

    fn other_end(&self, arc: usize, node: usize) -> usize {
        let a = self.arcs[arc];
        if node < self.m {
            self.m + a.col
        } else {
            a.row
        }
    }

    /// Re-roots the subtree containing `node` under `parent` via `via`,
    /// refreshing parents, depths and potentials of every node in it.
    fn hang(&mut self, node: usize, parent: usize, via: usize) {
        let mut stack = vec![(node, parent, via)];
        while let Some((x, p, e)) = stack.pop() {
            self.parent[x] = p;
            self.parent_arc[x] = e;
            if p == NO_PARENT {
                self.depth[x] = 0;
                self.potential[x] = 0.0;
            } else {
                self.depth[x] = self.depth[p] + 1;
                let a = self.arcs[e];
                self.potential[x] = self.arc_cost(a.row, a.col) - self.potential[p];
            }
            for &f in &self.adj[x] {
                if f != e {
                    stack.push((self.other_end(f, x), x, f));
                }
            }
        }
    }

    #[inline]
    fn reduced_cost(&self, row: usize, col: usize) -> f64 {
        self.arc_cost(row, col) - self.potential[row] - self.potential[self.m + col]
    }

    /// Block pricing: scan cells cyclically in blocks and return the most
    /// negative reduced cost of the first block that has one. Equal reduced
    /// costs prefer the lower (row, col) cell.
    fn entering(&mut self) -> Option<(usize, usize)> {
        let cells = self.m * self.n;
        let mut best: Option<(f64, usize)> = None;
        let mut in_block = 0;
        for _ in 0..cells {
            let k = self.cursor;
            self.cursor += 1;
            if self.cursor == cells {
                self.cursor = 0;
            }
            let r = self.reduced_cost(k / self.n, k % self.n);
            if r < -self.price_tol {
                let better = match best {
                    None => true,
                    Some((br, bk)) => r < br || (r == br && k < bk),
                };
                if better {
                    best = Some((r, k));
                }
            }
            in_block += 1;
            if in_block == self.block {
                if best.is_some() {
                    break;
                }
                in_block = 0;
            }
        }
        best.map(|(_, k)| (k / self.n, k % self.n))
    }

    fn run(&mut self) -> Result<usize> {
        let limit = 100_000usize.max(200 * (self.m + self.n));
        let mut pivots = 0;
        while let Some((row, col)) = self.entering() {
            if pivots == limit {
                return Err(Error::IterationLimit(pivots));
            }
            self.pivot(row, col);
            pivots += 1;
        }
        Ok(pivots)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let a = row;
        let b = self.m + col;

        // Cycle: entering arc a→b, then the tree path from b back to a.
        // Arcs climbed from b are traversed child→parent and lose flow when
        // the child is a sink; arcs on a's side are traversed parent→child and
        // lose flow when the child is a source.
        let mut sink_side = Vec::new();
        let mut source_side = Vec::new();
        let (mut x, mut y) = (b, a);
        while x != y {
            if self.depth[x] >= self.depth[y] {
                sink_side.push((self.parent_arc[x], x >= self.m));
                x = self.parent[x];
            } else {
                source_side.push((self.parent_arc[y], y < self.m));
                y = self.parent[y];
            }
        }

        let mut leave: Option<(usize, bool)> = None;
        for (side, arcs) in [(true, &sink_side), (false, &source_side)] {
            for &(e, minus) in arcs.iter() {
                if !minus {
                    continue;
                }
                let replace = match leave {
                    None => true,
                    Some((l, _)) => {
                        let (fe, fl) = (self.arcs[e], self.arcs[l]);
                        match fe.flow.cmp(fl.flow, self.mass_tol) {
                            std::cmp::Ordering::Less => true,
                            std::cmp::Ordering::Equal => (fe.row, fe.col) < (fl.row, fl.col),
                            std::cmp::Ordering::Greater => false,
                        }
                    }
                };
                if replace {
                    leave = Some((e, side));
                }
            }
        }
        // A spanning tree cycle always contains the entering arc's endpoints
        // on both sides, hence at least one decreasing arc.
        let (leave, leave_on_sink_side) = leave.expect("cycle without decreasing arc");
        let theta = self.arcs[leave].flow;

        for &(e, minus) in sink_side.iter().chain(&source_side) {
            let f = self.arcs[e].flow;
            self.arcs[e].flow = if minus { f.sub(theta) } else { f.add(theta) };
        }

        // Detach the leaving arc; the endpoint farther from the root heads
        // the subtree that is re-attached through the entering arc.
        let old = self.arcs[leave];
        for node in [old.row, self.m + old.col] {
            let list = &mut self.adj[node];
            let pos = list.iter().position(|&e| e == leave).unwrap();
            list.swap_remove(pos);
        }
        self.arcs[leave] = BasicArc { row, col, flow: theta };
        self.adj[a].push(leave);
        self.adj[b].push(leave);

        if leave_on_sink_side {
            self.hang(b, a, leave);
        } else {
            self.hang(a, b, leave);
        }
    }
}
