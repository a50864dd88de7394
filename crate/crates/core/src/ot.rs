//! Exact optimal transport between finite measures.
//!
//! [`solve_transport`] runs the transportation simplex on the complete
//! bipartite graph: north-west-corner start, Bland's smallest-index rule for
//! both the entering and the leaving cell, and supplies perturbed by
//! `(i + 1) * ε` while pivoting. The perturbation is removed on exit by
//! recomputing the flows of the final basis tree from the true supplies.
//!
//! Infinite costs are handled with a symbolic big-M: every cell cost is a
//! pair `(hard, soft)` compared lexicographically, where `hard` is 1 on
//! infinite cells and `soft` is the finite `c^k`. The optimum first
//! minimizes the mass forced onto infinite cells, then the finite cost. If
//! that mass is positive no finite plan exists and the value is `inf`.
//!
//! The plan minimizing `Σ c^k s` also minimizes the k-cost since the k-th
//! root is monotone, so the solver works on `c^k` and roots the optimum.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::prob::{cost_k, kth_root, Coupling, Measure};
use crate::report::LawReport;
use crate::scalar::{is_ext_nonneg, Scalar};
use crate::wcat::PQMetric;

/// Optimal plan with its k-cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution<T> {
    pub plan: Coupling<T>,
    pub value: T,
    /// Simplex pivots performed.
    pub iterations: usize,
    /// Every coupling puts mass on an infinite-cost pair; `plan` is then
    /// just some feasible coupling and `value` is `inf`.
    pub forced_infinite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Lex<T> {
    hard: T,
    soft: T,
}

impl<T: Scalar> Lex<T> {
    fn zero() -> Self {
        Self { hard: T::zero(), soft: T::zero() }
    }

    fn sub(self, o: Self) -> Self {
        Self { hard: self.hard - o.hard, soft: self.soft - o.soft }
    }

    fn add(self, o: Self) -> Self {
        Self { hard: self.hard + o.hard, soft: self.soft + o.soft }
    }
}

fn validate<T: Scalar>(p: &Measure<T>, q: &Measure<T>, cost: &Array2<T>, k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::Argument("k must be an integer >= 1".into()));
    }
    if cost.dim() != (p.len(), q.len()) {
        return Err(Error::Structural(format!("cost is {:?}, measures have {} and {} points", cost.dim(), p.len(), q.len())));
    }
    if let Some(((i, j), c)) = cost.indexed_iter().find(|(_, c)| !is_ext_nonneg(**c)) {
        return Err(Error::Invariant(format!("cost ({i}, {j}) = {c} is not an extended nonnegative real")));
    }
    let (sp, sq) = (p.mass().sum(), q.mass().sum());
    if (sp - sq).abs() > T::lit(2.0 * T::MASS_TOL) {
        return Err(Error::Infeasible(format!("total masses differ: {sp} vs {sq}")));
    }
    Ok(())
}

/// Minimum-cost coupling of `p` and `q` for the cost `c^k`.
pub fn solve_transport<T: Scalar>(p: &Measure<T>, q: &Measure<T>, cost: &Array2<T>, k: u32) -> Result<TransportSolution<T>> {
    validate(p, q, cost, k)?;
    let lex = cost.mapv(|c| {
        let ck = c.powi(k as i32);
        if ck.is_infinite() {
            Lex { hard: T::one(), soft: T::zero() }
        } else {
            Lex { hard: T::zero(), soft: ck }
        }
    });
    let supply: Vec<T> = p.mass().to_vec();
    let demand: Vec<T> = q.mass().to_vec();
    let mut simplex = Simplex::new(&supply, &demand, lex);
    simplex.run()?;
    let mut joint = simplex.exact_flows(&supply, &demand);

    let infinite_mass = joint.iter().zip(cost.iter()).filter(|(_, c)| c.is_infinite()).fold(T::zero(), |acc, (x, _)| acc + *x);
    let forced_infinite = infinite_mass > T::lit(T::MASS_TOL);
    if !forced_infinite {
        for (x, c) in joint.iter_mut().zip(cost.iter()) {
            if c.is_infinite() {
                *x = T::zero();
            }
        }
    }
    let plan = Coupling::from_parts(p.clone(), q.clone(), joint);
    let value = if forced_infinite { T::infinity() } else { cost_k(&plan, cost, k)? };
    Ok(TransportSolution { plan, value, iterations: simplex.iterations, forced_infinite })
}

/// Wasserstein pq-distance `inf_{s ∈ Γ(p,q)} cost_k(s)`.
pub fn wasserstein<T: Scalar>(p: &Measure<T>, q: &Measure<T>, cost: &Array2<T>, k: u32) -> Result<T> {
    Ok(solve_transport(p, q, cost, k)?.value)
}

/// Pairwise Wasserstein distances between `measures`, as a pq-metric space
/// with points `m0, m1, ...`.
pub fn optimal_pq_metric<T: Scalar>(measures: &[Measure<T>], cost: &Array2<T>, k: u32) -> Result<PQMetric<T>> {
    let n = measures.len();
    let mut dist = Array2::zeros((n, n));
    for (a, p) in measures.iter().enumerate() {
        for (b, q) in measures.iter().enumerate() {
            if a != b {
                dist[[a, b]] = wasserstein(p, q, cost, k)?;
            }
        }
    }
    PQMetric::new((0..n).map(|i| format!("m{i}")).collect(), dist)
}

/// Optimization-completeness of the coupling category on `measures`: for
/// every pair the solver returns a coupling of the right marginals whose
/// k-cost equals the reported minimum.
pub fn check_optimization_complete<T: Scalar>(measures: &[Measure<T>], cost: &Array2<T>, k: u32, tol: T) -> Result<LawReport> {
    let mut report = LawReport::new();
    for (a, p) in measures.iter().enumerate() {
        for (b, q) in measures.iter().enumerate() {
            let sol = solve_transport(p, q, cost, k)?;
            let err = sol.plan.marginal_error();
            if err > tol {
                report.violate("plan-marginals", vec![a, b], err.as_f64(), 0.0);
            }
            let attained = cost_k(&sol.plan, cost, k)?;
            if T::ext_diff(attained, sol.value) > tol {
                report.violate("attained", vec![a, b], attained.as_f64(), sol.value.as_f64());
            }
            if sol.forced_infinite {
                report.note(format!("pair ({a}, {b}) has no finite-cost coupling"));
            }
        }
    }
    Ok(report)
}

/// Largest side accepted by [`brute_force_wasserstein`].
pub const BRUTE_FORCE_MAX: usize = 6;

/// Exhaustive oracle: enumerates every spanning tree of the bipartite graph
/// `K(m, n)`, solves the tree's flows, keeps the nonnegative ones (the
/// vertices of the transportation polytope) and returns the least k-cost.
///
/// Independent of the simplex: no pivoting, no potentials. Exponential, so
/// both sides must have at most [`BRUTE_FORCE_MAX`] points.
pub fn brute_force_wasserstein<T: Scalar>(p: &Measure<T>, q: &Measure<T>, cost: &Array2<T>, k: u32) -> Result<T> {
    let (m, n) = (p.len(), q.len());
    if m > BRUTE_FORCE_MAX || n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge(format!("{m}x{n}, limit is {BRUTE_FORCE_MAX} per side")));
    }
    validate(p, q, cost, k)?;
    let a: Vec<f64> = p.mass().iter().map(|x| x.as_f64()).collect();
    let b: Vec<f64> = q.mass().iter().map(|x| x.as_f64()).collect();
    let ck: Vec<f64> = cost.iter().map(|c| c.as_f64().powi(k as i32)).collect();
    let mut trees = TreeEnumerator::new(m, n);
    let mut best = f64::INFINITY;
    let mut buf = Scratch::new(m + n);
    trees.for_each(|tree| {
        if let Some(total) = tree.vertex_cost(&a, &b, &ck, n, &mut buf) {
            best = best.min(total);
        }
    });
    Ok(kth_root(T::lit(best), k))
}

/// Spanning trees of `K(m, n)` rooted at row 0: every other node picks a
/// parent on the opposite side, and an assignment is a tree exactly when
/// following parents always reaches the root.
///
/// Nodes `0..m` are rows, `m..m+n` columns.
struct TreeEnumerator {
    m: usize,
    n: usize,
    parent: Vec<usize>,
}

struct Tree<'a> {
    m: usize,
    parent: &'a [usize],
}

const UNSET: usize = usize::MAX;

impl TreeEnumerator {
    fn new(m: usize, n: usize) -> Self {
        let mut parent = vec![UNSET; m + n];
        parent[0] = 0;
        Self { m, n, parent }
    }

    fn for_each(&mut self, mut visit: impl FnMut(&Tree<'_>)) {
        self.assign(1, &mut visit);
    }

    fn assign(&mut self, node: usize, visit: &mut impl FnMut(&Tree<'_>)) {
        let (m, n) = (self.m, self.n);
        if node == m + n {
            visit(&Tree { m, parent: &self.parent });
            return;
        }
        let candidates = if node < m { m..m + n } else { 0..m };
        for cand in candidates {
            self.parent[node] = cand;
            if !self.closes_cycle(node) {
                self.assign(node + 1, visit);
            }
        }
        self.parent[node] = UNSET;
    }

    /// Does following parents from `node` come back to `node`?
    fn closes_cycle(&self, node: usize) -> bool {
        let mut v = self.parent[node];
        for _ in 0..self.parent.len() {
            if v == node {
                return true;
            }
            if v == 0 || self.parent[v] == UNSET {
                return false;
            }
            v = self.parent[v];
        }
        true
    }
}

/// Buffers reused across trees.
struct Scratch {
    net: Vec<f64>,
    depth: Vec<usize>,
    order: Vec<usize>,
    count: Vec<usize>,
}

impl Scratch {
    fn new(nodes: usize) -> Self {
        Self { net: vec![0.0; nodes], depth: vec![0; nodes], order: vec![0; nodes], count: vec![0; nodes + 1] }
    }
}

impl Tree<'_> {
    /// Flows on the tree edges, or `None` when some flow is negative.
    /// Returns `Σ c^k x` over the edges.
    fn vertex_cost(&self, a: &[f64], b: &[f64], ck: &[f64], n: usize, buf: &mut Scratch) -> Option<f64> {
        const NEG_TOL: f64 = 1e-12;
        const ZERO_TOL: f64 = 1e-13;
        let m = self.m;
        let total = m + n;
        self.depths(&mut buf.depth[..total]);
        // deepest first, by counting sort on depth
        buf.count.iter_mut().for_each(|c| *c = 0);
        for &d in &buf.depth[..total] {
            buf.count[total - 1 - d] += 1;
        }
        for i in 1..buf.count.len() {
            buf.count[i] += buf.count[i - 1];
        }
        for v in (0..total).rev() {
            let key = total - 1 - buf.depth[v];
            buf.count[key] -= 1;
            buf.order[buf.count[key]] = v;
        }
        for v in 0..total {
            buf.net[v] = if v < m { a[v] } else { -b[v - m] };
        }
        let mut cost = 0.0;
        for &v in &buf.order[..total] {
            if v == 0 {
                continue;
            }
            let up = self.parent[v];
            let sub = buf.net[v];
            buf.net[up] += sub;
            // flow on the row -> column edge between v and its parent
            let (row, col, x) = if v < m { (v, up - m, sub) } else { (up, v - m, -sub) };
            if x < -NEG_TOL {
                return None;
            }
            if x > ZERO_TOL {
                cost += x * ck[row * n + col];
            }
        }
        Some(cost)
    }

    fn depths(&self, depth: &mut [usize]) {
        const UNKNOWN: usize = usize::MAX;
        depth.iter_mut().for_each(|d| *d = UNKNOWN);
        depth[0] = 0;
        for start in 1..depth.len() {
            let mut v = start;
            let mut steps = 0;
            while depth[v] == UNKNOWN {
                v = self.parent[v];
                steps += 1;
            }
            // walk again, filling in from the known ancestor's depth
            let base = depth[v];
            let mut u = start;
            let mut d = base + steps;
            while depth[u] == UNKNOWN {
                depth[u] = d;
                d -= 1;
                u = self.parent[u];
            }
        }
    }
}

/// Dense transportation simplex state.
struct Simplex<T> {
    m: usize,
    n: usize,
    cost: Array2<Lex<T>>,
    flow: Array2<T>,
    basic: Array2<bool>,
    basis: Vec<(usize, usize)>,
    iterations: usize,
    soft_tol: T,
    hard_tol: T,
}

impl<T: Scalar> Simplex<T> {
    fn new(supply: &[T], demand: &[T], cost: Array2<Lex<T>>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let eps = T::lit(T::PERTURBATION);
        let mut a: Vec<T> = supply.iter().enumerate().map(|(i, &s)| s + eps * T::lit((i + 1) as f64)).collect();
        let mut b: Vec<T> = demand.to_vec();
        let shift = eps * T::lit((m * (m + 1) / 2) as f64);
        b[n - 1] = b[n - 1] + shift;
        // balance any residual difference of the inputs onto the last column
        let diff = a.iter().fold(T::zero(), |s, &x| s + x) - b.iter().fold(T::zero(), |s, &x| s + x);
        b[n - 1] = b[n - 1] + diff;

        let mut flow = Array2::zeros((m, n));
        let mut basic = Array2::from_elem((m, n), false);
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = a[i].min(b[j]);
            flow[[i, j]] = x;
            basic[[i, j]] = true;
            basis.push((i, j));
            a[i] = a[i] - x;
            b[j] = b[j] - x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(basis.len(), m + n - 1);

        let scale = cost.iter().fold(T::one(), |s, c| s.max(c.soft.abs()));
        Self { m, n, cost, flow, basic, basis, iterations: 0, soft_tol: scale * T::epsilon() * T::lit(1024.0), hard_tol: T::lit(1e-6) }
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for &(i, j) in &self.basis {
            adj[i].push((self.m + j, i * self.n + j));
            adj[self.m + j].push((i, i * self.n + j));
        }
        adj
    }

    fn potentials(&self, adj: &[Vec<(usize, usize)>]) -> Vec<Lex<T>> {
        let m = self.m;
        let mut pot = vec![Lex::zero(); m + self.n];
        let mut seen = vec![false; m + self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, cell) in &adj[v] {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                let c = self.cost[[cell / self.n, cell % self.n]];
                // u_i + v_j = c_ij
                pot[w] = c.sub(pot[v]);
                stack.push(w);
            }
        }
        pot
    }

    fn is_negative(&self, r: Lex<T>) -> bool {
        r.hard < -self.hard_tol || (r.hard.abs() <= self.hard_tol && r.soft < -self.soft_tol)
    }

    fn entering(&self, pot: &[Lex<T>]) -> Option<(usize, usize)> {
        for i in 0..self.m {
            for j in 0..self.n {
                if self.basic[[i, j]] {
                    continue;
                }
                let r = self.cost[[i, j]].sub(pot[i].add(pot[self.m + j]));
                if self.is_negative(r) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Tree path from column node `m + j` to row node `i`, as cells.
    fn path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<(usize, usize)> {
        let total = self.m + self.n;
        let mut via = vec![None; total];
        let start = self.m + j;
        let mut seen = vec![false; total];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if v == i {
                break;
            }
            for &(w, cell) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    via[w] = Some((v, cell));
                    stack.push(w);
                }
            }
        }
        let mut cells = Vec::new();
        let mut v = i;
        while let Some((prev, cell)) = via[v] {
            cells.push((cell / self.n, cell % self.n));
            v = prev;
        }
        cells.reverse();
        cells
    }

    fn run(&mut self) -> Result<()> {
        let limit = 50 * (self.m * self.n + self.m + self.n) + 1000;
        loop {
            let adj = self.adjacency();
            let pot = self.potentials(&adj);
            let Some((i, j)) = self.entering(&pot) else {
                return Ok(());
            };
            if self.iterations >= limit {
                return Err(Error::Infeasible(format!("simplex exceeded {limit} pivots without reaching optimality")));
            }
            self.iterations += 1;
            // cycle: entering cell (+), then alternating (-, +, ...) along the
            // tree path from column j back to row i
            let path = self.path(&adj, i, j);
            let minus: Vec<(usize, usize)> = path.iter().copied().step_by(2).collect();
            let plus: Vec<(usize, usize)> = path.iter().copied().skip(1).step_by(2).collect();
            let (leave, theta) = minus
                .iter()
                .map(|&c| (c, self.flow[c]))
                .min_by(|(c1, x1), (c2, x2)| {
                    x1.partial_cmp(x2).unwrap_or(std::cmp::Ordering::Equal).then((c1.0 * self.n + c1.1).cmp(&(c2.0 * self.n + c2.1)))
                })
                .expect("cycle has a decreasing cell");
            for &c in &minus {
                self.flow[c] = self.flow[c] - theta;
            }
            for &c in &plus {
                self.flow[c] = self.flow[c] + theta;
            }
            self.flow[[i, j]] = theta;
            self.flow[leave] = T::zero();
            self.basic[leave] = false;
            self.basic[[i, j]] = true;
            let pos = self.basis.iter().position(|&c| c == leave).expect("leaving cell is basic");
            self.basis[pos] = (i, j);
        }
    }

    /// Flows of the current basis for the unperturbed supplies and demands,
    /// by peeling leaves of the basis tree.
    fn exact_flows(&self, supply: &[T], demand: &[T]) -> Array2<T> {
        let (m, n) = (self.m, self.n);
        let total = m + n;
        let adj = self.adjacency();
        let mut residual: Vec<T> = supply.iter().chain(demand.iter()).copied().collect();
        let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut used = vec![false; m * n];
        let mut leaves: Vec<usize> = (0..total).filter(|&v| degree[v] == 1).collect();
        let mut flow = Array2::zeros((m, n));
        while let Some(v) = leaves.pop() {
            let Some(&(w, cell)) = adj[v].iter().find(|(_, cell)| !used[*cell]) else {
                continue;
            };
            used[cell] = true;
            let x = residual[v];
            flow[[cell / n, cell % n]] = x;
            residual[w] = residual[w] - x;
            degree[v] -= 1;
            degree[w] -= 1;
            if degree[w] == 1 {
                leaves.push(w);
            }
        }
        let zero_tol = T::epsilon() * T::lit(16.0);
        flow.mapv_inplace(|x| if x <= zero_tol { T::zero() } else { x });
        flow
    }
}
