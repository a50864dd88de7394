//! Finite probability: spaces, measures, couplings, Markov kernels and the
//! operations that make couplings into a category (identity, gluing,
//! pushforward).
//!
//! Couplings are dense matrices; `joint[[i, j]]` is the mass of the pair
//! `(i, j)`. Nothing is renormalized silently: values that break an invariant
//! are rejected at construction.

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::report::LawReport;
use crate::scalar::{is_ext_nonneg, Scalar};
use crate::wcat::check_pq_metric;

/// A finite set of labelled points, optionally with a cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<T> {
    labels: Vec<String>,
    cost: Option<Array2<T>>,
}

impl<T: Scalar> FiniteSpace<T> {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Invariant("a space needs at least one point".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Invariant(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self { labels, cost: None })
    }

    /// Space with a cost matrix. The pq-metric axioms are not enforced here;
    /// call [`FiniteSpace::check_cost`].
    pub fn with_cost(labels: Vec<String>, cost: Array2<T>) -> Result<Self> {
        let mut space = Self::new(labels)?;
        let n = space.len();
        if cost.dim() != (n, n) {
            return Err(Error::Structural(format!("cost matrix is {:?}, expected {n}x{n}", cost.dim())));
        }
        if let Some(((i, j), _)) = cost.indexed_iter().find(|(_, c)| !is_ext_nonneg(**c)) {
            return Err(Error::Invariant(format!("cost ({}, {}) is not an extended nonnegative real", space.labels[i], space.labels[j])));
        }
        space.cost = Some(cost);
        Ok(space)
    }

    /// Points named `prefix0, prefix1, ...`.
    pub fn indexed(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("{prefix}{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cost(&self) -> Option<&Array2<T>> {
        self.cost.as_ref()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Checks the cost matrix is a pq-metric; `None` when there is no cost.
    pub fn check_cost(&self, tol: T) -> Option<LawReport> {
        self.cost.as_ref().map(|c| check_pq_metric(c, tol))
    }

    /// Same points in the same order (costs are not compared).
    pub fn same_points(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

fn same_space<T: Scalar>(a: &Arc<FiniteSpace<T>>, b: &Arc<FiniteSpace<T>>) -> bool {
    Arc::ptr_eq(a, b) || a.same_points(b)
}

/// Probability vector over a [`FiniteSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Measure<T> {
    space: Arc<FiniteSpace<T>>,
    mass: Array1<T>,
}

impl<T: Scalar> Measure<T> {
    pub fn new(space: Arc<FiniteSpace<T>>, mass: impl Into<Array1<T>>) -> Result<Self> {
        let mass = mass.into();
        if mass.len() != space.len() {
            return Err(Error::Structural(format!("{} masses for a space of {} points", mass.len(), space.len())));
        }
        if let Some((i, m)) = mass.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m >= T::zero())) {
            return Err(Error::Invariant(format!("mass {m} at {} is not a finite nonnegative number", space.labels[i])));
        }
        let total = mass.sum();
        if (total - T::one()).abs() > T::lit(T::MASS_TOL) {
            return Err(Error::Invariant(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { space, mass })
    }

    pub fn dirac(space: Arc<FiniteSpace<T>>, point: usize) -> Self {
        let mut mass = Array1::zeros(space.len());
        mass[point] = T::one();
        Self { space, mass }
    }

    pub fn uniform(space: Arc<FiniteSpace<T>>) -> Self {
        let n = space.len();
        let mass = Array1::from_elem(n, T::one() / T::lit(n as f64));
        Self { space, mass }
    }

    pub(crate) fn from_parts(space: Arc<FiniteSpace<T>>, mass: Array1<T>) -> Self {
        debug_assert_eq!(space.len(), mass.len());
        Self { space, mass }
    }

    pub fn space(&self) -> &Arc<FiniteSpace<T>> {
        &self.space
    }

    pub fn mass(&self) -> &Array1<T> {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Same space and masses within `tol` entrywise. On mismatch returns the
    /// first offending index with both values.
    pub fn mismatch(&self, other: &Self, tol: T) -> Option<(usize, T, T)> {
        if !same_space(&self.space, &other.space) {
            return Some((usize::MAX, T::zero(), T::zero()));
        }
        self.mass.iter().zip(other.mass.iter()).enumerate().find(|(_, (a, b))| (**a - **b).abs() > tol).map(|(i, (a, b))| (i, *a, *b))
    }
}

/// Joint distribution on `X x Y` together with its two marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling<T> {
    source: Measure<T>,
    target: Measure<T>,
    joint: Array2<T>,
}

impl<T: Scalar> Coupling<T> {
    /// Coupling of `source` and `target`; row and column sums of `joint` must
    /// reproduce the two measures.
    pub fn new(source: Measure<T>, target: Measure<T>, joint: Array2<T>) -> Result<Self> {
        let tol = T::lit(T::MASS_TOL);
        if joint.dim() != (source.len(), target.len()) {
            return Err(Error::Structural(format!(
                "joint is {:?}, marginals have {} and {} points",
                joint.dim(),
                source.len(),
                target.len()
            )));
        }
        check_nonneg(&joint)?;
        for (i, row) in joint.axis_iter(Axis(0)).enumerate() {
            let r = row.sum();
            if (r - source.mass[i]).abs() > tol {
                return Err(Error::Invariant(format!("row {} sums to {r}, first marginal is {}", source.space.labels[i], source.mass[i])));
            }
        }
        for (j, col) in joint.axis_iter(Axis(1)).enumerate() {
            let c = col.sum();
            if (c - target.mass[j]).abs() > tol {
                return Err(Error::Invariant(format!(
                    "column {} sums to {c}, second marginal is {}",
                    target.space.labels[j], target.mass[j]
                )));
            }
        }
        Ok(Self { source, target, joint })
    }

    /// Coupling whose marginals are read off the joint matrix.
    pub fn from_joint(source: Arc<FiniteSpace<T>>, target: Arc<FiniteSpace<T>>, joint: Array2<T>) -> Result<Self> {
        if joint.dim() != (source.len(), target.len()) {
            return Err(Error::Structural(format!("joint is {:?}, spaces have {} and {} points", joint.dim(), source.len(), target.len())));
        }
        check_nonneg(&joint)?;
        let total = joint.sum();
        if (total - T::one()).abs() > T::lit(T::MASS_TOL) {
            return Err(Error::Invariant(format!("joint sums to {total}, not 1")));
        }
        Ok(Self::from_joint_unchecked(source, target, joint))
    }

    pub(crate) fn from_joint_unchecked(source: Arc<FiniteSpace<T>>, target: Arc<FiniteSpace<T>>, joint: Array2<T>) -> Self {
        let p = joint.sum_axis(Axis(1));
        let q = joint.sum_axis(Axis(0));
        Self { source: Measure::from_parts(source, p), target: Measure::from_parts(target, q), joint }
    }

    pub(crate) fn from_parts(source: Measure<T>, target: Measure<T>, joint: Array2<T>) -> Self {
        debug_assert_eq!(joint.dim(), (source.len(), target.len()));
        Self { source, target, joint }
    }

    /// The independent coupling `p ⊗ q`.
    pub fn product(p: &Measure<T>, q: &Measure<T>) -> Self {
        let joint = Array2::from_shape_fn((p.len(), q.len()), |(i, j)| p.mass[i] * q.mass[j]);
        Self::from_parts(p.clone(), q.clone(), joint)
    }

    /// Rebuilds a joint from a first marginal and a forward kernel:
    /// `joint(i, j) = p(i) * k(j | i)`.
    pub fn from_kernel(p: &Measure<T>, k: &Kernel<T>) -> Result<Self> {
        if !same_space(&p.space, &k.source) {
            return Err(Error::Structural("kernel source differs from the measure's space".into()));
        }
        let joint = Array2::from_shape_fn(k.rows.dim(), |(i, j)| p.mass[i] * k.rows[[i, j]]);
        let q = joint.sum_axis(Axis(0));
        Ok(Self::from_parts(p.clone(), Measure::from_parts(k.target.clone(), q), joint))
    }

    pub fn source(&self) -> &Measure<T> {
        &self.source
    }

    pub fn target(&self) -> &Measure<T> {
        &self.target
    }

    pub fn joint(&self) -> &Array2<T> {
        &self.joint
    }

    /// Same coupling with its first marginal replaced; the joint is kept.
    pub(crate) fn with_source(&self, source: Measure<T>) -> Self {
        Self::from_parts(source, self.target.clone(), self.joint.clone())
    }

    /// Largest deviation between the stored marginals and the row/column
    /// sums of the joint.
    pub fn marginal_error(&self) -> T {
        let rows = self.joint.sum_axis(Axis(1));
        let cols = self.joint.sum_axis(Axis(0));
        let r = max_abs_diff(rows.iter(), self.source.mass.iter());
        let c = max_abs_diff(cols.iter(), self.target.mass.iter());
        r.max(c)
    }

    /// Largest entrywise difference of the joints (`inf` on shape mismatch).
    pub fn max_diff(&self, other: &Self) -> T {
        if self.joint.dim() != other.joint.dim() {
            return T::infinity();
        }
        max_abs_diff(self.joint.iter(), other.joint.iter())
    }
}

fn max_abs_diff<'a, T: Scalar>(a: impl Iterator<Item = &'a T>, b: impl Iterator<Item = &'a T>) -> T {
    a.zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

fn check_nonneg<T: Scalar>(joint: &Array2<T>) -> Result<()> {
    match joint.indexed_iter().find(|(_, v)| !(v.is_finite() && **v >= T::zero())) {
        Some(((i, j), v)) => Err(Error::Invariant(format!("entry ({i}, {j}) = {v} is not a finite nonnegative number"))),
        None => Ok(()),
    }
}

/// Row-stochastic matrix: row `i` is a distribution over the target space.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T> {
    source: Arc<FiniteSpace<T>>,
    target: Arc<FiniteSpace<T>>,
    rows: Array2<T>,
}

impl<T: Scalar> Kernel<T> {
    pub fn new(source: Arc<FiniteSpace<T>>, target: Arc<FiniteSpace<T>>, rows: Array2<T>) -> Result<Self> {
        if rows.dim() != (source.len(), target.len()) {
            return Err(Error::Structural(format!("kernel is {:?}, spaces have {} and {} points", rows.dim(), source.len(), target.len())));
        }
        check_nonneg(&rows)?;
        for (i, row) in rows.axis_iter(Axis(0)).enumerate() {
            let s = row.sum();
            if (s - T::one()).abs() > T::lit(T::MASS_TOL) {
                return Err(Error::Invariant(format!("kernel row {} sums to {s}", source.labels[i])));
            }
        }
        Ok(Self { source, target, rows })
    }

    pub(crate) fn from_parts(source: Arc<FiniteSpace<T>>, target: Arc<FiniteSpace<T>>, rows: Array2<T>) -> Self {
        Self { source, target, rows }
    }

    /// Dirac rows: `k(j | i) = [i = j]`.
    pub fn identity(space: Arc<FiniteSpace<T>>) -> Self {
        let rows = Array2::eye(space.len());
        Self { source: space.clone(), target: space, rows }
    }

    pub fn source(&self) -> &Arc<FiniteSpace<T>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteSpace<T>> {
        &self.target
    }

    pub fn rows(&self) -> &Array2<T> {
        &self.rows
    }

    /// `k(j | i)`.
    pub fn prob(&self, i: usize, j: usize) -> T {
        self.rows[[i, j]]
    }
}

/// A total map between the points of two spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap<T> {
    domain: Arc<FiniteSpace<T>>,
    codomain: Arc<FiniteSpace<T>>,
    table: Vec<usize>,
}

impl<T: Scalar> PointMap<T> {
    pub fn new(domain: Arc<FiniteSpace<T>>, codomain: Arc<FiniteSpace<T>>, table: Vec<usize>) -> Result<Self> {
        if table.len() != domain.len() {
            return Err(Error::Structural(format!("map defined on {} of {} points", table.len(), domain.len())));
        }
        if let Some((i, _)) = table.iter().enumerate().find(|(_, &y)| y >= codomain.len()) {
            return Err(Error::Structural(format!("{} is mapped outside the codomain", domain.labels[i])));
        }
        Ok(Self { domain, codomain, table })
    }

    pub fn identity(space: Arc<FiniteSpace<T>>) -> Self {
        let table = (0..space.len()).collect();
        Self { domain: space.clone(), codomain: space, table }
    }

    pub fn domain(&self) -> &Arc<FiniteSpace<T>> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteSpace<T>> {
        &self.codomain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.codomain.len()];
        self.table.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    /// Points of the domain over `y`.
    pub fn fiber(&self, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.table.iter().enumerate().filter(move |(_, &fy)| fy == y).map(|(x, _)| x)
    }
}

/// `I_p`: `p` copied onto the diagonal.
pub fn identity_coupling<T: Scalar>(p: &Measure<T>) -> Coupling<T> {
    let joint = Array2::from_diag(&p.mass);
    Coupling::from_parts(p.clone(), p.clone(), joint)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Conditional of the second coordinate given the first.
    Forward,
    /// Conditional of the first coordinate given the second.
    Backward,
}

/// Conditional distribution of a coupling as a Markov kernel.
///
/// Forward row `i` is `joint[i, ·] / p(i)`; backward row `j` is
/// `joint[·, j] / q(j)`. Points of zero mass get the uniform row: the
/// conditional is only determined almost surely, and every consumer
/// multiplies these rows by zero.
pub fn conditional<T: Scalar>(s: &Coupling<T>, direction: Direction) -> Kernel<T> {
    let (from, to, joint) = match direction {
        Direction::Forward => (&s.source, &s.target, s.joint.view()),
        Direction::Backward => (&s.target, &s.source, s.joint.t()),
    };
    let m = to.len();
    let uniform = T::one() / T::lit(m as f64);
    let rows = Array2::from_shape_fn((from.len(), m), |(i, j)| {
        let mass = from.mass[i];
        if mass > T::zero() {
            joint[[i, j]] / mass
        } else {
            uniform
        }
    });
    Kernel::from_parts(from.space.clone(), to.space.clone(), rows)
}

/// Checks `s⃗(j|i) p(i) = s(i,j) = s⃖(i|j) q(j)` on every pair of points.
pub fn bayes_check<T: Scalar>(s: &Coupling<T>, tol: T) -> LawReport {
    let mut report = LawReport::new();
    let fwd = conditional(s, Direction::Forward);
    let bwd = conditional(s, Direction::Backward);
    for ((i, j), &v) in s.joint.indexed_iter() {
        let lhs = fwd.rows[[i, j]] * s.source.mass[i];
        if (lhs - v).abs() > tol {
            report.violate("bayes-forward", vec![i, j], lhs.as_f64(), v.as_f64());
        }
        let rhs = bwd.rows[[j, i]] * s.target.mass[j];
        if (rhs - v).abs() > tol {
            report.violate("bayes-backward", vec![i, j], rhs.as_f64(), v.as_f64());
        }
    }
    report
}

/// Gluing `t∘s` of `s ∈ Γ(p, q)` and `t ∈ Γ(q, r)`:
/// `(t∘s)(x, z) = Σ_y s⃖(x|y) t⃗(z|y) q(y)`.
///
/// Fails when the second marginal of `s` and the first of `t` differ by
/// more than `tol`.
pub fn compose<T: Scalar>(t: &Coupling<T>, s: &Coupling<T>, tol: T) -> Result<Coupling<T>> {
    if let Some((y, a, b)) = s.target.mismatch(&t.source, tol) {
        return Err(if y == usize::MAX {
            Error::Composition("middle spaces differ".into())
        } else {
            Error::Composition(format!("middle marginals differ at {}: {a} vs {b}", s.target.space.labels[y]))
        });
    }
    let back = conditional(s, Direction::Backward);
    let fwd = conditional(t, Direction::Forward);
    let q = &s.target.mass;
    let (nx, nz) = (s.source.len(), t.target.len());
    let mut joint = Array2::zeros((nx, nz));
    for (y, &qy) in q.iter().enumerate() {
        if qy == T::zero() {
            continue;
        }
        for x in 0..nx {
            let a = back.rows[[y, x]] * qy;
            if a == T::zero() {
                continue;
            }
            for z in 0..nz {
                joint[[x, z]] = joint[[x, z]] + a * fwd.rows[[y, z]];
            }
        }
    }
    Ok(Coupling::from_parts(s.source.clone(), t.target.clone(), joint))
}

/// Chapman-Kolmogorov: `(t∘s)(z|x) = Σ_y t(z|y) s(y|x)`.
pub fn kernel_compose<T: Scalar>(t: &Kernel<T>, s: &Kernel<T>) -> Result<Kernel<T>> {
    if !same_space(&s.target, &t.source) {
        return Err(Error::Structural(format!("kernel shapes {:?} then {:?} do not compose", s.rows.dim(), t.rows.dim())));
    }
    Ok(Kernel::from_parts(s.source.clone(), t.target.clone(), s.rows.dot(&t.rows)))
}

/// `(Σ c(x,y)^k s(x,y))^(1/k)` with `0 * inf = 0`.
pub fn cost_k<T: Scalar>(s: &Coupling<T>, cost: &Array2<T>, k: u32) -> Result<T> {
    if k < 1 {
        return Err(Error::Argument("k must be an integer >= 1".into()));
    }
    if cost.dim() != s.joint.dim() {
        return Err(Error::Structural(format!("cost is {:?}, coupling is {:?}", cost.dim(), s.joint.dim())));
    }
    let total = s.joint.iter().zip(cost.iter()).fold(T::zero(), |acc, (&m, &c)| acc + T::weighted(m, c.powi(k as i32)));
    Ok(kth_root(total, k))
}

pub(crate) fn kth_root<T: Scalar>(x: T, k: u32) -> T {
    match k {
        1 => x,
        2 => x.sqrt(),
        _ => x.powf(T::one() / T::lit(k as f64)),
    }
}

/// Minkowski triangle for gluing: `cost_k(t∘s) <= cost_k(s) + cost_k(t) + tol`.
pub fn cost_triangle_check<T: Scalar>(s: &Coupling<T>, t: &Coupling<T>, cost: &Array2<T>, k: u32, tol: T) -> Result<LawReport> {
    let ts = compose(t, s, tol)?;
    let lhs = cost_k(&ts, cost, k)?;
    let rhs = cost_k(s, cost, k)? + cost_k(t, cost, k)?;
    let mut report = LawReport::new();
    if !T::ext_le(lhs, rhs, tol) {
        report.violate("cost-triangle", vec![k as usize], lhs.as_f64(), rhs.as_f64());
    }
    Ok(report)
}

/// Transpose: `s†(y, x) = s(x, y)`, marginals swapped.
pub fn dagger_coupling<T: Scalar>(s: &Coupling<T>) -> Coupling<T> {
    Coupling::from_parts(s.target.clone(), s.source.clone(), s.joint.t().to_owned())
}

/// `f♯p(y) = Σ_{f(x)=y} p(x)`.
pub fn pushforward_measure<T: Scalar>(f: &PointMap<T>, p: &Measure<T>) -> Result<Measure<T>> {
    if !same_space(&f.domain, &p.space) {
        return Err(Error::Structural("measure does not live on the map's domain".into()));
    }
    let mut mass = Array1::zeros(f.codomain.len());
    for (x, &m) in p.mass.iter().enumerate() {
        mass[f.table[x]] = mass[f.table[x]] + m;
    }
    Ok(Measure::from_parts(f.codomain.clone(), mass))
}

/// `f²♯s(y, y') = Σ_{f(x)=y, f(x')=y'} s(x, x')`, for `s` a coupling on `X x X`.
pub fn pushforward_coupling<T: Scalar>(f: &PointMap<T>, s: &Coupling<T>) -> Result<Coupling<T>> {
    if !same_space(&f.domain, &s.source.space) || !same_space(&f.domain, &s.target.space) {
        return Err(Error::Structural("coupling does not live on the map's domain".into()));
    }
    let m = f.codomain.len();
    let mut joint = Array2::zeros((m, m));
    for ((x, xp), &v) in s.joint.indexed_iter() {
        let cell = &mut joint[[f.table[x], f.table[xp]]];
        *cell = *cell + v;
    }
    let source = pushforward_measure(f, &s.source)?;
    let target = pushforward_measure(f, &s.target)?;
    Ok(Coupling::from_parts(source, target, joint))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn space(n: usize) -> Arc<FiniteSpace<f64>> {
        Arc::new(FiniteSpace::indexed("x", n).unwrap())
    }

    fn measure(s: &Arc<FiniteSpace<f64>>, m: &[f64]) -> Measure<f64> {
        Measure::new(s.clone(), m.to_vec()).unwrap()
    }

    #[test]
    fn space_validation() {
        assert!(FiniteSpace::<f64>::new(vec![]).is_err());
        assert!(FiniteSpace::<f64>::new(vec!["a".into(), "a".into()]).is_err());
        let bad = FiniteSpace::with_cost(vec!["a".into()], array![[f64::NAN]]);
        assert!(matches!(bad, Err(Error::Invariant(_))));
        let s = FiniteSpace::with_cost(vec!["a".into(), "b".into()], array![[0.0, 1.0], [f64::INFINITY, 0.0]]).unwrap();
        assert!(s.check_cost(1e-12).unwrap().passed());
    }

    #[test]
    fn measure_validation() {
        let x = space(2);
        assert!(Measure::new(x.clone(), vec![0.5, 0.5]).is_ok());
        assert!(matches!(Measure::new(x.clone(), vec![0.6, 0.5]), Err(Error::Invariant(_))));
        assert!(matches!(Measure::new(x.clone(), vec![1.5, -0.5]), Err(Error::Invariant(_))));
        assert!(matches!(Measure::new(x.clone(), vec![1.0]), Err(Error::Structural(_))));
        // within the 1e-12 tolerance
        assert!(Measure::new(x, vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn identity_coupling_examples() {
        let x = space(2);
        let i = identity_coupling(&measure(&x, &[1.0, 0.0]));
        assert_eq!(i.joint(), &array![[1.0, 0.0], [0.0, 0.0]]);
        let i = identity_coupling(&measure(&x, &[0.5, 0.5]));
        assert_eq!(i.joint(), &array![[0.5, 0.0], [0.0, 0.5]]);
        let cost = array![[0.0, 3.0], [1.0, 0.0]];
        for k in 1..=4 {
            assert_eq!(cost_k(&i, &cost, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn coupling_rejects_broken_marginals() {
        let x = space(2);
        let p = measure(&x, &[0.5, 0.5]);
        let perturbed = array![[0.3, 0.2], [0.2, 0.31]];
        assert!(matches!(Coupling::new(p.clone(), p, perturbed), Err(Error::Invariant(_))));
    }

    #[test]
    fn conditional_examples() {
        let x = space(3);
        let p = measure(&x, &[0.2, 0.3, 0.5]);
        let k = conditional(&identity_coupling(&p), Direction::Forward);
        assert_eq!(k.rows(), &Array2::<f64>::eye(3));

        let q = measure(&x, &[0.1, 0.6, 0.3]);
        let prod = Coupling::product(&p, &q);
        let k = conditional(&prod, Direction::Forward);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(k.prob(i, j), q.mass()[j], epsilon = 1e-15);
            }
        }

        let y = space(2);
        let s = Coupling::from_joint(y.clone(), y, array![[0.2, 0.2], [0.3, 0.3]]).unwrap();
        let k = conditional(&s, Direction::Forward);
        assert_abs_diff_eq!(k.rows(), &array![[0.5, 0.5], [0.5, 0.5]], epsilon = 1e-15);
        let b = conditional(&s, Direction::Backward);
        assert_abs_diff_eq!(b.rows(), &array![[0.4, 0.6], [0.4, 0.6]], epsilon = 1e-15);
    }

    #[test]
    fn zero_mass_rows_are_uniform() {
        let x = space(3);
        let p = measure(&x, &[0.0, 0.5, 0.5]);
        let k = conditional(&identity_coupling(&p), Direction::Forward);
        for j in 0..3 {
            assert_abs_diff_eq!(k.prob(0, j), 1.0 / 3.0);
        }
    }

    #[test]
    fn bayes_holds() {
        let y = space(2);
        let s = Coupling::from_joint(y.clone(), y.clone(), array![[0.1, 0.2], [0.0, 0.7]]).unwrap();
        assert!(bayes_check(&s, 1e-15).passed());
        let p = measure(&y, &[0.0, 1.0]);
        assert!(bayes_check(&identity_coupling(&p), 0.0).passed());
    }

    #[test]
    fn compose_units_and_products() {
        let x = space(3);
        let p = measure(&x, &[0.2, 0.3, 0.5]);
        let q = measure(&x, &[0.6, 0.0, 0.4]);
        let r = measure(&x, &[0.1, 0.1, 0.8]);
        let s = Coupling::product(&p, &q);
        let t = Coupling::product(&q, &r);
        let ts = compose(&t, &s, 1e-12).unwrap();
        assert!(ts.max_diff(&Coupling::product(&p, &r)) < 1e-15);

        let s1 = compose(&s, &identity_coupling(&p), 1e-12).unwrap();
        assert!(s1.max_diff(&s) < 1e-15);
        let s2 = compose(&identity_coupling(&q), &s, 1e-12).unwrap();
        assert!(s2.max_diff(&s) < 1e-15);
    }

    #[test]
    fn compose_rejects_mismatched_middle() {
        let x = space(2);
        let p = measure(&x, &[0.5, 0.5]);
        let q = measure(&x, &[0.9, 0.1]);
        let s = identity_coupling(&p);
        let t = identity_coupling(&q);
        assert!(matches!(compose(&t, &s, 1e-9), Err(Error::Composition(_))));
    }

    #[test]
    fn kernel_compose_examples() {
        let x = space(2);
        let half = Kernel::new(x.clone(), x.clone(), array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let sq = kernel_compose(&half, &half).unwrap();
        assert_abs_diff_eq!(sq.rows(), half.rows(), epsilon = 1e-15);
        let k = Kernel::new(x.clone(), x.clone(), array![[0.1, 0.9], [0.7, 0.3]]).unwrap();
        assert_eq!(kernel_compose(&Kernel::identity(x.clone()), &k).unwrap(), k);
        assert_eq!(kernel_compose(&k, &Kernel::identity(x.clone())).unwrap(), k);
        let z = space(3);
        let bad = Kernel::identity(z);
        assert!(kernel_compose(&bad, &k).is_err());
    }

    #[test]
    fn cost_k_examples() {
        let x = space(2);
        let cost = array![[0.0, 1.0], [1.0, 0.0]];
        let s = Coupling::from_joint(x.clone(), x.clone(), array![[0.0, 1.0], [0.0, 0.0]]).unwrap();
        for k in 1..=5 {
            assert_eq!(cost_k(&s, &cost, k).unwrap(), 1.0);
        }
        let cost2 = array![[0.0, 2.0], [2.0, 0.0]];
        let s = Coupling::from_joint(x.clone(), x.clone(), array![[0.5, 0.5], [0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(cost_k(&s, &cost2, 2).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(cost_k(&s, &cost2, 2).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(cost_k(&s, &cost2, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn infinite_costs_only_count_with_mass() {
        let x = space(2);
        let cost = array![[0.0, f64::INFINITY], [1.0, 0.0]];
        let s = Coupling::from_joint(x.clone(), x.clone(), array![[0.5, 0.0], [0.25, 0.25]]).unwrap();
        assert_eq!(cost_k(&s, &cost, 1).unwrap(), 0.25);
        let s = Coupling::from_joint(x.clone(), x, array![[0.5, 0.1], [0.15, 0.25]]).unwrap();
        assert_eq!(cost_k(&s, &cost, 2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn dagger_examples() {
        let x = space(2);
        let s = Coupling::from_joint(x.clone(), x.clone(), array![[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(dagger_coupling(&s).joint(), &array![[0.0, 0.0], [1.0, 0.0]]);
        let p = measure(&x, &[0.3, 0.7]);
        let i = identity_coupling(&p);
        assert_eq!(dagger_coupling(&i), i);
    }

    #[test]
    fn pushforward_examples() {
        let x = space(3);
        let y = space(2);
        let p = measure(&x, &[0.2, 0.3, 0.5]);
        assert_eq!(pushforward_measure(&PointMap::identity(x.clone()), &p).unwrap(), p);

        let constant = PointMap::new(x.clone(), y.clone(), vec![1, 1, 1]).unwrap();
        let pushed = pushforward_measure(&constant, &p).unwrap();
        assert_abs_diff_eq!(pushed.mass()[1], 1.0);
        assert_eq!(pushed.mass()[0], 0.0);

        let f = PointMap::new(x.clone(), y, vec![0, 1, 0]).unwrap();
        let i = identity_coupling(&p);
        let pushed = pushforward_coupling(&f, &i).unwrap();
        let expected = identity_coupling(&pushforward_measure(&f, &p).unwrap());
        assert!(pushed.max_diff(&expected) < 1e-15);
        assert!(PointMap::new(x.clone(), x, vec![0, 5, 1]).is_err());
    }

    #[test]
    fn kernel_roundtrip_on_positive_rows() {
        let x = space(3);
        let s = Coupling::from_joint(x.clone(), x, array![[0.1, 0.05, 0.05], [0.0, 0.3, 0.1], [0.2, 0.0, 0.2]]).unwrap();
        let rebuilt = Coupling::from_kernel(s.source(), &conditional(&s, Direction::Forward)).unwrap();
        assert!(rebuilt.max_diff(&s) < 1e-16);
    }

    #[test]
    fn f32_compose_units() {
        let x = Arc::new(FiniteSpace::<f32>::indexed("x", 2).unwrap());
        let p = Measure::new(x.clone(), vec![0.25f32, 0.75]).unwrap();
        let s = Coupling::from_joint(x.clone(), x, array![[0.125f32, 0.125], [0.25, 0.5]]).unwrap();
        let composed = compose(&s, &identity_coupling(&p), 1e-6).unwrap();
        assert!(composed.max_diff(&s) < 1e-6);
    }
}
