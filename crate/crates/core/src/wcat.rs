//! Finite weighted categories.
//!
//! A weighted category assigns every morphism an extended nonnegative weight
//! such that identities weigh zero and `w(g∘f) <= w(f) + w(g)`. Optimizing
//! over the arrows (taking the least weight of each hom-set) turns one into a
//! pq-metric space ([`optimize`]).
//!
//! Morphisms and objects are addressed by index. The composition table maps
//! `(f, g)` to the index of `g∘f`, i.e. the key lists the morphisms in the
//! order they are traversed.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::report::LawReport;
use crate::scalar::{is_ext_nonneg, Scalar};

/// Finite pseudo-quasimetric space: zero diagonal and the triangle
/// inequality, but no symmetry or separation required, and `inf` allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct PQMetric<T> {
    points: Vec<String>,
    dist: Array2<T>,
}

impl<T: Scalar> PQMetric<T> {
    pub fn new(points: Vec<String>, dist: Array2<T>) -> Result<Self> {
        let n = points.len();
        if dist.dim() != (n, n) {
            return Err(Error::Structural(format!("distance matrix is {:?}, expected {n}x{n}", dist.dim())));
        }
        if let Some(((i, j), _)) = dist.indexed_iter().find(|(_, d)| !is_ext_nonneg(**d)) {
            return Err(Error::Invariant(format!("distance ({i},{j}) is not an extended nonnegative real")));
        }
        Ok(Self { points, dist })
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn dist(&self) -> &Array2<T> {
        &self.dist
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self, x: usize, y: usize) -> T {
        self.dist[[x, y]]
    }

    pub fn check(&self, tol: T) -> LawReport {
        check_pq_metric(&self.dist, tol)
    }
}

/// Checks `d(x,x) = 0` and `d(x,z) <= d(x,y) + d(y,z)` (with `inf`
/// absorbing) on a square matrix.
pub fn check_pq_metric<T: Scalar>(dist: &Array2<T>, tol: T) -> LawReport {
    let mut report = LawReport::new();
    let n = dist.nrows();
    if dist.ncols() != n {
        report.violate("square", vec![dist.nrows(), dist.ncols()], n as f64, dist.ncols() as f64);
        return report;
    }
    for ((i, j), &d) in dist.indexed_iter() {
        if !is_ext_nonneg(d) {
            report.violate("nonnegative", vec![i, j], d.as_f64(), 0.0);
        }
    }
    for x in 0..n {
        if dist[[x, x]].is_nan() || dist[[x, x]] > tol {
            report.violate("zero-diagonal", vec![x], dist[[x, x]].as_f64(), 0.0);
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let lhs = dist[[x, z]];
                let rhs = dist[[x, y]] + dist[[y, z]];
                if !T::ext_le(lhs, rhs, tol) {
                    report.violate("triangle", vec![x, y, z], lhs.as_f64(), rhs.as_f64());
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct Morphism<T> {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub weight: T,
}

/// A category with finitely many objects and morphisms, each morphism
/// carrying a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FinWeightedCategory<T> {
    objects: Vec<String>,
    morphisms: Vec<Morphism<T>>,
    identity: Vec<usize>,
    composition: BTreeMap<(usize, usize), usize>,
}

impl<T: Scalar> FinWeightedCategory<T> {
    /// Builds a category, rejecting dangling indices and invalid weights.
    /// Category and weight laws are not checked here; see
    /// [`check_weighted_category`].
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<Morphism<T>>,
        identity: Vec<usize>,
        composition: BTreeMap<(usize, usize), usize>,
    ) -> Result<Self> {
        let n_obj = objects.len();
        let n_mor = morphisms.len();
        for (i, m) in morphisms.iter().enumerate() {
            if m.source >= n_obj || m.target >= n_obj {
                return Err(Error::Structural(format!("morphism {} ({i}) has a dangling endpoint", m.name)));
            }
            if !is_ext_nonneg(m.weight) {
                return Err(Error::Invariant(format!(
                    "morphism {} has weight {} which is not an extended nonnegative real",
                    m.name, m.weight
                )));
            }
        }
        if identity.len() != n_obj {
            return Err(Error::Structural(format!("{} identities for {n_obj} objects", identity.len())));
        }
        if let Some(&bad) = identity.iter().find(|&&i| i >= n_mor) {
            return Err(Error::Structural(format!("identity refers to missing morphism {bad}")));
        }
        for (&(f, g), &h) in &composition {
            if f >= n_mor || g >= n_mor || h >= n_mor {
                return Err(Error::Structural(format!("composition entry ({f}, {g}) -> {h} refers to a missing morphism")));
            }
        }
        Ok(Self { objects, morphisms, identity, composition })
    }

    /// Encodes a pq-metric space as the category with exactly one arrow
    /// `x -> y` of weight `d(x, y)` for every ordered pair. Morphism
    /// `x * n + y` is the arrow `x -> y`.
    pub fn from_pq_metric(space: &PQMetric<T>) -> Self {
        let n = space.len();
        let mut morphisms = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                morphisms.push(Morphism {
                    name: format!("{}->{}", space.points[x], space.points[y]),
                    source: x,
                    target: y,
                    weight: space.d(x, y),
                });
            }
        }
        let identity = (0..n).map(|x| x * n + x).collect();
        let mut composition = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    composition.insert((x * n + y, y * n + z), x * n + z);
                }
            }
        }
        Self { objects: space.points.clone(), morphisms, identity, composition }
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphisms(&self) -> &[Morphism<T>] {
        &self.morphisms
    }

    pub fn identity(&self, object: usize) -> usize {
        self.identity[object]
    }

    pub fn identities(&self) -> &[usize] {
        &self.identity
    }

    pub fn composition_table(&self) -> &BTreeMap<(usize, usize), usize> {
        &self.composition
    }

    pub fn weight(&self, f: usize) -> T {
        self.morphisms[f].weight
    }

    pub fn source(&self, f: usize) -> usize {
        self.morphisms[f].source
    }

    pub fn target(&self, f: usize) -> usize {
        self.morphisms[f].target
    }

    /// `g∘f` (first `f`, then `g`) when present in the table.
    pub fn then(&self, f: usize, g: usize) -> Option<usize> {
        self.composition.get(&(f, g)).copied()
    }

    /// Morphisms `x -> y`, in index order.
    pub fn hom(&self, x: usize, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.morphisms.iter().enumerate().filter(move |(_, m)| m.source == x && m.target == y).map(|(i, _)| i)
    }

    /// Checks the table is a category: identities sit at their objects, the
    /// table is defined exactly on composable pairs and composites have the
    /// right endpoints. Any failure here is structural.
    fn check_structure(&self) -> Result<()> {
        for (x, &id) in self.identity.iter().enumerate() {
            let m = &self.morphisms[id];
            if m.source != x || m.target != x {
                return Err(Error::Structural(format!(
                    "identity of object {} is {} which is not an endomorphism of it",
                    self.objects[x], m.name
                )));
            }
        }
        for (&(f, g), &h) in &self.composition {
            if self.target(f) != self.source(g) {
                return Err(Error::Structural(format!(
                    "composition defined on non-composable pair ({}, {})",
                    self.morphisms[f].name, self.morphisms[g].name
                )));
            }
            if self.source(h) != self.source(f) || self.target(h) != self.target(g) {
                return Err(Error::Structural(format!(
                    "composite {} of ({}, {}) has wrong endpoints",
                    self.morphisms[h].name, self.morphisms[f].name, self.morphisms[g].name
                )));
            }
        }
        for f in 0..self.morphisms.len() {
            for g in 0..self.morphisms.len() {
                if self.target(f) == self.source(g) && !self.composition.contains_key(&(f, g)) {
                    return Err(Error::Structural(format!(
                        "composition table missing composable pair ({}, {})",
                        self.morphisms[f].name, self.morphisms[g].name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Checks the category laws (units, associativity), zero identity weights
/// and the weight triangle inequality `w(g∘f) <= w(f) + w(g) + tol`.
///
/// Returns `Err` when the composition table is malformed; law failures go
/// into the report.
pub fn check_weighted_category<T: Scalar>(c: &FinWeightedCategory<T>, tol: T) -> Result<LawReport> {
    c.check_structure()?;
    let mut report = LawReport::new();
    let n_mor = c.morphisms.len();

    for (x, &id) in c.identity.iter().enumerate() {
        let w = c.weight(id);
        if w > tol {
            report.violate("identity-weight", vec![x], w.as_f64(), 0.0);
        }
    }
    for f in 0..n_mor {
        let left = c.then(c.identity(c.source(f)), f);
        if left != Some(f) {
            report.violate("unit-left", vec![f], left.map_or(-1.0, |h| h as f64), f as f64);
        }
        let right = c.then(f, c.identity(c.target(f)));
        if right != Some(f) {
            report.violate("unit-right", vec![f], right.map_or(-1.0, |h| h as f64), f as f64);
        }
    }
    for (&(f, g), &gf) in &c.composition {
        let lhs = c.weight(gf);
        let rhs = c.weight(f) + c.weight(g);
        if !T::ext_le(lhs, rhs, tol) {
            report.violate("triangle", vec![f, g], lhs.as_f64(), rhs.as_f64());
        }
        for h in 0..n_mor {
            if c.target(g) != c.source(h) {
                continue;
            }
            // h∘(g∘f) against (h∘g)∘f
            let a = c.then(gf, h);
            let b = c.then(g, h).and_then(|hg| c.then(f, hg));
            if a != b {
                report.violate("associativity", vec![f, g, h], a.map_or(-1.0, |m| m as f64), b.map_or(-1.0, |m| m as f64));
            }
        }
    }
    Ok(report)
}

/// Optimization over the arrows: `dist(x, y)` is the least weight of a
/// morphism `x -> y`, and `inf` when there is none.
pub fn optimize<T: Scalar>(c: &FinWeightedCategory<T>) -> PQMetric<T> {
    let n = c.objects.len();
    let mut dist = Array2::from_elem((n, n), T::infinity());
    for m in &c.morphisms {
        let d = &mut dist[[m.source, m.target]];
        *d = d.min(m.weight);
    }
    PQMetric { points: c.objects.clone(), dist }
}

/// Every nonempty hom-set attains its infimum. Always true for finite
/// categories; empty hom-sets are listed in the notes.
pub fn check_optimization_complete<T: Scalar>(c: &FinWeightedCategory<T>) -> LawReport {
    let mut report = LawReport::new();
    let opt = optimize(c);
    let n = c.objects.len();
    for x in 0..n {
        for y in 0..n {
            if c.hom(x, y).next().is_none() {
                report.note(format!("hom({}, {}) is empty; distance inf by convention", c.objects[x], c.objects[y]));
                continue;
            }
            let best = opt.d(x, y);
            if !c.hom(x, y).any(|f| c.weight(f) == best) {
                report.violate("attained", vec![x, y], best.as_f64(), best.as_f64());
            }
        }
    }
    report
}

/// A functor between finite categories, given as index tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinFunctor {
    pub objects: Vec<usize>,
    pub morphisms: Vec<usize>,
}

impl FinFunctor {
    pub fn identity<T>(c: &FinWeightedCategory<T>) -> Self {
        Self { objects: (0..c.objects.len()).collect(), morphisms: (0..c.morphisms.len()).collect() }
    }

    fn validate<T>(&self, c: &FinWeightedCategory<T>, d: &FinWeightedCategory<T>) -> Result<()> {
        if self.objects.len() != c.objects.len() {
            return Err(Error::Structural(format!("functor defined on {} of {} objects", self.objects.len(), c.objects.len())));
        }
        if self.morphisms.len() != c.morphisms.len() {
            return Err(Error::Structural(format!("functor defined on {} of {} morphisms", self.morphisms.len(), c.morphisms.len())));
        }
        if self.objects.iter().any(|&o| o >= d.objects.len()) || self.morphisms.iter().any(|&m| m >= d.morphisms.len()) {
            return Err(Error::Structural("functor maps outside the target category".into()));
        }
        Ok(())
    }
}

/// Checks the functor laws and `w(Ff) <= w(f) + tol`.
pub fn check_weighted_functor<T: Scalar>(
    functor: &FinFunctor,
    c: &FinWeightedCategory<T>,
    d: &FinWeightedCategory<T>,
    tol: T,
) -> Result<LawReport> {
    functor.validate(c, d)?;
    let mut report = LawReport::new();
    let fo = &functor.objects;
    let fm = &functor.morphisms;

    for (f, m) in c.morphisms.iter().enumerate() {
        let image = fm[f];
        if d.source(image) != fo[m.source] || d.target(image) != fo[m.target] {
            report.violate("functor-endpoints", vec![f], image as f64, f as f64);
        }
        if !T::ext_le(d.weight(image), m.weight, tol) {
            report.violate("weight", vec![f], d.weight(image).as_f64(), m.weight.as_f64());
        }
    }
    for (x, &id) in c.identity.iter().enumerate() {
        let expected = d.identity(fo[x]);
        if fm[id] != expected {
            report.violate("functor-identity", vec![x], fm[id] as f64, expected as f64);
        }
    }
    for (&(f, g), &gf) in &c.composition {
        let composed = d.then(fm[f], fm[g]);
        if composed != Some(fm[gf]) {
            report.violate("functor-composition", vec![f, g], fm[gf] as f64, composed.map_or(-1.0, |h| h as f64));
        }
    }
    Ok(report)
}

/// Checks that `dagger` makes `c` a symmetric weighted category: identity on
/// objects, an involution, contravariantly functorial and weight preserving.
pub fn check_dagger<T: Scalar>(c: &FinWeightedCategory<T>, dagger: &[usize], tol: T) -> Result<LawReport> {
    let n_mor = c.morphisms.len();
    if dagger.len() != n_mor || dagger.iter().any(|&m| m >= n_mor) {
        return Err(Error::Structural("dagger must map every morphism to a morphism".into()));
    }
    let mut report = LawReport::new();
    for f in 0..n_mor {
        let fd = dagger[f];
        if c.source(fd) != c.target(f) || c.target(fd) != c.source(f) {
            report.violate("dagger-endpoints", vec![f], fd as f64, f as f64);
        }
        if dagger[fd] != f {
            report.violate("involution", vec![f], dagger[fd] as f64, f as f64);
        }
        let (w, wd) = (c.weight(f), c.weight(fd));
        if T::ext_diff(w, wd) > tol {
            report.violate("dagger-weight", vec![f], wd.as_f64(), w.as_f64());
        }
    }
    for (x, &id) in c.identity.iter().enumerate() {
        if dagger[id] != id {
            report.violate("dagger-identity", vec![x], dagger[id] as f64, id as f64);
        }
    }
    for (&(f, g), &gf) in &c.composition {
        // (g∘f)† = f†∘g†: traverse g† first, then f†
        let expected = c.then(dagger[g], dagger[f]);
        if expected != Some(dagger[gf]) {
            report.violate("dagger-composition", vec![f, g], dagger[gf] as f64, expected.map_or(-1.0, |h| h as f64));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Isomorphic,
    QuasiIsomorphic,
    Neither,
}

/// Looks for mutually inverse `f: x -> y`, `g: y -> x`. Both of weight at
/// most `tol` makes the pair isomorphic; both finite, quasi-isomorphic.
pub fn classify_pair<T: Scalar>(c: &FinWeightedCategory<T>, x: usize, y: usize, tol: T) -> PairClass {
    let mut best = PairClass::Neither;
    for f in c.hom(x, y) {
        for g in c.hom(y, x) {
            let inverse = c.then(f, g) == Some(c.identity(x)) && c.then(g, f) == Some(c.identity(y));
            if !inverse {
                continue;
            }
            let (wf, wg) = (c.weight(f), c.weight(g));
            if wf <= tol && wg <= tol {
                return PairClass::Isomorphic;
            }
            if wf.is_finite() && wg.is_finite() {
                best = PairClass::QuasiIsomorphic;
            }
        }
    }
    best
}

/// Checks `functor` is a weighted functor whose action on every hom-set is
/// a weight-preserving bijection.
pub fn check_embedding<T: Scalar>(
    functor: &FinFunctor,
    c: &FinWeightedCategory<T>,
    d: &FinWeightedCategory<T>,
    tol: T,
) -> Result<LawReport> {
    let mut report = check_weighted_functor(functor, c, d, tol)?;
    let n = c.objects.len();
    for x in 0..n {
        for y in 0..n {
            let (fx, fy) = (functor.objects[x], functor.objects[y]);
            let mut hit: BTreeMap<usize, usize> = BTreeMap::new();
            for f in c.hom(x, y) {
                let image = functor.morphisms[f];
                if let Some(&other) = hit.get(&image) {
                    report.violate("embedding-injective", vec![other, f], image as f64, image as f64);
                } else {
                    hit.insert(image, f);
                }
                let (w, wi) = (c.weight(f), d.weight(image));
                if T::ext_diff(w, wi) > tol {
                    report.violate("embedding-weight", vec![f], wi.as_f64(), w.as_f64());
                }
            }
            for g in d.hom(fx, fy) {
                if !hit.contains_key(&g) {
                    report.violate("embedding-surjective", vec![x, y, g], 0.0, 1.0);
                }
            }
        }
    }
    Ok(report)
}

/// Natural log of the Lipschitz constant of `map: X -> Y`, clamped at zero.
///
/// Pairs at distance zero in both spaces are skipped; a positive image
/// distance over a zero source distance gives `inf`. Pairs at infinite
/// source distance do not constrain the constant.
pub fn lipschitz_weight<T: Scalar>(map: &[usize], x: &PQMetric<T>, y: &PQMetric<T>) -> T {
    let mut sup = T::zero();
    for a in 0..x.len() {
        for b in 0..x.len() {
            if a == b {
                continue;
            }
            let num = y.d(map[a], map[b]);
            let den = x.d(a, b);
            if den.is_infinite() || num == T::zero() {
                continue;
            }
            if den == T::zero() || num.is_infinite() {
                return T::infinity();
            }
            sup = sup.max((num / den).ln());
        }
    }
    sup
}

/// Normed categories: isomorphism in `c` coincides with isomorphism in
/// `optimize(c)` (distance zero both ways) for every pair of objects.
pub fn check_normed<T: Scalar>(c: &FinWeightedCategory<T>, tol: T) -> bool {
    let opt = optimize(c);
    let n = c.objects.len();
    (0..n).all(|x| {
        (0..n).all(|y| {
            let in_c = classify_pair(c, x, y, tol) == PairClass::Isomorphic;
            let in_opt = opt.d(x, y) <= tol && opt.d(y, x) <= tol;
            in_c == in_opt
        })
    })
}
