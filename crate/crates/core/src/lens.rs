//! Set-based lenses between finite spaces, their laws, and the metric
//! variants (metric lenses, submetries).
//!
//! A lens `X → Y` is a projection `f: X → Y` with a lift `φ: X × Y → X`.
//! The lift table is stored row-major: `φ(x, y)` lives at `x * |Y| + y`.
//! Construction only checks that the tables are total; the three laws are
//! checked by [`check_lens_laws`], so unlawful lenses can be built and
//! inspected.

// `!(a <= tol)` is deliberate: NaN counts as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::prob::{FiniteSpace, PointMap};
use crate::report::LawReport;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SetLens<T> {
    project: PointMap<T>,
    lift: Vec<usize>,
}

impl<T: Scalar> SetLens<T> {
    pub fn new(domain: Arc<FiniteSpace<T>>, codomain: Arc<FiniteSpace<T>>, project: Vec<usize>, lift: Vec<usize>) -> Result<Self> {
        let project = PointMap::new(domain, codomain, project)?;
        Self::from_map(project, lift)
    }

    pub fn from_map(project: PointMap<T>, lift: Vec<usize>) -> Result<Self> {
        let (nx, ny) = (project.domain().len(), project.codomain().len());
        if lift.len() != nx * ny {
            return Err(Error::Structural(format!("lift table has {} entries, expected {nx}x{ny}", lift.len())));
        }
        if let Some(i) = lift.iter().position(|&x| x >= nx) {
            return Err(Error::Structural(format!(
                "lift of ({}, {}) is outside the domain",
                project.domain().labels()[i / ny],
                project.codomain().labels()[i % ny]
            )));
        }
        Ok(Self { project, lift })
    }

    /// Like [`SetLens::new`] but also requires the three lens laws.
    pub fn lawful(domain: Arc<FiniteSpace<T>>, codomain: Arc<FiniteSpace<T>>, project: Vec<usize>, lift: Vec<usize>) -> Result<Self> {
        let lens = Self::new(domain, codomain, project, lift)?;
        let report = check_lens_laws(&lens);
        if !report.passed() {
            return Err(Error::Invariant(format!("lens laws fail: {report}")));
        }
        Ok(lens)
    }

    pub fn domain(&self) -> &Arc<FiniteSpace<T>> {
        self.project.domain()
    }

    pub fn codomain(&self) -> &Arc<FiniteSpace<T>> {
        self.project.codomain()
    }

    pub fn projection(&self) -> &PointMap<T> {
        &self.project
    }

    pub fn lift_table(&self) -> &[usize] {
        &self.lift
    }

    /// `f(x)`
    pub fn project(&self, x: usize) -> usize {
        self.project.apply(x)
    }

    /// `φ(x, y)`
    pub fn lift(&self, x: usize, y: usize) -> usize {
        self.lift[x * self.codomain().len() + y]
    }
}

/// Witnesses for each of the three lens laws.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LensLawReport {
    /// `(x, y)` with `f(φ(x, y)) ≠ y`.
    pub lifting: Vec<(usize, usize)>,
    /// `x` with `φ(x, f(x)) ≠ x`.
    pub identity: Vec<usize>,
    /// `(x, y, y')` with `φ(φ(x, y), y') ≠ φ(x, y')`.
    pub composition: Vec<(usize, usize, usize)>,
}

impl LensLawReport {
    pub fn lifting_ok(&self) -> bool {
        self.lifting.is_empty()
    }

    pub fn identity_ok(&self) -> bool {
        self.identity.is_empty()
    }

    pub fn composition_ok(&self) -> bool {
        self.composition.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.lifting_ok() && self.identity_ok() && self.composition_ok()
    }

    /// As a generic report; point indices become the witnesses.
    pub fn to_law_report(&self) -> LawReport {
        let mut r = LawReport::new();
        for &(x, y) in &self.lifting {
            r.violate("lens-lifting", vec![x, y], f64::NAN, f64::NAN);
        }
        for &x in &self.identity {
            r.violate("lens-identity", vec![x], f64::NAN, f64::NAN);
        }
        for &(x, y, y2) in &self.composition {
            r.violate("lens-composition", vec![x, y, y2], f64::NAN, f64::NAN);
        }
        r
    }
}

impl fmt::Display for LensLawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |ok: bool| if ok { "ok" } else { "FAILED" };
        write!(f, "lifting {}, identity {}, composition {}", flag(self.lifting_ok()), flag(self.identity_ok()), flag(self.composition_ok()))
    }
}

fn lifting_and_composition<T: Scalar>(l: &SetLens<T>, r: &mut LensLawReport) {
    let (nx, ny) = (l.domain().len(), l.codomain().len());
    for x in 0..nx {
        for y in 0..ny {
            let lifted = l.lift(x, y);
            if l.project(lifted) != y {
                r.lifting.push((x, y));
            }
            for y2 in 0..ny {
                if l.lift(lifted, y2) != l.lift(x, y2) {
                    r.composition.push((x, y, y2));
                }
            }
        }
    }
}

/// Exhaustive, exact check of the lifting, identity and composition laws.
pub fn check_lens_laws<T: Scalar>(l: &SetLens<T>) -> LensLawReport {
    let mut r = LensLawReport::default();
    lifting_and_composition(l, &mut r);
    for x in 0..l.domain().len() {
        if l.lift(x, l.project(x)) != x {
            r.identity.push(x);
        }
    }
    r
}

/// Lens laws over a pq-metric domain: the identity law only asks
/// `d(x, φ(x, f(x))) = 0` within `tol`. Lifting and composition stay exact.
pub fn check_lens_laws_pq<T: Scalar>(l: &SetLens<T>, dx: &Array2<T>, tol: T) -> Result<LensLawReport> {
    let n = l.domain().len();
    if dx.dim() != (n, n) {
        return Err(Error::Structural(format!("domain distance is {:?}, expected {n}x{n}", dx.dim())));
    }
    let mut r = LensLawReport::default();
    lifting_and_composition(l, &mut r);
    for x in 0..n {
        if !(dx[[x, l.lift(x, l.project(x))]] <= tol) {
            r.identity.push(x);
        }
    }
    Ok(r)
}

pub fn identity_lens<T: Scalar>(space: Arc<FiniteSpace<T>>) -> SetLens<T> {
    let n = space.len();
    let lift = (0..n).flat_map(|_| 0..n).collect();
    SetLens { project: PointMap::identity(space), lift }
}

/// `l2 ∘ l1`: project `g ∘ f`, lift `φ(x, ψ(f(x), z))`.
pub fn compose_lenses<T: Scalar>(l1: &SetLens<T>, l2: &SetLens<T>) -> Result<SetLens<T>> {
    if !l1.codomain().same_points(l2.domain()) {
        return Err(Error::Structural("codomain of the first lens is not the domain of the second".into()));
    }
    let (nx, nz) = (l1.domain().len(), l2.codomain().len());
    let project = (0..nx).map(|x| l2.project(l1.project(x))).collect();
    let mut lift = Vec::with_capacity(nx * nz);
    for x in 0..nx {
        for z in 0..nz {
            lift.push(l1.lift(x, l2.lift(l1.project(x), z)));
        }
    }
    SetLens::new(l1.domain().clone(), l2.codomain().clone(), project, lift)
}

/// `Y × Z` with points `(y, z)` in lexicographic order (index `y * |Z| + z`)
/// and labels `"(y,z)"`. When both factors carry costs the product gets the
/// sum `d_Y + d_Z`.
pub fn product_space<T: Scalar>(y: &FiniteSpace<T>, z: &FiniteSpace<T>) -> Result<FiniteSpace<T>> {
    let labels: Vec<String> = y.labels().iter().flat_map(|a| z.labels().iter().map(move |b| format!("({a},{b})"))).collect();
    match (y.cost(), z.cost()) {
        (Some(cy), Some(cz)) => {
            let nz = z.len();
            let cost = Array2::from_shape_fn((y.len() * nz, y.len() * nz), |(i, j)| cy[[i / nz, j / nz]] + cz[[i % nz, j % nz]]);
            FiniteSpace::with_cost(labels, cost)
        }
        _ => FiniteSpace::new(labels),
    }
}

/// `π1: Y × Z → Y` with `φ((y, z), y') = (y', z)`.
pub fn product_projection_lens<T: Scalar>(y: Arc<FiniteSpace<T>>, z: &FiniteSpace<T>) -> Result<SetLens<T>> {
    let (ny, nz) = (y.len(), z.len());
    let domain = Arc::new(product_space(&y, z)?);
    let project = (0..ny * nz).map(|i| i / nz).collect();
    let mut lift = Vec::with_capacity(ny * nz * ny);
    for i in 0..ny * nz {
        for y2 in 0..ny {
            lift.push(y2 * nz + i % nz);
        }
    }
    SetLens::new(domain, y, project, lift)
}

/// Metric spaces are symmetric; pq-metric spaces need not be, and lenses
/// over them satisfy the identity law only up to distance zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricMode {
    #[default]
    Metric,
    PseudoQuasi,
}

fn check_square<T>(d: &Array2<T>, n: usize, what: &str) -> Result<()> {
    if d.dim() != (n, n) {
        return Err(Error::Structural(format!("{what} distance is {:?}, expected {n}x{n}", d.dim())));
    }
    Ok(())
}

fn symmetry<T: Scalar>(d: &Array2<T>, law: &str, tol: T, r: &mut LawReport) {
    let n = d.nrows();
    for i in 0..n {
        for j in i + 1..n {
            if T::ext_diff(d[[i, j]], d[[j, i]]) > tol {
                r.violate(law, vec![i, j], d[[i, j]].as_f64(), d[[j, i]].as_f64());
            }
        }
    }
}

fn lipschitz<T: Scalar>(f: &PointMap<T>, dx: &Array2<T>, dy: &Array2<T>, tol: T, r: &mut LawReport) {
    let n = f.domain().len();
    for a in 0..n {
        for b in 0..n {
            let (lhs, rhs) = (dy[[f.apply(a), f.apply(b)]], dx[[a, b]]);
            if !T::ext_le(lhs, rhs, tol) {
                r.violate("lipschitz", vec![a, b], lhs.as_f64(), rhs.as_f64());
            }
        }
    }
}

/// Metric lens: `f` is 1-Lipschitz and `d_X(x, φ(x, y)) = d_Y(f(x), y)`.
/// The lens laws are included (identity law up to distance zero in
/// pq mode); in metric mode both distances must also be symmetric.
pub fn check_metric_lens<T: Scalar>(l: &SetLens<T>, dx: &Array2<T>, dy: &Array2<T>, mode: MetricMode, tol: T) -> Result<LawReport> {
    let (nx, ny) = (l.domain().len(), l.codomain().len());
    check_square(dx, nx, "domain")?;
    check_square(dy, ny, "codomain")?;
    let mut r = match mode {
        MetricMode::Metric => check_lens_laws(l),
        MetricMode::PseudoQuasi => check_lens_laws_pq(l, dx, tol)?,
    }
    .to_law_report();
    if mode == MetricMode::Metric {
        symmetry(dx, "domain-symmetry", tol, &mut r);
        symmetry(dy, "codomain-symmetry", tol, &mut r);
    }
    lipschitz(l.projection(), dx, dy, tol, &mut r);
    for x in 0..nx {
        for y in 0..ny {
            let (lhs, rhs) = (dx[[x, l.lift(x, y)]], dy[[l.project(x), y]]);
            if T::ext_diff(lhs, rhs) > tol {
                r.violate("lift-distance", vec![x, y], lhs.as_f64(), rhs.as_f64());
            }
        }
    }
    Ok(r)
}

/// Submetry: `f` is 1-Lipschitz and for all `x, y'` some `x'` over `y'` has
/// `d_X(x, x') = d_Y(f(x), y')`. An empty fiber is a `surjective` violation.
pub fn check_submetry<T: Scalar>(f: &PointMap<T>, dx: &Array2<T>, dy: &Array2<T>, mode: MetricMode, tol: T) -> Result<LawReport> {
    let (nx, ny) = (f.domain().len(), f.codomain().len());
    check_square(dx, nx, "domain")?;
    check_square(dy, ny, "codomain")?;
    let mut r = LawReport::new();
    if mode == MetricMode::Metric {
        symmetry(dx, "domain-symmetry", tol, &mut r);
        symmetry(dy, "codomain-symmetry", tol, &mut r);
    }
    lipschitz(f, dx, dy, tol, &mut r);
    for y2 in 0..ny {
        if f.fiber(y2).next().is_none() {
            r.violate("surjective", vec![y2], 0.0, 1.0);
            continue;
        }
        for x in 0..nx {
            if submetry_witness(f, dx, dy, x, y2, tol).is_none() {
                r.violate("submetry-witness", vec![x, y2], f64::NAN, dy[[f.apply(x), y2]].as_f64());
            }
        }
    }
    Ok(r)
}

fn submetry_witness<T: Scalar>(f: &PointMap<T>, dx: &Array2<T>, dy: &Array2<T>, x: usize, y2: usize, tol: T) -> Option<usize> {
    let target = dy[[f.apply(x), y2]];
    f.fiber(y2).find(|&x2| T::ext_diff(dx[[x, x2]], target) <= tol)
}

/// Lift table of a submetry, choosing the lowest-index witness. The result
/// satisfies the lifting and identity laws; composition may fail.
pub fn submetry_to_lifting<T: Scalar>(f: &PointMap<T>, dx: &Array2<T>, dy: &Array2<T>, tol: T) -> Result<Vec<usize>> {
    let (nx, ny) = (f.domain().len(), f.codomain().len());
    check_square(dx, nx, "domain")?;
    check_square(dy, ny, "codomain")?;
    let mut lift = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y2 in 0..ny {
            let w = submetry_witness(f, dx, dy, x, y2, tol).ok_or_else(|| {
                Error::Invariant(format!(
                    "no point over {} at distance {} from {}",
                    f.codomain().labels()[y2],
                    dy[[f.apply(x), y2]],
                    f.domain().labels()[x]
                ))
            })?;
            lift.push(w);
        }
    }
    Ok(lift)
}
