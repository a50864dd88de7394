//! Lifting couplings along lenses, and the checks around pushforwards.
//!
//! Given a lens `(f, φ): X → Y`, an anchor `p` on `X` and a coupling `s` on
//! `Y` starting at `f♯p`, the lift is
//!
//! ```text
//! lift(x, x') = p(x) · Σ_{y : φ(x, y) = x'} s⃗(y | f(x))
//! ```
//!
//! Every row is weighted by `p(x)`, so the zero-mass convention of
//! [`conditional`] never shows up in the result.

// `!(a <= tol)` is deliberate: NaN counts as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::lens::{compose_lenses, product_space, SetLens};
use crate::prob::{
    compose, conditional, cost_k, identity_coupling, pushforward_coupling, pushforward_measure, Coupling, Direction, Kernel, Measure,
    PointMap,
};
use crate::report::LawReport;
use crate::scalar::Scalar;

/// Tolerance for the marginal precondition of a lift.
pub const PRECONDITION_TOL: f64 = 1e-9;

/// A lift together with its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedCoupling<T> {
    /// `s`, with its first marginal replaced by `f♯p`.
    pub base: Coupling<T>,
    pub anchor: Measure<T>,
    pub result: Coupling<T>,
}

impl<T: Scalar> LiftedCoupling<T> {
    pub fn new(l: &SetLens<T>, p: &Measure<T>, s: &Coupling<T>) -> Result<Self> {
        if !p.space().same_points(l.domain()) {
            return Err(Error::Structural("anchor does not live on the lens domain".into()));
        }
        if !s.source().space().same_points(l.codomain()) || !s.target().space().same_points(l.codomain()) {
            return Err(Error::Structural("coupling does not live on the lens codomain".into()));
        }
        let fp = pushforward_measure(l.projection(), p)?;
        if let Some((y, a, b)) = fp.mismatch(s.source(), T::lit(PRECONDITION_TOL)) {
            return Err(Error::LiftingPrecondition(format!(
                "first marginal of the coupling is {b} at {}, pushforward of the anchor is {a}",
                l.codomain().labels()[y]
            )));
        }
        let base = s.with_source(fp);
        let kernel = conditional(&base, Direction::Forward);
        let rows = lifted_rows(l, &kernel);
        let joint = Array2::from_shape_fn(rows.dim(), |(x, x2)| p.mass()[x] * rows[[x, x2]]);
        let target = Measure::from_parts(l.domain().clone(), joint.sum_axis(Axis(0)));
        let result = Coupling::from_parts(p.clone(), target, joint);
        Ok(Self { base, anchor: p.clone(), result })
    }

    /// First marginal is the anchor and `f²♯` of the result is the base.
    pub fn check_invariants(&self, l: &SetLens<T>, tol: T) -> Result<LawReport> {
        let mut r = LawReport::new();
        let rows = self.result.joint().sum_axis(Axis(1));
        compare_vec(&mut r, "lift-marginal", &rows, self.anchor.mass(), tol);
        let pushed = pushforward_coupling(l.projection(), &self.result)?;
        compare(&mut r, "lift-pushforward", pushed.joint(), self.base.joint(), tol);
        Ok(r)
    }
}

/// `lifted(x' | x) = Σ_{y : φ(x, y) = x'} k(y | f(x))`
fn lifted_rows<T: Scalar>(l: &SetLens<T>, k: &Kernel<T>) -> Array2<T> {
    let (nx, ny) = (l.domain().len(), l.codomain().len());
    let mut rows = Array2::zeros((nx, nx));
    for x in 0..nx {
        let fx = l.project(x);
        for y in 0..ny {
            let x2 = l.lift(x, y);
            rows[[x, x2]] = rows[[x, x2]] + k.rows()[[fx, y]];
        }
    }
    rows
}

/// The lift `φ̃♯(p, s)`; see [`LiftedCoupling::new`].
pub fn lift_coupling<T: Scalar>(l: &SetLens<T>, p: &Measure<T>, s: &Coupling<T>) -> Result<Coupling<T>> {
    Ok(LiftedCoupling::new(l, p, s)?.result)
}

/// Conditional form of the lift. Needs no anchor.
pub fn lift_kernel<T: Scalar>(l: &SetLens<T>, k: &Kernel<T>) -> Result<Kernel<T>> {
    if !k.source().same_points(l.codomain()) || !k.target().same_points(l.codomain()) {
        return Err(Error::Structural("kernel does not live on the lens codomain".into()));
    }
    Ok(Kernel::from_parts(l.domain().clone(), l.domain().clone(), lifted_rows(l, k)))
}

fn compare<T: Scalar>(r: &mut LawReport, law: &str, a: &Array2<T>, b: &Array2<T>, tol: T) {
    if a.dim() != b.dim() {
        r.violate(law, vec![], f64::NAN, f64::NAN);
        return;
    }
    let worst = a
        .indexed_iter()
        .map(|((i, j), &v)| ((i, j), v, b[[i, j]]))
        .max_by(|x, y| (x.1 - x.2).abs().partial_cmp(&(y.1 - y.2).abs()).unwrap_or(std::cmp::Ordering::Equal));
    if let Some(((i, j), u, v)) = worst {
        if !((u - v).abs() <= tol) {
            r.violate(law, vec![i, j], u.as_f64(), v.as_f64());
        }
    }
}

fn compare_vec<T: Scalar>(r: &mut LawReport, law: &str, a: &Array1<T>, b: &Array1<T>, tol: T) {
    for (i, (&u, &v)) in a.iter().zip(b.iter()).enumerate() {
        if !((u - v).abs() <= tol) {
            r.violate(law, vec![i], u.as_f64(), v.as_f64());
            return;
        }
    }
}

/// Delta-lens laws of the lift on one instance:
/// lifting (marginal and pushforward), identity, and composition
/// `lift(p, s2∘s) = lift(p', s2) ∘ lift(p, s)` with `p'` the second marginal
/// of `lift(p, s)`.
pub fn check_lift_delta_laws<T: Scalar>(l: &SetLens<T>, p: &Measure<T>, s: &Coupling<T>, s2: &Coupling<T>, tol: T) -> Result<LawReport> {
    let first = LiftedCoupling::new(l, p, s)?;
    let mut r = first.check_invariants(l, tol)?;

    let fp = pushforward_measure(l.projection(), p)?;
    let id = lift_coupling(l, p, &identity_coupling(&fp))?;
    compare(&mut r, "lift-identity", id.joint(), identity_coupling(p).joint(), tol);

    let glued = compose(s2, &first.base, T::lit(PRECONDITION_TOL).max(tol))?;
    let lhs = lift_coupling(l, p, &glued)?;
    let p2 = first.result.target();
    // a lift that breaks the pushforward law leaves s2 unliftable at p2
    if let Some((y, a, b)) = pushforward_measure(l.projection(), p2)?.mismatch(s2.source(), T::lit(PRECONDITION_TOL)) {
        r.violate("lift-composition", vec![y], a.as_f64(), b.as_f64());
        r.note(format!("second lift skipped: f♯p' and the first marginal of s2 differ at {}", l.codomain().labels()[y]));
        return Ok(r);
    }
    let second = lift_coupling(l, p2, s2)?;
    let rhs = compose(&second, &first.result, T::lit(PRECONDITION_TOL).max(tol))?;
    compare(&mut r, "lift-composition", lhs.joint(), rhs.joint(), tol);
    Ok(r)
}

/// `|cost_k(lift) - cost_k(s)| <= tol` for each `k` in `ks`; costs `dx` on
/// the domain and `dy` on the codomain of the lens.
pub fn check_weight_preservation<T: Scalar>(
    l: &SetLens<T>,
    dx: &Array2<T>,
    dy: &Array2<T>,
    p: &Measure<T>,
    s: &Coupling<T>,
    ks: &[u32],
    tol: T,
) -> Result<LawReport> {
    let lifted = LiftedCoupling::new(l, p, s)?;
    let mut r = LawReport::new();
    for &k in ks {
        let up = cost_k(&lifted.result, dx, k)?;
        let down = cost_k(&lifted.base, dy, k)?;
        if T::ext_diff(up, down) > tol {
            r.violate("weight-preservation", vec![k as usize], up.as_f64(), down.as_f64());
        }
    }
    Ok(r)
}

/// Conditional of the pushforward coupling `f²♯s` against the conditional of
/// `s`, for `s` a coupling on `X × X` with first marginal `p`.
///
/// Checked on every row `y` with `f♯p(y) > 0`:
///
/// ```text
/// (f²♯s)⃗(y' | y) = Σ_{x ∈ f⁻¹(y)} p(x) s⃗(f⁻¹(y') | x) / f♯p(y)
/// ```
///
/// The pointwise form without the fiber average,
/// `(f²♯s)⃗(y' | f(x)) = s⃗(f⁻¹(y') | x)`, only holds when `s⃗(f⁻¹(y') | ·)`
/// is constant on fibers (always, for injective `f`). It is evaluated too and
/// reported as a note when it differs.
pub fn check_pushforward_conditional<T: Scalar>(f: &PointMap<T>, s: &Coupling<T>, tol: T) -> Result<LawReport> {
    let pushed = pushforward_coupling(f, s)?;
    let lhs = conditional(&pushed, Direction::Forward);
    let fwd = conditional(s, Direction::Forward);
    let p = s.source().mass();
    let fp = pushed.source().mass();
    let (nx, ny) = (f.domain().len(), f.codomain().len());
    // s⃗(f⁻¹(y') | x)
    let mut fiber_mass = Array2::<T>::zeros((nx, ny));
    for x in 0..nx {
        for x2 in 0..nx {
            let y2 = f.apply(x2);
            fiber_mass[[x, y2]] = fiber_mass[[x, y2]] + fwd.rows()[[x, x2]];
        }
    }
    let mut r = LawReport::new();
    for y in 0..ny {
        if !(fp[y] > T::zero()) {
            continue;
        }
        for y2 in 0..ny {
            let avg = f.fiber(y).fold(T::zero(), |acc, x| acc + p[x] * fiber_mass[[x, y2]]) / fp[y];
            let l = lhs.rows()[[y, y2]];
            if !((l - avg).abs() <= tol) {
                r.violate("pushforward-conditional", vec![y, y2], l.as_f64(), avg.as_f64());
            }
        }
    }
    let mut pointwise = Vec::new();
    for x in (0..nx).filter(|&x| p[x] > T::zero()) {
        for y2 in 0..ny {
            let (a, b) = (lhs.rows()[[f.apply(x), y2]], fiber_mass[[x, y2]]);
            if !((a - b).abs() <= tol) {
                pointwise.push((x, y2, a, b));
            }
        }
    }
    if let Some(&(x, y2, a, b)) = pointwise.first() {
        r.note(format!(
            "pointwise form differs at {} of {} (x, y') pairs, first at ({}, {}): {a} vs {b}; \
             s⃗ is not constant on the fibers of f",
            pointwise.len(),
            (0..nx).filter(|&x| p[x] > T::zero()).count() * ny,
            f.domain().labels()[x],
            f.codomain().labels()[y2]
        ));
    }
    Ok(r)
}

/// Functor laws of `f²♯` on one instance: `f²♯ I_p = I_{f♯p}` and
/// `f²♯(t∘s) = f²♯t ∘ f²♯s`.
///
/// The composition law holds for injective `f`, and whenever the
/// conditionals of `s` and `t` are constant on the fibers of `f` (lifted
/// couplings are). For general `s, t` and non-injective `f` it can fail.
pub fn check_pushforward_functor<T: Scalar>(f: &PointMap<T>, s: &Coupling<T>, t: &Coupling<T>, tol: T) -> Result<LawReport> {
    let mut r = LawReport::new();
    let p = s.source();
    let pushed_id = pushforward_coupling(f, &identity_coupling(p))?;
    let id = identity_coupling(&pushforward_measure(f, p)?);
    compare(&mut r, "pushforward-identity", pushed_id.joint(), id.joint(), tol);

    let glued = compose(t, s, T::lit(PRECONDITION_TOL).max(tol))?;
    let lhs = pushforward_coupling(f, &glued)?;
    let (fs, ft) = (pushforward_coupling(f, s)?, pushforward_coupling(f, t)?);
    let rhs = compose(&ft, &fs, T::lit(PRECONDITION_TOL).max(tol))?;
    compare(&mut r, "pushforward-composition", lhs.joint(), rhs.joint(), tol);
    Ok(r)
}

/// Couplings on `X` obtained by restricting a coupling on `Y` to the image
/// of `i × i`, plus the mass that lies outside the image.
fn pull_back<T: Scalar>(i: &PointMap<T>, s: &Coupling<T>) -> (Array2<T>, T) {
    let nx = i.domain().len();
    let joint = Array2::from_shape_fn((nx, nx), |(a, b)| s.joint()[[i.apply(a), i.apply(b)]]);
    let outside = s.joint().sum() - joint.sum();
    (joint, outside)
}

/// Full-embedding checks for the pushforward along an injective `i`.
///
/// * every coupling `r` of `(p, q)` in `samples` survives
///   `r ↦ i²♯r ↦ restriction` unchanged (exact equality);
/// * every coupling of `(i♯p, i♯q)` in `image_samples` is supported on the
///   image of `i × i` and its restriction is a coupling of `(p, q)` that
///   pushes forward to it;
/// * with `metric = Some((dx, dy))`, `|cost_k(i²♯r) - cost_k(r)| <= tol` for
///   each sample and each `k` in `ks`. This holds when `i` is an isometry.
#[allow(clippy::too_many_arguments)]
pub fn check_pushforward_embedding<T: Scalar>(
    i: &PointMap<T>,
    p: &Measure<T>,
    q: &Measure<T>,
    samples: &[Coupling<T>],
    image_samples: &[Coupling<T>],
    metric: Option<(&Array2<T>, &Array2<T>)>,
    ks: &[u32],
    tol: T,
) -> Result<LawReport> {
    if !i.is_injective() {
        return Err(Error::Argument("embedding check needs an injective map".into()));
    }
    let (ip, iq) = (pushforward_measure(i, p)?, pushforward_measure(i, q)?);
    let mass_tol = T::lit(T::MASS_TOL);
    let mut r = LawReport::new();
    for (n, s) in samples.iter().enumerate() {
        if s.source().mismatch(p, mass_tol).is_some() || s.target().mismatch(q, mass_tol).is_some() {
            return Err(Error::Argument(format!("sample {n} is not a coupling of the given measures")));
        }
        let pushed = pushforward_coupling(i, s)?;
        let (back, _) = pull_back(i, &pushed);
        if back != s.joint() {
            r.violate("embedding-roundtrip", vec![n], s.max_diff(&pushed).as_f64(), 0.0);
        }
        if let Some((dx, dy)) = metric {
            for &k in ks {
                let (up, down) = (cost_k(&pushed, dy, k)?, cost_k(s, dx, k)?);
                if T::ext_diff(up, down) > tol {
                    r.violate("embedding-weight", vec![n, k as usize], up.as_f64(), down.as_f64());
                }
            }
        }
    }
    for (n, s) in image_samples.iter().enumerate() {
        if s.source().mismatch(&ip, mass_tol).is_some() || s.target().mismatch(&iq, mass_tol).is_some() {
            return Err(Error::Argument(format!("image sample {n} is not a coupling of the pushed measures")));
        }
        let (back, outside) = pull_back(i, s);
        if outside.abs() > tol {
            r.violate("embedding-support", vec![n], outside.as_f64(), 0.0);
        }
        let restricted = Coupling::from_parts(p.clone(), q.clone(), back);
        if restricted.marginal_error() > tol {
            r.violate("embedding-pullback", vec![n], restricted.marginal_error().as_f64(), 0.0);
        }
        let again = pushforward_coupling(i, &restricted)?;
        compare(&mut r, "embedding-surjective", again.joint(), s.joint(), tol);
    }
    Ok(r)
}

/// Lifting along a composite lens equals lifting in two steps:
/// `lift_{l2∘l1}(p, s) = lift_{l1}(p, lift_{l2}(f♯p, s))`.
pub fn check_lens_functoriality<T: Scalar>(l1: &SetLens<T>, l2: &SetLens<T>, p: &Measure<T>, s: &Coupling<T>, tol: T) -> Result<LawReport> {
    let composite = compose_lenses(l1, l2)?;
    let direct = lift_coupling(&composite, p, s)?;
    let fp = pushforward_measure(l1.projection(), p)?;
    let middle = lift_coupling(l2, &fp, s)?;
    let stepwise = lift_coupling(l1, p, &middle)?;
    let mut r = LawReport::new();
    compare(&mut r, "lens-functoriality", direct.joint(), stepwise.joint(), tol);
    Ok(r)
}

/// A coupling `r` from `Y` to `Z` read as a measure on `Y × Z`.
pub fn joint_measure<T: Scalar>(r: &Coupling<T>) -> Result<Measure<T>> {
    let space = Arc::new(product_space(r.source().space(), r.target().space())?);
    let mass: Array1<T> = r.joint().iter().copied().collect();
    Ok(Measure::from_parts(space, mass))
}

/// Conditional product of `r` (joint on `Y × Z`) and `s` (coupling on `Y`):
///
/// ```text
/// result((y, z), (y', z')) = [z = z'] · r⃗(z | y) · s⃗(y' | y) · p(y)
/// ```
///
/// with `p` the `Y`-marginal of `r`. Agrees with lifting `s` along the
/// product projection at `r`.
pub fn product_lift<T: Scalar>(r: &Coupling<T>, s: &Coupling<T>) -> Result<Coupling<T>> {
    let p = r.source();
    if !s.source().space().same_points(p.space()) || !s.target().space().same_points(p.space()) {
        return Err(Error::Structural("coupling does not live on the first factor".into()));
    }
    if let Some((y, a, b)) = p.mismatch(s.source(), T::lit(PRECONDITION_TOL)) {
        return Err(Error::LiftingPrecondition(format!(
            "first marginal of the coupling is {b} at {}, marginal of the joint is {a}",
            p.space().labels()[y]
        )));
    }
    let base = s.with_source(p.clone());
    let rz = conditional(r, Direction::Forward);
    let sy = conditional(&base, Direction::Forward);
    let (ny, nz) = (p.len(), r.target().len());
    let mut joint = Array2::zeros((ny * nz, ny * nz));
    for y in 0..ny {
        for z in 0..nz {
            for y2 in 0..ny {
                joint[[y * nz + z, y2 * nz + z]] = rz.rows()[[y, z]] * sy.rows()[[y, y2]] * p.mass()[y];
            }
        }
    }
    let source = joint_measure(r)?;
    let target = Measure::from_parts(source.space().clone(), joint.sum_axis(Axis(0)));
    Ok(Coupling::from_parts(source, target, joint))
}
