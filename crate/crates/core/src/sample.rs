//! Seeded random instances for randomized law checks.
//!
//! Everything takes the generator from the caller, so one seed reproduces a
//! whole suite. Use [`rng`] for the standard ChaCha8 generator.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lens::{compose_lenses, identity_lens, product_projection_lens, product_space, SetLens};
use crate::prob::{Coupling, FiniteSpace, Kernel, Measure};
use crate::scalar::Scalar;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normalize<T: Scalar>(w: Vec<f64>) -> Array1<T> {
    let total: f64 = w.iter().sum();
    let mut out: Array1<T> = w.iter().map(|x| T::lit(x / total)).collect();
    // push the rounding residue onto the largest entry
    let sum = out.iter().fold(T::zero(), |a, &b| a + b);
    let big = out.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal)).map(|(i, _)| i).unwrap_or(0);
    out[big] = out[big] + (T::one() - sum);
    out
}

fn weights<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen_range(0.05..1.0) }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    w
}

/// Probability vector; each point is null with probability `zero_prob`
/// (at least one point keeps mass).
pub fn random_measure<T: Scalar, R: Rng>(rng: &mut R, space: &Arc<FiniteSpace<T>>, zero_prob: f64) -> Measure<T> {
    let mass = normalize(weights(rng, space.len(), zero_prob));
    Measure::new(space.clone(), mass).expect("normalized weights form a measure")
}

/// Row-stochastic kernel with sparse rows.
pub fn random_kernel<T: Scalar, R: Rng>(
    rng: &mut R,
    source: &Arc<FiniteSpace<T>>,
    target: &Arc<FiniteSpace<T>>,
    zero_prob: f64,
) -> Kernel<T> {
    let m = target.len();
    let mut rows = Array2::zeros((source.len(), m));
    for mut row in rows.rows_mut() {
        row.assign(&normalize::<T>(weights(rng, m, zero_prob)));
    }
    Kernel::new(source.clone(), target.clone(), rows).expect("normalized rows")
}

/// `p` pushed through a random kernel: a coupling from `p` to a random
/// measure on `target`.
pub fn random_coupling_from<T: Scalar, R: Rng>(rng: &mut R, p: &Measure<T>, target: &Arc<FiniteSpace<T>>, zero_prob: f64) -> Coupling<T> {
    let k = random_kernel(rng, p.space(), target, zero_prob);
    Coupling::from_kernel(p, &k).expect("kernel starts on the measure's space")
}

/// Random coupling with both marginals prescribed: a convex combination of
/// north-west-corner plans taken on shuffled row and column orders (each one
/// a vertex of the transportation polytope).
pub fn random_coupling<T: Scalar, R: Rng>(rng: &mut R, p: &Measure<T>, q: &Measure<T>, vertices: usize) -> Coupling<T> {
    let (m, n) = (p.len(), q.len());
    let a: Vec<f64> = p.mass().iter().map(|x| x.as_f64()).collect();
    let b: Vec<f64> = q.mass().iter().map(|x| x.as_f64()).collect();
    let mix = weights(rng, vertices.max(1), 0.0);
    let total: f64 = mix.iter().sum();
    let mut joint = Array2::<f64>::zeros((m, n));
    for w in mix {
        let mut rows: Vec<usize> = (0..m).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        rows.shuffle(rng);
        cols.shuffle(rng);
        let plan = north_west(&rows, &cols, &a, &b);
        joint.scaled_add(w / total, &plan);
    }
    Coupling::from_parts(p.clone(), q.clone(), joint.mapv(T::lit))
}

fn north_west(rows: &[usize], cols: &[usize], a: &[f64], b: &[f64]) -> Array2<f64> {
    let mut plan = Array2::zeros((a.len(), b.len()));
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let (mut i, mut j) = (0, 0);
    while i < rows.len() && j < cols.len() {
        let (r, c) = (rows[i], cols[j]);
        let x = ra[r].min(rb[c]);
        plan[[r, c]] += x;
        ra[r] -= x;
        rb[c] -= x;
        if i == rows.len() - 1 {
            j += 1;
        } else if j == cols.len() - 1 || ra[r] <= rb[c] {
            i += 1;
        } else {
            j += 1;
        }
    }
    plan
}

/// Symmetric metric: random edge weights in `[0.5, 3)` closed under shortest
/// paths. Every fourth instance or so is rounded to halves, to produce ties.
pub fn random_metric<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Array2<T> {
    let round = rng.gen_bool(0.25);
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let mut w: f64 = rng.gen_range(0.5..3.0);
            if round {
                w = (w * 2.0).round() / 2.0;
            }
            d[[i, j]] = w;
            d[[j, i]] = w;
        }
    }
    floyd_warshall(&mut d);
    d.mapv(T::lit)
}

/// Asymmetric pq-metric, possibly with infinite entries.
pub fn random_pq_metric<T: Scalar, R: Rng>(rng: &mut R, n: usize, inf_prob: f64) -> Array2<T> {
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[[i, j]] = if rng.gen_bool(inf_prob) { f64::INFINITY } else { rng.gen_range(0.0..3.0) };
            }
        }
    }
    floyd_warshall(&mut d);
    d.mapv(T::lit)
}

fn floyd_warshall(d: &mut Array2<f64>) {
    let n = d.nrows();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[[i, k]] + d[[k, j]];
                if via < d[[i, j]] {
                    d[[i, j]] = via;
                }
            }
        }
    }
}

/// Arbitrary nonnegative cost matrix (no metric axioms), integer-valued
/// with probability one half so degenerate optima are common.
pub fn random_cost<T: Scalar, R: Rng>(rng: &mut R, m: usize, n: usize) -> Array2<T> {
    let integral = rng.gen_bool(0.5);
    Array2::from_shape_fn((m, n), |_| {
        let c: f64 = rng.gen_range(0.0..5.0);
        T::lit(if integral { c.floor() } else { c })
    })
}

/// Space `prefix0..` carrying the given cost.
pub fn metric_space<T: Scalar>(prefix: &str, cost: Array2<T>) -> Result<Arc<FiniteSpace<T>>> {
    let labels = (0..cost.nrows()).map(|i| format!("{prefix}{i}")).collect();
    Ok(Arc::new(FiniteSpace::with_cost(labels, cost)?))
}

/// A lens from the fixed catalogue; both spaces carry costs that make it a
/// metric lens.
#[derive(Debug, Clone)]
pub struct NamedLens<T> {
    pub name: &'static str,
    pub lens: SetLens<T>,
}

impl<T: Scalar> NamedLens<T> {
    pub fn dx(&self) -> &Array2<T> {
        self.lens.domain().cost().expect("catalogue domains carry costs")
    }

    pub fn dy(&self) -> &Array2<T> {
        self.lens.codomain().cost().expect("catalogue codomains carry costs")
    }
}

/// Product projection `Y × Z → Y` with random metrics and the sum metric on
/// the product.
pub fn product_lens<T: Scalar, R: Rng>(rng: &mut R, ny: usize, nz: usize) -> Result<SetLens<T>> {
    let y = metric_space("y", random_metric(rng, ny))?;
    let z = metric_space("z", random_metric(rng, nz))?;
    product_projection_lens(y, &z)
}

/// The product lens with its domain points shuffled: fibers are no longer
/// contiguous blocks and the lift table is scrambled accordingly.
pub fn twisted_lens<T: Scalar, R: Rng>(rng: &mut R, ny: usize, nz: usize) -> Result<SetLens<T>> {
    let base = product_lens(rng, ny, nz)?;
    let n = base.domain().len();
    // new index of old point i
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut inverse = vec![0; n];
    for (old, &new) in perm.iter().enumerate() {
        inverse[new] = old;
    }
    let old_cost = base.domain().cost().expect("product carries a cost");
    let labels = (0..n).map(|i| base.domain().labels()[inverse[i]].clone()).collect();
    let cost = Array2::from_shape_fn((n, n), |(a, b)| old_cost[[inverse[a], inverse[b]]]);
    let domain = Arc::new(FiniteSpace::with_cost(labels, cost)?);
    let ny = base.codomain().len();
    let project = (0..n).map(|i| base.project(inverse[i])).collect();
    let lift = (0..n).flat_map(|i| (0..ny).map(move |y| (i, y))).map(|(i, y)| perm[base.lift(inverse[i], y)]).collect();
    SetLens::new(domain, base.codomain().clone(), project, lift)
}

/// A bijection `X → Y` with `φ(x, y) = f⁻¹(y)`; `X` carries the pulled-back
/// metric so the lens is an isometry.
pub fn bijection_lens<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Result<SetLens<T>> {
    let dy = random_metric::<T, _>(rng, n);
    let mut f: Vec<usize> = (0..n).collect();
    f.shuffle(rng);
    let mut inverse = vec![0; n];
    for (x, &y) in f.iter().enumerate() {
        inverse[y] = x;
    }
    let dx = Array2::from_shape_fn((n, n), |(a, b)| dy[[f[a], f[b]]]);
    let x = metric_space("x", dx)?;
    let y = metric_space("y", dy)?;
    let lift = (0..n).flat_map(|_| inverse.iter().copied()).collect();
    SetLens::new(x, y, f, lift)
}

/// `X → 1` with `φ(x, *) = x`, for any metric on `X`.
pub fn terminal_lens<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Result<SetLens<T>> {
    let x = metric_space("x", random_metric(rng, n))?;
    let one = Arc::new(FiniteSpace::with_cost(vec!["*".into()], Array2::zeros((1, 1)))?);
    SetLens::new(x, one, vec![0; n], (0..n).collect())
}

/// `(Y × Z) × W → Y × Z → Y`, composed.
pub fn stacked_lens<T: Scalar, R: Rng>(rng: &mut R, ny: usize, nz: usize, nw: usize) -> Result<SetLens<T>> {
    let y = metric_space("y", random_metric(rng, ny))?;
    let z = metric_space("z", random_metric(rng, nz))?;
    let w = metric_space("w", random_metric(rng, nw))?;
    let yz = Arc::new(product_space(&y, &z)?);
    let outer = product_projection_lens(yz, &w)?;
    let inner = product_projection_lens(y, &z)?;
    compose_lenses(&outer, &inner)
}

/// Identity lens on a random metric space.
pub fn identity_metric_lens<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Result<SetLens<T>> {
    Ok(identity_lens(metric_space("x", random_metric(rng, n))?))
}

/// One instance of every catalogue lens, sides between 1 and `max_side`
/// (domains stay at or below `max_side²`, stacked ones below `max_side³`).
pub fn lens_catalogue<T: Scalar, R: Rng>(rng: &mut R, max_side: usize) -> Result<Vec<NamedLens<T>>> {
    let max = max_side.max(1);
    let side = |r: &mut R| r.gen_range(1..=max);
    let (a, b) = (side(rng), side(rng));
    let product = product_lens(rng, a, b)?;
    let (a, b) = (side(rng), side(rng));
    let twisted = twisted_lens(rng, a, b)?;
    let n = side(rng);
    let bijection = bijection_lens(rng, n)?;
    let n = side(rng);
    let terminal = terminal_lens(rng, n)?;
    let (a, b, c) = (side(rng), side(rng).min(2), side(rng).min(2));
    let stacked = stacked_lens(rng, a, b, c)?;
    let n = side(rng);
    let identity = identity_metric_lens(rng, n)?;
    Ok(vec![
        NamedLens { name: "product", lens: product },
        NamedLens { name: "twisted-product", lens: twisted },
        NamedLens { name: "bijection", lens: bijection },
        NamedLens { name: "terminal", lens: terminal },
        NamedLens { name: "stacked-product", lens: stacked },
        NamedLens { name: "identity", lens: identity },
    ])
}
