//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails if a criterion outside `KNOWN_FAILURES` fails, or if a known
//! failure unexpectedly passes (so the list cannot go stale).

use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use wcoupling::lens::{check_lens_laws, check_submetry, product_projection_lens, submetry_to_lifting, MetricMode, SetLens};
use wcoupling::lift::{
    check_lift_delta_laws, check_pushforward_conditional, check_pushforward_embedding, check_pushforward_functor,
    check_weight_preservation, joint_measure, lift_coupling, product_lift,
};
use wcoupling::ot::{brute_force_wasserstein, optimal_pq_metric, solve_transport};
use wcoupling::prob::{
    compose, cost_k, cost_triangle_check, identity_coupling, pushforward_coupling, pushforward_measure, Coupling, FiniteSpace, Measure,
    PointMap,
};
use wcoupling::sample::{
    lens_catalogue, metric_space, random_coupling, random_coupling_from, random_measure, random_metric, random_pq_metric, rng, SampleRng,
};
use wcoupling::wcat::{check_pq_metric, optimize, FinWeightedCategory, PQMetric};

const KNOWN_FAILURES: &[&str] = &["AC6"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

// ---- plain-loop oracles, independent of the library's code paths ----

/// `(t∘s)(x, z) = Σ_y s(x, y) t(y, z) / q(y)` over `q(y) > 0`.
fn glue(s: &Array2<f64>, t: &Array2<f64>) -> Array2<f64> {
    let (nx, ny) = s.dim();
    let nz = t.ncols();
    let mut out = Array2::zeros((nx, nz));
    for y in 0..ny {
        let q: f64 = (0..nx).map(|x| s[[x, y]]).sum();
        if q <= 0.0 {
            continue;
        }
        for x in 0..nx {
            for z in 0..nz {
                out[[x, z]] += s[[x, y]] * t[[y, z]] / q;
            }
        }
    }
    out
}

fn cost(s: &Array2<f64>, c: &Array2<f64>, k: u32) -> f64 {
    let mut total = 0.0;
    for ((i, j), &m) in s.indexed_iter() {
        if m > 0.0 {
            total += m * c[[i, j]].powi(k as i32);
        }
    }
    total.powf(1.0 / k as f64)
}

fn push(f: &[usize], m: usize, s: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((m, m));
    for ((a, b), &v) in s.indexed_iter() {
        out[[f[a], f[b]]] += v;
    }
    out
}

/// `result(x, x') = p(x) Σ_{y: φ(x, y) = x'} s(f x, y) / fp(f x)`, uniform
/// over `y` when `fp(f x) = 0`.
fn lift_oracle(l: &SetLens<f64>, p: &[f64], s: &Array2<f64>) -> Array2<f64> {
    let (nx, ny) = (l.domain().len(), l.codomain().len());
    let mut out = Array2::zeros((nx, nx));
    for x in 0..nx {
        let y0 = l.project(x);
        let row: f64 = (0..ny).map(|y| s[[y0, y]]).sum();
        for y in 0..ny {
            let cond = if row > 0.0 { s[[y0, y]] / row } else { 1.0 / ny as f64 };
            out[[x, l.lift(x, y)]] += p[x] * cond;
        }
    }
    out
}

fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() }).fold(0.0, f64::max)
}

fn space(prefix: &str, n: usize) -> Arc<FiniteSpace<f64>> {
    Arc::new(FiniteSpace::indexed(prefix, n).unwrap())
}

fn random_table(r: &mut SampleRng, n: usize, m: usize) -> Vec<usize> {
    (0..n).map(|_| r.gen_range(0..m)).collect()
}

// ---- criteria ----

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let (mut count, mut worst) = (0usize, 0.0f64);
    for _ in 0..300 {
        let (m, k) = (r.gen_range(1..=5), r.gen_range(1..=3));
        let x = space("x", m);
        let c: Array2<f64> = if r.gen_bool(0.5) { random_metric(&mut r, m) } else { random_pq_metric(&mut r, m, 0.2) };
        let p = random_measure(&mut r, &x, 0.3);
        let q = random_measure(&mut r, &x, 0.3);
        let fast = solve_transport(&p, &q, &c, k).unwrap().value;
        let slow = brute_force_wasserstein(&p, &q, &c, k).unwrap();
        let d = if fast == slow { 0.0 } else { (fast - slow).abs() };
        worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
        count += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "AC1",
        worst <= 1e-9 && secs < 10.0,
        format!("solver vs brute force: {count} instances, max |diff| {worst:.1e} (tol 1e-9), {secs:.2} s (limit 10 s)"),
    )
}

fn ac2() -> Outcome {
    let mut r = rng(2);
    let (mut id_nonzero, mut unit, mut assoc, mut oracle, mut tri_fail) = (0usize, 0.0f64, 0.0f64, 0.0f64, 0usize);
    let n_triples = 600;
    for _ in 0..n_triples {
        let n = r.gen_range(1..=5);
        let k = r.gen_range(1..=3);
        let x = space("x", n);
        let c: Array2<f64> = if r.gen_bool(0.5) { random_metric(&mut r, n) } else { random_pq_metric(&mut r, n, 0.0) };
        let p = random_measure(&mut r, &x, 0.3);
        let s = random_coupling_from(&mut r, &p, &x, 0.3);
        let t = random_coupling_from(&mut r, s.target(), &x, 0.3);
        let u = random_coupling_from(&mut r, t.target(), &x, 0.3);
        if cost_k(&identity_coupling(&p), &c, k).unwrap() != 0.0 {
            id_nonzero += 1;
        }
        let ts = compose(&t, &s, 1e-9).unwrap();
        unit = unit
            .max(compose(&s, &identity_coupling(&p), 1e-9).unwrap().max_diff(&s))
            .max(compose(&identity_coupling(s.target()), &s, 1e-9).unwrap().max_diff(&s));
        let left = compose(&u, &ts, 1e-9).unwrap();
        let right = compose(&compose(&u, &t, 1e-9).unwrap(), &s, 1e-9).unwrap();
        assoc = assoc.max(left.max_diff(&right));
        oracle = oracle.max(max_diff(ts.joint(), &glue(s.joint(), t.joint())));
        let lhs = cost(&glue(s.joint(), t.joint()), &c, k);
        let rhs = cost(s.joint(), &c, k) + cost(t.joint(), &c, k);
        if !cost_triangle_check(&s, &t, &c, k, 1e-9).unwrap().passed() || lhs > rhs + 1e-9 {
            tri_fail += 1;
        }
    }
    outcome(
        "AC2",
        id_nonzero == 0 && unit <= 1e-9 && assoc <= 1e-9 && oracle <= 1e-12 && tri_fail == 0,
        format!(
            "weighted category of couplings: {n_triples} triples, identity cost nonzero {id_nonzero}, unit {unit:.1e}, \
             assoc {assoc:.1e}, gluing vs oracle {oracle:.1e}, triangle failures {tri_fail}"
        ),
    )
}

fn ac3() -> Outcome {
    let mut r = rng(3);
    let (mut pairs, mut worst) = (0usize, 0.0f64);
    for case in 0..60 {
        let n = r.gen_range(1..=6);
        let x = space("x", n);
        let c: Array2<f64> = if case % 2 == 0 { random_metric(&mut r, n) } else { random_pq_metric(&mut r, n, 0.2) };
        for a in 0..n {
            for b in 0..n {
                for k in 1..=3 {
                    let w = solve_transport(&Measure::dirac(x.clone(), a), &Measure::dirac(x.clone(), b), &c, k).unwrap().value;
                    let d = if w == c[[a, b]] { 0.0 } else { (w - c[[a, b]]).abs() };
                    worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
                    pairs += 1;
                }
            }
        }
    }
    outcome("AC3", worst <= 1e-12, format!("Dirac embedding: {pairs} (pair, k) cases, max |W - c| {worst:.1e} (tol 1e-12)"))
}

fn ac4() -> Outcome {
    let mut r = rng(4);
    let (mut instances, mut law_fail, mut weight_fail, mut oracle) = (0usize, 0usize, 0usize, 0.0f64);
    let mut names = Vec::new();
    for _ in 0..100 {
        for named in lens_catalogue::<f64, _>(&mut r, 3).unwrap() {
            if !names.contains(&named.name) {
                names.push(named.name);
            }
            let l = &named.lens;
            let p = random_measure(&mut r, l.domain(), 0.3);
            let fp = pushforward_measure(l.projection(), &p).unwrap();
            let s = random_coupling_from(&mut r, &fp, l.codomain(), 0.3);
            let s2 = random_coupling_from(&mut r, s.target(), l.codomain(), 0.3);
            let rep = check_lift_delta_laws(l, &p, &s, &s2, 1e-9).unwrap();
            let four = ["lift-marginal", "lift-pushforward", "lift-identity", "lift-composition"];
            if !rep.passed() || four.iter().any(|law| rep.has_violation(law)) {
                law_fail += 1;
            }
            let w = check_weight_preservation(l, named.dx(), named.dy(), &p, &s, &[1, 2, 3], 1e-9).unwrap();
            if !w.passed() {
                weight_fail += 1;
            }
            let lifted = lift_coupling(l, &p, &s).unwrap();
            oracle = oracle.max(max_diff(lifted.joint(), &lift_oracle(l, p.mass().as_slice().unwrap(), s.joint())));
            instances += 1;
        }
    }
    outcome(
        "AC4",
        instances >= 500 && law_fail == 0 && weight_fail == 0 && oracle <= 1e-12 && names.len() >= 4,
        format!(
            "lift laws: {instances} instances over {} lenses ({}), law failures {law_fail}, weight failures {weight_fail} \
             (k = 1, 2, 3, tol 1e-9), lift vs oracle {oracle:.1e}",
            names.len(),
            names.join(", ")
        ),
    )
}

fn ac5() -> Outcome {
    let mut r = rng(5);
    let (mut worst, n) = (0.0f64, 200);
    for _ in 0..n {
        let (ny, nz) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let (y, z) = (space("y", ny), space("z", nz));
        let py = random_measure(&mut r, &y, 0.3);
        let rel = random_coupling_from(&mut r, &py, &z, 0.3);
        let s = random_coupling_from(&mut r, &py, &y, 0.3);
        let l = product_projection_lens(y.clone(), &z).unwrap();
        let anchor = Measure::new(l.domain().clone(), joint_measure(&rel).unwrap().mass().clone()).unwrap();
        let via_lens = lift_coupling(&l, &anchor, &s).unwrap();
        let direct = product_lift(&rel, &s).unwrap();
        worst = worst.max(max_diff(via_lens.joint(), direct.joint()));
    }
    outcome("AC5", worst <= 1e-12, format!("product lift cross-path: {n} instances, max diff {worst:.1e} (tol 1e-12)"))
}

/// Returns the criterion line and the sub-results that must hold regardless.
fn ac6() -> (Outcome, Vec<Outcome>) {
    let mut r = rng(6);
    let n = 300;
    let (mut general_worst, mut general_bad) = (0.0f64, 0usize);
    let (mut injective_worst, mut lifted_worst) = (0.0f64, 0.0f64);
    let (mut averaged_fail, mut pointwise_general_bad, mut pointwise_injective_worst) = (0usize, 0usize, 0.0f64);
    let mut library_agrees = true;
    for case in 0..n {
        // general f: X -> Y, usually not injective
        let nx = r.gen_range(2..=5);
        let ny = r.gen_range(1..nx);
        let (x, y) = (space("x", nx), space("y", ny));
        let f = PointMap::new(x.clone(), y.clone(), random_table(&mut r, nx, ny)).unwrap();
        let p = random_measure(&mut r, &x, 0.2);
        let s = random_coupling_from(&mut r, &p, &x, 0.3);
        let t = random_coupling_from(&mut r, s.target(), &x, 0.3);
        let d = functor_gap(f.table(), ny, &s, &t);
        general_worst = general_worst.max(d);
        if d > 1e-9 {
            general_bad += 1;
        }
        let rep = check_pushforward_functor(&f, &s, &t, 1e-9).unwrap();
        library_agrees &= rep.has_violation("pushforward-composition") == (d > 1e-9) || (d - 1e-9).abs() < 1e-12;
        if !check_pushforward_conditional(&f, &s, 1e-9).unwrap().passed() {
            averaged_fail += 1;
        }
        if pointwise_gap(f.table(), ny, &s) > 1e-9 {
            pointwise_general_bad += 1;
        }

        // injective i: X -> Y'
        let m = nx + r.gen_range(0..=2);
        let mut table: Vec<usize> = (0..m).collect();
        table.shuffle(&mut r);
        table.truncate(nx);
        let i = PointMap::new(x.clone(), space("w", m), table).unwrap();
        injective_worst = injective_worst.max(functor_gap(i.table(), m, &s, &t));
        pointwise_injective_worst = pointwise_injective_worst.max(pointwise_gap(i.table(), m, &s));
        if !check_pushforward_functor(&i, &s, &t, 1e-9).unwrap().passed() {
            injective_worst = f64::INFINITY;
        }

        // lifted couplings: conditionals constant on fibers of the projection
        let named = &lens_catalogue::<f64, _>(&mut r, 3).unwrap()[case % 6];
        let l = &named.lens;
        let px = random_measure(&mut r, l.domain(), 0.3);
        let fp = pushforward_measure(l.projection(), &px).unwrap();
        let s = random_coupling_from(&mut r, &fp, l.codomain(), 0.3);
        let s2 = random_coupling_from(&mut r, s.target(), l.codomain(), 0.3);
        let up = lift_coupling(l, &px, &s).unwrap();
        let up2 = lift_coupling(l, up.target(), &s2).unwrap();
        lifted_worst = lifted_worst.max(functor_gap(l.projection().table(), l.codomain().len(), &up, &up2));
    }
    let general_ok = general_worst <= 1e-9 && pointwise_general_bad == 0;
    let line = outcome(
        "AC6",
        general_ok,
        format!(
            "pushforward functoriality for arbitrary maps: {general_bad}/{n} instances exceed 1e-9, max gap {general_worst:.1e}; \
             pointwise conditional identity fails on {pointwise_general_bad}/{n}. Holds for injective maps and fiber-constant conditionals (below)"
        ),
    );
    let subs = vec![
        outcome("AC6.injective", injective_worst <= 1e-9, format!("injective maps: max gap {injective_worst:.1e} (tol 1e-9)")),
        outcome("AC6.lifted", lifted_worst <= 1e-9, format!("lifted couplings: max gap {lifted_worst:.1e} (tol 1e-9)")),
        outcome(
            "AC6.conditional",
            averaged_fail == 0 && pointwise_injective_worst <= 1e-9,
            format!(
                "pushforward conditional on positive-mass rows: fiber-averaged form failures {averaged_fail}/{n}, \
                 pointwise form under injective maps max gap {pointwise_injective_worst:.1e}"
            ),
        ),
        outcome("AC6.library", library_agrees, "library functoriality check agrees with the oracle on every instance".into()),
    ];
    (line, subs)
}

/// `max |f²♯(t∘s) - f²♯t ∘ f²♯s|`, all with the oracles.
fn functor_gap(f: &[usize], m: usize, s: &Coupling<f64>, t: &Coupling<f64>) -> f64 {
    let lhs = push(f, m, &glue(s.joint(), t.joint()));
    let rhs = glue(&push(f, m, s.joint()), &push(f, m, t.joint()));
    max_diff(&lhs, &rhs)
}

/// `max |(f²♯s)⃗(y' | f x) - s⃗(f⁻¹ y' | x)|` over `x` with `p(x) > 0`.
fn pointwise_gap(f: &[usize], m: usize, s: &Coupling<f64>) -> f64 {
    let pushed = push(f, m, s.joint());
    let n = s.joint().nrows();
    let mut worst = 0.0f64;
    for x in 0..n {
        let px: f64 = s.joint().row(x).sum();
        if px <= 0.0 {
            continue;
        }
        let fy: f64 = pushed.row(f[x]).sum();
        for y2 in 0..m {
            let via_push = pushed[[f[x], y2]] / fy;
            let direct: f64 = (0..n).filter(|&x2| f[x2] == y2).map(|x2| s.joint()[[x, x2]]).sum::<f64>() / px;
            worst = worst.max((via_push - direct).abs());
        }
    }
    worst
}

fn ac7() -> Outcome {
    let mut r = rng(7);
    let n_cases = 150;
    let (mut roundtrip_bad, mut weight_worst, mut detected, mut stretched_cases, mut non_injective_rejected) =
        (0usize, 0.0f64, 0usize, 0usize, 0usize);
    for _ in 0..n_cases {
        let nx = r.gen_range(1..=4);
        let m = nx + r.gen_range(0..=2);
        let dy: Array2<f64> = random_metric(&mut r, m);
        let mut table: Vec<usize> = (0..m).collect();
        table.shuffle(&mut r);
        table.truncate(nx);
        let dx = Array2::from_shape_fn((nx, nx), |(a, b)| dy[[table[a], table[b]]]);
        let x = metric_space("x", dx.clone()).unwrap();
        let y = metric_space("y", dy.clone()).unwrap();
        let i = PointMap::new(x.clone(), y.clone(), table.clone()).unwrap();
        let (p, q) = (random_measure(&mut r, &x, 0.3), random_measure(&mut r, &x, 0.3));
        let (ip, iq) = (pushforward_measure(&i, &p).unwrap(), pushforward_measure(&i, &q).unwrap());
        let samples: Vec<_> = (0..4).map(|_| random_coupling(&mut r, &p, &q, 3)).collect();
        let images: Vec<_> = (0..4).map(|_| random_coupling(&mut r, &ip, &iq, 3)).collect();
        let rep = check_pushforward_embedding(&i, &p, &q, &samples, &images, Some((&dx, &dy)), &[1, 2, 3], 1e-9).unwrap();
        if !rep.passed() {
            roundtrip_bad += 1;
        }
        for s in &samples {
            // exact roundtrip: restrict the pushforward back to the image
            let pushed = pushforward_coupling(&i, s).unwrap();
            let back = Array2::from_shape_fn((nx, nx), |(a, b)| pushed.joint()[[table[a], table[b]]]);
            if back != s.joint() {
                roundtrip_bad += 1;
            }
            for k in 1..=3 {
                weight_worst = weight_worst.max((cost(pushed.joint(), &dy, k) - cost(s.joint(), &dx, k)).abs());
            }
        }
        // the same map against a stretched domain metric is not an isometry
        if nx >= 2 {
            let stretched = dx.mapv(|d| 2.0 * d);
            let has_mass_off_diagonal =
                samples.iter().any(|s| s.joint().indexed_iter().any(|((a, b), &v)| a != b && v > 0.0 && dx[[a, b]] > 0.0));
            if has_mass_off_diagonal {
                stretched_cases += 1;
                let rep = check_pushforward_embedding(&i, &p, &q, &samples, &images, Some((&stretched, &dy)), &[1, 2, 3], 1e-9).unwrap();
                if rep.has_violation("embedding-weight") {
                    detected += 1;
                }
            }
            let fold = PointMap::new(x.clone(), y.clone(), vec![table[0]; nx]).unwrap();
            if check_pushforward_embedding(&fold, &p, &q, &samples, &images, None, &[1], 1e-9).is_err() {
                non_injective_rejected += 1;
            }
        }
    }
    outcome(
        "AC7",
        roundtrip_bad == 0 && weight_worst <= 1e-9 && stretched_cases > 0 && detected == stretched_cases && non_injective_rejected > 0,
        format!(
            "embeddings: {n_cases} maps, roundtrip/law failures {roundtrip_bad}, isometric weight gap {weight_worst:.1e} (tol 1e-9), \
             stretched metric detected {detected}/{stretched_cases}, non-injective maps rejected {non_injective_rejected}"
        ),
    )
}

fn ac8() -> Outcome {
    let mut product_fail = 0usize;
    for ny in 1..=5 {
        for nz in 1..=5 {
            let l = product_projection_lens(space("y", ny), &FiniteSpace::indexed("z", nz).unwrap()).unwrap();
            if !check_lens_laws(&l).passed() {
                product_fail += 1;
            }
        }
    }
    let mut r = rng(8);
    let (mut lenses, mut submetry_fail, mut rebuilt_fail) = (0usize, 0usize, 0usize);
    for _ in 0..50 {
        for named in lens_catalogue::<f64, _>(&mut r, 4).unwrap() {
            let l = &named.lens;
            lenses += 1;
            if !check_submetry(l.projection(), named.dx(), named.dy(), MetricMode::Metric, 1e-12).unwrap().passed() {
                submetry_fail += 1;
            }
            let lift = submetry_to_lifting(l.projection(), named.dx(), named.dy(), 1e-12).unwrap();
            let rebuilt = SetLens::from_map(l.projection().clone(), lift).unwrap();
            let laws = check_lens_laws(&rebuilt);
            if !(laws.lifting_ok() && laws.identity_ok()) {
                rebuilt_fail += 1;
            }
        }
    }
    outcome(
        "AC8",
        product_fail == 0 && submetry_fail == 0 && rebuilt_fail == 0,
        format!(
            "lens laws: product lenses |Y|,|Z| <= 5 failing {product_fail}/25; {lenses} metric lenses, submetry failures \
             {submetry_fail}, rebuilt lifts failing lifting/identity {rebuilt_fail}"
        ),
    )
}

fn ac9() -> Outcome {
    let mut r = rng(9);
    let (mut batches, mut metric_fail, mut optimize_mismatch, mut spaces) = (0usize, 0usize, 0usize, 0usize);
    for case in 0..120 {
        let n = r.gen_range(1..=5);
        let k = r.gen_range(1..=3);
        let x = space("x", n);
        let c: Array2<f64> = if case % 2 == 0 { random_metric(&mut r, n) } else { random_pq_metric(&mut r, n, 0.2) };
        let ms: Vec<_> = (0..r.gen_range(1..=5)).map(|_| random_measure(&mut r, &x, 0.3)).collect();
        let opt = optimal_pq_metric(&ms, &c, k).unwrap();
        batches += 1;
        if !check_pq_metric(opt.dist(), 1e-9).passed() {
            metric_fail += 1;
        }
        let m = r.gen_range(1..=6);
        let d: Array2<f64> = if case % 2 == 0 { random_metric(&mut r, m) } else { random_pq_metric(&mut r, m, 0.3) };
        let metric = PQMetric::new((0..m).map(|i| format!("p{i}")).collect(), d.clone()).unwrap();
        let back = optimize(&FinWeightedCategory::from_pq_metric(&metric));
        spaces += 1;
        if *back.dist() != d {
            optimize_mismatch += 1;
        }
    }
    outcome(
        "AC9",
        metric_fail == 0 && optimize_mismatch == 0,
        format!(
            "optimization: {batches} Wasserstein batches, pq-metric failures {metric_fail}; {spaces} spaces, \
             optimize not reproducing the distance exactly {optimize_mismatch}"
        ),
    )
}

fn ac10() -> Outcome {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let cases: &[(&str, &[&str])] = &[
        ("wasserstein_delta.txt", &["wasserstein", "line2.json", "delta_a.json", "delta_b.json"]),
        ("wasserstein_delta.json", &["--format", "json", "wasserstein", "line2.json", "delta_a.json", "delta_b.json"]),
        ("compose_line3.txt", &["compose", "line3.json", "s3.json", "t3.json"]),
        ("push_embed.txt", &["push", "embed3.json", "s3.json", "--seed", "7"]),
        ("lift_product.txt", &["lift", "product_lens.json", "anchor.json", "base_ok.json"]),
        ("verify_product.txt", &["verify", "--seed", "42", "product_lens.json"]),
        ("lens_check_product.txt", &["lens-check", "product_lens.json"]),
        ("opt_asym.txt", &["opt", "cat_asym.json", "--functor", "functor_id.json", "--into", "cat_asym.json"]),
    ];
    let run = |args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_wcoupling"));
        for a in args {
            if a.ends_with(".json") {
                cmd.arg(fixtures.join(a));
            } else {
                cmd.arg(a);
            }
        }
        cmd.output().unwrap()
    };
    let (mut golden_bad, mut nondeterministic) = (Vec::new(), Vec::new());
    for (golden, args) in cases {
        let expected = std::fs::read(fixtures.join("golden").join(golden)).unwrap();
        let a = run(args);
        let b = run(args);
        if a.stdout != expected || a.status.code() != Some(0) {
            golden_bad.push(*golden);
        }
        if a.stdout != b.stdout {
            nondeterministic.push(*golden);
        }
    }
    let verbs: std::collections::BTreeSet<&str> =
        cases.iter().map(|(_, args)| args.iter().find(|a| !a.starts_with("--") && **a != "json").copied().unwrap()).collect();
    outcome(
        "AC10",
        golden_bad.is_empty() && nondeterministic.is_empty() && verbs.len() == 7,
        format!(
            "CLI: {} golden runs over {} verbs, mismatches {golden_bad:?}, nondeterministic {nondeterministic:?}",
            cases.len(),
            verbs.len()
        ),
    )
}

fn main() {
    // respect libtest-style filters passed by `cargo test <filter>`
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let (ac6_line, ac6_subs) = ac6();
    let mut results = vec![ac1(), ac2(), ac3(), ac4(), ac5(), ac6_line];
    results.extend(ac6_subs);
    results.extend([ac7(), ac8(), ac9(), ac10()]);

    let mut unexpected = Vec::new();
    for o in &results {
        let known = KNOWN_FAILURES.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{} {tag} {}", o.id, o.detail);
        if o.pass == known {
            unexpected.push(o.id);
        }
    }
    let failed = results.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} criteria checked, {failed} failing, known failures {KNOWN_FAILURES:?}", results.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for {unexpected:?}");
        std::process::exit(1);
    }
}
