//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p sherman-bounds --test acceptance -- --nocapture`.

// oracles index by hand to mirror the formulas
#![allow(clippy::needless_range_loop)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use sherman_bounds::bounds::{
    chain_with_modulus, converse_sherman_strong, jensen_strong, lah_ribaric_strong, resolve_modulus,
    sherman_strong, CHAIN_SLACK,
};
use sherman_bounds::convexity::DEFAULT_GRID_SIZE;
use sherman_bounds::divergence::{csiszar_divergence, divergence_bounds, kernel_by_name, kl_divergence, shannon_entropy};
use sherman_bounds::fink::{
    check_kernel_condition, fink_identity_check, higher_order_sherman_bound, sherman_difference_identity,
    KernelSign, DEFAULT_KERNEL_GRID,
};
use sherman_bounds::majorization::construct_doubly_stochastic;
use sherman_bounds::{
    divided_difference, named_function, DistributionPair, FunctionSpec, Interval, Modulus, QuadratureConfig,
    StochasticKind, StochasticMatrix, WeightedPair, WeightedVector,
};

fn report(id: u32, title: &str, passed: bool, detail: String) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2} {title}: {detail}");
    assert!(passed, "criterion {id} ({title}) failed: {detail}");
}

fn interval(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn row_stochastic(rng: &mut ChaCha8Rng, m: usize, l: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            // sparse rows happen in practice, so zero some entries out
            let mut row: Vec<f64> = (0..l)
                .map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen::<f64>() })
                .collect();
            if row.iter().all(|&v| v == 0.0) {
                row[rng.gen_range(0..l)] = 1.0;
            }
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        })
        .collect()
}

struct Raw {
    x: Vec<f64>,
    b: Vec<f64>,
    a_mat: Vec<Vec<f64>>,
}

fn raw_instance(rng: &mut ChaCha8Rng, dom: Interval, normalize: bool) -> Raw {
    let l = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=8);
    let x = (0..l).map(|_| rng.gen_range(dom.lower()..=dom.upper())).collect();
    let mut b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0)).collect();
    if normalize {
        let s: f64 = b.iter().sum();
        b.iter_mut().for_each(|v| *v /= s);
    }
    Raw {
        x,
        b,
        a_mat: row_stochastic(rng, m, l),
    }
}

fn pair_of(raw: &Raw) -> WeightedPair {
    let a = StochasticMatrix::new(raw.a_mat.clone(), StochasticKind::Row).unwrap();
    WeightedPair::generate(raw.x.clone(), raw.b.clone(), a).unwrap()
}

fn random_pair(rng: &mut ChaCha8Rng, dom: Interval) -> WeightedPair {
    pair_of(&raw_instance(rng, dom, false))
}

#[test]
fn criterion_01_chain_property() {
    let start = std::time::Instant::now();
    let kernels = [
        ("square", interval(-1.0, 2.0)),
        ("pow:4", interval(0.5, 1.0)),
        ("exp", interval(0.0, 1.0)),
        ("xlogx", interval(0.1, 3.0)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for (name, dom) in kernels {
        let spec = named_function(name, dom).unwrap();
        let c = resolve_modulus(&spec, Modulus::Auto, DEFAULT_GRID_SIZE).unwrap().value;
        assert!(c > 0.0, "{name} should be strongly convex on its interval");
        for _ in 0..1000 {
            let pair = random_pair(&mut rng, dom);
            let ch = chain_with_modulus(&pair, &spec, c).unwrap();
            let gaps = [
                ch.strong_bound - ch.lhs,
                ch.plain_bound - ch.strong_bound,
                ch.converse_bound - ch.plain_bound,
            ];
            let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            worst = worst.min(min);
            if min < -CHAIN_SLACK {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "chain property",
        failures == 0,
        format!("4 kernels x 1000 instances, {failures} violations, smallest gap {worst:.3e}, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_02_quadratic_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dom = interval(0.0, 1.0);
    let spec = named_function("square", dom).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let pair = random_pair(&mut rng, dom);
        let s = sherman_strong(&pair, &spec, 1.0).unwrap();
        worst = worst.max((s.lhs - s.strong_bound).abs());
    }
    report(
        2,
        "equality oracle for t^2, c=1",
        worst <= 1e-12,
        format!("max |lhs - strong_bound| = {worst:.3e} over 1000 instances"),
    );
}

#[test]
fn criterion_03_classical_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for (name, lo, hi) in [("xlogx", 0.1, 3.0), ("exp", 0.0, 1.0), ("pow:4", 0.5, 1.0)] {
        let dom = interval(lo, hi);
        let spec = named_function(name, dom).unwrap();
        let f = |t: f64| spec.eval(t);
        for _ in 0..300 {
            let raw = raw_instance(&mut rng, dom, true);
            // direct summation, independent of the library's matrix code
            let (m, l) = (raw.b.len(), raw.x.len());
            let mut y = vec![0.0; m];
            let mut a = vec![0.0; l];
            for i in 0..m {
                for j in 0..l {
                    y[i] += raw.a_mat[i][j] * raw.x[j];
                    a[j] += raw.b[i] * raw.a_mat[i][j];
                }
            }
            let sherman_lhs: f64 = (0..m).map(|i| raw.b[i] * f(y[i])).sum();
            let sherman_rhs: f64 = (0..l).map(|j| a[j] * f(raw.x[j])).sum();
            let chord = |t: f64| ((hi - t) * f(lo) + (t - lo) * f(hi)) / (hi - lo);
            let converse: f64 = (0..l).map(|j| a[j] * chord(raw.x[j])).sum();

            let pair = pair_of(&raw);
            let ch = chain_with_modulus(&pair, &spec, 0.0).unwrap();
            worst = worst
                .max((ch.lhs - sherman_lhs).abs())
                .max((ch.strong_bound - sherman_rhs).abs())
                .max((ch.plain_bound - sherman_rhs).abs())
                .max((ch.converse_bound - converse).abs());

            // weights a sum to 1 here since b does
            let xs = WeightedVector::new(raw.x.clone(), a.clone()).unwrap();
            let mean: f64 = (0..l).map(|j| a[j] * raw.x[j]).sum();
            let jensen = jensen_strong(&xs, &spec, 0.0).unwrap();
            let lr = lah_ribaric_strong(&xs, &spec, 0.0).unwrap();
            let conv = converse_sherman_strong(&xs, 1.0, &spec, 0.0).unwrap();
            worst = worst
                .max((jensen.lhs - f(mean)).abs())
                .max((jensen.rhs - sherman_rhs).abs())
                .max((lr.lhs - sherman_rhs).abs())
                .max((lr.rhs - chord(mean)).abs())
                .max((conv - converse).abs());
        }
    }
    report(
        3,
        "classical reduction at c=0",
        worst <= 1e-12,
        format!("max deviation from direct summation {worst:.3e} over 900 instances"),
    );
}

#[test]
fn criterion_04_fink_identity() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = named_function("exp", interval(0.0, 1.0)).unwrap();
    let quad = QuadratureConfig::with_abs_tol(1e-9);
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for _ in 0..50 {
            let x = rng.gen_range(0.0..=1.0);
            let e = fink_identity_check(&spec, x, n, &quad).unwrap();
            worst = worst.max(e.residual.abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        "Fink identity",
        worst <= 1e-7,
        format!("n = 1..4, 50 points each, max |residual| = {worst:.3e}, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_05_sherman_difference_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dom = interval(0.0, 1.0);
    let quad = QuadratureConfig::default();
    let exp = named_function("exp", dom).unwrap();
    let mut worst_exp: f64 = 0.0;
    let mut worst_poly: f64 = 0.0;
    for _ in 0..100 {
        let pair = random_pair(&mut rng, dom);
        let r = sherman_difference_identity(&pair, &exp, 3, &quad).unwrap();
        worst_exp = worst_exp.max(r.residual.abs());
        for (name, n) in [("square", 3), ("cube", 4), ("linear", 2)] {
            let spec = named_function(name, dom).unwrap();
            let r = sherman_difference_identity(&pair, &spec, n, &quad).unwrap();
            worst_poly = worst_poly.max(r.residual.abs());
        }
    }
    report(
        5,
        "Sherman-difference identity",
        worst_exp <= 1e-7 && worst_poly <= 1e-10,
        format!("e^t, n=3: {worst_exp:.3e}; degree < n: {worst_poly:.3e} (100 instances)"),
    );
}

#[test]
fn criterion_06_even_order_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let dom = interval(0.0, 1.0);
    let spec = named_function("exp", dom).unwrap();
    let c = resolve_modulus(&spec, Modulus::Auto, DEFAULT_GRID_SIZE).unwrap().value;
    let quad = QuadratureConfig::default();
    let mut signs_ok = true;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let pair = random_pair(&mut rng, dom);
        for n in [2, 4] {
            let sign = check_kernel_condition(&pair, n, dom, DEFAULT_KERNEL_GRID).unwrap();
            signs_ok &= sign == KernelSign::Nonnegative;
        }
        let bound = higher_order_sherman_bound(&pair, &spec, 2, c, &quad).unwrap();
        let s = sherman_strong(&pair, &spec, c).unwrap();
        // order 2 has no boundary terms: the bound reads lhs ≤ strong_bound
        worst = worst
            .max((bound.lhs_with_correction - (s.strong_bound - s.lhs)).abs())
            .max(bound.rhs_boundary.abs());
    }
    report(
        6,
        "even-order kernel condition",
        signs_ok && worst <= 1e-10,
        format!("all nonnegative for n in {{2,4}}: {signs_ok}; order-2 bound vs strong Sherman {worst:.3e}"),
    );
}

fn random_doubly_stochastic(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    // convex combination of permutation matrices
    let k = rng.gen_range(1..=4);
    let mut weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= s);
    let mut d = vec![vec![0.0; n]; n];
    for w in weights {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            d[i][j] += w;
        }
    }
    d
}

#[test]
fn criterion_07_majorization_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_stochastic: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut negative = false;
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let d = random_doubly_stochastic(&mut rng, n);
        let y: Vec<f64> = d.iter().map(|row| row.iter().zip(&x).map(|(p, v)| p * v).sum()).collect();
        let a = construct_doubly_stochastic(&x, &y, 1e-12).unwrap();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| a.get(i, j)).sum();
            let col: f64 = (0..n).map(|j| a.get(j, i)).sum();
            worst_stochastic = worst_stochastic.max((row - 1.0).abs()).max((col - 1.0).abs());
            negative |= (0..n).any(|j| a.get(i, j) < 0.0);
            let yi: f64 = (0..n).map(|j| a.get(i, j) * x[j]).sum();
            worst_residual = worst_residual.max((yi - y[i]).abs());
        }
    }
    report(
        7,
        "majorization construction",
        worst_stochastic <= 1e-12 && worst_residual <= 1e-10 && !negative,
        format!("max sum defect {worst_stochastic:.3e}, max |y - xA^T| {worst_residual:.3e}, negative entries: {negative}"),
    );
}

#[test]
fn criterion_08_divergence_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dom = interval(0.1, 10.0);
    let kernels = [
        kernel_by_name("kl", None, dom).unwrap(),
        kernel_by_name("chi_square", None, dom).unwrap(),
        kernel_by_name("renyi", Some(2.0), dom).unwrap(),
        kernel_by_name("triangular", None, dom).unwrap(),
    ];
    let mut failures = 0;
    let mut worst_gap = f64::INFINITY;
    let mut chi_equality: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        // log-uniform ratios in [0.1, 10]
        let q: Vec<f64> = p.iter().map(|pi| pi * 10f64.powf(rng.gen_range(-1.0..=1.0))).collect();
        let pair = DistributionPair::new(p, q).unwrap();
        for kernel in &kernels {
            let c = kernel.strong_modulus().unwrap();
            let s = divergence_bounds(&pair, kernel, c).unwrap();
            let value = csiszar_divergence(&pair, kernel).unwrap();
            let gaps = [
                s.lower_strong - s.lower_ck,
                s.value - s.lower_strong,
                s.upper_converse - s.value,
            ];
            let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            worst_gap = worst_gap.min(min);
            if min < -1e-9 || (value - s.value).abs() > 1e-12 * value.abs().max(1.0) {
                failures += 1;
            }
            if kernel.name() == "chi_square" {
                chi_equality = chi_equality.max((s.value - s.lower_strong).abs());
            }
        }
    }
    report(
        8,
        "divergence sandwich",
        failures == 0 && chi_equality <= 1e-12,
        format!(
            "500 pairs x 4 kernels, {failures} violations, smallest gap {worst_gap:.3e}, chi-square |value - lower_strong| {chi_equality:.3e}"
        ),
    );
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-12..1.0f64).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

#[test]
fn criterion_09_entropy_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut uniform_err: f64 = 0.0;
    for n in 2..=64 {
        let h = shannon_entropy(&vec![1.0 / n as f64; n]).unwrap();
        uniform_err = uniform_err.max((h - (n as f64).ln()).abs());
    }
    let mut range_ok = true;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=32);
        let p = random_simplex(&mut rng, n);
        let h = shannon_entropy(&p).unwrap();
        range_ok &= h >= -1e-12 && h <= (n as f64).ln() + 1e-12;
    }
    let mut min_kl = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=32);
        let p = random_simplex(&mut rng, n);
        let q = random_simplex(&mut rng, n);
        min_kl = min_kl.min(kl_divergence(&DistributionPair::new(p, q).unwrap()).unwrap());
    }
    report(
        9,
        "entropy bounds",
        uniform_err <= 1e-12 && range_ok && min_kl >= -1e-12,
        format!("|H(uniform) - ln n| <= {uniform_err:.3e}, 0 <= H <= ln n: {range_ok}, min KL {min_kl:.3e}"),
    );
}

#[test]
fn criterion_10_divided_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let dom = interval(0.1, 3.0);
    let specs: Vec<FunctionSpec> = ["exp", "xlogx", "pow:4.5", "neglog", "cube"]
        .iter()
        .map(|name| named_function(name, dom).unwrap())
        .collect();
    let mut worst_rel: f64 = 0.0;
    for _ in 0..1000 {
        let spec = &specs[rng.gen_range(0..specs.len())];
        let k = rng.gen_range(1..=6);
        let mut pts: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..=3.0)).collect();
        if k > 1 && rng.gen_bool(0.3) {
            pts[k - 1] = pts[0];
        }
        let base = divided_difference(&pts, spec).unwrap();
        pts.shuffle(&mut rng);
        let shuffled = divided_difference(&pts, spec).unwrap();
        let rel = (base - shuffled).abs() / base.abs().max(f64::MIN_POSITIVE);
        worst_rel = worst_rel.max(rel);
    }

    // nodes placed symmetrically about z, spacing h
    let h = 1e-4;
    let exp = named_function("exp", interval(0.0, 1.0)).unwrap();
    let mut worst_limit: f64 = 0.0;
    for _ in 0..200 {
        let z = rng.gen_range(h..=1.0 - h);
        for k in [2usize, 3] {
            let coincident = divided_difference(&vec![z; k], &exp).unwrap();
            let spread: Vec<f64> = (0..k).map(|i| z + (i as f64 - (k as f64 - 1.0) / 2.0) * h).collect();
            let distinct = divided_difference(&spread, &exp).unwrap();
            worst_limit = worst_limit.max((coincident - distinct).abs());
        }
    }
    report(
        10,
        "divided differences",
        worst_rel <= 1e-12 && worst_limit <= 1e-4,
        format!("permutation relative error {worst_rel:.3e}; coincident vs h=1e-4 limit {worst_limit:.3e}"),
    );
}
