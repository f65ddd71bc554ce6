//! Acceptance checks. Prints one line per criterion and exits non-zero if
//! any hard criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recsup::census::{
    adjacency_ratio, enumerate_lambda, expected_gaussian_maximal, heuristic_xi_bound,
    total_pairs, xi_maximal, CensusOptions, CountCurve,
};
use recsup::certify::{certificate_value, is_recoverable, Decision};
use recsup::ensembles::{block_extend, gaussian_matrix, mercedes_benz};
use recsup::experiments::{
    cross_validate, isotonic_nonincreasing, moving_average, phase_grid, random_pair,
    ExperimentOptions,
};
use recsup::grow::grow_support_traced;
use recsup::{DenseMatrix, NumericConfig};

struct Suite {
    failed: Vec<String>,
    curves: Vec<(String, CountCurve)>,
}

impl Suite {
    fn record(&mut self, id: &str, ok: bool, detail: String) {
        println!("{} {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id.to_string());
        }
    }

    fn report(&self, id: &str, detail: String) {
        println!("REPORT {id}: {detail}");
    }
}

fn census(a: &DenseMatrix, k_max: usize) -> CountCurve {
    enumerate_lambda(a, k_max, &CensusOptions::default()).expect("census")
}

fn count(c: &CountCurve, k: usize) -> u64 {
    c.count(k).map(|v| u64::try_from(v.clone()).unwrap()).unwrap_or(0)
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn mb_census(s: &mut Suite) {
    let start = Instant::now();
    let curve = census(&mercedes_benz(5).unwrap(), 4);
    let secs = start.elapsed().as_secs_f64();
    let (c3, c4) = (count(&curve, 3), count(&curve, 4));
    // ((n+1)/2) C(n, (n-1)/2) at n = 5, and (l/2) Lambda(l) at l = 4
    let top = 3 * binom(5, 2);
    s.record(
        "1 MB(5) census",
        c4 == top && c3 == 2 * c4 && secs < 10.0,
        format!("counts[4]={c4} (expected {top}) counts[3]={c3} (expected {}) in {secs:.3}s", 2 * top),
    );
    s.curves.push(("MB(5)".into(), curve));
}

fn even_mb(s: &mut Suite) {
    let curve = census(&mercedes_benz(4).unwrap(), 3);
    let (c2, c3) = (count(&curve, 2), count(&curve, 3));
    s.record("2 MB(4) top size", c3 == 0, format!("counts[3]={c3}"));
    let first = 2 * binom(4, 2);
    s.report(
        "2 MB(4) size 2",
        format!(
            "counts[2]={c2}; (n/2)C(n,n/2)={first}; ((n-1)/2)((n+1)/2)C(n,(n-1)/2) has a non-integer binomial argument for even n"
        ),
    );
    let six = census(&mercedes_benz(6).unwrap(), 5);
    s.report(
        "2 MB(6) size 4",
        format!("counts[4]={} against (n/2)C(n,n/2)={}", count(&six, 4), 3 * binom(6, 3)),
    );
    s.curves.push(("MB(4)".into(), curve));
    s.curves.push(("MB(6)".into(), six));
}

fn block_extension(s: &mut Suite) {
    let start = Instant::now();
    let a = mercedes_benz(3).unwrap();
    let b = block_extend(&a, 1.0).unwrap();
    let ca = census(&a, 2);
    let cb = census(&b, 3);
    let secs = start.elapsed().as_secs_f64();
    let (la, lb) = (count(&ca, 2), count(&cb, 3));
    s.record(
        "3 block extension",
        lb == 2 * la && lb == 12 && secs < 1.0,
        format!("Lambda(B,3)={lb} 2*Lambda(A,2)={} in {secs:.3}s", 2 * la),
    );
    s.curves.push(("MB(3)".into(), ca));
    s.curves.push(("block(MB(3),1)".into(), cb));
}

fn xi_attainment(s: &mut Suite) {
    let mb5 = s.curves.iter().find(|(n, _)| n == "MB(5)").unwrap().1.clone();
    let xi = xi_maximal(5).unwrap();
    s.record(
        "4 Xi(4,5,4) attained",
        Some(&xi) == mb5.count(4),
        format!("xi_maximal(5)={xi} counts[4]={}", count(&mb5, 4)),
    );

    let mut violations = Vec::new();
    let mut check = |name: &str, c: &CountCurve| {
        for k in 1..=4 {
            let bound = heuristic_xi_bound(5, k).unwrap();
            if let Some(v) = c.count(k) {
                if *v > bound {
                    violations.push(format!("{name} k={k}: {v} > {bound}"));
                }
            }
        }
    };
    check("MB(5)", &mb5);
    let mut gaussian = Vec::new();
    for seed in 0..100u64 {
        let c = census(&gaussian_matrix(4, 5, seed).unwrap(), 4);
        check(&format!("gaussian 4x5 seed {seed}"), &c);
        gaussian.push((format!("gaussian 4x5 seed {seed}"), c));
    }
    s.curves.extend(gaussian);
    s.report(
        "4 heuristic bound",
        format!("{} violations over MB(5) and 100 Gaussian 4x5{}", violations.len(), if violations.is_empty() {
            String::new()
        } else {
            format!(": {}", violations.join("; "))
        }),
    );
}

fn oracle_equivalence(s: &mut Suite) {
    let start = Instant::now();
    let cfg = NumericConfig::default();
    let (mut checked, mut disagreements, mut near) = (0usize, Vec::new(), 0usize);
    for (m, n) in [(3, 6), (4, 8)] {
        for seed in 0..50u64 {
            let a = gaussian_matrix(m, n, 5000 + seed).unwrap();
            let mut curve = CountCurve::empty(m, n, m);
            for p in common::all_pairs(n, m) {
                let ours = is_recoverable(&a, &p, &cfg).unwrap();
                if ours {
                    *curve.counts.get_mut(&p.len()).unwrap() += 1u32;
                }
                match common::full_lp_value(&a, &p) {
                    None if ours => disagreements.push(format!("{m}x{n} seed {seed} {p}: rank")),
                    None => {}
                    Some(v) => {
                        if (v - 1.0).abs() <= 1e-7 {
                            near += 1;
                        }
                        if ours != (v < 1.0 - cfg.decision_tol) {
                            disagreements.push(format!("{m}x{n} seed {seed} {p}: full LP {v}"));
                        }
                    }
                }
                checked += 1;
            }
            s.curves.push((format!("gaussian {m}x{n} seed {seed}"), curve));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    s.record(
        "5 full LP agreement",
        disagreements.is_empty() && secs < 300.0,
        format!(
            "{checked} pairs, {} disagreements, {near} within 1e-7 of the threshold, {secs:.1}s{}",
            disagreements.len(),
            disagreements.first().map(|d| format!(" (first: {d})")).unwrap_or_default()
        ),
    );
}

fn gaussian_expectation(s: &mut Suite) {
    let start = Instant::now();
    let (quad, lower) = expected_gaussian_maximal(2, 3).unwrap();
    let closed = 3.0 * 8.0 * (1.0 / 2f64.sqrt()).atan() / PI;
    let rel = (quad - closed).abs() / closed;
    s.record(
        "6 closed form",
        (closed - 4.7019).abs() < 5e-5 && rel < 1e-6 && (lower - closed).abs() < 1e-12,
        format!("quadrature={quad:.10} arctan form={closed:.10} rel diff={rel:.2e}"),
    );

    let samples: Vec<f64> = (0..500u64)
        .map(|seed| {
            let c = census(&gaussian_matrix(2, 3, 9000 + seed).unwrap(), 2);
            let v = count(&c, 2) as f64;
            s.curves.push((format!("gaussian 2x3 seed {}", 9000 + seed), c));
            v
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / 500.0;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 499.0;
    let se = (var / 500.0).sqrt();
    let secs = start.elapsed().as_secs_f64();
    s.record(
        "6 Monte Carlo",
        (mean - closed).abs() <= 3.0 * se && secs < 120.0,
        format!("mean={mean:.4} se={se:.4} |diff|/se={:.2} in {secs:.1}s", (mean - closed).abs() / se),
    );
}

fn growth(s: &mut Suite) {
    let cfg = NumericConfig::default();
    let mut mb_ok = Vec::new();
    for n in (5..=15).step_by(2) {
        let a = mercedes_benz(n).unwrap();
        let ok = grow_support_traced(&a, n - 1, 1, &cfg)
            .map(|st| {
                let r = certificate_value(&a, &st.support, &cfg).unwrap();
                st.support.len() == n - 1 && r.decision == Decision::Recoverable && r.margin > 0.0
            })
            .unwrap_or(false);
        mb_ok.push((n, ok));
    }
    s.record(
        "7 growth on MB(n)",
        mb_ok.iter().all(|(_, ok)| *ok),
        format!(
            "n in 5..=15 odd: {}",
            mb_ok.iter().map(|(n, ok)| format!("{n}:{}", if *ok { "ok" } else { "failed" })).collect::<Vec<_>>().join(" ")
        ),
    );

    let (mut success, mut short, mut reverified) = (0, 0, 0);
    for seed in 0..50u64 {
        let a = gaussian_matrix(20, 40, 700 + seed).unwrap();
        if let Ok(st) = grow_support_traced(&a, 20, seed, &cfg) {
            success += 1;
            if st.iterations <= 40 {
                short += 1;
            }
            let r = certificate_value(&a, &st.support, &cfg).unwrap();
            if r.decision == Decision::Recoverable && r.margin > 0.0 {
                reverified += 1;
            }
        }
    }
    s.record(
        "7 growth on Gaussian 20x40",
        success >= 48 && reverified == success && short * 10 >= success * 9,
        format!("{success}/50 succeeded, {reverified} re-verified, {short} within 2k steps"),
    );
}

fn structural(s: &mut Suite) {
    let mut problems = Vec::new();
    for (name, c) in &s.curves {
        if !c.all_even() {
            problems.push(format!("{name}: odd count"));
        }
        if !c.normalized_nonincreasing() {
            problems.push(format!("{name}: normalized curve increases"));
        }
        for &k in c.counts.keys().filter(|&&k| k >= 2) {
            if let Err(e) = adjacency_ratio(c, k) {
                problems.push(format!("{name}: {e}"));
            }
        }
        if c.m > 2 && c.m + 2 <= c.n {
            let cap = (c.m + 1) / 3;
            for (&k, v) in &c.counts {
                if *v == total_pairs(c.n, k) && k > cap {
                    problems.push(format!("{name}: every pair of size {k} recoverable, above {cap}"));
                }
            }
        }
    }
    s.record(
        "8 structural invariants",
        problems.is_empty(),
        format!("{} curves, {} problems{}", s.curves.len(), problems.len(), problems.first().map(|p| format!(" (first: {p})")).unwrap_or_default()),
    );
}

fn cross_validation(s: &mut Suite) {
    let cfg = NumericConfig::default();
    let (mut agree, mut positives, mut verified) = (0, 0, 0);
    for t in 0..500u64 {
        let a = gaussian_matrix(20, 40, 20_000 + t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(t);
        let k = rng.random_range(1..=20);
        let p = random_pair(40, k, &mut rng);
        let out = cross_validate(&a, &p, t, &cfg).unwrap();
        if out.bp_agrees == Some(out.cert_decision) {
            agree += 1;
        }
        if out.cert_decision {
            positives += 1;
            let w = out.certificate_w.unwrap();
            let on = p.indices().iter().zip(p.sign_values()).all(|(&j, s)| (a.column_dot(j, &w) - s).abs() <= 1e-9);
            let off = p.complement(40).iter().all(|&j| a.column_dot(j, &w).abs() < 1.0);
            if on && off {
                verified += 1;
            }
        }
    }
    s.record(
        "9 cross-validation",
        agree >= 495 && verified == positives,
        format!("{agree}/500 agree, {positives} positive, {verified} re-verified"),
    );

    let start = Instant::now();
    let opts = ExperimentOptions::default();
    let grid = phase_grid(100, 10, 10, 20, 42, true, &opts).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut columns: Vec<usize> = grid.iter().map(|r| r.m).collect();
    columns.dedup();
    let mut shapes = Vec::new();
    let mut ok = secs < 900.0;
    for &m in &columns {
        let fr: Vec<f64> = grid.iter().filter(|r| r.m == m).map(|r| r.fraction_cert()).collect();
        let smooth = isotonic_nonincreasing(&moving_average(&fr, 2));
        let (first, last) = (smooth[0], smooth[smooth.len() - 1]);
        shapes.push(format!("m={m}:{first:.2}->{last:.2}"));
        if m == 100 {
            // m = n: every full-rank support is recoverable
            ok &= fr.iter().all(|&f| f == 1.0);
            continue;
        }
        ok &= first >= 0.9 && last <= 0.1;
    }
    s.record("9 phase grid n=100", ok, format!("{secs:.1}s; {}", shapes.join(" ")));

    let cells = grid.len() as f64;
    let cert = grid.iter().filter_map(|r| r.mean_time_cert_s).sum::<f64>() / cells;
    let bp = grid.iter().filter_map(|r| r.mean_time_bp_s).sum::<f64>() / cells;
    s.report(
        "10 relative time",
        format!(
            "mean certificate {:.3} ms, mean BP {:.3} ms, certificate {} on this machine",
            cert * 1e3,
            bp * 1e3,
            if cert < bp { "faster" } else { "slower" }
        ),
    );
}

fn main() -> ExitCode {
    let mut s = Suite { failed: Vec::new(), curves: Vec::new() };
    mb_census(&mut s);
    even_mb(&mut s);
    block_extension(&mut s);
    xi_attainment(&mut s);
    oracle_equivalence(&mut s);
    gaussian_expectation(&mut s);
    growth(&mut s);
    structural(&mut s);
    cross_validation(&mut s);
    if s.failed.is_empty() {
        println!("acceptance: all hard criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", s.failed.join(", "));
        ExitCode::FAILURE
    }
}
