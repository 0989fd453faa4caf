//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines appear in order
//! and uncaptured. Criteria listed in `KNOWN_FAILURES` are evaluated at their
//! pinned tolerances and reported as FAIL like any other; they only stop the
//! process from exiting nonzero, unless `ACCEPTANCE_STRICT=1` is set.
//! `ACCEPTANCE_ONLY=1,4,7` restricts the run to a subset.

use std::path::PathBuf;
use std::time::Instant;

use statrs::distribution::{Continuous, ContinuousCDF, Exp, Gamma};

use ibnr_core::chain_ladder::{dev_factors, error_table, project, Cell};
use ibnr_core::claims::{
    delay_distribution, joint_density_ts, ks_exponential_with_rate, ln_joint_density_ts, FitOptions, ModelParams,
};
use ibnr_core::copula::{
    clayton_cdf, clayton_density, conditional_cdf_v_given_u, empirical_kendall_tau, generator,
    generator_pseudo_inverse, log_clayton_density, ClaytonTheta, UnitPair,
};
use ibnr_core::io::{read_error_table, read_triangle};
use ibnr_core::quadrature::{integrate_log, integrate_log_breaks, integrate_nonneg, QuadratureOptions};
use ibnr_core::simulation::{recovery_study, report_ratio_table, sample_pair_stream, SimConfig};

/// Criteria that fail against the printed tables or at desk scale; see README.
const KNOWN_FAILURES: &[u32] = &[2, 3, 8];

const SEED: u64 = 2024;

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn reference_params(theta: f64) -> ModelParams {
    ModelParams::new(0.5, 0.5, theta).unwrap()
}

fn criterion_1() -> Outcome {
    let expected = [1.227132, 1.028251, 1.006276, 1.001950, 1.000510];
    let f = dev_factors(&read_triangle(fixture("table3_upper.csv")).unwrap()).unwrap();
    let worst = f
        .factors
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let shown: Vec<String> = f.factors.iter().map(|x| format!("{x:.6}")).collect();
    Outcome::new(
        f.len() == expected.len() && worst <= 1e-6,
        format!("factors {} (max deviation {worst:.1e})", shown.join(" ")),
    )
}

/// Bold cells of `printed` that the projection of `upper` misses by more
/// than one claim after rounding: (year, development, computed, printed).
fn projection_misses(upper: &str, printed: &str) -> (usize, Vec<(i32, usize, i64, i64)>) {
    let upper = read_triangle(fixture(upper)).unwrap();
    let printed = read_triangle(fixture(printed)).unwrap();
    let projected = project(&upper, &dev_factors(&upper).unwrap()).unwrap();
    let rounded = projected.rounded();
    let mut checked = 0;
    let mut misses = Vec::new();
    for i in 0..printed.rows() {
        for j in 0..printed.cols() {
            if let Cell::Projected(p) = printed.cell(i, j) {
                checked += 1;
                let got = rounded[i][j].expect("projected cell");
                let want = p as i64;
                if (got - want).abs() > 1 {
                    misses.push((printed.origin_year() + i as i32, j, got, want));
                }
            }
        }
    }
    (checked, misses)
}

fn criterion_2() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (label, upper, printed) in [
        ("table 3", "table3_upper.csv", "table3_printed.csv"),
        ("table 4", "table4_upper.csv", "table4_printed.csv"),
    ] {
        let (checked, misses) = projection_misses(upper, printed);
        pass &= misses.is_empty();
        let listed: Vec<String> = misses
            .iter()
            .map(|(y, j, got, want)| format!("{y}/{j}: {got} vs {want}"))
            .collect();
        parts.push(format!(
            "{label}: {}/{checked} bold cells within 1{}",
            checked - misses.len(),
            if listed.is_empty() { String::new() } else { format!(" [{}]", listed.join(", ")) }
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let tol = 5e-4;
    let t3 = read_triangle(fixture("table3_printed.csv")).unwrap();
    let t4 = read_triangle(fixture("table4_printed.csv")).unwrap();
    let t6 = read_triangle(fixture("table6_printed.csv")).unwrap();
    let t7 = read_triangle(fixture("table7_printed.csv")).unwrap();
    let cl = error_table(&t4, &t3).unwrap();
    let copula = error_table(&t7, &t6).unwrap();
    let (e_cl, e_cop) = (cl.get(5, 1).unwrap(), copula.get(5, 1).unwrap());
    let worked = (e_cl - 4.0052).abs() <= tol && (e_cop - 0.0439).abs() <= tol;

    let printed = read_error_table(fixture("table5_printed.csv")).unwrap();
    let mut misses = Vec::new();
    let mut checked = 0;
    for i in 0..printed.rows() {
        for j in 0..printed.cols() {
            let (got, want) = (cl.get(i, j), printed.get(i, j));
            if got.is_none() && want.is_none() {
                continue;
            }
            checked += 1;
            match (got, want) {
                (Some(g), Some(w)) if (g - w).abs() <= tol => {}
                _ => misses.push(format!(
                    "{}/{j}: {} vs {}",
                    printed.origin_year + i as i32,
                    got.map_or("-".into(), |g| format!("{g:.4}")),
                    want.map_or("-".into(), |w| format!("{w:.4}"))
                )),
            }
        }
    }
    Outcome::new(
        worked && misses.is_empty(),
        format!(
            "worked examples {e_cl:.4} and {e_cop:.4}; table 5 grid {}/{checked} cells within {tol:e}{}",
            checked - misses.len(),
            if misses.is_empty() { String::new() } else { format!(" [{}]", misses.join(", ")) }
        ),
    )
}

fn criterion_4() -> Outcome {
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut worst_identity = 0.0f64;
    let mut worst_mixed = 0.0f64;
    let mut worst_conditional = 0.0f64;
    let mut worst_norm = 0.0f64;
    for &th in &[0.5, 1.5, 5.0] {
        let theta = ClaytonTheta::new(th).unwrap();
        let cdf = |u: f64, v: f64| clayton_cdf(UnitPair::new(u, v).unwrap(), theta);
        for &u in &grid {
            // margins
            worst_identity = worst_identity.max((cdf(u, 1.0) - u).abs()).max((cdf(1.0, u) - u).abs());
            for &v in &grid {
                let c = cdf(u, v);
                let closed = (u.powf(-th) + v.powf(-th) - 1.0).powf(-1.0 / th);
                let composed = generator_pseudo_inverse(
                    generator(u, theta).unwrap() + generator(v, theta).unwrap(),
                    theta,
                )
                .unwrap();
                worst_identity = worst_identity
                    .max((c - closed).abs() / closed)
                    .max((c - composed).abs() / closed);

                let h = 1e-4;
                let mixed = (cdf(u + h, v + h) - cdf(u + h, v - h) - cdf(u - h, v + h) + cdf(u - h, v - h))
                    / (4.0 * h * h);
                let dens = clayton_density(UnitPair::new(u, v).unwrap(), theta).unwrap();
                worst_mixed = worst_mixed.max((mixed - dens).abs() / dens);

                let du = (cdf(u + h, v) - cdf(u - h, v)) / (2.0 * h);
                let cond = conditional_cdf_v_given_u(u, v, theta).unwrap();
                worst_conditional = worst_conditional.max((du - cond).abs() / cond);
            }
        }
        // ∫∫ c = 1: the inner integral is split where the density ridges at v = u.
        let opts = QuadratureOptions::relative(1e-10);
        let total = integrate_nonneg(
            |u| {
                integrate_log_breaks(
                    |v| log_clayton_density(UnitPair::new(u, v)?, theta),
                    0.0,
                    1.0,
                    &[u],
                    &opts,
                )
                .map(f64::exp)
            },
            0.0,
            1.0,
            &opts,
        )
        .unwrap();
        worst_norm = worst_norm.max((total - 1.0).abs());
    }
    Outcome::new(
        worst_identity <= 1e-12 && worst_mixed <= 1e-5 && worst_conditional <= 1e-6 && worst_norm <= 1e-6,
        format!(
            "identities {worst_identity:.1e}, mixed derivative {worst_mixed:.1e}, \
             conditional cdf {worst_conditional:.1e}, normalization {worst_norm:.1e}"
        ),
    )
}

/// Truncation envelope for the normalization of `f_TS(i, ., .)`: occurrence
/// times up to the Gamma(i, beta1) quantile `1 - TAIL` and delays up to the
/// Exp(beta2) quantile `1 - TAIL`, so at most `2 TAIL` of mass is cut off.
const TAIL: f64 = 1e-7;

fn criterion_5() -> Outcome {
    let p = reference_params(1.5);
    let opts = QuadratureOptions::relative(1e-7);
    let w_max = Exp::new(p.beta2).unwrap().inverse_cdf(1.0 - TAIL);
    let mut worst = 0.0f64;
    let mut masses = Vec::new();
    for &i in &[1usize, 2, 3, 5] {
        let t_max = Gamma::new(i as f64, p.beta1).unwrap().inverse_cdf(1.0 - TAIL);
        let ln_mass = integrate_log(
            |t| integrate_log(|w| ln_joint_density_ts(i, t, t + w, &p, &opts), 0.0, w_max, &opts),
            0.0,
            t_max,
            &opts,
        )
        .unwrap();
        let mass = ln_mass.exp();
        worst = worst.max((mass - 1.0).abs());
        masses.push(format!("i={i}: {mass:.7}"));
    }
    Outcome::new(worst <= 1e-3, format!("{} (max deviation {worst:.1e})", masses.join(", ")))
}

fn criterion_6() -> Outcome {
    let p = ModelParams::new(0.5, 0.5, ClaytonTheta::INDEPENDENT.value()).unwrap();
    let opts = QuadratureOptions::default();
    let delay = Exp::new(p.beta2).unwrap();
    let mut worst = 0.0f64;
    let mut points = 0;
    for &i in &[1usize, 2, 3, 5] {
        let occurrence = Gamma::new(i as f64, p.beta1).unwrap();
        for a in 0..20 {
            let t = 0.25 + 0.5 * a as f64;
            for b in 0..20 {
                let s = t + 0.1 + 0.4 * b as f64;
                let expected = occurrence.pdf(t) * delay.pdf(s - t);
                let got = joint_density_ts(i, t, s, &p, &opts).unwrap();
                worst = worst.max((got - expected).abs() / expected);
                points += 1;
            }
        }
    }
    Outcome::new(
        worst <= 1e-4,
        format!("{points} points over i in {{1,2,3,5}}, max relative error {worst:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let cfg = SimConfig::new(reference_params(1.5), 10_000, SEED).unwrap();
    let sample = sample_pair_stream(&cfg).unwrap();
    let tau = empirical_kendall_tau(&sample.pairs).unwrap();
    let ks_t = ks_exponential_with_rate(&sample.t_stars(), 0.5).unwrap();
    let ks_w = ks_exponential_with_rate(&sample.delays(), 0.5).unwrap();
    Outcome::new(
        (tau - 3.0 / 7.0).abs() <= 0.03 && ks_t.p_value > 0.01 && ks_w.p_value > 0.01,
        format!(
            "tau {tau:.4} (target {:.4}), KS p inter-arrival {:.3}, delay {:.3}, acceptance {:.3}",
            3.0 / 7.0,
            ks_t.p_value,
            ks_w.p_value,
            sample.acceptance_rate()
        ),
    )
}

fn criterion_8() -> Outcome {
    let fit = FitOptions::default();
    let study = |n| {
        let cfg = SimConfig::new(reference_params(1.5), n, SEED).unwrap();
        recovery_study(&cfg, &fit).unwrap()
    };
    let small = study(50);
    let large = study(200);
    let mse_down = (0..3).all(|k| large.mse[k] < small.mse[k]);
    let bounds = [0.05, 0.06, 0.15];
    let bias_ok = (0..3).all(|k| large.bias[k].abs() <= bounds[k]);
    let fmt = |x: [f64; 3]| format!("({:.4}, {:.4}, {:.4})", x[0], x[1], x[2]);
    Outcome::new(
        mse_down && bias_ok,
        format!(
            "(a) MSE n=50 {} -> n=200 {} [{}]; (b) bias n=200 {} vs bounds (0.05, 0.06, 0.15) [{}]; \
             bias n=50 {}; excluded {}/{} and {}/{}",
            fmt(small.mse),
            fmt(large.mse),
            if mse_down { "decreasing" } else { "not decreasing" },
            fmt(large.bias),
            if bias_ok { "within" } else { "outside" },
            fmt(small.bias),
            small.excluded,
            small.replications,
            large.excluded,
            large.replications
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = SimConfig::new(reference_params(1.5), 200, SEED).unwrap();
    let table = report_ratio_table(&cfg, 7).unwrap();
    let ratios = table.ratios();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exact = table.counts.iter().sum::<u64>() == table.total;
    let sum: f64 = ratios.iter().sum();
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    Outcome::new(
        table.same_year_share() == max && exact && (sum - 1.0).abs() <= 1e-12,
        format!("ratios {} (counts sum to {} of {})", shown.join(" "), table.counts.iter().sum::<u64>(), table.total),
    )
}

fn criterion_10() -> Outcome {
    let p = reference_params(1.5);
    let opts = QuadratureOptions::default();
    let mut worst = 0.0f64;
    let mut sums = Vec::new();
    for &i in &[1usize, 3] {
        for &j in &[1usize, 2] {
            let horizon = j + 40;
            let total: f64 = delay_distribution(i, j, &p, horizon, &opts).unwrap().iter().sum();
            worst = worst.max((total - 1.0).abs());
            sums.push(format!("({i},{j}): {total:.7}"));
        }
    }
    Outcome::new(worst <= 1e-3, format!("{} with 40 lags", sums.join(", ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "chain-ladder factors", criterion_1),
        (2, "chain-ladder projections", criterion_2),
        (3, "error tables", criterion_3),
        (4, "copula analytics", criterion_4),
        (5, "joint-density normalization", criterion_5),
        (6, "independence oracle", criterion_6),
        (7, "sampler calibration", criterion_7),
        (8, "parameter recovery", criterion_8),
        (9, "forecast sanity", criterion_9),
        (10, "delay-probability total", criterion_10),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");

    let mut unexpected = Vec::new();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        let note = match (outcome.pass, known) {
            (false, true) => " (known)",
            (true, true) => " (listed as a known failure)",
            _ => "",
        };
        println!("criterion {id:>2} {name}: {status}{note} [{secs:.1}s] {}", outcome.detail);
        if !outcome.pass {
            failed += 1;
            if strict || !known {
                unexpected.push(id);
            }
        }
    }
    println!("acceptance: {} of {ran} criteria pass", ran - failed);
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
