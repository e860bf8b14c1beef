//! Acceptance suite. Runs every criterion, prints one `[PASS]`/`[FAIL]` line
//! each, and exits non-zero if any failed.
//!
//! `cargo test --test acceptance`; pass criterion numbers after `--` to run
//! a subset, e.g. `cargo test --test acceptance -- 1 7`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use mlelab::distributions::{kl_pareto, kl_poisson, Distribution, NegBinomialDist, ParetoDist, PoissonDist};
use mlelab::estimators::{
    fit_median_of_means, fit_median_of_means_blocks, fit_poisson_mle_iterative, fit_tmo, fit_znbp,
    poisson_closed_form_1d, znbp_example_gradient, OptConfig, TmoLoss,
};
use mlelab::inference::{point_predict, MetricTarget};
use mlelab::linear_model::{excess_risk, FixedDesign, LinkLayer, ParamSpace, ParamVector};
use mlelab::metrics::{evaluate, huber, Metric};
use mlelab::rng;
use mlelab::simharness::{
    bound_terms_1d, generate, respond, run_trials, skewed_1d_column, DesignKind, DesignSpec, ResponseModel, RiskTable,
    TrialConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

fn median_of(table: &RiskTable, name: &str) -> f64 {
    table.row(name).map_or(f64::NAN, |r| r.median)
}

fn p99_of(table: &RiskTable, name: &str) -> f64 {
    table.row(name).map_or(f64::NAN, |r| r.p99)
}

fn failures_of(table: &RiskTable, name: &str) -> usize {
    table.row(name).map_or(usize::MAX, |r| r.failures)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn ones(d: usize) -> ParamVector {
    ParamVector::new(vec![1.0; d]).unwrap()
}

fn trial_config(design: DesignSpec, model: ResponseModel, estimators: &str, trials: usize, seed: u64) -> TrialConfig {
    TrialConfig {
        design,
        model,
        estimators: estimators.split(',').map(|s| s.parse().unwrap()).collect(),
        trials,
        delta: 0.05,
        seed,
        parallel: true,
        opt: OptConfig::default(),
    }
}

fn poisson_closed_form() -> Outcome {
    let start = Instant::now();
    let mut stream = rng::stream(101);
    let mut worst = 0.0f64;
    let mut clamped = 0;
    for _ in 0..50 {
        let n = stream.random_range(5..200);
        let slope = stream.random_range(0.5..5.0);
        let x: Vec<f64> = (0..n).map(|_| stream.random_range(0.1..3.0)).collect();
        let y: Vec<f64> = x.iter().map(|xi| PoissonDist::new(slope * xi).unwrap().sample(&mut stream)).collect();
        // Radii on either side of the slope so some instances clamp.
        let space = ParamSpace::new(stream.random_range(0.5..6.0), stream.random_range(1e-3..0.1)).unwrap();
        let design = FixedDesign::from_column(&x).unwrap();
        let exact = poisson_closed_form_1d(&x, &y, &space).unwrap();
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        if exact != sy / sx {
            clamped += 1;
        }
        let fitted = fit_poisson_mle_iterative(&design, &y, &space, &OptConfig::default()).unwrap();
        worst = worst.max((fitted.theta().unwrap().as_slice()[0] - exact).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && within(elapsed, 1),
        format!("max |iterative - closed form| = {worst:.2e} ({clamped}/50 clamped), {elapsed:.2?}"),
    )
}

fn cauchy_schwarz_ratio() -> Outcome {
    let mut stream = rng::stream(202);
    let mut min_ratio = f64::INFINITY;
    let mut min_strict = f64::INFINITY;
    for i in 0..1000 {
        let len = stream.random_range(1..60);
        let x: Vec<f64> = if i % 5 == 0 {
            vec![stream.random_range(0.01..100.0); len]
        } else {
            (0..len).map(|_| stream.random_range(0.01..100.0)).collect()
        };
        let ratio = bound_terms_1d(&x).unwrap().ratio;
        min_ratio = min_ratio.min(ratio);
        if x.iter().any(|v| *v != x[0]) {
            min_strict = min_strict.min(ratio);
        }
    }
    outcome(
        min_ratio >= 1.0 - 1e-12 && min_strict > 1.0 + 1e-6,
        format!("min ratio {min_ratio:.15}, min over distinct magnitudes {min_strict:.6}"),
    )
}

fn skewed_separation() -> Outcome {
    let start = Instant::now();
    let ratios: Vec<f64> = [100, 400, 1600]
        .iter()
        .map(|&n| bound_terms_1d(&skewed_1d_column(n, 0.25)).unwrap().ratio)
        .collect();
    let elapsed = start.elapsed();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    outcome(increasing && within(elapsed, 1), format!("ratios {ratios:.4?}, {elapsed:.2?}"))
}

fn poisson_risk() -> Outcome {
    let start = Instant::now();
    let design = DesignSpec {
        kind: DesignKind::HeavyNorm { fraction: 0.05, magnitude: 10.0 },
        n: 2000,
        d: 5,
        r_cap: 1e3,
        margin: 0.1,
        radius: 100.0,
        seed: 4,
    };
    let cfg = trial_config(design, ResponseModel::Poisson { theta_star: ones(5) }, "ls,poisson-mle", 200, 404);
    let table = run_trials(&cfg).unwrap();
    let elapsed = start.elapsed();
    let (ls_med, mle_med) = (median_of(&table, "ls"), median_of(&table, "poisson-mle"));
    let (ls_p99, mle_p99) = (p99_of(&table, "ls"), p99_of(&table, "poisson-mle"));
    let failures = failures_of(&table, "ls") + failures_of(&table, "poisson-mle");
    outcome(
        mle_med <= ls_med && mle_p99 <= ls_p99 && failures == 0 && within(elapsed, 120),
        format!(
            "median mle {mle_med:.3e} vs ls {ls_med:.3e}; p99 mle {mle_p99:.3e} vs ls {ls_p99:.3e}; {failures} failures, {elapsed:.2?}"
        ),
    )
}

fn pareto_tail_risk() -> Outcome {
    let start = Instant::now();
    let design = DesignSpec { kind: DesignKind::Gaussian, n: 1000, d: 3, r_cap: 1e3, margin: 0.1, radius: 100.0, seed: 5 };
    let model = ResponseModel::Pareto { theta_star: ones(3), tail: 4.5 };
    let cfg = trial_config(design, model, "ls,pareto-mle", 500, 505);
    let table = run_trials(&cfg).unwrap();
    let elapsed = start.elapsed();
    let (ls_p99, mle_p99) = (p99_of(&table, "ls"), p99_of(&table, "pareto-mle"));
    let failures = failures_of(&table, "ls") + failures_of(&table, "pareto-mle");
    outcome(
        mle_p99 < ls_p99 && failures == 0 && within(elapsed, 180),
        format!(
            "p99 mle {mle_p99:.3e} vs ls {ls_p99:.3e}; medians {:.3e} / {:.3e}; {failures} failures, {elapsed:.2?}",
            median_of(&table, "pareto-mle"),
            median_of(&table, "ls")
        ),
    )
}

fn median_of_means_scaling() -> Outcome {
    let mut medians = Vec::new();
    for (i, n) in [2000, 4000, 8000].into_iter().enumerate() {
        let design = DesignSpec { kind: DesignKind::Gaussian, n, d: 5, r_cap: 1e3, margin: 0.1, radius: 100.0, seed: 60 + i as u64 };
        let cfg = trial_config(design, ResponseModel::Poisson { theta_star: ones(5) }, "mom", 200, 606 + i as u64);
        let table = run_trials(&cfg).unwrap();
        if failures_of(&table, "mom") != 0 {
            return outcome(false, format!("mom failed on {} trials at n = {n}", failures_of(&table, "mom")));
        }
        medians.push(median_of(&table, "mom"));
    }
    let ratios: Vec<f64> = medians.windows(2).map(|w| w[1] / w[0]).collect();
    let scaling = ratios.iter().all(|r| (0.35..=0.7).contains(r));

    // Planted outliers: three responses per draw replaced by 1e5. A single
    // draw's clean risk is too noisy to divide by, so degradation compares
    // median risks over 50 draws on one fixed design.
    let star = ones(5);
    let spec = DesignSpec { kind: DesignKind::Gaussian, n: 2000, d: 5, r_cap: 1e3, margin: 0.1, radius: 100.0, seed: 60 };
    let design = generate(&spec, Some(&star)).unwrap();
    let sigma = design.covariance();
    let model = ResponseModel::Poisson { theta_star: star.clone() };
    let risk = |t: ParamVector| excess_risk(&t, &star, &sigma).unwrap();
    let mut draws = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for k in 0..50u64 {
        let mut y = respond(&model, &design, &mut rng::split(616, k)).unwrap();
        draws[0].push(risk(fit_median_of_means(&design, &y, 0.05, k).unwrap()));
        draws[1].push(risk(fit_median_of_means_blocks(&design, &y, 1, k).unwrap()));
        for v in y.iter_mut().take(3) {
            *v = 1e5;
        }
        draws[2].push(risk(fit_median_of_means(&design, &y, 0.05, k).unwrap()));
        draws[3].push(risk(fit_median_of_means_blocks(&design, &y, 1, k).unwrap()));
    }
    let [clean, clean_mean, dirty, dirty_mean] = draws.map(median);
    let robust = dirty < 2.0 * clean && dirty_mean >= 10.0 * clean_mean;
    outcome(
        scaling && robust,
        format!(
            "medians {}, ratios {ratios:.3?}; outliers: mom x{:.2}, mean x{:.1e}",
            medians.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>().join(" / "),
            dirty / clean,
            dirty_mean / clean_mean
        ),
    )
}

fn znbp_gradient() -> Outcome {
    let mut stream = rng::stream(707);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut points = 0;
    while points < 100 {
        let weights: Vec<f64> = (0..18).map(|_| stream.random_range(-1.0..1.0)).collect();
        let layer = LinkLayer::new(2, weights.clone(), 4.0).unwrap();
        let x = [stream.random_range(-1.0..1.0), stream.random_range(-1.0..1.0)];
        let y = match stream.random_range(0..3) {
            0 => 0.0,
            1 => stream.random_range(1..8) as f64,
            _ => stream.random_range(2.0..20.0),
        };
        // The density jumps at the Pareto support edge; differences across it are meaningless.
        let scale = layer.mixture_at(&x).unwrap().pareto().scale();
        if (y - scale).abs() < 1e-3 {
            continue;
        }
        points += 1;
        let (_, g) = znbp_example_gradient(&layer, &x, y).unwrap();
        let nll_at = |j: usize, step: f64| {
            let mut w = weights.clone();
            w[j] += step;
            znbp_example_gradient(&LinkLayer::new(2, w, 4.0).unwrap(), &x, y).unwrap().0
        };
        for (j, gj) in g.iter().enumerate() {
            let fd = (nll_at(j, h) - nll_at(j, -h)) / (2.0 * h);
            worst = worst.max((fd - gj).abs() / gj.abs().max(fd.abs()).max(1e-3));
        }
    }
    outcome(worst <= 1e-5, format!("max relative error {worst:.2e} over 100 points"))
}

fn mean_over_rows(layer: &LinkLayer, design: &FixedDesign) -> ([f64; 3], f64, f64) {
    let mut w = [0.0; 3];
    let (mut r, mut p) = (0.0, 0.0);
    for x in design.rows() {
        let m = layer.mixture_at(x).unwrap();
        for (a, b) in w.iter_mut().zip(m.weights()) {
            *a += b;
        }
        r += m.nb().count();
        p += m.nb().success();
    }
    let n = design.n() as f64;
    (w.map(|v| v / n), r / n, p / n)
}

fn znbp_recovery() -> Outcome {
    let spec = DesignSpec { kind: DesignKind::Gaussian, n: 5000, d: 2, r_cap: 1e3, margin: 1e-6, radius: 1e6, seed: 8 };
    let design = generate(&spec, None).unwrap();

    let start = Instant::now();
    let mut truth = LinkLayer::zeros(2, 4.0).unwrap();
    for (k, bias) in [-30.0, 30.0, -30.0, 1.0, 0.0, 0.0].into_iter().enumerate() {
        truth.set_bias(k, bias);
    }
    let nb = NegBinomialDist::new(2.0, 0.5).unwrap();
    let mut stream = rng::stream(808);
    let y: Vec<f64> = (0..design.n()).map(|_| nb.sample(&mut stream)).collect();
    let fitted = fit_znbp(&design, &y, 4.0, &OptConfig::with_seed(8)).unwrap();
    let (w, r, p) = mean_over_rows(fitted.layer().unwrap(), &design);
    let nb_time = start.elapsed();
    let nb_ok = w[1] >= 0.9 && (r - 2.0).abs() <= 0.3 && (p - 0.5).abs() <= 0.05 && within(nb_time, 60);

    let start = Instant::now();
    let zeros = vec![0.0; design.n()];
    let fitted = fit_znbp(&design, &zeros, 4.0, &OptConfig::with_seed(9)).unwrap();
    let (w0, _, _) = mean_over_rows(fitted.layer().unwrap(), &design);
    let zero_time = start.elapsed();
    let zero_ok = w0[0] >= 0.99 && within(zero_time, 60);

    outcome(
        nb_ok && zero_ok,
        format!(
            "NB data: w = {w:.3?}, r = {r:.3}, p = {p:.3} ({nb_time:.2?}) [{}]; zeros: w1 = {:.4} ({zero_time:.2?}) [{}]",
            if nb_ok { "ok" } else { "miss" },
            w0[0],
            if zero_ok { "ok" } else { "miss" }
        ),
    )
}

fn with_intercept(rows: &[Vec<f64>]) -> FixedDesign {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
    FixedDesign::from_rows(&rows).unwrap()
}

fn post_hoc_inference() -> Outcome {
    let truth = LinkLayer::new(
        2,
        vec![
            0.5, 0.0, -0.5, //
            0.0, 0.5, 1.0, //
            0.0, 0.0, -1.0, //
            0.3, 0.0, 1.0, //
            0.0, 0.3, 0.0, //
            0.5, 0.5, 1.0,
        ],
        4.0,
    )
    .unwrap();
    let model = ResponseModel::Znbp { layer: truth };
    let space = ParamSpace::new(1e6, 1e-6).unwrap();
    let mut totals = [0.0; 4];
    for seed in 0..20u64 {
        let spec = DesignSpec { kind: DesignKind::Gaussian, n: 7000, d: 2, r_cap: 1e3, margin: 1e-6, radius: 1e6, seed };
        let x = generate(&spec, None).unwrap();
        let y = respond(&model, &x, &mut rng::split(seed, 1)).unwrap();
        let rows: Vec<Vec<f64>> = x.rows().map(<[f64]>::to_vec).collect();
        let (train, test) = rows.split_at(5000);
        let (y_train, y_test) = y.split_at(5000);

        let fitted = fit_znbp(&FixedDesign::from_rows(train).unwrap(), y_train, 4.0, &OptConfig::with_seed(seed)).unwrap();
        let layer = fitted.layer().unwrap();
        let predict = |target: MetricTarget| -> Vec<f64> {
            test.iter()
                .enumerate()
                .map(|(i, r)| point_predict(layer, r, target, 10_000, seed * 100_000 + i as u64).unwrap())
                .collect()
        };
        let znbp_wape = evaluate(Metric::Wape, y_test, &predict(MetricTarget::Wape)).unwrap().value;
        let znbp_mape = evaluate(Metric::Mape, y_test, &predict(MetricTarget::Mape)).unwrap().value;

        let (x_train, x_test) = (with_intercept(train), with_intercept(test));
        let (mut tmo_wape, mut tmo_mape) = (f64::INFINITY, f64::INFINITY);
        for loss in [TmoLoss::Mae, TmoLoss::Mape] {
            let fit = fit_tmo(&x_train, y_train, loss, &space, &OptConfig::with_seed(seed)).unwrap();
            let yhat = x_test.predict(fit.theta().unwrap());
            tmo_wape = tmo_wape.min(evaluate(Metric::Wape, y_test, &yhat).unwrap().value);
            tmo_mape = tmo_mape.min(evaluate(Metric::Mape, y_test, &yhat).unwrap().value);
        }
        for (t, v) in totals.iter_mut().zip([znbp_wape, tmo_wape, znbp_mape, tmo_mape]) {
            *t += v;
        }
    }
    let wape_ratio = totals[0] / totals[1];
    let mape_ratio = totals[2] / totals[3];
    outcome(
        wape_ratio <= 1.05 && mape_ratio <= 1.05,
        format!("znbp / best tmo over 20 seeds: WAPE {wape_ratio:.4}, MAPE {mape_ratio:.4}"),
    )
}

fn metric_oracle(metric: Metric, y: &[f64], yhat: &[f64]) -> Option<f64> {
    let n = y.len() as f64;
    let mut total = 0.0;
    match metric {
        Metric::Mse | Metric::Rmse => {
            for i in 0..y.len() {
                total += (yhat[i] - y[i]) * (yhat[i] - y[i]);
            }
            Some(if metric == Metric::Rmse { (total / n).sqrt() } else { total / n })
        }
        Metric::Mae => {
            for i in 0..y.len() {
                total += (yhat[i] - y[i]).abs();
            }
            Some(total / n)
        }
        Metric::Wape | Metric::Nql(_) => {
            let mut denom = 0.0;
            for i in 0..y.len() {
                denom += y[i].abs();
                total += match metric {
                    Metric::Nql(rho) => {
                        let under = (y[i] - yhat[i]).max(0.0);
                        let over = (yhat[i] - y[i]).max(0.0);
                        2.0 * rho * under + 2.0 * (1.0 - rho) * over
                    }
                    _ => (yhat[i] - y[i]).abs(),
                };
            }
            (denom > 0.0).then(|| total / denom)
        }
        Metric::Mape => {
            let mut used = 0;
            for i in 0..y.len() {
                if y[i] != 0.0 {
                    used += 1;
                    total += ((y[i] - yhat[i]) / y[i]).abs();
                }
            }
            (used > 0).then(|| total / n)
        }
        Metric::Huber(delta) => {
            for i in 0..y.len() {
                let r = y[i] - yhat[i];
                total += if r.abs() <= delta { r * r / 2.0 } else { delta * (r.abs() - delta / 2.0) };
            }
            Some(total / n)
        }
    }
}

fn metric_formulas() -> Outcome {
    let mut stream = rng::stream(1010);
    let mut worst = 0.0f64;
    let mut nql_exact = true;
    for _ in 0..100 {
        let len = stream.random_range(1..40);
        let y: Vec<f64> = (0..len)
            .map(|_| if stream.random_bool(0.2) { 0.0 } else { stream.random_range(0.0..50.0f64).round() })
            .collect();
        let yhat: Vec<f64> = (0..len).map(|_| stream.random_range(-5.0..60.0)).collect();
        let delta = stream.random_range(0.1..10.0);
        let rho = stream.random_range(0.01..0.99);
        for m in [Metric::Mse, Metric::Rmse, Metric::Mae, Metric::Wape, Metric::Mape, Metric::Huber(delta), Metric::Nql(rho)] {
            match (evaluate(m, &y, &yhat), metric_oracle(m, &y, &yhat)) {
                (Ok(v), Some(o)) => worst = worst.max((v.value - o).abs() / o.abs().max(1.0)),
                (Err(_), None) => {}
                _ => return outcome(false, format!("{m} disagrees with the oracle on definedness")),
            }
        }
        if let (Ok(a), Ok(b)) = (evaluate(Metric::Nql(0.5), &y, &yhat), evaluate(Metric::Wape, &y, &yhat)) {
            nql_exact &= a.value == b.value;
        }
    }
    let mut jump = 0.0f64;
    for delta in [1e-3, 0.1, 0.5, 1.0, 2.0, 3.7f64] {
        for r in [delta, -delta] {
            let quadratic = 0.5 * r * r;
            let linear = delta * r.abs() - 0.5 * delta * delta;
            jump = jump.max((quadratic - linear).abs());
            jump = jump.max((huber(r, delta) - huber(r * (1.0 + f64::EPSILON), delta)).abs() - 2.0 * delta * delta * f64::EPSILON);
        }
    }
    outcome(
        worst <= 1e-12 && nql_exact && jump <= 1e-14,
        format!("max relative deviation {worst:.2e}; nql(0.5) == wape: {nql_exact}; huber jump at delta {jump:.2e}"),
    )
}

fn poisson_log_pmf(k: f64, mu: f64) -> f64 {
    k * mu.ln() - mu - (1..=k as u64).map(|i| (i as f64).ln()).sum::<f64>()
}

fn poisson_kl_oracle(mu1: f64, mu2: f64) -> f64 {
    let mut total = 0.0;
    let upper = (mu1 + 20.0 * mu1.sqrt() + 40.0) as u64;
    for k in 0..=upper {
        let a = poisson_log_pmf(k as f64, mu1);
        total += a.exp() * (a - poisson_log_pmf(k as f64, mu2));
    }
    total
}

/// `∫_{m1}^∞ f1 ln(f1/f2)` by Simpson's rule in `u = ln(y/m1)`.
fn pareto_kl_oracle(m1: f64, m2: f64, b: f64) -> f64 {
    let log_density = |y: f64, m: f64| b.ln() + b * m.ln() - (b + 1.0) * y.ln();
    let integrand = |u: f64| {
        let y = m1 * u.exp();
        let a = log_density(y, m1);
        a.exp() * (a - log_density(y, m2)) * y
    };
    let (upper, steps) = (60.0 / b, 200_000);
    let h = upper / steps as f64;
    let mut total = integrand(0.0) + integrand(upper);
    for i in 1..steps {
        total += integrand(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    total * h / 3.0
}

/// Sample mean and variance within four standard errors of the targets.
fn moments_ok<D: Distribution>(dist: &D, mean: f64, var: f64, seed: u64) -> (bool, String) {
    const DRAWS: usize = 100_000;
    let mut stream = rng::stream(seed);
    let xs: Vec<f64> = (0..DRAWS).map(|_| dist.sample(&mut stream)).collect();
    let n = DRAWS as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let mean_z = (m - mean) / (var / n).sqrt();
    let var_z = (v - var) / ((m4 - v * v) / n).sqrt();
    (mean_z.abs() <= 4.0 && var_z.abs() <= 4.0, format!("z = ({mean_z:.2}, {var_z:.2})"))
}

fn distribution_oracles() -> Outcome {
    let mut stream = rng::stream(1111);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (a, b) = (stream.random_range(0.1..30.0), stream.random_range(0.1..30.0));
        worst = worst.max((kl_poisson(a, b).unwrap() - poisson_kl_oracle(a, b)).abs());
        let (m2, tail) = (stream.random_range(0.1..5.0), stream.random_range(1.5..6.0));
        let m1 = m2 * stream.random_range(1.0..4.0);
        worst = worst.max((kl_pareto(m1, m2, tail).unwrap() - pareto_kl_oracle(m1, m2, tail)).abs());
    }
    let mut samplers = Vec::new();
    let mut all = worst <= 1e-6;
    for (i, mu) in [0.3, 4.0, 75.0].into_iter().enumerate() {
        let (ok, z) = moments_ok(&PoissonDist::new(mu).unwrap(), mu, mu, 20 + i as u64);
        all &= ok;
        samplers.push(format!("poisson({mu}) {z}"));
    }
    for (i, (r, p)) in [(2.0, 0.5), (0.7, 0.2), (10.0, 0.8)].into_iter().enumerate() {
        let mean = r * (1.0 - p) / p;
        let (ok, z) = moments_ok(&NegBinomialDist::new(r, p).unwrap(), mean, mean / p, 30 + i as u64);
        all &= ok;
        samplers.push(format!("nb({r},{p}) {z}"));
    }
    for (i, (m, b)) in [(1.0, 5.0f64), (2.5, 6.0)].into_iter().enumerate() {
        let mean = b * m / (b - 1.0);
        let var = m * m * b / ((b - 1.0).powi(2) * (b - 2.0));
        let (ok, z) = moments_ok(&ParetoDist::new(m, b).unwrap(), mean, var, 40 + i as u64);
        all &= ok;
        samplers.push(format!("pareto({m},{b}) {z}"));
    }
    outcome(all, format!("max KL deviation {worst:.2e}; {}", samplers.join(", ")))
}

const DETERMINISM_CONFIG: &str = "\
design.kind = heavy_norm
design.n = 300, 600
design.gamma = 0.1
design.w = 100
design.r_cap = 1000
model.theta_star = 1, 1, 1, 1
estimators = ls, tmo-huber:2, poisson-mle, mom
trials = 20
seed = 1212
";

fn simulate_output(dir: &Path, name: &str, parallel: bool) -> Option<(Vec<u8>, Vec<u8>, Vec<u8>)> {
    let out = dir.join(format!("{name}.csv"));
    let cfg = dir.join(format!("{name}.cfg"));
    let text = format!("{DETERMINISM_CONFIG}parallel = {parallel}\noutput.path = {}\n", out.display());
    fs::write(&cfg, text).ok()?;
    let run = Command::new(env!("CARGO_BIN_EXE_mlelab")).arg("simulate").arg("--config").arg(&cfg).output().ok()?;
    if !run.status.success() {
        return None;
    }
    Some((run.stdout, fs::read(&out).ok()?, fs::read(out.with_extension("md")).ok()?))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let first = simulate_output(dir.path(), "first", true);
    let second = simulate_output(dir.path(), "second", true);
    let sequential = simulate_output(dir.path(), "sequential", false);
    let Some(first) = first else {
        return outcome(false, "simulate failed".into());
    };
    let repeat = second.as_ref() == Some(&first);
    let order_free = sequential.as_ref() == Some(&first);
    outcome(
        repeat && order_free,
        format!("repeat identical: {repeat}; parallel == sequential: {order_free}; {} CSV bytes", first.1.len()),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "1-D Poisson MLE matches the clamped closed form", poisson_closed_form),
    (2, "bound ratio obeys Cauchy-Schwarz", cauchy_schwarz_ratio),
    (3, "skewed-design ratio grows with n", skewed_separation),
    (4, "Poisson MLE risk <= least squares on heavy-norm design", poisson_risk),
    (5, "Pareto MLE tail risk < least squares", pareto_tail_risk),
    (6, "median-of-means rate and outlier robustness", median_of_means_scaling),
    (7, "ZNBP gradient matches finite differences", znbp_gradient),
    (8, "ZNBP recovers NB and zero-atom data", znbp_recovery),
    (9, "one ZNBP model matches per-metric TMO", post_hoc_inference),
    (10, "metrics match brute-force oracles", metric_formulas),
    (11, "KL and sampler oracles", distribution_oracles),
    (12, "simulate is deterministic", determinism),
];

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for &(id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| outcome(false, "panicked".into()));
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {} ({:.1?})", result.detail, start.elapsed());
        if !result.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: criteria {failed:?} failed");
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}
