//! Acceptance gate: ten numbered criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line reaches the terminal; the
//! process exits nonzero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fejer::algorithms::{Algorithm, RunTrace, Thinning};
use fejer::cli::{bound_rows, certify_trace, execute, slope, write_trace_csv, RunConfig, SlopeFit, Theorem, TraceFile};
use fejer::fejer::{Verdict, DEFAULT_TOL_REL};
use fejer::numerics::{dist_sq, inner, norm_sq, Point};
use fejer::oracles::{
    eps_subgradient_at_shifted_point, BallIndicator, BoxIndicator, ConvexFunction, HingeSum, L1Norm, Linear, Quadratic,
    SquaredNorm,
};
use fejer::problems::{self, Problem};
use fejer::rates::{bound_thm22_curve, bound_thm24, c_theta, lemma25_bound, lemma25_brute, PolySchedule};
use nalgebra::{DMatrix, DVector};

type Outcome = Result<String, String>;

const T_RUN: usize = 10_000;

fn cfg(problem: &str, algo: Algorithm, alpha: f64, eps: f64, radius: f64) -> RunConfig {
    RunConfig {
        problem: problem.to_string(),
        algo,
        alpha,
        theta: 0.5,
        eps,
        radius,
        t_count: T_RUN,
        seed: 7,
        thinning: Thinning::Auto,
    }
}

/// The designated run for each method whose certificate and envelope are checked.
fn designated() -> Vec<(RunConfig, Theorem)> {
    vec![
        (
            cfg("lasso_small", Algorithm::ForwardBackward, 0.5, 1.0, 0.3),
            Theorem::Thm32,
        ),
        (
            cfg("lasso_small", Algorithm::SmoothForwardBackward, 0.1, 0.0, 0.0),
            Theorem::Prop33,
        ),
        (
            cfg("hinge_sum_m3", Algorithm::Incremental, 0.1, 0.0, 0.0),
            Theorem::Thm37,
        ),
        (
            cfg("hinge_sum_m10", Algorithm::Incremental, 0.1, 0.0, 0.0),
            Theorem::Thm37,
        ),
        (
            cfg("lasso_small", Algorithm::DouglasRachford, 0.1, 0.0, 0.0),
            Theorem::Thm310,
        ),
    ]
}

struct Run {
    config: RunConfig,
    theorem: Theorem,
    file: TraceFile,
    csv: Vec<u8>,
}

fn run(problem: &Problem, config: &RunConfig) -> Result<(TraceFile, Vec<u8>), String> {
    let trace = execute(problem, config).map_err(|e| format!("{} {}: {e}", config.problem, config.algo))?;
    let file = TraceFile::new(problem, Some(config.clone()), trace);
    let mut csv = Vec::new();
    write_trace_csv(&file, &mut csv).map_err(|e| e.to_string())?;
    Ok((file, csv))
}

fn label(c: &RunConfig) -> String {
    format!("{}/{}", c.algo, c.problem)
}

fn lemma_dominance() -> Outcome {
    let qs = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for &q in &qs {
        for t in 3..=2000 {
            let exact = lemma25_brute(q, t);
            let bound = lemma25_bound(q, t);
            if exact > bound {
                return Err(format!("q = {q}, T = {t}: sum {exact} > bound {bound}"));
            }
            worst = worst.min(bound - exact);
            checked += 1;
        }
    }
    Ok(format!("{checked} (q, T) pairs, smallest margin {worst:.3e}"))
}

fn c_theta_spots() -> Outcome {
    let (c0, c1, c2) = (c_theta(0.0), c_theta(1.0), c_theta(2.0));
    let want0 = 5.0 + 2.0 / (1.0 - 0.0);
    let want2 = (2f64.powi(2) + 3.0 * 2.0 - 1.0) / (2.0 - 1.0);
    if c1 != 9.0 {
        return Err(format!("c(1) = {c1}"));
    }
    if (c0 - want0).abs() > 1e-15 || (c0 - 7.0).abs() > 1e-15 {
        return Err(format!("c(0) = {c0}"));
    }
    if (c2 - want2).abs() > 1e-15 || (c2 - 9.0).abs() > 1e-15 {
        return Err(format!("c(2) = {c2}"));
    }
    Ok(format!("c(0) = {c0}, c(1) = {c1}, c(2) = {c2}"))
}

fn polynomial_vs_explicit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e24);
    let cases: Vec<(PolySchedule, f64)> = (0..50)
        .map(|_| {
            let s = PolySchedule::new(
                rng.random_range(0.05..10.0),
                rng.random_range(0.0..=0.9),
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..=3.0),
            )
            .expect("valid schedule");
            (s, rng.random_range(0.0..10.0))
        })
        .collect();
    let results: Vec<Result<f64, String>> = cases
        .par_iter()
        .map(|(s, d_sq)| {
            let (eta, xi) = s.sequences(T_RUN);
            let curve = bound_thm22_curve(*d_sq, &eta, &xi).map_err(|e| e.to_string())?;
            let mut min_ratio = f64::INFINITY;
            for t in 3..=T_RUN {
                let b22 = curve[t - 2];
                let b24 = bound_thm24(*d_sq, s, t).map_err(|e| e.to_string())?;
                if b24 < b22 {
                    return Err(format!("{s:?}, d² = {d_sq}, T = {t}: {b24} < {b22}"));
                }
                if b22 > 0.0 {
                    min_ratio = min_ratio.min(b24 / b22);
                }
            }
            Ok(min_ratio)
        })
        .collect();
    let mut min_ratio = f64::INFINITY;
    for r in results {
        min_ratio = min_ratio.min(r?);
    }
    Ok(format!(
        "50 schedules × T ∈ [3, 10⁴], smallest polynomial/explicit ratio {min_ratio:.4}"
    ))
}

fn certificates(runs: &[Run]) -> Outcome {
    let mut lines = Vec::new();
    for r in runs {
        let cert = certify_trace(&r.file, None, DEFAULT_TOL_REL).map_err(|e| format!("{}: {e}", label(&r.config)))?;
        if cert.verdict != Verdict::Pass || cert.min_rel_slack < -1e-9 {
            return Err(format!(
                "{}: {:?} with min relative slack {:e} at {:?}",
                label(&r.config),
                cert.verdict,
                cert.min_rel_slack,
                cert.argmin
            ));
        }
        lines.push(format!("{} {:.1e}", label(&r.config), cert.min_rel_slack));
    }
    Ok(format!("min relative slacks: {}", lines.join(", ")))
}

fn envelopes(runs: &[Run]) -> Outcome {
    let mut lines = Vec::new();
    for r in runs {
        let (rows, summary) = bound_rows(&r.file, r.theorem).map_err(|e| format!("{}: {e}", label(&r.config)))?;
        if let Some(t) = summary.first_violation_t {
            return Err(format!("{} exceeds {} at T = {t}", label(&r.config), r.theorem));
        }
        if rows.first().map(|row| row.t) > Some(4) || rows.last().map(|row| row.t) != Some(T_RUN) {
            return Err(format!("{}: rows do not cover [4, {T_RUN}]", label(&r.config)));
        }
        lines.push(format!(
            "{} vs {} max ratio {:.3}",
            label(&r.config),
            r.theorem,
            summary.max_ratio
        ));
    }
    Ok(lines.join(", "))
}

fn smooth_rate(runs: &[Run]) -> Outcome {
    let r = runs
        .iter()
        .find(|r| r.config.algo == Algorithm::SmoothForwardBackward && r.config.problem == "lasso_small")
        .ok_or("no smooth lasso_small run")?;
    let p = problems::problem("lasso_small").map_err(|e| e.to_string())?;
    let beta = p.beta_analytic.ok_or("lasso_small declares no beta")?;
    let scale = beta * p.d_sq() / 2.0;
    let gap = |t: usize| r.file.trace.f_value(t) - p.f_star;
    if gap(1000) > scale / 1000.0 {
        return Err(format!("gap(1000) = {:e} > {:e}", gap(1000), scale / 1000.0));
    }
    let mut worst: f64 = 0.0;
    for t in 10..=1000 {
        let tg = t as f64 * gap(t);
        if tg > scale {
            return Err(format!("T·gap(T) = {tg} > βd²/2 = {scale} at T = {t}"));
        }
        worst = worst.max(tg);
    }
    Ok(format!(
        "gap(1000) = {:.3e} ≤ {:.3e}; max T·gap(T) = {worst:.3e} ≤ βd²/2 = {scale:.3e}",
        gap(1000),
        scale / 1000.0
    ))
}

fn slope_check(runs: &[Run]) -> Outcome {
    let r = runs
        .iter()
        .find(|r| r.config.algo == Algorithm::ForwardBackward)
        .ok_or("no forward-backward run")?;
    let rep = slope(&r.file, 10.0).map_err(|e| e.to_string())?;
    let (SlopeFit::Slope { slope: last, .. }, SlopeFit::Slope { slope: best, .. }) =
        (rep.last_iterate, rep.best_iterate)
    else {
        return Err(format!("gap curve reported as converged: {rep:?}"));
    };
    if !(-0.75..=-0.35).contains(&last) {
        return Err(format!("last-iterate slope {last} outside [−0.75, −0.35]"));
    }
    if (last - best).abs() > 0.1 {
        return Err(format!("last {last} and best {best} differ by more than 0.1"));
    }
    Ok(format!(
        "T ∈ [{}, {}]: last-iterate slope {last:.4}, best-iterate slope {best:.4}",
        rep.t_from, rep.t_to
    ))
}

fn same_run(a: &RunTrace, b: &RunTrace) -> bool {
    a.iterates == b.iterates
        && a.f_values == b.f_values
        && a.alpha_values == b.alpha_values
        && a.eps_values == b.eps_values
        && a.l_norms == b.l_norms
        && a.r_norms == b.r_norms
        && a.dist_sq_to_ref == b.dist_sq_to_ref
        && a.stored_indices == b.stored_indices
}

fn reductions() -> Outcome {
    let mut checked = Vec::new();
    for id in ["lasso_small", "hinge_sum_m1", "quad_abs_1d", "box_l1"] {
        let p = problems::problem(id).map_err(|e| e.to_string())?;
        let (fb, fb_csv) = run(&p, &cfg(id, Algorithm::ForwardBackward, 0.1, 0.0, 0.0))?;
        let (inc, inc_csv) = run(&p, &cfg(id, Algorithm::Incremental, 0.1, 0.0, 0.0))?;
        if !same_run(&fb.trace, &inc.trace) || fb_csv != inc_csv {
            return Err(format!("incremental with m = 1 differs from forward-backward on {id}"));
        }
        checked.push(format!("inc≡fb on {id}"));
    }
    for id in ["box_l1", "ball_linear", "abs_box_1d"] {
        let p = problems::problem(id).map_err(|e| e.to_string())?;
        for (eps, radius) in [(0.0, 0.0), (0.5, 0.5)] {
            let (fb, fb_csv) = run(&p, &cfg(id, Algorithm::ForwardBackward, 0.1, eps, radius))?;
            let (ps, ps_csv) = run(&p, &cfg(id, Algorithm::ProjectedSubgradient, 0.1, eps, radius))?;
            if !same_run(&fb.trace, &ps.trace) || fb_csv != ps_csv {
                return Err(format!(
                    "projected subgradient differs from forward-backward on {id}, eps = {eps}"
                ));
            }
        }
        checked.push(format!("psg≡fb on {id}"));
    }
    Ok(checked.join(", "))
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Point {
    Point::new((0..dim).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

fn random_oracle(rng: &mut ChaCha8Rng, dim: usize, kind: usize) -> Arc<dyn ConvexFunction> {
    match kind {
        0 => Arc::new(L1Norm::centered(
            rng.random_range(0.1..3.0),
            random_point(rng, dim, 2.0),
        )),
        1 => {
            let rows = rng.random_range(1..=dim + 2);
            let a = DMatrix::from_fn(rows, dim, |_, _| rng.random_range(-2.0..2.0));
            let b = DVector::from_fn(rows, |_, _| rng.random_range(-2.0..2.0));
            Arc::new(Quadratic::new(a, b).unwrap())
        }
        2 => Arc::new(SquaredNorm {
            weight: rng.random_range(0.1..5.0),
            dim,
        }),
        3 => Arc::new(Linear {
            c: random_point(rng, dim, 2.0),
        }),
        4 => {
            let lo: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..0.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.0..3.0)).collect();
            Arc::new(BoxIndicator::new(lo, hi).unwrap())
        }
        5 => Arc::new(BallIndicator {
            center: random_point(rng, dim, 1.0),
            radius: rng.random_range(0.1..2.0),
        }),
        _ => {
            let n = rng.random_range(1..6);
            let rows = (0..n).map(|_| random_point(rng, dim, 2.0)).collect();
            let labels = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            Arc::new(HingeSum::new(rows, labels).unwrap())
        }
    }
}

const PROX_KINDS: usize = 6;

fn rel(slack: f64, scale: f64) -> f64 {
    slack / scale.abs().max(1.0)
}

fn oracle_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a1c);
    let cases = 1000;
    let (mut prox_opt, mut nonexp, mut idem, mut eps_sub) =
        (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for _ in 0..cases {
        let dim = rng.random_range(1..=6);
        let kind = rng.random_range(0..PROX_KINDS);
        let f = random_oracle(&mut rng, dim, kind);
        let lambda = rng.random_range(0.05..3.0);
        let x = random_point(&mut rng, dim, 4.0);
        let p = f.prox(lambda, &x).unwrap();
        let phi = |y: &Point| lambda * f.value(y).unwrap() + 0.5 * dist_sq(y, &x).unwrap();
        let phi_p = phi(&p);
        for k in 0..5 {
            let step = 10f64.powi(-(k as i32));
            let mut z = p.add(&random_point(&mut rng, dim, step)).unwrap();
            if !f.is_real_valued() {
                z = f.prox(1.0, &z).unwrap();
            }
            // strong convexity of the prox objective around its minimizer
            let s = phi(&z) - phi_p - 0.5 * dist_sq(&z, &p).unwrap();
            prox_opt = prox_opt.min(rel(s, phi_p.abs() + phi(&z).abs()));
        }
    }

    for _ in 0..cases {
        let dim = rng.random_range(1..=6);
        let kind = rng.random_range(0..PROX_KINDS);
        let f = random_oracle(&mut rng, dim, kind);
        let lambda = rng.random_range(0.05..3.0);
        let (x, y) = (random_point(&mut rng, dim, 4.0), random_point(&mut rng, dim, 4.0));
        let (px, py) = (f.prox(lambda, &x).unwrap(), f.prox(lambda, &y).unwrap());
        let d = x.sub(&y).unwrap();
        let pd = px.sub(&py).unwrap();
        // firm nonexpansiveness implies plain nonexpansiveness
        let s = inner(&pd, &d).unwrap() - norm_sq(&pd);
        nonexp = nonexp.min(rel(s, norm_sq(&d)));
        nonexp = nonexp.min(rel(norm_sq(&d) - norm_sq(&pd), norm_sq(&d)));
    }

    for _ in 0..cases {
        let dim = rng.random_range(1..=6);
        let kind = rng.random_range(4..PROX_KINDS);
        let f = random_oracle(&mut rng, dim, kind);
        let x = random_point(&mut rng, dim, 5.0);
        let p = f.prox(1.0, &x).unwrap();
        let pp = f.prox(rng.random_range(0.1..3.0), &p).unwrap();
        idem = idem.min(-dist_sq(&p, &pp).unwrap().sqrt());
        if !f.value(&p).unwrap().is_finite() {
            return Err(format!("projection of {x:?} left the set"));
        }
    }

    for _ in 0..cases {
        let dim = rng.random_range(1..=6);
        let kind = [0, 1, 2, 3, 6][rng.random_range(0..5)];
        let f = random_oracle(&mut rng, dim, kind);
        let x = random_point(&mut rng, dim, 3.0);
        let y = x.add(&random_point(&mut rng, dim, 1.0)).unwrap();
        let e = eps_subgradient_at_shifted_point(f.as_ref(), &x, &y).unwrap();
        let fx = f.value(&x).unwrap();
        for _ in 0..5 {
            let z = random_point(&mut rng, dim, 6.0);
            let s = f.value(&z).unwrap() - fx - inner(&e.g, &z.sub(&x).unwrap()).unwrap() + e.eps;
            eps_sub = eps_sub.min(rel(s, f.value(&z).unwrap().abs() + fx.abs()));
        }
    }

    let worst = prox_opt.min(nonexp).min(idem).min(eps_sub);
    let detail = format!(
        "{cases} cases each; min slacks: prox optimality {prox_opt:.2e}, nonexpansiveness {nonexp:.2e}, \
         idempotence {idem:.2e}, ε-subgradient {eps_sub:.2e}"
    );
    if worst < -1e-9 {
        return Err(detail);
    }
    Ok(detail)
}

fn determinism(runs: &[Run]) -> Outcome {
    let mut total = 0;
    for r in runs {
        let p = problems::problem(&r.config.problem).map_err(|e| e.to_string())?;
        let (_, csv) = run(&p, &r.config)?;
        if csv != r.csv {
            return Err(format!("{} CSV changed between identical runs", label(&r.config)));
        }
        total += csv.len();
    }
    Ok(format!("{} reruns byte-identical ({total} CSV bytes)", runs.len()))
}

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, n: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS [{n:>2}] {name}: {detail} ({elapsed:.2?})"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL [{n:>2}] {name}: {detail} ({elapsed:.2?})");
            }
        }
    }
}

fn main() {
    let mut gate = Gate { failures: 0 };
    let secs = Duration::from_secs;

    gate.check(1, "sum estimate dominance", Some(secs(1)), lemma_dominance);
    gate.check(2, "c_theta spot values", None, c_theta_spots);
    gate.check(
        3,
        "polynomial bound dominates explicit bound",
        Some(secs(10)),
        polynomial_vs_explicit,
    );

    let mut runs: Vec<Run> = Vec::new();
    gate.check(4, "Fejér certificates at T = 10⁴", Some(secs(60)), || {
        for (config, theorem) in designated() {
            let p = problems::problem(&config.problem).map_err(|e| e.to_string())?;
            let (file, csv) = run(&p, &config)?;
            runs.push(Run {
                config,
                theorem,
                file,
                csv,
            });
        }
        certificates(&runs)
    });
    gate.check(5, "rate envelopes for T ∈ [4, 10⁴]", None, || envelopes(&runs));
    gate.check(6, "smooth O(1/T) rate", None, || smooth_rate(&runs));
    gate.check(7, "last-iterate slope", Some(secs(30)), || slope_check(&runs));
    gate.check(8, "reduction equivalences", None, reductions);
    gate.check(9, "oracle properties", Some(secs(10)), oracle_properties);
    gate.check(10, "determinism", None, || determinism(&runs));

    if gate.failures > 0 {
        println!("acceptance: {} of 10 criteria failed", gate.failures);
        std::process::exit(1);
    }
    println!("acceptance: all 10 criteria passed");
}
