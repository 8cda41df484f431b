//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every line is printed; exits non-zero when any criterion fails.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2};
use std::sync::Arc;
use std::time::Instant;

use meanvalue::calculus::{integrate, laplacian, normal_derivative, Tolerance};
use meanvalue::constants::{epsilon_ab, mu_ab, quantization_dichotomy, BoundParams, Branch, ConstantLedger};
use meanvalue::grid::{make_ball_domain, make_half_ball_domain, Domain, MetricSpec, ScalarField};
use meanvalue::heinz::{check_comparison, comparison_function_boundary, comparison_function_interior, heinz_scan, DEFAULT_RHO_RESOLUTION};
use meanvalue::io::strip_timestamp;
use meanvalue::quantization::{concentration_energy, detect_concentration, DetectorOptions};
use meanvalue::synth::{boundary_family, bubble_unit_mass, gen, gen_sequence, interior_family, seeded_bubble_centers, GeneratorSpec};
use meanvalue::verify::{fit_nonlinearity, LimitCheck, monotonicity_suite, verify_boundary_mvi, verify_interior_mvi, verify_morrey, Verdict};
use rand::{RngExt, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn disk(h: f64) -> Arc<Domain> {
    Arc::new(make_ball_domain(&[0.0, 0.0], 1.0, h, 2, MetricSpec::identity()).unwrap())
}

fn half(y0: f64, h: f64) -> Arc<Domain> {
    Arc::new(make_half_ball_domain(&[y0, 0.0], 1.0, h, 2).unwrap())
}

fn fields(specs: &[GeneratorSpec], d: &Arc<Domain>) -> Vec<ScalarField> {
    specs.iter().map(|s| gen(s, d).unwrap().field).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn quadrature_oracle() -> Outcome {
    // y₀ = r, so D_r(y) is a full disk; ∫|x−y|² = 2π r⁴/4 = π/2
    let h = 1.0 / 128.0;
    let d = Arc::new(make_half_ball_domain(&[1.0, 0.0], 1.0, h, 2).unwrap());
    let e = ScalarField::density(&d, |x| (x[0] - 1.0).powi(2) + x[1] * x[1]).unwrap();
    let got = integrate(&e, None).unwrap();
    let rel = (got - FRAC_PI_2).abs() / FRAC_PI_2;
    check(rel < 0.005, format!("∫ = {got:.6}, π/2 = {FRAC_PI_2:.6}, rel err {rel:.2e} (< 5e-3)"))
}

fn operator_convergence() -> Outcome {
    let mut errs = Vec::new();
    for k in [32.0, 64.0, 128.0] {
        let d = disk(1.0 / k);
        let e = ScalarField::from_fn(&d, false, |x| x[0].cos() * x[1].cosh()).unwrap();
        errs.push(laplacian(&e).iter().map(|(_, v)| v.abs()).fold(0.0, f64::max));
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let d = Arc::new(make_half_ball_domain(&vec![0.0; n], 1.0, 1.0 / 16.0, n).unwrap());
        let q = ScalarField::from_fn(&d, false, |x| 0.5 - 1.5 * x[0] + 2.0 * x[0] * x[0] - x[0] * x[1] + x[1] * x[1]).unwrap();
        // ∂ν q = −∂₀q at x₀ = 0: 1.5 + x₁
        for (node, v) in normal_derivative(&q).unwrap().values {
            worst = worst.max((v - (1.5 + d.coords(node)[1])).abs());
        }
    }
    let ok = orders.iter().all(|o| (o - 2.0).abs() <= 0.2) && worst < 1e-12;
    check(ok, format!("orders {orders:.3?} (2 ± 0.2), ∂ν residual on quadratics {worst:.1e} (< 1e-12)"))
}

fn constant_ledger() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut residual = 0.0f64;
    let mut mu_exact = true;
    let mut monotone = true;
    for k in 0..1000 {
        let a: f64 = rng.random_range(0.0..20.0);
        let b: f64 = if k % 5 == 0 { 0.0 } else { rng.random_range(0.0..20.0) };
        let c: f64 = rng.random_range(0.05..5.0);
        let n = 2 + k % 3;
        if a + b == 0.0 {
            continue;
        }
        let eps = epsilon_ab(a, b, c).unwrap();
        residual = residual.max((a * eps * eps + b * eps - 0.5 / c).abs());
        let mu = mu_ab(a, b, c, n).unwrap();
        mu_exact &= mu == eps.powi(n as i32) / (2.0 * c);
        let bump = 1.0 + 1e-3;
        for (a2, b2, c2) in [(a * bump + 1e-3, b, c), (a, b * bump + 1e-3, c), (a, b, c * bump)] {
            monotone &= epsilon_ab(a2, b2, c2).unwrap() < eps;
            monotone &= mu_ab(a2, b2, c2, n).unwrap() < mu;
        }
    }
    check(
        residual < 1e-12 && mu_exact && monotone,
        format!("max residual {residual:.1e} (< 1e-12), μ = εⁿ/(2C) bitwise: {mu_exact}, ε and μ decreasing in a, b, C: {monotone}"),
    )
}

fn morrey_suite() -> Outcome {
    let tol = Tolerance::new(10.0);
    let h = 1.0 / 64.0;
    let mut lines = Vec::new();
    let mut ok = true;
    for (d, specs, expected) in [
        (disk(h), interior_family as fn(&Domain) -> Vec<GeneratorSpec>, FRAC_1_PI),
        (half(0.0, h), boundary_family, 2.0 * FRAC_1_PI),
    ] {
        let one = ScalarField::density(&d, |_| 1.0).unwrap();
        let c = verify_morrey(&one, 1.0, tol).unwrap().required_constant();
        let rel = (c - expected).abs() / expected;
        let fam = fields(&specs(&d), &d);
        let worst = fam
            .iter()
            .map(|e| verify_morrey(e, c, tol).unwrap().required_constant() - c)
            .fold(f64::NEG_INFINITY, f64::max);
        ok &= rel < 0.01 && worst <= 10.0 * h;
        lines.push(format!("{} members: C = {c:.5} (rel {rel:.1e}), max excess {worst:.1e}", fam.len()));
    }
    check(ok, lines.join("; ") + " (≤ 10h)")
}

// members vanishing at the center are judged on the absolute scale instead
fn relative(l: &LimitCheck) -> f64 {
    if l.expected.abs() > 1e-9 {
        l.relative_error
    } else {
        0.0
    }
}

fn monotonicity_criterion() -> Outcome {
    let h = 1.0 / 128.0;
    let tol = Tolerance::new(10.0);
    let radii = |top: f64| -> Vec<f64> { (0..).map(|k| (16.0 + 4.0 * k as f64) * h).take_while(|&r| r <= top).collect() };
    let mut ok = true;
    let mut worst_limit = 0.0f64;

    let d = half(0.0, h);
    let rs = radii(0.9);
    let mut worst_step = f64::INFINITY;
    for e in fields(&boundary_family(&d), &d) {
        let rep = monotonicity_suite(&e, &[0.0, 0.0], &rs, tol).unwrap();
        ok &= rep.monotone && rep.limit.as_ref().is_some_and(|l| l.passed);
        worst_step = worst_step.min(rep.worst_step);
        worst_limit = worst_limit.max(rep.limit.map_or(f64::INFINITY, |l| relative(&l)));
    }
    let d = disk(h);
    for e in fields(&interior_family(&d), &d) {
        let rep = monotonicity_suite(&e, &[0.0, 0.0], &rs, tol).unwrap();
        let l = rep.limit.expect("interior limit");
        ok &= l.passed;
        worst_limit = worst_limit.max(relative(&l));
    }

    let mut crossings = 0;
    for k in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let d = half(k * h, h);
        let y = [k * h, 0.0];
        for e in fields(&boundary_family(&d), &d) {
            let rep = monotonicity_suite(&e, &y, &radii(0.9 - k * h), tol).unwrap();
            ok &= !rep.large_r.is_empty() && rep.large_r.iter().all(|c| c.passed);
            crossings += rep.large_r.len();
        }
    }
    check(
        ok,
        format!("worst step {worst_step:.1e} (≥ −10h), worst limit error {:.3}% (< 2%), {crossings} large-r checks", 100.0 * worst_limit),
    )
}

fn heinz_invariants() -> Outcome {
    let h = 1.0 / 64.0;
    let mut scans = 0;
    let mut comparisons = 0;
    let mut failures = Vec::new();

    let d = disk(h);
    let mut specs = interior_family(&d);
    specs.push(GeneratorSpec::Bubble { center: vec![0.3, 0.1], lambda: 0.2, amplitude: 1.0 });
    specs.push(GeneratorSpec::Bubble { center: vec![0.0, 0.0], lambda: 0.1, amplitude: 1.0 });
    specs.push(GeneratorSpec::Quadratic { center: vec![0.1, 0.0], amplitude: -1.0, offset: 2.0 });
    for (i, e) in fields(&specs, &d).iter().enumerate() {
        let rep = heinz_scan(e, &[0.0, 0.0], 1.0, DEFAULT_RHO_RESOLUTION).unwrap();
        scans += 1;
        if !rep.passed() {
            failures.push(format!("interior scan {i}"));
        }
        let a = fit_nonlinearity(e, 0.0, 0.0).unwrap();
        let p = BoundParams { a, ..BoundParams::zero(2) };
        let v = comparison_function_interior(e, &rep.x_bar, &p, rep.c_bar).unwrap();
        let chk = check_comparison(&v, Some((&rep.x_bar, rep.eps * (1.0 - rep.rho_bar))), 10.0 * h).unwrap();
        comparisons += 1;
        if !chk.passed {
            failures.push(format!("interior comparison {i}: {chk:?}"));
        }
    }

    for y0 in [0.0, 0.25] {
        let d = half(y0, h);
        let y = [y0, 0.0];
        let mut specs = boundary_family(&d);
        specs.push(GeneratorSpec::Quadratic { center: vec![0.2, 0.0], amplitude: -1.0, offset: 2.0 });
        specs.push(GeneratorSpec::LinearX0 { slope: -0.5, offset: 1.0 });
        specs.push(GeneratorSpec::ReflectedBubble { center: vec![0.0, 0.1], lambda: 0.2, amplitude: 1.0 });
        for (i, e) in fields(&specs, &d).iter().enumerate() {
            let rep = heinz_scan(e, &y, 1.0, DEFAULT_RHO_RESOLUTION).unwrap();
            scans += 1;
            if !rep.passed() {
                failures.push(format!("half-ball scan {i}"));
            }
            // A and B are the measured bounds on Δe and ∂e/∂ν
            let a = laplacian(e).max().map_or(0.0, |m| m.1.max(0.0));
            let b = normal_derivative(e).unwrap().max().map_or(0.0, |m| m.1.max(0.0));
            let v = comparison_function_boundary(e, &y, a, b).unwrap();
            let chk = check_comparison(&v, None, 10.0 * h).unwrap();
            comparisons += 1;
            if !chk.passed {
                failures.push(format!("boundary comparison {i} (y₀ = {y0}): {chk:?}"));
            }
        }
    }
    check(failures.is_empty(), format!("{scans} scans, {comparisons} comparison functions; failures: {failures:?}"))
}

fn dichotomy_behavior() -> Outcome {
    let h = 1.0 / 1024.0;
    let d = Arc::new(make_ball_domain(&[0.0, 0.0], 0.75, h, 2, MetricSpec::identity()).unwrap());
    let schedule: Vec<f64> = (0..7).map(|i| 0.25 * 0.5f64.powi(i)).collect();
    let bubble = GeneratorSpec::Bubble { center: vec![0.0, 0.0], lambda: 1.0, amplitude: 1.0 };
    let seq = gen_sequence(&[bubble], &schedule, &GeneratorSpec::Constant { value: 0.0 }, &d).unwrap();
    let c = FRAC_1_PI;
    let (a, b) = (seq.params.a, seq.params.b);
    let hbar = mu_ab(a, b, c, 2).unwrap();
    // A₀ large enough that the first scales sit on the bounded side
    let params = BoundParams { a0: 5000.0, a, b, ..BoundParams::zero(2) };
    let mut branches = Vec::new();
    let mut short = Vec::new();
    for (i, (e, &lambda)) in seq.fields.iter().zip(&schedule).enumerate() {
        let big_r = 1.0 / lambda;
        let dich = quantization_dichotomy(big_r, &params, hbar, c).unwrap();
        branches.push(dich.branch);
        if dich.branch == Branch::ConcentrationForced {
            let z = d.point(e.argmax().unwrap().0);
            let energy = concentration_energy(e, &z, big_r.powf(-0.5)).unwrap();
            if energy.is_nan() || energy <= hbar {
                short.push((i, energy));
            }
        }
    }
    let flip = branches.iter().position(|b| *b == Branch::ConcentrationForced);
    let monotone = flip.is_some_and(|f| f > 0 && branches[f..].iter().all(|b| *b == Branch::ConcentrationForced));
    check(
        monotone && short.is_empty(),
        format!("a_fit = {a:.4}, ħ = {hbar:.4}, first forced index {flip:?}, monotone {monotone}, forced indices below ħ: {short:?}"),
    )
}

fn detector_end_to_end() -> Outcome {
    let h = 1.0 / 256.0;
    let d = disk(h);
    let centers = [[0.5, 0.0], [-0.25, 0.4375], [-0.25, -0.4375]];
    let bubble = |c: &[f64]| GeneratorSpec::Bubble { center: c.to_vec(), lambda: 1.0, amplitude: 1.0 };
    let templates: Vec<_> = centers.iter().map(|c| bubble(c)).collect();
    let zero = GeneratorSpec::Constant { value: 0.0 };
    let seq = gen_sequence(&templates, &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], &zero, &d).unwrap();
    let m = bubble_unit_mass(2);
    let opts = DetectorOptions::default();

    // ħ = m/2 at C = 1
    let ledger = ConstantLedger::configured(2, 1.0 / (2.0 * m), 0.0, 1.0).unwrap();
    let hbar = ledger.hbar().unwrap();
    let bracket = hbar < m && m < seq.energy_bound / 3.0 + 10.0 * h;
    let rep = detect_concentration(&seq, &ledger, 100.0, &opts).unwrap();
    let located = centers
        .iter()
        .all(|c| rep.points.iter().any(|p| ((p.point[0] - c[0]).powi(2) + (p.point[1] - c[1]).powi(2)).sqrt() <= 2.0 * h));
    let three = rep.count() == 3 && located && bracket;

    let raised = ConstantLedger::configured(2, 1.0 / 512.0, 0.0, 1.0).unwrap();
    let rep = detect_concentration(&seq, &raised, 100.0, &opts).unwrap();
    let none = raised.hbar().unwrap() > m && rep.count() == 0 && rep.uniformly_bounded();

    // ring and scales keep the seeded centers farther apart than 2δ_excl
    let coarse = disk(h);
    let runs: Vec<_> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let templates: Vec<_> = seeded_bubble_centers(seed, 5, 0.7, &coarse).iter().map(|c| bubble(c)).collect();
            let seq = gen_sequence(&templates, &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], &zero, &coarse).unwrap();
            let ledger = ConstantLedger::configured(2, seq.params.a, seq.params.b, FRAC_1_PI).unwrap();
            detect_concentration(&seq, &ledger, 100.0, &opts)
                .map(|rep| (rep.count(), (seq.energy_bound / rep.hbar).floor() as usize))
                .map_err(|e| format!("seed {seed}: {e}"))
        })
        .collect();
    let errors: Vec<_> = runs.iter().filter_map(|r| r.as_ref().err()).collect();
    let ok_runs: Vec<_> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let bounded = ok_runs.iter().all(|(n, cap)| n <= cap);
    let worst = ok_runs.iter().max_by_key(|r| r.0).map_or((0, 0), |r| **r);
    check(
        three && none && bounded && errors.is_empty(),
        format!(
            "three planted: {three}, raised ħ gives N = 0 and bounded: {none}, 50 seeded runs within ⌊E/ħ⌋: {bounded} (largest N {} of cap {}), errors {errors:?}",
            worst.0, worst.1
        ),
    )
}

fn specialization() -> Outcome {
    let tol = Tolerance::new(10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut agree = true;
    let mut count = 0;
    for boundary in [false, true] {
        let d = if boundary { half(0.0, 1.0 / 32.0) } else { disk(1.0 / 32.0) };
        let mut specs = if boundary { boundary_family(&d) } else { interior_family(&d) };
        while specs.len() < 20 {
            let off: f64 = rng.random_range(-0.5..0.5);
            specs.push(GeneratorSpec::Quadratic {
                center: vec![if boundary { 0.0 } else { off }, rng.random_range(-0.5..0.5)],
                amplitude: rng.random_range(0.1..3.0),
                offset: rng.random_range(0.0..2.0),
            });
        }
        let c = if boundary { 2.0 * FRAC_1_PI } else { FRAC_1_PI };
        let ledger = ConstantLedger::configured(2, 0.0, 0.0, c).unwrap();
        let zero = BoundParams::zero(2);
        for e in fields(&specs, &d) {
            let m = verify_morrey(&e, c, tol).unwrap();
            let s = if boundary {
                verify_boundary_mvi(&e, &zero, &ledger, tol).unwrap()
            } else {
                verify_interior_mvi(&e, &zero, &ledger, tol).unwrap()
            };
            agree &= m.verdict == s.verdict && m.verdict != Verdict::HypothesisViolated;
            worst = worst.max((m.margin - s.margin).abs());
            count += 1;
        }
    }
    check(agree && worst <= 1e-12, format!("{count} instances, verdicts agree {agree}, max margin gap {worst:.1e} (≤ 1e-12)"))
}

fn run_suite(dir: &std::path::Path) {
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        "seed = 11\n[detect]\ndivergence_threshold = 50.0\n[detect.planted]\nschedule = [0.25, 0.125]\nseeded = { count = 3, ring = 0.5 }\n",
    )
    .unwrap();
    for cmd in ["verify-morrey", "verify-interior", "verify-boundary", "monotonicity", "heinz-scan", "estimate-c", "detect-bubbles"] {
        let args = ["meanvalue", cmd, "--config", config.to_str().unwrap(), "--spacing", "0.03125", "--out", dir.to_str().unwrap()];
        meanvalue::cli::main_with_args(args);
    }
    meanvalue::cli::main_with_args(["meanvalue", "constants", "--a", "2", "--b", "1", "--c-constant", "1", "--out", dir.to_str().unwrap()]);
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_suite(a.path());
    run_suite(b.path());
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let mut differing = Vec::new();
    let mut reports = 0;
    for name in &names {
        let x = std::fs::read_to_string(a.path().join(name)).unwrap();
        let y = std::fs::read_to_string(b.path().join(name)).unwrap_or_default();
        let same = if name.to_string_lossy().ends_with(".report") {
            reports += 1;
            strip_timestamp(&x) == strip_timestamp(&y)
        } else {
            x == y
        };
        if !same {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    check(
        reports >= 8 && differing.is_empty(),
        format!("{} files ({reports} reports) compared, differing: {differing:?}", names.len()),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("quadrature oracle", quadrature_oracle),
        ("operator convergence", operator_convergence),
        ("constant ledger", constant_ledger),
        ("Morrey suite", morrey_suite),
        ("monotonicity suite", monotonicity_criterion),
        ("Heinz invariants", heinz_invariants),
        ("dichotomy behavior", dichotomy_behavior),
        ("detector end-to-end", detector_end_to_end),
        ("specialization consistency", specialization),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name} [{secs:.1}s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.1}s]: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
