//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::{E, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use hammerstein_core::criteria::{bump_threshold, nonexistence, Nonlinearity};
use hammerstein_core::kernel::Kernel;
use hammerstein_core::measures::KernelFunctional;
use hammerstein_core::quadrature::Integrator;
use hammerstein_core::scenarios::{
    example1, example2, example2_boundary, example2_d_at_pi, example2_d_root, example2_scalars, example3,
};
use hammerstein_core::solver::{Discretization, Target};
use hammerstein_core::spectral::mu_ordering_check;
use hammerstein_core::{Analysis, ProblemSpec, Settings, ShiftSign, ShiftedKernel, Status, Verdict, Weight};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let q = Integrator::default();
    let k = ShiftedKernel::new(ShiftSign::Plus, 7.0 * PI / 12.0).unwrap();
    let c = k.c_of_interval(0.25, 0.75).unwrap();
    let big_m = k.m_ab_constant(0.25, 0.75, &Weight::One, &q).unwrap();
    let secs = start.elapsed().as_secs_f64();
    ensure(
        (c - 0.195).abs() < 1e-3 && (big_m - 7.029).abs() < 1e-3 && secs < 1.0,
        format!("c(1/4,3/4) = {c:.6} (want 0.195), M(1/4,3/4) = {big_m:.6} (want 7.029), {secs:.3} s"),
    )
}

fn criterion_2() -> Outcome {
    let q = Integrator::default();
    let k = ShiftedKernel::new(ShiftSign::Minus, 1.0).unwrap();
    let c = k.c_of_interval(0.0, 1.0).unwrap();
    let m = k.m_constant(&Weight::Linear, &q).unwrap();
    let big_m = k.m_ab_constant(0.0, 1.0, &Weight::Linear, &q).unwrap();
    let exact = [1.0 / 1f64.cosh(), (E + 1.0) / 2.0, (E + 1.0) / (E - 1.0)];
    let printed = [0.648, 1.859, 2.163];
    let got = [c, m, big_m];
    let ok = (0..3).all(|i| (got[i] - exact[i]).abs() < 1e-9 && (got[i] - printed[i]).abs() < 1e-3);
    ensure(ok, format!("c = {c:.12}, m = {m:.12}, M = {big_m:.12}"))
}

fn criterion_3() -> Outcome {
    let an = example1(1.0, 1.0).analyze().unwrap();
    let (c, big_m) = (an.cone_c(), an.big_m());
    let f0 = bump_threshold(c, big_m);
    ensure(
        (f0 - 10.289).abs() < 1e-3,
        format!("f̂₀ = {f0:.6} from c = {c:.6}, M = {big_m:.6} (want 10.289)"),
    )
}

fn criterion_4() -> Outcome {
    let d_pi = example2_d_at_pi().unwrap();
    let w0 = example2_d_root().unwrap();
    let q = Integrator::default();
    let mut worst = f64::INFINITY;
    for i in 0..10 {
        let omega = PI / 2.0 + (i as f64 + 0.5) * (PI / 2.0) / 10.0;
        let sc = example2_scalars(omega).unwrap();
        let bd = example2_boundary(omega).unwrap();
        let k: Arc<dyn Kernel<f64>> = Arc::new(ShiftedKernel::new(ShiftSign::Plus, omega).unwrap());
        let ka = KernelFunctional::new(&bd.alpha, k.clone(), &q).unwrap().grid_min().1;
        let kb = KernelFunctional::new(&bd.beta, k, &q).unwrap().grid_min().1;
        for v in [sc.alpha_gamma, sc.alpha_delta, sc.beta_gamma, sc.beta_delta, ka, kb] {
            worst = worst.min(v);
        }
    }
    let want = 1.0 - 1.0 / (4.0 * PI);
    ensure(
        (d_pi - want).abs() < 1e-9 && (w0 - 1.507).abs() < 1e-3 && worst >= 0.0,
        format!(
            "D(π) = {d_pi:.12} (err {:.1e}), ω₀ = {w0:.6}, smallest sampled functional/K value {worst:.3e}",
            (d_pi - want).abs()
        ),
    )
}

fn linear_setup(spec: ProblemSpec<f64>) -> Analysis<f64> {
    spec.with_f(Nonlinearity::zero()).analyze().unwrap()
}

fn criterion_5() -> Outcome {
    let mut problems = vec![
        ("example 1".to_string(), linear_setup(example1(1.0, 1.0))),
        ("example 2".to_string(), linear_setup(example2(2.4, 0.4, 0.6).unwrap())),
        ("example 3".to_string(), linear_setup(example3(0.25))),
    ];
    let mut rng = StdRng::seed_from_u64(5);
    for i in 0..25 {
        let tp = tuple_from(rng.gen(), rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let spec = ProblemSpec::new(tp.sign, tp.omega, tp.g(), Nonlinearity::zero(), tp.a, tp.b);
        problems.push((format!("random {i} {tp:?}"), spec.analyze().unwrap()));
    }
    let q = Integrator::default();
    let mut worst_gap: f64 = 0.0;
    for (name, an) in &problems {
        let (a, b) = an.interval();
        let o = mu_ordering_check(an.assembled(), an.g(), a, b, 200, &q).unwrap();
        let gap = o.gap_l.max(o.gap_ltilde);
        worst_gap = worst_gap.max(gap);
        if !o.holds || !(gap < 1e-4) {
            return Err(format!(
                "{name}: M_S = {}, μ(L̃) = {}, μ(L) = {}, m_S = {}, gap = {gap:.2e}",
                o.big_m_s, o.mu_ltilde, o.mu_l, o.m_s
            ));
        }
    }
    Ok(format!("{} problems ordered, largest refinement gap {worst_gap:.2e}", problems.len()))
}

fn criterion_6() -> Outcome {
    let q = Integrator::default();
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let tp = tuple_from(rng.gen(), rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let k = tp.kernel();
        let m = k.m_constant(&tp.g(), &q).unwrap();
        let big_m = k.m_ab_constant(tp.a, tp.b, &tp.g(), &q).unwrap();
        let e = rel_err(m, oracle_m(&tp)).max(rel_err(big_m, oracle_big_m(&tp)));
        worst = worst.max(e);
        if !(e < 1e-6) {
            return Err(format!("{tp:?}: relative error {e:.2e}"));
        }
    }
    Ok(format!("50 tuples, largest relative error {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let an = example3(0.25).analyze().unwrap();
    let d = Discretization::new(&an, 200).unwrap();
    let settings = Settings {
        damping: 1.0,
        ..Settings::default()
    };
    let sol = d.solve_fixed_point(Target::T, &vec![0.1; d.len()], &settings).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (lo, hi) = sol.band;
    let cc = sol.cone_check;
    ensure(
        sol.status == Status::Converged
            && sol.residual < 1e-8
            && lo >= 0.064
            && hi <= 0.16
            && cc.in_cone
            && (cc.c_used - 0.648).abs() < 1e-3
            && secs < 5.0,
        format!(
            "{:?} after {} iterations, residual {:.1e}, band [{lo:.4}, {hi:.4}], in cone with c = {:.4}: {}, {secs:.2} s",
            sol.status, sol.iterations, sol.residual, cc.c_used, cc.in_cone
        ),
    )
}

fn criterion_8() -> Outcome {
    let an = example3(0.9).analyze().unwrap();
    let certs = nonexistence(&an).unwrap();
    let d = Discretization::new(&an, 200).unwrap();
    let settings = Settings {
        starts: 20,
        ..Settings::default()
    };
    let ms = d.multi_start(Target::T, &settings).unwrap();
    let diverged = ms.runs.iter().filter(|r| r.status == Status::Diverged).count();
    ensure(
        certs[1].verdict == Verdict::Holds && ms.runs.len() == 20 && ms.nontrivial_cone_fixed_points == 0,
        format!(
            "certificate (2) {} ({}), {} runs, {diverged} diverged, {} nontrivial cone fixed points",
            certs[1].verdict,
            certs[1].certificate.map(|c| c.to_string()).unwrap_or_default(),
            ms.runs.len(),
            ms.nontrivial_cone_fixed_points
        ),
    )
}

fn run_suite<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(100)
    });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn criterion_9() -> Outcome {
    let unit = || 0.0..=1.0f64;
    run_suite("greens symmetry", (tuple_strategy(), unit(), unit()), |(tp, t, s)| kernel_symmetry(tp, t, s))?;
    run_suite("greens envelope", (tuple_strategy(), unit(), unit()), |(tp, t, s)| kernel_envelope(tp, t, s))?;
    run_suite("greens cone", (tuple_strategy(), unit(), unit()), |(tp, t, s)| kernel_cone(tp, t, s))?;
    run_suite("k_S partition", (any::<bool>(), 0.0..1.0f64, unit(), unit()), |(nl, u, t, s)| {
        pm_partition(&assembled(nl, u), t, s)
    })?;
    run_suite("k_S part integrals", (any::<bool>(), 0.0..1.0f64, unit(), any::<bool>()), |(nl, u, t, lin)| {
        let g = if lin { Weight::Linear } else { Weight::One };
        part_integrals(&assembled(nl, u), &g, t)
    })?;
    run_suite(
        "resolvent order",
        (prop::array::uniform4(0.0..0.45f64), prop::array::uniform2(0.0..10.0f64), prop::array::uniform2(0.0..10.0f64)),
        |(m, p, dp)| resolvent_order(m, p, dp),
    )?;
    run_suite(
        "N_mu comparison",
        (prop::array::uniform4(0.0..3.0f64), prop::array::uniform2(0.0..10.0f64), prop::array::uniform2(0.0..5.0f64)),
        |(m, p, x)| n_mu_comparison(m, p, x),
    )?;
    run_suite(
        "T maps cone",
        (0usize..3, 0.01..5.0f64, prop::collection::vec(-1.0..1.0f64, 1..6)),
        |(w, k, c)| t_maps_cone(w, k, &c),
    )?;
    run_suite("S/T agreement", (0.0..1.0f64, 0.0..1.0f64), |(a, b)| s_t_agreement(a, b))?;
    Ok("9 suites x 100 cases, zero failures".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Green's constants, bump problem", criterion_1),
        ("Green's constants, exponential problem", criterion_2),
        ("bump problem threshold", criterion_3),
        ("nonlocal problem determinant and signs", criterion_4),
        ("characteristic value ordering", criterion_5),
        ("closed-form constants vs oracles", criterion_6),
        ("solver reproduction, exponential problem", criterion_7),
        ("nonexistence consistency", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
