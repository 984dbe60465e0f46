//! Acceptance suite: twelve criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed; the process
//! fails if any criterion fails.

use spectral_lift::group::{BallGroup, GroupElement, GroupSpec};
use spectral_lift::lift::{build_triple, LiftConfig, SpectralTriple};
use spectral_lift::module::{build_circle_module, build_torus_module, summability_report, FredholmModule};
use spectral_lift::operator::HermitianOperator;
use spectral_lift::verify::{
    check_eq6, check_loewner, check_prop1, check_rotfeld, check_singular_chain, check_t1, check_t2, check_t3,
    commutator_norm_sweep, eq6_increasing, hermitian_norm, spectral_sign, verify_triple, VerifyConfig,
    ROTFELD_SPECTRUM_MAX,
};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

// Independent scalar oracles (hyperbolic form rather than the library's
// exponential/log1p form).
fn f(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        1.0 / (1.0 / s.sqrt()).cosh()
    }
}

fn f_inv(t: f64) -> f64 {
    (1.0 / t).acosh().powi(-2)
}

fn rho(len: u64) -> f64 {
    (-(1.0 + len as f64)).exp()
}

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Lifted {
    module: FredholmModule,
    triple: SpectralTriple,
}

fn lift(m: FredholmModule) -> Lifted {
    let triple = build_triple(&m, &LiftConfig::default()).expect("lift succeeds");
    Lifted { module: m, triple }
}

fn theta1(t: &SpectralTriple) -> HermitianOperator {
    HermitianOperator::symmetrize(t.p1.matmul(&t.theta).unwrap().matmul(&t.p1).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn circle_closed_form() -> Outcome {
    let start = Instant::now();
    let n = 32usize;
    let c = lift(build_circle_module(n).map_err(|e| e.to_string())?);
    let t = &c.triple;
    ensure!(t.provenance.sigma == 1.0, "accepted scale {} != 1", t.provenance.sigma);
    let g1 = t.g.get(n - 1, n - 1).re;
    ensure!(rel(g1, 0.5) < 1e-14, "metric entry at e_-1 is {g1}");
    let fg = f(0.5);
    let big = n as i64;
    let theta_norm = hermitian_norm(&t.theta).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (i, &inside) in c.module.interior().iter().enumerate() {
        if !inside {
            continue;
        }
        let mode = i as i64 - big;
        let expect = f_inv(rho((mode + 1).unsigned_abs()) * fg);
        worst = worst.max(rel(t.theta.get(i, i).re, expect));
        worst = worst.max(rel(t.abs_d.get(i, i).re, 2.0 / expect.sqrt()));
        for (j, &inner) in c.module.interior().iter().enumerate() {
            if inner && j != i {
                ensure!(t.theta.get(i, j).norm() <= 1e-14 * theta_norm, "theta not diagonal at ({i}, {j})");
            }
        }
    }
    ensure!(worst <= 1e-8, "interior diagonal deviates by {worst:e} (relative)");
    let th = t.theta.get(n - 1, n - 1).re;
    let ad = t.abs_d.get(n - 1, n - 1).re;
    // high-precision values of the oracle
    ensure!(rel(fg, 0.459_098_131_085_425_5) < 1e-14, "f(0.5) = {fg}");
    ensure!(rel(th, 0.164_652_036_067_091_78) < 1e-8, "theta(e_-1) = {th}");
    ensure!(rel(ad, 4.928_859_549_845_653) < 1e-8, "|D|(e_-1) = {ad}");
    // the quoted approximations, to their stated precision
    ensure!(rel(th, 0.1646490) < 5e-5 && rel(ad, 4.9288980) < 5e-5, "quoted approximations off");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("max rel dev {worst:.2e}, theta(e_-1) {th:.10}, |D|(e_-1) {ad:.10}, {elapsed:.2?}"))
}

fn sign_condition(c: &Lifted, t: &Lifted) -> Outcome {
    let mut out = Vec::new();
    for (name, l) in [("circle", c), ("torus2", t)] {
        let s = spectral_sign(&l.triple.d).and_then(|s| s.sub(l.module.f())).and_then(|d| hermitian_norm(&d));
        let s = s.map_err(|e| e.to_string())?;
        let fc = spectral_lift::operator::commutator(l.module.f(), &l.triple.abs_d).map_err(|e| e.to_string())?;
        let fc = fc.operator_norm().map_err(|e| e.to_string())?;
        ensure!(s <= 1e-8, "{name}: |sign D - F| = {s:e}");
        ensure!(fc <= 1e-8, "{name}: |[F,|D|]| = {fc:e}");
        out.push(format!("{name} sign {s:.1e} [F,|D|] {fc:.1e}"));
    }
    Ok(out.join("; "))
}

fn t1_lambda(c: &Lifted, t: &Lifted) -> Outcome {
    let lc = check_t1(&theta1(&c.triple), &c.triple.g).map_err(|e| e.to_string())?;
    let lt = check_t1(&theta1(&t.triple), &t.triple.g).map_err(|e| e.to_string())?;
    // closed form: Θ/G attains its minimum at e_{-1}
    let oracle = f_inv(rho(0) * f(0.5)) / 0.5;
    ensure!(lc >= 0.32, "circle lambda {lc}");
    ensure!(lc <= oracle * (1.0 + 1e-9) && lc >= oracle * (1.0 - 2e-6), "circle lambda {lc} vs closed form {oracle}");
    ensure!(lt > 0.0, "torus2 lambda {lt}");
    Ok(format!("circle {lc:.6} (closed form {oracle:.6}), torus2 {lt:.6}"))
}

fn t2_constants(t: &Lifted) -> Outcome {
    let mut cs = Vec::new();
    for n in [16, 32, 64] {
        let l = lift(build_circle_module(n).map_err(|e| e.to_string())?);
        let c = check_t2(&l.triple.theta, &l.module).map_err(|e| e.to_string())?;
        cs.push(c[0].1);
    }
    for c in &cs {
        ensure!(c.is_finite() && (c / cs[0] - 1.0).abs() <= 0.2, "circle C_u not stable: {cs:?}");
    }
    let ct = check_t2(&t.triple.theta, &t.module).map_err(|e| e.to_string())?;
    ensure!(ct.iter().all(|(_, c)| c.is_finite()), "torus2 C_u {ct:?}");
    Ok(format!("circle C_u over N=16,32,64: {:.4} {:.4} {:.4}; torus2 {:?}", cs[0], cs[1], cs[2], ct))
}

fn t3_decay(c: &Lifted, t: &Lifted) -> Outcome {
    let rc = check_t3(&c.triple.theta, c.triple.provenance.p_used, 1.0, 0.5).map_err(|e| e.to_string())?;
    ensure!(rc.fit.implied_order <= 1.0, "circle implied order {}", rc.fit.implied_order);
    let p_hat = summability_report(&t.module).map_err(|e| e.to_string())?.declared_p;
    let q = p_hat + 2.0 + 1.0 + 0.5;
    let rt = check_t3(&t.triple.theta, p_hat, 2.0, 0.5).map_err(|e| e.to_string())?;
    ensure!((rt.q - q).abs() < 1e-12, "q mismatch");
    ensure!(rt.verdict && rt.fit.implied_order <= q / 2.0, "torus2 implied order {} > q/2 = {}", rt.fit.implied_order, q / 2.0);
    Ok(format!(
        "circle order {:.4} (R² {:.3}); torus2 order {:.4} vs q/2 = {:.4} (p̂ {:.4})",
        rc.fit.implied_order,
        rc.fit.r_squared,
        rt.fit.implied_order,
        q / 2.0,
        p_hat
    ))
}

fn chain(c: &Lifted, t: &Lifted) -> Outcome {
    let mut out = Vec::new();
    for (name, l) in [("circle", c), ("torus2", t)] {
        let r = l.module.group().growth_order() as f64;
        let q = (l.triple.provenance.p_used + r + 1.5) / 2.0;
        let res = check_singular_chain(
            &theta1(&l.triple),
            &l.triple.g,
            l.module.group(),
            l.triple.provenance.ball_radius,
            q,
            r,
            1e-10,
        )
        .map_err(|e| e.to_string())?;
        ensure!(res.holds && res.min_relative_margin >= -1e-10, "{name}: margin {:e}", res.min_relative_margin);
        out.push(format!("{name} margin {:.2e} C {:.3e}", res.min_relative_margin, res.constant.unwrap_or(f64::NAN)));
    }
    Ok(out.join("; "))
}

fn rotfeld() -> Outcome {
    let start = Instant::now();
    let phi = |x: f64| f_inv(x);
    let r = check_rotfeld(100, 8, &phi, (1e-3 * ROTFELD_SPECTRUM_MAX, ROTFELD_SPECTRUM_MAX), 0x5eed, 1e-10)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(r.trials == 100 && r.all_pass(), "{} violations, worst {:e}", r.failures.len(), r.min_slack);
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("100/100, min slack {:.3e}, {elapsed:.2?}", r.min_slack))
}

fn loewner() -> Outcome {
    let r = check_loewner(100, 6, 200, 0x5eed ^ 0x10e3, 1e-10).map_err(|e| e.to_string())?;
    ensure!(r.monotonicity.trials == 100 && r.monotonicity.all_pass(), "{} violations", r.monotonicity.failures.len());
    ensure!(r.pick.samples == 200 && r.pick.min_imag >= -1e-12, "Pick min imag {:e}", r.pick.min_imag);
    Ok(format!("100/100 monotone, Pick min Im {:.3e} over 200", r.pick.min_imag))
}

fn eq6() -> Outcome {
    let s = check_eq6(&[1e-3, 1e-6, 1e-9, 1e-12]).map_err(|e| e.to_string())?;
    let at = s[1].ratio;
    let oracle = f_inv(1e-6) * (1e-6f64).ln().powi(2);
    ensure!((at - 0.9067).abs() <= 0.001, "ratio at 1e-6 is {at}");
    ensure!(rel(at, oracle) < 1e-12, "ratio {at} vs oracle {oracle}");
    ensure!(eq6_increasing(&s), "not increasing: {s:?}");
    Ok(s.iter().map(|x| format!("{:.6}", x.ratio)).collect::<Vec<_>>().join(" < "))
}

fn prop1(c: &Lifted, t: &Lifted) -> Outcome {
    let mut out = Vec::new();
    for (name, l) in [("circle", c), ("torus2", t)] {
        let r = check_prop1(&l.triple.d, &l.triple.abs_d, l.module.f(), l.module.unitaries(), 200)
            .map_err(|e| e.to_string())?;
        ensure!(r.min_margin >= -1e-8, "{name}: sandwich margin {:e}", r.min_margin);
        ensure!(r.integral_residual <= 1e-6, "{name}: quadrature residual {:e}", r.integral_residual);
        out.push(format!("{name} margin {:.2e} quadrature {:.1e}", r.min_margin, r.integral_residual));
    }
    Ok(out.join("; "))
}

fn sweep() -> Outcome {
    let start = Instant::now();
    let cfg = LiftConfig::default();
    let c = commutator_norm_sweep(&build_circle_module, &[16, 32, 64], &cfg, false).map_err(|e| e.to_string())?;
    let t = commutator_norm_sweep(&|n| build_torus_module(2, n), &[6, 10, 14], &cfg, false)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(c.bounded && c.max_ratio <= 1.5, "circle ratio {}", c.max_ratio);
    ensure!(t.bounded && t.max_ratio <= 1.5, "torus2 ratio {}", t.max_ratio);
    ensure!(t.rows.iter().all(|r| r.commutator_norms.values().all(|v| v.is_finite())), "non-finite torus2 norm");
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!("circle max ratio {:.4}, torus2 max ratio {:.4}, {elapsed:.1?}", c.max_ratio, t.max_ratio))
}

fn determinism(c: &Lifted) -> Outcome {
    let a = verify_triple(&c.module, &c.triple, &VerifyConfig::default()).map_err(|e| e.to_string())?;
    let b = verify_triple(&c.module, &c.triple, &VerifyConfig::default()).map_err(|e| e.to_string())?;
    ensure!(a.to_csv() == b.to_csv() && a.to_json().unwrap() == b.to_json().unwrap(), "in-process reports differ");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let run = |args: &[&str]| -> Result<(), String> {
        let o = Command::new(env!("CARGO_BIN_EXE_spectral-lift"))
            .args(args)
            .current_dir(d)
            .env_remove("SPECTRAL_LIFT_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        match o.status.code() {
            Some(0) => Ok(()),
            s => Err(format!("{args:?} exited {s:?}: {}", String::from_utf8_lossy(&o.stderr))),
        }
    };
    for tag in ["1", "2"] {
        let m = format!("m{tag}.json");
        let t = format!("t{tag}.json");
        run(&["build", "--example", "torus2", "--size", "4", "--out", &m])?;
        run(&["lift", &m, "--out", &t])?;
        run(&["verify", &t, &m, "--seed", "42", "--out", &format!("r{tag}.csv"), "--report", &format!("r{tag}.json")])?;
        run(&["sweep", "--example", "circle", "--size", "12,16", "--out", &format!("s{tag}.csv")])?;
    }
    let same = |a: &str, b: &str| std::fs::read(d.join(a)).ok() == std::fs::read(d.join(b)).ok() && d.join(a).exists();
    for (a, b) in [
        ("m1.json", "m2.json"),
        ("t1.json", "t2.json"),
        ("r1.csv", "r2.csv"),
        ("r1.json", "r2.json"),
        ("s1.csv", "s2.csv"),
        ("s1.decay-16.csv", "s2.decay-16.csv"),
    ] {
        ensure!(same(a, b), "{a} and {b} differ");
    }
    Ok("module, triple, CSV/JSON reports and sweep tables bit-identical".into())
}

fn weights_match_definition() -> bool {
    let g = GroupSpec::free_abelian(1).unwrap();
    (g.weight(&g.identity()).unwrap() - rho(0)).abs() < 1e-16 && (g.weight(&GroupElement::new(vec![1])).unwrap() - rho(1)).abs() < 1e-16
}

fn main() {
    let c32 = lift(build_circle_module(32).expect("circle module"));
    let t6 = lift(build_torus_module(2, 6).expect("torus module"));
    assert!(weights_match_definition(), "averaging weights disagree with exp(-(1+L))");

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("circle closed form", Box::new(circle_closed_form)),
        ("sign D = F", Box::new(|| sign_condition(&c32, &t6))),
        ("lambda bound", Box::new(|| t1_lambda(&c32, &t6))),
        ("conjugation constants", Box::new(|| t2_constants(&t6))),
        ("theta decay", Box::new(|| t3_decay(&c32, &t6))),
        ("singular-value chain", Box::new(|| chain(&c32, &t6))),
        ("Rotfel'd suite", Box::new(rotfeld)),
        ("Loewner suite", Box::new(loewner)),
        ("log-ratio sequence", Box::new(eq6)),
        ("commutator sandwich", Box::new(|| prop1(&c32, &t6))),
        ("commutator sweep", Box::new(sweep)),
        ("determinism", Box::new(|| determinism(&c32))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match res {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
