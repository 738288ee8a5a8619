//! Acceptance criteria 1-11. Each criterion prints one PASS/FAIL line; every
//! run reports all eleven. Numeric arguments select a subset, e.g.
//! `cargo test --test acceptance -- 3 4`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ptkerr::linear::{commutator, linear_moments, CommutatorKind, CommutatorVariant, Pair};
use ptkerr::moments::uniform_grid;
use ptkerr::nonlinear::{
    change_ratio, coherent_phase_moment, growing_amplitude, mean_b, perturbative_correction, quadrature_mean, ClosedFormOptions,
    Variant,
};
use ptkerr::oracle::{evolve, product_coherent, FockDims, InitialState, OracleOutput, OracleRun};
use ptkerr::params::derive_from_rates;
use ptkerr::{derive_constants, Complex64, CouplerParams, DerivedConstants, Error, MomentSet, Regime};
use ptkerr_cli::config::Engine;
use ptkerr_cli::figures::{d3_series, eb1_weight_series, quadratures, FigurePreset};
use ptkerr_cli::sweep::sweep;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Runs the oracle from `|alpha0, beta0>` with the leakage and horizon guards on.
fn oracle(p: CouplerParams, dims: FockDims, dt: f64, grid: Vec<f64>, beta0: Complex64) -> Result<OracleOutput, Error> {
    let mut run = OracleRun::new(p, dims, dt, grid);
    run.max_total_dim = dims.total();
    let psi = product_coherent(dims, p.alpha0, beta0)?;
    evolve(&run, &InitialState::Pure(psi))
}

// 1. algebraic identities

const C1_DRAWS: usize = 100;
const C1_TOL: f64 = 1e-10;

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst_zeta: f64 = 0.0;
    let mut worst_comm: f64 = 0.0;
    let mut counts = [0usize; 2];
    for (slot, range) in [(0usize, (0.02, 0.95)), (1usize, (1.05, 3.0))] {
        for _ in 0..C1_DRAWS {
            let kappa = rng.gen_range(0.1..2.0);
            let j = kappa * rng.gen_range(range.0..range.1);
            let dc = derive_from_rates(kappa, j);
            let expected = if slot == 0 { Regime::Broken } else { Regime::PtSymmetric };
            assert_eq!(dc.regime, expected);
            let t = rng.gen_range(0.0..4.0) / kappa;
            let z = (dc.zeta1 + dc.zeta2).norm() / dc.zeta1.norm().max(1.0);
            worst_zeta = worst_zeta.max(z);
            let full = |pair| commutator(&dc, CommutatorKind { pair, variant: CommutatorVariant::Full }, t, t).unwrap();
            let e = [(full(Pair::BB) - 1.0).norm(), (full(Pair::AA) - 1.0).norm(), full(Pair::AB).norm()];
            worst_comm = e.iter().fold(worst_comm, |m, &x| m.max(x));
            counts[slot] += 1;
        }
    }
    outcome(
        worst_zeta <= C1_TOL && worst_comm <= C1_TOL,
        format!(
            "{} broken + {} symmetric draws; max |zeta1+zeta2| (scaled) {worst_zeta:.1e}, max equal-time commutator error {worst_comm:.1e} (tol {C1_TOL:e})",
            counts[0], counts[1]
        ),
    )
}

// 2. linear oracle anchor

const C2_TOL: f64 = 1e-4;
const SIX: [&str; 6] = ["a", "b", "n_a", "n_b", "ab", "adag_bdag"];

fn worst_six(dc: &DerivedConstants, alpha0: Complex64, out: &OracleOutput) -> (f64, f64) {
    let mut worst: (f64, f64) = (0.0, 0.0);
    for (t, m) in out.series.t.iter().zip(&out.series.moments) {
        let l = linear_moments(dc, alpha0, *t).unwrap();
        for ((name, u), (_, v)) in m.components().iter().zip(l.components().iter()) {
            if !SIX.contains(name) {
                continue;
            }
            let r = (u - v).norm() / v.norm().max(1e-12);
            if r > worst.0 {
                worst = (r, *t);
            }
        }
    }
    worst
}

fn criterion_2() -> Outcome {
    let p = CouplerParams::new(1.0, 0.6, 0.0, c(1.0)).unwrap();
    let dc = derive_constants(&p);
    let dims = FockDims::new(32, 32).unwrap();
    let grid = uniform_grid(1.5, 16);
    match oracle(p, dims, 1e-3, grid, C0) {
        Ok(out) => {
            let (w, t) = worst_six(&dc, p.alpha0, &out);
            outcome(w <= C2_TOL, format!("max relative error {w:.2e} at kappa t = {t:.2} (tol {C2_TOL:e})"))
        }
        Err(e) => {
            // the same run with the horizon rule lifted shows where truncation sets in
            let mut run = OracleRun::new(p, dims, 1e-3, uniform_grid(1.5, 16));
            run.enforce_horizon = false;
            let psi = product_coherent(dims, p.alpha0, C0).unwrap();
            let lifted = match evolve(&run, &InitialState::Pure(psi.clone())) {
                Err(Error::Truncation { t, leakage, .. }) => format!("leakage {leakage:.1e} at kappa t = {t:.3}"),
                Err(other) => other.to_string(),
                Ok(_) => "completes".into(),
            };
            let mut early = OracleRun::new(p, dims, 1e-3, uniform_grid(0.3, 4));
            early.enforce_horizon = false;
            let early = evolve(&early, &InitialState::Pure(psi)).map(|o| worst_six(&dc, p.alpha0, &o).0);
            let early = early.map(|w| format!("{w:.1e}")).unwrap_or_else(|e| e.to_string());
            outcome(
                false,
                format!(
                    "32x32 cannot reach kappa t = 1.5: {e}; with the rule lifted, {lifted}; max relative error on [0, 0.3] is {early} (tol {C2_TOL:e})"
                ),
            )
        }
    }
}

// 3. pure-Kerr oracle anchor

const C3_TOL: f64 = 1e-6;

/// `<b(t)>` of a Kerr-evolved coherent state by direct Fock summation:
/// `sum_n c_n^* c_{n+1} sqrt(n+1) e^{-i chi t n}`.
fn kerr_fock_sum(beta: Complex64, chi: f64, t: f64, nmax: usize) -> Complex64 {
    let mut cn = vec![C0; nmax + 1];
    cn[0] = (-0.5 * beta.norm_sqr()).exp().into();
    for n in 1..=nmax {
        cn[n] = cn[n - 1] * beta / (n as f64).sqrt();
    }
    (0..nmax).map(|n| cn[n].conj() * cn[n + 1] * ((n + 1) as f64).sqrt() * Complex64::from_polar(1.0, -chi * t * n as f64)).sum()
}

fn criterion_3() -> Outcome {
    let chi = 0.2;
    let beta = c(1.5);
    let p = CouplerParams::new(0.0, 0.0, chi, C0).unwrap();
    let dims = FockDims::new(1, 40).unwrap();
    let t_max = 2.0 * PI / chi;
    let n = 200;
    let dt = t_max / (n - 1) as f64 / 50.0;
    let out = match oracle(p, dims, dt, uniform_grid(t_max, n), beta) {
        Ok(o) => o,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut worst_closed: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for (t, m) in out.series.t.iter().zip(&out.series.moments) {
        let closed = beta * (beta.norm_sqr() * (Complex64::from_polar(1.0, -chi * t) - 1.0)).exp();
        worst_closed = worst_closed.max((m.mean_b - closed).norm());
        worst_sum = worst_sum.max((m.mean_b - kerr_fock_sum(beta, chi, *t, 200)).norm());
    }
    let revival = (out.series.moments.last().unwrap().mean_b - beta).norm();
    outcome(
        worst_closed <= C3_TOL && worst_sum <= C3_TOL,
        format!(
            "max |oracle - closed form| {worst_closed:.1e}, vs Fock sum {worst_sum:.1e}, revival error at chi t = 2 pi {revival:.1e} (tol {C3_TOL:e})"
        ),
    )
}

// 4. coherent-phase primitive

const C4_TOL: f64 = 1e-10;

/// `<alpha| e^{i theta n} c^m |alpha> = sum_n c_n^* c_{n+m} sqrt((n+m)!/n!) e^{i theta n}`.
fn phase_moment_fock_sum(alpha: Complex64, theta: f64, m: u32, nmax: usize) -> Complex64 {
    let mut cn = vec![C0; nmax + m as usize + 1];
    cn[0] = (-0.5 * alpha.norm_sqr()).exp().into();
    for n in 1..cn.len() {
        cn[n] = cn[n - 1] * alpha / (n as f64).sqrt();
    }
    (0..nmax)
        .map(|n| {
            let ladder: f64 = (1..=m as usize).map(|k| ((n + k) as f64).sqrt()).product();
            cn[n].conj() * cn[n + m as usize] * ladder * Complex64::from_polar(1.0, theta * n as f64)
        })
        .sum()
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for r in [0.0, 0.3, 1.0, 2.2, 3.0] {
        for phase in [0.0, 0.7, -2.1, PI] {
            let alpha = Complex64::from_polar(r, phase);
            for k in 0..=12 {
                let theta = -PI + 2.0 * PI * k as f64 / 12.0;
                for m in 0..=2 {
                    let got = coherent_phase_moment(alpha, c(theta), m);
                    let want = phase_moment_fock_sum(alpha, theta, m, 120);
                    worst = worst.max((got - want).norm());
                    count += 1;
                }
            }
        }
    }
    outcome(worst <= C4_TOL, format!("{count} cases, max abs error {worst:.1e} (tol {C4_TOL:e})"))
}

// 5. nonlinear small-scale cross-check

const C5_TOL: f64 = 0.10;
/// Allowed gap, in units of `|<b>|`, between the residual and the dropped
/// decaying linear term.
const C5_BUDGET_TOL: f64 = 0.01;
const C5_DIMS: (usize, usize) = (440, 32);
const C5_HORIZON: f64 = 1.40;

fn criterion_5() -> Outcome {
    let p = CouplerParams::new(1.0, 0.5, 1e-3, c(2.0)).unwrap();
    let dc = derive_constants(&p);
    let lam = dc.lambda.re;
    let dims = FockDims::new(C5_DIMS.0, C5_DIMS.1).unwrap();
    let n = (C5_HORIZON / 0.05).round() as usize + 1;
    let out = match oracle(p, dims, 1e-3, uniform_grid(C5_HORIZON, n), C0) {
        Ok(o) => o,
        Err(e) => return outcome(false, e.to_string()),
    };
    let o2 = growing_amplitude(&dc, p.alpha0);
    let mut budget_gap: f64 = 0.0;
    let mut final_rel = f64::NAN;
    let mut early = String::new();
    for (t, m) in out.series.t.iter().zip(&out.series.moments).skip(1) {
        let analytic = mean_b(&dc, p.chi, p.alpha0, *t, Variant::Noisy, &ClosedFormOptions::default()).unwrap();
        let linear = linear_moments(&dc, p.alpha0, *t).unwrap().mean_b;
        let dropped = (linear - (lam * t).exp() * o2).norm() / m.mean_b.norm();
        let rel = (analytic - m.mean_b).norm() / m.mean_b.norm();
        budget_gap = budget_gap.max((rel - dropped).abs());
        final_rel = rel;
        if (*t - 0.5).abs() < 1e-9 {
            early = format!("at kappa t = 0.5 residual {rel:.3} vs dropped term {dropped:.3}; ");
        }
    }
    outcome(
        final_rel <= C5_TOL && budget_gap <= C5_BUDGET_TOL,
        format!(
            "{}x{} to kappa t = {C5_HORIZON}, max leakage {:.1e}; {early}residual minus dropped term <= {budget_gap:.1e} (tol {C5_BUDGET_TOL}); relative error at horizon {final_rel:.3} (tol {C5_TOL})",
            C5_DIMS.0, C5_DIMS.1, out.max_leakage
        ),
    )
}

// 6. perturbative symmetric-regime check

const C6_RANGE: (f64, f64) = (3.0, 5.0);

fn criterion_6() -> Outcome {
    let dims = FockDims::new(44, 30).unwrap();
    let t_max = 3.0;
    let n = 11;
    let mut residuals = Vec::new();
    for chi in [0.05, 0.025] {
        let p = CouplerParams::new(0.3, 1.0, chi, c(1.0)).unwrap();
        let dc = derive_constants(&p);
        let step = t_max / (n - 1) as f64;
        let dt = step / (step / (1e-3 / p.kappa)).ceil();
        let out = match oracle(p, dims, dt, uniform_grid(t_max, n), C0) {
            Ok(o) => o,
            Err(e) => return outcome(false, e.to_string()),
        };
        let r: Vec<(Complex64, Complex64)> = out
            .series
            .t
            .iter()
            .zip(&out.series.moments)
            .map(|(t, m)| {
                let l = linear_moments(&dc, p.alpha0, *t).unwrap();
                let (da, db) = perturbative_correction(&dc, chi, p.alpha0, *t, &Default::default()).unwrap();
                (m.mean_a - l.mean_a - da, m.mean_b - l.mean_b - db)
            })
            .collect();
        residuals.push(r);
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 1..n {
        for (x, y) in [(residuals[0][k].0, residuals[1][k].0), (residuals[0][k].1, residuals[1][k].1)] {
            let q = x.norm() / y.norm();
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    outcome(
        lo >= C6_RANGE.0 && hi <= C6_RANGE.1,
        format!("residual ratio chi = 0.05 over 0.025 in [{lo:.3}, {hi:.3}] for <a>, <b> on kappa t in (0, 0.9] (allowed [{}, {}])", C6_RANGE.0, C6_RANGE.1),
    )
}

// 7. Fig. 4

const C7_AGREE: f64 = 0.01;
const C7_WINDOW: (f64, f64) = (3.0, 5.0);
const C7_ENVELOPE: f64 = 1e-3;

/// Zero crossings of `P_B` from the first one until the envelope
/// `|<b>|/|<b>_lin|` drops below `C7_ENVELOPE`. Steps adapt so the phase of
/// `<b>` advances at most 0.3 rad; each sign change is bisected.
fn p_b_crossings(dc: &DerivedConstants, chi: f64, alpha0: Complex64, t_max: f64) -> (Vec<f64>, Option<f64>) {
    let b = |t: f64| mean_b(dc, chi, alpha0, t, Variant::Noisy, &ClosedFormOptions::default()).unwrap();
    let o2 = growing_amplitude(dc, alpha0);
    let envelope = |t: f64, v: Complex64| v.norm() / ((dc.lambda.re * t).exp() * o2).norm();
    let p = |v: Complex64| quadrature_mean(v, FRAC_PI_2);
    let (mut t, mut h) = (0.0, 1e-2);
    let mut cur = b(t);
    let mut out = Vec::new();
    while t < t_max {
        if envelope(t, cur) < C7_ENVELOPE {
            return (out, Some(t));
        }
        let next = b(t + h);
        let dphi = (next / cur).arg().abs();
        if dphi > 0.3 {
            h *= 0.5;
            continue;
        }
        if p(cur).signum() != p(next).signum() {
            let (mut lo, mut hi) = (t, t + h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if p(b(mid)).signum() == p(cur).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        t += h;
        cur = next;
        if dphi < 0.05 {
            h *= 1.5;
        }
    }
    (out, None)
}

fn criterion_7() -> Outcome {
    let preset = FigurePreset::load("fig4").unwrap();
    let cfg = &preset.scenario;
    let nl = quadratures(cfg).unwrap();
    let lin = quadratures(&preset.scenario_for(cfg.params.j_over_kappa, cfg.params.chi_over_kappa, Engine::Linear)).unwrap();
    let p = cfg.coupler().unwrap();
    let dc = derive_constants(&p);
    let mut agree: f64 = 0.0;
    for k in 0..nl.t.len() {
        if nl.t[k] < C7_WINDOW.0 || nl.t[k] > C7_WINDOW.1 {
            continue;
        }
        let lm = linear_moments(&dc, p.alpha0, nl.t[k] / p.kappa).unwrap();
        for (x, y, scale) in [
            (nl.x_a[k], lin.x_a[k], lm.mean_a.norm()),
            (nl.p_a[k], lin.p_a[k], lm.mean_a.norm()),
            (nl.x_b[k], lin.x_b[k], lm.mean_b.norm()),
            (nl.p_b[k], lin.p_b[k], lm.mean_b.norm()),
        ] {
            agree = agree.max((x - y).abs() / scale);
        }
    }
    let (cross, env_end) = p_b_crossings(&dc, p.chi, p.alpha0, cfg.t_max / p.kappa);
    let intervals: Vec<f64> = cross.windows(2).map(|w| w[1] - w[0]).collect();
    let violations = intervals.windows(2).filter(|w| w[1] >= w[0]).count();
    let n_b_grows = nl.n_b.windows(2).all(|w| w[1] > w[0]);
    let pass = agree <= C7_AGREE && intervals.len() >= 3 && violations == 0 && env_end.is_some() && n_b_grows;
    outcome(
        pass,
        format!(
            "max quadrature gap on kappa t in [{}, {}] {agree:.1e} of |<c>| (tol {C7_AGREE}); {} P_B crossings from kappa t = {:.3}, {violations} non-decreasing intervals; envelope < {C7_ENVELOPE:e} at kappa t = {}; n_b increasing: {n_b_grows}",
            C7_WINDOW.0,
            C7_WINDOW.1,
            cross.len(),
            cross.first().copied().unwrap_or(f64::NAN),
            env_end.map(|t| format!("{:.3}", t * p.kappa)).unwrap_or_else(|| "never".into()),
        ),
    )
}

// 8. Fig. 3

const C8_GRID: usize = 20;
const C8_LEVEL: f64 = 0.01;
/// The plateau must persist for this long in `kappa t`, or until the horizon.
const C8_HOLD: f64 = 1.0;
const C8_FINE: usize = 8001;

/// First `kappa t` after which `|ratio - 1| <= C8_LEVEL` holds for `C8_HOLD`
/// (or to the horizon); the entry point is bisected. `None`: never.
fn plateau_entry(dc: &DerivedConstants, chi: f64, alpha0: Complex64, t_max: f64, v: Variant) -> Option<f64> {
    let r = |t: f64| change_ratio(dc, chi, alpha0, t, v, &Default::default()).unwrap();
    let inside = |t: f64| (r(t) - 1.0).abs() <= C8_LEVEL;
    let h = t_max / (C8_FINE - 1) as f64;
    let ok: Vec<bool> = (0..C8_FINE).map(|k| inside(k as f64 * h)).collect();
    let hold = (C8_HOLD / h).round() as usize;
    let k = (1..C8_FINE).find(|&k| !ok[k - 1] && ok[k..(k + hold + 1).min(C8_FINE)].iter().all(|&b| b))?;
    let (mut lo, mut hi) = ((k - 1) as f64 * h, k as f64 * h);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn criterion_8() -> Outcome {
    let preset = FigurePreset::load("fig3").unwrap();
    let mut cfg = preset.scenario.clone();
    let s = cfg.sweep.as_mut().unwrap();
    s.j_steps = C8_GRID;
    cfg.n_samples = C8_GRID;
    let mut surfaces = Vec::new();
    for v in [Engine::Noisy, Engine::Noiseless] {
        cfg.variant = v;
        surfaces.push(sweep(&cfg).unwrap());
    }
    let finite = surfaces.iter().all(|s| s.values.iter().flatten().all(|x| x.is_finite()));
    let mut worst_margin = f64::INFINITY;
    let mut failures = Vec::new();
    for &j in &surfaces[0].j_axis {
        let p = cfg.params.with_j(j).coupler().unwrap();
        let dc = derive_constants(&p);
        let horizon = cfg.t_max / p.kappa;
        let noisy = plateau_entry(&dc, p.chi, p.alpha0, horizon, Variant::Noisy).unwrap_or(f64::INFINITY);
        let clean = plateau_entry(&dc, p.chi, p.alpha0, horizon, Variant::Noiseless);
        match clean {
            Some(tc) if tc < noisy => worst_margin = worst_margin.min(noisy.min(horizon) - tc),
            _ => failures.push(j),
        }
    }
    outcome(
        finite && failures.is_empty(),
        format!(
            "{C8_GRID}x{C8_GRID} sweep finite: {finite}; NOISELESS enters the plateau first for {}/{} J values, smallest lead {worst_margin:.3} kappa t; failing J: {failures:?}",
            C8_GRID - failures.len(),
            C8_GRID
        ),
    )
}

// 9. Fig. 7

const C9_OPEN_BOUND: f64 = 15.0;

fn negative_windows(grid: &[f64], neg: &[bool]) -> Vec<(f64, f64, bool)> {
    let mut out = Vec::new();
    let mut start = None;
    for k in 0..grid.len() {
        match (neg[k], start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((grid[s], grid[k - 1], s > 0));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((grid[s], *grid.last().unwrap(), false));
    }
    out
}

fn criterion_9() -> Outcome {
    let preset = FigurePreset::load("fig7").unwrap();
    let chi = preset.scenario.params.chi_over_kappa;
    let mut pass = true;
    let mut parts = Vec::new();
    for j in preset.j_values() {
        let lam = derive_from_rates(1.0, j).lambda.re;
        let mut width = Vec::new();
        for v in [Engine::Noisy, Engine::Noiseless] {
            let (grid, d) = d3_series(&preset.scenario_for(j, chi, v)).unwrap();
            let neg: Vec<bool> = d.iter().map(|x| x.is_negative()).collect();
            let w = negative_windows(&grid, &neg);
            let closed = w.len() == 1 && w[0].2;
            pass &= closed;
            let (open, close) = w.first().map(|x| (x.0, x.1)).unwrap_or((f64::NAN, f64::NAN));
            width.push(close - open);
            let gain = (lam * open).exp();
            if j > 0.5 {
                pass &= gain <= C9_OPEN_BOUND;
            }
            parts.push(format!("J={j} {v:?} [{open:.2}, {close:.2}] e^(lambda t) at opening {gain:.3e}"));
        }
        pass &= width[0] > width[1];
    }
    outcome(pass, format!("{}; bound at J=0.9: {C9_OPEN_BOUND}", parts.join("; ")))
}

// 10. Fig. 5

const C10_BOUND: f64 = 1.0;
const C10_PEAK_RATIO: f64 = 2.0;

fn criterion_10() -> Outcome {
    let preset = FigurePreset::load("fig5").unwrap();
    let j = preset.scenario.params.j_over_kappa;
    let mut stats = Vec::new();
    for chi in preset.chi_values() {
        let (grid, w) = eb1_weight_series(&preset.scenario_for(j, chi, Engine::Noisy)).unwrap();
        let (k, peak) = w.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (k, &x)| if x > a.1 { (k, x) } else { a });
        let rise = w.iter().position(|&x| x >= 0.5 * peak).unwrap();
        let finite = w.iter().all(|x| x.is_finite() && *x >= 0.0);
        stats.push((chi, peak, grid[k], grid[rise], finite));
    }
    let (lo, hi) = (stats[0], stats[1]);
    let bounded = stats.iter().all(|s| s.4 && s.1 <= C10_BOUND);
    let earlier = hi.2 < lo.2 && hi.3 < lo.3;
    let ratio = hi.1 / lo.1;
    outcome(
        bounded && earlier && ratio <= C10_PEAK_RATIO,
        format!(
            "chi={:e}: peak {:.3e} at kappa t {:.2}, half-max from {:.2}; chi={:e}: peak {:.3e} at {:.2}, half-max from {:.2}; peak ratio {ratio:.3} (max {C10_PEAK_RATIO}), bound {C10_BOUND}",
            lo.0, lo.1, lo.2, lo.3, hi.0, hi.1, hi.2, hi.3
        ),
    )
}

// 11. determinism

fn bits(values: &[Vec<f64>]) -> Vec<u64> {
    values.iter().flatten().map(|x| x.to_bits()).collect()
}

fn criterion_11() -> Outcome {
    let mut cfg = FigurePreset::load("fig3").unwrap().scenario;
    cfg.sweep.as_mut().unwrap().j_steps = 40;
    cfg.n_samples = 40;
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(|| sweep(&cfg)).unwrap();
    let four = pool(4).install(|| sweep(&cfg)).unwrap();
    let sweeps_equal = bits(&one.values) == bits(&four.values) && one.reasons == four.reasons;

    let p = CouplerParams::new(1.0, 0.6, 0.05, c(1.0)).unwrap();
    let dims = FockDims::new(24, 16).unwrap();
    let grid = uniform_grid(0.2, 5);
    let run = |n| pool(n).install(|| oracle(p, dims, 1e-3, grid.clone(), C0)).unwrap();
    let key = |o: &OracleOutput| -> Vec<u64> {
        o.series.moments.iter().flat_map(|m: &MomentSet| m.components().map(|(_, z)| [z.re.to_bits(), z.im.to_bits()])).flatten().collect()
    };
    let first = key(&run(1));
    let oracle_equal = key(&run(1)) == first && key(&run(4)) == first;
    outcome(
        sweeps_equal && oracle_equal,
        format!("40x40 sweep on 1 vs 4 threads bit-identical: {sweeps_equal}; oracle repeated and on 4 threads bit-identical: {oracle_equal}"),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "algebraic identities", criterion_1),
        (2, "linear oracle anchor 32x32", criterion_2),
        (3, "pure-Kerr oracle anchor", criterion_3),
        (4, "coherent-phase primitive", criterion_4),
        (5, "nonlinear oracle cross-check", criterion_5),
        (6, "perturbative symmetric-regime scaling", criterion_6),
        (7, "fig4 quadratures", criterion_7),
        (8, "fig3 plateau ordering", criterion_8),
        (9, "fig7 D3 windows", criterion_9),
        (10, "fig5 noise-term weight", criterion_10),
        (11, "determinism", criterion_11),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}: {name}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
