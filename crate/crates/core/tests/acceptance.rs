//! One PASS/FAIL line per acceptance criterion.
//!
//! Exits 0 after printing so that the remaining test targets still run;
//! set `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use declfc_core::analysis::{check_strips, check_theorem1, verify, FrequencyGrid};
use declfc_core::io::{Config, CASE1_TOML, CASE2_TOML};
use declfc_core::model::{build_composite, default_output_selection, OutputSelection, TieLineMatrix};
use declfc_core::numlin::{certify_pd, eig, sigma_max, solve_linear, sym_eigvals, sym_max_eig, Matrix};
use declfc_core::sdp::evaluate_residuals;
use declfc_core::sim::{metrics, regulation_check, simulate, SimConfig, REGULATION_BAND};
use declfc_core::synthesis::{
    assemble_plant_problem, decouplers_for, design_integrated, design_separated, Design, DesignOptions, DesignPlant,
    DesignSpec, DesignStatus,
};
use declfc_core::{CompositeSystem64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Tally {
    failed: Vec<usize>,
}

impl Tally {
    fn line(&mut self, n: usize, pass: bool, text: &str) {
        println!("{} criterion {n}: {text}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(n);
        }
    }
}

struct Case {
    cfg: Config,
    sys: CompositeSystem64,
    out: OutputSelection<f64>,
    spec: DesignSpec<f64>,
    /// Margin of the certification attempt when it failed.
    uncertified: Option<(f64, String)>,
    design: Design<f64>,
    seconds: f64,
}

impl Case {
    fn accepted(&self) -> bool {
        self.uncertified.is_none() && self.design.status.is_certified()
    }

    fn label(&self) -> String {
        match (&self.uncertified, &self.design.status) {
            (None, _) => "certified".into(),
            (Some((m, b)), DesignStatus::Certified) => {
                format!("not certified (margin {m:+.2e}, `{b}`), best-effort gains certified at the raised floor")
            }
            (Some((m, b)), DesignStatus::BestEffort { margin, .. }) => {
                format!("not certified (margin {m:+.2e}, `{b}`), best-effort gains at margin {margin:+.2e}")
            }
        }
    }
}

fn run_case(text: &str, separated: bool) -> Case {
    let cfg = Config::from_toml_str(text).unwrap();
    let sys = cfg.system::<f64>().unwrap();
    let out = cfg.output_selection(&sys).unwrap();
    let spec = cfg.spec::<f64>().unwrap();
    let opts: DesignOptions<f64> = cfg.design_options();
    let design_with = |o: &DesignOptions<f64>| {
        if separated {
            design_separated(&sys, &out, &spec, o)
        } else {
            design_integrated(&sys, &out, &spec, o)
        }
    };
    let t0 = Instant::now();
    let strict = DesignOptions { best_effort: false, ..opts.clone() };
    let (design, uncertified) = match design_with(&strict) {
        Ok(d) => (d, None),
        Err(Error::Infeasible { margin, blocking }) => {
            let relaxed = DesignOptions { best_effort: true, ..opts };
            (design_with(&relaxed).unwrap(), Some((margin, blocking)))
        }
        Err(e) => panic!("design failed: {e}"),
    };
    let seconds = t0.elapsed().as_secs_f64();
    Case { cfg, sys, out, spec, uncertified, design, seconds }
}

fn criterion1(t: &mut Tally) {
    let cfg = Config::from_toml_str(CASE1_TOML).unwrap();
    let sys = cfg.system::<f64>().unwrap();
    let p = &cfg.areas[0];
    let a = &sys.areas[0].a;
    let b = &sys.areas[0].b;
    let formula = a[(3, 0)] == 2.0 * PI * (0.1986 + 0.2148)
        && a[(1, 1)] == -1.0 / p.t_ch
        && a[(2, 0)] == -1.0 / (p.r * p.t_g)
        && b[(2, 0)] == 1.0 / p.t_g;
    let reference = (a[(3, 0)] - 2.5975).abs() < 1e-3
        && (a[(1, 1)] + 3.3333).abs() < 1e-3
        && (a[(2, 0)] + 200.0).abs() < 1e-3
        && (b[(2, 0)] - 10.0).abs() < 1e-3;
    t.line(
        1,
        formula && reference,
        &format!(
            "A1(4,1) = {:.6}, A1(2,2) = {:.6}, A1(3,1) = {:.6}, B1(3) = {:.6}; formula exact: {formula}, reference 1e-3: {reference}",
            a[(3, 0)],
            a[(1, 1)],
            a[(2, 0)],
            b[(2, 0)]
        ),
    );
}

fn criterion2(t: &mut Tally) {
    let cfg = Config::from_toml_str(CASE1_TOML).unwrap();
    let sys = cfg.system::<f64>().unwrap();
    let dec = decouplers_for(&sys).unwrap();
    let h = &dec[0].h;
    let single = h.shape() == (5, 3)
        && (0..5).all(|i| (0..3).all(|j| h[(i, j)] == if (i, j) == (0, 0) { 1.0 } else { 0.0 }));
    let worst = dec
        .iter()
        .zip(&sys.areas)
        .map(|(d, a)| d.psi.matmul(&a.f).norm_fro() / a.f.norm_fro())
        .fold(0.0, f64::max);
    t.line(2, single && worst <= 1e-12, &format!("H1 single nonzero (1,1) = 1: {single}; max ‖ΨF‖/‖F‖ = {worst:.1e}"));
}

fn criterion3(t: &mut Tally, c: &Case) {
    let plant = DesignPlant::integrated(&c.sys, &c.out, &decouplers_for(&c.sys).unwrap()).unwrap();
    let opts: DesignOptions<f64> = c.cfg.design_options();
    // residual of Ω at the reported point, evaluated outside the solver
    let floor = if c.uncertified.is_some() { opts.best_effort_pd_floor } else { opts.pd_floor };
    let (p, _) = assemble_plant_problem(&plant, &c.spec, floor).unwrap();
    let omega = evaluate_residuals(&p, &c.design.solutions[0].x).unwrap()[0].1;
    let rep = verify(&c.sys, &c.out, &c.design.gains, &c.spec, &FrequencyGrid::default()).unwrap();
    let stable = rep.max_real < 0.0 && rep.marginal_modes == 0;

    let mut structural = true;
    for (i, (g, (area, p))) in c.design.gains.areas.iter().zip(c.sys.areas.iter().zip(&c.cfg.areas)).enumerate() {
        let psi_a = g.psi.matmul(&area.a);
        for j in [1, 2] {
            structural &= (0..5).all(|r| (g.phi[(r, j)] - psi_a[(r, j)]).abs() < 1e-3);
        }
        let tie_sum: f64 = c.cfg.ties.iter().filter(|e| e.i == i + 1 || e.j == i + 1).map(|e| e.t).sum();
        let want = [0.0, 0.0, -1.0 / (p.r * p.t_g), 2.0 * PI * tie_sum, p.beta];
        structural &= (0..5).all(|r| (g.l[(r, 0)] - want[r]).abs() < 1e-3);
    }
    let reference = [(-3.3333, 3.3333, -10.0), (-2.5, 2.5, -5.8824), (-2.8571, 2.8571, -5.0)];
    for (g, (p22, p23, p33)) in c.design.gains.areas.iter().zip(reference) {
        structural &= (g.phi[(1, 1)] - p22).abs() < 1e-3 && (g.phi[(1, 2)] - p23).abs() < 1e-3;
        structural &= (g.phi[(2, 2)] - p33).abs() < 1e-3;
    }
    let pass = c.accepted() && omega < 0.0 && stable && structural;
    t.line(
        3,
        pass,
        &format!(
            "{} in {:.1} s; λmax(Ω) re-evaluated {omega:+.3e}; closed loop max Re {:+.3e} ({} marginal of {}); structural Φ/L checks: {structural}",
            c.label(),
            c.seconds,
            rep.max_real,
            rep.marginal_modes,
            rep.closed_loop.len()
        ),
    );
}

fn criterion4(t: &mut Tally, cases: &[(&str, &Case)]) {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, c) in cases {
        let r = check_theorem1(&c.sys, &c.out, &c.design.gains, &c.spec).unwrap();
        pass &= c.accepted() && r < 0.0;
        parts.push(format!("{name} {r:+.3e} ({})", if c.accepted() { "accepted" } else { "best-effort" }));
    }
    t.line(4, pass, &format!("analysis-matrix residual at recovered gains: {}", parts.join(", ")));
}

fn criterion5(t: &mut Tally, cases: &[(&str, &Case)]) {
    let mut parts = Vec::new();
    let mut pass = true;
    let t0 = Instant::now();
    for (name, c) in cases {
        let rep = verify(&c.sys, &c.out, &c.design.gains, &c.spec, &FrequencyGrid::default()).unwrap();
        match &rep.hinf {
            Ok(h) => {
                pass &= h.value < c.spec.gamma;
                parts.push(format!("{name} {:.4} vs γ = {} at ω = {:.3e}", h.value, c.spec.gamma, h.omega));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} not computed ({e})"));
            }
        }
    }
    t.line(5, pass, &format!("{} ({:.1} s)", parts.join("; "), t0.elapsed().as_secs_f64()));
}

fn criterion6(t: &mut Tally, c: &Case) {
    let strips = c.spec.strips.as_ref().expect("case 2 carries strips");
    let r = check_strips(&c.sys, &c.design.gains, strips).unwrap();
    let range = |v: &[declfc_core::analysis::EigenVerdict<f64>]| {
        let re = v.iter().map(|e| e.value.re);
        (re.clone().fold(f64::INFINITY, f64::min), re.fold(f64::NEG_INFINITY, f64::max))
    };
    let (c_lo, c_hi) = range(&r.control);
    let (o_lo, o_hi) = range(&r.observer);
    let outside = r.control.iter().chain(&r.observer).filter(|e| !e.inside).count();
    t.line(
        6,
        c.accepted() && r.passed(),
        &format!(
            "{}; control Re in [{c_lo:.4}, {c_hi:.3e}], observer Re in [{o_lo:.4}, {o_hi:.4}]; {outside} eigenvalues outside",
            c.label()
        ),
    );
}

fn criterion7(t: &mut Tally, cases: &[(&str, &Case)]) {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, c) in cases {
        let sched = c.cfg.schedule().unwrap();
        let sim = c.cfg.sim_config().unwrap();
        let t0 = Instant::now();
        match simulate(&c.sys, &c.design.gains, &sched, &sim) {
            Ok(traj) => {
                let reg = regulation_check(&traj, &sched, REGULATION_BAND);
                pass &= c.accepted() && reg.passed();
                parts.push(format!(
                    "{name} ({}) worst checkpoint {:.3e} in {:.2} s",
                    if c.accepted() { "accepted" } else { "best-effort" },
                    reg.worst(),
                    t0.elapsed().as_secs_f64()
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} simulation failed: {e}"));
            }
        }
    }
    t.line(7, pass, &format!("band {REGULATION_BAND:e}: {}", parts.join("; ")));
}

fn criterion8(t: &mut Tally, integ: &Case, sep: &Case) {
    let sched = integ.cfg.schedule().unwrap();
    let sim = integ.cfg.sim_config().unwrap();
    let run = |c: &Case| simulate(&c.sys, &c.design.gains, &sched, &sim).map(|tr| metrics(&tr));
    match (run(integ), run(sep)) {
        (Ok(mi), Ok(ms)) => {
            println!("    {:<22} {:>14} {:>14}", "", "integrated", "separated");
            println!("    {:<22} {:>14} {:>14}", "design", short(integ), short(sep));
            for (i, (a, b)) in mi.areas.iter().zip(&ms.areas).enumerate() {
                println!("    {:<22} {:>14.6e} {:>14.6e}", format!("peak |df| area {}", i + 1), a.peak_freq, b.peak_freq);
                println!("    {:<22} {:>14.6e} {:>14.6e}", format!("ISE df area {}", i + 1), a.ise_freq, b.ise_freq);
            }
            println!("    {:<22} {:>14.6e} {:>14.6e}", "ISE df total", mi.ise_freq_total, ms.ise_freq_total);
            t.line(
                8,
                true,
                &format!(
                    "comparison emitted; integrated ISE(df) = {:.6e}, separated {:.6e} (recorded, not gated)",
                    mi.ise_freq_total, ms.ise_freq_total
                ),
            );
        }
        (a, b) => t.line(8, false, &format!("simulation failed: {:?} / {:?}", a.err(), b.err())),
    }
}

fn short(c: &Case) -> &'static str {
    if c.accepted() {
        "certified"
    } else {
        "best-effort"
    }
}

fn criterion9(t: &mut Tally) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = Vec::new();
    let rand_mat = |rng: &mut ChaCha8Rng, r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let mut a: Matrix<f64> = rand_mat(&mut rng, n, n);
        for i in 0..n {
            a[(i, i)] += 2.0 * n as f64;
        }
        let b = rand_mat(&mut rng, n, 2);
        let x = solve_linear(&a, &b).unwrap();
        if (&a.matmul(&x) - &b).norm_fro() > 1e-10 * a.norm_fro() * x.norm_fro() + 1e-12 {
            bad.push("solve");
        }
        let m = rand_mat(&mut rng, n, n);
        let s = eig(&m).unwrap();
        let sum = s.sum();
        if (sum.re - m.trace()).abs() > 1e-6 * m.norm_fro().max(1e-300) || sum.im.abs() > 1e-6 * m.norm_fro() {
            bad.push("eig trace");
        }
        // eigen-residual: σ_min(M − λI) ≈ 0 through the real embedding
        for v in &s.values {
            let mut shifted_re = m.clone();
            for i in 0..n {
                shifted_re[(i, i)] -= v.re;
            }
            let im = Matrix::identity(n).scale(-v.im);
            let smin = declfc_core::numlin::sigma_min_complex(&shifted_re, &im).unwrap();
            if smin > 1e-7 * m.norm_fro().max(1.0) {
                bad.push("eig residual");
                break;
            }
        }
        let g = rand_mat(&mut rng, n, n);
        let mut spd = g.matmul(&g.transpose()).symmetrize();
        let shift = rng.gen_range(-1.0..3.0);
        for i in 0..n {
            spd[(i, i)] += shift;
        }
        let lo = sym_eigvals(&spd).unwrap().into_iter().fold(f64::INFINITY, f64::min);
        let pd = certify_pd(&spd).unwrap();
        if (pd && lo <= 0.0) || (!pd && lo > 1e-8 * spd.norm_fro()) {
            bad.push("certify_pd");
        }
        let (rr, rc) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let r = rand_mat(&mut rng, rr, rc);
        let sm = sigma_max(&r).unwrap();
        let oracle = sym_max_eig(&r.transpose().matmul(&r).symmetrize()).unwrap().max(0.0).sqrt();
        if (sm - oracle).abs() > 1e-8 * oracle.max(1e-12) + 1e-12 {
            bad.push("sigma_max");
        }
    }
    // integrator: halve dt on a certified single-area loop
    let cfg = Config::from_toml_str(CASE1_TOML).unwrap();
    let sys = cfg.system::<f64>().unwrap();
    let mut area = sys.areas[0].clone();
    area.da.clear();
    let one = build_composite(vec![area], &TieLineMatrix::zeros(1)).unwrap();
    let spec = cfg.spec::<f64>().unwrap();
    let d = design_integrated(&one, &default_output_selection(&one), &spec, &DesignOptions::default()).unwrap();
    let sched = declfc_core::sim::DisturbanceSchedule::new(vec![declfc_core::sim::LoadEvent {
        time: 1.0,
        area: 0,
        magnitude: 0.1,
    }])
    .unwrap();
    let coarse = simulate(&one, &d.gains, &sched, &SimConfig { t_end: 10.0, dt: 1e-3, stride: 100 }).unwrap();
    let fine = simulate(&one, &d.gains, &sched, &SimConfig { t_end: 10.0, dt: 5e-4, stride: 200 }).unwrap();
    let scale = coarse.x.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let change = coarse
        .x
        .iter()
        .flatten()
        .zip(fine.x.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale;
    if !(change < 1e-6) {
        bad.push("integrator");
    }
    bad.dedup();
    t.line(
        9,
        bad.is_empty(),
        &format!(
            "1000 instances each; failures: {}; dt-halving relative change {change:.2e}; {:.1} s",
            if bad.is_empty() { "none".to_string() } else { bad.join(", ") },
            t0.elapsed().as_secs_f64()
        ),
    );
}

fn main() {
    let mut t = Tally { failed: Vec::new() };
    criterion1(&mut t);
    criterion2(&mut t);
    let case1 = run_case(CASE1_TOML, false);
    let case2 = run_case(CASE2_TOML, false);
    criterion3(&mut t, &case1);
    let both = [("case 1", &case1), ("case 2", &case2)];
    criterion4(&mut t, &both);
    criterion5(&mut t, &both);
    criterion6(&mut t, &case2);
    criterion7(&mut t, &both);
    let separated = run_case(CASE1_TOML, true);
    criterion8(&mut t, &case1, &separated);
    criterion9(&mut t);
    println!("acceptance: {} of 9 criteria pass; failing: {:?}", 9 - t.failed.len(), t.failed);
    if !t.failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
