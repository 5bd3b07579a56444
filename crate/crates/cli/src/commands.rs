use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use declfc_core::analysis::{verify as verify_design, FrequencyGrid};
use declfc_core::io::{
    eigen_csv, trajectory_csv, CertificateFile, Config, GainsFile, ReportFile, SimulationSection,
};
use declfc_core::sdp::write_sparse_dump;
use declfc_core::sim::{metrics, simulate as run_sim, DisturbanceSchedule, Metrics, SimConfig};
use declfc_core::synthesis::{
    assemble_plant_problem, decouplers_for, design_integrated, design_separated, DesignPlant, DesignStatus,
};
use declfc_core::{DesignSpec64, Error, GainSet64};

use crate::exit;
use crate::manifest::{now, sha256_hex, CommandRecord, RunManifest, MANIFEST};
use crate::plot::gnuplot_script;
use crate::{OnOff, StrategyArg};

pub struct Failure {
    pub code: u8,
    pub msg: String,
}

type CmdResult = Result<u8, Failure>;

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

fn core_failure(e: Error) -> Failure {
    let code = match &e {
        Error::Infeasible { .. } => exit::INFEASIBLE,
        Error::Format(_)
        | Error::Parameter { .. }
        | Error::Dimension(_)
        | Error::Schedule(_)
        | Error::Decoupling { .. } => exit::DATA,
        _ => exit::SOFTWARE,
    };
    fail(code, e.to_string())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(exit::NO_INPUT, format!("{}: {e}", path.display())))
}

struct LoadedConfig {
    cfg: Config,
    path: PathBuf,
    hash: String,
    plant_hash: String,
}

fn load_config(path: &Path) -> Result<LoadedConfig, Failure> {
    let text = read_input(path)?;
    let cfg = Config::from_toml_str(&text).map_err(|e| fail(exit::DATA, format!("{}: {e}", path.display())))?;
    let plant_hash = sha256_hex(cfg.plant_text().map_err(core_failure)?.as_bytes());
    Ok(LoadedConfig { cfg, path: path.to_path_buf(), hash: sha256_hex(text.as_bytes()), plant_hash })
}

fn spec_with(cfg: &Config, strips: Option<OnOff>) -> Result<DesignSpec64, Failure> {
    let mut spec = cfg.spec::<f64>().map_err(core_failure)?;
    match strips {
        Some(OnOff::Off) => spec.strips = None,
        Some(OnOff::On) if spec.strips.is_none() => {
            return Err(fail(exit::DATA, "--strips on, but the config has no [design.strips] section"))
        }
        _ => {}
    }
    Ok(spec)
}

fn load_gains(path: &Path, cfg: &LoadedConfig) -> Result<(GainsFile, GainSet64), Failure> {
    let text = read_input(path)?;
    let file = GainsFile::from_toml_str(&text).map_err(|e| fail(exit::DATA, format!("{}: {e}", path.display())))?;
    if let Some(h) = &file.plant_hash {
        if *h != cfg.plant_hash {
            return Err(fail(
                exit::DATA,
                format!("{} was designed for a different plant than {}", path.display(), cfg.path.display()),
            ));
        }
    }
    if file.config_hash.as_deref().is_some_and(|h| h != cfg.hash) {
        log::warn!("{} was designed with a different config; checks use {}", path.display(), cfg.path.display());
    }
    let gains = file.gains::<f64>().map_err(|e| fail(exit::DATA, format!("{}: {e}", path.display())))?;
    let sys = cfg.cfg.system::<f64>().map_err(core_failure)?;
    gains.check_compatible(&sys).map_err(|e| fail(exit::DATA, format!("{}: {e}", path.display())))?;
    Ok((file, gains))
}

/// Everything a command writes, flushed only after all computation succeeded.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn names(&self) -> Vec<String> {
        self.files.iter().map(|f| f.0.clone()).collect()
    }

    fn write(self, record: CommandRecord) -> Result<(), Failure> {
        let cant = |e: std::io::Error, p: &Path| fail(exit::CANT_CREATE, format!("{}: {e}", p.display()));
        std::fs::create_dir_all(&self.dir).map_err(|e| cant(e, &self.dir))?;
        for (name, contents) in &self.files {
            let path = self.dir.join(name);
            let tmp = self.dir.join(format!(".{name}.tmp"));
            std::fs::write(&tmp, contents).map_err(|e| cant(e, &tmp))?;
            std::fs::rename(&tmp, &path).map_err(|e| cant(e, &path))?;
        }
        let mut m = RunManifest::load_or_new(&self.dir);
        m.commands.push(record);
        let text = toml::to_string(&m).map_err(|e| fail(exit::SOFTWARE, e.to_string()))?;
        let path = self.dir.join(MANIFEST);
        std::fs::write(&path, text).map_err(|e| cant(e, &path))
    }
}

fn record(name: &str, cfg: &LoadedConfig, inputs: Vec<String>, outputs: Vec<String>, strategy: Option<String>, code: u8) -> CommandRecord {
    CommandRecord {
        name: name.into(),
        unix_time: now(),
        config_path: cfg.path.display().to_string(),
        config_sha256: cfg.hash.clone(),
        plant_sha256: cfg.plant_hash.clone(),
        inputs,
        outputs,
        design: cfg.cfg.design.clone(),
        solver: cfg.cfg.solver.clone(),
        strategy,
        exit_code: code,
    }
}

pub fn design(
    config: &Path,
    strategy: StrategyArg,
    strips: Option<OnOff>,
    best_effort: bool,
    dump: Option<&Path>,
    out: &Path,
) -> CmdResult {
    let lc = load_config(config)?;
    let sys = lc.cfg.system::<f64>().map_err(core_failure)?;
    let sel = lc.cfg.output_selection(&sys).map_err(core_failure)?;
    let spec = spec_with(&lc.cfg, strips)?;
    let mut opts = lc.cfg.design_options::<f64>();
    opts.best_effort |= best_effort;

    if let Some(path) = dump {
        let plants = match strategy {
            StrategyArg::Integrated => {
                let dec = decouplers_for(&sys).map_err(core_failure)?;
                vec![(path.to_path_buf(), DesignPlant::integrated(&sys, &sel, &dec).map_err(core_failure)?)]
            }
            StrategyArg::Separated => (0..sys.n_areas)
                .map(|i| {
                    let p = PathBuf::from(format!("{}.area{}", path.display(), i + 1));
                    DesignPlant::separated_area(&sys, &sel, i).map(|d| (p, d)).map_err(core_failure)
                })
                .collect::<Result<_, _>>()?,
        };
        for (i, (p, plant)) in plants.iter().enumerate() {
            let area_spec = match (&spec.strips, strategy) {
                (Some(s), StrategyArg::Separated) => DesignSpec64 {
                    strips: Some(declfc_core::synthesis::Strips {
                        control: vec![s.control[i]],
                        observer: vec![s.observer[i]],
                    }),
                    ..spec.clone()
                },
                _ => spec.clone(),
            };
            let (problem, _) = assemble_plant_problem(plant, &area_spec, opts.pd_floor).map_err(core_failure)?;
            let mut buf = Vec::new();
            write_sparse_dump(&problem, &mut buf).map_err(|e| fail(exit::SOFTWARE, e.to_string()))?;
            std::fs::write(p, buf).map_err(|e| fail(exit::CANT_CREATE, format!("{}: {e}", p.display())))?;
        }
    }

    let t0 = std::time::Instant::now();
    let result = match strategy {
        StrategyArg::Integrated => design_integrated(&sys, &sel, &spec, &opts),
        StrategyArg::Separated => design_separated(&sys, &sel, &spec, &opts),
    };
    let d = match result {
        Ok(d) => d,
        Err(Error::Infeasible { margin, blocking }) => {
            return Err(fail(
                exit::INFEASIBLE,
                format!("infeasible at margin {margin:e} (blocking LMI `{blocking}`); rerun with --best-effort to keep the best point"),
            ))
        }
        Err(e) => return Err(core_failure(e)),
    };
    log::info!("design finished in {:.2?}", t0.elapsed());

    let mut gf = GainsFile::from_design(&d).map_err(core_failure)?;
    gf.config_hash = Some(lc.hash.clone());
    gf.plant_hash = Some(lc.plant_hash.clone());
    let mut outs = Outputs::new(out);
    outs.add("gains.toml", gf.to_toml_string().map_err(core_failure)?);
    outs.add("certificate.toml", CertificateFile::from_design(&d).to_toml_string().map_err(core_failure)?);
    let code = if d.status.is_certified() { exit::OK } else { exit::INFEASIBLE };
    let names = outs.names();
    outs.write(record("design", &lc, vec![], names, Some(d.strategy.as_str().into()), code))?;

    for (k, s) in d.solutions.iter().enumerate() {
        println!(
            "problem {}: margin {:e} (scaled {:e}), {} iterations, blocking `{}`",
            k + 1,
            s.margin,
            s.scaled_margin(),
            s.iterations,
            s.blocking
        );
    }
    for (i, a) in d.gains.areas.iter().enumerate() {
        println!("K{} = {:?}", i + 1, a.k.row(0));
    }
    match &d.status {
        DesignStatus::Certified => println!("certified; gains written to {}", out.join("gains.toml").display()),
        DesignStatus::BestEffort { margin, blocking } => {
            eprintln!(
                "declfc: infeasible at margin {margin:e} (blocking LMI `{blocking}`); best-effort gains written to {}",
                out.join("gains.toml").display()
            );
        }
    }
    Ok(code)
}

pub fn verify(gains: &Path, config: &Path, strips: Option<OnOff>, out: Option<&Path>) -> CmdResult {
    let lc = load_config(config)?;
    let (gf, g) = load_gains(gains, &lc)?;
    let sys = lc.cfg.system::<f64>().map_err(core_failure)?;
    let sel = lc.cfg.output_selection(&sys).map_err(core_failure)?;
    let spec = spec_with(&lc.cfg, strips)?;
    let rep = verify_design(&sys, &sel, &g, &spec, &FrequencyGrid::default()).map_err(core_failure)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| gains.parent().map(Path::to_path_buf).unwrap_or_default());
    let mut outs = Outputs::new(&dir);
    outs.add("report.toml", ReportFile::from_report(&rep).to_toml_string().map_err(core_failure)?);
    outs.add("eigenvalues.csv", eigen_csv(&rep));
    let code = if rep.passed() { exit::OK } else { exit::VERIFY_FAILED };
    let names = outs.names();
    outs.write(record("verify", &lc, vec![gains.display().to_string()], names, Some(gf.strategy.clone()), code))?;

    if !gf.is_certified() {
        println!("note: gains are best-effort (uncertified)");
    }
    for (name, ok) in rep.checks() {
        println!("{:<16} {}", name, if ok { "PASS" } else { "FAIL" });
    }
    match &rep.hinf {
        Ok(h) => println!("hinf estimate {:.6} at {:.4} rad/s (gamma {})", h.value, h.omega, rep.gamma),
        Err(e) => println!("hinf undefined: {e}"),
    }
    println!(
        "max Re(closed loop) {:e} ({} marginal), theorem-1 residual {:e}",
        rep.max_real, rep.marginal_modes, rep.theorem1_residual
    );
    if code != exit::OK {
        eprintln!("declfc: verification failed: {}", rep.failed_checks().join(", "));
    }
    Ok(code)
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    #[serde(flatten)]
    sim: SimulationSection,
}

fn schedule_for(lc: &LoadedConfig, path: Option<&Path>) -> Result<(DisturbanceSchedule, SimConfig), Failure> {
    let Some(path) = path else {
        let sched = lc.cfg.schedule().map_err(core_failure)?;
        let sc = lc.cfg.sim_config().map_err(core_failure)?;
        return Ok((sched, sc));
    };
    let text = read_input(path)?;
    let sf: ScheduleFile = toml::from_str(&text).map_err(|e| fail(exit::DATA, format!("{}: {e}", path.display())))?;
    let mut cfg = lc.cfg.clone();
    cfg.simulation = Some(sf.sim);
    cfg.validate().map_err(|e| fail(exit::DATA, format!("{}: {e}", path.display())))?;
    Ok((cfg.schedule().map_err(core_failure)?, cfg.sim_config().map_err(core_failure)?))
}

fn metrics_table(rows: &[(&str, &Metrics)]) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<28}", "metric");
    for (label, _) in rows {
        let _ = write!(s, "{label:>16}");
    }
    s.push('\n');
    let n = rows[0].1.areas.len();
    let mut line = |name: String, f: &dyn Fn(&Metrics) -> String| {
        let _ = write!(s, "{name:<28}");
        for (_, m) in rows {
            let _ = write!(s, "{:>16}", f(m));
        }
        s.push('\n');
    };
    line("ISE df total".into(), &|m| format!("{:.6e}", m.ise_freq_total));
    for i in 0..n {
        line(format!("area {} peak |df|", i + 1), &|m| format!("{:.6e}", m.areas[i].peak_freq));
        line(format!("area {} peak |dPtie|", i + 1), &|m| format!("{:.6e}", m.areas[i].peak_tie));
        line(format!("area {} settle df (s)", i + 1), &|m| {
            m.areas[i].settle_freq.map_or("never".into(), |t| format!("{t:.2}"))
        });
        line(format!("area {} ISE df", i + 1), &|m| format!("{:.6e}", m.areas[i].ise_freq));
        line(format!("area {} ISE dPtie", i + 1), &|m| format!("{:.6e}", m.areas[i].ise_tie));
    }
    s
}

pub fn simulate(gains: &Path, config: &Path, schedule: Option<&Path>, compare: Option<&Path>, out: &Path) -> CmdResult {
    let lc = load_config(config)?;
    let (gf, g) = load_gains(gains, &lc)?;
    let other = compare.map(|p| load_gains(p, &lc)).transpose()?;
    let (sched, sc) = schedule_for(&lc, schedule)?;
    let sys = lc.cfg.system::<f64>().map_err(core_failure)?;
    let n = sys.n_areas;
    let run = |g: &GainSet64| {
        run_sim(&sys, g, &sched, &sc).map_err(|e| match e {
            Error::Diverged { time } => fail(exit::SOFTWARE, format!("simulation diverged at t = {time} s")),
            e => core_failure(e),
        })
    };
    let traj = run(&g)?;
    let m = metrics(&traj);
    let mut outs = Outputs::new(out);
    outs.add("trajectory.csv", trajectory_csv(&traj));
    outs.add("metrics.toml", toml::to_string(&MetricsFile::new(&m, &gf.strategy)).map_err(|e| fail(exit::SOFTWARE, e.to_string()))?);
    let mut inputs = vec![gains.display().to_string()];
    let table = if let Some((of, og)) = &other {
        let t2 = run(og)?;
        let m2 = metrics(&t2);
        outs.add("trajectory_compare.csv", trajectory_csv(&t2));
        outs.add(
            "metrics_compare.toml",
            toml::to_string(&MetricsFile::new(&m2, &of.strategy)).map_err(|e| fail(exit::SOFTWARE, e.to_string()))?,
        );
        let a = format!("{} (main)", gf.strategy);
        let b = format!("{} (compare)", of.strategy);
        let table = metrics_table(&[(&a, &m), (&b, &m2)]);
        outs.add("comparison.txt", table.clone());
        outs.add("plot.gp", gnuplot_script(n, &[("trajectory.csv", &a), ("trajectory_compare.csv", &b)]));
        inputs.push(compare.unwrap().display().to_string());
        table
    } else {
        outs.add("plot.gp", gnuplot_script(n, &[("trajectory.csv", &gf.strategy)]));
        metrics_table(&[(&gf.strategy, &m)])
    };
    let names = outs.names();
    outs.write(record("simulate", &lc, inputs, names, Some(gf.strategy.clone()), exit::OK))?;
    print!("{table}");
    Ok(exit::OK)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct MetricsFile {
    format_version: u32,
    strategy: String,
    #[serde(flatten)]
    metrics: Metrics,
}

impl MetricsFile {
    fn new(m: &Metrics, strategy: &str) -> Self {
        Self { format_version: declfc_core::io::FORMAT_VERSION, strategy: strategy.into(), metrics: m.clone() }
    }
}

struct RunDir {
    dir: PathBuf,
    gains: Option<GainsFile>,
    cert: Option<CertificateFile>,
    report: Option<ReportFile>,
    metrics: Option<MetricsFile>,
    has_trajectory: bool,
    manifest: Option<RunManifest>,
}

impl RunDir {
    fn load(dir: &Path) -> Self {
        let read = |n: &str| std::fs::read_to_string(dir.join(n)).ok();
        RunDir {
            dir: dir.to_path_buf(),
            gains: read("gains.toml").and_then(|t| GainsFile::from_toml_str(&t).ok()),
            cert: read("certificate.toml").and_then(|t| CertificateFile::from_toml_str(&t).ok()),
            report: read("report.toml").and_then(|t| ReportFile::from_toml_str(&t).ok()),
            metrics: read("metrics.toml").and_then(|t| toml::from_str(&t).ok()),
            has_trajectory: dir.join("trajectory.csv").is_file(),
            manifest: RunManifest::load(dir),
        }
    }

    fn missing(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.manifest.is_none() {
            v.push(MANIFEST);
        }
        if self.gains.is_none() {
            v.push("gains.toml");
        }
        if self.cert.is_none() {
            v.push("certificate.toml");
        }
        if self.report.is_none() {
            v.push("report.toml (run verify)");
        }
        if self.metrics.is_none() {
            v.push("metrics.toml (run simulate)");
        }
        if !self.has_trajectory {
            v.push("trajectory.csv (run simulate)");
        }
        v
    }

    fn passed(&self) -> bool {
        self.missing().is_empty()
            && self.gains.as_ref().is_some_and(|g| g.is_certified())
            && self.report.as_ref().is_some_and(|r| r.passed)
    }

    fn hinf(&self) -> Option<f64> {
        self.report.as_ref().and_then(|r| r.hinf_estimate)
    }

    fn margin(&self) -> Option<f64> {
        self.cert.as_ref().map(|c| c.solutions.iter().map(|s| s.margin).fold(f64::NEG_INFINITY, f64::max))
    }

    fn ise(&self) -> Option<f64> {
        self.metrics.as_ref().map(|m| m.metrics.ise_freq_total)
    }
}

fn describe(r: &RunDir, s: &mut String) {
    let _ = writeln!(s, "== run {}", r.dir.display());
    if let Some(m) = &r.manifest {
        let _ = writeln!(s, "tool version {}", m.tool_version);
        for c in &m.commands {
            let _ = writeln!(
                s,
                "  {} (exit {}) config {} sha256 {} -> {}",
                c.name,
                c.exit_code,
                c.config_path,
                &c.config_sha256[..12.min(c.config_sha256.len())],
                c.outputs.join(", ")
            );
        }
        if let Some(c) = m.commands.iter().rev().find(|c| c.name == "design") {
            let _ = writeln!(s, "spec gamma {} eps1 {} eps2 {} strips {}", c.design.gamma, c.design.eps1, c.design.eps2, c.design.strips.is_some());
        }
    }
    if let Some(g) = &r.gains {
        let _ = write!(s, "design: {} {}", g.strategy, g.status);
        if let Some(m) = g.margin {
            let _ = write!(s, " (margin {m:e}, blocking `{}`)", g.blocking.as_deref().unwrap_or("?"));
        }
        s.push('\n');
    }
    if let Some(c) = &r.cert {
        for sol in &c.solutions {
            let worst = sol.residual.iter().map(|x| x.lambda_max).fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(s, "certificate {}: max residual {worst:e}, {} iterations, gap {:e}", sol.label, sol.iterations, sol.gap);
        }
    }
    if let Some(rep) = &r.report {
        for c in &rep.checks {
            let _ = writeln!(s, "  check {:<16} {}", c.name, if c.passed { "PASS" } else { "FAIL" });
        }
        match (rep.hinf_estimate, &rep.hinf_error) {
            (Some(h), _) => {
                let _ = writeln!(s, "hinf estimate {h:.6} (gamma {})", rep.gamma);
            }
            (None, Some(e)) => {
                let _ = writeln!(s, "hinf undefined: {e}");
            }
            _ => {}
        }
    }
    if let Some(m) = &r.metrics {
        let _ = write!(s, "{}", metrics_table(&[(&m.strategy, &m.metrics)]));
    }
    let missing = r.missing();
    if !missing.is_empty() {
        let _ = writeln!(s, "missing: {}", missing.join(", "));
        if !r.has_trajectory {
            let _ = writeln!(s, "no simulation in this run");
        }
    }
    let _ = writeln!(s, "summary: {}", if r.passed() { "PASS" } else { "FAIL" });
}

pub fn report(dirs: &[PathBuf]) -> CmdResult {
    for d in dirs {
        if !d.is_dir() {
            return Err(fail(exit::NO_INPUT, format!("{}: not a directory", d.display())));
        }
    }
    let runs: Vec<RunDir> = dirs.iter().map(|d| RunDir::load(d)).collect();
    let mut s = String::from("# declfc report format-version 1\n");
    for r in &runs {
        describe(r, &mut s);
    }
    if let [a, b] = runs.as_slice() {
        let _ = writeln!(s, "== comparison");
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
        let diff = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => format!("{:+.6e}", y - x),
            _ => "-".into(),
        };
        let _ = writeln!(s, "{:<16}{:>16}{:>16}{:>16}", "quantity", "first", "second", "second-first");
        for (name, x, y) in [("solver margin", a.margin(), b.margin()), ("hinf estimate", a.hinf(), b.hinf()), ("ISE df total", a.ise(), b.ise())] {
            let _ = writeln!(s, "{name:<16}{:>16}{:>16}{:>16}", fmt(x), fmt(y), diff(x, y));
        }
    }
    print!("{s}");
    for r in &runs {
        let path = r.dir.join("summary.txt");
        std::fs::write(&path, &s).map_err(|e| fail(exit::CANT_CREATE, format!("{}: {e}", path.display())))?;
    }
    Ok(if runs.iter().all(|r| r.missing().is_empty()) { exit::OK } else { exit::NO_INPUT })
}

