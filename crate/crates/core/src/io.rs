//! Run configuration and artifact files (TOML, CSV).
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so
//! every file re-reads to bit-identical values.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{eigen_rows, VerificationReport};
use crate::error::{Error, Result};
use crate::model::{build_system, default_output_selection, AreaParams, CompositeSystem, OutputSelection, TieLineMatrix};
use crate::numlin::Matrix;
use crate::scalar::Scalar;
use crate::sdp::{LmiSolution, SolverOptions, DEFAULT_PD_FLOOR};
use crate::sim::{csv_header, csv_row, DisturbanceSchedule, LoadEvent, SimConfig, Trajectory};
use crate::synthesis::{
    AreaGains, Design, DesignOptions, DesignSpec, DesignStatus, GainSet, Strategy, Strip, Strips, BEST_EFFORT_PD_FLOOR,
};

pub const FORMAT_VERSION: u32 = 1;

/// Bundled three-area system with the γ = 7.5 scenario.
pub const CASE1_TOML: &str = include_str!("../fixtures/three_area_case1.toml");
/// Bundled three-area system with strips and the γ = 1 scenario.
pub const CASE2_TOML: &str = include_str!("../fixtures/three_area_case2.toml");

fn format_error(what: &str, e: impl std::fmt::Display) -> Error {
    Error::Format(format!("{what}: {e}"))
}

fn check_version(found: u32, what: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::Format(format!("{what}: format_version {found} not supported (expected {FORMAT_VERSION})")));
    }
    Ok(())
}

fn one() -> u32 {
    FORMAT_VERSION
}

/// One tie line, areas numbered from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TieEntry {
    pub i: usize,
    pub j: usize,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripSection {
    /// `[a, b]` per area, or a single pair applied to every area.
    pub control: Vec<[f64; 2]>,
    pub observer: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub gamma: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub strips: Option<StripSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub eps_feas: f64,
    pub max_iter: usize,
    pub gap_tol: f64,
    pub box_radius: f64,
    pub step_fraction: f64,
    pub pd_floor: f64,
    pub best_effort: bool,
    pub best_effort_pd_floor: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverOptions::<f64>::default();
        Self {
            eps_feas: s.eps_feas,
            max_iter: s.max_iter,
            gap_tol: s.gap_tol,
            box_radius: s.box_radius,
            step_fraction: s.step_fraction,
            pd_floor: DEFAULT_PD_FLOOR,
            best_effort: false,
            best_effort_pd_floor: BEST_EFFORT_PD_FLOOR,
        }
    }
}

/// A load step, area numbered from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventEntry {
    pub time: f64,
    pub area: usize,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub t_end: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub stride: Option<usize>,
    #[serde(default, rename = "event")]
    pub events: Vec<EventEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub cx_diag: Option<Vec<f64>>,
    pub ce_diag: Option<Vec<f64>>,
}

/// Run configuration: areas, tie lines, design scalars, solver options,
/// simulation schedule and optional output weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "one")]
    pub format_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(rename = "area")]
    pub areas: Vec<AreaParams<f64>>,
    #[serde(default, rename = "tie")]
    pub ties: Vec<TieEntry>,
    pub design: DesignSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
}

impl Config {
    /// Parses and fully validates (system, spec, schedule are all built once).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| format_error("config", e))?;
        check_version(cfg.format_version, "config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| format_error(&path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| format_error("config", e))
    }

    /// Canonical text of the plant part (areas, tie lines, output weights),
    /// for compatibility hashing.
    pub fn plant_text(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Plant<'a> {
            area: &'a [AreaParams<f64>],
            tie: &'a [TieEntry],
            output: &'a Option<OutputSection>,
        }
        toml::to_string(&Plant { area: &self.areas, tie: &self.ties, output: &self.output }).map_err(|e| format_error("config", e))
    }

    pub fn validate(&self) -> Result<()> {
        let sys = self.system::<f64>()?;
        self.output_selection(&sys)?;
        self.spec::<f64>()?.validate(sys.n_areas)?;
        if let Some(sim) = &self.simulation {
            self.sim_config()?.validate()?;
            let sched = self.schedule()?;
            for e in sched.events() {
                if e.time > sim.t_end {
                    return Err(Error::Schedule(format!("event at t = {} is after t_end = {}", e.time, sim.t_end)));
                }
            }
        }
        let s = &self.solver;
        if !(s.pd_floor >= 0.0 && s.best_effort_pd_floor >= 0.0 && s.eps_feas > 0.0 && s.box_radius > 0.0) {
            return Err(Error::Parameter { field: "solver".into(), reason: "floors must be >= 0, tolerances > 0".into() });
        }
        if !(s.step_fraction > 0.0 && s.step_fraction < 1.0) {
            return Err(Error::Parameter { field: "solver.step_fraction".into(), reason: "must be in (0, 1)".into() });
        }
        Ok(())
    }

    pub fn n_areas(&self) -> usize {
        self.areas.len()
    }

    pub fn tie_matrix<T: Scalar>(&self) -> Result<TieLineMatrix<T>> {
        let n = self.n_areas();
        let mut entries = Vec::new();
        for e in &self.ties {
            if e.i == 0 || e.j == 0 || e.i > n || e.j > n || e.i == e.j {
                return Err(Error::Parameter {
                    field: "tie".into(),
                    reason: format!("entry ({}, {}) invalid for {n} areas (numbered from 1)", e.i, e.j),
                });
            }
            if entries.iter().any(|&(a, b, _): &(usize, usize, T)| (a, b) == (e.i - 1, e.j - 1) || (b, a) == (e.i - 1, e.j - 1)) {
                return Err(Error::Parameter { field: "tie".into(), reason: format!("duplicate entry ({}, {})", e.i, e.j) });
            }
            entries.push((e.i - 1, e.j - 1, T::lit(e.t)));
        }
        TieLineMatrix::from_entries(n, &entries)
    }

    pub fn system<T: Scalar>(&self) -> Result<CompositeSystem<T>> {
        if self.areas.is_empty() {
            return Err(Error::Parameter { field: "area".into(), reason: "at least one area required".into() });
        }
        let params: Vec<AreaParams<T>> = self
            .areas
            .iter()
            .map(|p| AreaParams {
                m: T::lit(p.m),
                d: T::lit(p.d),
                t_g: T::lit(p.t_g),
                t_ch: T::lit(p.t_ch),
                r: T::lit(p.r),
                beta: T::lit(p.beta),
            })
            .collect();
        build_system(&params, &self.tie_matrix()?)
    }

    pub fn output_selection<T: Scalar>(&self, sys: &CompositeSystem<T>) -> Result<OutputSelection<T>> {
        let Some(o) = &self.output else { return Ok(default_output_selection(sys)) };
        let n = sys.n();
        let weights = |w: &Option<Vec<f64>>, field: &str| -> Result<Vec<T>> {
            match w {
                None => Ok(vec![T::one(); n]),
                Some(v) if v.len() == n => Ok(v.iter().map(|&x| T::lit(x)).collect()),
                Some(v) => Err(Error::Parameter {
                    field: format!("output.{field}"),
                    reason: format!("{} weights for {n} states", v.len()),
                }),
            }
        };
        OutputSelection::from_diagonal_weights(sys.n_areas, &weights(&o.cx_diag, "cx_diag")?, &weights(&o.ce_diag, "ce_diag")?)
    }

    pub fn strips<T: Scalar>(&self) -> Result<Option<Strips<T>>> {
        let Some(s) = &self.design.strips else { return Ok(None) };
        let n = self.n_areas();
        let expand = |v: &[[f64; 2]], field: &str| -> Result<Vec<Strip<T>>> {
            let pairs: Vec<[f64; 2]> = match v.len() {
                1 => vec![v[0]; n],
                k if k == n => v.to_vec(),
                k => {
                    return Err(Error::Parameter {
                        field: format!("design.strips.{field}"),
                        reason: format!("{k} strips for {n} areas (give 1 or {n})"),
                    })
                }
            };
            Ok(pairs.iter().map(|p| Strip::new(T::lit(p[0]), T::lit(p[1]))).collect())
        };
        let strips = Strips { control: expand(&s.control, "control")?, observer: expand(&s.observer, "observer")? };
        strips.validate(n)?;
        Ok(Some(strips))
    }

    pub fn spec<T: Scalar>(&self) -> Result<DesignSpec<T>> {
        let d = &self.design;
        let spec = DesignSpec { gamma: T::lit(d.gamma), eps1: T::lit(d.eps1), eps2: T::lit(d.eps2), strips: self.strips()? };
        spec.validate(self.n_areas())?;
        Ok(spec)
    }

    pub fn design_options<T: Scalar>(&self) -> DesignOptions<T> {
        let s = &self.solver;
        DesignOptions {
            solver: SolverOptions {
                eps_feas: T::lit(s.eps_feas),
                max_iter: s.max_iter,
                gap_tol: T::lit(s.gap_tol),
                box_radius: T::lit(s.box_radius),
                step_fraction: T::lit(s.step_fraction),
            },
            pd_floor: T::lit(s.pd_floor),
            best_effort: s.best_effort,
            best_effort_pd_floor: T::lit(s.best_effort_pd_floor),
        }
    }

    pub fn schedule(&self) -> Result<DisturbanceSchedule> {
        let Some(sim) = &self.simulation else { return Ok(DisturbanceSchedule::default()) };
        let n = self.n_areas();
        let mut events = Vec::new();
        for e in &sim.events {
            if e.area == 0 || e.area > n {
                return Err(Error::Schedule(format!("event at t = {} targets area {} of {n}", e.time, e.area)));
            }
            events.push(LoadEvent { time: e.time, area: e.area - 1, magnitude: e.magnitude });
        }
        DisturbanceSchedule::new(events)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let Some(sim) = &self.simulation else {
            return Err(Error::Parameter { field: "simulation".into(), reason: "section missing".into() });
        };
        let mut c = SimConfig::new(sim.t_end);
        if let Some(dt) = sim.dt {
            c.dt = dt;
        }
        if let Some(s) = sim.stride {
            c.stride = s;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Matrix as a list of rows of `f64`.
pub type Rows = Vec<Vec<f64>>;

fn to_rows<T: Scalar>(m: &Matrix<T>) -> Rows {
    m.to_rows().into_iter().map(|r| r.into_iter().map(|v| v.to_f64_lossy()).collect()).collect()
}

fn from_rows<T: Scalar>(rows: &Rows, what: &str) -> Result<Matrix<T>> {
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Format(format!("{what}: ragged rows")));
    }
    let data = rows.iter().flatten().map(|&v| T::lit(v)).collect();
    Matrix::from_vec(rows.len(), cols, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaGainsRecord {
    pub k: Rows,
    pub h: Rows,
    pub psi: Rows,
    pub phi: Rows,
    pub g: Rows,
    pub l1: Rows,
    pub l2: Rows,
    pub l: Rows,
    pub z: Rows,
    pub q: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsFile {
    pub format_version: u32,
    pub strategy: String,
    /// `certified` or `best-effort`.
    pub status: String,
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default)]
    pub blocking: Option<String>,
    /// Hash of the configuration the gains were designed for.
    #[serde(default)]
    pub config_hash: Option<String>,
    /// Hash of the plant part of that configuration (areas, tie lines,
    /// output weights); gains are only compatible with a matching plant.
    #[serde(default)]
    pub plant_hash: Option<String>,
    #[serde(rename = "area")]
    pub areas: Vec<AreaGainsRecord>,
}

impl GainsFile {
    pub fn from_design<T: Scalar>(d: &Design<T>) -> Result<Self> {
        let (status, margin, blocking) = match &d.status {
            DesignStatus::Certified => ("certified", None, None),
            DesignStatus::BestEffort { margin, blocking } => ("best-effort", Some(margin.to_f64_lossy()), Some(blocking.clone())),
        };
        let mut f = Self::from_gains(&d.gains, d.strategy)?;
        f.status = status.into();
        f.margin = margin;
        f.blocking = blocking;
        Ok(f)
    }

    pub fn from_gains<T: Scalar>(g: &GainSet<T>, strategy: Strategy) -> Result<Self> {
        let mut areas = Vec::new();
        for (i, a) in g.areas.iter().enumerate() {
            for (name, m) in [("K", &a.k), ("Z", &a.z), ("Q", &a.q), ("L", &a.l), ("Phi", &a.phi)] {
                m.ensure_finite(&format!("area {} {name}", i + 1))?;
            }
            areas.push(AreaGainsRecord {
                k: to_rows(&a.k),
                h: to_rows(&a.h),
                psi: to_rows(&a.psi),
                phi: to_rows(&a.phi),
                g: to_rows(&a.g),
                l1: to_rows(&a.l1),
                l2: to_rows(&a.l2),
                l: to_rows(&a.l),
                z: to_rows(&a.z),
                q: to_rows(&a.q),
            });
        }
        Ok(Self {
            format_version: FORMAT_VERSION,
            strategy: strategy.as_str().into(),
            status: "certified".into(),
            margin: None,
            blocking: None,
            config_hash: None,
            plant_hash: None,
            areas,
        })
    }

    pub fn gains<T: Scalar>(&self) -> Result<GainSet<T>> {
        let mut areas = Vec::new();
        for (i, a) in self.areas.iter().enumerate() {
            let m = |rows: &Rows, name: &str| from_rows::<T>(rows, &format!("area {} {name}", i + 1));
            areas.push(AreaGains {
                k: m(&a.k, "k")?,
                h: m(&a.h, "h")?,
                psi: m(&a.psi, "psi")?,
                phi: m(&a.phi, "phi")?,
                g: m(&a.g, "g")?,
                l1: m(&a.l1, "l1")?,
                l2: m(&a.l2, "l2")?,
                l: m(&a.l, "l")?,
                z: m(&a.z, "z")?,
                q: m(&a.q, "q")?,
            });
        }
        Ok(GainSet { areas })
    }

    pub fn is_certified(&self) -> bool {
        self.status == "certified"
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: Self = toml::from_str(text).map_err(|e| format_error("gains file", e))?;
        check_version(f.format_version, "gains file")?;
        if f.status != "certified" && f.status != "best-effort" {
            return Err(Error::Format(format!("gains file: unknown status `{}`", f.status)));
        }
        Ok(f)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| format_error("gains file", e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualRecord {
    pub lmi: String,
    pub lambda_max: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionRecord {
    pub label: String,
    pub margin: f64,
    pub scaled_margin: f64,
    pub blocking: String,
    pub iterations: usize,
    pub step_norm: f64,
    pub gap: f64,
    pub residual: Vec<ResidualRecord>,
    pub x: Vec<f64>,
}

/// Solver output for every solved problem of a design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub format_version: u32,
    pub strategy: String,
    pub status: String,
    #[serde(rename = "solution")]
    pub solutions: Vec<SolutionRecord>,
}

impl CertificateFile {
    pub fn from_design<T: Scalar>(d: &Design<T>) -> Self {
        let label = |k: usize| match d.strategy {
            Strategy::Integrated => "integrated".to_string(),
            Strategy::Separated => format!("area{}", k + 1),
        };
        let solutions = d.solutions.iter().enumerate().map(|(k, s)| solution_record(s, label(k))).collect();
        let status = if d.status.is_certified() { "certified" } else { "best-effort" };
        Self { format_version: FORMAT_VERSION, strategy: d.strategy.as_str().into(), status: status.into(), solutions }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: Self = toml::from_str(text).map_err(|e| format_error("certificate", e))?;
        check_version(f.format_version, "certificate")?;
        Ok(f)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| format_error("certificate", e))
    }
}

fn solution_record<T: Scalar>(s: &LmiSolution<T>, label: String) -> SolutionRecord {
    SolutionRecord {
        label,
        margin: s.margin.to_f64_lossy(),
        scaled_margin: s.scaled_margin().to_f64_lossy(),
        blocking: s.blocking.clone(),
        iterations: s.iterations,
        step_norm: s.step_norm.to_f64_lossy(),
        gap: s.gap.to_f64_lossy(),
        residual: s
            .residuals
            .iter()
            .zip(&s.scales)
            .map(|((n, r), sc)| ResidualRecord { lmi: n.clone(), lambda_max: r.to_f64_lossy(), scale: sc.to_f64_lossy() })
            .collect(),
        x: s.x.iter().map(|v| v.to_f64_lossy()).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub format_version: u32,
    pub passed: bool,
    pub gamma: f64,
    #[serde(default)]
    pub hinf_estimate: Option<f64>,
    #[serde(default)]
    pub hinf_omega: Option<f64>,
    #[serde(default)]
    pub hinf_error: Option<String>,
    pub max_real: f64,
    pub marginal_modes: usize,
    pub theorem1_residual: f64,
    pub identity_residual: f64,
    pub decoupling_residual: f64,
    #[serde(default)]
    pub strip_control_interval: Option<[f64; 2]>,
    #[serde(default)]
    pub strip_control_outside: Option<usize>,
    #[serde(default)]
    pub strip_observer_outside: Option<usize>,
    #[serde(rename = "check")]
    pub checks: Vec<CheckRecord>,
}

impl ReportFile {
    pub fn from_report<T: Scalar>(r: &VerificationReport<T>) -> Self {
        let (hv, hw, he) = match &r.hinf {
            Ok(h) => (Some(h.value.to_f64_lossy()), Some(h.omega.to_f64_lossy()), None),
            Err(e) => (None, None, Some(e.clone())),
        };
        Self {
            format_version: FORMAT_VERSION,
            passed: r.passed(),
            gamma: r.gamma.to_f64_lossy(),
            hinf_estimate: hv,
            hinf_omega: hw,
            hinf_error: he,
            max_real: r.max_real.to_f64_lossy(),
            marginal_modes: r.marginal_modes,
            theorem1_residual: r.theorem1_residual.to_f64_lossy(),
            identity_residual: r.identity_residual.to_f64_lossy(),
            decoupling_residual: r.decoupling_residual.to_f64_lossy(),
            strip_control_interval: r
                .strips
                .as_ref()
                .map(|s| [s.control_interval.a.to_f64_lossy(), s.control_interval.b.to_f64_lossy()]),
            strip_control_outside: r.strips.as_ref().map(|s| s.control.iter().filter(|v| !v.inside).count()),
            strip_observer_outside: r.strips.as_ref().map(|s| s.observer.iter().filter(|v| !v.inside).count()),
            checks: r.checks().into_iter().map(|(n, p)| CheckRecord { name: n.into(), passed: p }).collect(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: Self = toml::from_str(text).map_err(|e| format_error("report", e))?;
        check_version(f.format_version, "report")?;
        Ok(f)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| format_error("report", e))
    }
}

/// `# declfc <kind> format-version 1` first line of every CSV.
pub fn csv_version_line(kind: &str) -> String {
    format!("# declfc {kind} format-version {FORMAT_VERSION}")
}

pub fn eigen_csv<T: Scalar>(r: &VerificationReport<T>) -> String {
    let mut s = csv_version_line("eigenvalues");
    s.push_str("\nre,im,block\n");
    for (re, im, b) in eigen_rows(r) {
        let _ = writeln!(s, "{},{},{b}", re.to_f64_lossy(), im.to_f64_lossy());
    }
    s
}

pub fn trajectory_csv<T: Scalar>(t: &Trajectory<T>) -> String {
    let mut s = csv_version_line("trajectory");
    s.push('\n');
    s.push_str(&csv_header(t.n_areas).join(","));
    s.push('\n');
    for k in 0..t.len() {
        let row: Vec<String> = csv_row(t, k).iter().map(|v| v.to_f64_lossy().to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Reads a trajectory CSV back as `(header, rows)`.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Format("csv: empty".into()))?.split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().map_err(|e| format_error("csv", e))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}
