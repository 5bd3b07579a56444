//! Fixed-step simulation of the decentralized implementation: plant, per-area
//! observers `ż_i = Φ_i z_i + G_i u_i + L_i y_i` and `u_i = −K_i x̂_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompositeSystem, AREA_STATES, STATE_FREQ, STATE_LABELS, STATE_TIE};
use crate::numlin::{eig, Matrix};
use crate::scalar::Scalar;
use crate::synthesis::GainSet;

/// Band used for settling times and regulation checks (p.u.).
pub const REGULATION_BAND: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadEvent {
    pub time: f64,
    /// 0-based area index.
    pub area: usize,
    pub magnitude: f64,
}

/// Step load changes; steps accumulate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DisturbanceSchedule {
    events: Vec<LoadEvent>,
}

impl DisturbanceSchedule {
    pub fn new(events: Vec<LoadEvent>) -> Result<Self> {
        for (k, e) in events.iter().enumerate() {
            if !(e.time >= 0.0) || !e.time.is_finite() || !e.magnitude.is_finite() {
                return Err(Error::Schedule(format!("event {k}: time {} / magnitude {} invalid", e.time, e.magnitude)));
            }
            if k > 0 && e.time < events[k - 1].time {
                return Err(Error::Schedule(format!("event {k} at t = {} precedes the one before it", e.time)));
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[LoadEvent] {
        &self.events
    }

    /// Distinct event times, ascending.
    pub fn event_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.events.iter().map(|e| e.time).collect();
        t.dedup();
        t
    }

    /// Accumulated disturbance vector at time `t` (events at `t` included).
    pub fn level_at(&self, n_areas: usize, t: f64) -> Vec<f64> {
        let mut d = vec![0.0; n_areas];
        for e in self.events.iter().take_while(|e| e.time <= t) {
            d[e.area] += e.magnitude;
        }
        d
    }

    fn validate_for(&self, n_areas: usize, t_end: f64) -> Result<()> {
        for e in &self.events {
            if e.area >= n_areas {
                return Err(Error::Schedule(format!("event at t = {} targets area {} of {n_areas}", e.time, e.area + 1)));
            }
            if e.time > t_end {
                return Err(Error::Schedule(format!("event at t = {} is after t_end = {t_end}", e.time)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Record every `stride` steps.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    10
}

impl SimConfig {
    pub fn new(t_end: f64) -> Self {
        Self { t_end, dt: default_dt(), stride: default_stride() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter { field: "t_end".into(), reason: format!("must be positive, got {}", self.t_end) });
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::Parameter { field: "dt".into(), reason: format!("must be in (0, t_end], got {}", self.dt) });
        }
        if self.stride == 0 {
            return Err(Error::Parameter { field: "stride".into(), reason: "must be at least 1".into() });
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Recorded samples. Vectors are indexed `[sample][state]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub time: Vec<T>,
    pub x: Vec<Vec<T>>,
    pub z: Vec<Vec<T>>,
    pub xhat: Vec<Vec<T>>,
    pub e: Vec<Vec<T>>,
    pub u: Vec<Vec<T>>,
    pub d: Vec<Vec<T>>,
    pub n_areas: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Plant state `state` of area `area` over time.
    pub fn signal(&self, area: usize, state: usize) -> Vec<T> {
        self.x.iter().map(|x| x[area * AREA_STATES + state]).collect()
    }
}

/// Linear map of the coupled system `ṡ = M s + N d` over `s = [x; z]`.
fn coupled_system<T: Scalar>(sys: &CompositeSystem<T>, gains: &GainSet<T>) -> (Matrix<T>, Matrix<T>) {
    let n = sys.n();
    let a = sys.a_total();
    let (k, h, c) = (gains.k(), gains.h(), &sys.c);
    let (phi, g, l) = (gains.phi(), gains.g(), gains.l());
    // u = −K(z + HCx)
    let khc = k.matmul(&h).matmul(c);
    let mut m = Matrix::zeros(2 * n, 2 * n);
    m.set_block(0, 0, &(&a - &sys.b.matmul(&khc)));
    m.set_block(0, n, &-&sys.b.matmul(&k));
    m.set_block(n, 0, &(&l.matmul(c) - &g.matmul(&khc)));
    m.set_block(n, n, &(&phi - &g.matmul(&k)));
    let nd = Matrix::vstack(&[&sys.f, &Matrix::zeros(n, sys.q())]);
    (m, nd)
}

/// One classical RK4 step of `ṡ = M s + N d` with `d` held constant is
/// `s⁺ = P s + R d`, `P = Σ_{k≤4} (hM)^k/k!`, `R = h Σ_{k≤3} (hM)^k/(k+1)! N`.
fn rk4_propagator<T: Scalar>(m: &Matrix<T>, nd: &Matrix<T>, h: T) -> (Matrix<T>, Matrix<T>) {
    let dim = m.rows();
    let hm = m.scale(h);
    let mut p = Matrix::identity(dim);
    let mut r = Matrix::identity(dim);
    let mut term = Matrix::identity(dim);
    for k in 1..=4usize {
        term = term.matmul(&hm).scale(T::one() / T::of(k));
        p = &p + &term;
        if k <= 3 {
            r = &r + &term.scale(T::one() / T::of(k + 1));
        }
    }
    (p, r.matmul(nd).scale(h))
}

/// RK4 amplification factor `1 + z + z²/2 + z³/6 + z⁴/24`.
fn rk4_amplification(z: num_complex::Complex<f64>) -> f64 {
    let one = num_complex::Complex::new(1.0, 0.0);
    (one + z * (one + z * (one / 2.0 + z * (one / 6.0 + z / 24.0)))).norm()
}

/// Smallest substep count keeping every decaying mode of `m` inside the RK4
/// stability region at step `dt / s`.
fn rk4_substeps<T: Scalar>(m: &Matrix<T>, dt: f64) -> Result<usize> {
    let modes: Vec<_> = eig(m)?
        .values
        .iter()
        .map(|v| num_complex::Complex::new(v.re.to_f64_lossy(), v.im.to_f64_lossy()))
        .filter(|v| v.re < 0.0)
        .collect();
    for s in (0..=16).map(|k| 1usize << k) {
        let h = dt / s as f64;
        if modes.iter().all(|&l| rk4_amplification(l * h) <= 1.0) {
            return Ok(s);
        }
    }
    Err(Error::Parameter { field: "dt".into(), reason: format!("{dt} s is too large even with 65536 substeps") })
}

/// Propagator over `s` RK4 substeps of `h / s` each.
fn rk4_propagator_substepped<T: Scalar>(m: &Matrix<T>, nd: &Matrix<T>, h: T, s: usize) -> (Matrix<T>, Matrix<T>) {
    let (p1, r1) = rk4_propagator(m, nd, h / T::of(s));
    let (mut p, mut r) = (p1.clone(), r1.clone());
    for _ in 1..s {
        r = &p1.matmul(&r) + &r1;
        p = p1.matmul(&p);
    }
    (p, r)
}

/// Generic RK4 step, used to cross-check the propagator.
pub fn rk4_step<T: Scalar>(f: impl Fn(&[T]) -> Vec<T>, s: &[T], h: T) -> Vec<T> {
    let half = h / T::lit(2.0);
    let axpy = |a: &[T], b: &[T], c: T| a.iter().zip(b).map(|(&x, &y)| x + c * y).collect::<Vec<_>>();
    let k1 = f(s);
    let k2 = f(&axpy(s, &k1, half));
    let k3 = f(&axpy(s, &k2, half));
    let k4 = f(&axpy(s, &k3, h));
    (0..s.len())
        .map(|i| s[i] + h / T::lit(6.0) * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]))
        .collect()
}

/// Simulates from zero initial state.
pub fn simulate<T: Scalar>(
    sys: &CompositeSystem<T>,
    gains: &GainSet<T>,
    sched: &DisturbanceSchedule,
    cfg: &SimConfig,
) -> Result<Trajectory<T>> {
    simulate_from(sys, gains, sched, cfg, None)
}

/// Simulates from `[x0; z0]` (zero when `None`).
pub fn simulate_from<T: Scalar>(
    sys: &CompositeSystem<T>,
    gains: &GainSet<T>,
    sched: &DisturbanceSchedule,
    cfg: &SimConfig,
    initial: Option<&[T]>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    gains.check_compatible(sys)?;
    sched.validate_for(sys.n_areas, cfg.t_end)?;
    let n = sys.n();
    let na = sys.n_areas;
    let (m, nd) = coupled_system(sys, gains);
    let h = T::lit(cfg.dt);
    let substeps = rk4_substeps(&m, cfg.dt)?;
    if substeps > 1 {
        log::warn!("fastest mode needs {substeps} RK4 substeps per dt = {} s", cfg.dt);
    }
    let (prop, rin) = rk4_propagator_substepped(&m, &nd, h, substeps);
    let steps = cfg.steps();

    // event step indices, snapped to the grid
    let mut changes: Vec<(usize, Vec<T>)> = Vec::new();
    for t in sched.event_times() {
        let k = (t / cfg.dt).round() as usize;
        if (k as f64 * cfg.dt - t).abs() > 1e-9 * t.max(1.0) {
            log::warn!("event at t = {t} s snapped to grid point {} s", k as f64 * cfg.dt);
        }
        let level = sched.level_at(na, t).into_iter().map(T::lit).collect();
        match changes.last_mut() {
            Some((kk, lv)) if *kk == k => *lv = level,
            _ => changes.push((k, level)),
        }
    }

    let mut s = match initial {
        Some(v) if v.len() == 2 * n => v.to_vec(),
        Some(v) => return Err(Error::Dimension(format!("initial state has {} entries, expected {}", v.len(), 2 * n))),
        None => vec![T::zero(); 2 * n],
    };
    let mut d = vec![T::zero(); na];
    let mut next = 0;
    let (k_mat, h_mat) = (gains.k(), gains.h());
    let mut traj = Trajectory {
        time: Vec::new(),
        x: Vec::new(),
        z: Vec::new(),
        xhat: Vec::new(),
        e: Vec::new(),
        u: Vec::new(),
        d: Vec::new(),
        n_areas: na,
    };
    let record = |k: usize, s: &[T], d: &[T], traj: &mut Trajectory<T>| {
        let x = s[..n].to_vec();
        let z = s[n..].to_vec();
        let hy = h_mat.mul_vec(&sys.c.mul_vec(&x));
        let xhat: Vec<T> = z.iter().zip(&hy).map(|(&a, &b)| a + b).collect();
        let e = x.iter().zip(&xhat).map(|(&a, &b)| a - b).collect();
        let u = k_mat.mul_vec(&xhat).into_iter().map(|v| -v).collect();
        traj.time.push(T::of(k) * h);
        traj.x.push(x);
        traj.z.push(z);
        traj.xhat.push(xhat);
        traj.e.push(e);
        traj.u.push(u);
        traj.d.push(d.to_vec());
    };
    for k in 0..=steps {
        while next < changes.len() && changes[next].0 <= k {
            d = changes[next].1.clone();
            next += 1;
        }
        if k % cfg.stride == 0 || k == steps {
            record(k, &s, &d, &mut traj);
        }
        if k == steps {
            break;
        }
        let mut s_next = prop.mul_vec(&s);
        for (v, r) in s_next.iter_mut().zip(rin.mul_vec(&d)) {
            *v = *v + r;
        }
        if s_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { time: (k + 1) as f64 * cfg.dt });
        }
        s = s_next;
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaMetrics {
    pub peak_freq: f64,
    pub peak_tie: f64,
    /// Time after which `|Δf|` stays inside the band; `None` if it never settles.
    pub settle_freq: Option<f64>,
    pub settle_tie: Option<f64>,
    pub ise_freq: f64,
    pub ise_tie: f64,
    pub ise_control: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub band: f64,
    pub areas: Vec<AreaMetrics>,
    pub ise_freq_total: f64,
}

/// Trapezoidal integral of `v²` over `t`.
pub fn ise<T: Scalar>(t: &[T], v: &[T]) -> f64 {
    t.windows(2)
        .zip(v.windows(2))
        .map(|(tt, vv)| {
            let (a, b) = (vv[0].to_f64_lossy(), vv[1].to_f64_lossy());
            0.5 * (tt[1] - tt[0]).to_f64_lossy() * (a * a + b * b)
        })
        .sum()
}

/// First sample time after the last excursion outside `±band`; `Some(t0)`
/// when the signal never leaves the band, `None` when it ends outside.
pub fn settling_time<T: Scalar>(t: &[T], v: &[T], band: f64) -> Option<f64> {
    let last_out = v.iter().rposition(|x| x.to_f64_lossy().abs() >= band);
    match last_out {
        None => t.first().map(|x| x.to_f64_lossy()),
        Some(k) if k + 1 < t.len() => Some(t[k + 1].to_f64_lossy()),
        Some(_) => None,
    }
}

pub fn metrics<T: Scalar>(traj: &Trajectory<T>) -> Metrics {
    let band = REGULATION_BAND;
    let peak = |v: &[T]| v.iter().map(|x| x.to_f64_lossy().abs()).fold(0.0, f64::max);
    let areas: Vec<AreaMetrics> = (0..traj.n_areas)
        .map(|i| {
            let f = traj.signal(i, STATE_FREQ);
            let tie = traj.signal(i, STATE_TIE);
            let u: Vec<T> = traj.u.iter().map(|u| u[i]).collect();
            AreaMetrics {
                peak_freq: peak(&f),
                peak_tie: peak(&tie),
                settle_freq: settling_time(&traj.time, &f, band),
                settle_tie: settling_time(&traj.time, &tie, band),
                ise_freq: ise(&traj.time, &f),
                ise_tie: ise(&traj.time, &tie),
                ise_control: ise(&traj.time, &u),
            }
        })
        .collect();
    let ise_freq_total = areas.iter().map(|a| a.ise_freq).sum();
    Metrics { band, areas, ise_freq_total }
}

/// Worst `|Δf_i|`, `|ΔP_tie,i|` at the last sample before each event after
/// the first, and at the final sample.
#[derive(Clone, Debug, PartialEq)]
pub struct RegulationCheck {
    pub checkpoints: Vec<(f64, f64)>,
    pub band: f64,
}

impl RegulationCheck {
    pub fn passed(&self) -> bool {
        self.checkpoints.iter().all(|&(_, v)| v < self.band)
    }

    pub fn worst(&self) -> f64 {
        self.checkpoints.iter().map(|c| c.1).fold(0.0, f64::max)
    }
}

pub fn regulation_check<T: Scalar>(traj: &Trajectory<T>, sched: &DisturbanceSchedule, band: f64) -> RegulationCheck {
    let worst_at = |k: usize| {
        (0..traj.n_areas)
            .flat_map(|i| [STATE_FREQ, STATE_TIE].map(|s| traj.x[k][i * AREA_STATES + s].to_f64_lossy().abs()))
            .fold(0.0, f64::max)
    };
    let mut checkpoints = Vec::new();
    for t in sched.event_times().into_iter().skip(1) {
        if let Some(k) = traj.time.iter().rposition(|x| x.to_f64_lossy() < t - 1e-12) {
            checkpoints.push((traj.time[k].to_f64_lossy(), worst_at(k)));
        }
    }
    if let Some(k) = traj.len().checked_sub(1) {
        checkpoints.push((traj.time[k].to_f64_lossy(), worst_at(k)));
    }
    RegulationCheck { checkpoints, band }
}

/// CSV column names: time, then per-area plant states, estimation errors and inputs.
pub fn csv_header(n_areas: usize) -> Vec<String> {
    let mut h = vec!["time".to_string()];
    for i in 1..=n_areas {
        h.extend(STATE_LABELS.iter().map(|s| format!("{s}_{i}")));
    }
    for i in 1..=n_areas {
        h.extend(STATE_LABELS.iter().map(|s| format!("e_{s}_{i}")));
    }
    h.extend((1..=n_areas).map(|i| format!("u_{i}")));
    h.extend((1..=n_areas).map(|i| format!("d_{i}")));
    h
}

pub fn csv_row<T: Scalar>(traj: &Trajectory<T>, k: usize) -> Vec<T> {
    let mut r = vec![traj.time[k]];
    r.extend_from_slice(&traj.x[k]);
    r.extend_from_slice(&traj.e[k]);
    r.extend_from_slice(&traj.u[k]);
    r.extend_from_slice(&traj.d[k]);
    r
}
