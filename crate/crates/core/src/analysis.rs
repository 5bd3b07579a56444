//! Closed-loop realization over `[x; e]` and post-hoc design checks.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{CompositeSystem, OutputSelection};
use crate::numlin::{complex_embedding, eig, inverse, sigma_max, sigma_min, solve_linear, sym_max_eig, Matrix};
use crate::scalar::Scalar;
use crate::synthesis::{DesignSpec, GainSet, Strip, Strips};

/// Slack on strip boundaries when classifying eigenvalues.
pub const STRIP_SLACK: f64 = 1e-6;

/// Relative threshold below which a mode counts as marginal (`Re λ ≥ −tol·‖A‖`).
pub const MARGINAL_REL: f64 = 1e-9;

/// `ẋ = Acl x + Bcl d`, `z_c = Ccl x` over the state `[x; e]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopRealization<T> {
    pub acl: Matrix<T>,
    pub bcl: Matrix<T>,
    pub ccl: Matrix<T>,
}

impl<T: Scalar> ClosedLoopRealization<T> {
    pub fn n(&self) -> usize {
        self.acl.rows()
    }
}

/// `A − BK`, optionally with the interaction term `ΔA`.
pub fn control_matrix<T: Scalar>(sys: &CompositeSystem<T>, gains: &GainSet<T>, interactions: bool) -> Matrix<T> {
    let local = &sys.a - &sys.b.matmul(&gains.k());
    if interactions {
        &local + &sys.da
    } else {
        local
    }
}

/// `ΨA − L1C` (block diagonal).
pub fn observer_matrix<T: Scalar>(sys: &CompositeSystem<T>, gains: &GainSet<T>) -> Matrix<T> {
    &gains.psi().matmul(&sys.a) - &gains.l1().matmul(&sys.c)
}

pub fn build_closed_loop<T: Scalar>(
    sys: &CompositeSystem<T>,
    gains: &GainSet<T>,
    out: &OutputSelection<T>,
) -> Result<ClosedLoopRealization<T>> {
    gains.check_compatible(sys)?;
    let n = sys.n();
    if out.cx.shape() != (n, n) || out.ce.shape() != (n, n) {
        return Err(Error::Dimension(format!("output selection is not {n}x{n}")));
    }
    let psi = gains.psi();
    let bk = sys.b.matmul(&gains.k());
    let mut acl = Matrix::zeros(2 * n, 2 * n);
    acl.set_block(0, 0, &control_matrix(sys, gains, true));
    acl.set_block(0, n, &bk);
    acl.set_block(n, 0, &psi.matmul(&sys.da));
    acl.set_block(n, n, &observer_matrix(sys, gains));
    let bcl = Matrix::vstack(&[&sys.f, &psi.matmul(&sys.f)]);
    let ccl = Matrix::hstack(&[&out.cx, &out.ce]);
    Ok(ClosedLoopRealization { acl, bcl, ccl })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenVerdict<T> {
    pub value: Complex<T>,
    /// Area whose block produced the eigenvalue; `None` for coupled matrices.
    pub area: Option<usize>,
    pub inside: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StripReport<T> {
    /// Eigenvalues of `A − BK + ΔA` against the control strips.
    pub control: Vec<EigenVerdict<T>>,
    /// Interval used for the coupled control matrix.
    pub control_interval: Strip<T>,
    /// Eigenvalues of each `Ψ_iA_i − L_1iC_i` against that area's observer strip.
    pub observer: Vec<EigenVerdict<T>>,
}

impl<T: Scalar> StripReport<T> {
    pub fn control_ok(&self) -> bool {
        self.control.iter().all(|v| v.inside)
    }

    pub fn observer_ok(&self) -> bool {
        self.observer.iter().all(|v| v.inside)
    }

    pub fn passed(&self) -> bool {
        self.control_ok() && self.observer_ok()
    }
}

/// Strip membership of `A − BK + ΔA` and of each area's `ΨA − L1C`.
///
/// The control matrix is coupled through ΔA, so its eigenvalues cannot be
/// attributed to areas; they are checked against the union of the per-area
/// control strips (identical to each strip when all areas share bounds).
pub fn check_strips<T: Scalar>(sys: &CompositeSystem<T>, gains: &GainSet<T>, strips: &Strips<T>) -> Result<StripReport<T>> {
    gains.check_compatible(sys)?;
    strips.validate(sys.n_areas)?;
    let slack = T::lit(STRIP_SLACK);
    let lo = strips.control.iter().map(|s| s.a).fold(T::infinity(), T::min);
    let hi = strips.control.iter().map(|s| s.b).fold(T::neg_infinity(), T::max);
    let interval = Strip::new(lo, hi);
    let control = eig(&control_matrix(sys, gains, true))?
        .sorted()
        .into_iter()
        .map(|v| EigenVerdict { value: v, area: None, inside: interval.contains(v.re, slack) })
        .collect();
    let mut observer = Vec::new();
    for (i, (g, a)) in gains.areas.iter().zip(&sys.areas).enumerate() {
        let m = &g.psi.matmul(&a.a) - &g.l1.matmul(&a.c);
        for v in eig(&m)?.sorted() {
            observer.push(EigenVerdict { value: v, area: Some(i), inside: strips.observer[i].contains(v.re, slack) });
        }
    }
    Ok(StripReport { control, control_interval: interval, observer })
}

/// Log-spaced frequency grid in rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub w_min: f64,
    pub w_max: f64,
    pub points: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self { w_min: 1e-3, w_max: 1e3, points: 2000 }
    }
}

impl FrequencyGrid {
    pub fn frequencies(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.w_min];
        }
        let (a, b) = (self.w_min.ln(), self.w_max.ln());
        (0..self.points).map(|k| (a + (b - a) * k as f64 / (self.points - 1) as f64).exp()).collect()
    }
}

/// Grid maximum of `σ_max(G(jω))` after local refinement. A lower bound on
/// the true norm.
#[derive(Clone, Debug, PartialEq)]
pub struct HinfEstimate<T> {
    pub value: T,
    pub omega: T,
    pub grid: FrequencyGrid,
    /// Marginal modes accepted because they are uncontrollable or unobservable.
    pub hidden_marginal_modes: usize,
}

/// `σ_max(Ccl (jωI − Acl)⁻¹ Bcl)`.
pub fn gain_at<T: Scalar>(r: &ClosedLoopRealization<T>, omega: T) -> Result<T> {
    let n = r.n();
    let q = r.bcl.cols();
    if q == 0 || r.ccl.rows() == 0 {
        return Ok(T::zero());
    }
    // (jωI − A)(Xr + jXi) = B  ⇔  [[−A, −ωI], [ωI, −A]] [Xr; Xi] = [B; 0]
    let w = Matrix::identity(n).scale(omega);
    let lhs = complex_embedding(&-&r.acl, &w);
    let rhs = Matrix::vstack(&[&r.bcl, &Matrix::zeros(n, q)]);
    let x = solve_linear(&lhs, &rhs)?;
    let gr = r.ccl.matmul(&x.block(0, 0, n, q));
    let gi = r.ccl.matmul(&x.block(n, 0, n, q));
    sigma_max(&complex_embedding(&gr, &gi))
}

/// PBH rank test at `λ`: true when the mode is uncontrollable from `B` or
/// unobservable from `C`.
fn mode_is_hidden<T: Scalar>(r: &ClosedLoopRealization<T>, lambda: Complex<T>) -> Result<bool> {
    let n = r.n();
    let shifted_re = &r.acl - &Matrix::identity(n).scale(lambda.re);
    let shifted_im = Matrix::identity(n).scale(-lambda.im);
    let tol = T::tol(1e-8);
    let ctrl_re = Matrix::hstack(&[&shifted_re, &r.bcl]);
    let ctrl_im = Matrix::hstack(&[&shifted_im, &Matrix::zeros(n, r.bcl.cols())]);
    let scale_c = ctrl_re.norm_fro().max(T::one());
    if sigma_min(&complex_embedding(&ctrl_re, &ctrl_im).transpose())? <= tol * scale_c {
        return Ok(true);
    }
    let obs_re = Matrix::vstack(&[&shifted_re, &r.ccl]);
    let obs_im = Matrix::vstack(&[&shifted_im, &Matrix::zeros(r.ccl.rows(), n)]);
    let scale_o = obs_re.norm_fro().max(T::one());
    Ok(sigma_min(&complex_embedding(&obs_re, &obs_im))? <= tol * scale_o)
}

/// Grid estimate of `‖Ccl (sI − Acl)⁻¹ Bcl‖∞`.
///
/// Every mode with `Re λ ≥ −1e-9·‖Acl‖` must be hidden from the transfer
/// function (PBH test); otherwise the norm is undefined and an error is
/// returned.
pub fn hinf_norm<T: Scalar>(r: &ClosedLoopRealization<T>, grid: &FrequencyGrid) -> Result<HinfEstimate<T>> {
    r.acl.ensure_finite("closed-loop matrix")?;
    if grid.points == 0 || !(grid.w_min > 0.0) || !(grid.w_max >= grid.w_min) {
        return Err(Error::Parameter { field: "grid".into(), reason: format!("invalid frequency grid {grid:?}") });
    }
    let thresh = -T::lit(MARGINAL_REL) * r.acl.norm_fro();
    let mut hidden = 0;
    for lambda in eig(&r.acl)?.values {
        if lambda.re >= thresh {
            if mode_is_hidden(r, lambda)? {
                hidden += 1;
            } else {
                return Err(Error::UnstableRealization(format!(
                    "mode {:.6e}{:+.6e}i is not strictly stable and reaches the output",
                    lambda.re, lambda.im
                )));
            }
        }
    }
    let ws = grid.frequencies();
    let mut best = (T::neg_infinity(), 0usize);
    for (k, &w) in ws.iter().enumerate() {
        let g = gain_at(r, T::lit(w))?;
        if g > best.0 {
            best = (g, k);
        }
    }
    let (mut value, k) = best;
    let mut omega = T::lit(ws[k]);
    if ws.len() > 1 {
        let lo = ws[k.saturating_sub(1)].ln();
        let hi = ws[(k + 1).min(ws.len() - 1)].ln();
        let (w, g) = golden_max(|lw| gain_at(r, T::lit(lw.exp())), lo, hi, 40)?;
        if g > value {
            value = g;
            omega = T::lit(w.exp());
        }
    }
    Ok(HinfEstimate { value, omega, grid: grid.clone(), hidden_marginal_modes: hidden })
}

fn golden_max<T: Scalar>(f: impl Fn(f64) -> Result<T>, mut a: f64, mut b: f64, iters: usize) -> Result<(f64, T)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// λ_max of the analysis matrix at the recovered gains with `P = Z⁻¹`:
///
/// ```text
/// [ Π11  PBK  PF   Cxᵀ ]
/// [  ⋆   Π22  0    Ceᵀ ]
/// [  ⋆    ⋆  −γ²I  0   ]
/// [  ⋆    ⋆   ⋆   −I   ]
/// ```
///
/// with `Π11 = He(P(A−BK) + PΔA) + ε1⁻¹ΔAᵀΔA` and
/// `Π22 = He(Q(ΨA−L1C)) + ε1 QΨΨᵀQ`.
pub fn check_theorem1<T: Scalar>(
    sys: &CompositeSystem<T>,
    out: &OutputSelection<T>,
    gains: &GainSet<T>,
    spec: &DesignSpec<T>,
) -> Result<T> {
    gains.check_compatible(sys)?;
    let n = sys.n();
    let q_dim = sys.q();
    let p = inverse(&gains.z())?;
    let q = gains.q();
    let psi = gains.psi();
    let pi11 = &p.matmul(&control_matrix(sys, gains, true)).he() + &sys.da.transpose().matmul(&sys.da).scale(spec.eps1.recip());
    let qpsi = q.matmul(&psi);
    let pi22 = &q.matmul(&observer_matrix(sys, gains)).he() + &qpsi.matmul(&qpsi.transpose()).scale(spec.eps1);
    let dim = 3 * n + q_dim;
    let mut m = Matrix::zeros(dim, dim);
    let offs = [0, n, 2 * n, 2 * n + q_dim];
    let mut put = |i: usize, j: usize, blk: &Matrix<T>| {
        m.set_block(offs[i], offs[j], blk);
        if i != j {
            m.set_block(offs[j], offs[i], &blk.transpose());
        }
    };
    put(0, 0, &pi11);
    put(0, 1, &p.matmul(&sys.b.matmul(&gains.k())));
    put(0, 2, &p.matmul(&sys.f));
    put(0, 3, &out.cx.transpose());
    put(1, 1, &pi22);
    put(1, 3, &out.ce.transpose());
    put(2, 2, &Matrix::identity(q_dim).scale(-spec.gamma * spec.gamma));
    put(3, 3, &Matrix::identity(n).scale(-T::one()));
    sym_max_eig(&m.symmetrize())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport<T> {
    pub closed_loop: Vec<Complex<T>>,
    /// Spectrum of `A − BK + ΔA`.
    pub control: Vec<Complex<T>>,
    /// Spectrum of `A − BK` (interactions removed).
    pub control_local: Vec<Complex<T>>,
    /// Spectrum of `ΨA − L1C`.
    pub observer: Vec<Complex<T>>,
    pub max_real: T,
    /// Modes with `Re λ ≥ −1e-9‖Acl‖`.
    pub marginal_modes: usize,
    pub strips: Option<StripReport<T>>,
    pub hinf: std::result::Result<HinfEstimate<T>, String>,
    pub gamma: T,
    pub theorem1_residual: T,
    pub identity_residual: T,
    /// `‖ΨF‖` relative to `‖F‖`.
    pub decoupling_residual: T,
}

/// Identity residual threshold for the gain relations.
pub const IDENTITY_TOL: f64 = 1e-10;

impl<T: Scalar> VerificationReport<T> {
    /// Named pass/fail flags, recomputed from the numeric fields.
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        let mut v = vec![
            // a mode within rounding of the axis is not counted as stable, whatever its sign
            ("stability", self.marginal_modes == 0 && self.max_real < T::zero()),
            ("hinf", matches!(&self.hinf, Ok(h) if h.value < self.gamma)),
            ("theorem1", self.theorem1_residual < T::zero()),
            ("gain_identities", self.identity_residual <= T::tol(IDENTITY_TOL)),
            ("decoupling", self.decoupling_residual <= T::tol(1e-12)),
        ];
        if let Some(s) = &self.strips {
            v.push(("strip_control", s.control_ok()));
            v.push(("strip_observer", s.observer_ok()));
        }
        v
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.checks().into_iter().filter(|c| !c.1).map(|c| c.0).collect()
    }
}

/// Runs every check; strips are checked when the spec carries them.
pub fn verify<T: Scalar>(
    sys: &CompositeSystem<T>,
    out: &OutputSelection<T>,
    gains: &GainSet<T>,
    spec: &DesignSpec<T>,
    grid: &FrequencyGrid,
) -> Result<VerificationReport<T>> {
    let r = build_closed_loop(sys, gains, out)?;
    let cl = eig(&r.acl)?;
    let thresh = -T::lit(MARGINAL_REL) * r.acl.norm_fro();
    let strips = match &spec.strips {
        Some(s) => Some(check_strips(sys, gains, s)?),
        None => None,
    };
    let hinf = hinf_norm(&r, grid).map_err(|e| e.to_string());
    let mut decoupling = T::zero();
    for (g, a) in gains.areas.iter().zip(&sys.areas) {
        let scale = a.f.max_abs().max(T::min_positive_value());
        decoupling = decoupling.max(g.psi.matmul(&a.f).max_abs() / scale);
    }
    Ok(VerificationReport {
        closed_loop: cl.sorted(),
        control: eig(&control_matrix(sys, gains, true))?.sorted(),
        control_local: eig(&control_matrix(sys, gains, false))?.sorted(),
        observer: eig(&observer_matrix(sys, gains))?.sorted(),
        max_real: cl.max_real(),
        marginal_modes: cl.values.iter().filter(|v| v.re >= thresh).count(),
        strips,
        hinf,
        gamma: spec.gamma,
        theorem1_residual: check_theorem1(sys, out, gains, spec)?,
        identity_residual: gains.identity_residual(sys),
        decoupling_residual: decoupling,
    })
}

/// Eigenvalue table `(re, im, block)` for plotting.
pub fn eigen_rows<T: Scalar>(rep: &VerificationReport<T>) -> Vec<(T, T, &'static str)> {
    let mut rows = Vec::new();
    for (label, vals) in [
        ("closed_loop", &rep.closed_loop),
        ("control", &rep.control),
        ("control_local", &rep.control_local),
        ("observer", &rep.observer),
    ] {
        rows.extend(vals.iter().map(|v| (v.re, v.im, label)));
    }
    rows
}
