//! Primal-dual interior-point method for the eigenvalue-minimization form
//!
//! ```text
//!     minimize t   subject to   F̃_k(x̃) ⪯ t·I  (all k),   |x̃_j| ≤ R,
//! ```
//!
//! written as the dual of a block-diagonal SDP with 1×1 LP blocks for the box.
//! The search direction is HKM with a Mehrotra predictor-corrector.

use super::affine::Entries;
use super::{evaluate_residuals, FeasibilityProblem};
use crate::error::{Error, Result};
use crate::numlin::{cholesky, lower_inverse, sym_eigvals, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions<T> {
    /// Required margin `λ_max(F_k) ≤ −eps_feas·s_k`, with `s_k` the LMI's scale.
    pub eps_feas: T,
    pub max_iter: usize,
    /// Relative duality gap and infeasibility tolerance.
    pub gap_tol: T,
    /// Box radius on the scaled variables.
    pub box_radius: T,
    /// Fraction of the step to the boundary of the cone.
    pub step_fraction: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            eps_feas: T::tol(1e-7),
            max_iter: 150,
            gap_tol: T::tol(1e-9),
            box_radius: T::lit(1e6),
            step_fraction: T::lit(0.95),
        }
    }
}

/// A candidate point with its independently evaluated residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiSolution<T> {
    pub x: Vec<T>,
    /// `(LMI name, λ_max)` for user LMIs followed by PD floors.
    pub residuals: Vec<(String, T)>,
    /// Largest residual.
    pub margin: T,
    /// Name of the LMI with the largest scaled residual.
    pub blocking: String,
    /// Per-LMI scale factors used by the solver, aligned with `residuals`.
    pub scales: Vec<T>,
    pub iterations: usize,
    pub step_norm: T,
    /// Final relative duality gap.
    pub gap: T,
}

impl<T: Scalar> LmiSolution<T> {
    /// Largest residual divided by its LMI scale.
    pub fn scaled_margin(&self) -> T {
        self.residuals.iter().zip(&self.scales).fold(T::neg_infinity(), |m, ((_, r), &s)| m.max(*r / s))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfeasibleReport<T> {
    pub margin: T,
    pub blocking: String,
    pub best: LmiSolution<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome<T> {
    Feasible(LmiSolution<T>),
    /// No point found within budget at the reported margin; not a proof.
    Infeasible(InfeasibleReport<T>),
}

impl<T: Scalar> SolveOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Feasible(_))
    }

    /// The returned point, feasible or best-effort.
    pub fn solution(&self) -> &LmiSolution<T> {
        match self {
            SolveOutcome::Feasible(s) => s,
            SolveOutcome::Infeasible(r) => &r.best,
        }
    }

    pub fn into_result(self) -> Result<LmiSolution<T>> {
        match self {
            SolveOutcome::Feasible(s) => Ok(s),
            SolveOutcome::Infeasible(r) => {
                Err(Error::Infeasible { margin: r.margin.to_f64_lossy(), blocking: r.blocking })
            }
        }
    }
}

struct SdpBlock<T> {
    dim: usize,
    c: Matrix<T>,
    /// `(dual variable index, entries)`; the last dual variable is `t`.
    a: Vec<(usize, Entries<T>)>,
}

struct LpEntry<T> {
    c: T,
    a: Vec<(usize, T)>,
}

struct Iterate<T> {
    x: Vec<Matrix<T>>,
    s: Vec<Matrix<T>>,
    xl: Vec<T>,
    sl: Vec<T>,
    y: Vec<T>,
}

fn dot<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> T {
    a.as_slice().iter().zip(b.as_slice()).map(|(&u, &v)| u * v).sum()
}

fn adjoint<T: Scalar>(blocks: &[SdpBlock<T>], lp: &[LpEntry<T>], y: &[T]) -> (Vec<Matrix<T>>, Vec<T>) {
    let mats = blocks
        .iter()
        .map(|b| {
            let mut m = Matrix::zeros(b.dim, b.dim);
            for (i, e) in &b.a {
                let yi = y[*i];
                if yi != T::zero() {
                    for &(r, c, v) in e {
                        m[(r, c)] = m[(r, c)] + yi * v;
                    }
                }
            }
            m
        })
        .collect();
    let lpv = lp.iter().map(|l| l.a.iter().map(|&(i, v)| y[i] * v).sum()).collect();
    (mats, lpv)
}

fn apply<T: Scalar>(blocks: &[SdpBlock<T>], lp: &[LpEntry<T>], g: &[Matrix<T>], gl: &[T], ny: usize) -> Vec<T> {
    let mut out = vec![T::zero(); ny];
    for (b, gk) in blocks.iter().zip(g) {
        for (i, e) in &b.a {
            let mut s = T::zero();
            for &(r, c, v) in e {
                s = s + v * gk[(r, c)];
            }
            out[*i] = out[*i] + s;
        }
    }
    for (l, &gv) in lp.iter().zip(gl) {
        for &(i, v) in &l.a {
            out[i] = out[i] + v * gv;
        }
    }
    out
}

fn schur<T: Scalar>(blocks: &[SdpBlock<T>], lp: &[LpEntry<T>], it: &Iterate<T>, sinv: &[Matrix<T>], ny: usize) -> Matrix<T> {
    let mut m = Matrix::zeros(ny, ny);
    for ((b, x), si) in blocks.iter().zip(&it.x).zip(sinv) {
        for p in 0..b.a.len() {
            let (i, ei) = &b.a[p];
            for (j, ej) in &b.a[p..] {
                let mut s = T::zero();
                for &(ra, cb, u) in ei {
                    for &(rc, cd, v) in ej {
                        s = s + u * v * x[(cb, rc)] * si[(cd, ra)];
                    }
                }
                m[(*i, *j)] = m[(*i, *j)] + s;
                if i != j {
                    m[(*j, *i)] = m[(*j, *i)] + s;
                }
            }
        }
    }
    for ((l, &xv), &sv) in lp.iter().zip(&it.xl).zip(&it.sl) {
        let w = xv / sv;
        for &(i, u) in &l.a {
            for &(j, v) in &l.a {
                m[(i, j)] = m[(i, j)] + u * v * w;
            }
        }
    }
    m
}

fn spd_inverse<T: Scalar>(s: &Matrix<T>) -> Option<Matrix<T>> {
    let l = cholesky(s, T::zero())?;
    let li = lower_inverse(&l);
    Some(li.transpose().matmul(&li))
}

/// Largest α with `X + α·D ⪰ 0` (infinite if never violated).
fn max_step<T: Scalar>(x: &Matrix<T>, d: &Matrix<T>) -> T {
    let l = match cholesky(x, T::zero()) {
        Some(l) => l,
        None => return T::zero(),
    };
    let li = lower_inverse(&l);
    let w = li.matmul(d).matmul(&li.transpose()).symmetrize();
    match sym_eigvals(&w) {
        Ok(ev) => {
            let lmin = ev[0];
            if lmin >= T::zero() {
                T::infinity()
            } else {
                -T::one() / lmin
            }
        }
        Err(_) => T::zero(),
    }
}

fn max_step_lp<T: Scalar>(x: &[T], d: &[T]) -> T {
    x.iter().zip(d).fold(T::infinity(), |a, (&xv, &dv)| if dv < T::zero() { a.min(-xv / dv) } else { a })
}

fn solve_spd<T: Scalar>(m: &Matrix<T>, rhs: &[T]) -> Option<Vec<T>> {
    let n = m.rows();
    let diag_max = (0..n).fold(T::zero(), |a, i| a.max(m[(i, i)].abs()));
    let mut reg = T::zero();
    for _ in 0..8 {
        let mut mm = m.clone();
        for i in 0..n {
            mm[(i, i)] = mm[(i, i)] + reg;
        }
        if let Some(l) = cholesky(&mm, T::zero()) {
            let mut y = rhs.to_vec();
            crate::numlin::forward_subst(&l, &mut y);
            crate::numlin::backward_subst_t(&l, &mut y);
            if y.iter().all(|v| v.is_finite()) {
                return Some(y);
            }
        }
        reg = if reg == T::zero() { diag_max * T::epsilon() * T::lit(100.0) } else { reg * T::lit(100.0) };
    }
    None
}

/// Solves `min t s.t. F_k(x) ⪯ tI` and accepts when every LMI (floors included)
/// is at most `−eps_feas` times its scale.
pub fn solve_feasibility<T: Scalar>(p: &FeasibilityProblem<T>, opts: &SolverOptions<T>) -> Result<SolveOutcome<T>> {
    let lmis = p.all_lmis();
    let m = p.layout.count();
    let ny = m + 1;
    let t_idx = m;

    let scales: Vec<T> = lmis
        .iter()
        .map(|l| {
            let s = l.constant.max_abs().max(l.max_coeff_abs());
            if s > T::zero() {
                s
            } else {
                T::one()
            }
        })
        .collect();
    let mut vmax = vec![T::zero(); m];
    for (l, &s) in lmis.iter().zip(&scales) {
        for (k, e) in &l.coeffs {
            for &(_, _, v) in e {
                vmax[*k] = vmax[*k].max(v.abs() / s);
            }
        }
    }
    let dvar: Vec<T> = vmax.iter().map(|&v| if v > T::zero() { T::one() / v } else { T::one() }).collect();

    let blocks: Vec<SdpBlock<T>> = lmis
        .iter()
        .zip(&scales)
        .map(|(l, &s)| {
            let mut a: Vec<(usize, Entries<T>)> = l
                .coeffs
                .iter()
                .map(|(k, e)| (*k, e.iter().map(|&(r, c, v)| (r, c, v * dvar[*k] / s)).collect()))
                .collect();
            a.push((t_idx, (0..l.dim).map(|r| (r, r, -T::one())).collect()));
            SdpBlock { dim: l.dim, c: l.constant.scale(-T::one() / s), a }
        })
        .collect();
    let r = opts.box_radius;
    let mut lp = Vec::with_capacity(2 * m);
    for j in 0..m {
        lp.push(LpEntry { c: r, a: vec![(j, T::one())] });
        lp.push(LpEntry { c: r, a: vec![(j, -T::one())] });
    }
    let mut b = vec![T::zero(); ny];
    b[t_idx] = -T::one();

    let n_total = T::of(blocks.iter().map(|b| b.dim).sum::<usize>() + lp.len());
    let mut it = initial_point(&blocks, &lp, ny);
    let norm_b = T::one();
    let norm_c = blocks.iter().map(|b| b.c.norm_fro()).fold(T::zero(), T::max).max(r);

    let mut best_x: Vec<T> = vec![T::zero(); m];
    let mut best_margin = T::infinity();
    let mut iterations = 0;
    let mut step_norm = T::zero();
    let mut gap_rel = T::infinity();
    let mut stalls = 0;

    for iter in 0..opts.max_iter {
        iterations = iter;
        if it.y.iter().any(|v| !v.is_finite()) || it.x.iter().chain(&it.s).any(|m| !m.is_finite()) {
            return Err(Error::SolverBreakdown {
                iteration: iter,
                detail: format!("non-finite iterate (t = {})", it.y[t_idx]),
            });
        }
        // Track the best primal point found so far.
        let margin = blocks
            .iter()
            .map(|bk| {
                let mut f = -&bk.c;
                for (i, e) in &bk.a {
                    if *i != t_idx {
                        for &(rr, cc, v) in e {
                            f[(rr, cc)] = f[(rr, cc)] + it.y[*i] * v;
                        }
                    }
                }
                sym_eigvals(&f).map(|ev| *ev.last().unwrap()).unwrap_or(T::infinity())
            })
            .fold(T::neg_infinity(), T::max);
        if margin < best_margin && it.y[..m].iter().all(|v| v.abs() <= r) {
            best_margin = margin;
            best_x = it.y[..m].to_vec();
        }

        let (ay, ayl) = adjoint(&blocks, &lp, &it.y);
        let rd: Vec<Matrix<T>> = blocks.iter().zip(&ay).zip(&it.s).map(|((bk, a), s)| &(&bk.c - a) - s).collect();
        let rdl: Vec<T> = lp.iter().zip(&ayl).zip(&it.sl).map(|((l, &a), &s)| l.c - a - s).collect();
        let ax = apply(&blocks, &lp, &it.x, &it.xl, ny);
        let rp: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let pobj: T = blocks.iter().zip(&it.x).map(|(bk, x)| dot(&bk.c, x)).sum::<T>()
            + lp.iter().zip(&it.xl).map(|(l, &x)| l.c * x).sum::<T>();
        let dobj: T = b.iter().zip(&it.y).map(|(&u, &v)| u * v).sum();
        let xs: T = it.x.iter().zip(&it.s).map(|(x, s)| dot(x, s)).sum::<T>()
            + it.xl.iter().zip(&it.sl).map(|(&x, &s)| x * s).sum::<T>();
        let mu = xs / n_total;
        let pinf = rp.iter().map(|v| *v * *v).sum::<T>().sqrt() / (T::one() + norm_b);
        let dinf = (rd.iter().map(|m| m.norm_fro().powi(2)).sum::<T>() + rdl.iter().map(|v| *v * *v).sum::<T>()).sqrt()
            / (T::one() + norm_c);
        gap_rel = (pobj - dobj).abs().max(xs) / (T::one() + pobj.abs() + dobj.abs());
        log::debug!(
            "sdp iter {iter}: t = {:e}, pobj = {:e}, gap = {:e}, pinf = {:e}, dinf = {:e}, mu = {:e}",
            it.y[t_idx],
            pobj,
            gap_rel,
            pinf,
            dinf,
            mu
        );
        if gap_rel < opts.gap_tol && pinf < opts.gap_tol && dinf < opts.gap_tol {
            break;
        }

        let mut sinv = Vec::with_capacity(blocks.len());
        for s in &it.s {
            match spd_inverse(s) {
                Some(si) => sinv.push(si),
                None => {
                    log::warn!("sdp: dual slack lost definiteness at iteration {iter}; stopping");
                    stalls = usize::MAX;
                    break;
                }
            }
        }
        if stalls == usize::MAX {
            break;
        }
        let sinvl: Vec<T> = it.sl.iter().map(|&s| T::one() / s).collect();
        let mmat = schur(&blocks, &lp, &it, &sinv, ny);

        // Predictor (σ = 0) then corrector.
        let zero_w: Vec<Matrix<T>> = blocks.iter().map(|bk| Matrix::zeros(bk.dim, bk.dim)).collect();
        let zero_wl = vec![T::zero(); lp.len()];
        let pred = match direction(&blocks, &lp, &it, &b, &rd, &rdl, &sinv, &sinvl, &mmat, T::zero(), &zero_w, &zero_wl) {
            Some(d) => d,
            None => {
                log::warn!("sdp: Schur complement factorization failed at iteration {iter}");
                break;
            }
        };
        let (ap, ad) = step_lengths(&it, &pred, T::one());
        let xs_aff: T = it
            .x
            .iter()
            .zip(&pred.dx)
            .zip(it.s.iter().zip(&pred.ds))
            .map(|((x, dx), (s, ds))| dot(&(x + &dx.scale(ap)), &(s + &ds.scale(ad))))
            .sum::<T>()
            + it
                .xl
                .iter()
                .zip(&pred.dxl)
                .zip(it.sl.iter().zip(&pred.dsl))
                .map(|((&x, &dx), (&s, &ds))| (x + ap * dx) * (s + ad * ds))
                .sum::<T>();
        let mu_aff = xs_aff / n_total;
        let sigma = (mu_aff / mu).powi(3).max(T::zero()).min(T::one());
        let w: Vec<Matrix<T>> = pred.dx.iter().zip(&pred.ds).map(|(dx, ds)| dx.matmul(ds)).collect();
        let wl: Vec<T> = pred.dxl.iter().zip(&pred.dsl).map(|(&a, &c)| a * c).collect();
        let corr = match direction(&blocks, &lp, &it, &b, &rd, &rdl, &sinv, &sinvl, &mmat, sigma * mu, &w, &wl) {
            Some(d) => d,
            None => {
                log::warn!("sdp: Schur complement factorization failed at iteration {iter}");
                break;
            }
        };
        let (ap, ad) = step_lengths(&it, &corr, opts.step_fraction);
        for (x, dx) in it.x.iter_mut().zip(&corr.dx) {
            *x = &*x + &dx.scale(ap);
        }
        for (x, dx) in it.xl.iter_mut().zip(&corr.dxl) {
            *x = *x + ap * *dx;
        }
        for (s, ds) in it.s.iter_mut().zip(&corr.ds) {
            *s = &*s + &ds.scale(ad);
        }
        for (s, ds) in it.sl.iter_mut().zip(&corr.dsl) {
            *s = *s + ad * *ds;
        }
        for (y, dy) in it.y.iter_mut().zip(&corr.dy) {
            *y = *y + ad * *dy;
        }
        step_norm = ad * corr.dy.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if ap < T::lit(1e-10) && ad < T::lit(1e-10) {
            stalls += 1;
            if stalls >= 3 {
                log::warn!("sdp: step lengths collapsed at iteration {iter}");
                break;
            }
        } else {
            stalls = 0;
        }
        iterations = iter + 1;
    }

    // Check the final iterate as well.
    let final_x: Vec<T> = it.y[..m].to_vec();
    let x_scaled = if final_x.iter().all(|v| v.is_finite() && v.abs() <= r) {
        let fm = blocks
            .iter()
            .map(|bk| {
                let mut f = -&bk.c;
                for (i, e) in &bk.a {
                    if *i != t_idx {
                        for &(rr, cc, v) in e {
                            f[(rr, cc)] = f[(rr, cc)] + final_x[*i] * v;
                        }
                    }
                }
                sym_eigvals(&f).map(|ev| *ev.last().unwrap()).unwrap_or(T::infinity())
            })
            .fold(T::neg_infinity(), T::max);
        if fm <= best_margin {
            final_x
        } else {
            best_x
        }
    } else {
        best_x
    };
    let x: Vec<T> = x_scaled.iter().zip(&dvar).map(|(&v, &d)| v * d).collect();
    let residuals = evaluate_residuals(p, &x)?;
    let (mut blocking, mut worst) = (String::new(), T::neg_infinity());
    let mut margin = T::neg_infinity();
    let mut feasible = true;
    for ((name, res), &s) in residuals.iter().zip(&scales) {
        margin = margin.max(*res);
        if *res / s > worst {
            worst = *res / s;
            blocking = name.clone();
        }
        if !(*res <= -opts.eps_feas * s) {
            feasible = false;
        }
    }
    let sol = LmiSolution { x, residuals, margin, blocking: blocking.clone(), scales, iterations, step_norm, gap: gap_rel };
    if feasible {
        Ok(SolveOutcome::Feasible(sol))
    } else {
        Ok(SolveOutcome::Infeasible(InfeasibleReport { margin, blocking, best: sol }))
    }
}

struct Direction<T> {
    dx: Vec<Matrix<T>>,
    ds: Vec<Matrix<T>>,
    dxl: Vec<T>,
    dsl: Vec<T>,
    dy: Vec<T>,
}

#[allow(clippy::too_many_arguments)]
fn direction<T: Scalar>(
    blocks: &[SdpBlock<T>],
    lp: &[LpEntry<T>],
    it: &Iterate<T>,
    b: &[T],
    rd: &[Matrix<T>],
    rdl: &[T],
    sinv: &[Matrix<T>],
    sinvl: &[T],
    mmat: &Matrix<T>,
    target: T,
    w: &[Matrix<T>],
    wl: &[T],
) -> Option<Direction<T>> {
    let ny = b.len();
    // G = (−target·I + X·Rd + W)·S⁻¹
    let g: Vec<Matrix<T>> = it
        .x
        .iter()
        .zip(rd)
        .zip(w)
        .zip(sinv)
        .map(|(((x, r), wk), si)| {
            let mut inner = &x.matmul(r) + wk;
            for i in 0..inner.rows() {
                inner[(i, i)] = inner[(i, i)] - target;
            }
            inner.matmul(si)
        })
        .collect();
    let gl: Vec<T> = (0..lp.len()).map(|l| (-target + it.xl[l] * rdl[l] + wl[l]) * sinvl[l]).collect();
    let ag = apply(blocks, lp, &g, &gl, ny);
    let rhs: Vec<T> = b.iter().zip(&ag).map(|(&u, &v)| u + v).collect();
    let dy = solve_spd(mmat, &rhs)?;
    let (ady, adyl) = adjoint(blocks, lp, &dy);
    let ds: Vec<Matrix<T>> = rd.iter().zip(&ady).map(|(r, a)| r - a).collect();
    let dsl: Vec<T> = rdl.iter().zip(&adyl).map(|(&r, &a)| r - a).collect();
    let dx: Vec<Matrix<T>> = it
        .x
        .iter()
        .zip(&ds)
        .zip(w)
        .zip(sinv)
        .map(|(((x, dsk), wk), si)| {
            let mut inner = -&(&x.matmul(dsk) + wk);
            for i in 0..inner.rows() {
                inner[(i, i)] = inner[(i, i)] + target;
            }
            &inner.matmul(si).symmetrize() - x
        })
        .collect();
    let dxl: Vec<T> = (0..lp.len()).map(|l| (target - it.xl[l] * dsl[l] - wl[l]) * sinvl[l] - it.xl[l]).collect();
    Some(Direction { dx, ds, dxl, dsl, dy })
}

fn step_lengths<T: Scalar>(it: &Iterate<T>, d: &Direction<T>, fraction: T) -> (T, T) {
    let mut ap = max_step_lp(&it.xl, &d.dxl);
    let mut ad = max_step_lp(&it.sl, &d.dsl);
    for (x, dx) in it.x.iter().zip(&d.dx) {
        ap = ap.min(max_step(x, dx));
    }
    for (s, ds) in it.s.iter().zip(&d.ds) {
        ad = ad.min(max_step(s, ds));
    }
    (T::one().min(fraction * ap), T::one().min(fraction * ad))
}

fn initial_point<T: Scalar>(blocks: &[SdpBlock<T>], lp: &[LpEntry<T>], ny: usize) -> Iterate<T> {
    let ten = T::lit(10.0);
    let x = blocks
        .iter()
        .map(|bk| {
            let xi = ten.max(T::of(bk.dim).sqrt());
            Matrix::identity(bk.dim).scale(xi)
        })
        .collect();
    let s = blocks
        .iter()
        .map(|bk| {
            let amax = bk.a.iter().map(|(_, e)| e.iter().map(|&(_, _, v)| v * v).sum::<T>().sqrt()).fold(T::zero(), T::max);
            let eta = ten.max(T::of(bk.dim).sqrt()).max(bk.c.norm_fro()).max(amax);
            Matrix::identity(bk.dim).scale(eta)
        })
        .collect();
    let xl = lp.iter().map(|_| ten).collect();
    let sl = lp.iter().map(|l| ten.max(l.c.abs())).collect();
    Iterate { x, s, xl, sl, y: vec![T::zero(); ny] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{AffineLmi, AffineMatrix, VariableLayout};

    fn interval_problem() -> FeasibilityProblem<f64> {
        // F(x) = diag(x − 1, −x − 1)
        let mut l = VariableLayout::new();
        let v = l.add_rect("x", 1, 1);
        let xv = AffineMatrix::rect_var(&l, v);
        let e1 = Matrix::from_f64_rows(&[&[1.0, 0.0]]).unwrap();
        let expr = xv
            .left_mul(&e1.transpose())
            .right_mul(&e1)
            .sub(&xv.left_mul(&Matrix::from_f64_rows(&[&[0.0], &[1.0]]).unwrap()).right_mul(&Matrix::from_f64_rows(&[&[0.0, 1.0]]).unwrap()))
            .add(&AffineMatrix::constant(Matrix::identity(2).scale(-1.0)));
        FeasibilityProblem::new(l, vec![AffineLmi::new("interval", expr).unwrap()], 0.0).unwrap()
    }

    #[test]
    fn interval_problem_is_centered() {
        let p = interval_problem();
        let out = solve_feasibility(&p, &SolverOptions::default()).unwrap();
        let sol = match out {
            SolveOutcome::Feasible(s) => s,
            SolveOutcome::Infeasible(r) => panic!("unexpected infeasible: {r:?}"),
        };
        assert!(sol.x[0].abs() < 1e-6, "x = {}", sol.x[0]);
        assert!((sol.margin + 1.0).abs() < 1e-6);
    }
}
