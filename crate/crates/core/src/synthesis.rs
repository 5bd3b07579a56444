//! LMI assembly, solution and gain recovery for the decentralized
//! observer-based controller, plus a per-area ("separated") baseline.

use crate::error::{Error, Result};
use crate::model::{CompositeSystem, OutputSelection, AREA_STATES, STATE_TIE};
use crate::numlin::{singular_values, solve_linear, Matrix};
use crate::scalar::Scalar;
use crate::sdp::{
    affine_block_diag, solve_feasibility, AffineLmi, AffineMatrix, BlockLmiBuilder, FeasibilityProblem, LmiSolution,
    RectId, SolveOutcome, SolverOptions, SymId, VariableLayout, DEFAULT_PD_FLOOR,
};

/// Vertical strip `a < Re λ < b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Strip<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> Strip<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a, b }
    }

    pub fn contains(&self, re: T, slack: T) -> bool {
        re > self.a - slack && re < self.b + slack
    }
}

/// Per-area strips for the control and observer dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct Strips<T> {
    pub control: Vec<Strip<T>>,
    pub observer: Vec<Strip<T>>,
}

impl<T: Scalar> Strips<T> {
    pub fn uniform(n_areas: usize, control: Strip<T>, observer: Strip<T>) -> Self {
        Self { control: vec![control; n_areas], observer: vec![observer; n_areas] }
    }

    pub fn validate(&self, n_areas: usize) -> Result<()> {
        if self.control.len() != n_areas || self.observer.len() != n_areas {
            return Err(Error::Dimension(format!(
                "strips given for {}/{} areas, system has {n_areas}",
                self.control.len(),
                self.observer.len()
            )));
        }
        for (kind, list) in [("control", &self.control), ("observer", &self.observer)] {
            for (i, s) in list.iter().enumerate() {
                if !(s.a < s.b && s.b < T::zero()) {
                    return Err(Error::Parameter {
                        field: format!("strips.{kind}[{i}]"),
                        reason: format!("need a < b < 0, got a = {}, b = {}", s.a, s.b),
                    });
                }
            }
        }
        Ok(())
    }

    fn area(&self, i: usize) -> Self {
        Self { control: vec![self.control[i]], observer: vec![self.observer[i]] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignSpec<T> {
    pub gamma: T,
    pub eps1: T,
    pub eps2: T,
    pub strips: Option<Strips<T>>,
}

impl<T: Scalar> DesignSpec<T> {
    pub fn validate(&self, n_areas: usize) -> Result<()> {
        for (field, v) in [("gamma", self.gamma), ("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::Parameter { field: field.into(), reason: format!("must be positive, got {v}") });
            }
        }
        if let Some(s) = &self.strips {
            s.validate(n_areas)?;
        }
        Ok(())
    }
}

/// `H` and `Ψ = I − HC` with `ΨF = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoupler<T> {
    pub h: Matrix<T>,
    pub psi: Matrix<T>,
}

/// `H = F[(CF)ᵀ(CF)]⁻¹(CF)ᵀ`, guarded by `rank(CF) = rank(F) = q`.
pub fn compute_disturbance_decoupler<T: Scalar>(c: &Matrix<T>, f: &Matrix<T>) -> Result<Decoupler<T>> {
    if c.cols() != f.rows() {
        return Err(Error::Dimension(format!("C is {}x{}, F is {}x{}", c.rows(), c.cols(), f.rows(), f.cols())));
    }
    let n = f.rows();
    if f.max_abs() == T::zero() {
        return Ok(Decoupler { h: Matrix::zeros(n, c.rows()), psi: Matrix::identity(n) });
    }
    let q = f.cols();
    let cf = c.matmul(f);
    let rank_ok = |m: &Matrix<T>| -> Result<bool> {
        if m.rows() < q {
            return Ok(false);
        }
        let sv = singular_values(m)?;
        Ok(sv.len() == q && sv[q - 1] > T::lit(1e-10) * sv[0])
    };
    if !rank_ok(f)? {
        return Err(Error::Decoupling { area: 0, reason: "F does not have full column rank".into() });
    }
    if !rank_ok(&cf)? {
        return Err(Error::Decoupling { area: 0, reason: "rank(CF) < rank(F)".into() });
    }
    // H = F R⁻¹ Qᵀ from CF = QR, avoiding the squared conditioning of (CF)ᵀCF
    let p = cf.rows();
    let mut qm = Matrix::zeros(p, q);
    let mut w = Matrix::zeros(n, q);
    for k in 0..q {
        let mut v = cf.col(k);
        let mut fk = f.col(k);
        for j in 0..k {
            let r = (0..p).map(|i| qm[(i, j)] * v[i]).fold(T::zero(), |a, b| a + b);
            for i in 0..p {
                v[i] = v[i] - r * qm[(i, j)];
            }
            for i in 0..n {
                fk[i] = fk[i] - r * w[(i, j)];
            }
        }
        let rkk = scaled_norm(&v);
        for i in 0..p {
            qm[(i, k)] = v[i] / rkk;
        }
        for i in 0..n {
            w[(i, k)] = fk[i] / rkk;
        }
    }
    let h = w.matmul(&qm.transpose());
    let psi = &Matrix::identity(n) - &h.matmul(c);
    Ok(Decoupler { h, psi })
}

fn scaled_norm<T: Scalar>(v: &[T]) -> T {
    let s = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if s == T::zero() {
        return s;
    }
    s * v.iter().map(|x| (*x / s) * (*x / s)).fold(T::zero(), |a, b| a + b).sqrt()
}

/// Decouplers for every area of `sys`.
pub fn decouplers_for<T: Scalar>(sys: &CompositeSystem<T>) -> Result<Vec<Decoupler<T>>> {
    sys.areas
        .iter()
        .enumerate()
        .map(|(i, a)| {
            compute_disturbance_decoupler(&a.c, &a.f).map_err(|e| match e {
                Error::Decoupling { reason, .. } => Error::Decoupling { area: i, reason },
                other => other,
            })
        })
        .collect()
}

/// Data the design LMIs are built from: per-area (A_i, B_i, C_i, decoupler),
/// the interaction matrix, the disturbance input matrix and output weights.
#[derive(Clone, Debug)]
pub struct DesignPlant<T> {
    pub a: Vec<Matrix<T>>,
    pub b: Vec<Matrix<T>>,
    pub c: Vec<Matrix<T>>,
    pub decouplers: Vec<Decoupler<T>>,
    pub da: Matrix<T>,
    pub dist: Matrix<T>,
    pub cx: Matrix<T>,
    pub ce: Matrix<T>,
}

impl<T: Scalar> DesignPlant<T> {
    pub fn integrated(sys: &CompositeSystem<T>, out: &OutputSelection<T>, decouplers: &[Decoupler<T>]) -> Result<Self> {
        if decouplers.len() != sys.n_areas {
            return Err(Error::Dimension(format!("{} decouplers for {} areas", decouplers.len(), sys.n_areas)));
        }
        Ok(Self {
            a: sys.areas.iter().map(|x| x.a.clone()).collect(),
            b: sys.areas.iter().map(|x| x.b.clone()).collect(),
            c: sys.areas.iter().map(|x| x.c.clone()).collect(),
            decouplers: decouplers.to_vec(),
            da: sys.da.clone(),
            dist: sys.f.clone(),
            cx: out.cx.clone(),
            ce: out.ce.clone(),
        })
    }

    /// Area `i` alone: no ΔA, disturbance channel `[F_i, E_i]` with `E_i` the
    /// unit column into the tie-line state.
    pub fn separated_area(sys: &CompositeSystem<T>, out: &OutputSelection<T>, i: usize) -> Result<Self> {
        let area = &sys.areas[i];
        let dec = compute_disturbance_decoupler(&area.c, &area.f).map_err(|e| match e {
            Error::Decoupling { reason, .. } => Error::Decoupling { area: i, reason },
            other => other,
        })?;
        let mut e = Matrix::zeros(AREA_STATES, 1);
        e[(STATE_TIE, 0)] = T::one();
        Ok(Self {
            a: vec![area.a.clone()],
            b: vec![area.b.clone()],
            c: vec![area.c.clone()],
            decouplers: vec![dec],
            da: Matrix::zeros(AREA_STATES, AREA_STATES),
            dist: Matrix::hstack(&[&area.f, &e]),
            cx: out.cx_block(i),
            ce: out.ce_block(i),
        })
    }

    pub fn n_areas(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.a.iter().map(|a| a.rows()).sum()
    }

    pub fn psi(&self) -> Matrix<T> {
        Matrix::block_diag(&self.decouplers.iter().map(|d| d.psi.clone()).collect::<Vec<_>>())
    }
}

/// Decision blocks `Z_i, Q_i, M_1i, M_2i` in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignVariables {
    pub layout: VariableLayout,
    pub z: Vec<SymId>,
    pub q: Vec<SymId>,
    pub m1: Vec<RectId>,
    pub m2: Vec<RectId>,
}

impl DesignVariables {
    pub fn new<T: Scalar>(plant: &DesignPlant<T>) -> Self {
        let mut layout = VariableLayout::new();
        let nn = plant.n_areas();
        let z = (0..nn).map(|i| layout.add_sym(format!("Z{}", i + 1), plant.a[i].rows())).collect();
        let q = (0..nn).map(|i| layout.add_sym(format!("Q{}", i + 1), plant.a[i].rows())).collect();
        let m1 = (0..nn)
            .map(|i| layout.add_rect(format!("M1_{}", i + 1), plant.b[i].cols(), plant.a[i].rows()))
            .collect();
        let m2 = (0..nn)
            .map(|i| layout.add_rect(format!("M2_{}", i + 1), plant.a[i].rows(), plant.c[i].rows()))
            .collect();
        Self { layout, z, q, m1, m2 }
    }
}

struct Blocks<T> {
    omega11: AffineMatrix<T>,
    omega22: AffineMatrix<T>,
    z: AffineMatrix<T>,
}

fn shared_blocks<T: Scalar>(plant: &DesignPlant<T>, vars: &DesignVariables) -> Blocks<T> {
    let l = &vars.layout;
    let nn = plant.n_areas();
    let zs: Vec<_> = (0..nn).map(|i| AffineMatrix::sym_var(l, vars.z[i])).collect();
    let qs: Vec<_> = (0..nn).map(|i| AffineMatrix::sym_var(l, vars.q[i])).collect();
    let z = affine_block_diag(&zs);
    let az_bm: Vec<_> = (0..nn)
        .map(|i| zs[i].left_mul(&plant.a[i]).sub(&AffineMatrix::rect_var(l, vars.m1[i]).left_mul(&plant.b[i])))
        .collect();
    let omega11 = affine_block_diag(&az_bm).add(&z.left_mul(&plant.da)).he();
    let qpa: Vec<_> = (0..nn)
        .map(|i| {
            let psi_a = plant.decouplers[i].psi.matmul(&plant.a[i]);
            qs[i].right_mul(&psi_a).sub(&AffineMatrix::rect_var(l, vars.m2[i]).right_mul(&plant.c[i]))
        })
        .collect();
    let omega22 = affine_block_diag(&qpa).he();
    Blocks { omega11, omega22, z }
}

/// The 8×8 block LMI with block sizes `(n, n, q, n, n, n, n, n)`.
pub fn assemble_omega<T: Scalar>(plant: &DesignPlant<T>, spec: &DesignSpec<T>, vars: &DesignVariables) -> Result<AffineLmi<T>> {
    let l = &vars.layout;
    let nn = plant.n_areas();
    let n = plant.n();
    let qd = plant.dist.cols();
    let blk = shared_blocks(plant, vars);
    let daz = blk.z.left_mul(&plant.da);
    let ident = Matrix::identity(n);
    let bm: Vec<_> = (0..nn).map(|i| AffineMatrix::rect_var(l, vars.m1[i]).left_mul(&plant.b[i])).collect();
    let qpsi: Vec<_> = (0..nn)
        .map(|i| AffineMatrix::sym_var(l, vars.q[i]).right_mul(&plant.decouplers[i].psi))
        .collect();
    let qpsi = affine_block_diag(&qpsi);

    let mut b = BlockLmiBuilder::new(&[n, n, qd, n, n, n, n, n]);
    b.set(0, 0, blk.omega11.clone())?;
    b.set(0, 2, AffineMatrix::constant(plant.dist.clone()))?;
    b.set(0, 3, blk.z.right_mul(&plant.cx.transpose()))?;
    b.set(0, 4, daz.transpose())?;
    b.set(0, 6, affine_block_diag(&bm))?;
    b.set(1, 1, blk.omega22.clone())?;
    // Zero whenever Ψ annihilates the disturbance channel.
    let psi_dist = plant.psi().matmul(&plant.dist);
    if psi_dist.max_abs() > T::tol(1e-12) * plant.dist.max_abs() {
        b.set(1, 2, qpsi.right_mul(&plant.dist))?;
    }
    b.set(1, 3, AffineMatrix::constant(plant.ce.transpose()))?;
    b.set(1, 5, qpsi)?;
    b.set(1, 7, AffineMatrix::constant(ident.clone()))?;
    b.set(2, 2, AffineMatrix::constant(Matrix::identity(qd).scale(-spec.gamma * spec.gamma)))?;
    b.set(3, 3, AffineMatrix::constant(ident.scale(-T::one())))?;
    b.set(4, 4, AffineMatrix::constant(ident.scale(-spec.eps1)))?;
    b.set(5, 5, AffineMatrix::constant(ident.scale(-T::one() / spec.eps1)))?;
    b.set(6, 6, blk.z.scale(-T::one() / spec.eps2))?;
    b.set(7, 7, blk.z.scale(-spec.eps2))?;
    b.build("omega")
}

/// Strip LMIs `diag(Ω₁₁ − 2b₁Z, −Ω₁₁ + 2a₁Z) ≺ 0` and the observer analogue.
pub fn assemble_strip_lmis<T: Scalar>(
    plant: &DesignPlant<T>,
    strips: &Strips<T>,
    vars: &DesignVariables,
) -> Result<[AffineLmi<T>; 2]> {
    let nn = plant.n_areas();
    strips.validate(nn)?;
    let n = plant.n();
    let l = &vars.layout;
    let blk = shared_blocks(plant, vars);
    let two = T::lit(2.0);
    let weighted = |ids: &[SymId], w: &dyn Fn(usize) -> T| {
        affine_block_diag(&(0..nn).map(|i| AffineMatrix::sym_var(l, ids[i]).scale(two * w(i))).collect::<Vec<_>>())
    };
    let build = |name: &str, om: &AffineMatrix<T>, ids: &[SymId], s: &[crate::synthesis::Strip<T>]| {
        let mut b = BlockLmiBuilder::new(&[n, n]);
        b.set(0, 0, om.sub(&weighted(ids, &|i| s[i].b)))?;
        b.set(1, 1, weighted(ids, &|i| s[i].a).sub(om))?;
        b.build(name)
    };
    Ok([
        build("strip:control", &blk.omega11, &vars.z, &strips.control)?,
        build("strip:observer", &blk.omega22, &vars.q, &strips.observer)?,
    ])
}

/// The full problem for one plant: Ω, optional strips, PD floors.
pub fn assemble_plant_problem<T: Scalar>(
    plant: &DesignPlant<T>,
    spec: &DesignSpec<T>,
    pd_floor: T,
) -> Result<(FeasibilityProblem<T>, DesignVariables)> {
    spec.validate(plant.n_areas())?;
    let vars = DesignVariables::new(plant);
    let mut lmis = vec![assemble_omega(plant, spec, &vars)?];
    if let Some(s) = &spec.strips {
        lmis.extend(assemble_strip_lmis(plant, s, &vars)?);
    }
    let p = FeasibilityProblem::new(vars.layout.clone(), lmis, pd_floor)?;
    Ok((p, vars))
}

/// Theorem-2 problem (with strips when the spec carries them) for the composite system.
pub fn assemble_theorem2<T: Scalar>(
    sys: &CompositeSystem<T>,
    out: &OutputSelection<T>,
    spec: &DesignSpec<T>,
    decouplers: &[Decoupler<T>],
) -> Result<(FeasibilityProblem<T>, DesignVariables)> {
    let plant = DesignPlant::integrated(sys, out, decouplers)?;
    assemble_plant_problem(&plant, spec, T::lit(DEFAULT_PD_FLOOR))
}

/// Strip LMIs alone for the composite system.
pub fn assemble_strip_constraints<T: Scalar>(
    sys: &CompositeSystem<T>,
    out: &OutputSelection<T>,
    spec: &DesignSpec<T>,
    decouplers: &[Decoupler<T>],
) -> Result<[AffineLmi<T>; 2]> {
    let strips = spec.strips.as_ref().ok_or_else(|| Error::Parameter {
        field: "strips".into(),
        reason: "strip constraints requested but the spec has none".into(),
    })?;
    let plant = DesignPlant::integrated(sys, out, decouplers)?;
    let vars = DesignVariables::new(&plant);
    assemble_strip_lmis(&plant, strips, &vars)
}

/// Every matrix of one area's observer-based controller.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaGains<T> {
    pub k: Matrix<T>,
    pub h: Matrix<T>,
    pub psi: Matrix<T>,
    pub phi: Matrix<T>,
    pub g: Matrix<T>,
    pub l1: Matrix<T>,
    pub l2: Matrix<T>,
    pub l: Matrix<T>,
    pub z: Matrix<T>,
    pub q: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainSet<T> {
    pub areas: Vec<AreaGains<T>>,
}

impl<T: Scalar> GainSet<T> {
    pub fn n_areas(&self) -> usize {
        self.areas.len()
    }

    fn diag(&self, f: impl Fn(&AreaGains<T>) -> &Matrix<T>) -> Matrix<T> {
        Matrix::block_diag(&self.areas.iter().map(|a| f(a).clone()).collect::<Vec<_>>())
    }

    pub fn k(&self) -> Matrix<T> {
        self.diag(|a| &a.k)
    }

    pub fn h(&self) -> Matrix<T> {
        self.diag(|a| &a.h)
    }

    pub fn psi(&self) -> Matrix<T> {
        self.diag(|a| &a.psi)
    }

    pub fn phi(&self) -> Matrix<T> {
        self.diag(|a| &a.phi)
    }

    pub fn g(&self) -> Matrix<T> {
        self.diag(|a| &a.g)
    }

    pub fn l1(&self) -> Matrix<T> {
        self.diag(|a| &a.l1)
    }

    pub fn l(&self) -> Matrix<T> {
        self.diag(|a| &a.l)
    }

    pub fn z(&self) -> Matrix<T> {
        self.diag(|a| &a.z)
    }

    pub fn q(&self) -> Matrix<T> {
        self.diag(|a| &a.q)
    }

    /// Checks every matrix shape against `sys` and finiteness.
    pub fn check_compatible(&self, sys: &CompositeSystem<T>) -> Result<()> {
        if self.n_areas() != sys.n_areas {
            return Err(Error::Dimension(format!("gains for {} areas, system has {}", self.n_areas(), sys.n_areas)));
        }
        for (i, (g, a)) in self.areas.iter().zip(&sys.areas).enumerate() {
            let (n, m, p) = (a.a.rows(), a.b.cols(), a.c.rows());
            let shapes = [
                ("K", &g.k, (m, n)),
                ("H", &g.h, (n, p)),
                ("Psi", &g.psi, (n, n)),
                ("Phi", &g.phi, (n, n)),
                ("G", &g.g, (n, m)),
                ("L1", &g.l1, (n, p)),
                ("L2", &g.l2, (n, p)),
                ("L", &g.l, (n, p)),
                ("Z", &g.z, (n, n)),
                ("Q", &g.q, (n, n)),
            ];
            for (name, mat, want) in shapes {
                if mat.shape() != want {
                    return Err(Error::Dimension(format!(
                        "area {}: {name} is {}x{}, expected {}x{}",
                        i + 1,
                        mat.rows(),
                        mat.cols(),
                        want.0,
                        want.1
                    )));
                }
                mat.ensure_finite(&format!("area {} {name}", i + 1))?;
            }
        }
        Ok(())
    }

    /// Largest relative residual of `ΨF = 0`, `Φ = ΨA − L1C`, `G = ΨB`,
    /// `L2 = ΦH`, `L = L1 + L2` over all areas.
    pub fn identity_residual(&self, sys: &CompositeSystem<T>) -> T {
        let rel = |x: &Matrix<T>, y: &Matrix<T>| x.max_abs_diff(y) / (T::one() + y.max_abs());
        let mut worst = T::zero();
        for (g, a) in self.areas.iter().zip(&sys.areas) {
            let psi_f = g.psi.matmul(&a.f).max_abs() / a.f.max_abs().max(T::min_positive_value());
            let phi = &g.psi.matmul(&a.a) - &g.l1.matmul(&a.c);
            worst = worst
                .max(psi_f)
                .max(rel(&g.phi, &phi))
                .max(rel(&g.g, &g.psi.matmul(&a.b)))
                .max(rel(&g.l2, &g.phi.matmul(&g.h)))
                .max(rel(&g.l, &(&g.l1 + &g.l2)));
        }
        worst
    }
}

/// Gains from a decision vector: `K = M1 Z⁻¹`, `L1 = Q⁻¹ M2`, then Φ, G, L2, L.
pub fn recover_gains<T: Scalar>(x: &[T], plant: &DesignPlant<T>, vars: &DesignVariables) -> Result<GainSet<T>> {
    let l = &vars.layout;
    let mut areas = Vec::with_capacity(plant.n_areas());
    for i in 0..plant.n_areas() {
        let z = l.extract_sym(vars.z[i], x);
        let q = l.extract_sym(vars.q[i], x);
        let m1 = l.extract_rect(vars.m1[i], x);
        let m2 = l.extract_rect(vars.m2[i], x);
        // K Z = M1  ⇔  Z Kᵀ = M1ᵀ
        let k = solve_linear(&z, &m1.transpose())?.transpose();
        let l1 = solve_linear(&q, &m2)?;
        let dec = &plant.decouplers[i];
        let phi = &dec.psi.matmul(&plant.a[i]) - &l1.matmul(&plant.c[i]);
        let g = dec.psi.matmul(&plant.b[i]);
        let l2 = phi.matmul(&dec.h);
        let lsum = &l1 + &l2;
        areas.push(AreaGains { k, h: dec.h.clone(), psi: dec.psi.clone(), phi, g, l1, l2, l: lsum, z, q });
    }
    Ok(GainSet { areas })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignOptions<T> {
    pub solver: SolverOptions<T>,
    pub pd_floor: T,
    /// Recover gains from the best point even when no certified point is found.
    pub best_effort: bool,
    /// Floor for the best-effort re-solve. At the certification floor the
    /// best point of an infeasible problem presses `Z` against the floor and
    /// the recovered gains are ill-conditioned.
    pub best_effort_pd_floor: T,
}

/// Default floor for best-effort re-solves.
pub const BEST_EFFORT_PD_FLOOR: f64 = 1e-3;

impl<T: Scalar> Default for DesignOptions<T> {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            pd_floor: T::lit(DEFAULT_PD_FLOOR),
            best_effort: false,
            best_effort_pd_floor: T::lit(BEST_EFFORT_PD_FLOOR),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Integrated,
    Separated,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Integrated => "integrated",
            Strategy::Separated => "separated",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DesignStatus<T> {
    /// Every LMI certified at the required margin.
    Certified,
    /// Gains recovered from an uncertified best point.
    BestEffort { margin: T, blocking: String },
}

impl<T> DesignStatus<T> {
    pub fn is_certified(&self) -> bool {
        matches!(self, DesignStatus::Certified)
    }
}

#[derive(Clone, Debug)]
pub struct Design<T> {
    pub strategy: Strategy,
    pub gains: GainSet<T>,
    /// One solution per solved problem (one for integrated, N for separated).
    pub solutions: Vec<LmiSolution<T>>,
    pub status: DesignStatus<T>,
}

fn solve_plant<T: Scalar>(
    plant: &DesignPlant<T>,
    spec: &DesignSpec<T>,
    opts: &DesignOptions<T>,
    label: &str,
) -> Result<(GainSet<T>, LmiSolution<T>, DesignStatus<T>)> {
    let (problem, vars) = assemble_plant_problem(plant, spec, opts.pd_floor)?;
    let outcome = solve_feasibility(&problem, &opts.solver)?;
    let report = match outcome {
        SolveOutcome::Feasible(sol) => {
            let gains = recover_gains(&sol.x, plant, &vars)?;
            return Ok((gains, sol, DesignStatus::Certified));
        }
        SolveOutcome::Infeasible(r) => r,
    };
    let blocking = format!("{label}{}", report.blocking);
    if !opts.best_effort {
        return Err(Error::Infeasible { margin: report.margin.to_f64_lossy(), blocking });
    }
    log::warn!("{label}no certified point (margin {:e}, blocking `{}`)", report.margin, report.blocking);
    let (sol, vars, status) = if opts.best_effort_pd_floor > opts.pd_floor {
        let (problem, vars) = assemble_plant_problem(plant, spec, opts.best_effort_pd_floor)?;
        match solve_feasibility(&problem, &opts.solver)? {
            // a larger floor implies the smaller one, so this certifies
            SolveOutcome::Feasible(sol) => (sol, vars, DesignStatus::Certified),
            SolveOutcome::Infeasible(r) => {
                let blocking = format!("{label}{}", r.blocking);
                (r.best, vars, DesignStatus::BestEffort { margin: r.margin, blocking })
            }
        }
    } else {
        (report.best, vars, DesignStatus::BestEffort { margin: report.margin, blocking })
    };
    let gains = recover_gains(&sol.x, plant, &vars)?;
    Ok((gains, sol, status))
}

/// One coupled LMI for all areas, then gain recovery.
pub fn design_integrated<T: Scalar>(
    sys: &CompositeSystem<T>,
    out: &OutputSelection<T>,
    spec: &DesignSpec<T>,
    opts: &DesignOptions<T>,
) -> Result<Design<T>> {
    let decouplers = decouplers_for(sys)?;
    let plant = DesignPlant::integrated(sys, out, &decouplers)?;
    let (gains, sol, status) = solve_plant(&plant, spec, opts, "")?;
    Ok(Design { strategy: Strategy::Integrated, gains, solutions: vec![sol], status })
}

/// Each area designed alone with interactions treated as a disturbance.
pub fn design_separated<T: Scalar>(
    sys: &CompositeSystem<T>,
    out: &OutputSelection<T>,
    spec: &DesignSpec<T>,
    opts: &DesignOptions<T>,
) -> Result<Design<T>> {
    spec.validate(sys.n_areas)?;
    let plants = (0..sys.n_areas).map(|i| DesignPlant::separated_area(sys, out, i)).collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<_>> = std::thread::scope(|scope| {
        let handles: Vec<_> = plants
            .iter()
            .enumerate()
            .map(|(i, plant)| {
                let area_spec = DesignSpec { strips: spec.strips.as_ref().map(|s| s.area(i)), ..spec.clone() };
                scope.spawn(move || solve_plant(plant, &area_spec, opts, &format!("area{}:", i + 1)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("design thread panicked")).collect()
    });
    let mut areas = Vec::new();
    let mut solutions = Vec::new();
    let mut status = DesignStatus::Certified;
    for r in results {
        let (g, sol, st) = r?;
        areas.extend(g.areas);
        solutions.push(sol);
        if let DesignStatus::BestEffort { margin, blocking } = st {
            let replace = match &status {
                DesignStatus::Certified => true,
                DesignStatus::BestEffort { margin: m, .. } => margin > *m,
            };
            if replace {
                status = DesignStatus::BestEffort { margin, blocking };
            }
        }
    }
    Ok(Design { strategy: Strategy::Separated, gains: GainSet { areas }, solutions, status })
}
