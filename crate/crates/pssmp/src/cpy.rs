//! Density of I for subordinators through the hazard h = k/P(I > ·).
//!
//! Writing P(I > x) = e^{−f(x)} and h = f', the integral equation for the density becomes
//!
//!   (1 − dx) h(x) = q + ∫ (1 − e^{−(f(xe^v) − f(x))}) Π(dv),
//!
//! with f(xe^v) = ∞ once xe^v ≥ 1/d. The right side only looks at points above x, so the
//! solver marches from the top of the grid downwards. The grid is uniform in u with x = e^u
//! (no drift) or x = t_F/(1 + e^{−u}) (drift d > 0), and D(u) = h(x(u))·x'(u) is taken piecewise
//! linear in u, so f is piecewise quadratic and exact between nodes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expfun::moments_i;
use crate::levy::{LevyMeasure, LevySpec};
use crate::norming::{first_moment, phi_inverse};
use crate::quad::brent;
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct CpyConfig<F: Real> {
    pub nodes: usize,
    /// Upper end of the grid when t_F = ∞; chosen from the moments if `None`.
    pub x_max: Option<F>,
    /// Lower end as a fraction of x_max (or of t_F).
    pub x_min_ratio: F,
    pub max_sweeps: usize,
    pub tol: F,
}

impl<F: Real> Default for CpyConfig<F> {
    fn default() -> Self {
        Self { nodes: 2048, x_max: None, x_min_ratio: F::lit(1e-7), max_sweeps: 200, tol: F::lit(1e-10) }
    }
}

/// Level of Δf beyond which e^{−Δf} is treated as 0.
const SATURATION: f64 = 40.0;
/// Cells whose f-increment exceeds this use Gauss-Legendre instead of linear interpolation of G.
const LINEAR_CELL: f64 = 0.02;
/// Extra cells past the last node, in units of u.
const EXTENSION: f64 = 3.0;

const GL8: [(f64, f64); 8] = [
    (0.019855071751231856, 0.050614268145188129),
    (0.101666761293186630, 0.111190517226687235),
    (0.237233795041835507, 0.156853322938943644),
    (0.408282678752175098, 0.181341891689180991),
    (0.591717321247824902, 0.181341891689180991),
    (0.762766204958164493, 0.156853322938943644),
    (0.898333238706813370, 0.111190517226687235),
    (0.980144928248768144, 0.050614268145188129),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum GridMap {
    Log,
    Logistic { t_f: f64 },
}

#[derive(Debug, Clone)]
struct Grid<F: Real> {
    logistic: bool,
    t_f: F,
    u0: F,
    du: F,
    /// Real nodes.
    n: usize,
    /// Real plus extension nodes.
    total: usize,
}

impl<F: Real> Grid<F> {
    fn u(&self, j: usize) -> F {
        self.u0 + self.du * F::from_usize(j).unwrap()
    }

    fn x_of(&self, u: F) -> F {
        if self.logistic {
            self.t_f / (F::one() + (-u).exp())
        } else {
            u.exp()
        }
    }

    fn u_of(&self, x: F) -> F {
        if self.logistic {
            (x / (self.t_f - x)).ln()
        } else {
            x.ln()
        }
    }

    /// dx/du.
    fn xp_of(&self, u: F) -> F {
        if self.logistic {
            let e = (-u).exp();
            self.t_f * e / ((F::one() + e) * (F::one() + e))
        } else {
            u.exp()
        }
    }

    /// v = ln(x(ua + delta)/x(ua)) for delta ≥ 0, without cancellation.
    fn vdiff(&self, ua: F, delta: F) -> F {
        if self.logistic {
            let ea = (-ua).exp();
            (ea * -(-delta).exp_m1() / (F::one() + (-(ua + delta)).exp())).ln_1p()
        } else {
            delta
        }
    }

    /// dv/du at u.
    fn dv(&self, u: F) -> F {
        if self.logistic {
            F::one() / (F::one() + u.exp())
        } else {
            F::one()
        }
    }

    /// ln(t_F/x(u)), the jump size that leaves the support.
    fn v_star(&self, u: F) -> F {
        if self.logistic {
            (-u).exp().ln_1p()
        } else {
            F::infinity()
        }
    }
}

#[derive(Debug, Clone)]
struct Cell<F: Real> {
    w0: F,
    w1: F,
    gl: [(F, F); 8],
    /// Π̄ at the start of the cell.
    tail_start: F,
}

/// Quadrature weights of Π for the cells above one node.
#[derive(Debug, Clone)]
struct Table<F: Real> {
    /// First cell: (s, weight) pairs resolving the singularity of Π at 0.
    first: Vec<(F, F)>,
    /// Cells 1, 2, ...
    cells: Vec<Cell<F>>,
    tail_end: F,
    tail_star: F,
}

/// Tanh-sinh nodes on (0,1) as (s, weight).
fn ts_nodes<F: Real>() -> Vec<(F, F)> {
    let h = 1.0 / 32.0;
    let mut out = vec![(F::lit(0.5), F::lit(std::f64::consts::PI / 4.0 * h))];
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > 4.0 {
            break;
        }
        let e = (std::f64::consts::PI * t.sinh()).exp();
        let s = 1.0 / (1.0 + e);
        let cs = e * s;
        let w = std::f64::consts::PI * t.cosh() * s * cs * h;
        if s > 0.0 && w > 0.0 {
            out.push((F::lit(s), F::lit(w)));
            out.push((F::lit(cs), F::lit(w)));
        }
        k += 1;
    }
    out
}

struct Kernel<'a, F: Real> {
    g: Grid<F>,
    measure: Option<&'a LevyMeasure<F>>,
    atoms: Vec<(F, F)>,
    q: F,
    ts: Vec<(F, F)>,
    shared: Option<Table<F>>,
}

impl<'a, F: Real> Kernel<'a, F> {
    fn new(g: Grid<F>, measure: Option<&'a LevyMeasure<F>>, q: F) -> Self {
        let atoms = match measure {
            Some(LevyMeasure::Finite { atoms }) => atoms.clone(),
            _ => Vec::new(),
        };
        let continuous = if atoms.is_empty() { measure } else { None };
        let mut k = Self { g, measure: continuous, atoms, q, ts: ts_nodes(), shared: None };
        if !k.g.logistic {
            k.shared = Some(k.table(0));
        }
        k
    }

    /// Weights for node i (for the log map they do not depend on i).
    fn table(&self, i: usize) -> Table<F> {
        let g = &self.g;
        let Some(m) = self.measure else {
            return Table { first: Vec::new(), cells: Vec::new(), tail_end: F::zero(), tail_star: F::zero() };
        };
        let ui = g.u(i);
        let du = g.du;
        let dens = |v: F| m.density(v).unwrap_or(F::zero());
        let first = self
            .ts
            .iter()
            .map(|&(s, w)| {
                let u = ui + s * du;
                let v = g.vdiff(ui, s * du);
                (s, w * dens(v) * g.dv(u) * du)
            })
            .collect();
        let count = if g.logistic { g.total - 1 - i } else { g.total - 1 };
        let mut cells = Vec::with_capacity(count);
        for c in 1..count {
            let off = du * F::from_usize(c).unwrap();
            let ua = ui + off;
            let mut gl = [(F::zero(), F::zero()); 8];
            let (mut w0, mut w1) = (F::zero(), F::zero());
            for (k, &(s, w)) in GL8.iter().enumerate() {
                let s = F::lit(s);
                let u = ua + s * du;
                let om = F::lit(w) * dens(g.vdiff(ui, off + s * du)) * g.dv(u) * du;
                gl[k] = (s, om);
                w0 = w0 + om;
                w1 = w1 + om * s;
            }
            cells.push(Cell { w0, w1, gl, tail_start: m.tail(g.vdiff(ui, off)) });
        }
        let off_end = du * F::from_usize(count).unwrap();
        let vs = g.v_star(ui);
        Table { first, cells, tail_end: m.tail(g.vdiff(ui, off_end)), tail_star: if vs.is_finite() { m.tail(vs) } else { F::zero() } }
    }

    /// q + ∫(1 − e^{−Δf})Π(dv) at node i, with D_i = di and the suffix sums `s` of cells above i.
    fn rhs(&self, i: usize, di: F, dd: &[F], s: &[F], table: &Table<F>) -> F {
        let g = &self.g;
        let du = g.du;
        let half = F::lit(0.5);
        let sat = F::lit(SATURATION);
        let dn = dd[i + 1];
        let mut acc = self.q;
        // Δf from node i to u_{i+1}.
        let p1 = (di + dn) * du * half;
        if self.measure.is_some() {
            let mut first = F::zero();
            for &(sv, w) in &table.first {
                let df = di * sv * du + (dn - di) * sv * sv * du * half;
                first = first + w * -(-df).exp_m1();
            }
            acc = acc + first;
            // Cells above: cell c spans [u_{i+c}, u_{i+c+1}].
            let mut p = p1;
            let mut saturated = false;
            let ncells = table.cells.len();
            for (k, cell) in table.cells.iter().enumerate() {
                let j = i + 1 + k;
                if j + 1 >= g.total {
                    break;
                }
                if p >= sat {
                    acc = acc + cell.tail_start;
                    saturated = true;
                    break;
                }
                let inc = s[j] - s[j + 1];
                let (dj, dj1) = (dd[j], dd[j + 1]);
                if inc <= F::lit(LINEAR_CELL) {
                    let g0 = -(-p).exp_m1();
                    let g1 = -(-(p + inc)).exp_m1();
                    acc = acc + g0 * cell.w0 + (g1 - g0) * cell.w1;
                } else {
                    for &(sv, w) in &cell.gl {
                        let df = p + dj * sv * du + (dj1 - dj) * sv * sv * du * half;
                        acc = acc + w * -(-df).exp_m1();
                    }
                }
                p = p + inc;
                if k + 1 == ncells {
                    break;
                }
            }
            if !saturated {
                let gend = -(-p).exp_m1();
                acc = acc + gend * (table.tail_end - table.tail_star) + table.tail_star;
            }
        }
        for &(size, rate) in &self.atoms {
            acc = acc + rate * -(-self.delta_f_at(i, di, size, dd, s)).exp_m1();
        }
        acc
    }

    /// Rate of atoms of size at least v.
    fn atom_tail(&self, v: F) -> F {
        self.atoms.iter().filter(|a| a.0 >= v).fold(F::zero(), |acc, a| acc + a.1)
    }

    /// Δf from node i to x_i e^v.
    fn delta_f_at(&self, i: usize, di: F, v: F, dd: &[F], s: &[F]) -> F {
        let g = &self.g;
        let ui = g.u(i);
        let u = if g.logistic {
            if v >= g.v_star(ui) {
                return F::infinity();
            }
            g.u_of(g.x_of(ui) * v.exp())
        } else {
            ui + v
        };
        let pos = (u - g.u0) / g.du;
        let half = F::lit(0.5);
        let last = g.total - 1;
        let j = pos.floor().to_usize().unwrap_or(last).min(last);
        let frac = pos - F::from_usize(j).unwrap();
        let du = g.du;
        let dn = dd[i + 1];
        if j == i {
            return di * frac * du + (dn - di) * frac * frac * du * half;
        }
        let base = (di + dn) * du * half + (s[i + 1] - s[j]);
        if j == last {
            return base + dd[last] * frac * du;
        }
        base + dd[j] * frac * du + (dd[j + 1] - dd[j]) * frac * frac * du * half
    }
}

/// Solved density on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct DensityGrid<F: Real + Serialize> {
    pub map: GridMap,
    pub u0: F,
    pub du: F,
    pub x: Vec<F>,
    pub k: Vec<F>,
    pub hazard: Vec<F>,
    /// f = −ln P(I > x).
    pub f: Vec<F>,
    pub cumulative: Vec<F>,
    /// D = h·dx/du on real and extension nodes.
    #[serde(skip)]
    pub d_ext: Vec<F>,
    #[serde(skip)]
    pub f_ext: Vec<F>,
    pub boundary_mass: F,
    pub tail_mass: F,
    pub normalization_residual: F,
    pub sweeps: usize,
}

fn envelope<F: Real>(spec: &LevySpec<F>, x: F) -> F {
    let d = spec.sub_drift();
    let m = spec.sub_measure();
    let q = spec.killing;
    let one = F::one();
    let mass = m.map_or(F::zero(), |m| m.total_mass());
    if d > F::zero() {
        if mass.is_finite() {
            return (mass + q) / (one - d * x);
        }
        let y = x / (one - d * x);
        return phi_inverse(m, F::zero(), y).map(|p| d * p).unwrap_or(one);
    }
    if m.is_none() {
        return q;
    }
    phi_inverse(m, q, x).map(|p| p / x).unwrap_or(mass.min(one))
}

/// Markov bound on the P(I > x) = 1e−7 quantile from the first 40 moments.
pub fn default_x_max<F: Real + Serialize>(spec: &LevySpec<F>) -> Result<F> {
    let mu = moments_i(spec, 40)?;
    let mut best = F::infinity();
    for (n, m) in mu.moments.iter().enumerate() {
        if m.is_finite() {
            best = best.min((*m / F::lit(1e-7)).powf(F::one() / F::from_usize(n + 1).unwrap()));
        }
    }
    Ok(best)
}

fn build_grid<F: Real + Serialize>(spec: &LevySpec<F>, cfg: &CpyConfig<F>, x_lo: Option<F>) -> Result<Grid<F>> {
    let n = cfg.nodes.max(16);
    let d = spec.sub_drift();
    if d > F::zero() {
        let t_f = F::one() / d;
        let mut u_hi = F::lit(1e9).ln();
        let mass = spec.sub_measure().map_or(F::zero(), |m| m.total_mass());
        if mass.is_finite() {
            let gamma0 = (mass + spec.killing) / d;
            if gamma0 > F::zero() {
                u_hi = u_hi.max(F::lit(16.0) / gamma0);
            }
        }
        let u_lo = match x_lo {
            Some(x) => (x / (t_f - x)).ln(),
            None => cfg.x_min_ratio.ln(),
        };
        let du = (u_hi - u_lo) / F::from_usize(n - 1).unwrap();
        let ext = (F::lit(EXTENSION) / du).ceil().to_usize().unwrap();
        Ok(Grid { logistic: true, t_f, u0: u_lo, du, n, total: n + ext })
    } else {
        let x_max = match cfg.x_max {
            Some(x) => x,
            None => default_x_max(spec)?,
        };
        let x_min = x_lo.unwrap_or(x_max * cfg.x_min_ratio);
        let (u_lo, u_hi) = (x_min.ln(), x_max.ln());
        let du = (u_hi - u_lo) / F::from_usize(n - 1).unwrap();
        let ext = (F::lit(EXTENSION) / du).ceil().to_usize().unwrap();
        Ok(Grid { logistic: false, t_f: F::infinity(), u0: u_lo, du, n, total: n + ext })
    }
}

/// Fills extension nodes from the last two real nodes.
fn extend<F: Real>(g: &Grid<F>, dd: &mut [F]) {
    let n = g.n;
    let (a, b) = (dd[n - 2], dd[n - 1]);
    let kappa = if g.logistic || !(a > F::zero()) || !(b > F::zero()) { F::zero() } else { ((b / a).ln() / g.du).max(F::zero()) };
    for (k, d) in dd[n..g.total].iter_mut().enumerate() {
        *d = b * (kappa * g.du * F::from_usize(k + 1).unwrap()).exp();
    }
}

/// Suffix sums s[j] = ∫_{u_j}^{u_end} D for the piecewise linear D.
fn suffix<F: Real>(g: &Grid<F>, dd: &[F], s: &mut [F], from: usize) {
    let half = F::lit(0.5);
    s[g.total - 1] = F::zero();
    for j in (from..g.total - 1).rev() {
        s[j] = s[j + 1] + (dd[j] + dd[j + 1]) * g.du * half;
    }
}

/// Solves for the density of I on a grid.
pub fn solve_cpy<F: Real + Serialize>(spec: &LevySpec<F>, cfg: &CpyConfig<F>) -> Result<DensityGrid<F>> {
    if !spec.is_subordinator_neg() {
        return Err(Error::NotASubordinator("the density equation needs -xi to be a subordinator".into()));
    }
    if spec.killing == F::zero() && spec.sub_measure().is_none() && spec.sub_drift() == F::zero() {
        return Err(Error::MayDiverge("xi is identically zero".into()));
    }
    let g = build_grid(spec, cfg, None)?;
    let kern = Kernel::new(g.clone(), spec.sub_measure(), spec.killing);
    let total = g.total;
    let mut dd = vec![F::zero(); total];
    for (j, d) in dd[..g.n].iter_mut().enumerate() {
        let u = g.u(j);
        *d = envelope(spec, g.x_of(u)) * g.xp_of(u);
    }
    extend(&g, &mut dd);
    let mut s = vec![F::zero(); total];
    let half = F::lit(0.5);
    let mut sweeps = 0;
    let solve_node = |i: usize, dd: &mut [F], s: &mut [F], sweeps: usize| -> Result<()> {
        let table_own;
        let table = match &kern.shared {
            Some(t) => t,
            None => {
                table_own = kern.table(i);
                &table_own
            }
        };
        let lhs_scale = F::one() / g.x_of(g.u(i));
        let eq = |di: F| di * lhs_scale - kern.rhs(i, di, dd, s, table);
        let mut hi = dd[i].max(dd[i + 1]).max(F::min_positive_value().sqrt());
        let mut guard = 0;
        while eq(hi) < F::zero() {
            hi = hi * F::lit(2.0);
            guard += 1;
            if guard > 200 {
                return Err(Error::NoConvergence { iterations: sweeps, residual: f64::INFINITY });
            }
        }
        let root = brent(eq, F::zero(), hi, hi * F::lit(1e-15), 200).ok_or(Error::NoConvergence { iterations: sweeps, residual: f64::NAN })?;
        dd[i] = root;
        s[i] = s[i + 1] + (dd[i] + dd[i + 1]) * g.du * half;
        Ok(())
    };
    // Nodes far below the top barely see the extension, so it is iterated on a top
    // window first and the rest is swept once.
    let sat = F::lit(SATURATION);
    // Bound on how much the extension moves the right side at node i.
    let reach = |i: usize, s: &[F]| -> F {
        match &kern.shared {
            Some(t) if g.n - 1 - i >= 1 && g.n - 2 - i < t.cells.len() => (-(s[i] - s[g.n - 1])).exp() * (t.cells[g.n - 2 - i].tail_start + kern.atom_tail(g.du * F::from_usize(g.n - 1 - i).unwrap())),
            _ => F::infinity(),
        }
    };
    let mut window = 0;
    let mut hist: Vec<(F, F)> = Vec::new();
    loop {
        sweeps += 1;
        suffix(&g, &dd, &mut s, g.n - 1);
        let mut lo = 0;
        for i in (0..g.n).rev() {
            solve_node(i, &mut dd, &mut s, sweeps)?;
            if i + 1 < g.n && (s[i] - s[g.n - 1] >= sat || reach(i, &s) < cfg.tol * F::lit(1e-2) * dd[i] / g.x_of(g.u(i))) {
                lo = i;
                break;
            }
        }
        window = window.max(g.n - lo);
        hist.push((dd[g.n - 2], dd[g.n - 1]));
        if hist.len() == 3 {
            // The top values converge linearly; Aitken's Δ² jumps ahead.
            let acc = |x0: F, x1: F, x2: F| {
                let den = (x2 - x1) - (x1 - x0);
                let v = x2 - (x2 - x1) * (x2 - x1) / den;
                if den != F::zero() && v.is_finite() && v > F::zero() { v } else { x2 }
            };
            dd[g.n - 2] = acc(hist[0].0, hist[1].0, hist[2].0);
            dd[g.n - 1] = acc(hist[0].1, hist[1].1, hist[2].1);
            hist.clear();
        }
        let old_top = dd[g.n..].to_vec();
        extend(&g, &mut dd);
        let ext_change = old_top
            .iter()
            .zip(&dd[g.n..])
            .map(|(a, b)| (*a - *b).abs() / b.abs().max(F::min_positive_value()))
            .fold(F::zero(), F::max);
        if ext_change < cfg.tol {
            break;
        }
        if sweeps >= cfg.max_sweeps {
            return Err(Error::NoConvergence { iterations: sweeps, residual: ext_change.to_f64x() });
        }
    }
    if window < g.n {
        suffix(&g, &dd, &mut s, g.n - window);
        for i in (0..g.n - window).rev() {
            solve_node(i, &mut dd, &mut s, sweeps)?;
        }
    }
    suffix(&g, &dd, &mut s, 0);
    Ok(assemble(&g, dd, s, sweeps))
}

fn assemble<F: Real + Serialize>(g: &Grid<F>, dd: Vec<F>, s: Vec<F>, sweeps: usize) -> DensityGrid<F> {
    // f(x_0) ≈ h(x_0)·x_0 ≈ D_0 below the grid.
    let f0 = dd[0];
    let f_ext: Vec<F> = (0..g.total).map(|j| f0 + (s[0] - s[j])).collect();
    let n = g.n;
    let mut x = Vec::with_capacity(n);
    let mut hazard = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    for j in 0..n {
        let u = g.u(j);
        let xj = g.x_of(u);
        let h = dd[j] / g.xp_of(u);
        x.push(xj);
        hazard.push(h);
        k.push(h * (-f_ext[j]).exp());
    }
    let f: Vec<F> = f_ext[..n].to_vec();
    let cumulative = f.iter().map(|v| -(-*v).exp_m1()).collect();
    let half = F::lit(0.5);
    let mut mass = F::zero();
    for j in 0..n - 1 {
        mass = mass + (dd[j] * (-f[j]).exp() + dd[j + 1] * (-f[j + 1]).exp()) * g.du * half;
    }
    let boundary_mass = -(-f0).exp_m1();
    let tail_mass = (-f[n - 1]).exp();
    let residual = (mass - F::one()).abs();
    for v in k.iter_mut() {
        *v = *v / mass;
    }
    DensityGrid {
        map: if g.logistic { GridMap::Logistic { t_f: g.t_f.to_f64x() } } else { GridMap::Log },
        u0: g.u0,
        du: g.du,
        x,
        k,
        hazard,
        f,
        cumulative,
        d_ext: dd,
        f_ext,
        boundary_mass,
        tail_mass,
        normalization_residual: residual,
        sweeps,
    }
}

impl<F: Real + Serialize> DensityGrid<F> {
    fn grid(&self) -> Grid<F> {
        let (logistic, t_f) = match self.map {
            GridMap::Log => (false, F::infinity()),
            GridMap::Logistic { t_f } => (true, F::lit(t_f)),
        };
        Grid { logistic, t_f, u0: self.u0, du: self.du, n: self.x.len(), total: self.d_ext.len() }
    }

    /// (f, h) at any x > 0.
    pub fn f_and_hazard(&self, x: F) -> (F, F) {
        let g = self.grid();
        if g.logistic && x >= g.t_f {
            return (F::infinity(), F::infinity());
        }
        if x <= self.x[0] {
            let h0 = self.hazard[0];
            return (self.f_ext[0] * x / self.x[0], h0);
        }
        let u = g.u_of(x);
        let pos = (u - g.u0) / g.du;
        let last = g.total - 1;
        let j = pos.floor().to_usize().unwrap_or(last).min(last);
        let fr = pos - F::from_usize(j).unwrap();
        let half = F::lit(0.5);
        let (dj, dj1) = if j == last { (self.d_ext[last], self.d_ext[last]) } else { (self.d_ext[j], self.d_ext[j + 1]) };
        let f = self.f_ext[j] + dj * fr * g.du + (dj1 - dj) * fr * fr * g.du * half;
        let dval = dj + (dj1 - dj) * fr;
        (f, dval / g.xp_of(u))
    }

    pub fn tail_prob(&self, x: F) -> F {
        (-self.f_and_hazard(x).0).exp()
    }

    pub fn hazard_at(&self, x: F) -> F {
        self.f_and_hazard(x).1
    }

    pub fn density_at(&self, x: F) -> F {
        let (f, h) = self.f_and_hazard(x);
        h * (-f).exp()
    }

    /// x with f(x) = target.
    pub fn f_inverse(&self, target: F) -> F {
        let g = self.grid();
        if target <= self.f_ext[0] {
            return self.x[0] * target / self.f_ext[0];
        }
        let last = g.total - 1;
        let j = self.f_ext.partition_point(|v| *v <= target).saturating_sub(1).min(last);
        let rem = target - self.f_ext[j];
        let fr = if j == last {
            rem / (self.d_ext[last] * g.du)
        } else {
            let (a, b) = (self.d_ext[j], self.d_ext[j + 1]);
            // a·du·s + (b − a)·du·s²/2 = rem
            let qa = (b - a) * g.du * F::lit(0.5);
            let qb = a * g.du;
            if qa.abs() < F::lit(1e-14) * qb.abs().max(F::min_positive_value()) {
                rem / qb
            } else {
                let disc = (qb * qb + F::lit(4.0) * qa * rem).max(F::zero());
                F::lit(2.0) * rem / (qb + disc.sqrt())
            }
        };
        g.x_of(g.u(j) + fr * g.du)
    }

    /// Draws I − t given I > t from P(I > x | I > t) = e^{−(f(x) − f(t))}.
    pub fn residual_draw(&self, t: F, e: F) -> F {
        let ft = self.f_and_hazard(t).0;
        self.f_inverse(ft + e) - t
    }

    /// ∫ x^n k dx by the trapezoid rule in u.
    pub fn moment(&self, n: i32) -> F {
        let g = self.grid();
        let half = F::lit(0.5);
        let mut acc = F::zero();
        for j in 0..self.x.len() - 1 {
            let a = self.x[j].powi(n) * self.k[j] * g.xp_of(g.u(j));
            let b = self.x[j + 1].powi(n) * self.k[j + 1] * g.xp_of(g.u(j + 1));
            acc = acc + (a + b) * g.du * half;
        }
        acc
    }

    /// f(t)·∫_t^∞ P(I>u)du / P(I>t)², computed relative to P(I > t).
    pub fn von_mises(&self, t: F) -> F {
        let (ft, ht) = self.f_and_hazard(t);
        let g = self.grid();
        let x_end = g.x_of(g.u(g.total - 1));
        let one = F::one();
        // Steps of a quarter of the local mean residual, exact for f linear within a step.
        let mut acc = F::zero();
        let (mut x, mut fx, mut hx) = (t, ft, ht);
        for _ in 0..1_000_000 {
            if fx - ft > F::lit(50.0) {
                break;
            }
            if x >= x_end {
                // Beyond the grid f grows linearly in u; bound the remainder by the last hazard.
                acc = acc + (-(fx - ft)).exp() / hx;
                break;
            }
            let mut dx = F::lit(0.25) / hx;
            if g.logistic {
                dx = dx.min((g.t_f - x) * F::lit(0.25));
            }
            let xn = (x + dx).min(x_end);
            let (fn_, hn) = self.f_and_hazard(xn);
            let df = fn_ - fx;
            let w = if df > F::lit(1e-8) { -(-df).exp_m1() / df } else { one - df * F::lit(0.5) };
            acc = acc + (-(fx - ft)).exp() * (xn - x) * w;
            x = xn;
            fx = fn_;
            hx = hn;
        }
        ht * acc
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,k,cumulative\n");
        for j in 0..self.x.len() {
            s.push_str(&format!("{},{},{}\n", self.x[j], self.k[j], self.cumulative[j]));
        }
        s
    }
}

/// Result of the explicit iteration h_{n+1} = q + ∫(1 − e^{−∫_x^{xe^v} h_n})Π(dv).
#[derive(Debug, Clone, Serialize)]
pub struct HnTable<F: Real + Serialize> {
    pub x: Vec<F>,
    pub h: Vec<F>,
    /// sup |h_n − h_{n−1}|/h_n per iteration.
    pub changes: Vec<F>,
    /// Largest relative decrease h_{n+1} < h_n on the upper half of the grid.
    pub max_monotonicity_violation: F,
}

/// Runs `n_iter` sweeps from h_0 ≡ 1 on a log grid over [x_lo, x_max].
pub fn tail_iteration_hn<F: Real + Serialize>(spec: &LevySpec<F>, x_lo: F, x_max: F, nodes: usize, n_iter: usize) -> Result<HnTable<F>> {
    if !spec.is_subordinator_neg() {
        return Err(Error::NotASubordinator("h_n iteration needs a subordinator".into()));
    }
    if spec.sub_drift() != F::zero() {
        return Err(Error::RegimeMismatch("h_n iteration is for drift-free subordinators".into()));
    }
    let cfg = CpyConfig { nodes, x_max: Some(x_max), ..CpyConfig::default() };
    let g = build_grid(spec, &cfg, Some(x_lo))?;
    let kern = Kernel::new(g.clone(), spec.sub_measure(), spec.killing);
    let table = kern.shared.clone().expect("log grid");
    let mut dd: Vec<F> = (0..g.total).map(|j| g.x_of(g.u(j))).collect();
    let mut s = vec![F::zero(); g.total];
    let mut h: Vec<F> = vec![F::one(); g.n];
    let mut changes = Vec::with_capacity(n_iter);
    let mut worst = F::zero();
    for _ in 0..n_iter {
        extend(&g, &mut dd);
        suffix(&g, &dd, &mut s, 0);
        let next: Vec<F> = (0..g.n).map(|i| kern.rhs(i, dd[i], &dd, &s, &table)).collect();
        let mut ch = F::zero();
        for i in 0..g.n {
            ch = ch.max((next[i] - h[i]).abs() / next[i].abs().max(F::min_positive_value()));
            if i >= g.n / 2 {
                let slack = F::lit(1e-12) * h[i].abs().max(F::one());
                if next[i] < h[i] - slack {
                    worst = worst.max((h[i] - next[i]) / h[i].abs().max(F::one()));
                }
            }
        }
        changes.push(ch);
        h = next;
        for i in 0..g.n {
            dd[i] = h[i] * g.x_of(g.u(i));
        }
    }
    let x = (0..g.n).map(|j| g.x_of(g.u(j))).collect();
    Ok(HnTable { x, h, changes, max_monotonicity_violation: worst })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailAsymptoteReport<F: Real + Serialize> {
    pub x: Vec<F>,
    /// h(x) divided by the regime's hazard envelope.
    pub ratio: Vec<F>,
    pub ratio_min: F,
    pub ratio_max: F,
}

/// Envelope of the hazard: φ_{Π,q}(x)/x without drift, d·φ_{Π,0}(x/(1−dx)) with drift.
pub fn hazard_envelope<F: Real>(spec: &LevySpec<F>, x: F) -> Result<F> {
    let d = spec.sub_drift();
    if d > F::zero() {
        phi_inverse(spec.sub_measure(), F::zero(), x / (F::one() - d * x)).map(|p| d * p)
    } else {
        phi_inverse(spec.sub_measure(), spec.killing, x).map(|p| p / x)
    }
}

/// Compares the solved hazard with its envelope on the top decade of the grid.
pub fn tail_asymptote_check<F: Real + Serialize>(spec: &LevySpec<F>, grid: &DensityGrid<F>) -> Result<TailAsymptoteReport<F>> {
    if !spec.is_subordinator_neg() {
        return Err(Error::RegimeMismatch("tail asymptotics need a Gumbel (subordinator) regime".into()));
    }
    let mass = spec.sub_measure().map_or(F::zero(), |m| m.total_mass());
    if spec.sub_drift() > F::zero() && mass.is_finite() {
        return Err(Error::RegimeMismatch("positive drift with a finite Levy measure is the Weibull regime".into()));
    }
    let top = *grid.x.last().unwrap();
    let lo = match grid.map {
        GridMap::Log => top / F::lit(10.0),
        GridMap::Logistic { t_f } => {
            let t_f = F::lit(t_f);
            t_f - (t_f - top) * F::lit(10.0)
        }
    };
    let mut x = Vec::new();
    let mut ratio = Vec::new();
    for (j, &xj) in grid.x.iter().enumerate() {
        if xj >= lo {
            x.push(xj);
            ratio.push(grid.hazard[j] / hazard_envelope(spec, xj)?);
        }
    }
    let ratio_min = ratio.iter().copied().fold(F::infinity(), F::min);
    let ratio_max = ratio.iter().copied().fold(F::neg_infinity(), F::max);
    Ok(TailAsymptoteReport { x, ratio, ratio_min, ratio_max })
}

/// Mass of Π plus killing for finite measures.
pub fn finite_rate<F: Real>(spec: &LevySpec<F>) -> F {
    spec.sub_measure().map_or(F::zero(), |m| m.total_mass()) + spec.killing
}

#[allow(dead_code)]
fn mean_jump<F: Real>(spec: &LevySpec<F>) -> F {
    first_moment(spec.sub_measure())
}
