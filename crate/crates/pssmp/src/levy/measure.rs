//! One-sided jump measures on magnitudes x > 0.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_inf};
use crate::real::Real;
use crate::special::{gamma, gamma_p, ln_gamma_ratio};

const QTOL: f64 = 1e-13;

/// Which of the two Lamperti-stable shapes the magnitudes follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LampertiShape {
    /// density c e^x (e^x - 1)^{-1-α}
    Up,
    /// density c e^{-x} (1 - e^{-x})^{-1-α}
    Down,
}

pub type TailFn<F> = Arc<dyn Fn(F) -> F + Send + Sync>;

#[derive(Clone)]
pub enum TailSource<F: Real> {
    /// Tabulated tail, interpolated log-log and extrapolated as a power law.
    Grid { x: Vec<F>, tail: Vec<F> },
    Callable(TailFn<F>),
}

#[derive(Clone)]
pub enum LevyMeasure<F: Real> {
    /// Π̄(x) = c x^{-α}/α.
    Stable { c: F, alpha: F },
    /// density mass·ρ e^{-ρx}.
    Exp { mass: F, rate: F },
    LampertiStable { c: F, alpha: F, shape: LampertiShape },
    /// (size, rate) atoms.
    Finite { atoms: Vec<(F, F)> },
    /// Arbitrary monotone tail; integrals start at `cutoff` with a power-law
    /// extrapolation below it.
    General { source: TailSource<F>, cutoff: F },
    /// Image of `inner` under x ↦ factor·x.
    Scaled { inner: Box<LevyMeasure<F>>, factor: F },
    /// e^{θx} inner(dx).
    Tilted { inner: Box<LevyMeasure<F>>, theta: F, table: Option<Arc<Vec<(F, F)>>> },
}

impl<F: Real> fmt::Debug for LevyMeasure<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Stable { c, alpha } => write!(f, "Stable {{ c: {c}, alpha: {alpha} }}"),
            Self::Exp { mass, rate } => write!(f, "Exp {{ mass: {mass}, rate: {rate} }}"),
            Self::LampertiStable { c, alpha, shape } => {
                write!(f, "LampertiStable {{ c: {c}, alpha: {alpha}, shape: {shape:?} }}")
            }
            Self::Finite { atoms } => write!(f, "Finite {{ atoms: {atoms:?} }}"),
            Self::General { source, cutoff } => match source {
                TailSource::Grid { x, .. } => write!(f, "General {{ grid: {} points, cutoff: {cutoff} }}", x.len()),
                TailSource::Callable(_) => write!(f, "General {{ callable, cutoff: {cutoff} }}"),
            },
            Self::Scaled { inner, factor } => write!(f, "Scaled {{ {inner:?} x {factor} }}"),
            Self::Tilted { inner, theta, .. } => write!(f, "Tilted {{ {inner:?}, theta: {theta} }}"),
        }
    }
}

fn lit<F: Real>(x: f64) -> F {
    F::lit(x)
}

impl<F: Real> LevyMeasure<F> {
    pub fn stable(c: F, alpha: F) -> Result<Self> {
        if !(c > F::zero()) || !(alpha > F::zero() && alpha < lit(2.0)) {
            return Err(Error::InvalidMeasure(format!("stable needs c > 0 and alpha in (0,2), got c={c}, alpha={alpha}")));
        }
        Ok(Self::Stable { c, alpha })
    }

    pub fn exp(mass: F, rate: F) -> Result<Self> {
        if !(mass > F::zero()) || !(rate > F::zero()) {
            return Err(Error::InvalidMeasure(format!("exp needs mass > 0 and rate > 0, got mass={mass}, rate={rate}")));
        }
        Ok(Self::Exp { mass, rate })
    }

    pub fn lamperti(c: F, alpha: F, shape: LampertiShape) -> Result<Self> {
        if !(c > F::zero()) || !(alpha > F::zero() && alpha < lit(2.0)) {
            return Err(Error::InvalidMeasure(format!("lamperti_stable needs c > 0 and alpha in (0,2), got c={c}, alpha={alpha}")));
        }
        Ok(Self::LampertiStable { c, alpha, shape })
    }

    pub fn finite(mut atoms: Vec<(F, F)>) -> Result<Self> {
        if atoms.is_empty() || atoms.iter().any(|&(s, r)| !(s > F::zero()) || !(r > F::zero())) {
            return Err(Error::InvalidMeasure("finite atoms need positive sizes and rates".into()));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(Self::Finite { atoms })
    }

    pub fn tail_grid(x: Vec<F>, tail: Vec<F>) -> Result<Self> {
        if x.len() < 2 || x.len() != tail.len() {
            return Err(Error::InvalidMeasure("tail_grid needs matching x and tail arrays of length >= 2".into()));
        }
        for i in 0..x.len() {
            if !(x[i] > F::zero()) || !(tail[i] > F::zero()) {
                return Err(Error::InvalidMeasure("tail_grid values must be positive".into()));
            }
            if i > 0 && (x[i] <= x[i - 1] || tail[i] > tail[i - 1]) {
                return Err(Error::InvalidMeasure("tail_grid must have increasing x and nonincreasing tail".into()));
            }
        }
        let m = Self::General { cutoff: x[0], source: TailSource::Grid { x, tail } };
        m.validate()?;
        Ok(m)
    }

    pub fn general(tail: TailFn<F>, cutoff: F) -> Result<Self> {
        let m = Self::General { source: TailSource::Callable(tail), cutoff };
        m.validate()?;
        Ok(m)
    }

    /// Checks monotonicity on a log grid and ∫(1∧x²)Π < ∞ through the power index at 0.
    pub fn validate(&self) -> Result<()> {
        let mut prev = F::infinity();
        for k in -40..=8 {
            let x = lit::<F>(10f64.powf(k as f64 / 4.0));
            let t = self.tail(x);
            if !(t >= F::zero()) || t > prev * (F::one() + lit(1e-12)) {
                return Err(Error::InvalidMeasure(format!("tail not nonincreasing/nonnegative at x={x}")));
            }
            prev = t;
        }
        if self.small_index() >= lit(2.0) {
            return Err(Error::InvalidMeasure("tail explodes too fast at 0".into()));
        }
        Ok(())
    }

    /// Power index a with Π̄(x) ≈ C x^{-a} as x → 0.
    pub fn small_index(&self) -> F {
        match self {
            Self::Stable { alpha, .. } | Self::LampertiStable { alpha, .. } => *alpha,
            Self::Exp { .. } | Self::Finite { .. } => F::zero(),
            Self::General { cutoff, .. } => self.local_index(*cutoff),
            Self::Scaled { inner, .. } | Self::Tilted { inner, .. } => inner.small_index(),
        }
    }

    fn local_index(&self, x: F) -> F {
        let t1 = self.tail(x);
        let t2 = self.tail(x * lit(2.0));
        if t1 <= F::zero() || t2 <= F::zero() {
            return F::zero();
        }
        ((t1 / t2).ln() / lit::<F>(2.0).ln()).max(F::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.total_mass().is_finite()
    }

    pub fn is_finite_variation(&self) -> bool {
        self.small_index() < F::one()
    }

    pub fn total_mass(&self) -> F {
        match self {
            Self::Exp { mass, .. } => *mass,
            Self::Finite { atoms } => atoms.iter().map(|a| a.1).sum(),
            Self::General { .. } => {
                if self.small_index() > lit(1e-3) {
                    F::infinity()
                } else {
                    self.tail(lit(1e-300f64.max(F::min_positive_value().to_f64x())))
                }
            }
            Self::Scaled { inner, .. } => inner.total_mass(),
            Self::Tilted { inner, .. } => {
                if inner.is_finite() {
                    self.tail(F::min_positive_value())
                } else {
                    F::infinity()
                }
            }
            _ => F::infinity(),
        }
    }

    /// Π̄(x) = Π((x, ∞)).
    pub fn tail(&self, x: F) -> F {
        let one = F::one();
        if !(x > F::zero()) {
            return self.total_mass();
        }
        match self {
            Self::Stable { c, alpha } => *c * x.powf(-*alpha) / *alpha,
            Self::Exp { mass, rate } => *mass * (-*rate * x).exp(),
            Self::LampertiStable { c, alpha, shape } => match shape {
                LampertiShape::Up => *c / *alpha * x.exp_m1().powf(-*alpha),
                LampertiShape::Down => {
                    // ln(1 − e^{−x}) without cancellation at either end.
                    let l = if x < F::LN_2() { (-(-x).exp_m1()).ln() } else { (-(-x).exp()).ln_1p() };
                    *c / *alpha * (-*alpha * l).exp_m1()
                }
            },
            Self::Finite { atoms } => atoms.iter().filter(|a| a.0 > x).map(|a| a.1).sum(),
            Self::General { source, cutoff } => match source {
                TailSource::Grid { x: xs, tail } => grid_tail(xs, tail, x),
                TailSource::Callable(f) => {
                    if x >= *cutoff {
                        f(x)
                    } else {
                        let t = f(*cutoff);
                        let a = self.local_index(*cutoff);
                        t * (x / *cutoff).powf(-a)
                    }
                }
            },
            Self::Scaled { inner, factor } => inner.tail(x / *factor),
            Self::Tilted { inner, theta, .. } => {
                // e^{θx}Π̄(x) + θ ∫_x^∞ e^{θy} Π̄(y) dy
                let th = *theta;
                let head = (th * x).exp() * inner.tail(x);
                if th == F::zero() {
                    return head;
                }
                let rest = integrate_inf(|y| (th * y).exp() * inner.tail(y), x, one.max(x), lit(1e-11));
                (head + th * rest).max(F::zero())
            }
        }
    }

    /// Density of the absolutely continuous variants; `None` for atoms.
    pub fn density(&self, x: F) -> Option<F> {
        let one = F::one();
        Some(match self {
            Self::Stable { c, alpha } => *c * x.powf(-one - *alpha),
            Self::Exp { mass, rate } => *mass * *rate * (-*rate * x).exp(),
            Self::LampertiStable { c, alpha, shape } => match shape {
                LampertiShape::Up => *c * x.exp() * x.exp_m1().powf(-one - *alpha),
                LampertiShape::Down => *c * (-x).exp() * (-(-x).exp_m1()).powf(-one - *alpha),
            },
            Self::Finite { .. } => return None,
            Self::General { .. } => {
                let h = lit::<F>(1e-5);
                (self.tail(x * (one - h)) - self.tail(x * (one + h))) / (lit::<F>(2.0) * h * x)
            }
            Self::Scaled { inner, factor } => inner.density(x / *factor)? / *factor,
            Self::Tilted { inner, theta, .. } => inner.density(x)? * (*theta * x).exp(),
        })
    }

    /// sup{s : ∫_{x>1} e^{sx} Π(dx) < ∞}; reaching it counts as divergent.
    pub fn abscissa(&self) -> F {
        match self {
            Self::Stable { .. } => F::zero(),
            Self::Exp { rate, .. } => *rate,
            Self::LampertiStable { alpha, shape, .. } => match shape {
                LampertiShape::Up => *alpha,
                LampertiShape::Down => F::one(),
            },
            Self::Finite { .. } => F::infinity(),
            Self::General { source, .. } => match source {
                TailSource::Grid { .. } => F::zero(),
                TailSource::Callable(f) => {
                    let (a, b) = (f(lit(50.0)), f(lit(100.0)));
                    if b <= F::zero() {
                        F::infinity()
                    } else {
                        ((a / b).ln() / lit(50.0)).max(F::zero())
                    }
                }
            },
            Self::Scaled { inner, factor } => inner.abscissa() / *factor,
            Self::Tilted { inner, theta, .. } => inner.abscissa() - *theta,
        }
    }

    /// ∫_(0,ε] x Π(dx).
    pub fn int_x_below(&self, eps: F) -> F {
        let one = F::one();
        match self {
            Self::Stable { c, alpha } => {
                if *alpha >= one {
                    F::infinity()
                } else {
                    *c * eps.powf(one - *alpha) / (one - *alpha)
                }
            }
            Self::Exp { mass, rate } => *mass * gamma_p(lit(2.0), *rate * eps) / *rate,
            Self::Finite { atoms } => atoms.iter().filter(|a| a.0 <= eps).map(|a| a.0 * a.1).sum(),
            Self::Scaled { inner, factor } => *factor * inner.int_x_below(eps / *factor),
            _ => {
                if !self.is_finite_variation() {
                    return F::infinity();
                }
                self.moment_below(eps, 1)
            }
        }
    }

    /// ∫_(0,ε] x² Π(dx).
    pub fn int_x2_below(&self, eps: F) -> F {
        let two = lit::<F>(2.0);
        match self {
            Self::Stable { c, alpha } => *c * eps.powf(two - *alpha) / (two - *alpha),
            Self::Exp { mass, rate } => *mass * two * gamma_p(lit(3.0), *rate * eps) / (*rate * *rate),
            Self::Finite { atoms } => atoms.iter().filter(|a| a.0 <= eps).map(|a| a.0 * a.0 * a.1).sum(),
            Self::Scaled { inner, factor } => *factor * *factor * inner.int_x2_below(eps / *factor),
            _ => self.moment_below(eps, 2),
        }
    }

    /// ∫_(0,ε] x^p Π(dx) for p ∈ {1,2} via the density.
    fn moment_below(&self, eps: F, p: i32) -> F {
        integrate(|x| x.powi(p) * self.density(x).unwrap_or(F::zero()), F::zero(), eps, lit(QTOL))
    }

    /// ∫_(a,b] x Π(dx) for 0 < a < b.
    pub fn int_x_between(&self, a: F, b: F) -> F {
        if b <= a {
            return F::zero();
        }
        if let Self::Finite { atoms } = self {
            return atoms.iter().filter(|s| s.0 > a && s.0 <= b).map(|s| s.0 * s.1).sum();
        }
        a * self.tail(a) - b * self.tail(b) + integrate(|x| self.tail(x), a, b, lit(QTOL))
    }

    /// ∫(1 − e^{−λx}) Π(dx).
    pub fn laplace(&self, lambda: F) -> F {
        let one = F::one();
        if lambda == F::zero() {
            return F::zero();
        }
        match self {
            Self::Stable { c, alpha } if *alpha < one => *c * gamma(one - *alpha) * lambda.powf(*alpha) / *alpha,
            Self::Exp { mass, rate } => *mass * lambda / (lambda + *rate),
            Self::Finite { atoms } => atoms.iter().map(|a| a.1 * -(-lambda * a.0).exp_m1()).sum(),
            Self::LampertiStable { c, alpha, shape: LampertiShape::Down } if *alpha < one => {
                // Γ(1−α)Γ(λ+1)/Γ(λ+1−α) − 1
                let g = gamma(one - *alpha) * gratio(lambda + one, lambda + one - *alpha);
                *c / *alpha * (g - one)
            }
            Self::Scaled { inner, factor } => inner.laplace(lambda * *factor),
            _ => {
                if !self.is_finite_variation() {
                    return F::infinity();
                }
                lambda * self.tail_transform(-lambda)
            }
        }
    }

    /// ∫_0^∞ e^{sx} Π̄(x) dx (s below the abscissa).
    fn tail_transform(&self, s: F) -> F {
        let one = F::one();
        let head = integrate(|x| (s * x).exp() * self.tail(x), F::zero(), one, lit(QTOL));
        let tail = integrate_inf(|x| (s * x).exp() * self.tail(x), one, one, lit(QTOL));
        head + tail
    }

    /// ∫(e^{sx} − 1 − s x 1_{x≤1}·[compensated]) Π(dx); +∞ at or beyond the abscissa.
    pub fn exp_integral(&self, s: F, compensated: bool) -> F {
        let one = F::one();
        if s == F::zero() {
            return F::zero();
        }
        if s >= self.abscissa() {
            return F::infinity();
        }
        match self {
            Self::Stable { c, alpha } => {
                let l = -s;
                if compensated && *alpha > one {
                    *c * gamma(-*alpha) * l.powf(*alpha) + s * *c / (*alpha - one)
                } else if !compensated && *alpha < one {
                    -*c * gamma(one - *alpha) * l.powf(*alpha) / *alpha
                } else {
                    self.exp_integral_numeric(s, compensated)
                }
            }
            Self::Exp { mass, rate } => {
                let base = *mass * s / (*rate - s);
                if compensated {
                    base - s * *mass * gamma_p(lit(2.0), *rate) / *rate
                } else {
                    base
                }
            }
            Self::Finite { atoms } => atoms
                .iter()
                .map(|&(x, r)| {
                    let comp = if compensated && x <= one { s * x } else { F::zero() };
                    r * ((s * x).exp_m1() - comp)
                })
                .sum(),
            Self::LampertiStable { c, alpha, shape } if !compensated && *alpha < one => match shape {
                LampertiShape::Up => {
                    // c Γ(−α) Γ(α−s)/Γ(−s)
                    *c * gamma(-*alpha) * gratio(*alpha - s, -s)
                }
                LampertiShape::Down => {
                    // c [Γ(−α) Γ(1−s)/Γ(1−s−α) + 1/α]
                    *c * (gamma(-*alpha) * gratio(one - s, one - s - *alpha) + one / *alpha)
                }
            },
            Self::Scaled { inner, factor } => {
                let a = *factor;
                let base = inner.exp_integral(s * a, compensated);
                if !compensated || a == one || !base.is_finite() {
                    return base;
                }
                // inner compensates y ≤ 1, we need y ≤ 1/a.
                let corr = if a < one { inner.int_x_between(one, one / a) } else { -inner.int_x_between(one / a, one) };
                base - s * a * corr
            }
            _ => self.exp_integral_numeric(s, compensated),
        }
    }

    fn exp_integral_numeric(&self, s: F, compensated: bool) -> F {
        let one = F::one();
        let head = if compensated {
            integrate(|x| (s * x).exp_m1() * self.tail(x), F::zero(), one, lit(QTOL)) + self.tail(one)
        } else {
            integrate(|x| (s * x).exp() * self.tail(x), F::zero(), one, lit(QTOL))
        };
        let far = integrate_inf(|x| (s * x).exp() * self.tail(x), one, one, lit(QTOL));
        s * (head + far)
    }

    /// Draws from Π restricted to (ε, ∞), normalized.
    pub fn sample_above<R: Rng + ?Sized>(&self, eps: F, rng: &mut R) -> Result<F> {
        let one = F::one();
        let u = F::open01(rng);
        match self {
            Self::Stable { alpha, .. } => {
                if !(eps > F::zero()) {
                    return Err(Error::EmptyTail);
                }
                Ok(eps * u.powf(-one / *alpha))
            }
            Self::Exp { rate, .. } => Ok(eps.max(F::zero()) - u.ln() / *rate),
            Self::LampertiStable { c, alpha, shape } => {
                if !(eps > F::zero()) {
                    return Err(Error::EmptyTail);
                }
                match shape {
                    LampertiShape::Up => Ok((eps.exp_m1() * u.powf(-one / *alpha)).ln_1p()),
                    LampertiShape::Down => {
                        let t = u * self.tail(eps);
                        let a = *alpha * t / *c;
                        // 1 − e^{−z} = (1+a)^{−1/α}
                        let one_minus_y = -(-(a.ln_1p()) / *alpha).exp_m1();
                        Ok(-one_minus_y.ln())
                    }
                }
            }
            Self::Finite { atoms } => {
                let total: F = atoms.iter().filter(|a| a.0 > eps).map(|a| a.1).sum();
                if total <= F::zero() {
                    return Err(Error::EmptyTail);
                }
                let mut acc = F::zero();
                let target = u * total;
                let mut last = None;
                for a in atoms.iter().filter(|a| a.0 > eps) {
                    acc = acc + a.1;
                    last = Some(a.0);
                    if target < acc {
                        return Ok(a.0);
                    }
                }
                Ok(last.unwrap())
            }
            Self::Scaled { inner, factor } => Ok(*factor * inner.sample_above(eps / *factor, rng)?),
            Self::Tilted { inner, theta, table } => {
                if *theta <= F::zero() {
                    loop {
                        let x = inner.sample_above(eps, rng)?;
                        if F::open01(rng) < (*theta * x).exp() {
                            return Ok(x);
                        }
                    }
                }
                let table = table.as_ref().ok_or_else(|| Error::InvalidMeasure("tilted table missing".into()))?;
                let t0 = self.tail(eps);
                if !(t0 > F::zero()) {
                    return Err(Error::EmptyTail);
                }
                Ok(invert_table(table, u * t0).max(eps))
            }
            Self::General { .. } => {
                let t0 = self.tail(eps);
                if !(t0 > F::zero()) || !t0.is_finite() {
                    return Err(Error::EmptyTail);
                }
                let target = u * t0;
                let mut lo = eps.max(F::min_positive_value());
                let mut hi = lo * lit(2.0) + one;
                let mut guard = 0;
                while self.tail(hi) > target {
                    lo = hi;
                    hi = hi * lit(2.0);
                    guard += 1;
                    if guard > 2000 {
                        return Err(Error::InvalidMeasure("tail does not vanish".into()));
                    }
                }
                for _ in 0..200 {
                    let mid = if lo > F::zero() { (lo * hi).sqrt() } else { hi * lit(0.5) };
                    if self.tail(mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if (hi - lo) <= lit::<F>(1e-10) * hi {
                        break;
                    }
                }
                Ok((lo + hi) * lit(0.5))
            }
        }
    }

    /// Image under x ↦ a x, using closed forms where the family is closed.
    pub fn scaled(&self, a: F) -> Self {
        if a == F::one() {
            return self.clone();
        }
        match self {
            Self::Stable { c, alpha } => Self::Stable { c: *c * a.powf(*alpha), alpha: *alpha },
            Self::Exp { mass, rate } => Self::Exp { mass: *mass, rate: *rate / a },
            Self::Finite { atoms } => Self::Finite { atoms: atoms.iter().map(|&(s, r)| (s * a, r)).collect() },
            Self::General { source: TailSource::Grid { x, tail }, cutoff } => Self::General {
                source: TailSource::Grid { x: x.iter().map(|&v| v * a).collect(), tail: tail.clone() },
                cutoff: *cutoff * a,
            },
            Self::Scaled { inner, factor } => inner.scaled(*factor * a),
            _ => Self::Scaled { inner: Box::new(self.clone()), factor: a },
        }
    }

    /// e^{θx} Π(dx), closed form where the family is closed.
    pub fn tilted(&self, theta: F) -> Result<Self> {
        if theta == F::zero() {
            return Ok(self.clone());
        }
        if theta >= self.abscissa() {
            return Err(Error::TiltDiverges(format!("theta {theta} reaches the exponential-moment abscissa {}", self.abscissa())));
        }
        Ok(match self {
            Self::Exp { mass, rate } => {
                let r = *rate - theta;
                Self::Exp { mass: *mass * *rate / r, rate: r }
            }
            Self::Finite { atoms } => Self::Finite { atoms: atoms.iter().map(|&(s, r)| (s, r * (theta * s).exp())).collect() },
            Self::Tilted { inner, theta: t0, .. } => return inner.tilted(*t0 + theta),
            _ => {
                let mut m = Self::Tilted { inner: Box::new(self.clone()), theta, table: None };
                if theta > F::zero() {
                    let table = build_table(&m);
                    if let Self::Tilted { table: t, .. } = &mut m {
                        *t = Some(Arc::new(table));
                    }
                }
                m
            }
        })
    }
}

/// Γ(a)/Γ(b); zero when b is a pole.
fn gratio<F: Real>(a: F, b: F) -> F {
    if a > F::zero() && b > F::zero() {
        ln_gamma_ratio(b, a - b).exp()
    } else {
        gamma(a) * crate::special::rgamma(b)
    }
}

fn grid_tail<F: Real>(xs: &[F], tail: &[F], x: F) -> F {
    let n = xs.len();
    let (i, j) = if x <= xs[0] {
        (0, 1)
    } else if x >= xs[n - 1] {
        (n - 2, n - 1)
    } else {
        let k = xs.partition_point(|&v| v <= x);
        (k - 1, k)
    };
    let (lx0, lx1) = (xs[i].ln(), xs[j].ln());
    let (lt0, lt1) = (tail[i].ln(), tail[j].ln());
    let w = (x.ln() - lx0) / (lx1 - lx0);
    (lt0 + w * (lt1 - lt0)).exp()
}

fn build_table<F: Real>(m: &LevyMeasure<F>) -> Vec<(F, F)> {
    let mut out = Vec::new();
    let mut k = -12.0;
    while k <= 3.0 {
        let x = F::lit(10f64.powf(k));
        let t = m.tail(x);
        if t > F::zero() && t.is_finite() {
            out.push((x, t));
        }
        k += 0.025;
    }
    out
}

fn invert_table<F: Real>(table: &[(F, F)], target: F) -> F {
    // Tail values decrease along the table.
    let n = table.len();
    if target >= table[0].1 {
        return table[0].0;
    }
    if target <= table[n - 1].1 {
        return table[n - 1].0;
    }
    let k = table.partition_point(|e| e.1 > target);
    let (x0, t0) = table[k - 1];
    let (x1, t1) = table[k];
    let w = (target.ln() - t0.ln()) / (t1.ln() - t0.ln());
    (x0.ln() + w * (x1.ln() - x0.ln())).exp()
}
