//! Weight families `phi`, nonlinearities `f`, and their closed-form companions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bvp1d::{RadialGrid, RadialProfile};
use crate::error::{domain, LabError, Result};
use crate::quad::engine::{gk_adaptive, improper_log, ln_softplus, QuadOptions, Status};

/// Radial weight `phi(r)`, positive on `(0, inf)` except for `Zero`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    /// The degenerate weight `phi = 0`. Only quadrature helpers accept it.
    Zero,
    Power {
        alpha: f64,
    },
    /// `r^alpha` on `(0,1]`, `r^beta` on `(1,inf)`.
    PowerSplit {
        alpha: f64,
        beta: f64,
    },
    /// `r^alpha log^beta(1+r)`.
    PowerLog {
        alpha: f64,
        beta: f64,
    },
    /// `r^alpha log^b1(1 + log^b2(1 + ... log^bm(1+r)))`.
    IterLog {
        alpha: f64,
        betas: Vec<f64>,
    },
    /// Log-log interpolation between knots, power extrapolation outside.
    Tabulated {
        knots: Vec<f64>,
        values: Vec<f64>,
        near0_exponent: f64,
        tail_exponent: f64,
    },
    /// `r^exponent * base(1/r)`, the weight seen by a Kelvin transform.
    Kelvin {
        exponent: f64,
        base: Box<PhiSpec>,
    },
}

impl PhiSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                domain(format!("{what} must be finite"))
            }
        };
        match self {
            PhiSpec::Zero => Ok(()),
            PhiSpec::Power { alpha } => finite(*alpha, "alpha"),
            PhiSpec::PowerSplit { alpha, beta } => {
                finite(*alpha, "alpha")?;
                finite(*beta, "beta")
            }
            PhiSpec::PowerLog { alpha, beta } => {
                finite(*alpha, "alpha")?;
                if !(*beta > 0.0 && beta.is_finite()) {
                    return domain("power_log beta must be positive");
                }
                Ok(())
            }
            PhiSpec::IterLog { alpha, betas } => {
                finite(*alpha, "alpha")?;
                if betas.is_empty() || betas.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
                    return domain("iter_log needs a nonempty list of positive betas");
                }
                Ok(())
            }
            PhiSpec::Tabulated { knots, values, near0_exponent, tail_exponent } => {
                finite(*near0_exponent, "near0_exponent")?;
                finite(*tail_exponent, "tail_exponent")?;
                if knots.len() < 2 || knots.len() != values.len() {
                    return domain("tabulated weight needs matching knots and values (at least two)");
                }
                if knots[0] <= 0.0 || knots.windows(2).any(|w| !(w[1] > w[0])) {
                    return domain("tabulated knots must be positive and strictly increasing");
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return domain("tabulated values must be positive");
                }
                Ok(())
            }
            PhiSpec::Kelvin { exponent, base } => {
                finite(*exponent, "exponent")?;
                base.validate()
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PhiSpec::Zero)
    }

    /// `ln phi(e^l)`; `-inf` for the zero weight.
    pub fn ln_at_log(&self, l: f64) -> f64 {
        match self {
            PhiSpec::Zero => f64::NEG_INFINITY,
            PhiSpec::Power { alpha } => alpha * l,
            PhiSpec::PowerSplit { alpha, beta } => {
                if l <= 0.0 {
                    alpha * l
                } else {
                    beta * l
                }
            }
            PhiSpec::PowerLog { alpha, beta } => alpha * l + beta * ln_softplus(l),
            PhiSpec::IterLog { alpha, betas } => {
                // innermost first: ln g_m = b_m ln log(1+r), ln g_k = b_k ln log(1+g_{k+1})
                let mut lg = l;
                for b in betas.iter().rev() {
                    lg = b * ln_softplus(lg);
                }
                alpha * l + lg
            }
            PhiSpec::Tabulated { knots, values, near0_exponent, tail_exponent } => {
                let l0 = knots[0].ln();
                let l1 = knots[knots.len() - 1].ln();
                if l <= l0 {
                    values[0].ln() + near0_exponent * (l - l0)
                } else if l >= l1 {
                    values[values.len() - 1].ln() + tail_exponent * (l - l1)
                } else {
                    let r = l.exp();
                    let j = knots.partition_point(|&k| k <= r).clamp(1, knots.len() - 1);
                    let (la, lb) = (knots[j - 1].ln(), knots[j].ln());
                    let (va, vb) = (values[j - 1].ln(), values[j].ln());
                    let t = (l - la) / (lb - la);
                    va + t * (vb - va)
                }
            }
            PhiSpec::Kelvin { exponent, base } => exponent * l + base.ln_at_log(-l),
        }
    }

    /// `phi(r)` without the domain check.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            PhiSpec::Zero => 0.0,
            PhiSpec::Power { alpha } => r.powf(*alpha),
            PhiSpec::PowerSplit { alpha, beta } => r.powf(if r <= 1.0 { *alpha } else { *beta }),
            PhiSpec::PowerLog { alpha, beta } => r.powf(*alpha) * r.ln_1p().powf(*beta),
            _ => self.ln_at_log(r.ln()).exp(),
        }
    }

    /// Power behaviour `phi(r) ~ r^e` as `r -> 0`, logarithmic factors ignored.
    pub fn near0_exponent(&self) -> f64 {
        match self {
            PhiSpec::Zero => 0.0,
            PhiSpec::Power { alpha } => *alpha,
            PhiSpec::PowerSplit { alpha, .. } => *alpha,
            PhiSpec::PowerLog { alpha, beta } => alpha + beta,
            // Near zero each log(1+x) ~ x, so the nested exponents multiply.
            PhiSpec::IterLog { alpha, betas } => alpha + betas.iter().product::<f64>(),
            PhiSpec::Tabulated { near0_exponent, .. } => *near0_exponent,
            PhiSpec::Kelvin { exponent, base } => exponent - base.tail_exponent(),
        }
    }

    /// Power behaviour as `r -> inf`, logarithmic factors ignored.
    pub fn tail_exponent(&self) -> f64 {
        match self {
            PhiSpec::Zero => 0.0,
            PhiSpec::Power { alpha } => *alpha,
            PhiSpec::PowerSplit { beta, .. } => *beta,
            PhiSpec::PowerLog { alpha, .. } => *alpha,
            PhiSpec::IterLog { alpha, .. } => *alpha,
            PhiSpec::Tabulated { tail_exponent, .. } => *tail_exponent,
            PhiSpec::Kelvin { exponent, base } => exponent - base.near0_exponent(),
        }
    }

    /// True when `phi` is an exact power on `(0,1]` (resp. `[1,inf)`), so the
    /// exponent inequalities decide integrability with no log corrections.
    pub fn exact_power_near0(&self) -> bool {
        matches!(self, PhiSpec::Power { .. } | PhiSpec::PowerSplit { .. })
    }

    pub fn exact_power_tail(&self) -> bool {
        matches!(self, PhiSpec::Power { .. } | PhiSpec::PowerSplit { .. })
    }
}

pub fn eval_phi(phi: &PhiSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("phi evaluated at r = {r}"));
    }
    Ok(phi.value(r))
}

/// A user-supplied positive decreasing function.
#[derive(Clone)]
pub struct CustomFn {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "CustomFn({})", self.name)
    }
}

impl PartialEq for CustomFn {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.f, &o.f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Decreasing {
    /// `exp(-rate t)`
    Exp { rate: f64 },
    /// `(t + shift)^-p`
    ShiftedPower { p: f64, shift: f64 },
    #[serde(skip)]
    Custom(CustomFn),
}

/// Nonlinearity `f`. `Power { p: 0 }` is the constant `f = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FSpec {
    /// `t^-p`
    Power {
        p: f64,
    },
    GeneralDecreasing {
        evaluator: Decreasing,
    },
}

impl FSpec {
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> FSpec {
        FSpec::GeneralDecreasing { evaluator: Decreasing::Custom(CustomFn { name: name.to_string(), f: Arc::new(f) }) }
    }

    pub fn power_p(&self) -> Option<f64> {
        match self {
            FSpec::Power { p } => Some(*p),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            FSpec::Power { p } => t.powf(-p),
            FSpec::GeneralDecreasing { evaluator } => match evaluator {
                Decreasing::Exp { rate } => (-rate * t).exp(),
                Decreasing::ShiftedPower { p, shift } => (t + shift).powf(-p),
                Decreasing::Custom(c) => (c.f)(t),
            },
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            FSpec::Power { p } => {
                if *p == 0.0 {
                    0.0
                } else {
                    -p * t.powf(-p - 1.0)
                }
            }
            FSpec::GeneralDecreasing { evaluator } => match evaluator {
                Decreasing::Exp { rate } => -rate * (-rate * t).exp(),
                Decreasing::ShiftedPower { p, shift } => -p * (t + shift).powf(-p - 1.0),
                Decreasing::Custom(c) => {
                    let h = 1e-6 * t.max(1e-8);
                    let lo = (t - h).max(0.5 * t);
                    ((c.f)(t + h) - (c.f)(lo)) / (t + h - lo)
                }
            },
        }
    }

    /// Positivity and strict decrease, spot-checked on a log-spaced sample.
    pub fn validate(&self) -> Result<()> {
        match self {
            FSpec::Power { p } => {
                if !(*p >= 0.0 && p.is_finite()) {
                    return domain("f = t^-p needs p >= 0");
                }
                Ok(())
            }
            FSpec::GeneralDecreasing { evaluator } => {
                match evaluator {
                    Decreasing::Exp { rate } if !(*rate > 0.0) => return domain("exp rate must be positive"),
                    Decreasing::ShiftedPower { p, shift } if !(*p > 0.0 && *shift >= 0.0) => {
                        return domain("shifted power needs p > 0 and shift >= 0")
                    }
                    _ => {}
                }
                let mut prev = f64::INFINITY;
                for k in -40..=40 {
                    let t = 2f64.powf(k as f64 * 0.25);
                    let v = self.eval(t);
                    if v == 0.0 && prev < 1e-250 {
                        // underflow past the representable range
                        break;
                    }
                    if !(v > 0.0) || !v.is_finite() {
                        return domain(format!("f is not positive at t = {t:e}"));
                    }
                    if v >= prev && prev > f64::MIN_POSITIVE {
                        return domain(format!("f is not strictly decreasing near t = {t:e}"));
                    }
                    prev = v;
                }
                Ok(())
            }
        }
    }
}

/// `G(v) = int_0^v dt / f(t)` and its inverse.
#[derive(Debug, Clone)]
pub struct GMap {
    f: FSpec,
}

pub fn g_and_inverse(f: &FSpec) -> Result<GMap> {
    f.validate()?;
    let g = GMap { f: f.clone() };
    let probe = g.g(1.0)?;
    if !probe.is_finite() {
        return Err(LabError::Construction("1/f is not integrable near 0".into()));
    }
    Ok(g)
}

impl GMap {
    pub fn g(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return domain(format!("G evaluated at v = {v}"));
        }
        if let Some(p) = self.f.power_p() {
            return Ok(v.powf(1.0 + p) / (1.0 + p));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        let f = &self.f;
        let r = gk_adaptive(&mut |t| 1.0 / f.eval(t), 0.0, v, 1e-13, 0.0, 200_000);
        if !r.converged || !r.value.is_finite() {
            return Err(LabError::Construction(format!("G({v}) quadrature failed")));
        }
        Ok(r.value)
    }

    pub fn g_inv(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return domain(format!("G^-1 evaluated at s = {s}"));
        }
        if let Some(p) = self.f.power_p() {
            return Ok(((1.0 + p) * s).powf(1.0 / (1.0 + p)));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.g(hi)? < s {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(LabError::Construction("G is bounded; no inverse".into()));
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if self.g(mid)? < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// `u(r) = c r^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormPower {
    pub c: f64,
    pub q: f64,
}

impl ClosedFormPower {
    pub fn eval(&self, r: f64) -> f64 {
        self.c * r.powf(self.q)
    }

    /// `-Delta (c r^q)` in dimension `n`, from the exact derivatives.
    pub fn neg_laplacian(&self, n: usize, r: f64) -> f64 {
        -self.c * self.q * (self.q + n as f64 - 2.0) * r.powf(self.q - 2.0)
    }
}

/// Exact power solution of `-Delta u = r^alpha u^-p` in `R^N \ {0}`.
pub fn xi_closed_form(n: usize, p: f64, alpha: f64) -> Result<ClosedFormPower> {
    if n < 3 {
        return domain("the power solution needs N >= 3");
    }
    let nf = n as f64;
    let m = nf + alpha + p * (nf - 2.0);
    if !(m > 0.0 && alpha < -2.0) {
        return Err(LabError::NoSolution(format!(
            "N + alpha + p(N-2) = {m} and alpha = {alpha}: need the first positive and alpha < -2"
        )));
    }
    let q = (2.0 + alpha) / (1.0 + p);
    // Substituting c r^q: -c q (q + N - 2) = c^-p, and q + N - 2 = m / (1+p).
    let c = (-(1.0 + p).powi(2) / ((2.0 + alpha) * m)).powf(1.0 / (1.0 + p));
    Ok(ClosedFormPower { c, q })
}

fn check_tail(phi: &PhiSpec, r: f64, opts: &QuadOptions) -> Result<f64> {
    // T(r) = int_r^inf s phi(s) ds
    let lg = |l: f64| l + phi.ln_at_log(l);
    let t = improper_log(&lg, r.ln(), 1.0, opts);
    match t.status {
        Status::Finite => Ok(t.value),
        Status::Infinite => Err(LabError::Divergent { criterion: "tail r*phi".into(), certificate: t.partials }),
        Status::Inconclusive => Err(LabError::Construction("tail integral of r*phi is inconclusive".into())),
    }
}

fn inner_from_zero(phi: &PhiSpec, n: usize, r: f64, opts: &QuadOptions) -> Result<f64> {
    let k = n as f64 - 1.0;
    let lg = |l: f64| k * l + phi.ln_at_log(l);
    let t = improper_log(&lg, r.ln(), -1.0, opts);
    match t.status {
        Status::Finite => Ok(t.value),
        Status::Infinite => {
            Err(LabError::Divergent { criterion: "inner s^(N-1)*phi near 0".into(), certificate: t.partials })
        }
        Status::Inconclusive => Err(LabError::Construction("inner integral near 0 is inconclusive".into())),
    }
}

/// `int_a^b s^k phi(s) ds` for `0 < a <= b`, integrated in `ln s`.
pub(crate) fn moment(phi: &PhiSpec, k: f64, a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let (la, lb) = (a.ln(), b.ln());
    let shift =
        [la, 0.5 * (la + lb), lb].iter().map(|&l| (k + 1.0) * l + phi.ln_at_log(l)).fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return 0.0;
    }
    let r = gk_adaptive(&mut |l| ((k + 1.0) * l + phi.ln_at_log(l) - shift).exp(), la, lb, 1e-13, 0.0, 100_000);
    r.value * shift.exp()
}

/// `D(r) = int_r^inf t^(1-N) int_L^t s^(N-1) phi(s) ds dt`, evaluated through
/// the integration-by-parts form `(r^(2-N) int_L^r s^(N-1) phi + int_r^inf s phi) / (N-2)`.
pub fn double_integral_profile(phi: &PhiSpec, n: usize, inner_lower: f64, r: f64) -> Result<f64> {
    if n < 3 {
        return domain("the double integral profile needs N >= 3");
    }
    if !(inner_lower >= 0.0) || !(r > 0.0) || r < inner_lower {
        return domain(format!("need 0 <= inner_lower <= r, got {inner_lower}, {r}"));
    }
    phi.validate()?;
    if phi.is_zero() {
        return Ok(0.0);
    }
    let opts = QuadOptions::default();
    let tail = check_tail(phi, r, &opts)?;
    let inner = if inner_lower == 0.0 {
        inner_from_zero(phi, n, r, &opts)?
    } else {
        moment(phi, n as f64 - 1.0, inner_lower, r)
    };
    let nf = n as f64;
    Ok((r.powf(2.0 - nf) * inner + tail) / (nf - 2.0))
}

/// `v = G^-1(D)` sampled on a geometric grid from `r_min` to `1e4 max(1, r_min)`.
pub fn supersolution_profile(
    phi: &PhiSpec,
    f: &FSpec,
    n: usize,
    inner_lower: f64,
    r_min: f64,
) -> Result<RadialProfile> {
    let r_max = 1e4 * r_min.max(1.0);
    let octaves = (r_max / r_min).log2();
    let nodes = ((octaves * 64.0).ceil() as usize + 1).max(16);
    let grid = RadialGrid::geometric(r_min, r_max, nodes, n)?;
    supersolution_profile_on(phi, f, n, inner_lower, &grid)
}

/// As [`supersolution_profile`] on a caller-chosen grid.
pub fn supersolution_profile_on(
    phi: &PhiSpec,
    f: &FSpec,
    n: usize,
    inner_lower: f64,
    grid: &RadialGrid,
) -> Result<RadialProfile> {
    if phi.is_zero() {
        return Err(LabError::Refused("the super-solution needs a positive weight".into()));
    }
    let r = grid.nodes();
    if r[0] < inner_lower {
        return domain("grid starts below the inner lower limit");
    }
    let gmap = g_and_inverse(f)?;
    let nf = n as f64;
    let m = r.len();
    // Cumulative tail and inner integrals between neighbouring nodes.
    let mut tail = vec![0.0; m];
    tail[m - 1] = check_tail(phi, r[m - 1], &QuadOptions::default())?;
    for i in (0..m - 1).rev() {
        tail[i] = tail[i + 1] + moment(phi, 1.0, r[i], r[i + 1]);
    }
    let mut inner = vec![0.0; m];
    inner[0] = if inner_lower == 0.0 {
        inner_from_zero(phi, n, r[0], &QuadOptions::default())?
    } else {
        moment(phi, nf - 1.0, inner_lower, r[0])
    };
    for i in 1..m {
        inner[i] = inner[i - 1] + moment(phi, nf - 1.0, r[i - 1], r[i]);
    }
    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let d = (r[i].powf(2.0 - nf) * inner[i] + tail[i]) / (nf - 2.0);
        v.push(gmap.g_inv(d)?);
    }
    RadialProfile::new(grid.clone(), v)
}
