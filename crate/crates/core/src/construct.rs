//! Solution objects: the minimal solution, the two-parameter family, exterior
//! ball solutions, glued global super-solutions and point-set superpositions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{kelvin_transform, kelvin_weight};
use crate::bvp1d::{
    sci, solve_radial_dirichlet_from, solve_tridiagonal, RadialGrid, RadialProfile, Solution, SolveConfig,
};
use crate::error::{domain, LabError, Result};
use crate::funcs::supersolution_profile;
use crate::problem::{dist, KSet, ProblemSpec};
use crate::quad::{classify_existence, ExistencePrediction};

/// Default resolution of the expanding annuli for the minimal solution.
pub const MINIMAL_PER_OCTAVE: usize = 171;

/// Relative tolerance for the monotone-in-n check.
const MONOTONE_TOL: f64 = 1e-10;

fn weight(problem: &ProblemSpec) -> impl Fn(f64) -> f64 + '_ {
    move |r| problem.phi.value(problem.radial_delta(r))
}

fn require_exists(problem: &ProblemSpec) -> Result<ExistencePrediction> {
    let pred = classify_existence(problem)?;
    if !pred.exists {
        return Err(LabError::Refused(format!(
            "existence criterion `{}` {}",
            pred.criterion_used,
            if pred.conclusive { "fails" } else { "is inconclusive" }
        )));
    }
    Ok(pred)
}

fn require_origin(problem: &ProblemSpec) -> Result<()> {
    if problem.k != KSet::Origin {
        return Err(LabError::Unsupported("this construction needs K = origin".into()));
    }
    Ok(())
}

fn annulus(
    problem: &ProblemSpec,
    grid: &RadialGrid,
    data: (f64, f64),
    config: &SolveConfig,
    initial: Option<&[f64]>,
) -> Result<Solution> {
    let w = weight(problem);
    solve_radial_dirichlet_from(problem.n, &w, &problem.f, grid, data, config, initial)
}

/// One step of an expanding-domain sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusLevel {
    pub n: f64,
    pub nodes: usize,
    /// Sup of `u_n - u_{n/2}` on the common window, relative to the scale.
    pub window_increment: Option<f64>,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct MinimalSolution {
    /// The last annulus solution `xi_{n_max}` on `[1/n_max, n_max]`.
    pub profile: RadialProfile,
    /// Two-level Richardson extrapolation in `n` on `[4/n_max, n_max/4]`.
    pub extrapolated: Option<RadialProfile>,
    /// Observed contraction `(xi_n - xi_{n/2}) / (xi_{n/2} - xi_{n/4})`.
    pub ratio: Option<f64>,
    pub history: Vec<AnnulusLevel>,
    /// Last window increment below `tol_sup`.
    pub converged: bool,
}

impl MinimalSolution {
    pub fn best(&self) -> &RadialProfile {
        self.extrapolated.as_ref().unwrap_or(&self.profile)
    }
}

/// Nodes of `small` inside `big`, both from one nested family.
fn embed(small: &RadialGrid, big: &RadialGrid) -> Result<usize> {
    big.find(small.first())
        .filter(|&o| o + small.len() <= big.len())
        .ok_or_else(|| LabError::SolverFault("annulus grids are not nested".into()))
}

fn check_monotone(prev: &RadialProfile, next: &RadialProfile, offset: usize, window: (f64, f64)) -> Result<f64> {
    let scale = prev.sup().max(1.0);
    let mut worst_drop = 0.0f64;
    let mut inc = 0.0f64;
    for i in prev.grid().window(window.0, window.1) {
        let d = next.values()[offset + i] - prev.values()[i];
        worst_drop = worst_drop.max(-d);
        inc = inc.max(d.abs());
    }
    if worst_drop > MONOTONE_TOL * scale {
        return Err(LabError::SolverFault(format!(
            "minimal iterates decrease by {:e} on the common window",
            worst_drop / scale
        )));
    }
    Ok(inc / scale)
}

/// Minimal solution as the limit of zero-data annulus problems on
/// `[1/n, n]`, `n = 2, 4, ..., n_max`.
pub fn minimal_solution(problem: &ProblemSpec, n_max: usize, config: &SolveConfig) -> Result<MinimalSolution> {
    minimal_solution_with(problem, n_max, MINIMAL_PER_OCTAVE, config)
}

pub fn minimal_solution_with(
    problem: &ProblemSpec,
    n_max: usize,
    per_octave: usize,
    config: &SolveConfig,
) -> Result<MinimalSolution> {
    require_origin(problem)?;
    if n_max < 2 || !n_max.is_power_of_two() {
        return domain("n_max must be a power of two, at least 2");
    }
    require_exists(problem)?;
    let mut history = Vec::new();
    let mut sols: Vec<RadialProfile> = Vec::new();
    let mut n = 2usize;
    while n <= n_max {
        let grid = RadialGrid::nested_symmetric(n as f64, per_octave, problem.n)?;
        let sol = annulus(problem, &grid, (0.0, 0.0), config, None)?;
        let window_increment = match sols.last() {
            Some(prev) => Some(check_monotone(prev, &sol.profile, embed(prev.grid(), &grid)?, (0.5, 2.0))?),
            None => None,
        };
        history.push(AnnulusLevel { n: n as f64, nodes: grid.len(), window_increment, newton_steps: sol.newton_steps });
        sols.push(sol.profile);
        if sols.len() > 3 {
            sols.remove(0);
        }
        n *= 2;
    }
    let converged = history.last().and_then(|h| h.window_increment).is_some_and(|d| d <= config.tol_sup);
    let (extrapolated, ratio) = if sols.len() == 3 {
        match richardson(&sols[0], &sols[1], &sols[2])? {
            Some((p, lam)) => (Some(p), Some(lam)),
            None => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(MinimalSolution { profile: sols.pop().unwrap(), extrapolated, ratio, history, converged })
}

/// Two-level extrapolation for `xi_n = xi + A lam^k + B lam^2k` along
/// `n = 2^k`, with `lam` estimated on the window `[1/2, 2]`.
fn richardson(x1: &RadialProfile, x2: &RadialProfile, x3: &RadialProfile) -> Result<Option<(RadialProfile, f64)>> {
    let o2 = embed(x1.grid(), x2.grid())?;
    let o3 = embed(x1.grid(), x3.grid())?;
    let (v1, v2, v3) = (x1.values(), x2.values(), x3.values());
    let mut ratios: Vec<f64> = x1
        .grid()
        .window(0.5, 2.0)
        .filter_map(|i| {
            let d1 = v2[o2 + i] - v1[i];
            let d2 = v3[o3 + i] - v2[o2 + i];
            (d1 > 0.0 && d2 > 0.0).then(|| d2 / d1)
        })
        .collect();
    if ratios.is_empty() {
        return Ok(None);
    }
    ratios.sort_by(f64::total_cmp);
    let lam = ratios[ratios.len() / 2];
    if !(lam > 0.0 && lam < 1.0) {
        return Ok(None);
    }
    let vals: Vec<f64> = (0..x1.grid().len())
        .map(|i| {
            let r1_hi = (v3[o3 + i] - lam * v2[o2 + i]) / (1.0 - lam);
            let r1_lo = (v2[o2 + i] - lam * v1[i]) / (1.0 - lam);
            (r1_hi - lam * lam * r1_lo) / (1.0 - lam * lam)
        })
        .collect();
    if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Ok(None);
    }
    Ok(Some((RadialProfile::new(x1.grid().clone(), vals)?, lam)))
}

/// A single zero-data annulus solve on `[2^-octaves, 2^octaves]`: the
/// reference minimal solution used for family boundary data.
pub fn minimal_annulus(
    problem: &ProblemSpec,
    octaves: u32,
    per_octave: usize,
    config: &SolveConfig,
) -> Result<RadialProfile> {
    require_origin(problem)?;
    require_exists(problem)?;
    let grid = RadialGrid::nested_symmetric(2f64.powi(octaves as i32), per_octave, problem.n)?;
    Ok(annulus(problem, &grid, (0.0, 0.0), config, None)?.profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyStart {
    /// The solver's default start below the solution.
    Below,
    /// The super-solution `a r^(2-N) + b + xi`.
    Above,
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub profile: RadialProfile,
    pub a: f64,
    pub b: f64,
    /// `min(u - h, h + xi - u) / scale` over the nodes, `h = a r^(2-N) + b`.
    pub sandwich_margin: f64,
    pub newton_steps: usize,
}

/// `u_{a,b}` on `[1/n, n]` with boundary data `a r^(2-N) + b + xi`, on the
/// nodes of `xi` there.
pub fn family_member(
    problem: &ProblemSpec,
    a: f64,
    b: f64,
    xi: &RadialProfile,
    n: f64,
    config: &SolveConfig,
) -> Result<FamilyMember> {
    family_member_from(problem, a, b, xi, n, config, FamilyStart::Below)
}

pub fn family_member_from(
    problem: &ProblemSpec,
    a: f64,
    b: f64,
    xi: &RadialProfile,
    n: f64,
    config: &SolveConfig,
    start: FamilyStart,
) -> Result<FamilyMember> {
    require_origin(problem)?;
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return domain("family parameters must be nonnegative");
    }
    if problem.n < 3 {
        return domain("the family needs N >= 3");
    }
    require_exists(problem)?;
    let (Some(lo), Some(hi)) = (xi.grid().find(1.0 / n), xi.grid().find(n)) else {
        return domain(format!("xi has no nodes at 1/{n} and {n}"));
    };
    let nodes = xi.nodes()[lo..=hi].to_vec();
    let xv = &xi.values()[lo..=hi];
    let grid = RadialGrid::from_nodes(nodes, problem.n)?;
    let e = 2.0 - problem.n as f64;
    let h: Vec<f64> = grid.nodes().iter().map(|r| a * r.powf(e) + b).collect();
    let m = h.len();
    let data = (h[0] + xv[0], h[m - 1] + xv[m - 1]);
    let upper: Vec<f64> = h.iter().zip(xv).map(|(h, x)| h + x).collect();
    let init = match start {
        FamilyStart::Below => None,
        FamilyStart::Above => Some(upper.as_slice()),
    };
    let sol = annulus(problem, &grid, data, config, init)?;
    let u = sol.profile.values();
    let scale = upper.iter().fold(1.0f64, |s, v| s.max(*v));
    let margin = (0..m).map(|i| (u[i] - h[i]).min(upper[i] - u[i])).fold(f64::INFINITY, f64::min) / scale;
    Ok(FamilyMember { profile: sol.profile, a, b, sandwich_margin: margin, newton_steps: sol.newton_steps })
}

#[derive(Debug, Clone)]
pub struct ExteriorBallSolution {
    pub profile: RadialProfile,
    pub radius: f64,
    /// Distances `delta = r - R` used for the boundary-layer ratio.
    pub window: (f64, f64),
    pub history: Vec<AnnulusLevel>,
    pub converged: bool,
}

/// Minimal solution outside `B_R` as the limit of zero-data problems on
/// `(R, R + n)`, on grids geometric in `r - R`.
pub fn exterior_ball_minimal(
    problem: &ProblemSpec,
    n_max: usize,
    config: &SolveConfig,
) -> Result<ExteriorBallSolution> {
    exterior_ball_minimal_with(problem, n_max, 2f64.powi(-14), 16, config)
}

pub fn exterior_ball_minimal_with(
    problem: &ProblemSpec,
    n_max: usize,
    d_min: f64,
    per_octave: usize,
    config: &SolveConfig,
) -> Result<ExteriorBallSolution> {
    let KSet::Ball { radius } = problem.k else {
        return Err(LabError::Unsupported("exterior_ball_minimal needs K = ball".into()));
    };
    if n_max < 2 || !n_max.is_power_of_two() {
        return domain("n_max must be a power of two, at least 2");
    }
    if d_min.log2().fract() != 0.0 {
        return domain("d_min must be a power of two so that R + n is a node");
    }
    require_exists(problem)?;
    let mut history = Vec::new();
    let mut prev: Option<RadialProfile> = None;
    let mut n = 2usize;
    while n <= n_max {
        let grid = RadialGrid::offset_geometric(radius, d_min, n as f64, per_octave, problem.n)?;
        let sol = annulus(problem, &grid, (0.0, 0.0), config, None)?;
        let window_increment = match &prev {
            Some(p) => Some(check_monotone(p, &sol.profile, 0, (radius, radius + 2.0))?),
            None => None,
        };
        history.push(AnnulusLevel { n: n as f64, nodes: grid.len(), window_increment, newton_steps: sol.newton_steps });
        prev = Some(sol.profile);
        n *= 2;
    }
    let converged = history.last().and_then(|h| h.window_increment).is_some_and(|d| d <= config.tol_sup);
    Ok(ExteriorBallSolution { profile: prev.unwrap(), radius, window: (1e-3, 0.1), history, converged })
}

/// Natural cubic spline of `ln u` against `ln r`: a C² branch evaluator.
#[derive(Debug, Clone)]
struct LogSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl LogSpline {
    fn new(p: &RadialProfile) -> Result<LogSpline> {
        if p.values().iter().any(|v| !(*v > 0.0)) {
            return domain("glued branches must be strictly positive");
        }
        let x: Vec<f64> = p.nodes().iter().map(|r| r.ln()).collect();
        let y: Vec<f64> = p.values().iter().map(|u| u.ln()).collect();
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let (mut sub, mut diag, mut sup, mut rhs) = (vec![0.0; n], vec![1.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 1..n - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        let m = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        Ok(LogSpline { x, y, m })
    }

    fn contains(&self, r: f64) -> bool {
        let l = r.ln();
        l >= self.x[0] && l <= self.x[self.x.len() - 1]
    }

    /// `(u, u', u'')` in `r`.
    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let l = r.ln();
        let i = self.x.partition_point(|&v| v <= l).clamp(1, self.x.len() - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let (a, b) = ((self.x[i + 1] - l) / h, (l - self.x[i]) / h);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let s = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let s1 = (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let s2 = a * m0 + b * m1;
        let u = s.exp();
        (u, u * s1 / r, u * (s2 + s1 * s1 - s1) / (r * r))
    }
}

/// Quintic Hermite data `(value, d/dr, d2/dr2)` at both ends of `[x0, x1]`.
#[derive(Debug, Clone, Copy)]
struct Quintic {
    x0: f64,
    x1: f64,
    y0: (f64, f64, f64),
    y1: (f64, f64, f64),
}

impl Quintic {
    fn eval(&self, r: f64) -> f64 {
        let h = self.x1 - self.x0;
        let t = (r - self.x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        self.y0.0 * h0
            + h * self.y0.1 * h1
            + h * h * self.y0.2 * h2
            + self.y1.0 * h5
            + h * self.y1.1 * h4
            + h * h * self.y1.2 * h3
    }
}

/// `U = W + M (1 + r^2)^((2-N)/2)` with `W` the inner branch below `rho0`,
/// the outer branch above `r_blend` and a quintic C² bridge in between.
#[derive(Debug, Clone)]
pub struct GluedField {
    pub inner: RadialProfile,
    pub outer: RadialProfile,
    pub m: f64,
    pub n: usize,
    pub rho0: f64,
    pub r_blend: f64,
    /// Smallest relative residual over the audit radii at the accepted `M`.
    pub worst_residual: f64,
    pub worst_radius: f64,
    /// Amplitudes tried, in order.
    pub tried: Vec<f64>,
    inner_s: LogSpline,
    outer_s: LogSpline,
    bridge: Quintic,
}

/// Relative tolerance of the gluing audit.
pub const GLUE_TOL: f64 = 1e-6;

impl GluedField {
    pub fn domain(&self) -> (f64, f64) {
        (self.inner.grid().first(), self.outer.grid().last())
    }

    fn w(&self, r: f64) -> Option<f64> {
        if r <= self.rho0 {
            self.inner_s.contains(r).then(|| self.inner_s.eval(r).0)
        } else if r >= self.r_blend {
            self.outer_s.contains(r).then(|| self.outer_s.eval(r).0)
        } else {
            Some(self.bridge.eval(r))
        }
    }

    fn bump(&self, r: f64) -> f64 {
        (1.0 + r * r).powf((2.0 - self.n as f64) / 2.0)
    }

    fn eval_with(&self, r: f64, m: f64) -> Option<f64> {
        self.w(r).map(|w| w + m * self.bump(r))
    }

    pub fn eval(&self, r: f64) -> Option<f64> {
        self.eval_with(r, self.m)
    }

    /// Relative finite-difference residual `(-Delta U - phi f(U)) / scale`
    /// with step `1e-3 r`.
    fn residual_with(&self, r: f64, m: f64, problem: &ProblemSpec) -> Option<f64> {
        let h = 1e-3 * r;
        let (um, u0, up) = (self.eval_with(r - h, m)?, self.eval_with(r, m)?, self.eval_with(r + h, m)?);
        let d2 = (up - 2.0 * u0 + um) / (h * h);
        let d1 = (self.n as f64 - 1.0) / r * (up - um) / (2.0 * h);
        let src = problem.phi.value(problem.radial_delta(r)) * problem.f.eval(u0);
        let scale = src + d2.abs() + d1.abs();
        Some((-d2 - d1 - src) / scale)
    }

    pub fn residual(&self, r: f64, problem: &ProblemSpec) -> Option<f64> {
        self.residual_with(r, self.m, problem)
    }

    /// CSV `r,U` at the given radii.
    pub fn to_csv(&self, radii: &[f64]) -> String {
        let mut s = String::from("r,u\n");
        for &r in radii {
            if let Some(u) = self.eval(r) {
                let _ = writeln!(s, "{},{}", sci(r), sci(u));
            }
        }
        s
    }
}

/// 200 log-spaced radii one octave inside the branch ends, plus 32 radii
/// across the blend zone.
pub fn default_audit_radii(inner: &RadialProfile, outer: &RadialProfile, blend: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = ((2.0 * inner.grid().first()).ln(), (0.5 * outer.grid().last()).ln());
    let mut radii: Vec<f64> = (0..200).map(|k| (lo + (hi - lo) * k as f64 / 199.0).exp()).collect();
    radii.extend((1..=32).map(|k| blend.0 + (blend.1 - blend.0) * k as f64 / 33.0));
    radii.sort_by(f64::total_cmp);
    radii
}

/// Glues two super-solution branches. `M` runs over `2^0, 2^1, ..., 2^40`
/// and the first amplitude passing the audit is kept.
pub fn glue_supersolution(
    inner: &RadialProfile,
    outer: &RadialProfile,
    problem: &ProblemSpec,
    blend: (f64, f64),
    audit_radii: &[f64],
) -> Result<GluedField> {
    problem.validate()?;
    let n = problem.n;
    if n < 3 {
        return domain("gluing needs N >= 3");
    }
    let (rho0, r_blend) = blend;
    if !(rho0 < r_blend) || !inner.contains(rho0) || !outer.contains(r_blend) {
        return domain(format!("blend zone [{rho0}, {r_blend}] must sit inside both branches"));
    }
    let inner_s = LogSpline::new(inner)?;
    let outer_s = LogSpline::new(outer)?;
    let bridge = Quintic { x0: rho0, x1: r_blend, y0: inner_s.eval(rho0), y1: outer_s.eval(r_blend) };
    let mut g = GluedField {
        inner: inner.clone(),
        outer: outer.clone(),
        m: 0.0,
        n,
        rho0,
        r_blend,
        worst_residual: f64::NEG_INFINITY,
        worst_radius: f64::NAN,
        tried: Vec::new(),
        inner_s,
        outer_s,
        bridge,
    };
    let (dlo, dhi) = g.domain();
    let radii: Vec<f64> =
        audit_radii.iter().copied().filter(|r| r * (1.0 - 2e-3) >= dlo && r * (1.0 + 2e-3) <= dhi).collect();
    if radii.is_empty() {
        return domain("no audit radius inside the glued domain");
    }
    let mut last = (f64::NEG_INFINITY, f64::NAN);
    for k in 0..=40 {
        let m = 2f64.powi(k);
        g.tried.push(m);
        let mut worst = (f64::INFINITY, f64::NAN);
        let mut positive = true;
        for &r in &radii {
            match (g.eval_with(r, m), g.residual_with(r, m, problem)) {
                (Some(u), Some(res)) if u > 0.0 => {
                    if res < worst.0 {
                        worst = (res, r);
                    }
                }
                _ => positive = false,
            }
        }
        last = worst;
        if positive && worst.0 >= -GLUE_TOL {
            g.m = m;
            g.worst_residual = worst.0;
            g.worst_radius = worst.1;
            return Ok(g);
        }
    }
    Err(LabError::Gluing { worst: last.0, radius: last.1 })
}

/// Global super-solution for `f = t^-p`: the outer branch is
/// `G^-1(D)` with inner limit 1 on `[1, 1e4]`; the inner branch is the Kelvin
/// transform of the same construction for the transformed weight, started at 2.
pub fn glued_supersolution(problem: &ProblemSpec) -> Result<GluedField> {
    problem.validate()?;
    let Some(p) = problem.f.power_p() else {
        return Err(LabError::Unsupported("the Kelvin inner branch needs f = t^-p".into()));
    };
    if problem.k != KSet::Origin && !matches!(problem.k, KSet::PointSet { .. }) {
        return Err(LabError::Unsupported("gluing is built for point singularities".into()));
    }
    require_exists(problem)?;
    let n = problem.n;
    let outer = supersolution_profile(&problem.phi, &problem.f, n, 1.0, 1.0)?;
    let star = kelvin_weight(&problem.phi, n, p)?;
    let outer_star = supersolution_profile(&star, &problem.f, n, 2.0, 2.0)?;
    let inner = kelvin_transform(&outer_star, n)?;
    let radii = default_audit_radii(&inner, &outer, (0.5, 1.0));
    let radial = ProblemSpec { k: KSet::Origin, ..problem.clone() };
    glue_supersolution(&inner, &outer, &radial, (0.5, 1.0), &radii)
}

#[derive(Debug, Clone)]
pub enum RadialBuildingBlock {
    Glued(Box<GluedField>),
    Profile(RadialProfile),
}

impl RadialBuildingBlock {
    pub fn eval(&self, r: f64) -> Option<f64> {
        match self {
            RadialBuildingBlock::Glued(g) => g.eval(r),
            RadialBuildingBlock::Profile(p) => p.eval(r),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            RadialBuildingBlock::Glued(g) => g.domain(),
            RadialBuildingBlock::Profile(p) => (p.grid().first(), p.grid().last()),
        }
    }
}

/// `V(x) = sum_a U(|x - a|)`.
#[derive(Debug, Clone)]
pub struct SuperpositionField {
    pub block: RadialBuildingBlock,
    pub centers: Vec<Vec<f64>>,
}

impl SuperpositionField {
    pub fn dimension(&self) -> usize {
        self.centers[0].len()
    }

    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let mut s = 0.0;
        for c in &self.centers {
            s += self.block.eval(dist(x, c))?;
        }
        Some(s)
    }

    pub fn delta(&self, x: &[f64]) -> f64 {
        self.centers.iter().map(|c| dist(x, c)).fold(f64::INFINITY, f64::min)
    }
}

pub fn superposition_field(block: RadialBuildingBlock, centers: &[Vec<f64>]) -> Result<SuperpositionField> {
    if centers.is_empty() {
        return domain("superposition needs at least one center");
    }
    let n = centers[0].len();
    if centers.iter().any(|c| c.len() != n) {
        return domain("centers must share one dimension");
    }
    for (i, a) in centers.iter().enumerate() {
        if centers[i + 1..].iter().any(|b| dist(a, b) == 0.0) {
            return domain(format!("repeated center {a:?}"));
        }
    }
    Ok(SuperpositionField { block, centers: centers.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::{xi_closed_form, FSpec, PhiSpec};

    fn power_problem() -> ProblemSpec {
        ProblemSpec::new(3, PhiSpec::Power { alpha: -3.0 }, FSpec::Power { p: 1.0 }, KSet::Origin)
    }

    #[test]
    fn minimal_iterates_increase_and_extrapolate() {
        let sol = minimal_solution_with(&power_problem(), 16, 48, &SolveConfig::default()).unwrap();
        assert_eq!(sol.history.len(), 4);
        assert!(sol.history.iter().skip(1).all(|h| h.window_increment.unwrap() > 0.0));
        let lam = sol.ratio.unwrap();
        assert!(lam > 0.5 && lam < 0.9, "{lam}");
        let exact = xi_closed_form(3, 1.0, -3.0).unwrap();
        let raw_err = (sol.profile.eval(1.0).unwrap() / exact.eval(1.0) - 1.0).abs();
        let ext_err = (sol.best().eval(1.0).unwrap() / exact.eval(1.0) - 1.0).abs();
        assert!(ext_err < raw_err / 3.0, "{ext_err} vs {raw_err}");
    }

    #[test]
    fn nonexistence_is_refused() {
        let p = ProblemSpec::new(3, PhiSpec::Power { alpha: -2.0 }, FSpec::Power { p: 1.0 }, KSet::Origin);
        assert!(matches!(minimal_solution(&p, 8, &SolveConfig::default()), Err(LabError::Refused(_))));
    }

    #[test]
    fn zero_parameters_reproduce_xi() {
        let p = power_problem();
        let cfg = SolveConfig::default();
        let xi = minimal_annulus(&p, 8, 16, &cfg).unwrap();
        let m = family_member(&p, 0.0, 0.0, &xi, 2f64.powi(6), &cfg).unwrap();
        let off = xi.grid().find(m.profile.grid().first()).unwrap();
        for (i, u) in m.profile.values().iter().enumerate() {
            assert!((u - xi.values()[off + i]).abs() <= 10.0 * cfg.tol_sup * xi.sup().max(1.0));
        }
    }

    #[test]
    fn sandwich_holds_for_a_family_member() {
        let p = power_problem();
        let cfg = SolveConfig::default();
        let xi = minimal_annulus(&p, 8, 16, &cfg).unwrap();
        let m = family_member(&p, 1.0, 0.5, &xi, 2f64.powi(6), &cfg).unwrap();
        assert!(m.sandwich_margin >= -1e-8, "{}", m.sandwich_margin);
    }

    #[test]
    fn quintic_bridge_matches_end_data() {
        let q = Quintic { x0: 0.5, x1: 1.0, y0: (2.0, -1.0, 3.0), y1: (1.0, -0.5, 0.25) };
        assert!((q.eval(0.5) - 2.0).abs() < 1e-15);
        assert!((q.eval(1.0) - 1.0).abs() < 1e-15);
        let h = 1e-5;
        let d0 = (q.eval(0.5 + h) - q.eval(0.5)) / h;
        assert!((d0 + 1.0).abs() < 1e-3);
    }

    #[test]
    fn glue_of_a_global_supersolution_accepts_the_first_m() {
        let p = power_problem();
        let exact = xi_closed_form(3, 1.0, -3.0).unwrap();
        let grid = RadialGrid::geometric(1e-3, 1e3, 600, 3).unwrap();
        let xi = RadialProfile::sample(grid, |r| exact.eval(r)).unwrap();
        let radii = default_audit_radii(&xi, &xi, (0.5, 1.0));
        let g = glue_supersolution(&xi, &xi, &p, (0.5, 1.0), &radii).unwrap();
        assert_eq!(g.m, 1.0);
        for &r in &radii {
            assert!(g.eval(r).unwrap() >= xi.eval(r).unwrap());
        }
    }

    #[test]
    fn single_center_superposition_is_the_block() {
        let grid = RadialGrid::geometric(1e-3, 1e3, 100, 3).unwrap();
        let u = RadialProfile::sample(grid, |r| 2.0 / r.sqrt()).unwrap();
        let v = superposition_field(RadialBuildingBlock::Profile(u.clone()), &[vec![0.0, 0.0, 0.0]]).unwrap();
        for x in [[0.3, 0.1, -0.2], [2.0, 1.0, 0.5]] {
            let r = crate::problem::norm(&x);
            assert_eq!(v.eval(&x), u.eval(r));
        }
        assert!(superposition_field(RadialBuildingBlock::Profile(u), &[]).is_err());
    }
}
