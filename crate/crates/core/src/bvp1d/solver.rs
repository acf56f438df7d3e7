use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::profile::RadialProfile;
use crate::error::{domain, LabError, Result};
use crate::funcs::{FSpec, PhiSpec};
use crate::quad::engine::{improper_log, QuadOptions, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Stopping tolerance on the sup-norm increment, relative to `max(1, sup u)`.
    pub tol_sup: f64,
    /// Regularisation levels `eps_k`; empty means `2^-k` down to `tol_sup / 10`.
    pub eps_schedule: Vec<f64>,
    /// Cap on the number of regularisation levels.
    pub max_outer: usize,
    /// Cap on Newton steps per level.
    pub max_inner: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { tol_sup: 1e-10, eps_schedule: Vec::new(), max_outer: 200, max_inner: 100 }
    }
}

impl SolveConfig {
    pub fn schedule(&self) -> Result<Vec<f64>> {
        if !(self.tol_sup > 0.0) {
            return domain("tol_sup must be positive");
        }
        let s = if self.eps_schedule.is_empty() {
            let mut s = vec![1.0];
            while *s.last().unwrap() >= self.tol_sup / 10.0 {
                let e = s.last().unwrap() / 2.0;
                s.push(e);
            }
            s
        } else {
            self.eps_schedule.clone()
        };
        if s.iter().any(|e| !(*e > 0.0)) || s.windows(2).any(|w| !(w[1] < w[0])) {
            return domain("eps_schedule must be positive and strictly decreasing");
        }
        if *s.last().unwrap() >= self.tol_sup {
            return domain("eps_schedule must end below tol_sup");
        }
        Ok(s)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub profile: RadialProfile,
    pub levels: usize,
    pub newton_steps: usize,
    /// Sup-norm change over the last regularisation level.
    pub last_increment: f64,
    /// Largest decrease seen between monotone iterates, relative to scale.
    pub monotone_violation: f64,
}

/// Conservative flux discretisation of `-(r^(N-1) u')' = r^(N-1) w f(u)`.
pub struct Discretization {
    pub r: Vec<f64>,
    /// Edge conductances `1/(Phi(r_{i+1}) - Phi(r_i))`, `Phi' = r^(1-N)`.
    pub cond: Vec<f64>,
    /// Cell measures `int r^(N-1)` over `[m_{i-1}, m_i]`.
    pub vol: Vec<f64>,
}

impl Discretization {
    pub fn new(grid: &RadialGrid, n: usize) -> Discretization {
        let r = grid.nodes().to_vec();
        let m = r.len();
        let nf = n as f64;
        let phi = |x: f64| match n {
            1 => x,
            2 => x.ln(),
            _ => x.powf(2.0 - nf) / (2.0 - nf),
        };
        let cond = r.windows(2).map(|w| 1.0 / (phi(w[1]) - phi(w[0]))).collect();
        let mid: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut vol = vec![0.0; m];
        for i in 1..m - 1 {
            vol[i] = (mid[i].powf(nf) - mid[i - 1].powf(nf)) / nf;
        }
        Discretization { r, cond, vol }
    }

    /// `(A u)_i = c_{i-1}(u_i - u_{i-1}) + c_i(u_i - u_{i+1})` at interior nodes.
    pub fn apply(&self, u: &[f64], i: usize) -> f64 {
        self.cond[i - 1] * (u[i] - u[i - 1]) + self.cond[i] * (u[i] - u[i + 1])
    }
}

/// Thomas algorithm for `sub x_{i-1} + diag x_i + sup x_{i+1} = rhs`.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Regularised monotone scheme for the radial Dirichlet problem.
///
/// Each level `eps` solves `A u = V w f(u + eps)` by Newton's method. The
/// map `u -> A u - V w f(u + eps)` is concave with M-matrix Jacobians, so
/// Newton steps started from a sub-solution increase monotonically, and the
/// solution for `eps` is a sub-solution for every smaller `eps`.
pub fn solve_radial_dirichlet(
    n: usize,
    weight: &dyn Fn(f64) -> f64,
    f: &FSpec,
    grid: &RadialGrid,
    boundary: (f64, f64),
    config: &SolveConfig,
) -> Result<Solution> {
    solve_radial_dirichlet_from(n, weight, f, grid, boundary, config, None)
}

pub fn solve_radial_dirichlet_from(
    n: usize,
    weight: &dyn Fn(f64) -> f64,
    f: &FSpec,
    grid: &RadialGrid,
    boundary: (f64, f64),
    config: &SolveConfig,
    initial: Option<&[f64]>,
) -> Result<Solution> {
    let (va, vb) = boundary;
    if !(va >= 0.0 && vb >= 0.0) {
        return domain("boundary values must be nonnegative");
    }
    f.validate()?;
    let schedule = config.schedule()?;
    let disc = Discretization::new(grid, n);
    let m = disc.r.len();
    let w: Vec<f64> = disc.r.iter().map(|&r| weight(r)).collect();
    if let Some(i) = (1..m - 1).find(|&i| !(w[i] >= 0.0 && w[i].is_finite())) {
        return domain(format!("weight is not a nonnegative number at r = {:e}", disc.r[i]));
    }
    let mut u = match initial {
        Some(u0) if u0.len() == m => u0.iter().map(|v| v.max(0.0)).collect(),
        Some(_) => return domain("initial iterate does not match the grid"),
        None => vec![0.0; m],
    };
    u[0] = va;
    u[m - 1] = vb;
    let from_above = initial.is_some();

    let k = m - 2;
    let mut sub = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut sup = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    let mut steps = 0usize;
    let mut violation: f64 = 0.0;
    let mut last_increment = f64::INFINITY;
    let mut levels = 0usize;

    for (level, &eps) in schedule.iter().enumerate() {
        if level >= config.max_outer {
            return Err(LabError::NonConvergence { iterations: level, last_increment });
        }
        levels += 1;
        let before = u.clone();
        let mut converged = false;
        let mut dlast = f64::INFINITY;
        for it in 0..config.max_inner {
            for j in 0..k {
                let i = j + 1;
                let t = u[i] + eps;
                let g = disc.vol[i] * w[i] * f.eval(t);
                let dg = disc.vol[i] * w[i] * f.deriv(t);
                diag[j] = disc.cond[i - 1] + disc.cond[i] - dg;
                sub[j] = -disc.cond[i - 1];
                sup[j] = -disc.cond[i];
                rhs[j] = -(disc.apply(&u, i) - g);
            }
            let delta = solve_tridiagonal(&sub, &diag, &sup, &rhs);
            steps += 1;
            let scale = u.iter().fold(1.0f64, |a, b| a.max(b.abs()));
            let mut dmax: f64 = 0.0;
            for j in 0..k {
                let d = delta[j];
                if !d.is_finite() {
                    return Err(LabError::SolverFault(format!("non-finite Newton step at r = {:e}", disc.r[j + 1])));
                }
                if !(from_above && level == 0 && it == 0) {
                    violation = violation.max(-d / scale);
                }
                dmax = dmax.max(d.abs());
                // Projection onto u >= 0 keeps a sub-solution (max of two sub-solutions).
                u[j + 1] = (u[j + 1] + d).max(0.0);
            }
            dlast = dmax / scale;
            if dlast <= (1e-2 * config.tol_sup).max(1e-15) {
                converged = true;
                break;
            }
        }
        if !converged && dlast > config.tol_sup {
            let inc = u.iter().zip(&before).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            return Err(LabError::NonConvergence { iterations: steps, last_increment: inc });
        }
        last_increment = u.iter().zip(&before).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    }
    if violation > 1e-9 {
        return Err(LabError::SolverFault(format!("monotone iteration decreased by {violation:e} (relative)")));
    }
    let scale = u.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    if last_increment > config.tol_sup * scale {
        return Err(LabError::NonConvergence { iterations: steps, last_increment });
    }
    if let Some(i) = (1..m - 1).find(|&i| !(u[i] > 0.0)) {
        if w[i] > 0.0 {
            return Err(LabError::SolverFault(format!("nonpositive iterate at r = {:e}", disc.r[i])));
        }
    }
    let profile = RadialProfile::new(grid.with_dimension(n), u)?;
    Ok(Solution { profile, levels, newton_steps: steps, last_increment, monotone_violation: violation })
}

/// `-H'' = phi(t) f(H)` on `(0,1)`, `H(0) = H(1) = 0`, on 1024 uniform nodes.
pub fn solve_h(phi: &PhiSpec, f: &FSpec, config: &SolveConfig) -> Result<RadialProfile> {
    let grid = RadialGrid::uniform(0.0, 1.0, 1024, 1)?;
    solve_h_on(phi, f, &grid, config)
}

pub fn solve_h_on(phi: &PhiSpec, f: &FSpec, grid: &RadialGrid, config: &SolveConfig) -> Result<RadialProfile> {
    if grid.first() != 0.0 || grid.last() != 1.0 {
        return domain("the H-problem lives on [0, 1]");
    }
    if phi.is_zero() {
        return Err(LabError::Refused("the H-problem needs a positive weight".into()));
    }
    let lg = |l: f64| l + phi.ln_at_log(l);
    let crit = improper_log(&lg, 0.0, -1.0, &QuadOptions::default());
    if crit.status != Status::Finite {
        return Err(LabError::NoSolution(format!("int_0^1 r phi(r) dr is {}", crit.status.as_str())));
    }
    let sol = solve_radial_dirichlet(1, &|t| phi.value(t), f, grid, (0.0, 0.0), config)?;
    let h = sol.profile;
    // Concavity on the discrete second difference.
    let (t, v) = (h.nodes(), h.values());
    let scale = h.sup().max(f64::MIN_POSITIVE);
    for i in 1..t.len() - 1 {
        let d2 = (v[i + 1] - v[i]) / (t[i + 1] - t[i]) - (v[i] - v[i - 1]) / (t[i] - t[i - 1]);
        if d2 > 1e-9 * scale {
            return Err(LabError::SolverFault(format!("H is not concave near t = {:e}", t[i])));
        }
    }
    Ok(h)
}

/// Nodewise ordering `u >= v - tol * scale` on a shared grid.
pub fn comparison_check(u_super: &RadialProfile, v_sub: &RadialProfile, tol: f64) -> Result<bool> {
    if !u_super.grid().same_nodes(v_sub.grid()) {
        return domain("comparison needs profiles on the same grid");
    }
    let scale = u_super.sup().max(v_sub.sup()).max(1.0);
    Ok(u_super.values().iter().zip(v_sub.values()).all(|(u, v)| *u >= v - tol * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::xi_closed_form;

    #[test]
    fn tridiagonal_solves_known_system() {
        let x = solve_tridiagonal(&[0.0, -1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0, 0.0], &[1.0, 0.0, 1.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn parabola_is_reproduced() {
        let grid = RadialGrid::uniform(0.0, 1.0, 65, 1).unwrap();
        let s =
            solve_radial_dirichlet(1, &|_| 1.0, &FSpec::Power { p: 0.0 }, &grid, (0.0, 0.0), &SolveConfig::default())
                .unwrap();
        for (t, u) in s.profile.nodes().iter().zip(s.profile.values()) {
            assert!((u - t * (1.0 - t) / 2.0).abs() < 1e-14);
        }
        assert!((s.profile.eval(0.5).unwrap() - 0.125).abs() < 1e-14);
    }

    #[test]
    fn harmonic_data_gives_harmonic_solution() {
        let grid = RadialGrid::geometric(1.0, 2.0, 40, 3).unwrap();
        let s =
            solve_radial_dirichlet(3, &|_| 0.0, &FSpec::Power { p: 1.0 }, &grid, (1.0, 2.0), &SolveConfig::default())
                .unwrap();
        for (r, u) in s.profile.nodes().iter().zip(s.profile.values()) {
            assert!((u - (3.0 - 2.0 / r)).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_boundary_data_reproduces_power() {
        let xi = xi_closed_form(3, 1.0, -3.0).unwrap();
        let grid = RadialGrid::geometric(0.125, 8.0, 513, 3).unwrap();
        let s = solve_radial_dirichlet(
            3,
            &|r| r.powi(-3),
            &FSpec::Power { p: 1.0 },
            &grid,
            (xi.eval(0.125), xi.eval(8.0)),
            &SolveConfig::default(),
        )
        .unwrap();
        let worst = s
            .profile
            .nodes()
            .iter()
            .zip(s.profile.values())
            .map(|(r, u)| (u / xi.eval(*r) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "{worst}");
        assert!(s.monotone_violation <= 1e-12, "{}", s.monotone_violation);
    }

    #[test]
    fn refinement_reduces_error() {
        let xi = xi_closed_form(3, 1.0, -3.0).unwrap();
        let err = |m: usize| {
            let grid = RadialGrid::geometric(0.125, 8.0, m, 3).unwrap();
            let s = solve_radial_dirichlet(
                3,
                &|r| r.powi(-3),
                &FSpec::Power { p: 1.0 },
                &grid,
                (xi.eval(0.125), xi.eval(8.0)),
                &SolveConfig::default(),
            )
            .unwrap();
            s.profile
                .nodes()
                .iter()
                .zip(s.profile.values())
                .map(|(r, u)| (u / xi.eval(*r) - 1.0).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(65), err(129));
        assert!(e1 / e2 >= 3.0, "{e1} {e2}");
    }

    #[test]
    fn two_initial_iterates_agree() {
        let grid = RadialGrid::geometric(0.125, 8.0, 257, 3).unwrap();
        let cfg = SolveConfig::default();
        let w = |r: f64| r.powi(-3);
        let f = FSpec::Power { p: 1.0 };
        let a = solve_radial_dirichlet(3, &w, &f, &grid, (0.0, 0.0), &cfg).unwrap();
        let start: Vec<f64> = grid.nodes().iter().map(|r| 2.0 / r.sqrt()).collect();
        let b = solve_radial_dirichlet_from(3, &w, &f, &grid, (0.0, 0.0), &cfg, Some(&start)).unwrap();
        let d = a.profile.values().iter().zip(b.profile.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d <= 10.0 * cfg.tol_sup * a.profile.sup().max(1.0), "{d}");
    }

    #[test]
    fn max_principle_without_weight() {
        let grid = RadialGrid::geometric(0.5, 4.0, 64, 4).unwrap();
        let s =
            solve_radial_dirichlet(4, &|_| 0.0, &FSpec::Power { p: 2.0 }, &grid, (3.0, 1.0), &SolveConfig::default())
                .unwrap();
        let v = s.profile.values();
        assert!(v.iter().all(|u| *u <= 3.0 + 1e-13 && *u >= 1.0 - 1e-13));
    }

    #[test]
    fn h_problem_examples() {
        let cfg = SolveConfig::default();
        let h = solve_h(&PhiSpec::Power { alpha: 0.0 }, &FSpec::Power { p: 0.0 }, &cfg).unwrap();
        let worst = h.nodes().iter().zip(h.values()).map(|(t, u)| (u - t * (1.0 - t) / 2.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-12);
        let h1 = solve_h(&PhiSpec::Power { alpha: 0.0 }, &FSpec::Power { p: 1.0 }, &cfg).unwrap();
        let (a, b) = (h1.eval(0.3).unwrap(), h1.eval(0.7).unwrap());
        assert!((a - b).abs() < 1e-9);
        assert!(matches!(
            solve_h(&PhiSpec::Power { alpha: -2.0 }, &FSpec::Power { p: 1.0 }, &cfg),
            Err(LabError::NoSolution(_))
        ));
    }

    #[test]
    fn comparison_examples() {
        let grid = RadialGrid::geometric(1.0, 2.0, 20, 3).unwrap();
        let v = RadialProfile::sample(grid.clone(), |r| 1.0 / r).unwrap();
        assert!(comparison_check(&v, &v, 0.0).unwrap());
        let u = v.map_values(|_, x| x + 0.3).unwrap();
        assert!(comparison_check(&u, &v, 0.0).unwrap());
        assert!(!comparison_check(&v, &u, 1e-10).unwrap());
        let other = RadialProfile::sample(RadialGrid::geometric(1.0, 3.0, 20, 3).unwrap(), |r| r).unwrap();
        assert!(comparison_check(&v, &other, 0.0).is_err());
    }
}
