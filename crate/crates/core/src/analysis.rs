//! Transforms and verifiers: Kelvin transform, sphere averages, asymptotics,
//! residual audits, the minimum principle and the planar obstruction.

use serde::{Deserialize, Serialize};

use crate::bvp1d::{Discretization, RadialGrid, RadialProfile};
use crate::construct::SuperpositionField;
use crate::error::{domain, LabError, Result};
use crate::funcs::PhiSpec;
use crate::problem::ProblemSpec;
use crate::quad::gk_adaptive;

/// `u*(r) = r^(2-N) u(1/r)` on the reciprocal nodes.
pub fn kelvin_transform(profile: &RadialProfile, n: usize) -> Result<RadialProfile> {
    if n < 3 {
        return domain("the Kelvin transform is used for N >= 3");
    }
    if profile.values().iter().any(|v| !(*v > 0.0)) || profile.grid().first() <= 0.0 {
        return domain("Kelvin transform needs a strictly positive profile away from r = 0");
    }
    let e = 2.0 - n as f64;
    let (nodes, values): (Vec<f64>, Vec<f64>) =
        profile.nodes().iter().zip(profile.values()).rev().map(|(&r, &u)| (1.0 / r, r.powf(-e) * u)).unzip();
    RadialProfile::new(RadialGrid::from_nodes(nodes, n)?, values)
}

/// Weight seen by the Kelvin-transformed equation with `f = t^-p`:
/// `phi*(r) = r^k phi(1/r)`, `k = -2 - N - p(N-2)`.
pub fn kelvin_weight(phi: &PhiSpec, n: usize, p: f64) -> Result<PhiSpec> {
    phi.validate()?;
    let nf = n as f64;
    let k = -2.0 - nf - p * (nf - 2.0);
    Ok(match phi {
        PhiSpec::Zero => PhiSpec::Zero,
        PhiSpec::Power { alpha } => PhiSpec::Power { alpha: k - alpha },
        // r <= 1 maps to 1/r >= 1 and back.
        PhiSpec::PowerSplit { alpha, beta } => PhiSpec::PowerSplit { alpha: k - beta, beta: k - alpha },
        PhiSpec::Kelvin { exponent, base } if (exponent - k).abs() == 0.0 => (**base).clone(),
        other => PhiSpec::Kelvin { exponent: k, base: Box::new(other.clone()) },
    })
}

/// Mean of `|x - y|^(2-N)` over the sphere `|y| = r`, reduced to a polar
/// integral. Equals `max(|x|, r)^(2-N)`.
pub fn sphere_potential_average(n: usize, r: f64, x_norm: f64) -> Result<f64> {
    if n < 3 {
        return domain("the sphere potential needs N >= 3");
    }
    if !(r > 0.0 && x_norm > 0.0) {
        return domain("radii must be positive");
    }
    if (x_norm - r).abs() <= 1e-12 * r {
        return domain("the point lies on the sphere");
    }
    let k = n as f64 - 2.0;
    let mut w = |t: f64| t.sin().powf(k);
    let mut g = |t: f64| (x_norm * x_norm + r * r - 2.0 * x_norm * r * t.cos()).powf(-k / 2.0) * t.sin().powf(k);
    let pi = std::f64::consts::PI;
    let num = gk_adaptive(&mut g, 0.0, pi, 1e-14, 0.0, 1_000_000);
    let den = gk_adaptive(&mut w, 0.0, pi, 1e-14, 0.0, 100_000);
    if !num.converged || !den.converged {
        return Err(LabError::Construction("sphere quadrature did not converge".into()));
    }
    Ok(num.value / den.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationOrders {
    pub points: usize,
    pub levels: usize,
    /// Ratio between consecutive sample radii.
    pub stride: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsEstimate {
    pub a_hat: f64,
    pub b_hat: f64,
    pub a_error: f64,
    pub b_error: f64,
    pub orders: ExtrapolationOrders,
}

/// Neville tableau for the value at `h = 0`.
fn neville(h: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    let mut levels = vec![y.to_vec()];
    for m in 1..y.len() {
        let p = levels.last().unwrap();
        let next = (0..y.len() - m).map(|i| (-h[i + m] * p[i] + h[i] * p[i + 1]) / (h[i] - h[i + m])).collect();
        levels.push(next);
    }
    levels
}

/// Limits `a = lim r^(N-2) u` at 0 and `b = lim u` at infinity by polynomial
/// extrapolation through 5 radii an octave apart at each end.
pub fn asymptotics(profile: &RadialProfile, n: usize) -> Result<AsymptoticsEstimate> {
    let (r0, r1) = (profile.grid().first(), profile.grid().last());
    if !(r0 > 0.0 && r0 <= 1e-3 && r1 >= 1e3) {
        return domain(format!("asymptotics need r from at most 1e-3 to at least 1e3, got [{r0:e}, {r1:e}]"));
    }
    let e = n as f64 - 2.0;
    let small: Vec<f64> = (0..5).map(|k| r0 * 2f64.powi(k)).collect();
    let large: Vec<f64> = (0..5).map(|k| r1 * 2f64.powi(-k)).collect();
    let at = |r: f64| profile.eval(r).ok_or_else(|| LabError::Domain(format!("no value at r = {r:e}")));
    let ya = small.iter().map(|&r| Ok(r.powf(e) * at(r)?)).collect::<Result<Vec<_>>>()?;
    let yb = large.iter().map(|&r| at(r)).collect::<Result<Vec<_>>>()?;
    let hb: Vec<f64> = large.iter().map(|r| 1.0 / r).collect();
    let ta = neville(&small, &ya);
    let tb = neville(&hb, &yb);
    Ok(AsymptoticsEstimate {
        a_hat: ta[2][0],
        b_hat: tb[2][0],
        a_error: (ta[2][0] - ta[1][0]).abs(),
        b_error: (tb[2][0] - tb[1][0]).abs(),
        orders: ExtrapolationOrders { points: 5, levels: 3, stride: 2.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    Equality,
    Inequality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub sample_count: usize,
    /// Samples skipped because the stencil left the domain.
    pub skipped: usize,
    /// Smallest relative residual.
    pub min_residual: f64,
    pub worst_location: Vec<f64>,
    pub fraction_nonnegative: f64,
    /// Largest relative defect `|residual|`.
    pub sup_norm_equation_defect: f64,
    pub stencil_spacing: f64,
    pub tolerance: f64,
}

impl ResidualReport {
    pub const CSV_HEADER: &'static str =
        "sample_count,skipped,min_residual,fraction_nonnegative,sup_norm_equation_defect,stencil_spacing,tolerance";

    pub fn csv_row(&self) -> String {
        use crate::bvp1d::sci;
        format!(
            "{},{},{},{},{},{},{}",
            self.sample_count,
            self.skipped,
            sci(self.min_residual),
            sci(self.fraction_nonnegative),
            sci(self.sup_norm_equation_defect),
            sci(self.stencil_spacing),
            sci(self.tolerance)
        )
    }

    /// Passes if every sample is above `-tol` (inequality) or the defect is
    /// at most `tol` (equality).
    pub fn passes(&self, mode: ResidualMode) -> bool {
        self.sample_count > 0
            && match mode {
                ResidualMode::Equality => self.sup_norm_equation_defect <= self.tolerance,
                ResidualMode::Inequality => self.min_residual >= -self.tolerance,
            }
    }
}

/// Relative tolerance for radial residual audits.
pub const RESIDUAL_TOL: f64 = 1e-6;

/// Relative residual `(-Delta_h u - phi(delta) f(u)) / scale` at interior
/// nodes, with the conservative three-point operator the solver uses and
/// `scale = phi f + |u''| + |(N-1) u'/r|`.
pub fn residual_radial(profile: &RadialProfile, problem: &ProblemSpec, mode: ResidualMode) -> Result<ResidualReport> {
    residual_radial_tol(profile, problem, mode, RESIDUAL_TOL)
}

pub fn residual_radial_tol(
    profile: &RadialProfile,
    problem: &ProblemSpec,
    _mode: ResidualMode,
    tol: f64,
) -> Result<ResidualReport> {
    if profile.nodes().len() < 32 {
        return domain("residual audit needs at least 32 nodes");
    }
    let n = problem.n;
    let disc = Discretization::new(profile.grid(), n);
    let (r, u) = (profile.nodes(), profile.values());
    let mut rep = ResidualReport {
        sample_count: 0,
        skipped: 0,
        min_residual: f64::INFINITY,
        worst_location: vec![f64::NAN],
        fraction_nonnegative: 0.0,
        sup_norm_equation_defect: 0.0,
        stencil_spacing: r.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
        tolerance: tol,
    };
    let mut ok = 0usize;
    for i in 1..r.len() - 1 {
        if !(u[i] > 0.0) {
            rep.skipped += 1;
            continue;
        }
        let lap = disc.apply(u, i) / disc.vol[i];
        let src = if problem.phi.is_zero() {
            0.0
        } else {
            problem.phi.value(problem.radial_delta(r[i])) * problem.f.eval(u[i])
        };
        let (h0, h1) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let d2 = 2.0 * ((u[i + 1] - u[i]) / h1 - (u[i] - u[i - 1]) / h0) / (h0 + h1);
        let d1 = (u[i + 1] - u[i - 1]) / (h0 + h1);
        let scale = src + d2.abs() + ((n as f64 - 1.0) * d1 / r[i]).abs();
        let res = if scale > 0.0 { (lap - src) / scale } else { 0.0 };
        rep.sample_count += 1;
        if res >= -tol {
            ok += 1;
        }
        if res < rep.min_residual {
            rep.min_residual = res;
            rep.worst_location = vec![r[i]];
        }
        rep.sup_norm_equation_defect = rep.sup_norm_equation_defect.max(res.abs());
    }
    rep.fraction_nonnegative = ok as f64 / rep.sample_count.max(1) as f64;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldAuditOptions {
    pub samples: usize,
    /// Cap on the stencil spacing; the spacing used is `min(h_max, margin/4)`.
    pub h_max: f64,
    /// Padding of the sampling box around the centers.
    pub extent: f64,
    /// Offset into the Halton sequence.
    pub seed: u64,
    pub tol: f64,
}

impl Default for FieldAuditOptions {
    fn default() -> Self {
        FieldAuditOptions { samples: 10_000, h_max: 0.01, extent: 2.0, seed: 42, tol: RESIDUAL_TOL }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub x: Vec<f64>,
    pub v: f64,
    pub residual: f64,
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let (mut inv, mut f) = (0.0, 1.0 / base as f64);
    while i > 0 {
        inv += f * (i % base) as f64;
        i /= base;
        f /= base as f64;
    }
    inv
}

/// Halton points in `[0,1)^dim`, starting after `skip` entries.
pub fn halton(count: usize, dim: usize, skip: u64) -> Result<Vec<Vec<f64>>> {
    if dim > PRIMES.len() {
        return domain("Halton sampling supports up to 12 dimensions");
    }
    Ok((0..count as u64).map(|k| (0..dim).map(|d| radical_inverse(skip + 1 + k, PRIMES[d])).collect()).collect())
}

/// `2N+1`-point stencil audit of `-Delta V >= phi(delta_K) f(V)` at Halton
/// samples in the padded bounding box of the centers.
pub fn residual_field(
    field: &SuperpositionField,
    problem: &ProblemSpec,
    opts: &FieldAuditOptions,
) -> Result<(ResidualReport, Vec<FieldSample>)> {
    problem.validate()?;
    if problem.phi.is_zero() {
        return Err(LabError::Refused("the field audit needs a positive weight".into()));
    }
    let n = field.dimension();
    if n != problem.n {
        return domain("field and problem dimensions differ");
    }
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for c in &field.centers {
        for d in 0..n {
            lo[d] = lo[d].min(c[d] - opts.extent);
            hi[d] = hi[d].max(c[d] + opts.extent);
        }
    }
    let (dlo, dhi) = field.block.domain();
    let mut rep = ResidualReport {
        sample_count: 0,
        skipped: 0,
        min_residual: f64::INFINITY,
        worst_location: Vec::new(),
        fraction_nonnegative: 0.0,
        sup_norm_equation_defect: 0.0,
        stencil_spacing: 0.0,
        tolerance: opts.tol,
    };
    let mut rows = Vec::new();
    let mut ok = 0usize;
    for q in halton(opts.samples, n, opts.seed)? {
        let x: Vec<f64> = (0..n).map(|d| lo[d] + (hi[d] - lo[d]) * q[d]).collect();
        let margin = field.delta(&x);
        let h = opts.h_max.min(margin / 4.0);
        let far = field.centers.iter().map(|c| crate::problem::dist(&x, c)).fold(0.0, f64::max);
        if !(margin - h > dlo && far + h < dhi) {
            rep.skipped += 1;
            continue;
        }
        let Some(v0) = field.eval(&x) else {
            rep.skipped += 1;
            continue;
        };
        let mut lap = 0.0;
        let mut abs2 = 0.0;
        let mut y = x.clone();
        let mut inside = true;
        for d in 0..n {
            y[d] = x[d] + h;
            let vp = field.eval(&y);
            y[d] = x[d] - h;
            let vm = field.eval(&y);
            y[d] = x[d];
            let (Some(vp), Some(vm)) = (vp, vm) else {
                inside = false;
                break;
            };
            let s = (vp - 2.0 * v0 + vm) / (h * h);
            lap += s;
            abs2 += s.abs();
        }
        if !inside {
            rep.skipped += 1;
            continue;
        }
        let src = problem.phi.value(problem.delta(&x)) * problem.f.eval(v0);
        let res = (-lap - src) / (src + abs2);
        rep.sample_count += 1;
        rep.stencil_spacing = rep.stencil_spacing.max(h);
        if res >= -opts.tol {
            ok += 1;
        }
        if res < rep.min_residual {
            rep.min_residual = res;
            rep.worst_location = x.clone();
        }
        rep.sup_norm_equation_defect = rep.sup_norm_equation_defect.max(res.abs());
        rows.push(FieldSample { x, v: v0, residual: res });
    }
    rep.fraction_nonnegative = ok as f64 / rep.sample_count.max(1) as f64;
    Ok((rep, rows))
}

/// `u(r) >= u(r1) - tol` for every node `r <= r1`.
pub fn min_principle_check(profile: &RadialProfile, r1: f64) -> Result<bool> {
    let Some(m) = profile.eval(r1) else {
        return domain(format!("r1 = {r1} lies outside the profile"));
    };
    let tol = 1e-12 * profile.sup().max(1.0);
    Ok(profile.nodes().iter().zip(profile.values()).filter(|(r, _)| **r <= r1).all(|(_, u)| *u >= m - tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dim2Report {
    pub m: f64,
    pub x_norm: f64,
    pub u_at_x: f64,
    /// `(r1, v_{r1}(x))` for `r1 = 2^k r0` up to the profile end.
    pub minorants: Vec<(f64, f64)>,
    pub increasing: bool,
    /// `u(x) >= v_{r1}(x)` for every `r1`.
    pub dominated: bool,
    /// `m - sup v_{r1}(x)`, which tends to 0 as `r1 -> inf`.
    pub gap: f64,
}

/// Harmonic minorants `v_{r1} = m (ln r1 - ln r) / (ln r1 - ln r0)` of a positive
/// planar super-harmonic profile, `m = u(r0)`. They rise to `m` as `r1 -> inf`,
/// so `u(x) >= m` and `u` cannot decay at infinity.
pub fn dim2_ground_state_obstruction(profile: &RadialProfile, x_norm: f64) -> Result<Dim2Report> {
    if profile.dimension() != 2 {
        return domain("the planar obstruction needs N = 2");
    }
    let (r0, r_end) = (profile.grid().first(), profile.grid().last());
    let Some(u_at_x) = profile.eval(x_norm) else {
        return domain("x lies outside the profile");
    };
    if x_norm <= r0 {
        return domain("x must lie outside the inner sphere");
    }
    let m = profile.values()[0];
    let mut minorants = Vec::new();
    let mut r1 = r0;
    loop {
        r1 *= 2.0;
        if r1 > r_end * (1.0 + 1e-12) {
            break;
        }
        if r1 < x_norm {
            continue;
        }
        minorants.push((r1, m * (r1.ln() - x_norm.ln()) / (r1.ln() - r0.ln())));
    }
    if let Some(&(last, _)) = minorants.last() {
        if last < r_end * (1.0 - 1e-12) {
            minorants.push((r_end, m * (r_end.ln() - x_norm.ln()) / (r_end.ln() - r0.ln())));
        }
    } else {
        return domain("profile too short for a minorant sweep");
    }
    let tol = 1e-12 * m.abs().max(1.0);
    let increasing = minorants.windows(2).all(|w| w[1].1 >= w[0].1);
    let dominated = minorants.iter().all(|(_, v)| u_at_x >= v - tol);
    let sup = minorants.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(Dim2Report { m, x_norm, u_at_x, minorants, increasing, dominated, gap: m - sup })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBracket {
    pub c1: f64,
    pub c2: f64,
    pub samples: usize,
}

impl RatioBracket {
    pub fn spread(&self) -> f64 {
        self.c2 / self.c1
    }
}

/// Inf and sup of `u(R + delta) / H(delta)` over the nodes with `delta` in the window.
pub fn ratio_bracket(u: &RadialProfile, radius: f64, h: &RadialProfile, window: (f64, f64)) -> Result<RatioBracket> {
    let (mut c1, mut c2, mut k) = (f64::INFINITY, 0.0f64, 0usize);
    for (r, v) in u.window(radius + window.0, radius + window.1) {
        let d = r - radius;
        let Some(hd) = h.eval(d) else { continue };
        if hd > 0.0 {
            let q = v / hd;
            c1 = c1.min(q);
            c2 = c2.max(q);
            k += 1;
        }
    }
    if k == 0 {
        return domain("no nodes in the ratio window");
    }
    Ok(RatioBracket { c1, c2, samples: k })
}

/// Least-squares fit `u ~ c r^q` over the nodes in `[lo, hi]`.
pub fn power_fit(profile: &RadialProfile, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        profile.window(lo, hi).into_iter().filter(|p| p.1 > 0.0).map(|(r, u)| (r.ln(), u.ln())).collect();
    if pts.len() < 2 {
        return domain("power fit needs two positive nodes");
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    let q = sxy / sxx;
    Ok(((my - q * mx).exp(), q))
}

/// `inf u(r) r^-e` over the nodes in `[lo, hi]`.
pub fn harnack_lower_bound(profile: &RadialProfile, exponent: f64, lo: f64, hi: f64) -> Result<f64> {
    let w = profile.window(lo, hi);
    if w.is_empty() {
        return domain("no nodes in the Harnack window");
    }
    Ok(w.iter().map(|(r, u)| u * r.powf(-exponent)).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::{xi_closed_form, FSpec};
    use crate::problem::KSet;

    #[test]
    fn kelvin_examples() {
        let g = RadialGrid::geometric(0.01, 100.0, 64, 3).unwrap();
        let fund = RadialProfile::sample(g.clone(), |r| 1.0 / r).unwrap();
        let k = kelvin_transform(&fund, 3).unwrap();
        assert!(k.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
        let one = RadialProfile::sample(g.clone(), |_| 1.0).unwrap();
        let k = kelvin_transform(&one, 3).unwrap();
        for (r, v) in k.nodes().iter().zip(k.values()) {
            assert!((v * r - 1.0).abs() < 1e-14);
        }
        let xi = RadialProfile::sample(g, |r| 2.0 / r.sqrt()).unwrap();
        let back = kelvin_transform(&kelvin_transform(&xi, 3).unwrap(), 3).unwrap();
        for (a, b) in xi.values().iter().zip(back.values()) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kelvin_weight_examples() {
        assert_eq!(kelvin_weight(&PhiSpec::Power { alpha: -3.0 }, 3, 1.0).unwrap(), PhiSpec::Power { alpha: -3.0 });
        assert_eq!(kelvin_weight(&PhiSpec::Power { alpha: 0.0 }, 3, 1.0).unwrap(), PhiSpec::Power { alpha: -6.0 });
        let pl = PhiSpec::PowerLog { alpha: -3.0, beta: 1.0 };
        let k = kelvin_weight(&pl, 3, 1.0).unwrap();
        for r in [0.1f64, 1.0, 7.0] {
            let direct = r.powf(-6.0) * pl.value(1.0 / r);
            assert!((k.value(r) / direct - 1.0).abs() < 1e-12);
        }
        assert_eq!(kelvin_weight(&k, 3, 1.0).unwrap(), pl);
    }

    #[test]
    fn sphere_average_examples() {
        assert!((sphere_potential_average(3, 1.0, 2.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((sphere_potential_average(3, 1.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((sphere_potential_average(4, 2.0, 1.0).unwrap() - 0.25).abs() < 1e-12);
        assert!(sphere_potential_average(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn asymptotics_of_exact_profiles() {
        let g = RadialGrid::nested_symmetric(2f64.powi(20), 8, 3).unwrap();
        let u = RadialProfile::sample(g.clone(), |r| 1.0 / r + 0.5).unwrap();
        let a = asymptotics(&u, 3).unwrap();
        assert!((a.a_hat - 1.0).abs() < 1e-10 && (a.b_hat - 0.5).abs() < 1e-10, "{a:?}");
        let xi = RadialProfile::sample(g, |r| 2.0 / r.sqrt()).unwrap();
        let a = asymptotics(&xi, 3).unwrap();
        assert!(a.a_hat.abs() < 0.01 && a.b_hat.abs() < 0.01, "{a:?}");
        let short = RadialProfile::sample(RadialGrid::geometric(0.1, 10.0, 32, 3).unwrap(), |r| r).unwrap();
        assert!(asymptotics(&short, 3).is_err());
    }

    #[test]
    fn harmonic_profile_has_no_defect() {
        let g = RadialGrid::geometric(0.1, 10.0, 64, 3).unwrap();
        let u = RadialProfile::sample(g, |r| 2.0 / r + 1.0).unwrap();
        let p = ProblemSpec::new(3, PhiSpec::Zero, FSpec::Power { p: 1.0 }, KSet::Origin);
        let rep = residual_radial(&u, &p, ResidualMode::Equality).unwrap();
        assert!(rep.sup_norm_equation_defect <= 1e-10, "{rep:?}");
    }

    #[test]
    fn closed_form_defect_shrinks_under_refinement() {
        let p = ProblemSpec::new(3, PhiSpec::Power { alpha: -3.0 }, FSpec::Power { p: 1.0 }, KSet::Origin);
        let xi = xi_closed_form(3, 1.0, -3.0).unwrap();
        let defect = |k| {
            let g = RadialGrid::geometric(0.1, 10.0, k, 3).unwrap();
            let u = RadialProfile::sample(g, |r| xi.eval(r)).unwrap();
            residual_radial(&u, &p, ResidualMode::Equality).unwrap().sup_norm_equation_defect
        };
        let (d1, d2) = (defect(64), defect(128));
        assert!(d2 < d1 / 3.0, "{d1} {d2}");
        // h^2 |u''''| / 12 relative to u'' for c r^-1/2 with h = ln(100)/63
        let h: f64 = 100f64.ln() / 63.0;
        assert!(d1 < h * h, "{d1}");
    }

    #[test]
    fn min_principle_examples() {
        let g = RadialGrid::geometric(0.1, 10.0, 64, 3).unwrap();
        assert!(min_principle_check(&RadialProfile::sample(g.clone(), |r| 1.0 / r).unwrap(), 1.0).unwrap());
        assert!(min_principle_check(&RadialProfile::sample(g.clone(), |_| 3.0).unwrap(), 1.0).unwrap());
        assert!(!min_principle_check(&RadialProfile::sample(g.clone(), |r| r).unwrap(), 1.0).unwrap());
        assert!(min_principle_check(&RadialProfile::sample(g, |r| r).unwrap(), 20.0).is_err());
    }

    #[test]
    fn planar_minorants() {
        let g = RadialGrid::geometric(1.0, 1024.0, 128, 2).unwrap();
        let one = RadialProfile::sample(g.clone(), |_| 1.0).unwrap();
        let rep = dim2_ground_state_obstruction(&one, 2.0).unwrap();
        assert!(rep.increasing && rep.dominated);
        assert!(rep.gap < 0.11);
        let r1: f64 = 1024.0;
        let exact = RadialProfile::sample(g.clone(), |r| 3.0 * (r1 / r).ln() / r1.ln()).unwrap();
        let rep = dim2_ground_state_obstruction(&exact, 4.0).unwrap();
        let (_, v) = *rep.minorants.last().unwrap();
        assert!((v - rep.u_at_x).abs() < 1e-12);
        let three = RadialProfile::sample(RadialGrid::geometric(1.0, 8.0, 32, 3).unwrap(), |_| 1.0).unwrap();
        assert!(dim2_ground_state_obstruction(&three, 2.0).is_err());
    }

    #[test]
    fn halton_is_deterministic_and_in_range() {
        let a = halton(100, 3, 42).unwrap();
        assert_eq!(a, halton(100, 3, 42).unwrap());
        assert!(a.iter().flatten().all(|v| (0.0..1.0).contains(v)));
        assert_eq!(radical_inverse(1, 2), 0.5);
    }

    #[test]
    fn power_fit_recovers_the_power() {
        let g = RadialGrid::geometric(0.1, 10.0, 64, 3).unwrap();
        let (c, q) = power_fit(&RadialProfile::sample(g, |r| 2.0 / r.sqrt()).unwrap(), 0.1, 10.0).unwrap();
        assert!((c - 2.0).abs() < 1e-12 && (q + 0.5).abs() < 1e-12);
    }
}
