//! Command-line front end: `lab <classify|solve|verify|certify-divergence>`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    asymptotics, harnack_lower_bound, min_principle_check, power_fit, ratio_bracket, residual_field, residual_radial,
    FieldAuditOptions, ResidualMode, ResidualReport,
};
use crate::bvp1d::{sci, solve_h, solve_h_on, RadialGrid, RadialProfile, SolveConfig};
use crate::construct::{
    exterior_ball_minimal, family_member, glued_supersolution, minimal_annulus, minimal_solution, superposition_field,
    RadialBuildingBlock,
};
use crate::error::LabError;
use crate::funcs::PhiSpec;
use crate::problem::{KSet, ProblemSpec};
use crate::quad::{
    classify_existence, divergence_certificate_boundary, integrate_tail_monotone, ConditionReport, Status,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Which {
    H,
    Minimal,
    Family,
    ExteriorBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    /// The reference minimal solution lives on `[2^-xi_octaves, 2^xi_octaves]`.
    pub xi_octaves: u32,
    /// Family members live on `[2^-octaves, 2^octaves]`.
    pub octaves: u32,
    pub per_octave: usize,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams { xi_octaves: 20, octaves: 18, per_octave: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub which: Option<Which>,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub family: FamilyParams,
    /// Field audit sample count.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Radius for the divergence certificates.
    #[serde(default = "default_r0")]
    pub r0: f64,
    /// Minimum number of boundary-certificate levels.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Verify target: a `r,u` profile file or one of `minimal`, `family`,
    /// `exterior_ball`, `glued`, `superposition`.
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_n_max() -> usize {
    64
}
fn default_samples() -> usize {
    10_000
}
fn default_r0() -> f64 {
    1.0
}
fn default_levels() -> usize {
    16
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_seed() -> u64 {
    42
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.problem.validate().map_err(|e| format!("problem: {e}"))?;
        self.solve.schedule().map_err(|e| format!("solve: {e}"))?;
        if !(self.a >= 0.0 && self.b >= 0.0) {
            return Err("a and b must be nonnegative".into());
        }
        if !(self.r0 > 0.0) {
            return Err("r0 must be positive".into());
        }
        if self.samples == 0 || self.levels < 3 || self.n_max < 2 {
            return Err("samples, levels and n_max must be positive (levels >= 3, n_max >= 2)".into());
        }
        Ok(())
    }
}

#[derive(Parser, Debug)]
#[command(name = "lab", version, about = "Singular semilinear elliptic laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot of the profile.
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    Classify {
        #[command(flatten)]
        common: Common,
    },
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        which: Option<Which>,
    },
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: Option<String>,
    },
    CertifyDivergence {
        #[command(flatten)]
        common: Common,
    },
}

/// Files of one run, written together at the end.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
    timings: Vec<(String, f64)>,
    verdicts: serde_json::Map<String, Value>,
}

impl Outputs {
    fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.timings.push((stage.to_string(), t.elapsed().as_secs_f64()));
        v
    }

    fn verdict(&mut self, key: &str, v: Value) {
        self.verdicts.insert(key.to_string(), v);
    }

    /// Each file goes to a temporary sibling first and is renamed into place.
    fn commit(mut self, command: &str, config: &RunConfig) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let manifest = json!({
            "command": command,
            "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
            "config": config,
            "timings_s": self.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "verdicts": self.verdicts,
        });
        self.files.push(("manifest.json".into(), serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n"));
        for (name, content) in &self.files {
            write_atomic(&self.dir.join(name), content)?;
        }
        Ok(())
    }
}

fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn exit_for(e: &LabError) -> i32 {
    match e {
        LabError::Config(_) | LabError::Io(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (name, common) = match &cli.command {
        Command::Classify { common } => ("classify", common),
        Command::Solve { common, .. } => ("solve", common),
        Command::Verify { common, .. } => ("verify", common),
        Command::CertifyDivergence { common } => ("certify-divergence", common),
    };
    let mut cfg = match load_config(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    let mut out =
        Outputs { dir: cfg.output_dir.clone(), files: Vec::new(), timings: Vec::new(), verdicts: Default::default() };
    let code = match &cli.command {
        Command::Classify { .. } => cmd_classify(&cfg, &mut out),
        Command::Solve { which, .. } => match which.or(cfg.which) {
            Some(w) => cmd_solve(&cfg, w, common.svg, &mut out),
            None => {
                eprintln!("config error: solve needs `which` (h, minimal, family, exterior_ball)");
                return EXIT_CONFIG;
            }
        },
        Command::Verify { target, .. } => match target.clone().or(cfg.target.clone()) {
            Some(t) => cmd_verify(&cfg, &t, &mut out),
            None => {
                eprintln!("config error: verify needs a `target`");
                return EXIT_CONFIG;
            }
        },
        Command::CertifyDivergence { .. } => cmd_certify_divergence(&cfg, &mut out),
    };
    let code = match code {
        Ok(c) => c,
        Err((c, msg)) => {
            eprintln!("error: {msg}");
            return c;
        }
    };
    if let Err(e) = out.commit(name, &cfg) {
        eprintln!("error: cannot write outputs: {e}");
        return EXIT_CONFIG;
    }
    code
}

type CmdResult = Result<i32, (i32, String)>;

fn fail(e: LabError) -> (i32, String) {
    (exit_for(&e), e.to_string())
}

fn conditions_csv(reports: &[ConditionReport]) -> String {
    let mut s = format!("{}\n", ConditionReport::CSV_HEADER);
    for r in reports {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

fn cmd_classify(cfg: &RunConfig, out: &mut Outputs) -> CmdResult {
    let pred = out.time("classify", || classify_existence(&cfg.problem)).map_err(fail)?;
    out.add("conditions.csv", conditions_csv(&pred.reports));
    out.verdict("exists", json!(pred.exists));
    out.verdict("conclusive", json!(pred.conclusive));
    out.verdict("criterion", json!(pred.criterion_used));
    if pred.conclusive {
        println!("exists={} ({})", pred.exists, pred.criterion_used);
        Ok(EXIT_OK)
    } else {
        println!("inconclusive ({})", pred.criterion_used);
        Ok(EXIT_UNDECIDED)
    }
}

fn residual_csv(mode: ResidualMode, rep: &ResidualReport) -> String {
    let m = match mode {
        ResidualMode::Equality => "equality",
        ResidualMode::Inequality => "inequality",
    };
    format!("mode,{}\n{m},{}\n", ResidualReport::CSV_HEADER, rep.csv_row())
}

fn asymptotics_csv(profile: &RadialProfile, n: usize) -> String {
    let mut s = String::from("status,a_hat,a_error,b_hat,b_error\n");
    match asymptotics(profile, n) {
        Ok(a) => {
            let _ = writeln!(s, "ok,{},{},{},{}", sci(a.a_hat), sci(a.a_error), sci(a.b_hat), sci(a.b_error));
        }
        Err(_) => s.push_str("insufficient_span,,,,\n"),
    }
    s
}

/// Log-log polyline of the positive part of a profile.
pub fn profile_svg(profile: &RadialProfile) -> String {
    let pts: Vec<(f64, f64)> = profile
        .nodes()
        .iter()
        .zip(profile.values())
        .filter(|(_, u)| **u > 0.0)
        .map(|(r, u)| (r.log10(), u.log10()))
        .collect();
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let mut s =
        format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n");
    if pts.len() >= 2 {
        let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
        let (y0, y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
        let sx = (w - 2.0 * pad) / (x1 - x0).max(1e-12);
        let sy = (h - 2.0 * pad) / (y1 - y0).max(1e-12);
        let _ = writeln!(
            s,
            "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
            w - 2.0 * pad,
            h - 2.0 * pad
        );
        s.push_str("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"");
        for (x, y) in &pts {
            let _ = write!(s, "{:.2},{:.2} ", pad + (x - x0) * sx, h - pad - (y - y0) * sy);
        }
        s.push_str("\"/>\n");
        let _ = writeln!(s, "<text x=\"{pad}\" y=\"{}\" font-size=\"12\">log10 r in [{x0:.2}, {x1:.2}], log10 u in [{y0:.2}, {y1:.2}]</text>", h - 10.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Three-point Lagrange interpolation through the nodes nearest `t`.
fn quadratic_at(profile: &RadialProfile, t: f64) -> Option<f64> {
    let (r, u) = (profile.nodes(), profile.values());
    if r.len() < 3 || !profile.contains(t) {
        return None;
    }
    let i = r.partition_point(|x| *x < t).clamp(1, r.len() - 2);
    let (x0, x1, x2) = (r[i - 1], r[i], r[i + 1]);
    let l0 = (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1));
    Some(l0 * u[i - 1] + l1 * u[i] + l2 * u[i + 1])
}

fn h_audit_problem(cfg: &RunConfig) -> ProblemSpec {
    ProblemSpec { n: 1, k: KSet::Origin, ..cfg.problem.clone() }
}

fn cmd_solve(cfg: &RunConfig, which: Which, svg: bool, out: &mut Outputs) -> CmdResult {
    let p = &cfg.problem;
    let n = p.n;
    let (profile, audit_problem) = match which {
        Which::H => {
            let h = out.time("solve_h", || solve_h(&p.phi, &p.f, &cfg.solve)).map_err(fail)?;
            if let Some(v) = quadratic_at(&h, 0.5) {
                out.verdict("h_at_half", json!(v));
                println!("H(0.5)={v:.6}");
            }
            (h, h_audit_problem(cfg))
        }
        Which::Minimal => {
            let sol = out.time("minimal_solution", || minimal_solution(p, cfg.n_max, &cfg.solve)).map_err(fail)?;
            let (c, q) = power_fit(sol.best(), 0.1, 10.0).map_err(fail)?;
            out.verdict("c_fit", json!(c));
            out.verdict("q_fit", json!(q));
            out.verdict("converged", json!(sol.converged));
            out.verdict("contraction", json!(sol.ratio));
            out.verdict("levels", json!(sol.history));
            if let Some(e) = &sol.extrapolated {
                out.add("profile_extrapolated.csv", e.to_csv());
            }
            println!("c_fit={c:.4} q_fit={q:.4}");
            (sol.profile, p.clone())
        }
        Which::Family => {
            let fp = &cfg.family;
            let xi = out
                .time("minimal_reference", || minimal_annulus(p, fp.xi_octaves, fp.per_octave, &cfg.solve))
                .map_err(fail)?;
            let nf = 2f64.powi(fp.octaves as i32);
            let m = out.time("family_member", || family_member(p, cfg.a, cfg.b, &xi, nf, &cfg.solve)).map_err(fail)?;
            out.verdict("sandwich_margin", json!(m.sandwich_margin));
            if let Ok(a) = asymptotics(&m.profile, n) {
                out.verdict("a_hat", json!(a.a_hat));
                out.verdict("b_hat", json!(a.b_hat));
                println!("a_hat={:.4} b_hat={:.4}", a.a_hat, a.b_hat);
            }
            (m.profile, p.clone())
        }
        Which::ExteriorBall => {
            let sol =
                out.time("exterior_ball_minimal", || exterior_ball_minimal(p, cfg.n_max, &cfg.solve)).map_err(fail)?;
            let grid = RadialGrid::two_sided(2f64.powi(-20), 16, 1).map_err(fail)?;
            let h = out.time("solve_h", || solve_h_on(&p.phi, &p.f, &grid, &cfg.solve)).map_err(fail)?;
            let br = ratio_bracket(&sol.profile, sol.radius, &h, sol.window).map_err(fail)?;
            out.verdict("ratio_bracket", json!([br.c1, br.c2]));
            out.verdict("levels", json!(sol.history));
            println!("ratio bracket [{:.4}, {:.4}]", br.c1, br.c2);
            (sol.profile, p.clone())
        }
    };
    let mode = ResidualMode::Equality;
    let rep = residual_radial(&profile, &audit_problem, mode).map_err(fail)?;
    out.verdict("equation_defect", json!(rep.sup_norm_equation_defect));
    out.add("profile.csv", profile.to_csv());
    out.add("residual.csv", residual_csv(mode, &rep));
    if which == Which::H {
        out.add("asymptotics.csv", "status,a_hat,a_error,b_hat,b_error\nnot_applicable,,,,\n".into());
    } else {
        out.add("asymptotics.csv", asymptotics_csv(&profile, n));
    }
    if svg {
        out.add("profile.svg", profile_svg(&profile));
    }
    Ok(EXIT_OK)
}

/// One verify.csv row.
struct Property {
    name: String,
    pass: bool,
    worst_margin: f64,
    location: String,
}

fn prop(name: &str, pass: bool, worst_margin: f64, location: String) -> Property {
    Property { name: name.into(), pass, worst_margin, location }
}

fn residual_property(name: &str, rep: &ResidualReport, mode: ResidualMode) -> Property {
    let margin = match mode {
        ResidualMode::Equality => rep.tolerance - rep.sup_norm_equation_defect,
        ResidualMode::Inequality => rep.min_residual + rep.tolerance,
    };
    let loc = rep.worst_location.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(" ");
    prop(name, rep.passes(mode), margin, loc)
}

/// Shape checks shared by every radial target.
fn profile_properties(
    profile: &RadialProfile,
    problem: &ProblemSpec,
    props: &mut Vec<Property>,
) -> Result<(), LabError> {
    let rep = residual_radial(profile, problem, ResidualMode::Inequality)?;
    props.push(residual_property("residual_inequality", &rep, ResidualMode::Inequality));
    let (r, u) = (profile.nodes(), profile.values());
    let inner = &u[1..u.len() - 1];
    let (imin, umin) =
        inner.iter().enumerate().fold((0, f64::INFINITY), |a, (i, v)| if *v < a.1 { (i, *v) } else { a });
    props.push(prop("positivity", umin > 0.0, umin, sci(r[imin + 1])));
    // Away from an inner boundary layer of two octaves.
    let lo = 4.0 * r[0];
    let r1 = (r[0] * r[r.len() - 1]).sqrt();
    if r1 > lo && problem.k == KSet::Origin {
        let nodes: Vec<(f64, f64)> = profile.window(lo, r[r.len() - 1]);
        if nodes.len() >= 16 {
            let grid = RadialGrid::from_nodes(nodes.iter().map(|p| p.0).collect(), profile.dimension())?;
            let sub = RadialProfile::new(grid, nodes.iter().map(|p| p.1).collect())?;
            let ok = min_principle_check(&sub, r1)?;
            let m = sub.eval(r1).unwrap_or(f64::NAN);
            let worst = sub.window(lo, r1).iter().map(|p| p.1 - m).fold(f64::INFINITY, f64::min);
            props.push(prop("min_principle", ok, worst, sci(r1)));
        }
    }
    // Monotone decay over the outer quarter of the nodes.
    let start = 3 * r.len() / 4;
    let rise = u[start..].windows(2).enumerate().map(|(i, w)| (w[1] - w[0], i)).fold((f64::NEG_INFINITY, 0), |a, b| {
        if b.0 > a.0 {
            b
        } else {
            a
        }
    });
    props.push(prop("decay", rise.0 <= 0.0, -rise.0, sci(r[start + rise.1 + 1])));
    if problem.k == KSet::Origin {
        if let (Some(pp), Some((a0, b0))) = (problem.f.power_p(), power_exponents(&problem.phi)) {
            let e0 = (2.0 + a0) / (1.0 + pp);
            let e1 = (2.0 + b0) / (1.0 + pp);
            if let Ok(h) = harnack_lower_bound(profile, e0, lo, 1.0) {
                props.push(prop("harnack_near0", h > 0.0, h, format!("r<=1 exponent {e0}")));
            }
            if let Ok(h) = harnack_lower_bound(profile, e1, 1.0, r[r.len() / 2 + (r.len() - r.len() / 2) / 2]) {
                props.push(prop("harnack_tail", h > 0.0, h, format!("r>=1 exponent {e1}")));
            }
        }
    }
    Ok(())
}

fn power_exponents(phi: &PhiSpec) -> Option<(f64, f64)> {
    match phi {
        PhiSpec::Power { alpha } => Some((*alpha, *alpha)),
        PhiSpec::PowerSplit { alpha, beta } => Some((*alpha, *beta)),
        _ => None,
    }
}

fn cmd_verify(cfg: &RunConfig, target: &str, out: &mut Outputs) -> CmdResult {
    let p = &cfg.problem;
    let mut props = Vec::new();
    match target {
        "minimal" => {
            let sol = out.time("minimal_solution", || minimal_solution(p, cfg.n_max, &cfg.solve)).map_err(fail)?;
            let rep = residual_radial(&sol.profile, p, ResidualMode::Equality).map_err(fail)?;
            props.push(residual_property("equation_defect", &rep, ResidualMode::Equality));
            let inc = sol.history.iter().filter_map(|h| h.window_increment).fold(f64::INFINITY, f64::min);
            props.push(prop("monotone_exhaustion", inc >= 0.0, inc, "r in [1/2, 2]".into()));
            profile_properties(&sol.profile, p, &mut props).map_err(fail)?;
        }
        "family" => {
            let fp = &cfg.family;
            let xi = out
                .time("minimal_reference", || minimal_annulus(p, fp.xi_octaves, fp.per_octave, &cfg.solve))
                .map_err(fail)?;
            let nf = 2f64.powi(fp.octaves as i32);
            let m = out.time("family_member", || family_member(p, cfg.a, cfg.b, &xi, nf, &cfg.solve)).map_err(fail)?;
            let rep = residual_radial(&m.profile, p, ResidualMode::Equality).map_err(fail)?;
            props.push(residual_property("equation_defect", &rep, ResidualMode::Equality));
            props.push(prop("sandwich", m.sandwich_margin >= -1e-8, m.sandwich_margin, "all nodes".into()));
            profile_properties(&m.profile, p, &mut props).map_err(fail)?;
        }
        "exterior_ball" => {
            let sol =
                out.time("exterior_ball_minimal", || exterior_ball_minimal(p, cfg.n_max, &cfg.solve)).map_err(fail)?;
            let rep = residual_radial(&sol.profile, p, ResidualMode::Equality).map_err(fail)?;
            props.push(residual_property("equation_defect", &rep, ResidualMode::Equality));
            profile_properties(&sol.profile, p, &mut props).map_err(fail)?;
        }
        "glued" | "superposition" => {
            let g = out.time("glue", || glued_supersolution(p)).map_err(fail)?;
            props.push(prop("glued_audit", true, g.worst_residual + crate::construct::GLUE_TOL, sci(g.worst_radius)));
            out.verdict("m", json!(g.m));
            if target == "superposition" {
                let centers = match &p.k {
                    KSet::PointSet { centers } => centers.clone(),
                    _ => vec![vec![0.0; p.n]],
                };
                let v = superposition_field(RadialBuildingBlock::Glued(Box::new(g)), &centers).map_err(fail)?;
                let opts = FieldAuditOptions { samples: cfg.samples, seed: cfg.seed, ..Default::default() };
                let (rep, rows) = out.time("field_audit", || residual_field(&v, p, &opts)).map_err(fail)?;
                let loc = rep.worst_location.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(" ");
                props.push(prop(
                    "field_inequality",
                    rep.fraction_nonnegative >= 0.99,
                    rep.fraction_nonnegative - 0.99,
                    loc,
                ));
                let mut s = String::new();
                for d in 0..p.n {
                    let _ = write!(s, "x{},", d + 1);
                }
                s.push_str("v,residual\n");
                for row in rows {
                    for x in &row.x {
                        let _ = write!(s, "{},", sci(*x));
                    }
                    let _ = writeln!(s, "{},{}", sci(row.v), sci(row.residual));
                }
                out.add("field_samples.csv", s);
            }
        }
        path => {
            let text =
                std::fs::read_to_string(path).map_err(|e| (EXIT_CONFIG, format!("cannot read target {path}: {e}")))?;
            let profile = RadialProfile::from_csv(&text, p.n).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
            profile_properties(&profile, p, &mut props).map_err(fail)?;
        }
    }
    let mut s = String::from("property,pass,worst_margin,location\n");
    for q in &props {
        let _ = writeln!(s, "{},{},{},{}", q.name, q.pass, sci(q.worst_margin), q.location);
    }
    out.add("verify.csv", s);
    let failed: Vec<&str> = props.iter().filter(|q| !q.pass).map(|q| q.name.as_str()).collect();
    out.verdict("failed", json!(failed));
    if failed.is_empty() {
        println!("all {} properties pass", props.len());
        Ok(EXIT_OK)
    } else {
        println!("failing: {}", failed.join(", "));
        Ok(EXIT_UNDECIDED)
    }
}

fn cmd_certify_divergence(cfg: &RunConfig, out: &mut Outputs) -> CmdResult {
    let phi = &cfg.problem.phi;
    let tail = out.time("tail", || integrate_tail_monotone(phi, cfg.r0)).map_err(fail)?;
    let boundary = out.time("boundary", || divergence_certificate_boundary(phi, cfg.r0, cfg.levels)).map_err(fail)?;
    let mut s = String::from("kind,level,log_radius,partial\n");
    for (k, v) in tail.certificate.iter().flatten().enumerate() {
        let _ = writeln!(s, "tail,{},,{}", k + 1, sci(*v));
    }
    if let Some(v) = tail.value {
        let _ = writeln!(s, "tail_value,,,{}", sci(v));
    }
    for ((k, l), v) in boundary.levels.iter().zip(&boundary.ln_radii).zip(&boundary.values) {
        let _ = writeln!(s, "boundary,{k},{},{}", sci(*l), sci(*v));
    }
    if let Some(v) = boundary.value {
        let _ = writeln!(s, "boundary_value,,,{}", sci(v));
    }
    out.add("certificate.csv", s);
    out.verdict("tail", json!({ "status": tail.status, "value": tail.value }));
    out.verdict(
        "boundary",
        json!({ "status": boundary.status, "value": boundary.value, "levels": boundary.levels.last() }),
    );
    let word = |s: Status| match s {
        Status::Infinite => "divergent",
        Status::Finite => "convergent",
        Status::Inconclusive => "inconclusive",
    };
    println!("tail: {}; boundary: {}", word(tail.status), word(boundary.status));
    if tail.status == Status::Inconclusive || boundary.status == Status::Inconclusive {
        Ok(EXIT_UNDECIDED)
    } else {
        Ok(EXIT_OK)
    }
}
