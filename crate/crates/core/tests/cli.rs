use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("spawn lab")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn new() -> Run {
        Run { dir: tempfile::tempdir().unwrap() }
    }

    fn config(&self, name: &str, json: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, json).unwrap();
        p
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, cmd: &str, config: &Path, out: &str, extra: &[&str]) -> Output {
        let out = self.out(out);
        let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        lab(&args)
    }
}

fn problem(phi: &str, p: f64, k: &str) -> String {
    format!(r#"{{"N":3,"phi":{phi},"f":{{"kind":"power","p":{p}}},"K":{k}}}"#)
}

const ORIGIN: &str = r#"{"kind":"origin"}"#;

fn power(alpha: f64) -> String {
    format!(r#"{{"kind":"power","alpha":{alpha}}}"#)
}

fn split(alpha: f64, beta: f64) -> String {
    format!(r#"{{"kind":"power_split","alpha":{alpha},"beta":{beta}}}"#)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn classify_verdicts_and_exit_codes() {
    let run = Run::new();
    let yes = run.config("yes.json", &format!(r#"{{"problem":{}}}"#, problem(&split(-3.0, -3.0), 1.0, ORIGIN)));
    let o = run.exec("classify", &yes, "a", &[]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("exists=true"));
    let csv = read(&run.out("a"), "conditions.csv");
    assert!(csv.starts_with("criterion,status,value,method,evaluations\n"));

    let no = run.config("no.json", &format!(r#"{{"problem":{}}}"#, problem(&split(-3.0, -2.0), 1.0, ORIGIN)));
    let o = run.exec("classify", &no, "b", &[]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("exists=false"));
    assert_eq!(manifest(&run.out("b"))["verdicts"]["exists"], Value::Bool(false));
}

#[test]
fn classify_near_critical_tabulated_weight_is_inconclusive() {
    let run = Run::new();
    let phi =
        r#"{"kind":"tabulated","knots":[0.5,1,2],"values":[8,1,0.25],"near0_exponent":-3,"tail_exponent":-2.0000001}"#;
    let c = run.config("t.json", &format!(r#"{{"problem":{}}}"#, problem(phi, 1.0, ORIGIN)));
    let o = run.exec("classify", &c, "o", &[]);
    assert_eq!(code(&o), 2);
    assert!(read(&run.out("o"), "conditions.csv").contains("Inconclusive"));
}

#[test]
fn malformed_configs_exit_one_with_location() {
    let run = Run::new();
    let truncated = run.config("bad.json", "{\n  \"problem\": {\"N\": 3,\n");
    let o = run.exec("classify", &truncated, "o", &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let unknown =
        run.config("unk.json", &format!(r#"{{"problem":{},"tolerance":1}}"#, problem(&power(-3.0), 1.0, ORIGIN)));
    let o = run.exec("classify", &unknown, "o", &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerance"));

    let neg = run.config(
        "neg.json",
        &format!(r#"{{"problem":{},"solve":{{"tol_sup":-1}}}}"#, problem(&power(-3.0), 1.0, ORIGIN)),
    );
    assert_eq!(code(&run.exec("classify", &neg, "o", &[])), 1);
    assert!(!run.out("o").exists());

    let missing = run.out("nope.json");
    assert_eq!(code(&run.exec("classify", &missing, "o", &[])), 1);
}

#[test]
fn solve_minimal_headline_and_determinism() {
    let run = Run::new();
    let c = run.config(
        "m.json",
        &format!(r#"{{"problem":{},"which":"minimal","n_max":64}}"#, problem(&power(-3.0), 1.0, ORIGIN)),
    );
    assert_eq!(code(&run.exec("solve", &c, "a", &[])), 0);
    assert_eq!(code(&run.exec("solve", &c, "b", &["--svg"])), 0);
    let m = manifest(&run.out("a"));
    let c_fit = m["verdicts"]["c_fit"].as_f64().unwrap();
    let q_fit = m["verdicts"]["q_fit"].as_f64().unwrap();
    assert!((c_fit - 2.0).abs() < 0.02, "c_fit {c_fit}");
    assert!((q_fit + 0.5).abs() < 0.005, "q_fit {q_fit}");
    assert_eq!(m["config"]["seed"], 42);
    for f in ["profile.csv", "profile_extrapolated.csv", "residual.csv", "asymptotics.csv"] {
        assert_eq!(read(&run.out("a"), f), read(&run.out("b"), f), "{f} differs between runs");
    }
    assert!(read(&run.out("a"), "profile.csv").starts_with("r,u\n"));
    assert!(!run.out("a").join("profile.svg").exists());
    assert!(read(&run.out("b"), "profile.svg").contains("<polyline"));
}

#[test]
fn solve_h_parabola() {
    let run = Run::new();
    let c = run.config("h.json", &format!(r#"{{"problem":{},"which":"h"}}"#, problem(&power(0.0), 0.0, ORIGIN)));
    let o = run.exec("solve", &c, "o", &[]);
    assert_eq!(code(&o), 0);
    let h = manifest(&run.out("o"))["verdicts"]["h_at_half"].as_f64().unwrap();
    assert!((h - 0.125).abs() < 1e-8, "H(0.5) = {h}");
    assert!(String::from_utf8_lossy(&o.stdout).contains("H(0.5)=0.125000"));
}

#[test]
fn solve_family_asymptotics() {
    let run = Run::new();
    let c = run.config(
        "f.json",
        &format!(r#"{{"problem":{},"which":"family","a":1,"b":0.5}}"#, problem(&power(-3.0), 1.0, ORIGIN)),
    );
    assert_eq!(code(&run.exec("solve", &c, "o", &[])), 0);
    let csv = read(&run.out("o"), "asymptotics.csv");
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').skip(1).map(|s| s.parse().unwrap()).collect();
    assert!((row[0] - 1.0).abs() < 0.01 && (row[2] - 0.5).abs() < 0.005, "{csv}");
}

#[test]
fn solver_error_exits_three_without_outputs() {
    let run = Run::new();
    // int_0^1 r phi diverges, so H does not exist.
    let c = run.config("h.json", &format!(r#"{{"problem":{},"which":"h"}}"#, problem(&power(-3.0), 1.0, ORIGIN)));
    assert_eq!(code(&run.exec("solve", &c, "o", &[])), 3);
    assert!(!run.out("o").exists());
}

#[test]
fn verify_catches_an_injected_dip() {
    let run = Run::new();
    let c = run.config("m.json", &format!(r#"{{"problem":{},"which":"minimal"}}"#, problem(&power(-3.0), 1.0, ORIGIN)));
    assert_eq!(code(&run.exec("solve", &c, "s", &[])), 0);
    let profile = run.out("s").join("profile.csv");
    let o = run.exec("verify", &c, "v", &["--target", profile.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", read(&run.out("v"), "verify.csv"));

    let text = std::fs::read_to_string(&profile).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let k = lines.len() / 2;
    let (r, u) = lines[k].split_once(',').map(|(a, b)| (a.to_string(), b.parse::<f64>().unwrap())).unwrap();
    lines[k] = format!("{r},{:e}", 0.9 * u);
    let bad = run.out("bad.csv");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let o = run.exec("verify", &c, "w", &["--target", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let csv = read(&run.out("w"), "verify.csv");
    assert!(csv.starts_with("property,pass,worst_margin,location\n"));
    let row = csv.lines().find(|l| l.starts_with("residual_inequality,")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[1], "false");
    let at: f64 = fields[3].parse().unwrap();
    let r: f64 = r.parse().unwrap();
    assert!((at / r - 1.0).abs() < 1e-12, "reported {at}, perturbed {r}");
}

#[test]
fn verify_minimal_construction_passes() {
    let run = Run::new();
    let c = run.config("m.json", &format!(r#"{{"problem":{}}}"#, problem(&power(-3.0), 1.0, ORIGIN)));
    let o = run.exec("verify", &c, "o", &["--target", "minimal"]);
    let csv = read(&run.out("o"), "verify.csv");
    assert_eq!(code(&o), 0, "{csv}");
    assert!(csv.contains("equation_defect,true") && csv.contains("min_principle,true"));
}

#[test]
fn verify_unreadable_target_exits_one() {
    let run = Run::new();
    let c = run.config("m.json", &format!(r#"{{"problem":{}}}"#, problem(&power(-3.0), 1.0, ORIGIN)));
    assert_eq!(code(&run.exec("verify", &c, "o", &["--target", "/nonexistent/profile.csv"])), 1);
    let junk = run.config("junk.csv", "r,u\n1,abc\n");
    assert_eq!(code(&run.exec("verify", &c, "o", &["--target", junk.to_str().unwrap()])), 1);
}

#[test]
fn verify_two_center_superposition() {
    let run = Run::new();
    let k = r#"{"kind":"point_set","centers":[[0,0,0],[3,0,0]]}"#;
    let c = run.config("s.json", &format!(r#"{{"problem":{},"samples":1000}}"#, problem(&split(-1.0, -4.0), 1.0, k)));
    let o = run.exec("verify", &c, "o", &["--target", "superposition"]);
    let csv = read(&run.out("o"), "verify.csv");
    assert_eq!(code(&o), 0, "{csv}");
    let samples = read(&run.out("o"), "field_samples.csv");
    assert!(samples.starts_with("x1,x2,x3,v,residual\n"));
    assert_eq!(samples.lines().count(), 1001);
}

#[test]
fn certify_divergence_examples() {
    let run = Run::new();
    let cases = [(-2.0, "tail: divergent"), (-2.5, "tail: convergent")];
    for (alpha, want) in cases {
        let c = run.config("d.json", &format!(r#"{{"problem":{}}}"#, problem(&power(alpha), 1.0, ORIGIN)));
        let o = run.exec("certify-divergence", &c, "o", &[]);
        assert_eq!(code(&o), 0);
        let stdout = String::from_utf8_lossy(&o.stdout).to_string();
        assert!(stdout.contains(want), "{stdout}");
        // Both weights have near-0 exponent at most -2.
        assert!(stdout.contains("boundary: divergent"), "{stdout}");
    }
    let cert = read(&run.out("o"), "certificate.csv");
    let v: f64 =
        cert.lines().find(|l| l.starts_with("tail_value")).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((v - 2.0).abs() < 1e-9);
    let b: Vec<f64> = cert
        .lines()
        .filter(|l| l.starts_with("boundary,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(b.windows(2).all(|w| w[1] >= w[0]), "certificate must be monotone");
}
