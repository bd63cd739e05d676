use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn brenorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brenorm")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("brenorm-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_64() {
    let o = brenorm(&["frobnicate"]);
    assert_eq!(code(&o), 64);
    assert!(stderr(&o).contains("validate-closed-forms"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_exits_64() {
    assert_eq!(code(&brenorm(&["norms", "--bogus"])), 64);
    assert_eq!(code(&brenorm(&[])), 64);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&brenorm(&["--help"])), 0);
}

#[test]
fn unknown_config_key_exits_4_with_location() {
    let d = scratch("badkey");
    let cfg = d.join("c.toml");
    fs::write(&cfg, "seed = 2\n\n[norms]\nalpha = 0.1\nbogus = 3\n").unwrap();
    let o = brenorm(&["norms", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let e = stderr(&o);
    assert!(e.contains("bogus") && e.contains("line 5"), "{e}");
}

#[test]
fn malformed_toml_and_bad_values_exit_4() {
    let d = scratch("syntax");
    let cfg = d.join("c.toml");
    fs::write(&cfg, "seed = \n").unwrap();
    assert_eq!(code(&brenorm(&["norms", "--config", cfg.to_str().unwrap()])), 4);
    fs::write(&cfg, "[pam]\nbc = \"sideways\"\n").unwrap();
    assert_eq!(code(&brenorm(&["solve-pam", "--config", cfg.to_str().unwrap()])), 4);
    let out = d.join("o");
    assert_eq!(code(&brenorm(&["solve-pam", "--eps-ladder", "2^-1..", "--out", out.to_str().unwrap()])), 4);
    assert_eq!(code(&brenorm(&["norms", "--bc", "robin", "--out", out.to_str().unwrap()])), 4);
    assert_eq!(code(&brenorm(&["norms", "--config", d.join("missing.toml").to_str().unwrap()])), 4);
}

#[test]
fn norms_writes_holder_csv_and_reruns_are_byte_identical() {
    let a = scratch("norms-a");
    let b = scratch("norms-b");
    assert_eq!(code(&brenorm(&["norms", "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&brenorm(&["norms", "--out", b.to_str().unwrap(), "--threads", "1"])), 0);
    assert_eq!(read_all(&a), read_all(&b));
    let csv = fs::read_to_string(a.join("holder.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# config_hash=") && lines[0].contains("seed=1"));
    assert_eq!(lines[1], "alpha,eta,P,lambda,x1,x2,x3,contribution");
    assert!(lines.last().unwrap().contains(",max,"));
}

#[test]
fn seed_changes_the_hash_and_the_stochastic_output() {
    let d = scratch("seeds");
    let cfg = d.join("c.toml");
    fs::write(&cfg, "[norms]\nsource = \"psi\"\nn = 32\neps = 0.25\nlevels = [0.75, 0.5]\nper_level = 4\nscales_kmin = 2\nscales_kmax = 3\n").unwrap();
    let (a, b) = (d.join("a"), d.join("b"));
    for (out, seed) in [(&a, "1"), (&b, "2")] {
        let o = brenorm(&["norms", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let ha = fs::read_to_string(a.join("holder.csv")).unwrap();
    let hb = fs::read_to_string(b.join("holder.csv")).unwrap();
    assert_ne!(ha.lines().next(), hb.lines().next());
    assert_ne!(ha.lines().nth(2), hb.lines().nth(2));
}

#[test]
fn kernel_check_passes_and_writes_the_probe_table() {
    let d = scratch("kernel");
    let o = brenorm(&["kernel-check", "--out", d.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(d.join("kernel_probes.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "kind,a,M,t,x1,x2,x3,t',y1,y2,y3,value");
    assert!(d.join("kernel_check.json").exists() && d.join("solver_orders.json").exists());
}

#[test]
fn validate_closed_forms_passes_and_is_reproducible() {
    let a = scratch("closed-a");
    let b = scratch("closed-b");
    assert_eq!(code(&brenorm(&["validate-closed-forms", "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&brenorm(&["validate-closed-forms", "--out", b.to_str().unwrap()])), 0);
    assert_eq!(read_all(&a), read_all(&b));
    let cj = fs::read_to_string(a.join("cJ.csv")).unwrap();
    assert_eq!(cj.lines().nth(1).unwrap(), "a,J0,bound_ratio");
}

#[test]
fn small_pam_ladder_runs_from_a_config() {
    let d = scratch("pam");
    let cfg = d.join("c.toml");
    fs::write(&cfg, "seed = 5\n[pam]\nn = 32\nt_final = 0.01\na_rho = 0.0\n").unwrap();
    let o = brenorm(&[
        "solve-pam",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        d.to_str().unwrap(),
        "--eps-ladder",
        "2^-1,2^-2,2^-3",
        "--bc",
        "robin",
    ]);
    assert!(matches!(code(&o), 0 | 2), "{}", stderr(&o));
    let json = fs::read_to_string(d.join("pam_renormalized_robin.json")).unwrap();
    assert!(json.contains("\"seed\": 5"));
    assert!(d.join("pam_renormalized_robin_series.csv").exists());
}
