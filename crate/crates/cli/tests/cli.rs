use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bbm_fkpp::{gamma_star, ConstantsRegistry, RegistryEntry, TailWeight};
use bbm_verify::controls::{consistent_summaries, control_summaries};
use bbm_verify::{write_summaries, Phi, Protocol, RunSummary, C_PHI_NAME, GAMMA_KEY};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn bbmlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbmlab")).args(args).current_dir(cwd).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(dir: &Path, out: &str, replicas: &str) -> Output {
    bbmlab(
        &["simulate", "--d", "2", "--t", "6", "--replicas", replicas, "--seed", "7", "--obs-times", "2,4", "--prune", "default", "--out", out],
        dir,
    )
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

#[test]
fn simulate_writes_checksummed_summaries() {
    let tmp = TempDir::new().unwrap();
    let o = simulate(tmp.path(), "run", "100");
    assert!(o.status.success(), "{}", stderr(&o));
    let run = tmp.path().join("run");
    let text = fs::read_to_string(run.join("summaries.ndjson")).unwrap();
    assert_eq!(text.lines().count(), 100);
    let m = manifest(&run);
    assert_eq!(m["replicas"], 100);
    let files = m["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f["path"] == "summaries.ndjson"));
    for f in files {
        let p = run.join(f["path"].as_str().unwrap());
        assert_eq!(sha(&p), f["sha256"].as_str().unwrap(), "{}", p.display());
        assert_eq!(fs::metadata(&p).unwrap().len(), f["bytes"].as_u64().unwrap());
    }
    let on_disk = fs::read_dir(run.join("records")).unwrap().count();
    assert_eq!(files.len(), on_disk + 3);
}

#[test]
fn rerun_gives_identical_summaries() {
    let tmp = TempDir::new().unwrap();
    assert!(simulate(tmp.path(), "a", "30").status.success());
    assert!(simulate(tmp.path(), "b", "30").status.success());
    let a = fs::read(tmp.path().join("a/summaries.ndjson")).unwrap();
    let b = fs::read(tmp.path().join("b/summaries.ndjson")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn simulate_validates_its_flags() {
    let tmp = TempDir::new().unwrap();
    let o = simulate(tmp.path(), "run", "0");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--replicas"), "{}", stderr(&o));

    assert!(simulate(tmp.path(), "run", "5").status.success());
    let o = simulate(tmp.path(), "run", "5");
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--force"), "{}", stderr(&o));
    let o = bbmlab(&["simulate", "--d", "2", "--t", "6", "--replicas", "5", "--out", "run", "--force"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn config_file_replaces_flags() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("lab.toml"), "[simulate]\nd = 1\nt = 4.0\nreplicas = 3\nseed = 5\nout = \"cfg\"\n").unwrap();
    let o = bbmlab(&["--config", "lab.toml", "simulate"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(manifest(&tmp.path().join("cfg"))["config"]["d"], 1);
    fs::write(tmp.path().join("bad.toml"), "[simulate]\nreplica = 3\n").unwrap();
    assert!(!bbmlab(&["--config", "bad.toml", "simulate"], tmp.path()).status.success());
}

#[test]
fn fkpp_is_deterministic_and_validates_grid() {
    let tmp = TempDir::new().unwrap();
    let args = ["fkpp", "--gamma", "--cphi", "ramp:a=1,x0=0,w=0.5", "--ell-max", "10", "--dx", "0.05", "--dt", "0.02"];
    let mut regs = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let mut a = args.to_vec();
        a.extend(["--registry", name]);
        let o = bbmlab(&a, tmp.path());
        assert_ne!(o.status.code(), Some(3), "{}", stderr(&o));
        regs.push(ConstantsRegistry::load(&tmp.path().join(name)).unwrap());
    }
    assert_eq!(regs[0], regs[1]);
    assert_eq!(regs[0].entries.len(), 2);

    let o = bbmlab(&["fkpp", "--gamma", "--dx", "0"], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--dx"), "{}", stderr(&o));
    assert!(!bbmlab(&["fkpp", "--cphi", "ramp:a=1"], tmp.path()).status.success());
}

#[test]
fn fkpp_gamma_at_ell_80_sets_exit_code_from_convergence() {
    let tmp = TempDir::new().unwrap();
    let o = bbmlab(&["fkpp", "--gamma", "--ell-max", "80", "--out", "consts"], tmp.path());
    let reg = ConstantsRegistry::load(&tmp.path().join("registry.json")).unwrap();
    let g = reg.lookup(GAMMA_KEY.0, GAMMA_KEY.1).unwrap();
    assert!(g.value > 0.0);
    assert_eq!(g.ells, [10.0, 20.0, 40.0, 80.0]);
    assert_eq!(o.status.code(), Some(if g.converged { 0 } else { 2 }));
    for f in ["gamma_step.csv", "gamma_step.svg", "front_trace.csv", "front_trace.svg"] {
        assert!(tmp.path().join("consts").join(f).is_file(), "{f}");
    }
    assert!(fs::read_to_string(tmp.path().join("consts/gamma_step.csv")).unwrap().starts_with("#schema="));
}

#[test]
fn verify_lists_missing_inputs() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir(tmp.path().join("empty")).unwrap();
    let o = bbmlab(&["verify", "--run", "empty"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    for name in ["manifest.json", "summaries.ndjson", "registry.json"] {
        assert!(e.contains(name), "{e}");
    }
}

fn entry(name: &str, phi: &str, v: f64) -> RegistryEntry {
    RegistryEntry {
        name: name.into(),
        phi: phi.into(),
        d: None,
        dx: 0.02,
        dt: 0.01,
        ell_max: 80.0,
        weight: TailWeight::Sqrt2,
        value: v,
        converged: true,
        ells: vec![80.0],
        values: vec![v],
    }
}

/// Replaces the summaries (and optionally the protocol) of a simulated run and
/// refreshes the manifest checksums.
fn plant(run: &Path, summaries: &[RunSummary], protocol: Option<&Protocol>) {
    let mut buf = Vec::new();
    write_summaries(&mut buf, summaries).unwrap();
    fs::write(run.join("summaries.ndjson"), buf).unwrap();
    if let Some(p) = protocol {
        fs::write(run.join("protocol.json"), serde_json::to_string_pretty(p).unwrap()).unwrap();
    }
    let mut m = manifest(run);
    for f in m["files"].as_array_mut().unwrap() {
        let p = run.join(f["path"].as_str().unwrap());
        f["sha256"] = sha(&p).into();
        f["bytes"] = fs::metadata(&p).unwrap().len().into();
    }
    fs::write(run.join("manifest.json"), serde_json::to_string_pretty(&m).unwrap()).unwrap();
}

#[test]
fn verify_fails_the_negative_control_and_passes_a_consistent_fixture() {
    let tmp = TempDir::new().unwrap();
    let ls = [4.0, 6.0, 8.0];
    let p = Protocol::default();

    assert!(simulate(tmp.path(), "bad", "5").status.success());
    let bad = tmp.path().join("bad");
    plant(&bad, &control_summaries(2_500, 2, &ls, 12.0), None);
    let mut reg = ConstantsRegistry::new();
    reg.upsert(entry(GAMMA_KEY.0, GAMMA_KEY.1, 0.6));
    for phi in &p.laplace_phis {
        reg.upsert(entry(C_PHI_NAME, &phi.key(), 0.3));
    }
    reg.save(&tmp.path().join("registry.json")).unwrap();
    let o = bbmlab(&["verify", "--run", "bad"], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(!out.lines().any(|l| l.starts_with("PASS")), "{out}");
    for f in ["reports.json", "summary.txt", "survival.csv", "survival.svg", "pairing.csv", "lalley.csv", "kernel_ratio.csv", "front_trace.csv"] {
        assert!(bad.join("verify").join(f).is_file(), "{f}");
    }

    assert!(simulate(tmp.path(), "good", "5").status.success());
    let good = tmp.path().join("good");
    let phi = Phi { a: 1.0, x0: 0.0, width: 0.5 };
    let gp = Protocol { laplace_phis: vec![phi], ..Protocol::default() };
    let gs = 0.1;
    plant(&good, &consistent_summaries(4_000, 2, &ls, 12.0, gs, &phi, 0.3), Some(&gp));
    let mut reg = ConstantsRegistry::new();
    reg.upsert(entry(GAMMA_KEY.0, GAMMA_KEY.1, gs / gamma_star(1.0, 2)));
    reg.upsert(entry(C_PHI_NAME, &phi.key(), 0.3));
    reg.save(&tmp.path().join("good.json")).unwrap();
    let o = bbmlab(&["verify", "--run", "good", "--registry", "good.json"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
}

#[test]
fn verify_guards_checksums_and_protocol() {
    let tmp = TempDir::new().unwrap();
    assert!(simulate(tmp.path(), "run", "5").status.success());
    let run = tmp.path().join("run");
    ConstantsRegistry::new().save(&tmp.path().join("registry.json")).unwrap();

    let changed = Protocol { slope_tolerance: 0.3, ..Protocol::default() };
    fs::write(tmp.path().join("p.json"), serde_json::to_string(&changed).unwrap()).unwrap();
    let o = bbmlab(&["verify", "--run", "run", "--protocol", "p.json"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("protocol"), "{}", stderr(&o));

    // With the override the protocol is replaced; the empty registry then stops the suite.
    let o = bbmlab(&["verify", "--run", "run", "--protocol", "p.json", "--override-protocol"], tmp.path());
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));
    assert_eq!(Protocol::load(&run).unwrap(), Some(changed));
    let m = manifest(&run);
    let entry = m["files"].as_array().unwrap().iter().find(|f| f["path"] == "protocol.json").unwrap().clone();
    assert_eq!(entry["sha256"].as_str().unwrap(), sha(&run.join("protocol.json")));

    let csv = fs::read_dir(run.join("records"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".extremal.csv"))
        .unwrap();
    let original = fs::read_to_string(&csv).unwrap();
    assert!(original.starts_with("#schema=extremal/1\n"));
    fs::write(&csv, original.replacen("extremal/1", "extremal/2", 1)).unwrap();
    plant(&run, &bbm_verify::read_summaries(&fs::read(run.join("summaries.ndjson")).unwrap()[..]).unwrap(), None);
    let o = bbmlab(&["verify", "--run", "run"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("extremal/2"), "{}", stderr(&o));
    fs::write(&csv, original).unwrap();

    let mut text = fs::read_to_string(run.join("summaries.ndjson")).unwrap();
    text.push('\n');
    fs::write(run.join("summaries.ndjson"), text).unwrap();
    let o = bbmlab(&["verify", "--run", "run"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("checksum mismatch"), "{}", stderr(&o));
}
