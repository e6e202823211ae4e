use std::fs;
use std::path::Path;
use std::process::Command;

use lognls::harness::output::{Table, CSV_VERSION_LINE, MANIFEST_NAME};
use lognls::harness::{parse_config, run_scenario, sweep, RunManifest, Scenario, ScenarioKind};
use lognls::Error;

fn small(kind: ScenarioKind, dir: &Path) -> Scenario {
    let mut s = Scenario::new(kind);
    s.params.out_dir = dir.to_path_buf();
    s
}

fn read_csvs(m: &RunManifest, dir: &Path) -> Vec<(String, Vec<u8>)> {
    m.files
        .iter()
        .map(|f| (f.path.clone(), fs::read(dir.join(&f.path)).unwrap()))
        .collect()
}

#[test]
fn config_examples() {
    let s = parse_config("scenario=cos_probe\nK=11").unwrap();
    assert_eq!(s.kind, ScenarioKind::CosProbe);
    assert_eq!(s.params.k, 11);
    assert_eq!(s.params.steps, 1000);
    assert_eq!(s.params.final_time, 0.1);

    let s = parse_config("scenario=sweep_sobolev\nK_list=7,8,9").unwrap();
    assert_eq!(s.params.k_list, vec![7, 8, 9]);

    let err = parse_config("scenario=bogus").unwrap_err();
    assert!(err.to_string().contains("unknown scenario"), "{err}");
    assert!(parse_config("scenario=cos_probe\nKK=3").is_err());
    assert!(parse_config("scenario=cos_probe\nK=3\nK=4").is_err());
    assert!(parse_config("scenario=cos_probe\nK=eleven").is_err());
}

#[test]
fn runs_are_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for rep in 0..2 {
        let dir = root.path().join(format!("rep{rep}"));
        let mut s = small(ScenarioKind::TanhEvolution, &dir);
        s.set("K", "6").unwrap();
        s.set("J", "100").unwrap();
        s.set("T", "0.1").unwrap();
        s.set("snapshots", "0,0.1").unwrap();
        let m = run_scenario(&s).unwrap();
        assert!(m.passed(), "{m:?}");
        outputs.push((read_csvs(&m, &dir), m.files));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].0.iter().all(|(_, bytes)| bytes.starts_with(CSV_VERSION_LINE.as_bytes())));
}

#[test]
fn rows_are_stamped_with_step_times() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small(ScenarioKind::CosProbe, dir.path());
    s.set("K", "6").unwrap();
    s.set("J", "50").unwrap();
    s.set("T", "0.05").unwrap();
    s.set("record_every", "5").unwrap();
    s.set("snapshots", "0,0.05").unwrap();
    let m = run_scenario(&s).unwrap();
    let table = Table::parse(&fs::read_to_string(dir.path().join("cos_probe.csv")).unwrap()).unwrap();
    let tau = 0.05 / 50.0;
    let t = table.column("t").unwrap();
    assert_eq!(t.len(), 11);
    for (i, &ti) in t.iter().enumerate() {
        assert_eq!(ti, (5 * i) as f64 * tau);
    }
    let written = RunManifest::read(&dir.path().join(MANIFEST_NAME)).unwrap();
    assert_eq!(written, m);
    assert_eq!(m.params["J"], "50");
    assert!(m.overrides.contains(&"record_every".to_string()));
}

#[test]
fn sweep_isolates_failures_and_keeps_order() {
    let root = tempfile::tempdir().unwrap();
    let mut parent = small(ScenarioKind::SweepSobolev, root.path());
    parent.set("T", "0.001").unwrap();
    parent.set("J", "10").unwrap();
    let values: Vec<String> = ["6", "99", "5"].iter().map(|s| s.to_string()).collect();
    let results = sweep(&parent, "K", &values);
    assert_eq!(results.len(), 3);
    assert!(matches!(results[1], Err(Error::InvalidParameter(_))));
    let k6 = results[0].as_ref().unwrap();
    let k5 = results[2].as_ref().unwrap();
    assert_eq!(k6.params["K_list"], "6");
    assert_eq!(k5.params["K_list"], "5");

    let mut alone = parent.clone();
    alone.set("K", "6").unwrap();
    alone.params.out_dir = root.path().join("alone");
    let m = run_scenario(&alone).unwrap();
    assert_eq!(
        read_csvs(&m, &alone.params.out_dir),
        read_csvs(k6, &root.path().join("K_6"))
    );
    assert!(sweep(&parent, "K", &[]).is_empty());
}

#[test]
fn file_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("u0.txt");
    let mut text = String::from("# x re im\n");
    for i in 0..=320 {
        let x = -16.0 + 0.1 * i as f64;
        text.push_str(&format!("{x},{},0\n", x.tanh()));
    }
    fs::write(&data, text).unwrap();
    let cfg = format!(
        "scenario = tanh_evolution\ninitial = file:{}\nK = 6\nT = 0.01\nJ = 10\nsnapshots = 0\nout_dir = {}\n",
        data.display(),
        dir.path().join("out").display()
    );
    let m = run_scenario(&parse_config(&cfg).unwrap()).unwrap();
    assert!(m.aborted.is_none());
    assert_eq!(m.params["initial"], format!("file:{}", data.display()));
}

fn cli(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_lognls"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, format!("{body}\nout_dir = {}\n", dir.path().join(name).with_extension("out").display())).unwrap();
        p.to_str().unwrap().to_string()
    };
    let ok = write("ok.cfg", "scenario = tanh_evolution\nK = 6\nT = 0.01\nJ = 10\nsnapshots = 0");
    assert_eq!(cli(&["run", &ok]), 0);
    assert_eq!(cli(&["run", &ok, "--set", "J=20", "--plot"]), 0);
    assert!(dir.path().join("ok.out/tanh_snapshots.svg").exists());

    let coarse = write("coarse.cfg", "scenario = gausson_validate\nK = 6\nJ = 2");
    assert_eq!(cli(&["run", &coarse]), 1);

    let bad = write("bad.cfg", "scenario = cos_probe\ncolour = blue");
    assert_eq!(cli(&["run", &bad]), 2);
    assert_eq!(cli(&["run", &dir.path().join("missing.cfg").display().to_string()]), 2);

    let sweep_cfg = write("sweep.cfg", "scenario = sweep_sobolev\nT = 0.001\nJ = 10");
    assert_eq!(cli(&["sweep", &sweep_cfg, "--axis", "K", "--values", "5,6,7"]), 0);
    assert_eq!(cli(&["figures", &dir.path().join("sweep.out").display().to_string()]), 0);
    assert!(dir.path().join("sweep.out/sobolev_norms.svg").exists());
}

#[test]
fn leaving_the_ball_is_a_numerical_abort() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small(ScenarioKind::PicardCrosscheck, dir.path());
    s.set("K", "7").unwrap();
    s.set("T", "1").unwrap();
    let m = run_scenario(&s).unwrap();
    assert!(m.aborted.as_deref().is_some_and(|a| a.contains("ball")), "{m:?}");
    assert_eq!(lognls::harness::exit_code(&m), 3);
    assert!(dir.path().join(MANIFEST_NAME).exists());
}
