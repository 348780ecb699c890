use std::process::{Command, Output};

fn fklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fklab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("fklab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn time_zero_variance_expansion() {
    let o = fklab(&["expand", "--n", "0", "--q", "2", "--f=1,-1", "-N", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "quantity,index,value\nderivative,0,0\nderivative,1,1\nexact,4,1/4\nseries,4,1/4\n");
}

#[test]
fn enumerate_and_count_agree() {
    let o = fklab(&["enumerate-forests", "--n", "1", "--q", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut total = 0u64;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        total += cols[1].parse::<u64>().unwrap();
        let c = fklab(&["count-jungles", "--forest", cols[0]]);
        assert_eq!(stdout(&c).lines().nth(1).unwrap(), format!("{},{},{}", cols[0], cols[1], cols[2]));
    }
    assert_eq!(total, 16);
}

#[test]
fn simulate_is_byte_identical() {
    let args = ["simulate", "--model", "REF2b", "-N", "7", "--n", "3", "--runs", "25", "--seed", "42"];
    let a = fklab(&args);
    let b = fklab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = fklab(&["simulate", "--model", "REF2b", "-N", "7", "--n", "3", "--runs", "25", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
    let single = Command::new(env!("CARGO_BIN_EXE_fklab")).args(args).env("FKLAB_THREADS", "1").output().unwrap();
    assert_eq!(single.stdout, a.stdout);
}

#[test]
fn floats_carry_seventeen_digits() {
    let o = fklab(&["simulate", "-N", "5", "--n", "1", "--runs", "2"]);
    let value = stdout(&o).lines().nth(1).unwrap().split(',').nth(2).unwrap().to_string();
    let mantissa = value.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{value}");
}

#[test]
fn config_file_with_flag_override() {
    let cfg = scratch("cfg.json");
    std::fs::write(&cfg, r#"{"command":"hilbert","n":1,"degree":2,"coalescent":true}"#).unwrap();
    let o = fklab(&["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("x0,x1,y0,count\n"));
    let o = fklab(&["--config", cfg.to_str().unwrap(), "--coalescent", "false"]);
    assert!(stdout(&o).starts_with("x0,x1,count\n"));
}

#[test]
fn inputs_are_left_untouched() {
    let model = scratch("model.json");
    let text = fklab::fixtures::ref2b().to_json_string();
    std::fs::write(&model, &text).unwrap();
    let out = scratch("out.csv");
    let o = fklab(&["expand", "--model", model.to_str().unwrap(), "--n", "1", "--q", "2", "--f=1,0,-1", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&model).unwrap(), text);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("quantity,index,value\n"));
}

#[test]
fn json_output() {
    let o = fklab(&["count-jungles", "--forest", "(())", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["jungles"], "1");
}

#[test]
fn verify_reports_and_passes() {
    let o = fklab(&["verify", "--suite", "combinatorics"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("criterion,title,check,passed,value\n"));
    assert!(text.contains("1,orbit-sum identity,q=4 n=1,true,65536"));
    let o = fklab(&["verify", "--suite", "montecarlo", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["criteria"][0]["checks"][0]["value"].as_str().unwrap().starts_with("z="));
}

#[test]
fn exit_codes() {
    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"levels":[2],"eta0":["1/2","1/2"],"kernels":[],"potentials":[["0/1","1"]]}"#).unwrap();
    let code = |o: Output| o.status.code();
    assert_eq!(code(fklab(&["expand", "--model", bad.to_str().unwrap(), "--n", "0", "--q", "1", "--f=1,1"])), Some(2));
    assert_eq!(code(fklab(&["verify", "--suite", "nope"])), Some(2));
    assert_eq!(code(fklab(&["expand", "--n", "0", "--q", "2", "--f=1/0,1"])), Some(2));
    assert_eq!(code(fklab(&["expand", "--q", "2", "--f=1,1"])), Some(2));
    assert_eq!(code(fklab(&["enumerate-forests", "--n", "12", "--q", "12"])), Some(3));
    let threads = Command::new(env!("CARGO_BIN_EXE_fklab")).args(["count-jungles", "--forest", "()"]).env("FKLAB_THREADS", "zero").output().unwrap();
    assert_eq!(threads.status.code(), Some(2));
}
