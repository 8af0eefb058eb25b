use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modeswitch")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn simulate_both_orders() {
    let out = run(&["simulate", "--jobs", "4,6", "--speeds", "1,2", "--order", "1,2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("makespan: 4\n"));
    let out = run(&["simulate", "--jobs", "4,6", "--speeds", "2,1", "--order", "2,1"]);
    assert!(stdout(&out).contains("makespan: 7/2 (3.500000)"));
}

#[test]
fn simulate_writes_segments() {
    let out = run(&["simulate", "--jobs", "4,6", "--speeds", "1,2", "--segments", "-"]);
    let text = stdout(&out);
    assert!(text.contains("job,cpu,start,end\n"));
    assert!(text.contains("1,2,0.000000,2.000000"));
}

#[test]
fn identical_fjp_bound() {
    let out = run(&["bounds", "--flavor", "ident-fjp", "--jobs", "20,40,40,60", "--m", "2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("makespan: 110\n"));
}

#[test]
fn uniform_bounds_and_naive_warning() {
    let out = run(&["bounds", "--flavor", "unif-fjp", "--jobs", "50,80,99", "--speeds", "1,2,10", "--exact"]);
    assert!(stdout(&out).contains("ms1: 2667/130\n"));
    let out = run(&["bounds", "--flavor", "unif-fjp-naive", "--jobs", "50,80,99", "--speeds", "1,2,10"]);
    assert!(stdout(&out).contains("not an upper bound"));
    let out = run(&["bounds", "--flavor", "unif-ftp", "--jobs", "4,6", "--speeds", "1,2", "--csv"]);
    assert_eq!(stdout(&out), "order: J1 > J2\nk,maxidle\n1,2\n2,4\n");
}

#[test]
fn identical_flavor_rejects_uniform_platform() {
    let out = run(&["bounds", "--flavor", "ident-fjp", "--jobs", "1,2", "--speeds", "1,2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bounds_from_application_file() {
    let app = fixture("two_modes.json");
    let out = run(&["bounds", "--flavor", "ident-ftp", "--app", &app, "--mode", "1"]);
    assert!(stdout(&out).contains("maxidle: 60, 100\n"));
}

#[test]
fn validity_table_and_exit_codes() {
    let out = run(&["validity", "--app", &fixture("two_modes.json")]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("SM-MSO: valid"));
    assert!(text.contains("60 60 100"));

    let out = run(&["validity", "--app", &fixture("tight_deadline.json"), "--protocol", "sm-mso", "--csv"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("SM-MSO,1,2,identical-ftp,100,2,99,-1,invalid"));

    let out = run(&["validity", "--app", &fixture("tight_deadline.json"), "--protocol", "am-mso"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn oracle_exhaustive_and_refusal() {
    let out = run(&["oracle", "--jobs", "50,80,99", "--speeds", "1,2,10"]);
    assert!(stdout(&out).contains("max makespan: 20 via J1 > J2 > J3"));
    let out = run(&["oracle", "--jobs", "4,4,16,22", "--speeds", "1,2"]);
    assert!(stdout(&out).contains("max makespan: 19 via J3 > J1 > J2 > J4"));
    let out = run(&["oracle", "--jobs", "1,2,3,4,5,6,7,8,9", "--m", "2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("use sampling"));
    let out = run(&["oracle", "--jobs", "1,2,3,4,5,6,7,8,9", "--m", "2", "--samples", "20", "--seed", "3"]);
    assert!(stdout(&out).contains("lower bounds"));
}

#[test]
fn oracle_csv_lists_every_assignment() {
    let out = run(&["oracle", "--jobs", "4,6", "--speeds", "1,2", "--csv"]);
    assert_eq!(stdout(&out), "rank,assignment,makespan\n0,1>2,4\n1,2>1,3.500000\n");
}

#[test]
fn transition_from_rem_jobs() {
    let scenario = fixture("rem_jobs_scenario.json");
    let out = run(&["transition", "--scenario", &scenario, "--protocol", "am-mso"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("task 1 enabled at 180 (+50)"));
    assert!(text.contains("task 3 enabled at 220 (+90)"));
    let out = run(&["transition", "--scenario", &scenario, "--segments", "-"]);
    let text = stdout(&out);
    assert!(text.contains("end: 220 (length 90)"));
    assert!(text.contains("mode,task,job,kind,cpu,start,end\n1,2,1,rem,1,130.000000,140.000000\n"));
}

#[test]
fn transition_end_to_end() {
    let out = run(&["transition", "--scenario", &fixture("end_to_end.json")]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("phase: steady mode 1 from 0 to 130"));
    assert!(text.contains("phase: transition 1 -> 2 from 130 to 220"));
    assert!(text.contains("steady-state deadline misses: 0"));
}

#[test]
fn experiment_single_platform() {
    let out = run(&["experiment", "--jobs", "50,80,99", "--levels", "1,2,10", "--m", "1"]);
    assert_eq!(code(&out), 0);
    let out = run(&["experiment", "--jobs", "50,80,99", "--levels", "10", "--m", "3", "--exact"]);
    assert!(stdout(&out).contains("10;10;10,2,"));
}

#[test]
fn experiment_config_file_round_trips() {
    let dir = std::env::temp_dir().join(format!("modeswitch-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("experiment.json");
    std::fs::write(
        &config,
        r#"{"jobs": [50, 80, 99], "grid": {"levels": [1, 2, 10], "m": 3}, "oracle": "exhaustive", "limit_n": 8, "seed": 0}"#,
    )
    .unwrap();
    let rows = dir.join("rows.csv");
    let out = run(&["experiment", "--config", config.to_str().unwrap(), "--out", rows.to_str().unwrap(), "--exact"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&rows).unwrap();
    assert!(text.contains("1;2;10,1/2,67/26,"), "{text}");
    assert!(stdout(&out).starts_with("column,min,q1,median,mean,q3,max,variance,sd,bias,mse\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["simulate", "--jobs", "1,2"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["simulate", "--jobs", "1,x", "--m", "2"])), 2);
}
