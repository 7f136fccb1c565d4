// Running a subcommand from a TOML config, as the binary does.
use rieszlab::cli::{execute, Command, Common};
use rieszlab::config::ExperimentConfig;

const CONFIG: &str = r#"
id = "example"
s = 1.5

[grid]
L = 2.0
n = 64

[measure]
kind = "cantor"
g = 3
kappa = 8.0
mass = 1.0

[params]
N = 2
epsilon = 0.01
M = 6.0
delta = 1e-6
H = 1.0
m = 0.5
r_star = 0.05
rho_star = 0.1
A_max = 8.0
"#;

/// Names of the written artifacts and whether every check passed.
pub fn run_example() -> (Vec<String>, bool) {
    let mut cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    cfg.out = std::env::temp_dir().join(format!("rieszlab-example-{}", std::process::id()));
    let common = Common { config: "inline".into(), out: None, seed: None };
    let out = execute(&Command::Claims(common), &cfg).unwrap();
    let mut files: Vec<String> = std::fs::read_dir(&cfg.out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    files.sort();
    std::fs::remove_dir_all(&cfg.out).unwrap();
    (files, out.pass())
}

fn main() {
    let (files, pass) = run_example();
    println!("wrote {files:?}, all checks passed: {pass}");
}
