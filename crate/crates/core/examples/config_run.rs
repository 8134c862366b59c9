//! Drive a run from a TOML configuration, the way the `sdns` binary does,
//! and show the resolved configuration written next to the outputs.

use sdns::cli_io::{cmd_simulate, RunConfig, RunOptions};

const CONFIG: &str = r#"
seed = 5

[grid]
d = 2
n = 16

[solver]
t_end = 2.0
snapshot_every = 100

[noise]
g = 0.4
psi = "tanh"

[initial]
l2 = 1.0
"#;

fn main() -> sdns::Result<()> {
    let dir = std::env::temp_dir().join("sdns-config-run");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("run.toml");
    std::fs::write(&path, CONFIG)?;
    let resolved = RunConfig::load(&path)?.resolve()?;
    println!("digest {}", resolved.digest());
    let outcome = cmd_simulate(&RunOptions {
        config: Some(path),
        out: Some(dir.join("out")),
        ..RunOptions::default()
    })?;
    println!("{}", outcome.summary);
    for entry in std::fs::read_dir(&outcome.out_dir)? {
        println!("  {}", entry?.path().display());
    }
    Ok(())
}
