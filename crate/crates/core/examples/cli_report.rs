// Running the file-driven front end from code and printing the canonical
// report.

use std::fs;

use sherman_bounds::cli::{run, Command, RunConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("sherman-bounds-example-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let input = dir.join("pair.json");
    fs::write(&input, r#"{"x": [0.2, 0.9, 0.5], "b": [0.4, 0.6], "A": [[0.5, 0.5, 0.0], [0.0, 0.3, 0.7]]}"#)?;

    let mut config = RunConfig::new(Command::Chain, &input);
    config.kernel_name = Some("xlogx".into());
    let report = run(&config)?;
    print!("{}", report.to_json());
    println!("exit code {}", report.exit_code);
    fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
