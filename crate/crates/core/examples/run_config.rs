//! Drive a scenario from a TOML file, as the `zeromode run` command does.

use zeromode::scenario::{run, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("zeromode-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("chain.toml");
    std::fs::write(
        &path,
        format!(
            "scenario = \"chain-harmonic\"\noutput = {:?}\n\n[parameters]\nn = 16\nomega_sq = 1.5\nkappa = 0.5\n\n[time_grid]\nstart = 0\nstop = 20\ncount = 41\n",
            dir.display().to_string()
        ),
    )?;
    let config = RunConfig::from_file(&path)?;
    let report = run(&config)?;
    println!("wrote {} and {}", report.csv.display(), report.summary_path.display());
    println!("{}", serde_json::to_string_pretty(&report.summary["results"])?);
    Ok(())
}
