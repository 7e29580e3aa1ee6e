//! Writes the default configuration for a family, edits it, and loads it
//! back.
//!
//! ```text
//! cargo run --example config_roundtrip -- dv
//! ```

use qkd_epsilon::budget::Family;
use qkd_epsilon::harness::{load_config, SweepSpec};

fn main() -> qkd_epsilon::Result<()> {
    let family: Family = std::env::args()
        .nth(1)
        .map_or(Family::Cv, |s| s.parse().expect("cv or dv"));

    let text = SweepSpec::defaults(family).to_toml()?;
    println!("{text}");

    let dir = std::env::temp_dir().join(format!("qkd-eps-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("config.toml");
    std::fs::write(&path, text.replace("seed = 1", "seed = 99")).expect("write config");

    let spec = load_config(&path)?;
    println!(
        "reloaded {}: seed = {}, {} levels",
        path.display(),
        spec.cga_config.seed,
        spec.eps_levels.len()
    );

    std::fs::write(
        &path,
        "family = \"cv\"\n[protocol]\npe_ratio = 1.5\nsignal_variance = 0.5\n",
    )
    .expect("write config");
    match load_config(&path) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
