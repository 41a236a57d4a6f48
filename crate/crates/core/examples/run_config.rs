use indefinite::config::RunConfig;
use indefinite::report::{run, Command};

const CONFIG: &str = r#"
preset = "fig2"

[problem]
mu = 9.0
k = 2

[search]
u_count = 16
y_count = 12
"#;

fn main() -> indefinite::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    println!("{}", cfg.to_toml()?);
    let out = run(&Command::Solve, &cfg)?;
    for s in out.json["result"]["solutions"].as_array().into_iter().flatten() {
        println!("{} {}", s["code"], s["initial"]);
    }
    Ok(())
}
