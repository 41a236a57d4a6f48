//! Positive 2-periodic solutions of u'' + (sin⁺(2πt) - 7 sin⁻(2πt)) g(u) = 0.

use indefinite::config::preset;
use indefinite::shooting::{find_periodic_solutions, SearchConfig};

fn main() -> indefinite::Result<()> {
    let p = preset("fig2")?.problem_spec()?;
    let recs = find_periodic_solutions(&p, 2, &SearchConfig::default())?;
    for r in &recs {
        println!(
            "code {}  (u, u')(0) = ({:.8}, {:.8})  minimal period {}T  residual {:.1e}",
            r.code_string(),
            r.initial[0],
            r.initial[1],
            r.min_period_multiple,
            r.residual
        );
    }
    if let Some(r) = recs.iter().find(|r| r.code_string() == "01") {
        print!("{}", r.trajectory.to_csv(21));
    }
    Ok(())
}
