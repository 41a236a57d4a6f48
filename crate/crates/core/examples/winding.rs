use indefinite::config::preset;
use indefinite::shooting::{circle, find_periodic_solutions, rectangle, winding_number, SearchConfig};

fn main() -> indefinite::Result<()> {
    let p = preset("fig2")?.problem_spec()?;
    let recs = find_periodic_solutions(&p, 1, &SearchConfig::default())?;
    for r in &recs {
        let w = winding_number(&p, 1, &circle(r.initial, 0.01, 32), 1e-12)?;
        println!("fixed point {:?}: index {w}", r.initial);
    }
    let box_all = rectangle([0.02, -1.0], [0.6, 1.5], 24);
    println!("box [0.02, 0.6] x [-1, 1.5]: {}", winding_number(&p, 1, &box_all, 1e-12)?);
    println!("far circle: {}", winding_number(&p, 1, &circle([3.0, 0.0], 0.5, 24), 1e-12)?);
    Ok(())
}
