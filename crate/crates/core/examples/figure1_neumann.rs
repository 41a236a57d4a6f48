//! Three positive Neumann solutions of the two-hump example on [0, 1].

use indefinite::config::preset;
use indefinite::integrator::Tolerances;
use indefinite::shooting::{find_neumann_solutions, poincare_axis_crossings, SearchConfig};

fn main() -> indefinite::Result<()> {
    let p = preset("fig1")?.problem_spec()?;
    for r in find_neumann_solutions(&p, &SearchConfig::default())? {
        println!(
            "code {}  u(0) = {:.10}  |u'(1)| = {:.1e}  max u = {:.6}",
            r.code_string(),
            r.initial[0],
            r.trajectory.end_state()[1].abs(),
            r.sup_norm
        );
    }
    let n = poincare_axis_crossings(&p, 0.0, 0.2, 400, &Tolerances::default());
    println!("image of u0 in [0, 0.2] crosses the u axis {n} times");
    Ok(())
}
