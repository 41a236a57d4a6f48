use indefinite::config::preset;
use indefinite::integrator::Tolerances;
use indefinite::radial::{check_q_integral, equivalence_gap, find_radial_solutions};

fn main() -> indefinite::Result<()> {
    let cfg = preset("annulus")?;
    let ap = cfg.annulus_problem()?;
    println!("N = {}, [{}, {}] maps to [0, {:.6}]", ap.dim, ap.r1, ap.r2, ap.t_end());
    println!("integral of q_mu over the annulus (per unit sphere area): {:.4e}", check_q_integral(&ap));
    for pr in find_radial_solutions(&ap, &cfg.search_config()?, 9)? {
        let u0 = pr.record.initial[0];
        let gap = match equivalence_gap(&ap, u0, &Tolerances::with_tol(1e-12, 1e-14)) {
            Ok(g) => format!("{g:.1e}"),
            Err(e) => format!("direct integration failed ({e})"),
        };
        let u: Vec<String> = pr.profile.iter().map(|(_, u)| format!("{u:.3}")).collect();
        println!("code {}: U = {}", pr.record.code_string(), u.join(" "));
        println!("  direct radial vs reduced 1D from U(R1) = {u0:.6}: {gap}");
    }
    Ok(())
}
