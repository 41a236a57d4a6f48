use indefinite::bounds::compute_mu_star;
use indefinite::config::preset;

fn main() -> indefinite::Result<()> {
    let p = preset("fig2")?.problem_spec()?;
    let b = compute_mu_star(&p)?;
    println!("K0 = {:.6}, r = {}, eta(r) = {:.6}", b.k0, b.r, b.eta_r);
    println!("mu# = {:.6}, mu_r = {:.6}", b.mu_sharp, b.mu_r);
    println!("delta+ = {:?}, delta- = {:?}", b.delta_plus, b.delta_minus);
    println!("gamma = {:.6e}, R* = {:.4} (estimated: {})", b.gamma_big, b.r_star, b.r_star_estimated);
    println!("mu* = {:.4e} (sufficient, not necessary; the figure uses mu = {})", b.mu_star, p.mu);
    println!("invariant violations: {:?}", b.violations());
    Ok(())
}
