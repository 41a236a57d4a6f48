use indefinite::bounds::compute_mu_star;
use indefinite::config::preset;
use indefinite::shooting::{find_periodic_solutions, verify_solution, SearchConfig};

fn main() -> indefinite::Result<()> {
    let p = preset("cor53")?.problem_spec()?;
    let b = compute_mu_star(&p)?;
    let q = p.with_mu(1.05 * b.mu_star);
    println!("mu* = {:.4e}; solving at mu = {:.4e}", b.mu_star, q.mu);
    let sc = SearchConfig::default().with_r_star(b.r_star);
    for r in find_periodic_solutions(&q, 1, &sc)? {
        let ok = verify_solution(&r, &q, Some(b.r_star)).passed();
        println!("code {}  hump maxima {:?}  verified {ok}", r.code_string(), r.hump_max);
    }
    Ok(())
}
