use indefinite::bounds::compute_mu_star;
use indefinite::config::preset;
use indefinite::lyndon::witt_count;
use indefinite::shooting::SearchConfig;
use indefinite::subharmonic::class_table;

fn main() -> indefinite::Result<()> {
    let p = preset("fig2")?.problem_spec()?;
    let b = compute_mu_star(&p)?;
    let q = p.with_mu(1.1 * b.mu_star);
    let sc = SearchConfig::default().with_r_star(b.r_star);
    for k in 2..=4 {
        println!("k = {k}: {} classes", witt_count(2, k as u64));
        for e in class_table(&q, k, &sc)? {
            println!("  {}  found {}  minimal period {:?}", e.target, e.found, e.min_period_multiple);
        }
    }
    Ok(())
}
