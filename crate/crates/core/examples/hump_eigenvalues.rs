use indefinite::config::preset;
use indefinite::eigen::hump_eigenvalues;

fn main() -> indefinite::Result<()> {
    for name in ["fig1", "fig2", "cor53", "cor51"] {
        let p = preset(name)?.problem_spec()?;
        for h in hump_eigenvalues(&p)? {
            println!(
                "{name:6} hump {} on [{:.4}, {:.4}] ({:?}/{:?}): lambda_1 = {:.10}",
                h.hump, h.alpha, h.beta, h.left, h.right, h.lambda1
            );
        }
    }
    Ok(())
}
