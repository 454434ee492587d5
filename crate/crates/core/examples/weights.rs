//! Richardson-Romberg level weights for a few depths.

use nested_mlmc::weights::compute_weights;

fn main() -> nested_mlmc::Result<()> {
    for alpha in [0.5, 1.0, 2.0] {
        for levels in [2, 3, 5] {
            let t = compute_weights(alpha, levels)?;
            let w: Vec<String> = t.cumulative.iter().map(|v| format!("{v:.6}")).collect();
            println!("alpha {alpha} R {levels}: W = [{}]", w.join(", "));
        }
    }
    Ok(())
}
