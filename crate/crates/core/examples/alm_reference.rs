//! Closed-form oracles of the life-insurance model and a few points of the
//! loss function `psi(x) = psi_0 - OF_1(x)`.

use nested_mlmc::alm::AlmModel;

fn main() -> nested_mlmc::Result<()> {
    let model = AlmModel::reference();
    let o = model.oracles();
    println!("z       = {:.15}", o.z);
    println!("OF_0    = {:.10}", o.psi0);
    println!("x1, x2  = {:.10}, {:.10}", o.x1, o.x2);
    println!("monotone loss on [x1, inf): {}", o.certificate);
    println!("q99.5   = {:.6}", model.scr_reference(0.005)?);

    println!("\n{:>10} {:>14}", "S_1", "loss");
    for x in [60.0, 80.0, 100.0, 120.0, 140.0] {
        println!("{x:>10.1} {:>14.6}", model.psi_loss(x)?);
    }

    // The loss CDF inverts the quantile.
    let q = model.scr_reference(0.005)?;
    println!("\nP(L <= q99.5) = {:.6}", model.loss_cdf(q)?);
    Ok(())
}
