//! Prints a few rows of the default noise schedule.

use dpcdvae::schedule::{logistic, ScheduleConfig};

fn main() -> dpcdvae::Result<()> {
    let s = ScheduleConfig::default().build()?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>10}", "t", "alpha", "alpha_bar", "sigma", "sigma'");
    for (t, a, ab, sig, sp) in s.rows().filter(|r| [1, 2, 10, 100, 250, 500, 750, 900, 1000].contains(&r.0)) {
        println!("{t:>5} {a:>12.6e} {ab:>12.6e} {sig:>12.6e} {sp:>10.5}");
    }
    println!("alpha_bar_T - logistic(-10) = {:e}", s.alpha_bar(s.steps()) - logistic(-10.0));
    Ok(())
}
