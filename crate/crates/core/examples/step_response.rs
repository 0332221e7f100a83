//! Events of a single pixel after a log-intensity step, and how the count
//! grows with the step size.

use dvscolor::sim::{simulate_pixel_step, DvsPixelParams};

fn main() -> dvscolor::Result<()> {
    let params = DvsPixelParams::new(0.1, 50.0)?;
    for e in simulate_pixel_step(0.0, 0.25, &params, 0.0)? {
        println!("t = {:>6} us  p = {:+}", e.t, e.p.as_i8());
    }

    let fine = DvsPixelParams::new(0.05, 50.0)?;
    println!("\n|dL|  events");
    for m in 1..=10 {
        let dl = m as f64 / 10.0;
        println!("{dl:.1}   {}", simulate_pixel_step(0.0, dl, &fine, 0.0)?.len());
    }
    Ok(())
}
