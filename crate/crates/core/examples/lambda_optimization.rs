//! The cone slope 2 sqrt(h0 h1 K) gamma e^{lambda/xi} / lambda is smallest
//! at lambda = xi, where it equals v_LR.

use lrlab::bounds::{lr_velocity, optimize_lambda};
use lrlab::constants::BoundConstants;

fn main() -> lrlab::Result<()> {
    for r in 1..=4 {
        let c = BoundConstants::from_parts(1.0, 1.0, 2.0, 4.0, 2, r, None)?;
        let (l, v) = optimize_lambda(&c)?;
        println!("R = {r}: xi = {:.6}, lambda* = {l:.9}, v_min = {v:.6}, v_LR = {:.6}", c.xi, lr_velocity(&c));
    }
    Ok(())
}
