//! Print the compound-scaling configuration for every coefficient.
//!
//! Run with: `cargo run --example compound_scaling`

use roadtk::scaling::{compound_config, MAX_PHI};

fn main() -> roadtk::Result<()> {
    println!(
        "{:<6} {:>10} {:>9} {:>11} {:>7} {:>6} {:>9}",
        "model", "resolution", "w_bifpn", "w_rounded", "d_bifpn", "d_head", "backbone"
    );
    for phi in 0..=MAX_PHI {
        let c = compound_config(phi)?;
        let resolution = if c.input_resolution == c.formula_resolution {
            format!("{}", c.input_resolution)
        } else {
            format!("{}*", c.input_resolution) // exception-table override
        };
        println!(
            "{:<6} {:>10} {:>9.2} {:>11} {:>7} {:>6} {:>9}",
            c.model_name(),
            resolution,
            c.bifpn_width_raw,
            c.bifpn_width_rounded,
            c.bifpn_depth,
            c.head_depth,
            c.backbone_name()
        );
    }
    println!(
        "\n* published value; the resolution formula gives {}",
        compound_config(7)?.formula_resolution
    );
    Ok(())
}
