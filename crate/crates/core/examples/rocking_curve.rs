//! Grazing-incidence reflectivity of a thin-film cavity: the rocking curve
//! of a Pt/C/⁵⁷Fe/C/Pt stack shows the guided modes as sharp dips between
//! the carbon and platinum critical angles.
//!
//! Run with: cargo run -p nucavity --example rocking_curve

use nucavity::data::bundled_materials;
use nucavity::reflectivity::{find_mode_angles, rocking_curve, Layer, LayerStack};

fn main() -> nucavity::Result<()> {
    let e = 14.4125; // keV
    let m = bundled_materials();
    let pt = m.lookup("Pt", e)?;
    let c = m.lookup("C", e)?;
    let fe = m.lookup("Fe", e)?;
    let stack = LayerStack::new(
        vec![
            Layer::new("Pt", 2.6, pt.delta, pt.beta),
            Layer::new("C", 7.9, c.delta, c.beta),
            Layer::new("Fe", 1.5, fe.delta, fe.beta),
            Layer::new("C", 9.3, c.delta, c.beta),
            Layer::substrate("Pt", pt.delta, pt.beta),
        ],
        e,
    )?;

    let theta: Vec<f64> = (0..3000).map(|i| 1e-4 + i as f64 * 2.5e-6).collect();
    let curve = rocking_curve(&stack, &theta)?;
    let modes = find_mode_angles(&theta, &curve, 0.02)?;
    println!("critical angles: C {:.3} mrad, Pt {:.3} mrad",
        (2.0 * c.delta).sqrt() * 1e3,
        (2.0 * pt.delta).sqrt() * 1e3);
    for (k, th) in modes.iter().enumerate() {
        println!("guided mode {k}: theta = {:.4} mrad", th * 1e3);
    }
    Ok(())
}
