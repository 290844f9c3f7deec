//! Delta-pulse Rabi rotations on the Dicke ladder: after an instantaneous
//! pulse of area Φ the inversion follows ⟨J_z⟩ = −(N/2)·cos Φ exactly, for
//! any ensemble size.
//!
//! Run with: cargo run -p nucavity --example delta_pulse_rabi

use nucavity::dicke::{apply_delta_pulse, DickeState};

fn main() {
    for n in [1usize, 10, 100] {
        println!("N = {n}");
        for area_pi in [0.25, 0.5, 1.0, 1.5, 2.0] {
            let phi = area_pi * std::f64::consts::PI;
            let state = apply_delta_pulse(&DickeState::ground(n), phi, 0.0);
            let jz = state.expect_jz();
            let expect = -(n as f64 / 2.0) * phi.cos();
            println!(
                "  area={area_pi:.2}π  <Jz>={jz:+.6}  closed form {expect:+.6}  diff {:.2e}",
                (jz - expect).abs()
            );
        }
    }
}
