mod common;

use common::reduced_full_gap;

#[test]
fn gap_shrinks_with_particle_size() {
    let gaps: Vec<f64> = [1e-2, 10f64.powf(-2.5), 1e-3].iter().map(|&a| reduced_full_gap(a)).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[0] < 0.1, "{gaps:?}");
}
