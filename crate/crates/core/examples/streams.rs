//! Counter-based streams: every (seed, level, outer, inner) slot has its own
//! generator, so draws do not depend on evaluation order.

use nested_mlmc::rng::{replication_seed, PathStream};

fn main() {
    let s = PathStream::new(2024, 1, 7);
    let a: Vec<f64> = {
        let mut r = s.inner_rng(3);
        (0..3).map(|_| r.normal()).collect()
    };
    // Re-creating the slot later gives the same draws.
    let b: Vec<f64> = {
        let mut r = PathStream::new(2024, 1, 7).inner_rng(3);
        (0..3).map(|_| r.normal()).collect()
    };
    assert_eq!(a, b);
    println!("slot (2024, 1, 7, 3): {a:?}");
    println!("outer draw: {:.6}", s.outer_rng().normal());
    for m in 0..3 {
        println!("replication {m} seed {:#018x}", replication_seed(2024, m));
    }
}
