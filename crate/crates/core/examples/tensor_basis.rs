//! Ordered tensor-basis elements and the counts derived from them.

use holgrim::combinatorics::{beta, dim_d, enum_ordered, q_count, JetLayout};

fn main() -> holgrim::error::Result<()> {
    let d = 3;
    for j in 0..=2 {
        let basis = enum_ordered(d, j);
        let shown: Vec<String> = basis.iter().map(|m| format!("{m}x{}", m.multiplicity())).collect();
        println!("order {j}: beta = {} -> {}", beta(d, j)?, shown.join(" "));
    }
    println!("D({d}, 2) = {}", dim_d(d, 2)?);
    // support bound after matching order <= 1 at 5 points of a scalar function
    println!("Q(5, 1, {d}, 1) = {}", q_count(5, 1, d, 1)?);

    let layout = JetLayout::new(d, 2, 2)?;
    println!("values per point with c = 2, k = 2: {}", layout.point_block());
    for slot in [0, 1, 2, 7, layout.point_block() - 1] {
        let (order, rank, coord) = layout.decode(slot);
        println!("  slot {slot:>2}: order {order}, basis {}, coordinate {}", layout.basis(order)[rank], coord + 1);
    }
    Ok(())
}
