//! Mode tables, block shells and weighted norms.

use std::sync::Arc;

use nekhoroshev::lattice::{BlockPartition, ModeIndex, ModeTable, MultiIndex};
use nekhoroshev::weights::{check_a0, sample_sphere_seeded, WeightSpec};

fn main() -> nekhoroshev::Result<()> {
    let table = Arc::new(ModeTable::new(2, 4, 2.0)?);
    println!("modes with |j| <= 4 in 2d: {}", table.len());

    let m = MultiIndex::new(vec![
        ModeIndex::plus(&[1, 0]),
        ModeIndex::plus(&[0, 2]),
        ModeIndex::minus(&[1, 2]),
    ])?;
    println!("{m}: momentum {:?}, conserving = {}", m.momentum(), m.conserves_momentum());
    println!("high entries beyond N = 1: {}", m.high_count(1));

    let part = BlockPartition::new(1.0, 1.0)?;
    for r in [1.0, 3.5, 12.0, 40.0] {
        println!("radius {r:>5}: block {}", part.block_of_radius(r));
    }

    let gev = WeightSpec::gevrey(0.5, 2.0)?.with_s0(&table)?;
    let ult = WeightSpec::log_ultra(2.0, 2.0, 2.0)?.with_s0(&table)?;
    for (name, w) in [("gevrey", &gev), ("log-ultra", &ult)] {
        let a0 = check_a0(w, 2.0, 6, 2000, 1)?;
        println!("{name}: Cf = {:.4}, s0 = {:.4}, A.0 passed = {}, worst margin {:.3e}", w.cf, w.s0, a0.passed, a0.worst_margin);
    }

    // the tail estimate needs s > s0
    let w = gev.clone().with_scale(gev.s0 + 1.0);
    let support: Vec<u32> = (0..table.len() as u32).collect();
    let u = sample_sphere_seeded(&table, &w, 1e-2, &support, true, 3)?;
    let n = 2;
    let tail = u.high_part(n).norm_s(&w, w.s0);
    let bound = u.norm_s(&w, w.s) * (-(w.s - w.s0) * w.f(n as f64)).exp();
    println!("||u||_s = {:.3e}, real = {}", u.norm_s(&w, w.s), u.is_real(1e-15));
    println!("||u_high||_s0 = {tail:.3e} <= {bound:.3e}");
    Ok(())
}
