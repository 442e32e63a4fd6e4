//! Divisors, minimum-denominator scans and the divisor floor.

use std::sync::Arc;

use nekhoroshev::lattice::{BlockPartition, ModeTable, MultiIndex};
use nekhoroshev::normalform::classify;
use nekhoroshev::spectrum::{min_denominator, verify_a2_bound, FrequencyModel, ScanConfig};
use nekhoroshev::stability::{build_ledger, LedgerInputs};
use nekhoroshev::weights::WeightSpec;

fn main() -> nekhoroshev::Result<()> {
    let model = FrequencyModel::conv_nls_free(1);
    let table = Arc::new(ModeTable::new(1, 4, 2.0)?);
    let part = BlockPartition::default();

    for pairs in [
        vec![(1, 1), (2, 1), (3, -1)],
        vec![(1, 1), (1, -1), (2, 1), (2, -1)],
        vec![(1, 1), (3, 1), (4, -1)],
    ] {
        let m = MultiIndex::from_pairs_1d(&pairs)?;
        let ids = table.ids_of(&m)?;
        println!(
            "{m}: divisor {:>5}, class {:?}",
            model.divisor(&table, &ids),
            classify(&m, &model, 3, &part)?
        );
    }

    let scan = min_denominator(&model, &ScanConfig::low(4, 4))?;
    println!(
        "min divisor {} at {:?} ({} scanned, {} unpaired zeros)",
        scan.min_value, scan.witness, scan.scanned, scan.unpaired_zeros
    );

    let w = WeightSpec::gevrey(0.5, 2.0)?.with_s0(&table)?;
    let ledger = build_ledger(LedgerInputs::from_model(&model, &w, 1.0, 1.0))?;
    let rep = verify_a2_bound(&model, 4, 4, ledger.c_deno, ledger.c_exp)?;
    for r in &rep.rows {
        println!("d = {}: min {:.3}, ln floor {:.2}, ln margin {:.2}", r.d, r.min_value, r.ln_floor, r.ln_margin);
    }
    println!("floor holds: {}", rep.passed);
    Ok(())
}
