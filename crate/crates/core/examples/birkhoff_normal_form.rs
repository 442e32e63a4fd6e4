//! Normal-form iteration on a random cubic perturbation.

use std::sync::Arc;

use nekhoroshev::lattice::{BlockPartition, ModeTable};
use nekhoroshev::normalform::{birkhoff_iterate, BirkhoffConfig, HamiltonianSpec};
use nekhoroshev::polyalg::{random_polynomial, RandomPolySpec};
use nekhoroshev::spectrum::FrequencyModel;
use nekhoroshev::stability::{build_ledger, LedgerInputs};
use nekhoroshev::weights::WeightSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nekhoroshev::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = FrequencyModel::conv_nls_random(1, 4, 2.0, &mut rng);
    let table = Arc::new(ModeTable::new(1, 4, 2.0)?);
    let spec = RandomPolySpec {
        degrees: 3..=3,
        support_radius: 4,
        density: 1.0,
        real: true,
        budget: 1_000_000,
    };
    let p = random_polynomial(&table, &spec, 1e-3, &mut rng)?;
    println!("perturbation: {} terms, sup {:.2e}", p.len(), p.sup_coeff());

    let w = WeightSpec::gevrey(0.5, 2.0)?.with_s0(&table)?;
    let ledger = build_ledger(LedgerInputs::from_model(&model, &w, 1.0, 1e-3))?;
    let cfg = BirkhoffConfig {
        n_cut: 3,
        d: 5,
        r: 1e-3,
        partition: BlockPartition::default(),
        weight: w,
        // r = 1e-3 is far above the proven radius
        override_gate: true,
        check_floor: true,
        budget: 1_000_000,
    };
    let out = birkhoff_iterate(
        &HamiltonianSpec {
            model,
            perturbation: p,
        },
        &cfg,
        &ledger,
    )?;

    for t in &out.trace {
        println!(
            "k = {}: P {} terms (sup {:.2e}), G {} terms (sup {:.2e}), Z {} terms, min divisor {:?}",
            t.k, t.p_terms, t.p_sup, t.g_terms, t.g_sup, t.z_terms, t.homological.min_divisor
        );
    }
    let rep = out.to_report();
    println!("Z: {} terms; R_>: {} terms; residual sup {:.2e}", out.z().len(), out.r_high.len(), rep.residual_sup);
    println!("ln gate {:.2}", rep.ln_gate);
    Ok(())
}
