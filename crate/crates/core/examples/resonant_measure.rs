//! Resonant parameter fractions and the determinant behind them.

use nekhoroshev::measure::{
    frequency_determinant, instance_constant, log_log_slope, resonant_fraction, DiophantineFamily, FractionOptions,
};

fn main() -> nekhoroshev::Result<()> {
    let js = vec![vec![1], vec![2], vec![-3], vec![5]];
    let rep = frequency_determinant(0.75, &js, 1.5)?;
    println!(
        "det: direct {:.6e}, factored {:.6e}, rel diff {:.1e}",
        rep.direct, rep.factored, rep.rel_diff
    );
    println!("instance constant {:.3e}", instance_constant(0.75, &js, 1.5));

    let fam = DiophantineFamily::FractionalMass {
        m1: 1.0,
        m2: 2.0,
        eta: 0.75,
        dim: 1,
    };
    let opts = FractionOptions {
        exponent: Some(1.0),
        ..FractionOptions::default()
    };
    let gammas = [1e-3, 1e-2, 1e-1];
    let mut fr = Vec::new();
    for g in gammas {
        let row = resonant_fraction(&fam, g, 4, 3, 4000, 11, &opts)?;
        println!("gamma = {g:e}: fraction {:.4} [{:.4}, {:.4}]", row.fraction, row.ci_low, row.ci_high);
        fr.push(row.fraction);
    }
    println!("log-log slope {:.3}", log_log_slope(&gammas, &fr));
    Ok(())
}
