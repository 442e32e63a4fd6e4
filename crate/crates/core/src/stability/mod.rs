//! Constants ledger, the balancing equation between degree and cutoff, the
//! `W_{-1}` branch of Lambert's function, and predicted stability times.

mod balance;
mod lambert;
mod ledger;

pub use balance::{
    gevrey_closed_form_ln_n, gevrey_exponent, gevrey_order_ratio, log_ultra_a_max, log_ultra_exponent,
    log_ultra_sandwich, power_ratio, predict_time, predict_time_ln, solve_balance, solve_balance_kind, BalanceSolution,
    PredictOptions, Regime, StabilityPrediction,
};
pub use lambert::lambert_w_minus1;
pub use ledger::{build_ledger, ConstantsLedger, LedgerInputs};
