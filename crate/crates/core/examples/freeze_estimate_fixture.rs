//! Runs the seeded ρ = 0.8 Monte Carlo experiment (100 replicates of n = 10⁵,
//! quantile 16×16) and writes the resulting R̂ range to
//! `tests/fixtures/estimate_gaussian_rho08.json`.

#[path = "../tests/common/mod.rs"]
mod common;

use std::path::Path;

fn main() {
    let mut r = common::monte_carlo_r_hat();
    r.sort_by(f64::total_cmp);
    let json = format!(
        "{{\n  \"seed_base\": {},\n  \"replicates\": {},\n  \"n\": {},\n  \"rho\": {},\n  \"bins\": {},\n  \"q025\": {:?},\n  \"q975\": {:?},\n  \"min\": {:?},\n  \"max\": {:?}\n}}\n",
        common::MC_SEED_BASE,
        common::MC_REPLICATES,
        common::MC_SAMPLES,
        common::MC_RHO,
        common::MC_BINS,
        common::quantile(&r, 0.025),
        common::quantile(&r, 0.975),
        r[0],
        r[r.len() - 1],
    );
    let out = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/estimate_gaussian_rho08.json");
    std::fs::write(&out, &json).expect("write fixture");
    print!("{json}");
}
