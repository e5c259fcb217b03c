mod common;

use common::{blade_oracle, max_rel_error, random_hrr_case, ORACLE_CELLS};
use udar::propeller::propeller_returns;

#[test]
fn closed_form_matches_brute_force_blade() {
    for seed in 0..6 {
        let case = random_hrr_case(1000 + seed);
        let closed = propeller_returns(&case.params, &case.symbols, &case.cfg).unwrap();
        let oracle = blade_oracle(&case.params, &case.symbols, &case.cfg, ORACLE_CELLS);
        let err = max_rel_error(&closed.values, &oracle);
        assert!(err <= 1e-6, "seed {seed}: N={} M={} span={:.2} err={err:.3e}", case.cfg.n_subcarriers, case.cfg.n_symbols, case.span_bins);
    }
}

#[test]
fn oracle_converges_with_cell_count() {
    let case = random_hrr_case(7);
    let closed = propeller_returns(&case.params, &case.symbols, &case.cfg).unwrap();
    let coarse = max_rel_error(&closed.values, &blade_oracle(&case.params, &case.symbols, &case.cfg, 100));
    let fine = max_rel_error(&closed.values, &blade_oracle(&case.params, &case.symbols, &case.cfg, 1000));
    assert!(fine < coarse || fine < 1e-12, "{coarse:.3e} {fine:.3e}");
}
