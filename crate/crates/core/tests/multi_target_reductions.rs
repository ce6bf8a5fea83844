mod common;

use common::{cmat, rng};
use jamcraft_core::multi_target::{
    bc_rate, bc_solve, ic_solve, mac_reduce, tdm_solve_grid, tdm_solve_joint, BcReceiver, BcScenario,
    IcLink, IcScenario, MacLink, MacScenario, TdmPair, TdmScenario,
};
use jamcraft_core::spectral::{solve_single, Fallback};
use jamcraft_core::{Hermitian, SpcaOptions};

#[test]
fn mac_reduction_feeds_the_single_link_solver() {
    let mut r = rng(401);
    let links = (0..2)
        .map(|_| MacLink { h: cmat(&mut r, 3, 2), q: Hermitian::identity(2) })
        .collect();
    let mac = MacScenario::new(links, cmat(&mut r, 3, 4), 1.0, 2.0).unwrap();
    let sc = mac_reduce(&mac).unwrap();
    let sol = solve_single(&sc, Fallback::Spca, &SpcaOptions::default()).unwrap();
    let direct = jamcraft_core::multi_target::mac_rate(&mac, &sol.q_z).unwrap();
    assert!((sol.rate - direct).abs() < 1e-10);
}

#[test]
fn broadcast_jamming_gap_grows_with_budget() {
    let mut r = rng(402);
    let receivers = [3, 4, 4]
        .iter()
        .zip([0.5, 0.5, 1.0])
        .map(|(&n, s)| BcReceiver { h: cmat(&mut r, n, 4), h_z: cmat(&mut r, n, 4), noise_power: s })
        .collect::<Vec<_>>();
    let mut last = f64::INFINITY;
    for p_z in [0.0, 1.0, 4.0, 16.0] {
        let bc = BcScenario::new(Hermitian::identity(4), receivers.clone(), p_z).unwrap();
        let sol = bc_solve(&bc, &SpcaOptions::default()).unwrap();
        assert!(sol.diagnostics.converged);
        assert!(sol.rate <= last + 1e-9);
        assert!(sol.rate <= bc_rate(&bc, &Hermitian::zeros(4)).unwrap() + 1e-10);
        last = sol.rate;
    }
}

#[test]
fn tdm_grid_and_joint_agree_on_random_instances() {
    let mut r = rng(403);
    let opts = SpcaOptions::default();
    for _ in 0..3 {
        let pairs = vec![
            TdmPair { h: cmat(&mut r, 2, 2), q: Hermitian::identity(2), h_z: cmat(&mut r, 2, 2), noise_power: 1.0, beta: 0.5 },
            TdmPair { h: cmat(&mut r, 2, 2), q: Hermitian::identity(2), h_z: cmat(&mut r, 2, 2), noise_power: 1.0, beta: 0.5 },
        ];
        let tdm = TdmScenario::new(pairs, 2.0).unwrap();
        let grid = tdm_solve_grid(&tdm, 200, &opts).unwrap();
        let joint = tdm_solve_joint(&tdm, &opts).unwrap();
        assert!(joint.sum_rate <= grid.sum_rate + 1e-6);
        assert!(grid.sum_rate - joint.sum_rate < 1e-3);
    }
}

#[test]
fn interference_solver_descends_monotonically() {
    let mut r = rng(404);
    let links = (0..2)
        .map(|_| IcLink { h: cmat(&mut r, 2, 2), q: Hermitian::identity(2), h_z: cmat(&mut r, 2, 3), noise_power: 1.0 })
        .collect();
    let ic = IcScenario::new(links, vec![], 1.0).unwrap();
    let sol = ic_solve(&ic, &SpcaOptions::default()).unwrap();
    assert!(sol.diagnostics.converged);
    assert!(sol.q_z.trace() <= 1.0 + 1e-8);
}
