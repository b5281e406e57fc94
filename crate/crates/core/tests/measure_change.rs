//! Change-of-measure consistency between P-simulation with kernel weights and
//! direct Q-simulation.

mod common;

use common::reference_model;
use jdemm::measure::step_kernel;
use jdemm::oracle::{expect_q_return, expect_step_kernel, GridSpec};
use jdemm::scenario::random_model;
use jdemm::sim::Simulator;
use jdemm::stats::MeanEstimate;
use jdemm::{drift, risk_neutralize, DriftMode, JumpKind, Region, SeedSpec, StepOutcome};

const N: usize = 400_000;

type Statistic = (&'static str, fn(&StepOutcome) -> f64);

fn combined_z(a: &MeanEstimate, b: &MeanEstimate) -> f64 {
    (a.mean - b.mean) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

#[test]
fn reweighted_physical_matches_risk_neutral() {
    let (raw, pr) = reference_model();
    let p = drift::with_no_arbitrage_mu(&raw, &pr).unwrap();
    let rn = risk_neutralize(&p, &pr).unwrap();
    let sim_p = Simulator::physical(&p, SeedSpec::new(100)).unwrap();
    let sim_q = Simulator::risk_neutral(&p, &pr, &rn, DriftMode::Params, SeedSpec::new(200)).unwrap();

    let tests: [Statistic; 4] = [
        ("down region with up jump", |o| f64::from(u8::from(o.region == Region::Down && o.jump_kind == JumpKind::Up))),
        ("upper region", |o| f64::from(u8::from(o.region == Region::Up))),
        ("tanh of jump", |o| (10.0 * o.jump_size).tanh()),
        ("cosine of increment", |o| (20.0 * o.dw).cos()),
    ];
    let outcomes_p = sim_p.map_paths(1.0, 1, N, |path| path.steps[0]);
    let outcomes_q = sim_q.map_paths(1.0, 1, N, |path| path.steps[0]);
    let weights: Vec<f64> = outcomes_p.iter().map(|o| step_kernel(o, &rn, &p, &pr).unwrap()).collect();
    for (name, f) in tests {
        let wp: Vec<f64> = outcomes_p.iter().zip(&weights).map(|(o, w)| w * f(o)).collect();
        let fq: Vec<f64> = outcomes_q.iter().map(f).collect();
        let z = combined_z(&MeanEstimate::from_samples(&wp), &MeanEstimate::from_samples(&fq));
        assert!(z.abs() < 4.0, "{name}: z = {z}");
    }
}

#[test]
fn risk_neutral_jump_frequencies() {
    let (p, pr) = reference_model();
    let rn = risk_neutralize(&p, &pr).unwrap();
    let sim = Simulator::risk_neutral(&p, &pr, &rn, DriftMode::NoArbitrage, SeedSpec::new(5)).unwrap();
    let outcomes = sim.map_paths(1.0, 1, 1_000_000, |path| path.steps[0]);
    for (region, q) in [(Region::Down, rn.region1), (Region::Up, rn.region2)] {
        let in_region: Vec<&StepOutcome> = outcomes.iter().filter(|o| o.region == region).collect();
        let n = in_region.len() as f64;
        for (kind, prob) in [(JumpKind::Up, q.q_up), (JumpKind::Down, q.q_down), (JumpKind::None, q.q_none)] {
            let hits = in_region.iter().filter(|o| o.jump_kind == kind).count() as f64;
            let se = (prob * (1.0 - prob) / n).sqrt();
            let z = (hits / n - prob) / se;
            assert!(z.abs() < 4.0, "{region:?} {kind:?}: z = {z}");
        }
    }
    // Physical increment under Q is centred at -gamma sigma tau.
    let dws: Vec<f64> = outcomes.iter().map(|o| o.dw).collect();
    let est = MeanEstimate::from_samples(&dws);
    assert!(est.z_score(-pr.gamma_d * p.sigma * p.tau).abs() < 4.0);
    let sd = est.std_error * (dws.len() as f64).sqrt();
    assert!((sd / p.tau.sqrt() - 1.0).abs() < 0.005);
}

#[test]
fn gauss_hermite_mode_agrees_on_random_sets() {
    for seed in 0..20 {
        let (raw, pr) = random_model(9000 + seed);
        let p = drift::with_no_arbitrage_mu(&raw, &pr).unwrap();
        let rn = risk_neutralize(&p, &pr).unwrap();
        let gh = GridSpec::gauss_hermite(64);
        let l = expect_step_kernel(&p, &pr, &rn, &gh).unwrap();
        assert!((l.value - 1.0).abs() < 1e-8, "seed {seed}: {l:?}");
        let ret = expect_q_return(&p, &pr, &rn, &gh).unwrap();
        assert!((ret.value - (p.r * p.tau).exp()).abs() < 1e-8, "seed {seed}: {ret:?}");
    }
}

#[test]
fn semi_analytic_unit_mean_on_random_sets() {
    for seed in 0..500 {
        let (p, pr) = random_model(seed);
        let rn = risk_neutralize(&p, &pr).unwrap();
        let e = jdemm::measure::expected_step_kernel(&p, &pr, &rn);
        assert!((e - 1.0).abs() < 1e-10, "seed {seed}: {e}");
    }
}

#[test]
fn prices_stay_positive() {
    let (p, pr) = reference_model();
    let rn = risk_neutralize(&p, &pr).unwrap();
    let paths = jdemm::simulate_q(&p, &pr, &rn, DriftMode::NoArbitrage, 1.0, 500, 200, SeedSpec::new(1)).unwrap();
    assert!(paths.iter().flat_map(|p| &p.prices).all(|&s| s > 0.0 && s.is_finite()));
}
