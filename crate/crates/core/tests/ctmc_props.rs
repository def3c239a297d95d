use npca::ctmc::{analyze, NpcaTxopModel};
use npca::harness::{builtin_scenario, BuiltinOptions, ScenarioId};
use npca::phy::dbps;
use npca::trajectory::estimate_delay;
use npca::{BandSet, BssSpec, McsProfile, PhyParams, Scenario};
use proptest::prelude::*;

fn bss(id: &str, band: BandSet, mcs: u8) -> BssSpec {
    let mut b = BssSpec::new(id, band, band.start(), McsProfile::new(mcs).unwrap());
    b.delta = 128;
    b
}

/// λ, μ and delivered bits per TXOP of a BSS transmitting on its whole
/// allocation, from the PHY formulas alone.
fn lone_rates(b: &BssSpec, phy: &PhyParams) -> (f64, f64, f64) {
    let rate = dbps(b.mcs, b.allocation.width(), b.n_ss).unwrap();
    let n = phy.max_packets_within(phy.t_max, b.payload_bits, rate, b.delta);
    let mu = 1.0 / phy.txop_duration(n, b.payload_bits, rate);
    let lambda = 2.0 / (15.0 * phy.slot_time);
    (lambda, mu, (1.0 - phy.per) * f64::from(n) * f64::from(b.payload_bits))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn lone_bss_is_an_on_off_source() {
    let phy = PhyParams::default();
    let b = bss("A", BandSet::CH1_2, 9);
    let (lambda, mu, bits) = lone_rates(&b, &phy);
    let sc = Scenario::new(vec![b], phy, false).unwrap();
    let a = analyze(&sc, NpcaTxopModel::default()).unwrap();
    assert_eq!(a.space.len(), 2);
    let busy = lambda / (lambda + mu);
    assert!(rel(a.throughput[0], bits * mu * busy) < 1e-12);

    let d = estimate_delay(&a.space, &a.generator, 2000.0, 5).unwrap();
    let mean = d.per_bss[0].mean.unwrap();
    assert!(rel(mean, 1.0 / lambda + 1.0 / mu) < 0.01, "{mean}");
}

#[test]
fn disjoint_channels_decouple() {
    let phy = PhyParams::default();
    let (a, b) = (bss("A", BandSet::CH1, 11), bss("B", BandSet::CH2, 4));
    let expected: Vec<f64> = [&a, &b]
        .iter()
        .map(|x| {
            let (l, m, bits) = lone_rates(x, &phy);
            bits * m * l / (l + m)
        })
        .collect();
    let sc = Scenario::new(vec![a, b], phy, false).unwrap();
    let r = analyze(&sc, NpcaTxopModel::default()).unwrap();
    assert_eq!(r.space.len(), 4);
    for (got, want) in r.throughput.iter().zip(&expected) {
        assert!(rel(*got, *want) < 1e-12);
    }
}

#[test]
fn shared_channel_splits_airtime() {
    // States idle, A, B: π_A = π_B = ρ / (1 + 2ρ) with ρ = λ/μ.
    let phy = PhyParams::default();
    let (a, b) = (bss("A", BandSet::CH1, 7), bss("B", BandSet::CH1, 7));
    let (lambda, mu, bits) = lone_rates(&a, &phy);
    let sc = Scenario::new(vec![a, b], phy, false).unwrap();
    let r = analyze(&sc, NpcaTxopModel::default()).unwrap();
    let rho = lambda / mu;
    let share = rho / (1.0 + 2.0 * rho);
    for n in 0..2 {
        assert!(rel(r.throughput[n], bits * mu * share) < 1e-12);
    }

    // Each BSS starts a TXOP at rate π_idle λ, so the mean gap between its
    // accesses is the reciprocal.
    let idle = 1.0 / (1.0 + 2.0 * rho);
    let d = estimate_delay(&r.space, &r.generator, 2000.0, 9).unwrap();
    for n in 0..2 {
        let mean = d.per_bss[n].mean.unwrap();
        assert!(rel(mean, 1.0 / (idle * lambda)) < 0.02, "{mean}");
    }
}

#[test]
fn more_activity_on_d_never_lowers_its_throughput() {
    for npca in [false, true] {
        let mut last = 0.0;
        for alpha in [0.1, 0.3, 1.0, 3.0, 10.0] {
            let opts = BuiltinOptions {
                alpha_d: alpha,
                ..BuiltinOptions::default()
            };
            let sc = builtin_scenario(ScenarioId::II, npca, &opts).unwrap();
            let g = analyze(&sc, NpcaTxopModel::default()).unwrap().throughput[2];
            assert!(g >= last, "npca={npca} alpha={alpha}");
            last = g;
        }
    }
}

#[test]
fn npca_only_helps_the_capable_bss_in_scenario_one() {
    let opts = BuiltinOptions::default();
    for model in [NpcaTxopModel::Recontend, NpcaTxopModel::Continuous] {
        let off = analyze(&builtin_scenario(ScenarioId::I, false, &opts).unwrap(), model).unwrap();
        let on = analyze(&builtin_scenario(ScenarioId::I, true, &opts).unwrap(), model).unwrap();
        assert!(on.throughput[0] > 2.0 * off.throughput[0]);
        assert!(rel(on.throughput[1], off.throughput[1]) < 1e-9);
        assert!(on.space.len() > off.space.len());
    }
}

fn full_deployment() -> impl Strategy<Value = (Vec<u8>, Vec<u32>, f64, bool, bool)> {
    (
        prop::collection::vec(1u8..=11, 4),
        prop::collection::vec(1u32..=1024, 4),
        0.05f64..20.0,
        any::<bool>(),
        any::<bool>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stationary_distribution_is_a_solution((mcs, deltas, alpha, npca, continuous) in full_deployment()) {
        let mut sc = builtin_scenario(ScenarioId::III, npca, &BuiltinOptions::default()).unwrap();
        for (n, b) in sc.bsses.iter_mut().enumerate() {
            b.mcs = McsProfile::new(mcs[n]).unwrap();
            b.delta = deltas[n];
        }
        sc.bsses[3].alpha = alpha;
        let model = if continuous { NpcaTxopModel::Continuous } else { NpcaTxopModel::Recontend };
        let a = analyze(&sc, model).unwrap();
        let pi = &a.stationary.pi;
        prop_assert!(pi.iter().all(|&p| p >= 0.0));
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(a.stationary.residual(&a.generator) < 1e-10 * a.generator.max_abs().max(1.0));
        for row in 0..a.generator.len() {
            prop_assert!(a.generator.row(row).iter().sum::<f64>().abs() < 1e-9 * a.generator.max_abs());
        }
        prop_assert!(a.space.all_reach_idle());
    }

    #[test]
    fn contention_never_beats_being_alone(mcs in prop::collection::vec(1u8..=11, 4), delta in 1u32..=1024) {
        let phy = PhyParams::default();
        let mut sc = builtin_scenario(ScenarioId::III, false, &BuiltinOptions::default()).unwrap();
        for (n, b) in sc.bsses.iter_mut().enumerate() {
            b.mcs = McsProfile::new(mcs[n]).unwrap();
            b.delta = delta;
        }
        let g = analyze(&sc, NpcaTxopModel::default()).unwrap().throughput;
        for (n, b) in sc.bsses.iter().enumerate() {
            let (l, m, bits) = lone_rates(b, &phy);
            prop_assert!(g[n] > 0.0);
            prop_assert!(g[n] <= bits * m * l / (l + m) * (1.0 + 1e-12));
        }
    }
}
