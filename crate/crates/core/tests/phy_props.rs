use npca::phy::{dbps, ChannelWidth, McsMap};
use npca::scenario::DEFAULT_PAYLOAD_BITS;
use npca::{McsProfile, PhyParams};
use proptest::prelude::*;

fn width() -> impl Strategy<Value = ChannelWidth> {
    prop_oneof![Just(20u32), Just(40), Just(80), Just(160)].prop_map(|m| ChannelWidth::from_mhz(m).unwrap())
}

#[test]
fn hand_computed_txop_durations() {
    // 240 + 968 * (32 + 11200) + 18 bits over 1960 * 10 * 5/6 * 2 bits per
    // symbol is 332.86 symbols.
    let phy = PhyParams::calibrated();
    let fast = dbps(McsProfile::new(11).unwrap(), ChannelWidth::from_mhz(160).unwrap(), 2).unwrap();
    let data = phy.data_duration(968, DEFAULT_PAYLOAD_BITS, fast);
    assert!((data - (100e-6 + 333.0 * 13.6e-6)).abs() < 1e-12);
    let txop = phy.txop_duration(968, DEFAULT_PAYLOAD_BITS, fast);
    assert!((txop - 4993.8e-6).abs() < 1e-10, "{txop}");

    let slow = dbps(McsProfile::new(1).unwrap(), ChannelWidth::from_mhz(80).unwrap(), 2).unwrap();
    assert!((slow.value() - 980.0).abs() < 1e-9);
    let data = phy.data_duration(29, DEFAULT_PAYLOAD_BITS, slow);
    assert!((data - 4628.8e-6).abs() < 1e-12);
}

#[test]
fn mean_backoff_of_sixteen_slot_window() {
    let phy = PhyParams::default();
    let lambda = phy.lambda_from_cw(16, 1.0).unwrap();
    assert!((1.0 / lambda - 7.5 * 9e-6).abs() < 1e-15);
    assert!(phy.lambda_from_cw(1, 1.0).is_err());
    assert!(phy.lambda_from_cw(16, 0.0).is_err());
}

#[test]
fn distance_map_anchors() {
    let map = McsMap::default();
    for (d, mcs) in [(1.0, 11), (1.5, 11), (5.0, 6), (17.0, 1)] {
        assert_eq!(map.mcs_for(d).unwrap().index, mcs, "distance {d}");
    }
    assert!(map.mcs_for(-1.0).is_err());
}

proptest! {
    #[test]
    fn packets_fit_and_one_more_does_not(
        mcs in 1u8..=11, w in width(), n_ss in 1u8..=2, delta in 1u32..=1024, budget in 0.0f64..6e-3,
    ) {
        let phy = PhyParams::default();
        let rate = dbps(McsProfile::new(mcs).unwrap(), w, n_ss).unwrap();
        let n = phy.max_packets_within(budget, DEFAULT_PAYLOAD_BITS, rate, delta);
        prop_assert!(n <= delta);
        if n > 0 {
            prop_assert!(phy.txop_duration(n, DEFAULT_PAYLOAD_BITS, rate) <= budget + 1e-12);
        }
        if n < delta {
            prop_assert!(phy.txop_duration(n + 1, DEFAULT_PAYLOAD_BITS, rate) > budget);
        }
    }

    #[test]
    fn aggregation_grows_with_budget_rate_and_width(mcs in 1u8..11, delta in 1u32..=1024, b in 1e-3f64..5e-3) {
        let phy = PhyParams::default();
        let n = |m: u8, mhz: u32, budget: f64| {
            let rate = dbps(McsProfile::new(m).unwrap(), ChannelWidth::from_mhz(mhz).unwrap(), 2).unwrap();
            phy.max_packets_within(budget, DEFAULT_PAYLOAD_BITS, rate, delta)
        };
        prop_assert!(n(mcs, 80, b) <= n(mcs, 80, b + 1e-4));
        prop_assert!(n(mcs, 80, b) <= n(mcs + 1, 80, b));
        prop_assert!(n(mcs, 80, b) <= n(mcs, 160, b));
    }

    #[test]
    fn duration_grows_with_packets(mcs in 1u8..=11, w in width(), n in 1u32..1024) {
        let phy = PhyParams::default();
        let rate = dbps(McsProfile::new(mcs).unwrap(), w, 2).unwrap();
        prop_assert!(phy.txop_duration(n, DEFAULT_PAYLOAD_BITS, rate) <= phy.txop_duration(n + 1, DEFAULT_PAYLOAD_BITS, rate));
    }

    #[test]
    fn closer_stations_never_get_a_lower_mcs(d in 0.01f64..40.0, step in 0.0f64..5.0) {
        let map = McsMap::default();
        let near = map.mcs_for(d).unwrap().index;
        let far = map.mcs_for(d + step).unwrap().index;
        prop_assert!(near >= far);
        prop_assert!((1..=11).contains(&far));
    }

    #[test]
    fn npca_budget_never_negative(t in 0.0f64..6e-3) {
        let phy = PhyParams::default();
        let b = phy.npca_budget(t);
        prop_assert!(b >= 0.0 && b <= t);
    }
}
