use proptest::prelude::*;
use rdnet_core::equilibrium::{equilibrium, phi_lower_bound};
use rdnet_core::graph::enumerate_networks;
use rdnet_core::stability::{
    complete_deviation_ratio, complete_thresholds, enumerate_stable, is_pairwise_stable,
    is_stable, link_deviation, severance_threshold, BlockReason, STABILITY_TOL, THRESHOLD_TOL,
};
use rdnet_core::{FirmType, Instance, MarketParams, Network, TwoTypeConfig};

fn unit(phi: f64, thetas: Vec<f64>) -> Instance {
    Instance::new(MarketParams::unit_markup(phi), thetas).unwrap()
}

#[test]
fn homogeneous_complete_stable_for_small_n() {
    for n in 3..=8 {
        for scale in [1.0 + 1e-6, 1.5, 4.0, 20.0] {
            for theta in [0.2, 1.0] {
                let inst = unit(phi_lower_bound(n) * scale, vec![theta; n]);
                let report = is_pairwise_stable(&Network::complete(n), &inst, STABILITY_TOL).unwrap();
                assert!(report.stable, "n={n} scale={scale} theta={theta}");
            }
        }
    }
}

#[test]
fn report_agrees_with_fresh_deviations() {
    let inst = unit(phi_lower_bound(5) * 1.2, vec![1.0, 0.3, 0.7, 0.5, 0.9]);
    for mask in [0u64, 0x3ff, 0b10_1101_0011, 0b01_0110_1100] {
        let net = Network::from_mask(5, mask);
        let report = is_pairwise_stable(&net, &inst, STABILITY_TOL).unwrap();
        let mut expected = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                let d = link_deviation(&net, &inst, i, j).unwrap();
                assert_eq!(d.present, net.linked(i, j));
                if d.present {
                    if d.delta_i < -STABILITY_TOL {
                        expected.push(((i, j), BlockReason::SeverGainI));
                    }
                    if d.delta_j < -STABILITY_TOL {
                        expected.push(((i, j), BlockReason::SeverGainJ));
                    }
                } else if (d.delta_i > STABILITY_TOL && d.delta_j >= -STABILITY_TOL)
                    || (d.delta_j > STABILITY_TOL && d.delta_i >= -STABILITY_TOL)
                {
                    expected.push(((i, j), BlockReason::MutualAddGain));
                }
            }
        }
        let got: Vec<_> = report.blocking.iter().map(|b| (b.pair, b.reason)).collect();
        assert_eq!(got, expected);
        assert_eq!(report.stable, expected.is_empty());
    }
}

#[test]
fn no_low_type_hub_in_six_firm_stable_networks() {
    let types = TwoTypeConfig::new(6, 0.5, 0.5).unwrap().types();
    for theta in [0.1, 0.4, 0.5, 0.8] {
        for scale in [1.0 + 1e-9, 3.0] {
            let cfg = TwoTypeConfig::new(6, 0.5, theta).unwrap();
            let inst = Instance::two_type(
                MarketParams::unit_markup(phi_lower_bound(6) * scale),
                &cfg,
            )
            .unwrap();
            let reports = enumerate_stable(&inst, true, STABILITY_TOL).unwrap();
            let stable: Vec<_> = reports.iter().filter(|r| r.stable).collect();
            assert!(!stable.is_empty());
            // the complete network is not an intermediate structure
            for r in stable.into_iter().filter(|r| r.network != Network::complete(6)) {
                for (i, t) in types.iter().enumerate() {
                    if *t == FirmType::Low {
                        assert!(r.network.degree(i) < 5, "theta={theta}: {:?}", r.network);
                    }
                }
            }
        }
    }
}

#[test]
fn dedup_keeps_every_stable_class() {
    let inst = unit(3.52 * 1.2, vec![1.0, 1.0, 0.45, 0.45]);
    let raw = enumerate_stable(&inst, false, STABILITY_TOL).unwrap();
    let dedup = enumerate_stable(&inst, true, STABILITY_TOL).unwrap();
    assert_eq!(raw.len(), 64);
    let canon = rdnet_core::graph::MaskCanonicalizer::new(&[1, 1, 0, 0]);
    let mut raw_classes: Vec<u64> = raw
        .iter()
        .filter(|r| r.stable)
        .map(|r| canon.canonical(r.network.to_mask()))
        .collect();
    raw_classes.sort_unstable();
    raw_classes.dedup();
    let mut dedup_classes: Vec<u64> = dedup
        .iter()
        .filter(|r| r.stable)
        .map(|r| canon.canonical(r.network.to_mask()))
        .collect();
    dedup_classes.sort_unstable();
    assert_eq!(raw_classes, dedup_classes);
}

#[test]
fn threshold_root_flips_verdict() {
    for n in [3usize, 4] {
        let mut thetas = vec![1.0; n];
        thetas[1] = 0.5;
        let inst = unit(phi_lower_bound(n) * 1.1, thetas);
        let root = severance_threshold(&inst, 0, 1, THRESHOLD_TOL).unwrap();
        let at = |t: f64| {
            let mut th = inst.thetas().to_vec();
            th[1] = t;
            let inst = inst.with_thetas(th).unwrap();
            is_stable(&Network::complete(n), &inst, STABILITY_TOL).unwrap()
        };
        assert!(!at(root - 1e-4), "n={n}");
        assert!(at(root + 1e-4), "n={n}");
    }
}

#[test]
fn threshold_agrees_with_solver_at_root() {
    let inst = unit(phi_lower_bound(5) * 1.4, vec![1.0, 0.5, 0.8, 0.6, 0.9]);
    let root = severance_threshold(&inst, 0, 1, THRESHOLD_TOL).unwrap();
    let mut th = inst.thetas().to_vec();
    th[1] = root;
    let at = inst.with_thetas(th).unwrap();
    let full = equilibrium(&Network::complete(5), &at).unwrap();
    let cut = equilibrium(&Network::complete(5).without_link(0, 1), &at).unwrap();
    assert!((cut.profits[0] / full.profits[0] - 1.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ratio_decreasing_in_partner(n in 3usize..=7,
                                   ambient in prop::collection::vec(0.05f64..=1.0, 7),
                                   scale in 1.0f64 + 1e-6..3.0) {
        let mut th = ambient[..n].to_vec();
        th[0] = 1.0;
        let inst = unit(phi_lower_bound(n) * scale, th);
        let mut prev = f64::INFINITY;
        for k in 1..=50 {
            let t = k as f64 / 51.0;
            let mut th = inst.thetas().to_vec();
            th[1] = t;
            let r = complete_deviation_ratio(&inst.with_thetas(th).unwrap(), 0, 1).unwrap();
            prop_assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn threshold_ignores_outsider_order(ambient in prop::collection::vec(0.05f64..=1.0, 4),
                                        scale in 1.0f64 + 1e-6..3.0) {
        let mut th = vec![1.0, 0.5];
        th.extend(&ambient);
        let inst = unit(phi_lower_bound(6) * scale, th.clone());
        th[2..].reverse();
        let swapped = unit(phi_lower_bound(6) * scale, th);
        let a = severance_threshold(&inst, 0, 1, THRESHOLD_TOL).unwrap();
        let b = severance_threshold(&swapped, 0, 1, THRESHOLD_TOL).unwrap();
        prop_assert!((a - b).abs() <= 2.0 * THRESHOLD_TOL);
    }

    #[test]
    fn complete_threshold_statements(n in 3usize..=5,
                                     ambient in prop::collection::vec(0.02f64..=1.0, 5),
                                     scale in 1.0f64 + 1e-6..3.0) {
        let mut th = ambient[..n].to_vec();
        th[0] = 1.0;
        let inst = unit(phi_lower_bound(n) * scale, th);
        let (lo, hi) = complete_thresholds(&inst, THRESHOLD_TOL).unwrap();
        prop_assert!(lo <= hi);
        let min = inst.thetas().iter().cloned().fold(f64::INFINITY, f64::min);
        // keep clear of the bisection band
        prop_assume!((min - lo).abs() > 1e-6 && (min - hi).abs() > 1e-6);
        let stable = is_stable(&Network::complete(n), &inst, STABILITY_TOL).unwrap();
        if min < lo {
            prop_assert!(!stable);
        }
        if min >= hi {
            prop_assert!(stable);
        }
    }
}

#[test]
fn enumeration_without_dedup_covers_all_labelled_networks() {
    let inst = unit(phi_lower_bound(3) * 2.0, vec![1.0, 0.6, 0.3]);
    let reports = enumerate_stable(&inst, false, STABILITY_TOL).unwrap();
    let nets: Vec<_> = enumerate_networks::<u8>(3, None).unwrap().collect();
    assert_eq!(reports.len(), 8);
    for (r, net) in reports.iter().zip(nets) {
        assert_eq!(r.network, net);
    }
}
