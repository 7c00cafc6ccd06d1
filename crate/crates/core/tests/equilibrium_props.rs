use proptest::prelude::*;
use rdnet_core::equilibrium::{
    build_foc_matrix, closed_form_complete, closed_form_complete_minus_link, equilibrium,
    phi_lower_bound, quantities_from_efforts, solve_efforts, symmetric_pair_ratios,
};
use rdnet_core::stability::link_deviation;
use rdnet_core::{Instance, MarketParams, Network};

/// Dense Gauss-Jordan on the first-order conditions, assembled here from the
/// best-response equations rather than the library's matrix builder.
fn oracle_efforts(net: &Network, inst: &Instance) -> Vec<f64> {
    let n = net.n();
    let nf = n as f64;
    let phi = inst.phi();
    let th = inst.thetas();
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        let di = net.degree(i) as f64;
        for j in 0..n {
            a[i][j] = if i == j {
                (nf + 1.0).powi(2) * phi / (th[i] * (nf - di)) - th[i] * (nf - di)
            } else {
                let dj = net.degree(j) as f64;
                let g = if net.linked(i, j) { 1.0 } else { 0.0 };
                ((1.0 + dj) - (nf + 1.0) * g) * th[j]
            };
        }
        a[i][n] = inst.markup();
    }
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        a.swap(c, p);
        let piv = a[c][c];
        for v in a[c].iter_mut() {
            *v /= piv;
        }
        let row = a[c].clone();
        for (r, other) in a.iter_mut().enumerate() {
            if r != c {
                let f = other[c];
                for (x, y) in other.iter_mut().zip(&row) {
                    *x -= f * y;
                }
            }
        }
    }
    a.iter().map(|r| r[n]).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn network_from_bits(n: usize, bits: &[bool]) -> Network {
    let mut net = Network::empty(n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bits[k] {
                net = net.with_link(i, j);
            }
            k += 1;
        }
    }
    net
}

prop_compose! {
    fn instance_and_network(max_n: usize)
        (n in 3..=max_n)
        (thetas in prop::collection::vec(0.05f64..=1.0, n),
         bits in prop::collection::vec(any::<bool>(), n * (n - 1) / 2),
         scale in 1.0f64 + 1e-6..3.0,
         markup in 0.5f64..5.0,
         n in Just(n))
        -> (Instance, Network)
    {
        let params = MarketParams::new(1.0 + markup, 1.0, phi_lower_bound(n) * scale);
        (Instance::new(params, thetas).unwrap(), network_from_bits(n, &bits))
    }
}

/// A network where `i` and `j` share every link to outsiders.
fn symmetrize(net: &Network, i: usize, j: usize) -> Network {
    let mut out = net.clone();
    for k in 0..net.n() {
        if k != i && k != j {
            out = if net.linked(i, k) {
                out.with_link(j, k)
            } else {
                out.without_link(j, k)
            };
        }
    }
    out
}

prop_compose! {
    fn symmetric_pair(max_n: usize)
        ((inst, net) in instance_and_network(max_n), linked in any::<bool>(),
         hi in 0.2f64..=1.0, frac in 0.05f64..0.95)
        -> (Instance, Network, usize, usize)
    {
        let net = symmetrize(&net, 0, 1);
        let net = if linked { net.with_link(0, 1) } else { net.without_link(0, 1) };
        let mut th = inst.thetas().to_vec();
        th[0] = hi;
        th[1] = hi * frac;
        (inst.with_thetas(th).unwrap(), net, 0, 1)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dominant_and_positive_above_bound((inst, net) in instance_and_network(10)) {
        let foc = build_foc_matrix(&net, &inst).unwrap();
        prop_assert!(foc.is_column_dominant());
        let sol = solve_efforts(&foc).unwrap();
        prop_assert!(sol.efforts.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn solver_matches_independent_elimination((inst, net) in instance_and_network(9)) {
        let eq = equilibrium(&net, &inst).unwrap();
        for (a, b) in eq.efforts.iter().zip(oracle_efforts(&net, &inst)) {
            prop_assert!(rel(*a, b) < 1e-10, "{} vs {}", a, b);
        }
    }

    #[test]
    fn quantity_effort_identity((inst, net) in instance_and_network(10)) {
        let eq = equilibrium(&net, &inst).unwrap();
        let eta = net.sparsity();
        for i in 0..net.n() {
            let implied = inst.phi() / (inst.thetas()[i] * eta[i]) * eq.efforts[i];
            prop_assert!(rel(eq.quantities[i], implied) < 1e-9);
        }
    }

    #[test]
    fn welfare_decomposition((inst, net) in instance_and_network(8)) {
        let eq = equilibrium(&net, &inst).unwrap();
        let total: f64 = eq.quantities.iter().sum();
        prop_assert!(rel(eq.consumer_surplus, 0.5 * total * total) < 1e-12);
        prop_assert!(rel(eq.welfare, eq.consumer_surplus + eq.producer_surplus) < 1e-12);
    }

    #[test]
    fn spillover_signs((inst, net) in instance_and_network(8), i in 0usize..8, k in 0usize..8) {
        let n = net.n();
        let (i, k) = (i % n, k % n);
        prop_assume!(i != k);
        let eq = equilibrium(&net, &inst).unwrap();
        let mut bumped = eq.efforts.clone();
        bumped[k] += 1e-6;
        let before = quantities_from_efforts(&net, &inst, &eq.efforts)[i];
        let after = quantities_from_efforts(&net, &inst, &bumped)[i];
        if net.linked(i, k) {
            prop_assert!(after > before);
        } else {
            prop_assert!(after < before);
        }
    }

    #[test]
    fn pair_ratios_match((inst, net, i, j) in symmetric_pair(9)) {
        let r = symmetric_pair_ratios(&net, &inst, i, j).unwrap();
        prop_assert!(rel(r.effort_ratio, r.direct_effort_ratio) < 1e-9);
        prop_assert!(rel(r.profit_ratio, r.direct_profit_ratio) < 1e-9);
    }

    #[test]
    fn productive_firm_orderings((inst, net, i, j) in symmetric_pair(9)) {
        let eq = equilibrium(&net, &inst).unwrap();
        if net.linked(i, j) {
            prop_assert!(eq.profits[i] < eq.profits[j]);
            prop_assert!(rel(eq.quantities[i], eq.quantities[j]) < 1e-9);
        } else {
            prop_assert!(eq.profits[i] > eq.profits[j]);
            prop_assert!(eq.quantities[i] > eq.quantities[j]);
        }
    }

    #[test]
    fn low_partner_gains_whenever_high_does((inst, net, i, j) in symmetric_pair(8)) {
        let d = link_deviation(&net, &inst, i, j).unwrap();
        if d.delta_i > 0.0 {
            prop_assert!(d.delta_j > 0.0);
        }
    }

    #[test]
    fn closed_forms_match_solver((inst, _net) in instance_and_network(12), k in 0usize..12, l in 0usize..12) {
        let n = inst.n();
        let (k, l) = (k % n, l % n);
        let full = equilibrium(&Network::complete(n), &inst).unwrap();
        for (a, b) in full.efforts.iter().zip(closed_form_complete(&inst)) {
            prop_assert!(rel(*a, b) < 1e-10);
        }
        prop_assume!(k != l);
        let cut = equilibrium(&Network::complete(n).without_link(k, l), &inst).unwrap();
        for (a, b) in cut.efforts.iter().zip(closed_form_complete_minus_link(&inst, k, l).unwrap()) {
            prop_assert!(rel(*a, b) < 1e-10);
        }
    }

    #[test]
    fn instance_json_round_trip_is_exact((inst, _net) in instance_and_network(10)) {
        let file = rdnet_core::InstanceFile::from_instance(&inst);
        let text = serde_json::to_string(&file).unwrap();
        let back: rdnet_core::InstanceFile = serde_json::from_str(&text).unwrap();
        let again = back.validate().unwrap();
        prop_assert_eq!(again.params().alpha.to_bits(), inst.params().alpha.to_bits());
        prop_assert_eq!(again.params().c_bar.to_bits(), inst.params().c_bar.to_bits());
        prop_assert_eq!(again.phi().to_bits(), inst.phi().to_bits());
        for (a, b) in again.thetas().iter().zip(inst.thetas()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn validation_never_panics(alpha in -5.0f64..5.0, c_bar in -5.0f64..5.0, phi in -5.0f64..50.0,
                               thetas in prop::collection::vec(-1.0f64..2.0, 0..8)) {
        let _ = Instance::new(MarketParams::new(alpha, c_bar, phi), thetas);
    }
}

fn cycle(n: usize) -> Network {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Network::from_edges(n, &edges).unwrap()
}

#[test]
fn vertex_transitive_networks_give_equal_efforts() {
    for n in 3..=10 {
        let inst = Instance::new(
            MarketParams::unit_markup(phi_lower_bound(n) * 1.3),
            vec![0.7; n],
        )
        .unwrap();
        let mut nets = vec![Network::empty(n), Network::complete(n), cycle(n)];
        if n % 2 == 0 {
            nets.push(Network::two_clique(n / 2, n / 2));
        }
        for net in nets {
            let e = equilibrium(&net, &inst).unwrap().efforts;
            for x in &e {
                assert!((x - e[0]).abs() <= 1e-12 * e[0], "{net:?}");
            }
        }
    }
}
