//! Pairwise stability: link deviations, stability verdicts, exhaustive
//! enumeration for small economies, (theta, phi) region scans and the
//! severance thresholds of the complete network.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    closed_form_complete, closed_form_complete_minus_link, equilibrium, missing_link_terms,
};
use crate::error::{Error, Result};
use crate::graph::{enumerate_networks, Network};
use crate::model::{FirmType, Instance, MarketParams, TwoTypeConfig};

/// Profit differences within this band count as indifference.
pub const STABILITY_TOL: f64 = 1e-10;
/// Bisection tolerance on theta for severance thresholds.
pub const THRESHOLD_TOL: f64 = 1e-8;
/// Distance from the interval ends where the threshold bracket is probed.
pub const BRACKET_EPS: f64 = 1e-6;

fn profits(net: &Network, inst: &Instance) -> Result<Vec<f64>> {
    Ok(equilibrium(net, inst)?.profits)
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= n || j >= n {
        return Err(Error::OutOfRange {
            what: "firm index",
            value: i.max(j),
            max: n.saturating_sub(1),
        });
    }
    if i == j {
        return Err(Error::SamePair { i, j });
    }
    Ok(())
}

/// Profit change of both endpoints between the network with and without `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationDelta {
    pub pair: (usize, usize),
    /// Whether the link exists in the source network.
    pub present: bool,
    pub delta_i: f64,
    pub delta_j: f64,
}

pub fn link_deviation(net: &Network, inst: &Instance, i: usize, j: usize) -> Result<DeviationDelta> {
    check_pair(net.n(), i, j)?;
    let with = profits(&net.with_link(i, j), inst)?;
    let without = profits(&net.without_link(i, j), inst)?;
    Ok(DeviationDelta {
        pair: (i, j),
        present: net.linked(i, j),
        delta_i: with[i] - without[i],
        delta_j: with[j] - without[j],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockReason {
    /// Firm `i` of the pair gains by cutting the existing link.
    SeverGainI,
    /// Firm `j` of the pair gains by cutting the existing link.
    SeverGainJ,
    /// Adding the absent link helps one endpoint strictly and hurts neither.
    MutualAddGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blocking {
    pub pair: (usize, usize),
    pub reason: BlockReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub network: Network,
    pub stable: bool,
    pub blocking: Vec<Blocking>,
}

/// Reasons the pair `(i, j)` blocks `net`, given the base profits.
fn pair_blocks(
    net: &Network,
    inst: &Instance,
    base: &[f64],
    i: usize,
    j: usize,
    tol: f64,
    out: &mut Vec<BlockReason>,
) -> Result<()> {
    let dev = profits(&net.toggled(i, j), inst)?;
    if net.linked(i, j) {
        if base[i] < dev[i] - tol {
            out.push(BlockReason::SeverGainI);
        }
        if base[j] < dev[j] - tol {
            out.push(BlockReason::SeverGainJ);
        }
    } else {
        let gain_i = dev[i] - base[i];
        let gain_j = dev[j] - base[j];
        if (gain_i > tol && gain_j >= -tol) || (gain_j > tol && gain_i >= -tol) {
            out.push(BlockReason::MutualAddGain);
        }
    }
    Ok(())
}

/// Full report over every firm pair.
pub fn is_pairwise_stable(net: &Network, inst: &Instance, tol: f64) -> Result<StabilityReport> {
    let base = profits(net, inst)?;
    let n = net.n();
    let mut blocking = Vec::new();
    let mut reasons = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            reasons.clear();
            pair_blocks(net, inst, &base, i, j, tol, &mut reasons)?;
            blocking.extend(reasons.iter().map(|&reason| Blocking {
                pair: (i, j),
                reason,
            }));
        }
    }
    Ok(StabilityReport {
        network: net.clone(),
        stable: blocking.is_empty(),
        blocking,
    })
}

/// Verdict only, over the given pairs, stopping at the first blocking pair.
pub fn stable_on_pairs(
    net: &Network,
    inst: &Instance,
    pairs: &[(usize, usize)],
    tol: f64,
) -> Result<bool> {
    let base = profits(net, inst)?;
    let mut reasons = Vec::new();
    for &(i, j) in pairs {
        pair_blocks(net, inst, &base, i, j, tol, &mut reasons)?;
        if !reasons.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Short-circuiting verdict over every pair.
pub fn is_stable(net: &Network, inst: &Instance, tol: f64) -> Result<bool> {
    stable_on_pairs(net, inst, &crate::graph::pair_list(net.n()), tol)
}

/// Whether every label-preserving relabeling maps `net` to itself.
///
/// Adjacent transpositions within each label class generate the group, so
/// checking those suffices.
pub fn is_label_symmetric<T: PartialEq>(net: &Network, labels: &[T]) -> bool {
    let n = net.n();
    for a in 0..n {
        for b in a + 1..n {
            if labels[a] != labels[b] {
                continue;
            }
            // swap a, b: adjacency must be unchanged
            for k in 0..n {
                if k != a && k != b && net.linked(a, k) != net.linked(b, k) {
                    return false;
                }
            }
            break;
        }
    }
    true
}

/// One pair per unordered label combination. Valid as a deviation set only
/// for networks that are label-symmetric with profile constant on labels.
pub fn label_orbit_pairs<T: PartialEq>(labels: &[T]) -> Vec<(usize, usize)> {
    let n = labels.len();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let seen = out.iter().any(|&(a, b)| {
                (labels[a] == labels[i] && labels[b] == labels[j])
                    || (labels[a] == labels[j] && labels[b] == labels[i])
            });
            if !seen {
                out.push((i, j));
            }
        }
    }
    out
}

/// Verdict using one representative pair per label orbit when the network
/// admits it, every pair otherwise.
pub fn is_stable_by_labels<T: PartialEq>(
    net: &Network,
    inst: &Instance,
    labels: &[T],
    tol: f64,
) -> Result<bool> {
    let constant_on_labels = (0..net.n()).all(|i| {
        (0..net.n()).all(|j| labels[i] != labels[j] || inst.thetas()[i] == inst.thetas()[j])
    });
    if constant_on_labels && is_label_symmetric(net, labels) {
        stable_on_pairs(net, inst, &label_orbit_pairs(labels), tol)
    } else {
        is_stable(net, inst, tol)
    }
}

/// Productivity classes used as labels for deduplication.
pub fn theta_labels(inst: &Instance) -> Vec<u64> {
    inst.thetas().iter().map(|t| t.to_bits()).collect()
}

/// Every network on `inst.n()` firms with its verdict. With `dedup`, one
/// representative per class of networks related by relabeling firms of equal
/// productivity.
pub fn enumerate_stable(inst: &Instance, dedup: bool, tol: f64) -> Result<Vec<StabilityReport>> {
    let labels = theta_labels(inst);
    let nets: Vec<Network> = if dedup {
        enumerate_networks(inst.n(), Some(&labels))?.collect()
    } else {
        enumerate_networks::<u64>(inst.n(), None)?.collect()
    };
    nets.par_iter()
        .map(|net| is_pairwise_stable(net, inst, tol))
        .collect()
}

/// Which network a region scan evaluates at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum StructureFamily {
    Complete,
    PositiveAssortative,
    Fixed(Network),
}

impl StructureFamily {
    pub fn network(&self, types: &[FirmType]) -> Network {
        match self {
            StructureFamily::Complete => Network::complete(types.len()),
            StructureFamily::PositiveAssortative => Network::positive_assortative(types),
            StructureFamily::Fixed(net) => net.clone(),
        }
    }
}

/// How the phi axis of a region is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiAxis {
    /// Grid values are phi itself.
    Absolute,
    /// Grid values are phi / n.
    PerFirm,
}

/// Stability mask over a (theta, phi) grid; `mask[t][p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRegion {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub phi_axis: PhiAxis,
    pub mask: Vec<Vec<bool>>,
}

impl StabilityRegion {
    pub fn is_empty(&self) -> bool {
        !self.mask.iter().flatten().any(|&s| s)
    }

    /// Smallest stable theta in each phi column.
    pub fn lower_boundary(&self) -> Vec<Option<f64>> {
        (0..self.phis.len())
            .map(|p| {
                (0..self.thetas.len())
                    .find(|&t| self.mask[t][p])
                    .map(|t| self.thetas[t])
            })
            .collect()
    }

    /// Largest stable theta in each phi column.
    pub fn upper_boundary(&self) -> Vec<Option<f64>> {
        (0..self.phis.len())
            .map(|p| {
                (0..self.thetas.len())
                    .rev()
                    .find(|&t| self.mask[t][p])
                    .map(|t| self.thetas[t])
            })
            .collect()
    }

    /// `theta,phi,stable` rows, theta-major.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,phi,stable\n");
        for (t, theta) in self.thetas.iter().enumerate() {
            for (p, phi) in self.phis.iter().enumerate() {
                let _ = writeln!(s, "{theta},{phi},{}", u8::from(self.mask[t][p]));
            }
        }
        s
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

/// Scans pairwise stability of a structure over low-type productivity and phi
/// in a two-type economy with `rho * n` high-type firms.
pub fn stability_region(
    family: &StructureFamily,
    n: usize,
    rho: f64,
    theta_grid: &[f64],
    phi_grid: &[f64],
    phi_axis: PhiAxis,
    base: MarketParams,
) -> Result<StabilityRegion> {
    check_grid("theta", theta_grid)?;
    check_grid("phi", phi_grid)?;
    let config = TwoTypeConfig::new(n, rho, theta_grid[0])?;
    let types = config.types();
    let net = family.network(&types);
    if net.n() != n {
        return Err(Error::SizeMismatch {
            network: net.n(),
            profile: n,
        });
    }
    let cells: Vec<(usize, usize)> = (0..theta_grid.len())
        .flat_map(|t| (0..phi_grid.len()).map(move |p| (t, p)))
        .collect();
    let flags: Vec<bool> = cells
        .par_iter()
        .map(|&(t, p)| {
            let phi = match phi_axis {
                PhiAxis::Absolute => phi_grid[p],
                PhiAxis::PerFirm => phi_grid[p] * n as f64,
            };
            let cfg = config.with_theta_low(theta_grid[t])?;
            let inst = Instance::two_type(MarketParams { phi, ..base }, &cfg)?;
            is_stable_by_labels(&net, &inst, &types, STABILITY_TOL)
        })
        .collect::<Result<_>>()?;
    let mask = flags
        .chunks(phi_grid.len())
        .map(|row| row.to_vec())
        .collect();
    Ok(StabilityRegion {
        thetas: theta_grid.to_vec(),
        phis: phi_grid.to_vec(),
        phi_axis,
        mask,
    })
}

/// `R = pi_i(complete - ij) / pi_i(complete)` from the closed-form efforts.
/// `R > 1` means firm `i` gains by cutting its link to `j`.
pub fn complete_deviation_ratio(inst: &Instance, i: usize, j: usize) -> Result<f64> {
    check_pair(inst.n(), i, j)?;
    let n = inst.n() as f64;
    let phi = inst.phi();
    let ti = inst.thetas()[i];
    let e_full = closed_form_complete(inst)[i];
    let e_cut = closed_form_complete_minus_link(inst, i, j)?[i];
    let profit = |eta: f64, e: f64| (phi / (ti * ti * eta * eta) - 1.0) * phi * e * e;
    Ok(profit(2.0 / (n + 1.0), e_cut) / profit(1.0 / (n + 1.0), e_full))
}

/// The same ratio written directly in model quantities. Kept as an
/// independent route for cross-checks.
pub fn complete_deviation_ratio_explicit(inst: &Instance, i: usize, j: usize) -> Result<f64> {
    check_pair(inst.n(), i, j)?;
    let n = inst.n() as f64;
    let phi = inst.phi();
    let (t1, t2) = (inst.thetas()[i], inst.thetas()[j]);
    let terms = missing_link_terms(inst, i, j);
    let (q, lambda) = (terms.q, terms.lambda);
    let big = (n + 1.0).powi(2) * phi;
    let lead = (big - 4.0 * t1 * t1) / (big - t1 * t1);
    let num = big * (1.0 - q) - t1 * t1 - t2 * t2;
    let den = big * (1.0 - q) - 4.0 * t1 * t1
        + 2.0 * t1 * t2 * lambda * ((n + 1.0) * (1.0 - q) - 2.0);
    Ok(lead * (num / den).powi(2))
}

fn ratio_at(inst: &Instance, i: usize, j: usize, theta_j: f64) -> Result<f64> {
    let mut thetas = inst.thetas().to_vec();
    thetas[j] = theta_j;
    complete_deviation_ratio(&inst.with_thetas(thetas)?, i, j)
}

/// Productivity of `j` below which `i` gains by cutting their link in the
/// complete network, holding all other productivities fixed.
pub fn severance_threshold(inst: &Instance, i: usize, j: usize, tol: f64) -> Result<f64> {
    check_pair(inst.n(), i, j)?;
    let theta_i = inst.thetas()[i];
    let mut lo = BRACKET_EPS;
    let mut hi = theta_i - BRACKET_EPS;
    let (r_lo, r_hi) = if lo < hi {
        (ratio_at(inst, i, j, lo)?, ratio_at(inst, i, j, hi)?)
    } else {
        (f64::NAN, f64::NAN)
    };
    if !(r_lo > 1.0 && r_hi < 1.0) {
        return Err(Error::BracketFailure { lo, hi, r_lo, r_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ratio_at(inst, i, j, mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Thresholds `(theta_star, theta_star_star)` for stability of the complete
/// network: some firm below the first makes it unstable; every firm at or
/// above the second makes it stable.
pub fn complete_thresholds(inst: &Instance, tol: f64) -> Result<(f64, f64)> {
    let th = inst.thetas();
    let mut order: Vec<usize> = (0..inst.n()).collect();
    order.sort_by(|&a, &b| th[b].total_cmp(&th[a]).then(a.cmp(&b)));
    let mut per_firm = Vec::with_capacity(order.len().saturating_sub(1));
    for pos in 1..order.len() {
        let j = order[pos];
        let mut best = f64::NEG_INFINITY;
        for &i in &order[..pos] {
            best = best.max(severance_threshold(inst, i, j, tol)?);
        }
        per_firm.push(best);
    }
    let lo = per_firm.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = per_firm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::phi_lower_bound;
    use FirmType::{High as H, Low as L};

    fn unit(phi: f64, thetas: Vec<f64>) -> Instance {
        Instance::new(MarketParams::unit_markup(phi), thetas).unwrap()
    }

    #[test]
    fn homogeneous_complete_is_stable() {
        let inst = unit(3.52, vec![1.0; 4]);
        let report = is_pairwise_stable(&Network::complete(4), &inst, STABILITY_TOL).unwrap();
        assert!(report.stable, "{report:?}");
        let cut = Network::complete(4).without_link(0, 1);
        let dev = link_deviation(&cut, &inst, 0, 1).unwrap();
        assert!(!dev.present);
        assert!(dev.delta_i > 0.0 && dev.delta_j > 0.0);
    }

    #[test]
    fn two_isolated_firms_want_to_link() {
        let inst = unit(phi_lower_bound(2) * 1.5, vec![1.0, 1.0]);
        let report = is_pairwise_stable(&Network::empty(2), &inst, STABILITY_TOL).unwrap();
        assert!(!report.stable);
        assert_eq!(
            report.blocking,
            vec![Blocking {
                pair: (0, 1),
                reason: BlockReason::MutualAddGain
            }]
        );
    }

    #[test]
    fn low_partner_breaks_complete_network() {
        let inst = unit(3.52 * 1.01, vec![1.0, 1.0, 1.0, 0.02]);
        let report = is_pairwise_stable(&Network::complete(4), &inst, STABILITY_TOL).unwrap();
        assert!(!report.stable);
        assert!(report
            .blocking
            .iter()
            .any(|b| b.pair == (0, 3) && b.reason == BlockReason::SeverGainI));
    }

    #[test]
    fn pa_stable_with_large_gap() {
        let inst = unit(3.52, vec![1.0, 1.0, 0.1, 0.1]);
        let pa = Network::positive_assortative(&[H, H, L, L]);
        assert!(is_pairwise_stable(&pa, &inst, STABILITY_TOL).unwrap().stable);
    }

    #[test]
    fn fast_verdict_agrees_with_report() {
        let inst = unit(4.0, vec![1.0, 0.8, 0.3, 0.6]);
        for net in enumerate_networks::<u8>(4, None).unwrap() {
            let full = is_pairwise_stable(&net, &inst, STABILITY_TOL).unwrap();
            assert_eq!(full.stable, is_stable(&net, &inst, STABILITY_TOL).unwrap());
            assert_eq!(full.stable, full.blocking.is_empty());
        }
    }

    #[test]
    fn two_firm_enumeration() {
        let inst = unit(phi_lower_bound(2) * 2.0, vec![1.0, 1.0]);
        let all = enumerate_stable(&inst, false, STABILITY_TOL).unwrap();
        assert_eq!(all.len(), 2);
        let stable: Vec<_> = all.iter().filter(|r| r.stable).collect();
        assert_eq!(stable.len(), 1);
        assert_eq!(stable[0].network, Network::complete(2));
    }

    #[test]
    fn enumeration_extremes_n4() {
        let high = unit(20.0, vec![1.0, 1.0, 0.9, 0.9]);
        let reports = enumerate_stable(&high, true, STABILITY_TOL).unwrap();
        assert_eq!(reports.len(), 28);
        assert!(reports
            .iter()
            .any(|r| r.stable && r.network == Network::complete(4)));

        let low = unit(3.52 * 1.000001, vec![1.0, 1.0, 0.05, 0.05]);
        let reports = enumerate_stable(&low, true, STABILITY_TOL).unwrap();
        let pa = Network::positive_assortative(&[H, H, L, L]);
        assert!(reports.iter().any(|r| r.stable && r.network == pa));
        assert!(!reports
            .iter()
            .any(|r| r.stable && r.network == Network::complete(4)));
    }

    #[test]
    fn label_reduced_verdict_matches_full() {
        let types = [H, H, H, L, L, L];
        for theta in [0.1, 0.3, 0.45, 0.5, 0.8] {
            let cfg = TwoTypeConfig::new(6, 0.5, theta).unwrap();
            let inst = Instance::two_type(MarketParams::unit_markup(phi_lower_bound(6)), &cfg)
                .unwrap();
            for net in [Network::complete(6), Network::positive_assortative(&types)] {
                assert!(is_label_symmetric(&net, &types));
                assert_eq!(
                    is_stable_by_labels(&net, &inst, &types, STABILITY_TOL).unwrap(),
                    is_stable(&net, &inst, STABILITY_TOL).unwrap()
                );
            }
        }
        let hconn = Network::positive_assortative(&types)
            .with_link(0, 3)
            .with_link(0, 4)
            .with_link(0, 5);
        assert!(!is_label_symmetric(&hconn, &types));
        assert_eq!(label_orbit_pairs(&types), vec![(0, 1), (0, 3), (3, 4)]);
    }

    #[test]
    fn region_csv_layout() {
        let region = stability_region(
            &StructureFamily::Complete,
            4,
            0.5,
            &[0.2, 0.9],
            &[4.0, 8.0],
            PhiAxis::Absolute,
            MarketParams::unit_markup(1.0),
        )
        .unwrap();
        let csv = region.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theta,phi,stable");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0.2,4,0");
        assert_eq!(lines[4], "0.9,8,1");
    }

    #[test]
    fn region_rejects_bad_grids() {
        let base = MarketParams::unit_markup(1.0);
        let f = StructureFamily::Complete;
        assert!(stability_region(&f, 4, 0.5, &[], &[4.0], PhiAxis::Absolute, base).is_err());
        assert!(
            stability_region(&f, 4, 0.5, &[0.5, 0.5], &[4.0], PhiAxis::Absolute, base).is_err()
        );
        assert!(stability_region(&f, 4, 0.3, &[0.5], &[4.0], PhiAxis::Absolute, base).is_err());
    }

    #[test]
    fn deviation_ratio_routes_agree() {
        let inst = unit(5.0, vec![1.0, 0.37, 0.8, 0.6, 0.95]);
        for (i, j) in [(0, 1), (2, 3), (4, 1)] {
            let a = complete_deviation_ratio(&inst, i, j).unwrap();
            let b = complete_deviation_ratio_explicit(&inst, i, j).unwrap();
            assert!((a - b).abs() < 1e-12 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn deviation_ratio_matches_solver_profits() {
        let inst = unit(5.0, vec![1.0, 0.37, 0.8, 0.6, 0.95]);
        let full = equilibrium(&Network::complete(5), &inst).unwrap();
        let cut = equilibrium(&Network::complete(5).without_link(0, 1), &inst).unwrap();
        let r = complete_deviation_ratio(&inst, 0, 1).unwrap();
        assert!((r - cut.profits[0] / full.profits[0]).abs() < 1e-10);
    }

    #[test]
    fn deviation_ratio_limits() {
        let inst = unit(phi_lower_bound(5), vec![1.0, 0.5, 0.9, 0.7, 0.6]);
        assert!(ratio_at(&inst, 0, 1, 1e-6).unwrap() > 1.0);
        assert!(ratio_at(&inst, 0, 1, 1.0).unwrap() < 1.0);
    }

    #[test]
    fn threshold_invariant_to_markup() {
        let thetas = vec![1.0, 0.5, 0.9, 0.7];
        let a = unit(4.0, thetas.clone());
        let b = Instance::new(MarketParams::new(7.5, 1.0, 4.0), thetas).unwrap();
        let ta = severance_threshold(&a, 0, 1, THRESHOLD_TOL).unwrap();
        let tb = severance_threshold(&b, 0, 1, THRESHOLD_TOL).unwrap();
        assert!((ta - tb).abs() < 2.0 * THRESHOLD_TOL);
    }

    #[test]
    fn threshold_bracket_failure() {
        let inst = unit(4.0, vec![1.0, 0.5, 1e-6, 0.7]);
        assert!(matches!(
            severance_threshold(&inst, 2, 1, THRESHOLD_TOL),
            Err(Error::BracketFailure { .. })
        ));
    }

    #[test]
    fn threshold_ordering() {
        let inst = unit(4.0, vec![1.0, 0.6, 0.85, 0.7]);
        let (lo, hi) = complete_thresholds(&inst, THRESHOLD_TOL).unwrap();
        assert!(0.0 < lo && lo <= hi && hi < 1.0);
    }
}
