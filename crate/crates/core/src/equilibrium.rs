//! Second- and third-stage equilibrium for a fixed network.
//!
//! Efforts solve the linear first-order system `A(G) e = (alpha - c_bar) 1`.
//! Quantities, marginal costs, profits and welfare follow from the efforts.
//! Two independent routes are provided as oracles for the linear solve: the
//! closed forms for the complete network (with and without one link) and an
//! undamped best-response iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::model::Instance;

/// Pivot floor relative to the largest matrix entry.
pub const PIVOT_TOLERANCE: f64 = 1e-12;
/// Relative residual accepted from the linear solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Efforts at or below this are rejected.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Relative agreement required between the two profit formulas.
pub const PROFIT_CROSS_CHECK: f64 = 1e-9;

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 100_000;

/// `n [2(n-1)^2 + n] / (n+1)^2`: above it, efforts are unique and positive
/// on every network.
pub fn phi_lower_bound(n: usize) -> f64 {
    let n = n as f64;
    n * (2.0 * (n - 1.0).powi(2) + n) / (n + 1.0).powi(2)
}

/// Dense FOC matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FocMatrix {
    n: usize,
    entries: Vec<f64>,
    rhs_scale: f64,
}

impl FocMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rhs_scale(&self) -> f64 {
        self.rhs_scale
    }

    /// `min_j |A_jj| - sum_{i != j} |A_ij|`; positive iff strictly
    /// diagonally dominant by columns.
    pub fn column_dominance_margin(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                let off: f64 = (0..self.n)
                    .filter(|&i| i != j)
                    .map(|i| self.get(i, j).abs())
                    .sum();
                self.get(j, j).abs() - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Row counterpart of [`Self::column_dominance_margin`].
    pub fn row_dominance_margin(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let off: f64 = (0..self.n)
                    .filter(|&j| j != i)
                    .map(|j| self.get(i, j).abs())
                    .sum();
                self.get(i, i).abs() - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_column_dominant(&self) -> bool {
        self.column_dominance_margin() > 0.0
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `||A e - rhs_scale * 1||_inf`.
    pub fn residual(&self, efforts: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| {
                let row: f64 = (0..self.n).map(|j| self.get(i, j) * efforts[j]).sum();
                (row - self.rhs_scale).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn check_size(net: &Network, inst: &Instance) -> Result<()> {
    if net.n() != inst.n() {
        return Err(Error::SizeMismatch {
            network: net.n(),
            profile: inst.n(),
        });
    }
    Ok(())
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

pub fn build_foc_matrix(net: &Network, inst: &Instance) -> Result<FocMatrix> {
    check_size(net, inst)?;
    let n = net.n();
    let nf = n as f64;
    let phi = inst.phi();
    let theta = inst.thetas();
    let d = net.degrees();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = if i == j {
                let slack = theta[i] * (nf - d[i] as f64);
                (nf + 1.0).powi(2) * phi / slack - slack
            } else {
                let link = if net.linked(i, j) { nf + 1.0 } else { 0.0 };
                ((1 + d[j]) as f64 - link) * theta[j]
            };
        }
    }
    Ok(FocMatrix {
        n,
        entries,
        rhs_scale: inst.markup(),
    })
}

/// Efforts with the residual of the linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct EffortSolution {
    pub efforts: Vec<f64>,
    pub residual_norm: f64,
}

/// Gaussian elimination with partial pivoting on a copy of `a`.
/// Returns the solution of `a x = b` or the offending pivot.
fn lu_solve(a: &[f64], n: usize, b: &[f64]) -> std::result::Result<Vec<f64>, (f64, f64)> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let threshold = PIVOT_TOLERANCE * scale.max(f64::MIN_POSITIVE);
    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(piv_abs > threshold) {
            return Err((piv_abs, threshold));
        }
        if piv_row != col {
            for k in 0..n {
                m.swap(col * n + k, piv_row * n + k);
            }
            x.swap(col, piv_row);
        }
        let pivot = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[r * n + col] = 0.0;
            for k in col + 1..n {
                m[r * n + k] -= factor * m[col * n + k];
            }
            x[r] -= factor * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = x[row];
        for k in row + 1..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Ok(x)
}

/// Solves the FOC system and rejects non-positive efforts.
pub fn solve_efforts(foc: &FocMatrix) -> Result<EffortSolution> {
    let n = foc.n;
    let rhs = vec![foc.rhs_scale; n];
    let mut efforts = lu_solve(&foc.entries, n, &rhs)
        .map_err(|(pivot, threshold)| Error::SingularSystem { pivot, threshold })?;
    let mut residual_norm = foc.residual(&efforts);
    let bound = |e: &[f64]| {
        let e_inf = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        RESIDUAL_TOLERANCE * (foc.inf_norm() * e_inf).max(1.0)
    };
    if residual_norm > bound(&efforts) {
        // one round of iterative refinement
        let r: Vec<f64> = (0..n)
            .map(|i| {
                foc.rhs_scale - (0..n).map(|j| foc.get(i, j) * efforts[j]).sum::<f64>()
            })
            .collect();
        if let Ok(delta) = lu_solve(&foc.entries, n, &r) {
            for (e, d) in efforts.iter_mut().zip(delta) {
                *e += d;
            }
        }
        residual_norm = foc.residual(&efforts);
        if residual_norm > bound(&efforts) {
            return Err(Error::SingularSystem {
                pivot: residual_norm,
                threshold: bound(&efforts),
            });
        }
    }
    if let Some((firm, &value)) = efforts
        .iter()
        .enumerate()
        .find(|(_, &e)| !(e > POSITIVITY_FLOOR))
    {
        return Err(Error::NonPositiveEffort { firm, value });
    }
    Ok(EffortSolution {
        efforts,
        residual_norm,
    })
}

/// Efforts on the complete network, `(alpha - c_bar) theta_i / ((n+1)^2 phi - sum theta^2)`.
pub fn closed_form_complete(inst: &Instance) -> Vec<f64> {
    let n = inst.n() as f64;
    let denom = (n + 1.0).powi(2) * inst.phi() - inst.profile().sum_of_squares();
    inst.thetas()
        .iter()
        .map(|t| inst.markup() * t / denom)
        .collect()
}

/// Intermediate quantities of the complete-minus-one-link closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissingLinkTerms {
    /// `(n+1)^2 phi / (2 theta_k) - 2 theta_k`
    pub b_k: f64,
    /// Ratio `e_l / e_k`.
    pub lambda: f64,
    /// `sum_{j not in {k,l}} theta_j^2 / ((n+1)^2 phi)`
    pub q: f64,
    /// Shared denominator of the effort expressions.
    pub denominator: f64,
}

pub fn missing_link_terms(inst: &Instance, k: usize, l: usize) -> MissingLinkTerms {
    let n = inst.n() as f64;
    let phi = inst.phi();
    let th = inst.thetas();
    let (tk, tl) = (th[k], th[l]);
    let np1 = n + 1.0;
    let b_k = np1 * np1 * phi / (2.0 * tk) - 2.0 * tk;
    let lambda = (tl / tk) * (np1 * phi - 2.0 * tk * tk) / (np1 * phi - 2.0 * tl * tl);
    let others: f64 = th
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k && j != l)
        .map(|(_, t)| t * t)
        .sum();
    let q = others / (np1 * np1 * phi);
    let denominator =
        b_k * (1.0 - q) - 2.0 * tk * q + tl * lambda * (n * (1.0 - q) - (1.0 + q));
    MissingLinkTerms {
        b_k,
        lambda,
        q,
        denominator,
    }
}

/// Efforts on the complete network with the `(k, l)` link removed.
pub fn closed_form_complete_minus_link(inst: &Instance, k: usize, l: usize) -> Result<Vec<f64>> {
    check_pair(inst.n(), k, l)?;
    let n = inst.n() as f64;
    let th = inst.thetas();
    let t = missing_link_terms(inst, k, l);
    let a = inst.markup();
    let e_k = a / t.denominator;
    let inner = t.b_k + 2.0 * th[k] + (n + 1.0) * th[l] * t.lambda;
    let outer = (n + 1.0).powi(2) * inst.phi() * t.denominator;
    Ok((0..inst.n())
        .map(|i| {
            if i == k {
                e_k
            } else if i == l {
                t.lambda * e_k
            } else {
                a * th[i] * inner / outer
            }
        })
        .collect())
}

/// Outcome of the best-response iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub efforts: Vec<f64>,
    pub iterations: usize,
}

/// Iterates each firm's best response to the others' previous efforts.
pub fn best_response_fixed_point(
    net: &Network,
    inst: &Instance,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    best_response_fixed_point_from(net, inst, None, tol, max_iter)
}

/// Same as [`best_response_fixed_point`] with an optional starting profile.
/// Without one, iteration starts from the baseline term of every best response.
pub fn best_response_fixed_point_from(
    net: &Network,
    inst: &Instance,
    start: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    check_size(net, inst)?;
    let n = net.n();
    let nf = n as f64;
    let phi = inst.phi();
    let th = inst.thetas();
    let eta = net.sparsity();
    let baseline = inst.markup() / (nf + 1.0);

    let mut gain = Vec::with_capacity(n);
    for i in 0..n {
        let te = th[i] * eta[i];
        let denom = phi - te * te;
        if !(denom > 0.0) {
            return Err(Error::NoConvergence {
                iterations: 0,
                last_step: f64::NAN,
            });
        }
        gain.push(te / denom);
    }

    let mut current: Vec<f64> = match start {
        Some(s) if s.len() == n => s.to_vec(),
        Some(s) => {
            return Err(Error::SizeMismatch {
                network: n,
                profile: s.len(),
            })
        }
        None => gain.iter().map(|g| g * baseline).collect(),
    };
    let mut next = vec![0.0; n];
    let mut last_step = f64::INFINITY;
    for iteration in 1..=max_iter {
        for i in 0..n {
            let mut acc = baseline;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let effective = th[j] * current[j];
                if net.linked(i, j) {
                    acc += eta[j] * effective;
                } else {
                    acc -= (1.0 - eta[j]) * effective;
                }
            }
            next[i] = gain[i] * acc;
        }
        last_step = current
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        std::mem::swap(&mut current, &mut next);
        if !last_step.is_finite() {
            break;
        }
        if last_step <= tol {
            return Ok(FixedPoint {
                efforts: current,
                iterations: iteration,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_step,
    })
}

/// Marginal costs `c_bar - theta_i e_i - sum_{j in N_i} theta_j e_j`.
pub fn marginal_costs(net: &Network, inst: &Instance, efforts: &[f64]) -> Vec<f64> {
    let th = inst.thetas();
    let c_bar = inst.params().c_bar;
    (0..net.n())
        .map(|i| {
            let spill: f64 = net.neighbors(i).map(|j| th[j] * efforts[j]).sum();
            c_bar - th[i] * efforts[i] - spill
        })
        .collect()
}

/// Cournot quantities for arbitrary efforts (not necessarily equilibrium ones).
pub fn quantities_from_efforts(net: &Network, inst: &Instance, efforts: &[f64]) -> Vec<f64> {
    let costs = marginal_costs(net, inst, efforts);
    let n = net.n() as f64;
    let total: f64 = costs.iter().sum();
    let alpha = inst.params().alpha;
    costs
        .iter()
        .map(|&c| (alpha - n * c + (total - c)) / (n + 1.0))
        .collect()
}

/// Full outcome of the three-stage game on a fixed network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub efforts: Vec<f64>,
    pub quantities: Vec<f64>,
    pub marginal_costs: Vec<f64>,
    pub profits: Vec<f64>,
    #[serde(rename = "cs")]
    pub consumer_surplus: f64,
    #[serde(rename = "ps")]
    pub producer_surplus: f64,
    pub welfare: f64,
    pub residual_norm: f64,
}

impl Equilibrium {
    pub fn total_quantity(&self) -> f64 {
        self.quantities.iter().sum()
    }
}

pub fn equilibrium(net: &Network, inst: &Instance) -> Result<Equilibrium> {
    let foc = build_foc_matrix(net, inst)?;
    let EffortSolution {
        efforts,
        residual_norm,
    } = solve_efforts(&foc)?;
    let phi = inst.phi();
    let th = inst.thetas();
    let eta = net.sparsity();
    let marginal_costs = marginal_costs(net, inst, &efforts);
    let quantities = quantities_from_efforts(net, inst, &efforts);
    let mut profits = Vec::with_capacity(net.n());
    for i in 0..net.n() {
        let (q, e) = (quantities[i], efforts[i]);
        let direct = q * q - phi * e * e;
        let te = th[i] * eta[i];
        let from_efforts = (phi / (te * te) - 1.0) * phi * e * e;
        let scale = (q * q).max(phi * e * e);
        if (direct - from_efforts).abs() > PROFIT_CROSS_CHECK * scale {
            return Err(Error::ProfitCrossCheckFailed {
                firm: i,
                direct,
                from_efforts,
            });
        }
        profits.push(direct);
    }
    let total_q: f64 = quantities.iter().sum();
    let consumer_surplus = 0.5 * total_q * total_q;
    let producer_surplus: f64 = profits.iter().sum();
    Ok(Equilibrium {
        efforts,
        quantities,
        marginal_costs,
        profits,
        consumer_surplus,
        producer_surplus,
        welfare: consumer_surplus + producer_surplus,
        residual_norm,
    })
}

/// Closed-form and directly computed ratios for a symmetric-position pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRatios {
    pub effort_ratio: f64,
    pub profit_ratio: f64,
    pub direct_effort_ratio: f64,
    pub direct_profit_ratio: f64,
}

pub fn symmetric_pair_ratios(
    net: &Network,
    inst: &Instance,
    i: usize,
    j: usize,
) -> Result<PairRatios> {
    check_size(net, inst)?;
    check_pair(net.n(), i, j)?;
    if !net.symmetric_position(i, j) {
        return Err(Error::NotSymmetric { i, j });
    }
    let phi = inst.phi();
    let (ti, tj) = (inst.thetas()[i], inst.thetas()[j]);
    let eta = net.sparsity();
    let (ei, ej) = (eta[i], eta[j]);
    let unlinked = if net.linked(i, j) { 0.0 } else { 1.0 };
    let cross = (phi - tj * tj * ej * unlinked) / (phi - ti * ti * ei * unlinked);
    let effort_ratio = ti / tj * cross;
    let profit_ratio = (phi - ti * ti * ei * ei) / (phi - tj * tj * ej * ej) * cross * cross;
    let eq = equilibrium(net, inst)?;
    Ok(PairRatios {
        effort_ratio,
        profit_ratio,
        direct_effort_ratio: eq.efforts[i] / eq.efforts[j],
        direct_profit_ratio: eq.profits[i] / eq.profits[j],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MarketParams;

    fn unit(phi: f64, thetas: Vec<f64>) -> Instance {
        Instance::new(MarketParams::unit_markup(phi), thetas).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn lower_bound_values() {
        assert!((phi_lower_bound(4) - 3.52).abs() < 1e-15);
        assert!((phi_lower_bound(6) - 48.0 / 7.0).abs() < 1e-14);
        assert!((phi_lower_bound(2) - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn foc_entries_complete_and_empty() {
        let inst = unit(3.52, vec![1.0; 4]);
        let c = build_foc_matrix(&Network::complete(4), &inst).unwrap();
        let e = build_foc_matrix(&Network::empty(4), &inst).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let (want_c, want_e) = if i == j { (87.0, 18.0) } else { (-1.0, 1.0) };
                assert!((c.get(i, j) - want_c).abs() < 1e-12);
                assert!((e.get(i, j) - want_e).abs() < 1e-12);
            }
        }
        assert!(c.is_column_dominant());
        assert!(e.is_column_dominant());
        assert!((c.column_dominance_margin() - 84.0).abs() < 1e-12);
        assert!((e.column_dominance_margin() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn efforts_complete_and_empty() {
        let inst = unit(3.52, vec![1.0; 4]);
        let sol = solve_efforts(&build_foc_matrix(&Network::complete(4), &inst).unwrap()).unwrap();
        for e in &sol.efforts {
            assert!(rel(*e, 1.0 / 84.0) < 1e-13);
        }
        let sol = solve_efforts(&build_foc_matrix(&Network::empty(4), &inst).unwrap()).unwrap();
        for e in &sol.efforts {
            assert!(rel(*e, 1.0 / 21.0) < 1e-13);
        }
    }

    #[test]
    fn efforts_scale_linearly_with_markup() {
        let net = Network::complete(4);
        let a = unit(3.52, vec![1.0; 4]);
        let b = Instance::new(MarketParams::new(3.0, 1.0, 3.52), vec![1.0; 4]).unwrap();
        let ea = solve_efforts(&build_foc_matrix(&net, &a).unwrap()).unwrap();
        let eb = solve_efforts(&build_foc_matrix(&net, &b).unwrap()).unwrap();
        for (x, y) in ea.efforts.iter().zip(&eb.efforts) {
            assert!(rel(*y, 2.0 * x) < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let foc = FocMatrix {
            n: 2,
            entries: vec![1.0, 2.0, 2.0, 4.0],
            rhs_scale: 1.0,
        };
        assert!(matches!(
            solve_efforts(&foc),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn tiny_phi_gives_non_positive_effort() {
        let inst = unit(0.01, vec![1.0; 4]);
        let err = equilibrium(&Network::complete(4), &inst).unwrap_err();
        assert!(matches!(err, Error::NonPositiveEffort { .. }), "{err}");
    }

    #[test]
    fn complete_closed_form() {
        let inst = unit(3.52, vec![1.0; 4]);
        for e in closed_form_complete(&inst) {
            assert!(rel(e, 1.0 / 84.0) < 1e-14);
        }
        let inst = unit(3.52, vec![1.0, 0.5, 0.5, 0.5]);
        let e = closed_form_complete(&inst);
        assert!(rel(e[0] / e[1], 2.0) < 1e-14);
    }

    #[test]
    fn minus_link_closed_form_matches_solver() {
        let inst = unit(3.52, vec![1.0; 4]);
        let closed = closed_form_complete_minus_link(&inst, 0, 1).unwrap();
        let net = Network::complete(4).without_link(0, 1);
        let solved = solve_efforts(&build_foc_matrix(&net, &inst).unwrap()).unwrap();
        for (a, b) in closed.iter().zip(&solved.efforts) {
            assert!(rel(*a, *b) < 1e-10);
        }
        assert!(rel(closed[0], closed[1]) < 1e-15);

        let inst = unit(4.0, vec![0.3, 1.0, 0.8, 0.55, 0.9]);
        let closed = closed_form_complete_minus_link(&inst, 3, 1).unwrap();
        let t = missing_link_terms(&inst, 3, 1);
        assert_eq!(closed[1], t.lambda * closed[3]);
        let net = Network::complete(5).without_link(1, 3);
        let solved = solve_efforts(&build_foc_matrix(&net, &inst).unwrap()).unwrap();
        for (a, b) in closed.iter().zip(&solved.efforts) {
            assert!(rel(*a, *b) < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn fixed_point_reaches_complete_value() {
        let inst = unit(3.52, vec![1.0; 4]);
        let fp = best_response_fixed_point(&Network::complete(4), &inst, 1e-14, 10_000).unwrap();
        for e in fp.efforts {
            assert!(rel(e, 1.0 / 84.0) < 1e-11);
        }
    }

    #[test]
    fn fixed_point_from_solution_stops_immediately() {
        let inst = unit(4.0, vec![1.0, 0.4, 0.7, 0.9]);
        let net = Network::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let sol = solve_efforts(&build_foc_matrix(&net, &inst).unwrap()).unwrap();
        let fp =
            best_response_fixed_point_from(&net, &inst, Some(&sol.efforts), 1e-12, 10).unwrap();
        assert_eq!(fp.iterations, 1);
    }

    #[test]
    fn fixed_point_reports_non_convergence() {
        let inst = unit(4.0, vec![1.0, 0.4, 0.7, 0.9]);
        let err = best_response_fixed_point(&Network::empty(4), &inst, 0.0, 5).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 5, .. }));
    }

    #[test]
    fn complete_four_firm_outcome() {
        let inst = unit(3.52, vec![1.0; 4]);
        let eq = equilibrium(&Network::complete(4), &inst).unwrap();
        for i in 0..4 {
            assert!((eq.efforts[i] - 0.01190476).abs() < 5e-9);
            assert!((eq.quantities[i] - 0.20952381).abs() < 5e-9);
            assert!((eq.profits[i] - 0.04340136).abs() < 5e-9);
            // q = phi / (theta eta) e
            assert!(rel(eq.quantities[i], 3.52 / 0.2 * eq.efforts[i]) < 1e-12);
        }
        assert!((eq.welfare - 0.52480726).abs() < 5e-9);
        assert_eq!(eq.welfare, eq.consumer_surplus + eq.producer_surplus);
    }

    #[test]
    fn connected_symmetric_pair_has_equal_output() {
        let inst = unit(4.0, vec![1.0, 0.4, 0.7, 0.7]);
        let eq = equilibrium(&Network::complete(4), &inst).unwrap();
        assert!(rel(eq.quantities[0], eq.quantities[1]) < 1e-12);
    }

    #[test]
    fn pair_ratios() {
        let inst = unit(3.52, vec![1.0, 0.5, 1.0, 1.0]);
        let linked = symmetric_pair_ratios(&Network::complete(4), &inst, 0, 1).unwrap();
        assert!(rel(linked.effort_ratio, 2.0) < 1e-15);
        assert!(rel(linked.direct_effort_ratio, 2.0) < 1e-10);
        let cut = Network::complete(4).without_link(0, 1);
        let r = symmetric_pair_ratios(&cut, &inst, 0, 1).unwrap();
        assert!(rel(r.effort_ratio, r.direct_effort_ratio) < 1e-10);
        assert!(rel(r.profit_ratio, r.direct_profit_ratio) < 1e-10);

        let same = unit(3.52, vec![0.6; 4]);
        let r = symmetric_pair_ratios(&cut, &same, 0, 1).unwrap();
        assert!(rel(r.effort_ratio, 1.0) < 1e-15 && rel(r.profit_ratio, 1.0) < 1e-15);

        let star = Network::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(matches!(
            symmetric_pair_ratios(&star, &inst, 0, 1),
            Err(Error::NotSymmetric { i: 0, j: 1 })
        ));
    }

    #[test]
    fn equilibrium_json_keys() {
        let inst = unit(3.52, vec![1.0; 4]);
        let eq = equilibrium(&Network::complete(4), &inst).unwrap();
        let v: serde_json::Value = serde_json::to_value(&eq).unwrap();
        for key in [
            "efforts",
            "quantities",
            "marginal_costs",
            "profits",
            "cs",
            "ps",
            "welfare",
            "residual_norm",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let inst = unit(3.52, vec![1.0; 4]);
        assert!(matches!(
            equilibrium(&Network::complete(3), &inst),
            Err(Error::SizeMismatch { .. })
        ));
    }
}
