//! Named structures in two-type economies: welfare, efforts and profits of
//! the positive assortative, H-connected and complete networks, the
//! crowding-out sweep over the high-type share, and productivity upgrades
//! under a fixed two-clique network.

use rayon::prelude::*;
use rdnet_core::equilibrium::equilibrium;
use rdnet_core::stability::{is_stable_by_labels, STABILITY_TOL};
use rdnet_core::{FirmType, Instance, MarketParams, Network, TwoTypeConfig};

use crate::error::{Error, Result};
use crate::output::{
    check_grid, columns, fmt, fmt_opt, phi_at_bound, ratio_grid, with_pool, ExperimentOutput,
    Manifest, Table,
};
use crate::{ExperimentId, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    PositiveAssortative,
    /// Positive assortative plus one high-type firm linked to everyone.
    OneHConnected,
    /// Positive assortative plus two high-type firms linked to everyone.
    TwoHConnected,
    Complete,
}

impl Structure {
    pub const ALL: [Structure; 4] = [
        Structure::PositiveAssortative,
        Structure::OneHConnected,
        Structure::TwoHConnected,
        Structure::Complete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::PositiveAssortative => "pa",
            Structure::OneHConnected => "h1",
            Structure::TwoHConnected => "h2",
            Structure::Complete => "complete",
        }
    }

    /// High-type firms linked to every other firm, other than in the complete network.
    pub fn hub_count(self) -> usize {
        match self {
            Structure::OneHConnected => 1,
            Structure::TwoHConnected => 2,
            _ => 0,
        }
    }

    /// Network for the given type layout (high types first).
    pub fn network(self, types: &[FirmType]) -> Network {
        let n = types.len();
        match self {
            Structure::Complete => Network::complete(n),
            _ => {
                let mut net = Network::positive_assortative(types);
                for hub in 0..self.hub_count() {
                    for k in 0..n {
                        if k != hub {
                            net = net.with_link(hub, k);
                        }
                    }
                }
                net
            }
        }
    }
}

fn two_type_instance(cfg: &TwoTypeConfig) -> Result<Instance> {
    Ok(Instance::two_type(
        MarketParams::unit_markup(phi_at_bound(cfg.n())),
        cfg,
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Config {
    pub n: usize,
    pub rho: f64,
    pub thetas: Vec<f64>,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            n: 6,
            rho: 0.5,
            thetas: ratio_grid(1, 99, 100),
        }
    }
}

/// Outcome of one structure at one low-type productivity.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Row {
    pub theta: f64,
    pub structure: Structure,
    pub welfare: f64,
    pub stable: bool,
    /// High-type firm not linked to everyone.
    pub effort_high: Option<f64>,
    pub effort_low: f64,
    pub effort_hconn: Option<f64>,
    pub profit_high: Option<f64>,
    pub profit_low: f64,
    pub profit_hconn: Option<f64>,
}

impl Fig3Config {
    pub fn run(&self, opts: &RunOptions) -> Result<Vec<Fig3Row>> {
        check_grid("theta", &self.thetas)?;
        let base = TwoTypeConfig::new(self.n, self.rho, self.thetas[0])?;
        if base.n_high() < 2 || base.n_low() == 0 {
            return Err(Error::InvalidSpec(
                "needs at least two high-type and one low-type firm".into(),
            ));
        }
        let types = base.types();
        let nets: Vec<Network> = Structure::ALL.iter().map(|s| s.network(&types)).collect();
        let per_theta = with_pool(opts.threads, || {
            self.thetas
                .par_iter()
                .map(|&theta| {
                    let inst = two_type_instance(&base.with_theta_low(theta)?)?;
                    Structure::ALL
                        .iter()
                        .zip(&nets)
                        .map(|(&s, net)| {
                            let eq = equilibrium(net, &inst)?;
                            let stable = is_stable_by_labels(net, &inst, &types, STABILITY_TOL)?;
                            let hubs = s.hub_count();
                            // last high-type firm is never a hub
                            let high = base.n_high() - 1;
                            let low = self.n - 1;
                            let has_plain_high = hubs < base.n_high();
                            Ok(Fig3Row {
                                theta,
                                structure: s,
                                welfare: eq.welfare,
                                stable,
                                effort_high: has_plain_high.then(|| eq.efforts[high]),
                                effort_low: eq.efforts[low],
                                effort_hconn: (hubs > 0).then(|| eq.efforts[0]),
                                profit_high: has_plain_high.then(|| eq.profits[high]),
                                profit_low: eq.profits[low],
                                profit_hconn: (hubs > 0).then(|| eq.profits[0]),
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })??;
        Ok(per_theta.into_iter().flatten().collect())
    }

    pub fn output(&self, opts: &RunOptions) -> Result<ExperimentOutput> {
        let rows = self.run(opts)?;
        let id = ExperimentId::Fig3;
        let mut table = Table::new(
            id,
            opts.seed,
            &[
                "theta", "structure", "welfare", "stable", "effort_high", "effort_low",
                "effort_hconn", "profit_high", "profit_low", "profit_hconn",
            ],
        );
        for r in &rows {
            table.push(vec![
                fmt(r.theta),
                r.structure.name().to_string(),
                fmt(r.welfare),
                u8::from(r.stable).to_string(),
                fmt_opt(r.effort_high),
                fmt(r.effort_low),
                fmt_opt(r.effort_hconn),
                fmt_opt(r.profit_high),
                fmt(r.profit_low),
                fmt_opt(r.profit_hconn),
            ]);
        }
        let mut manifest = Manifest::new(
            id,
            opts.seed,
            "Welfare, stability, efforts and profits of the positive assortative, one- and two-H-connected and complete networks",
        )
        .grid("n", self.n)
        .grid("rho", self.rho)
        .grid("theta", &self.thetas)
        .grid("structures", Structure::ALL.map(Structure::name));
        manifest.columns = columns(&[
            ("theta", "low-type productivity"),
            ("structure", "pa, h1 (one high-type firm linked to all), h2 (two), complete"),
            ("welfare", "consumer plus producer surplus"),
            ("stable", "1 if the network is pairwise stable"),
            ("effort_high", "effort of a high-type firm that is not linked to everyone; empty if none"),
            ("effort_low", "effort of a low-type firm"),
            ("effort_hconn", "effort of a high-type firm linked to everyone in h1/h2; empty otherwise"),
            ("profit_high", "profit of a high-type firm that is not linked to everyone"),
            ("profit_low", "profit of a low-type firm"),
            ("profit_hconn", "profit of a high-type firm linked to everyone in h1/h2"),
        ]);
        manifest.notes = vec!["no randomness is used; the seed is recorded for uniformity".into()];
        Ok(ExperimentOutput {
            table,
            raw: None,
            manifest,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Config {
    pub n: usize,
    pub rhos: Vec<f64>,
    pub thetas: Vec<f64>,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Self {
            n: 10,
            rhos: ratio_grid(1, 9, 10),
            thetas: ratio_grid(1, 99, 100),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig4Row {
    pub rho: f64,
    pub theta: f64,
    pub structure: Structure,
    pub welfare: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Result {
    pub rows: Vec<Fig4Row>,
}

impl Fig4Result {
    fn select(&self, s: Structure, rho: f64) -> impl Iterator<Item = &Fig4Row> {
        self.rows
            .iter()
            .filter(move |r| r.structure == s && r.rho == rho)
    }

    pub fn welfare(&self, s: Structure, rho: f64, theta: f64) -> Option<f64> {
        self.select(s, rho)
            .find(|r| r.theta == theta)
            .map(|r| r.welfare)
    }

    /// Thetas at which `s` is stable for the given rho, in grid order.
    pub fn stable_thetas(&self, s: Structure, rho: f64) -> Vec<f64> {
        self.select(s, rho)
            .filter(|r| r.stable)
            .map(|r| r.theta)
            .collect()
    }
}

impl Fig4Config {
    pub fn run(&self, opts: &RunOptions) -> Result<Fig4Result> {
        check_grid("rho", &self.rhos)?;
        check_grid("theta", &self.thetas)?;
        let cells: Vec<(f64, f64)> = self
            .rhos
            .iter()
            .flat_map(|&rho| self.thetas.iter().map(move |&t| (rho, t)))
            .collect();
        let rows = with_pool(opts.threads, || {
            cells
                .par_iter()
                .map(|&(rho, theta)| {
                    let cfg = TwoTypeConfig::new(self.n, rho, theta)?;
                    let types = cfg.types();
                    let inst = two_type_instance(&cfg)?;
                    [Structure::PositiveAssortative, Structure::Complete]
                        .iter()
                        .map(|&s| {
                            let net = s.network(&types);
                            Ok(Fig4Row {
                                rho,
                                theta,
                                structure: s,
                                welfare: equilibrium(&net, &inst)?.welfare,
                                stable: is_stable_by_labels(&net, &inst, &types, STABILITY_TOL)?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })??;
        Ok(Fig4Result {
            rows: rows.into_iter().flatten().collect(),
        })
    }

    pub fn output(&self, opts: &RunOptions) -> Result<ExperimentOutput> {
        let result = self.run(opts)?;
        let id = ExperimentId::Fig4;
        let mut table = Table::new(
            id,
            opts.seed,
            &["rho", "theta", "structure", "welfare", "stable"],
        );
        for r in &result.rows {
            table.push(vec![
                fmt(r.rho),
                fmt(r.theta),
                r.structure.name().to_string(),
                fmt(r.welfare),
                u8::from(r.stable).to_string(),
            ]);
        }
        let mut manifest = Manifest::new(
            id,
            opts.seed,
            "Welfare and stability of the positive assortative and complete networks over the high-type share and low-type productivity",
        )
        .grid("n", self.n)
        .grid("rho", &self.rhos)
        .grid("theta", &self.thetas);
        manifest.columns = columns(&[
            ("rho", "share of high-type firms"),
            ("theta", "low-type productivity"),
            ("structure", "pa or complete"),
            ("welfare", "consumer plus producer surplus"),
            ("stable", "1 if the network is pairwise stable"),
        ]);
        manifest.notes = vec![
            "the theta = 0.1 slice of this table is the welfare-versus-rho comparison".into(),
            "no randomness is used; the seed is recorded for uniformity".into(),
        ];
        Ok(ExperimentOutput {
            table,
            raw: None,
            manifest,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigA1Config {
    pub clique_a: usize,
    pub clique_b: usize,
    pub thetas: Vec<f64>,
}

impl Default for FigA1Config {
    fn default() -> Self {
        Self {
            clique_a: 5,
            clique_b: 5,
            thetas: vec![0.1, 0.5, 0.9],
        }
    }
}

/// Profit of the firm upgraded to productivity 1 at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigA1Row {
    pub theta: f64,
    /// High-type share after the upgrade.
    pub rho: f64,
    pub firm: usize,
    pub profit_before: f64,
    pub profit_after: f64,
    pub delta: f64,
}

impl FigA1Config {
    pub fn run(&self, opts: &RunOptions) -> Result<Vec<FigA1Row>> {
        check_grid("theta", &self.thetas)?;
        let n = self.clique_a + self.clique_b;
        if n < 2 {
            return Err(Error::InvalidSpec("needs at least two firms".into()));
        }
        let net = Network::two_clique(self.clique_a, self.clique_b);
        let params = MarketParams::unit_markup(phi_at_bound(n));
        let cells: Vec<(f64, usize)> = self
            .thetas
            .iter()
            .flat_map(|&t| (1..=n).map(move |k| (t, k)))
            .collect();
        with_pool(opts.threads, || {
            cells
                .par_iter()
                .map(|&(theta, k)| {
                    let firm = k - 1;
                    let before: Vec<f64> = (0..n).map(|i| if i < firm { 1.0 } else { theta }).collect();
                    let mut after = before.clone();
                    after[firm] = 1.0;
                    let p0 = equilibrium(&net, &Instance::new(params, before)?)?.profits[firm];
                    let p1 = equilibrium(&net, &Instance::new(params, after)?)?.profits[firm];
                    Ok(FigA1Row {
                        theta,
                        rho: k as f64 / n as f64,
                        firm,
                        profit_before: p0,
                        profit_after: p1,
                        delta: p1 - p0,
                    })
                })
                .collect()
        })?
    }

    pub fn output(&self, opts: &RunOptions) -> Result<ExperimentOutput> {
        let rows = self.run(opts)?;
        let id = ExperimentId::FigA1;
        let mut table = Table::new(
            id,
            opts.seed,
            &["theta", "rho", "firm", "profit_before", "profit_after", "delta"],
        );
        for r in &rows {
            table.push(vec![
                fmt(r.theta),
                fmt(r.rho),
                r.firm.to_string(),
                fmt(r.profit_before),
                fmt(r.profit_after),
                fmt(r.delta),
            ]);
        }
        let mut manifest = Manifest::new(
            id,
            opts.seed,
            "Profit change of a firm upgraded from low productivity to 1, one firm per step, under a fixed two-clique network",
        )
        .grid("clique_sizes", [self.clique_a, self.clique_b])
        .grid("theta", &self.thetas);
        manifest.columns = columns(&[
            ("theta", "low productivity before the upgrade"),
            ("rho", "share of firms at productivity 1 after this step"),
            ("firm", "index of the upgraded firm; firms are upgraded in index order, first clique first"),
            ("profit_before", "its profit before the upgrade"),
            ("profit_after", "its profit after the upgrade"),
            ("delta", "profit_after - profit_before"),
        ]);
        manifest.notes = vec!["no randomness is used; the seed is recorded for uniformity".into()];
        Ok(ExperimentOutput {
            table,
            raw: None,
            manifest,
        })
    }
}
