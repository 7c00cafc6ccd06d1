//! Welfare of random networks with a fixed number of links, compared with
//! the positive assortative and complete networks.

use rayon::prelude::*;
use rdnet_core::equilibrium::equilibrium;
use rdnet_core::rng::cell_stream;
use rdnet_core::{Instance, Network, TwoTypeConfig};

use crate::error::Result;
use crate::output::{
    check_grid, check_replications, columns, fmt, mean_sd, with_pool, ExperimentOutput, Manifest,
    Table,
};
use crate::structures::Structure;
use crate::{ExperimentId, RunOptions};

/// Cell namespace of the equal-link comparison, apart from the density sweep.
const SAME_LINKS_STREAM: u64 = 1 << 40;

fn instance(n: usize, rho: f64, theta: f64) -> Result<(TwoTypeConfig, Instance)> {
    let cfg = TwoTypeConfig::new(n, rho, theta)?;
    let params = rdnet_core::MarketParams::unit_markup(crate::output::phi_at_bound(n));
    let inst = Instance::two_type(params, &cfg)?;
    Ok((cfg, inst))
}

/// Welfare of `reps` random networks with exactly `m` links.
fn random_welfare(inst: &Instance, m: usize, seed: u64, cell: u64, reps: usize) -> Result<Vec<f64>> {
    (0..reps)
        .map(|r| {
            let mut rng = cell_stream(seed, cell, r as u64);
            let net = Network::random_with_m_links_with(inst.n(), m, &mut rng)?;
            Ok(equilibrium(&net, inst)?.welfare)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig5Config {
    pub n: usize,
    pub rhos: Vec<f64>,
    pub thetas: Vec<f64>,
    pub replications: usize,
}

impl Default for Fig5Config {
    fn default() -> Self {
        Self {
            n: 10,
            rhos: vec![0.2, 0.5, 0.8],
            thetas: vec![0.1, 0.5, 1.0],
            replications: 1000,
        }
    }
}

/// Random-network welfare at one link count.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPoint {
    pub m: usize,
    pub mean: f64,
    pub sd: f64,
    pub draws: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub rho: f64,
    pub theta: f64,
    pub points: Vec<DensityPoint>,
    pub pa_links: usize,
    pub pa_welfare: f64,
    pub complete_welfare: f64,
}

impl DensityCurve {
    /// Link count with the highest mean welfare.
    pub fn argmax(&self) -> usize {
        self.points
            .iter()
            .max_by(|a, b| a.mean.total_cmp(&b.mean))
            .map(|p| p.m)
            .unwrap_or(0)
    }

    pub fn max_mean(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.mean)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Fig5Config {
    pub fn max_links(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn run(&self, opts: &RunOptions) -> Result<Vec<DensityCurve>> {
        check_grid("rho", &self.rhos)?;
        check_grid("theta", &self.thetas)?;
        check_replications(self.replications)?;
        let links = self.max_links() + 1;
        let mut cells = Vec::new();
        for (ri, &rho) in self.rhos.iter().enumerate() {
            for (ti, &theta) in self.thetas.iter().enumerate() {
                for m in 0..links {
                    let cell = ((ri * self.thetas.len() + ti) * links + m) as u64;
                    cells.push((rho, theta, m, cell));
                }
            }
        }
        let points = with_pool(opts.threads, || {
            cells
                .par_iter()
                .map(|&(rho, theta, m, cell)| {
                    let (_, inst) = instance(self.n, rho, theta)?;
                    let draws = random_welfare(&inst, m, opts.seed, cell, self.replications)?;
                    let (mean, sd) = mean_sd(&draws);
                    Ok(DensityPoint { m, mean, sd, draws })
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let mut points = points.into_iter();
        let mut curves = Vec::new();
        for &rho in &self.rhos {
            for &theta in &self.thetas {
                let (cfg, inst) = instance(self.n, rho, theta)?;
                let pa = Structure::PositiveAssortative.network(&cfg.types());
                curves.push(DensityCurve {
                    rho,
                    theta,
                    points: points.by_ref().take(links).collect(),
                    pa_links: pa.edge_count(),
                    pa_welfare: equilibrium(&pa, &inst)?.welfare,
                    complete_welfare: equilibrium(&Network::complete(self.n), &inst)?.welfare,
                });
            }
        }
        Ok(curves)
    }

    pub fn output(&self, opts: &RunOptions) -> Result<ExperimentOutput> {
        let curves = self.run(opts)?;
        let id = ExperimentId::Fig5;
        let mut table = Table::new(
            id,
            opts.seed,
            &["rho", "theta", "structure", "m", "welfare_mean", "welfare_sd", "samples"],
        );
        let mut raw = opts
            .raw
            .then(|| Table::new(id, opts.seed, &["rho", "theta", "m", "rep", "welfare"]));
        for c in &curves {
            let (rho, theta) = (fmt(c.rho), fmt(c.theta));
            for p in &c.points {
                table.push(vec![
                    rho.clone(),
                    theta.clone(),
                    "random".into(),
                    p.m.to_string(),
                    fmt(p.mean),
                    fmt(p.sd),
                    p.draws.len().to_string(),
                ]);
                if let Some(raw) = raw.as_mut() {
                    for (r, w) in p.draws.iter().enumerate() {
                        raw.push(vec![rho.clone(), theta.clone(), p.m.to_string(), r.to_string(), fmt(*w)]);
                    }
                }
            }
            for (name, m, w) in [
                ("pa", c.pa_links, c.pa_welfare),
                ("complete", self.max_links(), c.complete_welfare),
            ] {
                table.push(vec![
                    rho.clone(),
                    theta.clone(),
                    name.into(),
                    m.to_string(),
                    fmt(w),
                    fmt(0.0),
                    "1".into(),
                ]);
            }
        }
        let mut manifest = Manifest::new(
            id,
            opts.seed,
            "Mean welfare of uniformly random networks with m links, for every m, next to the positive assortative and complete networks",
        )
        .grid("n", self.n)
        .grid("rho", &self.rhos)
        .grid("theta", &self.thetas)
        .grid("m", format!("0..={}", self.max_links()));
        manifest.replications = Some(self.replications);
        manifest.columns = columns(&[
            ("rho", "share of high-type firms"),
            ("theta", "low-type productivity"),
            ("structure", "random, pa or complete"),
            ("m", "number of links"),
            ("welfare_mean", "mean welfare over samples (exact value for pa and complete)"),
            ("welfare_sd", "unbiased standard deviation over samples; 0 for pa and complete"),
            ("samples", "number of random networks drawn; 1 for pa and complete"),
        ]);
        if raw.is_some() {
            manifest.raw_columns = Some(columns(&[
                ("rep", "replication index"),
                ("welfare", "welfare of this random network"),
            ]));
        }
        manifest.notes = vec![
            "random networks are drawn uniformly among all networks with exactly m links".into(),
            "each (rho, theta, m) cell has its own random streams".into(),
        ];
        Ok(ExperimentOutput {
            table,
            raw,
            manifest,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig6Config {
    pub n: usize,
    pub rhos: Vec<f64>,
    pub thetas: Vec<f64>,
    pub replications: usize,
}

impl Default for Fig6Config {
    fn default() -> Self {
        Self {
            n: 10,
            rhos: crate::output::ratio_grid(1, 9, 10),
            thetas: vec![0.1, 0.5, 1.0],
            replications: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig6Row {
    pub rho: f64,
    pub theta: f64,
    pub m: usize,
    pub pa_welfare: f64,
    pub random_mean: f64,
    pub random_sd: f64,
    pub draws: Vec<f64>,
}

impl Fig6Row {
    pub fn premium(&self) -> f64 {
        self.pa_welfare - self.random_mean
    }
}

impl Fig6Config {
    pub fn run(&self, opts: &RunOptions) -> Result<Vec<Fig6Row>> {
        check_grid("rho", &self.rhos)?;
        check_grid("theta", &self.thetas)?;
        check_replications(self.replications)?;
        let mut cells = Vec::new();
        for (ti, &theta) in self.thetas.iter().enumerate() {
            for (ri, &rho) in self.rhos.iter().enumerate() {
                let cell = SAME_LINKS_STREAM | (ti * self.rhos.len() + ri) as u64;
                cells.push((rho, theta, cell));
            }
        }
        with_pool(opts.threads, || {
            cells
                .par_iter()
                .map(|&(rho, theta, cell)| {
                    let (cfg, inst) = instance(self.n, rho, theta)?;
                    let pa = Structure::PositiveAssortative.network(&cfg.types());
                    let m = pa.edge_count();
                    let draws = random_welfare(&inst, m, opts.seed, cell, self.replications)?;
                    let (random_mean, random_sd) = mean_sd(&draws);
                    Ok(Fig6Row {
                        rho,
                        theta,
                        m,
                        pa_welfare: equilibrium(&pa, &inst)?.welfare,
                        random_mean,
                        random_sd,
                        draws,
                    })
                })
                .collect()
        })?
    }

    pub fn output(&self, opts: &RunOptions) -> Result<ExperimentOutput> {
        let rows = self.run(opts)?;
        let id = ExperimentId::Fig6;
        let mut table = Table::new(
            id,
            opts.seed,
            &["theta", "rho", "m", "pa_welfare", "random_mean", "random_sd", "samples", "premium"],
        );
        let mut raw = opts
            .raw
            .then(|| Table::new(id, opts.seed, &["theta", "rho", "m", "rep", "welfare"]));
        for r in &rows {
            table.push(vec![
                fmt(r.theta),
                fmt(r.rho),
                r.m.to_string(),
                fmt(r.pa_welfare),
                fmt(r.random_mean),
                fmt(r.random_sd),
                r.draws.len().to_string(),
                fmt(r.premium()),
            ]);
            if let Some(raw) = raw.as_mut() {
                for (k, w) in r.draws.iter().enumerate() {
                    raw.push(vec![fmt(r.theta), fmt(r.rho), r.m.to_string(), k.to_string(), fmt(*w)]);
                }
            }
        }
        let mut manifest = Manifest::new(
            id,
            opts.seed,
            "Welfare of the positive assortative network against random networks with the same number of links",
        )
        .grid("n", self.n)
        .grid("rho", &self.rhos)
        .grid("theta", &self.thetas);
        manifest.replications = Some(self.replications);
        manifest.columns = columns(&[
            ("theta", "low-type productivity"),
            ("rho", "share of high-type firms"),
            ("m", "links in the positive assortative network and in every random draw"),
            ("pa_welfare", "welfare of the positive assortative network"),
            ("random_mean", "mean welfare of random networks with m links"),
            ("random_sd", "unbiased standard deviation of random-network welfare"),
            ("samples", "number of random networks drawn"),
            ("premium", "pa_welfare - random_mean"),
        ]);
        if raw.is_some() {
            manifest.raw_columns = Some(columns(&[
                ("rep", "replication index"),
                ("welfare", "welfare of this random network"),
            ]));
        }
        Ok(ExperimentOutput {
            table,
            raw,
            manifest,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let cfg = Fig5Config {
            rhos: vec![0.5],
            thetas: vec![0.5],
            replications: 3,
            ..Fig5Config::default()
        };
        let curves = cfg.run(&RunOptions::default()).unwrap();
        let c = &curves[0];
        assert_eq!(c.points.len(), 46);
        // only one network has 0 links and only one has 45
        assert!(c.points[0].sd < 1e-12);
        assert!((c.points[45].mean - c.complete_welfare).abs() < 1e-15);
        assert_eq!(c.pa_links, 20);
    }

    #[test]
    fn homogeneous_premium_is_placement_only() {
        let cfg = Fig6Config {
            rhos: vec![0.5],
            thetas: vec![1.0],
            replications: 5,
            ..Fig6Config::default()
        };
        let rows = cfg.run(&RunOptions::default()).unwrap();
        assert_eq!(rows[0].m, 20);
        assert!(rows[0].draws.iter().all(|w| w.is_finite()));
    }
}
