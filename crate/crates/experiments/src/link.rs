//! Profit effect of a single link inside random networks with random
//! productivity draws.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use rdnet_core::equilibrium::equilibrium;
use rdnet_core::model::MIN_THETA;
use rdnet_core::rng::cell_stream;
use rdnet_core::{Instance, MarketParams, Network};

use crate::error::{Error, Result};
use crate::output::{
    check_grid, check_replications, columns, fmt, mean_sd, phi_at_bound, with_pool,
    ExperimentOutput, Manifest, Table,
};
use crate::{ExperimentId, RunOptions};

/// Cell namespaces so productivity and network draws never share a stream.
const AMBIENT_STREAM: u64 = 0;
const NETWORK_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Config {
    pub n: usize,
    /// Symmetric Beta shape parameters; ambient productivities are Beta(a, a).
    pub beta_shapes: Vec<f64>,
    pub ells: Vec<f64>,
    pub theta_is: Vec<f64>,
    /// The partner grid is `theta_i * k / points` for `k = 1..=points`.
    pub theta_j_points: usize,
    pub replications: usize,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            n: 20,
            beta_shapes: vec![0.5, 1.0, 2.0],
            ells: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            theta_is: vec![0.25, 0.5, 0.75],
            theta_j_points: 20,
            replications: 200,
        }
    }
}

/// Averaged percentage profit changes for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Row {
    pub beta_a: f64,
    pub ell: f64,
    pub theta_i: f64,
    pub theta_j: f64,
    pub pct_change_i: f64,
    pub sd_i: f64,
    pub pct_change_j: f64,
    pub sd_j: f64,
    pub samples: usize,
    /// Per-replication `(pct_i, pct_j)`.
    pub draws: Vec<(f64, f64)>,
}

/// Draws `n` productivities from Beta(a, a), redrawing values outside
/// `[MIN_THETA, 1]`.
pub fn draw_productivities<R: Rng + ?Sized>(n: usize, a: f64, rng: &mut R) -> Result<Vec<f64>> {
    let beta = Beta::new(a, a).map_err(|e| Error::InvalidSpec(format!("Beta({a}, {a}): {e}")))?;
    Ok((0..n)
        .map(|_| loop {
            let x: f64 = beta.sample(rng);
            if (MIN_THETA..=1.0).contains(&x) {
                break x;
            }
        })
        .collect())
}

/// `100 * (pi(G + ij) - pi(G - ij)) / pi(G - ij)` for both endpoints.
pub fn pct_link_effect(net: &Network, inst: &Instance, i: usize, j: usize) -> Result<(f64, f64)> {
    let with = equilibrium(&net.with_link(i, j), inst)?.profits;
    let without = equilibrium(&net.without_link(i, j), inst)?.profits;
    Ok((
        100.0 * (with[i] - without[i]) / without[i],
        100.0 * (with[j] - without[j]) / without[j],
    ))
}

impl Fig1Config {
    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidSpec("n must be at least 3".into()));
        }
        check_grid("beta shape", &self.beta_shapes)?;
        check_grid("ell", &self.ells)?;
        check_grid("theta_i", &self.theta_is)?;
        if self.theta_j_points == 0 {
            return Err(Error::InvalidSpec("theta_j grid is empty".into()));
        }
        check_replications(self.replications)
    }

    pub fn theta_j_grid(&self, theta_i: f64) -> Vec<f64> {
        let p = self.theta_j_points as f64;
        (1..=self.theta_j_points)
            .map(|k| theta_i * k as f64 / p)
            .collect()
    }

    pub fn run(&self, opts: &RunOptions) -> Result<Vec<Fig1Row>> {
        self.validate()?;
        with_pool(opts.threads, || self.run_inner(opts.seed))?
    }

    fn run_inner(&self, seed: u64) -> Result<Vec<Fig1Row>> {
        let reps = self.replications;
        let params = MarketParams::unit_markup(phi_at_bound(self.n));
        let ambient: Vec<Vec<Vec<f64>>> = self
            .beta_shapes
            .iter()
            .enumerate()
            .map(|(d, &a)| {
                (0..reps)
                    .into_par_iter()
                    .map(|r| {
                        let mut rng = cell_stream(seed, AMBIENT_STREAM | d as u64, r as u64);
                        draw_productivities(self.n, a, &mut rng)
                    })
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let networks: Vec<Vec<Network>> = self
            .ells
            .iter()
            .enumerate()
            .map(|(e, &ell)| {
                (0..reps)
                    .into_par_iter()
                    .map(|r| {
                        let mut rng = cell_stream(seed, NETWORK_STREAM | e as u64, r as u64);
                        Network::erdos_renyi_with(self.n, ell, &mut rng)
                    })
                    .collect()
            })
            .collect();

        let mut tasks = Vec::new();
        for d in 0..self.beta_shapes.len() {
            for e in 0..self.ells.len() {
                for &theta_i in &self.theta_is {
                    for theta_j in self.theta_j_grid(theta_i) {
                        tasks.push((d, e, theta_i, theta_j));
                    }
                }
            }
        }
        tasks
            .par_iter()
            .map(|&(d, e, theta_i, theta_j)| {
                let draws = (0..reps)
                    .map(|r| {
                        let mut th = ambient[d][r].clone();
                        th[0] = theta_i;
                        th[1] = theta_j;
                        let inst = Instance::new(params, th)?;
                        pct_link_effect(&networks[e][r], &inst, 0, 1)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (mi, si) = mean_sd(&draws.iter().map(|x| x.0).collect::<Vec<_>>());
                let (mj, sj) = mean_sd(&draws.iter().map(|x| x.1).collect::<Vec<_>>());
                Ok(Fig1Row {
                    beta_a: self.beta_shapes[d],
                    ell: self.ells[e],
                    theta_i,
                    theta_j,
                    pct_change_i: mi,
                    sd_i: si,
                    pct_change_j: mj,
                    sd_j: sj,
                    samples: reps,
                    draws,
                })
            })
            .collect()
    }

    pub fn output(&self, opts: &RunOptions) -> Result<ExperimentOutput> {
        let rows = self.run(opts)?;
        let id = ExperimentId::Fig1;
        let mut table = Table::new(
            id,
            opts.seed,
            &[
                "beta_a", "beta_b", "ell", "theta_i", "theta_j", "pct_change_i", "pct_change_j",
                "sd_i", "sd_j", "samples",
            ],
        );
        let mut raw = opts.raw.then(|| {
            Table::new(
                id,
                opts.seed,
                &["beta_a", "beta_b", "ell", "theta_i", "theta_j", "rep", "pct_change_i", "pct_change_j"],
            )
        });
        for row in &rows {
            let key = [fmt(row.beta_a), fmt(row.beta_a), fmt(row.ell), fmt(row.theta_i), fmt(row.theta_j)];
            let mut cells = key.to_vec();
            cells.extend([
                fmt(row.pct_change_i),
                fmt(row.pct_change_j),
                fmt(row.sd_i),
                fmt(row.sd_j),
                row.samples.to_string(),
            ]);
            table.push(cells);
            if let Some(raw) = raw.as_mut() {
                for (r, (pi, pj)) in row.draws.iter().enumerate() {
                    let mut cells = key.to_vec();
                    cells.extend([r.to_string(), fmt(*pi), fmt(*pj)]);
                    raw.push(cells);
                }
            }
        }
        let mut manifest = Manifest::new(
            id,
            opts.seed,
            "Percentage profit change of a focal pair (firms 0 and 1) from adding their link, inside Erdos-Renyi networks with Beta-distributed productivities of the other firms",
        )
        .grid("n", self.n)
        .grid("beta_shapes", &self.beta_shapes)
        .grid("ell", &self.ells)
        .grid("theta_i", &self.theta_is)
        .grid("theta_j", "theta_i * k / theta_j_points, k = 1..=theta_j_points")
        .grid("theta_j_points", self.theta_j_points);
        manifest.replications = Some(self.replications);
        manifest.columns = columns(&[
            ("beta_a", "first Beta shape parameter of the ambient productivity draw"),
            ("beta_b", "second Beta shape parameter (equal to beta_a)"),
            ("ell", "Erdos-Renyi link probability"),
            ("theta_i", "productivity of the higher-productivity focal firm"),
            ("theta_j", "productivity of the lower-productivity focal firm"),
            ("pct_change_i", "mean of 100 * (pi_i(G+ij) - pi_i(G-ij)) / pi_i(G-ij)"),
            ("pct_change_j", "same for firm j"),
            ("sd_i", "unbiased standard deviation of pct_change_i across replications"),
            ("sd_j", "unbiased standard deviation of pct_change_j across replications"),
            ("samples", "replications averaged"),
        ]);
        if raw.is_some() {
            manifest.raw_columns = Some(columns(&[
                ("rep", "replication index"),
                ("pct_change_i", "percentage profit change of firm i in this replication"),
                ("pct_change_j", "percentage profit change of firm j in this replication"),
            ]));
        }
        manifest.notes = vec![
            "one productivity draw per (Beta shape, replication), reused across ell, theta_i and theta_j".into(),
            "one network draw per (ell, replication), reused across Beta shapes and productivities".into(),
            format!("Beta draws outside [{MIN_THETA}, 1] are redrawn"),
            "ambient productivities are raw draws (normalized = false); no rescaling to max 1".into(),
        ];
        Ok(ExperimentOutput {
            table,
            raw,
            manifest,
        })
    }
}
