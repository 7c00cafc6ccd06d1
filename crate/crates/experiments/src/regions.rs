//! Stability regions over (theta, phi): every structure class at n = 4, and
//! the positive assortative and complete networks at larger n.

use rdnet_core::equilibrium::phi_lower_bound;
use rdnet_core::graph::{enumerate_networks, MaskCanonicalizer};
use rdnet_core::stability::{stability_region, PhiAxis, StabilityRegion, StructureFamily};
use rdnet_core::{MarketParams, Network, TwoTypeConfig};

use crate::error::{Error, Result};
use crate::output::{
    check_grid, columns, fmt, geom_grid, phi_at_bound, ratio_grid, with_pool, ExperimentOutput,
    Manifest, Table,
};
use crate::{ExperimentId, RunOptions};

const FIG2_N: usize = 4;
const FIG2_RHO: f64 = 0.5;
/// Upper limit on (n, rho, theta, phi) cells in one large-n scan.
pub const MAX_REGION_CELLS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Config {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
}

impl Default for Fig2Config {
    /// Theta step 0.01; phi from the bound to ten times it at 100 points per decade.
    fn default() -> Self {
        Self {
            thetas: ratio_grid(1, 99, 100),
            phis: geom_grid(phi_at_bound(FIG2_N), 10.0 * phi_lower_bound(FIG2_N), 101),
        }
    }
}

impl Fig2Config {
    /// A 50 x 50 grid: theta 0.01..0.99 evenly, phi log-spaced over one decade.
    pub fn coarse() -> Self {
        Self {
            thetas: (0..50).map(|k| f64::from(2 * k + 1) / 100.0).collect(),
            phis: geom_grid(phi_at_bound(FIG2_N), 10.0 * phi_lower_bound(FIG2_N), 50),
        }
    }
}

/// Region of one structure class, identified by its canonical representative.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRegion {
    pub class_id: usize,
    pub network: Network,
    pub region: StabilityRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Result {
    pub classes: Vec<ClassRegion>,
    canon: MaskCanonicalizer,
}

impl Fig2Result {
    pub fn nonempty(&self) -> impl Iterator<Item = &ClassRegion> {
        self.classes.iter().filter(|c| !c.region.is_empty())
    }

    /// The class containing `net` (any labelling with types H H L L).
    pub fn class_of(&self, net: &Network) -> Option<&ClassRegion> {
        let target = self.canon.canonical(net.to_mask());
        self.classes
            .iter()
            .find(|c| c.network.to_mask() == target)
    }
}

impl Fig2Config {
    pub fn run(&self, opts: &RunOptions) -> Result<Fig2Result> {
        check_grid("theta", &self.thetas)?;
        check_grid("phi", &self.phis)?;
        let types = TwoTypeConfig::new(FIG2_N, FIG2_RHO, self.thetas[0])?.types();
        let canon = MaskCanonicalizer::new(&types);
        let nets: Vec<Network> = enumerate_networks(FIG2_N, Some(&types))?.collect();
        let base = MarketParams::unit_markup(1.0);
        let classes = with_pool(opts.threads, || {
            nets.into_iter()
                .enumerate()
                .map(|(class_id, network)| {
                    let region = stability_region(
                        &StructureFamily::Fixed(network.clone()),
                        FIG2_N,
                        FIG2_RHO,
                        &self.thetas,
                        &self.phis,
                        PhiAxis::Absolute,
                        base,
                    )?;
                    Ok(ClassRegion {
                        class_id,
                        network,
                        region,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })??;
        Ok(Fig2Result { classes, canon })
    }

    pub fn output(&self, opts: &RunOptions) -> Result<ExperimentOutput> {
        let result = self.run(opts)?;
        let id = ExperimentId::Fig2;
        let mut table = Table::new(
            id,
            opts.seed,
            &["class_id", "edges", "class_nonempty", "theta", "phi", "stable"],
        );
        for c in &result.classes {
            let edges = c.network.edge_string();
            let nonempty = u8::from(!c.region.is_empty()).to_string();
            for (t, theta) in c.region.thetas.iter().enumerate() {
                for (p, phi) in c.region.phis.iter().enumerate() {
                    table.push(vec![
                        c.class_id.to_string(),
                        edges.clone(),
                        nonempty.clone(),
                        fmt(*theta),
                        fmt(*phi),
                        u8::from(c.region.mask[t][p]).to_string(),
                    ]);
                }
            }
        }
        let mut manifest = Manifest::new(
            id,
            opts.seed,
            "Pairwise stability of every network class on four firms (two high, two low) over low-type productivity and R&D cost",
        )
        .grid("n", FIG2_N)
        .grid("rho", FIG2_RHO)
        .grid("theta", &self.thetas)
        .grid("phi", &self.phis);
        manifest.columns = columns(&[
            ("class_id", "index of the structure class in enumeration order"),
            ("edges", "links of the class representative, firms 0-1 high and 2-3 low"),
            ("class_nonempty", "1 if the class is stable somewhere on the grid"),
            ("theta", "low-type productivity"),
            ("phi", "R&D cost parameter"),
            ("stable", "1 if the network is pairwise stable"),
        ]);
        manifest.notes = vec![
            "classes are networks up to relabelling firms of equal type; the representative has the smallest edge mask".into(),
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
pub struct FigA2Config {
    pub ns: Vec<usize>,
    pub rhos: Vec<f64>,
    pub thetas: Vec<f64>,
    pub phi_over_n: Vec<f64>,
}

impl Default for FigA2Config {
    fn default() -> Self {
        Self {
            ns: vec![5, 10, 20, 50, 100, 200],
            rhos: ratio_grid(1, 9, 10),
            thetas: ratio_grid(1, 19, 20),
            phi_over_n: geom_grid(2.0, 20.0, 10),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeRegion {
    pub n: usize,
    pub rho: f64,
    pub structure: &'static str,
    pub region: StabilityRegion,
}

/// Whether `rho * n` is a whole number of firms.
pub fn feasible(n: usize, rho: f64) -> bool {
    TwoTypeConfig::new(n, rho, 0.5).is_ok()
}

impl FigA2Config {
    fn validate(&self) -> Result<()> {
        check_grid("rho", &self.rhos)?;
        check_grid("theta", &self.thetas)?;
        check_grid("phi/n", &self.phi_over_n)?;
        let ns: Vec<f64> = self.ns.iter().map(|&n| n as f64).collect();
        check_grid("n", &ns)?;
        if self.ns[0] < 2 {
            return Err(Error::InvalidSpec("n must be at least 2".into()));
        }
        let cells = self.ns.len() * self.rhos.len() * self.thetas.len() * self.phi_over_n.len();
        if cells > MAX_REGION_CELLS {
            return Err(Error::InvalidSpec(format!(
                "{cells} grid cells exceed the limit of {MAX_REGION_CELLS}"
            )));
        }
        for &n in &self.ns {
            let floor = phi_lower_bound(n) / n as f64;
            if self.phi_over_n[0] <= floor {
                return Err(Error::InvalidSpec(format!(
                    "phi/n = {} is not above the bound {floor} for n = {n}",
                    self.phi_over_n[0]
                )));
            }
        }
        Ok(())
    }

    pub fn run(&self, opts: &RunOptions) -> Result<Vec<LargeRegion>> {
        self.validate()?;
        let base = MarketParams::unit_markup(1.0);
        with_pool(opts.threads, || {
            let mut out = Vec::new();
            for &n in &self.ns {
                for &rho in &self.rhos {
                    if !feasible(n, rho) {
                        continue;
                    }
                    for (structure, family) in [
                        ("pa", StructureFamily::PositiveAssortative),
                        ("complete", StructureFamily::Complete),
                    ] {
                        let region = stability_region(
                            &family,
                            n,
                            rho,
                            &self.thetas,
                            &self.phi_over_n,
                            PhiAxis::PerFirm,
                            base,
                        )?;
                        out.push(LargeRegion {
                            n,
                            rho,
                            structure,
                            region,
                        });
                    }
                }
            }
            Ok(out)
        })?
    }

    pub fn output(&self, opts: &RunOptions) -> Result<ExperimentOutput> {
        let regions = self.run(opts)?;
        let id = ExperimentId::FigA2;
        let mut table = Table::new(
            id,
            opts.seed,
            &["n", "rho", "theta", "phi_over_n", "structure", "stable"],
        );
        for r in &regions {
            for (t, theta) in r.region.thetas.iter().enumerate() {
                for (p, x) in r.region.phis.iter().enumerate() {
                    table.push(vec![
                        r.n.to_string(),
                        fmt(r.rho),
                        fmt(*theta),
                        fmt(*x),
                        r.structure.to_string(),
                        u8::from(r.region.mask[t][p]).to_string(),
                    ]);
                }
            }
        }
        let skipped: Vec<String> = self
            .ns
            .iter()
            .flat_map(|&n| self.rhos.iter().map(move |&rho| (n, rho)))
            .filter(|&(n, rho)| !feasible(n, rho))
            .map(|(n, rho)| format!("n={n} rho={rho}"))
            .collect();
        let mut manifest = Manifest::new(
            id,
            opts.seed,
            "Pairwise stability of the positive assortative and complete networks for larger economies over low-type productivity and R&D cost per firm",
        )
        .grid("n", &self.ns)
        .grid("rho", &self.rhos)
        .grid("theta", &self.thetas)
        .grid("phi_over_n", &self.phi_over_n);
        manifest.columns = columns(&[
            ("n", "number of firms"),
            ("rho", "share of high-type firms"),
            ("theta", "low-type productivity"),
            ("phi_over_n", "R&D cost parameter divided by n"),
            ("structure", "pa or complete"),
            ("stable", "1 if the network is pairwise stable"),
        ]);
        manifest.notes = vec![
            "deviations are checked for one representative pair per (type, type) combination; both structures are invariant under relabelling firms of equal type".into(),
            format!("combinations with fractional rho * n are skipped: {}", skipped.join(", ")),
        ];
        Ok(ExperimentOutput {
            table,
            raw: None,
            manifest,
        })
    }
}
