use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rdnet_core::equilibrium::{equilibrium, phi_lower_bound};
use rdnet_core::stability::{
    enumerate_stable, is_pairwise_stable, stability_region, PhiAxis, StructureFamily,
    STABILITY_TOL,
};
use rdnet_core::{FirmType, Instance, InstanceFile, MarketParams, Network, TwoTypeConfig};
use rdnet_experiments::output::{geom_grid, phi_at_bound, with_pool};
use rdnet_experiments::{ExperimentId, RunOptions, DEFAULT_SEED};
use serde::Serialize;

use crate::failure::Failure;
use crate::{
    CheckArgs, EnumerateArgs, ExperimentArgs, InstanceArgs, RegionArgs, RegionStructure, SolveArgs,
};

type Result<T> = std::result::Result<T, Failure>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |source| Failure::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(io_err(&path))?;
    Ok(path)
}

fn parse_triple(text: &str, what: &str) -> Result<(String, String, String)> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => Ok((a.to_string(), b.to_string(), c.to_string())),
        _ => Err(Failure::Invalid(format!("{what} must look like A:B:C, got `{text}`"))),
    }
}

fn number<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Failure::Invalid(format!("{what}: cannot parse `{text}`")))
}

/// The instance plus its two-type layout when one is known.
pub fn load_instance(args: &InstanceArgs) -> Result<(Instance, Option<TwoTypeConfig>)> {
    if let Some(path) = &args.instance {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let file: InstanceFile = serde_json::from_str(&text).map_err(|e| {
            Failure::Invalid(format!("{}: malformed instance JSON: {e}", path.display()))
        })?;
        let inst = file.validate()?;
        return Ok((inst, file.two_type_config()?));
    }
    if let Some(spec) = &args.two_type {
        let (n, rho, theta) = parse_triple(spec, "--two-type")?;
        let cfg = TwoTypeConfig::new(
            number(&n, "n")?,
            number(&rho, "rho")?,
            number(&theta, "theta")?,
        )?;
        let phi = args.phi.unwrap_or_else(|| phi_at_bound(cfg.n()));
        let inst = Instance::two_type(MarketParams::unit_markup(phi), &cfg)?;
        return Ok((inst, Some(cfg)));
    }
    Err(Failure::Invalid("give --instance <path> or --two-type N:RHO:THETA".into()))
}

/// High type for firms at the top productivity, low for the rest.
fn types_for(inst: &Instance, two_type: Option<&TwoTypeConfig>) -> Vec<FirmType> {
    if let Some(cfg) = two_type {
        if cfg.n() == inst.n() {
            return cfg.types();
        }
    }
    let top = inst.thetas().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    inst.thetas()
        .iter()
        .map(|&t| if t == top { FirmType::High } else { FirmType::Low })
        .collect()
}

pub fn parse_network(
    spec: &str,
    inst: &Instance,
    two_type: Option<&TwoTypeConfig>,
    seed: u64,
) -> Result<Network> {
    let n = inst.n();
    let net = match spec {
        "complete" => Network::complete(n),
        "empty" => Network::empty(n),
        "pa" => Network::positive_assortative(&types_for(inst, two_type)),
        _ => {
            if let Some(ell) = spec.strip_prefix("er:") {
                let ell: f64 = number(ell, "link probability")?;
                if !(0.0..=1.0).contains(&ell) {
                    return Err(Failure::Invalid(format!(
                        "link probability {ell} outside [0, 1]"
                    )));
                }
                Network::erdos_renyi(n, ell, seed)
            } else if let Some(path) = spec.strip_prefix("file:") {
                let path = Path::new(path);
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                Network::parse_edge_list(n, &text)?
            } else {
                return Err(Failure::Invalid(format!(
                    "unknown network `{spec}` (complete, empty, pa, er:<l>, file:<path>)"
                )));
            }
        }
    };
    Ok(net)
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    network: &'a Network,
    instance: InstanceFile,
    equilibrium: rdnet_core::Equilibrium,
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    let (inst, two_type) = load_instance(&args.instance)?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let net = parse_network(&args.network, &inst, two_type.as_ref(), seed)?;
    let eq = equilibrium(&net, &inst)?;
    println!(
        "welfare {:.8} (consumer surplus {:.8}, producer surplus {:.8})",
        eq.welfare, eq.consumer_surplus, eq.producer_surplus
    );
    let out = SolveOutput {
        network: &net,
        instance: InstanceFile::from_instance(&inst),
        equilibrium: eq,
    };
    let mut text = serde_json::to_string_pretty(&out).map_err(|e| Failure::Invalid(e.to_string()))?;
    text.push('\n');
    let path = write_output(&args.out, "equilibrium.json", text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn check(args: &CheckArgs) -> Result<()> {
    let (inst, two_type) = load_instance(&args.instance)?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let net = parse_network(&args.network, &inst, two_type.as_ref(), seed)?;
    let report = is_pairwise_stable(&net, &inst, STABILITY_TOL)?;
    if report.stable {
        println!("stable=true");
    } else {
        println!("stable=false ({} blocking)", report.blocking.len());
        for b in &report.blocking {
            println!("  {}-{} {:?}", b.pair.0, b.pair.1, b.reason);
        }
    }
    let mut text =
        serde_json::to_string_pretty(&report).map_err(|e| Failure::Invalid(e.to_string()))?;
    text.push('\n');
    write_output(&args.out, "stability.json", text.as_bytes())?;
    Ok(())
}

pub fn enumerate(args: &EnumerateArgs) -> Result<()> {
    let (inst, _) = load_instance(&args.instance)?;
    let reports = with_pool(args.threads, || {
        enumerate_stable(&inst, args.dedup, STABILITY_TOL)
    })??;
    let mut csv = String::from("network_id,edge_list,stable,n_blocking\n");
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.network.to_mask(),
            r.network.edge_string(),
            u8::from(r.stable),
            r.blocking.len()
        );
    }
    let stable = reports.iter().filter(|r| r.stable).count();
    println!("{stable} of {} networks stable", reports.len());
    write_output(&args.out, "enumeration.csv", csv.as_bytes())?;
    Ok(())
}

fn linear_grid(spec: &str) -> Result<Vec<f64>> {
    let (lo, hi, k) = parse_triple(spec, "grid")?;
    let (lo, hi, k): (f64, f64, usize) = (number(&lo, "grid")?, number(&hi, "grid")?, number(&k, "grid")?);
    if k == 0 {
        return Err(Failure::Invalid("grid needs at least one point".into()));
    }
    if k == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
        .collect())
}

fn log_grid(spec: &str) -> Result<Vec<f64>> {
    let (lo, hi, k) = parse_triple(spec, "grid")?;
    let (lo, hi, k): (f64, f64, usize) = (number(&lo, "grid")?, number(&hi, "grid")?, number(&k, "grid")?);
    if k == 0 || !(lo > 0.0 && hi > 0.0) {
        return Err(Failure::Invalid(
            "log grid needs positive ends and at least one point".into(),
        ));
    }
    Ok(geom_grid(lo, hi, k))
}

pub fn region(args: &RegionArgs) -> Result<()> {
    let thetas = linear_grid(&args.thetas)?;
    let scale = if args.per_firm { args.n as f64 } else { 1.0 };
    let phis = match &args.phis {
        Some(spec) => log_grid(spec)?,
        None => geom_grid(
            phi_at_bound(args.n) / scale,
            10.0 * phi_lower_bound(args.n) / scale,
            101,
        ),
    };
    let family = match args.structure {
        RegionStructure::Complete => StructureFamily::Complete,
        RegionStructure::Pa => StructureFamily::PositiveAssortative,
    };
    let axis = if args.per_firm {
        PhiAxis::PerFirm
    } else {
        PhiAxis::Absolute
    };
    let region = with_pool(args.threads, || {
        stability_region(
            &family,
            args.n,
            args.rho,
            &thetas,
            &phis,
            axis,
            MarketParams::unit_markup(1.0),
        )
    })??;
    let cells = thetas.len() * phis.len();
    let stable = region.mask.iter().flatten().filter(|&&s| s).count();
    println!("stable at {stable} of {cells} grid points");
    write_output(&args.out, "region.csv", region.to_csv().as_bytes())?;
    Ok(())
}

pub fn experiment(args: &ExperimentArgs) -> Result<()> {
    let id: ExperimentId = args.id.parse()?;
    let opts = RunOptions {
        seed: args.seed.unwrap_or(DEFAULT_SEED),
        threads: args.threads,
        raw: args.raw,
    };
    let out = rdnet_experiments::run(id, &opts)?;
    for path in out.write_to(&args.out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
