use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lnqmc::covariance::CovarianceModel;
use lnqmc::embedding::{compute_bj, minimal_embedding, qmc_criterion, read_embedding, write_embedding, Embedding, GridSpec};
use lnqmc::estimators::{convergence_study, write_csv, ProblemInstance, Schedule};
use lnqmc::fem::{structured_mesh, BoxRegion, Domain};
use lnqmc::lattice::{b_hash, cbc_construct, GvFile, WeightSetup};

mod config;

use config::{MethodKind, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Stale(String),
    #[error(transparent)]
    Core(#[from] lnqmc::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Stale(_) => "stale_artifact",
            CliError::Core(e) => e.kind(),
        }
    }
}

#[derive(Parser)]
#[command(name = "lnqmc", version, about = "Lognormal diffusion QMC/MC driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    /// Override a config key, e.g. `--set grid.m0=16`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Find the minimal embedding, write it and print a report.
    Embed(Common),
    /// Build one generating vector per configured n.
    Cbc(Common),
    /// Single estimate at the last configured n; writes a one-row CSV.
    Run(Common),
    /// Estimate at every configured n; writes the CSV.
    Study(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
            eprintln!("error: {}: {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<String, CliError> {
    let (common, run): (&Common, fn(&RunConfig) -> Result<String, CliError>) = match &cmd {
        Command::Embed(c) => (c, cmd_embed),
        Command::Cbc(c) => (c, cmd_cbc),
        Command::Run(c) => (c, |cfg| cmd_study(cfg, true)),
        Command::Study(c) => (c, |cfg| cmd_study(cfg, false)),
    };
    let cfg = RunConfig::load(&common.config, &common.overrides)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    run(&cfg)
}

fn model(cfg: &RunConfig) -> Result<(GridSpec, CovarianceModel), CliError> {
    let c = &cfg.covariance;
    Ok((
        GridSpec::new(cfg.grid.m0, cfg.grid.dim)?,
        CovarianceModel::matern(c.variance, c.corr_length, c.smoothness, cfg.grid.dim)?,
    ))
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(lnqmc::Error::from)?;
    }
    Ok(())
}

fn cmd_embed(cfg: &RunConfig) -> Result<String, CliError> {
    let (grid, model) = model(cfg)?;
    let emb = minimal_embedding(&grid, &model, cfg.m_cap())?;
    create_parent(&cfg.output.embedding)?;
    let file = File::create(&cfg.output.embedding).map_err(lnqmc::Error::from)?;
    write_embedding(&emb, BufWriter::new(file))?;
    let v = emb.eigenvalues();
    let mut out = String::new();
    writeln!(out, "d = {}", grid.dim()).unwrap();
    writeln!(out, "m0 = {}", grid.m0()).unwrap();
    writeln!(out, "m = {}", emb.m()).unwrap();
    writeln!(out, "ell = {:?}", emb.ell()).unwrap();
    writeln!(out, "s = {}", emb.s()).unwrap();
    writeln!(out, "min_eigenvalue = {:e}", v.iter().copied().fold(f64::INFINITY, f64::min)).unwrap();
    writeln!(out, "max_eigenvalue = {:e}", v.iter().copied().fold(f64::NEG_INFINITY, f64::max)).unwrap();
    for p in [0.75, 1.0] {
        writeln!(out, "criterion_p{p:?} = {:e}", qmc_criterion(&emb, p)?).unwrap();
    }
    Ok(out)
}

/// Loads the embedding written by `embed` and checks it matches the config.
fn load_embedding(cfg: &RunConfig) -> Result<Embedding, CliError> {
    let path = &cfg.output.embedding;
    let file = File::open(path).map_err(|e| {
        CliError::Config(format!("cannot open embedding {}: {e} (run `embed` first)", path.display()))
    })?;
    let emb = read_embedding(BufReader::new(file))?;
    let (grid, model) = model(cfg)?;
    if *emb.grid() != grid || *emb.model() != model {
        return Err(CliError::Stale(format!(
            "embedding {} was built for a different grid or covariance",
            path.display()
        )));
    }
    Ok(emb)
}

fn require_qmc(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    match cfg.method.kind {
        MethodKind::Qmc => Ok(()),
        MethodKind::Mc => Err(CliError::Config(format!("`{what}` needs method.kind = \"qmc\""))),
    }
}

fn cmd_cbc(cfg: &RunConfig) -> Result<String, CliError> {
    require_qmc(cfg, "cbc")?;
    let emb = load_embedding(cfg)?;
    let b = compute_bj(&emb, cfg.method.bj.into()).sorted();
    let w = WeightSetup::new(&b, cfg.method.kappa)?;
    let hash = b_hash(&b);
    std::fs::create_dir_all(&cfg.output.gv_dir).map_err(lnqmc::Error::from)?;
    let mut out = String::new();
    for &n in &cfg.method.n {
        let gv = cbc_construct(n, emb.s(), &w, cfg.seeds.tail)?;
        writeln!(out, "n = {n} s = {} s_star = {}", gv.s(), gv.s_star()).unwrap();
        let file = GvFile {
            gv,
            kappa: cfg.method.kappa,
            b_hash: hash.clone(),
        };
        file.write(&cfg.gv_path(n))?;
    }
    Ok(out)
}

fn cmd_study(cfg: &RunConfig, single: bool) -> Result<String, CliError> {
    let emb = load_embedding(cfg)?;
    let ns: &[usize] = if single {
        std::slice::from_ref(cfg.method.n.last().unwrap())
    } else {
        &cfg.method.n
    };
    let bj = compute_bj(&emb, cfg.method.bj.into());
    let schedule = match cfg.method.kind {
        MethodKind::Mc => Schedule::Mc { counts: ns.to_vec() },
        MethodKind::Qmc => {
            let hash = b_hash(&bj.sorted());
            let gvs = ns
                .iter()
                .map(|&n| {
                    let path = cfg.gv_path(n);
                    if !path.exists() {
                        return Err(CliError::Config(format!(
                            "missing generating vector {} (run `cbc` first)",
                            path.display()
                        )));
                    }
                    let f = GvFile::read(&path)?;
                    if f.b_hash != hash || f.gv.n() != n || f.gv.s() != emb.s() || f.kappa != cfg.method.kappa {
                        return Err(CliError::Stale(format!(
                            "{} does not match the current embedding, b_j mode or kappa",
                            path.display()
                        )));
                    }
                    Ok(f.gv)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Schedule::Qmc { gvs, q: cfg.method.q }
        }
    };
    let domain = Domain::from_dim(cfg.grid.dim)?;
    let mesh = structured_mesh(domain, cfg.mesh.k)?;
    let region = match (&cfg.mesh.qoi_lo, &cfg.mesh.qoi_hi) {
        (Some(lo), Some(hi)) => BoxRegion::new(lo.clone(), hi.clone())?,
        _ => BoxRegion::unit(cfg.grid.dim),
    };
    let problem = ProblemInstance::new(emb, mesh, region, bj.perm)?.with_mesh_level(cfg.mesh.k);
    let rows = convergence_study(&problem, &schedule, cfg.seeds.master)?;
    create_parent(&cfg.output.csv)?;
    let file = File::create(&cfg.output.csv).map_err(lnqmc::Error::from)?;
    write_csv(&rows, BufWriter::new(file))?;
    let mut out = Vec::new();
    write_csv(&rows, &mut out)?;
    Ok(String::from_utf8(out).expect("csv is utf-8"))
}
