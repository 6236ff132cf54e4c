//! `thinpart`: spectra, nodal domains and minimal partitions of thin strips
//! and annuli from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thinpart::catalog::{annulus_spectrum_round_cover, cylinder_spectrum, Bc, BcPair, PI2};
use thinpart::config::{Config, Kind, Width};
use thinpart::discretization::{assemble, DomainKind, Grid};
use thinpart::eigen::{lowest_eigenpairs, EigenOptions};
use thinpart::export::{self, Artifacts};
use thinpart::nodal::{courant_sharp_check, nodal_domains, CourantOptions};
use thinpart::partition::{compare_with_theory, iterate, Init, SearchOptions};
use thinpart::verify::{list_scenarios, run_scenario};
use thinpart::Error;

const EXIT_CLAIM: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "thinpart", version, about = "Laplacian spectra, nodal domains and minimal partitions on thin strips and annuli")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact strip spectrum, or the radial spectrum of a round annulus.
    Spectrum(Run),
    /// Lowest finite-volume eigenpairs.
    Solve(Run),
    /// Nodal domains of the computed eigenfunctions and a Courant-sharpness
    /// check of eigenvalue `--k`.
    Nodal(Run),
    /// Search for a spectral minimal `--k`-partition.
    Partition {
        #[command(flatten)]
        run: Run,
        /// Also start from `k` stacked bands.
        #[arg(long)]
        bands: bool,
    },
    /// Run verification scenarios.
    Verify {
        /// Scenario ids; all scenarios when empty.
        scenarios: Vec<String>,
        #[command(flatten)]
        run: Run,
    },
    /// List verification scenarios.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Strip,
    Annulus,
}

#[derive(Args)]
struct Run {
    /// TOML file with run keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "thinpart-out")]
    out_dir: PathBuf,
    /// Width, as a decimal or an exact fraction such as 3/10.
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    ntheta: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Covering degree: 1 for the domain, 2 for its double cover.
    #[arg(long)]
    degree: Option<u32>,
    /// Boundary conditions bottom then top (inner then outer), e.g. NN or DN.
    #[arg(long)]
    bc: Option<String>,
    /// Number of eigenvalues.
    #[arg(long)]
    count: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Run {
    fn config(&self) -> thinpart::Result<Config> {
        let base = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let (bc_bottom, bc_top) = match &self.bc {
            Some(code) => {
                let pair = parse_bc(code)?;
                (Some(pair.bottom), Some(pair.top))
            }
            None => (None, None),
        };
        Ok(base.overlay(Config {
            kind: self.kind.map(|k| match k {
                KindArg::Strip => Kind::Strip,
                KindArg::Annulus => Kind::Annulus,
            }),
            b: self.b.clone().map(Width::Text),
            degree: self.degree,
            ntheta: self.ntheta,
            nt: self.nt,
            bc_bottom,
            bc_top,
            k: self.k,
            restarts: self.restarts,
            seed: self.seed,
            tol: self.tol,
            count: self.count,
            ..Config::default()
        }))
    }
}

fn parse_bc(code: &str) -> thinpart::Result<BcPair> {
    let letter = |c: char| match c.to_ascii_uppercase() {
        'N' => Ok(Bc::Neumann),
        'D' => Ok(Bc::Dirichlet),
        _ => Err(Error::Config(format!("boundary code {code:?} must use N and D"))),
    };
    let chars: Vec<char> = code.chars().collect();
    match chars.as_slice() {
        [a, b] => Ok(BcPair::new(letter(*a)?, letter(*b)?)),
        _ => Err(Error::Config(format!("boundary code {code:?} must have two letters"))),
    }
}

fn eigen_options(cfg: &Config) -> EigenOptions {
    let mut opts = EigenOptions::default();
    if let Some(tol) = cfg.tol {
        opts.tol = tol;
    }
    if let Some(seed) = cfg.seed {
        opts.seed = seed;
    }
    opts
}

fn grid(cfg: &Config) -> thinpart::Result<Grid> {
    let (ntheta, nt) = cfg.grid_size()?;
    Grid::new(cfg.domain()?, ntheta, nt)
}

enum Outcome {
    Done,
    ClaimFailed,
}

fn spectrum(cfg: &Config, out: &mut Artifacts) -> thinpart::Result<Outcome> {
    let count = cfg.count.unwrap_or(10);
    let degree = cfg.degree.unwrap_or(1);
    let bc = cfg.bc();
    match cfg.domain()?.kind {
        DomainKind::CylinderStrip { .. } => {
            let entries = cylinder_spectrum(cfg.width()?, degree, bc, count)?;
            println!("value/pi^2  multiplicity  modes (m, n)  deck");
            for e in &entries {
                println!("{:>10}  {:>12}  {:?}  {}", e.value_over_pi2.to_string(), e.multiplicity, e.modes, e.deck_class.as_str());
            }
            out.write("spectrum.csv", export::spectrum_csv(&entries))?;
        }
        DomainKind::Annulus { b, h1, h2, .. } => {
            if !(h1.is_constant() && h2.is_constant()) {
                return Err(Error::Config("the radial spectrum needs a round annulus".into()));
            }
            let (r_in, r_out) = (1.0 + b * h1.value(0.0), 1.0 + b * h2.value(0.0));
            let values = annulus_spectrum_round_cover(r_in, r_out, bc, degree, count)?;
            println!("index  value  angular_mode  radial_index");
            for (j, v) in values.iter().enumerate() {
                println!("{:>5}  {:.10}  {:>12}  {:>12}", j + 1, v.value, v.angular_mode, v.radial_index);
            }
            out.write("radial.csv", export::radial_csv(&values))?;
        }
    }
    Ok(Outcome::Done)
}

fn solve(cfg: &Config, out: &mut Artifacts) -> thinpart::Result<Outcome> {
    let grid = grid(cfg)?;
    let op = assemble(&grid, cfg.bc());
    let pairs = lowest_eigenpairs(&op, cfg.count.unwrap_or(6), &eigen_options(cfg))?;
    println!("index  value  value/pi^2  residual");
    for (j, p) in pairs.iter().enumerate() {
        println!("{:>5}  {:.10}  {:.8}  {:.2e}", j + 1, p.value, p.value / PI2, p.residual);
        out.write(
            &format!("mode_{:03}.csv", j + 1),
            export::grid_csv(grid.ntheta, grid.nt, &op.to_grid_field(&p.vector))?,
        )?;
    }
    let (values, residuals): (Vec<f64>, Vec<f64>) = pairs.iter().map(|p| (p.value, p.residual)).unzip();
    out.write("eigenvalues.csv", export::eigenvalues_csv(&values, &residuals))?;
    Ok(Outcome::Done)
}

fn nodal(cfg: &Config, out: &mut Artifacts) -> thinpart::Result<Outcome> {
    let k = cfg.k.ok_or_else(|| Error::Config("`k` (the eigenvalue index) is required".into()))?;
    let grid = grid(cfg)?;
    let op = assemble(&grid, cfg.bc());
    let opts = CourantOptions {
        eigen: eigen_options(cfg),
        ..CourantOptions::default()
    };
    let report = courant_sharp_check(&op, &grid, k, &opts)?;
    println!("index  value/pi^2  nodal domains");
    for (j, (v, c)) in report.values.iter().zip(&report.counts).enumerate() {
        println!("{:>5}  {:.8}  {:>5}", j + 1, v / PI2, c);
    }
    println!(
        "lambda_{k}: cluster {}..{}, largest sampled count {}, witness {}",
        report.cluster.start + 1,
        report.cluster.end,
        report.max_sampled,
        match &report.witness {
            Some(w) => format!("basis {:?} at angle {:.4}", w.basis, w.angle),
            None => "none".into(),
        }
    );
    if report.ambiguous {
        println!("warning: the cluster edge of lambda_{k} is within the ambiguity tolerance");
    }
    out.write_json("courant.json", &report)?;
    if let Some(w) = &report.witness_field {
        let nodal = nodal_domains(w, &grid, opts.dead_band)?;
        out.write("witness.csv", export::grid_csv(grid.ntheta, grid.nt, w)?)?;
        out.write("witness_nodal.pgm", export::labels_pgm(grid.ntheta, grid.nt, &nodal.labels)?)?;
    }
    Ok(Outcome::Done)
}

fn partition(cfg: &Config, bands: bool, out: &mut Artifacts) -> thinpart::Result<Outcome> {
    let k = cfg.k.unwrap_or(3);
    let grid = grid(cfg)?;
    let bc = cfg.bc();
    let mut inits = Init::standard(cfg.restarts.unwrap_or(8), cfg.seed.unwrap_or(2011));
    if bands {
        inits.insert(1, Init::EqualBands);
    }
    let mut opts = SearchOptions::default();
    if let Some(tol) = cfg.tol {
        opts.eigen.tol = tol;
    }
    if let Some(seed) = cfg.seed {
        opts.eigen.seed = seed;
    }
    let state = iterate(&grid, bc, k, &inits, &opts)?;
    println!(
        "Lambda = {:.10} = {:.6} pi^2 (run {}, {:?}, {} sweeps)",
        state.lambda,
        state.lambda / PI2,
        state.run,
        state.init,
        state.history.len()
    );
    for (i, e) in state.energies.iter().enumerate() {
        println!("  part {i}: {:.6} pi^2", e / PI2);
    }
    export::write_partition(out, "", &state, &grid)?;
    if matches!(grid.domain.kind, DomainKind::CylinderStrip { degree: 1, .. }) && bc == BcPair::NN {
        let cmp = compare_with_theory(&state, &grid, cfg.width()?)?;
        if let Some(p) = cmp.predicted_over_pi2 {
            println!(
                "{} {p:.6} pi^2, relative difference {:+.4}",
                if cmp.predicted_is_exact { "known value" } else { "known bound" },
                cmp.relative_error.unwrap_or(f64::NAN)
            );
        }
        out.write_json("comparison.json", &cmp)?;
    }
    Ok(Outcome::Done)
}

fn verify(ids: &[String], cfg: &Config, out_dir: &Path) -> thinpart::Result<Outcome> {
    let ids: Vec<String> = if ids.is_empty() {
        list_scenarios().iter().map(|s| s.id.to_string()).collect()
    } else {
        ids.to_vec()
    };
    if let Some(bad) = ids.iter().find(|id| !list_scenarios().iter().any(|s| s.id == id.as_str())) {
        return Err(Error::InvalidArgument(format!("unknown scenario {bad:?}; see `thinpart list`")));
    }
    let mut passed = Vec::new();
    for id in &ids {
        let mut artifacts = Artifacts::new(out_dir.join(id))?;
        let mut report = run_scenario(id, cfg, Some(&mut artifacts))?;
        report.artifacts.push("report.json".into());
        artifacts.write_json("report.json", &report)?;
        artifacts.finish()?;
        print!("{}", report.render());
        passed.push(report.passed());
    }
    Ok(if passed.iter().all(|&p| p) {
        Outcome::Done
    } else {
        Outcome::ClaimFailed
    })
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NumericalFailure { .. } | Error::Structural(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn execute(command: Command) -> thinpart::Result<Outcome> {
    let (run, action): (&Run, _) = match &command {
        Command::List => {
            for s in list_scenarios() {
                println!("{:<18} {}", s.id, s.anchor);
            }
            return Ok(Outcome::Done);
        }
        Command::Spectrum(run) | Command::Solve(run) | Command::Nodal(run) => (run, &command),
        Command::Partition { run, .. } | Command::Verify { run, .. } => (run, &command),
    };
    if let Some(jobs) = run.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {jobs} workers: {e}")))?;
    }
    let cfg = run.config()?;
    if let Command::Verify { scenarios, .. } = action {
        return verify(scenarios, &cfg, &run.out_dir);
    }
    let mut out = Artifacts::new(&run.out_dir)?;
    out.write_json("config.json", &cfg)?;
    let outcome = match action {
        Command::Spectrum(_) => spectrum(&cfg, &mut out)?,
        Command::Solve(_) => solve(&cfg, &mut out)?,
        Command::Nodal(_) => nodal(&cfg, &mut out)?,
        Command::Partition { bands, .. } => partition(&cfg, *bands, &mut out)?,
        Command::List | Command::Verify { .. } => unreachable!("handled above"),
    };
    let manifest = out.finish()?;
    eprintln!("wrote {}", manifest.display());
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::ClaimFailed) => ExitCode::from(EXIT_CLAIM),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
