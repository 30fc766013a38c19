use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use center_manifold::blending::{blend, bump_partition, dyadic_grid};
use center_manifold::geometry::{Frame, Region};
use center_manifold::harness::pipeline::cube_interpolant;
use center_manifold::harness::{export, run_pipeline, Check, ExportFormat, RunConfig, SurfaceKind, SurfaceSpec};
use center_manifold::lipschitz::approximate;
use center_manifold::{Error, Result};

/// Center-manifold construction and certification for sampled minimal graphs.
#[derive(Parser)]
#[command(name = "cmfold", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (JSON). Defaults to the Enneper patch with eps = 0.1.
    #[arg(long)]
    config: Option<PathBuf>,
    /// A level `k` or a range `a..b`.
    #[arg(long)]
    k: Option<String>,
    /// Output file, or directory for `run`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated checks: partition, decay, basic_decay, tilt, blend_stability.
    #[arg(long)]
    checks: Option<String>,
}

#[derive(Subcommand)]
enum Verb {
    /// Sample the configured surface.
    Generate(Common),
    /// Lipschitz approximation on the cylinder of the given radius about the origin.
    Approximate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
    },
    /// Interpolant of the cube at the origin.
    Interpolate(Common),
    /// Blended surface of one level; CSV when `--out` ends in `.csv`.
    Blend(Common),
    /// Run the checks and write the report.
    Certify(Common),
    /// Full pipeline: report and blended surfaces, as JSON and CSV.
    Run(Common),
}

fn parse_levels(text: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidConfig(format!("cannot parse level range {text:?}"));
    let parse = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
    match text.split_once("..") {
        Some((a, b)) => Ok((parse(a)?, parse(b.trim_start_matches('='))?)),
        None => {
            let k = parse(text)?;
            Ok((k, k))
        }
    }
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut run = match &common.config {
        Some(path) => RunConfig::from_json(&fs::read_to_string(path)?)?,
        None => RunConfig::new(SurfaceSpec::new(SurfaceKind::Enneper { eps: 0.1 })),
    };
    if let Some(k) = &common.k {
        let (a, b) = parse_levels(k)?;
        run.k_min = Some(a);
        run.k_max = Some(b);
    }
    if let Some(seed) = common.seed {
        run.seed = seed;
    }
    if let Some(list) = &common.checks {
        run.checks = list.split(',').filter(|s| !s.trim().is_empty()).map(Check::parse).collect::<Result<_>>()?;
    }
    run.validate()?;
    Ok(run)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Returns whether every check passed.
fn execute(verb: Verb) -> Result<bool> {
    match verb {
        Verb::Generate(c) => {
            let run = load(&c)?;
            emit(&run.surface.generate()?.to_json()?, c.out.as_deref())?;
            Ok(true)
        }
        Verb::Approximate { common, radius } => {
            let run = load(&common)?;
            let t = run.surface.generate()?;
            let cyl = Region::cylinder(&Frame::reference(2, t.n()), [0.0, 0.0], radius)?;
            emit(&approximate(&t, &cyl, &run.constants)?.to_json()?, common.out.as_deref())?;
            Ok(true)
        }
        Verb::Interpolate(c) => {
            let run = load(&c)?;
            let grid = dyadic_grid(run.levels().0, run.constants.n0)?;
            let idx = grid.index_of([0, 0]).ok_or(Error::MissingInterpolant([0, 0]))?;
            let t = run.surface.generate()?;
            let it = cube_interpolant(&run.surface, &t, &grid, idx, run.plane, &run.constants)?;
            emit(&it.to_json()?, c.out.as_deref())?;
            Ok(true)
        }
        Verb::Blend(c) => {
            let run = load(&c)?;
            let k = run.levels().0;
            let grid = dyadic_grid(k, run.constants.n0)?;
            let pou = bump_partition(&grid)?;
            let t = run.surface.generate()?;
            let interpolants = (0..grid.cubes.len())
                .map(|i| {
                    cube_interpolant(&run.surface, &t, &grid, i, run.plane, &run.constants)
                        .map_err(|e| Error::Cube { k, cube: grid.cubes[i], source: Box::new(e) })
                })
                .collect::<Result<Vec<_>>>()?;
            let h = blend(&interpolants, &pou, run.blend_sub)?;
            let csv = c.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
            let text = if csv { h.csv_table(0) } else { h.to_json()? };
            emit(&text, c.out.as_deref())?;
            Ok(true)
        }
        Verb::Certify(c) => {
            let run = load(&c)?;
            let out = run_pipeline(&run)?;
            emit(&out.report.to_json()?, c.out.as_deref())?;
            print_failures(&out.report);
            Ok(out.report.passed())
        }
        Verb::Run(c) => {
            let run = load(&c)?;
            let out = run_pipeline(&run)?;
            let dir = c.out.clone().or_else(|| run.output.surfaces_dir.as_ref().map(PathBuf::from));
            if let Some(dir) = dir {
                for format in [ExportFormat::Json, ExportFormat::Csv] {
                    export(&out.report, &out.surfaces, format, &dir)?;
                }
            }
            if let Some(p) = &run.output.report_json {
                fs::write(p, out.report.to_json()?)?;
            }
            if let Some(p) = &run.output.report_csv {
                fs::write(p, out.report.to_csv())?;
            }
            print_failures(&out.report);
            Ok(out.report.passed())
        }
    }
}

fn print_failures(report: &center_manifold::certification::CertReport) {
    for r in report.failures() {
        eprintln!("FAIL {}: lhs {:e} rhs {:e}", r.name, r.lhs, r.rhs);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.verb) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
