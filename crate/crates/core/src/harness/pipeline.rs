//! End-to-end driver: surface, per-level interpolants, blend, checks.

use std::collections::BTreeMap;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blending::partition::{multi_index, MAX_ORDER};
use crate::blending::{blend, bump_partition, dyadic_grid, BlendedSurface, DyadicGrid, PartitionOfUnity};
use crate::certification::report::hash_inputs;
use crate::certification::{basic_decay_check, decay_fit, holder_seminorm, tilt_excess_identity, CertRecord, CertReport, FitKind};
use crate::config::ConstantsConfig;
use crate::error::{Error, Result};
use crate::geometry::{region_moments, tangent_plane, Frame, Region, SampledCurrent};
use crate::interpolation::{interpolate, Interpolant};
use crate::scalar::unit_ball_volume;

use super::surface::{sample_surface, SurfaceSpec};

pub const PARTITION_POINTS: usize = 10_000;
const PARTITION_SUM_TOL: f64 = 1e-12;
const PARTITION_DERIVATIVE_TOL: f64 = 1e-9;
/// Allowed spread `max / min` of a fitted quantity across levels.
pub const STABILITY_FACTOR: f64 = 2.0;
const DECAY_RADII: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Partition,
    Decay,
    BasicDecay,
    Tilt,
    BlendStability,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::Partition, Check::Decay, Check::BasicDecay, Check::Tilt, Check::BlendStability];

    pub fn parse(name: &str) -> Result<Check> {
        serde_json::from_value(serde_json::Value::String(name.trim().to_string()))
            .map_err(|_| Error::InvalidConfig(format!("unknown check {name:?}")))
    }
}

/// Plane of each local interpolation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneChoice {
    #[default]
    Reference,
    /// Tangent plane of the nominal sampling at the base point.
    Tangent,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub report_json: Option<String>,
    pub report_csv: Option<String>,
    /// Directory for the per-level blended surfaces.
    pub surfaces_dir: Option<String>,
}

fn default_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

fn default_sub() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub constants: ConstantsConfig,
    /// Levels `k_min..=k_max`; `k_min` defaults to `k0`, `k_max` to `k0 + 1`.
    #[serde(default)]
    pub k_min: Option<u32>,
    #[serde(default)]
    pub k_max: Option<u32>,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub plane: PlaneChoice,
    /// Subdivision of the cube step for the blended lattice.
    #[serde(default = "default_sub")]
    pub blend_sub: usize,
}

impl RunConfig {
    pub fn new(surface: SurfaceSpec) -> Self {
        RunConfig {
            surface,
            constants: ConstantsConfig::default(),
            k_min: None,
            k_max: None,
            checks: default_checks(),
            output: OutputPaths::default(),
            seed: 0,
            plane: PlaneChoice::Reference,
            blend_sub: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The config with every default filled in.
    pub fn to_json(&self) -> Result<String> {
        let mut full = self.clone();
        let (a, b) = self.levels();
        full.k_min = Some(a);
        full.k_max = Some(b);
        Ok(serde_json::to_string_pretty(&full)?)
    }

    pub fn levels(&self) -> (u32, u32) {
        let k0 = self.constants.k0;
        (self.k_min.unwrap_or(k0), self.k_max.unwrap_or(self.k_min.unwrap_or(k0) + 1))
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.surface.validate()?;
        if self.surface.kind.n() != self.constants.n {
            return Err(Error::InvalidConfig(format!(
                "surface codimension {} differs from n = {}",
                self.surface.kind.n(),
                self.constants.n
            )));
        }
        let (a, b) = self.levels();
        let k0 = self.constants.k0;
        if !(k0 <= a && a <= b && b <= k0 + 4) {
            return Err(Error::InvalidConfig(format!("levels {a}..={b} outside [{k0}, {}]", k0 + 4)));
        }
        if self.blend_sub == 0 || self.blend_sub > 8 {
            return Err(Error::InvalidConfig("blend_sub must lie in 1..=8".into()));
        }
        if self.checks.is_empty() {
            return Err(Error::InvalidConfig("no checks selected".into()));
        }
        Ok(())
    }

    fn wants(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }
}

/// Per-level summary of the blended surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub k: u32,
    pub cubes: usize,
    pub c3_norm: f64,
    pub holder: f64,
    /// `max |h_k - surface|` over the blend lattice.
    pub c0_error: f64,
}

pub struct PipelineOutput {
    pub report: CertReport,
    pub surfaces: Vec<BlendedSurface>,
    pub levels: Vec<LevelStats>,
}

/// `||T||(B_1) <= omega_m + eps_h`, measured on the ball about the lift of the origin.
pub fn check_mass_hypothesis(t: &SampledCurrent, spec: &SurfaceSpec, cfg: &ConstantsConfig) -> Result<(f64, f64)> {
    let mut p = vec![0.0, 0.0];
    p.extend(spec.kind.value([0.0, 0.0])?);
    let radius = spec.radius.min(1.0);
    let mass = region_moments(t, &Region::ball(p, radius)?)?.mass;
    let limit = (unit_ball_volume::<f64>(t.m()) + cfg.eps_h) * radius.powi(t.m() as i32);
    if mass > limit {
        return Err(Error::MassHypothesis { mass, limit });
    }
    Ok((mass, limit))
}

/// The `(p_i, C 2^-k)`-interpolation at cube `idx`, with `p_i` the point of the
/// surface above the cube center.
pub fn cube_interpolant(
    spec: &SurfaceSpec,
    nominal: &SampledCurrent,
    grid: &DyadicGrid,
    idx: usize,
    plane: PlaneChoice,
    cfg: &ConstantsConfig,
) -> Result<Interpolant> {
    let h = grid.step();
    let c = grid.center(idx);
    let mut p = vec![c[0], c[1]];
    p.extend(spec.kind.value(c)?);
    let frame = match plane {
        PlaneChoice::Reference => Frame::reference(2, spec.kind.n()),
        PlaneChoice::Tangent => tangent_plane(nominal, &p)?,
    };
    let rho = cfg.interp_radius_const * h;
    let local = frame.to_frame(&p);
    let t = sample_surface(spec, &frame, [local[0], local[1]], 8.0 * rho + 8.0 * h, h)?;
    interpolate(&t, &p, rho, cfg, h)
}

/// Interpolants for every cube of the level, computed on all available threads.
fn level_interpolants(
    spec: &SurfaceSpec,
    nominal: &SampledCurrent,
    grid: &DyadicGrid,
    plane: PlaneChoice,
    cfg: &ConstantsConfig,
) -> Result<Vec<Interpolant>> {
    let total = grid.cubes.len();
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(total).max(1);
    let chunk = total.div_ceil(workers);
    let one = |idx: usize| {
        cube_interpolant(spec, nominal, grid, idx, plane, cfg)
            .map_err(|e| Error::Cube { k: grid.k, cube: grid.cubes[idx], source: Box::new(e) })
    };
    if workers == 1 {
        return (0..total).map(one).collect();
    }
    let parts: Vec<Result<Vec<Interpolant>>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = w * chunk..((w + 1) * chunk).min(total);
                s.spawn(move || range.map(one).collect::<Result<Vec<_>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("interpolation worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(total);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Worst `|Σψ - 1|` and worst rescaled `|Σ D^l ψ| / 2^(kl)` at seeded random points of `Q`.
pub fn partition_defects(pou: &PartitionOfUnity, points: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = pou.grid.q_radius();
    let scale = (pou.grid.k as f64).exp2();
    let (mut sum, mut der) = (0.0f64, 0.0f64);
    for _ in 0..points {
        let q = [rng.gen_range(-r..=r), rng.gen_range(-r..=r)];
        let s = pou.partial_sums(q);
        sum = sum.max((s[0] - 1.0).abs());
        for l in 1..=MAX_ORDER {
            for b in 0..=l {
                der = der.max((s[multi_index(l - b, b)] / scale.powi(l as i32)).abs());
            }
        }
    }
    (sum, der)
}

fn level_stats(h: &BlendedSurface, spec: &SurfaceSpec, cubes: usize, cfg: &ConstantsConfig, seed: u64) -> Result<LevelStats> {
    let holder = holder_seminorm(h.field(3), cfg.alpha, seed)?.seminorm;
    let mut c0_error = 0.0f64;
    let side = h.values.side();
    for j in 0..side {
        for i in 0..side {
            let exact = spec.kind.value(h.values.node(i, j))?;
            for (a, b) in h.values.value(i, j).iter().zip(&exact) {
                c0_error = c0_error.max((a - b).abs());
            }
        }
    }
    Ok(LevelStats { k: h.k, cubes, c3_norm: h.c_norm(3), holder, c0_error })
}

/// `max / min`, with `1` for all-zero data.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn flat_record(name: &str, inputs: &impl Serialize) -> CertRecord {
    CertRecord::inequality(name, 0.0, 0.0, 0.0, inputs).with_detail("flat", 1.0)
}

fn surface_checks(run: &RunConfig, t: &SampledCurrent, report: &mut CertReport) -> Result<()> {
    let cfg = &run.constants;
    let spec = &run.surface;
    let mut p = vec![0.0, 0.0];
    p.extend(spec.kind.value([0.0, 0.0])?);
    if run.wants(Check::Decay) {
        let inputs = (spec, &p, DECAY_RADII);
        let floor = 2.0 - 2.0 * cfg.delta;
        let rec = match decay_fit(t, &p, &DECAY_RADII) {
            Ok(d) => CertRecord::inequality("decay_exponent", floor, d.fit.slope, 0.0, &inputs)
                .with_fit(FitKind::Exponent, d.fit.slope)
                .with_detail("residual", d.fit.residual),
            Err(Error::Degenerate(_)) => flat_record("decay_exponent", &inputs),
            Err(e) => return Err(e.in_stage("decay")),
        };
        report.push(rec);
    }
    if run.wants(Check::BasicDecay) {
        let r = 0.5 * spec.radius;
        let inputs = (spec, &p, r, cfg.basic_theta);
        let rec = match basic_decay_check(t, &p, r, cfg) {
            Ok(b) => CertRecord::inequality("basic_decay", b.ratio, b.threshold, 0.0, &inputs)
                .with_fit(FitKind::Constant, b.ratio)
                .with_detail("inner", b.inner)
                .with_detail("outer", b.outer),
            Err(Error::Degenerate(_)) => flat_record("basic_decay", &inputs),
            Err(e) => return Err(e.in_stage("basic decay")),
        };
        report.push(rec);
    }
    if run.wants(Check::Tilt) {
        let (ti, s) = (0.25 * spec.radius, 0.5 * spec.radius);
        let f = &t.base;
        let id = tilt_excess_identity(f, ti, s, cfg).map_err(|e| e.in_stage("tilt identity"))?;
        let budget = id.excess.powf(1.0 + cfg.eta);
        let inputs = (spec, ti, s, cfg.eta);
        report.push(
            CertRecord::inequality("tilt_identity", id.gap, budget, 0.0, &inputs)
                .with_fit(FitKind::Constant, crate::certification::report::ratio_of(id.gap, budget))
                .with_detail("lhs", id.lhs)
                .with_detail("rhs", id.rhs)
                .with_detail("excess", id.excess),
        );
    }
    Ok(())
}

fn stability_records(run: &RunConfig, levels: &[LevelStats], report: &mut CertReport) {
    let ks: Vec<u32> = levels.iter().map(|l| l.k).collect();
    for (name, pick) in [
        ("blend_c3_stability", (|l: &LevelStats| l.c3_norm) as fn(&LevelStats) -> f64),
        ("blend_holder_stability", |l: &LevelStats| l.holder),
    ] {
        let values: Vec<f64> = levels.iter().map(pick).collect();
        let s = spread(&values);
        let mut rec = CertRecord::inequality(name, s, STABILITY_FACTOR, 0.0, &(&run.surface, &ks, &values))
            .with_fit(FitKind::Constant, values.iter().cloned().fold(0.0, f64::max));
        for l in levels {
            rec = rec.with_detail(&format!("k{}", l.k), pick(l));
        }
        report.push(rec);
    }
    for w in levels.windows(2) {
        let name = format!("blend_c0_k{}_k{}", w[0].k, w[1].k);
        report.push(
            CertRecord::inequality(&name, w[1].c0_error, w[0].c0_error, 0.0, &(&run.surface, w[0].k, w[1].k))
                .with_detail("coarse", w[0].c0_error)
                .with_detail("fine", w[1].c0_error),
        );
    }
}

/// Runs every stage and check of `run`. Stage failures carry the level and cube.
pub fn run_pipeline(run: &RunConfig) -> Result<PipelineOutput> {
    run.validate()?;
    let cfg = &run.constants;
    let spec = &run.surface;
    let t = spec.generate()?;
    let (mass, limit) = check_mass_hypothesis(&t, spec, cfg)?;

    let mut report = CertReport::new(cfg);
    report.metadata = metadata(run)?;
    report.metadata.insert("mass".into(), format!("{mass:e}"));
    report.metadata.insert("mass_limit".into(), format!("{limit:e}"));

    surface_checks(run, &t, &mut report)?;

    let (ka, kb) = run.levels();
    let mut surfaces = Vec::new();
    let mut levels = Vec::new();
    for k in ka..=kb {
        let grid = dyadic_grid(k, cfg.n0)?;
        let pou = bump_partition(&grid)?;
        if run.wants(Check::Partition) {
            let (sum, der) = partition_defects(&pou, PARTITION_POINTS, run.seed ^ k as u64);
            let inputs = (k, cfg.n0, PARTITION_POINTS, run.seed);
            report.push(CertRecord::inequality(&format!("partition_sum_k{k}"), sum, PARTITION_SUM_TOL, 0.0, &inputs));
            report.push(CertRecord::inequality(
                &format!("partition_derivatives_k{k}"),
                der,
                PARTITION_DERIVATIVE_TOL,
                0.0,
                &inputs,
            ));
        }
        let interpolants = level_interpolants(spec, &t, &grid, run.plane, cfg)?;
        let h = blend(&interpolants, &pou, run.blend_sub).map_err(|e| e.in_stage("blend"))?;
        if run.wants(Check::BlendStability) {
            levels.push(level_stats(&h, spec, grid.cubes.len(), cfg, run.seed)?);
        }
        surfaces.push(h);
    }
    if run.wants(Check::BlendStability) {
        stability_records(run, &levels, &mut report);
    }
    Ok(PipelineOutput { report, surfaces, levels })
}

fn metadata(run: &RunConfig) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    m.insert("crate_version".into(), env!("CARGO_PKG_VERSION").into());
    m.insert("run_config".into(), serde_json::to_string(&serde_json::from_str::<serde_json::Value>(&run.to_json()?)?)?);
    m.insert("run_hash".into(), hash_inputs(run));
    Ok(m)
}
