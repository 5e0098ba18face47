//! Command-line front end. Every subcommand maps to one library call and
//! prints JSON, CSV or text.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curves::{
    check_partition_conditions, classify_ucurve, curve_fredholm_index, gcd_violations, h_plus,
    intersection_count, is_special, j0_from_topology, normal_chern, psi_zero_count, CurveTopology,
    UCurveData, WindingData,
};
use crate::dynamics::{
    area_preservation_residual, find_periodic_points, franks_dichotomy_check, interior_samples,
    Domain, MapKind, SurfaceMap,
};
use crate::ellipsoid::{spectrum_csv, volume_asymptotics, EllipsoidModel};
use crate::error::{EchError, Result};
use crate::homology::HomologyGroup;
use crate::index::{
    abs_indices, cz_index, cz_prefix_sum, ech_index, i_minus_j0, j0_index, RelativeClassData,
    WeightedChernModel,
};
use crate::orbit::{OrbitSet, OrbitTable, OrbitType, ReebOrbitSpec};
use crate::partitions::{
    check_claim, exceptional_multiplicities, is_exceptional, negative_partition, positive_partition,
};
use crate::scalar::{set_working_digits, RealScalar};
use crate::search::{
    epsilon_threshold, find_special, CaseTwoGenerator, GeneratorParams, SearchOutcome,
    UCurveSequence,
};

/// Exit status for domain errors.
pub const EXIT_DOMAIN: i32 = 2;
/// Exit status for usage errors and unreadable input.
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "echkit", version, about = "Index calculus and model checks for embedded contact homology")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Working digits for certified arithmetic.
    #[arg(long, global = true, env = "ECHKIT_PRECISION")]
    pub precision: Option<u32>,
    /// Seed for randomised commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Positive and negative partitions of a multiplicity.
    Partitions {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long)]
        m: u32,
    },
    /// Conley–Zehnder index of the k-fold cover and its prefix sum.
    Cz {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long)]
        k: u32,
    },
    /// ECH and J0 indices of a relative class, or absolute indices in a
    /// weighted model (`{"model": ..., "alpha": ...}`).
    Index {
        #[arg(long)]
        input: PathBuf,
    },
    /// Topological quantities and verdicts for one curve.
    Curve {
        #[arg(long)]
        input: PathBuf,
    },
    /// Lowest generators of an ellipsoid with gradings.
    EllipsoidSpectrum {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        k: usize,
    },
    /// `N_k²/(2k)` against the volume.
    Asymptotics {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long = "k-max")]
        k_max: usize,
    },
    /// Exceptional multiplicities of one orbit.
    Exceptional {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long = "type", value_enum, default_value_t = TypeArg::Elliptic)]
        kind: TypeArg,
    },
    /// Low-action threshold for an orbit table.
    Epsilon {
        #[arg(long)]
        orbits: PathBuf,
        #[arg(long)]
        bound: Option<String>,
    },
    /// Special-curve search on a sequence file, a replayed outcome, or
    /// generated instances.
    SpecialSearch {
        /// `{"orbits": [...], "sequence": {...}}`, optionally with a
        /// recorded `"outcome"` to replay.
        #[arg(long, conflicts_with = "generate")]
        input: Option<PathBuf>,
        /// Number of instances to generate.
        #[arg(long)]
        generate: Option<usize>,
        #[arg(long = "orbit-count", default_value_t = 2)]
        orbit_count: usize,
        /// Directory for generated instance files.
        #[arg(long = "emit-dir")]
        emit_dir: Option<PathBuf>,
    },
    /// Kernel-rank dichotomy for orbit classes.
    Nontorsion {
        #[arg(long)]
        input: PathBuf,
    },
    /// Periodic-point census and area checks for surface maps.
    Dynamics {
        /// Map file; overrides the inline map flags.
        #[arg(long = "map")]
        map_file: Option<PathBuf>,
        /// Rotation angle as a fraction of a full turn.
        #[arg(long, allow_hyphen_values = true)]
        rotation: Option<String>,
        /// Twist `φ ↦ φ + 2π·slope·r` on the unit annulus.
        #[arg(long)]
        twist: Option<f64>,
        /// Ellipsoid return map for `a,b`.
        #[arg(long)]
        ellipsoid: Option<String>,
        #[arg(long, value_enum, default_value_t = DynamicsMode::Census)]
        mode: DynamicsMode,
        #[arg(long = "max-period", default_value_t = 10)]
        max_period: u32,
        #[arg(long, default_value_t = 41)]
        resolution: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Runs the invariant suites.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TypeArg {
    Elliptic,
    PositiveHyperbolic,
    NegativeHyperbolic,
}

impl From<TypeArg> for OrbitType {
    fn from(t: TypeArg) -> Self {
        match t {
            TypeArg::Elliptic => OrbitType::Elliptic,
            TypeArg::PositiveHyperbolic => OrbitType::PositiveHyperbolic,
            TypeArg::NegativeHyperbolic => OrbitType::NegativeHyperbolic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DynamicsMode {
    Census,
    Franks,
    Area,
}

/// Failure of a run, split by exit status.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Domain(EchError),
}

impl From<EchError> for RunError {
    fn from(e: EchError) -> Self {
        RunError::Domain(e)
    }
}

impl From<crate::scalar::ScalarError> for RunError {
    fn from(e: crate::scalar::ScalarError) -> Self {
        RunError::Domain(e.into())
    }
}

/// Rendered output of a successful run.
pub struct Report {
    pub body: String,
    /// Process status; `selftest` reports failures through it.
    pub status: i32,
}

fn scalar(s: &str) -> Result<RealScalar> {
    Ok(RealScalar::parse(s)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> std::result::Result<T, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RunError::Usage(format!("malformed input {}: {e}", path.display())))
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable report");
    s.push('\n');
    s
}

fn unsupported(format: Format, command: &str) -> RunError {
    RunError::Usage(format!("{command} does not support {format:?} output").to_lowercase())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IndexInput {
    Model {
        model: WeightedChernModel,
        alpha: OrbitSet,
        #[serde(default)]
        beta: Option<OrbitSet>,
    },
    Relative(RelativeClassData),
}

#[derive(Deserialize)]
struct CurveInput {
    orbits: Vec<ReebOrbitSpec>,
    /// Skip the type/rotation-number check for synthetic tables.
    #[serde(default)]
    unchecked_orbits: bool,
    topology: CurveTopology,
    #[serde(default = "default_two")]
    ech_index: i64,
    #[serde(default = "default_two")]
    fredholm_index: i64,
    #[serde(default)]
    c_tau: Option<i64>,
    #[serde(default)]
    q_tau: Option<i64>,
    #[serde(default)]
    trivial_cylinders: Option<OrbitSet>,
    #[serde(default)]
    j0: Option<i64>,
    #[serde(default)]
    eps_ok: bool,
}

fn default_two() -> i64 {
    2
}

#[derive(Deserialize)]
struct SearchInput {
    orbits: OrbitTable,
    sequence: UCurveSequence,
    #[serde(default)]
    outcome: Option<SearchOutcome>,
}

#[derive(Deserialize)]
struct NontorsionInput {
    group: HomologyGroup,
    classes: Vec<Vec<i64>>,
    gamma: Vec<i64>,
    actions: Vec<RealScalar>,
    #[serde(default)]
    bound: Option<RealScalar>,
    #[serde(default)]
    steps: Option<usize>,
}

fn parse_turn_fraction(s: &str) -> std::result::Result<MapKind, RunError> {
    let v = RealScalar::parse(s)?;
    if let Some(r) = v.as_rational() {
        use num::ToPrimitive;
        let p = r.numer().to_i64();
        let q = r.denom().to_i64();
        if let (Some(p), Some(q)) = (p, q) {
            return Ok(MapKind::RationalRotation { p, q });
        }
    }
    Ok(MapKind::Rotation {
        angle: 2.0 * std::f64::consts::PI * v.to_f64(),
    })
}

fn surface_map(
    map_file: &Option<PathBuf>,
    rotation: &Option<String>,
    twist: Option<f64>,
    ellipsoid: &Option<String>,
) -> std::result::Result<SurfaceMap, RunError> {
    if let Some(path) = map_file {
        let m: SurfaceMap = read_json(path)?;
        m.validate()?;
        return Ok(m);
    }
    if let Some(r) = rotation {
        return Ok(SurfaceMap::new(parse_turn_fraction(r)?, Domain::Disk { radius: 1.0 })?);
    }
    if let Some(slope) = twist {
        return Ok(SurfaceMap::new(
            MapKind::Twist { offset: 0.0, slope },
            Domain::Annulus { inner: 0.0, outer: 1.0 },
        )?);
    }
    if let Some(ab) = ellipsoid {
        let (a, b) = ab
            .split_once(',')
            .ok_or_else(|| RunError::Usage("--ellipsoid expects a,b".into()))?;
        return Ok(SurfaceMap::ellipsoid(scalar(a.trim())?, scalar(b.trim())?)?);
    }
    Err(RunError::Usage(
        "dynamics needs --map, --rotation, --twist or --ellipsoid".into(),
    ))
}

/// Executes a parsed configuration.
pub fn execute(cfg: &RunConfig) -> std::result::Result<Report, RunError> {
    if let Some(d) = cfg.precision {
        set_working_digits(d);
    }
    let ok = |body: String| Ok(Report { body, status: 0 });
    match &cfg.command {
        Command::Partitions { theta, m } => {
            let th = scalar(theta)?;
            let (pp, ppath) = positive_partition(&th, *m)?;
            let (pm, mpath) = negative_partition(&th, *m)?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => ok(pretty(&json!({
                    "theta": th,
                    "m": m,
                    "pplus": pp,
                    "pminus": pm,
                    "pplus_path": ppath.vertices,
                    "pminus_path": mpath.vertices,
                    "exceptional": pp.len() + pm.len() <= 3,
                }))),
                Format::Csv => {
                    let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
                    ok(format!("side,parts\nplus,{}\nminus,{}\n", join(&pp.parts), join(&pm.parts)))
                }
                Format::Text => ok(format!("p+ = {:?}\np- = {:?}\n", pp.parts, pm.parts)),
            }
        }
        Command::Cz { theta, k } => {
            let th = scalar(theta)?;
            let cz = cz_index(&th, *k)?;
            let sum = cz_prefix_sum(&th, *k)?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => ok(pretty(&json!({"theta": th, "k": k, "cz": cz, "prefix_sum": sum}))),
                Format::Csv => ok(format!("k,cz,prefix_sum\n{k},{cz},{sum}\n")),
                Format::Text => ok(format!("CZ = {cz}\nsum over covers 1..{k} = {sum}\n")),
            }
        }
        Command::Index { input } => {
            let value = match read_json::<IndexInput>(input)? {
                IndexInput::Relative(d) => json!({
                    "ech_index": ech_index(&d)?,
                    "j0": j0_index(&d)?,
                    "i_minus_j0": i_minus_j0(&d)?,
                }),
                IndexInput::Model { model, alpha, beta } => {
                    let (i, j) = abs_indices(&alpha, &model)?;
                    let mut v = json!({"alpha": alpha, "ech_index": i, "j0": j});
                    if let Some(beta) = beta {
                        let (ib, jb) = abs_indices(&beta, &model)?;
                        v["relative"] = json!({"beta": beta, "ech_index": i - ib, "j0": j - jb});
                    }
                    v
                }
            };
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => ok(pretty(&value)),
                f => Err(unsupported(f, "index")),
            }
        }
        Command::Curve { input } => {
            let inp: CurveInput = read_json(input)?;
            let table = if inp.unchecked_orbits {
                OrbitTable::unchecked(inp.orbits)?
            } else {
                OrbitTable::new(inp.orbits)?
            };
            let c = &inp.topology;
            c.validate()?;
            let mut v = json!({
                "euler_characteristic": c.euler_characteristic(),
                "h_plus": h_plus(c, &table)?,
                "gcd_violations": gcd_violations(c, &table)?,
                "partition_conditions": check_partition_conditions(c, &table)?,
                "special": is_special(c, inp.ech_index, inp.fredholm_index, inp.eps_ok, &table)?,
            });
            match normal_chern(c, inp.fredholm_index, &table) {
                Ok(n) => v["normal_chern"] = json!(n),
                Err(e) => v["normal_chern_error"] = json!(e.to_string()),
            }
            if let Some(ct) = inp.c_tau {
                v["fredholm_index"] = json!(curve_fredholm_index(c, ct, &table)?);
                let w = WindingData::extremal(c, &table)?;
                v["zero_count"] = serde_json::to_value(psi_zero_count(c, ct, &w, &table)?).expect("json");
            }
            if let Some(q) = inp.q_tau {
                match intersection_count(c, q, &table) {
                    Ok(n) => v["intersection_count"] = json!(n),
                    Err(e) => v["intersection_error"] = json!(e.to_string()),
                }
            }
            if let Some(t) = inp.trivial_cylinders {
                let u = UCurveData::new(c.clone(), t);
                let j = j0_from_topology(&u);
                v["j0_from_topology"] = json!(j);
                if !c.positive_ends.is_empty() && !c.negative_ends.is_empty() {
                    v["classification"] = serde_json::to_value(classify_ucurve(&u, inp.j0.unwrap_or(j))?).expect("json");
                }
            }
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => ok(pretty(&v)),
                f => Err(unsupported(f, "curve")),
            }
        }
        Command::EllipsoidSpectrum { a, b, k } => {
            let model = EllipsoidModel::new(scalar(a)?, scalar(b)?)?;
            let entries = model.spectrum(*k)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => ok(spectrum_csv(&entries)),
                Format::Json => {
                    let rows: Vec<Value> = entries
                        .iter()
                        .map(|e| {
                            json!({"k": e.k, "m": e.m, "n": e.n, "action": e.action,
                                   "action_decimal": e.action.to_decimal(30), "grading": e.grading})
                        })
                        .collect();
                    ok(pretty(&json!({"a": model.a, "b": model.b, "entries": rows})))
                }
                Format::Text => {
                    let mut s = String::new();
                    for e in &entries {
                        writeln!(s, "{:>6}  g1^{} g2^{}  A = {}  I = {}", e.k, e.m, e.n, e.action.to_decimal(15), e.grading)
                            .expect("string write");
                    }
                    ok(s)
                }
            }
        }
        Command::Asymptotics { a, b, k_max } => {
            let model = EllipsoidModel::new(scalar(a)?, scalar(b)?)?;
            let r = volume_asymptotics(&model, *k_max)?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => ok(pretty(&r)),
                Format::Csv => {
                    let mut s = String::from("k,action,ratio,deviation\n");
                    for c in &r.checkpoints {
                        writeln!(s, "{},{:.17e},{:.17e},{:.6e}", c.k, c.action, c.ratio, c.deviation).expect("string write");
                    }
                    ok(s)
                }
                Format::Text => ok(format!(
                    "volume {:.12}\nfinal deviation {:.3e}\nexponent {:?}\n",
                    r.volume, r.final_deviation, r.exponent
                )),
            }
        }
        Command::Exceptional { theta, kind } => {
            let th = scalar(theta)?;
            let r = exceptional_multiplicities(&th, (*kind).into())?;
            let mut v = serde_json::to_value(&r).expect("json");
            if *kind == TypeArg::Elliptic {
                let mut claims = Vec::new();
                for m in 1..=r.cutoff {
                    if let Ok(c) = check_claim(&th, m) {
                        claims.push(c);
                    }
                }
                v["claims"] = serde_json::to_value(claims).expect("json");
                v["exceptional_check"] = json!(r
                    .multiplicities
                    .iter()
                    .map(|&m| is_exceptional(&th, m))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .all(|x| x));
            }
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => ok(pretty(&v)),
                Format::Text => ok(format!("{:?} (cutoff {})\n", r.multiplicities, r.cutoff)),
                f => Err(unsupported(f, "exceptional")),
            }
        }
        Command::Epsilon { orbits, bound } => {
            let table: OrbitTable = read_json(orbits)?;
            let bound = bound.as_deref().map(scalar).transpose()?;
            let cert = epsilon_threshold(&table, bound.as_ref())?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut v = serde_json::to_value(&cert).expect("json");
                    v["epsilon_decimal"] = json!(cert.epsilon.to_decimal(30));
                    ok(pretty(&v))
                }
                Format::Text => ok(format!("epsilon = {}\n", cert.epsilon.to_decimal(30))),
                f => Err(unsupported(f, "epsilon")),
            }
        }
        Command::SpecialSearch {
            input,
            generate,
            orbit_count,
            emit_dir,
        } => {
            if let Some(path) = input {
                let inp: SearchInput = read_json(path)?;
                let eps = epsilon_threshold(&inp.orbits, None)?;
                let outcome = find_special(&inp.sequence, &eps, &inp.orbits)?;
                let mut v = json!({"outcome": outcome});
                if let Some(recorded) = inp.outcome {
                    v["replay_matches"] = json!(recorded == outcome);
                }
                return ok(pretty(&v));
            }
            let count = generate.ok_or_else(|| RunError::Usage("special-search needs --input or --generate".into()))?;
            let gen = CaseTwoGenerator::new(GeneratorParams::new(cfg.seed, *orbit_count))?;
            let instances = gen.instances(count)?;
            let mut rows = Vec::with_capacity(count);
            for (i, seq) in instances.iter().enumerate() {
                let outcome = find_special(seq, &gen.epsilon, &gen.table)?;
                let (index, special) = match &outcome {
                    SearchOutcome::Found { index, verdict, .. } => (Some(*index), verdict.special),
                    SearchOutcome::Contradiction { .. } => (None, false),
                };
                if let Some(dir) = emit_dir {
                    std::fs::create_dir_all(dir).map_err(|e| RunError::Usage(e.to_string()))?;
                    let file = dir.join(format!("instance_{i:04}.json"));
                    let body = pretty(&json!({"orbits": gen.table, "sequence": seq, "outcome": outcome}));
                    std::fs::write(&file, body).map_err(|e| RunError::Usage(e.to_string()))?;
                }
                rows.push(json!({
                    "instance": i,
                    "index": index,
                    "special": special,
                    "trace_monotone": outcome.trace().is_monotone(),
                }));
            }
            let all = rows.iter().all(|r| r["special"] == json!(true) && r["trace_monotone"] == json!(true));
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => ok(pretty(&json!({
                    "epsilon": gen.epsilon.epsilon,
                    "templates": gen.templates.len(),
                    "params": gen.params,
                    "all_special": all,
                    "instances": rows,
                }))),
                Format::Csv => {
                    let mut s = String::from("instance,index,special,trace_monotone\n");
                    for r in &rows {
                        writeln!(s, "{},{},{},{}", r["instance"], r["index"], r["special"], r["trace_monotone"]).expect("string write");
                    }
                    ok(s)
                }
                Format::Text => ok(format!("{} instances, all special: {all}\n", rows.len())),
            }
        }
        Command::Nontorsion { input } => {
            let inp: NontorsionInput = read_json(input)?;
            let bound = inp.bound.unwrap_or_else(|| RealScalar::integer(20));
            let r = crate::search::nontorsion_analysis(
                &inp.group,
                &inp.classes,
                &inp.gamma,
                &inp.actions,
                &bound,
                inp.steps.unwrap_or(10),
            )?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => ok(pretty(&r)),
                Format::Text => ok(format!("kernel rank {}: {}\n", r.kernel_rank, r.conclusion)),
                f => Err(unsupported(f, "nontorsion")),
            }
        }
        Command::Dynamics {
            map_file,
            rotation,
            twist,
            ellipsoid,
            mode,
            max_period,
            resolution,
            tol,
            samples,
        } => {
            let map = surface_map(map_file, rotation, *twist, ellipsoid)?;
            match mode {
                DynamicsMode::Census => {
                    let c = find_periodic_points(&map, *max_period, *resolution, *tol)?;
                    match cfg.format.unwrap_or(Format::Json) {
                        Format::Json => ok(pretty(&c)),
                        Format::Csv => ok(c.to_csv()),
                        Format::Text => ok(format!("{} orbits, counts {:?}\n", c.total(), c.counts)),
                    }
                }
                DynamicsMode::Franks => {
                    let r = franks_dichotomy_check(&map, *max_period, *resolution, *tol, cfg.seed)?;
                    match cfg.format.unwrap_or(Format::Json) {
                        Format::Json => ok(pretty(&r)),
                        Format::Text => ok(format!("{:?}: levels {:?}\n", r.verdict, r.levels)),
                        f => Err(unsupported(f, "dynamics --mode franks")),
                    }
                }
                DynamicsMode::Area => {
                    let pts = interior_samples(&map.domain, *samples, cfg.seed, 1e-3);
                    let s = area_preservation_residual(&map, &pts)?;
                    match cfg.format.unwrap_or(Format::Json) {
                        Format::Json => ok(pretty(&s)),
                        Format::Text => ok(format!("max {:.3e} mean {:.3e}\n", s.max_residual, s.mean_residual)),
                        f => Err(unsupported(f, "dynamics --mode area")),
                    }
                }
            }
        }
        Command::Selftest => {
            let r = crate::selftest::run_selftest(cfg.seed);
            let status = if r.passed { 0 } else { EXIT_DOMAIN };
            let body = match cfg.format.unwrap_or(Format::Json) {
                Format::Json => pretty(&r),
                _ => {
                    let mut s = String::new();
                    for c in &r.checks {
                        writeln!(s, "{} {}::{} {}", if c.passed { "PASS" } else { "FAIL" }, c.module, c.name, c.detail)
                            .expect("string write");
                    }
                    s
                }
            };
            Ok(Report { body, status })
        }
    }
}

fn error_json(kind: &str, message: &str) -> String {
    pretty(&json!({"error": {"kind": kind, "message": message}}))
}

/// Parses `args` (program name first), runs, writes the report to `out`
/// and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(out, "{}", error_json("usage", &e.to_string()));
                    EXIT_USAGE
                }
            };
        }
    };
    let run_it = || execute(&cfg);
    let result = match cfg.jobs {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run_it),
            Err(e) => Err(RunError::Usage(e.to_string())),
        },
        _ => run_it(),
    };
    let (body, status) = match result {
        Ok(r) => (r.body, r.status),
        Err(RunError::Usage(m)) => (error_json("usage", &m), EXIT_USAGE),
        Err(RunError::Domain(e)) => (error_json(e.kind(), &e.to_string()), EXIT_DOMAIN),
    };
    match &cfg.output {
        Some(path) if status != EXIT_USAGE => {
            if let Err(e) = std::fs::write(path, &body) {
                let _ = write!(out, "{}", error_json("usage", &format!("cannot write {}: {e}", path.display())));
                return EXIT_USAGE;
            }
        }
        _ => {
            let _ = out.write_all(body.as_bytes());
        }
    }
    status
}
