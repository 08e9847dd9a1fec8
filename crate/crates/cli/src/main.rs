//! `studykin`: command-line front end to the studykin library.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 solver failure.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use studykin::compactify::{lift, sigma, tau, BlowupPoint, ProductPoint};
use studykin::kinematics::{
    degenerate_critical_values, degenerate_dkp_oriented, degenerate_ikm, dkp, dkp_refine, ikm, k8_sweep, scan_grid,
    seed_from_rotation, BoundaryJointCoords, DkpOptions, DkpSolution, JointLengths, Orientation, ScanConfig,
};
use studykin::robots::{boundary_component, modes_of, Architecture, BoundaryComponentId, ModeId, PlatformGeometry};
use studykin::study::{motion_from_study, study_from_motion, RigidMotionRepr, StudyPoint};
use studykin::verify::{self, VerifyOptions};
use studykin::Error;

#[derive(Parser)]
#[command(name = "studykin", version, about = "Kinematics of 3-DOF parallel robots in the compactified Study model")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Global {
    /// JSON file with defaults for architecture, k1, k2, seed, jobs, starts.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RPS3, UPU3_SNU or UPU3_TSAI (inferred from the mode or component when unique).
    #[arg(long, global = true)]
    arch: Option<Architecture>,
    /// Base radius.
    #[arg(long, global = true)]
    k1: Option<f64>,
    /// Platform radius.
    #[arg(long, global = true)]
    k2: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

/// Optional config file; command-line flags take precedence.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    architecture: Option<Architecture>,
    k1: Option<f64>,
    k2: Option<f64>,
    seed: Option<u64>,
    jobs: Option<usize>,
    starts: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between motions, Study points, blow-up and product points.
    Convert(ConvertArgs),
    /// Limb lengths of a Study point, or degenerate coordinates of a boundary point.
    Ikm(IkmArgs),
    /// Degenerate DKP on a boundary component.
    Ddkp(DdkpArgs),
    /// Critical values of the degenerate DKP on a boundary component.
    Critical(CriticalArgs),
    /// Full DKP by multistart Newton.
    Dkp(DkpArgs),
    /// Newton refinement of one DKP solution from a seed.
    Refine(RefineArgs),
    /// Solution counts over a grid of (r1, r2) at fixed r3, as CSV.
    Scan(ScanArgs),
    /// K8 DKP along r = (r1, r23, r23) with lower-bound counts.
    Sweep(SweepArgs),
    /// Run the self-check battery.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "conversion")]
struct Conversion {
    /// Rigid motion {rotation, translation} to Study point [x0..x3, y0..y3].
    #[arg(long)]
    to_study: bool,
    /// Study point to rigid motion.
    #[arg(long)]
    to_motion: bool,
    /// Study point to its blow-up point {xy, w}.
    #[arg(long)]
    lift: bool,
    /// Product point {w, rstu} to blow-up point.
    #[arg(long)]
    sigma: bool,
    /// Blow-up point to product point.
    #[arg(long)]
    tau: bool,
    /// Chart coordinates [c0, c1, c2] of a boundary component to a boundary point {w, y}.
    #[arg(long, value_name = "COMPONENT")]
    chart: Option<BoundaryComponentId>,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    conversion: Conversion,
    /// Input JSON file ('-' for stdin).
    #[arg(long, default_value = "-")]
    input: PathBuf,
}

#[derive(Args)]
struct IkmArgs {
    /// Study point x0,x1,x2,x3,y0,y1,y2,y3.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_array::<8>, conflicts_with = "boundary", required_unless_present = "boundary")]
    point: Option<[f64; 8]>,
    /// Boundary point w0,w1,w2,w3,y0,y1,y2,y3.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_array::<8>)]
    boundary: Option<[f64; 8]>,
}

#[derive(Args)]
struct DdkpArgs {
    #[arg(long)]
    component: BoundaryComponentId,
    #[arg(long, allow_negative_numbers = true)]
    d1: f64,
    #[arg(long, allow_negative_numbers = true)]
    d2: f64,
    /// Orientation class of the translation direction.
    #[arg(long, default_value = "canonical", value_parser = parse_orientation)]
    orientation: Orientation,
}

#[derive(Args)]
struct CriticalArgs {
    #[arg(long)]
    component: BoundaryComponentId,
}

#[derive(Args, Clone, Copy)]
struct Budget {
    /// Newton starts.
    #[arg(long)]
    starts: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DkpArgs {
    #[arg(long)]
    mode: ModeId,
    /// Limb lengths r1,r2,r3.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_array::<3>)]
    r: [f64; 3],
    #[command(flatten)]
    budget: Budget,
}

#[derive(Args)]
struct RefineArgs {
    #[arg(long)]
    mode: ModeId,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_array::<3>)]
    r: [f64; 3],
    /// Seed rotation quaternion q0,q1,q2,q3 (height from the lengths).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_array::<4>, conflicts_with = "start", required_unless_present = "start")]
    rotation: Option<[f64; 4]>,
    /// Take the lower height branch for --rotation.
    #[arg(long, requires = "rotation")]
    lower: bool,
    /// Explicit start point x0..x3,y0..y3.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_array::<8>)]
    start: Option<[f64; 8]>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    mode: ModeId,
    #[arg(long, allow_negative_numbers = true)]
    r3: f64,
    /// Range lo:hi of r1 and r2.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
    window: (f64, f64),
    /// Cells per side.
    #[arg(long, default_value_t = 60)]
    resolution: usize,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Newton starts per cell (default 64).
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Values of r1: a list a,b,c or a range lo:hi:n.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_r1_values)]
    r1: R1Values,
    /// Common length of limbs 2 and 3.
    #[arg(long, default_value_t = 100.0)]
    r23: f64,
    #[command(flatten)]
    budget: Budget,
}

#[derive(Args)]
struct VerifyArgs {
    /// Skip the grid scans.
    #[arg(long)]
    quick: bool,
    /// Treat documented mismatches with published values as failures.
    #[arg(long)]
    strict: bool,
    /// Also check generator files NAME.txt in this directory.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random samples per property check.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Clone, Debug)]
struct R1Values(Vec<f64>);

enum CliError {
    Usage(String),
    Solver(String),
    Verification,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) | Error::NoConvergence(_) => CliError::Solver(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_orientation(s: &str) -> Result<Orientation, String> {
    match s.to_ascii_lowercase().as_str() {
        "canonical" => Ok(Orientation::Canonical),
        "flipped" => Ok(Orientation::Flipped),
        _ => Err(format!("expected 'canonical' or 'flipped', got '{s}'")),
    }
}

fn parse_array<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number '{p}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let n = v.len();
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers, got {n}"))
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

fn parse_r1_values(s: &str) -> Result<R1Values, String> {
    let nums = |part: &str| part.trim().parse::<f64>().map_err(|e| format!("bad number '{part}': {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let (lo, hi) = (nums(lo)?, nums(hi)?);
            let n: usize = n.trim().parse().map_err(|e| format!("bad count '{n}': {e}"))?;
            if n == 0 {
                return Err("range needs at least one value".into());
            }
            let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
            Ok(R1Values((0..n).map(|i| lo + step * i as f64).collect()))
        }
        [list] => list.split(',').map(nums).collect::<Result<Vec<_>, _>>().map(R1Values),
        _ => Err(format!("expected a,b,c or lo:hi:n, got '{s}'")),
    }
}

struct Context {
    cfg: RunConfig,
    global: Global,
}

impl Context {
    fn load(global: Global) -> CliResult<Self> {
        let cfg = match &global.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        Ok(Context { cfg, global })
    }

    /// The architecture from the flags or config, else the unique one that
    /// `candidates` allows.
    fn architecture(&self, candidates: &[Architecture], what: &str) -> CliResult<Architecture> {
        if let Some(a) = self.global.arch.or(self.cfg.architecture) {
            return Ok(a);
        }
        match candidates {
            [a] => Ok(*a),
            _ => Err(CliError::Usage(format!("{what} belongs to several architectures; pass --arch"))),
        }
    }

    fn geometry(&self, arch: Architecture) -> CliResult<PlatformGeometry> {
        let d = PlatformGeometry::default_for(arch);
        let k1 = self.global.k1.or(self.cfg.k1).unwrap_or(d.k1);
        let k2 = self.global.k2.or(self.cfg.k2).unwrap_or(d.k2);
        Ok(PlatformGeometry::new(arch, k1, k2)?)
    }

    fn geometry_for_mode(&self, mode: ModeId) -> CliResult<PlatformGeometry> {
        let archs: Vec<Architecture> = Architecture::ALL.into_iter().filter(|a| mode.belongs_to(*a)).collect();
        let arch = self.architecture(&archs, &format!("mode {mode}"))?;
        if !mode.belongs_to(arch) {
            return Err(Error::ModeArchitecture { mode: mode.to_string(), architecture: arch.to_string() }.into());
        }
        let g = self.geometry(arch)?;
        if !g.is_default() {
            return Err(Error::NonDefaultGeometry.into());
        }
        Ok(g)
    }

    fn geometry_for_component(&self, id: BoundaryComponentId) -> CliResult<PlatformGeometry> {
        let arch = self.global.arch.or(self.cfg.architecture).unwrap_or(id.architecture());
        if arch != id.architecture() {
            return Err(CliError::Usage(format!("{id} is a boundary component of {}, not {arch}", id.architecture())));
        }
        self.geometry(arch)
    }

    fn options(&self, budget: Budget, default_starts: usize) -> DkpOptions {
        DkpOptions {
            starts: budget.starts.or(self.cfg.starts).unwrap_or(default_starts),
            seed: budget.seed.or(self.cfg.seed).unwrap_or(0),
            ..Default::default()
        }
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        let mut text = text.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.global.out {
            Some(path) => fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
            None => io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Usage(e.to_string())),
        }
    }

    fn emit_json<T: Serialize + ?Sized>(&self, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
        self.emit(&text)
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed {what}: {e}")))
}

fn lengths(r: &[f64; 3]) -> CliResult<JointLengths> {
    Ok(JointLengths::new(r[0], r[1], r[2])?)
}

fn study_point(c: &[f64; 8]) -> CliResult<StudyPoint> {
    Ok(StudyPoint::from_coords(*c)?)
}

/// The published JSON form of a DKP solution.
#[derive(Serialize)]
struct SolutionOut<'a> {
    point: &'a StudyPoint,
    mode: ModeId,
    residual: f64,
    z: f64,
}

impl<'a> From<&'a DkpSolution> for SolutionOut<'a> {
    fn from(s: &'a DkpSolution) -> Self {
        SolutionOut { point: &s.point, mode: s.mode, residual: s.residual, z: s.z }
    }
}

fn cmd_convert(ctx: &Context, args: &ConvertArgs) -> CliResult<()> {
    let text = read_input(&args.input)?;
    let c = &args.conversion;
    if c.to_study {
        let m: RigidMotionRepr = from_json(&text, "rigid motion")?;
        let p = study_from_motion(&m.into_motion(1e-9)?)?;
        ctx.emit_json(&p)
    } else if c.to_motion {
        let p: StudyPoint = from_json(&text, "Study point")?;
        ctx.emit_json(&motion_from_study(&p)?)
    } else if c.lift {
        let p: StudyPoint = from_json(&text, "Study point")?;
        ctx.emit_json(&lift(&p)?)
    } else if c.sigma {
        let p: ProductPoint = from_json(&text, "product point")?;
        let p = ProductPoint::new(p.w, p.rstu)?;
        ctx.emit_json(&sigma(&p))
    } else if c.tau {
        let b: BlowupPoint = from_json(&text, "blow-up point")?;
        ctx.emit_json(&tau(&b, 1e-9)?)
    } else if let Some(id) = c.chart {
        let coords: [f64; 3] = from_json(&text, "chart coordinates")?;
        ctx.emit_json(&boundary_component(id).point(coords)?)
    } else {
        unreachable!("clap requires one conversion")
    }
}

fn cmd_ikm(ctx: &Context, args: &IkmArgs) -> CliResult<()> {
    if let Some(p) = &args.point {
        let arch = ctx.architecture(&[], "a Study point")?;
        let g = ctx.geometry(arch)?;
        ctx.emit_json(&ikm(&g, &study_point(p)?)?)
    } else {
        let c = args.boundary.as_ref().expect("clap requires --point or --boundary");
        let arch = ctx.architecture(&[], "a boundary point")?;
        let g = ctx.geometry(arch)?;
        let w = [c[0], c[1], c[2], c[3]];
        let y = [c[4], c[5], c[6], c[7]];
        let b = studykin::compactify::BoundaryPoint::new(w, y)?;
        ctx.emit_json(&degenerate_ikm(&g, &b))
    }
}

fn cmd_ddkp(ctx: &Context, args: &DdkpArgs) -> CliResult<()> {
    let g = ctx.geometry_for_component(args.component)?;
    let d = BoundaryJointCoords::new(args.d1, args.d2);
    ctx.emit_json(&degenerate_dkp_oriented(&g, args.component, d, args.orientation)?)
}

fn cmd_critical(ctx: &Context, args: &CriticalArgs) -> CliResult<()> {
    let g = ctx.geometry_for_component(args.component)?;
    ctx.emit_json(&degenerate_critical_values(&g, args.component)?)
}

fn cmd_dkp(ctx: &Context, args: &DkpArgs) -> CliResult<()> {
    let g = ctx.geometry_for_mode(args.mode)?;
    let r = lengths(&args.r)?;
    let rep = dkp(&g, args.mode, &r, &ctx.options(args.budget, DkpOptions::default().starts))?;
    eprintln!("{} solutions from {} starts ({} converged)", rep.solutions.len(), rep.starts, rep.converged);
    if let Some(d) = &rep.diagnostic {
        eprintln!("{d}");
    }
    let out: Vec<SolutionOut> = rep.solutions.iter().map(SolutionOut::from).collect();
    ctx.emit_json(&out)
}

fn cmd_refine(ctx: &Context, args: &RefineArgs) -> CliResult<()> {
    let g = ctx.geometry_for_mode(args.mode)?;
    let r = lengths(&args.r)?;
    let seed = match (&args.rotation, &args.start) {
        (Some(q), _) => seed_from_rotation(&g, &r, &[q[0], q[1], q[2], q[3]], !args.lower)?,
        (None, Some(p)) => study_point(p)?,
        (None, None) => unreachable!("clap requires --rotation or --start"),
    };
    let sol = dkp_refine(&g, args.mode, &r, &seed)?;
    ctx.emit_json(&SolutionOut::from(&sol))
}

fn cmd_scan(ctx: &Context, args: &ScanArgs) -> CliResult<()> {
    let g = ctx.geometry_for_mode(args.mode)?;
    let budget = Budget { starts: args.starts, seed: args.seed };
    let cfg = ScanConfig {
        mode: args.mode,
        r3: args.r3,
        window: args.window,
        resolution: args.resolution,
        options: ctx.options(budget, 64),
        jobs: args.jobs.or(ctx.cfg.jobs).unwrap_or(1),
    };
    let res = scan_grid(&g, &cfg)?;
    let hist: Vec<String> = res.histogram().iter().map(|(k, v)| format!("{k}:{v}")).collect();
    eprintln!("count histogram {}", hist.join(" "));
    ctx.emit(&res.to_csv())
}

fn cmd_sweep(ctx: &Context, args: &SweepArgs) -> CliResult<()> {
    let arch = ctx.architecture(&[Architecture::Upu3Tsai], "the K8 sweep")?;
    if !modes_of(arch).contains(&ModeId::K8) {
        return Err(Error::ModeArchitecture { mode: "K8".into(), architecture: arch.to_string() }.into());
    }
    let g = ctx.geometry(arch)?;
    let pts = k8_sweep(&g, &args.r1.0, args.r23, &ctx.options(args.budget, 2048))?;
    #[derive(Serialize)]
    struct PointOut<'a> {
        r1: f64,
        count_lower_bound: usize,
        solutions: Vec<SolutionOut<'a>>,
    }
    let out: Vec<PointOut> = pts
        .iter()
        .map(|p| PointOut {
            r1: p.r1,
            count_lower_bound: p.count_lower_bound,
            solutions: p.solutions.iter().map(SolutionOut::from).collect(),
        })
        .collect();
    ctx.emit_json(&out)
}

fn cmd_verify(ctx: &Context, args: &VerifyArgs) -> CliResult<()> {
    let opts = VerifyOptions {
        quick: args.quick,
        strict: args.strict,
        seed: args.seed.or(ctx.cfg.seed).unwrap_or(0),
        samples: args.samples,
        data_dir: args.data_dir.clone(),
    };
    let rep = verify::run(&opts);
    let mut text = String::new();
    for c in &rep.checks {
        text.push_str(&c.to_string());
        text.push('\n');
    }
    let ok = rep.passed(args.strict);
    text.push_str(if ok { "verification passed\n" } else { "verification FAILED\n" });
    ctx.emit(&text)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Verification)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context::load(cli.global.clone())?;
    match &cli.command {
        Command::Convert(a) => cmd_convert(&ctx, a),
        Command::Ikm(a) => cmd_ikm(&ctx, a),
        Command::Ddkp(a) => cmd_ddkp(&ctx, a),
        Command::Critical(a) => cmd_critical(&ctx, a),
        Command::Dkp(a) => cmd_dkp(&ctx, a),
        Command::Refine(a) => cmd_refine(&ctx, a),
        Command::Scan(a) => cmd_scan(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
