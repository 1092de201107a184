use clap::{Args, Parser, Subcommand};
use dampwave::decay::{build_chain, construct_h, solve_envelope, MonotoneFn};
use dampwave::dynamics::{make_feedback, FeedbackKind};
use dampwave::geometry::{classify_visibility, region_csv, shape_operator, vertex_normals_and_areas};
use dampwave::harness::{run_experiment, verify, ExperimentConfig, MeshSource};
use dampwave::mesh::validate_closed_manifold;
use dampwave::Vec3;
use std::path::PathBuf;
use std::process::ExitCode;

/// Locally damped waves on closed surfaces: meshes, simulation and decay certificates.
#[derive(Parser)]
#[command(name = "dampwave", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validation report for a mesh file or generator spec (icosphere:R:S, torus:R:r:NU:NV).
    MeshInfo { source: MeshSource },
    /// Per-vertex curvature and visibility table.
    Classify {
        #[arg(long)]
        mesh: MeshSource,
        /// Observer position `x,y,z`.
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        x0: Vec3,
    },
    /// Full pipeline into an artifact directory.
    Simulate(SimulateArgs),
    /// Comparison envelope S' = -q(S) only.
    Envelope(EnvelopeArgs),
    /// Re-check an artifact directory against its manifest.
    Verify {
        #[arg(long = "run")]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// sphere-full, sphere-cap or torus-outer.
    #[arg(long)]
    preset: Option<String>,
    /// Override a config key, e.g. `--set time.dt=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides run.output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnvelopeArgs {
    /// Feedback law: linear[:k], power:p or saturated:p:k.
    #[arg(long)]
    feedback: FeedbackKind,
    #[arg(long = "E0")]
    e0: f64,
    /// Reference mode q(S) = S^k instead of the chain built from the feedback law.
    #[arg(long, conflicts_with = "q_linear")]
    q_power: Option<f64>,
    /// Reference mode q(S) = k S.
    #[arg(long)]
    q_linear: Option<f64>,
    /// measΣ for the chain.
    #[arg(long, default_value_t = 4.0 * std::f64::consts::PI)]
    meas_sigma: f64,
    /// ‖a‖∞ for the chain.
    #[arg(long, default_value_t = 1.0)]
    a_inf: f64,
    #[arg(long = "L", default_value_t = 1.0)]
    l: f64,
    #[arg(long)]
    tmax: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt_ode: f64,
    /// Print the whole curve as `t,S`.
    #[arg(long)]
    table: bool,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("'{c}': {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {} components", v.len())),
    }
}

type Res = Result<(), Box<dyn std::error::Error>>;

fn mesh_info(source: &MeshSource) -> Res {
    let mesh = source.load()?;
    let report = validate_closed_manifold(&mesh);
    print!("{report}");
    println!("area = {}", mesh.total_area());
    println!("min_edge = {}", mesh.min_edge_length());
    println!("max_edge = {}", mesh.max_edge_length());
    if !report.is_valid() {
        return Err("mesh is not a valid closed oriented surface".into());
    }
    Ok(())
}

fn classify(source: &MeshSource, x0: Vec3) -> Res {
    let mesh = source.load()?;
    let frame = vertex_normals_and_areas(&mesh)?;
    let curv = shape_operator(&mesh, &frame.normals)?;
    let decomp = classify_visibility(&mesh, &frame.normals, x0);
    print!("{}", region_csv(&curv, &decomp, None));
    Ok(())
}

fn simulate(args: SimulateArgs) -> Res {
    let mut overrides = args.overrides;
    if let Some(out) = &args.out {
        overrides.push(format!("run.output={:?}", out.display().to_string()));
    }
    let cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::from_file(path, &overrides)?,
        (None, Some(name)) => ExperimentConfig::preset(name, &overrides)?,
        (None, None) => unreachable!("clap requires one of --config/--preset"),
    };
    let run = run_experiment(&cfg)?;
    println!("output = {}", run.dir.display());
    println!("lambda1 = {}", run.lambda1);
    println!("T0 = {}", run.t0);
    println!("dt = {}", run.dt);
    print!("{}", run.certification);
    if let Some(m) = run.multiplier {
        println!("multiplier_normalized = {}", m.normalized);
    }
    Ok(())
}

fn envelope(a: EnvelopeArgs) -> Res {
    let q = match (a.q_power, a.q_linear) {
        (Some(k), _) => MonotoneFn::Power { coef: 1.0, exponent: k },
        (None, Some(k)) => MonotoneFn::Linear { slope: k },
        (None, None) => {
            let g = make_feedback(a.feedback)?;
            let chain = build_chain(construct_h(&g)?, a.meas_sigma, a.a_inf, g.k0(), a.l)?;
            chain.q
        }
    };
    let curve = solve_envelope(&q, a.e0, a.tmax, a.dt_ode)?;
    if a.table {
        println!("t,S");
        for (t, s) in curve.t.iter().zip(&curve.s) {
            println!("{t:.16e},{s:.16e}");
        }
    }
    println!("S({}) = {:.10}", a.tmax, curve.at(a.tmax));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.cmd {
        Cmd::MeshInfo { source } => mesh_info(&source),
        Cmd::Classify { mesh, x0 } => classify(&mesh, x0),
        Cmd::Simulate(args) => simulate(args),
        Cmd::Envelope(args) => envelope(args),
        Cmd::Verify { dir } => verify(&dir).map(|r| print!("{r}")).map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
