use super::manifest::{sha256_hex, Manifest};
use super::{ExperimentConfig, HarnessError};
use crate::decay::{build_chain, certify, construct_h, envelope_csv, solve_envelope, CertificationReport, ENVELOPE_DT};
use crate::dynamics::{
    initial_state, make_feedback, multiplier_residual, simulate, MultiplierReport, SimulationParams, Trajectory,
};
use crate::format::num;
use crate::geometry::{
    build_damping, check_admissible_patch, classify_visibility, region_csv, shape_operator,
    vertex_normals_and_areas, DampingParams,
};
use crate::mesh::{validate_closed_manifold, write_off};
use crate::operators::{first_nonzero_eigenvalue, DiscreteOperators};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

/// Pipeline stages, in order. A failure is recorded in the manifest under this name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Mesh,
    Geometry,
    Operators,
    Dynamics,
    Decay,
    Multiplier,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mesh => "mesh",
            Self::Geometry => "geometry",
            Self::Operators => "operators",
            Self::Dynamics => "dynamics",
            Self::Decay => "decay",
            Self::Multiplier => "multiplier",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a successful run produced, besides the files on disk.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub lambda1: f64,
    pub t0: f64,
    pub dt: f64,
    pub trajectory: Trajectory,
    pub certification: CertificationReport,
    pub multiplier: Option<MultiplierReport>,
    pub manifest: Manifest,
}

/// One writer per directory: every file goes through here so that it lands in the manifest.
struct Artifacts {
    dir: PathBuf,
    manifest: Manifest,
    files: Vec<(String, String)>,
}

impl Artifacts {
    fn create(dir: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Manifest::default(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))?;
        self.files.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    fn finish(mut self) -> Result<Manifest, HarnessError> {
        for (name, hash) in std::mem::take(&mut self.files) {
            self.manifest.set(format!("file.{name}.sha256"), hash);
        }
        let path = self.dir.join("manifest.txt");
        std::fs::write(&path, self.manifest.to_string()).map_err(|e| HarnessError::io(&path, e))?;
        Ok(self.manifest)
    }
}

/// Runs the whole pipeline and writes the artifact directory `config.output`.
///
/// A failing stage is recorded in the manifest (`status = failed`, `failed_stage`, `error`)
/// together with the hashes of everything written so far, and returned as
/// [`HarnessError::Stage`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    let mut art = Artifacts::create(&config.output)?;
    art.manifest.set("status", "running");
    match pipeline(config, &mut art) {
        Ok(mut out) => {
            art.manifest.set("status", "ok");
            out.manifest = art.finish()?;
            Ok(out)
        }
        Err((stage, err)) => {
            art.manifest.set("status", "failed");
            art.manifest.set(format!("stage.{stage}"), "failed");
            art.manifest.set("failed_stage", stage.name());
            art.manifest.set("error", err.to_string().replace('\n', " "));
            art.finish()?;
            Err(HarnessError::Stage {
                stage,
                source: Box::new(err),
            })
        }
    }
}

fn at<T, E: Into<HarnessError>>(stage: Stage, r: Result<T, E>) -> Result<T, (Stage, HarnessError)> {
    r.map_err(|e| (stage, e.into()))
}

fn pipeline(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<RunOutcome, (Stage, HarnessError)> {
    // the copy drops run.output so that the same experiment hashes the same wherever it runs
    let mut table = cfg.to_table();
    if let Some(run) = table.get_mut("run").and_then(|v| v.as_table_mut()) {
        run.remove("output");
    }
    at(Stage::Mesh, art.write("config.toml", &table.to_string()))?;

    let mesh = at(Stage::Mesh, cfg.mesh.load())?;
    let validation = validate_closed_manifold(&mesh);
    at(Stage::Mesh, art.write("validation.txt", &validation.to_string()))?;
    at(Stage::Mesh, art.write("mesh.off", &write_off(&mesh)))?;
    if !validation.is_valid() {
        return Err((Stage::Mesh, HarnessError::Config("mesh is not a valid closed oriented surface".into())));
    }
    art.manifest.set("stage.mesh", "ok");

    let g = Stage::Geometry;
    let frame = at(g, vertex_normals_and_areas(&mesh))?;
    let curv = at(g, shape_operator(&mesh, &frame.normals))?;
    let mut decomp = classify_visibility(&mesh, &frame.normals, cfg.x0);
    at(g, decomp.select_patches(&mesh, &cfg.patches))?;
    // admissibility is written before the damping is built so that a rejection leaves a record
    let mut adm = String::new();
    let _ = writeln!(adm, "patches = {}", decomp.patches.len());
    let _ = writeln!(adm, "m1_area_fraction = {}", num(decomp.m1_area_fraction(&frame.areas)));
    // the mean curvature enters the multiplier estimate through sup|H|
    let _ = writeln!(adm, "sup_abs_H = {}", num(curv.sup_abs_h()));
    let _ = writeln!(adm, "waive_admissibility = {}", cfg.waive_admissibility);
    let mut all_ok = true;
    for (i, patch) in decomp.patches.iter().enumerate() {
        let r = at(g, check_admissible_patch(&curv, patch, cfg.eps_umb, cfg.tol_h))?;
        all_ok &= r.admissible;
        let _ = writeln!(adm, "patch.{i}.vertices = {}", patch.len());
        let _ = writeln!(adm, "patch.{i}.H_max = {}", num(r.h_max));
        let _ = writeln!(adm, "patch.{i}.gap_max = {}", num(r.gap_max));
        let _ = writeln!(adm, "patch.{i}.tol_h = {}", num(r.tol_h));
        let _ = writeln!(adm, "patch.{i}.eps_umb = {}", num(r.eps_umb));
        let _ = writeln!(adm, "patch.{i}.admissible = {}", r.admissible);
    }
    let _ = writeln!(adm, "admissible = {all_ok}");
    at(g, art.write("admissibility.txt", &adm))?;
    let params = DampingParams {
        a0: cfg.a0,
        a_max: cfg.a_max,
        eps_tube: cfg.eps_tube,
        eps_umb: cfg.eps_umb,
        tol_h: cfg.tol_h,
        waive_admissibility: cfg.waive_admissibility,
    };
    let damping = match build_damping(&mesh, &decomp, &curv, &params) {
        Ok(d) => d,
        Err(e) => {
            let _ = art.write("regions.csv", &region_csv(&curv, &decomp, None));
            return Err((g, e.into()));
        }
    };
    at(g, art.write("regions.csv", &region_csv(&curv, &decomp, Some(&damping))))?;
    art.manifest.set("stage.geometry", "ok");

    let o = Stage::Operators;
    let ops = at(o, DiscreteOperators::assemble(&mesh))?;
    let lambda1 = at(o, first_nonzero_eigenvalue(&ops.stiffness, &ops.mass))?;
    let t0 = cfg.t0.unwrap_or(4.0 / lambda1.sqrt());
    let dt = cfg.dt.unwrap_or(0.5 * mesh.min_edge_length());
    art.manifest.set("lambda1", num(lambda1));
    art.manifest.set("T0", num(t0));
    art.manifest.set("dt", num(dt));
    art.manifest.set("stage.operators", "ok");

    let d = Stage::Dynamics;
    let law = at(d, make_feedback(cfg.feedback))?;
    let initial = at(d, initial_state(&mesh, &ops, &cfg.initial.resolve(cfg.seed)))?;
    let sim = SimulationParams {
        dt,
        t_max: cfg.t_max,
        sample_stride: cfg.sample_stride,
        record_snapshots: cfg.snapshots,
    };
    let traj = at(d, simulate(&ops, &damping.a, law, initial, sim))?;
    at(d, art.write("trajectory.csv", &traj.to_csv()))?;
    if cfg.snapshots {
        let snaps = at(d, traj.snapshots_csv())?;
        at(d, art.write("snapshots.csv", &snaps))?;
    }
    art.manifest.set("E0", num(traj.initial_energy()));
    art.manifest.set("max_halvings", traj.max_halvings.to_string());
    art.manifest.set("stage.dynamics", "ok");

    let k = Stage::Decay;
    let h = at(k, construct_h(&law))?;
    let meas_sigma = mesh.total_area() * t0;
    let chain = at(k, build_chain(h, meas_sigma, traj.a_inf, law.k0(), 1.0))?;
    let cert = at(k, certify(&traj, &chain, t0))?;
    let env = match cert.envelope_at(0.0) {
        Some(_) => envelope_csv(&traj, |t| cert.envelope_at(t).unwrap_or(f64::NAN)),
        None => {
            // no admissible L: report the unfitted chain so the table is still complete
            let tau = (cfg.t_max / t0 - 1.0).max(ENVELOPE_DT);
            let curve = at(k, solve_envelope(&chain.q, traj.initial_energy(), tau, ENVELOPE_DT))?;
            envelope_csv(&traj, |t| curve.at((t / t0 - 1.0).max(0.0)))
        }
    };
    at(k, art.write("envelope.csv", &env))?;
    at(k, art.write("certification.txt", &cert.report.to_string()))?;
    art.manifest.set("envelope_ok", cert.report.envelope_ok.to_string());
    art.manifest.set("stage.decay", "ok");

    let multiplier = if cfg.multiplier {
        let m = Stage::Multiplier;
        let rep = at(m, multiplier_residual(&mesh, &ops, &traj, &decomp, &curv, &damping.a))?;
        let mut text = String::new();
        let _ = writeln!(text, "boundary = {}", num(rep.boundary));
        let _ = writeln!(text, "divergence = {}", num(rep.divergence));
        let _ = writeln!(text, "hessian = {}", num(rep.hessian));
        let _ = writeln!(text, "damping = {}", num(rep.damping));
        let _ = writeln!(text, "residual = {}", num(rep.residual));
        let _ = writeln!(text, "normalized = {}", num(rep.normalized));
        at(m, art.write("multiplier.txt", &text))?;
        art.manifest.set("stage.multiplier", "ok");
        Some(rep)
    } else {
        None
    };

    Ok(RunOutcome {
        dir: art.dir.clone(),
        lambda1,
        t0,
        dt,
        trajectory: traj,
        certification: cert.report,
        multiplier,
        manifest: Manifest::default(),
    })
}
