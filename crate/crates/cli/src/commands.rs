use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use echomesh::config::PipelineConfig;
use echomesh::gradcheck::{gradient_suite, GradcheckRow};
use echomesh::io::{export_png, read_image, read_signal, write_image, write_signal, write_volume};
use echomesh::mesh::{load_mesh, make_ellipsoid, write_obj, TriangleMesh};
use echomesh::metrics::{evaluate_all, MetricParams};
use echomesh::pipeline::{form_images, reconstruct_from, simulate as simulate_scene};
use echomesh::recon::{trace_to_csv, ReconMode, ReconstructionResult};
use echomesh::sar::{GridSpec, SarImage};
use echomesh::Vec3;

use crate::error::{CliError, CliResult};
use crate::manifest::{
    check_writable, create_parent, default_run_dir, hash_output, require_input, write_atomic, FileHash, Manifest,
    StagedDir, Step,
};
use crate::{
    ConfigArg, EvaluateArgs, GradcheckArgs, ImageArgs, MakeSceneArgs, PipelineArgs, ReconstructArgs, SimulateArgs,
};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

fn load_config(arg: &ConfigArg) -> CliResult<(PipelineConfig, Option<PathBuf>)> {
    match &arg.config {
        Some(p) => {
            require_input(p)?;
            Ok((PipelineConfig::load(p)?, Some(p.clone())))
        }
        None => Ok((PipelineConfig::default(), None)),
    }
}

fn config_echo(cfg: &PipelineConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn load_input_mesh(path: &Path) -> CliResult<TriangleMesh> {
    require_input(path)?;
    Ok(load_mesh(path)?)
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{name}.manifest.json"))
}

fn expand(template: &str, view: usize) -> PathBuf {
    PathBuf::from(template.replace("{v}", &view.to_string()))
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let (mut cfg, cfg_path) = load_config(&a.config)?;
    if let Some(m) = a.mode {
        cfg.simulation.visibility = m;
    }
    if a.snr_db.is_some() {
        cfg.simulation.snr_db = a.snr_db;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let mesh = load_input_mesh(&a.mesh)?;
    let manifest_path = manifest_path_for(&a.out);
    check_writable(&a.out, a.force)?;
    check_writable(&manifest_path, a.force)?;

    let signal = simulate_scene(&mesh, &cfg)?;
    let mut m = Manifest::new(
        "simulate",
        cfg.seed,
        json!({"mode": cfg.simulation.visibility, "snr_db": cfg.simulation.snr_db}),
        config_echo(&cfg),
    );
    m.add_input("mesh", &a.mesh)?;
    if let Some(p) = cfg_path {
        m.add_input("config", &p)?;
    }
    create_parent(&a.out)?;
    let tmp = crate::manifest::temp_sibling(&a.out);
    write_signal(&signal, &tmp)?;
    fs::rename(&tmp, &a.out).map_err(|e| echomesh::Error::io(&a.out, e))?;
    let base = a.out.parent().unwrap_or(Path::new(""));
    m.outputs.push(hash_output("signal", base, &a.out)?);
    write_atomic(&manifest_path, m.to_json().as_bytes())
}

/// Writes the per-view volumes, images and optional PNGs, returning their
/// hashes relative to `base`.
fn write_views(
    signal_path: &Path,
    cfg: &PipelineConfig,
    vol_tpl: &str,
    img_tpl: &str,
    png_tpl: Option<&str>,
    base: &Path,
    force: bool,
) -> CliResult<Vec<FileHash>> {
    let signal = read_signal(signal_path)?;
    let views = form_images(&signal, cfg)?;
    let mut planned = Vec::new();
    for (vol, _) in &views {
        let v = vol.view_id;
        let mut paths = vec![expand(vol_tpl, v), expand(img_tpl, v)];
        if let Some(t) = png_tpl {
            paths.push(expand(t, v));
        }
        for p in &paths {
            check_writable(p, force)?;
        }
        planned.push(paths);
    }
    let mut out = Vec::new();
    for ((vol, img), paths) in views.iter().zip(&planned) {
        for p in paths {
            create_parent(p)?;
        }
        write_volume(vol, &paths[0])?;
        write_image(img, &paths[1])?;
        out.push(hash_output("volume", base, &paths[0])?);
        out.push(hash_output("image", base, &paths[1])?);
        if let Some(p) = paths.get(2) {
            export_png(&img.image, p)?;
            out.push(hash_output("png", base, p)?);
        }
    }
    Ok(out)
}

pub fn image(a: &ImageArgs) -> CliResult<()> {
    let (mut cfg, cfg_path) = load_config(&a.config)?;
    if let Some(g) = &a.grid {
        require_input(g)?;
        let text = fs::read_to_string(g).map_err(|e| echomesh::Error::io(g, e))?;
        cfg.grid = serde_json::from_str::<GridSpec>(&text)
            .map_err(|e| echomesh::Error::Config(format!("{}: {e}", g.display())))?;
    }
    cfg.validate()?;
    require_input(&a.signal)?;
    if !a.images.contains("{v}") || !a.out.contains("{v}") {
        return Err(CliError::Usage("--out and --images need a {v} placeholder".into()));
    }
    let first = expand(&a.images, 0);
    let manifest_path = a.manifest.clone().unwrap_or_else(|| {
        first.parent().unwrap_or(Path::new("")).join("image.manifest.json")
    });
    check_writable(&manifest_path, a.force)?;

    let mut m = Manifest::new(
        "image",
        cfg.seed,
        json!({"out": a.out, "images": a.images, "png": a.png}),
        config_echo(&cfg),
    );
    m.add_input("signal", &a.signal)?;
    if let Some(p) = cfg_path {
        m.add_input("config", &p)?;
    }
    if let Some(g) = &a.grid {
        m.add_input("grid", g)?;
    }
    m.outputs = write_views(&a.signal, &cfg, &a.out, &a.images, a.png.as_deref(), Path::new(""), a.force)?;
    create_parent(&manifest_path)?;
    write_atomic(&manifest_path, m.to_json().as_bytes())
}

fn read_images(paths: &[PathBuf]) -> CliResult<Vec<SarImage>> {
    let mut images = paths
        .iter()
        .map(|p| {
            require_input(p)?;
            Ok(read_image(p)?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    images.sort_by_key(|i| i.view_id);
    if images.windows(2).any(|w| w[0].view_id == w[1].view_id) {
        return Err(echomesh::Error::Dimension("two images share a view id".into()).into());
    }
    Ok(images)
}

#[derive(Serialize)]
struct ResultDoc<'a> {
    schema_version: u32,
    mode: ReconMode,
    seed: u64,
    iterations: usize,
    length_scale: f64,
    template_vertices: usize,
    stage_vertices: Vec<usize>,
    euler_characteristic: Vec<i64>,
    radar_initial: Option<f64>,
    radar_final: Option<f64>,
    meshes: Vec<String>,
    final_mesh: &'static str,
    trace: &'static str,
    config: &'a PipelineConfig,
}

/// Writes template, stage and final meshes, the loss trace and result.json
/// into `dir`.
fn write_recon_outputs(r: &ReconstructionResult, cfg: &PipelineConfig, dir: &Path, base: &Path) -> CliResult<Vec<FileHash>> {
    let mut files: Vec<(String, String)> = vec![("template.obj".into(), write_obj(&r.template))];
    for (k, mesh) in r.stages.iter().enumerate() {
        files.push((format!("stage_{}.obj", k + 1), write_obj(mesh)));
    }
    files.push(("final.obj".into(), write_obj(r.final_mesh())));
    files.push(("trace.csv".into(), trace_to_csv(&r.trace)));
    let doc = ResultDoc {
        schema_version: RESULT_SCHEMA_VERSION,
        mode: r.mode,
        seed: r.seed,
        iterations: r.iterations,
        length_scale: r.length_scale,
        template_vertices: r.template.vertex_count(),
        stage_vertices: r.stages.iter().map(|m| m.vertex_count()).collect(),
        euler_characteristic: r.stages.iter().map(|m| m.euler_characteristic()).collect(),
        radar_initial: r.radar_initial,
        radar_final: r.radar_final,
        meshes: files.iter().filter(|(n, _)| n.ends_with(".obj")).map(|(n, _)| n.clone()).collect(),
        final_mesh: "final.obj",
        trace: "trace.csv",
        config: cfg,
    };
    files.push(("result.json".into(), pretty(&doc)));
    let mut out = Vec::new();
    for (name, text) in files {
        let p = dir.join(&name);
        fs::write(&p, text).map_err(|e| echomesh::Error::io(&p, e))?;
        let role = if name.ends_with(".obj") { "mesh" } else { name.split('.').next().unwrap_or("") };
        out.push(hash_output(role, base, &p)?);
    }
    log::info!("reconstruction took {:.1} s", r.wall_time_s);
    Ok(out)
}

pub fn reconstruct(a: &ReconstructArgs) -> CliResult<PathBuf> {
    let (mut cfg, cfg_path) = load_config(&a.config)?;
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let images = read_images(&a.images)?;
    let signal = match &a.signals {
        Some(p) => {
            require_input(p)?;
            Some(read_signal(p)?)
        }
        None => None,
    };
    let gt = a.gt.as_deref().map(load_input_mesh).transpose()?;
    if cfg.mode == ReconMode::Supervised && gt.is_none() {
        return Err(echomesh::Error::Config("supervised mode needs --gt".into()).into());
    }
    let target = a.out.clone().unwrap_or_else(|| default_run_dir("reconstruct"));
    let staged = StagedDir::new(&target, a.force)?;

    let mut trace = Vec::new();
    let r = reconstruct_from(&images, signal.as_ref(), gt.as_ref(), &cfg, cfg.mode, cfg.seed, &mut trace)?;
    let mut m = Manifest::new("reconstruct", cfg.seed, json!({"mode": cfg.mode}), config_echo(&cfg));
    for p in &a.images {
        m.add_input("image", p)?;
    }
    if let Some(p) = &a.signals {
        m.add_input("signal", p)?;
    }
    if let Some(p) = &a.gt {
        m.add_input("gt", p)?;
    }
    if let Some(p) = cfg_path {
        m.add_input("config", &p)?;
    }
    m.outputs = write_recon_outputs(&r, &cfg, &staged.path, &staged.path)?;
    let mp = staged.path.join("manifest.json");
    fs::write(&mp, m.to_json()).map_err(|e| echomesh::Error::io(&mp, e))?;
    staged.commit()
}

pub fn evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let (cfg, cfg_path) = load_config(&a.config)?;
    let params = MetricParams {
        voxels: a.voxels.unwrap_or(cfg.metrics.voxels),
        samples: a.samples.unwrap_or(cfg.metrics.samples),
        seed: a.seed.unwrap_or(cfg.metrics.seed),
    };
    let pred = load_input_mesh(&a.pred)?;
    let gt = load_input_mesh(&a.gt)?;
    let manifest_path = manifest_path_for(&a.out);
    check_writable(&a.out, a.force)?;
    check_writable(&manifest_path, a.force)?;
    let report = evaluate_all(&pred, &gt, &params)?;
    let mut m = Manifest::new("evaluate", params.seed, serde_json::to_value(params).unwrap(), config_echo(&cfg));
    m.add_input("pred", &a.pred)?;
    m.add_input("gt", &a.gt)?;
    if let Some(p) = cfg_path {
        m.add_input("config", &p)?;
    }
    create_parent(&a.out)?;
    write_atomic(&a.out, pretty(&report).as_bytes())?;
    let base = a.out.parent().unwrap_or(Path::new(""));
    m.outputs.push(hash_output("report", base, &a.out)?);
    write_atomic(&manifest_path, m.to_json().as_bytes())
}

const PIPELINE_STEPS: [&str; 4] = ["simulate", "image", "reconstruct", "evaluate"];

fn step_intact(dir: &Path, step: &Step) -> bool {
    step.outputs.iter().all(|f| {
        crate::manifest::sha256_file(&dir.join(&f.path))
            .map(|h| h == f.sha256)
            .unwrap_or(false)
    })
}

fn run_step(name: &str, dir: &Path, scene: &TriangleMesh, cfg: &PipelineConfig) -> CliResult<Vec<FileHash>> {
    let sig = dir.join("echoes.sig");
    match name {
        "simulate" => {
            let signal = simulate_scene(scene, cfg)?;
            write_signal(&signal, &sig)?;
            Ok(vec![hash_output("signal", dir, &sig)?])
        }
        "image" => {
            let tpl = |s: &str| dir.join(s).display().to_string();
            write_views(&sig, cfg, &tpl("vol_{v}.vol"), &tpl("img_{v}.simg"), Some(&tpl("img_{v}.png")), dir, true)
        }
        "reconstruct" => {
            let paths: Vec<PathBuf> = (0..cfg.scan.view_count()).map(|v| dir.join(format!("img_{v}.simg"))).collect();
            let images = read_images(&paths)?;
            let signal = read_signal(&sig)?;
            let recon = dir.join("recon");
            if recon.exists() {
                fs::remove_dir_all(&recon).map_err(|e| echomesh::Error::io(&recon, e))?;
            }
            fs::create_dir_all(&recon).map_err(|e| echomesh::Error::io(&recon, e))?;
            let mut trace = Vec::new();
            let r = reconstruct_from(&images, Some(&signal), Some(scene), cfg, cfg.mode, cfg.seed, &mut trace);
            let r = match r {
                Ok(r) => r,
                Err(e) => {
                    // Keep the rows leading up to a numeric failure.
                    let p = recon.join("trace.csv");
                    let _ = fs::write(&p, trace_to_csv(&trace));
                    return Err(e.into());
                }
            };
            write_recon_outputs(&r, cfg, &recon, dir)
        }
        "evaluate" => {
            let pred = load_mesh(dir.join("recon").join("final.obj"))?;
            let report = evaluate_all(&pred, scene, &cfg.metrics)?;
            let p = dir.join("report.json");
            fs::write(&p, pretty(&report)).map_err(|e| echomesh::Error::io(&p, e))?;
            Ok(vec![hash_output("report", dir, &p)?])
        }
        _ => unreachable!("unknown pipeline step {name}"),
    }
}

/// Runs every step into one directory and returns it. Each completed step is
/// recorded in `manifest.json` before the next starts.
pub fn pipeline(a: &PipelineArgs) -> CliResult<PathBuf> {
    let (mut cfg, cfg_path) = load_config(&a.config)?;
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let scene = load_input_mesh(&a.scene)?;
    if a.dry_run {
        println!("configuration ok");
        print!("{}", cfg.to_json());
        println!();
        return Ok(PathBuf::new());
    }

    let dir = match (&a.out, a.resume) {
        (Some(d), _) => d.clone(),
        (None, false) => default_run_dir("pipeline"),
        (None, true) => return Err(CliError::Usage("--resume needs --out".into())),
    };
    let manifest_path = dir.join("manifest.json");
    let mut m = Manifest::new("pipeline", cfg.seed, json!({"mode": cfg.mode}), config_echo(&cfg));
    m.add_input("scene", &a.scene)?;
    if let Some(p) = &cfg_path {
        m.add_input("config", p)?;
    }

    let mut done: Vec<Step> = Vec::new();
    if a.resume {
        if !manifest_path.is_file() {
            return Err(CliError::Resume(format!("no manifest in {}", dir.display())));
        }
        let old = Manifest::load(&manifest_path)?;
        if old.config != m.config || old.seed != m.seed {
            return Err(CliError::Resume("configuration differs from the recorded run".into()));
        }
        let scene_hash = |mm: &Manifest| mm.inputs.iter().find(|f| f.role == "scene").map(|f| f.sha256.clone());
        if scene_hash(&old) != scene_hash(&m) {
            return Err(CliError::Resume("scene differs from the recorded run".into()));
        }
        for (name, step) in PIPELINE_STEPS.iter().zip(&old.steps) {
            if step.name != *name || !step_intact(&dir, step) {
                break;
            }
            done.push(step.clone());
        }
    } else if dir.exists() && !crate::manifest::dir_is_empty(&dir) {
        if !a.force {
            return Err(CliError::OutputExists(dir));
        }
        fs::remove_dir_all(&dir).map_err(|e| echomesh::Error::io(&dir, e))?;
    }
    fs::create_dir_all(&dir).map_err(|e| echomesh::Error::io(&dir, e))?;
    write_atomic(&dir.join("config.json"), cfg.to_json().as_bytes())?;

    for name in PIPELINE_STEPS.iter().skip(done.len()) {
        log::info!("pipeline step {name}");
        let outputs = run_step(name, &dir, &scene, &cfg)?;
        done.push(Step {
            name: name.to_string(),
            outputs,
        });
        m.steps = done.clone();
        m.outputs = done.iter().flat_map(|s| s.outputs.clone()).collect();
        write_atomic(&manifest_path, m.to_json().as_bytes())?;
    }
    m.steps = done.clone();
    m.outputs = done.iter().flat_map(|s| s.outputs.clone()).collect();
    write_atomic(&manifest_path, m.to_json().as_bytes())?;
    Ok(dir)
}

fn gradcheck_table(rows: &[GradcheckRow]) -> String {
    let mut s = format!("{:<14} {:>6} {:>12} {:>10}  {}\n", "loss", "seeds", "max_rel_err", "tolerance", "status");
    for r in rows {
        s.push_str(&format!(
            "{:<14} {:>6} {:>12.3e} {:>10.0e}  {}\n",
            r.loss,
            r.seeds,
            r.max_rel_error,
            r.tolerance,
            if r.passed { "ok" } else { "FAILED" }
        ));
    }
    s
}

pub fn gradcheck(a: &GradcheckArgs) -> CliResult<()> {
    let (mut cfg, _) = load_config(&a.config)?;
    if let Some(k) = a.kappa {
        cfg.reflection.visibility_sharpness = k;
    }
    cfg.validate()?;
    let rows = gradient_suite(&cfg.fmcw, &cfg.reflection, a.seed, a.seeds)?;
    print!("{}", gradcheck_table(&rows));
    if let Some(p) = &a.out {
        create_parent(p)?;
        write_atomic(p, pretty(&rows).as_bytes())?;
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{}: {}", r.loss, r.cause.clone().unwrap_or_default()))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::GradcheckFailed(failed.join("; ")))
    }
}

pub fn make_scene(a: &MakeSceneArgs) -> CliResult<()> {
    check_writable(&a.out, a.force)?;
    let mesh = make_ellipsoid(a.level, [a.axes[0], a.axes[1], a.axes[2]], Vec3::zeros())?;
    create_parent(&a.out)?;
    write_atomic(&a.out, write_obj(&mesh).as_bytes())
}
