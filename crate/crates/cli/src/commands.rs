use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use serde::Serialize;
use smsp_core::cutgen::{ControlBox, CutGenConfig, OrderChoice};
use smsp_core::data::{
    default_max_dist, ingest_image, load_points_csv, make_yinyang, save_points_csv, split, write_pgm, Dataset, ImageGrid,
    LabeledPoint,
};
use smsp_core::eval::{
    metrics, timing_report, uniformity_experiment, write_timing_csv, Arm, PointMeasure, UniformityConfig,
};
use smsp_core::geometry::{convex_hull, ConvexPolygon, Point};
use smsp_core::inference::{accuracy, predict_all, prediction_rules, smc_fit, Hyperparams, SMCConfig};
use smsp_core::model::FittedModel;
use smsp_core::shape::{extract_shape, write_boundary_csv, ShapeConfig};
use smsp_core::SmspError;

use crate::args::*;

/// What a command produced, for the manifest.
pub struct Produced {
    pub outputs: Vec<PathBuf>,
    /// File or directory the manifest is written next to.
    pub anchor: PathBuf,
    pub seed: Option<u64>,
    pub deterministic: bool,
}

struct Input {
    data: Dataset,
    points: Vec<LabeledPoint>,
    grid: Option<ImageGrid>,
}

fn is_pgm(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn load_input(args: &InputArgs) -> Result<Input> {
    if is_pgm(&args.input) {
        let (grid, points) = ingest_image(&args.input, args.downscale, args.threshold)?;
        let data = Dataset::new(&points, Some(2))?;
        Ok(Input {
            data,
            points,
            grid: Some(grid),
        })
    } else {
        let points = load_points_csv(&args.input)?;
        let data = Dataset::new(&points, None)?;
        Ok(Input { data, points, grid: None })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SmspError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| SmspError::io(path, e))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SmspError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| SmspError::io(path, e))?;
    Ok(())
}

fn alpha_for(arg: &str, data: &Dataset) -> Result<Hyperparams> {
    if arg == "auto" {
        return Ok(Hyperparams::auto(data));
    }
    let values = arg
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| SmspError::Config(format!("bad --alpha `{arg}`: {e}")))?;
    Ok(Hyperparams::new(values)?)
}

fn sampler_configs(args: &SamplerArgs, budget: f64) -> Result<(SMCConfig, CutGenConfig)> {
    let order: OrderChoice = args.order.parse()?;
    let mut cutcfg = CutGenConfig::with_order(order);
    cutcfg.max_rejections = args.max_rejections;
    if let Some(v) = &args.abcd {
        let [a, b, c, d] = v[..] else {
            bail!(SmspError::Config("--abcd takes exactly four numbers".into()));
        };
        cutcfg.control_box = Some(ControlBox { a, b, c, d });
    }
    let cfg = SMCConfig {
        n_particles: args.particles,
        budget,
        ess_threshold: args.ess,
        n_workers: args.workers,
        seed: args.seed,
        max_cuts: args.cuts,
        resampler: args.resampler.clone(),
    };
    cfg.validate()?;
    cutcfg.validate()?;
    Ok((cfg, cutcfg))
}

pub fn simulate_yinyang(args: &SimulateArgs) -> Result<Produced> {
    let pts = make_yinyang(args.n, args.seed);
    let (train, test) = split(&pts, args.train_frac, args.seed)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| SmspError::io(&args.out_dir, e))?;
    let train_path = args.out_dir.join("train.csv");
    let test_path = args.out_dir.join("test.csv");
    save_points_csv(&train_path, &train)?;
    save_points_csv(&test_path, &test)?;
    println!("kept {} of {} draws: {} train, {} test", pts.len(), args.n, train.len(), test.len());
    Ok(Produced {
        outputs: vec![train_path, test_path],
        anchor: args.out_dir.clone(),
        seed: Some(args.seed),
        deterministic: true,
    })
}

pub fn fit(args: &FitArgs) -> Result<Produced> {
    let input = load_input(&args.input)?;
    let (cfg, cutcfg) = sampler_configs(&args.sampler, args.sampler.budget)?;
    let alpha = alpha_for(&args.sampler.alpha, &input.data)?;
    log::info!("fitting {} points with {} particles", input.data.len(), cfg.n_particles);
    let post = smc_fit(&input.data, &cfg, &cutcfg, &alpha)?;
    let model = post.to_model();
    model.save(&args.out)?;
    let best = post.best();
    println!(
        "rounds {}, resamples {}, ESS {:.1}, best particle {} cuts / {} leaves, digest {}",
        post.rounds,
        post.resample_events,
        post.ess(),
        best.state.n_cuts(),
        best.state.leaves.len(),
        model.digest()?
    );
    Ok(Produced {
        outputs: vec![args.out.clone()],
        anchor: args.out.clone(),
        seed: Some(cfg.seed),
        deterministic: true,
    })
}

pub fn predict(args: &PredictArgs) -> Result<Produced> {
    let model = FittedModel::load(&args.model)?;
    let rules = prediction_rules();
    let rule = rules.get(&args.rule)?;
    let input = load_input(&args.input)?;
    let preds = predict_all(&model, input.data.points(), rule);
    let labels: Vec<u32> = preds.iter().map(|p| p.label).collect();
    let truth: Vec<u32> = input.points.iter().map(|p| p.z).collect();
    println!("pct_correct {:.4}", 100.0 * accuracy(&labels, &truth)?);

    if is_pgm(&args.out) {
        let Some(grid) = &input.grid else {
            bail!(SmspError::Config("a PGM prediction needs an image input".into()));
        };
        write_pgm(create(&args.out)?, &grid.with_labels(labels)?).map_err(|e| SmspError::io(&args.out, e))?;
    } else {
        let mut w = create(&args.out)?;
        let io = |e| SmspError::io(&args.out, e);
        let probs: Vec<String> = (1..=model.n_labels).map(|k| format!("p{k}")).collect();
        writeln!(w, "x,y,label,{}", probs.join(",")).map_err(io)?;
        for (p, pred) in input.data.points().iter().zip(&preds) {
            let probs: Vec<String> = pred.probs.iter().map(f64::to_string).collect();
            writeln!(w, "{},{},{},{}", p.x, p.y, pred.label, probs.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    Ok(Produced {
        outputs: vec![args.out.clone()],
        anchor: args.out.clone(),
        seed: None,
        deterministic: true,
    })
}

pub fn metrics_cmd(args: &MetricsArgs) -> Result<Produced> {
    let (pred, _) = ingest_image(&args.pred, 1.0, args.threshold)?;
    let (truth, _) = ingest_image(&args.truth, 1.0, args.threshold)?;
    let report = metrics(&pred, &truth)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    let mut outputs = Vec::new();
    if let Some(out) = &args.out {
        write_json(out, &report)?;
        outputs.push(out.clone());
    }
    Ok(Produced {
        anchor: args.out.clone().unwrap_or_else(|| PathBuf::from("metrics.json")),
        outputs,
        seed: None,
        deterministic: true,
    })
}

#[derive(Serialize)]
struct PerimeterRow {
    budget: f64,
    perimeter: f64,
    /// Perimeter per unit budget.
    normalized: Option<f64>,
    segments: usize,
    cuts: usize,
    boundary_csv: String,
}

fn shape_domain(input: &Input) -> Result<ConvexPolygon> {
    let pts: Vec<Point> = match &input.grid {
        Some(g) => {
            let r = g.domain;
            vec![Point::new(r.x0, r.y0), Point::new(r.x1, r.y0), Point::new(r.x1, r.y1), Point::new(r.x0, r.y1)]
        }
        None => input.data.points().to_vec(),
    };
    Ok(convex_hull(&pts)?)
}

pub fn shape(args: &ShapeArgs) -> Result<Produced> {
    if args.budgets.is_empty() {
        bail!(SmspError::Config("--budgets is empty".into()));
    }
    let input = load_input(&args.input)?;
    let max_dist = match (args.max_dist, &input.grid) {
        (Some(d), _) => d,
        (None, Some(g)) => default_max_dist(g),
        (None, None) => bail!(SmspError::Config("--max-dist is required for point CSV input".into())),
    };
    let shape_cfg = ShapeConfig {
        points_per_cut: args.points_per_cut,
        k: args.k,
        max_dist,
    };
    shape_cfg.validate()?;
    let domain = shape_domain(&input)?;
    let alpha = alpha_for(&args.sampler.alpha, &input.data)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| SmspError::io(&args.out_dir, e))?;

    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    for &budget in &args.budgets {
        let (cfg, cutcfg) = sampler_configs(&args.sampler, budget)?;
        let post = smc_fit(&input.data, &cfg, &cutcfg, &alpha)?;
        let best = post.best();
        let result = extract_shape(&best.state.tree, &input.data, &domain, &shape_cfg, budget)?;
        let name = format!("boundary_tau{budget}.csv");
        let path = args.out_dir.join(&name);
        write_boundary_csv(create(&path)?, &result.segments)?;
        println!("budget {budget}: perimeter {:.4} from {} segments", result.perimeter, result.segments.len());
        rows.push(PerimeterRow {
            budget,
            perimeter: result.perimeter,
            normalized: result.normalized_perimeter(),
            segments: result.segments.len(),
            cuts: best.state.n_cuts(),
            boundary_csv: name,
        });
        outputs.push(path);
    }
    let summary = args.out_dir.join("perimeter.json");
    write_json(&summary, &rows)?;
    outputs.push(summary);
    Ok(Produced {
        outputs,
        anchor: args.out_dir.clone(),
        seed: Some(args.sampler.seed),
        deterministic: true,
    })
}

pub fn invariance(args: &InvarianceArgs) -> Result<Produced> {
    let arm: Arm = args.arm.parse()?;
    let mut cfg = UniformityConfig::new(args.curves, args.replicates, args.grid, args.seed, arm);
    cfg.measure = args.measure.parse::<PointMeasure>()?;
    let report = uniformity_experiment(&cfg)?;
    println!(
        "{} of {} replicates accepted (fraction {:.3})",
        report.p_values.iter().filter(|&&p| p > 0.05).count(),
        report.p_values.len(),
        report.fraction_accepted
    );
    write_json(&args.out, &report)?;
    Ok(Produced {
        outputs: vec![args.out.clone()],
        anchor: args.out.clone(),
        seed: Some(args.seed),
        deterministic: true,
    })
}

pub fn timing(args: &TimingArgs) -> Result<Produced> {
    let data = Dataset::new(&make_yinyang(args.n, args.seed), Some(2))?;
    let rows = timing_report(&args.particles, &args.workers, &data, args.cuts, args.repeats, args.seed)?;
    for r in &rows {
        println!("M={} workers={} rounds={} {:.3}s", r.particles, r.workers, r.rounds, r.seconds);
    }
    write_timing_csv(create(&args.out)?, &rows)?;
    Ok(Produced {
        outputs: vec![args.out.clone()],
        anchor: args.out.clone(),
        seed: Some(args.seed),
        deterministic: false,
    })
}
