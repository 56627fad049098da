use crate::args::{
    split_list, BenchArgs, CorruptArgs, DenoiseArgs, EvalArgs, Settings, SuperresArgs,
};
use crate::error::CliError;
use snpmrf::metrics::{ssim, MetricReport, SsimMode};
use snpmrf::noise::{build_superres_problem, corrupt, detect_min_max, NoiseSpec, PixelMask};
use snpmrf::pgm::{read_pgm, write_pgm, PgmMode};
use snpmrf::{format_psnr, restore_masked, ImageGrid, LabelOrder, Method, Restoration};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn read_image(path: &Path) -> Result<ImageGrid, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    read_pgm(&bytes).map_err(|source| CliError::Pgm {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_image(path: &Path, img: &ImageGrid) -> Result<(), CliError> {
    std::fs::write(path, write_pgm(img, PgmMode::Binary)).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `dir/stem.pgm` -> `dir/stem<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| CliError::io("<stdout>", e))
}

fn noise_level(flag: Option<f64>, s: &Settings) -> Result<f64, CliError> {
    match flag {
        Some(v) => Ok(v),
        None => s
            .file
            .parsed::<f64>("noise")?
            .ok_or_else(|| CliError::Usage("--noise is required".into())),
    }
}

pub fn corrupt_cmd(args: &CorruptArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.common.resolve()?;
    let level = noise_level(args.noise, &s)?;
    let spec = NoiseSpec::symmetric(level, s.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let img = read_image(&args.input)?;
    let noisy = corrupt(&img, &spec).map_err(|e| CliError::Input(e.to_string()))?;
    let mask = detect_min_max(&noisy);
    write_image(&args.out, &noisy)?;
    let mask_path = sibling(&args.out, ".mask.pgm");
    write_image(&mask_path, &mask.to_image())?;
    say(
        out,
        format_args!(
            "{} of {} pixels at an extreme value ({:.2}%); mask in {}",
            mask.missing_count(),
            img.len(),
            100.0 * mask.density(),
            mask_path.display()
        ),
    )
}

fn write_traces(out_image: &Path, r: &Restoration) -> Result<PathBuf, CliError> {
    let trace_path = sibling(out_image, ".trace.csv");
    write_text(&trace_path, &r.solution.trace.to_csv())?;
    if let Some(bound) = &r.solution.lower_bound {
        write_text(&sibling(out_image, ".bound.csv"), &bound.to_csv())?;
    }
    Ok(trace_path)
}

fn report_against(
    truth: &Path,
    restored: &ImageGrid,
    mode: SsimMode,
    out: &mut dyn Write,
) -> Result<MetricReport, CliError> {
    let reference = read_image(truth)?;
    let reference = if reference.same_shape(restored) {
        reference
    } else if reference.width() >= restored.width() && reference.height() >= restored.height() {
        reference
            .crop(0, 0, restored.width(), restored.height())
            .map_err(|e| CliError::Input(e.to_string()))?
    } else {
        return Err(CliError::Input(format!(
            "reference is {}x{}, result is {}x{}",
            reference.width(),
            reference.height(),
            restored.width(),
            restored.height()
        )));
    };
    let report = MetricReport::evaluate(&reference, restored, mode)
        .map_err(|e| CliError::Input(e.to_string()))?;
    say(
        out,
        format_args!(
            "psnr {} dB, ssim {:.2} ({mode})",
            format_psnr(report.psnr),
            report.ssim
        ),
    )?;
    Ok(report)
}

fn summarize(r: &Restoration, s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let t = &r.solution.trace;
    say(
        out,
        format_args!(
            "{} ({} labels, stride {}): energy {} -> {} after {} cycles",
            r.solution.method,
            s.params.labels.len(),
            s.label_stride,
            t.initial_energy().unwrap_or_default(),
            r.solution.energy(),
            t.cycles()
        ),
    )?;
    if let Some(b) = r
        .solution
        .lower_bound
        .as_ref()
        .and_then(|b| b.final_bound())
    {
        say(out, format_args!("lower bound {b}"))?;
    }
    say(out, format_args!("final energy {}", r.solution.energy()))
}

pub fn denoise_cmd(args: &DenoiseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.common.resolve()?;
    let method = s.method(args.method.as_deref())?;
    let noisy = read_image(&args.input)?;
    let mask = match &args.mask {
        Some(p) => {
            let m = PixelMask::from_image(&read_image(p)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            if m.width() != noisy.width() || m.height() != noisy.height() {
                return Err(CliError::Input(format!(
                    "mask is {}x{}, image is {}x{}",
                    m.width(),
                    m.height(),
                    noisy.width(),
                    noisy.height()
                )));
            }
            m
        }
        None => detect_min_max(&noisy),
    };
    let r = restore_masked(
        noisy,
        mask,
        s.params.clone(),
        method,
        s.init,
        &s.solver_config(method),
    )?;
    write_image(&args.out, &r.image)?;
    write_traces(&args.out, &r)?;
    summarize(&r, &s, out)?;
    if let Some(t) = &args.truth {
        report_against(t, &r.image, s.ssim, out)?;
    }
    Ok(())
}

pub fn eval_cmd(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.common.resolve()?;
    let reference = read_image(&args.reference)?;
    let restored = read_image(&args.restored)?;
    let r = MetricReport::evaluate(&reference, &restored, s.ssim)
        .map_err(|e| CliError::Input(e.to_string()))?;
    say(out, format_args!("mse {:.4}", r.mse))?;
    say(out, format_args!("psnr {}", format_psnr(r.psnr)))?;
    say(out, format_args!("ssim {:.4}", r.ssim))?;
    if args.verbose {
        for mode in [SsimMode::Global, SsimMode::Windowed] {
            let v =
                ssim(&reference, &restored, mode).map_err(|e| CliError::Input(e.to_string()))?;
            say(out, format_args!("ssim_{mode} {v:.4}"))?;
        }
    }
    Ok(())
}

pub fn superres_cmd(args: &SuperresArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.common.resolve()?;
    let method = s.method(args.method.as_deref())?;
    let factor = match args.factor {
        Some(f) => f,
        None => s.file.parsed("factor")?.unwrap_or(2),
    };
    let low = read_image(&args.input)?;
    let (grid, mask) =
        build_superres_problem(&low, factor).map_err(|e| CliError::Usage(e.to_string()))?;
    let r = restore_masked(
        grid,
        mask,
        s.params.clone(),
        method,
        s.init,
        &s.solver_config(method),
    )?;
    write_image(&args.out, &r.image)?;
    write_traces(&args.out, &r)?;
    summarize(&r, &s, out)?;
    if let Some(t) = &args.truth {
        report_against(t, &r.image, s.ssim, out)?;
    }
    Ok(())
}

/// Default benchmark noise levels, 10% to 90%.
pub fn default_levels() -> Vec<f64> {
    (1..=9).map(|i| f64::from(i) / 10.0).collect()
}

/// Column header for a noise level, e.g. `50%`.
pub fn level_label(level: f64) -> String {
    let pct = level * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}%", pct.round())
    } else {
        format!("{pct}%")
    }
}

/// One image's results: a row per method, a cell per level.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub levels: Vec<f64>,
    pub rows: Vec<(String, Vec<Option<MetricReport>>)>,
}

impl BenchTable {
    /// Rows are methods (`Initial` first), columns are noise levels, each
    /// cell `"PSNR,SSIM"` at two decimals, or `error` for a failed run.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method");
        for &l in &self.levels {
            let _ = write!(s, ",{}", level_label(l));
        }
        s.push('\n');
        for (name, cells) in &self.rows {
            s.push_str(name);
            for c in cells {
                match c {
                    Some(r) => {
                        let _ = write!(s, ",\"{}\"", r.cell());
                    }
                    None => s.push_str(",error"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Parsed benchmark grid.
#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub levels: Vec<f64>,
    pub methods: Vec<Method>,
    pub crop: Option<usize>,
}

impl BenchPlan {
    pub fn from_args(args: &BenchArgs, s: &Settings) -> Result<Self, CliError> {
        let levels = match args.levels.as_deref().or(s.file.get("levels")) {
            Some(list) => split_list(list)
                .into_iter()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| CliError::Usage(format!("noise level '{t}': {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => default_levels(),
        };
        if levels.is_empty() || levels.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
            return Err(CliError::Usage("noise levels must lie in (0, 1]".into()));
        }
        let methods = match args.methods.as_deref().or(s.file.get("methods")) {
            Some(list) => split_list(list)
                .into_iter()
                .map(|t| t.parse::<Method>().map_err(CliError::from))
                .collect::<Result<Vec<_>, _>>()?,
            None => Method::ALL.to_vec(),
        };
        if methods.is_empty() {
            return Err(CliError::Usage("at least one method is required".into()));
        }
        let crop = match args.crop {
            Some(c) => Some(c),
            None => s.file.parsed("crop")?,
        };
        Ok(Self {
            levels,
            methods,
            crop,
        })
    }
}

fn central_crop(img: &ImageGrid, n: usize) -> Result<ImageGrid, CliError> {
    let (w, h) = (n.min(img.width()), n.min(img.height()));
    img.crop((img.height() - h) / 2, (img.width() - w) / 2, w, h)
        .map_err(|e| CliError::Input(e.to_string()))
}

/// Runs the grid for one image, writing traces under `dir`. Returns the
/// table and the per-run summary CSV.
pub fn bench_image(
    clean: &ImageGrid,
    stem: &str,
    plan: &BenchPlan,
    s: &Settings,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(BenchTable, String), CliError> {
    let traces = dir.join("traces");
    std::fs::create_dir_all(&traces).map_err(|e| CliError::io(&traces, e))?;
    let mut runs =
        String::from("level,method,label_stride,psnr,ssim,initial_energy,final_energy,cycles\n");
    let mut initial = Vec::new();
    let mut rows: Vec<(String, Vec<Option<MetricReport>>)> = plan
        .methods
        .iter()
        .map(|m| (m.title().to_string(), Vec::new()))
        .collect();
    for &level in &plan.levels {
        let spec =
            NoiseSpec::symmetric(level, s.seed).map_err(|e| CliError::Usage(e.to_string()))?;
        let noisy = corrupt(clean, &spec).map_err(|e| CliError::Input(e.to_string()))?;
        let mask = detect_min_max(&noisy);
        initial.push(Some(
            MetricReport::evaluate(clean, &noisy, s.ssim)
                .map_err(|e| CliError::Input(e.to_string()))?,
        ));
        for (i, &method) in plan.methods.iter().enumerate() {
            let clock = Instant::now();
            let result = restore_masked(
                noisy.clone(),
                mask.clone(),
                s.params.clone(),
                method,
                s.init,
                &s.solver_config(method),
            );
            let seconds = clock.elapsed().as_secs_f64();
            let tag = format!("{stem}_r{:02}_{}", (level * 100.0).round(), method.name());
            let cell = match result {
                Ok(r) => {
                    write_text(
                        &traces.join(format!("{tag}.csv")),
                        &r.solution.trace.to_csv(),
                    )?;
                    if let Some(b) = &r.solution.lower_bound {
                        write_text(&traces.join(format!("{tag}_bound.csv")), &b.to_csv())?;
                    }
                    let m = MetricReport::evaluate(clean, &r.image, s.ssim)
                        .map_err(|e| CliError::Input(e.to_string()))?;
                    let t = &r.solution.trace;
                    let _ = writeln!(
                        runs,
                        "{level},{},{},{},{:.4},{},{},{}",
                        method.name(),
                        s.label_stride,
                        format_psnr(m.psnr),
                        m.ssim,
                        t.initial_energy().unwrap_or_default(),
                        r.solution.energy(),
                        t.cycles()
                    );
                    say(
                        out,
                        format_args!(
                            "{stem} {} {}: {} ({seconds:.1} s)",
                            level_label(level),
                            method.title(),
                            m.cell()
                        ),
                    )?;
                    Some(m)
                }
                Err(e) => {
                    let _ = writeln!(
                        runs,
                        "{level},{},{},error,,,,",
                        method.name(),
                        s.label_stride
                    );
                    say(
                        out,
                        format_args!(
                            "{stem} {} {}: error: {e}",
                            level_label(level),
                            method.title()
                        ),
                    )?;
                    None
                }
            };
            rows[i].1.push(cell);
        }
    }
    rows.insert(0, ("Initial".to_string(), initial));
    Ok((
        BenchTable {
            levels: plan.levels.clone(),
            rows,
        },
        runs,
    ))
}

/// Effective settings in settings-file syntax, with the conventions that
/// affect the numbers noted as comments.
pub fn settings_report(plan: &BenchPlan, s: &Settings) -> String {
    let p = &s.params;
    let order = match s.order {
        LabelOrder::Ascending => "ascending",
        LabelOrder::Shuffled { .. } => "shuffled",
    };
    let mut r = String::new();
    let _ = writeln!(r, "# noise: pepper and salt probabilities are R/2 each");
    for m in &plan.methods {
        let c = s.solver_config(*m);
        let _ = writeln!(
            r,
            "# {}: at most {} cycles, improvement epsilon {}, relative tolerance {}",
            m.name(),
            c.max_cycles,
            c.improvement_epsilon,
            c.relative_tolerance
        );
    }
    let levels: Vec<String> = plan.levels.iter().map(f64::to_string).collect();
    let methods: Vec<&str> = plan.methods.iter().map(|m| m.name()).collect();
    let _ = writeln!(
        r,
        "lambda = {}\nvmax = {}\nk = {}",
        p.lambda, p.v_max, p.exponent
    );
    let _ = writeln!(
        r,
        "label_stride = {}\norder = {order}\nseed = {}",
        s.label_stride, s.seed
    );
    let _ = writeln!(r, "init = {}\nssim = {}", s.init, s.ssim);
    let _ = writeln!(
        r,
        "levels = {}\nmethods = {}",
        levels.join(","),
        methods.join(",")
    );
    if let Some(c) = plan.crop {
        let _ = writeln!(r, "crop = {c}");
    }
    r
}

pub fn bench_cmd(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = args.common.resolve()?;
    let plan = BenchPlan::from_args(args, &s)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    write_text(&args.out.join("settings.txt"), &settings_report(&plan, &s))?;
    for path in &args.images {
        let mut clean = read_image(path)?;
        if let Some(n) = plan.crop {
            clean = central_crop(&clean, n)?;
        }
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into());
        let (table, runs) = bench_image(&clean, &stem, &plan, &s, &args.out, out)?;
        write_text(&args.out.join(format!("{stem}.csv")), &table.to_csv())?;
        write_text(&args.out.join(format!("{stem}_runs.csv")), &runs)?;
    }
    Ok(())
}
