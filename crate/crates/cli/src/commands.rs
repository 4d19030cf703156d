use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;

use cavleak_core::analysis::{fit_anticrossing, leakage_sweep, AnticrossingData};
use cavleak_core::export::{write_field_csv, write_field_pgm, LinePlot, Series};
use cavleak_core::fencing::{
    fence_scaled_frequency, fence_wire_count, generate_fence_layout, WireLayout,
};
use cavleak_core::helmholtz::{dominant_eigenmode_with, rasterize_wires, EigenOptions};
use cavleak_core::physics::{lowest_modes, mode_frequency, CavityModeIndex};
use cavleak_core::pinning::run_pinning_with;

use crate::config::{RunConfig, SourceKey};
use crate::{Cli, CliError, Command};

#[derive(Debug, Args)]
pub struct ModesArgs {
    /// Number of modes to list.
    #[arg(long)]
    pub count: Option<usize>,
    /// Relative permittivity of the filling.
    #[arg(long)]
    pub eps_r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FenceArgs {
    /// Fence iteration d.
    #[arg(long)]
    pub iterations: Option<u32>,
    /// Division factor n (2 for half-wave fencing).
    #[arg(long)]
    pub division: Option<u32>,
    #[arg(long)]
    pub wire_um: Option<f64>,
    /// Also solve the wired cross-section numerically.
    #[arg(long)]
    pub solve: bool,
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PinArgs {
    #[arg(long)]
    pub max_wires: Option<usize>,
    #[arg(long)]
    pub target_ghz: Option<f64>,
    #[arg(long)]
    pub wire_um: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Fixed antinode separation in mm.
    #[arg(long, conflicts_with = "separation_wavelengths")]
    pub separation_mm: Option<f64>,
    /// Antinode separation as a fraction of the dominant-mode wavelength.
    #[arg(long)]
    pub separation_wavelengths: Option<f64>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Seed layout CSV (x_m, z_m[, diameter_m]) treated as iteration 0.
    #[arg(long, value_name = "PATH")]
    pub layout: Option<PathBuf>,
    /// Write a field image and CSV for every iteration.
    #[arg(long)]
    pub fields: bool,
}

#[derive(Debug, Args)]
pub struct LeakageArgs {
    /// Skip the damped (T1, T2) curve.
    #[arg(long)]
    pub no_damping: bool,
    /// Write leakage.svg.
    #[arg(long)]
    pub plot: bool,
    /// Take f_c(N) from the eigensolver instead of the closed form.
    #[arg(long)]
    pub numerical: bool,
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with columns f_R_Hz, lower_Hz, upper_Hz[, sigma_Hz].
    pub data: PathBuf,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be >= 1".into()));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    std::fs::create_dir_all(&g.out).map_err(CliError::io(g.out.display().to_string()))?;
    if cfg.grid.max_iterations == 0 {
        return Err(CliError::Config("grid.max_iterations must be >= 1".into()));
    }
    let eigen = EigenOptions {
        seed: g.seed,
        max_iterations: cfg.grid.max_iterations,
    };
    match &cli.command {
        Command::Modes(a) => modes(&mut cfg, a, &g.out),
        Command::Fence(a) => fence(&mut cfg, a, &g.out, eigen),
        Command::Pin(a) => pin(&mut cfg, a, &g.out, eigen),
        Command::Leakage(a) => leakage(&mut cfg, a, &g.out, eigen),
        Command::Fit(a) => fit(a, &g.out),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(CliError::io(path.display().to_string()))
}

fn io_err(dir: &Path, name: &str) -> impl FnOnce(std::io::Error) -> CliError {
    CliError::io(dir.join(name).display().to_string())
}

fn modes(cfg: &mut RunConfig, a: &ModesArgs, out: &Path) -> Result<(), CliError> {
    if let Some(c) = a.count {
        cfg.modes.count = c;
    }
    if let Some(e) = a.eps_r {
        cfg.geometry.eps_r = e;
    }
    let geom = cfg.cavity()?;
    let list = lowest_modes(&geom, cfg.modes.count, cfg.modes.max_index)?;
    let mut csv = create(out, "modes.csv")?;
    let w = io_err(out, "modes.csv");
    (|| {
        writeln!(csv, "n,m,l,f_Hz")?;
        for (idx, f) in &list {
            writeln!(csv, "{},{},{},{f}", idx.n, idx.m, idx.l)?;
        }
        csv.flush()
    })()
    .map_err(w)?;
    println!("{:>3} {:>3} {:>3} {:>12}", "n", "m", "l", "f (GHz)");
    for (idx, f) in &list {
        println!("{:>3} {:>3} {:>3} {:>12.6}", idx.n, idx.m, idx.l, f * 1e-9);
    }
    Ok(())
}

fn fence(
    cfg: &mut RunConfig,
    a: &FenceArgs,
    out: &Path,
    eigen: EigenOptions,
) -> Result<(), CliError> {
    if let Some(d) = a.iterations {
        cfg.fence.iterations = d;
    }
    if let Some(n) = a.division {
        cfg.fence.division_factor = n;
    }
    if let Some(w) = a.wire_um {
        cfg.fence.wire_um = w;
    }
    if let Some(r) = a.resolution {
        cfg.grid.resolution = r;
    }
    let plan = cfg.fence_plan()?;
    let layout = generate_fence_layout(&plan)?;
    let mut file = create(out, "fence_layout.csv")?;
    layout.write_csv(&mut file)?;
    file.flush().map_err(io_err(out, "fence_layout.csv"))?;

    let f101 = mode_frequency(&cfg.cavity()?, CavityModeIndex::TE101)?;
    let n_wires = fence_wire_count(plan.iterations, plan.division_factor);
    let f_tilde = fence_scaled_frequency(plan.iterations, plan.division_factor);
    let numerical = if a.solve {
        let grid = cfg.grid()?;
        let mask = rasterize_wires(&grid, &layout)?;
        Some(dominant_eigenmode_with(&grid, &mask, &eigen)?.frequency)
    } else {
        None
    };
    let mut summary = create(out, "fence.csv")?;
    (|| {
        match numerical {
            Some(fnum) => {
                writeln!(summary, "d,N,f_tilde_c,f_c_Hz,f_c_numerical_Hz")?;
                writeln!(
                    summary,
                    "{},{n_wires},{f_tilde},{},{fnum}",
                    plan.iterations,
                    f_tilde * f101
                )
            }
            None => {
                writeln!(summary, "d,N,f_tilde_c,f_c_Hz")?;
                writeln!(
                    summary,
                    "{},{n_wires},{f_tilde},{}",
                    plan.iterations,
                    f_tilde * f101
                )
            }
        }?;
        summary.flush()
    })()
    .map_err(io_err(out, "fence.csv"))?;
    println!(
        "d = {}, n = {}, N = {n_wires}",
        plan.iterations, plan.division_factor
    );
    println!("f_tilde_c = {f_tilde}");
    println!("f_c (closed form) = {:.6} GHz", f_tilde * f101 * 1e-9);
    if let Some(fnum) = numerical {
        println!("f_c (solver)      = {:.6} GHz", fnum * 1e-9);
    }
    Ok(())
}

fn pin(cfg: &mut RunConfig, a: &PinArgs, out: &Path, eigen: EigenOptions) -> Result<(), CliError> {
    let p = &mut cfg.pinning;
    if let Some(v) = a.max_wires {
        p.max_wires = v;
    }
    if let Some(v) = a.target_ghz {
        p.target_ghz = Some(v);
    }
    if let Some(v) = a.wire_um {
        p.wire_um = v;
    }
    if let Some(v) = a.theta {
        p.theta = v;
    }
    if let Some(v) = a.separation_mm {
        p.separation_mm = Some(v);
        p.separation_wavelengths = None;
    }
    if let Some(v) = a.separation_wavelengths {
        p.separation_wavelengths = Some(v);
        p.separation_mm = None;
    }
    if let Some(r) = a.resolution {
        cfg.grid.resolution = r;
    }
    let pcfg = cfg.pinning(eigen)?;
    let initial = match &a.layout {
        Some(path) => {
            let file = File::open(path).map_err(CliError::io(path.display().to_string()))?;
            WireLayout::read_csv(file, pcfg.wire_diameter)?
        }
        None => WireLayout::empty(pcfg.wire_diameter),
    };
    let mut dump_error = None;
    let report = run_pinning_with(&pcfg, &initial, |record, solution| {
        if !a.fields || dump_error.is_some() {
            return;
        }
        let stem = format!("field_d{:02}", record.iteration);
        let result = create(out, &format!("{stem}.pgm"))
            .and_then(|mut f| Ok(write_field_pgm(&solution.field, &mut f)?))
            .and_then(|_| create(out, &format!("{stem}.csv")))
            .and_then(|mut f| Ok(write_field_csv(&solution.field, &mut f)?));
        if let Err(e) = result {
            dump_error = Some(e);
        }
    })?;
    if let Some(e) = dump_error {
        return Err(e);
    }
    let mut file = create(out, "pinning.csv")?;
    report.write_csv(&mut file)?;
    let mut file = create(out, "pinning_layout.csv")?;
    report.final_layout.write_csv(&mut file)?;

    println!(
        "{:>9} {:>11} {:>7} {:>12}",
        "iteration", "wires_added", "N_total", "f_c (GHz)"
    );
    for r in &report.iterations {
        println!(
            "{:>9} {:>11} {:>7} {:>12.6}",
            r.iteration,
            r.wires_added,
            r.total_wires,
            r.frequency * 1e-9
        );
    }
    println!("status: {:?}", report.status);
    if report.skipped_wires() > 0 {
        println!("antinodes skipped (overlap): {}", report.skipped_wires());
    }
    Ok(())
}

fn leakage(
    cfg: &mut RunConfig,
    a: &LeakageArgs,
    out: &Path,
    eigen: EigenOptions,
) -> Result<(), CliError> {
    if a.no_damping {
        cfg.sweep.damped = false;
    }
    if a.numerical {
        cfg.sweep.frequency_source = SourceKey::Numerical;
    }
    if let Some(n) = a.n_max {
        cfg.sweep.n_max = n;
    }
    let scfg = cfg.sweep(eigen)?;
    let result = leakage_sweep(&scfg)?;
    let mut file = create(out, "leakage.csv")?;
    result.write_csv(&mut file)?;

    if a.plot {
        let scaled =
            |f: &dyn Fn(&cavleak_core::analysis::SweepRow) -> Option<f64>| -> Vec<(f64, f64)> {
                result
                    .rows
                    .iter()
                    .filter_map(|r| f(r).map(|p| (r.delta / scfg.g0, p)))
                    .collect()
            };
        let mut series = vec![Series {
            label: "undamped".into(),
            points: scaled(&|r| Some(r.p_undamped)),
        }];
        if scfg.damped {
            series.push(Series {
                label: "T1, T2 damped".into(),
                points: scaled(&|r| r.p_damped),
            });
        }
        let plot = LinePlot {
            title: "Depolarizing error vs detuning".into(),
            x_label: "detuning / g(N=0)".into(),
            y_label: "p".into(),
            log_y: true,
            series,
            reference: Some((scfg.p_threshold, "threshold".into())),
        };
        let mut f = create(out, "leakage.svg")?;
        (|| {
            f.write_all(plot.to_svg().as_bytes())?;
            f.flush()
        })()
        .map_err(io_err(out, "leakage.svg"))?;
    }
    match result.threshold_crossing_delta {
        Some(d) => println!(
            "threshold crossing: |delta| = {:.6e} Hz = {:.2} g0",
            d,
            d / scfg.g0
        ),
        None => println!("threshold crossing: none in range"),
    }
    Ok(())
}

fn fit(a: &FitArgs, out: &Path) -> Result<(), CliError> {
    let file = File::open(&a.data).map_err(CliError::io(a.data.display().to_string()))?;
    let data = AnticrossingData::read_csv(file)?;
    let result = fit_anticrossing(&data)?;
    let mut report = create(out, "fit_report.txt")?;
    (|| {
        writeln!(report, "{result}")?;
        report.flush()
    })()
    .map_err(io_err(out, "fit_report.txt"))?;
    println!("{result}");
    Ok(())
}
