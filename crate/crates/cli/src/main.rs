mod config;
mod report;
mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use alpha2_dynamo::kernels::Grid;
use alpha2_dynamo::pencil::{reduced_spectrum, sweep};
use alpha2_dynamo::perturbation::{local_slope_check, solvability_e1};
use alpha2_dynamo::verify::{audit_solution, run_suite, SuiteConfig};
use alpha2_dynamo::{dirac, SweepRowF64};

use config::{read_config_file, Defaults, Overrides, RunConfig, UsageError};
use svg::{line_plot, Series};

#[derive(Parser, Debug)]
#[command(name = "alpha2-dynamo", version, about = "Spectra of the sech-profile alpha^2-dynamo")]
struct Cli {
    /// key=value file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Opts {
    /// Comma-separated angular modes, e.g. 0,1,2,3.
    #[arg(long)]
    l: Option<String>,
    /// x0 range `min:max:step` or a single value.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Truncation radius.
    #[arg(long = "L")]
    length: Option<f64>,
    /// Interior grid points.
    #[arg(long)]
    n: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Comma-separated δ values for `perturb`.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bound states of the full problem over (l, x0); writes sweep.csv.
    Sweep(Opts),
    /// Bound state and full-problem audit at each (l, x0); writes solve.csv.
    Solve(Opts),
    /// Top level of the reduced problem; writes reduced.csv.
    Reduced(Opts),
    /// ε(x_J + δ) against −δ/2; writes perturb.csv.
    Perturb(Opts),
    /// Superpotential regularity and Dirac residuals; writes dirac.csv.
    DiracCheck(Opts),
    /// Runs the invariant suite and prints a pass/fail table.
    Verify(Opts),
}

impl Command {
    fn parts(&self) -> (&Opts, Defaults) {
        match self {
            Command::Sweep(o) => (o, Defaults { l: "0,1,2,3", x0: "0:4:0.05" }),
            Command::Solve(o) => (o, Defaults { l: "0", x0: "0.5" }),
            Command::Reduced(o) => (o, Defaults { l: "0", x0: "0:3:0.05" }),
            Command::Perturb(o) => (o, Defaults { l: "0", x0: "0" }),
            Command::DiracCheck(o) => (o, Defaults { l: "0", x0: "0.1:1.5:0.1" }),
            Command::Verify(o) => (o, Defaults { l: "0,1,2,3", x0: "0:4:0.05" }),
        }
    }
}

enum Outcome {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let (opts, defaults) = cli.command.parts();
    let flags = Overrides {
        l: opts.l.clone(),
        x0: opts.x0.clone(),
        length: opts.length,
        n: opts.n,
        out: opts.out.clone(),
        svg: opts.svg,
        delta: opts.delta.clone(),
    };
    let cfg = RunConfig::resolve(&flags, &file, &defaults)?;
    let grid = Grid::new(cfg.length, cfg.n).map_err(|e| UsageError(e.to_string()))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(UsageError("--jobs must be positive".into()).into());
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("building worker pool")?;
    pool.install(|| match &cli.command {
        Command::Sweep(_) => cmd_sweep(&cfg, &grid),
        Command::Solve(_) => cmd_solve(&cfg, &grid),
        Command::Reduced(_) => cmd_reduced(&cfg, &grid),
        Command::Perturb(_) => cmd_perturb(&cfg, &grid),
        Command::DiracCheck(_) => cmd_dirac(&cfg, &grid),
        Command::Verify(_) => cmd_verify(&cfg, &grid),
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn per_l_series(rows: &[SweepRowF64], l_list: &[usize], value: impl Fn(&SweepRowF64) -> Option<f64>) -> Vec<Series> {
    l_list
        .iter()
        .map(|&l| Series {
            label: format!("l={l}"),
            points: rows.iter().filter(|r| r.l == l).map(|r| value(r).map(|v| (r.x0, v))).collect(),
        })
        .collect()
}

fn cmd_sweep(cfg: &RunConfig, grid: &Grid<f64>) -> Result<Outcome> {
    let rows = sweep(&cfg.x0.values(), &cfg.l_list, grid)?;
    write(&cfg.output_dir, "sweep.csv", &report::sweep_csv(&rows))?;
    if cfg.emit_svg {
        let lam = per_l_series(&rows, &cfg.l_list, |r| r.solution.as_ref().map(|s| s.lambda));
        write(&cfg.output_dir, "sweep_lambda.svg", &line_plot("Full problem: λ(x0)", "x0", "λ", &lam))?;
        let eps = per_l_series(&rows, &cfg.l_list, |r| r.solution.as_ref().map(|s| s.epsilon));
        write(&cfg.output_dir, "sweep_epsilon.svg", &line_plot("ε(x0)", "x0", "ε", &eps))?;
    }
    Ok(Outcome::Ok)
}

fn cmd_solve(cfg: &RunConfig, grid: &Grid<f64>) -> Result<Outcome> {
    let rows = sweep(&cfg.x0.values(), &cfg.l_list, grid)?;
    let mut ok = true;
    for r in &rows {
        match &r.solution {
            None => println!("l={} x0={}: no bound state ({} constraint roots)", r.l, r.x0, r.roots.len()),
            Some(s) => {
                println!(
                    "l={} x0={}: lambda={:.12} epsilon={:.12} branch={} pencil_residual={:.3e}",
                    r.l, r.x0, s.lambda, s.epsilon, s.branch, s.diagnostics.pencil_residual
                );
                match audit_solution(s, grid)? {
                    Some(a) => {
                        println!(
                            "  full_residual={:.3e} inverse_delta={:.3e} field_link={:.3e} suppressed={:.3e}",
                            a.full_residual, a.inverse_delta, a.field_link, a.suppressed_ratio
                        );
                        ok &= a.full_residual < 1e-5 && a.inverse_delta < 1e-7 && a.field_link < 1e-6;
                    }
                    None => println!("  Jordan configuration: |epsilon| below 1e-6, transform not applicable"),
                }
            }
        }
    }
    write(&cfg.output_dir, "solve.csv", &report::sweep_csv(&rows))?;
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_reduced(cfg: &RunConfig, grid: &Grid<f64>) -> Result<Outcome> {
    use rayon::prelude::*;
    let cells: Vec<(usize, f64)> = cfg
        .l_list
        .iter()
        .flat_map(|&l| cfg.x0.values().into_iter().map(move |x| (l, x)))
        .collect();
    let rows: Vec<(usize, f64, Option<f64>)> = cells
        .par_iter()
        .map(|&(l, x0)| Ok((l, x0, reduced_spectrum(x0, l, grid, 1)?.first().copied())))
        .collect::<alpha2_dynamo::Result<_>>()?;
    write(&cfg.output_dir, "reduced.csv", &report::reduced_csv(&rows))?;
    if cfg.emit_svg {
        let series: Vec<Series> = cfg
            .l_list
            .iter()
            .map(|&l| Series {
                label: format!("l={l}"),
                points: rows.iter().filter(|r| r.0 == l).map(|r| r.2.map(|v| (r.1, v))).collect(),
            })
            .collect();
        write(&cfg.output_dir, "reduced_lambda.svg", &line_plot("Reduced problem: λ(x0)", "x0", "λ", &series))?;
    }
    Ok(Outcome::Ok)
}

fn cmd_perturb(cfg: &RunConfig, grid: &Grid<f64>) -> Result<Outcome> {
    let e1 = solvability_e1(grid)?;
    let check = local_slope_check(&cfg.deltas, grid)?;
    println!("solvability ratio {:.12} (e1 on the plus branch {:.12})", e1.ratio, e1.e1_plus);
    match check.c_bound {
        Some(c) => println!("max |eps + delta/2| / delta^2 = {c:.6}"),
        None => println!("no nonzero delta with a bound state"),
    }
    write(&cfg.output_dir, "perturb.csv", &report::perturb_csv(&check.rows))?;
    if cfg.emit_svg {
        let series = vec![
            Series {
                label: "pencil".into(),
                points: check.rows.iter().map(|r| r.epsilon_pencil.map(|e| (r.delta, e))).collect(),
            },
            Series {
                label: "-δ/2".into(),
                points: check.rows.iter().map(|r| Some((r.delta, r.epsilon_linear))).collect(),
            },
        ];
        write(&cfg.output_dir, "perturb.svg", &line_plot("ε near the Jordan point", "δ", "ε", &series))?;
    }
    Ok(Outcome::Ok)
}

fn cmd_dirac(cfg: &RunConfig, grid: &Grid<f64>) -> Result<Outcome> {
    let mut csv = String::new();
    let mut ok = true;
    for (k, &l) in cfg.l_list.iter().enumerate() {
        let rows = dirac::regularity_report(&cfg.x0.values(), l, grid)?;
        ok &= rows.iter().all(|r| r.residual.is_none_or(|v| v < 1e-6));
        for r in &rows {
            println!(
                "l={l} x0={}: nodes={} regular={} residual={}",
                r.x0,
                r.nodes,
                r.regular,
                r.residual.map_or("-".into(), |v| format!("{v:.3e}"))
            );
        }
        let table = report::dirac_csv(l, &rows);
        csv.push_str(if k == 0 { &table } else { table.split_once('\n').map_or("", |t| t.1) });
    }
    write(&cfg.output_dir, "dirac.csv", &csv)?;
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_verify(cfg: &RunConfig, grid: &Grid<f64>) -> Result<Outcome> {
    let suite = SuiteConfig {
        grid: *grid,
        l_values: cfg.l_list.clone(),
        x0_values: cfg.x0.values(),
    };
    let checks = run_suite(&suite)?;
    let width = checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
    for c in &checks {
        let pad = width - c.name.chars().count();
        println!(
            "{} {}{} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            " ".repeat(pad),
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { Outcome::Ok } else { Outcome::Failed })
}
