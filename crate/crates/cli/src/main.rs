//! Command-line driver for every solver stage and the verification campaigns.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use magsteklov::aux1d::{kappa1, kappa_homotopy, truncation_study, AuxProblem, Weight, DEFAULT_NODES};
use magsteklov::disk::{estimate_b_star, fiber_lambda, lambda_disk_with, solve_disk, RegimePolicy};
use magsteklov::exterior::{exterior_disk, trial_quotient_exterior};
use magsteklov::geometry::{build_domain, offset_curve, Domain, DomainSpec, OffsetOptions};
use magsteklov::harness::{self, write_csv, CampaignConfig, Tolerances, VerifyOptions};
use magsteklov::meshing::{triangulate, NodalValues};
use magsteklov::specfun::{bessel_i_tagged, bessel_k_tagged, Order};
use magsteklov::steklov2d::{solve_on_mesh, steklov_study, Gauge, SpectralRoute};
use magsteklov::torsion::{torsion_run, DEFAULT_LEVELS, DEFAULT_TOL_MESH, FOUR_PI};
use magsteklov::{Error, Result};

#[derive(Parser)]
#[command(name = "magsteklov", version, about = "Magnetic Steklov eigenvalues and isoperimetric chains")]
struct Cli {
    /// Directory for CSV, JSON and mesh outputs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative agreement required between solver routes.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_route: f64,
    /// Strict margins must exceed this multiple of the combined error.
    #[arg(long, global = true, default_value_t = 3.0)]
    margin_ratio: f64,
    /// Allow field strengths outside the proven regimes.
    #[arg(long, global = true)]
    override_regime: bool,
    /// Worker threads for campaign items.
    #[arg(long, short = 'j', global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DomainArg {
    /// Domain spec as JSON, or `@path` to a JSON file.
    #[arg(long)]
    domain: String,
}

impl DomainArg {
    fn build(&self) -> Result<Domain> {
        let text = match self.domain.strip_prefix('@') {
            Some(p) => std::fs::read_to_string(p)?,
            None => self.domain.clone(),
        };
        let spec: DomainSpec = serde_json::from_str(&text).map_err(|e| Error::Config(format!("domain spec: {e}")))?;
        build_domain(&spec)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GaugeArg {
    Torsion,
    Symmetric,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Dtn,
    Robin,
}

#[derive(Subcommand)]
enum Command {
    /// `λ(b, B_R)` for one or more field strengths.
    Disk {
        #[arg(long, num_args = 1.., required = true)]
        b: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Angular fibers of the disk by both routes.
    Fiber {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, default_values_t = [0])]
        n: Vec<i64>,
    },
    /// Scan for the first `b` where the radial fiber stops being minimal.
    Bstar {
        #[arg(long, default_value_t = 0.1)]
        b_min: f64,
        #[arg(long, default_value_t = 4.0)]
        b_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        n_max: Option<i64>,
    },
    /// Parallel curve of a domain at the given distances.
    Offset {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long, num_args = 1.., required = true)]
        t: Vec<f64>,
    },
    /// Torsion function, level statistics and the weight `G_Ω`.
    Torsion {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long, default_value_t = 0.025)]
        h: f64,
        #[arg(long, default_value_t = DEFAULT_LEVELS)]
        levels: usize,
    },
    /// `κ₁(b, G)` for `G = 4π` or the weight of a domain.
    Kappa {
        #[arg(long)]
        b: f64,
        /// Domain supplying `G_Ω` and `a⋆ = |Ω|`; without it `G = 4π` on `a⋆`.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        a_star: f64,
        #[arg(long, default_value_t = 0.025)]
        h: f64,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
        /// Also tabulate `κ(z)` between `4π` and `8π` (or `G_Ω`).
        #[arg(long)]
        homotopy: bool,
    },
    /// Lowest magnetic Steklov eigenvalue on a refinement hierarchy.
    Steklov {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value_t = 2)]
        refinements: usize,
        #[arg(long, value_enum, default_value_t = GaugeArg::Torsion)]
        gauge: GaugeArg,
        #[arg(long, value_enum, default_value_t = RouteArg::Dtn)]
        route: RouteArg,
    },
    /// `λ(b, (B_R)^ext)` by Bessel ratio and shooting.
    ExteriorDisk {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Parallel-curve trial quotient for an exterior domain.
    Trial {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        b: f64,
    },
    /// Bounded chain for one domain and field.
    VerifyBounded {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value_t = 2)]
        refinements: usize,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
    },
    /// Exterior comparison for one domain and field.
    VerifyExterior {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        b: f64,
    },
    /// Execute a campaign config (the bundled default when omitted).
    Run {
        config: Option<PathBuf>,
        /// Print the bundled default config and exit.
        #[arg(long)]
        print_default: bool,
    },
    /// `I₀, I₁, K₀, K₁` with the evaluation method, as CSV.
    Bessel {
        #[arg(num_args = 1.., required = true)]
        x: Vec<f64>,
    },
}

struct Ctx {
    out: Option<PathBuf>,
    options: VerifyOptions,
    workers: usize,
}

impl Ctx {
    fn policy(&self) -> RegimePolicy {
        if self.options.override_regime {
            RegimePolicy::Override
        } else {
            RegimePolicy::Enforce
        }
    }

    fn file(&self, name: &str) -> Result<Option<PathBuf>> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                Ok(Some(dir.join(name)))
            }
            None => Ok(None),
        }
    }

    fn csv<S: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = S>) -> Result<()> {
        if let Some(p) = self.file(name)? {
            write_csv(&p, rows)?;
        }
        Ok(())
    }

    fn text(&self, name: &str, body: &str) -> Result<()> {
        if let Some(p) = self.file(name)? {
            std::fs::write(p, body)?;
        }
        Ok(())
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        out: cli.out,
        options: VerifyOptions {
            tolerances: Tolerances { route: cli.tol_route, margin_ratio: cli.margin_ratio },
            override_regime: cli.override_regime,
        },
        workers: cli.workers,
    };
    match dispatch(cli.command, &ctx) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check performed passed.
fn dispatch(cmd: Command, ctx: &Ctx) -> Result<bool> {
    match cmd {
        Command::Disk { b, radius } => {
            #[derive(Serialize)]
            struct Row {
                b: f64,
                lambda_disk: f64,
            }
            let rows = b
                .iter()
                .map(|&b| Ok(Row { b, lambda_disk: lambda_disk_with(b, radius, ctx.policy())? }))
                .collect::<Result<Vec<_>>>()?;
            if let [single] = b.as_slice() {
                let r = solve_disk(*single, radius, ctx.policy())?;
                print_json(&serde_json::json!({ "b": single, "radius": radius, "lambda": r.lambda, "mode": r.mode, "route": r.route }))?;
            } else {
                print_json(&rows)?;
            }
            ctx.csv("disk.csv", rows)?;
        }
        Command::Fiber { b, radius, n } => {
            #[derive(Serialize)]
            struct Row {
                b: f64,
                n: i64,
                lambda_fiber: f64,
                lambda_direct: f64,
                route_gap: f64,
            }
            let rows = n
                .iter()
                .map(|&n| {
                    let r = fiber_lambda(n, b, radius)?;
                    Ok(Row { b, n, lambda_fiber: r.lambda, lambda_direct: r.lambda_direct, route_gap: r.route_gap() })
                })
                .collect::<Result<Vec<_>>>()?;
            print_json(&rows)?;
            ctx.csv("fiber.csv", rows)?;
        }
        Command::Bstar { b_min, b_max, step, radius, n_max } => {
            if !(step > 0.0 && b_max >= b_min && b_min > 0.0) {
                return Err(Error::InvalidParameters("need 0 < b_min <= b_max and step > 0".into()));
            }
            let count = ((b_max - b_min) / step + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=count).map(|k| b_min + k as f64 * step).collect();
            let n_max = n_max.unwrap_or_else(|| (b_max * radius * radius).ceil() as i64 + 5);
            let scan = estimate_b_star(&grid, n_max, radius, None)?;
            print_json(&serde_json::json!({
                "radius": scan.radius,
                "n_max": scan.n_max,
                "bracket": scan.bracket,
                "crossings": scan.crossings,
                "radial_up_to": scan.radial_up_to,
                "points": scan.points,
            }))?;
            ctx.csv("bstar_fibers.csv", &scan.rows)?;
        }
        Command::Offset { domain, t } => {
            let d = domain.build()?;
            #[derive(Serialize)]
            struct Row {
                t: f64,
                length: f64,
                cx: f64,
                cy: f64,
                second_moment: f64,
                simple: bool,
            }
            let rows = t
                .iter()
                .map(|&t| {
                    let c = offset_curve(&d, t, &OffsetOptions::default())?;
                    Ok(Row { t, length: c.length, cx: c.centroid[0], cy: c.centroid[1], second_moment: c.second_moment, simple: c.simple })
                })
                .collect::<Result<Vec<_>>>()?;
            print_json(&rows)?;
            ctx.csv("offset.csv", rows)?;
        }
        Command::Torsion { domain, h, levels } => {
            let d = domain.build()?;
            let mesh = Arc::new(triangulate(&d, h, 0)?);
            let run = torsion_run(mesh.clone(), levels, DEFAULT_TOL_MESH)?;
            let lt = &run.levels;
            let w = &run.weight;
            print_json(&serde_json::json!({
                "domain": d.label(),
                "nodes": mesh.num_nodes(),
                "psi_max": run.psi.max(),
                "t_star": lt.t_star,
                "coarea_gap": lt.coarea_gap(),
                "weight_min": w.min(),
                "weight_max": w.max(),
                "raw_min": w.raw_min,
                "clamped": w.clamped,
                "above_four_pi": w.g.iter().filter(|&&g| g > FOUR_PI).count() as f64 / w.g.len() as f64,
            }))?;
            #[derive(Serialize)]
            struct Level {
                t: f64,
                mu: f64,
                gamma: f64,
            }
            #[derive(Serialize)]
            struct WeightRow {
                a: f64,
                #[serde(rename = "G")]
                g: f64,
            }
            ctx.csv("levels.csv", (0..lt.t.len()).map(|j| Level { t: lt.t[j], mu: lt.mu[j], gamma: lt.gamma[j] }))?;
            ctx.csv("weight.csv", w.a.iter().zip(&w.g).map(|(&a, &g)| WeightRow { a, g }))?;
            ctx.text("torsion.mesh", &mesh.dump(Some(&NodalValues::Real(run.psi.values.clone()))))?;
        }
        Command::Kappa { b, domain, a_star, h, nodes, homotopy } => {
            let (weight, a_star, label) = match domain {
                Some(text) => {
                    let d = DomainArg { domain: text }.build()?;
                    let mesh = Arc::new(triangulate(&d, h, 0)?);
                    let run = torsion_run(mesh, DEFAULT_LEVELS, DEFAULT_TOL_MESH)?;
                    let a = run.weight.a_star;
                    (Weight::Table(Arc::new(run.weight)), a, d.label())
                }
                None => (Weight::four_pi(), a_star, "four-pi".to_string()),
            };
            let r = kappa1(&AuxProblem::new(b, a_star, &weight, nodes)?)?;
            print_json(&serde_json::json!({
                "weight": label,
                "b": b,
                "a_star": a_star,
                "kappa": r.kappa,
                "kappa_robin": r.kappa_robin,
                "route_gap": r.route_gap(),
                "residual": r.residual,
            }))?;
            #[derive(Serialize)]
            struct Row {
                a: f64,
                f: f64,
                #[serde(rename = "X")]
                x: f64,
                #[serde(rename = "Y")]
                y: f64,
                #[serde(rename = "R")]
                r: f64,
            }
            ctx.csv("kappa.csv", (0..r.grid.len()).map(|k| Row { a: r.grid[k], f: r.f[k], x: r.f[k], y: r.y[k], r: r.r[k] }))?;
            if homotopy {
                let z: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
                let g1 = match &weight {
                    Weight::Constant(_) => Weight::Constant(2.0 * FOUR_PI),
                    other => other.clone(),
                };
                let rows = kappa_homotopy(b, a_star, &Weight::four_pi(), &g1, &z, nodes)?;
                ctx.csv("homotopy.csv", &rows)?;
                if let Weight::Table(t) = &weight {
                    #[derive(Serialize)]
                    struct Trunc {
                        n: usize,
                        kappa_n: f64,
                    }
                    let tr = truncation_study(b, t, &harness::TRUNCATION_LEVELS, nodes)?;
                    ctx.csv("truncation.csv", tr.into_iter().map(|(n, kappa_n)| Trunc { n, kappa_n }))?;
                }
            }
        }
        Command::Steklov { domain, b, h, refinements, gauge, route } => {
            let d = domain.build()?;
            let gauge = match gauge {
                GaugeArg::Torsion => Gauge::Torsion,
                GaugeArg::Symmetric => Gauge::Symmetric,
            };
            let route = match route {
                RouteArg::Dtn => SpectralRoute::Dtn,
                RouteArg::Robin => SpectralRoute::RobinRoot,
            };
            let study = steklov_study(&d, b, h, refinements, gauge, route)?;
            print_json(&serde_json::json!({
                "domain": d.label(),
                "b": b,
                "gauge": study.gauge,
                "h": study.finest.h,
                "lambda": study.finest.lambda,
                "route": study.route,
                "error_estimate": study.finest.error_estimate,
                "extrapolated": study.extrapolated,
                "levels": study.levels,
            }))?;
            if ctx.out.is_some() {
                let (r, _) = solve_on_mesh(study.mesh.clone(), b, gauge, route)?;
                ctx.text("steklov.mesh", &study.mesh.dump(Some(&NodalValues::Complex(r.eigenfunction))))?;
            }
        }
        Command::ExteriorDisk { b, radius } => {
            let r = exterior_disk(b, radius, ctx.policy())?;
            print_json(&r)?;
            return Ok(r.route_gap <= ctx.options.tolerances.route);
        }
        Command::Trial { domain, b } => {
            let d = domain.build()?;
            let r = trial_quotient_exterior(&d, b, ctx.policy())?;
            print_json(&r)?;
            #[derive(Serialize)]
            struct Row {
                t: f64,
                sigma_length: f64,
                second_moment: f64,
                psi: f64,
                dpsi: f64,
            }
            ctx.csv(
                "trace.csv",
                r.nodes.iter().map(|n| Row { t: n.t, sigma_length: n.sigma_length, second_moment: n.second_moment, psi: n.psi, dpsi: n.dpsi }),
            )?;
        }
        Command::VerifyBounded { domain, b, h, refinements, nodes } => {
            let d = domain.build()?;
            let r = harness::verify_bounded(&d, b, h, refinements, nodes, &ctx.options)?;
            print_json(&r)?;
            return Ok(r.pass);
        }
        Command::VerifyExterior { domain, b } => {
            let d = domain.build()?;
            let r = harness::verify_exterior(&d, b, &ctx.options)?;
            print_json(&r)?;
            return Ok(r.pass);
        }
        Command::Run { config, print_default } => {
            if print_default {
                print_json(&harness::default_config())?;
                return Ok(true);
            }
            return run(config.as_deref(), ctx);
        }
        Command::Bessel { x } => {
            println!("x,order,kind,value,method");
            for x in x {
                for order in [Order::Zero, Order::One] {
                    let i = bessel_i_tagged(order, x)?;
                    let k = bessel_k_tagged(order, x)?;
                    let n = if order == Order::Zero { 0 } else { 1 };
                    println!("{x},{n},I,{:e},{}", i.value, i.method.tag());
                    println!("{x},{n},K,{:e},{}", k.value, k.method.tag());
                }
            }
        }
    }
    Ok(true)
}

fn run(config: Option<&Path>, ctx: &Ctx) -> Result<bool> {
    let mut cfg = match config {
        Some(p) => CampaignConfig::load(p)?,
        None => harness::default_config(),
    };
    cfg.override_regime |= ctx.options.override_regime;
    let out = ctx.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let report = harness::execute(&cfg, ctx.workers)?;
    harness::write_report(&report, &out)?;
    for r in &report.bounded {
        println!("bounded  {:<48} b = {:<5} {}", r.domain, r.b, if r.pass { "pass" } else { "FAIL" });
    }
    for r in &report.exterior {
        println!("exterior {:<48} b = {:<5} {}", r.domain, r.b, if r.pass { "pass" } else { "FAIL" });
    }
    for f in &report.failures {
        println!("{} {} b = {}: {}", f.kind, f.domain, f.b, f.message);
    }
    println!("report written to {}", out.display());
    Ok(report.all_pass)
}
