//! Experiment orchestration behind the `rieszlab` binary.
//!
//! `rieszlab <subcommand> --config <path> [--out <dir>] [--seed <u64>]`.
//! Exit 0 when every check passes, 1 on a failed check or a numerical error,
//! 2 on a configuration error. Every artifact carries the config hash.

use crate::cantor::{aligned_structure, build_bottom_cover, build_structure, energy_csv, energy_table, gram_from_partials, BuildOptions, CantorStructure};
use crate::config::ExperimentConfig;
use crate::equilibrium::{first_order_residual, gradient_checks, minimize_phi, CapSystem};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::grid::GridSpec;
use crate::measure::{Cap, CapProfile, Measure};
use crate::profiles::{build_standard_cap, VProfile};
use crate::riesz::transform_direct;
use crate::topcover::{admissible_corpus, build_psi_bundle, build_top_cover, check_psi_lower, g_l2_norm, jensen_lower, PsiBundle};
use crate::verify::{
    claim1_check, claim3_lower, gram_matrix, max_principle_check, max_principle_v_check, random_smooth_field, reports_to_csv, Claim3Pipeline,
    EstimateReport,
};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "rieszlab", version, about = "s-Riesz transform experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `out` of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `seed` of the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy growth and Gram matrix of the Cantor square.
    CantorDemo(Common),
    /// Transform of the configured measure at the grid nodes.
    Transform(Common),
    /// Top cover, bottom cover and the Ψ functions.
    Covers(Common),
    /// The three claims on the Cantor structure.
    Claims(Common),
    /// Seeded maximum principle corpus.
    Maxprin(Common),
    /// Equilibrium weights on the deepest cells.
    Equilibrium(Common),
    /// Everything above, aggregated.
    Report(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::CantorDemo(c)
            | Command::Transform(c)
            | Command::Covers(c)
            | Command::Claims(c)
            | Command::Maxprin(c)
            | Command::Equilibrium(c)
            | Command::Report(c) => c,
        }
    }
}

/// Writes artifacts under one directory, stamping the config hash.
pub struct Artifacts {
    pub dir: PathBuf,
    pub hash: String,
    pub seed: u64,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, hash: String, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), hash, seed, written: Vec::new() })
    }

    /// CSV body after one `# config_hash=… seed=…` line.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!("# config_hash={} seed={}\n{body}", self.hash, self.seed);
        self.write(name, &text)
    }

    pub fn json(&mut self, name: &str, data: Value) -> Result<()> {
        let doc = json!({ "config_hash": self.hash, "seed": self.seed, "data": data });
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        self.write(name, &text)
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }
}

/// Outcome of one subcommand.
#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<EstimateReport>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Runs a parsed command and maps the result to the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let common = cli.command.common();
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match execute(&cli.command, &cfg) {
        Ok(out) => {
            for r in out.reports.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {}: lhs {:e} rhs {:e}", r.name, r.measured_lhs, r.bound_rhs);
            }
            if out.pass() {
                0
            } else {
                1
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs one subcommand against an already validated config.
pub fn execute(cmd: &Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut art = Artifacts::new(&cfg.out, cfg.hash(), cfg.seed)?;
    let mut out = Outcome::default();
    match cmd {
        Command::CantorDemo(_) => cantor_demo(cfg, &mut art, &mut out)?,
        Command::Transform(_) => transform(cfg, &mut art, &mut out)?,
        Command::Covers(_) => covers(cfg, &mut art, &mut out)?,
        Command::Claims(_) => claims(cfg, &mut art, &mut out)?,
        Command::Maxprin(_) => maxprin(cfg, &mut art, &mut out)?,
        Command::Equilibrium(_) => equilibrium(cfg, &mut art, &mut out)?,
        Command::Report(_) => {
            if cfg.cantor_square()?.is_some() {
                cantor_demo(cfg, &mut art, &mut out)?;
            }
            transform(cfg, &mut art, &mut out)?;
            covers(cfg, &mut art, &mut out)?;
            claims(cfg, &mut art, &mut out)?;
            maxprin(cfg, &mut art, &mut out)?;
            equilibrium(cfg, &mut art, &mut out)?;
            art.csv("report.csv", &reports_to_csv(&out.reports))?;
            let closing: Vec<Value> = cfg
                .closing_report(&Default::default())
                .iter()
                .map(|c| json!({ "name": c.name, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds }))
                .collect();
            let files: Vec<String> = art.written.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect();
            art.json(
                "report.json",
                json!({
                    "id": cfg.id,
                    "pass": out.pass(),
                    "checks": out.reports.len(),
                    "failed": out.reports.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect::<Vec<_>>(),
                    "closing_conditions": closing,
                    "artifacts": files,
                }),
            )?;
        }
    }
    Ok(out)
}

fn structure(cfg: &ExperimentConfig) -> Result<CantorStructure> {
    let p = &cfg.params;
    match cfg.cantor_square()? {
        Some(sq) => aligned_structure(&sq, p.levels, p.epsilon, p.big_m, p.delta),
        None => build_structure(&cfg.load_measure()?, &cfg.construction(), &BuildOptions::default()),
    }
}

/// Largest relative spread `(max − min)/min` of a positive sequence.
fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(0.0, f64::max);
    (hi - lo) / lo
}

fn cantor_demo(cfg: &ExperimentConfig, art: &mut Artifacts, out: &mut Outcome) -> Result<()> {
    let sq = cfg.cantor_square()?.ok_or_else(|| Error::Config("cantor-demo needs a cantor measure".into()))?;
    let p = &cfg.params;
    let st = aligned_structure(&sq, sq.generations, p.epsilon, p.big_m, p.delta)?;
    let gram = gram_from_partials(&st, &st.partial_potentials()?);
    let rows = energy_table(&gram);
    art.csv("energy.csv", &energy_csv(&rows))?;
    let mut g = String::from("n,k,G\n");
    for (i, row) in gram.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            g.push_str(&format!("{i},{k},{v:.12e}\n"));
        }
    }
    art.csv("gram.csv", &g)?;
    let per: Vec<f64> = rows.iter().skip(1).map(|r| r.energy_per_level).collect();
    let max_off = rows.iter().map(|r| r.max_off_ratio).fold(0.0, f64::max);
    let reports = vec![
        EstimateReport::upper("energy_per_level_spread", if per.is_empty() { 0.0 } else { spread(&per) }, 0.25, 1.0)
            .with("generations", sq.generations as f64)
            .with("kappa", sq.sparseness),
        EstimateReport::upper("gram_off_diagonal", max_off, 0.1, 0.1),
    ];
    art.json("cantor_demo.json", json!({ "energy": rows, "gram": gram, "checks": reports }))?;
    out.reports.extend(reports);
    Ok(())
}

fn transform(cfg: &ExperimentConfig, art: &mut Artifacts, out: &mut Outcome) -> Result<()> {
    let mu = cfg.load_measure()?;
    let spec = cfg.grid_spec()?;
    let pts: Vec<Point2> = (0..spec.len()).map(|k| spec.point_of(k)).collect();
    let atoms = matches!(mu, Measure::Atomic(_));
    let skip = |i: usize, y: Point2| y == pts[i];
    let field = transform_direct(&mu, cfg.s, &pts, if atoms { Some(&skip) } else { None })?;
    let mut body = String::from("x,y,rx,ry,norm\n");
    for (p, v) in pts.iter().zip(&field) {
        body.push_str(&format!("{:.9e},{:.9e},{:.12e},{:.12e},{:.12e}\n", p.x, p.y, v[0], v[1], v[0].hypot(v[1])));
    }
    art.csv("transform.csv", &body)?;
    let finite = field.iter().filter(|v| !(v[0].is_finite() && v[1].is_finite())).count();
    out.reports.push(EstimateReport::upper("transform_finite", finite as f64, 0.0, 0.0).with("nodes", pts.len() as f64));
    Ok(())
}

fn covers(cfg: &ExperimentConfig, art: &mut Artifacts, out: &mut Outcome) -> Result<()> {
    let mu = cfg.load_measure()?;
    let p = &cfg.params;
    let top = build_top_cover(&mu, cfg.s, p.r_star, p.budget, p.epsilon)?;
    let bottom = build_bottom_cover(&mu, &cfg.construction());
    art.json(
        "covers.json",
        json!({
            "top": serde_json::from_str::<Value>(&top.to_json())?,
            "bottom": serde_json::to_value(&bottom)?,
        }),
    )?;
    let cap = build_standard_cap(cfg.s, GridSpec::new(16.0, 128)?)?;
    let spec = PsiBundle::fitting_grid(&top, p.a_max, cfg.grid.n)?;
    let bundle = build_psi_bundle(&top, &cap, spec, p.a_max)?;
    let mut body = String::from("x,y,psi_x,psi_y,big_psi\n");
    for k in 0..spec.len() {
        let q = spec.point_of(k);
        let v = bundle.psi.vec_at(k);
        body.push_str(&format!("{:.9e},{:.9e},{:.12e},{:.12e},{:.12e}\n", q.x, q.y, v[0], v[1], bundle.big_psi.data[k]));
    }
    art.csv("psi.csv", &body)?;
    let tilde: f64 = top.disks.iter().map(|d| d.tilde_mass).sum();
    let mut reports = Vec::new();
    let mut g_rows = String::from("A,g_l2_over_m\n");
    for (a, f) in &bundle.psi_a {
        let err = (f.integral(0) - tilde).abs() / tilde;
        reports.push(EstimateReport::upper("psi_a_integral", err, 1e-6, 1.0).with("A", *a));
        g_rows.push_str(&format!("{a},{:.12e}\n", g_l2_norm(&top, *a, &mu) / top.half_mass()));
    }
    art.csv("g_function.csv", &g_rows)?;
    reports.push(check_psi_lower(&mu, &top, &bundle)?);
    reports.push(jensen_lower(&mu, &top, &bundle, &VProfile::new())?);
    for (k, nu) in admissible_corpus(&mu, &top, cfg.seed, cfg.run.corpus).iter().enumerate() {
        reports.push(check_psi_lower(nu, &top, &bundle)?.with("case", k as f64));
        reports.push(jensen_lower(nu, &top, &bundle, &VProfile::new())?.with("case", k as f64));
    }
    art.csv("covers.csv", &reports_to_csv(&reports))?;
    out.reports.extend(reports);
    Ok(())
}

fn claims(cfg: &ExperimentConfig, art: &mut Artifacts, out: &mut Outcome) -> Result<()> {
    let st = structure(cfg)?;
    art.json("structure.json", serde_json::from_str::<Value>(&st.to_json())?)?;
    let mut reports = vec![claim1_check(&st, cfg.s)?];
    let gram = gram_matrix(&st, cfg.s)?;
    reports.extend(gram.claim2.iter().cloned());
    let cancel = gram.cancellation.iter().cloned().fold(0.0, f64::max);
    reports.push(EstimateReport::upper("gram_cancellation", cancel, 1e-10, 1.0));
    let pipe = Claim3Pipeline { n_loc: cfg.run.n_loc, max_iters: cfg.run.max_iters, seed: cfg.seed, ..Claim3Pipeline::default() };
    let mut third = Vec::new();
    for n in 0..st.depth() {
        let r = claim3_lower(&st, n, cfg.s, &pipe)?;
        reports.push(r.report.clone().with("level", n as f64));
        third.push(r);
    }
    art.csv("claims.csv", &reports_to_csv(&reports))?;
    art.json(
        "claims.json",
        json!({
            "gram": { "matrix": gram.matrix, "c12": gram.c12, "max_off_ratio": gram.max_off_ratio, "max_cosine": gram.max_cosine },
            "claim3": third,
            "checks": reports,
        }),
    )?;
    out.reports.extend(reports);
    Ok(())
}

fn maxprin(cfg: &ExperimentConfig, art: &mut Artifacts, out: &mut Outcome) -> Result<()> {
    let spec = GridSpec::new(1.0, 128)?;
    let mut reports = Vec::new();
    for s in [1.25, 1.75] {
        for i in 0..cfg.run.corpus as u64 {
            let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(i);
            let eta = random_smooth_field(seed, spec, 2, false);
            reports.push(max_principle_check(&eta, s)?.with("seed", seed as f64).with("s", s));
        }
    }
    for i in 0..cfg.run.corpus as u64 {
        let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(i);
        let nu = random_smooth_field(seed ^ 0x5eed_0001, spec, 1, true);
        let g = random_smooth_field(seed ^ 0x5eed_0002, spec, 2, false);
        reports.push(max_principle_v_check(&nu, &g, cfg.s)?.with("seed", seed as f64));
    }
    art.csv("maxprin.csv", &reports_to_csv(&reports))?;
    out.reports.extend(reports);
    Ok(())
}

fn equilibrium(cfg: &ExperimentConfig, art: &mut Artifacts, out: &mut Outcome) -> Result<()> {
    let st = structure(cfg)?;
    let leaf = st.depth();
    let masses = st.prime_masses(leaf);
    let caps: Vec<Cap> = st.levels[leaf]
        .iter()
        .zip(&masses)
        .filter(|(c, m)| c.inner.is_some() && **m > 0.0)
        .map(|(c, m)| Cap { support: c.inner.expect("filtered"), mass: *m, profile: CapProfile { plateau: 0.5 } })
        .collect();
    if caps.is_empty() {
        return Err(Error::Config("equilibrium needs N >= 1 so that the leaves carry caps".into()));
    }
    let sys = CapSystem::new(caps, cfg.s, cfg.run.n_loc)?;
    let lambda = (cfg.params.m / cfg.params.budget).powi(4) / cfg.run.lambda_constant;
    let w = minimize_phi(lambda, &sys, cfg.run.max_iters, cfg.seed)?;
    let best = w.best();
    art.csv("equilibrium_trace.csv", &best.trace_csv())?;
    // the first-order bound leans on Φ(a) ≤ Φ(1) ≤ 2λm, i.e. on the energy of
    // the unweighted caps not exceeding λm
    let ones = vec![1.0; sys.len()];
    let mut reports = vec![EstimateReport::upper("lambda_hypothesis", sys.energy(&ones), lambda * sys.m, 1.0).with("lambda", lambda)];
    for j in 0..sys.len() {
        if let Some(r) = first_order_residual(&w.a, lambda, j, &sys)? {
            reports.push(r);
        }
    }
    reports.extend(gradient_checks(&w.a, lambda, &sys)?);
    let mass_residual = (sys.mass_of(&w.a) - sys.total).abs() / sys.total;
    reports.push(EstimateReport::upper("mass_constraint", mass_residual, 1e-10, 1.0));
    reports.push(EstimateReport::upper("phi_monotone", if best.monotone() { 0.0 } else { 1.0 }, 0.0, 0.0));
    art.csv("equilibrium.csv", &reports_to_csv(&reports))?;
    art.json("equilibrium.json", json!({ "lambda": lambda, "a": w.a, "phi": w.phi, "exhausted": w.exhausted(), "checks": reports }))?;
    out.reports.extend(reports);
    Ok(())
}
