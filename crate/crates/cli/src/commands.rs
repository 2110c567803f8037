//! One function per subcommand; each returns the JSON document to emit and an exit status.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use iset_maxcut::gadget::{
    brute_force_max_cut, build_hidden_iset_gadget, build_known_iset_gadget, build_noisy_cube, build_tripartite_cube,
    correlation_of, cut_value, hidden_y_dictator_set, make_mu2_alpha, make_rho_correlated, quasirandom_max_cut,
    tensor_distribution, GadgetGraph, BRUTE_FORCE_MAX_VERTICES, QUASIRANDOM_MAX_VERTICES,
};
use iset_maxcut::gaussian::{compute_critical_constants, Correlation};
use iset_maxcut::interval::{verify_certificate, CertificateConfig};
use iset_maxcut::landscape::{bipartite_max, f_alpha_bipartite, f_cut_tripartite, tripartite_max, TripartitePoint};
use iset_maxcut::pipeline::{run_pipeline, PipelineConfig};
use iset_maxcut::rounding::{certified_bound, default_threshold, round_trials};
use iset_maxcut::sdp::{load_graph, sdp_objective, solve_sdp, SdpSolution, SolverConfig, WeightedGraph};
use iset_maxcut::Error;
use serde_json::{json, Value};

use crate::config::Overrides;
use crate::{CliError, Command, Status};

pub struct Outcome {
    pub document: Value,
    pub status: Status,
}

impl Outcome {
    fn ok(document: Value) -> Self {
        Self { document, status: Status::Success }
    }
}

/// Rounds to 12 significant digits.
fn sig12(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn correlation(value: f64) -> Result<Correlation, CliError> {
    Correlation::new(value).map_err(CliError::from)
}

fn read_graph(path: &Path) -> Result<WeightedGraph, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    load_graph(file).map_err(|e| Error::at("load")(e).into())
}

pub fn run(command: &Command, seed: u64, cfg: &Overrides) -> Result<Outcome, CliError> {
    let c = compute_critical_constants();
    match command {
        Command::Constants => Ok(Outcome::ok(json!({
            "rho_star": sig12(c.rho_star),
            "alpha_gw": sig12(c.alpha_gw),
            "c_star": sig12(c.c_star),
            "s_star": sig12(c.s_star),
            "alpha_star": sig12(c.alpha_star),
            "b_star": sig12(c.b_star),
            "p_star": sig12(c.p_star),
            "q_star": sig12(c.q_star),
        }))),
        Command::Landscape { kind, rho, alpha, csv, grid, mu3 } => {
            let kind = cfg.pick_or(kind.clone(), "kind", "tripartite".to_string())?;
            let rho = correlation(cfg.pick_or(*rho, "rho", c.rho_star)?)?;
            let grid = cfg.pick_or(*grid, "grid", 51usize)?.max(2);
            let csv = cfg.pick(csv.clone(), "csv")?;
            let (report, alpha_used) = match kind.as_str() {
                "tripartite" => (tripartite_max(rho), None),
                "bipartite" => {
                    let alpha = cfg.pick_or(*alpha, "alpha", c.alpha_star)?;
                    if !(0.0..=1.0).contains(&alpha) {
                        return Err(CliError::Input(format!("alpha {alpha} outside [0, 1]")));
                    }
                    (bipartite_max(rho, alpha), Some(alpha))
                }
                other => return Err(CliError::Input(format!("unknown landscape kind {other:?}"))),
            };
            if let Some(path) = &csv {
                let slice = cfg.pick_or(*mu3, "mu3", 0.5)?;
                let text = landscape_grid(rho, alpha_used, slice, grid)?;
                fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            }
            Ok(Outcome::ok(json!({
                "kind": kind,
                "rho": rho.value(),
                "alpha": alpha_used,
                "report": report,
                "arccos_rho_over_pi": rho.value().acos() / std::f64::consts::PI,
            })))
        }
        Command::Gadget { kind, rho, alpha, r, export } => {
            let kind = cfg.pick(kind.clone(), "kind")?.ok_or_else(|| CliError::Input("gadget needs --kind".into()))?;
            let rho = correlation(cfg.pick_or(*rho, "rho", c.rho_star)?)?;
            let r = cfg.pick_or(*r, "r", 2usize)?;
            let alpha = cfg.pick_or(*alpha, "alpha", c.alpha_star)?;
            let (g, extra) = build_gadget(&kind, rho, alpha, r)?;
            let mut doc = gadget_summary(&g)?;
            if let Value::Object(map) = &mut doc {
                map.insert("kind".into(), json!(kind));
                map.insert("rho".into(), json!(rho.value()));
                map.insert("r".into(), json!(r));
                if let Value::Object(more) = extra {
                    map.extend(more);
                }
            }
            if let Some(path) = cfg.pick(export.clone(), "export")? {
                let graph = g.to_weighted_graph()?;
                fs::write(&path, graph.to_text()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            }
            Ok(Outcome::ok(doc))
        }
        Command::Solve { graph, rank, feas_tol, obj_tol } => {
            let g = read_graph(graph)?;
            let solver = solver_config(cfg, *rank, *feas_tol, *obj_tol, seed, g.planted.clone())?;
            let s = solve_sdp(&g, &solver).map_err(Error::at("solve"))?;
            Ok(Outcome::ok(serde_json::to_value(&s).map_err(|e| CliError::Compute(e.to_string()))?))
        }
        Command::Round { graph, solution, trials, b0 } => {
            let g = read_graph(graph)?;
            let text = fs::read_to_string(solution).map_err(|e| CliError::Input(format!("{}: {e}", solution.display())))?;
            let s = SdpSolution::from_json(&text).map_err(Error::at("load"))?;
            sdp_objective(&g, &s).map_err(Error::at("load"))?;
            let trials = cfg.pick_or(*trials, "trials", 10_000usize)?;
            let b0 = checked_b0(cfg.pick_or(*b0, "b0", c.b_star)?, c.b_star)?;
            let outcome = round_trials(&g, &s, &default_threshold(b0), seed, trials);
            Ok(Outcome::ok(json!({
                "cut_weight": outcome.cut_weight,
                "best_weight": outcome.best_weight,
                "mean_weight": outcome.mean_weight,
                "trials": outcome.trials,
                "seed": outcome.seed,
                "certified_bound": certified_bound(&g, &s, b0),
            })))
        }
        Command::Verify { mode, eta, b0, grid, max_depth, top_offset } => {
            let mode = cfg.pick_or(mode.clone(), "mode", "full".to_string())?;
            let default_eta = match mode.as_str() {
                "full" => 1e-13,
                "relaxed" => 0.0,
                other => return Err(CliError::Input(format!("unknown verify mode {other:?}"))),
            };
            let eta = cfg.pick_or(*eta, "eta", default_eta)?;
            let b0 = cfg.pick_or(*b0, "b0", c.b_star)?;
            let mut t = default_threshold(b0);
            if let Some(offset) = cfg.pick(*top_offset, "top_offset")? {
                t = t.with_top_value(t.q + offset);
            }
            let mut certificate = CertificateConfig::default();
            certificate.initial_grid = cfg.pick_or(*grid, "grid", certificate.initial_grid)?;
            certificate.max_depth = cfg.pick_or(*max_depth, "max_depth", certificate.max_depth)?;
            let report = verify_certificate(b0, eta, &t, &certificate)?;
            let status = if report.verified { Status::Success } else { Status::Unverified };
            let document = serde_json::to_value(&report).map_err(|e| CliError::Compute(e.to_string()))?;
            Ok(Outcome { document, status })
        }
        Command::Pipeline { graph, trials, b0, feas_tol, obj_tol } => {
            let g = read_graph(graph)?;
            let pipeline = PipelineConfig {
                solver: solver_config(cfg, None, *feas_tol, *obj_tol, seed, None)?,
                trials: cfg.pick_or(*trials, "trials", 10_000usize)?,
                seed,
                b0: cfg.pick(*b0, "b0")?,
                ..PipelineConfig::default()
            };
            let report = run_pipeline(&g, &pipeline)?;
            let status = if report.succeeded() { Status::Success } else { Status::Unverified };
            let document = serde_json::to_value(&report).map_err(|e| CliError::Compute(e.to_string()))?;
            Ok(Outcome { document, status })
        }
    }
}

fn checked_b0(b0: f64, b_star: f64) -> Result<f64, CliError> {
    if (b0 - b_star).abs() > 1e-13 {
        return Err(CliError::Input(format!("b0 = {b0} must lie within 1e-13 of {b_star}")));
    }
    Ok(b0)
}

fn solver_config(
    cfg: &Overrides,
    rank: Option<usize>,
    feas_tol: Option<f64>,
    obj_tol: Option<f64>,
    seed: u64,
    warm_start: Option<Vec<usize>>,
) -> Result<SolverConfig, CliError> {
    let base = SolverConfig::default();
    Ok(SolverConfig {
        rank: cfg.pick(rank, "rank")?,
        feas_tol: cfg.pick_or(feas_tol, "feas_tol", base.feas_tol)?,
        obj_tol: cfg.pick_or(obj_tol, "obj_tol", base.obj_tol)?,
        seed,
        warm_start,
        ..base
    })
}

fn build_gadget(kind: &str, rho: Correlation, alpha: f64, r: usize) -> Result<(GadgetGraph, Value), CliError> {
    Ok(match kind {
        "noisy" => (build_noisy_cube(rho, r)?, json!({})),
        "tripartite" => {
            let g = build_tripartite_cube(rho, r)?;
            let quasi = if g.vertex_count() <= QUASIRANDOM_MAX_VERTICES { Some(quasirandom_max_cut(&g, 0.0)?) } else { None };
            (g, json!({ "quasirandom_max_cut": quasi }))
        }
        "known-iset" => {
            let g = build_known_iset_gadget(rho, alpha, r)?;
            let (independent, volume) = g.independent_set_check(&g.part(0));
            (g, json!({ "alpha": alpha, "iset_independent": independent, "iset_volume": volume }))
        }
        "hidden-iset" => {
            let g = build_hidden_iset_gadget(rho, alpha, r)?;
            let law = tensor_distribution(&make_rho_correlated(rho), &make_mu2_alpha(alpha)?);
            let set = hidden_y_dictator_set(&g, 0);
            let (independent, volume) = g.independent_set_check(&set);
            let corr = correlation_of(&law)?.value();
            (g, json!({ "alpha": alpha, "correlation": corr, "iset_independent": independent, "iset_volume": volume }))
        }
        other => return Err(CliError::Input(format!("unknown gadget kind {other:?}"))),
    })
}

fn gadget_summary(g: &GadgetGraph) -> Result<Value, CliError> {
    let n = g.vertex_count();
    let dictator = cut_value(g, &g.dictator(0))?;
    let brute = if n <= BRUTE_FORCE_MAX_VERTICES { Some(brute_force_max_cut(g)?.1) } else { None };
    Ok(json!({
        "vertices": n,
        "total_weight": g.total_weight(),
        "dictator_cut": dictator,
        "max_cut": brute,
    }))
}

/// CSV of the objective on a (μ₁, μ₂) grid; the tripartite grid fixes μ₃.
fn landscape_grid(rho: Correlation, alpha: Option<f64>, mu3: f64, n: usize) -> Result<String, CliError> {
    let mut out = String::from("mu1,mu2,value\n");
    for a in 0..n {
        for b in 0..n {
            let (x, y) = (a as f64 / (n - 1) as f64, b as f64 / (n - 1) as f64);
            let v = match alpha {
                Some(alpha) => f_alpha_bipartite(rho, alpha, x, y),
                None => f_cut_tripartite(rho, &TripartitePoint::new([x, y, mu3])?),
            };
            let _ = writeln!(out, "{x},{y},{v}");
        }
    }
    Ok(out)
}
