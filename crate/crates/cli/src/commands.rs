use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use shadowkit::bridge::{ContinuousOperator, QuadratureScheme};
use shadowkit::jets::{
    fd_jet_oracle_continuous, fd_jet_oracle_discrete, fd_noise_floor, solve_jet1, solve_jet2,
    ParameterJet, RichardsonCheck,
};
use shadowkit::linalg::sup_norm;
use shadowkit::linear::certify_dichotomy_discrete;
use shadowkit::shadow::{
    hyers_ulam_constants, solve_shadow, DiscreteOperator, Green, Grid, ShadowOperator, ShadowResult,
};
use shadowkit::system::csv_io::{index_keys, time_keys, write_table};
use shadowkit::system::{
    check_continuous, check_discrete, defect_discrete, HypothesisReport, PseudoOrbitDiscrete,
    Status,
};
use shadowkit::{DVector, Error, Exec, Samples};

use crate::config::RunConfig;
use crate::output::{to_json, write_file};
use crate::problem::{load, Problem};
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERT: i32 = 2;

const HYPOTHESIS_SAMPLES: usize = 200;

/// Operator for the loaded problem plus its certificate.
pub enum Built {
    Discrete(DiscreteOperator),
    Continuous(ContinuousOperator),
}

pub struct Setup {
    pub problem: Problem,
    pub built: Built,
    pub certificate: Value,
    pub certified: bool,
    pub exec: Exec,
}

pub fn scheme(cfg: &RunConfig) -> QuadratureScheme {
    QuadratureScheme {
        tail_tol: cfg.tol.quad_tol,
        ..Default::default()
    }
}

fn sup_over(keys: impl Iterator<Item = f64>) -> f64 {
    keys.fold(0.0, f64::max)
}

fn certificate<T: Copy + Send + Sync, G: Green>(
    cfg: &RunConfig,
    op: &ShadowOperator<T, G>,
    hyp: &HypothesisReport,
    sup_c: f64,
    sup_eps: f64,
) -> (Value, bool) {
    let b = &op.bounds;
    let failed = hyp.failed();
    let certified = b.is_contraction() && failed.is_empty();
    let dichotomy = b.dichotomy.as_ref().map(|d| {
        json!({"D": d.d, "rho": d.rho, "margin": d.margin, "pairs": d.pairs,
               "commutation_defect": d.commutation_defect})
    });
    let hu = b
        .dichotomy
        .as_ref()
        .and_then(|d| hyers_ulam_constants(sup_c, sup_eps, d.d, d.rho).ok())
        .map(|(q, l, bound)| json!({"c": sup_c, "eps": sup_eps, "q": q, "L": l, "bound": bound}));
    let mut hv = serde_json::to_value(hyp).expect("hypothesis report serializes");
    hv["failed"] = json!(failed);
    let v = json!({
        "problem": cfg.gallery,
        "params": cfg.params,
        "grid": match op.grid { Grid::Discrete(_) => "discrete", Grid::Continuous(_) => "continuous" },
        "q": b.q,
        "L": b.l,
        "radius": if b.radius.is_finite() { json!(b.radius) } else { Value::Null },
        "contraction": b.is_contraction(),
        "sup_attained_at": b.sup_attained_at,
        "l_attained_at": b.l_attained_at,
        "method": b.method,
        "dichotomy": dichotomy,
        "hyers_ulam": hu,
        "tail": b.tail,
        "hypotheses": hv,
        "status": if certified { "certified" } else { "failed" },
    });
    (v, certified)
}

pub fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    let exec = Exec::from_flag(cfg.parallel);
    let problem = load(cfg)?;
    let (built, certificate, certified) = match &problem {
        Problem::Discrete { sys, y, family } => {
            let mut op = DiscreteOperator::discrete(sys, y, exec)?;
            let mut hyp = check_discrete(sys, y, family.as_ref(), HYPOTHESIS_SAMPLES, 0)?;
            match certify_dichotomy_discrete(&sys.lin, &sys.proj, 1, exec) {
                Ok(cert) => {
                    op = op.with_dichotomy(sys, cert);
                    hyp.no_bounded_solutions = Status::SampledVerified;
                }
                Err(Error::NoDichotomy { .. } | Error::ProjectionNotInvariant { .. }) => {}
                Err(e) => return Err(e.into()),
            }
            let w = *sys.window();
            let sup_c = sup_over(w.indices().map(|n| sys.lipschitz(n)));
            let sup_e = sup_over(w.indices().map(|n| (sys.eps)(n)));
            let (c, ok) = certificate(cfg, &op, &hyp, sup_c, sup_e);
            (Built::Discrete(op), c, ok)
        }
        Problem::Continuous { sys, y, family } => {
            let op = ContinuousOperator::continuous(sys, y, &scheme(cfg), exec)?;
            let mut hyp = check_continuous(sys, y, family.as_ref(), HYPOTHESIS_SAMPLES, 0)?;
            if op.bounds.dichotomy.is_some() {
                hyp.no_bounded_solutions = Status::SampledVerified;
            }
            let times = sys.window.times();
            let sup_c = sup_over(times.iter().map(|&t| sys.lipschitz(t)));
            let sup_e = sup_over(times.iter().map(|&t| (sys.eps)(t)));
            let (c, ok) = certificate(cfg, &op, &hyp, sup_c, sup_e);
            (Built::Continuous(op), c, ok)
        }
    };
    Ok(Setup {
        problem,
        built,
        certificate,
        certified,
        exec,
    })
}

fn emit(cfg: &RunConfig, v: &Value) -> Result<(), CliError> {
    let s = to_json(v);
    if let Some(p) = &cfg.out_json {
        write_file(p, s.as_bytes())
            .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
    }
    // a closed stdout (e.g. piped into `head`) is not an error of the run
    let _ = writeln!(std::io::stdout().lock(), "{s}");
    Ok(())
}

fn write_csv(path: &Path, grid: &Grid, blocks: &[(&str, &Samples)]) -> Result<(), CliError> {
    let (key, keys) = match grid {
        Grid::Discrete(w) => ("n", index_keys(w.lo, w.len())),
        Grid::Continuous(w) => ("t", time_keys(&w.times())),
    };
    let mut buf = Vec::new();
    write_table(&mut buf, key, &keys, blocks)?;
    write_file(path, &buf).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn certify(cfg: &RunConfig) -> Result<i32, CliError> {
    let s = setup(cfg)?;
    emit(cfg, &s.certificate)?;
    Ok(if s.certified { EXIT_OK } else { EXIT_CERT })
}

pub fn shadow_json(r: &ShadowResult) -> Value {
    json!({
        "iterations": r.iterations,
        "residual": r.residual,
        "aposteriori_bound": r.aposteriori_bound,
        "sup_z": r.sup_z,
        "sup_z_window": r.sup_z_window,
        "radius": r.radius,
        "q": r.q,
        "measured_ratio": r.measured_ratio,
        "ratio_exceeded": r.ratio_exceeded,
        "equation_residual": r.equation_residual,
        "step_history": r.step_history,
    })
}

/// `A x + f(x)` at the grid times: the time derivative of a true solution through `x`.
fn vector_field(p: &Problem, x: &Samples) -> Option<Samples> {
    let Problem::Continuous { sys, y, .. } = p else {
        return None;
    };
    let times = sys.window.times();
    let mut out = Samples::zeros(x.nrows(), x.ncols());
    for (k, &t) in times.iter().enumerate() {
        let xk = x.column(k).into_owned();
        out.set_column(
            k,
            &(sys.lin.matrix(t) * &xk + sys.f.eval(t, &xk, &y.lambda)),
        );
    }
    Some(out)
}

/// Largest defect of `x` as an orbit of the discrete system; `None` for functions of time.
fn orbit_defect(p: &Problem, x: &Samples) -> Result<Option<f64>, CliError> {
    let Problem::Discrete { sys, y, .. } = p else {
        return Ok(None);
    };
    let orbit = PseudoOrbitDiscrete::new(y.lambda.clone(), *sys.window(), x.clone())?;
    Ok(Some(defect_discrete(sys, &orbit)?.sup_defect))
}

pub fn solve<T: Copy + Send + Sync, G: Green>(
    op: &ShadowOperator<T, G>,
    cfg: &RunConfig,
) -> Result<ShadowResult, CliError> {
    Ok(solve_shadow(op, cfg.tol.tol, cfg.max_iter)?)
}

fn solve_built(s: &Setup, cfg: &RunConfig) -> Result<ShadowResult, CliError> {
    match &s.built {
        Built::Discrete(op) => solve(op, cfg),
        Built::Continuous(op) => solve(op, cfg),
    }
}

pub fn shadow(cfg: &RunConfig) -> Result<i32, CliError> {
    let s = setup(cfg)?;
    let bounds_ok = s.certificate["contraction"].as_bool() == Some(true);
    if !bounds_ok {
        emit(cfg, &json!({"certificate": s.certificate}))?;
        return Ok(EXIT_CERT);
    }
    let r = solve_built(&s, cfg)?;
    let xp = vector_field(&s.problem, &r.x);
    if let Some(path) = &cfg.out_csv {
        let mut blocks: Vec<(&str, &Samples)> = vec![("x", &r.x), ("z", &r.z)];
        if let Some(xp) = &xp {
            blocks.push(("xp", xp));
        }
        write_csv(path, &r.grid, &blocks)?;
    }
    let mut v = shadow_json(&r);
    v["orbit_defect"] = json!(orbit_defect(&s.problem, &r.x)?);
    v["certificate"] = s.certificate.clone();
    emit(cfg, &v)?;
    Ok(if r.sup_z <= r.radius && r.residual <= cfg.tol.tol {
        EXIT_OK
    } else {
        EXIT_CERT
    })
}

pub struct JetRequest {
    pub order: usize,
    pub direction: Option<DVector<f64>>,
    pub verify: bool,
    pub fd_step: f64,
}

fn fd_floor(order: usize, tol: f64, h: f64) -> f64 {
    if order == 1 {
        fd_noise_floor(tol, h)
    } else {
        (100.0 * tol / (h * h)).max(1e-9)
    }
}

pub struct JetOutcome {
    pub jet: ParameterJet,
    pub shadow: ShadowResult,
    pub richardson: Vec<RichardsonCheck>,
    pub jet_tol: f64,
    pub passed: bool,
    pub grid: Grid,
}

pub fn parse_direction(s: &str) -> Result<DVector<f64>, CliError> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(DVector::from_vec(v)),
        _ => Err(CliError::config(format!(
            "direction `{s}` is not a comma-separated list of numbers"
        ))),
    }
}

fn jet_on<T: Copy + Send + Sync, G: Green>(
    op: &ShadowOperator<T, G>,
    cfg: &RunConfig,
    req: &JetRequest,
    jet_tol: f64,
    fd: impl Fn(f64, usize) -> Result<Samples, Error>,
) -> Result<JetOutcome, CliError> {
    let shadow = solve(op, cfg)?;
    let p = op.lambda().len();
    let mu = req
        .direction
        .clone()
        .unwrap_or_else(|| DVector::from_element(p, 1.0));
    if mu.len() != p {
        return Err(CliError::config(format!(
            "direction has {} entries, the parameter has {p}",
            mu.len()
        )));
    }
    let mut jet = solve_jet1(op, &shadow, &mu, cfg.tol.tol, cfg.max_iter)?;
    if req.order == 2 {
        jet = solve_jet2(op, &shadow, &jet, cfg.tol.tol, cfg.max_iter)?;
    }
    let mut passed = jet.residual_1 <= jet_tol && jet.residual_2.is_none_or(|r| r <= jet_tol);
    let mut richardson = Vec::new();
    if req.verify {
        let h = req.fd_step;
        let fd_tol = (0.01 * cfg.tol.tol).max(1e-14);
        for order in 1..=req.order {
            let target = if order == 1 {
                &jet.w1
            } else {
                jet.w2.as_ref().expect("second jet solved")
            };
            let (a, b) = (fd(h, order)?, fd(h / 2.0, order)?);
            let rc =
                RichardsonCheck::new(target, &a, &b, op.interior(), h, fd_floor(order, fd_tol, h));
            passed &= rc.passed;
            richardson.push(rc);
        }
    }
    Ok(JetOutcome {
        jet,
        grid: shadow.grid,
        shadow,
        richardson,
        jet_tol,
        passed,
    })
}

pub fn run_jet(s: &Setup, cfg: &RunConfig, req: &JetRequest) -> Result<JetOutcome, CliError> {
    if !(1..=2).contains(&req.order) {
        return Err(CliError::config(format!(
            "order must be 1 or 2, got {}",
            req.order
        )));
    }
    if req.fd_step.is_nan() || req.fd_step <= 0.0 {
        return Err(CliError::config("fd-step must be > 0"));
    }
    let fd_tol = (0.01 * cfg.tol.tol).max(1e-14);
    match (&s.built, &s.problem) {
        (Built::Discrete(op), Problem::Discrete { sys, y, family }) => {
            let jet_tol = cfg.tol.jet_tol.unwrap_or(1e-9);
            jet_on(op, cfg, req, jet_tol, |h, order| {
                let fam = family.as_ref().ok_or_else(no_family)?;
                let mu = direction_or_ones(req, y.lambda.len());
                fd_jet_oracle_discrete(sys, fam, &y.lambda, &mu, h, order, fd_tol, s.exec)
            })
        }
        (Built::Continuous(op), Problem::Continuous { sys, y, family }) => {
            let jet_tol = cfg.tol.jet_tol.unwrap_or(1e-7);
            jet_on(op, cfg, req, jet_tol, |h, order| {
                let fam = family.as_ref().ok_or_else(no_family)?;
                let mu = direction_or_ones(req, y.lambda.len());
                fd_jet_oracle_continuous(
                    sys, fam, &op.green, &y.lambda, &mu, h, order, fd_tol, s.exec,
                )
            })
        }
        _ => unreachable!("operator and problem kinds agree"),
    }
}

fn no_family() -> Error {
    Error::JetUnavailable("finite-difference check needs a pseudo-orbit family".into())
}

fn direction_or_ones(req: &JetRequest, p: usize) -> DVector<f64> {
    req.direction
        .clone()
        .unwrap_or_else(|| DVector::from_element(p, 1.0))
}

pub fn jet_json(o: &JetOutcome) -> Value {
    json!({
        "jet": o.jet,
        "jet_tol": o.jet_tol,
        "sup_w1": sup_norm(&o.jet.w1),
        "sup_w2": o.jet.w2.as_ref().map(sup_norm),
        "richardson": o.richardson,
        "shadow": shadow_json(&o.shadow),
        "passed": o.passed,
    })
}

pub fn jet(cfg: &RunConfig, req: &JetRequest) -> Result<i32, CliError> {
    let s = setup(cfg)?;
    if s.certificate["contraction"].as_bool() != Some(true) {
        emit(cfg, &json!({"certificate": s.certificate}))?;
        return Ok(EXIT_CERT);
    }
    let o = run_jet(&s, cfg, req)?;
    if let Some(path) = &cfg.out_csv {
        let mut blocks: Vec<(&str, &Samples)> = vec![("w1_", &o.jet.w1)];
        if let Some(w2) = &o.jet.w2 {
            blocks.push(("w2_", w2));
        }
        write_csv(path, &o.grid, &blocks)?;
    }
    let mut v = jet_json(&o);
    v["certificate"] = s.certificate.clone();
    emit(cfg, &v)?;
    Ok(if o.passed { EXIT_OK } else { EXIT_CERT })
}
