//! Full certify → shadow → jet runs on the worked examples, with a markdown report of
//! measured against expected values.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use shadowkit::linalg::{sup_norm, sup_norm_cols};
use shadowkit::shadow::{uniqueness_probe, Grid};
use shadowkit::system::defect_continuous;
use shadowkit::Samples;

use crate::commands::{
    jet_json, run_jet, setup, shadow_json, solve, Built, JetRequest, EXIT_CERT, EXIT_OK,
};
use crate::config::{Overrides, RunConfig};
use crate::output::{to_json, write_file};
use crate::problem::Problem;
use crate::CliError;

pub const IDS: &[&str] = &["cont-sin", "cont-rho", "disc-toy"];

struct Row {
    check: String,
    measured: String,
    expected: String,
    pass: bool,
}

#[derive(Default)]
struct Report {
    rows: Vec<Row>,
    runs: Vec<Value>,
}

impl Report {
    fn row(
        &mut self,
        check: impl Into<String>,
        measured: f64,
        expected: impl Into<String>,
        pass: bool,
    ) {
        self.rows.push(Row {
            check: check.into(),
            measured: format!("{measured:.6e}"),
            expected: expected.into(),
            pass,
        });
    }

    fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    fn markdown(&self, id: &str, params: &str) -> String {
        let mut s = format!("# Reproduction: {id}\n\nParameters: {params}\n\n");
        s += "| check | measured | expected | result |\n|---|---|---|---|\n";
        for r in &self.rows {
            s += &format!(
                "| {} | {} | {} | {} |\n",
                r.check,
                r.measured,
                r.expected,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        let n = self.rows.iter().filter(|r| r.pass).count();
        s += &format!("\n{n} of {} checks passed.\n", self.rows.len());
        s
    }
}

fn cfg_for(base: &Overrides, gallery: &str) -> Result<RunConfig, CliError> {
    let mut o = base.clone();
    o.gallery = Some(gallery.into());
    RunConfig::build(o)
}

fn sine(base: &Overrides, rep: &mut Report) -> Result<(), CliError> {
    for l in [0.1, 0.5, 0.9] {
        let mut cfg = cfg_for(base, "cont-sin")?;
        cfg.params.insert("lambda".into(), l);
        let eps = *cfg.params.entry("eps".into()).or_insert(0.1);
        let s = setup(&cfg)?;
        let (Built::Continuous(op), Problem::Continuous { sys, y, .. }) = (&s.built, &s.problem)
        else {
            unreachable!()
        };
        let grid = sys.window.times();
        let defect = defect_continuous(sys, y, &grid)?;
        rep.row(
            format!("λ = {l}: sup defect"),
            defect.sup_defect,
            format!("λε = {:.6e}", l * eps),
            (defect.sup_defect - l * eps).abs() <= 1e-9,
        );
        rep.row(format!("λ = {l}: q"), op.bounds.q, "0", op.bounds.q == 0.0);
        let hu = s.certificate["hyers_ulam"]["bound"]
            .as_f64()
            .unwrap_or(f64::NAN);
        rep.row(
            format!("λ = {l}: bound L̃/(1 − q̃)"),
            hu,
            format!("2ε = {} (within 2%)", 2.0 * eps),
            (hu - 2.0 * eps).abs() <= 0.02 * 2.0 * eps,
        );
        let r = solve(op, &cfg)?;
        let want = l * eps / 2f64.sqrt();
        rep.row(
            format!("λ = {l}: sup|x − y|"),
            r.sup_z,
            format!("λε/√2 = {want:.6e}"),
            (r.sup_z - want).abs() <= 1e-6,
        );
        rep.row(
            format!("λ = {l}: sup|x − y| within bound"),
            r.sup_z,
            format!("≤ {hu:.6e}"),
            r.sup_z <= hu,
        );
        let err = op
            .interior()
            .map(|i| (r.x[(0, i)] - l / 2.0 * (grid[i].sin() - grid[i].cos())).abs())
            .fold(0.0, f64::max);
        rep.row(
            format!("λ = {l}: x − (λ/2)(sin t − cos t)"),
            err,
            "≤ 1e-6",
            err <= 1e-6,
        );
        let req = JetRequest {
            order: 2,
            direction: None,
            verify: false,
            fd_step: 1e-2,
        };
        let j = run_jet(&s, &cfg, &req)?;
        let dy = y.jets()?;
        let e1 = op
            .interior()
            .map(|i| {
                let t = grid[i];
                (j.jet.w1[(0, i)] + (dy.dy)(t)[(0, 0)] - 0.5 * (t.sin() - t.cos())).abs()
            })
            .fold(0.0, f64::max);
        rep.row(
            format!("λ = {l}: ∂x/∂λ − (1/2)(sin t − cos t)"),
            e1,
            "≤ 1e-6",
            e1 <= 1e-6,
        );
        let w2 = sup_norm_cols(j.jet.w2.as_ref().unwrap(), op.interior());
        rep.row(format!("λ = {l}: second jet"), w2, "≤ 1e-8", w2 <= 1e-8);
        rep.row(
            format!("λ = {l}: jet residuals"),
            j.jet.residual_1.max(j.jet.residual_2.unwrap_or(0.0)),
            format!("≤ {:e}", j.jet_tol),
            j.passed,
        );
        rep.runs
            .push(json!({"lambda": l, "certificate": s.certificate, "jet": jet_json(&j)}));
    }
    Ok(())
}

fn rho_family(base: &Overrides, a: Option<f64>, rep: &mut Report) -> Result<(), CliError> {
    let mut cfg = cfg_for(base, "cont-rho")?;
    if let Some(a) = a {
        cfg.params.insert("a".into(), a);
    }
    let a = *cfg.params.entry("a".into()).or_insert(3.0);
    let s = setup(&cfg)?;
    let Built::Continuous(op) = &s.built else {
        unreachable!()
    };
    let q = op.bounds.q;
    rep.row(
        "q",
        q,
        format!("≤ 2/a = {:.6e} (+0.01)", 2.0 / a),
        q <= 2.0 / a + 0.01,
    );
    rep.row(
        "certificate",
        if s.certified { 1.0 } else { 0.0 },
        "certified",
        s.certified,
    );
    let req = JetRequest {
        order: 1,
        direction: None,
        verify: true,
        fd_step: 1e-2,
    };
    let j = run_jet(&s, &cfg, &req)?;
    let r = &j.shadow;
    rep.row(
        "Picard iterations",
        r.iterations as f64,
        format!("≤ {}", cfg.max_iter),
        true,
    );
    rep.row(
        "fixed-point residual",
        r.residual,
        format!("≤ {:e}", cfg.tol.tol),
        r.residual <= cfg.tol.tol,
    );
    rep.row(
        "sup|x − y|",
        r.sup_z,
        format!("≤ radius {:.6e}", r.radius),
        r.sup_z <= r.radius,
    );
    rep.row(
        "orbit-equation residual",
        r.equation_residual,
        "≤ 1e-6",
        r.equation_residual <= 1e-6,
    );
    rep.row(
        "first jet residual",
        j.jet.residual_1,
        format!("≤ {:e}", j.jet_tol),
        j.jet.residual_1 <= j.jet_tol,
    );
    for rc in &j.richardson {
        rep.row(
            format!(
                "Richardson ratio (h = {}, errors {:.2e}/{:.2e})",
                rc.h, rc.err_h, rc.err_half
            ),
            rc.ratio,
            "in [3.5, 4.5]",
            (3.5..=4.5).contains(&rc.ratio),
        );
    }
    rep.row(
        "second-derivative diagnostic",
        j.jet.diagnostic.worst_ratio,
        "≤ 1",
        j.jet.diagnostic.holds,
    );
    rep.runs
        .push(json!({"a": a, "certificate": s.certificate, "jet": jet_json(&j)}));
    Ok(())
}

fn toy(base: &Overrides, rep: &mut Report) -> Result<(), CliError> {
    let cfg = cfg_for(base, "disc-toy")?;
    let s = setup(&cfg)?;
    let Built::Discrete(op) = &s.built else {
        unreachable!()
    };
    let b = &op.bounds;
    rep.row("q̂", b.q, "0.5 ± 1e-12", (b.q - 0.5).abs() <= 1e-12);
    rep.row("L̂", b.l, "0.2", (b.l - 0.2).abs() <= 1e-12);
    rep.row("radius", b.radius, "0.4", (b.radius - 0.4).abs() <= 1e-11);
    let req = JetRequest {
        order: 2,
        direction: None,
        verify: true,
        fd_step: 1e-2,
    };
    let j = run_jet(&s, &cfg, &req)?;
    let r = &j.shadow;
    rep.row(
        "Picard iterations",
        r.iterations as f64,
        "≤ 50",
        r.iterations <= 50,
    );
    let ratio = r
        .step_history
        .windows(2)
        .filter(|w| w[0] > 1e-13 * (1.0 + r.sup_z))
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    rep.row("largest step ratio", ratio, "≤ 0.55", ratio <= 0.55);
    rep.row("‖z‖∞", r.sup_z_window, "≤ 0.4", r.sup_z_window <= 0.4);
    rep.row(
        "orbit-equation residual",
        r.equation_residual,
        "≤ 1e-9",
        r.equation_residual <= 1e-9,
    );
    let n = op.len();
    let rad = b.radius;
    let seeds = [
        Samples::zeros(1, n),
        Samples::from_element(1, n, rad),
        Samples::from_element(1, n, -rad),
    ];
    let spread = uniqueness_probe(op, &seeds, cfg.tol.tol, cfg.max_iter)?;
    rep.row("uniqueness spread", spread, "≤ 1e-10", spread <= 1e-10);
    let res = j.jet.residual_1.max(j.jet.residual_2.unwrap_or(0.0));
    rep.row(
        "jet residuals",
        res,
        format!("≤ {:e}", j.jet_tol),
        res <= j.jet_tol,
    );
    for (k, rc) in j.richardson.iter().enumerate() {
        rep.row(
            format!(
                "order {} Richardson ratio (errors {:.2e}/{:.2e})",
                k + 1,
                rc.err_h,
                rc.err_half
            ),
            rc.ratio,
            "in [3.5, 4.5]",
            rc.passed,
        );
    }
    rep.runs.push(
        json!({"certificate": s.certificate, "jet": jet_json(&j), "shadow": shadow_json(r),
        "sup_w2": j.jet.w2.as_ref().map(sup_norm), "grid": matches!(r.grid, Grid::Discrete(_))}),
    );
    Ok(())
}

pub fn reproduce(
    id: &str,
    a: Option<f64>,
    base: Overrides,
    out_dir: Option<&Path>,
) -> Result<i32, CliError> {
    let mut rep = Report::default();
    match id {
        "cont-sin" => sine(&base, &mut rep)?,
        "cont-rho" => rho_family(&base, a, &mut rep)?,
        "disc-toy" => toy(&base, &mut rep)?,
        other => {
            return Err(CliError::config(format!(
                "unknown example `{other}`; choose one of {}",
                IDS.join(", ")
            )))
        }
    }
    let params = if base.params.is_empty() && a.is_none() {
        "defaults".to_string()
    } else {
        let mut p: Vec<String> = base.params.clone();
        if let Some(a) = a {
            p.push(format!("a={a}"));
        }
        p.join(", ")
    };
    let md = rep.markdown(id, &params);
    if let Some(dir) = out_dir {
        let err = |e: std::io::Error| CliError::config(format!("{}: {e}", dir.display()));
        write_file(&dir.join(format!("{id}-report.md")), md.as_bytes()).map_err(err)?;
        let checks: Vec<Value> = rep
            .rows
            .iter()
            .map(|r| json!({"check": r.check, "measured": r.measured, "expected": r.expected, "pass": r.pass}))
            .collect();
        let v = json!({"example": id, "passed": rep.passed(), "checks": checks, "runs": rep.runs});
        write_file(
            &dir.join(format!("{id}-results.json")),
            to_json(&v).as_bytes(),
        )
        .map_err(err)?;
    }
    let _ = write!(std::io::stdout().lock(), "{md}");
    Ok(if rep.passed() { EXIT_OK } else { EXIT_CERT })
}
