//! One function per subcommand. Each returns the JSON `result`, any CSV
//! tables, and a one-line summary.

use cdi_core::boundary::entrance_test;
use cdi_core::hitting::{hit_moments, hitting_summary, Omega, WnTable};
use cdi_core::limitlaw::{laplace_exp_limit, laplace_s, ExpRateLimitLaw, StableThetaLaw};
use cdi_core::rates::{check_h4, check_hypothesis, Hypothesis, PhiFunction, RateFunction, Verdict};
use cdi_core::scale::{build_scale, validate_scale, ScaleFunction};
use cdi_core::simulate::{sample_hit_draws, speed_report, McSummary, RatioBand, SpeedOptions};
use cdi_core::{Error as CoreError, Mechanism};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{fmt_f, Csv};

pub struct Outcome {
    pub result: Value,
    pub tables: Vec<(String, Csv)>,
    pub summary: String,
    pub inconclusive: bool,
}

impl Outcome {
    fn new(result: Value, summary: String) -> Self {
        Self { result, tables: Vec::new(), summary, inconclusive: false }
    }

    fn with_table(mut self, name: &str, csv: Csv) -> Self {
        self.tables.push((name.to_string(), csv));
        self
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    let mech = cfg.mechanism()?;
    match cmd {
        Command::Classify => classify(&mech, cfg),
        Command::Scale => scale(&mech, cfg),
        Command::Hitting => hitting(&mech, cfg),
        Command::Limitlaw => limitlaw(&mech, cfg),
        Command::Simulate => simulate(&mech, cfg),
        Command::Speed => speed(&mech, cfg),
        Command::Hypotheses => hypotheses(&mech, cfg),
    }
}

fn classify(mech: &Mechanism, cfg: &RunConfig) -> Result<Outcome> {
    let v = entrance_test(mech, &cfg.rate, cfg.run.entrance_tol)?;
    let verdict = if v.is_entrance { "entrance" } else { "not_entrance" };
    let crit = mech.classify();
    let result = json!({ "criticality": crit, "verdict": verdict, "entrance": to_value(&v) });
    Ok(Outcome::new(result, format!("classify: {verdict} ({crit:?}, {:?})", v.criterion_used)))
}

fn scale_function(mech: &Mechanism, cfg: &RunConfig) -> Result<ScaleFunction> {
    Ok(build_scale(mech, &cfg.run.scale)?)
}

fn scale(mech: &Mechanism, cfg: &RunConfig) -> Result<Outcome> {
    let sf = scale_function(mech, cfg)?;
    let diag = validate_scale(&sf, &[0.1, 1.0, 10.0]);
    let mut csv = Csv::new(&["x", "W", "Delta", "lower_bound", "upper_bound"]);
    for &x in &cfg.run.x_grid {
        let delta = match sf.delta(x) {
            Ok(d) => d,
            Err(CoreError::DeltaUndefined) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        let base = 1.0 / (x * mech.psi(1.0 / x));
        csv.floats(&[x, sf.w_eval(x), delta, diag.c1 * base, diag.c2 * base]);
    }
    let result = json!({
        "method": sf.method(),
        "w_at_zero": sf.w_at_zero(),
        "w_limit": sf.w_limit(),
        "diagnostics": to_value(&diag),
    });
    let summary = format!("scale: {:?}, {} points, sandwich c1 = {:.4e}, c2 = {:.4e}", sf.method(), cfg.run.x_grid.len(), diag.c1, diag.c2);
    Ok(Outcome::new(result, summary).with_table("scale.csv", csv))
}

fn hitting(mech: &Mechanism, cfg: &RunConfig) -> Result<Outcome> {
    let sf = scale_function(mech, cfg)?;
    let run = &cfg.run;
    let mut table = WnTable::build(&sf, Omega::reciprocal(cfg.rate.clone()), &cfg.wn())?;
    let mut csv = Csv::new(&["b", "mean", "variance"]);
    for &b in run.b_grid.iter().filter(|&&b| b <= run.x) {
        let m = hit_moments(&mut table, b, run.x)?;
        csv.floats(&[b, m.mean, m.variance]);
    }
    let s = hitting_summary(&mut table, run.b, run.x, &run.lambdas)?;
    let summary = format!("hitting: b = {}, x = {}, mean = {:.6e}, variance = {:.6e}", run.b, run.x, s.mean, s.variance);
    Ok(Outcome::new(to_value(&s), summary).with_table("hitting.csv", csv))
}

fn limitlaw(mech: &Mechanism, cfg: &RunConfig) -> Result<Outcome> {
    let mut csv = Csv::new(&["s", "laplace"]);
    let result = match (mech.stable, &cfg.rate) {
        (Some(st), RateFunction::Power { theta, .. }) => {
            let law = StableThetaLaw::new(st.alpha, *theta)?;
            for &s in &cfg.run.s_grid {
                csv.floats(&[s, laplace_s(&law, s)?]);
            }
            json!({ "law": "stable_theta", "alpha": st.alpha, "theta": theta, "mean_scale": law.mean_scale() })
        }
        (_, RateFunction::ExpRate { theta2, g }) if **g == RateFunction::power(0.0) => {
            let law = ExpRateLimitLaw::new(*mech, *theta2)?;
            for &s in &cfg.run.s_grid {
                csv.floats(&[s, laplace_exp_limit(&law, s)?]);
            }
            json!({ "law": "exp_rate", "theta2": theta2 })
        }
        _ => {
            return Err(CliError::Core(CoreError::NoRegime(
                "limit laws are available for stable mechanisms with power rates and for R = exp(theta2 x)".into(),
            )))
        }
    };
    let summary = format!("limitlaw: {} points of the {} law", cfg.run.s_grid.len(), result["law"].as_str().unwrap_or("?"));
    Ok(Outcome::new(result, summary).with_table("limitlaw.csv", csv))
}

fn simulate(mech: &Mechanism, cfg: &RunConfig) -> Result<Outcome> {
    let run = &cfg.run;
    let draws = sample_hit_draws(mech, &cfg.rate, run.x0, run.b, run.reps, &run.path)?;
    let mc = McSummary::from_draws(&draws, &run.lambdas);
    let mut csv = Csv::new(&["replica", "T_b"]);
    for (r, d) in draws.iter().enumerate() {
        csv.row(&[(run.path.replica + r as u64).to_string(), fmt_f(d.unwrap_or(f64::INFINITY))]);
    }
    let summary = format!(
        "simulate: {} replicas, mean T_b = {:.6e} +/- {:.2e}, {} beyond horizon",
        mc.n_reps, mc.mean, mc.se, mc.horizon_exceeded
    );
    Ok(Outcome::new(to_value(&mc), summary).with_table("simulate.csv", csv))
}

fn band_csv(rows: &[RatioBand]) -> Csv {
    let mut csv = Csv::new(&["t", "median_ratio", "q05", "q95"]);
    for r in rows {
        csv.floats(&[r.t, r.median_ratio, r.q05, r.q95]);
    }
    csv
}

fn speed(mech: &Mechanism, cfg: &RunConfig) -> Result<Outcome> {
    let sf = scale_function(mech, cfg)?;
    let sp = &cfg.run.speed;
    let opts = SpeedOptions { x0: sp.x0, t_grid: sp.t_grid.clone(), excursion_lower: sp.excursion_lower.clone() };
    let rep = speed_report(mech, &cfg.rate, &sf, sp.b_stop, sp.n_paths, &opts, &cfg.run.path)?;
    let summary = format!("speed: {} paths, {:?} regime, {}", rep.n_paths, rep.regime, rep.evidence);
    let (flow, inf) = (band_csv(&rep.flow_ratio), band_csv(&rep.infimum_ratio));
    Ok(Outcome::new(to_value(&rep), summary).with_table("speed_flow.csv", flow).with_table("speed_infimum.csv", inf))
}

fn hypotheses(mech: &Mechanism, cfg: &RunConfig) -> Result<Outcome> {
    let gamma = mech.drift();
    let mut reports = serde_json::Map::new();
    let mut verdicts = Vec::new();
    for h in [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3] {
        if gamma <= 0.0 && h != Hypothesis::H3 {
            reports.insert(format!("{h:?}"), json!({ "skipped": "phi needs gamma > 0" }));
            continue;
        }
        let r = check_hypothesis(&cfg.rate, gamma, h)?;
        verdicts.push((format!("{h:?}"), r.verdict));
        reports.insert(format!("{h:?}"), to_value(&r));
    }
    let hs = &cfg.run.hypotheses;
    match &hs.p {
        Some(p) if gamma > 0.0 => {
            let sf = scale_function(mech, cfg)?;
            let pf = PhiFunction::new(cfg.rate.clone(), gamma)?;
            let r = check_h4(&sf, &pf, p, hs.c, hs.valley)?;
            verdicts.push(("H4".into(), r.verdict));
            reports.insert("H4".into(), to_value(&r));
        }
        _ => {
            reports.insert("H4".into(), json!({ "skipped": "H4 needs gamma > 0" }));
        }
    }
    let inconclusive = verdicts.iter().any(|(_, v)| *v == Verdict::Inconclusive);
    let summary = format!(
        "hypotheses: {}",
        verdicts.iter().map(|(h, v)| format!("{h} {v:?}")).collect::<Vec<_>>().join(", ")
    );
    let mut out = Outcome::new(Value::Object(reports), summary);
    out.inconclusive = inconclusive;
    Ok(out)
}
