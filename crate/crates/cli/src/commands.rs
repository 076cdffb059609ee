use pairstop::simulator::{backtest, mc_value, Model, PathConfig, TradeLedger};
use pairstop::{
    all_tables, solve_policy, solve_policy_three, CalibrationResult, LogGrid, MarketParams, McEstimate, Position,
    ThresholdRule, ValidatedParams, VerificationReport,
};
use serde::Serialize;

use crate::args::{models, DataArgs, Format, ModelArg, OutputArgs, ParamArgs, SimArgs};
use crate::config::{self, FileConfig};
use crate::error::CliError;
use crate::format::{aligned, csv_text, dec5, emit, json_text};

/// How a command ended when it did not hit an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A check ran and failed (exit status 1).
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicySummary {
    pub model: Model,
    pub k_lower: f64,
    pub k_upper: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub lambda: f64,
}

impl PolicySummary {
    pub fn solve(v: &ValidatedParams, model: Model) -> Result<Self, CliError> {
        let (k_lower, k_upper, c1, c2, roots) = match model {
            Model::LongFlat => {
                let p = solve_policy(v)?;
                (p.k1, p.k2, p.c1, p.c2, p.roots)
            }
            Model::LongFlatShort => {
                let p = solve_policy_three(v);
                (p.k1_star, p.k2_star, p.c1, p.c2, p.roots)
            }
        };
        Ok(PolicySummary {
            model,
            k_lower,
            k_upper,
            c1,
            c2,
            delta1: roots.delta1,
            delta2: roots.delta2,
            lambda: roots.lambda,
        })
    }

    fn k_names(&self) -> (&'static str, &'static str) {
        match self.model {
            Model::LongFlat => ("k1", "k2"),
            Model::LongFlatShort => ("k1*", "k2*"),
        }
    }

    fn text(&self) -> String {
        let (l, u) = self.k_names();
        format!(
            "model={}\n{l}={} {u}={}\nC1={} C2={}\ndelta1={} delta2={} lambda={}\n",
            self.model.as_str(),
            dec5(self.k_lower),
            dec5(self.k_upper),
            dec5(self.c1),
            dec5(self.c2),
            dec5(self.delta1),
            dec5(self.delta2),
            dec5(self.lambda)
        )
    }

    const CSV_HEADER: [&'static str; 8] = ["model", "k_lower", "k_upper", "c1", "c2", "delta1", "delta2", "lambda"];

    fn csv_row(&self) -> Vec<String> {
        let mut row = vec![self.model.as_str().to_string()];
        row.extend([self.k_lower, self.k_upper, self.c1, self.c2, self.delta1, self.delta2, self.lambda].map(dec5));
        row
    }
}

fn params_text(p: &MarketParams) -> String {
    format!(
        "mu1={} mu2={}\ns11={} s12={} s21={} s22={}\nrho={} K={}\n",
        dec5(p.mu1),
        dec5(p.mu2),
        dec5(p.sigma[0][0]),
        dec5(p.sigma[0][1]),
        dec5(p.sigma[1][0]),
        dec5(p.sigma[1][1]),
        dec5(p.rho),
        dec5(p.k)
    )
}

#[derive(Serialize)]
struct ThresholdReport<'a> {
    params: MarketParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<&'a CalibrationResult>,
    policies: Vec<PolicySummary>,
}

fn render_policies(
    out: &OutputArgs,
    params: MarketParams,
    calibration: Option<&CalibrationResult>,
    policies: Vec<PolicySummary>,
) -> Result<String, CliError> {
    Ok(match out.format {
        Format::Table => {
            let mut text = String::new();
            if let Some(c) = calibration {
                text.push_str(&format!(
                    "returns={} dt={}\n",
                    c.diagnostics.returns,
                    dec5(c.diagnostics.dt)
                ));
                text.push_str(&params_text(&params));
                text.push('\n');
            }
            let blocks: Vec<String> = policies.iter().map(PolicySummary::text).collect();
            text.push_str(&blocks.join("\n"));
            text
        }
        Format::Csv => csv_text(&PolicySummary::CSV_HEADER, &policies.iter().map(PolicySummary::csv_row).collect::<Vec<_>>())?,
        Format::Json => json_text(&ThresholdReport { params, calibration, policies }),
    })
}

pub fn thresholds(params: &ParamArgs, data: &DataArgs, out: &OutputArgs, model: Option<ModelArg>) -> Result<Outcome, CliError> {
    let resolved = config::resolve(params, data)?;
    let v = resolved.params.validate()?;
    let policies = models(model.or(resolved.file.model))
        .into_iter()
        .map(|m| PolicySummary::solve(&v, m))
        .collect::<Result<Vec<_>, _>>()?;
    emit(out, &render_policies(out, resolved.params, resolved.calibration.as_ref(), policies)?)?;
    Ok(Outcome::Success)
}

pub fn calibrate(params: &ParamArgs, data: &DataArgs, out: &OutputArgs) -> Result<Outcome, CliError> {
    let series = config::read_series(data)?;
    let result = config::calibrate(&series, params, data)?;
    let v = result.validated()?;
    let policies = models(None).into_iter().map(|m| PolicySummary::solve(&v, m)).collect::<Result<Vec<_>, _>>()?;
    emit(out, &render_policies(out, result.params, Some(&result), policies)?)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct TableJson {
    model: Model,
    param: &'static str,
    title: String,
    rows: Vec<pairstop::TableRow>,
}

/// Without any parameter source the shipped reference set is the base.
pub fn tables(params: &ParamArgs, out: &OutputArgs, model: Option<ModelArg>) -> Result<Outcome, CliError> {
    let resolved = config::resolve_flags(params, Some(FileConfig::reference()))?;
    let wanted = models(model.or(resolved.file.model));
    let tables: Vec<_> = all_tables(&resolved.params)?.into_iter().filter(|t| wanted.contains(&t.model)).collect();
    let text = match out.format {
        Format::Table => {
            let blocks: Vec<String> = tables
                .iter()
                .map(|t| {
                    let rows: Vec<Vec<String>> =
                        t.rows.iter().map(|r| vec![dec5(r.value), dec5(r.lower), dec5(r.upper)]).collect();
                    format!("{}\n{}", t.title(), aligned(&t.column_names(), &rows))
                })
                .collect();
            blocks.join("\n")
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = tables
                .iter()
                .flat_map(|t| {
                    t.rows.iter().map(move |r| {
                        vec![
                            t.model.as_str().to_string(),
                            t.column_names()[0].to_string(),
                            dec5(r.value),
                            dec5(r.lower),
                            dec5(r.upper),
                        ]
                    })
                })
                .collect();
            csv_text(&["model", "param", "value", "k_lower", "k_upper"], &rows)?
        }
        Format::Json => {
            let tables: Vec<TableJson> = tables
                .iter()
                .map(|t| TableJson { model: t.model, param: t.column_names()[0], title: t.title(), rows: t.rows.clone() })
                .collect();
            json_text(&tables)
        }
    };
    emit(out, &text)?;
    Ok(Outcome::Success)
}

fn verify_model(
    v: &ValidatedParams,
    model: Model,
    lower: Option<f64>,
    upper: Option<f64>,
    grid: &LogGrid,
) -> Result<VerificationReport, CliError> {
    Ok(match model {
        Model::LongFlat => {
            let mut p = solve_policy(v)?;
            p.k1 = lower.unwrap_or(p.k1);
            p.k2 = upper.unwrap_or(p.k2);
            p.verify(grid)?
        }
        Model::LongFlatShort => {
            let mut p = solve_policy_three(v);
            p.k1_star = lower.unwrap_or(p.k1_star);
            p.k2_star = upper.unwrap_or(p.k2_star);
            p.verify(grid)?
        }
    })
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

#[allow(clippy::too_many_arguments)]
pub fn verify(
    params: &ParamArgs,
    data: &DataArgs,
    out: &OutputArgs,
    model: Option<ModelArg>,
    lower: Option<f64>,
    upper: Option<f64>,
    points: usize,
) -> Result<Outcome, CliError> {
    let resolved = config::resolve(params, data)?;
    let v = resolved.params.validate()?;
    let grid = LogGrid::new(1e-3, 1e3, points)?;
    let reports = models(model.or(resolved.file.model))
        .into_iter()
        .map(|m| verify_model(&v, m, lower, upper, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match out.format {
        Format::Table => {
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!(
                    "{}: {} (k_lower={} k_upper={}, {} points on [{}, {}])\n",
                    r.model,
                    verdict(r.passed),
                    dec5(r.thresholds[0]),
                    dec5(r.thresholds[1]),
                    grid.points,
                    grid.y_min,
                    grid.y_max
                ));
                let rows: Vec<Vec<String>> = r
                    .inequalities
                    .iter()
                    .map(|i| {
                        vec![verdict(i.passed).into(), format!("{:.3e}", i.worst_residual), format!("{:.5e}", i.worst_at), i.label.clone()]
                    })
                    .chain(r.smooth_fit.iter().map(|s| {
                        vec![
                            verdict(s.passed).into(),
                            format!("{:.3e}", s.value_gap.max(s.slope_gap)),
                            format!("{:.5e}", s.at),
                            format!("smooth fit of {} at {}", s.function, s.threshold),
                        ]
                    }))
                    .collect();
                text.push_str(&aligned(&["", "worst", "at y", "check"], &rows));
                text.push('\n');
            }
            text
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .flat_map(|r| {
                    let ineq = r.inequalities.iter().map(move |i| {
                        vec![r.model.clone(), i.label.clone(), format!("{:e}", i.worst_residual), format!("{:e}", i.worst_at), i.passed.to_string()]
                    });
                    let fit = r.smooth_fit.iter().map(move |s| {
                        vec![
                            r.model.clone(),
                            format!("smooth fit of {} at {}", s.function, s.threshold),
                            format!("{:e}", s.value_gap.max(s.slope_gap)),
                            format!("{:e}", s.at),
                            s.passed.to_string(),
                        ]
                    });
                    ineq.chain(fit)
                })
                .collect();
            csv_text(&["model", "check", "worst", "at", "passed"], &rows)?
        }
        Format::Json => json_text(&reports),
    };
    emit(out, &text)?;
    Ok(if reports.iter().all(|r| r.passed) { Outcome::Success } else { Outcome::Failed })
}

#[derive(Serialize)]
struct SimulationResult {
    model: Model,
    position: Position,
    estimate: McEstimate,
    closed_form: f64,
}

#[derive(Serialize)]
struct SimulationReport {
    params: MarketParams,
    config: PathConfig,
    results: Vec<SimulationResult>,
}

pub fn simulate(params: &ParamArgs, sim: &SimArgs, out: &OutputArgs, model: Option<ModelArg>) -> Result<Outcome, CliError> {
    let resolved = config::resolve_flags(params, None)?;
    let settings = config::sim_settings(sim, &resolved.file)?;
    let v = resolved.params.validate()?;
    let cfg = PathConfig {
        x1_0: settings.x1,
        x2_0: settings.x2,
        dt: settings.dt,
        t_max: settings.tmax,
        n_paths: settings.paths,
        seed: settings.seed,
    };
    cfg.validate()?;
    let position = settings.position;
    let chosen = model.or(resolved.file.model);
    let mut results = Vec::new();
    for m in models(chosen) {
        let (rule, closed_form) = match m {
            Model::LongFlat => {
                let p = solve_policy(&v)?;
                (ThresholdRule::from(&p), p.value(cfg.x1_0, cfg.x2_0, position))
            }
            Model::LongFlatShort => {
                let p = solve_policy_three(&v);
                (ThresholdRule::from(&p), p.value(cfg.x1_0, cfg.x2_0, position))
            }
        };
        // With no model named, a short start only makes sense for the
        // long/flat/short model.
        if chosen.is_none() && !rule.supports(position) {
            continue;
        }
        let closed_form = closed_form?;
        let estimate = mc_value(&v, &cfg, &rule, position)?;
        results.push(SimulationResult { model: m, position, estimate, closed_form });
    }
    let text = match out.format {
        Format::Table => {
            let mut text = format!(
                "paths={} dt={} tmax={} seed={} x1={} x2={} position={}\n",
                cfg.n_paths,
                cfg.dt,
                cfg.t_max,
                cfg.seed,
                dec5(cfg.x1_0),
                dec5(cfg.x2_0),
                position_name(position)
            );
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        r.model.as_str().to_string(),
                        dec5(r.estimate.mean),
                        dec5(r.estimate.stderr),
                        dec5(r.closed_form),
                        dec5(r.estimate.mean - r.closed_form),
                    ]
                })
                .collect();
            text.push_str(&aligned(&["model", "mc_mean", "stderr", "closed_form", "difference"], &rows));
            text
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        r.model.as_str().to_string(),
                        position_name(position).to_string(),
                        cfg.n_paths.to_string(),
                        cfg.dt.to_string(),
                        cfg.t_max.to_string(),
                        cfg.seed.to_string(),
                        dec5(r.estimate.mean),
                        dec5(r.estimate.stderr),
                        dec5(r.closed_form),
                    ]
                })
                .collect();
            csv_text(&["model", "position", "paths", "dt", "tmax", "seed", "mc_mean", "stderr", "closed_form"], &rows)?
        }
        Format::Json => json_text(&SimulationReport { params: resolved.params, config: cfg, results }),
    };
    emit(out, &text)?;
    Ok(Outcome::Success)
}

fn position_name(p: Position) -> &'static str {
    match p {
        Position::Long => "long",
        Position::Flat => "flat",
        Position::Short => "short",
    }
}

#[derive(Serialize)]
struct BacktestReport<'a> {
    params: MarketParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<&'a CalibrationResult>,
    rule: ThresholdRule,
    position: Position,
    observations: usize,
    ledger: &'a TradeLedger,
    total: f64,
}

/// Rule parameters come from flags or a config file when any are given,
/// otherwise from calibrating on the price file itself. With `--split` the
/// rule trades only the rows after the split.
pub fn backtest_cmd(
    params: &ParamArgs,
    data: &DataArgs,
    out: &OutputArgs,
    model: Option<ModelArg>,
    position: Option<&str>,
) -> Result<Outcome, CliError> {
    let series = config::read_series(data)?;
    let explicit = [params.mu1, params.mu2, params.s11, params.s12, params.s22].iter().any(Option::is_some)
        || config::config_path(params).is_some();
    let (market, calibration, file) = if explicit {
        let r = config::resolve_flags(params, None)?;
        (r.params, None, r.file)
    } else {
        let c = config::calibrate(&series, params, data)?;
        (c.params, Some(c), FileConfig::default())
    };
    let v = market.validate()?;
    let m: Model = model.or(file.model).unwrap_or(ModelArg::LongFlat).into();
    let rule = match m {
        Model::LongFlat => ThresholdRule::from(&solve_policy(&v)?),
        Model::LongFlatShort => ThresholdRule::from(&solve_policy_three(&v)),
    };
    let start = config::parse_position(position.or(file.position.as_deref()))?;
    let traded = match data.split {
        Some(f) => series.tail_fraction(f)?,
        None => series,
    };
    let ledger = backtest(&traded, &rule, start, market.rho, config::observation_dt(data))?;
    let text = match out.format {
        Format::Table => {
            let (l, u) = match m {
                Model::LongFlat => ("k1", "k2"),
                Model::LongFlatShort => ("k1*", "k2*"),
            };
            let mut text = format!(
                "model={} position={} rows={} {l}={} {u}={}\n",
                m.as_str(),
                position_name(start),
                traded.len(),
                dec5(rule.lower),
                dec5(rule.upper)
            );
            let rows: Vec<Vec<String>> = ledger
                .events
                .iter()
                .zip(event_dates(&traded, &ledger, config::observation_dt(data)))
                .map(|(e, date)| {
                    vec![date, dec5(e.time), e.action.to_string(), dec5(e.x1), dec5(e.x2), dec5(e.cash_flow)]
                })
                .collect();
            text.push_str(&aligned(&["date", "time", "action", "x1", "x2", "cash_flow"], &rows));
            text.push_str(&format!("total={}\n", dec5(ledger.total())));
            text
        }
        Format::Csv => ledger.to_csv_string(),
        Format::Json => json_text(&BacktestReport {
            params: market,
            calibration: calibration.as_ref(),
            rule,
            position: start,
            observations: traded.len(),
            ledger: &ledger,
            total: ledger.total(),
        }),
    };
    emit(out, &text)?;
    Ok(Outcome::Success)
}

/// Calendar date of each event's observation.
fn event_dates(series: &pairstop::PriceSeries, ledger: &TradeLedger, dt: f64) -> Vec<String> {
    ledger
        .events
        .iter()
        .map(|e| {
            let k = (e.time / dt).round() as usize;
            series.dates().get(k).map_or_else(String::new, |d| d.to_string())
        })
        .collect()
}
