use crate::config::{ExperimentConfig, Model, PositionSpec};
use crate::error::CliError;
use crate::output::{fmt_sig9, ResultRow};
use ilrep_core::amm::{average_sell_price, holdings_at_exit, impermanent_loss};
use ilrep_core::gbm::{self, GbmParams};
use ilrep_core::heston::{self, HestonParams, McConfig, PathSet, StrikeStrip};
use ilrep_core::il_payoff::{evaluate_legs, uil};
use ilrep_core::replication::{
    build_hedge_portfolio, replicate_expected_uil, replicated_payoff, HedgePortfolio, OptionQuote, StrikeGrid,
};
use ilrep_core::{Side, VanillaKind};
use std::io::{Read, Write};
use std::time::Instant;

fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| CliError::io("writing csv", e))
}

fn require_positions(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.positions.is_empty() {
        return Err(CliError::validation("no positions configured"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// il

#[derive(Debug, Clone, PartialEq)]
pub struct IlRow {
    pub position: PositionSpec,
    pub exit_price: f64,
    pub x: f64,
    pub y: f64,
    pub il: f64,
    pub uil: f64,
    /// The four-leg option portfolio, scaled by liquidity.
    pub legs_value: f64,
    /// The discrete strip on the configured grid, scaled by liquidity.
    pub strip_value: f64,
    pub avg_sell_price: f64,
}

pub fn run_il(cfg: &ExperimentConfig) -> Result<Vec<IlRow>, CliError> {
    require_positions(cfg)?;
    let mut rows = Vec::new();
    for spec in &cfg.positions {
        let pos = spec.position();
        let band = spec.interval();
        let legs = ilrep_core::il_payoff::decompose(spec.side, &band);
        for &p in &cfg.exits {
            let grid = if cfg.adaptive_split {
                StrikeGrid::uniform_split_at(&band, cfg.n_strikes, p)?
            } else {
                cfg.strike_grid(&band)
            };
            let h = holdings_at_exit(&pos, p);
            rows.push(IlRow {
                position: spec.clone(),
                exit_price: p,
                x: h.x,
                y: h.y,
                il: impermanent_loss(&pos, p),
                uil: uil(spec.side, &band, p),
                legs_value: spec.liquidity * evaluate_legs(&legs, p),
                strip_value: spec.liquidity * replicated_payoff(spec.side, &grid, p),
                avg_sell_price: average_sell_price(&band),
            });
        }
    }
    Ok(rows)
}

pub fn write_il<W: Write>(rows: &[IlRow], out: W) -> Result<(), CliError> {
    let header = [
        "position", "side", "lower", "upper", "liquidity", "entry", "exit_price", "x_exit", "y_exit", "il", "uil",
        "legs_value", "strip_value", "avg_sell_price",
    ];
    let recs: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let p = &r.position;
            let mut rec = vec![p.name.clone(), p.side.as_str().to_string()];
            rec.extend(
                [
                    p.lower, p.upper, p.liquidity, p.entry, r.exit_price, r.x, r.y, r.il, r.uil, r.legs_value,
                    r.strip_value, r.avg_sell_price,
                ]
                .map(fmt_sig9),
            );
            rec
        })
        .collect();
    write_csv(out, &header, &recs)
}

// ---------------------------------------------------------------------------
// table1

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub params: HestonParams,
}

/// One-at-a-time sweeps of κ, θ and ξ around the configured Heston base.
pub fn table1_scenarios(cfg: &ExperimentConfig) -> Result<Vec<Scenario>, CliError> {
    let Model::Heston(base) = cfg.model else {
        return Err(CliError::validation("table1 sweeps need model = heston"));
    };
    let mut out = Vec::new();
    for &kappa in &cfg.table1.kappa {
        out.push(Scenario { label: format!("kappa={kappa}"), params: HestonParams { kappa, ..base } });
    }
    for &theta in &cfg.table1.theta {
        out.push(Scenario { label: format!("theta={theta}"), params: HestonParams { theta, ..base } });
    }
    for &xi in &cfg.table1.xi {
        out.push(Scenario { label: format!("xi={xi}"), params: HestonParams { xi, ..base } });
    }
    if out.is_empty() {
        out.push(Scenario { label: "base".into(), params: base });
    }
    for s in &out {
        s.params.validate().map_err(|e| CliError::validation(format!("table1 {}: {e}", s.label)))?;
    }
    Ok(out)
}

/// Seed of the option-pricing path set when it is drawn independently of the
/// paths used for the direct estimate.
pub fn independent_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Simulated paths for a scenario: the direct-estimate set and the set
/// used to price options (the same one when paths are shared).
pub fn scenario_paths(cfg: &ExperimentConfig, scenario: &Scenario) -> Result<(PathSet, Option<PathSet>), CliError> {
    let direct = heston::simulate(&scenario.params, cfg.horizon, &cfg.mc)?;
    let options = if cfg.shared_paths {
        None
    } else {
        let mc = McConfig { seed: independent_seed(cfg.mc.seed), ..cfg.mc };
        Some(heston::simulate(&scenario.params, cfg.horizon, &mc)?)
    };
    Ok((direct, options))
}

/// Direct and replicated `E[UIL]` for every configured position.
pub fn scenario_rows(
    cfg: &ExperimentConfig,
    label: &str,
    direct: &PathSet,
    strip: &StrikeStrip,
    n_strikes: usize,
) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = Vec::new();
    for spec in &cfg.positions {
        let band = spec.interval();
        let est = heston::mc_expected_uil(direct, spec.side, &band)?;
        let kind = VanillaKind::hedging(spec.side);
        let grid = StrikeGrid::uniform(&band, n_strikes)?;
        let rep = replicate_expected_uil(spec.side, &band, |k| strip.price(kind, k), &grid)?;
        rows.push(ResultRow::new(label, &spec.name, spec.side, spec.lower, spec.upper, est.value, Some(est.std_error), rep));
    }
    Ok(rows)
}

fn gbm_rows(cfg: &ExperimentConfig, params: &GbmParams) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = Vec::new();
    for spec in &cfg.positions {
        let band = spec.interval();
        let direct = gbm::expected_uil_gbm(spec.side, &band, params);
        let grid = cfg.strike_grid(&band);
        let rep = match spec.side {
            Side::Right => replicate_expected_uil(spec.side, &band, |k| gbm::bs_call(params, k), &grid)?,
            Side::Left => replicate_expected_uil(spec.side, &band, |k| gbm::bs_put(params, k), &grid)?,
        };
        rows.push(ResultRow::new("gbm", &spec.name, spec.side, spec.lower, spec.upper, direct, None, rep));
    }
    Ok(rows)
}

/// Monte Carlo `E[UIL]` against its option-strip replication, per scenario
/// and position. Under GBM the direct value is the closed form.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    require_positions(cfg)?;
    if let Some(params) = cfg.gbm() {
        let start = Instant::now();
        let rows = gbm_rows(cfg, &params)?;
        let secs = start.elapsed().as_secs_f64();
        return Ok(rows.into_iter().map(|r| r.with_wall_time(secs)).collect());
    }
    let mut rows = Vec::new();
    for scenario in table1_scenarios(cfg)? {
        let start = Instant::now();
        let (direct, options) = scenario_paths(cfg, &scenario)?;
        let strip = StrikeStrip::new(options.as_ref().unwrap_or(&direct))?;
        let batch = scenario_rows(cfg, &scenario.label, &direct, &strip, cfg.n_strikes)?;
        let secs = start.elapsed().as_secs_f64();
        rows.extend(batch.into_iter().map(|r| r.with_wall_time(secs)));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// figure1

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Sigma,
    Horizon,
}

impl Sweep {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sweep::Sigma => "sigma",
            Sweep::Horizon => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure1Row {
    pub sweep: Sweep,
    pub sigma: f64,
    pub t: f64,
    pub right: f64,
    pub left: f64,
}

/// Closed-form `E[UIL]` of the first right and left positions over a grid
/// in volatility (at the base horizon) and in horizon (at the base σ).
pub fn run_figure1(cfg: &ExperimentConfig) -> Result<Vec<Figure1Row>, CliError> {
    let base = cfg.gbm().ok_or_else(|| CliError::validation("figure1 needs model = gbm"))?;
    let right = cfg.first_position(Side::Right).ok_or_else(|| CliError::validation("figure1 needs a right position"))?;
    let left = cfg.first_position(Side::Left).ok_or_else(|| CliError::validation("figure1 needs a left position"))?;
    let (rb, lb) = (right.interval(), left.interval());
    let g = &cfg.figure1;
    let n = g.points;

    let mut rows = Vec::with_capacity(2 * n);
    let eval = |params: GbmParams, sweep: Sweep| Figure1Row {
        sweep,
        sigma: params.sigma(),
        t: params.horizon(),
        right: gbm::expected_uil_gbm(Side::Right, &rb, &params),
        left: gbm::expected_uil_gbm(Side::Left, &lb, &params),
    };
    for i in 0..n {
        let sigma = g.sigma_min + (g.sigma_max - g.sigma_min) * i as f64 / (n - 1) as f64;
        rows.push(eval(base.with_sigma(sigma)?, Sweep::Sigma));
    }
    for i in 1..=n {
        let t = g.t_max * i as f64 / n as f64;
        rows.push(eval(base.with_horizon(t)?, Sweep::Horizon));
    }
    Ok(rows)
}

pub fn write_figure1<W: Write>(rows: &[Figure1Row], out: W) -> Result<(), CliError> {
    let recs: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut rec = vec![r.sweep.as_str().to_string()];
            rec.extend([r.sigma, r.t, r.right, r.left].map(fmt_sig9));
            rec
        })
        .collect();
    write_csv(out, &["sweep", "sigma", "t", "e_uil_right", "e_uil_left"], &recs)
}

// ---------------------------------------------------------------------------
// hedge

/// Reads an option chain with header `kind,strike,maturity_years,price`.
pub fn read_chain<R: Read>(input: R, source: &str) -> Result<Vec<OptionQuote>, CliError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != ["kind", "strike", "maturity_years", "price"] {
        return Err(CliError::validation(format!(
            "{source}: expected header kind,strike,maturity_years,price, got {}",
            header.join(",")
        )));
    }
    let mut quotes = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::validation(format!("{source}:{line}: {e}")))?;
        let field = |col: usize, name: &str| -> Result<f64, CliError> {
            rec[col]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::validation(format!("{source}:{line}: bad {name} `{}`", &rec[col])))
        };
        let kind: VanillaKind =
            rec[0].parse().map_err(|e: ilrep_core::Error| CliError::validation(format!("{source}:{line}: {e}")))?;
        quotes.push(OptionQuote {
            kind,
            strike: field(1, "strike")?,
            maturity: field(2, "maturity_years")?,
            price: field(3, "price")?,
        });
    }
    if quotes.is_empty() {
        return Err(CliError::NoData(format!("{source}: option chain is empty")));
    }
    Ok(quotes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeResult {
    pub position: PositionSpec,
    /// Per unit of liquidity.
    pub portfolio: HedgePortfolio,
    /// `E[UIL]` per unit of liquidity under the configured model.
    pub expected_uil: f64,
    pub expected_uil_std_error: Option<f64>,
}

impl HedgeResult {
    pub fn cost(&self) -> f64 {
        self.position.liquidity * self.portfolio.cost()
    }

    pub fn expected_loss(&self) -> f64 {
        -self.position.liquidity * self.expected_uil
    }
}

/// Builds a chain hedge for each position and compares its cost with the
/// model's expected loss.
pub fn run_hedge(cfg: &ExperimentConfig, chain: &[OptionQuote]) -> Result<Vec<HedgeResult>, CliError> {
    require_positions(cfg)?;
    let heston_paths = match cfg.model {
        Model::Heston(p) => Some(heston::simulate(&p, cfg.horizon, &cfg.mc)?),
        Model::Gbm { .. } => None,
    };
    let mut out = Vec::new();
    for spec in &cfg.positions {
        let band = spec.interval();
        let portfolio = build_hedge_portfolio(spec.side, &band, chain, cfg.horizon, cfg.maturity_tolerance)?;
        let (expected_uil, se) = match (&heston_paths, cfg.gbm()) {
            (Some(paths), _) => {
                let est = heston::mc_expected_uil(paths, spec.side, &band)?;
                (est.value, Some(est.std_error))
            }
            (None, Some(params)) => (gbm::expected_uil_gbm(spec.side, &band, &params), None),
            (None, None) => unreachable!("model is gbm or heston"),
        };
        out.push(HedgeResult { position: spec.clone(), portfolio, expected_uil, expected_uil_std_error: se });
    }
    Ok(out)
}

pub fn write_hedge_legs<W: Write>(results: &[HedgeResult], out: W) -> Result<(), CliError> {
    let mut recs = Vec::new();
    for r in results {
        let l = r.position.liquidity;
        for leg in &r.portfolio.legs {
            let q = leg.quote;
            let mut rec = vec![r.position.name.clone(), r.position.side.as_str().into(), q.kind.as_str().into()];
            rec.extend([q.strike, q.maturity, q.price, l * leg.quantity, l * leg.cost()].map(fmt_sig9));
            recs.push(rec);
        }
    }
    write_csv(out, &["position", "side", "kind", "strike", "maturity_years", "price", "quantity", "cost"], &recs)
}

pub fn write_hedge_summary<W: Write>(results: &[HedgeResult], out: W) -> Result<(), CliError> {
    let recs: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let l = r.position.liquidity;
            let mut rec = vec![r.position.name.clone(), r.position.side.as_str().into(), r.portfolio.legs.len().to_string()];
            rec.extend([r.cost(), r.expected_loss(), r.cost() - r.expected_loss(), l * r.portfolio.residual_bound].map(fmt_sig9));
            rec.push(r.expected_uil_std_error.map(|s| fmt_sig9(l * s)).unwrap_or_default());
            rec
        })
        .collect();
    write_csv(
        out,
        &["position", "side", "legs", "hedge_cost", "expected_loss", "cost_minus_loss", "residual_bound", "loss_std_error"],
        &recs,
    )
}
