use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use lobflow_core::convergence::{
    convergence_study, covering_path, tmda_check, uniform_grid, SimulatorRows, StudyConfig,
};
use lobflow_core::csvfmt::num;
use lobflow_core::limit_ode::solve_full;
use lobflow_core::limit_pde::{
    solve_characteristics, solve_constant_price, stationary, to_wall_time, InitialData, PdeCoefficients,
    SideCoefficients,
};
use lobflow_core::liquidation::{optimize, ShapeFunction, ShapeProfile, SpreadPath};
use lobflow_core::microsim;
use lobflow_core::{make_scaling, Error, Side};

use crate::config::{RunConfig, ShapeSource, SpreadSource};

/// Price path steps per unit of wall time.
const PRICE_STEPS_PER_UNIT: f64 = 1024.0;

/// Points of the shape CSV grid.
const SHAPE_POINTS: usize = 201;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

/// Exit status for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) | Some(Error::Hypothesis(_)) => 2,
        _ => 1,
    }
}

/// Caps the global worker pool at `LOBFLOW_THREADS` when it is set.
pub fn init_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("LOBFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| Error::Config(format!("LOBFLOW_THREADS: expected a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn create(out: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = out.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn finish(mut w: BufWriter<File>) -> anyhow::Result<()> {
    w.flush()?;
    Ok(())
}

pub fn simulate(config: &RunConfig, out: &Path) -> anyhow::Result<Outcome> {
    let run = &config.run;
    let params = make_scaling(run.n, config.scaling.alpha)?;
    let grid = uniform_grid(run.horizon, run.grid_points);
    let traj = microsim::run(&config.model, &params, run.horizon, &grid, run.seed).context("simulation")?;

    let mut w = create(out, "trajectory.csv")?;
    traj.write_prices(&mut w)?;
    finish(w)?;
    let mut w = create(out, "densities.csv")?;
    traj.write_densities(&mut w)?;
    finish(w)?;

    println!(
        "n = {}, seed = {}, horizon = {}: {} events, {} output times",
        run.n,
        run.seed,
        run.horizon,
        traj.event_count,
        traj.times.len()
    );
    Ok(Outcome::Pass)
}

fn spatial_range(side: &SideCoefficients, init: Option<(f64, f64)>, reach: f64) -> (f64, f64) {
    let (mut lo, mut hi) = side.window;
    if let Some((a, b)) = init {
        lo = lo.min(a);
        hi = hi.max(b);
    }
    (lo - reach, hi + reach)
}

pub fn limit(config: &RunConfig, out: &Path) -> anyhow::Result<Outcome> {
    let spec = &config.model;
    let run = &config.run;
    let gamma0 = [spec.bid0, spec.ask0];
    let wall_grid = uniform_grid(run.horizon, run.grid_points);

    let steps = (run.horizon * PRICE_STEPS_PER_UNIT).ceil().max(1.0);
    let prices = solve_full(spec, gamma0, run.horizon, run.horizon.max(1e-9) / steps).context("price ODE")?;
    let mut w = create(out, "price_path.csv")?;
    prices.write_csv(&mut w)?;
    finish(w)?;

    let (path, tc) = covering_path(spec, run.horizon).context("price ODE")?;
    let coeffs = PdeCoefficients::from_model(spec, &path);
    let init = InitialData::from_model(spec)?;
    let params = make_scaling(run.n, config.scaling.alpha)?;
    let state_times = wall_grid.iter().map(|t| tc.mu(*t)).collect::<Result<Vec<_>, _>>()?;
    let span = state_times.last().copied().unwrap_or(0.0);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for side in [Side::Buy, Side::Sell] {
        let c = coeffs.side(side);
        let reach = path
            .times
            .iter()
            .filter(|t| **t <= span)
            .map(|t| c.advection(*t).abs())
            .fold(0.0, f64::max)
            * span;
        let (a, b) = spatial_range(c, init.side(side).support, reach);
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let dx = params.dx;
    let first = (lo / dx).floor() as i64;
    let last = (hi / dx).ceil() as i64;
    let x_grid: Vec<f64> = (first..=last).map(|k| k as f64 * dx).collect();

    let state = match solve_constant_price(&coeffs, &init, &x_grid, &state_times) {
        Ok(sol) => sol,
        Err(Error::Model(_)) => solve_characteristics(&coeffs, &init, &x_grid, &state_times).context("volume PDE")?,
        Err(e) => return Err(e).context("volume PDE"),
    };
    let wall = to_wall_time(&state, &tc, &wall_grid).context("time change")?;
    let mut w = create(out, "pde_state.csv")?;
    state.write_csv(&mut w)?;
    finish(w)?;
    let mut w = create(out, "pde_wall.csv")?;
    wall.write_csv(&mut w)?;
    finish(w)?;

    let frozen = PdeCoefficients::at_quotes(spec, gamma0);
    let mut w = create(out, "stationary.csv")?;
    writeln!(w, "x,side,value")?;
    for side in [Side::Buy, Side::Sell] {
        match stationary(frozen.side(side), &x_grid) {
            Ok(values) => {
                for (x, v) in x_grid.iter().zip(values) {
                    writeln!(w, "{},{},{}", num(*x), side.label(), num(v))?;
                }
            }
            Err(err @ Error::UndefinedStationary(_)) => {
                eprintln!("warning: {} side skipped in stationary.csv: {err}", side.label());
            }
            Err(e) => return Err(e).context("stationary solution"),
        }
    }
    finish(w)?;

    let [bid, ask] = prices.at(run.horizon);
    println!(
        "horizon {}: bid {:.6}, ask {:.6}; state time {:.6}; {} grid points of width {:.6}",
        run.horizon,
        bid,
        ask,
        span,
        x_grid.len(),
        dx
    );
    Ok(Outcome::Pass)
}

pub fn converge(config: &RunConfig, out: &Path) -> anyhow::Result<Outcome> {
    let run = &config.run;
    let study = StudyConfig {
        ladder: config.scaling.ladder.clone(),
        reps: run.reps,
        horizon: run.horizon,
        alpha: config.scaling.alpha,
        grid_points: run.grid_points,
        seed: run.seed,
    };
    let report = convergence_study(&config.model, &study).context("convergence study")?;
    let mut w = create(out, "convergence.csv")?;
    report.write_csv(&mut w)?;
    finish(w)?;

    let rows = SimulatorRows {
        spec: config.model.clone(),
        alpha: config.scaling.alpha,
        horizon: run.horizon,
    };
    let tmda = tmda_check(
        &rows,
        &config.scaling.ladder,
        run.tmda.eps,
        rows.beta(),
        run.tmda.reps,
        run.seed,
    )
    .context("martingale-difference check")?;
    let mut w = create(out, "tmda.csv")?;
    tmda.write_csv(&mut w)?;
    finish(w)?;

    print!("{report}");
    print!("{tmda}");
    let mut outcome = Outcome::Pass;
    if let Some(row) = report.first_violation(run.slack) {
        println!(
            "FAIL convergence: median error {} at n = {} exceeds the previous rung by more than {}",
            num(row.p50),
            row.n,
            run.slack
        );
        outcome = Outcome::Fail;
    }
    if !tmda.nonincreasing_within_ci() {
        let bad = tmda.rows.windows(2).find(|w| w[1].estimate > w[0].ci_hi).map(|w| &w[1]);
        match bad {
            Some(row) => println!(
                "FAIL tmda: exceedance {} at n = {} exceeds the upper confidence bound of the previous rung",
                num(row.estimate),
                row.n
            ),
            None => println!("FAIL tmda: exceedance estimates increase"),
        }
        outcome = Outcome::Fail;
    }
    if outcome == Outcome::Pass {
        println!("PASS");
    }
    Ok(outcome)
}

fn profile_extent(profile: &ShapeProfile, total: f64) -> f64 {
    match profile {
        ShapeProfile::Tabulated { x, .. } => x.last().copied().unwrap_or(1.0),
        other => match other.impact_inverse(total) {
            Ok(d) if d > 0.0 && d.is_finite() => 1.5 * d,
            _ => 1.0,
        },
    }
}

pub fn liquidate(config: &RunConfig, out: &Path) -> anyhow::Result<Outcome> {
    let section = config
        .liquidation
        .as_ref()
        .ok_or_else(|| Error::Config("liquidation: section is required by this command".into()))?;
    let spec = &config.model;
    let shape = match &section.shape {
        ShapeSource::Parametric { times, profiles } => ShapeFunction::piecewise(times.clone(), profiles.clone())?,
        ShapeSource::Stationary { side, points } => ShapeFunction::constant(ShapeProfile::stationary(
            spec,
            [spec.bid0, spec.ask0],
            (*side).into(),
            *points,
        )?),
    };
    let spread = match &section.spread {
        SpreadSource::Constant { value } => SpreadPath::Constant { value: *value },
        SpreadSource::Limit => {
            let horizon = section.times.last().copied().unwrap_or(0.0).max(config.run.horizon);
            let steps = (horizon * PRICE_STEPS_PER_UNIT).ceil().max(1.0);
            let prices =
                solve_full(spec, [spec.bid0, spec.ask0], horizon, horizon.max(1e-9) / steps).context("price ODE")?;
            SpreadPath::from_prices(&prices)
        }
    };

    let schedule = match optimize(&shape, &spread, &section.times, section.total, section.method) {
        Ok(s) => s,
        Err(e @ (Error::Infeasible(_) | Error::DepthExceeded { .. } | Error::Divergence(_))) => {
            println!("FAIL liquidation: {e}");
            return Ok(Outcome::Fail);
        }
        Err(e) => return Err(e).context("liquidation"),
    };
    let mut w = create(out, "schedule.csv")?;
    schedule.write_csv(&mut w)?;
    finish(w)?;

    let mut w = create(out, "shape.csv")?;
    writeln!(w, "t,x,f")?;
    for (t, profile) in shape.times.iter().zip(&shape.profiles) {
        let extent = profile_extent(profile, section.total);
        for i in 0..SHAPE_POINTS {
            let x = extent * i as f64 / (SHAPE_POINTS - 1) as f64;
            writeln!(w, "{},{},{}", num(*t), num(x), num(profile.density(x)))?;
        }
    }
    finish(w)?;

    for (t, e) in schedule.times.iter().zip(&schedule.sizes) {
        println!("t = {t:<10} E = {e}");
    }
    println!("total cost {}", schedule.objective);
    Ok(Outcome::Pass)
}
