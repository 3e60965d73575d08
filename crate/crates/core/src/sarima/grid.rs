use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_aligned, OptimizerConfig, SarimaModel};
use super::{SarimaError, SarimaOrder};

/// Candidate values for each order component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p: Vec<usize>,
    pub d: Vec<usize>,
    pub q: Vec<usize>,
    pub seasonal_p: Vec<usize>,
    pub seasonal_d: Vec<usize>,
    pub seasonal_q: Vec<usize>,
    pub periods: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            p: vec![0, 1, 2],
            d: vec![0, 1],
            q: vec![0, 1, 2],
            seasonal_p: vec![0, 1, 2],
            seasonal_d: vec![0, 1],
            seasonal_q: vec![0, 1, 2],
            periods: vec![12],
        }
    }
}

impl GridSpec {
    pub fn singleton(order: &SarimaOrder) -> Self {
        Self {
            p: vec![order.p],
            d: vec![order.d],
            q: vec![order.q],
            seasonal_p: vec![order.seasonal_p],
            seasonal_d: vec![order.seasonal_d],
            seasonal_q: vec![order.seasonal_q],
            periods: vec![order.period.max(2)],
        }
    }

    /// Pin both differencing orders, as when a transform record already
    /// fixed them.
    pub fn with_differencing(mut self, d: usize, seasonal_d: usize) -> Self {
        self.d = vec![d];
        self.seasonal_d = vec![seasonal_d];
        self
    }

    pub fn with_periods(mut self, periods: Vec<usize>) -> Self {
        self.periods = periods;
        self
    }

    /// Distinct valid orders in enumeration order, plus the invalid ones
    /// with their reason.
    pub fn orders(&self) -> (Vec<SarimaOrder>, Vec<(String, String)>) {
        let mut valid: Vec<SarimaOrder> = Vec::new();
        let mut invalid = Vec::new();
        for &s in &self.periods {
            for &p in &self.p {
                for &d in &self.d {
                    for &q in &self.q {
                        for &sp in &self.seasonal_p {
                            for &sd in &self.seasonal_d {
                                for &sq in &self.seasonal_q {
                                    match SarimaOrder::new((p, d, q), (sp, sd, sq, s)) {
                                        Ok(o) if !valid.contains(&o) => valid.push(o),
                                        Ok(_) => {}
                                        Err(e) => invalid.push((
                                            format!("({p},{d},{q})({sp},{sd},{sq})_{s}"),
                                            e.to_string(),
                                        )),
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        (valid, invalid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub order: SarimaOrder,
    pub aic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub best: SarimaModel,
    /// Converged fits by ascending AIC; ties keep enumeration order.
    pub leaderboard: Vec<LeaderboardEntry>,
    /// Converged models in leaderboard order.
    pub models: Vec<SarimaModel>,
    /// Orders that were infeasible, failed or did not converge.
    pub failures: Vec<(String, String)>,
}

/// Fit every order of `grid` to `series` and rank them by AIC.
///
/// All fits share one likelihood sample: the one left by the most
/// differenced feasible order. AICs are therefore comparable across
/// differencing orders. Fits run on the current rayon pool.
pub fn grid_search(
    series: &[f64],
    grid: &GridSpec,
    config: &OptimizerConfig,
) -> Result<GridOutcome, SarimaError> {
    if grid.periods.is_empty() {
        return Err(SarimaError::EmptyGrid);
    }
    let (orders, mut failures) = grid.orders();
    if orders.is_empty() {
        return Err(SarimaError::EmptyGrid);
    }
    let n = series.len();
    let (feasible, infeasible): (Vec<SarimaOrder>, Vec<SarimaOrder>) =
        orders.into_iter().partition(|o| o.min_length() <= n);
    for o in infeasible {
        failures.push((
            o.to_string(),
            format!("needs {} values, series has {n}", o.min_length()),
        ));
    }
    let common_start = feasible
        .iter()
        .map(SarimaOrder::differencing_loss)
        .max()
        .unwrap_or(0);

    let results: Vec<(SarimaOrder, Result<SarimaModel, SarimaError>)> = feasible
        .par_iter()
        .map(|o| {
            let skip = common_start - o.differencing_loss();
            (*o, fit_aligned(series, o, config, skip))
        })
        .collect();

    let mut models = Vec::new();
    for (order, res) in results {
        match res {
            Ok(m) if m.converged && m.aic.is_finite() => models.push(m),
            Ok(_) => failures.push((order.to_string(), "did not converge".into())),
            Err(e) => failures.push((order.to_string(), e.to_string())),
        }
    }
    if models.is_empty() {
        return Err(SarimaError::NoConvergence(failures));
    }
    // stable sort keeps enumeration order among equal AICs
    models.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    let leaderboard = models
        .iter()
        .map(|m| LeaderboardEntry {
            order: m.order,
            aic: m.aic,
        })
        .collect();
    Ok(GridOutcome {
        best: models[0].clone(),
        leaderboard,
        models,
        failures,
    })
}
