//! Expected shortfall and its long-only minimization.

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};
use serde::Serialize;

use super::select::StockSelection;
use super::window_scenarios;
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::returns::Window;

/// Number of worst outcomes averaged over, `ceil(tail * n)`. Products within
/// 1e-9 of an integer are taken as that integer so that e.g. `0.05 * 300`
/// averages 15 outcomes, not 16.
fn tail_count(tail: f64, n: usize) -> usize {
    let x = tail * n as f64;
    let k = if (x - x.round()).abs() < 1e-9 { x.round() } else { x.ceil() };
    (k as usize).clamp(1, n)
}

fn check_tail(tail: f64) -> Result<()> {
    if !(tail > 0.0 && tail <= 1.0) {
        return Err(Error::Usage(format!("tail fraction must lie in (0, 1], got {tail}")));
    }
    Ok(())
}

/// Empirical expected shortfall of the profit sample `profits`:
///
/// ```text
/// ES = -(1/tail) (E[X 1{X <= x}] - x (P[X <= x] - tail))
/// ```
///
/// where `x` is the `ceil(tail n)`-th smallest profit. The correction term
/// gives the boundary outcome the fractional weight needed for exactly
/// `tail` probability mass.
pub fn expected_shortfall(profits: &[f64], tail: f64) -> Result<f64> {
    check_tail(tail)?;
    if profits.is_empty() {
        return Err(Error::Usage("expected shortfall of an empty sample".into()));
    }
    if profits.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite profit".into()));
    }
    let n = profits.len();
    let mut sorted = profits.to_vec();
    sorted.sort_by(f64::total_cmp);
    let x = sorted[tail_count(tail, n) - 1];
    // Rearranged as outcomes strictly below x at full weight plus x at the
    // remaining weight, so a constant sample returns exactly -x.
    let below = sorted.partition_point(|&p| p < x);
    let mass = n as f64 * tail;
    let tail_sum: f64 = sorted[..below].iter().sum();
    Ok(-(tail_sum / mass + x * ((mass - below as f64) / mass)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsResult {
    /// Confidence level `1 - tail`.
    pub alpha: f64,
    pub tail: f64,
    /// Expected shortfall of the returned weights, recomputed with [`expected_shortfall`].
    pub es: f64,
    /// Long-only weights summing to one.
    pub weights: Vec<f64>,
    /// Optimal value reported by the linear program.
    pub lp_objective: f64,
}

/// Long-only, fully invested weights minimizing the expected shortfall of
/// per-period portfolio returns inside `window`.
pub fn minimize_es(returns: &ReturnPanel, window: Window, sel: &StockSelection, tail: f64) -> Result<EsResult> {
    if window.len() < 2 || sel.is_empty() {
        return Err(Error::Size(format!(
            "expected shortfall needs at least 2 periods and 1 asset, got {} and {}",
            window.len(),
            sel.len()
        )));
    }
    minimize_es_scenarios(&window_scenarios(returns, window, &sel.nodes)?, tail)
}

/// Minimizes the expected shortfall over scenario rows `scenarios[s][i]`.
///
/// Linear program over weights `w >= 0`, threshold `z` and slacks `u >= 0`:
/// minimize `z + sum u / (tail n)` subject to `u_s + z + r_s' w >= 0` and
/// `sum w = 1`. Its optimum is the empirical expected shortfall.
pub fn minimize_es_scenarios(scenarios: &[Vec<f64>], tail: f64) -> Result<EsResult> {
    check_tail(tail)?;
    let n = scenarios.len();
    let m = scenarios.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Err(Error::Size("expected shortfall needs at least one scenario and one asset".into()));
    }
    if scenarios.iter().any(|r| r.len() != m) {
        return Err(Error::Usage("ragged scenario rows".into()));
    }
    if scenarios.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite scenario return".into()));
    }

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = (0..m).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let z = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let slack_cost = 1.0 / (tail * n as f64);
    let u: Vec<_> = (0..n).map(|_| lp.add_var(slack_cost, (0.0, f64::INFINITY))).collect();
    let mut budget = LinearExpr::empty();
    for &v in &w {
        budget.add(v, 1.0);
    }
    lp.add_constraint(budget, ComparisonOp::Eq, 1.0);
    for (s, row) in scenarios.iter().enumerate() {
        let mut e = LinearExpr::empty();
        e.add(u[s], 1.0);
        e.add(z, 1.0);
        for (&v, &r) in w.iter().zip(row) {
            e.add(v, r);
        }
        lp.add_constraint(e, ComparisonOp::Ge, 0.0);
    }

    let solution = match lp.solve() {
        Ok(SolveOutcome::Solution(s)) => s,
        Ok(_) => return Err(Error::Numerical("expected-shortfall program stopped before optimality".into())),
        Err(e) => return Err(Error::Numerical(format!("expected-shortfall program failed: {e}"))),
    };
    let mut weights: Vec<f64> = w.iter().map(|&v| solution.var_value(v).max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numerical(format!("solver returned weights summing to {total}")));
    }
    for x in &mut weights {
        *x /= total;
    }
    let profits: Vec<f64> = scenarios.iter().map(|r| r.iter().zip(&weights).map(|(a, b)| a * b).sum()).collect();
    Ok(EsResult {
        alpha: 1.0 - tail,
        tail,
        es: expected_shortfall(&profits, tail)?,
        weights,
        lp_objective: solution.objective(),
    })
}
