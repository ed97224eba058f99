//! The local partial order on entropy-production measures, chain suprema,
//! and maximal selection.
//!
//! Two cell measures compare Greater/Less/Equal/Incomparable cellwise under
//! a tolerance. Finite chains have cellwise suprema (their join); among a
//! finite candidate family the maximal elements are those not strictly
//! dominated.

use crate::measures::{CellMeasure, MeasureError, SpaceTimeGrid, YoungMeasureField};

/// Outcome of a cellwise comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderResult {
    Greater,
    Less,
    Equal,
    Incomparable,
}

impl std::fmt::Display for OrderResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OrderResult::Greater => "GREATER",
            OrderResult::Less => "LESS",
            OrderResult::Equal => "EQUAL",
            OrderResult::Incomparable => "INCOMPARABLE",
        };
        f.write_str(s)
    }
}

/// Default comparison tolerance: `1e-10` times the larger total mass, so
/// scheme-level noise does not produce spurious incomparability verdicts.
pub fn default_compare_tolerance(a: &CellMeasure, b: &CellMeasure) -> f64 {
    1e-10 * a.total_mass().max(b.total_mass())
}

/// Cellwise comparison under tolerance `tol`:
/// `Equal` when `|a - b| <= tol` everywhere; `Greater` when `a >= b - tol`
/// everywhere with an excess beyond `tol` somewhere; `Less` symmetrically;
/// `Incomparable` otherwise.
pub fn compare(a: &CellMeasure, b: &CellMeasure, tol: f64) -> Result<OrderResult, MeasureError> {
    if !a.grid().compatible(b.grid()) {
        return Err(MeasureError::GridMismatch);
    }
    assert!(tol >= 0.0);
    let mut some_above = false;
    let mut some_below = false;
    for (&va, &vb) in a.values().iter().zip(b.values().iter()) {
        let d = va - vb;
        if d > tol {
            some_above = true;
        } else if d < -tol {
            some_below = true;
        }
        if some_above && some_below {
            return Ok(OrderResult::Incomparable);
        }
    }
    Ok(match (some_above, some_below) {
        (false, false) => OrderResult::Equal,
        (true, false) => OrderResult::Greater,
        (false, true) => OrderResult::Less,
        (true, true) => unreachable!(),
    })
}

/// Extremal cells of a comparison: the cell of largest positive excess and
/// the cell of largest negative excess (present when the respective side has
/// any excess beyond the tolerance).
pub fn extremal_cells(
    a: &CellMeasure,
    b: &CellMeasure,
    tol: f64,
) -> (Option<(usize, usize, f64)>, Option<(usize, usize, f64)>) {
    let grid = a.grid();
    let mut hi: Option<(usize, usize, f64)> = None;
    let mut lo: Option<(usize, usize, f64)> = None;
    for (i, (&va, &vb)) in a.values().iter().zip(b.values().iter()).enumerate() {
        let d = va - vb;
        let cell = (i / grid.n_x, i % grid.n_x);
        if d > tol && hi.map_or(true, |(_, _, best)| d > best) {
            hi = Some((cell.0, cell.1, d));
        }
        if d < -tol && lo.map_or(true, |(_, _, best)| d < best) {
            lo = Some((cell.0, cell.1, d));
        }
    }
    (hi, lo)
}

/// Cellwise supremum of a finite chain. Errors when some pair is
/// incomparable under `tol`.
pub fn sup_chain(chain: &[CellMeasure], tol: f64) -> Result<CellMeasure, MeasureError> {
    if chain.is_empty() {
        return Err(MeasureError::Empty);
    }
    for i in 0..chain.len() {
        for j in (i + 1)..chain.len() {
            if compare(&chain[i], &chain[j], tol)? == OrderResult::Incomparable {
                return Err(MeasureError::NotAChain(i, j));
            }
        }
    }
    let grid = *chain[0].grid();
    let mut values = chain[0].values().to_vec();
    for measure in &chain[1..] {
        for (v, &w) in values.iter_mut().zip(measure.values().iter()) {
            if w > *v {
                *v = w;
            }
        }
    }
    CellMeasure::new(grid, values)
}

/// A nonnegative observable on space-time cells, paired against cell
/// measures by weighted summation.
#[derive(Clone, Debug)]
pub struct CellObservable {
    grid: SpaceTimeGrid,
    weights: Vec<f64>,
}

impl CellObservable {
    pub fn new(grid: SpaceTimeGrid, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), grid.cells());
        assert!(weights.iter().all(|&w| w >= 0.0), "cell observables are nonnegative");
        CellObservable { grid, weights }
    }

    pub fn indicator(grid: SpaceTimeGrid, t: usize, x: usize) -> Self {
        let mut weights = vec![0.0; grid.cells()];
        weights[grid.index(t, x)] = 1.0;
        CellObservable { grid, weights }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn pair(&self, values: &[f64]) -> f64 {
        assert_eq!(self.weights.len(), values.len(), "observable grid mismatch");
        self.weights.iter().zip(values.iter()).map(|(w, v)| w * v).sum()
    }
}

/// The first `count` per-cell indicators in row-major order. With
/// `count = n_t * n_x` the family separates cell measures; smaller counts
/// span the leading cells only.
pub fn test_basis(grid: SpaceTimeGrid, count: usize) -> Result<Vec<CellObservable>, MeasureError> {
    if count > grid.cells() {
        return Err(MeasureError::BasisTooLarge(count, grid.cells()));
    }
    Ok((0..count)
        .map(|i| CellObservable::indicator(grid, i / grid.n_x, i % grid.n_x))
        .collect())
}

/// Verify that every candidate pair shares initial data: expectations of
/// density, momentum components, and energy agree per `t = 0` cell within
/// `tol`.
fn check_shared_initial_data<const N: usize>(
    candidates: &[(YoungMeasureField<N>, CellMeasure)],
    tol: f64,
) -> Result<(), MeasureError> {
    if candidates.len() < 2 {
        return Ok(());
    }
    let first = &candidates[0].0;
    let n_x = first.grid().n_x;
    for (j, (field, _)) in candidates.iter().enumerate().skip(1) {
        if !field.grid().compatible(first.grid()) {
            return Err(MeasureError::GridMismatch);
        }
        for x in 0..n_x {
            let a_rho = first.expect(0, x, |s| s.rho);
            let b_rho = field.expect(0, x, |s| s.rho);
            if (a_rho - b_rho).abs() > tol {
                return Err(MeasureError::InitialDataMismatch(0, j, x, "rho"));
            }
            for k in 0..N {
                let a_m = first.expect(0, x, |s| s.momentum[k]);
                let b_m = field.expect(0, x, |s| s.momentum[k]);
                if (a_m - b_m).abs() > tol {
                    return Err(MeasureError::InitialDataMismatch(0, j, x, "momentum"));
                }
            }
            let a_e = first.expect(0, x, |s| s.total_energy);
            let b_e = field.expect(0, x, |s| s.total_energy);
            if (a_e - b_e).abs() > tol {
                return Err(MeasureError::InitialDataMismatch(0, j, x, "energy"));
            }
        }
    }
    Ok(())
}

/// Indices of candidates whose production measure is not strictly dominated
/// by any other candidate's. Nonempty for nonempty input.
pub fn select_maximal<const N: usize>(
    candidates: &[(YoungMeasureField<N>, CellMeasure)],
    tol: f64,
) -> Result<Vec<usize>, MeasureError> {
    if candidates.is_empty() {
        return Err(MeasureError::Empty);
    }
    check_shared_initial_data(candidates, tol)?;
    let n = candidates.len();
    let mut kept = Vec::new();
    for i in 0..n {
        let dominated = (0..n).any(|j| {
            j != i
                && matches!(
                    compare(&candidates[j].1, &candidates[i].1, tol),
                    Ok(OrderResult::Greater)
                )
        });
        if !dominated {
            kept.push(i);
        }
    }
    if kept.is_empty() {
        // Tolerance-scale domination cycles cannot occur at tol = 0 and are
        // pathological otherwise; fall back to the largest total mass so the
        // selection stays nonempty.
        let best = (0..n)
            .max_by(|&i, &j| {
                candidates[i]
                    .1
                    .total_mass()
                    .partial_cmp(&candidates[j].1.total_mass())
                    .unwrap()
            })
            .unwrap();
        kept.push(best);
    }
    Ok(kept)
}
