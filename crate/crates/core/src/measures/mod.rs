//! Atomic Young measures on the phase space and entropy-production cell
//! measures on the space-time grid.
//!
//! Measures are discretized as cellwise masses on a periodic space-time
//! grid: a Young measure field carries, per cell, a finite list of weighted
//! phase-space atoms; a cell measure carries one nonnegative value per cell.
//! Per-cell indicators separate these objects, so no finer representation is
//! needed at this scale.

pub mod defect;
pub mod order;

use thiserror::Error;

use crate::state::ConsState;
use crate::thermo::GasModel;

pub use defect::{concentration_defect_check, ConcentratingSequence, DefectReport};
pub use order::{
    compare, default_compare_tolerance, extremal_cells, select_maximal, sup_chain, test_basis,
    CellObservable, OrderResult,
};

/// Weight tolerance: per-cell atom weights must sum to one within this.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Atoms closer than this (max-norm over components) coalesce when measures
/// are combined.
pub const ATOM_MERGE_DISTANCE: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("space-time grids do not match")]
    GridMismatch,
    #[error("cell index ({0}, {1}) out of range")]
    CellOutOfRange(usize, usize),
    #[error("atom weights in cell ({0}, {1}) sum to {2}, not 1")]
    WeightSum(usize, usize, f64),
    #[error("nonpositive atom weight in cell ({0}, {1})")]
    NonPositiveWeight(usize, usize),
    #[error("atom state outside the phase space in cell ({0}, {1})")]
    StateOutsidePhaseSpace(usize, usize),
    #[error("negative cell-measure entry {2} in cell ({0}, {1})")]
    NegativeCellValue(usize, usize, f64),
    #[error("interpolation parameter {0} outside [0, 1]")]
    BadInterpolation(f64),
    #[error("measures are not a chain: elements {0} and {1} are incomparable")]
    NotAChain(usize, usize),
    #[error("candidates {0} and {1} start from different initial data (cell {2}, component {3})")]
    InitialDataMismatch(usize, usize, usize, &'static str),
    #[error("empty input")]
    Empty,
    #[error("observable basis size {0} exceeds cell count {1}")]
    BasisTooLarge(usize, usize),
    #[error("|G| <= F violated at an atom of cell ({0}, {1})")]
    ObservableDomination(usize, usize),
    #[error("dominating observable has no uniform space-time bound")]
    UnboundedObservable,
}

/// Uniform periodic space-time grid: `n_t` time cells of length `dt` on
/// `n_x` space cells of width `dx` over the flat torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimeGrid {
    pub n_t: usize,
    pub n_x: usize,
    pub dt: f64,
    pub dx: f64,
    pub periodic: bool,
}

impl SpaceTimeGrid {
    pub fn new(n_t: usize, n_x: usize, dt: f64, dx: f64) -> Self {
        assert!(dt > 0.0 && dx > 0.0, "grid steps must be positive");
        assert!(n_t > 0 && n_x > 0, "grid must have at least one cell");
        SpaceTimeGrid { n_t, n_x, dt, dx, periodic: true }
    }

    pub fn cells(&self) -> usize {
        self.n_t * self.n_x
    }

    pub fn index(&self, t: usize, x: usize) -> usize {
        t * self.n_x + x
    }

    /// Left endpoint of time cell `t`.
    pub fn time(&self, t: usize) -> f64 {
        t as f64 * self.dt
    }

    /// Center of space cell `x` on the torus `[-1, 1]`.
    pub fn x_center(&self, x: usize) -> f64 {
        -1.0 + (x as f64 + 0.5) * self.dx
    }

    /// Grids are compatible when dimensions agree and the steps agree up to
    /// round-off surviving a text round-trip.
    pub fn compatible(&self, other: &SpaceTimeGrid) -> bool {
        self.n_t == other.n_t
            && self.n_x == other.n_x
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt.max(other.dt)
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx.max(other.dx)
    }
}

/// One weighted phase-space atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<const N: usize> {
    pub weight: f64,
    pub state: ConsState<N>,
}

/// Per-cell atomic probability measures on the phase space.
#[derive(Clone, Debug)]
pub struct YoungMeasureField<const N: usize> {
    grid: SpaceTimeGrid,
    cells: Vec<Vec<Atom<N>>>,
}

impl<const N: usize> YoungMeasureField<N> {
    /// Build from per-cell atom lists, validating the probability-measure
    /// invariants.
    pub fn new(grid: SpaceTimeGrid, cells: Vec<Vec<Atom<N>>>) -> Result<Self, MeasureError> {
        assert_eq!(cells.len(), grid.cells(), "cell count must match the grid");
        for (i, atoms) in cells.iter().enumerate() {
            let (t, x) = (i / grid.n_x, i % grid.n_x);
            let mut sum = 0.0;
            for atom in atoms {
                if !(atom.weight > 0.0) {
                    return Err(MeasureError::NonPositiveWeight(t, x));
                }
                if !atom.state.in_phase_space() {
                    return Err(MeasureError::StateOutsidePhaseSpace(t, x));
                }
                sum += atom.weight;
            }
            if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                return Err(MeasureError::WeightSum(t, x, sum));
            }
        }
        Ok(YoungMeasureField { grid, cells })
    }

    /// One atom of weight 1 per cell: the field induced by a single
    /// trajectory of states (row-major time levels).
    pub fn dirac(grid: SpaceTimeGrid, states: &[ConsState<N>]) -> Result<Self, MeasureError> {
        let cells = states
            .iter()
            .map(|s| vec![Atom { weight: 1.0, state: *s }])
            .collect();
        Self::new(grid, cells)
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn atoms(&self, t: usize, x: usize) -> &[Atom<N>] {
        &self.cells[self.grid.index(t, x)]
    }

    pub fn cells(&self) -> &[Vec<Atom<N>>] {
        &self.cells
    }

    /// Expected value of an observable under the cell measure, with
    /// extended-real absorption: any `+inf` value carrying positive weight
    /// dominates, otherwise any `-inf` value absorbs the sum.
    pub fn expect(&self, t: usize, x: usize, g: impl Fn(&ConsState<N>) -> f64) -> f64 {
        let atoms = self.atoms(t, x);
        let mut sum = 0.0;
        let mut minus_infinite = false;
        for atom in atoms {
            let v = g(&atom.state);
            if v == f64::INFINITY {
                return f64::INFINITY;
            }
            if v == f64::NEG_INFINITY {
                minus_infinite = true;
            } else {
                sum += atom.weight * v;
            }
        }
        if minus_infinite {
            f64::NEG_INFINITY
        } else {
            sum
        }
    }

    /// Spatial integral of a per-cell expectation at one time index.
    pub fn integrate_slice(&self, t: usize, g: impl Fn(&ConsState<N>) -> f64 + Copy) -> f64 {
        (0..self.grid.n_x)
            .map(|x| self.expect(t, x, g) * self.grid.dx)
            .sum()
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`, coalescing
    /// atoms closer than `ATOM_MERGE_DISTANCE`.
    pub fn convex_combination(
        &self,
        other: &YoungMeasureField<N>,
        lambda: f64,
    ) -> Result<YoungMeasureField<N>, MeasureError> {
        if !self.grid.compatible(&other.grid) {
            return Err(MeasureError::GridMismatch);
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MeasureError::BadInterpolation(lambda));
        }
        if lambda == 0.0 {
            return Ok(other.clone());
        }
        if lambda == 1.0 {
            return Ok(self.clone());
        }
        let mut cells = Vec::with_capacity(self.cells.len());
        for (a, b) in self.cells.iter().zip(other.cells.iter()) {
            let mut merged: Vec<Atom<N>> = Vec::with_capacity(a.len() + b.len());
            for atom in a {
                push_atom(&mut merged, Atom { weight: lambda * atom.weight, state: atom.state });
            }
            for atom in b {
                push_atom(
                    &mut merged,
                    Atom { weight: (1.0 - lambda) * atom.weight, state: atom.state },
                );
            }
            cells.push(merged);
        }
        YoungMeasureField::new(self.grid, cells)
    }

    /// Strengthened initial admissibility: every atom of every `t = 0` cell
    /// has `rho > delta` and clears the cold threshold by more than `delta`.
    pub fn check_initial_admissibility(&self, model: &GasModel, delta: f64) -> bool {
        (0..self.grid.n_x).all(|x| {
            self.atoms(0, x).iter().all(|atom| {
                atom.state.rho > delta && model.admissibility_margin(&atom.state) > delta
            })
        })
    }
}

pub(crate) fn push_atom<const N: usize>(list: &mut Vec<Atom<N>>, atom: Atom<N>) {
    for existing in list.iter_mut() {
        if existing.state.distance(&atom.state) <= ATOM_MERGE_DISTANCE {
            existing.weight += atom.weight;
            return;
        }
    }
    list.push(atom);
}

/// Nonnegative entropy-production mass per space-time cell.
#[derive(Clone, Debug)]
pub struct CellMeasure {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl CellMeasure {
    pub fn new(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self, MeasureError> {
        assert_eq!(values.len(), grid.cells());
        for (i, &v) in values.iter().enumerate() {
            if !(v >= 0.0) {
                return Err(MeasureError::NegativeCellValue(i / grid.n_x, i % grid.n_x, v));
            }
        }
        Ok(CellMeasure { grid, values })
    }

    pub fn zeros(grid: SpaceTimeGrid) -> Self {
        let n = grid.cells();
        CellMeasure { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn value(&self, t: usize, x: usize) -> f64 {
        self.values[self.grid.index(t, x)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Pairing with a nonnegative cell observable.
    pub fn pair(&self, g: &CellObservable) -> f64 {
        g.pair(&self.values)
    }

    /// Cellwise scaling by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> CellMeasure {
        assert!(factor >= 0.0);
        CellMeasure {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Add mass to one cell (useful for constructing dominating measures).
    pub fn with_bump(&self, t: usize, x: usize, mass: f64) -> CellMeasure {
        assert!(mass >= 0.0);
        let mut values = self.values.clone();
        values[self.grid.index(t, x)] += mass;
        CellMeasure { grid: self.grid, values }
    }
}

/// Signed matrix-valued cell measure (the concentration remainder in the
/// momentum balance). Atomic fields generated by single runs carry none, so
/// the zero measure is the common case.
#[derive(Clone, Debug)]
pub struct MatrixCellMeasure<const N: usize> {
    grid: SpaceTimeGrid,
    values: Vec<[[f64; N]; N]>,
}

impl<const N: usize> MatrixCellMeasure<N> {
    pub fn zeros(grid: SpaceTimeGrid) -> Self {
        let n = grid.cells();
        MatrixCellMeasure { grid, values: vec![[[0.0; N]; N]; n] }
    }

    pub fn new(grid: SpaceTimeGrid, values: Vec<[[f64; N]; N]>) -> Self {
        assert_eq!(values.len(), grid.cells());
        MatrixCellMeasure { grid, values }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn value(&self, t: usize, x: usize) -> &[[f64; N]; N] {
        &self.values[self.grid.index(t, x)]
    }

    /// Total variation: the sum over cells of the Frobenius norm.
    pub fn total_variation(&self) -> f64 {
        self.values
            .iter()
            .map(|m| {
                m.iter()
                    .flat_map(|row| row.iter())
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2x2() -> SpaceTimeGrid {
        SpaceTimeGrid::new(2, 2, 0.5, 1.0)
    }

    fn dirac_at(grid: SpaceTimeGrid, s: ConsState<1>) -> YoungMeasureField<1> {
        let states = vec![s; grid.cells()];
        YoungMeasureField::dirac(grid, &states).unwrap()
    }

    #[test]
    fn dirac_expectation_is_pointwise() {
        let s = ConsState::new(1.0, [0.5], 2.0);
        let field = dirac_at(grid2x2(), s);
        assert_eq!(field.expect(0, 0, |st| st.total_energy), 2.0);
        assert_eq!(field.expect(1, 1, |st| st.rho * st.momentum[0]), 0.5);
    }

    #[test]
    fn expectation_arithmetic() {
        let grid = SpaceTimeGrid::new(1, 1, 1.0, 1.0);
        let atoms = vec![vec![
            Atom { weight: 0.5, state: ConsState::new(1.0, [0.0], 0.0) },
            Atom { weight: 0.5, state: ConsState::new(1.0, [0.0], 2.0) },
        ]];
        let field = YoungMeasureField::new(grid, atoms).unwrap();
        assert_eq!(field.expect(0, 0, |s| s.total_energy), 1.0);
    }

    #[test]
    fn expectation_absorbs_minus_infinity() {
        let m = GasModel::cold_pressure_gas(2.0, 1.0).unwrap();
        let grid = SpaceTimeGrid::new(1, 1, 1.0, 1.0);
        let atoms = vec![vec![
            Atom { weight: 0.5, state: ConsState::new(1.0, [0.0], 2.0) },
            // below the cold threshold: total entropy -inf
            Atom { weight: 0.5, state: ConsState::new(1.0, [0.0], 0.4) },
        ]];
        let field = YoungMeasureField::new(grid, atoms).unwrap();
        assert_eq!(
            field.expect(0, 0, |s| m.total_entropy(s)),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn convex_combination_endpoints_and_weights() {
        let s1 = ConsState::new(1.0, [0.0], 1.0);
        let s2 = ConsState::new(2.0, [0.0], 3.0);
        let f1 = dirac_at(grid2x2(), s1);
        let f2 = dirac_at(grid2x2(), s2);
        let both = f1.convex_combination(&f2, 0.5).unwrap();
        assert_eq!(both.atoms(0, 0).len(), 2);
        let e = both.expect(0, 0, |s| s.total_energy);
        assert!((e - 2.0).abs() < 1e-15);
        // endpoints are exact copies
        assert_eq!(f1.convex_combination(&f2, 1.0).unwrap().atoms(0, 0), f1.atoms(0, 0));
        assert_eq!(f1.convex_combination(&f2, 0.0).unwrap().atoms(0, 0), f2.atoms(0, 0));
    }

    #[test]
    fn identical_atoms_coalesce() {
        let s = ConsState::new(1.0, [0.0], 1.0);
        let f = dirac_at(grid2x2(), s);
        let merged = f.convex_combination(&f, 0.25).unwrap();
        assert_eq!(merged.atoms(1, 0).len(), 1);
        assert!((merged.atoms(1, 0)[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initial_admissibility_checks() {
        let m = GasModel::perfect_gas(1.4).unwrap();
        let good = dirac_at(grid2x2(), ConsState::new(1.0, [0.0], 1.0));
        assert!(good.check_initial_admissibility(&m, 0.0));
        let vacuum = dirac_at(grid2x2(), ConsState::new(0.0, [0.0], 1.0));
        assert!(!vacuum.check_initial_admissibility(&m, 0.0));
        // exactly on the threshold: E = E_kin, margin 0, strict check fails
        let boundary = dirac_at(grid2x2(), ConsState::new(1.0, [2.0], 2.0));
        assert!(!boundary.check_initial_admissibility(&m, 0.0));
    }

    #[test]
    fn cell_measure_rejects_negative_entries() {
        let grid = grid2x2();
        assert!(CellMeasure::new(grid, vec![0.0, 1.0, -0.5, 0.0]).is_err());
    }

    #[test]
    fn matrix_measure_total_variation() {
        let grid = SpaceTimeGrid::new(1, 2, 1.0, 1.0);
        let m = MatrixCellMeasure::<1>::new(grid, vec![[[3.0]], [[-4.0]]]);
        assert_eq!(m.total_variation(), 7.0);
        assert_eq!(MatrixCellMeasure::<1>::zeros(grid).total_variation(), 0.0);
    }

    #[test]
    fn weight_sum_validated() {
        let grid = SpaceTimeGrid::new(1, 1, 1.0, 1.0);
        let atoms = vec![vec![Atom { weight: 0.7, state: ConsState::new(1.0, [0.0], 1.0) }]];
        assert!(matches!(
            YoungMeasureField::new(grid, atoms),
            Err(MeasureError::WeightSum(0, 0, _))
        ));
    }
}
