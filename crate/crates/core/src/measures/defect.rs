//! Concentration-defect inequality for sequences of Young measure fields.
//!
//! For a declared-convergent sequence of fields and a dominated observable
//! pair `|G| <= F`, the gap between the limit of expectations and the
//! expectation under the (biting) limit measure obeys
//! `|lim <U^n; G> - <U; G>| <= lim <U^n; F> - <U; F>` cellwise.
//!
//! Sequences are supplied in structured form: the caller declares the
//! atom-wise limit field alongside the sequence. The module verifies the
//! inequality; it does not infer limits of arbitrary data.

use crate::measures::{MeasureError, YoungMeasureField};
use crate::state::ConsState;

/// A sequence of fields together with its declared atom-wise limit.
#[derive(Clone, Debug)]
pub struct ConcentratingSequence<const N: usize> {
    pub fields: Vec<YoungMeasureField<N>>,
    pub limit: YoungMeasureField<N>,
}

impl<const N: usize> ConcentratingSequence<N> {
    pub fn new(
        fields: Vec<YoungMeasureField<N>>,
        limit: YoungMeasureField<N>,
    ) -> Result<Self, MeasureError> {
        if fields.is_empty() {
            return Err(MeasureError::Empty);
        }
        for f in &fields {
            if !f.grid().compatible(limit.grid()) {
                return Err(MeasureError::GridMismatch);
            }
        }
        Ok(ConcentratingSequence { fields, limit })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CellDefect {
    pub t: usize,
    pub x: usize,
    /// Limit of `<U^n; G>` along the sequence (tail value).
    pub g_limit: f64,
    pub f_limit: f64,
    /// Expectation under the declared limit measure.
    pub g_biting: f64,
    pub f_biting: f64,
    pub g_defect: f64,
    pub f_defect: f64,
    /// Largest last-step residual of the declared-convergent expectations.
    pub convergence_residual: f64,
}

#[derive(Clone, Debug)]
pub struct DefectReport {
    pub passed: bool,
    /// Uniform space-time L1 bound of `<U^n; F>` over the sequence.
    pub uniform_f_bound: f64,
    pub cells: Vec<CellDefect>,
    /// Cells where the defect inequality fails beyond tolerance.
    pub failures: Vec<(usize, usize)>,
}

const DEFECT_TOLERANCE: f64 = 1e-10;

/// Verify the defect inequality cellwise for `|G| <= F`.
pub fn concentration_defect_check<const N: usize>(
    sequence: &ConcentratingSequence<N>,
    g: impl Fn(&ConsState<N>) -> f64 + Copy,
    f: impl Fn(&ConsState<N>) -> f64 + Copy,
) -> Result<DefectReport, MeasureError> {
    let grid = *sequence.limit.grid();

    // Domination |G| <= F on every atom that appears anywhere.
    for field in sequence.fields.iter().chain(std::iter::once(&sequence.limit)) {
        for (i, atoms) in field.cells().iter().enumerate() {
            for atom in atoms {
                if g(&atom.state).abs() > f(&atom.state) + 1e-14 {
                    return Err(MeasureError::ObservableDomination(
                        i / grid.n_x,
                        i % grid.n_x,
                    ));
                }
            }
        }
    }

    // Uniform L1 bound of <U^n; F>, checked to be finite.
    let mut uniform_f_bound = 0.0f64;
    for field in &sequence.fields {
        let mut total = 0.0;
        for t in 0..grid.n_t {
            for x in 0..grid.n_x {
                total += field.expect(t, x, f).abs() * grid.dx * grid.dt;
            }
        }
        uniform_f_bound = uniform_f_bound.max(total);
    }
    if !uniform_f_bound.is_finite() {
        return Err(MeasureError::UnboundedObservable);
    }

    let last = sequence.fields.len() - 1;
    let mut cells = Vec::with_capacity(grid.cells());
    let mut failures = Vec::new();
    for t in 0..grid.n_t {
        for x in 0..grid.n_x {
            let g_limit = sequence.fields[last].expect(t, x, g);
            let f_limit = sequence.fields[last].expect(t, x, f);
            let convergence_residual = if last > 0 {
                let g_prev = sequence.fields[last - 1].expect(t, x, g);
                let f_prev = sequence.fields[last - 1].expect(t, x, f);
                (g_limit - g_prev).abs().max((f_limit - f_prev).abs())
            } else {
                0.0
            };
            let g_biting = sequence.limit.expect(t, x, g);
            let f_biting = sequence.limit.expect(t, x, f);
            let g_defect = (g_limit - g_biting).abs();
            let f_defect = f_limit - f_biting;
            let scale = f_limit.abs().max(1.0);
            let ok = g_defect <= f_defect + DEFECT_TOLERANCE * scale
                && f_defect >= -DEFECT_TOLERANCE * scale;
            if !ok {
                failures.push((t, x));
            }
            cells.push(CellDefect {
                t,
                x,
                g_limit,
                f_limit,
                g_biting,
                f_biting,
                g_defect,
                f_defect,
                convergence_residual,
            });
        }
    }

    Ok(DefectReport { passed: failures.is_empty(), uniform_f_bound, cells, failures })
}
