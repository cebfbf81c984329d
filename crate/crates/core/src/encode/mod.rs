//! Amplitude encoding: polynomial rotations, piecewise Chebyshev encoding,
//! integer comparators, state preparation and the amplitude swap.
//!
//! Every encoder leaves the data register untouched and writes
//! `sin(eps f(k))` on the `|1>` branch of a flag qubit.

pub mod chebyshev;
pub mod comparator;
pub mod piecewise;
pub mod poly;
pub mod stateprep;
pub mod swap;

pub use chebyshev::{chebyshev_fit, chebyshev_fit_2d, chebyshev_fit_2d_adaptive, chebyshev_fit_adaptive, BivariatePiecewise, PiecewiseChebyshev};
pub use comparator::{comparator_circuit, push_range_flag};
pub use piecewise::{bivariate_piecewise_encode_circuit, piecewise_encode_circuit, OutOfRange, PiecewiseLayout};
pub use poly::{
    bivariate_encode_circuit, expand_bivariate_terms, expand_rotation_terms, merge_terms, poly_encode_circuit,
    BivariatePolynomial, MonomialPolynomial, RotationTerm,
};
pub use stateprep::{approx_state_prep, exact_state_prep, StatePrepSource};
pub use swap::{amplitude_swap_circuit, push_amplitude_swap, swap_toffoli_count};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Scaling and resource limits for an encoding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub epsilon: f64,
    /// Largest number of V-chain ancillas a single rotation may need.
    /// `None` means unlimited.
    pub ancilla_budget: Option<usize>,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self { epsilon: 0.1, ancilla_budget: None }
    }
}

impl EncodingConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    /// `eps = 0.1 / max|f|` (or 0.1 when `f` vanishes).
    pub fn for_max_abs(max_abs: f64) -> Self {
        Self::with_epsilon(default_epsilon(max_abs))
    }

    pub fn check_range(&self, max_abs: f64) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.epsilon * max_abs > 0.5 + 1e-12 {
            return Err(Error::Validation(format!(
                "eps * max|f| = {:.3e} exceeds 0.5; lower epsilon",
                self.epsilon * max_abs
            )));
        }
        Ok(())
    }

    pub(crate) fn check_ancillas(&self, max_controls: usize) -> Result<()> {
        let need = max_controls.saturating_sub(1);
        match self.ancilla_budget {
            Some(b) if need > b => {
                Err(Error::Capacity(format!("a rotation with {max_controls} controls needs {need} ancillas, budget {b}")))
            }
            _ => Ok(()),
        }
    }
}

pub fn default_epsilon(max_abs: f64) -> f64 {
    if max_abs > 0.0 {
        0.1 / max_abs
    } else {
        0.1
    }
}
