//! Graded formal Weyl algebra over a Darboux chart, its symplectic and
//! Abelian connections, flat sections and the star product they induce.
//!
//! Elements are finite sums `Σ ħ^k c(x) y^μ dx^S` with `c` a (possibly
//! jet-valued) complex rational function. The grade `|μ| + 2k` is bounded
//! by [`TruncationConfig::max_grade`]; the fiber product preserves grade,
//! so truncating after every product is exact below the bound.

mod element;
mod fedosov;
mod jet;
mod operator;

pub use element::{WeylElement, WeylKey};
pub use fedosov::{
    apply_connection, sigma, sigma_inv, sigma_inv_coeff, star_left_operator, star_product,
    star_right_operator, ConnectionMode,
};
pub use jet::{Jet, JetCoeff};
pub use operator::DifferentialOperator;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::ChartKind;
use crate::symbolic::SymbolicError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeylError {
    #[error("elements live on different charts ({0:?} vs {1:?})")]
    ChartMismatch(ChartKind, ChartKind),
    #[error("grade bound {max_grade} cannot hold hbar order {max_hbar} (need G >= 2K)")]
    InvalidTruncation { max_grade: u32, max_hbar: u32 },
    #[error("connection produced a negative power of hbar")]
    NegativeHbarPower,
    #[error("flat-section recursion did not close within grade {0}")]
    NonConvergence(u32),
    #[error("product of two coefficients that both depend on the undetermined function")]
    MixedJets,
    #[error("`{0}` is not a rational function of the chart coordinates")]
    NotInChart(String),
    #[error("operator has a term that does not act on its argument")]
    NotLinear,
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// Grade bound `G` (on `deg_y + 2·deg_ħ`) and ħ-order `K` kept in star products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationConfig {
    max_grade: u32,
    max_hbar: u32,
}

impl TruncationConfig {
    pub fn new(max_grade: u32, max_hbar: u32) -> Result<Self, WeylError> {
        if max_grade < 2 * max_hbar {
            return Err(WeylError::InvalidTruncation { max_grade, max_hbar });
        }
        Ok(TruncationConfig { max_grade, max_hbar })
    }

    /// Enough grade to reach ħ^`k` in a star product, and nothing more.
    pub fn for_hbar_order(k: u32) -> Self {
        TruncationConfig { max_grade: 2 * k, max_hbar: k }
    }

    pub fn max_grade(&self) -> u32 {
        self.max_grade
    }

    pub fn max_hbar(&self) -> u32 {
        self.max_hbar
    }
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig { max_grade: 8, max_hbar: 3 }
    }
}
