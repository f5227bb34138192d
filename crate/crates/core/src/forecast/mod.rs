//! NVAR forecasting with a ridge readout, differencing, a seasonal-naive
//! baseline and MAPE evaluation.

mod diff;
mod eval;
mod linalg;
mod nvar;

pub use diff::{difference, difference_series, undifference, Differenced};
pub use eval::{
    mape, mape_with_epsilon, rolling_predictions, seasonal_naive, seasonal_naive_values,
    EvalReport, Forecaster, SeasonalNaive, NEAR_ZERO_EPSILON,
};
pub use linalg::{dot, Matrix};
pub use nvar::{embed, embed_values, fit_ridge, NvarModel, NvarSpec};
