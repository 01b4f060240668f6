use super::fit::differenced;
use super::kalman::ArmaFilter;
use super::{poly, FittedModel, Forecast, ModelKind};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// One-step-ahead point forecast from the end of `history`, which must be the
/// series the model was estimated on. `covariate_future` holds the next value
/// of each regressor, in the order they were supplied at estimation.
pub fn forecast_one_step(model: &FittedModel, history: &TimeSeries, covariate_future: &[f64]) -> Result<Forecast> {
    let n = history.len();
    if n != model.n_obs {
        return Err(Error::Input(format!(
            "history has {n} observations but the model was estimated on {}",
            model.n_obs
        )));
    }
    if covariate_future.len() != model.regressors.len() {
        return Err(Error::Input(format!(
            "expected {} future covariate values, got {}",
            model.regressors.len(),
            covariate_future.len()
        )));
    }
    let origin_date = history
        .last_date()
        .ok_or(Error::Length { needed: 1, got: 0 })?;
    let y = history.values();
    if model.kind == ModelKind::RandomWalk {
        return Ok(Forecast {
            point: y[n - 1],
            horizon: 1,
            origin_date,
        });
    }

    let order = &model.order;
    let mut eta = differenced(y, order);
    let mut next_reg = 0.0;
    for ((reg, beta), future) in model.regressors.iter().zip(&model.reg_coeffs).zip(covariate_future) {
        let mut extended = reg.clone();
        extended.push(*future);
        let dx = differenced(&extended, order);
        for (e, x) in eta.iter_mut().zip(&dx) {
            *e -= beta * x;
        }
        next_reg += beta * dx[dx.len() - 1];
    }
    let c = model.intercept.unwrap_or(0.0);
    eta.iter_mut().for_each(|e| *e -= c);

    let phi = poly::expand_ar(&model.ar, &model.seasonal_ar, order.period);
    let theta = poly::expand_ma(&model.ma, &model.seasonal_ma, order.period);
    let filter = ArmaFilter::new(&phi, &theta)?;
    let eta_next = filter.run(&[&eta], |_, _| {})?.next[0];
    let w_next = next_reg + c + eta_next;

    let diff = poly::differencing_polynomial(order.d, order.period, order.seasonal_d);
    let undiff: f64 = diff.iter().enumerate().map(|(i, ci)| ci * y[n - 1 - i]).sum();
    Ok(Forecast {
        point: w_next - undiff,
        horizon: 1,
        origin_date,
    })
}
