//! Log-price series, correlation measures, and the base-network price fit.
//!
//! The close price is squashed with a base-1000 logarithm, then approximated
//! as `c0 + sum(c_i * u_i(t))` where the u_i are left-singular vectors of the
//! normalized snapshot matrix. Since the u_i with nonzero singular value are
//! orthonormal and zero-mean, the dot-product coefficients realize the
//! least-squares projection of the series onto that span.

use alloc::vec::Vec;

use thiserror::Error;

use crate::date::CivilDate;
use crate::math;
use crate::svd::SvdResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PriceFitError {
    #[error("series lengths differ")]
    LengthMismatch,
    #[error("need at least two points")]
    TooShort,
    #[error("series is constant; correlation undefined")]
    ConstantSeries,
    #[error("price must be positive")]
    NonPositivePrice,
    #[error("days must be strictly increasing")]
    UnorderedDays,
    #[error("series is not aligned with the decomposition's day axis")]
    DayAxisMismatch,
    #[error("requested more components than days")]
    RankExceeded,
}

/// Daily close prices with their base-1000 log transform.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    days: Vec<CivilDate>,
    prices: Vec<f64>,
    log_prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(days: Vec<CivilDate>, prices: Vec<f64>) -> Result<Self, PriceFitError> {
        if days.len() != prices.len() {
            return Err(PriceFitError::LengthMismatch);
        }
        if days.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PriceFitError::UnorderedDays);
        }
        let log_prices = log_price(&prices)?;
        Ok(PriceSeries {
            days,
            prices,
            log_prices,
        })
    }

    pub fn days(&self) -> &[CivilDate] {
        &self.days
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}

/// Base-1000 logarithm of each price: `B(t) = ln P(t) / ln 1000`.
pub fn log_price(prices: &[f64]) -> Result<Vec<f64>, PriceFitError> {
    let ln1000 = math::ln(1000.0);
    prices
        .iter()
        .map(|&p| {
            if p > 0.0 {
                Ok(math::ln(p) / ln1000)
            } else {
                Err(PriceFitError::NonPositivePrice)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
    /// Tie-corrected Kendall (tau-b).
    KendallTauB,
}

/// Pearson, Spearman, and Kendall coefficients of one pair of series.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationTriple {
    pub pearson: f64,
    pub spearman: f64,
    pub kendall: f64,
}

/// Correlation between two equal-length series.
pub fn correlate(x: &[f64], y: &[f64], method: CorrelationMethod) -> Result<f64, PriceFitError> {
    if x.len() != y.len() {
        return Err(PriceFitError::LengthMismatch);
    }
    if x.len() < 2 {
        return Err(PriceFitError::TooShort);
    }
    match method {
        CorrelationMethod::Pearson => pearson(x, y),
        CorrelationMethod::Spearman => pearson(&ranks(x), &ranks(y)),
        CorrelationMethod::KendallTauB => kendall_tau_b(x, y),
    }
}

/// All three coefficients at once.
pub fn correlation_triple(x: &[f64], y: &[f64]) -> Result<CorrelationTriple, PriceFitError> {
    Ok(CorrelationTriple {
        pearson: correlate(x, y, CorrelationMethod::Pearson)?,
        spearman: correlate(x, y, CorrelationMethod::Spearman)?,
        kendall: correlate(x, y, CorrelationMethod::KendallTauB)?,
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, PriceFitError> {
    let n = x.len() as f64;
    let mean_x: f64 = x.iter().sum::<f64>() / n;
    let mean_y: f64 = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(PriceFitError::ConstantSeries);
    }
    Ok(cov / math::sqrt(var_x * var_y))
}

/// Average ranks (1-based); ties share the mean of their positions.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap().then(i.cmp(&j)));
    let mut out = alloc::vec![0.0f64; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            out[idx] = rank;
        }
        i = j;
    }
    out
}

fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64, PriceFitError> {
    let n = x.len();
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut ties_x = 0u64;
    let mut ties_y = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                ties_x += 1;
                ties_y += 1;
            } else if dx == 0.0 {
                ties_x += 1;
            } else if dy == 0.0 {
                ties_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let denom = (n0 - ties_x as f64) * (n0 - ties_y as f64);
    if denom <= 0.0 {
        return Err(PriceFitError::ConstantSeries);
    }
    Ok((concordant as f64 - discordant as f64) / math::sqrt(denom))
}

/// Result of projecting a log-price series onto leading base networks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PriceFit {
    /// Mean of the log-price series.
    pub c0: f64,
    /// One coefficient per component used.
    pub coefficients: Vec<f64>,
    /// `c0 + sum(c_i * u_i(t))`, length T.
    pub fitted: Vec<f64>,
    /// Number of components used.
    pub components: usize,
}

/// Fits the log-price series with the first `n` left-singular vectors.
///
/// Coefficients are dot products of the centered series with each u_i; for
/// the zero-mean components (nonzero sigma) this equals the plain dot
/// product with the series. With n equal to the day count the fit
/// reconstructs the series exactly.
pub fn fit_price(log_prices: &[f64], svd: &SvdResult, n: usize) -> Result<PriceFit, PriceFitError> {
    let t = svd.day_count();
    if log_prices.len() != t {
        return Err(PriceFitError::DayAxisMismatch);
    }
    if n > t {
        return Err(PriceFitError::RankExceeded);
    }
    let c0 = log_prices.iter().sum::<f64>() / t as f64;
    let centered: Vec<f64> = log_prices.iter().map(|b| b - c0).collect();
    let mut coefficients = Vec::with_capacity(n);
    let mut fitted = alloc::vec![c0; t];
    for i in 0..n {
        let u = svd.u_row(i);
        let c: f64 = centered.iter().zip(u).map(|(b, u)| b * u).sum();
        coefficients.push(c);
        for (f, &ui) in fitted.iter_mut().zip(u) {
            *f += c * ui;
        }
    }
    Ok(PriceFit {
        c0,
        coefficients,
        fitted,
        components: n,
    })
}

/// Correlations between the fitted series and the actual log prices.
pub fn evaluate_fit(fit: &PriceFit, log_prices: &[f64]) -> Result<CorrelationTriple, PriceFitError> {
    correlation_triple(&fit.fitted, log_prices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Mat;
    use crate::svd::jacobi_svd;

    #[test]
    fn log_price_hits_the_round_numbers() {
        assert_eq!(log_price(&[1000.0]).unwrap()[0], 1.0);
        assert_eq!(log_price(&[1.0]).unwrap()[0], 0.0);
        let b = log_price(&[1207.0]).unwrap()[0];
        assert!((b - 1207.0f64.ln() / 1000.0f64.ln()).abs() < 1e-15);
        assert!((b - 1.0272).abs() < 5e-5);
        assert_eq!(log_price(&[0.0]), Err(PriceFitError::NonPositivePrice));
    }

    #[test]
    fn perfect_and_inverted_correlations() {
        let x = [1.0, 2.0, 5.0, 3.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        for method in [
            CorrelationMethod::Pearson,
            CorrelationMethod::Spearman,
            CorrelationMethod::KendallTauB,
        ] {
            assert!((correlate(&x, &x, method).unwrap() - 1.0).abs() < 1e-12);
            assert!((correlate(&x, &neg, method).unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kendall_counts_pairs() {
        // 2 concordant, 1 discordant.
        let tau = correlate(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0], CorrelationMethod::KendallTauB)
            .unwrap();
        assert!((tau - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_matches_direct_formula() {
        let rho = correlate(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0], CorrelationMethod::Pearson)
            .unwrap();
        assert!((rho - 0.9819805060619659).abs() < 1e-12);
    }

    #[test]
    fn error_cases() {
        assert_eq!(
            correlate(&[1.0], &[1.0], CorrelationMethod::Pearson),
            Err(PriceFitError::TooShort)
        );
        assert_eq!(
            correlate(&[1.0, 2.0], &[1.0], CorrelationMethod::Pearson),
            Err(PriceFitError::LengthMismatch)
        );
        assert_eq!(
            correlate(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], CorrelationMethod::Pearson),
            Err(PriceFitError::ConstantSeries)
        );
        assert_eq!(
            correlate(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], CorrelationMethod::KendallTauB),
            Err(PriceFitError::ConstantSeries)
        );
    }

    #[test]
    fn spearman_handles_ties_with_average_ranks() {
        let r = ranks(&[10.0, 20.0, 20.0, 30.0]);
        assert_eq!(r, alloc::vec![1.0, 2.5, 2.5, 4.0]);
    }

    fn small_svd() -> SvdResult {
        // 3 x 4 centered matrix (columns sum to zero).
        let x = Mat::from_rows(&[
            alloc::vec![0.5, -0.2, 0.1, -0.4],
            alloc::vec![-0.3, 0.4, -0.2, 0.1],
            alloc::vec![-0.2, -0.2, 0.1, 0.3],
        ]);
        jacobi_svd(&x)
    }

    #[test]
    fn zero_components_fit_is_the_mean() {
        let svd = small_svd();
        let b = [1.0, 2.0, 6.0];
        let fit = fit_price(&b, &svd, 0).unwrap();
        assert_eq!(fit.coefficients.len(), 0);
        assert!(fit.fitted.iter().all(|&f| (f - 3.0).abs() < 1e-12));
    }

    #[test]
    fn full_rank_fit_reconstructs_exactly() {
        let svd = small_svd();
        let b = [1.0, 2.0, 6.0];
        let fit = fit_price(&b, &svd, 3).unwrap();
        for (f, b) in fit.fitted.iter().zip(&b) {
            assert!((f - b).abs() < 1e-8);
        }
        let triple = evaluate_fit(&fit, &b).unwrap();
        assert!((triple.pearson - 1.0).abs() < 1e-9);
        assert!((triple.spearman - 1.0).abs() < 1e-9);
        assert!((triple.kendall - 1.0).abs() < 1e-9);
    }

    #[test]
    fn residuals_are_orthogonal_to_used_components() {
        let svd = small_svd();
        let b = [1.0, -2.0, 0.5];
        let fit = fit_price(&b, &svd, 2).unwrap();
        for i in 0..2 {
            let u = svd.u_row(i);
            let dot: f64 = b
                .iter()
                .zip(&fit.fitted)
                .zip(u)
                .map(|((b, f), u)| (b - f) * u)
                .sum();
            assert!(dot.abs() < 1e-10, "component {i} residual dot {dot}");
        }
    }

    #[test]
    fn misalignment_is_rejected() {
        let svd = small_svd();
        assert_eq!(
            fit_price(&[1.0, 2.0], &svd, 1),
            Err(PriceFitError::DayAxisMismatch)
        );
        assert_eq!(
            fit_price(&[1.0, 2.0, 3.0], &svd, 4),
            Err(PriceFitError::RankExceeded)
        );
    }

    #[test]
    fn rank_monotone_transform_leaves_rank_correlations() {
        let x: [f64; 5] = [1.0, 3.0, 2.0, 5.0, 4.0];
        let y = [2.0, 1.0, 4.0, 3.0, 5.0];
        let fx: Vec<f64> = x.iter().map(|v| (v * 2.0).exp()).collect();
        for method in [CorrelationMethod::Spearman, CorrelationMethod::KendallTauB] {
            let a = correlate(&x, &y, method).unwrap();
            let b = correlate(&fx, &y, method).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn price_series_validates() {
        let d1: CivilDate = "2013-01-01".parse().unwrap();
        let d2: CivilDate = "2013-01-02".parse().unwrap();
        assert!(PriceSeries::new(alloc::vec![d1, d2], alloc::vec![10.0, 12.0]).is_ok());
        assert_eq!(
            PriceSeries::new(alloc::vec![d2, d1], alloc::vec![10.0, 12.0]),
            Err(PriceFitError::UnorderedDays)
        );
        assert_eq!(
            PriceSeries::new(alloc::vec![d1, d2], alloc::vec![10.0, -1.0]),
            Err(PriceFitError::NonPositivePrice)
        );
    }
}
