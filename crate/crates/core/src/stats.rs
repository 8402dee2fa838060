//! Small statistical helpers for the Monte Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Width of every Monte Carlo acceptance band, in standard errors.
/// A correct implementation fails a single check with probability below 1e-6.
pub const MC_SIGMAS: f64 = 5.0;

/// Standard error of a binomial proportion `p` estimated from `n` trials.
pub fn binomial_std_error(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `|estimate − expected| ≤ MC_SIGMAS · σ`, with σ taken from the expected
/// proportion. Degenerate proportions (0 or 1) therefore demand an exact match.
pub fn within_binomial_band(estimate: f64, expected: f64, n: u64) -> bool {
    (estimate - expected).abs() <= MC_SIGMAS * binomial_std_error(expected, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of homogeneity for a contingency table whose rows
/// are samples and whose columns are categories. Empty rows and columns are
/// dropped; a table with no remaining degrees of freedom yields `p = 1`.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> ChiSquareTest {
    let width = table.iter().map(Vec::len).max().unwrap_or(0);
    let cell = |r: &Vec<u64>, c: usize| r.get(c).copied().unwrap_or(0) as f64;

    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().any(|&v| v > 0)).collect();
    let cols: Vec<usize> = (0..width).filter(|&c| rows.iter().any(|r| cell(r, c) > 0.0)).collect();
    if rows.len() < 2 || cols.len() < 2 {
        return ChiSquareTest {
            statistic: 0.0,
            degrees_of_freedom: 0,
            p_value: 1.0,
        };
    }

    let row_totals: Vec<f64> = rows.iter().map(|r| cols.iter().map(|&c| cell(r, c)).sum()).collect();
    let col_totals: Vec<f64> = cols.iter().map(|&c| rows.iter().map(|r| cell(r, c)).sum()).collect();
    let total: f64 = row_totals.iter().sum();

    let mut statistic = 0.0;
    for (r, row) in rows.iter().enumerate() {
        for (k, &c) in cols.iter().enumerate() {
            let expected = row_totals[r] * col_totals[k] / total;
            statistic += (cell(row, c) - expected).powi(2) / expected;
        }
    }
    let dof = (rows.len() - 1) * (cols.len() - 1);
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN);
    ChiSquareTest {
        statistic,
        degrees_of_freedom: dof,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn std_error_examples() {
        assert!((binomial_std_error(0.75, 1_000_000) - 0.1875f64.sqrt() / 1000.0).abs() < 1e-15);
        assert_eq!(binomial_std_error(1.0, 10), 0.0);
    }

    #[test]
    fn degenerate_band_is_exact() {
        assert!(within_binomial_band(1.0, 1.0, 1000));
        assert!(!within_binomial_band(0.999, 1.0, 1000));
        assert!(within_binomial_band(0.501, 0.5, 1_000_000));
        assert!(!within_binomial_band(0.503, 0.5, 1_000_000));
    }

    #[test]
    fn chi_square_known_value() {
        let table = vec![vec![10, 40], vec![20, 30]];
        let t = chi_square_homogeneity(&table);
        // expected: [15,35],[15,35]; sum (d²/e) = 25/15*2 + 25/35*2
        let by_hand = 2.0 * 25.0 / 15.0 + 2.0 * 25.0 / 35.0;
        assert!((t.statistic - by_hand).abs() < 1e-12);
        assert_eq!(t.degrees_of_freedom, 1);
        // erfc(sqrt(4.7619 / 2))
        assert!((t.p_value - 0.029096).abs() < 1e-4, "{}", t.p_value);
    }

    #[test]
    fn chi_square_degenerate_tables() {
        assert_eq!(chi_square_homogeneity(&[vec![5, 0], vec![7, 0]]).p_value, 1.0);
        assert_eq!(chi_square_homogeneity(&[vec![5, 3]]).p_value, 1.0);
        assert_eq!(chi_square_homogeneity(&[]).degrees_of_freedom, 0);
    }
}
