//! Associated Legendre functions `P_n^m(x)` without the Condon–Shortley phase.
//!
//! Rows are built from the seeds `P_0^0 = 1`, `P_1^{−1} = −½√(1−x²)`,
//! `P_1^0 = x`, `P_1^1 = √(1−x²)` with the four-term recurrence
//!
//! ```text
//! P_n^m = 2x·P_{n−1}^m − P_{n−2}^m + (2m−1)·√(1−x²)·P_{n−1}^{m−1},   0 ≤ m ≤ n,
//! ```
//!
//! which for `m = 0` reaches into the `m = −1` entry of the previous row.
//! Negative degrees come from `P_n^{−m} = (−1)^m (n−m)!/(n+m)! · P_n^m`.

use crate::error::{Error, Result};

use super::factorial;

/// Triangular table of `P_n^m(x)` for `0 ≤ n ≤ n_max`, `−n ≤ m ≤ n`, at one abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreTable {
    x: f64,
    n_max: usize,
    // Entry (n, m) at n² + n + m.
    values: Vec<f64>,
}

impl LegendreTable {
    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `P_n^m(x)`; zero whenever `|m| > n` or `n > n_max`.
    pub fn get(&self, n: usize, m: i64) -> f64 {
        if n > self.n_max || m.unsigned_abs() as usize > n {
            return 0.0;
        }
        self.values[slot(n, m)]
    }

    /// `P_n^{−n}(x), …, P_n^n(x)`.
    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n * n..(n + 1) * (n + 1)]
    }
}

#[inline]
fn slot(n: usize, m: i64) -> usize {
    ((n * n + n) as i64 + m) as usize
}

/// Build the table of `P_n^m(x)` for all `n ≤ n_max`.
pub fn legendre_table(x: f64, n_max: usize) -> Result<LegendreTable> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("Legendre abscissa {x} outside [-1, 1]")));
    }
    let sin = (1.0 - x * x).max(0.0).sqrt();
    let mut values = vec![0.0; (n_max + 1) * (n_max + 1)];
    values[0] = 1.0;
    if n_max >= 1 {
        values[slot(1, -1)] = -0.5 * sin;
        values[slot(1, 0)] = x;
        values[slot(1, 1)] = sin;
    }
    let at = |values: &[f64], n: usize, m: i64| -> f64 {
        if m.unsigned_abs() as usize > n {
            0.0
        } else {
            values[slot(n, m)]
        }
    };
    for n in 2..=n_max {
        for m in 0..=n as i64 {
            let value = 2.0 * x * at(&values, n - 1, m) - at(&values, n - 2, m)
                + (2 * m - 1) as f64 * sin * at(&values, n - 1, m - 1);
            values[slot(n, m)] = value;
        }
        for m in 1..=n as i64 {
            let ratio = factorial(n - m as usize) / factorial(n + m as usize);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            values[slot(n, -m)] = sign * ratio * values[slot(n, m)];
        }
    }
    Ok(LegendreTable { x, n_max, values })
}
