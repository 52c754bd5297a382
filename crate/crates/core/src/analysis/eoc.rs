//! Empirical order of convergence from (h, error) sequences.

use crate::analysis::ConvergenceRow;

/// Per-step orders and a least-squares fit over the last rows.
#[derive(Debug, Clone)]
pub struct EocSummary {
    /// order_k = log(e_k / e_{k+1}) / log(h_k / h_{k+1})
    pub step_orders: Vec<f64>,
    /// Least-squares slope of log e vs log h over the last three usable rows.
    pub lsq_order: f64,
    /// Rows dropped because their error was zero.
    pub skipped_zero_rows: usize,
}

/// Orders from a convergence table. Zero-error rows are excluded (with a
/// note in the summary) since their logarithm is undefined.
pub fn eoc_orders(rows: &[ConvergenceRow]) -> Option<EocSummary> {
    let usable: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.error > 0.0).collect();
    let skipped = rows.len() - usable.len();
    if usable.len() < 2 {
        return None;
    }
    let mut step_orders = Vec::with_capacity(usable.len() - 1);
    for w in usable.windows(2) {
        let order = (w[0].error / w[1].error).ln() / (w[0].h / w[1].h).ln();
        step_orders.push(order);
    }
    let tail = &usable[usable.len().saturating_sub(3)..];
    let lsq_order = lsq_slope(
        &tail.iter().map(|r| r.h.ln()).collect::<Vec<_>>(),
        &tail.iter().map(|r| r.error.ln()).collect::<Vec<_>>(),
    );
    Some(EocSummary { step_orders, lsq_order, skipped_zero_rows: skipped })
}

fn lsq_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ErrorKind;
    use approx::assert_relative_eq;

    fn rows(hs: &[f64], es: &[f64]) -> Vec<ConvergenceRow> {
        hs.iter()
            .zip(es)
            .enumerate()
            .map(|(i, (&h, &e))| ConvergenceRow {
                level: i,
                h,
                dofs: 100 * (i + 1),
                error: e,
                kind: ErrorKind::HcurlSeminorm,
            })
            .collect()
    }

    #[test]
    fn exact_second_order() {
        let hs = [0.5, 0.25, 0.125, 0.0625];
        let es: Vec<f64> = hs.iter().map(|h| h * h).collect();
        let s = eoc_orders(&rows(&hs, &es)).unwrap();
        for o in &s.step_orders {
            assert_relative_eq!(*o, 2.0, epsilon = 1e-12);
        }
        assert_relative_eq!(s.lsq_order, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_error_is_order_zero() {
        let hs = [0.5, 0.25, 0.125];
        let es = [0.3, 0.3, 0.3];
        let s = eoc_orders(&rows(&hs, &es)).unwrap();
        for o in &s.step_orders {
            assert_relative_eq!(*o, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_rows_are_skipped() {
        let hs = [0.5, 0.25, 0.125];
        let es = [0.0, 0.0, 0.0];
        assert!(eoc_orders(&rows(&hs, &es)).is_none());
        let es = [0.4, 0.1, 0.0];
        let s = eoc_orders(&rows(&hs, &es)).unwrap();
        assert_eq!(s.skipped_zero_rows, 1);
        assert_eq!(s.step_orders.len(), 1);
        assert_relative_eq!(s.step_orders[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn nonuniform_ladder() {
        // e = h^1.5 on a 1/n ladder.
        let hs = [1.0f64, 0.5, 1.0 / 3.0, 0.25];
        let es: Vec<f64> = hs.iter().map(|h| h.powf(1.5)).collect();
        let s = eoc_orders(&rows(&hs, &es)).unwrap();
        assert_relative_eq!(s.lsq_order, 1.5, epsilon = 1e-12);
    }
}
