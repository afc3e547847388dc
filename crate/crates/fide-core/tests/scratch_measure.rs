//! Throwaway measurement (deleted before commit).

use fide_core::coeffs::{gamma_entry, KernelTable};
use fide_core::specfun::GaussJacobiRule;

#[test]
fn measure_row_sum_defect() {
    for &alpha in &[0.1f64, 0.5, 0.9] {
        let rule = GaussJacobiRule::new(24, alpha - 1.0, 0.0).unwrap();
        let table = KernelTable::new(alpha, 1.0, 2002, &rule).unwrap();
        for p in [0usize, 1] {
            let mut worst = 0.0f64;
            let mut worst_k = 0;
            for k in [10usize, 100, 500, 1000, 1500, 2000] {
                let sum: f64 = (0..=k).map(|j| gamma_entry(&table, p, k, j)).sum();
                if sum.abs() > worst {
                    worst = sum.abs();
                    worst_k = k;
                }
            }
            println!("alpha={alpha} p={p}: worst |row sum| = {worst:.3e} at k={worst_k}");
        }
    }
}
