use rand::seq::SliceRandom;
use rand::Rng;

use super::{Design, DesignKind};
use crate::error::{Error, Result};
use crate::seeds;

/// Random Latin hypercube with `m` points in `n` dimensions.
///
/// Along each axis the `m` coordinates occupy the `m` cells
/// `[i/m, (i+1)/m)` of the unit interval exactly once (before the map to
/// `[-1, 1]`), with a uniform position inside each cell.
pub fn latin_hypercube(m: usize, n: usize, seed: u64) -> Result<Design> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!(
            "Latin hypercube needs m >= 1 and n >= 1, got m={m}, n={n}"
        )));
    }
    let mut rng = seeds::rng(seed);
    let mut points = vec![0.0; m * n];
    let mut cells: Vec<usize> = (0..m).collect();
    for j in 0..n {
        cells.shuffle(&mut rng);
        for (i, &cell) in cells.iter().enumerate() {
            let jitter: f64 = rng.random();
            let u = (cell as f64 + jitter) / m as f64;
            points[i * n + j] = (2.0 * u - 1.0).min(1.0);
        }
    }
    Ok(Design::from_parts(
        n,
        points,
        DesignKind::LatinHypercube,
        None,
        None,
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn occupancy(d: &Design, j: usize) -> Vec<usize> {
        let m = d.len();
        let mut counts = vec![0; m];
        for row in d.rows() {
            let u = 0.5 * (row[j] + 1.0);
            counts[((u * m as f64).floor() as usize).min(m - 1)] += 1;
        }
        counts
    }

    #[test]
    fn two_points_split_the_line() {
        let d = latin_hypercube(2, 1, 5).unwrap();
        let mut z: Vec<f64> = d.rows().map(|r| r[0]).collect();
        z.sort_by(f64::total_cmp);
        assert!((-1.0..0.0).contains(&z[0]));
        assert!((0.0..=1.0).contains(&z[1]));
    }

    #[test]
    fn seeds_change_points_not_strata() {
        let a = latin_hypercube(50, 3, 1).unwrap();
        let b = latin_hypercube(50, 3, 2).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, latin_hypercube(50, 3, 1).unwrap());
        for j in 0..3 {
            assert!(occupancy(&a, j).iter().all(|&c| c == 1));
            assert!(occupancy(&b, j).iter().all(|&c| c == 1));
        }
    }

    proptest::proptest! {
        #[test]
        fn marginals_are_exactly_stratified(m in 1usize..300, n in 1usize..5, seed in 0u64..1000) {
            let d = latin_hypercube(m, n, seed).unwrap();
            for j in 0..n {
                proptest::prop_assert!(occupancy(&d, j).iter().all(|&c| c == 1));
            }
        }
    }
}
