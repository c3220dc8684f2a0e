//! Input spaces with independent uniform marginals and the affine map onto
//! the standard cube `[-1, 1]^n`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking that a coordinate lies on the standard cube.
pub const CUBE_TOLERANCE: f64 = 1e-12;

/// Named input parameters, each uniformly distributed between its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInputSpace")]
pub struct InputSpace {
    names: Vec<String>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawInputSpace {
    names: Vec<String>,
    bounds: Vec<(f64, f64)>,
}

impl TryFrom<RawInputSpace> for InputSpace {
    type Error = Error;

    fn try_from(raw: RawInputSpace) -> Result<Self> {
        InputSpace::new(raw.names, raw.bounds)
    }
}

impl InputSpace {
    pub fn new(names: Vec<String>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidSpace("at least one dimension is required".into()));
        }
        if names.len() != bounds.len() {
            return Err(Error::InvalidSpace(format!(
                "{} names for {} bounds",
                names.len(),
                bounds.len()
            )));
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpace(format!(
                    "dimension {j} ({}) has bounds ({lo}, {hi}); need finite lower < upper",
                    names[j]
                )));
            }
        }
        Ok(Self { names, bounds })
    }

    /// The standard cube itself, with parameters named `x1..xn`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(
            (1..=n).map(|j| format!("x{j}")).collect(),
            vec![(-1.0, 1.0); n],
        )
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Map a native point onto the standard cube.
    pub fn to_standard(&self, native: &[f64]) -> Result<StandardPoint> {
        self.check_dim(native.len())?;
        let mut coords = Vec::with_capacity(native.len());
        for (j, (&x, &(lo, hi))) in native.iter().zip(&self.bounds).enumerate() {
            if !(lo..=hi).contains(&x) {
                return Err(Error::OutOfBounds {
                    dim: j,
                    name: self.names[j].clone(),
                    value: x,
                    lower: lo,
                    upper: hi,
                });
            }
            coords.push((2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0));
        }
        Ok(StandardPoint(coords))
    }

    /// Inverse of [`InputSpace::to_standard`].
    pub fn from_standard(&self, z: &StandardPoint) -> Vec<f64> {
        self.from_standard_slice(z.as_slice())
    }

    pub fn from_standard_slice(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.bounds)
            .map(|(&zj, &(lo, hi))| {
                if zj >= 1.0 {
                    hi
                } else if zj <= -1.0 {
                    lo
                } else {
                    lo + 0.5 * (zj + 1.0) * (hi - lo)
                }
            })
            .collect()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}

/// A point on the standard cube.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardPoint(Vec<f64>);

impl StandardPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        for (j, &z) in coords.iter().enumerate() {
            if !(z.abs() <= 1.0 + CUBE_TOLERANCE) {
                return Err(Error::OutOfBounds {
                    dim: j,
                    name: format!("z{}", j + 1),
                    value: z,
                    lower: -1.0,
                    upper: 1.0,
                });
            }
        }
        Ok(Self(coords))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Joint density of the uniform distribution on `[-1, 1]^n`.
pub fn joint_density(z: &[f64]) -> f64 {
    0.5f64.powi(z.len() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(bounds: &[(f64, f64)]) -> InputSpace {
        InputSpace::new(
            (0..bounds.len()).map(|j| format!("p{j}")).collect(),
            bounds.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn affine_map_examples() {
        let s = space(&[(0.0, 10.0)]);
        assert_eq!(s.to_standard(&[5.0]).unwrap().as_slice(), &[0.0]);
        assert_eq!(s.to_standard(&[10.0]).unwrap().as_slice(), &[1.0]);
        assert_eq!(s.from_standard_slice(&[0.0]), vec![5.0]);

        let s = space(&[(-2.0, 4.0)]);
        assert_eq!(s.to_standard(&[1.0]).unwrap().as_slice(), &[0.0]);
        assert_eq!(s.from_standard_slice(&[1.0]), vec![4.0]);
    }

    #[test]
    fn out_of_bounds_names_dimension() {
        let s = InputSpace::new(
            vec!["a".into(), "rate".into()],
            vec![(0.0, 1.0), (0.0, 2.0)],
        )
        .unwrap();
        match s.to_standard(&[0.5, 3.0]) {
            Err(Error::OutOfBounds { dim, name, .. }) => {
                assert_eq!(dim, 1);
                assert_eq!(name, "rate");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(InputSpace::new(vec![], vec![]).is_err());
        assert!(InputSpace::new(vec!["a".into()], vec![(1.0, 1.0)]).is_err());
        assert!(InputSpace::new(vec!["a".into()], vec![(0.0, 1.0), (0.0, 1.0)]).is_err());
        let err = serde_json::from_str::<InputSpace>(r#"{"names":["a"],"bounds":[[2,1]]}"#);
        assert!(err.is_err());
    }

    #[test]
    fn json_round_trip() {
        let s: InputSpace =
            serde_json::from_str(r#"{"names":["a","b"],"bounds":[[0,10],[-2,4]]}"#).unwrap();
        assert_eq!(s.dim(), 2);
        let back: InputSpace = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn joint_density_values() {
        assert_eq!(joint_density(&[0.0]), 0.5);
        assert_eq!(joint_density(&[0.0; 2]), 0.25);
        assert_eq!(joint_density(&[0.0; 4]), 0.0625);
    }

    #[test]
    fn standard_point_allows_boundary_slack() {
        assert!(StandardPoint::new(vec![1.0 + 1e-13, -1.0]).is_ok());
        assert!(StandardPoint::new(vec![1.0 + 1e-9]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_is_identity(
            lo in -1e3f64..1e3,
            width in 1e-3f64..1e3,
            t in 0.0f64..=1.0,
        ) {
            let s = space(&[(lo, lo + width)]);
            let x = lo + t * width;
            let z = s.to_standard(&[x]).unwrap();
            let back = s.from_standard(&z)[0];
            proptest::prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(width));
            let z2 = s.to_standard(&[back]).unwrap().as_slice()[0];
            proptest::prop_assert!((z2 - z.as_slice()[0]).abs() <= 1e-12);
        }
    }
}
