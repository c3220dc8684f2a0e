use serde::{Deserialize, Serialize};

use super::basis::{MultiIndex, PceBasis, TruncationScheme};
use super::fit::{FitDiagnostics, FitMethod, PceModel};
use crate::error::{Error, Result};

/// On-disk form of a [`PceModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PceModelFile {
    pub kind: String,
    pub scheme: String,
    pub p: u32,
    pub n: usize,
    pub indices: Vec<MultiIndex>,
    pub coefficients: Vec<f64>,
    pub fit_method: FitMethod,
    pub diagnostics: FitDiagnostics,
}

pub(crate) const PCE_KIND: &str = "pce";

impl From<&PceModel> for PceModelFile {
    fn from(model: &PceModel) -> Self {
        let basis = model.basis();
        let scheme = match basis.scheme() {
            TruncationScheme::TotalOrder(_) => "total-order",
            TruncationScheme::TensorProduct(_) => "tensor-product",
        };
        Self {
            kind: PCE_KIND.into(),
            scheme: scheme.into(),
            p: basis.scheme().order(),
            n: basis.dim(),
            indices: basis.indices().to_vec(),
            coefficients: model.coefficients().to_vec(),
            fit_method: model.fit_method(),
            diagnostics: model.diagnostics().clone(),
        }
    }
}

impl TryFrom<PceModelFile> for PceModel {
    type Error = Error;

    fn try_from(file: PceModelFile) -> Result<Self> {
        if file.kind != PCE_KIND {
            return Err(Error::InvalidInput(format!(
                "expected a '{PCE_KIND}' model, found '{}'",
                file.kind
            )));
        }
        let scheme = match file.scheme.as_str() {
            "total-order" => TruncationScheme::TotalOrder(file.p),
            "tensor-product" => TruncationScheme::TensorProduct(file.p),
            other => {
                return Err(Error::InvalidInput(format!("unknown truncation scheme '{other}'")))
            }
        };
        let basis = PceBasis::from_indices(file.n, scheme, file.indices)?;
        PceModel::from_coefficients(basis, file.coefficients, file.fit_method, file.diagnostics)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::sobol;
    use crate::polychaos::{build_basis, fit_regression};

    #[test]
    fn json_round_trip_is_exact() {
        let basis = build_basis(3, TruncationScheme::TotalOrder(2)).unwrap();
        let d = sobol(20, 3, 9).unwrap();
        let y: Vec<f64> = d.rows().map(|z| z[0].sin() * z[1] + z[2]).collect();
        let model = fit_regression(&d, &y, &basis).unwrap();
        let text = serde_json::to_string_pretty(&PceModelFile::from(&model)).unwrap();
        let back: PceModel = serde_json::from_str::<PceModelFile>(&text)
            .unwrap()
            .try_into()
            .unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn rejects_other_kinds() {
        let basis = build_basis(1, TruncationScheme::TotalOrder(1)).unwrap();
        let model = PceModel::from_coefficients(
            basis,
            vec![1.0, 2.0],
            FitMethod::Regression,
            FitDiagnostics::default(),
        )
        .unwrap();
        let mut file = PceModelFile::from(&model);
        file.kind = "gp".into();
        assert!(PceModel::try_from(file).is_err());
    }
}
