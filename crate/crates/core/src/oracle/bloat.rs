// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{OracleError, SymbolicPlan};

/// Intermediate partial products versus final output nonzeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BloatReport {
    pub pp_interim: u64,
    pub nnz_output: u64,
    pub bloat_percent: f64,
}

impl BloatReport {
    pub fn from_counts(pp_interim: u64, nnz_output: u64) -> Result<Self, OracleError> {
        if nnz_output == 0 {
            return Err(OracleError::UndefinedBloat);
        }
        Ok(Self {
            pp_interim,
            nnz_output,
            bloat_percent: (pp_interim as i128 - nnz_output as i128) as f64 * 100.0 / nnz_output as f64,
        })
    }
}

pub fn bloat_report(plan: &SymbolicPlan) -> Result<BloatReport, OracleError> {
    BloatReport::from_counts(plan.total_fma, plan.total_out_nnz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::CsrMatrix;
    use crate::oracle::symbolic_pass;

    #[test]
    fn direct_formula() {
        assert_eq!(BloatReport::from_counts(305, 100).unwrap().bloat_percent, 205.0);
        assert_eq!(BloatReport::from_counts(0, 0), Err(OracleError::UndefinedBloat));
    }

    #[test]
    fn diagonal_has_no_bloat() {
        let d = CsrMatrix::<f64>::identity(10);
        let r = bloat_report(&symbolic_pass(&d, &d).unwrap()).unwrap();
        assert_eq!(r.bloat_percent, 0.0);
    }
}
