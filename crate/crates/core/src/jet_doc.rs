//! JSON document format for jets.
//!
//! A document carries one of three payloads: the (eta, xi) data of a
//! special Hermitian jet, the zeta blocks of a quaternionic jet, or the
//! precomputed derivative forms (d omega, d psi_+, d psi_-) from which a
//! jet is reconstructed on load.  Forms are stored sparsely as 1-based
//! increasing multi-indices with coefficients, so fixtures stay readable
//! and diffs stay small.  Serialization is deterministic: saving a loaded
//! document reproduces it byte for byte.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::{basis_masks, mask_indices, Form, Vector};
use crate::hyper::{build_hyper, HyperTorsionJet};
use crate::recover::full_recover;
use crate::structure::{standard_structure, MAX_COMPLEX_DIM};
use crate::torsion::{DerivedDerivatives, SUTorsionJet};

/// Format version written and accepted by this build.
pub const SCHEMA_VERSION: &str = "1";

/// Sparse form payload: degree plus `[multi-index, coefficient]` pairs.
/// Multi-indices are 1-based and strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormDocument {
    pub degree: usize,
    pub entries: Vec<(Vec<usize>, f64)>,
}

impl FormDocument {
    /// Serializes a form, dropping exact zeros.  Entries follow the
    /// lexicographic order of the increasing multi-indices.
    pub fn from_form(f: &Form) -> Self {
        let entries = basis_masks(f.dim(), f.degree())
            .iter()
            .zip(f.coeffs())
            .filter(|(_, &c)| c != 0.0)
            .map(|(&mask, &c)| {
                let indices = mask_indices(mask).iter().map(|i| i + 1).collect();
                (indices, c)
            })
            .collect();
        FormDocument { degree: f.degree(), entries }
    }

    /// Rebuilds the dense form on an `m`-dimensional frame, rejecting
    /// malformed multi-indices.  `label` names the field in errors.
    pub fn to_form(&self, m: usize, label: &str) -> Result<Form> {
        if self.degree > m {
            return Err(Error::Schema(format!(
                "{label}: degree {} exceeds the frame dimension {m}",
                self.degree
            )));
        }
        let mut seen = vec![false; basis_masks(m, self.degree).len()];
        let mut form = Form::zero(m, self.degree);
        for (indices, value) in &self.entries {
            if indices.len() != self.degree {
                return Err(Error::Schema(format!(
                    "{label}: multi-index {indices:?} has length {}, expected {}",
                    indices.len(),
                    self.degree
                )));
            }
            if !value.is_finite() {
                return Err(Error::Schema(format!(
                    "{label}: coefficient at {indices:?} is not finite"
                )));
            }
            for pair in indices.windows(2) {
                if pair[1] <= pair[0] {
                    return Err(Error::Schema(format!(
                        "{label}: multi-index {indices:?} is not strictly increasing"
                    )));
                }
            }
            if indices.first().is_some_and(|&i| i == 0)
                || indices.last().is_some_and(|&i| i > m)
            {
                return Err(Error::Schema(format!(
                    "{label}: multi-index {indices:?} outside 1..={m}"
                )));
            }
            let zero_based: Vec<usize> = indices.iter().map(|i| i - 1).collect();
            let mut mask = 0u16;
            for &i in &zero_based {
                mask |= 1 << i;
            }
            let rank = basis_masks(m, self.degree)
                .iter()
                .position(|&b| b == mask)
                .expect("validated multi-index has a storage rank");
            if seen[rank] {
                return Err(Error::Schema(format!(
                    "{label}: duplicate multi-index {indices:?}"
                )));
            }
            seen[rank] = true;
            form.set_coeff(&zero_based, *value);
        }
        Ok(form)
    }
}

/// On-disk description of a jet.  Exactly one payload group may be
/// populated: `eta`+`xi` (kind "su"), `zeta` (kind "hyper"), or the
/// derivative forms (kind "su").
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetDocument {
    pub schema_version: String,
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_omega: Option<FormDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_psi_plus: Option<FormDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_psi_minus: Option<FormDocument>,
}

/// In-memory result of loading a document.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum LoadedJet {
    Su(SUTorsionJet),
    Hyper(HyperTorsionJet),
    /// Document carried derivative forms; the unique jet reproducing them
    /// is attached together with its full derivative package.
    Differentials {
        jet: SUTorsionJet,
        derived: Box<DerivedDerivatives>,
    },
}

fn matrix_rows(mat: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..mat.nrows())
        .map(|r| (0..mat.ncols()).map(|c| mat[(r, c)]).collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], m: usize, label: &str) -> Result<DMatrix<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Schema(format!("{label}: expected a {m}x{m} matrix")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Schema(format!("{label}: entries must be finite")));
    }
    Ok(DMatrix::from_fn(m, m, |r, c| rows[r][c]))
}

/// Document with the (eta, xi) payload of a special Hermitian jet.
pub fn document_from_su(jet: &SUTorsionJet) -> JetDocument {
    JetDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        kind: "su".to_string(),
        n: jet.structure().n(),
        eta: Some(jet.eta().coords.clone()),
        xi: Some(jet.xi().iter().map(matrix_rows).collect()),
        zeta: None,
        d_omega: None,
        d_psi_plus: None,
        d_psi_minus: None,
    }
}

/// Document with the zeta payload of a quaternionic jet.
pub fn document_from_hyper(jet: &HyperTorsionJet) -> JetDocument {
    JetDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        kind: "hyper".to_string(),
        n: jet.structure().n(),
        eta: None,
        xi: None,
        zeta: Some(jet.zeta().iter().map(matrix_rows).collect()),
        d_omega: None,
        d_psi_plus: None,
        d_psi_minus: None,
    }
}

/// Document with derivative forms.  For n = 1 the Kahler form has top
/// degree, its exterior derivative is identically zero and the field is
/// omitted.
pub fn document_from_differentials(
    n: usize,
    d_omega: &Form,
    d_psi_plus: &Form,
    d_psi_minus: &Form,
) -> JetDocument {
    JetDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        kind: "su".to_string(),
        n,
        eta: None,
        xi: None,
        zeta: None,
        d_omega: if n >= 2 {
            Some(FormDocument::from_form(d_omega))
        } else {
            None
        },
        d_psi_plus: Some(FormDocument::from_form(d_psi_plus)),
        d_psi_minus: Some(FormDocument::from_form(d_psi_minus)),
    }
}

/// Validates a parsed document and builds the jet it describes.  The
/// first violated invariant is reported by name with its residual.
pub fn load_document(doc: &JetDocument) -> Result<LoadedJet> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema_version `{}`, expected `{SCHEMA_VERSION}`",
            doc.schema_version
        )));
    }
    let has_su = doc.eta.is_some() || doc.xi.is_some();
    let has_hyper = doc.zeta.is_some();
    let has_forms =
        doc.d_omega.is_some() || doc.d_psi_plus.is_some() || doc.d_psi_minus.is_some();
    if [has_su, has_hyper, has_forms].iter().filter(|&&b| b).count() != 1 {
        return Err(Error::Schema(
            "exactly one of (eta, xi), (zeta), (d_omega, d_psi_plus, d_psi_minus) \
             must be populated"
                .to_string(),
        ));
    }
    match doc.kind.as_str() {
        "su" => {
            if has_hyper {
                return Err(Error::Schema(
                    "kind \"su\" cannot carry zeta blocks".to_string(),
                ));
            }
            if doc.n == 0 || doc.n > MAX_COMPLEX_DIM {
                return Err(Error::Schema(format!(
                    "kind \"su\" supports n in 1..={MAX_COMPLEX_DIM}, got {}",
                    doc.n
                )));
            }
            let s = standard_structure(doc.n)?;
            let m = s.dim();
            if has_su {
                let (Some(eta), Some(xi)) = (&doc.eta, &doc.xi) else {
                    return Err(Error::Schema(
                        "eta and xi must be populated together".to_string(),
                    ));
                };
                if eta.len() != m {
                    return Err(Error::Schema(format!(
                        "eta has {} coordinates, expected {m}",
                        eta.len()
                    )));
                }
                if eta.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Schema("eta entries must be finite".to_string()));
                }
                if xi.len() != m {
                    return Err(Error::Schema(format!(
                        "xi has {} blocks, expected {m}",
                        xi.len()
                    )));
                }
                let blocks = xi
                    .iter()
                    .enumerate()
                    .map(|(a, rows)| matrix_from_rows(rows, m, &format!("xi[{a}]")))
                    .collect::<Result<Vec<_>>>()?;
                let jet = SUTorsionJet::new(s, Vector::from_coords(eta.clone()), blocks)?;
                Ok(LoadedJet::Su(jet))
            } else {
                let (Some(dpp), Some(dpm)) = (&doc.d_psi_plus, &doc.d_psi_minus) else {
                    return Err(Error::Schema(
                        "the derivative payload needs both d_psi_plus and d_psi_minus"
                            .to_string(),
                    ));
                };
                let d_omega = match (&doc.d_omega, doc.n) {
                    (Some(d), _) => d.to_form(m, "d_omega")?,
                    (None, 1) => Form::zero(m, m),
                    (None, _) => {
                        return Err(Error::Schema(
                            "the derivative payload needs d_omega for n >= 2".to_string(),
                        ))
                    }
                };
                let expected = if doc.n >= 2 { 3 } else { 2 };
                if d_omega.degree() != expected {
                    return Err(Error::Schema(format!(
                        "d_omega has degree {}, expected {expected}",
                        d_omega.degree()
                    )));
                }
                let d_psi_plus = dpp.to_form(m, "d_psi_plus")?;
                let d_psi_minus = dpm.to_form(m, "d_psi_minus")?;
                if d_psi_plus.degree() != doc.n + 1 || d_psi_minus.degree() != doc.n + 1 {
                    return Err(Error::Schema(format!(
                        "d_psi forms must have degree {}",
                        doc.n + 1
                    )));
                }
                let jet = full_recover(&s, &d_omega, &d_psi_plus, &d_psi_minus)?;
                let derived = Box::new(jet.derive());
                Ok(LoadedJet::Differentials { jet, derived })
            }
        }
        "hyper" => {
            if !has_hyper {
                return Err(Error::Schema(
                    "kind \"hyper\" needs the zeta payload".to_string(),
                ));
            }
            if doc.n == 0 || doc.n > MAX_COMPLEX_DIM / 2 {
                return Err(Error::Schema(format!(
                    "kind \"hyper\" supports n in 1..={}, got {}",
                    MAX_COMPLEX_DIM / 2,
                    doc.n
                )));
            }
            let h = build_hyper(doc.n)?;
            let m = h.dim();
            let zeta = doc.zeta.as_ref().expect("group checked above");
            if zeta.len() != m {
                return Err(Error::Schema(format!(
                    "zeta has {} blocks, expected {m}",
                    zeta.len()
                )));
            }
            let blocks = zeta
                .iter()
                .enumerate()
                .map(|(a, rows)| matrix_from_rows(rows, m, &format!("zeta[{a}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(LoadedJet::Hyper(HyperTorsionJet::new(h, blocks)?))
        }
        other => Err(Error::Schema(format!(
            "unknown kind `{other}`, expected \"su\" or \"hyper\""
        ))),
    }
}

/// Canonical serialization: pretty-printed JSON with a trailing newline.
pub fn to_json_string(doc: &JetDocument) -> Result<String> {
    let mut out = serde_json::to_string_pretty(doc)?;
    out.push('\n');
    Ok(out)
}

/// Parses and validates a document from a JSON string.
pub fn load_from_str(text: &str) -> Result<(JetDocument, LoadedJet)> {
    let doc: JetDocument = serde_json::from_str(text)?;
    let jet = load_document(&doc)?;
    Ok((doc, jet))
}

/// Reads, parses and validates a jet document.
pub fn load_jet(path: &Path) -> Result<(JetDocument, LoadedJet)> {
    let text = std::fs::read_to_string(path)?;
    load_from_str(&text)
}

/// Writes a document in the canonical serialization.
pub fn save_jet(path: &Path, doc: &JetDocument) -> Result<()> {
    std::fs::write(path, to_json_string(doc)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recover::{report_from_jet, synthesize_jet, TorsionClass};
    use crate::structure::standard_structure;

    fn su_jet(n: usize, seed: u64) -> SUTorsionJet {
        SUTorsionJet::random(standard_structure(n).unwrap(), seed)
    }

    #[test]
    fn su_documents_round_trip_bit_identically() {
        for n in [1usize, 2, 3] {
            let jet = su_jet(n, 41 + n as u64);
            let doc = document_from_su(&jet);
            let text = to_json_string(&doc).unwrap();
            let (parsed, loaded) = load_from_str(&text).unwrap();
            assert_eq!(parsed, doc);
            assert_eq!(to_json_string(&parsed).unwrap(), text);
            let LoadedJet::Su(back) = loaded else {
                panic!("su document must load as a direct jet")
            };
            assert!(back.eta().residual_to(jet.eta()) == 0.0);
            for (a, b) in back.xi().iter().zip(jet.xi()) {
                assert!((a - b).norm() == 0.0);
            }
        }
    }

    #[test]
    fn hyper_documents_round_trip() {
        let h = build_hyper(1).unwrap();
        let jet = HyperTorsionJet::random(h, 7);
        let doc = document_from_hyper(&jet);
        let text = to_json_string(&doc).unwrap();
        let (parsed, loaded) = load_from_str(&text).unwrap();
        assert_eq!(to_json_string(&parsed).unwrap(), text);
        let LoadedJet::Hyper(back) = loaded else {
            panic!("hyper document must load as a quaternionic jet")
        };
        for (a, b) in back.zeta().iter().zip(jet.zeta()) {
            assert!((a - b).norm() == 0.0);
        }
    }

    #[test]
    fn differential_documents_reconstruct_the_jet() {
        for n in [1usize, 2, 3, 4] {
            let jet = su_jet(n, 91 + n as u64);
            let d = jet.derive();
            let doc =
                document_from_differentials(n, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus);
            let text = to_json_string(&doc).unwrap();
            let (_, loaded) = load_from_str(&text).unwrap();
            let LoadedJet::Differentials { jet: back, derived } = loaded else {
                panic!("derivative document must load as reconstructed data")
            };
            assert!(back.eta().residual_to(jet.eta()) < 1e-9, "n = {n}");
            assert!(derived.d_omega.residual_to(&d.d_omega) < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn zero_jet_document_is_torsion_free() {
        let jet = SUTorsionJet::zero(standard_structure(3).unwrap());
        let doc = document_from_su(&jet);
        let (_, loaded) = load_from_str(&to_json_string(&doc).unwrap()).unwrap();
        let LoadedJet::Su(back) = loaded else { panic!() };
        let report = report_from_jet(&back).unwrap();
        assert!(report.magnitudes.total() == 0.0);
    }

    #[test]
    fn non_skew_xi_is_rejected_by_name() {
        let jet = su_jet(2, 5);
        let mut doc = document_from_su(&jet);
        doc.xi.as_mut().unwrap()[0][0][1] += 0.5;
        let err = load_document(&doc).unwrap_err();
        match err {
            Error::InvariantViolation { name, residual } => {
                assert_eq!(name, "xi skew symmetry");
                assert!(residual > 1e-3);
            }
            other => panic!("expected a named invariant violation, got {other}"),
        }
    }

    #[test]
    fn payload_groups_are_mutually_exclusive() {
        let jet = su_jet(2, 6);
        let mut doc = document_from_su(&jet);
        doc.zeta = Some(vec![]);
        assert!(matches!(load_document(&doc).unwrap_err(), Error::Schema(_)));

        let mut doc = document_from_su(&jet);
        doc.xi = None;
        assert!(matches!(load_document(&doc).unwrap_err(), Error::Schema(_)));

        let h = build_hyper(1).unwrap();
        let mut doc = document_from_hyper(&HyperTorsionJet::zero(h));
        doc.kind = "su".to_string();
        assert!(matches!(load_document(&doc).unwrap_err(), Error::Schema(_)));
    }

    #[test]
    fn malformed_multi_indices_are_rejected() {
        let jet = su_jet(2, 8);
        let d = jet.derive();
        let good = document_from_differentials(2, &d.d_omega, &d.d_psi_plus, &d.d_psi_minus);

        let mut doc = good.clone();
        doc.d_omega.as_mut().unwrap().entries[0].0 = vec![0, 1, 2];
        assert!(matches!(load_document(&doc).unwrap_err(), Error::Schema(_)));

        let mut doc = good.clone();
        doc.d_omega.as_mut().unwrap().entries[0].0 = vec![3, 2, 1];
        assert!(matches!(load_document(&doc).unwrap_err(), Error::Schema(_)));

        let mut doc = good.clone();
        doc.d_omega.as_mut().unwrap().entries[0].0 = vec![1, 2, 9];
        assert!(matches!(load_document(&doc).unwrap_err(), Error::Schema(_)));

        let mut doc = good.clone();
        let first = doc.d_omega.as_ref().unwrap().entries[0].clone();
        doc.d_omega.as_mut().unwrap().entries.push(first);
        assert!(matches!(load_document(&doc).unwrap_err(), Error::Schema(_)));

        let mut doc = good;
        doc.schema_version = "0".to_string();
        assert!(matches!(load_document(&doc).unwrap_err(), Error::Schema(_)));
    }

    #[test]
    fn inconsistent_differentials_are_rejected() {
        let s = standard_structure(3).unwrap();
        let jet = synthesize_jet(&s, &[TorsionClass::W4], 17).unwrap();
        let d = jet.derive();
        let mut bad = d.d_psi_plus.clone();
        for c in bad.coeffs_mut() {
            *c += 0.05;
        }
        let doc = document_from_differentials(3, &d.d_omega, &bad, &d.d_psi_minus);
        let err = load_document(&doc).unwrap_err();
        assert!(
            matches!(err, Error::Inconsistent { .. } | Error::OffImage { .. }),
            "got {err}"
        );
    }

    #[test]
    fn file_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("jet.json");
        let doc = document_from_su(&su_jet(3, 99));
        save_jet(&path, &doc).unwrap();
        let first = std::fs::read(&path).unwrap();
        let (parsed, _) = load_jet(&path).unwrap();
        save_jet(&path, &parsed).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
    }
}
