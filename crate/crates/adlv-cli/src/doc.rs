//! The JSON-lines document for an extended semi-module.

use adlv_core::{Coweight, EsmCandidate, ExtendedSemiModule, SemiModule, Slope};
use serde::{Deserialize, Serialize};

/// Canonical serialization of one extended semi-module. `phi` lists
/// `[a, φ(a)]` for every `a ∈ A` in the window `[min B, window_bound)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EsmDocument {
    pub m: i64,
    pub h: i64,
    pub mu: Vec<i64>,
    #[serde(rename = "B")]
    pub b: Vec<i64>,
    pub phi: Vec<(i64, i64)>,
    pub window_bound: i64,
    pub v_set: Vec<(i64, i64)>,
    pub dim: usize,
    pub cyclic: bool,
}

impl EsmDocument {
    pub fn from_esm(esm: &ExtendedSemiModule) -> Self {
        EsmDocument {
            m: esm.slope().m(),
            h: esm.slope().h(),
            mu: esm.mu().entries().to_vec(),
            b: esm.base().gens().to_vec(),
            phi: esm.phi_pairs(),
            window_bound: esm.window().1,
            v_set: esm.v_set().pairs().to_vec(),
            dim: esm.v_set().len(),
            cyclic: esm.is_cyclic(),
        }
    }

    /// Re-validates the document into an extended semi-module; every field
    /// must round-trip exactly.
    pub fn to_esm(&self) -> Result<ExtendedSemiModule, String> {
        let slope = Slope::new(self.m, self.h).map_err(|e| e.to_string())?;
        let base = SemiModule::normalize(slope, &self.b).map_err(|e| e.to_string())?;
        if base.gens() != &self.b[..] {
            return Err("B is not the normalized generator family".into());
        }
        let cand = EsmCandidate {
            base,
            mu: Coweight::new(self.mu.clone()),
            phi_overrides: self.phi.iter().copied().collect(),
        };
        let esm = cand.validate().map_err(|r| {
            format!(
                "document violates conditions {:?} of the definition",
                r.violated_conditions()
            )
        })?;
        if &EsmDocument::from_esm(&esm) != self {
            return Err("document fields do not round-trip".into());
        }
        Ok(esm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_all_strata_of_a_cell() {
        let slope = Slope::new(4, 5).unwrap();
        let mu = Coweight::new(vec![0, 0, 0, 2, 2]);
        for esm in adlv_core::enumerate_esm(slope, &mu).unwrap() {
            let doc = EsmDocument::from_esm(&esm);
            let json = serde_json::to_string(&doc).unwrap();
            let parsed: EsmDocument = serde_json::from_str(&json).unwrap();
            assert_eq!(parsed, doc);
            let back = parsed.to_esm().unwrap();
            assert_eq!(back, esm);
        }
    }

    #[test]
    fn tampered_document_is_rejected() {
        let slope = Slope::new(4, 5).unwrap();
        let mu = Coweight::new(vec![0, 0, 1, 1, 2]);
        let esm = &adlv_core::enumerate_esm(slope, &mu).unwrap()[0];
        let mut doc = EsmDocument::from_esm(esm);
        doc.dim += 1;
        assert!(doc.to_esm().is_err());
        let mut doc = EsmDocument::from_esm(esm);
        doc.phi[0].1 += 7;
        assert!(doc.to_esm().is_err());
    }
}
