//! JSON interchange for modules and triples.
//!
//! Matrices are row-major arrays of `[re, im]` pairs. Floats are written in
//! shortest round-trip form, so a save/load cycle is exact.

use crate::error::{Error, Result};
use crate::group::{GroupKind, GroupSpec};
use crate::lift::{Provenance, SpectralTriple};
use crate::module::{FredholmModule, AXIOM_TOL};
use crate::operator::{DenseOperator, HermitianOperator, HERMITICITY_TOL};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Serializes non-finite floats as `null` and reads `null` back as `+∞`.
pub mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &DenseOperator) -> MatrixJson {
    (0..m.dim()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson, dim: usize, name: &str) -> Result<DenseOperator> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Schema(format!("{name} must be a {dim}x{dim} matrix")));
    }
    let data = rows.iter().flatten().map(|[re, im]| Complex64::new(*re, *im)).collect();
    DenseOperator::from_row_major(dim, data).map_err(|e| Error::Schema(format!("{name}: {e}")))
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    #[serde(flatten)]
    kind: GroupKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuleFile {
    dim: usize,
    #[serde(rename = "F")]
    f: MatrixJson,
    unitaries: BTreeMap<String, MatrixJson>,
    group: GroupJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interior_mask: Option<Vec<usize>>,
    #[serde(default)]
    metadata: serde_json::Value,
}

pub fn module_to_json(m: &FredholmModule) -> Result<String> {
    let interior_mask = if m.interior().iter().all(|&b| b) {
        None
    } else {
        Some(m.interior().iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
    };
    let file = ModuleFile {
        dim: m.dim(),
        f: matrix_to_json(m.f()),
        unitaries: m.unitaries().iter().map(|(l, u)| (l.clone(), matrix_to_json(u))).collect(),
        group: GroupJson { kind: m.group().kind().clone(), generators: Some(m.group().generator_labels().to_vec()) },
        interior_mask,
        metadata: m.metadata().clone(),
    };
    Ok(serde_json::to_string(&file)? + "\n")
}

pub fn module_from_json(text: &str) -> Result<FredholmModule> {
    let file: ModuleFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let dim = file.dim;
    if dim == 0 {
        return Err(Error::Schema("dim must be positive".into()));
    }
    let f = matrix_from_json(&file.f, dim, "F")?;
    let f = HermitianOperator::with_tolerance(f, AXIOM_TOL)?;
    let labels = match file.group.generators {
        Some(labels) => labels,
        None => file.unitaries.keys().cloned().collect(),
    };
    let group = GroupSpec::new(file.group.kind, labels)?;
    let mut unitaries = Vec::new();
    for label in group.generator_labels() {
        let rows = file
            .unitaries
            .get(label)
            .ok_or_else(|| Error::Schema(format!("missing unitary for generator {label:?}")))?;
        unitaries.push((label.clone(), matrix_from_json(rows, dim, label)?));
    }
    if file.unitaries.len() != unitaries.len() {
        return Err(Error::Schema("unitaries contain labels that are not group generators".into()));
    }
    let interior = match file.interior_mask {
        None => None,
        Some(idx) => {
            let mut mask = vec![false; dim];
            for i in idx {
                if i >= dim {
                    return Err(Error::Schema(format!("interior index {i} out of range")));
                }
                mask[i] = true;
            }
            Some(mask)
        }
    };
    FredholmModule::new(f, unitaries, group, interior, file.metadata, AXIOM_TOL)
}

pub fn save_module(path: &Path, m: &FredholmModule) -> Result<()> {
    std::fs::write(path, module_to_json(m)?)?;
    Ok(())
}

pub fn load_module(path: &Path) -> Result<FredholmModule> {
    module_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripleFile {
    dim: usize,
    #[serde(rename = "F")]
    f: MatrixJson,
    #[serde(rename = "D")]
    d: MatrixJson,
    #[serde(rename = "absD")]
    abs_d: MatrixJson,
    #[serde(rename = "P0")]
    p0: MatrixJson,
    theta: MatrixJson,
    #[serde(rename = "G")]
    g: MatrixJson,
    provenance: Provenance,
}

pub fn triple_to_json(t: &SpectralTriple) -> Result<String> {
    let file = TripleFile {
        dim: t.dim(),
        f: matrix_to_json(&t.f),
        d: matrix_to_json(&t.d),
        abs_d: matrix_to_json(&t.abs_d),
        p0: matrix_to_json(&t.p0),
        theta: matrix_to_json(&t.theta),
        g: matrix_to_json(&t.g),
        provenance: t.provenance.clone(),
    };
    Ok(serde_json::to_string(&file)? + "\n")
}

pub fn triple_from_json(text: &str) -> Result<SpectralTriple> {
    let file: TripleFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let dim = file.dim;
    let herm = |rows: &MatrixJson, name: &str| -> Result<HermitianOperator> {
        HermitianOperator::with_tolerance(matrix_from_json(rows, dim, name)?, HERMITICITY_TOL)
    };
    let p0 = herm(&file.p0, "P0")?;
    let p1 = HermitianOperator::identity(dim).sub(&p0)?;
    Ok(SpectralTriple {
        d: herm(&file.d, "D")?,
        abs_d: herm(&file.abs_d, "absD")?,
        f: herm(&file.f, "F")?,
        p0,
        p1,
        theta: herm(&file.theta, "theta")?,
        g: herm(&file.g, "G")?,
        provenance: file.provenance,
    })
}

pub fn save_triple(path: &Path, t: &SpectralTriple) -> Result<()> {
    std::fs::write(path, triple_to_json(t)?)?;
    Ok(())
}

pub fn load_triple(path: &Path) -> Result<SpectralTriple> {
    triple_from_json(&std::fs::read_to_string(path)?)
}
