//! The TOML job/result document. Every subcommand reads one document and
//! writes it back with its own section filled in, so outputs chain.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub schema_version: u32,
    pub design: DesignSection,
    #[serde(default)]
    pub group: GroupSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbits: Option<OrbitsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<EnumerationSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<MatrixRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub designs: Vec<DesignRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub v: u32,
    pub k: u32,
    pub lambda2: u64,
    pub q: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    /// Row-major `v x v` matrices acting on row vectors from the right.
    #[serde(default)]
    pub generators: Vec<Vec<Vec<u8>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub lambda1: u64,
    pub b: u64,
    pub phi: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitsSection {
    pub group_order: u64,
    pub point_sizes: Vec<u64>,
    pub point_representatives: Vec<Vec<u8>>,
    /// Lengths of the `k`-space orbits, non-increasing.
    pub block_orbit_lengths: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSection {
    /// `[l, r, s, sigma]` with 1-based orbit indices; zero entries omitted.
    pub entries: Vec<[u64; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSymmetry {
    /// Point orbits of equal size may be permuted.
    Sizes,
    /// Only permutations that also preserve the sigma table.
    Sigma,
    /// Rows stay in point orbit order.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerationSection {
    pub profiles: Vec<Vec<u64>>,
    pub row_symmetry: RowSymmetry,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixStatus {
    Unfiltered,
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationRecord {
    pub l: u64,
    pub r: u64,
    pub s: u64,
    pub value: u64,
    pub lower: u64,
    pub upper: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    pub block_lengths: Vec<u64>,
    pub rho: Vec<Vec<u64>>,
    pub status: MatrixStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<ViolationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRecord {
    /// 1-based index into `matrices` of the guiding matrix, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<u64>,
    /// 1-based indices of the chosen `k`-space orbits.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selected_orbits: Vec<u64>,
    /// Blocks as RREF basis matrices.
    pub blocks: Vec<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid: Option<bool>,
}

impl Document {
    pub fn new(design: DesignSection, generators: Vec<Vec<Vec<u8>>>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            design,
            group: GroupSection { generators },
            params: None,
            orbits: None,
            sigma: None,
            enumeration: None,
            matrices: Vec::new(),
            designs: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let doc: Document = toml::from_str(text).map_err(|e| e.to_string())?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            ));
        }
        Ok(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("document serializes")
    }
}
