use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Goldilocks, P};

use super::{linear_hash, WIDTH};

pub const HALF_FULL_ROUNDS: usize = 4;
pub const PARTIAL_ROUNDS: usize = 22;
/// Initial block plus one per full round.
pub const ROUND_CONSTANT_BLOCKS: usize = 1 + 2 * HALF_FULL_ROUNDS;

const BUNDLED: &str = include_str!("../../data/poseidon_goldilocks_t12.json");

#[derive(Debug, Error)]
pub enum ConstantsError {
    #[error("cannot read constants file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed constants file: {0}")]
    Parse(String),
    #[error("{what}: expected {expected} entries, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{location}: value {value} is not canonical (must be < {P})")]
    NonCanonical { location: String, value: String },
    #[error("unsupported round counts: {half_full_rounds} half-full / {partial_rounds} partial (expected {HALF_FULL_ROUNDS} / {PARTIAL_ROUNDS})")]
    Rounds {
        half_full_rounds: usize,
        partial_rounds: usize,
    },
}

/// The two vectors of one sparse partial-round layer: `v0` produces the new
/// first element, `v1` scales the old first element into the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialRoundConstants {
    pub v0: [Goldilocks; WIDTH],
    pub v1: [Goldilocks; WIDTH],
}

/// Dense 12x12 MDS matrix, applied as `state (row vector) x M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsMatrix {
    rows: [[Goldilocks; WIDTH]; WIDTH],
    // column c of M, stored as a row so output c is one dot product
    cols: [[Goldilocks; WIDTH]; WIDTH],
    cols_u8: Option<[[u8; WIDTH]; WIDTH]>,
}

impl MdsMatrix {
    pub fn new(rows: [[Goldilocks; WIDTH]; WIDTH]) -> Self {
        let cols: [[Goldilocks; WIDTH]; WIDTH] = std::array::from_fn(|c| std::array::from_fn(|j| rows[j][c]));
        let small = cols.iter().flatten().all(|x| x.value() < 256);
        let cols_u8 = small.then(|| std::array::from_fn(|c| std::array::from_fn(|j| cols[c][j].value() as u8)));
        Self { rows, cols, cols_u8 }
    }

    pub fn identity() -> Self {
        Self::new(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { Goldilocks::ONE } else { Goldilocks::ZERO })
        }))
    }

    pub fn rows(&self) -> &[[Goldilocks; WIDTH]; WIDTH] {
        &self.rows
    }

    /// Columns of `M` laid out as rows.
    pub fn columns(&self) -> &[[Goldilocks; WIDTH]; WIDTH] {
        &self.cols
    }

    /// Columns as bytes when every entry is below 256.
    pub fn columns_u8(&self) -> Option<&[[u8; WIDTH]; WIDTH]> {
        self.cols_u8.as_ref()
    }
}

/// Validated round constants, MDS matrix and sparse partial-round blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoseidonConstants {
    round_constants: Vec<[Goldilocks; WIDTH]>,
    mds: MdsMatrix,
    partial: Vec<PartialRoundConstants>,
    id: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPartial {
    v0: Vec<String>,
    v1: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawConstants {
    half_full_rounds: usize,
    partial_rounds: usize,
    #[serde(rename = "C")]
    c: Vec<Vec<String>>,
    #[serde(rename = "M")]
    m: Vec<Vec<String>>,
    #[serde(rename = "S")]
    s: Vec<RawPartial>,
}

fn parse_row(values: &[String], what: String) -> Result<[Goldilocks; WIDTH], ConstantsError> {
    if values.len() != WIDTH {
        return Err(ConstantsError::Dimension {
            what,
            expected: WIDTH,
            found: values.len(),
        });
    }
    let mut out = [Goldilocks::ZERO; WIDTH];
    for (i, s) in values.iter().enumerate() {
        let v: u64 = s
            .trim()
            .parse()
            .map_err(|_| ConstantsError::Parse(format!("{what}[{i}]: {s:?} is not a 64-bit decimal integer")))?;
        out[i] = Goldilocks::new(v).map_err(|_| ConstantsError::NonCanonical {
            location: format!("{what}[{i}]"),
            value: s.clone(),
        })?;
    }
    Ok(out)
}

fn expect_len(what: &str, expected: usize, found: usize) -> Result<(), ConstantsError> {
    if expected == found {
        Ok(())
    } else {
        Err(ConstantsError::Dimension {
            what: what.to_string(),
            expected,
            found,
        })
    }
}

impl PoseidonConstants {
    pub fn new(
        round_constants: Vec<[Goldilocks; WIDTH]>,
        mds: MdsMatrix,
        partial: Vec<PartialRoundConstants>,
    ) -> Result<Self, ConstantsError> {
        expect_len("C", ROUND_CONSTANT_BLOCKS, round_constants.len())?;
        expect_len("S", PARTIAL_ROUNDS, partial.len())?;
        let mut out = Self {
            round_constants,
            mds,
            partial,
            id: String::new(),
        };
        let digest = linear_hash(&out.flatten(), &out);
        out.id = digest.to_hex()[..16].to_string();
        Ok(out)
    }

    /// The constant set shipped with the crate.
    pub fn reference() -> Self {
        Self::from_json(BUNDLED).expect("bundled constants are valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConstantsError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ConstantsError> {
        let raw: RawConstants = serde_json::from_str(text).map_err(|e| ConstantsError::Parse(e.to_string()))?;
        if raw.half_full_rounds != HALF_FULL_ROUNDS || raw.partial_rounds != PARTIAL_ROUNDS {
            return Err(ConstantsError::Rounds {
                half_full_rounds: raw.half_full_rounds,
                partial_rounds: raw.partial_rounds,
            });
        }
        expect_len("C", ROUND_CONSTANT_BLOCKS, raw.c.len())?;
        expect_len("M", WIDTH, raw.m.len())?;
        expect_len("S", PARTIAL_ROUNDS, raw.s.len())?;

        let c = raw
            .c
            .iter()
            .enumerate()
            .map(|(i, row)| parse_row(row, format!("C[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut m = [[Goldilocks::ZERO; WIDTH]; WIDTH];
        for (i, row) in raw.m.iter().enumerate() {
            m[i] = parse_row(row, format!("M[{i}]"))?;
        }
        let s = raw
            .s
            .iter()
            .enumerate()
            .map(|(i, blk)| {
                Ok(PartialRoundConstants {
                    v0: parse_row(&blk.v0, format!("S[{i}].v0"))?,
                    v1: parse_row(&blk.v1, format!("S[{i}].v1"))?,
                })
            })
            .collect::<Result<Vec<_>, ConstantsError>>()?;
        Self::new(c, MdsMatrix::new(m), s)
    }

    pub fn to_json(&self) -> String {
        let dec = |row: &[Goldilocks; WIDTH]| row.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let raw = RawConstants {
            half_full_rounds: HALF_FULL_ROUNDS,
            partial_rounds: PARTIAL_ROUNDS,
            c: self.round_constants.iter().map(dec).collect(),
            m: self.mds.rows().iter().map(dec).collect(),
            s: self
                .partial
                .iter()
                .map(|p| RawPartial {
                    v0: dec(&p.v0),
                    v1: dec(&p.v1),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("constants serialize")
    }

    pub fn round_constants(&self) -> &[[Goldilocks; WIDTH]] {
        &self.round_constants
    }

    pub fn mds(&self) -> &MdsMatrix {
        &self.mds
    }

    pub fn partial_rounds(&self) -> &[PartialRoundConstants] {
        &self.partial
    }

    /// Short hex tag derived by hashing the constants themselves.
    pub fn id(&self) -> &str {
        &self.id
    }

    fn flatten(&self) -> Vec<Goldilocks> {
        let mut out = Vec::new();
        self.round_constants.iter().for_each(|r| out.extend_from_slice(r));
        self.mds.rows().iter().for_each(|r| out.extend_from_slice(r));
        for p in &self.partial {
            out.extend_from_slice(&p.v0);
            out.extend_from_slice(&p.v1);
        }
        out
    }

    /// All-zero constants with an identity MDS and pass-through partial layers
    /// (`v0 = e0`, `v1 = 0`). Every layer then fixes the zero state.
    pub fn degenerate() -> Self {
        let mut e0 = [Goldilocks::ZERO; WIDTH];
        e0[0] = Goldilocks::ONE;
        Self::new(
            vec![[Goldilocks::ZERO; WIDTH]; ROUND_CONSTANT_BLOCKS],
            MdsMatrix::identity(),
            vec![
                PartialRoundConstants {
                    v0: e0,
                    v1: [Goldilocks::ZERO; WIDTH],
                };
                PARTIAL_ROUNDS
            ],
        )
        .expect("degenerate constants have the right shape")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_set_loads() {
        let c = PoseidonConstants::reference();
        assert_eq!(c.round_constants().len(), 9);
        assert_eq!(c.partial_rounds().len(), 22);
        assert_eq!(c.round_constants()[0][0].value(), 0xb585f766f2144405);
        assert_eq!(c.mds().rows()[0][0].value(), 25);
        assert!(c.mds().columns_u8().is_some());
        assert_eq!(c.id().len(), 16);
        assert_eq!(PoseidonConstants::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn short_round_block_is_a_dimension_error() {
        let mut doc: serde_json::Value = serde_json::from_str(BUNDLED).unwrap();
        doc["C"][3].as_array_mut().unwrap().pop();
        let err = PoseidonConstants::from_json(&doc.to_string()).unwrap_err();
        assert!(
            matches!(&err, ConstantsError::Dimension { what, expected: 12, found: 11 } if what == "C[3]"),
            "{err}"
        );
    }

    #[test]
    fn entry_equal_to_p_is_rejected() {
        let mut doc: serde_json::Value = serde_json::from_str(BUNDLED).unwrap();
        doc["S"][5]["v1"][2] = serde_json::Value::String(P.to_string());
        let err = PoseidonConstants::from_json(&doc.to_string()).unwrap_err();
        assert!(
            matches!(&err, ConstantsError::NonCanonical { location, .. } if location == "S[5].v1[2]"),
            "{err}"
        );
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            PoseidonConstants::from_json("{"),
            Err(ConstantsError::Parse(_))
        ));
        let mut doc: serde_json::Value = serde_json::from_str(BUNDLED).unwrap();
        doc["M"][0][0] = serde_json::Value::String("twelve".into());
        assert!(matches!(
            PoseidonConstants::from_json(&doc.to_string()),
            Err(ConstantsError::Parse(_))
        ));
        let mut doc: serde_json::Value = serde_json::from_str(BUNDLED).unwrap();
        doc["partial_rounds"] = 21.into();
        assert!(matches!(
            PoseidonConstants::from_json(&doc.to_string()),
            Err(ConstantsError::Rounds { .. })
        ));
        let mut doc: serde_json::Value = serde_json::from_str(BUNDLED).unwrap();
        doc["S"].as_array_mut().unwrap().pop();
        assert!(matches!(
            PoseidonConstants::from_json(&doc.to_string()),
            Err(ConstantsError::Dimension {
                expected: 22,
                found: 21,
                ..
            })
        ));
        assert!(matches!(
            PoseidonConstants::load("/nonexistent/constants.json"),
            Err(ConstantsError::Io(_))
        ));
    }

    #[test]
    fn degenerate_has_identity_layers() {
        let d = PoseidonConstants::degenerate();
        assert_eq!(d.mds(), &MdsMatrix::identity());
        assert_ne!(d.id(), PoseidonConstants::reference().id());
    }
}
