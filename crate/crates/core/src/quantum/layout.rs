use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Named partition of a global qubit register into contiguous blocks.
///
/// All partial traces and subsystem unitaries are addressed through block
/// names. Blocks may be empty (zero qubits), e.g. an observer with no memory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    blocks: Vec<(String, usize)>,
}

impl RegisterLayout {
    pub fn new(blocks: Vec<(String, usize)>) -> Result<Self> {
        for i in 0..blocks.len() {
            for j in (i + 1)..blocks.len() {
                if blocks[i].0 == blocks[j].0 {
                    return Err(CoreError::InvalidArgument(format!(
                        "duplicate block name `{}`",
                        blocks[i].0
                    )));
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn of(blocks: &[(&str, usize)]) -> Result<Self> {
        Self::new(blocks.iter().map(|(n, q)| (n.to_string(), *q)).collect())
    }

    pub fn blocks(&self) -> &[(String, usize)] {
        &self.blocks
    }

    pub fn total_qubits(&self) -> usize {
        self.blocks.iter().map(|(_, q)| q).sum()
    }

    /// Per-qubit dims vector (all 2s), one entry per qubit in block order.
    pub fn qubit_dims(&self) -> Vec<usize> {
        vec![2; self.total_qubits()]
    }

    pub fn block_qubits(&self, name: &str) -> Result<usize> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, q)| *q)
            .ok_or_else(|| CoreError::UnknownBlock(name.to_string()))
    }

    pub fn has_block(&self, name: &str) -> bool {
        self.blocks.iter().any(|(n, _)| n == name)
    }

    /// Qubit positions (global indices) occupied by the named block.
    pub fn block_positions(&self, name: &str) -> Result<Vec<usize>> {
        let mut offset = 0usize;
        for (n, q) in &self.blocks {
            if n == name {
                return Ok((offset..offset + q).collect());
            }
            offset += q;
        }
        Err(CoreError::UnknownBlock(name.to_string()))
    }

    /// Concatenated positions of several blocks, in the order given.
    pub fn positions_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for name in names {
            out.extend(self.block_positions(name)?);
        }
        Ok(out)
    }

    /// Positions of all qubits not belonging to the listed blocks.
    pub fn complement_positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        for n in names {
            if !self.has_block(n) {
                return Err(CoreError::UnknownBlock(n.to_string()));
            }
        }
        let excluded: Vec<usize> = self.positions_of(names)?;
        Ok((0..self.total_qubits())
            .filter(|p| !excluded.contains(p))
            .collect())
    }
}
