use std::io::Write;

use super::Allocation;
use crate::error::Result;

/// The node matrix `M` (n x L) and object matrix `T` (k x L) of an allocation.
///
/// Columns are ordered object-major and choice-minor; `column_owner[j]` is the
/// `(object, choice)` pair behind column `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationMatrices {
    pub n: usize,
    pub k: usize,
    pub column_owner: Vec<(usize, usize)>,
    /// Nodes touched by each column; the sparse form of `M`.
    pub column_nodes: Vec<Vec<usize>>,
}

impl AllocationMatrices {
    pub(crate) fn from_allocation(alloc: &Allocation) -> Self {
        let mut column_owner = Vec::new();
        let mut column_nodes = Vec::new();
        for (object, choices) in alloc.recovery_sets().iter().enumerate() {
            for (choice, set) in choices.iter().enumerate() {
                column_owner.push((object, choice));
                column_nodes.push(set.clone());
            }
        }
        Self {
            n: alloc.n(),
            k: alloc.k(),
            column_owner,
            column_nodes,
        }
    }

    pub fn columns(&self) -> usize {
        self.column_owner.len()
    }

    pub fn m_dense(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.columns()]; self.n];
        for (j, nodes) in self.column_nodes.iter().enumerate() {
            for &v in nodes {
                m[v][j] = 1;
            }
        }
        m
    }

    pub fn t_dense(&self) -> Vec<Vec<u8>> {
        let mut t = vec![vec![0u8; self.columns()]; self.k];
        for (j, &(object, _)) in self.column_owner.iter().enumerate() {
            t[object][j] = 1;
        }
        t
    }

    fn header(&self) -> Vec<String> {
        self.column_owner
            .iter()
            .map(|(o, c)| format!("o{o}c{c}"))
            .collect()
    }

    fn write_rows<W: Write>(&self, rows: &[Vec<u8>], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for row in rows {
            w.write_record(row.iter().map(u8::to_string))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_m_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_rows(&self.m_dense(), out)
    }

    pub fn write_t_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_rows(&self.t_dense(), out)
    }
}
