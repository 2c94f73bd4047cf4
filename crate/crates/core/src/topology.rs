//! Interconnection graph and the pivot-relative matrices that enter the
//! comparison matrix.
//!
//! Adjacency is binary with a zero diagonal and need not be symmetric. All
//! pivot-relative matrices list the non-pivot nodes in ascending original
//! index; [`Topology::non_pivot_nodes`] gives that ordering explicitly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    adjacency: Vec<u8>,
}

impl Topology {
    /// Builds a topology from a row-major `n x n` 0/1 matrix.
    pub fn from_matrix(n: usize, adjacency: Vec<u8>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTopology("node count must be at least 1"));
        }
        if adjacency.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: adjacency.len(),
            });
        }
        if adjacency.iter().any(|&v| v > 1) {
            return Err(Error::InvalidTopology("adjacency entries must be 0 or 1"));
        }
        if (0..n).any(|i| adjacency[i * n + i] != 0) {
            return Err(Error::InvalidTopology("adjacency diagonal must be zero"));
        }
        Ok(Topology { n, adjacency })
    }

    /// Builds a topology from an edge list. Undirected edges set both
    /// `(i, j)` and `(j, i)`; duplicates are harmless.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], directed: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTopology("node count must be at least 1"));
        }
        let mut adjacency = vec![0u8; n * n];
        for &(i, j) in edges {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, len: n });
                }
            }
            if i == j {
                return Err(Error::InvalidTopology("self-loops are not allowed"));
            }
            adjacency[i * n + j] = 1;
            if !directed {
                adjacency[j * n + i] = 1;
            }
        }
        Ok(Topology { n, adjacency })
    }

    pub fn complete(n: usize) -> Self {
        let n = n.max(1);
        let adjacency = (0..n * n).map(|k| u8::from(k / n != k % n)).collect();
        Topology { n, adjacency }
    }

    pub fn empty(n: usize) -> Self {
        let n = n.max(1);
        Topology {
            n,
            adjacency: vec![0; n * n],
        }
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n.max(1), &edges, false).expect("path edges are in range")
    }

    pub fn ring(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::from_edges(n.max(1), &edges, false).expect("ring edges are in range")
    }

    /// Star with every other node attached to `center`.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        if center >= n {
            return Err(Error::IndexOutOfRange {
                index: center,
                len: n,
            });
        }
        let edges: Vec<_> = (0..n)
            .filter(|&i| i != center)
            .map(|i| (center, i))
            .collect();
        Self::from_edges(n, &edges, false)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.iter().all(|&v| v == 0)
    }

    /// Adjacency entry `alpha_ij` (0 or 1). Panics when out of range.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        assert!(i < self.n && j < self.n, "node index out of range");
        self.adjacency[i * self.n + j]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.entry(i, j) == 1
    }

    pub fn adjacency(&self) -> &[u8] {
        &self.adjacency
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.entry(i, j) == self.entry(j, i)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|&v| usize::from(v)).sum()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            })
        }
    }

    /// Out-degree `kappa_i = sum_j alpha_ij`.
    pub fn degree(&self, i: usize) -> Result<usize> {
        self.check_index(i)?;
        Ok(self.adjacency[i * self.n..(i + 1) * self.n]
            .iter()
            .map(|&v| usize::from(v))
            .sum())
    }

    /// Ascending node indices with `pivot` removed.
    pub fn non_pivot_nodes(&self, pivot: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| i != pivot).collect()
    }

    /// `alpha~_ij = alpha_{pivot,j} - alpha_ij` for every `i, j`.
    pub fn residual_coefficients(&self, pivot: usize) -> Result<ResidualCoefficients> {
        self.check_index(pivot)?;
        let n = self.n;
        let values = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                self.entry(pivot, j) as i8 - self.entry(i, j) as i8
            })
            .collect();
        Ok(ResidualCoefficients { pivot, n, values })
    }

    /// The `(n-1) x (n-1)` matrices of `|alpha_ij|` and
    /// `|alpha_ij - alpha_{pivot,j}|` over non-pivot nodes, both with zero
    /// diagonal.
    pub fn aux_matrices(&self, pivot: usize) -> Result<AuxMatrices> {
        if self.n < 2 {
            return Err(Error::TooFewNodes(self.n));
        }
        self.check_index(pivot)?;
        let nodes = self.non_pivot_nodes(pivot);
        let m = nodes.len();
        let a1 = Matrix::from_fn(m, m, |r, c| {
            if r == c {
                0.0
            } else {
                f64::from(self.entry(nodes[r], nodes[c]))
            }
        });
        let a2 = Matrix::from_fn(m, m, |r, c| {
            if r == c {
                0.0
            } else {
                let d = self.entry(nodes[r], nodes[c]) as i8 - self.entry(pivot, nodes[c]) as i8;
                f64::from(d.unsigned_abs())
            }
        });
        Ok(AuxMatrices {
            pivot,
            nodes,
            a1,
            a2,
        })
    }
}

/// Residual connectivity with respect to a pivot node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualCoefficients {
    pub pivot: usize,
    n: usize,
    values: Vec<i8>,
}

impl ResidualCoefficients {
    /// `alpha~_ij`, in `{-1, 0, 1}`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.values[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxMatrices {
    pub pivot: usize,
    /// Original index of each row/column.
    pub nodes: Vec<usize>,
    pub a1: Matrix,
    pub a2: Matrix,
}
