//! Lattice graphs: the Cayley graph of `Z^n / M Z^n` with generators `±e_i`.
//!
//! Vertices are always labelled by their canonical Hermite residue, i.e. the
//! box `0 <= v_i < H[i][i]` where `H` is the Hermite normal form of the
//! generator. Vertex indices enumerate that box lexicographically with `v_1`
//! most significant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat::{IntMatrix, IntVector, MAX_DIM};
use crate::routing::RoutingRecord;

/// Named topology families plus literal matrices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TopologyKind {
    /// Mixed-radix torus `T(a_1, ..., a_k)`.
    Torus { sides: Vec<i64> },
    /// Primitive cubic crystal, the 3D torus of side `a`.
    Pc { a: i64 },
    /// Rectangular twisted torus `2a × a` with twist `a`.
    Rtt { a: i64 },
    /// Face-centered cubic crystal.
    Fcc { a: i64 },
    /// Body-centered cubic crystal.
    Bcc { a: i64 },
    /// Four-dimensional face-centered lift of `FCC(a)`.
    Fcc4 { a: i64 },
    /// Four-dimensional body-centered lift of `PC(2a)`.
    Bcc4 { a: i64 },
    /// Symmetric Lipschitz lift of `FCC(2a)`.
    Lip { a: i64 },
    /// Common lift of two or more topologies, folded left to right.
    Hybrid { parts: Vec<TopologyKind> },
    Custom { matrix: IntMatrix },
}

impl TopologyKind {
    /// Generator matrix of the family.
    pub fn matrix(&self) -> Result<IntMatrix> {
        use TopologyKind::*;
        let side = |a: i64| {
            if a >= 1 {
                Ok(a)
            } else {
                Err(Error::Precondition(format!("side must be positive, got {a}")))
            }
        };
        match self {
            Torus { sides } => {
                if sides.is_empty() {
                    return Err(Error::Precondition("torus needs at least one side".into()));
                }
                for &s in sides {
                    side(s)?;
                }
                IntMatrix::diag(sides)
            }
            Pc { a } => {
                let a = side(*a)?;
                IntMatrix::diag(&[a, a, a])
            }
            Rtt { a } => {
                let a = side(*a)?;
                IntMatrix::from_rows(&[[2 * a, a], [0, a]])
            }
            Fcc { a } => {
                let a = side(*a)?;
                IntMatrix::from_rows(&[[2 * a, a, a], [0, a, 0], [0, 0, a]])
            }
            Bcc { a } => {
                let a = side(*a)?;
                IntMatrix::from_rows(&[[2 * a, 0, a], [0, 2 * a, a], [0, 0, a]])
            }
            Fcc4 { a } => {
                let a = side(*a)?;
                IntMatrix::from_rows(&[
                    [2 * a, a, a, a],
                    [0, a, 0, 0],
                    [0, 0, a, 0],
                    [0, 0, 0, a],
                ])
            }
            Bcc4 { a } => {
                let a = side(*a)?;
                IntMatrix::from_rows(&[
                    [2 * a, 0, 0, a],
                    [0, 2 * a, 0, a],
                    [0, 0, 2 * a, a],
                    [0, 0, 0, a],
                ])
            }
            Lip { a } => {
                let a = side(*a)?;
                IntMatrix::from_rows(&[
                    [a, -a, -a, -a],
                    [a, a, -a, a],
                    [a, a, a, -a],
                    [a, -a, a, a],
                ])
            }
            Hybrid { parts } => {
                let mut it = parts.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::Precondition("hybrid needs at least one part".into()))?;
                it.try_fold(first.matrix()?, |acc, p| common_lift(&acc, &p.matrix()?))
            }
            Custom { matrix } => Ok(matrix.clone()),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TopologyKind::*;
        match self {
            Torus { sides } => {
                let s: Vec<String> = sides.iter().map(|x| x.to_string()).collect();
                write!(f, "T({})", s.join(","))
            }
            Pc { a } => write!(f, "PC({a})"),
            Rtt { a } => write!(f, "RTT({a})"),
            Fcc { a } => write!(f, "FCC({a})"),
            Bcc { a } => write!(f, "BCC({a})"),
            Fcc4 { a } => write!(f, "4D-FCC({a})"),
            Bcc4 { a } => write!(f, "4D-BCC({a})"),
            Lip { a } => write!(f, "Lip({a})"),
            Hybrid { parts } => {
                let s: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", s.join("⊞"))
            }
            Custom { matrix } => write!(f, "G({matrix})"),
        }
    }
}

/// A validated lattice graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeGraph {
    generator: IntMatrix,
    hermite: IntMatrix,
    sides: Vec<i64>,
    strides: Vec<usize>,
    order: u64,
}

/// Result of projecting a lattice graph over one axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub graph: LatticeGraph,
    pub side: i64,
    pub twist: IntVector,
}

impl LatticeGraph {
    pub fn new(generator: IntMatrix) -> Result<Self> {
        let (hermite, _) = generator.hermite_normal_form()?;
        let sides = hermite.diagonal();
        let order = sides.iter().try_fold(1u64, |acc, &s| {
            acc.checked_mul(s as u64).ok_or(Error::Overflow("graph order"))
        })?;
        let n = sides.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1]
                .checked_mul(sides[i + 1] as usize)
                .ok_or(Error::Overflow("vertex index"))?;
        }
        Ok(LatticeGraph { generator, hermite, sides, strides, order })
    }

    pub fn generator(&self) -> &IntMatrix {
        &self.generator
    }

    pub fn hermite(&self) -> &IntMatrix {
        &self.hermite
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn sides(&self) -> &[i64] {
        &self.sides
    }

    pub fn degree(&self) -> usize {
        2 * self.dim()
    }

    pub fn is_label(&self, v: &IntVector) -> bool {
        v.dim() == self.dim() && v.iter().zip(&self.sides).all(|(&x, &s)| (0..s).contains(&x))
    }

    fn check_label(&self, v: &IntVector) -> Result<()> {
        if self.is_label(v) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{v:?} is not a vertex label of this graph")))
        }
    }

    /// Canonical label of any integer vector.
    pub fn reduce(&self, v: &IntVector) -> Result<IntVector> {
        self.hermite.reduce_unchecked(v)
    }

    pub fn index_of(&self, v: &IntVector) -> Result<usize> {
        self.check_label(v)?;
        Ok(self.index_unchecked(v))
    }

    pub(crate) fn index_unchecked(&self, v: &[i64]) -> usize {
        v.iter().zip(&self.strides).map(|(&x, &s)| x as usize * s).sum()
    }

    pub fn label(&self, index: usize) -> IntVector {
        IntVector(
            self.strides
                .iter()
                .zip(&self.sides)
                .map(|(&st, &s)| ((index / st) % s as usize) as i64)
                .collect(),
        )
    }

    /// All vertex labels in lexicographic order.
    pub fn labels(&self) -> impl Iterator<Item = IntVector> + '_ {
        (0..self.order as usize).map(|i| self.label(i))
    }

    /// The `2n` neighbours of `v` in the order `+e_1, -e_1, +e_2, -e_2, ...`.
    /// Small sides produce repeated entries (parallel edges or self-loops).
    pub fn neighbors(&self, v: &IntVector) -> Result<Vec<IntVector>> {
        self.check_label(v)?;
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n);
        let mut w = v.clone();
        for i in 0..n {
            for delta in [1, -1] {
                w[i] += delta;
                out.push(self.hermite.reduce_unchecked(&w)?);
                w[i] -= delta;
            }
        }
        Ok(out)
    }

    /// Neighbour indices of the vertex with index `index`, same order as [`neighbors`](Self::neighbors).
    pub fn neighbor_indices(&self, index: usize) -> Vec<usize> {
        let v = self.label(index);
        self.neighbors(&v)
            .expect("labels produced by the graph are valid")
            .iter()
            .map(|w| self.index_unchecked(w))
            .collect()
    }

    /// Walk `r` from `v`: returns `reduce(v + r)`.
    pub fn apply_record(&self, v: &IntVector, r: &RoutingRecord) -> Result<IntVector> {
        self.check_label(v)?;
        self.reduce(&v.checked_add(r.vector())?)
    }

    /// Projection over `axis` (0-based): the remaining axes keep their
    /// relative order and `axis` is moved last before Gaussian reduction to
    /// `[[B, c], [0, a]]`.
    pub fn projection(&self, axis: usize) -> Result<Projection> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::Precondition("projection needs dimension >= 2".into()));
        }
        if axis >= n {
            return Err(Error::Precondition(format!("axis {axis} out of range for dimension {n}")));
        }
        let perm: Vec<usize> = (0..n).filter(|&i| i != axis).chain([axis]).collect();
        let (h, _) = self.hermite.permute_rows(&perm).hermite_normal_form()?;
        let head: Vec<usize> = (0..n - 1).collect();
        let b = h.submatrix(&head, &head)?;
        let twist = IntVector((0..n - 1).map(|i| h[(i, n - 1)]).collect());
        Ok(Projection { graph: LatticeGraph::new(b)?, side: h[(n - 1, n - 1)], twist })
    }

    /// Projection over several axes at once (0-based, any order).
    pub fn projection_over(&self, axes: &[usize]) -> Result<LatticeGraph> {
        let mut sorted = axes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut g = self.clone();
        // Remove from the highest index so lower indices stay valid.
        for &axis in sorted.iter().rev() {
            g = g.projection(axis)?.graph;
        }
        Ok(g)
    }
}

/// Build the graph for a named family.
pub fn make_topology(kind: &TopologyKind) -> Result<LatticeGraph> {
    LatticeGraph::new(kind.matrix()?)
}

/// Block-diagonal matrix: generates the Cartesian product of the two graphs.
pub fn direct_sum(m1: &IntMatrix, m2: &IntMatrix) -> Result<IntMatrix> {
    if m1.determinant()? == 0 || m2.determinant()? == 0 {
        return Err(Error::Singular);
    }
    let (n1, n2) = (m1.dim(), m2.dim());
    if n1 + n2 > MAX_DIM {
        return Err(Error::UnsupportedDimension(n1 + n2, "1..=8"));
    }
    let mut out = IntMatrix::zeros(n1 + n2)?;
    for i in 0..n1 {
        for j in 0..n1 {
            out[(i, j)] = m1[(i, j)];
        }
    }
    for i in 0..n2 {
        for j in 0..n2 {
            out[(n1 + i, n1 + j)] = m2[(i, j)];
        }
    }
    Ok(out)
}

/// Common lift sharing the leading identical Hermite columns:
///
/// ```text
/// H1 = [[C, RA], [0, A]],  H2 = [[C, RB], [0, B]]  =>  [[C, RA, RB], [0, A, 0], [0, 0, B]]
/// ```
///
/// Columns are compared positionally over the top `min(n1, n2)` rows; since
/// Hermite columns vanish below the diagonal this compares whole columns.
pub fn common_lift(m1: &IntMatrix, m2: &IntMatrix) -> Result<IntMatrix> {
    let (h1, _) = m1.hermite_normal_form()?;
    let (h2, _) = m2.hermite_normal_form()?;
    let (n1, n2) = (h1.dim(), h2.dim());
    let rows = n1.min(n2);
    let k = (0..rows)
        .take_while(|&j| (0..rows).all(|i| h1[(i, j)] == h2[(i, j)]))
        .count();
    let dim = n1 + n2 - k;
    if dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim, "1..=8"));
    }
    let mut out = IntMatrix::zeros(dim)?;
    // [C RA; 0 A] occupies the top-left n1 × n1 block.
    for i in 0..n1 {
        for j in 0..n1 {
            out[(i, j)] = h1[(i, j)];
        }
    }
    // RB sits in rows 0..k, B in the bottom-right block.
    for j in k..n2 {
        let col = n1 + (j - k);
        for i in 0..k {
            out[(i, col)] = h2[(i, j)];
        }
        for i in k..n2 {
            out[(n1 + (i - k), col)] = h2[(i, j)];
        }
    }
    Ok(out)
}
