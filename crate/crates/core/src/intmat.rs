//! Exact integer matrix algebra.
//!
//! Everything here works on 64-bit signed entries with checked arithmetic:
//! an overflow is reported as [`Error::Overflow`], never wrapped. Square
//! matrices of dimension 1 through [`MAX_DIM`] are supported.
//!
//! The Hermite normal form used throughout the crate is the column-style
//! (right) form: `H = M·U` with `U` unimodular, `H` upper triangular with a
//! positive diagonal and every above-diagonal entry `H[i][j]` reduced into
//! `[0, H[i][i])`. Its diagonal is the box `0 <= x_i < H[i][i]` that labels
//! the vertices of the lattice graph generated by `M`.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 8;

pub(crate) fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow("addition"))
}

pub(crate) fn sub(a: i64, b: i64) -> Result<i64> {
    a.checked_sub(b).ok_or(Error::Overflow("subtraction"))
}

pub(crate) fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow("multiplication"))
}

/// Integer column vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntVector(pub Vec<i64>);

impl IntVector {
    pub fn zeros(n: usize) -> Self {
        IntVector(vec![0; n])
    }

    /// The `i`-th standard basis vector (0-based).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        IntVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn checked_add(&self, other: &IntVector) -> Result<IntVector> {
        check_dim(self.dim(), other.dim())?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| add(a, b))
            .collect::<Result<Vec<_>>>()
            .map(IntVector)
    }

    pub fn checked_sub(&self, other: &IntVector) -> Result<IntVector> {
        check_dim(self.dim(), other.dim())?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| sub(a, b))
            .collect::<Result<Vec<_>>>()
            .map(IntVector)
    }

    pub fn checked_scale(&self, k: i64) -> Result<IntVector> {
        self.0
            .iter()
            .map(|&a| mul(a, k))
            .collect::<Result<Vec<_>>>()
            .map(IntVector)
    }

    pub fn neg(&self) -> IntVector {
        IntVector(self.0.iter().map(|&a| -a).collect())
    }

    /// Sum of absolute values.
    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|a| a.unsigned_abs()).sum()
    }
}

impl Deref for IntVector {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl DerefMut for IntVector {
    fn deref_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }
}

impl From<Vec<i64>> for IntVector {
    fn from(v: Vec<i64>) -> Self {
        IntVector(v)
    }
}

impl<const N: usize> From<[i64; N]> for IntVector {
    fn from(v: [i64; N]) -> Self {
        IntVector(v.to_vec())
    }
}

impl fmt::Debug for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for IntVector {
    type Err = Error;

    /// Parses a comma separated list such as `1,3,-3`.
    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("bad vector entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(IntVector)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Square integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension(n, "1..=8"));
        }
        Ok(IntMatrix { n, data: vec![0; n * n] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m[(i, i)] = 1;
        }
        Ok(m)
    }

    pub fn diag(d: &[i64]) -> Result<Self> {
        let mut m = Self::zeros(d.len())?;
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        Ok(m)
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            check_dim(n, r.len())?;
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> IntVector {
        IntVector((0..self.n).map(|i| self[(i, j)]).collect())
    }

    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Square sub-block `rows × cols` (both given as index lists of equal length).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<IntMatrix> {
        check_dim(rows.len(), cols.len())?;
        let mut s = IntMatrix::zeros(rows.len())?;
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                s[(a, b)] = self[(i, j)];
            }
        }
        Ok(s)
    }

    /// Row `perm[i]` of `self` becomes row `i` of the result.
    pub fn permute_rows(&self, perm: &[usize]) -> IntMatrix {
        let mut out = self.clone();
        for (i, &src) in perm.iter().enumerate() {
            for j in 0..self.n {
                out[(i, j)] = self[(src, j)];
            }
        }
        out
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        check_dim(self.n, other.n)?;
        let n = self.n;
        let mut out = IntMatrix::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0i64;
                for k in 0..n {
                    acc = add(acc, mul(self[(i, k)], other[(k, j)])?)?;
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    pub fn checked_mul_vec(&self, v: &IntVector) -> Result<IntVector> {
        check_dim(self.n, v.dim())?;
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.iter())
                    .try_fold(0i64, |acc, (&a, &b)| add(acc, mul(a, b)?))
            })
            .collect::<Result<Vec<_>>>()
            .map(IntVector)
    }

    pub fn checked_scale(&self, k: i64) -> Result<IntMatrix> {
        let data = self.data.iter().map(|&x| mul(x, k)).collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix { n: self.n, data })
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<i64> {
        let n = self.n;
        let mut m: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let at = |i: usize, j: usize| i * n + j;
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n.saturating_sub(1) {
            if m[at(k, k)] == 0 {
                let Some(r) = (k + 1..n).find(|&r| m[at(r, k)] != 0) else {
                    return Ok(0);
                };
                for j in 0..n {
                    m.swap(at(k, j), at(r, j));
                }
                sign = -sign;
            }
            let pivot = m[at(k, k)];
            for i in k + 1..n {
                for j in k + 1..n {
                    let lhs = m[at(i, j)].checked_mul(pivot);
                    let rhs = m[at(i, k)].checked_mul(m[at(k, j)]);
                    let num = lhs
                        .zip(rhs)
                        .and_then(|(l, r)| l.checked_sub(r))
                        .ok_or(Error::Overflow("determinant"))?;
                    m[at(i, j)] = num / prev;
                }
                m[at(i, k)] = 0;
            }
            prev = pivot;
        }
        i64::try_from(sign * m[at(n - 1, n - 1)]).map_err(|_| Error::Overflow("determinant"))
    }

    /// Matrix `A` with `M·A = det(M)·I`, by cofactor expansion.
    pub fn adjugate(&self) -> Result<IntMatrix> {
        let n = self.n;
        let mut adj = IntMatrix::zeros(n)?;
        if n == 1 {
            adj[(0, 0)] = 1;
            return Ok(adj);
        }
        for i in 0..n {
            for j in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
                let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                let minor = self.submatrix(&rows, &cols)?.determinant()?;
                adj[(j, i)] = if (i + j) % 2 == 0 { minor } else { -minor };
            }
        }
        Ok(adj)
    }

    pub fn is_unimodular(&self) -> bool {
        matches!(self.determinant(), Ok(1) | Ok(-1))
    }

    /// Upper triangular, positive diagonal, above-diagonal entries in `[0, H[i][i])`.
    pub fn is_hermite(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            let d = self[(i, i)];
            d > 0
                && (0..i).all(|j| self[(i, j)] == 0)
                && (i + 1..n).all(|j| (0..d).contains(&self[(i, j)]))
        })
    }

    /// Column-style Hermite normal form. Returns `(H, U)` with `H = M·U`.
    pub fn hermite_normal_form(&self) -> Result<(IntMatrix, IntMatrix)> {
        if self.determinant()? == 0 {
            return Err(Error::Singular);
        }
        let n = self.n;
        let mut h = self.clone();
        let mut u = IntMatrix::identity(n)?;

        for i in (0..n).rev() {
            loop {
                let nonzero: Vec<usize> = (0..=i).filter(|&j| h[(i, j)] != 0).collect();
                match nonzero.as_slice() {
                    [] => return Err(Error::Singular),
                    [only] => {
                        h.swap_columns(*only, i);
                        u.swap_columns(*only, i);
                        break;
                    }
                    _ => {
                        let p = *nonzero
                            .iter()
                            .min_by_key(|&&j| h[(i, j)].unsigned_abs())
                            .unwrap();
                        for &j in nonzero.iter().filter(|&&j| j != p) {
                            let q = h[(i, j)] / h[(i, p)];
                            h.column_axpy(j, p, -q)?;
                            u.column_axpy(j, p, -q)?;
                        }
                    }
                }
            }
            if h[(i, i)] < 0 {
                h.negate_column(i);
                u.negate_column(i);
            }
        }

        for j in 0..n {
            for i in (0..j).rev() {
                let q = h[(i, j)].div_euclid(h[(i, i)]);
                if q != 0 {
                    h.column_axpy(j, i, -q)?;
                    u.column_axpy(j, i, -q)?;
                }
            }
        }
        Ok((h, u))
    }

    /// `true` iff both generate the same lattice (same Hermite form).
    pub fn right_equivalent(&self, other: &IntMatrix) -> Result<bool> {
        check_dim(self.n, other.n)?;
        Ok(self.hermite_normal_form()?.0 == other.hermite_normal_form()?.0)
    }

    /// Canonical residue of `v` modulo the lattice spanned by the columns of
    /// the Hermite matrix `self`: the unique `w ≡ v` with `0 <= w_i < H[i][i]`.
    pub fn reduce(&self, v: &IntVector) -> Result<IntVector> {
        if !self.is_hermite() {
            return Err(Error::Precondition("reduce requires a Hermite matrix".into()));
        }
        self.reduce_unchecked(v)
    }

    pub(crate) fn reduce_unchecked(&self, v: &IntVector) -> Result<IntVector> {
        check_dim(self.n, v.dim())?;
        let mut w = v.clone();
        for i in (0..self.n).rev() {
            let q = w[i].div_euclid(self[(i, i)]);
            if q != 0 {
                for r in 0..=i {
                    w[r] = sub(w[r], mul(q, self[(r, i)])?)?;
                }
            }
        }
        Ok(w)
    }

    /// `true` iff `v` lies in the lattice spanned by the columns of `self`.
    pub fn contains(&self, v: &IntVector) -> Result<bool> {
        let det = self.determinant()?;
        if det == 0 {
            return Err(Error::Singular);
        }
        let y = self.adjugate()?.checked_mul_vec(v)?;
        Ok(y.iter().all(|&c| c % det == 0))
    }

    /// Order of `x` in `Z^n / M Z^n`: `|det| / gcd(|det|, gcd(adj(M)·x))`.
    pub fn element_order(&self, x: &IntVector) -> Result<u64> {
        let det = self.determinant()?;
        if det == 0 {
            return Err(Error::Singular);
        }
        let y = self.adjugate()?.checked_mul_vec(x)?;
        let g = y.iter().fold(det.unsigned_abs(), |g, &c| g.gcd(&c.unsigned_abs()));
        Ok(det.unsigned_abs() / g)
    }

    fn swap_columns(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.n {
                self.data.swap(i * self.n + a, i * self.n + b);
            }
        }
    }

    fn negate_column(&mut self, j: usize) {
        for i in 0..self.n {
            self[(i, j)] = -self[(i, j)];
        }
    }

    /// col[target] += k * col[source]
    fn column_axpy(&mut self, target: usize, source: usize, k: i64) -> Result<()> {
        for i in 0..self.n {
            self[(i, target)] = add(self[(i, target)], mul(k, self[(i, source)])?)?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl fmt::Display for IntMatrix {
    /// Text format: rows separated by `;`, entries by `,`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

impl FromStr for IntMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .trim()
            .split(';')
            .map(|r| r.parse::<IntVector>().map(|v| v.0))
            .collect::<Result<Vec<_>>>()?;
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Parse(format!(
                "matrix must be square: {n} rows but a row has {} entries",
                bad.len()
            )));
        }
        IntMatrix::from_rows(&rows)
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        IntMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
