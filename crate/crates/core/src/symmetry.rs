//! Linear automorphisms of lattice graphs.
//!
//! A signed permutation `P` is a graph automorphism of `G(M)` fixing 0 iff
//! `PM = MQ` for some integer `Q`, i.e. iff `M⁻¹PM` is integral. The graph is
//! *linearly symmetric* when the stabilizer maps `e₁` to `±e_i` for every
//! axis `i`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intmat::{IntMatrix, IntVector, MAX_DIM};
use crate::lattice::LatticeGraph;

/// A coordinate permutation with per-axis signs: `P e_j = signs[j] e_{perm[j]}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: signs.len() });
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Precondition(format!("{perm:?} is not a permutation")));
            }
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Precondition(format!("signs must be ±1, got {signs:?}")));
        }
        Ok(SignedPermutation { perm, signs })
    }

    pub fn identity(n: usize) -> Self {
        SignedPermutation { perm: (0..n).collect(), signs: vec![1; n] }
    }

    /// Reads a matrix with exactly one ±1 per row and column.
    pub fn from_matrix(m: &IntMatrix) -> Result<Self> {
        let n = m.dim();
        let mut perm = vec![usize::MAX; n];
        let mut signs = vec![0i8; n];
        for j in 0..n {
            for i in 0..n {
                match m[(i, j)] {
                    0 => {}
                    s @ (1 | -1) if perm[j] == usize::MAX => {
                        perm[j] = i;
                        signs[j] = s as i8;
                    }
                    _ => return Err(Error::Precondition(format!("not a signed permutation: {m}"))),
                }
            }
            if perm[j] == usize::MAX {
                return Err(Error::Precondition(format!("not a signed permutation: {m}")));
            }
        }
        SignedPermutation::new(perm, signs)
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Image of `e_j` as `(axis, sign)`.
    pub fn image(&self, j: usize) -> (usize, i8) {
        (self.perm[j], self.signs[j])
    }

    pub fn matrix(&self) -> IntMatrix {
        let n = self.dim();
        let mut m = IntMatrix::zeros(n).expect("dimension already validated");
        for j in 0..n {
            m[(self.perm[j], j)] = self.signs[j] as i64;
        }
        m
    }

    pub fn apply(&self, v: &IntVector) -> IntVector {
        let mut out = IntVector::zeros(v.dim());
        for j in 0..v.dim() {
            out[self.perm[j]] = self.signs[j] as i64 * v[j];
        }
        out
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        let (perm, signs) = (0..other.dim())
            .map(|j| {
                let (k, s) = other.image(j);
                (self.perm[k], self.signs[k] * s)
            })
            .unzip();
        SignedPermutation { perm, signs }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| p == i) && self.signs.iter().all(|&s| s == 1)
    }

    /// Smallest `k ≥ 1` with `self^k = id`.
    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut k = 1;
        while !p.is_identity() {
            p = self.compose(&p);
            k += 1;
        }
        k
    }
}

impl fmt::Debug for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Cycle-free one-line notation: image of each axis, 1-based, e.g. `(3 -1 2)`.
impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for j in 0..self.dim() {
            if j > 0 {
                write!(f, " ")?;
            }
            let sign = if self.signs[j] < 0 { "-" } else { "" };
            write!(f, "{sign}{}", self.perm[j] + 1)?;
        }
        write!(f, ")")
    }
}

impl Serialize for SignedPermutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix().serialize(s)
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// All `n!·2ⁿ` signed permutations: permutations in lexicographic order,
/// each with sign patterns in binary counting order (bit `j` set = axis `j` negated).
pub fn signed_permutations(n: usize) -> Result<Vec<SignedPermutation>> {
    if !(1..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n, "1..=8"));
    }
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        for mask in 0u32..(1 << n) {
            let signs = (0..n).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect();
            out.push(SignedPermutation { perm: perm.clone(), signs });
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

struct AutomorphismTest {
    m: IntMatrix,
    adj: IntMatrix,
    det: i64,
}

impl AutomorphismTest {
    fn new(m: &IntMatrix) -> Result<Self> {
        let det = m.determinant()?;
        if det == 0 {
            return Err(Error::Singular);
        }
        Ok(AutomorphismTest { m: m.clone(), adj: m.adjugate()?, det })
    }

    fn quotient(&self, p: &SignedPermutation) -> Result<Option<IntMatrix>> {
        if p.dim() != self.m.dim() {
            return Err(Error::DimensionMismatch { expected: self.m.dim(), got: p.dim() });
        }
        let n = self.m.dim();
        // P·M permutes and negates rows of M.
        let mut pm = IntMatrix::zeros(n)?;
        for j in 0..n {
            let (i, s) = p.image(j);
            for c in 0..n {
                pm[(i, c)] = s as i64 * self.m[(j, c)];
            }
        }
        let num = self.adj.checked_mul(&pm)?;
        let mut q = IntMatrix::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                let x = num[(i, j)];
                if x % self.det != 0 {
                    return Ok(None);
                }
                q[(i, j)] = x / self.det;
            }
        }
        Ok(Some(q))
    }
}

/// True iff `M⁻¹PM` is integral.
pub fn is_linear_automorphism(m: &IntMatrix, p: &SignedPermutation) -> Result<bool> {
    Ok(linear_automorphism_quotient(m, p)?.is_some())
}

/// `Q = M⁻¹PM` when it is integral.
pub fn linear_automorphism_quotient(m: &IntMatrix, p: &SignedPermutation) -> Result<Option<IntMatrix>> {
    AutomorphismTest::new(m)?.quotient(p)
}

/// Linear automorphisms fixing 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerReport {
    pub members: Vec<SignedPermutation>,
    pub symmetric: bool,
    /// For each axis `i`, the first member mapping `e₁` to `±e_i`.
    pub witnesses: Vec<Option<SignedPermutation>>,
}

/// Largest dimension accepted by [`stabilizer`].
pub const STABILIZER_MAX_DIM: usize = 6;

/// Exhaustive scan of all signed permutations.
pub fn stabilizer(m: &IntMatrix) -> Result<StabilizerReport> {
    let n = m.dim();
    if n > STABILIZER_MAX_DIM {
        return Err(Error::UnsupportedDimension(n, "1..=6"));
    }
    let test = AutomorphismTest::new(m)?;
    let mut members = Vec::new();
    for p in signed_permutations(n)? {
        if test.quotient(&p)?.is_some() {
            members.push(p);
        }
    }
    let witnesses: Vec<_> =
        (0..n).map(|i| members.iter().find(|p| p.image(0).0 == i).cloned()).collect();
    let symmetric = witnesses.iter().all(Option::is_some);
    Ok(StabilizerReport { members, symmetric, witnesses })
}

/// The two three-dimensional families of linearly symmetric generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetricFamily {
    /// `[[a,c,b],[b,a,c],[c,b,a]]`
    Circulant,
    /// `[[a,b,c],[a,c,-b-c],[a,-b-c,b]]`
    Alternate,
}

pub fn family_matrix(family: SymmetricFamily, a: i64, b: i64, c: i64) -> Result<IntMatrix> {
    let m = match family {
        SymmetricFamily::Circulant => IntMatrix::from_rows(&[[a, c, b], [b, a, c], [c, b, a]])?,
        SymmetricFamily::Alternate => {
            IntMatrix::from_rows(&[[a, b, c], [a, c, -b - c], [a, -b - c, b]])?
        }
    };
    if m.determinant()? == 0 {
        return Err(Error::Singular);
    }
    Ok(m)
}

/// Builds the family member and reports whether it is linearly symmetric.
pub fn verify_symmetric_family(family: SymmetricFamily, a: i64, b: i64, c: i64) -> Result<bool> {
    Ok(stabilizer(&family_matrix(family, a, b, c)?)?.symmetric)
}

/// True iff `U` is unimodular and `AU = UB`.
pub fn verify_similarity_witness(a: &IntMatrix, b: &IntMatrix, u: &IntMatrix) -> bool {
    if a.dim() != b.dim() || a.dim() != u.dim() || !u.is_unimodular() {
        return false;
    }
    match (a.checked_mul(u), u.checked_mul(b)) {
        (Ok(au), Ok(ub)) => au == ub,
        _ => false,
    }
}

/// Every `X` with entries in `[-bound, bound]` satisfying `AX = XB`.
pub fn intertwiners(a: &IntMatrix, b: &IntMatrix, bound: i64) -> Result<Vec<IntMatrix>> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
    }
    let cells = n * n;
    let width = (2 * bound + 1) as u128;
    let total = width.checked_pow(cells as u32).filter(|&t| t <= 50_000_000);
    if total.is_none() {
        return Err(Error::ResourceLimit(format!("search box of side {width} in dimension {n}")));
    }
    let mut x = IntMatrix::zeros(n)?;
    for i in 0..n {
        for j in 0..n {
            x[(i, j)] = -bound;
        }
    }
    let mut out = Vec::new();
    loop {
        if a.checked_mul(&x)? == x.checked_mul(b)? {
            out.push(x.clone());
        }
        // Odometer step over all entries.
        let mut k = 0;
        loop {
            if k == cells {
                return Ok(out);
            }
            let cell = (k / n, k % n);
            if x[cell] < bound {
                x[cell] += 1;
                break;
            }
            x[cell] = -bound;
            k += 1;
        }
    }
}

/// A generator `±e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Generator {
    pub axis: usize,
    pub sign: i8,
}

impl Generator {
    fn inverse(self) -> Generator {
        Generator { axis: self.axis, sign: -self.sign }
    }
}

/// Four generators closing a cycle, in the order walked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FourCycle {
    pub steps: [Generator; 4],
    /// Multiplicity of each distinct generator, in decreasing order.
    pub profile: Vec<usize>,
}

fn dihedral_canonical(s: [Generator; 4]) -> [Generator; 4] {
    let mut best = s;
    for rev in [false, true] {
        let mut base = s;
        if rev {
            base.reverse();
        }
        for r in 0..4 {
            let mut t = base;
            t.rotate_left(r);
            best = best.min(t);
        }
    }
    best
}

/// Quadruples `a,b,c,d ∈ ±B_n` with `a+b+c+d ≡ 0 (mod M)` and no two steps
/// inverse to each other, up to rotation and reflection of the cycle.
pub fn nontrivial_4cycles(m: &IntMatrix) -> Result<Vec<FourCycle>> {
    let g = LatticeGraph::new(m.clone())?;
    let n = g.dim();
    let gens: Vec<Generator> =
        (0..n).flat_map(|axis| [Generator { axis, sign: 1 }, Generator { axis, sign: -1 }]).collect();
    let mut found = BTreeSet::new();
    for &a in &gens {
        for &b in &gens {
            for &c in &gens {
                for &d in &gens {
                    let s = [a, b, c, d];
                    let trivial = (0..4).any(|i| (i + 1..4).any(|j| s[i] == s[j].inverse()));
                    if trivial {
                        continue;
                    }
                    let mut sum = IntVector::zeros(n);
                    for step in s {
                        sum[step.axis] += step.sign as i64;
                    }
                    if g.hermite().contains(&sum)? {
                        found.insert(dihedral_canonical(s));
                    }
                }
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|steps| {
            let mut counts: Vec<usize> = Vec::new();
            let mut distinct: Vec<Generator> = Vec::new();
            for s in steps {
                match distinct.iter().position(|&d| d == s) {
                    Some(i) => counts[i] += 1,
                    None => {
                        distinct.push(s);
                        counts.push(1);
                    }
                }
            }
            counts.sort_unstable_by(|x, y| y.cmp(x));
            FourCycle { steps, profile: counts }
        })
        .collect())
}

/// The lift of `BCC(a)` with last column `(x, y, z, 1)`.
pub fn bcc_lift(a: i64, x: i64, y: i64, z: i64) -> Result<IntMatrix> {
    IntMatrix::from_rows(&[[2 * a, 0, a, x], [0, 2 * a, a, y], [0, 0, a, z], [0, 0, 0, 1]])
}

/// Scans every Hermite lift of `BCC(a)` with unit last side and returns
/// true iff none of them is linearly symmetric.
pub fn bcc_lift_scan(a: i64) -> Result<bool> {
    if !(1..=4).contains(&a) {
        return Err(Error::Precondition(format!("lift scan supports 1 ≤ a ≤ 4, got {a}")));
    }
    for x in 0..2 * a {
        for y in 0..2 * a {
            for z in 0..a {
                if stabilizer(&bcc_lift(a, x, y, z)?)?.symmetric {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
