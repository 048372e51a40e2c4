//! Minimal routing on lattice graphs.
//!
//! A routing record `r` from `v_s` to `v_d` is any integer vector with
//! `v_d - v_s ≡ r (mod M)`; its Minkowski (L1) norm is the length of the
//! dimension-order path it describes. All routers here return records of
//! minimum norm:
//!
//! * [`route_ring`] and [`route_torus`]: per-dimension ring routing.
//! * [`route_rtt`], [`route_fcc`], [`route_bcc`]: closed-form routers for the
//!   rectangular twisted torus and the two twisted cubic crystals.
//! * [`GenericRouter`]: hierarchical routing over any lattice graph. It walks
//!   the `e_n` cycle from the source, and for every vertex of that cycle lying
//!   in the destination's copy of the projection it recursively routes inside
//!   the projection, keeping the cheapest composite.
//!
//! [`verify_minimality`] checks a router against BFS distances.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat::{IntMatrix, IntVector};
use crate::lattice::{LatticeGraph, TopologyKind};
use crate::metrics::bfs_distances;

/// Signed hop counts per dimension.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoutingRecord(IntVector);

impl RoutingRecord {
    pub fn new(v: impl Into<IntVector>) -> Self {
        RoutingRecord(v.into())
    }

    pub fn zero(n: usize) -> Self {
        RoutingRecord(IntVector::zeros(n))
    }

    pub fn vector(&self) -> &IntVector {
        &self.0
    }

    /// Minkowski norm: the path length.
    pub fn norm(&self) -> u64 {
        self.0.l1_norm()
    }

    pub fn neg(&self) -> RoutingRecord {
        RoutingRecord(self.0.neg())
    }

    fn extended(&self, last: i64) -> RoutingRecord {
        let mut v = self.0.clone();
        v.0.push(last);
        RoutingRecord(v)
    }
}

impl fmt::Debug for RoutingRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for RoutingRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How to choose among records of equal minimum norm.
pub enum TieBreak<'a> {
    /// Lexicographically smallest record; ring ties go to the `+` direction.
    Canonical,
    /// Uniformly random, driven by the given source.
    Random(&'a mut dyn RngCore),
}

impl TieBreak<'_> {
    /// Picks one of the minimum-norm candidates. `candidates` must be non-empty.
    pub fn pick(&mut self, mut candidates: Vec<RoutingRecord>) -> RoutingRecord {
        let best = candidates.iter().map(RoutingRecord::norm).min().expect("no candidates");
        candidates.retain(|c| c.norm() == best);
        match self {
            TieBreak::Canonical => candidates.into_iter().min().unwrap(),
            TieBreak::Random(rng) => {
                let i = rng.gen_range(0..candidates.len());
                candidates.swap_remove(i)
            }
        }
    }

    fn ring_tie(&mut self, d: i64) -> i64 {
        match self {
            TieBreak::Canonical => d,
            TieBreak::Random(rng) => {
                if rng.gen_bool(0.5) {
                    d
                } else {
                    -d
                }
            }
        }
    }
}

/// Signed shortest displacement on a ring of length `a`; the tie `d = a/2`
/// goes to `+d`.
pub fn route_ring(a: i64, delta: i64) -> i64 {
    let d = delta.rem_euclid(a);
    if d <= a - d {
        d
    } else {
        d - a
    }
}

/// Per-dimension ring routing on `T(sides)`.
pub fn route_torus(sides: &[i64], delta: &IntVector) -> Result<RoutingRecord> {
    if sides.len() != delta.dim() {
        return Err(Error::DimensionMismatch { expected: sides.len(), got: delta.dim() });
    }
    Ok(RoutingRecord::new(
        sides.iter().zip(delta.iter()).map(|(&a, &d)| route_ring(a, d)).collect::<Vec<_>>(),
    ))
}

/// Closed-form minimal routing in `RTT(a)`, generated by `[[2a, a], [0, a]]`.
pub fn route_rtt(a: i64, delta: &IntVector) -> Result<RoutingRecord> {
    if delta.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: delta.dim() });
    }
    let (x, y) = (delta[0], delta[1]);
    let p = (x + y + a).rem_euclid(2 * a);
    let q = (y - x + a).rem_euclid(2 * a);
    let (dx, dy) = (p - q, p + q - 2 * a);
    if dx % 2 != 0 || dy % 2 != 0 {
        return Err(Error::Invariant(format!("RTT({a}) parity broken for {delta:?}: p={p}, q={q}")));
    }
    Ok(RoutingRecord::new([dx / 2, dy / 2]))
}

/// Intermediate values of the two-candidate crystal routers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrystalTrace {
    /// The difference vector normalised into the labelling box.
    pub normalized: IntVector,
    /// Candidate through the projection copy at offset zero.
    pub near: RoutingRecord,
    /// Candidate through the projection copy reached by wrapping the last axis.
    pub wrapped: RoutingRecord,
}

fn check_crystal_input(a: i64, delta: &IntVector) -> Result<()> {
    if a < 1 {
        return Err(Error::Precondition(format!("side must be positive, got {a}")));
    }
    if delta.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: delta.dim() });
    }
    Ok(())
}

/// Both candidates of the `FCC(a)` router for `delta = v_d - v_s`.
pub fn fcc_trace(a: i64, delta: &IntVector) -> Result<CrystalTrace> {
    check_crystal_input(a, delta)?;
    let (x, y, z) = (delta[0], delta[1], delta[2]);
    let (y_neg, z_neg) = (y < 0, z < 0);
    let y1 = y + if y_neg { a } else { 0 };
    let z1 = z + if z_neg { a } else { 0 };
    let xh = x + if y_neg ^ z_neg { a } else { 0 };
    let x1 = xh + if xh < 0 { 2 * a } else { 0 } - if xh >= 2 * a { 2 * a } else { 0 };
    let near = route_rtt(a, &[x1, y1].into())?.extended(z1);
    let wrapped = route_rtt(a, &[x1 - a, y1].into())?.extended(z1 - a);
    Ok(CrystalTrace { normalized: [x1, y1, z1].into(), near, wrapped })
}

/// Minimal routing in `FCC(a)`, generated by `[[2a, a, a], [0, a, 0], [0, 0, a]]`.
pub fn route_fcc(a: i64, delta: &IntVector, tie: &mut TieBreak) -> Result<RoutingRecord> {
    let t = fcc_trace(a, delta)?;
    Ok(tie.pick(vec![t.near, t.wrapped]))
}

/// Both candidates of the `BCC(a)` router for `delta = v_d - v_s`.
pub fn bcc_trace(a: i64, delta: &IntVector) -> Result<CrystalTrace> {
    check_crystal_input(a, delta)?;
    let (x, y, z) = (delta[0], delta[1], delta[2]);
    let shift = if z < 0 { a } else { 0 };
    let z1 = z + shift;
    let wrap = |v: i64| v + if v < 0 { 2 * a } else { 0 } - if v >= 2 * a { 2 * a } else { 0 };
    let x1 = wrap(x + shift);
    let y1 = wrap(y + shift);
    let sides = [2 * a, 2 * a];
    let near = route_torus(&sides, &[x1, y1].into())?.extended(z1);
    let wrapped = route_torus(&sides, &[x1 - a, y1 - a].into())?.extended(z1 - a);
    Ok(CrystalTrace { normalized: [x1, y1, z1].into(), near, wrapped })
}

/// Minimal routing in `BCC(a)`, generated by `[[2a, 0, a], [0, 2a, a], [0, 0, a]]`.
pub fn route_bcc(a: i64, delta: &IntVector, tie: &mut TieBreak) -> Result<RoutingRecord> {
    let t = bcc_trace(a, delta)?;
    Ok(tie.pick(vec![t.near, t.wrapped]))
}

struct Level {
    hermite: IntMatrix,
    cycle_len: u64,
}

/// Per-call instrumentation of the hierarchical router.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RouteTrace {
    /// Nested routing calls issued into the projection at the top level.
    pub projection_calls: usize,
}

/// Hierarchical router for any lattice graph.
pub struct GenericRouter {
    // levels[m - 1] holds the leading m × m Hermite block.
    levels: Vec<Level>,
    sides: Vec<i64>,
}

impl GenericRouter {
    pub fn new(g: &LatticeGraph) -> Result<Self> {
        let n = g.dim();
        let mut levels = Vec::with_capacity(n);
        for m in 1..=n {
            let idx: Vec<usize> = (0..m).collect();
            let hermite = g.hermite().submatrix(&idx, &idx)?;
            let cycle_len = hermite.element_order(&IntVector::unit(m, m - 1))?;
            levels.push(Level { hermite, cycle_len });
        }
        Ok(GenericRouter { levels, sides: g.sides().to_vec() })
    }

    fn check(&self, v: &IntVector) -> Result<()> {
        let ok = v.dim() == self.sides.len()
            && v.iter().zip(&self.sides).all(|(&x, &s)| (0..s).contains(&x));
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{v:?} is not a vertex label")))
        }
    }

    pub fn route(&self, vs: &IntVector, vd: &IntVector, tie: &mut TieBreak) -> Result<RoutingRecord> {
        Ok(self.route_traced(vs, vd, tie)?.0)
    }

    pub fn route_traced(
        &self,
        vs: &IntVector,
        vd: &IntVector,
        tie: &mut TieBreak,
    ) -> Result<(RoutingRecord, RouteTrace)> {
        self.check(vs)?;
        self.check(vd)?;
        let mut trace = RouteTrace::default();
        let mut out = self.solve(self.levels.len(), vs, vd, Some(tie), Some(&mut trace))?;
        Ok((out.pop().expect("router returns one record"), trace))
    }

    /// Every minimum-norm record between the two labels.
    pub fn minimal_records(&self, vs: &IntVector, vd: &IntVector) -> Result<Vec<RoutingRecord>> {
        self.check(vs)?;
        self.check(vd)?;
        self.solve(self.levels.len(), vs, vd, None, None)
    }

    /// With `tie = None` every minimum-norm record is returned, otherwise
    /// exactly one chosen by `tie`.
    fn solve(
        &self,
        m: usize,
        vs: &[i64],
        vd: &[i64],
        mut tie: Option<&mut TieBreak>,
        trace: Option<&mut RouteTrace>,
    ) -> Result<Vec<RoutingRecord>> {
        let level = &self.levels[m - 1];
        let h = &level.hermite;
        if m == 1 {
            let a = h[(0, 0)];
            let d = route_ring(a, vd[0] - vs[0]);
            let tied = d != 0 && 2 * d == a;
            return Ok(match (tied, tie) {
                (true, None) => vec![RoutingRecord::new([d]), RoutingRecord::new([-d])],
                (true, Some(t)) => vec![RoutingRecord::new([t.ring_tie(d)])],
                (false, _) => vec![RoutingRecord::new([d])],
            });
        }

        let side = h[(m - 1, m - 1)];
        let target = vd[m - 1];
        let len = level.cycle_len as i64;
        let mut p = IntVector(vs[..m].to_vec());
        let mut candidates = Vec::new();
        let mut calls = 0;
        for k in 0..len {
            if p[m - 1] == target {
                calls += 1;
                let sub = self.solve(m - 1, &p[..m - 1], &vd[..m - 1], tie.as_deref_mut(), None)?;
                let back = k - len;
                let steps: &[i64] = match k.cmp(&-back) {
                    std::cmp::Ordering::Less => &[k],
                    std::cmp::Ordering::Equal if k != 0 => &[k, back],
                    std::cmp::Ordering::Equal => &[0],
                    std::cmp::Ordering::Greater => &[back],
                };
                for r in &sub {
                    for &s in steps {
                        candidates.push(r.extended(s));
                    }
                }
            }
            p[m - 1] += 1;
            if p[m - 1] == side {
                p = h.reduce_unchecked(&p)?;
            }
        }
        if let Some(t) = trace {
            t.projection_calls = calls;
        }
        if candidates.is_empty() {
            return Err(Error::Invariant("cycle never meets the destination copy".into()));
        }
        Ok(match tie {
            Some(t) => vec![t.pick(candidates)],
            None => {
                let best = candidates.iter().map(RoutingRecord::norm).min().unwrap();
                candidates.retain(|c| c.norm() == best);
                candidates.sort();
                candidates.dedup();
                candidates
            }
        })
    }
}

/// Which router to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouterKind {
    Generic,
    Specialized,
    Torus,
}

/// A router bound to one graph.
pub enum Router {
    Generic(GenericRouter),
    Rtt(i64),
    Fcc(i64),
    Bcc(i64),
    Torus(Vec<i64>),
}

impl Router {
    pub fn generic(g: &LatticeGraph) -> Result<Self> {
        Ok(Router::Generic(GenericRouter::new(g)?))
    }

    /// Closed-form router for the family, if there is one.
    pub fn specialized(kind: &TopologyKind) -> Result<Self> {
        match kind {
            TopologyKind::Rtt { a } => Ok(Router::Rtt(*a)),
            TopologyKind::Fcc { a } => Ok(Router::Fcc(*a)),
            TopologyKind::Bcc { a } => Ok(Router::Bcc(*a)),
            TopologyKind::Pc { a } => Ok(Router::Torus(vec![*a; 3])),
            TopologyKind::Torus { sides } => Ok(Router::Torus(sides.clone())),
            other => Err(Error::Unsupported(format!("no specialized router for {other}"))),
        }
    }

    /// Ring routing per dimension; only valid on diagonal (torus) generators.
    pub fn torus(g: &LatticeGraph) -> Result<Self> {
        let h = g.hermite();
        let diagonal = (0..h.dim()).all(|i| (0..h.dim()).all(|j| i == j || h[(i, j)] == 0));
        if !diagonal {
            return Err(Error::Unsupported("torus routing needs a diagonal Hermite form".into()));
        }
        Ok(Router::Torus(g.sides().to_vec()))
    }

    pub fn build(kind: RouterKind, topology: &TopologyKind, g: &LatticeGraph) -> Result<Self> {
        match kind {
            RouterKind::Generic => Router::generic(g),
            RouterKind::Specialized => Router::specialized(topology),
            RouterKind::Torus => Router::torus(g),
        }
    }

    pub fn route(&self, vs: &IntVector, vd: &IntVector, tie: &mut TieBreak) -> Result<RoutingRecord> {
        match self {
            Router::Generic(r) => r.route(vs, vd, tie),
            Router::Rtt(a) => route_rtt(*a, &vd.checked_sub(vs)?),
            Router::Fcc(a) => route_fcc(*a, &vd.checked_sub(vs)?, tie),
            Router::Bcc(a) => route_bcc(*a, &vd.checked_sub(vs)?, tie),
            Router::Torus(sides) => route_torus(sides, &vd.checked_sub(vs)?),
        }
    }
}

/// One pair where a router disagreed with BFS.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub source: IntVector,
    pub destination: IntVector,
    pub record: RoutingRecord,
    pub distance: u32,
    pub reached: IntVector,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub pairs_checked: u64,
    pub violations: Vec<Violation>,
}

/// Graphs up to this order are checked on all ordered pairs.
pub const ALL_PAIRS_LIMIT: u64 = 4096;

/// Compares `router` with BFS distances. All ordered pairs are checked when
/// the order is at most [`ALL_PAIRS_LIMIT`], otherwise `samples` random pairs
/// drawn with `seed`.
pub fn verify_minimality(
    g: &LatticeGraph,
    router: &Router,
    samples: usize,
    seed: u64,
) -> Result<MinimalityReport> {
    let dist = bfs_distances(g)?;
    let mut report = MinimalityReport::default();
    let mut check = |vs: IntVector, vd: IntVector| -> Result<()> {
        let r = router.route(&vs, &vd, &mut TieBreak::Canonical)?;
        let reached = g.apply_record(&vs, &r)?;
        let diff = g.reduce(&vd.checked_sub(&vs)?)?;
        let d = dist[g.index_unchecked(&diff)];
        report.pairs_checked += 1;
        if reached != vd || r.norm() != d as u64 {
            report.violations.push(Violation { source: vs, destination: vd, record: r, distance: d, reached });
        }
        Ok(())
    };
    let n = g.order() as usize;
    if g.order() <= ALL_PAIRS_LIMIT {
        for s in 0..n {
            for d in 0..n {
                check(g.label(s), g.label(d))?;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let (s, d) = (rng.gen_range(0..n), rng.gen_range(0..n));
            check(g.label(s), g.label(d))?;
        }
    }
    Ok(report)
}

/// Vertices visited when `r` is followed from `vs` in dimension order.
pub fn dor_path(g: &LatticeGraph, vs: &IntVector, r: &RoutingRecord) -> Result<Vec<IntVector>> {
    let mut v = vs.clone();
    let mut path = vec![v.clone()];
    for (i, &hops) in r.vector().iter().enumerate() {
        for _ in 0..hops.unsigned_abs() {
            v[i] += hops.signum();
            v = g.reduce(&v)?;
            path.push(v.clone());
        }
    }
    Ok(path)
}
