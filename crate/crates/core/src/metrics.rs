//! Distance analysis: BFS summaries, closed forms for the cubic crystals and
//! tori, and throughput upper bounds.

use std::collections::VecDeque;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;
use crate::lattice::{common_lift, LatticeGraph, TopologyKind};

/// Exact rational used for averages and bounds.
pub type Rational = Ratio<i64>;

/// Largest graph order accepted by the BFS-based functions.
pub const MAX_BFS_ORDER: u64 = 1_000_000;

fn check_order(g: &LatticeGraph) -> Result<()> {
    if g.order() > MAX_BFS_ORDER {
        return Err(Error::ResourceLimit(format!(
            "graph order {} exceeds the BFS cap of {MAX_BFS_ORDER}",
            g.order()
        )));
    }
    Ok(())
}

/// Hop distance from vertex 0 to every vertex, indexed like [`LatticeGraph::label`].
pub fn bfs_distances(g: &LatticeGraph) -> Result<Vec<u32>> {
    check_order(g)?;
    let n = g.order() as usize;
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    dist[0] = 0;
    queue.push_back(0);
    while let Some(u) = queue.pop_front() {
        for w in g.neighbor_indices(u) {
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    Ok(dist)
}

/// BFS from vertex 0 that also keeps, for every vertex, the lexicographically
/// smallest minimum-norm routing record reaching it.
fn bfs_with_records(g: &LatticeGraph) -> Result<(Vec<u32>, Vec<Vec<i64>>)> {
    check_order(g)?;
    let n = g.order() as usize;
    let dim = g.dim();
    let mut dist = vec![u32::MAX; n];
    let mut rec: Vec<Vec<i64>> = vec![Vec::new(); n];
    let mut queue = VecDeque::new();
    dist[0] = 0;
    rec[0] = vec![0; dim];
    queue.push_back(0);
    while let Some(u) = queue.pop_front() {
        for (k, w) in g.neighbor_indices(u).into_iter().enumerate() {
            let mut r = rec[u].clone();
            r[k / 2] += if k % 2 == 0 { 1 } else { -1 };
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                rec[w] = r;
                queue.push_back(w);
            } else if dist[w] == dist[u] + 1 && r < rec[w] {
                rec[w] = r;
            }
        }
    }
    Ok((dist, rec))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceSummary {
    pub nodes: u64,
    pub diameter: u32,
    /// Mean distance to the other `N - 1` vertices.
    pub average: Rational,
    /// `histogram[d]` counts vertices other than the source at distance `d`.
    pub histogram: Vec<u64>,
    /// Mean `|r_i|` over the canonical minimal records of all `N` vertices.
    pub per_dim_average: Vec<Rational>,
}

/// Single-source distance summary; exact for every source since lattice
/// graphs are vertex-transitive.
pub fn distance_summary(g: &LatticeGraph) -> Result<DistanceSummary> {
    let (dist, rec) = bfs_with_records(g)?;
    let n = g.order() as i64;
    let diameter = dist.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0u64; diameter as usize + 1];
    for &d in &dist[1..] {
        histogram[d as usize] += 1;
    }
    let total: i64 = dist.iter().map(|&d| d as i64).sum();
    let average = if n > 1 { Rational::new(total, n - 1) } else { Rational::from_integer(0) };
    let per_dim_average = (0..g.dim())
        .map(|i| Rational::new(rec.iter().map(|r| r[i].abs()).sum(), n))
        .collect();
    Ok(DistanceSummary { nodes: g.order(), diameter, average, histogram, per_dim_average })
}

/// Distance distribution over all ordered pairs (each source's histogram summed).
pub fn all_sources_histogram(g: &LatticeGraph) -> Result<Vec<u64>> {
    check_order(g)?;
    let n = g.order() as usize;
    let mut hist: Vec<u64> = Vec::new();
    for s in 0..n {
        let mut dist = vec![u32::MAX; n];
        let mut queue = VecDeque::from([s]);
        dist[s] = 0;
        while let Some(u) = queue.pop_front() {
            for w in g.neighbor_indices(u) {
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        for (v, &d) in dist.iter().enumerate() {
            if v != s {
                if hist.len() <= d as usize {
                    hist.resize(d as usize + 1, 0);
                }
                hist[d as usize] += 1;
            }
        }
    }
    Ok(hist)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosedForm {
    pub diameter: u32,
    pub average: Rational,
}

fn ring_distance_sum(m: i64) -> i64 {
    if m % 2 == 0 {
        m * m / 4
    } else {
        (m * m - 1) / 4
    }
}

/// Diameter and average distance from the known formulas. Supported kinds:
/// PC, FCC, BCC and mixed-radix tori.
pub fn closed_form(kind: &TopologyKind) -> Result<ClosedForm> {
    let r = Rational::new;
    match *kind {
        TopologyKind::Pc { a } if a >= 1 => {
            // PC(1) is a single vertex.
            let avg = if a == 1 {
                r(0, 1)
            } else if a % 2 == 0 {
                r(3 * a.pow(4), 4 * (a.pow(3) - 1))
            } else {
                r(3 * a.pow(4) - 3 * a * a, 4 * (a.pow(3) - 1))
            };
            Ok(ClosedForm { diameter: (3 * (a / 2)) as u32, average: avg })
        }
        TopologyKind::Fcc { a } if a >= 1 => {
            let num = if a % 2 == 0 { 7 * a.pow(4) - 2 * a * a } else { 7 * a.pow(4) - 2 * a * a - 1 };
            Ok(ClosedForm { diameter: (3 * a / 2) as u32, average: r(num, 4 * (2 * a.pow(3) - 1)) })
        }
        TopologyKind::Bcc { a } if a >= 1 => {
            let num = if a % 2 == 0 {
                35 * a.pow(4) - 8 * a * a
            } else {
                35 * a.pow(4) - 14 * a * a + 3
            };
            Ok(ClosedForm { diameter: (3 * a / 2) as u32, average: r(num, 8 * (4 * a.pow(3) - 1)) })
        }
        TopologyKind::Torus { ref sides } if !sides.is_empty() && sides.iter().all(|&s| s >= 1) => {
            let n: i64 = sides.iter().product();
            let total: i64 = sides.iter().map(|&m| n / m * ring_distance_sum(m)).sum();
            let diameter = sides.iter().map(|&m| m / 2).sum::<i64>() as u32;
            let average = if n > 1 { r(total, n - 1) } else { r(0, 1) };
            Ok(ClosedForm { diameter, average })
        }
        _ => Err(Error::Unsupported(format!("no closed form for {kind}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `2n / k̄`
    Symmetric,
    /// `2n / (n · max_i k̄_i)`
    MixedRadix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThroughputBound {
    /// Phits per cycle per node.
    pub value: Rational,
    pub kind: BoundKind,
}

/// Upper bound on uniform-traffic throughput. Symmetric graphs load every
/// link equally, so the bound is degree over average distance; otherwise the
/// busiest dimension limits it.
pub fn throughput_bound(g: &LatticeGraph, summary: &DistanceSummary, symmetric: bool) -> Result<ThroughputBound> {
    let n = g.dim() as i64;
    let degree = Rational::from_integer(2 * n);
    if symmetric {
        if summary.average == Rational::from_integer(0) {
            return Err(Error::Precondition("bound undefined for a single vertex".into()));
        }
        Ok(ThroughputBound { value: degree / summary.average, kind: BoundKind::Symmetric })
    } else {
        let worst = summary.per_dim_average.iter().copied().max().unwrap_or_default();
        if worst == Rational::from_integer(0) {
            return Err(Error::Precondition("bound undefined for a single vertex".into()));
        }
        Ok(ThroughputBound { value: degree / (worst * n), kind: BoundKind::MixedRadix })
    }
}

/// Rows of the comparison table of larger lattice graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Table2Row {
    /// `T(2a,2a) ⊞ RTT(a)`
    TorusRtt,
    Fcc4,
    Bcc4,
    Lip,
    /// `PC(2a) ⊞ BCC(a)`
    PcBcc,
    /// `PC(2a) ⊞ FCC(a)`
    PcFcc,
    /// `BCC(a) ⊞ FCC(a)`
    BccFcc,
}

impl Table2Row {
    pub const ALL: [Table2Row; 7] = [
        Table2Row::TorusRtt,
        Table2Row::Fcc4,
        Table2Row::Bcc4,
        Table2Row::Lip,
        Table2Row::PcBcc,
        Table2Row::PcFcc,
        Table2Row::BccFcc,
    ];

    pub fn matrix(self, a: i64) -> Result<IntMatrix> {
        use TopologyKind as K;
        let lift = |x: K, y: K| common_lift(&x.matrix()?, &y.matrix()?);
        match self {
            Table2Row::TorusRtt => lift(K::Torus { sides: vec![2 * a, 2 * a] }, K::Rtt { a }),
            Table2Row::Fcc4 => K::Fcc4 { a }.matrix(),
            Table2Row::Bcc4 => K::Bcc4 { a }.matrix(),
            Table2Row::Lip => K::Lip { a }.matrix(),
            Table2Row::PcBcc => lift(K::Pc { a: 2 * a }, K::Bcc { a }),
            Table2Row::PcFcc => lift(K::Pc { a: 2 * a }, K::Fcc { a }),
            Table2Row::BccFcc => lift(K::Bcc { a }, K::Fcc { a }),
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            Table2Row::TorusRtt => 3,
            Table2Row::PcFcc | Table2Row::BccFcc => 5,
            _ => 4,
        }
    }

    /// `(c, k)` with order `c·a^k`.
    pub fn order_formula(self) -> (u64, u32) {
        match self {
            Table2Row::TorusRtt => (4, 3),
            Table2Row::Fcc4 => (2, 4),
            Table2Row::Bcc4 => (8, 4),
            Table2Row::Lip => (16, 4),
            Table2Row::PcBcc => (8, 4),
            Table2Row::PcFcc => (8, 5),
            Table2Row::BccFcc => (4, 5),
        }
    }

    /// Diameter as a multiple of `a`, as `(numerator, denominator)`.
    pub fn diameter_coefficient(self) -> (u32, u32) {
        match self {
            Table2Row::TorusRtt | Table2Row::Fcc4 | Table2Row::Bcc4 => (2, 1),
            Table2Row::Lip => (3, 1),
            Table2Row::PcBcc | Table2Row::BccFcc => (5, 2),
            Table2Row::PcFcc => (7, 2),
        }
    }

    /// Asymptotic average distance divided by `a`.
    pub fn average_coefficient(self) -> f64 {
        match self {
            Table2Row::TorusRtt => 1.14877,
            Table2Row::Fcc4 => 1.10396,
            Table2Row::Bcc4 => 1.5379,
            Table2Row::Lip => 1.815,
            Table2Row::PcBcc => 1.59715,
            Table2Row::PcFcc => 1.87856,
            Table2Row::BccFcc => 1.52522,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Table2Row::TorusRtt => "T(2a,2a)+RTT(a)",
            Table2Row::Fcc4 => "4D-FCC(a)",
            Table2Row::Bcc4 => "4D-BCC(a)",
            Table2Row::Lip => "Lip(a)",
            Table2Row::PcBcc => "PC(2a)+BCC(a)",
            Table2Row::PcFcc => "PC(2a)+FCC(a)",
            Table2Row::BccFcc => "BCC(a)+FCC(a)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table2Measurement {
    pub dimension: usize,
    pub order: u64,
    pub diameter: u32,
    pub average: Rational,
}

/// Builds the row's graph at side `a` and measures it by BFS.
pub fn table2_check(row: Table2Row, a: i64) -> Result<Table2Measurement> {
    let g = LatticeGraph::new(row.matrix(a)?)?;
    check_order(&g)?;
    let d = bfs_distances(&g)?;
    let n = g.order() as i64;
    let total: i64 = d.iter().map(|&x| x as i64).sum();
    Ok(Table2Measurement {
        dimension: g.dim(),
        order: g.order(),
        diameter: d.iter().copied().max().unwrap_or(0),
        average: Rational::new(total, (n - 1).max(1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_topology;

    fn summary(kind: TopologyKind) -> DistanceSummary {
        distance_summary(&make_topology(&kind).unwrap()).unwrap()
    }

    #[test]
    fn crystal_examples() {
        let pc = summary(TopologyKind::Pc { a: 4 });
        assert_eq!((pc.diameter, pc.average), (6, Rational::new(64, 21)));
        let fcc = summary(TopologyKind::Fcc { a: 2 });
        assert_eq!((fcc.diameter, fcc.average), (3, Rational::new(26, 15)));
        let bcc = summary(TopologyKind::Bcc { a: 2 });
        assert_eq!((bcc.diameter, bcc.average), (3, Rational::new(66, 31)));
        assert_eq!(pc.histogram.iter().sum::<u64>(), 63);
        assert_eq!(pc.histogram[0], 0);
    }

    #[test]
    fn closed_form_examples() {
        let pc5 = closed_form(&TopologyKind::Pc { a: 5 }).unwrap();
        assert_eq!(pc5.average, Rational::new(1800, 496));
        let t = closed_form(&TopologyKind::Torus { sides: vec![8, 4, 4] }).unwrap();
        assert_eq!(t.diameter, 8);
        // BFS on BCC(3) sums to 339 over 107 vertices.
        let bcc3 = closed_form(&TopologyKind::Bcc { a: 3 }).unwrap();
        assert_eq!(bcc3.average, Rational::new(339, 107));
        assert!(closed_form(&TopologyKind::Lip { a: 2 }).is_err());
    }

    #[test]
    fn torus_closed_form_matches_bfs() {
        for sides in [vec![5, 3], vec![8, 4, 4], vec![6, 6, 3], vec![2]] {
            let kind = TopologyKind::Torus { sides };
            let s = summary(kind.clone());
            let c = closed_form(&kind).unwrap();
            assert_eq!((s.diameter, s.average), (c.diameter, c.average), "{kind}");
        }
    }

    #[test]
    fn bounds() {
        let g = make_topology(&TopologyKind::Fcc { a: 4 }).unwrap();
        let s = distance_summary(&g).unwrap();
        let b = throughput_bound(&g, &s, true).unwrap();
        assert_eq!(b.value, Rational::from_integer(6) / s.average);
        let kind = TopologyKind::Torus { sides: vec![8, 4, 4] };
        let g = make_topology(&kind).unwrap();
        let s = distance_summary(&g).unwrap();
        let b = throughput_bound(&g, &s, false).unwrap();
        assert_eq!(b.value, Rational::from_integer(1));
        assert_eq!(b.kind, BoundKind::MixedRadix);
    }

    #[test]
    fn per_dim_average_of_torus_is_ring_mean() {
        let s = summary(TopologyKind::Torus { sides: vec![8, 4, 5] });
        assert_eq!(s.per_dim_average, vec![Rational::new(2, 1), Rational::new(1, 1), Rational::new(6, 5)]);
    }

    #[test]
    fn table2_small() {
        let m = table2_check(Table2Row::Fcc4, 2).unwrap();
        assert_eq!((m.order, m.diameter), (32, 4));
        assert_eq!(table2_check(Table2Row::Bcc4, 2).unwrap().order, 128);
        let lip = table2_check(Table2Row::Lip, 2).unwrap();
        assert_eq!((lip.order, lip.diameter), (256, 6));
        assert_eq!(table2_check(Table2Row::TorusRtt, 2).unwrap().dimension, 3);
    }

    #[test]
    fn order_cap() {
        let g = make_topology(&TopologyKind::Pc { a: 101 }).unwrap();
        assert!(matches!(bfs_distances(&g), Err(Error::ResourceLimit(_))));
    }
}
