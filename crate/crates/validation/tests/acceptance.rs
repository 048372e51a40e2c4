//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion (with the failing sub-checks underneath) and exits non-zero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use lattice_net::intmat::{IntMatrix, IntVector};
use lattice_net::lattice::{common_lift, make_topology, LatticeGraph, TopologyKind};
use lattice_net::metrics::{closed_form, distance_summary, throughput_bound, Rational};
use lattice_net::routing::{fcc_trace, verify_minimality, GenericRouter, Router, RoutingRecord, TieBreak};
use lattice_net::simulator::{default_threads, run_parallel, run_simulation, SimConfig, SimStats, TrafficPattern};
use lattice_net::symmetry::{
    bcc_lift_scan, intertwiners, linear_automorphism_quotient, stabilizer, verify_similarity_witness,
    SignedPermutation,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Checks {
    items: Vec<(bool, String)>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.items.push((ok, what.into()));
    }

    fn passed(&self) -> bool {
        self.items.iter().all(|(ok, _)| *ok)
    }
}

fn mat<const N: usize>(rows: [[i64; N]; N]) -> IntMatrix {
    IntMatrix::from_rows(&rows).unwrap()
}

fn graph(kind: &TopologyKind) -> LatticeGraph {
    make_topology(kind).unwrap()
}

fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Reference average-distance formulas, kept independent of
/// the library's `closed_form`.
fn reference_average(kind: &TopologyKind) -> Rational {
    let r = Rational::new;
    match *kind {
        TopologyKind::Pc { a } if a % 2 == 0 => r(3 * a.pow(4), 4 * (a.pow(3) - 1)),
        TopologyKind::Pc { a } => r(3 * a.pow(4) - 3 * a * a, 4 * (a.pow(3) - 1)),
        TopologyKind::Fcc { a } if a % 2 == 0 => r(7 * a.pow(4) - 2 * a * a, 4 * (2 * a.pow(3) - 1)),
        TopologyKind::Fcc { a } => r(7 * a.pow(4) - 2 * a * a - 1, 4 * (2 * a.pow(3) - 1)),
        TopologyKind::Bcc { a } if a % 2 == 0 => r(35 * a.pow(4) - 8 * a * a, 8 * (4 * a.pow(3) - 1)),
        TopologyKind::Bcc { a } => r(35 * a.pow(4) - 14 * a * a + 30, 8 * (4 * a.pow(3) - 1)),
        _ => unreachable!(),
    }
}

fn reference_diameter(kind: &TopologyKind) -> u32 {
    match *kind {
        TopologyKind::Pc { a } => (3 * (a / 2)) as u32,
        TopologyKind::Fcc { a } | TopologyKind::Bcc { a } => (3 * a / 2) as u32,
        _ => unreachable!(),
    }
}

fn criterion_1(c: &mut Checks) {
    for a in 2..=8i64 {
        for kind in [TopologyKind::Pc { a }, TopologyKind::Fcc { a }, TopologyKind::Bcc { a }] {
            let s = distance_summary(&graph(&kind)).unwrap();
            let lib = closed_form(&kind).unwrap();
            let printed = reference_average(&kind);
            c.check(s.diameter == reference_diameter(&kind), format!("{kind} diameter {}", s.diameter));
            c.check(s.diameter == lib.diameter, format!("{kind} closed-form diameter {}", lib.diameter));
            c.check(s.average == lib.average, format!("{kind} average {} = closed form {}", s.average, lib.average));
            match kind {
                TopologyKind::Bcc { a } if a % 2 == 1 => {
                    // The printed odd-a constant +30 overshoots by exactly 27/(8(4a³-1)).
                    let gap = printed - s.average;
                    c.check(
                        gap == Rational::new(27, 8 * (4 * a.pow(3) - 1)),
                        format!("{kind} printed +30 constant differs from BFS by {gap}"),
                    );
                }
                _ => c.check(s.average == printed, format!("{kind} average equals reference formula")),
            }
        }
    }
}

fn criterion_2(c: &mut Checks) {
    let kind = TopologyKind::Fcc { a: 4 };
    let g = graph(&kind);
    let (vs, vd): (IntVector, IntVector) = ([1, 3, 3].into(), [6, 0, 1].into());
    let delta = vd.checked_sub(&vs).unwrap();
    let trace = fcc_trace(4, &delta).unwrap();
    c.check(trace.normalized == IntVector::from([5, 1, 2]), format!("normalized {:?}", trace.normalized));
    c.check(
        trace.near.norm() == 6 && trace.wrapped.norm() == 4,
        format!("candidate norms {} and {}", trace.near.norm(), trace.wrapped.norm()),
    );
    let specialized = Router::specialized(&kind).unwrap();
    let r = specialized.route(&vs, &vd, &mut TieBreak::Canonical).unwrap();
    c.check(r == RoutingRecord::new([1, 1, -2]), format!("canonical record {r}"));
    let generic = GenericRouter::new(&g).unwrap();
    let r = generic.route(&vs, &vd, &mut TieBreak::Canonical).unwrap();
    c.check(r.norm() == 4 && g.apply_record(&vs, &r).unwrap() == vd, format!("generic record {r}"));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..32 {
        let r = generic.route(&vs, &vd, &mut TieBreak::Random(&mut rng)).unwrap();
        c.check(r.norm() == 4 && g.apply_record(&vs, &r).unwrap() == vd, format!("random-tie record {r}"));
    }
}

fn criterion_3(c: &mut Checks) {
    let mut run = |label: String, g: &LatticeGraph, router: &Router| {
        let report = verify_minimality(g, router, 0, 0).unwrap();
        let all = report.pairs_checked == g.order() * g.order();
        c.check(
            all && report.violations.is_empty(),
            format!("{label}: {} pairs, {} violations", report.pairs_checked, report.violations.len()),
        );
    };
    for a in 1..=8 {
        let k = TopologyKind::Rtt { a };
        run(format!("{k} closed form"), &graph(&k), &Router::specialized(&k).unwrap());
    }
    for a in 1..=4 {
        for k in [TopologyKind::Fcc { a }, TopologyKind::Bcc { a }] {
            run(format!("{k} closed form"), &graph(&k), &Router::specialized(&k).unwrap());
        }
    }
    let mut generic: Vec<(String, IntMatrix)> = vec![(
        "example 2".into(),
        mat([[4, 0, 0], [0, 4, 2], [0, 0, 4]]),
    )];
    for k in [
        TopologyKind::Fcc { a: 3 },
        TopologyKind::Bcc { a: 3 },
        TopologyKind::Fcc4 { a: 2 },
        TopologyKind::Bcc4 { a: 2 },
    ] {
        generic.push((k.to_string(), k.matrix().unwrap()));
    }
    let hybrid = common_lift(&TopologyKind::Pc { a: 4 }.matrix().unwrap(), &TopologyKind::Bcc { a: 2 }.matrix().unwrap())
        .unwrap();
    generic.push(("PC(4)+BCC(2)".into(), hybrid));
    for (label, m) in generic {
        let g = LatticeGraph::new(m).unwrap();
        run(format!("{label} hierarchical"), &g, &Router::generic(&g).unwrap());
    }
}

fn criterion_4(c: &mut Checks) {
    let symmetric = [
        TopologyKind::Pc { a: 2 },
        TopologyKind::Fcc { a: 2 },
        TopologyKind::Fcc { a: 3 },
        TopologyKind::Bcc { a: 2 },
        TopologyKind::Bcc { a: 3 },
        TopologyKind::Fcc4 { a: 2 },
        TopologyKind::Bcc4 { a: 2 },
        TopologyKind::Lip { a: 2 },
    ];
    for k in symmetric {
        let s = stabilizer(&k.matrix().unwrap()).unwrap();
        c.check(s.symmetric, format!("{k} symmetric ({} members)", s.members.len()));
    }
    for sides in [vec![4, 2, 2], vec![8, 4, 4]] {
        let k = TopologyKind::Torus { sides };
        let s = stabilizer(&k.matrix().unwrap()).unwrap();
        c.check(!s.symmetric, format!("{k} not symmetric"));
    }
    for a in 1..=3 {
        c.check(bcc_lift_scan(a).unwrap(), format!("no symmetric lift of BCC({a})"));
    }

    let p1 = mat([[0, 0, 1], [1, 0, 0], [0, 1, 0]]);
    let p2 = mat([[0, 0, 1], [-1, 0, 0], [0, -1, 0]]);
    let p3 = mat([[0, 0, -1], [1, 0, 0], [0, -1, 0]]);
    let p4 = mat([[0, 0, -1], [-1, 0, 0], [0, 1, 0]]);
    let q1 = mat([[1, 0, 0], [0, -1, 1], [0, -1, 0]]);
    let q2 = mat([[1, 0, 1], [0, -1, 1], [0, -1, 0]]);
    let q3 = mat([[1, 0, 2], [0, -1, 1], [0, -1, 0]]);
    let witnesses = [
        ("P1 ~ Q2", &p1, &q2, mat([[1, 0, 0], [1, -1, 1], [1, 0, 1]])),
        ("P1 ~ P2", &p1, &p2, IntMatrix::diag(&[-1, 1, -1]).unwrap()),
        ("P1 ~ P3", &p1, &p3, IntMatrix::diag(&[1, 1, -1]).unwrap()),
        ("P1 ~ P4", &p1, &p4, IntMatrix::diag(&[1, -1, -1]).unwrap()),
        ("Q2 ~ Q3", &q2, &q3, mat([[1, 0, 1], [0, 0, 1], [0, -1, 1]])),
    ];
    for (label, a, b, u) in witnesses {
        c.check(verify_similarity_witness(a, b, &u), format!("witness {label}"));
    }
    let mut family_ok = true;
    for m in -3..=3i64 {
        for n in -3..=3i64 {
            let u = mat([[1, n, m], [0, 1, 0], [0, 0, 1]]);
            let b = mat([[1, m + 2 * n, m - n], [0, -1, 1], [0, -1, 0]]);
            family_ok &= verify_similarity_witness(&q1, &b, &u);
        }
    }
    c.check(family_ok, "parameterised Q1 family witnesses, m,n in [-3,3]");

    // Q1·X = X·Q2 forces X[0][0] = -3·X[0][1] and a zero first column below
    // it, so 3 divides det X.
    let solutions = intertwiners(&q1, &q2, 2).unwrap();
    let obstruction = solutions.iter().all(|x| {
        x[(1, 0)] == 0 && x[(2, 0)] == 0 && x[(0, 0)] == -3 * x[(0, 1)] && x.determinant().unwrap() % 3 == 0
    });
    c.check(
        obstruction && !solutions.iter().any(|x| x.is_unimodular()),
        format!("Q1 vs Q2: {} intertwiners in [-2,2]^9, all with 3 | det", solutions.len()),
    );

    // Commuting families and the alternate family.
    let mut families_ok = true;
    for (a, b, cc) in [(1i64, 2i64, 3i64), (4, 0, 1), (2, -1, 5), (0, 1, 1)] {
        let m1 = mat([[a, cc, b], [b, a, cc], [cc, b, a]]);
        let m2 = mat([[a, -cc, -b], [b, a, -cc], [cc, b, a]]);
        let m3 = mat([[a, -cc, -b], [b, a, cc], [cc, -b, a]]);
        let m4 = mat([[a, cc, b], [b, a, -cc], [cc, -b, a]]);
        for (p, m) in [(&p1, &m1), (&p2, &m2), (&p3, &m3), (&p4, &m4)] {
            families_ok &= p.checked_mul(m).unwrap() == m.checked_mul(p).unwrap();
        }
        let m1p = mat([[a, b, cc], [a, cc, -b - cc], [a, -b - cc, b]]);
        let m2p = mat([[a, b, cc], [-a, -cc, b + cc], [a, -b - cc, b]]);
        let m3p = mat([[a, b, cc], [a, cc, -b - cc], [-a, b + cc, -b]]);
        let m4p = mat([[a, b, cc], [-a, -cc, b + cc], [-a, b + cc, -b]]);
        for (p, m) in [(&p1, &m1p), (&p2, &m2p), (&p3, &m3p), (&p4, &m4p)] {
            families_ok &= p.checked_mul(m).unwrap() == m.checked_mul(&q1).unwrap();
        }
        let d = |x: [i64; 3]| IntMatrix::diag(&x).unwrap();
        let sandwich = |l: [i64; 3], r: [i64; 3]| d(l).checked_mul(&m1).unwrap().checked_mul(&d(r)).unwrap();
        families_ok &= sandwich([-1, 1, 1], [1, -1, -1]) == mat([[-a, cc, b], [b, -a, -cc], [cc, -b, -a]]);
        families_ok &= sandwich([1, -1, 1], [-1, 1, -1]) == mat([[-a, cc, -b], [b, -a, cc], [-cc, b, -a]]);
        families_ok &= sandwich([1, 1, -1], [1, 1, -1]) == mat([[a, cc, -b], [b, a, -cc], [-cc, -b, a]]);
        families_ok &= m1p == d([1, -1, 1]).checked_mul(&m2p).unwrap();
        families_ok &= m1p == d([1, 1, -1]).checked_mul(&m3p).unwrap();
        families_ok &= m1p == d([1, -1, -1]).checked_mul(&m4p).unwrap();
    }
    c.check(families_ok, "family identities P_i M_i = M_i P_i, P_i M_i' = M_i' Q1 and sign-diagonal isomorphisms");

    let shift = SignedPermutation::from_matrix(&mat([[0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]])).unwrap();
    let q = linear_automorphism_quotient(&TopologyKind::Bcc4 { a: 3 }.matrix().unwrap(), &shift).unwrap();
    c.check(
        q == Some(mat([[0, 0, -1, 0], [1, 0, -1, 0], [0, 1, -1, 0], [0, 0, 2, 1]])),
        "4D-BCC cyclic shift quotient",
    );
}

fn catalog_up_to_512() -> Vec<(String, LatticeGraph)> {
    let mut kinds: Vec<TopologyKind> = Vec::new();
    kinds.extend((1..=8).map(|a| TopologyKind::Pc { a }));
    kinds.extend((1..=6).map(|a| TopologyKind::Fcc { a }));
    kinds.extend((1..=5).map(|a| TopologyKind::Bcc { a }));
    kinds.extend((1..=16).map(|a| TopologyKind::Rtt { a }));
    kinds.extend((1..=4).map(|a| TopologyKind::Fcc4 { a }));
    kinds.extend((1..=2).map(|a| TopologyKind::Bcc4 { a }));
    kinds.extend((1..=1).map(|a| TopologyKind::Lip { a }));
    for sides in [vec![8, 4, 4], vec![8, 8, 4], vec![4, 4, 4, 2], vec![8, 4, 4, 4], vec![5, 3]] {
        kinds.push(TopologyKind::Torus { sides });
    }
    for parts in [
        vec![TopologyKind::Pc { a: 4 }, TopologyKind::Bcc { a: 2 }],
        vec![TopologyKind::Pc { a: 4 }, TopologyKind::Fcc { a: 2 }],
        vec![TopologyKind::Bcc { a: 2 }, TopologyKind::Fcc { a: 2 }],
        vec![TopologyKind::Torus { sides: vec![8, 8] }, TopologyKind::Rtt { a: 4 }],
    ] {
        kinds.push(TopologyKind::Hybrid { parts });
    }
    let mut out: Vec<(String, LatticeGraph)> = kinds.iter().map(|k| (k.to_string(), graph(k))).collect();
    out.push(("example 2".into(), LatticeGraph::new(mat([[4, 0, 0], [0, 4, 2], [0, 0, 4]])).unwrap()));
    out.retain(|(_, g)| g.order() <= 512);
    out
}

fn criterion_5(c: &mut Checks) {
    for (label, g) in catalog_up_to_512() {
        let mut mismatches = 0;
        for v in g.labels() {
            let formula = g.hermite().element_order(&v).unwrap();
            let mut acc = v.clone();
            let mut k = 1;
            while !acc.is_zero() {
                acc = g.reduce(&acc.checked_add(&v).unwrap()).unwrap();
                k += 1;
            }
            mismatches += usize::from(formula != k);
        }
        c.check(mismatches == 0, format!("{label}: {} elements, {mismatches} mismatches", g.order()));
    }
    for a in 1..=8 {
        let g = graph(&TopologyKind::Rtt { a });
        let ord = g.hermite().element_order(&IntVector::unit(2, 1)).unwrap();
        c.check(ord == 2 * a as u64, format!("ord(e2) in RTT({a}) = {ord}"));
    }
    let ex2 = LatticeGraph::new(mat([[4, 0, 0], [0, 4, 2], [0, 0, 4]])).unwrap();
    let ord = ex2.hermite().element_order(&IntVector::unit(3, 2)).unwrap();
    c.check(ord == 8, format!("example 2 cycle length {ord}"));
}

fn bound_of(kind: &TopologyKind) -> Rational {
    let g = graph(kind);
    let s = distance_summary(&g).unwrap();
    let symmetric = stabilizer(g.generator()).unwrap().symmetric;
    throughput_bound(&g, &s, symmetric).unwrap().value
}

fn criterion_6(c: &mut Checks) {
    for a in [4i64, 8] {
        let fcc = TopologyKind::Fcc { a };
        let bcc = TopologyKind::Bcc { a };
        let (bf, bb) = (bound_of(&fcc), bound_of(&bcc));
        c.check(bf == Rational::from_integer(6) / closed_form(&fcc).unwrap().average, format!("{fcc} bound {bf} = 6/k̄"));
        c.check(bb == Rational::from_integer(6) / closed_form(&bcc).unwrap().average, format!("{bcc} bound {bb} = 6/k̄"));
        let fcc_asym = 48.0 / (7.0 * a as f64);
        let bcc_asym = 192.0 / (35.0 * a as f64);
        let dev_f = (ratio_f64(bf) - fcc_asym).abs() / fcc_asym;
        let dev_b = (ratio_f64(bb) - bcc_asym).abs() / bcc_asym;
        c.check(dev_f <= 0.02, format!("{fcc} bound {:.5} vs 48/(7a) = {fcc_asym:.5} ({:.2}%)", ratio_f64(bf), 100.0 * dev_f));
        c.check(dev_b <= 0.02, format!("{bcc} bound {:.5} vs 192/(35a) = {bcc_asym:.5} ({:.2}%)", ratio_f64(bb), 100.0 * dev_b));
        let t1 = TopologyKind::Torus { sides: vec![2 * a, a, a] };
        let t2 = TopologyKind::Torus { sides: vec![2 * a, 2 * a, a] };
        let (bt1, bt2) = (bound_of(&t1), bound_of(&t2));
        let four_over_a = Rational::new(4, a);
        c.check(bt1 == four_over_a, format!("{t1} bound {bt1} = 4/a"));
        c.check(bt2 == four_over_a, format!("{t2} bound {bt2} = 4/a"));
        let gain_f = 100.0 * (ratio_f64(bf / bt1) - 1.0);
        let gain_b = 100.0 * (ratio_f64(bb / bt2) - 1.0);
        c.check((gain_f - 71.0).abs() <= 2.0, format!("a={a}: FCC over T(2a,a,a) gain {gain_f:.2}% (target 71 ± 2)"));
        c.check((gain_b - 37.0).abs() <= 2.0, format!("a={a}: BCC over T(2a,2a,a) gain {gain_b:.2}% (target 37 ± 2)"));
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn conserved(s: &SimStats) -> bool {
    s.generated_packets == s.delivered_total + s.in_network + s.queued && s.hop_mismatches == 0
}

fn criterion_7(c: &mut Checks) {
    const SEEDS: u64 = 5;
    let loads = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    let lattice = TopologyKind::Bcc4 { a: 2 };
    let torus = TopologyKind::Torus { sides: vec![4, 4, 4, 2] };
    let threads = default_threads();
    let mut peaks = Vec::new();
    let mut low_latency = Vec::new();
    for kind in [&lattice, &torus] {
        let jobs: Vec<SimConfig> = loads
            .iter()
            .flat_map(|&load| {
                (0..SEEDS).map(move |seed| SimConfig {
                    seed,
                    ..SimConfig::new(kind.clone(), TrafficPattern::Uniform, load)
                })
            })
            .collect();
        let runs = run_parallel(&jobs, threads).unwrap();
        let bad = runs.iter().filter(|s| !conserved(s)).count();
        c.check(bad == 0, format!("{kind}: {} runs, {bad} conservation or hop-count failures", runs.len()));
        let points: Vec<(f64, f64, f64)> = loads
            .iter()
            .zip(runs.chunks(SEEDS as usize))
            .map(|(&l, rs)| (l, mean(rs.iter().map(|s| s.accepted_load)), mean(rs.iter().map(|s| s.avg_latency))))
            .collect();
        let peak = points.iter().map(|p| p.1).fold(0.0, f64::max);
        let saturated = points.iter().any(|&(l, acc, _)| acc < 0.95 * l);
        let bound = ratio_f64(bound_of(kind));
        c.check(peak <= bound * 1.02, format!("{kind}: peak accepted {peak:.4} ≤ bound {bound:.4} + 2%"));
        peaks.push((kind.to_string(), peak, saturated));
        low_latency.push((points[0].2, ratio_f64(distance_summary(&graph(kind)).unwrap().average)));
    }
    let (l, t) = (&peaks[0], &peaks[1]);
    c.check(
        l.2 && t.2 && l.1 > t.1,
        format!(
            "saturation throughput {} {:.4} (saturated: {}) vs {} {:.4} (saturated: {})",
            l.0, l.1, l.2, t.0, t.1, t.2
        ),
    );
    let (lat_l, k_l) = low_latency[0];
    let (lat_t, k_t) = low_latency[1];
    c.check(
        (lat_l < lat_t) == (k_l < k_t),
        format!("load 0.05 latency {lat_l:.2} vs {lat_t:.2}, average distance {k_l:.3} vs {k_t:.3}"),
    );
    let config = SimConfig { seed: 42, ..SimConfig::new(lattice.clone(), TrafficPattern::Uniform, 0.6) };
    c.check(run_simulation(&config).unwrap() == run_simulation(&config).unwrap(), "identical seeds, identical stats");
}

fn criterion_8(c: &mut Checks) {
    let kinds = [
        TopologyKind::Bcc4 { a: 2 },
        TopologyKind::Torus { sides: vec![4, 4, 4, 2] },
        TopologyKind::Fcc4 { a: 4 },
        TopologyKind::Torus { sides: vec![8, 4, 4, 4] },
    ];
    let mut jobs = Vec::new();
    for kind in &kinds {
        for pattern in TrafficPattern::ALL {
            jobs.push(SimConfig {
                warmup_cycles: 2000,
                measure_cycles: 3000,
                seed: 7,
                ..SimConfig::new(kind.clone(), pattern, 1.0)
            });
        }
    }
    let runs = run_parallel(&jobs, default_threads()).unwrap();
    for (job, s) in jobs.iter().zip(&runs) {
        let diameter = distance_summary(&graph(&job.topology)).unwrap().diameter as u64;
        c.check(
            conserved(s) && s.delivered_packets > 0 && s.max_delivery_gap <= 10 * diameter,
            format!(
                "{} {}: accepted {:.3}, longest delivery gap {} (limit {})",
                s.topology,
                s.pattern.name(),
                s.accepted_load,
                s.max_delivery_gap,
                10 * diameter
            ),
        );
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn(&mut Checks)); 8] = [
        ("closed-form distance reproduction", criterion_1),
        ("worked routing example", criterion_2),
        ("routing minimality oracle", criterion_3),
        ("symmetry classification", criterion_4),
        ("element-order formula", criterion_5),
        ("throughput bounds", criterion_6),
        ("simulation comparison", criterion_7),
        ("deadlock freedom under adversarial patterns", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut checks = Checks::default();
        run(&mut checks);
        let ok = checks.passed();
        println!(
            "[{}] criterion {id}: {name} ({} checks, {:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            checks.items.len(),
            start.elapsed().as_secs_f64()
        );
        for (pass, what) in &checks.items {
            if !pass || std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
                println!("    {} {what}", if *pass { "ok  " } else { "FAIL" });
            }
        }
        failed += usize::from(!ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
