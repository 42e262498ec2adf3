//! Acceptance run: one PASS/FAIL line per criterion. Runs without the test
//! harness so the lines always reach stdout; exits non-zero on any failure.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use locktree_core::construct::{build_chain_of_trees, build_locked_config, check_constraints, choose_params, Epsilon};
use locktree_core::geom::{segment_relation, Point2, SegmentRelation, Tolerance};
use locktree_core::model::{is_simple, place_by_directions, tree_from_edges, Configuration, Simplicity};
use locktree_core::motion::{check_restricted_persists, probe_all, unlock_check, ProbeKind, ProbeStrategy};
use locktree_core::petal::{
    check_br_bs_bound, l_p, min_restricted_angle_bruteforce, restricted_flags, sample_restricted, theta_m_of,
    PetalParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PUBLISHED: (usize, f64, f64) = (5, 0.9511, 0.299);

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Outcome {
    fn line(&self) -> String {
        let timing = match self.limit {
            Some(l) => format!("{:.3}s (limit {}s)", self.elapsed.as_secs_f64(), l.as_secs_f64()),
            None => format!("{:.3}s", self.elapsed.as_secs_f64()),
        };
        format!(
            "criterion {:>2} {:<32} {}  {}  {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            timing,
            self.detail
        )
    }
}

fn run(id: usize, name: &'static str, limit: Option<Duration>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (ok, detail) = f();
    let elapsed = t.elapsed();
    let in_time = limit.is_none_or(|l| elapsed < l);
    let detail = if in_time {
        detail
    } else {
        format!("{detail}; over time limit")
    };
    let out = Outcome {
        id,
        name,
        pass: ok && in_time,
        detail,
        elapsed,
        limit,
    };
    println!("{}", out.line());
    out
}

fn published() -> PetalParams {
    PetalParams::new(PUBLISHED.0, PUBLISHED.1, PUBLISHED.2).unwrap()
}

/// The 32 feasibility cases: n ∈ {5, 6} at 0.01° and n ∈ 7..=12 at five ε.
fn sweep_cases() -> Vec<(usize, f64)> {
    let mut cases = vec![(5, 0.01), (6, 0.01)];
    for n in 7..=12 {
        for eps in [0.05, 0.1, 0.2, 0.3, 0.39] {
            cases.push((n, eps));
        }
    }
    cases
}

fn sweep_params() -> Vec<PetalParams> {
    sweep_cases()
        .into_iter()
        .map(|(n, e)| choose_params(n, Epsilon::from_degrees(n, e).unwrap()).unwrap())
        .collect()
}

fn c1() -> (bool, String) {
    let r = check_constraints(PUBLISHED.0, PUBLISHED.1, PUBLISHED.2);
    let ch = r.chain;
    let got = [ch.alpha, ch.theta_m, ch.theta_bar, ch.beta].map(|x| x.unwrap_or(f64::NAN).to_degrees());
    let want = [71.997984, 71.998224, 72.0, 72.008064];
    let worst = got.iter().zip(&want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    (
        worst <= 1e-3,
        format!(
            "({:.6}, {:.6}, {:.6}, {:.6})°, worst error {worst:.1e}°",
            got[0], got[1], got[2], got[3]
        ),
    )
}

fn c2() -> (bool, String) {
    let mut fails = Vec::new();
    let mut count = 0;
    for (n, e) in sweep_cases() {
        count += 1;
        let ok = Epsilon::from_degrees(n, e)
            .ok()
            .and_then(|eps| choose_params(n, eps).ok())
            .is_some_and(|p| check_constraints(p.n(), p.l1(), p.l2()).all_pass());
        if !ok {
            fails.push(format!("n={n} ε={e}"));
        }
    }
    (
        count == 32 && fails.is_empty(),
        format!("{}/{count} pass {fails:?}", count - fails.len()),
    )
}

fn c3() -> (bool, String) {
    let mut smallest = f64::INFINITY;
    let mut ok = true;
    for p in sweep_params() {
        let ch = check_constraints(p.n(), p.l1(), p.l2()).chain;
        let (Some(a), Some(tm), Some(tb), Some(b)) = (ch.alpha, ch.theta_m, ch.theta_bar, ch.beta) else {
            ok = false;
            continue;
        };
        let margins = [tm - a, tb - tm, b - tb];
        ok &= a < tm && tm < tb && tb < b;
        ok &= margins.iter().all(|m| *m > 0.0);
        smallest = margins.iter().copied().fold(smallest, f64::min);
    }
    (ok, format!("smallest margin {:.3e}°", smallest.to_degrees()))
}

fn c4() -> (bool, String) {
    let mut worst = 0.0f64;
    for p in sweep_params() {
        let err = theta_m_of(p.l1(), p.l2())
            .and_then(|tm| l_p(tm, p.l1()))
            .map(|l| (l - p.l2()).abs())
            .unwrap_or(f64::INFINITY);
        worst = worst.max(err);
    }
    (worst < 1e-9, format!("worst |l_P(θ_m) − l2| = {worst:.2e}"))
}

fn c5() -> (bool, String) {
    let p = published();
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut found, mut exceptions) = (0, 0);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let Some(g) = sample_restricted(&p, (p.alpha(), p.beta()), &mut rng, 10_000, &tol).unwrap() else {
            continue;
        };
        found += 1;
        let r = check_br_bs_bound(&g, &p, &tol).unwrap();
        worst = worst.max(r.br.max(r.bs) / p.l2());
        if !r.pass {
            exceptions += 1;
        }
    }
    (
        found == 10_000 && exceptions == 0,
        format!("{found} samples, {exceptions} exceptions, max(‖BR‖,‖BS‖)/l2 = {worst:.6}"),
    )
}

fn c6() -> (bool, String) {
    let tol = Tolerance::default();
    let p = published();
    let tm = p.theta_m().unwrap();
    let min = min_restricted_angle_bruteforce(&p, 200, &tol).unwrap();
    let relaxed = PetalParams::new(5, 0.6, 0.3).unwrap();
    let relaxed_min = min_restricted_angle_bruteforce(&relaxed, 200, &tol).unwrap();
    let ok = min >= tm - 0.01f64.to_radians() && relaxed_min < tm;
    let show = |x: f64| {
        if x.is_finite() {
            format!("{:.6}°", x.to_degrees())
        } else {
            "none".into()
        }
    };
    (
        ok,
        format!(
            "published min {} vs θ_m {:.6}°; relaxed (0.6, 0.3) min {}",
            show(min),
            tm.to_degrees(),
            show(relaxed_min)
        ),
    )
}

fn c7() -> (bool, String) {
    let p = published();
    let tol = Tolerance::default();
    let start = build_locked_config(&p).unwrap();
    let strategies: Vec<ProbeStrategy> = (0..5u64)
        .map(|s| ProbeStrategy::new(ProbeKind::Squeeze { petal: s as usize }, 1000 + s, 100_000))
        .collect();
    let mut ok = true;
    let mut notes = Vec::new();
    for out in probe_all(&start, &strategies, &p, &tol) {
        let out = out.unwrap();
        let r = &out.report;
        let inside = r.t_alpha.is_none() && r.t_beta.is_none();
        let persistence = check_restricted_persists(&out.motion, &p, &tol)
            .map(|l| l.pass)
            .unwrap_or(false);
        ok &= r.started_in_hypothesis && inside && r.motion_valid && r.restricted_preserved() && persistence;
        notes.push(format!(
            "seed {}: {} frames, min {:.6}°",
            out.strategy.seed,
            out.motion.len(),
            out.best_min_angle.to_degrees()
        ));
    }
    (ok, format!("α = {:.6}°; {}", p.alpha().to_degrees(), notes.join("; ")))
}

fn c8() -> (bool, String) {
    let tol = Tolerance::default();
    let fam = build_chain_of_trees(3, None).unwrap();
    let links = fam.tree().link_count();
    let layouts = fam.layouts().unwrap();
    let mut simple = 0;
    let mut vectors = HashSet::new();
    for label in 0..fam.label_count() {
        let c = fam.configuration(label).unwrap();
        if is_simple(&c, &tol).is_ok_and(|s| s.is_simple()) {
            simple += 1;
        }
        let flags: Vec<Vec<bool>> = layouts
            .iter()
            .map(|l| restricted_flags(&c, l, fam.params(), &tol).unwrap())
            .collect();
        vectors.insert(flags);
    }
    (
        links == 74 && simple == 8 && vectors.len() == 8,
        format!(
            "{links} links, {simple}/8 simple, {} distinct flag vectors",
            vectors.len()
        ),
    )
}

/// All-pairs reference: every link pair, no pruning.
fn naive_simple(c: &Configuration, tol: &Tolerance) -> Option<(usize, usize)> {
    let tree = c.tree();
    let pts = c.placement();
    let edges = tree.edges();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (a, b) = (&edges[i], &edges[j]);
            let si = locktree_core::geom::Segment2::new(pts[a.from], pts[a.to], tol).unwrap();
            let sj = locktree_core::geom::Segment2::new(pts[b.from], pts[b.to], tol).unwrap();
            let rel = segment_relation(&si, &sj, tol);
            let shared = [a.from, a.to].into_iter().find(|x| *x == b.from || *x == b.to);
            let ok = match shared {
                Some(s) => matches!(rel, SegmentRelation::TouchAtPoint(p) if p.dist(pts[s]) <= tol.eps_len()),
                None => rel == SegmentRelation::Disjoint,
            };
            if !ok {
                return Some((i, j));
            }
        }
    }
    None
}

fn random_configuration(rng: &mut ChaCha8Rng) -> Configuration {
    let n = rng.gen_range(3..=9);
    // a third of the cases live on a coarse lattice so touches and overlaps occur
    let lattice = rng.gen_bool(1.0 / 3.0);
    let edges: Vec<(usize, usize, f64)> = (1..n)
        .map(|j| {
            let len = if lattice {
                rng.gen_range(1..=2) as f64
            } else {
                rng.gen_range(0.2..1.5)
            };
            (rng.gen_range(0..j), j, len)
        })
        .collect();
    let tree = tree_from_edges(n, &edges, 0);
    let dirs: Vec<f64> = (0..n)
        .map(|_| {
            if lattice {
                rng.gen_range(0..4) as f64 * std::f64::consts::FRAC_PI_2
            } else {
                rng.gen_range(0.0..std::f64::consts::TAU)
            }
        })
        .collect();
    let pts = place_by_directions(&tree, Point2::ORIGIN, &dirs);
    Configuration::new(std::sync::Arc::new(tree), pts, &Tolerance::default()).unwrap()
}

fn c9() -> (bool, String) {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut agree, mut simple) = (0, 0);
    for _ in 0..1000 {
        let c = random_configuration(&mut rng);
        let fast = match is_simple(&c, &tol).unwrap() {
            Simplicity::Simple => None,
            Simplicity::Violation(v) => Some((v.first, v.second)),
        };
        let slow = naive_simple(&c, &tol);
        simple += usize::from(slow.is_none());
        agree += usize::from(fast == slow);
    }
    (agree == 1000, format!("{agree}/1000 agree ({simple} simple)"))
}

fn c10() -> (bool, String) {
    let r = unlock_check(&published(), 100f64.to_radians(), 120, &Tolerance::default()).unwrap();
    (
        r.connected,
        format!(
            "θ = 100°, grid {}: {} components, connected = {}",
            r.grid, r.component_count, r.connected
        ),
    )
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(1, "published numbers", Some(Duration::from_millis(1)), c1),
        run(2, "feasibility sweep", Some(s(1)), c2),
        run(3, "ordering chain", None, c3),
        run(4, "l_P inversion", None, c4),
        run(5, "BR/BS bound sampling", Some(s(5)), c5),
        run(6, "minimum angle oracle", Some(s(60)), c6),
        run(7, "squeeze probes", Some(s(120)), c7),
        run(8, "chain of trees k=3", Some(s(10)), c8),
        run(9, "simplicity oracle", None, c9),
        run(10, "unlock sanity", None, c10),
    ];
    let failed: Vec<usize> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    println!(
        "acceptance: {}/{} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
