//! One verdict line per acceptance criterion. Parts that can be checked at
//! the stated truncation are asserted; a criterion whose remaining claim is
//! out of reach at that truncation is printed as FAIL with the degree where
//! it first becomes checkable, and does not abort the run.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use ffrt::report::{Entry, Report};
use ffrt_core::koszul_catalog::{check_kjk, KCharacters};
use ffrt_core::polynomial_oracle::{build_equivariant_resolution, gr_invariants_s};
use ffrt_core::sl2_characters::{char_tilting, decompose_into_tiltings, fusion_product, tilting_normal_form, tilting_pieri};
use ffrt_core::summand_catalog::{iterate_limit, tilt_summand_scan, top_tilt_free_index, SummandKind};
use ffrt_core::verifier::check_b1_predictor;

struct Verdict {
    pass: bool,
    detail: String,
    /// Set when the failing part is a known limit of the truncation, not a regression.
    known_gap: bool,
}

impl Verdict {
    fn pass(detail: impl Into<String>) -> Verdict {
        Verdict { pass: true, detail: detail.into(), known_gap: false }
    }
}

fn cli(args: &[&str]) -> (i32, Report) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ffrt").chain(args.iter().copied()).chain(["--format", "json"]);
    let code = ffrt::run(argv, None, &mut out, &mut err);
    assert!(code != 1, "{args:?}: {}", String::from_utf8_lossy(&err));
    (code, serde_json::from_slice(&out).expect("report JSON"))
}

fn find(report: &Report, kind: SummandKind) -> &Entry {
    report
        .entries
        .iter()
        .find(|e| e.kind == kind.name() && e.indices == kind.indices())
        .unwrap_or_else(|| panic!("{kind} missing from report"))
}

fn within(start: Instant, limit: Duration, what: &str) -> Duration {
    let took = start.elapsed();
    assert!(took < limit, "{what} took {took:?}, limit {limit:?}");
    took
}

fn s_invariants_r1() -> Verdict {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut k_confirmed = true;
    for (n, max_k) in [("4", 1u64), ("5", 2)] {
        let (code, report) = cli(&["verify", "s-invariants", "--n", n, "--p", "3", "--r", "1", "--max-degree", "12"]);
        assert_eq!(code, 0);
        assert!(report.consistent, "n={n} inconsistent");
        for l in 0..=1 {
            assert_eq!(find(&report, SummandKind::TiltFree(l)).flag, "confirmed", "n={n} T({l})");
        }
        let ks: Vec<&Entry> = (1..=max_k).map(|j| find(&report, SummandKind::K(j, j))).collect();
        let confirmed: Vec<String> = ks.iter().filter(|e| e.flag == "confirmed").map(|e| format!("{:?}", e.indices)).collect();
        k_confirmed &= !confirmed.is_empty();
        details.push(format!("n={n}: consistent, tilt-free confirmed, K confirmed at D=12: [{}]", confirmed.join(", ")));
    }
    // The first degree at which K(1,1) is forced, for n = 4.
    let (_, at13) = cli(&["verify", "s-invariants", "--n", "4", "--p", "3", "--r", "1", "--max-degree", "13"]);
    let k = find(&at13, SummandKind::K(1, 1));
    assert_eq!(k.confirmed_at, Some(13));
    assert!(k.confirmed_at.unwrap() >= 9);
    let (_, at18) = cli(&["verify", "s-invariants", "--n", "5", "--p", "3", "--r", "1", "--max-degree", "18"]);
    assert!(at18.consistent);
    let k22 = find(&at18, SummandKind::K(2, 2));
    assert_eq!(k22.confirmed_at, Some(18));
    let took = within(start, Duration::from_secs(60), "criterion 1");
    details.push(format!(
        "n=4: K(1,1) first forced at degree 13 (twist {}); n=5: K(2,2) first forced at degree 18; {took:.1?}",
        k.twist.unwrap_or(0)
    ));
    Verdict { pass: k_confirmed, detail: details.join("; "), known_gap: !k_confirmed }
}

fn s_invariants_r2() -> Verdict {
    let start = Instant::now();
    let (code, report) = cli(&["verify", "s-invariants", "--n", "4", "--p", "3", "--r", "2", "--max-degree", "14"]);
    assert_eq!(code, 0);
    assert!(report.consistent);
    assert!(report.entries.iter().all(|e| e.flag != "falsified" && e.flag != "inconclusive"));
    assert_eq!(find(&report, SummandKind::TiltFree(0)).flag, "confirmed");
    assert_eq!(find(&report, SummandKind::K(1, 1)).flag, "unreached");
    let weight_one = gr_invariants_s(4, 3, 2, 9).unwrap();
    assert_eq!(weight_one.multiplicity(1), 4);
    let t1 = find(&report, SummandKind::TiltFree(1)).flag.clone();
    let (_, wider) = cli(&["verify", "s-invariants", "--n", "4", "--p", "3", "--r", "2", "--max-degree", "22"]);
    let first = find(&wider, SummandKind::TiltFree(1)).confirmed_at;
    assert_eq!(first, Some(21));
    let took = within(start, Duration::from_secs(600), "criterion 2");
    let pass = t1 == "confirmed";
    Verdict {
        pass,
        detail: format!(
            "consistent; T(0) confirmed (weight-1 invariants x_i^9 in degree 9 lie in it); K(1,1) unreached; \
             T(1) {t1} at D=14, first forced at degree {}; {took:.1?}",
            first.unwrap()
        ),
        known_gap: !pass,
    }
}

fn tilting_tensor() -> Verdict {
    let mut parts = Vec::new();
    for j in [1u64, 2, 3, 5] {
        let js = j.to_string();
        let (code, report) = cli(&["verify", "tjs", "--n", "4", "--p", "3", "--j", &js, "--max-degree", "12"]);
        assert_eq!(code, 0);
        assert!(report.consistent, "j={j}");
        let m = top_tilt_free_index(4, 3, j);
        let j2 = if j + 1 < 3 { 0 } else { tilting_normal_form(j, 3).1 };
        let confirmed: BTreeSet<u64> = report
            .entries
            .iter()
            .filter(|e| e.kind == "TiltFree" && e.flag == "confirmed")
            .map(|e| e.indices[0])
            .collect();
        assert!((j2..=m).all(|l| confirmed.contains(&l)), "j={j}: {confirmed:?} misses [{j2}, {m}]");
        assert_eq!(confirmed.iter().max(), Some(&m), "j={j}");
        assert!(report.entries.iter().filter(|e| e.kind == "TiltFree").all(|e| e.indices[0] <= m));
        parts.push(format!("j={j}: m={m}, [{j2},{m}] confirmed"));
    }
    Verdict::pass(parts.join("; "))
}

fn pieri() -> Verdict {
    let start = Instant::now();
    let mut count = 0;
    for p in [3u64, 5, 7] {
        for a in p - 1..=3 * p - 3 {
            let peeled = decompose_into_tiltings(&char_tilting(1, p).unwrap().tensor(&char_tilting(a, p).unwrap()), p).unwrap();
            assert_eq!(tilting_pieri(a, p).unwrap(), peeled, "p={p} a={a}");
            count += 1;
        }
    }
    let took = within(start, Duration::from_secs(1), "criterion 4");
    Verdict::pass(format!("{count} cases agree; {took:.1?}"))
}

fn noninterval() -> Verdict {
    let support = tilt_summand_scan(4, 5, 69).unwrap();
    let expected: BTreeSet<u64> = (4..=5).chain(11..=15).collect();
    assert_eq!(support, expected);
    assert!((6..=10).all(|l| !support.contains(&l)));
    Verdict::pass(format!("support {support:?}, gap 6..=10"))
}

fn structural() -> Verdict {
    let start = Instant::now();
    let mut count = 0;
    for n in 4..=8u64 {
        let d = n + 6;
        let table = KCharacters::new(n, d as usize);
        for j in 1..=n - 3 {
            for k in 1..=n - 3 {
                let checks = check_kjk(&table, j, k, d as i64).unwrap();
                assert!(
                    checks.projective_dimension && checks.duality && checks.bottom_degree && checks.bottom_character,
                    "n={n} j={j} k={k}: {checks:?}"
                );
                count += 1;
            }
        }
    }
    let took = within(start, Duration::from_secs(10), "criterion 6");
    Verdict::pass(format!("{count} (n,j,k) triples; {took:.1?}"))
}

fn predictor() -> Verdict {
    let start = Instant::now();
    let mut parts = Vec::new();
    for l in 1..=3 {
        let check = check_b1_predictor(4, 3, 1, 1, l).unwrap();
        assert!(check.mismatches.is_empty(), "l={l}: {:?}", check.mismatches);
        assert!(check.union_matches_interval(), "l={l}");
        parts.push(format!("l={l}: {:?}", check.interval.unwrap()));
    }
    let took = within(start, Duration::from_secs(60), "criterion 7");
    Verdict::pass(format!("81 tuples each, intervals {}; {took:.1?}", parts.join(", ")))
}

fn limits() -> Verdict {
    let start = Instant::now();
    let mut count = 0;
    for n in 4..=8u64 {
        for p in [3u64, 5, 7].into_iter().filter(|&p| p >= (n - 2).max(3)) {
            for j in 0..=3 * p * p {
                let lim = iterate_limit(n, p, j);
                let expected = if j <= n - 3 { (0, n - 3) } else { (0, n - 2) };
                assert_eq!(lim.limit, expected, "n={n} p={p} j={j}");
                let mut log = 0;
                while p.pow(log) < j {
                    log += 1;
                }
                assert!(lim.iterations <= log as usize + 2, "n={n} p={p} j={j}: {} iterations", lim.iterations);
                count += 1;
            }
        }
    }
    let took = within(start, Duration::from_secs(1), "criterion 8");
    Verdict::pass(format!("{count} cases; {took:.1?}"))
}

fn fusion() -> Verdict {
    let start = Instant::now();
    for p in [3u64, 5, 7] {
        for j in 0..=p - 2 {
            assert!(fusion_product(&[j, j], p).unwrap().contains_key(&0), "p={p} j={j}");
            assert!(fusion_product(&[j, p - 2 - j], p).unwrap().contains_key(&(p - 2)), "p={p} j={j}");
        }
    }
    let took = within(start, Duration::from_secs(1), "criterion 9");
    Verdict::pass(format!("p in {{3,5,7}}, all j; {took:.1?}"))
}

fn oracle_resolution() -> Verdict {
    for (n, j, k) in [(4u64, 1u64, 1usize), (5, 1, 1), (5, 2, 1)] {
        let res = build_equivariant_resolution(n as usize, j, 3, 10).unwrap();
        let table = KCharacters::new(n, 10);
        for d in 0..=10 {
            assert_eq!(res.kernels[k - 1][d], table.char_kjk(j, k as u64, d as i64).unwrap(), "n={n} j={j} k={k} d={d}");
        }
    }
    let res = build_equivariant_resolution(4, 1, 3, 4).unwrap();
    let dims = (res.kernels[0][3].dim(), res.kernels[0][4].dim());
    assert_eq!(dims, (4, 30));
    Verdict::pass("kernels match to D=10; dim K_11 in degrees 3, 4 = 4, 30")
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("S-level invariants, r = 1", s_invariants_r1),
        ("S-level invariants, r = 2", s_invariants_r2),
        ("(T(j) (x) S)^G1 catalog", tilting_tensor),
        ("tilting Pieri rule", pieri),
        ("non-interval tilt-free support", noninterval),
        ("K_jk structural suite", structural),
        ("B1 predictor vs oracle", predictor),
        ("interval limits", limits),
        ("fusion rules", fusion),
        ("oracle resolution self-consistency", oracle_resolution),
    ];
    let mut regressions = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status}: {name}: {}", i + 1, v.detail);
        if !v.pass && !v.known_gap {
            regressions += 1;
        }
    }
    assert_eq!(regressions, 0);
}
