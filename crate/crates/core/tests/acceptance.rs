//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach stdout.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use ixcomplex::bigi::{check_admissible, instantiate, normalize, simplify, sum_steps, NormalizedComplexity};
use ixcomplex::klm::{klm_parse, klm_speed, klm_time, KlmModel};
use ixcomplex::logs::{iqr_filter, load_log, task_table, GroupBy};
use ixcomplex::movie_booking as mb;
use ixcomplex::speed::aggregate_speed;
use ixcomplex::synth::{count_actions, generate_log, SynthConfig};
use ixcomplex::{
    fmt2, parse_concept, parse_expr, serialize_concept, ActionKind, Binding, InteractionConcept, UserStep,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e(s: &str) -> NormalizedComplexity {
    NormalizedComplexity::new(parse_expr(s).expect("formula parses"))
}

fn published_instantiation() -> Check {
    // best of five, so a busy machine does not decide the timing check
    let mut elapsed = Duration::MAX;
    let (mut v1, mut v2) = (0, 0);
    for _ in 0..5 {
        let start = Instant::now();
        v1 = instantiate(&e(mb::V1_PUBLISHED_IS), &mb::v1_complexity_binding()).map_err(|x| x.to_string())?;
        v2 = instantiate(&e(mb::V2_PUBLISHED_IS), &mb::v2_complexity_binding()).map_err(|x| x.to_string())?;
        elapsed = elapsed.min(start.elapsed());
    }
    ensure(v1 == 171, format!("V1 gave {v1}"))?;
    ensure(v2 == 46, format!("V2 gave {v2}"))?;
    ensure(elapsed < Duration::from_millis(1), format!("took {elapsed:?}"))?;
    Ok(format!("V1 {v1} IS, V2 {v2} IS in {elapsed:?}"))
}

fn published_classification() -> Check {
    let mut out = Vec::new();
    for (formula, (retained, label)) in
        [(mb::V1_PUBLISHED_IS, mb::V1_PUBLISHED_COMPLEXITY), (mb::V2_PUBLISHED_IS, mb::V2_PUBLISHED_COMPLEXITY)]
    {
        let s = simplify(&e(formula));
        let want = parse_expr(retained).unwrap();
        ensure(s.retained == want, format!("retained {} for {formula}", s.retained))?;
        ensure(s.class_label.to_string() == label, format!("class {} for {formula}", s.class_label))?;
        out.push(format!("I({}) {}", s.retained.factored(), s.class_label));
    }
    Ok(out.join(", "))
}

fn published_klm() -> Check {
    let model = KlmModel::default();
    let time = |f: &str, b: &Binding| -> Result<f64, String> {
        klm_time(&klm_parse(f).map_err(|x| x.to_string())?, &model, b).map_err(|x| x.to_string())
    };
    let t1 = time(mb::V1_PUBLISHED_KLM, &mb::v1_klm_binding())?;
    let t2 = time(mb::V2_PUBLISHED_KLM, &mb::v2_klm_binding())?;
    ensure((t1 - 126.52).abs() <= 0.005, format!("V1 {t1}"))?;
    ensure((t2 - 29.57).abs() <= 0.005, format!("V2 {t2}"))?;
    let s1 = fmt2(klm_speed(171, t1).unwrap());
    let s2 = fmt2(klm_speed(46, t2).unwrap());
    ensure(s1 == "1.35" && s2 == "1.56", format!("speeds {s1}, {s2}"))?;
    for (label, attempts, is, secs, speed) in mb::KLM_SPEEDS {
        if let Some(a) = attempts {
            let mut b = mb::v1_klm_binding();
            b.set("a", a).unwrap();
            let t = time(mb::V1_PUBLISHED_KLM, &b)?;
            ensure(fmt2(t) == fmt2(secs), format!("{label}: {t}"))?;
            ensure(fmt2(klm_speed(is, t).unwrap()) == fmt2(speed), format!("{label}: speed"))?;
        }
    }
    Ok(format!("V1 {} s / {s1} IS/s, V2 {} s / {s2} IS/s", fmt2(t1), fmt2(t2)))
}

fn speed_aggregation() -> Check {
    let rows: Vec<(u64, f64)> = mb::MEASURED_TASKS.iter().map(|r| (r.n as u64, r.mean_speed)).collect();
    let v1: Vec<(u64, f64)> =
        mb::MEASURED_TASKS.iter().filter(|r| r.version == 1).map(|r| (r.n as u64, r.mean_speed)).collect();
    let overall = aggregate_speed(&rows).map_err(|x| x.to_string())?;
    let v1 = aggregate_speed(&v1).map_err(|x| x.to_string())?;
    ensure((overall - mb::MEASURED_OVERALL_SPEED).abs() <= 0.005, format!("overall {overall}"))?;
    ensure((v1 - mb::MEASURED_V1_SPEED).abs() <= 0.005, format!("V1 {v1}"))?;
    for r in mb::MEASURED_TASKS {
        let got = fmt2(r.is_count as f64 / r.mean_s);
        ensure(got == fmt2(r.mean_speed), format!("{}: {got} vs {}", r.label, r.mean_speed))?;
    }
    Ok(format!("overall {overall:.4}, V1 {v1:.4}, {} row identities", mb::MEASURED_TASKS.len()))
}

const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// Non-negative for every binding with values ≥ 1: sums and products of
/// variables and constants up to 9, and `v - 1`.
fn arb_expr(vars: usize) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..=9).prop_map(|c| c.to_string()),
        (0..vars).prop_map(|i| NAMES[i].to_string()),
        (0..vars).prop_map(|i| format!("({} - 1)", NAMES[i])),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} + {y})")),
            (inner.clone(), inner).prop_map(|(x, y)| format!("{x} * {y}")),
        ]
    })
}

fn arb_concept() -> impl Strategy<Value = InteractionConcept> {
    (1usize..=6).prop_flat_map(|vars| {
        let step = (
            arb_expr(vars),
            proptest::collection::btree_map(proptest::sample::select(ActionKind::ALL.to_vec()), arb_expr(vars), 0..4),
            proptest::option::of("[a-z ]{0,12}"),
        );
        proptest::collection::vec(step, 0..=10).prop_map(move |steps| {
            let mut c = InteractionConcept::new("generated");
            c.variables = NAMES[..vars]
                .iter()
                .map(|n| ixcomplex::concept::Variable { name: n.to_string(), description: String::new() })
                .collect();
            for (i, (repeat, actions, note)) in steps.into_iter().enumerate() {
                let mut s = UserStep::new(format!("step {i}")).with_repeat(parse_expr(&repeat).unwrap());
                for (kind, count) in actions {
                    s = s.with_action(kind, parse_expr(&count).unwrap());
                }
                if let Some(n) = note.map(|n| n.trim().to_string()).filter(|n| !n.is_empty()) {
                    s = s.with_note(n);
                }
                c.steps.push(s);
            }
            c
        })
    })
}

fn arb_bindings() -> impl Strategy<Value = Vec<Binding>> {
    proptest::collection::vec(proptest::collection::vec(1u64..=6, 6), 5..=8)
        .prop_map(|rows| rows.into_iter().map(|v| Binding::from_pairs(NAMES.iter().copied().zip(v))).collect())
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut runner = TestRunner::new(Config { cases: 120, failure_persistence: None, ..Config::default() });
    let pairs = std::cell::Cell::new(0usize);
    runner
        .run(&(arb_concept(), arb_bindings()), |(c, bindings)| {
            let n = normalize(&sum_steps(&c).unwrap()).unwrap();
            for b in &bindings {
                for s in &c.steps {
                    prop_assert!(check_admissible(s, b).is_ok());
                }
                let oracle = count_actions(&c, b).unwrap().total;
                prop_assert_eq!(instantiate(&n, b).unwrap(), oracle, "binding {}", b);
                pairs.set(pairs.get() + 1);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("120 concepts, {} bindings agree in {elapsed:?}", pairs.get()))
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn discrepancy_ledger() -> Check {
    let v1 = count_actions(&mb::v1(), &mb::v1_complexity_binding()).map_err(|x| x.to_string())?.total;
    let v2 = count_actions(&mb::v2(), &mb::v2_complexity_binding()).map_err(|x| x.to_string())?.total;
    let d1 = ixcomplex::analyze(&mb::v1(), Some(&mb::v1_complexity_binding())).map_err(|x| x.to_string())?;
    let d2 = ixcomplex::analyze(&mb::v2(), Some(&mb::v2_complexity_binding())).map_err(|x| x.to_string())?;
    let (d1, d2) = (d1.instantiated.unwrap().is_count, d2.instantiated.unwrap().is_count);
    ensure(d1 == v1 && v1 == 174, format!("V1 as defined {d1}, oracle {v1}"))?;
    ensure(d2 == v2 && v2 == 45, format!("V2 as defined {d2}, oracle {v2}"))?;

    for (file, binding, published, defined, pub_is) in [
        ("v1.concept", mb::v1_complexity_binding(), mb::V1_PUBLISHED_IS, 174, 171),
        ("v2.concept", mb::v2_complexity_binding(), mb::V2_PUBLISHED_IS, 45, 46),
    ] {
        let mut args =
            vec!["ixcomplex".to_string(), "analyze".into(), data(file), "--formula".into(), published.into()];
        for (k, v) in binding.iter() {
            args.push("--set".into());
            args.push(format!("{k}={v}"));
        }
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = ixcomplex::cli::run(args, &mut out, &mut err, false);
        let out = String::from_utf8(out).unwrap();
        ensure(code == 0, format!("{file}: exit {code}: {}", String::from_utf8_lossy(&err)))?;
        let published_at = out.find("as-published:").ok_or("no as-published section")?;
        let defined_at = out.find("as-defined:").ok_or("no as-defined section")?;
        ensure(out[published_at..defined_at].contains(&format!("IS = {pub_is}")), format!("{file}: published IS"))?;
        ensure(out.trim_end().ends_with(&format!("IS = {defined}")), format!("{file}: defined IS"))?;
    }
    Ok(format!("V1 {v1} vs published 171, V2 {v2} vs published 46"))
}

fn synthetic_round_trip() -> Check {
    let start = Instant::now();
    let cfg = SynthConfig {
        concept: mb::v2(),
        binding: mb::v2_complexity_binding(),
        sessions: 100,
        speed_mean: 1.05,
        speed_sd: 0.2,
        seed: 7,
    };
    let a = generate_log(&cfg).map_err(|x| x.to_string())?.to_json();
    let b = generate_log(&cfg).map_err(|x| x.to_string())?.to_json();
    ensure(a == b, "logs differ for one seed")?;
    let log = load_log(a.as_bytes()).map_err(|x| x.to_string())?;
    let table = task_table(&log, GroupBy::Concept).map_err(|x| x.to_string())?;
    let row = table.rows.first().ok_or("no rows")?;
    let rel = (row.mean_is_per_s - 1.05).abs() / 1.05;
    let elapsed = start.elapsed();
    ensure(rel < 0.05, format!("mean speed {} is {:.1}% off", row.mean_is_per_s, rel * 100.0))?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("n={} mean {:.4} IS/s ({:.1}% off) in {elapsed:?}", row.n, row.mean_is_per_s, rel * 100.0))
}

fn iqr() -> Check {
    let (kept, b) = iqr_filter(&[1.0, 2.0, 3.0, 4.0, 100.0]).map_err(|x| x.to_string())?;
    ensure(kept == [1.0, 2.0, 3.0, 4.0], format!("kept {kept:?}"))?;
    ensure((b.lower, b.upper) == (-1.0, 7.0), format!("bounds [{}, {}]", b.lower, b.upper))?;
    for constant in [vec![5.0; 3], vec![0.25; 40], vec![7.0]] {
        let (kept, _) = iqr_filter(&constant).map_err(|x| x.to_string())?;
        ensure(kept == constant, format!("constant list {constant:?} trimmed"))?;
    }
    Ok("bounds [-1, 7], constant lists kept".to_string())
}

fn round_trips() -> Check {
    let mut runner = TestRunner::new(Config { cases: 200, failure_persistence: None, ..Config::default() });
    runner
        .run(&arb_concept(), |c| {
            let text = serialize_concept(&c);
            let back = parse_concept(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(serialize_concept(&back), text);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    for (concept, binding, seed) in
        [(mb::v1(), mb::v1_complexity_binding(), 1), (mb::v2(), mb::v2_complexity_binding(), 2)]
    {
        let cfg = SynthConfig { concept, binding, sessions: 100, speed_mean: 1.05, speed_sd: 0.2, seed };
        let log = generate_log(&cfg).map_err(|x| x.to_string())?;
        let json = log.to_json();
        let back = load_log(json.as_bytes()).map_err(|x| x.to_string())?;
        ensure(back == log, "loaded log differs")?;
        ensure(back.to_json() == json, "re-serialized log differs")?;
    }
    Ok("200 concepts through the DSL, 2 logs through load".to_string())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("published big-I instantiation", published_instantiation),
        ("published classification", published_classification),
        ("published KLM times and speeds", published_klm),
        ("speed aggregation", speed_aggregation),
        ("oracle equivalence", oracle_equivalence),
        ("as-defined vs published totals", discrepancy_ledger),
        ("synthetic round trip", synthetic_round_trip),
        ("IQR filter", iqr),
        ("round trips", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
