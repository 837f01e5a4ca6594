//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use harmonia::engine::Engine;
use harmonia::trace::{parse_line, Event, JsonlWriter};
use harmonia::{load, run, Loaded, Overrides};
use harmonia_core::calculus::{harmonic_significance, harmonic_state, harmonic_value, pair_contributions};
use harmonia_core::exchange::{
    detect_cycles, direct_exchange, find_chain, find_chain_with, pareto_acceptable, trade_graph, Party, SearchConfig,
};
use harmonia_core::helix::{decode, encode, eval_and, eval_or, helix_add, helix_mul, helix_sub, HelixPoint, PredicateScore};
use harmonia_core::model::{Characteristic, CharacteristicModel, Composition, Context, Expression};
use harmonia_core::sensory::{optimum_frequency, CycleConfig};
use harmonia_core::transform::{
    enrich, enrich_expression, simplify_expression, ApplicationEvent, Enrichment, PatternMemory, Simplification,
    TransformSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.toml"))
}

fn loaded(name: &str) -> Result<Loaded, String> {
    load(&fixture(name)).map_err(|e| format!("{name}: {e}"))
}

fn parties(l: &Loaded) -> Vec<Party> {
    Engine::new(l, Overrides::default(), Vec::new()).systems().iter().map(|s| s.party()).collect()
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    check(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn random_model(rng: &mut ChaCha8Rng, roles: bool) -> CharacteristicModel {
    let n = rng.random_range(1..=6);
    let keys: Vec<usize> = (0..n).map(|i| i * 2 + rng.random_range(0..2)).collect();
    let mut chars: Vec<Characteristic> = keys
        .iter()
        .map(|k| Characteristic::new(format!("k{k}"), rng.random_range(-100.0..100.0)))
        .collect();
    if roles && n > 1 {
        for i in 0..n {
            let target = chars[(i + rng.random_range(1..n)) % n].key.clone();
            let s = rng.random_range(0.0..3.0);
            chars[i] = match rng.random_range(0..3) {
                0 => chars[i].clone().inhibiting(target, s),
                1 => chars[i].clone().facilitating(target, s),
                _ => chars[i].clone(),
            };
        }
    }
    chars.into_iter().collect()
}

fn hv_boundaries() -> Outcome {
    let start = Instant::now();
    let ctx = Context::new("ctx", 10.0);
    let m = CharacteristicModel::from_values(&[3.0, -7.5, 12.0, 0.0]);
    let (c, e) = (Composition::new("c", m.clone()), Expression::new("e", m));
    for p in pair_contributions(&c, &e, &ctx) {
        check(p.theta == 0.0 && p.adjusted == 1.0, || format!("pair {} gave {}", p.key, p.adjusted))?;
    }
    let hv = harmonic_value(&c, &e, &ctx).value;
    check(hv == 1.0, || format!("all-conforming HV {hv}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..10_000 {
        let ctx = Context::new("ctx", rng.random_range(0.5..200.0));
        let c = Composition::new("c", random_model(&mut rng, true));
        let e = Expression::new("e", random_model(&mut rng, false));
        let hv = harmonic_value(&c, &e, &ctx).value;
        check((-1.0..=1.0).contains(&hv), || format!("fixture {i}: HV {hv}"))?;
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!("10000 randomized fixtures in [-1, 1], {:?}", start.elapsed()))
}

fn rms_oracle() -> Outcome {
    let worked = harmonic_state(&[0.6, 0.8]).map_err(|e| e.to_string())?;
    check((worked - 0.5f64.sqrt()).abs() <= 1e-12, || format!("RMS(0.6, 0.8) = {worked}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..10_000 {
        let n = rng.random_range(1..=32);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let oracle = (xs.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
        let got = harmonic_state(&xs).map_err(|e| e.to_string())?;
        check((got - oracle).abs() <= 1e-12, || format!("vector {i}: {got} vs {oracle}"))?;
    }
    Ok("10000 vectors within 1e-12".into())
}

fn helix_exhaustive() -> Outcome {
    let mut cases = 0;
    for x in -50i64..=50 {
        for y in -50i64..=50 {
            let got = [
                helix_add(encode(x), y).and_then(decode),
                helix_sub(encode(x), y).and_then(decode),
                helix_mul(x, y).and_then(decode),
            ];
            for (got, want) in got.into_iter().zip([x + y, x - y, x * y]) {
                check(got.as_ref().ok() == Some(&want), || format!("{x},{y}: {got:?} vs {want}"))?;
                cases += 1;
            }
        }
    }
    check(cases == 30_603, || format!("{cases} cases"))?;
    for z in [HelixPoint::POSITIVE_ZERO, HelixPoint::NEGATIVE_ZERO] {
        check(decode(z) == Ok(0), || format!("{z:?} did not decode to 0"))?;
        check(decode(helix_add(z, 0).map_err(|e| e.to_string())?) == Ok(0), || "zero step moved".into())?;
    }
    check(encode(0) == HelixPoint::POSITIVE_ZERO, || "encode(0) is not +0".into())?;
    Ok(format!("{cases} cases, signed zeros round-trip"))
}

fn boolean_expansion() -> Outcome {
    let bit = |b: bool| PredicateScore::from_harmonic_value(if b { 1.0 } else { -1.0 });
    let mut cases = 0;
    for a in [false, true] {
        for b in [false, true] {
            let and = eval_and(&[bit(a), bit(b)], 0.0).map_err(|e| e.to_string())?.expanded;
            let or = eval_or(&[bit(a), bit(b)]).map_err(|e| e.to_string())?.expanded;
            check(and == (a && b) && or == (a || b), || format!("{a},{b}: and {and} or {or}"))?;
            cases += 2;
        }
    }
    let mixed = [bit(true), bit(false)];
    for inject in [0.0, 0.5, 0.999, 1.0] {
        let e = eval_and(&mixed, inject).map_err(|e| e.to_string())?;
        check(!e.expanded, || format!("expanded at injection {inject}"))?;
    }
    for inject in [1.0 + 1e-9, 1.001, 1.5, 3.0] {
        let e = eval_and(&mixed, inject).map_err(|e| e.to_string())?;
        check(e.expanded, || format!("not expanded at injection {inject}"))?;
    }
    Ok(format!("{cases} truth-table cases, forced expansion only above 1"))
}

fn subsets(p: &Party) -> Vec<Vec<&str>> {
    let n = p.holdings.len();
    (0..1u32 << n)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| p.holdings[i].id.as_str()).collect())
        .collect()
}

fn figure3_chain() -> Outcome {
    let start = Instant::now();
    let l = loaded("figure3_trade")?;
    let ps = parties(&l);

    // no pair can agree on any direct swap of holdings
    let mut swaps = 0;
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            for give in subsets(&ps[i]) {
                for receive in subsets(&ps[j]) {
                    if give.is_empty() && receive.is_empty() {
                        continue;
                    }
                    let (out, _, _) = direct_exchange(&ps[i], &ps[j], &give, &receive).map_err(|e| e.to_string())?;
                    let returns: Vec<f64> = out.motivation.values().copied().collect();
                    check(!pareto_acceptable(&returns), || {
                        format!("{} gives {give:?} to {} for {receive:?}: {returns:?}", ps[i].id, ps[j].id)
                    })?;
                    swaps += 1;
                }
            }
            // nor any longer exchange between the two alone
            let pair = [ps[i].clone(), ps[j].clone()];
            check(find_chain_with(&pair, &SearchConfig::new(6)).is_none(), || {
                format!("{} and {} can exchange alone", ps[i].id, ps[j].id)
            })?;
        }
    }

    let chain = find_chain(&ps, l.scenario.exchange.max_depth).ok_or("no chain found")?;
    check(chain.parties.len() == 3, || format!("parties {:?}", chain.parties))?;
    check(chain.transforms() >= 1, || "no transform".into())?;
    check(chain.settled_obligations() >= 1, || "no settled obligation".into())?;
    check(chain.returns.values().all(|r| *r >= 0.0), || format!("returns {:?}", chain.returns))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "{swaps} direct swaps and 3 pairwise depth-6 searches rejected; {}-step chain over A, B, C, {:?}",
        chain.len(),
        start.elapsed()
    ))
}

fn cycle_detection() -> Outcome {
    let l = loaded("self_sustaining_cycle")?;
    let ps = parties(&l);
    let cycles = detect_cycles(&trade_graph(&ps), 3);
    check(cycles.len() == 1 && cycles[0].self_sustaining, || format!("cycles {cycles:?}"))?;

    // the stable now also wants to keep its manure: same loop, one loser
    let mut variant = ps.clone();
    let stable = variant.iter_mut().find(|p| p.id == "stable").ok_or("no stable")?;
    stable.expression = Expression::new(
        "bedding_and_manure",
        stable
            .expression
            .model
            .iter()
            .cloned()
            .chain([Characteristic::new("moisture", 70.0), Characteristic::new("ammonia", 4.0)])
            .collect(),
    );
    let cycles = detect_cycles(&trade_graph(&variant), 3);
    let looped: Vec<_> = cycles.iter().filter(|c| c.members.len() == 3).collect();
    check(!looped.is_empty(), || format!("variant lost its loop: {cycles:?}"))?;
    check(looped.iter().all(|c| !c.self_sustaining && c.returns.values().any(|r| *r < 0.0)), || {
        format!("variant accepted: {looped:?}")
    })?;
    Ok(format!("loop returns {:?}; variant rejected", cycles_returns(&ps)))
}

fn cycles_returns(ps: &[Party]) -> Vec<String> {
    detect_cycles(&trade_graph(ps), 3)[0].returns.iter().map(|(k, v)| format!("{k} {v:.3}")).collect()
}

fn frequency_oracle() -> Outcome {
    let f = |c_sbj, c_s, c_c| optimum_frequency(&CycleConfig { c_sbj, c_s, c_c }).map_err(|e| e.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..10_000 {
        let (c_sbj, c_s, c_c): (u32, f64, f64) = (rng.random_range(1..5_000), rng.random_range(0.01..300.0), rng.random_range(0.01..300.0));
        let oracle = ((c_sbj as f64 / ((c_s * c_s + c_c * c_c) / 2.0).sqrt()).ceil() as u64).max(1);
        let got = f(c_sbj, c_s, c_c)?;
        check(got == oracle, || format!("triple {i} ({c_sbj}, {c_s}, {c_c}): {got} vs {oracle}"))?;
    }
    check(f(4, 6.0, 6.0)? == 1, || "ample capacity did not converge to 1".into())?;
    let mut prev = f(1, 2.0, 2.0)?;
    for c_sbj in 2..400 {
        let now = f(c_sbj, 2.0, 2.0)?;
        check(now >= prev, || format!("f fell as c_sbj rose to {c_sbj}"))?;
        prev = now;
    }
    let mut prev = f(300, 0.5, 0.5)?;
    for step in 1..400 {
        let cap = 0.5 + step as f64 * 0.25;
        let (a, b) = (f(300, cap, 0.5)?, f(300, 0.5, cap)?);
        check(a <= prev && b <= prev, || format!("f rose as capacity reached {cap}"))?;
        prev = a.min(b);
    }
    Ok("10000 triples exact; convergence and monotone sweeps hold".into())
}

fn significance_table() -> Outcome {
    let ctx = Context::new("ctx", 10.0);
    let others = [Composition::new("o", CharacteristicModel::from_entries(vec![Characteristic::new("z", 1.0)]))];
    let sig = |c: &Composition, e: &Expression| -> Result<f64, String> {
        let mut all = vec![c.clone()];
        all.extend_from_slice(&others);
        Ok(harmonic_significance(c, e, &ctx, &all).map_err(|e| e.to_string())?.value)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sequences = 0;
    while sequences < 200 {
        let mut comp = Composition::new("c", random_model(&mut rng, false));
        let mut expr = Expression::new("e", random_model(&mut rng, false));
        if harmonic_value(&comp, &expr, &ctx).value <= 0.0 {
            continue;
        }
        sequences += 1;

        // increase both: conforming characteristics added to e and c
        let mut last = sig(&comp, &expr)?;
        for step in 0..4 {
            let add = vec![Characteristic::new(format!("extra{step}"), rng.random_range(-50.0..50.0))];
            expr = enrich_expression(&expr, &Enrichment { add: add.clone(), ..Default::default() }).map_err(|e| e.to_string())?;
            let spec = Enrichment { merge_ids: vec!["c".into()], add, result_id: Some("c".into()), ..Default::default() };
            comp = enrich(&[comp], &spec).map_err(|e| e.to_string())?;
            let now = sig(&comp, &expr)?;
            check(now > last, || format!("enrichment lowered significance {last} -> {now}"))?;
            last = now;
        }

        // decrease the expression: drop keys that had conforming matches
        loop {
            let conforming: Vec<String> = pair_contributions(&comp, &expr, &ctx)
                .into_iter()
                .filter(|p| p.adjusted > 0.0)
                .map(|p| p.key)
                .collect();
            if conforming.len() < 2 || expr.model.len() < 2 {
                break;
            }
            let spec = Simplification { source: "e".into(), drop_keys: vec![conforming[0].clone()], groups: vec![] };
            expr = simplify_expression(&expr, &spec).map_err(|e| e.to_string())?;
            let now = sig(&comp, &expr)?;
            check(now < last, || format!("simplification raised significance {last} -> {now}"))?;
            last = now;
        }
    }
    Ok(format!("{sequences} enrichment/simplification sequences with HV > 0"))
}

fn trace(name: &str) -> Result<Vec<u8>, String> {
    let l = loaded(name)?;
    let (_, _, sink) = run(&l, Overrides::default(), JsonlWriter::new(Vec::new())).map_err(|e| e.to_string())?;
    Ok(sink.into_inner())
}

fn determinism() -> Outcome {
    for name in ["figure3_trade", "self_sustaining_cycle", "priming_loop"] {
        let (a, b) = (trace(name)?, trace(name)?);
        check(!a.is_empty() && a == b, || format!("{name}: traces differ"))?;
    }
    // replaying the priming loop's trace reproduces it bit for bit
    let bytes = trace("priming_loop")?;
    let text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
    for line in text.lines() {
        let rec = parse_line(line).map_err(|e| e.to_string())?;
        let again = serde_json::to_string(&rec).map_err(|e| e.to_string())?;
        check(again == line, || format!("replay differs:\n{line}\n{again}"))?;
    }
    Ok("3 fixtures byte-identical; priming loop replay bit-identical".into())
}

fn pattern_ledger() -> Outcome {
    let l = loaded("priming_loop")?;
    let (_, systems, recs) = run(&l, Overrides::default(), Vec::new()).map_err(|e| e.to_string())?;
    let events: Vec<ApplicationEvent> = recs
        .iter()
        .filter_map(|r| match &r.event {
            Event::Transform { application, .. } => Some(application.clone()),
            _ => None,
        })
        .collect();
    check(!events.is_empty(), || "fixture records no transformations".into())?;
    let listener = systems.iter().find(|s| s.id == "listener").ok_or("no listener")?;
    check(PatternMemory::replay(&events) == listener.memory, || "engine memory is not a fold of its events".into())?;

    let specs = [
        TransformSpec::Simplify(Simplification { source: "e".into(), drop_keys: vec!["a".into()], groups: vec![] }),
        TransformSpec::Enrich(Enrichment { merge_ids: vec!["x".into(), "y".into()], ..Default::default() }),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let stream: Vec<ApplicationEvent> = (0..10_000)
        .map(|_| {
            let before = rng.random_range(0.0..1.0);
            ApplicationEvent {
                context_id: format!("ctx{}", rng.random_range(0..3)),
                expression_id: "e".into(),
                spec: specs[rng.random_range(0..2)].clone(),
                hs_before: before,
                hs_after: before + rng.random_range(-0.05..0.2),
            }
        })
        .collect();
    let mut live = PatternMemory::new();
    let mut lost = std::collections::BTreeSet::new();
    for (i, ev) in stream.iter().enumerate() {
        live.record(ev);
        for p in live.patterns() {
            check(!(lost.contains(&p.id) && p.always_improved), || format!("pattern {} recovered at event {i}", p.id))?;
            if !p.always_improved {
                lost.insert(p.id);
            }
        }
    }
    check(PatternMemory::replay(&stream) == live, || "replay of 10000 events differs".into())?;
    Ok(format!("{} engine events and 10000 random events fold identically", events.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("hv boundary conditions", hv_boundaries),
        ("rms state oracle", rms_oracle),
        ("helix arithmetic", helix_exhaustive),
        ("boolean expansion", boolean_expansion),
        ("figure 3 chain", figure3_chain),
        ("self-sustaining cycle", cycle_detection),
        ("optimum frequency", frequency_oracle),
        ("significance table", significance_table),
        ("determinism", determinism),
        ("positive-pattern ledger", pattern_ledger),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
