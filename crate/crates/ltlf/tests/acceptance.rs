//! Acceptance run: one PASS/FAIL line per criterion item. Every value is
//! compared by exact rational equality. Exits non-zero if any item fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ltlf::analysis::family::{random_family, random_formula, FamilyBounds};
use ltlf::analysis::laws::{check_family, check_law, laws, Expectation, LawOptions};
use ltlf::analysis::{
    check_compatibility, completion_by_enumeration, completion_probability, completion_probability_weighted,
    next_outcome_distribution, peak_points, realization_points, step_probability_update,
};
use ltlf::monitor::MonitorState;
use ltlf::semantics::{next_value_atomic, Engine, Evaluator, Selector};
use ltlf::{parse, Comparator, Formula, Model, Op, OutcomeDistribution, Probability, ValidatedSpec};

struct Run {
    failed: Vec<String>,
    total: usize,
}

impl Run {
    fn item(&mut self, id: &str, ok: bool, detail: impl AsRef<str>) {
        self.total += 1;
        println!("{}  {id}: {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
        if !ok {
            self.failed.push(id.to_string());
        }
    }
}

fn q(s: &str) -> Probability {
    s.parse().unwrap()
}

fn fair(n: usize) -> ValidatedSpec {
    ValidatedSpec::from_counts(&[("Head", n / 2), ("Tail", n / 2)]).unwrap()
}

fn biased3() -> ValidatedSpec {
    ValidatedSpec::from_counts(&[("Head", 2), ("Tail", 1)]).unwrap()
}

fn observed(spec: ValidatedSpec, word: &str) -> Model {
    Model::observe(spec, word).unwrap()
}

fn weighted(spec: ValidatedSpec, word: &str) -> Model {
    let w = OutcomeDistribution::new(&spec, [("Head", q("2/3")), ("Tail", q("1/3"))]).unwrap();
    observed(spec, word).with_weights(w).unwrap()
}

fn holds(model: &Model, world: usize, text: &str) -> bool {
    let f = parse(text).unwrap();
    let r = Evaluator::new(model, Engine::Reference).eval(world, &Selector::Observed, &f);
    let a = Evaluator::new(model, Engine::Accelerated).eval(world, &Selector::Observed, &f);
    assert_eq!(r, a, "engines disagree on {text}");
    r.unwrap()
}

fn fixtures(run: &mut Run) {
    let hhth = observed(fair(4), "Head,Head,Tail,Head");
    let hhhttt = observed(fair(6), "Head,Head,Head,Tail,Tail,Tail");
    let tthh = observed(fair(4), "Tail,Tail,Head,Head");
    run.item("1.box-2/3-at-t3", holds(&hhth, 3, "box[>=2/3] Head"), "HHTH, box[>=2/3] Head at w3 is true");
    run.item("1.box-3/4-at-t4", holds(&hhth, 4, "box[>=3/4] Head"), "HHTH, box[>=3/4] Head at w4 is true");
    run.item(
        "1.circ-1/2",
        holds(&hhth, 2, "circ[>=1/2] Head") && !holds(&hhth, 1, "circ[>=1/2] Head"),
        "HHTH, circ[>=1/2] Head first holds at w2",
    );
    run.item(
        "1.star-1/2",
        (1..=4).all(|w| holds(&hhth, w, "star[>=1/2] Head")),
        "HHTH, star[>=1/2] Head at every world",
    );
    let through3 = (1..=3).all(|w| holds(&hhhttt, w, "bbox[>=1] Head"));
    run.item(
        "1.bbox-fig2",
        through3 && !holds(&hhhttt, 6, "bbox[>=1] Head") && holds(&hhhttt, 6, "bbox[>=1/2] Head"),
        "HHHTTT, bbox[>=1] Head through w3, false at w6, bbox[>=1/2] Head true at w6",
    );
    run.item("1.next-tthh", holds(&tthh, 2, "next[>=1] Head"), "TTHH, next[>=1] Head at w2 is true");
    run.item("1.next2-tthh", holds(&tthh, 2, "next^2[>=1] Head"), "TTHH, next^2[>=1] Head at w2 is true");

    let cases: [(&str, Model, usize, &str, bool); 8] = [
        ("1.P-fair4-m0", observed(fair(4), ""), 0, "3/8", false),
        ("1.P-fair4-TT", observed(fair(4), "Tail,Tail"), 2, "1/4", false),
        ("1.P-fair6-HTT", observed(fair(6), "Head,Tail,Tail"), 3, "3/8", false),
        ("1.P-fair2-H", observed(fair(2), "Head"), 1, "1/2", false),
        ("1.P-fair2-T", observed(fair(2), "Tail"), 1, "1/2", false),
        ("1.Pw-fair2-H", weighted(fair(2), "Head"), 1, "1/3", true),
        ("1.Pw-fair6-HTT", weighted(fair(6), "Head,Tail,Tail"), 3, "4/9", true),
        ("1.Pw-fair4-H", weighted(fair(4), "Head"), 1, "2/9", true),
    ];
    for (id, model, m, want, w) in cases {
        let got = if w { completion_probability_weighted(&model, m) } else { completion_probability(&model, m) }.unwrap();
        run.item(id, got == q(want), format!("{model} m={m}: {got} (expected {want})"));
    }

    let t = observed(fair(4), "Tail");
    let v = next_value_atomic(&t, 1, "Head").unwrap();
    run.item("1.next-value-T", v == q("2/3"), format!("n=4 fair, prefix T: next value of Head {v}"));
    let d = next_outcome_distribution(&observed(fair(4), "Tail,Tail"), 2).unwrap();
    let ok = d.get("Head") == Some(&q("1")) && d.get("Tail") == Some(&q("0"));
    run.item("1.next-dist-TT", ok, format!("n=4 fair, prefix TT: {d}"));
    let htht = observed(fair(4), "Head,Tail,Head,Tail");
    let p2 = step_probability_update(&q("3/8"), &q("2/3"), &htht, "Tail").unwrap();
    run.item("1.recurrence-uniform", p2 == q("1/2"), format!("3/8 · 2/3 · 2 = {p2}"));
    let w = weighted(fair(4), "Head,Tail,Head,Tail");
    let p2w = step_probability_update(&q("2/9"), &q("2/3"), &w, "Tail").unwrap();
    run.item("1.recurrence-weighted", p2w == q("4/9"), format!("(2/9 · 2/3) / (1/3) = {p2w}"));

    let ttt = observed(fair(4), "Tail,Tail,Tail");
    let verdicts: Vec<bool> = (0..=3).map(|m| check_compatibility(&ttt, m).unwrap().is_compatible()).collect();
    let v3 = check_compatibility(&ttt, 3).unwrap();
    let witness = v3.violation.as_ref().map(|v| v.formula.clone()).unwrap_or_default();
    let wf = parse(&witness).ok();
    let witness_true = wf.map(|f| Evaluator::new(&ttt, Engine::Reference).eval(3, &Selector::Observed, &f) == Ok(true));
    let mut mon = MonitorState::new(fair(4), None);
    let first = ["Tail", "Tail", "Tail"].iter().map(|o| mon.ingest(o).unwrap()).last().unwrap().first_violation;
    run.item(
        "1.incompatible-TTT",
        verdicts == [true, true, true, false]
            && witness == "circ[>=3/4] Tail & !star[>=3/4] Tail"
            && witness_true == Some(true)
            && first == Some(3),
        format!("prefix TTT first incompatible at step {first:?}, witness `{witness}`"),
    );
}

fn oracles(run: &mut Run) {
    let bounds = FamilyBounds { max_n: 8, max_atoms: 3, weighted: 0.5 };
    let family = random_family(0x5eed, 60, bounds);
    let mut rng = ChaCha8Rng::seed_from_u64(0xf0);

    let mut seen_ops = BTreeSet::new();
    let mut compared = 0usize;
    let mut mismatch = None;
    for model in &family {
        let reference = Evaluator::new(model, Engine::Reference);
        let accelerated = Evaluator::new(model, Engine::Accelerated);
        for _ in 0..25 {
            let f = random_formula(&mut rng, model.spec(), 3);
            collect_ops(&f, &mut seen_ops);
            if reference.table(&f).unwrap() != accelerated.table(&f).unwrap() {
                mismatch.get_or_insert(format!("{model}: {f}"));
            }
            compared += 1;
        }
    }
    let all_ops = seen_ops.len() == 5 * Comparator::ALL.len() + 1;
    run.item(
        "2.engines-agree",
        mismatch.is_none() && all_ops,
        match &mismatch {
            None => format!("{compared} formulas on {} models, {} operator/comparator pairs", family.len(), seen_ops.len()),
            Some(m) => format!("tables differ on {m}"),
        },
    );

    let mut checked = 0;
    let mut bad = None;
    for model in &family {
        for m in 0..=model.observed().len() {
            let u = completion_probability(model, m).unwrap();
            if u != completion_by_enumeration(model, m, false).unwrap() {
                bad.get_or_insert(format!("{model} m={m} uniform"));
            }
            if model.weights().is_some() {
                let w = completion_probability_weighted(model, m).unwrap();
                if w != completion_by_enumeration(model, m, true).unwrap() {
                    bad.get_or_insert(format!("{model} m={m} weighted"));
                }
            }
            checked += 1;
        }
    }
    run.item(
        "2.completion-vs-enumeration",
        bad.is_none(),
        bad.unwrap_or_else(|| format!("{checked} prefixes summed over every continuation")),
    );

    let mut checked = 0;
    let mut bad = None;
    for model in &family {
        let ev = Evaluator::new(model, Engine::Reference);
        let n = model.n();
        for m in 1..=model.observed().len().min(n.saturating_sub(1)) {
            if !check_compatibility(model, m).unwrap().is_compatible() {
                continue;
            }
            let d = next_outcome_distribution(model, m).unwrap();
            if !num_traits::One::is_one(&d.total()) {
                bad.get_or_insert(format!("{model} m={m}: {d} does not sum to 1"));
            }
            for atom in model.spec().atoms() {
                let direct = next_value_atomic(model, m, atom.as_str()).unwrap();
                let enumerated =
                    ev.value_row(ev.observed_row(), m, Op::NEXT, &Formula::atom(atom.as_str())).unwrap();
                if direct != enumerated || d.get(atom.as_str()) != Some(&direct) {
                    bad.get_or_insert(format!("{model} m={m} {atom}: {direct} vs {enumerated}"));
                }
                checked += 1;
            }
        }
    }
    run.item(
        "2.next-vs-enumeration",
        bad.is_none(),
        bad.unwrap_or_else(|| format!("{checked} next values, every distribution sums to 1")),
    );

    let mut diverging = Vec::new();
    for model in &family {
        if peak_points(model).unwrap() != realization_points(model) {
            diverging.push(model);
        }
    }
    let degenerate = diverging.iter().filter(|m| m.spec().lcd() == 1).count();
    run.item(
        "2.realization-vs-peaks",
        diverging.is_empty(),
        if diverging.is_empty() {
            format!("{} models", family.len())
        } else {
            format!(
                "{} of {} models differ ({degenerate} with LCD 1, where every world realizes the target and none peaks), e.g. {}",
                diverging.len(),
                family.len(),
                diverging[0]
            )
        },
    );
}

fn collect_ops(f: &Formula, out: &mut BTreeSet<(String, &'static str)>) {
    match f {
        Formula::Atom(_) => {}
        Formula::Not(g) => collect_ops(g, out),
        Formula::And(g, h) | Formula::Or(g, h) => {
            collect_ops(g, out);
            collect_ops(h, out);
        }
        Formula::Modal { op, cmp, arg, .. } => {
            let key = match op {
                Op::Next(s) if s.get() > 1 => "next^i".to_string(),
                _ => op.keyword(),
            };
            if key == "next^i" {
                out.insert((key, "any"));
            } else {
                out.insert((key, cmp.symbol()));
            }
            collect_ops(arg, out);
        }
    }
}

fn law_suite(run: &mut Run) {
    let family = random_family(2024, 50, FamilyBounds::default());
    let selected: Vec<_> = laws().iter().collect();
    let started = Instant::now();
    let reports = check_family(&selected, &family, LawOptions::default());
    for r in &reports {
        let id = format!("3.{}", r.law);
        let detail = match (&r.first_failure, r.expectation) {
            (None, _) => format!("holds on {} models, {} instances, {} skipped", r.models, r.instances, r.skipped),
            (Some((model, c)), Expectation::Holds) => format!(
                "fails on {}/{} models; first: {model} w{} {}: {}",
                r.failing_models, r.models, c.world, c.assignment, c.detail
            ),
            (Some((model, c)), Expectation::Fails) => format!(
                "documented non-law, fails on {}/{} models; first: {model} w{} {}",
                r.failing_models, r.models, c.world, c.assignment
            ),
        };
        run.item(&id, r.as_expected(), detail);
    }
    println!("      law suite over {} models took {:.1}s", family.len(), started.elapsed().as_secs_f64());

    // The two counterexamples worked out by hand.
    let m = observed(fair(4), "Head,Tail,Head,Tail");
    let ev = Evaluator::new(&m, Engine::Reference);
    let sel = Selector::Observed;
    let eval = |text: &str| ev.eval(2, &sel, &parse(text).unwrap()).unwrap();
    let lhs = eval("bbox[=1/2] box[>=1/2] box[>=1] Tail");
    let rhs = eval("bbox[>=1/2] box[>=1/2] box[>=1] Tail & bbox[>=1/2] !box[>=1/2] box[>=1] Tail");
    let report = check_law("NonLaw-BlackBoxEq", &m).unwrap();
    run.item(
        "3.counterexample-bbox-eq",
        !lhs && rhs && !report.holds(),
        format!("n=4 fair at w2: bbox[=1/2] (box[>=1/2] box[>=1] Tail) is {lhs}, the conjunction is {rhs}"),
    );

    let m = observed(biased3(), "Head,Head,Tail");
    let ev = Evaluator::new(&m, Engine::Reference);
    let star = parse("star[>=1] bbox[=1/3] Tail").unwrap();
    let black = parse("bbox[>=1] bbox[=1/3] Tail").unwrap();
    let valid = (0..ev.rows()).all(|r| (1..=3).all(|w| ev.eval_row(r, w, &star) == Ok(true)));
    let at3 = ev.eval(3, &Selector::Observed, &black).unwrap();
    let top = ev.max_index(3, &Selector::Observed, Op::BlackBox, &parse("bbox[=1/3] Tail").unwrap()).unwrap();
    let report = check_law("NonLaw-StarBBoxNonAtomic", &m).unwrap();
    run.item(
        "3.counterexample-star-bbox",
        valid && !at3 && top == q("1/3") && !report.holds(),
        format!("n=3 μ(Head)=2/3: star[>=1] bbox[=1/3] Tail valid {valid}, bbox[>=1] of it at w3 {at3}, max index {top}"),
    );
}

fn monitor_coherence(run: &mut Run) {
    let family = random_family(77, 80, FamilyBounds { max_n: 8, max_atoms: 3, weighted: 0.5 });
    let mut steps = 0;
    let mut bad = None;
    let mut latched_runs = 0;
    for model in &family {
        let spec = model.spec();
        let mut mon = MonitorState::new(spec.clone(), model.weights().cloned());
        if mon.snapshot() != mon.from_scratch() {
            bad.get_or_insert(format!("{model} at step 0"));
        }
        let mut violated = false;
        for &a in model.observed().prefix(model.observed().len()) {
            let rep = mon.ingest(spec.atom(a).as_str()).unwrap();
            steps += 1;
            if mon.snapshot() != mon.from_scratch() {
                bad.get_or_insert(format!("{model} at step {}", rep.step));
            }
            if violated && (rep.first_violation.is_none() || !rep.completion_prob.is_zero()) {
                bad.get_or_insert(format!("{model}: violation unlatched at step {}", rep.step));
            }
            violated |= rep.first_violation.is_some();
        }
        latched_runs += violated as usize;
    }
    run.item(
        "4.monitor-coherence",
        bad.is_none(),
        bad.unwrap_or_else(|| {
            format!("{} traces, {steps} steps, {latched_runs} traces with a latched violation", family.len())
        }),
    );
}

fn main() -> ExitCode {
    let mut run = Run { failed: Vec::new(), total: 0 };
    fixtures(&mut run);
    oracles(&mut run);
    law_suite(&mut run);
    monitor_coherence(&mut run);
    println!("{} of {} items pass", run.total - run.failed.len(), run.total);
    if run.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {}", run.failed.join(", "));
        ExitCode::FAILURE
    }
}
