//! The ten acceptance criteria. Each prints one PASS or FAIL line; the test
//! fails if any criterion does.

mod common;

use balc::cli::run;
use balc::io::{parse_bn, parse_ontology, serialize_bn, serialize_ontology};
use balc::reasoner::{Mode, Reasoner};
use balc::tableau::{saturate, TableauConfig};
use balc::{Axiom, BayesNet, ComplexContext, Concept, Kb, Ontology, VAxiom, World};
use common::*;

/// Tolerance for every probability comparison below.
const TOL: f64 = 1e-9;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn near(got: f64, want: f64, what: &str) -> Check {
    ensure((got - want).abs() <= TOL, || {
        format!("{what}: got {got}, want {want}")
    })
}

fn world(bn: &BayesNet, text: &str) -> World {
    let phi = ctx(bn.signature(), text);
    let mut matching = bn.worlds().filter(|w| w.satisfies(&phi));
    let w = matching.next().expect("some world");
    assert!(
        matching.next().is_none(),
        "{text} names more than one world"
    );
    w
}

fn world_probability(bn: &BayesNet, text: &str) -> f64 {
    bn.world_probability(&world(bn, text)).unwrap()
}

fn chain_rule_values() -> Check {
    let bn = fig1();
    near(
        world_probability(&bn, "{X=f,Y=f,Z=t,W=f}"),
        0.0378,
        "(¬X,¬Y,Z,¬W)",
    )?;
    near(
        world_probability(&bn, "{X=t,Y=t,Z=t,W=t}"),
        0.0,
        "(X,Y,Z,W)",
    )
}

fn table_rows() -> Check {
    let bn = fig1();
    near(world_probability(&bn, "{X=t,Y=t,Z=f,W=t}"), 0.063, "row 2")?;
    near(world_probability(&bn, "{X=t,Y=f,Z=f,W=t}"), 0.567, "row 4")?;
    near(world_probability(&bn, "{X=f,Y=t,Z=f,W=t}"), 0.189, "row 6")?;
    near(world_probability(&bn, "{X=f,Y=f,Z=t,W=t}"), 0.0162, "row 7")?;
    // The published value for this row, 0.0108, needs P(W=t | Z=f) = 0.3,
    // which contradicts rows 2, 4 and 6. The network keeps 0.9, so the
    // chain rule gives 0.3 · 0.3 · 0.4 · 0.9.
    near(world_probability(&bn, "{X=f,Y=f,Z=f,W=t}"), 0.0324, "row 8")
}

fn zero_context() -> Check {
    let bn = fig1();
    let sig = bn.signature();
    let expected = ctx(sig, "{X=t,Z=t} | {Y=t,Z=t}");
    let got = bn.zero_context();
    ensure(
        got.entails(&expected, sig) && expected.entails(&got, sig),
        || format!("zero context {}", got.display(sig)),
    )
}

fn pinpointing_running_example() -> Check {
    let base = load_kb("example3.balc", "fig1.bn");
    let pipe = load_kb("example3_pipe1.balc", "fig1.bn");
    let sig = base.bn.signature();
    let phi = Reasoner::new(&base)
        .inconsistency_context()
        .unwrap()
        .witness
        .unwrap();
    ensure(!phi.is_satisfiable(), || {
        format!("example KB: {}", phi.display(sig))
    })?;
    let phi = Reasoner::new(&pipe)
        .inconsistency_context()
        .unwrap()
        .witness
        .unwrap();
    let expected = ctx(sig, "{X=t,Z=t} | {Y=t,Z=t}");
    ensure(phi.equivalent(&expected, sig), || {
        format!("with pipe1: {}", phi.display(sig))
    })?;
    for (name, kb) in [("example KB", &base), ("with pipe1", &pipe)] {
        let consistent = Reasoner::new(kb).is_consistent().unwrap().decision();
        ensure(consistent == Some(true), || {
            format!("{name} not consistent")
        })?;
    }
    Ok(())
}

fn instance_example() -> Check {
    let kb = load_kb("example6.balc", "fig1.bn");
    let sig = kb.bn.signature();
    let kappa = ctx(sig, "{X=f,Y=f,Z=t}");
    near(kb.bn.context_probability(&kappa), 0.054, "P(¬X,¬Y,Z)")?;
    let reasoner = Reasoner::new(&kb);
    let lead_pipe = concept("LeadPipe");
    let top = ComplexContext::top();
    let p = reasoner
        .instance_probability(&lead_pipe, "p", &top)
        .unwrap()
        .probability()
        .unwrap();
    near(p, 0.054, "instance probability of LeadPipe(p)")?;
    near(
        p,
        oracle_conditional_instance(&kb, &lead_pipe, "p", &top, &top),
        "oracle",
    )?;
    let decided = reasoner
        .decide_instance(&lead_pipe, "p", &kappa)
        .unwrap()
        .decision();
    ensure(decided == Some(true), || {
        "LeadPipe(p) not entailed in {X=f,Y=f,Z=t}".into()
    })
}

fn oracle_equivalence() -> Check {
    let config = TableauConfig::default();
    let mut count = 0;
    for (seed, kb) in corpus() {
        count += 1;
        let phi = saturate(&kb, &config)
            .map_err(|e| format!("seed {seed}: {e}"))?
            .inconsistency_context;
        for w in kb.bn.worlds() {
            let inconsistent = !oracle_consistent(&kb.ontology.restriction(&w));
            ensure(w.satisfies(&phi) == inconsistent, || {
                format!("seed {seed}: world {}", w.display(kb.bn.signature()))
            })?;
        }
        let tableau = Reasoner::new(&kb).is_consistent().unwrap().decision();
        let oracle = Reasoner::new(&kb)
            .with_mode(Mode::Oracle)
            .is_consistent()
            .unwrap()
            .decision();
        ensure(tableau == oracle, || {
            format!("seed {seed}: is_consistent differs between modes")
        })?;
    }
    ensure(count >= 200, || format!("only {count} knowledge bases"))
}

fn in_unit_interval(p: f64) -> bool {
    (-TOL..=1.0 + TOL).contains(&p)
}

fn probability_laws() -> Check {
    for (seed, kb) in corpus() {
        let q = random_query(seed, kb.bn.signature());
        let reasoner = Reasoner::new(&kb);
        let p = reasoner
            .subsumption_probability(&q.c, &q.d, &q.kappa)
            .unwrap()
            .probability()
            .unwrap();
        ensure(in_unit_interval(p), || format!("seed {seed}: {p}"))?;
        let floor = 1.0 - kb.bn.context_probability(&q.kappa);
        ensure(p >= floor - TOL, || format!("seed {seed}: {p} < {floor}"))?;
        if kb.bn.context_probability(&q.lambda) > TOL {
            let cond = reasoner
                .conditional_subsumption_probability(&q.c, &q.d, &q.kappa, &q.lambda)
                .unwrap()
                .probability()
                .unwrap();
            ensure(in_unit_interval(cond), || format!("seed {seed}: {cond}"))?;
            let expected = oracle_conditional_subsumption(&kb, &q.c, &q.d, &q.kappa, &q.lambda);
            near(
                cond,
                expected,
                &format!("seed {seed}: conditional subsumption"),
            )?;
            if kb.ontology.individuals().iter().any(|i| &**i == "a") {
                let cond = reasoner
                    .conditional_instance_probability(&q.c, "a", &q.kappa, &q.lambda)
                    .unwrap()
                    .probability()
                    .unwrap();
                let expected = oracle_conditional_instance(&kb, &q.c, "a", &q.kappa, &q.lambda);
                near(
                    cond,
                    expected,
                    &format!("seed {seed}: conditional instance"),
                )?;
            }
        }
        let contextual = reasoner
            .decide_contextual_subsumption(&q.c, &q.d, &q.kappa)
            .unwrap()
            .decision();
        ensure(contextual == Some(p >= 1.0 - TOL), || {
            format!("seed {seed}: contextual decision")
        })?;
        let positive = reasoner
            .decide_positive_subsumption(&q.c, &q.d, &q.kappa)
            .unwrap()
            .decision();
        ensure(positive == Some(p > TOL), || {
            format!("seed {seed}: positive decision")
        })?;
    }
    Ok(())
}

fn classical_regression() -> Check {
    let pipe = load_kb("pipe_classical.balc", "always_true.bn");
    let consistent = Reasoner::new(&pipe).is_consistent().unwrap().decision();
    ensure(consistent == Some(false), || {
        "pipe ontology consistent".into()
    })?;
    let a = Concept::name("A");
    let contradiction = Concept::and(a.clone(), Concept::not(a.clone()));
    for (seed, kb) in corpus().take(50) {
        let sig = kb.bn.signature();
        let kappa = random_query(seed, sig).kappa;
        let reasoner = Reasoner::new(&kb);
        let c = random_query(seed, sig).c;
        let p = reasoner
            .subsumption_probability(&c, &c, &kappa)
            .unwrap()
            .probability()
            .unwrap();
        near(p, 1.0, &format!("seed {seed}: C ⊑ C"))?;
        for k in [ComplexContext::top(), kappa] {
            let sat = reasoner
                .concept_satisfiability(&contradiction, Some(&k))
                .unwrap()
                .decision();
            ensure(sat == Some(false), || {
                format!("seed {seed}: A ⊓ ¬A satisfiable")
            })?;
            let p = reasoner
                .unsatisfiability_probability(&contradiction, &k)
                .unwrap()
                .probability()
                .unwrap();
            near(p, 1.0, &format!("seed {seed}: A ⊓ ¬A emptiness"))?;
        }
    }
    Ok(())
}

fn termination() -> Check {
    let config = TableauConfig::default();
    let kb = load_kb("cyclic_exists.balc", "fig1.bn");
    let state = saturate(&kb, &config).map_err(|e| e.to_string())?;
    ensure(
        !state.aboxes.is_empty() && state.aboxes.iter().all(|(a, _)| a.individuals().len() <= 2),
        || "⊤ ⊑ ∃r.⊤ was not blocked".into(),
    )?;
    let cyclic = [
        "cyclic_exists.balc",
        "cyclic_chain.balc",
        "cyclic_clash.balc",
    ];
    for name in cyclic {
        let kb = load_kb(name, "fig1.bn");
        let phi = saturate(&kb, &config)
            .map_err(|e| format!("{name}: {e}"))?
            .inconsistency_context;
        for w in kb.bn.worlds() {
            let inconsistent = !oracle_consistent(&kb.ontology.restriction(&w));
            ensure(w.satisfies(&phi) == inconsistent, || {
                format!("{name}: wrong context")
            })?;
        }
    }
    // A ⊑ ∃r.A with A(a): an infinite chain unless blocked.
    let bn = load_bn("always_true.bn");
    let a = Concept::name("A");
    let onto = Ontology::new(vec![
        VAxiom::always(Axiom::gci(a.clone(), Concept::exists("r", a.clone()))),
        VAxiom::always(Axiom::concept(a, "a")),
    ]);
    let kb = Kb::new(onto, bn).unwrap();
    saturate(&kb, &config).map_err(|e| e.to_string())?;
    Ok(())
}

fn round_trip_and_determinism() -> Check {
    for name in ["fig1.bn", "always_true.bn"] {
        let bn = load_bn(name);
        let back = parse_bn(&serialize_bn(&bn)).map_err(|e| format!("{name}: {e}"))?;
        ensure(back == bn, || format!("{name} changed"))?;
    }
    let ontologies = [
        ("example3.balc", "fig1.bn"),
        ("example3_pipe1.balc", "fig1.bn"),
        ("example6.balc", "fig1.bn"),
        ("cyclic_exists.balc", "fig1.bn"),
        ("cyclic_chain.balc", "fig1.bn"),
        ("cyclic_clash.balc", "fig1.bn"),
        ("pipe_classical.balc", "always_true.bn"),
    ];
    for (name, bn) in ontologies {
        let kb = load_kb(name, bn);
        let sig = kb.bn.signature();
        let back = parse_ontology(&serialize_ontology(&kb.ontology, sig), sig)
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(back == kb.ontology, || format!("{name} changed"))?;
    }
    let path = |f: &str| fixture(f).display().to_string();
    let queries = [
        vec![
            "inconsistency-context".into(),
            path("example3_pipe1.balc"),
            path("fig1.bn"),
            "--trace".into(),
        ],
        vec![
            "prob-instance".into(),
            path("example6.balc"),
            path("fig1.bn"),
            "--concept".into(),
            "LeadPipe".into(),
            "--individual".into(),
            "p".into(),
        ],
    ];
    for q in queries {
        let argv = || std::iter::once("balc".to_string()).chain(q.iter().cloned());
        let first = run(argv());
        for _ in 0..3 {
            ensure(run(argv()) == first, || {
                format!("{q:?} changed between runs")
            })?;
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("chain rule on the example network", chain_rule_values),
        ("consistent joint table rows", table_rows),
        ("zero context", zero_context),
        (
            "inconsistency contexts of the running example",
            pinpointing_running_example,
        ),
        ("instance probability example", instance_example),
        (
            "tableau agrees with per-world reasoning",
            oracle_equivalence,
        ),
        ("probability laws", probability_laws),
        ("classical regression", classical_regression),
        ("termination on cyclic TBoxes", termination),
        ("round trip and determinism", round_trip_and_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS {:>2} {name} ({secs:.2}s)", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
