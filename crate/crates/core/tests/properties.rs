mod common;

use progfc::dsl::{
    parse_program, render_program, LogicExpr, ReasoningProgram, ReasoningStep, Segment,
    TemplateString,
};
use progfc::engine::{
    aggregate, majority_vote, substitute, Environment, ExecSettings, FallbackPolicy, Value,
    VeracityLabel, Vote,
};
use progfc::eval::ClaimRecord;
use progfc::handlers::{parse_verify_output, MockHandler, UNPARSEABLE_VERIFY};
use progfc::retrieval::{combine_results, Bm25Index, Bm25Params, EvidenceDoc};
use proptest::prelude::*;

fn corpus_strategy() -> impl Strategy<Value = Vec<EvidenceDoc>> {
    prop::collection::vec(prop::collection::vec(0..12u8, 1..15), 1..40).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, words)| {
                let text: Vec<String> = words.iter().map(|w| format!("w{w}")).collect();
                EvidenceDoc::new(format!("d{i:03}"), "", text.join(" "))
            })
            .collect()
    })
}

fn query_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(0..14u8, 1..5).prop_map(|ws| {
        ws.iter()
            .map(|w| format!("w{w}"))
            .collect::<Vec<_>>()
            .join(" ")
    })
}

fn literal_strategy() -> impl Strategy<Value = String> {
    prop::string::string_regex(r#"[a-zA-Z0-9 ,.?'"{}\\-]{1,20}"#).unwrap()
}

fn template_strategy(vars: Vec<String>) -> impl Strategy<Value = TemplateString> {
    let seg = if vars.is_empty() {
        literal_strategy().prop_map(Segment::Literal).boxed()
    } else {
        prop_oneof![
            3 => literal_strategy().prop_map(Segment::Literal),
            1 => prop::sample::select(vars).prop_map(Segment::Placeholder),
        ]
        .boxed()
    };
    prop::collection::vec(seg, 1..5).prop_map(TemplateString::new)
}

fn logic_strategy(vars: Vec<String>) -> impl Strategy<Value = LogicExpr> {
    let leaf = prop::sample::select(vars).prop_map(|v| LogicExpr::var(&v));
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(LogicExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LogicExpr::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| LogicExpr::or(a, b)),
        ]
    })
}

/// Random well-formed programs: a mix of Question/Verify steps whose
/// templates only reference earlier answers, then a Predict over the facts.
fn program_strategy() -> impl Strategy<Value = ReasoningProgram> {
    prop::collection::vec(any::<bool>(), 1..6)
        .prop_flat_map(|kinds| {
            let mut answers = Vec::new();
            let mut facts = Vec::new();
            let mut steps = Vec::new();
            for (i, is_question) in kinds.iter().enumerate() {
                let earlier = answers.clone();
                let name = if *is_question {
                    format!("answer_{i}")
                } else {
                    format!("fact_{i}")
                };
                steps.push((
                    template_strategy(earlier),
                    Just(name.clone()),
                    Just(*is_question),
                ));
                if *is_question {
                    answers.push(name);
                } else {
                    facts.push(name);
                }
            }
            if facts.is_empty() {
                facts.push("fact_last".to_string());
                steps.push((
                    template_strategy(answers),
                    Just("fact_last".to_string()),
                    Just(false),
                ));
            }
            (steps, logic_strategy(facts))
        })
        .prop_map(|(steps, expr)| {
            let mut out: Vec<ReasoningStep> = steps
                .into_iter()
                .map(|(t, name, q)| {
                    if q {
                        ReasoningStep::question(&name, t)
                    } else {
                        ReasoningStep::verify(&name, t)
                    }
                })
                .collect();
            out.push(ReasoningStep::predict("label", expr));
            ReasoningProgram::new(out, "").expect("generated program is valid")
        })
}

fn vote_strategy() -> impl Strategy<Value = Option<VeracityLabel>> {
    prop_oneof![
        Just(Some(VeracityLabel::Supported)),
        Just(Some(VeracityLabel::Refuted)),
        Just(None),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn retrieval_is_prefix_closed(docs in corpus_strategy(), query in query_strategy(), k in 0usize..30) {
        let index = Bm25Index::from_docs(docs, Bm25Params::default()).unwrap();
        let small = index.retrieve(&query, k);
        let large = index.retrieve(&query, k + 1);
        prop_assert!(small.len() <= k);
        prop_assert_eq!(small.ranked(), &large.ranked()[..small.len()]);
        for pair in large.ranked().windows(2) {
            prop_assert!(pair[0].score > pair[1].score
                || (pair[0].score == pair[1].score && pair[0].doc_id < pair[1].doc_id));
        }
    }

    #[test]
    fn rarer_terms_weigh_more(docs in corpus_strategy()) {
        let index = Bm25Index::from_docs(docs, Bm25Params::default()).unwrap();
        for a in 0..12 {
            for b in 0..12 {
                let (ta, tb) = (format!("w{a}"), format!("w{b}"));
                if index.doc_freq(&ta) < index.doc_freq(&tb) {
                    prop_assert!(index.idf(&ta) > index.idf(&tb));
                }
            }
        }
        prop_assert!(index.idf("w0") > 0.0);
    }

    #[test]
    fn more_occurrences_score_higher(filler in 0usize..10, tf in 1usize..8) {
        // Equal-length documents differing only in how often `target` occurs.
        let doc = |n: usize| {
            let mut words = vec!["target"; n];
            words.extend(vec!["pad"; filler + 8 - n]);
            words.join(" ")
        };
        let docs = vec![
            EvidenceDoc::new("low", "", doc(tf)),
            EvidenceDoc::new("high", "", doc(tf + 1)),
            EvidenceDoc::new("other", "", "unrelated words only"),
        ];
        let index = Bm25Index::from_docs(docs, Bm25Params::default()).unwrap();
        let hits = index.retrieve("target", 3);
        prop_assert_eq!(hits.doc_ids().collect::<Vec<_>>(), ["high", "low"]);
    }

    #[test]
    fn combine_is_idempotent_and_order_free(docs in corpus_strategy(), q1 in query_strategy(), q2 in query_strategy()) {
        let index = Bm25Index::from_docs(docs, Bm25Params::default()).unwrap();
        let (a, b) = (index.retrieve(&q1, 10), index.retrieve(&q2, 10));
        let ab = combine_results([&a, &b], 10);
        prop_assert_eq!(&ab, &combine_results([&b, &a], 10));
        prop_assert_eq!(&combine_results([&ab, &ab], 10), &ab);
        prop_assert_eq!(&combine_results([&a], 10), &a);
    }

    #[test]
    fn programs_round_trip(program in program_strategy()) {
        let text = render_program(&program);
        let parsed = parse_program(&text);
        prop_assert!(parsed.is_ok(), "{}\n{:?}", text, parsed.err());
        let parsed = parsed.unwrap();
        prop_assert_eq!(&parsed, &program);
        prop_assert_eq!(render_program(&parsed), text);
    }

    #[test]
    fn substitution_fills_every_placeholder(names in prop::collection::vec("[a-z]{1,6}", 1..4), values in prop::collection::vec("[A-Za-z ]{0,10}", 4)) {
        let mut env = Environment::new();
        for (i, n) in names.iter().enumerate() {
            env = env.with(n, Value::Text(values[i].clone()));
        }
        let segments: Vec<Segment> = names
            .iter()
            .flat_map(|n| [Segment::Literal("<".into()), Segment::Placeholder(n.clone())])
            .collect();
        let out = substitute(&TemplateString::new(segments), &env).unwrap();
        let expected: String = names
            .iter()
            .map(|n| format!("<{}", env.lookup(n).unwrap().value))
            .collect();
        prop_assert_eq!(out, expected);
    }

    #[test]
    fn aggregation_ignores_order_and_failures(mut votes in prop::collection::vec(vote_strategy(), 0..9), seed in any::<u64>()) {
        let claim = ClaimRecord::new("c", "x", VeracityLabel::Supported);
        let handler = MockHandler::default().with_claim("x", false);
        let settings = ExecSettings::closed_book();
        let base = aggregate(&votes, &claim, FallbackPolicy::DirectVerify, &handler, &settings);
        let s = votes.iter().filter(|v| **v == Some(VeracityLabel::Supported)).count();
        let r = votes.iter().filter(|v| **v == Some(VeracityLabel::Refuted)).count();
        prop_assert_eq!((base.supported_votes, base.refuted_votes), (s, r));
        match majority_vote(&votes) {
            Vote::Decided(l) => prop_assert_eq!(l, if s > r { VeracityLabel::Supported } else { VeracityLabel::Refuted }),
            Vote::Tie => prop_assert!(s == r && s > 0),
            Vote::NoValidVotes => prop_assert_eq!(s + r, 0),
        }
        use rand::seq::SliceRandom;
        votes.shuffle(&mut common::rng(seed));
        votes.push(None);
        let shuffled = aggregate(&votes, &claim, FallbackPolicy::DirectVerify, &handler, &settings);
        prop_assert_eq!(shuffled.label, base.label);
        prop_assert_eq!(shuffled.decided_by, base.decided_by);
    }

    #[test]
    fn verify_parsing_is_total(text in any::<String>()) {
        let out = parse_verify_output(&text);
        match out.anomaly.as_deref() {
            None => {}
            Some(a) => {
                prop_assert_eq!(a, UNPARSEABLE_VERIFY);
                prop_assert!(!out.value);
            }
        }
    }

    #[test]
    fn parser_never_panics(text in any::<String>()) {
        if let Err(diags) = parse_program(&text) {
            prop_assert!(!diags.is_empty());
        }
    }
}
