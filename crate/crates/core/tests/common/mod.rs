//! Fixtures and reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use progfc::engine::VeracityLabel;
use progfc::eval::ClaimRecord;
use progfc::generation::{Exemplar, ExemplarSet};
use progfc::handlers::{MockHandler, ScriptedGenerator};
use progfc::retrieval::{Bm25Index, Bm25Params, EvidenceDoc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TWO_HOP_CLAIM: &str =
    "Both James Cameron and the director of the film Interstellar were born in Canada.";

pub const TWO_HOP_PROGRAM: &str = "def program():
    fact_1 = Verify(\"James Cameron was born in Canada.\")
    Answer_1 = Question(\"Who is the director of the film Interstellar?\")
    fact_2 = Verify(\"{Answer_1} was born in Canada.\")
    label = Predict(fact_1 and fact_2)";

/// Three-fact knowledge base for the two-hop example.
pub fn two_hop_handler() -> MockHandler {
    MockHandler::default()
        .with_claim("James Cameron was born in Canada.", true)
        .with_question(
            "Who is the director of the film Interstellar?",
            "Christopher Nolan",
        )
        .with_claim("Christopher Nolan was born in Canada.", false)
}

pub fn gallery() -> ExemplarSet {
    ExemplarSet::parse("gallery", include_str!("../fixtures/gallery.txt")).expect("gallery parses")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Boolean expressions

#[derive(Debug, Clone)]
pub enum Tree {
    Var(usize),
    Not(Box<Tree>),
    And(Box<Tree>, Box<Tree>),
    Or(Box<Tree>, Box<Tree>),
}

pub fn random_tree(rng: &mut impl Rng, vars: usize, depth: u32) -> Tree {
    if depth == 0 || rng.random_bool(0.3) {
        return Tree::Var(rng.random_range(0..vars));
    }
    match rng.random_range(0..3) {
        0 => Tree::Not(Box::new(random_tree(rng, vars, depth - 1))),
        1 => Tree::And(
            Box::new(random_tree(rng, vars, depth - 1)),
            Box::new(random_tree(rng, vars, depth - 1)),
        ),
        _ => Tree::Or(
            Box::new(random_tree(rng, vars, depth - 1)),
            Box::new(random_tree(rng, vars, depth - 1)),
        ),
    }
}

/// Fully parenthesized surface syntax; variable `i` is `fact_{i}`.
pub fn tree_source(t: &Tree) -> String {
    match t {
        Tree::Var(i) => format!("fact_{i}"),
        Tree::Not(a) => format!("not ({})", tree_source(a)),
        Tree::And(a, b) => format!("({}) and ({})", tree_source(a), tree_source(b)),
        Tree::Or(a, b) => format!("({}) or ({})", tree_source(a), tree_source(b)),
    }
}

/// Truth-table oracle: bit `i` of `assignment` is the value of `fact_{i}`.
pub fn truth(t: &Tree, assignment: u32) -> bool {
    match t {
        Tree::Var(i) => assignment >> i & 1 == 1,
        Tree::Not(a) => !truth(a, assignment),
        Tree::And(a, b) => truth(a, assignment) & truth(b, assignment),
        Tree::Or(a, b) => truth(a, assignment) | truth(b, assignment),
    }
}

// ---------------------------------------------------------------------------
// BM25 reference scorer

pub fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}

/// Scores every document from scratch, keeps positive scores, and sorts by
/// score descending then id ascending.
pub fn brute_force_rank(docs: &[EvidenceDoc], query: &str, k1: f64, b: f64) -> Vec<(String, f64)> {
    let tokenized: Vec<Vec<String>> = docs
        .iter()
        .map(|d| words(&format!("{} {}", d.title, d.text)))
        .collect();
    let n = docs.len() as f64;
    let avg = tokenized.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let q = words(query);
    let mut df: HashMap<&str, f64> = HashMap::new();
    for term in &q {
        if !df.contains_key(term.as_str()) {
            let count = tokenized.iter().filter(|t| t.contains(term)).count() as f64;
            df.insert(term, count);
        }
    }
    let mut out = Vec::new();
    for (d, toks) in docs.iter().zip(&tokenized) {
        let mut score = 0.0;
        for term in &q {
            let tf = toks.iter().filter(|t| *t == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = df[term.as_str()];
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * toks.len() as f64 / avg));
        }
        if score > 0.0 {
            out.push((d.doc_id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn random_corpus(rng: &mut impl Rng, max_docs: usize, vocab: usize) -> Vec<EvidenceDoc> {
    let n = rng.random_range(1..=max_docs);
    (0..n)
        .map(|i| {
            let len = rng.random_range(1..=30);
            let text = (0..len)
                .map(|_| format!("w{}", rng.random_range(0..vocab)))
                .collect::<Vec<_>>()
                .join(" ");
            EvidenceDoc::new(format!("d{i:04}"), "", text)
        })
        .collect()
}

pub fn random_query(rng: &mut impl Rng, vocab: usize) -> String {
    let len = rng.random_range(1..=6);
    (0..len)
        .map(|_| format!("w{}", rng.random_range(0..vocab + 5)))
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------------
// Synthetic two-hop retrieval corpus

pub struct TwoHopCase {
    pub claim: ClaimRecord,
    pub program: String,
    pub bridge: String,
}

/// 20 claims x 2 gold paragraphs plus 160 distractors. The second-hop
/// paragraph shares no term with its claim; it can only be found once the
/// bridge entity from the first hop is known.
pub fn two_hop_corpus() -> (Vec<EvidenceDoc>, Vec<TwoHopCase>, MockHandler) {
    let mut docs = Vec::new();
    let mut cases = Vec::new();
    let mut handler = MockHandler::default();
    for i in 0..20 {
        let film = format!("Zorblax{i}");
        let person = format!("Vexnor{i}");
        docs.push(EvidenceDoc::new(
            format!("film-{i}"),
            film.clone(),
            format!("{film} is a film directed by {person} and released to wide acclaim."),
        ));
        docs.push(EvidenceDoc::new(
            format!("person-{i}"),
            person.clone(),
            format!("{person} is a filmmaker raised near Tarsk{i}."),
        ));
        let question = format!("Who directed the film {film}?");
        let verify = format!("{person} won the Gold Lion prize.");
        handler = handler
            .with_question(&question, &person)
            .with_claim(&verify, true);
        let mut claim = ClaimRecord::new(
            format!("hop-{i}"),
            format!("The director of the film {film} was the winner of the Gold Lion award."),
            VeracityLabel::Supported,
        );
        claim.hops = Some(2);
        claim.gold_evidence_ids = vec![format!("film-{i}"), format!("person-{i}")];
        let program = format!(
            "answer_1 = Question(\"{question}\")\nfact_1 = Verify(\"{{answer_1}} won the Gold Lion prize.\")\nlabel = Predict(fact_1)"
        );
        cases.push(TwoHopCase {
            claim,
            program,
            bridge: person,
        });
    }
    let topics = [
        "festival", "award", "winner", "director", "film", "gold", "medal", "ceremony", "city",
        "season",
    ];
    let mut rng = rng(7);
    for j in 0..160 {
        let text = (0..12)
            .map(|_| topics[rng.random_range(0..topics.len())])
            .collect::<Vec<_>>()
            .join(" ");
        docs.push(EvidenceDoc::new(
            format!("filler-{j:03}"),
            "",
            format!("{text} {j}"),
        ));
    }
    (docs, cases, handler)
}

/// Terms shared by a claim and a document.
pub fn shared_terms(a: &str, b: &str) -> HashSet<String> {
    let a: HashSet<String> = words(a).into_iter().collect();
    words(b).into_iter().filter(|w| a.contains(w)).collect()
}

// ---------------------------------------------------------------------------
// Twenty-claim pipeline fixture

pub struct PipelineFixture {
    pub claims: Vec<ClaimRecord>,
    pub scripts: HashMap<String, Vec<String>>,
    pub handler: MockHandler,
    pub docs: Vec<EvidenceDoc>,
}

/// Twenty claims of four shapes: conjunction, bridge question, negation and a
/// claim whose samples include malformed programs.
pub fn pipeline_fixture() -> PipelineFixture {
    let mut claims = Vec::new();
    let mut scripts = HashMap::new();
    let mut handler = MockHandler::default();
    let mut docs = Vec::new();
    for i in 0..20 {
        let a = format!("Alpha{i}");
        let b = format!("Beta{i}");
        docs.push(EvidenceDoc::new(
            format!("a{i}"),
            a.clone(),
            format!("{a} is located in Gamma{i}."),
        ));
        docs.push(EvidenceDoc::new(
            format!("b{i}"),
            b.clone(),
            format!("{b} is located in Gamma{i}."),
        ));
        let truth_a = i % 3 != 0;
        let truth_b = i % 5 != 1;
        let (text, programs, expected) = match i % 4 {
            0 => (
                format!("{a} and {b} are both located in Gamma{i}."),
                vec![format!(
                    "\n    fact_1 = Verify(\"{a} is located in Gamma{i}.\")\n    fact_2 = Verify(\"{b} is located in Gamma{i}.\")\n    label = Predict(fact_1 and fact_2)"
                )],
                truth_a && truth_b,
            ),
            1 => (
                format!("The place where {a} is located also contains {b}."),
                vec![format!(
                    "\n    answer_1 = Question(\"Where is {a} located?\")\n    fact_1 = Verify(\"{b} is located in {{answer_1}}.\")\n    label = Predict(fact_1)"
                )],
                truth_b,
            ),
            2 => (
                format!("{a} is not located in Gamma{i}."),
                vec![format!(
                    "\n    fact_1 = Verify(\"{a} is located in Gamma{i}.\")\n    label = Predict(not fact_1)"
                )],
                !truth_a,
            ),
            _ => (
                format!("{a} or {b} is located in Gamma{i}."),
                vec![
                    format!(
                        "\n    fact_1 = Verify(\"{a} is located in Gamma{i}.\")\n    fact_2 = Verify(\"{b} is located in Gamma{i}.\")\n    label = Predict(fact_1 or fact_2)"
                    ),
                    "\n    label = Predict(fact_9)".to_string(),
                    "\n    fact_1 = Verify(\"unterminated)".to_string(),
                ],
                truth_a || truth_b,
            ),
        };
        handler = handler
            .with_claim(&format!("{a} is located in Gamma{i}."), truth_a)
            .with_claim(&format!("{b} is located in Gamma{i}."), truth_b)
            .with_question(&format!("Where is {a} located?"), &format!("Gamma{i}"));
        // Some gold labels disagree with the fixture so metrics are not trivial.
        let gold = if i % 7 == 3 { !expected } else { expected };
        let mut claim = ClaimRecord::new(
            format!("claim-{i:02}"),
            text.clone(),
            VeracityLabel::from(gold),
        );
        claim.hops = Some(2 + (i % 3) as u32);
        claim.gold_evidence_ids = vec![format!("a{i}"), format!("b{i}")];
        scripts.insert(text, programs);
        claims.push(claim);
    }
    PipelineFixture {
        claims,
        scripts,
        handler,
        docs,
    }
}

pub fn fixture_index(docs: &[EvidenceDoc]) -> Bm25Index {
    Bm25Index::from_docs(docs.to_vec(), Bm25Params::default()).expect("fixture corpus is valid")
}

pub fn fixture_generator(f: &PipelineFixture) -> ScriptedGenerator {
    ScriptedGenerator::new(f.scripts.clone())
}

pub fn tiny_exemplars() -> ExemplarSet {
    ExemplarSet {
        name: "tiny".into(),
        instruction: "Write a program.".into(),
        exemplars: vec![Exemplar {
            claim: "A is B.".into(),
            program_text: "fact_1 = Verify(\"A is B.\")\nlabel = Predict(fact_1)".into(),
        }],
    }
}
