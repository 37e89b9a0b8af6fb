//! Seeded generators, independent oracles and the per-criterion checks
//! shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::{Duration, Instant};

use circos_core::analysis::{stacked_matrix_of, synthesized_matrix_of, RingClass};
use circos_core::config::{parse, serialize, CircosConfig, Ring, Token, TrackAddr, TrackKind};
use circos_core::corpus::{Corpus, CorpusRecord};
use circos_core::dag::{layout, ReferenceDag};
use circos_core::recommend::{assemble_prompt, generate_validated, MockProvider, Recommender, TOKEN_CONSTRAINT};
use circos_core::render::data::{parse_csv, AttachValue, AttachmentRow, DatasetData, DatasetKind, KaryotypeBlock};
use circos_core::render::layout::{angular_scale, pack_lanes};
use circos_core::render::{render_svg, PlotSession};
use circos_core::retrieval::{levenshtein, record_text, HashingEmbedder, VectorIndex};
use circos_core::{GenerationProvider, PromptBundle, RecommendError};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const SCENARIO: [&str; 2] = [
    "<ideogram><split><highlight><split><line><split><tile><split><chord>",
    "<ideogram><split><highlight><split><line><split><scatter><split><chord>",
];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_kind(rng: &mut StdRng) -> TrackKind {
    TrackKind::ALL[rng.random_range(0..TrackKind::ALL.len())]
}

/// 1..=max_rings rings of 1..=max_tracks tracks each.
pub fn random_config(rng: &mut StdRng, max_rings: usize, max_tracks: usize) -> CircosConfig {
    let rings = rng.random_range(1..=max_rings);
    CircosConfig::new(
        (0..rings)
            .map(|_| {
                let n = rng.random_range(1..=max_tracks);
                Ring::new((0..n).map(|_| random_kind(rng)).collect()).unwrap()
            })
            .collect(),
    )
}

pub fn record(id: &str, annotation: &str, config: &str) -> CorpusRecord {
    CorpusRecord { id: id.into(), annotation: annotation.into(), config: parse(config).unwrap(), source_meta: None }
}

pub fn corpus_of(configs: &[CircosConfig]) -> Corpus {
    Corpus::from_records(configs.iter().enumerate().map(|(i, c)| CorpusRecord {
        id: format!("r{i:03}"),
        annotation: format!("plot {i}"),
        config: c.clone(),
        source_meta: None,
    }))
}

const WORDS: [&str; 16] = [
    "gene",
    "density",
    "synteny",
    "methylation",
    "expression",
    "variant",
    "copy",
    "number",
    "human",
    "mouse",
    "links",
    "coverage",
    "tumor",
    "scores",
    "conservation",
    "chromosome",
];

/// `n` records with distinct annotations drawn from a small vocabulary.
pub fn synthetic_corpus(rng: &mut StdRng, n: usize) -> Corpus {
    Corpus::from_records((0..n).map(|i| {
        let words: Vec<&str> = (0..rng.random_range(2..6)).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
        CorpusRecord {
            id: format!("s{i:03}"),
            annotation: format!("{} sample{i}", words.join(" ")),
            config: random_config(rng, 6, 3),
            source_meta: None,
        }
    }))
}

/// Ring token names read straight from the bare text form.
fn rings_from_text(bare: &str) -> Vec<Vec<String>> {
    bare.split("<split>")
        .map(|ring| ring.trim_start_matches('<').trim_end_matches('>').split("><").map(str::to_string).collect())
        .collect()
}

/// Adjacent-ring transition tally computed from text.
pub fn oracle_stacked(bare: &[String]) -> HashMap<(String, String), u64> {
    let mut out = HashMap::new();
    for text in bare {
        let mut names = vec!["start".to_string()];
        for ring in rings_from_text(text) {
            names.push(if ring.len() > 1 { "synth".into() } else { ring[0].clone() });
        }
        names.push("end".into());
        for w in names.windows(2) {
            *out.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
        }
    }
    out
}

/// Same-ring co-occurrence tally and the number of rings containing each
/// type, computed from text.
pub fn oracle_synth(bare: &[String]) -> (HashMap<(String, String), u64>, HashMap<String, u64>) {
    let mut pairs = HashMap::new();
    let mut containing = HashMap::new();
    for text in bare {
        for ring in rings_from_text(text) {
            let distinct: HashSet<&String> = ring.iter().collect();
            for a in &distinct {
                *containing.entry((*a).clone()).or_insert(0) += 1;
                for b in &distinct {
                    let together = if a == b { ring.iter().filter(|t| t == a).count() >= 2 } else { true };
                    if together {
                        *pairs.entry(((*a).clone(), (*b).clone())).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    (pairs, containing)
}

/// Plain recursive edit distance with memoization.
pub fn lev_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo).min(go(a, b, i, j + 1, memo)).min(go(a, b, i + 1, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

pub fn random_tokens(rng: &mut StdRng, alphabet: &[Token], max_len: usize) -> Vec<Token> {
    (0..rng.random_range(0..=max_len)).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

pub fn random_karyotype(rng: &mut StdRng) -> Vec<(String, u64)> {
    (0..rng.random_range(1..=30)).map(|i| (format!("chr{i}"), rng.random_range(1..=250_000_000u64))).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn check_grammar() -> Result<String, String> {
    let started = Instant::now();
    let mut r = rng(1);
    for i in 0..1000 {
        let c = random_config(&mut r, 12, 4);
        for wrapped in [true, false] {
            let text = serialize(&c, wrapped);
            let back = parse(&text).map_err(|e| format!("config {i}: `{text}` failed to parse: {e}"))?;
            ensure(back == c, || format!("config {i}: `{text}` did not round-trip"))?;
        }
    }
    for s in SCENARIO {
        let c = parse(s).map_err(|e| e.to_string())?;
        ensure(c.rings().len() == 5 && c.rings().iter().all(|r| r.tracks().len() == 1), || {
            format!("`{s}` is not 5 single-track rings")
        })?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 configs x 2 forms in {elapsed:.2?}"))
}

pub fn check_matrices() -> Result<String, String> {
    let mut r = rng(2);
    let class_name = |c: RingClass| c.name().to_string();
    for round in 0..20 {
        let configs: Vec<CircosConfig> = (0..r.random_range(1..=10)).map(|_| random_config(&mut r, 6, 3)).collect();
        let bare: Vec<String> = configs.iter().map(|c| c.to_bare_string()).collect();

        let m = stacked_matrix_of(&configs);
        let tally = oracle_stacked(&bare);
        for (i, &row) in m.labels.iter().enumerate() {
            let total: u64 = tally.iter().filter(|((a, _), _)| *a == class_name(row)).map(|(_, v)| v).sum();
            for (j, &col) in m.labels.iter().enumerate() {
                let want = tally.get(&(class_name(row), class_name(col))).copied().unwrap_or(0);
                ensure(m.counts[i][j] == want, || format!("corpus {round}: stacked count {row}->{col}"))?;
                let p = if total > 0 { want as f64 / total as f64 } else { 0.0 };
                ensure((m.probs[i][j] - p).abs() <= 1e-9, || format!("corpus {round}: stacked prob {row}->{col}"))?;
            }
            if m.row_totals[i] > 0 {
                let sum: f64 = m.probs[i].iter().sum();
                ensure((sum - 1.0).abs() <= 1e-9, || format!("corpus {round}: stacked row {row} sums to {sum}"))?;
            }
        }

        let s = synthesized_matrix_of(&configs);
        let (pairs, containing) = oracle_synth(&bare);
        for (i, &row) in s.labels.iter().enumerate() {
            let denom = containing.get(&class_name(row)).copied().unwrap_or(0);
            ensure(s.row_totals[i] == denom, || format!("corpus {round}: rings containing {row}"))?;
            for (j, &col) in s.labels.iter().enumerate() {
                let want = pairs.get(&(class_name(row), class_name(col))).copied().unwrap_or(0);
                ensure(s.counts[i][j] == want, || format!("corpus {round}: synthesized count {row}|{col}"))?;
                let p = if denom > 0 { want as f64 / denom as f64 } else { 0.0 };
                ensure((s.probs[i][j] - p).abs() <= 1e-9, || format!("corpus {round}: synthesized prob {row}|{col}"))?;
            }
        }
    }

    let worked: Vec<CircosConfig> =
        ["<ideogram><highlight><split><histogram><split><chord>", "<ideogram><split><histogram><split><histogram>"]
            .iter()
            .map(|s| parse(s).unwrap())
            .collect();
    let t = RingClass::Track;
    let m = stacked_matrix_of(&worked);
    let s = synthesized_matrix_of(&worked);
    use TrackKind::*;
    let got = [m.prob(t(Ideogram), t(Histogram)), m.prob(t(Histogram), t(Chord)), s.prob(t(Ideogram), t(Highlight))];
    ensure(got == [1.0, 1.0 / 3.0, 0.5], || format!("worked fixture gave {got:?}"))?;
    Ok("20 corpora match the brute-force tally; worked fixture 1, 1/3, 1/2".into())
}

pub fn check_levenshtein() -> Result<String, String> {
    let mut r = rng(3);
    let alphabet = [Token::Track(TrackKind::Line), Token::Split, Token::Track(TrackKind::Chord)];
    for i in 0..500 {
        let a = random_tokens(&mut r, &alphabet, 8);
        let b = random_tokens(&mut r, &alphabet, 8);
        let (got, want) = (levenshtein(&a, &b), lev_oracle(&a, &b));
        ensure(got == want, || format!("pair {i}: {got} != oracle {want}"))?;
    }
    for i in 0..1000 {
        let a = random_tokens(&mut r, &alphabet, 8);
        let b = random_tokens(&mut r, &alphabet, 8);
        let c = random_tokens(&mut r, &alphabet, 8);
        let ab = levenshtein(&a, &b);
        ensure(levenshtein(&a, &a) == 0, || format!("pair {i}: d(a,a) != 0"))?;
        ensure((ab == 0) == (a == b), || format!("pair {i}: identity of indiscernibles"))?;
        ensure(ab == levenshtein(&b, &a), || format!("pair {i}: symmetry"))?;
        ensure(ab <= levenshtein(&a, &c) + levenshtein(&c, &b), || format!("pair {i}: triangle"))?;
    }
    Ok("500 oracle pairs, 1000 metric triples".into())
}

pub fn check_retrieval() -> Result<String, String> {
    let mut r = rng(4);
    let corpus = synthetic_corpus(&mut r, 50);
    let embedder = HashingEmbedder;
    let index = VectorIndex::build(&corpus, &embedder).map_err(|e| e.to_string())?;
    let queries = [
        "gene density across human chromosomes".to_string(),
        "mouse synteny links".to_string(),
        "tumor copy number coverage".to_string(),
    ];
    for q in &queries {
        let qv = embedder.embed_text(q);
        let mut brute: Vec<(f64, String)> = corpus
            .records()
            .map(|rec| (qv.distance(&embedder.embed_text(&record_text(&rec.annotation, &rec.config))), rec.id.clone()))
            .collect();
        brute.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let mut previous: Vec<String> = Vec::new();
        for k in [1, 5, 10, 50] {
            let hits = index.search(&corpus, &embedder, q, k).map_err(|e| e.to_string())?;
            let ids: Vec<String> = hits.iter().map(|h| h.id.clone()).collect();
            let want: Vec<String> = brute.iter().take(k).map(|(_, id)| id.clone()).collect();
            ensure(ids == want, || format!("`{q}` k={k}: {ids:?} != {want:?}"))?;
            for (h, (d, _)) in hits.iter().zip(&brute) {
                ensure((h.distance - d).abs() < 1e-12, || format!("`{q}` k={k}: distance mismatch"))?;
            }
            ensure(ids.starts_with(&previous), || format!("`{q}` k={k}: not a prefix extension"))?;
            previous = ids;
        }
    }
    for rec in corpus.records().take(10) {
        let q = record_text(&rec.annotation, &rec.config);
        let hits = index.search(&corpus, &embedder, &q, 1).map_err(|e| e.to_string())?;
        ensure(hits[0].id == rec.id && hits[0].distance == 0.0 && hits[0].rank == 1, || {
            format!("exact query for {} returned {:?}", rec.id, hits[0])
        })?;
    }
    Ok("50 records, k in {1,5,10,50}, exact match at distance 0".into())
}

fn topo_acyclic(dag: &ReferenceDag) -> bool {
    let n = dag.nodes().len();
    let mut indeg: Vec<usize> = (0..n).map(|i| dag.in_edges(i).len()).collect();
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &e in dag.out_edges(v) {
            let to = dag.edges()[e].to;
            indeg[to] -= 1;
            if indeg[to] == 0 {
                queue.push(to);
            }
        }
    }
    seen == n
}

/// configs, clicked key, current, recommended, expected
pub type CompleteFixture =
    (&'static [&'static str], &'static str, Option<&'static str>, Option<&'static str>, &'static str);

/// Hand-traced completions.
pub const COMPLETE_FIXTURES: [CompleteFixture; 3] = [
    (&["<ideogram><highlight><split><chord>"], "5:end", None, None, "<ideogram><highlight><split><chord>"),
    (
        &["<ideogram><split><chord>", "<ideogram><split><line>"],
        "3:line",
        Some("<ideogram><split><chord>"),
        None,
        "<ideogram><split><line>",
    ),
    (&["<ideogram><split><chord>", "<ideogram><split><line>"], "4:end", None, None, "<ideogram><split><chord>"),
];

/// Pairwise crossing count between consecutive layers.
pub fn oracle_crossings(dag: &ReferenceDag, order: &[Vec<usize>]) -> usize {
    let mut pos = vec![0usize; dag.nodes().len()];
    for layer in order {
        for (i, &n) in layer.iter().enumerate() {
            pos[n] = i;
        }
    }
    let edges = dag.edges();
    let mut total = 0;
    for (i, a) in edges.iter().enumerate() {
        for b in &edges[i + 1..] {
            let same_gap = dag.nodes()[a.from].depth == dag.nodes()[b.from].depth;
            let (du, dv) = (pos[a.from] as i64 - pos[b.from] as i64, pos[a.to] as i64 - pos[b.to] as i64);
            if same_gap && du * dv < 0 {
                total += 1;
            }
        }
    }
    total
}

pub fn check_dag() -> Result<String, String> {
    let mut r = rng(5);
    for round in 0..50 {
        let configs: Vec<CircosConfig> = (0..r.random_range(1..=10)).map(|_| random_config(&mut r, 6, 3)).collect();
        let ids: Vec<String> = (0..configs.len()).map(|i| format!("c{i}")).collect();
        let dag = ReferenceDag::build(ids.iter().map(String::as_str).zip(&configs)).map_err(|e| e.to_string())?;
        ensure(topo_acyclic(&dag), || format!("set {round}: cycle"))?;
        for (id, c) in ids.iter().zip(&configs) {
            let mut at = dag.start();
            for (depth, tok) in c.wrapped_tokens().into_iter().enumerate().skip(1) {
                let next = dag.node(tok, depth).ok_or_else(|| format!("set {round}: {id} node {depth} missing"))?;
                let e = dag.edge(at, next).ok_or_else(|| format!("set {round}: {id} edge at {depth} missing"))?;
                ensure(dag.edges()[e].provenance.contains(id), || format!("set {round}: {id} not in provenance"))?;
                at = next;
            }
            ensure(dag.nodes()[at].token == Token::End, || format!("set {round}: {id} path does not end"))?;
        }
        let weights: u64 = dag.edges().iter().map(|e| e.weight as u64).sum();
        let lengths: u64 = configs.iter().map(|c| c.wrapped_tokens().len() as u64 - 1).sum();
        ensure(weights == lengths, || format!("set {round}: weights {weights} != {lengths}"))?;
        let l = layout(&dag);
        for e in dag.edges() {
            ensure(l.positions[e.to].layer == l.positions[e.from].layer + 1, || format!("set {round}: long edge"))?;
        }
        let initial = oracle_crossings(&dag, dag.layers());
        let after = oracle_crossings(&dag, &l.order);
        ensure(after <= initial, || format!("set {round}: crossings {after} > initial {initial}"))?;
        ensure(l.initial_crossings == initial && l.crossings == after, || {
            format!("set {round}: reported crossings differ from the pairwise count")
        })?;
    }
    for (i, (configs, clicked, current, recommended, want)) in COMPLETE_FIXTURES.iter().enumerate() {
        let parsed: Vec<CircosConfig> = configs.iter().map(|s| parse(s).unwrap()).collect();
        let ids: Vec<String> = (0..parsed.len()).map(|j| format!("f{j}")).collect();
        let dag = ReferenceDag::build(ids.iter().map(String::as_str).zip(&parsed)).unwrap();
        let node = dag.find(clicked).map_err(|e| e.to_string())?;
        let cur = current.map(|s| parse(s).unwrap());
        let rec = recommended.map(|s| parse(s).unwrap());
        let got = dag.complete_path(node, cur.as_ref(), rec.as_ref()).map_err(|e| e.to_string())?;
        ensure(got.to_bare_string() == *want, || format!("fixture {i}: got {}", got.to_bare_string()))?;
    }
    Ok("50 random sets; 3 completion fixtures".into())
}

/// Counts calls and delegates.
pub struct Counting<P> {
    pub inner: P,
    pub calls: std::sync::atomic::AtomicUsize,
}

impl<P: GenerationProvider> GenerationProvider for Counting<P> {
    fn generate(&self, prompt: &PromptBundle, seed: Option<u64>) -> Result<String, RecommendError> {
        self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        self.inner.generate(prompt, seed)
    }
}

pub fn check_recommender() -> Result<String, String> {
    let mut r = rng(6);
    let corpus = synthetic_corpus(&mut r, 30);
    let embedder = HashingEmbedder;
    let index = VectorIndex::build(&corpus, &embedder).map_err(|e| e.to_string())?;
    let query = "human mouse synteny links";
    let existing = parse("<ideogram><split><histogram>").unwrap();
    let k = 5;

    let hits = index.search(&corpus, &embedder, query, k).map_err(|e| e.to_string())?;
    let retrieved: Vec<&CorpusRecord> = hits.iter().map(|h| corpus.get(&h.id).unwrap()).collect();
    let bundle = assemble_prompt(query, &retrieved, Some(&existing), None, k);
    let ids: Vec<&str> = bundle.examples.iter().map(|e| e.id.as_str()).collect();
    let want: Vec<&str> = hits.iter().map(|h| h.id.as_str()).collect();
    ensure(ids == want && ids.len() == k, || format!("examples {ids:?} != {want:?}"))?;
    let text = bundle.full_text();
    ensure(text.contains(TOKEN_CONSTRAINT), || "constraint sentence missing".into())?;
    ensure(text.contains("<ideogram><split><histogram>"), || "existing design missing".into())?;

    let bad =
        Counting { inner: MockProvider::Fixed("I would suggest a <donut> plot".into()), calls: Default::default() };
    match generate_validated(&bad, &bundle, None, 3) {
        Err(RecommendError::GenerationInvalid { raw, .. }) if raw.len() == 3 => {}
        other => return Err(format!("invalid output gave {other:?}")),
    }
    let calls = bad.calls.load(std::sync::atomic::Ordering::SeqCst);
    ensure(calls == 3, || format!("{calls} provider calls, expected 3"))?;

    let good = MockProvider::Fixed(format!("Recommended: {}\nLinks in the centre.", SCENARIO[1]));
    let rec = Recommender { corpus: &corpus, index: &index, embedder: &embedder, generator: &good }
        .recommend(query, Some(&existing), k, 3, None)
        .map_err(|e| e.to_string())?;
    ensure(rec.config.rings().len() == 5 && rec.config_string() == SCENARIO[1], || {
        format!("got {}", rec.config_string())
    })?;
    let refs: Vec<&str> = rec.references.iter().map(String::as_str).collect();
    ensure(refs == want, || format!("references {refs:?} != {want:?}"))?;
    Ok("k examples in rank order, 3 retries then GenerationInvalid, 5-ring scenario".into())
}

/// Session over `blocks` with one attachment dataset per attachment track
/// and a link dataset for chords.
pub fn demo_session(config: &str) -> PlotSession {
    let mut s = PlotSession::new("demo");
    s.add_dataset(
        "genome",
        parse_csv(
            DatasetKind::Karyotype,
            b"id,label,length,color\nhs1,chr1,1000,#d0d0d0\nhs2,chr2,600,\nhs3,chr3,400,\n",
        )
        .unwrap(),
    )
    .unwrap();
    s.add_dataset(
        "signal",
        parse_csv(
            DatasetKind::Attachment,
            b"block,start,end,value\nhs1,0,200,3\nhs1,150,400,7\nhs2,0,300,1\nhs2,250,600,9\nhs3,10,390,4\n",
        )
        .unwrap(),
    )
    .unwrap();
    s.add_dataset(
        "genes",
        parse_csv(
            DatasetKind::Attachment,
            b"block,start,end,value\nhs1,0,50,exon\nhs1,40,90,intron\nhs3,60,100,exon\n",
        )
        .unwrap(),
    )
    .unwrap();
    s.add_dataset(
        "links",
        parse_csv(
            DatasetKind::Link,
            b"src_block,src_start,src_end,dst_block,dst_start,dst_end,value\nhs1,0,100,hs2,0,100,1\nhs1,500,700,hs3,0,50,2\nhs2,300,350,hs3,200,260,1\n",
        )
        .unwrap(),
    )
    .unwrap();
    s.set_config(parse(config).unwrap());
    s
}

/// `datum` elements per track group, keyed by the group's data-track value.
pub fn datum_counts(svg: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let mut rest = svg;
    while let Some(i) = rest.find("data-track=\"") {
        rest = &rest[i + 12..];
        let addr = rest[..rest.find('"').unwrap()].to_string();
        let body = &rest[..rest.find("</g>").unwrap()];
        out.insert(addr, body.matches("class=\"datum").count());
    }
    out
}

pub fn check_renderer() -> Result<String, String> {
    let started = Instant::now();
    let mut r = rng(7);
    for i in 0..100 {
        let k = random_karyotype(&mut r);
        let gap = r.random_range(0.0..(359.0 / k.len() as f64));
        let s = angular_scale(k.iter().map(|(id, l)| (id.as_str(), *l)), gap).map_err(|e| e.to_string())?;
        let total: f64 = s.blocks.iter().map(|b| b.span()).sum::<f64>() + gap * s.blocks.len() as f64;
        ensure((total - 360.0).abs() <= 1e-6, || format!("karyotype {i}: total {total}"))?;
    }
    let s = angular_scale([("a", 100), ("b", 300)], 2.0).map_err(|e| e.to_string())?;
    let spans = (s.blocks[0].span(), s.blocks[1].span());
    ensure((spans.0 - 89.0).abs() < 1e-9 && (spans.1 - 267.0).abs() < 1e-9, || format!("spans {spans:?}"))?;

    let configs = [
        "<ideogram><split><histogram><split><line><split><chord>",
        "<ideogram><split><highlight><split><line><split><tile><split><chord>",
        "<ideogram><split><scatter><heatmap><split><tile><split><others>",
    ];
    for c in configs {
        let session = demo_session(c);
        let a = render_svg(&session).map_err(|e| e.to_string())?;
        let b = render_svg(&session.clone()).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("`{c}` renders differ"))?;
        let counts = datum_counts(&a);
        for binding in &session.bindings {
            let rows = session.dataset(&binding.dataset_id).unwrap().data.row_count();
            let got = counts.get(&binding.track.to_string()).copied().unwrap_or(0);
            ensure(got == rows, || format!("`{c}` track {}: {got} elements for {rows} rows", binding.track))?;
        }
    }

    let lanes = pack_lanes(&[("a", 0, 50), ("a", 40, 90), ("a", 60, 100)]);
    ensure(lanes == [0, 1, 0], || format!("tile lanes {lanes:?}"))?;
    let tile = demo_session("<tile>");
    let rows: Vec<AttachmentRow> = [(0, 50), (40, 90), (60, 100)]
        .iter()
        .map(|&(start, end)| AttachmentRow { block: "hs1".into(), start, end, value: AttachValue::Num(1.0) })
        .collect();
    let mut tile = tile;
    let id = tile.add_dataset("tiles", DatasetData::Attachment(rows)).map_err(|e| e.to_string())?;
    tile.update_binding(TrackAddr { ring: 0, position: 0 }, Some(&id), None).map_err(|e| e.to_string())?;
    let svg = render_svg(&tile).map_err(|e| e.to_string())?;
    let lane_attrs: Vec<&str> = svg.match_indices("data-lane=\"").map(|(i, _)| &svg[i + 11..i + 12]).collect();
    ensure(lane_attrs == ["0", "1", "0"], || format!("rendered lanes {lane_attrs:?}"))?;

    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("100 karyotypes, 89/267, deterministic, counts, lanes in {elapsed:.2?}"))
}

pub fn karyotype_blocks(k: &[(String, u64)]) -> Vec<KaryotypeBlock> {
    k.iter()
        .map(|(id, length)| KaryotypeBlock { id: id.clone(), label: id.clone(), length: *length, color: String::new() })
        .collect()
}
