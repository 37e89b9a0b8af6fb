//! Deterministic inputs for the benchmarks.

use circos_core::config::{CircosConfig, Ring, TrackKind};
use circos_core::corpus::{Corpus, CorpusRecord};
use circos_core::render::data::parse_csv;
use circos_core::render::{DatasetKind, PlotSession};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn config(rng: &mut StdRng) -> CircosConfig {
    let rings = rng.random_range(2..8);
    CircosConfig::new(
        (0..rings)
            .map(|_| {
                let tracks = (0..rng.random_range(1..=2))
                    .map(|_| TrackKind::ALL[rng.random_range(0..TrackKind::ALL.len())])
                    .collect();
                Ring::new(tracks).unwrap()
            })
            .collect(),
    )
}

pub fn corpus(n: usize) -> Corpus {
    let mut rng = StdRng::seed_from_u64(7);
    Corpus::from_records((0..n).map(|i| CorpusRecord {
        id: format!("b{i:05}"),
        annotation: format!("figure {i} of genome {} with {} samples", i % 13, i % 7),
        config: config(&mut rng),
        source_meta: None,
    }))
}

/// A session with `rows` attachment rows over 24 blocks, bound to a
/// five-ring config.
pub fn session(rows: usize) -> PlotSession {
    let mut s = PlotSession::new("bench");
    let mut karyotype = String::from("id,label,length,color\n");
    for b in 0..24 {
        karyotype.push_str(&format!("hs{b},chr{b},{},\n", 1_000_000 + b * 50_000));
    }
    s.add_dataset("genome", parse_csv(DatasetKind::Karyotype, karyotype.as_bytes()).unwrap()).unwrap();
    let mut values = String::from("block,start,end,value\n");
    let mut links = String::from("src_block,src_start,src_end,dst_block,dst_start,dst_end,value\n");
    for i in 0..rows {
        let start = (i * 7919) % 900_000;
        values.push_str(&format!("hs{},{},{},{}\n", i % 24, start, start + 20_000, i % 97));
        if i % 10 == 0 {
            links.push_str(&format!(
                "hs{},{},{},hs{},{},{},1\n",
                i % 24,
                start,
                start + 5000,
                (i + 5) % 24,
                start,
                start + 5000
            ));
        }
    }
    s.add_dataset("values", parse_csv(DatasetKind::Attachment, values.as_bytes()).unwrap()).unwrap();
    s.add_dataset("links", parse_csv(DatasetKind::Link, links.as_bytes()).unwrap()).unwrap();
    s.set_config(
        circos_core::parse("<ideogram><split><histogram><split><heatmap><split><tile><split><chord>").unwrap(),
    );
    s
}
