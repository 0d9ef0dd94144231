//! Generate a seeded synthetic corpus and write it out in the two ingestion
//! formats (reports.jsonl + labels.csv).
//!
//! ```sh
//! cargo run --example generate_corpus
//! ```

use std::fs::File;
use std::io::BufWriter;

use hesitant::corpus::{generate_synthetic, load_corpus, ScenarioMix, TriLabel};

fn main() -> hesitant::Result<()> {
    let mix = ScenarioMix {
        certain_positive: 0.35,
        certain_negative: 0.35,
        explicit_uncertain: 0.20,
        borderline_disagreement: 0.10,
        random_noise: 0.0,
    };
    let studies = generate_synthetic(1000, &mix, 7)?;

    let count = |f: &dyn Fn(&&hesitant::corpus::LabelledStudy) -> bool| {
        studies.iter().filter(f).count()
    };
    println!("generated {} studies", studies.len());
    println!(
        "  chexpert: {} positive, {} negative, {} uncertain",
        count(&|s| s.chexpert == TriLabel::Positive),
        count(&|s| s.chexpert == TriLabel::Negative),
        count(&|s| s.chexpert == TriLabel::Uncertain),
    );
    println!(
        "  raw labeller disagreement: {:.1}%",
        100.0 * count(&|s| s.chexpert != s.negbio) as f64 / studies.len() as f64
    );
    println!("\nfirst study ({:?}):\n{}\n", studies[0].study_id, studies[0].text);

    let dir = std::env::temp_dir().join("hesitant_generate_corpus");
    std::fs::create_dir_all(&dir)?;
    let reports = dir.join("reports.jsonl");
    let labels = dir.join("labels.csv");
    hesitant::corpus::write_reports_jsonl(BufWriter::new(File::create(&reports)?), &studies)?;
    hesitant::corpus::write_labels_csv(BufWriter::new(File::create(&labels)?), &studies)?;

    // Round-trip through the file formats.
    let (reloaded, summary) = load_corpus(&reports, &labels)?;
    println!(
        "wrote and reloaded {} studies from {} (exclusions: {:?})",
        reloaded.len(),
        dir.display(),
        summary
    );
    Ok(())
}
