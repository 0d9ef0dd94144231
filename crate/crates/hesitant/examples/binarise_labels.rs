//! Binarisation strategies and the uncertainty indicators they induce.
//!
//! ```sh
//! cargo run --example binarise_labels
//! ```

use hesitant::corpus::{LabelledStudy, Split, TriLabel};
use hesitant::labels::{binarise, compute_indicators, Strategy, CHEXPERT_STREAM};

fn main() -> hesitant::Result<()> {
    use TriLabel::{Negative as N, Positive as P, Uncertain as U};

    // How each strategy maps a column with uncertain verdicts.
    let column = vec![P, U, N, U, U];
    for strategy in [Strategy::UOnes, Strategy::UZeros, Strategy::URandom { seed: 7 }] {
        let mapped = binarise(&column, &strategy, CHEXPERT_STREAM)?;
        println!("{:<8} {:?}", strategy.name(), mapped);
    }

    // TLD over all nine labeller pairs, per strategy.
    let pairs = [
        (P, P),
        (P, N),
        (P, U),
        (N, P),
        (N, N),
        (N, U),
        (U, P),
        (U, N),
        (U, U),
    ];
    let studies: Vec<LabelledStudy> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(chexpert, negbio))| LabelledStudy {
            study_id: format!("s{i}"),
            split: Split::Train,
            text: "report".into(),
            chexpert,
            negbio,
        })
        .collect();

    println!("\npair                    u_ones  u_zeros  u_random(7)");
    let tables: Vec<Vec<bool>> = [
        Strategy::UOnes,
        Strategy::UZeros,
        Strategy::URandom { seed: 7 },
    ]
    .iter()
    .map(|s| {
        compute_indicators(&studies, s)
            .map(|ind| ind.iter().map(|i| i.tld).collect())
    })
    .collect::<hesitant::Result<_>>()?;
    for (i, &(c, n)) in pairs.iter().enumerate() {
        let pair = format!("({c:?}, {n:?})").to_lowercase();
        println!(
            "{pair:<23} {:>5} {:>8} {:>11}",
            tables[0][i] as u8,
            tables[1][i] as u8,
            tables[2][i] as u8
        );
    }

    // The uncertain flags are strategy-independent.
    let indicators = compute_indicators(&studies, &Strategy::UOnes)?;
    let flagged: Vec<&str> = indicators
        .iter()
        .filter(|i| i.chex_uncertain)
        .map(|i| i.study_id.as_str())
        .collect();
    println!("\nchexpert-uncertain studies: {flagged:?}");
    Ok(())
}
