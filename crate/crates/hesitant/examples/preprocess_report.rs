//! Walk one report through the preprocessing pipeline, toggling stages.
//!
//! ```sh
//! cargo run --example preprocess_report
//! ```

use hesitant::textprep::{preprocess, stem, PrepConfig};

fn main() {
    let report = "FINAL REPORT\n\
                  Comparison with the prior exam dated ____.\n\
                  No pulmonary edema. Borderline size of the cardiac silhouette.\n\
                  Patchy opacities at the bases cannot be excluded.";

    println!("input:\n{report}\n");

    let default = PrepConfig::default();
    println!("default pipeline -> {:?}\n", preprocess(report, &default));

    let no_stem = PrepConfig {
        stem: false,
        ..PrepConfig::default()
    };
    println!("stemming off     -> {:?}\n", preprocess(report, &no_stem));

    let keep_stopwords = PrepConfig {
        remove_stopwords: false,
        stem: false,
        ..PrepConfig::default()
    };
    println!(
        "stopwords kept   -> {:?}\n",
        preprocess(report, &keep_stopwords)
    );

    for token in ["opacities", "opacity", "effusions", "worsening", "no"] {
        println!("stem({token:?}) = {:?}", stem(token));
    }
}
