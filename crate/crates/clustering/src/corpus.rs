//! Synthetic subject corpora for evaluating the clustering pipeline.

use rand::distributions::Alphanumeric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Builds a labeled evaluation corpus of `(fingerprint, subject)` pairs:
/// four device fleets whose subjects differ only in serial fragments, with
/// `per_template` members each (fingerprints `template{n}-{i}`), plus
/// `random_docs` unrelated subjects (fingerprints `random-{i}`). The same
/// seed always produces the same corpus.
pub fn synthetic_corpus(
    per_template: usize,
    random_docs: usize,
    seed: u64,
) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let templates: [fn(usize) -> String; 4] = [
        |i| {
            format!(
                "CN=plc-{i:03}.line{}.acme-industrial.example, O=Acme Industrial GmbH, L=Essen, C=DE",
                i % 7
            )
        },
        |i| format!("C=US, ST=California, O=Gateway Works Inc, OU=Field Devices, CN=gw-{i:04}"),
        |i| format!("CN=meter-{i:02}.district{}.iot.example.net", i % 3),
        |i| {
            format!(
                "O=Broker Services AG, OU=Unit {}, CN=broker-{i:02}.mq.example",
                i % 5
            )
        },
    ];

    let mut docs = Vec::with_capacity(4 * per_template + random_docs);
    for (t, template) in templates.iter().enumerate() {
        for i in 0..per_template {
            docs.push((format!("template{t}-{i:03}"), template(i)));
        }
    }
    for i in 0..random_docs {
        let length = rng.gen_range(12..=32);
        let subject: String = (&mut rng)
            .sample_iter(Alphanumeric)
            .take(length)
            .map(char::from)
            .collect();
        docs.push((format!("random-{i:03}"), subject));
    }
    docs
}
