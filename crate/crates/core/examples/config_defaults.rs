//! Print the default pipeline configuration, the document `--config` and
//! `RESPISCREEN_CONFIG` accept. Every key is optional when loading.

use respiscreen::PipelineConfig;

fn main() {
    println!("{}", PipelineConfig::default().to_json());
}
