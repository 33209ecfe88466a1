use serde_json::Value;

use outletcheck::config::EngineConfig;
use outletcheck::ingest::ARTICLE_FIELDS;

fn root(path: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(path)
}

#[test]
fn example_config_parses_to_defaults() {
    let text = std::fs::read_to_string(root("config.example.toml")).unwrap();
    let cfg = EngineConfig::parse(&text).unwrap();
    cfg.validate().unwrap();
    let defaults = EngineConfig::new(cfg.paths.articles.clone(), cfg.paths.store_dir.clone());
    assert_eq!(cfg.reliability, defaults.reliability);
    assert_eq!(cfg.sources, defaults.sources);
    assert_eq!(cfg.profile, defaults.profile);
    assert_eq!(cfg.stance, defaults.stance);
    assert_eq!(cfg.verdict, defaults.verdict);
    assert_eq!(cfg.training, defaults.training);
}

#[test]
fn article_schema_lists_record_fields() {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(root("schemas/article.v1.schema.json")).unwrap()).unwrap();
    let required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(required, ARTICLE_FIELDS);
}
