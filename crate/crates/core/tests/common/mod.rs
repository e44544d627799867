#![allow(dead_code)]

pub mod dot;
pub mod gen;
pub mod oracle;

use std::path::{Path, PathBuf};

use pdaudit::dpv::{load_dpv_map, DpvMap};
use pdaudit::ir::{parse_program, Program};
use pdaudit::pipeline::{analyze, Analysis, Inputs};
use pdaudit::registry::{load_registries, parse_registries, Registries, RegistryPaths, RegistryTexts};
use pdaudit::report::RiskConfig;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn app_path(name: &str) -> PathBuf {
    fixtures_dir().join("apps").join(format!("{name}.pir"))
}

pub fn registry_path(file: &str) -> PathBuf {
    fixtures_dir().join("registries").join(file)
}

pub fn fixture_registry_paths() -> RegistryPaths {
    RegistryPaths {
        sources: Some(registry_path("sources.json")),
        sinks: Some(registry_path("sinks.json")),
        sanitizers: Some(registry_path("sanitizers.json")),
        lexicon: Some(registry_path("lexicon.json")),
    }
}

pub fn fixture_registries() -> (Registries, DpvMap) {
    let regs = load_registries(&fixture_registry_paths()).expect("fixture registries load");
    let dpv = load_dpv_map(Some(&registry_path("dpv.json")), &regs).expect("fixture DPV map loads");
    (regs, dpv)
}

/// Registries matching the random program generator.
pub fn generator_registries() -> Registries {
    let t = |name: &str, text: &str| (name.to_string(), text.to_string());
    parse_registries(&RegistryTexts {
        sources: t("gen-sources", gen::GEN_SOURCES),
        sinks: t("gen-sinks", gen::GEN_SINKS),
        sanitizers: t("gen-sanitizers", gen::GEN_SANITIZERS),
        lexicon: t("gen-lexicon", gen::GEN_LEXICON),
    })
    .expect("generator registries parse")
}

pub fn load_app(name: &str) -> Program {
    let text = std::fs::read_to_string(app_path(name)).expect("fixture app exists");
    parse_program(&text).expect("fixture app parses")
}

pub fn analyze_app(name: &str) -> Analysis {
    let p = load_app(name);
    let (regs, dpv) = fixture_registries();
    analyze(&Inputs {
        program: &p,
        registries: &regs,
        dpv: &dpv,
        risk: &RiskConfig::default(),
    })
    .expect("fixture analysis succeeds")
}

/// The golden corpus, by file stem.
pub const GOLDEN_APPS: &[&str] = &[
    "a_raw_email",
    "b_branch_pseudonymized",
    "b_prime_all_pseudonymized",
    "field_mediated",
    "interprocedural",
    "multi_sink",
    "unused_source",
    "log_and_storage",
    "virtual_dispatch",
    "return_values",
    "loop_accumulate",
    "no_personal_data",
    "password_overwritten",
];

pub fn golden_path(name: &str) -> PathBuf {
    fixtures_dir().join("golden").join(format!("{name}.json"))
}

/// Compares each app's report with its golden file and returns the names
/// that differ. With `PDAUDIT_BLESS=1` the goldens are rewritten instead.
pub fn golden_mismatches() -> Vec<String> {
    let bless = std::env::var_os("PDAUDIT_BLESS").is_some();
    let mut bad = Vec::new();
    for name in GOLDEN_APPS {
        let json = analyze_app(name).json;
        let path = golden_path(name);
        if bless {
            std::fs::write(&path, &json).unwrap();
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(expected) if expected == json => {}
            _ => bad.push(name.to_string()),
        }
    }
    bad
}
