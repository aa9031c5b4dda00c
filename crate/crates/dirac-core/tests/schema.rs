//! The hand-written JSON schema must stay in step with the parameter types:
//! every estimate section lists exactly the serialized fields, with the
//! built-in defaults, and every shipped configuration loads and validates.

use std::collections::BTreeSet;
use std::path::PathBuf;

use dirac_core::config::RunConfig;
use dirac_core::registry::{resolve, IDS};
use serde_json::Value;

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn schema() -> Value {
    let text = std::fs::read_to_string(workspace_root().join("schema/run-config.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn def<'a>(schema: &'a Value, reference: &str) -> &'a Value {
    let name = reference.strip_prefix("#/$defs/").unwrap();
    &schema["$defs"][name]
}

fn check_section(schema: &Value, section: &str, defaults: &Value) {
    let reference = schema["properties"]["estimates"]["properties"][section]["$ref"].as_str().unwrap_or_else(|| panic!("{section} missing from schema"));
    let props = def(schema, reference)["properties"].as_object().unwrap();
    let defaults = defaults.as_object().unwrap();
    let schema_keys: BTreeSet<_> = props.keys().collect();
    let type_keys: BTreeSet<_> = defaults.keys().collect();
    assert_eq!(schema_keys, type_keys, "field mismatch in {section}");
    for (key, value) in defaults {
        if key == "base" {
            continue;
        }
        assert_eq!(&props[key]["default"], value, "default of {section}.{key}");
        assert!(props[key]["description"].as_str().is_some_and(|d| !d.is_empty()), "{section}.{key} is undocumented");
    }
}

#[test]
fn estimate_sections_match_the_parameter_types() {
    let schema = schema();
    let cfg = RunConfig::default();
    for id in IDS {
        if id == "scattering" {
            continue; // shares the small-data section
        }
        let resolved = serde_json::to_value(resolve(id, &cfg, None).unwrap()).unwrap();
        if id == "null-frame-norms" {
            check_section(&schema, "null-frame-norms", &resolved["norms"]);
            check_section(&schema, "null-fundamental", &resolved["fundamental"]);
        } else {
            check_section(&schema, id, &resolved);
        }
    }
}

#[test]
fn top_level_simulation_and_campaign_keys_match() {
    let schema = schema();
    let top: BTreeSet<_> = schema["properties"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(top, ["campaign", "estimates", "seed", "simulation"].map(String::from).into_iter().collect());
    let sim = std::fs::read_to_string(workspace_root().join("configs/simulate-thirring-2d.json")).unwrap();
    let cfg = RunConfig::from_json(&sim).unwrap();
    let value = serde_json::to_value(cfg.simulation.unwrap()).unwrap();
    let sim_keys: BTreeSet<_> = value.as_object().unwrap().keys().cloned().collect();
    let schema_sim: BTreeSet<_> = schema["$defs"]["SimulationConfig"]["properties"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(sim_keys, schema_sim);
    let campaign = RunConfig::from_json(r#"{"campaign": {"estimates": ["vp"]}}"#).unwrap().campaign.unwrap();
    let value = serde_json::to_value(campaign).unwrap();
    let keys: BTreeSet<_> = value.as_object().unwrap().keys().cloned().collect();
    let schema_keys: BTreeSet<_> = schema["$defs"]["CampaignConfig"]["properties"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, schema_keys);
}

#[test]
fn shipped_configs_load_and_validate() {
    let mut seen = 0;
    for entry in std::fs::read_dir(workspace_root().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
