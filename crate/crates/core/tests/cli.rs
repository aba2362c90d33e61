use fuzzy_alc::cli::{run, CommandResult};
use fuzzy_alc::kbio::{parse_interpretation, parse_kb};
use fuzzy_alc::semantics::check_kb;
use fuzzy_alc::OperatorFamily;
use serde_json::Value;

fn cli(args: &[&str]) -> CommandResult {
    run(std::iter::once("fuzzy-alc").chain(args.iter().copied()))
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn json(out: &CommandResult) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout))
}

#[test]
fn check_model_accepts_a_model_and_warns_about_unread_names() {
    let out = cli(&["check-model", "--kb", &fixture("k1.kb"), "--model", &fixture("k1_one_element.model"), "--family", "lukasiewicz"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.stdout.contains("satisfied under lukasiewicz"));
    assert!(out.stdout.contains("Hotel is not interpreted"));
}

#[test]
fn strict_check_is_an_input_error() {
    let out = cli(&["check-model", "--kb", &fixture("k1.kb"), "--model", &fixture("k1_one_element.model"), "--family", "zadeh", "--strict"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("Hotel"));
}

#[test]
fn sat_search_json_carries_a_checkable_model() {
    let out = cli(&["--json", "sat-search", "--kb", &fixture("k1.kb"), "--family", "lukasiewicz", "--max-size", "2", "--denominators", "1,2"]);
    assert_eq!(out.code, 0);
    let doc = json(&out);
    assert_eq!(doc["status"], "sat");
    assert_eq!(doc["exit_code"], 0);
    let kb = parse_kb(&std::fs::read_to_string(fixture("k1.kb")).unwrap()).unwrap();
    let model = parse_interpretation(doc["model"].as_str().unwrap()).unwrap();
    assert!(check_kb(&model, OperatorFamily::Lukasiewicz, &kb).unwrap().overall);
}

#[test]
fn bounded_unsat_exits_one_and_says_it_is_bounded() {
    let out = cli(&["sat-search", "--kb", &fixture("k2.kb"), "--family", "product", "--max-size", "2", "--denominators", "1,2"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("unsat within bounds"));
    assert!(out.stdout.contains("not a proof"));
}

#[test]
fn sat_search_writes_the_model_file() {
    let dir = std::env::temp_dir().join(format!("fuzzy-alc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("found.model");
    let p = path.to_str().unwrap();
    let out = cli(&["sat-search", "--kb", &fixture("k1.kb"), "--family", "godel", "--max-size", "1", "--denominators", "1", "--out", p]);
    assert_eq!(out.code, 0);
    let model = parse_interpretation(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let kb = parse_kb(&std::fs::read_to_string(fixture("k1.kb")).unwrap()).unwrap();
    assert!(check_kb(&model, OperatorFamily::Goedel, &kb).unwrap().overall);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn analyze_reports_cycles_with_exit_one() {
    let out = cli(&["analyze", "--kb", &fixture("k2.kb")]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("unfoldable: false"));
    assert!(out.stdout.contains("A uses A"));
    let k1 = cli(&["analyze", "--kb", &fixture("k1.kb")]);
    assert_eq!(k1.code, 1);
    assert!(k1.stdout.contains("acyclic: true"));
    assert!(k1.stdout.contains("sub-unit-degree"));
    let path = std::env::temp_dir().join(format!("fuzzy-alc-unfoldable-{}.kb", std::process::id()));
    std::fs::write(&path, "abox:\n  (a : A) >= 1/2\ntbox:\n  A == B and exists R . Top\n  (B sub Top) >= 1\n").unwrap();
    let out = cli(&["analyze", "--kb", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.code, 0, "{}", out.stdout);
}

#[test]
fn unfold_emits_a_tbox_free_kb() {
    let out = cli(&["unfold", "--kb", &fixture("k1.kb"), "--family", "lukasiewicz"]);
    assert_eq!(out.code, 0);
    let text = out.stdout.split("gadget:").next().unwrap();
    let kb = parse_kb(text).unwrap();
    assert!(kb.tbox.is_empty());
    assert_eq!(cli(&["unfold", "--kb", &fixture("k1.kb"), "--family", "godel"]).code, 1);
}

#[test]
fn fmp_commands_print_exact_values() {
    let out = cli(&["fmp", "eval", "--family", "lukasiewicz", "--concept", "A", "--node", "3"]);
    assert_eq!((out.code, out.stdout.trim()), (0, "7/8"));
    let out = cli(&["fmp", "forced-seq", "--family", "product", "-n", "4"]);
    assert_eq!(out.stdout.trim(), "2^(-1) 2^(-1/2) 2^(-1/4) 2^(-1/8)");
}

#[test]
fn input_errors_exit_two() {
    let missing = cli(&["analyze", "--kb", "no/such/file.kb"]);
    assert_eq!(missing.code, 2);
    assert!(missing.stderr.starts_with("error:"));
    let doc = json(&cli(&["--json", "analyze", "--kb", "no/such/file.kb"]));
    assert_eq!(doc["exit_code"], 2);
    assert_eq!(cli(&["bogus"]).code, 2);
    assert_eq!(cli(&["gadget", "--alpha", "3/2"]).code, 2);
}

#[test]
fn help_exits_zero() {
    let out = cli(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("sat-search"));
}
