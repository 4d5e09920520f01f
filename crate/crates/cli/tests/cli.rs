use proptest::prelude::*;
use recipro::catalog;
use recipro::system::systems_equivalent;
use recipro_cli::dsl::{parse_document, render, DslError, Pos};
use recipro_cli::model::Model;
use std::path::PathBuf;
use std::process::{Command, Output};

fn rcp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("rcp").join(name)
}

fn model(name: &str) -> Model {
    let text = std::fs::read_to_string(rcp(name)).unwrap();
    Model::build(&parse_document(&text).unwrap()).unwrap()
}

fn recipro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recipro")).args(args).env("RECIPRO_SEED", "7").output().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn shipped_file_matches_catalog() {
    let m = model("chh1.rcp");
    let sys = &m.systems[0];
    let rep = systems_equivalent(sys, &catalog::chh(1).unwrap()).unwrap();
    assert!(rep.holds(), "{:?}", rep);
    let out = m.transforms[0].transform.apply(&m.transforms[0].source).unwrap();
    assert!(systems_equivalent(&out, &catalog::chh_transformed(1).unwrap()).unwrap().holds());
}

#[test]
fn shipped_files_render_round_trip() {
    for f in ["chh1.rcp", "chh1-lax.rcp"] {
        let doc = parse_document(&std::fs::read_to_string(rcp(f)).unwrap()).unwrap();
        let again = parse_document(&render(&doc)).unwrap();
        assert_eq!(doc, again, "{}", f);
    }
}

#[test]
fn empty_and_comment_only_files() {
    assert!(parse_document("").unwrap().is_empty());
    assert!(parse_document("# nothing here\n\n").unwrap().is_empty());
}

#[test]
fn dangling_operator_is_located() {
    let src = "space { indep: x, t; dep: u, v; order: 3 }\nsystem s {\n  eq: u_x + = v;\n}\n";
    match &parse_document(src).unwrap_err()[0] {
        DslError::Syntax { pos, .. } => assert_eq!(*pos, Pos { line: 3, col: 11 }),
        other => panic!("{:?}", other),
    }
    let src = "space { indep: x; dep: u; order: 3 }\nsystem s { eq: u = u_x *; }\n";
    match &parse_document(src).unwrap_err()[0] {
        DslError::Syntax { pos, message } => {
            assert_eq!(*pos, Pos { line: 2, col: 24 });
            assert!(message.contains('*'), "{}", message);
        }
        other => panic!("{:?}", other),
    }
}

#[test]
fn scenario_chh_to_cbs_level_two() {
    let o = recipro(&["scenario", "chh-to-cbs", "--n", "2", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    let cbs: Vec<&serde_json::Value> = v["reports"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("cbs/"))
        .collect();
    assert_eq!(cbs.len(), 2);
    assert!(cbs.iter().all(|c| c["residual"] == "0" && c["holds"] == true));
}

#[test]
fn miura_level_one() {
    assert_eq!(recipro(&["miura", "--n", "1"]).status.code(), Some(0));
}

#[test]
fn broken_constraint_fails() {
    let o = recipro(&["lax-check", "chh", "--n", "1", "--break-constraint"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check-failed"));
}

#[test]
fn file_commands_hold() {
    let f = rcp("chh1.rcp");
    let f = f.to_str().unwrap();
    for cmd in ["verify-conserved", "verify-closed", "apply", "round-trip", "potentialize", "scenario"] {
        let o = recipro(&[cmd, f]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", cmd, String::from_utf8_lossy(&o.stdout));
    }
    let o = recipro(&["lax-check", rcp("chh1-lax.rcp").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn input_errors_are_reported() {
    let dir = std::env::temp_dir().join(format!("recipro-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.rcp");
    std::fs::write(&bad, "space { indep: x; dep: u; order: 2 }\nconserved { A: u on x; B: u on y }\n").unwrap();
    let o = recipro(&["verify-conserved", bad.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["error"]["kind"], "unknown-name");
    assert_eq!(v["error"]["line"], 2);
    assert!(!o.stderr.is_empty());
    let o = recipro(&["apply", "nowhere"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[input]"));
    let o = recipro(&["scenario", "no-such-scenario"]);
    assert_eq!(o.status.code(), Some(2));
    let o = recipro(&["miura", "--n", "9"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exhausted_budget_exits_three() {
    let o = recipro(&["scenario", "lax-chh", "--budget", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[budget]"));
}

#[test]
fn tex_output_is_written() {
    let path = std::env::temp_dir().join(format!("recipro-{}.tex", std::process::id()));
    let o = recipro(&["verify-closed", "mchh", "--tex", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let tex = std::fs::read_to_string(&path).unwrap();
    assert!(tex.contains("\\begin{itemize}"));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn scenario_order_does_not_depend_on_jobs() {
    let names = |jobs: &str| -> Vec<String> {
        let o = recipro(&["scenario", "all", "--json", "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0));
        json(&o)["reports"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap().to_string()).collect()
    };
    let one = names("1");
    assert_eq!(one.len(), recipro::catalog::scenarios::SCENARIOS.len());
    assert_eq!(one, names("3"));
}

const ATOMS: &[&str] = &["u", "v", "u_x", "v_t", "u_{x t}", "k", "x", "2", "1/3"];

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop::sample::select(ATOMS).prop_map(|s| s.to_string());
    leaf.prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), prop::sample::select(&["+", "-", "*", "/"][..]), inner).prop_map(|(a, op, b)| {
            if op == "/" {
                format!("({})/({} + 3)", a, b.replace('-', "+"))
            } else {
                format!("({}) {} ({})", a, op, b)
            }
        })
    })
}

fn document() -> impl Strategy<Value = String> {
    (prop::collection::vec((expr(), expr()), 1..4), expr(), expr(), any::<bool>()).prop_map(|(eqs, a, b, with_scenario)| {
        let mut s = String::from("space { indep: x, t; dep: u, v; params: k; order: 4 }\nsystem s {\n");
        for (i, (l, r)) in eqs.iter().enumerate() {
            if i % 2 == 0 {
                s.push_str(&format!("  eq: {} = {};\n", l, r));
            } else {
                s.push_str(&format!("  aux e{}: {} = {};\n", i, l, r));
            }
        }
        s.push_str("}\n");
        s.push_str(&format!("conserved {{ A: u + {} on t; B: v - {} on x; in: s }}\n", a, b));
        s.push_str(&format!("form f {{ target: w; x: u + {}; t: v; in: s }}\n", a));
        s.push_str("transform { pivot: x; via: f; field: x }\n");
        if with_scenario {
            s.push_str("scenario { run: miura; n: 2 }\n");
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn render_then_parse_is_identity(src in document()) {
        let doc = parse_document(&src).map_err(|e| TestCaseError::fail(format!("{:?}\n{}", e, src)))?;
        let text = render(&doc);
        let again = parse_document(&text).map_err(|e| TestCaseError::fail(format!("{:?}\n{}", e, text)))?;
        prop_assert_eq!(doc, again);
    }
}
