use std::path::PathBuf;
use std::process::Command;

use concordance_cli::{exit, parse_expr, run, CliError, GroupJson, Options, Query, Verb};
use concordance_core::abelian::FgAbGroup;
use concordance_core::engine::EngineError;
use concordance_core::knowledge::{default_document, BlockId};

fn g(s: &str) -> FgAbGroup {
    s.parse().unwrap()
}

fn temp_kb(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("concordance-{}-{name}.toml", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn parses_expressions() {
    let e = parse_expr("3*CP5").unwrap();
    assert_eq!(e.summands(), &[(BlockId::cp(5), 3)]);
    assert_eq!(e.dimension(), 10);
    let e = parse_expr(" 2 * CP6 #3*HP3 ").unwrap();
    assert_eq!(e.dimension(), 12);
    assert_eq!(e.to_string(), "2*CP6 # 3*HP3");
    assert_eq!(parse_expr("SxS5 # CP5").unwrap().to_string(), "CP5 # SxS5");
    assert_eq!(parse_expr("OP1 # S8").unwrap().to_string(), "2*S8");
}

#[test]
fn parse_errors_carry_positions() {
    match parse_expr("CP4 # HP3") {
        Err(CliError::Expression(EngineError::DimensionMismatch { blocks })) => {
            assert_eq!(blocks, vec![(BlockId::cp(4), 8), (BlockId::hp(3), 12)]);
        }
        other => panic!("{other:?}"),
    }
    let cases = [
        ("3CP5", 2),
        ("CP5 #", 6),
        ("CP5 # XP5", 7),
        ("2*", 3),
        ("CP5 CP5", 5),
        ("OP3", 1),
    ];
    for (text, position) in cases {
        match parse_expr(text) {
            Err(CliError::Syntax { position: p, .. }) => assert_eq!(p, position, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(
        parse_expr(""),
        Err(CliError::Syntax { position: 1, .. })
    ));
}

#[test]
fn text_outputs() {
    let out = run(&Query::new(Verb::Compute, &["3*CP5"]));
    assert_eq!(out.status, exit::OK);
    assert_eq!(out.stdout, "Z2^4 (+) Z3\n");
    let out = run(&Query::new(Verb::Inertia, &["5*CP6 # 2*HP3"]));
    assert_eq!(out.stdout, "0 (trivial)\n");
    let out = run(&Query::new(Verb::HInertia, &["5*CP6 # 2*HP3"]));
    assert_eq!(out.stdout, "0 (trivial)\n");
    let out = run(&Query::new(Verb::Compute, &["2*OP2"]));
    assert_eq!(out.status, exit::OK);
    assert!(out
        .stdout
        .starts_with("candidates: {Z2^3, Z4 (+) Z2} — extension not determined\n"));
    let out = run(&Query::new(Verb::Simplify, &["CP4 # 3*HP2"]));
    assert_eq!(out.stdout, "CP4\n");
    let out = run(&Query::new(Verb::Collapse, &["CP6", "2*HP3"]));
    assert_eq!(out.stdout, "C(CP6) -> C(CP6 # 2*HP3) is injective\n");
    let out = run(&Query::new(Verb::Ses, &["2*CP8"]));
    assert_eq!(
        out.stdout,
        "0 -> Z2 -> C(2*CP8) -> Z2^3 -> 0\nmiddle: candidates: {Z2^4, Z4 (+) Z2^2} — extension not determined\n"
    );
}

#[test]
fn traces_are_numbered_with_citations() {
    let out = run(&Query::new(Verb::Compute, &["2*CP7"]).trace());
    let (answer, trace) = out.stdout.split_once("trace:\n").unwrap();
    assert_eq!(answer, "Z2^3 (+) Z3\n");
    let lines: Vec<&str> = trace.lines().collect();
    assert!(lines.len() > 3);
    for (i, line) in lines.iter().enumerate() {
        assert!(line.starts_with(&format!("  {}. ", i + 1)), "{line}");
        assert!(line.ends_with(')'), "{line}");
    }
    assert!(trace.contains("quotient of Z2^4 at p=2"));
}

#[test]
fn json_groups_round_trip() {
    let out = run(&Query::new(Verb::Compute, &["3*CP6 # HP3"]).json().trace());
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["resolved"], true);
    let group: GroupJson = serde_json::from_value(v["candidates"][0].clone()).unwrap();
    assert_eq!(group.to_group().unwrap(), g("Z2^6+Z3^3"));
    assert_eq!(
        v["candidates"][0]["torsion"],
        serde_json::json!([2, 2, 2, 2, 2, 2, 3, 3, 3])
    );
    assert_eq!(
        v["candidates"][0]["invariant_factors"],
        serde_json::json!([6, 6, 6, 2, 2, 2])
    );
    for step in v["trace"].as_array().unwrap() {
        let obj = step.as_object().unwrap();
        assert_eq!(obj.len(), 3);
        for key in ["rule", "cite", "output"] {
            assert!(obj[key].is_string());
        }
    }
    for s in ["0", "Z2+Z3", "Z4+Z2^2+Z9", "Z^2+Z5"] {
        let json = GroupJson::from(&g(s));
        let text = serde_json::to_string(&json).unwrap();
        let back: GroupJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_group().unwrap(), g(s));
    }
    let z6 = GroupJson::from(&g("Z2+Z3"));
    assert_eq!(
        serde_json::to_value(&z6).unwrap(),
        serde_json::json!({"free_rank": 0, "torsion": [2, 3], "invariant_factors": [6]})
    );
}

#[test]
fn unresolved_json_lists_candidates() {
    let out = run(&Query::new(Verb::Compute, &["2*CP8 # HP4"]).json());
    assert_eq!(out.status, exit::OK);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["resolved"], false);
    assert_eq!(v["candidates"].as_array().unwrap().len(), 4);
    let ses = run(&Query::new(Verb::Ses, &["3*HP4"]).json());
    let v: serde_json::Value = serde_json::from_str(&ses.stdout).unwrap();
    assert_eq!(v["resolved"], false);
    assert_eq!(v["scenarios"][0]["middle"]["resolved"], false);
}

#[test]
fn output_is_deterministic() {
    for verb in [Verb::Compute, Verb::Ses] {
        let q = Query::new(verb, &["2*CP8 # HP4"]).json().trace();
        assert_eq!(run(&q), run(&q));
    }
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&Query::new(Verb::Compute, &["CP4 # HP3"])).status,
        exit::PARSE
    );
    assert_eq!(
        run(&Query::new(Verb::Compute, &["3*XP5"])).status,
        exit::PARSE
    );
    assert_eq!(
        run(&Query::new(Verb::Collapse, &["CP6"])).status,
        exit::PARSE
    );

    let missing = Query {
        options: Options {
            kb_path: Some(PathBuf::from("/nonexistent/kb.toml")),
            ..Options::default()
        },
        ..Query::new(Verb::Compute, &["CP5"])
    };
    let out = run(&missing);
    assert_eq!(out.status, exit::KNOWLEDGE);
    assert!(out.stderr.starts_with("error: "));
    assert!(out.stdout.is_empty());
    assert_eq!(
        run(&Query::new(Verb::Compute, &["SxS9"])).status,
        exit::KNOWLEDGE
    );

    let bounded = Query {
        options: Options {
            oracle_bound: Some(8),
            ..Options::default()
        },
        ..Query::new(Verb::Compute, &["3*CP5"])
    };
    assert_eq!(run(&bounded).status, exit::ORACLE_BOUND);

    let doc = default_document().replace("quotient_of(Z2^k+Z2+Z3)@2", "no_element_of_order(2)");
    let path = temp_kb("contradiction", &doc);
    let contradicted = Query {
        options: Options {
            kb_path: Some(path.clone()),
            ..Options::default()
        },
        ..Query::new(Verb::Compute, &["3*CP5"])
    };
    let out = run(&contradicted);
    std::fs::remove_file(path).unwrap();
    assert_eq!(out.status, exit::CONTRADICTION, "{}", out.stderr);

    assert_eq!(
        run(&Query::new(Verb::HInertia, &["CP5 # SxS5"])).status,
        exit::HYPOTHESIS
    );
}

#[test]
fn binary_end_to_end() {
    let bin = env!("CARGO_BIN_EXE_concordance");
    let out = Command::new(bin)
        .args(["compute", "3*CP5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "Z2^4 (+) Z3\n");

    let out = Command::new(bin)
        .args(["compute", "CP4 # HP3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(exit::PARSE));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("CP4 (dim 8), HP3 (dim 12)"));

    let path = temp_kb("binary", default_document());
    let out = Command::new(bin)
        .args(["inertia", "2*HP3 # CP6", "--json", "--kb"])
        .arg(&path)
        .output()
        .unwrap();
    std::fs::remove_file(path).unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["trivial"], true);

    let out = Command::new(bin)
        .args(["collapse", "CP6", "HP3", "--trace"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("trace:"));
}
