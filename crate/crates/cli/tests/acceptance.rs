//! Acceptance gate for the command-line contract: documents re-execute from
//! their own echo to 1e-12, and exit codes follow the documented classes.

use std::process::{Command, Output};

use susyqm_cli::{documents_agree, run_job, ResultDocument};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_susyqm"))
}

fn run(args: &[&str]) -> Output {
    binary()
        .args(args)
        .output()
        .expect("failed to launch the susyqm binary")
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[{}] acceptance {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {criterion}: {detail}");
}

#[test]
fn criterion_11a_document_roundtrip() {
    let out = run(&[
        "spectrum",
        "--family",
        "hermite-odd",
        "--k",
        "1",
        "--epsilon",
        "3",
        "--L",
        "10",
        "--N",
        "1001",
        "--levels",
        "4",
    ]);
    assert!(out.status.success(), "spectrum run failed: {out:?}");
    let doc1: ResultDocument =
        serde_json::from_slice(&out.stdout).expect("stdout is a result document");
    // re-execute from the config echo alone
    let doc2 = run_job(&doc1.config).expect("echo re-execution");
    let agreement = documents_agree(&doc1, &doc2, 1e-12);
    report(
        "11a (result-document round-trip at 1e-12)",
        agreement.is_ok(),
        &format!("{agreement:?}"),
    );
}

#[test]
fn criterion_11b_exit_code_contract() {
    let mut pass = true;
    let mut detail = String::new();

    // success path: exit 0
    let ok = run(&[
        "validate",
        "--family",
        "hermite-odd",
        "--k",
        "2",
        "--epsilon",
        "1.7",
        "--L",
        "10",
        "--N",
        "1001",
    ]);
    pass &= ok.status.code() == Some(0);
    detail.push_str(&format!("clean validate -> {:?}; ", ok.status.code()));

    // canned failure 1: invalid parameters -> usage error, exit 2
    let usage = run(&[
        "construct",
        "--family",
        "hermite-ratio",
        "--k",
        "1",
        "--m",
        "2",
    ]);
    pass &= usage.status.code() == Some(2);
    let err: serde_json::Value =
        serde_json::from_slice(&usage.stderr).expect("stderr carries an error object");
    pass &= err["error"]["kind"] == "usage";
    detail.push_str(&format!(
        "k<m -> {:?} kind={}; ",
        usage.status.code(),
        err["error"]["kind"]
    ));

    // canned failure 2: perturbed partner -> validation failure, exit 1
    let validation = run(&[
        "validate",
        "--family",
        "hermite-odd",
        "--k",
        "1",
        "--epsilon",
        "2",
        "--L",
        "10",
        "--N",
        "1001",
        "--perturb-w1",
        "0.001",
    ]);
    pass &= validation.status.code() == Some(1);
    let doc: ResultDocument =
        serde_json::from_slice(&validation.stdout).expect("perturbed run still documents");
    pass &= !doc.all_passed;
    detail.push_str(&format!(
        "perturbed W1 -> {:?} all_passed={}; ",
        validation.status.code(),
        doc.all_passed
    ));

    // canned failure 3: grid far outside the finite range -> numerical, exit 3
    let numerical = run(&[
        "construct",
        "--family",
        "sinh",
        "--k",
        "3",
        "--alpha",
        "2.5",
        "--L",
        "200",
        "--N",
        "4001",
    ]);
    pass &= numerical.status.code() == Some(3);
    let err: serde_json::Value =
        serde_json::from_slice(&numerical.stderr).expect("stderr carries an error object");
    pass &= err["error"]["kind"] == "numerical";
    detail.push_str(&format!(
        "overflowing grid -> {:?} kind={}",
        numerical.status.code(),
        err["error"]["kind"]
    ));

    report(
        "11b (exit codes 0/1/2/3 on the canned cases)",
        pass,
        &detail,
    );
}

#[test]
fn export_grid_streams_csv() {
    let out = run(&[
        "export-grid",
        "--family",
        "monomial",
        "--epsilon",
        "2",
        "--L",
        "4",
        "--N",
        "101",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,V_minus,V_plus,W,W1,psi0,psi1");
    assert_eq!(text.lines().count(), 102);
    // the origin row of the harmonic construction: V- = -1, V+ = 1, psi0 = 1
    let origin = text
        .lines()
        .find(|l| l.starts_with("0,"))
        .expect("origin row present");
    assert_eq!(origin, "0,-1,1,0,0,1,0");
}

#[test]
fn export_grid_json_format_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.json");
    let out = run(&[
        "export-grid",
        "--family",
        "hermite-odd",
        "--k",
        "1",
        "--L",
        "6",
        "--N",
        "121",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let payload: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(payload["columns"][0], "x");
    assert_eq!(payload["rows"].as_array().unwrap().len(), 121);
    // the document on stdout references the export
    let doc: ResultDocument = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.grid_export.as_deref(), path.to_str());
}

#[test]
fn ces_workflow_over_rosen_morse() {
    // the sharp k=3 well needs the production resolution for the 1e-3 gate
    let out = run(&[
        "ces",
        "--base",
        "rosen-morse",
        "--alpha",
        "2.5",
        "--k",
        "3",
        "--L",
        "12",
        "--N",
        "4001",
        "--levels",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let doc: ResultDocument = serde_json::from_slice(&out.stdout).unwrap();
    let ces = doc.ces.expect("ces block");
    assert_eq!(ces.epsilon_k, 12.0);
    assert!(ces.two_route_residual.pass);
    assert!(ces.dual_involution.pass);
    assert!(ces.shape_invariance_base.pass && ces.shape_invariance_dual.pass);
    assert!(ces.w1_consistency.pass);
    let oracle = doc.oracle.expect("oracle block");
    assert!(oracle.chain_derived_tail);
    assert!(oracle.pass);
}

#[test]
fn spectrum_rejects_bad_grid_before_computing() {
    let out = run(&[
        "spectrum",
        "--family",
        "monomial",
        "--epsilon",
        "1",
        "--N",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
