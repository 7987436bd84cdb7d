use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;
use pathsim_cli::schema::{Basis, Cx, DenseMethod, KetSpec, LowRankTerm, SumTerm};
use pathsim_cli::{build_circuit, load_circuit, parse_circuit, run, CircuitFile, Cli, CliError, OpSpec, StateSpec};
use proptest::prelude::*;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn pathsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathsim")).args(args).output().unwrap()
}

fn run_args(args: &[&str]) -> Result<Value, CliError> {
    let mut full = vec!["pathsim"];
    full.extend_from_slice(args);
    run(Cli::try_parse_from(full).unwrap()).map(|out| serde_json::from_str(&out).unwrap())
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pathsim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const FIXTURES: [&str; 11] = [
    "h_measure.json",
    "grover_oracle_3q.json",
    "fourier_uniform.json",
    "permutation.json",
    "haar5.json",
    "grover16.json",
    "density_file.json",
    "low_rank.json",
    "composite.json",
    "shor_fourier4.json",
    "shor_haar4.json",
];

#[test]
fn fixtures_parse_build_and_round_trip() {
    for name in FIXTURES {
        let file = load_circuit(&fixture(name)).unwrap();
        build_circuit(&file, &fixture("")).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_circuit(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(again, file, "{name}");
    }
}

#[test]
fn p_defaults_to_two_and_accepts_inf() {
    let text = r#"{"schema_version":1,"n_levels":[2],"state":{"type":"basis","index":0},"measurement":{"type":"identity","dim":2}}"#;
    let file = parse_circuit(text).unwrap();
    assert_eq!(file.p, 2.0);
    assert!(file.ops.is_empty());
    let inf = parse_circuit(&text.replace("\"n_levels\"", "\"p\":\"inf\",\"n_levels\"")).unwrap();
    assert_eq!(inf.p, f64::INFINITY);
    assert_eq!(parse_circuit(&serde_json::to_string(&inf).unwrap()).unwrap(), inf);
    assert!(parse_circuit(&text.replace("\"n_levels\"", "\"p\":\"big\",\"n_levels\"")).is_err());
}

#[test]
fn unknown_fields_are_rejected() {
    let base = std::fs::read_to_string(fixture("h_measure.json")).unwrap();
    let top = base.replacen("\"schema_version\"", "\"colour\": 1, \"schema_version\"", 1);
    let nested = base.replace("\"n_qubits\": 1", "\"n_qubits\": 1, \"qubits\": 1");
    let state = base.replace("\"index\": 0", "\"index\": 0, \"phase\": 0");
    let tag = base.replace("\"hadamard\"", "\"walsh\"");
    for text in [top, nested, state, tag] {
        assert!(matches!(parse_circuit(&text), Err(CliError::Schema(_))), "{text}");
    }
}

#[test]
fn schema_version_mismatch_is_a_hard_error() {
    let text = std::fs::read_to_string(fixture("h_measure.json"))
        .unwrap()
        .replace("\"schema_version\": 1", "\"schema_version\": 2");
    let err = parse_circuit(&text).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let path = temp_file("v2.json", &text);
    let out = pathsim(&["estimate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));
    assert!(out.stdout.is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(pathsim(&["exact", "/nonexistent/circuit.json"]).status.code(), Some(2));
    assert_eq!(pathsim(&["estimate"]).status.code(), Some(2));

    let bad_perm = std::fs::read_to_string(fixture("permutation.json")).unwrap().replace(
        "\"perm\": [\n        2,\n        0,\n        3,\n        1\n      ]",
        "\"perm\": [0, 0, 1, 2]",
    );
    assert!(bad_perm.contains("[0, 0, 1, 2]"));
    let path = temp_file("bad_perm.json", &bad_perm);
    let out = pathsim(&["exact", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("construction error"));

    let mismatch = std::fs::read_to_string(fixture("h_measure.json")).unwrap().replace("\"n_qubits\": 1", "\"n_qubits\": 2");
    let path = temp_file("mismatch.json", &mismatch);
    assert_eq!(pathsim(&["estimate", path.to_str().unwrap()]).status.code(), Some(3));

    let ok = pathsim(&["samples", "--epsilon", "0.05", "--delta", "0.01", "--b", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "9587");
}

#[test]
fn estimate_h_then_measure() {
    let path = fixture("h_measure.json");
    let v = run_args(&["estimate", path.to_str().unwrap(), "--seed", "3"]).unwrap();
    assert!((f(&v["estimate_re"]) - 0.5).abs() <= 0.05);
    assert_eq!(v["K"], 38346);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["method"], "markov");
    assert!(v["elapsed_s"].is_null());
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut want = ["estimate_re", "estimate_im", "K", "b", "epsilon", "delta", "seed", "workers", "elapsed_s", "method"];
    want.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, want);

    let timed = run_args(&["estimate", path.to_str().unwrap(), "--timing"]).unwrap();
    assert!(f(&timed["elapsed_s"]) >= 0.0);
}

#[test]
fn estimate_is_byte_identical_across_runs() {
    let path = fixture("grover_oracle_3q.json");
    let args = ["estimate", path.to_str().unwrap(), "--epsilon", "0.1", "--seed", "17", "--workers", "3"];
    let (a, b) = (pathsim(&args), pathsim(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = pathsim(&["estimate", path.to_str().unwrap(), "--epsilon", "0.1", "--seed", "18", "--workers", "3"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn estimate_agrees_with_exact() {
    for name in ["grover_oracle_3q.json", "density_file.json", "low_rank.json", "composite.json", "permutation.json"] {
        let path = fixture(name);
        let exact = run_args(&["exact", path.to_str().unwrap()]).unwrap();
        let est = run_args(&["estimate", path.to_str().unwrap(), "--seed", "5"]).unwrap();
        let (re, im) = (f(&exact["expectation"][0]), f(&exact["expectation"][1]));
        let err = (f(&est["estimate_re"]) - re).hypot(f(&est["estimate_im"]) - im);
        assert!(err <= 0.05, "{name}: error {err}");
    }
}

#[test]
fn amplitude_method() {
    let path = fixture("composite.json");
    let v = run_args(&["estimate", path.to_str().unwrap(), "--method", "amplitude", "--seed", "2"]).unwrap();
    assert_eq!(v["method"], "amplitude");
    let file = load_circuit(&path).unwrap();
    let circuit = build_circuit(&file, &fixture("")).unwrap();
    let mut amps: Vec<pathsim::C64> = vec![pathsim::C64::new(0.5, 0.0); 4];
    for u in circuit.unitaries() {
        amps = u.to_dense().unwrap().mul_vec(&amps).unwrap();
    }
    let want = amps[0];
    let err = (f(&v["estimate_re"]) - want.re).hypot(f(&v["estimate_im"]) - want.im);
    assert!(err <= 0.05, "{want} vs {v}");
    assert!((f(&v["abs_sq"]) - want.norm_sqr()).abs() <= f(&v["abs_sq_bound"]));

    let rejected = run_args(&["estimate", fixture("density_file.json").to_str().unwrap(), "--method", "amplitude"]);
    assert!(matches!(rejected, Err(CliError::Schema(_))));
}

#[test]
fn exact_examples() {
    let v = run_args(&["exact", fixture("fourier_uniform.json").to_str().unwrap()]).unwrap();
    assert!((f(&v["interference"]) - 8.0).abs() <= 1e-9);
    assert!((f(&v["expectation"][0]) - 1.0).abs() <= 1e-12);
    let v = run_args(&["exact", fixture("permutation.json").to_str().unwrap()]).unwrap();
    assert!((f(&v["interference_state"]) - 1.0).abs() <= 1e-12);
}

#[test]
fn exact_interference_equals_expectation_for_classical_circuits() {
    let text = r#"{"schema_version":1,"n_levels":[2,2],"state":{"type":"basis","index":1},
        "ops":[{"type":"permutation","perm":[3,0,1,2]},{"type":"pauli","string":"XX"}],
        "measurement":{"type":"diagonal","phases":[[1,0],[1,0],[1,0],[1,0]]}}"#;
    let path = temp_file("classical.json", text);
    let v = run_args(&["exact", path.to_str().unwrap()]).unwrap();
    assert!((f(&v["interference"]) - f(&v["expectation"][0])).abs() <= 1e-12);
    assert!((f(&v["interference"]) - 1.0).abs() <= 1e-12);
}

#[test]
fn imax_examples() {
    let v = run_args(&["imax", fixture("haar5.json").to_str().unwrap()]).unwrap();
    assert!((f(&v[0]["imax_exact"]) - 6f64.sqrt()).abs() <= 1e-9);
    assert_eq!(v[1]["kind"], "permutation");
    assert_eq!(f(&v[1]["imax_exact"]), 1.0);
    assert_eq!(f(&v[1]["mana"]), 0.0);
    assert_eq!(v[2]["position"], "measurement");

    let v = run_args(&["imax", "--op", r#"{"type":"grover","n_qubits":4}"#]).unwrap();
    assert!((f(&v[0]["imax_exact"]) - 2.75).abs() <= 1e-9);
    assert_eq!(f(&v[0]["b_constructed"]), 3.0);

    let v = run_args(&["imax", "--op", r#"{"type":"dense","matrix":[[[0.7,0],[0.4,0]],[[0.3,0],[0.6,0]]]}"#, "--p", "inf"])
        .unwrap();
    assert_eq!(f(&v[0]["mana"]), 0.0);
    assert!(matches!(run_args(&["imax", "--op", r#"{"type":"grover"}"#]), Err(CliError::Schema(_))));
}

fn cx() -> impl Strategy<Value = Cx> {
    [-10.0f64..10.0, -10.0f64..10.0]
}

fn ket() -> impl Strategy<Value = KetSpec> {
    prop_oneof![
        (0usize..8).prop_map(|index| KetSpec::Basis { index }),
        prop::collection::vec(prop::collection::vec(cx(), 1..3), 1..3).prop_map(|factors| KetSpec::Product { factors }),
        prop::collection::vec(-4.0f64..4.0, 1..5).prop_map(|thetas| KetSpec::Phase { thetas }),
        Just(KetSpec::Uniform {}),
        prop::collection::vec(cx(), 1..5).prop_map(|amplitudes| KetSpec::Vector { amplitudes }),
    ]
}

fn state() -> impl Strategy<Value = StateSpec> {
    let matrix = prop::collection::vec(prop::collection::vec(cx(), 2), 2);
    prop_oneof![
        ket().prop_map(|k| match k {
            KetSpec::Basis { index } => StateSpec::Basis { index },
            KetSpec::Product { factors } => StateSpec::Product { factors },
            KetSpec::Phase { thetas } => StateSpec::Phase { thetas },
            KetSpec::Uniform {} => StateSpec::Uniform {},
            KetSpec::Vector { amplitudes } => StateSpec::Vector { amplitudes },
        }),
        (ket(), ket()).prop_map(|(ket, bra)| StateSpec::Dyad { ket, bra }),
        matrix.prop_map(|matrix| StateSpec::Density { matrix }),
        "[a-z]{1,8}\\.json".prop_map(|path| StateSpec::DensityFile { path }),
        prop::collection::vec(
            (cx(), prop::collection::vec(cx(), 2), prop::collection::vec(cx(), 2)).prop_map(|(s, u, v)| LowRankTerm { s, u, v }),
            1..3
        )
        .prop_map(|terms| StateSpec::LowRank { terms }),
    ]
}

fn op_spec() -> impl Strategy<Value = OpSpec> {
    let leaf = prop_oneof![
        (prop::collection::vec(prop::collection::vec(cx(), 2), 2), prop::bool::ANY).prop_map(|(matrix, rowcol)| {
            OpSpec::Dense { matrix, method: if rowcol { DenseMethod::Rowcol } else { DenseMethod::Optimal } }
        }),
        prop::collection::vec((0usize..4, 0usize..4, cx()), 0..5).prop_map(|entries| OpSpec::Sparse { rows: 4, cols: 4, entries }),
        (1usize..9).prop_map(|dim| OpSpec::Identity { dim }),
        (Just(vec![1usize, 0, 2]).prop_shuffle(), prop::option::of(prop::collection::vec(cx(), 3)))
            .prop_map(|(perm, phases)| OpSpec::Permutation { perm, phases }),
        prop::collection::vec(cx(), 1..4).prop_map(|phases| OpSpec::Diagonal { phases }),
        "[IXYZ]{1,4}".prop_map(|string| OpSpec::Pauli { string }),
        (1usize..4).prop_map(|n_qubits| OpSpec::Hadamard { n_qubits }),
        (1usize..9).prop_map(|dim| OpSpec::Fourier { dim }),
        (1usize..4).prop_map(|n_qubits| OpSpec::Grover { n_qubits }),
        (1usize..4).prop_map(|n_qubits| OpSpec::Haar { n_qubits }),
        (prop::collection::vec(0usize..3, 1..5), 1usize..4).prop_map(|(table, y_dim)| OpSpec::Oracle { table, y_dim }),
        (prop::collection::vec(0usize..2, 1..5), prop::bool::ANY).prop_map(|(table, h)| OpSpec::ProjectorFamily {
            table,
            target_dim: 2,
            basis: if h { Basis::Hadamard } else { Basis::Fourier },
        }),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (cx(), inner.clone()).prop_map(|(coeff, op)| OpSpec::Scale { coeff, op: Box::new(op) }),
            inner.clone().prop_map(|op| OpSpec::Adjoint { op: Box::new(op) }),
            inner.clone().prop_map(|op| OpSpec::Transpose { op: Box::new(op) }),
            (prop::collection::vec((cx(), inner.clone()).prop_map(|(coeff, op)| SumTerm { coeff, op }), 1..3), prop::option::of(prop::collection::vec(0.0f64..1.0, 2)))
                .prop_map(|(terms, weights)| OpSpec::Sum { terms, weights }),
            prop::collection::vec(inner.clone(), 1..3).prop_map(|factors| OpSpec::Product { factors }),
            inner.clone().prop_map(|op| OpSpec::Exp { op: Box::new(op) }),
            prop::collection::vec(inner.clone(), 1..3).prop_map(|family| OpSpec::Controlled { family }),
            (inner, 1usize..3, 1usize..3).prop_map(|(op, left, right)| OpSpec::TensorEmbed { op: Box::new(op), left, right }),
        ]
    })
}

fn circuit_file() -> impl Strategy<Value = CircuitFile> {
    (
        prop::collection::vec(1usize..4, 1..4),
        prop_oneof![Just(2.0), Just(f64::INFINITY), 1.0f64..6.0],
        state(),
        prop::collection::vec(op_spec(), 0..3),
        op_spec(),
    )
        .prop_map(|(n_levels, p, state, ops, measurement)| CircuitFile {
            schema_version: 1,
            n_levels,
            p,
            state,
            ops,
            measurement,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_serialize_parse_is_identity(file in circuit_file()) {
        let text = serde_json::to_string_pretty(&file).unwrap();
        let parsed = parse_circuit(&text).unwrap();
        prop_assert_eq!(&parsed, &file);
        let again = parse_circuit(&serde_json::to_string(&parsed).unwrap()).unwrap();
        prop_assert_eq!(again, parsed);
    }
}
