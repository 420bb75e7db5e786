use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hermpert::alignment::{align, blockwise_diagonalize, m_matrix};
use hermpert::harness::worked_example::{example_a, example_f};
use hermpert::rayleigh::eigenvector_derivative;
use hermpert::text::{format_matrix, parse_matrix, parse_matrix_sequence};
use hermpert::{eigh_default, HermitianMatrix};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hermpert"))
}

fn write_tmp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hermpert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn write_matrix(name: &str, m: &HermitianMatrix) -> PathBuf {
    write_tmp(name, &format_matrix(m.as_dense()))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn eigh_prints_values_then_unitary() {
    let a = write_tmp("eigh_a", "2\n3 0.1\n0.1 1\n");
    let o = run(&["eigh", p(&a)]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    let l0: f64 = lines[0].parse().unwrap();
    let l1: f64 = lines[1].parse().unwrap();
    assert!((l0 - (2.0 + 1.01f64.sqrt())).abs() < 1e-14);
    assert!((l1 - (2.0 - 1.01f64.sqrt())).abs() < 1e-14);
    let u = parse_matrix(&lines[2..].join("\n")).unwrap();
    let h = HermitianMatrix::from_real_rows(&[&[3.0, 0.1], &[0.1, 1.0]]);
    assert_eq!(u, eigh_default(&h).unwrap().u);
}

#[test]
fn predict_orders() {
    let a = write_tmp("pred_a", "2\n3 0\n0 1\n");
    let e = write_tmp("pred_e", "2\n0 1\n1 0\n");
    let values = |order: &str| -> Vec<f64> {
        let o = run(&["predict", "--order", order, "--a", p(&a), "--e", p(&e), "--t", "0.1"]);
        assert!(o.status.success(), "{order}: {}", String::from_utf8_lossy(&o.stderr));
        stdout(&o).lines().take(2).map(|l| l.parse().unwrap()).collect()
    };
    assert_eq!(values("1"), vec![3.0, 1.0]);
    let exact = [2.0 + 1.01f64.sqrt(), 2.0 - 1.01f64.sqrt()];
    let second = values("2");
    assert!((second[0] - 3.005).abs() < 1e-14 && (second[1] - 0.995).abs() < 1e-14);
    for order in ["schur", "schur-simple"] {
        for (x, y) in values(order).iter().zip(&exact) {
            assert!((x - y).abs() < 2e-4, "{order}");
        }
    }
    // Order 2 also prints the first-order eigenvector matrix.
    let o = run(&["predict", "--order", "2", "--a", p(&a), "--e", p(&e), "--t", "0.1"]);
    let text = stdout(&o);
    let u_hat = parse_matrix(&text.lines().skip(2).collect::<Vec<_>>().join("\n")).unwrap();
    assert_eq!((u_hat.rows(), u_hat.cols()), (2, 2));
}

#[test]
fn derivative_matches_library() {
    let a = write_matrix("der_a", &example_a());
    let f = write_matrix("der_f", &example_f());
    let o = run(&["derivative", "--a", p(&a), "--f", p(&f)]);
    assert!(o.status.success());
    let ms = parse_matrix_sequence(&stdout(&o)).unwrap();
    assert_eq!(ms.len(), 3);
    let ap = blockwise_diagonalize(&align(&example_a(), &example_f()).unwrap()).unwrap();
    let m = m_matrix(&ap.base, &ap.blocks);
    assert_eq!(ms[1], m.hadamard(ap.e_hat.as_dense()));
    assert_eq!(ms[2], eigenvector_derivative(&ap, &m).unwrap());
    // U'(0) = U (N − M∘F̂).
    let rebuilt = &ap.base.u * &(&ms[0] - &ms[1]);
    assert!(rebuilt.max_abs_diff(&ms[2]) < 1e-14);
}

#[test]
fn converge_emits_deterministic_csv() {
    let args = [
        "converge", "--predictor", "first_order", "--seed", "11", "--n", "4", "--blocks", "2,1,1", "--trials", "3",
    ];
    let first = run(&args);
    assert!(first.status.success());
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "trial,t,error");
    assert_eq!(lines.len(), 1 + 3 * 5 + 1);
    let summary = lines.last().unwrap();
    assert!(summary.starts_with("# slope="));
    let slope: f64 = summary["# slope=".len()..].split(' ').next().unwrap().parse().unwrap();
    assert!(slope >= 1.9, "{slope}");
    assert_eq!(run(&args).stdout, first.stdout);

    let custom = run(&[
        "converge", "--predictor", "schur_full", "--seed", "11", "--n", "3", "--blocks", "2,1", "--trials", "1",
        "--tgrid", "0.1,0.01,0.001",
    ]);
    assert!(custom.status.success());
    assert_eq!(stdout(&custom).lines().count(), 1 + 3 + 1);
}

#[test]
fn worked_example_subcommand_passes() {
    let o = run(&["paper-example"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);
    assert!(!text.contains("FAIL"));
}

#[test]
fn exit_codes() {
    // Usage errors.
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["predict", "--order", "3"]).status.code(), Some(2));
    assert_eq!(
        run(&["converge", "--predictor", "nope", "--seed", "1", "--n", "2", "--blocks", "1,1", "--trials", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["converge", "--predictor", "first_order", "--seed", "1", "--n", "3", "--blocks", "1,1", "--trials", "1"])
            .status
            .code(),
        Some(2)
    );
    // Input errors.
    assert_eq!(run(&["eigh", "/nonexistent/matrix"]).status.code(), Some(2));
    let bad = write_tmp("bad", "2\n1 2\n3 x\n");
    let o = run(&["eigh", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3, column 3"));
    let skew = write_tmp("skew", "1\n0+1i\n");
    assert_eq!(run(&["eigh", p(&skew)]).status.code(), Some(2));

    // Numerical preconditions.
    let a = write_tmp("gap_a", "2\n3 0\n0 1\n");
    let e = write_tmp("gap_e", "2\n0 1\n1 0\n");
    let o = run(&["predict", "--order", "schur", "--a", p(&a), "--e", p(&e), "--t", "1.5"]);
    assert_eq!(o.status.code(), Some(3));
    let ident = write_tmp("ident", "2\n1 0\n0 1\n");
    assert_eq!(run(&["derivative", "--a", p(&ident), "--f", p(&ident)]).status.code(), Some(3));

    // Study failure: every error sits below the noise floor.
    let o = run(&[
        "converge", "--predictor", "first_order", "--seed", "1", "--n", "2", "--blocks", "1,1", "--trials", "1",
        "--tgrid", "1e-7,1e-8,1e-9",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}
