//! Option-matrix cases shared by the golden test and the acceptance runner.
//!
//! Each case runs the real binary inside a scratch copy of `fixtures/` and
//! compares exit code, stdout and stderr (golden/<name>.txt) and, when the
//! case names one, the produced file (golden/<name>.out). Set
//! `UPDATE_GOLDEN=1` to rewrite the goldens.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    /// File the case writes, compared against golden/<name>.out.
    pub output: Option<&'static str>,
    pub code: i32,
}

const fn case(
    name: &'static str,
    args: &'static [&'static str],
    output: Option<&'static str>,
    code: i32,
) -> Case {
    Case {
        name,
        args,
        output,
        code,
    }
}

#[rustfmt::skip]
pub const CASES: &[Case] = &[
    // query
    case("query_ascii", &["query", "table.sdds"], None, 0),
    case("query_binary_big", &["query", "big.sdds"], None, 0),
    case("query_empty", &["query", "empty.sdds"], None, 0),
    case("query_stdin", &["query", "-"], None, 0),
    case("query_corrupt", &["query", "corrupt.sdds"], None, 1),
    case("query_missing_file", &["query", "nope.sdds"], None, 1),
    case("query_no_file", &["query"], None, 2),
    // print
    case("print_all", &["print", "table.sdds"], None, 0),
    case("print_columns_reordered", &["print", "table.sdds", "--columns", "y,x"], None, 0),
    case("print_page_2", &["print", "table.sdds", "--page", "2"], None, 0),
    case("print_columns_and_page", &["print", "big.sdds", "--columns", "name,tag", "--page", "1"], None, 0),
    case("print_page_out_of_range", &["print", "empty.sdds", "--page", "2"], None, 1),
    case("print_unknown_column", &["print", "table.sdds", "--columns", "x,q"], None, 1),
    case("print_bad_page_value", &["print", "table.sdds", "--page", "two"], None, 2),
    // convert
    case("convert_binary_little", &["convert", "table.sdds", "out.sdds", "--mode", "binary", "--endian", "little"], Some("out.sdds"), 0),
    case("convert_binary_big", &["convert", "table.sdds", "out.sdds", "--mode", "binary", "--endian", "big"], Some("out.sdds"), 0),
    case("convert_big_to_ascii", &["convert", "big.sdds", "out.sdds", "--mode", "ascii"], Some("out.sdds"), 0),
    case("convert_ascii_endian_recorded", &["convert", "table.sdds", "out.sdds", "--endian", "big"], Some("out.sdds"), 0),
    case("convert_canonical_to_stdout", &["convert", "table.sdds", "-"], None, 0),
    case("convert_binary_to_stdout", &["convert", "big.sdds", "-"], None, 2),
    case("convert_bad_mode", &["convert", "table.sdds", "out.sdds", "--mode", "text"], None, 2),
    // check
    case("check_valid_ascii", &["check", "table.sdds"], None, 0),
    case("check_valid_binary", &["check", "big.sdds"], None, 0),
    case("check_truncated", &["check", "truncated.sdds"], None, 1),
    case("check_duplicate_column", &["check", "dupe.sdds"], None, 1),
    case("check_corrupt_header", &["check", "corrupt.sdds"], None, 1),
    case("check_extra_arg", &["check", "table.sdds", "more.sdds"], None, 2),
    // filter
    case("filter_numeric", &["filter", "table.sdds", "out.sdds", "--where", "x > 0"], Some("out.sdds"), 0),
    case("filter_identity", &["filter", "table.sdds", "-", "--where", "1 == 1"], None, 0),
    case("filter_text_and_param", &["filter", "big.sdds", "out.sdds", "--where", "name == \"beta\" || (tag >= \"f\" && run == 2)"], Some("out.sdds"), 0),
    case("filter_syntax_error", &["filter", "table.sdds", "out.sdds", "--where", "x+"], None, 1),
    case("filter_not_logical", &["filter", "table.sdds", "out.sdds", "--where", "x * 2"], None, 1),
    case("filter_unknown_name", &["filter", "table.sdds", "out.sdds", "--where", "q > 1"], None, 1),
    case("filter_missing_where", &["filter", "table.sdds", "out.sdds"], None, 2),
    // derive
    case("derive_double", &["derive", "table.sdds", "-", "--column", "x2=x*2:double"], None, 0),
    case("derive_round_half_even", &["derive", "table.sdds", "out.sdds", "--column", "i=x:long"], Some("out.sdds"), 0),
    case("derive_chained_text", &["derive", "big.sdds", "out.sdds", "--column", "s=name:string", "--column", "t=tag:character", "--column", "d=y + run:short"], Some("out.sdds"), 0),
    case("derive_name_clash", &["derive", "table.sdds", "out.sdds", "--column", "x=1:long"], None, 1),
    case("derive_overflow", &["derive", "table.sdds", "out.sdds", "--column", "s=y * 10000:short"], None, 1),
    case("derive_type_mismatch", &["derive", "table.sdds", "out.sdds", "--column", "s=x:string"], None, 1),
    case("derive_bad_spec", &["derive", "table.sdds", "out.sdds", "--column", "x2"], None, 2),
    case("derive_bad_type", &["derive", "table.sdds", "out.sdds", "--column", "x2=x:real"], None, 2),
    // combine
    case("combine_two", &["combine", "out.sdds", "table.sdds", "other.sdds"], Some("out.sdds"), 0),
    case("combine_single", &["combine", "-", "big.sdds", "--mode", "ascii"], None, 0),
    case("combine_binary_big", &["combine", "out.sdds", "table.sdds", "big.sdds", "--mode", "binary", "--endian", "big"], Some("out.sdds"), 0),
    case("combine_units_mismatch", &["combine", "out.sdds", "table.sdds", "units.sdds"], None, 1),
    case("combine_schema_mismatch", &["combine", "out.sdds", "table.sdds", "grid.sdds"], None, 1),
    case("combine_no_inputs", &["combine", "out.sdds"], None, 2),
    // plot
    case("plot_scatter", &["plot", "table.sdds", "--x", "x", "--y", "y", "-o", "out.svg"], Some("out.svg"), 0),
    case("plot_lines_page", &["plot", "table.sdds", "--x", "y", "--y", "x", "--lines", "--page", "2", "-o", "out.svg"], Some("out.svg"), 0),
    case("plot_3d", &["plot", "grid.sdds", "--x", "u", "--y", "v", "--z", "w", "-o", "out.svg"], Some("out.svg"), 0),
    case("plot_to_stdout", &["plot", "grid.sdds", "--x", "u", "--y", "w", "-o", "-"], None, 0),
    case("plot_non_numeric", &["plot", "table.sdds", "--x", "x", "--y", "name", "-o", "out.svg"], None, 1),
    case("plot_missing_x", &["plot", "table.sdds", "--y", "y", "-o", "out.svg"], None, 2),
    case("plot_z_with_lines", &["plot", "grid.sdds", "--x", "u", "--y", "v", "--z", "w", "--lines", "-o", "out.svg"], None, 2),
    case("plot_empty", &["plot", "empty.sdds", "--x", "x", "--y", "x", "-o", "out.svg"], None, 1),
    // top level
    case("unknown_subcommand", &["frobnicate"], None, 2),
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn scratch_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().expect("temp dir");
    for entry in fs::read_dir(crate_dir().join("tests/fixtures")).expect("fixtures") {
        let entry = entry.expect("fixture entry");
        fs::copy(entry.path(), dir.path().join(entry.file_name())).expect("copy fixture");
    }
    dir
}

pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

/// Runs the binary with `args` in `dir`; stdin is `stdin_file` when given.
pub fn run_in(dir: &Path, args: &[&str], stdin_file: Option<&Path>) -> Outcome {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sdds"));
    cmd.args(args).current_dir(dir);
    if let Some(f) = stdin_file {
        cmd.stdin(fs::File::open(f).expect("stdin file"));
    }
    let out = cmd.output().expect("spawn sdds");
    Outcome {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: out.stderr,
    }
}

fn transcript(o: &Outcome) -> Vec<u8> {
    let mut t = format!("exit: {}\n--- stdout\n", o.code).into_bytes();
    t.extend_from_slice(&o.stdout);
    t.extend_from_slice(b"--- stderr\n");
    t.extend_from_slice(&o.stderr);
    t
}

fn compare(path: &Path, actual: &[u8], update: bool) -> Result<(), String> {
    if update {
        fs::write(path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!(
            "{} differs\n--- expected\n{}\n--- actual\n{}",
            path.display(),
            String::from_utf8_lossy(&expected),
            String::from_utf8_lossy(actual)
        ))
    }
}

/// Runs one case and compares it to its expected exit code and goldens.
pub fn check_case(case: &Case) -> Result<(), String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let dir = scratch_copy();
    let stdin = case.args.contains(&"-").then(|| dir.path().join("table.sdds"));
    let outcome = run_in(dir.path(), case.args, stdin.as_deref());
    if outcome.code != case.code {
        return Err(format!(
            "{}: exit {} (expected {})\n{}",
            case.name,
            outcome.code,
            case.code,
            String::from_utf8_lossy(&outcome.stderr)
        ));
    }
    let golden = crate_dir().join("tests/golden");
    compare(
        &golden.join(format!("{}.txt", case.name)),
        &transcript(&outcome),
        update,
    )?;
    if let Some(out) = case.output {
        let produced =
            fs::read(dir.path().join(out)).map_err(|e| format!("{}: no output {out}: {e}", case.name))?;
        compare(&golden.join(format!("{}.out", case.name)), &produced, update)?;
    }
    Ok(())
}
