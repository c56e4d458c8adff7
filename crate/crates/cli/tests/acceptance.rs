//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Every workload is seeded, so a failure reproduces.

mod common;

use std::collections::HashSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdds::header::{emit_header, parse_header};
use sdds::plot::{nice_ticks, render_svg, PlotSpec, Points};
use sdds::{read_dataset, DataMode, DataType, Dataset, Endian, FieldDef, Schema, Value};
use sdds_testkit::exprgen::ExprGen;
use sdds_testkit::gen::{random_dataset, random_schema, random_value, GenConfig};
use sdds_testkit::oracle::{nice_ticks_oracle, random_range};
use sdds_testkit::reference::{evaluate_row, select_rows, RefValue};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn sdds(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = sdds_toolkit::run(
        std::iter::once("sdds").chain(args.iter().copied()),
        &mut std::io::empty(),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8_lossy(&err).into_owned())
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn dataset_eq_bits(a: &Dataset, b: &Dataset) -> bool {
    a.schema.parameters == b.schema.parameters
        && a.schema.arrays == b.schema.arrays
        && a.schema.columns == b.schema.columns
        && a.pages == b.pages
}

fn cross_endian() -> Outcome {
    let start = Instant::now();
    let mut types = HashSet::new();
    let mut max_dims = 0;
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, &GenConfig::default());
        let fields = data.schema.parameters.iter().chain(&data.schema.columns);
        types.extend(fields.map(|f| f.data_type));
        types.extend(data.schema.arrays.iter().map(|a| a.base.data_type));
        max_dims = data
            .schema
            .arrays
            .iter()
            .map(|a| a.dim_count)
            .fold(max_dims, usize::max);

        let trip = |endian| -> Result<Dataset, String> {
            let bytes = data.clone().with_format(DataMode::Binary, endian).to_bytes();
            read_dataset(&bytes.map_err(|e| e.to_string())?).map_err(|e| e.to_string())
        };
        let little = trip(Endian::Little).map_err(|e| format!("seed {seed}: little: {e}"))?;
        let big = trip(Endian::Big).map_err(|e| format!("seed {seed}: big: {e}"))?;
        if big.schema.endian != Endian::Big || little.schema.endian != Endian::Little {
            return Err(format!("seed {seed}: endianness not recorded"));
        }
        if !dataset_eq_bits(&little, &big) || !dataset_eq_bits(&little, &data) {
            return Err(format!("seed {seed}: big and little endian reads differ"));
        }
    }
    let elapsed = start.elapsed();
    if types.len() != DataType::ALL.len() {
        return Err(format!("only {} of 7 types exercised", types.len()));
    }
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {:.1}s", elapsed.as_secs_f64()));
    }
    Ok(format!(
        "500 datasets, 7 types, arrays up to {max_dims} dims, bit-exact in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn mode_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let [b1, a, a2, b2] = ["b1", "a", "a2", "b2"].map(|n| dir.path().join(format!("{n}.sdds")));
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = random_dataset(&mut rng, &GenConfig::default());
        data.schema.mode = DataMode::Binary;
        fs::write(&b1, data.to_bytes().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for (from, to, mode) in [(&b1, &a, "ascii"), (&a, &a2, "ascii"), (&a, &b2, "binary")] {
            let (code, err) = sdds(&["convert", path(from), path(to), "--mode", mode]);
            if code != 0 {
                return Err(format!("seed {seed}: convert to {mode}: exit {code}: {err}"));
            }
        }
        let text = fs::read(&a).map_err(|e| e.to_string())?;
        if text != fs::read(&a2).map_err(|e| e.to_string())? {
            return Err(format!("seed {seed}: ascii re-emission is not byte-identical"));
        }
        let back = read_dataset(&fs::read(&b2).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if back.schema.mode != DataMode::Binary || !back.eq_canonical_nan(&data) {
            return Err(format!("seed {seed}: binary -> ascii -> binary changed the data"));
        }
    }
    Ok("500 datasets survive binary -> ascii -> binary; ascii re-emission byte-identical".into())
}

/// Splits into alternating runs of separators and non-separators.
fn tokens(bytes: &[u8]) -> Vec<&[u8]> {
    let sep = |b: &u8| matches!(b, b' ' | b',' | b'\n' | b'=');
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=bytes.len() {
        if i == bytes.len() || sep(&bytes[i]) != sep(&bytes[i - 1]) {
            out.push(&bytes[start..i]);
            start = i;
        }
    }
    out
}

fn mutate(rng: &mut ChaCha8Rng, mut bytes: Vec<u8>) -> Vec<u8> {
    for _ in 0..rng.gen_range(1..=3) {
        if bytes.is_empty() {
            break;
        }
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(0..bytes.len());
                bytes[i] = if rng.gen_bool(0.5) {
                    bytes[i] ^ (1 << rng.gen_range(0..8))
                } else {
                    rng.gen()
                };
            }
            1 => {
                let keep = rng.gen_range(0..bytes.len());
                bytes.truncate(keep);
            }
            _ => {
                let mut parts = tokens(&bytes);
                if parts.len() >= 2 {
                    let i = rng.gen_range(0..parts.len());
                    let j = rng.gen_range(0..parts.len());
                    parts.swap(i, j);
                }
                bytes = parts.concat();
            }
        }
    }
    bytes
}

fn check_parse(bytes: &[u8]) -> Result<(), String> {
    match parse_header(bytes) {
        Ok((schema, start)) => {
            let problems = schema.validate();
            if start > bytes.len() || !problems.is_empty() {
                return Err(format!("accepted an invalid schema: {problems:?}"));
            }
        }
        Err(d) => {
            if d.line == 0 || d.column == 0 {
                return Err(format!("unlocated diagnostic: {d}"));
            }
        }
    }
    Ok(())
}

fn header_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5dd5);
    let seeds: Vec<Vec<u8>> = (0..50)
        .map(|_| emit_header(&random_schema(&mut rng, &GenConfig::default())).expect("emit"))
        .collect();
    let (to_worker, inputs) = mpsc::channel::<Vec<u8>>();
    let (to_main, results) = mpsc::channel::<Result<(), String>>();
    // A hang would leave the worker blocked; it is detached and dies with the process.
    thread::spawn(move || {
        for bytes in inputs {
            let verdict = catch_unwind(AssertUnwindSafe(|| check_parse(&bytes)))
                .unwrap_or_else(|_| Err("panicked".into()));
            if to_main.send(verdict).is_err() {
                return;
            }
        }
    });
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut outcome = Ok(());
    let mut checked = 0;
    for n in 0..10_000 {
        let seed = seeds.choose(&mut rng).unwrap().clone();
        let input = mutate(&mut rng, seed);
        let shown = String::from_utf8_lossy(&input).into_owned();
        to_worker.send(input).expect("worker alive");
        match results.recv_timeout(Duration::from_secs(1)) {
            Ok(Ok(())) => {}
            Ok(Err(e)) => {
                outcome = Err(format!("input {n}: {e}\n{shown}"));
                break;
            }
            Err(_) => {
                outcome = Err(format!("input {n}: no verdict within 1s\n{shown}"));
                break;
            }
        }
        checked += 1;
    }
    std::panic::set_hook(hook);
    outcome.map(|()| format!("{checked} mutated headers: each parsed valid or located, none crashed or hung"))
}

fn same(got: &Value, want: &RefValue) -> bool {
    match (got, want) {
        (Value::Double(a), RefValue::Num(b)) => a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
        (Value::Str(a), RefValue::Str(b)) => a == b,
        _ => false,
    }
}

/// Reference conversion to a 32-bit integer: round half to even, then range check.
fn to_long(v: f64) -> Option<i32> {
    let r = v.round_ties_even();
    (r.is_finite() && r >= f64::from(i32::MIN) && r <= f64::from(i32::MAX)).then_some(r as i32)
}

fn differential_one(seed: u64, dir: &Path) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GenConfig {
        pages: (1, 2),
        max_rows: 500,
        tame: seed.is_multiple_of(3),
        ..GenConfig::default()
    };
    let data = random_dataset(&mut rng, &cfg);
    let (predicate, numeric, text, rounded) = {
        let mut g = ExprGen::new(&mut rng, &data.schema);
        let depth = (seed % 4) as u32 + 1;
        (g.predicate(depth), g.numeric(depth), g.text(), g.numeric(2))
    };
    let [input, filtered, derived, long] = ["in", "f", "d", "l"].map(|n| dir.join(format!("{n}.sdds")));
    fs::write(&input, data.to_bytes().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let load = |p: &Path| read_dataset(&fs::read(p).map_err(|e| e.to_string())?).map_err(|e| e.to_string());

    let (code, err) = sdds(&["filter", path(&input), path(&filtered), "--where", &predicate]);
    if code != 0 {
        return Err(format!("filter {predicate:?}: exit {code}: {err}"));
    }
    let kept = load(&filtered)?;
    let want_rows = select_rows(&predicate, &data)?;
    let mut want = data.clone();
    for (page, rows) in want.pages.iter_mut().zip(&want_rows) {
        for column in &mut page.column_data {
            *column = rows.iter().map(|&r| column[r].clone()).collect();
        }
        page.row_count = rows.len() as i32;
    }
    if !kept.eq_canonical_nan(&want) {
        return Err(format!("filter {predicate:?} disagrees with the reference"));
    }
    let mut checked = kept.pages.iter().map(|p| p.rows()).sum::<usize>();

    let num_spec = format!("zz_num={numeric}:double");
    let text_spec = format!("zz_text={text}:string");
    let (code, err) = sdds(&[
        "derive",
        path(&filtered),
        path(&derived),
        "--column",
        &num_spec,
        "--column",
        &text_spec,
    ]);
    if code != 0 {
        return Err(format!("derive {numeric:?} / {text:?}: exit {code}: {err}"));
    }
    let out = load(&derived)?;
    let n = kept.schema.columns.len();
    for (page, (got_page, src_page)) in out.pages.iter().zip(&kept.pages).enumerate() {
        for row in 0..src_page.rows() {
            for (offset, source) in [numeric.as_str(), text.as_str()].into_iter().enumerate() {
                let expected = evaluate_row(source, &kept, src_page, row)?;
                let got = &got_page.column_data[n + offset][row];
                if !same(got, &expected) {
                    return Err(format!(
                        "derive {source:?} page {page} row {row}: {got:?} vs {expected:?}"
                    ));
                }
            }
        }
    }

    let long_spec = format!("zz_long={rounded}:long");
    let (code, err) = sdds(&["derive", path(&filtered), path(&long), "--column", &long_spec]);
    let mut expected = Vec::new();
    for page in &kept.pages {
        for row in 0..page.rows() {
            match evaluate_row(&rounded, &kept, page, row)? {
                RefValue::Num(v) => expected.push(to_long(v)),
                other => return Err(format!("{rounded:?} evaluated to {other:?}")),
            }
        }
    }
    if expected.iter().any(Option::is_none) {
        if code != 1 {
            return Err(format!(
                "derive {rounded:?}:long should overflow, got exit {code}"
            ));
        }
    } else {
        if code != 0 {
            return Err(format!("derive {rounded:?}:long: exit {code}: {err}"));
        }
        let got: Vec<Option<i32>> = load(&long)?
            .pages
            .iter()
            .flat_map(|p| p.column_data[n].iter())
            .map(|v| match v {
                Value::Long(x) => Some(*x),
                _ => None,
            })
            .collect();
        if got != expected {
            return Err(format!("derive {rounded:?}:long disagrees with the reference"));
        }
    }
    checked += expected.len();
    Ok(checked)
}

fn filter_derive_differential() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rows = 0;
    for seed in 0..200u64 {
        rows += differential_one(seed, dir.path()).map_err(|e| format!("table {seed}: {e}"))?;
    }
    Ok(format!(
        "200 tables, {rows} filtered and derived rows agree with the reference"
    ))
}

fn option_matrix() -> Outcome {
    let mut per_subcommand = std::collections::BTreeMap::new();
    let mut codes = HashSet::new();
    for case in common::CASES {
        common::check_case(case)?;
        *per_subcommand.entry(case.args[0]).or_insert(0) += 1;
        codes.insert(case.code);
    }
    let subcommands = [
        "query", "print", "convert", "check", "filter", "derive", "combine", "plot",
    ];
    for sub in subcommands {
        let n = per_subcommand.get(sub).copied().unwrap_or(0);
        if n < 5 {
            return Err(format!("{sub} has only {n} cases"));
        }
    }
    if codes != HashSet::from([0, 1, 2]) {
        return Err(format!("exit codes seen: {codes:?}"));
    }
    Ok(format!(
        "{} cases across 8 subcommands match goldens; exits 0/1/2",
        common::CASES.len()
    ))
}

fn numeric_table(rng: &mut ChaCha8Rng) -> Dataset {
    let numeric = [
        DataType::Short,
        DataType::Long,
        DataType::Long64,
        DataType::Float,
        DataType::Double,
    ];
    let mut schema = Schema::new(DataMode::Binary, Endian::Little);
    for name in ["a", "b", "c"] {
        schema
            .columns
            .push(FieldDef::new(name, *numeric.choose(rng).unwrap()));
    }
    let mut data = Dataset {
        schema,
        pages: Vec::new(),
    };
    for _ in 0..rng.gen_range(1..=3) {
        let rows = rng.gen_range(1..=80);
        let columns = data
            .schema
            .columns
            .iter()
            .map(|c| (0..rows).map(|_| random_value(rng, c.data_type, true)).collect())
            .collect();
        data.push_page(Vec::new(), Vec::new(), columns)
            .expect("consistent page");
    }
    data
}

fn count_glyphs(svg: &str) -> Result<usize, String> {
    let doc = roxmltree::Document::parse(svg).map_err(|e| format!("malformed svg: {e}"))?;
    Ok(doc.descendants().filter(|n| n.has_tag_name("circle")).count())
}

fn plot_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("t.sdds");
    let [first, second] = ["1.svg", "2.svg"].map(|n| dir.path().join(n));
    let mut rng = ChaCha8Rng::seed_from_u64(0x9107);
    for table in 0..50 {
        let data = numeric_table(&mut rng);
        fs::write(&input, data.to_bytes().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let mut args = vec!["plot", path(&input), "--x", "a", "--y", "b"];
        if table % 2 == 1 {
            args.extend(["--z", "c"]);
        }
        for out in [&first, &second] {
            let (code, err) = sdds(&[&args[..], &["-o", path(out)]].concat());
            if code != 0 {
                return Err(format!("table {table}: plot exit {code}: {err}"));
            }
        }
        let svg = fs::read_to_string(&first).map_err(|e| e.to_string())?;
        if svg != fs::read_to_string(&second).map_err(|e| e.to_string())? {
            return Err(format!("table {table}: two renders differ"));
        }
        let points: usize = data.pages.iter().map(|p| p.rows()).sum();
        let glyphs = count_glyphs(&svg)?;
        if glyphs != points {
            return Err(format!("table {table}: {glyphs} glyphs for {points} points"));
        }
    }
    let spec = PlotSpec::new(Points::Planar(vec![(0.0, 1.0), (2.5, -3.0), (7.0, 7.0)]));
    if render_svg(&spec) != render_svg(&spec.clone()) {
        return Err("identical specs rendered differently".into());
    }
    for n in 0..1000 {
        let (min, max) = random_range(&mut rng);
        let target = rng.gen_range(2..=12);
        let got = nice_ticks(min, max, target).map_err(|e| format!("range {n}: {e}"))?;
        let want = nice_ticks_oracle(min, max, target).ok_or(format!("range {n}: no oracle answer"))?;
        if got.len() != want.len() || got.iter().zip(&want).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(format!(
                "nice_ticks({min:e}, {max:e}, {target}) = {got:?}, oracle {want:?}"
            ));
        }
    }
    Ok(
        "50 tables render byte-identically with one glyph per point; 1000 tick ranges match the oracle"
            .into(),
    )
}

fn main() {
    let criteria: [(&str, Check); 6] = [
        ("cross-endian", cross_endian),
        ("mode round trip", mode_round_trip),
        ("header fuzz", header_fuzz),
        ("filter/derive differential", filter_derive_differential),
        ("toolkit option matrix", option_matrix),
        ("plot determinism", plot_determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{secs:.1}s]", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail} [{secs:.1}s]", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
