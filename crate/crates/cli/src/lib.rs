//! The `sdds` postprocessing toolkit: one executable, eight subcommands.
//!
//! [`run`] takes the argument list and the three standard streams so the
//! whole tool can be driven in-process. Exit codes: 0 success, 1 data or
//! validation error, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use sdds::ascii::format_value;
use sdds::expr::{compile, parse_expr, ExprType};
use sdds::plot::{render_svg, PlotSpec, PlotStyle, Points};
use sdds::{DataMode, DataType, Dataset, DatasetReader, Endian, FieldDef, Schema, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "sdds",
    version,
    about = "Inspect and transform self-describing data set files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the mode, byte order, fields and page sizes of a file
    Query { file: PathBuf },
    /// Print columns as an aligned table
    Print {
        file: PathBuf,
        /// Comma-separated column names, in output order
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        /// Print only this page (1-based)
        #[arg(long)]
        page: Option<usize>,
    },
    /// Rewrite a file in another mode or byte order
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Read a file completely and report every problem found
    Check { file: PathBuf },
    /// Keep only the rows where an expression is true
    Filter {
        input: PathBuf,
        output: PathBuf,
        #[arg(long = "where", value_name = "EXPR", allow_hyphen_values = true)]
        predicate: String,
    },
    /// Append columns computed from expressions
    Derive {
        input: PathBuf,
        output: PathBuf,
        /// NAME=EXPR:TYPE; repeatable, applied in order
        #[arg(
            long = "column",
            value_name = "NAME=EXPR:TYPE",
            value_parser = parse_derive,
            required = true,
            allow_hyphen_values = true
        )]
        columns: Vec<DeriveSpec>,
    },
    /// Concatenate the pages of files sharing one schema
    Combine {
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Render columns as an SVG plot
    Plot {
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Third column; makes a projected 3-D scatter plot
        #[arg(long, conflicts_with = "lines")]
        z: Option<String>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Plot only this page (1-based); all pages by default
        #[arg(long)]
        page: Option<usize>,
        /// Join the points with a line instead of drawing markers
        #[arg(long)]
        lines: bool,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct FormatArgs {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    endian: Option<EndianArg>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModeArg {
    Ascii,
    Binary,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum EndianArg {
    Little,
    Big,
}

impl FormatArgs {
    fn apply(self, dataset: Dataset) -> Dataset {
        let mode = match self.mode {
            Some(ModeArg::Ascii) => DataMode::Ascii,
            Some(ModeArg::Binary) => DataMode::Binary,
            None => dataset.schema.mode,
        };
        let endian = match self.endian {
            Some(EndianArg::Little) => Endian::Little,
            Some(EndianArg::Big) => Endian::Big,
            None => dataset.schema.endian,
        };
        dataset.with_format(mode, endian)
    }
}

#[derive(Debug, Clone)]
struct DeriveSpec {
    name: String,
    source: String,
    data_type: DataType,
}

fn parse_derive(arg: &str) -> Result<DeriveSpec, String> {
    let (name, rest) = arg
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=EXPR:TYPE, got '{arg}'"))?;
    let (source, ty) = rest
        .rsplit_once(':')
        .ok_or_else(|| format!("missing ':TYPE' in '{arg}'"))?;
    if !sdds::model::is_valid_name(name) {
        return Err(format!("bad column name '{name}'"));
    }
    Ok(DeriveSpec {
        name: name.to_string(),
        source: source.to_string(),
        data_type: ty.parse()?,
    })
}

/// A failed invocation: exit code and message for the error stream.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn data_err(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_DATA,
        message: message.into(),
    }
}

fn usage_err(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
}

impl Io<'_> {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>, Failure> {
        if path == Path::new("-") {
            let mut buf = Vec::new();
            self.stdin
                .read_to_end(&mut buf)
                .map_err(|e| data_err(format!("standard input: {e}")))?;
            Ok(buf)
        } else {
            fs::read(path).map_err(|e| data_err(format!("{}: {e}", path.display())))
        }
    }

    fn load(&mut self, path: &Path) -> Result<Dataset, Failure> {
        let bytes = self.read(path)?;
        sdds::read_dataset(&bytes).map_err(|e| data_err(format!("{}: {e}", path.display())))
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), Failure> {
        if path == Path::new("-") {
            self.stdout
                .write_all(bytes)
                .and_then(|()| self.stdout.flush())
                .map_err(|e| data_err(format!("standard output: {e}")))
        } else {
            fs::write(path, bytes).map_err(|e| data_err(format!("{}: {e}", path.display())))
        }
    }

    fn save(&mut self, path: &Path, dataset: &Dataset) -> Result<(), Failure> {
        if path == Path::new("-") && dataset.schema.mode == DataMode::Binary {
            return Err(usage_err(
                "binary data cannot be written to standard output; use --mode ascii or a file",
            ));
        }
        let bytes = dataset.to_bytes().map_err(|e| data_err(e.to_string()))?;
        self.write(path, &bytes)
    }
}

/// Runs one invocation; returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io { stdin, stdout };
    let result = match cli.command {
        Command::Query { file } => query(&mut io, &file),
        Command::Print { file, columns, page } => print(&mut io, &file, columns, page),
        Command::Convert {
            input,
            output,
            format,
        } => io.load(&input).and_then(|d| io.save(&output, &format.apply(d))),
        Command::Check { file } => check(&mut io, &file, stderr),
        Command::Filter {
            input,
            output,
            predicate,
        } => io
            .load(&input)
            .and_then(|d| filter(d, &predicate))
            .and_then(|d| io.save(&output, &d)),
        Command::Derive {
            input,
            output,
            columns,
        } => io
            .load(&input)
            .and_then(|d| derive(d, &columns))
            .and_then(|d| io.save(&output, &d)),
        Command::Combine {
            output,
            inputs,
            format,
        } => combine(&mut io, &inputs).and_then(|d| io.save(&output, &format.apply(d))),
        Command::Plot {
            file,
            x,
            y,
            z,
            output,
            page,
            lines,
        } => plot(
            &mut io,
            &file,
            [Some(&x), Some(&y), z.as_ref()],
            &output,
            page,
            lines,
        ),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn kind_line(out: &mut String, kind: &str, def: &FieldDef) {
    let _ = write!(out, "{kind} {} {}", def.name, def.data_type);
    if let Some(units) = &def.units {
        let _ = write!(out, " {units}");
    }
    out.push('\n');
}

fn query(io: &mut Io, file: &Path) -> Result<(), Failure> {
    let data = io.load(file)?;
    let s = &data.schema;
    let mut out = format!("mode: {}\nendian: {}\n", s.mode, s.endian);
    if let Some(text) = &s.description_text {
        let _ = writeln!(out, "description: {}", text.escape_default());
    }
    if let Some(contents) = &s.description_contents {
        let _ = writeln!(out, "contents: {}", contents.escape_default());
    }
    for p in &s.parameters {
        kind_line(&mut out, "parameter", p);
    }
    for a in &s.arrays {
        kind_line(&mut out, "array", &a.base);
    }
    for c in &s.columns {
        kind_line(&mut out, "column", c);
    }
    let _ = writeln!(out, "pages: {}", data.pages.len());
    for (i, page) in data.pages.iter().enumerate() {
        let _ = writeln!(out, "page {}: {} rows", i + 1, page.row_count);
    }
    io.write(Path::new("-"), out.as_bytes())
}

fn column_index(schema: &Schema, name: &str) -> Result<usize, Failure> {
    schema
        .find_field(sdds::Category::Column, name)
        .ok_or_else(|| data_err(format!("unknown column '{name}'")))
}

fn select_page(data: &Dataset, page: Option<usize>) -> Result<Vec<usize>, Failure> {
    match page {
        None => Ok((0..data.pages.len()).collect()),
        Some(n) if n >= 1 && n <= data.pages.len() => Ok(vec![n - 1]),
        Some(n) => Err(data_err(format!("page {n} of {}", data.pages.len()))),
    }
}

fn print(io: &mut Io, file: &Path, columns: Option<Vec<String>>, page: Option<usize>) -> Result<(), Failure> {
    let data = io.load(file)?;
    let schema = &data.schema;
    let selected: Vec<usize> = match &columns {
        Some(names) => names
            .iter()
            .map(|n| column_index(schema, n))
            .collect::<Result<_, _>>()?,
        None => (0..schema.columns.len()).collect(),
    };
    let pages = select_page(&data, page)?;

    let names: Vec<String> = selected.iter().map(|&c| schema.columns[c].name.clone()).collect();
    let units: Option<Vec<String>> = selected
        .iter()
        .any(|&c| schema.columns[c].units.is_some())
        .then(|| {
            selected
                .iter()
                .map(|&c| schema.columns[c].units.clone().unwrap_or_default())
                .collect()
        });
    let cells: Vec<(usize, Vec<Vec<String>>)> = pages
        .iter()
        .map(|&p| {
            let page = &data.pages[p];
            let rows = (0..page.rows())
                .map(|r| {
                    selected
                        .iter()
                        .map(|&c| format_value(&page.column_data[c][r]))
                        .collect()
                })
                .collect();
            (p, rows)
        })
        .collect();

    let mut widths: Vec<usize> = names.iter().map(|n| n.chars().count()).collect();
    let all_rows = units.iter().chain(cells.iter().flat_map(|(_, rows)| rows.iter()));
    for row in all_rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |row: &[String]| {
        let mut s = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:>w$}"))
            .collect::<Vec<_>>()
            .join(" ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };

    let mut out = line(&names);
    if let Some(units) = &units {
        out.push_str(&line(units));
    }
    for (p, rows) in &cells {
        let _ = writeln!(out, "*** page {}", p + 1);
        for row in rows {
            out.push_str(&line(row));
        }
    }
    io.write(Path::new("-"), out.as_bytes())
}

fn check(io: &mut Io, file: &Path, stderr: &mut dyn Write) -> Result<(), Failure> {
    let bytes = io.read(file)?;
    let name = file.display();
    let mut problems = Vec::new();
    match DatasetReader::new(&bytes) {
        Err(e) => problems.push(e.to_string()),
        Ok(mut reader) => {
            let mut pages = Vec::new();
            loop {
                match reader.next_page() {
                    Ok(Some(page)) => pages.push(page),
                    Ok(None) => break,
                    Err(e) => {
                        problems.push(format!("page {}: {e}", pages.len() + 1));
                        break;
                    }
                }
            }
            let data = Dataset {
                schema: reader.schema().clone(),
                pages,
            };
            problems.extend(data.validate().into_iter().map(|d| d.message));
        }
    }
    if problems.is_empty() {
        return Ok(());
    }
    for p in &problems {
        let _ = writeln!(stderr, "{name}: {p}");
    }
    Err(Failure {
        code: EXIT_DATA,
        message: format!("{name}: {} problem(s)", problems.len()),
    })
}

fn filter(mut data: Dataset, predicate: &str) -> Result<Dataset, Failure> {
    let expr = parse_expr(predicate).map_err(|e| data_err(format!("--where: {e}")))?;
    let compiled = compile(&expr, &data.schema).map_err(|e| data_err(format!("--where: {e}")))?;
    if compiled.result_type() != ExprType::Logical {
        return Err(data_err(format!(
            "--where: expression is {}, expected logical",
            compiled.result_type()
        )));
    }
    for page in &mut data.pages {
        let keep: Vec<bool> = (0..page.rows()).map(|r| compiled.matches(page, r)).collect();
        for column in &mut page.column_data {
            let mut flags = keep.iter();
            column.retain(|_| *flags.next().unwrap_or(&false));
        }
        page.row_count = keep.iter().filter(|&&k| k).count() as i32;
    }
    Ok(data)
}

fn derive(mut data: Dataset, specs: &[DeriveSpec]) -> Result<Dataset, Failure> {
    for spec in specs {
        let label = format!("--column {}", spec.name);
        if data
            .schema
            .find_field(sdds::Category::Column, &spec.name)
            .is_some()
        {
            return Err(data_err(format!(
                "{label}: column '{}' already exists",
                spec.name
            )));
        }
        let expr = parse_expr(&spec.source).map_err(|e| data_err(format!("{label}: {e}")))?;
        let compiled = compile(&expr, &data.schema).map_err(|e| data_err(format!("{label}: {e}")))?;
        let wanted = match spec.data_type {
            DataType::String | DataType::Character => ExprType::Text,
            _ => ExprType::Numeric,
        };
        if compiled.result_type() != wanted {
            return Err(data_err(format!(
                "{label}: expression is {}, expected {wanted} for type {}",
                compiled.result_type(),
                spec.data_type
            )));
        }
        let mut new_columns = Vec::with_capacity(data.pages.len());
        for (p, page) in data.pages.iter().enumerate() {
            let column = (0..page.rows())
                .map(|r| {
                    compiled
                        .eval(page, r)
                        .to_value(spec.data_type)
                        .map_err(|e| data_err(format!("{label}: page {}, row {}: {e}", p + 1, r + 1)))
                })
                .collect::<Result<Vec<Value>, _>>()?;
            new_columns.push(column);
        }
        for (page, column) in data.pages.iter_mut().zip(new_columns) {
            page.column_data.push(column);
        }
        data.schema
            .columns
            .push(FieldDef::new(spec.name.clone(), spec.data_type));
    }
    Ok(data)
}

/// First field where `other` departs from `base`, described for a message.
fn schema_difference(base: &Schema, other: &Schema) -> Option<String> {
    fn fields<'a>(
        kind: &str,
        base: impl Iterator<Item = (&'a FieldDef, usize)>,
        other: impl Iterator<Item = (&'a FieldDef, usize)>,
    ) -> Option<String> {
        let (a, b): (Vec<_>, Vec<_>) = (base.collect(), other.collect());
        for i in 0..a.len().max(b.len()) {
            match (a.get(i), b.get(i)) {
                (Some((x, _)), None) => return Some(format!("{kind} '{}' is missing", x.name)),
                (None, Some((y, _))) => return Some(format!("unexpected {kind} '{}'", y.name)),
                (Some((x, xd)), Some((y, yd))) => {
                    if x.name != y.name {
                        return Some(format!("{kind} '{}' found where '{}' expected", y.name, x.name));
                    }
                    if x.data_type != y.data_type {
                        return Some(format!(
                            "{kind} '{}' type differs: {} vs {}",
                            x.name, x.data_type, y.data_type
                        ));
                    }
                    if x.units != y.units {
                        return Some(format!(
                            "{kind} '{}' units differ: {:?} vs {:?}",
                            x.name,
                            x.units.as_deref().unwrap_or(""),
                            y.units.as_deref().unwrap_or("")
                        ));
                    }
                    if xd != yd {
                        return Some(format!(
                            "{kind} '{}' dimension count differs: {xd} vs {yd}",
                            x.name
                        ));
                    }
                }
                (None, None) => {}
            }
        }
        None
    }
    fn arrays(s: &Schema) -> impl Iterator<Item = (&FieldDef, usize)> {
        s.arrays.iter().map(|a| (&a.base, a.dim_count))
    }
    fn flat(v: &[FieldDef]) -> impl Iterator<Item = (&FieldDef, usize)> {
        v.iter().map(|f| (f, 0))
    }
    fields("parameter", flat(&base.parameters), flat(&other.parameters))
        .or_else(|| fields("array", arrays(base), arrays(other)))
        .or_else(|| fields("column", flat(&base.columns), flat(&other.columns)))
}

fn combine(io: &mut Io, inputs: &[PathBuf]) -> Result<Dataset, Failure> {
    let mut combined: Option<Dataset> = None;
    for path in inputs {
        let data = io.load(path)?;
        match &mut combined {
            None => combined = Some(data),
            Some(acc) => {
                if let Some(diff) = schema_difference(&acc.schema, &data.schema) {
                    return Err(data_err(format!("{}: schema mismatch: {diff}", path.display())));
                }
                acc.pages.extend(data.pages);
            }
        }
    }
    combined.ok_or_else(|| usage_err("no input files"))
}

fn plot(
    io: &mut Io,
    file: &Path,
    axes: [Option<&String>; 3],
    output: &Path,
    page: Option<usize>,
    lines: bool,
) -> Result<(), Failure> {
    let data = io.load(file)?;
    let schema = &data.schema;
    let mut picked = Vec::new();
    for name in axes.into_iter().flatten() {
        let c = column_index(schema, name)?;
        if !schema.columns[c].data_type.is_numeric() {
            return Err(data_err(format!(
                "column '{name}' is {}, not numeric",
                schema.columns[c].data_type
            )));
        }
        picked.push(c);
    }
    let pages = select_page(&data, page)?;
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); picked.len()];
    for &p in &pages {
        for (axis, &c) in coords.iter_mut().zip(&picked) {
            axis.extend(data.pages[p].column_data[c].iter().filter_map(Value::as_f64));
        }
    }
    let points = if picked.len() == 3 {
        Points::Spatial(
            (0..coords[0].len())
                .map(|i| (coords[0][i], coords[1][i], coords[2][i]))
                .collect(),
        )
    } else {
        Points::Planar(
            (0..coords[0].len())
                .map(|i| (coords[0][i], coords[1][i]))
                .collect(),
        )
    };
    let mut spec = PlotSpec::new(points);
    spec.style = if lines {
        PlotStyle::Line
    } else {
        PlotStyle::Scatter
    };
    spec.labels = picked
        .iter()
        .map(|&c| {
            let def = &schema.columns[c];
            match &def.units {
                Some(u) => format!("{} ({u})", def.name),
                None => def.name.clone(),
            }
        })
        .collect();
    let svg = render_svg(&spec).map_err(|e| data_err(e.to_string()))?;
    io.write(output, svg.as_bytes())
}
